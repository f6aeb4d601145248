"""Command-line entry point: ``aerosym simulate|fit|check-equivalency|sweep``.

Exit codes: 0 success, 1 configuration error, 2 numerical failure. Errors are
also written to stderr as a one-line JSON object.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
from pathlib import Path

import numpy as np

from .aero import AeroModel, SymmetricSin2, TanFamily, Tabulated, equivalency_defect, load_card, \
    save_card
from .errors import AerosymError, ConfigError, DomainError, SingularFit
from .fitting import fit_sin2_family, fit_tan_family, read_samples_csv
from .scenario import load_scenario, run_scenario, sweep

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_NUMERICAL = 2

_LEVELS = {"error": logging.ERROR, "warn": logging.WARNING, "info": logging.INFO,
           "debug": logging.DEBUG}

log = logging.getLogger("aerosym")


class _Failure(Exception):
    def __init__(self, code, kind, message):
        super().__init__(message)
        self.code = code
        self.kind = kind


def _setup_logging():
    level = os.environ.get("AEROSYM_LOG_LEVEL", "warn").lower()
    logging.basicConfig(level=_LEVELS.get(level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")


def cmd_simulate(args):
    sc = load_scenario(args.scenario)
    runlog = run_scenario(sc)
    out = Path(args.out) if args.out else Path(args.scenario).parent
    paths = runlog.write(out, csv=args.csv)
    print(json.dumps({"name": runlog.name, "status": runlog.status, **runlog.summary}, indent=2))
    for kind, p in paths.items():
        log.info("wrote %s %s", kind, p)
    if not runlog.ok:
        raise _Failure(EXIT_NUMERICAL, runlog.status, runlog.message)
    return EXIT_OK


def cmd_fit(args):
    samples = read_samples_csv(args.samples)
    source = {"re": args.re, "mach": args.mach}
    if args.family == "sin2":
        res = fit_sin2_family(samples)
        model = AeroModel(args.k_a, SymmetricSin2(res.c0, res.c1), source)
        print(f"c0 = {res.c0!r}")
        print(f"c1 = {res.c1!r}")
    else:
        if args.alpha_max is None:
            raise ConfigError("--alpha-max is required for the tan family")
        amax = math.radians(args.alpha_max)
        res = fit_tan_family(samples, amax)
        model = AeroModel(args.k_a, TanFamily(res.c0, res.c1, amax), source)
        print(f"c0bar = {res.c0!r}")
        print(f"c1bar = {res.c1!r}")
    print(f"cd0 = {model.cd0!r}")
    print(f"cd_rms = {res.cd_rms!r}")
    print(f"cl_rms = {res.cl_rms!r}")
    out = Path(args.out) if args.out else Path(args.samples).with_suffix(".card.json")
    save_card(model, out, res.residuals)
    log.info("wrote model card %s", out)
    return EXIT_OK


def equivalency_grid(model, n):
    """``n`` angles on [1 deg, 179 deg], clipped to the family's domain."""
    lo, hi = math.radians(1.0), math.radians(179.0)
    fam = model.family
    if isinstance(fam, TanFamily):
        hi = min(hi, fam.alpha_max - 1e-6)
    elif isinstance(fam, Tabulated):
        lo, hi = max(lo, fam.alpha[0]), min(hi, fam.alpha[-1])
    return np.linspace(lo, hi, n)


def cmd_check_equivalency(args):
    if args.grid < 1:
        raise ConfigError("--grid must be positive")
    model = load_card(args.card)
    defect, cd0 = equivalency_defect(model, equivalency_grid(model, args.grid))
    print(f"defect = {defect!r}")
    print(f"cd0 = {cd0!r}")
    return EXIT_OK


def cmd_sweep(args):
    sc = load_scenario(args.scenario)
    frac, logs = sweep(sc, args.ic_samples, math.radians(args.theta_max), seed=args.seed,
                       parallelism=args.parallel)
    failed = sum(not r.ok for r in logs)
    print(f"convergence_fraction = {frac!r}")
    print(f"runs = {len(logs)}")
    print(f"flagged = {failed}")
    return EXIT_OK


def build_parser():
    p = argparse.ArgumentParser(prog="aerosym", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="run one scenario")
    s.add_argument("scenario")
    s.add_argument("--out", help="output directory (default: next to the scenario)")
    s.add_argument("--csv", action="store_true", help="also write the per-step CSV log")
    s.set_defaults(func=cmd_simulate)

    f = sub.add_parser("fit", help="fit a coefficient family to alpha_deg,cd,cl samples")
    f.add_argument("samples")
    f.add_argument("--family", choices=("sin2", "tan"), required=True)
    f.add_argument("--alpha-max", type=float, help="pre-stall bound in degrees (tan family)")
    f.add_argument("--k-a", type=float, default=1.0, help="k_a = rho Sigma / 2 [kg/m]")
    f.add_argument("--re", type=float, help="Reynolds number of the data (metadata)")
    f.add_argument("--mach", type=float, help="Mach number of the data (metadata)")
    f.add_argument("--out", help="model card path (default: <samples>.card.json)")
    f.set_defaults(func=cmd_fit)

    c = sub.add_parser("check-equivalency", help="spread of C_D + C_L cot(alpha)")
    c.add_argument("card")
    c.add_argument("--grid", type=int, default=179)
    c.set_defaults(func=cmd_check_equivalency)

    w = sub.add_parser("sweep", help="Monte-Carlo domain-of-attraction study")
    w.add_argument("scenario")
    w.add_argument("--ic-samples", type=int, required=True)
    w.add_argument("--theta-max", type=float, required=True, help="degrees")
    w.add_argument("--seed", type=int, default=0)
    w.add_argument("--parallel", type=int, default=1)
    w.set_defaults(func=cmd_sweep)
    return p


def main(argv=None):
    _setup_logging()
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except _Failure as exc:
        err = {"error": exc.kind, "message": str(exc)}
        code = exc.code
    except (ConfigError, DomainError) as exc:
        err = {"error": type(exc).__name__, "message": str(exc)}
        code = EXIT_CONFIG
    except (SingularFit, AerosymError) as exc:
        err = {"error": type(exc).__name__, "message": str(exc)}
        code = EXIT_NUMERICAL
    print(json.dumps(err), file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
