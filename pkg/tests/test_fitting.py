import math

import numpy as np
import pytest

from aerosym.aero import SymmetricSin2, TanFamily
from aerosym.errors import ConfigError, DomainError, SingularFit
from aerosym.fitting import (fit_sin2_family, fit_tan_family, read_samples_csv, synthesize,
                             write_samples_csv)

from conftest import ELLIPTIC, MISSILE


@pytest.mark.parametrize("c", [ELLIPTIC, MISSILE])
def test_sin2_round_trip(c):
    samples = synthesize(SymmetricSin2(*c), np.linspace(0.05, math.pi - 0.05, 10))
    res = fit_sin2_family(samples)
    assert abs(res.c0 - c[0]) < 1e-10 and abs(res.c1 - c[1]) < 1e-10
    assert res.cd_rms < 1e-12 and res.cl_rms < 1e-12


def test_sin2_sphere_data():
    a = np.linspace(0.1, 3.0, 12)
    res = fit_sin2_family(np.column_stack([a, np.full(a.size, 0.47), np.zeros(a.size)]))
    assert res.c0 == pytest.approx(0.47, abs=1e-12)
    assert res.c1 == pytest.approx(0.0, abs=1e-12)


def test_sin2_noise_robustness():
    rng = np.random.default_rng(7)
    clean = synthesize(SymmetricSin2(*ELLIPTIC), np.linspace(0.05, math.pi - 0.05, 10))
    worst = 0.0
    for _ in range(100):
        noisy = clean.copy()
        noisy[:, 1:] += 1e-3 * rng.choice([-1.0, 1.0], size=(10, 2))
        res = fit_sin2_family(noisy)
        worst = max(worst, abs(res.c0 - ELLIPTIC[0]), abs(res.c1 - ELLIPTIC[1]))
    assert worst < 1e-2


def test_sin2_weights_match_repetition():
    s = synthesize(SymmetricSin2(*ELLIPTIC), np.linspace(0.1, 3.0, 6))
    s[:, 1] += np.array([0.01, -0.02, 0.0, 0.03, 0.0, -0.01])
    w = np.array([1.0, 2.0, 1.0, 3.0, 1.0, 1.0])
    weighted = fit_sin2_family(s, w)
    repeated = fit_sin2_family(np.repeat(s, w.astype(int), axis=0))
    assert weighted.c0 == pytest.approx(repeated.c0, abs=1e-12)
    assert weighted.c1 == pytest.approx(repeated.c1, abs=1e-12)


def test_sin2_singular():
    with pytest.raises(SingularFit):
        fit_sin2_family([[0.3, 1.0, 0.1], [0.3, 1.0, 0.1]])
    with pytest.raises(ValueError):
        fit_sin2_family([[0.3, 1.0]])


def test_tan_round_trip():
    samples = synthesize(TanFamily(0.05, 2.0), np.linspace(0.0, 0.4, 9))
    res = fit_tan_family(samples, alpha_max=0.5)
    assert abs(res.c0 - 0.05) < 1e-12 and abs(res.c1 - 2.0) < 1e-12


def test_tan_zero_lift():
    a = np.linspace(0.1, 0.4, 5)
    res = fit_tan_family(np.column_stack([a, np.full(5, 0.3), np.zeros(5)]), 0.5)
    assert res.c1 == 0.0


def test_tan_single_angle():
    a = 0.2
    s = np.array([[a, 0.1, 0.5], [a, 0.3, 0.7]])
    res = fit_tan_family(s, 0.5)
    assert res.c0 == pytest.approx(0.2)
    assert res.c1 == pytest.approx(0.6 / math.tan(a))


def test_tan_domain():
    with pytest.raises(DomainError):
        fit_tan_family([[0.6, 0.1, 0.1]], alpha_max=0.5)
    with pytest.raises(ValueError):
        fit_tan_family([[0.1, 0.1, 0.1]], alpha_max=2.0)


def test_csv_round_trip(tmp_path):
    s = synthesize(SymmetricSin2(*MISSILE), np.radians([5.0, 30.0, 60.0, 120.0]))
    p = tmp_path / "missile.csv"
    write_samples_csv(p, s)
    assert p.read_text().splitlines()[0] == "alpha_deg,cd,cl"
    np.testing.assert_allclose(read_samples_csv(p), s, rtol=1e-15, atol=1e-15)


def test_csv_bad_header(tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text("alpha,cd,cl\n1,2,3\n")
    with pytest.raises(ConfigError):
        read_samples_csv(p)
