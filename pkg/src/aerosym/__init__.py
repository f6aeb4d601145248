"""Modelling and velocity control of thrust-propelled symmetric aerial vehicles."""

__version__ = "0.1.0"
