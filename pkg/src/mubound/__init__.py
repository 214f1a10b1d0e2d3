"""Modular symbols of elliptic curves and certificates for mu <= r."""

__version__ = "0.1.0"

from .contfrac import cf_expand, lame_audit, manin_path
from .curve import CurveError, CurveModel, NotOrdinaryError, an_table, ap, named_curve, validate_curve
from .kernels import BACKEND
from .padic_l import PadicLFunction, ThetaElement, mu_lambda_estimate, scan_primes, to_power_series
from .periods import ModularSymbolTable, PeriodEngine, real_period

__all__ = [
    "BACKEND", "CurveError", "CurveModel", "ModularSymbolTable", "NotOrdinaryError",
    "PadicLFunction", "PeriodEngine", "ThetaElement", "an_table", "ap", "cf_expand",
    "lame_audit", "manin_path", "mu_lambda_estimate", "named_curve", "real_period",
    "scan_primes", "to_power_series", "validate_curve",
]
