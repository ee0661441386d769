"""Entanglement-entropy growth of translation-invariant quasifree fermion states.

A pure translation-invariant quasifree state is given by a measurable set
``K`` of the circle; its ``N``-site entropy is the binary entropy summed over
the spectrum of the Toeplitz matrix of ``chi_K``.  The package builds sets
whose entropy grows at least like a prescribed sublinear target, computes the
entropy and its lower bounds, and checks them against a brute-force
spin-chain oracle.
"""

from .construct import ConstructionLedger, build_set, read_ledger, write_ledger
from .intervals import IntervalSet, lam, lambda_integral, lambda_profile, normalize, read_set, write_set
from .scan import EntropyReport, entropy_scan, read_report, write_report
from .targets import GrowthTarget, make_near_linear_target, make_power_target, parse_target
from .toeplitz import entropy, fourier_coefficients, spectrum
from .verify import bound_chain, lambda_vs_h, log_lower_bound_probe

__all__ = [
    "ConstructionLedger",
    "EntropyReport",
    "GrowthTarget",
    "IntervalSet",
    "bound_chain",
    "build_set",
    "entropy",
    "entropy_scan",
    "fourier_coefficients",
    "lam",
    "lambda_integral",
    "lambda_profile",
    "lambda_vs_h",
    "log_lower_bound_probe",
    "make_near_linear_target",
    "make_power_target",
    "normalize",
    "parse_target",
    "read_ledger",
    "read_report",
    "read_set",
    "spectrum",
    "write_ledger",
    "write_report",
    "write_set",
]

__version__ = "0.1.0"
