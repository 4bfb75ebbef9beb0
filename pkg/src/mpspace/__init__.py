"""Exact computation of multiple point spaces and image invariants of map germs C^n -> C^(n+1)."""
from __future__ import annotations

__version__ = "0.1.0"

from .errors import (CertificateError, DimensionMismatchError, IncompleteOverRationals, InconsistentSystem,
                     MpspaceError, NotFinite, NotZeroDimensional, ParseError, RingMismatchError,
                     UnderdeterminedPage, UnknownVariableError)
from .poly import MonomialOrder, Polynomial, Ring, parse
from .groebner import groebner_basis, normal_form, set_modular_filter, syzygies
from .ideals import (Ideal, colength, eliminate, intersect, local_colength, rational_points, same_zero_set,
                     saturate)
from .modules import PolyMatrix, PresentedModule, fitting_ideal, koszul_tor, pushforward_presentation
from .multipoint import MapGerm, MultiGerm, corank1_dk_ideal, double_point_ideal
from .series import BranchParam, delta_invariant, milnor_from_delta
from .invariants import image_equation, mu_image, siersma_count, vd_infinity
from .icss import ConstraintLedger, ledger_solve, turn_pages

__all__ = [
    "__version__",
    "CertificateError", "DimensionMismatchError", "IncompleteOverRationals", "InconsistentSystem",
    "MpspaceError", "NotFinite", "NotZeroDimensional", "ParseError", "RingMismatchError",
    "UnderdeterminedPage", "UnknownVariableError",
    "MonomialOrder", "Polynomial", "Ring", "parse",
    "groebner_basis", "normal_form", "set_modular_filter", "syzygies",
    "Ideal", "colength", "eliminate", "intersect", "local_colength", "rational_points", "same_zero_set",
    "saturate",
    "PolyMatrix", "PresentedModule", "fitting_ideal", "koszul_tor", "pushforward_presentation",
    "MapGerm", "MultiGerm", "corank1_dk_ideal", "double_point_ideal",
    "BranchParam", "delta_invariant", "milnor_from_delta",
    "image_equation", "mu_image", "siersma_count", "vd_infinity",
    "ConstraintLedger", "ledger_solve", "turn_pages",
]
