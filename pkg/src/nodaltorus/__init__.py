"""Exact spectra and nodal sequences of flat tori, with a mechanical check that
nodal counts separate the Conway-Sloane isospectral 4-tori."""

from .exact import LinearForm, format_linear_form, format_rational, parse_linear_form, parse_rational
from .spectral import build_spectrum, enumerate_ball, enumerate_V_m, first_nodal_difference, nodal_count
from .theorem import build_E, compare_E, verify_theorem
from .torus import ParamTuple, make_Q_minus, make_Q_plus, make_U, quad_form

__version__ = "0.1.0"
