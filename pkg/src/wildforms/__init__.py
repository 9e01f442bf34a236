"""Exact computations with stacky modular curves X_0(N) and their mod-p modular forms."""

from .charzero import SpaceBasis, basis_for, build_basis, curve_invariants, dimension_M, load_fixture
from .errors import FixtureError, InvariantBreach, PreconditionError, WildformsError
from .ethereal import (
    Generator,
    RingPresentation,
    build_presentation,
    find_frobenius_combinations,
    modp_space,
    oldform_scan,
    reduce_basis,
    verify_as_relation,
)
from .exactnum import FpElement, factor, kronecker
from .modcurve import StackyModel, dim_modp, epsilon_prime, ethereal_report, stacky_model
from .qseries import QExpansion, echelonize, express, sturm_bound
from .stacky import QDivisor, RefinedSignature, presentation_bounds, solve_jump

__version__ = "0.1.0"
