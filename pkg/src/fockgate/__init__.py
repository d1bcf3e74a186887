"""Conserved invariants of linear-optical evolution on n-photon, m-mode Fock spaces."""

from .algebra import (
    ImageBasis,
    OrthonormalFrame,
    build_frame,
    complete_frame,
    decompose,
    get_frame,
    image_algebra_basis,
    inner_product,
    orthonormalize,
)
from .errors import FockgateError
from .fock_space import (
    DensityMatrix,
    FockBasis,
    PureState,
    dimension,
    enumerate_basis,
    fock_state,
    hopping_expectation,
)
from .invariants import (
    InvariantReport,
    Verdict,
    constants,
    invariants_closed,
    invariants_projection,
    reduced_sum,
    transition_verdict,
)
from .lift import differential_lift, is_optical_realization, matrix_element_oracle, photonic_lift
from .state_parser import format_state, parse_mixture, parse_state

__version__ = "0.1.0"
