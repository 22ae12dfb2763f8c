"""Finite-resource and closed-form key-rate bounds for Gaussian channels."""

from .bounds import (
    BoundResult,
    optimize_separable_bound,
    phi_bound,
    plob,
    psi_bound,
    relative_entropy,
    separable_candidate,
)
from .channels import ChannelKind, PhaseInsensitiveChannel, apply_channel, make_channel, parse_channel
from .errors import (
    DomainError,
    NumericalConsistencyError,
    ParseError,
    StretchBoundError,
)
from .fock import convergence_scan, oracle_relative_entropy, symmetric_gaussian_to_fock
from .repeater import ChainSpec, chain_bound, equidistant_additive_chain
from .simulation import ResourceState, resource_state, verify_simulation
from .symplectic import (
    GaussianState,
    extended_h,
    gibbs_matrix,
    ppt_separable,
    sigma_functional,
    validate_cm,
    von_neumann_entropy,
    williamson_eigenvalues,
)

__version__ = "0.1.0"
