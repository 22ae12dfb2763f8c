"""Secret-key capacity bounds for phase-insensitive Gaussian channels.

``psi``
    Finite-resource bound: relative entropy between the channel's resource
    state and a separable state with the same diagonal blocks and the
    off-diagonal ``c`` replaced by ``c_sep = sqrt((a - 1/2)(b - 1/2))``.
``phi``
    Closed-form infinite-energy bound (zero in the entanglement-breaking
    region).
``plob``
    Secret-key capacity of the pure-loss channel, ``-log2(1 - eta)``.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .channels import ChannelKind, phi_vanishing_threshold
from .errors import (
    ConstructionError,
    DimensionError,
    DomainError,
    NumericalConsistencyError,
    OptimizationError,
    SingularGibbsError,
)
from .simulation import resource_state, two_mode_cm
from .symplectic import (
    VACUUM_VARIANCE,
    GaussianState,
    extended_h,
    ppt_separable,
    sigma_functional,
    von_neumann_entropy,
    williamson_eigenvalues,
)

__all__ = [
    "BoundResult",
    "relative_entropy",
    "separable_candidate",
    "psi_bound",
    "phi_bound",
    "plob",
    "extended_h",
    "optimize_separable_bound",
]

TOL_NEGATIVE = 1e-9
VACUUM_TOL = 1e-12


@dataclass(frozen=True)
class BoundResult:
    channel: object
    psi: float
    phi: float
    plob: float = None
    resource_cm: np.ndarray = field(default=None, repr=False)
    separable_cm: np.ndarray = field(default=None, repr=False)
    entropy_term: float = 0.0
    sigma_cross: float = 0.0
    resource: object = field(default=None, repr=False)

    @property
    def rel_entropy_terms(self):
        return {"entropy_term": self.entropy_term, "sigma_cross": self.sigma_cross}


def _relative_entropy_terms(state1, state2):
    if state1.cm.shape != state2.cm.shape:
        raise DimensionError(f"mode mismatch: {state1.modes} vs {state2.modes} modes")
    entropy = von_neumann_entropy(state1.cm)
    cross = sigma_functional(state1.cm, state1.mean, state2.cm, state2.mean)
    value = cross - entropy
    if value < 0:
        if value < -TOL_NEGATIVE:
            raise NumericalConsistencyError(f"relative entropy evaluated to {value:.3e} < 0")
        value = 0.0
    return value, entropy, cross


def relative_entropy(state1, state2):
    """``S(rho1 || rho2)`` in bits for Gaussian states.

    The entropy of ``state1`` comes from its symplectic spectrum, so pure
    first arguments are fine. ``state2`` must be strictly mixed in every mode.
    """
    return _relative_entropy_terms(state1, state2)[0]


def separable_candidate(resource):
    a, b = resource.a, resource.b
    c_sep = math.sqrt(max(a - VACUUM_VARIANCE, 0.0) * max(b - VACUUM_VARIANCE, 0.0))
    cm = two_mode_cm(a, b, c_sep)
    if not ppt_separable(cm):
        raise ConstructionError(f"separable candidate (a={a!r}, b={b!r}, c_sep={c_sep!r}) fails the PPT test")
    return GaussianState.zero_mean(cm)


def plob(eta):
    if not 0 < eta < 1:
        raise DomainError(f"PLOB bound needs 0 < eta < 1, got {eta}")
    return -math.log2(1 - eta)


def phi_bound(channel):
    """Closed-form infinite-energy bound in bits."""
    if channel.kind is ChannelKind.PURE_LOSS:
        return plob(channel.eta)
    if phi_vanishing_threshold(channel):
        return 0.0
    eta = channel.eta
    if channel.kind is ChannelKind.THERMAL_LOSS:
        n = channel.nbar
        value = -math.log2((1 - eta) * eta**n) - extended_h(n)
    elif channel.kind is ChannelKind.NOISY_AMPLIFIER:
        n = channel.nbar
        value = math.log2(eta ** (n + 1) / (eta - 1)) - extended_h(n)
    else:
        xi = channel.xi
        value = (xi - 1) / math.log(2) - math.log2(xi)
    return max(value, 0.0)


def _is_two_mode_vacuum(cm):
    return np.max(np.abs(cm - VACUUM_VARIANCE * np.eye(4))) <= VACUUM_TOL


def psi_bound(channel):
    """Finite-resource bound with the full intermediate data.

    A separable resource (two-mode vacuum at the entanglement-breaking
    boundary, product thermal state beyond it) has zero relative entropy of
    entanglement; it is returned as its own separable state with ``psi = 0``.
    """
    resource = resource_state(channel)
    phi = phi_bound(channel)
    pl = plob(channel.eta) if channel.kind is ChannelKind.PURE_LOSS else None
    common = dict(channel=channel, phi=phi, plob=pl, resource_cm=resource.cm, resource=resource)
    if _is_two_mode_vacuum(resource.cm) or ppt_separable(resource.cm):
        entropy = von_neumann_entropy(resource.cm)
        return BoundResult(psi=0.0, separable_cm=resource.cm, entropy_term=entropy, sigma_cross=entropy, **common)
    candidate = separable_candidate(resource)
    psi, entropy, cross = _relative_entropy_terms(resource.state, candidate)
    return BoundResult(psi=psi, separable_cm=candidate.cm, entropy_term=entropy, sigma_cross=cross, **common)


@dataclass(frozen=True)
class SeparableOptimum:
    psi_opt: float
    cm_opt: np.ndarray = field(repr=False)
    psi_candidate: float
    params: tuple
    evaluations: int


def _params_to_abc(x):
    a = VACUUM_VARIANCE + math.exp(x[0])
    b = VACUUM_VARIANCE + math.exp(x[1])
    s = math.sin(x[2]) ** 2
    return a, b, s * math.sqrt((a - VACUUM_VARIANCE) * (b - VACUUM_VARIANCE))


def optimize_separable_bound(resource, max_iters=4000, restarts=4, tol=1e-10, seed=0):
    """Locally minimize ``S(resource || sigma)`` over separable ``[[a'I, c'Z], [c'Z, b'I]]``.

    Feasibility is built into the parameterization
    ``a' = 1/2 + e^u``, ``b' = 1/2 + e^v``,
    ``c' = sin(w)^2 sqrt((a' - 1/2)(b' - 1/2))``, so every trial state is
    PPT-separable. Nelder-Mead runs from the ``c_sep`` candidate and from
    ``restarts - 1`` random perturbations of it; the best point wins and is
    never worse than the candidate.
    """
    target = resource.state
    if _is_two_mode_vacuum(resource.cm) or ppt_separable(resource.cm):
        return SeparableOptimum(0.0, resource.cm, 0.0, (resource.a, resource.b, resource.c), 0)

    evaluations = 0

    def objective(x):
        nonlocal evaluations
        evaluations += 1
        if np.max(np.abs(x[:2])) > 30:
            return np.inf
        try:
            return relative_entropy(target, GaussianState.zero_mean(two_mode_cm(*_params_to_abc(x))))
        except (SingularGibbsError, NumericalConsistencyError, DomainError):
            return np.inf

    start = np.array(
        [math.log(resource.a - VACUUM_VARIANCE), math.log(resource.b - VACUUM_VARIANCE), math.pi / 2]
    )
    psi_candidate = objective(start)
    if not math.isfinite(psi_candidate):
        raise OptimizationError("c_sep candidate is infeasible for the relative-entropy objective")
    best_x, best_f = start, psi_candidate
    rng = np.random.default_rng(seed)
    for k in range(max(restarts, 1)):
        x0 = start if k == 0 else start + rng.normal(scale=0.2, size=3)
        res = minimize(
            objective,
            x0,
            method="Nelder-Mead",
            options={"maxiter": max_iters, "xatol": 1e-9, "fatol": tol, "adaptive": False},
        )
        if math.isfinite(res.fun) and res.fun < best_f:
            best_x, best_f = res.x, float(res.fun)
    a, b, c = _params_to_abc(best_x)
    cm = two_mode_cm(a, b, c)
    if not ppt_separable(cm):
        raise OptimizationError("optimizer returned a non-separable state")
    return SeparableOptimum(best_f, cm, psi_candidate, (a, b, c), evaluations)


def channel_summary(result):
    """Diagnostics block used by the CLI: resource parameters and spectra."""
    res = result.resource
    return {
        "r": res.r,
        "a": res.a,
        "b": res.b,
        "c": res.c,
        "flavor": res.flavor.value,
        "sympl_eigs": list(williamson_eigenvalues(res.cm).nus),
        "separable_sympl_eigs": list(williamson_eigenvalues(result.separable_cm).nus),
        "entropy_term_bits": result.entropy_term,
        "sigma_cross_bits": result.sigma_cross,
    }
