"""Finite-energy teleportation simulation of phase-insensitive channels.

A channel ``(eta, nu)`` is reproduced by Braunstein-Kimble teleportation with
gain ``sqrt(eta)`` over a zero-mean two-mode resource with CM
``[[a I, c Z], [c Z, b I]]``. On moments the protocol is the affine map

    mean -> g mean,    V -> g^2 V + (g^2 a + b - 2 g c) I,

so simulating the channel amounts to ``eta a + b - 2 sqrt(eta) c = nu``.
"""

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .channels import ChannelKind, apply_channel
from .errors import ConstructionError, DomainError, SimulationDomainError
from .symplectic import VACUUM_VARIANCE, GaussianState, validate_cm, williamson_eigenvalues

Z = np.diag([1.0, -1.0])

EXTREME_SQUEEZING = 3.0


class ResourceFlavor(enum.Enum):
    GENERIC = "generic"
    PURE_LOSS_TMSV = "pureloss_tmsv"
    # entanglement-breaking region (nu > (eta+1)/2): product of thermal states
    SEPARABLE = "separable"


def two_mode_cm(a, b, c):
    """CM ``[[a I, c Z], [c Z, b I]]``."""
    return np.block([[a * np.eye(2), c * Z], [c * Z, b * np.eye(2)]])


@dataclass(frozen=True)
class ResourceState:
    a: float
    b: float
    c: float
    r: float
    flavor: ResourceFlavor
    cm: np.ndarray = field(repr=False, compare=False)

    @property
    def state(self):
        return GaussianState.zero_mean(self.cm)

    def noise(self, gain):
        """Added noise of teleportation through this resource at ``gain``."""
        return gain**2 * self.a + self.b - 2 * gain * self.c


def squeezing_from_noise(eta, nu):
    """Entanglement parameter ``r = -ln(2 nu / (eta + 1)) / 2``.

    Requires ``nu > |eta - 1| / 2``. The returned value is negative when
    ``nu > (eta + 1) / 2``, i.e. for entanglement-breaking channels.
    """
    if eta <= 0:
        raise SimulationDomainError(f"eta must be positive, got {eta}")
    floor = abs(eta - 1) / 2
    if nu <= floor * (1 + 1e-12):
        hint = " (pure-loss channel: use the TMSV resource)" if eta < 1 else ""
        raise SimulationDomainError(
            f"nu={nu!r} is at or below |eta-1|/2={floor!r}: finite-resource simulation diverges{hint}"
        )
    return -0.5 * math.log(2 * nu / (eta + 1))


def _generic_abc(eta, r):
    e2 = math.exp(2 * r)
    em2 = math.exp(-2 * r)
    gap = abs(eta - 1)
    b = (-gap + eta * e2 + em2) / (2 * (-e2 * gap + eta + 1))
    c = (2 * b - em2) / (2 * math.sqrt(eta))
    a = (2 * b + (eta - 1) * em2) / (2 * eta)
    return a, b, c


def resource_state(channel):
    """Two-mode resource state simulating ``channel`` by teleportation."""
    kind = channel.kind
    if kind is ChannelKind.PURE_LOSS:
        a = (channel.eta + 1) / (2 * (1 - channel.eta))
        c = math.sqrt(a * a - 0.25)
        return _finish(a, a, c, math.asinh(2 * c) / 2, ResourceFlavor.PURE_LOSS_TMSV)
    if kind in (ChannelKind.THERMAL_LOSS, ChannelKind.NOISY_AMPLIFIER) and channel.nbar == 0:
        raise SimulationDomainError(
            f"{channel.spec()}: quantum-limited channel has no finite-resource simulation "
            "(use the pureloss kind for a pure-loss channel)"
        )
    r = squeezing_from_noise(channel.eta, channel.nu)
    if r < 0:
        a = channel.nu / (channel.eta + 1)
        return _finish(a, a, 0.0, r, ResourceFlavor.SEPARABLE)
    a, b, c = _generic_abc(channel.eta, r)
    return _finish(a, b, c, r, ResourceFlavor.GENERIC)


def _finish(a, b, c, r, flavor):
    cm = two_mode_cm(a, b, c)
    report = validate_cm(cm)
    if not report.is_physical:
        raise ConstructionError(
            f"resource state (a={a!r}, b={b!r}, c={c!r}) is unphysical: "
            f"symplectic eigenvalue {report.min_sympl_eig!r} < 1/2"
        )
    cm.setflags(write=False)
    return ResourceState(a, b, c, r, flavor, cm)


def bk_teleport(state, resource, gain):
    """Moment-level action of Braunstein-Kimble teleportation at ``gain``."""
    if gain <= 0:
        raise DomainError(f"gain must be positive, got {gain}")
    return GaussianState(
        gain * state.mean,
        gain**2 * state.cm + resource.noise(gain) * np.eye(2),
    )


def random_single_mode_state(rng):
    """Random bona fide single-mode state.

    Mean uniform in ``[-3, 3]^2``; CM is a thermal variance in ``[0.5, 4]``
    followed by squeezing ``|s| <= 1`` and a rotation.
    """
    mean = rng.uniform(-3.0, 3.0, size=2)
    nu = rng.uniform(0.5, 4.0)
    s = rng.uniform(-1.0, 1.0)
    theta = rng.uniform(0.0, np.pi)
    rot = np.array([[np.cos(theta), -np.sin(theta)], [np.sin(theta), np.cos(theta)]])
    sq = np.diag([np.exp(-s), np.exp(s)])
    sym = rot @ sq
    return GaussianState(mean, nu * sym @ sym.T)


@dataclass
class SimulationReport:
    channel: str
    max_moment_error: float
    passed: bool
    tol: float
    n_samples: int
    seed: int
    r: float
    flavor: str
    resource_eigs: tuple
    notes: list

    def to_dict(self):
        return {
            "channel": self.channel,
            "pass": self.passed,
            "max_moment_error": self.max_moment_error,
            "tol": self.tol,
            "n_samples": self.n_samples,
            "seed": self.seed,
            "r": self.r,
            "flavor": self.flavor,
            "resource_sympl_eigs": list(self.resource_eigs),
            "notes": list(self.notes),
        }


def verify_simulation(channel, n_samples=100, tol=1e-10, seed=0):
    """Compare teleportation through the resource against the channel on random inputs.

    The error is the max-norm discrepancy over means and CMs, maximized over
    samples. Inputs are drawn from ``numpy.random.default_rng(seed)``.
    """
    resource = resource_state(channel)
    gain = math.sqrt(channel.eta)
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n_samples):
        state = random_single_mode_state(rng)
        sim = bk_teleport(state, resource, gain)
        ref = apply_channel(channel, state)
        err = max(np.max(np.abs(sim.mean - ref.mean)), np.max(np.abs(sim.cm - ref.cm)))
        worst = max(worst, float(err))
    notes = []
    if resource.r > EXTREME_SQUEEZING:
        notes.append(f"extreme squeezing r = {resource.r:.4g} in the resource state")
    if resource.flavor is ResourceFlavor.SEPARABLE:
        notes.append("entanglement-breaking channel: resource is a product of thermal states")
    return SimulationReport(
        channel=channel.spec(),
        max_moment_error=worst,
        passed=worst <= tol,
        tol=tol,
        n_samples=n_samples,
        seed=seed,
        r=resource.r,
        flavor=resource.flavor.value,
        resource_eigs=williamson_eigenvalues(resource.cm).nus,
        notes=notes,
    )
