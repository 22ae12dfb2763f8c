"""Single-mode phase-insensitive Gaussian channels.

A channel acts on moments as ``mean -> sqrt(eta) mean`` and
``V -> eta V + nu I``. Four families are supported; each is built through
:func:`make_channel` (or :func:`parse_channel` for the CLI grammar), which
derives ``nu`` and enforces the parameter domain.
"""

import enum
import math
import numbers
from dataclasses import dataclass

import numpy as np

from .errors import ChannelDomainError, DimensionError, ParseError
from .symplectic import VACUUM_VARIANCE, GaussianState


class ChannelKind(enum.Enum):
    THERMAL_LOSS = "thermal"
    NOISY_AMPLIFIER = "amp"
    ADDITIVE_NOISE = "additive"
    PURE_LOSS = "pureloss"


# CLI keys accepted for each kind, in canonical order
SPEC_KEYS = {
    ChannelKind.THERMAL_LOSS: ("eta", "nbar"),
    ChannelKind.NOISY_AMPLIFIER: ("eta", "nbar"),
    ChannelKind.ADDITIVE_NOISE: ("xi",),
    ChannelKind.PURE_LOSS: ("eta",),
}

_BOUNDARY_RTOL = 1e-12


@dataclass(frozen=True)
class PhaseInsensitiveChannel:
    kind: ChannelKind
    eta: float
    nu: float
    nbar: float = None
    xi: float = None

    def params(self):
        if self.kind is ChannelKind.ADDITIVE_NOISE:
            return {"xi": self.xi}
        if self.kind is ChannelKind.PURE_LOSS:
            return {"eta": self.eta}
        return {"eta": self.eta, "nbar": self.nbar}

    def spec(self):
        """Render back into the CLI grammar, e.g. ``thermal:eta=0.9,nbar=1``."""
        body = ",".join(f"{k}={v!r}" for k, v in self.params().items())
        return f"{self.kind.value}:{body}"

    def to_dict(self):
        return {"kind": self.kind.value, **self.params(), "nu": self.nu}

    def __str__(self):
        return self.spec()


def _require(name, value, ok, expected):
    if not isinstance(value, numbers.Real) or isinstance(value, bool) or not math.isfinite(value):
        raise ChannelDomainError(f"{name} must be a finite number, got {value!r}")
    if not ok(value):
        raise ChannelDomainError(f"{name}={value!r} outside domain: {expected}")


def make_channel(kind, **params):
    """Build a validated channel, e.g. ``make_channel("thermal", eta=0.9, nbar=1)``."""
    kind = ChannelKind(kind) if not isinstance(kind, ChannelKind) else kind
    allowed = set(SPEC_KEYS[kind])
    extra = set(params) - allowed
    missing = allowed - set(params)
    if extra:
        raise ChannelDomainError(f"unexpected parameter(s) for {kind.value}: {sorted(extra)}")
    if missing:
        raise ChannelDomainError(f"missing parameter(s) for {kind.value}: {sorted(missing)}")

    if kind is ChannelKind.THERMAL_LOSS:
        eta, nbar = params["eta"], params["nbar"]
        _require("eta", eta, lambda v: 0 < v < 1, "0 < eta < 1")
        _require("nbar", nbar, lambda v: v >= 0, "nbar >= 0")
        return PhaseInsensitiveChannel(kind, float(eta), (1 - eta) * (nbar + VACUUM_VARIANCE), nbar=float(nbar))
    if kind is ChannelKind.NOISY_AMPLIFIER:
        eta, nbar = params["eta"], params["nbar"]
        _require("eta", eta, lambda v: v > 1, "eta > 1")
        _require("nbar", nbar, lambda v: v >= 0, "nbar >= 0")
        return PhaseInsensitiveChannel(kind, float(eta), (eta - 1) * (nbar + VACUUM_VARIANCE), nbar=float(nbar))
    if kind is ChannelKind.ADDITIVE_NOISE:
        xi = params["xi"]
        # xi = 0 is the identity channel: its simulation needs infinite squeezing
        _require("xi", xi, lambda v: v > 0, "xi > 0")
        return PhaseInsensitiveChannel(kind, 1.0, float(xi), xi=float(xi))
    eta = params["eta"]
    _require("eta", eta, lambda v: 0 < v < 1, "0 < eta < 1")
    return PhaseInsensitiveChannel(kind, float(eta), (1 - eta) / 2, nbar=0.0)


def parse_channel(text):
    """Parse ``kind:key=value,...`` (e.g. ``amp:eta=1.5,nbar=1``).

    Raises :class:`ParseError` naming the offending key. Domain violations
    surface as :class:`ChannelDomainError` from :func:`make_channel`.
    """
    text = text.strip()
    if ":" not in text:
        raise ParseError(f"channel spec {text!r} is missing 'kind:' prefix", key=None)
    name, _, body = text.partition(":")
    try:
        kind = ChannelKind(name.strip())
    except ValueError:
        kinds = ", ".join(k.value for k in ChannelKind)
        raise ParseError(f"unknown channel kind {name!r} (expected one of {kinds})", key=name) from None
    allowed = SPEC_KEYS[kind]
    params = {}
    for item in filter(None, (s.strip() for s in body.split(","))):
        key, sep, value = item.partition("=")
        key = key.strip()
        if not sep:
            raise ParseError(f"{kind.value}: expected key=value, got {item!r}", key=key)
        if key not in allowed:
            raise ParseError(f"{kind.value}: unknown key {key!r} (allowed: {', '.join(allowed)})", key=key)
        if key in params:
            raise ParseError(f"{kind.value}: duplicate key {key!r}", key=key)
        try:
            params[key] = float(value)
        except ValueError:
            raise ParseError(f"{kind.value}: key {key!r} has non-numeric value {value.strip()!r}", key=key) from None
    for key in allowed:
        if key not in params:
            raise ParseError(f"{kind.value}: missing key {key!r}", key=key)
    return make_channel(kind, **params)


def apply_channel(channel, state):
    if state.modes != 1:
        raise DimensionError(f"phase-insensitive channels act on one mode, got {state.modes}")
    return GaussianState(
        np.sqrt(channel.eta) * state.mean,
        channel.eta * state.cm + channel.nu * np.eye(2),
    )


def phi_vanishing_threshold(channel):
    """True where the infinite-energy bound is zero (boundary included).

    This is exactly the entanglement-breaking region ``nu >= (eta + 1) / 2``.
    """
    kind = channel.kind
    if kind is ChannelKind.THERMAL_LOSS:
        threshold = channel.eta / (1 - channel.eta)
        return channel.nbar >= threshold * (1 - _BOUNDARY_RTOL)
    if kind is ChannelKind.NOISY_AMPLIFIER:
        threshold = 1 / (channel.eta - 1)
        return channel.nbar >= threshold * (1 - _BOUNDARY_RTOL)
    if kind is ChannelKind.ADDITIVE_NOISE:
        return channel.xi >= 1 - _BOUNDARY_RTOL
    return False
