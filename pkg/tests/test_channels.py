import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stretchbound.channels import (
    ChannelKind,
    apply_channel,
    make_channel,
    parse_channel,
    phi_vanishing_threshold,
)
from stretchbound.errors import ChannelDomainError, DimensionError, ParseError
from stretchbound.simulation import random_single_mode_state
from stretchbound.symplectic import GaussianState, validate_cm


def test_make_channel_examples():
    ch = make_channel("thermal", eta=0.9, nbar=1)
    assert ch.nu == pytest.approx(0.15, abs=1e-15)
    assert make_channel(ChannelKind.PURE_LOSS, eta=0.5).nu == 0.25
    add = make_channel("additive", xi=0.1)
    assert add.eta == 1.0 and add.nu == 0.1
    amp = make_channel("amp", eta=1.5, nbar=1)
    assert amp.nu == pytest.approx(0.75)


@pytest.mark.parametrize(
    "kind, params",
    [
        ("thermal", dict(eta=1.0, nbar=1)),
        ("thermal", dict(eta=0.0, nbar=1)),
        ("thermal", dict(eta=0.5, nbar=-1)),
        ("amp", dict(eta=0.9, nbar=1)),
        ("amp", dict(eta=1.5, nbar=-0.1)),
        ("additive", dict(xi=0.0)),
        ("additive", dict(xi=-0.3)),
        ("pureloss", dict(eta=1.2)),
        ("thermal", dict(eta=0.5)),
        ("additive", dict(xi=0.1, eta=1.0)),
        ("thermal", dict(eta=float("nan"), nbar=1)),
    ],
)
def test_make_channel_domain_errors(kind, params):
    with pytest.raises(ChannelDomainError):
        make_channel(kind, **params)


@pytest.mark.parametrize(
    "text, kind, params",
    [
        ("thermal:eta=0.9,nbar=1", ChannelKind.THERMAL_LOSS, {"eta": 0.9, "nbar": 1.0}),
        ("amp:eta=1.5,nbar=1", ChannelKind.NOISY_AMPLIFIER, {"eta": 1.5, "nbar": 1.0}),
        ("additive:xi=0.1", ChannelKind.ADDITIVE_NOISE, {"xi": 0.1}),
        ("pureloss:eta=0.5", ChannelKind.PURE_LOSS, {"eta": 0.5}),
        (" thermal: nbar = 2 , eta = 0.3 ", ChannelKind.THERMAL_LOSS, {"eta": 0.3, "nbar": 2.0}),
    ],
)
def test_parse_channel(text, kind, params):
    ch = parse_channel(text)
    assert ch.kind is kind
    assert ch.params() == params
    assert parse_channel(ch.spec()) == ch


@pytest.mark.parametrize(
    "text, key",
    [
        ("thermal:eta=0.9,nbr=1", "nbr"),
        ("thermal:eta=0.9", "nbar"),
        ("thermal:eta=0.9,eta=0.8,nbar=1", "eta"),
        ("additive:xi=abc", "xi"),
        ("laser:eta=0.9", "laser"),
        ("additive:xi", "xi"),
    ],
)
def test_parse_errors_name_the_key(text, key):
    with pytest.raises(ParseError) as info:
        parse_channel(text)
    assert info.value.key == key
    assert key in str(info.value)


def test_parse_requires_kind_prefix():
    with pytest.raises(ParseError):
        parse_channel("eta=0.9")


def test_parse_domain_error_is_not_parse_error():
    with pytest.raises(ChannelDomainError):
        parse_channel("thermal:eta=1.5,nbar=1")


def test_apply_channel_examples():
    out = apply_channel(make_channel("thermal", eta=0.9, nbar=1), GaussianState.vacuum())
    assert np.allclose(out.cm, 0.6 * np.eye(2), atol=1e-15)

    coherent = GaussianState([2.0, 0.0], 0.5 * np.eye(2))
    out = apply_channel(make_channel("pureloss", eta=0.25), coherent)
    assert np.allclose(out.mean, [1.0, 0.0], atol=1e-15)
    assert np.allclose(out.cm, 0.5 * np.eye(2), atol=1e-15)

    out = apply_channel(make_channel("additive", xi=0.3), GaussianState.thermal(1))
    assert np.allclose(out.cm, 1.8 * np.eye(2), atol=1e-15)

    with pytest.raises(DimensionError):
        apply_channel(make_channel("additive", xi=0.3), GaussianState.vacuum(2))


channels = st.one_of(
    st.builds(
        lambda e, n: make_channel("thermal", eta=e, nbar=n),
        st.floats(0.01, 0.99),
        st.floats(0, 10),
    ),
    st.builds(
        lambda e, n: make_channel("amp", eta=e, nbar=n),
        st.floats(1.01, 5),
        st.floats(0, 10),
    ),
    st.builds(lambda x: make_channel("additive", xi=x), st.floats(1e-4, 5)),
    st.builds(lambda e: make_channel("pureloss", eta=e), st.floats(0.01, 0.99)),
)


@given(channels, st.integers(0, 2**32 - 1))
@settings(max_examples=100, deadline=None)
def test_apply_channel_preserves_physicality(channel, seed):
    state = random_single_mode_state(np.random.default_rng(seed))
    assert validate_cm(apply_channel(channel, state).cm).is_physical
    assert channel.nu >= abs(channel.eta - 1) / 2 - 1e-15


@given(st.floats(0.05, 0.95), st.floats(0.05, 0.95), st.integers(0, 2**32 - 1))
@settings(max_examples=50, deadline=None)
def test_loss_composition(eta1, eta2, seed):
    state = random_single_mode_state(np.random.default_rng(seed))
    two = apply_channel(
        make_channel("thermal", eta=eta2, nbar=0),
        apply_channel(make_channel("thermal", eta=eta1, nbar=0), state),
    )
    one = apply_channel(make_channel("pureloss", eta=eta1 * eta2), state)
    assert np.max(np.abs(two.mean - one.mean)) <= 1e-12
    assert np.max(np.abs(two.cm - one.cm)) <= 1e-12


@pytest.mark.parametrize(
    "channel, expected",
    [
        (make_channel("thermal", eta=0.4, nbar=1), True),
        (make_channel("thermal", eta=0.9, nbar=1), False),
        (make_channel("additive", xi=1.5), True),
        (make_channel("additive", xi=1.0), True),
        (make_channel("additive", xi=0.99), False),
        (make_channel("amp", eta=2.0, nbar=1), True),
        (make_channel("amp", eta=1.5, nbar=1), False),
        (make_channel("pureloss", eta=0.5), False),
    ],
)
def test_phi_vanishing_threshold(channel, expected):
    assert phi_vanishing_threshold(channel) is expected


@pytest.mark.parametrize("eta", [0.1, 0.3, 0.5, 0.75, 0.9])
def test_threshold_boundary_is_included(eta):
    nbar = eta / (1 - eta)
    assert phi_vanishing_threshold(make_channel("thermal", eta=eta, nbar=nbar))
    assert not phi_vanishing_threshold(make_channel("thermal", eta=eta, nbar=nbar * (1 - 1e-6)))


def test_channel_repr_round_trip():
    ch = make_channel("amp", eta=1.5, nbar=1)
    assert str(ch) == "amp:eta=1.5,nbar=1.0"
    assert ch.to_dict() == {"kind": "amp", "eta": 1.5, "nbar": 1.0, "nu": 0.75}
    assert math.isclose(parse_channel(str(ch)).nu, ch.nu)
