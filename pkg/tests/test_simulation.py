import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stretchbound.channels import apply_channel, make_channel
from stretchbound.errors import DomainError, SimulationDomainError
from stretchbound.simulation import (
    ResourceFlavor,
    bk_teleport,
    random_single_mode_state,
    resource_state,
    squeezing_from_noise,
    two_mode_cm,
    verify_simulation,
)
from stretchbound.symplectic import GaussianState, ppt_separable, validate_cm, williamson_eigenvalues


def test_two_mode_cm_layout():
    cm = two_mode_cm(1.0, 2.0, 0.5)
    expected = np.array(
        [[1.0, 0, 0.5, 0], [0, 1.0, 0, -0.5], [0.5, 0, 2.0, 0], [0, -0.5, 0, 2.0]]
    )
    assert np.array_equal(cm, expected)


def test_squeezing_from_noise_examples():
    assert squeezing_from_noise(0.5, 0.75) == pytest.approx(0.0, abs=1e-15)
    xi = 0.1
    assert squeezing_from_noise(1.0, xi) == pytest.approx(-0.5 * math.log(xi), abs=1e-15)
    with pytest.raises(SimulationDomainError, match="pure-loss"):
        squeezing_from_noise(0.5, 0.25)


@given(st.floats(0.05, 3.0), st.floats(0.0, 3.0))
@settings(max_examples=100, deadline=None)
def test_squeezing_inverse_relation(eta, excess):
    nu = abs(eta - 1) / 2 + 1e-3 + excess
    r = squeezing_from_noise(eta, nu)
    assert math.exp(-2 * r) * (eta + 1) / 2 == pytest.approx(nu, rel=1e-14, abs=1e-14)


def test_resource_eb_boundary_is_vacuum():
    res = resource_state(make_channel("thermal", eta=0.5, nbar=1))
    assert np.max(np.abs(res.cm - 0.5 * np.eye(4))) <= 1e-12
    assert res.r == pytest.approx(0.0, abs=1e-15)
    assert ppt_separable(res.cm)


@pytest.mark.parametrize("eta", [0.2, 0.4, 0.6, 0.8, 0.95])
def test_resource_vacuum_at_each_eb_boundary(eta):
    res = resource_state(make_channel("thermal", eta=eta, nbar=eta / (1 - eta)))
    assert np.max(np.abs(res.cm - 0.5 * np.eye(4))) <= 1e-12
    assert ppt_separable(res.cm)


@pytest.mark.parametrize("xi", [0.01, 0.1, 0.25, 0.5, 1.0])
def test_additive_resource_is_tmsv(xi):
    res = resource_state(make_channel("additive", xi=xi))
    r = -0.5 * math.log(xi)
    assert res.a == pytest.approx(math.cosh(2 * r) / 2, rel=1e-12)
    assert res.b == pytest.approx(math.cosh(2 * r) / 2, rel=1e-12)
    assert res.c == pytest.approx(math.sinh(2 * r) / 2, rel=1e-12, abs=1e-15)
    assert np.allclose(williamson_eigenvalues(res.cm).nus, [0.5, 0.5], atol=1e-9)


def test_pure_loss_resource():
    res = resource_state(make_channel("pureloss", eta=0.5))
    assert res.flavor is ResourceFlavor.PURE_LOSS_TMSV
    assert res.a == pytest.approx(1.5) and res.b == pytest.approx(1.5)
    assert res.c == pytest.approx(math.sqrt(2), rel=1e-14)


@pytest.mark.parametrize("kind, eta", [("thermal", 0.7), ("amp", 1.5)])
def test_zero_nbar_has_no_generic_resource(kind, eta):
    with pytest.raises(SimulationDomainError):
        resource_state(make_channel(kind, eta=eta, nbar=0))


def test_entanglement_breaking_resource_is_product():
    ch = make_channel("thermal", eta=0.1, nbar=2)
    res = resource_state(ch)
    assert res.flavor is ResourceFlavor.SEPARABLE
    assert res.r < 0
    assert res.c == 0.0
    assert res.noise(math.sqrt(ch.eta)) == pytest.approx(ch.nu, abs=1e-12)
    assert ppt_separable(res.cm)


generic_channels = st.one_of(
    st.builds(lambda e, n: make_channel("thermal", eta=e, nbar=n), st.floats(0.05, 0.99), st.floats(0.01, 5)),
    st.builds(lambda e, n: make_channel("amp", eta=e, nbar=n), st.floats(1.01, 4), st.floats(0.01, 5)),
    st.builds(lambda x: make_channel("additive", xi=x), st.floats(1e-3, 3)),
    st.builds(lambda e: make_channel("pureloss", eta=e), st.floats(0.01, 0.99)),
)


@given(generic_channels)
@settings(max_examples=200, deadline=None)
def test_resource_bona_fide_and_noise_identity(channel):
    res = resource_state(channel)
    assert validate_cm(res.cm).is_physical
    assert abs(res.noise(math.sqrt(channel.eta)) - channel.nu) <= 1e-12 * max(1.0, res.a)


def test_bk_teleport_examples():
    ch = make_channel("thermal", eta=0.9, nbar=1)
    res = resource_state(ch)
    g = math.sqrt(0.9)
    out = bk_teleport(GaussianState.vacuum(), res, g)
    assert np.allclose(out.cm, 0.6 * np.eye(2), atol=1e-12)
    assert np.allclose(out.cm, apply_channel(ch, GaussianState.vacuum()).cm, atol=1e-12)

    shifted = bk_teleport(GaussianState([1.0, 1.0], 0.5 * np.eye(2)), res, g)
    assert np.allclose(shifted.mean, [g, g], atol=1e-15)

    vac_res = resource_state(make_channel("thermal", eta=0.5, nbar=1))
    state = GaussianState.thermal(0.3)
    out = bk_teleport(state, vac_res, 1.0)
    assert np.allclose(out.cm, state.cm + np.eye(2), atol=1e-12)

    with pytest.raises(DomainError):
        bk_teleport(state, vac_res, 0.0)


def test_random_inputs_are_bona_fide():
    rng = np.random.default_rng(0)
    for _ in range(200):
        state = random_single_mode_state(rng)
        nu = williamson_eigenvalues(state.cm).min
        assert 0.5 - 1e-12 <= nu <= 4.0 + 1e-12
        assert np.all(np.abs(state.mean) <= 3.0)


@pytest.mark.parametrize(
    "channel",
    [
        make_channel("thermal", eta=0.7, nbar=2),
        make_channel("pureloss", eta=0.5),
        make_channel("amp", eta=2.0, nbar=0.5),
        make_channel("additive", xi=0.3),
    ],
    ids=str,
)
def test_verify_simulation_passes(channel):
    report = verify_simulation(channel, n_samples=100, tol=1e-10, seed=0)
    assert report.passed
    assert report.max_moment_error <= 1e-10
    assert report.to_dict()["pass"] is True
    assert report.seed == 0


def test_verify_extreme_squeezing_note():
    report = verify_simulation(make_channel("additive", xi=1e-6), n_samples=100, tol=1e-10)
    assert report.passed
    assert report.r == pytest.approx(6.9, abs=0.01)
    assert any("extreme squeezing" in note for note in report.notes)


def test_verify_is_deterministic():
    ch = make_channel("thermal", eta=0.3, nbar=1)
    assert verify_simulation(ch, seed=5) == verify_simulation(ch, seed=5)


def test_verify_reports_failure_below_error():
    report = verify_simulation(make_channel("additive", xi=0.1), n_samples=10, tol=-1.0)
    assert not report.passed
    assert report.to_dict()["pass"] is False
