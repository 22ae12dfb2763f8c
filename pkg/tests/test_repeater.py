from concurrent.futures import ThreadPoolExecutor

import numpy as np
import pytest

from stretchbound.bounds import phi_bound, psi_bound
from stretchbound.channels import make_channel
from stretchbound.errors import DomainError, SimulationDomainError
from stretchbound.repeater import (
    ChainSpec,
    chain_bound,
    compare_splittings,
    equidistant_additive_chain,
)


def test_single_link_equals_point_to_point():
    ch = make_channel("thermal", eta=0.8, nbar=0.5)
    result = chain_bound([ch])
    assert result.psi_chain == psi_bound(ch).psi
    assert result.argmin_link == 0


def test_identical_links_tie_break_lowest_index():
    ch = make_channel("additive", xi=0.05)
    result = chain_bound([ch, ch])
    assert result.psi_chain == psi_bound(ch).psi
    assert result.argmin_link == 0


def test_eb_link_kills_chain():
    result = chain_bound([make_channel("thermal", eta=0.5, nbar=1), make_channel("thermal", eta=0.9, nbar=1)])
    assert result.psi_chain == 0.0
    assert result.argmin_link == 0


def test_chain_is_exact_minimum():
    links = [
        make_channel("additive", xi=0.1),
        make_channel("additive", xi=0.4),
        make_channel("thermal", eta=0.9, nbar=0.5),
        make_channel("amp", eta=1.3, nbar=0.5),
        make_channel("pureloss", eta=0.6),
    ]
    result = chain_bound(ChainSpec(tuple(links)))
    per_link = [psi_bound(ch).psi for ch in links]
    assert result.per_link_psi == tuple(per_link)
    assert result.psi_chain == min(per_link)
    assert result.argmin_link == int(np.argmin(per_link))
    assert result.phi_chain == min(phi_bound(ch) for ch in links)
    assert all(result.psi_chain <= p for p in per_link)


def test_adding_a_link_never_increases_bound():
    links = [make_channel("additive", xi=0.1), make_channel("thermal", eta=0.85, nbar=1)]
    base = chain_bound(links).psi_chain
    for extra in (make_channel("additive", xi=0.05), make_channel("additive", xi=0.7)):
        assert chain_bound(links + [extra]).psi_chain <= base


def test_executor_does_not_change_result():
    links = [make_channel("additive", xi=x) for x in (0.1, 0.3, 0.2)]
    with ThreadPoolExecutor(max_workers=3) as pool:
        assert chain_bound(links, executor=pool) == chain_bound(links)


def test_link_errors_are_annotated():
    links = [make_channel("additive", xi=0.1), make_channel("amp", eta=1.5, nbar=0)]
    with pytest.raises(SimulationDomainError, match="link 1"):
        chain_bound(links)
    with pytest.raises(DomainError):
        ChainSpec(())


def test_equidistant_examples():
    single = equidistant_additive_chain(0.2, 0)
    ch = make_channel("additive", xi=0.2)
    assert single.psi_chain == psi_bound(ch).psi
    assert single.phi_chain == phi_bound(ch)

    zero = equidistant_additive_chain(1.0, 0)
    assert zero.psi_chain == 0.0 and zero.phi_chain == 0.0
    one = equidistant_additive_chain(1.0, 1)
    assert one.psi_chain > 0 and one.phi_chain > 0

    values = [equidistant_additive_chain(0.2, n).psi_chain for n in range(4)]
    assert all(b > a for a, b in zip(values, values[1:]))


@pytest.mark.parametrize("xi", [0.1, 0.2, 0.5, 1.0])
def test_equidistant_monotone_in_n(xi):
    values = [equidistant_additive_chain(xi, n).psi_chain for n in range(6)]
    assert all(b >= a for a, b in zip(values, values[1:]))


def test_equidistant_domain():
    with pytest.raises(DomainError):
        equidistant_additive_chain(0.2, -1)
    with pytest.raises(DomainError):
        equidistant_additive_chain(0.2, 1.5)
    with pytest.raises(DomainError):
        equidistant_additive_chain(0.0, 1)


def test_equidistant_beats_random_splits():
    equi, others = compare_splittings(0.5, 3, n_random=20, seed=1)
    assert len(others) == 20
    assert all(equi >= o - 1e-12 for o in others)
