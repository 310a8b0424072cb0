"""Profile enumeration, the Pareto filter, and reservation-level selection."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from agentcap.errors import BudgetExceededError, ConfigurationError, EmptySelectionError
from agentcap.model import (
    AgentUtility,
    GridFamily,
    LinearShareFamily,
    OutputFunction,
    QuadraticCost,
    Scenario,
    StateSpace,
)
from agentcap.pareto import (
    Enumeration,
    feasible_profiles,
    pareto_filter,
    pareto_set,
    select,
)

from conftest import (
    brute_pareto_keep,
    ladder_scenario,
    make_profile,
    smooth_scenario,
    tangent_scenario,
)


# -- enumeration ------------------------------------------------------------


def test_single_contract_enumeration():
    s = ladder_scenario()
    solo = Scenario(
        states=s.states, y=s.y, cost=s.cost, capacity=s.capacity,
        family=GridFamily(((0.0,), (0.0,))), utility=s.utility,
        reservation=0.0, m=s.m,
    )
    profiles = feasible_profiles(solo, 1.0)
    assert len(profiles) == 1
    assert profiles[0].dist.probs == (1.0, 0.0)
    assert profiles[0].agent_utility == 0.0
    assert profiles[0].principal_payoff == 0.0
    assert feasible_profiles(solo, 0.0)[0].principal_payoff == 0.0


def test_enumeration_caches_match_recomputation():
    s = ladder_scenario()
    enum = Enumeration(s)
    for i in range(enum.agent_u.size):
        prof = enum.profile(i, 0.7)
        p = np.array(prof.dist.probs)
        b = np.array(prof.contract.payments)
        assert prof.agent_utility == pytest.approx(float(p @ b) - s.cost.value(p), abs=1e-12)
        assert prof.principal_payoff == pytest.approx(float(p @ (0.7 * s.y.as_array() - b)), abs=1e-12)
        assert prof.capacity_binding == (abs(prof.cost - s.capacity) <= s.tol_u)


def test_budget_guard():
    s = tangent_scenario(0.04)
    with pytest.raises(BudgetExceededError) as exc:
        Enumeration(s, budget=10)
    assert exc.value.budget == 10
    assert exc.value.required > 10
    assert "evaluations" in str(exc.value)


def test_alpha_range_guard():
    s = ladder_scenario()
    with pytest.raises(ConfigurationError):
        feasible_profiles(s, 1.5)
    with pytest.raises(ConfigurationError):
        pareto_set(s, -0.1)


# -- Pareto filter ----------------------------------------------------------


def test_ladder_frontier_by_hand():
    ps = pareto_set(ladder_scenario(), 1.0)
    # slopes below 0.4 are dominated by the slope-0.4 contract; above it the
    # best response is pinned at p_H = 0.2 and the frontier is a clean ladder
    assert len(ps.profiles) == 7
    assert all(p.dist.probs == (0.8, 0.2) for p in ps.profiles)
    assert all(p.capacity_binding for p in ps.profiles)
    levels = np.array(ps.agent_utility_levels)
    assert np.allclose(levels, [0.04, 0.06, 0.08, 0.10, 0.12, 0.14, 0.16], atol=1e-12)
    # sorted by agent utility descending
    assert [round(p.agent_utility, 3) for p in ps.profiles] == [
        0.16, 0.14, 0.12, 0.10, 0.08, 0.06, 0.04,
    ]
    assert ps.profiles[0].principal_payoff == pytest.approx(0.0, abs=1e-12)
    assert ps.profiles[-1].principal_payoff == pytest.approx(0.12, abs=1e-12)


def test_share_family_frontier_by_hand():
    s = ladder_scenario()
    share = Scenario(
        states=s.states, y=s.y, cost=s.cost, capacity=s.capacity,
        family=LinearShareFamily((0.0, 0.5, 1.0), (0.0,)),
        utility=s.utility, reservation=0.0, m=s.m,
    )
    ps = pareto_set(share, 1.0)
    got = {(round(p.agent_utility, 6), round(p.principal_payoff, 6)) for p in ps.profiles}
    # beta = 0 gives (0, 0) and is dominated by beta = 0.5
    assert got == {(0.06, 0.1), (0.16, 0.0)}


def test_filter_drops_dominated_and_keeps_ties():
    kept = pareto_filter([make_profile(1.0, 1.0, 0), make_profile(0.0, 0.0, 1)])
    assert len(kept.profiles) == 1
    both = pareto_filter([make_profile(1.0, 0.0, 0), make_profile(0.0, 1.0, 1)])
    assert len(both.profiles) == 2
    ties = pareto_filter([make_profile(0.5, 0.5, 0), make_profile(0.5, 0.5, 1)])
    assert len(ties.profiles) == 2


def test_filter_tolerance_gray_zone():
    # within tol_u the higher point does not dominate
    near = pareto_filter(
        [make_profile(0.1, 0.2, 0), make_profile(0.1 + 5e-10, 0.2, 1)], tol_u=1e-9
    )
    assert len(near.profiles) == 2
    assert near.agent_utility_levels == (0.1,)
    far = pareto_filter(
        [make_profile(0.1, 0.2, 0), make_profile(0.1 + 5e-9, 0.2, 1)], tol_u=1e-9
    )
    assert len(far.profiles) == 1


def test_filter_requires_profiles():
    with pytest.raises(ConfigurationError):
        pareto_filter([])


def test_filter_idempotent_and_included():
    s = ladder_scenario()
    profiles = feasible_profiles(s, 1.0)
    once = pareto_filter(profiles, tol_u=s.tol_u, alpha=1.0)
    twice = pareto_filter(list(once.profiles), tol_u=s.tol_u, alpha=1.0)
    assert [p.identity() for p in twice.profiles] == [p.identity() for p in once.profiles]
    all_ids = {p.identity() for p in profiles}
    assert {p.identity() for p in once.profiles} <= all_ids


def test_filter_matches_brute_oracle_on_enumerations():
    cases = [Enumeration(ladder_scenario(m=60))]
    for seed in range(4):
        sc, _ = smooth_scenario(seed)
        cases.append(Enumeration(sc))
    for enum in cases:
        for alpha in (0.0, 0.3, 1.0):
            got = enum.pareto_mask(alpha)
            want = brute_pareto_keep(
                enum.agent_u, enum.principal_at(alpha), enum.scenario.tol_u
            )
            assert np.array_equal(got, want)


def test_translation_by_constant_payment():
    w = 0.13
    base = ladder_scenario()
    grids = base.family.grids
    shifted = Scenario(
        states=base.states, y=base.y, cost=base.cost, capacity=base.capacity,
        family=GridFamily(tuple(tuple(v + w for v in g) for g in grids)),
        utility=base.utility, reservation=0.0, m=base.m,
    )
    ps0 = pareto_set(base, 1.0)
    ps1 = pareto_set(shifted, 1.0)
    assert len(ps0.profiles) == len(ps1.profiles)
    for a, b in zip(ps0.profiles, ps1.profiles):
        assert b.agent_utility == pytest.approx(a.agent_utility + w, abs=1e-12)
        assert b.principal_payoff == pytest.approx(a.principal_payoff - w, abs=1e-12)
        assert b.dist.probs == a.dist.probs


@settings(max_examples=200, deadline=None)
@given(
    st.lists(
        st.tuples(
            st.sampled_from([0.0, 0.1, 0.1 + 5e-10, 0.1 + 5e-9, 0.2, 0.5, -0.3]),
            st.sampled_from([0.0, 0.05, 0.1, 0.1 + 5e-10, 0.3, -0.2]),
        ),
        min_size=1,
        max_size=25,
    )
)
def test_filter_matches_brute_oracle_on_synthetic(payoffs):
    profiles = [make_profile(a, pr, i) for i, (a, pr) in enumerate(payoffs)]
    kept = pareto_filter(profiles, tol_u=1e-9)
    got = {int(p.contract.payments[0]) for p in kept.profiles}
    mask = brute_pareto_keep([a for a, _ in payoffs], [b for _, b in payoffs], 1e-9)
    want = {i for i in range(len(payoffs)) if mask[i]}
    assert got == want


# -- selection --------------------------------------------------------------


def test_select_levels_hand_case():
    ps = pareto_filter(
        [make_profile(0.0, 3.0, 0), make_profile(0.04, 2.0, 1), make_profile(0.1, 1.0, 2)]
    )
    assert ps.agent_utility_levels == (0.0, 0.04, 0.1)
    assert select(ps, 0.0).chosen_level == 0.0
    assert select(ps, 0.05).chosen_level == 0.1
    assert select(ps, 0.1 + 5e-10).chosen_level == 0.1  # tolerance credit
    with pytest.raises(EmptySelectionError):
        select(ps, 0.5)


def test_select_returns_whole_level():
    ps = pareto_filter(
        [make_profile(0.1, 0.5, 0), make_profile(0.1, 0.5, 1), make_profile(0.2, 0.1, 2)]
    )
    sel = select(ps, 0.05)
    assert sel.chosen_level == pytest.approx(0.1)
    assert len(sel.profiles) == 2
    assert all(p in ps.profiles for p in sel.profiles)


def test_selection_ids_agree_with_select_at():
    s = ladder_scenario()
    enum = Enumeration(s)
    for alpha, r in ((1.0, 0.0), (1.0, 0.05), (0.6, 0.1)):
        chosen, ids, binding = enum.selection_ids(alpha, r)
        sel = enum.select_at(alpha, r)
        assert chosen == pytest.approx(sel.chosen_level, abs=1e-15)
        assert {(int(enum.contract_id[i]), int(enum.point_id[i])) for i in ids} == {
            p.identity() for p in sel.profiles
        }
        assert len(binding) == len(ids)


def test_selection_empty_raises():
    s = ladder_scenario()
    with pytest.raises(EmptySelectionError):
        Enumeration(s).select_at(1.0, 99.0)
