"""Feasible-profile enumeration, Pareto filtering, and level selection.

The enumeration pairs every family contract with every agent best response;
best responses do not depend on the output scale alpha, so one enumeration
serves all alpha. Per-alpha principal payoffs are then linear updates and the
Pareto filter is a sort-based skyline scan, which keeps repeated filtering
(bisection on alpha) cheap.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .agent import best_response_from_values, feasible_lattice, scan_values
from .errors import BudgetExceededError, ConfigurationError, EmptySelectionError
from .model import Contract, Distribution, Profile, Scenario

DEFAULT_BUDGET = 10**7

_CHUNK = 1 << 21  # cap on contracts x points handled per value block


@dataclass(frozen=True)
class ParetoSet:
    """The Pareto optimal profiles at a fixed alpha.

    ``agent_utility_levels`` lists the distinct agent-utility levels present,
    ascending, after merging values closer than tol_u.
    """

    alpha: float
    profiles: tuple[Profile, ...]
    agent_utility_levels: tuple[float, ...]
    tol_u: float


@dataclass(frozen=True)
class Selection:
    """Profiles of the parent set at the lowest utility level >= r - tol_u."""

    parent: ParetoSet
    r: float
    chosen_level: float
    profiles: tuple[Profile, ...]


def _cluster_levels(values: np.ndarray, tol: float) -> np.ndarray:
    """Ascending distinct levels; a value joins the current cluster when it is
    within tol of the cluster's first (lowest) member."""
    if values.size == 0:
        return values
    s = np.sort(values)
    reps = [s[0]]
    for v in s[1:]:
        if v - reps[-1] > tol:
            reps.append(v)
    return np.array(reps)


def _pareto_keep_mask(agent: np.ndarray, principal: np.ndarray, tol: float) -> np.ndarray:
    """Mask of profiles not dominated under the tolerance rule: q dominates x
    when q is weakly better in both coordinates (within tol) and strictly
    better than tol in at least one."""
    n = agent.size
    keep = np.ones(n, dtype=bool)
    if n <= 1:
        return keep

    def strict_dom(a: np.ndarray, b: np.ndarray) -> np.ndarray:
        # exists q: q.a > x.a + tol and q.b >= x.b - tol
        order = np.argsort(a, kind="stable")
        a_s, b_s = a[order], b[order]
        suffix = np.empty(n + 1)
        suffix[n] = -np.inf
        np.maximum.accumulate(b_s[::-1], out=suffix[:n][::-1])
        pos = np.searchsorted(a_s, a + tol, side="right")
        best = suffix[pos]
        return best >= b - tol

    dominated = strict_dom(agent, principal) | strict_dom(principal, agent)
    return ~dominated


class Enumeration:
    """Shared engine: contracts x best responses with cached payoff pieces.

    Built once per scenario; ``pareto_at`` and ``select_at`` answer Pareto and
    selection queries for any alpha against the same profile arrays, so exact
    (contract, point) identities are comparable across alpha.
    """

    def __init__(self, s: Scenario, budget: int | None = None):
        budget = DEFAULT_BUDGET if budget is None else int(budget)
        points, costs = feasible_lattice(s)
        y = s.y.as_array()
        labels, payments = s.family.payment_matrix(y)
        n_c, n_p = len(labels), len(points)
        if n_c * n_p > budget:
            raise BudgetExceededError(
                f"enumeration needs {n_c * n_p} evaluations, budget is {budget}",
                required=n_c * n_p,
                budget=budget,
            )

        self.scenario = s
        self.labels = labels
        self.payments = payments
        self.points = points
        self.point_costs = costs

        util = np.asarray(s.utility.apply(payments), dtype=float)
        c_ids: list[np.ndarray] = []
        p_ids: list[np.ndarray] = []
        values: list[np.ndarray] = []
        rows_per_block = max(1, _CHUNK // max(1, n_p))
        for start in range(0, n_c, rows_per_block):
            block = util[start : start + rows_per_block]
            vals = block @ points.T - costs[None, :]
            best = vals.max(axis=1)
            tie = vals >= best[:, None] - s.tol_u
            ci, pi = np.nonzero(tie)
            c_ids.append(ci + start)
            p_ids.append(pi)
            values.append(vals[ci, pi])
        self.contract_id = np.concatenate(c_ids)
        self.point_id = np.concatenate(p_ids)
        self.agent_u = np.concatenate(values)
        self.cost = costs[self.point_id]
        self.binding = np.abs(self.cost - s.capacity) <= s.tol_u
        self.exp_output = points[self.point_id] @ y
        self.exp_payment = np.einsum(
            "ij,ij->i", payments[self.contract_id], points[self.point_id]
        )

    # -- queries ----------------------------------------------------------

    def principal_at(self, alpha: float) -> np.ndarray:
        return alpha * self.exp_output - self.exp_payment

    def pareto_mask(self, alpha: float) -> np.ndarray:
        return _pareto_keep_mask(self.agent_u, self.principal_at(alpha), self.scenario.tol_u)

    def _profile(self, i: int, principal: np.ndarray) -> Profile:
        ci, pi = int(self.contract_id[i]), int(self.point_id[i])
        return Profile(
            contract=Contract(tuple(self.payments[ci])),
            dist=Distribution(tuple(self.points[pi])),
            agent_utility=float(self.agent_u[i]),
            principal_payoff=float(principal[i]),
            capacity_binding=bool(self.binding[i]),
            cost=float(self.cost[i]),
            contract_id=ci,
            point_id=pi,
            contract_label=self.labels[ci],
        )

    def profile(self, i: int, alpha: float) -> Profile:
        return self._profile(int(i), self.principal_at(alpha))

    def profiles_at(self, alpha: float) -> list[Profile]:
        principal = self.principal_at(alpha)
        return [self._profile(i, principal) for i in range(self.agent_u.size)]

    def pareto_at(self, alpha: float) -> ParetoSet:
        principal = self.principal_at(alpha)
        keep = np.flatnonzero(_pareto_keep_mask(self.agent_u, principal, self.scenario.tol_u))
        order = sorted(
            keep,
            key=lambda i: (-self.agent_u[i], -principal[i], self.contract_id[i], self.point_id[i]),
        )
        profiles = tuple(self._profile(int(i), principal) for i in order)
        levels = _cluster_levels(self.agent_u[keep], self.scenario.tol_u)
        return ParetoSet(
            alpha=float(alpha),
            profiles=profiles,
            agent_utility_levels=tuple(float(v) for v in levels),
            tol_u=self.scenario.tol_u,
        )

    def selection_ids(self, alpha: float, r: float) -> tuple[float, np.ndarray, np.ndarray]:
        """(chosen_level, profile indices at that level, binding flags).

        Index-level variant of select(pareto_at(alpha), r) used by the scaling
        predicate, which only needs ids and binding flags.
        """
        keep = np.flatnonzero(self.pareto_mask(alpha))
        levels = _cluster_levels(self.agent_u[keep], self.scenario.tol_u)
        tol = self.scenario.tol_u
        qualifying = levels[levels >= r - tol]
        if qualifying.size == 0:
            raise EmptySelectionError(f"no Pareto profile meets reservation {r!r}")
        chosen = float(qualifying[0])
        at_level = keep[np.abs(self.agent_u[keep] - chosen) <= tol]
        return chosen, at_level, self.binding[at_level]

    def select_at(self, alpha: float, r: float) -> Selection:
        ps = self.pareto_at(alpha)
        return select(ps, r)


# ---------------------------------------------------------------------------
# Operation-level API


def feasible_profiles(s: Scenario, alpha: float, budget: int | None = None) -> list[Profile]:
    """One Profile per (family contract, best-response maximizer) pair, with
    payoffs cached against alpha * y."""
    if not 0.0 <= alpha <= 1.0:
        raise ConfigurationError("alpha out of [0,1]")
    return Enumeration(s, budget).profiles_at(alpha)


def pareto_filter(profiles: list[Profile], tol_u: float = 1e-9, alpha: float = float("nan")) -> ParetoSet:
    """Filter an explicit profile list down to its Pareto optimal members.

    Retains exactly the profiles no other listed profile improves upon
    (weakly better in both payoffs within tol_u, strictly beyond tol_u in at
    least one). Output is sorted by agent utility then principal payoff,
    descending, with the contract vector as the final tie-break.
    """
    if not profiles:
        raise ConfigurationError("pareto_filter needs a nonempty profile list")
    agent = np.array([p.agent_utility for p in profiles])
    principal = np.array([p.principal_payoff for p in profiles])
    keep = np.flatnonzero(_pareto_keep_mask(agent, principal, tol_u))
    order = sorted(
        keep,
        key=lambda i: (
            -agent[i],
            -principal[i],
            profiles[i].contract.payments,
            profiles[i].dist.probs,
        ),
    )
    levels = _cluster_levels(agent[keep], tol_u)
    return ParetoSet(
        alpha=float(alpha),
        profiles=tuple(profiles[int(i)] for i in order),
        agent_utility_levels=tuple(float(v) for v in levels),
        tol_u=tol_u,
    )


def select(ps: ParetoSet, r: float) -> Selection:
    """The selection at the lowest utility level >= r - tol_u.

    Raises EmptySelectionError when no level qualifies; the underlying theory
    leaves that case undefined, so it is signalled rather than guessed.
    """
    tol = ps.tol_u
    levels = np.array(ps.agent_utility_levels)
    qualifying = levels[levels >= r - tol]
    if qualifying.size == 0:
        raise EmptySelectionError(f"no Pareto profile meets reservation {r!r}")
    chosen = float(qualifying[0])
    chosen_profiles = tuple(p for p in ps.profiles if abs(p.agent_utility - chosen) <= tol)
    return Selection(parent=ps, r=float(r), chosen_level=chosen, profiles=chosen_profiles)


def pareto_set(s: Scenario, alpha: float, budget: int | None = None) -> ParetoSet:
    """Enumerate and filter in one step."""
    if not 0.0 <= alpha <= 1.0:
        raise ConfigurationError("alpha out of [0,1]")
    return Enumeration(s, budget).pareto_at(alpha)
