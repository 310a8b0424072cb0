"""Output scaling: the capacity-slack threshold alpha* and its certificate.

alpha* is the largest output scale at which the selected Pareto profiles all
leave the capacity constraint slack. Above it some selected profile pins the
constraint, and the payoff comparisons in ``verify_theorem`` certify how the
scaled problem relates to the unscaled one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import model
from .errors import ConfigurationError, EmptySelectionError
from .model import Profile, Scenario
from .pareto import Enumeration

DEFAULT_EPS_ALPHA = 1e-4
STEP2_TOL = 1e-6


@dataclass(frozen=True)
class AlphaStarResult:
    """Bisection output for the capacity-slack threshold.

    ``bracket`` is (last alpha where the predicate held, first where it
    failed); the two coincide only in the degenerate all-true or all-false
    cases. ``slack_witness`` is the selected profile with cost closest to
    capacity at the bracket's low end, i.e. the profile exhibiting how the
    constraint tightens as alpha approaches the threshold.
    """

    alpha_star: float
    bracket: tuple[float, float]
    u_bar: float
    predicate_trace: tuple[tuple[float, bool], ...]
    slack_witness: Profile | None
    witness_alpha: float | None
    monotone_warning: bool


@dataclass(frozen=True)
class InequalitySlacks:
    """Slacks of the payoff-comparison chain between a base profile and a
    candidate from the scaled problem. All four should be nonnegative:

      output_payment        output difference minus payment difference
      payment_scaled_output payment difference minus scaled output difference
      scaled_output         alpha times the output difference
      participation         cost difference minus payment difference

    ``d_output`` and ``d_payment`` are the raw differences (base minus
    candidate, each under its own distribution).
    """

    output_payment: float
    payment_scaled_output: float
    scaled_output: float
    participation: float
    d_output: float
    d_payment: float

    def min_slack(self) -> float:
        return min(
            self.output_payment,
            self.payment_scaled_output,
            self.scaled_output,
            self.participation,
        )


@dataclass(frozen=True)
class AlphaCheck:
    """Verification outcome at one alpha grid point."""

    alpha: float
    tested: bool
    reason: str
    inclusion_ok: bool | None
    converse_ok: bool | None
    n_candidates: int
    n_binding: int
    worst: InequalitySlacks | None
    step2_dev: float


@dataclass(frozen=True)
class TheoremReport:
    base_profile: Profile
    base_level: float
    u_bar: float
    alpha_result: AlphaStarResult
    checks: tuple[AlphaCheck, ...]
    inclusion_ok: bool
    converse_ok: bool
    worst_slacks: InequalitySlacks | None
    step2_max_dev: float
    slack_witness_ok: bool


def _base_index(enum: Enumeration, r: float) -> tuple[int, float]:
    """Deterministic base pick: highest principal payoff in the unscaled
    selection, ties broken by contract then point id."""
    chosen, ids, _ = enum.selection_ids(1.0, r)
    pr = enum.principal_at(1.0)[ids]
    order = np.lexsort((enum.point_id[ids], enum.contract_id[ids], -pr))
    return int(ids[order[0]]), chosen


def _risk_neutral_level(enum: Enumeration, i: int) -> float:
    return float(enum.exp_payment[i] - enum.cost[i])


def _default_u_bar(enum: Enumeration, r: float) -> float:
    i, _ = _base_index(enum, r)
    return _risk_neutral_level(enum, i)


def _witness(enum: Enumeration, alpha: float, u_bar: float) -> Profile:
    _, ids, _ = enum.selection_ids(alpha, u_bar)
    j = int(ids[np.argmax(enum.point_costs[enum.point_id[ids]])])
    return enum.profile(j, alpha)


def _alpha_impl(enum: Enumeration, u_bar: float, eps: float) -> AlphaStarResult:
    trace: list[tuple[float, bool]] = []

    def pred(alpha: float) -> bool:
        _, _, binding = enum.selection_ids(alpha, u_bar)
        ok = not bool(binding.any())
        trace.append((float(alpha), ok))
        return ok

    if pred(1.0):
        star, bracket = 1.0, (1.0, 1.0)
        wit, wit_alpha = _witness(enum, 1.0, u_bar), 1.0
    elif not pred(0.0):
        # the slack region is empty; sup over an empty set, reported as 0
        star, bracket = 0.0, (0.0, 0.0)
        wit, wit_alpha = None, None
    else:
        lo, hi = 0.0, 1.0
        while hi - lo > eps:
            mid = 0.5 * (lo + hi)
            if pred(mid):
                lo = mid
            else:
                hi = mid
        star, bracket = lo, (lo, hi)
        wit, wit_alpha = _witness(enum, lo, u_bar), lo

    seen_false = False
    warning = False
    for _, ok in sorted(trace):
        if not ok:
            seen_false = True
        elif seen_false:
            warning = True
            break

    return AlphaStarResult(
        alpha_star=star,
        bracket=bracket,
        u_bar=u_bar,
        predicate_trace=tuple(trace),
        slack_witness=wit,
        witness_alpha=wit_alpha,
        monotone_warning=warning,
    )


def capacity_slack_predicate(
    s: Scenario, alpha: float, u_bar: float | None = None, budget: int | None = None
) -> bool:
    """True when no profile selected at (alpha, u_bar) pins the capacity."""
    if not 0.0 <= alpha <= 1.0:
        raise ConfigurationError("alpha out of [0,1]")
    enum = Enumeration(s, budget)
    if u_bar is None:
        u_bar = _default_u_bar(enum, s.reservation)
    _, _, binding = enum.selection_ids(alpha, u_bar)
    return not bool(binding.any())


def alpha_star(
    s: Scenario,
    u_bar: float | None = None,
    eps: float = DEFAULT_EPS_ALPHA,
    budget: int | None = None,
) -> AlphaStarResult:
    """Bisect for the largest alpha whose selection is capacity slack.

    When ``u_bar`` is omitted it is the risk-neutral utility of the base
    profile, the selection of the unscaled problem at the scenario's
    reservation level.
    """
    if not eps > 0.0:
        raise ConfigurationError("bisection width must be positive")
    enum = Enumeration(s, budget)
    if u_bar is None:
        u_bar = _default_u_bar(enum, s.reservation)
    return _alpha_impl(enum, float(u_bar), eps)


def verify_inequalities(s: Scenario, alpha: float, base: Profile, candidate: Profile) -> InequalitySlacks:
    """Slacks of the payoff chain for one base/candidate pair.

    Differences are base minus candidate with each side's expectation taken
    under its own distribution.
    """
    if not 0.0 <= alpha <= 1.0:
        raise ConfigurationError("alpha out of [0,1]")
    y = s.y.as_array()
    p0, b0 = base.dist.as_array(), base.contract.as_array()
    p1, b1 = candidate.dist.as_array(), candidate.contract.as_array()
    d_out = float(p0 @ y - p1 @ y)
    d_pay = float(p0 @ b0 - p1 @ b1)
    c0 = base.cost if math.isfinite(base.cost) else model.cost(s, p0)
    c1 = candidate.cost if math.isfinite(candidate.cost) else model.cost(s, p1)
    return InequalitySlacks(
        output_payment=d_out - d_pay,
        payment_scaled_output=d_pay - alpha * d_out,
        scaled_output=alpha * d_out,
        participation=(c0 - c1) - d_pay,
        d_output=d_out,
        d_payment=d_pay,
    )


def _min_slacks(a: InequalitySlacks | None, b: InequalitySlacks) -> InequalitySlacks:
    if a is None:
        return b
    return InequalitySlacks(
        output_payment=min(a.output_payment, b.output_payment),
        payment_scaled_output=min(a.payment_scaled_output, b.payment_scaled_output),
        scaled_output=min(a.scaled_output, b.scaled_output),
        participation=min(a.participation, b.participation),
        d_output=min(a.d_output, b.d_output),
        d_payment=min(a.d_payment, b.d_payment),
    )


def _skipped(alpha: float, reason: str) -> AlphaCheck:
    return AlphaCheck(
        alpha=alpha,
        tested=False,
        reason=reason,
        inclusion_ok=None,
        converse_ok=None,
        n_candidates=0,
        n_binding=0,
        worst=None,
        step2_dev=0.0,
    )


def verify_theorem(
    s: Scenario,
    r: float | None = None,
    alphas: "np.ndarray | list[float] | None" = None,
    eps: float = DEFAULT_EPS_ALPHA,
    budget: int | None = None,
) -> TheoremReport:
    """Brute-force certificate for the scaling comparison.

    At each tested alpha the selection of the scaled problem at the base's
    risk-neutral level is compared with the unscaled selection: the base
    profiles must reappear (inclusion), every capacity-binding candidate must
    be a base profile (converse), the four chain slacks must be nonnegative,
    and when a candidate pins the capacity the base must pin it too with
    vanishing payoff differences (``step2_dev``).

    An alpha below the threshold bracket, or whose selection has no binding
    member, is reported untested with the reason; the comparisons are only
    meaningful past the threshold.
    """
    enum = Enumeration(s, budget)
    if r is None:
        r = s.reservation
    i_base, base_level = _base_index(enum, r)
    u_bar = _risk_neutral_level(enum, i_base)
    base = enum.profile(i_base, 1.0)
    result = _alpha_impl(enum, u_bar, eps)

    _, base_ids, _ = enum.selection_ids(1.0, r)
    base_keys = {
        (int(c), int(p))
        for c, p in zip(enum.contract_id[base_ids], enum.point_id[base_ids])
    }

    if alphas is None:
        alphas = np.round(np.linspace(0.0, 1.0, 11), 12)

    checks: list[AlphaCheck] = []
    for alpha in alphas:
        alpha = float(alpha)
        if not 0.0 <= alpha <= 1.0:
            raise ConfigurationError("alpha out of [0,1]")
        if alpha < result.bracket[1]:
            checks.append(_skipped(alpha, "below the capacity-slack threshold bracket"))
            continue
        try:
            _, ids, binding = enum.selection_ids(alpha, u_bar)
        except EmptySelectionError:
            checks.append(_skipped(alpha, "selection empty at this alpha"))
            continue
        if not binding.any():
            checks.append(_skipped(alpha, "selection has no capacity-binding member"))
            continue

        cand_keys = {
            (int(c), int(p))
            for c, p in zip(enum.contract_id[ids], enum.point_id[ids])
        }
        bind_keys = {
            (int(c), int(p))
            for c, p in zip(enum.contract_id[ids[binding]], enum.point_id[ids[binding]])
        }
        inclusion = base_keys <= cand_keys
        converse = bind_keys <= base_keys

        worst: InequalitySlacks | None = None
        step2 = 0.0
        for j, is_binding in zip(ids, binding):
            cand = enum.profile(int(j), alpha)
            slacks = verify_inequalities(s, alpha, base, cand)
            worst = _min_slacks(worst, slacks)
            if is_binding:
                dev = max(
                    abs(base.cost - s.capacity),
                    abs(slacks.d_payment),
                    abs(slacks.d_output),
                )
                step2 = max(step2, dev)

        checks.append(
            AlphaCheck(
                alpha=alpha,
                tested=True,
                reason="",
                inclusion_ok=inclusion,
                converse_ok=converse,
                n_candidates=len(ids),
                n_binding=int(binding.sum()),
                worst=worst,
                step2_dev=step2,
            )
        )

    tested = [c for c in checks if c.tested]
    worst_all: InequalitySlacks | None = None
    for c in tested:
        if c.worst is not None:
            worst_all = _min_slacks(worst_all, c.worst)

    witness_ok = (
        result.slack_witness is not None and result.slack_witness.cost < s.capacity
    )

    return TheoremReport(
        base_profile=base,
        base_level=base_level,
        u_bar=u_bar,
        alpha_result=result,
        checks=tuple(checks),
        inclusion_ok=all(c.inclusion_ok for c in tested),
        converse_ok=all(c.converse_ok for c in tested),
        worst_slacks=worst_all,
        step2_max_dev=max((c.step2_dev for c in tested), default=0.0),
        slack_witness_ok=witness_ok,
    )
