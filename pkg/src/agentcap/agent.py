"""Agent best responses and the agent-side first-order condition.

Two routes to the agent's problem max E_p[u(b)] - c(p) over the feasible set
D = {p : c(p) <= k}: an exhaustive scan of the enumeration grid, and a convex
interior solver for the smooth cost kinds. The scan is the ground truth the
solver is tested against.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    ConfigurationError,
    ConvergenceError,
    EmptyFeasibleSetError,
    UnsupportedCostError,
)
from .model import (
    FEASIBILITY_SLACK,
    Contract,
    Distribution,
    Scenario,
    _as_payments,
    _as_probs,
    enumeration_points,
)


@dataclass(frozen=True)
class BestResponseSet:
    """All grid maximizers within tol_u of the best value (the convex solver
    returns a single one). ``any_binding`` is true when some maximizer has
    cost within tol_u of capacity."""

    maximizers: tuple[Distribution, ...]
    value: float
    any_binding: bool

    def points(self) -> np.ndarray:
        return np.array([d.probs for d in self.maximizers])


@dataclass(frozen=True)
class AgentFocResidual:
    """Residuals of the agent's stationarity condition at (p, rho, mu).

    residual(w) = u(b(w)) - dc/dp(w) - rho - mu * dc/dp(w), written with the
    cost derivative on both sides exactly as displayed; equivalently
    u(b) - (1 + mu) dc/dp - rho. ``complementarity_gap`` is mu * (k - c(p));
    ``capacity_slack`` is k - c(p) with ``slack`` flagging a strict gap.
    """

    rho: float
    mu: float
    residual: tuple[float, ...]
    complementarity_gap: float
    capacity_slack: float
    slack: bool

    @property
    def max_abs(self) -> float:
        return float(np.max(np.abs(self.residual)))


def feasible_lattice(s: Scenario) -> tuple[np.ndarray, np.ndarray]:
    """Enumeration points inside D with their costs.

    Raises EmptyFeasibleSetError when capacity excludes every point.
    """
    points = enumeration_points(s)
    costs = np.asarray(s.cost.value_many(points), dtype=float)
    mask = costs <= s.capacity + FEASIBILITY_SLACK
    if not mask.any():
        raise EmptyFeasibleSetError("capacity excludes every enumeration point")
    return points[mask], costs[mask]


def scan_values(points: np.ndarray, costs: np.ndarray, payoff: np.ndarray) -> np.ndarray:
    """Objective values payoff . p - c(p) per row; shared by every grid scan
    so reduced and dated problems reuse the identical arithmetic."""
    return points @ payoff - costs


def best_response_from_values(
    points: np.ndarray,
    costs: np.ndarray,
    values: np.ndarray,
    tol_u: float,
    capacity: float,
) -> BestResponseSet:
    best = float(values.max())
    idx = np.flatnonzero(values >= best - tol_u)
    binding = bool(np.any(np.abs(costs[idx] - capacity) <= tol_u))
    maxs = tuple(Distribution(tuple(points[i])) for i in idx)
    return BestResponseSet(maximizers=maxs, value=best, any_binding=binding)


def best_response_grid(s: Scenario, b) -> BestResponseSet:
    """Exhaustive best response over the enumeration grid, ties kept.

    Maximizers come back in the grid's lexicographic order.
    """
    points, costs = feasible_lattice(s)
    payoff = s.utility.apply(_as_payments(b))
    values = scan_values(points, costs, payoff)
    return best_response_from_values(points, costs, values, s.tol_u, s.capacity)


# ---------------------------------------------------------------------------
# Convex route


def _project_simplex(z: np.ndarray) -> np.ndarray:
    u = np.sort(z)[::-1]
    css = np.cumsum(u) - 1.0
    ind = np.arange(1, z.size + 1)
    pos = np.flatnonzero(u - css / ind > 0)
    theta = css[pos[-1]] / (pos[-1] + 1)
    return np.maximum(z - theta, 0.0)


def _inner_entropy(s: Scenario, payoff: np.ndarray, mu: float) -> np.ndarray:
    # closed form: argmax payoff.p - (1+mu) theta KL(p||q0)
    lam = (1.0 + mu) * s.cost.theta
    logits = np.log(np.array(s.cost.q0)) + payoff / lam
    logits -= logits.max()
    w = np.exp(logits)
    return w / w.sum()


def _inner_quadratic(
    s: Scenario, payoff: np.ndarray, mu: float, max_iter: int, tol: float
) -> np.ndarray:
    lam = 1.0 + mu
    Q = np.array(s.cost.Q)
    q0 = np.array(s.cost.q0)
    lip = 2.0 * lam * float(np.linalg.eigvalsh(Q).max())
    if lip < 1e-14:
        # zero cost: linear objective, any argmax vertex works
        p = np.zeros_like(payoff)
        p[int(np.argmax(payoff))] = 1.0
        return p
    step = 1.0 / lip
    p = _project_simplex(q0.copy())
    for _ in range(max_iter):
        grad = payoff - 2.0 * lam * Q @ (p - q0)
        nxt = _project_simplex(p + step * grad)
        if np.abs(nxt - p).max() * lip <= tol:
            return nxt
        p = nxt
    raise ConvergenceError(
        "projected ascent did not converge", last_iterate=p, residual=float(np.abs(nxt - p).max() * lip)
    )


def best_response_convex(s: Scenario, b, max_iter: int = 2000, tol: float = 1e-10) -> BestResponseSet:
    """Interior best response for the smooth convex cost kinds.

    Runs a scalar bisection on the capacity multiplier mu over an inner
    simplex-constrained maximization of E_p[u(b)] - (1+mu) c(p); the inner
    problem has a closed form for relative entropy and is solved by projected
    gradient ascent for quadratics. Agrees with best_response_grid within the
    lattice resolution.
    """
    if not s.cost.convex_smooth:
        raise UnsupportedCostError(f"convex solver needs a smooth convex cost, got {s.cost.kind!r}")
    payoff = np.asarray(s.utility.apply(_as_payments(b)), dtype=float)

    def inner(mu: float) -> np.ndarray:
        if s.cost.kind == "relative-entropy":
            return _inner_entropy(s, payoff, mu)
        return _inner_quadratic(s, payoff, mu, max_iter, tol)

    k = s.capacity
    p = inner(0.0)
    if s.cost.value(p) > k + FEASIBILITY_SLACK:
        lo, hi = 0.0, 1.0
        for _ in range(70):
            if s.cost.value(inner(hi)) <= k + FEASIBILITY_SLACK:
                break
            lo, hi = hi, 2.0 * hi
        else:
            raise EmptyFeasibleSetError("capacity below the attainable cost range")
        for _ in range(100):
            mid = 0.5 * (lo + hi)
            if s.cost.value(inner(mid)) > k + FEASIBILITY_SLACK:
                lo = mid
            else:
                hi = mid
            if hi - lo <= 1e-13 * max(1.0, hi):
                break
        p = inner(hi)

    value = float(payoff @ p - s.cost.value(p))
    binding = bool(abs(s.cost.value(p) - k) <= s.tol_u)
    return BestResponseSet(maximizers=(Distribution(tuple(p)),), value=value, any_binding=binding)


# ---------------------------------------------------------------------------
# First-order condition


def agent_foc_residual(s: Scenario, b, p, rho: float, mu: float) -> AgentFocResidual:
    """Evaluate the agent's stationarity residuals at (b, p, rho, mu)."""
    if mu < 0:
        raise ConfigurationError("capacity multiplier mu must be nonnegative")
    parr = _as_probs(p)
    g = s.cost.gradient(parr)  # raises for non-differentiable kinds / boundary
    ub = s.utility.apply(_as_payments(b))
    residual = ub - g - rho - mu * g
    c = s.cost.value(parr)
    slack_amount = s.capacity - c
    return AgentFocResidual(
        rho=float(rho),
        mu=float(mu),
        residual=tuple(float(r) for r in residual),
        complementarity_gap=float(mu * slack_amount),
        capacity_slack=float(slack_amount),
        slack=bool(slack_amount > s.tol_u),
    )


def fit_agent_multipliers(s: Scenario, b, p) -> tuple[float, float]:
    """Least-squares (rho, mu) for the stationarity system, mu clamped at 0."""
    parr = _as_probs(p)
    g = s.cost.gradient(parr)
    ub = np.asarray(s.utility.apply(_as_payments(b)), dtype=float)
    design = np.column_stack([np.ones_like(g), g])
    coef, *_ = np.linalg.lstsq(design, ub, rcond=None)
    rho, slope = float(coef[0]), float(coef[1])
    mu = slope - 1.0
    if mu < 0.0:
        mu = 0.0
        rho = float(np.mean(ub - g))
    return rho, mu
