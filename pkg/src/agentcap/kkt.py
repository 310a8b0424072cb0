"""First-order conditions for the principal's program with a risk-averse agent.

The agent's incentive constraint is replaced by his own first-order condition,
which enters the principal's Lagrangian with multiplier phi per state. The
resulting stationarity system is evaluated verbatim and solved by damped
Gauss-Newton on small interior instances. For a risk-neutral agent the solved
contract is affine in output, which ``affine_representation_check`` fits and
scores.

Participation enters as E_p[u(b)] - c(p) >= 0 against a zero outside option.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .agent import best_response_convex, best_response_grid
from .errors import (ConfigurationError, DegenerateFitError, InteriorityError,
                     SingularJacobianError, UnsupportedCostError)
from .model import Contract, Distribution, Scenario

FD_STEP = 1e-7
DAMPING_FLOOR = 2.0 ** -20


@dataclass(frozen=True)
class FocResiduals:
    """Residuals of the stationarity system at a candidate point.

    ``stationarity_b`` and ``stationarity_p`` are the contract and multiplier
    stationarity rows, ``orthogonality`` the scalar phi-gradient condition,
    ``agent_foc`` the agent's own condition. The three gaps are feasibility
    diagnostics: whether they must vanish depends on the declared active set,
    so ``max_abs`` covers the unconditional rows plus the simplex gap only.
    """

    stationarity_b: tuple[float, ...]
    stationarity_p: tuple[float, ...]
    orthogonality: float
    agent_foc: tuple[float, ...]
    simplex_gap: float
    capacity_gap: float
    participation_gap: float

    @property
    def max_abs(self) -> float:
        blocks = (
            max(abs(v) for v in self.stationarity_b),
            max(abs(v) for v in self.stationarity_p),
            abs(self.orthogonality),
            max(abs(v) for v in self.agent_foc),
            abs(self.simplex_gap),
        )
        return max(blocks)


@dataclass(frozen=True)
class PrincipalFocPoint:
    """A candidate solution: contract, distribution, and multipliers.

    rho and mu belong to the agent's condition, tau and delta to the adding-up
    and capacity constraints, phi to the agent's first-order condition, zeta
    to participation. At a solution mu and delta are nonnegative; the solver
    reports what it found and leaves that to the caller to assert.
    """

    b: Contract
    p: Distribution
    rho: float
    mu: float
    tau: float
    delta: float
    zeta: float
    phi: tuple[float, ...]
    residuals: FocResiduals | None = None
    converged: bool = False
    system_residual: float = float("nan")


@dataclass(frozen=True)
class AffineRepresentation:
    """Least-squares fit of b against output, a constant, and the curvature
    term; ``slope`` multiplies y, ``intercept`` and ``curvature`` are the
    constants A and B in b = slope*y - A - B*(curvature term)."""

    slope: float
    intercept: float
    curvature: float
    fit_residual: float


def _derivative_parts(s: Scenario, b: np.ndarray, p: np.ndarray):
    if not s.cost.convex_smooth:
        raise UnsupportedCostError("the stationarity system needs a twice differentiable cost")
    if p.min() <= 0.0:
        raise InteriorityError("p must assign positive probability to every state")
    g = s.cost.gradient(p)
    h = s.cost.hessian(p)
    u = np.asarray(s.utility.apply(b), dtype=float)
    up = np.asarray(s.utility.derivative(b), dtype=float)
    return g, h, u, up


def principal_foc_residual(s: Scenario, point: PrincipalFocPoint) -> FocResiduals:
    """Evaluate the displayed stationarity system at the given point.

    No consistency between the rows is assumed; an arbitrary point simply
    produces nonzero residuals.
    """
    b = point.b.as_array()
    p = point.p.as_array()
    phi = np.asarray(point.phi, dtype=float)
    if b.size != s.n or p.size != s.n or phi.size != s.n:
        raise ConfigurationError("point dimensions must match the state count")
    y = s.y.as_array()
    g, h, u, up = _derivative_parts(s, b, p)
    r_b = (y - b) - (point.tau + point.delta * g - (point.mu + 1.0) * (h @ phi) + point.zeta * (u - g))
    r_p = (-p) - (phi * up + point.zeta * p * up)
    r_orth = float(phi @ g)
    r_agent = u - g - point.rho - point.mu * g
    c = float(s.cost.value(p))
    return FocResiduals(
        stationarity_b=tuple(float(v) for v in r_b),
        stationarity_p=tuple(float(v) for v in r_p),
        orthogonality=r_orth,
        agent_foc=tuple(float(v) for v in r_agent),
        simplex_gap=float(p.sum() - 1.0),
        capacity_gap=float(s.capacity - c),
        participation_gap=float(p @ u - c),
    )


def phi_identity_gap(s: Scenario, point: PrincipalFocPoint) -> float:
    """Max deviation from phi = -p (1 + zeta) / u'(b), the algebraic
    consequence of the multiplier stationarity row."""
    b = point.b.as_array()
    p = point.p.as_array()
    up = np.asarray(s.utility.derivative(b), dtype=float)
    phi = np.asarray(point.phi, dtype=float)
    return float(np.max(np.abs(phi + p * (1.0 + point.zeta) / up)))


# -- solver -----------------------------------------------------------------


def _pack(point: PrincipalFocPoint) -> np.ndarray:
    return np.concatenate([
        point.b.as_array(),
        point.p.as_array(),
        np.asarray(point.phi, dtype=float),
        [point.rho, point.mu, point.tau, point.delta, point.zeta],
    ])


def _unpack(x: np.ndarray, n: int):
    b, p, phi = x[:n], x[n : 2 * n], x[2 * n : 3 * n]
    rho, mu, tau, delta, zeta = x[3 * n :]
    return b, p, phi, rho, mu, tau, delta, zeta


def _system(s: Scenario, x: np.ndarray, capacity_active: bool, participation_active: bool) -> np.ndarray:
    n = s.n
    b, p, phi, rho, mu, tau, delta, zeta = _unpack(x, n)
    y = s.y.as_array()
    g, h, u, up = _derivative_parts(s, b, p)
    c = float(s.cost.value(p))
    rows = [
        (y - b) - (tau + delta * g - (mu + 1.0) * (h @ phi) + zeta * (u - g)),
        (-p) - (phi * up + zeta * p * up),
        [float(phi @ g)],
        u - g - rho - mu * g,
        [p.sum() - 1.0],
    ]
    if capacity_active:
        rows.append([c - s.capacity])
    else:
        rows.append([mu, delta])
    if participation_active:
        rows.append([float(p @ u) - c])
    else:
        rows.append([zeta])
    return np.concatenate([np.atleast_1d(np.asarray(r, dtype=float)) for r in rows])


def _finite_difference_jacobian(fun, x: np.ndarray, r0: np.ndarray) -> np.ndarray:
    jac = np.empty((r0.size, x.size))
    for j in range(x.size):
        h = FD_STEP * (1.0 + abs(x[j]))
        xj = x.copy()
        xj[j] += h
        jac[:, j] = (fun(xj) - r0) / h
    return jac


def make_initial_point(s: Scenario, beta: float = 0.5, w: float = 0.0) -> PrincipalFocPoint:
    """Seed for the solver: agent best response to a linear-share contract,
    multipliers at zero except rho, which is fitted so the agent rows start
    small. The response is nudged toward uniform if it touches the boundary.
    """
    y = s.y.as_array()
    b = beta * y + w
    if s.cost.convex_smooth:
        br = best_response_convex(s, b)
    else:
        br = best_response_grid(s, b)
    p = br.maximizers[0].as_array().copy()
    if p.min() <= 1e-9:
        p = 0.98 * p + 0.02 * np.full(s.n, 1.0 / s.n)
    g = s.cost.gradient(p)
    u = np.asarray(s.utility.apply(b), dtype=float)
    rho = float(np.mean(u - g))
    return PrincipalFocPoint(
        b=Contract(tuple(b)),
        p=Distribution(tuple(p)),
        rho=rho,
        mu=0.0,
        tau=0.0,
        delta=0.0,
        zeta=0.0,
        phi=tuple(0.0 for _ in range(s.n)),
    )


def solve_principal_foc(
    s: Scenario,
    initial: PrincipalFocPoint,
    max_iter: int = 200,
    tol: float = 1e-10,
    capacity_active: bool = False,
    participation_active: bool = True,
) -> PrincipalFocPoint:
    """Damped Gauss-Newton on the stacked stationarity system.

    The caller declares which of capacity and participation bind; declared
    constraints are enforced as equalities and the complementary multipliers
    of undeclared ones are pinned at zero. With capacity active the system has
    one more unknown than equations (the mu direction re-slopes b without
    moving p or the payoffs) and the least-squares step picks the minimum-norm
    member.

    Returns the last iterate with ``converged`` False when the iteration
    stalls or the budget runs out; raises only for a singular Jacobian or a
    non-interior start.
    """
    def fun(z: np.ndarray) -> np.ndarray:
        return _system(s, z, capacity_active, participation_active)

    x = _pack(initial)
    r = fun(x)

    for _ in range(max_iter):
        if np.max(np.abs(r)) <= tol:
            break
        jac = _finite_difference_jacobian(fun, x, r)
        step, _, rank, sv = np.linalg.lstsq(jac, -r, rcond=None)
        if not np.all(np.isfinite(step)):
            cond = float(sv[0] / sv[-1]) if sv.size and sv[-1] > 0 else float("inf")
            raise SingularJacobianError(
                "stationarity Jacobian is numerically singular", condition_number=cond
            )
        if rank < min(jac.shape):
            cond = float(sv[0] / sv[-1]) if sv.size and sv[-1] > 0 else float("inf")
            raise SingularJacobianError(
                f"stationarity Jacobian is rank deficient ({rank} < {min(jac.shape)})",
                condition_number=cond,
            )
        norm0 = float(np.linalg.norm(r))
        lam = 1.0
        accepted = False
        while lam >= DAMPING_FLOOR:
            xt = x + lam * step
            # the lstsq step keeps the adding-up row only approximately;
            # remove the uniform drift so the iterate stays a distribution
            nn = s.n
            xt[nn:2 * nn] -= (xt[nn:2 * nn].sum() - 1.0) / nn
            try:
                rt = fun(xt)
            except InteriorityError:
                lam *= 0.5
                continue
            if float(np.linalg.norm(rt)) < norm0:
                x, r = xt, rt
                accepted = True
                break
            lam *= 0.5
        if not accepted:
            break

    n = s.n
    b, p, phi, rho, mu, tau, delta, zeta = _unpack(x, n)
    point = PrincipalFocPoint(
        b=Contract(tuple(b)),
        p=Distribution(tuple(p)),
        rho=float(rho),
        mu=float(mu),
        tau=float(tau),
        delta=float(delta),
        zeta=float(zeta),
        phi=tuple(float(v) for v in phi),
    )
    residuals = principal_foc_residual(s, point)
    system_residual = float(np.max(np.abs(r)))
    return replace(
        point,
        residuals=residuals,
        converged=bool(system_residual <= tol),
        system_residual=system_residual,
    )


def affine_representation_check(s: Scenario, point: PrincipalFocPoint) -> AffineRepresentation:
    """Fit b against {y, 1, curvature term} and score the fit.

    The curvature regressor is p * (1/u'(b) + zeta) * (row sums of the cost
    Hessian). A zero regressor (as happens at zeta = -1 with a risk-neutral
    agent) simply gets coefficient zero; only constant output is an error,
    because then the slope is unidentified.
    """
    y = s.y.as_array()
    if np.ptp(y) <= 1e-12:
        raise DegenerateFitError("constant output leaves the slope unidentified")
    b = point.b.as_array()
    p = point.p.as_array()
    g, h, u, up = _derivative_parts(s, b, p)
    curvature_term = p * (1.0 / up + point.zeta) * (h @ np.ones(s.n))
    design = np.column_stack([y, np.ones(s.n), curvature_term])
    coef, _, _, _ = np.linalg.lstsq(design, b, rcond=None)
    fit_residual = float(np.linalg.norm(design @ coef - b))
    return AffineRepresentation(
        slope=float(coef[0]),
        intercept=float(-coef[1]),
        curvature=float(-coef[2]),
        fit_residual=fit_residual,
    )
