"""Domain types and evaluation primitives.

Holds the problem data (states, output, cost, capacity, contract family,
utility, reservation), the cost-function and utility kinds, the contract
family enumerations, lattice generation, and scenario validation. Everything
downstream consumes these types.

Conventions used throughout the package:
  * distributions are dense length-n probability vectors,
  * utility comparisons use the scenario's absolute tolerance ``tol_u``
    (default 1e-9),
  * feasibility of the capacity constraint is tested as
    ``c(p) <= k + 1e-12`` so that boundary points whose cost equals the
    capacity algebraically do not drop out through rounding.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterator, Sequence

import numpy as np

from .errors import (
    ConfigurationError,
    DifferentiabilityError,
    InteriorityError,
    UndefinedCostPointError,
    ValidationError,
)

# Slack added to the capacity side of feasibility tests; absorbs the ulp-scale
# error of computing a cost that is algebraically exactly k.
FEASIBILITY_SLACK = 1e-12

DEFAULT_TOL_U = 1e-9

_POINT_KEY_SCALE = 1e12


def _astuple(values) -> tuple[float, ...]:
    return tuple(float(v) for v in np.asarray(values, dtype=float).ravel())


def _key(p) -> tuple[int, ...]:
    """Quantized lookup key for exact-within-1e-12 point matching."""
    return tuple(int(round(float(x) * _POINT_KEY_SCALE)) for x in p)


# ---------------------------------------------------------------------------
# Core value types


@dataclass(frozen=True)
class StateSpace:
    """Finite ordered set of states."""

    labels: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "labels", tuple(str(x) for x in self.labels))
        if len(self.labels) < 2:
            raise ValidationError("state space needs at least 2 states")
        if len(set(self.labels)) != len(self.labels):
            raise ValidationError("state labels must be distinct")

    @property
    def n(self) -> int:
        return len(self.labels)


@dataclass(frozen=True)
class OutputFunction:
    """Per-state monetary output y."""

    values: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "values", _astuple(self.values))
        if not all(math.isfinite(v) for v in self.values):
            raise ValidationError("output values must be finite")

    def as_array(self) -> np.ndarray:
        return np.array(self.values, dtype=float)


@dataclass(frozen=True)
class Contract:
    """Per-state payment b to the agent."""

    payments: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "payments", _astuple(self.payments))
        if not all(math.isfinite(v) for v in self.payments):
            raise ValidationError("contract payments must be finite")

    def as_array(self) -> np.ndarray:
        return np.array(self.payments, dtype=float)


@dataclass(frozen=True)
class Distribution:
    """Probability vector over states; entries sum to 1 within 1e-12."""

    probs: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "probs", _astuple(self.probs))
        arr = np.array(self.probs)
        if arr.size == 0 or abs(arr.sum() - 1.0) > 1e-12:
            raise ValidationError("probabilities must sum to 1 within 1e-12")
        if (arr < -1e-12).any():
            raise ValidationError("probabilities must be nonnegative")

    def as_array(self) -> np.ndarray:
        return np.array(self.probs, dtype=float)


def _as_payments(b) -> np.ndarray:
    if isinstance(b, Contract):
        return b.as_array()
    return np.asarray(b, dtype=float)


def _as_probs(p) -> np.ndarray:
    if isinstance(p, Distribution):
        return p.as_array()
    return np.asarray(p, dtype=float)


# ---------------------------------------------------------------------------
# Cost functions


class CostFunction:
    """Base for the cost kinds.

    Subclasses provide ``value`` (scalar), ``value_many`` (vectorized over a
    point matrix), and, where meaningful, ``gradient`` and ``hessian``.
    ``convex_smooth`` marks the kinds eligible for the interior solver.
    """

    kind: str = ""
    convex_smooth: bool = False

    def value(self, p: np.ndarray) -> float:
        raise NotImplementedError

    def value_many(self, points: np.ndarray) -> np.ndarray:
        return np.array([self.value(row) for row in points])

    def gradient(self, p: np.ndarray) -> np.ndarray:
        raise DifferentiabilityError(f"{self.kind} cost has no gradient")

    def hessian(self, p: np.ndarray) -> np.ndarray:
        raise DifferentiabilityError(f"{self.kind} cost has no hessian")

    def scaled(self, factor: float) -> "CostFunction":
        """Return the cost multiplied by a positive factor, same kind."""
        raise NotImplementedError

    def enumerable_points(self) -> np.ndarray | None:
        """Intrinsic point grid for non-lattice kinds, else None."""
        return None

    def params_dict(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class QuadraticCost(CostFunction):
    """c(p) = (p - q0)' Q (p - q0) with Q symmetric PSD."""

    Q: tuple[tuple[float, ...], ...]
    q0: tuple[float, ...]
    kind: str = field(default="quadratic", init=False)
    convex_smooth: bool = field(default=True, init=False)

    def __post_init__(self):
        q = np.asarray(self.Q, dtype=float)
        if q.ndim != 2 or q.shape[0] != q.shape[1]:
            raise ValidationError("Q must be a square matrix")
        object.__setattr__(self, "Q", tuple(map(tuple, q.tolist())))
        object.__setattr__(self, "q0", _astuple(self.q0))
        if len(self.q0) != q.shape[0]:
            raise ValidationError("q0 length must match Q")
        if not np.allclose(q, q.T, atol=1e-12):
            raise ValidationError("Q must be symmetric")
        if np.linalg.eigvalsh(q).min() < -1e-10:
            raise ValidationError("Q must be positive semidefinite")

    def _q(self) -> np.ndarray:
        return np.array(self.Q, dtype=float)

    def _q0(self) -> np.ndarray:
        return np.array(self.q0, dtype=float)

    def value(self, p: np.ndarray) -> float:
        d = np.asarray(p, dtype=float) - self._q0()
        return float(d @ self._q() @ d)

    def value_many(self, points: np.ndarray) -> np.ndarray:
        d = points - self._q0()
        return np.einsum("ij,jk,ik->i", d, self._q(), d)

    def gradient(self, p: np.ndarray) -> np.ndarray:
        return 2.0 * self._q() @ (np.asarray(p, dtype=float) - self._q0())

    def hessian(self, p: np.ndarray) -> np.ndarray:
        return 2.0 * self._q()

    def scaled(self, factor: float) -> "QuadraticCost":
        return QuadraticCost(tuple(tuple(factor * v for v in row) for row in self.Q), self.q0)

    def params_dict(self) -> dict:
        return {"Q": [list(r) for r in self.Q], "q0": list(self.q0)}


@dataclass(frozen=True)
class RelativeEntropyCost(CostFunction):
    """c(p) = theta * sum p log(p / q0), with 0 log 0 = 0."""

    theta: float
    q0: tuple[float, ...]
    kind: str = field(default="relative-entropy", init=False)
    convex_smooth: bool = field(default=True, init=False)

    def __post_init__(self):
        object.__setattr__(self, "theta", float(self.theta))
        object.__setattr__(self, "q0", _astuple(self.q0))
        if self.theta <= 0:
            raise ValidationError("entropy scale theta must be positive")
        q = np.array(self.q0)
        if (q <= 0).any() or abs(q.sum() - 1.0) > 1e-9:
            raise ValidationError("entropy baseline q0 must be an interior distribution")

    def _q0(self) -> np.ndarray:
        return np.array(self.q0, dtype=float)

    def value(self, p: np.ndarray) -> float:
        return float(self.value_many(np.asarray(p, dtype=float)[None, :])[0])

    def value_many(self, points: np.ndarray) -> np.ndarray:
        ratio = np.divide(points, self._q0()[None, :])
        with np.errstate(divide="ignore", invalid="ignore"):
            terms = np.where(points > 0.0, points * np.log(ratio), 0.0)
        return self.theta * terms.sum(axis=1)

    def gradient(self, p: np.ndarray) -> np.ndarray:
        p = np.asarray(p, dtype=float)
        if (p <= 0).any():
            raise InteriorityError("entropy gradient needs a strictly interior p")
        return self.theta * (np.log(p / self._q0()) + 1.0)

    def hessian(self, p: np.ndarray) -> np.ndarray:
        p = np.asarray(p, dtype=float)
        if (p <= 0).any():
            raise InteriorityError("entropy hessian needs a strictly interior p")
        return np.diag(self.theta / p)

    def scaled(self, factor: float) -> "RelativeEntropyCost":
        return RelativeEntropyCost(factor * self.theta, self.q0)

    def params_dict(self) -> dict:
        return {"theta": self.theta, "q0": list(self.q0)}


@dataclass(frozen=True)
class TableCost(CostFunction):
    """Explicit cost per listed point; undefined elsewhere.

    Points are matched exactly up to 1e-12 per coordinate. The table is
    expected to cover the scenario's simplex lattice (validation enforces
    this), so enumeration still runs on the lattice.
    """

    points: tuple[tuple[float, ...], ...]
    values: tuple[float, ...]
    kind: str = field(default="table", init=False)

    def __post_init__(self):
        pts = tuple(_astuple(p) for p in self.points)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "values", _astuple(self.values))
        if len(self.points) != len(self.values):
            raise ValidationError("table points and values must align")
        if not self.points:
            raise ValidationError("table cost needs at least one point")

    def _lookup(self) -> dict:
        return {_key(p): v for p, v in zip(self.points, self.values)}

    def value(self, p: np.ndarray) -> float:
        try:
            return self._lookup()[_key(p)]
        except KeyError:
            raise UndefinedCostPointError(f"cost undefined at grid point {tuple(np.round(p, 6))}") from None

    def value_many(self, points: np.ndarray) -> np.ndarray:
        table = self._lookup()
        out = np.empty(len(points))
        for i, row in enumerate(points):
            key = _key(row)
            if key not in table:
                raise UndefinedCostPointError(f"cost undefined at grid point {tuple(np.round(row, 6))}")
            out[i] = table[key]
        return out

    def covers(self, points: np.ndarray) -> bool:
        table = self._lookup()
        return all(_key(row) in table for row in points)

    def scaled(self, factor: float) -> "TableCost":
        return TableCost(self.points, tuple(factor * v for v in self.values))

    def params_dict(self) -> dict:
        return {"points": [list(p) for p in self.points], "values": list(self.values)}


@dataclass(frozen=True)
class EffortCost(CostFunction):
    """Scalar effort grid mapped to induced distributions and costs.

    The cost is defined exactly at the induced distributions; enumeration
    runs over those points instead of the simplex lattice.
    """

    efforts: tuple[float, ...]
    distributions: tuple[tuple[float, ...], ...]
    costs: tuple[float, ...]
    kind: str = field(default="effort", init=False)

    def __post_init__(self):
        object.__setattr__(self, "efforts", _astuple(self.efforts))
        object.__setattr__(self, "distributions", tuple(_astuple(d) for d in self.distributions))
        object.__setattr__(self, "costs", _astuple(self.costs))
        if not (len(self.efforts) == len(self.distributions) == len(self.costs)):
            raise ValidationError("effort grid, distributions, and costs must align")
        if not self.efforts:
            raise ValidationError("effort cost needs at least one effort level")
        for d in self.distributions:
            Distribution(d)  # reuse the invariant checks

    def _lookup(self) -> dict:
        # first occurrence wins when two efforts induce the same distribution
        table: dict = {}
        for d, c in zip(self.distributions, self.costs):
            table.setdefault(_key(d), c)
        return table

    def value(self, p: np.ndarray) -> float:
        try:
            return self._lookup()[_key(p)]
        except KeyError:
            raise UndefinedCostPointError("cost undefined off the induced-effort grid") from None

    def enumerable_points(self) -> np.ndarray:
        seen: dict = {}
        for d in self.distributions:
            seen.setdefault(_key(d), d)
        pts = sorted(seen.values())
        return np.array(pts, dtype=float)

    def scaled(self, factor: float) -> "EffortCost":
        return EffortCost(self.efforts, self.distributions, tuple(factor * v for v in self.costs))

    def params_dict(self) -> dict:
        return {
            "efforts": list(self.efforts),
            "distributions": [list(d) for d in self.distributions],
            "costs": list(self.costs),
        }


# ---------------------------------------------------------------------------
# Utility


@dataclass(frozen=True)
class AgentUtility:
    """Bernoulli utility. Kinds: risk_neutral, cara, crra.

    Normalizations: u(0) = 0 for every kind. CARA is (1 - exp(-a x)) / a,
    CRRA is ((x + s)^(1-g) - s^(1-g)) / (1-g) on x + s > 0, with the log form
    at g = 1; g = 0 reduces to risk neutrality.
    """

    kind: str = "risk_neutral"
    a: float | None = None
    gamma: float | None = None
    shift: float | None = None

    def __post_init__(self):
        if self.kind == "risk_neutral":
            pass
        elif self.kind == "cara":
            if self.a is None or float(self.a) <= 0:
                raise ValidationError("CARA coefficient a must be positive")
            object.__setattr__(self, "a", float(self.a))
        elif self.kind == "crra":
            if self.gamma is None or float(self.gamma) < 0:
                raise ValidationError("CRRA coefficient gamma must be nonnegative")
            shift = 1.0 if self.shift is None else float(self.shift)
            if shift <= 0:
                raise ValidationError("CRRA domain shift must be positive")
            object.__setattr__(self, "gamma", float(self.gamma))
            object.__setattr__(self, "shift", shift)
        else:
            raise ValidationError(f"unknown utility kind: {self.kind!r}")

    def apply(self, x: np.ndarray) -> np.ndarray:
        """Vectorized u(x). Risk-neutral returns the input array unchanged."""
        if self.kind == "risk_neutral":
            return x
        x = np.asarray(x, dtype=float)
        if self.kind == "cara":
            return (1.0 - np.exp(-self.a * x)) / self.a
        g, s = self.gamma, self.shift
        if np.any(x + s <= 0):
            raise ValidationError("CRRA utility evaluated outside its domain (x + shift <= 0)")
        if g == 1.0:
            return np.log((x + s) / s)
        return ((x + s) ** (1.0 - g) - s ** (1.0 - g)) / (1.0 - g)

    def derivative(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.kind == "risk_neutral":
            return np.ones_like(x)
        if self.kind == "cara":
            return np.exp(-self.a * x)
        if np.any(x + self.shift <= 0):
            raise ValidationError("CRRA utility evaluated outside its domain (x + shift <= 0)")
        return (x + self.shift) ** (-self.gamma)

    def domain_violation(self, payments: np.ndarray) -> str | None:
        if self.kind == "crra" and np.any(np.asarray(payments) + self.shift <= 0):
            return "contract payments outside the CRRA utility domain"
        return None

    def params_dict(self) -> dict:
        if self.kind == "cara":
            return {"a": self.a}
        if self.kind == "crra":
            return {"gamma": self.gamma, "shift": self.shift}
        return {}


# ---------------------------------------------------------------------------
# Contract families


def grid_values(spec) -> tuple[float, ...]:
    """Expand a gridded parameter: an explicit list, or {min, max, step}."""
    if isinstance(spec, dict):
        try:
            lo, hi, step = float(spec["min"]), float(spec["max"]), float(spec["step"])
        except KeyError as exc:
            raise ValidationError(f"grid spec missing key {exc}") from None
        if step <= 0 or hi < lo:
            raise ValidationError("grid spec needs step > 0 and max >= min")
        count = int(math.floor((hi - lo) / step + 1e-9)) + 1
        return tuple(float(lo + i * step) for i in range(count))
    values = _astuple(spec)
    if not values:
        raise ValidationError("empty parameter grid")
    return values


class ContractFamily:
    """Base for the finite contract families."""

    kind: str = ""

    def size(self) -> int:
        raise NotImplementedError

    def members(self, y: np.ndarray) -> Iterator[tuple[str, np.ndarray]]:
        """Yield (label, payments) in a deterministic lexicographic order."""
        raise NotImplementedError

    def payment_matrix(self, y: np.ndarray) -> tuple[list[str], np.ndarray]:
        labels, rows = [], []
        for label, b in self.members(y):
            labels.append(label)
            rows.append(b)
        if not rows:
            raise ConfigurationError("contract family enumeration is empty")
        return labels, np.array(rows, dtype=float)

    def params_dict(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class GridFamily(ContractFamily):
    """Cartesian product of per-state payment value grids."""

    grids: tuple[tuple[float, ...], ...]
    kind: str = field(default="grid", init=False)

    def __post_init__(self):
        object.__setattr__(self, "grids", tuple(tuple(float(v) for v in g) for g in self.grids))
        if not self.grids or any(len(g) == 0 for g in self.grids):
            raise ValidationError("grid family needs a nonempty grid per state")

    @staticmethod
    def uniform(n_states: int, b_min: float, b_max: float, step: float) -> "GridFamily":
        g = grid_values({"min": b_min, "max": b_max, "step": step})
        return GridFamily(tuple(g for _ in range(n_states)))

    def size(self) -> int:
        return int(np.prod([len(g) for g in self.grids]))

    def members(self, y: np.ndarray) -> Iterator[tuple[str, np.ndarray]]:
        if len(self.grids) != len(y):
            raise ValidationError("grid family arity must match the state count")
        for combo in itertools.product(*self.grids):
            yield "b=(" + ",".join(format(v, "g") for v in combo) + ")", np.array(combo, dtype=float)

    def params_dict(self) -> dict:
        return {"values": [list(g) for g in self.grids]}


@dataclass(frozen=True)
class LinearShareFamily(ContractFamily):
    """b = beta * y + w over gridded beta in [0, 1] and gridded w."""

    betas: tuple[float, ...]
    ws: tuple[float, ...]
    kind: str = field(default="linear-share", init=False)

    def __post_init__(self):
        object.__setattr__(self, "betas", _astuple(self.betas))
        object.__setattr__(self, "ws", _astuple(self.ws))
        if not self.betas or not self.ws:
            raise ValidationError("linear-share family needs beta and w grids")
        if min(self.betas) < 0 or max(self.betas) > 1:
            raise ValidationError("linear-share slopes must lie in [0, 1]")

    def size(self) -> int:
        return len(self.betas) * len(self.ws)

    def members(self, y: np.ndarray) -> Iterator[tuple[str, np.ndarray]]:
        for beta in self.betas:
            for w in self.ws:
                yield f"beta={beta:g},w={w:g}", beta * y + w

    def params_dict(self) -> dict:
        return {"betas": list(self.betas), "ws": list(self.ws)}


@dataclass(frozen=True)
class DebtFamily(ContractFamily):
    """Agent is residual claimant above a gridded face value F >= 0."""

    faces: tuple[float, ...]
    kind: str = field(default="debt", init=False)

    def __post_init__(self):
        object.__setattr__(self, "faces", _astuple(self.faces))
        if not self.faces:
            raise ValidationError("debt family needs a face-value grid")
        if min(self.faces) < 0:
            raise ValidationError("debt face values must be nonnegative")

    def size(self) -> int:
        return len(self.faces)

    def members(self, y: np.ndarray) -> Iterator[tuple[str, np.ndarray]]:
        for f in self.faces:
            yield f"F={f:g}", np.maximum(0.0, y - f)

    def params_dict(self) -> dict:
        return {"faces": list(self.faces)}


@dataclass(frozen=True)
class LiveOrDieFamily(ContractFamily):
    """b = 0 below a gridded threshold l, b = y at or above it."""

    thresholds: tuple[float, ...]
    kind: str = field(default="live-or-die", init=False)

    def __post_init__(self):
        object.__setattr__(self, "thresholds", _astuple(self.thresholds))
        if not self.thresholds:
            raise ValidationError("live-or-die family needs a threshold grid")

    def size(self) -> int:
        return len(self.thresholds)

    def members(self, y: np.ndarray) -> Iterator[tuple[str, np.ndarray]]:
        for l in self.thresholds:
            yield f"l={l:g}", np.where(y >= l, y, 0.0)

    def params_dict(self) -> dict:
        return {"thresholds": list(self.thresholds)}


@dataclass(frozen=True)
class MonotoneBoundedSlopeFamily(ContractFamily):
    """Grid contracts that are nondecreasing in output with slope at most one.

    Enumerates the per-state grid and keeps contracts whose payments, read in
    increasing-output order, never decrease and never rise faster than output.
    """

    grids: tuple[tuple[float, ...], ...]
    kind: str = field(default="monotone-bounded-slope", init=False)

    def __post_init__(self):
        object.__setattr__(self, "grids", tuple(tuple(float(v) for v in g) for g in self.grids))
        if not self.grids or any(len(g) == 0 for g in self.grids):
            raise ValidationError("monotone family needs a nonempty grid per state")

    @staticmethod
    def uniform(n_states: int, b_min: float, b_max: float, step: float) -> "MonotoneBoundedSlopeFamily":
        g = grid_values({"min": b_min, "max": b_max, "step": step})
        return MonotoneBoundedSlopeFamily(tuple(g for _ in range(n_states)))

    @staticmethod
    def admits(b: np.ndarray, y: np.ndarray) -> bool:
        order = np.argsort(y, kind="stable")
        bo, yo = np.asarray(b, dtype=float)[order], np.asarray(y, dtype=float)[order]
        db, dy = np.diff(bo), np.diff(yo)
        return bool(np.all(db >= -1e-12) and np.all(db <= dy + 1e-12))

    def size(self) -> int:
        # size of the underlying grid; the filtered count requires enumeration
        return int(np.prod([len(g) for g in self.grids]))

    def members(self, y: np.ndarray) -> Iterator[tuple[str, np.ndarray]]:
        if len(self.grids) != len(y):
            raise ValidationError("monotone family arity must match the state count")
        for combo in itertools.product(*self.grids):
            b = np.array(combo, dtype=float)
            if self.admits(b, y):
                yield "b=(" + ",".join(format(v, "g") for v in combo) + ")", b

    def params_dict(self) -> dict:
        return {"values": [list(g) for g in self.grids]}


# ---------------------------------------------------------------------------
# Scenario


@dataclass(frozen=True)
class Scenario:
    """A full problem instance.

    Attributes:
        states: the finite state space.
        y: output function.
        cost: the agent's distribution cost.
        capacity: cap k on the agent's cost.
        family: feasible contract family B.
        utility: the agent's Bernoulli utility.
        reservation: benchmark utility level r used by selections.
        m: simplex lattice resolution for enumeration (coordinates in
            multiples of 1/m).
        tol_u: absolute utility comparison tolerance.
    """

    states: StateSpace
    y: OutputFunction
    cost: CostFunction
    capacity: float
    family: ContractFamily
    utility: AgentUtility
    reservation: float
    m: int
    tol_u: float = DEFAULT_TOL_U

    def __post_init__(self):
        object.__setattr__(self, "capacity", float(self.capacity))
        object.__setattr__(self, "reservation", float(self.reservation))
        object.__setattr__(self, "m", int(self.m))
        object.__setattr__(self, "tol_u", float(self.tol_u))

    @property
    def n(self) -> int:
        return self.states.n


@dataclass(frozen=True)
class Profile:
    """A contract paired with a distribution, with cached payoffs.

    ``contract_id`` and ``point_id`` identify the family member and the
    enumeration point when the profile came out of an enumeration; exact set
    comparisons use those identities.
    """

    contract: Contract
    dist: Distribution
    agent_utility: float
    principal_payoff: float
    capacity_binding: bool
    cost: float = math.nan
    contract_id: int | None = None
    point_id: int | None = None
    contract_label: str = ""

    def identity(self) -> tuple[int, int]:
        if self.contract_id is None or self.point_id is None:
            raise ConfigurationError("profile has no enumeration identity")
        return (self.contract_id, self.point_id)


# ---------------------------------------------------------------------------
# Lattice and evaluation helpers


@lru_cache(maxsize=64)
def _lattice_cached(n: int, m: int) -> np.ndarray:
    counts = np.array(list(_compositions(m, n)), dtype=float)
    arr = counts / m
    arr.setflags(write=False)
    return arr


def _compositions(total: int, parts: int):
    if parts == 1:
        yield (total,)
        return
    for head in range(total + 1):
        for rest in _compositions(total - head, parts - 1):
            yield (head,) + rest


def simplex_lattice(n: int, m: int) -> np.ndarray:
    """All distributions with coordinates in multiples of 1/m, in
    lexicographic order by coordinates. Read-only array of shape (L, n)."""
    if n < 1 or m < 1:
        raise ValidationError("lattice needs n >= 1 and m >= 1")
    return _lattice_cached(n, m)


def enumeration_points(s: Scenario) -> np.ndarray:
    """Candidate distributions for exhaustive scans: the cost's intrinsic
    grid for effort kinds, otherwise the scenario's simplex lattice."""
    intrinsic = s.cost.enumerable_points()
    if intrinsic is not None:
        return intrinsic
    return simplex_lattice(s.n, s.m)


def cost(s: Scenario, p) -> float:
    """The agent's cost c(p) under the scenario's cost kind."""
    return float(s.cost.value(_as_probs(p)))


def agent_value(s: Scenario, b, p) -> float:
    """E_p[u(b)] - c(p)."""
    pb = _as_probs(p)
    return float(pb @ s.utility.apply(_as_payments(b)) - s.cost.value(pb))


def principal_value(s: Scenario, alpha: float, b, p) -> float:
    """E_p[alpha * y - b]."""
    if not 0.0 <= alpha <= 1.0:
        raise ConfigurationError("alpha out of [0,1]")
    pb = _as_probs(p)
    return float(pb @ (alpha * s.y.as_array() - _as_payments(b)))


# ---------------------------------------------------------------------------
# Validation


def _cost_dimension(c: CostFunction) -> int | None:
    if isinstance(c, (QuadraticCost, RelativeEntropyCost)):
        return len(c.q0)
    if isinstance(c, TableCost):
        return len(c.points[0])
    if isinstance(c, EffortCost):
        return len(c.distributions[0])
    return None


@dataclass(frozen=True)
class ValidationReport:
    passed: bool
    failures: tuple[str, ...]

    def __bool__(self) -> bool:
        return self.passed


def validate_scenario(s: Scenario) -> ValidationReport:
    """Check structural invariants; returns a report instead of raising.

    A passing report implies the feasible distribution set is nonempty on the
    enumeration grid and the family enumeration is nonempty.
    """
    failures: list[str] = []
    n = s.n
    if len(s.y.values) != n:
        failures.append("output length must equal the state count")
    if not math.isfinite(s.capacity):
        failures.append("capacity must be finite")
    if not math.isfinite(s.reservation):
        failures.append("reservation must be finite")
    if s.m < 1:
        failures.append("simplex grid m must be a positive integer")
    if not (s.tol_u > 0):
        failures.append("tol_u must be positive")

    dim = _cost_dimension(s.cost)
    if dim is not None and dim != n:
        failures.append("cost dimension must equal the state count")

    points = None
    if not failures:
        try:
            points = enumeration_points(s)
        except ValidationError as exc:
            failures.append(str(exc))

    if points is not None:
        if isinstance(s.cost, TableCost) and not s.cost.covers(points):
            failures.append("cost undefined at grid point")
        else:
            costs = s.cost.value_many(points)
            if not (costs <= s.capacity + FEASIBILITY_SLACK).any():
                failures.append("feasible distribution set empty")

    try:
        labels, payments = s.family.payment_matrix(s.y.as_array())
    except (ValidationError, ConfigurationError) as exc:
        failures.append(f"contract family: {exc}")
    else:
        if len(labels) == 0:
            failures.append("contract family enumeration is empty")
        else:
            violation = s.utility.domain_violation(payments)
            if violation:
                failures.append(violation)

    return ValidationReport(passed=not failures, failures=tuple(failures))
