"""Capital-structure readings of the scaling threshold.

With output scaled by alpha*, a debt contract with face value F splits output
into a debt leg, a retained-equity leg, and the agent's residual; a live-or-die
contract splits it at a threshold. Both decompositions add up to y state by
state, and sweeping the capacity k traces how alpha* (and with it the
debt/equity mix) moves.
"""

from __future__ import annotations

import dataclasses
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, DegenerateScalingError, ValidationError
from .model import Contract, OutputFunction, Scenario, validate_scenario
from .scaling import alpha_star


@dataclass(frozen=True)
class DebtEquityDecomposition:
    """Per-state split of output under a scaled debt contract.

    ``face_scaled`` is F divided by alpha*; the agent holds
    alpha* * max{0, y - F/alpha*}, the principal holds the debt piece
    min{y, F/alpha*} plus the fraction 1 - alpha* of the residual equity.
    """

    F: float
    alpha_star: float
    face_scaled: float
    agent_leg: tuple[float, ...]
    debt_leg: tuple[float, ...]
    equity_leg: tuple[float, ...]


@dataclass(frozen=True)
class LiveOrDieDecomposition:
    """Per-state split under a scaled live-or-die contract: the agent gets
    alpha* * y at or above the threshold and nothing below it."""

    l: float
    alpha_star: float
    agent_leg: tuple[float, ...]
    principal_leg: tuple[float, ...]


def _check_scale(alpha: float, F: float) -> None:
    if not 0.0 <= alpha <= 1.0:
        raise ConfigurationError("alpha out of [0,1]")
    if F < 0.0:
        raise ValidationError("face value must be nonnegative")


def scaled_debt_contract(y: OutputFunction, F: float, alpha: float) -> Contract:
    """The agent leg max{0, alpha*y - F} of a debt contract on scaled output."""
    _check_scale(alpha, F)
    if alpha == 0.0 and F > 0.0:
        raise DegenerateScalingError("face value cannot be scaled by alpha = 0")
    arr = y.as_array()
    return Contract(tuple(np.maximum(0.0, alpha * arr - F)))


def debt_equity_decompose(y: OutputFunction, F: float, alpha_star: float) -> DebtEquityDecomposition:
    """Split y into debt, retained equity, and the agent's piece.

    Uses the factored form alpha* * max{0, y - F/alpha*} for the agent leg, so
    the adding-up identity holds per state up to float rounding.
    """
    _check_scale(alpha_star, F)
    if alpha_star == 0.0:
        raise DegenerateScalingError("face value cannot be scaled by alpha = 0")
    arr = y.as_array()
    face_scaled = F / alpha_star
    residual = np.maximum(0.0, arr - face_scaled)
    return DebtEquityDecomposition(
        F=float(F),
        alpha_star=float(alpha_star),
        face_scaled=float(face_scaled),
        agent_leg=tuple(alpha_star * residual),
        debt_leg=tuple(np.minimum(arr, face_scaled)),
        equity_leg=tuple((1.0 - alpha_star) * residual),
    )


def live_or_die_decompose(y: OutputFunction, l: float, alpha_star: float) -> LiveOrDieDecomposition:
    """Split y at the threshold l: below it the principal keeps everything,
    at or above it the agent takes the fraction alpha*."""
    if not 0.0 <= alpha_star <= 1.0:
        raise ConfigurationError("alpha out of [0,1]")
    arr = y.as_array()
    alive = arr >= l
    return LiveOrDieDecomposition(
        l=float(l),
        alpha_star=float(alpha_star),
        agent_leg=tuple(np.where(alive, alpha_star * arr, 0.0)),
        principal_leg=tuple(np.where(alive, (1.0 - alpha_star) * arr, arr)),
    )


def _workers() -> int:
    env = os.environ.get("AGENTCAP_THREADS", "")
    if env.strip():
        try:
            return max(1, int(env))
        except ValueError:
            raise ConfigurationError(f"AGENTCAP_THREADS must be an integer, got {env!r}")
    return os.cpu_count() or 1


def sweep_alpha_star(s: Scenario, k_grid) -> list[tuple[float, float]]:
    """alpha* as a function of capacity, sorted by k.

    Each k is solved on its own copy of the scenario with its own base level.
    Distinct capacities are independent, so the sweep runs on a thread pool
    capped by AGENTCAP_THREADS.
    """
    ks = sorted(float(k) for k in k_grid)

    def one(k: float) -> tuple[float, float]:
        sk = dataclasses.replace(s, capacity=k)
        report = validate_scenario(sk)
        if not report:
            raise ValidationError(f"capacity {k:g}: " + "; ".join(report.failures))
        return k, alpha_star(sk).alpha_star

    workers = min(_workers(), max(1, len(ks)))
    if workers == 1 or len(ks) == 1:
        return [one(k) for k in ks]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(one, ks))
