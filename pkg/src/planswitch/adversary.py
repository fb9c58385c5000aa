"""Adversarial instance generators and competitive-ratio measurement.

The adaptive adversary plays the standard two-state game: each slot it
charges a unit of cost against whichever plan the online player currently
occupies, so any player pays every slot while an offline schedule can dodge
most charges. Driving the unit small relative to the fee pushes the
deterministic algorithm's realized ratio toward its worst case of 3.

The fixed lower-bound instance for the randomized/continuous pair front-loads
a single small charge against the fixed plan and then penalizes the variable
plan forever, making any hedging overpay by a factor approaching 2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .chase import (
    DeltaTrace,
    OnlineState,
    clamp_step,
    delta_trace,
    gchase_r,
    gchase_step,
    ofa_s,
)
from .oracles import BRUTE_FORCE_MAX_T, brute_force_sp, dp_dsp
from .tariff import CostSeries, Schedule, ValidationError, dsp_cost, sp_cost

__all__ = [
    "RatioReport",
    "random_cost_series",
    "random_schedule",
    "randomized_lb_instance",
    "gchase_player",
    "deterministic_adversary",
    "measure_ratio",
    "measure_ratio_dsp",
    "monte_carlo",
    "simulate_randomized_batch",
    "batch_sp_costs",
]


@dataclass(frozen=True)
class RatioReport:
    """Cost of an algorithm against the offline optimum on one instance.

    ``ratio`` is ``alg_cost / opt_cost``, or None (undefined) when the
    optimum is zero. Randomized measurements carry the replication mean,
    its standard error, and the replication count; ``alg_cost`` then holds
    the mean.
    """

    instance_id: str
    alg_cost: float
    opt_cost: float
    ratio: Optional[float]
    mean: Optional[float] = None
    stderr: Optional[float] = None
    n_runs: Optional[int] = None


def _make_report(instance_id, alg_cost, opt_cost, **extra) -> RatioReport:
    ratio = alg_cost / opt_cost if opt_cost > 0.0 else None
    return RatioReport(instance_id, alg_cost, opt_cost, ratio, **extra)


def random_cost_series(
    rng: np.random.Generator, period: int, low: float = 0.0, high: float = 10.0
) -> CostSeries:
    """Uniform random cost pairs, the workhorse of the property suites."""
    g = rng.uniform(low, high, size=(2, period))
    return CostSeries(g[0].tolist(), g[1].tolist())


def random_schedule(rng: np.random.Generator, period: int) -> Schedule:
    return Schedule(rng.integers(0, 2, size=period).tolist())


def randomized_lb_instance(beta: float, small_delta: float, horizon: int) -> CostSeries:
    """Tight instance for the factor-2 bound of the continuous algorithm.

    Slot 1 charges ``small_delta * beta`` against the fixed plan; every later
    slot charges the same amount against the variable plan. Staying put costs
    the offline player ``small_delta * beta``, while the continuous algorithm
    pays ``(2 - small_delta)`` times that.
    """
    if not (math.isfinite(beta) and beta > 0.0):
        raise ValidationError(f"beta must be finite and > 0, got {beta!r}")
    if not 0.0 < small_delta < 1.0:
        raise ValidationError(f"small_delta must lie in (0, 1), got {small_delta!r}")
    if horizon < 2:
        raise ValidationError(f"horizon must be >= 2, got {horizon!r}")
    charge = small_delta * beta
    pairs = [(charge, 0.0)] + [(0.0, charge)] * (horizon - 1)
    return CostSeries.from_pairs(pairs)


def gchase_player(beta: float) -> Callable[[float, float], int]:
    """Stateful step callable running the deterministic online rule.

    Feed one cost pair per slot; returns the plan chosen for that slot. The
    callable maintains the clamped gap internally, so callers (in particular
    the adaptive adversary) see nothing but emitted states.
    """
    state = OnlineState.initial(beta)

    def step(g0: float, g1: float) -> int:
        nonlocal state
        value = clamp_step(state.prev_delta, g0 - g1, state.beta)
        state, s = gchase_step(state, value)
        return s

    return step


def deterministic_adversary(
    make_player: Callable[[], Callable[[float, float], int]],
    beta: float,
    horizon: int,
    unit: float,
) -> tuple[CostSeries, RatioReport]:
    """Adaptive lower-bound game against an online player.

    Each slot charges ``unit`` against the plan the player occupied entering
    the slot, then lets the player react. The adversary is strictly causal:
    it sees only the states the player has already emitted. Returns the
    realized cost series and the player's ratio against the offline optimum
    (exhaustive for short horizons, backward-pass otherwise).
    """
    if horizon < 1:
        raise ValidationError(f"horizon must be >= 1, got {horizon!r}")
    if not (math.isfinite(unit) and unit > 0.0):
        raise ValidationError(f"unit must be finite and > 0, got {unit!r}")
    player = make_player()
    pairs = []
    current = 0
    alg_cost = 0.0
    for _ in range(horizon):
        pair = (unit, 0.0) if current == 0 else (0.0, unit)
        s = player(*pair)
        if s not in (0, 1):
            raise ValidationError(f"player emitted {s!r}, expected 0 or 1")
        alg_cost += pair[1] if s else pair[0]
        if s > current:
            alg_cost += beta
        pairs.append(pair)
        current = s
    cs = CostSeries.from_pairs(pairs)
    if horizon <= BRUTE_FORCE_MAX_T:
        opt_cost = brute_force_sp(cs, beta).best_cost
    else:
        dt = delta_trace(cs, beta)
        opt_cost = sp_cost(ofa_s(dt), cs, beta)
    report = _make_report(f"adversary:unit={unit},horizon={horizon}", alg_cost, opt_cost)
    return cs, report


def measure_ratio(
    alg: Callable[[DeltaTrace], Schedule],
    cs: CostSeries,
    beta: float,
    instance_id: str = "",
) -> RatioReport:
    """Run a constant-fee algorithm on an instance and compare with the optimum."""
    dt = delta_trace(cs, beta)
    alg_cost = sp_cost(alg(dt), cs, beta)
    opt_cost = sp_cost(ofa_s(dt), cs, beta)
    return _make_report(instance_id, alg_cost, opt_cost)


def measure_ratio_dsp(
    alg: Callable[[CostSeries], Schedule | tuple[Schedule, int]],
    cs: CostSeries,
    alpha: float,
    contract_len: int,
    fee_mode: str = "literal",
    instance_id: str = "",
) -> RatioReport:
    """Decreasing-fee counterpart of :func:`measure_ratio`; optimum via the DP."""
    out = alg(cs)
    sched = out[0] if isinstance(out, tuple) else out
    alg_cost = dsp_cost(sched, cs, alpha, contract_len, fee_mode)
    opt_cost = dp_dsp(cs, alpha, contract_len, fee_mode).best_cost
    return _make_report(instance_id, alg_cost, opt_cost)


def simulate_randomized_batch(dt: DeltaTrace, n_runs: int, seed: int) -> np.ndarray:
    """States of ``n_runs`` independent randomized-rule runs, one row per run.

    Replication i draws its slot-indexed uniforms from a generator seeded
    ``seed + i``, exactly as the scalar fold does, so the rows are
    bit-identical to running :func:`planswitch.chase.gchase_r` once per seed.
    """
    period = len(dt)
    draws = np.empty((n_runs, period))
    for i in range(n_runs):
        draws[i] = np.random.default_rng(seed + i).random(period)
    beta = dt.beta
    neg = -beta
    values = dt.values
    states = np.zeros(n_runs, dtype=np.int8)
    out = np.empty((n_runs, period), dtype=np.int8)
    for t in range(1, period + 1):
        d = values[t]
        prev_d = values[t - 1]
        if d == 0.0:
            states = np.ones(n_runs, dtype=np.int8)
        elif d == neg:
            states = np.zeros(n_runs, dtype=np.int8)
        elif prev_d <= d:
            p_up = 1.0 - d / prev_d
            switch = (states == 0) & (draws[:, t - 1] < p_up)
            states = np.where(switch, np.int8(1), states)
        else:
            p_down = 1.0 - (beta + d) / (beta + prev_d)
            drop = (states == 1) & (draws[:, t - 1] < p_down)
            states = np.where(drop, np.int8(0), states)
        out[:, t - 1] = states
    return out


def batch_sp_costs(states: np.ndarray, cs: CostSeries, beta: float) -> np.ndarray:
    """Constant-fee cost of each row of a (runs x T) 0/1 state matrix."""
    g0 = np.asarray(cs.g0)
    g1 = np.asarray(cs.g1)
    fstates = states.astype(np.float64)
    service = fstates @ g1 + (1.0 - fstates) @ g0
    ups = states[:, 0].astype(np.int64)
    if states.shape[1] > 1:
        ups = ups + (states[:, 1:] > states[:, :-1]).sum(axis=1)
    return service + float(beta) * ups


def monte_carlo(
    alg,
    cs: CostSeries,
    beta: float,
    n_runs: int,
    seed: int,
    instance_id: str = "",
) -> RatioReport:
    """Replicate a randomized algorithm and report its mean cost and ratio.

    ``alg`` is either :func:`planswitch.chase.gchase_r` (simulated in a
    vectorized batch) or any callable ``(trace, rng) -> Schedule``; in both
    cases replication i uses a fresh generator seeded ``seed + i``, so results
    are deterministic in (seed, n_runs) and independent of evaluation order.
    The ratio compares the replication mean against the offline optimum.
    """
    if n_runs < 2:
        raise ValidationError(f"n_runs must be >= 2, got {n_runs!r}")
    dt = delta_trace(cs, beta)
    if alg is gchase_r:
        states = simulate_randomized_batch(dt, n_runs, seed)
        costs = batch_sp_costs(states, cs, beta)
    else:
        costs = np.empty(n_runs)
        for i in range(n_runs):
            sched = alg(dt, np.random.default_rng(seed + i))
            costs[i] = sp_cost(sched, cs, beta)
    mean = float(costs.mean())
    stderr = float(costs.std(ddof=1) / math.sqrt(n_runs))
    opt_cost = sp_cost(ofa_s(dt), cs, beta)
    return _make_report(
        instance_id, mean, opt_cost, mean=mean, stderr=stderr, n_runs=n_runs
    )
