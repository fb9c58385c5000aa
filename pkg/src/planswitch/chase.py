"""Threshold algorithms driven by the clamped cumulative cost gap.

Every algorithm here reads a single statistic: the running sum of per-slot
cost gaps g_t(0) - g_t(1), clamped to [-beta, 0] and started at -beta. A
value pinned at 0 says the fixed plan has overpaid by a full fee's worth, so
the variable plan is the safe choice; pinned at -beta says the opposite.

Four algorithms share the trace:

* ``ofa_s``     -- offline optimum, one backward pass from the boundary.
* ``gchase_s``  -- deterministic online, forward pass; 3-competitive.
* ``gchase_r``  -- randomized online, switches early with a probability
  proportional to how fast the gap moves; 2-competitive in expectation.
* ``cchase``    -- continuous relaxation, holds fraction (beta + gap)/beta in
  the variable plan; its cost equals the randomized algorithm's expectation.

The decreasing-fee variants subtract a per-slot drift ``alpha`` from the gap
and force a switch when a fixed contract reaches its maximum length.

Batch functions are plain loops; every online algorithm also exposes a step
form (fold the steps to reproduce the batch output bit-exactly). The
randomized step consumes exactly one uniform draw per slot whether or not the
slot's decision is random, so scalar folds and vectorized batch simulations
see identical draws positionally.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .tariff import CostSeries, Schedule, ValidationError

__all__ = [
    "InternalInvariantError",
    "DeltaTrace",
    "OnlineState",
    "FractionalSchedule",
    "clamp_step",
    "delta",
    "delta_trace",
    "ofa_s",
    "gchase_s",
    "gchase_step",
    "gchase_r",
    "gchase_r_step",
    "cchase",
    "csp_cost",
    "marginal_probabilities",
    "gchase_dsp",
    "gchase_r_dsp",
]

logger = logging.getLogger(__name__)


class InternalInvariantError(RuntimeError):
    """A state the decision rules make unreachable was observed."""


@dataclass(frozen=True)
class DeltaTrace:
    """Clamped cumulative cost-gap sequence, indexed 0..T with value[0] = -beta.

    Clamping uses min/max, so boundary hits are exactly 0.0 or exactly -beta;
    the algorithms test those boundaries with plain equality, never epsilons.
    ``drift`` is the per-slot amount subtracted before clamping (0 for the
    constant-fee problem, alpha for the decreasing-fee variant).
    """

    values: tuple[float, ...]
    beta: float
    drift: float = 0.0

    def __post_init__(self):
        beta = float(self.beta)
        if not math.isfinite(beta) or beta <= 0.0:
            raise ValidationError(f"beta must be finite and > 0, got {beta!r}")
        drift = float(self.drift)
        if not math.isfinite(drift) or drift < 0.0:
            raise ValidationError(f"drift must be finite and >= 0, got {drift!r}")
        values = tuple(float(v) for v in self.values)
        if not values:
            raise ValidationError("delta trace must contain the initial value")
        if values[0] != -beta:
            raise ValidationError(f"value[0] must equal -beta={-beta}, got {values[0]}")
        neg = -beta
        if any(v < neg or v > 0.0 for v in values):
            raise ValidationError("delta trace values must lie in [-beta, 0]")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "drift", drift)

    def __len__(self) -> int:
        """Number of slots T (the stored sequence has T + 1 entries)."""
        return len(self.values) - 1


@dataclass(frozen=True)
class OnlineState:
    """Loop state of the forward algorithms: last slot, last gap value, last plan."""

    t: int
    prev_delta: float
    prev_state: int
    beta: float

    def __post_init__(self):
        if not -self.beta <= self.prev_delta <= 0.0:
            raise ValidationError(
                f"prev_delta {self.prev_delta} outside [-beta, 0] for beta={self.beta}"
            )
        if self.prev_state not in (0, 1):
            raise ValidationError(f"prev_state must be 0 or 1, got {self.prev_state!r}")

    @classmethod
    def initial(cls, beta: float) -> "OnlineState":
        return cls(t=0, prev_delta=-float(beta), prev_state=0, beta=float(beta))


@dataclass(frozen=True)
class FractionalSchedule:
    """Relaxed plan occupancy x_t in [0, 1], with the boundary x_0 = 0."""

    x: tuple[float, ...]

    def __init__(self, x: Iterable[float]):
        x = tuple(float(v) for v in x)
        if not x:
            raise ValidationError("fractional schedule must be nonempty")
        for t, v in enumerate(x, start=1):
            if not 0.0 <= v <= 1.0:
                raise ValidationError(f"x[{t}] = {v!r} outside [0, 1]")
        object.__setattr__(self, "x", x)

    def __len__(self) -> int:
        return len(self.x)


def clamp_step(prev: float, gap: float, beta: float, drift: float = 0.0) -> float:
    """Advance the clamped accumulator by one slot's gap (minus drift)."""
    v = prev + gap - drift
    if v >= 0.0:
        return 0.0
    neg = -beta
    if v <= neg:
        return neg
    return v


def delta(cs: CostSeries, t: int) -> float:
    """One-slot cost gap g_t(0) - g_t(1); positive favors the variable plan."""
    g0, g1 = cs.pair(t)
    return g0 - g1


def delta_trace(cs: CostSeries, beta: float, drift: float = 0.0) -> DeltaTrace:
    """Build the full clamped gap sequence for a cost series.

    Requires beta > 0 (the band [-beta, 0] would otherwise collapse and the
    boundary rules become meaningless).
    """
    beta = float(beta)
    if not math.isfinite(beta) or beta <= 0.0:
        raise ValidationError(f"beta must be finite and > 0, got {beta!r}")
    drift = float(drift)
    if not math.isfinite(drift) or drift < 0.0:
        raise ValidationError(f"drift must be finite and >= 0, got {drift!r}")
    neg = -beta
    values = [neg]
    append = values.append
    prev = neg
    for a, b in zip(cs.g0, cs.g1):
        v = prev + (a - b) - drift
        if v >= 0.0:
            v = 0.0
        elif v <= neg:
            v = neg
        append(v)
        prev = v
    return DeltaTrace(values=tuple(values), beta=beta, drift=drift)


def ofa_s(dt: DeltaTrace) -> Schedule:
    """Offline optimal schedule for the constant-fee objective.

    One backward pass from the boundary s_{T+1} = 0: a slot whose gap value
    sits at -beta takes the fixed plan, one at 0 takes the variable plan, and
    interior slots copy the later decision. O(T) time and space.
    """
    values = dt.values
    neg = -dt.beta
    states = [0] * len(dt)
    nxt = 0
    for t in range(len(dt), 0, -1):
        v = values[t]
        if v == neg:
            nxt = 0
        elif v == 0.0:
            nxt = 1
        states[t - 1] = nxt
    return Schedule(states)


def gchase_s(dt: DeltaTrace) -> Schedule:
    """Deterministic online schedule: forward pass mirroring the offline rule.

    Switches only on boundary hits, otherwise keeps the previous plan
    (s_0 = 0). Worst-case cost is 3x the offline optimum.
    """
    values = dt.values
    neg = -dt.beta
    states = [0] * len(dt)
    prev = 0
    for t in range(1, len(dt) + 1):
        v = values[t]
        if v == neg:
            prev = 0
        elif v == 0.0:
            prev = 1
        states[t - 1] = prev
    return Schedule(states)


def gchase_step(state: OnlineState, delta_t: float) -> tuple[OnlineState, int]:
    """One slot of the deterministic online rule, given the slot's gap value."""
    neg = -state.beta
    if delta_t == neg:
        s = 0
    elif delta_t == 0.0:
        s = 1
    else:
        s = state.prev_state
    return OnlineState(t=state.t + 1, prev_delta=delta_t, prev_state=s, beta=state.beta), s


def gchase_r_step(
    state: OnlineState, delta_t: float, rng: np.random.Generator
) -> tuple[OnlineState, int]:
    """One slot of the randomized online rule.

    Boundary hits force the plan. At interior values: while the gap rises, a
    fixed-plan customer switches with probability 1 - delta_t/prev; while it
    falls, a variable-plan customer drops with probability
    1 - (beta + delta_t)/(beta + prev). Always consumes exactly one uniform
    draw, used only when the decision is random.

    Raises:
        InternalInvariantError: the state pairs (prev at 0, plan 0) or
            (prev at -beta, plan 1) are unreachable under these rules.
    """
    beta = state.beta
    neg = -beta
    prev_d = state.prev_delta
    prev_s = state.prev_state
    if prev_d == 0.0 and prev_s == 0:
        raise InternalInvariantError("previous gap 0 with previous plan 0")
    if prev_d == neg and prev_s == 1:
        raise InternalInvariantError("previous gap -beta with previous plan 1")
    u = rng.random()
    if delta_t == 0.0:
        s = 1
    elif delta_t == neg:
        s = 0
    elif prev_d <= delta_t:
        if prev_s == 1:
            s = 1
        else:
            # prev_d <= delta_t < 0 here, so the ratio is well defined
            s = 1 if u < 1.0 - delta_t / prev_d else 0
    else:
        if prev_s == 0:
            s = 0
        else:
            # prev_d > delta_t >= -beta here, so beta + prev_d > 0
            s = 0 if u < 1.0 - (beta + delta_t) / (beta + prev_d) else 1
    return OnlineState(t=state.t + 1, prev_delta=delta_t, prev_state=s, beta=beta), s


def gchase_r(dt: DeltaTrace, rng: np.random.Generator) -> Schedule:
    """Randomized online schedule: fold of :func:`gchase_r_step` over the trace."""
    state = OnlineState.initial(dt.beta)
    states = []
    for t in range(1, len(dt) + 1):
        state, s = gchase_r_step(state, dt.values[t], rng)
        states.append(s)
    return Schedule(states)


def cchase(dt: DeltaTrace) -> FractionalSchedule:
    """Continuous online schedule: x_t = (beta + value_t)/beta, in [0, 1] by the clamp."""
    beta = dt.beta
    return FractionalSchedule((beta + v) / beta for v in dt.values[1:])


def csp_cost(xs: FractionalSchedule, cs: CostSeries, beta: float) -> float:
    """Cost of a fractional schedule: linear interpolation between the two
    plans' costs plus ``beta`` per unit of upward movement (x_0 = 0)."""
    if len(xs) != len(cs):
        raise ValidationError(f"schedule length {len(xs)} != series length {len(cs)}")
    beta = float(beta)
    if not math.isfinite(beta) or beta < 0.0:
        raise ValidationError(f"beta must be finite and >= 0, got {beta!r}")
    total = 0.0
    prev = 0.0
    for x, a, b in zip(xs.x, cs.g0, cs.g1):
        total += (b - a) * x + a
        if x > prev:
            total += beta * (x - prev)
        prev = x
    return total


def marginal_probabilities(dt: DeltaTrace) -> tuple[float, ...]:
    """Pr[plan = 1] per slot under the randomized rule, propagated analytically.

    Equals the continuous schedule of :func:`cchase` entrywise (up to float
    rounding): the randomized algorithm's expectation is the continuous one.
    """
    beta = dt.beta
    neg = -beta
    values = dt.values
    p = 0.0
    out = []
    for t in range(1, len(dt) + 1):
        d = values[t]
        prev_d = values[t - 1]
        if d == 0.0:
            p = 1.0
        elif d == neg:
            p = 0.0
        elif prev_d <= d:
            p = p + (1.0 - d / prev_d) * (1.0 - p)
        else:
            p = p * (beta + d) / (beta + prev_d)
        out.append(p)
    return tuple(out)


def _drift_trace(cs: CostSeries, alpha: float, contract_len: int) -> DeltaTrace:
    if not (math.isfinite(alpha) and alpha > 0.0):
        raise ValidationError(f"alpha must be finite and > 0, got {alpha!r}")
    if int(contract_len) != contract_len or contract_len < 1:
        raise ValidationError(f"contract_len must be an integer >= 1, got {contract_len!r}")
    return delta_trace(cs, beta=alpha * contract_len, drift=alpha)


def _randomized_decision(
    beta: float, prev_d: float, prev_s: int, d: float, u: float
) -> int:
    # Shared branch logic of the randomized rule, without reachability checks:
    # the expiry guard below legitimately creates (prev at -beta, plan 1).
    if d == 0.0:
        return 1
    if d == -beta:
        return 0
    if prev_d <= d:
        if prev_s == 1:
            return 1
        return 1 if u < 1.0 - d / prev_d else 0
    if prev_s == 0:
        return 0
    return 0 if u < 1.0 - (beta + d) / (beta + prev_d) else 1


def _with_expiry_guard(decide, dt: DeltaTrace, contract_len: int, label: str) -> tuple[Schedule, int]:
    """Forward pass with a contract-expiry guard.

    The drift rule alone can park the gap at -beta indefinitely, emitting a
    fixed-plan run longer than the contract allows; when a run has already
    lasted ``contract_len`` slots, the next fixed-plan decision is overridden
    to the variable plan (the contract expired). Later decisions see the
    forced state. Forced switches are logged and counted.
    """
    values = dt.values
    states = []
    prev_s = 0
    run = 0
    forced = 0
    for t in range(1, len(dt) + 1):
        s = decide(values[t - 1], prev_s, values[t])
        if s == 0 and run == contract_len:
            s = 1
            forced += 1
        run = run + 1 if s == 0 else 0
        states.append(s)
        prev_s = s
    if forced:
        logger.warning(
            "%s: forced %d switch(es) to keep contract runs within %d slots",
            label,
            forced,
            contract_len,
        )
    return Schedule(states), forced


def gchase_dsp(cs: CostSeries, alpha: float, contract_len: int) -> tuple[Schedule, int]:
    """Deterministic online heuristic for the decreasing-fee objective.

    Runs the forward boundary rule on the drift-adjusted gap trace
    (beta = alpha * contract_len, drift = alpha) under the contract-expiry
    guard. Returns the feasible schedule and the number of forced switches.
    """
    dt = _drift_trace(cs, alpha, contract_len)
    neg = -dt.beta

    def decide(prev_d, prev_s, d):
        if d == neg:
            return 0
        if d == 0.0:
            return 1
        return prev_s

    return _with_expiry_guard(decide, dt, int(contract_len), "gchase_dsp")


def gchase_r_dsp(
    cs: CostSeries, alpha: float, contract_len: int, rng: np.random.Generator
) -> tuple[Schedule, int]:
    """Randomized counterpart of :func:`gchase_dsp`, same guard and trace.

    Consumes one uniform draw per slot, forced slots included.
    """
    dt = _drift_trace(cs, alpha, contract_len)
    beta = dt.beta

    def decide(prev_d, prev_s, d):
        return _randomized_decision(beta, prev_d, prev_s, d, rng.random())

    return _with_expiry_guard(decide, dt, int(contract_len), "gchase_r_dsp")
