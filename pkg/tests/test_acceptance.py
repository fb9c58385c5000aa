"""Acceptance suite: every release criterion, at its stated tolerance.

Each test prints one pass/fail line (visible with ``pytest -s`` or in the
captured output of a failing run) and then asserts, so the suite doubles as a
human-readable checklist.

The published headline savings percentages depend on proprietary household
traces and archived retail prices that are not desk-reproducible; criterion
12 instead pins the protocol itself on a seeded synthetic trace: the report
schema, the worst-case cost orderings, and byte-level determinism.
"""

import math
import time

import numpy as np

from planswitch import (
    RunConfig,
    batch_sp_costs,
    brute_force_dsp,
    brute_force_sp,
    cchase,
    csp_cost,
    delta_trace,
    deterministic_adversary,
    dp_dsp,
    dsp_cost,
    gchase_dsp,
    gchase_player,
    gchase_s,
    marginal_probabilities,
    measure_ratio,
    ofa_s,
    p2_cost,
    phi_identity_dsp,
    phi_identity_sp,
    random_cost_series,
    random_schedule,
    randomized_lb_instance,
    report_json,
    run_report,
    simulate_randomized_batch,
    sp_cost,
    zero_runs,
)

TOL = 1e-9
BETAS = (0.5, 1.0, 2.0, 5.0)


def _criterion(n: int, desc: str, ok: bool, detail: str = "") -> None:
    status = "PASS" if ok else "FAIL"
    suffix = f" ({detail})" if detail else ""
    print(f"[acceptance] criterion {n:02d} {status}: {desc}{suffix}")
    assert ok, f"criterion {n}: {desc}{suffix}"


def test_criterion_01_offline_optimality():
    rng = np.random.default_rng(101)
    start = time.perf_counter()
    worst = 0.0
    for _ in range(1000):
        period = int(rng.integers(1, 13))
        beta = float(rng.choice(BETAS))
        cs = random_cost_series(rng, period, 0.0, 10.0)
        got = sp_cost(ofa_s(delta_trace(cs, beta)), cs, beta)
        want = brute_force_sp(cs, beta).best_cost
        worst = max(worst, abs(got - want))
    elapsed = time.perf_counter() - start
    _criterion(
        1,
        "backward pass equals exhaustive minimum on 1000 instances",
        worst <= TOL and elapsed < 10.0,
        f"worst gap {worst:.2e}, {elapsed:.1f}s",
    )


def test_criterion_02_dsp_oracle_agreement():
    rng = np.random.default_rng(102)
    start = time.perf_counter()
    worst = 0.0
    for i in range(500):
        period = int(rng.integers(1, 13))
        cap = int(rng.integers(1, period + 1))
        alpha = float(rng.choice([0.0, 0.1, 1.0]))
        mode = "literal" if i % 2 == 0 else "transition-only"
        cs = random_cost_series(rng, period, 0.0, 10.0)
        got = dp_dsp(cs, alpha, cap, mode).best_cost
        want = brute_force_dsp(cs, alpha, cap, mode).best_cost
        worst = max(worst, abs(got - want))
    elapsed = time.perf_counter() - start
    _criterion(
        2,
        "dynamic program equals exhaustive minimum on 500 instances, both fee modes",
        worst <= TOL and elapsed < 10.0,
        f"worst gap {worst:.2e}, {elapsed:.1f}s",
    )


def test_criterion_03_deterministic_bound():
    rng = np.random.default_rng(103)
    violations = 0
    for _ in range(10_000):
        period = int(rng.integers(1, 13))
        beta = float(rng.choice(BETAS))
        cs = random_cost_series(rng, period, 0.0, 10.0)
        dt = delta_trace(cs, beta)
        if sp_cost(gchase_s(dt), cs, beta) > 3.0 * sp_cost(ofa_s(dt), cs, beta) + TOL:
            violations += 1
    games = 0
    for unit, horizon in [(0.005, 300), (0.01, 600), (0.1, 240), (0.7, 120), (1.5, 60)]:
        cs, report = deterministic_adversary(lambda: gchase_player(1.0), 1.0, horizon, unit)
        games += 1
        if report.alg_cost > 3.0 * report.opt_cost + TOL:
            violations += 1
        remeasured = measure_ratio(gchase_s, cs, 1.0)
        if remeasured.ratio is not None and remeasured.ratio > 3.0 + TOL:
            violations += 1
    _criterion(
        3,
        "deterministic rule within factor 3 on 10000 random + adversarial instances",
        violations == 0,
        f"{violations} violations across 10000 random and {games} games",
    )


def test_criterion_04_deterministic_tightness():
    _, report = deterministic_adversary(lambda: gchase_player(1.0), 1.0, 600, 0.01)
    _criterion(
        4,
        "adaptive game realizes ratio >= 2.9 against the deterministic rule",
        report.ratio is not None and report.ratio >= 2.9,
        f"realized ratio {report.ratio:.4f}",
    )


def _random_mc_instances(seed: int, count: int = 20):
    rng = np.random.default_rng(seed)
    for k in range(count):
        period = int(rng.integers(2, 11))
        beta = float(rng.choice(BETAS))
        yield k, beta, random_cost_series(rng, period, 0.0, 10.0)


def test_criterion_05_randomized_continuous_equivalence():
    n_runs = 20_000
    mean_fails = 0
    marginal_fails = 0
    for k, beta, cs in _random_mc_instances(105):
        dt = delta_trace(cs, beta)
        states = simulate_randomized_batch(dt, n_runs, seed=50_000 + 997 * k)
        costs = batch_sp_costs(states, cs, beta)
        mean = float(costs.mean())
        stderr = float(costs.std(ddof=1) / math.sqrt(n_runs))
        target = csp_cost(cchase(dt), cs, beta)
        if abs(mean - target) > 3.0 * stderr + TOL:
            mean_fails += 1
        empirical = states.mean(axis=0)
        for emp, p in zip(empirical, marginal_probabilities(dt)):
            if abs(emp - p) > 3.0 * math.sqrt(p * (1.0 - p) / n_runs) + 1e-12:
                marginal_fails += 1
    _criterion(
        5,
        "randomized mean matches continuous cost and marginals on 20 instances x 20000 runs",
        mean_fails == 0 and marginal_fails == 0,
        f"{mean_fails} mean deviations, {marginal_fails} marginal deviations",
    )


def test_criterion_06_randomized_bound():
    n_runs = 20_000
    violations = 0
    for k, beta, cs in _random_mc_instances(106):
        dt = delta_trace(cs, beta)
        states = simulate_randomized_batch(dt, n_runs, seed=70_000 + 991 * k)
        costs = batch_sp_costs(states, cs, beta)
        mean = float(costs.mean())
        stderr = float(costs.std(ddof=1) / math.sqrt(n_runs))
        opt = sp_cost(ofa_s(dt), cs, beta)
        if mean > 2.0 * opt + 3.0 * stderr + TOL:
            violations += 1
    _criterion(
        6,
        "randomized mean within twice the optimum (plus 3 standard errors) everywhere",
        violations == 0,
        f"{violations} violations",
    )


def test_criterion_07_tight_randomized_instance():
    beta, small = 1.0, 0.01
    cs = randomized_lb_instance(beta, small, 5)
    dt = delta_trace(cs, beta)
    cost = csp_cost(cchase(dt), cs, beta)
    offline = sp_cost(ofa_s(dt), cs, beta)
    cost_ok = abs(cost - 0.0199) <= TOL
    ratio_ok = offline > 0 and abs(cost / offline - 1.99) <= TOL
    _criterion(
        7,
        "tight instance: continuous cost 0.0199 and ratio 1.99 in closed form",
        cost_ok and ratio_ok,
        f"cost {cost:.10f}, ratio {cost / offline:.10f}",
    )


def test_criterion_08_equivalence_of_cost_forms():
    rng = np.random.default_rng(108)
    worst = 0.0
    for _ in range(1000):
        period = int(rng.integers(1, 13))
        beta = float(rng.uniform(0.0, 5.0))
        cs = random_cost_series(rng, period, 0.0, 10.0)
        sched = random_schedule(rng, period)
        worst = max(worst, abs(sp_cost(sched, cs, beta) - p2_cost(sched, cs, beta)))
    _criterion(
        8,
        "constant-fee and half-fee cost forms agree on 1000 random triples",
        worst <= TOL,
        f"worst gap {worst:.2e}",
    )


def test_criterion_09_segment_identities():
    rng = np.random.default_rng(109)
    worst_sp = 0.0
    for _ in range(1000):
        period = int(rng.integers(1, 13))
        beta = float(rng.uniform(0.0, 5.0))
        cs = random_cost_series(rng, period, 0.0, 10.0)
        sched = random_schedule(rng, period)
        lhs, rhs = phi_identity_sp(sched, cs, beta)
        worst_sp = max(worst_sp, abs(lhs - rhs))
    worst_dsp = 0.0
    for _ in range(1000):
        period = int(rng.integers(1, 13))
        cs = random_cost_series(rng, period, 0.0, 10.0)
        sched = random_schedule(rng, period)
        runs = zero_runs(sched)
        cap = (max((e - s + 1) for s, e in runs) if runs else 1) + int(rng.integers(0, 4))
        alpha = float(rng.uniform(0.0, 2.0))
        lhs, rhs = phi_identity_dsp(sched, cs, alpha, cap)
        worst_dsp = max(worst_dsp, abs(lhs - rhs))
    _criterion(
        9,
        "both segment-decomposition identities hold on 1000 random triples each",
        worst_sp <= TOL and worst_dsp <= TOL,
        f"worst gaps {worst_sp:.2e} / {worst_dsp:.2e}",
    )


def test_criterion_10_linear_complexity():
    import gc

    rng = np.random.default_rng(110)
    big, small = 1_000_000, 100_000
    g = rng.uniform(0.0, 10.0, size=(2, big))
    from planswitch import CostSeries

    cs_big = CostSeries(g[0].tolist(), g[1].tolist())
    cs_small = CostSeries(g[0][:small].tolist(), g[1][:small].tolist())

    def pipeline(cs):
        dt = delta_trace(cs, 2.0)
        ofa_s(dt)
        gchase_s(dt)

    gc.disable()
    try:
        t_small = math.inf
        for _ in range(3):  # best-of runs damp scheduler noise on both sizes
            t0 = time.perf_counter()
            pipeline(cs_small)
            t_small = min(t_small, time.perf_counter() - t0)
        t_big = math.inf
        for _ in range(2):
            t0 = time.perf_counter()
            pipeline(cs_big)
            t_big = min(t_big, time.perf_counter() - t0)
    finally:
        gc.enable()
    ratio = t_big / t_small
    _criterion(
        10,
        "tenfold input grows offline+online runtime at most twentyfold",
        ratio <= 20.0,
        f"{small} slots: {t_small:.3f}s, {big} slots: {t_big:.3f}s, ratio {ratio:.1f}",
    )


def test_criterion_11_conjecture_monitor():
    rng = np.random.default_rng(111)
    measured = 0
    undefined = 0
    conjecture_violations = 0
    sanity_failures = 0
    worst_excess = 0.0
    for _ in range(1000):
        cap = int(rng.choice([6, 12, 24]))
        period = int(rng.integers(6, 37))
        alpha = float(rng.choice([0.1, 0.5, 1.0]))
        cs = random_cost_series(rng, period, 0.0, 10.0)
        sched, _ = gchase_dsp(cs, alpha, cap)
        cost = dsp_cost(sched, cs, alpha, cap, "literal")
        opt = dp_dsp(cs, alpha, cap, "literal").best_cost
        if opt <= 0.0:
            undefined += 1
            continue
        measured += 1
        ratio = cost / opt
        if ratio < 1.0 - TOL:
            sanity_failures += 1
        bound = 3.0 + 1.0 / (cap - 1)
        if ratio > bound + TOL:
            conjecture_violations += 1
            worst_excess = max(worst_excess, ratio - bound)
    print(
        f"[acceptance] conjecture monitor: {measured} ratios measured, "
        f"{conjecture_violations} above 3 + 1/(L-1) (worst excess {worst_excess:.4f}), "
        f"{undefined} skipped (zero optimum); violations are reported, not failed"
    )
    _criterion(
        11,
        "drift heuristic measured against the dynamic program on 1000 instances",
        measured >= 900 and sanity_failures == 0,
        f"{measured} measured, {sanity_failures} below-optimum sanity failures",
    )


def test_criterion_12_protocol_run_on_synthetic_trace():
    cfg = RunConfig(
        synth_slots=12,
        seed=2026,
        beta=100.0,
        algorithms=("ofa", "gchase", "gchase_r"),
        mc_runs=100,
    )
    report = run_report(cfg)
    blob_a = report_json(report).encode()
    blob_b = report_json(run_report(cfg)).encode()
    ofa_cost = report["reports"]["ofa"]["cost"]
    gch_cost = report["reports"]["gchase"]["cost"]
    schema_keys = {
        "algorithm", "cost", "benchmark_cost", "savings_pct",
        "schedule", "ratio_vs_offline", "stderr", "mc_runs",
    }
    schema_ok = all(schema_keys == set(entry) for entry in report["reports"].values())
    savings_ok = all(
        entry["savings_pct"] is not None for entry in report["reports"].values()
    )
    ordering_ok = ofa_cost <= gch_cost + TOL and gch_cost <= 3.0 * ofa_cost + TOL
    _criterion(
        12,
        "seeded protocol run: report schema, cost ordering, byte-identical output",
        schema_ok and savings_ok and ordering_ok and blob_a == blob_b,
        f"ofa {ofa_cost:.2f} <= gchase {gch_cost:.2f} <= 3x; {len(blob_a)} bytes",
    )
