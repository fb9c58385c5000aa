"""Command-line front end: run, sweep, synth, verify."""

from __future__ import annotations

import argparse
import sys

from .bench import (
    RunConfig,
    report_json,
    run_report,
    run_verify_suite,
    sweep,
    sweep_csv,
    synth_trace,
    trace_to_csv,
)
from .tariff import TraceParseError, ValidationError


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--trace", help="trace CSV path (header t,e,p0,p1,B); omit to synthesize")
    p.add_argument("--slots", type=int, default=12, help="synthetic trace length in months")
    p.add_argument("--profile", default="seasonal", choices=["seasonal", "flat"])
    p.add_argument("--h-rate", type=float, default=None,
                   help="fixed underusage rate $/kWh; default is 0.1x each month's fixed rate")
    p.add_argument("--beta", type=float, default=100.0, help="constant cancellation fee ($)")
    p.add_argument("--alpha", type=float, default=10.0, help="fee per residual contract month ($)")
    p.add_argument("--contract-len", type=int, default=12, help="fixed-rate contract length (months)")
    p.add_argument("--fee-regime", default="constant", choices=["constant", "linear"])
    p.add_argument("--fee-mode", default="literal", choices=["literal", "transition-only"])
    p.add_argument("--algorithms", default="ofa,gchase,gchase_r",
                   help="comma-separated subset of ofa,dp,gchase,gchase_r,cchase")
    p.add_argument("--mc-runs", type=int, default=100, help="randomized-algorithm replications")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--benchmark", default="all-variable", choices=["all-variable", "all-fixed"])
    p.add_argument("--out", help="write output here instead of stdout")


def _config_from_args(args: argparse.Namespace) -> RunConfig:
    return RunConfig(
        trace_path=args.trace,
        synth_slots=args.slots,
        profile=args.profile,
        h_rate=args.h_rate,
        beta=args.beta,
        alpha=args.alpha,
        contract_len=args.contract_len,
        fee_regime=args.fee_regime,
        fee_mode=args.fee_mode,
        algorithms=tuple(a.strip() for a in args.algorithms.split(",") if a.strip()),
        mc_runs=args.mc_runs,
        seed=args.seed,
        benchmark=args.benchmark,
    )


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="planswitch",
        description="Plan-switching algorithms: benchmark runs, fee sweeps, trace synthesis, verification",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run the selected algorithms on one trace, JSON report")
    _add_config_flags(p_run)

    p_sweep = sub.add_parser("sweep", help="savings per algorithm across a fee range, CSV report")
    _add_config_flags(p_sweep)
    p_sweep.add_argument("--from", dest="fee_from", type=float, default=1.0)
    p_sweep.add_argument("--to", dest="fee_to", type=float, default=100.0)
    p_sweep.add_argument("--step", dest="fee_step", type=float, default=1.0)

    p_synth = sub.add_parser("synth", help="write a synthetic trace CSV")
    p_synth.add_argument("--slots", "-T", type=int, default=12)
    p_synth.add_argument("--seed", type=int, default=0)
    p_synth.add_argument("--profile", default="seasonal", choices=["seasonal", "flat"])
    p_synth.add_argument("--out", help="write output here instead of stdout")

    p_verify = sub.add_parser("verify", help="run a property suite; nonzero exit on failure")
    p_verify.add_argument("suite", choices=["oracle", "ratio", "montecarlo", "identity", "all"])
    p_verify.add_argument("--seed", type=int, default=42)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            report = run_report(_config_from_args(args))
            _emit(report_json(report), args.out)
            return 0
        if args.command == "sweep":
            config = _config_from_args(args)
            header, rows = sweep(config, args.fee_from, args.fee_to, args.fee_step)
            _emit(sweep_csv(header, rows, config), args.out)
            return 0
        if args.command == "synth":
            trace = synth_trace(args.slots, args.seed, args.profile)
            _emit(trace_to_csv(trace), args.out)
            return 0
        if args.command == "verify":
            ok, lines = run_verify_suite(args.suite, args.seed)
            for line in lines:
                print(line)
            return 0 if ok else 1
    except (ValidationError, TraceParseError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 2


if __name__ == "__main__":
    raise SystemExit(main())
