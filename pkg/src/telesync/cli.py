"""Command-line entry points: train, bench, eval, serve."""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

from .harness import (ConfigError, ExperimentConfig, bench_prediction_methods,
                      dump_trajectories, load_config, run_campaign)


def _load(args) -> ExperimentConfig:
    if args.config:
        cfg = load_config(args.config)
    else:
        cfg = ExperimentConfig()
    overrides = {}
    if getattr(args, "variant", None):
        overrides["variants"] = (args.variant,)
    if getattr(args, "seed", None) is not None:
        overrides["seeds"] = (args.seed,)
    if getattr(args, "steps", None) is not None:
        overrides["total_env_steps"] = args.steps
    if overrides:
        cfg = replace(cfg, **overrides)
    return cfg


def cmd_train(args) -> int:
    cfg = _load(args)
    summary = run_campaign(cfg)
    json.dump(summary, sys.stdout, indent=2)
    print()
    return 0


def cmd_bench(args) -> int:
    cfg = _load(args)
    rows = bench_prediction_methods(cfg)
    for row in rows:
        print(f"{row['method']:6s} action={row['action_delay_ms']:3d}ms "
              f"total={row['total_wallclock_s']:8.1f}s "
              f"model={row['model_wallclock_s']:7.2f}s "
              f"calls={row['ensemble_calls']}")
    return 0


def cmd_eval(args) -> int:
    report = dump_trajectories(args.checkpoint, args.episodes)
    if args.trace:
        from .harness import export_prediction_trace

        report["prediction_trace_csv"] = str(
            export_prediction_trace(args.checkpoint, args.trace))
    json.dump(report, sys.stdout, indent=2)
    print()
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app
    from .sim import SimConfig

    sim = SimConfig()
    if args.config:
        sim = load_config(args.config).sim
    static = Path(__file__).resolve().parents[2] / "frontend" / "dist"
    if args.static:
        static = Path(args.static)
    app = create_app(sim, static_dir=static if static.is_dir() else None)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="telesync",
        description="Delay-corrected adaptive PD teleoperation experiments")
    sub = parser.add_subparsers(dest="command", required=True)

    p_train = sub.add_parser("train", help="run a training campaign")
    p_train.add_argument("--config", help="JSON or YAML experiment config")
    p_train.add_argument("--variant", choices=("SAC", "A-SAC", "PMDC", "ABSP"))
    p_train.add_argument("--seed", type=int)
    p_train.add_argument("--steps", type=int, help="total environment steps")
    p_train.set_defaults(func=cmd_train)

    p_bench = sub.add_parser("bench", help="time SBSP vs ABSP (and baselines)")
    p_bench.add_argument("--config", help="JSON or YAML experiment config")
    p_bench.add_argument("--steps", type=int)
    p_bench.set_defaults(func=cmd_bench)

    p_eval = sub.add_parser("eval", help="dump evaluation trajectories")
    p_eval.add_argument("--checkpoint", required=True)
    p_eval.add_argument("--episodes", type=int, default=10)
    p_eval.add_argument("--trace", help="also export a prediction-trace CSV "
                                        "(predictive checkpoints only)")
    p_eval.set_defaults(func=cmd_eval)

    p_serve = sub.add_parser("serve", help="run the live teleoperation service")
    p_serve.add_argument("--config", help="JSON or YAML experiment config")
    p_serve.add_argument("--port", type=int, default=8090)
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--static", help="static asset directory (browser UI)")
    p_serve.set_defaults(func=cmd_serve)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
