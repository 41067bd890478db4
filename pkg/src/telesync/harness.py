"""Experiment harness: config files, multi-seed campaigns, the prediction
timing benchmark, and evaluation trajectory dumps."""

from __future__ import annotations

import csv
import json
import os
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np
import yaml

from .checkpoint import load_agent, save_agent
from .controllers import VARIANTS
from .envloop import DelaySteps
from .nn.ensemble import EnsembleConfig
from .rl.sac import SacConfig
from .sim import SimConfig
from .train import (ModelTrainConfig, TrainResult, evaluate_policy,
                    train_variant)

OUTPUT_ENV_VAR = "TELESYNC_OUT"


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class DelayConfig:
    """Delay settings in wall milliseconds; must quantize onto the sim step."""

    action_delay_ms: int = 0
    obs_delay_min_ms: int = 0
    obs_delay_max_ms: int = 0
    delay_seed: int = 0

    def steps(self, dt: float) -> DelaySteps:
        dt_ms = dt * 1000.0
        values = {}
        for name in ("action_delay_ms", "obs_delay_min_ms", "obs_delay_max_ms"):
            ms = getattr(self, name)
            if ms < 0:
                raise ConfigError(f"{name} must be >= 0, got {ms}")
            steps = ms / dt_ms
            if abs(steps - round(steps)) > 1e-9:
                raise ConfigError(
                    f"{name}={ms} is not an integer multiple of dt ({dt_ms:g} ms)")
            values[name] = int(round(steps))
        if values["obs_delay_max_ms"] < values["obs_delay_min_ms"]:
            raise ConfigError("obs_delay_max_ms must be >= obs_delay_min_ms")
        return DelaySteps(action=values["action_delay_ms"],
                          obs_min=values["obs_delay_min_ms"],
                          obs_max=values["obs_delay_max_ms"],
                          seed=self.delay_seed)


@dataclass(frozen=True)
class ExperimentConfig:
    sim: SimConfig = field(default_factory=SimConfig)
    delays: DelayConfig = field(default_factory=DelayConfig)
    variants: tuple[str, ...] = ("PMDC", "A-SAC", "SAC")
    seeds: tuple[int, ...] = (0, 1, 2)
    total_env_steps: int = 80_000
    out_dir: str = "runs"
    sac: SacConfig = field(default_factory=SacConfig)
    model: ModelTrainConfig = field(default_factory=ModelTrainConfig)

    def __post_init__(self) -> None:
        if not self.variants:
            raise ConfigError("variant list must be nonempty")
        for v in self.variants:
            if v not in VARIANTS:
                raise ConfigError(f"unknown variant {v!r}; expected one of {VARIANTS}")
        if not self.seeds:
            raise ConfigError("seeds list must be nonempty")
        if self.total_env_steps < self.sim.episode_length:
            raise ConfigError("total_env_steps must cover at least one episode")
        self.delays.steps(self.sim.dt)  # validates quantization

    def resolved_out_dir(self) -> Path:
        return Path(os.environ.get(OUTPUT_ENV_VAR, self.out_dir))


def _build_section(cls, data: dict, name: str):
    if not isinstance(data, dict):
        raise ConfigError(f"section {name!r} must be a mapping")
    valid = {f for f in cls.__dataclass_fields__}
    unknown = set(data) - valid
    if unknown:
        raise ConfigError(f"unknown keys in {name!r}: {sorted(unknown)}")
    return cls(**data)


def config_from_dict(data: dict) -> ExperimentConfig:
    data = dict(data)
    kwargs = {}
    if "sim" in data:
        kwargs["sim"] = _build_section(SimConfig, data.pop("sim"), "sim")
    if "delays" in data:
        kwargs["delays"] = _build_section(DelayConfig, data.pop("delays"), "delays")
    if "sac" in data:
        sac = dict(data.pop("sac"))
        if "hidden" in sac:
            sac["hidden"] = tuple(sac["hidden"])
        kwargs["sac"] = _build_section(SacConfig, sac, "sac")
    if "model" in data:
        model = dict(data.pop("model"))
        if "ensemble" in model:
            ens = dict(model["ensemble"])
            if "hidden" in ens:
                ens["hidden"] = tuple(ens["hidden"])
            model["ensemble"] = _build_section(EnsembleConfig, ens, "model.ensemble")
        kwargs["model"] = _build_section(ModelTrainConfig, model, "model")
    for key in ("variants", "seeds"):
        if key in data:
            kwargs[key] = tuple(data.pop(key))
    for key in ("total_env_steps", "out_dir"):
        if key in data:
            kwargs[key] = data.pop(key)
    if data:
        raise ConfigError(f"unknown top-level config keys: {sorted(data)}")
    return ExperimentConfig(**kwargs)


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    text = path.read_text()
    if path.suffix in (".yaml", ".yml"):
        data = yaml.safe_load(text)
    else:
        data = json.loads(text)
    if data is None:
        data = {}
    return config_from_dict(data)


def _prepare_out_dir(cfg: ExperimentConfig) -> Path:
    out = cfg.resolved_out_dir()
    out.mkdir(parents=True, exist_ok=True)
    probe = out / ".write_probe"
    try:
        probe.write_text("ok")
        probe.unlink()
    except OSError as exc:
        raise ConfigError(f"output directory {out} is not writable: {exc}") from exc
    return out


def _run_name(variant: str, seed: int) -> str:
    return f"{variant.replace('-', '')}_seed{seed}".lower()


def run_single(cfg: ExperimentConfig, variant: str, seed: int,
               out: Path) -> tuple[TrainResult, Path, Path]:
    delays = cfg.delays.steps(cfg.sim.dt)
    log_path = out / f"train_log_{_run_name(variant, seed)}.csv"
    result = train_variant(variant, cfg.sim, delays, seed, cfg.total_env_steps,
                           sac_cfg=cfg.sac, model_cfg=cfg.model,
                           log_path=str(log_path))
    ckpt_path = out / f"checkpoint_{_run_name(variant, seed)}.tsck"
    save_agent(ckpt_path, result.agent, variant=variant, seed=seed,
               env_steps=cfg.total_env_steps,
               delays=asdict(cfg.delays), model=result.model,
               extra={"sim": asdict(cfg.sim)})
    return result, log_path, ckpt_path


def summarize(results: dict[tuple[str, int], TrainResult]) -> dict:
    summary: dict = {"variants": {}}
    for variant in sorted({v for v, _ in results}):
        per_seed = {}
        finals = []
        for (v, seed), res in sorted(results.items()):
            if v != variant:
                continue
            per_seed[str(seed)] = {
                "final_episode_mean_reward": res.final_mean_reward(),
                "final5_mean_reward": res.final_window_mean(5),
                "episodes": len(res.rows),
                "ensemble_calls": res.counter.total_ensemble_calls,
            }
            finals.append(res.final_mean_reward())
        finals = np.array(finals)
        summary["variants"][variant] = {
            "seeds": per_seed,
            "final_mean": float(finals.mean()),
            "final_std": float(finals.std()),
            "final_median": float(np.median(finals)),
        }
    return summary


def run_campaign(cfg: ExperimentConfig) -> dict:
    """Train every (variant, seed) pair, writing one log CSV and checkpoint per
    run and a merged summary JSON."""
    out = _prepare_out_dir(cfg)
    results: dict[tuple[str, int], TrainResult] = {}
    for variant in cfg.variants:
        for seed in cfg.seeds:
            result, _, _ = run_single(cfg, variant, seed, out)
            results[(variant, seed)] = result
    summary = summarize(results)
    summary["config"] = {
        "delays": asdict(cfg.delays),
        "total_env_steps": cfg.total_env_steps,
        "variants": list(cfg.variants),
        "seeds": list(cfg.seeds),
    }
    (out / "summary.json").write_text(json.dumps(summary, indent=2))
    return summary


BENCH_COLUMNS = ("method", "action_delay_ms", "obs_delay_min_ms", "obs_delay_max_ms",
                 "env_steps", "total_wallclock_s", "model_wallclock_s",
                 "update_wallclock_s", "ensemble_calls")


def bench_prediction_methods(cfg: ExperimentConfig,
                             delay_settings: list[DelayConfig] | None = None,
                             methods: tuple[str, ...] = ("ABSP", "PMDC", "A-SAC", "SAC"),
                             seed: int | None = None) -> list[dict]:
    """Matched training runs per method and delay setting, reporting wall-clock
    and ensemble-call counts (the Table-style efficiency comparison)."""
    if not {"ABSP", "PMDC"} <= set(methods):
        raise ConfigError("bench requires both ABSP and PMDC (SBSP) enabled")
    out = _prepare_out_dir(cfg)
    if delay_settings is None:
        delay_settings = [
            DelayConfig(80, 10, 50, cfg.delays.delay_seed),
            DelayConfig(160, 10, 50, cfg.delays.delay_seed),
            DelayConfig(240, 10, 50, cfg.delays.delay_seed),
        ]
    bench_seed = cfg.seeds[0] if seed is None else seed
    rows = []
    for delays in delay_settings:
        for method in methods:
            run_cfg = replace(cfg, delays=delays, variants=(method,),
                              seeds=(bench_seed,))
            result = train_variant(method, run_cfg.sim, delays.steps(cfg.sim.dt),
                                   bench_seed, cfg.total_env_steps,
                                   sac_cfg=cfg.sac, model_cfg=cfg.model)
            rows.append({
                "method": method,
                "action_delay_ms": delays.action_delay_ms,
                "obs_delay_min_ms": delays.obs_delay_min_ms,
                "obs_delay_max_ms": delays.obs_delay_max_ms,
                "env_steps": cfg.total_env_steps,
                "total_wallclock_s": result.total_wallclock_ns / 1e9,
                "model_wallclock_s": result.counter.wall_time_model_ns / 1e9,
                "update_wallclock_s": result.update_wallclock_ns / 1e9,
                "ensemble_calls": result.counter.total_ensemble_calls,
            })
    path = out / "bench.csv"
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=BENCH_COLUMNS)
        writer.writeheader()
        writer.writerows(rows)
    return rows


def dump_trajectories(checkpoint_path, episodes: int, out_path=None,
                      eval_seed: int = 7_777) -> dict:
    """Run deterministic evaluation episodes from a checkpoint and write the
    per-step local/remote positions; reports the best-reward episode."""
    agent, model, meta = load_agent(checkpoint_path)
    sim_kwargs = meta.get("extra", {}).get("sim", {})
    sim_cfg = SimConfig(**sim_kwargs) if sim_kwargs else SimConfig()
    delays = DelayConfig(**meta["delays"]).steps(sim_cfg.dt)
    variant = meta["variant"]
    evals = evaluate_policy(agent, variant, sim_cfg, delays, eval_seed,
                            episodes, model=model)
    if out_path is None:
        out_path = Path(checkpoint_path).with_suffix(".trajectories.csv")
    with open(out_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(("episode", "step", "local_x", "local_y", "local_z",
                         "remote_x", "remote_y", "remote_z", "error", "kp", "kd"))
        for ep in evals:
            for s in ep["steps"]:
                writer.writerow((ep["episode"], s["step"],
                                 *(f"{v:.10f}" for v in s["local"]),
                                 *(f"{v:.10f}" for v in s["remote"]),
                                 f"{s['error']:.10f}", f"{s['kp']:.6f}",
                                 f"{s['kd']:.6f}"))
    best = max(evals, key=lambda ep: ep["mean_reward"])
    report = {
        "episodes": episodes,
        "best_episode": best["episode"],
        "best_mean_reward": best["mean_reward"],
        "mean_reward_overall": float(np.mean([e["mean_reward"] for e in evals])),
        "trajectory_csv": str(out_path),
        "variant": variant,
    }
    return report


def export_prediction_trace(checkpoint_path, out_path, episodes: int = 3,
                            eval_seed: int = 4_242) -> Path:
    """Run evaluation episodes for a predictive checkpoint, pairing every
    horizon prediction with the observation that later confirms it, and write
    the step/predicted/observed/delta CSV."""
    from .controllers import PredictiveVariantController
    from .envloop import TeleopPlant
    from .predictor import PredictionCounter, PredictionTrace
    from .train import _episode_seed, _obs_line_seed

    agent, model, meta = load_agent(checkpoint_path)
    variant = meta["variant"]
    if variant not in ("PMDC", "ABSP"):
        raise ConfigError(f"prediction traces require a predictive checkpoint, "
                          f"got variant {variant!r}")
    sim_kwargs = meta.get("extra", {}).get("sim", {})
    sim_cfg = SimConfig(**sim_kwargs) if sim_kwargs else SimConfig()
    delays = DelayConfig(**meta["delays"]).steps(sim_cfg.dt)
    # Episodes restart their step clocks, so each gets its own trace; merged
    # rows use an offset larger than any within-episode step index.
    stride = sim_cfg.episode_length + delays.action + delays.obs_max + 2
    merged: list[list] = []
    for ep in range(episodes):
        trace = PredictionTrace()
        controller = PredictiveVariantController(
            agent, model, delays, sim_cfg,
            lambda x: agent.select_action(x, explore=False),
            PredictionCounter(),
            method="sbsp" if variant == "PMDC" else "absp", trace=trace)
        plant = TeleopPlant(sim_cfg, delays, _episode_seed(eval_seed, ep),
                            obs_line_seed=_obs_line_seed(delays.seed, eval_seed, ep))
        for _ in range(sim_cfg.episode_length):
            frames = plant.deliver()
            decision = controller.decide(frames, plant.wall)
            plant.push_command(decision.force)
            plant.advance()
        for row in trace.rows():
            merged.append([row[0] + ep * stride] + row[1:])
    out_path = Path(out_path)
    import csv as _csv

    with open(out_path, "w", newline="") as fh:
        writer = _csv.writer(fh)
        writer.writerow(PredictionTrace.COLUMNS)
        for row in merged:
            writer.writerow([row[0]] + [f"{v:.10f}" for v in row[1:]])
    return out_path


def recompute_summary_from_logs(out: Path) -> dict:
    """Independent recomputation of the campaign summary from the raw CSVs."""
    results: dict[str, dict[str, list[float]]] = {}
    for path in sorted(out.glob("train_log_*.csv")):
        with open(path, newline="") as fh:
            rows = list(csv.DictReader(fh))
        if not rows:
            continue
        variant = rows[-1]["variant"]
        seed = rows[-1]["seed"]
        results.setdefault(variant, {})[seed] = [float(r["mean_reward"]) for r in rows]
    summary: dict = {}
    for variant, seeds in results.items():
        finals = np.array([rewards[-1] for rewards in seeds.values()])
        summary[variant] = {
            "final_mean": float(finals.mean()),
            "final_std": float(finals.std()),
            "final_median": float(np.median(finals)),
        }
    return summary
