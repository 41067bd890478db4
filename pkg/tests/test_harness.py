import csv
import json
from pathlib import Path

import numpy as np
import pytest

from telesync.harness import (ConfigError, DelayConfig, ExperimentConfig,
                              bench_prediction_methods, config_from_dict,
                              dump_trajectories, load_config,
                              recompute_summary_from_logs, run_campaign)
from telesync.nn.ensemble import EnsembleConfig
from telesync.rl.sac import SacConfig
from telesync.sim import SimConfig
from telesync.train import ModelTrainConfig


def tiny_cfg(out_dir, **kw):
    defaults = dict(
        sim=SimConfig(),
        delays=DelayConfig(),
        variants=("SAC",),
        seeds=(0,),
        total_env_steps=300,
        out_dir=str(out_dir),
        sac=SacConfig(hidden=(16, 16), batch_size=32, start_steps=100,
                      update_after=100, replay_capacity=5000),
        model=ModelTrainConfig(ensemble=EnsembleConfig(members=2, hidden=(16, 16)),
                               batch_size=32, updates_per_episode=1,
                               replay_capacity=5000),
    )
    defaults.update(kw)
    return ExperimentConfig(**defaults)


class TestDelayConfig:
    def test_valid_quantization(self):
        steps = DelayConfig(80, 10, 50, 3).steps(0.01)
        assert (steps.action, steps.obs_min, steps.obs_max) == (8, 1, 5)

    def test_non_multiple_rejected(self):
        with pytest.raises(ConfigError):
            DelayConfig(85, 0, 0).steps(0.01)

    def test_negative_rejected(self):
        with pytest.raises(ConfigError):
            DelayConfig(-10, 0, 0).steps(0.01)

    def test_inverted_range_rejected(self):
        with pytest.raises(ConfigError):
            DelayConfig(0, 50, 10).steps(0.01)


class TestExperimentConfig:
    def test_empty_variants_rejected(self, tmp_path):
        with pytest.raises(ConfigError):
            tiny_cfg(tmp_path, variants=())

    def test_unknown_variant_rejected(self, tmp_path):
        with pytest.raises(ConfigError):
            tiny_cfg(tmp_path, variants=("DDPG",))

    def test_empty_seeds_rejected(self, tmp_path):
        with pytest.raises(ConfigError):
            tiny_cfg(tmp_path, seeds=())

    def test_unknown_keys_rejected(self):
        with pytest.raises(ConfigError):
            config_from_dict({"nonsense": 1})

    def test_invalid_delay_rejected_at_build(self, tmp_path):
        with pytest.raises(ConfigError):
            tiny_cfg(tmp_path, delays=DelayConfig(85, 0, 0))

    def test_yaml_and_json_loading(self, tmp_path):
        data = {"variants": ["SAC"], "seeds": [3], "total_env_steps": 500,
                "delays": {"action_delay_ms": 80, "obs_delay_min_ms": 10,
                           "obs_delay_max_ms": 50, "delay_seed": 1},
                "sac": {"hidden": [32, 32]}}
        jpath = tmp_path / "c.json"
        jpath.write_text(json.dumps(data))
        cfg_j = load_config(jpath)
        ypath = tmp_path / "c.yaml"
        import yaml
        ypath.write_text(yaml.safe_dump(data))
        cfg_y = load_config(ypath)
        assert cfg_j == cfg_y
        assert cfg_j.sac.hidden == (32, 32)

    def test_out_dir_env_override(self, tmp_path, monkeypatch):
        monkeypatch.setenv("TELESYNC_OUT", str(tmp_path / "redirected"))
        cfg = tiny_cfg(tmp_path / "ignored")
        assert cfg.resolved_out_dir() == tmp_path / "redirected"


class TestCampaign:
    def test_smoke_run_outputs(self, tmp_path):
        cfg = tiny_cfg(tmp_path)
        summary = run_campaign(cfg)
        logs = list(tmp_path.glob("train_log_*.csv"))
        ckpts = list(tmp_path.glob("checkpoint_*.tsck"))
        assert len(logs) == 1
        assert len(ckpts) == 1
        assert (tmp_path / "summary.json").exists()
        assert "SAC" in summary["variants"]

    def test_output_counts_for_grid(self, tmp_path):
        cfg = tiny_cfg(tmp_path, variants=("SAC", "PMDC"), seeds=(0, 1),
                       total_env_steps=150)
        run_campaign(cfg)
        assert len(list(tmp_path.glob("train_log_*.csv"))) == 4
        assert len(list(tmp_path.glob("checkpoint_*.tsck"))) == 4

    def test_reproducible_logs_excluding_wallclock(self, tmp_path):
        def run(sub):
            cfg = tiny_cfg(tmp_path / sub, total_env_steps=250)
            run_campaign(cfg)
            path = next((tmp_path / sub).glob("train_log_*.csv"))
            with open(path, newline="") as fh:
                rows = list(csv.DictReader(fh))
            for row in rows:
                row.pop("wallclock_ns")
            return rows

        assert run("a") == run("b")

    def test_summary_matches_log_recomputation(self, tmp_path):
        cfg = tiny_cfg(tmp_path, variants=("SAC",), seeds=(0, 1),
                       total_env_steps=200)
        summary = run_campaign(cfg)
        recomputed = recompute_summary_from_logs(Path(tmp_path))
        for variant, stats in recomputed.items():
            assert summary["variants"][variant]["final_mean"] == pytest.approx(
                stats["final_mean"])
            assert summary["variants"][variant]["final_median"] == pytest.approx(
                stats["final_median"])

    def test_log_columns_schema(self, tmp_path):
        cfg = tiny_cfg(tmp_path, total_env_steps=150)
        run_campaign(cfg)
        path = next(tmp_path.glob("train_log_*.csv"))
        with open(path, newline="") as fh:
            header = next(csv.reader(fh))
        assert header == ["episode", "env_step", "variant", "seed", "mean_reward",
                          "model_loss", "ensemble_variance", "wallclock_ns",
                          "ensemble_calls"]


class TestBench:
    def test_bench_smoke_call_counts(self, tmp_path):
        cfg = tiny_cfg(tmp_path, total_env_steps=200,
                       delays=DelayConfig(0, 0, 0, 0))
        rows = bench_prediction_methods(
            cfg, delay_settings=[DelayConfig(30, 0, 0, 0), DelayConfig(80, 0, 0, 0)])
        episodes = 200 // 50
        by_key = {(r["method"], r["action_delay_ms"]): r for r in rows}
        for ms, alpha in ((30, 3), (80, 8)):
            assert by_key[("PMDC", ms)]["ensemble_calls"] == episodes * (alpha + 50)
            assert by_key[("ABSP", ms)]["ensemble_calls"] == episodes * alpha * 50
            assert by_key[("SAC", ms)]["ensemble_calls"] == 0
            assert by_key[("A-SAC", ms)]["ensemble_calls"] == 0
        assert (tmp_path / "bench.csv").exists()

    def test_bench_requires_both_methods(self, tmp_path):
        cfg = tiny_cfg(tmp_path, total_env_steps=100)
        with pytest.raises(ConfigError):
            bench_prediction_methods(cfg, methods=("PMDC", "SAC"))


class TestTrajectories:
    def test_dump_counts_and_best(self, tmp_path):
        cfg = tiny_cfg(tmp_path, total_env_steps=200)
        run_campaign(cfg)
        ckpt = next(tmp_path.glob("checkpoint_*.tsck"))
        report = dump_trajectories(ckpt, episodes=4)
        csv_path = Path(report["trajectory_csv"])
        with open(csv_path, newline="") as fh:
            rows = list(csv.DictReader(fh))
        assert len(rows) == 4 * cfg.sim.episode_length
        assert {int(r["episode"]) for r in rows} == {0, 1, 2, 3}
        assert 0 <= report["best_episode"] < 4
        best_rows = [float(r["error"]) for r in rows
                     if int(r["episode"]) == report["best_episode"]]
        assert np.mean(best_rows) == pytest.approx(report["best_mean_reward"])
