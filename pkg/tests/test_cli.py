import csv
import json

import pytest

from telesync.cli import main
from telesync.harness import export_prediction_trace


@pytest.fixture
def tiny_config(tmp_path):
    cfg = {
        "variants": ["PMDC"],
        "seeds": [0],
        "total_env_steps": 200,
        "out_dir": str(tmp_path / "runs"),
        "delays": {"action_delay_ms": 30, "obs_delay_min_ms": 10,
                   "obs_delay_max_ms": 30, "delay_seed": 2},
        "sac": {"hidden": [16, 16], "batch_size": 32, "start_steps": 64,
                "update_after": 64, "replay_capacity": 2000},
        "model": {"ensemble": {"members": 2, "hidden": [16, 16]},
                  "batch_size": 32, "updates_per_episode": 1,
                  "replay_capacity": 2000},
    }
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg))
    return path, tmp_path / "runs"


def test_train_command_writes_outputs(tiny_config, capsys):
    path, out = tiny_config
    assert main(["train", "--config", str(path)]) == 0
    assert (out / "summary.json").exists()
    assert len(list(out.glob("train_log_*.csv"))) == 1
    summary = json.loads(capsys.readouterr().out)
    assert "PMDC" in summary["variants"]


def test_eval_command_with_trace(tiny_config, tmp_path, capsys):
    path, out = tiny_config
    main(["train", "--config", str(path)])
    capsys.readouterr()  # drain the train summary
    ckpt = next(out.glob("checkpoint_*.tsck"))
    trace_path = tmp_path / "trace.csv"
    assert main(["eval", "--checkpoint", str(ckpt), "--episodes", "2",
                 "--trace", str(trace_path)]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["episodes"] == 2
    with open(trace_path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert rows, "trace should contain matched prediction/observation pairs"
    first = rows[0]
    # delta columns are predicted - observed
    assert float(first["delta_pos_x"]) == pytest.approx(
        float(first["predicted_pos_x"]) - float(first["observed_pos_x"]), abs=1e-9)
    steps = [int(r["step"]) for r in rows]
    assert steps == sorted(steps)


def test_train_cli_overrides(tiny_config):
    path, out = tiny_config
    assert main(["train", "--config", str(path), "--variant", "SAC",
                 "--seed", "3", "--steps", "150"]) == 0
    logs = list(out.glob("train_log_sac_seed3.csv"))
    assert len(logs) == 1


def test_config_error_exit_code(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"delays": {"action_delay_ms": 85}}))
    assert main(["train", "--config", str(bad)]) == 2


def test_trace_rejects_model_free_checkpoint(tiny_config, tmp_path):
    path, out = tiny_config
    main(["train", "--config", str(path), "--variant", "SAC", "--steps", "150"])
    ckpt = next(out.glob("checkpoint_sac_seed0.tsck"))
    from telesync.harness import ConfigError
    with pytest.raises(ConfigError):
        export_prediction_trace(ckpt, tmp_path / "t.csv")
