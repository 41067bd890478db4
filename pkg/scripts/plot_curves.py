#!/usr/bin/env python3
"""Optional: render training curves and trajectory plots from campaign CSVs.

Not part of the acceptance surface; the CSV/JSON outputs are authoritative.

Usage:
    python scripts/plot_curves.py runs/delay_250_290ms --out curves.png
    python scripts/plot_curves.py --trajectory runs/.../checkpoint_x.trajectories.csv --out traj.png
"""

from __future__ import annotations

import argparse
import csv
from collections import defaultdict
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


def plot_curves(run_dir: Path, out: Path, window: int = 10) -> None:
    series = defaultdict(list)
    for log in sorted(run_dir.glob("train_log_*.csv")):
        with open(log, newline="") as fh:
            rows = list(csv.DictReader(fh))
        if not rows:
            continue
        variant = rows[0]["variant"]
        steps = [int(r["env_step"]) for r in rows]
        rewards = [float(r["mean_reward"]) for r in rows]
        series[variant].append((steps, rewards))

    fig, ax = plt.subplots(figsize=(7, 4.5))
    for variant, runs in sorted(series.items()):
        for steps, rewards in runs:
            smoothed = [sum(rewards[max(0, i - window):i + 1])
                        / len(rewards[max(0, i - window):i + 1])
                        for i in range(len(rewards))]
            ax.plot(steps, smoothed, alpha=0.8, label=variant)
    # one legend entry per variant
    handles, labels = ax.get_legend_handles_labels()
    seen: dict[str, object] = {}
    for h, l in zip(handles, labels):
        seen.setdefault(l, h)
    ax.legend(seen.values(), seen.keys())
    ax.set_xlabel("environment steps")
    ax.set_ylabel(f"mean episode reward (window {window})")
    ax.set_title(run_dir.name)
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(out, dpi=140)
    print(f"wrote {out}")


def plot_trajectory(csv_path: Path, out: Path, episode: int | None = None) -> None:
    with open(csv_path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    episodes = sorted({int(r["episode"]) for r in rows})
    pick = episodes[0] if episode is None else episode
    ep_rows = [r for r in rows if int(r["episode"]) == pick]
    fig, ax = plt.subplots(figsize=(5, 5))
    ax.plot([float(r["local_x"]) for r in ep_rows],
            [float(r["local_y"]) for r in ep_rows], label="local", lw=2)
    ax.plot([float(r["remote_x"]) for r in ep_rows],
            [float(r["remote_y"]) for r in ep_rows], label="remote", lw=2, ls="--")
    ax.set_aspect("equal")
    ax.set_xlabel("x (m)")
    ax.set_ylabel("y (m)")
    ax.set_title(f"episode {pick} plan view")
    ax.legend()
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(out, dpi=140)
    print(f"wrote {out}")


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("run_dir", nargs="?", help="campaign output directory")
    parser.add_argument("--trajectory", help="trajectory CSV from telesync eval")
    parser.add_argument("--episode", type=int, help="trajectory episode to plot")
    parser.add_argument("--out", default="plot.png")
    args = parser.parse_args()
    if args.trajectory:
        plot_trajectory(Path(args.trajectory), Path(args.out), args.episode)
    elif args.run_dir:
        plot_curves(Path(args.run_dir), Path(args.out))
    else:
        parser.error("give a run directory or --trajectory")


if __name__ == "__main__":
    main()
