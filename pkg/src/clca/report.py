"""Optional report rendering for the CLI.

When a report directory is requested, training and evaluation write the
same numbers they print to stdout as CSV files, plus matplotlib figures
rendered to PNG next to them. Matplotlib is imported lazily with the Agg
backend so headless runs and the rest of the package never pay for it.
"""

from __future__ import annotations

import csv
import os


def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def write_train_report(report_dir: str, stats: list[tuple[int, float]]) -> list[str]:
    """Training curve as train_curve.csv and train_curve.png; returns the
    paths written."""
    os.makedirs(report_dir, exist_ok=True)
    csv_path = os.path.join(report_dir, "train_curve.csv")
    png_path = os.path.join(report_dir, "train_curve.png")

    with open(csv_path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["steps", "mean_reward"])
        writer.writerows(stats)

    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(7, 4))
    if stats:
        ax.plot([s for s, _ in stats], [r for _, r in stats], marker=".", linewidth=1)
    ax.set_xlabel("environment steps")
    ax.set_ylabel("mean episode reward")
    ax.set_title("Training progress")
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(png_path, dpi=120)
    plt.close(fig)
    return [csv_path, png_path]


def write_eval_report(report_dir: str, policy: dict, baseline: dict) -> list[str]:
    """Evaluation summary as eval_summary.csv and a grouped bar chart in
    eval_summary.png; returns the paths written."""
    os.makedirs(report_dir, exist_ok=True)
    csv_path = os.path.join(report_dir, "eval_summary.csv")
    png_path = os.path.join(report_dir, "eval_summary.png")

    metrics = ["mean_episode_reward", "mean_shaping_reward_per_step", "success_rate"]
    with open(csv_path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["metric", "policy", "random_baseline"])
        for m in metrics:
            writer.writerow([m, policy[m], baseline[m]])

    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(7, 4))
    x = range(len(metrics))
    width = 0.38
    ax.bar([i - width / 2 for i in x], [policy[m] for m in metrics], width, label="policy")
    ax.bar([i + width / 2 for i in x], [baseline[m] for m in metrics], width, label="random baseline")
    ax.set_xticks(list(x))
    ax.set_xticklabels([m.replace("_", "\n") for m in metrics], fontsize=8)
    ax.set_title("Evaluation summary")
    ax.legend()
    ax.grid(True, axis="y", alpha=0.3)
    fig.tight_layout()
    fig.savefig(png_path, dpi=120)
    plt.close(fig)
    return [csv_path, png_path]
