"""Grouped win/tie/loss bar chart per difficulty level."""
from __future__ import annotations

import argparse

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .schema import load_eval  # noqa: E402


def plot_eval_table(eval_csv: str, out_image: str = "evaluation.png"):
    rows = load_eval(eval_csv)
    fig, ax = plt.subplots(figsize=(9, 4.5))
    x = np.arange(len(rows))
    width = 0.27
    for off, (attr, label) in enumerate(
            [("win_rate", "win"), ("tie_rate", "tie"), ("loss_rate", "loss")]):
        vals = [getattr(r, attr) for r in rows]
        bars = ax.bar(x + (off - 1) * width, vals, width, label=label)
        ax.bar_label(bars, fmt="%.2f", fontsize=7)
    ax.set_xticks(x, [f"L{r.level}" for r in rows])
    ax.set_xlabel("difficulty level")
    ax.set_ylabel("rate")
    ax.set_ylim(0, 1.1)
    ax.legend()
    fig.tight_layout()
    fig.savefig(out_image, dpi=120)
    return fig


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description="plot an evaluation bar chart")
    ap.add_argument("--csv", required=True)
    ap.add_argument("--out", default="evaluation.png")
    args = ap.parse_args(argv)
    plot_eval_table(args.csv, args.out)
    print(f"wrote {args.out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
