"""Learning-curve rendering with moving-average smoothing."""
from __future__ import annotations

import argparse

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .schema import Series, load_curves  # noqa: E402


def moving_average(values: list[float], window: int) -> list[float]:
    """Trailing mean over the last `window` values (plain sequential sums so
    the recompute oracle can match bit-for-bit); window 1 returns the input."""
    if window < 1:
        raise ValueError("window must be >= 1")
    out = []
    for i in range(len(values)):
        lo = max(0, i - window + 1)
        chunk = values[lo:i + 1]
        out.append(sum(chunk) / len(chunk))
    return out


def plot_curves(csv_paths: list[str], window: int = 5,
                out_image: str = "curves.png"):
    """One smoothed line per series; returns the figure for inspection."""
    all_series: list[Series] = []
    for path in csv_paths:
        all_series.extend(load_curves(path))
    fig, ax = plt.subplots(figsize=(7, 4.5))
    for s in all_series:
        ax.plot(s.iterations, moving_average(s.win_rates, window), label=s.label)
    ax.set_xlabel("iteration")
    ax.set_ylabel(f"win rate (moving avg, w={window})")
    ax.set_ylim(-0.02, 1.02)
    ax.legend()
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(out_image, dpi=120)
    return fig


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description="plot training win-rate curves")
    ap.add_argument("--csv", nargs="+", required=True)
    ap.add_argument("--out", default="curves.png")
    ap.add_argument("--window", type=int, default=5)
    args = ap.parse_args(argv)
    plot_curves(args.csv, args.window, args.out)
    print(f"wrote {args.out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
