"""Figure rendering for the reduction scaling study."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .records import ExperimentRecord


def fit_linear(x: np.ndarray, y: np.ndarray) -> tuple[float, float, float]:
    """Least-squares y ~ a*x + b; returns (a, b, R^2)."""
    a, b = np.polyfit(x, y, 1)
    pred = a * x + b
    ss_res = float(np.sum((y - pred) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0 else 1.0 - ss_res / ss_tot
    return float(a), float(b), r2


def fit_proportional(x: np.ndarray, y: np.ndarray) -> tuple[float, float]:
    """Least-squares y ~ c*x through the origin; returns (c, R^2)."""
    c = float(np.dot(x, y) / np.dot(x, x))
    pred = c * x
    ss_res = float(np.sum((y - pred) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0 else 1.0 - ss_res / ss_tot
    return c, r2


def scaling_figure(records: list[ExperimentRecord], path: str | Path) -> Path:
    """Oracle calls vs budget for each reduction mode, with fitted trends."""
    path = Path(path)
    by_mode: dict[str, list[tuple[int, int]]] = {}
    for rec in records:
        if not rec.instance.startswith("scaling-B"):
            continue
        budget = int(rec.instance.removeprefix("scaling-B"))
        by_mode.setdefault(rec.mode, []).append((budget, rec.oracle_calls))

    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    markers = {"exact-log": "o", "naive-copies": "s"}
    for mode, pairs in sorted(by_mode.items()):
        pairs.sort()
        budgets = np.array([b for b, _ in pairs], dtype=float)
        calls = np.array([c for _, c in pairs], dtype=float)
        ax.plot(
            budgets,
            calls,
            marker=markers.get(mode, "^"),
            linestyle="none",
            label=mode,
        )
        grid = np.geomspace(budgets.min(), budgets.max(), 200)
        if mode == "naive-copies":
            c, r2 = fit_proportional(budgets, calls)
            ax.plot(grid, c * grid, "--", lw=1, label=f"{c:.2f}·B  (R²={r2:.3f})")
        else:
            a, b, r2 = fit_linear(np.log2(budgets), calls)
            ax.plot(
                grid,
                a * np.log2(grid) + b,
                "--",
                lw=1,
                label=f"{a:.2f}·log₂B+{b:.1f}  (R²={r2:.3f})",
            )
    ax.set_xscale("log", base=2)
    ax.set_yscale("log")
    ax.set_xlabel("budget B")
    ax.set_ylabel("oracle calls")
    ax.set_title("Reduction size: logarithmic vs unit-copies")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
