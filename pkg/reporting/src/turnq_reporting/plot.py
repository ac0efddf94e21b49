"""Figures from training and evaluation CSVs.

The input contracts are exactly the two CSV schemas the solver emits:

    train.csv: episode,slot,samples,visited_states,max_dq,root_value,ms
    eval.csv:  opponent,perspective,games,mean,min,root_q,converged

One panel is drawn per perspective.  The reference line is the trained
root value over episodes when the panel's perspective matches its sign
(the final eval root_q equals the final trained root value), otherwise a
horizontal line at the eval root_q; either way every plotted y-value is
taken verbatim from a CSV row.  Evaluation payoffs are scattered at the
final episode, with the worst opponent highlighted.  Styling is fixed so
re-rendering identical inputs is byte-identical.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

TRAIN_COLUMNS = ["episode", "slot", "samples", "visited_states", "max_dq", "root_value", "ms"]
EVAL_COLUMNS = ["opponent", "perspective", "games", "mean", "min", "root_q", "converged"]

LINE_COLORS = ("tab:orange", "tab:green", "tab:red", "tab:blue")
SCATTER_COLOR = "tab:purple"
SVG_HASHSALT = "turnq-reporting"


class SchemaError(ValueError):
    """A CSV is missing or misnames a documented column."""


@dataclass
class EvalPoint:
    opponent: str
    perspective: str
    mean: float
    min: float
    root_q: float
    converged: bool


@dataclass
class RunData:
    label: str
    episodes: list[int]
    root_values: list[float]
    eval_points: list[EvalPoint] = field(default_factory=list)

    def points_for(self, perspective: str) -> list[EvalPoint]:
        return [p for p in self.eval_points if p.perspective == perspective]


@dataclass
class FigureSpec:
    train_csvs: list[str]
    eval_csvs: list[str]
    out: str
    image_format: str = "png"  # "png" | "svg"
    labels: list[str] = field(default_factory=list)
    perspectives: list[str] = field(default_factory=list)

    def __post_init__(self):
        if self.image_format not in ("png", "svg"):
            raise ValueError(f"unsupported format {self.image_format!r}")
        if len(self.eval_csvs) not in (0, len(self.train_csvs)):
            raise ValueError("need one eval csv per train csv (or none at all)")
        if self.labels and len(self.labels) != len(self.train_csvs):
            raise ValueError("need one label per train csv")


def _check_header(fieldnames, expected, path) -> None:
    if fieldnames is None or list(fieldnames) != expected:
        missing = set(expected) - set(fieldnames or [])
        raise SchemaError(
            f"{path}: expected columns {expected}, got {list(fieldnames or [])}"
            + (f" (missing {sorted(missing)})" if missing else "")
        )


def read_train_csv(path) -> tuple[list[int], list[float]]:
    episodes, root_values = [], []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        _check_header(reader.fieldnames, TRAIN_COLUMNS, path)
        for row in reader:
            episodes.append(int(row["episode"]))
            root_values.append(float(row["root_value"]))
    if not episodes:
        raise SchemaError(f"{path}: no episode rows")
    return episodes, root_values


def read_eval_csv(path) -> list[EvalPoint]:
    points = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        _check_header(reader.fieldnames, EVAL_COLUMNS, path)
        for row in reader:
            points.append(
                EvalPoint(
                    opponent=row["opponent"],
                    perspective=row["perspective"],
                    mean=float(row["mean"]),
                    min=float(row["min"]),
                    root_q=float(row["root_q"]),
                    converged=row["converged"] == "1",
                )
            )
    return points


def load_runs(spec: FigureSpec) -> list[RunData]:
    runs = []
    for i, train_path in enumerate(spec.train_csvs):
        episodes, root_values = read_train_csv(train_path)
        label = spec.labels[i] if spec.labels else f"run{i + 1}"
        points = read_eval_csv(spec.eval_csvs[i]) if spec.eval_csvs else []
        runs.append(RunData(label, episodes, root_values, points))
    return runs


def build_figure(spec: FigureSpec):
    """Assemble the figure; returns (figure, panels) without saving.

    `panels` maps perspective -> axes, so tests can inspect exactly what
    was drawn.
    """
    runs = load_runs(spec)
    perspectives = spec.perspectives or sorted(
        {p.perspective for run in runs for p in run.eval_points}
    ) or ["P1"]

    fig, axes = plt.subplots(
        len(perspectives), 1, figsize=(7.0, 3.2 * len(perspectives)), dpi=100, squeeze=False
    )
    panels = {}
    for row, perspective in enumerate(perspectives):
        ax = axes[row][0]
        panels[perspective] = ax
        for i, run in enumerate(runs):
            color = LINE_COLORS[i % len(LINE_COLORS)]
            points = run.points_for(perspective)
            final_root = run.root_values[-1]
            if points and points[0].root_q != final_root:
                # perspective opposite to the trained root sign: the curve
                # would need negating, so draw the eval's own reference level
                ax.plot(
                    [run.episodes[0], run.episodes[-1]],
                    [points[0].root_q, points[0].root_q],
                    color=color,
                    linewidth=1.6,
                    label=f"{run.label} root_q",
                )
            else:
                ax.plot(
                    run.episodes,
                    run.root_values,
                    color=color,
                    linewidth=1.6,
                    label=f"{run.label} root_q",
                )
            if points:
                xs = [run.episodes[-1]] * len(points)
                ys = [p.min for p in points]
                ax.scatter(
                    xs, ys, color=SCATTER_COLOR, s=26, zorder=3,
                    label=f"{run.label} opponents",
                )
                worst = min(ys)
                ax.scatter(
                    [run.episodes[-1]], [worst],
                    facecolors="none", edgecolors="black", s=110, zorder=4,
                    label=f"{run.label} worst opponent",
                )
        ax.set_ylabel(f"{perspective} signed payoff")
        ax.legend(loc="best", fontsize=7)
        ax.grid(True, alpha=0.3)
    axes[-1][0].set_xlabel("training episode")
    fig.tight_layout()
    return fig, panels


def plot_run(spec: FigureSpec) -> str:
    """Render the figure to spec.out; returns the output path."""
    fig, _ = build_figure(spec)
    out = Path(spec.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    if spec.image_format == "svg":
        with plt.rc_context({"svg.hashsalt": SVG_HASHSALT}):
            fig.savefig(out, format="svg", metadata={"Date": None})
    else:
        fig.savefig(out, format="png")
    plt.close(fig)
    return str(out)
