"""Figure rendering from benchmark CSV files.

Every plotted number originates from a CSV cell: this module fits and
draws but never recomputes any physics. Output is deterministic — the
same CSVs render byte-identical images (no embedded timestamps).
"""

import csv
from dataclasses import dataclass, field

import matplotlib
import numpy as np

matplotlib.use("Agg")
# fixed hash salt so SVG element ids (and hence output bytes) are stable
matplotlib.rcParams["svg.hashsalt"] = "plotkit"
import matplotlib.pyplot as plt  # noqa: E402
from mpl_toolkits.mplot3d.art3d import Line3DCollection  # noqa: E402

PLOT_KINDS = ("convergence", "work-precision", "energy", "trajectory3d")

# column aliases, in lookup order, for the harness CSV schemas
STEP_COLUMNS = ("dt", "dt_omega", "dt_ns")
ERROR_COLUMNS = ("error", "error_x", "d_max_m", "sigma_B")
DEFAULT_GROUP_COLUMNS = ("particle", "method", "M", "iterations",
                         "K_gmres", "K_picard")

# time-coloured trajectories fade from blue (start) to green (end)
TRAJECTORY_CMAP = matplotlib.colors.LinearSegmentedColormap.from_list(
    "blue_green", ["#1040c0", "#10a040"])


class MissingColumnError(KeyError):
    def __init__(self, column, path):
        super().__init__("column %r not found in %s" % (column, path))
        self.column = column


class EmptyDataError(ValueError):
    pass


@dataclass
class PlotSpec:
    """What to render: inputs, kind, grouping and output path."""

    csv_paths: list
    kind: str
    out_path: str
    group_by: list = None
    guides: tuple = (2, 4, 8)
    x_label: str = None
    y_label: str = None
    title: str = None

    def __post_init__(self):
        if isinstance(self.csv_paths, str):
            self.csv_paths = [self.csv_paths]
        if self.kind not in PLOT_KINDS:
            raise ValueError("unknown plot kind %r (expected one of %s)"
                             % (self.kind, ", ".join(PLOT_KINDS)))


@dataclass
class Table:
    """One loaded CSV: header plus string-valued rows."""

    path: str
    columns: list
    rows: list

    def require(self, column):
        if column not in self.columns:
            raise MissingColumnError(column, self.path)
        return column

    def first_of(self, candidates):
        for c in candidates:
            if c in self.columns:
                return c
        raise MissingColumnError(" or ".join(candidates), self.path)

    def floats(self, column, rows=None):
        rows = self.rows if rows is None else rows
        out = np.empty(len(rows))
        for i, r in enumerate(rows):
            cell = r[column]
            out[i] = float(cell) if cell not in ("", None) else np.nan
        return out


@dataclass
class RenderResult:
    """The written image plus the per-series fits the figure annotates."""

    out_path: str
    series_slopes: dict = field(default_factory=dict)


def load_table(path):
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise EmptyDataError("no header in %s" % path)
        rows = list(reader)
    if not rows:
        raise EmptyDataError("no data rows in %s" % path)
    return Table(path=str(path), columns=list(reader.fieldnames), rows=rows)


def fit_loglog_slope(xs, ys):
    """Least-squares slope of log y against log x."""
    xs = np.asarray(xs, float)
    ys = np.asarray(ys, float)
    keep = np.isfinite(xs) & np.isfinite(ys) & (xs > 0) & (ys > 0)
    if keep.sum() < 2:
        return float("nan")
    A = np.vstack([np.log(xs[keep]), np.ones(int(keep.sum()))]).T
    slope, _ = np.linalg.lstsq(A, np.log(ys[keep]), rcond=None)[0]
    return float(slope)


def fit_linear_slope(xs, ys):
    """Least-squares slope of y against x (used for drift trends)."""
    xs = np.asarray(xs, float)
    ys = np.asarray(ys, float)
    keep = np.isfinite(xs) & np.isfinite(ys)
    if keep.sum() < 2:
        return float("nan")
    A = np.vstack([xs[keep], np.ones(int(keep.sum()))]).T
    slope, _ = np.linalg.lstsq(A, ys[keep], rcond=None)[0]
    return float(slope)


def group_rows(table, group_by):
    """Rows partitioned by the values of the grouping columns, in order
    of first appearance."""
    if group_by is None:
        group_by = [c for c in DEFAULT_GROUP_COLUMNS if c in table.columns]
    else:
        group_by = [table.require(c) for c in group_by]
    groups = {}
    for row in table.rows:
        key = tuple(row[c] for c in group_by)
        groups.setdefault(key, []).append(row)
    labels = {key: ", ".join(v for v in key if v not in ("", None)) or
              "all rows" for key in groups}
    return groups, labels


def _save(fig, out_path):
    # Date metadata is dropped so repeated runs render identical bytes
    fig.savefig(out_path, metadata={"Date": None}
                if str(out_path).endswith(".svg") else None)
    plt.close(fig)


def _loglog_series_plot(spec, x_candidates, y_candidates, x_label, y_label,
                        draw_guides):
    fig, ax = plt.subplots(figsize=(6.4, 4.8), constrained_layout=True)
    slopes = {}
    x_span = [np.inf, 0.0]
    y_anchor = None
    for path in spec.csv_paths:
        table = load_table(path)
        x_col = table.first_of(x_candidates)
        y_col = table.first_of(y_candidates)
        groups, labels = group_rows(table, spec.group_by)
        for key, rows in groups.items():
            xs = table.floats(x_col, rows)
            ys = table.floats(y_col, rows)
            keep = np.isfinite(xs) & np.isfinite(ys) & (ys > 0)
            if not np.any(keep):
                continue
            xs, ys = xs[keep], ys[keep]
            order = np.argsort(xs)
            xs, ys = xs[order], ys[order]
            slope = fit_loglog_slope(xs, ys)
            slopes[labels[key]] = slope
            label = labels[key]
            if np.isfinite(slope):
                label += " (p = %.2f)" % slope
            ax.loglog(xs, ys, marker="o", label=label)
            x_span[0] = min(x_span[0], xs.min())
            x_span[1] = max(x_span[1], xs.max())
            if y_anchor is None:
                y_anchor = (xs[-1], ys[-1])
    if y_anchor is None:
        raise EmptyDataError("no plottable rows in %s"
                             % ", ".join(map(str, spec.csv_paths)))
    if draw_guides and spec.guides:
        gx = np.array([x_span[0], x_span[1]])
        for p in spec.guides:
            gy = y_anchor[1] * (gx / y_anchor[0]) ** p
            ax.loglog(gx, gy, linestyle=":", color="0.6", linewidth=1)
            ax.annotate("p = %g" % p, (gx[0], gy[0]), fontsize=8,
                        color="0.4")
    ax.set_xlabel(spec.x_label or x_label)
    ax.set_ylabel(spec.y_label or y_label)
    if spec.title:
        ax.set_title(spec.title)
    ax.grid(True, which="both", alpha=0.3)
    ax.legend(fontsize=8)
    _save(fig, spec.out_path)
    return RenderResult(out_path=spec.out_path, series_slopes=slopes)


def plot_convergence(spec):
    """Log-log error against step size with reference slope guides."""
    return _loglog_series_plot(spec, STEP_COLUMNS, ERROR_COLUMNS,
                               "step size", "error", draw_guides=True)


def plot_work_precision(spec):
    """Log-log error against the number of force evaluations."""
    return _loglog_series_plot(spec, ("f_evals",), ERROR_COLUMNS,
                               "force evaluations", "error",
                               draw_guides=False)


def plot_energy(spec):
    """Relative energy error over time, one panel per node count."""
    tables = [load_table(p) for p in spec.csv_paths]
    for t in tables:
        t.require("rel_energy_error")
        t.first_of(("t", "step_index"))
    panels = sorted({row.get("M", "") for t in tables for row in t.rows})
    fig, axes = plt.subplots(len(panels), 1, squeeze=False,
                             figsize=(6.4, 3.0 * len(panels)),
                             constrained_layout=True, sharex=True)
    slopes = {}
    for ax, panel in zip(axes[:, 0], panels):
        for table in tables:
            x_col = table.first_of(("t", "step_index"))
            rows = [r for r in table.rows if r.get("M", "") == panel]
            groups, labels = group_rows(
                Table(table.path, table.columns, rows), spec.group_by)
            for key, grows in groups.items():
                xs = table.floats(x_col, grows)
                ys = table.floats("rel_energy_error", grows)
                keep = np.isfinite(xs) & np.isfinite(ys)
                if not np.any(keep):
                    continue
                trend = fit_linear_slope(xs[keep], ys[keep])
                slopes[labels[key]] = trend
                ax.semilogy(xs[keep], np.maximum(ys[keep], 1e-300),
                            label="%s (trend %.2e)" % (labels[key], trend))
        ax.set_ylabel(spec.y_label or "relative energy error")
        ax.grid(True, which="both", alpha=0.3)
        ax.legend(fontsize=8)
        if panel:
            ax.set_title("M = %s" % panel, fontsize=9)
    axes[-1, 0].set_xlabel(spec.x_label or "time")
    if spec.title:
        fig.suptitle(spec.title)
    _save(fig, spec.out_path)
    return RenderResult(out_path=spec.out_path, series_slopes=slopes)


def plot_trajectory3d(spec):
    """3D polyline coloured by time from blue (start) to green (end)."""
    table = load_table(spec.csv_paths[0])
    for c in ("t", "x", "y", "z"):
        table.require(c)
    t = table.floats("t")
    pts = np.column_stack([table.floats(c) for c in ("x", "y", "z")])
    if len(pts) < 2:
        raise EmptyDataError("need at least two trajectory points")
    fig = plt.figure(figsize=(6.4, 5.6))
    ax = fig.add_subplot(projection="3d")
    segments = np.stack([pts[:-1], pts[1:]], axis=1)
    span = t[-1] - t[0] or 1.0
    colors = TRAJECTORY_CMAP((0.5 * (t[:-1] + t[1:]) - t[0]) / span)
    ax.add_collection(Line3DCollection(segments, colors=colors,
                                       linewidths=1.2))
    margin = 0.05 * (pts.max(axis=0) - pts.min(axis=0) + 1e-12)
    ax.set_xlim(pts[:, 0].min() - margin[0], pts[:, 0].max() + margin[0])
    ax.set_ylim(pts[:, 1].min() - margin[1], pts[:, 1].max() + margin[1])
    ax.set_zlim(pts[:, 2].min() - margin[2], pts[:, 2].max() + margin[2])
    ax.set_xlabel(spec.x_label or "x")
    ax.set_ylabel(spec.y_label or "y")
    ax.set_zlabel("z")
    if spec.title:
        ax.set_title(spec.title)
    _save(fig, spec.out_path)
    return RenderResult(out_path=spec.out_path)


RENDERERS = {
    "convergence": plot_convergence,
    "work-precision": plot_work_precision,
    "energy": plot_energy,
    "trajectory3d": plot_trajectory3d,
}


def render(spec):
    """Dispatch a PlotSpec to its renderer; returns a RenderResult."""
    return RENDERERS[spec.kind](spec)
