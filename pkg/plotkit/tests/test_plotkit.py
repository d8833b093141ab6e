import csv

import numpy as np
import pytest

from plotkit import (
    EmptyDataError,
    MissingColumnError,
    PlotSpec,
    fit_linear_slope,
    fit_loglog_slope,
    load_table,
    plot_convergence,
    plot_energy,
    plot_trajectory3d,
    plot_work_precision,
    render,
)
from plotkit.cli import main


def write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)
    return str(path)


@pytest.fixture
def slope2_csv(tmp_path):
    """Synthetic convergence data with exact slope 2."""
    dts = [0.4, 0.2, 0.1, 0.05]
    rows = [["demo", dt, 3.0 * dt**2] for dt in dts]
    return write_csv(tmp_path / "slope2.csv", ["method", "dt", "error"],
                     rows)


@pytest.fixture
def energy_csv(tmp_path):
    rows = []
    for m, err in (("3", 1e-6), ("5", 1e-9)):
        for i in range(10):
            rows.append(["bgsdc", m, i, i * 0.1, err])
    return write_csv(tmp_path / "energy.csv",
                     ["method", "M", "step_index", "t", "rel_energy_error"],
                     rows)


class TestLoadTable:
    def test_reads_rows(self, slope2_csv):
        table = load_table(slope2_csv)
        assert table.columns == ["method", "dt", "error"]
        assert len(table.rows) == 4

    def test_empty_file_rejected(self, tmp_path):
        p = tmp_path / "empty.csv"
        p.write_text("method,dt,error\n")
        with pytest.raises(EmptyDataError):
            load_table(p)

    def test_missing_column_named(self, slope2_csv):
        table = load_table(slope2_csv)
        with pytest.raises(MissingColumnError, match="banana"):
            table.require("banana")


class TestSlopeFits:
    def test_loglog_exact(self):
        dts = np.array([0.4, 0.2, 0.1])
        assert abs(fit_loglog_slope(dts, 5 * dts**4) - 4.0) < 1e-12

    def test_loglog_ignores_nonpositive(self):
        assert abs(fit_loglog_slope([0.4, 0.2, 0.1], [0.16, 0.04, 0.0])
                   - 2.0) < 1e-12

    def test_linear_constant_is_zero(self):
        assert abs(fit_linear_slope([0.0, 1.0, 2.0], [3.0, 3.0, 3.0])) < 1e-12

    def test_linear_drift_positive(self):
        assert fit_linear_slope([0.0, 1.0, 2.0], [0.0, 0.5, 1.0]) > 0.0


class TestPlotSpec:
    def test_unknown_kind(self):
        with pytest.raises(ValueError):
            PlotSpec(csv_paths=["a.csv"], kind="piechart", out_path="x.svg")

    def test_single_path_promoted(self):
        spec = PlotSpec(csv_paths="a.csv", kind="energy", out_path="x.svg")
        assert spec.csv_paths == ["a.csv"]


class TestConvergencePlot:
    def test_slope_annotation_within_tolerance(self, slope2_csv, tmp_path):
        out = tmp_path / "conv.svg"
        result = plot_convergence(PlotSpec(csv_paths=[slope2_csv],
                                           kind="convergence",
                                           out_path=str(out)))
        assert out.exists()
        (slope,) = result.series_slopes.values()
        assert abs(slope - 2.00) <= 0.01

    def test_groups_one_series_per_method(self, tmp_path):
        rows = []
        for method, p in (("boris", 2), ("bgsdc", 4)):
            for dt in (0.4, 0.2, 0.1):
                rows.append([method, dt, dt**p])
        path = write_csv(tmp_path / "two.csv", ["method", "dt", "error"],
                         rows)
        result = plot_convergence(PlotSpec(csv_paths=[path],
                                           kind="convergence",
                                           out_path=str(tmp_path / "t.svg")))
        assert set(result.series_slopes) == {"boris", "bgsdc"}
        assert abs(result.series_slopes["bgsdc"] - 4.0) < 0.01

    def test_empty_csv_writes_nothing(self, tmp_path):
        p = tmp_path / "empty.csv"
        p.write_text("method,dt,error\n")
        out = tmp_path / "nothing.svg"
        with pytest.raises(EmptyDataError):
            plot_convergence(PlotSpec(csv_paths=[str(p)], kind="convergence",
                                      out_path=str(out)))
        assert not out.exists()

    def test_missing_columns_reported(self, tmp_path):
        p = write_csv(tmp_path / "odd.csv", ["method", "time", "loss"],
                      [["a", 1, 2]])
        with pytest.raises(MissingColumnError):
            plot_convergence(PlotSpec(csv_paths=[p], kind="convergence",
                                      out_path=str(tmp_path / "x.svg")))

    def test_deterministic_svg_output(self, slope2_csv, tmp_path):
        spec = dict(csv_paths=[slope2_csv], kind="convergence")
        a, b = tmp_path / "a.svg", tmp_path / "b.svg"
        plot_convergence(PlotSpec(out_path=str(a), **spec))
        plot_convergence(PlotSpec(out_path=str(b), **spec))
        assert a.read_bytes() == b.read_bytes()

    def test_png_output(self, slope2_csv, tmp_path):
        out = tmp_path / "conv.png"
        plot_convergence(PlotSpec(csv_paths=[slope2_csv], kind="convergence",
                                  out_path=str(out)))
        assert out.read_bytes()[:4] == b"\x89PNG"


class TestWorkPrecisionPlot:
    def test_renders_from_f_evals(self, tmp_path):
        rows = [["a", 100, 1e-2], ["a", 200, 1e-4], ["a", 400, 1e-6]]
        p = write_csv(tmp_path / "wp.csv", ["method", "f_evals", "error"],
                      rows)
        out = tmp_path / "wp.svg"
        result = plot_work_precision(PlotSpec(csv_paths=[p],
                                              kind="work-precision",
                                              out_path=str(out)))
        assert out.exists()
        assert "a" in result.series_slopes


class TestEnergyPlot:
    def test_constant_series_trend_zero(self, energy_csv, tmp_path):
        out = tmp_path / "energy.svg"
        result = plot_energy(PlotSpec(csv_paths=[energy_csv], kind="energy",
                                      out_path=str(out)))
        assert out.exists()
        for trend in result.series_slopes.values():
            assert abs(trend) < 1e-12

    def test_drifting_series_trend_positive(self, tmp_path):
        rows = [["b", "3", i, float(i), 1e-6 * i] for i in range(10)]
        p = write_csv(tmp_path / "drift.csv",
                      ["method", "M", "step_index", "t", "rel_energy_error"],
                      rows)
        result = plot_energy(PlotSpec(csv_paths=[p], kind="energy",
                                      out_path=str(tmp_path / "d.svg")))
        (trend,) = result.series_slopes.values()
        assert trend > 0.0

    def test_missing_error_column(self, tmp_path):
        p = write_csv(tmp_path / "bad.csv", ["method", "t"], [["a", 1.0]])
        with pytest.raises(MissingColumnError):
            plot_energy(PlotSpec(csv_paths=[p], kind="energy",
                                 out_path=str(tmp_path / "x.svg")))


class TestTrajectoryPlot:
    def test_two_point_segment(self, tmp_path):
        p = write_csv(tmp_path / "traj.csv", ["t", "x", "y", "z"],
                      [[0.0, 0, 0, 0], [1.0, 1, 1, 1]])
        out = tmp_path / "traj.svg"
        plot_trajectory3d(PlotSpec(csv_paths=[p], kind="trajectory3d",
                                   out_path=str(out)))
        assert out.exists()

    def test_single_point_rejected(self, tmp_path):
        p = write_csv(tmp_path / "one.csv", ["t", "x", "y", "z"],
                      [[0.0, 0, 0, 0]])
        with pytest.raises(EmptyDataError):
            plot_trajectory3d(PlotSpec(csv_paths=[p], kind="trajectory3d",
                                       out_path=str(tmp_path / "x.svg")))

    def test_missing_axis_column(self, tmp_path):
        p = write_csv(tmp_path / "flat.csv", ["t", "x", "y"],
                      [[0, 0, 0], [1, 1, 1]])
        with pytest.raises(MissingColumnError, match="z"):
            plot_trajectory3d(PlotSpec(csv_paths=[p], kind="trajectory3d",
                                       out_path=str(tmp_path / "x.svg")))


class TestRenderDispatch:
    def test_all_kinds_have_renderers(self):
        from plotkit.core import RENDERERS, PLOT_KINDS
        assert set(RENDERERS) == set(PLOT_KINDS)


class TestCli:
    def test_happy_path(self, slope2_csv, tmp_path, capsys):
        out = tmp_path / "cli.svg"
        rc = main(["convergence", "--csv", slope2_csv, "--out", str(out)])
        assert rc == 0
        assert str(out) in capsys.readouterr().out
        assert out.exists()

    def test_bad_csv_is_exit_2(self, tmp_path, capsys):
        p = tmp_path / "empty.csv"
        p.write_text("method,dt,error\n")
        rc = main(["convergence", "--csv", str(p), "--out",
                   str(tmp_path / "x.svg")])
        assert rc == 2
        assert "plotkit:" in capsys.readouterr().err

    def test_group_by_and_guides(self, slope2_csv, tmp_path):
        rc = main(["convergence", "--csv", slope2_csv, "--out",
                   str(tmp_path / "g.svg"), "--group-by", "method",
                   "--guides", "2"])
        assert rc == 0

    def test_invalid_guides(self, slope2_csv, tmp_path, capsys):
        rc = main(["convergence", "--csv", slope2_csv, "--out",
                   str(tmp_path / "g.svg"), "--guides", "two"])
        assert rc == 2

    def test_unknown_kind_rejected(self, slope2_csv, tmp_path):
        with pytest.raises(SystemExit):
            main(["piechart", "--csv", slope2_csv, "--out",
                  str(tmp_path / "x.svg")])
