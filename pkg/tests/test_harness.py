import configparser
import csv

import numpy as np
import pytest

from bgsdc.harness.cli import main
from bgsdc.harness.config import (
    ConfigError,
    Section,
    field_from,
    format_method,
    load_config,
    methods_from,
    parse_method,
    write_resolved,
)


def _read_csv(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


class TestLoadConfig:
    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError):
            load_config(tmp_path / "nope.cfg")

    def test_inline_comments(self, tmp_path):
        p = tmp_path / "a.cfg"
        p.write_text("[run]\nt_end = 2.0 ; seconds\n")
        cfg = load_config(p)
        assert Section(cfg, "run").real("t_end") == 2.0

    def test_malformed(self, tmp_path):
        p = tmp_path / "bad.cfg"
        p.write_text("t_end = 2.0\n")  # key before any section header
        with pytest.raises(ConfigError):
            load_config(p)


class TestSection:
    def _section(self, text):
        cfg = configparser.ConfigParser()
        cfg.read_string(text)
        return Section(cfg, "s")

    def test_typed_getters(self):
        s = self._section("[s]\na = 2.5\nb = 7\nc = yes\nd = hi\n"
                          "e = 1.0 2.0 3.0\n")
        assert s.real("a") == 2.5
        assert s.integer("b") == 7
        assert s.boolean("c") is True
        assert s.text("d") == "hi"
        np.testing.assert_array_equal(s.vec3("e"), [1.0, 2.0, 3.0])

    def test_defaults_and_missing(self):
        s = self._section("[s]\n")
        assert s.real("x", 1.5) == 1.5
        with pytest.raises(ConfigError, match=r"\[s\].*'x'"):
            s.real("x")

    def test_type_errors_name_key(self):
        s = self._section("[s]\na = pears\n")
        with pytest.raises(ConfigError, match="'a'"):
            s.real("a")
        with pytest.raises(ConfigError, match="'a'"):
            s.integer("a")
        with pytest.raises(ConfigError, match="'a'"):
            s.boolean("a")

    def test_vec3_length(self):
        s = self._section("[s]\na = 1 2\n")
        with pytest.raises(ConfigError, match="3 components"):
            s.vec3("a")

    def test_missing_section_acts_empty(self):
        cfg = configparser.ConfigParser()
        assert Section(cfg, "nope").real("x", 3.0) == 3.0


class TestMethodSpecs:
    @pytest.mark.parametrize("spec", [
        "nonstaggered-boris",
        "staggered-boris",
        "bgsdc M=5 K_gmres=2 K_picard=3",
        "boris-sdc M=3 K_sweeps=2",
    ])
    def test_roundtrip(self, spec):
        assert format_method(parse_method(spec)) == spec

    def test_parse_values(self):
        cfg = parse_method("bgsdc M=3 K_gmres=1 K_picard=4")
        assert (cfg.M, cfg.K_gmres, cfg.K_picard) == (3, 1, 4)

    @pytest.mark.parametrize("bad", [
        "", "rk4", "bgsdc M=x", "bgsdc M", "bgsdc order=3",
        "boris-sdc M=3 K_sweeps=0",
    ])
    def test_rejects_bad_specs(self, bad):
        with pytest.raises(ConfigError):
            parse_method(bad)

    def test_methods_from_sorted_section(self):
        cfg = configparser.ConfigParser()
        cfg.read_string("[methods]\nm2 = staggered-boris\n"
                        "m1 = nonstaggered-boris\n")
        methods = methods_from(cfg, ["bgsdc M=3 K_gmres=1 K_picard=1"])
        assert [m.method for m in methods] == ["nonstaggered-boris",
                                               "staggered-boris"]

    def test_methods_from_defaults(self):
        cfg = configparser.ConfigParser()
        methods = methods_from(cfg, ["staggered-boris"])
        assert [m.method for m in methods] == ["staggered-boris"]


class TestFieldFrom:
    def test_uniform_default(self):
        cfg = configparser.ConfigParser()
        field, alpha, resolved = field_from(
            cfg, {"type": "uniform", "B": np.array([0.0, 0.0, 2.0]),
                  "alpha": 1.5})
        np.testing.assert_array_equal(field.B_at(np.zeros(3)), [0, 0, 2.0])
        assert alpha == 1.5
        assert resolved["type"] == "uniform"

    def test_mirror_override(self):
        cfg = configparser.ConfigParser()
        cfg.read_string("[field]\ntype = mirror\nomega_B = 100\nz0 = 4\n")
        field, alpha, resolved = field_from(cfg, {"type": "uniform"})
        assert field.params.B0 == 100.0
        assert resolved["z0"] == "4"

    def test_unknown_type(self):
        cfg = configparser.ConfigParser()
        cfg.read_string("[field]\ntype = dipole\n")
        with pytest.raises(ConfigError):
            field_from(cfg, {"type": "uniform"})


class TestWriteResolved:
    def test_roundtrips_through_parser(self, tmp_path):
        path = tmp_path / "resolved.cfg"
        write_resolved(path, {"run": {"t_end": "2.5"},
                              "methods": {"method1": "staggered-boris"}})
        cfg = load_config(path)
        assert Section(cfg, "run").real("t_end") == 2.5


GYRO_QUICK = """\
[run]
t_end = 6.283185307179586
n_steps_ladder = 16 32

[methods]
m1 = nonstaggered-boris
"""


class TestCli:
    def test_unknown_command_exits(self):
        with pytest.raises(SystemExit):
            main(["frobnicate"])

    def test_missing_config_is_exit_2(self, tmp_path, capsys):
        rc = main(["gyro-validate", "--config", str(tmp_path / "no.cfg"),
                   "--out", str(tmp_path)])
        assert rc == 2
        assert "configuration error" in capsys.readouterr().err

    def test_gyro_quick_run(self, tmp_path, capsys):
        cfg = tmp_path / "gyro.cfg"
        cfg.write_text(GYRO_QUICK)
        rc = main(["gyro-validate", "--config", str(cfg), "--out",
                   str(tmp_path)])
        assert rc == 0
        out = capsys.readouterr().out.strip()
        rows = _read_csv(out)
        assert [r["method"] for r in rows] == ["nonstaggered-boris"] * 2
        assert {r["n_steps"] for r in rows} == {"16", "32"}
        # second-order error drop between the two resolutions
        p = float(rows[0]["order_p"])
        assert abs(p - 2.0) < 0.3
        assert (tmp_path / "gyro-validate.resolved.cfg").exists()

    def test_sidecar_reproduces_run(self, tmp_path):
        cfg = tmp_path / "gyro.cfg"
        cfg.write_text(GYRO_QUICK)
        out1 = tmp_path / "first"
        out2 = tmp_path / "second"
        assert main(["gyro-validate", "--config", str(cfg), "--out",
                     str(out1)]) == 0
        sidecar = out1 / "gyro-validate.resolved.cfg"
        assert main(["gyro-validate", "--config", str(sidecar), "--out",
                     str(out2)]) == 0
        assert (out1 / "gyro-validate.csv").read_text() \
            == (out2 / "gyro-validate.csv").read_text()

    def test_work_table_defaults(self, tmp_path, capsys):
        rc = main(["work-table", "--out", str(tmp_path)])
        assert rc == 0
        rows = _read_csv(capsys.readouterr().out.strip())
        by_method = {r["method"]: r for r in rows}
        row = by_method["bgsdc M=5 K_gmres=2 K_picard=6"]
        assert row["predicted_serial"] == "37"
        assert row["measured_f_evals"] == "37"

    def test_csv_floats_are_full_precision(self, tmp_path, capsys):
        cfg = tmp_path / "gyro.cfg"
        cfg.write_text(GYRO_QUICK)
        main(["gyro-validate", "--config", str(cfg), "--out", str(tmp_path)])
        rows = _read_csv(capsys.readouterr().out.strip())
        dt = float(rows[0]["dt"])
        assert rows[0]["dt"] == "%.17g" % dt
