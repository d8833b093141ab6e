"""Config files for the benchmark harness.

Flat key-value text with section headers (INI style). Keys follow the
symbols used throughout the library (t_end, z0, omega_B, M, K_gmres,
K_picard, dt ladders). Every command resolves its defaults into a
sidecar file that reproduces the run when fed back.
"""

import configparser
import shlex

import numpy as np

from ..driver import MethodConfig
from ..fields import (
    JET_PARAMS,
    JET_PASSING_V0,
    JET_PASSING_X0,
    JET_TRAPPED_V0,
    JET_TRAPPED_X0,
    MirrorField,
    MirrorParams,
    SolovevField,
    UniformField,
)


class ConfigError(ValueError):
    """Invalid or missing configuration; message names section and key."""


def load_config(path):
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    try:
        read = parser.read(path)
    except configparser.Error as exc:
        raise ConfigError("cannot parse %s: %s" % (path, exc)) from exc
    if not read:
        raise ConfigError("config file not found: %s" % path)
    return parser


class Section:
    """Typed access to one config section with precise error messages."""

    def __init__(self, parser, name):
        self.name = name
        # configparser lower-cases option names; match that on lookup so
        # keys like omega_B work regardless of spelling
        self._data = ({k.lower(): v for k, v in parser[name].items()}
                      if parser.has_section(name) else {})

    def get(self, key, default=None):
        return self._data.get(key.lower(), default)

    def _parse(self, key, default, conv, kind):
        raw = self._data.get(key.lower())
        if raw is None:
            if default is None:
                raise ConfigError("[%s] missing required key %r"
                                  % (self.name, key))
            return default
        try:
            return conv(raw)
        except (ValueError, TypeError) as exc:
            raise ConfigError("[%s] key %r: expected %s, got %r"
                              % (self.name, key, kind, raw)) from exc

    def real(self, key, default=None):
        return self._parse(key, default, float, "a real number")

    def integer(self, key, default=None):
        return self._parse(key, default, int, "an integer")

    def boolean(self, key, default=None):
        def conv(raw):
            low = raw.strip().lower()
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off"):
                return False
            raise ValueError(raw)

        return self._parse(key, default, conv, "a boolean")

    def text(self, key, default=None):
        return self._parse(key, default, str, "a string")

    def reals(self, key, default=None):
        def conv(raw):
            vals = [float(tok) for tok in raw.replace(",", " ").split()]
            if not vals:
                raise ValueError(raw)
            return vals

        return self._parse(key, default, conv, "a list of reals")

    def vec3(self, key, default=None):
        vals = self.reals(key, default)
        if len(vals) != 3:
            raise ConfigError("[%s] key %r: expected 3 components, got %d"
                              % (self.name, key, len(vals)))
        return np.asarray(vals, dtype=float)


def parse_method(spec):
    """Parse one method line, e.g. 'bgsdc M=5 K_gmres=2 K_picard=3'."""
    tokens = shlex.split(spec)
    if not tokens:
        raise ConfigError("empty method specification")
    name = tokens[0]
    kwargs = {}
    for tok in tokens[1:]:
        if "=" not in tok:
            raise ConfigError("method %r: expected key=value, got %r"
                              % (name, tok))
        key, val = tok.split("=", 1)
        if key not in ("M", "K_gmres", "K_picard", "K_sweeps"):
            raise ConfigError("method %r: unknown parameter %r" % (name, key))
        try:
            kwargs[key] = int(val)
        except ValueError as exc:
            raise ConfigError("method %r: parameter %r needs an integer, "
                              "got %r" % (name, key, val)) from exc
    try:
        return MethodConfig(method=name, **kwargs)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def format_method(cfg):
    """Inverse of parse_method for the resolved-config sidecar."""
    if cfg.method == "bgsdc":
        return "bgsdc M=%d K_gmres=%d K_picard=%d" % (cfg.M, cfg.K_gmres,
                                                      cfg.K_picard)
    if cfg.method == "boris-sdc":
        return "boris-sdc M=%d K_sweeps=%d" % (cfg.M, cfg.K_sweeps)
    return cfg.method


def methods_from(parser, defaults):
    """Method list from the [methods] section (keys sorted for
    determinism), or the command's defaults."""
    if not parser.has_section("methods") or not parser["methods"]:
        return [parse_method(s) for s in defaults]
    items = sorted(parser["methods"].items())
    return [parse_method(v) for _, v in items]


def field_from(parser, defaults):
    """Build the field model from the [field] section.

    defaults supplies the command's field type and parameters; keys
    present in the file override them. Returns (field, alpha, resolved)
    where resolved maps keys back for the sidecar.
    """
    sec = Section(parser, "field")
    ftype = sec.text("type", defaults.get("type"))
    if ftype == "uniform":
        B = sec.vec3("B", defaults.get("B"))
        alpha = sec.real("alpha", defaults.get("alpha", 1.0))
        resolved = {"type": "uniform",
                    "B": "%.17g %.17g %.17g" % tuple(B),
                    "alpha": "%.17g" % alpha}
        return UniformField(B), alpha, resolved
    if ftype == "mirror":
        omega_B = sec.real("omega_B", defaults.get("omega_B"))
        z0 = sec.real("z0", defaults.get("z0"))
        alpha = sec.real("alpha", defaults.get("alpha", 1.0))
        field = MirrorField(MirrorParams.from_frequencies(omega_B, alpha, z0))
        resolved = {"type": "mirror", "omega_B": "%.17g" % omega_B,
                    "z0": "%.17g" % z0, "alpha": "%.17g" % alpha}
        return field, alpha, resolved
    if ftype == "solovev":
        alpha = sec.real("alpha", defaults.get("alpha", JET_PARAMS.alpha))
        resolved = {"type": "solovev", "alpha": "%.17g" % alpha}
        return SolovevField(), alpha, resolved
    raise ConfigError("[field] unknown type %r" % ftype)


PARTICLES = {
    "passing": (JET_PASSING_X0, JET_PASSING_V0),
    "trapped": (JET_TRAPPED_X0, JET_TRAPPED_V0),
}


def write_resolved(path, sections):
    """Write the effective configuration; feeding it back reproduces
    the run."""
    out = configparser.ConfigParser()
    for name, kv in sections.items():
        out[name] = {k: str(v) for k, v in kv.items()}
    with open(path, "w") as fh:
        out.write(fh)
