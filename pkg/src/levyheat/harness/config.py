"""INI experiment configuration: parsing, schema validation and hashing.

Layout::

    [measure]
    family = stable_log          ; pure_stable | stable_log | tempered_poly | dyadic
    alpha = 1.2
    kappa = 1
    beta = 0.5
    dimension = 1
    drift = 0

    [sweep]
    t_range = 1e-2, 1e2          ; or t_list = 0.1, 1, 10
    points_per_decade = 2
    x_extent = 100               ; half-width of the x window (or x_extent_h, in units of h(t))
    derivatives = 0, 1

    [checks]
    symbol.psi_sandwich =
    bounds.upper_main = band=5, heldout_slack=0.1

    [output]
    directory = out
    formats = csv, report, plotdata

Every semantic error is raised as :class:`ConfigError` carrying the section,
key and source line.
"""

from __future__ import annotations

import configparser
import hashlib
import json
import math
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .. import measure as M

SECTIONS = ("measure", "sweep", "checks", "output")
FORMATS = ("csv", "report", "plotdata", "binary")

_MEASURE_KEYS = {"family", "alpha", "kappa", "beta", "m", "dimension", "drift", "spherical", "atoms", "label"}
_SWEEP_KEYS = {"t_list", "t_range", "points_per_decade", "x_extent", "x_extent_h", "oversample", "derivatives",
               "center", "alias_rtol", "alias_reference"}
_OUTPUT_KEYS = {"directory", "formats"}
_FAMILY_PARAMS = {"pure_stable": ("alpha",), "stable_log": ("alpha", "kappa", "beta"),
                  "tempered_poly": ("alpha", "kappa", "beta", "m"), "dyadic": ("beta", "kappa")}


class ConfigError(ValueError):
    def __init__(self, message, *, section=None, key=None, line=None, source="<config>"):
        self.section, self.key, self.line, self.source = section, key, line, source
        where = source
        if line is not None:
            where += f":{line}"
        if section is not None:
            where += f" [{section}]"
        if key is not None:
            where += f" {key}"
        super().__init__(f"{where}: {message}")


@dataclass
class SweepConfig:
    t_values: tuple = (1.0,)
    x_extent: float | None = None
    x_extent_h: float | None = 10.0
    oversample: int = 1
    derivatives: tuple = ((0,),)
    center: str = "b_h_shift"
    alias_rtol: float = 1e-3
    alias_reference: str = "window_min"


@dataclass
class ExperimentConfig:
    measure: dict
    sweep: SweepConfig
    checks: list  # (name, {option: value}) in file order
    output_dir: str | None = None
    formats: tuple = ("csv", "report")
    source: str = "<config>"
    raw: dict = field(default_factory=dict, repr=False)
    lines: dict = field(default_factory=dict, repr=False)

    @property
    def check_names(self):
        return [n for n, _ in self.checks]

    def config_hash(self) -> str:
        """sha256 of the canonical numeric content (output directory excluded)."""
        canon = {k: v for k, v in self.raw.items() if k != "output"}
        canon["output"] = {"formats": sorted(self.formats)}
        blob = json.dumps(canon, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()

    def build_spec(self) -> M.LevyMeasureSpec:
        return build_spec(self.measure, self.source, self.lines)


# ---------------------------------------------------------------------------
# parsing helpers
# ---------------------------------------------------------------------------


def _line_index(text):
    """{(section, key): line} for diagnostics (1-based)."""
    out, section = {}, None
    for i, raw in enumerate(text.splitlines(), 1):
        s = raw.strip()
        if not s or s[0] in "#;":
            continue
        m = re.match(r"\[([^\]]+)\]", s)
        if m:
            section = m.group(1).strip().lower()
            out[(section, None)] = i
            continue
        if section is not None:
            key = re.split(r"[=:]", s, maxsplit=1)[0].strip().lower()
            out[(section, key)] = i
    return out


def _list(value):
    return [v.strip() for v in re.split(r"[,;]", value) if v.strip()]


def parse_options(value: str, err) -> dict:
    """``"band=5, tol=1e-6"`` -> {"band": "5", "tol": "1e-6"}; empty string -> {}."""
    out = {}
    for item in _list(value):
        if "=" not in item:
            err(f"option {item!r} is not of the form name=value")
        k, v = item.split("=", 1)
        out[k.strip().lower()] = v.strip()
    return out


def _float(value, err, *, positive=False):
    try:
        v = float(value)
    except ValueError:
        err(f"expected a number, got {value!r}")
    if not math.isfinite(v) or (positive and not v > 0):
        err(f"expected a {'positive ' if positive else ''}finite number, got {value!r}")
    return v


def build_spec(measure: dict, source="<config>", lines=None) -> M.LevyMeasureSpec:
    lines = lines or {}

    def err(msg, key=None):
        raise ConfigError(msg, section="measure", key=key, line=lines.get(("measure", key)), source=source)

    family = measure.get("family")
    if family is None:
        err("missing required key 'family'")
    family = family.lower().replace("-", "_")
    if family not in _FAMILY_PARAMS:
        err(f"unknown family {family!r}; expected one of {sorted(_FAMILY_PARAMS)}", "family")
    params = {}
    for p in _FAMILY_PARAMS[family]:
        if p not in measure:
            err(f"family {family} needs key {p!r}")
        params[p] = _float(measure[p], lambda m, p=p: err(m, p))
    d = int(_float(measure.get("dimension", "1"), lambda m: err(m, "dimension"), positive=True))
    drift = tuple(_float(v, lambda m: err(m, "drift")) for v in _list(measure.get("drift", "")))
    if drift and len(drift) != d:
        err(f"drift has {len(drift)} components, dimension is {d}", "drift")
    try:
        if family == "dyadic":
            return M.dyadic(params["beta"], params["kappa"], d, drift=drift)
        spherical = None
        if measure.get("spherical", "uniform").lower() == "atoms":
            dirs, weights = [], []
            for item in [s for s in measure.get("atoms", "").split(";") if s.strip()]:
                if ":" not in item:
                    err(f"atom {item.strip()!r} is not 'direction:weight'", "atoms")
                v, w = item.split(":", 1)
                dirs.append([_float(c, lambda m: err(m, "atoms")) for c in v.split()])
                weights.append(_float(w, lambda m: err(m, "atoms"), positive=True))
            if not dirs:
                err("spherical = atoms needs an 'atoms' list", "atoms")
            spherical = M.atoms(dirs, weights)
        ctor = {"pure_stable": M.pure_stable, "stable_log": M.stable_log, "tempered_poly": M.tempered_poly}[family]
        args = [params[p] for p in _FAMILY_PARAMS[family]]
        return ctor(*args, d, spherical=spherical, drift=drift)
    except ConfigError:
        raise
    except (ValueError, TypeError) as exc:
        # point at the key the validator names, when it names one
        named = [k for k in measure if re.match(rf"\W*{re.escape(k)}\b", str(exc))]
        err(f"invalid measure: {exc}", named[0] if named else None)


def _t_values(sec, err):
    if "t_list" in sec and "t_range" in sec:
        err("give either t_list or t_range, not both", "t_list")
    if "t_list" in sec:
        vals = [_float(v, lambda m: err(m, "t_list"), positive=True) for v in _list(sec["t_list"])]
        if not vals:
            err("t_list is empty", "t_list")
        return tuple(vals)
    if "t_range" in sec:
        lohi = [_float(v, lambda m: err(m, "t_range"), positive=True) for v in _list(sec["t_range"])]
        if len(lohi) != 2 or not lohi[1] >= lohi[0]:
            err("t_range needs 'lo, hi' with lo <= hi", "t_range")
        ppd = _float(sec.get("points_per_decade", "2"), lambda m: err(m, "points_per_decade"), positive=True)
        decades = math.log10(lohi[1] / lohi[0])
        n = int(round(decades * ppd)) + 1
        return tuple(float(v) for v in np.logspace(math.log10(lohi[0]), math.log10(lohi[1]), n))
    return (1.0,)


def _derivatives(value, d, err):
    out = []
    for item in [s for s in value.split(";" if d > 1 else ",") if s.strip()]:
        parts = item.split()
        if len(parts) != d:
            err(f"derivative multi-index {item.strip()!r} needs {d} entries")
        try:
            beta = tuple(int(p) for p in parts)
        except ValueError:
            err(f"derivative multi-index {item.strip()!r} is not integer")
        if any(b < 0 for b in beta):
            err("derivative orders must be >= 0")
        out.append(beta)
    return tuple(out) or ((0,) * d,)


def parse_config(text: str, source: str = "<config>", *, known_checks=None) -> ExperimentConfig:
    """Parse and validate; ``known_checks`` defaults to the check registry."""
    if known_checks is None:
        from .checks import REGISTRY
        known_checks = REGISTRY
    lines = _line_index(text)
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"), interpolation=None,
                                   empty_lines_in_values=False)
    try:
        cp.read_string(text, source=source)
    except configparser.DuplicateSectionError as exc:
        raise ConfigError("duplicate section", section=exc.section, line=exc.lineno, source=source) from None
    except configparser.DuplicateOptionError as exc:
        raise ConfigError("duplicate key", section=exc.section, key=exc.option, line=exc.lineno,
                          source=source) from None
    except configparser.MissingSectionHeaderError as exc:
        raise ConfigError("content before the first [section] header", line=exc.lineno, source=source) from None
    except configparser.ParsingError as exc:
        ln = exc.errors[0][0] if exc.errors else None
        raise ConfigError("malformed line", line=ln, source=source) from None

    def err_for(section):
        def err(msg, key=None):
            raise ConfigError(msg, section=section, key=key, line=lines.get((section, key)), source=source)
        return err

    for sec in cp.sections():
        if sec.lower() not in SECTIONS:
            err_for(sec)(f"unknown section; expected one of {list(SECTIONS)}")
    for sec in ("measure", "checks"):
        if not cp.has_section(sec):
            raise ConfigError(f"missing required section [{sec}]", source=source)
    raw = {s: dict(cp.items(s)) for s in cp.sections()}

    allowed = {"measure": _MEASURE_KEYS, "sweep": _SWEEP_KEYS, "output": _OUTPUT_KEYS}
    for sec, keys in allowed.items():
        for k in raw.get(sec, {}):
            if k not in keys:
                err_for(sec)(f"unknown key; allowed: {', '.join(sorted(keys))}", k)

    measure = raw["measure"]
    spec = build_spec(measure, source, lines)

    s = raw.get("sweep", {})
    es = err_for("sweep")
    sweep = SweepConfig(t_values=_t_values(s, es))
    if "x_extent" in s and "x_extent_h" in s:
        es("give either x_extent or x_extent_h", "x_extent")
    if "x_extent" in s:
        sweep.x_extent = _float(s["x_extent"], lambda m: es(m, "x_extent"), positive=True)
        sweep.x_extent_h = None
    if "x_extent_h" in s:
        sweep.x_extent_h = _float(s["x_extent_h"], lambda m: es(m, "x_extent_h"), positive=True)
    if "oversample" in s:
        sweep.oversample = int(_float(s["oversample"], lambda m: es(m, "oversample"), positive=True))
    if "derivatives" in s:
        sweep.derivatives = _derivatives(s["derivatives"], spec.dimension, lambda m: es(m, "derivatives"))
    else:
        sweep.derivatives = ((0,) * spec.dimension,)
    if "center" in s:
        if s["center"] not in ("b_h_shift", "b_shift", "none"):
            es("center must be b_h_shift, b_shift or none", "center")
        sweep.center = s["center"]
    if "alias_rtol" in s:
        sweep.alias_rtol = _float(s["alias_rtol"], lambda m: es(m, "alias_rtol"), positive=True)
    if "alias_reference" in s:
        if s["alias_reference"] not in ("window_min", "peak"):
            es("alias_reference must be window_min or peak", "alias_reference")
        sweep.alias_reference = s["alias_reference"]

    checks = []
    ec = err_for("checks")
    for name, value in raw["checks"].items():
        if name not in known_checks:
            ec(f"unknown check {name!r}", name)
        opts = parse_options(value, lambda m, name=name: ec(m, name))
        try:
            known_checks[name].validate_options(opts)
        except ValueError as exc:
            ec(str(exc), name)
        checks.append((name, opts))

    o = raw.get("output", {})
    formats = tuple(_list(o.get("formats", "csv, report")))
    for f in formats:
        if f not in FORMATS:
            err_for("output")(f"unknown format {f!r}; allowed: {', '.join(FORMATS)}", "formats")
    return ExperimentConfig(measure, sweep, checks, o.get("directory"), formats, source, raw, lines)


def load_config(path) -> ExperimentConfig:
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc.strerror}", source=str(p)) from None
    return parse_config(text, str(p))
