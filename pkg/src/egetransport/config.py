"""TOML experiment configs and command-line overrides.

Layout:

    [experiment]
    kind = "parity-break"       # one of the sweep kinds
    l = 6
    n = 5
    k = 3
    realizations = 500
    master_seed = 20260823
    # optional: k_prime, ensemble, construction, eta

    [grid]                      # exactly one of the three forms
    values = [0.0, 0.25, 1.0]
    # or linear: start/stop/step
    # or log: log_start/log_stop/points, optionally prepend_zero = true

    [quadrature]                # optional, defaults shown
    atol = 1e-8
    rtol = 1e-6
    max_depth = 40

serialize_config writes the canonical form (explicit value list), and
parsing it back yields an equal ExperimentSpec.
"""

from __future__ import annotations

import math
from dataclasses import replace

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from .fock import BasisSpec
from .quadrature import QuadratureSpec
from .sweep import ExperimentSpec

FULL_SCALE_REALIZATIONS = 10000


class ConfigError(ValueError):
    """Invalid or missing config content; the message names the field."""


def _section(data: dict, name: str, required: bool = True) -> dict:
    sec = data.get(name)
    if sec is None:
        if required:
            raise ConfigError(f"missing [{name}] section")
        return {}
    if not isinstance(sec, dict):
        raise ConfigError(f"[{name}] must be a table")
    return sec


def _get(sec: dict, section: str, key: str, types, default=...):
    if key not in sec:
        if default is ...:
            raise ConfigError(f"missing field {section}.{key}")
        return default
    value = sec[key]
    if not isinstance(value, types) or isinstance(value, bool):
        raise ConfigError(f"field {section}.{key} has the wrong type")
    return value


def _build_grid(sec: dict):
    forms = [k for k in ("values", "start", "log_start") if k in sec]
    if not forms:
        return None
    if len(forms) > 1:
        raise ConfigError("grid must use exactly one of values, start, log_start")
    if "values" in sec:
        values = sec["values"]
        if not isinstance(values, list) or not values:
            raise ConfigError("field grid.values must be a nonempty list")
        try:
            return tuple(float(v) for v in values)
        except (TypeError, ValueError):
            raise ConfigError("field grid.values must contain numbers") from None
    if "start" in sec:
        start = float(_get(sec, "grid", "start", (int, float)))
        stop = float(_get(sec, "grid", "stop", (int, float)))
        step = float(_get(sec, "grid", "step", (int, float)))
        if not step > 0 or not stop > start:
            raise ConfigError("field grid.step must be positive and grid.stop > grid.start")
        count = int(round((stop - start) / step))
        if not math.isclose(start + count * step, stop, rel_tol=1e-9, abs_tol=1e-12):
            raise ConfigError("field grid.step does not divide the grid range evenly")
        # endpoints exact, interior by proportional offset to avoid drift
        return tuple(start + (stop - start) * i / count for i in range(count + 1))
    log_start = float(_get(sec, "grid", "log_start", (int, float)))
    log_stop = float(_get(sec, "grid", "log_stop", (int, float)))
    points = _get(sec, "grid", "points", int)
    if log_start <= 0 or log_stop <= log_start or points < 2:
        raise ConfigError("field grid.log_start/log_stop/points out of range")
    ratio = log_stop / log_start
    grid = tuple(log_start * ratio ** (i / (points - 1)) for i in range(points))
    prepend = sec.get("prepend_zero", False)
    if not isinstance(prepend, bool):
        raise ConfigError("field grid.prepend_zero must be a boolean")
    if prepend:
        grid = (0.0,) + grid
    return grid


def parse_config(text: str) -> ExperimentSpec:
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"config is not valid TOML: {exc}") from None
    exp = _section(data, "experiment")
    quad_sec = _section(data, "quadrature", required=False)
    grid_sec = _section(data, "grid", required=False)

    basis = BasisSpec(_get(exp, "experiment", "l", int),
                      _get(exp, "experiment", "n", int))
    quad = QuadratureSpec(
        atol=float(_get(quad_sec, "quadrature", "atol", (int, float), 1e-8)),
        rtol=float(_get(quad_sec, "quadrature", "rtol", (int, float), 1e-6)),
        max_depth=_get(quad_sec, "quadrature", "max_depth", int, 40),
    )
    try:
        return ExperimentSpec(
            kind=_get(exp, "experiment", "kind", str),
            basis=basis,
            k=_get(exp, "experiment", "k", int),
            k_prime=_get(exp, "experiment", "k_prime", int, None),
            ensemble=_get(exp, "experiment", "ensemble", str, "csege"),
            construction=_get(exp, "experiment", "construction", str, "projection"),
            eta=float(_get(exp, "experiment", "eta", (int, float), 0.5)),
            realizations=_get(exp, "experiment", "realizations", int),
            master_seed=_get(exp, "experiment", "master_seed", int),
            grid=_build_grid(grid_sec),
            quad=quad,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def load_config(path) -> ExperimentSpec:
    try:
        with open(path, "rb") as fh:
            text = fh.read().decode("utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_config(text)


def serialize_config(spec: ExperimentSpec) -> str:
    """Canonical TOML round-trip form with the grid spelled out."""
    k, kp = spec.rank_pair
    lines = [
        "[experiment]",
        f'kind = "{spec.kind}"',
        f"l = {spec.basis.l}",
        f"n = {spec.basis.n}",
        f"k = {k}",
        f"k_prime = {kp}",
        f'ensemble = "{spec.ensemble}"',
        f'construction = "{spec.construction}"',
        f"eta = {spec.eta!r}",
        f"realizations = {spec.realizations}",
        f"master_seed = {spec.master_seed}",
        "",
        "[grid]",
        "values = [" + ", ".join(repr(g) for g in spec.grid) + "]",
        "",
        "[quadrature]",
        f"atol = {spec.quad.atol!r}",
        f"rtol = {spec.quad.rtol!r}",
        f"max_depth = {spec.quad.max_depth}",
    ]
    return "\n".join(lines) + "\n"


def apply_overrides(spec: ExperimentSpec, seed=None, realizations=None,
                    eta=None, full_scale: bool = False) -> ExperimentSpec:
    """Flag precedence: explicit values beat --full-scale beats the file."""
    changes = {}
    if full_scale:
        changes["realizations"] = FULL_SCALE_REALIZATIONS
    if realizations is not None:
        changes["realizations"] = realizations
    if seed is not None:
        changes["master_seed"] = seed
    if eta is not None:
        changes["eta"] = eta
    if not changes:
        return spec
    try:
        return replace(spec, **changes)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
