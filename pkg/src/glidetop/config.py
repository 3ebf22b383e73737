"""TOML run and sweep configuration.

Sections mirror the data types (all SI)::

    [params]      m, g, l, I1, I3
    [friction]    kind = "constant", mu
    [initial]     theta, thetadot, phidot, omega3 | LA3, nux, nuy, phi
    [initial_vector]  rdot = [..], L = [..], axis = [..]   (instead of [initial])
    [integrator]  rel_tol, abs_tol, h_init, h_max, t_end, sample_dt, eps_den
    [convergence] enabled, tol_v, tol_axis, window
    [outputs]     trajectory_csv, report_json
    [check]       n_cross_chart, n_monte_carlo, stride
    [debug]       I1star_override
    [sweep]       parallelism, max_points, summary_csv, [[sweep.axes]] path/values

``initial.phidot`` may also be ``"match_upright"`` or ``"match_inverted"``: the
precession rate is then chosen so that L_A.z equals +L.axis or -L.axis, the
value it takes at the corresponding vertical spin.
"""
from __future__ import annotations

import copy
import itertools
import math
import re
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover - exercised on 3.10
    import tomli as tomllib

from .analysis import ConvergenceCriteria, matched_precession_rate
from .dynamics import euler_to_vector
from .errors import ConfigError
from .friction import ConstantFriction, FrictionModel
from .integrator import IntegratorConfig
from .params import PhysicalParams
from .state import EulerState, VectorState
from .trajectory import Limit

SECTIONS = {
    "params": {"m", "g", "l", "I1", "I3"},
    "friction": {"kind", "mu"},
    "initial": {"theta", "thetadot", "phidot", "omega3", "LA3", "nux", "nuy", "phi"},
    "initial_vector": {"rdot", "L", "axis"},
    "integrator": {"rel_tol", "abs_tol", "h_init", "h_max", "t_end", "sample_dt", "eps_den"},
    "convergence": {"enabled", "tol_v", "tol_axis", "window"},
    "outputs": {"trajectory_csv", "report_json"},
    "check": {"n_cross_chart", "n_monte_carlo", "stride"},
    "debug": {"I1star_override"},
    "sweep": {"parallelism", "max_points", "summary_csv", "axes"},
}

DEFAULT_MAX_POINTS = 10_000


@dataclass(frozen=True)
class CheckOptions:
    n_cross_chart: int = 10_000
    n_monte_carlo: int = 1000
    stride: int = 1


@dataclass
class RunConfig:
    params: PhysicalParams
    friction: FrictionModel
    initial: VectorState
    integrator: IntegratorConfig
    convergence: ConvergenceCriteria | None
    trajectory_csv: str | None = None
    report_json: str | None = None
    check: CheckOptions = field(default_factory=CheckOptions)
    raw: dict = field(default_factory=dict, repr=False)


@dataclass
class SweepConfig:
    base: RunConfig
    axes: list[tuple[str, list]]
    parallelism: int = 1
    max_points: int = DEFAULT_MAX_POINTS
    summary_csv: str = "sweep.csv"

    def points(self) -> list[dict[str, Any]]:
        names = [p for p, _ in self.axes]
        return [dict(zip(names, combo))
                for combo in itertools.product(*(vals for _, vals in self.axes))]

    def point_config(self, overrides: dict[str, Any]) -> RunConfig:
        raw = copy.deepcopy(self.base.raw)
        raw.pop("sweep", None)
        for path, value in overrides.items():
            _set_path(raw, path, value)
        return parse_run(raw)


# ---------------------------------------------------------------------------
# helpers


def load_document(path: str | Path) -> dict:
    path = Path(path)
    try:
        with path.open("rb") as fh:
            return tomllib.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from None


def _number(section: dict, key: str, where: str, default=None, positive=False):
    if key not in section:
        if default is None:
            raise ConfigError("missing required value", f"{where}.{key}")
        return default
    value = section[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"expected a number, got {value!r}", f"{where}.{key}")
    value = float(value)
    if not math.isfinite(value) or (positive and value <= 0):
        raise ConfigError(f"expected a {'positive ' if positive else ''}finite number, "
                          f"got {value!r}", f"{where}.{key}")
    return value


def _vector(section: dict, key: str, where: str, size: int):
    value = section.get(key)
    if not isinstance(value, list) or len(value) != size or not all(
            isinstance(v, (int, float)) and not isinstance(v, bool) for v in value):
        raise ConfigError(f"expected a list of {size} numbers", f"{where}.{key}")
    return [float(v) for v in value]


def _check_keys(doc: dict) -> None:
    for name, section in doc.items():
        if name not in SECTIONS:
            raise ConfigError("unknown section", name)
        if not isinstance(section, dict):
            raise ConfigError("expected a table", name)
        for key in section:
            if key not in SECTIONS[name]:
                raise ConfigError("unknown key", f"{name}.{key}")


def _set_path(doc: dict, path: str, value) -> None:
    parts = path.split(".")
    if len(parts) != 2 or parts[0] not in SECTIONS or parts[0] == "sweep" \
            or parts[1] not in SECTIONS[parts[0]]:
        raise ConfigError("sweep axis does not name a scalar field", path)
    if isinstance(value, (list, dict)):
        raise ConfigError("sweep values must be scalars", path)
    doc.setdefault(parts[0], {})[parts[1]] = value


# ---------------------------------------------------------------------------
# parsing


def parse_params(doc: dict) -> PhysicalParams:
    sec = doc.get("params")
    if sec is None:
        raise ConfigError("missing section", "params")
    values = {k: _number(sec, k, "params", positive=True) for k in ("m", "g", "l", "I1", "I3")}
    override = doc.get("debug", {}).get("I1star_override")
    if override is not None:
        override = _number(doc["debug"], "I1star_override", "debug", positive=True)
    try:
        return PhysicalParams(**values, I1star_override=override)
    except ValueError as exc:
        raise ConfigError(str(exc), "params") from None


def parse_friction(doc: dict) -> FrictionModel:
    sec = doc.get("friction", {})
    kind = sec.get("kind", "constant")
    if kind != "constant":
        raise ConfigError(f"unsupported friction kind {kind!r}", "friction.kind")
    mu = _number(sec, "mu", "friction", default=0.0)
    if mu < 0:
        raise ConfigError(f"friction coefficient must be >= 0, got {mu!r}", "friction.mu")
    return ConstantFriction(mu)


def parse_initial(doc: dict, params: PhysicalParams) -> VectorState:
    has_euler, has_vector = "initial" in doc, "initial_vector" in doc
    if has_euler == has_vector:
        raise ConfigError("give exactly one of [initial] or [initial_vector]", "initial")
    if has_vector:
        sec = doc["initial_vector"]
        axis = _vector(sec, "axis", "initial_vector", 3)
        if math.hypot(*axis) == 0:
            raise ConfigError("axis must be nonzero", "initial_vector.axis")
        state = VectorState(_vector(sec, "rdot", "initial_vector", 2),
                            _vector(sec, "L", "initial_vector", 3), axis)
        return state.normalized()

    sec = doc["initial"]
    if ("omega3" in sec) == ("LA3" in sec):
        raise ConfigError("give exactly one of omega3 or LA3", "initial.omega3")
    theta = _number(sec, "theta", "initial")
    if not 0.0 <= theta <= math.pi:
        raise ConfigError("theta must lie in [0, pi]", "initial.theta")
    if "LA3" in sec:
        omega3 = _number(sec, "LA3", "initial") / params.I3
    else:
        omega3 = _number(sec, "omega3", "initial")
    phidot = sec.get("phidot", 0.0)
    if isinstance(phidot, str):
        targets = {"match_upright": Limit.UPRIGHT, "match_inverted": Limit.INVERTED}
        if phidot not in targets:
            raise ConfigError(f"unknown precession rule {phidot!r}", "initial.phidot")
        try:
            phidot = matched_precession_rate(theta, params.I3 * omega3, params, targets[phidot])
        except ValueError as exc:
            raise ConfigError(str(exc), "initial.phidot") from None
    else:
        phidot = _number(sec, "phidot", "initial", default=0.0)
    es = EulerState(theta, _number(sec, "thetadot", "initial", default=0.0), phidot, omega3,
                    _number(sec, "nux", "initial", default=0.0),
                    _number(sec, "nuy", "initial", default=0.0))
    return euler_to_vector(es, _number(sec, "phi", "initial", default=0.0), params)


def parse_integrator(doc: dict) -> IntegratorConfig:
    sec = doc.get("integrator", {})
    defaults = IntegratorConfig()
    kwargs = {k: _number(sec, k, "integrator", default=getattr(defaults, k), positive=True)
              for k in ("rel_tol", "abs_tol", "h_init", "h_max", "t_end", "sample_dt", "eps_den")}
    return IntegratorConfig(**kwargs)


def parse_convergence(doc: dict) -> ConvergenceCriteria | None:
    sec = doc.get("convergence", {})
    enabled = sec.get("enabled", True)
    if not isinstance(enabled, bool):
        raise ConfigError("expected true or false", "convergence.enabled")
    defaults = ConvergenceCriteria()
    window = sec.get("window", defaults.window)
    if isinstance(window, bool) or not isinstance(window, int) or window < 1:
        raise ConfigError("expected a positive integer", "convergence.window")
    criteria = ConvergenceCriteria(
        _number(sec, "tol_v", "convergence", default=defaults.tol_v, positive=True),
        _number(sec, "tol_axis", "convergence", default=defaults.tol_axis, positive=True),
        window,
    )
    return criteria if enabled else None


def _positive_int(sec: dict, key: str, where: str, default: int) -> int:
    value = sec.get(key, default)
    if isinstance(value, bool) or not isinstance(value, int) or value < 1:
        raise ConfigError("expected a positive integer", f"{where}.{key}")
    return value


def _path(sec: dict, key: str, where: str) -> str | None:
    value = sec.get(key)
    if value is not None and (not isinstance(value, str) or not value):
        raise ConfigError("expected a file path string", f"{where}.{key}")
    return value


def parse_run(doc: dict) -> RunConfig:
    _check_keys(doc)
    params = parse_params(doc)
    outputs = doc.get("outputs", {})
    check = doc.get("check", {})
    return RunConfig(
        params=params,
        friction=parse_friction(doc),
        initial=parse_initial(doc, params),
        integrator=parse_integrator(doc),
        convergence=parse_convergence(doc),
        trajectory_csv=_path(outputs, "trajectory_csv", "outputs"),
        report_json=_path(outputs, "report_json", "outputs"),
        check=CheckOptions(
            n_cross_chart=_positive_int(check, "n_cross_chart", "check", 10_000),
            n_monte_carlo=_positive_int(check, "n_monte_carlo", "check", 1000),
            stride=_positive_int(check, "stride", "check", 1),
        ),
        raw=doc,
    )


def parse_sweep(doc: dict) -> SweepConfig:
    base = parse_run(doc)
    sec = doc.get("sweep")
    if sec is None:
        raise ConfigError("missing section", "sweep")
    axes_raw = sec.get("axes")
    if not isinstance(axes_raw, list) or not axes_raw:
        raise ConfigError("expected at least one [[sweep.axes]] entry", "sweep.axes")
    axes = []
    for i, ax in enumerate(axes_raw):
        where = f"sweep.axes[{i}]"
        if not isinstance(ax, dict) or set(ax) != {"path", "values"}:
            raise ConfigError("each axis needs exactly 'path' and 'values'", where)
        values = ax["values"]
        if not isinstance(values, list) or not values:
            raise ConfigError("expected a non-empty list", f"{where}.values")
        probe = copy.deepcopy(doc)
        _set_path(probe, ax["path"], values[0])
        axes.append((ax["path"], values))
    sweep = SweepConfig(
        base=base,
        axes=axes,
        parallelism=_positive_int(sec, "parallelism", "sweep", 1),
        max_points=_positive_int(sec, "max_points", "sweep", DEFAULT_MAX_POINTS),
        summary_csv=_path(sec, "summary_csv", "sweep") or "sweep.csv",
    )
    n = math.prod(len(v) for _, v in axes)
    if n > sweep.max_points:
        raise ConfigError(f"grid has {n} points, above the cap of {sweep.max_points}",
                          "sweep.max_points")
    for point in sweep.points():
        sweep.point_config(point)
    return sweep


def locate(text: str, field: str) -> int | None:
    """1-based line of ``section.key`` (or the section header) in TOML source."""
    section, _, key = field.partition(".")
    key = key.split("[")[0]
    section = section.split("[")[0]
    current = None
    header_line = None
    for n, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        m = re.match(r"^\[\[?\s*([\w.]+)\s*\]\]?$", line)
        if m:
            current = m.group(1)
            if current == section and header_line is None:
                header_line = n
            continue
        if key and current is not None and current.split(".")[0] == section \
                and re.match(rf"^{re.escape(key)}\s*=", line):
            return n
    return header_line


def _with_line(path: Path, exc: ConfigError) -> ConfigError:
    if exc.field is None or exc.line is not None:
        return exc
    try:
        line = locate(path.read_text(encoding="utf-8"), exc.field)
    except OSError:
        line = None
    return ConfigError(f"{exc.message} ({path})", exc.field, line)


def load_run(path: str | Path) -> RunConfig:
    path = Path(path)
    doc = load_document(path)
    try:
        return parse_run(doc)
    except ConfigError as exc:
        raise _with_line(path, exc) from None


def load_sweep(path: str | Path) -> SweepConfig:
    path = Path(path)
    doc = load_document(path)
    try:
        return parse_sweep(doc)
    except ConfigError as exc:
        raise _with_line(path, exc) from None
