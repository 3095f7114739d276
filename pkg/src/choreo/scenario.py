"""Scenario configs, presets and the pipeline that turns a config into a report."""

from __future__ import annotations

import copy
import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

import jsonschema
import numpy as np

from . import __version__
from .algebra import HomPoly3
from .choreography import (
    MATCH_TOL,
    WINDING_TOL,
    check_theorems,
    check_tracing_monodromy,
    monodromy,
    real_tracing,
)
from .errors import ChoreoError, ConfigError, DiscriminantHit, TrackingFailure, UnknownPreset
from .family import (
    LoopFamily,
    binary_curve_pencil,
    ellipse_tangent_lines,
    line_pencil,
    line_pencil_with_base_point,
    line_product,
    pencil_about_third_point,
    perturbation_loop,
    sampled_line_loop,
)
from .topology import CurveType, classify_cubic_type, complex_orientation_cubic, point_in_oval, trace_real_locus
from .tracking import (
    DivisorPath,
    TrackerConfig,
    abel_jacobi_residual,
    export_csv,
    track_loop,
    transversality_margin,
)

EXIT_OK, EXIT_DISCRIMINANT, EXIT_TRACKING, EXIT_CONFIG = 0, 2, 3, 4

# ---------------------------------------------------------------- schema

_NUM = {"type": "number"}
_XY = {"type": "array", "items": _NUM, "minItems": 2, "maxItems": 2}
_POLY = {
    "type": "object",
    "properties": {
        "degree": {"type": "integer", "minimum": 1},
        "coeffs": {"type": "object", "additionalProperties": _NUM},
    },
    "required": ["degree", "coeffs"],
    "additionalProperties": False,
}


def _kind(name: str, props: dict, required: list[str]) -> dict:
    return {
        "type": "object",
        "properties": {"kind": {"const": name}, **props},
        "required": ["kind", *required],
        "additionalProperties": False,
    }


_SWING = {"type": ["number", "null"]}

SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "choreo scenario",
    "type": "object",
    "properties": {
        "name": {"type": "string"},
        "description": {"type": "string"},
        "curve": _POLY,
        "curve_type_override": {"enum": ["TypeI", "TypeII", "Unknown", None]},
        "orientation_center": {"oneOf": [_XY, {"type": "null"}]},
        "topology": {
            "type": "object",
            "properties": {"step": {"type": "number", "exclusiveMinimum": 0}},
            "additionalProperties": False,
        },
        "family": {
            "oneOf": [
                _kind("line_pencil", {"center": _XY, "theta0": _NUM, "swing": _SWING,
                                      "base_point": {"oneOf": [_XY, {"type": "null"}]}}, ["center"]),
                _kind("divisor_pencil", {"points": {"type": "array", "items": _XY, "minItems": 2, "maxItems": 2},
                                         "swing": _SWING}, ["points"]),
                _kind("line_product", {"center": _XY, "k": {"type": "integer", "minimum": 2}, "theta0": _NUM,
                                       "require_interior": {"type": "boolean"}}, ["center", "k"]),
                _kind("binary_pencil", {"F0": _POLY, "F1": _POLY}, ["F0", "F1"]),
                _kind("perturbation_loop", {"F0": _POLY, "G1": _POLY, "G2": _POLY,
                                            "eps": {"type": "number", "exclusiveMinimum": 0}}, ["F0", "eps"]),
                _kind("sampled_lines", {"samples": {"type": "array", "items": {"type": "array", "items": _NUM,
                                                                             "minItems": 3, "maxItems": 3}},
                                        "base_point": {"oneOf": [_XY, {"type": "null"}]}}, ["samples"]),
                _kind("ellipse_tangents", {"center": _XY, "axes": _XY,
                                           "samples": {"type": "integer", "minimum": 8}}, ["center", "axes"]),
            ]
        },
        "tracker": {
            "type": "object",
            "properties": {
                "steps": {"type": "integer", "minimum": 10},
                "corrector_tol": {"type": "number", "exclusiveMinimum": 0},
                "collision_tol": {"type": "number", "exclusiveMinimum": 0},
                "max_retries": {"type": "integer", "minimum": 0, "maximum": 20},
            },
            "additionalProperties": False,
        },
        "checks": {
            "type": "array",
            "items": {"enum": ["Th1a", "Th1b", "Th1c", "Th2a", "Th2b", "Th3-consistency", "Sec3_3"]},
        },
        "expect": {
            "type": "object",
            "properties": {
                "outcome": {"enum": ["ok", "DiscriminantHit", "TrackingFailure", "ConfigError"]},
                "c": {"type": "array", "items": {"type": "integer"}},
                "c_even": {"type": "boolean"},
                "monodromy_identity": {"type": "boolean"},
                "cyclic_powers": {"type": "object", "additionalProperties": {"type": ["integer", "null"]}},
                "report_only": {"type": "object"},
            },
            "additionalProperties": False,
        },
        "outputs": {
            "type": "object",
            "properties": {
                "report": {"type": "string"},
                "trajectory": {"type": "string"},
                "plot": {"type": "string"},
            },
            "additionalProperties": False,
        },
        "seed": {"type": "integer", "minimum": 0},
    },
    "required": ["curve", "family"],
    "additionalProperties": False,
}


def validate_config(cfg: dict) -> dict:
    try:
        jsonschema.validate(cfg, SCHEMA)
    except jsonschema.ValidationError as e:
        where = "/".join(str(p) for p in e.absolute_path) or "<root>"
        raise ConfigError(f"{where}: {e.message}") from None
    return cfg


def config_hash(cfg: dict) -> str:
    canon = json.dumps(cfg, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()[:16]


# ---------------------------------------------------------------- presets

M_CUBIC = {"degree": 3, "coeffs": {"y^2 z": 1.0, "x^3": -1.0, "x z^2": 1.0}}
TYPE_II_CUBIC = {"degree": 3, "coeffs": {"y^2 z": 1.0, "x^3": -1.0, "x z^2": -1.0}}
# a cubic cutting the M-cubic in 9 real points: x = 38 y (y - 1/2)(y + 1/2)
NINE_POINT_CUBIC = {"degree": 3, "coeffs": {"x z^2": 1.0, "y^3": -38.0, "y z^2": 9.5}}


def _on_cubic(x: float, sign: int) -> list[float]:
    """Point of y^2 = x^3 - x with the given sign of y."""
    return [x, sign * float(np.sqrt(x**3 - x))]


def _presets() -> dict[str, dict]:
    base = {"curve": M_CUBIC, "orientation_center": [-0.5, 0.0], "seed": 0}
    return {
        "sec7-1": {
            **base,
            "name": "sec7-1",
            "description": "A on the oval, B on the one-sided branch; pencil about their third collinear point C.",
            "family": {"kind": "divisor_pencil", "points": [_on_cubic(-0.04, 1), _on_cubic(1.17, 1)]},
            "checks": ["Th1a", "Sec3_3"],
            "expect": {"outcome": "ok", "c": [1, 1], "monodromy_identity": True},
        },
        "sec7-1b": {
            **base,
            "name": "sec7-1b",
            "description": "A and B both on the oval; the pencil about C swings back and forth around line AB.",
            "family": {"kind": "divisor_pencil", "points": [_on_cubic(-0.9, 1), _on_cubic(-0.2, -1)], "swing": 0.05},
            "checks": ["Th1b", "Sec3_3"],
            "expect": {"outcome": "ok", "c": [0, 0], "monodromy_identity": True},
        },
        "sec7-2": {
            **base,
            "name": "sec7-2",
            "description": "Pencil of lines through a point inside the oval.",
            "family": {"kind": "line_pencil", "center": [-0.5, 0.0], "theta0": 0.0},
            "checks": ["Th1a", "Sec3_3"],
            "expect": {"outcome": "ok", "c": [1, 1], "monodromy_identity": False, "cyclic_powers": {"0": 1, "1": 0}},
        },
        "sec7-3": {
            **base,
            "name": "sec7-3",
            "description": "Three lines through a point inside the oval, turned together by pi/3.",
            "family": {"kind": "line_product", "center": [-0.5, 0.0], "k": 3, "theta0": 0.0},
            "checks": ["Th1a", "Sec3_3"],
            "expect": {"outcome": "ok", "c": [1, 1], "cyclic_powers": {"0": 1, "1": 1}},
        },
        "thm2-oval": {
            **base,
            "name": "thm2-oval",
            "description": "Tangent lines of a circle around the oval; the divisor is one real point plus a pair.",
            "family": {"kind": "ellipse_tangents", "center": [-0.5, 0.0], "axes": [0.8, 0.8], "samples": 720},
            "checks": ["Th2a", "Th2b", "Sec3_3"],
            "expect": {"outcome": "ok", "c_even": True, "report_only": {"c_abs": {"1": 2}}},
        },
        "thm3-null": {
            **base,
            "name": "thm3-null",
            "description": "Small circle of cubics around a cubic meeting the curve in 9 real points.",
            "family": {"kind": "perturbation_loop", "F0": NINE_POINT_CUBIC, "eps": 0.003},
            "checks": ["Th3-consistency", "Sec3_3"],
            "expect": {"outcome": "ok", "c": [0, 0], "monodromy_identity": True},
        },
        "typeII-pencil": {
            "name": "typeII-pencil",
            "description": "Line pencil about (2, 0) on y^2 = x^3 + x; lines through it become tangent.",
            "curve": TYPE_II_CUBIC,
            "seed": 0,
            "family": {"kind": "line_pencil", "center": [2.0, 0.0], "theta0": 0.0},
            "checks": ["Th1c"],
            "expect": {"outcome": "DiscriminantHit"},
        },
    }


PRESET_NAMES = tuple(_presets())


def preset(name: str) -> dict:
    table = _presets()
    if name not in table:
        raise UnknownPreset(f"unknown preset {name!r}; known: {', '.join(table)}")
    return validate_config(copy.deepcopy(table[name]))


# ---------------------------------------------------------------- building objects


def _random_form(rng: np.random.Generator, degree: int) -> HomPoly3:
    n = (degree + 1) * (degree + 2) // 2
    return HomPoly3(degree, rng.standard_normal(n))


def build_family(F: HomPoly3, spec: dict, topo, seed: int = 0) -> LoopFamily:
    kind = spec["kind"]
    if kind == "line_pencil":
        swing = spec.get("swing")
        if spec.get("base_point") is not None:
            return line_pencil_with_base_point(F, spec["base_point"], spec.get("theta0", 0.0), swing)
        return line_pencil(spec["center"], spec.get("theta0", 0.0), swing)
    if kind == "divisor_pencil":
        A, B = spec["points"]
        return pencil_about_third_point(F, A, B, spec.get("swing"))
    if kind == "line_product":
        oval = None
        if spec.get("require_interior", True):
            if len(topo.ovals) != 1:
                raise ConfigError("line_product with require_interior needs exactly one oval")
            oval = topo.ovals[0]
        return line_product(spec["center"], spec["k"], oval=oval, theta0=spec.get("theta0", 0.0))
    if kind == "binary_pencil":
        return binary_curve_pencil(HomPoly3.from_dict(spec["F0"]), HomPoly3.from_dict(spec["F1"]))
    if kind == "perturbation_loop":
        F0 = HomPoly3.from_dict(spec["F0"])
        rng = np.random.default_rng(seed)
        G1 = HomPoly3.from_dict(spec["G1"]) if "G1" in spec else _random_form(rng, F0.degree)
        G2 = HomPoly3.from_dict(spec["G2"]) if "G2" in spec else _random_form(rng, F0.degree)
        return perturbation_loop(F0, G1, G2, spec["eps"])
    if kind == "sampled_lines":
        return sampled_line_loop(spec["samples"], spec.get("base_point"))
    if kind == "ellipse_tangents":
        return sampled_line_loop(ellipse_tangent_lines(spec["center"], spec["axes"], spec.get("samples", 720)))
    raise ConfigError(f"unknown family kind {kind!r}")


def build_topology(F: HomPoly3, cfg: dict):
    step = cfg.get("topology", {}).get("step", 1e-3)
    topo = trace_real_locus(F, step=step)
    override = cfg.get("curve_type_override")
    ctype = CurveType(override) if override else classify_cubic_type(topo)
    if ctype != topo.curve_type:
        topo = type(topo)(topo.F, topo.components, topo.step, ctype, topo.complex_orientation_fixed)
    if ctype == CurveType.TYPE_I and F.degree == 3 and len(topo.ovals) == 1:
        center = cfg.get("orientation_center")
        if center is None:
            center = _oval_centroid(topo.ovals[0])
        topo = complex_orientation_cubic(topo, center)
    return topo


def _oval_centroid(oval) -> list[float]:
    V = oval.vertices
    w = V.mean(axis=0)
    if abs(w[2]) < 1e-9:
        raise ConfigError("give orientation_center: the oval's mean direction is at infinity")
    c = (w / w[2])[:2]
    if not point_in_oval(c, oval):
        raise ConfigError("give orientation_center: the oval centroid is not inside the oval")
    return c.tolist()


def tracker_config(cfg: dict) -> TrackerConfig:
    return TrackerConfig(**cfg.get("tracker", {}))


# ---------------------------------------------------------------- running


@dataclass
class ScenarioResult:
    report: dict
    exit_code: int
    path: DivisorPath | None = None
    topo: object | None = None


def _r(x: float) -> float | None:
    """Round for stable report bytes."""
    if x is None or not np.isfinite(x):
        return None
    return float(f"{x:.10g}")


def _expectations(expect: dict, report: dict) -> list[dict]:
    rows = []
    status = report["status"]
    if "outcome" in expect:
        rows.append({"key": "outcome", "expected": expect["outcome"], "actual": status,
                     "ok": expect["outcome"] == status})
    if status != "ok":
        for key in ("c", "c_even", "monodromy_identity", "cyclic_powers"):
            if key in expect:
                rows.append({"key": key, "expected": expect[key], "actual": None, "ok": False})
        return rows
    c = [report["c"][k] for k in sorted(report["c"], key=int)]
    if "c" in expect:
        rows.append({"key": "c", "expected": expect["c"], "actual": c, "ok": c == expect["c"]})
    if "c_even" in expect:
        even = all(v % 2 == 0 for v in c)
        rows.append({"key": "c_even", "expected": expect["c_even"], "actual": even, "ok": even == expect["c_even"]})
    if "monodromy_identity" in expect:
        ident = report["monodromy"]["identity"]
        rows.append({"key": "monodromy_identity", "expected": expect["monodromy_identity"], "actual": ident,
                     "ok": ident == expect["monodromy_identity"]})
    if "cyclic_powers" in expect:
        got = report["monodromy"]["cyclic_powers"]
        sub = {k: got.get(k) for k in expect["cyclic_powers"]}
        rows.append({"key": "cyclic_powers", "expected": expect["cyclic_powers"], "actual": sub,
                     "ok": sub == expect["cyclic_powers"]})
    for key, val in expect.get("report_only", {}).items():
        if key == "c_abs":
            actual = {k: abs(report["c"][k]) for k in val}
            rows.append({"key": "c_abs", "expected": val, "actual": actual, "ok": actual == val, "report_only": True})
    return rows


def run_scenario(cfg: dict, seed: int | None = None, traj: str | None = None, plot: str | None = None
                 ) -> ScenarioResult:
    """Run the full pipeline; never raises for scenario-level failures."""
    report: dict = {"version": __version__}
    try:
        cfg = validate_config(copy.deepcopy(cfg))
    except ConfigError as e:
        report.update(status="ConfigError", exit_code=EXIT_CONFIG, error={"type": "ConfigError", "message": str(e)})
        return ScenarioResult(report, EXIT_CONFIG)
    if seed is not None:
        cfg["seed"] = seed
    outputs = cfg.get("outputs", {})
    traj = traj or outputs.get("trajectory")
    plot = plot or outputs.get("plot")
    report.update(name=cfg.get("name", "scenario"), config_hash=config_hash(cfg), seed=cfg.get("seed", 0))

    path = topo = None
    try:
        F = HomPoly3.from_dict(cfg["curve"])
        tcfg = tracker_config(cfg)
        report["tolerances"] = {**tcfg.to_json(), "winding_tol": WINDING_TOL, "match_tol": MATCH_TOL}
        topo = build_topology(F, cfg)
        report["curve_type"] = topo.curve_type.value
        report["components"] = [
            {"id": c.id, "kind": c.kind, "orientation": c.orientation, "vertices": len(c.vertices),
             "length": _r(c.total)} for c in topo.components
        ]
        fam = build_family(F, cfg["family"], topo, cfg.get("seed", 0))
        report["family"] = {"kind": fam.kind, "period": _r(fam.period), "closure_error": _r(fam.closure_error())}
        path = track_loop(F, fam, tcfg, topo=topo)
        _fill_results(report, cfg, F, path, topo)
        report.update(status="ok", exit_code=EXIT_OK)
    except DiscriminantHit as e:
        report.update(status="DiscriminantHit", exit_code=EXIT_DISCRIMINANT,
                      error={"type": "DiscriminantHit", "t": _r(e.t), "message": str(e)})
    except TrackingFailure as e:
        report.update(status="TrackingFailure", exit_code=EXIT_TRACKING,
                      error={"type": type(e).__name__, "message": str(e)})
    except (ChoreoError, ValueError, KeyError) as e:
        report.update(status="ConfigError", exit_code=EXIT_CONFIG,
                      error={"type": type(e).__name__, "message": str(e)})
    if "expect" in cfg:
        rows = _expectations(cfg["expect"], report)
        report["expectations"] = rows
        report["expectations_met"] = all(r["ok"] for r in rows if not r.get("report_only"))
    if path is not None and traj:
        export_csv(path, traj)
    if plot and topo is not None:
        from .plot import export_plot

        export_plot(path, topo, plot)
    return ScenarioResult(report, report["exit_code"], path, topo)


def _fill_results(report: dict, cfg: dict, F: HomPoly3, path: DivisorPath, topo) -> None:
    tv = real_tracing(path, topo)
    mp = monodromy(path, topo)
    occupied = {int(path.component[j]) for j in path.real}
    report["divisor"] = {
        "degree": path.n_points,
        "real_points": len(path.real),
        "conjugate_pairs": len(path.pairs),
        "per_component": {str(c.id): int(np.sum(path.component == c.id)) for c in topo.components},
        "start_real": [[_r(v) for v in np.real(path.points[0, j])] for j in path.real],
    }
    report["c"] = tv.to_json()["c"]
    report["basis"] = tv.basis
    report["winding_raw"] = {k: _r(v) for k, v in tv.to_json()["raw"].items()}
    report["monodromy"] = {**mp.to_json(), "identity": mp.is_identity}
    report["cyclic_powers"] = report["monodromy"]["cyclic_powers"]
    checks = cfg.get("checks")
    contractible = True if checks and "Th3-consistency" in checks else None
    verdicts = check_theorems(tv, "purely_real" if path.purely_real else "mixed", topo.curve_type, occupied,
                              contractible=contractible, monodromy=mp)
    verdicts.append(check_tracing_monodromy(tv, mp))
    if checks:
        verdicts = [v for v in verdicts if v.theorem in checks]
    report["verdicts"] = [v.to_json() for v in verdicts]
    report["verdicts_ok"] = all(v.satisfied for v in verdicts if v.applicable)
    aj = abel_jacobi_residual(F, path) if F.degree == 3 else None
    report["abel_jacobi_residual"] = _r(aj) if aj is not None else None
    report["transversality_margin"] = _r(transversality_margin(path))
    report["max_residual"] = _r(path.max_residual)
    report["closure_error"] = _r(path.closure_error())


def report_json(report: dict) -> str:
    return json.dumps(report, sort_keys=True, indent=2) + "\n"


def load_config(file: str | Path) -> dict:
    try:
        with open(file) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as e:
        raise ConfigError(f"cannot read config {file}: {e}") from None
