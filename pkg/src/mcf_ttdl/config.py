"""JSON run configurations: schemas, validation and conversion to model objects.

Every quantity carries its unit in the key name. Unknown keys are rejected.
"""

from __future__ import annotations

import json
from pathlib import Path

import jsonschema

from .fbg_device import FiberSection, GratingSpec, MulticavityLayout
from .hetero_design import CoreDesign, HeteroMCF
from .waveguide import RadialProfile

SCHEMA_VERSION = 1

# dividing by an exact power of ten rounds correctly, so 1550 nm -> 1550e-9 m exactly
NM, UM, MM = 1e9, 1e6, 1e3


class ConfigError(ValueError):
    """Configuration failed schema or semantic validation."""


def _obj(props, required=()):
    return {"type": "object", "properties": props, "required": list(required),
            "additionalProperties": False}


_num = {"type": "number"}
_pos = {"type": "number", "exclusiveMinimum": 0}
_nonneg = {"type": "number", "minimum": 0}
_version = {"const": SCHEMA_VERSION}

PROFILE = _obj({
    "a1_um": _pos,
    "delta1_percent": {"type": "number", "exclusiveMinimum": -5, "exclusiveMaximum": 5},
    "a2_um": _nonneg,
    "w_um": _nonneg,
    "delta2_percent": {"type": "number", "minimum": 0, "exclusiveMaximum": 5},
}, ["a1_um", "delta1_percent"])

TRENCH = _obj({"a2_um": _nonneg, "w_um": _nonneg, "delta2_percent": _nonneg},
              ["a2_um", "w_um", "delta2_percent"])

GRID_NM = _obj({"start_nm": _pos, "stop_nm": _pos, "points": {"type": "integer", "minimum": 1}},
               ["start_nm", "stop_nm", "points"])

ANALYZE = _obj({
    "schema_version": _version,
    "profiles": {"type": "array", "items": PROFILE, "minItems": 1},
    "lambda0_nm": _pos,
    "grid": GRID_NM,
    "stencil_step_nm": _pos,
    "pitch_um": _pos,
}, ["schema_version", "profiles"])

DESIGN_PARAMS = {
    "n_cores": {"type": "integer", "minimum": 1},
    "d_start_ps_km_nm": _num,
    "delta_d_ps_km_nm": _nonneg,
    "lambda0_nm": _pos,
    "pitch_um": _pos,
    "cladding_diameter_um": _pos,
    "core1_delta1_percent": _pos,
    "min_delta_n_eff": _nonneg,
    "trench_menu": {"type": "array", "items": TRENCH, "minItems": 1},
}
DESIGN = _obj({"schema_version": _version, **DESIGN_PARAMS}, ["schema_version"])

GRATING = _obj({
    "core": {"type": "integer"},
    "z_start_mm": _nonneg,
    "length_mm": _pos,
    "bragg_nm": _pos,
    "delta_n": _nonneg,
    "weight": _pos,
}, ["core", "z_start_mm", "length_mm", "bragg_nm"])

LAYOUT = _obj({
    "n_eff": _pos,
    "group_index": _pos,
    "length_mm": _pos,
    "channels_nm": {"type": "array", "items": _pos, "minItems": 1},
    "gratings": {"type": "array", "items": GRATING, "minItems": 1},
}, ["length_mm", "channels_nm", "gratings"])

REPORT_CORE = _obj({
    "index": {"type": "integer"},
    "a1_um": _pos, "delta1_percent": _num, "a2_um": _nonneg, "w_um": _nonneg,
    "delta2_percent": _nonneg, "n_eff": _num, "tau_g0_ps_per_km": _num,
    "D_ps_km_nm": _num, "S_ps_km_nm2": _num,
}, ["index", "a1_um", "delta1_percent", "a2_um", "w_um", "delta2_percent",
    "n_eff", "tau_g0_ps_per_km", "D_ps_km_nm", "S_ps_km_nm2"])

TAPS_EXPLICIT = _obj({
    "source": {"const": "explicit"},
    "delays_ps": {"type": "array", "items": _num, "minItems": 1},
    "amplitudes": {"type": "array", "items": _nonneg},
}, ["source", "delays_ps"])

TAPS_HETERO = _obj({
    "source": {"const": "hetero"},
    "lambda_nm": _pos,
    "length_km": _nonneg,
    "design": _obj(DESIGN_PARAMS),
    "design_report": {"type": "string"},
    "cores": {"type": "array", "items": REPORT_CORE, "minItems": 1},
}, ["source"])

TAPS_FBG = _obj({
    "source": {"const": "fbg"},
    "diversity": {"enum": ["spatial", "wavelength"]},
    "core": {"type": "integer"},
    "channel": {"type": "integer", "minimum": 1},
    "group_index": _pos,
    "layout": LAYOUT,
    "amplitude_source": {"enum": ["weight", "reflectivity"]},
}, ["source"])

TAPS = {"oneOf": [TAPS_EXPLICIT, TAPS_HETERO, TAPS_FBG]}

FREQ = _obj({"start_ghz": _nonneg, "stop_ghz": _pos, "points": {"type": "integer", "minimum": 2}},
            ["start_ghz", "stop_ghz", "points"])

FILTER = _obj({"schema_version": _version, "taps": TAPS, "frequency": FREQ},
              ["schema_version"])

SWEEP = _obj({
    "schema_version": _version,
    "parameter": {"enum": ["lambda_nm", "length_km", "group_index"]},
    "start": _num,
    "stop": _num,
    "points": {"type": "integer", "minimum": 2},
    "taps": {"oneOf": [TAPS_HETERO, TAPS_FBG]},
}, ["schema_version", "parameter", "start", "stop", "points"])

REPORT = {
    "type": "object",
    "properties": {
        "schema_version": _version,
        "kind": {"const": "design_report"},
        "cores": {"type": "array", "items": REPORT_CORE, "minItems": 1},
    },
    "required": ["schema_version", "kind", "cores"],
}

SCHEMAS = {"analyze": ANALYZE, "design": DESIGN, "filter": FILTER, "sweep": SWEEP,
           "report": REPORT}


def validate(doc, command: str) -> dict:
    try:
        jsonschema.validate(doc, SCHEMAS[command])
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"{command} config invalid at {where}: {exc.message}") from exc
    return doc


def load(path) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc


def profile_from_dict(d: dict) -> RadialProfile:
    return RadialProfile.trench_assisted(
        d["a1_um"] / UM, d["delta1_percent"] / 100,
        d.get("a2_um", 0.0) / UM, d.get("w_um", 0.0) / UM,
        d.get("delta2_percent", 0.0) / 100,
    )


def tidy(x: float) -> float:
    # drop unit-conversion noise such as 5.999999999999999
    return float(f"{x:.12g}")


def profile_to_dict(p: RadialProfile) -> dict:
    a2, w, d2 = p.trench
    return {"a1_um": tidy(p.a1 * UM), "delta1_percent": tidy(p.delta1 * 100),
            "a2_um": tidy(a2 * UM), "w_um": tidy(w * UM), "delta2_percent": tidy(d2 * 100)}


def design_kwargs(d: dict) -> dict:
    """Keyword arguments for design_hetero_mcf from design parameters."""
    kw = {}
    simple = {"n_cores": ("n_cores", 1), "d_start_ps_km_nm": ("d_start", 1),
              "delta_d_ps_km_nm": ("delta_d", 1), "lambda0_nm": ("lambda0", NM),
              "pitch_um": ("pitch", UM), "cladding_diameter_um": ("cladding_diameter", UM),
              "core1_delta1_percent": ("core1_delta1", 100),
              "min_delta_n_eff": ("min_delta_n_eff", 1)}
    for key, (name, divisor) in simple.items():
        if key in d:
            kw[name] = d[key] / divisor if divisor != 1 else d[key]
    if "trench_menu" in d:
        kw["trench_menu"] = tuple(
            (t["a2_um"] / UM, t["w_um"] / UM, t["delta2_percent"] / 100)
            for t in d["trench_menu"]
        )
    return kw


def core_to_dict(c: CoreDesign) -> dict:
    return {"index": c.index, **profile_to_dict(c.profile), "n_eff": c.n_eff0,
            "tau_g0_ps_per_km": c.tau_g0, "D_ps_km_nm": c.D, "S_ps_km_nm2": c.S}


def core_from_dict(d: dict, lambda0: float) -> CoreDesign:
    return CoreDesign(d["index"], profile_from_dict(d), d["n_eff"], d["tau_g0_ps_per_km"],
                      d["D_ps_km_nm"], d["S_ps_km_nm2"], lambda0)


def mcf_from_report(report: dict) -> HeteroMCF:
    lambda0 = report.get("lambda0_nm", 1550.0) / NM
    cores = tuple(core_from_dict(c, lambda0) for c in report["cores"])
    return HeteroMCF(cores, report.get("pitch_um", 35.0) / UM,
                     report.get("cladding_diameter_um", 125.0) / UM, lambda0,
                     report.get("delta_d_target_ps_km_nm", 1.0))


def layout_from_dict(d: dict) -> MulticavityLayout:
    fiber = FiberSection(d.get("n_eff", 1.447), d.get("group_index", 1.468), d["length_mm"] / MM)
    gratings = tuple(
        GratingSpec(g["core"], g["z_start_mm"] / MM, g["length_mm"] / MM, g["bragg_nm"] / NM,
                    g.get("delta_n", 1e-4), g.get("weight", 1.0))
        for g in d["gratings"]
    )
    return MulticavityLayout(fiber, gratings, tuple(c / NM for c in d["channels_nm"]))


def layout_to_dict(layout: MulticavityLayout) -> dict:
    return {
        "n_eff": layout.fiber.n_eff,
        "group_index": layout.fiber.n_g,
        "length_mm": tidy(layout.fiber.length * MM),
        "channels_nm": [tidy(c * NM) for c in layout.wavelength_channels],
        "gratings": [
            {"core": g.core_id, "z_start_mm": tidy(g.z_start * MM), "length_mm": tidy(g.length * MM),
             "bragg_nm": tidy(g.bragg_wavelength * NM), "delta_n": g.delta_n,
             "weight": g.reflectivity_weight}
            for g in layout.gratings
        ],
    }
