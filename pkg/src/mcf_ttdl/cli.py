"""Command-line front end.

    mcf-ttdl analyze --config profiles.json [--format csv --core 2]
    mcf-ttdl design  [--config design.json] [--output report.json]
    mcf-ttdl filter  --paper-layout --lambda-nm 1560 --length-km 10
    mcf-ttdl filter  --paper-layout --diversity wavelength --core 6
    mcf-ttdl sweep   --config sweep.json

Exit status: 0 success, 1 computation or constraint failure, 2 bad config.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from functools import lru_cache
from pathlib import Path

import numpy as np

from . import __version__
from . import config as cfg
from .errors import (
    ChannelNotFound,
    CoreNotFound,
    DesignInfeasible,
    EmptyOrSingleTap,
    InsufficientPeaks,
    InvalidLayout,
    TTDLError,
)
from .fbg_device import canonical_paper_layout, tap_amplitudes, tap_delays
from .hetero_design import LAMBDA0, CoreDesign, HeteroMCF, design_hetero_mcf, differential_delay
from .mwp_filter import TapSet, bandwidth_3db, fsr, measured_fsr, mslr, transfer_function
from .waveguide import DEFAULT_STEP, FUSED_SILICA, sweep as wavelength_sweep

DEFAULT_GRID_NM = {"start_nm": 1520.0, "stop_nm": 1580.0, "points": 13}
DEFAULT_FREQUENCY = {"start_ghz": 0.0, "stop_ghz": 40.0, "points": 8001}
DEFAULT_LAMBDA_NM = 1560.0
DEFAULT_LENGTH_KM = 10.0


class CommandFailed(Exception):
    """A computation ran but its result violates a requested constraint."""


# --- helpers ------------------------------------------------------------

def _emit(text: str, output):
    if output is None:
        sys.stdout.write(text)
    else:
        Path(output).write_text(text)


def _dump(doc) -> str:
    return json.dumps(doc, indent=2) + "\n"


def _fmt(x) -> str:
    return "nan" if x is None else f"{x:.9g}"


def _report(mcf: HeteroMCF, config_echo, warnings=()) -> dict:
    radii = mcf.threshold_radii()
    finite = [r for r in radii if r is not None]
    return {
        "schema_version": cfg.SCHEMA_VERSION,
        "kind": "design_report",
        "toolkit_version": __version__,
        "lambda0_nm": cfg.tidy(mcf.lambda0 * 1e9),
        "pitch_um": cfg.tidy(mcf.pitch * 1e6),
        "cladding_diameter_um": cfg.tidy(mcf.cladding_diameter * 1e6),
        "delta_d_target_ps_km_nm": mcf.delta_d_target,
        "cores": [cfg.core_to_dict(c) for c in mcf.cores],
        "adjacent_delta_n_eff": mcf.adjacent_delta_n_eff(),
        "r_pk_mm": [None if r is None else r * 1e3 for r in radii],
        "r_pk_min_mm": min(finite) * 1e3 if finite else None,
        "tau_spread_ps_per_km": mcf.tau_spread(),
        "tolerance_flags": mcf.tolerance_flags(),
        "warnings": list(warnings),
        "config": config_echo,
    }


@lru_cache(maxsize=8)
def _cached_design(key: str) -> HeteroMCF:
    return design_hetero_mcf(**cfg.design_kwargs(json.loads(key)))


def _design(params: dict) -> HeteroMCF:
    return _cached_design(json.dumps(params, sort_keys=True))


def _homogeneous_warning(params: dict) -> list[str]:
    if params.get("delta_d_ps_km_nm", 1.0) == 0 and params.get("n_cores", 7) > 1:
        return ["delta_d = 0: homogeneous design, R_pk undefined"]
    return []


# --- analyze --------------------------------------------------------------

def cmd_analyze(args) -> int:
    if args.config is None:
        raise cfg.ConfigError("analyze needs --config with a profile list or a design report")
    doc = cfg.load(args.config)
    if isinstance(doc, dict) and doc.get("kind") == "design_report":
        cfg.validate(doc, "report")
        profiles = [
            {k: c[k] for k in ("a1_um", "delta1_percent", "a2_um", "w_um", "delta2_percent")}
            for c in doc["cores"]
        ]
        lambda0 = doc["lambda0_nm"] / cfg.NM if "lambda0_nm" in doc else LAMBDA0
        pitch = doc.get("pitch_um", 35.0) / cfg.UM
        step, grid = DEFAULT_STEP, DEFAULT_GRID_NM
    else:
        cfg.validate(doc, "analyze")
        profiles = doc["profiles"]
        lambda0 = doc["lambda0_nm"] / cfg.NM if "lambda0_nm" in doc else LAMBDA0
        pitch = doc.get("pitch_um", 35.0) / cfg.UM
        step = doc["stencil_step_nm"] / cfg.NM if "stencil_step_nm" in doc else DEFAULT_STEP
        grid = doc.get("grid", DEFAULT_GRID_NM)
    try:
        built = [cfg.profile_from_dict(p) for p in profiles]
    except ValueError as exc:
        raise cfg.ConfigError(f"invalid profile: {exc}") from exc

    if args.format == "csv":
        k = args.core or 1
        if not 1 <= k <= len(built):
            raise cfg.ConfigError(f"--core {k} not in 1..{len(built)}")
        lams = np.linspace(grid["start_nm"], grid["stop_nm"], grid["points"]) / cfg.NM
        rows = ["wavelength_nm,n_eff,group_delay_ps_per_km,dispersion_ps_km_nm"]
        for p in wavelength_sweep(built[k - 1], FUSED_SILICA, lams, step):
            rows.append(f"{p.wavelength * 1e9:.9g},{p.n_eff:.12g},{p.tau_g:.9g},{p.D:.9g}")
        _emit("\n".join(rows) + "\n", args.output)
        return 0

    cores = tuple(CoreDesign.analyze(p, i + 1, lambda0, step=step) for i, p in enumerate(built))
    mcf = HeteroMCF(cores, pitch, lambda0=lambda0, delta_d_target=0.0)
    report = _report(mcf, doc)
    # analysed profiles carry no design target
    report["tolerance_flags"] = None
    report["delta_d_target_ps_km_nm"] = None
    _emit(_dump(report), args.output)
    return 0


# --- design ---------------------------------------------------------------

def cmd_design(args) -> int:
    doc = {"schema_version": cfg.SCHEMA_VERSION}
    if args.config is not None:
        doc = cfg.validate(cfg.load(args.config), "design")
    params = {k: v for k, v in doc.items() if k != "schema_version"}
    warnings = _homogeneous_warning(params)
    for w in warnings:
        print(f"warning: {w}", file=sys.stderr)
    try:
        mcf = _design(params)
    except DesignInfeasible as exc:
        raise CommandFailed(f"design infeasible at core {exc.core}, "
                            f"constraint {exc.constraint}: {exc}") from exc
    report = _report(mcf, doc, warnings)
    if args.format == "csv":
        keys = list(report["cores"][0])
        rows = [",".join(keys)] + [",".join(_fmt(c[k]) for k in keys) for c in report["cores"]]
        _emit("\n".join(rows) + "\n", args.output)
    else:
        _emit(_dump(report), args.output)
    failed = [k for k, ok in mcf.tolerance_flags().items() if not ok]
    if failed:
        raise CommandFailed("tolerance flags failed: " + ", ".join(failed))
    return 0


# --- tap sources ------------------------------------------------------------

def _taps_doc(args, doc_taps):
    """Merge command-line overrides into the tap-source section."""
    taps = dict(doc_taps) if isinstance(doc_taps, dict) else doc_taps
    if taps is None:
        if not args.paper_layout:
            raise cfg.ConfigError("give --config or --paper-layout")
        taps = {"source": "fbg" if args.diversity else "hetero"}
    src = taps.get("source") if isinstance(taps, dict) else None
    if src == "hetero":
        if args.lambda_nm is not None:
            taps["lambda_nm"] = args.lambda_nm
        if args.length_km is not None:
            taps["length_km"] = args.length_km
    elif src == "fbg":
        for flag, key in ((args.diversity, "diversity"), (args.core, "core"),
                          (args.channel, "channel")):
            if flag is not None:
                taps[key] = flag
    return taps


def _hetero_mcf(taps) -> HeteroMCF:
    if "cores" in taps:
        return cfg.mcf_from_report({"cores": taps["cores"]})
    if "design_report" in taps:
        report = cfg.load(taps["design_report"])
        cfg.validate(report, "report")
        return cfg.mcf_from_report(report)
    return _design(taps.get("design", {}))


def _hetero_taps(mcf: HeteroMCF, lambda_nm: float, length_km: float) -> TapSet:
    diff = [differential_delay(a, b, lambda_nm / cfg.NM, length_km)
            for a, b in zip(mcf.cores, mcf.cores[1:])]
    return TapSet.from_delays(np.concatenate([[0.0], np.cumsum(diff)]))


def _fbg_taps(taps, group_index=None) -> TapSet:
    layout = cfg.layout_from_dict(taps["layout"]) if "layout" in taps else canonical_paper_layout()
    n_g = group_index if group_index is not None else taps.get("group_index")
    if n_g is not None:
        layout = layout.with_group_index(n_g)
    mode = taps.get("diversity", "wavelength")
    if mode == "wavelength":
        key = taps.get("core", 6)
    else:
        key = taps.get("channel", 1)
    source = taps.get("amplitude_source", "weight")
    return TapSet(tap_delays(layout, mode, key), tap_amplitudes(layout, mode, key, source))


def _build_taps(taps, overrides=None) -> TapSet:
    overrides = overrides or {}
    src = taps["source"]
    if src == "explicit":
        return TapSet.from_delays(taps["delays_ps"], taps.get("amplitudes"))
    if src == "hetero":
        mcf = _hetero_mcf(taps)
        lam = overrides.get("lambda_nm", taps.get("lambda_nm", DEFAULT_LAMBDA_NM))
        length = overrides.get("length_km", taps.get("length_km", DEFAULT_LENGTH_KM))
        return _hetero_taps(mcf, lam, length)
    return _fbg_taps(taps, overrides.get("group_index"))


# --- filter -----------------------------------------------------------------

def cmd_filter(args) -> int:
    doc = {"schema_version": cfg.SCHEMA_VERSION}
    if args.config is not None:
        doc = cfg.load(args.config)
        if not isinstance(doc, dict):
            raise cfg.ConfigError("filter config must be a JSON object")
    doc = dict(doc)
    doc["taps"] = _taps_doc(args, doc.get("taps"))
    cfg.validate(doc, "filter")
    taps = _build_taps(doc["taps"])
    grid = doc.get("frequency", DEFAULT_FREQUENCY)
    if not grid["stop_ghz"] > grid["start_ghz"]:
        raise cfg.ConfigError("frequency grid needs stop_ghz > start_ghz")

    tap_fsr = None
    if taps.count >= 2:
        tap_fsr = fsr(taps)  # NonUniformSpacing -> exit 1
    resp = transfer_function(taps, grid["start_ghz"] * 1e9, grid["stop_ghz"] * 1e9,
                             grid["points"])

    def safe(fn):
        try:
            return fn(resp)
        except (InsufficientPeaks, EmptyOrSingleTap):
            return None

    line = (f"taps={taps.count} fsr_ghz={_fmt(tap_fsr)} "
            f"fsr_measured_ghz={_fmt(safe(measured_fsr))} "
            f"mslr_db={_fmt(safe(mslr))} bw3db_ghz={_fmt(safe(bandwidth_3db))}\n")
    _emit(resp.to_csv(), args.output)
    # keep stdout pure CSV when no output file is given
    (sys.stdout if args.output is not None else sys.stderr).write(line)
    return 0


# --- sweep ------------------------------------------------------------------

_SWEEP_SOURCES = {"lambda_nm": ("hetero", "fbg"), "length_km": ("hetero",),
                  "group_index": ("fbg",)}


def cmd_sweep(args) -> int:
    if args.config is not None:
        doc = cfg.load(args.config)
        if not isinstance(doc, dict):
            raise cfg.ConfigError("sweep config must be a JSON object")
    elif args.paper_layout:
        if args.diversity:
            doc = {"schema_version": cfg.SCHEMA_VERSION, "parameter": "group_index",
                   "start": 1.44, "stop": 1.50, "points": 13}
        else:
            doc = {"schema_version": cfg.SCHEMA_VERSION, "parameter": "lambda_nm",
                   "start": 1555.0, "stop": 1570.0, "points": 16}
    else:
        raise cfg.ConfigError("give --config or --paper-layout")
    doc = dict(doc)
    if "taps" in doc or args.paper_layout or args.diversity:
        doc["taps"] = _taps_doc(args, doc.get("taps"))
    else:
        doc["taps"] = {"source": "fbg" if doc.get("parameter") == "group_index" else "hetero"}
    cfg.validate(doc, "sweep")
    param = doc["parameter"]
    if doc["taps"]["source"] not in _SWEEP_SOURCES[param]:
        raise cfg.ConfigError(f"cannot sweep {param} with a {doc['taps']['source']} tap source")
    if not doc["stop"] > doc["start"]:
        raise cfg.ConfigError("empty sweep range: need stop > start")

    rows = [f"{param},fsr_ghz"]
    for v in np.linspace(doc["start"], doc["stop"], doc["points"]):
        try:
            value = fsr(_build_taps(doc["taps"], {param: float(v)}))
        except (TTDLError, ValueError) as exc:
            print(f"warning: {param} = {v:g}: {exc}", file=sys.stderr)
            value = None
        rows.append(f"{v:.9g},{_fmt(value)}")
    _emit("\n".join(rows) + "\n", args.output)
    return 0


# --- entry point --------------------------------------------------------------

COMMANDS = {"analyze": cmd_analyze, "design": cmd_design, "filter": cmd_filter,
            "sweep": cmd_sweep}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mcf-ttdl", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="JSON run configuration")
        p.add_argument("--output", help="write result here instead of stdout")
        p.add_argument("--format", choices=("json", "csv"), default=None)
        p.add_argument("--paper-layout", action="store_true",
                       help="use the built-in FBG layout and default fiber design")
        p.add_argument("--lambda-nm", type=float)
        p.add_argument("--length-km", type=float)
        p.add_argument("--diversity", choices=("spatial", "wavelength"))
        p.add_argument("--core", type=int)
        p.add_argument("--channel", type=int)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.ERROR, format="%(levelname)s: %(message)s")
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return COMMANDS[args.command](args)
    except (cfg.ConfigError, ChannelNotFound, CoreNotFound, InvalidLayout) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except CommandFailed as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (TTDLError, ValueError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
