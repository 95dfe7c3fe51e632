"""Command-line entry points: run, compare, verify, fit.

Exit codes: 0 success, 1 verification failure, 2 configuration error,
3 numerical abort.  Errors are reported as single-line JSON on stdout.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from importlib import resources
from pathlib import Path

from . import __version__, diagnostics, io, verify
from .config import ConfigError, RunConfig, load_config
from .integrator import IntegrationAbort
from .nonlinearity import RhsMode
from .runner import execute_run

OUTPUT_ROOT_ENV = "HFSCATTER_OUTPUT_ROOT"


def _emit(obj) -> None:
    print(json.dumps(obj, sort_keys=True))


def _resolve_config_path(name: str) -> Path:
    path = Path(name)
    if path.exists():
        return path
    if not name.endswith(".toml"):
        candidate = Path(name + ".toml")
        if candidate.exists():
            return candidate
    preset = resources.files("hfscatter.presets") / (
        name if name.endswith(".toml") else name + ".toml")
    if preset.is_file():
        return Path(str(preset))
    raise ConfigError("config", f"no such config file or preset: {name}")


def _output_dir(config: RunConfig, cli_out: str | None, stem: str) -> Path:
    if cli_out:
        return Path(cli_out)
    if config.output_dir:
        return Path(config.output_dir)
    root = os.environ.get(OUTPUT_ROOT_ENV, "runs")
    return Path(root) / stem


def cmd_run(args) -> int:
    try:
        path = _resolve_config_path(args.config)
        config = load_config(path)
    except ConfigError as exc:
        _emit({"error": "config", "field": exc.field, "message": exc.message})
        return 2
    outdir = _output_dir(config, args.out, path.stem)
    try:
        report = execute_run(config, outdir)
    except IntegrationAbort as exc:
        _emit({"error": "numerical_abort", "t": exc.t, "message": exc.detail})
        return 3
    _emit({"status": "ok", "output_dir": str(outdir),
           "config_hash": report["config_hash"]})
    return 0


def cmd_compare(args) -> int:
    try:
        path = _resolve_config_path(args.config)
        config = load_config(path)
    except ConfigError as exc:
        _emit({"error": "config", "field": exc.field, "message": exc.message})
        return 2
    outdir = _output_dir(config, args.out, path.stem + "-compare")
    outdir.mkdir(parents=True, exist_ok=True)
    warning = None
    if config.mode is RhsMode.LINEAR:
        # degenerate request: no nonlinearity on either side of the contrast
        modes = {"a": RhsMode.LINEAR, "b": RhsMode.LINEAR}
        warning = "config mode is 'linear'; compare contrasts nothing"
    else:
        modes = {"hf": RhsMode.HARTREE_FOCK, "rh": RhsMode.REDUCED_HARTREE}
    reports = {}
    try:
        for label, mode in modes.items():
            reports[label] = execute_run(config, outdir / label, mode=mode)
    except IntegrationAbort as exc:
        _emit({"error": "numerical_abort", "t": exc.t, "message": exc.detail})
        return 3

    def _slope(rep):
        pd = rep.get("phase_drift")
        return None if pd is None else pd["slope"]

    labels = list(modes)
    slope_a, slope_b = _slope(reports[labels[0]]), _slope(reports[labels[1]])
    ratio = None
    if (warning is None and slope_a is not None and slope_b is not None
            and slope_b != 0.0):
        ratio = abs(slope_a) / abs(slope_b)
    if warning is None and ratio is None:
        warning = "phase drift undefined on at least one branch"
    paired = {
        "artifact_version": __version__,
        "config_hash": config.hash,
        "branches": {lbl: {
            "mode": reports[lbl]["mode"],
            "phase_drift": reports[lbl]["phase_drift"],
            "cauchy_exponent": reports[lbl]["cauchy_exponent"],
            "cauchy_distances": reports[lbl]["cauchy_distances"],
            "sup_decay_exponent": reports[lbl]["sup_decay_exponent"],
        } for lbl in labels},
        "slope_ratio": ratio,
        "warning": warning,
    }
    io.write_report(outdir / "compare.json", paired)
    _emit({"status": "ok", "output_dir": str(outdir), "slope_ratio": ratio,
           "warning": warning})
    return 0


def cmd_verify(args) -> int:
    ok, results = verify.run_suite(args.level, emit=_emit)
    if not ok:
        failed = [r["check"] for r in results if not r["passed"]]
        _emit({"status": "fail", "failed_checks": failed})
        return 1
    _emit({"status": "ok", "checks": len(results)})
    return 0


def cmd_fit(args) -> int:
    ndjson = Path(args.run_dir) / "diagnostics.ndjson"
    if not ndjson.exists():
        _emit({"error": "missing_data", "message": f"{ndjson} not found"})
        return 2
    _, rows = io.read_ndjson(ndjson)
    if not rows or args.quantity not in rows[0]:
        _emit({"error": "missing_data",
               "message": f"quantity {args.quantity!r} not in diagnostics"})
        return 2
    try:
        lo, hi = (float(v) for v in args.window.split(":"))
        fit = diagnostics.decay_fit(
            [(row["t"], row[args.quantity]) for row in rows], (lo, hi))
    except (ValueError, diagnostics.DiagnosticsError) as exc:
        _emit({"error": "fit", "message": str(exc)})
        return 2
    _emit({"quantity": args.quantity, **fit.as_dict()})
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hfscatter",
        description="Pseudospectral Hartree-Fock scattering experiments")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one configured evolution")
    p_run.add_argument("config", help="config TOML path or preset name")
    p_run.add_argument("--out", help="output directory")
    p_run.set_defaults(func=cmd_run)

    p_cmp = sub.add_parser(
        "compare",
        help="run identical data with and without the exchange term")
    p_cmp.add_argument("config")
    p_cmp.add_argument("--out")
    p_cmp.set_defaults(func=cmd_compare)

    p_ver = sub.add_parser("verify", help="run the built-in check suite")
    p_ver.add_argument("--level", choices=("fast", "full"), default="fast")
    p_ver.set_defaults(func=cmd_verify)

    p_fit = sub.add_parser("fit", help="fit a decay exponent from a run")
    p_fit.add_argument("run_dir")
    p_fit.add_argument("--quantity", default="sup_norm")
    p_fit.add_argument("--window", default="4:64", help="t_lo:t_hi")
    p_fit.set_defaults(func=cmd_fit)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
