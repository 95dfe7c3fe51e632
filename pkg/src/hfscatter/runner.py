"""Execute one configured run and write its artifacts."""

from __future__ import annotations

import warnings
from pathlib import Path

import numpy as np

from . import __version__, diagnostics, io
from .config import RunConfig
from .integrator import WrapAroundWarning, evolve, prepare_initial
from .nonlinearity import RhsMode

__all__ = ["execute_run", "run_report"]


def _header(config: RunConfig, mode: RhsMode) -> dict:
    return {
        "artifact_version": __version__,
        "config_hash": config.hash,
        "grid": {"n_points": config.grid.n, "length": config.grid.length},
        "potential": dict(config.raw["potential"]),
        "mode": mode.value,
        "seed": config.seed,
    }


def _cauchy_series(profiles, times, fit):
    """Distances between profile pairs (t, 2t) with both on the snapshot set."""
    series = []
    for i, t in enumerate(times):
        if t < fit.window[0] - 1e-9 or 2.0 * t > times[-1] + 1e-9:
            continue
        matches = np.nonzero(np.abs(times - 2.0 * t) <= 1e-6 * max(t, 1.0))[0]
        if len(matches) == 0:
            continue
        d = diagnostics.scattering_cauchy(profiles[i], profiles[int(matches[0])], fit)
        series.append((float(t), d.d_inf, d.d_theta0, d.d_0theta))
    return series


def run_report(config: RunConfig, mode: RhsMode | None = None) -> tuple[dict, object, list]:
    """Evolve under the config and assemble the diagnostics report.

    Returns (report, trajectory, records).
    """
    mode = config.mode if mode is None else mode
    initial = prepare_initial(config.packets, config.grid)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", WrapAroundWarning)
        traj = evolve(config.integrator, initial, config.potential, mode,
                      metadata={"config_hash": config.hash, "mode": mode.value,
                                "potential": dict(config.raw["potential"])})
    recs = diagnostics.records(traj)
    profiles = diagnostics.trajectory_profiles(traj)
    times = traj.times
    fit = config.fit

    report: dict = dict(_header(config, mode))
    m0 = traj.snapshots[0].trace_mass()
    report["mass_drift"] = (
        0.0 if m0 == 0.0 else
        max(abs(s.trace_mass() - m0) / m0 for s in traj.snapshots))
    report["gram_drift"] = max(r.gram_drift for r in recs)
    report["boundary_mass_max"] = max(r.boundary_mass_fraction for r in recs)

    try:
        sup_fit = diagnostics.decay_fit(
            [(r.t, r.sup_norm) for r in recs], fit.window)
        report["sup_decay_exponent"] = sup_fit.as_dict()
    except diagnostics.DiagnosticsError:
        report["sup_decay_exponent"] = None

    cauchy = _cauchy_series(profiles, times, fit)
    report["cauchy_distances"] = [list(row) for row in cauchy]
    try:
        cfit = diagnostics.decay_fit([(t, d) for t, d, _, _ in cauchy],
                                     (fit.window[0], times[-1]))
        report["cauchy_exponent"] = cfit.as_dict()
    except diagnostics.DiagnosticsError:
        report["cauchy_exponent"] = None

    if len(traj) >= 4:
        osc = diagnostics.operator_scattering(traj)
        report["s1_distances"] = [[float(t), float(d)]
                                  for t, d in osc.distances[:-1]]
    else:
        report["s1_distances"] = []

    if config.phase_probe is not None:
        tail = [p for p in profiles if p.t >= fit.window[0] - 1e-9]
        try:
            pd = diagnostics.phase_drift(tail, config.phase_probe)
            report["phase_drift"] = {"slope": pd.slope, "stderr": pd.stderr,
                                     "xi_probe": pd.xi_probe}
        except diagnostics.DiagnosticsError:
            report["phase_drift"] = None
    else:
        report["phase_drift"] = None

    try:
        st = diagnostics.spacetime_norm(traj, fit)
        report["spacetime_norm"] = {
            "sup_component": st.sup_component,
            "grad_component": st.grad_component,
            "weight_component": st.weight_component,
            "mass_component": st.mass_component,
            "combined": st.combined,
        }
    except diagnostics.DiagnosticsError:
        report["spacetime_norm"] = None
    return report, traj, recs


def execute_run(config: RunConfig, outdir: str | Path,
                mode: RhsMode | None = None) -> dict:
    """Run and write checkpoint, NDJSON, CSV, and report into outdir."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    mode = config.mode if mode is None else mode
    report, traj, recs = run_report(config, mode)
    header = _header(config, mode)
    io.write_checkpoint(outdir / "checkpoint.hfsc", traj, header)
    io.write_ndjson(outdir / "diagnostics.ndjson", header, recs)
    io.write_csv(outdir / "diagnostics.csv", recs, header)
    io.write_report(outdir / "report.json", report)
    return report
