"""Command-line runner: ``rabr <subcommand> --config <file> [--out <dir>]``.

Every run writes ``manifest.json`` into its output directory, including
runs that fail validation or abort numerically.  ``sweep`` fans a list of
configurations out over ``RABR_WORKERS`` worker processes, each with its
own output subdirectory.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from importlib import metadata
from pathlib import Path

import numpy as np

from . import dispersion as disp
from . import eit_sit
from .config import ConfigValidationError, ExperimentConfig
from .io import export_snapshot, import_snapshot, write_csv, write_manifest
from .model import DimensionlessParams, DomainError, Grid1D, ParameterError
from .propagate1d import (ConfigError, NumericalAbort, RunConfig, evolve, fidelity,
                          pushed_state, sine_gordon_evolve, soliton_census)
from .solitons import (bullet_constants, default_zv_grid, light_bullet_ansatz,
                       sit_sech_soliton, zv_soliton)

log = logging.getLogger("rabr")

WORKERS_ENV = "RABR_WORKERS"
SUBCOMMANDS = {
    "dispersion": "dispersion", "soliton": "soliton", "propagate1d": "propagate1d",
    "push": "push", "bullet": "bullet", "eitsit-design": "eitsit_design",
    "sine-gordon": "sine_gordon",
}
EXIT_OK, EXIT_CONFIG, EXIT_ABORT, EXIT_ERROR = 0, 2, 3, 4


def toolkit_version() -> str:
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:
        return "unknown"


DIAG_COLUMNS = ("tau", "area", "field_energy", "bloch_norm_error", "centroid",
                "peak_position", "peak_value")


def _write_diagnostics(out: Path, traj) -> Path:
    rows = zip(*(traj.diagnostics[k] for k in DIAG_COLUMNS))
    return write_csv(out / "diagnostics.csv", DIAG_COLUMNS, rows)


# ---------------------------------------------------------------------------
# runners: each returns (results, files)


def run_dispersion(p, out: Path):
    kappa = np.linspace(p["kappa_min"], p["kappa_max"], p["n_kappa"])
    spec = disp.spectrum(kappa, p["eta"], p["delta"])
    f = write_csv(out / "dispersion.csv", ("kappa", "branch", "chi"), spec.rows())
    res = disp.spectrum_residuals(spec)
    eta0, chi_p, chi_m = disp.kzero_frequencies(p["eta"], p["delta"])
    flat = [(float(k), "flat", p["delta"]) for k in kappa] if abs(p["eta"] - p["delta"]) > 1e-12 else []
    f2 = write_csv(out / "dispersion_flat.csv", ("kappa", "branch", "chi"), flat)
    return ({"max_relative_residual": float(res.max()), "n_points": int(len(res)),
             "chi0_eta": eta0, "chi0_plus": chi_p, "chi0_minus": chi_m,
             "gap_closing_eta": disp.gap_closing_eta(p["delta"])}, [f, f2])


def _zv_grid(p):
    if p["half_width"] is None:
        return default_zv_grid(p["chi"], p["eta"], p["delta"], n_zeta=p["n_zeta"])
    return Grid1D.centered(p["half_width"], p["n_zeta"])


def run_soliton(p, out: Path):
    prof = zv_soliton(p["chi"], p["eta"], p["delta"], _zv_grid(p))
    rows = zip(prof.zeta, prof.S, prof.Pcal, prof.Acal, prof.inversion())
    f1 = write_csv(out / "profile.csv", ("zeta", "S", "P", "A", "w"), rows)
    f2 = export_snapshot(prof.to_state(), out / "soliton.rabr")
    return ({"S_peak": prof.S_peak, "R0": prof.R0, "area": prof.area, **prof.meta}, [f1, f2])


def run_propagate1d(p, out: Path):
    prof = zv_soliton(p["chi"], p["eta"], p["delta"], _zv_grid(p))
    cfg = RunConfig(boundary=p["boundary"], spatial_scheme=p["scheme"], cfl=p["cfl"],
                    output_every=p["output_every"])
    state = pushed_state(prof, p["p"]) if p["p"] else prof.to_state()
    params = DimensionlessParams(p["eta"], p["delta"])
    traj = evolve(state, params, cfg, p["tau_end"])
    files = [_write_diagnostics(out, traj), export_snapshot(traj.final, out / "final.rabr")]
    files.append(write_csv(out / "profiles.csv", ("zeta", "initial_abs", "final_abs"),
                           zip(state.zeta, np.abs(state.sigma_plus),
                               np.abs(traj.final.sigma_plus))))
    return ({"fidelity": fidelity(state.sigma_plus, traj.final.sigma_plus),
             "max_bloch_norm_error": float(traj.series("bloch_norm_error").max()),
             "steps": traj.info["n_steps"]}, files)


def run_push(p, out: Path):
    grid = Grid1D.centered(p["half_width"], p["n_zeta"])
    prof = zv_soliton(p["chi"], p["eta"], p["delta"], grid)
    cfg = RunConfig(boundary=p["boundary"], cfl=p["cfl"], output_every=p["output_every"])
    state = pushed_state(prof, p["p"], p["push_medium"])
    traj = evolve(state, DimensionlessParams(p["eta"], p["delta"]), cfg, p["tau_end"])
    census = soliton_census(traj, cfg)
    files = [_write_diagnostics(out, traj), export_snapshot(traj.final, out / "final.rabr")]
    files.append(write_csv(out / "profiles.csv", ("zeta", "initial_abs", "final_abs"),
                           zip(state.zeta, np.abs(state.sigma_plus),
                               np.abs(traj.final.sigma_plus))))
    files.append(write_csv(out / "census.csv", ("position", "velocity", "peak"),
                           zip(census.positions, census.velocities, census.peaks)))
    return ({"soliton_count": census.count, "quiescent": census.quiescent,
             "moving": census.moving, "velocities": census.velocities,
             "positions": census.positions,
             "max_bloch_norm_error": float(traj.series("bloch_norm_error").max())}, files)


def bullet_setup(p):
    """Grids, initial state and run length of a light-bullet run."""
    from .propagate2d import FieldState2D, transverse_grid
    k = bullet_constants(p["eta"], p["delta"])
    C = p["C"]
    center = -p["theta0"] / k["beta"]
    x_len = p["x_length"] or (16 / C if C > 0 else 160.0)
    zmax = p["zeta_max"] if p["zeta_max"] is not None else center + 25
    zmin = p["zeta_min"] if p["zeta_min"] is not None else center - p["z_target"] - 25
    zeta = zmin + (zmax - zmin) / p["n_zeta"] * np.arange(p["n_zeta"])
    x = transverse_grid(x_len, p["n_x"])
    ref = light_bullet_ansatz(p["eta"], p["delta"], C, p["theta0"], zeta, x, medium=p["medium"])
    tau_end = p["z_target"] / abs(k["v"])
    return ref, FieldState2D.from_bullet(ref), tau_end


def run_bullet(p, out: Path):
    from .propagate2d import evolve2d
    ref, state, tau_end = bullet_setup(p)
    if p["restart"]:
        state = import_snapshot(p["restart"], expect_shape=state.sigma_plus.shape)
    cfg = RunConfig(cfl=p["cfl"], output_every=p["output_every"])
    checkpoint = out / "checkpoint.rabr"

    def save_checkpoint(st, traj):
        # long runs can be resumed from here with the "restart" key
        if len(traj.times) % 20 == 0:
            export_snapshot(st, checkpoint)

    traj = evolve2d(state, DimensionlessParams(p["eta"], p["delta"]), cfg, tau_end,
                    reference=lambda _t: ref, progress=save_checkpoint)
    v = ref.v
    z0 = traj.diagnostics["peak_position"][0]
    files = [write_csv(out / "fidelity.csv",
                       ("tau", "z", "fidelity", "peak_position", "peak_value", "bloch_norm_error"),
                       zip(traj.times, np.abs(np.asarray(traj.series("peak_position")) - z0),
                           traj.diagnostics["fidelity"], traj.diagnostics["peak_position"],
                           traj.diagnostics["peak_value"], traj.diagnostics["bloch_norm_error"]))]
    final = traj.final
    zc = traj.diagnostics["peak_position"][-1]
    mag = np.abs(final.sigma_plus)
    # a rigidly moving pulse passes a fixed point at tau = tau_end + (zeta - zc)/v
    rows = ((z, xx, final.tau + (z - zc) / v, mag[i, j])
            for i, z in enumerate(final.zeta) for j, xx in enumerate(final.x))
    files.append(write_csv(out / "slice.csv", ("zeta", "x", "tau_equiv", "abs_sigma_plus"), rows))
    files.append(export_snapshot(final, out / "final.rabr"))
    t = np.asarray(traj.times)
    pos = traj.series("peak_position")
    return ({"fidelity": traj.diagnostics["fidelity"][-1], "tau_end": tau_end,
             "z_travelled": float(abs(pos[-1] - pos[0])),
             "measured_velocity": float(np.polyfit(t, pos, 1)[0]),
             "ansatz_velocity": v,
             "max_bloch_norm_error": float(traj.series("bloch_norm_error").max())}, files)


def run_eitsit(p, out: Path):
    z = p.pop("z")
    params = eit_sit.EitSitParams(**p)
    rep = eit_sit.design_report(params, z)
    f1 = out / "design.json"
    f1.write_text(json.dumps(rep.to_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8")
    f2 = out / "design.txt"
    f2.write_text(rep.table() + "\n", encoding="utf-8")
    return ({**rep.values, "accepted": rep.accepted, "flags": rep.flags}, [f1, f2])


def run_sine_gordon(p, out: Path):
    sol = sit_sech_soliton(p["beta"])
    v = sol.velocity
    zmax = p["zeta_max"] if p["zeta_max"] is not None else v * p["tau_end"] + 20
    zeta = np.linspace(p["zeta_min"], zmax, p["n_zeta"], endpoint=False)
    probe = p["probe"] if p["probe"] is not None else 0.5 * v * p["tau_end"]
    run = sine_gordon_evolve(sol.area_phase(zeta), zeta, p["tau_end"],
                             output_every=p["output_every"], probe=probe)
    files = [write_csv(out / "track.csv", ("tau", "peak_position"),
                       zip(run.times, run.peak_positions))]
    files.append(write_csv(out / "final.csv", ("zeta", "theta", "rabi"),
                           zip(zeta, run.theta[-1], run.rabi[-1])))
    return ({"velocity": run.velocity(), "expected_velocity": v,
             "temporal_area": run.probe_area, "probe": float(zeta[run.probe_index])}, files)


RUNNERS = {
    "dispersion": run_dispersion, "soliton": run_soliton, "propagate1d": run_propagate1d,
    "push": run_push, "bullet": run_bullet, "eitsit_design": run_eitsit,
    "sine_gordon": run_sine_gordon,
}


def run(config: ExperimentConfig, out_dir=None) -> tuple[int, dict]:
    """Execute one experiment and always leave a manifest behind."""
    out = Path(out_dir or config.output_dir or f"rabr_{config.kind}")
    out.mkdir(parents=True, exist_ok=True)
    manifest = {"kind": config.kind, "inputs": config.to_dict(), "version": toolkit_version(),
                "status": "running"}
    t0 = time.perf_counter()
    code = EXIT_OK
    try:
        results, files = RUNNERS[config.kind](dict(config.params), out)
        manifest.update(status="ok", results=results,
                        outputs=sorted(Path(f).name for f in files))
    except NumericalAbort as exc:
        code = EXIT_ABORT
        manifest.update(status="aborted", error=str(exc))
        traj = exc.trajectory
        if traj is not None and hasattr(traj, "diagnostics") and "area" in traj.diagnostics:
            manifest["outputs"] = [_write_diagnostics(out, traj).name]
    except (ParameterError, DomainError, ConfigError, ValueError) as exc:
        code = EXIT_CONFIG
        manifest.update(status="invalid", error=str(exc))
    except Exception as exc:  # noqa: BLE001 - recorded in the manifest, then re-raised
        manifest.update(status="error", error=repr(exc))
        manifest["wall_time_s"] = time.perf_counter() - t0
        write_manifest(out / "manifest.json", manifest)
        raise
    manifest["wall_time_s"] = time.perf_counter() - t0
    write_manifest(out / "manifest.json", manifest)
    return code, manifest


def _sweep_worker(args):
    data, out = args
    try:
        cfg = ExperimentConfig.from_dict(data)
    except ConfigValidationError as exc:
        Path(out).mkdir(parents=True, exist_ok=True)
        m = {"status": "invalid", "error": str(exc), "inputs": data, "version": toolkit_version()}
        write_manifest(Path(out) / "manifest.json", m)
        return EXIT_CONFIG, m
    return run(cfg, out)


def worker_count() -> int:
    raw = os.environ.get(WORKERS_ENV, "1")
    try:
        n = int(raw)
    except ValueError:
        raise ConfigValidationError(WORKERS_ENV, f"expected an integer, got {raw!r}") from None
    if n < 1:
        raise ConfigValidationError(WORKERS_ENV, "must be >= 1")
    return n


def run_sweep(data: dict, out_dir) -> tuple[int, dict]:
    """Run every config in ``data["runs"]`` into ``out_dir/run_NNN``; results are worker-independent."""
    if not isinstance(data, dict) or set(data) - {"kind", "runs"} or "runs" not in data:
        raise ConfigValidationError("<root>", 'sweep config needs exactly {"runs": [...]}')
    if data.get("kind", "sweep") != "sweep":
        raise ConfigValidationError("kind", "must be 'sweep'")
    runs = data["runs"]
    if not isinstance(runs, list) or not runs:
        raise ConfigValidationError("runs", "must be a non-empty list")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    jobs = [(r, str(out / f"run_{i:03d}")) for i, r in enumerate(runs)]
    n = worker_count()
    if n == 1:
        results = [_sweep_worker(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=n) as pool:
            results = list(pool.map(_sweep_worker, jobs))
    codes = [c for c, _ in results]
    summary = {"kind": "sweep", "version": toolkit_version(), "workers": n,
               "runs": [{"dir": Path(d).name, "status": m.get("status")}
                        for (_, d), (_, m) in zip(jobs, results)],
               "status": "ok" if all(c == EXIT_OK for c in codes) else "partial"}
    write_manifest(out / "manifest.json", summary)
    return max(codes), summary


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="rabr", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)
    for name in list(SUBCOMMANDS) + ["sweep"]:
        sp = sub.add_parser(name)
        sp.add_argument("--config", required=True, help="JSON configuration file")
        sp.add_argument("--out", default=None, help="output directory")
        sp.add_argument("-v", "--verbose", action="store_true")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "sweep":
            data = json.loads(Path(args.config).read_text(encoding="utf-8"))
            out = Path(args.out or "rabr_sweep")
            code, manifest = run_sweep(data, out)
        else:
            cfg = ExperimentConfig.load(args.config, SUBCOMMANDS[args.command])
            out = Path(args.out or cfg.output_dir or f"rabr_{cfg.kind}")
            code, manifest = run(cfg, out)
    except ConfigValidationError as exc:
        out = Path(args.out or "rabr_invalid")
        out.mkdir(parents=True, exist_ok=True)
        write_manifest(out / "manifest.json", {"status": "invalid", "error": str(exc),
                                               "key": exc.path, "version": toolkit_version()})
        print(f"rabr: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (OSError, json.JSONDecodeError) as exc:
        print(f"rabr: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001 - the manifest already records it
        log.exception("run failed")
        print(f"rabr: error: {exc!r}", file=sys.stderr)
        return EXIT_ERROR
    if code != EXIT_OK:
        print(f"rabr: {manifest.get('status')}: {manifest.get('error', '')}", file=sys.stderr)
    else:
        print(out / "manifest.json")
    return code


if __name__ == "__main__":
    sys.exit(main())
