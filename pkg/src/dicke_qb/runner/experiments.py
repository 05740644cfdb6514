"""Trajectory simulation and the experiment modes behind the CLI."""
from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np

from .. import __version__
from ..dynamics import TimeGrid, invariant_blocks, iter_krylov, iter_spectral, top_population
from ..errors import DickeQBError, InvalidParameterError, TruncationError
from ..groundstate import PhasePoint, curvature_peak, first_below, scan_points
from ..hilbert import DensityMatrix, JointState, partial_trace
from ..model import ModelParams, build_system, initial_joint_state, auto_n_max
from ..observables import ObservableRecord, TrajectorySummary, record, summarize
from ..phasespace import photon_distribution, wigner
from .config import ExperimentConfig
from .io import write_csv, write_sidecar

log = logging.getLogger(__name__)

SPECTRAL_BLOCK_LIMIT = 2000
LEAK_TOL = 1e-6
MAX_CUTOFF_RETRIES = 4


@dataclass
class EvolveResult:
    params: ModelParams  # n_max resolved
    records: list[ObservableRecord]
    summary: TrajectorySummary
    method: str
    leakage: float
    norm_error: float
    energy_drift: float
    cutoffs_tried: list[int] = field(default_factory=list)
    peak_state: Optional[JointState] = None

    @property
    def n_max(self) -> int:
        return self.params.n_max

    def rho_A_at_peak(self) -> DensityMatrix:
        if self.peak_state is None:
            raise InvalidParameterError("simulation was run without keep_peak_state")
        return partial_trace(self.peak_state, "cavity")

    def invariants(self) -> dict[str, bool]:
        E = np.array([r.E_B for r in self.records])
        W = np.array([r.ergotropy for r in self.records])
        L = np.array([r.E_locked for r in self.records])
        return {
            "norm": self.norm_error < 1e-8,
            "energy_conservation": self.energy_drift < 1e-8,
            "energy_split": bool(np.max(np.abs(E - W - L)) < 1e-9),
            "ergotropy_bounds": bool(np.all(W >= 0) and np.all(W <= E + 1e-12)),
            "initial_entropy_zero": self.records[0].S < 1e-10,
            "truncation": self.leakage < LEAK_TOL,
        }

    def diagnostics(self) -> dict:
        return {
            "n_max": self.n_max,
            "cutoffs_tried": self.cutoffs_tried,
            "method": self.method,
            "truncation_leakage": self.leakage,
            "norm_error": self.norm_error,
            "energy_drift": self.energy_drift,
            "invariants": self.invariants(),
            "summary": self.summary.to_dict(),
        }


def _run_once(params: ModelParams, n_max: int, grid: TimeGrid, method: str, krylov_dim: int,
              keep_peak_state: bool, refine: bool):
    system = build_system(params, n_max)
    psi0 = initial_joint_state(params, system.cavity)
    H = system.hamiltonian()
    if method == "auto":
        largest = max(len(b) for b in invariant_blocks(H, psi0.amplitudes))
        method = "spectral" if largest <= SPECTRAL_BLOCK_LIMIT else "krylov"
    times = grid.samples
    if method == "spectral":
        stream = iter_spectral(H, psi0, times)
    else:
        stream = iter_krylov(H, psi0, times, krylov_dim=krylov_dim)

    HB = system.H_B_atomic
    eps = np.sort(np.real(np.diag(HB.dense())))
    Hm = H.matrix
    E0 = float(np.vdot(psi0.amplitudes, Hm @ psi0.amplitudes).real)
    cav, atm = system.cavity.dim, system.atoms.dim
    records = []
    leak = norm_err = drift = 0.0
    best, peak = -np.inf, None
    for k, psi in stream:
        state = JointState(psi, system.cavity, system.atoms)
        rec = record(float(times[k]), state, HB, eps)
        records.append(rec)
        leak = max(leak, top_population(psi, cav, atm))
        norm_err = max(norm_err, abs(np.linalg.norm(psi) - 1.0))
        e = float(np.vdot(psi, Hm @ psi).real)
        drift = max(drift, abs(e - E0) / max(abs(E0), 1e-300))
        if keep_peak_state and rec.E_B > best:
            best, peak = rec.E_B, state
    result = EvolveResult(
        params=params.with_(n_max=n_max), records=records, summary=summarize(records, refine),
        method=method, leakage=leak, norm_error=norm_err, energy_drift=drift, peak_state=peak,
    )
    return result


def simulate(params: ModelParams, grid: Optional[TimeGrid] = None, method: str = "auto",
             krylov_dim: int = 30, keep_peak_state: bool = False, refine: bool = False) -> EvolveResult:
    """Evolve one charger configuration and reduce it to observables.

    With an automatic cutoff the run is repeated with ``n_max`` enlarged by
    half whenever more than ``LEAK_TOL`` of probability reaches the top three
    Fock levels; a fixed cutoff raises :class:`TruncationError` instead.
    """
    grid = grid or TimeGrid()
    fixed = params.n_max
    n = fixed or auto_n_max(params)
    tried = []
    for _ in range(MAX_CUTOFF_RETRIES + 1):
        tried.append(n)
        result = _run_once(params, n, grid, method, krylov_dim, keep_peak_state, refine)
        if result.leakage < LEAK_TOL:
            result.cutoffs_tried = tried
            return result
        if fixed is not None:
            raise TruncationError(
                f"{params.charger_kind} run with n_max={n}: population {result.leakage:.2e} "
                f"in the top Fock levels exceeds {LEAK_TOL:.0e}"
            )
        log.info("cutoff %d leaks %.2e; retrying", n, result.leakage)
        n = int(math.ceil(1.5 * n))
    raise TruncationError(f"population in the top Fock levels still above {LEAK_TOL:.0e} at n_max={tried[-1]}")


# --------------------------------------------------------------------------
# execution helpers


def parallel_map(func: Callable, tasks: Sequence, workers: int = 1) -> list:
    """Ordered map; results land in the slot of their task."""
    if workers <= 1 or len(tasks) <= 1:
        return [func(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=min(workers, len(tasks))) as pool:
        return list(pool.map(func, tasks))


def _base_payload(config: ExperimentConfig) -> dict:
    return {
        "config": config.to_dict(),
        "config_hash": config.digest(),
        "code_version": __version__,
        "mode": config.mode,
    }


def _grid(lo: float, hi: float, n: int) -> np.ndarray:
    if n == 1 or lo == hi:
        return np.array([float(lo)])
    return np.round(lo + (hi - lo) * np.arange(n) / (n - 1), 12)


# --------------------------------------------------------------------------
# evolve


def _evolve_task(args):
    params, grid, method, krylov_dim, refine = args
    return simulate(params, grid, method, krylov_dim, refine=refine)


def run_evolve(config: ExperimentConfig) -> dict[str, EvolveResult]:
    """One trajectory CSV (plus sidecar) per charger kind."""
    grid = config.time_grid()
    tasks = [
        (config.model_params(charger_kind=k), grid, config.method, config.krylov_dim, config.refine_peaks)
        for k in config.charger_kinds
    ]
    results = parallel_map(_evolve_task, tasks, config.workers)
    out = Path(config.out)
    for kind, res in zip(config.charger_kinds, results):
        path = write_csv(out / f"evolve_{kind}.csv", ObservableRecord.columns(),
                         (r.as_tuple() for r in res.records))
        payload = _base_payload(config)
        payload.update(charger=kind, **res.diagnostics())
        write_sidecar(path, payload)
    return dict(zip(config.charger_kinds, results))


# --------------------------------------------------------------------------
# sweeps

SUMMARY_COLUMNS = TrajectorySummary.columns()


def _summary_task(args):
    params, grid, method, krylov_dim, refine = args
    try:
        res = simulate(params, grid, method, krylov_dim, refine=refine)
    except DickeQBError as exc:
        return [math.nan] * len(SUMMARY_COLUMNS), params.n_max or 0, f"{type(exc).__name__}: {exc}"
    s = res.summary
    return [getattr(s, c) for c in SUMMARY_COLUMNS], res.n_max, ""


def coupling_points(config: ExperimentConfig) -> list[tuple[float, float]]:
    """Row-major grid (``g23`` outer) plus any probe point that is off-grid."""
    g12s = _grid(*config.g12_range, config.resolution)
    g23s = _grid(*config.g23_range, config.resolution)
    points = [(float(a), float(b)) for b in g23s for a in g12s]
    on_grid = set(points)
    for p in config.coupling_points:
        if tuple(p) not in on_grid:
            points.append((float(p[0]), float(p[1])))
    return points


def run_sweep_coupling(config: ExperimentConfig) -> Path:
    grid = config.time_grid()
    points = coupling_points(config)
    keys = [(p, k) for p in points for k in config.charger_kinds]
    tasks = [
        (config.model_params(g12=p[0], g23=p[1], charger_kind=k), grid, config.method,
         config.krylov_dim, config.refine_peaks)
        for p, k in keys
    ]
    results = parallel_map(_summary_task, tasks, config.workers)
    rows = [[p[0], p[1], k, *vals, n, err] for (p, k), (vals, n, err) in zip(keys, results)]
    path = write_csv(Path(config.out) / "sweep_coupling.csv",
                     ["g12", "g23", "charger", *SUMMARY_COLUMNS, "n_max", "error"], rows)
    payload = _base_payload(config)
    payload.update(rows=len(rows), failed=sum(1 for r in results if r[2]),
                   n_max_used=sorted({r[1] for r in results}),
                   invariants=_sweep_invariants(results))
    write_sidecar(path, payload)
    return path


def _sweep_invariants(results) -> dict[str, bool]:
    vals = np.array([r[0] for r in results if not r[2]], dtype=float)
    if vals.size == 0:
        return {"ratios_in_unit_interval": False, "no_failures": False}
    iRe, iRp = SUMMARY_COLUMNS.index("R_e"), SUMMARY_COLUMNS.index("R_p")
    ratios = vals[:, [iRe, iRp]]
    return {
        "ratios_in_unit_interval": bool(np.all((ratios >= 0) & (ratios <= 1 + 1e-12))),
        "no_failures": all(not r[2] for r in results),
    }


def run_sweep_n(config: ExperimentConfig) -> Path:
    grid = config.time_grid()
    Ns = list(range(int(config.N_range[0]), int(config.N_range[1]) + 1))
    keys = [(N, k) for N in Ns for k in config.charger_kinds]
    # a fixed cutoff cannot serve every N; the N sweep always sizes it per point
    tasks = [
        (config.model_params(N=N, charger_kind=k, n_max=None), grid, config.method,
         config.krylov_dim, config.refine_peaks)
        for N, k in keys
    ]
    results = parallel_map(_summary_task, tasks, config.workers)
    rows = [[N, k, *vals, n, err] for (N, k), (vals, n, err) in zip(keys, results)]
    path = write_csv(Path(config.out) / "sweep_n.csv",
                     ["N", "charger", *SUMMARY_COLUMNS, "n_max", "error"], rows)
    payload = _base_payload(config)
    payload.update(rows=len(rows), failed=sum(1 for r in results if r[2]),
                   n_max_used=[r[1] for r in results], invariants=_sweep_invariants(results))
    write_sidecar(path, payload)
    return path


# --------------------------------------------------------------------------
# ground state


def _ground_task(args):
    params, points = args
    try:
        return scan_points(points, params), ""
    except DickeQBError as exc:
        return [], f"{type(exc).__name__}: {exc}"


def ground_scans(config: ExperimentConfig) -> list[tuple[str, list[tuple[float, float]]]]:
    g12s = _grid(*config.g12_range, config.ground_resolution)
    scans = [(f"g23={g23:g}", [(float(a), float(g23)) for a in g12s]) for g23 in config.ground_g23_values]
    if config.ground_diagonal:
        scans.append(("diagonal", [(float(a), float(a)) for a in g12s]))
    return scans


def concavity_violation(points: Sequence[PhasePoint]) -> float:
    """Largest amount by which a line of ground energies fails to be concave."""
    E = np.array([p.E_g for p in points])
    if E.size < 3:
        return 0.0
    return float(max(0.0, np.max(E[:-2] - 2 * E[1:-1] + E[2:]) / 2))


def run_ground(config: ExperimentConfig) -> tuple[Path, dict[str, list[PhasePoint]]]:
    params = config.model_params(charger_kind="coherent")
    scans = ground_scans(config)
    results = parallel_map(_ground_task, [(params, pts) for _, pts in scans], config.workers)
    rows, by_scan, errors = [], {}, {}
    for (name, _), (pts, err) in zip(scans, results):
        by_scan[name] = pts
        if err:
            errors[name] = err
        rows.extend([name, p.g12, p.g23, p.E_g, p.phase, p.n_max] for p in pts)
    path = write_csv(Path(config.out) / "ground.csv", ["scan", "g12", "g23", "E_g", "phase", "n_max"], rows)

    all_pts = [p for pts in by_scan.values() for p in pts]
    invariants = {
        "zero_coupling_exact": all(p.E_g == 0.0 for p in all_pts if p.g12 == 0 and p.g23 == 0),
        "variational_bound": all(p.E_g <= 1e-9 for p in all_pts),
        "concavity": all(concavity_violation(pts) <= 1e-8 for pts in by_scan.values()),
        "no_failures": not errors,
    }
    payload = _base_payload(config)
    payload.update(invariants=invariants, errors=errors,
                   concavity_violation={k: concavity_violation(v) for k, v in by_scan.items()})
    if "diagonal" in by_scan and by_scan["diagonal"]:
        diag = by_scan["diagonal"]
        below = first_below(diag, 1e-4)
        bend = curvature_peak(diag)
        payload["diagonal"] = {
            "first_below_1e-4": None if below is None else below.g12,
            "sharpest_bend": None if bend is None else bend.g12,
        }
    write_sidecar(path, payload)
    return path, by_scan


# --------------------------------------------------------------------------
# phase space


def _phase_task(args):
    params, grid, method, krylov_dim, pgrid, with_wigner = args
    res = simulate(params, grid, method, krylov_dim, keep_peak_state=True)
    rho_A = res.rho_A_at_peak()
    dist = photon_distribution(rho_A)
    wmap = wigner(rho_A, pgrid) if with_wigner else None
    return res.summary, res.diagnostics(), dist, wmap


def _tag(kind: str, g12: float, g23: float) -> str:
    return f"{kind}_g{g12:g}-{g23:g}"


def run_wigner(config: ExperimentConfig, with_wigner: bool = True) -> dict:
    """Charger state at the time of maximal stored energy, per kind and coupling point."""
    grid = config.time_grid()
    pgrid = config.phase_grid()
    keys = [(k, tuple(p)) for p in config.coupling_points for k in config.charger_kinds]
    tasks = [
        (config.model_params(g12=p[0], g23=p[1], charger_kind=k), grid, config.method,
         config.krylov_dim, pgrid, with_wigner)
        for k, p in keys
    ]
    results = parallel_map(_phase_task, tasks, config.workers)
    out = Path(config.out)
    collected = {}
    for (kind, (g12, g23)), (summary, diag, dist, wmap) in zip(keys, results):
        tag = _tag(kind, g12, g23)
        payload = _base_payload(config)
        payload.update(charger=kind, g12=g12, g23=g23, t_E=summary.t_E, E_max=summary.E_max,
                       odd_photon_mass=dist.odd_mass(), mean_photons=dist.mean(), **diag)
        path = write_csv(out / f"photons_{tag}.csv", ["n", "p"], zip(dist.n.tolist(), dist.probabilities.tolist()))
        write_sidecar(path, payload)
        if wmap is not None:
            X, P = np.meshgrid(wmap.grid.x, wmap.grid.p, indexing="ij")
            wpath = write_csv(out / f"wigner_{tag}.csv", ["x", "p", "W"],
                              zip(X.ravel().tolist(), P.ravel().tolist(), wmap.values.ravel().tolist()))
            wpayload = dict(payload)
            wpayload.update(W_min=float(wmap.values.min()), W_max=float(wmap.values.max()),
                            W_integral=wmap.integral(), W_boundary_max=wmap.boundary_max())
            write_sidecar(wpath, wpayload)
        collected[(kind, g12, g23)] = (summary, dist, wmap)
    return collected


MODE_RUNNERS = {
    "evolve": run_evolve,
    "sweep-coupling": run_sweep_coupling,
    "sweep-n": run_sweep_n,
    "ground": run_ground,
    "wigner": run_wigner,
    "photons": lambda cfg: run_wigner(cfg, with_wigner=False),
}
