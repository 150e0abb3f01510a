"""Frequency sweeps: configuration, per-frequency estimates and file outputs.

Output directory layout::

    sweep.csv            omega,schur_estimate,l2_norm_k,truncation_norm,iterations,ref_points
    profiles.csv         omega followed by the optimized p(theta) on a subsampled fine grid
    state/omega_NNNN.json  optimizer state after each frequency (resume point)
    metadata.json        configuration echo and sweep direction
    baselines.json       frequency-independent reference constants
    estimate_*.json, history.csv   single-frequency runs
"""
from __future__ import annotations

import io
import json
import logging
import math
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Optional

import numpy as np

from .baselines import (
    l2_kbar_closed,
    l2_norm,
    matrix_norm,
    truncation_from_samples,
    truncation_kbar_analytic,
)
from .errors import ConfigError, DegenerateDenominator, SolverFailure
from .kernel import KernelParams, MackeyGlassParams, kernel_k, mg_map, sample_k_abs, sample_sides
from .minimax import OptimizeOptions, OptState, carryover, init_state, optimize
from .model import DEFAULT_SEED, SchurModel, SchurProblem, ratios
from .quadrature import make_grid

log = logging.getLogger(__name__)

CSV_COLUMNS = ("omega", "schur_estimate", "l2_norm_k", "truncation_norm", "iterations", "ref_points")
HISTORY_COLUMNS = ("iteration", "t", "grid_max", "schur_estimate", "ref_estimate", "ref_points")
PROFILE_STRIDE = 10
DISCRETIZATION_ALARM = 1.05


def fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".17g")


@dataclass
class RunConfig:
    mackey_glass: Optional[dict] = field(
        default_factory=lambda: {"gamma": 0.1, "beta": 0.2, "kappa": 10.0, "tau_prime": 4.5}
    )
    kernel: Optional[dict] = None
    nu0: float = 0.01
    grid_m: int = 251
    fine_m: int = 1001
    omega_min: float = -20.0
    omega_max: float = 20.0
    omega_step: float = 0.05
    delta_step: float = 0.005
    trunc_n: int = 50
    asymptotic_trunc_n: int = 1000
    seed: int = DEFAULT_SEED
    output_dir: str = "out"
    max_outer: int = 5000
    gap_tol: float = 1e-6
    stall_tol: float = 1e-9
    keep_threshold: int = 200
    window: int = 100

    def __post_init__(self):
        if self.kernel is not None:
            self.mackey_glass = None
        if self.mackey_glass is None and self.kernel is None:
            raise ConfigError("config needs either 'mackey_glass' or 'kernel'")
        for name in ("grid_m", "fine_m"):
            m = getattr(self, name)
            if int(m) != m or m < 3 or m % 2 == 0:
                raise ConfigError(f"{name} must be an odd integer >= 3, got {m}")
        if not self.omega_step > 0:
            raise ConfigError("omega_step must be positive")
        if self.omega_min > self.omega_max:
            raise ConfigError("omega_min must not exceed omega_max")

    def kernel_params(self, omega: float = 0.0) -> KernelParams:
        if self.mackey_glass is not None:
            params, _ = mg_map(MackeyGlassParams(**self.mackey_glass), nu0=self.nu0, omega=omega)
            return params
        k = self.kernel
        return KernelParams(a=k["a"], b=k["b"], tau=k.get("tau", 1.0), nu0=self.nu0, omega=omega)

    def threshold(self) -> Optional[float]:
        """``1 / Lambda`` when known (always for Mackey-Glass configs)."""
        if self.mackey_glass is not None:
            _, lam = mg_map(MackeyGlassParams(**self.mackey_glass))
        else:
            lam = self.kernel.get("Lambda")
        if lam is None or lam == 0:
            return None
        return 1.0 / lam

    def omegas(self) -> np.ndarray:
        count = int(math.floor((self.omega_max - self.omega_min) / self.omega_step + 1e-9)) + 1
        return np.round(self.omega_min + self.omega_step * np.arange(count), 10)

    def options(self) -> OptimizeOptions:
        return OptimizeOptions(
            delta_step=self.delta_step,
            gap_tol=self.gap_tol,
            stall_tol=self.stall_tol,
            max_outer=self.max_outer,
        )


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        if path.suffix == ".toml":
            try:
                import tomllib
            except ImportError:
                import tomli as tomllib
            data = tomllib.loads(text)
        else:
            data = json.loads(text)
    except ValueError as exc:
        raise ConfigError(f"cannot parse config {path}: {exc}") from exc
    known = {f.name for f in fields(RunConfig)}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    try:
        return RunConfig(**data)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


@dataclass
class SweepRecord:
    omega: float
    schur_estimate: float
    l2_norm_k: float
    truncation_norm: float
    iterations: int
    ref_points: int
    converged: bool = True
    coarse_estimate: float = float("nan")
    p_samples: np.ndarray = field(default=None, repr=False)
    q_samples: np.ndarray = field(default=None, repr=False)

    def csv_row(self) -> str:
        return ",".join(fmt(getattr(self, c)) for c in CSV_COLUMNS) + "\n"


def _failed_record(omega, iterations=0, refs=0) -> SweepRecord:
    nan = float("nan")
    return SweepRecord(omega, nan, nan, nan, iterations, refs, converged=False)


class Estimator:
    """Per-frequency pipeline with grids built once."""

    def __init__(self, config: RunConfig):
        self.config = config
        tau = config.kernel_params().tau
        self.grid = make_grid(tau, config.grid_m)
        self.fine = make_grid(tau, config.fine_m)

    def problem(self, omega: float) -> SchurProblem:
        params = self.config.kernel_params(omega)
        kabs = sample_k_abs(params, self.grid, self.grid)
        return SchurProblem(kabs, self.grid, self.grid)

    def initial_state(self, problem: SchurProblem) -> OptState:
        return init_state(problem, SchurModel.random(self.config.seed).params)

    def run(self, omega: float, warm: Optional[OptState] = None, callback=None):
        """Optimize at ``omega``; returns ``(record, state)``.

        Raises DegenerateDenominator for invalid parameters and SolverFailure
        (with the partial state attached) when an inner solve breaks down.
        """
        cfg = self.config
        problem = self.problem(omega)
        if warm is None:
            state = self.initial_state(problem)
        else:
            state = carryover(state=warm, problem=problem,
                              keep_threshold=cfg.keep_threshold, window=cfg.window)
        state, converged = optimize(state, problem, cfg.options(), callback=callback)
        record = self.validate(omega, state, problem)
        record.converged = converged
        return record, state

    def validate(self, omega: float, state: OptState, problem=None) -> SweepRecord:
        """Re-evaluate the optimized test functions on the fine grid."""
        cfg = self.config
        params = cfg.kernel_params(omega)
        k_fine = sample_sides(kernel_k, params, self.fine, self.fine)
        model = SchurModel(state.params)
        field_ = ratios(k_fine.modulus, model, self.fine, self.fine)
        problem = problem or self.problem(omega)
        coarse = float(np.sqrt(np.max(problem.grid_values(state.params))))
        schur = field_.estimate
        if schur > DISCRETIZATION_ALARM * coarse:
            log.warning("omega=%s: fine-grid estimate %.6g exceeds coarse %.6g by more than 5%%",
                        omega, schur, coarse)
        trunc = matrix_norm(truncation_from_samples(k_fine.values, cfg.trunc_n, self.fine, self.fine))
        return SweepRecord(
            omega=float(omega),
            schur_estimate=schur,
            l2_norm_k=l2_norm(k_fine, self.fine, self.fine),
            truncation_norm=trunc,
            iterations=state.iteration,
            ref_points=len(state.refs),
            coarse_estimate=coarse,
            p_samples=field_.p,
            q_samples=field_.q,
        )


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=1, sort_keys=True) + "\n")


def history_csv(state: OptState) -> str:
    buf = io.StringIO()
    buf.write(",".join(HISTORY_COLUMNS) + "\n")
    for k, h in enumerate(state.history, start=1):
        row = (k, h.t, h.grid_max, math.sqrt(max(h.grid_max, 0.0)), math.sqrt(max(h.t, 0.0)), h.n_refs)
        buf.write(",".join(fmt(v) for v in row) + "\n")
    return buf.getvalue()


def profile_header(fine_nodes) -> str:
    nodes = fine_nodes[::PROFILE_STRIDE]
    return "omega," + ",".join(fmt(x) for x in nodes) + "\n"


def profile_row(record: SweepRecord) -> str:
    values = record.p_samples[::PROFILE_STRIDE] if record.p_samples is not None else []
    return fmt(record.omega) + "," + ",".join(fmt(v) for v in values) + "\n"


def cmd_estimate(config: RunConfig, omega: float, output_dir=None) -> SweepRecord:
    """Single-frequency run; writes state JSON, a one-row CSV, history and profile."""
    out = Path(output_dir or config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    est = Estimator(config)
    tag = fmt(omega)
    try:
        record, state = est.run(omega)
        failure = None
    except SolverFailure as exc:
        failure = exc
        state = exc.state
        record = _failed_record(omega, state.iteration if state else 0, len(state.refs) if state else 0)
    if state is not None:
        (out / "history.csv").write_text(history_csv(state))
        _write_json(out / f"estimate_{tag}.json", {
            "omega": float(omega),
            "converged": record.converged,
            "schur_estimate": record.schur_estimate,
            "coarse_estimate": record.coarse_estimate,
            "l2_norm_k": record.l2_norm_k,
            "truncation_norm": record.truncation_norm,
            "state": state.to_dict(),
        })
    (out / "estimate.csv").write_text(",".join(CSV_COLUMNS) + "\n" + record.csv_row())
    if record.p_samples is not None:
        (out / "profiles.csv").write_text(profile_header(est.fine.nodes) + profile_row(record))
    if failure is not None:
        raise failure
    return record


def _state_path(out: Path, index: int) -> Path:
    return out / "state" / f"omega_{index:04d}.json"


def _completed(out: Path, omegas) -> int:
    """Number of leading frequencies whose state file and CSV row both exist."""
    done = 0
    while done < len(omegas) and _state_path(out, done).exists():
        done += 1
    csv_path = out / "sweep.csv"
    if not csv_path.exists():
        return 0
    rows = csv_path.read_text().splitlines()[1:]
    return min(done, len(rows))


def _truncate_lines(path: Path, keep: int) -> None:
    lines = path.read_text().splitlines(keepends=True)
    path.write_text("".join(lines[: keep + 1]))


def cmd_sweep(config: RunConfig, resume: bool = False, output_dir=None, progress=None) -> list:
    """Warm-started sweep over ascending omega; resumable after any frequency."""
    out = Path(output_dir or config.output_dir)
    (out / "state").mkdir(parents=True, exist_ok=True)
    omegas = config.omegas()
    est = Estimator(config)
    csv_path, prof_path = out / "sweep.csv", out / "profiles.csv"

    start, warm = 0, None
    if resume:
        start = _completed(out, omegas)
    if start > 0:
        _truncate_lines(csv_path, start)
        _truncate_lines(prof_path, start)
        saved = json.loads(_state_path(out, start - 1).read_text())["state"]
        warm = OptState.from_dict(saved) if saved is not None else None
        log.info("resuming after omega=%s (%d done)", fmt(omegas[start - 1]), start)
    else:
        csv_path.write_text(",".join(CSV_COLUMNS) + "\n")
        prof_path.write_text(profile_header(est.fine.nodes))
        _write_json(out / "metadata.json", {
            "config": asdict(config),
            "direction": "ascending",
            "omegas": len(omegas),
            "csv_columns": list(CSV_COLUMNS),
        })

    records = []
    for idx in range(start, len(omegas)):
        omega = float(omegas[idx])
        try:
            record, state = est.run(omega, warm)
        except (SolverFailure, DegenerateDenominator) as exc:
            log.error("omega=%s failed: %s", fmt(omega), exc)
            state = getattr(exc, "state", None) or warm
            record = _failed_record(omega)
        with csv_path.open("a") as fh:
            fh.write(record.csv_row())
        with prof_path.open("a") as fh:
            fh.write(profile_row(record))
        payload = {"index": idx, "omega": omega, "converged": record.converged,
                   "state": state.to_dict() if state is not None else None}
        _write_json(_state_path(out, idx), payload)
        if state is not None:
            warm = state
        records.append(record)
        if progress is not None:
            progress(idx, record)
    return records


def asymptotic_norms(config: RunConfig) -> dict:
    params = config.kernel_params(0.0)
    trunc = truncation_kbar_analytic(params, config.asymptotic_trunc_n)
    return {
        "threshold": config.threshold(),
        "l2_kbar": l2_kbar_closed(params),
        "norm_tkbar": matrix_norm(trunc),
    }


def cmd_baselines(config: RunConfig, output_dir=None) -> dict:
    out = Path(output_dir or config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    result = asymptotic_norms(config)
    _write_json(out / "baselines.json", result)
    return result
