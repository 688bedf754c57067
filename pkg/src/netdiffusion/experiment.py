"""Equilibrium vs perturbative accuracy study on churning networks.

For every (rate, replicate) pair:

1. draw a seed graph ``G_0`` from the stationary Bernoulli(p) distribution
   (shared by all rates for a given replicate);
2. churn it for ``steps`` intervals, giving ``G_0 .. G_T``;
3. diffuse ``y_t = alpha G_t y_{t-1} + f`` for ``t = 1 .. T`` from
   ``y_0 = f``;
4. compare ``y_T`` with the equilibrium on ``alpha G_T`` and with the
   perturbative solution using ``D = alpha G_{T-1} - alpha G_T``.

Seeding: replicate ``i`` uses ``base_seed ^ i`` for its seed graph; its churn
stream also mixes in the bit pattern of the rate, so results do not depend
on which other rates are in the study or on execution order.
"""

from __future__ import annotations

import csv
import json
import logging
import math
import struct
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Iterable

import numpy as np
from scipy import stats

from .churn import ChurnProcess, evolve, mean_correlation, mean_velocity, sample_equilibrium_graph
from .dynamics import DiffusionModel, equilibrium, estimate_drift, perturbative, run_dynamic
from .errors import CalibrationError, DataError, NumericalError, StudyError
from .linalg import spectral_radius
from .textio import read_vector

log = logging.getLogger(__name__)

RESULT_COLUMNS = (
    "rate",
    "replicate",
    "hamming_velocity",
    "graph_correlation",
    "rmse_equilibrium",
    "rmse_perturbative",
)
SUMMARY_COLUMNS = ("rate", "mean_velocity", "mean_rmse_eq", "ci95_eq", "mean_rmse_pert", "ci95_pert")

_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class StudyConfig:
    n: int
    p: float
    rates: tuple[float, ...]
    replicates: int
    seed: int
    steps: int = 20
    alpha: float | str = "calibrate"
    forcing: str = "uniform"

    def __post_init__(self):
        object.__setattr__(self, "rates", tuple(float(r) for r in self.rates))
        problems = []
        if not isinstance(self.n, int) or self.n < 2:
            problems.append(f"n must be an integer >= 2, got {self.n!r}")
        if not 0 < self.p < 1:
            problems.append(f"p must lie in (0, 1), got {self.p!r}")
        if not self.rates:
            problems.append("rates must be non-empty")
        elif any(not (r >= 0 and math.isfinite(r)) for r in self.rates):
            problems.append("rates must be finite and non-negative")
        elif len(set(self.rates)) != len(self.rates):
            problems.append("rates must be distinct")
        if not isinstance(self.replicates, int) or self.replicates < 1:
            problems.append(f"replicates must be an integer >= 1, got {self.replicates!r}")
        if not isinstance(self.steps, int) or self.steps < 2:
            problems.append(f"steps must be an integer >= 2, got {self.steps!r}")
        if isinstance(self.alpha, str):
            if self.alpha != "calibrate":
                problems.append(f"alpha must be a number or 'calibrate', got {self.alpha!r}")
        elif not (self.alpha > 0 and math.isfinite(self.alpha)):
            problems.append(f"alpha must be positive, got {self.alpha!r}")
        if not isinstance(self.seed, int) or not 0 <= self.seed <= _MASK64:
            problems.append(f"seed must be a 64-bit non-negative integer, got {self.seed!r}")
        if problems:
            raise DataError("invalid study config: " + "; ".join(problems))

    @classmethod
    def from_dict(cls, d: dict, seed: int | None = None) -> "StudyConfig":
        known = {"n", "p", "rates", "replicates", "steps", "alpha", "forcing", "seed"}
        extra = set(d) - known
        if extra:
            raise DataError(f"unknown config keys: {sorted(extra)}")
        kw = dict(d)
        if seed is not None:
            kw["seed"] = seed
        missing = {"n", "p", "rates", "replicates", "seed"} - set(kw)
        if missing:
            raise DataError(f"missing config keys: {sorted(missing)}")
        try:
            return cls(**kw)
        except TypeError as exc:
            raise DataError(f"invalid study config: {exc}") from exc

    @classmethod
    def from_json(cls, path, seed: int | None = None) -> "StudyConfig":
        try:
            d = json.loads(Path(path).read_text())
        except OSError as exc:
            raise DataError(f"cannot read config {path}: {exc.strerror or exc}") from exc
        except json.JSONDecodeError as exc:
            raise DataError(f"{path}:{exc.lineno}: invalid JSON: {exc.msg}") from exc
        if not isinstance(d, dict):
            raise DataError(f"{path}: config must be a JSON object")
        cfg = cls.from_dict(d, seed=seed)
        if cfg.forcing != "uniform" and not Path(cfg.forcing).is_absolute():
            # forcing paths are relative to the config file
            cfg = StudyConfig(**{**asdict(cfg), "forcing": str(Path(path).parent / cfg.forcing)})
        return cfg

    @property
    def job_count(self) -> int:
        return len(self.rates) * self.replicates


@dataclass(frozen=True)
class StudyContext:
    """Quantities fixed across the whole study."""

    alpha: float
    forcing: np.ndarray = field(repr=False)


@dataclass(frozen=True)
class StudyResult:
    rate: float
    replicate: int
    hamming_velocity: float
    graph_correlation: float
    rmse_equilibrium: float
    rmse_perturbative: float


@dataclass(frozen=True)
class RateSummary:
    rate: float
    count: int
    mean_velocity: float
    mean_rmse_eq: float
    mean_rmse_pert: float
    ci95_eq: float | None
    ci95_pert: float | None


@dataclass(frozen=True)
class Abort:
    rate: float
    replicate: int
    reason: str


def replicate_seed(base_seed: int, replicate: int) -> int:
    return (base_seed ^ replicate) & _MASK64


def _rate_key(rate: float) -> int:
    return struct.unpack("<Q", struct.pack("<d", float(rate)))[0]


def seed_graph(config: StudyConfig, replicate: int) -> np.ndarray:
    proc = ChurnProcess(config.n, config.p, 0.0, replicate_seed(config.seed, replicate))
    return sample_equilibrium_graph(proc)


def calibrate_alpha(sample: Iterable) -> float:
    """``1 / (2 rho_m)`` with ``rho_m`` the largest spectral radius in ``sample``."""
    radii = [spectral_radius(g) for g in sample]
    if not radii:
        raise CalibrationError("calibration sample is empty")
    rho_m = max(radii)
    if rho_m <= 0:
        raise CalibrationError("every sampled graph has spectral radius 0")
    return 1.0 / (2.0 * rho_m)


def make_forcing(config: StudyConfig) -> np.ndarray:
    if config.forcing == "uniform":
        return np.random.default_rng([config.seed, 0xF0, 0x0F]).uniform(0.0, 1.0, config.n)
    f = read_vector(config.forcing)
    if f.size != config.n:
        raise DataError(f"forcing file {config.forcing} has {f.size} entries, config n={config.n}")
    return f


def prepare(config: StudyConfig) -> StudyContext:
    """Forcing vector and attenuation shared by every replicate.

    A calibrated ``alpha`` uses the seed graphs of all replicates.
    """
    if config.alpha == "calibrate":
        alpha = calibrate_alpha(seed_graph(config, i) for i in range(config.replicates))
    else:
        alpha = float(config.alpha)
    return StudyContext(alpha=alpha, forcing=make_forcing(config))


def rmse(estimate, truth) -> float:
    a = np.asarray(estimate, dtype=float).reshape(-1)
    b = np.asarray(truth, dtype=float).reshape(-1)
    if a.shape != b.shape:
        raise DataError(f"length mismatch: {a.size} vs {b.size}")
    return float(np.sqrt(np.mean((a - b) ** 2)))


@dataclass(frozen=True)
class ReplicateStates:
    """Full output of one replicate, for inspection beyond the summary record."""

    exact: np.ndarray
    equilibrium: np.ndarray
    perturbative: np.ndarray
    sequence: object


def simulate_replicate(config: StudyConfig, rate: float, replicate: int, context: StudyContext | None = None):
    """Run one replicate; returns ``(StudyResult, ReplicateStates)``."""
    ctx = prepare(config) if context is None else context
    g0 = seed_graph(config, replicate)
    proc = ChurnProcess(config.n, config.p, rate, replicate_seed(config.seed, replicate))
    rng = np.random.default_rng([proc.seed, 1, _rate_key(rate)])
    seq = evolve(proc, g0, config.steps, rng=rng)
    weights = ctx.alpha * seq.graphs.astype(float)
    f = ctx.forcing
    exact = run_dynamic(weights[1:], f, f).final
    A_T = weights[-1]
    y_eq = equilibrium(DiffusionModel(A_T, f))
    y_pert = perturbative(A_T, estimate_drift(weights[-2], A_T), f, warn=False)
    result = StudyResult(
        rate=float(rate),
        replicate=int(replicate),
        hamming_velocity=mean_velocity(seq),
        graph_correlation=mean_correlation(seq),
        rmse_equilibrium=rmse(y_eq, exact),
        rmse_perturbative=rmse(y_pert, exact),
    )
    return result, ReplicateStates(exact, y_eq, y_pert, seq)


def run_replicate(config: StudyConfig, rate: float, replicate: int, context: StudyContext | None = None) -> StudyResult:
    return simulate_replicate(config, rate, replicate, context)[0]


def _job(args):
    config, ctx, rate, i = args
    try:
        return run_replicate(config, rate, i, ctx)
    except NumericalError as exc:
        return Abort(rate, i, str(exc))


def execute_study(config: StudyConfig, workers: int = 1) -> tuple[list[StudyResult], list[Abort]]:
    """Run every job; returns canonically ordered results and the aborted jobs."""
    ctx = prepare(config)
    jobs = [(config, ctx, r, i) for r in sorted(config.rates) for i in range(config.replicates)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(_job, jobs, chunksize=max(1, len(jobs) // (4 * workers))))
    else:
        outcomes = [_job(j) for j in jobs]
    results = [o for o in outcomes if isinstance(o, StudyResult)]
    aborts = [o for o in outcomes if isinstance(o, Abort)]
    for a in aborts:
        log.warning("replicate %d at rate %g aborted: %s", a.replicate, a.rate, a.reason)
    if aborts:
        log.warning("%d of %d replicates aborted and excluded", len(aborts), len(jobs))
    done = {r.rate for r in results}
    dead = [r for r in config.rates if r not in done]
    if dead:
        raise StudyError(f"every replicate aborted at rate(s) {sorted(dead)}")
    results.sort(key=lambda r: (r.rate, r.replicate))
    return results, aborts


def run_study(config: StudyConfig, workers: int = 1) -> list[StudyResult]:
    return execute_study(config, workers)[0]


def _ci95(x: np.ndarray) -> float | None:
    if x.size < 2:
        return None
    return float(1.96 * np.std(x, ddof=1) / np.sqrt(x.size))


def summarize(results: Iterable[StudyResult]) -> list[RateSummary]:
    """Per-rate means with normal-approximation 95% half-widths."""
    results = list(results)
    if not results:
        raise DataError("no results to summarize")
    out = []
    for rate in sorted({r.rate for r in results}):
        b = [r for r in results if r.rate == rate]
        eq = np.array([r.rmse_equilibrium for r in b])
        pe = np.array([r.rmse_perturbative for r in b])
        out.append(
            RateSummary(
                rate=rate,
                count=len(b),
                mean_velocity=float(np.mean([r.hamming_velocity for r in b])),
                mean_rmse_eq=float(eq.mean()),
                mean_rmse_pert=float(pe.mean()),
                ci95_eq=_ci95(eq),
                ci95_pert=_ci95(pe),
            )
        )
    return out


@dataclass(frozen=True)
class SignTest:
    wins: int  # perturbative strictly closer
    losses: int
    ties: int
    p_value: float  # one-sided, H1: perturbative wins more often


def sign_test(results: Iterable[StudyResult]) -> SignTest:
    """Paired sign test of perturbative vs equilibrium error; ties dropped."""
    wins = losses = ties = 0
    for r in results:
        if r.rmse_perturbative < r.rmse_equilibrium:
            wins += 1
        elif r.rmse_perturbative > r.rmse_equilibrium:
            losses += 1
        else:
            ties += 1
    if wins + losses == 0:
        return SignTest(wins, losses, ties, 1.0)
    p = stats.binomtest(wins, wins + losses, 0.5, alternative="greater").pvalue
    return SignTest(wins, losses, ties, float(p))


def _cell(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


def write_results_csv(results: Iterable[StudyResult], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(RESULT_COLUMNS)
        for r in results:
            w.writerow([_cell(getattr(r, c)) for c in RESULT_COLUMNS])


def write_summary_csv(summary: Iterable[RateSummary], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SUMMARY_COLUMNS)
        for s in summary:
            w.writerow([_cell(getattr(s, c)) for c in SUMMARY_COLUMNS])


def _read_csv(path, columns):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or tuple(rows[0]) != columns:
        raise DataError(f"{path}: expected header {','.join(columns)}")
    for k, row in enumerate(rows[1:], start=2):
        if len(row) != len(columns):
            raise DataError(f"{path}:{k}: expected {len(columns)} fields, got {len(row)}")
    return rows[1:]


def read_results_csv(path) -> list[StudyResult]:
    out = []
    for row in _read_csv(path, RESULT_COLUMNS):
        rate, rep, *rest = row
        out.append(StudyResult(float(rate), int(rep), *(float(x) for x in rest)))
    return out


def read_summary_csv(path) -> list[RateSummary]:
    out = []
    for rate, vel, meq, ceq, mpe, cpe in _read_csv(path, SUMMARY_COLUMNS):
        out.append(
            RateSummary(
                rate=float(rate),
                count=-1,  # not stored in the CSV
                mean_velocity=float(vel),
                mean_rmse_eq=float(meq),
                mean_rmse_pert=float(mpe),
                ci95_eq=float(ceq) if ceq else None,
                ci95_pert=float(cpe) if cpe else None,
            )
        )
    return out
