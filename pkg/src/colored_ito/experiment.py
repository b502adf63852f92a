"""Ensemble convergence experiments: run, measure, aggregate, fit rates."""

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .correction import spectral_factor
from .errors import ConfigurationError, EstimationError
from .integrators import SchemeSpec, advance_batch, reference_solve, step_count
from .noise import NoiseSpec, grid_values, sample_ensemble
from .oracle import exact_solution, split_gap
from .spectral import ModelConfig, build_operators, initial_state

log = logging.getLogger(__name__)

STANDARD_ALPHAS = (0.0, 1e-6, 1e-5, 1e-4, 1.0)
# 1/dt even so that 1/dt + 1 noise levels per unit time is odd; each entry is
# 2*prev + 2, so dt roughly halves. The finest entries are needed for white
# noise, whose O(dt**0.5) error only dominates the O(dt) drift error below ~1e-3.
DEFAULT_STEPS = (10, 22, 46, 94, 190, 382, 766, 1534, 3070, 6142, 12286, 24574)
DEFAULT_DTS = tuple(1.0 / n for n in DEFAULT_STEPS)
# Split point for the oracle commutator diagnostic. Halves of T = 2 would span
# whole noise periods with equal integrals, which hides the commutator.
ORACLE_SPLIT = 0.3


@dataclass(frozen=True)
class ConvergenceRecord:
    alpha: float
    dt: float
    scheme: str
    lam: float
    corrected: bool
    realization: int
    l2_error: float

    @property
    def cell(self):
        return (self.alpha, self.dt, self.scheme, self.lam, self.corrected)


@dataclass(frozen=True)
class AggregateRecord:
    alpha: float
    dt: float
    scheme: str
    lam: float
    corrected: bool
    mean_error: float
    std_error: float
    n: int

    @property
    def variant(self):
        return (self.scheme, self.lam, self.corrected)


@dataclass
class ExperimentConfig:
    model: ModelConfig = field(default_factory=ModelConfig)
    alphas: tuple = STANDARD_ALPHAS
    dts: tuple = DEFAULT_DTS
    schemes: tuple = (
        SchemeSpec("euler_forward", corrected=False),
        SchemeSpec("euler_forward", corrected=True),
    )
    realizations: int = 100
    base_seed: int = 20240601
    output_path: str = None
    workers: int = 1

    def __post_init__(self):
        self.alphas = tuple(float(a) for a in self.alphas)
        self.dts = tuple(NoiseSpec.for_step(0.0, dt).dt for dt in self.dts)
        self.schemes = tuple(self.schemes)
        if self.realizations < 2:
            raise ConfigurationError("realizations", "must be >= 2")
        if not self.schemes:
            raise ConfigurationError("schemes", "at least one scheme is required")
        for dt in self.dts:
            step_count(self.model.t_final, dt)


@dataclass
class EnsembleResult:
    members: list
    aggregates: list
    failures: list = field(default_factory=list)
    diagnostics: list = field(default_factory=list)


def l2_error(numeric, exact):
    """L2 norm over [0, 2 pi] of the field difference, via Parseval."""
    a = np.asarray(getattr(numeric, "F", numeric))
    b = np.asarray(getattr(exact, "F", exact))
    if a.shape != b.shape:
        raise ValueError(f"state shapes differ: {a.shape} vs {b.shape}")
    return math.sqrt(2.0 * math.pi * float(np.sum(np.abs(a - b) ** 2, axis=-1)))


def _batch_l2(a, b):
    return np.sqrt(2.0 * np.pi * np.sum(np.abs(a - b) ** 2, axis=-1))


def aggregate(members):
    """Mean and sample standard deviation of the member errors per cell."""
    cells = {}
    for rec in members:
        cells.setdefault(rec.cell, []).append(rec.l2_error)
    out = []
    for cell in sorted(cells):
        errs = cells[cell]
        n = len(errs)
        mean = math.fsum(errs) / n
        std = math.sqrt(math.fsum((e - mean) ** 2 for e in errs) / (n - 1)) if n > 1 else 0.0
        out.append(AggregateRecord(*cell, mean_error=mean, std_error=std, n=n))
    return out


def _run_cell(model, alpha, dt, schemes, realizations, base_seed):
    """All schemes for one (alpha, dt) pair over the full ensemble."""
    spec = NoiseSpec.for_step(alpha, dt)
    members = sample_ensemble(spec, base_seed, realizations)
    ops = build_operators(model)
    factor = spectral_factor(spec).value
    steps = step_count(model.t_final, spec.dt)
    t_end = steps * spec.dt
    exact = np.stack([exact_solution(model, ops, m, t_end).F for m in members])
    grid = grid_values(spec, np.stack([m.a for m in members]), np.stack([m.b for m in members]), steps)
    F0 = np.broadcast_to(initial_state(model).F, (realizations, model.size))
    gap = None
    if model.epsilon != 0:
        # mean commutator gap of the closed-form oracle over this ensemble
        gap = math.fsum(split_gap(model, ops, m, t_end, split=ORACLE_SPLIT) for m in members) / realizations
    records = []
    for scheme in schemes:
        sch = scheme.with_dt(spec.dt)
        if sch.kind == "midpoint_reference":
            final = np.stack([reference_solve(model, ops, m, dt_ref=spec.dt).F for m in members])
        else:
            final, _, _ = advance_batch(F0, ops, model.rho, grid, factor, sch)
        errs = _batch_l2(final, exact)
        records.extend(
            ConvergenceRecord(alpha, spec.dt, sch.kind, sch.lam, sch.corrected, r, float(e))
            for r, e in enumerate(errs)
        )
    return records, gap


def _cell_job(args):
    model, alpha, dt, schemes, realizations, base_seed = args
    try:
        records, gap = _run_cell(model, alpha, dt, schemes, realizations, base_seed)
        return args, records, gap, None
    except Exception as exc:  # recorded per cell; the sweep continues
        return args, [], None, f"{type(exc).__name__}: {exc}"


def run_ensemble(cfg, workers=None):
    """Run every (alpha, dt, scheme, realization) combination of ``cfg``.

    Each (alpha, dt) cell is independent; with ``workers > 1`` cells run in a
    process pool. Records are sorted afterwards so the result does not depend
    on scheduling.
    """
    workers = cfg.workers if workers is None else workers
    jobs = [
        (cfg.model, alpha, dt, cfg.schemes, cfg.realizations, cfg.base_seed)
        for alpha in cfg.alphas
        for dt in cfg.dts
    ]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(_cell_job, jobs))
    else:
        outcomes = [_cell_job(job) for job in jobs]

    members, failures, diagnostics = [], [], []
    for args, recs, gap, err in outcomes:
        members.extend(recs)
        if gap is not None:
            diagnostics.append({"alpha": args[1], "dt": args[2], "oracle_split_gap": gap})
        if err is not None:
            log.error("cell alpha=%g dt=%g failed: %s", args[1], args[2], err)
            failures.append({"alpha": args[1], "dt": args[2], "error": err})
    members.sort(key=lambda r: (r.alpha, r.dt, r.scheme, r.lam, r.corrected, r.realization))
    return EnsembleResult(members=members, aggregates=aggregate(members), failures=failures,
                          diagnostics=diagnostics)


def select(aggregates, alpha=None, scheme=None, lam=None, corrected=None):
    out = []
    for a in aggregates:
        if alpha is not None and a.alpha != alpha:
            continue
        if scheme is not None and a.scheme != scheme:
            continue
        if lam is not None and a.lam != lam:
            continue
        if corrected is not None and a.corrected != corrected:
            continue
        out.append(a)
    return sorted(out, key=lambda a: a.dt)


def estimate_order(records, dt_window=None, finest=4):
    """Least-squares slope of log(mean error) against log(dt).

    ``records`` are aggregates for a single (alpha, scheme) variant, or plain
    ``(dt, error)`` pairs. ``dt_window`` selects the step sizes to fit; by
    default the ``finest`` smallest are used.
    """
    pts = []
    for rec in records:
        if isinstance(rec, AggregateRecord):
            pts.append((rec.dt, rec.mean_error))
        else:
            pts.append((float(rec[0]), float(rec[1])))
    pts.sort()
    if dt_window is not None:
        wanted = list(dt_window)
        pts = [p for p in pts if any(math.isclose(p[0], w, rel_tol=1e-12) for w in wanted)]
    else:
        pts = pts[:finest]
    if len(pts) < 3:
        raise EstimationError(f"need at least 3 points to fit an order, got {len(pts)}")
    dts, errs = zip(*pts)
    if min(errs) <= 0 or min(dts) <= 0:
        raise EstimationError("errors and step sizes must be positive to take logarithms")
    slope, _ = np.polyfit(np.log(dts), np.log(errs), 1)
    return float(slope)
