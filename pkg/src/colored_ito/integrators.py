"""Time stepping for dF/dt = (D + rho n(t) H) F.

Three schemes are provided:

``euler_forward``
    F' = F + dt [D F + rho n(t_j) H F + corr * (rho^2/2) S G F]
``decentered``
    The right-hand side is evaluated at a forward-Euler prediction of the
    state at t_j + lam*dt, using the same left-sampled noise n(t_j); the
    correction weight becomes (1/2 - lam). lam = 0 is ``euler_forward`` and
    lam = 1/2 is the explicit midpoint rule, which needs no correction.
``midpoint_reference``
    Two-stage Heun integration with n evaluated exactly at both stages. For a
    resolvable (colored) noise this converges to the Stratonovich solution.

All steppers accept batched states of shape ``(..., 2 N_x + 1)`` together with
noise values broadcastable to ``(..., 1)``.
"""

import math
from dataclasses import dataclass

import numpy as np

from .correction import CorrectionFactor
from .errors import ConfigurationError, StepError
from .noise import NoiseRealization, grid_values
from .spectral import SpectralState, initial_state

KINDS = ("euler_forward", "decentered", "midpoint_reference")


@dataclass(frozen=True)
class SchemeSpec:
    kind: str
    lam: float = 0.0
    corrected: bool = False
    dt: float = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigurationError("scheme", f"unknown kind {self.kind!r}; expected one of {KINDS}")
        if not 0.0 <= self.lam <= 1.0:
            raise ConfigurationError("lambda", f"must lie in [0, 1], got {self.lam!r}")
        if self.kind == "euler_forward" and self.lam != 0.0:
            raise ConfigurationError("lambda", "euler_forward has lambda = 0")
        if self.dt is not None and not self.dt > 0:
            raise ConfigurationError("dt", f"must be positive, got {self.dt!r}")

    def with_dt(self, dt):
        return SchemeSpec(self.kind, self.lam, self.corrected, dt)


@dataclass
class TrajectoryResult:
    final_state: SpectralState
    steps: int
    max_modulus: np.ndarray = None
    symmetry_residue: float = None


def step_count(t_final, dt):
    """Number of steps of size ``dt`` covering [0, t_final]; must be integral."""
    q = t_final / dt
    n = round(q)
    if n < 1 or abs(q - n) > 1e-9 * max(1.0, q):
        raise ConfigurationError("dt", f"t_final / dt = {q!r} is not an integer")
    return n


def _factor_value(factor):
    return factor.value if isinstance(factor, CorrectionFactor) else float(factor)


def _correction_weight(rho, s, lam):
    return (0.5 - lam) * rho**2 * s


def _advance(F, ops, rho, n, s, corrected, dt, lam):
    """One (possibly decentered) step on raw arrays; ``s`` may be batched."""
    h = ops.h
    Dt = ops.D.T
    if lam == 0.0:
        G = F
    else:
        G = F + (lam * dt) * (F @ Dt + (rho * n) * (h * F))
    incr = G @ Dt + (rho * n) * (h * G)
    if corrected:
        w = _correction_weight(rho, s, lam)
        if np.any(w != 0.0):
            incr = incr + w * (ops.g * F)
    return F + dt * incr


def euler_step(state, ops, cfg, noise_value, factor, corrected, dt):
    """Forward Euler step, noise sampled at the left endpoint."""
    F = _advance(state.F, ops, cfg.rho, noise_value, _factor_value(factor), corrected, dt, 0.0)
    return SpectralState(F=F, t=state.t + dt)


def decentered_step(state, ops, cfg, noise_value, factor, lam, corrected, dt):
    """Step with the right-hand side evaluated at t_j + lam*dt.

    ``noise_value`` is n(t_j); the noise increment is left-sampled as in Euler.
    """
    if not 0.0 <= lam <= 1.0:
        raise ValueError(f"lambda must lie in [0, 1], got {lam!r}")
    F = _advance(state.F, ops, cfg.rho, noise_value, _factor_value(factor), corrected, dt, lam)
    return SpectralState(F=F, t=state.t + dt)


def advance_batch(F0, ops, rho, noise_grid, factor, scheme, diagnostics=False):
    """Run ``scheme`` from ``F0`` over every column of ``noise_grid``.

    Parameters
    ----------
    F0 : ndarray, shape (R, n)
    noise_grid : ndarray, shape (R, steps)
        n(t_j) for each member and step.
    factor : float or ndarray of shape (R,)

    Returns the final states and, with ``diagnostics``, the per-member running
    maximum of |F_k| and of the conjugate-symmetry residue.
    """
    F = np.array(F0, dtype=np.complex128)
    s = np.asarray(factor, dtype=np.float64)
    if s.ndim:
        s = s[:, None]
    steps = noise_grid.shape[-1]
    peak = np.abs(F) if diagnostics else None
    residue = np.zeros(F.shape[:-1]) if diagnostics else None
    for j in range(steps):
        n = noise_grid[..., j:j + 1]
        F = _advance(F, ops, rho, n, s, scheme.corrected, scheme.dt, scheme.lam)
        if not np.isfinite(F).all():
            raise StepError(j, "non-finite state")
        if diagnostics:
            np.maximum(peak, np.abs(F), out=peak)
            np.maximum(residue, np.max(np.abs(F - np.conj(F[..., ::-1])), axis=-1), out=residue)
    return F, peak, residue


def reference_solve(cfg, ops, noise, dt_ref=None, t_final=None, F0=None):
    """Fine-step Heun integration with the noise evaluated exactly at each stage.

    ``dt_ref`` defaults to 1/64 of the noise resolution. White noise
    (alpha = 0) has no resolvable limit, so it is refused: use the analytic
    oracle instead.
    """
    spec = noise.spec
    if spec.alpha == 0:
        raise ConfigurationError(
            "alpha", "reference_solve needs a resolvable colored noise; use the analytic oracle for alpha = 0"
        )
    t_final = cfg.t_final if t_final is None else t_final
    dt_ref = spec.dt / 64 if dt_ref is None else dt_ref
    steps = step_count(t_final, dt_ref)
    F = initial_state(cfg).F if F0 is None else np.array(F0, dtype=np.complex128)
    D = ops.D
    h = ops.h
    rho = cfg.rho
    diagonal = not np.any(D - np.diag(np.diagonal(D)))
    d = np.diagonal(D).copy()

    chunk = 8192
    for start in range(0, steps, chunk):
        stop = min(start + chunk, steps)
        n = noise.evaluate(np.arange(start, stop + 1) * dt_ref)
        for i in range(stop - start):
            if diagonal:
                k1 = (d + (rho * n[i]) * h) * F
                k2 = (d + (rho * n[i + 1]) * h) * (F + dt_ref * k1)
            else:
                k1 = D @ F + (rho * n[i]) * (h * F)
                Fp = F + dt_ref * k1
                k2 = D @ Fp + (rho * n[i + 1]) * (h * Fp)
            F = F + (0.5 * dt_ref) * (k1 + k2)
        if not np.isfinite(F).all():
            raise StepError(stop, "non-finite state")
    return SpectralState(F=F, t=steps * dt_ref)


def run(cfg, scheme, noise, ops, factor, diagnostics=False):
    """Integrate from the initial condition to ``cfg.t_final``.

    ``noise`` is a single realization (returns a :class:`TrajectoryResult`) or
    a sequence of realizations sharing one spec (returns a list, stepped as a
    batch).
    """
    single = isinstance(noise, NoiseRealization)
    members = [noise] if single else list(noise)
    spec = members[0].spec
    if any(m.spec != spec for m in members):
        raise ValueError("all realizations in a batch must share one NoiseSpec")
    dt = spec.dt if scheme.dt is None else scheme.dt

    if scheme.kind == "midpoint_reference":
        results = []
        for m in members:
            final = reference_solve(cfg, ops, m, dt_ref=dt)
            results.append(TrajectoryResult(final, step_count(cfg.t_final, dt)))
        return results[0] if single else results

    if not math.isclose(dt, spec.dt, rel_tol=1e-12):
        raise ConfigurationError("dt", f"scheme dt {dt!r} differs from noise resolution {spec.dt!r}")
    steps = step_count(cfg.t_final, spec.dt)
    a = np.stack([m.a for m in members])
    b = np.stack([m.b for m in members])
    grid = grid_values(spec, a, b, steps)
    F0 = np.broadcast_to(initial_state(cfg).F, (len(members), cfg.size))
    F, peak, residue = advance_batch(
        F0, ops, cfg.rho, grid, _factor_value(factor), scheme.with_dt(spec.dt), diagnostics
    )
    t_end = steps * spec.dt
    results = [
        TrajectoryResult(
            SpectralState(F=F[r].copy(), t=t_end),
            steps,
            None if peak is None else peak[r],
            None if residue is None else float(residue[r]),
        )
        for r in range(len(members))
    ]
    return results[0] if single else results
