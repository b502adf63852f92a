"""Per-realization closed-form solutions used as the error baseline."""

import math
from dataclasses import dataclass

import numpy as np

from .errors import WrongOracleError
from .spectral import SpectralState, initial_state


@dataclass(frozen=True)
class MatrixExponentialParams:
    """Scaling-and-squaring settings.

    The matrix is scaled by 2**-s until its 1-norm is at most ``scaled_norm``;
    Taylor terms are summed until a term's 1-norm falls below
    ``tolerance * 2**-s`` (so the truncation error after s squarings stays near
    ``tolerance`` relative to the result), then the sum is squared s times.
    """

    tolerance: float = 1e-12
    scaled_norm: float = 0.5
    max_terms: int = 60

    def __post_init__(self):
        if not self.tolerance > 0:
            raise ValueError("tolerance must be positive")


def _norm1(a):
    return float(np.max(np.sum(np.abs(a), axis=0))) if a.size else 0.0


def matrix_exponential(M, params=None):
    params = params or MatrixExponentialParams()
    M = np.asarray(M)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"matrix_exponential needs a square matrix, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise ValueError("matrix has non-finite entries")
    dtype = np.result_type(M.dtype, np.float64)
    norm = _norm1(M)
    s = 0
    if norm > params.scaled_norm:
        s = int(math.ceil(math.log2(norm / params.scaled_norm)))
    A = M.astype(dtype) / 2.0**s
    n = M.shape[0]
    result = np.eye(n, dtype=dtype)
    term = np.eye(n, dtype=dtype)
    stop = params.tolerance * 2.0**-s
    for j in range(1, params.max_terms + 1):
        term = term @ A / j
        result = result + term
        if _norm1(term) <= stop:
            break
    else:
        raise ArithmeticError("Taylor series did not reach the requested tolerance")
    for _ in range(s):
        result = result @ result
    return result


def exact_constant_velocity(cfg, noise, t, F0=None):
    """F_k(t) = F_k(0) exp[-(ick + mu k^2) t + i rho k beta_t] for uncoupled modes."""
    if cfg.epsilon != 0:
        raise WrongOracleError("exact_constant_velocity requires epsilon = 0; use exact_varying_velocity")
    F0 = initial_state(cfg).F if F0 is None else np.asarray(F0, dtype=np.complex128)
    k = cfg.wavenumbers.astype(np.float64)
    beta = noise.integrate(0.0, t)
    phase = -(1j * cfg.c * k + cfg.mu * k * k) * t + 1j * cfg.rho * k * beta
    return SpectralState(F=F0 * np.exp(phase), t=t)


def exact_varying_velocity(cfg, ops, noise, t, F0=None, params=None):
    """F(t) = exp(D t + rho beta_t H) F(0), beta_t the exact integral of n over [0, t].

    This is exact only when D and H commute (eps = 0); for eps != 0 it is kept
    as the error baseline and :func:`split_gap` measures its departure from a
    time-ordered composition.
    """
    F0 = initial_state(cfg).F if F0 is None else np.asarray(F0, dtype=np.complex128)
    beta = noise.integrate(0.0, t)
    E = matrix_exponential(ops.D * t + (cfg.rho * beta) * ops.H, params)
    return SpectralState(F=E @ F0, t=t)


def split_gap(cfg, ops, noise, t, F0=None, split=0.5):
    """L2 distance between the one-shot exponential and a two-piece composition.

    The pieces cover [0, split*t] and [split*t, t]. The gap is zero (to
    rounding) when eps = 0; for eps != 0 it measures the commutator error of
    the closed form. When both pieces carry the same noise integral (e.g.
    halves of a whole number of noise periods) the pieces commute and the gap
    vanishes, so use a split that breaks that symmetry.
    """
    if not 0.0 < split < 1.0:
        raise ValueError(f"split must lie in (0, 1), got {split!r}")
    F0 = initial_state(cfg).F if F0 is None else np.asarray(F0, dtype=np.complex128)
    full = exact_varying_velocity(cfg, ops, noise, t, F0).F
    mid = split * t
    b1 = noise.integrate(0.0, mid)
    b2 = noise.integrate(mid, t)
    E1 = matrix_exponential(ops.D * mid + (cfg.rho * b1) * ops.H)
    E2 = matrix_exponential(ops.D * (t - mid) + (cfg.rho * b2) * ops.H)
    return math.sqrt(2 * math.pi) * float(np.linalg.norm(E2 @ (E1 @ F0) - full))


def exact_solution(cfg, ops, noise, t):
    """Dispatch to the constant- or varying-velocity oracle."""
    if cfg.epsilon == 0:
        return exact_constant_velocity(cfg, noise, t)
    return exact_varying_velocity(cfg, ops, noise, t)
