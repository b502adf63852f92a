"""Fourier representation of the stochastic advection-diffusion test problem.

    u_t = -[c + (eps/2) cos x] u_x + mu u_xx + rho u_x n(t),   x in [0, 2 pi) periodic

Writing u = sum_k F_k exp(ikx) for |k| <= N_x gives dF/dt = (D + rho n(t) H) F
with D tridiagonal (advection, diffusion and the eps coupling between
neighbouring modes) and H = i Diag(k). Mode vectors are ordered
k = -N_x, ..., N_x.
"""

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import ConfigurationError, NumericalConsistencyError, ProbeError


@dataclass(frozen=True)
class ModelConfig:
    c: float = 1.0
    mu: float = 0.1
    epsilon: float = 0.0
    rho: float = 0.2
    k0: int = 1
    n_x: int = 1
    t_final: float = 2.0

    def __post_init__(self):
        if not self.mu >= 0:
            raise ConfigurationError("mu", f"must be >= 0, got {self.mu!r}")
        if int(self.n_x) != self.n_x or self.n_x < 1:
            raise ConfigurationError("n_x", f"must be an integer >= 1, got {self.n_x!r}")
        if int(self.k0) != self.k0:
            raise ConfigurationError("k0", f"must be an integer, got {self.k0!r}")
        if not (self.t_final > 0 and math.isfinite(self.t_final)):
            raise ConfigurationError("t_final", f"must be positive, got {self.t_final!r}")
        object.__setattr__(self, "n_x", int(self.n_x))
        object.__setattr__(self, "k0", int(self.k0))

    @property
    def wavenumbers(self):
        return np.arange(-self.n_x, self.n_x + 1)

    @property
    def size(self):
        return 2 * self.n_x + 1


@dataclass
class SpectralState:
    F: np.ndarray
    t: float = 0.0

    @property
    def n_x(self):
        return (self.F.shape[-1] - 1) // 2

    @property
    def wavenumbers(self):
        return np.arange(-self.n_x, self.n_x + 1)

    def symmetry_residue(self):
        """max_k |F_{-k} - conj(F_k)|; zero for the transform of a real field."""
        return float(np.max(np.abs(self.F - np.conj(self.F[..., ::-1]))))


@dataclass(frozen=True, eq=False)
class OperatorSet:
    """Dense drift matrix ``D`` and diagonal noise/correction matrices ``H``, ``G``."""

    D: np.ndarray
    H: np.ndarray
    G: np.ndarray

    @property
    def h(self):
        return np.diagonal(self.H)

    @property
    def g(self):
        return np.diagonal(self.G)

    @property
    def size(self):
        return self.D.shape[0]


def build_operators(cfg):
    k = cfg.wavenumbers
    size = cfg.size
    D = np.zeros((size, size), dtype=np.complex128)
    D[np.arange(size), np.arange(size)] = -1j * cfg.c * k - cfg.mu * k**2
    if cfg.epsilon != 0:
        quarter = cfg.epsilon / 4.0
        rows = np.arange(size - 1)
        # F_k couples to F_{k+1} with -i(k+1)eps/4 and to F_{k-1} with -i(k-1)eps/4
        D[rows, rows + 1] = -1j * (k[:-1] + 1) * quarter
        D[rows + 1, rows] = -1j * (k[1:] - 1) * quarter
    H = np.diag(1j * k.astype(np.float64))
    G = np.diag(-(k.astype(np.float64) ** 2))
    for arr in (D, H, G):
        arr.setflags(write=False)
    return OperatorSet(D=D, H=H, G=G)


def initial_state(cfg):
    """u(x, 0) = cos(k0 x): F_{+-k0} = 1/2, every other mode zero."""
    if abs(cfg.k0) > cfg.n_x:
        raise ConfigurationError("k0", f"|k0|={abs(cfg.k0)} exceeds truncation n_x={cfg.n_x}")
    F = np.zeros(cfg.size, dtype=np.complex128)
    F[cfg.n_x + cfg.k0] += 0.5
    F[cfg.n_x - cfg.k0] += 0.5
    return SpectralState(F=F, t=0.0)


def rhs(state, ops, rho, noise_value):
    """(D + rho n H) F."""
    F = state.F
    return ops.D @ F + (rho * noise_value) * (ops.h * F)


def mode_rhs(k, F_k, cfg, noise_value):
    """Right-hand side for a single uncoupled mode (eps = 0)."""
    return (-1j * k * cfg.c - cfg.mu * k * k + 1j * k * cfg.rho * noise_value) * F_k


def reconstruct(state, x, tol=1e-8):
    """Physical-space values u(x) = sum_k F_k exp(ikx).

    Raises NumericalConsistencyError if the imaginary part of the sum exceeds
    ``tol`` anywhere, which signals a loss of conjugate symmetry.
    """
    x = np.asarray(x, dtype=np.float64)
    k = state.wavenumbers
    u = np.exp(1j * np.multiply.outer(x, k)) @ state.F
    residue = float(np.max(np.abs(u.imag), initial=0.0))
    if residue > tol:
        raise NumericalConsistencyError(f"imaginary residue {residue:.3e} exceeds {tol:.1e}")
    return u.real


def choose_truncation(cfg, threshold, probe_nx=16, dt=1.0 / 766, alpha=0.0, seed=0):
    """Smallest N_x keeping every mode whose magnitude ever exceeds ``threshold``.

    A probe run (Euler with the generalized correction, on one noise
    realization) is made at truncation ``probe_nx``; the result is the smallest
    N_x >= |k0| such that max_t |F_k(t)| < threshold for all |k| > N_x.
    """
    from .correction import spectral_factor
    from .integrators import SchemeSpec, run
    from .noise import NoiseSpec, sample_realization

    if not threshold > 0:
        raise ValueError("threshold must be positive")
    if probe_nx < max(1, abs(cfg.k0)) + 1:
        raise ValueError("probe_nx must exceed |k0|")
    probe_cfg = replace(cfg, n_x=probe_nx)
    spec = NoiseSpec.for_step(alpha, dt)
    noise = sample_realization(spec, seed)
    result = run(
        probe_cfg,
        SchemeSpec("euler_forward", corrected=True, dt=spec.dt),
        noise,
        build_operators(probe_cfg),
        spectral_factor(spec),
        diagnostics=True,
    )
    peak = result.max_modulus
    if not np.all(np.isfinite(peak)):
        raise ProbeError("probe simulation produced non-finite mode amplitudes")
    # fold +k and -k together; index j of by_abs is |k| = j
    by_abs = np.maximum(peak[probe_nx:], peak[probe_nx::-1])
    if by_abs[-1] >= threshold:
        raise ProbeError(
            f"outermost probe mode |k|={probe_nx} reached {by_abs[-1]:.3e} >= {threshold:.1e}; "
            "increase probe_nx"
        )
    above = np.flatnonzero(by_abs >= threshold)
    needed = int(above[-1]) if above.size else 0
    return max(needed, abs(cfg.k0), 1)
