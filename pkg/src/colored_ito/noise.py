"""Band-limited colored noise built from a finite random trigonometric series.

A realization is

    n(t) = (N_f dt)**-1/2 * [C(w_0) b_0 / sqrt(2)
                             + sum_{m=1}^{N_f} C(w_m) (a_m sin(w_m t) + b_m cos(w_m t))]

with spectral damping C(w) = exp(-alpha w**2), frequencies w_m = 2 pi m / ((N-1) dt)
and N_f = (N-1)/2. ``alpha = 0`` gives a (band-limited) white noise; larger
``alpha`` reddens the spectrum. Every realization is periodic with period
(N-1) dt.
"""

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import ConfigurationError
from .rng import mix_seed, standard_normals

_CHUNK = 2048


@dataclass(frozen=True)
class NoiseSpec:
    """Resolution and color of the noise process.

    Parameters
    ----------
    alpha : float
        Color parameter, ``>= 0``.
    steps_per_unit : int
        N, the number of time levels per unit time counting both endpoints.
        Must be odd and at least 3.
    dt : float
        Bin width.
    """

    alpha: float
    steps_per_unit: int
    dt: float

    def __post_init__(self):
        if not math.isfinite(self.alpha) or self.alpha < 0:
            raise ConfigurationError("alpha", f"must be finite and >= 0, got {self.alpha!r}")
        n = self.steps_per_unit
        if int(n) != n or n < 3 or n % 2 == 0:
            raise ConfigurationError("steps_per_unit", f"must be an odd integer >= 3, got {n!r}")
        if not (self.dt > 0 and math.isfinite(self.dt)):
            raise ConfigurationError("dt", f"must be positive, got {self.dt!r}")

    @classmethod
    def for_step(cls, alpha, dt):
        """Spec whose resolution matches a simulation step ``dt``.

        Requires 1/dt + 1 to be odd, i.e. 1/dt an even integer (within 1e-9).
        The stored ``dt`` is snapped to exactly 1/(N-1).
        """
        if not dt > 0:
            raise ConfigurationError("dt", f"must be positive, got {dt!r}")
        inv = 1.0 / dt
        levels = round(inv)
        if abs(inv - levels) > 1e-9 * max(1.0, inv) or levels % 2 or levels < 2:
            raise ConfigurationError(
                "dt", f"1/dt + 1 must be an odd integer (1/dt an even integer), got dt={dt!r}"
            )
        return cls(alpha=float(alpha), steps_per_unit=levels + 1, dt=1.0 / levels)

    @property
    def n_freq(self):
        return (self.steps_per_unit - 1) // 2

    @property
    def period(self):
        return (self.steps_per_unit - 1) * self.dt

    @cached_property
    def omega(self):
        """Frequencies w_0..w_{N_f}; w_0 = 0."""
        m = np.arange(self.n_freq + 1, dtype=np.float64)
        return 2.0 * np.pi * m / self.period

    @cached_property
    def damping(self):
        """C(w_m) = exp(-alpha w_m**2) for m = 0..N_f."""
        return np.exp(-self.alpha * self.omega**2)

    @property
    def amplitude(self):
        return 1.0 / math.sqrt(self.n_freq * self.dt)

    @cached_property
    def variance_factor(self):
        """(1/N_f) [C(w_0)**2 / 2 + sum_m C(w_m)**2], evaluated at this N_f."""
        c2 = self.damping**2
        return float((0.5 * c2[0] + math.fsum(c2[1:])) / self.n_freq)

    @cached_property
    def _active(self):
        # modes whose damping underflowed to exactly zero contribute nothing
        return np.flatnonzero(self.damping[1:] > 0.0) + 1


@dataclass(frozen=True, eq=False)
class NoiseRealization:
    """One sampled noise path. ``a`` holds a_1..a_{N_f}, ``b`` holds b_0..b_{N_f}."""

    spec: NoiseSpec
    a: np.ndarray
    b: np.ndarray
    seed: int = None

    def __post_init__(self):
        nf = self.spec.n_freq
        a = np.asarray(self.a, dtype=np.float64)
        b = np.asarray(self.b, dtype=np.float64)
        if a.shape != (nf,) or b.shape != (nf + 1,):
            raise ValueError(f"expected a of length {nf} and b of length {nf + 1}")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    def _phases(self, t, m):
        # reduce t modulo the period before scaling so large m keeps its accuracy
        period = self.spec.period
        frac = np.fmod(t, period) / period
        return 2.0 * np.pi * np.mod(np.multiply.outer(frac, m), 1.0)

    def evaluate(self, t):
        """n(t) for scalar or array ``t``."""
        spec = self.spec
        t_arr = np.asarray(t, dtype=np.float64)
        flat = t_arr.ravel()
        idx = spec._active
        m = idx.astype(np.float64)
        ca = spec.damping[idx] * self.a[idx - 1]
        cb = spec.damping[idx] * self.b[idx]
        dc = spec.damping[0] * self.b[0] / math.sqrt(2.0)
        out = np.empty(flat.shape)
        for start in range(0, flat.size, _CHUNK):
            ph = self._phases(flat[start:start + _CHUNK], m)
            out[start:start + _CHUNK] = dc + np.sin(ph) @ ca + np.cos(ph) @ cb
        out *= spec.amplitude
        if t_arr.ndim == 0:
            return float(out[0])
        return out.reshape(t_arr.shape)

    def integrate(self, t0, t1):
        """Exact integral of n over [t0, t1] (scalars or broadcastable arrays)."""
        t0_arr, t1_arr = np.broadcast_arrays(
            np.asarray(t0, dtype=np.float64), np.asarray(t1, dtype=np.float64)
        )
        if np.any(t0_arr > t1_arr):
            raise ValueError("integrate requires t0 <= t1")
        spec = self.spec
        idx = spec._active
        m = idx.astype(np.float64)
        w = spec.omega[idx]
        ca = spec.damping[idx] * self.a[idx - 1]
        cb = spec.damping[idx] * self.b[idx]
        dc = spec.damping[0] * self.b[0] / math.sqrt(2.0)
        lo = t0_arr.ravel()
        hi = t1_arr.ravel()
        out = np.empty(lo.shape)
        for start in range(0, lo.size, _CHUNK):
            sl = slice(start, start + _CHUNK)
            h = hi[sl] - lo[sl]
            mid = self._phases(0.5 * (lo[sl] + hi[sl]), m)
            # (2/w) sin(w h / 2) written as h * sinc to stay exact as h -> 0
            weight = h[:, None] * np.sinc(np.multiply.outer(h, w) / (2.0 * np.pi))
            out[sl] = dc * h + (weight * (np.sin(mid) * ca + np.cos(mid) * cb)).sum(axis=1)
        out *= spec.amplitude
        if t0_arr.ndim == 0:
            return float(out[0])
        return out.reshape(t0_arr.shape)

    def evaluate_grid(self, count):
        """n(j dt) for j = 0..count-1 via an inverse FFT over one period."""
        return grid_values(self.spec, self.a, self.b, count)


def grid_values(spec, a, b, count):
    """Noise values on the uniform grid j*dt, j < count.

    ``a`` and ``b`` may carry leading batch dimensions (shape ``(..., N_f)`` and
    ``(..., N_f + 1)``); the result has shape ``(..., count)``. Phases on the
    grid are w_m j dt = 2 pi m j / (N - 1) exactly, so one inverse FFT of
    length N - 1 reproduces the direct trigonometric sum.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    nf = spec.n_freq
    length = spec.steps_per_unit - 1
    c = spec.damping
    coef = np.zeros(a.shape[:-1] + (length,), dtype=np.complex128)
    coef[..., 1:nf + 1] = c[1:] * (b[..., 1:] - 1j * a)
    periodic = (np.fft.ifft(coef, axis=-1) * length).real
    periodic += (c[0] / math.sqrt(2.0)) * b[..., :1]
    periodic *= spec.amplitude
    idx = np.arange(count) % length
    return periodic[..., idx]


def sample_realization(spec, seed):
    """Draw the coefficients of one realization from ``seed``.

    The 2 N_f + 1 normals are consumed in the order b_0..b_{N_f}, then a_1..a_{N_f}.
    """
    nf = spec.n_freq
    z = standard_normals(seed, 2 * nf + 1)
    return NoiseRealization(spec=spec, a=z[nf + 1:], b=z[:nf + 1], seed=seed)


def sample_ensemble(spec, base_seed, count, start=0):
    """Realizations ``start .. start+count-1`` seeded by ``mix_seed(base_seed, r)``."""
    return [sample_realization(spec, mix_seed(base_seed, r)) for r in range(start, start + count)]


def increment_variance(spec):
    """E[(delta beta)^2] = dt * S for bins of width dt, S the spectral factor."""
    return spec.dt * spec.variance_factor


def exact_increment_variance(spec, width):
    """E[(integral of n over a window of length ``width``)^2] without approximation.

    Each sinusoid contributes C(w)**2 * (2 sin(w width / 2) / w)**2 to the sum;
    the small-width limit recovers ``width**2 * S / dt``.
    """
    c2 = spec.damping**2
    w = spec.omega[1:]
    kernel = (width * np.sinc(w * width / (2.0 * np.pi))) ** 2
    return spec.amplitude**2 * (0.5 * c2[0] * width**2 + float(np.sum(c2[1:] * kernel)))


def autocorrelation(spec, lags, ensemble_size, seed, n_origins=64):
    """Empirical normalized autocorrelation of n at the given lags.

    Products n(t0) n(t0 + lag) are averaged over the ensemble and over
    ``n_origins`` time origins evenly spaced in [0, 1] (snapped to the grid),
    then divided by the same average at lag 0. Lags must be nonnegative
    multiples of ``spec.dt``.

    Returns a list of ``(lag, correlation)`` pairs in the order given.
    """
    lags = [float(x) for x in lags]
    if not lags:
        raise ValueError("lags must not be empty")
    if ensemble_size < 2:
        raise ValueError("ensemble_size must be >= 2")
    lag_idx = []
    for lag in lags:
        q = lag / spec.dt
        if lag < 0 or abs(q - round(q)) > 1e-9 * max(1.0, q):
            raise ValueError(f"lag {lag!r} is not a nonnegative multiple of dt")
        lag_idx.append(int(round(q)))
    origin_idx = np.rint(np.linspace(0.0, 1.0, n_origins) / spec.dt).astype(int)

    members = sample_ensemble(spec, seed, ensemble_size)
    a = np.stack([r.a for r in members])
    b = np.stack([r.b for r in members])
    grid = grid_values(spec, a, b, int(origin_idx.max()) + max(lag_idx) + 1)

    base = grid[:, origin_idx]
    norm = float(np.sum(base * base))
    out = []
    for lag, k in zip(lags, lag_idx):
        out.append((lag, float(np.sum(base * grid[:, origin_idx + k])) / norm))
    return out


def e_folding_time(autocorr):
    """First lag where the correlation drops below 1/e, linearly interpolated.

    Returns None when the threshold is never crossed within the given lags.
    """
    pts = list(autocorr)
    if not pts or pts[0][0] != 0:
        raise ValueError("autocorrelation must start at lag 0")
    threshold = math.exp(-1.0)
    for (l0, c0), (l1, c1) in zip(pts, pts[1:]):
        if c1 < threshold:
            return l0 + (c0 - threshold) / (c0 - c1) * (l1 - l0)
    return None
