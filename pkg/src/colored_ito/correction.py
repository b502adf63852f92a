"""Generalized Ito correction for noises of arbitrary color.

For ``du = D(u) dt + g(u) dR`` discretized with the noise increment sampled at
the left end of each bin, adding ``0.5 * g * dg/du * S`` to the drift makes the
scheme converge to the Stratonovich solution. ``S`` is the expected squared
increment per unit ``dt``; for the trigonometric noise of
:mod:`colored_ito.noise` it is the finite-resolution spectral factor

    S = (1/N_f) [C(w_0)**2 / 2 + sum_{m=1}^{N_f} C(w_m)**2].

S is always evaluated at the simulation's own N_f. For white noise it tends to 1
as N_f grows; for colored noise it tends to 0, but at any finite N_f it is at
least 1/(2 N_f) because the constant mode is undamped.
"""

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class CorrectionFactor:
    value: float
    spec: object = None

    def __float__(self):
        return self.value


def spectral_factor(spec):
    """The correction factor S for a :class:`~colored_ito.noise.NoiseSpec`."""
    return CorrectionFactor(value=spec.variance_factor, spec=spec)


def _value(factor):
    return factor.value if isinstance(factor, CorrectionFactor) else float(factor)


def scalar_correction(g_value, dg_du, factor):
    """Differential-form correction 0.5 * g * g' * S."""
    return 0.5 * g_value * dg_du * _value(factor)


def decentered_correction(g_value, dg_du, factor, lam):
    """Correction (1/2 - lam) * g * g' * S for a scheme sampling g at t_j + lam*dt.

    ``lam = 0`` is the Ito (forward Euler) case; ``lam = 1/2`` needs no correction.
    """
    if not 0.0 <= lam <= 1.0:
        raise ValueError(f"lambda must lie in [0, 1], got {lam!r}")
    return (0.5 - lam) * g_value * dg_du * _value(factor)


@dataclass(frozen=True)
class LinearNoiseCoupling:
    """Linear multiplicative couplings g_il(u) = (G_l u)_i, one matrix per channel."""

    matrices: tuple

    def __post_init__(self):
        mats = tuple(np.asarray(m, dtype=np.complex128) for m in self.matrices)
        if not mats:
            raise ValueError("at least one noise channel is required")
        n = mats[0].shape[0]
        for m in mats:
            if m.shape != (n, n):
                raise ValueError("coupling matrices must all be square with the same size")
        object.__setattr__(self, "matrices", mats)

    @property
    def channels(self):
        return len(self.matrices)

    @property
    def size(self):
        return self.matrices[0].shape[0]


def vector_correction(coupling, u, factors):
    """Correction vector 0.5 * sum_l S_l * G_l (G_l u) for linear couplings.

    With g_il = (G_l u)_i one has sum_k (dg_il/du_k) g_kl = (G_l G_l u)_i.
    """
    u = np.asarray(u, dtype=np.complex128)
    if u.shape != (coupling.size,):
        raise ValueError(f"state has shape {u.shape}, coupling expects ({coupling.size},)")
    if isinstance(factors, (CorrectionFactor, float, int)):
        factors = [factors]
    factors = list(factors)
    if len(factors) != coupling.channels:
        raise ValueError(f"{coupling.channels} channels but {len(factors)} factors")
    out = np.zeros_like(u)
    for mat, s in zip(coupling.matrices, factors):
        out += _value(s) * (mat @ (mat @ u))
    return 0.5 * out
