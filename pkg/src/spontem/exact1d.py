"""Closed-form solution of the uniform-coupling, equidistant-frequency model.

The infinite uniform model (oscillators at l*epsilon for every nonzero
integer l, all coupled to the atom with strength eta) diagonalizes in
closed form: one eigenvalue is exactly zero and the others are the roots of

    tan(pi lam / eps) = (pi eta^2 / eps) * lam / (lam^2 + eta^2),

one in each interval (k*eps, k*eps + eps/2), mirrored for negative k.
Eigenvector coefficients are rational in lam, so time-dependent amplitudes
reduce to weighted trigonometric sums.  Truncating those sums at |l| <= L
reproduces the infinite model projected onto 2L+1 eigenvectors: evolution
stays exactly norm-preserving inside that projection, but the initial state
carries a small norm deficit of about 4*(eta/eps)^2/L, which is the
convention used throughout this module.  For a finite *matrix* model use
``arrowhead`` instead; the two agree as L grows and cross-validate in the
test suite.

All quantities are in natural units: hbar = 1, eps is the energy unit, time
is measured in 1/eps.  The golden-rule decay time is tau_F = eps/(2 pi eta^2).

A note on the eigenvector normalization: the atomic weight of eigenvector k
is 1/(3 + (pi eta/eps)^2 + (lam_k/eta)^2).  The identity

    1 + sum_l eta^2/(lam - l eps)^2 = 3 + (pi eta/eps)^2 + (lam/eta)^2

(valid on secular roots) fixes the (lam/eta)^2 form; the finite-matrix
cross-check in the tests confirms it numerically.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .model import natural_units_timescale

_SOLVE_FIXED_POINT = 60
_SOLVE_NEWTON = 4


@dataclass(frozen=True)
class Exact1DConfig:
    """Uniform-model parameters: spacing eps, coupling eta, truncation L."""

    epsilon: float
    eta: float
    truncation: int

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        if not self.eta > 0:
            raise ValueError("eta must be positive")
        if self.truncation < 1:
            raise ValueError("truncation must be >= 1")

    @property
    def ratio(self) -> float:
        return self.eta / self.epsilon

    @property
    def tau_f(self) -> float:
        return natural_units_timescale(self.epsilon, self.eta)


@lru_cache(maxsize=16)
def _positive_fracs(ratio: float, truncation: int) -> np.ndarray:
    """Fractional parts f_l of the positive secular roots x_l = l + f_l.

    Solved in units of eps (x = lam/eps).  Keeping the integer part l exact
    is what makes later differences x_l - k accurate at l ~ 10^5.
    """
    r = ratio
    l = np.arange(1, truncation + 1, dtype=float)

    def rhs(x):
        return np.pi * r * r * x / (x * x + r * r)

    f = np.arctan(rhs(l)) / np.pi
    for _ in range(_SOLVE_FIXED_POINT):
        f = np.arctan(rhs(l + f)) / np.pi
    for _ in range(_SOLVE_NEWTON):
        x = l + f
        g = np.tan(np.pi * f) - rhs(x)
        dg = np.pi / np.cos(np.pi * f) ** 2 - np.pi * r * r * (r * r - x * x) / (x * x + r * r) ** 2
        f = f - g / dg
    return f


def _roots_and_weights(cfg: Exact1DConfig):
    """Positive roots x_l (units of eps), their weights |alpha_l^0|^2, and
    the l=0 weight."""
    f = _positive_fracs(cfg.ratio, cfg.truncation)
    l = np.arange(1, cfg.truncation + 1, dtype=float)
    x = l + f
    x2comm = 3.0 + (np.pi * cfg.ratio) ** 2
    w = 1.0 / (x2comm + (x / cfg.ratio) ** 2)
    w0 = 3.0 / x2comm
    return x, f, w, w0


def secular_roots(cfg: Exact1DConfig) -> np.ndarray:
    """All 2L+1 eigenvalues, ascending: the mirrored tangent-equation roots
    and the exact zero eigenvalue.

    Positive roots are computed once and negated for the negative side, so
    the spectrum is antisymmetric by construction.
    """
    x, _, _, _ = _roots_and_weights(cfg)
    lam_pos = x * cfg.epsilon
    return np.concatenate([-lam_pos[::-1], [0.0], lam_pos])


def survival_amplitude(cfg: Exact1DConfig, t) -> np.ndarray:
    """Amplitude for the atom to remain excited after time t.

    Evaluates the truncated eigenweight sum

        w0 + sum_{1<=l<=L} 2 w_l cos(lam_l t),

    pairing +l with -l (their weights are equal), summed in ascending l with
    pairwise reduction.  |result|^2 is the excited-state population.  At
    t = 0 the result falls short of 1 by the truncation deficit.  Accepts a
    scalar or array t; returns complex (the sum is real by symmetry).
    """
    x, _, w, w0 = _roots_and_weights(cfg)
    lam = x * cfg.epsilon
    t_arr = np.atleast_1d(np.asarray(t, dtype=float))
    out = np.empty(t_arr.shape, dtype=complex)
    for i, ti in enumerate(t_arr):
        out[i] = w0 + 2.0 * np.sum(w * np.cos(lam * ti))
    return out if np.ndim(t) else out[0]


def emission_amplitude(cfg: Exact1DConfig, k: int, t) -> np.ndarray:
    """Amplitude of oscillator k (offset k*eps, k != 0) after time t.

    Truncated sum over all 2L+1 eigenvectors; the +l/-l terms are combined
    analytically so the difference lam_l - k*eps is evaluated as
    ((l - k) + f_l)*eps, exact in the integer part.  |result|^2 is the
    oscillator's excitation probability; it vanishes at t = 0 up to
    truncation residue.
    """
    k = int(k)
    if k == 0 or abs(k) > cfg.truncation:
        raise ValueError("k must satisfy 1 <= |k| <= truncation")
    x, f, w, w0 = _roots_and_weights(cfg)
    l = np.arange(1, cfg.truncation + 1, dtype=float)
    lam = x * cfg.epsilon
    dif = ((l - k) + f) * cfg.epsilon   # lam_l - k*eps
    ssum = ((l + k) + f) * cfg.epsilon  # lam_l + k*eps
    denom = dif * ssum
    eta = cfg.eta
    t_arr = np.atleast_1d(np.asarray(t, dtype=float))
    out = np.empty(t_arr.shape, dtype=complex)
    base = -(eta / (cfg.epsilon * k)) * w0
    for i, ti in enumerate(t_arr):
        c = np.cos(lam * ti)
        s = np.sin(lam * ti)
        re = base + 2.0 * eta * cfg.epsilon * k * np.sum(w * c / denom)
        im = -2.0 * eta * np.sum(w * s * lam / denom)
        out[i] = re + 1j * im
    return out if np.ndim(t) else out[0]


def emission_spectrum(cfg: Exact1DConfig, ks, t: float) -> np.ndarray:
    """Excitation probabilities |a_k(t)|^2 for an array of oscillator
    indices, evaluated with the same pairing as ``emission_amplitude``."""
    ks = np.asarray(ks, dtype=np.int64)
    if np.any(ks == 0) or np.any(np.abs(ks) > cfg.truncation):
        raise ValueError("indices must satisfy 1 <= |k| <= truncation")
    x, f, w, w0 = _roots_and_weights(cfg)
    l = np.arange(1, cfg.truncation + 1, dtype=float)
    lam = x * cfg.epsilon
    c = np.cos(lam * t)
    s = np.sin(lam * t)
    wc = w * c
    wsl = w * s * lam
    eta = cfg.eta
    out = np.empty(ks.size)
    for i, k in enumerate(ks):
        dif = ((l - k) + f) * cfg.epsilon
        ssum = ((l + k) + f) * cfg.epsilon
        denom = dif * ssum
        re = -(eta / (cfg.epsilon * k)) * w0 + 2.0 * eta * cfg.epsilon * k * np.sum(wc / denom)
        im = -2.0 * eta * np.sum(wsl / denom)
        out[i] = re * re + im * im
    return out


def golden_rule_deviation(cfg: Exact1DConfig, times) -> np.ndarray:
    """Excited-state population minus the golden-rule exponential.

    Returns |a0(t)|^2 - exp(-t/tau_F) with tau_F = eps/(2 pi eta^2),
    evaluated on the caller's time grid.
    """
    times = np.asarray(times, dtype=float)
    if np.any(times < 0):
        raise ValueError("times must be nonnegative")
    pop = np.abs(survival_amplitude(cfg, times)) ** 2
    return pop - np.exp(-times / cfg.tau_f)


class EigvecCoefficients:
    """Closed-form eigenvector coefficients alpha_k^l for one eigenvector k.

    ``atom`` is the l = 0 (atomic) component; calling the object with an
    integer array of oscillator indices l returns the field components.
    """

    def __init__(self, cfg: Exact1DConfig, k: int):
        if abs(k) > cfg.truncation:
            raise ValueError("|k| must be <= truncation")
        self.cfg = cfg
        self.k = int(k)
        x2comm = 3.0 + (np.pi * cfg.ratio) ** 2
        if k == 0:
            self.eigenvalue = 0.0
            self.atom = np.sqrt(3.0 / x2comm)
        else:
            fr = _positive_fracs(cfg.ratio, cfg.truncation)[abs(k) - 1]
            x = (abs(k) + fr) * np.sign(k)
            self.eigenvalue = x * cfg.epsilon
            self.atom = np.sqrt(1.0 / (x2comm + (x / cfg.ratio) ** 2))
            self._x = x

    def __call__(self, l) -> np.ndarray:
        l = np.asarray(l, dtype=np.int64)
        if np.any(l == 0):
            raise ValueError("oscillator indices are nonzero; use .atom for l = 0")
        if self.k == 0:
            return -(self.cfg.ratio / l) * self.atom
        # eta/(lam - l eps) with the integer part of the difference exact
        frac = self._x - self.k  # signed fractional part of the root
        dif = ((self.k - l) + frac) * self.cfg.epsilon
        return (self.cfg.eta / dif) * self.atom


def eigvec_coefficients(cfg: Exact1DConfig, k: int) -> EigvecCoefficients:
    """Accessor for the closed-form eigenvector coefficients of root k."""
    return EigvecCoefficients(cfg, k)
