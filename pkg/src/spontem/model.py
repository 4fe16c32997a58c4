"""Core domain types and unit conventions.

All simulation modules share these containers.  Two unit systems are in
play: the pseudo-1D modules work in natural units (hbar = 1, the oscillator
spacing as the energy unit) while the 3D-box module works in SI angular
frequencies (rad/s), with the Hamiltonian divided by hbar.  Frequencies are
always stored as offsets from the atomic resonance (rotating frame), which
keeps the diagonal near zero instead of near 1e15 rad/s.
`to_natural_units` is the one sanctioned bridge between the two systems.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class ModeGeometry:
    """Per-mode wavevector record for 3D-box modes.

    kx, ky, kz are the wavevector components (1/m), theta the polar angle
    between the wavevector and the z axis (rad).  n_index holds the lattice
    integers (n_x, n_y, n_z) that generated each mode; it is what makes the
    enumeration order reproducible and testable.
    """

    kx: np.ndarray
    ky: np.ndarray
    kz: np.ndarray
    theta: np.ndarray
    n_index: np.ndarray  # shape (N, 3), integer lattice triples

    def __post_init__(self):
        for name in ("kx", "ky", "kz", "theta"):
            object.__setattr__(self, name, _freeze(np.asarray(getattr(self, name), dtype=float)))
        object.__setattr__(self, "n_index", _freeze(np.asarray(self.n_index, dtype=np.int64)))
        n = self.kx.shape[0]
        if not (self.ky.shape == self.kz.shape == self.theta.shape == (n,)):
            raise ValueError("geometry arrays must share one length")
        if self.n_index.shape != (n, 3):
            raise ValueError("n_index must have shape (N, 3)")

    def __len__(self) -> int:
        return self.kx.shape[0]


@dataclass(frozen=True)
class ModeSet:
    """A field-oscillator ensemble.

    offsets: angular-frequency offsets from the atomic resonance (rad/s in
    SI runs, multiples of the energy unit in natural-unit runs).
    couplings: real coupling constants, same unit as offsets.
    geometry: optional wavevector record (present for 3D-box modes).
    Duplicate offsets are legitimate only for 3D modes, where distinct
    wavevectors can be degenerate in frequency.
    """

    offsets: np.ndarray
    couplings: np.ndarray
    geometry: Optional[ModeGeometry] = None

    def __post_init__(self):
        offsets = np.asarray(self.offsets, dtype=float)
        couplings = np.asarray(self.couplings, dtype=float)
        if offsets.ndim != 1 or couplings.shape != offsets.shape:
            raise ValueError("offsets and couplings must be 1D arrays of equal length")
        if offsets.size < 1:
            raise ValueError("a ModeSet needs at least one mode")
        if not np.all(np.isfinite(offsets)) or not np.all(np.isfinite(couplings)):
            raise ValueError("offsets and couplings must be finite")
        if self.geometry is None and np.unique(offsets).size != offsets.size:
            raise ValueError("duplicate offsets are only allowed when geometry is present")
        if self.geometry is not None and len(self.geometry) != offsets.size:
            raise ValueError("geometry length does not match mode count")
        object.__setattr__(self, "offsets", _freeze(offsets))
        object.__setattr__(self, "couplings", _freeze(couplings))

    def __len__(self) -> int:
        return self.offsets.size

    @property
    def n_modes(self) -> int:
        return self.offsets.size


def to_natural_units(modes: ModeSet, energy_unit: float) -> ModeSet:
    """Convert a ModeSet to natural units with `energy_unit` as the unit.

    Divides offsets and couplings by `energy_unit` (rad/s).  This is the
    single conversion bridge between the SI 3D-box modules and the
    natural-unit pseudo-1D modules; geometry is carried along unchanged.
    """
    if energy_unit <= 0:
        raise ValueError("energy_unit must be positive")
    return ModeSet(
        offsets=modes.offsets / energy_unit,
        couplings=modes.couplings / energy_unit,
        geometry=modes.geometry,
    )


@dataclass(frozen=True)
class ArrowheadHamiltonian:
    """Single-photon-subspace Hamiltonian in site basis.

    head: m x m real symmetric atomic block (m = 1 or 2).
    diag: N oscillator diagonal entries (frequency offsets).
    border: m x N coupling rows.
    The full matrix is [[head, border], [border.T, diag(diag)]].
    """

    head: np.ndarray
    diag: np.ndarray
    border: np.ndarray

    def __post_init__(self):
        head = np.atleast_2d(np.asarray(self.head, dtype=float))
        diag = np.asarray(self.diag, dtype=float)
        border = np.atleast_2d(np.asarray(self.border, dtype=float))
        m = head.shape[0]
        if m not in (1, 2) or head.shape != (m, m):
            raise ValueError("head must be 1x1 or 2x2")
        if not np.allclose(head, head.T, atol=0.0, rtol=0.0):
            raise ValueError("head must be symmetric")
        if diag.ndim != 1 or diag.size < 1:
            raise ValueError("diag must be a nonempty 1D array")
        if border.shape != (m, diag.size):
            raise ValueError("border must have shape (m, N)")
        object.__setattr__(self, "head", _freeze(head))
        object.__setattr__(self, "diag", _freeze(diag))
        object.__setattr__(self, "border", _freeze(border))

    @property
    def m(self) -> int:
        return self.head.shape[0]

    @property
    def n_oscillators(self) -> int:
        return self.diag.size

    @property
    def dim(self) -> int:
        return self.m + self.diag.size

    def to_dense(self) -> np.ndarray:
        m, n = self.m, self.diag.size
        h = np.zeros((m + n, m + n))
        h[:m, :m] = self.head
        h[:m, m:] = self.border
        h[m:, :m] = self.border.T
        idx = np.arange(m, m + n)
        h[idx, idx] = self.diag
        return h


@dataclass(frozen=True)
class EigenDecomposition:
    """Eigenvalues (ascending) and orthonormal eigenvector columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.eigenvalues, dtype=float)
        v = np.asarray(self.eigenvectors, dtype=float)
        if w.ndim != 1 or v.shape != (w.size, w.size):
            raise ValueError("need n eigenvalues and an n x n eigenvector matrix")
        if np.any(np.diff(w) < 0):
            raise ValueError("eigenvalues must be ascending")
        object.__setattr__(self, "eigenvalues", _freeze(w))
        object.__setattr__(self, "eigenvectors", _freeze(v))

    @property
    def dim(self) -> int:
        return self.eigenvalues.size

    def atom_row(self, index: int = 0) -> np.ndarray:
        """Row of eigenvector components on one site (the atom by default)."""
        return self.eigenvectors[index, :]

    def to_eigen(self, amplitudes: np.ndarray) -> np.ndarray:
        return self.eigenvectors.T @ amplitudes

    def from_eigen(self, amplitudes: np.ndarray) -> np.ndarray:
        return self.eigenvectors @ amplitudes


@dataclass(frozen=True)
class StateVector:
    """Complex amplitudes over the (m + N)-dimensional single-photon basis.

    basis is "site" (atom(s) first, then oscillators) or "eigen".
    """

    amplitudes: np.ndarray
    basis: str = "site"

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex)
        if amps.ndim != 1 or amps.size < 2:
            raise ValueError("amplitudes must be a 1D array of length >= 2")
        if self.basis not in ("site", "eigen"):
            raise ValueError("basis must be 'site' or 'eigen'")
        nrm = np.linalg.norm(amps)
        if abs(nrm - 1.0) > 1e-6:
            raise ValueError(f"state norm {nrm!r} is not 1 within 1e-6")
        object.__setattr__(self, "amplitudes", _freeze(amps))

    def __len__(self) -> int:
        return self.amplitudes.size

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))


def basis_state(dim: int, index: int, basis: str = "site") -> StateVector:
    """Unit amplitude on one basis element (index 0 = the atom)."""
    amps = np.zeros(dim, dtype=complex)
    amps[index] = 1.0
    return StateVector(amps, basis=basis)


@dataclass(frozen=True)
class SpectrumResult:
    """Per-oscillator excitation probabilities keyed by frequency offset."""

    frequencies: np.ndarray
    probabilities: np.ndarray
    angles: Optional[np.ndarray] = None

    def __post_init__(self):
        f = np.asarray(self.frequencies, dtype=float)
        p = np.asarray(self.probabilities, dtype=float)
        if f.shape != p.shape or f.ndim != 1:
            raise ValueError("frequencies and probabilities must be 1D arrays of equal length")
        if np.any(p < -1e-15) or np.any(p > 1.0 + 1e-12):
            raise ValueError("probabilities must lie in [0, 1]")
        if p.sum() > 1.0 + 1e-9:
            raise ValueError("probabilities must sum to at most 1")
        object.__setattr__(self, "frequencies", _freeze(f))
        object.__setattr__(self, "probabilities", _freeze(np.clip(p, 0.0, 1.0)))
        if self.angles is not None:
            a = np.asarray(self.angles, dtype=float)
            if a.shape != f.shape:
                raise ValueError("angles must match frequencies in length")
            object.__setattr__(self, "angles", _freeze(a))

    @property
    def total_probability(self) -> float:
        return float(self.probabilities.sum())


def natural_units_timescale(epsilon: float, eta: float) -> float:
    """Golden-rule decay time tau_F = epsilon / (2 pi eta^2).

    epsilon is the oscillator frequency spacing and eta the uniform coupling,
    both in the same energy/frequency unit; the result is in the inverse
    unit.  The decay rate of the uniform model is 1/tau_F = 2 pi eta^2 / eps.
    """
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    if eta == 0.0:
        raise ValueError("eta must be nonzero (division by zero in 1/tau_F)")
    return epsilon / (2.0 * math.pi * eta * eta)
