"""Eigendecomposition of arrowhead and bordered-arrowhead Hamiltonians.

The single-atom Hamiltonian in the single-photon subspace is an arrowhead
matrix: a diagonal of oscillator offsets bordered by one dense coupling
row.  Its eigenvalues are the roots of the secular function

    f(lambda) = lambda - d0 - sum_k eta_k^2 / (lambda - eps_k),

one root strictly between each pair of adjacent distinct coupled diagonal
entries plus one exterior root on each end.  Roots are found by bisection
into a guaranteed bracket followed by safeguarded Newton polish, evaluated
in coordinates shifted to the nearest pole so the critical difference
lambda - eps_k never suffers cancellation.  Eigenvector components follow
as eta_k / (lambda - eps_k) with the atom component fixed by normalization.

Zero couplings and exactly repeated diagonal entries deflate: a degenerate
cluster is rotated so a single member carries the aggregated coupling
sqrt(sum eta_i^2) and the rest become exact eigenpairs at the cluster value.

Two-atom (bordered) Hamiltonians reduce in two stages: rotate the atomic
pair so one combination carries the dominant coupling row, solve that
arrowhead, then couple the residual atomic state to its eigenvectors, which
is again an arrowhead problem.

``ArrowheadEigensystem`` / ``BorderedEigensystem`` keep eigenvectors in
structured (implicit) form so basis transforms cost O(N) memory; the
module-level functions materialize dense ``EigenDecomposition`` objects.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import digamma, polygamma

from .model import ArrowheadHamiltonian, EigenDecomposition

# Cap on dense eigenvector storage, m+N <= this.
DENSE_DIM_CAP = 20_001

_BISECT_PASSES = 28
_NEWTON_PASSES = 8
_MAX_ITER = 200
_RTOL = 1e-13
_CHUNK = 2048


class ArrowheadSolverError(RuntimeError):
    """Secular root search failed or structural assumptions are violated."""


@dataclass(frozen=True)
class SecularSolveReport:
    """Diagnostics of one secular eigensolve."""

    iterations: np.ndarray  # per secular root
    max_residual: float     # max |f(root)| / max(1, |root|)
    deflation_count: int


def build_1d_hamiltonian(n_oscillators: int, epsilon: float, eta: float) -> ArrowheadHamiltonian:
    """Uniform pseudo-1D model: oscillators on the symmetric integer grid.

    Offsets are k*epsilon for k = -(N-1)/2 .. (N-1)/2 (integers for odd N,
    half-integers for even N), every one coupled to the atom with strength
    eta; the atomic diagonal entry is 0 (resonance).
    """
    if n_oscillators < 1:
        raise ValueError("need at least one oscillator")
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    k = np.arange(n_oscillators) - (n_oscillators - 1) / 2.0
    return ArrowheadHamiltonian(
        head=np.zeros((1, 1)),
        diag=k * epsilon,
        border=np.full((1, n_oscillators), float(eta)),
    )


# ---------------------------------------------------------------------------
# secular root finding (vectorized across roots)
# ---------------------------------------------------------------------------

def _eval_secular(d0, poles, weights, sigma, sigma_idx, mu,
                  chunk=_CHUNK, derivative=True):
    """f (and optionally f') at lambda = sigma + mu, shift pole exact.

    sigma is poles[sigma_idx]; lambda - poles[k] is computed as
    (sigma - poles[k]) + mu so the nearest-pole term is exactly w/mu.
    """
    s1 = np.zeros(mu.size)
    s2 = np.zeros(mu.size) if derivative else None
    for lo in range(0, poles.size, chunk):
        pc = poles[lo:lo + chunk]
        wc = weights[lo:lo + chunk]
        d = (sigma[:, None] - pc[None, :]) + mu[:, None]
        inpatch = (sigma_idx >= lo) & (sigma_idx < lo + pc.size)
        if np.any(inpatch):
            rows = np.nonzero(inpatch)[0]
            d[rows, sigma_idx[rows] - lo] = mu[rows]
        t = wc[None, :] / d
        s1 += t.sum(axis=1)
        if derivative:
            t /= d
            s2 += t.sum(axis=1)
    f = (sigma - d0 + mu) - s1
    if not derivative:
        return f, None
    return f, 1.0 + s2


class _SecularWorkspace:
    """Preallocated evaluation of the secular sums for one fixed shift map.

    Stores the patched pole-difference matrix once so each iteration is a
    broadcast add, a division, and a row sum; falls back to the chunked
    evaluator when the matrix would not fit comfortably in memory.
    """

    MAX_ELEMENTS = 65_000_000  # ~0.5 GB per buffer

    def __init__(self, d0, poles, weights, sigma, sigma_idx):
        self.d0 = d0
        self.poles = poles
        self.weights = weights
        self.sigma = sigma
        self.sigma_idx = sigma_idx
        self.direct = (sigma.size * poles.size) <= self.MAX_ELEMENTS
        if self.direct:
            self.dmat = sigma[:, None] - poles[None, :]
            self.dmat[np.arange(sigma.size), sigma_idx] = 0.0
            self.buf = np.empty_like(self.dmat)
            self.tbuf = np.empty_like(self.dmat)

    def __call__(self, mu, derivative=True):
        if not self.direct:
            return _eval_secular(self.d0, self.poles, self.weights,
                                 self.sigma, self.sigma_idx, mu,
                                 derivative=derivative)
        np.add(self.dmat, mu[:, None], out=self.buf)
        np.divide(self.weights[None, :], self.buf, out=self.tbuf)
        f = (self.sigma - self.d0 + mu) - self.tbuf.sum(axis=1)
        if not derivative:
            return f, None
        np.divide(self.tbuf, self.buf, out=self.tbuf)
        return f, 1.0 + self.tbuf.sum(axis=1)


def _solve_secular(d0, poles, weights):
    """All M+1 roots of the secular function for M coupled poles.

    poles must be strictly increasing, weights strictly positive.  Returns
    (roots, sigma_idx, mu, iterations) with root = poles[sigma_idx] + mu.
    """
    m = poles.size
    tiny = np.finfo(float).tiny
    wsum = weights.sum()
    # outer bounds with a guaranteed sign change (quadratic tail bound)
    g_lo = poles[0] - d0
    s_lo = 0.5 * (g_lo + math.sqrt(g_lo * g_lo + 4.0 * wsum)) + 1e-3 * (1.0 + abs(poles[0]))
    g_hi = poles[-1] - d0
    s_hi = 0.5 * (-g_hi + math.sqrt(g_hi * g_hi + 4.0 * wsum)) + 1e-3 * (1.0 + abs(poles[-1]))

    sigma_idx = np.empty(m + 1, dtype=np.int64)
    sigma_idx[0] = 0
    sigma_idx[m] = m - 1
    iterations = np.zeros(m + 1, dtype=np.int64)

    mu_lo = np.empty(m + 1)
    mu_hi = np.empty(m + 1)
    mu_lo[0], mu_hi[0] = -s_lo, 0.0
    mu_lo[m], mu_hi[m] = 0.0, s_hi
    if m > 1:
        # pick the shift pole of each interior root from the midpoint sign
        left = np.arange(0, m - 1)
        mid = 0.5 * (poles[:-1] + poles[1:])
        f_mid, _ = _eval_secular(d0, poles, weights, poles[left], left,
                                 mid - poles[left], derivative=False)
        go_left = f_mid > 0.0  # f increasing: root lies left of the midpoint
        sigma_idx[1:m] = np.where(go_left, left, left + 1)
        sig = poles[sigma_idx[1:m]]
        mu_lo[1:m] = np.where(go_left, 0.0, mid - sig)
        mu_hi[1:m] = np.where(go_left, mid - sig, 0.0)
        iterations[1:m] += 1

    sigma = poles[sigma_idx]
    evaluate = _SecularWorkspace(d0, poles, weights, sigma, sigma_idx)
    mu = 0.5 * (mu_lo + mu_hi)
    for _ in range(_BISECT_PASSES):
        f, _ = evaluate(mu, derivative=False)
        neg = f < 0.0
        mu_lo = np.where(neg, mu, mu_lo)
        mu_hi = np.where(neg, mu_hi, mu)
        iterations += 1
        mu = 0.5 * (mu_lo + mu_hi)

    for _ in range(_NEWTON_PASSES):
        f, fp = evaluate(mu)
        neg = f < 0.0
        mu_lo = np.where(neg, mu, mu_lo)
        mu_hi = np.where(neg, mu_hi, mu)
        mu_new = mu - f / fp
        # strict bounds: a step that lands exactly on the current point
        # (converged root on a bracket edge) must not get kicked away
        outside = (mu_new < mu_lo) | (mu_new > mu_hi)
        mu_new = np.where(outside, 0.5 * (mu_lo + mu_hi), mu_new)
        moved = np.abs(mu_new - mu)
        iterations += 1
        mu = mu_new
        scale = np.maximum(np.abs(sigma + mu), np.abs(mu))
        if np.all(moved <= _RTOL * np.maximum(scale, tiny)):
            break

    f, fp = evaluate(mu)
    lam = sigma + mu
    err = np.abs(f) / fp
    bad = (err > 1e-10 * np.maximum(1.0, np.abs(lam))) | (iterations > _MAX_ITER)
    if np.any(bad):
        i = int(np.nonzero(bad)[0][0])
        lo_b = poles[sigma_idx[i]] + mu_lo[i]
        hi_b = poles[sigma_idx[i]] + mu_hi[i]
        raise ArrowheadSolverError(
            f"secular root {i} did not converge in bracket ({lo_b!r}, {hi_b!r})"
        )
    return lam, sigma_idx, mu, iterations


# ---------------------------------------------------------------------------
# deflation bookkeeping
# ---------------------------------------------------------------------------

def _deflate(diag, eta, cluster_rtol=1e-14):
    """Split oscillators into the coupled secular problem plus deflated ones.

    Returns a dict with:
      poles, weights  -- unique coupled pole values, aggregated eta^2
      order           -- coupled oscillator indices sorted by diagonal value
      pole_of_osc     -- pole position for each entry of `order`
      zero            -- indices of zero-coupling oscillators
      clusters        -- list of (pole_position, member_indices), size > 1
    """
    zero = np.nonzero(eta == 0.0)[0]
    coupled = np.nonzero(eta != 0.0)[0]
    order = coupled[np.argsort(diag[coupled], kind="stable")]
    dsort = diag[order]
    if order.size:
        newgrp = np.empty(order.size, dtype=bool)
        newgrp[0] = True
        scale = np.maximum(np.abs(dsort[1:]), 1.0)
        newgrp[1:] = np.diff(dsort) > cluster_rtol * scale
        grp = np.cumsum(newgrp) - 1
        first = np.nonzero(newgrp)[0]
        poles = dsort[first]
        weights = np.zeros(poles.size)
        np.add.at(weights, grp, eta[order] ** 2)
        counts = np.bincount(grp)
        clusters = [(p, order[grp == p]) for p in np.nonzero(counts > 1)[0]]
        pole_of_osc = grp
    else:
        poles = np.empty(0)
        weights = np.empty(0)
        pole_of_osc = np.empty(0, dtype=np.int64)
        clusters = []
    return {
        "poles": poles,
        "weights": weights,
        "order": order,
        "pole_of_osc": pole_of_osc,
        "zero": zero,
        "clusters": clusters,
    }


# ---------------------------------------------------------------------------
# structured eigensystem, m = 1
# ---------------------------------------------------------------------------

class ArrowheadEigensystem:
    """Structured (implicit-eigenvector) arrowhead eigensystem, m = 1.

    Supports zero couplings; exactly degenerate coupled diagonal entries are
    not supported here (the dense ``eigendecompose_arrowhead`` deflates
    them).  Eigenvector columns are never stored: transforms evaluate
    eta_k/(lambda - eps_k) in chunks, substituting the exactly-solved pole
    offset where the difference would cancel.
    """

    def __init__(self, d0, diag, eta):
        diag = np.asarray(diag, dtype=float)
        eta = np.asarray(eta, dtype=float)
        self.d0 = float(d0)
        self.diag = diag
        self.eta = eta
        self.dim = diag.size + 1
        defl = _deflate(diag, eta)
        if defl["clusters"]:
            raise ArrowheadSolverError(
                "degenerate coupled diagonal entries; use eigendecompose_arrowhead"
            )
        self._defl = defl
        self._init_from_secular(*self._solve())

    def _solve(self):
        poles, weights = self._defl["poles"], self._defl["weights"]
        if poles.size == 0:
            return (np.array([self.d0]), np.zeros(1, dtype=np.int64),
                    np.zeros(1), np.zeros(1, dtype=np.int64), np.ones(1))
        lam, sigma_idx, mu, iters = _solve_secular(self.d0, poles, weights)
        _, fp = _eval_secular(self.d0, poles, weights, poles[sigma_idx], sigma_idx, mu)
        return lam, sigma_idx, mu, iters, 1.0 / np.sqrt(fp)

    def _init_from_secular(self, sec_lam, sigma_idx, mu, iters, atom_sec):
        self._sec_lam = sec_lam
        self._sigma_idx = sigma_idx
        self._mu = mu
        self._iterations = iters
        self._atom_sec = atom_sec
        zero = self._defl["zero"]
        lam_all = np.concatenate([sec_lam, self.diag[zero]])
        src = np.concatenate([np.arange(sec_lam.size), -(zero + 1)])  # <0 marks deflated
        order = np.argsort(lam_all, kind="stable")
        self.eigenvalues = lam_all[order]
        self._src = src[order]
        self._sec_pos = np.nonzero(self._src >= 0)[0]
        self._defl_pos = np.nonzero(self._src < 0)[0]
        self._defl_osc = -(self._src[self._defl_pos] + 1)
        self.atom_components = np.zeros(self.eigenvalues.size)
        self.atom_components[self._sec_pos] = atom_sec[self._src[self._sec_pos]]

    @property
    def report(self) -> SecularSolveReport:
        poles, weights = self._defl["poles"], self._defl["weights"]
        if poles.size:
            f, _ = _eval_secular(
                self.d0, poles, weights, poles[self._sigma_idx], self._sigma_idx, self._mu
            )
            res = float(np.max(np.abs(f) / np.maximum(1.0, np.abs(self._sec_lam))))
        else:
            res = 0.0
        return SecularSolveReport(
            iterations=self._iterations.copy(),
            max_residual=res,
            deflation_count=int(self._defl["zero"].size),
        )

    def _sec_diffs(self, lo, hi):
        """lambda_j - eps_k for secular roots j, oscillators k in [lo, hi),
        with the shift-pole entry replaced by the exactly-solved offset."""
        d = self._sec_lam[:, None] - self.diag[lo:hi][None, :]
        if self._defl["poles"].size:
            shift_osc = self._defl["order"][self._sigma_idx]
            rows = np.nonzero((shift_osc >= lo) & (shift_osc < hi))[0]
            d[rows, shift_osc[rows] - lo] = self._mu[rows]
        zero_cols = np.nonzero(self.eta[lo:hi] == 0.0)[0]
        if zero_cols.size:
            d[:, zero_cols] = 1.0  # dummy; these columns multiply eta = 0
        return d

    def to_eigen(self, x):
        """Site amplitudes (atom first) -> eigenbasis amplitudes."""
        x = np.asarray(x)
        acc = np.zeros(self._sec_lam.size, dtype=x.dtype)
        for lo in range(0, self.diag.size, _CHUNK):
            hi = min(lo + _CHUNK, self.diag.size)
            d = self._sec_diffs(lo, hi)
            acc += (self.eta[lo:hi][None, :] / d) @ x[1 + lo:1 + hi]
        sec_y = self._atom_sec * (x[0] + acc)
        y = np.zeros(self.eigenvalues.size, dtype=x.dtype)
        y[self._sec_pos] = sec_y[self._src[self._sec_pos]]
        y[self._defl_pos] = x[1 + self._defl_osc]
        return y

    def from_eigen(self, y):
        """Eigenbasis amplitudes -> site amplitudes (atom first)."""
        y = np.asarray(y)
        ysec = np.empty(self._sec_lam.size, dtype=y.dtype)
        ysec[self._src[self._sec_pos]] = y[self._sec_pos]
        w = self._atom_sec * ysec
        x = np.zeros(self.dim, dtype=y.dtype)
        x[0] = w.sum()
        for lo in range(0, self.diag.size, _CHUNK):
            hi = min(lo + _CHUNK, self.diag.size)
            d = self._sec_diffs(lo, hi)
            x[1 + lo:1 + hi] = self.eta[lo:hi] * (w @ (1.0 / d))
        x[1 + self._defl_osc] += y[self._defl_pos]
        return x

    def materialize(self) -> EigenDecomposition:
        if self.dim > DENSE_DIM_CAP:
            raise ArrowheadSolverError(f"dense eigenvectors capped at dim {DENSE_DIM_CAP}")
        cols = np.empty((self.dim, self._sec_lam.size))
        cols[0, :] = 1.0
        for lo in range(0, self.diag.size, _CHUNK):
            hi = min(lo + _CHUNK, self.diag.size)
            d = self._sec_diffs(lo, hi)
            cols[1 + lo:1 + hi, :] = (self.eta[lo:hi][None, :] / d).T
        cols /= np.linalg.norm(cols, axis=0)[None, :]
        u = np.zeros((self.dim, self.dim))
        u[:, self._sec_pos] = cols[:, self._src[self._sec_pos]]
        u[1 + self._defl_osc, self._defl_pos] = 1.0
        return EigenDecomposition(self.eigenvalues, u)


class UniformArrowheadEigensystem(ArrowheadEigensystem):
    """Fast path for the uniform integer grid: oscillators at k*eps, k=-K..K.

    The pole sums collapse to digamma/trigamma differences, so the secular
    solve costs O(1) per root instead of O(N).  Roots are solved in offset
    coordinates relative to the left bracket pole, which keeps the critical
    difference lambda - k*eps exact even at k ~ 10^5.
    """

    def __init__(self, k_side: int, epsilon: float, eta: float, d0: float = 0.0):
        if k_side < 1:
            raise ValueError("k_side must be >= 1")
        if not epsilon > 0 or eta == 0.0:
            raise ValueError("need epsilon > 0 and eta != 0")
        kk = int(k_side)
        w = (eta / epsilon) ** 2
        c = d0 / epsilon

        def g(x):
            return x - c - w * (digamma(x + kk + 1) - digamma(x - kk))

        def gp(x):
            return 1.0 + w * (polygamma(1, x - kk) - polygamma(1, x + kk + 1))

        # interior roots: one in (i, i+1) for i = -K .. K-1, solved in f-space
        i = np.arange(-kk, kk).astype(float)
        flo = np.full(i.size, 0.0)
        fhi = np.full(i.size, 1.0)
        f = np.full(i.size, 0.5)
        for _ in range(44):
            neg = g(i + f) < 0.0
            flo = np.where(neg, f, flo)
            fhi = np.where(neg, fhi, f)
            f = 0.5 * (flo + fhi)
        for _ in range(8):
            x = i + f
            fn = f - g(x) / gp(x)
            outside = (fn <= flo) | (fn >= fhi)
            fn = np.where(outside, 0.5 * (flo + fhi), fn)
            neg = g(i + fn) < 0.0
            flo = np.where(neg, fn, flo)
            fhi = np.where(neg, fhi, fn)
            f = fn

        wsum = w * (2 * kk + 1)

        def exterior(side):
            if side > 0:
                gg = kk - c
                s = 0.5 * (-gg + math.sqrt(gg * gg + 4.0 * wsum)) + 1e-3 * (1 + kk)
                a, b = 0.0, s

                def h(t):
                    return g(kk + t)
            else:
                gg = -(-kk - c)
                s = 0.5 * (gg + math.sqrt(gg * gg + 4.0 * wsum)) + 1e-3 * (1 + kk)
                a, b = -s, 0.0

                def h(t):
                    return g(-kk + t)
            for _ in range(100):
                mid = 0.5 * (a + b)
                if h(mid) < 0.0:
                    a = mid
                else:
                    b = mid
            return 0.5 * (a + b)

        f_bot = exterior(-1)
        f_top = exterior(+1)
        pole_int = np.concatenate([[-kk], i.astype(np.int64), [kk]]).astype(np.int64)
        frac = np.concatenate([[f_bot], f, [f_top]])
        xs = pole_int + frac

        diag = np.arange(-kk, kk + 1) * epsilon
        etas = np.full(2 * kk + 1, float(eta))
        self.d0 = float(d0)
        self.diag = diag
        self.eta = etas
        self.dim = diag.size + 1
        self._defl = _deflate(diag, etas)
        s2 = polygamma(1, xs - kk) - polygamma(1, xs + kk + 1)
        atom_sec = 1.0 / np.sqrt(1.0 + w * s2)
        self._init_from_secular(
            sec_lam=xs * epsilon,
            sigma_idx=pole_int + kk,
            mu=frac * epsilon,
            iters=np.full(xs.size, 52, dtype=np.int64),
            atom_sec=atom_sec,
        )


# ---------------------------------------------------------------------------
# bordered (m = 2) eigensystem
# ---------------------------------------------------------------------------

class BorderedEigensystem:
    """Two-atom bordered arrowhead, reduced through two arrowhead stages.

    Stage i rotates the atomic pair so the first combination carries the
    dominant coupling row; for exactly equal rows this is the symmetric
    combination with coupling sqrt(2)*eta and the antisymmetric one is left
    uncoupled.  Stage ii diagonalizes (coupled combination + oscillators).
    Stage iii couples the residual atomic state to those eigenvectors
    through the rotated head off-diagonal plus any residual coupling row --
    again an arrowhead, solved by the same machinery.

    Internal basis order is (residual atom, coupled atom, oscillators).
    """

    def __init__(self, ham: ArrowheadHamiltonian, *, stage2=None):
        if ham.m != 2:
            raise ValueError("BorderedEigensystem needs m = 2")
        self.ham = ham
        a = ham.head
        b = ham.border
        if np.array_equal(b[0], b[1]):
            g = np.array([[1.0, 1.0], [1.0, -1.0]]) / math.sqrt(2.0)
            row1 = b[0] * math.sqrt(2.0)
            row2 = np.zeros_like(row1)
        else:
            g, s, _ = np.linalg.svd(b, full_matrices=True)
            rot = g.T @ b
            row1, row2 = rot[0], rot[1]
            cut = 1e-14 * max(float(np.max(np.abs(row1))), 1e-300)
            row2 = np.where(np.abs(row2) <= cut, 0.0, row2)
        ahead = g.T @ a @ g
        self._g = g
        self._a_ts = float(ahead[0, 1])
        self._s1 = stage2 if stage2 is not None else ArrowheadEigensystem(
            ahead[0, 0], ham.diag, row1)
        lam1 = self._s1.eigenvalues
        w = self._a_ts * self._s1.atom_components
        if np.any(row2 != 0.0):
            w = w + self._s1.to_eigen(np.concatenate([[0.0], row2]))
        span = float(lam1[-1] - lam1[0]) if lam1.size > 1 else 1.0
        cut = 1e-14 * max(float(np.max(np.abs(w))) if w.size else 0.0, span, 1e-300)
        w = np.where(np.abs(w) <= cut, 0.0, w)
        self._s2 = ArrowheadEigensystem(ahead[1, 1], lam1, w)
        self.eigenvalues = self._s2.eigenvalues
        self.dim = ham.dim
        e0 = np.zeros(self.dim)
        e0[0] = 1.0
        e1 = np.zeros(self.dim)
        e1[1] = 1.0
        self.atom_rows = np.vstack([self.to_eigen(e0), self.to_eigen(e1)])

    def to_eigen(self, x):
        """Site amplitudes (atom1, atom2, osc...) -> eigenbasis amplitudes."""
        x = np.asarray(x)
        pair = self._g.T @ x[:2]
        y1 = self._s1.to_eigen(np.concatenate([[pair[0]], x[2:]]))
        return self._s2.to_eigen(np.concatenate([[pair[1]], y1]))

    def from_eigen(self, y):
        z = self._s2.from_eigen(np.asarray(y))
        v1 = self._s1.from_eigen(z[1:])
        pair = self._g @ np.array([v1[0], z[0]])
        return np.concatenate([pair, v1[1:]])

    def materialize(self) -> EigenDecomposition:
        if self.dim > DENSE_DIM_CAP:
            raise ArrowheadSolverError(f"dense eigenvectors capped at dim {DENSE_DIM_CAP}")
        u2 = self._s2.materialize().eigenvectors
        u1 = self._s1.materialize().eigenvectors
        # intermediate order: (residual atom, stage-ii modes)
        v = np.empty_like(u2)
        v[0, :] = u2[0, :]
        v[1:, :] = u1 @ u2[1:, :]
        out = np.empty_like(v)
        out[0, :] = self._g[0, 0] * v[1, :] + self._g[0, 1] * v[0, :]
        out[1, :] = self._g[1, 0] * v[1, :] + self._g[1, 1] * v[0, :]
        out[2:, :] = v[2:, :]
        return EigenDecomposition(self.eigenvalues, out)


# ---------------------------------------------------------------------------
# public module-level API
# ---------------------------------------------------------------------------

def eigendecompose_arrowhead(ham: ArrowheadHamiltonian, *, return_report: bool = False):
    """Full eigendecomposition of an m=1 arrowhead Hamiltonian.

    Handles zero couplings and exactly repeated diagonal entries by
    deflation: each degenerate cluster contributes one aggregated coupling
    to the secular problem and size-1 exact eigenpairs for the remainder.
    """
    if ham.m != 1:
        raise ValueError("eigendecompose_arrowhead needs m = 1")
    if ham.dim > DENSE_DIM_CAP:
        raise ArrowheadSolverError(f"dense eigenvectors capped at dim {DENSE_DIM_CAP}")
    d0 = float(ham.head[0, 0])
    diag = ham.diag
    eta = ham.border[0]
    n = diag.size
    defl = _deflate(diag, eta)
    poles, weights = defl["poles"], defl["weights"]

    if poles.size == 0:
        lam_sec = np.array([d0])
        sigma_idx = np.zeros(1, dtype=np.int64)
        mu = np.zeros(1)
        iters = np.zeros(1, dtype=np.int64)
    else:
        lam_sec, sigma_idx, mu, iters = _solve_secular(d0, poles, weights)

    # secular columns: eta_k / (lambda - pole_value_of_k), shift pole exact
    pole_val = diag.copy()
    if poles.size:
        pole_val[defl["order"]] = poles[defl["pole_of_osc"]]
    d = lam_sec[:, None] - pole_val[None, :]
    if poles.size:
        pole_of = np.full(n, -1, dtype=np.int64)
        pole_of[defl["order"]] = defl["pole_of_osc"]
        patch = pole_of[None, :] == sigma_idx[:, None]
        d = np.where(patch, mu[:, None], d)
    d[:, eta == 0.0] = 1.0
    cols = np.empty((n + 1, lam_sec.size))
    cols[0, :] = 1.0
    cols[1:, :] = (eta[None, :] / d).T
    cols /= np.linalg.norm(cols, axis=0)[None, :]

    lam_parts = [lam_sec]
    col_parts = [cols]
    n_defl = int(defl["zero"].size)
    for k in defl["zero"]:
        c = np.zeros((n + 1, 1))
        c[1 + k, 0] = 1.0
        lam_parts.append(np.array([diag[k]]))
        col_parts.append(c)
    for pole_pos, members in defl["clusters"]:
        vec = eta[members]
        basis = np.column_stack([vec / np.linalg.norm(vec), np.eye(members.size)])
        q, _ = np.linalg.qr(basis)
        comp = q[:, 1:members.size]  # orthonormal complement of the coupling vector
        c = np.zeros((n + 1, members.size - 1))
        c[1 + members, :] = comp
        lam_parts.append(np.full(members.size - 1, poles[pole_pos]))
        col_parts.append(c)
        n_defl += members.size - 1

    lam_all = np.concatenate(lam_parts)
    u = np.concatenate(col_parts, axis=1)
    order = np.argsort(lam_all, kind="stable")
    eig = EigenDecomposition(lam_all[order], u[:, order])
    if return_report:
        if poles.size:
            f, _ = _eval_secular(d0, poles, weights, poles[sigma_idx], sigma_idx, mu)
            res = float(np.max(np.abs(f) / np.maximum(1.0, np.abs(lam_sec))))
        else:
            res = 0.0
        return eig, SecularSolveReport(iterations=iters, max_residual=res,
                                       deflation_count=n_defl)
    return eig


def eigendecompose_bordered(ham: ArrowheadHamiltonian) -> EigenDecomposition:
    """Full eigendecomposition of an m=2 bordered arrowhead Hamiltonian."""
    return BorderedEigensystem(ham).materialize()


def dense_eig_oracle(ham: ArrowheadHamiltonian) -> EigenDecomposition:
    """Reference decomposition by a dense symmetric solver (test oracle).

    Guarded to dim <= 2000: this exists to cross-check the secular solvers
    on small problems, not to run production sizes.
    """
    if ham.dim > 2000:
        raise ValueError("dense_eig_oracle is limited to m+N <= 2000")
    w, v = np.linalg.eigh(ham.to_dense())
    return EigenDecomposition(w, v)
