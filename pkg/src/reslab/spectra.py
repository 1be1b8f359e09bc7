"""Spectrum reports: eigenvalue clustering, multiplicities, nilpotent block sizes.

Two analysis paths share one report format: a float path (dense eigensolver,
SVD rank sweeps) and an exact path for matrices with rational entries
(fraction Gaussian elimination), which pins down repeated eigenvalues that
float clustering cannot separate reliably.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
import scipy.optimize

from .utils import NumericError, eigen_sort_key, fmt_float

__all__ = [
    "EigenvalueGroup",
    "SpectrumReport",
    "spectrum_with_multiplicity",
    "rational_spectrum",
    "multiset_distance",
    "frac_rank",
    "frac_charpoly",
]

_CLUSTER_TOL = 1e-8
_RANK_CUTOFF = 1e-10  # times the spectral norm of the analyzed matrix
_JORDAN_SIZE_LIMIT = 256  # rank sweeps are O(n^3) per cluster; skip above this


@dataclass
class EigenvalueGroup:
    value: complex
    alg: int
    geo: int
    jordan: list[int] = field(default_factory=list)
    trusted: bool = True
    converged: bool | None = None
    exact: bool = False

    def to_json_dict(self) -> dict:
        d = {
            "re": float(self.value.real),
            "im": float(self.value.imag),
            "alg": self.alg,
            "geo": self.geo,
            "jordan": list(self.jordan),
            "trusted": self.trusted,
        }
        if self.converged is not None:
            d["converged"] = self.converged
        return d


@dataclass
class SpectrumReport:
    eigenvalues: list[EigenvalueGroup]
    essential_bound: float
    grouping_tol: float = _CLUSTER_TOL
    mode: str | None = None
    k: int | None = None
    r: int | None = None

    def sort(self) -> None:
        self.eigenvalues.sort(key=lambda g: eigen_sort_key(g.value))

    @property
    def total_alg(self) -> int:
        return sum(g.alg for g in self.eigenvalues)

    def leading(self) -> EigenvalueGroup:
        return min(self.eigenvalues, key=lambda g: eigen_sort_key(g.value))

    def values(self) -> np.ndarray:
        out = []
        for g in self.eigenvalues:
            out.extend([g.value] * g.alg)
        return np.asarray(out, dtype=complex)

    def to_json_dict(self) -> dict:
        self.sort()
        d = {
            "eigenvalues": [g.to_json_dict() for g in self.eigenvalues],
            "essential_bound": self.essential_bound,
        }
        if self.mode is not None:
            d["mode"] = self.mode
        if self.k is not None:
            d["k"] = self.k
        if self.r is not None:
            d["r"] = self.r
        return d


# ---------------------------------------------------------------------------
# float path


def _cluster(eigs: np.ndarray, tol: float) -> list[tuple[complex, list[int]]]:
    order = sorted(range(len(eigs)), key=lambda i: eigen_sort_key(eigs[i]))
    clusters: list[list[int]] = []
    centers: list[complex] = []
    for i in order:
        z = complex(eigs[i])
        placed = False
        for c_idx, center in enumerate(centers):
            if abs(z - center) <= tol * max(1.0, abs(center)):
                clusters[c_idx].append(i)
                members = np.asarray([eigs[j] for j in clusters[c_idx]])
                centers[c_idx] = complex(np.mean(members))
                placed = True
                break
        if not placed:
            clusters.append([i])
            centers.append(z)
    return list(zip(centers, clusters))


def _svd_rank(P: np.ndarray, cutoff: float) -> int:
    s = np.linalg.svd(P, compute_uv=False)
    return int(np.sum(s > cutoff))


def _jordan_from_kernel_dims(dims: list[int]) -> list[int]:
    # dims[m-1] = dim ker (M - xI)^m, nondecreasing; blocks of size >= m
    # number dims[m-1] - dims[m-2]
    sizes = []
    prev = 0
    ge_counts = []
    for d in dims:
        ge_counts.append(d - prev)
        prev = d
    for m in range(len(ge_counts), 0, -1):
        exactly = ge_counts[m - 1] - (ge_counts[m] if m < len(ge_counts) else 0)
        sizes.extend([m] * max(exactly, 0))
    return sorted(sizes, reverse=True)


def spectrum_with_multiplicity(
    M: np.ndarray,
    essential_bound: float = 0.0,
    cluster_tol: float = _CLUSTER_TOL,
    jordan: bool = True,
) -> SpectrumReport:
    """Cluster the spectrum of a dense matrix and measure block structure.

    Kernel dimensions of (M - xI)^m come from SVD ranks with cutoff
    1e-10 * ||M||_2.  Eigenvalue groups with |x| <= essential_bound are
    marked untrusted (they sit where discretization noise lives).
    """
    M = np.asarray(M, dtype=complex)
    n = M.shape[0]
    if M.shape != (n, n):
        raise ValueError("matrix must be square")
    eigs = np.linalg.eigvals(M)
    norm = float(np.linalg.norm(M, 2)) if n else 0.0
    cutoff = _RANK_CUTOFF * max(norm, 1e-300)
    groups = []
    do_jordan = jordan and n <= _JORDAN_SIZE_LIMIT
    for center, idxs in _cluster(eigs, cluster_tol):
        alg = len(idxs)
        if alg == 1 or not do_jordan:
            groups.append(EigenvalueGroup(center, alg, alg, [1] * alg,
                                          trusted=abs(center) > essential_bound))
            continue
        P = M - center * np.eye(n)
        dims = []
        Pm = np.eye(n)
        for _ in range(alg + 1):
            Pm = Pm @ P
            d = min(n - _svd_rank(Pm, cutoff), alg)
            dims.append(d)
            if d >= alg or (len(dims) > 1 and dims[-1] == dims[-2]):
                break
        geo = dims[0]
        sizes = _jordan_from_kernel_dims(dims)
        if sum(sizes) != alg:  # rank sweep disagreed with clustering; be honest
            sizes = sorted(sizes + [1] * (alg - sum(sizes)), reverse=True) \
                if sum(sizes) < alg else [1] * alg
        groups.append(EigenvalueGroup(center, alg, geo, sizes,
                                      trusted=abs(center) > essential_bound))
    rep = SpectrumReport(groups, essential_bound, cluster_tol)
    rep.sort()
    return rep


# ---------------------------------------------------------------------------
# exact path


def _frac_matrix(M) -> list[list[Fraction]]:
    return [[Fraction(v) for v in row] for row in M]


def frac_rank(M: list[list[Fraction]]) -> int:
    """Exact rank via fraction Gaussian elimination."""
    A = [row[:] for row in M]
    rows = len(A)
    cols = len(A[0]) if rows else 0
    rank = 0
    r = 0
    for c in range(cols):
        pivot = None
        for i in range(r, rows):
            if A[i][c] != 0:
                pivot = i
                break
        if pivot is None:
            continue
        A[r], A[pivot] = A[pivot], A[r]
        pv = A[r][c]
        for i in range(r + 1, rows):
            if A[i][c] != 0:
                f = A[i][c] / pv
                A[i] = [a - f * b for a, b in zip(A[i], A[r])]
        r += 1
        rank += 1
        if r == rows:
            break
    return rank


def _frac_matmul(A, B):
    n, m, p = len(A), len(B), len(B[0])
    out = [[Fraction(0)] * p for _ in range(n)]
    for i in range(n):
        Ai = A[i]
        for kk in range(m):
            a = Ai[kk]
            if a == 0:
                continue
            Bk = B[kk]
            row = out[i]
            for j in range(p):
                if Bk[j] != 0:
                    row[j] += a * Bk[j]
    return out


def frac_charpoly(M: list[list[Fraction]]) -> list[Fraction]:
    """Characteristic polynomial coefficients, highest degree first (monic).

    Faddeev-LeVerrier recursion, exact over Fractions.
    """
    n = len(M)
    coeffs = [Fraction(1)]
    Mk = [[Fraction(0)] * n for _ in range(n)]
    for i in range(n):
        Mk[i][i] = Fraction(1)
    AM = None
    for k in range(1, n + 1):
        AM = _frac_matmul(M, Mk)
        tr = sum(AM[i][i] for i in range(n))
        c = -tr / k
        coeffs.append(c)
        Mk = [row[:] for row in AM]
        for i in range(n):
            Mk[i][i] += c
    return coeffs


def _frac_eigen_group(Mf, lam: Fraction, n: int, essential_bound: float) -> EigenvalueGroup | None:
    P = [[Mf[i][j] - (lam if i == j else 0) for j in range(n)] for i in range(n)]
    dims = []
    Pm = P
    for _ in range(n):
        d = n - frac_rank(Pm)
        if dims and d == dims[-1]:
            break
        dims.append(d)
        if d == 0:
            break
        Pm = _frac_matmul(Pm, P)
    if not dims or dims[0] == 0:
        return None
    alg = dims[-1]
    geo = dims[0]
    sizes = _jordan_from_kernel_dims(dims)
    return EigenvalueGroup(complex(float(lam), 0.0), alg, geo, sizes,
                           trusted=abs(float(lam)) > essential_bound, exact=True)


def rational_spectrum(M, essential_bound: float = 0.0,
                      cluster_tol: float = _CLUSTER_TOL) -> SpectrumReport:
    """Spectrum report for a matrix with exactly rational entries.

    Real eigenvalue candidates are rationalized from the float spectrum with
    denominators tried smallest first; candidates are accepted only if the
    exact rank of (M - xI) actually drops, in which case multiplicities and
    block sizes come from exact rank sweeps.  Remaining eigenvalues
    (irrational or complex) fall back to the float analysis.
    """
    Mf = _frac_matrix(M)
    n = len(Mf)
    Mfloat = np.asarray([[float(v) for v in row] for row in Mf], dtype=float)
    eigs = np.linalg.eigvals(Mfloat)
    groups: list[EigenvalueGroup] = []
    claimed = np.zeros(len(eigs), dtype=bool)
    seen: set[Fraction] = set()
    for center, idxs in _cluster(eigs, cluster_tol):
        if abs(center.imag) > 1e-7:
            continue
        lam = None
        for cap in (16, 64, 4096, 10**6):
            q = Fraction(center.real).limit_denominator(cap)
            if abs(float(q) - center.real) <= 1e-6 * max(1.0, abs(center.real)):
                lam = q
                break
        if lam is None or lam in seen:
            continue
        g = _frac_eigen_group(Mf, lam, n, essential_bound)
        if g is None:
            continue
        seen.add(lam)
        groups.append(g)
        # claim the alg nearest float eigenvalues
        dist = np.abs(eigs - float(lam))
        dist[claimed] = np.inf
        for i in np.argsort(dist)[: g.alg]:
            claimed[i] = True
    leftovers = eigs[~claimed]
    if len(leftovers):
        for center, idxs in _cluster(leftovers, cluster_tol):
            alg = len(idxs)
            groups.append(EigenvalueGroup(center, alg, alg, [1] * alg,
                                          trusted=abs(center) > essential_bound))
    rep = SpectrumReport(groups, essential_bound, cluster_tol)
    if rep.total_alg != n:
        raise NumericError(
            f"exact/float eigenvalue accounting mismatch: {rep.total_alg} != {n}"
        )
    rep.sort()
    return rep


# ---------------------------------------------------------------------------


def multiset_distance(a, b) -> float:
    """Max matched distance between two equal-size eigenvalue multisets."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.shape != b.shape:
        raise ValueError(f"multiset sizes differ: {a.shape} vs {b.shape}")
    if len(a) == 0:
        return 0.0
    cost = np.abs(a[:, None] - b[None, :])
    ri, ci = scipy.optimize.linear_sum_assignment(cost)
    return float(cost[ri, ci].max())
