"""Weighted transfer matrices of affine Markov maps on piecewise polynomials.

For a map with branches f(x) = lam_j x + off_j on I_j and adjacency
A[i, j] = 1 iff I_j is contained in f(I_i), the weighted transfer matrix at
level k acts on piecewise constants by

    B_k[i, j] = w_k(j) * A[j, i],

with w_k(j) = lam_j^-k (conformal convention) or lam_j^-(k-1) |lam_j|^-1
(density convention).  On piecewise polynomials of degree <= r the operator
acts blockwise: writing h = sum_l x^l 1_{I_j} a_j^l with coefficient layout
index(l, j) = l * N + j, the matrix entry from input degree l to output
degree m <= l is

    T[(m, i), (l, j)] = B_k[i, j] * C(l, m) * lam_j^-m * c_j^(l - m),

where c_j = p_j - q_j / lam_j is the constant part of the inverse branch
g_j(x) = x / lam_j + c_j.  Output degree never exceeds input degree, and the
degree-l diagonal block is B_{k+l}.
"""

from __future__ import annotations

import enum
import math
from fractions import Fraction

import numpy as np

from .maps import MarkovAffineMap
from .spectra import (
    EigenvalueGroup,
    SpectrumReport,
    multiset_distance,
    rational_spectrum,
    spectrum_with_multiplicity,
)
from .utils import NumericError

__all__ = [
    "WeightMode",
    "build_Bk",
    "build_Tkr",
    "pw_poly_eval",
    "transfer_pointwise",
    "resonance_set",
    "essential_radius",
    "topological_entropy",
    "differentiation_matrix",
]

_ACTION_TOL = 1e-12


class WeightMode(enum.Enum):
    MME = "mme"
    SRB = "srb"

    @classmethod
    def coerce(cls, v: "WeightMode | str") -> "WeightMode":
        if isinstance(v, WeightMode):
            return v
        return cls(str(v).lower())

    @property
    def base_k(self) -> int:
        return 0 if self is WeightMode.MME else 1


def _weights(m: MarkovAffineMap, k: int, mode: WeightMode, exact: bool):
    """Per-branch weight of the level-k transfer matrix."""
    if k < 0:
        raise ValueError(f"weight level k must be >= 0, got {k}")
    if exact:
        lam = m.slopes_frac
        if mode is WeightMode.SRB:
            return [lam[j] ** -(k - 1) / abs(lam[j]) for j in range(m.n_branches)]
        return [lam[j] ** -k for j in range(m.n_branches)]
    lam = m.slopes
    if mode is WeightMode.SRB:
        return lam ** (-(k - 1.0)) / np.abs(lam)
    return lam ** (-float(k))


def build_Bk(m: MarkovAffineMap, k: int, mode: WeightMode | str = WeightMode.MME,
             exact: bool = False):
    """Level-k transfer matrix on piecewise constants; B_0 (conformal) = A^T."""
    mode = WeightMode.coerce(mode)
    w = _weights(m, k, mode, exact)
    n = m.n_branches
    A = m.adjacency
    if exact:
        return [[w[j] * int(A[j, i]) for j in range(n)] for i in range(n)]
    return (A.T * np.asarray(w)[None, :]).astype(float)


def build_Tkr(m: MarkovAffineMap, k: int, r: int, mode: WeightMode | str = WeightMode.MME,
              exact: bool = False, check: bool = True):
    """Transfer matrix at level k on piecewise polynomials of degree <= r."""
    mode = WeightMode.coerce(mode)
    if r < 0:
        raise ValueError(f"degree bound r must be >= 0, got {r}")
    n = m.n_branches
    dim = n * (r + 1)
    if exact:
        lam = m.slopes_frac
        q = [m.slopes_frac[j] * m.partition_frac[j] + m.offsets_frac[j] for j in range(n)]
        c = [m.partition_frac[j] - q[j] / lam[j] for j in range(n)]
        w = _weights(m, k, mode, exact=True)
        T = [[Fraction(0)] * dim for _ in range(dim)]
        for l in range(r + 1):
            for mdeg in range(l + 1):
                binom = math.comb(l, mdeg)
                for j in range(n):
                    coef = w[j] * binom * lam[j] ** -mdeg * c[j] ** (l - mdeg)
                    if coef == 0:
                        continue
                    for i in range(n):
                        if m.adjacency[j][i]:
                            T[mdeg * n + i][l * n + j] += coef
        return T
    lam = m.slopes
    c = m.partition[:-1] - m.q / lam
    w = np.asarray(_weights(m, k, mode, exact=False))
    A = m.adjacency
    T = np.zeros((dim, dim))
    for l in range(r + 1):
        for mdeg in range(l + 1):
            binom = float(math.comb(l, mdeg))
            coef = w * binom * lam ** (-float(mdeg)) * c ** (l - mdeg)
            T[mdeg * n:(mdeg + 1) * n, l * n:(l + 1) * n] = A.T * coef[None, :]
    if check:
        _self_check_action(m, k, r, mode, T)
    return T


def pw_poly_eval(m: MarkovAffineMap, coeffs, x):
    """Evaluate the piecewise polynomial with layout index(l, j) = l*N + j."""
    coeffs = np.asarray(coeffs, dtype=float)
    n = m.n_branches
    r = len(coeffs) // n - 1
    x = np.atleast_1d(np.asarray(x, dtype=float))
    j = m.branch_of(x)
    out = np.zeros_like(x)
    xp = np.ones_like(x)
    for l in range(r + 1):
        out += coeffs[l * n + j] * xp
        xp = xp * x
    return out


def transfer_pointwise(m: MarkovAffineMap, k: int, mode: WeightMode | str, h, x):
    """(L_k h)(x) as a literal sum over inverse branches (reference evaluator)."""
    mode = WeightMode.coerce(mode)
    w = _weights(m, k, mode, exact=False)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.zeros_like(x)
    for j in range(m.n_branches):
        lo, hi = m.branch_image(j)
        sel = (x >= lo - 1e-12) & (x <= hi + 1e-12)
        if not np.any(sel):
            continue
        y = m.branch_inverse(j, np.clip(x[sel], lo, hi))
        out[sel] += w[j] * np.asarray(h(y), dtype=float)
    return out


def _self_check_action(m, k, r, mode, T):
    rng = np.random.default_rng(0)
    n = m.n_branches
    coeffs = rng.standard_normal(n * (r + 1))
    # sample away from knots so branch assignment of preimages is unambiguous
    x = np.unique(rng.random(50) * 0.98 + 0.01)
    direct = pw_poly_eval(m, T @ coeffs, x)
    via_sum = transfer_pointwise(m, k, mode, lambda y: pw_poly_eval(m, coeffs, y), x)
    err = float(np.max(np.abs(direct - via_sum)))
    if err > _ACTION_TOL:
        raise NumericError(f"block transfer action check failed: max err {err:.3e}")


def differentiation_matrix(m: MarkovAffineMap, r: int) -> np.ndarray:
    """d/dx on piecewise polynomials: degree <= r coefficients to degree <= r-1."""
    n = m.n_branches
    D = np.zeros((n * r, n * (r + 1)))
    for l in range(1, r + 1):
        for j in range(n):
            D[(l - 1) * n + j, l * n + j] = float(l)
    return D


def essential_radius(m: MarkovAffineMap, k: int, r: int) -> float:
    lam_min = float(np.min(np.abs(m.slopes)))
    return lam_min ** (-(k + r - 1.0))


def _merge_reports(reports: list[SpectrumReport], essential_bound: float,
                   tol: float) -> list[EigenvalueGroup]:
    merged: list[EigenvalueGroup] = []
    for rep in reports:
        for g in rep.eigenvalues:
            target = None
            for h in merged:
                same_exact = g.exact and h.exact and g.value == h.value
                close = abs(g.value - h.value) <= tol * max(1.0, abs(h.value))
                if same_exact or (not (g.exact and h.exact) and close):
                    target = h
                    break
            if target is None:
                merged.append(EigenvalueGroup(g.value, g.alg, g.geo, list(g.jordan),
                                              trusted=abs(g.value) > essential_bound,
                                              exact=g.exact))
            else:
                target.alg += g.alg
                target.geo += g.geo
                target.jordan = sorted(target.jordan + list(g.jordan), reverse=True)
    return merged


def resonance_set(m: MarkovAffineMap, mode: WeightMode | str, r: int,
                  exact: bool | None = None) -> SpectrumReport:
    """Merged spectrum of B_k..B_{k+r} (k set by the weight convention).

    Cross-checked against the spectrum of the degree-r block operator; groups
    at or below the essential radius lam^-(k+r-1) are marked untrusted
    ("truncated at" in the CLI).  With exact=None the rational path is used
    automatically (affine branch data is stored exactly).
    """
    mode = WeightMode.coerce(mode)
    k = mode.base_k
    bound = essential_radius(m, k, r)
    use_exact = True if exact is None else exact
    reports = []
    for l in range(r + 1):
        B = build_Bk(m, k + l, mode, exact=use_exact)
        if use_exact:
            reports.append(rational_spectrum(B, essential_bound=bound))
        else:
            reports.append(spectrum_with_multiplicity(np.asarray(B, float), bound))
    groups = _merge_reports(reports, bound, tol=1e-8)
    rep = SpectrumReport(groups, bound, mode=mode.value, k=k, r=r)
    rep.sort()

    # cross-check: the block operator must carry exactly the same multiset
    T = build_Tkr(m, k, r, mode, exact=False, check=False)
    t_eigs = np.linalg.eigvals(T)
    d = multiset_distance(rep.values(), t_eigs)
    if d > 1e-7:
        raise NumericError(
            f"resonance multiset mismatch between diagonal blocks and block operator: {d:.3e}"
        )
    return rep


def topological_entropy(m: MarkovAffineMap) -> dict:
    """ln of the spectral radius of the adjacency transfer matrix B_0 = A^T.

    Power iteration cross-checked against the dense eigensolver to 1e-10.
    """
    B0 = np.asarray(m.adjacency.T, dtype=float)
    n = B0.shape[0]
    # shift keeps the iteration convergent when A has peripheral spectrum
    P = B0 + np.eye(n)
    v = np.full(n, 1.0 / n)
    rho_shift = 0.0
    for _ in range(20000):
        w = P @ v
        nrm = float(np.linalg.norm(w))
        if nrm == 0.0:
            raise NumericError("adjacency matrix is nilpotent; entropy undefined")
        w /= nrm
        if np.linalg.norm(w - v) < 1e-14:
            v = w
            break
        v = w
    rho_power = float(v @ (B0 @ v)) / float(v @ v)
    rho_eig = float(np.max(np.abs(np.linalg.eigvals(B0))))
    if abs(rho_power - rho_eig) > 1e-10:
        raise NumericError(
            f"entropy cross-check failed: power {rho_power!r} vs eig {rho_eig!r}"
        )
    return {"rho": rho_eig, "h_top": float(np.log(rho_eig))}
