"""Finite-dimensional transfer operator discretizations.

Two schemes: an Ulam matrix on uniform cells (exact preimage measures, so
columns of the k = 1 matrix sum to one), and Chebyshev collocation, either
per partition cell (Markov maps, masked by the adjacency) or on one global
panel (full-branch smooth and monotone maps).  The collocation scheme also
assembles the integral-perturbation operators built from the distortion
D_f = (1/f')' of a smooth map.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .affine import WeightMode
from .expressions import evaluate
from .gridfn import cheb_integral_row, cheb_interp_matrix, cheb_nodes
from .maps import MarkovAffineMap, SmoothFullBranchMap
from .spectra import SpectrumReport, spectrum_with_multiplicity

__all__ = [
    "DiscretizedOperator",
    "ulam_matrix",
    "ulam_operator",
    "cheb_operator",
    "discretize_spectrum",
]

_SIZE_CAP = 4096
_GL4 = np.polynomial.legendre.leggauss(4)


# ---------------------------------------------------------------------------
# Ulam


def _branch_fprime(m, j, y):
    if isinstance(m, MarkovAffineMap):
        return np.full_like(np.asarray(y, dtype=float), m.slopes[j])
    return evaluate(m.fprime[j], np.asarray(y, dtype=float))


def ulam_matrix(m, n_cells: int, k: int = 1, mode: WeightMode | str = WeightMode.SRB) -> np.ndarray:
    """Ulam discretization of the weight-k transfer operator on uniform cells.

    M[i, j] = (1/|U_j|) integral over f^-1(U_i) intersect U_j of the branch
    weight; for k = 1 the weight is 1/|f'| times |f'| dy = dy, so entries are
    preimage lengths and every column sums to one.
    """
    if n_cells < 2 or n_cells > _SIZE_CAP:
        raise ValueError(f"n_cells must be in [2, {_SIZE_CAP}]")
    _check_k(k)
    mode = WeightMode.coerce(mode)
    edges = np.linspace(0.0, 1.0, n_cells + 1)
    M = np.zeros((n_cells, n_cells))
    glx, glw = _GL4
    for j in range(m.n_branches):
        lo_img, hi_img = m.branch_image(j)
        # preimages of cell edges clipped to this branch's image
        ed = np.clip(edges, lo_img, hi_img)
        pre = m.branch_inverse(j, ed)
        a = np.minimum(pre[:-1], pre[1:])
        b = np.maximum(pre[:-1], pre[1:])
        for i in range(n_cells):
            if b[i] - a[i] <= 0.0:
                continue
            # intersect [a, b] with the uniform cells it spans
            c0 = int(np.clip(np.floor(a[i] * n_cells), 0, n_cells - 1))
            c1 = int(np.clip(np.ceil(b[i] * n_cells) - 1, 0, n_cells - 1))
            for c in range(c0, c1 + 1):
                lo = max(a[i], edges[c])
                hi = min(b[i], edges[c + 1])
                if hi <= lo:
                    continue
                if k == 1 and mode is WeightMode.SRB:
                    M[i, c] += (hi - lo) * n_cells
                else:
                    mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
                    y = mid + half * glx
                    fp = _branch_fprime(m, j, y)
                    if mode is WeightMode.SRB:
                        w = np.abs(fp) * fp ** (-(k - 1)) / np.abs(fp)
                    else:
                        w = np.abs(fp) * fp ** (-float(k))
                    M[i, c] += float(np.dot(glw, w)) * half * n_cells
    return M


# ---------------------------------------------------------------------------
# assembled-operator container


@dataclass
class DiscretizedOperator:
    """Assembled operator matrix with its basis layout.

    basis is "ulam" or "cheb".  For the collocation basis, cells lists the
    panel intervals and points concatenates the degree+1 Chebyshev nodes of
    each panel, matching the matrix row/column order; for Ulam, cells are the
    uniform intervals and points their midpoints.
    """

    matrix: np.ndarray
    points: np.ndarray
    cells: list[tuple[float, float]]
    degree: int | None
    op: str
    basis: str = "cheb"

    @property
    def n(self) -> int:
        return len(self.points)

    def cell_mean_projector(self) -> np.ndarray:
        """Matrix of g -> (cellwise mean of g) as a function in the same basis."""
        if self.basis == "ulam":
            return np.eye(self.n)
        d = self.degree
        P = np.zeros((self.n, self.n))
        for c, (a, b) in enumerate(self.cells):
            row = cheb_integral_row(a, b, d) / (b - a)
            s = c * (d + 1)
            P[s:s + d + 1, s:s + d + 1] = np.ones((d + 1, 1)) @ row[None, :]
        return P

    def integral_row(self) -> np.ndarray:
        """Row vector r with r @ values = integral over [0, 1]."""
        if self.basis == "ulam":
            widths = np.array([b - a for a, b in self.cells])
            return widths
        return _integral_row(self)


def ulam_operator(m, n_cells: int, k: int = 1,
                  mode: WeightMode | str = WeightMode.SRB) -> DiscretizedOperator:
    M = ulam_matrix(m, n_cells, k, mode)
    edges = np.linspace(0.0, 1.0, n_cells + 1)
    cells = [(float(edges[i]), float(edges[i + 1])) for i in range(n_cells)]
    mids = 0.5 * (edges[:-1] + edges[1:])
    return DiscretizedOperator(M, mids, cells, None, f"L{int(k)}", "ulam")


# ---------------------------------------------------------------------------
# Chebyshev collocation


def _check_k(k) -> int:
    k = int(k)
    if not 0 <= k <= 3:
        raise ValueError("weight level k must be in {0, 1, 2, 3}")
    return k


def _weight_values(m, j, y, k: int, mode: WeightMode) -> np.ndarray:
    if isinstance(m, MarkovAffineMap):
        return np.full(len(y), _scalar_weight(m.slopes[j], k, mode))
    fp = np.asarray(m.branch_deriv(j, y), dtype=float)
    if mode is WeightMode.SRB:
        return fp ** (-(k - 1)) / np.abs(fp)
    return fp ** (-float(k))


def _scalar_weight(lam: float, k: int, mode: WeightMode) -> float:
    if mode is WeightMode.SRB:
        return lam ** (-(k - 1)) / abs(lam)
    return lam ** (-float(k))


def _is_global_layout(m) -> bool:
    return not isinstance(m, MarkovAffineMap)


def cheb_operator(m, op, degree: int, mode: WeightMode | str = WeightMode.SRB) -> DiscretizedOperator:
    """Chebyshev collocation matrix for a transfer-type operator.

    op is an integer weight level k in {0..3}, or one of "K", "star", "plus"
    for the integral-perturbation family of a smooth full-branch map:
        plus g = L_2 g + L_1(D_f * psi(g)),    psi(g)(x) = int_0^x g
        star g = L_2 g + L_1(D_f * phi(g)),    phi(g) = psi(g) - int (1-y) g(y) dy
        K    g = L_1(D_f * phi(g))
    Markov maps use one panel per cell with adjacency-masked blocks; smooth
    and monotone full-branch maps use a single global panel.
    """
    mode = WeightMode.coerce(mode)
    if isinstance(op, str) and op not in ("K", "star", "plus"):
        raise ValueError(f"unknown operator {op!r}")

    if isinstance(op, str):
        if isinstance(m, MarkovAffineMap):
            df_vals = None  # affine pieces have zero distortion
        elif isinstance(m, SmoothFullBranchMap):
            df_vals = "smooth"
        else:
            raise TypeError("integral-perturbation operators need a smooth "
                            "full-branch or affine map")
        L1 = cheb_operator(m, 1, degree, mode)
        L2 = cheb_operator(m, 2, degree, mode)
        pts = L1.points
        if df_vals is None:
            dfv = np.zeros(len(pts))
        else:
            dfv = _eval_piecewise_df(m, pts)
        # antiderivative from 0, then the mean normalization for phi
        psi_mat = _antideriv_matrix(L1)
        int_row = _integral_row(L1)
        one_minus = int_row * (1.0 - pts)
        phi_mat = psi_mat - np.ones((len(pts), 1)) @ one_minus[None, :]
        if op == "plus":
            matrix = L2.matrix + L1.matrix @ (dfv[:, None] * psi_mat)
        elif op == "star":
            matrix = L2.matrix + L1.matrix @ (dfv[:, None] * phi_mat)
        else:
            matrix = L1.matrix @ (dfv[:, None] * phi_mat)
        return DiscretizedOperator(matrix, pts, L1.cells, degree, str(op))

    k = _check_k(op)
    if _is_global_layout(m):
        if degree < 4 or degree + 1 > _SIZE_CAP:
            raise ValueError(f"degree must be in [4, {_SIZE_CAP - 1}]")
        cells = [(0.0, 1.0)]
        pts = cheb_nodes(0.0, 1.0, degree)
        M = np.zeros((degree + 1, degree + 1))
        for j in range(m.n_branches):
            y = m.branch_inverse(j, pts)
            w = _weight_values(m, j, y, k, mode)
            M += w[:, None] * cheb_interp_matrix(0.0, 1.0, degree, y)
        return DiscretizedOperator(M, pts, cells, degree, f"L{k}")

    p = m.partition
    n = m.n_branches
    size = n * (degree + 1)
    if degree < 4 or size > _SIZE_CAP:
        raise ValueError(f"degree out of range for {n} cells (size cap {_SIZE_CAP})")
    M = np.zeros((size, size))
    cells = [(float(p[i]), float(p[i + 1])) for i in range(n)]
    pts = np.concatenate([cheb_nodes(a, b, degree) for a, b in cells])
    for i in range(n):
        x = pts[i * (degree + 1):(i + 1) * (degree + 1)]
        for j in range(n):
            if m.adjacency[j, i] == 0:
                continue
            y = m.branch_inverse(j, x)
            w = _weight_values(m, j, y, k, mode)
            block = w[:, None] * cheb_interp_matrix(p[j], p[j + 1], degree, y)
            M[i * (degree + 1):(i + 1) * (degree + 1),
              j * (degree + 1):(j + 1) * (degree + 1)] = block
    return DiscretizedOperator(M, pts, cells, degree, f"L{k}")


def _eval_piecewise_df(m: SmoothFullBranchMap, pts: np.ndarray) -> np.ndarray:
    out = np.empty(len(pts))
    cell = np.asarray(m.branch_of(pts))
    for j in range(m.n_branches):
        sel = cell == j
        if np.any(sel):
            out[sel] = evaluate(m.df[j], pts[sel])
    return out


def _antideriv_matrix(opr: DiscretizedOperator) -> np.ndarray:
    """Values of int_0^x g at the collocation points, from values of g."""
    from .gridfn import cheb_antideriv_matrix
    d = opr.degree
    size = opr.n
    A = np.zeros((size, size))
    offset_row = np.zeros(size)
    for c, (a, b) in enumerate(opr.cells):
        s = c * (d + 1)
        x = opr.points[s:s + d + 1]
        A[s:s + d + 1, s:s + d + 1] = cheb_antideriv_matrix(a, b, d, x)
        A[s:s + d + 1, :] += offset_row[None, :]
        offset_row = offset_row.copy()
        offset_row[s:s + d + 1] += cheb_integral_row(a, b, d)
    return A


def _integral_row(opr: DiscretizedOperator) -> np.ndarray:
    d = opr.degree
    row = np.zeros(opr.n)
    for c, (a, b) in enumerate(opr.cells):
        row[c * (d + 1):(c + 1) * (d + 1)] = cheb_integral_row(a, b, d)
    return row


# ---------------------------------------------------------------------------
# spectra with refinement checks


def _assemble(m, op, size, mode, method) -> np.ndarray:
    if method == "ulam":
        k = 1 if isinstance(op, str) else int(op)
        return ulam_matrix(m, size, k, mode)
    return cheb_operator(m, op, size, mode).matrix


def discretize_spectrum(m, op, size: int, mode: WeightMode | str = WeightMode.SRB,
                        method: str = "cheb", essential_bound: float = 0.0,
                        converge_tol: float = 1e-4, keep: int | None = None) -> SpectrumReport:
    """Spectrum of a discretized transfer operator with a refinement check.

    Runs the scheme at resolution `size` and 2*size (Ulam cell count, or
    Chebyshev degree); an eigenvalue group is flagged converged when its
    nearest neighbour in the refined spectrum moved by at most converge_tol.
    Groups inside the essential bound are marked untrusted.
    """
    if method not in ("cheb", "ulam"):
        raise ValueError(f"unknown method {method!r}")
    mode = WeightMode.coerce(mode)
    coarse = _assemble(m, op, size, mode, method)
    fine = np.linalg.eigvals(_assemble(m, op, 2 * size, mode, method))
    rep = spectrum_with_multiplicity(coarse, essential_bound=essential_bound)
    for g in rep.eigenvalues:
        drift = float(np.min(np.abs(fine - g.value)))
        g.converged = drift <= converge_tol
    rep.mode = mode.value
    if isinstance(op, int):
        rep.k = int(op)
    if keep is not None:
        rep.sort()
        rep.eigenvalues = rep.eigenvalues[:keep]
    return rep
