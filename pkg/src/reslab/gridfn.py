"""Composite Gauss-Legendre grids, grid functions, and Chebyshev helpers.

A PanelGrid carries Gauss-Legendre nodes on panels that refine the map
partition, so grid functions are smooth within each panel even when the
underlying map has knots.  Grid functions evaluate anywhere via barycentric
interpolation on the panel nodes; antiderivatives are exact per panel
(Legendre coefficient integration), which is what the integral-operator
constructions require.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

__all__ = [
    "PanelGrid",
    "GridFunction",
    "CumulativeFn",
    "cumulative",
    "cheb_nodes",
    "cheb_interp_matrix",
    "cheb_coef_matrix",
    "cheb_antideriv_matrix",
    "cheb_integral_row",
]


@lru_cache(maxsize=32)
def _gl_reference(order: int):
    x, w = np.polynomial.legendre.leggauss(order)
    # barycentric weights for the reference nodes (scale-invariant)
    bw = np.empty(order)
    for i in range(order):
        diff = x[i] - np.delete(x, i)
        bw[i] = 1.0 / np.prod(diff)
    bw /= np.max(np.abs(bw))
    # Legendre Vandermonde and projection factors for coefficient transforms
    V = np.polynomial.legendre.legvander(x, order - 1)
    proj = (2.0 * np.arange(order) + 1.0) / 2.0
    coef_from_values = (V * w[:, None]).T * proj[:, None]
    return x, w, bw, coef_from_values


@dataclass(frozen=True, eq=False)
class PanelGrid:
    breaks: np.ndarray
    order: int

    def __post_init__(self):
        x, w, _, _ = _gl_reference(self.order)
        lo = self.breaks[:-1]
        hi = self.breaks[1:]
        half = 0.5 * (hi - lo)
        mid = 0.5 * (hi + lo)
        nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
        weights = (half[:, None] * w[None, :]).ravel()
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)

    @classmethod
    def for_map(cls, m, panels_per_branch: int = 8, order: int = 32) -> "PanelGrid":
        pieces = []
        p = np.asarray(m.partition, dtype=float)
        for j in range(len(p) - 1):
            pieces.append(np.linspace(p[j], p[j + 1], panels_per_branch + 1)[:-1])
        breaks = np.concatenate(pieces + [p[-1:]])
        return cls(breaks, order)

    @classmethod
    def uniform(cls, a: float, b: float, panels: int, order: int = 32) -> "PanelGrid":
        return cls(np.linspace(a, b, panels + 1), order)

    @property
    def n_panels(self) -> int:
        return len(self.breaks) - 1

    @property
    def n_nodes(self) -> int:
        return self.n_panels * self.order

    def panel_of(self, x) -> np.ndarray:
        idx = np.searchsorted(self.breaks, np.asarray(x, dtype=float), side="right") - 1
        return np.clip(idx, 0, self.n_panels - 1)

    def integral(self, values) -> float:
        return float(np.dot(self.weights, np.asarray(values)))


class GridFunction:
    """Panel-wise polynomial determined by values at the grid nodes."""

    def __init__(self, grid: PanelGrid, values):
        self.grid = grid
        self.values = np.asarray(values, dtype=float)
        if self.values.shape != (grid.n_nodes,):
            raise ValueError("values must match the grid node count")

    @classmethod
    def from_callable(cls, grid: PanelGrid, fn) -> "GridFunction":
        return cls(grid, np.asarray(fn(grid.nodes), dtype=float))

    def integral(self) -> float:
        return self.grid.integral(self.values)

    def __call__(self, x):
        g = self.grid
        x_arr = np.atleast_1d(np.asarray(x, dtype=float)).ravel()
        t_ref, _, bw, _ = _gl_reference(g.order)
        idx = g.panel_of(x_arr)
        lo = g.breaks[idx]
        hi = g.breaks[idx + 1]
        t = (2.0 * x_arr - (lo + hi)) / (hi - lo)
        vals = self.values.reshape(g.n_panels, g.order)[idx]
        diff = t[:, None] - t_ref[None, :]
        exact = np.abs(diff) < 1e-14
        safe = np.where(exact, 1.0, diff)
        num = np.sum(bw[None, :] * vals / safe, axis=1)
        den = np.sum(bw[None, :] / safe, axis=1)
        out = num / den
        hit = exact.any(axis=1)
        if np.any(hit):
            which = np.argmax(exact[hit], axis=1)
            out[hit] = vals[hit, which]
        return float(out[0]) if np.ndim(x) == 0 else out.reshape(np.shape(x))


class CumulativeFn:
    """Exact antiderivative of a grid function, evaluable anywhere on the grid span."""

    def __init__(self, grid: PanelGrid, coefs: np.ndarray, offsets: np.ndarray):
        self.grid = grid
        self.coefs = coefs  # per-panel Legendre coefficients of the antiderivative
        self.offsets = offsets

    def __call__(self, x):
        g = self.grid
        x_arr = np.atleast_1d(np.asarray(x, dtype=float)).ravel()
        idx = g.panel_of(x_arr)
        lo = g.breaks[idx]
        hi = g.breaks[idx + 1]
        t = (2.0 * x_arr - (lo + hi)) / (hi - lo)
        out = np.empty_like(x_arr)
        for pid in np.unique(idx):
            sel = idx == pid
            out[sel] = np.polynomial.legendre.legval(t[sel], self.coefs[pid]) \
                + self.offsets[pid]
        return float(out[0]) if np.ndim(x) == 0 else out.reshape(np.shape(x))

    def at_nodes(self) -> np.ndarray:
        return self(self.grid.nodes)

    @property
    def total(self) -> float:
        t_hi = np.polynomial.legendre.legval(1.0, self.coefs[-1])
        return float(t_hi + self.offsets[-1])


def cumulative(gf: GridFunction) -> CumulativeFn:
    """Antiderivative F(x) = integral from the grid start to x of gf."""
    g = gf.grid
    _, _, _, coef_from_values = _gl_reference(g.order)
    vals = gf.values.reshape(g.n_panels, g.order)
    coefs_g = vals @ coef_from_values.T  # Legendre coefficients per panel
    half = 0.5 * np.diff(g.breaks)
    out_coefs = np.zeros((g.n_panels, g.order + 1))
    offsets = np.zeros(g.n_panels)
    running = 0.0
    for pid in range(g.n_panels):
        c = np.polynomial.legendre.legint(coefs_g[pid]) * half[pid]
        left = np.polynomial.legendre.legval(-1.0, c)
        out_coefs[pid, : len(c)] = c
        offsets[pid] = running - left
        right = np.polynomial.legendre.legval(1.0, c)
        running += right - left
    return CumulativeFn(g, out_coefs, offsets)


# ---------------------------------------------------------------------------
# Chebyshev collocation helpers (second-kind points, endpoints included)


def cheb_nodes(a: float, b: float, m: int) -> np.ndarray:
    k = np.arange(m + 1)
    t = -np.cos(np.pi * k / m)  # ascending on [-1, 1]
    return a + (b - a) * (t + 1.0) / 2.0


def _cheb_bary_weights(m: int) -> np.ndarray:
    w = np.ones(m + 1)
    w[1::2] = -1.0
    w[0] *= 0.5
    w[-1] *= 0.5
    return w


def cheb_interp_matrix(a: float, b: float, m: int, pts) -> np.ndarray:
    """Matrix mapping values at cheb_nodes(a,b,m) to values at pts."""
    pts = np.asarray(pts, dtype=float)
    nodes = cheb_nodes(a, b, m)
    w = _cheb_bary_weights(m)
    diff = pts[:, None] - nodes[None, :]
    exact = np.abs(diff) < 1e-15
    safe = np.where(exact, 1.0, diff)
    terms = w[None, :] / safe
    M = terms / terms.sum(axis=1)[:, None]
    hit = exact.any(axis=1)
    if np.any(hit):
        M[hit] = 0.0
        M[hit, np.argmax(exact[hit], axis=1)] = 1.0
    return M


@lru_cache(maxsize=64)
def _cheb_coef_from_values(m: int) -> np.ndarray:
    t = -np.cos(np.pi * np.arange(m + 1) / m)
    V = np.polynomial.chebyshev.chebvander(t, m)
    return np.linalg.inv(V)


def cheb_coef_matrix(m: int) -> np.ndarray:
    """Values at second-kind points -> Chebyshev coefficients (exact inverse)."""
    return _cheb_coef_from_values(m)


def cheb_antideriv_matrix(a: float, b: float, m: int, pts) -> np.ndarray:
    """Matrix: values at cheb nodes -> antiderivative (from a) at pts."""
    pts = np.asarray(pts, dtype=float)
    C = cheb_coef_matrix(m)
    scale = (b - a) / 2.0
    t = (2.0 * pts - (a + b)) / (b - a)
    rows = []
    eye = np.eye(m + 1)
    for col in range(m + 1):
        ci = np.polynomial.chebyshev.chebint(eye[col]) * scale
        rows.append(np.polynomial.chebyshev.chebval(t, ci)
                    - np.polynomial.chebyshev.chebval(-1.0, ci))
    T = np.asarray(rows).T  # (len(pts), m+1) acting on coefficients
    return T @ C


def cheb_integral_row(a: float, b: float, m: int) -> np.ndarray:
    """Row functional: values at cheb nodes -> integral over [a, b]."""
    k = np.arange(m + 1)
    moments = np.zeros(m + 1)
    even = k % 2 == 0
    moments[even] = 2.0 / (1.0 - k[even].astype(float) ** 2)
    return (b - a) / 2.0 * (moments @ cheb_coef_matrix(m))
