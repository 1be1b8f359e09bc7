"""Maximal-entropy measure for full-branch monotone maps.

The counting operator L_0 h(x) = sum_j h(g_j(x)) over branch inverses g_j
satisfies L_0 1 = N, and the normalized pairings

    mu_n(h) = int_0^1 N^{-n} (L_0^n h)(x) dx

converge to the maximal-entropy measure mu(h).  Because mu has constant
Jacobian N, correlations reduce to the same pairing:
int h . (phi o f^n) dmu = mu(phi . N^{-n} L_0^n h), which is what the
mixing-rate check evaluates.  Expansion is not required (neutral fixed
points are fine); every branch must map onto (0,1).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import csr_matrix

from .expressions import evaluate, parse_expr
from .gridfn import GridFunction, PanelGrid, _gl_reference
from .maps import MarkovAffineMap, MonotoneFullBranchMap, SmoothFullBranchMap
from .utils import NumericError

__all__ = [
    "l0_apply",
    "MmeApproximation",
    "mme_iterate",
    "mixing_rate_check",
    "cylinder_endpoints",
    "smoothed_indicator",
    "cylinder_mass",
]

_TOTAL_PANELS = 128
_ORDER = 32
_PAIR_TOL = 1e-9
_MASS_TOL = 1e-8
_N_MAX_CAP = 80


def _require_full_branch(m):
    if not isinstance(m, (MarkovAffineMap, SmoothFullBranchMap,
                          MonotoneFullBranchMap)):
        raise TypeError("maximal-entropy iteration needs an interval map")
    for j in range(m.n_branches):
        lo, hi = m.branch_image(j)
        if lo > 1e-12 or hi < 1.0 - 1e-12:
            raise ValueError(f"branch {j} is not onto (0,1): image "
                             f"({lo:.6g}, {hi:.6g})")


def _base_grid(m) -> PanelGrid:
    per = max(_TOTAL_PANELS // m.n_branches, 4)
    return PanelGrid.for_map(m, panels_per_branch=per, order=_ORDER)


def _interp_matrix(grid: PanelGrid, pts: np.ndarray) -> csr_matrix:
    """Sparse matrix taking node values to interpolated values at pts."""
    t_ref, _, bw, _ = _gl_reference(grid.order)
    idx = grid.panel_of(pts)
    lo, hi = grid.breaks[idx], grid.breaks[idx + 1]
    t = (2.0 * pts - (lo + hi)) / (hi - lo)
    diff = t[:, None] - t_ref[None, :]
    exact = np.abs(diff) < 1e-14
    safe = np.where(exact, 1.0, diff)
    w = bw[None, :] / safe
    w = np.where(exact, 1.0, w)
    w[np.any(exact, axis=1)[:, None] & ~exact] = 0.0
    w /= np.sum(w, axis=1)[:, None]
    cols = (idx[:, None] * grid.order + np.arange(grid.order)[None, :])
    rows = np.repeat(np.arange(len(pts)), grid.order)
    return csr_matrix((w.ravel(), (rows, cols.ravel())),
                      shape=(len(pts), grid.n_nodes))


class _L0Grid:
    """L_0 as a sparse matrix on a fixed panel grid."""

    def __init__(self, m, grid: PanelGrid):
        self.map = m
        self.grid = grid
        mat = None
        for j in range(m.n_branches):
            y = np.asarray(m.branch_inverse(j, grid.nodes), dtype=float)
            block = _interp_matrix(grid, y)
            mat = block if mat is None else mat + block
        self.matrix = mat

    def apply(self, values: np.ndarray) -> np.ndarray:
        return self.matrix @ values


def l0_apply(m, h, grid: PanelGrid | None = None) -> GridFunction:
    """Counting transfer operator: (L_0 h)(x) = sum over preimages of h.

    h may be a GridFunction, a callable, or node values on the grid.
    """
    _require_full_branch(m)
    if grid is None:
        grid = h.grid if isinstance(h, GridFunction) else _base_grid(m)
    if isinstance(h, GridFunction):
        fn = h
    elif callable(h):
        fn = GridFunction.from_callable(grid, h)
    else:
        fn = GridFunction(grid, h)
    out = np.zeros(grid.n_nodes)
    for j in range(m.n_branches):
        out += fn(np.asarray(m.branch_inverse(j, grid.nodes), dtype=float))
    return GridFunction(grid, out)


@dataclass
class MmeApproximation:
    """Converged pairing data mu_n(phi) = int N^{-n} L_0^n phi dx."""

    map: object
    n: int
    values: list[float]
    history: list[list[float]]      # history[k][i] = mu_k(phi_i)
    converged: bool
    mass: GridFunction              # N^{-n} L_0^n 1 on the base grid
    grid: PanelGrid = field(repr=False)
    _l0: _L0Grid = field(repr=False)

    def pairing(self, g, knots=(), n_max: int = _N_MAX_CAP) -> float:
        """mu(g) for a new observable, iterated to the module tolerance.

        knots lists interior points where g is not smooth; the iteration
        then regrids each step so panel breaks track their images.
        """
        if knots is None or len(knots) == 0:
            vals, ok, _ = _iterate_fixed(self._l0, [_node_values(self.grid, g)],
                                         n_max)
            if not ok:
                raise NumericError("pairing did not converge; raise n_max")
            return vals[0]
        return _pairing_with_knots(self.map, g, [float(k) for k in knots], n_max)

    def to_json_dict(self) -> dict:
        return {
            "n": self.n,
            "values": self.values,
            "converged": self.converged,
            "total_mass": self.mass.integral(),
        }


def _node_values(grid: PanelGrid, g) -> np.ndarray:
    if isinstance(g, GridFunction):
        return np.asarray(g(grid.nodes), dtype=float)
    if callable(g):
        return np.asarray(g(grid.nodes), dtype=float)
    return np.asarray(g, dtype=float)


def _iterate_fixed(l0: _L0Grid, value_list: list[np.ndarray], n_max: int,
                   tol: float = _PAIR_TOL):
    """Iterate v <- L_0 v / N for several observables at once."""
    V = np.column_stack(value_list)
    n_inv = 1.0 / l0.map.n_branches
    grid = l0.grid
    mus = [np.array([grid.integral(V[:, i]) for i in range(V.shape[1])])]
    for k in range(1, n_max + 1):
        V = (l0.matrix @ V) * n_inv
        mus.append(np.array([grid.integral(V[:, i]) for i in range(V.shape[1])]))
        if np.max(np.abs(mus[-1] - mus[-2])) < tol:
            return list(mus[-1]), True, [list(r) for r in mus]
    return list(mus[-1]), False, [list(r) for r in mus]


def _pairing_with_knots(m, g, knots: list[float], n_max: int) -> float:
    """Pairing iteration that keeps panel breaks on the images of knots.

    The current iterate is always *sampled* on a grid whose breaks contain
    its own kinks; the next iterate is kept as a lazy sum over branch
    inverses so it can be sampled on the grid aligned with the forwarded
    kink positions.
    """
    uniform = _base_grid(m).breaks
    pts = np.asarray(sorted(knots), dtype=float)
    fn = g
    mu_prev = None
    for _ in range(n_max + 1):
        breaks = np.unique(np.concatenate([uniform, pts]))
        breaks = breaks[np.concatenate([[True], np.diff(breaks) > 1e-13])]
        grid = PanelGrid(breaks, _ORDER)
        gf = GridFunction.from_callable(grid, fn)
        mu = gf.integral()
        if mu_prev is not None and abs(mu - mu_prev) < _PAIR_TOL:
            return mu
        mu_prev = mu

        def fn(x, _gf=gf, _m=m):
            x = np.asarray(x, dtype=float)
            out = np.zeros(np.shape(x))
            for j in range(_m.n_branches):
                out += _gf(np.asarray(_m.branch_inverse(j, x), dtype=float))
            return out / _m.n_branches

        pts = np.clip(np.asarray(m.apply(pts), dtype=float), 0.0, 1.0)
    raise NumericError("pairing did not converge; raise n_max")


def mme_iterate(m, phis, n_max: int = _N_MAX_CAP) -> MmeApproximation:
    """Construct the maximal-entropy pairing mu(phi) for each observable.

    phis may be DSL strings, callables, or node-value arrays; iteration
    stops once every pairing is Cauchy within 1e-9 between successive steps.
    Non-convergence by n_max is reported on the result, not raised.
    """
    _require_full_branch(m)
    if n_max > _N_MAX_CAP:
        raise ValueError(f"n_max capped at {_N_MAX_CAP}")
    grid = _base_grid(m)
    l0 = _L0Grid(m, grid)
    value_list = [_as_observable(grid, p) for p in phis]
    ones = np.ones(grid.n_nodes)
    vals, ok, hist = _iterate_fixed(l0, value_list + [ones], n_max)
    mass_vals = ones.copy()
    n_done = len(hist) - 1
    for _ in range(n_done):
        mass_vals = (l0.matrix @ mass_vals) / m.n_branches
    return MmeApproximation(m, n_done, vals[:-1],
                            [row[:-1] for row in hist], ok,
                            GridFunction(grid, mass_vals), grid, l0)


def _as_observable(grid: PanelGrid, p) -> np.ndarray:
    if isinstance(p, str):
        e = parse_expr(p)
        return np.asarray(evaluate(e, grid.nodes), dtype=float)
    return _node_values(grid, p)


def mixing_rate_check(m, h, phi, n_max: int = 24) -> tuple[float, float]:
    """Fit the maximal-entropy mixing rate of C(n) = cov(h, phi o f^n).

    Uses the constant-Jacobian identity int h.(phi o f^n) dmu =
    mu(phi . N^{-n} L_0^n h).  Returns (bound constant, achieved rate) and
    raises NumericError when the fitted rate exceeds 1/N + 0.05.
    """
    _require_full_branch(m)
    grid = _base_grid(m)
    l0 = _L0Grid(m, grid)
    hv = _as_observable(grid, h)
    pv = _as_observable(grid, phi)
    # inner pairings run well below the public tolerance so that
    # correlations near 1e-10 are not stopping-rule artifacts
    (mu_h, mu_phi), ok, _ = _iterate_fixed(l0, [hv, pv], _N_MAX_CAP, tol=1e-13)
    if not ok:
        raise NumericError("observable pairings did not converge")
    w = hv.copy()
    cs = []
    n_inv = 1.0 / m.n_branches
    for n in range(1, n_max + 1):
        w = (l0.matrix @ w) * n_inv
        vals, ok, _ = _iterate_fixed(l0, [pv * w], _N_MAX_CAP, tol=1e-13)
        if not ok:
            raise NumericError("correlation pairing did not converge")
        cs.append(abs(vals[0] - mu_h * mu_phi))
    cs = np.asarray(cs)
    ns = np.arange(1, n_max + 1)
    live = cs > 1e-11
    if not np.any(live):
        return 0.0, 0.0
    # log-linear fit over the resolved part of the tail
    ns_f, cs_f = ns[live], np.log(cs[live])
    slope, intercept = np.polyfit(ns_f, cs_f, 1)
    rate = float(np.exp(slope))
    nu = 1.0 / m.n_branches + 0.05
    if rate > nu:
        raise NumericError(f"fitted mixing rate {rate:.4f} exceeds {nu:.4f}")
    const = float(np.max(cs / nu ** ns))
    return const, rate


# ---------------------------------------------------------------------------
# cylinder machinery for the entropy bound


def cylinder_endpoints(m, depth: int) -> np.ndarray:
    """Sorted endpoints of all depth-n cylinders (N^n + 1 points)."""
    _require_full_branch(m)
    if not 1 <= depth <= 14:
        raise ValueError("depth must be between 1 and 14")
    pts = np.array([0.0, 1.0])
    for _ in range(depth):
        pts = np.concatenate([
            np.asarray(m.branch_inverse(j, pts), dtype=float)
            for j in range(m.n_branches)
        ])
        pts = np.unique(np.round(pts, 14))
    return pts


def smoothed_indicator(support: tuple[float, float], plateau: tuple[float, float]):
    """C^1 bump: 1 on the plateau, cubic ramps to 0 at the support edges."""
    a, b = support
    c, d = plateau
    if not a <= c < d <= b:
        raise ValueError("plateau must sit inside the support")

    def ramp(t):
        t = np.clip(t, 0.0, 1.0)
        return t * t * (3.0 - 2.0 * t)

    def bump(x):
        x = np.asarray(x, dtype=float)
        up = ramp((x - a) / (c - a)) if c > a else np.ones_like(x)
        down = ramp((b - x) / (b - d)) if b > d else np.ones_like(x)
        return np.where((x >= a) & (x <= b), up * down, 0.0)

    return bump


def cylinder_mass(approx: MmeApproximation, index: int, depth: int) -> float:
    """Upper bound for mu(cylinder) via the smoothed-indicator pairing.

    The bump is 1 on cylinder `index` and supported on the union with its
    neighbors, so the pairing dominates the cylinder mass while staying
    below the mass of three adjacent cylinders.
    """
    m = approx.map
    ends = cylinder_endpoints(m, depth)
    if not 0 <= index < len(ends) - 1:
        raise ValueError("cylinder index out of range")
    c, d = float(ends[index]), float(ends[index + 1])
    a = float(ends[index - 1]) if index > 0 else c
    b = float(ends[index + 2]) if index + 2 < len(ends) else d
    if a == c:  # no left neighbor: ramp inside a margin of the plateau
        bump = smoothed_indicator((c, b), (c, d))
        knots = [c, d, b]
    elif b == d:
        bump = smoothed_indicator((a, d), (c, d))
        knots = [a, c, d]
    else:
        bump = smoothed_indicator((a, b), (c, d))
        knots = [a, c, d, b]
    knots = [k for k in knots if 1e-12 < k < 1.0 - 1e-12]
    return approx.pairing(bump, knots=knots)
