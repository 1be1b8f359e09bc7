"""Spectral-gap machinery for piecewise expanding interval maps.

Grid-based applications of the weighted transfer operators L_k and of their
integral perturbations L_star and L_plus, the scalar gap parameters of a map
(tau, mu_*, Delta, Gamma, distortion norms), closed-form exclusion regions
A_0..A_4 for the point spectrum of L_1, the perturbation determinant Xi(z)
whose zeros are the L_star eigenvalues, and a resolvent-based scan that
locates L_1 point spectrum inside the annulus 1/lambda < |nu| < 1.

The exclusion regions and the mu_*^2 essential bound require the concave
regular class: branches with nonnegative distortion D_f = (1/f')', derivative
continuity at the interior knots, and D_f not identically zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad as _quad
from scipy.optimize import minimize_scalar

from .discretize import cheb_operator
from .expressions import evaluate, parse_expr
from .gridfn import CumulativeFn, GridFunction, PanelGrid, cumulative
from .maps import MarkovAffineMap, SmoothFullBranchMap
from .utils import NumericError

__all__ = [
    "TransferContext",
    "apply_transfer",
    "GapParams",
    "gap_params",
    "RegionSet",
    "exclusion_regions",
    "xi_function",
    "ScanPoint",
    "ScanResult",
    "resonance_scan",
    "alpha_diagnostic",
]

_SELF_CHECK_TOL = 1e-11
_PANEL_LADDER = (8, 16, 32)
_XI_MIN_GAP = 1e-6
_XI_TERM_CAP = 20_000
_NEUMANN_CAP = 500


def _supported(m) -> bool:
    return isinstance(m, (MarkovAffineMap, SmoothFullBranchMap))


# ---------------------------------------------------------------------------
# grid application of L_k, L_star, L_plus


class TransferContext:
    """Branch-inverse tables for transfer applications on one panel grid.

    The grid is refined (8, 16, 32 panels per branch) until the conservation
    self-check |int L_1 g - int g| < 1e-11 passes for two probe functions;
    an explicitly supplied grid skips the ladder but is still checked.
    """

    def __init__(self, m, grid: PanelGrid | None = None, order: int = 32):
        if not _supported(m):
            raise TypeError("transfer grids need an affine Markov or smooth "
                            "full-branch map")
        self.map = m
        if grid is not None:
            self.grid = grid
            self._build_tables()
            err = self._self_check()
            if err > _SELF_CHECK_TOL:
                raise NumericError(f"grid too coarse: conservation check {err:.2e}")
        else:
            for panels in _PANEL_LADDER:
                self.grid = PanelGrid.for_map(m, panels_per_branch=panels, order=order)
                self._build_tables()
                err = self._self_check()
                if err <= _SELF_CHECK_TOL:
                    break
            else:
                raise NumericError(f"grid too coarse: conservation check {err:.2e}")
        self._xi_cn: list[float] = []
        self._xi_last: np.ndarray | None = None

    def _build_tables(self):
        m, g = self.map, self.grid
        x = g.nodes
        self._masks = []
        self._inverses = []
        self._derivs = []
        for j in range(m.n_branches):
            lo, hi = m.branch_image(j)
            sel = (x >= lo - 1e-12) & (x <= hi + 1e-12)
            y = m.branch_inverse(j, np.clip(x[sel], lo, hi))
            self._masks.append(sel)
            self._inverses.append(y)
            self._derivs.append(np.asarray(m.branch_deriv(j, y), dtype=float))
        if isinstance(m, MarkovAffineMap):
            self._df_nodes = np.zeros(g.n_nodes)
            self._df_at_inverse = [np.zeros(len(y)) for y in self._inverses]
        else:
            self._df_nodes = _df_values(m, x)
            self._df_at_inverse = [
                np.asarray(evaluate(m.df[j], y), dtype=float)
                for j, y in enumerate(self._inverses)
            ]

    def _self_check(self) -> float:
        worst = 0.0
        for probe in (lambda x: np.ones_like(x),
                      lambda x: np.cos(3.0 * x) + x * x):
            v = probe(self.grid.nodes)
            out = self._apply_k(v, 1)
            worst = max(worst, abs(self.grid.integral(out) - self.grid.integral(v)))
        return worst

    def _apply_k(self, values: np.ndarray, k: int) -> np.ndarray:
        gf = GridFunction(self.grid, values)
        out = np.zeros(self.grid.n_nodes)
        for j in range(self.map.n_branches):
            sel = self._masks[j]
            w = self._derivs[j] ** (-float(k))
            out[sel] += w * gf(self._inverses[j])
        return out

    def _apply_weighted(self, fn, k: int) -> np.ndarray:
        # L_k applied to a function given as a callable on branch preimages
        out = np.zeros(self.grid.n_nodes)
        for j in range(self.map.n_branches):
            sel = self._masks[j]
            w = self._derivs[j] ** (-float(k))
            out[sel] += w * fn(j, self._inverses[j])
        return out

    def apply(self, op, values: np.ndarray) -> np.ndarray:
        values = np.asarray(values, dtype=float)
        if values.shape != (self.grid.n_nodes,):
            raise ValueError("values must match the context grid")
        if isinstance(op, str):
            if op not in ("star", "plus"):
                raise ValueError(f"unknown operator {op!r}")
            psi = cumulative(GridFunction(self.grid, values))
            shift = 0.0
            if op == "star":
                # phi(g) = psi(g) - int (1-y) g(y) dy
                shift = self.grid.integral((1.0 - self.grid.nodes) * values)
            pert = self._apply_weighted(
                lambda j, y: self._df_at_inverse[j] * (psi(y) - shift), 1)
            return self._apply_k(values, 2) + pert
        return self._apply_k(values, int(op))


def apply_transfer(m, op, g, ctx: TransferContext | None = None) -> GridFunction:
    """Apply L_k (integer op), L_star, or L_plus to g on a panel grid.

    g may be a GridFunction, a callable, or an array of node values on the
    context grid.  Returns the image sampled on the same grid.
    """
    if ctx is None:
        ctx = TransferContext(m)
    elif ctx.map is not m:
        raise ValueError("context was built for a different map")
    if isinstance(g, GridFunction):
        if g.grid is not ctx.grid:
            g = GridFunction(ctx.grid, g(ctx.grid.nodes))
        values = g.values
    elif callable(g):
        values = np.asarray(g(ctx.grid.nodes), dtype=float)
    else:
        values = np.asarray(g, dtype=float)
    return GridFunction(ctx.grid, ctx.apply(op, values))


def _df_values(m: SmoothFullBranchMap, x: np.ndarray) -> np.ndarray:
    out = np.empty(len(x))
    cell = np.asarray(m.branch_of(x))
    for j in range(m.n_branches):
        sel = cell == j
        if np.any(sel):
            out[sel] = evaluate(m.df[j], x[sel])
    return out


# ---------------------------------------------------------------------------
# scalar gap parameters


@dataclass
class GapParams:
    """Scalar spectral-gap data of a piecewise expanding map.

    tau bounds |z| for every eigenvalue of L_1 except 1; mu_star = 1/f'(1) is
    the spectral radius of L_plus; Delta = int D_f for the concave regular
    class.  mu2 (the lower edge of the real exclusion interval A_0) has no
    closed form and is always a numerical estimate.
    """

    lam: float                  # min f'
    lam_max: float              # max f'
    df_l1: float                # ||D_f||_L1
    df_sup: float               # ||D_f||_inf
    dfprime_l1: float           # ||D_f'||_L1
    tau: float                  # 1/lam + ||D_f||_L1
    mu_star: float | None
    delta: float | None
    gamma: float | None
    n_branches: int
    exclusion_class: bool       # concave branches, knot-matched f', D_f != 0
    essential_bound: float
    mu2: float | None = None
    mu2_estimated: bool = True

    def to_json_dict(self) -> dict:
        d = {
            "lambda": self.lam,
            "lambda_max": self.lam_max,
            "df_l1": self.df_l1,
            "df_sup": self.df_sup,
            "dfprime_l1": self.dfprime_l1,
            "tau": self.tau,
            "n_branches": self.n_branches,
            "exclusion_class": self.exclusion_class,
            "essential_bound": self.essential_bound,
        }
        for name in ("mu_star", "delta", "gamma", "mu2"):
            v = getattr(self, name)
            if v is not None:
                d[name] = v
        if self.mu2 is not None:
            d["mu2_flag"] = "ESTIMATED"
        return d


def _branch_deriv_range(m, j) -> tuple[float, float]:
    if isinstance(m, MarkovAffineMap):
        s = float(m.slopes[j])
        return min(s, s), max(s, s)
    a, b = float(m.partition[j]), float(m.partition[j + 1])
    f = lambda x: float(evaluate(m.fprime[j], np.asarray([x]))[0])
    lo = minimize_scalar(f, bounds=(a, b), method="bounded").fun
    hi = -minimize_scalar(lambda x: -f(x), bounds=(a, b), method="bounded").fun
    return min(lo, f(a), f(b)), max(hi, f(a), f(b))


def _branch_l1(m, exprs, j) -> float:
    a, b = float(m.partition[j]), float(m.partition[j + 1])
    val, _ = _quad(lambda x: abs(float(evaluate(exprs[j], np.asarray([x]))[0])),
                   a, b, limit=200)
    return val


def _classify(m) -> bool:
    if isinstance(m, MarkovAffineMap):
        return False  # D_f identically zero
    from .maps import validate_map
    rep = validate_map(m)
    flags = {c.name: c.passed for c in rep.notes}
    return (flags.get("df_nonnegative", False)
            and flags.get("knot_derivative_continuity", False)
            and flags.get("df_not_identically_zero", False))


def _estimate_mu2(m, mu_star: float, degree: int = 64) -> float:
    """Numerical stand-in for the lower edge of A_0.

    The exclusion interval must sit above every real eigenvalue of L_star
    (those are exactly the real zeros of Xi), and above the subdominant
    modulus of L_plus.  Neither has a closed form; both come from the
    collocation matrices here, so the value is an estimate by construction.
    """
    w_plus = np.linalg.eigvals(cheb_operator(m, "plus", degree).matrix)
    w_plus = np.sort(np.abs(w_plus))[::-1]
    mu1 = float(w_plus[1]) if len(w_plus) > 1 else 0.0
    w_star = np.linalg.eigvals(cheb_operator(m, "star", degree).matrix)
    real = [z.real for z in w_star
            if abs(z.imag) < 1e-8 and 0.0 < z.real < mu_star]
    # pad so the open interval (mu2, 1) stays clear of the very eigenvalue
    # the estimate came from under discretization noise
    return max([mu1] + real) + 1e-9


def gap_params(m, estimate_mu2: bool = True, mu2_degree: int = 64) -> GapParams:
    """Evaluate the scalar gap parameters of a map.

    Endpoint quantities (mu_star, Delta, Gamma) use exact symbolic branch
    derivatives; the L1 norms use adaptive quadrature.  mu_star/Delta/Gamma
    are omitted when some branch derivative is not positive, and mu2 is only
    estimated for maps in the exclusion-region class.
    """
    if not _supported(m):
        raise TypeError("gap parameters need an affine Markov or smooth "
                        "full-branch map")
    n = m.n_branches
    ranges = [_branch_deriv_range(m, j) for j in range(n)]
    lam = min(min(abs(lo), abs(hi)) for lo, hi in ranges)
    lam_max = max(max(abs(lo), abs(hi)) for lo, hi in ranges)
    positive = all(lo > 0 for lo, _ in ranges)

    if isinstance(m, MarkovAffineMap):
        df_l1 = df_sup = dfprime_l1 = 0.0
    else:
        df_l1 = sum(_branch_l1(m, m.df, j) for j in range(n))
        grid = np.linspace(0.0, 1.0, 64 * n + 1)
        df_sup = float(np.max(np.abs(_df_values(m, np.clip(grid, 1e-12, 1 - 1e-12)))))
        dfprime_l1 = sum(_branch_l1(m, m.dfprime, j) for j in range(n))
    tau = 1.0 / lam + df_l1

    mu_star = delta = gamma = None
    if positive:
        fp_at = _endpoint_derivs(m)
        mu_star = 1.0 / fp_at["right_end"]
        delta = 1.0 / fp_at["right_end"] - 1.0 / fp_at["left_end"]
        gamma = 1.0 - sum(1.0 / v for v in fp_at["left_knots"])

    cls = _classify(m)
    ess = (mu_star ** 2) if (cls and mu_star is not None) else 1.0 / lam
    params = GapParams(lam, lam_max, df_l1, df_sup, dfprime_l1, tau,
                       mu_star, delta, gamma, n, cls, ess)
    if cls and estimate_mu2:
        params.mu2 = _estimate_mu2(m, mu_star, mu2_degree)
    return params


def _endpoint_derivs(m) -> dict:
    n = m.n_branches
    if isinstance(m, MarkovAffineMap):
        s = [float(v) for v in m.slopes]
        return {"left_end": s[0], "right_end": s[-1], "left_knots": s}
    p = m.partition
    left_knots = [float(evaluate(m.fprime[j], np.asarray([float(p[j])]))[0])
                  for j in range(n)]
    right_end = float(evaluate(m.fprime[n - 1], np.asarray([float(p[n])]))[0])
    return {"left_end": left_knots[0], "right_end": right_end,
            "left_knots": left_knots}


# ---------------------------------------------------------------------------
# exclusion regions


@dataclass
class RegionSet:
    """Closed-form point-spectrum exclusion regions A_0..A_4.

    Membership of z = a+ib follows the displayed inequalities; every region
    is conjugation symmetric.  A_0 is the real interval (mu2, 1) and is only
    as good as the mu2 estimate.
    """

    params: GapParams
    names: tuple[str, ...] = ("A0", "A1", "A2", "A3", "A4")

    def __post_init__(self):
        p = self.params
        if not p.exclusion_class:
            raise ValueError("exclusion regions need concave branches with "
                             "knot-matched derivatives and nonzero distortion")
        if p.mu2 is None:
            raise ValueError("exclusion regions need a mu2 estimate")

    # -- membership predicates

    def _a1_bound(self, a: float) -> float:
        p = self.params
        if a <= p.mu_star:
            return 0.0
        c = 1.0 + p.gamma / a
        if p.delta == 0.0:
            return (a - p.mu_star) ** 2
        s = math.sqrt(1.0 + 4.0 * c * c * (a - p.mu_star) ** 2 / p.delta ** 2)
        return (a - p.mu_star) * p.delta / (2.0 * c) * (s - 1.0)

    def _a2_bound(self, a: float) -> float:
        p = self.params
        if a >= -p.mu_star:
            return 0.0
        num = (abs(a) - p.mu_star) ** 2 * (a * a - p.mu_star ** 2 - p.delta * abs(a))
        den = a * a - p.mu_star ** 2 + p.delta * abs(a)
        return max(num / den, 0.0)

    def _a3_radius_sq(self) -> float:
        p = self.params
        return (p.mu_star ** 2
                + p.mu_star * (p.delta + math.sqrt(4.0 * p.mu_star ** 2
                                                   + p.delta ** 2)) / 2.0)

    def _a4_bound(self, a: float) -> float:
        p = self.params
        return (p.mu_star * p.delta + p.mu_star ** 2
                + 2.0 * abs(a) * p.mu_star - a * a)

    def membership(self, z: complex) -> dict:
        p = self.params
        a, b = float(np.real(z)), float(np.imag(z))
        out = {
            "A0": b == 0.0 and p.mu2 < a < 1.0,
            "A1": a > p.mu_star and b * b < self._a1_bound(a),
            "A2": a < -p.mu_star and b * b < self._a2_bound(a),
            "A3": a >= 0.0 and (a - p.mu_star) ** 2 + b * b > self._a3_radius_sq(),
            "A4": a < 0.0 and b * b > self._a4_bound(a),
        }
        return out

    def any_region(self, z: complex) -> bool:
        return any(self.membership(z).values())

    # -- boundary polylines for plotting

    def boundaries(self, n_points: int = 400, box: float = 1.1) -> list[tuple[str, np.ndarray, np.ndarray]]:
        """Sampled region boundaries as (name, a, b) polylines inside the box."""
        p = self.params
        out = []
        # A0: a segment on the real axis
        a0 = np.linspace(p.mu2, 1.0, max(n_points // 4, 2))
        out.append(("A0", a0, np.zeros_like(a0)))
        # A1: curve b = +-sqrt(bound(a)) for a > mu_star
        a1 = np.linspace(p.mu_star, box, n_points)
        b1 = np.sqrt(np.maximum([self._a1_bound(a) for a in a1], 0.0))
        out.append(("A1", a1, b1))
        out.append(("A1", a1, -b1))
        # A2: same on the left of -mu_star
        a2 = np.linspace(-box, -p.mu_star, n_points)
        b2 = np.sqrt([self._a2_bound(a) for a in a2])
        out.append(("A2", a2, b2))
        out.append(("A2", a2, -b2))
        # A3: the circular arc in the right half plane, clipped to the box
        r3 = math.sqrt(self._a3_radius_sq())
        # arc angles where 0 <= a = mu_star + r3 cos(t) <= box
        t_max = math.acos(max(-1.0, min(1.0, -p.mu_star / r3)))
        t_min = math.acos(max(-1.0, min(1.0, (box - p.mu_star) / r3)))
        for t in (np.linspace(t_min, t_max, n_points),
                  np.linspace(-t_max, -t_min, n_points)):
            out.append(("A3", p.mu_star + r3 * np.cos(t), r3 * np.sin(t)))
        # A4: curve b = +-sqrt(bound(a)) for a < 0
        a4 = np.linspace(-box, 0.0, n_points, endpoint=False)
        b4 = np.sqrt(np.maximum([self._a4_bound(a) for a in a4], 0.0))
        out.append(("A4", a4, b4))
        out.append(("A4", a4, -b4))
        return out


def exclusion_regions(params_or_map) -> RegionSet:
    params = params_or_map
    if not isinstance(params, GapParams):
        params = gap_params(params_or_map)
    return RegionSet(params)


# ---------------------------------------------------------------------------
# the perturbation determinant Xi


def _xi_coefficients(ctx: TransferContext, count: int) -> list[float]:
    # c_n = int (1-y) (L_plus^n L_1 D_f)(y) dy, shared across z values
    while len(ctx._xi_cn) < count:
        if ctx._xi_last is None:
            ctx._xi_last = ctx.apply(1, ctx._df_nodes)
        else:
            ctx._xi_last = ctx.apply("plus", ctx._xi_last)
        u = ctx._xi_last
        ctx._xi_cn.append(ctx.grid.integral((1.0 - ctx.grid.nodes) * u))
    return ctx._xi_cn


def xi_function(m, z: complex, tail_tol: float = 1e-8,
                ctx: TransferContext | None = None,
                params: GapParams | None = None) -> tuple[complex, float]:
    """Evaluate Xi(z) = 1 + sum_n z^-(n+1) int (1-y) L_plus^n L_1 D_f.

    Valid for |z| > mu_star (geometric resolvent series); the returned second
    value bounds the truncation tail by Delta (mu_*/|z|)^(M+1) / (|z|-mu_*).
    Zeros of Xi are exactly the eigenvalues of L_star.
    """
    if ctx is None:
        ctx = TransferContext(m)
    if params is None:
        params = gap_params(m, estimate_mu2=False)
    if params.mu_star is None:
        raise ValueError("Xi needs positive branch derivatives")
    mu, delta = params.mu_star, params.df_l1
    az = abs(z)
    if az <= mu + _XI_MIN_GAP:
        raise ValueError(f"|z| = {az:.6g} must exceed mu_star + {_XI_MIN_GAP}")
    if delta == 0.0:
        return complex(1.0), 0.0
    ratio = mu / az
    # smallest M with delta * ratio^(M+1) / (az - mu) < tail_tol
    M = int(math.ceil(math.log(tail_tol * (az - mu) / delta) / math.log(ratio))) - 1
    M = max(M, 0)
    if M > _XI_TERM_CAP:
        raise NumericError("tail bound needs too many terms this close to mu_star")
    cn = _xi_coefficients(ctx, M + 1)
    zc = complex(z)
    total = complex(1.0)
    zpow = 1.0 / zc
    for n in range(M + 1):
        total += zpow * cn[n]
        zpow /= zc
    tail = delta * ratio ** (M + 1) / (az - mu)
    return total, tail


# ---------------------------------------------------------------------------
# resolvent scan for point spectrum in the annulus


@dataclass
class ScanPoint:
    nu: complex
    test_eig: complex
    distance: float
    drift: float
    flagged: bool

    def to_row(self) -> dict:
        return {
            "nu_re": float(np.real(self.nu)),
            "nu_im": float(np.imag(self.nu)),
            "test_eig_distance": self.distance,
            "drift": self.drift,
        }


@dataclass
class ScanResult:
    points: list[ScanPoint]
    candidates: list[complex]
    basis_size: int
    error_scale: str = "C * (|nu| - 1/lambda)^-1 * N^-alpha (C, alpha not certified)"

    def flagged(self) -> list[ScanPoint]:
        return [p for p in self.points if p.flagged]


def _neumann_apply(L2: np.ndarray, K: np.ndarray, nu: complex) -> np.ndarray:
    """Sum_n nu^-(n+1) L2^n K, truncated when terms stop mattering."""
    term = K / nu
    total = term.copy()
    scale = max(float(np.linalg.norm(K)), 1e-300)
    for _ in range(_NEUMANN_CAP):
        term = (L2 @ term) / nu
        total += term
        if np.linalg.norm(term) < 1e-14 * scale:
            return total
    raise NumericError("resolvent series did not converge: |nu| too close to "
                       "the contraction bound 1/lambda")


def _scan_matrices(m, size: int):
    if isinstance(m, MarkovAffineMap):
        # non-full-branch Markov case: split off cellwise means.  Piecewise
        # constants are L_1-invariant, so the mean-zero block plays the role
        # of the contraction and the mean block carries the point spectrum.
        op = cheb_operator(m, 1, size, "srb")
        Pc = op.cell_mean_projector()
        P0 = np.eye(op.n) - Pc
        contraction = P0 @ op.matrix @ P0
        coupling = Pc @ op.matrix
        return contraction, coupling
    L2 = cheb_operator(m, 2, size, "srb").matrix
    K = cheb_operator(m, "K", size, "srb").matrix
    return L2, K


def resonance_scan(m, nu_values, size: int = 24, tol_scan: float = 1e-3) -> ScanResult:
    """Locate candidate L_1 eigenvalues in the annulus 1/lambda < |nu| < 1.

    Factoring nu - L_star = (nu - L_2)(Id - (nu - L_2)^-1 K) turns each
    candidate into an eigenvalue-one condition on the finite-rank matrix
    R_N K Pi_N; nu is flagged when that matrix has an eigenvalue within
    tol_scan of 1.  The reported drift is the movement of the test
    eigenvalue between basis sizes N and 2N.
    """
    if not _supported(m):
        raise TypeError("scan needs an affine Markov or smooth full-branch map")
    params = gap_params(m, estimate_mu2=False)
    lam_inv = 1.0 / params.lam
    nus = np.atleast_1d(np.asarray(nu_values, dtype=complex))
    for nu in nus:
        if not lam_inv < abs(nu) < 1.0:
            raise ValueError(f"nu = {nu:.6g} outside the open annulus "
                             f"({lam_inv:.6g}, 1)")
    A1, B1 = _scan_matrices(m, size)
    A2, B2 = _scan_matrices(m, 2 * size)
    points = []
    for nu in nus:
        eigs1 = np.linalg.eigvals(_neumann_apply(A1, B1, nu))
        eigs2 = np.linalg.eigvals(_neumann_apply(A2, B2, nu))
        t1 = eigs1[np.argmin(np.abs(eigs1 - 1.0))]
        t2 = eigs2[np.argmin(np.abs(eigs2 - 1.0))]
        d = float(abs(t1 - 1.0))
        points.append(ScanPoint(complex(nu), complex(t1), d,
                                float(abs(t1 - t2)), d < tol_scan))
    candidates = [p.nu for p in points if p.flagged]
    return ScanResult(points, candidates, size)


# ---------------------------------------------------------------------------
# diagnostic for the alternative commutation weight


def alpha_diagnostic(m, alpha_expr: str, n_samples: int = 2048) -> float:
    """Sup norm of D_f - alpha/f' + alpha(f(x)) over the interval.

    The quantity vanishes identically when ln f' is cohomologous to a
    constant with transfer function having derivative alpha; small values
    mean the alternative commutation route would beat the default gap bound.
    """
    if not isinstance(m, SmoothFullBranchMap):
        raise TypeError("the diagnostic needs a smooth full-branch map")
    alpha = parse_expr(alpha_expr)
    worst = 0.0
    p = m.partition
    for j in range(m.n_branches):
        a, b = float(p[j]), float(p[j + 1])
        pad = 1e-9 * (b - a)
        x = np.linspace(a + pad, b - pad, n_samples // m.n_branches)
        fx = np.clip(evaluate(m.exprs[j], x), 0.0, 1.0)
        vals = (evaluate(m.df[j], x)
                - evaluate(alpha, x) / evaluate(m.fprime[j], x)
                + evaluate(alpha, fx))
        worst = max(worst, float(np.max(np.abs(vals))))
    return worst
