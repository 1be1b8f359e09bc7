"""Invariant measures, correlation sequences, decay fits, torus automorphisms.

Two independent routes compute C(n) = integral of phi * (psi o f^n) dmu for
affine Markov maps: an exact route that pushes coefficient vectors through
the block transfer matrix and pairs with the invariant functional, and a
quadrature route over dynamical cylinders.  Their agreement is a structural
check on the whole operator assembly, so the two paths share no operator
code: the cylinder route only touches the map's branch inverses.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .affine import WeightMode, build_Bk, build_Tkr
from .expressions import Expr, parse_expr, poly_coefficients
from .maps import MarkovAffineMap
from .utils import NumericError

__all__ = [
    "InvariantDensityPair",
    "invariant_density",
    "CorrelationTrace",
    "correlation_sequence",
    "DecayFit",
    "fit_decay",
    "TorusAutomorphism",
    "torus_correlation",
    "torus_decoupling_time",
]

_DEGREE_CAP = 8            # exact route representation cap
_CYLINDER_CAP = 4_000_000  # refuse enumerations beyond this many intervals
_GL_ORDER = 12             # exact for products of capped-degree polynomials


def _perron_vector(M: np.ndarray, expect_simple: bool = True):
    """Right eigenvector for the spectral-radius eigenvalue (real positive pair)."""
    vals, vecs = np.linalg.eig(M)
    rho = np.max(np.abs(vals))
    lead = np.where(np.abs(np.abs(vals) - rho) <= 1e-9 * max(rho, 1.0))[0]
    if expect_simple and len(lead) != 1:
        raise NumericError(f"leading eigenvalue is not simple: {vals[lead]}")
    i = lead[0]
    v = np.real_if_close(vecs[:, i], tol=1e6)
    if np.iscomplexobj(v):
        raise NumericError("leading eigenvector is not real")
    v = v.real
    if np.sum(v) < 0:
        v = -v
    return float(np.real(vals[i])), v


@dataclass
class InvariantDensityPair:
    """Conformal pair (nu, gamma) with density h: mu = h dnu, transfer h = gamma h.

    For affine Markov maps h is piecewise constant (one value per cell) and
    nu acts exactly on piecewise polynomials; nu_cell holds nu(I_j).
    """

    map: MarkovAffineMap
    mode: WeightMode
    gamma: float
    h_cell: np.ndarray
    nu_cell: np.ndarray
    _dual_cache: dict = field(default_factory=dict, repr=False)

    @property
    def k(self) -> int:
        return self.mode.base_k

    def density(self, x):
        return self.h_cell[self.map.branch_of(x)]

    def _dual_vector(self, r: int) -> np.ndarray:
        """nu as a row functional on coefficient vectors of degree <= r."""
        if r in self._dual_cache:
            return self._dual_cache[r]
        m = self.map
        n = m.n_branches
        p = m.partition
        if self.mode is WeightMode.SRB:
            # nu = Lebesgue: integral of x^l over each cell in closed form
            row = np.empty(n * (r + 1))
            for l in range(r + 1):
                row[l * n:(l + 1) * n] = (p[1:] ** (l + 1) - p[:-1] ** (l + 1)) / (l + 1)
        else:
            # conformal functional: left Perron eigenvector of the block matrix,
            # normalized so nu(1) = 1
            T = build_Tkr(m, 0, r, WeightMode.MME, check=False)
            gamma, row = _perron_vector(T.T)
            if abs(gamma - self.gamma) > 1e-8 * max(1.0, self.gamma):
                raise NumericError(
                    f"dual eigenvalue {gamma!r} disagrees with gamma {self.gamma!r}")
            ones = np.zeros(n * (r + 1))
            ones[:n] = 1.0
            row = row / float(row @ ones)
        self._dual_cache[r] = row
        return row

    def nu_poly(self, coeffs, r: int) -> float:
        return float(self._dual_vector(r) @ np.asarray(coeffs, dtype=float))

    def mu_poly(self, coeffs, r: int) -> float:
        return self.nu_poly(_cellwise_scale(self.map, coeffs, r, self.h_cell), r)

    def mu_compose_f(self, coeffs, r: int) -> float:
        """mu(phi o f) evaluated exactly via the conformal change of variables.

        On each branch nu(g_j(E)) = w_j nu(E) with w_j = 1/|lam_j| for Lebesgue
        and 1/gamma for the conformal functional, so
        mu(phi o f) = sum_j h_j w_j nu(phi restricted to f(I_j)).
        """
        m = self.map
        coeffs = np.asarray(coeffs, dtype=float)
        total = 0.0
        for j in range(m.n_branches):
            if self.mode is WeightMode.SRB:
                w = 1.0 / abs(m.slopes[j])
            else:
                w = 1.0 / self.gamma
            masked = coeffs.reshape(r + 1, m.n_branches).copy()
            masked[:, m.adjacency[j] == 0] = 0.0
            total += self.h_cell[j] * w * self.nu_poly(masked.ravel(), r)
        return total


def _cellwise_scale(m: MarkovAffineMap, coeffs, r: int, cell_factors) -> np.ndarray:
    out = np.asarray(coeffs, dtype=float).reshape(r + 1, m.n_branches) \
        * np.asarray(cell_factors)[None, :]
    return out.ravel()


def _cellwise_product(m: MarkovAffineMap, a, ra: int, b, rb: int) -> np.ndarray:
    """Coefficients of the cellwise product, degree ra + rb."""
    n = m.n_branches
    A = np.asarray(a, dtype=float).reshape(ra + 1, n)
    B = np.asarray(b, dtype=float).reshape(rb + 1, n)
    out = np.zeros((ra + rb + 1, n))
    for i in range(ra + 1):
        for j in range(rb + 1):
            out[i + j] += A[i] * B[j]
    return out.ravel()


def invariant_density(m, mode: WeightMode | str = WeightMode.SRB) -> InvariantDensityPair:
    """Invariant pair for an affine Markov map, from exact cell data.

    Density mode: h solves B_1 h = h, nu = Lebesgue, gamma = 1.  Entropy
    mode: gamma = rho(A), h is the Perron vector of B_0 = A^T, nu on cells
    is the Perron vector of A; normalized so nu(1) = mu(1) = 1.
    """
    mode = WeightMode.coerce(mode)
    if not isinstance(m, MarkovAffineMap):
        raise TypeError("invariant_density: exact pairs exist for affine Markov maps; "
                        "use the grid modules for smooth and monotone maps")
    if mode is WeightMode.SRB:
        B1 = build_Bk(m, 1, WeightMode.SRB)
        gamma, h = _perron_vector(B1)
        if abs(gamma - 1.0) > 1e-10:
            raise NumericError(f"density transfer leading eigenvalue {gamma!r} != 1")
        h = h / float(np.dot(h, m.lengths))
        return InvariantDensityPair(m, mode, 1.0, h, m.lengths.copy())
    B0 = build_Bk(m, 0, WeightMode.MME)
    gamma, h = _perron_vector(B0)
    _, nu = _perron_vector(B0.T)
    nu = nu / float(np.sum(nu))
    h = h / float(np.dot(nu, h))
    return InvariantDensityPair(m, mode, gamma, h, nu)


# ---------------------------------------------------------------------------
# dynamical cylinders
#
# A depth-d cylinder is determined by a branch itinerary (j_0 .. j_{d-1})
# plus the cell its d-th image lands in; on it f^d is affine ONTO that cell.
# Refinement composes branch inverses only, so endpoint error stays at
# machine level no matter the depth, and f^d values on a cylinder come from
# its image cell rather than from forward iteration.


@dataclass
class _CylinderLevel:
    lo: np.ndarray
    hi: np.ndarray
    first: np.ndarray   # cell containing the cylinder
    final: np.ndarray   # cell f^depth maps the cylinder onto
    sign: np.ndarray    # orientation of f^depth there
    parent: np.ndarray  # index of the image cylinder one level up


def _cylinder_count(m: MarkovAffineMap, depth: int) -> int:
    c = np.ones(m.n_branches)
    for _ in range(depth):
        c = m.adjacency.astype(float) @ c
    return int(round(float(np.sum(c))))


def _cylinder_tower(m: MarkovAffineMap, depth: int) -> list[_CylinderLevel]:
    if _cylinder_count(m, depth) > _CYLINDER_CAP:
        raise ValueError(f"cylinder depth {depth} needs more than "
                         f"{_CYLINDER_CAP} intervals; lower the depth")
    n = m.n_branches
    p = np.asarray(m.partition, dtype=float)
    idx = np.arange(n)
    levels = [_CylinderLevel(p[:-1].copy(), p[1:].copy(), idx.copy(), idx.copy(),
                             np.ones(n), np.full(n, -1))]
    for _ in range(depth):
        prev = levels[-1]
        los, his, firsts, finals, signs, parents = [], [], [], [], [], []
        for j in range(n):
            sel = np.where(m.adjacency[j, prev.first] == 1)[0]
            if len(sel) == 0:
                continue
            a = m.branch_inverse(j, prev.lo[sel])
            b = m.branch_inverse(j, prev.hi[sel])
            los.append(np.minimum(a, b))
            his.append(np.maximum(a, b))
            firsts.append(np.full(len(sel), j))
            finals.append(prev.final[sel])
            signs.append(prev.sign[sel] * np.sign(m.slopes[j]))
            parents.append(sel)
        levels.append(_CylinderLevel(
            np.concatenate(los), np.concatenate(his), np.concatenate(firsts),
            np.concatenate(finals), np.concatenate(signs), np.concatenate(parents)))
    return levels


# ---------------------------------------------------------------------------
# correlation traces


@dataclass
class CorrelationTrace:
    n: np.ndarray
    values: np.ndarray
    mode: str
    method: str
    gamma: float
    mu_phi: float
    mu_psi: float

    @property
    def noise_floor(self) -> float:
        return 1e3 * np.finfo(float).eps * abs(self.values[0])

    def centered(self) -> np.ndarray:
        return self.values - self.mu_phi * self.mu_psi

    def to_rows(self, predicted_rho: float | None = None,
                predicted_power: int = 0) -> list[tuple]:
        c = self.centered()
        scale = float(np.max(np.abs(c))) if len(c) else 0.0
        rows = []
        for i, n in enumerate(self.n):
            bound = ""
            if predicted_rho is not None:
                bound = scale * predicted_rho ** int(n) * max(int(n), 1) ** predicted_power
            v = complex(self.values[i])
            rows.append((int(n), v.real, v.imag, abs(v), bound))
        return rows


def _as_expr(obs) -> Expr:
    return parse_expr(obs) if isinstance(obs, str) else obs


def correlation_sequence(m, phi, psi, mode: WeightMode | str = WeightMode.SRB,
                         n_max: int = 30, method: str = "exact",
                         cylinder_extra_depth: int = 10) -> CorrelationTrace:
    """C(n) = integral of phi * (psi o f^n) dmu for n = 0..n_max.

    method "exact": coefficient push-through; needs polynomial observables of
    degree <= 8.  method "cylinder": quadrature over dynamical cylinders,
    exact for the Lebesgue-density pair (piecewise-polynomial integrands,
    Gauss-Legendre per cylinder); for the entropy pair the cylinder weights
    are exact and observables take midpoint values, with the extra depth
    controlling resolution below the correlation horizon.
    """
    mode = WeightMode.coerce(mode)
    if not isinstance(m, MarkovAffineMap):
        raise TypeError("correlation_sequence expects an affine Markov map")
    if n_max < 0 or n_max > 60:
        raise ValueError("n_max must be in [0, 60]")
    phi_e, psi_e = _as_expr(phi), _as_expr(psi)
    pair = invariant_density(m, mode)
    if method == "exact":
        return _correlation_exact(m, pair, phi_e, psi_e, n_max)
    if method == "cylinder":
        if mode is WeightMode.SRB:
            return _correlation_cylinder_srb(m, pair, phi_e, psi_e, n_max)
        return _correlation_cylinder_mme(m, pair, phi_e, psi_e, n_max,
                                         cylinder_extra_depth)
    raise ValueError(f"unknown method {method!r}")


def _poly_or_raise(e: Expr, who: str) -> list[float]:
    c = poly_coefficients(e)
    if c is None:
        raise ValueError(f"{who} is not polynomial; the exact route needs polynomials")
    if len(c) - 1 > _DEGREE_CAP:
        raise ValueError(f"{who} degree {len(c) - 1} exceeds the exact-route cap {_DEGREE_CAP}")
    return c


def _correlation_exact(m, pair, phi_e, psi_e, n_max) -> CorrelationTrace:
    n = m.n_branches
    phi_c = _poly_or_raise(phi_e, "phi")
    psi_c = _poly_or_raise(psi_e, "psi")
    r_phi, r_psi = len(phi_c) - 1, len(psi_c) - 1
    phi_vec = np.tile(np.asarray(phi_c, dtype=float)[:, None], (1, n)).ravel()
    psi_vec = np.tile(np.asarray(psi_c, dtype=float)[:, None], (1, n)).ravel()
    r_tot = r_phi + r_psi

    seed = _cellwise_scale(m, phi_vec, r_phi, pair.h_cell)  # coefficients of phi*h
    T = build_Tkr(m, pair.k, r_phi, pair.mode, check=False)
    mu_phi = pair.nu_poly(seed, r_phi)
    mu_psi = pair.mu_poly(psi_vec, r_psi)

    vals = np.empty(n_max + 1)
    cur = seed.copy()
    scale = 1.0
    for step in range(n_max + 1):
        paired = _cellwise_product(m, psi_vec, r_psi, cur, r_phi)
        vals[step] = scale * pair.nu_poly(paired, r_tot)
        cur = T @ cur
        scale /= pair.gamma
    return CorrelationTrace(np.arange(n_max + 1), vals, pair.mode.value, "exact",
                            pair.gamma, mu_phi, mu_psi)


def _correlation_cylinder_srb(m, pair, phi_e, psi_e, n_max) -> CorrelationTrace:
    levels = _cylinder_tower(m, n_max)
    p = np.asarray(m.partition, dtype=float)
    t, glw = np.polynomial.legendre.leggauss(_GL_ORDER)
    u = 0.5 * (t + 1.0)
    vals = np.empty(n_max + 1)
    for step, lv in enumerate(levels):
        width = lv.hi - lv.lo
        x = lv.lo[:, None] + width[:, None] * u[None, :]
        w = 0.5 * width[:, None] * glw[None, :]
        # f^step maps each cylinder affinely onto its final cell
        uu = np.where(lv.sign[:, None] > 0, u[None, :], 1.0 - u[None, :])
        y = p[lv.final][:, None] + (p[lv.final + 1] - p[lv.final])[:, None] * uu
        integrand = np.asarray(phi_e(x)) * np.asarray(psi_e(y)) \
            * pair.h_cell[lv.first][:, None]
        vals[step] = float(np.sum(w * integrand))
    base = levels[0]
    width = base.hi - base.lo
    x0 = base.lo[:, None] + width[:, None] * u[None, :]
    w0 = 0.5 * width[:, None] * glw[None, :]
    mu_phi = float(np.sum(w0 * np.asarray(phi_e(x0)) * pair.h_cell[:, None]))
    mu_psi = float(np.sum(w0 * np.asarray(psi_e(x0)) * pair.h_cell[:, None]))
    return CorrelationTrace(np.arange(n_max + 1), vals, pair.mode.value, "cylinder",
                            pair.gamma, mu_phi, mu_psi)


def _correlation_cylinder_mme(m, pair, phi_e, psi_e, n_max, extra) -> CorrelationTrace:
    depth = n_max + max(extra, 1)
    levels = _cylinder_tower(m, depth)
    mids = [0.5 * (lv.lo + lv.hi) for lv in levels]
    deep = levels[depth]
    # cylinder mass is exact: h(first cell) nu(final cell) gamma^-depth
    weights = pair.h_cell[deep.first] * pair.nu_cell[deep.final] \
        * pair.gamma ** (-float(depth))
    phi_v = np.asarray(phi_e(mids[depth]))
    psi_mid = np.asarray(psi_e(mids[depth]))
    vals = np.empty(n_max + 1)
    anc = np.arange(len(deep.lo))
    for step in range(n_max + 1):
        lvl = depth - step
        vals[step] = float(np.sum(weights * phi_v * np.asarray(psi_e(mids[lvl][anc]))))
        anc = levels[lvl].parent[anc]
    mu_phi = float(np.sum(weights * phi_v))
    mu_psi = float(np.sum(weights * psi_mid))
    return CorrelationTrace(np.arange(n_max + 1), vals, pair.mode.value, "cylinder",
                            pair.gamma, mu_phi, mu_psi)


# ---------------------------------------------------------------------------
# decay fitting


@dataclass
class DecayFit:
    rho: float
    power: int
    log_amplitude: float
    residual_rms: float
    n_used: int

    def to_json_dict(self) -> dict:
        return {
            "rho": self.rho,
            "k": self.power,
            "log_amplitude": self.log_amplitude,
            "residual": self.residual_rms,
            "n_used": self.n_used,
        }


def fit_decay(values, noise_floor: float | None = None,
              powers: tuple[int, ...] = (0, 1, 2)) -> DecayFit:
    """Fit |C(n)| ~ c rho^n n^k by least squares on the log, k in powers.

    Values start at n = 0; that point only sets the default noise floor.
    Points at or below the floor are dropped and at least 8 usable points
    are required.  Deep dips (complex-pair cancellation passing near zero)
    are masked iteratively: points more than 1.5 log-units below the fit
    are removed and the fit repeated while at least 8 points survive.
    """
    values = np.asarray(values)
    mags = np.abs(values)
    if noise_floor is None:
        noise_floor = 1e3 * np.finfo(float).eps * (float(mags[0]) if len(mags) else 0.0)
    ns = np.arange(len(values))
    usable = (ns >= 1) & (mags > max(noise_floor, 0.0))
    if int(usable.sum()) < 8:
        raise NumericError(
            f"fit_decay needs at least 8 usable points, got {int(usable.sum())}")

    def ls(mask):
        n_sel = ns[mask].astype(float)
        y = np.log(mags[mask])
        best = None
        for k in powers:
            rhs = y - k * np.log(n_sel)
            X = np.vstack([np.ones_like(n_sel), n_sel]).T
            coef, *_ = np.linalg.lstsq(X, rhs, rcond=None)
            resid = rhs - X @ coef
            sse = float(np.dot(resid, resid))
            if best is None or sse < best[0]:
                best = (sse, k, coef, resid)
        return best

    mask = usable.copy()
    for _ in range(4):
        sse, k, coef, resid = ls(mask)
        dips = np.zeros_like(mask)
        dips[mask] = resid < -1.5
        if not dips.any() or int((mask & ~dips).sum()) < 8:
            break
        mask = mask & ~dips
    sse, k, coef, resid = ls(mask)
    n_used = int(mask.sum())
    return DecayFit(float(np.exp(coef[1])), int(k), float(coef[0]),
                    float(np.sqrt(sse / n_used)), n_used)


# ---------------------------------------------------------------------------
# hyperbolic torus automorphisms


@dataclass(frozen=True)
class TorusAutomorphism:
    matrix: tuple[tuple[int, int], tuple[int, int]]

    def __post_init__(self):
        (a, b), (c, d) = self.matrix
        det = a * d - b * c
        tr = a + d
        if abs(det) != 1:
            raise ValueError(f"matrix must have determinant +-1, got {det}")
        if abs(tr) <= 2:
            raise ValueError(f"matrix is not hyperbolic: |trace| = {abs(tr)} <= 2")

    @classmethod
    def from_rows(cls, rows) -> "TorusAutomorphism":
        (a, b), (c, d) = rows
        return cls(((int(a), int(b)), (int(c), int(d))))

    @property
    def transpose_rows(self):
        (a, b), (c, d) = self.matrix
        return ((a, c), (b, d))


def _mat_apply(rows, k):
    (a, b), (c, d) = rows
    return (a * k[0] + b * k[1], c * k[0] + d * k[1])


def _clean_coeffs(coeffs: dict) -> dict:
    out = {}
    for key, v in coeffs.items():
        k = (int(key[0]), int(key[1]))
        if k == (0, 0):
            continue  # zero mode never contributes to centered correlations
        out[k] = complex(v)
    return out


def torus_correlation(T: TorusAutomorphism, phi_coeffs: dict, psi_coeffs: dict,
                      n_max: int = 30) -> np.ndarray:
    """Exact correlations of finitely supported Fourier observables.

    C(n) = sum over modes k of phi_hat(k) psi_hat(-(T^t)^n k), zero mode
    dropped.  Integer arithmetic keeps every term exact at any n.
    """
    phi = _clean_coeffs(phi_coeffs)
    psi = _clean_coeffs(psi_coeffs)
    rows = T.transpose_rows
    out = np.zeros(n_max + 1, dtype=complex)
    current = {k: k for k in phi}  # mode -> its image under (T^t)^n
    for n in range(n_max + 1):
        total = 0j
        for k, img in current.items():
            hit = psi.get((-img[0], -img[1]))
            if hit is not None:
                total += phi[k] * hit
        out[n] = total
        current = {k: _mat_apply(rows, img) for k, img in current.items()}
    return out


def torus_decoupling_time(T: TorusAutomorphism, phi_support, psi_support,
                          n_cap: int = 100_000) -> int:
    """Smallest n0 such that the mode supports miss for every n >= n0.

    By Cayley-Hamilton, k_{n+1} = tr(T) k_n -+ k_{n-1} componentwise; once
    both components of an orbit are outside the target box and componentwise
    nondecreasing they at least double forever, so enumeration terminates.
    """
    rows = T.transpose_rows
    (a, b), (c, d) = rows
    tr = abs(a + d)
    psi_set = {(int(u), int(v)) for u, v in psi_support if (int(u), int(v)) != (0, 0)}
    if not psi_set:
        return 0
    box = max(max(abs(u), abs(v)) for u, v in psi_set)
    last_hit = -1
    for k0 in phi_support:
        k0 = (int(k0[0]), int(k0[1]))
        if k0 == (0, 0):
            continue
        prev, cur = None, k0
        n = 0
        while n <= n_cap:
            if (-cur[0], -cur[1]) in psi_set:
                last_hit = max(last_hit, n)
            escaped = (max(abs(cur[0]), abs(cur[1])) > box
                       and prev is not None
                       and abs(cur[0]) >= abs(prev[0])
                       and abs(cur[1]) >= abs(prev[1])
                       and tr >= 3)
            if escaped:
                break
            prev, cur = cur, _mat_apply(rows, cur)
            n += 1
        else:
            raise NumericError("orbit enumeration did not escape the mode box")
    return last_hit + 1
