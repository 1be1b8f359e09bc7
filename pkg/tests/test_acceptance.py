"""End-to-end acceptance suite.

One test per shipped guarantee. Each test enforces its runtime budget and
prints a single PASS/FAIL line (visible with -s or on failure), so a verbose
run reads as a checklist. Expected values come from closed forms, exact
rational arithmetic, or independent dense linear algebra, never from the
code path under test.
"""

import time
from contextlib import contextmanager
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest

import reslab
from conftest import make_map
from reslab.affine import WeightMode, build_Bk, build_Tkr, pw_poly_eval, resonance_set
from reslab.correlations import (
    TorusAutomorphism,
    correlation_sequence,
    fit_decay,
    invariant_density,
    torus_correlation,
    torus_decoupling_time,
)
from reslab.discretize import cheb_operator
from reslab.mme import cylinder_mass, mixing_rate_check, mme_iterate
from reslab.smooth import TransferContext, exclusion_regions, gap_params, resonance_scan, xi_function
from reslab.spectra import multiset_distance
from reslab.utils import fmt_float
from test_correlations import _random_markov_maps
from test_smooth import CONTROL_SPEC

F = Fraction


@contextmanager
def _budget(label: str, seconds: float):
    t0 = time.monotonic()
    try:
        yield
    except BaseException:
        print(f"FAIL {label}")
        raise
    elapsed = time.monotonic() - t0
    assert elapsed < seconds, f"{label}: {elapsed:.1f}s over the {seconds:.0f}s budget"
    print(f"PASS {label} ({elapsed:.2f}s)")


@pytest.fixture(scope="module")
def random_suite():
    return _random_markov_maps(20)


# ---------------------------------------------------------------------------
# 1. Jordan-block Markov map


def test_jordan_block_map_exact_structure(jordan_map):
    with _budget("jordan-block map: eigenvalues {1, -1/3, 0} and exact vector relations", 1.0):
        rep = resonance_set(jordan_map, "srb", 0)
        groups = {round(float(g.value.real), 9): g for g in rep.eigenvalues}
        assert set(groups) == {1.0, round(-1.0 / 3.0, 9), 0.0}
        assert all(abs(g.value.imag) < 1e-15 for g in rep.eigenvalues)
        neg = groups[round(-1.0 / 3.0, 9)]
        assert neg.alg == 2 and neg.geo == 1 and neg.jordan == [2]
        assert groups[1.0].alg == 1 and groups[0.0].alg == 1

        B1 = build_Bk(jordan_map, 1, "srb", exact=True)

        def matvec(M, v):
            return [sum(row[j] * v[j] for j in range(len(v))) for row in M]

        a1 = [F(-1), F(0), F(0), F(1)]
        a2 = [F(3), F(3), F(-6), F(0)]
        a3 = [F(0), F(-1), F(0), F(1)]
        a4 = [F(9), F(12), F(8), F(3)]
        relations = [
            ("B a1 = -a1/3", matvec(B1, a1), [-F(1, 3) * v for v in a1]),
            ("(B + I/3) a2 = a1",
             [x + F(1, 3) * y for x, y in zip(matvec(B1, a2), a2)], a1),
            ("B a3 = 0", matvec(B1, a3), [F(0)] * 4),
            ("B a4 = a4", matvec(B1, a4), a4),
        ]
        Bf = np.array([[float(v) for v in row] for row in B1])
        floats = {
            "B a1 = -a1/3": Bf @ np.array(a1, float) + np.array(a1, float) / 3.0,
            "(B + I/3) a2 = a1": (Bf + np.eye(4) / 3.0) @ np.array(a2, float) - np.array(a1, float),
            "B a3 = 0": Bf @ np.array(a3, float),
            "B a4 = a4": Bf @ np.array(a4, float) - np.array(a4, float),
        }
        for name, got, want in relations:
            resid = float(np.max(np.abs(floats[name])))
            exact = got == want
            print(f"  {name}: float residual {resid:.1e}, rational {'exact' if exact else 'MISMATCH'}")
            assert exact
            assert resid < 1e-12


# ---------------------------------------------------------------------------
# 2. doubling map resonance sets


def test_doubling_map_resonance_sets(doubling_map):
    with _budget("doubling map: srb r=4 resonances {2^-l} plus zeros, mme r=2 leads with 2", 1.0):
        rep = resonance_set(doubling_map, "srb", 4)
        got = np.concatenate([[g.value] * g.alg for g in rep.eigenvalues])
        closed_form = np.concatenate([2.0 * 0.5 ** (1 + np.arange(5)), np.zeros(5)])
        assert multiset_distance(got, closed_form) < 1e-10
        T = build_Tkr(doubling_map, 1, 4, "srb")
        assert multiset_distance(got, np.linalg.eigvals(T)) < 1e-10

        mme = resonance_set(doubling_map, "mme", 2)
        mme.sort()
        assert abs(mme.eigenvalues[0].value - doubling_map.n_branches) < 1e-10
        assert doubling_map.n_branches == 2


# ---------------------------------------------------------------------------
# 3. block-triangular spectrum identity on the random suite


def test_block_spectrum_multiset_identity(random_suite):
    with _budget("block operator spectrum = union of weighted-matrix spectra (20 random maps)", 30.0):
        for m in random_suite:
            for mode, r in (("srb", 3), ("mme", 2)):
                k = WeightMode.coerce(mode).base_k
                merged = np.concatenate(
                    [np.linalg.eigvals(build_Bk(m, k + l, mode)) for l in range(r + 1)]
                )
                T = build_Tkr(m, k, r, mode, check=False)
                assert multiset_distance(merged, np.linalg.eigvals(T)) < 1e-8


# ---------------------------------------------------------------------------
# 4. fitted correlation decay = largest subleading resonance modulus


_XG, _WG = np.polynomial.legendre.leggauss(24)
_R = 3       # polynomial degree carried by the block operator
_DEG = 8     # degree budget for the designed second observable


def _cell_quad(m, coeffs, mono):
    """Integral of a piecewise polynomial times x^mono, cell by cell."""
    total = 0.0
    for j in range(m.n_branches):
        a, b = m.partition[j], m.partition[j + 1]
        x = 0.5 * (a + b) + 0.5 * (b - a) * _XG
        total += float(np.dot(0.5 * (b - a) * _WG, pw_poly_eval(m, coeffs, x) * x**mono))
    return total


def _cell_poly_coeffs(m, fn, r):
    """Per-cell monomial coefficients of fn, sampled at Chebyshev points."""
    n = m.n_branches
    out = np.zeros(n * (r + 1))
    for j in range(n):
        a, b = m.partition[j], m.partition[j + 1]
        t = np.cos(np.pi * (np.arange(r + 1) + 0.5) / (r + 1))
        x = 0.5 * (a + b) + 0.5 * (b - a) * t
        c = np.linalg.solve(np.vander(x, r + 1, increasing=True), fn(x))
        for l in range(r + 1):
            out[l * n + j] = c[l]
    return out


def _poly_expr(coeffs):
    return " + ".join(f"{fmt_float(c)}*x^{a}" if a else fmt_float(c)
                      for a, c in enumerate(coeffs))


def _oracle_sequence(m, T, pair, phi_c, psi_c, n_max):
    """Correlations by direct operator powers, with a cancellation-aware floor.

    A large designed psi pairs large numbers against the unit mode, so the
    usable signal bottoms out at eps times that pairing magnitude, not at
    eps times the correlation itself.
    """
    rq = len(psi_c) - 1
    fphi = lambda x: np.polynomial.polynomial.polyval(x, phi_c)
    fpsi = lambda x: np.polynomial.polynomial.polyval(x, psi_c)
    v = _cell_poly_coeffs(m, lambda x: fphi(x) * pair.density(x), _R)
    mu_phi = _cell_quad(m, v, 0)
    mu_psi = _cell_quad(m, _cell_poly_coeffs(m, lambda x: fpsi(x) * pair.density(x), max(rq, 1)), 0)
    cs = np.empty(n_max + 1)
    vec = v.copy()
    for n in range(n_max + 1):
        cs[n] = sum(psi_c[a] * _cell_quad(m, vec, a) for a in range(rq + 1)) - mu_phi * mu_psi
        vec = T @ vec
    floor = 1e4 * np.finfo(float).eps * (abs(mu_phi * mu_psi) + np.max(np.abs(cs[:3])))
    return cs, floor


def _usable(cs, floor):
    return np.where((np.arange(len(cs)) >= 1) & (np.abs(cs) > floor))[0]


def _plateau_clean(cs, floor, rho2):
    """True when |c_n|/rho2^n is flat over the tail, i.e. one mode dominates."""
    use = _usable(cs, floor)
    if len(use) < 8:
        return False
    late = use[len(use) // 2:]
    ratio = np.abs(cs[late]) / rho2**late
    return bool(np.max(ratio) <= 2.0 * np.min(ratio) and np.min(ratio) > 0)


def _mode_present(cs, floor, rho2, order=4):
    """A near-exact linear recurrence must carry rho2 among its roots."""
    use = _usable(cs, floor)
    w = use[use >= order + 1]
    if len(w) < order + 4:
        return False
    rows = np.vstack([cs[w - j] for j in range(1, order + 1)]).T
    scale = np.max(np.abs(rows), axis=1)
    coef, *_ = np.linalg.lstsq(rows / scale[:, None], cs[w] / scale, rcond=None)
    if np.max(np.abs(cs[w] / scale - (rows / scale[:, None]) @ coef)) > 1e-3:
        return False
    roots = np.abs(np.roots(np.concatenate(([1.0], -coef))))
    return bool(np.min(np.abs(roots - rho2)) <= 0.015 * rho2)


def _design_real_pair(m, pair, xi, V, mods, nonunit, rho2, tgt):
    """Monomial phi that excites the target mode, psi built to mute its rivals.

    Rival modes at modulus >= rho2/2 would contaminate the fit window, so psi
    solves a least-norm system zeroing their pairings while holding the
    target's at one. Returns None when no monomial couples or the design is
    numerically untrustworthy.
    """
    for p in (1, 2, 3):
        v0 = _cell_poly_coeffs(m, lambda x: x**p * pair.density(x), _R)
        beta = np.linalg.solve(V, v0)
        if abs(beta[tgt]) <= 1e-8 * np.linalg.norm(v0):
            continue
        rows, rhs, done = [], [], set()
        for i in np.where(nonunit & (mods >= 0.5 * rho2))[0]:
            if i in done:
                continue
            qr = np.array([_cell_quad(m, V[:, i].real, a) for a in range(_DEG + 1)])
            qi = np.array([_cell_quad(m, V[:, i].imag, a) for a in range(_DEG + 1)])
            q = beta[i] * (qr + 1j * qi)
            if i != tgt and np.max(np.abs(q)) < 1e-10:
                done.add(int(i))
                continue
            rows.append(q.real)
            rhs.append(1.0 if i == tgt else 0.0)
            if abs(xi[i].imag) > 1e-10:
                rows.append(q.imag)
                rhs.append(0.0)
                done.add(int(np.argmin(np.abs(xi - np.conj(xi[i])))))
            done.add(int(i))
        A_mat, b_vec = np.asarray(rows), np.asarray(rhs)
        psi_c, *_ = np.linalg.lstsq(A_mat, b_vec, rcond=None)
        if np.max(np.abs(psi_c)) >= 1e5 or np.max(np.abs(A_mat @ psi_c - b_vec)) >= 1e-6:
            return None
        phi_c = np.zeros(p + 1)
        phi_c[p] = 1.0
        return phi_c, psi_c
    return None


def test_correlation_decay_rate_matches_resonance(random_suite):
    with _budget("fitted decay ratio within 5% of the subleading resonance (20 random maps)", 60.0):
        for mi, m in enumerate(random_suite):
            T = build_Tkr(m, 1, _R, WeightMode.SRB, check=False)
            xi, V = np.linalg.eig(T)
            mods = np.abs(xi)
            nonunit = mods < 1.0 - 1e-8
            rho2 = float(np.max(mods[nonunit]))
            tgt = int(np.argmax(np.where(nonunit, mods, -1.0)))
            group = np.where(nonunit & (np.abs(mods - rho2) < 1e-8))[0]
            real_target = bool(np.all(np.abs(xi[group].imag) < 1e-8))
            pair = invariant_density(m, "srb")
            n_max = min(46, max(20, int(np.log(1e-10) / np.log(rho2))))

            chosen = None
            if real_target:
                designed = _design_real_pair(m, pair, xi, V, mods, nonunit, rho2, tgt)
                if designed is not None:
                    phi_c, psi_c = designed
                    cs, floor = _oracle_sequence(m, T, pair, phi_c, psi_c, n_max)
                    if _plateau_clean(cs, floor, rho2):
                        chosen = (phi_c, psi_c, floor)
            else:
                # complex pair: fit_decay handles the oscillation, so plain
                # monomials suffice once the mode is confirmed present
                for pp, pq in ((1, 1), (2, 2), (3, 3), (1, 2), (2, 3)):
                    a = np.zeros(pp + 1)
                    a[pp] = 1.0
                    b = np.zeros(pq + 1)
                    b[pq] = 1.0
                    cs, floor = _oracle_sequence(m, T, pair, a, b, n_max)
                    if _mode_present(cs, floor, rho2):
                        chosen = (a, b, floor)
                        break
            assert chosen is not None, f"map {mi}: no observable pair excites the target mode"
            phi_c, psi_c, floor = chosen

            tr = correlation_sequence(m, _poly_expr(phi_c), _poly_expr(psi_c), "srb",
                                      n_max=n_max, method="exact")
            fit = fit_decay(tr.centered(), noise_floor=max(tr.noise_floor, floor))
            rel = abs(fit.rho - rho2) / rho2
            assert rel <= 0.05, f"map {mi}: fitted {fit.rho:.6f} vs resonance {rho2:.6f} ({rel:.1%})"


# ---------------------------------------------------------------------------
# 5. quadratic full-branch map


def _imag_axis_flip(rs, name, a=0.0, lo=0.3, hi=1.0):
    # membership along the imaginary axis flips once for these regions
    assert not rs.membership(complex(a, lo))[name] and rs.membership(complex(a, hi))[name]
    for _ in range(50):
        mid = 0.5 * (lo + hi)
        if rs.membership(complex(a, mid))[name]:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def test_quadratic_map_regions_and_discretized_spectra(quad_map):
    with _budget("quadratic map: gap params, region intercepts, spectra at degree 1024", 120.0):
        gp = gap_params(quad_map)
        assert abs(gp.mu_star - 0.5) < 1e-12
        assert abs(gp.delta - 0.25) < 1e-12
        assert abs(gp.tau - 0.75) < 1e-9
        assert abs(gp.essential_bound - 0.25) < 1e-12
        assert gp.exclusion_class

        rs = exclusion_regions(gp)
        b3 = _imag_axis_flip(rs, "A3")
        b4 = _imag_axis_flip(rs, "A4", a=-1e-12)
        print(f"  imaginary-axis intercepts: A3 {b3:.4f}, A4 {b4:.4f}")
        assert abs(b3 - 0.5659) <= 1e-3
        assert abs(b4 - 0.6124) <= 1e-3

        w = np.linalg.eigvals(cheb_operator(quad_map, 1, 1024).matrix)
        near_one = np.abs(w - 1.0) < 1e-8
        assert near_one.sum() == 1
        rest = w[~near_one]
        assert np.max(np.abs(rest)) <= 0.75 + 1e-6
        for z in rest:
            assert not rs.any_region(complex(z)), f"eigenvalue {z} inside an exclusion region"

        w0 = np.linalg.eigvals(cheb_operator(quad_map, 0, 1024).matrix)
        assert abs(w0[np.argmax(np.abs(w0))] - quad_map.n_branches) < 1e-9
        assert quad_map.n_branches == 3


# ---------------------------------------------------------------------------
# 6. normalized-operator function and averaging identity


def test_normalized_operator_function_bounds(doubling_map, jordan_map, quad_map):
    with _budget("xi(z) bounds, plus-operator average identity and leading pair", 60.0):
        for m in (doubling_map, jordan_map):
            val, tail = xi_function(m, 0.8)
            assert val == 1.0 and tail == 0.0

        ctx = TransferContext(quad_map)
        gp = gap_params(quad_map)
        for z in np.linspace(0.5501, 1.999, 40):
            val, tail = xi_function(quad_map, z, ctx=ctx, params=gp)
            assert abs(val.imag) < 1e-12
            assert val.real > 1.0

        rng = np.random.default_rng(23)
        for _ in range(200):
            r = rng.uniform(gp.mu_star + 0.05, 2.0)
            z = r * np.exp(1j * rng.uniform(0.0, 2.0 * np.pi))
            val, tail = xi_function(quad_map, z, ctx=ctx, params=gp)
            assert abs(val - 1.0) <= gp.delta / (abs(z) - gp.mu_star) + tail + 1e-12

        x = ctx.grid.nodes
        for _ in range(5):
            c = rng.normal(size=4)
            g = c[0] + c[1] * x + c[2] * x**2 + c[3] * np.cos(3.0 * x)
            out = ctx.apply("plus", g)
            assert abs(ctx.grid.integral(out) - gp.mu_star * ctx.grid.integral(g)) < 1e-9

        w, V = np.linalg.eig(cheb_operator(quad_map, "plus", 96).matrix)
        i = int(np.argmax(np.abs(w)))
        assert abs(w[i] - gp.mu_star) < 1e-6
        h_plus = V[:, i].real
        h_plus = h_plus * np.sign(h_plus[int(np.argmax(np.abs(h_plus)))])
        assert np.min(h_plus) > 0.0


# ---------------------------------------------------------------------------
# 7. annulus scan against an embedded affine resonance


def test_annulus_scan_flags_known_resonance():
    with _budget("annulus scan flags the embedded resonance and nothing spurious", 120.0):
        control = make_map(CONTROL_SPEC)
        w = np.linalg.eigvals(build_Bk(control, 1))
        inside = [z.real for z in w
                  if abs(z.imag) < 1e-12 and 0.5 < z.real < 1.0 and abs(z - 1.0) > 1e-9]
        assert len(inside) == 1
        nu0 = inside[0]

        grid = np.arange(0.52, 0.96, 0.01)
        res = resonance_scan(control, grid, size=8, tol_scan=0.01)
        flagged = res.flagged()
        assert len(flagged) == 1
        assert abs(flagged[0].nu.real - nu0) < 0.01  # within grid resolution
        assert all(p.drift < 1e-3 for p in res.points)
        print(f"  flagged nu={flagged[0].nu.real:.4f} against oracle {nu0:.10f}")


# ---------------------------------------------------------------------------
# 8. maximal-entropy mixing for the intermittent-type map


def test_intermittent_mme_mixing_properties(lsv_map):
    with _budget("intermittent-type map: mme convergence, invariance, cylinder bound, rate", 120.0):
        ap = mme_iterate(lsv_map, ["1", "x", "x^2"])
        assert ap.converged
        assert abs(ap.values[0] - 1.0) < 1e-7

        fwd = lsv_map.apply
        for phi in (lambda x: x, lambda x: x**2, lambda x: np.cos(x)):
            ref = ap.pairing(phi)
            comp = ap.pairing(lambda x: phi(fwd(x)), knots=[0.5])
            assert abs(comp - ref) < 1e-7

        rng = np.random.default_rng(9)
        for depth in (3, 5, 8, 11):
            for idx in rng.integers(0, 2**depth, size=3):
                assert cylinder_mass(ap, int(idx), depth) <= 3.0 * 2.0**-depth + 1e-9

        const, rate = mixing_rate_check(lsv_map, "x - 1/2", "x^2")
        assert 0.0 < rate <= 0.55
        print(f"  fitted mme mixing rate {rate:.4f} (bound 0.55)")


# ---------------------------------------------------------------------------
# 9. torus correlations vanish after finitely many steps


def test_torus_correlations_finite_support():
    with _budget("hyperbolic torus map: correlations exactly zero past the decoupling time", 1.0):
        cat = TorusAutomorphism.from_rows([[2, 1], [1, 1]])
        cosine = {(1, 0): 0.5, (-1, 0): 0.5}
        n0 = torus_decoupling_time(cat, cosine, cosine)
        assert n0 == 1
        c = torus_correlation(cat, cosine, cosine, n_max=16)
        assert abs(c[0] - 0.5) < 1e-15
        assert np.all(c[1:] == 0)

        phi = {(1, 0): 0.5, (-1, 0): 0.5, (2, -1): 1.0, (-2, 1): 1.0}
        psi = {(1, 1): 0.25, (-1, -1): 0.25, (0, 2): -0.5, (0, -2): -0.5}
        n0 = torus_decoupling_time(cat, phi, psi)
        c = torus_correlation(cat, phi, psi, n_max=n0 + 10)
        assert np.all(c[n0:] == 0)


# ---------------------------------------------------------------------------
# 10. the primary package stands alone


def test_primary_package_self_contained():
    with _budget("primary package imports fully with no secondary component", 10.0):
        import importlib
        import pkgutil

        names = [m.name for m in pkgutil.iter_modules(reslab.__path__)]
        assert names
        for name in names:
            importlib.import_module(f"reslab.{name}")
        for py in Path(reslab.__file__).parent.glob("*.py"):
            assert "frontend" not in py.read_text(), f"{py.name} references the secondary component"
        print(f"  {len(names)} modules import cleanly")
