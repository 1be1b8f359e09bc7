from fractions import Fraction

import numpy as np
import pytest

from reslab.spectra import (
    frac_charpoly,
    frac_rank,
    multiset_distance,
    rational_spectrum,
    spectrum_with_multiplicity,
)


def _conjugated_jordan(rng):
    # 2 (simple), 0.5 (jordan block of size 2), -0.25 (simple)
    J = np.array([
        [2.0, 0, 0, 0],
        [0, 0.5, 1.0, 0],
        [0, 0, 0.5, 0],
        [0, 0, 0, -0.25],
    ])
    Q, _ = np.linalg.qr(rng.standard_normal((4, 4)))
    return Q @ J @ Q.T


def test_float_jordan_detection():
    M = _conjugated_jordan(np.random.default_rng(11))
    rep = spectrum_with_multiplicity(M, essential_bound=0.0, cluster_tol=1e-6)
    by_val = {round(g.value.real, 3): g for g in rep.eigenvalues}
    assert by_val[2.0].alg == 1 and by_val[2.0].jordan == [1]
    assert by_val[0.5].alg == 2
    assert by_val[0.5].geo == 1
    assert by_val[0.5].jordan == [2]
    assert by_val[-0.25].alg == 1
    assert rep.total_alg == 4


def test_semisimple_repeated_eigenvalue():
    rng = np.random.default_rng(5)
    D = np.diag([1.0, 0.5, 0.5, 0.1])
    Q, _ = np.linalg.qr(rng.standard_normal((4, 4)))
    rep = spectrum_with_multiplicity(Q @ D @ Q.T, cluster_tol=1e-6)
    g = next(g for g in rep.eigenvalues if abs(g.value - 0.5) < 1e-8)
    assert g.alg == 2 and g.geo == 2 and g.jordan == [1, 1]


def test_cluster_tolerance_is_relative():
    M = np.diag([1.0, 1.0 + 1e-12, 0.3])
    rep = spectrum_with_multiplicity(M)
    assert len(rep.eigenvalues) == 2
    M = np.diag([1.0, 1.001, 0.3])
    rep = spectrum_with_multiplicity(M)
    assert len(rep.eigenvalues) == 3


def test_essential_bound_flags_untrusted():
    rep = spectrum_with_multiplicity(np.diag([1.0, 0.2, 0.05]), essential_bound=0.2)
    flags = {round(g.value.real, 3): g.trusted for g in rep.eigenvalues}
    assert flags[1.0] is True
    assert flags[0.2] is False  # at the bound counts as untrusted
    assert flags[0.05] is False


def test_report_ordering_conjugates_adjacent():
    M = np.array([
        [0.0, 1.0, 0, 0],
        [-1.0, 0.0, 0, 0],
        [0, 0, 2.0, 0],
        [0, 0, 0, -0.5],
    ])
    rep = spectrum_with_multiplicity(M)
    vals = [g.value for g in rep.eigenvalues]
    assert abs(vals[0] - 2.0) < 1e-12
    assert abs(vals[1] - (-1j)) < 1e-12  # negative imaginary first within a pair
    assert abs(vals[2] - 1j) < 1e-12
    assert abs(vals[3] - (-0.5)) < 1e-12


def test_frac_rank():
    M = [[Fraction(1), Fraction(2)], [Fraction(2), Fraction(4)]]
    assert frac_rank(M) == 1
    M = [[Fraction(1, 3), Fraction(0)], [Fraction(0), Fraction(1, 7)]]
    assert frac_rank(M) == 2
    assert frac_rank([[Fraction(0)] * 2] * 2) == 0


def test_frac_charpoly_known_matrix():
    # [[2, 1], [0, 3]] has char poly x^2 - 5x + 6
    M = [[Fraction(2), Fraction(1)], [Fraction(0), Fraction(3)]]
    assert frac_charpoly(M) == [Fraction(1), Fraction(-5), Fraction(6)]


def test_rational_spectrum_exact_jordan():
    # companion-style matrix with char poly (x - 1)(x + 1/3)^2 x
    # realized as bidiagonal blocks, then checked through the exact analyzer
    M = [
        [Fraction(1), 0, 0, 0],
        [0, Fraction(-1, 3), Fraction(1), 0],
        [0, 0, Fraction(-1, 3), 0],
        [0, 0, 0, Fraction(0)],
    ]
    M = [[Fraction(v) for v in row] for row in M]
    rep = rational_spectrum(M)
    g = next(g for g in rep.eigenvalues if abs(g.value + 1 / 3) < 1e-9)
    assert g.alg == 2 and g.geo == 1 and g.jordan == [2] and g.exact


def test_multiset_distance():
    a = [1.0, 0.5 + 0.1j, 0.5 - 0.1j]
    b = [0.5 - 0.1j, 1.0 + 1e-9, 0.5 + 0.1j]
    assert multiset_distance(a, b) == pytest.approx(1e-9, rel=1e-3)
    with pytest.raises(ValueError):
        multiset_distance([1.0], [1.0, 2.0])
