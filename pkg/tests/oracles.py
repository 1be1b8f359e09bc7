"""Independent reference computations used to freeze expected values in tests.

Everything here is deliberately written against the raw map definitions
(pointwise sums over preimages, finite differences, path counting), never
against the package's operator assembly, so the two sides of each check stay
independent.
"""

from __future__ import annotations

import numpy as np

from reslab.expressions import evaluate


def fd_derivative(fn, x, h: float = 1e-6):
    """Central finite difference derivative of a scalar callable."""
    x = np.asarray(x, dtype=float)
    return (fn(x + h) - fn(x - h)) / (2.0 * h)


def transfer_pointwise(m, k: int, h, x):
    """(L_k h)(x) = sum over preimages y of x of h(y)/f'(y)^k, per branch inverses.

    Works for any map model; branches whose image does not contain x are
    skipped (Markov case).
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.zeros_like(x, dtype=complex)
    for j in range(m.n_branches):
        lo, hi = m.branch_image(j)
        sel = (x >= lo - 1e-12) & (x <= hi + 1e-12)
        if not np.any(sel):
            continue
        y = m.branch_inverse(j, np.clip(x[sel], lo, hi))
        d = np.asarray(m.branch_deriv(j, y), dtype=float)
        out[sel] += np.asarray(h(y), dtype=complex) / d**k
    if np.max(np.abs(out.imag)) == 0.0:
        out = out.real
    return out


def path_count_entropy(adjacency: np.ndarray, n_max: int = 12) -> float:
    """Estimate ln(spectral radius) from the growth of admissible path counts."""
    A = np.asarray(adjacency, dtype=float)
    counts = []
    P = np.eye(A.shape[0])
    for _ in range(n_max):
        P = P @ A
        counts.append(P.sum())
    # ratio of consecutive path counts converges to the spectral radius
    return float(np.log(counts[-1] / counts[-2]))


def quadrature_integral(fn, a: float, b: float, panels: int = 64, order: int = 8) -> float:
    """Composite Gauss-Legendre integral of a callable (reference quadrature)."""
    nodes, weights = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(a, b, panels + 1)
    total = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
        total += half * np.sum(weights * fn(mid + half * nodes))
    return float(total)


def expr_fn(e):
    return lambda x: evaluate(e, x)
