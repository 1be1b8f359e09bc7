"""Interval map models on [0,1]: affine Markov, smooth full-branch, monotone full-branch.

Branches are indexed 0..N-1 over the partition cells I_j = [p_j, p_{j+1})
(half open; the right endpoint 1 belongs to the last branch).  Every model
knows its branch inverses, which is what the transfer-operator modules
consume.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .expressions import (
    Const,
    Expr,
    ExprSyntaxError,
    Neg,
    BinOp,
    differentiate,
    evaluate,
    parse_expr,
)
from .utils import map_hash

__all__ = [
    "CheckResult",
    "ValidationReport",
    "MapSpecError",
    "MapValidationError",
    "MarkovAffineMap",
    "SmoothFullBranchMap",
    "MonotoneFullBranchMap",
    "parse_map_spec",
    "validate_map",
    "branch_inverse",
    "iterate_map",
]

_KNOT_TOL = 1e-10  # abs tolerance for image endpoints hitting partition knots
_IMG_TOL = 1e-12  # tolerance for images staying inside [0,1]
_INV_TOL = 1e-13  # residual tolerance for branch inverses
_GRID = 1024  # per-branch sample count for validation grids


class MapSpecError(ValueError):
    """Malformed map-spec document (schema or syntax)."""

    def __init__(self, message: str, position: int | None = None):
        if position is not None:
            message = f"{message} (position {position})"
        super().__init__(message)
        self.position = position


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    worst_point: float | None = None
    measured: float | None = None
    detail: str = ""


@dataclass
class ValidationReport:
    """Outcome of every structural check run against a map.

    ``checks`` must all pass for the map to be constructible; ``notes`` are
    informational classifications (e.g. convexity-class flags) that never
    block construction.
    """

    map_type: str
    checks: list[CheckResult] = field(default_factory=list)
    notes: list[CheckResult] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def failures(self) -> list[CheckResult]:
        return [c for c in self.checks if not c.passed]

    def note(self, name: str) -> bool | None:
        for c in self.notes:
            if c.name == name:
                return c.passed
        return None

    def to_json_dict(self) -> dict:
        def enc(c: CheckResult) -> dict:
            return {
                "name": c.name,
                "passed": c.passed,
                "worst_point": c.worst_point,
                "measured": c.measured,
                "detail": c.detail,
            }

        return {
            "map_type": self.map_type,
            "ok": self.ok,
            "checks": [enc(c) for c in self.checks],
            "notes": [enc(c) for c in self.notes],
        }


class MapValidationError(ValueError):
    """Raised when a structural validation check fails; carries the report."""

    def __init__(self, report: ValidationReport):
        bad = ", ".join(
            f"{c.name} (measured {c.measured!r} at {c.worst_point!r})" for c in report.failures
        )
        super().__init__(f"map validation failed: {bad}")
        self.report = report


# ---------------------------------------------------------------------------
# map models


@dataclass(frozen=True, eq=False)
class MarkovAffineMap:
    """Piecewise affine expanding map whose branch images align with the partition.

    f(x) = slopes[j] * x + offsets[j] on I_j.  q[j] = f(p_j^+) is the image of
    the left endpoint; adjacency[i, j] = 1 iff I_j is contained in f(I_i).
    Exact rational copies of all branch data are kept for the rational
    arithmetic paths (binary floats are exact rationals, so nothing is lost).
    """

    partition: np.ndarray
    slopes: np.ndarray
    offsets: np.ndarray
    spec: dict = field(repr=False)

    def __post_init__(self):
        p, s, o = self.partition, self.slopes, self.offsets
        q = s * p[:-1] + o
        ends = s * p[1:] + o
        lo = np.minimum(q, ends)
        hi = np.maximum(q, ends)
        n = len(s)
        adj = np.zeros((n, n), dtype=int)
        for i in range(n):
            adj[i] = (p[:-1] >= lo[i] - _KNOT_TOL) & (p[1:] <= hi[i] + _KNOT_TOL)
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "image_lo", lo)
        object.__setattr__(self, "image_hi", hi)
        object.__setattr__(self, "adjacency", adj)
        object.__setattr__(self, "lengths", np.diff(p))
        object.__setattr__(self, "partition_frac", tuple(Fraction(x) for x in p))
        object.__setattr__(self, "slopes_frac", tuple(Fraction(x) for x in s))
        object.__setattr__(self, "offsets_frac", tuple(Fraction(x) for x in o))

    @property
    def n_branches(self) -> int:
        return len(self.slopes)

    @property
    def kind(self) -> str:
        return "affine_markov"

    @property
    def full_branch(self) -> bool:
        return bool(np.all(self.adjacency == 1))

    def branch_of(self, x):
        idx = np.searchsorted(self.partition, np.asarray(x, float), side="right") - 1
        return np.clip(idx, 0, self.n_branches - 1)

    def apply(self, x):
        x = np.asarray(x, dtype=float)
        j = self.branch_of(x)
        return self.slopes[j] * x + self.offsets[j]

    def branch_apply(self, j: int, x):
        return self.slopes[j] * np.asarray(x, float) + self.offsets[j]

    def branch_deriv(self, j: int, x):
        if np.ndim(x) == 0:
            return float(self.slopes[j])
        return np.full(np.shape(x), self.slopes[j], dtype=float)

    def branch_image(self, j: int) -> tuple[float, float]:
        return float(self.image_lo[j]), float(self.image_hi[j])

    def branch_inverse(self, j: int, y):
        y_arr = np.asarray(y, dtype=float)
        lo, hi = self.image_lo[j], self.image_hi[j]
        if np.any(y_arr < lo - _KNOT_TOL) or np.any(y_arr > hi + _KNOT_TOL):
            raise ValueError(f"y outside image of branch {j}: [{lo}, {hi}]")
        out = (y_arr - self.offsets[j]) / self.slopes[j]
        out = np.clip(out, self.partition[j], self.partition[j + 1])
        return float(out) if np.ndim(y) == 0 else out


def _branch_grid(a: float, b: float, n: int = _GRID) -> np.ndarray:
    # strictly interior grid; composed derivatives may be singular at knots
    t = (np.arange(n) + 0.5) / n
    return a + (b - a) * t


@dataclass(frozen=True, eq=False)
class SmoothFullBranchMap:
    """Expanding map with smooth orientation-preserving branches onto (0,1).

    Caches closed-form derivative expressions per branch: f', f'',
    D_f = (1/f')' = -f''/f'^2 and D_f'.
    """

    partition: np.ndarray
    exprs: tuple[Expr, ...]
    spec: dict = field(repr=False)

    def __post_init__(self):
        fp = tuple(differentiate(e) for e in self.exprs)
        fpp = tuple(differentiate(e) for e in fp)
        df = tuple(Neg(BinOp("/", s, BinOp("^", p, Const(2.0)))) for s, p in zip(fpp, fp))
        dfp = tuple(differentiate(e) for e in df)
        object.__setattr__(self, "fprime", fp)
        object.__setattr__(self, "fsecond", fpp)
        object.__setattr__(self, "df", df)
        object.__setattr__(self, "dfprime", dfp)
        object.__setattr__(self, "lengths", np.diff(self.partition))

    @property
    def n_branches(self) -> int:
        return len(self.exprs)

    @property
    def kind(self) -> str:
        return "smooth_full_branch"

    @property
    def full_branch(self) -> bool:
        return True

    def branch_of(self, x):
        idx = np.searchsorted(self.partition, np.asarray(x, float), side="right") - 1
        return np.clip(idx, 0, self.n_branches - 1)

    def apply(self, x):
        x = np.asarray(x, dtype=float)
        j = np.atleast_1d(self.branch_of(x))
        flat = np.atleast_1d(x).astype(float)
        out = np.empty_like(flat)
        for b in range(self.n_branches):
            sel = j == b
            if np.any(sel):
                out[sel] = evaluate(self.exprs[b], flat[sel])
        out = np.clip(out, 0.0, 1.0)
        return float(out[0]) if np.ndim(x) == 0 else out.reshape(np.shape(x))

    def branch_apply(self, j: int, x):
        return evaluate(self.exprs[j], x)

    def branch_deriv(self, j: int, x):
        return evaluate(self.fprime[j], x)

    def branch_image(self, j: int) -> tuple[float, float]:
        return 0.0, 1.0

    def branch_inverse(self, j: int, y):
        return _newton_inverse(self, j, y, increasing=True)


@dataclass(frozen=True, eq=False)
class MonotoneFullBranchMap:
    """Piecewise monotone map, every branch onto (0,1); expansion not required.

    signs[j] is +1 for increasing and -1 for decreasing branches; Lambda is
    the sampled sup of |f'|.
    """

    partition: np.ndarray
    exprs: tuple[Expr, ...]
    spec: dict = field(repr=False)

    def __post_init__(self):
        fp = tuple(differentiate(e) for e in self.exprs)
        signs = []
        lam = 0.0
        for j, e in enumerate(fp):
            g = _branch_grid(self.partition[j], self.partition[j + 1])
            d = evaluate(e, g)
            signs.append(1 if np.median(d) >= 0 else -1)
            lam = max(lam, float(np.max(np.abs(d))))
        object.__setattr__(self, "fprime", fp)
        object.__setattr__(self, "signs", tuple(signs))
        object.__setattr__(self, "Lambda", lam)
        object.__setattr__(self, "lengths", np.diff(self.partition))

    @property
    def n_branches(self) -> int:
        return len(self.exprs)

    @property
    def kind(self) -> str:
        return "monotone_full_branch"

    @property
    def full_branch(self) -> bool:
        return True

    def branch_of(self, x):
        idx = np.searchsorted(self.partition, np.asarray(x, float), side="right") - 1
        return np.clip(idx, 0, self.n_branches - 1)

    def apply(self, x):
        x = np.asarray(x, dtype=float)
        j = np.atleast_1d(self.branch_of(x))
        flat = np.atleast_1d(x).astype(float)
        out = np.empty_like(flat)
        for b in range(self.n_branches):
            sel = j == b
            if np.any(sel):
                out[sel] = evaluate(self.exprs[b], flat[sel])
        out = np.clip(out, 0.0, 1.0)
        return float(out[0]) if np.ndim(x) == 0 else out.reshape(np.shape(x))

    def branch_apply(self, j: int, x):
        return evaluate(self.exprs[j], x)

    def branch_deriv(self, j: int, x):
        return evaluate(self.fprime[j], x)

    def branch_image(self, j: int) -> tuple[float, float]:
        return 0.0, 1.0

    def branch_inverse(self, j: int, y):
        return _newton_inverse(self, j, y, increasing=self.signs[j] > 0)


def _newton_inverse(m, j: int, y, increasing: bool):
    """Bisection-safeguarded Newton solve of f_j(x) = y on [p_j, p_{j+1}].

    Tolerates |f'| -> 1 (or isolated critical points) because every step that
    leaves the bracket falls back to bisection.
    """
    y_arr = np.atleast_1d(np.asarray(y, dtype=float))
    if np.any(y_arr < -_KNOT_TOL) or np.any(y_arr > 1.0 + _KNOT_TOL):
        raise ValueError(f"y outside image of branch {j}: [0, 1]")
    yv = np.clip(y_arr, 0.0, 1.0)
    a = np.full_like(yv, m.partition[j])
    b = np.full_like(yv, m.partition[j + 1])
    if not increasing:
        # keep invariant f(a) <= y <= f(b) by swapping the bracket roles
        a, b = b.copy(), a.copy()
    x = 0.5 * (a + b)
    fx = m.branch_apply(j, x) - yv
    for _ in range(200):
        if np.all(np.abs(fx) <= _INV_TOL):
            break
        with np.errstate(divide="ignore", invalid="ignore"):
            d = np.asarray(m.branch_deriv(j, x), dtype=float)
            step = np.where(np.abs(d) > 1e-14, fx / np.where(d == 0, 1.0, d), np.nan)
        xn = x - step
        bad = ~np.isfinite(xn) | (np.minimum(a, b) > xn) | (xn > np.maximum(a, b))
        xn = np.where(bad, 0.5 * (a + b), xn)
        fxn = m.branch_apply(j, xn) - yv
        below = fxn < 0
        a = np.where(below, xn, a)
        b = np.where(below, b, xn)
        x, fx = xn, fxn
    lo, hi = m.partition[j], m.partition[j + 1]
    x = np.clip(x, lo, hi)
    return float(x[0]) if np.ndim(y) == 0 else x.reshape(np.shape(y))


# ---------------------------------------------------------------------------
# validation


def validate_map(m) -> ValidationReport:
    """Run every structural check for the map's type; never raises."""
    if isinstance(m, MarkovAffineMap):
        return _validate_affine(m)
    if isinstance(m, SmoothFullBranchMap):
        return _validate_smooth(m)
    if isinstance(m, MonotoneFullBranchMap):
        return _validate_monotone(m)
    raise TypeError(f"not a map model: {m!r}")


def _partition_check(p: np.ndarray) -> CheckResult:
    gaps = np.diff(p)
    if np.any(gaps <= 0):
        i = int(np.argmin(gaps))
        return CheckResult("partition_sorted", False, float(p[i]), float(gaps[i]),
                           "partition must be strictly increasing")
    if abs(p[0]) > _IMG_TOL or abs(p[-1] - 1.0) > _IMG_TOL:
        return CheckResult("partition_sorted", False, float(p[0]), float(p[-1]),
                           "partition must span [0, 1]")
    return CheckResult("partition_sorted", True, None, float(np.min(gaps)))


def _validate_affine(m: MarkovAffineMap) -> ValidationReport:
    rep = ValidationReport("affine_markov")
    p = m.partition
    rep.checks.append(_partition_check(p))

    j_min = int(np.argmin(np.abs(m.slopes)))
    expansion = float(np.min(np.abs(m.slopes)))
    rep.checks.append(
        CheckResult("expansion", expansion > 1.0, float(p[j_min]), expansion,
                    "|slope| must exceed 1 on every branch")
    )

    over = np.maximum(m.image_hi - 1.0, 0.0) + np.maximum(-m.image_lo, 0.0)
    i_bad = int(np.argmax(over))
    rep.checks.append(
        CheckResult("image_in_unit", bool(np.max(over) <= _IMG_TOL),
                    float(p[i_bad]), float(np.max(over)),
                    "branch images must stay inside [0,1]")
    )

    # every image endpoint must land on a partition knot
    worst = 0.0
    worst_pt = None
    for v in np.concatenate([m.image_lo, m.image_hi]):
        d = float(np.min(np.abs(p - v)))
        if d > worst:
            worst, worst_pt = d, float(v)
    rep.checks.append(
        CheckResult("markov_alignment", worst <= _KNOT_TOL, worst_pt, worst,
                    "branch image endpoints must be partition knots")
    )

    # nontrivial overlap between f(I_i) and I_j implies containment of I_j
    worst = 0.0
    worst_pt = None
    n = m.n_branches
    for i in range(n):
        for j in range(n):
            ov = min(m.image_hi[i], p[j + 1]) - max(m.image_lo[i], p[j])
            if ov > _KNOT_TOL and not m.adjacency[i, j]:
                short = float(m.lengths[j] - ov)
                if short > worst:
                    worst, worst_pt = short, float(p[j])
    rep.checks.append(
        CheckResult("markov_covering", worst == 0.0, worst_pt, worst,
                    "f(I_i) must cover each partition cell it meets")
    )
    return rep


def _validate_smooth(m: SmoothFullBranchMap) -> ValidationReport:
    rep = ValidationReport("smooth_full_branch")
    p = m.partition
    rep.checks.append(_partition_check(p))

    finite = True
    worst_pt = None
    min_fp, min_fp_at = np.inf, None
    min_df, min_df_at = np.inf, None
    for j in range(m.n_branches):
        g = _branch_grid(p[j], p[j + 1])
        vals = [evaluate(m.exprs[j], g), evaluate(m.fprime[j], g),
                evaluate(m.fsecond[j], g), evaluate(m.df[j], g)]
        for v in vals:
            if not np.all(np.isfinite(v)):
                finite = False
                worst_pt = float(g[int(np.argmax(~np.isfinite(v)))])
        fp = vals[1]
        i = int(np.argmin(fp))
        if fp[i] < min_fp:
            min_fp, min_fp_at = float(fp[i]), float(g[i])
        dfv = vals[3]
        i = int(np.argmin(dfv))
        if dfv[i] < min_df:
            min_df, min_df_at = float(dfv[i]), float(g[i])
    rep.checks.append(CheckResult("finite_values", finite, worst_pt, None,
                                  "f, f', f'', D_f must evaluate finite"))
    rep.checks.append(CheckResult("expansion", min_fp > 1.0, min_fp_at, min_fp,
                                  "f' must exceed 1 on the sample grid"))

    worst = 0.0
    worst_pt = None
    for j in range(m.n_branches):
        d0 = abs(float(evaluate(m.exprs[j], p[j])) - 0.0)
        d1 = abs(float(evaluate(m.exprs[j], p[j + 1])) - 1.0)
        if d0 > worst:
            worst, worst_pt = d0, float(p[j])
        if d1 > worst:
            worst, worst_pt = d1, float(p[j + 1])
    rep.checks.append(CheckResult("full_branch_images", worst <= _KNOT_TOL, worst_pt, worst,
                                  "each branch must map onto (0,1), increasing"))

    # classification notes for the convex-derivative class
    rep.notes.append(CheckResult("df_nonnegative", min_df >= -1e-12, min_df_at, min_df))
    kmax = 0.0
    kpt = None
    for i in range(1, m.n_branches):
        left = float(evaluate(m.fprime[i - 1], p[i]))
        right = float(evaluate(m.fprime[i], p[i]))
        d = abs(left - right)
        if d > kmax:
            kmax, kpt = d, float(p[i])
    rep.notes.append(CheckResult("knot_derivative_continuity", kmax <= 1e-8, kpt, kmax))
    df_sup = 0.0
    for j in range(m.n_branches):
        g = _branch_grid(p[j], p[j + 1])
        df_sup = max(df_sup, float(np.max(np.abs(evaluate(m.df[j], g)))))
    rep.notes.append(CheckResult("df_not_identically_zero", df_sup > 1e-14, None, df_sup))
    return rep


def _validate_monotone(m: MonotoneFullBranchMap) -> ValidationReport:
    rep = ValidationReport("monotone_full_branch")
    p = m.partition
    rep.checks.append(_partition_check(p))

    finite = True
    worst_pt = None
    mono_ok = True
    mono_pt, mono_meas = None, 0.0
    for j in range(m.n_branches):
        g = _branch_grid(p[j], p[j + 1])
        v = evaluate(m.exprs[j], g)
        d = evaluate(m.fprime[j], g)
        if not (np.all(np.isfinite(v)) and np.all(np.isfinite(d))):
            finite = False
            worst_pt = float(p[j])
        signed = m.signs[j] * d
        i = int(np.argmin(signed))
        if signed[i] < -1e-12:
            mono_ok = False
            mono_pt, mono_meas = float(g[i]), float(signed[i])
    rep.checks.append(CheckResult("finite_values", finite, worst_pt, None))
    rep.checks.append(CheckResult("monotone_branches", mono_ok, mono_pt, mono_meas,
                                  "sign(f') must be constant per branch"))

    worst = 0.0
    worst_pt = None
    for j in range(m.n_branches):
        lo = float(evaluate(m.exprs[j], p[j]))
        hi = float(evaluate(m.exprs[j], p[j + 1]))
        lo, hi = min(lo, hi), max(lo, hi)
        d = max(abs(lo), abs(hi - 1.0))
        if d > worst:
            worst, worst_pt = d, float(p[j])
    rep.checks.append(CheckResult("full_branch_images", worst <= _KNOT_TOL, worst_pt, worst,
                                  "each branch must map onto (0,1)"))
    rep.checks.append(CheckResult("derivative_bounded", np.isfinite(m.Lambda), None, m.Lambda))
    return rep


# ---------------------------------------------------------------------------
# spec parsing


_TOP_FIELDS = {"type", "partition", "branches"}
_AFFINE_BRANCH_FIELDS = {"slope", "offset", "expr"}
_EXPR_BRANCH_FIELDS = {"expr"}


def parse_map_spec(src: str | dict):
    """Parse a JSON map-spec document into a validated map object.

    Accepts raw JSON text or an already-decoded dict.  Raises MapSpecError
    for schema/syntax problems (with position where available) and
    MapValidationError when a structural check fails.
    """
    if isinstance(src, str):
        try:
            doc = json.loads(src)
        except json.JSONDecodeError as e:
            raise MapSpecError(f"invalid JSON: {e.msg}", e.pos) from e
    else:
        doc = src
    if not isinstance(doc, dict):
        raise MapSpecError("map spec must be a JSON object")

    unknown = set(doc) - _TOP_FIELDS
    if unknown:
        raise MapSpecError(f"unknown field {sorted(unknown)[0]!r}")
    for key in ("type", "partition", "branches"):
        if key not in doc:
            raise MapSpecError(f"missing field {key!r}")

    mtype = doc["type"]
    if mtype not in ("affine_markov", "smooth_full_branch", "monotone_full_branch"):
        raise MapSpecError(f"unknown map type {mtype!r}")

    try:
        partition = np.asarray([float(v) for v in doc["partition"]], dtype=float)
    except (TypeError, ValueError) as e:
        raise MapSpecError(f"partition entries must be numbers: {e}") from e
    if len(partition) < 2:
        raise MapSpecError("partition needs at least two points")
    if np.any(np.diff(partition) <= 0):
        i = int(np.argmax(np.diff(partition) <= 0))
        raise MapSpecError(f"partition not strictly increasing at index {i + 1}")
    if abs(partition[0]) > _IMG_TOL or abs(partition[-1] - 1.0) > _IMG_TOL:
        raise MapSpecError("partition must start at 0 and end at 1")
    partition[0], partition[-1] = 0.0, 1.0

    branches = doc["branches"]
    if not isinstance(branches, list):
        raise MapSpecError("branches must be a list")
    if len(branches) != len(partition) - 1:
        raise MapSpecError(
            f"branch count {len(branches)} does not match partition cells {len(partition) - 1}"
        )

    spec = {"type": mtype, "partition": [float(v) for v in partition], "branches": []}

    if mtype == "affine_markov":
        slopes, offsets = [], []
        for b_idx, b in enumerate(branches):
            if not isinstance(b, dict):
                raise MapSpecError(f"branch {b_idx} must be an object")
            unknown = set(b) - _AFFINE_BRANCH_FIELDS
            if unknown:
                raise MapSpecError(f"unknown field {sorted(unknown)[0]!r} in branch {b_idx}")
            if "expr" in b:
                if "slope" in b or "offset" in b:
                    raise MapSpecError(f"branch {b_idx}: give either expr or slope/offset")
                e = _parse_branch_expr(b["expr"], b_idx)
                d = differentiate(e)
                if not isinstance(d, Const):
                    raise MapSpecError(f"branch {b_idx} expr is not affine: {b['expr']!r}")
                slope = d.value
                offset = float(evaluate(e, 0.0))
            else:
                if "slope" not in b or "offset" not in b:
                    raise MapSpecError(f"branch {b_idx} needs slope and offset")
                slope, offset = float(b["slope"]), float(b["offset"])
            slopes.append(slope)
            offsets.append(offset)
            spec["branches"].append({"slope": slope, "offset": offset})
        m = MarkovAffineMap(partition, np.asarray(slopes), np.asarray(offsets), spec)
    else:
        exprs = []
        for b_idx, b in enumerate(branches):
            if not isinstance(b, dict):
                raise MapSpecError(f"branch {b_idx} must be an object")
            unknown = set(b) - _EXPR_BRANCH_FIELDS
            if unknown:
                raise MapSpecError(f"unknown field {sorted(unknown)[0]!r} in branch {b_idx}")
            if "expr" not in b:
                raise MapSpecError(f"branch {b_idx} needs an expr")
            exprs.append(_parse_branch_expr(b["expr"], b_idx))
            spec["branches"].append({"expr": str(b["expr"])})
        cls = SmoothFullBranchMap if mtype == "smooth_full_branch" else MonotoneFullBranchMap
        m = cls(partition, tuple(exprs), spec)

    report = validate_map(m)
    if not report.ok:
        raise MapValidationError(report)
    return m


def _parse_branch_expr(text, b_idx: int) -> Expr:
    if not isinstance(text, str):
        raise MapSpecError(f"branch {b_idx} expr must be a string")
    try:
        return parse_expr(text)
    except ExprSyntaxError as e:
        raise MapSpecError(f"branch {b_idx} expr: {e.args[0]}", e.position) from e


# ---------------------------------------------------------------------------
# module-level conveniences


def branch_inverse(m, j: int, y):
    """Inverse of branch j at y (scalar or array); errors if y leaves the image."""
    return m.branch_inverse(j, y)


def iterate_map(m, x, n: int):
    """n-fold composition f^n evaluated pointwise."""
    out = np.asarray(x, dtype=float)
    for _ in range(n):
        out = m.apply(out)
    return out


def spec_hash(m) -> str:
    return map_hash(m.spec)
