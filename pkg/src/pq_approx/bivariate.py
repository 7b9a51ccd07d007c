"""Two-variable operator built by tensor composition of the univariate
node/weight tables, with closed-form moments, per-axis rate functionals,
a two-axis modulus of smoothness, and the bivariate Korovkin battery.

The operator factorizes over axes, so a value is a weighted double sum with
weight vectors taken from the validated univariate kernel; nothing here
re-derives weights.  The printed closed-form moments again come in two
variants ("printed" per the source derivation, "oracle" per the
tensor-factorized forms the double brute-force sum confirms); the battery
and discrepancy machinery run both.
"""

from __future__ import annotations

import math
from bisect import bisect_left
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence, Tuple, Union

import numpy as np

from .functions import BivariateFunction, korovkin_quadruple, u_of
from .operators import (
    VARIANT_ORACLE,
    VARIANT_PRINTED,
    VARIANTS,
    moment_closed,
    node_weight_table,
)
from .pq_core import DomainError, PQParams, euler_product, pq_integer
from .rates import delta_n as univariate_delta_n
from .rates import distance_to_set, u_grid
from .statistical import schedule_params

OMEGA2_RESOLUTION = 512


@dataclass(frozen=True)
class BivariateParams:
    """Per-axis parameter pairs and degrees for the tensor operator."""

    params1: PQParams
    params2: PQParams
    n1: int
    n2: int

    def __post_init__(self) -> None:
        if self.params1.mode != self.params2.mode:
            raise DomainError(
                f"axis modes differ: {self.params1.mode} vs {self.params2.mode}"
            )
        if self.n1 < 1 or self.n2 < 1:
            raise DomainError(f"degrees must be >= 1, got ({self.n1}, {self.n2})")

    @property
    def is_rational(self) -> bool:
        return self.params1.is_rational

    def prefactor(self):
        return self.params1.p * self.params1.q * self.params2.p * self.params2.q


def _tables(bp: BivariateParams):
    return node_weight_table(bp.n1, bp.params1), node_weight_table(bp.n2, bp.params2)


def _exact_fn2(f):
    if isinstance(f, BivariateFunction):
        if not f.exact_capable:
            raise DomainError(f"function {f.name!r} cannot be evaluated in rational mode")
        return f.exact_fn
    return f


def bbh_pq_2d(f, bp: BivariateParams, x, y):
    """Operator value at one point (x, y) >= (0, 0)."""
    t1, t2 = _tables(bp)
    if bp.is_rational:
        x, y = Fraction(x), Fraction(y)
        if x < 0 or y < 0:
            raise DomainError("operator arguments live on [0, infinity)^2")
        fn = _exact_fn2(f)
        ell1 = euler_product(bp.n1, x, bp.params1)
        ell2 = euler_product(bp.n2, y, bp.params2)
        total = Fraction(0)
        xk = Fraction(1)
        for k1 in range(bp.n1 + 1):
            yk = Fraction(1)
            inner = Fraction(0)
            for k2 in range(bp.n2 + 1):
                inner += t2.weights[k2] * yk * Fraction(fn(t1.nodes[k1], t2.nodes[k2]))
                yk *= y
            total += t1.weights[k1] * xk * inner
            xk *= x
        return bp.prefactor() * total / (ell1 * ell2)
    w1 = t1.weight_rows(np.asarray([float(x)]))[0]
    w2 = t2.weight_rows(np.asarray([float(y)]))[0]
    fmat = f.grid(t1.nodes, t2.nodes) if isinstance(f, BivariateFunction) else _raw_grid(f, t1.nodes, t2.nodes)
    return float(bp.prefactor()) * float(w1 @ fmat @ w2)


def _raw_grid(f, s_values, t_values) -> np.ndarray:
    out = np.empty((len(s_values), len(t_values)))
    for i, s in enumerate(s_values):
        for j, t in enumerate(t_values):
            out[i, j] = float(f(s, t))
    return out


def bbh_pq_2d_grid(f, bp: BivariateParams, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    """Matrix of operator values over a product grid (float mode).

    Three matrix products replace len(xs) * len(ys) double sums; the result
    is indexed [i, j] = value at (xs[i], ys[j]).
    """
    if bp.is_rational:
        raise DomainError("grid evaluation is the float-mode kernel")
    t1, t2 = _tables(bp)
    w1 = t1.weight_rows(np.asarray(xs, dtype=float))
    w2 = t2.weight_rows(np.asarray(ys, dtype=float))
    fmat = f.grid(t1.nodes, t2.nodes) if isinstance(f, BivariateFunction) else _raw_grid(f, t1.nodes, t2.nodes)
    return float(bp.prefactor()) * (w1 @ fmat @ w2.T)


def brute_force_moment_2d(j: int, bp: BivariateParams, x, y):
    """Test-function moment by the double sum itself; ground truth for the
    closed forms."""
    if j not in (0, 1, 2, 3):
        raise DomainError(f"j must be 0..3, got {j}")
    return bbh_pq_2d(korovkin_quadruple()[j], bp, x, y)


def bivariate_moment(j: int, bp: BivariateParams, x, y, variant: str = VARIANT_ORACLE):
    """Closed-form moment of the j-th test function, j in {0, 1, 2, 3}.

    The oracle variant multiplies the confirmed univariate closed forms by
    the partner axis prefactor, which is what the double sum factorizes to.
    The printed variant reproduces the source display, whose items 1 through
    3 carry one axis prefactor too few and whose quadratic item mixes the
    two conventions term by term; the gap is measured, not repaired.
    """
    if variant not in VARIANTS:
        raise DomainError(f"unknown variant {variant!r}; expected one of {VARIANTS}")
    if j not in (0, 1, 2, 3):
        raise DomainError(f"j must be 0..3, got {j}")
    p1, q1 = bp.params1.p, bp.params1.q
    p2, q2 = bp.params2.p, bp.params2.q
    x = bp.params1.coerce(x)
    y = bp.params2.coerce(y)
    if x < 0 or y < 0:
        raise DomainError("operator arguments live on [0, infinity)^2")
    pref = bp.prefactor()
    if j == 0:
        return pref
    if j == 1:
        if variant == VARIANT_PRINTED:
            r1 = pq_integer(bp.n1, bp.params1) / pq_integer(bp.n1 + 1, bp.params1)
            return pref * r1 * u_of(x)
        return p2 * q2 * moment_closed(1, bp.n1, x, bp.params1)
    if j == 2:
        if variant == VARIANT_PRINTED:
            r2 = pq_integer(bp.n2, bp.params2) / pq_integer(bp.n2 + 1, bp.params2)
            return pref * r2 * u_of(y)
        return p1 * q1 * moment_closed(1, bp.n2, y, bp.params2)
    if bp.n1 < 2 or bp.n2 < 2:
        raise DomainError("the quadratic moment needs n1, n2 >= 2")
    if variant == VARIANT_ORACLE:
        return p2 * q2 * moment_closed(2, bp.n1, x, bp.params1) + p1 * q1 * moment_closed(
            2, bp.n2, y, bp.params2
        )
    b1, b1p = pq_integer(bp.n1, bp.params1), pq_integer(bp.n1 + 1, bp.params1)
    b1m = pq_integer(bp.n1 - 1, bp.params1)
    b2, b2p = pq_integer(bp.n2, bp.params2), pq_integer(bp.n2 + 1, bp.params2)
    b2m = pq_integer(bp.n2 - 1, bp.params2)
    ux, uy = u_of(x), u_of(y)
    # Verbatim: the fourth term's bracket ratio is printed unsquared, unlike
    # the second term's; both are kept as displayed.
    return (
        p1**3 * p2 * q1**3 * q2 * (b1 * b1m / b1p**2) * ux**2 * (1 + x) / (p1 + q1 * x)
        + pref * (b1 / b1p**2) * ux
        + p1 * p2**3 * q1 * q2**3 * (b2 * b2m / b2p**2) * uy**2 * (1 + y) / (p2 + q2 * y)
        + pref * (b2 / b2p) * uy
    )


# ---------------------------------------------------------------------------
# Per-axis rate functionals
# ---------------------------------------------------------------------------


def _delta_axis(t, n: int, params: PQParams, variant: str):
    """Shared body of delta_n1 and delta_n2.

    The printed variant drops the axis prefactors the univariate functional
    carries (leading p^2 q^2 for p^2 q^3, a bare -2[n]/[n+1] middle term, a
    bare [n]/[n+1]^2 tail), and because of the stronger middle term it can go
    negative at large arguments; callers that take square roots clamp at
    zero.  The oracle variant is the exact second moment and is nonnegative.
    """
    if variant not in VARIANTS:
        raise DomainError(f"unknown variant {variant!r}; expected one of {VARIANTS}")
    if variant == VARIANT_ORACLE:
        return univariate_delta_n(t, n, params, variant=VARIANT_ORACLE)
    if n < 1:
        raise DomainError(f"rate functional needs n >= 1, got {n}")
    p, q = params.p, params.q
    if params.is_rational:
        t = Fraction(t)
    else:
        t = np.asarray(t, dtype=float) if np.ndim(t) else float(t)
    if np.any(np.asarray(t, dtype=float) < 0):
        raise DomainError("rate functionals are defined on [0, infinity)")
    u = u_of(t)
    bn = pq_integer(n, params)
    bnm1 = pq_integer(n - 1, params)
    bn1 = pq_integer(n + 1, params)
    inner = p**2 * q**2 * (1 + t) / (p + q * t) * bn * bnm1 / bn1**2 - 2 * bn / bn1 + 1
    return u**2 * inner + u * bn / bn1**2


def delta_n1(x, n1: int, params1: PQParams, variant: str = VARIANT_PRINTED):
    return _delta_axis(x, n1, params1, variant)


def delta_n2(y, n2: int, params2: PQParams, variant: str = VARIANT_PRINTED):
    return _delta_axis(y, n2, params2, variant)


# ---------------------------------------------------------------------------
# Two-axis modulus of smoothness
# ---------------------------------------------------------------------------


def _shift_ladder(resolution: int) -> list:
    """Shift counts 0, 1, 2, ... growing by about sqrt(2), capped at res - 1."""
    out = [0]
    k = 0
    while True:
        step = int(math.floor(2 ** (k / 2.0)))
        k += 1
        if step <= out[-1]:
            continue
        if step >= resolution - 1:
            break
        out.append(step)
    out.append(resolution - 1)
    return out


class Omega2Table:
    """Grid modulus sup |f(t,s) - f(x,y)| over |u-shift| <= d1, |v-shift| <= d2.

    Exact per-pair search is O(resolution^4); instead the table records, for
    each shift pair (a, b) on a geometric ladder (both sign combinations),
    the grid max of the corresponding difference, then cumulative-maxes over
    the ladder.  A query snaps each axis distance up to the next ladder rung,
    so the returned value is the grid modulus at most one rung out, an
    overshoot the two-axis product property keeps within a bounded factor.
    """

    def __init__(self, f: BivariateFunction, resolution: int = OMEGA2_RESOLUTION):
        self.resolution = resolution
        grid = u_grid(resolution)
        fmat = f.grid(grid.xs, grid.xs)
        ladder = _shift_ladder(resolution)
        self.ladder = ladder
        m = len(ladder)
        raw = np.zeros((m, m))
        r = resolution
        for ai, a in enumerate(ladder):
            for bi, b in enumerate(ladder):
                if a == 0 and b == 0:
                    continue
                same = np.max(np.abs(fmat[a:, b:] - fmat[: r - a, : r - b]))
                if a and b:
                    cross = np.max(np.abs(fmat[a:, : r - b] - fmat[: r - a, b:]))
                    raw[ai, bi] = max(same, cross)
                else:
                    raw[ai, bi] = same
        best = np.maximum.accumulate(np.maximum.accumulate(raw, axis=0), axis=1)
        self.best = best

    def _snap(self, delta: float) -> int:
        if delta < 0:
            raise DomainError(f"modulus needs delta >= 0, got {delta}")
        want = min(int(math.floor(delta * self.resolution + 1e-12)), self.resolution - 1)
        return bisect_left(self.ladder, want)

    def query(self, d1: float, d2: float) -> float:
        return float(self.best[self._snap(d1), self._snap(d2)])


_OMEGA2_CACHE: dict = {}


def omega2(
    f: BivariateFunction, d1: float, d2: float, resolution: int = OMEGA2_RESOLUTION
) -> float:
    key = (f.name, resolution)
    table = _OMEGA2_CACHE.get(key)
    if table is None:
        table = Omega2Table(f, resolution)
        _OMEGA2_CACHE[key] = table
    return table.query(d1, d2)


# ---------------------------------------------------------------------------
# Bound checks
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BivariateBoundRow:
    x: float
    y: float
    lhs: float
    bound: float
    margin: float
    passed: bool


@dataclass(frozen=True)
class BivariateBoundReport:
    check: str
    f_name: str
    n1: int
    n2: int
    p1: float
    q1: float
    p2: float
    q2: float
    slack: float
    rows: tuple

    @property
    def all_passed(self) -> bool:
        return all(r.passed for r in self.rows)

    @property
    def worst_margin(self) -> float:
        return min(r.margin for r in self.rows)


DEFAULT_CHECK_GRID = 32


def _check_axes(grid2d, resolution: int) -> Tuple[np.ndarray, np.ndarray]:
    if grid2d is None:
        xs = u_grid(resolution).xs
        return xs, xs
    xs, ys = grid2d
    return np.asarray(xs, dtype=float), np.asarray(ys, dtype=float)


def _bound_report(check, f, bp, xs, ys, lhs, bound, slack) -> BivariateBoundReport:
    rows = []
    for i, x in enumerate(xs):
        for j, y in enumerate(ys):
            margin = float(bound[i, j]) - float(lhs[i, j])
            rows.append(
                BivariateBoundRow(
                    x=float(x),
                    y=float(y),
                    lhs=float(lhs[i, j]),
                    bound=float(bound[i, j]),
                    margin=margin,
                    passed=margin >= -slack,
                )
            )
    return BivariateBoundReport(
        check=check,
        f_name=f.name,
        n1=bp.n1,
        n2=bp.n2,
        p1=float(bp.params1.p),
        q1=float(bp.params1.q),
        p2=float(bp.params2.p),
        q2=float(bp.params2.q),
        slack=slack,
        rows=tuple(rows),
    )


def _grid_slack(f: BivariateFunction, resolution: int) -> float:
    return 2.0 * (f.u_modulus_1(1.0 / resolution) + f.u_modulus_2(1.0 / resolution))


def bivariate_rate_bound_check(
    f: BivariateFunction,
    bp: BivariateParams,
    grid2d=None,
    resolution: int = DEFAULT_CHECK_GRID,
    omega_resolution: int = OMEGA2_RESOLUTION,
) -> BivariateBoundReport:
    """Check |L(f) - f| <= 4 (p1 p2 q1 q2)^2 * omega2(f; sqrt d1(x), sqrt d2(y)).

    The rate functionals are the printed per-axis ones (clamped at zero under
    the square root, since the printed form can dip negative); the modulus is
    the cached grid table.  Report-based: violations show up as negative
    margins, and the constant function is a known one (the prefactor shifts
    L(1) away from 1 while its modulus vanishes).
    """
    xs, ys = _check_axes(grid2d, resolution)
    lhs = np.abs(bbh_pq_2d_grid(f, bp, xs, ys) - f.grid(xs, ys))
    d1 = np.sqrt(np.maximum(np.atleast_1d(delta_n1(xs, bp.n1, bp.params1)), 0.0))
    d2 = np.sqrt(np.maximum(np.atleast_1d(delta_n2(ys, bp.n2, bp.params2)), 0.0))
    pref = float(bp.prefactor())
    bound = np.empty((xs.size, ys.size))
    for i in range(xs.size):
        for j in range(ys.size):
            bound[i, j] = 4.0 * pref**2 * omega2(f, float(d1[i]), float(d2[j]), omega_resolution)
    slack = _grid_slack(f, omega_resolution)
    return _bound_report("bivariate_rate_modulus", f, bp, xs, ys, lhs, bound, slack)


@dataclass(frozen=True)
class BivariateLipschitzSpec:
    """Two-axis Holder class data (exponents, constant, anchor set)."""

    alpha1: float
    alpha2: float
    M: float
    E: Optional[Sequence] = None

    def __post_init__(self) -> None:
        for a in (self.alpha1, self.alpha2):
            if not 0 < float(a) <= 1:
                raise DomainError(f"alpha must lie in (0, 1], got {a}")
        if self.M <= 0:
            raise DomainError(f"M must be > 0, got {self.M}")


def bivariate_holder_bound_check(
    spec: BivariateLipschitzSpec,
    f: BivariateFunction,
    bp: BivariateParams,
    grid2d=None,
    resolution: int = DEFAULT_CHECK_GRID,
) -> BivariateBoundReport:
    """Check the two-axis Holder-class bound pointwise.

    With no anchor set (E = None, the whole half line) the bound is the
    reduced form M (p1 p2 q1 q2)^(4 - (a1 + a2)/2) d1^(a1/2) d2^(a2/2);
    with a finite E it is the displayed four-term sum with distance terms.
    """
    xs, ys = _check_axes(grid2d, resolution)
    lhs = np.abs(bbh_pq_2d_grid(f, bp, xs, ys) - f.grid(xs, ys))
    a1, a2, m = float(spec.alpha1), float(spec.alpha2), float(spec.M)
    d1 = np.maximum(np.atleast_1d(delta_n1(xs, bp.n1, bp.params1)), 0.0) ** (a1 / 2.0)
    d2 = np.maximum(np.atleast_1d(delta_n2(ys, bp.n2, bp.params2)), 0.0) ** (a2 / 2.0)
    pref = float(bp.prefactor())
    if spec.E is None:
        bound = m * pref ** (4.0 - (a1 + a2) / 2.0) * np.outer(d1, d2)
    else:
        dx = np.asarray([distance_to_set(x, spec.E) ** a1 for x in xs])
        dy = np.asarray([distance_to_set(y, spec.E) ** a2 for y in ys])
        bound = m * pref * (
            pref * np.outer(d1, d2)
            + np.outer(d1, dy)
            + np.outer(dx, d2)
            + 2.0 * np.outer(dx, dy)
        )
    # Both sides are evaluated at the same points, so no grid-sup slack
    # enters; the allowance only absorbs float rounding.
    slack = 1e-10
    return _bound_report("bivariate_lipschitz", f, bp, xs, ys, lhs, bound, slack)


# ---------------------------------------------------------------------------
# Korovkin battery
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BivariateKorovkinDiagnostics:
    n1: int
    n2: int
    p1: float
    q1: float
    p2: float
    q2: float
    resolution: int
    supnorms: Tuple[float, float, float, float]


def bivariate_korovkin_battery(
    rules: Union[str, Tuple[str, str]],
    n1: int,
    n2: int,
    resolution: int = 256,
) -> BivariateKorovkinDiagnostics:
    """Sup-norms of L(g) - g over the 2-d u-grid for the test quadruple."""
    rule1, rule2 = (rules, rules) if isinstance(rules, str) else rules
    bp = BivariateParams(
        params1=schedule_params(rule1, n1),
        params2=schedule_params(rule2, n2),
        n1=n1,
        n2=n2,
    )
    xs = u_grid(resolution).xs
    sups = []
    for g in korovkin_quadruple():
        diff = bbh_pq_2d_grid(g, bp, xs, xs) - g.grid(xs, xs)
        sups.append(float(np.max(np.abs(diff))))
    return BivariateKorovkinDiagnostics(
        n1=n1,
        n2=n2,
        p1=float(bp.params1.p),
        q1=float(bp.params1.q),
        p2=float(bp.params2.p),
        q2=float(bp.params2.q),
        resolution=resolution,
        supnorms=tuple(sups),
    )
