"""Natural density, statistical limits at finite horizons, parameter
schedules, and the Korovkin test battery.

Statistical convergence is certified here only in the empirical sense: densities
of exception sets are counted exactly (as Fractions) up to explicit horizons
and compared against a threshold.  Nothing in this module claims an infinite
limit; the reports say what was counted and where.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence, Tuple, Union

import numpy as np

from .operators import node_weight_table
from .pq_core import DomainError, PQParams, pq_integer
from .rates import DEFAULT_RESOLUTION, u_grid

DENSITY_THRESHOLD = 0.005


def is_square(n: int) -> bool:
    r = math.isqrt(n)
    return r * r == n


@dataclass(frozen=True)
class DensityReport:
    horizon: int
    count: int
    density: Fraction


def natural_density(K: Callable[[int], bool], horizon: int) -> DensityReport:
    """Count members of K among 1..horizon; density is the exact ratio.

    K may be either a scalar predicate or one that accepts an integer numpy
    array and returns a boolean array (the fast path for big horizons).
    """
    if horizon < 1:
        raise DomainError(f"horizon must be >= 1, got {horizon}")
    ks = np.arange(1, horizon + 1, dtype=np.int64)
    try:
        hits = np.asarray(K(ks))
        if hits.shape != ks.shape or hits.dtype != np.bool_:
            raise TypeError
        count = int(np.count_nonzero(hits))
    except Exception:
        count = sum(1 for k in range(1, horizon + 1) if K(k))
    return DensityReport(horizon=horizon, count=count, density=Fraction(count, horizon))


@dataclass(frozen=True)
class StLimitReport:
    """Empirical exception densities of {k : |x_k - l| >= eps} per horizon."""

    l: float
    eps: float
    threshold: float
    horizons: Tuple[int, ...]
    densities: Tuple[Fraction, ...]

    @property
    def consistent(self) -> bool:
        vals = [float(d) for d in self.densities]
        nonincreasing = all(b <= a for a, b in zip(vals, vals[1:]))
        return nonincreasing and vals[-1] <= self.threshold


def st_limit_check(
    seq: Union[Callable[[int], float], np.ndarray, Sequence[float]],
    l: float,
    eps: float,
    horizons: Sequence[int],
    threshold: float = DENSITY_THRESHOLD,
) -> StLimitReport:
    """Exception-set densities of a sequence against a candidate limit.

    seq is either indexable starting at n = 1 (array of length >= max horizon)
    or a callable n -> x_n.  The verdict is "consistent" when the densities
    never increase from one horizon to the next and the final one is at or
    below the threshold.
    """
    if eps <= 0:
        raise DomainError(f"eps must be > 0, got {eps}")
    horizons = tuple(int(h) for h in horizons)
    if not horizons:
        raise DomainError("need at least one horizon")
    if any(h < 1 for h in horizons):
        raise DomainError("horizons must be positive")
    if any(b <= a for a, b in zip(horizons, horizons[1:])):
        raise DomainError("horizons must be strictly increasing")
    top = horizons[-1]
    if callable(seq):
        values = np.asarray([float(seq(n)) for n in range(1, top + 1)])
    else:
        values = np.asarray(seq, dtype=float)
        if values.size < top:
            raise DomainError(f"sequence has {values.size} terms, need {top}")
        values = values[:top]
    exceptions = np.abs(values - float(l)) >= float(eps)
    cum = np.cumsum(exceptions)
    densities = tuple(Fraction(int(cum[h - 1]), h) for h in horizons)
    return StLimitReport(
        l=float(l), eps=float(eps), threshold=float(threshold),
        horizons=horizons, densities=densities,
    )


# ---------------------------------------------------------------------------
# Parameter schedules
# ---------------------------------------------------------------------------


def _smooth_pair(n: int) -> Tuple[Fraction, Fraction]:
    return 1 - Fraction(1, 2 * (n + 1)), 1 - Fraction(1, n + 1)


def _statonly_pair(n: int) -> Tuple[Fraction, Fraction]:
    if is_square(n):
        return Fraction(1, 2), Fraction(1, 4)
    return _smooth_pair(n)


SCHEDULE_RULES = {
    "smooth": _smooth_pair,
    "statonly": _statonly_pair,
}


def schedule(rule_name: str, n: int) -> Tuple[Fraction, Fraction]:
    """(p_n, q_n) under a named rule, exact.

    "smooth" tends to (1, 1) monotonically with q_n < p_n throughout;
    "statonly" agrees with it off the perfect squares and drops to (1/2, 1/4)
    on them, so it converges to 1 statistically but not classically.
    """
    rule = SCHEDULE_RULES.get(rule_name)
    if rule is None:
        raise DomainError(f"unknown schedule rule {rule_name!r}; have {sorted(SCHEDULE_RULES)}")
    if n < 1:
        raise DomainError(f"schedule index must be >= 1, got {n}")
    return rule(n)


def schedule_params(rule_name: str, n: int, mode: str = "float") -> PQParams:
    p, q = schedule(rule_name, n)
    if mode == "rational":
        return PQParams(p, q, mode=mode)
    return PQParams(float(p), float(q), mode=mode)


def schedule_arrays(rule_name: str, count: int) -> Tuple[np.ndarray, np.ndarray]:
    """Vectorized (p_n, q_n) for n = 1..count as float arrays."""
    if rule_name not in SCHEDULE_RULES:
        raise DomainError(f"unknown schedule rule {rule_name!r}; have {sorted(SCHEDULE_RULES)}")
    ns = np.arange(1, count + 1, dtype=np.int64)
    # Single correctly-rounded divisions so the entries equal
    # float(schedule(rule, n)) bit for bit; 1 - 1/(2(n+1)) double-rounds.
    ps = (2.0 * ns + 1.0) / (2.0 * ns + 2.0)
    qs = ns / (ns + 1.0)
    if rule_name == "statonly":
        roots = np.sqrt(ns.astype(float)).round().astype(np.int64)
        square = roots * roots == ns
        ps = np.where(square, 0.5, ps)
        qs = np.where(square, 0.25, qs)
    return ps, qs


# ---------------------------------------------------------------------------
# Korovkin battery
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class KorovkinDiagnostics:
    """Grid sup-norms of the three test-function errors plus the proof's
    decay coefficients at one schedule index.

    nu1_analytic is (1 - p^2 q [n]/[n+1]) * max grid u, the form the exact
    moment implies; nu1_analytic_printed replaces p^2 q by p q, the
    coefficient the convergence proof displays.  The grid decides which one
    the operator actually follows, and the discrepancy report records the
    loser's gap.
    """

    n: int
    p: float
    q: float
    resolution: int
    supnorms: Tuple[float, float, float]
    alpha_n: float
    beta_n: float
    gamma_n: float
    nu1_analytic: float
    nu1_analytic_printed: float


def korovkin_battery(
    rule_name: str, n: int, resolution: int = DEFAULT_RESOLUTION
) -> KorovkinDiagnostics:
    """Sup-norms of L(u^nu) - u^nu for nu = 0, 1, 2 under a schedule rule."""
    if n < 2:
        raise DomainError(f"battery needs n >= 2, got {n}")
    params = schedule_params(rule_name, n)
    p, q = float(params.p), float(params.q)
    grid = u_grid(resolution)
    table = node_weight_table(n, params)
    rows = table.weight_rows(grid.xs)
    sups = []
    for nu in range(3):
        lvals = p * q * (rows @ table.us**nu)
        sups.append(float(np.max(np.abs(lvals - grid.us**nu))))
    bn = float(pq_integer(n, params))
    bn1 = float(pq_integer(n + 1, params))
    max_u = float(grid.us[-1])
    alpha_n = 1.0 - p**2
    beta_n = p ** (n + 2) * (1.0 / bn1 - p**n / bn1**2)
    gamma_n = p ** (n + 1) * (q / bn1 - (p**2 + p**n * q) / bn1**2)
    return KorovkinDiagnostics(
        n=n,
        p=p,
        q=q,
        resolution=resolution,
        supnorms=(sups[0], sups[1], sups[2]),
        alpha_n=alpha_n,
        beta_n=beta_n,
        gamma_n=gamma_n,
        nu1_analytic=(1.0 - p**2 * q * bn / bn1) * max_u,
        nu1_analytic_printed=(1.0 - p * q * bn / bn1) * max_u,
    )


def korovkin_sweep(
    rule_name: str, ns: Sequence[int], resolution: int = DEFAULT_RESOLUTION
) -> Tuple[KorovkinDiagnostics, ...]:
    return tuple(korovkin_battery(rule_name, n, resolution) for n in sorted(ns))
