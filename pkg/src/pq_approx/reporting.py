"""The discrepancy catalogue: every place the closed forms under audit
disagree with an independent oracle, with measured gaps.

Each candidate entry names a formula, states the value as printed in the
derivation under audit, states the oracle value (exact-rational summation
where possible, measured grid quantities otherwise), and records the
relative gap.  An entry makes it into the report only when the gap exceeds
the mode tolerance (zero in rational arithmetic), so the report length
itself is a finding.  Mismatches are documented here, never silently
repaired in the implementing code, which always offers both variants.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Tuple

import numpy as np

from .bivariate import (
    BivariateParams,
    bivariate_moment,
    brute_force_moment_2d,
    delta_n1,
)
from .functions import upow
from .operators import (
    VARIANT_PRINTED,
    bbh_pq,
    bbh_q,
    brute_force_moment,
    moment_closed,
)
from .pq_core import PQParams, floating, pq_integer, rational
from .rates import representation_sides, second_moment_brute, u_grid
from .statistical import korovkin_battery

FLOAT_TOLERANCE = 1e-12


@dataclass(frozen=True)
class DiscrepancyEntry:
    formula: str
    location: str
    printed: object
    oracle: object
    rel_gap: float

    def row(self) -> Tuple[str, str, str, str, float]:
        return (self.formula, self.location, _fmt(self.printed), _fmt(self.oracle), self.rel_gap)


@dataclass(frozen=True)
class DiscrepancyReport:
    entries: Tuple[DiscrepancyEntry, ...]

    def formulas(self) -> Tuple[str, ...]:
        return tuple(e.formula for e in self.entries)


def _fmt(value) -> str:
    if isinstance(value, Fraction):
        return str(value)
    return "%.17g" % float(value)


def _gap(printed, oracle) -> float:
    scale = max(abs(float(printed)), abs(float(oracle)), 1e-300)
    return abs(float(printed) - float(oracle)) / scale


def _entry(formula, location, printed, oracle) -> DiscrepancyEntry:
    return DiscrepancyEntry(
        formula=formula,
        location=location,
        printed=printed,
        oracle=oracle,
        rel_gap=_gap(printed, oracle),
    )


def build_catalogue(resolution: int = 4096) -> DiscrepancyReport:
    """Compute every audited formula against its oracle and keep the misses.

    Exact-rational paths use fixed small parameter points; grid-based
    entries state their resolution in the location text.  Output order is
    fixed, so the resulting CSV is deterministic.
    """
    candidates = []
    u = upow(1)

    # Claimed reduction to the one-parameter operator when the first
    # parameter equals one; the prefactor makes the actual ratio q.
    q = 0.5
    claimed = bbh_q(u, 5, 1.0, q)
    actual = bbh_pq(u, 5, 1.0, floating(1.0, q))
    candidates.append(
        _entry(
            "one_parameter_reduction",
            "two-parameter operator at first parameter 1 versus the stated "
            "one-parameter operator (actual ratio is q; n=5, q=1/2, x=1)",
            claimed,
            actual,
        )
    )

    # First-moment coefficient as displayed in the convergence proof (p q)
    # versus the closed-form moment's p^2 q; the grid sup-norm arbitrates.
    diag = korovkin_battery("smooth", 50, resolution)
    candidates.append(
        _entry(
            "first_moment_sup_coefficient",
            "predicted sup of the first test-function error: proof-displayed "
            "coefficient p q versus moment-derived p^2 q, judged against the "
            f"measured grid sup at resolution {resolution} (smooth rule, n=50)",
            diag.nu1_analytic_printed,
            diag.supnorms[1],
        )
    )

    # Second-moment leading coefficient, exact arithmetic.
    params = rational(Fraction(9, 10), Fraction(1, 2))
    printed_m2 = moment_closed(2, 5, 1, params, variant=VARIANT_PRINTED)
    oracle_m2 = brute_force_moment(2, 5, 1, params)
    candidates.append(
        _entry(
            "second_moment_lead_coefficient",
            "closed-form second moment, leading coefficient (printed p^2 q^3, "
            "derived p^3 q^3; exact at n=5, p=9/10, q=1/2, x=1)",
            printed_m2,
            oracle_m2,
        )
    )

    # Bivariate moment items, exact arithmetic.
    bp = BivariateParams(
        params1=rational(Fraction(9, 10), Fraction(4, 5)),
        params2=rational(Fraction(19, 20), Fraction(7, 10)),
        n1=5,
        n2=4,
    )
    for j, what in ((1, "first-axis"), (2, "second-axis"), (3, "quadratic")):
        printed = bivariate_moment(j, bp, 2, 1, variant=VARIANT_PRINTED)
        oracle = brute_force_moment_2d(j, bp, 2, 1)
        candidates.append(
            _entry(
                f"bivariate_moment_j{j}",
                f"bivariate {what} moment: displayed prefactors versus the "
                "tensor-factorized form the double sum confirms "
                "(exact at n1=5, n2=4, x=2, y=1)",
                printed,
                oracle,
            )
        )

    # Per-axis rate functional versus the exact second moment.
    params1 = rational(Fraction(19, 20), Fraction(9, 10))
    printed_d = delta_n1(1, 10, params1, variant=VARIANT_PRINTED)
    oracle_d = second_moment_brute(10, 1, params1)
    candidates.append(
        _entry(
            "bivariate_rate_functional",
            "per-axis rate functional as displayed (prefactors dropped from "
            "all three terms) versus the exact second moment "
            "(exact at n=10, p=19/20, q=9/10, x=1)",
            printed_d,
            oracle_d,
        )
    )

    # Claimed sup bound on the rate functional versus the measured grid sup.
    pf = floating(0.95, 0.9)
    n = 5
    grid = u_grid(resolution)
    sup_meas = float(np.max(np.atleast_1d(delta_n1(grid.xs, n, pf, variant=VARIANT_PRINTED))))
    candidates.append(
        _entry(
            "rate_functional_sup_chain",
            "claimed sup bound 1/(n+1)^2 for the per-axis rate functional "
            f"versus its measured grid sup (n=5, p=0.95, q=0.9, resolution {resolution}); "
            "the claim fails even for the exact second moment",
            1.0 / (n + 1) ** 2,
            sup_meas,
        )
    )

    # Constant member of the bivariate test quadruple: displayed as zero,
    # but a Korovkin set needs the constant one.
    candidates.append(
        _entry(
            "bivariate_test_quadruple_constant",
            "constant member of the bivariate test quadruple (displayed 0, "
            "implemented 1: a zero constant certifies nothing)",
            0,
            1,
        )
    )

    # Rate bound for a constant function: the modulus side vanishes while the
    # prefactor keeps the left side at |pq - 1|.
    candidates.append(
        _entry(
            "rate_bound_constant_function",
            "modulus rate bound for the constant function: bound side 0, "
            "actual error |pq - 1| (n=10, p=0.95, q=0.9)",
            0.0,
            abs(0.95 * 0.9 - 1.0),
        )
    )

    # Stancu-type bound, third term as displayed versus the measured sup of
    # the exact second moment it stands in for.
    n_s = 50
    ps = floating(0.95, 0.9)
    bn = float(pq_integer(n_s, ps))
    bnm1 = float(pq_integer(n_s - 1, ps))
    bn1 = float(pq_integer(n_s + 1, ps))
    t3_printed = 1.0 - 2.0 * 0.95 * 0.9 * bn / bn1 + 0.95 * 0.9 * bn * bnm1 / bn1**2
    m2_sup = float(np.max(second_moment_brute(n_s, u_grid(1024).xs, ps)))
    candidates.append(
        _entry(
            "stancu_bound_third_term",
            "Stancu-type bound, third term as displayed versus the measured "
            "sup of the exact second moment (n=50, p=0.95, q=0.9, resolution 1024)",
            t3_printed,
            m2_sup,
        )
    )

    # Divided-difference representation: exact residuals at small degrees.
    rep_params = rational(Fraction(9, 10), Fraction(1, 2))
    for n_r in (2, 3, 4):
        lhs, rhs = representation_sides(u, n_r, 1, rep_params)
        candidates.append(
            _entry(
                f"divided_difference_representation_n{n_r}",
                "divided-difference representation of the operator: displayed "
                f"expansion versus direct evaluation (exact, n={n_r}, "
                "p=9/10, q=1/2, x=1, f=u)",
                rhs,
                lhs,
            )
        )

    kept = []
    for entry in candidates:
        exact = isinstance(entry.printed, Fraction) and isinstance(entry.oracle, Fraction)
        tol = 0.0 if exact else FLOAT_TOLERANCE
        if entry.rel_gap > tol:
            kept.append(entry)
    return DiscrepancyReport(entries=tuple(kept))


CSV_HEADER = ("formula", "location", "printed", "oracle", "rel_gap")
