"""Operator family: closed moments vs brute force, reductions, Stancu shifts."""

import math
from fractions import Fraction

import numpy as np
import pytest

from pq_approx import (
    DomainError,
    GeneralizedSpec,
    VARIANT_ORACLE,
    VARIANT_PRINTED,
    bbh_classical,
    bbh_pq,
    bbh_pq_generalized,
    bbh_q,
    brute_force_moment,
    const,
    floating,
    moment_closed,
    node_weight_table,
    pq_integer,
    rational,
    sinu,
    upow,
)

RP = rational(Fraction(19, 20), Fraction(9, 10))
FP = floating(0.95, 0.9)
X_GRID = (0, Fraction(1, 2), 1, 2, 10)


def test_moments_match_brute_force_exact():
    # O1, rational half: every n up to 50, all three moments, five x values.
    for n in range(1, 51):
        for nu in (0, 1, 2):
            if nu == 2 and n < 2:
                continue
            for x in X_GRID:
                assert moment_closed(nu, n, x, RP) == brute_force_moment(nu, n, x, RP)


def test_moments_match_brute_force_float():
    # O1, float half: the log-domain kernel holds 1e-12 relative up to n = 200.
    params = floating(0.99, 0.98)
    for n in (50, 200):
        for nu in (0, 1, 2):
            for x in (0.0, 0.5, 1.0, 2.0, 10.0):
                a = moment_closed(nu, n, x, params)
                b = brute_force_moment(nu, n, x, params)
                scale = max(abs(a), abs(b), 1e-30)
                assert abs(a - b) / scale <= 1e-12


def test_printed_second_moment_differs_from_oracle():
    # The displayed nu=2 closed form carries a lead coefficient one power of p
    # short; the oracle variant is the one that matches the double sum.  The
    # two differ exactly by the lead-term coefficient gap (p^2 - p^3) q^3.
    n, x = 5, 1
    printed = moment_closed(2, n, x, RP, variant=VARIANT_PRINTED)
    oracle = moment_closed(2, n, x, RP, variant=VARIANT_ORACLE)
    assert oracle == brute_force_moment(2, n, x, RP)
    u = Fraction(1, 2)
    bn, bnm1, bn1 = (pq_integer(m, RP) for m in (n, n - 1, n + 1))
    ratio = (1 + x) / (RP.p + RP.q * x)
    lead_gap = (RP.p**2 - RP.p**3) * RP.q**3 * bn * bnm1 / bn1**2 * ratio * u**2
    assert printed - oracle == lead_gap
    assert lead_gap != 0


def test_operator_linearity():
    # O2: L(a f + b g) = a L(f) + b L(g).
    from pq_approx import RealFunction

    f, g = upow(1), upow(2)
    a, b = 2.5, -0.75
    combo = RealFunction(
        name="combo",
        fn=lambda t: a * f.fn(t) + b * g.fn(t),
        u_modulus=lambda d: (abs(a) + 2 * abs(b)) * d,
        sup_abs=abs(a) + abs(b),
    )
    for n in (3, 7):
        for x in (0.0, 0.5, 2.0):
            lhs = bbh_pq(combo, n, x, FP)
            rhs = a * bbh_pq(f, n, x, FP) + b * bbh_pq(g, n, x, FP)
            assert abs(lhs - rhs) <= 1e-13 * max(1.0, abs(rhs))


def test_operator_positivity():
    # O2: nonnegative data produce nonnegative operator values.
    for f in (upow(1), upow(2), sinu()):
        for n in (2, 5, 9):
            xs = np.linspace(0.0, 8.0, 33)
            vals = bbh_pq(f, n, xs, FP)
            assert np.all(np.asarray(vals) >= -1e-15)


def test_constant_scaling_exact():
    # O3: constants are scaled by pq, not preserved.
    for c in (1, Fraction(7, 3)):
        for n in (1, 4, 9):
            for x in (0, 1, Fraction(5, 2)):
                assert bbh_pq(const(c), n, x, RP) == c * RP.p * RP.q


def test_node_transform_identity():
    # O4: u(t_{n,k}) = p^{n+1-k} [k] / [n+1], exactly.
    for n in (1, 2, 5, 11):
        table = node_weight_table(n, RP)
        bn1 = pq_integer(n + 1, RP)
        for k, t in enumerate(table.nodes):
            want = RP.p ** (n + 1 - k) * pq_integer(k, RP) / bn1
            assert t / (1 + t) == want


def test_p_equal_one_reduction():
    # O5: at p = 1 the two-parameter operator is q times the one-parameter one
    # (the prefactor pq shrinks to q while the kernel matches).
    q = 0.5
    params = floating(1.0, q)
    f = upow(1)
    for n in (3, 5, 12):
        for x in (0.25, 1.0, 4.0):
            two = bbh_pq(f, n, x, params)
            one = bbh_q(f.fn, n, x, q)
            assert abs(two - q * one) <= 1e-13 * max(1.0, abs(two))


def test_classical_operator_values():
    # Hand-computed classical values: n=1, x=1 averages f(0) and f(1);
    # n=2, x=1 puts weights (1, 2, 1)/4 on nodes (0, 1/2, 2).
    f = upow(1)
    assert bbh_classical(f.fn, 1, 1.0) == pytest.approx(0.25, abs=1e-15)
    assert bbh_classical(f.fn, 2, 1.0) == pytest.approx(1.0 / 3.0, abs=1e-15)


def test_one_parameter_near_classical():
    # bbh_q drifts to the classical operator as q -> 1 (loose: limit check).
    f = upow(1)
    for n in (3, 6):
        for x in (0.5, 2.0):
            near = bbh_q(f.fn, n, x, 0.99999)
            classical = bbh_classical(f.fn, n, x)
            assert abs(near - classical) <= 1e-3


def test_operator_rejects_equal_parameters():
    # Construction tolerates p = q (the arithmetic layer is fine with it),
    # but the operator family is defined on q < p only.
    params = floating(1.0, 1.0)
    with pytest.raises(DomainError):
        bbh_pq(upow(1), 3, 1.0, params)


def test_generalized_reduces_to_base():
    # O6: gamma = beta = 0 gives back the base operator exactly.
    spec = GeneralizedSpec()
    f = upow(1)
    for n in (1, 3, 8):
        for x in (0, Fraction(1, 2), 3):
            assert bbh_pq_generalized(f, n, x, RP, spec) == bbh_pq(f, n, x, RP)


def test_generalized_shift_moves_nodes():
    spec = GeneralizedSpec(gamma=Fraction(1, 10), beta=Fraction(1, 5))
    f = upow(1)
    base = bbh_pq(f, 4, 1, RP)
    shifted = bbh_pq_generalized(f, 4, 1, RP, spec)
    assert shifted != base


def test_generalized_consistency_residuals():
    # The default denominator rule satisfies the node-sum consistency exactly.
    spec = GeneralizedSpec(gamma=Fraction(1, 10), beta=Fraction(1, 5))
    residuals = spec.consistency_residuals(6, RP)
    assert all(r == 0 for r in residuals)


def test_weight_rows_normalized():
    table = node_weight_table(12, FP)
    xs = np.array([0.0, 0.01, 0.5, 1.0, 7.5, 300.0])
    rows = table.weight_rows(xs)
    np.testing.assert_allclose(rows.sum(axis=1), 1.0, rtol=0, atol=5e-15)
    assert np.all(rows >= 0)
    # x = 0 concentrates all mass on k = 0
    assert rows[0, 0] == 1.0


def test_operator_input_validation():
    f = upow(1)
    with pytest.raises(DomainError):
        bbh_pq(f, 0, 1.0, FP)
    with pytest.raises(DomainError):
        bbh_pq(f, 3, -0.5, FP)
    with pytest.raises(DomainError):
        bbh_q(f.fn, 3, 1.0, 1.5)
