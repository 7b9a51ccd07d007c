"""Rate machinery: moduli, delta functional, bound checks, divided differences."""

from fractions import Fraction

import numpy as np
import pytest

from pq_approx import (
    ALL_OF_R_PLUS,
    DomainError,
    LipschitzSpec,
    VARIANT_ORACLE,
    VARIANT_PRINTED,
    certify_lipschitz,
    const,
    delta_n,
    distance_to_set,
    divided_difference,
    floating,
    lipschitz_class_bound_check,
    modulus_tilde,
    node_weight_table,
    rate_bound_check,
    rational,
    representation_residual,
    representation_sides,
    representation_sides_corrected,
    sinu,
    sup_norm,
    u_grid,
    upow,
)
from pq_approx.rates import second_moment_brute

FP = floating(0.95, 0.9)
RP = rational(Fraction(9, 10), Fraction(1, 2))


def test_modulus_monotone_in_delta():
    # R1
    for f in (upow(1), upow(2), sinu()):
        values = [modulus_tilde(f, d) for d in (0.0, 0.01, 0.05, 0.1, 0.3, 0.7, 1.0)]
        assert all(a <= b for a, b in zip(values, values[1:]))
        assert values[0] == 0.0


def test_modulus_of_u_is_identity_on_grid():
    # For f = u the u-distance and the function increment coincide, so the
    # table reproduces delta itself at grid-aligned arguments.
    for d in (0.25, 0.5, 1.0 / 16.0):
        assert modulus_tilde(upow(1), d) == pytest.approx(d, abs=1e-12)


def test_delta_nonnegative_on_grid():
    # R2: both variants, several parameter pairs, full default grid.
    xs = u_grid(1024).xs
    for p, q in ((0.95, 0.9), (0.99, 0.5), (0.8, 0.7)):
        params = floating(p, q)
        for n in (2, 5, 10, 50):
            for variant in (VARIANT_PRINTED, VARIANT_ORACLE):
                d = delta_n(xs, n, params, variant=variant)
                assert np.all(d >= 0.0), (p, q, n, variant)


def test_delta_zero_at_origin():
    # R2: exact zero at x = 0.
    assert delta_n(0, 7, RP) == 0
    assert delta_n(0.0, 7, FP) == 0.0
    assert delta_n(0, 7, RP, variant=VARIANT_ORACLE) == 0


def test_delta_oracle_is_the_second_moment():
    # The oracle variant agrees with direct exact summation of
    # L((u(t) - u(x))^2; x); the printed variant majorizes it.
    for n in (3, 8):
        for x in (Fraction(1, 2), 1, 3):
            oracle = delta_n(x, n, RP, variant=VARIANT_ORACLE)
            brute = second_moment_brute(n, x, RP)
            assert oracle == brute
            assert delta_n(x, n, RP, variant=VARIANT_PRINTED) >= oracle


def test_rate_bound_for_u():
    # R3 / acceptance 4: the displayed bound holds for f = u at every grid
    # point, for several admissible schedules.
    for p, q in ((0.95, 0.9), (0.99, 0.8)):
        params = floating(p, q)
        for n in (5, 10, 50):
            report = rate_bound_check(upow(1), n, params, resolution=4096)
            assert report.all_passed, (p, q, n, report.worst_margin)
            assert len(report.rows) == 4096


def test_rate_bound_report_structure():
    report = rate_bound_check(sinu(), 10, FP, resolution=256)
    assert report.f_name == sinu().name
    assert report.n == 10
    assert report.slack > 0
    for row in report.rows:
        assert row.margin == pytest.approx(row.bound - row.lhs, abs=1e-15)
        assert row.passed == (row.margin >= -report.slack)


def test_rate_bound_constant_is_a_known_violation():
    # The operator maps 1 to pq, so the error is |pq - 1| while the modulus
    # bound is 0; the check reports it honestly instead of passing.
    report = rate_bound_check(const(1), 10, FP, resolution=64)
    assert not report.all_passed
    assert report.worst_margin == pytest.approx(-(1.0 - 0.95 * 0.9), abs=1e-12)


def test_lipschitz_bound_reduces_on_full_halfline():
    # R4: with E the whole half line the distance term contributes nothing,
    # so the bound column is exactly M * delta^(alpha/2).
    f = upow(1)
    spec = LipschitzSpec(alpha=1.0, M=1.0, E=ALL_OF_R_PLUS)
    n = 8
    report = lipschitz_class_bound_check(spec, f, n, FP, resolution=512)
    xs = u_grid(512).xs
    deltas = delta_n(xs, n, FP)
    for row, x, d in zip(report.rows, xs, deltas):
        assert row.x == x
        assert row.bound == max(d, 0.0) ** 0.5  # M = 1, alpha = 1
    assert report.all_passed


def test_lipschitz_bound_with_anchor_set():
    # Finite E turns on the 2 M d(x,E)^alpha term; far from E the bound
    # grows accordingly.
    f = upow(1)
    spec = LipschitzSpec(alpha=1.0, M=1.0, E=(0.0, 1.0))
    report = lipschitz_class_bound_check(spec, f, 6, FP, xgrid=[0.5, 1.0, 4.0])
    b_near = report.rows[1].bound
    b_far = report.rows[2].bound
    assert b_far > b_near
    d = delta_n(np.array([4.0]), 6, FP)[0]
    assert b_far == pytest.approx(d**0.5 + 2.0 * 3.0, rel=1e-12)


def test_certify_lipschitz_for_u():
    # u is 1-Lipschitz in the u metric with constant exactly 1.
    spec = LipschitzSpec(alpha=1.0, M=1.0)
    measured = certify_lipschitz(spec, upow(1))
    assert measured == pytest.approx(1.0, abs=1e-12)


def test_distance_to_set():
    assert distance_to_set(3.7) == 0.0
    assert distance_to_set(3.7, ALL_OF_R_PLUS) == 0.0
    assert distance_to_set(3.0, (0.0, 1.0)) == 2.0
    assert distance_to_set(0.25, (0.0, 1.0)) == 0.25
    with pytest.raises(DomainError):
        distance_to_set(1.0, ())


def test_divided_difference_examples():
    # First order on t^2 is the sum of the endpoints; u on (1, 2) gives 1/6.
    sq = lambda t: t * t
    assert divided_difference((Fraction(1, 3), Fraction(5, 2)), sq) == Fraction(1, 3) + Fraction(5, 2)
    assert divided_difference((1, 2), upow(1)) == pytest.approx(1.0 / 6.0, abs=1e-15)
    # Second order on t^2 is identically 1.
    assert divided_difference((0.0, 0.5, 2.0), sq) == pytest.approx(1.0, abs=1e-14)


def test_divided_difference_permutation_symmetry():
    # R5
    f = sinu()
    a, b, c = 0.3, 1.7, 4.2
    base = divided_difference((a, b, c), f)
    import itertools

    for perm in itertools.permutations((a, b, c)):
        got = divided_difference(perm, f)
        assert abs(got - base) <= 1e-13 * max(1.0, abs(base))
    # exact in Rational mode
    pts = (Fraction(1, 3), Fraction(3, 2), Fraction(7, 2))
    exact = divided_difference(pts, upow(1))
    for perm in itertools.permutations(pts):
        assert divided_difference(perm, upow(1)) == exact


def test_divided_difference_rejects_bad_points():
    with pytest.raises(DomainError):
        divided_difference((1.0,), upow(1))
    with pytest.raises(DomainError):
        divided_difference((1.0, 1.0), upow(1))
    with pytest.raises(DomainError):
        divided_difference((0.5, 1.0, 0.5), upow(1))


def test_sup_norm_monotone_in_resolution():
    # R6: finer grids only reveal more of a monotone |g|.
    g = upow(1)
    values = [sup_norm(g, res) for res in (128, 512, 2048)]
    assert values[0] <= values[1] <= values[2]
    assert sup_norm(g, 512) == sup_norm(g, 512)


def test_representation_residual_const():
    # Constants kill every divided difference, so the displayed expansion
    # returns 0 while the left side is pq - 1.
    res = representation_residual(const(1), 3, 1, RP)
    assert res == abs(RP.p * RP.q - 1)


def test_representation_residual_is_nonzero_for_u():
    # Diagnostic, not asserted zero: the displayed exponents do not survive
    # exact evaluation, and the residual measures the drift.
    for n in (2, 3, 4):
        res = representation_residual(upow(1), n, 1, RP)
        assert isinstance(res, Fraction)
        assert res > 0


def test_representation_corrected_is_exact():
    # Re-derived bookkeeping: lhs == rhs exactly in Rational mode, which
    # localizes the printed-form residual to the display itself.
    for f in (upow(1), upow(2), const(1)):
        for n in (2, 3, 4, 6):
            for x in (1, Fraction(3, 2)):
                lhs, rhs = representation_sides_corrected(f, n, x, RP)
                assert lhs == rhs, (f.name, n, x)


def test_representation_excluded_points_raise():
    table = node_weight_table(3, RP)
    bad_x = table.nodes[2]
    with pytest.raises(DomainError):
        representation_sides(upow(1), 3, bad_x, RP)
    # pivot collision: choose x so that px/q hits node k=2
    pivot_x = table.nodes[2] * RP.q / RP.p
    with pytest.raises(DomainError):
        representation_sides(upow(1), 3, pivot_x, RP)
    with pytest.raises(DomainError):
        representation_sides(upow(1), 3, 0, RP)


def test_delta_rejects_bad_inputs():
    with pytest.raises(DomainError):
        delta_n(1.0, 0, FP)
    with pytest.raises(DomainError):
        delta_n(1.0, 5, FP, variant="folklore")
