"""Density, statistical-limit checks, schedules, Korovkin diagnostics."""

import math
from fractions import Fraction

import numpy as np
import pytest

from pq_approx import (
    DomainError,
    korovkin_battery,
    natural_density,
    schedule,
    schedule_arrays,
    st_limit_check,
)
from pq_approx.statistical import is_square, korovkin_sweep, schedule_params


def test_density_of_squares_exact():
    # S1: floor(sqrt(N))/N for every horizon tried.
    for horizon in (1, 2, 10, 37, 1000, 10**6):
        report = natural_density(is_square, horizon)
        assert report.count == math.isqrt(horizon)
        assert report.density == Fraction(math.isqrt(horizon), horizon)


def test_density_trivial_sets():
    evens = lambda ks: ks % 2 == 0
    assert natural_density(evens, 10**6).density == Fraction(1, 2)
    everything = lambda ks: np.ones_like(ks, dtype=bool)
    assert natural_density(everything, 1234).density == 1


def test_density_scalar_predicate_fallback():
    # A predicate that only works on scalars must give the same answer as
    # the vectorized path.
    report = natural_density(lambda k: int(k) % 3 == 0, 1000)
    assert report.count == 333


def test_st_limit_constant_sequence():
    horizons = (10, 100, 1000)
    report = st_limit_check(lambda n: 1.0, 1.0, 0.5, horizons)
    assert all(d == 0 for d in report.densities)
    assert report.consistent


def test_st_limit_square_exception_sequence():
    # x_k = l + 1 on the squares: densities are exactly floor(sqrt(N))/N.
    l = 2.0
    ks = np.arange(1, 10**6 + 1)
    xs = np.where((np.sqrt(ks).round() ** 2 == ks), l + 1.0, l)
    report = st_limit_check(xs, l, 0.5, (10**3, 10**4, 10**6))
    assert [float(d) for d in report.densities] == [0.031, 0.01, 0.001]
    assert report.densities[-1] == Fraction(1000, 10**6)
    assert report.consistent


def test_st_limit_even_exception_sequence():
    # Half the indices are exceptions: verdict must be negative.
    ks = np.arange(1, 10001)
    xs = np.where(ks % 2 == 0, 1.0, 0.0)
    report = st_limit_check(xs, 0.0, 0.5, (100, 10000))
    assert report.densities[-1] == Fraction(1, 2)
    assert not report.consistent


def test_statonly_schedule_is_st_convergent_not_classically():
    # S2: the schedule's p_n drifts to 1 off the squares but takes the value
    # 1/2 on every square, so the exception density vanishes while a
    # classical limit cannot exist.
    horizon = 10**6
    ps, _ = schedule_arrays("statonly", horizon)
    report = st_limit_check(ps, 1.0, 0.1, (10**3, 10**4, 10**6))
    assert report.consistent
    assert report.densities[-1] <= Fraction(1, 100)
    # classical-divergence witness beyond 1e5
    witness = 317**2
    assert witness > 10**5
    assert schedule("statonly", witness) == (Fraction(1, 2), Fraction(1, 4))


def test_schedule_examples():
    assert schedule("smooth", 1) == (Fraction(3, 4), Fraction(1, 2))
    assert schedule("statonly", 4) == (Fraction(1, 2), Fraction(1, 4))
    # off-square indices agree with the smooth rule
    assert schedule("statonly", 5) == schedule("smooth", 5)
    p, q = schedule("smooth", 10**9)
    assert 1 - p < 1e-8 and 1 - q < 1e-8
    with pytest.raises(DomainError):
        schedule("adhoc", 3)
    with pytest.raises(DomainError):
        schedule("smooth", 0)


def test_schedule_admissible_everywhere():
    for rule in ("smooth", "statonly"):
        for n in list(range(1, 40)) + [100, 10**4]:
            p, q = schedule(rule, n)
            assert 0 < q < p <= 1


def test_schedule_arrays_match_pointwise():
    for rule in ("smooth", "statonly"):
        ps, qs = schedule_arrays(rule, 2000)
        for n in (1, 2, 3, 4, 9, 35, 36, 1999):
            p, q = schedule(rule, n)
            assert ps[n - 1] == pytest.approx(float(p), abs=0)
            assert qs[n - 1] == pytest.approx(float(q), abs=0)


def test_korovkin_battery_smooth_400():
    # S3/S4: sup-norms and the three displayed coefficients at n = 400.
    diag = korovkin_battery("smooth", 400)
    assert all(s <= 0.02 for s in diag.supnorms)
    assert diag.alpha_n <= 1e-2
    assert diag.beta_n <= 1e-2
    assert diag.gamma_n <= 1e-2


def test_korovkin_sweep_strictly_decreasing():
    diags = korovkin_sweep("smooth", (10, 50, 200, 400))
    for nu in range(3):
        sups = [d.supnorms[nu] for d in diags]
        assert all(a > b for a, b in zip(sups, sups[1:])), (nu, sups)


def test_korovkin_analytic_crosschecks():
    # nu=0 sup-norm is |p q - 1| exactly (constants map to pq); nu=1 matches
    # the moment-derived coefficient times the largest grid u.
    diag = korovkin_battery("smooth", 50)
    p, q = (float(v) for v in schedule("smooth", 50))
    assert diag.supnorms[0] == pytest.approx(abs(p * q - 1), abs=1e-12)
    assert diag.supnorms[1] == pytest.approx(diag.nu1_analytic, abs=1e-10)
    # the proof-displayed coefficient (p q instead of p^2 q) understates the
    # sup; the measured grid value sides with the moment-derived one
    assert diag.nu1_analytic_printed < diag.nu1_analytic


def test_battery_rejects_small_n():
    with pytest.raises(DomainError):
        korovkin_battery("smooth", 1)
