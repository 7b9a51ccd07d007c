"""Two-parameter bracket calculus: brackets, factorials, binomials, Euler products.

The bracket of a nonnegative integer n under parameters 0 < q <= p <= 1 is

    [n] = p^(n-1) + p^(n-2) q + ... + p q^(n-2) + q^(n-1),

equal to (p^n - q^n)/(p - q) whenever p != q.  Evaluation always uses the sum
form: it is exact on rational inputs, it does not suffer the cancellation of
the quotient form when p is close to q, and it extends continuously to p == q
(where the bracket degenerates to n p^(n-1)).

Two arithmetic modes are supported and never mixed.  Float mode works in
binary64, sums term lists with math.fsum, and switches the Euler sum to
log-domain accumulation for large degrees.  Rational mode works in
fractions.Fraction end to end and is the arbiter in every printed-versus-oracle
comparison downstream.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Union

import numpy as np

Number = Union[float, Fraction]

MODE_FLOAT = "float"
MODE_RATIONAL = "rational"
MODES = (MODE_FLOAT, MODE_RATIONAL)

# Degree above which float-mode Euler sums accumulate in log domain.
LOG_DOMAIN_THRESHOLD = 64


class DomainError(ValueError):
    """Raised when parameters or arguments leave the admissible domain."""


@dataclass(frozen=True)
class PQParams:
    """Parameter pair (p, q) with 0 < q <= p <= 1, tagged with an arithmetic mode.

    p == q is admitted here as the continuous extension of the calculus;
    operator constructors that require q < p strictly re-impose it themselves.
    """

    p: Number
    q: Number
    mode: str = MODE_FLOAT

    def __post_init__(self) -> None:
        if self.mode not in MODES:
            raise DomainError(f"unknown mode {self.mode!r}; expected one of {MODES}")
        if self.mode == MODE_RATIONAL:
            object.__setattr__(self, "p", Fraction(self.p))
            object.__setattr__(self, "q", Fraction(self.q))
        else:
            object.__setattr__(self, "p", float(self.p))
            object.__setattr__(self, "q", float(self.q))
        if not (0 < self.q <= self.p <= 1):
            raise DomainError(f"need 0 < q <= p <= 1, got p={self.p}, q={self.q}")

    @property
    def is_rational(self) -> bool:
        return self.mode == MODE_RATIONAL

    def one(self) -> Number:
        return Fraction(1) if self.is_rational else 1.0

    def zero(self) -> Number:
        return Fraction(0) if self.is_rational else 0.0

    def coerce(self, value) -> Number:
        """Bring a scalar into this mode's number type."""
        return Fraction(value) if self.is_rational else float(value)

    def require_strict(self) -> None:
        """Insist on q < p, the regime the operator family is defined on."""
        if self.q == self.p:
            raise DomainError("operator requires q < p strictly")


def floating(p: float, q: float) -> PQParams:
    return PQParams(p, q, MODE_FLOAT)


def rational(p, q) -> PQParams:
    return PQParams(Fraction(p), Fraction(q), MODE_RATIONAL)


def triangle(m: int) -> int:
    """m-th triangular exponent m(m-1)/2 appearing in Euler weights."""
    return m * (m - 1) // 2


def pq_integer(n: int, params: PQParams) -> Number:
    """Bracket [n] via the sum form; [0] = 0, [1] = 1."""
    if n < 0:
        raise DomainError(f"bracket needs n >= 0, got {n}")
    if n == 0:
        return params.zero()
    p, q = params.p, params.q
    if params.is_rational:
        return sum(p ** (n - 1 - i) * q**i for i in range(n))
    return math.fsum(p ** (n - 1 - i) * q**i for i in range(n))


def pq_integers(n_max: int, params: PQParams) -> list:
    """Brackets [0], [1], ..., [n_max] as a list."""
    return [pq_integer(n, params) for n in range(n_max + 1)]


def pq_factorial(n: int, params: PQParams) -> Number:
    """Bracket factorial [n]! = [1][2]...[n], with [0]! = 1."""
    if n < 0:
        raise DomainError(f"factorial needs n >= 0, got {n}")
    out = params.one()
    for j in range(1, n + 1):
        out = out * pq_integer(j, params)
    return out


def pq_binomial(n: int, k: int, params: PQParams) -> Number:
    """Bracket binomial [n]! / ([k]! [n-k]!), zero outside 0 <= k <= n.

    Evaluated by the multiplicative recurrence
    binom(n, k) = binom(n, k-1) * [n-k+1] / [k], never through factorials,
    so float mode does not overflow for moderate n and rational mode stays
    exact without giant intermediate products.
    """
    if n < 0:
        raise DomainError(f"binomial needs n >= 0, got {n}")
    if k < 0 or k > n:
        return params.zero()
    k = min(k, n - k)
    out = params.one()
    for j in range(1, k + 1):
        out = out * pq_integer(n - j + 1, params) / pq_integer(j, params)
    return out


def euler_product(n: int, x: Number, params: PQParams) -> Number:
    """Product form prod_{s=0}^{n-1} (p^s + q^s x)."""
    if n < 0:
        raise DomainError(f"product needs n >= 0, got {n}")
    _check_point(x)
    p, q = params.p, params.q
    out = params.one()
    for s in range(n):
        out = out * (p**s + q**s * x)
    return out


def euler_weights_exact(n: int, params: PQParams) -> list:
    """Exact Euler weights w_k = p^T(n-k) q^T(k) binom(n, k), k = 0..n."""
    if not params.is_rational:
        raise DomainError("exact weights require rational mode")
    p, q = params.p, params.q
    weights = []
    binom = params.one()
    for k in range(n + 1):
        if k > 0:
            binom = binom * pq_integer(n - k + 1, params) / pq_integer(k, params)
        weights.append(p ** triangle(n - k) * q ** triangle(k) * binom)
    return weights


def euler_log_weights(n: int, params: PQParams) -> np.ndarray:
    """log w_k for the Euler weights, float mode, k = 0..n.

    The triangular exponents are exact integers, so the only rounding in the
    power terms is the single multiply by log p (resp. log q).  The running
    log-binomial is accumulated with Neumaier compensation to keep the
    partial sums at full precision even at degree several hundred.
    """
    if params.is_rational:
        raise DomainError("log weights are a float-mode construction")
    p, q = float(params.p), float(params.q)
    logp, logq = math.log(p), math.log(q)
    brackets = [float(b) for b in pq_integers(n + 1, params)]
    log_binom = _compensated_cumsum(
        math.log(brackets[n - j + 1]) - math.log(brackets[j]) for j in range(1, n + 1)
    )
    out = np.empty(n + 1)
    out[0] = triangle(n) * logp
    for k in range(1, n + 1):
        out[k] = triangle(n - k) * logp + triangle(k) * logq + log_binom[k - 1]
    return out


def euler_sum(n: int, x: Number, params: PQParams) -> Number:
    """Sum form sum_k p^T(n-k) q^T(k) binom(n, k) x^k of the Euler product.

    Rational mode evaluates the sum exactly.  Float mode sums directly with
    math.fsum up to degree 64 and switches to log-domain accumulation above
    that (one exponentiation per term after a max shift), which keeps the
    relative error near machine precision whenever the true value is
    representable in binary64 at all.
    """
    if n < 0:
        raise DomainError(f"sum needs n >= 0, got {n}")
    _check_point(x)
    p, q = params.p, params.q
    if params.is_rational:
        total = params.zero()
        for k, w in enumerate(euler_weights_exact(n, params)):
            total += w * x**k
        return total
    x = float(x)
    if n <= LOG_DOMAIN_THRESHOLD:
        return math.fsum(
            p ** triangle(n - k) * q ** triangle(k) * float(pq_binomial(n, k, params)) * x**k
            for k in range(n + 1)
        )
    logw = euler_log_weights(n, params)
    if x == 0.0:
        return math.exp(logw[0])
    logx = math.log(x)
    logterms = logw + np.arange(n + 1) * logx
    shift = float(np.max(logterms))
    total = math.fsum(math.exp(t - shift) for t in logterms)
    return math.exp(shift) * total


def shift_relation_residual(n: int, k: int, params: PQParams) -> Number:
    """Residual q^k [n-k+1] - ([n+1] - p^(n-k+1) [k]); identically zero.

    Kept as an explicit residual so each mode certifies its own arithmetic:
    exact zero in rational mode, zero up to rounding in float mode.
    """
    if not 0 <= k <= n:
        raise DomainError(f"need 0 <= k <= n, got k={k}, n={n}")
    p, q = params.p, params.q
    lhs = q**k * pq_integer(n - k + 1, params)
    rhs = pq_integer(n + 1, params) - p ** (n - k + 1) * pq_integer(k, params)
    return lhs - rhs


def _check_point(x) -> None:
    if x < 0:
        raise DomainError(f"arguments live on [0, infinity), got {x}")


def _compensated_cumsum(values: Iterable[float]) -> list:
    """Partial sums with Neumaier compensation."""
    total = 0.0
    comp = 0.0
    out = []
    for v in values:
        t = total + v
        if abs(total) >= abs(v):
            comp += (total - t) + v
        else:
            comp += (v - t) + total
        total = t
        out.append(total + comp)
    return out
