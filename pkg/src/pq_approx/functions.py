"""Registry of test functions used by the operator, rate, and battery modules.

Everything downstream measures approximation error through the transform
u(t) = t/(1+t), which maps [0, infinity) onto [0, 1).  Each registry entry
therefore carries, besides its pointwise evaluation, an upper bound for its
modulus of continuity in the u variable; grid-based checks turn that bound
into a documented slack term.  Entries that can be evaluated in exact
rational arithmetic expose a second evaluation path for the oracle runs.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional

import numpy as np

from .pq_core import DomainError


def u_of(t):
    """Transform t -> t/(1+t); exact on Fractions, clamped to 1 at non-finite floats."""
    if isinstance(t, Fraction):
        return t / (1 + t)
    arr = np.asarray(t, dtype=float)
    with np.errstate(invalid="ignore"):
        out = np.where(np.isfinite(arr), arr / (1.0 + arr), 1.0)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class RealFunction:
    """A named function on [0, infinity) with metadata for grid checks.

    u_modulus(delta) bounds sup{|f(t) - f(s)| : |u(t) - u(s)| <= delta} from
    above; sup_abs bounds |f|.  exact_fn, when present, evaluates the same
    function on Fractions without rounding.
    """

    name: str
    fn: Callable
    u_modulus: Callable[[float], float]
    sup_abs: float
    exact_fn: Optional[Callable] = None

    def __call__(self, t):
        return self.fn(t)

    @property
    def exact_capable(self) -> bool:
        return self.exact_fn is not None

    def exact(self, t: Fraction) -> Fraction:
        if self.exact_fn is None:
            raise DomainError(f"function {self.name!r} has no exact evaluation")
        return self.exact_fn(t)


@dataclass(frozen=True)
class LipschitzSpec:
    """Holder-class certificate: |f(t) - f(s)| <= M |u(t) - u(s)|^alpha.

    E is the subset of [0, infinity) the class is taken relative to; None
    means the whole half line.
    """

    alpha: float
    M: float
    E: Optional[tuple] = None

    def __post_init__(self) -> None:
        if not 0 < self.alpha <= 1:
            raise DomainError(f"alpha must lie in (0, 1], got {self.alpha}")
        if self.M <= 0:
            raise DomainError(f"M must be positive, got {self.M}")


def const(c) -> RealFunction:
    value = float(c)

    def fn(t):
        arr = np.asarray(t, dtype=float)
        return value if arr.ndim == 0 else np.full(arr.shape, value)

    cexact = Fraction(c) if not isinstance(c, float) or c == int(c) else None
    return RealFunction(
        name=f"const({c})",
        fn=fn,
        u_modulus=lambda d: 0.0,
        sup_abs=abs(value),
        exact_fn=(lambda t: cexact) if cexact is not None else None,
    )


def upow(nu: int) -> RealFunction:
    if nu < 0:
        raise DomainError(f"exponent must be >= 0, got {nu}")
    if nu == 0:
        return const(1)
    # |u^nu| < 1 on [0, 1) and d(u^nu)/du = nu u^(nu-1) <= nu.
    return RealFunction(
        name="u" if nu == 1 else f"u{nu}",
        fn=lambda t: u_of(t) ** nu,
        u_modulus=lambda d, nu=nu: min(float(nu) * d, 1.0),
        sup_abs=1.0,
        exact_fn=lambda t, nu=nu: u_of(t) ** nu,
    )


def lip(alpha: float, M: float = 1.0, center: float = 0.5) -> RealFunction:
    """Holder witness f(t) = M |u(t) - center|^alpha, in the (alpha, M) class.

    The reverse triangle inequality for the concave power s -> s^alpha gives
    ||a - c|^alpha - |b - c|^alpha| <= |a - b|^alpha, so the certificate is
    exact, not merely empirical.
    """
    spec = LipschitzSpec(alpha=float(alpha), M=float(M))

    def fn(t, a=spec.alpha, m=spec.M, c=center):
        return m * np.abs(u_of(t) - c) ** a

    exact_fn = None
    if spec.alpha == 1.0:
        exact_fn = lambda t: Fraction(M) * abs(u_of(t) - Fraction(center))
    return RealFunction(
        name=f"lip({alpha},{M})",
        fn=fn,
        u_modulus=lambda d, a=spec.alpha, m=spec.M: m * d**a,
        sup_abs=spec.M * max(center, 1.0 - center) ** spec.alpha,
        exact_fn=exact_fn,
    )


def sinu() -> RealFunction:
    return RealFunction(
        name="sinu",
        fn=lambda t: np.sin(u_of(t)),
        u_modulus=lambda d: min(d, 2.0),
        sup_abs=1.0,
    )


def expneg() -> RealFunction:
    # In the u variable, d(e^-t)/du = -e^(-t) / (1-u)^2 peaks at 4/e.
    def fn(t):
        arr = np.asarray(t, dtype=float)
        out = np.exp(-arr)
        return float(out) if arr.ndim == 0 else out

    return RealFunction(
        name="expneg",
        fn=fn,
        u_modulus=lambda d: min(4.0 / np.e * d, 1.0),
        sup_abs=1.0,
    )


_FIXED = {
    "one": lambda: const(1),
    "u": lambda: upow(1),
    "u2": lambda: upow(2),
    "sinu": sinu,
    "expneg": expneg,
}

_PARAMETRIC = {
    "const": (const, 1),
    "upow": (lambda nu: upow(int(nu)), 1),
    "lip": (lambda a, m=1.0: lip(float(a), float(m)), (1, 2)),
}

_CALL_RE = re.compile(r"^([a-z0-9_]+)\(([^()]*)\)$")


def _parse_scalar(text: str) -> float:
    return float(Fraction(text.strip()))


def resolve(name: str) -> RealFunction:
    """Look a univariate registry function up by name, e.g. 'u2' or 'lip(0.5,1)'."""
    key = name.strip()
    if key in _FIXED:
        return _FIXED[key]()
    m = _CALL_RE.match(key)
    if m and m.group(1) in _PARAMETRIC:
        factory, arity = _PARAMETRIC[m.group(1)]
        args = [a for a in m.group(2).split(",") if a.strip()]
        counts = (arity,) if isinstance(arity, int) else arity
        if len(args) not in counts:
            raise DomainError(f"{m.group(1)} takes {counts} argument(s), got {len(args)}")
        return factory(*[_parse_scalar(a) for a in args])
    raise DomainError(f"unknown function {name!r}")


@dataclass(frozen=True)
class BivariateFunction:
    """A named function on the quarter plane with per-axis modulus bounds."""

    name: str
    fn: Callable
    u_modulus_1: Callable[[float], float]
    u_modulus_2: Callable[[float], float]
    sup_abs: float
    exact_fn: Optional[Callable] = None

    def __call__(self, s, t):
        return self.fn(s, t)

    @property
    def exact_capable(self) -> bool:
        return self.exact_fn is not None

    def grid(self, s_values: np.ndarray, t_values: np.ndarray) -> np.ndarray:
        """Evaluate on the product grid, rows indexed by s, columns by t."""
        out = self.fn(np.asarray(s_values, float)[:, None], np.asarray(t_values, float)[None, :])
        return np.broadcast_to(out, (len(s_values), len(t_values))).copy()


def tensor(g: RealFunction, h: RealFunction) -> BivariateFunction:
    """Product g(s) h(t) with moduli inherited from the factors."""
    exact_fn = None
    if g.exact_capable and h.exact_capable:
        exact_fn = lambda s, t: g.exact(s) * h.exact(t)
    return BivariateFunction(
        name=f"tensor({g.name},{h.name})",
        fn=lambda s, t: g.fn(s) * h.fn(t),
        u_modulus_1=lambda d: g.u_modulus(d) * h.sup_abs,
        u_modulus_2=lambda d: g.sup_abs * h.u_modulus(d),
        sup_abs=g.sup_abs * h.sup_abs,
        exact_fn=exact_fn,
    )


def lift_first(g: RealFunction) -> BivariateFunction:
    """g(s), constant along the second axis."""
    return BivariateFunction(
        name=f"{g.name}@1",
        fn=lambda s, t: g.fn(s) + 0.0 * np.asarray(t, float),
        u_modulus_1=g.u_modulus,
        u_modulus_2=lambda d: 0.0,
        sup_abs=g.sup_abs,
        exact_fn=(lambda s, t: g.exact(s)) if g.exact_capable else None,
    )


def lift_second(h: RealFunction) -> BivariateFunction:
    """h(t), constant along the first axis."""
    return BivariateFunction(
        name=f"{h.name}@2",
        fn=lambda s, t: h.fn(t) + 0.0 * np.asarray(s, float),
        u_modulus_1=lambda d: 0.0,
        u_modulus_2=h.u_modulus,
        sup_abs=h.sup_abs,
        exact_fn=(lambda s, t: h.exact(t)) if h.exact_capable else None,
    )


def usq_sum() -> BivariateFunction:
    """u(s)^2 + u(t)^2, the quadratic member of the bivariate test quadruple."""
    return BivariateFunction(
        name="usq_sum",
        fn=lambda s, t: u_of(s) ** 2 + u_of(t) ** 2,
        u_modulus_1=lambda d: min(2.0 * d, 1.0),
        u_modulus_2=lambda d: min(2.0 * d, 1.0),
        sup_abs=2.0,
        exact_fn=lambda s, t: u_of(s) ** 2 + u_of(t) ** 2,
    )


def lip2(alpha1: float, alpha2: float, M: float = 1.0) -> BivariateFunction:
    """Two-axis Holder witness (M/2)(|u(s)-1/2|^a1 + |u(t)-1/2|^a2)."""
    g = lip(alpha1, M / 2.0)
    h = lip(alpha2, M / 2.0)
    return BivariateFunction(
        name=f"lip2({alpha1},{alpha2},{M})",
        fn=lambda s, t: g.fn(s) + h.fn(t),
        u_modulus_1=g.u_modulus,
        u_modulus_2=h.u_modulus,
        sup_abs=g.sup_abs + h.sup_abs,
    )


def korovkin_quadruple() -> tuple:
    """The four bivariate test functions 1, u(s), u(t), u(s)^2 + u(t)^2.

    The constant member must be one: a zero constant is invariant under any
    positive linear operator and certifies nothing.
    """
    return (
        lift_first(const(1)),
        lift_first(upow(1)),
        lift_second(upow(1)),
        usq_sum(),
    )


def resolve2(name: str) -> BivariateFunction:
    """Look a bivariate registry function up by name."""
    key = name.strip()
    fixed = {
        "one": lambda: lift_first(const(1)),
        "u1": lambda: lift_first(upow(1)),
        "u2": lambda: lift_second(upow(1)),
        "usq_sum": usq_sum,
        "u1u2": lambda: tensor(upow(1), upow(1)),
    }
    if key in fixed:
        return fixed[key]()
    m = _CALL_RE.match(key)
    if m and m.group(1) == "lip2":
        args = [_parse_scalar(a) for a in m.group(2).split(",") if a.strip()]
        if len(args) not in (2, 3):
            raise DomainError(f"lip2 takes 2 or 3 arguments, got {len(args)}")
        return lip2(*args)
    if m and m.group(1) == "tensor":
        parts = [a.strip() for a in m.group(2).split(",") if a.strip()]
        if len(parts) != 2:
            raise DomainError("tensor takes exactly 2 plain function names")
        return tensor(resolve(parts[0]), resolve(parts[1]))
    raise DomainError(f"unknown bivariate function {name!r}")
