"""Canonical exact expressions on jet coordinates.

A JetExpr is a reduced ratio of two multivariate polynomials over Q in the
generators of poly.py.  The denominator is kept content-free, sign-normalized
and coprime with the numerator, so two expressions are mathematically equal
on this class iff their canonical forms are structurally identical and
``is_zero`` is a plain emptiness check on the numerator.

The abstract function symbols form a fixed derivation chain in u:

    rhat --d/du--> r --d/du--> f --d/du--> f' --d/du--> f'' --> ...

together with the opaque logarithm ``lnuc`` = ln(u+c) whose u-derivative is
1/(u+c).  The chain is what makes the antiderivative symbols of the energy
density work without a general integration operator.
"""

from __future__ import annotations

from fractions import Fraction

from .errors import DivisionByZero, InconsistentJetSubstitution, NotAPointFunction
from .poly import (
    KIND_FN,
    KIND_JET,
    KIND_PARAM,
    KIND_T,
    KIND_UNKNOWN,
    KIND_X,
    ONE,
    ZERO,
    Generator,
    Poly,
    div_exact,
    fnsym,
    jet,
    param,
    poly_gcd,
    subst_poly,
    unknown_t,
)

# u-antiderivative chain among function-symbol families.
ANTIDERIVATIVE_CHAIN = {"rhat": "r", "r": "f"}

# Reserved family names; anything else behaves like "f" (own derivative tower).
LOG_FAMILY = "lnuc"


class JetExpr:
    """Canonical rational expression; immutable and hashable."""

    __slots__ = ("num", "den", "_hash")

    def __init__(self, num: Poly, den: Poly):
        # internal: callers must pass an already-reduced pair
        self.num = num
        self.den = den
        self._hash = None

    # -- construction ----------------------------------------------------

    @staticmethod
    def _reduce(num: Poly, den: Poly) -> "JetExpr":
        if den.is_zero():
            raise DivisionByZero("denominator is identically zero")
        if num.is_zero():
            return ZERO_EXPR
        if den.is_const():
            c = den.const_value()
            if c == 1:
                return JetExpr(num, ONE)
            return JetExpr(num.scale(Fraction(1) / c), ONE)
        g = poly_gcd(num, den)
        if not g.is_const():
            num = div_exact(num, g)
            den = div_exact(den, g)
            if den.is_const():
                c = den.const_value()
                return JetExpr(num.scale(Fraction(1) / c), ONE)
        c = den.content()
        _, lead = den.leading()
        if lead < 0:
            c = -c
        if c != 1:
            den = den.scale(Fraction(1) / c)
            num = num.scale(Fraction(1) / c)
        return JetExpr(num, den)

    @classmethod
    def from_const(cls, c) -> "JetExpr":
        c = Fraction(c)
        if c == 0:
            return ZERO_EXPR
        return cls(Poly.const(c), ONE)

    @classmethod
    def from_gen(cls, g: Generator) -> "JetExpr":
        return cls(Poly.gen(g), ONE)

    # -- predicates --------------------------------------------------------

    @property
    def is_zero(self) -> bool:
        return self.num.is_zero()

    @property
    def is_rational_const(self) -> bool:
        return self.num.is_const() and self.den == ONE

    def const_value(self) -> Fraction:
        if not self.is_rational_const:
            raise ValueError("not a rational constant")
        return self.num.const_value()

    def generators(self) -> set:
        return self.num.generators() | self.den.generators()

    def top_jet(self) -> int | None:
        """Highest u_{ix} index occurring, None when jet-free."""
        best = None
        for g in self.generators():
            if g.kind == KIND_JET and (best is None or g.index > best):
                best = g.index
        return best

    def depends_only_on_t(self) -> bool:
        """True when the expression lies in ker D_x (t, unknowns, params)."""
        return all(g.kind in (KIND_T, KIND_UNKNOWN, KIND_PARAM) for g in self.generators())

    def __eq__(self, other):
        if not isinstance(other, JetExpr):
            if isinstance(other, (int, Fraction)):
                other = JetExpr.from_const(other)
            else:
                return NotImplemented
        return self.num == other.num and self.den == other.den

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.num, self.den))
        return self._hash

    # -- arithmetic --------------------------------------------------------

    def __add__(self, other) -> "JetExpr":
        other = as_expr(other)
        if self.is_zero:
            return other
        if other.is_zero:
            return self
        if self.den == other.den:
            return JetExpr._reduce(self.num + other.num, self.den)
        return JetExpr._reduce(self.num * other.den + other.num * self.den, self.den * other.den)

    __radd__ = __add__

    def __sub__(self, other) -> "JetExpr":
        return self + (-as_expr(other))

    def __rsub__(self, other) -> "JetExpr":
        return as_expr(other) + (-self)

    def __neg__(self) -> "JetExpr":
        if self.is_zero:
            return self
        return JetExpr(-self.num, self.den)

    def __mul__(self, other) -> "JetExpr":
        other = as_expr(other)
        if self.is_zero or other.is_zero:
            return ZERO_EXPR
        if self.den == ONE and other.den == ONE:
            return JetExpr(self.num * other.num, ONE)
        return JetExpr._reduce(self.num * other.num, self.den * other.den)

    __rmul__ = __mul__

    def __truediv__(self, other) -> "JetExpr":
        other = as_expr(other)
        if other.is_zero:
            raise DivisionByZero("division by zero expression")
        if self.is_zero:
            return self
        return JetExpr._reduce(self.num * other.den, self.den * other.num)

    def __rtruediv__(self, other) -> "JetExpr":
        return as_expr(other) / self

    def __pow__(self, n: int) -> "JetExpr":
        if not isinstance(n, int):
            raise TypeError("powers must be integers")
        if n == 0:
            return ONE_EXPR
        if n < 0:
            if self.is_zero:
                raise DivisionByZero("zero to a negative power")
            return JetExpr._reduce(self.den ** (-n), self.num ** (-n))
        return JetExpr(self.num ** n, self.den ** n)

    def __repr__(self):
        if self.den == ONE:
            return repr(self.num)
        return f"({self.num!r})/({self.den!r})"


ZERO_EXPR = JetExpr(ZERO, ONE)
ONE_EXPR = JetExpr(Poly.const(1), ONE)


def as_expr(v) -> JetExpr:
    if isinstance(v, JetExpr):
        return v
    if isinstance(v, (int, Fraction)):
        return JetExpr.from_const(v)
    if isinstance(v, Generator):
        return JetExpr.from_gen(v)
    raise TypeError(f"cannot interpret {v!r} as a JetExpr")


def normalize(v) -> JetExpr:
    """Canonicalize a raw value; idempotent on JetExpr."""
    return as_expr(v)


def is_zero(e: JetExpr) -> bool:
    return as_expr(e).is_zero


# -- convenience atoms ----------------------------------------------------

def x() -> JetExpr:
    return JetExpr.from_gen(Generator(KIND_X))


def t() -> JetExpr:
    return JetExpr.from_gen(Generator(KIND_T))


def u(i: int = 0) -> JetExpr:
    return JetExpr.from_gen(jet(i))


def fn(name: str = "f", k: int = 0) -> JetExpr:
    """Function-symbol atom; collapses the antiderivative chain eagerly."""
    while k > 0 and name in ANTIDERIVATIVE_CHAIN:
        name = ANTIDERIVATIVE_CHAIN[name]
        k -= 1
    return JetExpr.from_gen(fnsym(name, k))


def unk(name: str, k: int = 0) -> JetExpr:
    return JetExpr.from_gen(unknown_t(name, k))


def par(name: str) -> JetExpr:
    return JetExpr.from_gen(param(name))


def ln_shift() -> JetExpr:
    """The opaque generator ln(u+c)."""
    return JetExpr.from_gen(fnsym(LOG_FAMILY, 0))


def u_derivative_of_symbol(g: Generator) -> JetExpr:
    """d/du of a function-symbol generator, per the fixed chain."""
    if g.kind != KIND_FN:
        raise ValueError("not a function symbol")
    if g.name == LOG_FAMILY:
        return ONE_EXPR / (u() + par("c"))
    if g.index == 0 and g.name in ANTIDERIVATIVE_CHAIN:
        return JetExpr.from_gen(fnsym(ANTIDERIVATIVE_CHAIN[g.name], 0))
    return JetExpr.from_gen(fnsym(g.name, g.index + 1))


# -- calculus-free operations ----------------------------------------------

def partial(e: JetExpr, g: Generator) -> JetExpr:
    """Coordinate-wise partial derivative (function symbols held fixed)."""
    e = as_expr(e)
    if e.den == ONE:
        return JetExpr._reduce(e.num.derivative(g), ONE)
    dn = e.num.derivative(g)
    dd = e.den.derivative(g)
    if dd.is_zero():
        return JetExpr._reduce(dn, e.den)
    # (n/d)' = n'/d - (n/d) * (d'/d); reducing d'/d first keeps gcds small
    dlog = JetExpr._reduce(dd, e.den)
    return JetExpr._reduce(dn, e.den) - e * dlog


def partial_u_total(e: JetExpr) -> JetExpr:
    """d/du with the function-symbol chain rule; input must be a point function."""
    e = as_expr(e)
    for g in e.generators():
        if g.kind == KIND_JET and g.index >= 1:
            raise NotAPointFunction(f"expression depends on {g!r}")
    total = partial(e, jet(0))
    for g in e.generators():
        if g.kind == KIND_FN:
            total = total + partial(e, g) * u_derivative_of_symbol(g)
    return total


def substitute_map(e: JetExpr, mapping: dict) -> JetExpr:
    """Simultaneous replacement of generators by expressions, renormalized."""
    e = as_expr(e)
    relevant = {g: as_expr(v) for g, v in mapping.items() if g in e.generators()}
    if not relevant:
        return e
    num = subst_poly(e.num, relevant, JetExpr.from_const, JetExpr.from_gen)
    den = subst_poly(e.den, relevant, JetExpr.from_const, JetExpr.from_gen)
    return num / den


def substitute(e: JetExpr, g: Generator, v) -> JetExpr:
    """Spec substitution: replacing u rewrites every jet differentially."""
    from .calculus import total_x  # cycle broken at call time

    e = as_expr(e)
    v = as_expr(v)
    if g.kind == KIND_JET:
        jets = sorted(gg.index for gg in e.generators() if gg.kind == KIND_JET)
        if g.index == 0:
            mapping = {}
            image = v
            top = jets[-1] if jets else 0
            for i in range(0, top + 1):
                mapping[jet(i)] = image
                if i < top:
                    image = total_x(image)
            return substitute_map(e, mapping)
        if any(i > g.index for i in jets):
            raise InconsistentJetSubstitution(
                f"cannot replace u_{g.index}x alone while higher jets are present")
        return substitute_map(e, {g: v})
    return substitute_map(e, {g: v})


# -- concrete nonlinearities -------------------------------------------------

class FunctionSpec:
    """How the abstract symbols f, r, rhat specialize.

    mode "abstract"    : leave symbols untouched.
    mode "polynomial"  : f = sum(coeffs[i] * u**i); the antiderivative
                         symbols get their closed forms with zero constants.
    mode "logshift"    : f = gamma*ln(u+c) + delta via the opaque lnuc symbol.
    """

    __slots__ = ("mode", "coeffs", "gamma", "delta", "shift_name")

    def __init__(self, mode: str, coeffs=None, gamma=None, delta=None):
        self.mode = mode
        self.coeffs = tuple(as_expr(c) for c in coeffs) if coeffs is not None else None
        self.gamma = as_expr(gamma) if gamma is not None else None
        self.delta = as_expr(delta) if delta is not None else None
        self.shift_name = "c"

    @classmethod
    def abstract(cls) -> "FunctionSpec":
        return cls("abstract")

    @classmethod
    def polynomial(cls, coeffs) -> "FunctionSpec":
        return cls("polynomial", coeffs=coeffs)

    @classmethod
    def linear(cls, alpha="alpha", beta="beta") -> "FunctionSpec":
        a = par(alpha) if isinstance(alpha, str) else as_expr(alpha)
        b = par(beta) if isinstance(beta, str) else as_expr(beta)
        return cls.polynomial([b, a])

    @classmethod
    def quadratic(cls) -> "FunctionSpec":
        return cls.polynomial([0, 0, 1])

    @classmethod
    def log_shift(cls, gamma="gamma", delta="delta") -> "FunctionSpec":
        g = par(gamma) if isinstance(gamma, str) else as_expr(gamma)
        d = par(delta) if isinstance(delta, str) else as_expr(delta)
        return cls("logshift", gamma=g, delta=d)

    def __eq__(self, other):
        return (isinstance(other, FunctionSpec) and self.mode == other.mode
                and self.coeffs == other.coeffs and self.gamma == other.gamma
                and self.delta == other.delta)

    def __hash__(self):
        return hash((self.mode, self.coeffs, self.gamma, self.delta))

    def __repr__(self):
        if self.mode == "polynomial":
            return f"FunctionSpec.polynomial({list(self.coeffs)!r})"
        if self.mode == "logshift":
            return f"FunctionSpec.log_shift({self.gamma!r}, {self.delta!r})"
        return "FunctionSpec.abstract()"

    # image of the k-th u-derivative of f
    def f_image(self, k: int) -> JetExpr:
        if self.mode == "polynomial":
            uu = u()
            total = ZERO_EXPR
            for i, c in enumerate(self.coeffs):
                if i < k:
                    continue
                fall = 1
                for j in range(k):
                    fall *= i - j
                total = total + c * Fraction(fall) * uu ** (i - k)
            return total
        if self.mode == "logshift":
            uc = u() + par(self.shift_name)
            if k == 0:
                return self.gamma * ln_shift() + self.delta
            sign = Fraction(1) if k % 2 == 1 else Fraction(-1)
            fact = 1
            for j in range(1, k):
                fact *= j
            return self.gamma * (sign * fact) / uc ** k
        return fn("f", k)

    def r_image(self) -> JetExpr:
        if self.mode == "polynomial":
            uu = u()
            total = ZERO_EXPR
            for i, c in enumerate(self.coeffs):
                total = total + c * uu ** (i + 1) / (i + 1)
            return total
        if self.mode == "logshift":
            uc = u() + par(self.shift_name)
            return self.gamma * (uc * ln_shift() - uc) + self.delta * u()
        return fn("r")

    def rhat_image(self) -> JetExpr:
        if self.mode == "polynomial":
            uu = u()
            total = ZERO_EXPR
            for i, c in enumerate(self.coeffs):
                total = total + c * uu ** (i + 2) / ((i + 1) * (i + 2))
            return total
        if self.mode == "logshift":
            uc = u() + par(self.shift_name)
            return (self.gamma * uc ** 2 / 2 * ln_shift()
                    - 3 * self.gamma * uc ** 2 / 4 + self.delta * u() ** 2 / 2)
        return fn("rhat")

    def image_of(self, g: Generator) -> JetExpr | None:
        if g.kind != KIND_FN or self.mode == "abstract":
            return None
        if g.name == "f":
            return self.f_image(g.index)
        if g.name == "r":
            return self.r_image()
        if g.name == "rhat":
            return self.rhat_image()
        return None  # lnuc and unknown families stay opaque


def specialize_f(e: JetExpr, spec: FunctionSpec) -> JetExpr:
    """Rewrite every function symbol according to spec, then renormalize."""
    e = as_expr(e)
    if spec.mode == "abstract":
        return e
    mapping = {}
    for g in e.generators():
        img = spec.image_of(g)
        if img is not None:
            mapping[g] = img
    if not mapping:
        return e
    return substitute_map(e, mapping)
