"""Sparse multivariate polynomials over the rationals.

This is the arithmetic substrate for the whole package: generators are the
coordinates of the jet space (x, t, u and its x-derivatives), abstract
function symbols, undetermined functions of t and named parameters.  A
monomial is a sorted tuple of (generator, exponent) pairs and a polynomial a
dict mapping monomials to Fraction coefficients, so equality of canonical
forms is plain structural equality.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd as _int_gcd


# Generator kinds, in canonical order: x < t < u_{ix} < function symbols
# < undetermined functions of t < parameters.
KIND_X = 0
KIND_T = 1
KIND_JET = 2
KIND_FN = 3
KIND_UNKNOWN = 4
KIND_PARAM = 5


class Generator:
    """One coordinate of the differential-polynomial ring (interned)."""

    __slots__ = ("kind", "name", "index", "key", "_hash")

    _cache: dict[tuple, "Generator"] = {}

    def __new__(cls, kind: int, name: str = "", index: int = 0):
        key = (kind, name, index)
        gen = cls._cache.get(key)
        if gen is None:
            gen = object.__new__(cls)
            gen.kind = kind
            gen.name = name
            gen.index = index
            gen.key = key
            gen._hash = hash(key)
            cls._cache[key] = gen
        return gen

    def __hash__(self):
        return self._hash

    def __eq__(self, other):
        return self is other

    def __lt__(self, other):
        return self.key < other.key

    def __repr__(self):
        if self.kind == KIND_X:
            return "x"
        if self.kind == KIND_T:
            return "t"
        if self.kind == KIND_JET:
            return "u" if self.index == 0 else f"u_{self.index}x"
        if self.kind == KIND_FN:
            return self.name if self.index == 0 else f"{self.name}^({self.index})"
        if self.kind == KIND_UNKNOWN:
            return self.name if self.index == 0 else f"d^{self.index}{self.name}/dt^{self.index}"
        return self.name


X = Generator(KIND_X)
T = Generator(KIND_T)


def jet(i: int) -> Generator:
    if i < 0:
        raise ValueError("jet index must be >= 0")
    return Generator(KIND_JET, "", i)


def fnsym(name: str, k: int = 0) -> Generator:
    return Generator(KIND_FN, name, k)


def unknown_t(name: str, k: int = 0) -> Generator:
    return Generator(KIND_UNKNOWN, name, k)


def param(name: str) -> Generator:
    return Generator(KIND_PARAM, name)


# A monomial is a tuple of (Generator, exponent) pairs sorted by generator
# key; the empty tuple is the constant monomial.
EMPTY_MONO: tuple = ()


def mono_mul(a: tuple, b: tuple) -> tuple:
    if not a:
        return b
    if not b:
        return a
    out = []
    i = j = 0
    la, lb = len(a), len(b)
    while i < la and j < lb:
        ga, ea = a[i]
        gb, eb = b[j]
        if ga is gb:
            out.append((ga, ea + eb))
            i += 1
            j += 1
        elif ga.key < gb.key:
            out.append(a[i])
            i += 1
        else:
            out.append(b[j])
            j += 1
    out.extend(a[i:])
    out.extend(b[j:])
    return tuple(out)


def mono_degree(m: tuple) -> int:
    return sum(e for _, e in m)


def mono_sort_key(m: tuple):
    """Fixed total order used for leading terms and deterministic output."""
    return (mono_degree(m), tuple((g.key, e) for g, e in m))


class Poly:
    """Sparse polynomial with Fraction coefficients, immutable once built."""

    __slots__ = ("terms", "_hash")

    def __init__(self, terms: dict | None = None, prune: bool = True):
        if terms is None:
            self.terms = {}
        elif prune:
            self.terms = {m: c for m, c in terms.items() if c != 0}
        else:
            self.terms = terms
        self._hash = None

    # -- constructors ---------------------------------------------------

    @classmethod
    def const(cls, c) -> "Poly":
        c = Fraction(c)
        if c == 0:
            return ZERO
        return cls({EMPTY_MONO: c}, prune=False)

    @classmethod
    def gen(cls, g: Generator) -> "Poly":
        return cls({((g, 1),): Fraction(1)}, prune=False)

    # -- predicates -----------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def is_const(self) -> bool:
        return not self.terms or (len(self.terms) == 1 and EMPTY_MONO in self.terms)

    def const_value(self) -> Fraction:
        if not self.terms:
            return Fraction(0)
        return self.terms[EMPTY_MONO]

    def generators(self) -> set:
        gens = set()
        for m in self.terms:
            for g, _ in m:
                gens.add(g)
        return gens

    def __bool__(self):
        return bool(self.terms)

    def __eq__(self, other):
        return isinstance(other, Poly) and self.terms == other.terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self.terms.items()))
        return self._hash

    # -- arithmetic -----------------------------------------------------

    def __add__(self, other: "Poly") -> "Poly":
        if not self.terms:
            return other
        if not other.terms:
            return self
        res = dict(self.terms)
        for m, c in other.terms.items():
            s = res.get(m)
            if s is None:
                res[m] = c
            else:
                s = s + c
                if s == 0:
                    del res[m]
                else:
                    res[m] = s
        return Poly(res, prune=False)

    def __sub__(self, other: "Poly") -> "Poly":
        if not other.terms:
            return self
        res = dict(self.terms)
        for m, c in other.terms.items():
            s = res.get(m)
            if s is None:
                res[m] = -c
            else:
                s = s - c
                if s == 0:
                    del res[m]
                else:
                    res[m] = s
        return Poly(res, prune=False)

    def __neg__(self) -> "Poly":
        return Poly({m: -c for m, c in self.terms.items()}, prune=False)

    def __mul__(self, other: "Poly") -> "Poly":
        if not self.terms or not other.terms:
            return ZERO
        if other.is_const():
            return self.scale(other.const_value())
        if self.is_const():
            return other.scale(self.const_value())
        res: dict = {}
        oterms = other.terms.items()
        for m1, c1 in self.terms.items():
            for m2, c2 in oterms:
                m = mono_mul(m1, m2)
                c = c1 * c2
                s = res.get(m)
                if s is None:
                    res[m] = c
                else:
                    s = s + c
                    if s == 0:
                        del res[m]
                    else:
                        res[m] = s
        return Poly(res, prune=False)

    def scale(self, c: Fraction) -> "Poly":
        if c == 0:
            return ZERO
        if c == 1:
            return self
        return Poly({m: v * c for m, v in self.terms.items()}, prune=False)

    def __pow__(self, n: int) -> "Poly":
        if n < 0:
            raise ValueError("negative power on Poly")
        result = ONE
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base if n > 1 else base
            n >>= 1
        return result

    # -- structure ------------------------------------------------------

    def degree_in(self, g: Generator) -> int:
        d = 0
        for m in self.terms:
            for gen, e in m:
                if gen is g and e > d:
                    d = e
        return d

    def coeff_of_power(self, g: Generator, k: int) -> "Poly":
        """Coefficient of g**k, as a polynomial free of g."""
        res: dict = {}
        for m, c in self.terms.items():
            e = 0
            rest = []
            for gen, ee in m:
                if gen is g:
                    e = ee
                else:
                    rest.append((gen, ee))
            if e == k:
                res[tuple(rest)] = res.get(tuple(rest), Fraction(0)) + c
        return Poly(res)

    def derivative(self, g: Generator) -> "Poly":
        res: dict = {}
        for m, c in self.terms.items():
            for idx, (gen, e) in enumerate(m):
                if gen is g:
                    if e == 1:
                        nm = m[:idx] + m[idx + 1:]
                    else:
                        nm = m[:idx] + ((gen, e - 1),) + m[idx + 1:]
                    res[nm] = res.get(nm, Fraction(0)) + c * e
                    break
        return Poly(res)

    def leading(self):
        """(monomial, coeff) maximal in the canonical monomial order."""
        if not self.terms:
            return EMPTY_MONO, Fraction(0)
        m = max(self.terms, key=mono_sort_key)
        return m, self.terms[m]

    def sorted_terms(self, reverse: bool = True):
        return sorted(self.terms.items(), key=lambda kv: mono_sort_key(kv[0]), reverse=reverse)

    def content(self) -> Fraction:
        """Positive rational c with self/c a primitive integer polynomial."""
        num = 0
        den = 1
        for c in self.terms.values():
            num = _int_gcd(num, abs(c.numerator))
            den = den * c.denominator // _int_gcd(den, c.denominator)
        if num == 0:
            return Fraction(1)
        return Fraction(num, den)

    def __repr__(self):
        if not self.terms:
            return "0"
        parts = []
        for m, c in self.sorted_terms():
            factors = [str(c)] if (c != 1 or not m) else []
            for g, e in m:
                factors.append(f"{g!r}^{e}" if e > 1 else repr(g))
            parts.append("*".join(factors))
        return " + ".join(parts)


ZERO = Poly({}, prune=False)
ONE = Poly({EMPTY_MONO: Fraction(1)}, prune=False)


# -- substitution -------------------------------------------------------

def subst_poly(p: Poly, mapping: dict, lift_const, lift_gen):
    """Evaluate p with some generators replaced by ring elements.

    Values must support +, * and ** with each other; lift_const/lift_gen
    embed rational constants and untouched generators into the target ring
    (used with JetExpr values by the expression layer).
    """
    total = None
    pow_cache: dict = {}
    for m, c in p.terms.items():
        term = lift_const(c)
        for g, e in m:
            key = (g, e)
            v = pow_cache.get(key)
            if v is None:
                base = mapping.get(g)
                v = (base if base is not None else lift_gen(g)) ** e
                pow_cache[key] = v
            term = term * v
        total = term if total is None else total + term
    return total if total is not None else lift_const(Fraction(0))


# -- exact division and gcd ---------------------------------------------

def _main_var(p: Poly) -> Generator | None:
    best = None
    for m in p.terms:
        for g, _ in m:
            if best is None or best.key < g.key:
                best = g
    return best


def _to_univariate(p: Poly, v: Generator) -> list[Poly]:
    """Dense coefficient list in v, ascending powers."""
    d = p.degree_in(v)
    coeffs = [ZERO] * (d + 1)
    buckets: list[dict] = [dict() for _ in range(d + 1)]
    for m, c in p.terms.items():
        e = 0
        rest = []
        for gen, ee in m:
            if gen is v:
                e = ee
            else:
                rest.append((gen, ee))
        key = tuple(rest)
        b = buckets[e]
        b[key] = b.get(key, Fraction(0)) + c
    for i, b in enumerate(buckets):
        coeffs[i] = Poly(b)
    return coeffs


def _from_univariate(coeffs: list[Poly], v: Generator) -> Poly:
    total = ZERO
    for e, c in enumerate(coeffs):
        if c.is_zero():
            continue
        if e == 0:
            total = total + c
        else:
            total = total + c * Poly({((v, e),): Fraction(1)}, prune=False)
    return total


def div_exact(a: Poly, b: Poly) -> Poly | None:
    """Exact quotient a/b, or None when b does not divide a."""
    if b.is_zero():
        raise ZeroDivisionError("polynomial division by zero")
    if a.is_zero():
        return ZERO
    if b.is_const():
        return a.scale(Fraction(1) / b.const_value())
    v = _main_var(b)
    ac = _to_univariate(a, v)
    bc = _to_univariate(b, v)
    db = len(bc) - 1
    lead_b = bc[-1]
    quot = [ZERO] * (len(ac) - db) if len(ac) > db else []
    rem = list(ac)
    while len(rem) - 1 >= db and any(not c.is_zero() for c in rem):
        # strip trailing zeros
        while rem and rem[-1].is_zero():
            rem.pop()
        if len(rem) - 1 < db:
            break
        q = div_exact(rem[-1], lead_b)
        if q is None:
            return None
        shift = len(rem) - 1 - db
        quot[shift] = q
        for i, c in enumerate(bc):
            rem[shift + i] = rem[shift + i] - q * c
        if not rem[-1].is_zero():
            return None
        rem.pop()
    if any(not c.is_zero() for c in rem):
        return None
    return _from_univariate(quot, v)


def _prem(a: list[Poly], b: list[Poly]) -> list[Poly]:
    """Pseudo-remainder of dense univariate coefficient lists."""
    a = list(a)
    db = len(b) - 1
    lb = b[-1]
    while True:
        while a and a[-1].is_zero():
            a.pop()
        da = len(a) - 1
        if da < db:
            return a
        shift = da - db
        la = a[-1]
        a = [c * lb for c in a]
        for i, c in enumerate(b):
            a[shift + i] = a[shift + i] - la * c
        a.pop()


def _primitive_in(coeffs: list[Poly]) -> tuple[Poly, list[Poly]]:
    cont = ZERO
    for c in coeffs:
        cont = poly_gcd(cont, c)
        if cont.is_const() and not cont.is_zero():
            cont = ONE
            break
    if cont.is_zero():
        return ONE, coeffs
    if cont == ONE:
        return ONE, coeffs
    return cont, [div_exact(c, cont) for c in coeffs]


def _mono_gcd(a: Poly, b: Poly) -> tuple:
    """Common monomial factor of all terms of a and b."""
    common: dict = None
    for p in (a, b):
        for m in p.terms:
            if common is None:
                common = dict(m)
            else:
                exps = dict(m)
                for g in list(common):
                    e = exps.get(g, 0)
                    if e < common[g]:
                        if e == 0:
                            del common[g]
                        else:
                            common[g] = e
            if not common:
                return EMPTY_MONO
    return tuple(sorted(common.items(), key=lambda kv: kv[0].key)) if common else EMPTY_MONO


def _mono_divide(p: Poly, mono: tuple) -> Poly:
    if not mono:
        return p
    mdict = dict(mono)
    res = {}
    for m, c in p.terms.items():
        out = []
        for g, e in m:
            d = mdict.get(g, 0)
            if e > d:
                out.append((g, e - d))
        res[tuple(out)] = c
    return Poly(res, prune=False)


def _var_degrees(p: Poly) -> dict:
    degs: dict = {}
    for m in p.terms:
        for g, e in m:
            if e > degs.get(g, 0):
                degs[g] = e
    return degs


def _content_wrt(p: Poly, vars_out: set) -> Poly:
    """Gcd of the coefficients of p split by monomials in vars_out."""
    buckets: dict = {}
    for m, c in p.terms.items():
        outer = []
        inner = []
        for g, e in m:
            (outer if g in vars_out else inner).append((g, e))
        buckets.setdefault(tuple(outer), {})[tuple(inner)] = c
    cont = ZERO
    for terms in buckets.values():
        cont = poly_gcd(cont, Poly(terms, prune=False))
        if cont == ONE:
            return ONE
    return cont


def poly_gcd(a: Poly, b: Poly) -> Poly:
    """Primitive gcd in Q[generators]; constants collapse to 1."""
    if a.is_zero():
        return _make_primitive(b)
    if b.is_zero():
        return _make_primitive(a)
    if a.is_const() or b.is_const():
        return ONE
    if a.terms == b.terms:
        return _make_primitive(a)
    # common monomial part, handled cheaply up front
    mono = _mono_gcd(a, b)
    if mono:
        a = _mono_divide(a, mono)
        b = _mono_divide(b, mono)
    if len(a.terms) == 1 or len(b.terms) == 1:
        res = Poly({mono: Fraction(1)}, prune=False) if mono else ONE
        return res
    da = _var_degrees(a)
    db = _var_degrees(b)
    common = set(da) & set(db)
    lead = Poly({mono: Fraction(1)}, prune=False) if mono else ONE
    if not common:
        return lead
    # the gcd of the rest only involves shared variables
    extra_a = set(da) - common
    extra_b = set(db) - common
    if extra_a:
        a = _content_wrt(a, extra_a)
        if a.is_const():
            return lead
    if extra_b:
        b = _content_wrt(b, extra_b)
        if b.is_const():
            return lead
    if extra_a or extra_b:
        inner = poly_gcd(a, b)
        return lead * inner if not inner.is_const() else lead
    # main variable: smallest worst-case degree for a tame PRS
    v = min(common, key=lambda g: (max(da[g], db[g]), g.key))
    ca, pa = _primitive_in(_to_univariate(a, v))
    cb, pb = _primitive_in(_to_univariate(b, v))
    cont = poly_gcd(ca, cb)
    if len(pa) < len(pb):
        pa, pb = pb, pa
    while True:
        r = _prem(pa, pb)
        while r and r[-1].is_zero():
            r.pop()
        if not r:
            g = pb
            break
        if len(r) == 1:
            g = [ONE]
            break
        _, r = _primitive_in(r)
        pa, pb = pb, r
    _, g = _primitive_in(g)
    res = _from_univariate(g, v)
    res = _make_primitive(res)
    if not cont.is_const():
        res = cont * res
    return lead * res if mono else res


def _make_primitive(p: Poly) -> Poly:
    if p.is_zero() or p.is_const():
        return ONE if not p.is_zero() else ZERO
    c = p.content()
    _, lead = p.leading()
    if lead < 0:
        c = -c
    return p.scale(Fraction(1) / c)
