"""Differential operators on jet expressions.

total_x / total_t are the total derivatives (D_t restricted to an evolution
equation u_t = K), frechet the linearization operator, euler the variational
derivative, and formal_x_integrate a top-order stripping inverse of D_x that
reports an irreducible residual instead of failing.
"""

from __future__ import annotations

from fractions import Fraction

from .errors import JetCalcError
from .expr import (
    FunctionSpec,
    JetExpr,
    LOG_FAMILY,
    ZERO_EXPR,
    as_expr,
    ln_shift,
    par,
    partial,
    partial_u_total,
    u,
    u_derivative_of_symbol,
    x,
)
from .poly import (
    KIND_FN,
    KIND_JET,
    KIND_T,
    KIND_UNKNOWN,
    KIND_X,
    Generator,
    fnsym,
    jet,
    unknown_t,
)


class NegativeInfinity:
    """Order/degree bottom element: the deg 0 = -oo convention."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __lt__(self, other):
        return other is not self

    def __le__(self, other):
        return True

    def __gt__(self, other):
        return False

    def __ge__(self, other):
        return other is self

    def __neg__(self):
        raise ArithmeticError("cannot negate -oo")

    def __add__(self, other):
        return self

    __radd__ = __add__

    def __repr__(self):
        return "-oo"


NEG_INF = NegativeInfinity()


class EvolutionEquation:
    """u_t = K(x, u, ..., u_nx) together with its order and f-specialization."""

    __slots__ = ("rhs", "order", "fspec", "_dx_cache", "_hash")

    def __init__(self, rhs: JetExpr, fspec: FunctionSpec | None = None):
        rhs = as_expr(rhs)
        n = rhs.top_jet()
        if n is None or n < 2:
            raise JetCalcError("evolution equation must have order >= 2")
        if partial(rhs, jet(n)).is_zero:
            raise JetCalcError("leading jet coefficient vanishes")
        for g in rhs.generators():
            if g.kind == KIND_UNKNOWN:
                raise JetCalcError("equation right-hand side cannot contain scan unknowns")
        self.rhs = rhs
        self.order = n
        self.fspec = fspec if fspec is not None else FunctionSpec.abstract()
        self._dx_cache = [rhs]
        self._hash = None

    def dx_rhs(self, i: int) -> JetExpr:
        """Cached D_x^i(K)."""
        cache = self._dx_cache
        while len(cache) <= i:
            cache.append(total_x(cache[-1]))
        return cache[i]

    def __eq__(self, other):
        return (isinstance(other, EvolutionEquation)
                and self.rhs == other.rhs and self.fspec == other.fspec)

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.rhs, self.fspec))
        return self._hash

    def __repr__(self):
        return f"EvolutionEquation(u_t = {self.rhs!r})"


def total_x(e: JetExpr) -> JetExpr:
    """D_x = d/dx + sum u_{(i+1)x} d/du_{ix}, with the function-symbol chain."""
    e = as_expr(e)
    total = ZERO_EXPR
    for g in e.generators():
        if g.kind == KIND_X:
            total = total + partial(e, g)
        elif g.kind == KIND_JET:
            total = total + partial(e, g) * JetExpr.from_gen(jet(g.index + 1))
        elif g.kind == KIND_FN:
            total = total + partial(e, g) * u_derivative_of_symbol(g) * u(1)
    return total


def total_t(e: JetExpr, eq: EvolutionEquation) -> JetExpr:
    """D_t = d/dt + sum D_x^i(K) d/du_{ix}, restricted to the equation."""
    e = as_expr(e)
    total = ZERO_EXPR
    for g in e.generators():
        if g.kind == KIND_T:
            total = total + partial(e, g)
        elif g.kind == KIND_JET:
            total = total + partial(e, g) * eq.dx_rhs(g.index)
        elif g.kind == KIND_FN:
            total = total + partial(e, g) * u_derivative_of_symbol(g) * eq.rhs
        elif g.kind == KIND_UNKNOWN:
            total = total + partial(e, g) * JetExpr.from_gen(unknown_t(g.name, g.index + 1))
    return total


def dx_power(e: JetExpr, k: int) -> JetExpr:
    for _ in range(k):
        e = total_x(e)
    return e


def du_coefficient(F: JetExpr, j: int) -> JetExpr:
    """dF/du_{jx}; for j = 0 the function-symbol chain rule is folded in."""
    F = as_expr(F)
    c = partial(F, jet(j))
    if j == 0:
        for g in F.generators():
            if g.kind == KIND_FN:
                c = c + partial(F, g) * u_derivative_of_symbol(g)
    return c


def order(F: JetExpr):
    """deg of the linearization symbol; NEG_INF for jet- and u-free input."""
    F = as_expr(F)
    top = F.top_jet()
    if top is not None:
        for j in range(top, 0, -1):
            if not partial(F, jet(j)).is_zero:
                return j
    if not du_coefficient(F, 0).is_zero:
        return 0
    return NEG_INF


def frechet(F: JetExpr, Q: JetExpr) -> JetExpr:
    """Linearization of F applied to Q: sum dF/du_{jx} * D_x^j(Q)."""
    F = as_expr(F)
    Q = as_expr(Q)
    n = order(F)
    if n is NEG_INF:
        return ZERO_EXPR
    total = ZERO_EXPR
    dq = Q
    for j in range(0, n + 1):
        c = du_coefficient(F, j)
        if not c.is_zero:
            total = total + c * dq
        if j < n:
            dq = total_x(dq)
    return total


def frechet_hat(F: JetExpr):
    """Symbol of the linearization: coefficients dF/du_{jx} on xi^j."""
    from .series import PsdSeries

    F = as_expr(F)
    n = order(F)
    if n is NEG_INF:
        return PsdSeries.zero()
    coeffs = {j: du_coefficient(F, j) for j in range(0, n + 1)}
    return PsdSeries.from_coeffs(coeffs, exact=True)


def euler(F: JetExpr) -> JetExpr:
    """Variational derivative sum_{i>=0} (-D_x)^i dF/du_{ix}.

    The i = 0 term is included: it is required for the catalog identities
    (e.g. the variational derivative of u^2 must be 2u).
    """
    F = as_expr(F)
    n = F.top_jet()
    if n is None:
        n = 0
    total = ZERO_EXPR
    sign = 1
    for i in range(0, n + 1):
        c = du_coefficient(F, i)
        if not c.is_zero:
            total = total + Fraction(sign) * dx_power(c, i)
        sign = -sign
    return total


# -- formal integration in x -------------------------------------------------


def _poly_in_gen(e: JetExpr, g: Generator) -> list[JetExpr] | None:
    """Coefficient list of e in powers of g, or None when g divides the
    denominator (rational dependence)."""
    if g in e.den.generators():
        return None
    d = e.num.degree_in(g)
    out = []
    for k in range(d + 1):
        out.append(JetExpr._reduce(e.num.coeff_of_power(g, k), e.den))
    return out


def _shifted_poly_in_u(e: JetExpr, c: JetExpr) -> list[JetExpr] | None:
    """Coefficients of e as a polynomial in (u + c); None if not polynomial in u."""
    coeffs = _poly_in_gen(e, jet(0))
    if coeffs is None:
        return None
    # Taylor shift: expand each u^k as ((u+c) - c)^k by binomials
    shifted = [ZERO_EXPR] * len(coeffs)
    for k, a in enumerate(coeffs):
        for j in range(0, k + 1):
            b = Fraction(1)
            for m in range(j):
                b = b * (k - m) / (m + 1)
            shifted[j] = shifted[j] + a * b * (-c) ** (k - j)
    return shifted


def _integrate_rational_u(R: JetExpr) -> JetExpr | None:
    """Antiderivative in u of a symbol-free rational function whose
    denominator is a power of (u+c); the residue slot produces ln(u+c)."""
    ugen = jet(0)
    if ugen not in R.den.generators():
        coeffs = _poly_in_gen(R, ugen)
        if coeffs is None:
            return None
        uu = u()
        total = ZERO_EXPR
        for k, a in enumerate(coeffs):
            total = total + a * uu ** (k + 1) / (k + 1)
        return total
    dec = _uc_decomposition(R)
    if dec is None:
        return None
    uc = u() + par("c")
    total = ZERO_EXPR
    for q, a in dec.items():
        if q == -1:
            total = total + a * ln_shift()
        else:
            total = total + a * uc ** (q + 1) / (q + 1)
    return total


def _uc_decomposition(R: JetExpr) -> dict[int, JetExpr] | None:
    """Write R as sum a_q (u+c)^q with u-free coefficients, or None."""
    ugen = jet(0)
    uc = u() + par("c")
    k = 0
    rest = R
    while ugen in rest.den.generators():
        k += 1
        rest = rest * uc
        if k > 64:
            return None
    shifted = _shifted_poly_in_u(rest, par("c"))
    if shifted is None:
        return None
    out: dict[int, JetExpr] = {}
    for j, a in enumerate(shifted):
        if a.is_zero:
            continue
        if any(g.kind in (KIND_JET, KIND_FN) for g in a.generators()):
            return None
        out[j - k] = a
    return out


# depth of a symbol in the antiderivative chain rhat -> r -> f -> f' -> ...
def _symbol_depth(g: Generator) -> int | None:
    if g.name == "f":
        return g.index
    if g.name == "r" and g.index == 0:
        return -1
    if g.name == "rhat" and g.index == 0:
        return -2
    return None


def _symbol_at_depth(d: int) -> Generator:
    if d == -2:
        return fnsym("rhat", 0)
    if d == -1:
        return fnsym("r", 0)
    return fnsym("f", d)


def _antiderivative_u(A: JetExpr) -> JetExpr | None:
    """Antiderivative of A with respect to u inside the rational class
    extended by the f/r/rhat tower and ln(u+c).

    The tower is handled by top-symbol stripping: the u-derivation maps each
    chain symbol to the next one, exactly like D_x on jets, so an exact
    expression is affine in its deepest symbol and the integral is rebuilt
    by integrating that coefficient with respect to the predecessor symbol.
    ln(u+c) powers integrate by parts after splitting off the residue term.
    """
    if A.is_zero:
        return ZERO_EXPR
    fams = [g for g in A.generators() if g.kind == KIND_FN]
    if any(g.name == LOG_FAMILY for g in fams):
        if any(g.name != LOG_FAMILY for g in fams):
            return None
        return _integrate_lnuc(A)
    if not fams:
        return _integrate_rational_u(A)
    if any(g.kind in (KIND_FN, KIND_JET) for g in A.den.generators()):
        return None
    zeta = ZERO_EXPR
    rem = A
    while True:
        fams = [g for g in rem.generators() if g.kind == KIND_FN]
        if not fams:
            tail = _integrate_rational_u(rem)
            if tail is None:
                return None
            return zeta + tail
        depths = []
        for g in fams:
            d = _symbol_depth(g)
            if d is None:
                return None
            depths.append((d, g))
        d, H = max(depths, key=lambda t: t[0])
        if d <= -2:
            return None  # nothing integrates to rhat
        if rem.num.degree_in(H) != 1 or H in rem.den.generators():
            return None
        A_H = partial(rem, H)
        P = _symbol_at_depth(d - 1)
        coeffs = _poly_in_gen(A_H, P)
        if coeffs is None:
            return None
        Pe = JetExpr.from_gen(P)
        C = ZERO_EXPR
        for k, a in enumerate(coeffs):
            C = C + a * Pe ** (k + 1) / (k + 1)
        zeta = zeta + C
        rem = rem - partial_u_total(C)


def _integrate_lnuc(A: JetExpr) -> JetExpr | None:
    """Antiderivative of a polynomial in ln(u+c) with rational coefficients."""
    L = fnsym(LOG_FAMILY, 0)
    if L in A.den.generators():
        return None
    coeffs = _poly_in_gen(A, L)
    if coeffs is None:
        return None
    total = ZERO_EXPR
    for p, Cp in enumerate(coeffs):
        piece = _integrate_lnuc_power(Cp, p)
        if piece is None:
            return None
        total = total + piece
    return total


def _integrate_lnuc_power(R: JetExpr, p: int) -> JetExpr | None:
    """Integral of R(u) * ln(u+c)^p du for rational R, by parts on p."""
    if R.is_zero:
        return ZERO_EXPR
    if p == 0:
        return _integrate_rational_u(R)
    uc = u() + par("c")
    Le = ln_shift()
    dec = _uc_decomposition(R) if jet(0) in R.den.generators() else None
    residue = ZERO_EXPR
    if dec is not None:
        residue = dec.get(-1, ZERO_EXPR)
    elif jet(0) in R.den.generators():
        return None
    rest = R - residue / uc
    total = residue * Le ** (p + 1) / (p + 1)
    IR = _integrate_rational_u(rest)
    if IR is None or fnsym(LOG_FAMILY, 0) in IR.generators():
        return None
    tail = _integrate_lnuc_power(IR / uc, p - 1)
    if tail is None:
        return None
    return total + IR * Le ** p - p * tail


def formal_x_integrate(F: JetExpr) -> tuple[JetExpr, JetExpr]:
    """Split F = D_x(zeta) + residual by repeated top-order stripping.

    The residual is irreducible for the stripping algorithm; elements of
    ker D_x (pure functions of t and parameters) are returned unchanged as
    residual so callers can treat them as integration-constant material.
    """
    F = as_expr(F)
    zeta = ZERO_EXPR
    rem = F
    while True:
        m = rem.top_jet()
        if m is None or m == 0:
            break
        if jet(m) in rem.den.generators():
            return zeta, rem
        if rem.num.degree_in(jet(m)) != 1:
            return zeta, rem
        A = partial(rem, jet(m))
        if m >= 2:
            coeffs = _poly_in_gen(A, jet(m - 1))
            if coeffs is None:
                return zeta, rem
            C = ZERO_EXPR
            low = JetExpr.from_gen(jet(m - 1))
            for k, a in enumerate(coeffs):
                C = C + a * low ** (k + 1) / (k + 1)
        else:
            C = _antiderivative_u(A)
            if C is None:
                return zeta, rem
        zeta = zeta + C
        rem = rem - total_x(C)
    # remaining order <= 0: u-dependence cannot be integrated in x
    gens = rem.generators()
    if any(g.kind in (KIND_JET, KIND_FN) for g in gens):
        return zeta, rem
    xgen = Generator(KIND_X)
    if xgen in rem.den.generators():
        return zeta, rem
    coeffs = _poly_in_gen(rem, xgen)
    if coeffs is None:
        return zeta, rem
    residual = coeffs[0] if coeffs else ZERO_EXPR
    xx = x()
    for k in range(1, len(coeffs)):
        zeta = zeta + coeffs[k] * xx ** (k + 1) / (k + 1)
    return zeta, residual
