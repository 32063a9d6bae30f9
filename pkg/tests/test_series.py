import random
from fractions import Fraction

import pytest

from jetcalc import NEG_INF, RootNotInClass
from jetcalc.calculus import frechet_hat
from jetcalc.expr import as_expr, fn, par, u
from jetcalc.series import (
    PsdSeries,
    adjoint,
    binom_falling,
    commutator,
    compose,
    degree,
    dt_series,
    nth_root,
    series_power,
)

from conftest import random_expr


xi = PsdSeries.xi


def dk_abstract():
    return frechet_hat(u(5) + par("b") * u(3) + fn("f") * u(1))


def rand_series(rng, top_range=(-2, 3), slots=4, term_pool=None):
    if term_pool is None:
        term_pool = [as_expr(1), as_expr(2), u(0), u(1), par("b"), u(0) * par("b")]
    top = rng.randint(*top_range)
    coeffs = {}
    for i in range(top, top - slots, -1):
        if rng.random() < 0.7:
            coeffs[i] = rng.choice(term_pool)
    if top not in coeffs:
        coeffs[top] = rng.choice(term_pool)
    return PsdSeries.from_coeffs(coeffs, exact=False, bottom=top - slots + 1)


def test_binom_falling():
    assert binom_falling(5, 2) == 10
    assert binom_falling(5, 6) == 0
    assert binom_falling(-1, 3) == -1
    assert binom_falling(-2, 2) == 3


def test_compose_leibniz():
    got = compose(xi(1), PsdSeries.const(u(0)))
    assert got.coeff(1) == u(0) and got.coeff(0) == u(1)
    assert got.exact


def test_compose_negative_power_tail():
    got = compose(xi(-1), PsdSeries.const(u(0)), slots=4)
    # alternating-sign derivative tail of the generalized Leibniz rule
    assert got.coeff(-1) == u(0)
    assert got.coeff(-2) == -u(1)
    assert got.coeff(-3) == u(2)
    assert got.coeff(-4) == -u(3)
    assert not got.exact


def test_compose_inverse_powers():
    got = compose(xi(5), xi(-5))
    assert got == PsdSeries.const(1)
    assert got.exact


def test_commutator_examples():
    assert commutator(xi(1), PsdSeries.const(u(0))) == PsdSeries.const(u(1))
    assert commutator(xi(5), xi(3)).is_zero_on_window()
    # [hat D_K, xi] = -(D_x of the coefficients), expanded directly
    from jetcalc.calculus import total_x
    dk = dk_abstract()
    got = commutator(dk, xi(1), slots=8)
    expect = PsdSeries.from_coeffs({
        1: -total_x(fn("f")),
        0: -total_x(fn("f", 1) * u(1)),
    }, exact=True)
    assert got.agrees_with(expect)
    assert got.degree() == 1


def test_degree_examples():
    assert degree(PsdSeries.from_coeffs({3: as_expr(1), 1: u(0)})) == 3
    assert degree(PsdSeries.zero()) is NEG_INF
    assert degree(commutator(xi(1), xi(1))) is NEG_INF


def test_degree_drop_constant_leads():
    A = PsdSeries.from_coeffs({2: as_expr(1), 0: u(0)})
    B = PsdSeries.from_coeffs({3: as_expr(2), 1: u(1)})
    assert degree(commutator(A, B, slots=8)) <= 2 + 3 - 1


def test_adjoint_examples():
    got = adjoint(PsdSeries.monomial(u(0), 1))
    assert got.coeff(1) == -u(0) and got.coeff(0) == -u(1)
    assert adjoint(xi(2)) == xi(2)


def test_adjoint_involution_randomized():
    rng = random.Random(17)
    for _ in range(100):
        A = rand_series(rng)
        assert adjoint(adjoint(A)).agrees_with(A)


def test_adjoint_antihomomorphism_randomized():
    rng = random.Random(19)
    for _ in range(100):
        A = rand_series(rng)
        B = rand_series(rng)
        lhs = adjoint(compose(A, B))
        rhs = compose(adjoint(B), adjoint(A))
        assert lhs.agrees_with(rhs)


def test_compose_associativity_randomized():
    rng = random.Random(29)
    for _ in range(100):
        A, B, C = (rand_series(rng) for _ in range(3))
        assert compose(compose(A, B), C).agrees_with(compose(A, compose(B, C)))


def test_degree_additivity():
    rng = random.Random(37)
    for _ in range(60):
        A = rand_series(rng)
        B = rand_series(rng)
        assert degree(compose(A, B)) == degree(A) + degree(B)


def test_nth_root_xi5():
    R = nth_root(xi(5), 5, slots=6)
    assert R.coeff(1) == as_expr(1)
    assert all(R.coeff(i).is_zero for i in range(0, R.bottom - 1, -1))


def test_nth_root_square():
    A = compose(xi(1) + PsdSeries.const(u(0)), xi(1) + PsdSeries.const(u(0)))
    assert A.coeff(2) == as_expr(1)
    assert A.coeff(1) == 2 * u(0)
    assert A.coeff(0) == u(0) ** 2 + u(1)
    R = nth_root(A, 2, slots=6)
    assert R.coeff(1) == as_expr(1)
    assert R.coeff(0) == u(0)
    assert series_power(R, 2, slots=6).agrees_with(A)


def test_nth_root_of_linearization_symbol():
    dk = dk_abstract()
    R = nth_root(dk, 5, slots=8)
    b, f = par("b"), fn("f")
    assert R.coeff(1) == as_expr(1)
    assert R.coeff(0).is_zero
    assert R.coeff(-1) == b / 5
    assert R.coeff(-2).is_zero
    # the xi^-3 slot carries f/5 plus the b^2 correction from the ansatz
    assert R.coeff(-3) == f / 5 - 2 * b ** 2 / 25
    assert series_power(R, 5, slots=8).agrees_with(dk)


def test_nth_root_requires_rational_root():
    with pytest.raises(RootNotInClass):
        nth_root(PsdSeries.monomial(as_expr(2), 2), 2)
    R = nth_root(PsdSeries.monomial(as_expr(4), 2), 2, slots=3)
    assert R.coeff(1) == as_expr(2)
    with pytest.raises(RootNotInClass):
        nth_root(PsdSeries.from_coeffs({2: u(0)}), 2)


def test_nth_root_roundtrip_randomized_degrees():
    rng = random.Random(41)
    pool = [as_expr(1), u(0), u(1), par("b")]
    for n in (2, 3, 5):
        for _ in range(30):
            coeffs = {n: as_expr(1)}
            for i in range(n - 1, n - 4, -1):
                if rng.random() < 0.8:
                    coeffs[i] = rng.choice(pool)
            A = PsdSeries.from_coeffs(coeffs, exact=True)
            R = nth_root(A, n, slots=5)
            assert series_power(R, n, slots=5).agrees_with(A)


def test_jacobi_identity_randomized():
    rng = random.Random(43)
    pool = [as_expr(1), u(0), par("b")]
    for _ in range(60):
        A, B, C = (rand_series(rng, slots=3, term_pool=pool) for _ in range(3))
        s = commutator(A, commutator(B, C))
        s = s + commutator(B, commutator(C, A))
        s = s + commutator(C, commutator(A, B))
        assert s.is_zero_on_window()


def test_dt_series_coefficientwise(eq_abstract):
    from jetcalc.calculus import total_t
    A = PsdSeries.from_coeffs({1: u(0), 0: u(1)})
    got = dt_series(A, eq_abstract)
    assert got.coeff(1) == total_t(u(0), eq_abstract)
    assert got.coeff(0) == total_t(u(1), eq_abstract)


def test_window_bookkeeping_addition():
    A = PsdSeries.from_coeffs({2: u(0)}, exact=False, bottom=0)
    B = PsdSeries.from_coeffs({1: u(1)}, exact=True)
    C = A + B
    assert C.bottom == 0
    assert not C.exact
    with pytest.raises(IndexError):
        C.coeff(-1)
