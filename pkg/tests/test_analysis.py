import random
from fractions import Fraction

import pytest

from jetcalc import (
    InsufficientPrecision,
    NotConserved,
    UnsupportedEquationShape,
)
from jetcalc.analysis import (
    conservation_residual,
    formal_symmetry_residual,
    formal_symmetry_scan,
    is_conserved_density,
    is_trivial_density,
    characteristic_of_density,
    rank_of,
    reconstruct_flux,
    solve_linear_ansatz,
    split_by_free_monomials,
    symmetry_from_density,
    symmetry_residual,
)
from jetcalc.calculus import EvolutionEquation, euler, frechet_hat, total_t, total_x
from jetcalc.expr import FunctionSpec, as_expr, fn, par, specialize_f, t, u, unk, x
from jetcalc.series import PsdSeries

from conftest import random_expr

b, alpha, beta = par("b"), par("alpha"), par("beta")


def test_symmetry_residual_translations(eq_abstract):
    # space translation
    assert symmetry_residual(eq_abstract, u(1)).is_zero
    # time translation: the right-hand side itself
    assert symmetry_residual(eq_abstract, eq_abstract.rhs).is_zero


def test_symmetry_residual_u_is_not_a_symmetry(eq_abstract):
    got = symmetry_residual(eq_abstract, u(0))
    assert got == -fn("f", 1) * u(0) * u(1)


def test_symmetry_residual_galilean(eq_linear):
    q3 = t() * u(1) + 1 / alpha
    assert symmetry_residual(eq_linear, q3).is_zero


def test_conservation_residual(eq_abstract):
    sigma1 = u(4) + b * u(2) + fn("r")
    assert conservation_residual(eq_abstract, u(0), sigma1).is_zero
    assert conservation_residual(eq_abstract, u(0), as_expr(0)) == eq_abstract.rhs


def test_is_conserved_density(eq_abstract):
    assert is_conserved_density(eq_abstract, u(0) ** 2)
    rho3 = (u(2) ** 2 - b * u(1) ** 2) / 2 + fn("rhat")
    assert is_conserved_density(eq_abstract, rho3)
    assert not is_conserved_density(eq_abstract, u(0) ** 3)
    assert not is_conserved_density(eq_abstract, u(1) ** 2)


def test_reconstruct_flux_rho1(eq_abstract):
    assert reconstruct_flux(eq_abstract, u(0)) == u(4) + b * u(2) + fn("r")


def test_reconstruct_flux_rho2_quadratic(eq_quadratic):
    sigma = reconstruct_flux(eq_quadratic, u(0) ** 2)
    assert conservation_residual(eq_quadratic, u(0) ** 2, sigma).is_zero
    expected = (2 * u(0) * u(4) - 2 * u(1) * u(3) + u(2) ** 2
                + 2 * b * u(0) * u(2) - b * u(1) ** 2 + u(0) ** 4 / 2)
    assert sigma == expected


def test_reconstruct_flux_requires_conservation(eq_abstract):
    with pytest.raises(NotConserved):
        reconstruct_flux(eq_abstract, u(0) ** 3)


def test_characteristic_of_density():
    assert characteristic_of_density(u(0) ** 2) == 2 * u(0)
    rho3 = (u(2) ** 2 - b * u(1) ** 2) / 2 + fn("rhat")
    assert characteristic_of_density(rho3) == u(4) + b * u(2) + fn("r")
    rho4_printed = x() * u(0) + alpha * t() * u(0) ** 2 / 2
    assert characteristic_of_density(rho4_printed) == x() + alpha * t() * u(0)


def test_is_trivial_density(eq_abstract):
    assert is_trivial_density(eq_abstract, u(1))
    assert not is_trivial_density(eq_abstract, u(0))
    assert is_trivial_density(eq_abstract, u(0) * u(2) + u(1) ** 2)


def test_triviality_preserves_characteristic(eq_abstract):
    rng = random.Random(47)
    for _ in range(40):
        rho = random_expr(rng)
        shift = total_x(random_expr(rng))
        assert is_trivial_density(eq_abstract, shift)
        assert euler(rho + shift) == euler(rho)


def test_symmetry_from_density(eq_abstract, eq_linear):
    rho3 = (u(2) ** 2 - b * u(1) ** 2) / 2 + fn("rhat")
    q1 = u(5) + b * u(3) + fn("f") * u(1)
    assert symmetry_from_density(eq_abstract, rho3) == q1
    assert symmetry_from_density(eq_abstract, u(0)).is_zero
    rho4 = x() * u(0) + alpha * t() * u(0) ** 2 / 2 + beta * t() * u(0)
    got = symmetry_from_density(eq_linear, rho4)
    q3 = t() * u(1) + 1 / alpha
    assert got == alpha * q3
    assert symmetry_residual(eq_linear, got).is_zero


def test_lemma1_chain_on_catalog(eq_abstract):
    # every conserved density maps to a symmetry characteristic through D_x
    for rho in (u(0), u(0) ** 2,
                (u(2) ** 2 - b * u(1) ** 2) / 2 + fn("rhat")):
        Q = symmetry_from_density(eq_abstract, rho)
        assert symmetry_residual(eq_abstract, Q).is_zero


def test_formal_symmetry_residual_of_linearization(eq_abstract):
    dk = frechet_hat(eq_abstract.rhs)
    res = formal_symmetry_residual(eq_abstract, dk)
    assert res.degree() == 1


def test_formal_symmetry_residual_constant(eq_abstract):
    res = formal_symmetry_residual(eq_abstract, PsdSeries.const(1))
    assert res.degree() is not None
    assert res.is_zero_on_window()


def test_formal_symmetry_residual_xi(eq_abstract):
    res = formal_symmetry_residual(eq_abstract, PsdSeries.xi(1), slots=8)
    assert res.coeff(1) == total_x(fn("f"))
    assert res.coeff(0) == total_x(fn("f", 1) * u(1))
    assert res.degree() == 1


def test_rank_of(eq_abstract):
    dk = frechet_hat(eq_abstract.rhs)
    r = rank_of(eq_abstract, dk)
    assert r.value == 9 and not r.at_least
    r2 = rank_of(eq_abstract, frechet_hat(u(1)))
    assert r2.value == 5
    rc = rank_of(eq_abstract, PsdSeries.const(u(0) * 0 + 1))
    assert rc.unbounded
    rxi = rank_of(eq_abstract, PsdSeries.xi(1))
    assert rxi.value == 1 + 5 - 1


def test_rank_of_insufficient_precision(eq_abstract):
    L = PsdSeries.from_coeffs({1: as_expr(1)}, exact=False, bottom=1)
    with pytest.raises(InsufficientPrecision):
        rank_of(eq_abstract, L, require=13)


def test_split_by_free_monomials():
    e = unk("g") * fn("f", 3) * u(1) + 3 * unk("g", 1) * par("b")
    groups = split_by_free_monomials(e)
    as_dict = {m: c for m, c in groups}
    assert as_dict[fn("f", 3) * u(1)] == unk("g")
    assert as_dict[as_expr(1)] == 3 * unk("g", 1) * par("b")


# -- the obstruction scan -------------------------------------------------------


def test_scan_requires_gke_shape():
    eq = EvolutionEquation(u(3) + u(0) * u(1))
    with pytest.raises(UnsupportedEquationShape):
        formal_symmetry_scan(eq, 13)


def test_scan_abstract_f(eq_abstract):
    rep = formal_symmetry_scan(eq_abstract, 13)
    assert rep.obstruction_index == -3
    assert rep.obstruction == "g = 0"
    # the early steps solve -5 D_x = 0
    for step, name in zip(rep.steps, ("g", "l0", "l1", "l2")):
        assert step.coefficient_name == name
        assert step.equation == f"-5*D_x({name}) = 0"
        assert not step.exactness_constraints
    # the known obstruction system at xi^-3, with its exact constants:
    last = rep.steps[-1]
    assert last.xi_index == -3
    pair = {-fn("f", 3) * unk("g") / 5,
            Fraction(3, 25) * fn("f", 1) * unk("g", 1)}
    assert pair <= set(last.reduced_constraints)
    # everything else in the system is a higher-derivative multiple of g
    for c in last.reduced_constraints:
        if c in pair:
            continue
        gens = c.generators()
        assert unk("g").generators() <= gens
        assert any(g.kind == 3 and g.index >= 3 for g in gens)  # some f^(k>=3)


def test_scan_cubic_f():
    spec = FunctionSpec.polynomial([0, 0, 0, 1])
    eq = EvolutionEquation(specialize_f(u(5) + b * u(3) + fn("f") * u(1), spec), spec)
    rep = formal_symmetry_scan(eq, 13)
    assert rep.obstruction_index == -3
    assert rep.obstruction == "g = 0"


def test_scan_quadratic_f(eq_quadratic):
    rep = formal_symmetry_scan(eq_quadratic, 13)
    assert rep.obstruction_index == -7
    assert rep.obstruction == "g = 0"
    by_index = {s.xi_index: s for s in rep.steps}
    assert by_index[-3].forced == ["g is constant"]
    assert "l0 is constant" in by_index[-4].forced
    assert any("l0 set to 0" in n for n in by_index[-4].notes)
    assert by_index[-5].forced == ["l1 is constant"]
    assert by_index[-6].forced == ["l2 is constant"]
    assert "g = 0" in by_index[-7].forced
    # the milestone order of the transcript
    notes = " | ".join(" ".join(s.forced) for s in rep.steps)
    assert notes.index("g is constant") < notes.index("l0 is constant")
    assert notes.index("l0 is constant") < notes.index("g = 0")
    # the l0-constancy constraint carries the published 6/25 coefficient
    assert Fraction(6, 25) * unk("l0", 1) in by_index[-4].reduced_constraints


def test_scan_soundness_quadratic(eq_quadratic):
    # substituted-back coefficients annihilate the residual on every solved index
    from jetcalc.series import commutator, dt_series
    rep = formal_symmetry_scan(eq_quadratic, 13)
    forcing = rep.forcing
    L = PsdSeries.from_coeffs({i: forcing.apply(c)
                               for i, c in rep.coefficients.items()}, exact=True)
    dk = frechet_hat(eq_quadratic.rhs)
    res = dt_series(L, eq_quadratic) - commutator(dk, L, slots=40)
    # indices above the one that produced the obstruction must vanish
    for i in range(5, rep.obstruction_index, -1):
        assert forcing.apply(res.coeff(i)).is_zero, f"residual at xi^{i}"


def test_characteristic_identity_off_equation():
    # frechet(rho, V) - euler(rho)*V is a total x-derivative for a fresh V:
    # the off-equation form of D_t(rho) - D_x(sigma) = P*(u_t - K)
    from jetcalc.calculus import formal_x_integrate, frechet
    from jetcalc.kawahara import verify_catalog
    syms, dens = verify_catalog()
    for d in dens:
        top = d.rho.top_jet() or 0
        V = u(top + 7)
        binder = frechet(d.rho, V) - euler(d.rho) * V
        _, residual = formal_x_integrate(binder)
        assert residual.is_zero, d.label


def test_scan_linear_branch_survives_then_obstructs():
    # the quadratic normalization divides by the leading coefficient, so the
    # linear nonlinearity is a separate branch: the triangular solve succeeds
    # through rank 14 and the g = 0 obstruction first appears at xi^-9
    eq = EvolutionEquation(
        specialize_f(u(5) + b * u(3) + fn("f") * u(1), FunctionSpec.linear()),
        FunctionSpec.linear())
    rep13 = formal_symmetry_scan(eq, 13)
    assert rep13.survived
    rep14 = formal_symmetry_scan(eq, 14)
    assert rep14.survived
    rep15 = formal_symmetry_scan(eq, 15)
    assert rep15.obstruction_index == -9
    assert rep15.obstruction == "g = 0"


def test_scan_linear_branch_rank13_witness():
    # independent residual check: the solved prefix really is a formal
    # symmetry of rank >= 13 for f = alpha*u + beta
    from jetcalc.series import commutator, dt_series
    eq = EvolutionEquation(
        specialize_f(u(5) + b * u(3) + fn("f") * u(1), FunctionSpec.linear()),
        FunctionSpec.linear())
    rep = formal_symmetry_scan(eq, 13)
    forcing = rep.forcing
    L = PsdSeries.from_coeffs({i: forcing.apply(c)
                               for i, c in rep.coefficients.items()}, exact=True)
    dk = frechet_hat(eq.rhs)
    res = dt_series(L, eq) - commutator(dk, L, slots=40)
    for i in range(5, -8, -1):
        assert forcing.apply(res.coeff(i)).is_zero, f"residual at xi^{i}"


# -- linear ansatz ---------------------------------------------------------------


def test_ansatz_symmetry_abstract(eq_abstract):
    got = solve_linear_ansatz(eq_abstract, [u(1), u(2), u(0) * u(1)], "symmetry")
    assert got == [u(1)]


def test_ansatz_density_abstract(eq_abstract):
    got = solve_linear_ansatz(eq_abstract, [u(0), u(0) ** 2, u(1) ** 2], "density")
    assert got == [u(0), u(0) ** 2]


def test_ansatz_symmetry_linear_branch(eq_linear):
    got = solve_linear_ansatz(eq_linear, [t() * u(1), as_expr(1), u(1)], "symmetry")
    assert got == [t() * u(1) + 1 / alpha, u(1)] or got == [u(1), t() * u(1) + 1 / alpha]
