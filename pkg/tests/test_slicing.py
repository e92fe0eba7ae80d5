from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dqgm import (
    EXACT,
    LEFT,
    BudgetExceeded,
    CharacterRule,
    DQGDescriptor,
    Element,
    GaussianRational,
    IdentityRule,
    Multiplier,
    NotInSpan,
    PointMassRule,
    PolynomialRule,
    ReconstructionMismatch,
    ReducedFunctional,
    SliceSpaceReport,
    TableRule,
    TensorFunctionRule,
    TensorMultiplier,
    coproduct_of_multiplier,
    dual_of_group,
    dual_of_su2,
    factor,
    infer_character,
    integers,
    is_almost_periodic,
    pair_value,
    single_block_algebra,
    slice_multiplier,
    slice_space_dimension,
    symmetric_group,
)

from _support import gq, pair_oracle, random_element, random_matrix, random_multiplier, random_tensor

Z = dual_of_group(integers())
WIN = range(-4, 5)


def _xi(dqg, index, c=1):
    return ReducedFunctional(dqg.haar, Element.unit(dqg.algebra, index, 0, 0, c), LEFT)


def test_slice_of_identity_is_identity():
    Y = TensorMultiplier.identity(Z.algebra, Z.algebra)
    m = slice_multiplier(Y, _xi(Z, 0))
    assert m.equals_on(Multiplier.identity(Z.algebra), range(-8, 9))


def test_slice_of_translate_coproduct():
    x = Multiplier(Z.algebra, PolynomialRule((0, 1)))
    Y = coproduct_of_multiplier(Z, x)
    for k in (-3, 0, 5):
        m = slice_multiplier(Y, _xi(Z, k))
        assert m.equals_on(Multiplier(Z.algebra, PolynomialRule((k, 1))), range(-8, 9))


def test_slice_of_elementary_tensor():
    rng = np.random.default_rng(0)
    x, y = random_multiplier(Z.algebra, rng), random_multiplier(Z.algebra, rng)
    Y = TensorMultiplier.elementary([(1, x, y)])
    xi = ReducedFunctional(Z.haar, random_element(Z.algebra, WIN, rng), LEFT)
    value = sum(np.trace(y.block(a) @ g) for a, g in xi.densities().items())
    assert slice_multiplier(Y, xi).equals_on(x.scale(value), range(-8, 9))


@given(st.integers(0, 10**6))
def test_slice_uniqueness_against_direct_evaluation(seed):
    rng = np.random.default_rng(seed)
    Y = random_tensor(Z, rng)
    a = random_element(Z.algebra, WIN, rng)
    m = slice_multiplier(Y, ReducedFunctional(Z.haar, a, LEFT))
    for _ in range(5):
        c = random_element(Z.algebra, WIN, rng)
        zeta = ReducedFunctional(Z.haar, c, LEFT)
        direct = pair_oracle(Y, Z.haar, c, Z.haar, a)
        assert zeta(m.apply(Element(Z.algebra, {k: EXACT.eye(1) for k in c.support}))) == direct
        assert pair_value(Y, zeta, ReducedFunctional(Z.haar, a, LEFT)) == direct


def test_slice_uniqueness_with_matrix_blocks_and_modular_twist():
    # single M_2 block, phi = tr(diag(1, 2) .); left and right functionals
    alg, haar = single_block_algebra(2, (1, 2))
    rng = np.random.default_rng(11)
    Y = TensorMultiplier(alg, alg, TensorFunctionRule(lambda l, r, b, a: random_matrix(np.random.default_rng(3), 4), "fixed"))
    for side in ("left", "right"):
        a = random_element(alg, [0], rng)
        xi = ReducedFunctional(haar, a, side)
        m = slice_multiplier(Y, xi)
        for _ in range(5):
            c = random_element(alg, [0], rng)
            zeta = ReducedFunctional(haar, c, LEFT)
            xl = xi.as_left().representative
            assert zeta(m.restrict([0])) == pair_oracle(Y, haar, c, haar, xl)


@given(st.integers(0, 10**6))
def test_slice_is_linear_in_the_functional(seed):
    rng = np.random.default_rng(seed)
    Y = random_tensor(Z, rng)
    x1 = ReducedFunctional(Z.haar, random_element(Z.algebra, WIN, rng), LEFT)
    x2 = ReducedFunctional(Z.haar, random_element(Z.algebra, WIN, rng), LEFT)
    c1, c2 = gq(rng), gq(rng)
    lhs = slice_multiplier(Y, x1.scale(c1) + x2.scale(c2))
    rhs = slice_multiplier(Y, x1).scale(c1) + slice_multiplier(Y, x2).scale(c2)
    assert lhs.equals_on(rhs, range(-10, 11))


@settings(max_examples=15)
@given(st.integers(0, 10**6), st.integers(1, 3))
def test_finite_rank_tensors_are_detected_and_rebuilt(seed, K):
    rng = np.random.default_rng(seed)
    terms = [(1, random_multiplier(Z.algebra, rng), random_multiplier(Z.algebra, rng)) for _ in range(K)]
    Y = TensorMultiplier.elementary(terms)
    rep = slice_space_dimension(Y, Z, patience=2, budget=4)
    assert rep.stabilized and rep.final_dimension <= K
    fac = factor(Y, Z, rep, centralizer_pairs=5, rng=rng)
    for b in list(fac.b_window) + list(fac.probe_b):
        for a in list(fac.a_window)[::3] + list(fac.probe_a):
            assert EXACT.matrices_equal(fac.product(b, a, EXACT), Y.block(b, a))


@settings(max_examples=15)
@given(st.integers(0, 10**6))
def test_dimensions_never_decrease(seed):
    rng = np.random.default_rng(seed)
    Y = random_tensor(Z, rng)
    try:
        rep = slice_space_dimension(Y, Z, patience=2, budget=3)
    except BudgetExceeded as exc:
        rep = exc.report
    dims = rep.dimensions
    assert dims == sorted(dims)


def test_budget_exceeded_for_point_mass():
    Y = coproduct_of_multiplier(Z, Multiplier(Z.algebra, PointMassRule(0)))
    with pytest.raises(BudgetExceeded) as info:
        slice_space_dimension(Y, Z, budget=4)
    assert info.value.report.dimensions == [9, 17, 33, 65]
    assert not info.value.report.stabilized


@pytest.mark.parametrize("rule, dim", [(CharacterRule(Fraction(1, 4)), 1), (PolynomialRule((0, 1)), 2), (PolynomialRule((1, 0, 1)), 3)])
def test_almost_periodic_examples(rule, dim):
    res = is_almost_periodic(Multiplier(Z.algebra, rule), Z)
    assert res.almost_periodic and res.dimension == dim
    assert res.slices.dimensions == [dim] * 3


def test_point_mass_has_no_certificate():
    res = is_almost_periodic(Multiplier(Z.algebra, PointMassRule(0)), Z, budget=4)
    assert res.verdict == "no_finite_certificate" and res.dimension is None


def test_translate_factorization_reconstructs_sum():
    res = is_almost_periodic(Multiplier(Z.algebra, PolynomialRule((0, 1))), Z)
    fac = res.factorization
    for g in range(-20, 21, 3):
        for n in range(-20, 21, 4):
            assert fac.product(g, n, EXACT)[0, 0] == g + n


def test_character_factor_is_inferred():
    res = is_almost_periodic(Multiplier(Z.algebra, CharacterRule(Fraction(3, 4))), Z)
    (y,) = res.factorization.y
    assert infer_character(y, range(-4, 5)) == CharacterRule(Fraction(3, 4))
    assert infer_character(Multiplier(Z.algebra, PolynomialRule((0, 1))), range(-4, 5)) is None


def test_rank_one_recovers_factors_up_to_scalar():
    x = Multiplier(Z.algebra, PolynomialRule((1, 2)))
    y = Multiplier(Z.algebra, CharacterRule(Fraction(1, 2)))
    Y = TensorMultiplier.elementary([(1, x, y)])
    rep = slice_space_dimension(Y, Z)
    fac = factor(Y, Z, rep)
    (x1,), (y1,) = fac.x, fac.y
    c = x1.block(0)[0, 0] / x.block(0)[0, 0]
    assert x1.equals_on(x.scale(c), range(-10, 11))
    assert y1.equals_on(y.scale(1 / c), range(-10, 11))


def test_normalization_independence():
    x = Multiplier(Z.algebra, PolynomialRule((0, 1)))
    Y = coproduct_of_multiplier(Z, x)
    z7 = Z.with_haar(Z.haar.scaled(7))
    r1, r7 = slice_space_dimension(Y, Z), slice_space_dimension(Y, z7)
    assert r1.dimensions == r7.dimensions
    f1, f7 = factor(Y, Z, r1), factor(Y, z7, r7)
    for b in range(-6, 7):
        for a in range(-6, 7):
            assert EXACT.matrices_equal(f1.product(b, a, EXACT), f7.product(b, a, EXACT))


def test_truncated_basis_raises_not_in_span():
    Y = coproduct_of_multiplier(Z, Multiplier(Z.algebra, PolynomialRule((0, 1))))
    rep = slice_space_dimension(Y, Z)
    short = SliceSpaceReport(rep.history, True, 1, rep.level, rep.patience, rep.basis[:1], rep.basis_keys[:1])
    with pytest.raises(NotInSpan):
        factor(Y, Z, short)


def test_probe_window_catches_late_disagreement():
    # rank one on |b|, |a| <= 16 and perturbed beyond: windows agree, probes do not
    def block(left, right, b, a):
        v = GaussianRational(1) if max(abs(b), abs(a)) <= 16 else GaussianRational(2)
        return EXACT.array([[v]])

    Y = TensorMultiplier(Z.algebra, Z.algebra, TensorFunctionRule(block, "late"))
    rep = slice_space_dimension(Y, Z)
    assert rep.final_dimension == 1
    with pytest.raises(ReconstructionMismatch):
        factor(Y, Z, rep)


def test_factor_requires_stabilized_report():
    with pytest.raises(ValueError):
        factor(TensorMultiplier.identity(Z.algebra, Z.algebra), Z, SliceSpaceReport([], False, 0, 0, 2))


def test_factorization_with_matrix_blocks_and_twisted_phi():
    alg, haar = single_block_algebra(2, (1, 2), d=3)
    m2 = DQGDescriptor("M2", alg, lambda b, c: [], haar, lambda b, a: [], lambda c, a: [])
    rng = np.random.default_rng(4)
    xs = [Multiplier(alg, TableRule({0: random_matrix(rng, 2)})) for _ in range(2)]
    ys = [Multiplier(alg, TableRule({0: random_matrix(rng, 2)})) for _ in range(2)]
    Y = TensorMultiplier.elementary([(1, xs[0], ys[0]), (1, xs[1], ys[1])])
    rep = slice_space_dimension(Y, m2)
    assert rep.stabilized and rep.final_dimension == 2 and len(rep.history) == 1
    fac = factor(Y, m2, rep)  # includes the double-centralizer check with sigma != id
    assert EXACT.matrices_equal(fac.product(0, 0, EXACT), Y.block(0, 0))


def test_finite_group_every_element_is_almost_periodic():
    s3 = dual_of_group(symmetric_group(3))
    rng = np.random.default_rng(9)
    x = Multiplier(s3.algebra, TableRule({k: EXACT.array([[gq(rng)]]) for k in range(6)}))
    res = is_almost_periodic(x, s3)
    assert res.almost_periodic and res.dimension <= 6


def test_su2_identity_is_almost_periodic_in_float_mode():
    su = dual_of_su2(2)
    res = is_almost_periodic(Multiplier(su.algebra, IdentityRule()), su, budget=3)
    assert res.almost_periodic and res.dimension == 1
    assert res.factorization.max_error <= 1e-7


def test_su2_point_mass_is_not_certified():
    su = dual_of_su2(2)
    res = is_almost_periodic(Multiplier(su.algebra, PointMassRule(1)), su, budget=3)
    assert res.verdict == "no_finite_certificate"
