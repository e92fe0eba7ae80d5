import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dqgm import (
    EXACT,
    LEFT,
    RIGHT,
    Element,
    GaussianRational,
    HaarData,
    ReducedFunctional,
    WindowFunctional,
    WindowTooSmall,
    bimodule_act,
    convolve,
    dual_of_group,
    dual_of_su2,
    dual_unit,
    element_multiply,
    evaluate_on_multiplier,
    functional_side_convert,
    integers,
    is_faithful,
    modular_apply,
    Multiplier,
    PolynomialRule,
    single_block_algebra,
    symmetric_group,
)

from _support import gq, random_element, random_matrix


def _point(dqg, g, c=1):
    return ReducedFunctional(dqg.haar, Element.unit(dqg.algebra, g, 0, 0, c), LEFT)


def test_modular_automorphism_on_single_block():
    alg, haar = single_block_algebra(2, (1, 2))
    units = [u for *_, u in alg.matrix_units([0])]
    for a, b in itertools.product(units, repeat=2):
        assert haar.phi(element_multiply(a, b)) == haar.phi(element_multiply(b, modular_apply(haar, a)))
    e12 = Element.unit(alg, 0, 0, 1)
    assert modular_apply(haar, e12) == e12.scale(Fraction(1, 2))
    assert not haar.is_tracial_on([0])
    assert is_faithful(haar, [0])


@given(st.integers(0, 10**6))
def test_side_conversion_preserves_values(seed):
    rng = np.random.default_rng(seed)
    alg, haar = single_block_algebra(3, (1, 2, "1/3"), d=5)
    b = random_element(alg, [0], rng)
    x = random_element(alg, [0], rng)
    right = ReducedFunctional(haar, b, RIGHT)
    left = functional_side_convert(right)
    assert left.side == LEFT
    assert right(x) == left(x) == haar.phi(element_multiply(b, x))
    assert functional_side_convert(left).equals(right)


def test_riesz_solves_both_sides():
    alg, haar = single_block_algebra(2, (1, 3), d=2)
    vals = EXACT.array([[1, 2], [3, GaussianRational(0, 1)]])
    for side in (LEFT, RIGHT):
        r = Element(alg, {0: haar.riesz(0, vals, side)})
        for i, j in itertools.product(range(2), repeat=2):
            e = Element.unit(alg, 0, i, j)
            got = haar.phi(element_multiply(e, r) if side == LEFT else element_multiply(r, e))
            assert got == vals[i, j]


def test_convolution_on_integers():
    z = dual_of_group(integers())
    out = convolve(_point(z, 2), _point(z, 3), z)
    assert out.representative == Element.unit(z.algebra, 5)


def test_convolution_matches_cayley_table():
    g = symmetric_group(3)
    s3 = dual_of_group(g)
    for a, b in itertools.product(range(6), repeat=2):
        out = convolve(_point(s3, a), _point(s3, b), s3)
        assert out.representative == Element.unit(s3.algebra, g.mul(a, b))


@given(st.integers(0, 10**6))
def test_convolution_is_associative_and_bilinear(seed):
    rng = np.random.default_rng(seed)
    s3 = dual_of_group(symmetric_group(3))
    xs = [ReducedFunctional(s3.haar, random_element(s3.algebra, range(6), rng), LEFT) for _ in range(3)]
    a = convolve(convolve(xs[0], xs[1], s3), xs[2], s3)
    b = convolve(xs[0], convolve(xs[1], xs[2], s3), s3)
    assert a.equals(b)
    c = gq(rng)
    lin = convolve(xs[0] + xs[1].scale(c), xs[2], s3)
    assert lin.equals(convolve(xs[0], xs[2], s3) + convolve(xs[1], xs[2], s3).scale(c))


def test_convolution_is_the_dual_of_the_coproduct():
    # (xi1 * xi2)(x) == sum over blocks of xi1 (x) xi2 applied to delta(x)
    su = dual_of_su2(2)
    rng = np.random.default_rng(0)
    xi1 = ReducedFunctional(su.haar, random_element(su.algebra, range(3), rng, 2), LEFT)
    xi2 = ReducedFunctional(su.haar, random_element(su.algebra, range(3), rng, 2), LEFT)
    out = convolve(xi1, xi2, su)
    for alpha in range(5):
        x = random_element(su.algebra, [alpha], rng, 1)
        expected = 0
        for beta in xi1.support:
            for gamma in xi2.support:
                for a2, v in su.fusion(beta, gamma):
                    if a2 == alpha:
                        y = v @ x.block(alpha) @ v.conj().T
                        expected += np.trace(y @ np.kron(xi1.density(beta), xi2.density(gamma)))
        assert abs(out(x) - expected) < 1e-10


def test_dual_unit():
    for dqg, e in ((dual_of_group(integers()), 0), (dual_of_group(symmetric_group(3)), 0)):
        u = dual_unit(dqg)
        assert u.representative == Element.unit(dqg.algebra, e)
    su = dual_of_su2(2)
    u = dual_unit(su)
    for k in u.support:
        if k != 0:
            assert np.max(np.abs(u.representative.block(k))) < 1e-10
    assert abs(u.representative.block(0)[0, 0] - 1) < 1e-10


def test_ideal_property_on_s3():
    # a f b lies in the dual, and its convolutions with any xi are again representable
    s3 = dual_of_group(symmetric_group(3))
    alg = s3.algebra
    rng = np.random.default_rng(5)
    f = WindowFunctional(alg, {k: EXACT.array([[gq(rng)]]) for k in range(6)})
    a = random_element(alg, range(6), rng)
    b = random_element(alg, range(6), rng)
    gamma = bimodule_act(a, f, b, s3.haar)
    for x in (Element.unit(alg, k) for k in range(6)):
        assert gamma(x) == f(element_multiply(element_multiply(b, x), a))


def test_window_functional_refuses_uncovered_blocks():
    z = dual_of_group(integers())
    f = WindowFunctional(z.algebra, {0: EXACT.eye(1)})
    assert f(Element.unit(z.algebra, 0)) == 1
    with pytest.raises(WindowTooSmall):
        f(Element.unit(z.algebra, 7))


def test_functional_on_multiplier():
    z = dual_of_group(integers())
    xi = _point(z, 3, 2)
    m = Multiplier(z.algebra, PolynomialRule((0, 1)))
    assert evaluate_on_multiplier(xi, m) == 6


def test_scaled_haar():
    z = dual_of_group(integers())
    h7 = z.haar.scaled(7)
    e = Element.unit(z.algebra, 4)
    assert h7.phi(e) == 7 * z.haar.phi(e)
