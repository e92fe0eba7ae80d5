"""Acceptance criteria, one test each; each records a PASS/FAIL line.

The lines are printed in the pytest terminal summary (see ``conftest.py``).
"""

import itertools
import json
import sys
import time
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest

from dqgm import (
    EXACT,
    LEFT,
    BudgetExceeded,
    CharacterRule,
    Element,
    Multiplier,
    PointMassRule,
    PolynomialRule,
    ReducedFunctional,
    TableRule,
    TensorMultiplier,
    WindowFunctional,
    bimodule_act,
    convolve,
    coproduct_of_multiplier,
    dual_of_group,
    dual_of_su2,
    dual_unit,
    element_multiply,
    evaluate_on_multiplier,
    factor,
    integers,
    is_almost_periodic,
    modular_apply,
    single_block_algebra,
    slice_multiplier,
    slice_space_dimension,
    symmetric_group,
    verify_fusion,
    verify_left_invariance,
    verify_mhopf_axioms,
)
from dqgm.cli import main as cli_main

from _support import ACCEPTANCE_LINES, gq, pair_oracle, random_element, random_tensor

ROOT = Path(__file__).resolve().parents[1]


def _report(number, title, ok, detail, start):
    line = f"criterion {number:>2} [{'PASS' if ok else 'FAIL'}] {title}: {detail} ({time.perf_counter() - start:.1f}s)"
    ACCEPTANCE_LINES.append(line)
    assert ok, line


def _z():
    return dual_of_group(integers())


def _s3():
    return dual_of_group(symmetric_group(3))


def test_criterion_01_slice_uniqueness():
    t = time.perf_counter()
    z = _z()
    rng = np.random.default_rng(101)
    win = range(-4, 5)
    checks = bad = 0
    for _ in range(10):
        Y = random_tensor(z, rng)
        for _ in range(10):
            a = random_element(z.algebra, win, rng)
            m = slice_multiplier(Y, ReducedFunctional(z.haar, a, LEFT))
            for _ in range(20):
                c = random_element(z.algebra, win, rng)
                lhs = pair_oracle(Y, z.haar, c, z.haar, a)
                rhs = evaluate_on_multiplier(ReducedFunctional(z.haar, c, LEFT), m)
                checks += 1
                bad += lhs != rhs
    _report(1, "slice uniqueness", bad == 0, f"{checks} exact identities, {bad} mismatches", t)


def test_criterion_02_convolution_algebra_s3():
    t = time.perf_counter()
    g = symmetric_group(3)
    s3 = dual_of_group(g)
    perms = g.labels
    pos = {p: k for k, p in enumerate(perms)}

    def delta(k):
        return ReducedFunctional(s3.haar, Element.unit(s3.algebra, k), LEFT)

    table_ok = 0
    for a, b in itertools.product(range(6), repeat=2):
        oracle = pos[tuple(perms[a][perms[b][i]] for i in range(3))]
        table_ok += convolve(delta(a), delta(b), s3).representative == Element.unit(s3.algebra, oracle)
    assoc_ok = 0
    for a, b, c in itertools.product(range(6), repeat=3):
        lhs = convolve(convolve(delta(a), delta(b), s3), delta(c), s3)
        rhs = convolve(delta(a), convolve(delta(b), delta(c), s3), s3)
        assoc_ok += lhs.equals(rhs)
    unit_ok = dual_unit(s3).representative == Element.unit(s3.algebra, pos[(0, 1, 2)])
    ok = table_ok == 36 and assoc_ok == 216 and unit_ok
    _report(2, "S3 convolution algebra", ok, f"table {table_ok}/36, associativity {assoc_ok}/216, unit {unit_ok}", t)


def test_criterion_03_ideal_property():
    t = time.perf_counter()
    g = symmetric_group(3)
    s3 = dual_of_group(g)
    alg = s3.algebra
    rng = np.random.default_rng(303)
    checks = bad = 0
    for _ in range(10):
        f = WindowFunctional(alg, {k: EXACT.array([[gq(rng)]]) for k in range(6)})
        a = random_element(alg, range(6), rng, 4)
        b = random_element(alg, range(6), rng, 4)
        gamma = bimodule_act(a, f, b, s3.haar)

        def gamma_direct(x, f=f, a=a, b=b):
            return f(element_multiply(element_multiply(b, x), a))

        for _ in range(10):
            xi = ReducedFunctional(s3.haar, random_element(alg, range(6), rng, 3), LEFT)
            left = convolve(gamma, xi, s3)
            right = convolve(xi, gamma, s3)
            for k in range(6):
                # (gamma * xi)(e_k) = sum_{gh = k} gamma(e_g) xi(e_h), straight from delta
                e = lambda j: Element.unit(alg, j)
                want_l = sum((gamma_direct(e(p)) * xi(e(q)) for p in range(6) for q in range(6) if g.mul(p, q) == k), EXACT.zero)
                want_r = sum((xi(e(p)) * gamma_direct(e(q)) for p in range(6) for q in range(6) if g.mul(p, q) == k), EXACT.zero)
                checks += 2
                bad += (left(e(k)) != want_l) + (right(e(k)) != want_r)
    _report(3, "ideal property of the dual", bad == 0, f"{checks} exact evaluations, {bad} mismatches", t)


def test_criterion_04_modular_automorphism():
    t = time.perf_counter()
    alg, haar = single_block_algebra(2, (1, 2))
    units = [u for *_, u in alg.matrix_units([0])]
    hits = sum(
        haar.phi(element_multiply(a, b)) == haar.phi(element_multiply(b, modular_apply(haar, a)))
        for a, b in itertools.product(units, repeat=2)
    )
    e12 = Element.unit(alg, 0, 0, 1)
    sigma_ok = modular_apply(haar, e12) == e12.scale(Fraction(1, 2))
    _report(4, "modular automorphism", hits == 16 and sigma_ok, f"KMS identity {hits}/16, sigma(e12) = e12/2: {sigma_ok}", t)


_FACTORIZATIONS = []


def _check_reconstruction(fac, Y):
    pairs = bad = 0
    for b in list(fac.b_window) + list(fac.probe_b):
        for a in list(fac.a_window) + list(fac.probe_a):
            pairs += 1
            bad += not EXACT.matrices_equal(fac.product(b, a, EXACT), Y.block(b, a))
    return pairs, bad


def test_criterion_05_forward_direction():
    t = time.perf_counter()
    z = _z()
    A = z.algebra
    xs = [
        Multiplier(A, PolynomialRule((0, 1))),
        Multiplier(A, CharacterRule(Fraction(1, 4))),
        Multiplier(A, TableRule({1: EXACT.array([[3]]), -2: EXACT.array([["1/2"]])}, PolynomialRule((1,)))),
    ]
    ys = [
        Multiplier(A, PolynomialRule((1, 0, 1))),
        Multiplier(A, CharacterRule(Fraction(1, 2))),
        Multiplier(A, PointMassRule(2, 5)),
    ]
    Y = TensorMultiplier.elementary([(1, x, y) for x, y in zip(xs, ys)])
    rep = slice_space_dimension(Y, z, patience=2, budget=3)
    fac = factor(Y, z, rep, centralizer_pairs=50)
    _FACTORIZATIONS.append(("forward rank 3", fac))
    pairs, bad = _check_reconstruction(fac, Y)
    ok = rep.stabilized and rep.final_dimension == 3 and len(rep.history) <= 3 and bad == 0
    _report(5, "finite rank is detected and rebuilt", ok, f"history {rep.dimensions}, {pairs} block pairs incl. probes, {bad} mismatches", t)


def test_criterion_06_backward_direction(tmp_path):
    t = time.perf_counter()
    z = _z()
    A = z.algebra
    chi = is_almost_periodic(Multiplier(A, CharacterRule(Fraction(1, 4))), z)
    lin = is_almost_periodic(Multiplier(A, PolynomialRule((0, 1))), z)
    _FACTORIZATIONS.append(("character", chi.factorization))
    _FACTORIZATIONS.append(("translate", lin.factorization))
    chi_pairs, chi_bad = _check_reconstruction(chi.factorization, coproduct_of_multiplier(z, Multiplier(A, CharacterRule(Fraction(1, 4)))))
    fac = lin.factorization
    g_plus_n = all(
        fac.product(g, n, EXACT)[0, 0] == g + n
        for g in list(fac.b_window) + list(fac.probe_b)
        for n in list(fac.a_window) + list(fac.probe_a)
    )
    out = tmp_path / "r.json"
    status = cli_main(["slice-dim", "--scenario", str(ROOT / "scenarios" / "point_mass_z.json"), "--window-budget", "4", "--out", str(out)])
    hist = [h["dimension"] for h in json.loads(out.read_text())["history"]]
    ok = (
        chi.dimension == 1
        and chi_bad == 0
        and lin.dimension == 2
        and g_plus_n
        and hist == [9, 17, 33, 65]
        and status == 2
    )
    detail = f"character dim {chi.dimension}, translate dim {lin.dimension} with Y(g,n)=g+n {g_plus_n}, point mass history {hist} exit {status}"
    _report(6, "almost periodicity", ok, detail, t)


def test_criterion_07_multiplier_hopf_axioms():
    t = time.perf_counter()
    s3 = verify_mhopf_axioms(_s3(), regularity=True)
    zz = verify_mhopf_axioms(_z(), regularity=True)
    ok = s3.passed and not s3.window_relative and zz.passed
    _report(7, "multiplier Hopf axioms", ok, f"S3 exhaustive {s3.passed} ({s3.triples_checked} triples), Z window probes {zz.passed} ({zz.probes} targets)", t)


def test_criterion_08_left_invariance():
    t = time.perf_counter()
    rng = np.random.default_rng(808)
    exact_ok = True
    for dqg, idx in ((_z(), range(-4, 5)), (_s3(), range(6))):
        for _ in range(20):
            r = verify_left_invariance(dqg, random_element(dqg.algebra, idx, rng), idx)
            exact_ok &= r.passed and r.max_deviation == 0
    su = dual_of_su2(3)
    win = su.algebra.window(0).indices
    worst = max(verify_left_invariance(su, random_element(su.algebra, win, rng), win).max_deviation for _ in range(10))
    fus = verify_fusion(su, win)
    cg = max(fus.max_completeness_error, fus.max_isometry_error)
    ok = exact_ok and worst <= 1e-8 and cg <= 1e-9
    _report(8, "left invariance", ok, f"group duals exact {exact_ok}, SU(2) max deviation {worst:.2e}, CG error {cg:.2e}", t)


def test_criterion_09_double_centralizers():
    t = time.perf_counter()
    if len(_FACTORIZATIONS) < 3:
        test_criterion_05_forward_direction()
        test_criterion_06_backward_direction(Path(__import__("tempfile").mkdtemp()))
    # factor() raises unless z_k(a1) a2 == a1 y_k(a2) exactly on every sampled pair
    pairs = sum(f.centralizer_pairs for _, f in _FACTORIZATIONS)
    ok = all(f.centralizer_pairs == 50 * f.rank for _, f in _FACTORIZATIONS)
    names = ", ".join(f"{n} ({f.rank}x50)" for n, f in _FACTORIZATIONS)
    _report(9, "double centralizers", ok, f"{pairs} exact pair checks over {names}", t)


def test_criterion_10_normalization_independence():
    t = time.perf_counter()
    z = _z()
    z7 = z.with_haar(z.haar.scaled(7))
    A = z.algebra
    same = True
    for rule in (CharacterRule(Fraction(1, 4)), PolynomialRule((0, 1))):
        Y = coproduct_of_multiplier(z, Multiplier(A, rule))
        r1, r7 = slice_space_dimension(Y, z), slice_space_dimension(Y, z7)
        f1, f7 = factor(Y, z, r1), factor(Y, z7, r7)
        same &= r1.dimensions == r7.dimensions
        same &= all(
            EXACT.matrices_equal(f1.product(b, a, EXACT), f7.product(b, a, EXACT))
            for b in f1.b_window for a in f1.a_window
        )
    Y = coproduct_of_multiplier(z, Multiplier(A, PointMassRule(0)))
    hist = []
    for d in (z, z7):
        with pytest.raises(BudgetExceeded) as info:
            slice_space_dimension(Y, d, budget=4)
        hist.append(info.value.report.dimensions)
    same &= hist[0] == hist[1]
    _report(10, "normalization independence", same, f"phi and 7*phi agree on dimensions and products; point mass {hist[1]}", t)


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
