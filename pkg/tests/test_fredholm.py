import math
import random
from fractions import Fraction

import numpy as np
import pytest
from scipy.linalg import expm

from chernloc.barcomplex import (BarChain, b, beta, cochain_mul,
                                 cyclic_symmetrize, is_cyclic)
from chernloc.formmatrix import FormMatrix
from chernloc.fredholm import (FredholmModel, bismut_chern, bismut_words,
                               chern_t, connection_cochain, curvature,
                               curvature_cochain, curvature_word_matrix,
                               duhamel_expm, mckean_singer_check,
                               random_idempotent, random_model,
                               simplex_matrix_integral, simplex_str,
                               trace_expand)
from chernloc.multiform import FormElement, GeneratorTable
from chernloc.sampling import random_word
from chernloc.scalars import QC


def base_table():
    t = GeneratorTable(4)
    t.add_generator("x", 1)
    t.add_generator("y", 1)
    t.add_generator("u", 2)
    t.set_differential("x", "u")
    return t


def rich_table():
    t = GeneratorTable(6)
    t.add_generator("y", 3)
    t.add_generator("w", 2)
    t.set_differential("w", "y")
    t.add_generator("z", 3)
    t.add_generator("v", 2)
    t.set_differential("v", "z")
    return t


# -- model structure --------------------------------------------------------------------


def test_model_rejects_even_q():
    t = base_table()
    Q = np.eye(4, dtype=complex)
    with pytest.raises(ValueError):
        FredholmModel(t, 2, 2, Q, {})


def test_relation_report_on_unit():
    rng = random.Random(0)
    t = base_table()
    m = random_model(t, rng)
    rep = m.relation_report()
    assert rep["c(1) is identity"]
    assert rep["[Q, c(1)] = c(d1) = 0"]
    assert rep["c(1 * theta) = c(1) c(theta)"]


# -- curvature ---------------------------------------------------------------------------


def test_curvature_arity_zero_is_q_squared():
    rng = random.Random(1)
    t = base_table()
    m = random_model(t, rng)
    comps = curvature(m)
    assert np.allclose(comps.F0, m.Q @ m.Q)
    assert np.allclose(curvature_cochain(m).eval_word(()), m.Q @ m.Q)


def test_curvature_two_slots_vanish_on_constants():
    rng = random.Random(2)
    t = base_table()
    m = random_model(t, rng)
    comps = curvature(m)
    f, g = t.scalar(QC(2)), t.scalar(QC(Fraction(1, 3)))
    assert np.allclose(comps.F2(f, g), 0)


def test_curvature_matches_cochain_algebra():
    # oracle: F = beta(omega) + omega * omega through the cochain operations
    rng = random.Random(3)
    t = base_table()
    m = random_model(t, rng)
    omega = connection_cochain(m)
    derived = beta(omega)
    square = cochain_mul(omega, omega)
    direct = curvature_cochain(m)
    for _ in range(60):
        word = random_word(t, rng, max_len=3)
        chain = BarChain.from_word(t, word)
        want = derived.eval_chain(chain) + square.eval_chain(chain)
        assert np.allclose(direct.eval_chain(chain), want, atol=1e-12)


def test_curvature_vanishes_above_two_slots():
    rng = random.Random(4)
    t = base_table()
    m = random_model(t, rng)
    F = curvature_cochain(m)
    word = tuple(t.gen("x") for _ in range(3))
    assert np.allclose(F.eval_chain(BarChain.from_word(t, word)), 0)


# -- simplex integrals ----------------------------------------------------------------------


def random_hermitian_psd(rs, n):
    Q = rs.randn(n, n) + 1j * rs.randn(n, n)
    return Q @ Q.conj().T


def test_engines_agree():
    rs = np.random.RandomState(7)
    A = random_hermitian_psd(rs, 5)
    w = np.diag([1, 1, 1, -1, -1]).astype(complex)
    for k in (0, 1, 2, 3):
        Bs = [rs.randn(5, 5) + 1j * rs.randn(5, 5) for _ in range(k)]
        dd = simplex_str(A, Bs, w, "dd")
        ex = simplex_str(A, Bs, w, "expm")
        qd = simplex_str(A, Bs, w, "quad", quad_order=24)
        assert abs(dd - ex) < 1e-10 * max(1.0, abs(ex))
        assert abs(qd - ex) < 1e-9 * max(1.0, abs(ex))


def test_dd_handles_near_confluent_spectrum():
    # eigenvalue gaps straddling the cluster threshold must stay accurate
    w = np.diag([1, 1, -1]).astype(complex)
    rs = np.random.RandomState(8)
    Bs = [rs.randn(3, 3) + 1j * rs.randn(3, 3) for _ in range(2)]
    for gap in (1e-3, 1e-5, 1e-7, 1e-9, 0.0):
        A = np.diag([0.5, 0.5 + gap, 0.5 + 2 * gap]).astype(complex)
        dd = simplex_str(A, Bs, w, "dd")
        ex = simplex_str(A, Bs, w, "expm")
        assert abs(dd - ex) < 1e-9, gap


def test_dd_on_non_hermitian_generator():
    # complex spectra are legal inputs for the explicit dd engine
    rs = np.random.RandomState(12)
    A = rs.randn(4, 4) + 0.3j * rs.randn(4, 4)
    A = A @ A.T + 4.0 * np.eye(4)     # keep the spectrum well separated
    w = np.diag([1, 1, -1, -1]).astype(complex)
    Bs = [rs.randn(4, 4) + 1j * rs.randn(4, 4) for _ in range(2)]
    dd = simplex_str(A, Bs, w, "dd")
    ex = simplex_str(A, Bs, w, "expm")
    assert abs(dd - ex) < 1e-9 * max(1.0, abs(ex))


def test_dd_handles_confluent_spectrum():
    # a fully degenerate generator: the integral collapses to e^-lambda / k!
    lam = 0.7
    A = lam * np.eye(3, dtype=complex)
    w = np.eye(3, dtype=complex)
    rs = np.random.RandomState(3)
    Bs = [rs.randn(3, 3) for _ in range(2)]
    got = simplex_str(A, Bs, w, "dd")
    want = math.exp(-lam) / math.factorial(2) * np.trace(w @ Bs[0] @ Bs[1])
    assert abs(got - want) < 1e-12


def test_central_q_squared_closed_form():
    # Q^2 = lambda Id: the simplex integral reduces to e^(-t^2 lambda)/k!
    # times the supertrace of the curvature product; oracle is quadrature
    t = base_table()
    rng = random.Random(11)
    lam = 1.3
    Q = np.zeros((4, 4), dtype=complex)
    Q[:2, 2:] = math.sqrt(lam) * np.eye(2)
    Q[2:, :2] = math.sqrt(lam) * np.eye(2)
    m0 = random_model(t, rng, 2, 2)
    m = FredholmModel(t, 2, 2, Q, {k: v for k, v in m0.c_map.items() if k})
    assert np.allclose(m.Q @ m.Q, lam * np.eye(4))
    word = (t.gen("x"), t.gen("y"))
    tt = 0.8
    comps = curvature(m)
    B1, B2 = comps.F1(t.gen("x")), comps.F1(t.gen("y"))
    B12 = comps.F2(t.gen("x"), t.gen("y"))
    closed = math.exp(-tt * tt * lam) * (
        (tt ** 4) / 2.0 * m.str_of(B1 @ B2) - (tt ** 2) * m.str_of(B12))
    got = chern_t(m, tt, word, engine="expm")
    assert abs(got - closed) < 1e-12
    quad = chern_t(m, tt, word, engine="quad")
    assert abs(got - quad) < 1e-9


def test_duhamel_series_converges_factorially():
    rs = np.random.RandomState(5)
    A = random_hermitian_psd(rs, 4)
    V = 0.6 * (rs.randn(4, 4) + 1j * rs.randn(4, 4))
    target = expm(-(A + V))
    errs = [np.linalg.norm(duhamel_expm(A, V, n) - target) for n in (2, 4, 6, 8)]
    assert errs[-1] < 1e-6
    for a, bb in zip(errs, errs[1:]):
        assert bb < a / 5


def test_transfer_matrix_equals_composition_sum():
    rng = random.Random(5)
    t = rich_table()
    m = random_model(t, rng, 2, 2, scale=0.35, q_scale=0.8)
    p = random_idempotent(t, rng, n=2, scale=Fraction(1, 4))
    for coeff, word in bismut_words(p, 2):
        va = chern_t(m, 1.0, word, engine="auto")
        vd = chern_t(m, 1.0, word, engine="dd")
        assert abs(va - vd) < 1e-11


# -- the character ------------------------------------------------------------------------------


def test_chern_engines_agree_on_random_words():
    rng = random.Random(61)
    t = base_table()
    m = random_model(t, rng)
    compared = 0
    for _ in range(15):
        word = random_word(t, rng, max_len=3)
        chain = BarChain.from_word(t, word)
        if chain.is_zero():
            continue
        ex = chern_t(m, 0.7, chain, engine="expm")
        dd = chern_t(m, 0.7, chain, engine="dd")
        qd = chern_t(m, 0.7, chain, engine="quad")
        assert abs(ex - dd) < 1e-9 * max(1.0, abs(ex))
        assert abs(ex - qd) < 1e-8 * max(1.0, abs(ex))
        compared += 1
    assert compared >= 8


def test_chern_rejects_nonpositive_t():
    rng = random.Random(6)
    t = base_table()
    m = random_model(t, rng)
    with pytest.raises(ValueError):
        chern_t(m, 0.0, ())


def test_chern_on_empty_word_is_heat_supertrace():
    rng = random.Random(6)
    t = base_table()
    m = random_model(t, rng)
    for tt in (0.5, 1.0):
        got = chern_t(m, tt, ())
        want = complex(np.trace(m.grading @ expm(-(tt * tt) * (m.Q @ m.Q))))
        assert abs(got - want) < 1e-12


def test_chern_vanishes_without_assignments():
    t = base_table()
    rng = random.Random(8)
    m0 = random_model(t, rng)
    m = FredholmModel(t, 2, 2, m0.Q, {})   # only c(1) = id remains
    theta = t.sigma() * t.gen("u")
    # theta' = 0 and c(theta'') = 0, so every block vanishes
    word = (t.gen("x") * t.gen("y"),)
    assert chern_t(m, 1.0, word) == 0
    assert abs(chern_t(m, 1.0, (theta,))) == 0


def test_chern_kills_odd_words():
    rng = random.Random(9)
    t = base_table()
    m = random_model(t, rng)
    # a word of odd shifted parity has odd-parity values; the supertrace
    # of an odd matrix vanishes
    word = (t.parse("x y"),)     # n_1 = 2 - 1 odd
    assert abs(chern_t(m, 0.9, word)) < 1e-13


def test_coclosedness_on_cyclic_chains():
    # beta(Ch) = 0 restricted to cyclic chains: Ch(b(x)) = 0 whenever x is a
    # symmetrized word; exercises every sign convention at once
    rng = random.Random(10)
    t = base_table()
    m = random_model(t, rng)
    checked = 0
    for _ in range(20):
        word = random_word(t, rng, max_len=3)
        if not word:
            continue
        cyc = cyclic_symmetrize(BarChain.from_word(t, word))
        if cyc.is_zero():
            continue
        value = chern_t(m, 0.8, b(cyc), engine="expm")
        assert abs(value) < 1e-9
        checked += 1
    assert checked >= 10


def test_exponential_commutator_supertrace_vanishes_on_cyclic_words():
    # the mechanism behind coclosedness: Str([e^-F, omega]) kills cyclic
    # chains; built here by explicit small-arity expansion of e^-F
    rng = random.Random(77)
    t = base_table()
    m = random_model(t, rng)
    A = m.Q @ m.Q
    comps = curvature(m)

    def exp_f0(word):
        return expm(-A)

    def exp_f1(word):
        theta = FormElement(t, {word[0]: QC(1)})
        return -simplex_matrix_integral(A, [comps.F1(theta)])

    def exp_f2(word):
        th1 = FormElement(t, {word[0]: QC(1)})
        th2 = FormElement(t, {word[1]: QC(1)})
        return simplex_matrix_integral(A, [comps.F1(th1), comps.F1(th2)]) \
            - simplex_matrix_integral(A, [comps.F2(th1, th2)])

    from chernloc.barcomplex import Cochain
    exp_f = Cochain(t, 0, {0: exp_f0, 1: exp_f1, 2: exp_f2},
                    kind="matrix", dim=m.dim)
    omega = connection_cochain(m)
    left = cochain_mul(exp_f, omega)
    right = cochain_mul(omega, exp_f)

    checked = 0
    for _ in range(30):
        word = random_word(t, rng, max_len=2)
        if not word:
            continue
        cyc = cyclic_symmetrize(BarChain.from_word(t, word))
        if cyc.is_zero():
            continue
        value = m.str_of(left.eval_chain(cyc) - right.eval_chain(cyc))
        assert abs(value) < 1e-10
        checked += 1
    assert checked >= 10


def test_chern_not_coclosed_off_cyclic():
    # the same evaluation on a generic non-cyclic chain is nonzero, so the
    # previous test is not vacuous
    rng = random.Random(104)
    t = base_table()
    m = random_model(t, rng)
    found = False
    for _ in range(40):
        word = random_word(t, rng, max_len=3)
        if not word:
            continue
        chain = BarChain.from_word(t, word)
        if abs(chern_t(m, 0.8, b(chain), engine="expm")) > 1e-6:
            found = True
            break
    assert found


# -- idempotent chains -----------------------------------------------------------------------------


def test_bismut_chern_constant_projection():
    t = base_table()
    p = FormMatrix.from_scalars(t, [[1, 0], [0, 0]])
    chain, info = bismut_chern(p, 6, report=True)
    assert chain == BarChain.from_word(t, (t.sigma(),))
    assert info["natural_truncation"]


def test_bismut_chern_rank_one_trivial_bundle():
    t = base_table()
    p = FormMatrix.from_scalars(t, [[1]])
    chain = bismut_chern(p, 4)
    assert chain == BarChain.from_word(t, (t.sigma(),))


def test_bismut_chern_requires_idempotent():
    t = base_table()
    bad = FormMatrix.from_scalars(t, [[2]])
    with pytest.raises(ValueError):
        bismut_chern(bad, 3)
    off = FormMatrix.parse(t, [["1", "x"], ["0", "1"]])
    with pytest.raises(ValueError):
        bismut_chern(off, 3)


def test_bismut_chern_cyclic_and_even():
    rng = random.Random(12)
    t = rich_table()
    p = random_idempotent(t, rng, n=2, scale=Fraction(1, 3))
    chain = bismut_chern(p, 3)
    assert is_cyclic(chain)
    for word in chain.terms:
        shifted = sum(t.mono_degree(m) for m in word) - len(word)
        assert shifted % 2 == 0


def test_trace_pattern_matches_scalar_expansion():
    rng = random.Random(5)
    t = rich_table()
    m = random_model(t, rng, 2, 2, scale=0.35, q_scale=0.8)
    p = random_idempotent(t, rng, n=2, scale=Fraction(1, 4))
    for coeff, word in bismut_words(p, 2):
        via_matrix = chern_t(m, 1.0, word, engine="expm")
        via_chain = chern_t(m, 1.0, trace_expand(word), engine="expm")
        assert abs(via_matrix - via_chain) < 1e-11


# -- heat-supertrace comparison -----------------------------------------------------------------------


def test_mckean_singer_flat_cases():
    rng = random.Random(14)
    t = base_table()
    m = random_model(t, rng)
    # dp = 0: both sides are Str(p-hat e^(-t^2 Q^2))
    p = FormMatrix.from_scalars(t, [[1, 0], [0, 0]])
    rep = mckean_singer_check(m, p, t=1.0)
    assert rep.difference < 1e-12
    # p = identity: both sides are Str(e^(-Q^2))
    p1 = FormMatrix.from_scalars(t, [[1]])
    rep = mckean_singer_check(m, p1, t=1.0)
    ref = complex(np.trace(m.grading @ expm(-(m.Q @ m.Q))))
    assert abs(rep.lhs - ref) < 1e-12
    assert rep.difference < 1e-12


def test_mckean_singer_random_model():
    rng = random.Random(51)
    t = rich_table()
    m = random_model(t, rng, 2, 2, scale=0.35, q_scale=0.8)
    p = random_idempotent(t, rng, n=2, scale=Fraction(1, 4))
    R = curvature_word_matrix(p)
    assert not R.is_zero()
    rep = mckean_singer_check(m, p, t=1.0, tol=1e-10)
    assert rep.difference < 1e-8
    # the flagged discrepancy: the linear heat factor is genuinely different
    assert abs(rep.rhs_heat_sq - rep.rhs_heat_lin) > 1e-6
    # factorial tail decay
    tail = [abs(z) for z in rep.terms[-3:]]
    assert tail[-1] < 1e-10


def test_mckean_singer_scaled_module():
    rng = random.Random(52)
    t = rich_table()
    m = random_model(t, rng, 2, 2, scale=0.4, q_scale=0.7)
    p = random_idempotent(t, rng, n=2, scale=Fraction(1, 4))
    rep = mckean_singer_check(m, p, t=0.8, tol=1e-10)
    assert rep.difference < 1e-8
