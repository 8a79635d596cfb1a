from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, strategies as st

from selfsim_spectra.errors import (BranchEmpty, DegenerateGap, NoConvergence,
                                    TooFewEigenvalues)
from selfsim_spectra.selfsim import JumpMeasure, jump_measure, validate
from selfsim_spectra.spectra import (Inertia, assemble, compare_oracles, converge_in_level,
                                     counting, eigenvalues, eigs_dense, inertia,
                                     negative_counts, shooting_det, shooting_roots,
                                     shooting_zero_count)

from conftest import THIRD, random_param_sets, valid_params


def table_system(params, R):
    return assemble(jump_measure(params, R))


# -- assembly ------------------------------------------------------------------

def test_single_atom_pencil(single_atom):
    s = assemble(single_atom)
    assert s.N == 1
    np.testing.assert_array_equal(s.K, [[4.0]])
    np.testing.assert_array_equal(s.M, [[1.0]])


def test_table1_level_one(t1):
    s = table_system(t1, 1)
    np.testing.assert_allclose(s.nodes, [1 / 3, 2 / 3])
    np.testing.assert_allclose(s.K, [[6, -3], [-3, 6]], rtol=1e-15)
    np.testing.assert_allclose(s.M, np.diag([2 / 3, 1 / 3]))


def test_table2_level_one(t2):
    s = table_system(t2, 1)
    np.testing.assert_allclose(s.K, [[6, -3], [-3, 6]], rtol=1e-15)
    np.testing.assert_array_equal(s.M, np.diag([-1.0, 1.0]))


def test_anchors_add_massless_breakpoints():
    p = validate(3, (THIRD,) * 3, 2, F(1, 2), (0, 1, 1))
    # zeta_2 = beta_3 - beta_2 - d beta_3 = -1/2, zeta_1 = 1 + 0 = 1
    mu = jump_measure(p, 3)
    plain, anchored = assemble(mu), assemble(mu, anchors=True)
    assert anchored.N == plain.N
    q = validate(3, (THIRD,) * 3, 3, F(1, 2), (0, 1, 1))
    # zeta_2 = beta_3 - beta_2 = 0 is dropped from the measure but anchored
    a = assemble(jump_measure(q, 3), anchors=True)
    assert a.N == assemble(jump_measure(q, 3)).N + 1
    assert a.masses[a.anchor].tolist() == [0.0]


def test_empty_measure_is_rejected():
    with pytest.raises(ValueError):
        assemble(JumpMeasure((), 1))


def test_degenerate_gap():
    x = F(1, 2)
    mu = JumpMeasure.from_points([x, x + F(1, 10**320)], [1.0, 1.0])
    with pytest.raises(DegenerateGap):
        assemble(mu)


def test_system_arrays_are_frozen(t1):
    s = table_system(t1, 3)
    with pytest.raises(ValueError):
        s.masses[0] = 2.0


@given(valid_params(), st.integers(1, 8))
def test_stiffness_is_positive_definite(p, R):
    s = table_system(p, R)
    assert inertia(s, 0.0) == Inertia(0, 0, s.N)
    assert np.all(np.linalg.eigvalsh(s.K) > 0)


# -- inertia and counting -----------------------------------------------------

def test_single_atom_inertia(single_atom):
    s = assemble(single_atom)
    assert inertia(s, 5.0).n_minus == 1
    assert inertia(s, 3.0) == Inertia(0, 0, 1)
    # lambda exactly at the eigenvalue: one zero pivot
    assert inertia(s, 4.0) == Inertia(0, 1, 0)


def test_table1_inertia_at_100(t1):
    for R in (10, 12, 16):
        assert inertia(table_system(t1, R), 100.0).n_minus == 4


def test_counting_examples(t1, t2):
    s1, s2 = table_system(t1, 12), table_system(t2, 12)
    assert counting(s1, 0.0) == 0
    assert counting(s1, 20.0) == 2
    assert counting(s2, -30.0) == 2
    np.testing.assert_array_equal(counting(s1, np.array([1.0, 20.0, 60.0])), [0, 2, 3])


def test_sturm_count_matches_dense_inertia(table_set):
    s = table_system(table_set, 8)
    for lam in np.concatenate([-np.geomspace(0.3, 3e3, 17), np.geomspace(0.3, 3e3, 17)]):
        dense = int(np.sum(np.linalg.eigvalsh(s.pencil(lam)) < 0))
        assert inertia(s, lam).n_minus == dense


def test_tiny_gaps_do_not_spoil_the_count():
    # gaps of 16^-11 next to O(1) gaps: forming K in floats would lose the O(1) part
    p = validate(5, (F(3, 16), F(1, 16), F(5, 16), F(5, 16), F(1, 8)), 2, F(-36, 25),
                 (1, 0, 2, 0, 3))
    s = table_system(p, 12)
    assert s.gaps.min() < 1e-14
    cmp = compare_oracles(s)
    assert min(cmp.requested) >= 3
    assert cmp.agrees(1e-12)
    bis, shot = eigenvalues(s, 6, 6, tol=1e-15), shooting_roots(s, 6, 6)
    np.testing.assert_allclose(bis.positive, shot.positive, rtol=1e-12)
    np.testing.assert_allclose(bis.negative, shot.negative, rtol=1e-12)


@given(valid_params(), st.integers(1, 7),
       st.lists(st.floats(1e-3, 1e5), min_size=2, max_size=12))
def test_counting_is_monotone(p, R, lams):
    s = table_system(p, R)
    lams = np.sort(np.array(lams))
    up = counting(s, lams)
    down = counting(s, -lams)
    assert np.all(np.diff(up) >= 0)
    assert np.all(np.diff(down) >= 0)


@given(valid_params(), st.integers(1, 7))
def test_branch_sizes_follow_mass_signs(p, R):
    # Sylvester: with K > 0 each sign class of M gives that many eigenvalues
    s = table_system(p, R)
    top = 10 * max(np.abs(eigs_dense(s).positive).max(initial=1.0),
                   np.abs(eigs_dense(s).negative).max(initial=1.0))
    assert counting(s, top) == int(np.sum(s.masses > 0))
    assert counting(s, -top) == int(np.sum(s.masses < 0))


def test_negative_counts_vectorised(t1):
    s = table_system(t1, 6)
    lams = np.geomspace(1, 1e4, 9)
    neg, singular = negative_counts(s, lams)
    assert neg.shape == lams.shape and not singular.any()
    assert neg.tolist() == [counting(s, float(x)) for x in lams]


# -- eigenvalues -----------------------------------------------------------------

def test_single_atom_spectrum(single_atom):
    s = assemble(single_atom)
    seq = eigenvalues(s, positive=1, tol=1e-14)
    assert seq.positive[0] == pytest.approx(4.0, rel=1e-14)
    assert eigs_dense(s).positive[0] == pytest.approx(4.0, rel=1e-14)
    with pytest.raises(BranchEmpty):
        eigenvalues(s, negative=1)


def test_two_equal_atoms():
    # K = [[6, -3], [-3, 6]], M = c I: lambda = 3/c and 9/c
    c = 0.7
    s = assemble(JumpMeasure.from_points([THIRD, 2 * THIRD], [c, c]))
    for seq in (eigenvalues(s, 2, tol=1e-14), eigs_dense(s), shooting_roots(s, 2)):
        np.testing.assert_allclose(seq.positive, [3 / c, 9 / c], rtol=1e-13)


def test_too_many_requested(t1):
    with pytest.raises(TooFewEigenvalues):
        eigenvalues(table_system(t1, 2), positive=5)


def test_table1_lowest(t1):
    seq = eigenvalues(table_system(t1, 12), positive=1)
    assert seq.positive[0] == pytest.approx(4.9341, abs=1e-3)
    assert seq.positive_err[0] <= 1e-8 * seq.positive[0]


def test_bisection_certificate(table_set):
    s = table_system(table_set, 10)
    n_pos, n_neg = min(4, int((s.masses > 0).sum())), min(4, int((s.masses < 0).sum()))
    seq = eigenvalues(s, n_pos, n_neg, tol=1e-10)
    for sign, vals, errs in ((1, seq.positive, seq.positive_err),
                             (-1, seq.negative, seq.negative_err)):
        for j, (lam, err) in enumerate(zip(vals, errs)):
            assert err <= 1e-10 * abs(lam)
            lo, hi = abs(lam) - 2 * err, abs(lam) + 2 * err
            assert counting(s, sign * lo) == j and counting(s, sign * hi) == j + 1
    assert seq.is_simple()


def test_dense_agrees_table1(t1):
    s = table_system(t1, 12)
    dense = eigs_dense(s)
    bis = eigenvalues(s, positive=8, tol=1e-14)
    np.testing.assert_allclose(bis.positive, dense.positive[:8], rtol=1e-10)


def test_dense_counts_table2(t2):
    s = table_system(t2, 12)
    dense = eigs_dense(s)
    assert len(dense.positive) == int((s.masses > 0).sum()) > 0
    assert len(dense.negative) == int((s.masses < 0).sum()) > 0
    assert np.all(np.diff(dense.positive) > 0) and np.all(np.diff(dense.negative) < 0)


def test_dense_skips_massless_nodes(t1):
    q = validate(3, (THIRD,) * 3, 3, F(1, 2), (0, 1, 1))
    s = assemble(jump_measure(q, 4), anchors=True)
    dense = eigs_dense(s)
    assert len(dense.positive) + len(dense.negative) == int(np.count_nonzero(s.masses))
    ref = eigenvalues(s, min(3, len(dense.positive)), tol=1e-14)
    np.testing.assert_allclose(ref.positive, dense.positive[:len(ref.positive)], rtol=1e-10)


@given(valid_params(), st.integers(1, 7), st.floats(0.01, 100))
def test_scale_covariance(p, R, c):
    s = table_system(p, R)
    n_pos, n_neg = min(3, int((s.masses > 0).sum())), min(3, int((s.masses < 0).sum()))
    base = eigenvalues(s, n_pos, n_neg, tol=1e-15)
    scaled = eigenvalues(s.scaled(c), n_pos, n_neg, tol=1e-15)
    np.testing.assert_allclose(scaled.positive * c, base.positive, rtol=1e-12)
    np.testing.assert_allclose(scaled.negative * c, base.negative, rtol=1e-12)


@given(valid_params(), st.integers(1, 8))
def test_spectrum_is_simple(p, R):
    s = table_system(p, R)
    assert eigs_dense(s).is_simple()


# -- shooting ------------------------------------------------------------------

@pytest.mark.parametrize("a, c", [(F(1, 2), 1.0), (F(1, 5), 2.5), (F(7, 9), -0.4)])
def test_single_atom_shooting(a, c):
    mu = JumpMeasure.from_points([a], [c])
    af = float(a)
    for lam in (0.0, 1.3, -7.0):
        assert shooting_det(mu, lam) == pytest.approx(af + (1 - lam * c * af) * (1 - af), rel=1e-14)
    root = 1 / (c * af * (1 - af))
    seq = shooting_roots(mu, positive=int(c > 0), negative=int(c < 0))
    got = seq.positive if c > 0 else seq.negative
    assert got[0] == pytest.approx(root, rel=1e-14)


def test_shooting_at_zero_is_one(t1):
    assert shooting_det(jump_measure(t1, 5), 0.0) == pytest.approx(1.0, rel=1e-15)


def test_shooting_sign_changes_bracket_eigenvalues(t1):
    mu = jump_measure(t1, 10)
    s = assemble(mu)
    lams = eigenvalues(s, positive=6, tol=1e-13).positive
    for lam in lams:
        left, right = shooting_det(mu, lam * (1 - 1e-9)), shooting_det(mu, lam * (1 + 1e-9))
        assert left * right < 0
    mids = np.sqrt(lams[:-1] * lams[1:])
    assert np.all(np.diff(np.sign(shooting_det(mu, mids))) != 0)
    # oscillation count equals the Sturm count between eigenvalues
    np.testing.assert_array_equal(shooting_zero_count(mu, mids), counting(s, mids))


# -- cross-checks and truncation control ------------------------------------------

def test_compare_oracles_on_random_sets():
    for p in random_param_sets(8, seed=7):
        cmp = compare_oracles(table_system(p, 8))
        assert sum(cmp.requested) >= 1
        assert cmp.agrees(1e-10), (p, cmp.max_rel)


def test_converge_zero_d():
    p = validate(3, (F(1, 4), F(1, 2), F(1, 4)), 2, 0, (0, 2, -1))
    seq = converge_in_level(p, 1, 1)
    assert seq.truncation_level == 1
    # K = [[4+2, -2], [-2, 2+4]] with M = diag(2, -3)
    K = np.array([[6.0, -2.0], [-2.0, 6.0]])
    import scipy.linalg
    ref = np.sort(scipy.linalg.eigvals(K, np.diag([2.0, -3.0])).real)
    assert seq.positive[0] == pytest.approx(ref[1], rel=1e-12)
    assert seq.negative[0] == pytest.approx(ref[0], rel=1e-12)


def test_converge_table1(t1):
    seq = converge_in_level(t1, positive=8, tol=1e-6)
    assert seq.history[-1][1] < 1e-6
    assert np.all(seq.positive_change < 1e-6)
    assert 9 <= seq.truncation_level <= 13


def test_converge_reports_failure(t1):
    with pytest.raises(NoConvergence):
        converge_in_level(t1, positive=8, tol=1e-14, R_max=6)


def test_converge_branch_empty(t1):
    with pytest.raises(BranchEmpty):
        converge_in_level(t1, negative=1)


def test_converge_mixed_sign_reaches_both_branches(t3):
    # d < 0 turns every other level around, so both branches appear
    seq = converge_in_level(t3, positive=6, negative=7)
    assert len(seq.positive) == 6 and len(seq.negative) == 7
