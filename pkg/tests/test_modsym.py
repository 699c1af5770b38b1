from collections import Counter
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st
from sympy import Matrix, eye, primerange

from quadsym.arith import GroupElement
from quadsym.errors import InvalidArgumentError
from quadsym.fuchsian import TABLE1, genus_and_elliptic_counts, vk_matrix
from quadsym.modsym import (MTerm, ProjectiveLine, build_space, coset_representatives,
                            distinguished_class_decomposition, eisenstein_eigenvalues, hecke_cosets,
                            homology_class, lift_to_sl2, manin_trick, normalize_cusp)

GAMMA0_11 = [GroupElement(1, 1, 0, 1), GroupElement(6, 1, 11, 2), GroupElement(4, 1, 11, 3),
             GroupElement(3, 1, 11, 4), GroupElement(9, 4, 11, 5)]

cusps = st.one_of(st.just('inf'), st.fractions(max_denominator=60).filter(lambda x: abs(x) < 20))
letters = st.tuples(st.sampled_from(range(len(GAMMA0_11))), st.sampled_from([1, -1]))


def test_projective_line_sizes():
    assert len(ProjectiveLine(11)) == 12
    assert len(ProjectiveLine(12)) == 24
    assert ProjectiveLine(12).reduce(2, 4) is None
    with pytest.raises(InvalidArgumentError):
        ProjectiveLine(12).index(2, 4)


def test_lift_to_sl2():
    P1 = ProjectiveLine(12)
    for c, d in P1:
        a, b, c2, d2 = lift_to_sl2(c, d, 12)
        assert a * d2 - b * c2 == 1
        assert P1.reduce(c2, d2) == (c, d)


def test_manin_trick_simple_path():
    assert manin_trick(0, Fraction(1, 2)) == [MTerm(1, (1, 0, 2, 1))]
    assert manin_trick(Fraction(3, 7), Fraction(3, 7)) == []


@settings(derandomize=True, max_examples=100)
@given(cusps, cusps)
def test_manin_trick_telescopes(alpha, beta):
    boundary = Counter()
    for t in manin_trick(alpha, beta):
        a, b, c, d = t.matrix
        assert a * d - b * c in (1, -1)
        boundary[normalize_cusp(a, c)] += t.sign
        boundary[normalize_cusp(b, d)] -= t.sign
    expected = Counter()
    for x, s in ((beta, 1), (alpha, -1)):
        key = normalize_cusp(1, 0) if x == 'inf' else normalize_cusp(x.numerator, x.denominator)
        expected[key] += s
    assert {k: v for k, v in boundary.items() if v} == {k: v for k, v in expected.items() if v}


def test_space11_dimensions(space11):
    assert space11.dim == 3
    assert space11.cuspidal_dim == 2
    assert len(space11.cusps) == 2


@pytest.mark.parametrize('p', [p for p in TABLE1 if p <= 47])
def test_cuspidal_dimension_is_twice_genus(p):
    g, _, _ = genus_and_elliptic_counts(p)
    assert build_space(p).cuspidal_dim == 2 * g


def test_hecke_on_level_11(space11):
    assert space11.hecke_matrix(2) == -2 * eye(2)
    assert space11.hecke_matrix(3) == -1 * eye(2)
    assert space11.hecke_matrix(2) * space11.hecke_matrix(3) == space11.hecke_matrix(3) * space11.hecke_matrix(2)
    assert space11.star_matrix() ** 2 == eye(2)


def test_hecke_cosets():
    assert len(hecke_cosets(2, 11)) == 3
    assert len(hecke_cosets(11, 11)) == 11
    with pytest.raises(InvalidArgumentError):
        hecke_cosets(4, 11)


def test_eisenstein_eigenvalues(space11):
    assert eisenstein_eigenvalues(space11, 2) == [3]
    assert eisenstein_eigenvalues(space11, 7) == [8]


def test_eigenvalues_match_point_counts(system11, oracle11):
    for p in primerange(2, 60):
        assert system11.a_p(p) == oracle11[p], p
    assert system11.a_p(11) == 1


@pytest.mark.parametrize('sign', [1, -1])
def test_dual_eigenvector(system11, space11, sign):
    psi = Matrix([system11.functional(sign)])
    assert any(psi)
    for q in (2, 3, 5, 7):
        assert psi * space11.hecke_full(q) == system11.a_p(q) * psi
    assert psi * space11.star_full() == sign * psi
    with pytest.raises(InvalidArgumentError):
        system11.functional(0)


def test_coset_representatives():
    reps = coset_representatives(11)
    assert len(reps) == 12
    assert all(g.det == 1 for g in reps)


@settings(derandomize=True, max_examples=50, deadline=None)
@given(st.lists(letters, min_size=1, max_size=4))
def test_homology_class_is_a_homomorphism(space11, word):
    g = GroupElement.identity()
    total = homology_class(space11, g)
    for i, e in word:
        eta = GAMMA0_11[i] ** e
        g = g * eta
        total = total + homology_class(space11, eta)
    assert homology_class(space11, g) == total
    assert homology_class(space11, g, 'inf') == total
    assert homology_class(space11, g, Fraction(1, 3)) == total


def test_homology_rejects_matrices_outside_gamma0(space11):
    with pytest.raises(InvalidArgumentError):
        homology_class(space11, GroupElement(0, -1, 1, 0))


def test_elliptic_classes_vanish():
    space = build_space(17)
    for k, _ in TABLE1[17][1]:
        assert homology_class(space, vk_matrix(k, 17)).is_zero()


def test_distinguished_class_decomposition(space11):
    word = [GAMMA0_11[0], GAMMA0_11[1], GAMMA0_11[3] ** -1]
    g = word[0] * word[1] * word[2]
    terms = distinguished_class_decomposition(space11, g, word)
    assert [t.kind for t in terms][0] == 'parabolic'
    assert sum((t.path_class for t in terms[1:]), terms[0].path_class) == homology_class(space11, g)
    with pytest.raises(InvalidArgumentError):
        distinguished_class_decomposition(space11, GAMMA0_11[1], word)
