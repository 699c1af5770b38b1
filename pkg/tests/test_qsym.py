from fractions import Fraction

import pytest

from quadsym.arith import GroupElement
from quadsym.errors import InvalidArgumentError, NotApplicableError
from quadsym.fuchsian import S_MATRIX, UpperHalfPoint, mobius_apply
from quadsym.qsym import (ClassicalSymbol, DeltaWord, admissible_prime, collision_search, coset_indices, coset_matrix,
                          fixed_point_matrices, gamma0_elements, inject_classical, injection_matrix, tau_point,
                          word_pairs)

INF = UpperHalfPoint.cusp('inf')
GAMMA0_11 = [GroupElement(6, 1, 11, 2), GroupElement(4, 1, 11, 3), GroupElement(9, 4, 11, 5)]


@pytest.fixture(scope='module')
def symbols11(system11):
    return [ClassicalSymbol.from_eigensystem(system11, 1), ClassicalSymbol.from_eigensystem(system11, -1)]


def test_coset_matrix():
    assert coset_matrix(2, 3) == GroupElement(1, 2, 0, 3)
    assert coset_matrix(3, 3) == GroupElement(3, 0, 0, 1)
    with pytest.raises(InvalidArgumentError):
        coset_matrix(4, 3)


def test_tau_point():
    assert tau_point(2) == UpperHalfPoint.exact(0, 1, -2)
    with pytest.raises(InvalidArgumentError):
        tau_point(4)


@pytest.mark.parametrize('D, p, expected', [(1, 3, True), (1, 5, False), (1, 7, True), (2, 3, False),
                                            (2, 5, True), (3, 5, True), (3, 7, False)])
def test_admissible_prime(D, p, expected):
    assert admissible_prime(D, p) is expected


def test_admissible_prime_rejects():
    with pytest.raises(NotApplicableError):
        admissible_prime(1, 2)
    with pytest.raises(NotApplicableError):
        admissible_prime(3, 3)
    with pytest.raises(InvalidArgumentError):
        admissible_prime(1, 9)


class TestDeltaWord:
    def test_matrix_and_point(self):
        w = DeltaWord(1, 3, (1,))
        assert w.matrix() == GroupElement(1, 1, 0, 3)
        assert w.point() == UpperHalfPoint.exact(Fraction(1, 3), Fraction(1, 3), -1)
        assert w.cusp() == INF

    def test_tail(self):
        w = DeltaWord(1, 3, (2,), S_MATRIX)
        assert w.cusp() == UpperHalfPoint.cusp(Fraction(2, 3))
        assert DeltaWord(1, 3, (), S_MATRIX).cusp() == UpperHalfPoint.cusp(0)

    def test_translate(self):
        g = GAMMA0_11[0]
        w = DeltaWord(1, 3, (0, 1), S_MATRIX).translate(g)
        assert w.matrix() == g * DeltaWord(1, 3, (0, 1), S_MATRIX).matrix()


def test_word_pairs():
    assert len(word_pairs(1, 3, 1)) == 5
    assert len(word_pairs(1, 3, 2)) == 21
    assert all(P.word == () and P.cusp() == INF for P, _ in word_pairs(1, 3, 2))
    assert len(word_pairs(1, 11, 1)) == 13
    assert len(word_pairs(1, 11, 1, N=11)) == 12
    assert all(11 not in Q.word for _, Q in word_pairs(1, 11, 1, N=11))


def test_coset_indices_depend_on_level():
    assert list(coset_indices(3, 11)) == [0, 1, 2, 3]
    assert list(coset_indices(11, 11)) == list(range(11))
    assert list(coset_indices(11, 22)) == list(range(11))
    with pytest.raises(InvalidArgumentError):
        coset_indices(3, 0)


@pytest.mark.parametrize('N, bound', [(1, 2), (11, 1), (11, 12), (5, 7)])
def test_gamma0_elements(N, bound):
    elements = gamma0_elements(N, bound)
    assert len(set(elements)) == len(elements)
    assert (1, 0, 0, 1) in elements and (-1, 0, 0, -1) in elements
    for a, b, c, d in elements:
        assert a * d - b * c == 1
        assert c % N == 0
        assert max(abs(a), abs(b), abs(c), abs(d)) <= bound


class TestClassicalSymbol:
    def test_antisymmetry(self, symbols11):
        for F in symbols11:
            assert F('inf', 0) == -F(0, 'inf')
            assert F(Fraction(1, 3), Fraction(1, 3)) == 0
            assert F(0, Fraction(1, 2)) + F(Fraction(1, 2), 'inf') == F(0, 'inf')

    def test_invariance(self, symbols11):
        from quadsym.modsym import act_on_cusp, as_cusp

        for F in symbols11:
            for g in GAMMA0_11:
                m = g.integer_entries()
                for a, b in [(0, 'inf'), (Fraction(1, 3), Fraction(2, 5))]:
                    assert F(act_on_cusp(m, as_cusp(a)), act_on_cusp(m, as_cusp(b))) == F(a, b)

    def test_names_and_weights(self, symbols11, space11):
        assert [F.name for F in symbols11] == ['psi+', 'psi-']
        with pytest.raises(InvalidArgumentError):
            ClassicalSymbol(space11, [1])

    def test_rejects_interior_points(self, symbols11):
        with pytest.raises(InvalidArgumentError):
            symbols11[0](tau_point(1), 'inf')


class TestInjection:
    def test_inject_uses_cusp_images(self, symbols11):
        P, Q = DeltaWord(1, 3, ()), DeltaWord(1, 3, (1,), S_MATRIX)
        F = symbols11[0]
        assert inject_classical(F, P, Q) == F('inf', Fraction(1, 3))

    def test_inadmissible_prime_rejected(self, symbols11):
        with pytest.raises(InvalidArgumentError):
            inject_classical(symbols11[0], DeltaWord(1, 5, ()), DeltaWord(1, 5, (), S_MATRIX))
        with pytest.raises(InvalidArgumentError):
            inject_classical(symbols11[0], DeltaWord(1, 3, ()), DeltaWord(2, 3, ()))

    def test_injection_matrix_rank(self, symbols11):
        M = injection_matrix(symbols11, word_pairs(1, 3, 2))
        assert M.shape == (2, 21)
        assert 1 <= M.rank() <= 2


class TestCollisionSearch:
    def test_no_collision_at_admissible_prime(self):
        assert collision_search(1, 3, 11) is None
        assert collision_search(1, 7, 11) is None

    def test_elliptic_point_collides_at_level_one(self):
        # i 是 SL2(Z) 的椭圆点，S 固定 i 而把 i∞ 送到 0
        w = collision_search(1, 3, 1)
        assert w is not None
        assert w.matrix == S_MATRIX
        assert w.determinant == 1 and w.exponent == 0
        assert w.first.point() == w.second.point()
        assert w.first.cusp() != w.second.cusp()

    def test_collision_at_split_prime(self):
        w = collision_search(2, 3, 1, n_max=1)
        assert w is not None
        assert w.exponent >= 1 and w.determinant == 3 ** w.exponent
        assert w.fixed_point == tau_point(2)
        assert mobius_apply(w.matrix, tau_point(2)) == tau_point(2)
        assert w.first.point() == w.second.point()
        assert w.first.cusp() != w.second.cusp()
        assert tuple(c.value for c in (w.first.cusp(), w.second.cusp())) == w.cusp_images

    def test_trivial_equality_not_reported(self):
        # ±γ 给出同一点同一尖点
        assert collision_search(2, 3, 11, n_max=0) is None

    def test_fixed_point_matrices(self):
        etas = fixed_point_matrices(1, 5)
        assert etas[0] == GroupElement(2, -1, 1, 2)
        assert mobius_apply(etas[0], tau_point(1)) == tau_point(1)
        assert mobius_apply(etas[0], INF) == UpperHalfPoint.cusp(2)
        assert fixed_point_matrices(1, 3) == []

    def test_level_changes_result(self):
        assert collision_search(1, 3, 11) is None
        assert collision_search(1, 3, 1) is not None

    def test_rejects_bad_arguments(self):
        with pytest.raises(InvalidArgumentError):
            collision_search(1, 4, 11)
        with pytest.raises(InvalidArgumentError):
            collision_search(1, 3, 0)
        with pytest.raises(InvalidArgumentError):
            collision_search(1, 3, 11, n_max=-1)
        with pytest.raises(InvalidArgumentError):
            gamma0_elements(11, 0)
