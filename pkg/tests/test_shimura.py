import pytest
from hypothesis import given, settings, strategies as st
from sympy.combinatorics import Permutation

from quadsym.arith import GroupElement
from quadsym.errors import InvalidArgumentError, NotApplicableError
from quadsym.fuchsian import classify_element, is_in_group
from quadsym.shimura import (A_P, K_CONST, SymbolicPeriodModule, cosets_inequivalent, delta_words, hecke_index,
                             shimura_curve_invariants, split_coset_representatives, symbolic_mu,
                             symbolic_quadratic_distribution, verify_shimura_group_data, x15_generators)


@pytest.mark.parametrize('D, N, p, index', [(6, 1, 5, 6), (6, 5, 5, 5), (6, 1, 2, 1), (6, 1, 3, 1),
                                            (15, 1, 7, 8), (1, 11, 11, 11), (1, 1, 2, 3)])
def test_hecke_index(D, N, p, index):
    assert hecke_index(D, N, p) == index


def test_hecke_index_rejects():
    with pytest.raises(InvalidArgumentError):
        hecke_index(6, 2, 2)
    with pytest.raises(InvalidArgumentError):
        hecke_index(30, 1, 7)
    with pytest.raises(InvalidArgumentError):
        hecke_index(6, 1, 4)


@pytest.mark.parametrize('p', [2, 3, 5, 7])
@pytest.mark.parametrize('case, extra', [('unramified', 1), ('level', 0)])
def test_split_coset_representatives(p, case, extra):
    reps = split_coset_representatives(p, case)
    assert len(reps) == p + extra
    assert all(g.det == p for g in reps)
    assert cosets_inequivalent(reps, p, case)


def test_split_cosets_ramified_case():
    with pytest.raises(NotApplicableError):
        split_coset_representatives(3, 'ramified')
    with pytest.raises(InvalidArgumentError):
        split_coset_representatives(3, 'other')


def test_duplicate_cosets_detected():
    reps = split_coset_representatives(3) + [GroupElement(1, 3, 0, 3)]
    assert not cosets_inequivalent(reps, 3)


@pytest.mark.parametrize('D, expected', [(6, (0, 2, 2)), (10, (0, 0, 4)), (15, (1, 0, 2)), (14, (1, 2, 0)),
                                         (21, (1, 4, 0))])
def test_shimura_curve_invariants(D, expected):
    inv = shimura_curve_invariants(D)
    assert (inv.genus, inv.e2, inv.e3) == expected


def test_shimura_curve_invariants_rejects():
    with pytest.raises(InvalidArgumentError):
        shimura_curve_invariants(1)
    with pytest.raises(InvalidArgumentError):
        shimura_curve_invariants(30)


def test_x15_generators():
    gens = x15_generators()
    alpha, h, beta = gens['alpha'], gens['h'], gens['beta']
    assert all(g.det == 1 for g in gens.values())
    assert all(is_in_group(g, 15, 1) for g in gens.values())
    assert classify_element(alpha).kind == 'hyperbolic'
    assert classify_element(h).kind == 'hyperbolic'
    assert beta.trace == 1
    assert classify_element(beta) == ('elliptic', 3)
    assert classify_element(beta, contains_minus_id=False) == ('elliptic', 6)
    assert (beta ** 3).is_pm_identity() and not (beta ** 3).is_identity()


@pytest.mark.parametrize('D', [6, 10, 15])
def test_verify_shimura_group_data(D):
    report = verify_shimura_group_data(D)
    assert report.ok
    assert report.invariants.genus == report.printed['genus']


def test_verify_unknown_discriminant():
    with pytest.raises(InvalidArgumentError):
        verify_shimura_group_data(22)


class TestSymbolicPeriodModule:
    def test_full_group_reduces(self):
        m = SymbolicPeriodModule(3)
        for k in range(3):
            m = m.add_word((k, 1), 2)
        out = m.rewrite()
        assert out.terms == {(1,): 2 * A_P}
        assert out.k_coefficient == -2

    def test_partial_group_stays(self):
        m = SymbolicPeriodModule(3).add_word((0, 1), 1).add_word((1, 1), 1)
        assert m.rewrite().terms == m.terms

    def test_unequal_coefficients_stay(self):
        m = SymbolicPeriodModule(2).add_word((0, 1), 1).add_word((1, 1), 2)
        assert m.rewrite().terms == m.terms

    def test_arithmetic(self):
        m = SymbolicPeriodModule(3, {(1,): 1}, K_CONST)
        assert (m - m).is_zero()
        assert (m + m).terms == m.scale(2).terms
        assert (-m).constant == -K_CONST


def test_delta_words():
    sigma = Permutation([0, 2, 1])
    assert delta_words(5, 3, 2, sigma) == ((2, 1), (1, 2))
    plus, minus = delta_words(1, 3, 1, Permutation([0, 1, 2]))
    assert plus == (1,) and minus == (2,)


def test_symbolic_mu():
    m = symbolic_mu(1, 3, 1, Permutation([0, 1, 2]))
    assert m.terms == {(1,): A_P ** -1, (2,): -A_P ** -1}


@pytest.mark.parametrize('p', [3, 5])
@pytest.mark.parametrize('n', [1, 2])
def test_distribution_identity_identity_sigma(p, n):
    check = symbolic_quadratic_distribution(p, n=n)
    assert check.ok
    assert len(check.residues) == p ** n
    assert all(r['k_coefficient'] == '0' for r in check.residues)


def _sigmas(p):
    return st.permutations(list(range(1, p))).map(lambda rest: Permutation([0] + list(rest)))


@settings(derandomize=True, max_examples=10, deadline=None)
@given(_sigmas(5))
def test_distribution_identity_random_sigma(sigma):
    assert symbolic_quadratic_distribution(5, sigma, 1).ok


def test_distribution_rejects():
    with pytest.raises(InvalidArgumentError):
        symbolic_quadratic_distribution(4)
    with pytest.raises(InvalidArgumentError):
        symbolic_quadratic_distribution(3, n=0)
    with pytest.raises(InvalidArgumentError):
        symbolic_quadratic_distribution(3, [1, 0, 2])


def test_ordinary_flag_is_echoed():
    assert symbolic_quadratic_distribution(3, ordinary=True).ordinary is True
