from fractions import Fraction

import pytest
from sympy.combinatorics import Permutation

from quadsym.arith import GroupElement, PAdicNum, QuadExtElem
from quadsym.errors import DomainError, InvalidArgumentError, NotApplicableError, NotAvailableError
from quadsym.fuchsian import UpperHalfPoint, mobius_apply
from quadsym.padicl import (HeckeRootChoice, LevelFunction, PAdicCharacter, all_finite_characters, chi_s_eval,
                            chi_s_series, chi_sigma, cyclotomic_measure, gamma_a_pn, lp_at_s, mellin_mazur,
                            orbit_min_height, quadratic_measure, sigma_digits, sigma_twist, signed_digits)
from quadsym.periods import QExpansion

PRECISION = 12


def almost_zero(x: PAdicNum, k: int = PRECISION - 2) -> bool:
    return x.is_zero() or x.valuation >= k


@pytest.fixture(scope='module')
def root3(system11):
    return HeckeRootChoice.from_eigenvalue(system11.a_p(3), 3, 11, PRECISION)


@pytest.fixture(scope='module')
def mu3(system11, root3):
    return cyclotomic_measure(system11, 3, root3, 3)


def test_signed_digits():
    assert signed_digits(5, 3, 2) == [2, 1]
    assert signed_digits(-7, 3, 2) == [-1, -2]


@pytest.mark.parametrize('a, p, n', [(1, 3, 1), (2, 3, 1), (5, 3, 2), (-7, 3, 2), (11, 5, 2), (-1, 5, 3)])
def test_gamma_a_pn(a, p, n):
    g = gamma_a_pn(a, p, n)
    assert g.is_integral()
    assert g.det == p ** (n - 1)
    assert mobius_apply(g, UpperHalfPoint.cusp('inf')) == UpperHalfPoint.cusp(Fraction(a, p ** n))


def test_gamma_a_pn_level_zero():
    g = gamma_a_pn(2, 3, 0)
    assert g == GroupElement(3, 0, 0, 1) * gamma_a_pn(2, 3, 1)
    assert g.det == 3
    assert g.rational_entries()[2] == 3


def test_gamma_a_pn_rejects():
    with pytest.raises(InvalidArgumentError):
        gamma_a_pn(3, 3, 2)
    with pytest.raises(InvalidArgumentError):
        gamma_a_pn(10, 3, 2)
    with pytest.raises(InvalidArgumentError):
        gamma_a_pn(1, 4, 1)


def test_orbit_min_height():
    h = orbit_min_height(3, 2)
    assert 0 < h < 1
    assert orbit_min_height(3, 3) <= h


class TestHeckeRootChoice:
    def test_ordinary_root(self, root3):
        assert root3.ordinary
        assert root3.alpha == QuadExtElem(Fraction(-1, 2), Fraction(1, 2), -11)
        x = root3.alpha_padic
        assert x.valuation == 0
        assert almost_zero(x * x - x * root3.a_p + 3)

    def test_level_prime(self, system11):
        root = HeckeRootChoice.from_eigenvalue(system11.a_p(11), 11, 11)
        assert root.alpha == 1
        assert root.ordinary

    def test_supersingular(self):
        root = HeckeRootChoice.from_eigenvalue(-2, 2, 11)
        assert not root.ordinary
        with pytest.raises(NotAvailableError):
            root.alpha_padic

    def test_square_level_rejected(self):
        with pytest.raises(NotApplicableError):
            HeckeRootChoice.from_eigenvalue(0, 3, 9)


class TestCyclotomicMeasure:
    def test_compatible(self, mu3):
        assert mu3.levels == [1, 2, 3]
        assert mu3.is_compatible()
        assert all(ok for _, ok in mu3.compatibility(1))

    @pytest.mark.parametrize('p', [5, 7, 11])
    def test_compatible_other_primes(self, system11, p):
        root = HeckeRootChoice.from_eigenvalue(system11.a_p(p), p, 11, PRECISION)
        assert cyclotomic_measure(system11, p, root, 2).is_compatible()

    def test_values(self, mu3):
        assert mu3.value(3, 1) == mu3.value_on_pZp()
        assert mu3.value(4, 1) == mu3.value(1, 1)
        assert mu3.valuation_floor(3) is not None
        assert mu3.to_frame(2).height == 6

    def test_level_must_be_positive(self, system11, root3):
        with pytest.raises(InvalidArgumentError):
            cyclotomic_measure(system11, 3, root3, 0)


class TestSigmaTwist:
    def test_sigma_digits(self):
        sigma = Permutation([0, 2, 1])
        assert sigma_digits(sigma, 5, 3, 2) == 7
        assert sigma_digits(Permutation([0, 1, 2]), 5, 3, 2) == 5

    def test_identity_twist(self, mu3):
        twisted = sigma_twist(mu3, [0, 1, 2])
        assert all(twisted.tables[lv] == mu3.tables[lv] for lv in mu3.levels)

    def test_twist_preserves_total(self, mu3):
        twisted = sigma_twist(mu3, [0, 2, 1])
        for lv in mu3.levels:
            assert twisted.total(lv) == mu3.total(lv)

    def test_twist_needs_fixed_zero(self, mu3):
        with pytest.raises(InvalidArgumentError):
            sigma_twist(mu3, [1, 0, 2])

    @pytest.mark.parametrize('n', [1, 2])
    def test_mellin_transform_of_twist(self, mu3, n):
        sigma = Permutation([0, 2, 1])
        twisted = sigma_twist(mu3, sigma)
        for chi in all_finite_characters(3, PRECISION):
            lhs = mellin_mazur(twisted, chi, n)
            rhs = mellin_mazur(mu3, chi * chi_sigma(chi, sigma, n), n)
            assert lhs == rhs

    def test_chi_sigma_of_identity_is_trivial(self):
        chi = all_finite_characters(5)[1]
        trivial = chi_sigma(chi, Permutation(list(range(5))), 2)
        assert all(trivial(a) == 1 for a in range(1, 25) if a % 5)


class TestCharacters:
    @pytest.mark.parametrize('p', [3, 5, 7])
    def test_finite_characters_multiplicative(self, p):
        chars = all_finite_characters(p, 8)
        assert len(chars) == p - 1
        assert all(chi.is_multiplicative() for chi in chars)

    def test_mellin_needs_locally_constant(self, mu3):
        chi = PAdicCharacter(3, 0, PAdicNum.from_rational(3, 3, PRECISION))
        with pytest.raises(InvalidArgumentError):
            mellin_mazur(mu3, chi, 2)
        assert mellin_mazur(mu3, chi, 2, riemann=True) is not None

    def test_constant_function_gives_total(self, mu3):
        assert mellin_mazur(mu3, LevelFunction.constant(3), 2) == mu3.total(2)

    @pytest.mark.parametrize('x, p', [(2, 3), (7, 3), (2, 5), (13, 5)])
    @pytest.mark.parametrize('k', [1, -2, 4])
    def test_chi_s_series_matches_direct(self, x, p, k):
        s = PAdicNum.from_rational(p * k, p, PRECISION)
        series, terms = chi_s_series(x, s, PRECISION)
        assert almost_zero(series - chi_s_eval(x, s, PRECISION))
        assert all(t['valuation'] is None or t['valuation'] >= t['bound'] for t in terms)

    def test_chi_s_domain(self):
        assert chi_s_eval(2, PAdicNum.zero(5, PRECISION)) == 1
        with pytest.raises(DomainError):
            chi_s_eval(2, PAdicNum.from_rational(1, 5, PRECISION))


class TestLValues:
    @pytest.mark.parametrize('s', [0, 3])
    def test_cyclotomic_agreement(self, mu3, s):
        report = lp_at_s(mu3, s, PRECISION)
        assert report.agree
        assert report.level == 3
        assert all(t['holds'] for t in report.terms)

    def test_s_outside_disc(self, mu3):
        with pytest.raises(DomainError):
            lp_at_s(mu3, 1, PRECISION)

    def test_supersingular_not_available(self, system11):
        root = HeckeRootChoice.from_eigenvalue(-2, 2, 11)
        mu = cyclotomic_measure(system11, 2, root, 2)
        with pytest.raises(NotAvailableError):
            lp_at_s(mu, 0)


class TestQuadraticMeasure:
    @pytest.fixture(scope='class')
    def qmu(self, qexp11, root3):
        return quadratic_measure(qexp11, 3, root3, 2, 1j)

    def test_compatible(self, qmu):
        assert qmu.kind == 'complex'
        assert qmu.is_compatible()
        assert qmu.value_on_pZp() == 0

    def test_lvalue_only_at_zero(self, qmu):
        report = lp_at_s(qmu, 0)
        assert report.agree
        assert report.direct == qmu.total(1)
        with pytest.raises(NotApplicableError):
            lp_at_s(qmu, 3)

    def test_square_level_rejected(self, root3):
        f = QExpansion(9, [1])
        with pytest.raises(NotApplicableError):
            quadratic_measure(f, 3, root3, 1)
