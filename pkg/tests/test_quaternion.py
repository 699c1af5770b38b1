from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from quadsym.arith import GroupElement
from quadsym.errors import InvalidArgumentError
from quadsym.quaternion import (QuaternionAlgebra, admissible_levels, classify, eichler_order, invariants, is_order,
                                phi_embed, prime_pair_cases, ramified_places, structure_case)

coord = st.integers(-5, 5)
quat = st.tuples(coord, coord, coord, coord)


def test_multiplication_table():
    H = QuaternionAlgebra(3, 5)
    assert H.I * H.I == 3
    assert H.J * H.J == 5
    assert H.I * H.J == H.K
    assert H.J * H.I == -H.K
    assert H.K * H.K == -15


def test_zero_entries_rejected():
    with pytest.raises(InvalidArgumentError):
        QuaternionAlgebra(0, 5)


@settings(derandomize=True, max_examples=80)
@given(quat, quat)
def test_norm_multiplicative(c1, c2):
    H = QuaternionAlgebra(3, 5)
    q1, q2 = H(*c1), H(*c2)
    assert (q1 * q2).norm() == q1.norm() * q2.norm()
    assert q1 * q1.conjugate() == q1.norm()


@settings(derandomize=True, max_examples=60)
@given(quat, quat, st.sampled_from([(3, 5), (1, -1), (2, 5), (-1, 3)]))
def test_phi_is_an_algebra_map(c1, c2, ab):
    H = QuaternionAlgebra(*ab)
    q1, q2 = H(*c1), H(*c2)
    assert phi_embed(q1 * q2) == phi_embed(q1) * phi_embed(q2)
    assert phi_embed(q1).det == q1.norm()
    assert phi_embed(q1).trace == q1.trace()
    assert H.phi_inverse(phi_embed(q1)) == q1


@pytest.mark.parametrize('a, b, D, kind', [
    (1, -1, 1, 'non-ramified'),
    (-1, -1, 2, 'definite'),
    (3, 5, 15, 'indefinite-division'),
    (2, 5, 10, 'indefinite-division'),
    (5, 13, 65, 'indefinite-division'),
    (3, 13, 1, 'non-ramified'),
    (3, -1, 6, 'indefinite-division'),
])
def test_classify(a, b, D, kind):
    c = classify(QuaternionAlgebra(a, b))
    assert c.discriminant == D
    assert c.kind == kind
    assert len(c.places) % 2 == 0


def test_small_ramified():
    assert classify(QuaternionAlgebra(3, 5)).small_ramified
    assert not classify(QuaternionAlgebra(1, -1)).small_ramified


@pytest.mark.parametrize('D, case', [(1, '1'), (6, '2p'), (22, '2p'), (10, 'pq'), (15, 'pq'), (26, 'pq'),
                                     (21, None), (30, None)])
def test_structure_case(D, case):
    assert structure_case(D) == case


def test_prime_pair_discriminants():
    for p, q, D, _ in prime_pair_cases(30):
        if p != q and p > 2 and q > 2 and q % 4 == 1:
            expected = p * q if pow(p, (q - 1) // 2, q) == q - 1 else 1
            assert D == expected, (p, q)


@pytest.mark.parametrize('D, levels', [
    (1, [1, 2, 3, 4, 5, 6]), (6, [1]), (10, [1]), (15, [1]), (22, [1, 5]), (26, [1, 3]), (39, [1]),
])
def test_admissible_levels(D, levels):
    assert admissible_levels(D) == levels


@pytest.mark.parametrize('D', [1, 6, 10, 15, 22, 26, 39])
def test_eichler_orders_are_orders(D):
    for N in admissible_levels(D):
        order = eichler_order(D, N)
        cert = is_order(order.basis)
        assert cert.ok, cert.failures


def test_eichler_order_discriminant_matches():
    for D in (6, 10, 15, 22, 26):
        assert eichler_order(D, 1).algebra.discriminant == D


def test_level_one_maps_onto_gamma0_matrices():
    order = eichler_order(1, 7)
    images = [phi_embed(q) for q in order.basis]
    assert images == [GroupElement(1, 0, 0, 1), GroupElement(0, 1, 0, 0), GroupElement(0, 0, 7, 0),
                      GroupElement(0, 0, 0, 1)]


def test_eichler_order_warns_on_split_algebra(log_messages):
    eichler_order.cache_clear()
    order = eichler_order(39, 1)
    assert order.algebra.discriminant == 1
    assert any(m['level'].name == 'WARNING' and 'discriminant is 1' in m['message'] for m in log_messages)


def test_eichler_order_rejects_bad_levels():
    with pytest.raises(InvalidArgumentError):
        eichler_order(6, 2)
    with pytest.raises(InvalidArgumentError):
        eichler_order(21, 1)
    with pytest.raises(InvalidArgumentError):
        eichler_order(1, 0)


def test_is_order_failures():
    H = QuaternionAlgebra(3, 5)
    cert = is_order([H.one, H.I * Fraction(1, 2), H.J, H.K])
    assert not cert.ok
    assert cert.failures
    assert not is_order([H.one, H.I, H.J])
    assert not is_order([H.one, H.I, H.I * 2, H.K])


def test_invariants():
    H = QuaternionAlgebra(3, 5)
    tr, nrd, conj = invariants(H(1, 2, 3, 4))
    assert tr == 2
    assert nrd == 1 - 3 * 4 - 5 * 9 + 15 * 16
    assert conj == H(1, -2, -3, -4)


@pytest.mark.parametrize('a, b, places', [(1, -1, []), (-1, -1, [2, 'inf']), (3, -1, [2, 3]), (3, 5, [3, 5])])
def test_ramified_places(a, b, places):
    assert ramified_places(QuaternionAlgebra(a, b)) == places


def test_order_lattice_comparison():
    O1, O2 = eichler_order(1, 1), eichler_order(1, 2)
    assert O1.same_lattice(O1)
    assert all(O1.contains(q) for q in O2.basis)
    assert not O1.same_lattice(O2)
    assert O1.coordinates(O1.basis[2]) == (0, 0, 1, 0)
