"""上半平面上的Möbius作用、元素分类、Γ₀(p)生成元表"""
from fractions import Fraction
from functools import lru_cache
from typing import Dict, List, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np
import polars as pl
from loguru import logger
from sympy import isprime, factorint, divisors, totient
from sympy import mod_inverse as _sympy_mod_inverse
from sympy import gcd as _gcd

from quadsym import _INF_
from quadsym.arith import QuadExtElem, GroupElement, legendre_symbol, squarefree_decomposition, Number
from quadsym.errors import InvalidArgumentError, NotAvailableError, DomainError
from quadsym.quaternion import eichler_order
from quadsym.utils import as_fraction, rows_to_frame

__all__ = ['GroupElement', 'UpperHalfPoint', 'mobius_apply', 'hyperbolic_distance', 'ElementClass',
           'classify_element', 'vk_matrix', 'fixed_point', 'GeneratorSet', 'RowReport', 'TABLE1',
           'gamma0_generator_table', 'genus_and_elliptic_counts', 'gamma0_invariants', 'is_in_group',
           'table1_frame', 'T_MATRIX', 'S_MATRIX']

T_MATRIX = GroupElement(1, 1, 0, 1)
S_MATRIX = GroupElement(0, -1, 1, 0)


class UpperHalfPoint:
    """ℋ中的点或尖点

    kind: 'exact' 值为QuadExtElem(d<0，虚部>0)
          'cusp'  值为Fraction或'inf'
          'numeric' 值为complex
    """
    __slots__ = ('kind', 'value')

    def __init__(self, kind: str, value):
        self.kind = kind
        self.value = value

    @classmethod
    def exact(cls, r: Number, s: Number, d: int) -> 'UpperHalfPoint':
        return cls.from_quad(QuadExtElem(r, s, d))

    @classmethod
    def from_quad(cls, q: QuadExtElem) -> 'UpperHalfPoint':
        if q.d >= 0 or q.v <= 0:
            raise InvalidArgumentError(f'{q} is not in the upper half-plane')
        return cls('exact', q)

    @classmethod
    def cusp(cls, x) -> 'UpperHalfPoint':
        if x == _INF_:
            return cls('cusp', _INF_)
        return cls('cusp', as_fraction(x))

    @classmethod
    def numeric(cls, z: complex) -> 'UpperHalfPoint':
        z = complex(z)
        if z.imag <= 0:
            raise InvalidArgumentError(f'{z} is not in the upper half-plane')
        return cls('numeric', z)

    @property
    def is_infinity(self) -> bool:
        return self.kind == 'cusp' and self.value == _INF_

    def to_complex(self) -> complex:
        if self.kind == 'cusp':
            raise DomainError(f'cusp {self.value} has no complex value')
        if self.kind == 'exact':
            return self.value.to_complex()
        return self.value

    def __eq__(self, other):
        if not isinstance(other, UpperHalfPoint):
            return NotImplemented
        return self.kind == other.kind and self.value == other.value

    def __hash__(self):
        return hash((self.kind, self.value))

    def __repr__(self):
        return f'UpperHalfPoint({self.kind}, {self.value!r})'

    def to_dict(self):
        if self.kind == 'exact':
            return {'kind': 'exact', 're': str(self.value.u), 'sqrt_coeff': str(self.value.v), 'd': self.value.d}
        return {'kind': self.kind, 'value': self.value}


def mobius_apply(g: GroupElement, z: Union[UpperHalfPoint, complex]):
    """(az+b)/(cz+d)。复数输入返回复数"""
    if not isinstance(z, UpperHalfPoint):
        return g.act(complex(z))
    if g.field < 0:
        raise InvalidArgumentError(f'{g} is not a real matrix')
    if g.det.sign() <= 0:
        raise InvalidArgumentError(f'det({g}) must be positive')
    if z.kind == 'cusp':
        if not g.is_rational:
            raise DomainError('cusps only move under rational matrices')
        a, b, c, d = g.rational_entries()
        if z.is_infinity:
            return UpperHalfPoint.cusp(_INF_ if c == 0 else a / c)
        den = c * z.value + d
        return UpperHalfPoint.cusp(_INF_ if den == 0 else (a * z.value + b) / den)
    if z.kind == 'exact' and g.is_rational:
        a, b, c, d = g.entries
        return UpperHalfPoint.from_quad((a * z.value + b) / (c * z.value + d))
    return UpperHalfPoint.numeric(g.act(z.to_complex()))


def hyperbolic_distance(z1, z2) -> float:
    """|arccosh(1 + |z1-z2|^2/(2 Im z1 Im z2))|"""
    z1 = z1.to_complex() if isinstance(z1, UpperHalfPoint) else complex(z1)
    z2 = z2.to_complex() if isinstance(z2, UpperHalfPoint) else complex(z2)
    if z1.imag <= 0 or z2.imag <= 0:
        raise InvalidArgumentError(f'points {z1}, {z2} must have positive imaginary part')
    x = 1.0 + abs(z1 - z2) ** 2 / (2.0 * z1.imag * z2.imag)
    return float(abs(np.arccosh(max(x, 1.0))))


class ElementClass(NamedTuple):
    kind: str
    order: Optional[int] = None

    def to_dict(self):
        return self._asdict()


def classify_element(g: GroupElement, contains_minus_id: bool = True) -> ElementClass:
    """按迹分类

    contains_minus_id=True 时-I作用平凡，阶数取射影群中的阶（g^m=±I）；
    否则取矩阵阶（g^m=I）
    """
    if g.det != 1:
        raise InvalidArgumentError(f'det({g}) = {g.det}, expected 1')
    if g.is_identity():
        return ElementClass('identity', 1)
    if (-g).is_identity():
        return ElementClass('minus-identity', 1 if contains_minus_id else 2)
    t = g.trace
    lo, hi = (t + 2).sign(), (t - 2).sign()
    if lo > 0 and hi < 0:
        power = g
        for m in range(1, 13):
            if power.is_identity() or (contains_minus_id and (-power).is_identity()):
                return ElementClass('elliptic', m)
            power = power * g
        raise DomainError(f'elliptic {g} has no finite order up to 12')
    if lo == 0 or hi == 0:
        return ElementClass('parabolic')
    return ElementClass('hyperbolic')


def vk_matrix(k: int, p: int) -> GroupElement:
    """V_k = [[k', 1], [-(k'k+1), -k]]，kk' ≡ -1 mod p"""
    if not isprime(p):
        raise InvalidArgumentError(f'p={p} is not prime')
    if not 1 <= k <= p - 1:
        raise InvalidArgumentError(f'k={k} outside [1, {p - 1}]')
    kp = (-int(_sympy_mod_inverse(k, p))) % p
    return GroupElement(kp, 1, -(kp * k + 1), -k)


def fixed_point(g: GroupElement) -> UpperHalfPoint:
    """有理椭圆矩阵在ℋ中的不动点，精确值"""
    if not g.is_rational:
        raise DomainError(f'{g} is not rational')
    a, b, c, d = g.rational_entries()
    disc = (a + d) ** 2 - 4 * (a * d - b * c)
    if disc >= 0 or c == 0:
        raise DomainError(f'{g} is not elliptic')
    # disc = s^2 d0，分子分母分别分解
    s_num, d_num = squarefree_decomposition(disc.numerator * disc.denominator)
    s = Fraction(s_num, disc.denominator)
    v = s / (2 * c)
    return UpperHalfPoint.exact((a - d) / (2 * c), abs(v), d_num)


# p: (V_k下标, [(k, 阶)], 表中亏格)
TABLE1: Dict[int, Tuple[List[int], List[Tuple[int, int]], int]] = {
    2: ([1], [(1, 2)], 0),
    3: ([2], [(2, 3)], 0),
    5: ([2, 3], [(2, 2), (3, 3)], 0),
    7: ([3, 5], [(3, 3), (5, 3)], 0),
    11: ([4, 6], [], 1),
    13: ([4, 5, 8, 10], [(5, 2), (8, 2), (4, 3), (10, 3)], 0),
    17: ([4, 7, 9, 13], [(4, 2), (13, 2)], 1),
    19: ([5, 8, 12, 13], [(8, 2), (12, 2)], 1),
    23: ([8, 10, 12, 14], [], 2),
    29: ([6, 12, 13, 15, 17, 22], [(12, 2), (17, 2)], 2),
    31: ([6, 9, 13, 17, 21, 26], [(6, 3), (26, 3)], 2),
    37: ([6, 8, 11, 16, 20, 27, 28, 31], [(11, 3), (27, 3)], 3),
    41: ([7, 9, 16, 19, 21, 24, 32, 33], [(9, 2), (32, 2)], 3),
    43: ([7, 13, 15, 18, 24, 27, 29, 37], [(7, 3), (37, 3)], 3),
    47: ([13, 16, 19, 22, 24, 27, 30, 33], [], 4),
    53: ([12, 14, 20, 23, 25, 27, 30, 32, 38, 40], [(23, 2), (30, 2)], 4),
    59: ([12, 15, 20, 26, 28, 30, 32, 38, 43, 46], [], 5),
    61: ([9, 11, 14, 18, 25, 28, 32, 35, 42, 48, 50, 51], [(11, 2), (50, 2), (14, 3), (48, 3)], 4),
    67: ([10, 18, 21, 24, 30, 31, 35, 38, 42, 45, 48, 56], [(30, 3), (28, 3)], 5),
    71: ([9, 13, 24, 26, 28, 34, 36, 42, 44, 46, 57, 61], [], 6),
    73: ([9, 11, 17, 22, 25, 27, 33, 39, 46, 47, 50, 55, 61, 65], [(27, 2), (46, 2), (9, 3), (65, 3)], 5),
    79: ([12, 20, 24, 25, 30, 34, 36, 42, 44, 48, 53, 56, 58, 66], [(24, 3), (56, 3)], 6),
    83: ([14, 22, 28, 30, 32, 37, 40, 42, 45, 50, 52, 54, 60, 68], [], 7),
    89: ([10, 18, 21, 31, 34, 36, 39, 43, 45, 49, 52, 55, 57, 67, 70, 78], [(34, 2), (55, 2)], 7),
    97: ([11, 15, 22, 23, 28, 30, 36, 40, 46, 50, 56, 62, 66, 68, 73, 75, 81, 85],
         [(22, 2), (75, 2), (36, 3), (62, 3)], 7),
    101: ([10, 19, 23, 27, 30, 35, 40, 43, 49, 51, 57, 60, 65, 70, 73, 77, 81, 91], [(10, 2), (91, 2)], 8),
}


def genus_and_elliptic_counts(p: int) -> Tuple[int, int, int]:
    """X₀(p)的亏格与椭圆点个数 (g, ν₂, ν₃)"""
    if not isprime(p):
        raise InvalidArgumentError(f'p={p} is not prime')
    nu2 = 1 if p == 2 else 1 + legendre_symbol(-1, p)
    if p == 2:
        nu3 = 0
    elif p == 3:
        nu3 = 1
    else:
        nu3 = 1 + legendre_symbol(-3, p)
    g = Fraction(p + 1, 12) - Fraction(nu2, 4) - Fraction(nu3, 3)
    return int(g), nu2, nu3


class Gamma0Invariants(NamedTuple):
    index: int
    nu2: int
    nu3: int
    cusps: int
    genus: int

    def to_dict(self):
        return self._asdict()


def _kronecker_local(D: int, p: int) -> int:
    """(D/p)，D ∈ {-4, -3}"""
    if p == 2:
        return 0 if D == -4 else -1
    if p == 3 and D == -3:
        return 0
    return legendre_symbol(-1 if D == -4 else -3, p)


def gamma0_invariants(N: int) -> Gamma0Invariants:
    """任意水平N的 [SL2(ℤ):Γ₀(N)]、ν₂、ν₃、尖点数、亏格"""
    if N < 1:
        raise InvalidArgumentError(f'N={N} must be positive')
    primes = list(factorint(N))
    index = N
    for p in primes:
        index = index * (p + 1) // p
    nu2 = 0 if N % 4 == 0 else int(np.prod([1 + _kronecker_local(-4, p) for p in primes]))
    nu3 = 0 if N % 9 == 0 else int(np.prod([1 + _kronecker_local(-3, p) for p in primes]))
    cusps = sum(int(totient(_gcd(d, N // d))) for d in divisors(N))
    g = 1 + Fraction(index, 12) - Fraction(nu2, 4) - Fraction(nu3, 3) - Fraction(cusps, 2)
    return Gamma0Invariants(index, nu2, nu3, cusps, int(g))


def is_in_group(g: GroupElement, D: int, N: int) -> bool:
    """g ∈ Γ(D,N) = φ(𝒪(D,N)中范数1的元素)"""
    try:
        order = eichler_order(D, N)
    except InvalidArgumentError as e:
        raise NotAvailableError(f'no Eichler order for (D={D}, N={N}): {e}') from e
    if g.det != 1:
        return False
    q = order.algebra.phi_inverse(g)
    if q is None:
        return False
    return q.norm() == 1 and order.contains(q)


class RowReport(NamedTuple):
    p: int
    generators: List[str]
    printed_genus: int
    computed_genus: int
    nu2: int
    nu3: int
    membership_ok: bool
    relations: List[dict]
    count: int
    expected_count: int
    discrepancies: List[str]

    @property
    def verified(self) -> bool:
        return not self.discrepancies

    def to_dict(self):
        d = self._asdict()
        d['verified'] = self.verified
        return d


class GeneratorSet:
    """Γ₀(p)的生成元集合 {T, V_k...}"""

    def __init__(self, p: int, indices: Sequence[int], relations: Sequence[Tuple[int, int]], genus: int):
        self.level = p
        self.indices = list(indices)
        self.relations = list(relations)
        self.genus = genus
        self.generators = [T_MATRIX] + [vk_matrix(k, p) for k in self.indices]

    @property
    def labels(self) -> List[str]:
        return ['T'] + [f'V{k}' for k in self.indices]

    def verify(self) -> RowReport:
        p = self.level
        g, nu2, nu3 = genus_and_elliptic_counts(p)
        problems = []
        membership = all(is_in_group(V, 1, p) for V in self.generators)
        if not membership:
            problems.append('a generator is not in Gamma0(p)')
        rels = []
        for k, m in self.relations:
            V = vk_matrix(k, p)
            holds = (V ** m).is_pm_identity()
            actual = classify_element(V).order
            listed = k in self.indices
            rels.append({'generator': f'V{k}', 'order': m, 'holds': holds, 'listed': listed,
                         'trace': str(V.trace), 'actual_order': actual})
            if not listed:
                problems.append(f'V{k} is not among the generators')
            if not holds:
                problems.append(f'V{k}^{m} != +-Id (trace {V.trace}, order {actual})')
        if g != self.genus:
            problems.append(f'printed genus {self.genus} != computed genus {g}')
        expected = 2 * g + nu2 + nu3 + 1
        if len(self.generators) != expected:
            problems.append(f'{len(self.generators)} generators, expected 2g+nu2+nu3+1 = {expected}')
        for msg in problems:
            logger.warning('Table row p={}: {}', p, msg)
        return RowReport(p, self.labels, self.genus, g, nu2, nu3, membership, rels,
                         len(self.generators), expected, problems)

    def to_dict(self):
        return {'p': self.level, 'generators': self.labels,
                'relations': [{'generator': f'V{k}', 'order': m} for k, m in self.relations],
                'genus': self.genus}


@lru_cache(maxsize=None)
def gamma0_generator_table(p: int) -> GeneratorSet:
    if p not in TABLE1:
        raise NotAvailableError(f'p={p} is not in the generator table')
    indices, relations, genus = TABLE1[p]
    return GeneratorSet(p, indices, relations, genus)


def table1_frame(primes: Sequence[int] = None) -> pl.DataFrame:
    """全部行的校验结果"""
    primes = sorted(TABLE1) if primes is None else primes
    rows = []
    for p in primes:
        r = gamma0_generator_table(p).verify()
        rows.append({'p': r.p, 'generators': r.generators,
                     'relations': [f"{x['generator']}^{x['order']}" for x in r.relations],
                     'printed_genus': r.printed_genus, 'computed_genus': r.computed_genus,
                     'nu2': r.nu2, 'nu3': r.nu3, 'count': r.count, 'expected_count': r.expected_count,
                     'verified': r.verified, 'discrepancies': '; '.join(r.discrepancies)})
    return rows_to_frame(rows)
