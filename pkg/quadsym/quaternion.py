"""四元数代数 (a,b/ℚ)、判别式与Eichler序"""
import math
from fractions import Fraction
from functools import cached_property, lru_cache
from typing import List, NamedTuple, Optional, Sequence, Tuple

from loguru import logger
from sympy import Matrix, Rational as SymRational, factorint, isprime

from quadsym import _INF_
from quadsym.arith import (QuadExtElem, GroupElement, hilbert_symbol, squarefree_decomposition,
                           is_squarefree, Number)
from quadsym.errors import InvalidArgumentError, InternalError
from quadsym.utils import as_fraction


class QuaternionAlgebra:
    """H = (a,b/ℚ)，I^2=a，J^2=b，IJ=-JI=K"""

    def __init__(self, a: int, b: int):
        a, b = int(a), int(b)
        if a == 0 or b == 0:
            raise InvalidArgumentError(f'quaternion algebra needs nonzero a, b; got ({a}, {b})')
        self.a = a
        self.b = b
        # √a = s·√d
        self.sqrt_a: Tuple[int, int] = squarefree_decomposition(a)

    def __call__(self, x: Number = 0, y: Number = 0, z: Number = 0, t: Number = 0) -> 'Quaternion':
        return Quaternion(self, x, y, z, t)

    @property
    def one(self) -> 'Quaternion':
        return self(1)

    @property
    def I(self) -> 'Quaternion':  # noqa: E743
        return self(0, 1)

    @property
    def J(self) -> 'Quaternion':
        return self(0, 0, 1)

    @property
    def K(self) -> 'Quaternion':
        return self(0, 0, 0, 1)

    @cached_property
    def discriminant(self) -> int:
        return discriminant(self)

    def __eq__(self, other):
        return isinstance(other, QuaternionAlgebra) and (self.a, self.b) == (other.a, other.b)

    def __hash__(self):
        return hash((self.a, self.b))

    def __repr__(self):
        return f'({self.a},{self.b}/Q)'

    def phi_inverse(self, g: GroupElement) -> Optional['Quaternion']:
        """φ的逆。g不在φ(H)中时返回None"""
        s, d = self.sqrt_a
        m11, m12, m21, m22 = g.entries
        half = Fraction(1, 2)
        x = (m11 + m22) * half
        y_sqrt = (m11 - m22) * half
        z = (m12 + m21 / self.b) * half
        t_sqrt = (m12 - m21 / self.b) * half

        def rational(e: QuadExtElem):
            return e.u if e.v == 0 else None

        def sqrt_coeff(e: QuadExtElem):
            # e = c·s·√d
            if d == 1:
                return e.u / s if e.v == 0 else None
            if e.u != 0 or (e.v != 0 and e.d != d):
                return None
            return e.v / s

        coords = (rational(x), sqrt_coeff(y_sqrt), rational(z), sqrt_coeff(t_sqrt))
        if any(c is None for c in coords):
            return None
        q = self(*coords)
        return q if phi_embed(q) == g else None


class Quaternion:
    """x + yI + zJ + tK"""
    __slots__ = ('algebra', 'x', 'y', 'z', 't')

    def __init__(self, algebra: QuaternionAlgebra, x: Number = 0, y: Number = 0, z: Number = 0, t: Number = 0):
        self.algebra = algebra
        self.x, self.y, self.z, self.t = (as_fraction(c) for c in (x, y, z, t))

    @property
    def coords(self) -> Tuple[Fraction, Fraction, Fraction, Fraction]:
        return self.x, self.y, self.z, self.t

    def _same(self, other: 'Quaternion'):
        if other.algebra != self.algebra:
            raise InvalidArgumentError(f'quaternions from {self.algebra} and {other.algebra}')

    def _wrap(self, other) -> 'Quaternion':
        if isinstance(other, Quaternion):
            self._same(other)
            return other
        return Quaternion(self.algebra, as_fraction(other))

    def __add__(self, other):
        other = self._wrap(other)
        return Quaternion(self.algebra, *(u + v for u, v in zip(self.coords, other.coords)))

    __radd__ = __add__

    def __neg__(self):
        return Quaternion(self.algebra, *(-u for u in self.coords))

    def __sub__(self, other):
        return self + (-self._wrap(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, Quaternion):
            c = as_fraction(other)
            return Quaternion(self.algebra, *(c * u for u in self.coords))
        self._same(other)
        a, b = self.algebra.a, self.algebra.b
        x1, y1, z1, t1 = self.coords
        x2, y2, z2, t2 = other.coords
        return Quaternion(self.algebra,
                          x1 * x2 + a * y1 * y2 + b * z1 * z2 - a * b * t1 * t2,
                          x1 * y2 + y1 * x2 - b * z1 * t2 + b * t1 * z2,
                          x1 * z2 + z1 * x2 + a * y1 * t2 - a * t1 * y2,
                          x1 * t2 + t1 * x2 + y1 * z2 - z1 * y2)

    def __rmul__(self, other):
        c = as_fraction(other)
        return Quaternion(self.algebra, *(c * u for u in self.coords))

    def __truediv__(self, other):
        if isinstance(other, Quaternion):
            return self * other.inverse()
        return self * (1 / as_fraction(other))

    def __pow__(self, n: int):
        if n < 0:
            return self.inverse() ** (-n)
        out, base = self.algebra.one, self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def conjugate(self) -> 'Quaternion':
        return Quaternion(self.algebra, self.x, -self.y, -self.z, -self.t)

    def trace(self) -> Fraction:
        return 2 * self.x

    def norm(self) -> Fraction:
        a, b = self.algebra.a, self.algebra.b
        return self.x ** 2 - a * self.y ** 2 - b * self.z ** 2 + a * b * self.t ** 2

    def inverse(self) -> 'Quaternion':
        n = self.norm()
        if n == 0:
            raise InvalidArgumentError(f'{self} is a zero divisor')
        return self.conjugate() * (1 / n)

    def is_integral(self) -> bool:
        return self.trace().denominator == 1 and self.norm().denominator == 1

    def __eq__(self, other):
        if isinstance(other, Quaternion):
            return self.algebra == other.algebra and self.coords == other.coords
        try:
            return self.coords == (as_fraction(other), 0, 0, 0)
        except InvalidArgumentError:
            return NotImplemented

    def __hash__(self):
        return hash((self.algebra, self.coords))

    def __repr__(self):
        parts = []
        for c, name in zip(self.coords, ('', 'I', 'J', 'K')):
            if c == 0:
                continue
            parts.append(f'{c}' if not name else (name if c == 1 else f'-{name}' if c == -1 else f'{c}*{name}'))
        return ' + '.join(parts).replace('+ -', '- ') if parts else '0'

    def to_dict(self):
        return {'algebra': [self.algebra.a, self.algebra.b], 'coords': [str(c) for c in self.coords]}


def invariants(q: Quaternion) -> Tuple[Fraction, Fraction, Quaternion]:
    """(迹, 约化范数, 共轭)"""
    return q.trace(), q.norm(), q.conjugate()


def phi_embed(q: Quaternion) -> GroupElement:
    """H -> M(2, ℚ(√a))"""
    s, d = q.algebra.sqrt_a
    b = q.algebra.b
    return GroupElement(QuadExtElem(q.x, q.y * s, d), QuadExtElem(q.z, q.t * s, d),
                        QuadExtElem(b * q.z, -b * q.t * s, d), QuadExtElem(q.x, -q.y * s, d))


def ramified_places(H: QuaternionAlgebra) -> list:
    """分歧的位，有限素数升序，定代数末尾加'inf'"""
    places = [p for p in sorted(factorint(abs(2 * H.a * H.b))) if hilbert_symbol(H.a, H.b, p) == -1]
    if hilbert_symbol(H.a, H.b, _INF_) == -1:
        places.append(_INF_)
    return places


def discriminant(H: QuaternionAlgebra) -> int:
    """有限分歧素数之积"""
    places = ramified_places(H)
    if len(places) % 2:
        # Hilbert互反律保证偶数个
        raise InternalError(f'odd number of ramified places {places} for {H}')
    return math.prod(p for p in places if p != _INF_)


class AlgebraClass(NamedTuple):
    kind: str
    discriminant: int
    small_ramified: bool
    places: list

    def to_dict(self):
        return self._asdict()


def classify(H: QuaternionAlgebra) -> AlgebraClass:
    places = ramified_places(H)
    D = discriminant(H)
    if D == 1:
        kind = 'non-ramified'
    elif _INF_ in places:
        kind = 'definite'
    else:
        kind = 'indefinite-division'
    small = kind == 'indefinite-division' and len(factorint(D)) == 2
    return AlgebraClass(kind, D, small, places)


def structure_case(D: int) -> Optional[str]:
    """'1'、'2p'(p≡3 mod 4) 或 'pq'(有一因子≡1 mod 4)，否则None"""
    if D == 1:
        return '1'
    f = factorint(D)
    if len(f) != 2 or any(e != 1 for e in f.values()):
        return None
    p, q = sorted(f)
    if p == 2 and q % 4 == 3:
        return '2p'
    if p % 4 == 1 or q % 4 == 1:
        return 'pq'
    return None


def _to_sym(x: Fraction) -> SymRational:
    return SymRational(x.numerator, x.denominator)


def _coord_matrix(basis: Sequence[Quaternion]) -> Matrix:
    return Matrix([[_to_sym(c) for c in q.coords] for q in basis])


class OrderCertificate(NamedTuple):
    ok: bool
    failures: List[str]

    def __bool__(self):
        return self.ok

    def to_dict(self):
        return self._asdict()


def is_order(basis: Sequence[Quaternion]) -> OrderCertificate:
    """检查4个四元数张成的ℤ格是否为序"""
    failures = []
    basis = list(basis)
    if len(basis) != 4:
        return OrderCertificate(False, [f'need 4 basis elements, got {len(basis)}'])
    H = basis[0].algebra
    if any(q.algebra != H for q in basis):
        return OrderCertificate(False, ['basis elements from different algebras'])
    M = _coord_matrix(basis)
    if M.det() == 0:
        return OrderCertificate(False, ['basis is linearly dependent'])
    M_inv = M.inv()

    def in_lattice(q: Quaternion) -> bool:
        c = Matrix([[_to_sym(x) for x in q.coords]]) * M_inv
        return all(v.is_integer for v in c)

    if not in_lattice(H.one):
        failures.append('1 is not in the lattice')
    for i, q in enumerate(basis):
        if not q.is_integral():
            failures.append(f'basis[{i}] = {q} is not integral (trace {q.trace()}, norm {q.norm()})')
    for i, q in enumerate(basis):
        for j, r in enumerate(basis):
            if not in_lattice(q * r):
                failures.append(f'basis[{i}]*basis[{j}] = {q * r} leaves the lattice')
    return OrderCertificate(not failures, failures)


class QuaternionOrder:
    def __init__(self, algebra: QuaternionAlgebra, basis: Sequence[Quaternion], level: int = 1, label: int = None):
        self.algebra = algebra
        self.basis = tuple(basis)
        self.level = level
        self.label = label
        self._inv = _coord_matrix(self.basis).inv()

    def coordinates(self, q: Quaternion) -> Tuple[Fraction, ...]:
        c = Matrix([[_to_sym(x) for x in q.coords]]) * self._inv
        return tuple(Fraction(int(v.p), int(v.q)) for v in c)

    def contains(self, q: Quaternion) -> bool:
        return q.algebra == self.algebra and all(c.denominator == 1 for c in self.coordinates(q))

    def same_lattice(self, other: 'QuaternionOrder') -> bool:
        return all(other.contains(q) for q in self.basis) and all(self.contains(q) for q in other.basis)

    def certificate(self) -> OrderCertificate:
        return is_order(self.basis)

    def __repr__(self):
        return f'QuaternionOrder({self.algebra}, D={self.label}, N={self.level}, basis={list(self.basis)})'

    def to_dict(self):
        return {'algebra': [self.algebra.a, self.algebra.b], 'D': self.label, 'N': self.level,
                'basis': [q.to_dict()['coords'] for q in self.basis]}


def _check_level(N: int, bound: int, name: str):
    if not is_squarefree(N):
        raise InvalidArgumentError(f'N={N} must be squarefree')
    if bound % N:
        raise InvalidArgumentError(f'N={N} must divide {name}={bound}')


@lru_cache(maxsize=128)
def eichler_order(D: int, N: int) -> QuaternionOrder:
    """判别式D、水平N的Eichler序的显式ℤ基

    D=1：(1,-1) 中 ℤ + ℤ(J+K)/2 + ℤN(-J+K)/2 + ℤ(1-I)/2
    D=2p, p≡3 mod 4：(p,-1) 中 ℤ + ℤI + ℤNJ + ℤ(1+I+J+K)/2，N | (p-1)/2
    D=pq, q≡1 mod 4：(p,q) 中 ℤ + ℤNI + ℤ(1+J)/2 + ℤ(I+K)/2，N | (q-1)/4，gcd(N,p)=1
    """
    D, N = int(D), int(N)
    if N < 1:
        raise InvalidArgumentError(f'level N={N} must be positive')
    h = Fraction(1, 2)
    if D == 1:
        H = QuaternionAlgebra(1, -1)
        basis = [H.one, (H.J + H.K) * h, (H.K - H.J) * (N * h), (H.one - H.I) * h]
        return QuaternionOrder(H, basis, N, D)
    f = factorint(D)
    if D < 1 or len(f) != 2 or any(e != 1 for e in f.values()):
        raise InvalidArgumentError(f'D={D} must be 1 or a product of two distinct primes')
    p, q = sorted(f)
    if p == 2 and q % 4 == 3:
        _check_level(N, (q - 1) // 2, '(p-1)/2')
        H = QuaternionAlgebra(q, -1)
        basis = [H.one, H.I, H.J * N, (H.one + H.I + H.J + H.K) * h]
    else:
        if q % 4 != 1:
            p, q = q, p
        if q % 4 != 1:
            raise InvalidArgumentError(f'D={D}: neither prime factor is 1 mod 4')
        _check_level(N, (q - 1) // 4, '(q-1)/4')
        if math.gcd(N, p) != 1:
            raise InvalidArgumentError(f'N={N} must be coprime to p={p}')
        H = QuaternionAlgebra(p, q)
        basis = [H.one, H.I * N, (H.one + H.J) * h, (H.I + H.K) * h]
    if H.discriminant != D:
        logger.warning('Eichler lattice for D={} lives in {} whose discriminant is {}', D, H, H.discriminant)
    logger.debug('eichler_order D={} N={} in {}', D, N, H)
    return QuaternionOrder(H, basis, N, D)


def admissible_levels(D: int, bound: int = 6) -> List[int]:
    """N <= bound 中eichler_order接受的水平"""
    out = []
    for N in range(1, bound + 1):
        try:
            eichler_order(D, N)
        except InvalidArgumentError:
            continue
        out.append(N)
    return out


def prime_pair_cases(bound: int = 50) -> List[Tuple[int, int, int, Optional[str]]]:
    """素数对(p,q)的判别式及所属情形"""
    primes = [p for p in range(2, bound) if isprime(p)]
    rows = []
    for p in primes:
        for q in primes:
            D = QuaternionAlgebra(p, q).discriminant
            rows.append((p, q, D, structure_case(D)))
    return rows
