"""精确算术

有理数、实/虚二次域元素、2x2矩阵、数论符号、定精度p进数
"""
import cmath
import math
from fractions import Fraction
from functools import lru_cache
from typing import Tuple, Union

from loguru import logger
from sympy import isprime, factorint, multiplicity
from sympy import mod_inverse as _sympy_mod_inverse
from sympy import legendre_symbol as _legendre
from sympy.ntheory import digits as _digits

from quadsym import _INF_
from quadsym.errors import InvalidArgumentError, DomainError, PrecisionError
from quadsym.utils import as_fraction


def mod_inverse(a, m):
    # 新版sympy可能返回gmpy2.mpz，统一转成int
    return int(_sympy_mod_inverse(a, m))

Rational = Fraction
Number = Union[int, Fraction]


@lru_cache(maxsize=4096)
def squarefree_decomposition(n: int) -> Tuple[int, int]:
    """n = s^2 * d，d无平方因子，符号留在d中"""
    if n == 0:
        raise InvalidArgumentError('squarefree_decomposition of 0')
    s, d = 1, -1 if n < 0 else 1
    for p, e in factorint(abs(n)).items():
        s *= p ** (e // 2)
        d *= p ** (e % 2)
    return s, d


def is_squarefree(n: int) -> bool:
    return n != 0 and squarefree_decomposition(n)[0] == 1


def valuation(x: Number, p: int) -> Union[int, float]:
    """p进赋值，0返回inf"""
    x = as_fraction(x)
    if x == 0:
        return math.inf
    return multiplicity(p, abs(x.numerator)) - multiplicity(p, x.denominator)


def digit_sum(n: int, p: int) -> int:
    """n的p进制数字和σ_n"""
    if n == 0:
        return 0
    return sum(_digits(n, p)[1:])


def factorial_valuation(n: int, p: int) -> int:
    """v_p(n!) = (n - σ_n)/(p-1)"""
    return (n - digit_sum(n, p)) // (p - 1)


def _floor_log(n: int, p: int) -> int:
    k, q = 0, p
    while q <= n:
        k += 1
        q *= p
    return k


class QuadExtElem:
    """u + v·√d，d无平方因子

    d=1时v并入u。v=0的元素与任意d兼容
    """
    __slots__ = ('u', 'v', 'd')

    def __init__(self, u: Number = 0, v: Number = 0, d: int = 1):
        u = as_fraction(u)
        v = as_fraction(v)
        d = int(d)
        if not is_squarefree(d):
            raise InvalidArgumentError(f'd={d} is not squarefree')
        if d == 1:
            u, v = u + v, Fraction(0)
        self.u = u
        self.v = v
        self.d = d

    @classmethod
    def coerce(cls, x) -> 'QuadExtElem':
        if isinstance(x, QuadExtElem):
            return x
        return cls(as_fraction(x))

    @property
    def is_rational(self) -> bool:
        return self.v == 0

    def _field(self, other: 'QuadExtElem') -> int:
        if other.v == 0:
            return self.d
        if self.v == 0:
            return other.d
        if self.d != other.d:
            raise InvalidArgumentError(f'mixed fields Q(sqrt({self.d})) and Q(sqrt({other.d}))')
        return self.d

    def __add__(self, other):
        try:
            other = QuadExtElem.coerce(other)
        except InvalidArgumentError:
            return NotImplemented
        return QuadExtElem(self.u + other.u, self.v + other.v, self._field(other))

    __radd__ = __add__

    def __neg__(self):
        return QuadExtElem(-self.u, -self.v, self.d)

    def __sub__(self, other):
        try:
            other = QuadExtElem.coerce(other)
        except InvalidArgumentError:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        try:
            other = QuadExtElem.coerce(other)
        except InvalidArgumentError:
            return NotImplemented
        d = self._field(other)
        return QuadExtElem(self.u * other.u + self.v * other.v * d,
                           self.u * other.v + self.v * other.u, d)

    __rmul__ = __mul__

    def conjugate(self) -> 'QuadExtElem':
        return QuadExtElem(self.u, -self.v, self.d)

    def norm(self) -> Fraction:
        return self.u * self.u - self.d * self.v * self.v

    def trace(self) -> Fraction:
        return 2 * self.u

    def inverse(self) -> 'QuadExtElem':
        n = self.norm()
        if n == 0:
            raise DomainError('division by zero in quadratic field')
        return QuadExtElem(self.u / n, -self.v / n, self.d)

    def __truediv__(self, other):
        try:
            other = QuadExtElem.coerce(other)
        except InvalidArgumentError:
            return NotImplemented
        return self * other.inverse()

    def __rtruediv__(self, other):
        return QuadExtElem.coerce(other) * self.inverse()

    def __pow__(self, n: int):
        if n < 0:
            return self.inverse() ** (-n)
        out, base = QuadExtElem(1, 0, self.d), self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def sign(self) -> int:
        """实数u+v√d的精确符号，只用整数比较"""
        if self.v == 0:
            return (self.u > 0) - (self.u < 0)
        if self.d < 0:
            raise DomainError(f'{self} is not real')
        su = (self.u > 0) - (self.u < 0)
        sv = (self.v > 0) - (self.v < 0)
        if su == 0 or su == sv:
            return sv
        # 异号时比较 u^2 与 v^2 d
        return su if self.u * self.u > self.v * self.v * self.d else sv

    def __lt__(self, other):
        return (self - other).sign() < 0

    def __le__(self, other):
        return (self - other).sign() <= 0

    def __gt__(self, other):
        return (self - other).sign() > 0

    def __ge__(self, other):
        return (self - other).sign() >= 0

    def __eq__(self, other):
        try:
            other = QuadExtElem.coerce(other)
        except InvalidArgumentError:
            return NotImplemented
        if self.u != other.u or self.v != other.v:
            return False
        return self.v == 0 or self.d == other.d

    def __hash__(self):
        return hash((self.u, self.v, self.d if self.v else 0))

    def __bool__(self):
        return self.u != 0 or self.v != 0

    def __float__(self):
        if self.v != 0 and self.d < 0:
            raise DomainError(f'{self} is not real')
        return float(self.u) + float(self.v) * math.sqrt(self.d) if self.v else float(self.u)

    def to_complex(self) -> complex:
        return complex(float(self.u)) + float(self.v) * cmath.sqrt(self.d)

    def __repr__(self):
        if self.v == 0:
            return str(self.u)
        return f'{self.u} + {self.v}*sqrt({self.d})' if self.u else f'{self.v}*sqrt({self.d})'

    def to_dict(self):
        return {'u': str(self.u), 'v': str(self.v), 'd': self.d}


class GroupElement:
    """ℚ(√d)上的2x2矩阵 [[a, b], [c, d]]，d=1即有理矩阵"""
    __slots__ = ('a', 'b', 'c', 'd', '_det')

    def __init__(self, a, b, c, d):
        self.a, self.b, self.c, self.d = (QuadExtElem.coerce(x) for x in (a, b, c, d))
        self._det = self.a * self.d - self.b * self.c

    @classmethod
    def identity(cls) -> 'GroupElement':
        return cls(1, 0, 0, 1)

    @property
    def entries(self) -> Tuple[QuadExtElem, QuadExtElem, QuadExtElem, QuadExtElem]:
        return self.a, self.b, self.c, self.d

    @property
    def field(self) -> int:
        for x in self.entries:
            if x.v != 0:
                return x.d
        return 1

    @property
    def det(self) -> QuadExtElem:
        return self._det

    @property
    def trace(self) -> QuadExtElem:
        return self.a + self.d

    @property
    def is_rational(self) -> bool:
        return all(x.v == 0 for x in self.entries)

    def rational_entries(self) -> Tuple[Fraction, Fraction, Fraction, Fraction]:
        if not self.is_rational:
            raise DomainError(f'{self} has irrational entries')
        return tuple(x.u for x in self.entries)

    def is_integral(self) -> bool:
        return self.is_rational and all(x.denominator == 1 for x in self.rational_entries())

    def integer_entries(self) -> Tuple[int, int, int, int]:
        if not self.is_integral():
            raise DomainError(f'{self} is not an integer matrix')
        return tuple(int(x) for x in self.rational_entries())

    def __mul__(self, other):
        if isinstance(other, GroupElement):
            return GroupElement(self.a * other.a + self.b * other.c,
                                self.a * other.b + self.b * other.d,
                                self.c * other.a + self.d * other.c,
                                self.c * other.b + self.d * other.d)
        s = QuadExtElem.coerce(other)
        return GroupElement(*(s * x for x in self.entries))

    def __rmul__(self, other):
        s = QuadExtElem.coerce(other)
        return GroupElement(*(s * x for x in self.entries))

    def __neg__(self):
        return GroupElement(*(-x for x in self.entries))

    def inverse(self) -> 'GroupElement':
        if not self._det:
            raise DomainError(f'{self} is singular')
        k = self._det.inverse()
        return GroupElement(k * self.d, -k * self.b, -k * self.c, k * self.a)

    def __pow__(self, n: int) -> 'GroupElement':
        if n < 0:
            return self.inverse() ** (-n)
        out, base = GroupElement.identity(), self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def __eq__(self, other):
        if not isinstance(other, GroupElement):
            return NotImplemented
        return self.entries == other.entries

    def __hash__(self):
        return hash(self.entries)

    def is_identity(self) -> bool:
        return self == GroupElement.identity()

    def is_pm_identity(self) -> bool:
        return self.is_identity() or (-self).is_identity()

    def to_complex(self) -> Tuple[complex, complex, complex, complex]:
        return tuple(x.to_complex() for x in self.entries)

    def act(self, z: complex) -> complex:
        """数值Möbius作用"""
        a, b, c, d = self.to_complex()
        return (a * z + b) / (c * z + d)

    def tolist(self):
        return [[repr(self.a), repr(self.b)], [repr(self.c), repr(self.d)]]

    def __repr__(self):
        return f'[[{self.a!r}, {self.b!r}], [{self.c!r}, {self.d!r}]]'

    def to_dict(self):
        return {'rows': self.tolist()}


Matrix2 = GroupElement


def legendre_symbol(a: int, p: int) -> int:
    """Legendre符号 (a/p)，p为奇素数"""
    if p == 2 or not isprime(p):
        raise InvalidArgumentError(f'p={p} is not an odd prime')
    return int(_legendre(int(a) % p, p))


def hilbert_symbol(a: int, b: int, place) -> int:
    """Hilbert符号 (a,b)_v，v为素数或'inf'

    -1 当且仅当 (a,b/ℚ) 在该位处为除环
    """
    a, b = int(a), int(b)
    if a == 0 or b == 0:
        raise InvalidArgumentError('hilbert_symbol needs nonzero a and b')
    if place == _INF_ or place == math.inf:
        return -1 if (a < 0 and b < 0) else 1
    p = int(place)
    if not isprime(p):
        raise InvalidArgumentError(f'place {place!r} is neither a prime nor {_INF_!r}')
    alpha = multiplicity(p, abs(a))
    beta = multiplicity(p, abs(b))
    u = a // p ** alpha
    v = b // p ** beta
    if p == 2:
        def eps(x):
            return ((x - 1) // 2) % 2

        def omega(x):
            return ((x * x - 1) // 8) % 2

        e = eps(u) * eps(v) + alpha * omega(v) + beta * omega(u)
        return -1 if e % 2 else 1
    s = -1 if (alpha * beta * ((p - 1) // 2)) % 2 else 1
    return s * legendre_symbol(u, p) ** beta * legendre_symbol(v, p) ** alpha


def extended_bezout(a: int, p: int) -> Tuple[int, int]:
    """唯一的(x, y)，ax - py = 1 且 0 <= x <= p-1"""
    a, p = int(a), int(p)
    if p < 2:
        raise InvalidArgumentError(f'modulus p={p} must be at least 2')
    if math.gcd(a, p) != 1:
        raise InvalidArgumentError(f'a={a} is not coprime to p={p}')
    x = mod_inverse(a, p) % p
    y = (a * x - 1) // p
    return x, y


class PAdicNum:
    """定精度p进数 p^valuation * unit

    precision为相对精度N：unit只知道模p^N。精确零的valuation为inf，
    此时precision表示绝对精度
    """
    __slots__ = ('p', 'valuation', 'unit', 'precision')

    def __init__(self, p: int, valuation, unit: int, precision: int):
        self.p = p
        self.valuation = valuation
        self.unit = unit
        self.precision = precision
        if valuation != math.inf:
            if precision <= 0:
                raise PrecisionError(f'non-positive relative precision {precision}')
            if unit % p == 0 or not 0 < unit < p ** precision:
                raise InvalidArgumentError(f'unit {unit} not a unit residue mod {p}^{precision}')

    @classmethod
    def zero(cls, p: int, absprec: int) -> 'PAdicNum':
        return cls(p, math.inf, 0, absprec)

    @classmethod
    def from_exact(cls, x: Number, p: int, absprec: int) -> 'PAdicNum':
        """按绝对精度p^absprec截断的精确有理数"""
        x = as_fraction(x)
        if x == 0:
            return cls.zero(p, absprec)
        v = valuation(x, p)
        if v >= absprec:
            return cls.zero(p, absprec)
        rel = absprec - v
        y = x / Fraction(p) ** v
        mod = p ** rel
        unit = y.numerator * mod_inverse(y.denominator, mod) % mod
        return cls(p, v, unit, rel)

    @classmethod
    def from_rational(cls, x: Number, p: int, precision: int) -> 'PAdicNum':
        """相对精度precision"""
        x = as_fraction(x)
        if x == 0:
            return cls.zero(p, precision)
        return cls.from_exact(x, p, valuation(x, p) + precision)

    @property
    def absprec(self):
        if self.valuation == math.inf:
            return self.precision
        return self.valuation + self.precision

    def is_zero(self) -> bool:
        return self.valuation == math.inf

    def to_rational(self) -> Fraction:
        if self.is_zero():
            return Fraction(0)
        return Fraction(self.unit) * Fraction(self.p) ** self.valuation

    def residue(self, k: int) -> int:
        """模p^k的代表元"""
        if self.valuation < 0:
            raise DomainError(f'{self} is not p-integral')
        if k > self.absprec:
            raise PrecisionError(f'residue mod {self.p}^{k} needs absolute precision {k}, have {self.absprec}',
                                 required=k)
        if self.is_zero():
            return 0
        return int(self.to_rational()) % self.p ** k

    def _check(self, other: 'PAdicNum'):
        if other.p != self.p:
            raise InvalidArgumentError(f'mixed primes {self.p} and {other.p}')

    def _coerce(self, other) -> 'PAdicNum':
        if isinstance(other, PAdicNum):
            self._check(other)
            return other
        return PAdicNum.from_exact(as_fraction(other), self.p, self.absprec)

    def __add__(self, other):
        if not isinstance(other, (PAdicNum, int, Fraction)):
            return NotImplemented
        other = self._coerce(other)
        absprec = min(self.absprec, other.absprec)
        return PAdicNum.from_exact(self.to_rational() + other.to_rational(), self.p, absprec)

    __radd__ = __add__

    def __neg__(self):
        if self.is_zero():
            return self
        mod = self.p ** self.precision
        return PAdicNum(self.p, self.valuation, (-self.unit) % mod, self.precision)

    def __sub__(self, other):
        if not isinstance(other, (PAdicNum, int, Fraction)):
            return NotImplemented
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            other = as_fraction(other)
            if other == 0:
                return PAdicNum.zero(self.p, self.absprec)
            other = PAdicNum.from_rational(other, self.p, self.precision if not self.is_zero() else 1)
        if not isinstance(other, PAdicNum):
            return NotImplemented
        self._check(other)
        if self.is_zero() or other.is_zero():
            if self.is_zero() and other.is_zero():
                return PAdicNum.zero(self.p, self.absprec + other.absprec)
            z, x = (self, other) if self.is_zero() else (other, self)
            return PAdicNum.zero(self.p, z.absprec + x.valuation)
        n = min(self.precision, other.precision)
        mod = self.p ** n
        return PAdicNum(self.p, self.valuation + other.valuation, self.unit * other.unit % mod, n)

    __rmul__ = __mul__

    def inverse(self) -> 'PAdicNum':
        if self.is_zero():
            raise DomainError('p-adic division by zero')
        mod = self.p ** self.precision
        return PAdicNum(self.p, -self.valuation, mod_inverse(self.unit, mod), self.precision)

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            other = as_fraction(other)
            if other == 0:
                raise DomainError('p-adic division by zero')
            return self * (1 / other)
        if not isinstance(other, PAdicNum):
            return NotImplemented
        return self * other.inverse()

    def __rtruediv__(self, other):
        return self.inverse() * other

    def __pow__(self, n: int):
        if n < 0:
            return self.inverse() ** (-n)
        out = PAdicNum.from_rational(1, self.p, self.precision if not self.is_zero() else self.absprec)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def __eq__(self, other):
        if not isinstance(other, (PAdicNum, int, Fraction)):
            return NotImplemented
        return (self - other).is_zero()

    __hash__ = None

    def __repr__(self):
        return f'{self.to_rational()} + O({self.p}^{self.absprec})'

    def to_dict(self):
        if self.is_zero():
            return {'p': self.p, 'valuation': None, 'value': '0', 'absprec': self.absprec}
        return {'p': self.p, 'valuation': self.valuation, 'value': str(self.to_rational()), 'absprec': self.absprec}


def teichmuller(x: Number, p: int, precision: int) -> PAdicNum:
    """Teichmüller代表元ω(x)：ω^(p-1)=1 且 ω≡x mod p"""
    if not isprime(p):
        raise InvalidArgumentError(f'p={p} is not prime')
    x = as_fraction(x)
    mod = p ** precision
    if x.denominator % p == 0 or x.numerator % p == 0:
        raise InvalidArgumentError(f'x={x} is not a p-adic unit for p={p}')
    w = x.numerator * mod_inverse(x.denominator, mod) % mod
    # x -> x^p 迭代，每步多一位
    for _ in range(precision + 1):
        w2 = pow(w, p, mod)
        if w2 == w:
            break
        w = w2
    return PAdicNum.from_rational(w, p, precision)


def one_unit_part(x: Number, p: int, precision: int) -> PAdicNum:
    """⟨x⟩ = x·ω(x)^(-1) ≡ 1 mod p"""
    return PAdicNum.from_rational(x, p, precision) / teichmuller(x, p, precision)


def padic_log(u: PAdicNum) -> PAdicNum:
    """log_p(u)，u ≡ 1 mod p

    逐项求和直到n·v(z) - floor(log_p n)不低于绝对精度
    """
    if u.is_zero() or u.valuation != 0:
        raise DomainError(f'log_p needs a unit congruent to 1, got {u}')
    z = u - 1
    p, n_abs = u.p, u.absprec
    if z.is_zero():
        return PAdicNum.zero(p, n_abs)
    vz = z.valuation
    if vz < 1:
        raise DomainError(f'log_p: {u} is outside the disc of convergence')
    zr = z.to_rational()
    total = Fraction(0)
    power = zr
    n = 1
    while n * vz - _floor_log(n, p) < n_abs:
        total += power / n if n % 2 else -power / n
        n += 1
        power *= zr
    logger.debug('log_{} summed {} terms at absprec {}', p, n - 1, n_abs)
    return PAdicNum.from_exact(total, p, n_abs)


def padic_exp(z: PAdicNum) -> PAdicNum:
    """exp_p(z)，要求v(z) > 1/(p-1)

    尾项用 v(n!) <= (n-1)/(p-1) 控制
    """
    p, n_abs = z.p, z.absprec
    if z.is_zero():
        return PAdicNum.from_rational(1, p, max(n_abs, 1))
    vz = z.valuation
    if vz * (p - 1) <= 1:
        raise DomainError(f'exp_p: valuation {vz} of {z} is not above 1/(p-1)')
    zr = z.to_rational()
    total = Fraction(1)
    term = Fraction(1)
    n = 1
    while (n * vz) * (p - 1) - (n - 1) < n_abs * (p - 1):
        term = term * zr / n
        total += term
        n += 1
    logger.debug('exp_{} summed {} terms at absprec {}', p, n - 1, n_abs)
    return PAdicNum.from_exact(total, p, n_abs)
