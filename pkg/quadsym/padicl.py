"""p进测度与p进L函数

γ_{a,p^n} 矩阵、分圆测度 μ_{f,p}、二次测度 μ_Q、σ置换测度、p进特征与Mellin-Mazur变换
"""
import math
from fractions import Fraction
from typing import Callable, Dict, List, NamedTuple, Optional, Tuple, Union

import polars as pl
from loguru import logger
from sympy import isprime
from sympy.combinatorics import Permutation

from quadsym import _PRECISION_, _TOL_
from quadsym.arith import (GroupElement, PAdicNum, QuadExtElem, extended_bezout, factorial_valuation,
                           one_unit_part, padic_exp, padic_log, squarefree_decomposition, teichmuller)
from quadsym.errors import (DomainError, InvalidArgumentError, NotApplicableError, NotAvailableError,
                            InternalError)
from quadsym.utils import as_fraction, check_sigma, rows_to_frame

Value = Union['PeriodPair', complex]


def signed_digits(a: int, p: int, n: int) -> List[int]:
    """|a| 的p进制低n位，a<0时各位取负"""
    sign = -1 if a < 0 else 1
    m = abs(a)
    out = []
    for _ in range(n):
        m, r = divmod(m, p)
        out.append(sign * r)
    return out


def gamma_a_pn(a: int, p: int, n: int) -> GroupElement:
    """γ_{a,p^n} = γ_{u_{n-1}}...γ_{u_1}γ_{a_0,p}

    γ_{a,p} = [[a, y], [p, x]]，ax - py = 1；γ_u = [[1, u], [0, p]]。
    n=0 时取 diag(p,1)·γ_{a_0,p}，使 diag(p,1)γ_{a,p^n} 与 γ_{a mod p^(n-1)} 同轨道对所有n成立
    """
    if not isprime(p):
        raise InvalidArgumentError(f'p={p} is not prime')
    if n < 0:
        raise InvalidArgumentError(f'level n={n} must be non-negative')
    if a % p == 0:
        raise InvalidArgumentError(f'p={p} divides a={a}')
    if abs(a) >= p ** max(n, 1):
        raise InvalidArgumentError(f'|a|={abs(a)} must be below p^n={p ** max(n, 1)}')
    digits = signed_digits(a, p, max(n, 1))
    a0 = digits[0]
    x, y = extended_bezout(a0, p)
    g = GroupElement(a0, y, p, x)
    if n == 0:
        return GroupElement(p, 0, 0, 1) * g
    for u in digits[1:]:
        g = GroupElement(1, u, 0, p) * g
    return g


def orbit_min_height(p: int, n: int, tau=1j) -> float:
    """γ_{±a,p^k}τ (0 <= k <= n) 的最小虚部，用于规划q展开长度"""
    tau = complex(tau)
    return min(gamma_a_pn(s * a, p, k).act(tau).imag
               for k in range(n + 1) for a in range(1, p ** max(k, 1)) if a % p for s in (1, -1))


class HeckeRootChoice:
    """X^2 - a_p X + p 的根 α

    α 精确存于 ℚ(√(a_p^2-4p))；寻常时同时给出该域到ℚ_p的嵌入，使α映到单位根
    """

    def __init__(self, a_p: int, p: int, level: int, alpha: QuadExtElem, ordinary: bool,
                 sqrt_image: Optional[PAdicNum], precision: int):
        self.a_p = a_p
        self.p = p
        self.level = level
        self.alpha = alpha
        self.ordinary = ordinary
        self.sqrt_image = sqrt_image
        self.precision = precision

    @classmethod
    def from_eigenvalue(cls, a_p: int, p: int, level: int, precision: int = _PRECISION_) -> 'HeckeRootChoice':
        a_p = int(a_p)
        if level % p == 0:
            if level % (p * p) == 0:
                raise NotApplicableError(f'p^2 | N for p={p}, N={level}')
            # p || N 时只能取 α = a_p
            return cls(a_p, p, level, QuadExtElem(a_p), a_p % p != 0, None, precision)
        disc = a_p * a_p - 4 * p
        s, d = squarefree_decomposition(disc)
        alpha = QuadExtElem(Fraction(a_p, 2), Fraction(s, 2), d)
        if a_p % p == 0:
            logger.warning('p={} is supersingular for a_p={}; no unit root', p, a_p)
            return cls(a_p, p, level, alpha, False, None, precision)
        # Hensel提升单位根，初值 a_p
        work = precision + 2
        mod = p ** work
        u = a_p % mod
        for _ in range(2 * work + 2):
            fu = (u * u - a_p * u + p) % mod
            if fu == 0:
                break
            u = (u - fu * pow(2 * u - a_p, -1, mod)) % mod
        if (u * u - a_p * u + p) % mod:
            raise InternalError(f'Hensel lifting failed for a_p={a_p}, p={p}')
        root = PAdicNum.from_rational(u, p, work)
        sqrt_image = (root * 2 - a_p) / s
        return cls(a_p, p, level, alpha, True, sqrt_image, precision)

    @property
    def d(self) -> int:
        return self.alpha.d

    @property
    def complex_value(self) -> complex:
        return self.alpha.to_complex()

    @property
    def alpha_padic(self) -> PAdicNum:
        return self.embed(self.alpha)

    def embed(self, x: QuadExtElem) -> PAdicNum:
        x = QuadExtElem.coerce(x)
        if x.v == 0:
            return PAdicNum.from_rational(x.u, self.p, self.precision)
        if self.sqrt_image is None:
            raise NotAvailableError(f'no p-adic embedding of Q(sqrt({x.d})) for supersingular p={self.p}')
        if x.d != self.d:
            raise InvalidArgumentError(f'{x} is not in Q(sqrt({self.d}))')
        return (PAdicNum.from_rational(x.u, self.p, self.precision)
                + PAdicNum.from_rational(x.v, self.p, self.precision) * self.sqrt_image)

    def to_dict(self):
        return {'a_p': self.a_p, 'p': self.p, 'alpha': self.alpha, 'ordinary': self.ordinary,
                'alpha_padic': self.alpha_padic if self.ordinary else None}


class PeriodPair(NamedTuple):
    """(Ω⁺ 系数, Ω⁻ 系数)"""
    plus: object
    minus: object

    def __add__(self, other):
        return PeriodPair(self.plus + other.plus, self.minus + other.minus)

    def __sub__(self, other):
        return PeriodPair(self.plus - other.plus, self.minus - other.minus)

    def __neg__(self):
        return PeriodPair(-self.plus, -self.minus)

    def scale(self, c) -> 'PeriodPair':
        return PeriodPair(c * self.plus, c * self.minus)

    def __eq__(self, other):
        return isinstance(other, PeriodPair) and self.plus == other.plus and self.minus == other.minus

    def __ne__(self, other):
        return not self == other

    def embed(self, root: HeckeRootChoice) -> 'PeriodPair':
        return PeriodPair(root.embed(self.plus), root.embed(self.minus))

    def to_dict(self):
        return {'plus': self.plus, 'minus': self.minus}


def _zero_like(kind: str):
    return PeriodPair(QuadExtElem(0), QuadExtElem(0)) if kind == 'rational' else 0j


class FiniteLevelDistribution:
    """各层单位剩余类上的取值表 {n: {a mod p^n: μ(a + p^nℤ_p)}}"""

    def __init__(self, p: int, kind: str, tables: Dict[int, Dict[int, Value]],
                 normalization: Dict[int, Tuple[str, int]], root: Optional[HeckeRootChoice] = None,
                 tol: float = _TOL_):
        self.p = p
        self.kind = kind
        self.tables = tables
        self.normalization = normalization
        self.root = root
        self.tol = tol

    @property
    def levels(self) -> List[int]:
        return sorted(self.tables)

    @property
    def max_level(self) -> int:
        return max(self.tables)

    def residues(self, level: int) -> List[int]:
        return sorted(self.tables[level])

    def value(self, a: int, level: int) -> Value:
        if level not in self.tables:
            raise InvalidArgumentError(f'level {level} not stored (have {self.levels})')
        a = a % self.p ** level
        if a % self.p == 0:
            return self.value_on_pZp()
        return self.tables[level][a]

    def value_on_pZp(self) -> Value:
        return _zero_like(self.kind)

    def total(self, level: int = None) -> Value:
        """μ(ℤ_p*)"""
        level = self.levels[0] if level is None else level
        out = _zero_like(self.kind)
        for a in self.residues(level):
            out = out + self.tables[level][a]
        return out

    def compatibility(self, level: int) -> List[Tuple[int, bool]]:
        """μ(a+p^n) 与 Σ_j μ(a+jp^n+p^(n+1)) 比较"""
        if level + 1 not in self.tables:
            raise InvalidArgumentError(f'need levels {level} and {level + 1}')
        q = self.p ** level
        out = []
        for a in self.residues(level):
            s = _zero_like(self.kind)
            for j in range(self.p):
                s = s + self.tables[level + 1][a + j * q]
            lhs = self.tables[level][a]
            ok = (lhs == s) if self.kind == 'rational' else abs(lhs - s) < max(self.tol * 100, 1e-6)
            out.append((a, ok))
        return out

    def is_compatible(self) -> bool:
        return all(ok for lv in self.levels[:-1] for _, ok in self.compatibility(lv))

    def valuation_floor(self, level: int) -> Optional[int]:
        """嵌入后各值分量的最小p进赋值"""
        if self.kind != 'rational' or self.root is None:
            return None
        vals = []
        for a in self.residues(level):
            e = self.tables[level][a].embed(self.root)
            vals.extend(x.valuation for x in (e.plus, e.minus) if not x.is_zero())
        return min(vals) if vals else None

    def to_frame(self, level: int = None) -> pl.DataFrame:
        level = self.max_level if level is None else level
        rows = []
        for a in self.residues(level):
            v = self.tables[level][a]
            if self.kind == 'rational':
                rows.append({'level': level, 'a': a, 'plus': repr(v.plus), 'minus': repr(v.minus)})
            else:
                rows.append({'level': level, 'a': a, 're': v.real, 'im': v.imag})
        return rows_to_frame(rows)

    def to_dict(self):
        return {'p': self.p, 'kind': self.kind,
                'normalization': {str(k): list(v) for k, v in self.normalization.items()},
                'levels': {str(lv): {str(a): self.tables[lv][a] for a in self.residues(lv)} for lv in self.levels}}


def _units(p: int, level: int) -> List[int]:
    return [a for a in range(1, p ** level) if a % p]


def cyclotomic_measure(system, p: int, root: HeckeRootChoice, n: int) -> FiniteLevelDistribution:
    """μ_{f,p}(a + p^mℤ_p)，m = 1..n，值为 (ψ⁺, ψ⁻) 在 {a/p^m, ∞} 上的精确取值

    p∤N: α^(-m)λ(a,m) - α^(-m-1)λ(a,m-1)；p|N: a_p^(-m)λ(a,m)
    """
    if n < 1:
        raise InvalidArgumentError(f'level n={n} must be at least 1')
    if not root.ordinary:
        logger.warning('building the cyclotomic distribution at non-ordinary p={}', p)
    space = system.space

    cache: Dict[Tuple[int, int], PeriodPair] = {}

    def lam(a: int, m: int) -> PeriodPair:
        key = (a % p ** m, m)
        if key not in cache:
            v = space.path_vector(Fraction(key[0], p ** m), 'inf')
            cache[key] = PeriodPair(QuadExtElem(system.evaluate(v, 1)), QuadExtElem(system.evaluate(v, -1)))
        return cache[key]

    alpha = root.alpha
    divides = space.level % p == 0
    tables, norm = {}, {}
    for m in range(1, n + 1):
        table = {}
        for a in _units(p, m):
            if divides:
                table[a] = lam(a, m).scale(alpha ** -m)
            else:
                table[a] = lam(a, m).scale(alpha ** -m) - lam(a, m - 1).scale(alpha ** (-m - 1))
        tables[m] = table
        norm[m] = ('a_p' if divides else 'alpha', m)
    logger.info('cyclotomic distribution N={} p={} built to level {}', space.level, p, n)
    return FiniteLevelDistribution(p, 'rational', tables, norm, root)


def quadratic_measure(f, p: int, root: HeckeRootChoice, n: int, tau=1j, tol: float = _TOL_) -> FiniteLevelDistribution:
    """μ_Q(a + p^mℤ_p)，m = 1..n，复数值

    p∤N: α^(-m)(δ(a,m) - α^(-1)δ(a,m-1))；p||N: a_p^(-m)δ(a,m)
    """
    from quadsym.periods import delta_f

    if n < 1:
        raise InvalidArgumentError(f'level n={n} must be at least 1')
    N = f.level
    if N % (p * p) == 0:
        raise NotApplicableError(f'p^2 | N for p={p}, N={N}')
    cache: Dict[Tuple[int, int], complex] = {}

    def delta(a: int, k: int) -> complex:
        a = a % p ** max(k, 1)
        if (a, k) not in cache:
            cache[(a, k)] = delta_f(f, a, p, k, tau, tol)
        return cache[(a, k)]

    alpha = root.complex_value
    divides = N % p == 0
    tables, norm = {}, {}
    for m in range(1, n + 1):
        table = {}
        for a in _units(p, m):
            if divides:
                table[a] = alpha ** -m * delta(a, m)
            else:
                table[a] = alpha ** -m * (delta(a, m) - delta(a, m - 1) / alpha)
        tables[m] = table
        norm[m] = ('a_p' if divides else 'alpha', m)
    logger.info('quadratic distribution N={} p={} built to level {}', N, p, n)
    return FiniteLevelDistribution(p, 'complex', tables, norm, root, tol)


def _sigma(sigma, p: int) -> Permutation:
    return check_sigma(sigma if isinstance(sigma, Permutation) else Permutation(list(sigma)), p)


def sigma_digits(sigma: Permutation, a: int, p: int, level: int) -> int:
    """σ 逐位作用在 a mod p^level 上"""
    out, q = 0, 1
    for u in signed_digits(a % p ** level, p, level):
        out += sigma(u) * q
        q *= p
    return out


def sigma_twist(mu: FiniteLevelDistribution, sigma) -> FiniteLevelDistribution:
    """μ^σ(a + p^nℤ_p) = μ(σ(a) + p^nℤ_p)"""
    p = mu.p
    sigma = _sigma(sigma, p)
    tables = {lv: {a: mu.tables[lv][sigma_digits(sigma, a, p, lv)] for a in mu.residues(lv)} for lv in mu.levels}
    return FiniteLevelDistribution(p, mu.kind, tables, dict(mu.normalization), mu.root, mu.tol)


class LevelFunction:
    """ℤ_p* 上在 p^level 剩余类上取常值的函数；level=None 表示非局部常值"""

    def __init__(self, p: int, level: Optional[int], func: Callable[[int], object]):
        self.p = p
        self.level = level
        self._func = func

    @classmethod
    def constant(cls, p: int, value=1) -> 'LevelFunction':
        return cls(p, 0, lambda a: value)

    def __call__(self, a: int):
        return self._func(a)

    def __mul__(self, other: 'LevelFunction') -> 'LevelFunction':
        if self.level is None or other.level is None:
            level = None
        else:
            level = max(self.level, other.level)
        return LevelFunction(self.p, level, lambda a: self(a) * other(a))

    def is_multiplicative(self, level: int = None) -> bool:
        """在 (ℤ/p^level)* 上逐对检查 φ(ab) = φ(a)φ(b)"""
        level = self.level if level is None else level
        q = self.p ** level
        units = _units(self.p, level)
        return all(self(a * b % q) == self(a) * self(b) for a in units for b in units)


class PAdicCharacter(LevelFunction):
    """ω^k · χ_s"""

    def __init__(self, p: int, k: int = 0, s: Optional[PAdicNum] = None, precision: int = _PRECISION_):
        self.k = k % (p - 1)
        self.s = s
        self.precision = precision
        self._omega: Dict[int, PAdicNum] = {}
        super().__init__(p, 1 if s is None else None, self._value)

    def _value(self, a: int) -> PAdicNum:
        p = self.p
        r = a % p
        if r == 0:
            raise DomainError(f'{a} is not a unit mod {p}')
        if r not in self._omega:
            self._omega[r] = teichmuller(r, p, self.precision) ** self.k
        out = self._omega[r]
        if self.s is not None:
            out = out * chi_s_eval(a, self.s, self.precision)
        return out

    def __repr__(self):
        return f'PAdicCharacter(p={self.p}, k={self.k}, s={self.s})'


def all_finite_characters(p: int, precision: int = _PRECISION_) -> List[PAdicCharacter]:
    """Teichmüller 幂 ω^k，0 <= k <= p-2"""
    return [PAdicCharacter(p, k, None, precision) for k in range(p - 1)]


def chi_sigma(chi: LevelFunction, sigma, n: int) -> LevelFunction:
    """χ_σ(a) = χ(σ^(-1)(a)·a^(-1) mod p^n)"""
    p = chi.p
    inv = _sigma(sigma, p) ** -1
    q = p ** n

    def func(a: int):
        b = sigma_digits(inv, a, p, n)
        return chi(b * pow(a, -1, q) % q)

    return LevelFunction(p, n, func)


def mellin_mazur(mu: FiniteLevelDistribution, phi: LevelFunction, n: int, riemann: bool = False):
    """Σ_a φ(a)·μ(a + p^nℤ_p)

    φ 必须在 p^n 剩余类上取常值；riemann=True 时允许任意φ，按代表元求黎曼和
    """
    if n not in mu.tables:
        raise InvalidArgumentError(f'level {n} not stored (have {mu.levels})')
    level = getattr(phi, 'level', None)
    if level is None and not riemann:
        raise InvalidArgumentError('function is not locally constant; pass riemann=True for a Riemann sum')
    if level is not None and level > n:
        raise InvalidArgumentError(f'function has level {level} above the requested level {n}')
    total = None
    for a in mu.residues(n):
        c = phi(a)
        v = mu.tables[n][a]
        if isinstance(c, PAdicNum):
            if mu.kind != 'rational':
                raise NotApplicableError('p-adic characters need a measure with algebraic values')
            term = v.embed(mu.root).scale(c)
        else:
            term = v.scale(c) if mu.kind == 'rational' else c * v
        total = term if total is None else total + term
    return total if total is not None else mu.value_on_pZp()


def _as_s(s, p: int, precision: int) -> PAdicNum:
    if isinstance(s, PAdicNum):
        if s.p != p:
            raise InvalidArgumentError(f's is {s.p}-adic, expected {p}-adic')
        return s
    return PAdicNum.from_rational(as_fraction(s), p, precision)


def chi_s_eval(x: int, s: PAdicNum, precision: int = _PRECISION_) -> PAdicNum:
    """χ_s(x) = exp_p(s·log_p⟨x⟩)"""
    p = s.p
    if s.is_zero():
        return PAdicNum.from_rational(1, p, precision)
    if s.valuation < 1:
        raise DomainError(f's={s} is outside the disc |s| <= 1/p')
    lg = padic_log(one_unit_part(x, p, precision))
    return padic_exp(s * lg)


def chi_s_series(x: int, s: PAdicNum, precision: int = _PRECISION_) -> Tuple[PAdicNum, List[dict]]:
    """Σ_n s^n log_p(⟨x⟩)^n/n!，尾项用 v(n!) <= (n-1)/(p-1) 截断"""
    p = s.p
    one = PAdicNum.from_rational(1, p, precision)
    if s.is_zero():
        return one, []
    if s.valuation < 1:
        raise DomainError(f's={s} is outside the disc |s| <= 1/p')
    z = s * padic_log(one_unit_part(x, p, precision))
    if z.is_zero():
        return one, []
    vz = z.valuation
    total, power, fact = one, one, 1
    terms = []
    k = 1
    while Fraction(k * vz) - Fraction(k - 1, p - 1) < precision:
        power = power * z
        fact *= k
        term = power / fact
        bound = k * vz - factorial_valuation(k, p)
        terms.append({'k': k, 'valuation': None if term.is_zero() else term.valuation, 'bound': bound})
        total = total + term
        k += 1
    return total, terms


class LpReport(NamedTuple):
    s: object
    level: int
    direct: object
    series: object
    terms: List[dict]
    agree: bool

    def to_dict(self):
        return self._asdict()


def lp_at_s(mu: FiniteLevelDistribution, s, precision: int = _PRECISION_) -> LpReport:
    """L_p(f, s) = ∫ χ_s dμ 的两种算法：直接黎曼和与逐项展开

    逐项展开第k项 I_k = Σ_a log_p⟨a⟩^k/k! μ(a)，满足 v(I_k) >= min v(μ) + k·min v(log) - v(k!)
    """
    p = mu.p
    if mu.kind == 'complex':
        if (isinstance(s, PAdicNum) and s.is_zero()) or (not isinstance(s, PAdicNum) and as_fraction(s) == 0):
            total = mu.total(1)
            return LpReport(0, 1, total, total, [], True)
        raise NotApplicableError('the quadratic L-value is only available at s = 0')
    if mu.root is None or not mu.root.ordinary:
        raise NotAvailableError(f'p={p} is not ordinary; the distribution is not bounded')
    s = _as_s(s, p, precision)
    if not s.is_zero() and s.valuation < 1:
        raise DomainError(f's={s} is outside the disc |s| <= 1/p')
    n = mu.max_level
    units = mu.residues(n)
    values = {a: mu.tables[n][a].embed(mu.root) for a in units}
    chis = {a: chi_s_eval(a, s, precision) for a in units}
    direct = None
    for a in units:
        term = values[a].scale(chis[a])
        direct = term if direct is None else direct + term

    logs = {a: padic_log(one_unit_part(a, p, precision)) for a in units}
    v_mu = min((x.valuation for v in values.values() for x in v if not x.is_zero()), default=0)
    v_log = min((x.valuation for x in logs.values() if not x.is_zero()), default=math.inf)
    v_s = s.valuation
    target = min(direct.plus.absprec, direct.minus.absprec)

    series = PeriodPair(PAdicNum.zero(p, target), PAdicNum.zero(p, target))
    powers = {a: PAdicNum.from_rational(1, p, precision) for a in units}
    terms = []
    k, fact, s_pow = 0, 1, PAdicNum.from_rational(1, p, precision)
    while True:
        integral = None
        for a in units:
            t = values[a].scale(powers[a] / fact)
            integral = t if integral is None else integral + t
        bound = v_mu + (k * v_log if k else 0) - factorial_valuation(k, p)
        vals = [x.valuation for x in integral if not x.is_zero()]
        v_int = min(vals) if vals else None
        terms.append({'k': k, 'valuation': v_int, 'bound': bound,
                      'holds': v_int is None or v_int >= bound})
        series = series + integral.scale(s_pow)
        k += 1
        if s.is_zero() or v_log == math.inf:
            break
        if v_mu + k * (v_s + v_log) - Fraction(k - 1, p - 1) >= target:
            break
        fact *= k
        s_pow = s_pow * s
        for a in units:
            powers[a] = powers[a] * logs[a]
    agree = series == direct
    if not agree:
        logger.warning('series and direct L-values differ at p={} s={}', p, s)
    return LpReport(s, n, direct, series, terms, agree)
