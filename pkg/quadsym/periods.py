"""q展开与模积分 φ_f

积分用q级数的原函数计算，尾项按 |a_n| <= d(n)√n <= 2n 的几何界截断
"""
import math
from pathlib import Path
from typing import Callable, Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
from loguru import logger
from scipy import integrate
from sympy import primerange

from quadsym import _TOL_
from quadsym._nb import _qseries, _qseries_antiderivative, _qseries_antiderivative_many
from quadsym.arith import GroupElement
from quadsym.errors import InvalidArgumentError, PrecisionError, NotAvailableError
from quadsym.fuchsian import UpperHalfPoint
from quadsym.utils import max_terms, smallest_prime_factors

Point = Union[complex, UpperHalfPoint]


def _to_complex(z: Point) -> complex:
    if isinstance(z, UpperHalfPoint):
        return z.to_complex()
    return complex(z)


class QExpansion:
    """f = Σ a_n q^n，a_1 = 1"""

    def __init__(self, level: int, coefficients: Sequence[int], eigenvalues: Mapping[int, int] = None):
        coefficients = [int(a) for a in coefficients]
        if not coefficients or coefficients[0] != 1:
            raise InvalidArgumentError('q-expansion must start with a_1 = 1')
        self.level = level
        self._ints: Tuple[int, ...] = tuple(coefficients)
        # 下标0不用
        self._coef = np.zeros(len(coefficients) + 1, dtype=np.float64)
        self._coef[1:] = np.asarray(coefficients, dtype=np.float64)
        self.eigenvalues = dict(eigenvalues or {})

    @property
    def length(self) -> int:
        return len(self._ints)

    @property
    def coefficients(self) -> Tuple[int, ...]:
        return self._ints

    def __getitem__(self, n: int) -> int:
        if not 1 <= n <= self.length:
            raise IndexError(f'a_{n} outside 1..{self.length}')
        return self._ints[n - 1]

    def _terms(self, y: float, tol: float, planner: Callable[[float, float], int] = None) -> int:
        m = (planner or required_terms)(y, tol)
        limit = min(max_terms(), self.length)
        if m > limit:
            raise PrecisionError(f'Im z = {y:.3g} needs {m} terms for tol {tol:g}, only {limit} available',
                                 required=m)
        return m

    def evaluate(self, z: Point, tol: float = _TOL_) -> complex:
        z = _to_complex(z)
        if z.imag <= 0:
            raise InvalidArgumentError(f'{z} is not in the upper half-plane')
        m = self._terms(z.imag, tol, required_series_terms)
        return complex(_qseries(self._coef, m, z.real, z.imag))

    def antiderivative(self, z: Point, tol: float = _TOL_) -> complex:
        """F(z) = Σ a_n q^n/(2πin)"""
        z = _to_complex(z)
        if z.imag <= 0:
            raise InvalidArgumentError(f'{z} is not in the upper half-plane')
        m = self._terms(z.imag, tol / 2)
        return complex(_qseries_antiderivative(self._coef, m, z.real, z.imag))

    def antiderivative_many(self, zs: Sequence[Point], tol: float = _TOL_) -> np.ndarray:
        zs = np.asarray([_to_complex(z) for z in zs], dtype=np.complex128)
        if len(zs) == 0:
            return zs
        if np.any(zs.imag <= 0):
            raise InvalidArgumentError('points must lie in the upper half-plane')
        m = self._terms(float(zs.imag.min()), tol / 2)
        return _qseries_antiderivative_many(self._coef, m, zs.real.copy(), zs.imag.copy())

    def check_recursions(self) -> List[int]:
        """不满足乘性或素数幂递推的下标"""
        a = (0,) + self._ints
        bad = []
        M = self.length
        spf = smallest_prime_factors(M)
        for n in range(2, M + 1):
            p = int(spf[n])
            m, pe = n, 1
            while m % p == 0:
                m //= p
                pe *= p
            if m > 1:
                ok = a[n] == a[pe] * a[m]
            elif pe == p:
                ok = True
            elif self.level % p == 0:
                ok = a[n] == a[p] * a[n // p]
            else:
                ok = a[n] == a[p] * a[n // p] - p * a[n // (p * p)]
            if not ok:
                bad.append(n)
        return bad

    def __repr__(self):
        head = ', '.join(str(a) for a in self._ints[:8])
        return f'QExpansion(N={self.level}, M={self.length}, [{head}, ...])'

    def to_dict(self):
        return {'level': self.level, 'length': self.length, 'coefficients': list(self._ints[:20])}


def required_terms(y: float, tol: float) -> int:
    """最小的M使 r^(M+1)/(π(1-r)) <= tol，r = e^(-2πy)"""
    if y <= 0:
        raise InvalidArgumentError(f'imaginary part {y} must be positive')
    if tol <= 0:
        raise InvalidArgumentError(f'tolerance {tol} must be positive')
    r = math.exp(-2.0 * math.pi * y)
    if r == 0.0:
        return 1
    bound = tol * math.pi * (1.0 - r)
    if bound >= 1.0:
        return 1
    return max(1, math.ceil(math.log(bound) / math.log(r)) - 1)


def required_series_terms(y: float, tol: float) -> int:
    """最小的M使 2(M+1)r^(M+1)/(1-r)^2 <= tol，用于f本身的截断

    Σ_{n>M} 2n r^n <= 2(M+1)r^(M+1)/(1-r)^2
    """
    if y <= 0:
        raise InvalidArgumentError(f'imaginary part {y} must be positive')
    if tol <= 0:
        raise InvalidArgumentError(f'tolerance {tol} must be positive')
    r = math.exp(-2.0 * math.pi * y)
    if r == 0.0:
        return 1
    log_r = math.log(r)
    target = math.log(tol) + 2.0 * math.log1p(-r)

    def log_tail(m: int) -> float:
        return math.log(2.0 * (m + 1)) + (m + 1) * log_r

    if log_tail(1) <= target:
        return 1
    # 峰值之后单调递减，先倍增再二分
    lo = max(1, math.ceil(-1.0 / log_r) - 1)
    hi = max(lo, 2)
    while log_tail(hi) > target:
        lo, hi = hi, hi * 2
    while lo < hi:
        mid = (lo + hi) // 2
        if log_tail(mid) <= target:
            hi = mid
        else:
            lo = mid + 1
    return hi


def extend_coefficients(eigenvalues: Mapping[int, int], N: int, M: int) -> QExpansion:
    """由 a_p 递推出 a_1..a_M"""
    if M < 1:
        raise InvalidArgumentError(f'length M={M} must be positive')
    spf = smallest_prime_factors(M)
    a = [0] * (M + 1)
    a[1] = 1
    for n in range(2, M + 1):
        p = int(spf[n])
        m, pe = n, 1
        while m % p == 0:
            m //= p
            pe *= p
        if m > 1:
            a[n] = a[pe] * a[m]
        elif pe == p:
            if p not in eigenvalues:
                raise InvalidArgumentError(f'missing eigenvalue a_{p}')
            a[n] = int(eigenvalues[p])
        elif N % p == 0:
            a[n] = a[p] * a[n // p]
        else:
            a[n] = a[p] * a[n // p] - p * a[n // (p * p)]
    logger.debug('extended q-expansion of level {} to {} terms', N, M)
    return QExpansion(N, a[1:], {p: a[p] for p in primerange(2, M + 1)})


def modular_integral(f: QExpansion, z1: Point, z2: Point, tol: float = _TOL_) -> complex:
    """∫_{z1}^{z2} f(z) dz"""
    z1, z2 = _to_complex(z1), _to_complex(z2)
    if z1.imag <= 0 or z2.imag <= 0:
        raise InvalidArgumentError(f'endpoints {z1}, {z2} must lie in the upper half-plane')
    if z1 == z2:
        return 0j
    return f.antiderivative(z2, tol) - f.antiderivative(z1, tol)


def quadrature_integral(f: QExpansion, z1: Point, z2: Point, tol: float = 1e-12) -> complex:
    """沿线段直接数值积分，作为独立校验"""
    z1, z2 = _to_complex(z1), _to_complex(z2)
    dz = z2 - z1
    y = min(z1.imag, z2.imag)
    m = f._terms(y, tol, required_series_terms)

    def integrand(t: float) -> complex:
        z = z1 + t * dz
        return complex(_qseries(f._coef, m, z.real, z.imag)) * dz

    re, _ = integrate.quad(lambda t: integrand(t).real, 0.0, 1.0, epsabs=tol, epsrel=tol, limit=200)
    im, _ = integrate.quad(lambda t: integrand(t).imag, 0.0, 1.0, epsabs=tol, epsrel=tol, limit=200)
    return complex(re, im)


def slash_weight2(f: Union[QExpansion, Callable[[complex], complex]], A: GroupElement) -> Callable[[complex], complex]:
    """(f|₂A)(z) = det(A)(cz+d)^(-2) f(Az)"""
    det = A.det
    if det.sign() <= 0:
        raise InvalidArgumentError(f'det({A}) must be positive')
    det_c = det.to_complex()
    _, _, c, d = A.to_complex()
    func = f.evaluate if isinstance(f, QExpansion) else f

    def sliced(z: complex) -> complex:
        z = _to_complex(z)
        return det_c * (c * z + d) ** -2 * func(A.act(z))

    return sliced


def phi_f(f: QExpansion, gamma: GroupElement, tau: Point = 1j, tol: float = _TOL_,
          slash: Optional[GroupElement] = None) -> complex:
    """φ_f^τ(γτ) = ∫_{γτ}^{τ} f

    slash=A 时积分 f|A，换元后为 ∫_{Aγτ}^{Aτ} f
    """
    tau = _to_complex(tau)
    start = gamma.act(tau)
    if slash is None:
        return modular_integral(f, start, tau, tol)
    return modular_integral(f, slash.act(start), slash.act(tau), tol)


def delta_f(f: QExpansion, a: int, p: int, n: int, tau: Point = 1j, tol: float = _TOL_) -> complex:
    """φ_f(γ_{a,p^n}τ) - φ_f(γ_{-a,p^n}τ)"""
    from quadsym.padicl import gamma_a_pn

    return phi_f(f, gamma_a_pn(a, p, n), tau, tol) - phi_f(f, gamma_a_pn(-a, p, n), tau, tol)


class FormalPeriodSum:
    """生成元周期符号的整系数形式和，可带数值影子"""

    def __init__(self, coefficients: Mapping[str, int] = None, shadow: Optional[complex] = None):
        self.coefficients: Dict[str, int] = {k: int(v) for k, v in (coefficients or {}).items() if v}
        self.shadow = shadow

    @property
    def support(self) -> List[str]:
        return sorted(self.coefficients)

    def __add__(self, other: 'FormalPeriodSum') -> 'FormalPeriodSum':
        out = dict(self.coefficients)
        for k, v in other.coefficients.items():
            out[k] = out.get(k, 0) + v
        shadow = None
        if self.shadow is not None and other.shadow is not None:
            shadow = self.shadow + other.shadow
        return FormalPeriodSum(out, shadow)

    def __neg__(self):
        return FormalPeriodSum({k: -v for k, v in self.coefficients.items()},
                               None if self.shadow is None else -self.shadow)

    def __sub__(self, other):
        return self + (-other)

    def __eq__(self, other):
        return isinstance(other, FormalPeriodSum) and self.coefficients == other.coefficients

    def evaluate(self, values: Mapping[str, complex]) -> complex:
        return sum((v * values[k] for k, v in self.coefficients.items()), 0j)

    def __repr__(self):
        return ' + '.join(f'{v}*phi({k})' for k, v in sorted(self.coefficients.items())) or '0'

    def to_dict(self):
        return {'coefficients': dict(sorted(self.coefficients.items())), 'shadow': self.shadow}


def reduce_to_generators(A: GroupElement, word: Sequence[Tuple[str, int]], generators: Mapping[str, GroupElement],
                         N: int, f: Optional[QExpansion] = None, tau: Point = 1j,
                         tol: float = _TOL_) -> FormalPeriodSum:
    """A = B·A_l，B为生成元的字，φ_f(A i) = φ_f(A_l i) + Σ ±φ_f(B_j i)

    word 为 (生成元名, ±1) 序列，陪集代表元记作 'A{l}'，恒等陪集不计
    """
    from quadsym.modsym import ProjectiveLine, lift_to_sl2

    if not A.is_integral() or A.det != 1:
        raise InvalidArgumentError(f'{A} is not in SL2(Z)')
    P1 = ProjectiveLine(N)
    _, _, c, d = A.integer_entries()
    l = P1.index(c, d)
    A_l = GroupElement(*lift_to_sl2(*P1[l], N))
    B = A * A_l.inverse()
    product = GroupElement.identity()
    coefficients: Dict[str, int] = {}
    for name, e in word:
        if name not in generators or e not in (1, -1):
            raise InvalidArgumentError(f'bad letter ({name}, {e})')
        product = product * (generators[name] ** e)
        coefficients[name] = coefficients.get(name, 0) + e
    if product != B:
        raise InvalidArgumentError('word does not multiply to A*A_l^-1')
    if not A_l.is_identity():
        coefficients[f'A{l}'] = coefficients.get(f'A{l}', 0) + 1
    out = FormalPeriodSum(coefficients)
    if f is not None:
        values = {name: phi_f(f, g, tau, tol) for name, g in generators.items() if name in out.coefficients}
        if f'A{l}' in out.coefficients:
            values[f'A{l}'] = phi_f(f, A_l, tau, tol)
        out.shadow = out.evaluate(values)
    return out


def read_coefficient_file(path: Union[str, Path]) -> Dict[int, int]:
    """每行 'p a_p'，'#' 之后为注释"""
    out = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split('#', 1)[0].strip()
        if not line:
            continue
        parts = line.replace(',', ' ').split()
        if len(parts) != 2:
            raise InvalidArgumentError(f'{path}:{lineno}: expected "p a_p", got {line!r}')
        try:
            p, ap = int(parts[0]), int(parts[1])
        except ValueError:
            raise InvalidArgumentError(f'{path}:{lineno}: non-integer entry {line!r}')
        out[p] = ap
    logger.info('read {} eigenvalues from {}', len(out), path)
    return out


def qexpansion_for_level(N: int, M: int, system: int = 0, bound: int = 13,
                         eigenvalues: Mapping[int, int] = None) -> QExpansion:
    """用模符号算 a_p (p <= M) 再递推；eigenvalues 给出的值优先"""
    from quadsym.modsym import build_space, rational_eigenforms

    known = dict(eigenvalues or {})
    missing = [p for p in primerange(2, M + 1) if p not in known]
    if missing:
        systems = rational_eigenforms(build_space(N), bound)
        if not systems:
            raise NotAvailableError(f'no rational eigenform of level {N}')
        if not 0 <= system < len(systems):
            raise InvalidArgumentError(f'system index {system} outside 0..{len(systems) - 1}')
        es = systems[system]
        for p in missing:
            known[p] = es.a_p(p)
    return extend_coefficients(known, N, M)
