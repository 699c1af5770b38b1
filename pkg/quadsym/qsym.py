"""二次模符号：τ = √-D 在Hecke轨道上的点集与经典模符号的单射"""
import math
from fractions import Fraction
from typing import List, NamedTuple, Optional, Sequence, Tuple

from loguru import logger
from sympy import Matrix, Rational as SymRational, isprime

from quadsym import _INF_
from quadsym.arith import GroupElement, is_squarefree, legendre_symbol
from quadsym.errors import InvalidArgumentError, NotApplicableError
from quadsym.fuchsian import S_MATRIX, UpperHalfPoint, mobius_apply


def coset_matrix(i: int, p: int) -> GroupElement:
    """i < p 时 [[1,i],[0,p]]，i = p 时 [[p,0],[0,1]]"""
    if not 0 <= i <= p:
        raise InvalidArgumentError(f'coset index {i} outside 0..{p}')
    if i == p:
        return GroupElement(p, 0, 0, 1)
    return GroupElement(1, i, 0, p)


def tau_point(D: int) -> UpperHalfPoint:
    """τ = √-D"""
    if D < 1 or not is_squarefree(D):
        raise InvalidArgumentError(f'D={D} must be a positive squarefree integer')
    return UpperHalfPoint.exact(0, 1, -D)


class DeltaWord(NamedTuple):
    """prefix · γ_{i_1}···γ_{i_n} · tail · τ"""
    D: int
    p: int
    word: Tuple[int, ...]
    tail: GroupElement = GroupElement.identity()
    prefix: GroupElement = GroupElement.identity()

    def matrix(self) -> GroupElement:
        g = self.prefix
        for i in self.word:
            g = g * coset_matrix(i, self.p)
        return g * self.tail

    def point(self) -> UpperHalfPoint:
        return mobius_apply(self.matrix(), tau_point(self.D))

    def cusp(self) -> UpperHalfPoint:
        """把末端τ换成i∞后的尖点"""
        return mobius_apply(self.matrix(), UpperHalfPoint.cusp(_INF_))

    def translate(self, gamma: GroupElement) -> 'DeltaWord':
        return self._replace(prefix=gamma * self.prefix)

    def to_dict(self):
        return {'D': self.D, 'p': self.p, 'word': list(self.word), 'tail': self.tail.tolist(),
                'prefix': self.prefix.tolist()}


def admissible_prime(D: int, p: int) -> bool:
    """(-D/p) = -1"""
    if D < 1 or not is_squarefree(D):
        raise InvalidArgumentError(f'D={D} must be a positive squarefree integer')
    if not isprime(p):
        raise InvalidArgumentError(f'p={p} is not prime')
    if p == 2 or D % p == 0:
        raise NotApplicableError(f'p={p} must be odd and prime to D={D}')
    return legendre_symbol(-D, p) == -1


class ClassicalSymbol:
    """Γ₀(N)不变的经典模符号 F(P,Q)，由模符号空间上的线性泛函给出"""

    def __init__(self, space, weights: Sequence, name: str = 'F'):
        if len(weights) != space.dim:
            raise InvalidArgumentError(f'{len(weights)} weights for a space of dimension {space.dim}')
        self.space = space
        self.weights = tuple(Fraction(w) for w in weights)
        self.name = name

    @classmethod
    def from_eigensystem(cls, system, sign: int = 1) -> 'ClassicalSymbol':
        return cls(system.space, system.functional(sign), f'psi{"+" if sign > 0 else "-"}')

    @staticmethod
    def _cusp(x):
        if isinstance(x, UpperHalfPoint):
            if x.kind != 'cusp':
                raise InvalidArgumentError(f'{x} is not a cusp')
            return x.value
        return x

    def __call__(self, P, Q) -> Fraction:
        v = self.space.path_vector(self._cusp(P), self._cusp(Q))
        return sum((w * x for w, x in zip(self.weights, v)), Fraction(0))


def inject_classical(F: ClassicalSymbol, P: DeltaWord, Q: DeltaWord) -> Fraction:
    """I(F)(P, Q) = F(P在i∞处的像, Q在i∞处的像)"""
    if P.D != Q.D or P.p != Q.p:
        raise InvalidArgumentError('both words must share D and p')
    if not admissible_prime(P.D, P.p):
        raise InvalidArgumentError(f'(-{P.D}/{P.p}) != -1: the injection is not well defined')
    return F(P.cusp(), Q.cusp())


def injection_matrix(symbols: Sequence[ClassicalSymbol], pairs: Sequence[Tuple[DeltaWord, DeltaWord]]) -> Matrix:
    """行为符号、列为词对的取值矩阵；满秩即单射"""
    rows = []
    for F in symbols:
        row = []
        for P, Q in pairs:
            v = inject_classical(F, P, Q)
            row.append(SymRational(v.numerator, v.denominator))
        rows.append(row)
    return Matrix(rows)


def coset_indices(p: int, N: int = 1) -> range:
    """Γ₀(N)的Hecke陪集下标：0..p-1，p ∤ N 时再加 p（[[p,0],[0,1]]）"""
    if N < 1:
        raise InvalidArgumentError(f'level N={N} must be positive')
    return range(p + 1) if N % p else range(p)


def word_pairs(D: int, p: int, n_max: int, N: int = 1) -> List[Tuple[DeltaWord, DeltaWord]]:
    """空词（尖点像i∞）与长度 <= n_max、尾部为S的词（尖点像 γ_w(0)）配对"""
    base = DeltaWord(D, p, ())
    words = [()]
    out = [(base, DeltaWord(D, p, (), S_MATRIX))]
    for _ in range(n_max):
        words = [w + (i,) for w in words for i in coset_indices(p, N)]
        out.extend((base, DeltaWord(D, p, w, S_MATRIX)) for w in words)
    return out


class CollisionWitness(NamedTuple):
    """first.point() == second.point() 而 first.cusp() != second.cusp()

    matrix 为 (second的矩阵)^(-1)·(first的矩阵) 约成本原整矩阵，固定τ，det = p^exponent
    """
    first: DeltaWord
    second: DeltaWord
    matrix: GroupElement
    determinant: int
    exponent: int
    fixed_point: UpperHalfPoint
    cusp_images: Tuple[object, object]

    def to_dict(self):
        return {'first': self.first.to_dict(), 'second': self.second.to_dict(), 'matrix': self.matrix.tolist(),
                'determinant': self.determinant, 'exponent': self.exponent, 'fixed_point': self.fixed_point,
                'cusp_images': [str(c) for c in self.cusp_images]}


IntMatrix = Tuple[int, int, int, int]


def _mul(g: IntMatrix, h: IntMatrix) -> IntMatrix:
    a, b, c, d = g
    e, f, u, v = h
    return a * e + b * u, a * f + b * v, c * e + d * u, c * f + d * v


def gamma0_elements(N: int, entry_bound: int) -> List[IntMatrix]:
    """Γ₀(N)中各元绝对值 <= entry_bound 的全部元素"""
    if N < 1:
        raise InvalidArgumentError(f'level N={N} must be positive')
    if entry_bound < 1:
        raise InvalidArgumentError(f'entry bound {entry_bound} must be positive')
    B = entry_bound
    out = [(s, b, 0, s) for s in (1, -1) for b in range(-B, B + 1)]
    for c in range(N, B + 1, N):
        for c_ in (c, -c):
            for a in range(-B, B + 1):
                for d in range(-B, B + 1):
                    b, r = divmod(a * d - 1, c_)
                    if r == 0 and -B <= b <= B:
                        out.append((a, b, c_, d))
    return out


def _point_key(g: IntMatrix, D: int) -> Tuple[Fraction, Fraction]:
    """g·√-D = (bd + aDc + (ad-bc)√-D)/(d^2 + Dc^2)"""
    a, b, c, d = g
    den = d * d + D * c * c
    return Fraction(b * d + a * D * c, den), Fraction(a * d - b * c, den)


def _cusp_key(g: IntMatrix):
    a, _, c, _ = g
    return _INF_ if c == 0 else Fraction(a, c)


def _primitive_stabilizer(A: IntMatrix, B: IntMatrix) -> IntMatrix:
    """adj(A)·B 约去公因子，左下元取正"""
    a, b, c, d = A
    g = _mul((d, -b, -c, a), B)
    k = math.gcd(*g)
    g = tuple(x // k for x in g)
    return tuple(-x for x in g) if g[2] < 0 else g


def collision_search(D: int, p: int, N: int, n_max: int = 2, entry_bound: int = 20) -> Optional[CollisionWitness]:
    """寻找 γ_{w₁}γ₁τ = γ_{w₂}γ₂τ 而尖点像 γ_{w₁}γ₁(i∞) != γ_{w₂}γ₂(i∞) 的情形

    词 w 取 Γ₀(N) 的陪集矩阵、长度 <= n_max；尾部 γ 取 Γ₀(N) 中各元 <= entry_bound 的元素。
    点与尖点都做精确比较，同一点同一尖点的数据不算碰撞
    """
    if not isprime(p):
        raise InvalidArgumentError(f'p={p} is not prime')
    if N < 1:
        raise InvalidArgumentError(f'level N={N} must be positive')
    if n_max < 0:
        raise InvalidArgumentError(f'word length bound {n_max} must be non-negative')
    tau = tau_point(D)
    tails = gamma0_elements(N, entry_bound)
    words: List[Tuple[Tuple[int, ...], IntMatrix]] = [((), (1, 0, 0, 1))]
    layer = list(words)
    for _ in range(n_max):
        layer = [(w + (i,), _mul(m, coset_matrix(i, p).integer_entries()))
                 for w, m in layer for i in coset_indices(p, N)]
        words.extend(layer)
    seen = {}
    for w, m in words:
        for t in tails:
            g = _mul(m, t)
            key = _point_key(g, D)
            cusp = _cusp_key(g)
            hit = seen.get(key)
            if hit is None:
                seen[key] = (w, t, g, cusp)
                continue
            w0, t0, g0, cusp0 = hit
            if cusp0 == cusp:
                continue
            eta = _primitive_stabilizer(g0, g)
            det = eta[0] * eta[3] - eta[1] * eta[2]
            first = DeltaWord(D, p, w0, GroupElement(*t0))
            second = DeltaWord(D, p, w, GroupElement(*t))
            logger.info('collision for D={} p={} N={}: {} vs {}, stabilizer {}', D, p, N, w0, w, eta)
            return CollisionWitness(first, second, GroupElement(*eta), det, _p_exponent(det, p), tau,
                                    (cusp0, cusp))
    logger.debug('no collision for D={} p={} N={} over {} words and {} tails', D, p, N, len(words), len(tails))
    return None


def fixed_point_matrices(D: int, p: int, k_max: int = 4, entry_bound: int = 20) -> List[GroupElement]:
    """固定τ、移动i∞的本原整矩阵 η = [[a, -Dc], [c, a]]，det = a^2 + Dc^2 = p^k (1 <= k <= k_max)

    η 的各元均被p整除时只是标量倍，不计入
    """
    if not isprime(p):
        raise InvalidArgumentError(f'p={p} is not prime')
    tau = tau_point(D)
    inf = UpperHalfPoint.cusp(_INF_)
    out = []
    for k in range(1, k_max + 1):
        det = p ** k
        c = 1
        while D * c * c <= det and c <= entry_bound:
            a = _isqrt_exact(det - D * c * c)
            if a is not None and a <= entry_bound:
                for a_ in sorted({a, -a}, reverse=True):
                    if all(x % p == 0 for x in (a_, D * c, c)):
                        continue
                    eta = GroupElement(a_, -D * c, c, a_)
                    if mobius_apply(eta, tau) == tau and mobius_apply(eta, inf) != inf:
                        out.append(eta)
            c += 1
    return out


def _p_exponent(n: int, p: int) -> int:
    k = 0
    while n % p == 0 and n > 1:
        n //= p
        k += 1
    return k


def _isqrt_exact(n: int) -> Optional[int]:
    if n < 0:
        return None
    r = math.isqrt(n)
    return r if r * r == n else None
