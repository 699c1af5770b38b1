"""Γ₀(N)的权2经典模符号

M-符号 (c:d) ∈ P¹(ℤ/N) 对应路径 g{0,∞}，g ∈ SL₂(ℤ) 底行为 (c,d)。
关系 x + xS = 0，x + xU + xU² = 0。Hecke算子按 [[1,u],[0,p]]、[[p,0],[0,1]] 作用在路径上
"""
import math
from fractions import Fraction
from functools import lru_cache
from typing import Dict, List, NamedTuple, Optional, Sequence, Tuple

from loguru import logger
from sympy import Matrix, Poly, Rational as SymRational, Symbol, eye, factor_list, isprime, primerange, roots, zeros
from sympy.core.intfunc import igcdex
from sympy import div as _div

from quadsym import _INF_
from quadsym.arith import GroupElement
from quadsym.errors import InvalidArgumentError, InternalError, DomainError
from quadsym.utils import as_fraction

Cusp = Tuple[int, int]
INFINITY: Cusp = (1, 0)
ZERO: Cusp = (0, 1)


def gcdex(a: int, b: int) -> Tuple[int, int, int]:
    """(x, y, g)，g = gcd(a, b) >= 0 且 a*x + b*y == g"""
    if b == 0:
        if a < 0:
            return -1, 0, -a
        return 1, 0, a
    q, r = divmod(a, b)
    x, y, g = gcdex(b, r)
    return y, x - y * q, g


def lift_unit(n: int, d: int, a: int) -> int:
    """d | n，把模d的单位a提升为模n的单位"""
    u, v = 1, n
    g = math.gcd(v, d)
    while g > 1:
        u *= g
        v //= g
        g = math.gcd(v, g)
    x, y, _ = gcdex(u, v)
    return (u * x + a * y * v) % n


class ProjectiveLine:
    """P¹(ℤ/Nℤ) 的规范代表元"""

    def __init__(self, N: int):
        if N < 1:
            raise InvalidArgumentError(f'level N={N} must be positive')
        self.N = N
        reps = set()
        for u in range(N):
            for v in range(N):
                r = self.reduce(u, v)
                if r is not None:
                    reps.add(r)
        self._list: List[Tuple[int, int]] = sorted(reps)
        self._index = {r: i for i, r in enumerate(self._list)}

    def __len__(self):
        return len(self._list)

    def __getitem__(self, i: int) -> Tuple[int, int]:
        return self._list[i]

    def __iter__(self):
        return iter(self._list)

    def reduce(self, c: int, d: int) -> Optional[Tuple[int, int]]:
        """规范形，gcd(c,d,N) > 1 时返回None"""
        N = self.N
        u, v = c % N, d % N
        if u == 0:
            return (0, 1) if math.gcd(N, v) == 1 else None
        _, s, g = gcdex(N, u)
        if math.gcd(g, v) > 1:
            return None
        s = lift_unit(N, N // g, s)
        u, v = g, (s * v) % N
        if g == 1:
            return 1, v
        v = min((v * t) % N for t in range(1, N, N // g) if math.gcd(N, t) == 1)
        return g, v

    def index(self, c: int, d: int) -> int:
        r = self.reduce(c, d)
        if r is None:
            raise InvalidArgumentError(f'({c}:{d}) is not in P1(Z/{self.N}Z)')
        return self._index[r]

    @property
    def expected_size(self) -> int:
        n = self.N
        for p in primerange(2, self.N + 1):
            if self.N % p == 0:
                n = n * (p + 1) // p
        return n


def lift_to_sl2(c: int, d: int, N: int) -> Tuple[int, int, int, int]:
    """(c:d) 提升为 SL₂(ℤ) 中底行同余的矩阵 (a, b, c', d')"""
    if N == 1 or (c % N == 0 and d % N == 1):
        return 1, 0, 0, 1
    c = c % N or N
    d = d % N
    t = 0
    while math.gcd(c, d + t * N) != 1:
        t += 1
    d = d + t * N
    x, y, g = igcdex(d, c)
    return int(x), int(-y), c, d


def normalize_cusp(u: int, v: int) -> Cusp:
    if v == 0:
        if u == 0:
            raise InvalidArgumentError('0/0 is not a cusp')
        return INFINITY
    g = math.gcd(u, v)
    u, v = u // g, v // g
    if v < 0:
        u, v = -u, -v
    return u, v


def as_cusp(x) -> Cusp:
    """'inf'、整数、Fraction或(u,v)转规范尖点"""
    if x == _INF_:
        return INFINITY
    if isinstance(x, tuple):
        return normalize_cusp(*x)
    f = as_fraction(x)
    return f.numerator, f.denominator


def act_on_cusp(m: Sequence[int], cusp: Cusp) -> Cusp:
    a, b, c, d = m
    u, v = cusp
    return normalize_cusp(a * u + b * v, c * u + d * v)


class MTerm(NamedTuple):
    """sign · g{0,∞}"""
    sign: int
    matrix: Tuple[int, int, int, int]

    @property
    def symbol(self) -> Tuple[int, int]:
        return self.matrix[2], self.matrix[3]


def _convergents(u: int, v: int) -> List[Tuple[int, int]]:
    out = []
    p0, q0, p1, q1 = 0, 1, 1, 0
    while v != 0:
        a, r = divmod(u, v)
        p0, q0, p1, q1 = p1, q1, a * p1 + p0, a * q1 + q0
        out.append((p1, q1))
        u, v = v, r
    return out


def _from_zero(cusp: Cusp) -> List[MTerm]:
    """{0, cusp} 的连分数分解"""
    if cusp == INFINITY:
        return [MTerm(1, (1, 0, 0, 1))]
    chain = [(0, 1), (1, 0)] + _convergents(*cusp)
    if len(chain) > 2 and chain[2] == (0, 1):
        chain = chain[2:]
    terms = []
    for (p0, q0), (p1, q1) in zip(chain, chain[1:]):
        eps = p1 * q0 - p0 * q1
        terms.append(MTerm(1, (eps * p1, p0, eps * q1, q0)))
    return terms


def manin_trick(alpha, beta) -> List[MTerm]:
    """{α, β} = {0, β} - {0, α} 拆成M-路径之和"""
    alpha, beta = as_cusp(alpha), as_cusp(beta)
    if alpha == beta:
        return []
    return _from_zero(beta) + [MTerm(-t.sign, t.matrix) for t in _from_zero(alpha)]


def hecke_cosets(p: int, N: int) -> List[Tuple[int, int, int, int]]:
    """T_p (p∤N) 的p+1个陪集矩阵，或 U_p (p|N) 的p个"""
    if not isprime(p):
        raise InvalidArgumentError(f'p={p} is not prime')
    out = [(1, u, 0, p) for u in range(p)]
    if N % p:
        out.append((p, 0, 0, 1))
    return out


Vector = Tuple[Fraction, ...]


def _sym(x) -> SymRational:
    x = as_fraction(x)
    return SymRational(x.numerator, x.denominator)


def _columns_to_matrix(columns: Sequence[Vector], rows: int) -> Matrix:
    if not columns:
        return zeros(rows, 0)
    return Matrix([[_sym(col[i]) for col in columns] for i in range(rows)])


def _restrict(T: Matrix, W: Matrix) -> Matrix:
    """T W = W X，求X"""
    _, piv = W.T.rref()
    piv = list(piv)
    return W.extract(piv, list(range(W.cols))).inv() * (T * W).extract(piv, list(range(W.cols)))


class PathClass(NamedTuple):
    level: int
    coordinates: Tuple[Fraction, ...]

    def __add__(self, other):
        return PathClass(self.level, tuple(a + b for a, b in zip(self.coordinates, other.coordinates)))

    def __neg__(self):
        return PathClass(self.level, tuple(-a for a in self.coordinates))

    def is_zero(self) -> bool:
        return all(a == 0 for a in self.coordinates)

    def to_dict(self):
        return {'level': self.level, 'coordinates': [str(a) for a in self.coordinates]}


class ModularSymbolSpace:
    def __init__(self, N: int):
        self.level = N
        self.P1 = ProjectiveLine(N)
        if len(self.P1) != self.P1.expected_size:
            raise InternalError(f'|P1(Z/{N})| = {len(self.P1)}, expected {self.P1.expected_size}')
        n = len(self.P1)

        # 二项关系：(c:d) ~ -(d:-c)
        self._two_term: List[Optional[Tuple[int, int]]] = [None] * n
        gens: List[int] = []
        seen = [False] * n
        for i, (c, d) in enumerate(self.P1):
            if seen[i]:
                continue
            j = self.P1.index(d, -c)
            seen[i] = seen[j] = True
            if i == j:
                continue
            col = len(gens)
            gens.append(i)
            self._two_term[i] = (col, 1)
            self._two_term[j] = (col, -1)

        # 三项关系：(c:d) + (d:-c-d) + (-c-d:c) = 0
        rows, done = [], set()
        for c, d in self.P1:
            idx = (self.P1.index(c, d), self.P1.index(d, -c - d), self.P1.index(-c - d, c))
            key = tuple(sorted(idx))
            if key in done:
                continue
            done.add(key)
            row = [0] * len(gens)
            for i in idx:
                t = self._two_term[i]
                if t is not None:
                    row[t[0]] += t[1]
            if any(row):
                rows.append(row)

        ncols = len(gens)
        if rows:
            mat, piv = Matrix(rows).rref()
        else:
            mat, piv = zeros(0, ncols), ()
        self.free = tuple(k for k in range(ncols) if k not in piv)
        rel = zeros(len(self.free), ncols)
        for e, col in enumerate(piv):
            for r, j in enumerate(self.free):
                rel[r, col] = -mat[e, j]
        for r, col in enumerate(self.free):
            rel[r, col] = 1
        self._gens = gens
        self._rel = rel
        self.dim = len(self.free)
        self._symbol_vectors: Dict[int, Vector] = {}
        self._hecke_full: Dict[int, Matrix] = {}
        self._hecke_cusp: Dict[int, Matrix] = {}
        self._star: Optional[Matrix] = None
        self._build_boundary()
        logger.info('modular symbols N={}: dim {} cuspidal {} cusps {}', N, self.dim, self.cuspidal_dim, len(self._cusps))

    # ---------- 基本结构 ----------
    def symbol_vector(self, c: int, d: int) -> Vector:
        """M-符号 (c:d) 在商空间基下的坐标"""
        i = self.P1.index(c, d)
        v = self._symbol_vectors.get(i)
        if v is None:
            t = self._two_term[i]
            if t is None:
                v = tuple(Fraction(0) for _ in range(self.dim))
            else:
                col, sign = t
                v = tuple(sign * Fraction(int(self._rel[r, col].p), int(self._rel[r, col].q))
                          for r in range(self.dim))
            self._symbol_vectors[i] = v
        return v

    def basis_symbol(self, r: int) -> Tuple[int, int]:
        return self.P1[self._gens[self.free[r]]]

    def basis_path(self, r: int) -> Tuple[Cusp, Cusp]:
        """第r个基元素的路径 {g(0), g(∞)}"""
        c, d = self.basis_symbol(r)
        a, b, c, d = lift_to_sl2(c, d, self.level)
        return normalize_cusp(b, d), normalize_cusp(a, c)

    def path_vector(self, alpha, beta) -> Vector:
        acc = [Fraction(0)] * self.dim
        for t in manin_trick(alpha, beta):
            v = self.symbol_vector(*t.symbol)
            for r in range(self.dim):
                if v[r]:
                    acc[r] += t.sign * v[r]
        return tuple(acc)

    def _cusp_index(self, cusp: Cusp) -> int:
        u1, v1 = cusp
        s1 = gcdex(u1, v1)[0]
        N = self.level
        for i, (u2, v2) in enumerate(self._cusps):
            s2 = gcdex(u2, v2)[0]
            if (s1 * v2 - s2 * v1) % math.gcd(N, (v1 * v2) % N) == 0:
                return i
        self._cusps.append(cusp)
        return len(self._cusps) - 1

    def _build_boundary(self):
        self._cusps: List[Cusp] = []
        entries = {}
        for r in range(self.dim):
            start, end = self.basis_path(r)
            for cusp, sign in ((end, 1), (start, -1)):
                k = (self._cusp_index(cusp), r)
                entries[k] = entries.get(k, 0) + sign
        B = zeros(max(len(self._cusps), 1), self.dim)
        for (i, r), v in entries.items():
            B[i, r] += v
        self.boundary = B
        ns = B.nullspace()
        self.cuspidal_basis = Matrix.hstack(*ns) if ns else zeros(self.dim, 0)
        self.cuspidal_dim = self.cuspidal_basis.cols
        if self.cuspidal_dim:
            _, piv = self.cuspidal_basis.T.rref()
            self._cusp_rows = list(piv)
            self._cusp_inv = self.cuspidal_basis.extract(self._cusp_rows, list(range(self.cuspidal_dim))).inv()
        else:
            self._cusp_rows, self._cusp_inv = [], zeros(0, 0)

    @property
    def cusps(self) -> List[Cusp]:
        return list(self._cusps)

    def is_cuspidal(self, v: Vector) -> bool:
        return all(x == 0 for x in self.boundary * _columns_to_matrix([v], self.dim))

    def cuspidal_coordinates(self, v: Vector) -> Tuple[Fraction, ...]:
        if not self.is_cuspidal(v):
            raise DomainError('path class has nonzero boundary')
        if not self.cuspidal_dim:
            return ()
        sub = Matrix([_sym(v[i]) for i in self._cusp_rows])
        c = self._cusp_inv * sub
        return tuple(Fraction(int(x.p), int(x.q)) for x in c)

    # ---------- 算子 ----------
    def _apply_matrices(self, mats: Sequence[Sequence[int]], r: int) -> Vector:
        start, end = self.basis_path(r)
        acc = [Fraction(0)] * self.dim
        for m in mats:
            v = self.path_vector(act_on_cusp(m, start), act_on_cusp(m, end))
            for i in range(self.dim):
                acc[i] += v[i]
        return tuple(acc)

    def hecke_image(self, p: int, r: int) -> Vector:
        """T_p e_r"""
        return self._apply_matrices(hecke_cosets(p, self.level), r)

    def hecke_full(self, p: int) -> Matrix:
        """T_p 在整个空间上的矩阵（列为像）"""
        T = self._hecke_full.get(p)
        if T is None:
            cols = [self.hecke_image(p, r) for r in range(self.dim)]
            T = _columns_to_matrix(cols, self.dim)
            self._hecke_full[p] = T
            logger.debug('T_{} on full space of level {} computed', p, self.level)
        return T

    def star_full(self) -> Matrix:
        """{α,β} -> {-α,-β}"""
        if self._star is None:
            self._star = _columns_to_matrix([self._apply_matrices([(-1, 0, 0, 1)], r) for r in range(self.dim)],
                                            self.dim)
        return self._star

    def restrict_to_cuspidal(self, T: Matrix) -> Matrix:
        if not self.cuspidal_dim:
            return zeros(0, 0)
        return _restrict(T, self.cuspidal_basis)

    def hecke_matrix(self, p: int) -> Matrix:
        T = self._hecke_cusp.get(p)
        if T is None:
            T = self.restrict_to_cuspidal(self.hecke_full(p))
            self._hecke_cusp[p] = T
        return T

    def star_matrix(self) -> Matrix:
        return self.restrict_to_cuspidal(self.star_full())

    def to_dict(self):
        return {'level': self.level, 'dimension': self.dim, 'cuspidal_dimension': self.cuspidal_dim,
                'cusps': len(self._cusps)}


@lru_cache(maxsize=32)
def build_space(N: int) -> ModularSymbolSpace:
    return ModularSymbolSpace(int(N))


def hecke_matrix(space: ModularSymbolSpace, p: int) -> Matrix:
    return space.hecke_matrix(p)


def coset_representatives(N: int) -> List[GroupElement]:
    """Γ₀(N)\\SL₂(ℤ) 的代表元，按P¹排序，恒等元在(0:1)处"""
    return [GroupElement(*lift_to_sl2(c, d, N)) for c, d in ProjectiveLine(N)]


def _integer_matrix(g, N: int) -> Tuple[int, int, int, int]:
    if isinstance(g, GroupElement):
        if not g.is_integral():
            raise InvalidArgumentError(f'{g} is not an integer matrix')
        g = g.integer_entries()
    a, b, c, d = (int(x) for x in g)
    if a * d - b * c != 1:
        raise InvalidArgumentError(f'{(a, b, c, d)} does not have determinant 1')
    if c % N:
        raise InvalidArgumentError(f'{(a, b, c, d)} is not in Gamma0({N})')
    return a, b, c, d


def homology_class(space: ModularSymbolSpace, g, basepoint=0) -> PathClass:
    """{α, g(α)} 在尖形商中的类"""
    m = _integer_matrix(g, space.level)
    alpha = as_cusp(basepoint)
    v = space.path_vector(alpha, act_on_cusp(m, alpha))
    return PathClass(space.level, space.cuspidal_coordinates(v))


class WordTerm(NamedTuple):
    letter: GroupElement
    kind: str
    path_class: PathClass

    def to_dict(self):
        return {'letter': self.letter.tolist(), 'kind': self.kind, 'class': self.path_class}


def distinguished_class_decomposition(space: ModularSymbolSpace, g, word: Sequence[GroupElement],
                                      basepoint=0) -> List[WordTerm]:
    """g = η₁...η_l 时 {α,g(α)} = Σ{α,η_k(α)}"""
    from quadsym.fuchsian import classify_element

    g = g if isinstance(g, GroupElement) else GroupElement(*g)
    product = GroupElement.identity()
    for eta in word:
        product = product * eta
    if product != g:
        raise InvalidArgumentError('word does not multiply to g')
    terms = []
    total = PathClass(space.level, tuple(Fraction(0) for _ in range(space.cuspidal_dim)))
    for eta in word:
        c = homology_class(space, eta, basepoint)
        kind = classify_element(eta).kind
        terms.append(WordTerm(eta, kind, c))
        total = total + c
    if total != homology_class(space, g, basepoint):
        raise InternalError('class of the word does not match the class of g')
    return terms


def _primitive(vec: Sequence) -> Tuple[int, ...]:
    fr = [as_fraction(x) for x in vec]
    den = math.lcm(*(x.denominator for x in fr))
    ints = [int(x * den) for x in fr]
    g = math.gcd(*ints)
    ints = [x // g for x in ints]
    for x in ints:
        if x:
            if x < 0:
                ints = [-y for y in ints]
            break
    return tuple(ints)


class EigenSystem:
    """有理Hecke特征系

    subspace: 尖形坐标下的特征子空间基。functional(±1): 全空间上的对偶特征向量ψ^±
    """

    def __init__(self, space: ModularSymbolSpace, eigenvalues: Dict[int, int], subspace: Matrix, bound: int):
        self.space = space
        self.level = space.level
        self.eigenvalues = dict(eigenvalues)
        self.subspace = subspace
        self.bound = bound
        self._functionals: Dict[int, Tuple[int, ...]] = {}
        self._ap_cache: Dict[int, int] = dict(eigenvalues)

    def functional(self, sign: int = 1) -> Tuple[int, ...]:
        """ψ^± ：ψ∘T_q = a_q ψ，ψ∘* = ±ψ，整数本原"""
        if sign not in (1, -1):
            raise InvalidArgumentError(f'sign must be +1 or -1, got {sign}')
        psi = self._functionals.get(sign)
        if psi is not None:
            return psi
        space = self.space
        n = space.dim
        blocks = [space.star_full().T - sign * eye(n)]
        for q, a in sorted(self.eigenvalues.items()):
            if space.level % q:
                blocks.append(space.hecke_full(q).T - a * eye(n))
        ns = Matrix.vstack(*blocks).nullspace()
        if not ns:
            raise InternalError(f'no dual eigenvector of sign {sign} for {self.eigenvalues}')
        if len(ns) > 1:
            logger.warning('dual eigenspace of sign {} has dimension {}; using the first vector', sign, len(ns))
        psi = _primitive(list(ns[0]))
        self._functionals[sign] = psi
        return psi

    def a_p(self, p: int) -> int:
        """a_p = ψ(T_p e)/ψ(e)，对p|N即U_p特征值"""
        if p in self._ap_cache:
            return self._ap_cache[p]
        if not isprime(p):
            raise InvalidArgumentError(f'p={p} is not prime')
        psi = self.functional(1)
        r = next(i for i, x in enumerate(psi) if x)
        image = self.space.hecke_image(p, r)
        value = sum(Fraction(x) * y for x, y in zip(psi, image)) / psi[r]
        if value.denominator != 1:
            raise InternalError(f'non-integral eigenvalue a_{p} = {value}')
        self._ap_cache[p] = int(value)
        return int(value)

    def evaluate(self, vec: Vector, sign: int = 1) -> Fraction:
        return sum((Fraction(x) * y for x, y in zip(self.functional(sign), vec)), Fraction(0))

    def to_dict(self):
        return {'level': self.level, 'eigenvalues': {str(p): a for p, a in sorted(self.eigenvalues.items())},
                'dimension': self.subspace.cols}


def rational_eigenforms(space: ModularSymbolSpace, bound: int = 13) -> List[EigenSystem]:
    """尖形子空间中{T_p}_{p<=B, p∤N}的有理同时特征系"""
    if bound < 2:
        raise InvalidArgumentError(f'bound B={bound} must be at least 2')
    if not space.cuspidal_dim:
        return []
    x = Symbol('x')
    spaces = [(eye(space.cuspidal_dim), {})]
    for q in primerange(2, bound + 1):
        if space.level % q == 0:
            continue
        Tq = space.hecke_matrix(q)
        nxt = []
        for W, ev in spaces:
            TW = _restrict(Tq, W)
            _, factors = factor_list(TW.charpoly(x).as_expr(), x)
            for fac, _mult in factors:
                poly = Poly(fac, x)
                if poly.degree() != 1:
                    logger.info('level {}: T_{} has irrational factor {}', space.level, q, fac)
                    continue
                c1, c0 = poly.all_coeffs()
                root = -c0 / c1
                K = (TW - root * eye(TW.rows)).nullspace()
                nxt.append((W * Matrix.hstack(*K), {**ev, q: int(root)}))
        spaces = nxt
    out = []
    for W, ev in spaces:
        for p in primerange(2, bound + 1):
            if space.level % p == 0:
                U = _restrict(space.hecke_matrix(p), W)
                if U == U[0, 0] * eye(U.rows):
                    ev[p] = int(U[0, 0])
        out.append(EigenSystem(space, ev, W, bound))
    logger.info('level {}: {} rational eigensystem(s) up to {}', space.level, len(out), bound)
    return out


def eisenstein_eigenvalues(space: ModularSymbolSpace, p: int) -> List[int]:
    """T_p 在边界（Eisenstein）商上的特征值"""
    x = Symbol('x')
    full = space.hecke_full(p).charpoly(x).as_expr()
    cusp = space.hecke_matrix(p).charpoly(x).as_expr() if space.cuspidal_dim else 1
    quo, rem = _div(full, cusp, x)
    if rem != 0:
        raise InternalError(f'cuspidal charpoly does not divide the full one for T_{p}')
    out = []
    for r, mult in roots(Poly(quo, x)).items():
        out.extend([int(r)] * mult)
    return sorted(out)
