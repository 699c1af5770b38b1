"""一次性验收：各模块恒等式与独立对照"""
import random
from typing import Callable, List, NamedTuple, Sequence, Tuple

from loguru import logger
from sympy import primerange
from sympy.combinatorics import Permutation

from quadsym import _PRECISION_, _TOL_
from quadsym.arith import GroupElement, PAdicNum, hilbert_symbol, legendre_symbol
from quadsym.errors import QuadsymError
from quadsym.fuchsian import TABLE1, gamma0_generator_table, genus_and_elliptic_counts
from quadsym.modsym import build_space, homology_class, rational_eigenforms
from quadsym.padicl import (HeckeRootChoice, all_finite_characters, chi_s_eval, chi_s_series, chi_sigma,
                            cyclotomic_measure, lp_at_s, mellin_mazur, orbit_min_height, quadratic_measure,
                            sigma_twist)
from quadsym.periods import phi_f, qexpansion_for_level, required_terms
from quadsym.qsym import collision_search, fixed_point_matrices
from quadsym.quaternion import QuaternionAlgebra, admissible_levels, eichler_order, is_order, prime_pair_cases
from quadsym.shimura import (cosets_inequivalent, hecke_index, split_coset_representatives,
                             symbolic_quadratic_distribution, verify_shimura_group_data)

# Γ₀(11) 中的几个小矩阵
GAMMA0_11 = [GroupElement(1, 1, 0, 1), GroupElement(6, 1, 11, 2), GroupElement(4, 1, 11, 3),
             GroupElement(3, 1, 11, 4), GroupElement(9, 4, 11, 5)]
SL2_SAMPLE = [GroupElement(1, 0, 0, 1), GroupElement(1, 1, 0, 1), GroupElement(0, -1, 1, 0),
              GroupElement(1, 0, 1, 1), GroupElement(2, 1, 1, 1)]
EXPECTED_FLAGS = {5, 19, 37, 67}


def point_count_ap(p: int) -> int:
    """y^2 + y = x^3 - x^2 - 10x - 20 在 F_p 上逐点计数"""
    affine = sum(1 for x in range(p) for y in range(p) if (y * y + y - (x ** 3 - x * x - 10 * x - 20)) % p == 0)
    return p - affine


def random_sigma(p: int, rng: random.Random) -> Permutation:
    rest = list(range(1, p))
    rng.shuffle(rest)
    return Permutation([0] + rest)


class CheckResult(NamedTuple):
    name: str
    ok: bool
    detail: object

    def to_dict(self):
        return self._asdict()


class SuiteContext:
    """各检查共享的昂贵对象，惰性构建"""

    def __init__(self, tol: float = _TOL_, precision: int = _PRECISION_, seed: int = 0):
        self.tol = tol
        self.precision = precision
        self.seed = seed
        self._qexp = None

    @property
    def system11(self):
        return rational_eigenforms(build_space(11))[0]

    def qexp11(self, min_imag: float):
        M = required_terms(min_imag, self.tol / 2)
        if self._qexp is None or self._qexp.length < M:
            self._qexp = qexpansion_for_level(11, M)
        return self._qexp


def check_discriminants(ctx: SuiteContext):
    bad = []
    for p, q, D, case in prime_pair_cases(50):
        if p != q and p > 2 and q > 2 and q % 4 == 1:
            expected = p * q if legendre_symbol(p, q) == -1 else 1
            if D != expected:
                bad.append((p, q, D, expected))
    rng = random.Random(ctx.seed)
    for _ in range(200):
        a, b = rng.choice([-1, 1]) * rng.randint(1, 500), rng.choice([-1, 1]) * rng.randint(1, 500)
        H = QuaternionAlgebra(a, b)
        places = [v for v in list(primerange(2, 1000)) if (2 * a * b) % v == 0] + ['inf']
        prod = 1
        for v in places:
            prod *= hilbert_symbol(a, b, v)
        if prod != 1 or H.discriminant < 1:
            bad.append((a, b))
    return not bad, {'failures': bad}


def check_eichler_orders(ctx: SuiteContext):
    rows = []
    for D in (1, 6, 10, 15, 22, 26, 39):
        for N in admissible_levels(D):
            cert = is_order(eichler_order(D, N).basis)
            rows.append({'D': D, 'N': N, 'ok': cert.ok})
    return all(r['ok'] for r in rows), rows


def check_table1(ctx: SuiteContext):
    flagged = {p for p in TABLE1 if not gamma0_generator_table(p).verify().verified}
    return flagged == EXPECTED_FLAGS, {'flagged': sorted(flagged), 'expected': sorted(EXPECTED_FLAGS)}


def check_modular_symbols(ctx: SuiteContext):
    dims = {}
    for p in TABLE1:
        g, _, _ = genus_and_elliptic_counts(p)
        dims[p] = (build_space(p).cuspidal_dim, 2 * g)
    es = ctx.system11
    eig = {p: (es.a_p(p), point_count_ap(p)) for p in (2, 3, 5, 7, 13)}
    ok = all(a == b for a, b in dims.values()) and all(a == b for a, b in eig.values())
    return ok, {'dimensions': {str(p): list(v) for p, v in dims.items()},
                'eigenvalues': {str(p): list(v) for p, v in eig.items()}}


def check_homology(ctx: SuiteContext):
    space = build_space(11)
    table = gamma0_generator_table(11)
    rng = random.Random(ctx.seed)
    bad = 0
    for _ in range(100):
        word = [rng.choice(table.generators) ** rng.choice([1, -1]) for _ in range(rng.randint(1, 4))]
        g = GroupElement.identity()
        total = homology_class(space, g)
        for eta in word:
            g = g * eta
            total = total + homology_class(space, eta)
        c0, cinf = homology_class(space, g, 0), homology_class(space, g, 'inf')
        if c0 != cinf or c0 != total:
            bad += 1
    return bad == 0, {'generators': table.labels, 'words': 100, 'failures': bad}


def check_cocycle(ctx: SuiteContext):
    pairs = [(A, g) for A in SL2_SAMPLE for g in GAMMA0_11]
    ymin = min(min((A * g).act(1j).imag, A.act(1j).imag, g.act(1j).imag) for A, g in pairs)
    f = ctx.qexp11(ymin)
    worst = 0.0
    for A, g in pairs:
        lhs = phi_f(f, A * g, 1j, ctx.tol)
        rhs = phi_f(f, g, 1j, ctx.tol, slash=A) + phi_f(f, A, 1j, ctx.tol)
        worst = max(worst, abs(lhs - rhs))
    return worst < 1e-8, {'pairs': len(pairs), 'max_error': worst}


def check_cyclotomic(ctx: SuiteContext):
    es = ctx.system11
    out = {}
    for p in (3, 11):
        root = HeckeRootChoice.from_eigenvalue(es.a_p(p), p, 11, ctx.precision)
        out[str(p)] = cyclotomic_measure(es, p, root, 3).is_compatible()
    return all(out.values()), out


def check_quadratic(ctx: SuiteContext):
    es = ctx.system11
    p = 3
    f = ctx.qexp11(orbit_min_height(p, 2))
    root = HeckeRootChoice.from_eigenvalue(es.a_p(p), p, 11, ctx.precision)
    mu = quadratic_measure(f, p, root, 2, 1j, ctx.tol)
    compat = mu.is_compatible()
    return compat and mu.value_on_pZp() == 0, {'compatible': compat}


def check_sigma_twist(ctx: SuiteContext):
    es = ctx.system11
    p = 3
    root = HeckeRootChoice.from_eigenvalue(es.a_p(p), p, 11, ctx.precision)
    mu = cyclotomic_measure(es, p, root, 2)
    rng = random.Random(ctx.seed)
    bad = []
    for _ in range(10):
        sigma = random_sigma(p, rng)
        twisted = sigma_twist(mu, sigma)
        if twisted.total(2) != mu.total(2):
            bad.append({'sigma': sigma.array_form, 'identity': 'trivial character'})
        for chi in all_finite_characters(p, ctx.precision):
            for n in (1, 2):
                lhs = mellin_mazur(twisted, chi, n)
                rhs = mellin_mazur(mu, chi * chi_sigma(chi, sigma, n), n)
                if lhs != rhs:
                    bad.append({'sigma': sigma.array_form, 'k': chi.k, 'n': n})
    return not bad, {'failures': bad}


def check_chi_s(ctx: SuiteContext):
    rng = random.Random(ctx.seed)
    bad = []
    for _ in range(20):
        p = rng.choice([3, 5])
        x = rng.choice([a for a in range(1, 60) if a % p])
        s = PAdicNum.from_rational(p * rng.randint(-20, 20), p, ctx.precision)
        series, terms = chi_s_series(x, s, ctx.precision)
        direct = chi_s_eval(x, s, ctx.precision)
        held = all(t['valuation'] is None or t['valuation'] >= t['bound'] for t in terms)
        diff = series - direct
        if not held or not (diff.is_zero() or diff.valuation >= min(10, ctx.precision - 1)):
            bad.append({'p': p, 'x': x, 's': str(s)})
    es = ctx.system11
    root = HeckeRootChoice.from_eigenvalue(es.a_p(3), 3, 11, ctx.precision)
    report = lp_at_s(cyclotomic_measure(es, 3, root, 3), 3, ctx.precision)
    return not bad and report.agree, {'failures': bad, 'lp_agree': report.agree}


def check_shimura(ctx: SuiteContext):
    problems = []
    for D in (6, 10, 15):
        for p in primerange(2, 8):
            expected = 1 if D % p == 0 else p + 1
            if hecke_index(D, 1, p) != expected:
                problems.append(('index', D, p))
    # p | N 时指数为 p
    for D, N, p in ((6, 5, 5), (15, 7, 7), (1, 11, 11)):
        if hecke_index(D, N, p) != p:
            problems.append(('index', D, N, p))
    for p in (3, 5, 7):
        for case in ('unramified', 'level'):
            reps = split_coset_representatives(p, case)
            index = hecke_index(1, p if case == 'level' else 1, p)
            if len(reps) != index or not cosets_inequivalent(reps, p, case):
                problems.append(('cosets', p, case))
    if not verify_shimura_group_data(15).ok:
        problems.append(('X(15,1)',))
    rng = random.Random(ctx.seed)
    for p in (3, 5):
        for n in (1, 2):
            for _ in range(5):
                if not symbolic_quadratic_distribution(p, random_sigma(p, rng), n).ok:
                    problems.append(('distribution', p, n))
    return not problems, {'failures': problems}


def check_collisions(ctx: SuiteContext):
    none_13 = collision_search(1, 3, 11) is None
    w = collision_search(2, 3, 1, n_max=1)
    found = w is not None and w.determinant == 3 ** w.exponent and w.first.point() == w.second.point()
    etas = fixed_point_matrices(1, 5)
    certificate = bool(etas) and etas[0] == GroupElement(2, -1, 1, 2)
    return none_13 and found and certificate, {
        '(1,3,11)': none_13, '(2,3,1)': None if w is None else w.matrix.tolist(),
        '(1,5) fixed point': etas[0].tolist() if etas else None}


CHECKS: List[Tuple[str, Callable[[SuiteContext], Tuple[bool, object]]]] = [
    ('discriminant', check_discriminants),
    ('eichler-orders', check_eichler_orders),
    ('table1', check_table1),
    ('modular-symbols', check_modular_symbols),
    ('homology', check_homology),
    ('cocycle', check_cocycle),
    ('cyclotomic-measure', check_cyclotomic),
    ('quadratic-measure', check_quadratic),
    ('sigma-twist', check_sigma_twist),
    ('chi-s', check_chi_s),
    ('shimura', check_shimura),
    ('collisions', check_collisions),
]


class SuiteReport(NamedTuple):
    results: List[CheckResult]

    @property
    def ok(self) -> bool:
        return all(r.ok for r in self.results)

    def to_dict(self):
        return {'ok': self.ok, 'results': self.results}


def run_suite(names: Sequence[str] = None, tol: float = _TOL_, precision: int = _PRECISION_,
              seed: int = 0) -> SuiteReport:
    ctx = SuiteContext(tol, precision, seed)
    known = dict(CHECKS)
    names = [n for n, _ in CHECKS] if names is None else list(names)
    results = []
    for name in names:
        if name not in known:
            results.append(CheckResult(name, False, 'unknown check'))
            continue
        logger.info('running check {}', name)
        try:
            ok, detail = known[name](ctx)
        except QuadsymError as e:
            ok, detail = False, f'{type(e).__name__}: {e}'
        results.append(CheckResult(name, bool(ok), detail))
        log = logger.info if ok else logger.warning
        log('check {}: {}', name, 'pass' if ok else 'FAIL')
    return SuiteReport(results)
