"""命令行入口

    quadsym [--format json|csv|plain] [--log-level LEVEL] [--tol X] [--precision K] [--max-terms M]
            [--coefficients FILE] <command> ...

退出码：0 成功；2 参数错误；3 校验失败；1 内部错误
"""
import argparse
import json
import math
import os
import sys
from typing import Any, Dict, List, NamedTuple, Optional, Sequence

from loguru import logger

from quadsym import _MAX_TERMS_ENV_, _PRECISION_, _TOL_, __version__
from quadsym.errors import InternalError, InvalidArgumentError, QuadsymError, VerificationError
from quadsym.utils import as_fraction, parse_sigma, rows_to_frame, to_jsonable


class Outcome(NamedTuple):
    """payload 为报告；rows 非空时可输出CSV；ok=False 对应退出码3"""
    payload: Any
    rows: Optional[List[Dict]] = None
    ok: bool = True


# ---------------- algebra ----------------
def cmd_algebra(args) -> Outcome:
    from quadsym.quaternion import QuaternionAlgebra, classify, eichler_order, structure_case

    if args.action == 'classify':
        H = QuaternionAlgebra(args.x, args.y)
        c = classify(H)
        return Outcome({'a': args.x, 'b': args.y, 'discriminant': c.discriminant, 'class': c.kind,
                        'small_ramified': c.small_ramified, 'places': c.places,
                        'structure_case': structure_case(c.discriminant)})
    order = eichler_order(args.x, args.y)
    cert = order.certificate()
    payload = order.to_dict()
    payload['algebra_discriminant'] = order.algebra.discriminant
    payload['certificate'] = cert
    return Outcome(payload, ok=cert.ok)


# ---------------- fuchsian ----------------
def _table_row(p: int) -> Dict:
    from quadsym.fuchsian import gamma0_generator_table

    r = gamma0_generator_table(p).verify()
    return {'p': r.p, 'generators': r.generators, 'genus': r.printed_genus, 'computed_genus': r.computed_genus,
            'nu2': r.nu2, 'nu3': r.nu3, 'count': r.count, 'expected_count': r.expected_count,
            'verified': r.verified, 'discrepancies': r.discrepancies}


def cmd_table1(args) -> Outcome:
    from quadsym.fuchsian import TABLE1

    primes = sorted(TABLE1) if args.p is None else [args.p]
    rows = [_table_row(p) for p in primes]
    # 已知的表格差异只报告，不算失败
    return Outcome(rows[0] if args.p is not None else rows, rows)


def cmd_genus(args) -> Outcome:
    from quadsym.fuchsian import gamma0_invariants

    inv = gamma0_invariants(args.p)
    return Outcome(inv, [inv.to_dict()])


# ---------------- modsym ----------------
def _matrix_rows(M) -> List[List[str]]:
    return [[str(M[i, j]) for j in range(M.cols)] for i in range(M.rows)]


def cmd_modsym(args) -> Outcome:
    from sympy import primerange

    from quadsym.modsym import build_space, eisenstein_eigenvalues, rational_eigenforms

    space = build_space(args.N)
    hecke = {}
    rows = []
    for p in primerange(2, args.hecke + 1):
        T = space.hecke_matrix(p)
        hecke[str(p)] = _matrix_rows(T)
        rows.append({'p': p, 'trace': str(T.trace()) if T.rows else '0',
                     'eisenstein': eisenstein_eigenvalues(space, p)})
    systems = rational_eigenforms(space, max(args.hecke, 2))
    payload = {'space': space, 'hecke': hecke, 'eigensystems': systems}
    return Outcome(payload, rows)


# ---------------- measures ----------------
def _eigensystem(N: int, index: int):
    from quadsym.modsym import build_space, rational_eigenforms

    systems = rational_eigenforms(build_space(N))
    if not systems:
        raise InvalidArgumentError(f'level N={N} has no rational eigenform')
    if not 0 <= index < len(systems):
        raise InvalidArgumentError(f'--system {index} outside 0..{len(systems) - 1}')
    return systems[index]


def _eigenvalue(args, p: int) -> int:
    if args.coefficient_table and p in args.coefficient_table:
        return args.coefficient_table[p]
    return _eigensystem(args.N, args.system).a_p(p)


def _tau(D: int) -> complex:
    if D < 1:
        raise InvalidArgumentError(f'--tau {D} must be a positive integer')
    return complex(0.0, math.sqrt(D))


def _qexpansion(args, height: float):
    from quadsym.periods import qexpansion_for_level, required_terms

    M = required_terms(height, args.tol / 2)
    return qexpansion_for_level(args.N, M, args.system, eigenvalues=args.coefficient_table)


def _build_measure(args, n: int):
    from quadsym.padicl import (HeckeRootChoice, cyclotomic_measure, orbit_min_height, quadratic_measure,
                                sigma_twist)

    p = args.p
    root = HeckeRootChoice.from_eigenvalue(_eigenvalue(args, p), p, args.N, args.precision)
    if args.kind == 'cyclotomic':
        mu = cyclotomic_measure(_eigensystem(args.N, args.system), p, root, n)
    else:
        tau = _tau(args.tau)
        f = _qexpansion(args, orbit_min_height(p, n, tau))
        mu = quadratic_measure(f, p, root, n, tau, args.tol)
    if args.sigma:
        mu = sigma_twist(mu, parse_sigma(args.sigma, p))
    return mu, root


def cmd_measure(args) -> Outcome:
    mu, root = _build_measure(args, args.n)
    compat = {str(lv): [{'a': a, 'ok': ok} for a, ok in mu.compatibility(lv)] for lv in mu.levels[:-1]}
    ok = all(x['ok'] for v in compat.values() for x in v)
    rows = [r for lv in mu.levels for r in mu.to_frame(lv).to_dicts()]
    payload = {'N': args.N, 'root': root, 'measure': mu, 'compatibility': compat, 'compatible': ok,
               'total': mu.total(), 'valuation_floor': mu.valuation_floor(mu.max_level)}
    return Outcome(payload, rows, ok)


def cmd_lp(args) -> Outcome:
    from quadsym.padicl import lp_at_s

    s = as_fraction(args.s)
    level = args.level if args.level is not None else (3 if args.kind == 'cyclotomic' else 1)
    mu, root = _build_measure(args, level)
    report = lp_at_s(mu, s, args.precision)
    return Outcome({'N': args.N, 'p': args.p, 'kind': args.kind, 'root': root, 'report': report},
                   report.terms or None, report.agree)


# ---------------- quadratic symbols ----------------
def cmd_quadsym(args) -> Outcome:
    from quadsym.modsym import build_space, rational_eigenforms
    from quadsym.qsym import ClassicalSymbol, admissible_prime, collision_search, injection_matrix, word_pairs

    admissible = admissible_prime(args.D, args.p)
    witness = collision_search(args.D, args.p, args.N, args.n_max)
    payload = {'D': args.D, 'p': args.p, 'N': args.N, 'admissible': admissible, 'collision': witness}
    if admissible:
        symbols = [ClassicalSymbol.from_eigensystem(es, sign)
                   for es in rational_eigenforms(build_space(args.N)) for sign in (1, -1)]
        pairs = word_pairs(args.D, args.p, args.n_max, args.N)
        rank = injection_matrix(symbols, pairs).rank() if symbols else 0
        payload.update({'symbols': [F.name for F in symbols], 'rank': rank, 'injective': rank == len(symbols)})
    # 可容许素数处出现碰撞说明构造有误
    return Outcome(payload, ok=not (admissible and witness is not None))


# ---------------- shimura ----------------
def cmd_shimura(args) -> Outcome:
    from quadsym.shimura import hecke_index, symbolic_quadratic_distribution, verify_shimura_group_data

    if args.action == 'index':
        index = hecke_index(args.D, args.N, args.p)
        return Outcome({'D': args.D, 'N': args.N, 'p': args.p, 'index': index})
    if args.action == 'verify':
        report = verify_shimura_group_data(args.D)
        return Outcome(report, report.checks, report.ok)
    sigma = parse_sigma(args.sigma, args.p) if args.sigma else None
    check = symbolic_quadratic_distribution(args.p, sigma, args.n)
    rows = [{k: v for k, v in r.items() if k != 'residual'} for r in check.residues]
    return Outcome(check, rows, check.ok)


# ---------------- acceptance ----------------
def cmd_check(args) -> Outcome:
    from quadsym.suite import run_suite

    report = run_suite(args.only or None, args.tol, args.precision, args.seed)
    rows = [{'name': r.name, 'ok': r.ok} for r in report.results]
    return Outcome(report, rows, report.ok)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog='quadsym', description='quadratic modular symbols and p-adic L-functions')
    parser.add_argument('--version', action='version', version=f'%(prog)s {__version__}')
    parser.add_argument('--format', choices=('json', 'csv', 'plain'), default='json')
    parser.add_argument('--log-level', default='WARNING')
    parser.add_argument('--tol', type=float, default=_TOL_)
    parser.add_argument('--precision', type=int, default=_PRECISION_)
    parser.add_argument('--max-terms', type=int, default=None)
    parser.add_argument('--coefficients', default=None, help='file of "p a_p" lines')
    sub = parser.add_subparsers(dest='command', required=True)

    algebra = sub.add_parser('algebra')
    algebra.add_argument('action', choices=('classify', 'order'))
    algebra.add_argument('x', type=int, help='a (classify) or D (order)')
    algebra.add_argument('y', type=int, help='b (classify) or N (order)')
    algebra.set_defaults(func=cmd_algebra)

    table1 = sub.add_parser('table1')
    table1.add_argument('p', type=int, nargs='?')
    table1.set_defaults(func=cmd_table1)

    genus = sub.add_parser('genus')
    genus.add_argument('p', type=int)
    genus.set_defaults(func=cmd_genus)

    modsym = sub.add_parser('modsym')
    modsym.add_argument('N', type=int)
    modsym.add_argument('--hecke', type=int, default=13, help='largest prime p for T_p')
    modsym.set_defaults(func=cmd_modsym)

    measure = sub.add_parser('measure')
    measure.add_argument('kind', choices=('cyclotomic', 'quadratic'))
    measure.add_argument('N', type=int)
    measure.add_argument('p', type=int)
    measure.add_argument('n', type=int)
    measure.add_argument('--sigma', default=None, help='cycle notation, e.g. "(1 2)"')
    measure.add_argument('--tau', type=int, default=1, help='D with tau = sqrt(-D)')
    measure.add_argument('--system', type=int, default=0)
    measure.set_defaults(func=cmd_measure)

    lp = sub.add_parser('lp')
    lp.add_argument('N', type=int)
    lp.add_argument('p', type=int)
    lp.add_argument('--s', default='0', help='NUM/DEN')
    lp.add_argument('--kind', choices=('cyclotomic', 'quadratic'), default='cyclotomic')
    lp.add_argument('--level', type=int, default=None)
    lp.add_argument('--sigma', default=None)
    lp.add_argument('--tau', type=int, default=1)
    lp.add_argument('--system', type=int, default=0)
    lp.set_defaults(func=cmd_lp)

    quadsym = sub.add_parser('quadsym')
    quadsym.add_argument('action', choices=('check',))
    quadsym.add_argument('D', type=int)
    quadsym.add_argument('p', type=int)
    quadsym.add_argument('N', type=int)
    quadsym.add_argument('--n-max', type=int, default=2)
    quadsym.set_defaults(func=cmd_quadsym)

    shimura = sub.add_parser('shimura')
    shimura_sub = shimura.add_subparsers(dest='action', required=True)
    index = shimura_sub.add_parser('index')
    index.add_argument('D', type=int)
    index.add_argument('N', type=int)
    index.add_argument('p', type=int)
    verify = shimura_sub.add_parser('verify')
    verify.add_argument('D', type=int)
    dist = shimura_sub.add_parser('distcheck')
    dist.add_argument('p', type=int)
    dist.add_argument('n', type=int)
    dist.add_argument('--sigma', default=None)
    shimura.set_defaults(func=cmd_shimura)

    check = sub.add_parser('check')
    check.add_argument('target', choices=('all',))
    check.add_argument('--only', nargs='*', default=None)
    check.add_argument('--seed', type=int, default=0)
    check.set_defaults(func=cmd_check)
    return parser


def _configure(args):
    logger.remove()
    logger.add(sys.stderr, level=args.log_level.upper())
    if args.max_terms is not None:
        if args.max_terms <= 0:
            raise InvalidArgumentError(f'--max-terms must be positive, got {args.max_terms}')
        os.environ[_MAX_TERMS_ENV_] = str(args.max_terms)
    if args.tol <= 0:
        raise InvalidArgumentError(f'--tol must be positive, got {args.tol}')
    if args.precision < 1:
        raise InvalidArgumentError(f'--precision must be positive, got {args.precision}')
    args.coefficient_table = None
    if args.coefficients:
        from quadsym.periods import read_coefficient_file

        args.coefficient_table = read_coefficient_file(args.coefficients)


def render(outcome: Outcome, fmt: str) -> str:
    if fmt == 'csv':
        if not outcome.rows:
            raise InvalidArgumentError('csv output is only available for tabular reports')
        return rows_to_frame(outcome.rows).write_csv()
    data = to_jsonable(outcome.payload)
    if fmt == 'json':
        return json.dumps(data, sort_keys=True, indent=2, ensure_ascii=False) + '\n'
    items = data if isinstance(data, list) else [data]
    lines = []
    for item in items:
        if isinstance(item, dict):
            lines.extend(f'{k}: {json.dumps(item[k], sort_keys=True, ensure_ascii=False)}' for k in sorted(item))
        else:
            lines.append(str(item))
        lines.append('')
    return '\n'.join(lines)


def run(argv: Sequence[str] = None, stdout=None) -> int:
    """执行一条命令，返回退出码"""
    stdout = stdout or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        _configure(args)
        outcome = args.func(args)
        stdout.write(render(outcome, args.format))
    except QuadsymError as e:
        logger.error('{}: {}', type(e).__name__, e)
        print(f'error: {e}', file=sys.stderr)
        return e.exit_code
    except Exception as e:
        logger.exception('unexpected failure')
        print(f'internal error: {e}', file=sys.stderr)
        return InternalError.exit_code
    if not outcome.ok:
        logger.warning('verification failed for {}', args.command)
        return VerificationError.exit_code
    return 0


def main():
    sys.exit(run())


if __name__ == '__main__':
    main()
