from quadsym import suite
from quadsym.suite import CHECKS, point_count_ap, run_suite


def test_point_count_matches_oracle(oracle11):
    for p in (2, 3, 5, 7, 13, 17):
        assert point_count_ap(p) == oracle11[p]


def test_fast_checks_pass():
    report = run_suite(['table1', 'collisions', 'eichler-orders', 'shimura'])
    assert [r.name for r in report.results] == ['table1', 'collisions', 'eichler-orders', 'shimura']
    assert report.ok, [r for r in report.results if not r.ok]


def test_unknown_check_fails():
    report = run_suite(['discriminant', 'bogus'])
    assert report.results[0].ok
    assert not report.results[1].ok
    assert not report.ok


def test_check_names_unique():
    names = [n for n, _ in CHECKS]
    assert len(names) == len(set(names))


def test_homology_check_walks_table_generators():
    result = run_suite(['homology']).results[0]
    assert result.ok, result.detail
    assert result.detail['generators'] == ['T', 'V4', 'V6']


def test_shimura_check_covers_level_primes(monkeypatch):
    # p | N 时误给 p + 1 的指数
    monkeypatch.setattr(suite, 'hecke_index', lambda D, N, p: 1 if D % p == 0 else p + 1)
    result = run_suite(['shimura']).results[0]
    assert not result.ok
    assert ('index', 6, 5, 5) in result.detail['failures']
    assert ('index', 1, 11, 11) in result.detail['failures']
