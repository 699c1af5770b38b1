import io
import json

import pytest

from quadsym import __version__
from quadsym.cli import run


def invoke(*argv):
    out = io.StringIO()
    code = run(list(argv), stdout=out)
    return code, out.getvalue()


def test_table1_row():
    code, out = invoke('table1', '11')
    assert code == 0
    row = json.loads(out)
    assert row['p'] == 11
    assert row['generators'] == ['T', 'V4', 'V6']
    assert row['genus'] == 1
    assert row['verified'] is True


def test_table1_flagged_row_still_succeeds():
    code, out = invoke('table1', '37')
    assert code == 0
    row = json.loads(out)
    assert row['verified'] is False
    assert row['computed_genus'] == 2


def test_algebra_classify():
    code, out = invoke('algebra', 'classify', '1', '-1')
    assert code == 0
    data = json.loads(out)
    assert data['discriminant'] == 1
    assert data['class'] == 'non-ramified'


@pytest.mark.parametrize('argv', [('algebra', 'order', '6', '2'), ('table1', '4'), ('frobnicate',),
                                  ('--tol', '0', 'genus', '11'), ('--format', 'csv', 'algebra', 'classify', '1', '-1'),
                                  ('shimura', 'index', '6', '2', '2')])
def test_argument_errors(argv):
    assert invoke(*argv)[0] == 2


def test_genus_csv():
    code, out = invoke('--format', 'csv', 'genus', '11')
    assert code == 0
    header, values = out.strip().splitlines()
    assert dict(zip(header.split(','), values.split(','))) == {'index': '12', 'nu2': '0', 'nu3': '0',
                                                               'cusps': '2', 'genus': '1'}


def test_plain_format():
    code, out = invoke('--format', 'plain', 'shimura', 'index', '6', '1', '5')
    assert code == 0
    assert 'index: 6' in out.splitlines()


def test_quadsym_check_at_split_prime():
    code, out = invoke('quadsym', 'check', '2', '3', '1', '--n-max', '1')
    assert code == 0
    data = json.loads(out)
    assert data['admissible'] is False
    assert data['collision'] is not None
    assert data['collision']['determinant'] % 3 == 0
    assert data['collision']['cusp_images'][0] != data['collision']['cusp_images'][1]


def test_quadsym_check_at_admissible_prime():
    code, out = invoke('quadsym', 'check', '1', '3', '11', '--n-max', '1')
    assert code == 0
    data = json.loads(out)
    assert data['admissible'] is True
    assert data['collision'] is None
    assert data['symbols'] == ['psi+', 'psi-']


def test_shimura_commands():
    code, out = invoke('shimura', 'index', '6', '1', '5')
    assert code == 0 and json.loads(out)['index'] == 6
    code, out = invoke('shimura', 'distcheck', '3', '1', '--sigma', '(1 2)')
    assert code == 0
    assert json.loads(out)['sigma'] == [0, 2, 1]
    assert invoke('shimura', 'verify', '15')[0] == 0


def test_failed_check_exits_3():
    code, out = invoke('check', 'all', '--only', 'no-such-check')
    assert code == 3
    assert json.loads(out)['ok'] is False


def test_version(capsys):
    assert invoke('--version')[0] == 0
    assert __version__ in capsys.readouterr().out
