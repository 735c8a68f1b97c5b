import json
import math

import pytest

from main import main


def run(capsys, *argv):
    code = main(list(argv))
    return code, capsys.readouterr().out


@pytest.fixture
def synthetic_file(tmp_path, capsys):
    def make(*extra, name='synthetic.csv'):
        path = tmp_path / name
        code, _ = run(capsys, 'synth', '--f', '0.75', '--lp', '0.0125', '--lm', '-0.169', '--n', '60',
                      '--out', str(path), *extra)
        assert code == 0
        return str(path)
    return make


def test_synth_writes_csv(capsys):
    code, out = run(capsys, 'synth', '--f', '0.5', '--lp', '0.1', '--lm', '-0.1', '--n', '3')
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == 'period,value'
    assert lines[1] == '0,100.0'
    assert len(lines) == 4


def test_synth_is_deterministic(capsys):
    argv = ['synth', '--f', '0.75', '--lp', '0.0125', '--lm', '-0.169', '--n', '40', '--nu', '0.005',
            '--seed', '3']
    _, first = run(capsys, *argv)
    _, second = run(capsys, *argv)
    assert first == second


def test_fit_reproduces_generator(capsys, synthetic_file):
    code, out = run(capsys, 'fit', synthetic_file(), '--json')
    assert code == 0
    row = json.loads(out)['fits'][0]
    assert row['f'] == pytest.approx(0.75, rel=1e-6)
    assert row['lambda_plus'] == pytest.approx(0.0125, rel=1e-6)
    assert row['exp_lambda_minus'] == pytest.approx(math.exp(-0.169), rel=1e-6)
    assert row['n'] == 60


def test_fit_period_range(capsys, synthetic_file):
    code, out = run(capsys, 'fit', synthetic_file(), '--from', '10', '--to', '39', '--json')
    assert code == 0
    row = json.loads(out)['fits'][0]
    assert (row['first'], row['last'], row['n']) == ('10', '39', 30)


def test_fit_text_output_is_reproducible(capsys, synthetic_file):
    path = synthetic_file('--nu', '0.005')
    _, first = run(capsys, 'fit', path, '--seed', '4')
    _, second = run(capsys, 'fit', path, '--seed', '4')
    assert first == second
    assert '# fits' in first


def test_segment_splits_at_the_break(capsys, synthetic_file):
    path = synthetic_file('--shock-at', '40', '--n', '80', name='broken.csv')
    code, out = run(capsys, 'segment', path, '--t0-start', '10', '--restarts', '2', '--json')
    assert code == 0
    document = json.loads(out)
    assert len(document['shocks']) == 1
    assert abs(document['shocks'][0]['time'] - 40) <= 1
    assert len(document['fits']) == 2


def test_detect_with_tolerance_sweep(capsys, synthetic_file):
    path = synthetic_file('--n', '30')
    code, out = run(capsys, 'detect', path, '--t0-start', '20', '--restarts', '1',
                    '--p-sweep', '0.01:0.03:0.01', '--json')
    assert code == 0
    horizon = json.loads(out)['horizon']
    assert sorted({row['p'] for row in horizon}) == [0.01, 0.02, 0.03]
    assert all(row['t_pred'] == 30 for row in horizon)


def test_reports_carry_the_input_scale(capsys, write_csv):
    rows = [(1990 + t, 250.0 * (0.75 * math.exp(0.0125 * t) + 0.25 * math.exp(-0.169 * t))) for t in range(30)]
    path = write_csv(rows)
    code, out = run(capsys, 'fit', path, '--json')
    assert code == 0
    document = json.loads(out)
    assert document['metadata']['scale'] == pytest.approx(2.5)
    assert document['fits'][0]['f'] == pytest.approx(0.75, rel=1e-6)
    code, out = run(capsys, 'detect', path, '--t0-start', '20', '--restarts', '1', '--json')
    assert code == 0
    assert json.loads(out)['metadata']['scale'] == pytest.approx(2.5)


def test_detect_counting_every_plateau(capsys, synthetic_file):
    path = synthetic_file('--shock-at', '40', '--n', '80', name='broken.csv')
    code, out = run(capsys, 'detect', path, '--t0-start', '10', '--restarts', '2', '--any-plateau', '--json')
    assert code == 0
    document = json.loads(out)
    assert document['metadata']['options']['any_plateau'] is True
    assert any(abs(shock['time'] - 40) <= 1 for shock in document['shocks'])


def test_simulate_without_transfer(capsys):
    code, out = run(capsys, 'simulate', '--a1', '0.02', '--a2', '-0.05', '--beta', '0', '--w1', '0.1',
                    '--w2', '0.9', '--T', '10', '--json')
    assert code == 0
    document = json.loads(out)
    last = document['tables']['trajectory'][-1]
    assert last['t'] == 10.0
    assert last['w1'] == pytest.approx(0.1 * math.exp(0.2), rel=1e-8)
    assert last['w2'] == pytest.approx(0.9 * math.exp(-0.5), rel=1e-8)
    assert 'asymptotic_inequality' not in document['tables']['modes'][0]


def test_static_policies(capsys):
    code, out = run(capsys, 'policy', 'static', '--T', '20', '--dt', '0.1', '--betas', '0.01,0.1', '--json')
    assert code == 0
    document = json.loads(out)
    assert [summary['beta_start'] for summary in document['policy']] == [0.01, 0.1]
    assert len(document['fits']) == 2


def test_output_file(capsys, tmp_path):
    target = tmp_path / 'trajectory.txt'
    code, out = run(capsys, 'simulate', '--a1', '0.02', '--a2', '-0.05', '--beta', '0.01', '--w1', '0.1',
                    '--w2', '0.9', '--T', '5', '--out', str(target))
    assert code == 0
    assert out == ''
    assert target.read_text().startswith('# command: simulate')


@pytest.mark.parametrize('argv', [
    ['synth', '--f', '0.5'],
    ['unknown'],
    ['simulate', '--a1', 'x', '--a2', '0', '--beta', '0', '--w1', '1', '--w2', '1', '--T', '1'],
    ['policy', 'static', '--betas', '0.1,abc'],
    ['policy', 'static', '--betas', '0'],
])
def test_usage_errors(capsys, argv):
    code, _ = run(capsys, *argv)
    assert code == 1


def test_invalid_tolerance_is_a_usage_error(capsys, synthetic_file):
    code, _ = run(capsys, 'detect', synthetic_file(), '--p', '2')
    assert code == 1


def test_data_errors(capsys, tmp_path, write_csv):
    code, _ = run(capsys, 'fit', str(tmp_path / 'absent.csv'))
    assert code == 2
    code, _ = run(capsys, 'fit', write_csv([(1990, 100.0), (1992, 95.0)]))
    assert code == 2
    code, _ = run(capsys, 'fit', write_csv([(1990, 100.0), (1991, 95.0), (1992, 97.0)], name='short.csv'))
    assert code == 2


def test_negative_initial_state_is_numerical(capsys):
    code, _ = run(capsys, 'simulate', '--a1', '0.02', '--a2', '-0.05', '--beta', '0', '--w1', '-0.1',
                  '--w2', '0.9', '--T', '5')
    assert code == 3
