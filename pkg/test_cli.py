import json

import numpy as np
import pytest

import cli
import complementarity
from complementarity import SweepConfig, sweep
from config import CSV_HEADER, EXIT_CLOSED_FORM, EXIT_DATAERR, EXIT_IO, EXIT_OK, EXIT_USAGE, EXIT_VIOLATION
from utils import matrix_to_pairs


def _sweep_args(out, *extra):
    return ['sweep', '--relation', 'single', '--channel', 'depolarizing', '--samples', '5',
            '--steps', '3', '--seed', '7', '--out', str(out), *extra]


def test_sweep_writes_csv_and_sidecar(tmp_path):
    out = tmp_path / 'depolarizing.csv'
    assert cli.main(_sweep_args(out)) == EXIT_OK
    lines = out.read_text(encoding='utf-8').split('\n')
    assert lines[0] == ','.join(CSV_HEADER)
    assert lines[-1] == ''
    assert len(lines) == 1 + 15 + 1
    meta = json.loads((tmp_path / 'depolarizing.csv.meta.json').read_text())
    assert meta['config']['seed'] == 7
    assert meta['records'] == 15


def test_csv_round_trip_is_exact(tmp_path):
    out = tmp_path / 'ad.csv'
    assert cli.main(['sweep', '--channel', 'amplitude-damping', '--samples', '4', '--steps', '2',
                     '--seed', '11', '--out', str(out)]) == EXIT_OK
    expected = sweep(SweepConfig(relation='single', channel='amplitude-damping', samples=4,
                                 param_steps=2, seed=11))
    assert cli.read_sweep_csv(out) == expected


def test_sweep_output_is_byte_identical_across_workers(tmp_path):
    first = tmp_path / 'one.csv'
    second = tmp_path / 'many.csv'
    assert cli.main(_sweep_args(first, '--workers', '1')) == EXIT_OK
    assert cli.main(_sweep_args(second, '--workers', '3')) == EXIT_OK
    assert first.read_bytes() == second.read_bytes()


@pytest.mark.parametrize('extra', [
    ['--steps', '0'],
    ['--dim', '5'],
    ['--samples', '0'],
    ['--relation', 'nonsense']
])
def test_sweep_usage_errors(tmp_path, extra):
    assert cli.main(_sweep_args(tmp_path / 'bad.csv') + extra) == EXIT_USAGE


def test_missing_subcommand_is_a_usage_error():
    assert cli.main([]) == EXIT_USAGE


def test_sweep_io_error(tmp_path):
    out = tmp_path / 'missing' / 'out.csv'
    assert cli.main(_sweep_args(out)) == EXIT_IO


def test_sweep_violation_dumps_counterexample(tmp_path, monkeypatch, capsys):
    monkeypatch.setattr(complementarity, 'disturbance_batch',
                        lambda stack, ch, entropies=None: np.full(len(stack), 5.0))
    out = tmp_path / 'broken.csv'
    assert cli.main(_sweep_args(out)) == EXIT_VIOLATION
    dump = json.loads((tmp_path / 'broken.csv.counterexample.json').read_text())
    assert dump['relation'] == 'single'
    assert dump['bound'] == 2.0
    assert set(dump['channel']) == {'label', 'param', 'kraus'}
    assert not out.exists()
    assert 'VIOLATION' in capsys.readouterr().out


def test_verify_closed_forms_command(capsys):
    assert cli.main(['verify-closed-forms', '--grid', '2']) == EXIT_OK
    printed = capsys.readouterr().out
    assert 'amplitude-damping disturbance [PASS' in printed
    assert 'rotated_frame@rotated_frame' in printed
    assert cli.main(['verify-closed-forms', '--grid', '0']) == EXIT_USAGE


def test_verify_closed_forms_failure(monkeypatch):
    monkeypatch.setattr(complementarity, 'disturbance_depolarizing_closed_form', lambda l0, l1, p: 5.0)
    assert cli.main(['verify-closed-forms', '--grid', '1']) == EXIT_CLOSED_FORM


def test_report_weak_measurement_on_maximally_mixed_qubit(capsys):
    assert cli.main(['report', '--state', 'schmidt:0.5', '--channel', 'weak:1']) == EXIT_OK
    printed = capsys.readouterr().out
    assert 'D(ρ, ℰ)           1.0000000000 bits' in printed
    assert 'C_r(ρ)            0.0000000000 bits' in printed
    assert 'measurement' in printed


def test_report_identity_channel(capsys):
    assert cli.main(['report', '--state', 'schmidt:0.3', '--channel', 'identity']) == EXIT_OK
    printed = capsys.readouterr().out
    assert 'D(ρ, ℰ)           0.0000000000 bits' in printed
    assert 'measurement' not in printed


def test_report_from_state_file(tmp_path, capsys):
    path = tmp_path / 'plus.json'
    path.write_text(json.dumps({'matrix': matrix_to_pairs(0.5 * np.ones((2, 2)))}))
    assert cli.main(['report', '--state', str(path), '--channel', 'depolarizing:0.5']) == EXIT_OK
    assert 'C_r(ρ)            1.0000000000 bits' in capsys.readouterr().out


@pytest.mark.parametrize('content', [
    '{not json',
    '{"basis": "computational"}',
    '{"matrix": [[[1, 0], [0, 0]], [[0, 0], [1, 0]]]}',
    '{"matrix": [[1, 0, 0]]}'
])
def test_report_rejects_malformed_state_files(tmp_path, content):
    path = tmp_path / 'state.json'
    path.write_text(content)
    assert cli.main(['report', '--state', str(path), '--channel', 'identity']) == EXIT_DATAERR


@pytest.mark.parametrize('state,channel', [
    ('schmidt:1.5', 'identity'),
    ('schmidt:abc', 'identity'),
    ('schmidt:0.5', 'teleport:1'),
    ('schmidt:0.5', 'weak:x'),
    ('schmidt:0.5', 'weak:2')
])
def test_report_rejects_malformed_specs(state, channel):
    assert cli.main(['report', '--state', state, '--channel', channel]) == EXIT_DATAERR


def test_report_missing_state_file(tmp_path):
    assert cli.main(['report', '--state', str(tmp_path / 'none.json'), '--channel', 'identity']) == EXIT_IO


def test_plot_sweep(tmp_path):
    csv_path = tmp_path / 'weak.csv'
    svg_path = tmp_path / 'weak.svg'
    assert cli.main(['sweep', '--relation', 'measurement', '--channel', 'weak', '--samples', '6',
                     '--steps', '2', '--out', str(csv_path)]) == EXIT_OK
    assert cli.main(['plot', '--csv', str(csv_path), '--out', str(svg_path)]) == EXIT_OK
    assert '<svg' in svg_path.read_text()


def test_plot_empty_csv(tmp_path):
    csv_path = tmp_path / 'empty.csv'
    csv_path.write_text(','.join(CSV_HEADER) + '\n')
    svg_path = tmp_path / 'empty.svg'
    assert cli.main(['plot', '--csv', str(csv_path), '--out', str(svg_path)]) == EXIT_OK
    assert '<svg' in svg_path.read_text()


@pytest.mark.parametrize('row', [
    '1,2,weak',
    '0,2,weak,0,0.5,0.5,{oops,1,0',
    '0,2,weak,0,0.5,0.5,"[1, 2]",1,0',
    '0,2,weak,0,0.5,0.5,"{""bound"": 1}",1,0',
    'x,2,weak,0,0.5,0.5,"{""bound"": 1, ""coherence_weight"": 1}",1,0'
])
def test_plot_rejects_malformed_rows(tmp_path, row):
    csv_path = tmp_path / 'bad.csv'
    csv_path.write_text(','.join(CSV_HEADER) + '\n' + row + '\n', encoding='utf-8')
    assert cli.main(['plot', '--csv', str(csv_path), '--out', str(tmp_path / 'bad.svg')]) == EXIT_DATAERR


def test_plot_rejects_non_utf8_csv(tmp_path):
    csv_path = tmp_path / 'latin.csv'
    csv_path.write_bytes(b'\xff\xfe' + ','.join(CSV_HEADER).encode('utf-16-le'))
    assert cli.main(['plot', '--csv', str(csv_path), '--out', str(tmp_path / 'x.svg')]) == EXIT_DATAERR


def test_report_rejects_non_utf8_state_file(tmp_path):
    path = tmp_path / 'state.json'
    path.write_bytes(b'\xff\xfe{"matrix": []}')
    assert cli.main(['report', '--state', str(path), '--channel', 'identity']) == EXIT_DATAERR


def test_report_bipartite_defaults_to_certified_bound(tmp_path, monkeypatch, capsys):
    def solver_not_expected(*args, **kwargs):
        raise AssertionError('variational solver ran without --er-mode variational')

    monkeypatch.setattr(complementarity, 'relative_entropy_entanglement', solver_not_expected)
    path = tmp_path / 'bell.json'
    bell = np.zeros((4, 4))
    bell[np.ix_([0, 3], [0, 3])] = 0.5
    path.write_text(json.dumps({'matrix': matrix_to_pairs(bell)}))
    assert cli.main(['report', '--state', str(path), '--channel', 'identity']) == EXIT_OK
    printed = capsys.readouterr().out
    assert 'bipartite-entanglement' in printed
    assert 'bipartite-discord' in printed
