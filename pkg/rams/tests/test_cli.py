import json
import argparse
import numpy as np
import pytest
from astropy.table import Table

import rams
from rams.system_config import desk_scale
from rams.cli import (main, run, parse_psi, exit_ok, exit_config, exit_capacity,
                      exit_numerical)


@pytest.fixture
def desk_config(tmp_path):
    file = tmp_path / 'desk.yaml'
    desk_scale(psi=3, trials=20, seed=5).write(file)
    return str(file)


def read_json(file):
    with open(file) as FO:
        return json.load(FO)


##-------------------------------------------------------------------------
## parse_psi
##-------------------------------------------------------------------------
def test_parse_psi():
    assert parse_psi('1..4') == [1, 2, 3, 4]
    assert parse_psi('4,1,2') == [1, 2, 4]
    assert parse_psi('4') == [4]
    for bad in ['a', '0..2', '', '2..x']:
        with pytest.raises(argparse.ArgumentTypeError):
            parse_psi(bad)


##-------------------------------------------------------------------------
## analytic
##-------------------------------------------------------------------------
def test_analytic_single_state(tmp_path):
    out = tmp_path / 'out'
    assert main(['analytic', '--mu', '10', '--var', '4', '--psi', '1',
                 '--out', str(out)]) == exit_ok
    curve = Table.read(out / 'analytic.csv', format='ascii.csv')
    assert curve['avg_gain_integral'][0] == pytest.approx(1.0, abs=1e-6)
    report = read_json(out / 'analytic.json')
    assert report['experiment'] == 'analytic'
    assert report['config'] is None
    assert 'runtime_s' not in report


def test_analytic_to_stdout(capsys):
    assert main(['analytic', '--mu', '10', '--var', '4', '--psi', '1..3',
                 '--eps', '0.05']) == exit_ok
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0].split(',')[:2] == ['psi', 'avg_gain_integral']
    assert 'outage_gain_eps0.05' in lines[0].split(',')
    assert len(lines) == 4


def test_analytic_states_for_target(tmp_path):
    assert main(['analytic', '--mu', '10', '--var', '4', '--psi', '1..3',
                 '--eps', '0.05', '--target', '1.05',
                 '--out', str(tmp_path)]) == exit_ok
    results = read_json(tmp_path / 'analytic.json')['results']
    assert results['target_gain'] == 1.05
    assert results['states_for_target'] == {'avg': 2, 'outage_eps0.05': 2}


def test_timing_adds_runtime(tmp_path):
    assert main(['analytic', '--mu', '10', '--var', '4', '--timing',
                 '--out', str(tmp_path)]) == exit_ok
    assert read_json(tmp_path / 'analytic.json')['runtime_s'] >= 0


##-------------------------------------------------------------------------
## Simulation commands
##-------------------------------------------------------------------------
def test_pdf_is_reproducible(tmp_path):
    for run in ('a', 'b'):
        assert main(['pdf', '--trials', '40', '--seed', '3', '--bins', '8',
                     '--out', str(tmp_path / run)]) == exit_ok
    for name in ('pdf.csv', 'pdf.json', 'pdf_samples.csv'):
        assert (tmp_path / 'a' / name).read_bytes() == \
               (tmp_path / 'b' / name).read_bytes()
    curve = Table.read(tmp_path / 'a' / 'pdf.csv', format='ascii.csv')
    assert curve.colnames == ['bin_center', 'density', 'fit_density']
    assert len(curve) == 8


def test_gain_avg(tmp_path, desk_config):
    assert main(['gain-avg', '--config', desk_config, '--psi', '1..3',
                 '--out', str(tmp_path)]) == exit_ok
    curve = Table.read(tmp_path / 'gain-avg.csv', format='ascii.csv')
    assert curve.colnames == ['psi', 'empirical', 'integral', 'small',
                              'large']
    assert list(curve['psi']) == [1, 2, 3]
    assert curve['empirical'][0] == 1.0
    report = read_json(tmp_path / 'gain-avg.json')
    assert report['seed'] == 5
    assert report['config']['n_r'] == 9
    assert len(report['notes']) == 1
    feedback = report['results']['feedback']
    assert [f['psi'] for f in feedback] == [1, 2, 3]
    assert feedback[0]['feedback_bits'] == pytest.approx(2 * np.log2(36))


def test_flags_override_config_file(tmp_path, desk_config):
    assert main(['gain-avg', '--config', desk_config, '--psi', '2',
                 '--seed', '6', '--trials', '10',
                 '--out', str(tmp_path)]) == exit_ok
    report = read_json(tmp_path / 'gain-avg.json')
    assert report['seed'] == 6
    assert report['config']['trials'] == 10
    assert report['config']['psi'] == 2


def test_gain_outage(tmp_path, desk_config):
    assert main(['gain-outage', '--config', desk_config, '--trials', '200',
                 '--eps', '0.1,0.2', '--psi', '1..3',
                 '--out', str(tmp_path)]) == exit_ok
    curve = Table.read(tmp_path / 'gain-outage.csv', format='ascii.csv')
    assert curve.colnames == ['eps', 'psi', 'empirical', 'analytic']
    assert list(curve['eps']) == [0.1] * 3 + [0.2] * 3
    assert list(curve['psi']) == [1, 2, 3] * 2
    for eps in (0.1, 0.2):
        rows = curve[curve['eps'] == eps]
        assert rows['empirical'][0] == 1.0
        assert rows['analytic'][0] == pytest.approx(1.0)
        assert np.all(np.diff(rows['empirical']) >= 0)
    report = read_json(tmp_path / 'gain-outage.json')
    assert report['experiment'] == 'gain-outage'
    assert report['config']['trials'] == 200
    assert len(report['results']['gains']) == 6


def test_gain_outage_needs_enough_trials(desk_config):
    assert main(['gain-outage', '--config', desk_config, '--eps', '0.05',
                 '--psi', '2']) == exit_config


def test_gain_commands_default_to_eight_states(tmp_path, desk_config):
    assert main(['gain-avg', '--config', desk_config, '--trials', '10',
                 '--out', str(tmp_path)]) == exit_ok
    curve = Table.read(tmp_path / 'gain-avg.csv', format='ascii.csv')
    assert list(curve['psi']) == list(range(1, 9))
    assert read_json(tmp_path / 'gain-avg.json')['config']['psi'] == 8


def test_loss_ratio(tmp_path, desk_config):
    assert main(['loss-ratio', '--config', desk_config, '--trials', '10',
                 '--out', str(tmp_path)]) == exit_ok
    curve = Table.read(tmp_path / 'loss-ratio.csv', format='ascii.csv')
    assert curve.colnames == ['rho_db', 'psi', 'loss_ratio',
                              'beam_loss_ratio', 'mean_exhaustive',
                              'mean_fast']
    assert list(curve['psi']) == [1, 2, 3]
    assert np.all(curve['rho_db'] == 0)
    assert np.all(curve['loss_ratio'] >= -1e-12)
    assert np.all(curve['mean_exhaustive'] >= curve['mean_fast'])
    # keeping the best ISSA state can only shrink the loss
    assert np.all(curve['beam_loss_ratio'] <= curve['loss_ratio'] + 1e-12)
    feedback = read_json(tmp_path / 'loss-ratio.json')['results']['feedback']
    assert [f['search_space_size'] for f in feedback] == \
           [1296, 2 * 1296, 3 * 1296]
    assert feedback[2]['feedback_bits'] == pytest.approx(np.log2(3 * 1296))


def test_loss_ratio_over_rho(tmp_path, desk_config):
    assert main(['loss-ratio', '--config', desk_config, '--trials', '10',
                 '--psi', '1,2', '--rho-db', '0,10',
                 '--out', str(tmp_path)]) == exit_ok
    curve = Table.read(tmp_path / 'loss-ratio.csv', format='ascii.csv')
    assert list(curve['rho_db']) == [0, 0, 10, 10]
    assert list(curve['psi']) == [1, 2, 1, 2]
    low, high = curve[curve['rho_db'] == 0], curve[curve['rho_db'] == 10]
    assert np.all(high['mean_exhaustive'] > low['mean_exhaustive'])
    report = read_json(tmp_path / 'loss-ratio.json')
    assert report['results']['rho_db'] == [0.0, 10.0]
    assert report['config']['rho_db'] == 0.0
    assert len(report['results']['ratios']) == 4


def test_rho_list_only_for_loss_ratio(desk_config):
    with pytest.raises(SystemExit):
        main(['gain-avg', '--config', desk_config, '--rho-db', '0,10'])


def test_dump_channels(tmp_path, desk_config):
    assert main(['dump-channels', '--config', desk_config, '--trial', '2',
                 '--out', str(tmp_path)]) == exit_ok
    channels, cfg = rams.load(tmp_path / 'dump-channels.json')
    assert channels.trial_index == 2
    assert channels.psi == 3
    expect = rams.realize_channels(cfg, 2)
    for h, g in zip(expect.matrices, channels.matrices):
        np.testing.assert_array_equal(h, g)


##-------------------------------------------------------------------------
## Reproducibility
##-------------------------------------------------------------------------
command_args = {
    'pdf': ['--bins', '5'],
    'gain-avg': ['--psi', '1..3'],
    'gain-outage': ['--trials', '200', '--eps', '0.1', '--psi', '1..2'],
    'loss-ratio': ['--trials', '8', '--psi', '1,2'],
    'analytic': ['--mu', '10', '--var', '4', '--psi', '1..3', '--eps',
                 '0.05'],
    'dump-channels': ['--trial', '1'],
    }


@pytest.mark.parametrize('command', sorted(command_args))
def test_same_seed_gives_identical_files(tmp_path, desk_config,
                                         command):
    for tag in ('a', 'b'):
        argv = [command, '--config', desk_config, '--out',
                str(tmp_path / tag)] + command_args[command]
        assert main(argv) == exit_ok
    names = sorted(p.name for p in (tmp_path / 'a').iterdir())
    assert len(names) > 0
    assert names == sorted(p.name for p in (tmp_path / 'b').iterdir())
    for name in names:
        assert (tmp_path / 'a' / name).read_bytes() == \
               (tmp_path / 'b' / name).read_bytes()


##-------------------------------------------------------------------------
## Exit codes
##-------------------------------------------------------------------------
def test_unknown_config_field(tmp_path):
    file = tmp_path / 'bad.yaml'
    file.write_text('n_r: 9\nbogus: 1\n')
    assert main(['pdf', '--config', str(file)]) == exit_config


def test_missing_config_file(tmp_path):
    assert main(['pdf', '--config', str(tmp_path / 'none.yaml')]) == \
           exit_config


def test_exhaustive_at_full_scale():
    assert main(['loss-ratio', '--trials', '1', '--psi', '2']) == \
           exit_capacity


def test_negative_outage_rate():
    assert main(['analytic', '--mu', '1', '--var', '4', '--psi', '2',
                 '--eps', '0.05']) == exit_numerical


def test_unknown_flag():
    with pytest.raises(SystemExit):
        main(['pdf', '--frobnicate'])


def test_run_returns_exit_status(capsys):
    assert run(['analytic', '--mu', '20', '--var', '1', '--psi', '2']) == \
           exit_ok
    assert 'avg_gain_integral' in capsys.readouterr().out
