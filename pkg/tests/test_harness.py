# tests/test_harness.py
import json
import logging

import numpy as np
import pandas as pd
import pytest
from click.testing import CliRunner

from src.cli import cli
from src.config import RESULT_COLUMNS, SystemConfig
from src.exceptions import ConfigError, ResultsIOError
from src.harness import (
    FIGURE_PRESETS, SweepSpec, ber_lower_with_confidence, figure_spec, parse_config, read_results,
    run_point, run_sweep, write_results,
)
from src.log_config import setup_logging


@pytest.fixture(autouse=True)
def restore_root_logger():
    root = logging.getLogger()
    handlers, level = list(root.handlers), root.level
    yield
    root.handlers[:] = handlers
    root.setLevel(level)


@pytest.fixture
def tiny_spec():
    config = SystemConfig(K=3, L=2, N=16, n=2, n_q=2, P=10, seed=11)
    return SweepSpec(config=config, axis_values=(0.0, 10.0), detectors=('GL-SIC', 'PIC'),
                     selections=('none', 'proposed'), trials=3, scenario_id='tiny')


def test_direct_high_snr_single_user_is_error_free():
    config = SystemConfig(K=1, L=0, N=16, n=1, n_q=1, P=20)
    spec = SweepSpec(config=config, axis_values=(60.0,), detectors=('MF', 'SIC', 'GL-SIC'), trials=2)
    table = run_sweep(spec)
    assert list(table.columns) == RESULT_COLUMNS
    assert (table['errors'] == 0).all()
    assert (table['selection'] == 'none').all()
    assert (table['bits'] == 40).all()


def test_single_symbol_counts_one_bit_per_user():
    config = SystemConfig(K=2, L=1, N=16, n=1, n_q=1, P=1)
    spec = SweepSpec(config=config, axis_values=(5.0, 10.0), detectors=('MF',), trials=1)
    table = run_sweep(spec)
    assert len(table) == 2
    assert (table['bits'] == 2).all()
    assert table['ber'].between(0, 1).all()


def test_worker_count_does_not_change_results(tiny_spec):
    serial = run_sweep(tiny_spec, workers=1)
    parallel = run_sweep(tiny_spec, workers=2)
    pd.testing.assert_frame_equal(serial, parallel)


def test_sweep_is_reproducible(tiny_spec):
    pd.testing.assert_frame_equal(run_sweep(tiny_spec), run_sweep(tiny_spec))


def test_run_point_rows_per_trial(tiny_spec):
    trials = run_point(tiny_spec, 1)
    assert len(trials) == 3 * 2 * 2
    assert set(trials['axis_value']) == {10.0}
    none_rows = trials[trials['selection'] == 'none']
    assert all(selected == (0, 1) for selected in none_rows['selected'])


def test_selections_share_phase_one(tiny_spec):
    trials = run_point(tiny_spec, 0)
    relay = trials.groupby(['trial', 'detector'])['relay_errors'].nunique()
    assert (relay == 1).all()


def test_user_axis_rebuilds_config():
    config = SystemConfig(K=6, L=1, N=16, n=2, n_q=3, P=5)
    spec = SweepSpec(config=config, axis_name='users', axis_values=(1, 4), detectors=('GL-PIC',),
                     trials=1, snr_db=12.0)
    point = spec.point_config(0)
    assert point.K == 1 and point.n == 1 and point.n_q == 1
    assert point.snr_db == pytest.approx(12.0)
    table = run_sweep(spec)
    assert list(table['K']) == [1, 4]


def test_spec_rejects_unknown_names():
    config = SystemConfig(K=2, L=1, n=1, n_q=1)
    with pytest.raises(ConfigError):
        SweepSpec(config=config, detectors=('ZF',))
    with pytest.raises(ConfigError):
        SweepSpec(config=config, selections=('random',))
    with pytest.raises(ConfigError):
        SweepSpec(config=config, axis_name='relays')
    with pytest.raises(ConfigError):
        SweepSpec(config=config, trials=0)


def test_empty_table_writes_header_only(tmp_path):
    path = write_results(pd.DataFrame(columns=RESULT_COLUMNS), tmp_path / 'empty.csv')
    lines = path.read_text().splitlines()
    assert lines == [','.join(RESULT_COLUMNS)]


def test_single_row_csv(tmp_path):
    config = SystemConfig(K=1, L=0, N=16, n=1, n_q=1, P=4)
    table = run_sweep(SweepSpec(config=config, axis_values=(10.0,), detectors=('MF',), trials=1))
    path = write_results(table, tmp_path / 'one.csv')
    assert len(path.read_text().splitlines()) == 2
    pd.testing.assert_frame_equal(read_results(path), table, check_dtype=False)


def test_json_results_round_trip(tmp_path, tiny_spec):
    table = run_sweep(tiny_spec)
    path = write_results(table, tmp_path / 'out' / 'sweep.json', fmt='json', config=tiny_spec.to_dict())
    payload = json.loads(path.read_text())
    assert payload['config']['scenario_id'] == 'tiny'
    pd.testing.assert_frame_equal(read_results(path), table)


def test_unwritable_path_raises(tmp_path):
    blocker = tmp_path / 'blocker'
    blocker.write_text('not a directory')
    with pytest.raises(ResultsIOError):
        write_results(pd.DataFrame(columns=RESULT_COLUMNS), blocker / 'out.csv')


def test_unknown_format_raises(tmp_path):
    with pytest.raises(ConfigError):
        write_results(pd.DataFrame(columns=RESULT_COLUMNS), tmp_path / 'x.parquet', fmt='parquet')


def test_missing_results_file_raises(tmp_path):
    with pytest.raises(ResultsIOError):
        read_results(tmp_path / 'missing.json')


class TestParseConfig:
    def test_defaults_are_full_scale(self):
        config, spec = parse_config()
        assert config.P == 1000
        assert spec.trials == 300
        assert (config.K, config.L, config.N, config.M) == (10, 6, 16, 18)

    def test_desk_scale(self):
        config, spec = parse_config(scale='desk')
        assert (config.P, spec.trials) == (200, 50)

    def test_overrides_beat_file(self, tmp_path):
        path = tmp_path / 'scenario.json'
        path.write_text(json.dumps({'K': 5, 'N': 32, 'detectors': ['MF', 'SIC']}))
        config, spec = parse_config(path, {'K': 6, 'd_th': None})
        assert config.K == 6
        assert config.N == 32
        assert config.d_th == 0.25
        assert spec.detectors == ('MF', 'SIC')

    def test_snr_sets_noise_variance(self):
        config, _ = parse_config(overrides={'snr_db': 10.0})
        assert config.noise_var == pytest.approx(0.1)

    def test_direct_mode_drops_relays(self):
        config, spec = parse_config(overrides={'mode': 'direct'})
        assert config.L == 0
        assert spec.effective_selections == ('none',)

    def test_file_keys_are_field_names(self, tmp_path):
        path = tmp_path / 'scenario.json'
        path.write_text(json.dumps({'d_th': 0.5, 'n_q': 1, 'L_b': 2}))
        config, _ = parse_config(path)
        assert (config.d_th, config.n_q, config.L_b) == (0.5, 1, 2)
        path.write_text(json.dumps({'dth': 0.5, 'nq': 1}))
        with pytest.raises(ConfigError):
            parse_config(path)

    def test_single_user_clamps_group_sizes(self):
        config, _ = parse_config(overrides={'K': 1})
        assert (config.n, config.n_q, config.L_b, config.sic_branches) == (1, 1, 1, 2)

    def test_explicit_group_size_is_still_checked(self):
        with pytest.raises(ConfigError):
            parse_config(overrides={'K': 1, 'n': 2})

    def test_contradictory_window_raises(self):
        with pytest.raises(ConfigError):
            parse_config(overrides={'N': 16, 'L_p': 3, 'M': 20})

    def test_unknown_key_raises(self):
        with pytest.raises(ConfigError):
            parse_config(overrides={'relay_budget': 3})

    def test_unknown_detector_raises(self):
        with pytest.raises(ConfigError):
            parse_config(overrides={'detectors': ['ZF']})

    def test_invalid_json_raises(self, tmp_path):
        path = tmp_path / 'broken.json'
        path.write_text('{"K": ')
        with pytest.raises(ConfigError):
            parse_config(path)


def test_figure_presets_build():
    for name in FIGURE_PRESETS:
        spec = figure_spec(name, trials=2)
        assert spec.scenario_id == name
        assert spec.trials == 2
        assert spec.config.P == 200
    with pytest.raises(ConfigError):
        figure_spec('fig99')


class TestPairedBootstrap:
    def setup_method(self):
        rng = np.random.default_rng(3)
        self.better = rng.poisson(2, size=40)
        self.worse = self.better + rng.poisson(3, size=40) + 1

    def test_detects_lower_errors(self):
        assert ber_lower_with_confidence(self.better, self.worse)

    def test_reversed_is_not_lower(self):
        assert not ber_lower_with_confidence(self.worse, self.better)

    def test_identical_is_not_lower(self):
        assert not ber_lower_with_confidence(self.better, self.better)

    def test_unpaired_samples_raise(self):
        with pytest.raises(ConfigError):
            ber_lower_with_confidence(self.better, self.worse[:10])


class TestCli:
    def setup_method(self):
        self.runner = CliRunner()

    def test_complexity_prints_table(self):
        result = self.runner.invoke(cli, ['complexity', '--m-grid', '34,35'])
        assert result.exit_code == 0
        assert '7120' in result.output

    def test_complexity_ordering_to_file(self, tmp_path):
        out = tmp_path / 'ordering.csv'
        result = self.runner.invoke(cli, ['complexity', '--m-grid', '34:40', '--check-ordering', '--out', str(out)])
        assert result.exit_code == 0
        report = pd.read_csv(out)
        assert len(report) == 7
        assert report['ordering_holds'].all()

    def test_small_ber_sweep(self, tmp_path):
        out = tmp_path / 'sweep.csv'
        result = self.runner.invoke(cli, [
            'ber-sweep', '--detector', 'MF,GL-SIC', '--selection', 'proposed', '--relays', '2',
            '--users', '2', '--group-n', '1', '--nq', '1', '--trials', '2', '--packet', '5',
            '--snr', '0,10', '--out', str(out),
        ])
        assert result.exit_code == 0
        table = read_results(out)
        assert len(table) == 4
        assert (table['bits'] == 20).all()

    def test_single_user_sweep_without_group_flags(self):
        result = self.runner.invoke(cli, [
            'ber-sweep', '--users', '1', '--relays', '1', '--detector', 'SIC', '--selection', 'none',
            '--trials', '1', '--packet', '3', '--snr', '10',
        ])
        assert result.exit_code == 0

    def test_direct_user_sweep(self):
        result = self.runner.invoke(cli, [
            'user-sweep', '--mode', 'direct', '--users', '2,3', '--detector', 'SIC',
            '--trials', '1', '--packet', '4', '--format', 'json',
        ])
        assert result.exit_code == 0

    def test_negative_threshold_fails(self):
        result = self.runner.invoke(cli, ['ber-sweep', '--dth=-1', '--trials', '1', '--packet', '2'])
        assert result.exit_code == 1

    def test_audit_proposition(self):
        result = self.runner.invoke(cli, ['audit-proposition', '--trials', '5', '--relays', '3', '--users', '2'])
        assert result.exit_code == 0
        assert 'proposed_above_exhaustive: 0' in result.output


def test_json_logging(capsys):
    setup_logging(logging.INFO, json_format=True)
    logging.getLogger('src.harness').info("sweep started")
    line = capsys.readouterr().err.strip().splitlines()[-1]
    record = json.loads(line)
    assert record['message'] == "sweep started"
    assert record['level'] == 'INFO'
    assert record['name'] == 'src.harness'
