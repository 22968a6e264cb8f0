# tests/test_acceptance.py - End-to-end checks of the detector and selection properties
from dataclasses import replace
from itertools import product

import numpy as np
import pandas as pd
import pytest

from src.complexity import complexity_table, ordering_report
from src.config import SystemConfig
from src.detectors import (
    detect, detect_glpic, detect_glsic, detect_ml, detect_mmse, detect_pic, detect_sic, residual_metric,
)
from src.harness import SweepSpec, ber_lower_with_confidence, figure_spec, run_point, run_sweep
from src.rake_frontend import RakeBank
from src.relay_selection import audit_proposition, make_scenario_generator
from src.signal_model import complex_noise
from tests.conftest import orthogonal_signatures, random_signatures


def noisy_packet(rng, K, P, noise_var):
    H = random_signatures(K, rng)
    b = rng.choice([-1.0, 1.0], size=(K, P)).astype(complex)
    return H, H @ b + complex_noise((H.shape[0], P), noise_var, rng)


def test_zero_threshold_list_detectors_collapse_to_conventional(bpsk):
    rng = np.random.default_rng(100)
    for instance in range(1000):
        K = 1 + instance % 8
        H, y = noisy_packet(rng, K, 3, noise_var=rng.uniform(0.05, 1.0))
        bank = RakeBank.from_signatures(H)
        np.testing.assert_array_equal(detect_glsic(bank, y, bpsk, 0.0, min(2, K)), detect_sic(bank, y, bpsk))
        np.testing.assert_array_equal(detect_glpic(bank, y, bpsk, 0.0, 0), detect_pic(bank, y, bpsk, iters=3))


def test_ml_dominates_every_detector(bpsk):
    rng = np.random.default_rng(200)
    for instance in range(500):
        K = 1 + instance % 4
        H, y = noisy_packet(rng, K, 1, noise_var=0.5)
        y = y[:, 0]
        bank = RakeBank.from_signatures(H)
        ml = detect_ml(H, y, bpsk)

        best, best_metric = None, np.inf
        for values in product([1.0, -1.0], repeat=K):
            candidate = np.array(values, dtype=complex)
            metric = residual_metric(y, H, candidate)
            if metric < best_metric:
                best, best_metric = candidate, metric
        np.testing.assert_array_equal(ml, best)

        outputs = [
            detect_sic(bank, y, bpsk),
            detect_pic(bank, y, bpsk),
            detect_mmse(H, y, bpsk, 0.5),
            detect_glsic(bank, y, bpsk, 0.25, min(2, K)),
            detect_glpic(bank, y, bpsk, 0.25, min(3, K)),
        ]
        for decisions in outputs:
            assert residual_metric(y, H, decisions) >= best_metric * (1 - 1e-12)


def test_relay_selection_bounds():
    config = SystemConfig(K=4, L=5, N=16, n=2, n_q=3, noise_var=0.1, seed=5)
    audit = audit_proposition(1000, make_scenario_generator(config))
    assert audit.upper_violations == 0
    assert audit.max_proposed_evaluations <= 15
    assert audit.lower_violation_fraction <= 0.05


def test_complexity_ordering_over_grid():
    report = ordering_report(complexity_table(range(34, 98)))
    assert report['ordering_holds'].all()


def test_noise_free_orthogonal_detection(bpsk):
    config = SystemConfig(K=6, L=0, N=16, n=2, n_q=3, noise_var=0.0)
    H = orthogonal_signatures(6, amplitudes=np.linspace(1.4, 0.5, 6))
    b = np.random.default_rng(3).choice([-1.0, 1.0], size=(6, 40)).astype(complex)
    for name in ('MF', 'SIC', 'PIC', 'MMSE', 'ML', 'GL-SIC', 'GL-SIC-MB', 'GL-PIC', 'MB-SIC', 'SU'):
        np.testing.assert_array_equal(detect(name, H, H @ b, bpsk, config, reference=b), b, err_msg=name)


def test_empirical_noise_variance():
    noise = complex_noise((34, 20000), 0.3, np.random.default_rng(9))
    assert np.mean(np.abs(noise) ** 2) == pytest.approx(0.3, rel=0.02)


def paired_errors(trials: pd.DataFrame, detector: str) -> np.ndarray:
    rows = trials[trials['detector'] == detector].sort_values(['axis_value', 'trial'])
    return rows['errors'].to_numpy()


def point_trials(spec: SweepSpec) -> pd.DataFrame:
    return pd.concat([run_point(spec, p) for p in range(len(spec.axis_values))], ignore_index=True)


@pytest.mark.slow
def test_list_sic_ordering_without_relays():
    spec = figure_spec('noncoop_glsic', axis_values=(8.0, 12.0))
    trials = point_trials(spec)
    chain = ['GL-SIC', 'MB-SIC', 'SIC', 'MF']
    for better, worse in zip(chain, chain[1:]):
        assert ber_lower_with_confidence(paired_errors(trials, better), paired_errors(trials, worse)), (better, worse)
    assert ber_lower_with_confidence(paired_errors(trials, 'GL-SIC'), paired_errors(trials, 'MMSE'))


@pytest.mark.slow
def test_list_pic_ordering_without_relays():
    spec = figure_spec('noncoop_glpic', axis_values=(12.0,), detectors=('GL-PIC', 'PIC', 'SIC'))
    trials = point_trials(spec)
    glpic, pic, sic = (paired_errors(trials, name) for name in ('GL-PIC', 'PIC', 'SIC'))
    assert ber_lower_with_confidence(glpic, pic)
    assert not ber_lower_with_confidence(sic, pic)

    wider = replace(spec, config=replace(spec.config, n_q=5), detectors=('GL-PIC',))
    glpic_wide = paired_errors(point_trials(wider), 'GL-PIC')
    assert not ber_lower_with_confidence(glpic, glpic_wide)


@pytest.mark.slow
def test_proposed_selection_tracks_exhaustive():
    spec = figure_spec('coop_selection_snr', axis_values=(10.0, 15.0), detectors=('GL-SIC',),
                       selections=('none', 'proposed', 'exhaustive'), trials=30)
    table = run_sweep(spec).set_index(['axis_value', 'selection'])['ber']
    for snr in (10.0, 15.0):
        proposed, exhaustive, everything = (table[(snr, s)] for s in ('proposed', 'exhaustive', 'none'))
        assert proposed <= 2 * exhaustive
        assert proposed < everything
        assert exhaustive < everything
