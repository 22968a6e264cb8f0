# src/harness.py - Monte Carlo sweeps, BER accounting and result files
import json
import logging
import time
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from joblib import Parallel, delayed
from scipy.stats import bootstrap
from tqdm import tqdm

from src.config import (
    DEFAULT_SNR_AXIS, DEFAULT_USER_SWEEP_SNR, DETECTOR_NAMES, RESULT_COLUMNS, SCALES,
    SELECTION_NAMES, SystemConfig, snr_db_to_noise_var,
)
from src.cross_layer import complete_packet, simulate_phase_one
from src.exceptions import ConfigError, ResultsIOError

logger = logging.getLogger(__name__)

AXIS_NAMES = ('snr_db', 'users')

TRIAL_COLUMNS = [
    'axis_value', 'trial', 'detector', 'selection', 'bits', 'errors',
    'relay_bits', 'relay_errors', 'selected', 'wall_time',
]


@dataclass(frozen=True)
class SweepSpec:
    """One sweep: an axis of SNRs or user counts over a fixed scenario"""
    config: SystemConfig
    axis_name: str = 'snr_db'
    axis_values: Tuple[float, ...] = DEFAULT_SNR_AXIS
    detectors: Tuple[str, ...] = ('GL-SIC',)
    selections: Tuple[str, ...] = ('proposed',)
    trials: int = SCALES['desk']['trials']
    scenario_id: str = 'custom'
    snr_db: float = DEFAULT_USER_SWEEP_SNR

    def __post_init__(self):
        if self.axis_name not in AXIS_NAMES:
            raise ConfigError(f"Unknown axis '{self.axis_name}', expected one of {AXIS_NAMES}")
        if not self.axis_values:
            raise ConfigError("The sweep axis is empty")
        if self.trials < 1:
            raise ConfigError(f"trials must be >= 1, got {self.trials}")
        if not self.detectors:
            raise ConfigError("No detector to run")
        for name in self.detectors:
            if name not in DETECTOR_NAMES:
                raise ConfigError(f"Unknown detector '{name}', expected one of {DETECTOR_NAMES}")
        for name in self.selections:
            if name not in SELECTION_NAMES:
                raise ConfigError(f"Unknown selection '{name}', expected one of {SELECTION_NAMES}")
        if self.config.cooperative and not self.selections:
            raise ConfigError("A cooperative sweep needs at least one selection")
        object.__setattr__(self, 'axis_values', tuple(float(v) for v in self.axis_values))
        object.__setattr__(self, 'detectors', tuple(self.detectors))
        object.__setattr__(self, 'selections', tuple(self.selections))

    @property
    def effective_selections(self) -> Tuple[str, ...]:
        return self.selections if self.config.cooperative else ('none',)

    def point_config(self, point_index: int) -> SystemConfig:
        value = self.axis_values[point_index]
        if self.axis_name == 'snr_db':
            return self.config.with_snr(value)
        return self.config.with_users(int(value)).with_snr(self.snr_db)

    def to_dict(self) -> dict:
        data = {f.name: getattr(self, f.name) for f in fields(self) if f.name != 'config'}
        data['axis_values'] = list(self.axis_values)
        data['detectors'] = list(self.detectors)
        data['selections'] = list(self.selections)
        return data


@dataclass(frozen=True)
class TrialResult:
    detector: str
    selection: str
    bits: int
    errors: int
    relay_bits: int
    relay_errors: int
    selected: Tuple[int, ...] = field(default=())
    wall_time: float = 0.0

    def __post_init__(self):
        if self.errors > self.bits:
            raise ConfigError(f"{self.errors} errors counted over {self.bits} bits")


def trial_rng(seed: int, point_index: int, trial_index: int) -> np.random.Generator:
    """Independent stream per (seed, point, trial), shared by every detector and selection"""
    return np.random.default_rng([seed, point_index, trial_index])


def run_trial(spec: SweepSpec, point_index: int, trial_index: int) -> List[TrialResult]:
    """One packet per detector; all selections complete the same phase-one draw"""
    config = spec.point_config(point_index)
    results = []
    for detector in spec.detectors:
        start = time.perf_counter()
        state = simulate_phase_one(config, detector, trial_rng(config.seed, point_index, trial_index))
        for selection in spec.effective_selections:
            output = complete_packet(state, selection)
            results.append(TrialResult(
                detector=detector,
                selection=selection,
                bits=output.bits,
                errors=output.bit_errors,
                relay_bits=output.relay_bits,
                relay_errors=output.relay_bit_errors,
                selected=tuple(int(l) for l in output.selected_set.members),
                wall_time=time.perf_counter() - start,
            ))
    return results


def _run_jobs(spec: SweepSpec, jobs: Sequence[Tuple[int, int]], workers: int, progress: bool):
    parallel = Parallel(n_jobs=workers, return_as="generator")
    outputs = parallel(delayed(run_trial)(spec, p, t) for p, t in jobs)
    if progress:
        outputs = tqdm(outputs, total=len(jobs), desc=spec.scenario_id, unit="trial")
    for (p, t), results in zip(jobs, outputs):
        yield p, t, results


def run_point(spec: SweepSpec, point_index: int, workers: int = 1, progress: bool = False) -> pd.DataFrame:
    """Per-trial error counts at one axis point, for paired statistics"""
    jobs = [(point_index, t) for t in range(spec.trials)]
    rows = []
    for p, t, results in _run_jobs(spec, jobs, workers, progress):
        for r in results:
            rows.append({
                'axis_value': spec.axis_values[p], 'trial': t, 'detector': r.detector,
                'selection': r.selection, 'bits': r.bits, 'errors': r.errors,
                'relay_bits': r.relay_bits, 'relay_errors': r.relay_errors,
                'selected': r.selected, 'wall_time': r.wall_time,
            })
    return pd.DataFrame(rows, columns=TRIAL_COLUMNS)


def run_sweep(spec: SweepSpec, workers: int = 1, progress: bool = False) -> pd.DataFrame:
    """
    Aggregate BER over every axis point.

    rng_root is spec.config.seed; integer sums make the table identical for
    any worker count.
    """
    jobs = [(p, t) for p in range(len(spec.axis_values)) for t in range(spec.trials)]
    logger.info("🚀 Running %s: %d points x %d trials, detectors %s",
                spec.scenario_id, len(spec.axis_values), spec.trials, ", ".join(spec.detectors))

    totals: Dict[Tuple[int, str, str], List[int]] = {}
    for p, _, results in _run_jobs(spec, jobs, workers, progress):
        for r in results:
            acc = totals.setdefault((p, r.detector, r.selection), [0, 0])
            acc[0] += r.bits
            acc[1] += r.errors

    rows = []
    for p, value in enumerate(spec.axis_values):
        config = spec.point_config(p)
        for detector in spec.detectors:
            for selection in spec.effective_selections:
                bits, errors = totals[(p, detector, selection)]
                rows.append({
                    'scenario_id': spec.scenario_id,
                    'axis_name': spec.axis_name,
                    'axis_value': float(value),
                    'detector': detector,
                    'selection': selection,
                    'K': config.K,
                    'L': config.L,
                    'N': config.N,
                    'L_p': config.L_p,
                    'd_th': config.d_th,
                    'n': config.n,
                    'n_q': config.n_q,
                    'trials': spec.trials,
                    'bits': bits,
                    'errors': errors,
                    'ber': errors / bits if bits else 0.0,
                    'seed': config.seed,
                })
    table = pd.DataFrame(rows, columns=RESULT_COLUMNS)
    logger.info("✅ %s finished, %d rows", spec.scenario_id, len(table))
    return table


def ber_lower_with_confidence(errors_a: Sequence[int], errors_b: Sequence[int],
                              confidence: float = 0.95, seed: int = 0) -> bool:
    """True when the paired bootstrap puts mean(errors_a) below mean(errors_b) at the given level"""
    a = np.asarray(errors_a, dtype=float)
    b = np.asarray(errors_b, dtype=float)
    if a.shape != b.shape or a.size < 2:
        raise ConfigError("Paired comparison needs two equal-length samples of at least two trials")
    if np.array_equal(a, b):
        return False
    result = bootstrap(
        (a, b),
        lambda x, y: np.mean(y) - np.mean(x),
        paired=True,
        vectorized=False,
        confidence_level=confidence,
        n_resamples=2000,
        method='percentile',
        alternative='greater',
        random_state=np.random.default_rng(seed),
    )
    return bool(result.confidence_interval.low > 0)


def _to_native(value):
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, tuple):
        return list(value)
    raise TypeError(f"Cannot serialize {type(value).__name__}")


def write_results(table: pd.DataFrame, path, fmt: str = 'csv', config: Optional[dict] = None) -> Path:
    """Write the result table as CSV or as JSON with a config echo"""
    if fmt not in ('csv', 'json'):
        raise ConfigError(f"Unknown format '{fmt}', expected csv or json")
    path = Path(path)
    table = table.reindex(columns=RESULT_COLUMNS)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        if fmt == 'csv':
            table.to_csv(path, index=False)
        else:
            payload = {'config': config or {}, 'rows': table.to_dict(orient='records')}
            with open(path, 'w', encoding='utf-8') as handle:
                json.dump(payload, handle, indent=2, default=_to_native)
    except OSError as e:
        logger.error(f"❌ Could not write results to {path}: {e}")
        raise ResultsIOError(f"Could not write results to {path}: {e}") from e
    logger.info(f"💾 Results saved to: {path}")
    return path


def read_results(path) -> pd.DataFrame:
    path = Path(path)
    try:
        if path.suffix == '.json':
            with open(path, encoding='utf-8') as handle:
                payload = json.load(handle)
            return pd.DataFrame(payload['rows'], columns=RESULT_COLUMNS)
        return pd.read_csv(path)
    except OSError as e:
        raise ResultsIOError(f"Could not read results from {path}: {e}") from e


SPEC_KEYS = ('axis_name', 'axis_values', 'detectors', 'selections', 'trials', 'scenario_id', 'snr_db', 'mode', 'scale')


def parse_config(path=None, overrides: Optional[dict] = None, scale: str = 'full') -> Tuple[SystemConfig, SweepSpec]:
    """
    Build the scenario and sweep from a JSON file and flag overrides.

    Flags override the file, None-valued flags are ignored and unknown keys
    are rejected. Missing P and trials come from the scale preset, and
    group sizes left unset are clamped to the number of users.
    """
    values = {}
    if path is not None:
        try:
            with open(path, encoding='utf-8') as handle:
                values.update(json.load(handle))
        except OSError as e:
            raise ResultsIOError(f"Could not read config {path}: {e}") from e
        except json.JSONDecodeError as e:
            raise ConfigError(f"Config {path} is not valid JSON: {e}") from e
    values.update({k: v for k, v in (overrides or {}).items() if v is not None})

    config_keys = set(SystemConfig.field_names())
    unknown = sorted(set(values) - config_keys - set(SPEC_KEYS))
    if unknown:
        raise ConfigError(f"Unknown configuration keys: {', '.join(unknown)}")

    scale = values.pop('scale', scale)
    if scale not in SCALES:
        raise ConfigError(f"Unknown scale '{scale}', expected one of {tuple(SCALES)}")
    preset = SCALES[scale]
    mode = values.pop('mode', 'cooperative')
    if mode not in ('cooperative', 'direct'):
        raise ConfigError(f"Unknown mode '{mode}', expected cooperative or direct")

    config_values = {k: values[k] for k in config_keys if k in values}
    config_values.setdefault('P', preset['P'])
    if mode == 'direct':
        config_values['L'] = 0
    if 'snr_db' in values and values.get('axis_name', 'snr_db') == 'snr_db' and 'noise_var' not in config_values:
        config_values['noise_var'] = snr_db_to_noise_var(values['snr_db'])
    if 'power_profile_db' in config_values and config_values['power_profile_db'] is not None:
        config_values['power_profile_db'] = tuple(config_values['power_profile_db'])
    config = SystemConfig.for_users(**config_values)

    spec_values = {k: values[k] for k in SPEC_KEYS if k in values and k not in ('mode', 'scale')}
    spec_values.setdefault('trials', preset['trials'])
    for key in ('axis_values', 'detectors', 'selections'):
        if key in spec_values:
            spec_values[key] = tuple(spec_values[key])
    spec = SweepSpec(config=config, **spec_values)
    return config, spec


# Desk-scale presets of the experiments: overrides, axis and compared detectors
FIGURE_PRESETS = {
    'noncoop_glsic': {
        'config': {'N': 32, 'K': 20, 'L': 0, 'channel_model': 'rayleigh', 'L_b': 1, 'sic_branches': 4},
        'axis_name': 'snr_db',
        'detectors': ('MF', 'SIC', 'MB-SIC', 'MMSE', 'GL-SIC'),
        'selections': ('none',),
    },
    'noncoop_glpic': {
        'config': {'N': 32, 'K': 20, 'L': 0, 'channel_model': 'rayleigh', 'n_q': 3},
        'axis_name': 'snr_db',
        'detectors': ('MF', 'SIC', 'PIC', 'MMSE', 'GL-PIC'),
        'selections': ('none',),
    },
    'coop_selection_snr': {
        'config': {'N': 16, 'K': 10, 'L': 6},
        'axis_name': 'snr_db',
        'detectors': ('GL-SIC', 'GL-PIC'),
        'selections': ('none', 'standard', 'proposed', 'exhaustive'),
    },
    'coop_selection_users': {
        'config': {'N': 16, 'K': 10, 'L': 6},
        'axis_name': 'users',
        'axis_values': (2, 4, 6, 8, 10, 12, 14, 16),
        'detectors': ('GL-SIC', 'GL-PIC'),
        'selections': ('proposed', 'exhaustive'),
    },
    'coop_detectors': {
        'config': {'N': 16, 'K': 10, 'L': 6},
        'axis_name': 'snr_db',
        'detectors': ('SU', 'GL-SIC', 'MB-SIC', 'GL-PIC', 'MMSE', 'SIC', 'PIC'),
        'selections': ('proposed',),
    },
}


def figure_spec(name: str, scale: str = 'desk', seed: int = 2024, **overrides) -> SweepSpec:
    """SweepSpec of a named experiment preset"""
    if name not in FIGURE_PRESETS:
        raise ConfigError(f"Unknown figure preset '{name}', expected one of {tuple(FIGURE_PRESETS)}")
    preset = FIGURE_PRESETS[name]
    config = SystemConfig(P=SCALES[scale]['P'], seed=seed, **preset['config'])
    spec = SweepSpec(
        config=config,
        axis_name=preset['axis_name'],
        axis_values=preset.get('axis_values', DEFAULT_SNR_AXIS),
        detectors=preset['detectors'],
        selections=preset['selections'],
        trials=SCALES[scale]['trials'],
        scenario_id=name,
    )
    return replace(spec, **overrides) if overrides else spec
