# src/config.py - Unified configuration for the cooperative CDMA simulator
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path
from typing import Optional, Tuple

import numpy as np

from src.exceptions import ConfigError

# Project root directory
PROJECT_ROOT = Path(__file__).parent.parent

# Reports and outputs
RESULTS_DIR = PROJECT_ROOT / 'results'
FIGURE_DATA_DIR = RESULTS_DIR / 'figures'

# Detector and selection names understood by the dispatchers
DETECTOR_NAMES = ('MF', 'SIC', 'PIC', 'MMSE', 'ML', 'GL-SIC', 'GL-SIC-MB', 'GL-PIC', 'MB-SIC', 'SU')
SELECTION_NAMES = ('none', 'standard', 'proposed', 'exhaustive')
MODULATIONS = ('BPSK', 'QPSK')
CHANNEL_MODELS = ('uniform', 'rayleigh')

# Channel settings
POWER_PROFILE_DB = (0.0, -3.0, -6.0)
PROFILE_STEP_DB = -3.0

# Enumeration guards
ML_MAX_BITS = 20
EXHAUSTIVE_MAX_RELAYS = 20

# Cooperative scenario of the BER-versus-SNR experiments
REFERENCE_SCENARIO = {
    'N': 16,
    'K': 10,
    'L': 6,
    'L_p': 3,
    'd_th': 0.25,
    'n': 2,
    'n_q': 3,
    'L_b': 1,
    'pic_iters': 3,
    'sic_branches': 4,
}

# Monte Carlo scale presets: trials x symbols per packet
FULL_SCALE = {'trials': 300, 'P': 1000}
DESK_SCALE = {'trials': 50, 'P': 200}
SCALES = {'full': FULL_SCALE, 'desk': DESK_SCALE}

# SNR axis in dB
DEFAULT_SNR_AXIS = tuple(float(v) for v in np.arange(-5.0, 20.0 + 1e-9, 2.5))
DEFAULT_USER_SWEEP_SNR = 15.0

# Result table schema
RESULT_COLUMNS = [
    'scenario_id', 'axis_name', 'axis_value', 'detector', 'selection',
    'K', 'L', 'N', 'L_p', 'd_th', 'n', 'n_q', 'trials', 'bits', 'errors', 'ber', 'seed',
]


def snr_db_to_noise_var(snr_db: float) -> float:
    """SNR(dB) = 10 log10(1/sigma^2) for unit received energy per user"""
    return float(10.0 ** (-float(snr_db) / 10.0))


def noise_var_to_snr_db(noise_var: float) -> float:
    if noise_var <= 0:
        return float('inf')
    return float(-10.0 * np.log10(noise_var))


def default_profile(L_p: int) -> Tuple[float, ...]:
    """The 0/-3/-6 dB profile, extended by -3 dB per extra path"""
    if L_p <= len(POWER_PROFILE_DB):
        return POWER_PROFILE_DB[:L_p]
    return tuple(PROFILE_STEP_DB * j for j in range(L_p))


@dataclass(frozen=True)
class SystemConfig:
    """All scalars of one simulated scenario.

    M is derived as N + L_p - 1 when omitted. L = 0 describes a
    non-cooperative system (direct link only).
    """
    K: int = REFERENCE_SCENARIO['K']
    L: int = REFERENCE_SCENARIO['L']
    N: int = REFERENCE_SCENARIO['N']
    L_p: int = REFERENCE_SCENARIO['L_p']
    M: Optional[int] = None
    P: int = FULL_SCALE['P']
    noise_var: float = snr_db_to_noise_var(10.0)
    d_th: float = REFERENCE_SCENARIO['d_th']
    n: int = REFERENCE_SCENARIO['n']
    n_q: int = REFERENCE_SCENARIO['n_q']
    L_b: int = REFERENCE_SCENARIO['L_b']
    pic_iters: int = REFERENCE_SCENARIO['pic_iters']
    sic_branches: Optional[int] = None
    seed: int = 2024
    modulation: str = 'BPSK'
    power_profile_db: Optional[Tuple[float, ...]] = None
    channel_model: str = 'uniform'
    include_direct: bool = True

    def __post_init__(self):
        if self.N < 1:
            raise ConfigError(f"Spreading gain N must be >= 1, got {self.N}")
        if not 1 <= self.L_p < self.N:
            raise ConfigError(f"Need 1 <= L_p < N, got L_p={self.L_p}, N={self.N}")
        expected_m = self.N + self.L_p - 1
        if self.M is None:
            object.__setattr__(self, 'M', expected_m)
        elif self.M != expected_m:
            raise ConfigError(f"M must equal N + L_p - 1 = {expected_m}, got {self.M}")
        if self.K < 1:
            raise ConfigError(f"K must be >= 1, got {self.K}")
        if self.L < 0:
            raise ConfigError(f"L must be >= 0, got {self.L}")
        if self.P < 1:
            raise ConfigError(f"Packet length P must be >= 1, got {self.P}")
        if self.noise_var < 0:
            raise ConfigError(f"noise_var must be >= 0, got {self.noise_var}")
        if self.d_th < 0:
            raise ConfigError(f"d_th must be >= 0, got {self.d_th}")
        if not 1 <= self.n <= self.K:
            raise ConfigError(f"Need 1 <= n <= K, got n={self.n}, K={self.K}")
        if not 0 <= self.n_q <= self.K:
            raise ConfigError(f"Need 0 <= n_q <= K, got n_q={self.n_q}, K={self.K}")
        if not 1 <= self.L_b <= self.K + 1:
            raise ConfigError(f"Need 1 <= L_b <= K + 1, got L_b={self.L_b}")
        if self.sic_branches is None:
            object.__setattr__(self, 'sic_branches', min(REFERENCE_SCENARIO['sic_branches'], self.K + 1))
        if not 1 <= self.sic_branches <= self.K + 1:
            raise ConfigError(f"Need 1 <= sic_branches <= K + 1, got {self.sic_branches}")
        if self.pic_iters < 1:
            raise ConfigError(f"pic_iters must be >= 1, got {self.pic_iters}")
        if self.modulation not in MODULATIONS:
            raise ConfigError(f"Unknown modulation '{self.modulation}', expected one of {MODULATIONS}")
        if self.channel_model not in CHANNEL_MODELS:
            raise ConfigError(f"Unknown channel model '{self.channel_model}', expected one of {CHANNEL_MODELS}")

        profile = self.power_profile_db
        if profile is None:
            profile = default_profile(self.L_p)
        profile = tuple(float(p) for p in profile)
        if len(profile) != self.L_p:
            raise ConfigError(f"Power profile has {len(profile)} taps, L_p is {self.L_p}")
        object.__setattr__(self, 'power_profile_db', profile)

    @property
    def snr_db(self) -> float:
        return noise_var_to_snr_db(self.noise_var)

    @property
    def cooperative(self) -> bool:
        return self.L > 0

    def with_snr(self, snr_db: float) -> 'SystemConfig':
        return replace(self, noise_var=snr_db_to_noise_var(snr_db))

    def with_users(self, K: int) -> 'SystemConfig':
        """Change K, clamping group sizes and branch counts that depend on it"""
        return replace(
            self,
            K=int(K),
            n=min(self.n, int(K)),
            n_q=min(self.n_q, int(K)),
            L_b=min(self.L_b, int(K) + 1),
            sic_branches=min(self.sic_branches, int(K) + 1),
        )

    def to_dict(self) -> dict:
        data = asdict(self)
        data['power_profile_db'] = list(self.power_profile_db)
        return data

    @classmethod
    def for_users(cls, K: int = REFERENCE_SCENARIO['K'], **values) -> 'SystemConfig':
        """Build a config, clamping the group sizes left unset to what K users allow"""
        values.setdefault('n', min(REFERENCE_SCENARIO['n'], K))
        values.setdefault('n_q', min(REFERENCE_SCENARIO['n_q'], K))
        values.setdefault('L_b', min(REFERENCE_SCENARIO['L_b'], K + 1))
        return cls(K=K, **values)

    @classmethod
    def field_names(cls) -> Tuple[str, ...]:
        return tuple(f.name for f in fields(cls))


def ensure_directories():
    """Create output directories if they don't exist"""
    for directory in (RESULTS_DIR, FIGURE_DATA_DIR):
        directory.mkdir(parents=True, exist_ok=True)
