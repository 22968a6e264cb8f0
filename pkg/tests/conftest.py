# tests/conftest.py - Shared fixtures
import numpy as np
import pytest
from scipy.linalg import hadamard

from src.config import SystemConfig
from src.constellation import Constellation
from src.signal_model import LinkSignatures, draw_scenario


@pytest.fixture
def bpsk():
    return Constellation.from_name('BPSK')


@pytest.fixture
def qpsk():
    return Constellation.from_name('QPSK')


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def orthogonal_signatures(K, N=16, amplitudes=None):
    """Walsh-Hadamard columns with unit energy, optionally scaled per user"""
    H = hadamard(N)[:K].T.astype(complex) / np.sqrt(N)
    if amplitudes is not None:
        H = H * np.asarray(amplitudes)
    return H


def random_signatures(K, rng, N=16, L_p=3):
    """Direct-link signatures of a random non-cooperative scenario"""
    config = SystemConfig(K=K, L=0, N=N, L_p=L_p, n=min(2, K), n_q=min(3, K))
    return draw_scenario(config, rng).links.sd


def orthogonal_links(K, L, N=16):
    """Noise-free friendly links: every hop uses the same orthogonal signatures"""
    H = orthogonal_signatures(K, N)
    return LinkSignatures(sd=H, sr=np.stack([H] * L), rd=np.stack([H] * L))


@pytest.fixture
def small_config():
    return SystemConfig(K=4, L=3, N=16, L_p=3, P=20, n=2, n_q=2, noise_var=0.1, seed=7)
