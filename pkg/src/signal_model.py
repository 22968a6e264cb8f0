# src/signal_model.py - Spreading, multipath channels and received-signal synthesis
"""
Chip-rate baseband model of a synchronous DS-CDMA uplink with relays.

A user's effective signature on a link is H_k = a * S_k @ h, where S_k is
the M x L_p convolution matrix of its spreading code and h the link's
L_p-tap channel. Each hop observation is y = sum_k H_k b_k + n.
"""
import logging
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.linalg import convolution_matrix

from src.config import SystemConfig
from src.constellation import Constellation
from src.exceptions import ConfigError, RelaySelectionError, ShapeMismatchError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class LinkChannel:
    taps: np.ndarray
    amplitude: float = 1.0


@dataclass(frozen=True)
class Packet:
    bits: np.ndarray      # (K, P * bits_per_symbol)
    symbols: np.ndarray   # (K, P)


@dataclass(frozen=True)
class LinkSignatures:
    """Effective signatures of every link: sd (M, K), sr and rd (L, M, K)"""
    sd: np.ndarray
    sr: np.ndarray
    rd: np.ndarray

    @property
    def window(self) -> int:
        return self.sd.shape[0]

    @property
    def num_users(self) -> int:
        return self.sd.shape[1]

    @property
    def num_relays(self) -> int:
        return self.rd.shape[0]


@dataclass(frozen=True)
class Scenario:
    codes: np.ndarray              # (K, N)
    signature_matrices: np.ndarray  # (K, M, L_p)
    h_sd: np.ndarray               # (K, L_p)
    h_sr: np.ndarray               # (L, K, L_p)
    h_rd: np.ndarray               # (L, K, L_p)
    amplitude: float
    links: LinkSignatures


def build_signature_matrix(code: np.ndarray, L_p: int) -> np.ndarray:
    """M x L_p matrix whose column j is the code shifted down by j chips"""
    code = np.asarray(code, dtype=float)
    if code.ndim != 1 or code.size < 1:
        raise ShapeMismatchError("Spreading code must be a nonempty 1-D sequence")
    if L_p < 1:
        raise ConfigError(f"L_p must be >= 1, got {L_p}")
    return convolution_matrix(code, L_p, mode='full')


def draw_spreading_codes(K: int, N: int, rng: np.random.Generator) -> np.ndarray:
    """Random +-1/sqrt(N) binary codes, one per row"""
    return rng.choice([-1.0, 1.0], size=(K, N)) / np.sqrt(N)


def draw_channel(profile_db: Sequence[float], rng: np.random.Generator,
                 model: str = 'uniform', amplitude: float = 1.0) -> LinkChannel:
    """
    Draw an L_p-tap channel following the dB power profile.

    'uniform' draws real and imaginary parts on [-1, 1] and normalizes each
    realization to unit power. 'rayleigh' draws Gaussian taps normalized by the
    profile's expected power, so realizations fade around unit power.
    """
    profile = np.asarray(profile_db, dtype=float)
    if profile.size == 0:
        raise ConfigError("Power profile must contain at least one tap")
    scale = np.sqrt(10.0 ** (profile / 10.0))

    if model == 'uniform':
        taps = (rng.uniform(-1.0, 1.0, profile.size) + 1j * rng.uniform(-1.0, 1.0, profile.size)) * scale
        taps = taps / np.linalg.norm(taps)
    elif model == 'rayleigh':
        taps = (rng.standard_normal(profile.size) + 1j * rng.standard_normal(profile.size)) / np.sqrt(2.0)
        taps = taps * scale / np.sqrt(np.sum(scale ** 2))
    else:
        raise ConfigError(f"Unknown channel model '{model}'")
    return LinkChannel(taps=taps, amplitude=float(amplitude))


def effective_signature(S: np.ndarray, channel: LinkChannel) -> np.ndarray:
    if S.shape[1] != channel.taps.shape[0]:
        raise ShapeMismatchError(
            f"Signature matrix has {S.shape[1]} columns, channel has {channel.taps.shape[0]} taps")
    return channel.amplitude * (S @ channel.taps)


def link_amplitude(L: int) -> float:
    """Equal power over the 2L + 1 links of a user; the selected relays split the L relay-to-destination shares"""
    return 1.0 / np.sqrt(2 * L + 1)


def complex_noise(shape, noise_var: float, rng: np.random.Generator) -> np.ndarray:
    """Circularly symmetric CN(0, noise_var) samples"""
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) * np.sqrt(noise_var / 2.0)


def synthesize_hop(signatures: np.ndarray, symbols: np.ndarray, noise_var: float,
                   rng: Optional[np.random.Generator] = None,
                   noise: Optional[np.ndarray] = None) -> np.ndarray:
    """y = H b + n for symbols of shape (K,) or (K, P)"""
    signatures = np.atleast_2d(signatures)
    symbols = np.asarray(symbols)
    if signatures.shape[1] != symbols.shape[0]:
        raise ShapeMismatchError(
            f"{signatures.shape[1]} signatures for {symbols.shape[0]} user symbols")
    clean = signatures @ symbols
    if noise is None:
        noise = complex_noise(clean.shape, noise_var, rng) if noise_var > 0 else np.zeros(clean.shape, complex)
    elif noise.shape != clean.shape:
        raise ShapeMismatchError(f"Noise shape {noise.shape} does not match {clean.shape}")
    return clean + noise


def synthesize_relay_hop(relay_signatures: np.ndarray, relay_decisions: np.ndarray, noise_var: float,
                         rng: Optional[np.random.Generator] = None,
                         noise: Optional[np.ndarray] = None) -> np.ndarray:
    """
    Superpose the forwarded decisions of the selected relays.

    relay_signatures is (|set|, M, K) and relay_decisions (|set|, K[, P]);
    an empty set yields the noise alone.
    """
    relay_signatures = np.asarray(relay_signatures)
    relay_decisions = np.asarray(relay_decisions)
    if relay_signatures.ndim != 3:
        raise ShapeMismatchError("Relay signatures must be shaped (relays, M, K)")
    if relay_signatures.shape[0] != relay_decisions.shape[0]:
        raise ShapeMismatchError(
            f"{relay_signatures.shape[0]} relay signature sets for {relay_decisions.shape[0]} decision sets")

    out_shape = (relay_signatures.shape[1],) + relay_decisions.shape[2:]
    clean = np.zeros(out_shape, dtype=complex)
    for H_l, b_l in zip(relay_signatures, relay_decisions):
        clean = clean + H_l @ b_l

    if noise is None:
        noise = complex_noise(out_shape, noise_var, rng) if noise_var > 0 else np.zeros(out_shape, complex)
    elif noise.shape != out_shape:
        raise ShapeMismatchError(f"Noise shape {noise.shape} does not match {out_shape}")
    return clean + noise


def stack_destination(y_sd: np.ndarray, y_rd: np.ndarray) -> np.ndarray:
    y_sd = np.asarray(y_sd)
    y_rd = np.asarray(y_rd)
    if y_sd.shape != y_rd.shape:
        raise ShapeMismatchError(f"Cannot stack {y_sd.shape} over {y_rd.shape}")
    return np.concatenate([y_sd, y_rd], axis=0)


def relay_power_scale(num_relays: int, num_selected: int) -> float:
    """Amplitude gain of a selected relay when the selected relays share the relay-to-destination power of all relays"""
    if not 0 <= num_selected <= num_relays:
        raise RelaySelectionError(f"Cannot select {num_selected} of {num_relays} relays")
    return float(np.sqrt(num_relays / num_selected)) if num_selected else 1.0


def selected_relay_signatures(links: LinkSignatures, members: Sequence[int]) -> np.ndarray:
    """(|set|, M, K) relay-to-destination signatures of the set at their transmit power"""
    members = list(members)
    L = links.num_relays
    for l in members:
        if not 0 <= l < L:
            raise RelaySelectionError(f"Relay index {l} outside 0..{L - 1}")
    return links.rd[members] * relay_power_scale(L, len(members))


def stacked_signatures(links: LinkSignatures, members: Sequence[int], include_direct: bool = True) -> np.ndarray:
    """[H_sd ; sum over the set of the scaled H_rd] as a (2M, K) matrix"""
    relays = selected_relay_signatures(links, members)
    top = links.sd if include_direct else np.zeros_like(links.sd)
    bottom = relays.sum(axis=0) if len(relays) else np.zeros_like(links.sd)
    return np.vstack([top, bottom])


def draw_packet(K: int, P: int, constellation: Constellation, rng: np.random.Generator) -> Packet:
    bits = rng.integers(0, 2, size=(K, P * constellation.bits_per_symbol))
    return Packet(bits=bits, symbols=constellation.modulate(bits))


def draw_scenario(config: SystemConfig, rng: np.random.Generator) -> Scenario:
    """Codes, channels and effective signatures of every link for one packet"""
    K, L, L_p = config.K, config.L, config.L_p
    codes = draw_spreading_codes(K, config.N, rng)
    S = np.stack([build_signature_matrix(code, L_p) for code in codes])
    a = link_amplitude(L)

    def draw_link():
        taps = np.empty((K, L_p), dtype=complex)
        sig = np.empty((config.M, K), dtype=complex)
        for k in range(K):
            ch = draw_channel(config.power_profile_db, rng, config.channel_model, a)
            taps[k] = ch.taps
            sig[:, k] = effective_signature(S[k], ch)
        return taps, sig

    h_sd, sd = draw_link()
    sr_links = [draw_link() for _ in range(L)]
    rd_links = [draw_link() for _ in range(L)]

    def stack(items, index, shape):
        return np.stack([item[index] for item in items]) if items else np.zeros(shape, dtype=complex)

    links = LinkSignatures(
        sd=sd,
        sr=stack(sr_links, 1, (0, config.M, K)),
        rd=stack(rd_links, 1, (0, config.M, K)),
    )
    logger.debug("Drew scenario K=%d L=%d M=%d", K, L, config.M)
    return Scenario(
        codes=codes,
        signature_matrices=S,
        h_sd=h_sd,
        h_sr=stack(sr_links, 0, (0, K, L_p)),
        h_rd=stack(rd_links, 0, (0, K, L_p)),
        amplitude=a,
        links=links,
    )
