# src/cross_layer.py - Two-phase cooperative pipeline: relay detection, selection, joint detection
import logging
from dataclasses import dataclass
from typing import Union

import numpy as np

from src.config import DETECTOR_NAMES, SystemConfig
from src.constellation import Constellation
from src.detectors import detect
from src.exceptions import ConfigError
from src.relay_selection import RelaySet, select_relays
from src.signal_model import (
    LinkSignatures, Packet, Scenario, complex_noise, draw_packet, draw_scenario,
    selected_relay_signatures, stack_destination, stacked_signatures, synthesize_hop, synthesize_relay_hop,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PhaseOneResult:
    relay_decisions: np.ndarray     # (L, K, P)
    relay_observations: np.ndarray  # (L, M, P)


@dataclass(frozen=True)
class PacketState:
    """Everything drawn for one packet before relay selection"""
    config: SystemConfig
    detector: str
    constellation: Constellation
    scenario: Scenario
    packet: Packet
    y_sd: np.ndarray
    phase_one: PhaseOneResult
    rd_noise: np.ndarray


@dataclass(frozen=True)
class PipelineOutput:
    destination_decisions: np.ndarray
    selected_set: RelaySet
    bits: int
    bit_errors: int
    relay_bits: int
    relay_bit_errors: int

    @property
    def ber(self) -> float:
        return self.bit_errors / self.bits if self.bits else 0.0


def count_bit_errors(decisions: np.ndarray, packet_bits: np.ndarray, constellation: Constellation) -> int:
    return int(np.count_nonzero(constellation.demodulate(decisions) != packet_bits))


def phase1_detect(relay_observations: np.ndarray, detector_choice: str, config: SystemConfig,
                  links: LinkSignatures, constellation: Constellation,
                  reference: np.ndarray = None) -> PhaseOneResult:
    """Each relay detects all K users from its own source-relay observation"""
    if detector_choice not in DETECTOR_NAMES:
        raise ConfigError(f"Unknown detector '{detector_choice}', expected one of {DETECTOR_NAMES}")
    relay_observations = np.asarray(relay_observations)
    decisions = [
        detect(detector_choice, links.sr[l], relay_observations[l], constellation, config, reference=reference)
        for l in range(links.num_relays)
    ]
    K = links.num_users
    stacked = np.stack(decisions) if decisions else np.zeros((0, K) + relay_observations.shape[2:], complex)
    return PhaseOneResult(relay_decisions=stacked, relay_observations=relay_observations)


def simulate_phase_one(config: SystemConfig, detector_choice: str, rng: np.random.Generator) -> PacketState:
    """
    Draw one packet and run the relays.

    Every random quantity of the packet, the destination noise included, is
    drawn here so that several selections can complete the same packet.
    """
    constellation = Constellation.from_name(config.modulation)
    scenario = draw_scenario(config, rng)
    links = scenario.links
    packet = draw_packet(config.K, config.P, constellation, rng)
    y_sd = synthesize_hop(links.sd, packet.symbols, config.noise_var, rng)
    y_sr = np.stack([
        synthesize_hop(links.sr[l], packet.symbols, config.noise_var, rng) for l in range(config.L)
    ]) if config.L else np.zeros((0, config.M, config.P), complex)
    rd_noise = complex_noise((config.M, config.P), config.noise_var, rng)

    phase_one = phase1_detect(y_sr, detector_choice, config, links, constellation, reference=packet.symbols)
    return PacketState(
        config=config,
        detector=detector_choice,
        constellation=constellation,
        scenario=scenario,
        packet=packet,
        y_sd=y_sd,
        phase_one=phase_one,
        rd_noise=rd_noise,
    )


def forward_to_destination(links: LinkSignatures, phase_one: PhaseOneResult, relay_set: RelaySet,
                           noise: np.ndarray, y_sd: np.ndarray):
    """Return the stacked destination observation and the stacked signatures it is detected with"""
    members = list(relay_set.members)
    y_rd = synthesize_relay_hop(
        selected_relay_signatures(links, members), phase_one.relay_decisions[members], noise_var=0.0, noise=noise)
    y_d = stack_destination(y_sd, y_rd)
    return y_d, stacked_signatures(links, members)


def complete_packet(state: PacketState, selection: Union[str, RelaySet]) -> PipelineOutput:
    """Select relays on the true channels, forward and detect at the destination"""
    config = state.config
    links = state.scenario.links
    constellation = state.constellation
    reference = state.packet.symbols

    if not config.cooperative:
        relay_set = RelaySet.direct_only()
        decisions = detect(state.detector, links.sd, state.y_sd, constellation, config, reference=reference)
    else:
        if isinstance(selection, RelaySet):
            relay_set = selection
        else:
            relay_set = select_relays(selection, links, config.noise_var, config.include_direct)
        y_d, H_d = forward_to_destination(links, state.phase_one, relay_set, state.rd_noise, state.y_sd)
        decisions = detect(state.detector, H_d, y_d, constellation, config, reference=reference)

    relay_errors = sum(
        count_bit_errors(state.phase_one.relay_decisions[l], state.packet.bits, constellation)
        for l in range(config.L)
    )
    return PipelineOutput(
        destination_decisions=decisions,
        selected_set=relay_set,
        bits=int(state.packet.bits.size),
        bit_errors=count_bit_errors(decisions, state.packet.bits, constellation),
        relay_bits=int(state.packet.bits.size) * config.L,
        relay_bit_errors=relay_errors,
    )


def run_crosslayer(config: SystemConfig, detector_choice: str, selection_choice: Union[str, RelaySet],
                   rng: np.random.Generator) -> PipelineOutput:
    output = complete_packet(simulate_phase_one(config, detector_choice, rng), selection_choice)
    logger.debug("Packet done: relays %s, %d/%d bit errors",
                 output.selected_set.members, output.bit_errors, output.bits)
    return output
