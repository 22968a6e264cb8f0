# src/relay_selection.py - SINR-driven relay subset selection
"""
Relay selection for the cooperative uplink.

Relays are indexed from 0. A relay set is scored by its set SINR, the
minimum over users of the RAKE output SINR on the stacked direct and
relay-to-destination channel.
"""
import logging
from dataclasses import dataclass, field
from itertools import combinations
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from src.config import EXHAUSTIVE_MAX_RELAYS, SELECTION_NAMES, SystemConfig
from src.exceptions import ConfigError, InstanceTooLargeError, RelaySelectionError
from src.signal_model import LinkSignatures, draw_scenario, stacked_signatures

logger = logging.getLogger(__name__)

AUDIT_TOLERANCE = 1e-12


@dataclass(frozen=True)
class SinrReport:
    per_user: np.ndarray
    set_sinr: float
    members: Tuple[int, ...]


@dataclass(frozen=True)
class RelaySet:
    """Selected relays, their set SINR and every set scored on the way"""
    members: Tuple[int, ...]
    sinr: float
    history: Tuple[Tuple[Tuple[int, ...], float], ...] = field(default=(), repr=False)

    @property
    def evaluations(self) -> int:
        return len(self.history)

    @classmethod
    def direct_only(cls) -> 'RelaySet':
        return cls(members=(), sinr=float('nan'))


class _SetScorer:
    """Scores relay sets and keeps the evaluation history"""

    def __init__(self, links: LinkSignatures, noise_var: float, include_direct: bool):
        self.links = links
        self.noise_var = noise_var
        self.include_direct = include_direct
        self.history: List[Tuple[Tuple[int, ...], float]] = []

    def __call__(self, members: Sequence[int]) -> float:
        members = tuple(members)
        report = sinr_set(members, self.links, self.noise_var, self.include_direct)
        self.history.append((members, report.set_sinr))
        return report.set_sinr

    def result(self, members, sinr) -> RelaySet:
        return RelaySet(members=tuple(members), sinr=float(sinr), history=tuple(self.history))


def user_channel_for_set(members: Sequence[int], q: int, links: LinkSignatures,
                         include_direct: bool = True) -> np.ndarray:
    """Stacked 2M channel of user q: direct link over the sum of the set's relay links"""
    if not 0 <= q < links.num_users:
        raise RelaySelectionError(f"User index {q} outside 0..{links.num_users - 1}")
    return stacked_signatures(links, members, include_direct)[:, q]


def channel_power(h: np.ndarray) -> float:
    return float(np.real(np.vdot(h, h)))


def sinr_user(h_q: np.ndarray, interferers: np.ndarray, noise_var: float) -> float:
    """RAKE output SINR |h^H h|^2 / (sum |h^H h_k|^2 + sigma^2 h^H h); interferers are columns"""
    if noise_var < 0:
        raise ConfigError(f"noise_var must be >= 0, got {noise_var}")
    power = channel_power(h_q)
    if power == 0:
        return 0.0
    interferers = np.asarray(interferers)
    if interferers.ndim == 1:
        interferers = interferers[:, None]
    interference = float(np.sum(np.abs(h_q.conj() @ interferers) ** 2))
    denominator = interference + noise_var * power
    if denominator == 0:
        return float('inf')
    return power ** 2 / denominator


def sinr_set(members: Sequence[int], links: LinkSignatures, noise_var: float,
             include_direct: bool = True) -> SinrReport:
    members = tuple(members)
    if not members:
        raise RelaySelectionError("The set SINR is defined for nonempty relay sets")
    H = stacked_signatures(links, members, include_direct)
    K = H.shape[1]
    per_user = np.array([
        sinr_user(H[:, q], np.delete(H, q, axis=1), noise_var) for q in range(K)
    ])
    return SinrReport(per_user=per_user, set_sinr=float(per_user.min()), members=members)


def relay_channel_powers(links: LinkSignatures) -> np.ndarray:
    """Relay-to-destination channel power of each relay, summed over users"""
    return np.array([channel_power(links.rd[l].ravel()) for l in range(links.num_relays)])


def _require_relays(links: LinkSignatures):
    if links.num_relays < 1:
        raise RelaySelectionError("Relay selection needs at least one relay")


def select_all(links: LinkSignatures, noise_var: float, include_direct: bool = True) -> RelaySet:
    _require_relays(links)
    scorer = _SetScorer(links, noise_var, include_direct)
    members = tuple(range(links.num_relays))
    return scorer.result(members, scorer(members))


def select_standard_greedy(links: LinkSignatures, noise_var: float, include_direct: bool = True) -> RelaySet:
    """Drop the weakest relay link while doing so raises the set SINR"""
    _require_relays(links)
    scorer = _SetScorer(links, noise_var, include_direct)
    powers = relay_channel_powers(links)
    current = tuple(range(links.num_relays))
    current_sinr = scorer(current)

    while len(current) > 1:
        weakest = min(current, key=lambda l: (powers[l], l))
        candidate = tuple(l for l in current if l != weakest)
        sinr = scorer(candidate)
        if sinr > current_sinr:
            current, current_sinr = candidate, sinr
        else:
            break
    return scorer.result(current, current_sinr)


def select_proposed_greedy(links: LinkSignatures, noise_var: float, include_direct: bool = True) -> RelaySet:
    """
    Stagewise greedy: try every single-relay removal, keep the best one if it
    raises the set SINR, and stop otherwise or once one relay is left.
    """
    _require_relays(links)
    scorer = _SetScorer(links, noise_var, include_direct)
    current = tuple(range(links.num_relays))
    current_sinr = scorer(current)

    while len(current) > 1:
        best_set, best_sinr = None, None
        for l in current:
            candidate = tuple(m for m in current if m != l)
            sinr = scorer(candidate)
            if best_sinr is None or sinr > best_sinr:
                best_set, best_sinr = candidate, sinr
        if best_sinr > current_sinr:
            current, current_sinr = best_set, best_sinr
        else:
            break
    return scorer.result(current, current_sinr)


def select_exhaustive(links: LinkSignatures, noise_var: float, include_direct: bool = True) -> RelaySet:
    """Best of all 2^L - 1 nonempty sets; ties go to smaller then lexicographically first sets"""
    _require_relays(links)
    L = links.num_relays
    if L > EXHAUSTIVE_MAX_RELAYS:
        raise InstanceTooLargeError(f"Exhaustive search over {L} relays exceeds the guard of {EXHAUSTIVE_MAX_RELAYS}")
    scorer = _SetScorer(links, noise_var, include_direct)
    best_set, best_sinr = None, None
    for size in range(1, L + 1):
        for candidate in combinations(range(L), size):
            sinr = scorer(candidate)
            if best_sinr is None or sinr > best_sinr:
                best_set, best_sinr = candidate, sinr
    return scorer.result(best_set, best_sinr)


SELECTORS = {
    'none': select_all,
    'standard': select_standard_greedy,
    'proposed': select_proposed_greedy,
    'exhaustive': select_exhaustive,
}


def select_relays(name: str, links: LinkSignatures, noise_var: float, include_direct: bool = True) -> RelaySet:
    if name not in SELECTION_NAMES:
        raise ConfigError(f"Unknown selection '{name}', expected one of {SELECTION_NAMES}")
    return SELECTORS[name](links, noise_var, include_direct)


@dataclass
class PropositionAudit:
    """Per-trial SINRs of the three selectors and the bound violation counts"""
    table: pd.DataFrame

    @property
    def trials(self) -> int:
        return len(self.table)

    @property
    def lower_violations(self) -> int:
        return int(self.table['standard_above_proposed'].sum())

    @property
    def upper_violations(self) -> int:
        return int(self.table['proposed_above_exhaustive'].sum())

    @property
    def lower_violation_fraction(self) -> float:
        return self.lower_violations / self.trials if self.trials else 0.0

    @property
    def max_proposed_evaluations(self) -> int:
        return int(self.table['proposed_evaluations'].max())

    def summary(self) -> dict:
        return {
            'trials': self.trials,
            'standard_above_proposed': self.lower_violations,
            'proposed_above_exhaustive': self.upper_violations,
            'lower_violation_fraction': self.lower_violation_fraction,
            'max_proposed_evaluations': self.max_proposed_evaluations,
        }


def _exceeds(a: float, b: float) -> bool:
    return a > b * (1.0 + AUDIT_TOLERANCE)


def audit_proposition(trials: int, scenario_generator: Callable[[int], Tuple[LinkSignatures, float]],
                      include_direct: bool = True) -> PropositionAudit:
    """Compare standard, proposed and exhaustive selection on random scenarios"""
    if trials < 1:
        raise ConfigError(f"The audit needs at least one trial, got {trials}")
    rows = []
    for t in range(trials):
        links, noise_var = scenario_generator(t)
        standard = select_standard_greedy(links, noise_var, include_direct)
        proposed = select_proposed_greedy(links, noise_var, include_direct)
        exhaustive = select_exhaustive(links, noise_var, include_direct)
        rows.append({
            'trial': t,
            'sinr_standard': standard.sinr,
            'sinr_proposed': proposed.sinr,
            'sinr_exhaustive': exhaustive.sinr,
            'proposed_evaluations': proposed.evaluations,
            'exhaustive_evaluations': exhaustive.evaluations,
            'standard_above_proposed': _exceeds(standard.sinr, proposed.sinr),
            'proposed_above_exhaustive': _exceeds(proposed.sinr, exhaustive.sinr),
        })
    audit = PropositionAudit(table=pd.DataFrame(rows))
    logger.info("🔍 Proposition audit over %d trials: %s", trials, audit.summary())
    return audit


def make_scenario_generator(config: SystemConfig, seed: Optional[int] = None) -> Callable[[int], Tuple[LinkSignatures, float]]:
    """Random link signatures per trial, seeded from (seed, trial)"""
    seed = config.seed if seed is None else seed

    def generate(trial: int):
        rng = np.random.default_rng([seed, trial])
        return draw_scenario(config, rng).links, config.noise_var

    return generate
