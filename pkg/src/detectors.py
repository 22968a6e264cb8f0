# src/detectors.py - Multiuser detectors: baselines and greedy list-based cancellation
"""
Hard-decision multiuser detectors for y = H b + n.

Every detector accepts a single observation of shape (D,) or a packet of
shape (D, P) and returns decisions of shape (K,) or (K, P). Soft values are
always normalized by the RAKE gain before slicing, so the reliability
threshold d_th is measured in constellation units.
"""
import logging
from dataclasses import dataclass
from itertools import product
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.linalg import solve

from src.config import DETECTOR_NAMES, ML_MAX_BITS, SystemConfig
from src.constellation import Constellation
from src.exceptions import ConfigError, DetectionError, InstanceTooLargeError, ShapeMismatchError
from src.rake_frontend import RakeBank, power_ordering, rake_soft_outputs, residual_reordering

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CandidateList:
    """A full tentative decision vector and its residual ||y - H b||^2"""
    decisions: np.ndarray
    metric: float

    @classmethod
    def evaluate(cls, decisions: np.ndarray, signatures: np.ndarray, y: np.ndarray) -> 'CandidateList':
        decisions = np.array(decisions, dtype=complex)
        return cls(decisions=decisions, metric=residual_metric(y, signatures, decisions))

    def lex_key(self) -> Tuple[Tuple[float, float], ...]:
        return tuple((float(b.real), float(b.imag)) for b in self.decisions)


@dataclass(frozen=True)
class ReliabilityPartition:
    reliable: np.ndarray
    unreliable: np.ndarray
    distances: np.ndarray


@dataclass(frozen=True)
class DetectionOrdering:
    order: np.ndarray

    def __post_init__(self):
        order = np.asarray(self.order)
        if sorted(order.tolist()) != list(range(order.size)):
            raise ConfigError(f"{order.tolist()} is not a permutation")


def residual_metric(y: np.ndarray, signatures: np.ndarray, decisions: np.ndarray) -> float:
    r = y - signatures @ decisions
    return float(np.real(np.vdot(r, r)))


def _per_symbol(y: np.ndarray, detect_one: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
    y = np.asarray(y)
    if y.ndim == 1:
        return detect_one(y)
    return np.column_stack([detect_one(y[:, p]) for p in range(y.shape[1])])


def _check_length(bank: RakeBank, y: np.ndarray):
    if np.asarray(y).shape[0] != bank.length:
        raise ShapeMismatchError(f"Observation length {np.asarray(y).shape[0]} does not match {bank.length}")


# Slicer and reliability test

def slice_symbol(u_norm, constellation: Constellation):
    """Nearest constellation point; the BPSK tie at 0 resolves to +1"""
    symbols, _, _ = constellation.nearest(u_norm)
    return symbols


def is_reliable(u_norm, constellation: Constellation, d_th: float):
    """
    Return (reliable flag, distance to the nearest point).

    d_th = 0 disables the test: every estimate is reliable.
    """
    if d_th < 0:
        raise ConfigError(f"d_th must be >= 0, got {d_th}")
    _, _, distance = constellation.nearest(u_norm)
    if d_th == 0:
        return np.ones_like(distance, dtype=bool), distance
    return distance <= d_th, distance


def partition_reliability(u_norm: np.ndarray, constellation: Constellation, d_th: float,
                          users: Optional[Sequence[int]] = None) -> ReliabilityPartition:
    users = np.arange(len(u_norm)) if users is None else np.asarray(users, dtype=int)
    flags, distances = is_reliable(np.asarray(u_norm)[users], constellation, d_th)
    return ReliabilityPartition(reliable=users[flags], unreliable=users[~flags], distances=distances)


def ml_select(candidates: Sequence[CandidateList], signatures: Optional[np.ndarray] = None,
              y: Optional[np.ndarray] = None) -> CandidateList:
    """Minimum-residual candidate; equal metrics go to the lexicographically smaller vector.

    When signatures and y are given the metrics are recomputed from them.
    """
    if not candidates:
        raise DetectionError("Cannot select from an empty candidate list")
    if signatures is not None and y is not None:
        candidates = [CandidateList.evaluate(c.decisions, signatures, y) for c in candidates]
    return min(candidates, key=lambda c: (c.metric, c.lex_key()))


# Baselines

def detect_mf(bank: RakeBank, y: np.ndarray, constellation: Constellation) -> np.ndarray:
    return slice_symbol(rake_soft_outputs(bank, y).normalized(), constellation)


def _slice_and_cancel(bank: RakeBank, residual: np.ndarray, k: int, decisions: np.ndarray,
                      constellation: Constellation) -> np.ndarray:
    b = slice_symbol(bank.soft(residual, k), constellation)
    decisions[k] = b
    return residual - bank.filters[:, k] * b


def _sic_one(bank, y, constellation, order):
    decisions = np.zeros(bank.num_users, dtype=complex)
    residual = np.array(y, dtype=complex)
    for k in order:
        residual = _slice_and_cancel(bank, residual, k, decisions, constellation)
    return decisions


def detect_sic(bank: RakeBank, y: np.ndarray, constellation: Constellation,
               ordering: Optional[Sequence[int]] = None) -> np.ndarray:
    """Conventional SIC in decreasing power order with a RAKE at each stage"""
    _check_length(bank, y)
    order = power_ordering(bank) if ordering is None else np.asarray(ordering)
    return _per_symbol(y, lambda col: _sic_one(bank, col, constellation, order))


def detect_pic(bank: RakeBank, y: np.ndarray, constellation: Constellation,
               initial_decisions: Optional[np.ndarray] = None, iters: int = 3) -> np.ndarray:
    """Multi-iteration PIC; all users are re-sliced from the previous iteration at once"""
    if iters < 1:
        raise ConfigError(f"PIC needs at least one iteration, got {iters}")
    _check_length(bank, y)
    H = bank.filters
    cross = H.conj().T @ H
    np.fill_diagonal(cross, 0)
    matched = H.conj().T @ np.asarray(y)
    gains = bank.gains
    gains = gains.reshape((-1,) + (1,) * (matched.ndim - 1))

    b = detect_mf(bank, y, constellation) if initial_decisions is None else np.asarray(initial_decisions, dtype=complex)
    if b.shape != matched.shape:
        raise ShapeMismatchError(f"Initial decisions {b.shape} do not match {matched.shape}")
    safe = np.where(gains > 0, gains, 1.0)
    for _ in range(iters):
        z = matched - cross @ b
        b = slice_symbol(np.where(gains > 0, z / safe, 0.0), constellation)
    return b


def mmse_filter(signatures: np.ndarray, noise_var: float) -> np.ndarray:
    """W solving (H H^H + sigma^2 I) W = H"""
    H = np.asarray(signatures, dtype=complex)
    if noise_var <= 0:
        raise ConfigError("The MMSE filter needs noise_var > 0")
    A = H @ H.conj().T + noise_var * np.eye(H.shape[0])
    return solve(A, H, assume_a='pos')


def detect_mmse(signatures: np.ndarray, y: np.ndarray, constellation: Constellation,
                noise_var: float) -> np.ndarray:
    """
    Linear MMSE with bias removal by diag(W^H H).

    At noise_var = 0 the filter reduces to its zero-forcing limit, computed
    from the K x K Gram system.
    """
    H = np.asarray(signatures, dtype=complex)
    y = np.asarray(y)
    if y.shape[0] != H.shape[0]:
        raise ShapeMismatchError(f"Observation length {y.shape[0]} does not match {H.shape[0]}")
    if noise_var > 0:
        W = mmse_filter(H, noise_var)
        z = W.conj().T @ y
        bias = np.real(np.sum(W.conj() * H, axis=0))
    else:
        z = solve(H.conj().T @ H, H.conj().T @ y, assume_a='pos')
        bias = np.ones(H.shape[1])
    bias = bias.reshape((-1,) + (1,) * (z.ndim - 1))
    return slice_symbol(z / bias, constellation)


def ml_candidates(K: int, constellation: Constellation) -> np.ndarray:
    """All N_c^K vectors as columns, in lexicographic (real, imag) order"""
    if K * constellation.bits_per_symbol > ML_MAX_BITS:
        raise InstanceTooLargeError(
            f"ML over {constellation.size}^{K} vectors exceeds the {ML_MAX_BITS}-bit guard")
    points = constellation.lexicographic_points()
    return np.array(list(product(points, repeat=K)), dtype=complex).T


def detect_ml(signatures: np.ndarray, y: np.ndarray, constellation: Constellation) -> np.ndarray:
    H = np.asarray(signatures, dtype=complex)
    C = ml_candidates(H.shape[1], constellation)
    HC = H @ C

    def detect_one(col):
        metrics = np.sum(np.abs(col[:, None] - HC) ** 2, axis=0)
        return C[:, int(np.argmin(metrics))].copy()

    return _per_symbol(y, detect_one)


def detect_single_user(bank: RakeBank, y: np.ndarray, constellation: Constellation,
                       reference: np.ndarray) -> np.ndarray:
    """Interference-free reference: the other users' true symbols are removed first"""
    _check_length(bank, y)
    reference = np.asarray(reference, dtype=complex)
    residual = np.asarray(y) - bank.filters @ reference
    soft = rake_soft_outputs(bank, residual).normalized()
    gains = bank.gains.reshape((-1,) + (1,) * (reference.ndim - 1))
    return slice_symbol(np.where(gains > 0, soft + reference, soft), constellation)


# GL-SIC

def _finish_sic_by_stage(bank, residual, users, decisions, constellation, n):
    """Conventional SIC over users, n at a time, reordered on the residual at each stage"""
    remaining = list(users)
    while remaining:
        stage = residual_reordering(bank, residual, remaining)[:n]
        for k in stage:
            residual = _slice_and_cancel(bank, residual, int(k), decisions, constellation)
        stage_set = set(int(k) for k in stage)
        remaining = [k for k in remaining if k not in stage_set]
    return residual


def glsic_candidates(bank: RakeBank, y: np.ndarray, constellation: Constellation, d_th: float, n: int,
                     ordering: Optional[Sequence[int]] = None) -> List[CandidateList]:
    """
    Candidate lists of GL-SIC for a single observation.

    Users are taken n per stage in power order. The tree splits once, at the
    first unreliable user: every still-pending user of that stage is checked on
    the current residual, reliable ones are sliced and unreliable ones take
    every constellation value. Each branch then completes with stage-wise SIC.
    Without a split the single SIC list is returned.
    """
    K = bank.num_users
    if not 1 <= n <= K:
        raise ConfigError(f"Need 1 <= n <= K, got n={n}, K={K}")
    _check_length(bank, y)
    order = [int(k) for k in (power_ordering(bank) if ordering is None else ordering)]
    H = bank.filters
    decisions = np.zeros(K, dtype=complex)
    residual = np.array(y, dtype=complex)

    for start in range(0, K, n):
        stage = order[start:start + n]
        for pos, k in enumerate(stage):
            reliable, _ = is_reliable(bank.soft(residual, k), constellation, d_th)
            if reliable:
                residual = _slice_and_cancel(bank, residual, k, decisions, constellation)
                continue

            pending = stage[pos:]
            later = order[start + n:]
            soft = np.array([bank.soft(residual, j) for j in pending])
            flags, _ = is_reliable(soft, constellation, d_th)
            base = decisions.copy()
            for j, u, ok in zip(pending, soft, flags):
                if ok:
                    base[j] = slice_symbol(u, constellation)
            unreliable = [j for j, ok in zip(pending, flags) if not ok]

            candidates = []
            for values in product(constellation.points, repeat=len(unreliable)):
                b = base.copy()
                b[unreliable] = values
                branch_residual = residual - H[:, pending] @ b[pending]
                _finish_sic_by_stage(bank, branch_residual, later, b, constellation, n)
                candidates.append(CandidateList.evaluate(b, H, y))
            logger.debug("GL-SIC split at stage %d into %d branches", start // n, len(candidates))
            return candidates

    return [CandidateList.evaluate(decisions, H, y)]


def detect_glsic(bank: RakeBank, y: np.ndarray, constellation: Constellation, d_th: float, n: int,
                 ordering: Optional[Sequence[int]] = None) -> np.ndarray:
    def detect_one(col):
        candidates = glsic_candidates(bank, col, constellation, d_th, n, ordering)
        if len(candidates) == 1:
            return candidates[0].decisions
        return ml_select(candidates).decisions

    return _per_symbol(y, detect_one)


def branch_orderings(base: Sequence[int], L_b: int) -> List[DetectionOrdering]:
    """Base order, its cyclic right shifts, then the reverse order; first L_b of them"""
    base = np.asarray(base, dtype=int)
    K = base.size
    if not 1 <= L_b <= K + 1:
        raise ConfigError(f"Need 1 <= L_b <= K + 1, got L_b={L_b}, K={K}")
    family = [base]
    family += [base[np.roll(np.arange(K), shift)] for shift in range(1, K)]
    family.append(base[::-1])
    return [DetectionOrdering(order) for order in family[:L_b]]


def glsic_mb_refine(bank: RakeBank, y: np.ndarray, constellation: Constellation, d_th: float, n: int,
                    L_b: int) -> Tuple[CandidateList, List[float]]:
    """Multi-branch GL-SIC for one observation; returns the choice and its metric trace"""
    H = bank.filters
    orderings = branch_orderings(power_ordering(bank), L_b)
    branches = [ml_select(glsic_candidates(bank, y, constellation, d_th, n, o.order)) for o in orderings]
    best_index = min(range(len(branches)), key=lambda i: (branches[i].metric, i))
    current = branches[best_index]
    trace = [current.metric]

    for k in range(bank.num_users):
        best = current
        for branch in branches:
            if branch.decisions[k] == current.decisions[k]:
                continue
            trial = current.decisions.copy()
            trial[k] = branch.decisions[k]
            candidate = CandidateList.evaluate(trial, H, y)
            if candidate.metric < best.metric:
                best = candidate
        current = best
        trace.append(current.metric)
    return current, trace


def detect_glsic_mb(bank: RakeBank, y: np.ndarray, constellation: Constellation, d_th: float, n: int,
                    L_b: int) -> np.ndarray:
    _check_length(bank, y)
    return _per_symbol(y, lambda col: glsic_mb_refine(bank, col, constellation, d_th, n, L_b)[0].decisions)


def detect_sic_mb(bank: RakeBank, y: np.ndarray, constellation: Constellation, L_b: int) -> np.ndarray:
    """Conventional SIC over L_b orderings, keeping the minimum-residual branch"""
    _check_length(bank, y)
    orderings = branch_orderings(power_ordering(bank), L_b)
    H = bank.filters

    def detect_one(col):
        branches = [CandidateList.evaluate(_sic_one(bank, col, constellation, o.order), H, col) for o in orderings]
        best_index = min(range(len(branches)), key=lambda i: (branches[i].metric, i))
        return branches[best_index].decisions

    return _per_symbol(y, detect_one)


# GL-PIC

def glpic_candidates(bank: RakeBank, y: np.ndarray, constellation: Constellation, d_th: float,
                     n_q: int, soft: Optional[np.ndarray] = None) -> List[CandidateList]:
    """Candidate lists of GL-PIC for one observation before the PIC stage.

    The n_q unreliable users farthest from the constellation take every
    value; all other users keep their sliced matched-filter decision.
    """
    K = bank.num_users
    if not 0 <= n_q <= K:
        raise ConfigError(f"Need 0 <= n_q <= K, got n_q={n_q}, K={K}")
    if soft is None:
        soft = rake_soft_outputs(bank, y).normalized()
    sliced = slice_symbol(soft, constellation)
    partition = partition_reliability(soft, constellation, d_th)
    distances = np.abs(soft - sliced)
    ranked = partition.unreliable[np.argsort(-distances[partition.unreliable], kind='stable')]
    examined = ranked[:n_q]

    candidates = []
    for values in product(constellation.points, repeat=len(examined)):
        b = np.array(sliced, dtype=complex)
        b[examined] = values
        candidates.append(CandidateList.evaluate(b, bank.filters, y))
    return candidates


def detect_glpic(bank: RakeBank, y: np.ndarray, constellation: Constellation, d_th: float, n_q: int,
                 iters: int = 3) -> np.ndarray:
    _check_length(bank, y)
    y = np.asarray(y)
    # same batched soft outputs as detect_mf
    soft = rake_soft_outputs(bank, y).normalized()
    if y.ndim == 1:
        initial = ml_select(glpic_candidates(bank, y, constellation, d_th, n_q, soft)).decisions
    else:
        initial = np.column_stack([
            ml_select(glpic_candidates(bank, y[:, p], constellation, d_th, n_q, soft[:, p])).decisions
            for p in range(y.shape[1])
        ])
    return detect_pic(bank, y, constellation, initial_decisions=initial, iters=iters)


# Dispatcher

def detect(name: str, signatures: np.ndarray, y: np.ndarray, constellation: Constellation,
           config: SystemConfig, noise_var: Optional[float] = None,
           reference: Optional[np.ndarray] = None) -> np.ndarray:
    """Run the named detector on a single observation or a packet"""
    if name not in DETECTOR_NAMES:
        raise ConfigError(f"Unknown detector '{name}', expected one of {DETECTOR_NAMES}")
    noise_var = config.noise_var if noise_var is None else noise_var
    bank = RakeBank.from_signatures(signatures)

    if name == 'MF':
        return detect_mf(bank, y, constellation)
    if name == 'SIC':
        return detect_sic(bank, y, constellation)
    if name == 'PIC':
        return detect_pic(bank, y, constellation, iters=config.pic_iters)
    if name == 'MMSE':
        return detect_mmse(bank.filters, y, constellation, noise_var)
    if name == 'ML':
        return detect_ml(bank.filters, y, constellation)
    if name == 'GL-SIC':
        return detect_glsic(bank, y, constellation, config.d_th, config.n)
    if name == 'GL-SIC-MB':
        return detect_glsic_mb(bank, y, constellation, config.d_th, config.n, config.L_b)
    if name == 'GL-PIC':
        return detect_glpic(bank, y, constellation, config.d_th, config.n_q, config.pic_iters)
    if name == 'MB-SIC':
        return detect_sic_mb(bank, y, constellation, config.sic_branches)
    if reference is None:
        raise DetectionError("The single-user reference needs the transmitted symbols")
    return detect_single_user(bank, y, constellation, reference)
