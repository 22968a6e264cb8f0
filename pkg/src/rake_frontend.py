# src/rake_frontend.py - RAKE receiver bank and soft symbol estimates
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from src.exceptions import ShapeMismatchError


@dataclass(frozen=True)
class RakeBank:
    """Filters matched to each user's effective signature, one per column"""
    filters: np.ndarray

    @classmethod
    def from_signatures(cls, signatures: np.ndarray) -> 'RakeBank':
        signatures = np.asarray(signatures, dtype=complex)
        if signatures.ndim == 1:
            signatures = signatures[:, None]
        return cls(filters=signatures)

    @property
    def length(self) -> int:
        return self.filters.shape[0]

    @property
    def num_users(self) -> int:
        return self.filters.shape[1]

    @property
    def gains(self) -> np.ndarray:
        """g_k = w_k^H H_k = ||H_k||^2"""
        return np.sum(np.abs(self.filters) ** 2, axis=0)

    def soft(self, y: np.ndarray, k: int) -> complex:
        """Normalized soft output of a single user"""
        g = self.gains[k]
        if g == 0:
            return 0j
        return complex(np.vdot(self.filters[:, k], y) / g)


@dataclass(frozen=True)
class SoftEstimateVector:
    values: np.ndarray
    gains: np.ndarray
    ordering: np.ndarray

    def normalized(self) -> np.ndarray:
        """u_k / g_k, zero where a user has no received energy"""
        gains = self.gains.reshape((-1,) + (1,) * (self.values.ndim - 1))
        safe = np.where(gains > 0, gains, 1.0)
        return np.where(gains > 0, self.values / safe, 0.0)


def rake_soft_outputs(bank: RakeBank, y: np.ndarray) -> SoftEstimateVector:
    y = np.asarray(y)
    if y.shape[0] != bank.length:
        raise ShapeMismatchError(f"Observation length {y.shape[0]} does not match filter length {bank.length}")
    return SoftEstimateVector(
        values=bank.filters.conj().T @ y,
        gains=bank.gains,
        ordering=power_ordering(bank),
    )


def power_ordering(bank: RakeBank) -> np.ndarray:
    """Users by decreasing ||H_k||^2, equal powers kept in index order"""
    return np.argsort(-bank.gains, kind='stable')


def residual_reordering(bank: RakeBank, residual_y: np.ndarray, remaining_users: Sequence[int]) -> np.ndarray:
    """Remaining users by decreasing |u_k| on the residual, ties by index"""
    remaining = np.asarray(remaining_users, dtype=int)
    if remaining.size == 0:
        raise ShapeMismatchError("No remaining users to reorder")
    magnitudes = np.abs(bank.filters[:, remaining].conj().T @ residual_y)
    return remaining[np.lexsort((remaining, -magnitudes))]
