# src/constellation.py - Symbol alphabets, Gray mapping and nearest-point search
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from src.exceptions import ConfigError, ShapeMismatchError


@dataclass(frozen=True, eq=False)
class Constellation:
    """
    Unit average energy symbol alphabet.

    points[i] carries the bit label of i written MSB first, so bit 0 maps to
    +1 in BPSK and QPSK is Gray labelled (first bit real sign, second imag).
    """
    kind: str
    points: np.ndarray

    @classmethod
    def from_name(cls, kind: str) -> 'Constellation':
        kind = kind.upper()
        if kind == 'BPSK':
            points = np.array([1.0 + 0j, -1.0 + 0j])
        elif kind == 'QPSK':
            points = np.array([1 + 1j, 1 - 1j, -1 + 1j, -1 - 1j]) / np.sqrt(2.0)
        else:
            raise ConfigError(f"Unknown modulation '{kind}'")
        return cls(kind=kind, points=points)

    @property
    def size(self) -> int:
        return len(self.points)

    @property
    def bits_per_symbol(self) -> int:
        return int(np.log2(self.size))

    @property
    def beta(self) -> float:
        """Minimum distance between distinct points"""
        return float(min(abs(a - b) for a, b in combinations(self.points, 2)))

    @property
    def energy(self) -> float:
        return float(np.mean(np.abs(self.points) ** 2))

    def lexicographic_points(self) -> np.ndarray:
        """Points sorted by (real, imag), the order used for tie-breaks"""
        order = np.lexsort((self.points.imag, self.points.real))
        return self.points[order]

    def nearest(self, u):
        """Return (nearest points, indices, distances) for any array of soft values"""
        u = np.asarray(u, dtype=complex)
        dist = np.abs(u[..., None] - self.points)
        # argmin keeps the first point on ties, so the BPSK tie at 0 goes to +1
        idx = np.argmin(dist, axis=-1)
        return self.points[idx], idx, np.take_along_axis(dist, idx[..., None], axis=-1)[..., 0]

    def contains(self, symbols) -> bool:
        symbols = np.asarray(symbols, dtype=complex)
        return bool(np.all(np.min(np.abs(symbols[..., None] - self.points), axis=-1) < 1e-12))

    def modulate(self, bits: np.ndarray) -> np.ndarray:
        """Map a (K, P * bits_per_symbol) bit matrix to (K, P) symbols"""
        bits = np.asarray(bits, dtype=int)
        b = self.bits_per_symbol
        if bits.shape[-1] % b:
            raise ShapeMismatchError(f"Bit count {bits.shape[-1]} is not a multiple of {b}")
        groups = bits.reshape(*bits.shape[:-1], -1, b)
        weights = 2 ** np.arange(b - 1, -1, -1)
        return self.points[groups @ weights]

    def demodulate(self, symbols: np.ndarray) -> np.ndarray:
        """Inverse of modulate for hard decisions"""
        _, idx, _ = self.nearest(symbols)
        b = self.bits_per_symbol
        shifts = np.arange(b - 1, -1, -1)
        bits = (idx[..., None] >> shifts) & 1
        return bits.reshape(*idx.shape[:-1], -1)
