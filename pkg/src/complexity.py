# src/complexity.py - Closed-form worst-case flop counts of the detectors
from dataclasses import dataclass
from typing import Iterable

import pandas as pd

from src.exceptions import ConfigError

FLOP_DETECTORS = ('MF', 'SIC', 'PIC', 'MMSE', 'GL-SIC', 'GL-PIC', 'ML')

# Descending complexity; GL-PIC may equal GL-SIC
ORDERING = ('ML', 'MMSE', 'GL-PIC', 'GL-SIC', 'PIC', 'SIC', 'MF')


@dataclass(frozen=True)
class FlopModel:
    detector: str
    K: int
    L_p: int
    M: int
    N_c: int
    n: int
    n_q: int
    flops: int


def _rake_cost(K: int, L_p: int) -> int:
    return 4 * L_p ** 2 + 4 * K * L_p - 2 * L_p


def flops(detector: str, K: int, L_p: int, M: int, N_c: int = 2, n: int = 2, n_q: int = 3) -> int:
    """Exact integer flop count; GL-SIC assumes all n users of the first stage split"""
    for name, value in (('K', K), ('L_p', L_p), ('M', M), ('N_c', N_c), ('n', n)):
        if int(value) != value or value < 1:
            raise ConfigError(f"{name} must be a positive integer, got {value}")
    if int(n_q) != n_q or n_q < 0:
        raise ConfigError(f"n_q must be a nonnegative integer, got {n_q}")

    rake = _rake_cost(K, L_p)
    if detector == 'MF':
        return M * (rake + 6 * K) - 2 * K
    if detector == 'SIC':
        return M * (rake + 18 * K - 12) - 4 * K + 2
    if detector == 'PIC':
        return M * (rake + 10 * K + 4 * K ** 2) - 4 * K
    if detector == 'MMSE':
        return 8 * M ** 3 + M ** 2 * (16 * K - 8) + M * (rake + 4 * K + 4) - 2 * K
    if detector == 'GL-SIC':
        return M * (rake + 6 * K) - 2 * K + N_c ** n * (20 * M * K - 8 * M * n + 4 * M - 2 * K + 2 * n - 2)
    if detector == 'GL-PIC':
        return M * (rake + 10 * K + 4 * K ** 2) - 4 * K + N_c ** n_q * (8 * M * K + 8 * M - 2)
    if detector == 'ML':
        return M * (rake - 2 * K) + N_c ** K * (8 * M * K + 8 * M - 2)
    raise ConfigError(f"No flop model for detector '{detector}', expected one of {FLOP_DETECTORS}")


def flop_model(detector: str, K: int, L_p: int, M: int, N_c: int = 2, n: int = 2, n_q: int = 3) -> FlopModel:
    return FlopModel(detector, K, L_p, M, N_c, n, n_q, flops(detector, K, L_p, M, N_c, n, n_q))


def complexity_table(m_grid: Iterable[int], K: int = 10, L_p: int = 3, N_c: int = 2,
                     n: int = 2, n_q: int = 3) -> pd.DataFrame:
    """Long table with one row per (M, detector)"""
    rows = [
        {'M': int(M), 'detector': name, 'K': K, 'L_p': L_p, 'N_c': N_c, 'n': n, 'n_q': n_q,
         'flops': flops(name, K, L_p, int(M), N_c, n, n_q)}
        for M in m_grid for name in FLOP_DETECTORS
    ]
    return pd.DataFrame(rows, columns=['M', 'detector', 'K', 'L_p', 'N_c', 'n', 'n_q', 'flops'])


def detector_ordering_holds(row: dict) -> bool:
    """ML > MMSE > GL-PIC >= GL-SIC > PIC > SIC > MF for one M"""
    return (row['ML'] > row['MMSE'] > row['GL-PIC'] >= row['GL-SIC']
            > row['PIC'] > row['SIC'] > row['MF'])


def ordering_report(table: pd.DataFrame) -> pd.DataFrame:
    """Per-M pivot of the table with an ordering_holds column"""
    wide = table.pivot(index='M', columns='detector', values='flops')[list(ORDERING)]
    wide['ordering_holds'] = [detector_ordering_holds(row) for row in wide.to_dict(orient='records')]
    return wide.reset_index()
