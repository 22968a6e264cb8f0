#!/usr/bin/env python3
import os
import sys

# Add the project root to the path
project_root = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
sys.path.insert(0, project_root)

from src.complexity import complexity_table, ordering_report
from src.config import RESULTS_DIR, ensure_directories


def run_complexity(m_grid=range(34, 101)):
    print("🧮 Evaluating worst-case flop counts (K=10, L_p=3, BPSK, n=2, n_q=3)...")
    table = complexity_table(m_grid)
    report = ordering_report(table)

    ensure_directories()
    table.to_csv(RESULTS_DIR / "complexity.csv", index=False)
    report.to_csv(RESULTS_DIR / "complexity_ordering.csv", index=False)
    print(f"💾 Saved {len(table)} rows to {RESULTS_DIR / 'complexity.csv'}")

    broken = report.loc[~report['ordering_holds'], 'M'].tolist()
    if broken:
        print(f"⚠️ Ordering ML > MMSE > GL-PIC >= GL-SIC > PIC > SIC > MF fails at M = {broken}")
    else:
        print("✅ Ordering holds on the whole grid")
    return report


def main():
    report = run_complexity()
    print(report.head(10).to_string(index=False))


if __name__ == "__main__":
    main()
