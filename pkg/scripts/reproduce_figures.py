#!/usr/bin/env python3
"""Run every experiment preset and save plot-ready CSV tables."""
import os
import sys
from dataclasses import replace

# Add the project root to the path
project_root = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
sys.path.insert(0, project_root)

import click

from src.config import FIGURE_DATA_DIR, ensure_directories
from src.harness import FIGURE_PRESETS, figure_spec, run_sweep, write_results
from src.log_config import setup_logging


def reproduce(names, scale, workers, seed):
    ensure_directories()
    saved = []
    for name in names:
        print(f"📡 Running preset '{name}' at {scale} scale...")
        spec = figure_spec(name, scale=scale, seed=seed)
        table = run_sweep(spec, workers=workers, progress=True)
        path = write_results(table, FIGURE_DATA_DIR / f"{name}.csv")
        saved.append(path)

        # GL-PIC with more re-examined users on the same seeds
        if name == 'noncoop_glpic':
            wider = figure_spec(name, scale=scale, seed=seed, config=replace(spec.config, n_q=5),
                                detectors=('GL-PIC',), scenario_id='noncoop_glpic_nq5')
            table = run_sweep(wider, workers=workers, progress=True)
            saved.append(write_results(table, FIGURE_DATA_DIR / "noncoop_glpic_nq5.csv"))
        print(f"✅ {name}: {len(table)} rows")
    return saved


@click.command()
@click.option("--preset", multiple=True, type=click.Choice(sorted(FIGURE_PRESETS)),
              help="Preset to run; repeat for several (default: all)")
@click.option("--scale", type=click.Choice(["desk", "full"]), default="desk", show_default=True)
@click.option("--workers", type=int, default=1, show_default=True)
@click.option("--seed", type=int, default=2024, show_default=True)
def main(preset, scale, workers, seed):
    """Run every experiment preset and save plot-ready CSV tables."""
    setup_logging()
    print("🚀 Reproducing BER experiments...")
    saved = reproduce(list(preset) or list(FIGURE_PRESETS), scale, workers, seed)
    print(f"\n🎉 Done! {len(saved)} tables in {FIGURE_DATA_DIR}")


if __name__ == "__main__":
    main()
