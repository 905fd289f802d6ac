"""
A small Monte Carlo sweep
=========================

The harness pairs trials across architectures and layer counts, so every
configuration in one trial sees the same receiver channel. Results go to a
CSV file that can be summarized later, here or with ``simris summarize``.
"""

import tempfile
from pathlib import Path

from simris import ExperimentConfig, format_summary, read_csv, run_experiment, summarize

cfg = ExperimentConfig(ny_values=(1, 4, 16), l_values=(1, 2, 4), trials=20, master_seed=3)

with tempfile.TemporaryDirectory() as tmp:
    path = Path(tmp) / "sweep.csv"
    run_experiment(cfg, path)
    records = read_csv(path)
    print(path.read_text().splitlines()[0])

###############################################################################
# Normalized gain per configuration
# ---------------------------------
# Tree-connected layers always reach G = 1. Few elements favor a single
# D-RIS layer, and many elements favor several layers.

print(format_summary(summarize(records)))
