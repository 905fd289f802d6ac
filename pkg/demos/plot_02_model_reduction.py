"""
From the full circuit model to the cascaded channel
===================================================

A SIM is a chain of propagation stages and metasurface layers. Without
reflections at the layers and without reverse coupling between them, the
general multiport channel collapses to a plain matrix product.
"""

import numpy as np

from simris import (
    PropagationStage,
    SimLayer,
    SimStack,
    assemble_general,
    extract_channel,
    simplified_channel,
)

rng = np.random.default_rng(1)
m, n, k, l = 2, 6, 3, 3


def cn(*shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2) / 4


###############################################################################
# A coupling-free stack
# ---------------------
# Every stage only carries forward transmission (``h21``). The receiver
# stage keeps its backward blocks, which do not affect the channel when the
# SIM side has no self-coupling.

layers = [SimLayer.dris(rng.uniform(0, 2 * np.pi, n)) for _ in range(l)]
stages = [PropagationStage(cn(n, m))] + [PropagationStage(cn(n, n)) for _ in range(l - 1)]
receiver = PropagationStage(cn(k, n), h12=cn(n, k), h22=cn(k, k))
stack = SimStack(layers, stages, receiver)

###############################################################################
# Compare both channel expressions
# --------------------------------

h_general = extract_channel(assemble_general(stack))
h_simple = simplified_channel(stack)
print("channel shape:", h_simple.shape)
print("max entry difference:", np.max(np.abs(h_general - h_simple)))

###############################################################################
# Coupling breaks the reduction
# -----------------------------
# Adding mutual coupling at the first layer invalidates the cascaded form.
# The simplified model reports which assumption fails.

from simris import AssumptionViolated

coupled = SimStack(layers, [PropagationStage(stages[0].h21, h22=cn(n, n))] + stages[1:], receiver)
try:
    simplified_channel(coupled)
except AssumptionViolated as exc:
    print("rejected:", exc)
print("general model still works, |h| =", np.linalg.norm(extract_channel(assemble_general(coupled))))
