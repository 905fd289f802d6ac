"""
Cascading two multiport networks
================================

Two random reciprocal networks are joined by connecting the trailing ports
of the first to the leading ports of the second. The closed-form cascade is
compared against a direct solve of all port waves.
"""

import numpy as np

from simris import cascade, random_scattering, solve_waves_oracle
from simris.network import max_abs_diff

rng = np.random.default_rng(0)

###############################################################################
# Build the pieces
# ----------------
# ``random_scattering(n1, n2, norm)`` draws a reciprocal network with n1
# leading and n2 trailing ports, scaled to the requested spectral norm.

p = random_scattering(3, 4, 0.8, rng)
q = random_scattering(4, 2, 0.8, rng)
print("P:", p.n1, "->", p.n2, "ports   Q:", q.n1, "->", q.n2, "ports")

###############################################################################
# Compose
# -------
# The result has P's leading ports and Q's trailing ports. Reciprocity
# survives the composition.

r = cascade(p, q)
print("cascade:", r.n1, "->", r.n2, "ports, reciprocal:", r.is_reciprocal())
print("max |cascade - wave solve| =", max_abs_diff(r, solve_waves_oracle(p, q)))

###############################################################################
# A lossless resonator
# --------------------
# Two perfect reflectors facing each other trap energy forever. The
# inner reflection loop is singular and the cascade refuses to compose it.

from simris import PartitionedScattering, SingularInnerLoop

mirror = PartitionedScattering(np.array([[0.0]]), np.array([[0.0]]), np.array([[0.0]]), np.array([[1.0]]))
short = PartitionedScattering(np.array([[-1.0]]), np.array([[0.0]]), np.array([[0.0]]), np.array([[0.0]]))
try:
    cascade(mirror, short)
except SingularInnerLoop as exc:
    print("singular:", exc)
