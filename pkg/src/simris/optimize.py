"""SISO channel-gain maximization for SIMs built from D-RIS or BD-RIS layers."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .errors import (
    ArchitectureMismatch,
    AssumptionViolated,
    DimensionMismatch,
    UnsupportedCombination,
    ZeroChannel,
)
from .model import Architecture, PartitionedScattering, SimLayer, SimStack
from .network import spectral_norm

ASCENDING = "ascending"
DESCENDING = "descending"


@dataclass(frozen=True)
class ZeroPhase:
    pass


@dataclass(frozen=True)
class UniformRandomPhase:
    seed: int = 0


InitPolicy = Union[ZeroPhase, UniformRandomPhase]


def initial_phases(policy: InitPolicy, n: int, l: int) -> list[np.ndarray]:
    if isinstance(policy, ZeroPhase):
        return [np.zeros(n) for _ in range(l)]
    if isinstance(policy, UniformRandomPhase):
        rng = np.random.default_rng(policy.seed)
        return [rng.uniform(0.0, 2 * np.pi, n) for _ in range(l)]
    raise TypeError(f"unknown init policy {policy!r}")


@dataclass(frozen=True)
class DRisOptimizerConfig:
    """Stopping rule and starting point of :func:`dris_optimize`.

    ``init_policy=None`` keeps the phases already stored in the stack.
    """

    max_iterations: int = 200
    rel_tolerance: float = 1e-8
    init_policy: InitPolicy | None = None
    sweep_order: str = ASCENDING

    def __post_init__(self):
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be at least 1")
        if not self.rel_tolerance > 0:
            raise ValueError("rel_tolerance must be positive")
        if self.sweep_order not in (ASCENDING, DESCENDING):
            raise ValueError(f"sweep_order must be {ASCENDING!r} or {DESCENDING!r}")


@dataclass
class OptimizationTrace:
    """Objective history of one run.

    ``gains[i]`` is |h|^2 after sweep ``i + 1``; ``update_gains`` holds the
    objective after every single-layer update, starting from the initial
    point.
    """

    initial_gain: float
    gains: list = field(default_factory=list)
    update_gains: list = field(default_factory=list)
    iterations_used: int = 0
    converged: bool = False

    @property
    def final_gain(self) -> float:
        return self.gains[-1] if self.gains else self.initial_gain


def dris_layer_update(u, v) -> np.ndarray:
    """Phases maximizing ``|sum_n u_n exp(j theta_n) v_n|``: ``theta_n = -arg(u_n v_n)``.

    A zero product gets phase 0; the attained value is ``sum_n |u_n v_n|``.
    """
    u = np.ravel(np.asarray(u, dtype=np.complex128))
    v = np.ravel(np.asarray(v, dtype=np.complex128))
    if u.shape != v.shape:
        raise DimensionMismatch(f"u has {u.size} entries, v has {v.size}")
    # np.angle(0) == 0, which is the convention wanted here
    return -np.angle(u * v)


def _siso_vectors(stack: SimStack):
    if stack.m != 1 or stack.k != 1:
        raise DimensionMismatch(f"SISO stack required, got M={stack.m}, K={stack.k}")
    for i, stage in enumerate(stack.stages, start=1):
        bad = stage.nonzero_blocks()
        if bad:
            raise AssumptionViolated(f"stage {i} has nonzero {', '.join(bad)}; simplified model required")
    if stack.receiver_stage.nonzero_blocks().get("h11"):
        raise AssumptionViolated("receiver stage has coupling at the SIM side")
    h1 = stack.stages[0].h21[:, 0]
    inner = [s.h21 for s in stack.stages[1:]]
    h_r = stack.receiver_stage.h21[0]
    return h1, inner, h_r


def _forward(h1, inner, phases):
    x = np.exp(1j * phases[0]) * h1
    for h, ph in zip(inner, phases[1:]):
        x = np.exp(1j * ph) * (h @ x)
    return x


def dris_optimize(stack: SimStack, cfg: DRisOptimizerConfig | None = None):
    """Iteratively maximize |h|^2 over the phases of a D-RIS stack.

    Each sweep visits every layer once (order set by ``cfg.sweep_order``)
    and replaces its phases with the closed-form optimum given all other
    layers. Stops when one sweep improves the gain by less than
    ``rel_tolerance`` (relative) or after ``max_iterations`` sweeps; a single
    layer is solved exactly by its first update.

    Returns:
        ``(optimized_stack, trace)``; the input stack is left untouched.
    """
    cfg = DRisOptimizerConfig() if cfg is None else cfg
    for i, layer in enumerate(stack.layers, start=1):
        if layer.architecture is not Architecture.DRIS:
            raise ArchitectureMismatch(f"layer {i} is {layer.architecture.value}, D-RIS required")
    h1, inner, h_r = _siso_vectors(stack)
    n_layers = stack.num_layers

    if cfg.init_policy is None:
        phases = [np.array(layer.phases if layer.phases is not None else np.angle(np.diag(layer.transmission)))
                  for layer in stack.layers]
    else:
        phases = initial_phases(cfg.init_policy, h1.size, n_layers)

    def gain():
        return float(abs(h_r @ _forward(h1, inner, phases)) ** 2)

    trace = OptimizationTrace(initial_gain=gain())
    trace.update_gains.append(trace.initial_gain)
    prev = trace.initial_gain

    for sweep in range(1, cfg.max_iterations + 1):
        if cfg.sweep_order == ASCENDING:
            # u for every layer from the not-yet-updated downstream layers
            us = [None] * n_layers
            us[-1] = h_r
            for l in range(n_layers - 2, -1, -1):
                us[l] = (us[l + 1] * np.exp(1j * phases[l + 1])) @ inner[l]
            v = h1
            for l in range(n_layers):
                phases[l] = dris_layer_update(us[l], v)
                trace.update_gains.append(float(np.sum(np.abs(us[l] * v)) ** 2))
                if l < n_layers - 1:
                    v = inner[l] @ (np.exp(1j * phases[l]) * v)
        else:
            vs = [h1]
            for l in range(1, n_layers):
                vs.append(inner[l - 1] @ (np.exp(1j * phases[l - 1]) * vs[-1]))
            u = h_r
            for l in range(n_layers - 1, -1, -1):
                phases[l] = dris_layer_update(u, vs[l])
                trace.update_gains.append(float(np.sum(np.abs(u * vs[l])) ** 2))
                if l > 0:
                    u = (u * np.exp(1j * phases[l])) @ inner[l - 1]

        g = gain()
        trace.gains.append(g)
        trace.iterations_used = sweep
        if n_layers == 1 or g - prev <= cfg.rel_tolerance * prev:
            trace.converged = True
            break
        prev = g

    return stack.with_layers([SimLayer.dris(p) for p in phases]), trace


def bdris_optimal(h_r, h_1, architecture=Architecture.BDRIS) -> SimLayer:
    """Symmetric unitary layer attaining ``|h_r T h_1|^2 = ||h_r||^2 ||h_1||^2``.

    ``T`` is the transmission block of the returned 2N-port. With
    ``p = h_1 / ||h_1||`` and ``q = h_r^T / ||h_r||``, the matrix sends
    ``[p; 0]`` to ``[0; conj(q)]`` and, by symmetry, ``[0; q]`` to
    ``[conj(p); 0]``. On the orthogonal complement with orthonormal basis
    ``B`` it acts as ``conj(B) B^H``, which is symmetric and unitary there.
    """
    h_r = np.ravel(np.asarray(h_r, dtype=np.complex128))
    h_1 = np.ravel(np.asarray(h_1, dtype=np.complex128))
    if h_r.shape != h_1.shape:
        raise DimensionMismatch(f"h_r has {h_r.size} entries, h_1 has {h_1.size}")
    nr, n1 = np.linalg.norm(h_r), np.linalg.norm(h_1)
    if nr == 0 or n1 == 0:
        raise ZeroChannel("both channels must be nonzero")
    n = h_1.size
    zeros = np.zeros(n, dtype=np.complex128)
    w1 = np.concatenate([h_1 / n1, zeros])
    w2 = np.concatenate([zeros, h_r / nr])

    q, _ = np.linalg.qr(np.column_stack([w1, w2, np.eye(2 * n)]), mode="complete")
    b = q[:, 2:]
    theta = (np.outer(w2.conj(), w1.conj()) + np.outer(w1.conj(), w2.conj()) + b.conj() @ b.conj().T)
    return SimLayer(PartitionedScattering.from_full(theta, n), architecture)


def stage_norms(stack: SimStack) -> list[float]:
    """Spectral norms of the inter-layer transmission blocks (layers 2..L)."""
    return [spectral_norm(s.h21) for s in stack.stages[1:]]


def dris_upper_bound(stack: SimStack) -> float:
    """Submultiplicative bound ``||h_R||^2 prod ||H_l||^2 ||h_1||^2`` on the D-RIS gain."""
    h1, _, h_r = _siso_vectors(stack)
    bound = np.linalg.norm(h_r) ** 2 * np.linalg.norm(h1) ** 2
    for nrm in stage_norms(stack):
        bound *= nrm ** 2
    return float(bound)


def circuit_complexity(arch, n: int, l: int = 1) -> int:
    """Number of tunable impedances needed by the SIM circuit."""
    arch = Architecture(arch)
    if n < 1 or l < 1:
        raise ValueError("n and l must be positive")
    if arch is Architecture.DRIS:
        return 3 * n * l
    if arch is Architecture.TREE:
        if l != 1:
            raise UnsupportedCombination("tree-connected SIMs are single-layer")
        return 4 * n - 1
    raise UnsupportedCombination(f"no circuit count defined for {arch.value}")
