"""SIM-aided channel models.

A stack is ``L`` blocks, each a propagation stage followed by a
reconfigurable layer, terminated by the stage towards the receiver. The
general model cascades the full scattering matrices of every element; the
simplified model is the plain product of transmission blocks, valid when
every stage is unilateral and free of mutual coupling.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from enum import Enum

import numpy as np
from scipy.linalg import lu_solve

from .errors import (
    AssumptionViolated,
    DimensionMismatch,
    NotScalar,
    SingularExtraction,
    SingularInnerLoop,
)
from .network import TOL, PartitionedScattering, as_matrix, cascade, lu_checked


class Architecture(str, Enum):
    DRIS = "dris"
    BDRIS = "bdris"
    TREE = "tree"


def dris_theta(phases) -> PartitionedScattering:
    """Transmissive D-RIS scattering matrix for the given phase shifts."""
    phases = np.asarray(phases, dtype=float)
    n = phases.shape[0]
    d = np.diag(np.exp(1j * phases))
    z = np.zeros((n, n))
    return PartitionedScattering(z, d, d, z)


@dataclass(frozen=True)
class SimLayer:
    """One reconfigurable layer.

    ``theta`` is the authoritative scattering matrix. D-RIS layers also
    carry the phase vector that generated it; build them with
    :meth:`dris` so the two never drift apart.
    """

    theta: PartitionedScattering
    architecture: Architecture = Architecture.BDRIS
    phases: np.ndarray | None = None

    def __post_init__(self):
        object.__setattr__(self, "architecture", Architecture(self.architecture))
        if self.theta.n1 != self.theta.n2:
            raise DimensionMismatch(f"layer must have an (n, n) split, got ({self.theta.n1}, {self.theta.n2})")
        if self.phases is not None:
            ph = np.array(self.phases, dtype=float)
            if ph.shape != (self.n,):
                raise DimensionMismatch(f"expected {self.n} phases, got shape {ph.shape}")
            ph.setflags(write=False)
            object.__setattr__(self, "phases", ph)

    @classmethod
    def dris(cls, phases) -> "SimLayer":
        phases = np.asarray(phases, dtype=float)
        return cls(dris_theta(phases), Architecture.DRIS, phases)

    @classmethod
    def through(cls, n: int, architecture=Architecture.BDRIS) -> "SimLayer":
        """Lossless layer passing every element straight through."""
        if Architecture(architecture) is Architecture.DRIS:
            return cls.dris(np.zeros(n))
        return cls(PartitionedScattering.through(n), architecture)

    @property
    def n(self) -> int:
        return self.theta.n1

    @property
    def transmission(self) -> np.ndarray:
        """Block acting from the incident side to the far side."""
        return self.theta.s21

    def with_phases(self, phases) -> "SimLayer":
        if self.architecture is not Architecture.DRIS:
            raise ValueError("only D-RIS layers are parametrized by phases")
        return SimLayer.dris(phases)


@dataclass(frozen=True)
class Violation:
    constraint: str
    deviation: float


def validate_layer(layer: SimLayer, tol: float | None = None) -> list[Violation]:
    """Check a layer against the constraints of its architecture.

    Returns the violated constraints with their maximum deviation; an empty
    list means the layer is valid.
    """
    th = layer.theta
    out = []
    if layer.architecture is Architecture.DRIS:
        tol = TOL.unit_modulus if tol is None else tol
        for name, blk in (("theta11 == 0", th.s11), ("theta22 == 0", th.s22)):
            dev = float(np.max(np.abs(blk)))
            if dev > tol:
                out.append(Violation(name, dev))
        dev = float(np.max(np.abs(th.s12 - th.s21)))
        if dev > tol:
            out.append(Violation("theta12 == theta21", dev))
        for name, blk in (("theta12 diagonal", th.s12), ("theta21 diagonal", th.s21)):
            dev = float(np.max(np.abs(blk - np.diag(np.diag(blk)))))
            if dev > tol:
                out.append(Violation(name, dev))
        dev = float(np.max(np.abs(np.abs(np.diag(th.s21)) - 1.0)))
        if dev > tol:
            out.append(Violation("unit modulus", dev))
        if layer.phases is not None:
            dev = float(np.max(np.abs(np.diag(th.s21) - np.exp(1j * layer.phases))))
            if dev > tol:
                out.append(Violation("phases match theta", dev))
    else:
        tol = TOL.unitary if tol is None else tol
        s = th.full
        dev = float(np.max(np.abs(s - s.T)))
        if dev > tol:
            out.append(Violation("symmetric", dev))
        dev = float(np.max(np.abs(s.conj().T @ s - np.eye(s.shape[0]))))
        if dev > tol:
            out.append(Violation("unitary", dev))
    return out


def _zeros_if_none(m, shape):
    return np.zeros(shape, dtype=np.complex128) if m is None else as_matrix(m)


@dataclass(frozen=True)
class PropagationStage:
    """Wireless channel between two groups of ports.

    ``h21`` is the forward transmission (n_out x n_in). The coupling blocks
    ``h11``/``h22`` and the reverse transmission ``h12`` default to zero.
    """

    h21: np.ndarray
    h11: np.ndarray | None = None
    h12: np.ndarray | None = None
    h22: np.ndarray | None = None

    def __post_init__(self):
        h21 = as_matrix(self.h21, "h21")
        n_out, n_in = h21.shape
        object.__setattr__(self, "h21", h21)
        object.__setattr__(self, "h11", _zeros_if_none(self.h11, (n_in, n_in)))
        object.__setattr__(self, "h12", _zeros_if_none(self.h12, (n_in, n_out)))
        object.__setattr__(self, "h22", _zeros_if_none(self.h22, (n_out, n_out)))
        # PartitionedScattering validates the block shapes
        net = PartitionedScattering(self.h11, self.h12, self.h21, self.h22)
        for name in ("h11", "h12", "h21", "h22"):
            object.__setattr__(self, name, getattr(net, "s" + name[1:]))
        object.__setattr__(self, "_net", net)

    @property
    def n_in(self) -> int:
        return self.h21.shape[1]

    @property
    def n_out(self) -> int:
        return self.h21.shape[0]

    def as_network(self) -> PartitionedScattering:
        return self._net

    def nonzero_blocks(self, tol: float = TOL.zero_block) -> dict[str, float]:
        """Coupling/reverse blocks whose largest entry reaches ``tol``."""
        out = {}
        for name in ("h11", "h12", "h22"):
            dev = float(np.max(np.abs(getattr(self, name)), initial=0.0))
            if dev >= tol:
                out[name] = dev
        return out


@dataclass(frozen=True)
class SimStack:
    """Transmitter -> L (stage, layer) blocks -> receiver stage."""

    layers: tuple
    stages: tuple
    receiver_stage: PropagationStage

    def __post_init__(self):
        object.__setattr__(self, "layers", tuple(self.layers))
        object.__setattr__(self, "stages", tuple(self.stages))
        if not self.layers:
            raise DimensionMismatch("a stack needs at least one layer")
        if len(self.layers) != len(self.stages):
            raise DimensionMismatch(f"{len(self.layers)} layers but {len(self.stages)} stages")
        prev = self.stages[0].n_in
        for i, (stage, layer) in enumerate(zip(self.stages, self.layers), start=1):
            if stage.n_in != prev:
                raise DimensionMismatch(f"stage {i} expects {stage.n_in} inputs, previous block offers {prev}")
            if stage.n_out != layer.n:
                raise DimensionMismatch(f"stage {i} feeds {stage.n_out} ports into a {layer.n}-element layer")
            prev = layer.n
        if self.receiver_stage.n_in != prev:
            raise DimensionMismatch(f"receiver stage expects {self.receiver_stage.n_in} inputs, last layer has {prev}")

    @property
    def m(self) -> int:
        return self.stages[0].n_in

    @property
    def k(self) -> int:
        return self.receiver_stage.n_out

    @property
    def num_layers(self) -> int:
        return len(self.layers)

    def with_layers(self, layers) -> "SimStack":
        return replace(self, layers=tuple(layers))


def block_scattering(stage: PropagationStage, layer: SimLayer) -> PartitionedScattering:
    """Scattering matrix of one stage followed by its layer."""
    return cascade(stage.as_network(), layer.theta)


def assemble_general(stack: SimStack) -> PartitionedScattering:
    """End-to-end (M, K) scattering matrix of the whole stack.

    Raises:
        SingularInnerLoop: with ``block_index`` set to the failing block
            (1-based) or ``"receiver"``.
    """
    total = None
    for idx, (stage, layer) in enumerate(zip(stack.stages, stack.layers), start=1):
        try:
            blk = block_scattering(stage, layer)
            total = blk if total is None else cascade(total, blk)
        except SingularInnerLoop as exc:
            raise SingularInnerLoop(f"block {idx}: {exc}", block_index=idx) from exc
    try:
        return cascade(total, stack.receiver_stage.as_network())
    except SingularInnerLoop as exc:
        raise SingularInnerLoop(f"receiver stage: {exc}", block_index="receiver") from exc


def extract_channel(s: PartitionedScattering) -> np.ndarray:
    """Voltage channel ``S21 (I + S11)^-1`` for matched source and load."""
    a = np.eye(s.n1) + s.s11
    lu = lu_checked(a.T, error=SingularExtraction, what="I + S11")
    return lu_solve(lu, s.s21.T).T


def simplified_channel(stack: SimStack, tol: float = TOL.zero_block) -> np.ndarray:
    """Product-form channel ``H_R T_L H_L ... T_1 H_1``.

    Raises:
        AssumptionViolated: a stage has coupling or reverse transmission.
    """
    reasons = {
        "h12": "unilateral approximation requires zero reverse transmission",
        "h11": "no mutual coupling at the source side",
        "h22": "no mutual coupling at the destination side",
    }
    for idx, stage in enumerate(stack.stages, start=1):
        bad = stage.nonzero_blocks(tol)
        if bad:
            name, dev = next(iter(bad.items()))
            raise AssumptionViolated(f"stage {idx}: {reasons[name]} ({name} max |entry| = {dev:.3e})")
    dev = float(np.max(np.abs(stack.receiver_stage.h11)))
    if dev >= tol:
        raise AssumptionViolated(f"receiver stage: {reasons['h11']} (h11 max |entry| = {dev:.3e})")

    h = stack.stages[0].h21
    for stage, layer in zip(stack.stages[1:], stack.layers[:-1]):
        h = stage.h21 @ (layer.transmission @ h)
    return stack.receiver_stage.h21 @ (stack.layers[-1].transmission @ h)


def channel_gain(h) -> float:
    """Squared magnitude of a SISO channel."""
    h = np.asarray(h)
    if h.size != 1:
        raise NotScalar(f"channel gain needs a 1x1 channel, got shape {h.shape}")
    return float(np.abs(h.reshape(())) ** 2)


# --- JSON snapshots -------------------------------------------------------
# Complex numbers are [re, im] pairs, matrices are row-major lists of rows.

SCHEMA_VERSION = 1


def _enc(m):
    m = np.asarray(m)
    return [[[float(z.real), float(z.imag)] for z in row] for row in m]


def _dec(rows):
    a = np.asarray(rows, dtype=float)
    if a.size == 0:
        raise DimensionMismatch("empty matrix in snapshot")
    return a[..., 0] + 1j * a[..., 1]


def _stage_dict(stage):
    return {name: _enc(getattr(stage, name)) for name in ("h11", "h12", "h21", "h22")}


def _stage_from(d):
    return PropagationStage(**{name: _dec(d[name]) for name in ("h11", "h12", "h21", "h22")})


def stack_to_dict(stack: SimStack) -> dict:
    layers = []
    for layer in stack.layers:
        entry = {"architecture": layer.architecture.value, "n": layer.n, "theta": _enc(layer.theta.full)}
        if layer.phases is not None:
            entry["phases"] = [float(x) for x in layer.phases]
        layers.append(entry)
    return {
        "schema_version": SCHEMA_VERSION,
        "m": stack.m,
        "k": stack.k,
        "layers": layers,
        "stages": [_stage_dict(s) for s in stack.stages],
        "receiver_stage": _stage_dict(stack.receiver_stage),
    }


def stack_from_dict(d: dict) -> SimStack:
    if d.get("schema_version") != SCHEMA_VERSION:
        raise ValueError(f"unsupported stack schema_version {d.get('schema_version')!r}")
    layers = []
    for entry in d["layers"]:
        theta = PartitionedScattering.from_full(_dec(entry["theta"]), entry["n"])
        layers.append(SimLayer(theta, entry["architecture"], entry.get("phases")))
    stack = SimStack(layers, [_stage_from(s) for s in d["stages"]], _stage_from(d["receiver_stage"]))
    if (stack.m, stack.k) != (d["m"], d["k"]):
        raise DimensionMismatch(f"snapshot declares M={d['m']}, K={d['k']} but matrices give M={stack.m}, K={stack.k}")
    return stack


def stack_to_json(stack: SimStack, **kwargs) -> str:
    return json.dumps(stack_to_dict(stack), **kwargs)


def stack_from_json(text: str) -> SimStack:
    return stack_from_dict(json.loads(text))
