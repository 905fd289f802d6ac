"""Physical channels for a SIM mounted in front of a single transmit antenna.

Layers are uniform planar arrays parallel to the x-y plane, centered on the
z-axis. Channels between consecutive planes follow Rayleigh-Sommerfeld
diffraction; the channel from the last layer to the receiver is i.i.d.
Rayleigh fading.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.constants import speed_of_light

from .errors import CoincidentPoints
from .model import Architecture, PropagationStage, SimLayer, SimStack
from .optimize import InitPolicy, UniformRandomPhase, initial_phases


@dataclass(frozen=True)
class SimGeometry:
    """Placement of the transmitter and the SIM layers (lengths in meters)."""

    wavelength: float
    nx: int
    ny: int
    layer_spacing: float
    element_spacing: float
    first_layer_offset: float
    tx_position: tuple = (0.0, 0.0, 0.0)

    def __post_init__(self):
        for name in ("wavelength", "layer_spacing", "element_spacing", "first_layer_offset"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be strictly positive")
        if self.nx < 1 or self.ny < 1:
            raise ValueError("nx and ny must be at least 1")
        object.__setattr__(self, "tx_position", tuple(float(c) for c in self.tx_position))

    @classmethod
    def from_frequency(cls, frequency_hz=28e9, nx=4, ny=4, layer_spacing=1.0, element_spacing=0.5,
                       first_layer_offset=1.0):
        """Geometry with spacings given in wavelengths."""
        lam = speed_of_light / frequency_hz
        return cls(lam, nx, ny, layer_spacing * lam, element_spacing * lam, first_layer_offset * lam)

    @property
    def n(self) -> int:
        return self.nx * self.ny


def upa_positions(g: SimGeometry, layer_index: int) -> np.ndarray:
    """(N, 3) element positions of layer ``layer_index`` (1-based), x varying fastest."""
    if layer_index < 1:
        raise ValueError("layer_index starts at 1")
    xs = (np.arange(g.nx) - (g.nx - 1) / 2) * g.element_spacing
    ys = (np.arange(g.ny) - (g.ny - 1) / 2) * g.element_spacing
    x, y = np.meshgrid(xs, ys)
    z = g.first_layer_offset + (layer_index - 1) * g.layer_spacing
    return np.column_stack([x.ravel(), y.ravel(), np.full(g.n, z)])


def rs_channel(src, dst, wavelength: float, area: float | None = None) -> np.ndarray:
    """Rayleigh-Sommerfeld transmission matrix from ``src`` points to ``dst`` points.

    Entry (i, j) couples source j to destination i::

        A cos(alpha) / d * (1 / (2 pi d) - 1j / wavelength) * exp(2j pi d / wavelength)

    where ``alpha`` is the angle between the z-axis (normal of the source
    plane) and the line joining the two points, and ``A`` defaults to the
    element area ``(wavelength / 2)**2``.
    """
    src = np.atleast_2d(np.asarray(src, dtype=float))
    dst = np.atleast_2d(np.asarray(dst, dtype=float))
    if area is None:
        area = (wavelength / 2) ** 2
    diff = dst[:, None, :] - src[None, :, :]
    d = np.linalg.norm(diff, axis=-1)
    if np.any(d == 0):
        raise CoincidentPoints("source and destination points coincide")
    cos_a = np.abs(diff[..., 2]) / d
    return area * cos_a / d * (1 / (2 * np.pi * d) - 1j / wavelength) * np.exp(2j * np.pi * d / wavelength)


def rayleigh_channel(k: int, n: int, seed=None) -> np.ndarray:
    """(k, n) matrix of i.i.d. CN(0, 1) entries.

    ``seed`` is anything accepted by :func:`numpy.random.default_rng`.
    """
    if k < 1 or n < 1:
        raise ValueError("k and n must be positive")
    rng = np.random.default_rng(seed)
    return (rng.standard_normal((k, n)) + 1j * rng.standard_normal((k, n))) / np.sqrt(2)


def trial_seed(master_seed: int, *key: int) -> int:
    """Independent 64-bit seed for the substream identified by ``key``.

    Substreams are derived with :class:`numpy.random.SeedSequence` spawn
    keys, so they do not depend on the order in which trials are run.
    """
    ss = np.random.SeedSequence(master_seed, spawn_key=tuple(int(x) for x in key))
    return int(ss.generate_state(1, np.uint64)[0])


def rs_stages(g: SimGeometry, l: int) -> list[PropagationStage]:
    """Transmitter -> layer 1 and layer (i-1) -> layer i diffraction stages."""
    tx = np.asarray([g.tx_position])
    stages = [PropagationStage(rs_channel(tx, upa_positions(g, 1), g.wavelength))]
    for i in range(2, l + 1):
        stages.append(PropagationStage(rs_channel(upa_positions(g, i - 1), upa_positions(g, i), g.wavelength)))
    return stages


def build_stack(g: SimGeometry, l: int, k: int = 1, arch=Architecture.DRIS, seed: int = 0,
                init: InitPolicy | None = None) -> SimStack:
    """Coupling-free stack with diffraction stages and a Rayleigh receiver stage.

    ``seed`` drives the receiver channel only. D-RIS layers start from
    ``init``; by default uniformly random phases from a substream of
    ``seed``. Other architectures start as straight-through layers.
    """
    if l < 1:
        raise ValueError("a stack needs at least one layer")
    arch = Architecture(arch)
    receiver = PropagationStage(rayleigh_channel(k, g.n, seed))
    if arch is Architecture.DRIS:
        init = UniformRandomPhase(trial_seed(seed, 1)) if init is None else init
        layers = [SimLayer.dris(p) for p in initial_phases(init, g.n, l)]
    else:
        layers = [SimLayer.through(g.n, arch) for _ in range(l)]
    return SimStack(layers, rs_stages(g, l), receiver)
