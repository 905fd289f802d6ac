"""Partitioned scattering matrices and their cascade.

A ``PartitionedScattering`` is a square scattering matrix whose ports are
split into a leading group of ``n1`` ports and a trailing group of ``n2``
ports. Cascading two networks connects the trailing ports of the first to
the leading ports of the second, port by port.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.linalg import LinAlgWarning, lapack, lu_factor, lu_solve

from .errors import DegenerateImpedance, DimensionMismatch, SingularInnerLoop, SingularSystem


@dataclass(frozen=True)
class Tolerances:
    """Numerical thresholds shared by runtime checks and the test-suite."""

    equality: float = 1e-10
    rcond: float = 1e-12
    zero_block: float = 1e-12
    unit_modulus: float = 1e-12
    unitary: float = 1e-10
    power_iteration: float = 1e-12


TOL = Tolerances()

# Gram-matrix eigensolve up to this size, power iteration above it.
GRAM_EIG_MAX = 64


def as_matrix(m, name="matrix"):
    """Return ``m`` as a finite 2-D complex array."""
    a = np.array(m, dtype=np.complex128)
    if a.ndim != 2:
        raise DimensionMismatch(f"{name} must be 2-D, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} has non-finite entries")
    return a


def _frozen(a):
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class PartitionedScattering:
    """Scattering matrix ``[[s11, s12], [s21, s22]]`` with an (n1, n2) port split."""

    s11: np.ndarray
    s12: np.ndarray
    s21: np.ndarray
    s22: np.ndarray

    def __post_init__(self):
        blocks = {}
        for name in ("s11", "s12", "s21", "s22"):
            blocks[name] = _frozen(as_matrix(getattr(self, name), name))
            object.__setattr__(self, name, blocks[name])
        n1 = blocks["s11"].shape[0]
        n2 = blocks["s22"].shape[0]
        expected = {"s11": (n1, n1), "s12": (n1, n2), "s21": (n2, n1), "s22": (n2, n2)}
        for name, shape in expected.items():
            if blocks[name].shape != shape:
                raise DimensionMismatch(
                    f"{name} has shape {blocks[name].shape}, expected {shape} for split ({n1}, {n2})"
                )

    @property
    def n1(self) -> int:
        return self.s11.shape[0]

    @property
    def n2(self) -> int:
        return self.s22.shape[0]

    @property
    def full(self) -> np.ndarray:
        return np.block([[self.s11, self.s12], [self.s21, self.s22]])

    @classmethod
    def from_full(cls, s, n1: int) -> "PartitionedScattering":
        s = as_matrix(s, "s")
        if s.shape[0] != s.shape[1]:
            raise DimensionMismatch(f"scattering matrix must be square, got {s.shape}")
        if not 0 < n1 < s.shape[0]:
            raise DimensionMismatch(f"split n1={n1} invalid for a {s.shape[0]}-port")
        return cls(s[:n1, :n1], s[:n1, n1:], s[n1:, :n1], s[n1:, n1:])

    @classmethod
    def through(cls, n: int) -> "PartitionedScattering":
        """Ideal matched through-line connecting port i to port n + i."""
        z = np.zeros((n, n))
        eye = np.eye(n)
        return cls(z, eye, eye, z)

    def is_reciprocal(self, tol: float = TOL.equality) -> bool:
        s = self.full
        return bool(np.max(np.abs(s - s.T)) <= tol)

    def is_lossless(self, tol: float = TOL.unitary) -> bool:
        s = self.full
        return bool(np.max(np.abs(s.conj().T @ s - np.eye(s.shape[0]))) <= tol)

    def allclose(self, other: "PartitionedScattering", atol: float = TOL.equality) -> bool:
        if (self.n1, self.n2) != (other.n1, other.n2):
            return False
        return max_abs_diff(self, other) <= atol


def max_abs_diff(a: PartitionedScattering, b: PartitionedScattering) -> float:
    if (a.n1, a.n2) != (b.n1, b.n2):
        raise DimensionMismatch(f"partitions differ: ({a.n1}, {a.n2}) vs ({b.n1}, {b.n2})")
    return float(np.max(np.abs(a.full - b.full)))


def lu_checked(a, rcond_min=TOL.rcond, error=SingularInnerLoop, what="inner reflection loop"):
    """LU-factor ``a``; raise ``error`` if its reciprocal 1-norm condition estimate is too small."""
    with warnings.catch_warnings():
        # an exactly singular pivot is reported below through rcond
        warnings.simplefilter("ignore", LinAlgWarning)
        lu, piv = lu_factor(a, check_finite=False)
    gecon = lapack.get_lapack_funcs("gecon", (lu,))
    anorm = np.linalg.norm(a, 1)
    rcond, info = gecon(lu, anorm, norm="1")
    if info != 0 or not np.isfinite(rcond) or rcond < rcond_min:
        raise error(f"{what} is numerically singular (rcond={rcond:.3e})")
    return lu, piv


def cascade(p: PartitionedScattering, q: PartitionedScattering, rcond_min: float = TOL.rcond):
    """Connect the trailing ports of ``p`` to the leading ports of ``q``.

    Args:
        p: network with split (n1, n2).
        q: network with split (n2, n3).
        rcond_min: smallest acceptable reciprocal condition estimate of the
            inner loop matrices.

    Returns:
        The (n1, n3) network seen from the outer ports.

    Raises:
        DimensionMismatch: ``p.n2 != q.n1``.
        SingularInnerLoop: ``I - Q11 P22`` is numerically singular.
    """
    if p.n2 != q.n1:
        raise DimensionMismatch(f"cannot cascade: p has {p.n2} trailing ports, q has {q.n1} leading ports")
    eye = np.eye(p.n2)
    # (I - Q11 P22) acts on the waves entering q, (I - P22 Q11) on those entering p.
    fwd = lu_checked(eye - q.s11 @ p.s22, rcond_min)
    bwd = lu_checked(eye - p.s22 @ q.s11, rcond_min)

    r11 = p.s11 + p.s12 @ lu_solve(fwd, q.s11 @ p.s21)
    r12 = p.s12 @ lu_solve(fwd, q.s12)
    r21 = q.s21 @ lu_solve(bwd, p.s21)
    r22 = q.s22 + q.s21 @ lu_solve(bwd, p.s22 @ q.s12)
    return PartitionedScattering(r11, r12, r21, r22)


def solve_waves_oracle(p: PartitionedScattering, q: PartitionedScattering, rcond_min: float = TOL.rcond):
    """Cascade by brute force: solve the joint wave equations of both networks.

    The unknowns are the stacked waves ``(a1, b1, a2, b2, a3, b3)``, where
    ``a2``/``b2`` travel on the connections (``a2`` into ``p``, ``b2`` out of
    ``p``) and ``a3``/``b3`` are outgoing/incoming at the trailing ports of
    ``q``. Each column of the result is obtained by exciting one outer port
    with a unit wave.
    """
    if p.n2 != q.n1:
        raise DimensionMismatch(f"cannot cascade: p has {p.n2} trailing ports, q has {q.n1} leading ports")
    n1, n2, n3 = p.n1, p.n2, q.n2
    sizes = [n1, n1, n2, n2, n3, n3]
    offs = np.concatenate([[0], np.cumsum(sizes)])
    a1, b1, a2, b2, a3, b3 = (slice(offs[i], offs[i + 1]) for i in range(6))
    nvar = offs[-1]

    m = np.zeros((nvar, nvar), dtype=np.complex128)
    rhs = np.zeros((nvar, n1 + n3), dtype=np.complex128)
    row = 0

    def eq(nrows):
        nonlocal row
        r = slice(row, row + nrows)
        row += nrows
        return r

    # [b1; b2] = P [a1; a2]
    r = eq(n1)
    m[r, b1] = np.eye(n1)
    m[r, a1] = -p.s11
    m[r, a2] = -p.s12
    r = eq(n2)
    m[r, b2] = np.eye(n2)
    m[r, a1] = -p.s21
    m[r, a2] = -p.s22
    # [a2; a3] = Q [b2; b3]
    r = eq(n2)
    m[r, a2] = np.eye(n2)
    m[r, b2] = -q.s11
    m[r, b3] = -q.s12
    r = eq(n3)
    m[r, a3] = np.eye(n3)
    m[r, b2] = -q.s21
    m[r, b3] = -q.s22
    # unit excitations of a1 and b3
    r = eq(n1)
    m[r, a1] = np.eye(n1)
    rhs[r, :n1] = np.eye(n1)
    r = eq(n3)
    m[r, b3] = np.eye(n3)
    rhs[r, n1:] = np.eye(n3)

    if 1.0 / np.linalg.cond(m) < rcond_min:
        raise SingularSystem("stacked wave system is rank-deficient")
    z = np.linalg.solve(m, rhs)
    out = np.vstack([z[b1], z[a3]])
    return PartitionedScattering.from_full(out, n1)


def reflection_coefficients(impedances, reference_impedance: float = 50.0) -> np.ndarray:
    """Diagonal matrix of ``(Z_i - Z0) / (Z_i + Z0)`` for one-port terminations."""
    if reference_impedance <= 0:
        raise ValueError("reference impedance must be positive")
    z = np.atleast_1d(np.asarray(impedances, dtype=np.complex128))
    den = z + reference_impedance
    if np.any(den == 0):
        raise DegenerateImpedance("an impedance equals -Z0; reflection coefficient undefined")
    return np.diag((z - reference_impedance) / den)


def source_wave(gamma_t, v_s) -> np.ndarray:
    """Source wave ``(I - Gamma_T) v_s / 2`` launched by voltage sources."""
    gamma_t = as_matrix(gamma_t, "gamma_t")
    v_s = np.asarray(v_s, dtype=np.complex128)
    if gamma_t.shape != (v_s.shape[0], v_s.shape[0]):
        raise DimensionMismatch(f"gamma_t shape {gamma_t.shape} does not match source vector length {v_s.shape[0]}")
    if np.any(gamma_t != np.diag(np.diag(gamma_t))):
        raise DimensionMismatch("gamma_t must be diagonal")
    return (v_s - gamma_t @ v_s) / 2


def spectral_norm(m) -> float:
    """Largest singular value of ``m``."""
    m = as_matrix(m, "m")
    if m.size == 0:
        return 0.0
    # Gram matrix on the smaller side
    g = m.conj().T @ m if m.shape[1] <= m.shape[0] else m @ m.conj().T
    if g.shape[0] <= GRAM_EIG_MAX:
        top = np.linalg.eigvalsh(g)[-1]
        return float(np.sqrt(max(top, 0.0)))
    return _power_norm(g)


def _power_norm(g, tol=TOL.power_iteration, max_iter=10_000) -> float:
    x = np.ones(g.shape[0], dtype=np.complex128) / np.sqrt(g.shape[0])
    lam = 0.0
    for _ in range(max_iter):
        y = g @ x
        ny = np.linalg.norm(y)
        if ny == 0.0:
            return 0.0
        new = float(np.real(np.vdot(x, y)))
        x = y / ny
        if abs(new - lam) <= tol * abs(new):
            return float(np.sqrt(max(new, 0.0)))
        lam = new
    # slow spectral gap; fall back to a dense eigensolve
    return float(np.sqrt(np.linalg.eigvalsh(g)[-1]))


def random_scattering(n1: int, n2: int, norm: float = 0.9, rng=None, reciprocal: bool = True):
    """Random partitioned network scaled to a target spectral norm.

    A complex Gaussian matrix, symmetrized when ``reciprocal`` is set, then
    scaled so that its largest singular value equals ``norm``. With
    ``norm < 1`` every cascade inner loop is contractive.
    """
    rng = np.random.default_rng(rng)
    n = n1 + n2
    s = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    if reciprocal:
        s = (s + s.T) / 2
    s *= norm / spectral_norm(s)
    return PartitionedScattering.from_full(s, n1)
