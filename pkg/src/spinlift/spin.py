"""Angular-momentum algebra, canonical states and the SU(2) -> spin-j lift.

Basis convention (used everywhere in this package): a d-level system is a
spin j = (d-1)/2, and basis index i corresponds to the magnetic quantum
number m = -j + i, i.e. m runs from -j to +j as the index increases.  For
d = 3 the ordering is (|-1>, |0>, |+1>), for d = 2 it is (|down>, |up>).
With this ordering Jz = diag(-j, ..., +j) and the rotating-frame Hamiltonian

    H = Omega_half * cos(chi) * Jx + Omega_half * sin(chi) * Jy
        + delta_half * Jz

has e^{+i chi} on the upper off-diagonals, matching the two-field dressing
Hamiltonian of the three-level system this package models.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from math import comb
from typing import Iterable

import numpy as np

__all__ = [
    "DimensionError",
    "NormalizationError",
    "UnknownStateError",
    "StateVector",
    "SpinOperators",
    "Unitary",
    "angular_momentum_ops",
    "rotation_unitary",
    "lift_unitary",
    "named_state",
    "basis_state",
    "state_fidelity",
    "unitary_phase_distance",
    "states_equal_up_to_phase",
    "phase_aligned_deviation",
]

NORM_TOL = 1e-9
UNITARY_TOL = 1e-12


class DimensionError(ValueError):
    """Raised for invalid or mismatched Hilbert-space dimensions."""


class NormalizationError(ValueError):
    """Raised when an amplitude pair / state / axis is not normalized."""


class UnknownStateError(KeyError):
    """Raised by named_state for labels that do not exist at a given d."""


def _as_readonly(arr: np.ndarray) -> np.ndarray:
    arr = np.ascontiguousarray(arr)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class StateVector:
    """Unit-norm complex amplitudes over d levels, basis ordered by ascending m."""

    amps: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amps, dtype=complex).reshape(-1)
        if amps.size < 2:
            raise DimensionError(f"state needs dim >= 2, got {amps.size}")
        norm_sq = float(np.sum(np.abs(amps) ** 2))
        if abs(norm_sq - 1.0) > 1e-12:
            raise NormalizationError(f"state norm^2 deviates from 1 by {norm_sq - 1.0:.3e}")
        object.__setattr__(self, "amps", _as_readonly(amps))

    @property
    def dim(self) -> int:
        return self.amps.size

    def overlap(self, other: "StateVector") -> complex:
        if self.dim != other.dim:
            raise DimensionError(f"dim mismatch: {self.dim} vs {other.dim}")
        return complex(np.vdot(other.amps, self.amps))

    def populations(self) -> np.ndarray:
        return np.abs(self.amps) ** 2

    def density_matrix(self) -> np.ndarray:
        return np.outer(self.amps, self.amps.conj())


@dataclass(frozen=True)
class SpinOperators:
    """Jx, Jy, Jz for a spin j = (dim-1)/2, dimensionless (hbar = 1)."""

    dim: int
    jx: np.ndarray
    jy: np.ndarray
    jz: np.ndarray

    @property
    def j(self) -> float:
        return (self.dim - 1) / 2


@dataclass(frozen=True)
class Unitary:
    """A d x d unitary matrix; unitarity is enforced at construction."""

    mat: np.ndarray

    def __post_init__(self):
        mat = np.asarray(self.mat, dtype=complex)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise DimensionError(f"unitary must be square, got shape {mat.shape}")
        dev = np.max(np.abs(mat.conj().T @ mat - np.eye(mat.shape[0])))
        if dev > UNITARY_TOL:
            raise NormalizationError(f"matrix is not unitary, max |U^dag U - I| = {dev:.3e}")
        object.__setattr__(self, "mat", _as_readonly(mat))

    @property
    def dim(self) -> int:
        return self.mat.shape[0]

    def __matmul__(self, other):
        if isinstance(other, Unitary):
            return Unitary(self.mat @ other.mat)
        if isinstance(other, StateVector):
            return StateVector(self.mat @ other.amps)
        return NotImplemented


@lru_cache(maxsize=None)
def _jops_cached(d: int):
    j = (d - 1) / 2
    m = -j + np.arange(d)
    # <m+1| J+ |m> = sqrt(j(j+1) - m(m+1))
    cplus = np.sqrt(j * (j + 1) - m[:-1] * (m[:-1] + 1))
    jplus = np.zeros((d, d), dtype=complex)
    jplus[np.arange(1, d), np.arange(d - 1)] = cplus
    jminus = jplus.conj().T
    jx = (jplus + jminus) / 2
    jy = (jplus - jminus) / 2j
    jz = np.diag(m).astype(complex)
    return tuple(_as_readonly(a) for a in (jx, jy, jz))


def angular_momentum_ops(d: int) -> SpinOperators:
    """Spin-j operators for a d-level system (j = (d-1)/2), ladder construction."""
    if not isinstance(d, (int, np.integer)) or d < 2:
        raise DimensionError(f"dimension must be an integer >= 2, got {d!r}")
    jx, jy, jz = _jops_cached(int(d))
    return SpinOperators(dim=int(d), jx=jx, jy=jy, jz=jz)


def _expm_hermitian(h: np.ndarray, t: float = 1.0) -> np.ndarray:
    """exp(-i t H) for Hermitian H via spectral decomposition (exactly unitary)."""
    w, v = np.linalg.eigh(h)
    return (v * np.exp(-1j * t * w)) @ v.conj().T


def rotation_unitary(d: int, axis: Iterable[float], angle: float) -> Unitary:
    """exp(-i * angle * (axis . J)) for a unit 3-vector axis."""
    ops = angular_momentum_ops(d)
    axis = np.asarray(axis, dtype=float).reshape(3)
    norm = float(np.linalg.norm(axis))
    if abs(norm - 1.0) > NORM_TOL:
        raise NormalizationError(f"rotation axis must be a unit vector, |axis| = {norm:.12f}")
    gen = axis[0] * ops.jx + axis[1] * ops.jy + axis[2] * ops.jz
    return Unitary(_expm_hermitian(gen, angle))


def lift_unitary(a: complex, b: complex, d: int) -> Unitary:
    """Spin-j representation of the two-level unitary [[a, -b*], [b, a*]].

    This is the symmetric-tensor-power representation; the matrix elements
    are the binomial-coefficient sums

        U_rs = sum_q sqrt(C(r-1,q) C(s-1,q) C(d-r,s-1-q) C(d-s,r-1-q))
               * a^(d+1-r-s+q) (a*)^q b^(r-1-q) (-b*)^(s-1-q)

    with r, s in 1..d and q in max(0, r+s-d-1) .. min(r-1, s-1).  For d = 2
    it reproduces [[a, -b*], [b, a*]] exactly, and for d = 3 the familiar
    qutrit form with |a|^2 - |b|^2 in the centre.  The map is a group
    homomorphism: lifting a product equals the product of the lifts.
    """
    if not isinstance(d, (int, np.integer)) or d < 2:
        raise DimensionError(f"dimension must be an integer >= 2, got {d!r}")
    a = complex(a)
    b = complex(b)
    norm_sq = abs(a) ** 2 + abs(b) ** 2
    if abs(norm_sq - 1.0) > NORM_TOL:
        raise NormalizationError(f"|a|^2 + |b|^2 deviates from 1 by {norm_sq - 1.0:.3e}")
    n = d - 1  # 2j
    mat = np.zeros((d, d), dtype=complex)
    for r in range(1, d + 1):
        for s in range(1, d + 1):
            q_min = max(0, r + s - n - 2)
            q_max = min(r - 1, s - 1)
            total = 0.0 + 0.0j
            for q in range(q_min, q_max + 1):
                coeff = np.sqrt(
                    comb(r - 1, q)
                    * comb(s - 1, q)
                    * comb(n + 1 - r, s - 1 - q)
                    * comb(n + 1 - s, r - 1 - q)
                )
                total += (
                    coeff
                    * a ** (n + 2 - r - s + q)
                    * np.conj(a) ** q
                    * b ** (r - 1 - q)
                    * (-np.conj(b)) ** (s - 1 - q)
                )
            mat[r - 1, s - 1] = total
    return Unitary(mat)


def basis_state(d: int, index: int) -> StateVector:
    """Basis state at the given index (m = -j + index)."""
    if index < 0 or index >= d:
        raise DimensionError(f"basis index {index} out of range for d={d}")
    amps = np.zeros(d, dtype=complex)
    amps[index] = 1.0
    return StateVector(amps)


_SQ2 = np.sqrt(2.0)

# Analytic states for d = 3, in (|-1>, |0>, |+1>) order.  |u>, |D>, |d> are
# the Jx eigenstates with eigenvalues +1, 0, -1.
_NAMED_D3 = {
    "-1": np.array([1, 0, 0], dtype=complex),
    "0": np.array([0, 1, 0], dtype=complex),
    "+1": np.array([0, 0, 1], dtype=complex),
    "D": np.array([-1, 0, 1], dtype=complex) / _SQ2,
    "u": np.array([0.5, 1 / _SQ2, 0.5], dtype=complex),
    "d": np.array([0.5, -1 / _SQ2, 0.5], dtype=complex),
}


def named_state(d: int, name: str) -> StateVector:
    """Canonical states by label: '-1', '0', '+1', 'D', 'u', 'd' (d = 3); '0' for any odd d."""
    if d == 3:
        try:
            return StateVector(_NAMED_D3[name])
        except KeyError:
            raise UnknownStateError(f"unknown state label {name!r} for d=3") from None
    if name == "0" and d % 2 == 1:
        return basis_state(d, (d - 1) // 2)
    raise UnknownStateError(f"unknown state label {name!r} for d={d}")


def state_fidelity(psi: StateVector, phi: StateVector) -> float:
    """|<phi|psi>|^2; symmetric, in [0, 1]."""
    return min(1.0, abs(psi.overlap(phi)) ** 2)


def unitary_phase_distance(a: Unitary | np.ndarray, b: Unitary | np.ndarray) -> float:
    """Global-phase-insensitive deviation 1 - |tr(A^dag B)| / d between unitaries."""
    am = a.mat if isinstance(a, Unitary) else np.asarray(a)
    bm = b.mat if isinstance(b, Unitary) else np.asarray(b)
    if am.shape != bm.shape:
        raise DimensionError(f"shape mismatch: {am.shape} vs {bm.shape}")
    d = am.shape[0]
    return float(1.0 - abs(np.trace(am.conj().T @ bm)) / d)


def states_equal_up_to_phase(psi: StateVector, phi: StateVector, tol: float = 1e-10) -> bool:
    """True when 1 - |<phi|psi>| <= tol."""
    return 1.0 - abs(psi.overlap(phi)) <= tol


def phase_aligned_deviation(a: Unitary | np.ndarray, b: Unitary | np.ndarray) -> float:
    """max-entry deviation between A and B after removing the global phase
    (min over phi of max |e^{i phi} A - B|, with phi from the trace overlap)."""
    am = a.mat if isinstance(a, Unitary) else np.asarray(a)
    bm = b.mat if isinstance(b, Unitary) else np.asarray(b)
    if am.shape != bm.shape:
        raise DimensionError(f"shape mismatch: {am.shape} vs {bm.shape}")
    tr = np.trace(am.conj().T @ bm)
    phase = tr / abs(tr) if abs(tr) > 0 else 1.0
    return float(np.max(np.abs(phase * am - bm)))
