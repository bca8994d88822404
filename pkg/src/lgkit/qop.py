"""Operator and state algebra for small Hilbert spaces.

Everything here works with dense ``numpy`` complex arrays.  States and
observables are frozen dataclasses whose arrays are marked read-only, so
values can be shared freely between threads.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.linalg

from .errors import ValidationError

log = logging.getLogger(__name__)

STATE_TOL = 1e-9
DRIFT_WARN = 1e-8

I2 = np.eye(2, dtype=complex)
SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)
PAULI = (SX, SY, SZ)

for _m in (I2, SX, SY, SZ):
    _m.flags.writeable = False


def _frozen(m) -> np.ndarray:
    a = np.array(m, dtype=complex)
    a.flags.writeable = False
    return a


def as_matrix(x) -> np.ndarray:
    """Return the complex matrix behind a state, observable or array."""
    if isinstance(x, QuantumState):
        return x.matrix
    if isinstance(x, DichotomicObservable):
        return x.matrix
    return np.asarray(x, dtype=complex)


def _check_square(m: np.ndarray, what: str = "matrix") -> None:
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValidationError(f"{what} must be square, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValidationError(f"{what} has non-finite entries")


def hermiticity_error(m) -> float:
    m = as_matrix(m)
    return float(np.max(np.abs(m - m.conj().T))) if m.size else 0.0


def is_hermitian(m, tol: float = STATE_TOL) -> bool:
    return hermiticity_error(m) <= tol


def symmetrize(m: np.ndarray, context: str = "") -> np.ndarray:
    """Project onto the Hermitian part, warning when the drift was noticeable."""
    drift = hermiticity_error(m)
    if drift > DRIFT_WARN:
        log.warning("Hermiticity drift %.2e repaired%s", drift, f" ({context})" if context else "")
    return 0.5 * (m + m.conj().T)


def commutator(a, b) -> np.ndarray:
    a, b = as_matrix(a), as_matrix(b)
    return a @ b - b @ a


def anticommutator(a, b) -> np.ndarray:
    a, b = as_matrix(a), as_matrix(b)
    return a @ b + b @ a


def expectation(rho, op) -> float:
    """Real part of Tr(op rho); callers pass Hermitian operators."""
    return float(np.real(np.trace(as_matrix(op) @ as_matrix(rho))))


@dataclass(frozen=True, eq=False)
class QuantumState:
    """Density matrix, validated on construction.

    Parameters
    ----------
    matrix : array_like
        Square complex matrix.  Must be Hermitian, unit trace and positive
        semidefinite to within ``tol``.
    tol : float
        Validation tolerance.
    """

    matrix: np.ndarray
    tol: float = field(default=STATE_TOL, compare=False, repr=False)

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        _check_square(m, "density matrix")
        if hermiticity_error(m) > self.tol:
            raise ValidationError(f"density matrix not Hermitian (error {hermiticity_error(m):.2e})")
        m = 0.5 * (m + m.conj().T)
        tr = np.real(np.trace(m))
        if abs(tr - 1.0) > self.tol:
            raise ValidationError(f"density matrix trace is {tr:.12g}, expected 1")
        lo = float(np.linalg.eigvalsh(m)[0])
        if lo < -self.tol:
            raise ValidationError(f"density matrix has negative eigenvalue {lo:.3e}")
        m.flags.writeable = False
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @classmethod
    def pure(cls, psi) -> "QuantumState":
        psi = np.asarray(psi, dtype=complex).ravel()
        nrm = np.linalg.norm(psi)
        if nrm == 0:
            raise ValidationError("zero state vector")
        psi = psi / nrm
        return cls(np.outer(psi, psi.conj()))

    @classmethod
    def basis(cls, dim: int, index: int) -> "QuantumState":
        psi = np.zeros(dim, dtype=complex)
        psi[index] = 1.0
        return cls.pure(psi)

    @classmethod
    def maximally_mixed(cls, dim: int) -> "QuantumState":
        return cls(np.eye(dim, dtype=complex) / dim)

    @classmethod
    def from_bloch(cls, r) -> "QuantumState":
        r = np.asarray(r, dtype=float)
        if r.shape != (3,) or np.linalg.norm(r) > 1 + STATE_TOL:
            raise ValidationError("Bloch vector must be a 3-vector with |r| <= 1")
        return cls(0.5 * (I2 + r[0] * SX + r[1] * SY + r[2] * SZ))

    def bloch_vector(self) -> np.ndarray:
        if self.dim != 2:
            raise ValidationError("Bloch vector only defined for qubits")
        return np.array([expectation(self, p) for p in PAULI])

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.matrix)

    def expect(self, op) -> float:
        return expectation(self, op)


def random_state(dim: int, rng: np.random.Generator, rank: int | None = None) -> QuantumState:
    """Random density matrix from the induced (Ginibre) measure."""
    rank = dim if rank is None else rank
    g = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    m = g @ g.conj().T
    return QuantumState(m / np.trace(m).real)


def random_unit_vector(rng: np.random.Generator) -> np.ndarray:
    v = rng.normal(size=3)
    return v / np.linalg.norm(v)


def axis_from_angles(polar: float, azimuth: float = 0.0) -> np.ndarray:
    """Unit vector with the given polar angle from z and azimuth about z."""
    return np.array(
        [np.sin(polar) * np.cos(azimuth), np.sin(polar) * np.sin(azimuth), np.cos(polar)]
    )


@dataclass(frozen=True, eq=False)
class DichotomicObservable:
    """A +1/-1 valued observable given by a complementary projector pair."""

    projector_plus: np.ndarray
    projector_minus: np.ndarray
    axis: np.ndarray | None = None
    tol: float = field(default=STATE_TOL, compare=False, repr=False)

    def __post_init__(self):
        pp = np.array(self.projector_plus, dtype=complex)
        pm = np.array(self.projector_minus, dtype=complex)
        _check_square(pp, "projector")
        if pp.shape != pm.shape:
            raise ValidationError("projector shapes differ")
        eye = np.eye(pp.shape[0])
        for p in (pp, pm):
            if hermiticity_error(p) > self.tol or np.max(np.abs(p @ p - p)) > self.tol:
                raise ValidationError("projectors must be Hermitian and idempotent")
        if np.max(np.abs(pp @ pm)) > self.tol or np.max(np.abs(pp + pm - eye)) > self.tol:
            raise ValidationError("projectors must be orthogonal and sum to identity")
        object.__setattr__(self, "projector_plus", _frozen(pp))
        object.__setattr__(self, "projector_minus", _frozen(pm))
        if self.axis is not None:
            a = np.array(self.axis, dtype=float)
            a.flags.writeable = False
            object.__setattr__(self, "axis", a)

    @property
    def dim(self) -> int:
        return self.projector_plus.shape[0]

    @property
    def matrix(self) -> np.ndarray:
        return self.projector_plus - self.projector_minus

    def projector(self, value: int) -> np.ndarray:
        if value == 1:
            return self.projector_plus
        if value == -1:
            return self.projector_minus
        raise ValidationError(f"dichotomic outcome must be +1 or -1, got {value}")

    def flipped(self) -> "DichotomicObservable":
        axis = None if self.axis is None else -self.axis
        return DichotomicObservable(self.projector_minus, self.projector_plus, axis)

    @classmethod
    def from_projector(cls, projector_plus) -> "DichotomicObservable":
        pp = np.asarray(projector_plus, dtype=complex)
        return cls(pp, np.eye(pp.shape[0]) - pp)


def observable_from_axis(a) -> DichotomicObservable:
    """Qubit observable ``a . sigma`` for a unit 3-vector ``a``."""
    a = np.asarray(a, dtype=float)
    if a.shape != (3,):
        raise ValidationError("axis must be a 3-vector")
    nrm = np.linalg.norm(a)
    if abs(nrm - 1.0) > STATE_TOL:
        raise ValidationError(f"axis has norm {nrm:.12g}; normalise it first (a / |a|)")
    q = a[0] * SX + a[1] * SY + a[2] * SZ
    return DichotomicObservable(0.5 * (I2 + q), 0.5 * (I2 - q), axis=a)


SIGMA_Z = observable_from_axis((0.0, 0.0, 1.0))
SIGMA_X = observable_from_axis((1.0, 0.0, 0.0))


def expm(a: np.ndarray) -> np.ndarray:
    """Matrix exponential (scaling and squaring)."""
    return scipy.linalg.expm(np.asarray(a, dtype=complex))


def unitary(h, t: float) -> np.ndarray:
    """``exp(-i H t)`` for Hermitian ``H`` by eigendecomposition."""
    h = as_matrix(h)
    _check_square(h, "Hamiltonian")
    if not is_hermitian(h):
        raise ValidationError("Hamiltonian must be Hermitian")
    w, v = np.linalg.eigh(0.5 * (h + h.conj().T))
    return (v * np.exp(-1j * w * t)) @ v.conj().T


def evolve(rho: QuantumState, h, t: float) -> QuantumState:
    u = unitary(h, t)
    return QuantumState(symmetrize(u @ rho.matrix @ u.conj().T, "evolve"), tol=rho.tol)


def conjugate(rho: QuantumState, u) -> QuantumState:
    """``U rho U^dag`` for a given unitary matrix."""
    u = as_matrix(u)
    return QuantumState(symmetrize(u @ rho.matrix @ u.conj().T, "conjugate"), tol=rho.tol)


@dataclass(frozen=True, eq=False)
class KrausChannel:
    """CPTP map in Kraus form.

    ``contraction`` is set for depolarizing channels built with
    :meth:`depolarizing`, and is ``None`` otherwise.
    """

    operators: tuple
    contraction: float | None = None
    tol: float = field(default=STATE_TOL, compare=False, repr=False)

    def __post_init__(self):
        ops = tuple(_frozen(k) for k in self.operators)
        if not ops:
            raise ValidationError("channel needs at least one Kraus operator")
        d = ops[0].shape[0]
        for k in ops:
            _check_square(k, "Kraus operator")
            if k.shape[0] != d:
                raise ValidationError("Kraus operators have inconsistent dimensions")
        total = sum(k.conj().T @ k for k in ops)
        err = float(np.max(np.abs(total - np.eye(d))))
        if err > self.tol:
            raise ValidationError(f"Kraus completeness violated by {err:.2e}")
        object.__setattr__(self, "operators", ops)

    @property
    def dim(self) -> int:
        return self.operators[0].shape[0]

    @classmethod
    def identity(cls, dim: int) -> "KrausChannel":
        return cls((np.eye(dim),))

    @classmethod
    def unitary(cls, u) -> "KrausChannel":
        return cls((as_matrix(u),))

    @classmethod
    def depolarizing(cls, c: float) -> "KrausChannel":
        """Qubit channel contracting the Bloch vector by ``c``.

        Complete positivity restricts ``c`` to [-1/3, 1]; use
        :func:`depolarize_bloch` for the full affine range.
        """
        if not -1.0 / 3.0 - STATE_TOL <= c <= 1.0 + STATE_TOL:
            raise ValidationError(
                f"depolarizing contraction {c} is not CPTP in Kraus form (needs -1/3 <= c <= 1)"
            )
        p = min(max(0.75 * (1.0 - c), 0.0), 1.0)
        ops = [np.sqrt(1.0 - p) * I2] + [np.sqrt(p / 3.0) * s for s in PAULI]
        return cls(tuple(ops), contraction=float(c))

    @classmethod
    def dephasing(cls, p: float) -> "KrausChannel":
        """Phase flip with probability ``p`` (coherences scale by ``1-2p``)."""
        if not 0.0 <= p <= 1.0:
            raise ValidationError("dephasing probability must lie in [0, 1]")
        return cls((np.sqrt(1 - p) * I2, np.sqrt(p) * SZ))

    def then(self, other: "KrausChannel") -> "KrausChannel":
        """Channel applying ``self`` first, then ``other``."""
        ops = tuple(b @ a for a in self.operators for b in other.operators)
        return KrausChannel(ops)

    def map_operator(self, x: np.ndarray) -> np.ndarray:
        """Apply the linear map to an arbitrary operator (no validation)."""
        return sum(k @ x @ k.conj().T for k in self.operators)


def apply_channel(rho: QuantumState, ch: KrausChannel) -> QuantumState:
    if ch.dim != rho.dim:
        raise ValidationError(f"channel dimension {ch.dim} != state dimension {rho.dim}")
    return QuantumState(symmetrize(ch.map_operator(rho.matrix), "apply_channel"), tol=rho.tol)


def depolarize_bloch(r, c: float) -> np.ndarray:
    """Affine depolarizing map on a Bloch vector; any ``c`` in [-1, 1]."""
    if not -1.0 <= c <= 1.0:
        raise ValidationError("contraction must lie in [-1, 1]")
    return c * np.asarray(r, dtype=float)


def tensor(*ops) -> np.ndarray:
    """Kronecker product of states, observables or matrices."""
    if not ops:
        raise ValidationError("tensor needs at least one factor")
    out = as_matrix(ops[0])
    for op in ops[1:]:
        out = np.kron(out, as_matrix(op))
    return out


def partial_trace(rho, dims: Sequence[int], keep) -> np.ndarray | QuantumState:
    """Trace out every subsystem not listed in ``keep``.

    Returns a :class:`QuantumState` when given one, otherwise a matrix.
    """
    m = as_matrix(rho)
    dims = [int(d) for d in dims]
    if int(np.prod(dims)) != m.shape[0] or m.shape[0] != m.shape[1]:
        raise ValidationError(f"dims {dims} incompatible with matrix of shape {m.shape}")
    keep = sorted([keep] if isinstance(keep, int) else keep)
    if any(k < 0 or k >= len(dims) for k in keep):
        raise ValidationError("subsystem index out of range")
    n = len(dims)
    t = m.reshape(dims + dims)
    traced = [k for k in range(n) if k not in keep]
    # contract traced axes pairwise, highest first so indices stay valid
    for k in sorted(traced, reverse=True):
        nk = t.ndim // 2
        t = np.trace(t, axis1=k, axis2=k + nk)
    dk = int(np.prod([dims[k] for k in keep])) if keep else 1
    out = t.reshape(dk, dk)
    if isinstance(rho, QuantumState):
        return QuantumState(symmetrize(out, "partial_trace"), tol=rho.tol)
    return out
