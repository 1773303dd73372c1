"""Exact complex linear algebra for small tensor-product systems.

States, observables and projectors are immutable numpy-backed values.  Every
probability produced here is a plain Born-rule contraction; the physics
modules treat these numbers as ground truth and cross-check their closed
forms against them.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

# Largest total Hilbert-space dimension tensor() will build (3x3 (x) 3x3).
MAX_TOTAL_DIM = 81

NORM_TOL = 1e-12
HERMITIAN_TOL = 1e-12
IDEMPOTENT_TOL = 1e-10
EIGEN_TOL = 1e-9

# Relative magnitude below which a component is treated as zero when fixing
# the global phase of an eigenvector.
_PHASE_ZERO_REL = 1e-8


class DimensionError(ValueError):
    """Dimensions are inconsistent or exceed the configured maximum."""


class NotAnEigenvalue(ValueError):
    """The requested value is not in the spectrum within tolerance."""


class DegenerateEigenspace(ValueError):
    """The requested eigenvalue has multiplicity > 1; no canonical vector."""


def _complex_vector(values, name: str) -> np.ndarray:
    arr = np.array(values, dtype=np.complex128).reshape(-1)
    if not np.all(np.isfinite(arr.real)) or not np.all(np.isfinite(arr.imag)):
        raise ValueError(f"{name} contains non-finite entries")
    return arr


def _complex_matrix(values, name: str) -> np.ndarray:
    arr = np.array(values, dtype=np.complex128)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise DimensionError(f"{name} must be a square matrix, got {arr.shape}")
    if not np.all(np.isfinite(arr.real)) or not np.all(np.isfinite(arr.imag)):
        raise ValueError(f"{name} contains non-finite entries")
    return arr


def _default_labels(dim: int) -> tuple[str, ...]:
    return tuple(str(k) for k in range(dim))


def fix_phase(vec: np.ndarray) -> np.ndarray:
    """Rotate the global phase so the first nonzero component is real > 0."""
    vec = np.asarray(vec, dtype=np.complex128)
    scale = np.max(np.abs(vec))
    if scale == 0.0:
        raise ValueError("cannot fix the phase of a zero vector")
    for comp in vec:
        if abs(comp) > _PHASE_ZERO_REL * scale:
            return vec * (comp.conjugate() / abs(comp))
    raise ValueError("no component above the phase threshold")


@dataclass(frozen=True)
class StateVector:
    """Normalized amplitudes over a labeled tensor-product basis.

    ``amps`` is stored in row-major tensor order over ``dims``; construction
    normalizes and freezes the array.
    """

    dims: tuple[int, ...]
    amps: np.ndarray
    labels: tuple[tuple[str, ...], ...] | None = None

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        if not dims or any(d < 1 for d in dims):
            raise DimensionError(f"invalid dims {dims}")
        amps = _complex_vector(self.amps, "amps")
        if amps.size != int(np.prod(dims)):
            raise DimensionError(
                f"amps length {amps.size} does not match dims {dims}"
            )
        norm = float(np.linalg.norm(amps))
        if norm < NORM_TOL:
            raise ValueError("state has (near-)zero norm")
        amps = amps / norm
        amps.setflags(write=False)
        labels = self.labels
        if labels is None:
            labels = tuple(_default_labels(d) for d in dims)
        else:
            labels = tuple(tuple(site) for site in labels)
            if len(labels) != len(dims) or any(
                len(site) != d for site, d in zip(labels, dims)
            ):
                raise DimensionError("labels do not match dims")
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "amps", amps)
        object.__setattr__(self, "labels", labels)

    @property
    def site_count(self) -> int:
        return len(self.dims)

    @property
    def total_dim(self) -> int:
        return int(np.prod(self.dims))

    def as_tensor(self) -> np.ndarray:
        return self.amps.reshape(self.dims)

    def amplitude(self, outcome: Sequence[str]) -> complex:
        """Amplitude of the basis state named by per-site labels."""
        if len(outcome) != self.site_count:
            raise DimensionError("outcome length does not match site count")
        idx = tuple(self.labels[s].index(lab) for s, lab in enumerate(outcome))
        return complex(self.as_tensor()[idx])

    def overlap(self, other: "StateVector") -> complex:
        if self.dims != other.dims:
            raise DimensionError("overlap requires identical dims")
        return complex(np.vdot(self.amps, other.amps))


def basis_state(
    dims: Sequence[int],
    indices: Sequence[int],
    labels: Sequence[Sequence[str]] | None = None,
) -> StateVector:
    """Product basis state |i1 i2 ...> over the given dims."""
    dims = tuple(int(d) for d in dims)
    amps = np.zeros(int(np.prod(dims)), dtype=np.complex128)
    flat = int(np.ravel_multi_index(tuple(indices), dims))
    amps[flat] = 1.0
    return StateVector(dims, amps, None if labels is None else tuple(map(tuple, labels)))


def tensor(a: StateVector, b: StateVector) -> StateVector:
    """Tensor product of two states; amplitudes are the Kronecker product."""
    total = a.total_dim * b.total_dim
    if total > MAX_TOTAL_DIM:
        raise DimensionError(
            f"tensor product dimension {total} exceeds maximum {MAX_TOTAL_DIM}"
        )
    return StateVector(a.dims + b.dims, np.kron(a.amps, b.amps), a.labels + b.labels)


@dataclass(frozen=True)
class Observable:
    """Hermitian matrix, optionally with basis labels."""

    matrix: np.ndarray
    labels: tuple[str, ...] | None = None

    def __post_init__(self):
        mat = _complex_matrix(self.matrix, "observable matrix")
        if np.max(np.abs(mat - mat.conj().T)) > HERMITIAN_TOL:
            raise ValueError("observable matrix is not Hermitian within 1e-12")
        mat.setflags(write=False)
        labels = self.labels
        if labels is not None:
            labels = tuple(labels)
            if len(labels) != mat.shape[0]:
                raise DimensionError("labels do not match matrix dimension")
        object.__setattr__(self, "matrix", mat)
        object.__setattr__(self, "labels", labels)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.matrix)


@dataclass(frozen=True)
class Projector:
    """Hermitian idempotent matrix (eigenvalues 0/1)."""

    matrix: np.ndarray

    def __post_init__(self):
        mat = _complex_matrix(self.matrix, "projector matrix")
        if np.max(np.abs(mat - mat.conj().T)) > HERMITIAN_TOL:
            raise ValueError("projector matrix is not Hermitian within 1e-12")
        if np.max(np.abs(mat @ mat - mat)) > IDEMPOTENT_TOL:
            raise ValueError("projector matrix is not idempotent within 1e-10")
        evals = np.linalg.eigvalsh(mat)
        if np.max(np.minimum(np.abs(evals), np.abs(evals - 1.0))) > 1e-8:
            raise ValueError("projector eigenvalues are not in {0, 1}")
        mat.setflags(write=False)
        object.__setattr__(self, "matrix", mat)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @classmethod
    def onto(cls, vector) -> "Projector":
        """Rank-1 projector |v><v| onto a (normalized copy of a) vector."""
        if isinstance(vector, StateVector):
            vec = vector.amps
        else:
            vec = _complex_vector(vector, "vector")
            norm = float(np.linalg.norm(vec))
            if norm < NORM_TOL:
                raise ValueError("cannot project onto a zero vector")
            vec = vec / norm
        return cls(np.outer(vec, vec.conj()))

    @classmethod
    def identity(cls, dim: int) -> "Projector":
        return cls(np.eye(dim, dtype=np.complex128))

    def complement(self) -> "Projector":
        return Projector(np.eye(self.dim, dtype=np.complex128) - self.matrix)


def born_probability(
    state: StateVector, ops: Sequence[Projector | None]
) -> float:
    """Born probability <psi| (x)_i P_i |psi>; None means identity on a site.

    The result is checked real and finite, then clamped to [0, 1] to strip
    roundoff like -1e-17 before inequality sums.
    """
    if len(ops) != state.site_count:
        raise DimensionError("one projector (or None) required per site")
    tensor_amps = state.as_tensor()
    for axis, op in enumerate(ops):
        if op is None:
            continue
        if not isinstance(op, Projector):
            raise TypeError("per-site operators must be Projector or None")
        if op.dim != state.dims[axis]:
            raise DimensionError(
                f"projector dim {op.dim} does not match site dim {state.dims[axis]}"
            )
        tensor_amps = np.moveaxis(
            np.tensordot(op.matrix, tensor_amps, axes=([1], [axis])), 0, axis
        )
    value = complex(np.vdot(state.amps, tensor_amps.ravel()))
    if not (np.isfinite(value.real) and np.isfinite(value.imag)):
        raise FloatingPointError("non-finite Born probability")
    if abs(value.imag) > 1e-10:
        raise FloatingPointError(f"Born probability has imaginary part {value.imag}")
    p = value.real
    if p < -1e-12 or p > 1 + 1e-12:
        raise FloatingPointError(f"Born probability {p} outside [0, 1] window")
    return min(max(p, 0.0), 1.0)


def eigenvector_for_eigenvalue(
    obs: Observable, target: float, tol: float = EIGEN_TOL
) -> StateVector:
    """Unit eigenvector of ``obs`` for the eigenvalue nearest ``target``.

    The eigenvalue is located with a direct Hermitian solve and the vector is
    taken from the null space of (A - lambda), so results are deterministic.
    The phase convention makes the first nonzero component real positive.
    """
    evals = np.linalg.eigvalsh(obs.matrix)
    matches = np.nonzero(np.abs(evals - target) <= tol)[0]
    if matches.size == 0:
        raise NotAnEigenvalue(
            f"no eigenvalue within {tol} of {target}; spectrum {evals}"
        )
    if matches.size > 1:
        raise DegenerateEigenspace(
            f"eigenvalue near {target} has multiplicity {matches.size}"
        )
    lam = float(evals[matches[0]])
    shifted = obs.matrix - lam * np.eye(obs.dim, dtype=np.complex128)
    # Null-space vector = right singular vector for the smallest singular value.
    _, _, vh = np.linalg.svd(shifted)
    vec = fix_phase(vh[-1].conj())
    residual = float(np.linalg.norm(obs.matrix @ vec - lam * vec))
    if residual > 1e-9:
        raise FloatingPointError(f"eigenvector residual {residual} too large")
    return StateVector((obs.dim,), vec, None if obs.labels is None else (obs.labels,))
