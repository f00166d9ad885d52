"""
Dense complex-matrix kernel

Kronecker products, partial traces, subsystem permutations and the Hermitian
eigendecomposition every entropy evaluation goes through. Matrices are plain
numpy arrays of dtype complex128; everything here is a pure function.
"""

import logging
from dataclasses import dataclass
from functools import reduce
from typing import Iterable, Sequence

import numpy as np

from config import TOL_EIG, TOL_HERM

logger = logging.getLogger(__name__)


class DimensionMismatchError(ValueError):
    """Raised when matrix shapes disagree with declared subsystem dimensions."""


class ContractViolationError(ValueError):
    """Raised when an input breaks a documented precondition."""


@dataclass(frozen=True)
class HermitianEigenSystem:
    eigenvalues: np.ndarray  # real, descending
    eigenvectors: np.ndarray  # columns

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T


def as_matrix(m) -> np.ndarray:
    return np.asarray(m, dtype=np.complex128)


def dagger(m: np.ndarray) -> np.ndarray:
    """Conjugate transpose."""
    return np.conj(m).T


def ket(index: int, d: int) -> np.ndarray:
    v = np.zeros(d, dtype=np.complex128)
    v[index] = 1.0
    return v


def projector(vector) -> np.ndarray:
    v = np.asarray(vector, dtype=np.complex128).reshape(-1)
    return np.outer(v, v.conj())


def tensor(*matrices) -> np.ndarray:
    """Kronecker product of one or more matrices, left to right."""
    if not matrices:
        raise ContractViolationError("tensor needs at least one factor")
    return reduce(np.kron, (as_matrix(m) for m in matrices))


def is_hermitian(m: np.ndarray, tol: float = TOL_HERM) -> bool:
    m = as_matrix(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        return False
    return bool(np.max(np.abs(m - dagger(m)), initial=0.0) <= tol)


def _check_dims(m: np.ndarray, dims: Sequence[int]) -> None:
    total = int(np.prod(dims))
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] != total:
        raise DimensionMismatchError(
            f"subsystem dims {list(dims)} (product {total}) do not match matrix shape {m.shape}"
        )


def partial_trace(m, dims: Sequence[int], keep: Iterable[int]) -> np.ndarray:
    """Reduce ``m`` on the subsystems listed in ``keep``, in ascending subsystem order."""
    m = as_matrix(m)
    dims = [int(d) for d in dims]
    _check_dims(m, dims)
    keep = sorted(set(int(k) for k in keep))
    n = len(dims)
    if not keep or keep[0] < 0 or keep[-1] >= n:
        raise ContractViolationError(f"keep={keep} must be a nonempty subset of 0..{n - 1}")

    tensor_form = m.reshape(dims + dims)
    current = n
    for index in sorted(set(range(n)) - set(keep), reverse=True):
        tensor_form = np.trace(tensor_form, axis1=index, axis2=index + current)
        current -= 1

    kept = int(np.prod([dims[k] for k in keep]))
    return tensor_form.reshape(kept, kept)


def permute_subsystems(m, dims: Sequence[int], perm: Sequence[int]) -> np.ndarray:
    """Reorder tensor factors so that new factor ``i`` is old factor ``perm[i]``."""
    m = as_matrix(m)
    dims = [int(d) for d in dims]
    _check_dims(m, dims)
    n = len(dims)
    if sorted(perm) != list(range(n)):
        raise ContractViolationError(f"{perm} is not a permutation of 0..{n - 1}")
    axes = list(perm) + [p + n for p in perm]
    total = m.shape[0]
    return m.reshape(dims + dims).transpose(axes).reshape(total, total)


def hermitian_eig(m) -> HermitianEigenSystem:
    m = as_matrix(m)
    if not is_hermitian(m):
        raise ContractViolationError("hermitian_eig called on a non-Hermitian matrix")
    m = (m + dagger(m)) / 2
    values, vectors = np.linalg.eigh(m)
    order = np.argsort(values)[::-1]
    return HermitianEigenSystem(eigenvalues=values[order].real, eigenvectors=vectors[:, order])


def fix_column_phases(vectors: np.ndarray, tol: float = TOL_EIG) -> np.ndarray:
    """Rotate each column so its first non-negligible entry is real and nonnegative."""
    fixed = np.array(vectors, dtype=np.complex128, copy=True)
    for j in range(fixed.shape[1]):
        column = fixed[:, j]
        nonzero = np.flatnonzero(np.abs(column) > tol)
        if nonzero.size:
            pivot = column[nonzero[0]]
            fixed[:, j] = column * (np.abs(pivot) / pivot)
    return fixed


def max_abs_diff(a, b) -> float:
    return float(np.max(np.abs(as_matrix(a) - as_matrix(b)), initial=0.0))


def allclose(a, b, atol: float) -> bool:
    """Element-wise equality within an absolute tolerance."""
    a, b = as_matrix(a), as_matrix(b)
    return a.shape == b.shape and max_abs_diff(a, b) <= atol


PAULI_I = np.eye(2, dtype=np.complex128)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=np.complex128)
