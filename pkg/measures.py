"""
Entropic functionals in bits: von Neumann entropy, quantum relative entropy,
dephasing in a reference frame, relative-entropy and l1 coherence.
"""

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import xlogy

from config import TOL_PSD, TOL_SUPPORT_RHO, TOL_SUPPORT_SIGMA
from matrix_core import (
    ContractViolationError, DimensionMismatchError, as_matrix, dagger,
    hermitian_eig, tensor
)
from states import DensityMatrix

logger = logging.getLogger(__name__)

Bits = float


@dataclass(frozen=True)
class Basis:
    frame: np.ndarray  # columns are the reference kets

    def __post_init__(self):
        frame = as_matrix(self.frame)
        d = frame.shape[0]
        if frame.shape != (d, d) or np.max(np.abs(dagger(frame) @ frame - np.eye(d))) > 1e-10:
            raise ContractViolationError("basis frame must be a square unitary matrix")
        frame.setflags(write=False)
        object.__setattr__(self, 'frame', frame)

    @property
    def dim(self) -> int:
        return self.frame.shape[0]

    @classmethod
    def computational(cls, d: int) -> 'Basis':
        return cls(np.eye(d, dtype=np.complex128))

    @classmethod
    def plus_minus(cls) -> 'Basis':
        return cls(np.array([[1, 1], [1, -1]], dtype=np.complex128) / np.sqrt(2))

    @classmethod
    def product(cls, *bases: 'Basis') -> 'Basis':
        """{|i⟩ ⊗ |μ⟩} frame on a composite system."""
        return cls(tensor(*(b.frame for b in bases)))


def _check_same_dim(a: int, b: int, what: str) -> None:
    if a != b:
        raise DimensionMismatchError(f"{what}: dimensions {a} and {b} differ")


def entropy_of_spectra(eigenvalues) -> np.ndarray:
    """−Σ λ log₂ λ along the last axis with 0·log 0 = 0 after the PSD clamp."""
    values = np.asarray(eigenvalues, dtype=float)
    if values.size and values.min() < -TOL_PSD:
        raise ContractViolationError(f"spectrum has negative weight {values.min():.3e}")
    values = np.clip(values, 0.0, 1.0)
    return np.maximum(-np.sum(xlogy(values, values), axis=-1) / math.log(2), 0.0)


def entropy_of_spectrum(eigenvalues) -> Bits:
    return float(entropy_of_spectra(eigenvalues))


def entropy_of_matrices(stack: np.ndarray) -> np.ndarray:
    """Entropies of a (n, d, d) stack of Hermitian matrices."""
    stack = np.asarray(stack)
    return entropy_of_spectra(np.linalg.eigvalsh((stack + np.conj(np.swapaxes(stack, -1, -2))) / 2))


def entropy_of_matrix(m) -> Bits:
    return entropy_of_spectrum(hermitian_eig(m).eigenvalues)


def von_neumann_entropy(rho: DensityMatrix) -> Bits:
    return entropy_of_matrix(rho.matrix)


def relative_entropy(rho: DensityMatrix, sigma: DensityMatrix) -> Bits:
    """S(ρ‖σ) = Tr ρ(log₂ρ − log₂σ); +inf when supp ρ ⊄ supp σ."""
    _check_same_dim(rho.dim, sigma.dim, "relative_entropy")
    sigma_eig = hermitian_eig(sigma.matrix)
    vectors = sigma_eig.eigenvectors
    # ⟨w_j|ρ|w_j⟩ in σ's eigenbasis
    weights = np.real(np.einsum('ij,ik,kj->j', vectors.conj(), rho.matrix, vectors))

    cross = 0.0
    for mu, weight in zip(sigma_eig.eigenvalues, weights):
        if mu < TOL_SUPPORT_SIGMA:
            if weight > TOL_SUPPORT_RHO:
                return math.inf
            continue
        cross += weight * math.log2(mu)

    return float(max(-von_neumann_entropy(rho) - cross, 0.0))


def dephase(rho: DensityMatrix, basis: Basis) -> DensityMatrix:
    """Σ_i |i⟩⟨i|ρ|i⟩⟨i| in the given frame."""
    _check_same_dim(rho.dim, basis.dim, "dephase")
    frame = basis.frame
    populations = np.real(np.einsum('ij,ik,kj->j', frame.conj(), rho.matrix, frame))
    return DensityMatrix.trusted((frame * populations) @ dagger(frame))


def matrix_in_frame(rho: DensityMatrix, basis: Basis) -> np.ndarray:
    """Entries ⟨i|ρ|j⟩ of ρ in the frame."""
    _check_same_dim(rho.dim, basis.dim, "matrix_in_frame")
    return dagger(basis.frame) @ rho.matrix @ basis.frame


def coherence_relative_entropy(rho: DensityMatrix, basis: Basis) -> Bits:
    value = von_neumann_entropy(dephase(rho, basis)) - von_neumann_entropy(rho)
    return float(max(value, 0.0))


def coherence_l1(rho: DensityMatrix, basis: Basis) -> float:
    entries = np.abs(matrix_in_frame(rho, basis))
    return float(entries.sum() - np.trace(entries))
