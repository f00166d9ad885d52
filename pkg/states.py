#!/usr/bin/env python3
"""
Quantum State Construction

Density matrices with validity checks, purification, the two-qubit Schmidt
family and seeded random-state generation for Monte-Carlo sweeps.

Random states:
- Haar pure states from normalized complex Gaussian vectors
- Mixed states from the Hilbert-Schmidt (Ginibre) induced measure
- Haar unitaries from QR with the diagonal phase fix
"""

import logging
from dataclasses import dataclass
from typing import Tuple, Union

import numpy as np

from config import TOL_HERM, TOL_PSD, TOL_TRACE
from matrix_core import (
    as_matrix, dagger, fix_column_phases, hermitian_eig, is_hermitian,
    partial_trace, projector, tensor
)

logger = logging.getLogger(__name__)


class InvalidStateError(ValueError):
    """Raised when a matrix or vector is not a valid quantum state."""


@dataclass(frozen=True)
class DensityMatrix:
    matrix: np.ndarray

    def __post_init__(self):
        m = as_matrix(self.matrix)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise InvalidStateError(f"density matrix must be square, got shape {m.shape}")
        if not is_hermitian(m, TOL_HERM):
            raise InvalidStateError("density matrix is not Hermitian")
        m = (m + dagger(m)) / 2
        trace = np.trace(m).real
        if abs(trace - 1.0) > TOL_TRACE:
            raise InvalidStateError(f"density matrix trace is {trace!r}, expected 1")
        smallest = np.linalg.eigvalsh(m)[0]
        if smallest < -TOL_PSD:
            raise InvalidStateError(f"density matrix has negative eigenvalue {smallest:.3e}")
        m.setflags(write=False)
        object.__setattr__(self, 'matrix', m)

    @classmethod
    def trusted(cls, matrix: np.ndarray) -> 'DensityMatrix':
        """Wrap a matrix that is a state by construction, skipping the spectral check."""
        m = np.array((matrix + dagger(matrix)) / 2, dtype=np.complex128)
        m.setflags(write=False)
        rho = object.__new__(cls)
        object.__setattr__(rho, 'matrix', m)
        return rho

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def purity(self) -> float:
        return float(np.real(np.trace(self.matrix @ self.matrix)))

    def reduce(self, dims, keep) -> 'DensityMatrix':
        return DensityMatrix.trusted(partial_trace(self.matrix, dims, keep))


@dataclass(frozen=True)
class PureBipartiteState:
    dims: Tuple[int, int]
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=np.complex128).reshape(-1)
        d_s, d_r = (int(d) for d in self.dims)
        if amps.size != d_s * d_r:
            raise InvalidStateError(f"{amps.size} amplitudes do not fit dims {self.dims}")
        norm = float(np.vdot(amps, amps).real)
        if abs(norm - 1.0) > 1e-10:
            raise InvalidStateError(f"state vector has squared norm {norm!r}")
        amps.setflags(write=False)
        object.__setattr__(self, 'dims', (d_s, d_r))
        object.__setattr__(self, 'amplitudes', amps)

    def projector(self) -> np.ndarray:
        return projector(self.amplitudes)

    def system_state(self) -> DensityMatrix:
        return DensityMatrix.trusted(partial_trace(self.projector(), self.dims, [0]))

    def apply_to_reference(self, unitary) -> 'PureBipartiteState':
        """(I ⊗ U)|Ψ⟩, another purification of the same system state."""
        full = tensor(np.eye(self.dims[0]), unitary)
        return PureBipartiteState(self.dims, full @ self.amplitudes)


@dataclass(frozen=True)
class RngStream:
    seed: int
    stream_index: int = 0

    def generator(self) -> np.random.Generator:
        sequence = np.random.SeedSequence(int(self.seed), spawn_key=(int(self.stream_index),))
        return np.random.default_rng(sequence)


RngLike = Union[RngStream, np.random.Generator]


def as_generator(rng: RngLike) -> np.random.Generator:
    """Same RngStream always yields a fresh generator with the same sequence."""
    if isinstance(rng, RngStream):
        return rng.generator()
    return rng


def purify(rho: DensityMatrix) -> PureBipartiteState:
    """Canonical purification Σ_i √λ_i |v_i⟩|i⟩ with the reference as a copy of the system."""
    eig = hermitian_eig(rho.matrix)
    weights = np.sqrt(np.clip(eig.eigenvalues, 0.0, None))
    vectors = fix_column_phases(eig.eigenvectors)
    # amplitude of |s⟩|i⟩ is ⟨s|v_i⟩·√λ_i
    amplitudes = (vectors * weights).reshape(-1)
    amplitudes = amplitudes / np.linalg.norm(amplitudes)
    return PureBipartiteState((rho.dim, rho.dim), amplitudes)


def _check_schmidt_pair(lambda0: float, lambda1: float) -> None:
    if lambda0 < 0 or lambda1 < 0 or abs(lambda0 + lambda1 - 1.0) > 1e-12:
        raise InvalidStateError(
            f"Schmidt weights must be nonnegative and sum to 1, got ({lambda0}, {lambda1})"
        )


def schmidt_pair_state(lambda0: float, lambda1: float) -> PureBipartiteState:
    """√λ₀|00⟩ + √λ₁|11⟩"""
    _check_schmidt_pair(lambda0, lambda1)
    amplitudes = np.array([np.sqrt(lambda0), 0.0, 0.0, np.sqrt(lambda1)], dtype=np.complex128)
    return PureBipartiteState((2, 2), amplitudes / np.linalg.norm(amplitudes))


def system_state_plus_minus_basis(lambda0: float, lambda1: float) -> DensityMatrix:
    """The Schmidt system state written in the {|+⟩,|−⟩} frame: ½[[1, c], [c, 1]], c = λ₀ − λ₁."""
    _check_schmidt_pair(lambda0, lambda1)
    c = lambda0 - lambda1
    return DensityMatrix(0.5 * np.array([[1.0, c], [c, 1.0]], dtype=np.complex128))


def schmidt_family_setup(lambda0: float):
    """Schmidt system state diag(λ₀, λ₁) paired with the {|+⟩,|−⟩} coherence frame."""
    from measures import Basis

    lambda1 = 1.0 - lambda0
    rho = schmidt_pair_state(lambda0, lambda1).system_state()
    return rho, Basis.plus_minus()


def maximally_mixed(d: int) -> DensityMatrix:
    """I/d"""
    return DensityMatrix(np.eye(d, dtype=np.complex128) / d)


def maximally_coherent(d: int) -> DensityMatrix:
    """Uniform superposition of the computational kets."""
    return DensityMatrix(projector(np.ones(d) / np.sqrt(d)))


def pure_state(vector) -> DensityMatrix:
    """Projector onto the normalized vector."""
    v = np.asarray(vector, dtype=np.complex128).reshape(-1)
    return DensityMatrix(projector(v / np.linalg.norm(v)))


def bell_state() -> DensityMatrix:
    """|Φ⁺⟩ = (|00⟩ + |11⟩)/√2"""
    return pure_state([1, 0, 0, 1])


def classically_correlated() -> DensityMatrix:
    """½(|00⟩⟨00| + |11⟩⟨11|)"""
    return DensityMatrix(np.diag([0.5, 0, 0, 0.5]).astype(np.complex128))


def werner_state(p: float) -> DensityMatrix:
    """p|Ψ⁻⟩⟨Ψ⁻| + (1 − p)I/4"""
    singlet = projector(np.array([0, 1, -1, 0]) / np.sqrt(2))
    return DensityMatrix(p * singlet + (1 - p) * np.eye(4) / 4)


def product_state(rho_a: DensityMatrix, rho_b: DensityMatrix) -> DensityMatrix:
    """ρ_A ⊗ ρ_B"""
    return DensityMatrix.trusted(tensor(rho_a.matrix, rho_b.matrix))


def _complex_gaussian(gen: np.random.Generator, shape) -> np.ndarray:
    return gen.standard_normal(shape) + 1j * gen.standard_normal(shape)


def random_pure(d: int, rng: RngLike) -> DensityMatrix:
    """Haar-random pure state."""
    if d < 2:
        raise InvalidStateError(f"random_pure needs d >= 2, got {d}")
    vector = _complex_gaussian(as_generator(rng), d)
    return DensityMatrix.trusted(projector(vector / np.linalg.norm(vector)))


def random_mixed(d: int, rank: int, rng: RngLike) -> DensityMatrix:
    """G·G†/Tr(G·G†) with G a d×rank Ginibre matrix; Hilbert-Schmidt measure at rank = d."""
    if not 1 <= rank <= d:
        raise InvalidStateError(f"rank must lie in [1, {d}], got {rank}")
    g = _complex_gaussian(as_generator(rng), (d, rank))
    m = g @ dagger(g)
    return DensityMatrix.trusted(m / np.trace(m).real)


def random_unitary(d: int, rng: RngLike) -> np.ndarray:
    """Haar-distributed unitary."""
    q, r = np.linalg.qr(_complex_gaussian(as_generator(rng), (d, d)))
    phases = np.diagonal(r) / np.abs(np.diagonal(r))
    return q * phases
