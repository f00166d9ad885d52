#!/usr/bin/env python3
"""
Quantum Channels in Kraus Form

CPTP maps as ordered Kraus collections with:
- Validation of trace preservation
- Application to a state and to one half of a purification
- Stinespring dilation V = Σ_k K_k ⊗ |k⟩_E
- Named constructors: weak and projective measurement, depolarizing,
  amplitude damping, bit/phase/bit-phase flip
- Composition, tensor products, local extension and Kraus remixing
"""

import logging
from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple

import numpy as np

from config import TOL_CPTP
from matrix_core import (
    PAULI_I, PAULI_X, PAULI_Y, PAULI_Z, DimensionMismatchError, as_matrix,
    dagger, partial_trace, tensor
)
from measures import Basis
from states import DensityMatrix, PureBipartiteState, RngLike, as_generator

logger = logging.getLogger(__name__)


class InvalidChannelError(ValueError):
    """Raised for malformed Kraus sets or out-of-range channel parameters."""


@dataclass(frozen=True)
class KrausChannel:
    kraus: Tuple[np.ndarray, ...]
    label: str = "custom"
    param: float = float('nan')
    measurement: bool = False  # built by weak_measurement / projective_measurement
    dims: Optional[Tuple[int, ...]] = field(default=None)  # subsystem dims of the input, if composite

    def __post_init__(self):
        ops = tuple(as_matrix(k) for k in self.kraus)
        if not ops:
            raise InvalidChannelError("a channel needs at least one Kraus operator")
        shape = ops[0].shape
        if any(k.ndim != 2 or k.shape != shape for k in ops):
            raise InvalidChannelError("Kraus operators must share one 2-D shape")
        for k in ops:
            k.setflags(write=False)
        object.__setattr__(self, 'kraus', ops)

    @property
    def dim_in(self) -> int:
        return self.kraus[0].shape[1]

    @property
    def dim_out(self) -> int:
        return self.kraus[0].shape[0]

    @property
    def env_dim(self) -> int:
        return len(self.kraus)

    def describe(self) -> dict:
        return {
            'label': self.label,
            'param': None if np.isnan(self.param) else float(self.param),
            'kraus': [k.tolist() for k in self.kraus]
        }


@dataclass(frozen=True)
class Dilation:
    isometry: np.ndarray  # (dim_out · env_dim) × dim_in
    env_dim: int


def _kraus_sum(ch: KrausChannel) -> np.ndarray:
    return sum(dagger(k) @ k for k in ch.kraus)


def is_cptp(ch: KrausChannel, tol: float = TOL_CPTP) -> bool:
    """Σ K†K = I within tol."""
    deviation = np.max(np.abs(_kraus_sum(ch) - np.eye(ch.dim_in)))
    return bool(deviation < tol)


def _check_input(ch: KrausChannel, d: int) -> None:
    if ch.dim_in != d:
        raise DimensionMismatchError(f"channel '{ch.label}' acts on dimension {ch.dim_in}, state has {d}")


def apply(ch: KrausChannel, rho: DensityMatrix) -> DensityMatrix:
    """ℰ(ρ) = Σ K ρ K†."""
    _check_input(ch, rho.dim)
    out = sum(k @ rho.matrix @ dagger(k) for k in ch.kraus)
    return DensityMatrix(out)


def apply_extended(ch: KrausChannel, psi: PureBipartiteState) -> DensityMatrix:
    """Σ_j (K_j ⊗ I)|Ψ⟩⟨Ψ|(K_j† ⊗ I) on dim_out · d_R."""
    d_s, d_r = psi.dims
    _check_input(ch, d_s)
    amplitudes = psi.amplitudes.reshape(d_s, d_r)
    out = np.zeros((ch.dim_out * d_r, ch.dim_out * d_r), dtype=np.complex128)
    for k in ch.kraus:
        branch = (k @ amplitudes).reshape(-1)
        out += np.outer(branch, branch.conj())
    return DensityMatrix(out)


def dilation_isometry(ch: KrausChannel) -> Dilation:
    """Stinespring isometry V = Σ_k K_k ⊗ |k⟩_E."""
    m = ch.env_dim
    isometry = sum(tensor(k, np.eye(m)[:, [index]]) for index, k in enumerate(ch.kraus))
    return Dilation(isometry=isometry, env_dim=m)


def apply_dilation(dilation: Dilation, rho: DensityMatrix) -> DensityMatrix:
    """Tr_E(V ρ V†)."""
    v = dilation.isometry
    joint = v @ rho.matrix @ dagger(v)
    d_out = v.shape[0] // dilation.env_dim
    return DensityMatrix(partial_trace(joint, [d_out, dilation.env_dim], [0]))


def _check_unit_interval(name: str, value: float) -> None:
    if not 0.0 <= value <= 1.0:
        raise InvalidChannelError(f"{name} must lie in [0, 1], got {value}")


def _build(kraus: Sequence[np.ndarray], label: str, param: float = float('nan'),
           measurement: bool = False, dims: Optional[Tuple[int, ...]] = None) -> KrausChannel:
    ch = KrausChannel(tuple(kraus), label=label, param=param, measurement=measurement, dims=dims)
    if not is_cptp(ch):
        raise InvalidChannelError(f"Kraus set for '{label}' is not trace preserving")
    return ch


def identity(d: int = 2) -> KrausChannel:
    """Identity channel on dimension d."""
    return _build([np.eye(d, dtype=np.complex128)], 'identity', 0.0)


def unitary_channel(u, label: str = 'unitary') -> KrausChannel:
    """ρ ↦ UρU†"""
    return _build([as_matrix(u)], label)


def weak_measurement(x: float) -> KrausChannel:
    """K(±x) = √((1∓x)/2) Π₀ + √((1±x)/2) Π₁; x = 0 is no measurement, x = 1 projective."""
    _check_unit_interval('x', x)
    pi0 = np.diag([1.0, 0.0]).astype(np.complex128)
    pi1 = np.diag([0.0, 1.0]).astype(np.complex128)
    k_plus = np.sqrt((1 - x) / 2) * pi0 + np.sqrt((1 + x) / 2) * pi1
    k_minus = np.sqrt((1 + x) / 2) * pi0 + np.sqrt((1 - x) / 2) * pi1
    return _build([k_plus, k_minus], 'weak', x, measurement=True)


def projective_measurement(basis: Basis) -> KrausChannel:
    """Non-selective measurement in the frame, one projector per ket."""
    frame = basis.frame
    projectors = [np.outer(frame[:, i], frame[:, i].conj()) for i in range(basis.dim)]
    return _build(projectors, 'projective', 1.0, measurement=True)


def _heisenberg_weyl(d: int):
    shift = np.roll(np.eye(d, dtype=np.complex128), 1, axis=0)  # |j⟩ → |j+1 mod d⟩
    clock = np.diag(np.exp(2j * np.pi * np.arange(d) / d))
    for a in range(d):
        for b in range(d):
            yield a, b, np.linalg.matrix_power(shift, a) @ np.linalg.matrix_power(clock, b)


def depolarizing(p: float, d: int = 2) -> KrausChannel:
    """ρ ↦ (1 − p)ρ + p·I/d."""
    _check_unit_interval('p', p)
    if d == 2:
        kraus = [
            np.sqrt(1 - 3 * p / 4) * PAULI_I,
            np.sqrt(p / 4) * PAULI_X,
            np.sqrt(p / 4) * PAULI_Y,
            np.sqrt(p / 4) * PAULI_Z
        ]
    else:
        kraus = []
        for a, b, w in _heisenberg_weyl(d):
            weight = 1 - p + p / d ** 2 if (a, b) == (0, 0) else p / d ** 2
            kraus.append(np.sqrt(weight) * w)
    return _build(kraus, 'depolarizing', p)


def amplitude_damping(q: float) -> KrausChannel:
    """Decay |1⟩ → |0⟩ with probability q."""
    _check_unit_interval('q', q)
    k1 = np.sqrt(q) * np.array([[0, 1], [0, 0]], dtype=np.complex128)
    k2 = np.array([[1, 0], [0, np.sqrt(1 - q)]], dtype=np.complex128)
    return _build([k1, k2], 'amplitude-damping', q)


def _pauli_flip(p: float, sigma: np.ndarray, label: str) -> KrausChannel:
    _check_unit_interval('p', p)
    return _build([np.sqrt(1 - p) * PAULI_I, np.sqrt(p) * sigma], label, p)


def bit_flip(p: float) -> KrausChannel:
    """X applied with probability p."""
    return _pauli_flip(p, PAULI_X, 'bit-flip')


def phase_flip(p: float) -> KrausChannel:
    """Z applied with probability p."""
    return _pauli_flip(p, PAULI_Z, 'phase-flip')


def bit_phase_flip(p: float) -> KrausChannel:
    """Y applied with probability p."""
    return _pauli_flip(p, PAULI_Y, 'bit-phase-flip')


def compose(second: KrausChannel, first: KrausChannel) -> KrausChannel:
    """second ∘ first"""
    if second.dim_in != first.dim_out:
        raise DimensionMismatchError(
            f"cannot compose '{second.label}' after '{first.label}': {first.dim_out} != {second.dim_in}"
        )
    kraus = [b @ a for b in second.kraus for a in first.kraus]
    return _build(kraus, f"{second.label}∘{first.label}")


def tensor_product(a: KrausChannel, b: KrausChannel) -> KrausChannel:
    """a ⊗ b on the composite input."""
    kraus = [tensor(ka, kb) for ka in a.kraus for kb in b.kraus]
    param = a.param if a.param == b.param else float('nan')
    return _build(kraus, f"{a.label}⊗{b.label}", param, dims=(a.dim_in, b.dim_in))


def local_channel(ch: KrausChannel, dims: Tuple[int, int], side: int) -> KrausChannel:
    """ch on subsystem ``side`` of a bipartite system, identity on the other."""
    d_a, d_b = dims
    if side == 0:
        return tensor_product(ch, identity(d_b))
    if side == 1:
        return tensor_product(identity(d_a), ch)
    raise InvalidChannelError(f"side must be 0 or 1, got {side}")


def remix(ch: KrausChannel, u) -> KrausChannel:
    """K'_j = Σ_i u_ji K_i; the same channel for any unitary u."""
    u = as_matrix(u)
    if u.shape != (ch.env_dim, ch.env_dim):
        raise DimensionMismatchError(f"remixing matrix must be {ch.env_dim}×{ch.env_dim}")
    stacked = np.stack(ch.kraus)
    kraus = list(np.einsum('ji,iab->jab', u, stacked))
    return _build(kraus, ch.label, ch.param, ch.measurement, ch.dims)


def random_channel(d: int, n_kraus: int, rng: RngLike) -> KrausChannel:
    """Kraus blocks of a random isometry d → d·n_kraus."""
    gen = as_generator(rng)
    g = gen.standard_normal((d * n_kraus, d)) + 1j * gen.standard_normal((d * n_kraus, d))
    q, r = np.linalg.qr(g)
    q = q * (np.diagonal(r) / np.abs(np.diagonal(r)))
    blocks = q.reshape(d, n_kraus, d)
    return _build([blocks[:, k, :] for k in range(n_kraus)], 'random')
