#!/usr/bin/env python3
"""
Derived Quantities

Coherent information, channel-induced disturbance (single system and
bipartite), mutual information, quantum discord with projective measurements
on a qubit, and the relative entropy of entanglement with a variational
separable-state solver.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np
from scipy.optimize import minimize

from channels import KrausChannel, apply, apply_extended
from config import (
    COHDIST_THREADS, DISCORD_FATOL, DISCORD_GRID, DISCORD_XATOL, ER_MAX_DIM,
    ER_MAXITER, ER_NULL_LOGIT, ER_RESTARTS, ER_SEED, TOL_CLAMP
)
from matrix_core import DimensionMismatchError, hermitian_eig
from measures import (
    Bits, entropy_of_matrices, relative_entropy, von_neumann_entropy
)
from states import DensityMatrix, PureBipartiteState, RngStream, product_state, purify

logger = logging.getLogger(__name__)


class UnsupportedDimensionError(ValueError):
    """Raised when a solver is asked for dimensions it does not handle."""


@dataclass(frozen=True)
class DiscordSolution:
    value: Bits
    measurement_angles: Tuple[float, float]  # (theta, phi) of the measured Bloch axis on B
    refinement_iterations: int


@dataclass(frozen=True)
class ERSolution:
    value: Bits
    closest_separable: DensityMatrix
    mixture_size: int
    restarts_used: int


def _clamp(value: float, name: str) -> float:
    if value < 0:
        if value < -TOL_CLAMP:
            logger.warning(f"{name} evaluated to {value:.3e}, below the clamp tolerance")
            return value
        return 0.0
    return value


def _check_bipartite(rho_ab: DensityMatrix, dims) -> Tuple[int, int]:
    d_a, d_b = (int(d) for d in dims)
    if d_a * d_b != rho_ab.dim:
        raise DimensionMismatchError(f"dims {dims} do not match state dimension {rho_ab.dim}")
    return d_a, d_b


def coherent_information(rho: DensityMatrix, ch: KrausChannel,
                         purification: Optional[PureBipartiteState] = None) -> Bits:
    """I_c = S(ℰ(ρ)) − S((ℰ ⊗ I)|Ψ⟩⟨Ψ|)."""
    psi = purification if purification is not None else purify(rho)
    return von_neumann_entropy(apply(ch, rho)) - von_neumann_entropy(apply_extended(ch, psi))


def disturbance(rho: DensityMatrix, ch: KrausChannel,
                purification: Optional[PureBipartiteState] = None) -> Bits:
    """D(ρ, ℰ) = S(ρ) − I_c(ρ, ℰ)."""
    value = von_neumann_entropy(rho) - coherent_information(rho, ch, purification)
    return _clamp(value, 'disturbance')


def disturbance_batch(rhos: np.ndarray, ch: KrausChannel,
                      entropies: Optional[np.ndarray] = None) -> np.ndarray:
    """
    D for a (n, d, d) stack of states under one channel. The extended output entropy
    is taken as the entropy of the environment state W_jk = Tr(K_j ρ K_k†), which
    equals S((ℰ ⊗ I)|Ψ⟩⟨Ψ|) for any purification, so none is built.
    """
    rhos = np.asarray(rhos, dtype=np.complex128)
    if rhos.ndim != 3 or rhos.shape[1:] != (ch.dim_in, ch.dim_in):
        raise DimensionMismatchError(f"channel '{ch.label}' acts on {ch.dim_in}, stack has shape {rhos.shape}")
    kraus = np.stack(ch.kraus)
    if entropies is None:
        entropies = entropy_of_matrices(rhos)
    outputs = np.einsum('kab,nbc,kdc->nad', kraus, rhos, kraus.conj())
    environment = np.einsum('jab,nbc,kac->njk', kraus, rhos, kraus.conj())
    values = entropies - entropy_of_matrices(outputs) + entropy_of_matrices(environment)
    if values.size and values.min() < -TOL_CLAMP:
        logger.warning(f"disturbance evaluated to {values.min():.3e}, below the clamp tolerance")
    return np.where((values < 0) & (values >= -TOL_CLAMP), 0.0, values)


def disturbance_bipartite(rho_ab: DensityMatrix, dims, ch: KrausChannel) -> Bits:
    """Disturbance of a channel on the whole of A⊗B; the reference has dimension d_A·d_B."""
    _check_bipartite(rho_ab, dims)
    if ch.dim_in != rho_ab.dim:
        raise DimensionMismatchError(f"channel '{ch.label}' acts on {ch.dim_in}, state is {rho_ab.dim}")
    return disturbance(rho_ab, ch)


def mutual_information(rho_ab: DensityMatrix, dims) -> Bits:
    _check_bipartite(rho_ab, dims)
    s_a = von_neumann_entropy(rho_ab.reduce(dims, [0]))
    s_b = von_neumann_entropy(rho_ab.reduce(dims, [1]))
    return max(s_a + s_b - von_neumann_entropy(rho_ab), 0.0)


def _bloch_bases(thetas: np.ndarray, phis: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Rows are the kets along ±(θ, φ) on the Bloch sphere."""
    half = np.asarray(thetas, dtype=float) / 2
    phase = np.exp(1j * np.asarray(phis, dtype=float))
    up = np.stack([np.cos(half) + 0j, phase * np.sin(half)], axis=-1)
    down = np.stack([-phase.conj() * np.sin(half), np.cos(half) + 0j], axis=-1)
    return up, down


def _conditional_entropies(rho_ab: DensityMatrix, dims, thetas, phis) -> np.ndarray:
    d_a, d_b = _check_bipartite(rho_ab, dims)
    tensor_form = rho_ab.matrix.reshape(d_a, d_b, d_a, d_b)
    thetas = np.atleast_1d(thetas)
    total = np.zeros(thetas.shape)
    for outcome in _bloch_bases(thetas, np.atleast_1d(phis)):
        conditioned = np.einsum('mb,abcd,md->mac', outcome.conj(), tensor_form, outcome)
        p = np.real(np.trace(conditioned, axis1=1, axis2=2))
        kept = p > 1e-14
        normalized = conditioned / np.where(kept, p, 1.0)[:, None, None]
        total += np.where(kept, p * entropy_of_matrices(normalized), 0.0)
    return total


def conditional_entropy_after_measurement(rho_ab: DensityMatrix, dims, theta: float, phi: float) -> Bits:
    """S(A|{Π_i^B}) = Σ_i p_i S(ρ_A|i) for the projective measurement along (θ, φ)."""
    return float(_conditional_entropies(rho_ab, dims, [theta], [phi])[0])


def classical_correlation(rho_ab: DensityMatrix, dims, theta: float, phi: float) -> Bits:
    """J = S(ρ_A) − S(A|{Π_i^B})."""
    s_a = von_neumann_entropy(rho_ab.reduce(dims, [0]))
    return s_a - conditional_entropy_after_measurement(rho_ab, dims, theta, phi)


def quantum_discord(rho_ab: DensityMatrix, dims) -> DiscordSolution:
    """min over projective qubit measurements on B of I − J, grid seeded then Nelder-Mead refined."""
    d_a, d_b = _check_bipartite(rho_ab, dims)
    if d_b != 2:
        raise UnsupportedDimensionError(f"discord needs a qubit B subsystem, got d_B = {d_b}")

    mutual = mutual_information(rho_ab, dims)
    s_a = von_neumann_entropy(rho_ab.reduce(dims, [0]))

    def objective(angles):
        return mutual - s_a + conditional_entropy_after_measurement(rho_ab, dims, angles[0], angles[1])

    # whole grid in one batch, θ outer so ties keep the first point in scan order
    thetas, phis = np.meshgrid(
        np.linspace(0.0, np.pi, DISCORD_GRID),
        np.linspace(0.0, 2 * np.pi, DISCORD_GRID, endpoint=False),
        indexing='ij'
    )
    grid_values = mutual - s_a + _conditional_entropies(rho_ab, dims, thetas.ravel(), phis.ravel())
    best = int(np.argmin(grid_values))
    best_value = float(grid_values[best])
    best_angles = (float(thetas.ravel()[best]), float(phis.ravel()[best]))

    result = minimize(
        objective, np.array(best_angles), method='Nelder-Mead',
        options={'xatol': DISCORD_XATOL, 'fatol': DISCORD_FATOL, 'maxiter': 2000}
    )
    iterations = int(result.nit)
    if result.fun < best_value:
        best_value, best_angles = float(result.fun), (float(result.x[0]), float(result.x[1]))

    logger.debug(f"discord {best_value:.6f} at angles {best_angles} after {iterations} refinement steps")
    return DiscordSolution(
        value=_clamp(best_value, 'discord'),
        measurement_angles=best_angles,
        refinement_iterations=iterations
    )


def er_upper_bound_product(rho_ab: DensityMatrix, dims) -> Bits:
    """S(ρ_AB ‖ ρ_A ⊗ ρ_B), equal to the mutual information."""
    _check_bipartite(rho_ab, dims)
    sigma = product_state(rho_ab.reduce(dims, [0]), rho_ab.reduce(dims, [1]))
    value = relative_entropy(rho_ab, sigma)
    if math.isinf(value):
        logger.warning("support test failed numerically for ρ_A ⊗ ρ_B; using the mutual information")
        return mutual_information(rho_ab, dims)
    return value


class SeparableMixture:
    """
    σ = Σ_m w_m |a_m⟩⟨a_m| ⊗ |b_m⟩⟨b_m| with softmax weights and unnormalized complex
    local vectors, flattened into one real parameter vector.
    """

    def __init__(self, dims: Tuple[int, int], size: int):
        self.d_a, self.d_b = dims
        self.size = size
        self.n_params = size * (1 + 2 * self.d_a + 2 * self.d_b)

    def split(self, params: np.ndarray):
        k, d_a, d_b = self.size, self.d_a, self.d_b
        logits = params[:k]
        offset = k
        a = params[offset:offset + k * d_a].reshape(k, d_a) \
            + 1j * params[offset + k * d_a:offset + 2 * k * d_a].reshape(k, d_a)
        offset += 2 * k * d_a
        b = params[offset:offset + k * d_b].reshape(k, d_b) \
            + 1j * params[offset + k * d_b:offset + 2 * k * d_b].reshape(k, d_b)
        return logits, a, b

    def join(self, logits: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        return np.concatenate([
            logits, a.real.reshape(-1), a.imag.reshape(-1), b.real.reshape(-1), b.imag.reshape(-1)
        ])

    def sigma(self, params: np.ndarray) -> np.ndarray:
        logits, a, b = self.split(params)
        weights = np.exp(logits - logits.max())
        weights /= weights.sum()
        a = a / np.maximum(np.linalg.norm(a, axis=1, keepdims=True), 1e-150)
        b = b / np.maximum(np.linalg.norm(b, axis=1, keepdims=True), 1e-150)
        products = np.einsum('ki,kj->kij', a, b).reshape(self.size, -1)
        return (products.T * weights) @ products.conj()


def _cross_entropy(rho_matrix: np.ndarray, sigma: np.ndarray) -> float:
    """−Tr ρ log₂ σ, with σ eigenvalues floored so the optimizer always sees a finite value."""
    mu, vectors = np.linalg.eigh((sigma + sigma.conj().T) / 2)
    weights = np.real(np.einsum('ij,ik,kj->j', vectors.conj(), rho_matrix, vectors))
    return float(-np.sum(weights * np.log2(np.maximum(mu, 1e-300))))


def _product_seed(rho_ab: DensityMatrix, dims, mixture: SeparableMixture):
    """ρ_A ⊗ ρ_B written as a mixture of eigenvector products, padded with null components."""
    eig_a = hermitian_eig(rho_ab.reduce(dims, [0]).matrix)
    eig_b = hermitian_eig(rho_ab.reduce(dims, [1]).matrix)
    logits = np.full(mixture.size, ER_NULL_LOGIT)
    a = np.zeros((mixture.size, mixture.d_a), dtype=np.complex128)
    b = np.zeros((mixture.size, mixture.d_b), dtype=np.complex128)
    a[:, 0] = 1.0
    b[:, 0] = 1.0
    index = 0
    for i in range(mixture.d_a):
        for j in range(mixture.d_b):
            weight = max(eig_a.eigenvalues[i], 0.0) * max(eig_b.eigenvalues[j], 0.0)
            logits[index] = math.log(weight) if weight > math.exp(ER_NULL_LOGIT) else ER_NULL_LOGIT
            a[index] = eig_a.eigenvectors[:, i]
            b[index] = eig_b.eigenvectors[:, j]
            index += 1
    return logits, a, b


def _run_restart(restart: int, rho_ab: DensityMatrix, entropy: float, mixture: SeparableMixture,
                 seed_params: np.ndarray, seed: int) -> Tuple[float, np.ndarray]:
    def objective(params):
        return -entropy + _cross_entropy(rho_ab.matrix, mixture.sigma(params))

    start = seed_params.copy()
    if restart > 0:
        gen = RngStream(seed, restart).generator()
        logits, a, b = mixture.split(start)
        seeded = logits > ER_NULL_LOGIT
        logits = np.where(seeded, logits + 0.1 * gen.standard_normal(logits.size),
                          -2.0 + gen.standard_normal(logits.size))
        a = np.where(seeded[:, None], a, gen.standard_normal(a.shape) + 1j * gen.standard_normal(a.shape))
        b = np.where(seeded[:, None], b, gen.standard_normal(b.shape) + 1j * gen.standard_normal(b.shape))
        start = mixture.join(logits, a, b)

    result = minimize(
        objective, start, method='L-BFGS-B',
        options={'maxiter': ER_MAXITER, 'ftol': 1e-13, 'gtol': 1e-10}
    )
    logger.debug(f"E_R restart {restart}: {result.fun:.8f} after {result.nit} iterations")
    return float(result.fun), result.x


def relative_entropy_entanglement(rho_ab: DensityMatrix, dims, restarts: int = ER_RESTARTS,
                                  seed: int = ER_SEED, workers: Optional[int] = None) -> ERSolution:
    """
    Upper bound on min_σ S(ρ‖σ) over separable σ. The product of marginals is
    always evaluated first, so the result never exceeds the mutual information.
    """
    d_a, d_b = _check_bipartite(rho_ab, dims)
    if d_a * d_b > ER_MAX_DIM:
        raise UnsupportedDimensionError(f"E_R solver is capped at d_A·d_B = {ER_MAX_DIM}")

    mixture = SeparableMixture((d_a, d_b), (d_a * d_b) ** 2)
    seed_params = mixture.join(*_product_seed(rho_ab, (d_a, d_b), mixture))
    entropy = von_neumann_entropy(rho_ab)

    seed_sigma = product_state(rho_ab.reduce(dims, [0]), rho_ab.reduce(dims, [1]))
    best_value = er_upper_bound_product(rho_ab, dims)
    best_sigma = seed_sigma.matrix
    if best_value <= TOL_CLAMP:
        return ERSolution(_clamp(best_value, 'E_R'), seed_sigma, mixture.size, 0)

    outcomes: List[Tuple[float, np.ndarray]] = []
    with ThreadPoolExecutor(max_workers=max(1, min(restarts, workers or COHDIST_THREADS))) as executor:
        futures = [
            executor.submit(_run_restart, r, rho_ab, entropy, mixture, seed_params, seed)
            for r in range(restarts)
        ]
        for future in futures:
            outcomes.append(future.result())

    # lowest value wins, ties go to the lowest restart index
    for value, params in outcomes:
        if value < best_value:
            best_value, best_sigma = value, mixture.sigma(params)

    sigma = DensityMatrix(best_sigma / np.trace(best_sigma).real)
    # the exact relative entropy of the returned witness, when the support test allows it
    witness_value = relative_entropy(rho_ab, sigma)
    return ERSolution(
        value=_clamp(min(best_value, witness_value), 'E_R'),
        closest_separable=sigma,
        mixture_size=mixture.size,
        restarts_used=restarts
    )

