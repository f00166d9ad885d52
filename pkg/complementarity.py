#!/usr/bin/env python3
"""
Complementarity Checks

Evaluators for the four coherence/disturbance trade-off relations:
- 2C + D ≤ 2 log₂ d for any channel
- C + D ≤ log₂ d_E for measurement channels
- C + E_R + D ≤ 2 log₂ d_AB for bipartite states
- C + Q_D + D ≤ 2 log₂ d_AB for bipartite states

Also hosts the closed-form oracles for the Schmidt-family examples and the
seeded Monte-Carlo sweep engine that produces the scatter data.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import partial
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np
from scipy.special import xlogy

from channels import (
    KrausChannel, amplitude_damping, apply, bit_flip, bit_phase_flip, depolarizing,
    dilation_isometry, identity, phase_flip, projective_measurement, tensor_product,
    weak_measurement
)
from config import (
    BIPARTITE_CHANNELS, COHDIST_THREADS, RELATIONS, SINGLE_CHANNELS, TOL_CLOSED_FORM,
    TOL_RESIDUAL
)
from matrix_core import DimensionMismatchError
from measures import Basis, Bits, coherence_relative_entropy, entropy_of_matrices
from quantities import (
    disturbance, disturbance_batch, disturbance_bipartite, er_upper_bound_product, quantum_discord,
    relative_entropy_entanglement
)
from states import (
    DensityMatrix, RngStream, random_mixed, schmidt_family_setup, schmidt_pair_state,
    system_state_plus_minus_basis
)
from utils import matrix_to_pairs

logger = logging.getLogger(__name__)


class NotMeasurementChannelError(ValueError):
    """Raised when the measurement-channel relation is asked of a generic channel."""


class InvalidSweepConfigError(ValueError):
    """Raised for sweep settings outside the supported grid."""


class CounterexampleFound(RuntimeError):
    """An inequality failed; ``payload`` holds everything needed to replay it."""

    def __init__(self, payload: Dict):
        super().__init__(
            f"{payload['relation']} violated: lhs {payload['lhs']:.12g} > bound {payload['bound']:.12g}"
        )
        self.payload = payload


@dataclass(frozen=True)
class InequalityReport:
    relation: str
    lhs: Bits
    bound: Bits
    residual: Bits
    satisfied: bool
    components: Dict[str, float]
    weights: Dict[str, float]  # lhs = Σ weights[k] · components[k]


def _report(relation: str, components: Dict[str, float], weights: Dict[str, float],
            bound: float) -> InequalityReport:
    lhs = sum(weights[name] * value for name, value in components.items())
    residual = bound - lhs
    return InequalityReport(
        relation=relation,
        lhs=lhs,
        bound=bound,
        residual=residual,
        satisfied=residual >= -TOL_RESIDUAL,
        components=dict(components),
        weights=dict(weights)
    )


def check_single(rho: DensityMatrix, ch: KrausChannel, basis: Basis) -> InequalityReport:
    """2C_r(ρ) + D(ρ, ℰ) ≤ 2 log₂ d"""
    if basis.dim != rho.dim:
        raise DimensionMismatchError(f"basis dimension {basis.dim} != state dimension {rho.dim}")
    components = {
        'C': coherence_relative_entropy(rho, basis),
        'D': disturbance(rho, ch)
    }
    return _report('single', components, {'C': 2.0, 'D': 1.0}, 2 * math.log2(rho.dim))


def check_measurement_channel(rho: DensityMatrix, ch: KrausChannel, basis: Basis) -> InequalityReport:
    """C(ρ) + D(ρ, ℰ) ≤ log₂ d_E"""
    if not ch.measurement:
        raise NotMeasurementChannelError(f"channel '{ch.label}' is not a measurement channel")
    if basis.dim != rho.dim:
        raise DimensionMismatchError(f"basis dimension {basis.dim} != state dimension {rho.dim}")
    env_dim = dilation_isometry(ch).env_dim
    components = {
        'C': coherence_relative_entropy(rho, basis),
        'D': disturbance(rho, ch)
    }
    return _report('measurement', components, {'C': 1.0, 'D': 1.0}, math.log2(env_dim))


def _bipartite_terms(rho_ab: DensityMatrix, dims, ch: KrausChannel, basis: Optional[Basis]):
    d_ab = int(np.prod(dims))
    if rho_ab.dim != d_ab:
        raise DimensionMismatchError(f"dims {dims} do not match state dimension {rho_ab.dim}")
    basis = basis or Basis.product(*(Basis.computational(d) for d in dims))
    coherence = coherence_relative_entropy(rho_ab, basis)
    return coherence, disturbance_bipartite(rho_ab, dims, ch), 2 * math.log2(d_ab)


def check_bipartite_entanglement(rho_ab: DensityMatrix, dims, ch: KrausChannel,
                                 basis: Optional[Basis] = None,
                                 mode: str = 'certified') -> InequalityReport:
    """
    C + E_R + D ≤ 2 log₂ d_AB. In certified mode E_R is replaced by its upper bound
    S(ρ‖ρ_A⊗ρ_B), so a satisfied report implies the relation for the true E_R.
    """
    coherence, dist, bound = _bipartite_terms(rho_ab, dims, ch, basis)
    if mode == 'certified':
        entanglement = er_upper_bound_product(rho_ab, dims)
    elif mode == 'variational':
        entanglement = relative_entropy_entanglement(rho_ab, dims).value
    else:
        raise ValueError(f"unknown E_R mode '{mode}'")
    components = {'C': coherence, 'E_R': entanglement, 'D': dist}
    return _report('bipartite-entanglement', components, {'C': 1.0, 'E_R': 1.0, 'D': 1.0}, bound)


def check_bipartite_discord(rho_ab: DensityMatrix, dims, ch: KrausChannel,
                            basis: Optional[Basis] = None) -> InequalityReport:
    """C + Q_D + D ≤ 2 log₂ d_AB"""
    coherence, dist, bound = _bipartite_terms(rho_ab, dims, ch, basis)
    components = {'C': coherence, 'Q_D': quantum_discord(rho_ab, dims).value, 'D': dist}
    return _report('bipartite-discord', components, {'C': 1.0, 'Q_D': 1.0, 'D': 1.0}, bound)


# Closed forms for the Schmidt family √λ₀|00⟩ + √λ₁|11⟩, all in bits.

def _xlog2x(t: float) -> float:
    t = max(t, 0.0)  # rounding can leave arguments a few ulps below zero
    return float(xlogy(t, t) / math.log(2))


def _h(p: float) -> float:
    """Binary entropy."""
    p = min(max(p, 0.0), 1.0)
    return -_xlog2x(p) - _xlog2x(1 - p)


def _schmidt_entropy(lambda0: float, lambda1: float) -> float:
    c = lambda0 - lambda1
    return -_xlog2x((1 + c) / 2) - _xlog2x((1 - c) / 2)


def coherence_closed_form(lambda0: float, lambda1: float) -> Bits:
    c = lambda0 - lambda1
    return 1 + _xlog2x((1 + c) / 2) + _xlog2x((1 - c) / 2)


def disturbance_weak_closed_form(lambda0: float, lambda1: float, x: float,
                                 variant: str = 'printed') -> Bits:
    """
    Weak-measurement disturbance. ``printed`` is the closed form as usually quoted;
    ``schmidt_frame`` and ``rotated_frame`` are the values the general definition
    gives for diag(λ₀, λ₁) and for ½[[1, c], [c, 1]] respectively.
    """
    c = lambda0 - lambda1
    s = math.sqrt(max(1 - x * x, 0.0))
    r = math.sqrt(max(1 - 4 * lambda0 * lambda1 * x * x, 0.0))
    s_rho = _schmidt_entropy(lambda0, lambda1)
    if variant == 'printed':
        return (s_rho + _xlog2x(0.5 - c * s / 2) + _xlog2x(0.5 + c * s / 2)
                - _xlog2x((1 - r) / 2) - _xlog2x((1 + r) / 2))
    if variant == 'schmidt_frame':
        return _h((1 + r) / 2)
    if variant == 'rotated_frame':
        return s_rho - _h((1 + c * s) / 2) + _h((1 + s) / 2)
    raise ValueError(f"unknown weak-measurement variant '{variant}'")


def disturbance_depolarizing_closed_form(lambda0: float, lambda1: float, p: float) -> Bits:
    c = lambda0 - lambda1
    half = 1 - p / 2
    root = math.sqrt(max(half * half - 4 * lambda0 * lambda1 * (p - 3 * p * p / 4), 0.0))
    return (_schmidt_entropy(lambda0, lambda1)
            + _xlog2x(0.5 - c * (1 - p) / 2) + _xlog2x(0.5 + c * (1 - p) / 2)
            - _xlog2x(p * lambda0 / 2) - _xlog2x(p * lambda1 / 2)
            - _xlog2x((half + root) / 2) - _xlog2x((half - root) / 2))


def disturbance_ad_closed_form(lambda0: float, lambda1: float, q: float,
                               variant: str = 'printed') -> Bits:
    """
    Amplitude-damping disturbance. ``printed`` keeps the quoted final logarithm
    log₂(1 + R); ``halved`` restores the ½ inside it; the two frame variants are
    the general definition evaluated in closed form.
    """
    c = lambda0 - lambda1
    big_r = math.sqrt(max(q * q + c * c * (1 - q), 0.0))
    s_rho = _schmidt_entropy(lambda0, lambda1)
    if variant == 'printed':
        tail = 0.5 * (1 + big_r) * math.log2(1 + big_r)
        return s_rho + _h(q * lambda1) + _xlog2x((1 - big_r) / 2) + tail
    if variant == 'halved':
        return s_rho + _h(q * lambda1) + _xlog2x((1 - big_r) / 2) + _xlog2x((1 + big_r) / 2)
    if variant == 'schmidt_frame':
        return s_rho - _h(lambda0 + q * lambda1) + _h(q * lambda1)
    if variant == 'rotated_frame':
        env = math.sqrt(max((1 - q) ** 2 + q * c * c, 0.0))
        return s_rho - _h((1 + big_r) / 2) + _h((1 + env) / 2)
    raise ValueError(f"unknown amplitude-damping variant '{variant}'")


WEAK_VARIANTS = ['printed', 'schmidt_frame', 'rotated_frame']
AD_VARIANTS = ['printed', 'halved', 'schmidt_frame', 'rotated_frame']
FRAMES = ['schmidt_frame', 'rotated_frame']


def frame_state(frame: str, lambda0: float, lambda1: float) -> DensityMatrix:
    """The qubit state a closed form refers to, with channels acting in the computational basis."""
    if frame == 'schmidt_frame':
        return schmidt_pair_state(lambda0, lambda1).system_state()
    if frame == 'rotated_frame':
        return system_state_plus_minus_basis(lambda0, lambda1)
    raise ValueError(f"unknown frame '{frame}'")


@dataclass
class ClosedFormReport:
    equation: str
    deviations: Dict[str, float]  # "variant@frame" -> max |closed form − general definition|
    require_all: bool
    matched: List[str] = field(default_factory=list)
    passed: bool = False


def _grid(intervals: int) -> np.ndarray:
    return np.linspace(0.0, 1.0, max(int(intervals), 1) + 1)


def _compare(equation: str, pairs: List[Tuple[str, str]], closed: Callable, general: Callable,
             intervals: int, require_all: bool) -> ClosedFormReport:
    deviations = {f"{variant}@{frame}": 0.0 for variant, frame in pairs}
    for lambda0 in _grid(intervals):
        lambda1 = 1.0 - lambda0
        for param in _grid(intervals):
            reference = {frame: general(frame, lambda0, lambda1, param) for frame in {f for _, f in pairs}}
            for variant, frame in pairs:
                key = f"{variant}@{frame}"
                error = abs(closed(variant, lambda0, lambda1, param) - reference[frame])
                deviations[key] = max(deviations[key], error)

    report = ClosedFormReport(equation=equation, deviations=deviations, require_all=require_all)
    report.matched = [key for key, value in deviations.items() if value < TOL_CLOSED_FORM]
    report.passed = len(report.matched) == len(deviations) if require_all else bool(report.matched)
    for key, value in deviations.items():
        if value >= TOL_CLOSED_FORM:
            logger.warning(f"{equation}: {key} deviates from the general definition by {value:.3e}")
    return report


def _offdiagonal_report(intervals: int) -> List[ClosedFormReport]:
    """Printed transformed-state matrices of the ½[[1,c],[c,1]] state against Kraus application."""
    def weak_matrix(variant, lambda0, lambda1, x):
        c = lambda0 - lambda1
        factor = math.sqrt(1 - x) if variant == 'printed' else math.sqrt(max(1 - x * x, 0.0))
        return 0.5 * np.array([[1, factor * c], [factor * c, 1]])

    def ad_matrix(variant, lambda0, lambda1, q):
        c = lambda0 - lambda1
        if variant == 'printed':
            return 0.5 * np.array([[1, math.sqrt(1 - q) * c], [(math.sqrt(1 - q) + q) * c, 1 - q]])
        return 0.5 * np.array([[1 + q, math.sqrt(1 - q) * c], [math.sqrt(1 - q) * c, 1 - q]])

    reports = []
    for equation, builder, ch_factory in (
        ('weak transformed state', weak_matrix, weak_measurement),
        ('amplitude-damping transformed state', ad_matrix, amplitude_damping)
    ):
        deviations = {'printed': 0.0, 'kraus_derived': 0.0}
        for lambda0 in _grid(intervals):
            lambda1 = 1.0 - lambda0
            rho = system_state_plus_minus_basis(lambda0, lambda1)
            for param in _grid(intervals):
                exact = apply(ch_factory(param), rho).matrix
                for variant in deviations:
                    error = float(np.max(np.abs(builder(variant, lambda0, lambda1, param) - exact)))
                    deviations[variant] = max(deviations[variant], error)
        report = ClosedFormReport(equation=equation, deviations=deviations, require_all=False)
        report.matched = [key for key, value in deviations.items() if value < TOL_CLOSED_FORM]
        report.passed = bool(report.matched)
        if 'printed' not in report.matched:
            logger.warning(f"{equation}: printed matrix differs from Kraus application by {deviations['printed']:.3e}")
        reports.append(report)
    return reports


def verify_closed_forms(intervals: int = 20) -> List[ClosedFormReport]:
    """Compare every closed form against the general definitions on an (intervals+1)² grid."""
    def general_coherence(frame, lambda0, lambda1, _param):
        rho = frame_state(frame, lambda0, lambda1)
        basis = Basis.plus_minus() if frame == 'schmidt_frame' else Basis.computational(2)
        return coherence_relative_entropy(rho, basis)

    def general_disturbance(factory):
        def evaluate(frame, lambda0, lambda1, param):
            return disturbance(frame_state(frame, lambda0, lambda1), factory(param))
        return evaluate

    reports = [
        _compare('coherence', [('printed', f) for f in FRAMES],
                 lambda v, l0, l1, p: coherence_closed_form(l0, l1),
                 general_coherence, intervals, require_all=True),
        _compare('weak-measurement disturbance',
                 [(v, f) for v in WEAK_VARIANTS for f in FRAMES if v in ('printed', f)],
                 lambda v, l0, l1, p: disturbance_weak_closed_form(l0, l1, p, v),
                 general_disturbance(weak_measurement), intervals, require_all=False),
        _compare('depolarizing disturbance', [('printed', f) for f in FRAMES],
                 lambda v, l0, l1, p: disturbance_depolarizing_closed_form(l0, l1, p),
                 general_disturbance(depolarizing), intervals, require_all=True),
        _compare('amplitude-damping disturbance',
                 [(v, f) for v in AD_VARIANTS for f in FRAMES if v in ('printed', 'halved', f)],
                 lambda v, l0, l1, p: disturbance_ad_closed_form(l0, l1, p, v),
                 general_disturbance(amplitude_damping), intervals, require_all=False)
    ]
    reports.extend(_offdiagonal_report(intervals))
    for report in reports:
        logger.info(f"{report.equation}: passed={report.passed} matched={report.matched}")
    return reports


# Monte-Carlo sweeps

@dataclass(frozen=True)
class SweepConfig:
    relation: str
    channel: str
    param_start: float = 0.0
    param_stop: float = 1.0
    param_steps: int = 11
    dim: int = 2
    samples: int = 1000
    seed: int = 0
    basis: str = 'computational'
    er_mode: str = 'certified'
    workers: Optional[int] = None

    def param_grid(self) -> np.ndarray:
        return np.linspace(self.param_start, self.param_stop, self.param_steps)

    def validate(self) -> None:
        if self.relation not in RELATIONS:
            raise InvalidSweepConfigError(f"unknown relation '{self.relation}'")
        if self.param_steps < 1 or self.samples < 1:
            raise InvalidSweepConfigError("param_steps and samples must both be at least 1")
        bipartite = self.relation.startswith('bipartite')
        families = BIPARTITE_CHANNELS if bipartite else SINGLE_CHANNELS
        if self.channel not in families:
            raise InvalidSweepConfigError(f"channel '{self.channel}' is not available for {self.relation}")
        if bipartite:
            if self.dim != 4 or self.basis != 'computational':
                raise InvalidSweepConfigError("bipartite sweeps use dim 4 (2×2) in the computational product frame")
        elif self.dim not in (2, 3):
            raise InvalidSweepConfigError(f"single-system sweeps support dim 2 or 3, got {self.dim}")
        elif self.basis != 'computational' and self.dim != 2:
            raise InvalidSweepConfigError(f"basis '{self.basis}' is defined for qubits only")
        if self.relation == 'measurement' and self.channel not in ('weak', 'projective'):
            raise InvalidSweepConfigError("the measurement relation needs the weak or projective channel")


@dataclass(frozen=True)
class SweepRecord:
    sample_id: int
    d: int
    channel_label: str
    channel_param: float
    coherence: Bits
    disturbance: Bits
    extra_terms: Dict[str, float]
    residual: Bits
    seed: int

    def recompute_residual(self) -> float:
        terms = self.extra_terms
        correlation = terms.get('E_R', 0.0) + terms.get('Q_D', 0.0)
        lhs = terms['coherence_weight'] * self.coherence + self.disturbance + correlation
        return terms['bound'] - lhs


def build_channel(family: str, param: float, d: int) -> KrausChannel:
    qubit_only = {
        'weak': weak_measurement,
        'amplitude-damping': amplitude_damping,
        'bit-flip': bit_flip,
        'phase-flip': phase_flip,
        'bit-phase-flip': bit_phase_flip
    }
    if family == 'identity':
        return identity(d)
    if family == 'projective':
        return projective_measurement(Basis.computational(d))
    if family == 'depolarizing':
        return depolarizing(param, d)
    if family in qubit_only:
        if d != 2:
            raise InvalidSweepConfigError(f"channel '{family}' is defined for qubits only")
        return qubit_only[family](param)
    raise InvalidSweepConfigError(f"unknown channel family '{family}'")


def build_bipartite_channel(family: str, param: float, dims: Tuple[int, int]) -> KrausChannel:
    """Global depolarizing acts on A⊗B jointly; every other family acts locally on both qubits."""
    d_a, d_b = dims
    if family == 'global-depolarizing':
        return depolarizing(param, d_a * d_b)
    if family == 'identity':
        return identity(d_a * d_b)
    return tensor_product(build_channel(family, param, d_a), build_channel(family, param, d_b))


@dataclass(frozen=True)
class SampleTerms:
    """State-only terms of one stream index, shared by every parameter cell."""
    index: int
    rho: DensityMatrix
    descriptor: Dict[str, float]
    coherence: Bits
    correlations: Dict[str, float]  # E_R or Q_D on the bipartite relations


def _sweep_basis(config: SweepConfig) -> Basis:
    if config.relation.startswith('bipartite'):
        return Basis.product(Basis.computational(2), Basis.computational(2))
    if config.basis in ('plus-minus', 'schmidt-family'):
        return Basis.plus_minus()
    return Basis.computational(config.dim)


def _prepare_sample(config: SweepConfig, basis: Basis, index: int) -> SampleTerms:
    descriptor = {}
    if config.basis == 'schmidt-family':
        lambda0 = index / (config.samples - 1) if config.samples > 1 else 0.5
        rho, _ = schmidt_family_setup(lambda0)
        descriptor['lambda0'] = lambda0
    else:
        rho = random_mixed(config.dim, config.dim, RngStream(config.seed, index))

    correlations = {}
    if config.relation == 'bipartite-entanglement':
        if config.er_mode == 'variational':
            correlations['E_R'] = relative_entropy_entanglement(rho, (2, 2)).value
        else:
            correlations['E_R'] = er_upper_bound_product(rho, (2, 2))
    elif config.relation == 'bipartite-discord':
        correlations['Q_D'] = quantum_discord(rho, (2, 2)).value
    return SampleTerms(index, rho, descriptor, coherence_relative_entropy(rho, basis), correlations)


def _relation_shape(config: SweepConfig, ch: KrausChannel) -> Tuple[Dict[str, float], float]:
    """Weights of the left-hand side and the bound, as the check_* evaluators use them."""
    if config.relation == 'single':
        return {'C': 2.0, 'D': 1.0}, 2 * math.log2(config.dim)
    if config.relation == 'measurement':
        return {'C': 1.0, 'D': 1.0}, math.log2(dilation_isometry(ch).env_dim)
    correlation = 'E_R' if config.relation == 'bipartite-entanglement' else 'Q_D'
    return {'C': 1.0, correlation: 1.0, 'D': 1.0}, 2 * math.log2(config.dim)


def _counterexample(config: SweepConfig, sample_id: int, terms: SampleTerms,
                    ch: KrausChannel, report: InequalityReport) -> Dict:
    return {
        'state': matrix_to_pairs(terms.rho.matrix),
        'dim': terms.rho.dim,
        'channel': ch.describe(),
        'relation': report.relation,
        'lhs': report.lhs,
        'bound': report.bound,
        'components': report.components,
        'sample_id': sample_id,
        'seed': config.seed,
        'stream_index': terms.index
    }


def _run_cell(config: SweepConfig, cell: int, param: float, samples: List[SampleTerms],
              stack: np.ndarray, entropies: np.ndarray) -> List[SweepRecord]:
    if config.relation.startswith('bipartite'):
        ch = build_bipartite_channel(config.channel, param, (2, 2))
    else:
        ch = build_channel(config.channel, param, config.dim)
    weights, bound = _relation_shape(config, ch)
    disturbances = disturbance_batch(stack, ch, entropies)

    records = []
    for terms, dist in zip(samples, disturbances):
        sample_id = cell * config.samples + terms.index
        components = dict(C=terms.coherence, **terms.correlations, D=float(dist))
        report = _report(config.relation, components, weights, bound)
        if not report.satisfied:
            raise CounterexampleFound(_counterexample(config, sample_id, terms, ch, report))

        extra = dict(terms.correlations)
        extra.update(terms.descriptor)
        extra['bound'] = bound
        extra['coherence_weight'] = weights['C']
        records.append(SweepRecord(
            sample_id=sample_id,
            d=terms.rho.dim,
            channel_label=ch.label,
            channel_param=float(param),
            coherence=terms.coherence,
            disturbance=float(dist),
            extra_terms=extra,
            residual=report.residual,
            seed=config.seed
        ))
    return records


def sweep(config: SweepConfig) -> List[SweepRecord]:
    """
    Evaluate one relation over every (parameter, sample) cell; abort on the first violation.
    State-only terms are computed once per stream index and every cell reuses them.
    """
    config.validate()
    grid = config.param_grid()
    workers = max(1, config.workers or COHDIST_THREADS)
    logger.info(
        f"Sweeping {config.relation} / {config.channel}: {len(grid)} parameter values × "
        f"{config.samples} samples, seed {config.seed}, {workers} workers"
    )

    basis = _sweep_basis(config)
    records: List[SweepRecord] = []
    with ThreadPoolExecutor(max_workers=workers) as executor:
        samples = list(executor.map(partial(_prepare_sample, config, basis), range(config.samples)))
        stack = np.stack([terms.rho.matrix for terms in samples])
        entropies = entropy_of_matrices(stack)

        futures = {
            cell: executor.submit(_run_cell, config, cell, float(param), samples, stack, entropies)
            for cell, param in enumerate(grid)
        }
        for cell, future in futures.items():
            try:
                records.extend(future.result())
            except CounterexampleFound:
                raise
            except Exception as e:
                logger.error(f"Error in sweep cell {cell} (param {grid[cell]}): {e}")
                raise

    records.sort(key=lambda record: record.sample_id)
    worst = min(record.residual for record in records)
    logger.info(f"Sweep finished: {len(records)} records, smallest residual {worst:.3e}")
    return records
