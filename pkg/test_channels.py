import numpy as np
import pytest
from numpy.testing import assert_allclose

from channels import (
    InvalidChannelError, KrausChannel, amplitude_damping, apply, apply_dilation,
    apply_extended, bit_flip, bit_phase_flip, compose, depolarizing, dilation_isometry,
    identity, is_cptp, local_channel, phase_flip, projective_measurement, random_channel,
    remix, tensor_product, unitary_channel, weak_measurement
)
from matrix_core import DimensionMismatchError, dagger, partial_trace, tensor
from measures import Basis, coherence_relative_entropy
from states import (
    RngStream, maximally_coherent, maximally_mixed, product_state, pure_state, purify,
    random_mixed, random_unitary
)

PARAMS = [0.0, 0.3, 0.5, 1.0]

QUBIT_FAMILIES = [
    weak_measurement, depolarizing, amplitude_damping, bit_flip, phase_flip, bit_phase_flip
]


@pytest.mark.parametrize('factory', QUBIT_FAMILIES)
@pytest.mark.parametrize('param', PARAMS)
def test_named_channels_are_cptp(factory, param):
    ch = factory(param)
    assert is_cptp(ch)
    assert ch.param == param


@pytest.mark.parametrize('factory', QUBIT_FAMILIES)
def test_parameter_range_is_checked(factory):
    with pytest.raises(InvalidChannelError):
        factory(1.5)
    with pytest.raises(InvalidChannelError):
        factory(-0.1)


def test_non_trace_preserving_set_is_rejected():
    ch = KrausChannel((0.5 * np.eye(2),))
    assert not is_cptp(ch)
    with pytest.raises(InvalidChannelError):
        unitary_channel(2 * np.eye(2))
    with pytest.raises(InvalidChannelError):
        KrausChannel(())


def test_weak_measurement_limits():
    rho = random_mixed(2, 2, RngStream(1))
    assert_allclose(apply(weak_measurement(0.0), rho).matrix, rho.matrix, atol=1e-12)
    projective = apply(projective_measurement(Basis.computational(2)), rho).matrix
    assert_allclose(apply(weak_measurement(1.0), rho).matrix, projective, atol=1e-12)
    assert weak_measurement(0.4).measurement


@pytest.mark.parametrize('x', [0.1, 0.5, 0.9])
def test_weak_measurement_offdiagonal_factor(x):
    out = apply(weak_measurement(x), maximally_coherent(2)).matrix
    assert_allclose(out[0, 1], 0.5 * np.sqrt(1 - x ** 2), atol=1e-12)
    assert_allclose(np.diag(out), [0.5, 0.5], atol=1e-12)


@pytest.mark.parametrize('d', [2, 3, 4])
def test_full_depolarizing_gives_maximally_mixed(d):
    ch = depolarizing(1.0, d)
    assert ch.env_dim == d * d
    rho = random_mixed(d, d, RngStream(d))
    assert_allclose(apply(ch, rho).matrix, np.eye(d) / d, atol=1e-12)


@pytest.mark.parametrize('d', [2, 3])
def test_depolarizing_mixes_linearly(d):
    rho = random_mixed(d, d, RngStream(30, d))
    expected = 0.6 * rho.matrix + 0.4 * np.eye(d) / d
    assert_allclose(apply(depolarizing(0.4, d), rho).matrix, expected, atol=1e-12)


def test_amplitude_damping():
    excited = pure_state([0, 1])
    assert_allclose(apply(amplitude_damping(1.0), excited).matrix, np.diag([1, 0]), atol=1e-12)
    assert_allclose(apply(amplitude_damping(0.25), excited).matrix, np.diag([0.25, 0.75]), atol=1e-12)


def test_flips_on_computational_states():
    zero = pure_state([1, 0])
    assert_allclose(apply(bit_flip(1.0), zero).matrix, np.diag([0, 1]), atol=1e-12)
    assert_allclose(apply(phase_flip(1.0), zero).matrix, np.diag([1, 0]), atol=1e-12)
    assert_allclose(apply(bit_phase_flip(1.0), zero).matrix, np.diag([0, 1]), atol=1e-12)
    plus = maximally_coherent(2)
    assert_allclose(apply(phase_flip(0.5), plus).matrix, np.eye(2) / 2, atol=1e-12)


def test_dimension_mismatch():
    with pytest.raises(DimensionMismatchError):
        apply(depolarizing(0.5, 3), maximally_mixed(2))


@pytest.mark.parametrize('factory', QUBIT_FAMILIES)
def test_dilation_agrees_with_kraus_application(factory):
    ch = factory(0.35)
    dilation = dilation_isometry(ch)
    v = dilation.isometry
    assert dilation.env_dim == ch.env_dim
    assert_allclose(dagger(v) @ v, np.eye(2), atol=1e-12)
    rho = random_mixed(2, 2, RngStream(12))
    assert np.abs(apply_dilation(dilation, rho).matrix - apply(ch, rho).matrix).max() < 1e-12


def test_extended_application_reduces_to_channel_output():
    rho = random_mixed(3, 3, RngStream(6))
    ch = random_channel(3, 4, RngStream(6, 1))
    extended = apply_extended(ch, purify(rho))
    assert np.abs(partial_trace(extended.matrix, [3, 3], [0]) - apply(ch, rho).matrix).max() < 1e-10
    # the reference marginal is untouched
    reference = partial_trace(purify(rho).projector(), [3, 3], [1])
    assert np.abs(partial_trace(extended.matrix, [3, 3], [1]) - reference).max() < 1e-10


def test_remix_leaves_channel_unchanged():
    ch = amplitude_damping(0.6)
    mixed = remix(ch, random_unitary(2, RngStream(13)))
    assert is_cptp(mixed)
    gen = np.random.default_rng(13)
    for _ in range(20):
        rho = random_mixed(2, 2, gen)
        assert np.abs(apply(mixed, rho).matrix - apply(ch, rho).matrix).max() < 1e-12
    with pytest.raises(DimensionMismatchError):
        remix(ch, np.eye(3))


def test_compose_matches_sequential_application():
    first = amplitude_damping(0.3)
    second = depolarizing(0.2)
    rho = random_mixed(2, 2, RngStream(14))
    composed = compose(second, first)
    assert composed.env_dim == 8
    expected = apply(second, apply(first, rho)).matrix
    assert np.abs(apply(composed, rho).matrix - expected).max() < 1e-12
    with pytest.raises(DimensionMismatchError):
        compose(depolarizing(0.2, 3), first)


def test_tensor_product_on_product_states():
    a = random_mixed(2, 2, RngStream(15))
    b = random_mixed(2, 2, RngStream(15, 1))
    ch = tensor_product(amplitude_damping(0.4), bit_flip(0.1))
    assert ch.dims == (2, 2)
    expected = tensor(apply(amplitude_damping(0.4), a).matrix, apply(bit_flip(0.1), b).matrix)
    assert np.abs(apply(ch, product_state(a, b)).matrix - expected).max() < 1e-12


def test_local_channel():
    rho_ab = random_mixed(4, 4, RngStream(16))
    ch = local_channel(depolarizing(1.0), (2, 2), 1)
    out = apply(ch, rho_ab)
    expected = tensor(rho_ab.reduce([2, 2], [0]).matrix, np.eye(2) / 2)
    assert np.abs(out.matrix - expected).max() < 1e-12
    with pytest.raises(InvalidChannelError):
        local_channel(identity(2), (2, 2), 2)


def test_random_channel_is_cptp():
    for index in range(10):
        assert is_cptp(random_channel(3, 1 + index % 4, RngStream(17, index)))


def test_describe():
    info = weak_measurement(0.5).describe()
    assert info['label'] == 'weak'
    assert info['param'] == 0.5
    assert len(info['kraus']) == 2
    assert compose(identity(2), identity(2)).describe()['param'] is None


@pytest.mark.parametrize('factory', QUBIT_FAMILIES)
def test_named_channels_are_cptp_on_fine_grid(factory):
    for param in np.linspace(0.0, 1.0, 20):
        assert is_cptp(factory(float(param)))
        assert is_cptp(depolarizing(float(param), 3))


@pytest.mark.parametrize('basis', [Basis.computational(2), Basis.plus_minus()])
def test_projective_measurement_output_is_incoherent(basis):
    ch = projective_measurement(basis)
    assert ch.env_dim == 2
    assert dilation_isometry(ch).env_dim == 2
    gen = np.random.default_rng(67)
    for _ in range(20):
        assert coherence_relative_entropy(apply(ch, random_mixed(2, 2, gen)), basis) < 1e-10


def test_public_constructors_are_documented():
    for fn in (is_cptp, apply, apply_extended, dilation_isometry, amplitude_damping,
               projective_measurement, purify, bit_flip, tensor_product):
        assert fn.__doc__, fn.__name__
