import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from matrix_core import ContractViolationError, DimensionMismatchError
from measures import (
    Basis, coherence_l1, coherence_relative_entropy, dephase, entropy_of_matrices,
    entropy_of_spectra, entropy_of_spectrum, matrix_in_frame, relative_entropy, von_neumann_entropy
)
from states import (
    RngStream, maximally_coherent, maximally_mixed, pure_state, random_mixed, random_unitary
)


@pytest.mark.parametrize('d', [2, 3, 4])
def test_entropy_extremes(d):
    assert_allclose(von_neumann_entropy(maximally_mixed(d)), math.log2(d), atol=1e-12)
    assert von_neumann_entropy(maximally_coherent(d)) < 1e-10


def test_entropy_of_spectrum():
    assert entropy_of_spectrum([1.0, 0.0]) == 0.0
    assert_allclose(entropy_of_spectrum([0.5, 0.25, 0.25]), 1.5)
    assert entropy_of_spectrum([1.0, -1e-14]) == 0.0
    with pytest.raises(ContractViolationError):
        entropy_of_spectrum([1.1, -0.1])


def test_entropy_is_unitarily_invariant():
    rho = random_mixed(3, 3, RngStream(3))
    u = random_unitary(3, RngStream(3, 1))
    rotated = type(rho)(u @ rho.matrix @ u.conj().T)
    assert abs(von_neumann_entropy(rho) - von_neumann_entropy(rotated)) < 1e-10


def test_relative_entropy_basics():
    rho = random_mixed(3, 3, RngStream(8))
    assert relative_entropy(rho, rho) < 1e-10
    expected = math.log2(3) - von_neumann_entropy(rho)
    assert_allclose(relative_entropy(rho, maximally_mixed(3)), expected, atol=1e-10)


def test_relative_entropy_support_violation():
    assert math.isinf(relative_entropy(pure_state([1, 0]), pure_state([0, 1])))
    assert math.isinf(relative_entropy(maximally_mixed(2), pure_state([1, 0])))
    # supp ρ ⊂ supp σ stays finite
    assert_allclose(relative_entropy(pure_state([1, 0]), maximally_mixed(2)), 1.0, atol=1e-12)


def test_relative_entropy_nonnegative():
    gen = np.random.default_rng(21)
    for _ in range(100):
        rho = random_mixed(2, 2, gen)
        sigma = random_mixed(2, 2, gen)
        assert relative_entropy(rho, sigma) >= 0.0


def test_relative_entropy_dimension_check():
    with pytest.raises(DimensionMismatchError):
        relative_entropy(maximally_mixed(2), maximally_mixed(3))


def test_basis_must_be_unitary():
    with pytest.raises(ContractViolationError):
        Basis(np.array([[1, 1], [0, 1]]))
    assert Basis.product(Basis.computational(2), Basis.plus_minus()).dim == 4


@pytest.mark.parametrize('d', [2, 3, 5])
def test_coherence_of_maximally_coherent_state(d):
    rho = maximally_coherent(d)
    basis = Basis.computational(d)
    assert_allclose(coherence_relative_entropy(rho, basis), math.log2(d), atol=1e-10)
    assert_allclose(coherence_l1(rho, basis), d - 1, atol=1e-10)


def test_coherence_depends_on_frame():
    plus = maximally_coherent(2)
    assert coherence_relative_entropy(plus, Basis.plus_minus()) < 1e-10
    assert coherence_l1(plus, Basis.plus_minus()) < 1e-10
    assert_allclose(coherence_relative_entropy(pure_state([1, 0]), Basis.plus_minus()), 1.0, atol=1e-10)


def test_dephase_keeps_populations():
    rho = random_mixed(3, 3, RngStream(2))
    dephased = dephase(rho, Basis.computational(3))
    assert_allclose(dephased.matrix, np.diag(np.diag(rho.matrix)), atol=1e-12)
    in_frame = matrix_in_frame(rho, Basis.computational(3))
    assert_allclose(in_frame, rho.matrix, atol=1e-12)


def test_coherence_bounds_on_random_states():
    gen = np.random.default_rng(5)
    for d in (2, 3):
        basis = Basis.computational(d)
        for _ in range(100):
            rho = random_mixed(d, d, gen)
            c = coherence_relative_entropy(rho, basis)
            assert 0.0 <= c <= math.log2(d) + 1e-10
            assert c <= von_neumann_entropy(dephase(rho, basis)) + 1e-10


def test_relative_entropy_coherence_is_distance_to_dephased_state():
    gen = np.random.default_rng(66)
    for index in range(20):
        d = 2 + index % 3
        rho = random_mixed(d, d, gen)
        basis = Basis(random_unitary(d, gen))
        assert_allclose(coherence_relative_entropy(rho, basis),
                        relative_entropy(rho, dephase(rho, basis)), atol=1e-9)


def test_batched_entropies_match_single_evaluation():
    spectra = np.array([[1.0, 0.0, 0.0], [0.5, 0.5, 0.0], [0.5, 0.25, 0.25]])
    assert_allclose(entropy_of_spectra(spectra), [0.0, 1.0, 1.5], atol=1e-12)
    states = [random_mixed(3, 3, RngStream(68, i)) for i in range(5)]
    batch = entropy_of_matrices(np.stack([rho.matrix for rho in states]))
    assert_allclose(batch, [von_neumann_entropy(rho) for rho in states], atol=1e-12)
