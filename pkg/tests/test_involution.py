import numpy as np
import pytest

from analysis import involution as inv
from analysis.second_law import random_potential
from core import measure as msr
from core.errors import UnsupportedDepthError, ValidationError
from core.symbolic import FiniteMemoryFunction, constant
from core.transfer import equilibrium, pressure


@pytest.fixture
def reversible_potential():
    return FiniteMemoryFunction(2, 2, [0.3, 1.2, 1.2, -0.4])


@pytest.fixture
def circulant_potential(circulant_chain):
    return msr.markov_invariant(circulant_chain).log_irn


class TestInvolutionKernel:
    def test_depth_one_has_trivial_kernel(self):
        A = FiniteMemoryFunction(3, 1, [0.1, -0.5, 0.9])
        data = inv.involution_kernel(A)
        np.testing.assert_array_equal(data.W, np.zeros((1, 1)))
        np.testing.assert_array_equal(data.dual.values, A.values)
        assert inv.entropy_production(A) == pytest.approx(0.0, abs=1e-14)

    def test_gauge(self, rng):
        data = inv.involution_kernel(random_potential(rng, 2, 3))
        np.testing.assert_array_equal(data.W[:, 0], 0.0)

    def test_identity_holds(self, rng):
        for d, depth in [(2, 2), (2, 4), (3, 3)]:
            data = inv.involution_kernel(random_potential(rng, d, depth))
            assert data.identity_residual < 1e-12
            assert data.depth == depth

    def test_reference_word_length(self, reversible_potential):
        with pytest.raises(ValidationError):
            inv.involution_kernel(reversible_potential, x_ref=(1, 2))

    def test_dual_has_the_same_pressure(self, rng):
        A = random_potential(rng, 3, 2)
        assert pressure(inv.dual_potential(A)) == pytest.approx(pressure(A), abs=1e-12)


class TestEntropyProduction:
    def test_reversible_potential(self, reversible_potential):
        assert inv.is_reversal_symmetric(reversible_potential)
        assert abs(inv.entropy_production(reversible_potential)) < 1e-12
        assert pressure(inv.dual_potential(reversible_potential)) == pytest.approx(
            pressure(reversible_potential), abs=1e-12)

    def test_two_state_chains_are_reversible(self):
        P = np.array([[0.9, 0.2], [0.1, 0.8]])
        A = msr.markov_invariant(P).log_irn
        assert not inv.is_reversal_symmetric(A)
        assert abs(inv.entropy_production(A)) < 1e-12

    def test_circulant_chain(self, circulant_potential):
        # stationary flux .7/3 one way and .2/3 the other
        assert inv.entropy_production(circulant_potential) == pytest.approx(0.5 * np.log(3.5), abs=1e-9)
        assert inv.entropy_production(circulant_potential) == pytest.approx(0.626381, abs=1e-6)

    def test_nonnegative(self, rng):
        for trial in range(20):
            A = random_potential(rng, 2 + trial % 2, 2 + trial % 2)
            assert inv.entropy_production(A) >= -1e-12

    def test_reference_word_does_not_matter(self, rng):
        A = random_potential(rng, 2, 3)
        assert inv.entropy_production(A, (2, 1)) == pytest.approx(inv.entropy_production(A), abs=1e-12)

    def test_report(self, circulant_potential):
        report = inv.entropy_production_report(circulant_potential)
        assert set(report) == {"e_p", "symmetric_detected", "depth"}
        assert report["symmetric_detected"] is False
        assert report["depth"] == 2


class TestFlippedMeasure:
    def test_weights_are_reversed_cylinders(self, rng):
        A = random_potential(rng, 2, 3)
        np.testing.assert_allclose(inv.flip_pushforward_weights(A, 3),
                                   msr.reversed_cylinder_weights(equilibrium(A), 3), atol=1e-13)

    def test_kl_equals_entropy_production(self, circulant_potential, rng):
        assert inv.flip_kl(circulant_potential) == pytest.approx(inv.entropy_production(circulant_potential), abs=1e-10)
        A = random_potential(rng, 3, 2)
        assert inv.flip_kl(A) == pytest.approx(inv.entropy_production(A), abs=1e-10)

    def test_length_cap(self, circulant_potential):
        with pytest.raises(ValidationError):
            inv.flip_pushforward_weights(circulant_potential, 6)


class TestDualityCheck:
    def test_supported_cases(self, reversible_potential, circulant_potential, rng):
        for A in (constant(2, 0.0, depth=2), reversible_potential, circulant_potential, random_potential(rng, 3, 2)):
            assert inv.duality_check(A) < 1e-10

    def test_depth_gate(self, rng):
        A = random_potential(rng, 2, 3)
        with pytest.raises(UnsupportedDepthError):
            inv.duality_check(A)
        assert np.isfinite(inv.duality_check(A, allow_experimental=True))
        with pytest.raises(UnsupportedDepthError):
            inv.duality_check(FiniteMemoryFunction(2, 1, [0.0, 1.0]), allow_experimental=True)
