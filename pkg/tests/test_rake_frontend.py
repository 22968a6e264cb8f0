# tests/test_rake_frontend.py
import numpy as np
import pytest

from src.exceptions import ShapeMismatchError
from src.rake_frontend import RakeBank, power_ordering, rake_soft_outputs, residual_reordering
from tests.conftest import orthogonal_signatures, random_signatures


@pytest.mark.parametrize("symbol", [1.0, -1.0, (1 - 1j) / np.sqrt(2), (-1 + 1j) / np.sqrt(2)])
def test_single_user_noise_free_recovers_symbol(rng, symbol):
    H = random_signatures(1, rng)
    soft = rake_soft_outputs(RakeBank.from_signatures(H), H[:, 0] * symbol)
    assert abs(soft.normalized()[0] - symbol) < 1e-12


def test_zero_observation_gives_zero_outputs(rng):
    bank = RakeBank.from_signatures(random_signatures(3, rng))
    soft = rake_soft_outputs(bank, np.zeros(bank.length))
    assert not np.any(soft.values)


def test_orthogonal_users_recovered_exactly():
    H = orthogonal_signatures(2, amplitudes=[0.5, 2.0])
    b = np.array([1.0, -1.0])
    soft = rake_soft_outputs(RakeBank.from_signatures(H), H @ b)
    np.testing.assert_allclose(soft.normalized(), b, atol=1e-12)


def test_gains_are_signature_energies(rng):
    H = random_signatures(3, rng)
    bank = RakeBank.from_signatures(H)
    np.testing.assert_allclose(bank.gains, np.linalg.norm(H, axis=0) ** 2)


def test_zero_gain_user_normalizes_to_zero():
    H = np.zeros((4, 2), complex)
    H[:, 0] = [1, 0, 0, 0]
    soft = rake_soft_outputs(RakeBank.from_signatures(H), np.array([1, 1, 1, 1], complex))
    assert soft.normalized()[1] == 0


def test_shape_mismatch(rng):
    bank = RakeBank.from_signatures(random_signatures(2, rng))
    with pytest.raises(ShapeMismatchError):
        rake_soft_outputs(bank, np.zeros(bank.length + 1))


def test_soft_outputs_are_linear(rng):
    bank = RakeBank.from_signatures(random_signatures(3, rng))
    y1 = rng.standard_normal(bank.length) + 1j * rng.standard_normal(bank.length)
    y2 = rng.standard_normal(bank.length) + 1j * rng.standard_normal(bank.length)
    total = rake_soft_outputs(bank, y1 + y2).values
    parts = rake_soft_outputs(bank, y1).values + rake_soft_outputs(bank, y2).values
    np.testing.assert_allclose(total, parts, atol=1e-12)


def test_power_ordering_examples():
    equal = RakeBank.from_signatures(orthogonal_signatures(3))
    np.testing.assert_array_equal(power_ordering(equal), [0, 1, 2])

    powers = np.sqrt([0.5, 2.0, 1.0])
    ranked = RakeBank.from_signatures(orthogonal_signatures(3, amplitudes=powers))
    np.testing.assert_array_equal(power_ordering(ranked), [1, 2, 0])

    single = RakeBank.from_signatures(orthogonal_signatures(1))
    np.testing.assert_array_equal(power_ordering(single), [0])


def test_power_ordering_invariant_to_common_scaling(rng):
    H = random_signatures(5, rng)
    np.testing.assert_array_equal(power_ordering(RakeBank.from_signatures(H)),
                                  power_ordering(RakeBank.from_signatures(3.7 * H)))


def test_residual_reordering_examples(rng):
    bank = RakeBank.from_signatures(random_signatures(4, rng))
    np.testing.assert_array_equal(residual_reordering(bank, rng.standard_normal(bank.length), [2]), [2])
    np.testing.assert_array_equal(residual_reordering(bank, np.zeros(bank.length), [3, 0, 2]), [0, 2, 3])


def test_residual_reordering_after_cancelling_strongest():
    amplitudes = np.array([0.7, 1.5, 1.1, 0.4])
    H = orthogonal_signatures(4, amplitudes=amplitudes)
    bank = RakeBank.from_signatures(H)
    b = np.array([1.0, -1.0, -1.0, 1.0])
    strongest = power_ordering(bank)[0]
    residual = H @ b - H[:, strongest] * b[strongest]
    remaining = [k for k in range(4) if k != strongest]

    expected = [k for k in power_ordering(bank) if k != strongest]
    np.testing.assert_array_equal(residual_reordering(bank, residual, remaining), expected)
