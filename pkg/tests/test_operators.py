import numpy as np
import pytest

from mmwave_ce import (
    EntrySamplingOperator,
    MatrixOperator,
    SandwichOperator,
    adjoint_mismatch,
    lipschitz_estimate,
    sample_support,
)
from mmwave_ce.operators import MaskedEntryOperator, check_adjoint


def _random_complex(rng, shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def _operators():
    rng = np.random.default_rng(0)
    left = _random_complex(rng, (12, 20))
    right = _random_complex(rng, (24, 10))
    omega = sample_support(12, 10, 40, seed=1)
    return [
        MatrixOperator(_random_complex(rng, (10, 20))),
        SandwichOperator(left, right),
        EntrySamplingOperator(left, right, omega),
        MaskedEntryOperator((9, 7), sample_support(9, 7, 30, seed=2)),
    ]


def test_adjoint_consistency_all_operators():
    for op in _operators():
        assert adjoint_mismatch(op, probes=20, seed=3) <= 1e-10


def test_check_adjoint_rejects_bad_operator():
    class Broken(MatrixOperator):
        def adjoint(self, y):
            return 1.001 * super().adjoint(y)

    with pytest.raises(ValueError):
        check_adjoint(Broken(np.eye(4)))


def test_sandwich_matches_dense_evaluation():
    rng = np.random.default_rng(4)
    left, right = _random_complex(rng, (5, 8)), _random_complex(rng, (6, 4))
    op = SandwichOperator(left, right)
    x = _random_complex(rng, (8, 6))
    assert np.allclose(op.forward(x), left @ x @ right, atol=1e-12)
    assert op.in_shape == (8, 6)
    assert op.out_shape == (5, 4)


def test_entry_sampling_matches_per_measurement_model():
    rng = np.random.default_rng(5)
    left, right = _random_complex(rng, (6, 9)), _random_complex(rng, (7, 5))
    omega = sample_support(6, 5, 12, seed=6)
    op = EntrySamplingOperator(left, right, omega)
    x = _random_complex(rng, (9, 7))
    y = op.forward(x)
    for t, (i, j) in enumerate(omega):
        assert abs(y[t] - left[i, :] @ x @ right[:, j]) < 1e-12


def test_lipschitz_identity():
    assert lipschitz_estimate(MatrixOperator(np.eye(7)), iters=10) == pytest.approx(1.0, abs=1e-6)


def test_lipschitz_known_spectrum():
    op = MatrixOperator(np.diag([3.0, 1.0]))
    assert lipschitz_estimate(op, iters=60) == pytest.approx(9.0, abs=1e-4)


def test_lipschitz_matches_direct_svd():
    rng = np.random.default_rng(7)
    a = _random_complex(rng, (10, 20))
    est = lipschitz_estimate(MatrixOperator(a), iters=80)
    truth = np.linalg.svd(a, compute_uv=False)[0] ** 2
    assert est == pytest.approx(truth, rel=0.01)
    assert est <= truth * (1 + 1e-9)  # power iteration approaches from below


def test_lipschitz_never_far_below_truth_on_conditioned_operators():
    rng = np.random.default_rng(8)
    for _ in range(5):
        a = _random_complex(rng, (15, 15)) + 3 * np.eye(15)
        est = lipschitz_estimate(MatrixOperator(a), iters=50, seed=1)
        truth = np.linalg.svd(a, compute_uv=False)[0] ** 2
        assert est >= 0.95 * truth
