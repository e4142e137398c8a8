"""Data generation: covariance draws, dataset reproducibility, oos metric."""
import numpy as np
import pytest

from hdrisk.datagen import (
    Dataset,
    GaussianNoise,
    GroundTruth,
    IdentityCovariance,
    LowRankSignal,
    ScaledWishartCovariance,
    SparseFlatSignal,
    StudentTNoise,
    gen_covariance,
    gen_dataset,
    gen_signal,
    oos_error,
)
from hdrisk.errors import DimensionMismatch, NonPositiveDefinite
from hdrisk.rng import replication_stream, stream


def test_identity_covariance_exact():
    sigma = gen_covariance(IdentityCovariance(), 3, stream(0))
    np.testing.assert_array_equal(sigma, np.eye(3))


def test_wishart_covariance_positive_definite():
    sigma = gen_covariance(ScaledWishartCovariance(dof_multiplier=5), 50, stream(7))
    assert np.array_equal(sigma, sigma.T)
    w = np.linalg.eigvalsh(sigma)
    assert w.min() > 0


def test_wishart_diagonal_mean_is_one():
    # E[W/(5p)]_ii = 1; the per-seed average of p diagonal entries has
    # variance 2/(5p*p), so over S seeds the standard error is
    # sqrt(2/(5 p^2 S)).
    p, n_seeds, dof = 50, 24, 5
    means = [
        float(np.mean(np.diag(gen_covariance(ScaledWishartCovariance(dof_multiplier=dof), p, stream(s)))))
        for s in range(n_seeds)
    ]
    se = np.sqrt(2.0 / (dof * p * p * n_seeds))
    assert abs(np.mean(means) - 1.0) <= 3 * se


def test_sample_covariance_matches_sigma():
    rng = stream(3)
    data, _ = gen_dataset(1000, np.eye(2), np.zeros(2), GaussianNoise(sigma=1.0), rng)
    emp = data.x.T @ data.x / data.n
    assert np.max(np.abs(emp - np.eye(2))) < 0.15


def test_zero_signal_response_is_noise():
    rng = stream(4)
    data, truth = gen_dataset(50, np.eye(3), np.zeros(3), GaussianNoise(sigma=1.0), rng)
    np.testing.assert_array_equal(data.y - truth.eps, np.zeros(50))


def test_paper_scale_sparse_config():
    # n=1001, p=1000, 100 nonzeros equal to 10/sqrt(p), t(2) noise.
    n, p = 1001, 1000
    beta = gen_signal(SparseFlatSignal(s=100, amplitude=10.0 * p**-0.5), p, stream(0))
    assert int(np.sum(beta != 0)) == 100
    data, truth = gen_dataset(n, np.eye(p), beta, StudentTNoise(dof=2), stream(5))
    assert data.n == n and data.p == p
    assert int(np.sum(truth.beta != 0)) == 100
    assert truth.sigma2_star == pytest.approx(float(truth.eps @ truth.eps) / n)


def test_low_rank_signal_shape_and_rank():
    beta = gen_signal(LowRankSignal(rows=20, cols=25, rank=3), 500, stream(1))
    m = beta.reshape((20, 25), order="F")
    assert np.linalg.matrix_rank(m) == 3
    assert np.all(m[:, 3:] == 0)


def test_oos_error_values():
    truth = GroundTruth(beta=np.array([1.0, 2.0]), sigma_cov=np.eye(2),
                        eps=np.zeros(3), sigma2_star=0.0)
    assert oos_error(np.array([1.0, 2.0]), truth) == 0.0
    assert oos_error(np.array([2.0, 2.0]), truth) == 1.0  # offset e_1, Sigma = I
    truth2 = GroundTruth(beta=np.zeros(2), sigma_cov=2 * np.eye(2),
                         eps=np.zeros(3), sigma2_star=0.0)
    assert oos_error(np.array([1.0, 1.0]), truth2) == 4.0  # 2 * ||(1,1)||^2


def test_oos_error_dimension_mismatch():
    truth = GroundTruth(beta=np.zeros(3), sigma_cov=np.eye(3), eps=np.zeros(2),
                        sigma2_star=0.0)
    with pytest.raises(DimensionMismatch):
        oos_error(np.zeros(4), truth)


def test_same_seed_bit_identical():
    a = gen_dataset(30, np.eye(5), np.ones(5), GaussianNoise(sigma=2.0),
                    replication_stream(11, 3))
    b = gen_dataset(30, np.eye(5), np.ones(5), GaussianNoise(sigma=2.0),
                    replication_stream(11, 3))
    np.testing.assert_array_equal(a[0].x, b[0].x)
    np.testing.assert_array_equal(a[0].y, b[0].y)
    np.testing.assert_array_equal(a[1].eps, b[1].eps)


def test_replication_streams_are_disjoint():
    a, _ = gen_dataset(10, np.eye(2), np.zeros(2), GaussianNoise(), replication_stream(11, 0))
    b, _ = gen_dataset(10, np.eye(2), np.zeros(2), GaussianNoise(), replication_stream(11, 1))
    assert not np.array_equal(a.x, b.x)


def test_second_moment_frobenius_rate():
    # Frobenius error of the empirical second moment is O(1/sqrt(n)).
    p = 4
    sigma = gen_covariance(ScaledWishartCovariance(), p, stream(9))
    errs = []
    for n in (200, 3200):
        data, _ = gen_dataset(n, sigma, np.zeros(p), GaussianNoise(), stream(10, n))
        emp = data.x.T @ data.x / n
        errs.append(np.linalg.norm(emp - sigma) * np.sqrt(n))
    assert errs[1] <= 8 * errs[0] + 1e-9  # scaled errors stay comparable


def test_contaminated_noise_mixture():
    from hdrisk.datagen import ContaminatedNoise

    rng = stream(12)
    _, truth = gen_dataset(4000, np.eye(2), np.zeros(2),
                           ContaminatedNoise(sigma=1.0, q=0.2, outlier_scale=50.0), rng)
    share_large = float(np.mean(np.abs(truth.eps) > 5.0))
    assert 0.1 < share_large < 0.3  # roughly the q = 0.2 corrupted fraction


def test_singular_covariance_rejected():
    sigma = np.zeros((3, 3))
    with pytest.raises(NonPositiveDefinite):
        gen_dataset(10, sigma, np.zeros(3), GaussianNoise(), stream(0))


def test_dataset_validates_shapes():
    with pytest.raises(DimensionMismatch):
        Dataset(np.zeros((3, 2)), np.zeros(4))
    with pytest.raises(ValueError):
        Dataset(np.full((2, 2), np.nan), np.zeros(2))


def test_signal_sparsity_cannot_exceed_p():
    with pytest.raises(DimensionMismatch):
        gen_signal(SparseFlatSignal(s=10, amplitude=1.0), 5, stream(0))
