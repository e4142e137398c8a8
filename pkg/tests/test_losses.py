"""Loss zoo: table values, symmetry, Lipschitz/monotone grids, scaling."""
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hdrisk.losses import LossSpec, loss_eval, loss_eval_vec, psi_vec

ALL_KINDS = ["square", "huber", "smooth_huber0", "smooth_huber1"]
SMOOTH_KINDS = ["smooth_huber0", "smooth_huber1"]


def test_square_values():
    assert loss_eval(LossSpec(kind="square"), 3.5) == (6.125, 3.5, 1.0)


def test_huber_beyond_elbow():
    # rho = u - 1/2, psi = 1, psi' = 0 past the elbow at 1.
    assert loss_eval(LossSpec(kind="huber", scale=1.0), 2.0) == (1.5, 1.0, 0.0)


def test_huber_kink_convention():
    # psi' = 1 on the closed elbow so the inlier set is closed.
    _, _, dpsi = loss_eval(LossSpec(kind="huber", scale=1.0), 1.0)
    assert dpsi == 1.0


def test_smooth_huber0_tail():
    rho, psi, dpsi = loss_eval(LossSpec(kind="smooth_huber0", scale=1.0), 2.0)
    assert rho == pytest.approx(11.0 / 6.0, abs=1e-15)
    assert psi == pytest.approx(1.5, abs=1e-15)
    assert dpsi == 0.0


def test_smooth_huber1_midrange_curvature():
    # 2u^3 - 9u^2 + 12u - 4 at u = 1.5
    _, _, dpsi = loss_eval(LossSpec(kind="smooth_huber1", scale=1.0), 1.5)
    assert dpsi == pytest.approx(0.5, abs=1e-12)


def test_vectorized_square():
    _, psi, _ = loss_eval_vec(LossSpec(kind="square"), np.array([1.0, 2.0]))
    np.testing.assert_array_equal(psi, [1.0, 2.0])


def test_vectorized_huber_odd_symmetry():
    _, psi, _ = loss_eval_vec(LossSpec(kind="huber", scale=1.0), np.array([0.5, -3.0]))
    np.testing.assert_allclose(psi, [0.5, -1.0])


def test_empty_vector():
    rho, psi, dpsi = loss_eval_vec(LossSpec(kind="huber", scale=1.0), np.array([]))
    assert rho.size == psi.size == dpsi.size == 0


@pytest.mark.parametrize("kind", ALL_KINDS)
@given(u=st.floats(-50, 50), scale=st.floats(0.1, 10))
@settings(max_examples=50, deadline=None)
def test_symmetry(kind, u, scale):
    loss = LossSpec(kind=kind, scale=scale)
    rho_p, psi_p, dpsi_p = loss_eval(loss, u)
    rho_m, psi_m, dpsi_m = loss_eval(loss, -u)
    assert rho_m == pytest.approx(rho_p, rel=1e-12, abs=1e-12)
    assert psi_m == pytest.approx(-psi_p, rel=1e-12, abs=1e-12)
    assert dpsi_m == pytest.approx(dpsi_p, rel=1e-12, abs=1e-12)


@pytest.mark.parametrize("kind", ALL_KINDS)
@pytest.mark.parametrize("scale", [0.5, 1.0, 2.5])
def test_grid_lipschitz_monotone_range(kind, scale):
    loss = LossSpec(kind=kind, scale=scale)
    u = np.linspace(-10 * scale, 10 * scale, 10_000)
    _, psi, dpsi = loss_eval_vec(loss, u)
    du = u[1] - u[0]
    diffs = np.diff(psi)
    assert np.all(np.abs(diffs) <= du * (1 + 1e-9)), "psi must be 1-Lipschitz"
    assert np.all(diffs >= -1e-12), "psi must be nondecreasing"
    assert np.all((dpsi >= 0.0) & (dpsi <= 1.0 + 1e-12))


@pytest.mark.parametrize("kind", ALL_KINDS)
def test_finite_difference_consistency_away_from_kinks(kind):
    # Central differences of rho match psi to O(h^2) away from kink points;
    # likewise psi vs psi' for the smoothed losses.
    loss = LossSpec(kind=kind, scale=1.0)
    h = 1e-4
    kinks = np.array([]) if kind == "square" else np.array([-2.0, -1.0, 1.0, 2.0])
    u = np.linspace(-8, 8, 1601)
    if kinks.size:
        u = u[np.min(np.abs(u[:, None] - kinks[None, :]), axis=1) > 10 * h]
    rho_p, _, _ = loss_eval_vec(loss, u + h)
    rho_m, _, _ = loss_eval_vec(loss, u - h)
    _, psi, dpsi = loss_eval_vec(loss, u)
    np.testing.assert_allclose((rho_p - rho_m) / (2 * h), psi, atol=50 * h**2)
    if kind in SMOOTH_KINDS:
        _, psi_p, _ = loss_eval_vec(loss, u + h)
        _, psi_m, _ = loss_eval_vec(loss, u - h)
        np.testing.assert_allclose((psi_p - psi_m) / (2 * h), dpsi, atol=50 * h**2)


@pytest.mark.parametrize("kind", SMOOTH_KINDS)
def test_smoothed_psi_prime_consistent_near_junctions(kind):
    # psi' is continuous for the smoothed losses, so first differences of psi
    # agree with psi' everywhere, at O(h) accuracy across the junctions.
    loss = LossSpec(kind=kind, scale=1.0)
    h = 1e-6
    u = np.concatenate([np.linspace(0.999, 1.001, 101), np.linspace(1.999, 2.001, 101)])
    _, psi_p, _ = loss_eval_vec(loss, u + h)
    _, psi_m, _ = loss_eval_vec(loss, u - h)
    _, _, dpsi = loss_eval_vec(loss, u)
    np.testing.assert_allclose((psi_p - psi_m) / (2 * h), dpsi, atol=5 * h)


@pytest.mark.parametrize("kind", ALL_KINDS)
@given(scale=st.floats(0.05, 20), u=st.floats(-30, 30))
@settings(max_examples=60, deadline=None)
def test_scaling_identity(kind, scale, u):
    # psi_scale(u) = scale * psi_1(u / scale), exactly.
    scaled = LossSpec(kind=kind, scale=scale)
    unit = LossSpec(kind=kind, scale=1.0)
    _, psi_s, dpsi_s = loss_eval(scaled, u)
    _, psi_1, dpsi_1 = loss_eval(unit, u / scale)
    assert psi_s == scale * psi_1
    assert dpsi_s == dpsi_1


def test_psi_vec_matches_full_eval():
    loss = LossSpec(kind="smooth_huber1", scale=1.7)
    u = np.linspace(-5, 5, 101)
    _, psi, _ = loss_eval_vec(loss, u)
    np.testing.assert_array_equal(psi_vec(loss, u), psi)


def test_scale_must_be_positive():
    with pytest.raises(Exception):
        LossSpec(kind="huber", scale=0.0)
