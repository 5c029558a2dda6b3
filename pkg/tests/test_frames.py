import numpy as np
import pytest
from scipy.spatial.transform import Rotation

from aerowind.exceptions import DegenerateAirspeed, GimbalLock
from aerowind.frames import (
    body_velocity_from_flow,
    euler_rate_matrix,
    flow_angles,
    rotation_body_to_inertial,
    rotation_inertial_to_body,
    rotation_wind_to_body,
    wrap_angle,
    wrap_degrees,
)


def random_eta(rng, n):
    return np.column_stack([rng.uniform(-np.pi, np.pi, n), rng.uniform(-1.4, 1.4, n),
                            rng.uniform(-np.pi, np.pi, n)])


def test_rotation_orthogonal_to_1e12(rng):
    R = rotation_body_to_inertial(random_eta(rng, 10_000))
    err = np.abs(R @ np.swapaxes(R, -1, -2) - np.eye(3)).max()
    assert err <= 1e-12
    assert np.allclose(np.linalg.det(R), 1.0, atol=1e-12)


def test_rotation_matches_scipy_zyx(rng):
    eta = random_eta(rng, 500)
    ref = Rotation.from_euler("ZYX", eta).as_matrix()
    assert np.abs(rotation_body_to_inertial(eta) - ref).max() < 1e-13


def test_inertial_to_body_is_transpose(rng):
    eta = random_eta(rng, 50)
    R = rotation_body_to_inertial(eta)
    assert np.array_equal(rotation_inertial_to_body(eta), np.swapaxes(R, -1, -2))


def test_identity_and_yaw_only():
    assert np.allclose(rotation_body_to_inertial([0, 0, 0]), np.eye(3))
    # 90 deg yaw: body x points east
    R = rotation_body_to_inertial([np.pi / 2, 0, 0])
    assert np.allclose(R @ [1, 0, 0], [0, 1, 0], atol=1e-15)


def test_wind_to_body_sign_convention(rng):
    # zero flow angles: drag acts aft, lift acts up (negative body z)
    R = rotation_wind_to_body(0.0, 0.0)
    assert np.allclose(R @ [1, 0, 0], [-1, 0, 0])
    assert np.allclose(R @ [0, 0, 1], [0, 0, -1])
    assert np.allclose(R @ [0, 1, 0], [0, 1, 0])
    # in general drag opposes the relative wind and lift is normal to it
    for _ in range(200):
        a, b = rng.uniform(-0.5, 0.5, 2)
        v_hat = body_velocity_from_flow(1.0, a, b)
        R = rotation_wind_to_body(a, b)
        assert np.allclose(R @ [1, 0, 0], -v_hat, atol=1e-14)
        assert abs(np.dot(R @ [0, 0, 1], v_hat)) < 1e-14
        assert abs(np.dot(R @ [0, 1, 0], v_hat)) < 1e-14
        assert np.abs(R.T @ R - np.eye(3)).max() < 1e-14


def test_flow_angle_round_trip(rng):
    V = rng.uniform(5, 40, 1000)
    a = rng.uniform(-0.6, 0.6, 1000)
    b = rng.uniform(-0.4, 0.4, 1000)
    fs = flow_angles(body_velocity_from_flow(V, a, b))
    assert np.allclose(fs.V, V, rtol=1e-14)
    assert np.allclose(fs.alpha, a, atol=1e-14)
    assert np.allclose(fs.beta, b, atol=1e-14)
    assert np.allclose(fs.qbar, 0.5 * 1.225 * V**2)


def test_flow_angles_worked_example():
    fs = flow_angles([16.0, 0.0, 1.0])
    assert fs.alpha == pytest.approx(np.arctan2(1.0, 16.0))
    assert fs.beta == 0.0
    assert fs.V == pytest.approx(np.sqrt(257.0))


def test_degenerate_airspeed():
    with pytest.raises(DegenerateAirspeed):
        flow_angles([0.05, 0.0, 0.0])


def test_euler_rate_matrix_against_rotation_kinematics(rng):
    # oracle: d/dt R_gb = R_gb [omega]x, checked by central differences
    h = 1e-6
    for _ in range(50):
        eta = random_eta(rng, 1)[0]
        omega = rng.normal(size=3)
        T = euler_rate_matrix(eta)
        dR = (rotation_body_to_inertial(eta + h * T @ omega)
              - rotation_body_to_inertial(eta - h * T @ omega)) / (2 * h)
        wx = np.array([[0, -omega[2], omega[1]], [omega[2], 0, -omega[0]],
                       [-omega[1], omega[0], 0]])
        assert np.abs(dR - rotation_body_to_inertial(eta) @ wx).max() < 1e-7


def test_gimbal_guard():
    with pytest.raises(GimbalLock):
        euler_rate_matrix([0.0, np.pi / 2, 0.0])
    euler_rate_matrix([0.0, np.pi / 2 - 0.01, 0.0])


def test_wrapping_half_open_interval():
    assert float(wrap_angle(np.pi)) == pytest.approx(np.pi)
    assert float(wrap_angle(-np.pi)) == pytest.approx(np.pi)
    assert float(wrap_angle(3 * np.pi / 2)) == pytest.approx(-np.pi / 2)
    assert float(wrap_degrees(359.0)) == pytest.approx(-1.0)
    assert float(wrap_degrees(-180.0)) == 180.0
    x = np.linspace(-20, 20, 4001)
    w = wrap_angle(x)
    assert np.all((w > -np.pi) & (w <= np.pi))
    assert np.allclose(np.sin(w), np.sin(x)) and np.allclose(np.cos(w), np.cos(x))
