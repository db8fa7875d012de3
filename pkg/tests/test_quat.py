import numpy as np
import pytest

from quatpf.quat import (
    SingularError,
    attitude_matrix,
    compose_global,
    error_from_mrp,
    error_quaternion,
    mrp_from_error,
    omega_transition,
    propagate,
    quat_angle_between,
    quat_from_axis_angle,
    quat_identity,
    quat_inverse,
    quat_multiply,
    quat_random,
    rate_matrix,
)

from oracles import dcm_from_quat, kinematics_matrix, rk4_transition, shuster_product

RNG = np.random.default_rng(20240811)


def test_identity_multiply():
    q = quat_random(RNG, 50)
    np.testing.assert_allclose(quat_multiply(quat_identity(), q), q, atol=1e-15)
    np.testing.assert_allclose(quat_multiply(q, quat_identity()), q, atol=1e-15)


def test_multiply_inverse_gives_identity():
    q = quat_random(RNG, 200)
    prod = quat_multiply(q, quat_inverse(q))
    np.testing.assert_allclose(np.abs(prod[:, 3]), 1.0, atol=1e-14)
    np.testing.assert_allclose(prod[:, :3], 0.0, atol=1e-14)


def test_multiply_two_quarter_turns():
    # two 90 deg z-rotations compose to the 180 deg z-rotation, and the
    # attitude matrices multiply in the same order
    qz90 = quat_from_axis_angle([0, 0, 1], np.pi / 2)
    qz180 = quat_multiply(qz90, qz90)
    np.testing.assert_allclose(qz180, [0, 0, 1, 0], atol=1e-15)
    np.testing.assert_allclose(
        attitude_matrix(qz180),
        attitude_matrix(qz90) @ attitude_matrix(qz90),
        atol=1e-12,
    )


def test_multiply_matches_reference_product():
    for _ in range(100):
        a, b = quat_random(RNG), quat_random(RNG)
        np.testing.assert_allclose(quat_multiply(a, b), shuster_product(a, b), atol=1e-14)


def test_multiply_associative():
    a, b, c = (quat_random(RNG, 2000) for _ in range(3))
    left = quat_multiply(quat_multiply(a, b), c)
    right = quat_multiply(a, quat_multiply(b, c))
    np.testing.assert_allclose(left, right, atol=1e-12)


def test_attitude_homomorphism():
    a, b = quat_random(RNG, 2000), quat_random(RNG, 2000)
    np.testing.assert_allclose(
        attitude_matrix(quat_multiply(a, b)),
        attitude_matrix(a) @ attitude_matrix(b),
        atol=1e-12,
    )


def test_inverse_is_conjugate():
    np.testing.assert_array_equal(quat_inverse(quat_identity()), quat_identity())
    s = 1.0 / np.sqrt(2.0)
    np.testing.assert_allclose(
        quat_inverse([s, 0, 0, s]), [-s, 0, 0, s], atol=0
    )
    q = quat_random(RNG, 100)
    np.testing.assert_array_equal(quat_inverse(quat_inverse(q)), q)


def test_attitude_matrix_basics():
    np.testing.assert_allclose(attitude_matrix(quat_identity()), np.eye(3), atol=0)
    q = quat_random(RNG, 500)
    a = attitude_matrix(q)
    np.testing.assert_allclose(a @ np.swapaxes(a, -1, -2), np.broadcast_to(np.eye(3), a.shape), atol=1e-12)
    np.testing.assert_allclose(np.linalg.det(a), 1.0, atol=1e-12)
    np.testing.assert_array_equal(attitude_matrix(-q), a)


def test_attitude_matrix_frame_convention():
    # +90 deg body rotation about z expresses the reference x axis as -y in
    # body coordinates
    q = quat_from_axis_angle([0, 0, 1], np.pi / 2)
    np.testing.assert_allclose(attitude_matrix(q) @ [1, 0, 0], [0, -1, 0], atol=1e-15)


def test_attitude_matrix_matches_reference():
    for _ in range(50):
        q = quat_random(RNG)
        np.testing.assert_allclose(attitude_matrix(q), dcm_from_quat(q), atol=1e-15)


def test_omega_transition_zero_rate():
    np.testing.assert_array_equal(omega_transition(np.zeros(3), 0.5), np.eye(4))


def test_omega_transition_orthogonal():
    omega = RNG.normal(size=(300, 3))
    dts = RNG.uniform(1e-3, 2.0)
    m = omega_transition(omega, dts)
    np.testing.assert_allclose(
        np.swapaxes(m, -1, -2) @ m, np.broadcast_to(np.eye(4), m.shape), atol=1e-14
    )


def test_omega_transition_rejects_bad_dt():
    with pytest.raises(ValueError):
        omega_transition(np.zeros(3), 0.0)


def test_omega_transition_half_turn_vs_rk4():
    # pi rad/s about z for 1 s starting at identity: 180 deg z-rotation
    omega = np.array([0.0, 0.0, np.pi])
    q = omega_transition(omega, 1.0) @ quat_identity()
    assert quat_angle_between(q, [0, 0, 1, 0]) < 1e-12
    q_rk4 = rk4_transition(omega, 1.0, 100_000) @ quat_identity()
    np.testing.assert_allclose(q, q_rk4, atol=1e-8)


def test_propagate_matches_transition_matrix():
    omega = RNG.normal(size=(200, 3))
    q = quat_random(RNG, 200)
    dt = 0.25
    via_matrix = np.einsum("nij,nj->ni", omega_transition(omega, dt), q)
    np.testing.assert_allclose(propagate(q, omega, dt), via_matrix, atol=1e-13)


def test_propagate_small_rate_series_limit():
    q = quat_random(RNG, 20)
    omega = 1e-12 * RNG.normal(size=(20, 3))
    out = propagate(q, omega, 1.0)
    np.testing.assert_allclose(out, q, atol=1e-11)
    assert np.all(np.isfinite(out))


def test_propagation_vs_rk4_random_rates():
    for _ in range(20):
        omega = RNG.normal(size=3)
        dt = RNG.uniform(0.01, np.pi / max(np.linalg.norm(omega), 1e-9))
        q0 = quat_random(RNG)
        q = propagate(q0, omega, dt)
        q_rk4 = rk4_transition(omega, dt, 2000) @ q0
        np.testing.assert_allclose(q, q_rk4 / np.linalg.norm(q_rk4), atol=1e-8)


def test_rate_matrix_matches_reference():
    omega = RNG.normal(size=3)
    np.testing.assert_array_equal(rate_matrix(omega), kinematics_matrix(omega))


def test_error_quaternion_identity_cases():
    q = quat_random(RNG, 50)
    dq = error_quaternion(q, q)
    np.testing.assert_allclose(dq[:, :3], 0.0, atol=1e-14)
    np.testing.assert_allclose(dq[:, 3], 1.0, atol=1e-14)

    dq = error_quaternion(q, quat_identity())
    flip = np.where(q[:, 3:] < 0, -1.0, 1.0)
    np.testing.assert_allclose(dq, q * flip, atol=1e-15)


def test_error_compose_round_trip():
    q = quat_random(RNG, 5000)
    f = quat_random(RNG, 5000)
    back = compose_global(error_quaternion(q, f), f)
    sign = np.sign(np.sum(back * q, axis=1, keepdims=True))
    np.testing.assert_allclose(back * sign, q, atol=1e-12)


def test_compose_global_norm_closure():
    dq = quat_random(RNG, 1000)
    f = quat_random(RNG, 1000)
    out = compose_global(dq, f)
    np.testing.assert_allclose(np.linalg.norm(out, axis=1), 1.0, atol=1e-12)


def test_error_quaternion_canonical_sign():
    q = quat_random(RNG, 1000)
    f = quat_random(RNG, 1000)
    assert np.all(error_quaternion(q, f)[:, 3] >= 0.0)


def test_mrp_identity_and_60deg():
    np.testing.assert_array_equal(mrp_from_error(quat_identity(), 1.0, 1.0), np.zeros(3))
    dq = quat_from_axis_angle([1, 0, 0], np.pi / 3)
    # rho/(1+q4) for a 60 deg rotation is tan(15 deg) on the axis
    np.testing.assert_allclose(
        mrp_from_error(dq, 1.0, 1.0), [np.tan(np.pi / 12), 0.0, 0.0], atol=1e-15
    )
    np.testing.assert_allclose(
        error_from_mrp([np.tan(np.pi / 12), 0.0, 0.0], 1.0, 1.0), dq, atol=1e-15
    )


@pytest.mark.parametrize("a,f", [(1.0, 1.0), (0.0, 1.0), (1.0, 4.0), (0.5, 2.0)])
def test_mrp_round_trip(a, f):
    dq = error_quaternion(quat_random(RNG, 3000), quat_random(RNG, 3000))
    dq = dq[dq[:, 3] > 1e-3]  # keep clear of the a=0 singularity at 180 deg
    p = mrp_from_error(dq, a, f)
    np.testing.assert_allclose(error_from_mrp(p, a, f), dq, atol=1e-12)

    p_small = f * RNG.uniform(-0.3, 0.3, size=(3000, 3))
    np.testing.assert_allclose(
        mrp_from_error(error_from_mrp(p_small, a, f), a, f), p_small, atol=1e-12
    )


def test_mrp_small_angle_slope():
    # rotation angle of error_from_mrp(p) grows as 2(a+1)/f * |p| to first order
    for a, f in [(1.0, 1.0), (1.0, 4.0), (0.25, 2.0)]:
        direction = RNG.standard_normal(3)
        direction /= np.linalg.norm(direction)
        eps = 1e-6
        dq = error_from_mrp(eps * direction, a, f)
        angle = 2.0 * np.arctan2(np.linalg.norm(dq[:3]), dq[3])
        np.testing.assert_allclose(angle / eps, 2.0 * (a + 1.0) / f, rtol=1e-9)


def test_mrp_singularity_raises():
    half_turn = quat_from_axis_angle([0, 1, 0], np.pi)  # q4 = 0
    with pytest.raises(SingularError):
        mrp_from_error(half_turn, 0.0, 1.0)


def test_error_from_mrp_zero():
    np.testing.assert_array_equal(error_from_mrp(np.zeros(3)), quat_identity())


def test_angle_between_sign_invariant_and_bounded():
    a = quat_random(RNG, 200)
    b = quat_random(RNG, 200)
    ang = quat_angle_between(a, b)
    assert np.all((ang >= 0.0) & (ang <= np.pi))
    np.testing.assert_array_equal(quat_angle_between(-a, b), ang)
    np.testing.assert_array_equal(quat_angle_between(a, -b), ang)
    # resolves tiny separations that the plain acos form cannot
    tiny = quat_multiply(quat_from_axis_angle([0, 0, 1], 1e-11), a)
    np.testing.assert_allclose(quat_angle_between(tiny, a), 1e-11, rtol=1e-4)


def test_sign_flip_invariance_of_rotation_outputs():
    q = quat_random(RNG, 300)
    np.testing.assert_array_equal(attitude_matrix(-q), attitude_matrix(q))
    f = quat_random(RNG, 300)
    np.testing.assert_array_equal(quat_multiply(-q, f), -quat_multiply(q, f))
    np.testing.assert_array_equal(error_quaternion(-q, f), error_quaternion(q, f))
