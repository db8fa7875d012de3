"""A tour of the attitude algebra and its conventions.

Quaternions are scalar-last; the product composes successive rotations in the
same order as attitude matrices; the local error state is a generalized
Rodrigues parameter vector with selectable (a, f) scaling.

Run:  python3 demos/02_attitude_algebra.py
"""

import numpy as np

from quatpf.quat import (
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
    quat_multiply,
)

np.set_printoptions(precision=6, suppress=True)

print("composition order matches attitude matrices")
a = quat_from_axis_angle([0, 0, 1], np.radians(30))
b = quat_from_axis_angle([1, 0, 0], np.radians(45))
ab = quat_multiply(a, b)
print("  A(a (x) b) - A(a) A(b), max |entry| =",
      np.max(np.abs(attitude_matrix(ab) - attitude_matrix(a) @ attitude_matrix(b))))

print("\nconstant-rate propagation is the closed-form transition matrix")
omega = np.array([0.0, 0.0, np.pi])  # half a turn per second about z
q1 = omega_transition(omega, 1.0) @ quat_identity()
print("  pi rad/s about z for 1 s from identity ->", q1, "(the 180 deg z-rotation)")
q_steps = quat_identity()
for _ in range(100):
    q_steps = propagate(q_steps, omega, 0.01)
print("  same rotation in 100 sub-steps, angle difference:",
      quat_angle_between(q_steps, q1), "rad")

print("\nlocal error state: generalized Rodrigues parameters")
q_true = quat_from_axis_angle([0.3, -0.5, 0.8], 0.9)
q_est = quat_multiply(quat_from_axis_angle([1, 0, 0], np.radians(60)), q_true)
dq = error_quaternion(q_est, q_true)
for a_par, f_par, label in [(1.0, 1.0, "classic MRP"), (1.0, 4.0, "f = 2(a+1), radians-like")]:
    p = mrp_from_error(dq, a_par, f_par)
    print(f"  60 deg error as {label:24s}: p = {p}, |p| = {np.linalg.norm(p):.6f}")
print("  (tan(60/4 deg) =", np.tan(np.radians(15)), ")")

p = mrp_from_error(dq, 1.0, 1.0)
back = compose_global(error_from_mrp(p, 1.0, 1.0), q_true)
print("  recompose(convert(error)) recovers the estimate to",
      quat_angle_between(back, q_est), "rad")

print("\nnorm after 100,000 chained products (no renormalization pass anywhere)")
acc = quat_identity()
step = quat_from_axis_angle([0.41, -0.29, 0.86], 1e-3)
for _ in range(100_000):
    acc = quat_multiply(step, acc)
print("  |q| - 1 =", np.linalg.norm(acc) - 1.0)
