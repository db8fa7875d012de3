"""How linear quaternion averaging breaks, and how the eigenvector average fixes it.

A unit quaternion and its negation encode the same rotation, so any weighted
*linear* combination of quaternion particles can interfere destructively and
leave the unit sphere. The moment-matrix average never does: it maximizes
q^T M q over the sphere, and M is built from outer products that cannot see
the sign of a particle.

Run:  python3 demos/01_averaging_breakdown.py
"""

import numpy as np

from quatpf.averaging import build_moment_matrix, mmse_average, naive_average
from quatpf.quat import quat_from_axis_angle, quat_identity, quat_multiply, quat_random

rng = np.random.default_rng(42)

print("=" * 72)
print("1. Antipodal pair: the same rotation twice, written with opposite signs")
print("=" * 72)
q = quat_random(rng)
pair = np.stack([q, -q])
w = np.array([0.5, 0.5])
naive = naive_average(pair, w)
avg = mmse_average(pair, w)
print(f"   particle           : {np.round(q, 4)}")
print(f"   naive average      : {naive}   norm = {np.linalg.norm(naive):.3e}")
print(f"   eigenvector average: {np.round(avg, 4)}   norm = {np.linalg.norm(avg):.15f}")
print(f"   overlap |<avg, q>| = {abs(avg @ q):.15f}")

print()
print("=" * 72)
print("2. Disagreeing particles: the naive norm shrinks with the spread")
print("=" * 72)
print(f"   {'spread (deg)':>12} {'naive norm':>12} {'mmse norm':>12}")
for spread_deg in [1, 10, 45, 90, 150]:
    angles = np.radians(spread_deg) * rng.uniform(-1, 1, 50)
    quats = np.stack([quat_from_axis_angle([0, 0, 1], a) for a in angles])
    w = np.full(50, 0.02)
    print(
        f"   {spread_deg:>12} "
        f"{np.linalg.norm(naive_average(quats, w)):>12.6f} "
        f"{np.linalg.norm(mmse_average(quats, w)):>12.6f}"
    )

print()
print("=" * 72)
print("3. Sign flips change nothing: M is built from outer products")
print("=" * 72)
quats = np.stack([quat_multiply(quat_from_axis_angle(rng.standard_normal(3), 0.2), q) for _ in range(20)])
w = rng.dirichlet(np.ones(20))
flipped = quats.copy()
flipped[::3] *= -1.0
m_a = build_moment_matrix(quats, w)
m_b = build_moment_matrix(flipped, w)
print(f"   moment matrices bit-identical after flipping a third of the signs: "
      f"{np.array_equal(m_a, m_b)}")
print(f"   averages identical: "
      f"{np.array_equal(mmse_average(quats, w), mmse_average(flipped, w))}")

print()
print("=" * 72)
print("4. The average is a true maximizer of q^T M q on the unit sphere")
print("=" * 72)
avg = mmse_average(quats, w)
best = avg @ m_a @ avg
probes = quat_random(rng, 100_000)
vals = np.sum((probes @ m_a) * probes, axis=1)
print(f"   maximizer value : {best:.12f}")
print(f"   best of 100,000 random probes: {vals.max():.12f}")
print(f"   midpoint check  : identity + 90 deg z average -> "
      f"{np.round(mmse_average(np.stack([quat_identity(), quat_from_axis_angle([0,0,1], np.pi/2)]), np.array([0.5,0.5])), 6)}")
print(f"   the 45 deg z-rotation is {np.round(quat_from_axis_angle([0,0,1], np.pi/4), 6)}")
