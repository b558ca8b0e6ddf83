"""Attitude representations: Euler angles, rotation matrices, residuals.

Round-trips a batch of random attitudes, then shows how a small attitude
perturbation is recovered as an axis-angle residual vector, which is the
quantity the calibration stage bounds.
"""

import numpy as np

from hapbeam import (
    EulerZYX,
    euler_to_rotation,
    rotation_exp,
    rotation_log_vee,
    rotation_to_euler,
    wrap_pi,
)

rng = np.random.default_rng(7)

# round trip: euler -> matrix -> euler
worst = 0.0
for _ in range(2000):
    att = EulerZYX(
        rng.uniform(-np.pi, np.pi),
        rng.uniform(-1.4, 1.4),
        rng.uniform(-np.pi, np.pi),
    )
    back = rotation_to_euler(euler_to_rotation(att))
    worst = max(worst, np.max(np.abs(back.as_array() - att.as_array())))
print(f"euler <-> matrix round trip, worst abs error: {worst:.3e} rad")

# residual recovery: perturb a forecast attitude by a known axis-angle
# vector and read it back off the pair of rotations
att_hat = EulerZYX(0.3, -0.1, 0.05)
R_hat = euler_to_rotation(att_hat)
omega_true = np.array([0.01, -0.02, 0.015])
R_true = R_hat @ rotation_exp(omega_true)
omega_rec = rotation_log_vee(R_hat, R_true)
print("injected residual :", omega_true)
print("recovered residual:", omega_rec)
print(f"recovery error    : {np.max(np.abs(omega_rec - omega_true)):.3e} rad")

# yaw lives on a circle; the wrapped difference is what error metrics use
a, b = np.deg2rad(179.0), np.deg2rad(-179.0)
print(f"naive yaw difference  : {np.rad2deg(a - b):8.3f} deg")
print(f"wrapped yaw difference: {np.rad2deg(wrap_pi(a - b)):8.3f} deg")
