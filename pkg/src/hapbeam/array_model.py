"""Planar array model: steering, delay-aware analog schedules, pointing-loss
certificates.

The panel is an M_x-by-M_y uniform planar array on the platform body frame
x-y plane.  All angles here are body-frame steering angles (theta, phi) as
produced by :func:`hapbeam.geometry.los_to_body_angles`.  Beam detuning is
measured per axis in spacing-scaled direction-cosine units
xi = (d_axis / wavelength) * delta(direction cosine), the natural argument
of the separable array factor.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, OutOfModelError, UncoveredSlotError
from .geometry import EulerZYX, WorldGeometry, euler_to_rotation, los_to_body_angles, rotation_exp

_FD_STEP = 1e-5  # rad, central-difference step for the detuning Jacobian


@dataclass(frozen=True)
class ArrayConfig:
    """Uniform planar array: element counts, spacings, carrier wavelength,
    number of RF chains."""

    m_x: int
    m_y: int
    d_x: float  # meters
    d_y: float  # meters
    wavelength: float  # meters
    n_rf: int

    def __post_init__(self):
        if self.m_x < 1 or self.m_y < 1:
            raise ConfigError(f"element counts must be >= 1, got {self.m_x}x{self.m_y}")
        if self.d_x <= 0 or self.d_y <= 0:
            raise ConfigError("element spacings must be positive")
        if self.wavelength <= 0:
            raise ConfigError("wavelength must be positive")
        if self.n_rf < 1:
            raise ConfigError(f"need at least one RF chain, got {self.n_rf}")

    @property
    def num_elements(self) -> int:
        return self.m_x * self.m_y


def steering_vector(cfg: ArrayConfig, theta: float, phi: float) -> np.ndarray:
    """Phase-only steering vector, shape (m_x * m_y,), every entry of
    magnitude 1/sqrt(M).

    Element (m, n) carries phase (2 pi / wavelength) *
    (m * d_x * sin(theta) cos(phi) + n * d_y * sin(theta) sin(phi));
    the flat index runs over m (x axis) fastest.
    """
    sx = np.sin(theta) * np.cos(phi)
    sy = np.sin(theta) * np.sin(phi)
    k0 = 2.0 * np.pi / cfg.wavelength
    px = k0 * cfg.d_x * sx * np.arange(cfg.m_x)
    py = k0 * cfg.d_y * sy * np.arange(cfg.m_y)
    phase = py[:, None] + px[None, :]  # (m_y, m_x), m fastest when raveled
    return np.exp(1j * phase).ravel() / np.sqrt(cfg.num_elements)


def analog_beamformer_at(
    cfg: ArrayConfig, geom: WorldGeometry, attitude: EulerZYX
) -> np.ndarray:
    """Stack per-user steering vectors at one attitude into A, shape (M, N_RF).

    Column k points at user k's line of sight as seen from the body frame
    under ``attitude``.  One RF chain per user is required.
    """
    if geom.num_users != cfg.n_rf:
        raise ConfigError(
            f"analog stage assigns one chain per user: K={geom.num_users} "
            f"but N_RF={cfg.n_rf}"
        )
    R = euler_to_rotation(attitude)
    A = np.empty((cfg.num_elements, geom.num_users), dtype=complex)
    for k in range(geom.num_users):
        theta, phi = los_to_body_angles(geom.los_unit[k], R)
        A[:, k] = steering_vector(cfg, theta, phi)
    return A


@dataclass(frozen=True)
class AnalogBeamformer:
    """One scheduled analog beamformer: matrix, the slot it applies to, and
    the decision slot it was issued from."""

    matrix: np.ndarray  # (M, N_RF) complex, constant modulus 1/sqrt(M)
    slot: int
    origin: int


def build_analog_sequence(
    cfg: ArrayConfig, geom: WorldGeometry, forecast, d: int
) -> list[AnalogBeamformer]:
    """Analog beamformers for every target slot of one forecast origin.

    ``forecast`` must expose ``origin`` (decision slot t) and ``angles``
    (H_pred rows of forecast yaw/pitch/roll, row h-1 for horizon h).  With
    decision delay d, the target slots are t + h for h in {d+1, .., H_pred};
    slots inside the delay window cannot be actuated and are skipped.
    """
    angles = np.asarray(forecast.angles, dtype=float)
    h_pred = angles.shape[0]
    if not 0 <= d < h_pred:
        raise ConfigError(f"decision delay d={d} must satisfy 0 <= d < H_pred={h_pred}")
    out = []
    for h in range(d + 1, h_pred + 1):
        att = EulerZYX.from_array(angles[h - 1])
        out.append(
            AnalogBeamformer(
                matrix=analog_beamformer_at(cfg, geom, att),
                slot=forecast.origin + h,
                origin=forecast.origin,
            )
        )
    return out


def select_applied_beamformer(
    schedules: list[AnalogBeamformer], slot: int
) -> AnalogBeamformer:
    """Latest-cover rule: among schedules covering ``slot``, the one issued
    from the most recent origin wins."""
    best = None
    for s in schedules:
        if s.slot == slot and (best is None or s.origin > best.origin):
            best = s
    if best is None:
        raise UncoveredSlotError(f"no scheduled beamformer covers slot {slot}")
    return best


# ---------------------------------------------------------------------------
# Detuning and gain-loss models
# ---------------------------------------------------------------------------


def taper_constants(cfg: ArrayConfig) -> tuple[float, float]:
    """Quadratic loss curvatures (c_x, c_y) = pi^2 (M_axis^2 - 1) / 3."""
    cx = np.pi**2 * (cfg.m_x**2 - 1) / 3.0
    cy = np.pi**2 * (cfg.m_y**2 - 1) / 3.0
    return cx, cy


def detuning(
    cfg: ArrayConfig,
    angles_hat: tuple[float, float],
    delta_omega,
    e_k,
    a_hat: EulerZYX,
) -> np.ndarray:
    """Per-axis beam detuning xi when the attitude is perturbed.

    angles_hat are the steering angles the beam was built for; the true
    attitude is R_hat @ exp(hat(delta_omega)).  Returns
    (d_x/wavelength * delta s_x, d_y/wavelength * delta s_y) where
    (s_x, s_y) = (sin theta cos phi, sin theta sin phi).
    """
    th, ph = angles_hat
    sx = np.sin(th) * np.cos(ph)
    sy = np.sin(th) * np.sin(ph)
    R_true = euler_to_rotation(a_hat) @ rotation_exp(np.asarray(delta_omega, dtype=float))
    th2, ph2 = los_to_body_angles(e_k, R_true)
    sx2 = np.sin(th2) * np.cos(ph2)
    sy2 = np.sin(th2) * np.sin(ph2)
    return np.array(
        [cfg.d_x / cfg.wavelength * (sx2 - sx), cfg.d_y / cfg.wavelength * (sy2 - sy)]
    )


def _fd_rotations() -> np.ndarray:
    """Fixed small rotations exp(-+ step * e_i), stacked (6, 3, 3):
    rows 0..2 are the +step perturbations of axes x, y, z, rows 3..5 the
    -step ones.  The perturbed body direction is exp(-hat(dw)) @ u."""
    mats = []
    for sign in (+1.0, -1.0):
        for ax in range(3):
            v = np.zeros(3)
            v[ax] = sign * _FD_STEP
            mats.append(rotation_exp(-v))
    return np.stack(mats)


_FD_ROTS = _fd_rotations()


def _jacobian_from_dirs(cfg: ArrayConfig, u: np.ndarray) -> np.ndarray:
    """Detuning Jacobians d(xi)/d(delta_omega), central differences.

    u: (..., 3) body-frame unit directions; returns (..., 2, 3).
    """
    u = np.asarray(u, dtype=float)
    # (..., 6, 3): each perturbed direction exp(-hat(+-step e_i)) @ u
    pert = np.einsum("pij,...j->...pi", _FD_ROTS, u)
    diff = (pert[..., 0:3, 0:2] - pert[..., 3:6, 0:2]) / (2.0 * _FD_STEP)
    scale = np.array([cfg.d_x, cfg.d_y]) / cfg.wavelength
    # diff axes: (..., axis i, component {x,y}) -> J[..., comp, i]
    return np.swapaxes(diff, -1, -2) * scale[..., :, None]


def jacobian(cfg: ArrayConfig, e_k, a_hat: EulerZYX) -> np.ndarray:
    """2x3 sensitivity of detuning to the attitude residual, at residual 0."""
    R = euler_to_rotation(a_hat)
    u = R.T @ np.asarray(e_k, dtype=float)
    return _jacobian_from_dirs(cfg, u)


def _angles_to_dir(theta, phi) -> np.ndarray:
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    st = np.sin(theta)
    return np.stack(
        [st * np.cos(phi), st * np.sin(phi), np.cos(theta) * np.ones_like(phi)],
        axis=-1,
    )


def detune_q_matrix(cfg: ArrayConfig, theta: float, phi: float) -> np.ndarray:
    """Q = J^T diag(c_x, c_y) J at one steering operating point: the
    quadratic form taking an attitude residual to the quadratic gain loss."""
    J = _jacobian_from_dirs(cfg, _angles_to_dir(theta, phi))
    cx, cy = taper_constants(cfg)
    return J.T @ (np.array([cx, cy])[:, None] * J)


def gain_loss_quadratic(cfg: ArrayConfig, xi) -> float:
    """Small-detuning beamforming gain loss c_x xi_x^2 + c_y xi_y^2."""
    cx, cy = taper_constants(cfg)
    xi = np.asarray(xi, dtype=float)
    return float(cx * xi[..., 0] ** 2 + cy * xi[..., 1] ** 2)


def exact_gain_loss(cfg: ArrayConfig, xi) -> float:
    """Exact separable array-factor power loss 1 - (AF_x AF_y)^2 with
    AF(xi) = sin(M pi xi) / (M sin(pi xi)).

    Valid inside the first null per axis: |xi_axis| < 1/M_axis.
    """
    xi = np.asarray(xi, dtype=float)
    if np.any(np.abs(xi[..., 0]) >= 1.0 / cfg.m_x) or np.any(
        np.abs(xi[..., 1]) >= 1.0 / cfg.m_y
    ):
        raise OutOfModelError(
            "detuning beyond the first array-factor null; the separable "
            "main-lobe model does not apply"
        )
    af_x = np.sinc(cfg.m_x * xi[..., 0]) / np.sinc(xi[..., 0])
    af_y = np.sinc(cfg.m_y * xi[..., 1]) / np.sinc(xi[..., 1])
    return 1.0 - (af_x * af_y) ** 2


# ---------------------------------------------------------------------------
# Certificates
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AngleBox:
    """Axis-aligned steering-angle box in (theta, phi)."""

    theta_lo: float
    theta_hi: float
    phi_lo: float
    phi_hi: float

    def __post_init__(self):
        if self.theta_lo > self.theta_hi or self.phi_lo > self.phi_hi:
            raise ConfigError("angle box must have lo <= hi per axis")

    @classmethod
    def around(cls, theta: float, phi: float, half_width: float) -> "AngleBox":
        return cls(theta - half_width, theta + half_width, phi - half_width, phi + half_width)


def sym3_eigmax(Q: np.ndarray) -> np.ndarray:
    """Largest eigenvalue of symmetric 3x3 matrices, batched (..., 3, 3).

    Closed-form trigonometric solve of the characteristic polynomial; falls
    back to a QR eigensolver on any entry where the closed form degrades.
    """
    Q = np.asarray(Q, dtype=float)
    a, b, c = Q[..., 0, 0], Q[..., 1, 1], Q[..., 2, 2]
    d, e, f = Q[..., 0, 1], Q[..., 0, 2], Q[..., 1, 2]
    p1 = d**2 + e**2 + f**2
    q = (a + b + c) / 3.0
    p2 = (a - q) ** 2 + (b - q) ** 2 + (c - q) ** 2 + 2.0 * p1
    with np.errstate(divide="ignore", invalid="ignore"):
        p = np.sqrt(p2 / 6.0)
        B = (Q - q[..., None, None] * np.eye(3)) / p[..., None, None]
        detB = (
            B[..., 0, 0] * (B[..., 1, 1] * B[..., 2, 2] - B[..., 1, 2] * B[..., 2, 1])
            - B[..., 0, 1] * (B[..., 1, 0] * B[..., 2, 2] - B[..., 1, 2] * B[..., 2, 0])
            + B[..., 0, 2] * (B[..., 1, 0] * B[..., 2, 1] - B[..., 1, 1] * B[..., 2, 0])
        )
        r = np.clip(detB / 2.0, -1.0, 1.0)
        lam = q + 2.0 * p * np.cos(np.arccos(r) / 3.0)
    # Near-spherical matrices: p ~ 0 means Q ~ q I.
    lam = np.where(p2 <= 1e-30 * np.maximum(q * q, 1e-300), q, lam)
    bad = ~np.isfinite(lam)
    if np.any(bad):
        lam = np.array(lam, copy=True)
        lam[bad] = np.linalg.eigvalsh(Q[bad])[..., -1]
    return lam


def spectral_bound_l2(cfg: ArrayConfig, box: AngleBox, grid: int = 33) -> float:
    """Worst-case curvature L^2 = max over the steering box of lambda_max(Q).

    Certifies, via the Rayleigh quotient, that the quadratic gain loss obeys
    dw^T Q dw <= L^2 ||dw||^2 for every operating point in the box.
    """
    if grid < 2:
        raise ConfigError(f"grid must have at least 2 points per axis, got {grid}")
    thetas = np.linspace(box.theta_lo, box.theta_hi, grid)
    phis = np.linspace(box.phi_lo, box.phi_hi, grid)
    tt, pp = np.meshgrid(thetas, phis, indexing="ij")
    U = _angles_to_dir(tt.ravel(), pp.ravel())
    J = _jacobian_from_dirs(cfg, U)  # (G, 2, 3)
    cx, cy = taper_constants(cfg)
    Q = np.einsum("gai,a,gaj->gij", J, np.array([cx, cy]), J)
    return float(np.max(sym3_eigmax(Q)))


def certify_users(l2, delta_omega: float, epsilon: float) -> np.ndarray:
    """Per-user worst-case certificate: L_k^2 * delta_omega^2 <= epsilon."""
    l2 = np.asarray(l2, dtype=float)
    if delta_omega < 0 or epsilon <= 0:
        raise ConfigError("need delta_omega >= 0 and epsilon > 0")
    return l2 * delta_omega**2 <= epsilon


def moment_certificate(
    Q: np.ndarray, mu_omega, sigma_omega, epsilon: float
) -> tuple[bool, float]:
    """Expected-loss certificate mu^T Q mu + tr(Q Sigma) <= epsilon.

    Returns (decision, expected-loss value).  Sigma must be symmetric PSD.
    """
    Q = np.asarray(Q, dtype=float)
    mu = np.asarray(mu_omega, dtype=float).reshape(3)
    S = np.asarray(sigma_omega, dtype=float)
    if S.shape != (3, 3):
        raise ValueError(f"covariance must be 3x3, got {S.shape}")
    if np.max(np.abs(S - S.T)) > 1e-9 * max(1.0, float(np.max(np.abs(S)))):
        raise ValueError("covariance must be symmetric")
    w = np.linalg.eigvalsh(S)
    if w[0] < -1e-12 * max(1.0, w[-1]):
        raise ValueError(f"covariance must be PSD; min eigenvalue {w[0]:.3g}")
    value = float(mu @ Q @ mu + np.trace(Q @ S))
    return value <= epsilon, value


def sigma_xi_sq(J: np.ndarray, sigma_omega: np.ndarray) -> float:
    """Variance proxy of the detuning: tr(J Sigma J^T)."""
    return float(np.trace(J @ np.asarray(sigma_omega, dtype=float) @ J.T))


@dataclass(frozen=True)
class PointingCertificate:
    """Calibrated pointing-robustness certificate for one scenario."""

    l2: np.ndarray  # (K,) worst-case curvature per user
    delta_omega: float  # calibrated residual-norm radius, rad
    epsilon: float  # gain-loss tolerance
    rho: float  # miscoverage level used for delta_omega
    rho_s: float  # steering-set miscoverage (pass-through, 0 = fixed boxes)
    certified: np.ndarray  # (K,) bool
    boxes: tuple  # per-user AngleBox
