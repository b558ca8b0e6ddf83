"""Scenario orchestration for the downlink simulator.

Generates a synthetic platform-attitude process, places ground users,
calibrates the pointing-residual bound on a validation split, then walks
test-slot snapshots: forecast the attitude, build the analog stage for the
selected compensation mode, synthesize the true-attitude channel, solve the
per-slot digital problem, and aggregate.  Snapshot evaluations use
per-snapshot RNG substreams derived from (master seed, snapshot index), so
the map is order-independent and bit-reproducible; this implementation
runs it as an ordered serial loop.
"""

import itertools
import math
import time
from dataclasses import dataclass, field, replace
from functools import partial

import numpy as np

from .array_model import (
    AngleBox,
    ArrayConfig,
    analog_beamformer_at,
    certify_users,
    jacobian,
    sigma_xi_sq,
    spectral_bound_l2,
)
from .calibration import CalibrationReport, calibrate
from .channel import ChannelParams, effective_channel, fspl_gain, synthesize_channel
from .errors import ConfigError, HapbeamError, InvariantError, UncoveredSlotError
from .forecast import (
    AttitudeSeries,
    ForecastErrorReport,
    ForecastRequest,
    forecast_ar,
    forecast_errors,
    forecast_linear_trend,
    forecast_persistence,
    load_forecast_csv,
)
from .geometry import (
    EulerZYX,
    WorldGeometry,
    euler_to_rotation,
    los_to_body_angles,
    rotation_log_vee,
    rotation_to_euler,
)
from .solver import SnapshotProblem, solve_snapshot

CHANNEL_PRESETS = {
    "rician-strong": 10.0,
    "rician-weak": 1.0,
    "pure-los": math.inf,
}
USER_LAYOUTS = ("uniform", "clustered", "edge-biased")
COMPENSATION_MODES = ("none", "reactive", "forecast", "ideal")
FORECASTER_KINDS = ("persistence", "linear", "ar", "external")
ADMISSION_PRIORITIES = ("qos-difficulty", "channel-gain", "random")
OBJECTIVES = ("sum-rate", "ee")

TRAIN_FRAC = 0.7
VAL_FRAC = 0.1


def _check_keys(section: dict, allowed, where: str) -> None:
    unknown = sorted(set(section) - set(allowed))
    if unknown:
        raise ConfigError(f"unknown key(s) in {where}: {', '.join(unknown)}")


def _section(raw: dict, name: str) -> dict:
    value = raw.get(name, {})
    if not isinstance(value, dict):
        raise ConfigError(f"config section {name!r} must be a mapping")
    return value


@dataclass(frozen=True)
class ArraySpec:
    m_x: int = 12
    m_y: int = 12
    spacing_x_wl: float = 0.5  # element pitch in carrier wavelengths
    spacing_y_wl: float = 0.5
    wavelength_m: float = 0.01

    @classmethod
    def from_dict(cls, d: dict) -> "ArraySpec":
        _check_keys(d, cls.__dataclass_fields__, "array")
        return cls(**d)

    def build(self, n_rf: int) -> ArrayConfig:
        return ArrayConfig(
            m_x=int(self.m_x),
            m_y=int(self.m_y),
            d_x=self.spacing_x_wl * self.wavelength_m,
            d_y=self.spacing_y_wl * self.wavelength_m,
            wavelength=self.wavelength_m,
            n_rf=n_rf,
        )


@dataclass(frozen=True)
class PlatformSpec:
    altitude_m: float = 20e3
    x_m: float = 0.0
    y_m: float = 0.0
    mounting_deg: tuple = (0.0, 0.0, 0.0)  # yaw, pitch, roll offset

    @classmethod
    def from_dict(cls, d: dict) -> "PlatformSpec":
        _check_keys(d, cls.__dataclass_fields__, "hap")
        d = dict(d)
        if "mounting_deg" in d:
            m = d["mounting_deg"]
            if not isinstance(m, (list, tuple)) or len(m) != 3:
                raise ConfigError("hap.mounting_deg must be [yaw, pitch, roll]")
            d["mounting_deg"] = tuple(float(v) for v in m)
        return cls(**d)

    @property
    def position(self) -> np.ndarray:
        return np.array([self.x_m, self.y_m, self.altitude_m])

    @property
    def mounting(self) -> np.ndarray:
        return euler_to_rotation(EulerZYX(*np.deg2rad(self.mounting_deg)))


@dataclass(frozen=True)
class UserSpec:
    count: int = 10
    layout: str = "uniform"
    disc_radius_m: float = 20e3

    @classmethod
    def from_dict(cls, d: dict) -> "UserSpec":
        _check_keys(d, cls.__dataclass_fields__, "users")
        spec = cls(**d)
        if spec.layout not in USER_LAYOUTS:
            raise ConfigError(
                f"users.layout must be one of {USER_LAYOUTS}, got {spec.layout!r}"
            )
        if spec.count < 1:
            raise ConfigError("users.count must be >= 1")
        if spec.disc_radius_m <= 0:
            raise ConfigError("users.disc_radius_m must be positive")
        return spec


@dataclass(frozen=True)
class ChannelSpec:
    preset: str = "rician-strong"
    beta_mode: str = "fspl"  # fspl | normalized
    noise_power_w: float = 1e-13
    bandwidth_hz: float = 1.0

    @classmethod
    def from_dict(cls, d: dict) -> "ChannelSpec":
        _check_keys(d, cls.__dataclass_fields__, "channel")
        spec = cls(**d)
        if spec.preset not in CHANNEL_PRESETS:
            raise ConfigError(
                f"channel.preset must be one of {tuple(CHANNEL_PRESETS)}, "
                f"got {spec.preset!r}"
            )
        if spec.beta_mode not in ("fspl", "normalized"):
            raise ConfigError("channel.beta_mode must be 'fspl' or 'normalized'")
        return spec


@dataclass(frozen=True)
class QosSpec:
    r_min: float = 1.6  # per-user rate floor, bit/s per hertz of bandwidth
    p_max_w: float = 10.0
    circuit_power_w: float = 1.0

    @classmethod
    def from_dict(cls, d: dict) -> "QosSpec":
        _check_keys(d, cls.__dataclass_fields__, "qos")
        return cls(**d)


@dataclass(frozen=True)
class HorizonSpec:
    dt_s: float = 0.1
    delay: int = 6  # actuation delay, slots
    h_pred: int = 12
    l_win: int = 192

    @classmethod
    def from_dict(cls, d: dict) -> "HorizonSpec":
        _check_keys(d, cls.__dataclass_fields__, "horizon")
        spec = cls(**d)
        if not 0 <= spec.delay < spec.h_pred:
            raise ConfigError("horizon must satisfy 0 <= delay < h_pred")
        if spec.dt_s <= 0 or spec.l_win < 2:
            raise ConfigError("horizon.dt_s must be positive and l_win >= 2")
        return spec


@dataclass(frozen=True)
class ForecastSpec:
    kind: str = "ar"
    order: int = 24
    path: str = ""  # external replay CSV

    @classmethod
    def from_dict(cls, d: dict) -> "ForecastSpec":
        _check_keys(d, cls.__dataclass_fields__, "forecaster")
        spec = cls(**d)
        if spec.kind not in FORECASTER_KINDS:
            raise ConfigError(
                f"forecaster.kind must be one of {FORECASTER_KINDS}, got {spec.kind!r}"
            )
        if spec.kind == "external" and not spec.path:
            raise ConfigError("forecaster.path required for the external kind")
        return spec


@dataclass(frozen=True)
class AdmissionSpec:
    k_min: int = 8
    priority: str = "qos-difficulty"
    objective: str = "sum-rate"
    n_ref: int = 10

    @classmethod
    def from_dict(cls, d: dict) -> "AdmissionSpec":
        _check_keys(d, cls.__dataclass_fields__, "admission")
        spec = cls(**d)
        if spec.priority not in ADMISSION_PRIORITIES:
            raise ConfigError(
                f"admission.priority must be one of {ADMISSION_PRIORITIES}, "
                f"got {spec.priority!r}"
            )
        if spec.objective not in OBJECTIVES:
            raise ConfigError(f"admission.objective must be one of {OBJECTIVES}")
        return spec


@dataclass(frozen=True)
class CalibrationSpec:
    rho: float = 0.1
    epsilon: float = 0.3  # tolerated worst-case beamforming-gain loss
    box_halfwidth_deg: float = 3.0  # steering box half-width for the curvature bound
    grid: int = 9

    @classmethod
    def from_dict(cls, d: dict) -> "CalibrationSpec":
        _check_keys(d, cls.__dataclass_fields__, "calibration")
        spec = cls(**d)
        if not 0 < spec.rho < 1:
            raise ConfigError("calibration.rho must lie in (0, 1)")
        if spec.epsilon <= 0 or spec.box_halfwidth_deg <= 0:
            raise ConfigError("calibration epsilon and box half-width must be positive")
        return spec


@dataclass(frozen=True)
class SeedSpec:
    attitude: int = 1
    placement: int = 2
    channel: int = 3
    admission: int = 4

    @classmethod
    def from_dict(cls, d: dict) -> "SeedSpec":
        _check_keys(d, cls.__dataclass_fields__, "seeds")
        return cls(**{k: int(v) for k, v in d.items()})


@dataclass(frozen=True)
class ScenarioConfig:
    array: ArraySpec = field(default_factory=ArraySpec)
    hap: PlatformSpec = field(default_factory=PlatformSpec)
    users: UserSpec = field(default_factory=UserSpec)
    channel: ChannelSpec = field(default_factory=ChannelSpec)
    qos: QosSpec = field(default_factory=QosSpec)
    horizon: HorizonSpec = field(default_factory=HorizonSpec)
    forecaster: ForecastSpec = field(default_factory=ForecastSpec)
    compensation: str = "forecast"
    admission: AdmissionSpec = field(default_factory=AdmissionSpec)
    calibration: CalibrationSpec = field(default_factory=CalibrationSpec)
    seeds: SeedSpec = field(default_factory=SeedSpec)
    snapshots: int = 200

    @classmethod
    def from_dict(cls, raw: dict) -> "ScenarioConfig":
        if not isinstance(raw, dict):
            raise ConfigError("scenario config must be a mapping at top level")
        _check_keys(raw, cls.__dataclass_fields__, "scenario config")
        compensation = raw.get("compensation", "forecast")
        if compensation not in COMPENSATION_MODES:
            raise ConfigError(
                f"compensation must be one of {COMPENSATION_MODES}, "
                f"got {compensation!r}"
            )
        snapshots = int(raw.get("snapshots", 200))
        if snapshots < 1:
            raise ConfigError("snapshots must be >= 1")
        return cls(
            array=ArraySpec.from_dict(_section(raw, "array")),
            hap=PlatformSpec.from_dict(_section(raw, "hap")),
            users=UserSpec.from_dict(_section(raw, "users")),
            channel=ChannelSpec.from_dict(_section(raw, "channel")),
            qos=QosSpec.from_dict(_section(raw, "qos")),
            horizon=HorizonSpec.from_dict(_section(raw, "horizon")),
            forecaster=ForecastSpec.from_dict(_section(raw, "forecaster")),
            compensation=compensation,
            admission=AdmissionSpec.from_dict(_section(raw, "admission")),
            calibration=CalibrationSpec.from_dict(_section(raw, "calibration")),
            seeds=SeedSpec.from_dict(_section(raw, "seeds")),
            snapshots=snapshots,
        )


def admission_priority_variant(config: ScenarioConfig, priority: str) -> ScenarioConfig:
    """Same scenario with the admission ranking replaced."""
    if priority not in ADMISSION_PRIORITIES:
        raise ConfigError(f"unknown admission priority {priority!r}")
    return replace(config, admission=replace(config.admission, priority=priority))


def generate_attitude_series(
    seed: int,
    length: int,
    dt: float = 0.1,
    amplitude_scale: float = 1.0,
    noise_scale: float = 1.0,
) -> AttitudeSeries:
    """Synthetic shaking: per axis, 2 or 3 sinusoids (periods 3 to 30 s,
    amplitudes up to 3 deg pitch/roll and 6 deg yaw) plus stationary AR(1)
    noise with coefficient 0.95 and innovation std 0.05 deg.  Bit-identical
    per seed; zero scales give the constant zero series."""
    if length < 1:
        raise ConfigError(f"series length must be >= 1, got {length}")
    rng = np.random.default_rng(seed)
    t = np.arange(length) * dt
    axes = []
    for cap_deg in (6.0, 3.0, 3.0):  # yaw, pitch, roll
        n_sin = int(rng.integers(2, 4))
        periods = rng.uniform(3.0, 30.0, n_sin)
        amps = np.deg2rad(rng.uniform(0.2, 1.0, n_sin) * cap_deg)
        phases = rng.uniform(0.0, 2.0 * np.pi, n_sin)
        x = amplitude_scale * np.sum(
            amps[:, None] * np.sin(2.0 * np.pi * t[None, :] / periods[:, None]
                                   + phases[:, None]),
            axis=0,
        )
        coeff, innov_std = 0.95, np.deg2rad(0.05)
        e0 = rng.standard_normal() * innov_std / np.sqrt(1.0 - coeff**2)
        innov = rng.standard_normal(length) * innov_std
        noise = np.empty(length)
        prev = e0
        for n in range(length):
            prev = coeff * prev + innov[n]
            noise[n] = prev
        axes.append(x + noise_scale * noise)
    return AttitudeSeries.build(dt, np.column_stack(axes))


def place_users(layout: str, count: int, radius: float, seed: int) -> np.ndarray:
    """Ground positions (count, 3) with z = 0, all inside the coverage disc.

    uniform: area-uniform.  clustered: two Gaussian clusters with std
    radius/10 at random interior centers, samples re-drawn until inside the
    disc.  edge-biased: radial density proportional to r^3, so the mean
    radius is 4/5 of the disc radius against 2/3 for uniform.
    """
    if count < 1:
        raise ConfigError(f"need count >= 1, got {count}")
    rng = np.random.default_rng(seed)
    if layout == "uniform":
        r = radius * np.sqrt(rng.random(count))
        phi = rng.uniform(0.0, 2.0 * np.pi, count)
    elif layout == "edge-biased":
        r = radius * rng.random(count) ** 0.25
        phi = rng.uniform(0.0, 2.0 * np.pi, count)
    elif layout == "clustered":
        cr = 0.8 * radius * np.sqrt(rng.random(2))
        cphi = rng.uniform(0.0, 2.0 * np.pi, 2)
        centers = np.column_stack([cr * np.cos(cphi), cr * np.sin(cphi)])
        std = radius / 10.0
        pts = np.empty((count, 2))
        for k in range(count):
            c = centers[int(rng.integers(2))]
            while True:
                p = c + rng.standard_normal(2) * std
                if np.hypot(*p) <= radius:
                    pts[k] = p
                    break
        return np.column_stack([pts, np.zeros(count)])
    else:
        raise ConfigError(f"unknown user layout {layout!r}")
    return np.column_stack([r * np.cos(phi), r * np.sin(phi), np.zeros(count)])


def _compose(mounting: np.ndarray, angles: np.ndarray) -> EulerZYX:
    R = euler_to_rotation(EulerZYX(*angles)) @ mounting
    return rotation_to_euler(R)


def compensation_attitude(
    mode: str,
    series: AttitudeSeries,
    forecasts: dict,
    slot: int,
    delay: int,
) -> EulerZYX:
    """Attitude estimate the analog stage is built from at slot `slot`.

    none: fixed level nominal.  reactive: newest truth whose processing
    completes in time, slot - delay - 1.  forecast: the prediction for
    `slot` issued at that same origin.  ideal: truth at `slot`.
    """
    if mode == "none":
        return EulerZYX.level()
    if mode == "ideal":
        return EulerZYX(*series.samples[slot])
    origin = slot - delay - 1
    if mode == "reactive":
        if origin < 0:
            raise UncoveredSlotError(f"slot {slot} has no actuated truth sample")
        return EulerZYX(*series.samples[origin])
    if mode == "forecast":
        out = forecasts.get(origin)
        if out is None:
            raise UncoveredSlotError(
                f"no forecast issued at origin {origin} covers slot {slot}"
            )
        return EulerZYX(*out.angles[slot - origin - 1])
    raise ConfigError(f"unknown compensation mode {mode!r}")


def _forecaster_fn(spec: ForecastSpec):
    if spec.kind == "persistence":
        return forecast_persistence
    if spec.kind == "linear":
        return forecast_linear_trend
    if spec.kind == "ar":
        return partial(forecast_ar, order=spec.order)
    raise ConfigError(f"forecaster kind {spec.kind!r} has no local model")


def required_series_length(config: ScenarioConfig) -> int:
    """Shortest series whose 70/10/20 split holds the calibration windows,
    the warmup history, and every evaluation snapshot."""
    hz = config.horizon
    need_test = config.snapshots + hz.delay + hz.h_pred + 2
    need_train = int(np.ceil((hz.l_win + hz.h_pred + 2) / TRAIN_FRAC)) + 10
    need_val = int(np.ceil((hz.h_pred + 6) / VAL_FRAC))
    return max(int(np.ceil(need_test / (1.0 - TRAIN_FRAC - VAL_FRAC))),
               need_train, need_val)


@dataclass(frozen=True)
class RunResult:
    """Per-snapshot table, aggregates, and the calibration evidence."""

    config: ScenarioConfig
    snapshots: dict  # column name -> array
    aggregates: dict  # scalar summary statistics
    calibration: CalibrationReport
    forecast_report: ForecastErrorReport
    eval_slots: np.ndarray


_PCTL_COLUMNS = ("sum_rate", "power", "max_pointing_err_deg", "solve_time_s")
_MEAN_COLUMNS = (
    "QAR",
    "sum_rate",
    "ee",
    "power",
    "feasible",
    "max_pointing_err_deg",
    "solve_time_s",
)


def _aggregate(columns: dict) -> dict:
    agg = {"n_snapshots": float(len(columns["snapshot"]))}
    if len(columns["snapshot"]) == 0:
        agg["empty"] = 1.0
        return agg
    agg["empty"] = 0.0
    for name in _MEAN_COLUMNS:
        agg[f"mean_{name}"] = float(np.mean(columns[name]))
    for name in _PCTL_COLUMNS:
        agg[f"p95_{name}"] = float(np.percentile(columns[name], 95))
        agg[f"p99_{name}"] = float(np.percentile(columns[name], 99))
    return agg


def run_experiment(config: ScenarioConfig) -> RunResult:
    """Full protocol: synthesize, split 70/10/20, calibrate on validation,
    evaluate test snapshots, aggregate."""
    hz = config.horizon
    length = required_series_length(config)
    series = generate_attitude_series(config.seeds.attitude, length, hz.dt_s)
    t_train_end = int(TRAIN_FRAC * length)
    t_val_end = int((TRAIN_FRAC + VAL_FRAC) * length)

    positions = place_users(
        config.users.layout, config.users.count, config.users.disc_radius_m,
        config.seeds.placement,
    )
    geom = WorldGeometry.build(config.hap.position, positions)
    K = config.users.count
    cfg = config.array.build(n_rf=K)
    mounting = config.hap.mounting

    if config.forecaster.kind == "external":
        replay = load_forecast_csv(config.forecaster.path)
        if replay and len(next(iter(replay.values())).angles) < hz.h_pred:
            raise ConfigError(
                "external forecasts are shorter than the configured horizon"
            )
        def issue(origin):
            out = replay.get(origin)
            if out is None:
                raise UncoveredSlotError(f"external replay misses origin {origin}")
            return out
    else:
        fn = _forecaster_fn(config.forecaster)
        def issue(origin):
            return fn(series, ForecastRequest(origin, hz.l_win, hz.h_pred, hz.delay))

    # calibration on the validation split: every origin whose target window
    # closes before the test region begins
    cal_origins = range(t_train_end, t_val_end - hz.h_pred)
    cal_outputs = [issue(t) for t in cal_origins]
    if not cal_outputs:
        raise ConfigError("validation split too short to calibrate")
    report = calibrate(series, cal_outputs, hz.delay, config.calibration.rho)

    first_slot = t_val_end + hz.delay + 1
    slots = np.arange(first_slot, first_slot + config.snapshots)
    if slots[-1] > length - 1:
        raise InvariantError("evaluation slots overran the synthesized series")
    eval_origins = slots - hz.delay - 1
    if max(cal_origins) >= int(eval_origins[0]):
        raise InvariantError("calibration and evaluation origins overlap")

    forecasts = {int(t): issue(int(t)) for t in eval_origins}
    params = ChannelParams.build(
        kappa=CHANNEL_PRESETS[config.channel.preset],
        beta=(
            fspl_gain(cfg.wavelength, geom.distance)
            if config.channel.beta_mode == "fspl"
            else np.ones(K)
        ),
        noise_power=config.channel.noise_power_w,
        bandwidth=config.channel.bandwidth_hz,
        num_users=K,
    )

    half = np.deg2rad(config.calibration.box_halfwidth_deg)
    columns = {name: [] for name in (
        "snapshot", "mode", "K", "QAR", "sum_rate", "ee", "power", "feasible",
        "max_pointing_err_deg", "solve_time_s",
    )}
    for i, slot in enumerate(slots):
        try:
            beam_att = compensation_attitude(
                config.compensation, series, forecasts, int(slot), hz.delay
            )
            beam_att = _compose(mounting, beam_att.as_array())
            truth_att = _compose(mounting, series.samples[int(slot)])
            R_beam = euler_to_rotation(beam_att)
            R_truth = euler_to_rotation(truth_att)
            A = analog_beamformer_at(cfg, geom, beam_att)

            rng = np.random.default_rng(
                np.random.SeedSequence([config.seeds.channel, i])
            )
            H = synthesize_channel(cfg, geom, truth_att, params, rng)
            h_eff = effective_channel(H, A)

            l2 = np.empty(K)
            s_xi = np.empty(K)
            for k in range(K):
                theta, phi = los_to_body_angles(geom.los_unit[k], R_beam)
                box = AngleBox.around(theta, phi, half)
                l2[k] = spectral_bound_l2(cfg, box, config.calibration.grid)
                s_xi[k] = sigma_xi_sq(
                    jacobian(cfg, geom.los_unit[k], beam_att), report.sigma_omega
                )
            certified = certify_users(
                l2, report.delta_omega, config.calibration.epsilon
            )

            problem = SnapshotProblem.build(
                h_eff,
                r_min=config.qos.r_min,
                p_max=config.qos.p_max_w,
                noise_power=config.channel.noise_power_w,
                bandwidth=config.channel.bandwidth_hz,
                circuit_power=config.qos.circuit_power_w,
                certified=certified,
                sigma_xi=s_xi,
                analog_gram=A.conj().T @ A,
            )
            t0 = time.perf_counter()
            sol = solve_snapshot(
                problem,
                k_min=config.admission.k_min,
                priority=config.admission.priority,
                seed=config.seeds.admission + i,
                objective=config.admission.objective,
                n_ref=config.admission.n_ref,
            )
            solve_time = time.perf_counter() - t0
            err = np.degrees(
                np.linalg.norm(rotation_log_vee(R_beam, R_truth))
            )
        except HapbeamError as exc:
            exc.args = (f"snapshot {i} (slot {int(slot)}): {exc}",)
            raise
        columns["snapshot"].append(i)
        columns["mode"].append(config.compensation)
        columns["K"].append(K)
        columns["QAR"].append(sol.qar)
        columns["sum_rate"].append(sol.sum_rate)
        columns["ee"].append(sol.energy_efficiency)
        columns["power"].append(sol.power)
        columns["feasible"].append(float(sol.feasible))
        columns["max_pointing_err_deg"].append(err)
        columns["solve_time_s"].append(solve_time)

    columns = {
        name: (np.asarray(vals) if name != "mode" else list(vals))
        for name, vals in columns.items()
    }
    fc_report = forecast_errors(series, list(forecasts.values()), hz.delay)
    return RunResult(
        config=config,
        snapshots=columns,
        aggregates=_aggregate(columns),
        calibration=report,
        forecast_report=fc_report,
        eval_slots=slots,
    )


def _set_path(raw: dict, dotted: str, value) -> None:
    parts = dotted.split(".")
    node = raw
    for p in parts[:-1]:
        node = node.setdefault(p, {})
        if not isinstance(node, dict):
            raise ConfigError(f"sweep axis {dotted!r} does not address a mapping")
    node[parts[-1]] = value


def sweep(base: dict, axes: dict) -> list:
    """Cross product of config overrides.  `axes` maps dotted config paths
    (for example users.count) to value lists; cells are enumerated in sorted
    key order and returned as (overrides, RunResult) pairs."""
    if not axes:
        raise ConfigError("sweep needs at least one axis")
    names = sorted(axes)
    for name, values in axes.items():
        if not isinstance(values, (list, tuple)) or not values:
            raise ConfigError(f"sweep axis {name!r} must list at least one value")
    cells = []
    for combo in itertools.product(*(axes[n] for n in names)):
        raw = _deep_copy_dict(base)
        overrides = dict(zip(names, combo))
        for dotted, value in overrides.items():
            _set_path(raw, dotted, value)
        cells.append((overrides, run_experiment(ScenarioConfig.from_dict(raw))))
    return cells


def _deep_copy_dict(d: dict) -> dict:
    return {
        k: _deep_copy_dict(v) if isinstance(v, dict) else v for k, v in d.items()
    }
