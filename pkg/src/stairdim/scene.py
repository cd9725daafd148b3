"""Parametric staircase scenes and the walking sensor trajectory.

World frame: x points horizontally toward the staircase, y points up, the
floor is y = 0. A staircase with tread depth d and riser height h rising away
from the sensor puts its k-th convex step corner at

    (foot_x + k * d,  (k + 1) * h),   k = 0 .. step_count - 1.

The sensor is shin-mounted at height ``mount_height`` (h_i) and tilted
``mount_tilt`` below the horizon (-20 deg by default). During a walk the true
boresight tilt sways sinusoidally around the mount tilt; the IMU reports that
tilt with additive Gaussian noise. The radar origin height follows
``h_i * cos(tilt - mount_tilt_default)`` so that at the default -20 deg mount
it equals h_i * cos(gamma + 20 deg).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .numerics import rng_for

__all__ = [
    "StaircaseSpec",
    "WalkConfig",
    "GaitFrame",
    "Trajectory",
    "Scatterer",
    "corners_of",
    "corner_scatterers",
    "clutter_scatterers",
    "generate_walk",
    "staircase_to_dict",
    "staircase_from_dict",
    "walk_to_dict",
    "walk_from_dict",
    "trajectory_to_dict",
    "trajectory_from_dict",
]

_MOUNT_TILT_DEFAULT_RAD = math.radians(-20.0)


@dataclass(frozen=True)
class StaircaseSpec:
    """Geometry of an ascending staircase (meters)."""

    depth_m: float = 0.30
    height_m: float = 0.15
    step_count: int = 4
    foot_x_m: float = 0.0

    def __post_init__(self) -> None:
        if not (math.isfinite(self.depth_m) and self.depth_m > 0):
            raise ValueError(f"depth_m must be positive, got {self.depth_m!r}")
        if not (math.isfinite(self.height_m) and self.height_m > 0):
            raise ValueError(f"height_m must be positive, got {self.height_m!r}")
        if self.step_count < 1 or int(self.step_count) != self.step_count:
            raise ValueError(f"step_count must be a positive integer, got {self.step_count!r}")
        if not math.isfinite(self.foot_x_m):
            raise ValueError(f"foot_x_m must be finite, got {self.foot_x_m!r}")


def corners_of(spec: StaircaseSpec) -> np.ndarray:
    """World (x, y) positions of the convex step corners, shape (step_count, 2).

    Corner k sits at the front edge of tread k: x = foot_x + k * depth,
    y = (k + 1) * height. Ascending in both coordinates.
    """
    k = np.arange(spec.step_count, dtype=float)
    return np.column_stack((spec.foot_x_m + k * spec.depth_m, (k + 1.0) * spec.height_m))


@dataclass(frozen=True)
class WalkConfig:
    """Walk of the sensor toward the staircase foot.

    Angles are radians internally; serialization uses degrees with _deg
    suffixes. ``mount_height_m`` is h_i, the shin attachment height.
    """

    start_standoff_m: float = 4.0
    end_standoff_m: float = 0.5
    duration_s: float = 5.0
    rate_hz: float = 10.0
    mount_height_m: float = 0.45
    mount_tilt_rad: float = _MOUNT_TILT_DEFAULT_RAD
    sway_amplitude_rad: float = math.radians(10.0)
    sway_frequency_hz: float = 1.0
    sway_noise_sigma_rad: float = math.radians(1.0)
    imu_noise_sigma_rad: float = math.radians(0.5)
    seed: int = 0

    def __post_init__(self) -> None:
        if self.rate_hz <= 0 or not math.isfinite(self.rate_hz):
            raise ValueError(f"rate_hz must be positive, got {self.rate_hz!r}")
        if self.duration_s <= 0 or not math.isfinite(self.duration_s):
            raise ValueError(f"duration_s must be positive, got {self.duration_s!r}")
        if self.mount_height_m <= 0:
            raise ValueError(f"mount_height_m must be positive, got {self.mount_height_m!r}")
        if self.end_standoff_m <= 0 or self.start_standoff_m < self.end_standoff_m:
            raise ValueError(
                "standoffs must satisfy start >= end > 0, got "
                f"{self.start_standoff_m!r} -> {self.end_standoff_m!r}"
            )


@dataclass(frozen=True)
class GaitFrame:
    """Sensor state at one acquisition instant.

    ``tilt_rad`` is the true boresight angle from horizontal (negative means
    pointing below the horizon) and drives the synthesized geometry;
    ``gamma_rad`` is the IMU-reported tilt, i.e. what the processing side is
    allowed to know. ``v_host_mps`` is the horizontal walking speed along +x.
    """

    timestamp_s: float
    x_m: float
    y_m: float
    tilt_rad: float
    gamma_rad: float
    v_host_mps: float


@dataclass(frozen=True)
class Trajectory:
    frames: tuple[GaitFrame, ...]
    walk: WalkConfig
    staircase: StaircaseSpec


@dataclass(frozen=True)
class Scatterer:
    """Point scatterer in world coordinates.

    ``radial_velocity_mps`` is the scatterer's own line-of-sight velocity
    relative to a stationary world (positive closing); the host's radial
    velocity is added on top during synthesis.
    """

    x_m: float
    y_m: float
    reflectivity: float = 1.0
    radial_velocity_mps: float = 0.0


def corner_scatterers(spec: StaircaseSpec, reflectivity: float = 1.0) -> list[Scatterer]:
    """Step corners as unit-class point scatterers (dominant stair returns)."""
    return [Scatterer(x, y, reflectivity, 0.0) for x, y in corners_of(spec)]


def clutter_scatterers(
    spec: StaircaseSpec,
    count: int,
    reflectivity: float,
    rng: np.random.Generator,
) -> list[Scatterer]:
    """Weak stationary clutter points scattered over treads and risers."""
    out: list[Scatterer] = []
    for _ in range(count):
        k = int(rng.integers(0, spec.step_count))
        x0 = spec.foot_x_m + k * spec.depth_m
        y_top = (k + 1) * spec.height_m
        if rng.random() < 0.5:
            # on the tread behind corner k
            out.append(Scatterer(x0 + rng.random() * spec.depth_m, y_top, reflectivity, 0.0))
        else:
            # on the riser below corner k
            out.append(Scatterer(x0, y_top - rng.random() * spec.height_m, reflectivity, 0.0))
    return out


def generate_walk(
    spec: StaircaseSpec,
    cfg: WalkConfig,
    max_range_m: float | None = None,
) -> Trajectory:
    """Sample the walk into gait frames.

    The sensor advances at constant speed from foot_x - start_standoff to
    foot_x - end_standoff over the walk duration. The true tilt is

        mount_tilt + A * sin(2 pi f t + phi0) + gait noise

    with a seeded random initial phase phi0; the IMU-reported gamma adds
    independent Gaussian noise on top. Host velocity is the forward finite
    difference of x (the last frame repeats the previous value).

    Args:
        spec: staircase the walk approaches.
        cfg: walk parameters (seeded).
        max_range_m: optional sanity bound, rejects walks whose farthest
            corner would start beyond the radar's unambiguous range.
    """
    n = int(round(cfg.duration_s * cfg.rate_hz))
    if n < 2:
        raise ValueError(f"walk must span at least 2 frames, got {n}")
    x0 = spec.foot_x_m - cfg.start_standoff_m
    x1 = spec.foot_x_m - cfg.end_standoff_m
    if max_range_m is not None:
        far = corners_of(spec)[-1]
        reach = math.hypot(far[0] - x0, far[1])
        if reach > max_range_m:
            raise ValueError(
                f"farthest corner at {reach:.2f} m exceeds max range {max_range_m:.2f} m "
                "at the starting standoff"
            )

    rng = rng_for(cfg.seed, 0x5CE)
    phi0 = rng.uniform(0.0, 2.0 * math.pi)
    gait_noise = rng.normal(0.0, cfg.sway_noise_sigma_rad, size=n)
    imu_noise = rng.normal(0.0, cfg.imu_noise_sigma_rad, size=n)

    t = np.arange(n) / cfg.rate_hz
    x = x0 + (x1 - x0) * (np.arange(n) / (n - 1))
    tilt = (
        cfg.mount_tilt_rad
        + cfg.sway_amplitude_rad * np.sin(2.0 * math.pi * cfg.sway_frequency_hz * t + phi0)
        + gait_noise
    )
    gamma = tilt + imu_noise
    # height of the sensor above floor follows the shin rotation around the
    # mount: h_i at the neutral tilt, shrinking as the shin leaves neutral
    y = cfg.mount_height_m * np.cos(tilt - _MOUNT_TILT_DEFAULT_RAD)
    v = np.empty(n)
    v[:-1] = np.diff(x) * cfg.rate_hz
    v[-1] = v[-2]

    frames = tuple(
        GaitFrame(
            timestamp_s=float(t[i]),
            x_m=float(x[i]),
            y_m=float(y[i]),
            tilt_rad=float(tilt[i]),
            gamma_rad=float(gamma[i]),
            v_host_mps=float(v[i]),
        )
        for i in range(n)
    )
    return Trajectory(frames=frames, walk=cfg, staircase=spec)


# --- serialization (scenario files store angles in degrees, *_deg keys) ---


def staircase_to_dict(spec: StaircaseSpec) -> dict:
    return {
        "depth_m": spec.depth_m,
        "height_m": spec.height_m,
        "step_count": spec.step_count,
        "foot_x_m": spec.foot_x_m,
    }


def staircase_from_dict(d: dict) -> StaircaseSpec:
    return StaircaseSpec(
        depth_m=float(d["depth_m"]),
        height_m=float(d["height_m"]),
        step_count=int(d["step_count"]),
        foot_x_m=float(d.get("foot_x_m", 0.0)),
    )


def walk_to_dict(cfg: WalkConfig) -> dict:
    return {
        "start_standoff_m": cfg.start_standoff_m,
        "end_standoff_m": cfg.end_standoff_m,
        "duration_s": cfg.duration_s,
        "rate_hz": cfg.rate_hz,
        "mount_height_m": cfg.mount_height_m,
        "mount_tilt_deg": math.degrees(cfg.mount_tilt_rad),
        "sway_amplitude_deg": math.degrees(cfg.sway_amplitude_rad),
        "sway_frequency_hz": cfg.sway_frequency_hz,
        "sway_noise_sigma_deg": math.degrees(cfg.sway_noise_sigma_rad),
        "imu_noise_sigma_deg": math.degrees(cfg.imu_noise_sigma_rad),
        "seed": cfg.seed,
    }


def walk_from_dict(d: dict) -> WalkConfig:
    base = WalkConfig()
    return WalkConfig(
        start_standoff_m=float(d.get("start_standoff_m", base.start_standoff_m)),
        end_standoff_m=float(d.get("end_standoff_m", base.end_standoff_m)),
        duration_s=float(d.get("duration_s", base.duration_s)),
        rate_hz=float(d.get("rate_hz", base.rate_hz)),
        mount_height_m=float(d.get("mount_height_m", base.mount_height_m)),
        mount_tilt_rad=math.radians(float(d.get("mount_tilt_deg", math.degrees(base.mount_tilt_rad)))),
        sway_amplitude_rad=math.radians(
            float(d.get("sway_amplitude_deg", math.degrees(base.sway_amplitude_rad)))
        ),
        sway_frequency_hz=float(d.get("sway_frequency_hz", base.sway_frequency_hz)),
        sway_noise_sigma_rad=math.radians(
            float(d.get("sway_noise_sigma_deg", math.degrees(base.sway_noise_sigma_rad)))
        ),
        imu_noise_sigma_rad=math.radians(
            float(d.get("imu_noise_sigma_deg", math.degrees(base.imu_noise_sigma_rad)))
        ),
        seed=int(d.get("seed", base.seed)),
    )


def trajectory_to_dict(traj: Trajectory) -> dict:
    return {
        "staircase": staircase_to_dict(traj.staircase),
        "walk": walk_to_dict(traj.walk),
        "frames": [
            {
                "timestamp_s": f.timestamp_s,
                "x_m": f.x_m,
                "y_m": f.y_m,
                "tilt_deg": math.degrees(f.tilt_rad),
                "gamma_deg": math.degrees(f.gamma_rad),
                "v_host_mps": f.v_host_mps,
            }
            for f in traj.frames
        ],
    }


def trajectory_from_dict(d: dict) -> Trajectory:
    frames = tuple(
        GaitFrame(
            timestamp_s=float(f["timestamp_s"]),
            x_m=float(f["x_m"]),
            y_m=float(f["y_m"]),
            tilt_rad=math.radians(float(f["tilt_deg"])),
            gamma_rad=math.radians(float(f["gamma_deg"])),
            v_host_mps=float(f["v_host_mps"]),
        )
        for f in d["frames"]
    )
    return Trajectory(
        frames=frames,
        walk=walk_from_dict(d["walk"]),
        staircase=staircase_from_dict(d["staircase"]),
    )
