"""Sensor fusion simulation: synthetic IMU/compass/GPS streams and the
complementary tracker that turns them into camera poses.

Conventions fixed here and used everywhere downstream:

* body frame: x forward, y left, z up
* orientation quaternions are [w, x, y, z], body-to-ENU
* yaw is the angle of the body forward axis in the east-north plane,
  counterclockwise from east; compass heading is degrees clockwise from
  true north, so heading = (90 - yaw_deg) mod 360

The tracker integrates filtered gyro rates as the high-rate backbone and
applies two small absolute corrections per frame: heading toward the
compass reading and tilt toward the filtered gravity direction. GPS is
zero-order held between fixes. Position from accelerometer double
integration is deliberately absent; at phone-grade noise it diverges in
seconds.

The compass correction targets the current compass sample rather than a
displacement-gated filtered copy. That filter trails a steady turn by
rate/alpha_large (a full degree at the 0.9 deg/frame of a quarter-turn
second), and blending toward a lagging reference leaves most of that lag
in the tracked yaw. The small blend weight already suppresses compass
jitter; the displacement filter stays on the gyro/accel channels where it
has no such bias.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .filtering import FilterParams, FilterState, Vec3Sample, filter_step, parse_stream_csv, write_stream_csv
from .geodesy import BBox, EnuPoint, GeoPoint, bbox_from_fix, geo_from_enu, haversine_m

GRAVITY = 9.81
DEFAULT_LOAD_RADIUS_M = 10.0
DEFAULT_HEADING_WEIGHT = 0.02
DEFAULT_TILT_WEIGHT = 0.02

PROFILES = ("stationary", "constant-rotation", "walk-path")


# ---------------------------------------------------------------------------
# quaternion helpers ([w, x, y, z], body-to-ENU)

def quat_identity() -> np.ndarray:
    return np.array([1.0, 0.0, 0.0, 0.0])


def quat_multiply(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    aw, ax, ay, az = a
    bw, bx, by, bz = b
    return np.array([
        aw * bw - ax * bx - ay * by - az * bz,
        aw * bx + ax * bw + ay * bz - az * by,
        aw * by - ax * bz + ay * bw + az * bx,
        aw * bz + ax * by - ay * bx + az * bw,
    ])


def quat_conjugate(q: np.ndarray) -> np.ndarray:
    return np.array([q[0], -q[1], -q[2], -q[3]])


def quat_normalize(q: np.ndarray) -> np.ndarray:
    norm = math.sqrt(float(np.dot(q, q)))
    if norm == 0.0:
        raise ValueError("cannot normalize a zero quaternion")
    return q / norm


def quat_from_rotvec(v: np.ndarray) -> np.ndarray:
    v = np.asarray(v, dtype=np.float64)
    angle = math.sqrt(float(np.dot(v, v)))
    if angle < 1e-300:
        return quat_identity()
    axis = v / angle
    half = 0.5 * angle
    return np.array([math.cos(half), *(math.sin(half) * axis)])


def quat_rotate(q: np.ndarray, v) -> np.ndarray:
    p = np.array([0.0, *np.asarray(v, dtype=np.float64)])
    out = quat_multiply(quat_multiply(q, p), quat_conjugate(q))
    return out[1:]


def quat_angle_deg(a: np.ndarray, b: np.ndarray) -> float:
    """Geodesic rotation distance in degrees (sign-insensitive)."""
    dot = min(1.0, abs(float(np.dot(a, b))))
    return math.degrees(2.0 * math.acos(dot))


def yaw_of(q: np.ndarray) -> float:
    """Angle of the body forward axis in the EN plane, radians CCW from east."""
    fwd = quat_rotate(q, (1.0, 0.0, 0.0))
    return math.atan2(fwd[1], fwd[0])


def heading_of(q: np.ndarray) -> float:
    return (90.0 - math.degrees(yaw_of(q))) % 360.0


def quat_from_heading(heading_deg: float) -> np.ndarray:
    yaw = math.radians(90.0 - heading_deg)
    return quat_from_rotvec(np.array([0.0, 0.0, yaw]))


def _wrap_pi(angle: float) -> float:
    return math.atan2(math.sin(angle), math.cos(angle))


# ---------------------------------------------------------------------------
# types

@dataclass(frozen=True)
class SensorFrame:
    timestamp: float
    gyro: Vec3Sample             # body rates, rad/s
    accel: Vec3Sample            # specific force, m/s^2
    compass_heading: float       # degrees clockwise from true north
    gps: GeoPoint | None = None

    def __post_init__(self) -> None:
        if not math.isfinite(self.timestamp):
            raise ValueError("timestamp must be finite")
        if not (0.0 <= self.compass_heading < 360.0):
            raise ValueError(f"compass heading must be in [0, 360), got {self.compass_heading}")


@dataclass(frozen=True)
class TrackedPose:
    position: GeoPoint
    orientation: np.ndarray      # unit quaternion, body-to-ENU
    load_bbox: BBox

    def __post_init__(self) -> None:
        q = np.asarray(self.orientation, dtype=np.float64)
        if q.shape != (4,):
            raise ValueError("orientation must be a length-4 quaternion")
        if abs(float(np.dot(q, q)) - 1.0) > 1e-9:
            raise ValueError("orientation quaternion must be unit norm within 1e-9")
        object.__setattr__(self, "orientation", q)


@dataclass(frozen=True)
class NoiseSpec:
    gyro: float = 0.0            # rad/s per axis
    accel: float = 0.0           # m/s^2 per axis
    compass_deg: float = 0.0
    gps_m: float = 0.0           # horizontal, per ENU axis

    def __post_init__(self) -> None:
        for name in ("gyro", "accel", "compass_deg", "gps_m"):
            if getattr(self, name) < 0.0:
                raise ValueError(f"noise sigma {name} must be non-negative")


@dataclass(frozen=True)
class TrajectorySpec:
    seed: int
    duration: float = 1.0                        # seconds
    rate: float = 100.0                          # Hz
    profile: str = "stationary"
    noise: NoiseSpec = field(default_factory=NoiseSpec)
    origin: GeoPoint = field(default_factory=lambda: GeoPoint(0.0, 0.0, 1.5))
    heading0: float = 0.0                        # degrees
    turn_rate: float = math.pi / 2.0             # rad/s about up, constant-rotation
    walk_speed: float = 1.4                      # m/s, walk-path
    sway_amplitude: float = 0.1                  # rad, walk-path yaw sway
    sway_period: float = 4.0                     # s
    gps_period: float = 1.0                      # s between fixes

    def __post_init__(self) -> None:
        if self.duration <= 0.0:
            raise ValueError(f"duration must be positive, got {self.duration}")
        if self.rate <= 0.0:
            raise ValueError(f"rate must be positive, got {self.rate}")
        if self.profile not in PROFILES:
            raise ValueError(f"unknown profile {self.profile!r}, expected one of {PROFILES}")
        if self.gps_period <= 0.0:
            raise ValueError(f"gps_period must be positive, got {self.gps_period}")


@dataclass(frozen=True)
class ErrorReport:
    angle_deg: list[float]       # per-frame geodesic orientation error
    position_m: list[float]      # per-frame horizontal position error
    rms_angle_deg: float
    max_angle_deg: float
    rms_position_m: float
    max_position_m: float

    def as_dict(self) -> dict:
        return {
            "angle_deg": self.angle_deg,
            "position_m": self.position_m,
            "rms_angle_deg": self.rms_angle_deg,
            "max_angle_deg": self.max_angle_deg,
            "rms_position_m": self.rms_position_m,
            "max_position_m": self.max_position_m,
        }


# ---------------------------------------------------------------------------
# simulation

def _truth_at(spec: TrajectorySpec, t: float) -> tuple[GeoPoint, np.ndarray, np.ndarray]:
    """Ground-truth (position, orientation, body rates) at time t."""
    q0 = quat_from_heading(spec.heading0)
    if spec.profile == "stationary":
        return spec.origin, q0, np.zeros(3)
    if spec.profile == "constant-rotation":
        q = quat_multiply(quat_from_rotvec(np.array([0.0, 0.0, spec.turn_rate * t])), q0)
        return spec.origin, q, np.array([0.0, 0.0, spec.turn_rate])
    # walk-path: straight line at walk_speed with a gentle yaw sway
    sway = spec.sway_amplitude * math.sin(2.0 * math.pi * t / spec.sway_period)
    sway_rate = (spec.sway_amplitude * 2.0 * math.pi / spec.sway_period
                 * math.cos(2.0 * math.pi * t / spec.sway_period))
    q = quat_multiply(quat_from_rotvec(np.array([0.0, 0.0, sway])), q0)
    yaw0 = math.radians(90.0 - spec.heading0)
    dist = spec.walk_speed * t
    pos = geo_from_enu(spec.origin, EnuPoint(dist * math.cos(yaw0),
                                             dist * math.sin(yaw0), 0.0))
    return pos, q, np.array([0.0, 0.0, sway_rate])


def simulate_trajectory(spec: TrajectorySpec) -> tuple[list[TrackedPose], list[SensorFrame]]:
    """Ground-truth poses plus the noisy sensor stream a phone would see.

    Frames run from t=0 to t=duration inclusive at the given rate. The
    accelerometer model is quasi-static (gravity only); walking-speed
    linear accelerations are below its noise floor and are not modeled.
    """
    rng = np.random.default_rng(spec.seed)
    n = int(round(spec.duration * spec.rate)) + 1
    dt = 1.0 / spec.rate
    truth: list[TrackedPose] = []
    frames: list[SensorFrame] = []
    next_fix = 0.0
    for k in range(n):
        t = k * dt
        pos, q, rates = _truth_at(spec, t)
        truth.append(TrackedPose(position=pos, orientation=quat_normalize(q),
                                 load_bbox=bbox_from_fix(pos, DEFAULT_LOAD_RADIUS_M)))
        gyro = rates + rng.normal(0.0, spec.noise.gyro, 3) if spec.noise.gyro else rates
        up_body = quat_rotate(quat_conjugate(q), (0.0, 0.0, 1.0))
        accel = GRAVITY * up_body
        if spec.noise.accel:
            accel = accel + rng.normal(0.0, spec.noise.accel, 3)
        heading = heading_of(q)
        if spec.noise.compass_deg:
            heading = (heading + rng.normal(0.0, spec.noise.compass_deg)) % 360.0
        gps = None
        if t >= next_fix - 1e-9:
            next_fix += spec.gps_period
            if spec.noise.gps_m:
                de, dn = rng.normal(0.0, spec.noise.gps_m, 2)
                gps = geo_from_enu(pos, EnuPoint(de, dn, 0.0))
            else:
                gps = pos
        frames.append(SensorFrame(
            timestamp=t,
            gyro=Vec3Sample(t, *gyro),
            accel=Vec3Sample(t, *accel),
            compass_heading=heading,
            gps=gps,
        ))
    return truth, frames


# ---------------------------------------------------------------------------
# tracking

def track(frames: list[SensorFrame], filter_params: FilterParams | None = None,
          r: float = DEFAULT_LOAD_RADIUS_M,
          heading_weight: float = DEFAULT_HEADING_WEIGHT,
          tilt_weight: float = DEFAULT_TILT_WEIGHT,
          filtering_enabled: bool = True) -> list[TrackedPose]:
    """Fuse a sensor stream into per-frame camera poses.

    Orientation starts from the first compass reading (assumed level),
    then advances by first-order quaternion integration of the gyro
    channel, renormalized every step. filtering_enabled=False bypasses
    the gyro/accel displacement filter for paired comparisons.
    """
    if not frames:
        raise ValueError("sensor stream is empty")
    fixes = [f.gps for f in frames if f.gps is not None]
    if not fixes:
        raise ValueError("sensor stream contains no GPS fix")
    params = filter_params or FilterParams()

    q = quat_from_heading(frames[0].compass_heading)
    position = fixes[0]
    gyro_state = FilterState()
    accel_state = FilterState()
    poses: list[TrackedPose] = []
    prev_t = frames[0].timestamp
    for k, frame in enumerate(frames):
        if filtering_enabled:
            gyro_state, gyro = filter_step(gyro_state, frame.gyro, params)
            accel_state, accel = filter_step(accel_state, frame.accel, params)
        else:
            gyro, accel = frame.gyro, frame.accel
        if k > 0:
            dt = frame.timestamp - prev_t
            omega = np.array([0.0, gyro.x, gyro.y, gyro.z])
            q = quat_normalize(q + 0.5 * dt * quat_multiply(q, omega))
        prev_t = frame.timestamp

        yaw_compass = math.radians(90.0 - frame.compass_heading)
        err = _wrap_pi(yaw_compass - yaw_of(q))
        q = quat_normalize(quat_multiply(
            quat_from_rotvec(np.array([0.0, 0.0, heading_weight * err])), q))

        a = np.array([accel.x, accel.y, accel.z])
        norm = math.sqrt(float(np.dot(a, a)))
        if norm > 1e-9:
            up_meas = a / norm
            up_pred = quat_rotate(quat_conjugate(q), (0.0, 0.0, 1.0))
            correction = tilt_weight * np.cross(up_meas, up_pred)
            q = quat_normalize(quat_multiply(q, quat_from_rotvec(correction)))

        if frame.gps is not None:
            position = frame.gps
        poses.append(TrackedPose(position=position, orientation=q,
                                 load_bbox=bbox_from_fix(position, r)))
    return poses


def tracking_error(ground_truth: list[TrackedPose], tracked: list[TrackedPose]) -> ErrorReport:
    if len(ground_truth) != len(tracked):
        raise ValueError(
            f"length mismatch: {len(ground_truth)} ground-truth vs {len(tracked)} tracked")
    angles = [quat_angle_deg(g.orientation, t.orientation)
              for g, t in zip(ground_truth, tracked)]
    positions = [haversine_m(g.position, t.position)
                 for g, t in zip(ground_truth, tracked)]
    def rms(xs: list[float]) -> float:
        return math.sqrt(sum(x * x for x in xs) / len(xs))
    return ErrorReport(
        angle_deg=angles,
        position_m=positions,
        rms_angle_deg=rms(angles),
        max_angle_deg=max(angles),
        rms_position_m=rms(positions),
        max_position_m=max(positions),
    )


def orientation_jitter_deg(poses: list[TrackedPose]) -> float:
    """RMS frame-to-frame angular increment, the shaking metric."""
    if len(poses) < 2:
        return 0.0
    steps = [quat_angle_deg(a.orientation, b.orientation)
             for a, b in zip(poses, poses[1:])]
    return math.sqrt(sum(s * s for s in steps) / len(steps))


# ---------------------------------------------------------------------------
# stream interchange: per-channel filter CSVs plus a GPS sidecar

GPS_COLUMNS = ["timestamp", "lon", "lat"]


def write_sensor_csvs(frames: list[SensorFrame], directory) -> None:
    """gyro.csv / accel.csv / compass.csv in the filter stream format
    (compass heading in the x column), gps.csv sidecar timestamp,lon,lat."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    (directory / "gyro.csv").write_text(write_stream_csv([f.gyro for f in frames]))
    (directory / "accel.csv").write_text(write_stream_csv([f.accel for f in frames]))
    (directory / "compass.csv").write_text(write_stream_csv(
        [Vec3Sample(f.timestamp, f.compass_heading, 0.0, 0.0) for f in frames]))
    with open(directory / "gps.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(GPS_COLUMNS)
        for f in frames:
            if f.gps is not None:
                writer.writerow([repr(f.timestamp), repr(f.gps.lon), repr(f.gps.lat)])


def read_sensor_csvs(directory) -> list[SensorFrame]:
    directory = Path(directory)
    gyro = parse_stream_csv((directory / "gyro.csv").read_text())
    accel = parse_stream_csv((directory / "accel.csv").read_text())
    compass = parse_stream_csv((directory / "compass.csv").read_text())
    if not (len(gyro) == len(accel) == len(compass)):
        raise ValueError("sensor channel CSVs have mismatched lengths")
    fixes: dict[float, GeoPoint] = {}
    gps_path = directory / "gps.csv"
    if gps_path.exists():
        with open(gps_path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header != GPS_COLUMNS:
                raise ValueError(f"gps.csv header {header} != {GPS_COLUMNS}")
            for row in reader:
                fixes[float(row[0])] = GeoPoint(float(row[1]), float(row[2]))
    frames = []
    for g, a, c in zip(gyro, accel, compass):
        if not (g.timestamp == a.timestamp == c.timestamp):
            raise ValueError("sensor channel CSVs have mismatched timestamps")
        frames.append(SensorFrame(timestamp=g.timestamp, gyro=g, accel=a,
                                  compass_heading=c.x % 360.0,
                                  gps=fixes.get(g.timestamp)))
    return frames
