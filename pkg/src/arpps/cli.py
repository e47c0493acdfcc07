"""Operator command line: data generation, validation, serving, queries,
matching benchmarks, tracking simulation, and overlay frame emission.

Every command is deterministic for a given seed and config, and every
JSON report embeds the resolved configuration so a run can be replayed
from its own output. Reports go to stdout, human chatter to stderr.

Exit codes: 0 success, 1 usage, 2 bad data, 3 runtime failure.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import signal
import statistics
import sys
import threading
from pathlib import Path

import numpy as np

from .camera import CameraIntrinsics
from .filtering import FilterParams
from .geodesy import GeoPoint, bbox_from_fix
from .overlay import (
    CIRCULAR,
    RECTANGULAR,
    TrenchSpec,
    Viewport,
    emit_svg,
    render_frame,
    serialize_frame,
)
from .pipe_model import (
    CsvFormatError,
    NetworkSpec,
    generate_network,
    parse_csv,
    validate_network,
    write_csv,
)
from .service import RangeParam, RangeParseError, handle_pipes_request, parse_range, serve
from .store import SpatialStore, ValidationError
from .tcnn import (
    EXHAUSTIVE_LIMIT,
    TcnnParams,
    brute_force_match,
    matching_energy,
    nn_baseline_match,
    run_matching,
    separable_problem,
)
from .tracking import (
    NoiseSpec,
    TrackedPose,
    TrajectorySpec,
    orientation_jitter_deg,
    quat_from_heading,
    quat_from_rotvec,
    quat_multiply,
    simulate_trajectory,
    track,
    tracking_error,
    write_sensor_csvs,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_RUNTIME = 3

DEFAULT_PORT = 8787


class UsageError(Exception):
    pass


class DataError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse that signals usage problems through our exit-code scheme."""

    def error(self, message: str):
        raise UsageError(message)


def _load_config(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise DataError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise DataError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise DataError(f"config {path} must hold a JSON object")
    return doc


def _resolve(args: argparse.Namespace, config: dict, key: str, default):
    """Flag beats config file beats built-in default."""
    flag = getattr(args, key, None)
    if flag is not None:
        return flag
    if key in config:
        return config[key]
    return default


def _say(msg: str) -> None:
    print(msg, file=sys.stderr)


def _emit(report: dict) -> None:
    print(json.dumps(report, indent=2, sort_keys=True))


def _read_network(data_dir: str):
    d = Path(data_dir)
    try:
        points_text = (d / "pipe_points.csv").read_text(encoding="utf-8")
        lines_text = (d / "pipe_lines.csv").read_text(encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read network CSVs in {data_dir}: {exc}") from exc
    try:
        return parse_csv(points_text, lines_text)
    except CsvFormatError as exc:
        raise DataError(str(exc)) from exc


def _load_store(data_dir: str) -> SpatialStore:
    points, lines = _read_network(data_dir)
    try:
        return SpatialStore.load(points, lines)
    except ValidationError as exc:
        raise DataError(str(exc)) from exc


# ---------------------------------------------------------------------------
# subcommands

def cmd_gen(args: argparse.Namespace, config: dict) -> int:
    seed = _resolve(args, config, "seed", 0)
    points_n = _resolve(args, config, "points", 200)
    extent = _resolve(args, config, "extent", 400.0)
    out = _resolve(args, config, "out", ".")
    center_raw = _resolve(args, config, "center", "116.0,40.0,50.0")
    lon, lat, alt = _parse_triple(center_raw, "center")

    spec = NetworkSpec(seed=int(seed), center=GeoPoint(lon, lat, alt),
                       extent=float(extent), point_count=int(points_n))
    try:
        spec.validate()
    except ValueError as exc:
        raise UsageError(str(exc)) from exc

    points, lines = generate_network(spec)
    points_text, lines_text = write_csv(points, lines)
    out_dir = Path(out)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "pipe_points.csv").write_text(points_text, encoding="utf-8")
    (out_dir / "pipe_lines.csv").write_text(lines_text, encoding="utf-8")
    _say(f"wrote {len(points)} points, {len(lines)} lines to {out_dir}")
    _emit({
        "command": "gen",
        "config": {"seed": int(seed), "points": int(points_n),
                   "extent": float(extent), "center": [lon, lat, alt],
                   "out": str(out_dir)},
        "point_count": len(points),
        "line_count": len(lines),
    })
    return EXIT_OK


def cmd_validate(args: argparse.Namespace, config: dict) -> int:
    data = _resolve(args, config, "data", None)
    if data is None:
        raise UsageError("validate requires --data")
    points, lines = _read_network(data)
    violations = validate_network(points, lines)
    report = {
        "command": "validate",
        "config": {"data": str(data)},
        "point_count": len(points),
        "line_count": len(lines),
        "violations": [str(v) for v in violations],
    }
    _emit(report)
    if violations:
        _say(f"{len(violations)} violation(s) found")
        return EXIT_DATA
    _say("network is referentially intact")
    return EXIT_OK


def cmd_serve(args: argparse.Namespace, config: dict) -> int:
    data = _resolve(args, config, "data", None)
    if data is None:
        raise UsageError("serve requires --data")
    address = _resolve(args, config, "address", "127.0.0.1")
    env_port = os.environ.get("ARPPS_PORT")
    port = getattr(args, "port", None)
    if port is None and env_port is not None:
        try:
            port = int(env_port)
        except ValueError as exc:
            raise UsageError(f"ARPPS_PORT is not an integer: {env_port!r}") from exc
    if port is None:
        port = config.get("port", DEFAULT_PORT)

    store = _load_store(data)
    try:
        handle = serve(store, address=str(address), port=int(port))
    except OSError as exc:
        _say(f"cannot bind {address}:{port}: {exc}")
        return EXIT_RUNTIME
    _say(f"serving {len(store.points)} points, {len(store.lines)} lines at {handle.url}")

    stop = threading.Event()
    signal.signal(signal.SIGTERM, lambda *_: stop.set())
    signal.signal(signal.SIGINT, lambda *_: stop.set())
    try:
        stop.wait()
    finally:
        handle.shutdown()
    _say("service stopped")
    return EXIT_OK


def cmd_query(args: argparse.Namespace, config: dict) -> int:
    data = _resolve(args, config, "data", None)
    if data is None:
        raise UsageError("query requires --data")
    if args.range is not None and args.fix is not None:
        raise UsageError("give either --range or --fix, not both")
    if args.range is not None:
        try:
            rng = parse_range(args.range)
        except RangeParseError as exc:
            raise UsageError(str(exc)) from exc
    elif args.fix is not None:
        radius = _resolve(args, config, "radius", 10.0)
        lon, lat = _parse_pair(args.fix, "fix")
        bbox = bbox_from_fix(GeoPoint(lon, lat, 0.0), float(radius))
        rng = RangeParam(
            raw=f"{bbox.lon_min!r},{bbox.lat_min!r},{bbox.lon_max!r},{bbox.lat_max!r}",
            parsed=bbox)
    else:
        raise UsageError("query requires --range or --fix")

    store = _load_store(data)
    doc = handle_pipes_request(store, rng)
    # byte-identical to the HTTP /pipes body for the same range
    print(json.dumps(doc, separators=(",", ":")))
    _say(f"{len(doc['features'])} feature(s) in range {rng.raw}")
    return EXIT_OK


def cmd_match_bench(args: argparse.Namespace, config: dict) -> int:
    m = int(_resolve(args, config, "m", 5))
    n = int(_resolve(args, config, "n", 5))
    instances = int(_resolve(args, config, "instances", 20))
    seed = int(_resolve(args, config, "seed", 0))
    oracle = _resolve(args, config, "oracle", "auto")
    if instances <= 0:
        raise UsageError(f"instances must be > 0, got {instances}")
    if oracle not in ("auto", "exhaustive", "permutations"):
        raise UsageError(f"unknown oracle {oracle!r}")

    exhaustive_refused = False
    if oracle == "exhaustive" and m * n > EXHAUSTIVE_LIMIT:
        raise UsageError(
            f"exhaustive oracle refuses m*n = {m * n} > {EXHAUSTIVE_LIMIT}")
    if oracle == "auto":
        # exhaustive enumeration is O(2^(m*n)); only worth it when tiny
        if m * n <= 16:
            oracle = "exhaustive"
        else:
            exhaustive_refused = m * n > EXHAUSTIVE_LIMIT
            oracle = "permutations"

    params = TcnnParams()
    agree = 0
    baseline_agree = 0
    converged = 0
    steps: list[int] = []
    per_instance = []
    for i in range(instances):
        problem = separable_problem(seed + i, m, n)
        result = run_matching(problem, params=params, seed=seed + i)
        oracle_match = brute_force_match(problem, mode=oracle)
        hit = bool(np.array_equal(result.v, oracle_match.v))
        if hit:
            agree += 1
        if np.array_equal(nn_baseline_match(problem).v, oracle_match.v):
            baseline_agree += 1
        if result.converged:
            converged += 1
            steps.append(result.steps_used)
        per_instance.append({
            "seed": seed + i, "M": m, "N": n,
            "converged": result.converged,
            "steps": result.steps_used,
            "energy_tcnn": matching_energy(result.v, problem, 1.0, 1.0, 0.5),
            "energy_oracle": matching_energy(oracle_match.v, problem, 1.0, 1.0, 0.5),
            "agree": hit,
        })

    report = {
        "command": "match-bench",
        "config": {"m": m, "n": n, "instances": instances, "seed": seed,
                   "oracle": oracle, "tcnn": vars(params)},
        "exhaustive_refused": exhaustive_refused,
        "agreement": agree / instances,
        "baseline_agreement": baseline_agree / instances,
        "converged": converged,
        "steps_median": statistics.median(steps) if steps else None,
        "steps_mean": statistics.fmean(steps) if steps else None,
        "instances_detail": per_instance,
    }
    _emit(report)
    _say(f"agreement {agree}/{instances} vs {oracle} oracle, "
         f"baseline {baseline_agree}/{instances}")
    return EXIT_OK


def cmd_track_sim(args: argparse.Namespace, config: dict) -> int:
    profile = _resolve(args, config, "profile", "stationary")
    duration = float(_resolve(args, config, "duration", 1.0))
    rate = float(_resolve(args, config, "rate", 100.0))
    seed = int(_resolve(args, config, "seed", 0))
    noise = NoiseSpec(
        gyro=float(_resolve(args, config, "noise_gyro", 0.0)),
        accel=float(_resolve(args, config, "noise_accel", 0.0)),
        compass_deg=float(_resolve(args, config, "noise_compass", 0.0)),
        gps_m=float(_resolve(args, config, "noise_gps", 0.0)),
    )
    radius = float(_resolve(args, config, "radius", 10.0))
    csv_out = _resolve(args, config, "csv_out", None)

    try:
        spec = TrajectorySpec(seed=seed, duration=duration, rate=rate,
                              profile=str(profile), noise=noise)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc

    truth, frames = simulate_trajectory(spec)
    poses = track(frames, r=radius)
    err = tracking_error(truth, poses)
    poses_raw = track(frames, r=radius, filtering_enabled=False)
    jitter_filtered = orientation_jitter_deg(poses)
    jitter_raw = orientation_jitter_deg(poses_raw)

    if csv_out is not None:
        out_dir = Path(csv_out)
        out_dir.mkdir(parents=True, exist_ok=True)
        write_sensor_csvs(frames, out_dir)
        _say(f"sensor CSVs written to {out_dir}")

    report = {
        "command": "track-sim",
        "config": {"profile": str(profile), "duration": duration, "rate": rate,
                   "seed": seed, "radius": radius,
                   "noise": {"gyro": noise.gyro, "accel": noise.accel,
                             "compass_deg": noise.compass_deg, "gps_m": noise.gps_m}},
        "frames": len(frames),
        "errors": {
            "rms_angle_deg": err.rms_angle_deg,
            "max_angle_deg": err.max_angle_deg,
            "final_angle_deg": err.angle_deg[-1],
            "rms_position_m": err.rms_position_m,
            "max_position_m": err.max_position_m,
            "final_position_m": err.position_m[-1],
        },
        "jitter_deg": {"filtered": jitter_filtered, "unfiltered": jitter_raw},
    }
    _emit(report)
    _say(f"{len(frames)} frames, final orientation error {err.angle_deg[-1]:.4f} deg, "
         f"jitter filtered {jitter_filtered:.4f} vs raw {jitter_raw:.4f} deg")
    return EXIT_OK


def cmd_render_frame(args: argparse.Namespace, config: dict) -> int:
    data = _resolve(args, config, "data", None)
    if data is None:
        raise UsageError("render-frame requires --data")
    fix_raw = _resolve(args, config, "fix", None)
    if fix_raw is None:
        raise UsageError("render-frame requires --fix lon,lat,alt")
    lon, lat, alt = _parse_triple(fix_raw, "fix")
    heading = float(_resolve(args, config, "heading", 0.0))
    pitch = float(_resolve(args, config, "pitch", 0.0))
    radius = float(_resolve(args, config, "radius", 10.0))
    mode = _resolve(args, config, "trench_mode", RECTANGULAR)
    size = float(_resolve(args, config, "trench_size", 4.0))
    depth = _resolve(args, config, "trench_depth", None)
    ground = float(_resolve(args, config, "ground_elevation", 0.0))
    svg_out = _resolve(args, config, "svg", None)

    store = _load_store(data)
    fix = GeoPoint(lon, lat, alt)
    orientation = quat_from_heading(heading)
    if pitch != 0.0:
        orientation = quat_multiply(
            orientation, quat_from_rotvec(np.array([0.0, math.radians(pitch), 0.0])))
    pose = TrackedPose(position=fix, orientation=orientation,
                       load_bbox=bbox_from_fix(fix, radius))
    try:
        trench = TrenchSpec(mode=str(mode), size=size,
                            depth=None if depth is None else float(depth),
                            ground_elevation=ground)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    k = CameraIntrinsics(
        fx=float(_resolve(args, config, "fx", 1000.0)),
        fy=float(_resolve(args, config, "fy", 1000.0)),
        cx=float(_resolve(args, config, "cx", 640.0)),
        cy=float(_resolve(args, config, "cy", 360.0)))
    viewport = Viewport(width=int(_resolve(args, config, "width", 1280)),
                        height=int(_resolve(args, config, "height", 720)))

    frame = render_frame(store, pose, k, trench, viewport)
    text = serialize_frame(frame)
    print(text)
    if svg_out is not None:
        Path(svg_out).write_text(emit_svg(frame), encoding="utf-8")
        _say(f"SVG written to {svg_out}")
    _say(f"{len(frame.primitives)} primitive(s) rendered")
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument plumbing

def _parse_pair(raw: str, name: str) -> tuple[float, float]:
    parts = str(raw).split(",")
    if len(parts) != 2:
        raise UsageError(f"{name} must be 'a,b', got {raw!r}")
    try:
        return float(parts[0]), float(parts[1])
    except ValueError as exc:
        raise UsageError(f"{name} has a non-numeric part: {raw!r}") from exc


def _parse_triple(raw: str, name: str) -> tuple[float, float, float]:
    parts = str(raw).split(",")
    if len(parts) != 3:
        raise UsageError(f"{name} must be 'a,b,c', got {raw!r}")
    try:
        return float(parts[0]), float(parts[1]), float(parts[2])
    except ValueError as exc:
        raise UsageError(f"{name} has a non-numeric part: {raw!r}") from exc


def build_parser() -> _Parser:
    parser = _Parser(prog="arpps", description=__doc__)
    parser.add_argument("--config", help="JSON config file; flags override it")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a synthetic pipe network")
    p.add_argument("--seed", type=int)
    p.add_argument("--points", type=int)
    p.add_argument("--extent", type=float)
    p.add_argument("--center", help="lon,lat,alt")
    p.add_argument("--out")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("validate", help="check referential integrity of CSVs")
    p.add_argument("--data")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("serve", help="host the pipe query service")
    p.add_argument("--data")
    p.add_argument("--address")
    p.add_argument("--port", type=int)
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("query", help="query features offline")
    p.add_argument("--data")
    p.add_argument("--range", help="lon_min,lat_min,lon_max,lat_max")
    p.add_argument("--fix", help="lon,lat")
    p.add_argument("--radius", type=float)
    p.set_defaults(func=cmd_query)

    p = sub.add_parser("match-bench", help="matching network vs oracle benchmark")
    p.add_argument("--m", type=int)
    p.add_argument("--n", type=int)
    p.add_argument("--instances", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--oracle", choices=["auto", "exhaustive", "permutations"])
    p.set_defaults(func=cmd_match_bench)

    p = sub.add_parser("track-sim", help="simulate sensors and track a pose")
    p.add_argument("--profile")
    p.add_argument("--duration", type=float)
    p.add_argument("--rate", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--noise-gyro", dest="noise_gyro", type=float)
    p.add_argument("--noise-accel", dest="noise_accel", type=float)
    p.add_argument("--noise-compass", dest="noise_compass", type=float)
    p.add_argument("--noise-gps", dest="noise_gps", type=float)
    p.add_argument("--radius", type=float)
    p.add_argument("--csv-out", dest="csv_out")
    p.set_defaults(func=cmd_track_sim)

    p = sub.add_parser("render-frame", help="render one overlay frame to JSON")
    p.add_argument("--data")
    p.add_argument("--fix", help="lon,lat,alt")
    p.add_argument("--heading", type=float)
    p.add_argument("--pitch", type=float, help="degrees down from horizontal")
    p.add_argument("--radius", type=float)
    p.add_argument("--trench-mode", dest="trench_mode",
                   choices=[RECTANGULAR, CIRCULAR])
    p.add_argument("--trench-size", dest="trench_size", type=float)
    p.add_argument("--trench-depth", dest="trench_depth", type=float)
    p.add_argument("--ground-elevation", dest="ground_elevation", type=float)
    p.add_argument("--fx", type=float)
    p.add_argument("--fy", type=float)
    p.add_argument("--cx", type=float)
    p.add_argument("--cy", type=float)
    p.add_argument("--width", type=int)
    p.add_argument("--height", type=int)
    p.add_argument("--svg")
    p.set_defaults(func=cmd_render_frame)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        config = _load_config(args.config)
        return args.func(args, config)
    except UsageError as exc:
        _say(f"usage error: {exc}")
        return EXIT_USAGE
    except DataError as exc:
        _say(f"data error: {exc}")
        return EXIT_DATA
    except KeyboardInterrupt:
        return EXIT_OK
    except Exception as exc:  # noqa: BLE001 - last-resort runtime mapping
        _say(f"runtime error: {exc}")
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
