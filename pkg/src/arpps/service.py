"""HTTP service exposing the pipe store.

Endpoints:
    GET /pipes?range=<lon_min>,<lat_min>,<lon_max>,<lat_max>
        -> 200 application/geo+json FeatureCollection, or 400 text/plain
           naming the bad token (no partial document is ever sent).
    GET /health
        -> 200 application/json {status, points, lines, epoch}

Responses are a pure function of (store, range): features are ordered
points-then-lines, ascending object_id, and coordinates are serialized at
full float precision, so identical requests yield identical bodies.
"""

from __future__ import annotations

import json
import math
import threading
from dataclasses import asdict, dataclass
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from urllib.parse import parse_qs, urlparse

from .geodesy import BBox
from .pipe_model import PipeLine, PipePoint
from .store import FeatureId, FeatureKind, SpatialStore

GEOJSON_MEDIA_TYPE = "application/geo+json"


class RangeParseError(ValueError):
    pass


@dataclass(frozen=True)
class RangeParam:
    raw: str
    parsed: BBox


def parse_range(raw: str) -> RangeParam:
    """Parse 'lon_min,lat_min,lon_max,lat_max' into a validated BBox."""
    tokens = raw.split(",")
    if len(tokens) != 4:
        raise RangeParseError(
            f"range must have exactly 4 comma-separated values, got {len(tokens)}: {raw!r}")
    values = []
    for tok in tokens:
        try:
            v = float(tok)
        except ValueError:
            raise RangeParseError(f"range token {tok!r} is not a number") from None
        if not math.isfinite(v):
            raise RangeParseError(f"range token {tok!r} is not finite")
        values.append(v)
    lon_min, lat_min, lon_max, lat_max = values
    if lon_min > lon_max:
        raise RangeParseError(f"lon_min {lon_min} exceeds lon_max {lon_max}")
    if lat_min > lat_max:
        raise RangeParseError(f"lat_min {lat_min} exceeds lat_max {lat_max}")
    return RangeParam(raw=raw, parsed=BBox(lon_min, lat_min, lon_max, lat_max))


def _point_feature(p: PipePoint) -> dict:
    props = asdict(p)
    del props["x"], props["y"]
    return {
        "type": "Feature",
        "id": f"point-{p.object_id}",
        "geometry": {"type": "Point", "coordinates": [p.x, p.y]},
        "properties": props,
    }


def _line_feature(ln: PipeLine) -> dict:
    props = asdict(ln)
    props["line_type"] = ln.line_type.code
    for k in ("start_x", "start_y", "end_x", "end_y"):
        del props[k]
    return {
        "type": "Feature",
        "id": f"line-{ln.object_id}",
        "geometry": {"type": "LineString",
                     "coordinates": [[ln.start_x, ln.start_y], [ln.end_x, ln.end_y]]},
        "properties": props,
    }


def feature_document(points: list[PipePoint], lines: list[PipeLine]) -> dict:
    """GeoJSON FeatureCollection; points first, then lines, ascending id."""
    features = [_point_feature(p) for p in sorted(points, key=lambda p: p.object_id)]
    features += [_line_feature(ln) for ln in sorted(lines, key=lambda ln: ln.object_id)]
    return {"type": "FeatureCollection", "features": features}


def encode_geojson(points: list[PipePoint], lines: list[PipeLine]) -> str:
    return json.dumps(feature_document(points, lines), separators=(",", ":"))


def handle_pipes_request(store: SpatialStore, rng: RangeParam) -> dict:
    """Document with exactly the features intersecting the parsed range."""
    ids = store.query_bbox(rng.parsed)
    points = [store.points[f.object_id] for f in ids if f.kind == FeatureKind.POINT]
    lines = [store.lines[f.object_id] for f in ids if f.kind == FeatureKind.LINE]
    return feature_document(points, lines)


class _Handler(BaseHTTPRequestHandler):
    protocol_version = "HTTP/1.1"
    server_version = "arpps"

    def _send(self, status: int, content_type: str, body: bytes) -> None:
        self.send_response(status)
        self.send_header("Content-Type", content_type)
        self.send_header("Content-Length", str(len(body)))
        self.send_header("Access-Control-Allow-Origin", "*")
        self.end_headers()
        self.wfile.write(body)

    def do_GET(self) -> None:  # noqa: N802 (http.server API)
        url = urlparse(self.path)
        store: SpatialStore = self.server.store  # type: ignore[attr-defined]
        if url.path == "/health":
            body = json.dumps({
                "status": "ok",
                "points": len(store.points),
                "lines": len(store.lines),
                "epoch": store.epoch,
            }).encode()
            self._send(200, "application/json", body)
        elif url.path == "/pipes":
            raw = parse_qs(url.query).get("range", [None])[0]
            if raw is None:
                self._send(400, "text/plain; charset=utf-8",
                           b"missing required query parameter 'range'")
                return
            try:
                rng = parse_range(raw)
            except RangeParseError as exc:
                self._send(400, "text/plain; charset=utf-8", str(exc).encode())
                return
            doc = handle_pipes_request(store, rng)
            self._send(200, GEOJSON_MEDIA_TYPE, json.dumps(doc, separators=(",", ":")).encode())
        else:
            self._send(404, "text/plain; charset=utf-8", b"not found")

    def log_message(self, fmt: str, *args) -> None:
        if not getattr(self.server, "quiet", False):
            super().log_message(fmt, *args)


class ServiceHandle:
    """Running HTTP service; shutdown() drains in-flight requests."""

    def __init__(self, server: ThreadingHTTPServer, thread: threading.Thread):
        self._server = server
        self._thread = thread

    @property
    def address(self) -> str:
        return self._server.server_address[0]

    @property
    def port(self) -> int:
        return self._server.server_address[1]

    @property
    def url(self) -> str:
        return f"http://{self.address}:{self.port}"

    def replace_store(self, store: SpatialStore) -> None:
        """Atomically swap the served store; epoch advances past the old one."""
        store.epoch = self._server.store.epoch + 1  # type: ignore[attr-defined]
        self._server.store = store  # type: ignore[attr-defined]

    def shutdown(self) -> None:
        self._server.shutdown()
        self._server.server_close()
        self._thread.join()


def serve(store: SpatialStore, address: str = "127.0.0.1", port: int = 0,
          quiet: bool = False) -> ServiceHandle:
    """Start serving in a background thread; port 0 picks a free port."""
    server = ThreadingHTTPServer((address, port), _Handler)
    server.store = store  # type: ignore[attr-defined]
    server.quiet = quiet  # type: ignore[attr-defined]
    thread = threading.Thread(target=server.serve_forever, name="arpps-service", daemon=True)
    thread.start()
    return ServiceHandle(server, thread)
