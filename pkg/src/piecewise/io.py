"""CSV/JSON output and the on-disk cache."""
from __future__ import annotations

import csv
import hashlib
import io
import json
import os
from pathlib import Path

SCHEMA_VERSION = 1
CACHE_FORMAT = 1
CACHE_ENV = "PIECEWISE_CACHE_DIR"


class CacheError(ValueError):
    pass


def csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_cell(x) for x in r])
    return buf.getvalue()


def _cell(x):
    if isinstance(x, float):
        return repr(x)
    return x


def json_text(payload: dict) -> str:
    data = {"schema_version": SCHEMA_VERSION}
    data.update(payload)
    return json.dumps(data, sort_keys=True, indent=2, default=_default) + "\n"


def _default(x):
    from fractions import Fraction

    if isinstance(x, Fraction):
        return float(x)
    if isinstance(x, (set, frozenset, tuple)):
        return list(x)
    raise TypeError(f"cannot serialize {type(x).__name__}")


def emit(text: str, out: str | None):
    if out in (None, "-"):
        import sys

        sys.stdout.write(text)
        return
    Path(out).write_text(text, newline="\n")


# ---------------------------------------------------------------------------
# cache


def cache_dir() -> Path:
    d = os.environ.get(CACHE_ENV)
    path = Path(d) if d else Path.home() / ".cache" / "piecewise"
    path.mkdir(parents=True, exist_ok=True)
    return path


def payload_hash(payload: dict) -> str:
    blob = json.dumps(payload, sort_keys=True, separators=(",", ":"), default=_default).encode()
    return hashlib.sha256(blob).hexdigest()


def write_cache(kind: str, name: str, payload: dict, directory: Path | None = None) -> Path:
    """Store ``payload`` under ``<dir>/<kind>-<name>.cache`` with a versioned header line."""
    directory = directory or cache_dir()
    h = payload_hash(payload)
    body = json.dumps(payload, sort_keys=True, separators=(",", ":"), default=_default)
    path = Path(directory) / f"{kind}-{name}.cache"
    path.write_text(f"piecewise-cache format={CACHE_FORMAT} kind={kind} sha256={h}\n{body}\n", newline="\n")
    return path


def read_cache(path) -> tuple:
    """Return ``(kind, payload)``; the stored hash must match the payload."""
    text = Path(path).read_text()
    header, _, body = text.partition("\n")
    fields = dict(part.split("=", 1) for part in header.split()[1:])
    if not header.startswith("piecewise-cache") or int(fields.get("format", -1)) != CACHE_FORMAT:
        raise CacheError(f"{path}: unsupported cache header")
    payload = json.loads(body)
    if payload_hash(payload) != fields.get("sha256"):
        raise CacheError(f"{path}: hash mismatch")
    return fields["kind"], payload


# ---------------------------------------------------------------------------
# payload converters


def ball_payload(ball) -> dict:
    from .labelled_graph import vertex_to_json

    return {"center": vertex_to_json(ball.center), "radius": ball.radius,
            "vertices": [[vertex_to_json(v), ball.distance[v]] for v in ball.vertices],
            "volumes": list(ball.volumes)}


def distribution_payload(dist) -> dict:
    from .walk_engine import _encode

    return {"atoms": [[_encode(dist.group, g), p] for g, p in dist.sorted_items()], "defect": dist.defect}


def profile_payload(table) -> dict:
    return {"kind": table.kind, "s_phi": table.s_phi, "notes": list(table.notes),
            "points": [[pt.v, pt.value, bool(pt.exact), pt.witness] for pt in table.points]}


def profile_from_payload(data: dict):
    from .profile_engine import ProfilePoint, ProfileTable

    pts = [ProfilePoint(v, val, w, ex) for v, val, ex, w in data["points"]]
    return ProfileTable(data["kind"], pts, data["s_phi"], list(data["notes"]))
