"""GSF container: magic + one-line JSON header + raw little-endian float32.

Layout, byte-exact:

    b"GSF1\\n"
    <canonical JSON header, one line>
    b"\\n"
    nt*nlat*nlon float32 values, little-endian, t-major then lat then lon

The header JSON is canonical (sorted keys, no spaces), so writing the same
stack twice, or rewriting a stack read back from disk, is byte-identical.
"""
from __future__ import annotations

import json
from datetime import datetime, timezone

import numpy as np

from ..errors import HeaderParse, IoFailure, MagicMismatch, PayloadTruncated
from .types import GridSpec, GridStack, TimeAxis

MAGIC = b"GSF1\n"

_HEADER_FIELDS = {"var", "unit", "t0", "dt", "nt",
                  "lat0", "dlat", "nlat", "lon0", "dlon", "nlon"}


def _format_t0(t0: datetime) -> str:
    return t0.astimezone(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def _parse_t0(s: str) -> datetime:
    try:
        return datetime.strptime(s, "%Y-%m-%dT%H:%M:%SZ").replace(tzinfo=timezone.utc)
    except ValueError as e:
        raise HeaderParse(f"bad t0 timestamp {s!r}") from e


def write_gsf(stack: GridStack, path) -> None:
    """Write a GridStack to `path` in the GSF layout above."""
    if not stack.var:
        raise HeaderParse("var must be nonempty")
    header = {
        "var": stack.var,
        "unit": stack.unit,
        "t0": _format_t0(stack.time.t0),
        "dt": stack.time.dt,
        "nt": stack.time.nt,
        "lat0": stack.spec.lat0,
        "dlat": stack.spec.dlat,
        "nlat": stack.spec.nlat,
        "lon0": stack.spec.lon0,
        "dlon": stack.spec.dlon,
        "nlon": stack.spec.nlon,
    }
    line = json.dumps(header, sort_keys=True, separators=(",", ":"))
    payload = np.ascontiguousarray(stack.values, dtype="<f4").tobytes()
    try:
        with open(path, "wb") as f:
            f.write(MAGIC)
            f.write(line.encode("utf-8"))
            f.write(b"\n")
            f.write(payload)
    except OSError as e:
        raise IoFailure(f"cannot write {path}: {e}") from e


def read_gsf(path) -> GridStack:
    """Read a GSF file back into a GridStack (bit-exact payload)."""
    try:
        with open(path, "rb") as f:
            magic = f.read(len(MAGIC))
            if magic != MAGIC:
                raise MagicMismatch(f"{path}: expected {MAGIC!r}, found {magic!r}")
            line = f.readline()
            if not line.endswith(b"\n"):
                raise HeaderParse(f"{path}: header line is not newline-terminated")
            raw = f.read()
    except OSError as e:
        raise IoFailure(f"cannot read {path}: {e}") from e

    try:
        header = json.loads(line.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise HeaderParse(f"{path}: header is not valid JSON: {e}") from e
    if not isinstance(header, dict) or set(header) != _HEADER_FIELDS:
        raise HeaderParse(f"{path}: header fields {sorted(header)} != {sorted(_HEADER_FIELDS)}")
    if not header["var"]:
        raise HeaderParse(f"{path}: var must be nonempty")

    try:
        spec = GridSpec(float(header["lat0"]), float(header["dlat"]), int(header["nlat"]),
                        float(header["lon0"]), float(header["dlon"]), int(header["nlon"]))
        time = TimeAxis(_parse_t0(header["t0"]), int(header["dt"]), int(header["nt"]))
    except (TypeError, ValueError) as e:
        raise HeaderParse(f"{path}: invalid header values: {e}") from e

    n = time.nt * spec.nlat * spec.nlon
    expected = n * 4
    if len(raw) != expected:
        raise PayloadTruncated(expected_bytes=expected, found_bytes=len(raw))
    values = np.frombuffer(raw, dtype="<f4").reshape(time.nt, spec.nlat, spec.nlon)
    return GridStack(spec=spec, time=time, var=header["var"], unit=header["unit"],
                     values=values)
