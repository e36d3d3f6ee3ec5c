"""Binary trajectory container.

Layout (all integers and floats little-endian)::

    offset 0    8 bytes   magic b"GKDVTRJ1"
    offset 8    8 bytes   uint64 H, length of the header in bytes
    offset 16   H bytes   UTF-8 JSON header
    then        8*T bytes float64 times, T = header["n_snapshots"]
    then        8*T*N     float64 snapshot rows, N = header["n_points"], row-major

The header carries ``format_version``, ``box_length``, ``n_points``,
``n_snapshots`` and a ``provenance`` object.  Keys are sorted so identical
trajectories serialize to identical bytes.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from .solver import Trajectory
from .spectral import Grid

__all__ = ["MAGIC", "save_trajectory", "load_trajectory"]

MAGIC = b"GKDVTRJ1"
FORMAT_VERSION = 1


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def save_trajectory(traj: Trajectory, path) -> Path:
    path = Path(path)
    header = {
        "format_version": FORMAT_VERSION,
        "box_length": traj.grid.box_length,
        "n_points": traj.grid.n_points,
        "n_snapshots": len(traj),
        "provenance": _jsonable(traj.provenance),
    }
    hb = json.dumps(header, sort_keys=True, separators=(",", ":")).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<Q", len(hb)))
        fh.write(hb)
        fh.write(np.ascontiguousarray(traj.times, dtype="<f8").tobytes())
        fh.write(np.ascontiguousarray(traj.snapshots, dtype="<f8").tobytes())
    return path


def load_trajectory(path) -> Trajectory:
    data = Path(path).read_bytes()
    if data[:8] != MAGIC:
        raise ValueError(f"{path}: not a trajectory container (bad magic)")
    (hlen,) = struct.unpack("<Q", data[8:16])
    header = json.loads(data[16 : 16 + hlen].decode("utf-8"))
    if header.get("format_version") != FORMAT_VERSION:
        raise ValueError(f"{path}: unsupported format version {header.get('format_version')}")
    t, n = header["n_snapshots"], header["n_points"]
    body = np.frombuffer(data, dtype="<f8", offset=16 + hlen)
    if body.size != t * (n + 1):
        raise ValueError(f"{path}: expected {t * (n + 1)} float64 values, found {body.size}")
    grid = Grid(header["box_length"], n)
    return Trajectory(grid, body[:t].astype(float), body[t:].reshape(t, n).astype(float), header["provenance"])
