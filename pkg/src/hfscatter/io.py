"""Deterministic run artifacts: binary checkpoints, NDJSON/CSV series,
JSON reports.

Checkpoint layout (little-endian): magic "HFSC", version u32, header
length u32, header JSON bytes, then per snapshot: t as f64, K as u32,
weights as f64[K], orbital values as interleaved (re, im) f64 pairs.
No timestamps or absolute paths anywhere; identical inputs produce
byte-identical files.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from .ensemble import OrbitalEnsemble
from .grid import Grid
from .integrator import Trajectory
from .nonlinearity import RhsMode

__all__ = ["write_checkpoint", "read_checkpoint", "write_ndjson",
           "write_csv", "write_report", "CheckpointError", "MAGIC",
           "CHECKPOINT_VERSION"]

MAGIC = b"HFSC"
CHECKPOINT_VERSION = 1


class CheckpointError(ValueError):
    pass


def _dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def write_checkpoint(path: str | Path, traj: Trajectory, header: dict) -> None:
    header = dict(header)
    header["n_points"] = traj.grid.n
    header["length"] = traj.grid.length
    blob = _dumps(header).encode()
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", CHECKPOINT_VERSION))
        fh.write(struct.pack("<I", len(blob)))
        fh.write(blob)
        for snap in traj.snapshots:
            K = snap.rank
            fh.write(struct.pack("<d", snap.t))
            fh.write(struct.pack("<I", K))
            fh.write(snap.weights.astype("<f8").tobytes())
            inter = np.empty((K, traj.grid.n, 2))
            inter[:, :, 0] = snap.orbitals.real
            inter[:, :, 1] = snap.orbitals.imag
            fh.write(inter.astype("<f8").tobytes())


def read_checkpoint(path: str | Path) -> tuple[dict, Trajectory]:
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != MAGIC:
            raise CheckpointError(f"bad magic {magic!r}")
        version, = struct.unpack("<I", fh.read(4))
        if version != CHECKPOINT_VERSION:
            raise CheckpointError(f"unsupported version {version}")
        hlen, = struct.unpack("<I", fh.read(4))
        header = json.loads(fh.read(hlen).decode())
        grid = Grid(header["n_points"], header["length"])
        snapshots = []
        while True:
            head = fh.read(8)
            if not head:
                break
            t, = struct.unpack("<d", head)
            K, = struct.unpack("<I", fh.read(4))
            weights = np.frombuffer(fh.read(8 * K), dtype="<f8").copy()
            flat = np.frombuffer(fh.read(16 * K * grid.n), dtype="<f8")
            vals = flat.reshape(K, grid.n, 2)
            orbitals = vals[:, :, 0] + 1j * vals[:, :, 1]
            snapshots.append(OrbitalEnsemble(grid, weights, orbitals, t=t))
    mode = RhsMode(header.get("mode", "linear"))
    return header, Trajectory(grid=grid, snapshots=snapshots, mode=mode,
                              metadata=dict(header))


def write_ndjson(path: str | Path, header: dict, records: list) -> None:
    with open(path, "w") as fh:
        fh.write(_dumps({"type": "header", **header}) + "\n")
        for rec in records:
            fh.write(_dumps({"type": "record", **rec.as_dict()}) + "\n")


def read_ndjson(path: str | Path) -> tuple[dict, list[dict]]:
    header = None
    rows = []
    with open(path) as fh:
        for line in fh:
            obj = json.loads(line)
            if obj.get("type") == "header":
                header = obj
            else:
                rows.append(obj)
    return header or {}, rows


_CSV_COLUMNS = ("t", "sup_norm", "l2_mass", "h10_x", "h01_z", "gram_drift",
                "boundary_mass_fraction")


def write_csv(path: str | Path, records: list, header: dict | None = None) -> None:
    with open(path, "w") as fh:
        if header:
            fh.write("# " + _dumps(header) + "\n")
        fh.write(",".join(_CSV_COLUMNS) + "\n")
        for rec in records:
            row = rec.as_dict()
            fh.write(",".join(repr(row[c]) for c in _CSV_COLUMNS) + "\n")


def write_report(path: str | Path, report: dict) -> None:
    with open(path, "w") as fh:
        fh.write(json.dumps(report, sort_keys=True, indent=1) + "\n")
