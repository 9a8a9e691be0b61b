# modules/records.py

"""Plot-ready output: snapshots, gage series, run manifests, convergence tables."""

import json
import os
from dataclasses import dataclass
from typing import Dict, List, Tuple

import numpy as np

from core.errors import OutputError
from core.log import log
from core.mesh import CartesianGrid
from core.state import PrimitiveState
from models import ErrorReport, RunManifest

SNAPSHOT_COLUMNS = ("x1", "x2", "h", "H", "b", "v1", "v2")


@dataclass
class Snapshot:
    t: float
    nx: int
    ny: int
    dx: float
    g: float
    # (ny, nx) arrays keyed by SNAPSHOT_COLUMNS
    fields: Dict[str, np.ndarray]


def snapshot_from_state(prim: PrimitiveState, grid: CartesianGrid, t: float, g: float) -> Snapshot:
    sl = grid.interior
    x, y = grid.cell_centers(with_ghosts=False)
    fields = {"x1": x, "x2": y}
    for name in ("h", "H", "b", "v1", "v2"):
        fields[name] = np.array(getattr(prim, name)[sl])
    return Snapshot(t=t, nx=grid.nx, ny=grid.ny, dx=grid.dx, g=g, fields=fields)


class RecordWriter:
    """Writes the files of one run under ``directory``."""

    def __init__(self, directory: str, formats: List[str] = ("txt",), digits: int = 17):
        self.directory = directory
        self.formats = list(formats)
        self.fmt = f"%.{digits}g"
        self.files: List[str] = []
        try:
            os.makedirs(self.directory, exist_ok=True)
        except OSError as e:
            raise OutputError(f"cannot create output directory {directory}: {e}") from e

    def _path(self, name: str) -> str:
        return os.path.join(self.directory, name)

    def write_snapshot(self, snap: Snapshot, index: int) -> List[str]:
        stem = f"snapshot_{index:03d}"
        written = []
        try:
            if "txt" in self.formats:
                path = self._path(stem + ".txt")
                rows = np.column_stack([snap.fields[c].ravel() for c in SNAPSHOT_COLUMNS])
                header = (f"t nx ny dx g\n{float(snap.t)!r} {snap.nx} {snap.ny} {float(snap.dx)!r} {float(snap.g)!r}\n"
                          + " ".join(SNAPSHOT_COLUMNS))
                np.savetxt(path, rows, fmt=self.fmt, header=header)
                written.append(path)
            if "npz" in self.formats:
                path = self._path(stem + ".npz")
                np.savez(path, t=snap.t, nx=snap.nx, ny=snap.ny, dx=snap.dx, g=snap.g, **snap.fields)
                written.append(path)
        except OSError as e:
            raise OutputError(f"failed to write snapshot {stem}: {e}") from e
        self.files.extend(written)
        log("records", f"snapshot t={snap.t:.6g} -> {', '.join(os.path.basename(p) for p in written)}")
        return written

    def write_gage(self, name: str, series: List[Tuple[float, float]]) -> str:
        path = self._path(f"{name}.txt")
        try:
            np.savetxt(path, np.asarray(series, dtype=float).reshape(-1, 2), fmt=self.fmt,
                       header="t H-H0")
        except OSError as e:
            raise OutputError(f"failed to write gage series {name}: {e}") from e
        self.files.append(path)
        return path

    def write_manifest(self, manifest: RunManifest) -> str:
        path = self._path("manifest.json")
        try:
            with open(path, "w", encoding="utf-8") as f:
                json.dump(manifest.model_dump(), f, indent=2)
        except OSError as e:
            raise OutputError(f"failed to write manifest: {e}") from e
        return path

    def write_convergence(self, scenario: str, rows: List[ErrorReport]) -> str:
        path = self._path(f"convergence_{scenario}.txt")

        def cell(v):
            return "" if v is None else f"{v:.4f}"

        lines = ["# grid\tdx\tLinf\tEOC\tL1\tEOC\tL2\tEOC"]
        for r in rows:
            lines.append("\t".join([
                f"{r.nx}x{r.nx}", f"{r.dx:.17g}",
                f"{r.linf:.4e}", cell(r.eoc_linf),
                f"{r.l1:.4e}", cell(r.eoc_l1),
                f"{r.l2:.4e}", cell(r.eoc_l2),
            ]))
        try:
            with open(path, "w", encoding="utf-8") as f:
                f.write("\n".join(lines) + "\n")
        except OSError as e:
            raise OutputError(f"failed to write convergence table: {e}") from e
        self.files.append(path)
        return path


def read_snapshot(path: str) -> Snapshot:
    try:
        if path.endswith(".npz"):
            with np.load(path) as data:
                fields = {c: data[c] for c in SNAPSHOT_COLUMNS}
                return Snapshot(t=float(data["t"]), nx=int(data["nx"]), ny=int(data["ny"]),
                                dx=float(data["dx"]), g=float(data["g"]), fields=fields)
        with open(path, "r", encoding="utf-8") as f:
            f.readline()
            t, nx, ny, dx, g = f.readline().lstrip("#").split()
        rows = np.loadtxt(path, comments="#", ndmin=2)
    except (OSError, ValueError) as e:
        raise OutputError(f"cannot read snapshot {path}: {e}") from e
    nx, ny = int(nx), int(ny)
    fields = {c: rows[:, k].reshape(ny, nx) for k, c in enumerate(SNAPSHOT_COLUMNS)}
    return Snapshot(t=float(t), nx=nx, ny=ny, dx=float(dx), g=float(g), fields=fields)


def read_gage(path: str) -> np.ndarray:
    try:
        return np.loadtxt(path, comments="#", ndmin=2)
    except (OSError, ValueError) as e:
        raise OutputError(f"cannot read gage series {path}: {e}") from e


def read_manifest(path: str) -> RunManifest:
    try:
        with open(path, "r", encoding="utf-8") as f:
            return RunManifest(**json.load(f))
    except (OSError, ValueError) as e:
        raise OutputError(f"cannot read manifest {path}: {e}") from e
