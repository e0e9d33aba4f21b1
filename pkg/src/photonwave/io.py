"""File formats: provenance headers, state / field / Fock files, tables.

Text files start with ``#`` comment lines.  The first carries the
provenance record and the second a JSON header describing the payload;
comma-delimited numeric rows follow.  Binary files are

    b"PHWV" | uint16 format version | uint32 header length | JSON header | payload

with the payload a little-endian row-major float64 or complex128 array whose
dtype and shape are listed in the header.
"""

from __future__ import annotations

import hashlib
import io as _io
import json
import struct
from pathlib import Path
from typing import Any, Optional, Sequence

import numpy as np

from . import __version__
from .field_synthesis import RSField, SpatialGrid
from .fock_space import FockState, ModeSet
from .momentum_space import MomentumGrid, PhotonWavefunctionK

__all__ = [
    "FORMAT_VERSION",
    "MAGIC",
    "FormatError",
    "config_hash",
    "provenance",
    "write_state",
    "read_state",
    "write_field",
    "read_field",
    "write_fock",
    "read_fock",
    "write_table",
    "read_table",
    "write_json",
    "read_header",
]

MAGIC = b"PHWV"
FORMAT_VERSION = 1
FORMATS = ("text", "json", "binary")


class FormatError(ValueError):
    """Malformed or unsupported file."""


def _canonical(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), default=str)


def config_hash(config: Optional[dict]) -> str:
    """First 16 hex digits of the SHA-256 of the canonical JSON config."""
    return hashlib.sha256(_canonical(config or {}).encode()).hexdigest()[:16]


def provenance(config: Optional[dict] = None, command: str = "library") -> dict:
    return {
        "package": "photonwave",
        "version": __version__,
        "format_version": FORMAT_VERSION,
        "command": command,
        "config_hash": config_hash(config),
    }


# ------------------------------------------------------------ containers


def _fmt_check(fmt: str) -> str:
    if fmt not in FORMATS:
        raise ValueError(f"unknown format {fmt!r}; choose one of {', '.join(FORMATS)}")
    return fmt


def _write_binary(path: Path, header: dict, data: np.ndarray) -> None:
    data = np.ascontiguousarray(data)
    dt = "complex128" if np.iscomplexobj(data) else "float64"
    header = dict(header, dtype=dt, shape=list(data.shape))
    blob = json.dumps(header, sort_keys=True).encode()
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<HI", FORMAT_VERSION, len(blob)))
        fh.write(blob)
        fh.write(data.astype("<" + ("c16" if dt == "complex128" else "f8")).tobytes())


def _read_binary(path: Path) -> tuple[dict, np.ndarray]:
    raw = Path(path).read_bytes()
    if raw[:4] != MAGIC:
        raise FormatError(f"{path}: not a photonwave binary file")
    version, n = struct.unpack("<HI", raw[4:10])
    if version > FORMAT_VERSION:
        raise FormatError(f"{path}: format version {version} is newer than supported {FORMAT_VERSION}")
    header = json.loads(raw[10 : 10 + n])
    dt = np.dtype("<c16" if header["dtype"] == "complex128" else "<f8")
    data = np.frombuffer(raw[10 + n :], dtype=dt)
    shape = tuple(header["shape"])
    if data.size != int(np.prod(shape)):
        raise FormatError(f"{path}: payload size does not match header shape {shape}")
    return header, data.reshape(shape).copy()


def _write_text(path: Path, header: dict, columns: Sequence[str], rows: np.ndarray) -> None:
    prov = header.get("provenance", {})
    buf = _io.StringIO()
    buf.write("# provenance: " + json.dumps(prov, sort_keys=True) + "\n")
    meta = {k: v for k, v in header.items() if k != "provenance"}
    buf.write("# header: " + json.dumps(meta, sort_keys=True) + "\n")
    buf.write("# " + ",".join(columns) + "\n")
    rows = np.atleast_2d(np.asarray(rows, float)) if len(rows) else np.zeros((0, len(columns)))
    np.savetxt(buf, rows, delimiter=",", fmt="%.17g")
    Path(path).write_text(buf.getvalue())


def _read_text(path: Path) -> tuple[dict, list, np.ndarray]:
    lines = Path(path).read_text().splitlines()
    header: dict = {}
    columns: list = []
    body = []
    for line in lines:
        if line.startswith("# provenance: "):
            header["provenance"] = json.loads(line[len("# provenance: ") :])
        elif line.startswith("# header: "):
            header.update(json.loads(line[len("# header: ") :]))
        elif line.startswith("#"):
            columns = [c.strip() for c in line[1:].split(",")]
        elif line.strip():
            body.append(line)
    if "kind" not in header:
        raise FormatError(f"{path}: missing header line")
    rows = np.loadtxt(body, delimiter=",", ndmin=2) if body else np.zeros((0, len(columns)))
    return header, columns, rows


def _write_json(path: Path, header: dict, columns: Sequence[str], rows: np.ndarray) -> None:
    doc = dict(header)
    doc["columns"] = list(columns)
    doc["rows"] = np.asarray(rows, float).tolist()
    Path(path).write_text(json.dumps(doc, indent=1, sort_keys=True) + "\n")


def _read_any(path: Path) -> tuple[dict, list, np.ndarray, str]:
    path = Path(path)
    with open(path, "rb") as fh:
        head = fh.read(4)
    if head == MAGIC:
        h, data = _read_binary(path)
        return h, h.get("columns", []), data, "binary"
    text = path.read_text()
    if text.lstrip().startswith("{"):
        doc = json.loads(text)
        rows = np.asarray(doc.pop("rows"), float)
        cols = doc.pop("columns")
        return doc, cols, rows, "json"
    h, cols, rows = _read_text(path)
    return h, cols, rows, "text"


def read_header(path) -> dict:
    return _read_any(Path(path))[0]


def _expect_kind(header: dict, kind: str, path) -> None:
    if header.get("kind") != kind:
        raise FormatError(f"{path}: expected a {kind!r} file, found {header.get('kind')!r}")


def _emit(path, fmt, header, columns, rows, packed=None):
    fmt = _fmt_check(fmt)
    path = Path(path)
    if fmt == "binary":
        _write_binary(path, dict(header, columns=list(columns)), rows if packed is None else packed)
    elif fmt == "json":
        _write_json(path, header, columns, rows)
    else:
        _write_text(path, header, columns, rows)
    return path


# ------------------------------------------------------------ states

STATE_COLUMNS = ["kx", "ky", "kz", "weight", "re_f_plus", "im_f_plus", "re_f_minus", "im_f_minus"]


def write_state(path, f: PhotonWavefunctionK, fmt: str = "text", prov: Optional[dict] = None):
    header = {"kind": "state", "grid": f.grid.metadata(), "normalized": bool(f.normalized), "provenance": prov or provenance()}
    g = f.grid
    rows = np.column_stack(
        [g.nodes, g.weights, f.f_plus.real, f.f_plus.imag, f.f_minus.real, f.f_minus.imag]
    )
    return _emit(path, fmt, header, STATE_COLUMNS, rows)


def read_state(path) -> PhotonWavefunctionK:
    header, _, rows, _ = _read_any(Path(path))
    _expect_kind(header, "state", path)
    rows = np.asarray(rows, float)
    if rows.ndim != 2 or rows.shape[1] != len(STATE_COLUMNS):
        raise FormatError(f"{path}: state rows need {len(STATE_COLUMNS)} columns")
    meta = header["grid"]
    shape = tuple(meta.get("shape") or ()) or None
    grid = MomentumGrid(rows[:, :3], rows[:, 3], meta["family"], meta.get("params", {}), shape)
    return PhotonWavefunctionK(
        grid, rows[:, 4] + 1j * rows[:, 5], rows[:, 6] + 1j * rows[:, 7], normalized=bool(header.get("normalized"))
    )


# ------------------------------------------------------------ fields

FIELD_COLUMNS = ["x", "y", "z", "re_Fx", "im_Fx", "re_Fy", "im_Fy", "re_Fz", "im_Fz"]


def write_field(path, F: RSField, fmt: str = "binary", prov: Optional[dict] = None):
    """Snapshot of ``F``; binary stores the ``(Nx, Ny, Nz, 3)`` complex array."""
    header = {"kind": "field", "grid": F.grid.metadata(), "t": F.t, "provenance": prov or provenance()}
    r = F.grid.positions().reshape(-1, 3)
    v = F.F.reshape(-1, 3)
    rows = np.column_stack([r, v[:, 0].real, v[:, 0].imag, v[:, 1].real, v[:, 1].imag, v[:, 2].real, v[:, 2].imag])
    return _emit(path, fmt, header, FIELD_COLUMNS, rows, packed=F.F)


def read_field(path) -> RSField:
    header, _, data, kind = _read_any(Path(path))
    _expect_kind(header, "field", path)
    g = header["grid"]
    grid = SpatialGrid(tuple(g["origin"]), tuple(g["spacing"]), tuple(g["shape"]), g["periodic"], g["bloch"])
    if kind == "binary":
        F = data
    else:
        rows = np.asarray(data, float)
        if rows.shape != (grid.size, len(FIELD_COLUMNS)):
            raise FormatError(f"{path}: expected {grid.size} rows of {len(FIELD_COLUMNS)} columns")
        F = (rows[:, 3::2] + 1j * rows[:, 4::2]).reshape(grid.shape + (3,))
    return RSField(grid, F, float(header.get("t", 0.0)))


# ------------------------------------------------------------ Fock states


def write_fock(path, state: FockState, fmt: str = "text", prov: Optional[dict] = None, threshold: float = 0.0):
    """Records ``(n_1..n_M, re, im)`` for amplitudes above ``threshold``."""
    header = {
        "kind": "fock",
        "modes": state.modes.metadata(),
        "n_max": state.n_max,
        "provenance": prov or provenance(),
    }
    M = len(state.modes)
    cols = [f"n{i + 1}" for i in range(M)] + ["re", "im"]
    keep = np.abs(state.amplitudes) > threshold
    t = state.basis.tuples[keep]
    a = state.amplitudes[keep]
    rows = np.column_stack([t.astype(float), a.real, a.imag]) if len(a) else np.zeros((0, M + 2))
    return _emit(path, fmt, header, cols, rows)


def read_fock(path) -> FockState:
    header, _, rows, _ = _read_any(Path(path))
    _expect_kind(header, "fock", path)
    m = header["modes"]
    modes = ModeSet(np.asarray(m["k"]), np.asarray(m["helicity"]), np.asarray(m["weights"]))
    M = len(modes)
    rows = np.asarray(rows, float).reshape(-1, M + 2)
    amps = {}
    for row in rows:
        occ = tuple(int(round(x)) for x in row[:M])
        amps[occ] = amps.get(occ, 0) + complex(row[M], row[M + 1])
    return FockState.from_dict(modes, int(header["n_max"]), amps)


# ------------------------------------------------------------ tables


def write_table(path, columns: Sequence[str], rows, fmt: str = "text", kind: str = "table", meta: Optional[dict] = None, prov: Optional[dict] = None):
    """Generic numeric table with units or notes in ``meta``."""
    rows = np.asarray(rows, float).reshape(-1, len(columns))
    header = {"kind": kind, "meta": meta or {}, "provenance": prov or provenance()}
    return _emit(path, fmt, header, columns, rows)


def read_table(path) -> tuple[dict, list, np.ndarray]:
    header, cols, rows, _ = _read_any(Path(path))
    return header, cols, np.asarray(rows, float).reshape(-1, max(1, len(cols)))


def write_json(path, payload: dict, prov: Optional[dict] = None):
    doc = {"provenance": prov or provenance(), **payload}
    Path(path).write_text(json.dumps(doc, indent=1, sort_keys=True, default=float) + "\n")
    return Path(path)
