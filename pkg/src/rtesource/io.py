"""File formats: boundary data, grid fields, result bundles.

Every binary file is a one-line JSON header (UTF-8, newline terminated)
followed by a flat little-endian float64 payload in row-major order.
Complex fields interleave real and imaginary parts.
"""

import json
import os

import numpy as np

from .errors import FormatError
from .forward import BoundaryData

BOUNDARY_MAGIC = "rtesource-boundary-v1"
FIELD_MAGIC = "rtesource-field-v1"


def _write(path, header, payload):
    with open(path, "wb") as fh:
        fh.write((json.dumps(header) + "\n").encode())
        fh.write(np.ascontiguousarray(payload, dtype="<f8").tobytes())


def _read(path, magic):
    with open(path, "rb") as fh:
        line = fh.readline()
        try:
            header = json.loads(line.decode())
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise FormatError(f"{path}: unreadable header") from exc
        raw = fh.read()
    if header.get("magic") != magic:
        raise FormatError(f"{path}: bad magic {header.get('magic')!r}")
    data = np.frombuffer(raw, dtype="<f8")
    return header, data


def save_boundary_data(path, bd):
    header = {"magic": BOUNDARY_MAGIC, "n_boundary": int(bd.n_boundary),
              "n_dirs": int(bd.n_dirs)}
    _write(path, header, bd.values.ravel())


def load_boundary_data(path):
    header, data = _read(path, BOUNDARY_MAGIC)
    nb, nd = header["n_boundary"], header["n_dirs"]
    if data.size != nb * nd:
        raise FormatError(f"{path}: payload length {data.size}, "
                          f"expected {nb * nd}")
    vals = data.reshape(nb, nd).copy()
    beta = 2.0 * np.pi * np.arange(nb) / nb
    angles = 2.0 * np.pi * np.arange(nd) / nd
    return BoundaryData(values=vals, boundary_angles=beta,
                        direction_angles=angles)


def save_field(path, field, grid):
    """Grid field dump: float64 or complex128 values in node order."""
    field = np.asarray(field)
    header = {"magic": FIELD_MAGIC, "n": int(grid.n),
              "spacing": grid.spacing, "margin": grid.margin,
              "complex": bool(np.iscomplexobj(field)),
              "shape": list(field.shape)}
    payload = (np.stack([field.real, field.imag], axis=-1).ravel()
               if header["complex"] else field.ravel())
    _write(path, header, payload)


def load_field(path):
    header, data = _read(path, FIELD_MAGIC)
    shape = tuple(header["shape"])
    count = int(np.prod(shape))
    if header["complex"]:
        if data.size != 2 * count:
            raise FormatError(f"{path}: bad complex payload length")
        pair = data.reshape(shape + (2,))
        field = pair[..., 0] + 1j * pair[..., 1]
    else:
        if data.size != count:
            raise FormatError(f"{path}: bad payload length")
        field = data.reshape(shape).copy()
    return field, header


def write_result_bundle(outdir, result, grid, f_true=None, metrics=None):
    """Reconstruction bundle: source field, modes, diagnostics, section."""
    os.makedirs(outdir, exist_ok=True)
    save_field(os.path.join(outdir, "f_rec.field"), result.f_rec, grid)
    for name, mode in result.modes.items():
        save_field(os.path.join(outdir, f"mode_{name}.field"), mode, grid)
    if f_true is not None:
        save_field(os.path.join(outdir, "f_true.field"), f_true, grid)
    scalars = {k: v for k, v in (metrics or {}).items()
               if k != "cross_section"}
    with open(os.path.join(outdir, "diagnostics.json"), "w") as fh:
        json.dump(result.diagnostics | scalars, fh, indent=2, default=float)
    if metrics and "cross_section" in metrics:
        t, fr, ft = metrics["cross_section"]
        with open(os.path.join(outdir, "cross_section.csv"), "w") as fh:
            fh.write("t,f_rec,f_true\n")
            for row in zip(t, fr, ft):
                fh.write(",".join(f"{v:.10g}" for v in row) + "\n")


def write_pgm(path, field, lo=None, hi=None):
    """Dependency-free grayscale raster (binary PGM) with a sidecar JSON."""
    path = os.fspath(path)
    field = np.asarray(field, dtype=float)
    lo = float(np.nanmin(field)) if lo is None else lo
    hi = float(np.nanmax(field)) if hi is None else hi
    span = hi - lo if hi > lo else 1.0
    img = np.clip((field - lo) / span * 255.0, 0, 255).astype(np.uint8)
    with open(path, "wb") as fh:
        fh.write(f"P5\n{img.shape[1]} {img.shape[0]}\n255\n".encode())
        fh.write(img.tobytes())
    with open(path + ".json", "w") as fh:
        json.dump({"min": lo, "max": hi}, fh)
