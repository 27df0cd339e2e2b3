"""File formats: field files, coefficient files, eigenvalue tables, reports.

Field file: one JSON object with a header, the grid description and the
samples of (u_r, u_theta, u_phi) as base64 little-endian float64 in array
order (n_r, n_theta, n_phi, 3), radial index slowest and component fastest.
The grid is rebuilt from (sigma, nr, ntheta, nphi), which fixes the nodes.
"""
import base64
import binascii
import csv
import json

import numpy as np

from .config import load_json
from .errors import ParseError
from .fields import VectorShellField
from .sphgrid import build_shell_grid

FIELD_FORMAT = "stokespec-field"
COEFF_FORMAT = "stokespec-coefficients"
TABLE_COLUMNS = ("rank", "lambda", "mu", "family", "l", "j", "multiplicity")


def _version():
    from . import __version__
    return __version__


def header(command, config=None):
    return {"generator": "stokespec", "version": _version(), "command": command,
            "config": dict(config) if config else {}}


def _dump(path, doc):
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=1, sort_keys=True)
        fh.write("\n")


def field_document(u, lmax, head):
    data = np.ascontiguousarray(np.moveaxis(u.values, 0, -1), dtype="<f8")
    return {
        "format": FIELD_FORMAT,
        "header": head,
        "grid": {"sigma": u.grid.sigma, "nr": u.grid.radial.n,
                 "ntheta": u.grid.sphere.n_theta, "nphi": u.grid.sphere.n_phi},
        "lmax": int(lmax),
        "frame": "spherical",
        "components": ["u_r", "u_theta", "u_phi"],
        "shape": list(data.shape),
        "dtype": "<f8",
        "data": base64.b64encode(data.tobytes()).decode("ascii"),
    }


def write_field(path, u, lmax, head):
    _dump(path, field_document(u, lmax, head))


def _require(doc, key, kind, path):
    if key not in doc:
        raise ParseError(f"{path}: missing key {key!r}")
    val = doc[key]
    if not isinstance(val, kind) or isinstance(val, bool) and kind is not bool:
        raise ParseError(f"{path}: key {key!r} has the wrong type")
    return val


def read_field(path):
    """Load a field file; returns (VectorShellField, document without data)."""
    doc = load_json(path)
    if not isinstance(doc, dict) or doc.get("format") != FIELD_FORMAT:
        raise ParseError(f"{path}: not a {FIELD_FORMAT} document")
    g = _require(doc, "grid", dict, path)
    if _require(doc, "frame", str, path) != "spherical":
        raise ParseError(f"{path}: unsupported frame {doc['frame']!r}")
    sigma = float(_require(g, "sigma", (int, float), path))
    nr, nt, nphi = (int(_require(g, k, int, path)) for k in ("nr", "ntheta", "nphi"))
    grid = build_shell_grid(sigma, nr, nt, nphi)
    try:
        raw = base64.b64decode(_require(doc, "data", str, path), validate=True)
    except (binascii.Error, ValueError) as exc:
        raise ParseError(f"{path}: payload is not valid base64 ({exc})") from None
    shape = (nr, nt, nphi, 3)
    if len(raw) != 8 * nr * nt * nphi * 3:
        raise ParseError(f"{path}: payload holds {len(raw)} bytes, grid needs {8 * nr * nt * nphi * 3}")
    vals = np.frombuffer(raw, dtype="<f8").reshape(shape).astype(float)
    if not np.all(np.isfinite(vals)):
        raise ParseError(f"{path}: payload contains non-finite values")
    meta = {k: v for k, v in doc.items() if k != "data"}
    return VectorShellField(grid, np.moveaxis(vals, -1, 0)), meta


def write_coefficients(path, coeffs, lmax, grid, head, name):
    """Per-radius harmonic coefficients; row i belongs to radial node i,
    column l*l + l + k to Z_l^k."""
    _dump(path, {
        "format": COEFF_FORMAT,
        "header": head,
        "name": name,
        "grid": grid.spec() | {"sigma": grid.sigma},
        "lmax": int(lmax),
        "layout": "index l*l + l + k",
        "radii": [float(r) for r in grid.radial.nodes],
        "coefficients": np.asarray(coeffs, dtype=float).tolist(),
    })


def read_coefficients(path):
    doc = load_json(path)
    if not isinstance(doc, dict) or doc.get("format") != COEFF_FORMAT:
        raise ParseError(f"{path}: not a {COEFF_FORMAT} document")
    return np.array(doc["coefficients"], dtype=float), doc


def table_rows(table):
    for rank, e in enumerate(table.entries, 1):
        yield (rank, e.lam, e.mu, e.family, e.l, e.j, e.multiplicity)


def _fmt(v):
    return format(v, ".17g") if isinstance(v, float) else str(v)


def write_table_csv(path, table, head):
    with open(path, "w", newline="") as fh:
        fh.write(f"# {json.dumps(head, sort_keys=True)}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TABLE_COLUMNS)
        for row in table_rows(table):
            w.writerow([_fmt(v) for v in row])


def write_table_json(path, table, head):
    _dump(path, {
        "header": head,
        "sigma": table.domain.sigma,
        "lmax": table.lmax,
        "truncated": table.truncated,
        "entries": [dict(zip(TABLE_COLUMNS, row)) for row in table_rows(table)],
    })


def write_report(path, report, head):
    _dump(path, {"header": head} | report.to_dict())


def write_json(path, doc, head):
    _dump(path, {"header": head} | doc)
