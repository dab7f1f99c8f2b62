"""Whitespace-separated series for generic plotting tools."""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .. import bounds as B
from ..density import GridDensity


def _fmt_t(t):
    return f"{t:.6g}".replace("+", "")


def write_columns(path, header, cols):
    path = Path(path)
    data = np.column_stack([np.asarray(c, dtype=float) for c in cols])
    with open(path, "w") as fh:
        fh.write("# " + " ".join(header) + "\n")
        for row in data:
            fh.write(" ".join(f"{v:.17g}" for v in row) + "\n")
    return path


def _density_file(g: GridDensity, directory, stem):
    beta = "".join(str(b) for b in g.derivative_order)
    name = f"{stem}_t{_fmt_t(g.t)}" + (f"_d{beta}" if any(g.derivative_order) else "") + ".dat"
    col = "p" if not any(g.derivative_order) else f"d{beta}p"
    if g.dimension == 1:
        return write_columns(Path(directory) / name, ["x", col], [g.x, g.values])
    X, Y = g.grid.coords()
    return write_columns(Path(directory) / name, ["x1", "x2", col], [X.ravel(), Y.ravel(), g.values.ravel()])


def _report_files(rep: B.ValidationReport, directory, stem):
    pts = rep.points
    if not pts:
        return []
    mult = B.MULTIPLIER.get(rep.envelope.kind)
    C = rep.constants.get(mult, 1.0) if mult else 1.0
    t = np.asarray(pts["t"])
    out = []
    for tv in np.unique(t):
        sel = t == tv
        env = C * np.asarray(pts["shape"])[sel]
        dens = np.asarray(pts["density"])[sel]
        out.append(write_columns(Path(directory) / f"{stem}_t{_fmt_t(tv)}.dat", ["x", "density", "envelope", "ratio"],
                                 [np.asarray(pts["x"])[sel], dens, env, dens / env]))
    return out


def psi_table(r, psi, H, C8):
    """Columns r, Psi(r), 2H(1/r), C8 H(1/r) as a (header, rows) pair."""
    H = np.asarray(H, dtype=float)
    return ["r", "psi", "two_H", "C8_H"], np.column_stack([r, psi, 2 * H, C8 * H])


def emit_plotdata(obj, directory, stem="series"):
    """Write plot series for a GridDensity, a ValidationReport or a (header, rows) table.

    Returns the list of written paths.
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    if isinstance(obj, GridDensity):
        return [_density_file(obj, directory, stem)]
    if isinstance(obj, B.ValidationReport):
        return _report_files(obj, directory, stem)
    if isinstance(obj, tuple) and len(obj) == 2:
        header, rows = obj
        rows = np.asarray(rows, dtype=float)
        return [write_columns(directory / f"{stem}.dat", header, rows.T)]
    raise TypeError(f"cannot emit plot data for {type(obj).__name__}")
