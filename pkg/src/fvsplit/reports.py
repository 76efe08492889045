"""Error norms, observed orders, timing tables and CSV emission.

CSV cells for floating-point data use repr(), which round-trips float64
exactly, so re-reading an emitted table reproduces the in-memory values
bit for bit.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


def error_norms(diff):
    """(L1, L2, Linf) of a per-cell error array.

    L1 = mean |e|, L2 = sqrt(mean e^2), Linf = max |e| over all cells,
    matching discrete norms on a uniform grid.
    """
    e = np.abs(np.asarray(diff, dtype=float)).ravel()
    return float(e.mean()), float(np.sqrt((e * e).mean())), float(e.max())


def observed_order(coarse_err, fine_err):
    """log2 error ratio under one grid doubling."""
    return math.log2(coarse_err / fine_err)


@dataclass
class ErrorReport:
    """Per-grid error rows with observed orders between consecutive doublings."""

    scheme: str
    problem: str
    rows: list = field(default_factory=list)  # dicts: n, l1, l2, linf, orders

    def add(self, n, l1, l2, linf):
        row = {"n": n, "l1": l1, "l2": l2, "linf": linf,
               "order_l1": None, "order_l2": None, "order_linf": None}
        if self.rows:
            prev = self.rows[-1]
            if n == 2 * prev["n"]:
                row["order_l1"] = observed_order(prev["l1"], l1)
                row["order_l2"] = observed_order(prev["l2"], l2)
                row["order_linf"] = observed_order(prev["linf"], linf)
        self.rows.append(row)

    def last_orders(self):
        r = self.rows[-1]
        return r["order_l1"], r["order_l2"], r["order_linf"]

    def write_csv(self, path):
        header = ["N", "L1", "order", "L2", "order", "Linf", "order"]
        table = []
        for r in self.rows:
            table.append([
                str(r["n"]),
                _fmt(r["l1"]), _fmt(r["order_l1"]),
                _fmt(r["l2"]), _fmt(r["order_l2"]),
                _fmt(r["linf"]), _fmt(r["order_linf"]),
            ])
        _write_rows(path, header, table)


@dataclass
class TimingReport:
    """Wall-clock comparison of schemes on the same run, vs a baseline row."""

    baseline: str
    rows: list = field(default_factory=list)  # dicts: scheme, steps, seconds

    def add(self, scheme, steps, seconds):
        self.rows.append({"scheme": scheme, "steps": steps, "seconds": seconds})

    def ratios(self):
        base = next(r for r in self.rows if r["scheme"] == self.baseline)
        return {r["scheme"]: r["seconds"] / base["seconds"] for r in self.rows}

    def write_csv(self, path):
        ratios = self.ratios()
        header = ["scheme", "steps", "wall_seconds", "ratio_vs_" + self.baseline]
        table = [
            [r["scheme"], str(r["steps"]), _fmt(r["seconds"]), _fmt(ratios[r["scheme"]])]
            for r in self.rows
        ]
        _write_rows(path, header, table)


def _fmt(x):
    if x is None:
        return ""
    return repr(float(x))


def _write_rows(path, header, rows):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def read_csv(path):
    """(header, rows-as-strings) of an emitted table."""
    with Path(path).open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        return header, [row for row in reader]


def field_table(field_obj, system):
    """Plot-ready columns for a field snapshot.

    1D scalar: x, w.  1D Euler: x, rho, u, P, e_internal.
    2D Euler adds y and v.  e_internal is P / ((gamma - 1) rho).
    """
    grid = field_obj.grid
    U = field_obj.interior
    if system.nvars == 1:
        if grid.dimension != 1:
            raise ValueError("scalar snapshots are 1D")
        return ["x", "w"], [grid.cell_centers(0), U[0]]
    prim = system.primitive(U)
    if grid.dimension == 1:
        rho, u, p = prim
        e_int = p / ((system.gamma - 1.0) * rho)
        return ["x", "rho", "u", "P", "e_internal"], [grid.cell_centers(0), rho, u, p, e_int]
    rho, u, v, p = prim
    e_int = p / ((system.gamma - 1.0) * rho)
    xs = np.repeat(grid.cell_centers(0), grid.extents[1])
    ys = np.tile(grid.cell_centers(1), grid.extents[0])
    cols = [xs, ys] + [a.ravel() for a in (rho, u, v, p, e_int)]
    return ["x", "y", "rho", "u", "v", "P", "e_internal"], cols


def write_field_csv(path, field_obj, system):
    header, cols = field_table(field_obj, system)
    rows = [[_fmt(c[i]) for c in cols] for i in range(len(cols[0]))]
    _write_rows(path, header, rows)


def write_profile_overlay_csv(path, labeled_fields, system):
    """Long-format overlay of several runs of the same 1D problem."""
    header = None
    rows = []
    for label, field_obj in labeled_fields:
        h, cols = field_table(field_obj, system)
        if header is None:
            header = ["scheme"] + h
        for i in range(len(cols[0])):
            rows.append([label] + [_fmt(c[i]) for c in cols])
    _write_rows(path, header, rows)
