"""Sampled distributions, tau grids and their CSV form."""

import csv
from dataclasses import dataclass, field

import numpy as np

from .exceptions import GridMismatch

CSV_FORMAT = "{:.17g}"


def hybrid_tau_grid(t_max, n=400, t_knee=None, t_min=0.0, symmetric=False):
    """Linear spacing up to ``t_knee`` then geometric spacing out to ``t_max``.

    The geometric part keeps slow power-law tails resolved without wasting
    points.  With ``symmetric=True`` the grid is mirrored onto [-t_max, t_max].
    """
    if t_knee is None:
        t_knee = min(t_max, max(10.0, t_max / 50))
    n_lin = max(2, n // 2)
    lin = np.linspace(t_min, t_knee, n_lin)
    if t_knee < t_max:
        geo = np.geomspace(t_knee, t_max, n - n_lin + 1)[1:]
        grid = np.concatenate([lin, geo])
    else:
        grid = lin
    if symmetric:
        pos = grid[grid > 0]
        grid = np.concatenate([-pos[::-1], [0.0], pos])
    return grid


def trapezoid(y, x):
    return float(np.trapezoid(y, x))


@dataclass
class DistributionCurve:
    """Density samples on a tau grid with bookkeeping.

    ``norm`` is the trapezoidal integral over the grid, recorded rather than
    forced to 1.  ``p_infinity`` is the non-detection probability, when known.
    """

    tau_grid: np.ndarray
    density: np.ndarray
    label: str = ""
    p_infinity: float = None
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.tau_grid = np.asarray(self.tau_grid, dtype=float)
        self.density = np.asarray(self.density, dtype=float)
        if self.tau_grid.shape != self.density.shape:
            raise ValueError("tau_grid and density differ in shape")
        if np.any(np.diff(self.tau_grid) <= 0):
            raise ValueError("tau_grid must be strictly increasing")
        if self.p_infinity is not None and not -1e-12 <= self.p_infinity <= 1 + 1e-12:
            raise ValueError("p_infinity outside [0, 1]")

    @property
    def norm(self):
        ok = np.isfinite(self.density)
        return trapezoid(self.density[ok], self.tau_grid[ok])

    def peak(self):
        i = int(np.nanargmax(self.density))
        return self.tau_grid[i], self.density[i]

    def sup_difference(self, other):
        if self.tau_grid.shape != other.tau_grid.shape or np.any(self.tau_grid != other.tau_grid):
            raise GridMismatch("curves do not share a tau grid")
        return float(np.nanmax(np.abs(self.density - other.density)))

    def to_csv(self, path, value_name="density", extra=None):
        """RFC-4180 CSV; metadata goes in a leading '#' comment row."""
        write_csv(path, {"tau": self.tau_grid, value_name: self.density, **(extra or {})}, self.metadata)


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    v = float(v)
    if np.isnan(v):
        return "nan"
    if np.isinf(v):
        return "inf" if v > 0 else "-inf"
    return CSV_FORMAT.format(v)


def write_csv(path, columns, metadata=None):
    names = list(columns)
    cols = [np.asarray(columns[k]) for k in names]
    with open(path, "w", newline="") as fh:
        if metadata:
            fh.write("# " + " ".join(f"{k}={metadata[k]}" for k in sorted(metadata)) + "\r\n")
        w = csv.writer(fh, lineterminator="\r\n")
        w.writerow(names)
        for row in zip(*cols):
            w.writerow([_fmt(v) for v in row])


def read_csv(path):
    """Inverse of :func:`write_csv`: (columns dict, metadata dict)."""
    meta = {}
    with open(path, newline="") as fh:
        lines = fh.read().splitlines()
    if lines and lines[0].startswith("#"):
        for item in lines[0][1:].split():
            k, _, v = item.partition("=")
            meta[k] = v
        lines = lines[1:]
    rows = list(csv.reader(lines))
    names = rows[0]
    data = np.array([[float(v) for v in r] for r in rows[1:]]) if len(rows) > 1 else np.empty((0, len(names)))
    return {k: data[:, i] for i, k in enumerate(names)}, meta


def curve_from_function(func, tau_grid, label="", p_infinity=None, metadata=None):
    dens = np.array([func(t) for t in tau_grid], dtype=float)
    return DistributionCurve(tau_grid, dens, label, p_infinity, dict(metadata or {}))
