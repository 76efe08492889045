"""Structured grids with ghost layers, boundary filling and CFL control."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import NonPhysicalState

BC_KINDS = ("periodic", "outflow", "reflective", "inflow-exact")


@dataclass(frozen=True)
class GridSpec:
    """Uniform 1D/2D cell layout with ghost_width ghost cells per side."""

    extents: tuple            # (nx,) or (nx, ny)
    domain: tuple             # ((x0, x1),) or ((x0, x1), (y0, y1))
    ghost_width: int

    def __post_init__(self):
        if len(self.extents) != len(self.domain):
            raise ValueError("extents and domain dimensionality differ")
        if self.dimension not in (1, 2):
            raise ValueError("grids are 1D or 2D")
        if any(n < 1 for n in self.extents):
            raise ValueError("cell counts must be positive")
        if self.ghost_width < 1:
            raise ValueError("ghost_width must be at least 1")

    @property
    def dimension(self):
        return len(self.extents)

    def spacing(self, axis=0):
        lo, hi = self.domain[axis]
        return (hi - lo) / self.extents[axis]

    @property
    def dx(self):
        return self.spacing(0)

    @property
    def dy(self):
        return self.spacing(1)

    def cell_centers(self, axis=0):
        lo, _ = self.domain[axis]
        h = self.spacing(axis)
        return lo + (np.arange(self.extents[axis]) + 0.5) * h

    def cell_edges(self, axis=0):
        lo, _ = self.domain[axis]
        h = self.spacing(axis)
        return lo + np.arange(self.extents[axis] + 1) * h

    def padded_shape(self, nvars):
        return (nvars,) + tuple(n + 2 * self.ghost_width for n in self.extents)


@dataclass
class BoundaryCondition:
    """One side's boundary treatment.

    kind 'inflow-exact' fills ghosts from exact_averages(centers_or_grid, t),
    a callable returning ghost-cell averages of a known exact solution.
    """

    kind: str
    exact_averages: object = None

    def __post_init__(self):
        if self.kind not in BC_KINDS:
            raise ValueError(f"unknown boundary kind: {self.kind}")
        if self.kind == "inflow-exact" and self.exact_averages is None:
            raise ValueError("inflow-exact boundaries need an exact_averages callable")


def boundary_set(*kinds):
    """Convenience: per-axis (low, high) BoundaryCondition pairs from kind names."""
    out = []
    for kind in kinds:
        out.append((BoundaryCondition(kind), BoundaryCondition(kind)))
    return tuple(out)


@dataclass
class GridField:
    """Cell-averaged conserved states over interior plus ghost cells."""

    grid: GridSpec
    data: np.ndarray          # (m, nx+2g[, ny+2g])
    time: float = 0.0

    @classmethod
    def empty(cls, grid: GridSpec, nvars, time=0.0):
        return cls(grid, np.zeros(grid.padded_shape(nvars)), time)

    @property
    def nvars(self):
        return self.data.shape[0]

    def interior_slices(self):
        g = self.grid.ghost_width
        return (slice(None),) + tuple(slice(g, g + n) for n in self.grid.extents)

    @property
    def interior(self):
        return self.data[self.interior_slices()]

    @interior.setter
    def interior(self, values):
        self.data[self.interior_slices()] = values

    def copy(self):
        return GridField(self.grid, self.data.copy(), self.time)

    def conserved_totals(self):
        """Domain integral of every conserved component."""
        vol = self.grid.dx * (self.grid.dy if self.grid.dimension == 2 else 1.0)
        axes = tuple(range(1, 1 + self.grid.dimension))
        return self.interior.sum(axis=axes) * vol


def _fill_axis(field: GridField, axis, bcs, system):
    g = field.grid.ghost_width
    n = field.grid.extents[axis]
    data = field.data
    ax = 1 + axis  # component axis comes first

    def take(sl):
        idx = [slice(None)] * data.ndim
        idx[ax] = sl
        return tuple(idx)

    lo_bc, hi_bc = bcs
    if lo_bc.kind == "periodic" or hi_bc.kind == "periodic":
        if lo_bc.kind != hi_bc.kind:
            raise ValueError("periodic boundaries must be paired")
        data[take(slice(0, g))] = data[take(slice(n, n + g))]
        data[take(slice(n + g, n + 2 * g))] = data[take(slice(g, 2 * g))]
        return

    for side, bc in ((0, lo_bc), (1, hi_bc)):
        if bc.kind == "outflow":
            edge = data[take(slice(g, g + 1))] if side == 0 else data[take(slice(n + g - 1, n + g))]
            target = slice(0, g) if side == 0 else slice(n + g, n + 2 * g)
            data[take(target)] = edge
        elif bc.kind == "reflective":
            flip = system.reflect_flip_index(axis)
            for i in range(g):
                src = g + i if side == 0 else n + g - 1 - i
                dst = g - 1 - i if side == 0 else n + g + i
                mirrored = data[take(slice(src, src + 1))].copy()
                if flip is not None:
                    mirrored[flip] = -mirrored[flip]
                data[take(slice(dst, dst + 1))] = mirrored
        elif bc.kind == "inflow-exact":
            lo, hi = field.grid.domain[axis]
            h = field.grid.spacing(axis)
            if side == 0:
                centers = lo + (np.arange(-g, 0) + 0.5) * h
                target = slice(0, g)
            else:
                centers = hi + (np.arange(g) + 0.5) * h
                target = slice(n + g, n + 2 * g)
            ghost = np.asarray(bc.exact_averages(centers, field.time), dtype=float)
            idx = take(target)
            if ghost.ndim == data.ndim:
                data[idx] = ghost
            else:
                # (m, g) ghost averages broadcast across the transverse axes
                shape = [1] * data.ndim
                shape[0], shape[ax] = ghost.shape
                data[idx] = ghost.reshape(shape)
        else:
            raise ValueError(f"unhandled boundary kind: {bc.kind}")


def fill_ghosts(field: GridField, bcs, system) -> GridField:
    """Populate all ghost layers in place; returns the field for chaining.

    bcs is a per-axis tuple of (low, high) BoundaryCondition pairs.
    """
    for axis in range(field.grid.dimension):
        _fill_axis(field, axis, bcs[axis], system)
    return field


def cfl_dt(field: GridField, cfl, system):
    """Stable step from the interior spectral radius; no end-time clipping here."""
    U = field.interior
    if not np.all(system.is_valid(U)):
        raise NonPhysicalState("cannot size a time step from an invalid field")
    if field.grid.dimension == 1:
        smax = float(np.max(system.max_signal(U, axis=0)))
        return cfl * field.grid.dx / smax
    rate = system.max_signal(U, axis=0) / field.grid.dx + system.max_signal(U, axis=1) / field.grid.dy
    return cfl / float(np.max(rate))
