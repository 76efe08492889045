"""Conservative update loop: scheme configs, step advance and time marching."""

from __future__ import annotations

import time as _time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field as dc_field

import numpy as np

from .baseline import semidiscrete_rhs_weno, tvd_rk3_step
from .errors import NonPhysicalState, StepRejected
from .hfvs import leading_flux_arrays, time_integrated_flux_arrays
from .mesh import GridField, cfl_dt, fill_ghosts
from .reconstruction import (
    ORDER_TO_NTERMS,
    ORDER_TO_RADIUS,
    expansion_coefficients,
    flatten_cells,
    interface_values,
)

SCHEME_NAMES = ("hfvs2", "hfvs3", "hfvs5", "weno3rk3", "weno5rk3")


@dataclass(frozen=True)
class SchemeConfig:
    """Which discretization to run and how its flux is assembled."""

    name: str
    leading_term: str = "steger-warming"
    jacobian_eval: str = "interface-limit"

    def __post_init__(self):
        if self.name not in SCHEME_NAMES:
            raise ValueError(f"unknown scheme: {self.name}")

    @property
    def is_hfvs(self):
        return self.name.startswith("hfvs")

    @property
    def order(self):
        return int(self.name[-1]) if self.is_hfvs else int(self.name[4])

    @property
    def nterms(self):
        return ORDER_TO_NTERMS[self.order]

    @property
    def ghost_width(self):
        return ORDER_TO_RADIUS[self.order] + 1


def required_ghost_width(scheme: SchemeConfig):
    return scheme.ghost_width


def _trim_padding(u, excess):
    """Drop surplus ghost layers along the sweep axis (axis 1)."""
    if excess == 0:
        return u
    return u[:, excess:u.shape[1] - excess]


def _hfvs_sweep_fluxes(u, dx, dt, system, scheme: SchemeConfig, axis, first_order=False):
    """Time-integrated fluxes on the interior faces of one padded sweep array.

    u: (m, n, ...) with ghost width g along axis 1; returns (m, N+1, ...)
    where N = n - 2g interior cells.
    """
    g = ORDER_TO_RADIUS[scheme.order] + 1
    if first_order:
        # Robustness fallback: leading term of the adjacent cell averages only.
        wL = u[:, g - 1:u.shape[1] - g]
        wR = u[:, g:u.shape[1] - g + 1]
        return dt * leading_flux_arrays(wL, wR, scheme.leading_term, system, axis=axis)

    wl, wr = interface_values(u, scheme.order, dx)
    D = expansion_coefficients(scheme.order, u, wl, wr)
    r = ORDER_TO_RADIUS[scheme.order]
    means = u[:, r:u.shape[1] - r]
    invalid = ~(system.is_valid(wl) & system.is_valid(wr))
    if np.any(invalid):
        wl, wr, D = flatten_cells(invalid, means, wl, wr, D)
    # Covered cells span interior plus one ghost cell per side; consecutive
    # pairs meet exactly on the interior faces.
    wL_face = wr[:, :-1]
    wR_face = wl[:, 1:]
    return time_integrated_flux_arrays(
        wL_face,
        wR_face,
        D[:, :, :-1],
        D[:, :, 1:],
        dx,
        dt,
        system,
        axis=axis,
        kind=scheme.leading_term,
        jacobian_eval=scheme.jacobian_eval,
        uL_avg=means[:, :-1],
        uR_avg=means[:, 1:],
    )


def advance_step_hfvs(
    field: GridField, dt, scheme: SchemeConfig, bcs, system, first_order=False, threads=1
) -> GridField:
    """One conservative step W^{n+1} = W^n - sum_axes (dF_integral)/dh.

    Ghosts must be filled.  In 2D the x and y face integrals are both taken
    from the same time level, one midpoint quadrature point per face, and
    each direction's time expansion carries only that direction's
    derivatives; genuinely multi-dimensional smooth flow therefore runs
    below the 1D design order (shock capturing is unaffected).
    """
    g = field.grid.ghost_width
    excess = g - scheme.ghost_width
    if excess < 0:
        raise ValueError(f"{scheme.name} needs ghost_width >= {scheme.ghost_width}")
    out = field.copy()
    if field.grid.dimension == 1:
        fx = _hfvs_sweep_fluxes(
            _trim_padding(field.data, excess), field.grid.dx, dt, system, scheme, 0, first_order
        )
        out.interior = field.interior - (fx[:, 1:] - fx[:, :-1]) / field.grid.dx
    else:
        nx, ny = field.grid.extents
        ux = _trim_padding(field.data, excess)[:, :, g:g + ny]
        uy = _trim_padding(field.data[:, g:g + nx, :].swapaxes(1, 2), excess)

        def sweep_x():
            return _hfvs_sweep_fluxes(ux, field.grid.dx, dt, system, scheme, 0, first_order)

        def sweep_y():
            return _hfvs_sweep_fluxes(uy, field.grid.dy, dt, system, scheme, 1, first_order)

        if threads > 1:
            with ThreadPoolExecutor(max_workers=2) as pool:
                fx_fut = pool.submit(sweep_x)
                fy_fut = pool.submit(sweep_y)
                fx, fy = fx_fut.result(), fy_fut.result()
        else:
            fx, fy = sweep_x(), sweep_y()
        fy = fy.swapaxes(1, 2)
        out.interior = (
            field.interior
            - (fx[:, 1:, :] - fx[:, :-1, :]) / field.grid.dx
            - (fy[:, :, 1:] - fy[:, :, :-1]) / field.grid.dy
        )
    out.time = field.time + dt
    return out


def _check_interior(fieldnew: GridField, system, step, t):
    ok = system.is_valid(fieldnew.interior)
    if not np.all(ok):
        bad = np.argwhere(~np.atleast_1d(ok))
        cell = tuple(int(i) for i in bad[0])
        raise StepRejected("updated cell is non-physical", step=step, time=t, cell=cell)


@dataclass
class StepRecord:
    step: int
    t: float
    dt: float
    totals: np.ndarray


@dataclass
class RunStats:
    """Step count, wall time and conservation accounting for one run."""

    steps: int = 0
    wall_seconds: float = 0.0
    initial_totals: np.ndarray = None
    initial_abs_totals: np.ndarray = None
    final_totals: np.ndarray = None
    fallback_steps: int = 0
    records: list = dc_field(default_factory=list)

    @property
    def conservation_drift(self):
        """Drift of each conserved component, relative to its L1 magnitude.

        The L1 scale keeps the measure meaningful for components whose
        signed total is zero (a mean-free profile); components that start
        identically zero (momentum of gas at rest) are measured against the
        largest component scale instead.
        """
        scale = np.maximum(np.abs(self.initial_totals), self.initial_abs_totals)
        fallback = max(float(self.initial_abs_totals.max()), 1e-300)
        scale = np.where(scale > 0.0, scale, fallback)
        return np.abs(self.final_totals - self.initial_totals) / scale


def run_lockstep(fields, schemes, t_end, bcs, system, cfl, max_steps=10_000_000):
    """March several schemes together, sharing one dt sequence.

    Every live scheme advances with dt = min over schemes of its CFL step,
    so paired runs see identical step counts; wall time is accumulated per
    scheme around its own ghost fill and update only.  A scheme that
    rejects a step is retired with its exception; the others continue.

    Returns a list of (field, RunStats, error-or-None), ordered as given.
    """
    n = len(fields)
    stats = []
    for f in fields:
        vol = f.grid.dx * (f.grid.dy if f.grid.dimension == 2 else 1.0)
        axes = tuple(range(1, 1 + f.grid.dimension))
        stats.append(
            RunStats(
                initial_totals=f.conserved_totals(),
                initial_abs_totals=np.abs(f.interior).sum(axis=axes) * vol,
            )
        )
    fields = list(fields)
    errors = [None] * n
    live = set(range(n))
    t = fields[0].time
    steps = 0
    eps = 1e-12 * max(1.0, abs(t_end))
    while t < t_end - eps and live and steps < max_steps:
        dt = None
        for i in live:
            fill_ghosts(fields[i], bcs, system)
            di = cfl_dt(fields[i], cfl, system)
            dt = di if dt is None else min(dt, di)
        dt = min(dt, t_end - t)
        for i in sorted(live):
            started = _time.perf_counter()
            try:
                if schemes[i].is_hfvs:
                    new = advance_step_hfvs(fields[i], dt, schemes[i], bcs, system)
                else:
                    new = tvd_rk3_step(
                        fields[i],
                        dt,
                        lambda f, o=schemes[i].order: semidiscrete_rhs_weno(f, o, system, bcs),
                    )
                _check_interior(new, system, stats[i].steps, t)
            except (StepRejected, NonPhysicalState) as exc:
                errors[i] = exc
                live.discard(i)
                continue
            stats[i].wall_seconds += _time.perf_counter() - started
            fields[i] = new
            stats[i].steps += 1
        t += dt
        steps += 1
    for i in range(n):
        stats[i].final_totals = fields[i].conserved_totals()
    return [(fields[i], stats[i], errors[i]) for i in range(n)]


def run_to_time(
    field: GridField,
    t_end,
    scheme: SchemeConfig,
    bcs,
    system,
    cfl,
    fallback_first_order=False,
    threads=1,
    callback=None,
    callback_every=1,
    max_steps=10_000_000,
) -> tuple:
    """March the field to t_end.  Returns (final_field, RunStats).

    Each step fills ghosts, sizes dt by the CFL rule (clipped to land on
    t_end exactly), advances, and validates the interior.  A rejected step
    is retried once with the first-order flux when fallback_first_order is
    set; otherwise StepRejected propagates with full diagnostics.
    """
    if field.grid.ghost_width < required_ghost_width(scheme):
        raise ValueError(
            f"{scheme.name} needs ghost_width >= {required_ghost_width(scheme)}"
        )
    if t_end < field.time:
        raise ValueError("t_end precedes the field time")
    vol = field.grid.dx * (field.grid.dy if field.grid.dimension == 2 else 1.0)
    axes = tuple(range(1, 1 + field.grid.dimension))
    stats = RunStats(
        initial_totals=field.conserved_totals(),
        initial_abs_totals=np.abs(field.interior).sum(axis=axes) * vol,
    )
    current = field
    started = _time.perf_counter()
    eps = 1e-12 * max(1.0, abs(t_end))
    while current.time < t_end - eps and stats.steps < max_steps:
        fill_ghosts(current, bcs, system)
        try:
            dt = cfl_dt(current, cfl, system)
        except NonPhysicalState as exc:
            raise StepRejected(
                f"cannot size step: {exc}", step=stats.steps, time=current.time, cell=exc.index
            ) from exc
        dt = min(dt, t_end - current.time)
        try:
            if scheme.is_hfvs:
                new = advance_step_hfvs(current, dt, scheme, bcs, system, threads=threads)
            else:
                new = tvd_rk3_step(
                    current, dt, lambda f: semidiscrete_rhs_weno(f, scheme.order, system, bcs)
                )
            _check_interior(new, system, stats.steps, current.time)
        except (StepRejected, NonPhysicalState) as exc:
            if not (fallback_first_order and scheme.is_hfvs):
                if isinstance(exc, StepRejected):
                    raise
                raise StepRejected(
                    f"flux evaluation failed: {exc}",
                    step=stats.steps,
                    time=current.time,
                    cell=getattr(exc, "index", None),
                ) from exc
            new = advance_step_hfvs(
                current, dt, scheme, bcs, system, first_order=True, threads=threads
            )
            _check_interior(new, system, stats.steps, current.time)
            stats.fallback_steps += 1
        current = new
        stats.steps += 1
        if callback is not None and stats.steps % callback_every == 0:
            callback(StepRecord(stats.steps, current.time, dt, current.conserved_totals()), current)
    stats.wall_seconds = _time.perf_counter() - started
    stats.final_totals = current.conserved_totals()
    return current, stats
