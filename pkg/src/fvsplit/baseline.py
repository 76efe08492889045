"""Reference method: WENO-reconstructed finite-volume fluxes with TVD RK3.

Spatially this shares the interface-value reconstruction with the main
scheme; interfaces are closed with a global Lax-Friedrichs flux, and time
stepping is the standard three-stage TVD Runge-Kutta method.  Pairing a
fifth-order reconstruction with the third-order integrator is deliberate:
it exhibits the temporal order barrier the main scheme avoids.
"""

from __future__ import annotations

import numpy as np

from .mesh import GridField, fill_ghosts
from .reconstruction import ORDER_TO_RADIUS, flatten_cells, interface_values


def lf_interface_flux(wL, wR, alpha, system, axis=0):
    """Global Lax-Friedrichs flux of reconstructed one-sided face states."""
    fL = system.flux(wL, axis=axis)
    fR = system.flux(wR, axis=axis)
    return 0.5 * (fL + fR) - 0.5 * alpha * (wR - wL)


def _sweep_rhs(u, dx, order, system, axis, alpha):
    """RHS contribution of one direction: -(F_{j+1/2} - F_{j-1/2})/dx.

    u is the padded sweep array (m, n, ...) with the sweep along axis 1;
    returns (m, n-2g, ...) for the interior cells.
    """
    wl, wr = interface_values(u, order, dx)
    r = ORDER_TO_RADIUS[order]
    means = u[:, r:u.shape[1] - r]
    invalid = ~(system.is_valid(wl) & system.is_valid(wr))
    if np.any(invalid):
        wl, wr, _ = flatten_cells(invalid, means, wl, wr, np.zeros((0,) + wl.shape))
    # faces between consecutive covered cells
    wL_face = wr[:, :-1]
    wR_face = wl[:, 1:]
    fhat = lf_interface_flux(wL_face, wR_face, alpha, system, axis=axis)
    return -(fhat[:, 1:] - fhat[:, :-1]) / dx


def semidiscrete_rhs_weno(field: GridField, order, system, bcs) -> np.ndarray:
    """Finite-volume WENO right-hand side d(Wbar)/dt over the interior."""
    fill_ghosts(field, bcs, system)
    g = field.grid.ghost_width
    excess = g - (ORDER_TO_RADIUS[order] + 1)
    if excess < 0:
        raise ValueError(f"order-{order} WENO needs ghost_width >= {ORDER_TO_RADIUS[order] + 1}")

    def trim(u):
        return u if excess == 0 else u[:, excess:u.shape[1] - excess]

    data = field.data
    if field.grid.dimension == 1:
        alpha = float(np.max(system.max_signal(field.interior, axis=0)))
        return _sweep_rhs(trim(data), field.grid.dx, order, system, 0, alpha)
    nx, ny = field.grid.extents
    alpha_x = float(np.max(system.max_signal(field.interior, axis=0)))
    alpha_y = float(np.max(system.max_signal(field.interior, axis=1)))
    ux = trim(data)[:, :, g:g + ny]
    rhs = _sweep_rhs(ux, field.grid.dx, order, system, 0, alpha_x)
    uy = trim(data[:, g:g + nx, :].swapaxes(1, 2))
    rhs_y = _sweep_rhs(uy, field.grid.dy, order, system, 1, alpha_y)
    return rhs + rhs_y.swapaxes(1, 2)


def tvd_rk3_step(field: GridField, dt, rhs) -> GridField:
    """Three-stage TVD Runge-Kutta update of the interior cell averages.

    u1 = u + dt L(u);  u2 = 3/4 u + 1/4 (u1 + dt L(u1));
    u_next = 1/3 u + 2/3 (u2 + dt L(u2)), written in increment form so a
    vanishing right-hand side returns the field bit for bit.

    rhs(field) must return interior time derivatives; ghost handling is the
    callback's business so every stage sees consistent boundaries.
    """
    u0 = field.interior.copy()

    stage = field.copy()
    stage.interior = u0 + dt * rhs(stage)

    stage.time = field.time + dt
    stage.interior = u0 + 0.25 * ((stage.interior - u0) + dt * rhs(stage))

    stage.time = field.time + 0.5 * dt
    stage.interior = u0 + (2.0 / 3.0) * ((stage.interior - u0) + dt * rhs(stage))

    stage.time = field.time + dt
    return stage
