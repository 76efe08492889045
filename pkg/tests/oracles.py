"""Independent reference computations the tests check the solver against.

Everything here is deliberately written from first principles (iteration on
the pressure function, finite differences, dense linear solves) and shares
no code with the production paths it validates.
"""

import numpy as np


def fd_jacobian(flux_fn, w, h=1e-6):
    """Central finite-difference Jacobian of a flux function at state w."""
    w = np.asarray(w, dtype=float)
    m = w.size
    J = np.zeros((m, m))
    for j in range(m):
        e = np.zeros(m)
        e[j] = h
        J[:, j] = (flux_fn(w + e) - flux_fn(w - e)) / (2.0 * h)
    return J


# ---------------------------------------------------------------------------
# Exact Riemann solver for the 1D perfect-gas Euler equations.
# ---------------------------------------------------------------------------


def _pressure_fn(p, rho_k, p_k, c_k, gamma):
    """f_k(p) and f_k'(p): velocity change across one wave at star pressure p."""
    if p > p_k:  # shock
        A = 2.0 / ((gamma + 1.0) * rho_k)
        B = (gamma - 1.0) / (gamma + 1.0) * p_k
        f = (p - p_k) * np.sqrt(A / (p + B))
        df = np.sqrt(A / (p + B)) * (1.0 - 0.5 * (p - p_k) / (p + B))
    else:  # rarefaction
        f = 2.0 * c_k / (gamma - 1.0) * ((p / p_k) ** ((gamma - 1.0) / (2.0 * gamma)) - 1.0)
        df = (p / p_k) ** (-(gamma + 1.0) / (2.0 * gamma)) / (rho_k * c_k)
    return f, df


def exact_riemann_star(rho_l, u_l, p_l, rho_r, u_r, p_r, gamma=1.4):
    """Star-region (p*, u*) via Newton iteration on the pressure function."""
    c_l = np.sqrt(gamma * p_l / rho_l)
    c_r = np.sqrt(gamma * p_r / rho_r)
    du = u_r - u_l
    # Two-rarefaction initial guess, floored away from vacuum.
    z = (gamma - 1.0) / (2.0 * gamma)
    p = ((c_l + c_r - 0.5 * (gamma - 1.0) * du) /
         (c_l / p_l ** z + c_r / p_r ** z)) ** (1.0 / z)
    p = max(p, 1e-10)
    for _ in range(100):
        f_l, df_l = _pressure_fn(p, rho_l, p_l, c_l, gamma)
        f_r, df_r = _pressure_fn(p, rho_r, p_r, c_r, gamma)
        g = f_l + f_r + du
        step = g / (df_l + df_r)
        p_new = max(p - step, 1e-12)
        if abs(p_new - p) < 1e-14 * max(1.0, p):
            p = p_new
            break
        p = p_new
    f_l, _ = _pressure_fn(p, rho_l, p_l, c_l, gamma)
    f_r, _ = _pressure_fn(p, rho_r, p_r, c_r, gamma)
    u = 0.5 * (u_l + u_r) + 0.5 * (f_r - f_l)
    return p, u


def exact_riemann_sample(rho_l, u_l, p_l, rho_r, u_r, p_r, xi=0.0, gamma=1.4):
    """Self-similar solution (rho, u, p) at speed xi = x/t."""
    c_l = np.sqrt(gamma * p_l / rho_l)
    c_r = np.sqrt(gamma * p_r / rho_r)
    p_s, u_s = exact_riemann_star(rho_l, u_l, p_l, rho_r, u_r, p_r, gamma)
    gm, gp = gamma - 1.0, gamma + 1.0
    if xi <= u_s:  # left of the contact
        if p_s > p_l:  # left shock
            rho_sl = rho_l * ((p_s / p_l + gm / gp) / (gm / gp * p_s / p_l + 1.0))
            s_l = u_l - c_l * np.sqrt((gp * p_s / p_l + gm) / (2.0 * gamma))
            return (rho_l, u_l, p_l) if xi <= s_l else (rho_sl, u_s, p_s)
        rho_sl = rho_l * (p_s / p_l) ** (1.0 / gamma)
        c_sl = c_l * (p_s / p_l) ** (gm / (2.0 * gamma))
        head, tail = u_l - c_l, u_s - c_sl
        if xi <= head:
            return rho_l, u_l, p_l
        if xi >= tail:
            return rho_sl, u_s, p_s
        u = 2.0 / gp * (c_l + 0.5 * gm * u_l + xi)
        c = 2.0 / gp * (c_l + 0.5 * gm * (u_l - xi))
        rho = rho_l * (c / c_l) ** (2.0 / gm)
        return rho, u, p_l * (c / c_l) ** (2.0 * gamma / gm)
    if p_s > p_r:  # right shock
        rho_sr = rho_r * ((p_s / p_r + gm / gp) / (gm / gp * p_s / p_r + 1.0))
        s_r = u_r + c_r * np.sqrt((gp * p_s / p_r + gm) / (2.0 * gamma))
        return (rho_r, u_r, p_r) if xi >= s_r else (rho_sr, u_s, p_s)
    rho_sr = rho_r * (p_s / p_r) ** (1.0 / gamma)
    c_sr = c_r * (p_s / p_r) ** (gm / (2.0 * gamma))
    head, tail = u_r + c_r, u_s + c_sr
    if xi >= head:
        return rho_r, u_r, p_r
    if xi <= tail:
        return rho_sr, u_s, p_s
    u = 2.0 / gp * (-c_r + 0.5 * gm * u_r + xi)
    c = 2.0 / gp * (c_r - 0.5 * gm * (u_r - xi))
    rho = rho_r * (c / c_r) ** (2.0 / gm)
    return rho, u, p_r * (c / c_r) ** (2.0 * gamma / gm)


def euler_flux_of_primitive(rho, u, p, gamma=1.4):
    E = p / (gamma - 1.0) + 0.5 * rho * u * u
    return np.array([rho * u, rho * u * u + p, (E + p) * u])


# ---------------------------------------------------------------------------
# Dense linear-system derivative recovery (interpolation + moment closure).
# ---------------------------------------------------------------------------

_GLX, _GLW = np.polynomial.legendre.leggauss(10)


def _phi(k, xi):
    xi = np.asarray(xi, dtype=float)
    if k == 1:
        return xi
    if k == 2:
        return 0.5 * (xi * xi - 1.0 / 12.0)
    if k == 3:
        return xi ** 3 / 6.0
    return (xi ** 4 - 1.0 / 80.0) / 24.0


def _phi_moment(k, a, b):
    xs = _GLX * (b - a) / 2.0 + (a + b) / 2.0
    ws = _GLW * (b - a) / 2.0
    return float(np.sum(_phi(k, xs) * ws)) / (b - a)


def dense_recovery(nterms, w_minus, w_plus, ubar, ubar_m=None, ubar_p=None):
    """Least-squares solve of the edge-interpolation + neighbor-moment system.

    For consistent data (exact polynomial samples) the system is consistent
    and the solution matches the closed-form recovery exactly.
    """
    rows = [[_phi(k, 0.5) for k in range(1, nterms + 1)],
            [_phi(k, -0.5) for k in range(1, nterms + 1)]]
    rhs = [w_plus - ubar, w_minus - ubar]
    if nterms == 4:
        rows.append([_phi_moment(k, 0.5, 1.5) for k in range(1, nterms + 1)])
        rows.append([_phi_moment(k, -1.5, -0.5) for k in range(1, nterms + 1)])
        rhs.extend([ubar_p - ubar, ubar_m - ubar])
    A = np.array(rows, dtype=float)
    b = np.array(rhs, dtype=float)
    sol, *_ = np.linalg.lstsq(A, b, rcond=None)
    return sol
