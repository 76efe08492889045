"""State algebra, fluxes, Jacobians and characteristic splitting.

Conserved states are numpy arrays with the component axis first: shape (m,)
for a single state, (m, n) for a 1D sweep, (m, nx, ny) for a 2D field.
Every operation broadcasts over the trailing axes, so the same formulas
serve both the per-state contract API and the vectorized solver sweeps.

Three models share one interface: scalar linear advection (m=1), 1D Euler
(m=3: rho, rho*U, rho*E) and 2D Euler (m=4: rho, rho*U, rho*V, rho*E) with
a perfect-gas equation of state P = (gamma-1)*rho*(E - |u|^2/2).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateEigensystem, NonPhysicalState

# Validity floors (nondimensional units). States at or below are rejected,
# never clamped.
DENSITY_FLOOR = 1e-13
PRESSURE_FLOOR = 1e-13


@dataclass(frozen=True)
class EosParams:
    """Perfect-gas ratio of specific heats."""

    gamma: float = 1.4

    def __post_init__(self):
        if not self.gamma > 1.0:
            raise ValueError(f"gamma must be > 1, got {self.gamma}")


@dataclass(frozen=True)
class PrimitiveVector:
    """Density, velocity components and pressure of a single state."""

    rho: float
    velocity: np.ndarray
    pressure: float


@dataclass(frozen=True)
class SplitJacobian:
    """Flux Jacobian with its eigen-factorization and +/- split parts.

    Satisfies A = R diag(lam) L with L = R^-1, A_plus + A_minus = A, and
    A_plus/A_minus carrying only the nonnegative/nonpositive eigenvalues.
    """

    A: np.ndarray
    eigenvalues: np.ndarray
    right_eigenvectors: np.ndarray
    left_eigenvectors: np.ndarray
    A_plus: np.ndarray
    A_minus: np.ndarray


def matvec(M, v):
    """Apply stacked (m, m, ...) matrices to stacked (m, ...) vectors."""
    return np.einsum("ij...,j...->i...", M, v)


class LinearAdvection:
    """Scalar advection w_t + a w_x (+ b w_y) = 0 as the m=1 degenerate model."""

    nvars = 1

    def __init__(self, speeds=(1.0,)):
        self.speeds = tuple(float(s) for s in speeds)
        self.ndim = len(self.speeds)
        if self.ndim not in (1, 2):
            raise ValueError("advection supports 1 or 2 dimensions")

    def is_valid(self, U):
        return np.ones(np.shape(U)[1:], dtype=bool)

    def require_valid(self, U):
        return None

    def primitive(self, U):
        return (U[0].copy(),)

    def flux(self, U, axis=0):
        return self.speeds[axis] * U

    def max_signal(self, U, axis=0):
        return np.full(np.shape(U)[1:], abs(self.speeds[axis]))

    def jacobian(self, U, axis=0):
        shape = (1, 1) + np.shape(U)[1:]
        return np.full(shape, self.speeds[axis])

    def eig(self, U, axis=0):
        trail = np.shape(U)[1:]
        lam = np.full((1,) + trail, self.speeds[axis])
        R = np.ones((1, 1) + trail)
        L = np.ones((1, 1) + trail)
        return lam, R, L

    def reflect_flip_index(self, axis):
        return None


class _EulerBase:
    """Shared perfect-gas algebra for the 1D/2D Euler models."""

    def __init__(self, eos: EosParams = EosParams()):
        self.eos = eos

    @property
    def gamma(self):
        return self.eos.gamma

    def _raw_primitive(self, U):
        rho = U[0]
        vels = tuple(U[1 + d] / rho for d in range(self.ndim))
        ke = 0.5 * rho * sum(v * v for v in vels)
        p = (self.gamma - 1.0) * (U[1 + self.ndim] - ke)
        return rho, vels, p

    def is_valid(self, U):
        rho = U[0]
        with np.errstate(divide="ignore", invalid="ignore"):
            _, _, p = self._raw_primitive(U)
        return (rho > DENSITY_FLOOR) & (p > PRESSURE_FLOOR) & np.isfinite(p)

    def _require_valid_parts(self, rho, p):
        ok = (rho > DENSITY_FLOOR) & (p > PRESSURE_FLOOR) & np.isfinite(p)
        if not np.all(ok):
            bad = np.argwhere(~np.atleast_1d(ok))
            idx = tuple(bad[0]) if bad.size else None
            raise NonPhysicalState(
                f"non-physical state: rho or pressure at/below floor at {idx}",
                index=idx,
            )

    def require_valid(self, U):
        with np.errstate(divide="ignore", invalid="ignore"):
            rho, _, p = self._raw_primitive(U)
        self._require_valid_parts(rho, p)

    def primitive(self, U):
        self.require_valid(U)
        rho, vels, p = self._raw_primitive(U)
        return (rho,) + vels + (p,)

    def conserved(self, rho, vels, p):
        rho = np.asarray(rho, dtype=float)
        vels = [np.asarray(v, dtype=float) for v in vels]
        p = np.asarray(p, dtype=float)
        ke = 0.5 * rho * sum(v * v for v in vels)
        E = p / (self.gamma - 1.0) + ke
        comps = [rho] + [rho * v for v in vels] + [E]
        return np.stack(np.broadcast_arrays(*comps))

    def sound_speed(self, U):
        rho, _, p = self._raw_primitive(U)
        c2 = self.gamma * p / rho
        if np.any(c2 <= 0.0) or not np.all(np.isfinite(c2)):
            raise DegenerateEigensystem("sound speed is not positive")
        return np.sqrt(c2)

    def max_signal(self, U, axis=0):
        rho, vels, p = self._raw_primitive(U)
        c2 = self.gamma * p / rho
        if np.any(c2 <= 0.0) or not np.all(np.isfinite(c2)):
            raise DegenerateEigensystem("sound speed is not positive")
        return np.abs(vels[axis]) + np.sqrt(c2)

    def flux(self, U, axis=0):
        rho, vels, p = self._raw_primitive(U)
        self._require_valid_parts(rho, p)
        return self._flux_from_parts(U, vels, p, axis)

    def _flux_from_parts(self, U, vels, p, axis):
        un = vels[axis]
        comps = [U[0] * un]
        for d in range(self.ndim):
            mom_flux = U[1 + d] * un
            if d == axis:
                mom_flux = mom_flux + p
            comps.append(mom_flux)
        comps.append((U[1 + self.ndim] + p) * un)
        return np.stack(np.broadcast_arrays(*comps))

    def reflect_flip_index(self, axis):
        return 1 + axis


class Euler1D(_EulerBase):
    """1D compressible Euler equations, conserved variables (rho, rho*U, rho*E)."""

    nvars = 3
    ndim = 1

    def jacobian(self, U, axis=0):
        g = self.gamma
        rho, (u,), p = self._raw_primitive(U)
        E = U[2] / rho
        one = np.ones_like(rho)
        zero = np.zeros_like(rho)
        A = np.stack(
            [
                np.stack([zero, one, zero]),
                np.stack([0.5 * (g - 3.0) * u * u, (3.0 - g) * u, (g - 1.0) * one]),
                np.stack(
                    [
                        u * ((g - 1.0) * u * u - g * E),
                        g * E - 1.5 * (g - 1.0) * u * u,
                        g * u,
                    ]
                ),
            ]
        )
        return A

    def eig(self, U, axis=0):
        g = self.gamma
        rho, (u,), p = self._raw_primitive(U)
        self._require_valid_parts(rho, p)
        c2 = g * p / rho
        if np.any(c2 <= 0.0) or not np.all(np.isfinite(c2)):
            raise DegenerateEigensystem("sound speed is not positive")
        c = np.sqrt(c2)
        H = (U[2] + p) / rho
        trail = np.shape(rho)
        lam = np.empty((3,) + trail)
        lam[0], lam[1], lam[2] = u - c, u, u + c
        R = np.empty((3, 3) + trail)
        R[0] = 1.0
        R[1, 0], R[1, 1], R[1, 2] = lam[0], u, lam[2]
        R[2, 0], R[2, 1], R[2, 2] = H - u * c, 0.5 * u * u, H + u * c
        b1 = (g - 1.0) / c2
        b2 = 0.5 * b1 * u * u
        inv_c = 1.0 / c
        L = np.empty((3, 3) + trail)
        L[0, 0] = 0.5 * (b2 + u * inv_c)
        L[0, 1] = -0.5 * (b1 * u + inv_c)
        L[0, 2] = 0.5 * b1
        L[1, 0] = 1.0 - b2
        L[1, 1] = b1 * u
        L[1, 2] = -b1
        L[2, 0] = 0.5 * (b2 - u * inv_c)
        L[2, 1] = -0.5 * (b1 * u - inv_c)
        L[2, 2] = 0.5 * b1
        return lam, R, L


class Euler2D(_EulerBase):
    """2D compressible Euler equations, conserved variables (rho, rho*U, rho*V, rho*E)."""

    nvars = 4
    ndim = 2

    def jacobian(self, U, axis=0):
        g = self.gamma
        rho, (u, v), p = self._raw_primitive(U)
        un, ut = (u, v) if axis == 0 else (v, u)
        q2 = u * u + v * v
        H = (U[3] + p) / rho
        one = np.ones_like(rho)
        zero = np.zeros_like(rho)
        # Rows for the normal-direction flux with (n, t) = (normal, tangential)
        # component ordering, permuted back afterwards for axis=1.
        row0 = [zero, one, zero, zero]
        row_n = [
            0.5 * (g - 1.0) * q2 - un * un,
            (3.0 - g) * un,
            -(g - 1.0) * ut,
            (g - 1.0) * one,
        ]
        row_t = [-un * ut, ut, un, zero]
        row_e = [
            un * (0.5 * (g - 1.0) * q2 - H),
            H - (g - 1.0) * un * un,
            -(g - 1.0) * un * ut,
            g * un,
        ]
        rows = [row0, row_n, row_t, row_e]
        A = np.stack([np.stack(np.broadcast_arrays(*r)) for r in rows])
        if axis == 1:
            perm = [0, 2, 1, 3]
            A = A[perm][:, perm]
        return A

    def eig(self, U, axis=0):
        g = self.gamma
        rho, (u, v), p = self._raw_primitive(U)
        self._require_valid_parts(rho, p)
        c2 = g * p / rho
        if np.any(c2 <= 0.0) or not np.all(np.isfinite(c2)):
            raise DegenerateEigensystem("sound speed is not positive")
        c = np.sqrt(c2)
        H = (U[3] + p) / rho
        q2 = u * u + v * v
        un, ut = (u, v) if axis == 0 else (v, u)
        trail = np.shape(rho)
        lam = np.empty((4,) + trail)
        lam[0], lam[1], lam[2], lam[3] = un - c, un, un, un + c
        # Eigenvectors built in (rho, mom_n, mom_t, E) ordering, permuted
        # back to conserved ordering for the y direction.
        R = np.empty((4, 4) + trail)
        R[0, 0], R[0, 1], R[0, 2], R[0, 3] = 1.0, 1.0, 0.0, 1.0
        R[1, 0], R[1, 1], R[1, 2], R[1, 3] = un - c, un, 0.0, un + c
        R[2, 0], R[2, 1], R[2, 2], R[2, 3] = ut, ut, 1.0, ut
        R[3, 0], R[3, 1], R[3, 2], R[3, 3] = H - un * c, 0.5 * q2, ut, H + un * c
        b1 = (g - 1.0) / c2
        b2 = 0.5 * b1 * q2
        inv_c = 1.0 / c
        L = np.empty((4, 4) + trail)
        L[0, 0] = 0.5 * (b2 + un * inv_c)
        L[0, 1] = -0.5 * (b1 * un + inv_c)
        L[0, 2] = -0.5 * b1 * ut
        L[0, 3] = 0.5 * b1
        L[1, 0] = 1.0 - b2
        L[1, 1] = b1 * un
        L[1, 2] = b1 * ut
        L[1, 3] = -b1
        L[2, 0] = -ut
        L[2, 1] = 0.0
        L[2, 2] = 1.0
        L[2, 3] = 0.0
        L[3, 0] = 0.5 * (b2 - un * inv_c)
        L[3, 1] = -0.5 * (b1 * un - inv_c)
        L[3, 2] = -0.5 * b1 * ut
        L[3, 3] = 0.5 * b1
        if axis == 1:
            perm = [0, 2, 1, 3]
            R = R[perm]          # rows are conserved components
            L = L[:, perm]       # columns are conserved components
        return lam, R, L


# ---------------------------------------------------------------------------
# Per-state contract operations (thin typed wrappers over the model methods).
# ---------------------------------------------------------------------------


def primitive_from_conserved(w, system) -> PrimitiveVector:
    """Convert one conserved state to primitives; raises NonPhysicalState."""
    w = np.asarray(w, dtype=float)
    parts = system.primitive(w)
    if system.nvars == 1:
        return PrimitiveVector(float(parts[0]), np.zeros(0), 0.0)
    rho, *vels, p = parts
    return PrimitiveVector(float(rho), np.array([float(v) for v in vels]), float(p))


def conserved_from_primitive(prim: PrimitiveVector, system):
    """Inverse of primitive_from_conserved."""
    if system.nvars == 1:
        return np.array([prim.rho])
    return system.conserved(prim.rho, tuple(prim.velocity), prim.pressure)


def physical_flux(w, system, axis=0):
    """Exact flux F(W) (axis=0) or G(W) (axis=1) of a valid state."""
    return system.flux(np.asarray(w, dtype=float), axis=axis)


def build_split_jacobian(w, system, axis=0) -> SplitJacobian:
    """Analytic Jacobian with eigen-factorization and hard max/min(lam, 0) split.

    No entropy-fix smoothing is applied at sonic points.
    """
    w = np.asarray(w, dtype=float)
    lam, R, L = system.eig(w, axis=axis)
    A = system.jacobian(w, axis=axis)
    lam_p = np.maximum(lam, 0.0)
    lam_m = np.minimum(lam, 0.0)
    A_plus = np.einsum("ik...,k...,kj...->ij...", R, lam_p, L)
    A_minus = np.einsum("ik...,k...,kj...->ij...", R, lam_m, L)
    return SplitJacobian(A, lam, R, L, A_plus, A_minus)


def steger_warming_flux_pair(w, system, axis=0):
    """Split fluxes (F_plus, F_minus) with F_plus + F_minus = F(W).

    Uses the degree-one homogeneity of the perfect-gas Euler flux:
    F_pm = A_pm W.
    """
    w = np.asarray(w, dtype=float)
    lam, R, L = system.eig(w, axis=axis)
    char = matvec(L, w)
    f_plus = matvec(R, np.maximum(lam, 0.0) * char)
    f_minus = matvec(R, np.minimum(lam, 0.0) * char)
    return f_plus, f_minus
