"""Catalog of the shipped test problems, exact solutions and references.

Initial cell averages come from 5-point Gauss-Legendre quadrature of the
pointwise initial condition, applied per axis (tensor product in 2D).
Jumps are placed on cell faces wherever the stated grid allows it; a jump
crossing a cell interior (the 2D disk rim) is smeared by the quadrature
within that one cell.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .driver import SchemeConfig, run_to_time
from .mesh import BoundaryCondition, GridField, GridSpec
from .physics import EosParams, Euler1D, Euler2D, LinearAdvection

REFERENCE_FORMAT_VERSION = 1

GAMMA_DEFAULT = 1.4


@dataclass(frozen=True)
class ProblemSpec:
    """One named initial/boundary-value setup."""

    name: str
    dimension: int
    domain: tuple
    nvars: int
    initial_primitive: object      # positions -> tuple of primitive fields
    bc_kinds: tuple                # per-axis (low, high) boundary kind names
    default_t_end: float
    default_cfl: float
    default_n: tuple
    gamma: float = GAMMA_DEFAULT
    advection_speeds: tuple = (1.0,)
    has_exact: bool = False
    reference_scheme: str = "weno3rk3"
    reference_n: int = 0           # 0: no fine reference configured
    description: str = ""


def system_for_problem(spec: ProblemSpec):
    if spec.nvars == 1:
        return LinearAdvection(spec.advection_speeds)
    if spec.nvars == 3:
        return Euler1D(EosParams(spec.gamma))
    return Euler2D(EosParams(spec.gamma))


def boundary_conditions(spec: ProblemSpec, bc_override=None):
    """Per-axis (low, high) BoundaryCondition pairs for a problem.

    bc_override replaces every side's kind; 'inflow-exact' is supported for
    problems with an exact solution (ghost averages from the exact field).
    """
    kinds = spec.bc_kinds if bc_override is None else tuple(
        (bc_override, bc_override) for _ in spec.bc_kinds
    )
    out = []
    for axis, (lo, hi) in enumerate(kinds):
        pair = []
        for kind in (lo, hi):
            if kind == "inflow-exact":
                if not spec.has_exact:
                    raise ValueError(f"{spec.name} has no exact solution for inflow")
                pair.append(
                    BoundaryCondition(
                        "inflow-exact",
                        exact_averages=lambda centers, t, s=spec: _exact_ghost_averages(
                            s, centers, t
                        ),
                    )
                )
            else:
                pair.append(BoundaryCondition(kind))
        out.append(tuple(pair))
    return tuple(out)


# ---------------------------------------------------------------------------
# Initial conditions (pointwise, primitive variables).
# ---------------------------------------------------------------------------


def _ic_sine(x):
    return (np.sin(2.0 * np.pi * x),)


def _ic_density_wave(x):
    return (1.0 + 0.2 * np.sin(2.0 * np.pi * x), np.ones_like(x), np.ones_like(x))


def _ic_shu_osher(x):
    left = x < -0.8
    rho = np.where(left, 3.857143, 1.0 + 0.2 * np.sin(5.0 * np.pi * x))
    u = np.where(left, 2.629369, 0.0)
    p = np.where(left, 10.333333, 1.0)
    return rho, u, p


def _ic_blast(x):
    p = np.where(x < 0.1, 1000.0, np.where(x < 0.9, 0.01, 100.0))
    return np.ones_like(x), np.zeros_like(x), p


def _ic_quadrant(x, y):
    low = (x < 0.5) ^ (y < 0.5)  # NW and SE quadrants take the low state
    rho = np.where(low, 0.1, 1.0)
    p = np.where(low, 0.1, 1.0)
    z = np.zeros_like(x)
    return rho, z, z, p


def _ic_disk(x, y):
    inside = (x - 0.5) ** 2 + (y - 0.5) ** 2 <= 0.3 ** 2
    rho = np.where(inside, 1.0, 0.125)
    p = np.where(inside, 1.0, 0.1)
    z = np.zeros_like(x)
    return rho, z, z, p


PROBLEMS = {
    "advect-sine": ProblemSpec(
        name="advect-sine",
        dimension=1,
        domain=((0.0, 1.0),),
        nvars=1,
        initial_primitive=_ic_sine,
        bc_kinds=(("periodic", "periodic"),),
        default_t_end=1.0,
        default_cfl=0.95,
        default_n=(100,),
        has_exact=True,
        description="smooth sine advected at unit speed; the accuracy-study problem",
    ),
    "density-wave": ProblemSpec(
        name="density-wave",
        dimension=1,
        domain=((0.0, 1.0),),
        nvars=3,
        initial_primitive=_ic_density_wave,
        bc_kinds=(("periodic", "periodic"),),
        default_t_end=1.0,
        default_cfl=0.95,
        default_n=(100,),
        description="periodic density wave carried by uniform flow; conservation checks",
    ),
    "shu-osher": ProblemSpec(
        name="shu-osher",
        dimension=1,
        domain=((-1.0, 1.0),),
        nvars=3,
        initial_primitive=_ic_shu_osher,
        bc_kinds=(("outflow", "outflow"),),
        default_t_end=0.47,
        default_cfl=0.95,
        default_n=(200,),
        reference_n=2000,
        description="Mach-3 shock running into a sinusoidal density field",
    ),
    "blast": ProblemSpec(
        name="blast",
        dimension=1,
        domain=((0.0, 1.0),),
        nvars=3,
        initial_primitive=_ic_blast,
        bc_kinds=(("reflective", "reflective"),),
        default_t_end=0.038,
        default_cfl=0.95,
        default_n=(800,),
        reference_n=10000,
        description="interacting blast waves between reflecting walls",
    ),
    "quadrant2d": ProblemSpec(
        name="quadrant2d",
        dimension=2,
        domain=((0.0, 1.0), (0.0, 1.0)),
        nvars=4,
        initial_primitive=_ic_quadrant,
        bc_kinds=(("outflow", "outflow"), ("outflow", "outflow")),
        default_t_end=0.15,
        default_cfl=0.45,
        default_n=(100, 100),
        description="four-quadrant Riemann data, checkerboard about the center",
    ),
    "disk2d": ProblemSpec(
        name="disk2d",
        dimension=2,
        domain=((0.0, 1.0), (0.0, 1.0)),
        nvars=4,
        initial_primitive=_ic_disk,
        bc_kinds=(("reflective", "reflective"), ("reflective", "reflective")),
        default_t_end=1.0,
        default_cfl=0.45,
        default_n=(100, 100),
        description="pressurized disk in a closed box; long-time reflections",
    ),
}


# ---------------------------------------------------------------------------
# Cell-average initialization.
# ---------------------------------------------------------------------------

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(5)
_GL_NODES = _GL_NODES * 0.5          # scaled to a unit-width cell
_GL_WEIGHTS = _GL_WEIGHTS * 0.5


def _pointwise_conserved(spec: ProblemSpec, system, *coords):
    prim = spec.initial_primitive(*coords)
    if spec.nvars == 1:
        return np.stack([prim[0]])
    rho, *vels, p = prim
    return system.conserved(rho, tuple(vels), p)


def init_cell_averages(spec: ProblemSpec, grid: GridSpec) -> GridField:
    """Gauss-quadrature cell averages of the initial condition."""
    if grid.dimension != spec.dimension:
        raise ValueError("grid dimension does not match the problem")
    system = system_for_problem(spec)
    field = GridField.empty(grid, spec.nvars)
    if grid.dimension == 1:
        xc = grid.cell_centers(0)
        acc = 0.0
        for node, wq in zip(_GL_NODES, _GL_WEIGHTS):
            acc = acc + wq * _pointwise_conserved(spec, system, xc + node * grid.dx)
        field.interior = acc
    else:
        xc = grid.cell_centers(0)[:, None]
        yc = grid.cell_centers(1)[None, :]
        acc = 0.0
        for nx_, wx in zip(_GL_NODES, _GL_WEIGHTS):
            for ny_, wy in zip(_GL_NODES, _GL_WEIGHTS):
                acc = acc + wx * wy * _pointwise_conserved(
                    spec, system, xc + nx_ * grid.dx, yc + ny_ * grid.dy
                )
        field.interior = acc
    field.time = 0.0
    return field


# ---------------------------------------------------------------------------
# Exact solutions (the advection accuracy problem).
# ---------------------------------------------------------------------------


def exact_solution_advection(x, t):
    """Pointwise exact solution of the unit-speed sine advection problem."""
    return np.sin(2.0 * np.pi * (np.asarray(x) - t))


def advection_exact_cell_averages(edges, t):
    """Exact cell averages of the advected sine between consecutive edges."""
    edges = np.asarray(edges, dtype=float)
    anti = -np.cos(2.0 * np.pi * (edges - t)) / (2.0 * np.pi)
    return (anti[1:] - anti[:-1]) / np.diff(edges)


def exact_cell_averages(spec: ProblemSpec, grid: GridSpec, t):
    """Exact cell-average field for problems that have one."""
    if spec.name != "advect-sine":
        raise ValueError(f"{spec.name} has no exact solution")
    return advection_exact_cell_averages(grid.cell_edges(0), t)[None, :]


def _exact_ghost_averages(spec: ProblemSpec, centers, t):
    h = centers[1] - centers[0] if len(centers) > 1 else 0.0
    if h == 0.0:
        h = 1e-300
    edges = np.concatenate([centers - 0.5 * h, [centers[-1] + 0.5 * h]])
    return advection_exact_cell_averages(edges, t)[None, :]


# ---------------------------------------------------------------------------
# Fine-grid reference solutions with a disk cache.
# ---------------------------------------------------------------------------


def project_cell_averages(fine, n_coarse):
    """Aggregate fine cell averages onto a coarse grid spanning the same interval.

    Exact when the coarse edges align with fine edges; otherwise the fine
    field is treated as piecewise constant and split cells are weighted by
    overlap.
    """
    fine = np.asarray(fine)
    m, n_fine = fine.shape
    if n_coarse == n_fine:
        return fine.copy()
    if n_coarse > n_fine:
        raise ValueError("cannot project onto a finer grid")
    fine_edges = np.linspace(0.0, 1.0, n_fine + 1)
    coarse_edges = np.linspace(0.0, 1.0, n_coarse + 1)
    out = np.empty((m, n_coarse))
    for k in range(m):
        cumint = np.concatenate([[0.0], np.cumsum(fine[k]) / n_fine])
        at_coarse = np.interp(coarse_edges, fine_edges, cumint)
        out[k] = np.diff(at_coarse) * n_coarse
    return out


def reference_cache_path(cache_dir, spec: ProblemSpec, scheme_name, n):
    return Path(cache_dir) / f"ref_{spec.name}_{scheme_name}_n{n}.npz"


def generate_reference(
    spec: ProblemSpec,
    fine_n=None,
    scheme_name=None,
    cfl=0.9,
    cache_dir=".refcache",
    t_end=None,
):
    """Fine-grid reference cell averages for a problem without an exact solution.

    Runs the configured scheme at the fine resolution (cached on disk keyed
    by problem, scheme and N) and returns the (m, fine_n) interior averages.
    """
    if spec.dimension != 1:
        raise ValueError("references are generated for 1D problems")
    fine_n = fine_n or spec.reference_n
    scheme_name = scheme_name or spec.reference_scheme
    t_end = spec.default_t_end if t_end is None else t_end
    if fine_n <= 0:
        raise ValueError(f"{spec.name} has no reference resolution configured")
    path = reference_cache_path(cache_dir, spec, scheme_name, fine_n)
    if path.exists():
        payload = np.load(path, allow_pickle=False)
        if (
            int(payload["version"][0]) == REFERENCE_FORMAT_VERSION
            and float(payload["t_end"][0]) == t_end
        ):
            return payload["data"]
    scheme = SchemeConfig(scheme_name)
    system = system_for_problem(spec)
    grid = GridSpec((fine_n,), spec.domain, scheme.ghost_width)
    field = init_cell_averages(spec, grid)
    bcs = boundary_conditions(spec)
    final, stats = run_to_time(field, t_end, scheme, bcs, system, cfl=cfl)
    path.parent.mkdir(parents=True, exist_ok=True)
    np.savez(
        path,
        version=np.array([REFERENCE_FORMAT_VERSION]),
        data=final.interior,
        t_end=np.array([t_end]),
        n=np.array([fine_n]),
        domain=np.array(spec.domain[0]),
        steps=np.array([stats.steps]),
        problem=np.array([spec.name]),
        scheme=np.array([scheme_name]),
    )
    return final.interior


def summary_record(spec: ProblemSpec, scheme_name, n, cfl, t_end, stats, extra=None):
    """Machine-readable per-run summary."""
    rec = {
        "problem": spec.name,
        "scheme": scheme_name,
        "n": list(n),
        "cfl": cfl,
        "t_end": t_end,
        "steps": stats.steps,
        "wall_seconds": stats.wall_seconds,
        "fallback_steps": stats.fallback_steps,
        "conservation_drift": [float(d) for d in stats.conservation_drift],
    }
    if extra:
        rec.update(extra)
    return rec


def write_summary(path, record):
    Path(path).write_text(json.dumps(record, indent=2) + "\n")
