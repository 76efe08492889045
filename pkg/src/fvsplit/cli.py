"""Command-line harness: runs, convergence studies, comparisons, timings.

Subcommands: run, convergence, compare, leading-term-study, reference.
`run` accepts an optional config file of `key = value` lines (# comments);
command-line flags override file entries.  All numeric output is CSV with
full-precision floats plus a JSON summary per run.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .driver import SCHEME_NAMES, SchemeConfig, run_lockstep, run_to_time
from .errors import ConfigError, StepRejected
from .hfvs import JACOBIAN_EVAL_MODES, LEADING_TERM_KINDS
from .mesh import GridField, GridSpec
from .problems import (
    PROBLEMS,
    boundary_conditions,
    exact_cell_averages,
    generate_reference,
    init_cell_averages,
    project_cell_averages,
    summary_record,
    system_for_problem,
    write_summary,
)
from .reports import (
    ErrorReport,
    TimingReport,
    error_norms,
    write_field_csv,
    write_profile_overlay_csv,
)

DEFAULT_GRIDS = (20, 40, 80, 160, 320, 640)

CONFIG_KEYS = {
    "problem", "scheme", "leading_term", "jacobian_eval", "cfl", "n", "nx", "ny",
    "tend", "out", "output_every", "threads", "fallback_first_order",
}


def parse_config_file(path):
    """Key-value config parser with line diagnostics."""
    settings = {}
    text = Path(path).read_text()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in CONFIG_KEYS:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        settings[key] = value
    return settings


def _as_int(value, key):
    try:
        return int(value)
    except (TypeError, ValueError):
        raise ConfigError(f"key {key!r}: expected an integer, got {value!r}") from None


def _as_float(value, key):
    try:
        return float(value)
    except (TypeError, ValueError):
        raise ConfigError(f"key {key!r}: expected a number, got {value!r}") from None


def _as_bool(value, key):
    if isinstance(value, bool):
        return value
    if str(value).lower() in ("1", "true", "yes", "on"):
        return True
    if str(value).lower() in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"key {key!r}: expected a boolean, got {value!r}")


def resolve_run_settings(args):
    """Merge config file and flags into validated run settings."""
    cfg = {}
    if getattr(args, "config", None):
        cfg = parse_config_file(args.config)
    def pick(key, flag_value):
        return flag_value if flag_value is not None else cfg.get(key)

    problem = pick("problem", args.problem)
    if problem not in PROBLEMS:
        raise ConfigError(
            f"key 'problem': unknown problem {problem!r}; choices: {sorted(PROBLEMS)}"
        )
    spec = PROBLEMS[problem]

    scheme_name = pick("scheme", args.scheme)
    if scheme_name not in SCHEME_NAMES:
        raise ConfigError(
            f"key 'scheme': unknown scheme {scheme_name!r}; choices: {list(SCHEME_NAMES)}"
        )
    leading = pick("leading_term", getattr(args, "leading_term", None)) or "steger-warming"
    if leading not in LEADING_TERM_KINDS:
        raise ConfigError(f"key 'leading_term': unknown kind {leading!r}")
    jac = pick("jacobian_eval", getattr(args, "jacobian_eval", None)) or "interface-limit"
    if jac not in JACOBIAN_EVAL_MODES:
        raise ConfigError(f"key 'jacobian_eval': unknown mode {jac!r}")

    cfl = _as_float(pick("cfl", args.cfl) or spec.default_cfl, "cfl")
    if not 0.0 < cfl <= 1.0:
        raise ConfigError(f"key 'cfl': must lie in (0, 1], got {cfl}")

    if spec.dimension == 1:
        n = (_as_int(pick("n", args.n) or spec.default_n[0], "n"),)
    else:
        nx = _as_int(pick("nx", getattr(args, "nx", None)) or pick("n", args.n) or spec.default_n[0], "nx")
        ny = _as_int(pick("ny", getattr(args, "ny", None)) or pick("n", args.n) or spec.default_n[1], "ny")
        n = (nx, ny)

    tend_raw = pick("tend", args.tend)
    tend = spec.default_t_end if tend_raw is None else _as_float(tend_raw, "tend")
    out = Path(pick("out", args.out) or "out")
    every = _as_int(pick("output_every", getattr(args, "output_every", None)) or 0, "output_every")
    threads = _as_int(pick("threads", args.threads) or 1, "threads")
    fallback = _as_bool(
        pick("fallback_first_order", getattr(args, "fallback_first_order", None) or None)
        or False,
        "fallback_first_order",
    )
    return {
        "spec": spec,
        "scheme": SchemeConfig(scheme_name, leading_term=leading, jacobian_eval=jac),
        "cfl": cfl,
        "n": n,
        "tend": tend,
        "out": out,
        "output_every": every,
        "threads": threads,
        "fallback": fallback,
    }


def _make_field(spec, scheme, n):
    grid = GridSpec(tuple(n), spec.domain, scheme.ghost_width)
    return init_cell_averages(spec, grid)


def _run_one(spec, scheme, n, cfl, tend, threads=1, fallback=False, callback=None, callback_every=1):
    system = system_for_problem(spec)
    field = _make_field(spec, scheme, n)
    bcs = boundary_conditions(spec)
    final, stats = run_to_time(
        field, tend, scheme, bcs, system, cfl,
        fallback_first_order=fallback, threads=threads,
        callback=callback, callback_every=callback_every,
    )
    return system, final, stats


def cmd_run(args):
    s = resolve_run_settings(args)
    spec, scheme = s["spec"], s["scheme"]
    system = system_for_problem(spec)
    out = s["out"]
    out.mkdir(parents=True, exist_ok=True)
    tag = f"{spec.name}_{scheme.name}"

    initial = _make_field(spec, scheme, s["n"])
    write_field_csv(out / f"fields_{tag}_t0.csv", initial, system)
    if s["tend"] <= 0.0:
        print(f"zero-duration run: wrote initial condition only to {out}")
        return 0

    dumps = []
    def snapshot(record, fieldnow):
        path = out / f"fields_{tag}_step{record.step}.csv"
        write_field_csv(path, fieldnow.copy(), system)
        dumps.append(str(path))

    callback = snapshot if s["output_every"] > 0 else None
    every = s["output_every"] if s["output_every"] > 0 else 1
    try:
        system, final, stats = _run_one(
            spec, scheme, s["n"], s["cfl"], s["tend"],
            threads=s["threads"], fallback=s["fallback"],
            callback=callback, callback_every=every,
        )
    except StepRejected as exc:
        print(f"run failed: {exc}", file=sys.stderr)
        return 1
    final_path = out / f"fields_{tag}_final.csv"
    write_field_csv(final_path, final, system)
    record = summary_record(
        spec, scheme.name, s["n"], s["cfl"], s["tend"], stats,
        extra={"leading_term": scheme.leading_term, "jacobian_eval": scheme.jacobian_eval,
               "field_dumps": dumps + [str(final_path)]},
    )
    write_summary(out / f"summary_{tag}.json", record)
    closed = all(k == "periodic" for pair in spec.bc_kinds for k in pair)
    change = max(stats.conservation_drift)
    totals_note = (
        f"max conservation drift {change:.3e}"
        if closed
        else f"max conserved-total change {change:.3e} (boundary fluxes included)"
    )
    print(f"{tag}: {stats.steps} steps, {stats.wall_seconds:.3f}s, {totals_note}")
    return 0


def cmd_convergence(args):
    problem = args.problem
    if problem not in PROBLEMS:
        raise ConfigError(f"key 'problem': unknown problem {problem!r}")
    spec = PROBLEMS[problem]
    if not spec.has_exact:
        raise ConfigError(f"problem {problem!r} has no exact solution; convergence needs one")
    if args.scheme not in SCHEME_NAMES:
        raise ConfigError(f"key 'scheme': unknown scheme {args.scheme!r}")
    scheme = SchemeConfig(args.scheme, leading_term=args.leading_term or "steger-warming")
    grids = tuple(int(n) for n in args.grids.split(",")) if args.grids else DEFAULT_GRIDS
    cfl = args.cfl if args.cfl is not None else spec.default_cfl
    tend = args.tend if args.tend is not None else spec.default_t_end

    report = ErrorReport(scheme=scheme.name, problem=spec.name)
    for n in grids:
        system, final, stats = _run_one(spec, scheme, (n,), cfl, tend)
        exact = exact_cell_averages(spec, final.grid, final.time)
        l1, l2, linf = error_norms(final.interior - exact)
        report.add(n, l1, l2, linf)
        row = report.rows[-1]
        orders = "" if row["order_l1"] is None else (
            f"  orders {row['order_l1']:.3f} {row['order_l2']:.3f} {row['order_linf']:.3f}"
        )
        print(f"N={n:5d}  L1={l1:.4e}  L2={l2:.4e}  Linf={linf:.4e}{orders}")
    out = Path(args.out or "out")
    path = out / f"convergence_{spec.name}_{scheme.name}.csv"
    report.write_csv(path)
    print(f"wrote {path}")
    return 0


def cmd_compare(args):
    if args.problem not in PROBLEMS:
        raise ConfigError(f"key 'problem': unknown problem {args.problem!r}")
    spec = PROBLEMS[args.problem]
    schemes = [s.strip() for s in args.schemes.split(",") if s.strip()]
    if len(schemes) < 2:
        raise ConfigError("compare needs at least two schemes (--schemes a,b)")
    for name in schemes:
        if name not in SCHEME_NAMES:
            raise ConfigError(f"key 'schemes': unknown scheme {name!r}")
    n = args.n or spec.default_n[0]
    cfl = args.cfl if args.cfl is not None else spec.default_cfl
    tend = args.tend if args.tend is not None else spec.default_t_end
    out = Path(args.out or "out")
    out.mkdir(parents=True, exist_ok=True)

    system = system_for_problem(spec)
    timing = TimingReport(baseline=schemes[0])
    configs = [
        SchemeConfig(name, leading_term=args.leading_term or "steger-warming")
        for name in schemes
    ]
    fields = [_make_field(spec, scheme, (n,)) for scheme in configs]
    bcs = boundary_conditions(spec)
    # One shared dt sequence: paired schemes take identical step counts and
    # the wall-clock comparison is like for like.
    outcome = run_lockstep(fields, configs, tend, bcs, system, cfl)
    results = []
    failures = []
    for name, (final, stats, error) in zip(schemes, outcome):
        if error is not None:
            failures.append((name, error))
            print(f"{name}: FAILED: {error}", file=sys.stderr)
            continue
        timing.add(name, stats.steps, stats.wall_seconds)
        results.append((name, final))
        print(f"{name}: {stats.steps} steps, {stats.wall_seconds:.3f}s")

    if results:
        write_profile_overlay_csv(out / f"compare_{spec.name}_fields.csv", results, system)
    if timing.rows:
        timing.write_csv(out / f"compare_{spec.name}_timing.csv")
    if args.with_reference and spec.reference_n and results:
        ref = project_cell_averages(generate_reference(spec, cache_dir=args.cache_dir), n)
        dists = {name: error_norms(final.interior[0] - ref[0])[0] for name, final in results}
        with (out / f"compare_{spec.name}_reference_l1.json").open("w") as fh:
            json.dump(dists, fh, indent=2)
        for name, d in dists.items():
            print(f"{name}: L1 density distance to reference = {d:.5e}")
    return 1 if failures else 0


def cmd_leading_term_study(args):
    if args.order not in (2, 5):
        raise ConfigError("leading-term-study supports orders 2 and 5")
    if args.problem not in PROBLEMS:
        raise ConfigError(f"key 'problem': unknown problem {args.problem!r}")
    spec = PROBLEMS[args.problem]
    n = args.n or spec.default_n[0]
    cfl = args.cfl if args.cfl is not None else spec.default_cfl
    tend = args.tend if args.tend is not None else spec.default_t_end
    out = Path(args.out or "out")
    out.mkdir(parents=True, exist_ok=True)

    system = system_for_problem(spec)
    results = []
    for kind in LEADING_TERM_KINDS:
        scheme = SchemeConfig(f"hfvs{args.order}", leading_term=kind)
        _, final, stats = _run_one(spec, scheme, (n,), cfl, tend)
        results.append((kind, final))
        print(f"hfvs{args.order} + {kind}: {stats.steps} steps")
    write_profile_overlay_csv(out / f"leading_term_{spec.name}_hfvs{args.order}.csv", results, system)
    density = [final.interior[0] for _, final in results]
    max_diff = float(np.abs(density[0] - density[1]).max())
    write_summary(
        out / f"leading_term_{spec.name}_hfvs{args.order}.json",
        {"problem": spec.name, "order": args.order, "n": n,
         "max_pointwise_density_difference": max_diff},
    )
    print(f"max pointwise density difference ({' vs '.join(LEADING_TERM_KINDS)}): {max_diff:.6e}")
    return 0


def cmd_reference(args):
    if args.problem not in PROBLEMS:
        raise ConfigError(f"key 'problem': unknown problem {args.problem!r}")
    spec = PROBLEMS[args.problem]
    data = generate_reference(
        spec,
        fine_n=args.n or None,
        scheme_name=args.scheme or None,
        cache_dir=args.cache_dir,
    )
    print(f"reference for {spec.name}: {data.shape[1]} cells cached under {args.cache_dir}")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="fvsplit",
        description="Finite-volume runs of the split-flux high-order scheme and its WENO+RK3 baseline.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one configuration, dump fields and a summary")
    run.add_argument("config", nargs="?", help="config file of key = value lines")
    run.add_argument("--problem")
    run.add_argument("--scheme")
    run.add_argument("--leading-term", dest="leading_term")
    run.add_argument("--jacobian-eval", dest="jacobian_eval")
    run.add_argument("--cfl", type=float)
    run.add_argument("--n", type=int)
    run.add_argument("--nx", type=int)
    run.add_argument("--ny", type=int)
    run.add_argument("--tend", type=float)
    run.add_argument("--out")
    run.add_argument("--output-every", dest="output_every", type=int)
    run.add_argument("--threads", type=int)
    run.add_argument("--fallback-first-order", dest="fallback_first_order",
                     action="store_const", const=True)
    run.add_argument("--seed-free", action="store_true",
                     help="assert determinism (the solver uses no RNG anywhere)")
    run.set_defaults(func=cmd_run)

    conv = sub.add_parser("convergence", help="grid-refinement error study against an exact solution")
    conv.add_argument("--problem", required=True)
    conv.add_argument("--scheme", required=True)
    conv.add_argument("--grids", help="comma-separated cell counts (default 20..640)")
    conv.add_argument("--cfl", type=float)
    conv.add_argument("--tend", type=float)
    conv.add_argument("--leading-term", dest="leading_term")
    conv.add_argument("--out")
    conv.set_defaults(func=cmd_convergence)

    comp = sub.add_parser("compare", help="run several schemes on one problem; overlay + timing")
    comp.add_argument("--problem", required=True)
    comp.add_argument("--schemes", required=True, help="comma-separated scheme names (>= 2)")
    comp.add_argument("--n", type=int)
    comp.add_argument("--cfl", type=float)
    comp.add_argument("--tend", type=float)
    comp.add_argument("--leading-term", dest="leading_term")
    comp.add_argument("--with-reference", action="store_true",
                      help="also report L1 density distances to the fine reference")
    comp.add_argument("--cache-dir", default=".refcache")
    comp.add_argument("--out")
    comp.set_defaults(func=cmd_compare)

    lts = sub.add_parser("leading-term-study", help="same order, different leading terms")
    lts.add_argument("--problem", required=True)
    lts.add_argument("--order", type=int, required=True)
    lts.add_argument("--n", type=int)
    lts.add_argument("--cfl", type=float)
    lts.add_argument("--tend", type=float)
    lts.add_argument("--out")
    lts.set_defaults(func=cmd_leading_term_study)

    ref = sub.add_parser("reference", help="generate and cache a fine-grid reference")
    ref.add_argument("--problem", required=True)
    ref.add_argument("--n", type=int)
    ref.add_argument("--scheme")
    ref.add_argument("--cache-dir", default=".refcache")
    ref.set_defaults(func=cmd_reference)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except StepRejected as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
