"""Command-line front end: every capability as a subcommand.

Subcommands: identities, skew-check, znorm, corr-finite, corr-bulk,
two-point, sumrule, mc, oracle-compare, diag-tail.  Parameters can come from
flags or from a JSON file via --config (flags win).  Results go to --out as
CSV or JSON (floats printed with 17 significant digits, so identical
config + seed gives byte-identical files); without --out a single JSON
document is printed to stdout.  Every run also emits a manifest (command,
parameters, versions, seed, wall time) next to the output file or inline.

Exit codes: 0 success, 1 a validation/tolerance check failed, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .bulk import (
    BulkDensities,
    bulk_correlation,
    finite_to_bulk_convergence,
    two_point_explicit,
)
from .finite import correlation, correlation_zeta_route, write_correlation_csv
from .identities import IDENTITY_NAMES, run_identity_suite
from .montecarlo import (
    binned_pair_density,
    metropolis_sample,
    reference_pair_density,
    write_histogram_csv,
    write_samples_csv,
)
from .oracle import oracle_correlation
from .plasma import (
    PlasmaConfig,
    Weight,
    gram_matrices,
    partition_function,
    skew_structure,
    write_gram_csv,
)
from .sumrules import screening_sum, tail_coefficient_diagnostic

TWO_PI = 2.0 * np.pi


class UsageError(Exception):
    pass


def _fmt(x):
    return f"{x:.17g}"


def _parse_points(spec):
    """Parse "x1,x2;y1,y2" into (xs, ys); either side may be empty."""
    if ";" in spec:
        left, right = spec.split(";", 1)
    else:
        left, right = spec, ""
    xs = [float(t) for t in left.split(",") if t.strip()]
    ys = [float(t) for t in right.split(",") if t.strip()]
    return xs, ys


def _parse_int_list(spec):
    return [int(t) for t in str(spec).split(",") if str(t).strip()]


def _require(ns, *names):
    for name in names:
        if getattr(ns, name, None) is None:
            raise UsageError(f"missing required parameter --{name}")


def _densities(ns):
    _require(ns, "rhoR", "rhoG")
    return BulkDensities(ns.rhoR, ns.rhoG)


def _plasma_config(ns):
    _require(ns, "N1", "N2")
    return PlasmaConfig(ns.N1, ns.N2)


# ----------------------------------------------------------------------------
# handlers: each returns (exit_code, results_dict_or_rows, csv_writer_or_None)

def _run_identities(ns):
    thms = ns.thm.split(",") if ns.thm else ["all"]
    ns_list = _parse_int_list(ns.N or "2,4,6,8")
    l_list = _parse_int_list(ns.L or "1,2,3")
    reports = run_identity_suite(
        identities=thms,
        ns=tuple(ns_list),
        levels=tuple(l_list),
        trials=ns.trials,
        seed=ns.seed or 0,
        threads=ns.threads,
    )
    failed = [r.to_json() for r in reports if not r.passed]
    results = {
        "checks": [r.to_json() for r in reports],
        "total": len(reports),
        "failed": len(failed),
    }
    return (0 if not failed else 1), results, None


def _run_skew_check(ns):
    configs = []
    if ns.N1 is not None or ns.N2 is not None:
        configs.append(_plasma_config(ns))
    elif ns.max_order:
        for n1 in range(0, ns.max_order + 1, 2):
            for n2 in range((ns.max_order - n1) // 2 + 1):
                if n1 + n2 >= 1:
                    configs.append(PlasmaConfig(n1, n2))
    else:
        raise UsageError("give --N1/--N2 or --max-order")
    out = []
    code = 0
    for cfg in configs:
        try:
            s = skew_structure(cfg)
            out.append(
                {
                    "N1": cfg.n1,
                    "N2": cfg.n2,
                    "pass": True,
                    "permutation": list(s.permutation),
                    "blocks": [list(t) for t in s.normalization_ints],
                }
            )
        except AssertionError as exc:
            out.append({"N1": cfg.n1, "N2": cfg.n2, "pass": False, "error": str(exc)})
            code = 1
    return code, {"configs": out}, None


def _run_znorm(ns):
    cfg = _plasma_config(ns)
    u = Weight.from_json(json.loads(ns.u)) if ns.u else None
    v = Weight.from_json(json.loads(ns.v)) if ns.v else None
    z = partition_function(cfg, u=u, v=v, m=ns.nodes)
    results = {"N1": cfg.n1, "N2": cfg.n2, "Z": z}
    code = 0
    if u is None and v is None:
        tol = ns.tol if ns.tol is not None else 1e-10
        results["deviation_from_one"] = abs(z - 1.0)
        code = 0 if abs(z - 1.0) <= tol else 1
    if ns.dump_gram:
        g = gram_matrices(cfg, u=u, v=v, m=ns.nodes)
        results["gram"] = {"a": g.a, "b": g.b}
    return code, results, None


def _corr_rows(ns, evaluate):
    if not ns.points:
        raise UsageError("give at least one --points 'x1,..;y1,..'")
    rows = []
    for spec in ns.points:
        xs, ys = _parse_points(spec)
        rows.append(evaluate(xs, ys))
    return rows


def _run_corr_finite(ns):
    cfg = _plasma_config(ns)
    tol = ns.tol if ns.tol is not None else 1e-8
    code = 0
    rows = []
    for spec in ns.points or ():
        xs, ys = _parse_points(spec)
        rho = correlation(len(xs), len(ys), xs, ys, cfg)
        row = {
            "k1": len(xs), "k2": len(ys), "xs": xs, "ys": ys,
            "rho": rho, "abs_imag_residual": 0.0,
        }
        if ns.check_oracle:
            ref = oracle_correlation(len(xs), len(ys), xs, ys, cfg)
            row["oracle"] = ref
            if abs(rho - ref) > tol * max(abs(ref), 1e-8):
                code = 1
        if ns.check_zeta:
            zref = correlation_zeta_route(len(xs), len(ys), xs, ys, cfg)
            row["zeta_route"] = zref
            if abs(rho - zref) > tol * max(abs(rho), 1e-8):
                code = 1
        rows.append(row)
    if not rows:
        raise UsageError("give at least one --points 'x1,..;y1,..'")
    return code, {"rows": rows}, lambda fh: write_correlation_csv(rows, fh)


def _run_corr_bulk(ns):
    dens = _densities(ns)
    rows = _corr_rows(
        ns,
        lambda xs, ys: {
            "k1": len(xs), "k2": len(ys), "xs": xs, "ys": ys,
            "rho": bulk_correlation(len(xs), len(ys), xs, ys, dens),
            "abs_imag_residual": 0.0,
        },
    )
    return 0, {"rows": rows}, lambda fh: write_correlation_csv(rows, fh)


def _run_two_point(ns):
    dens = _densities(ns)
    _require(ns, "pair")
    n = ns.n or 101
    xmax = ns.xmax or 3.0
    tol = ns.tol if ns.tol is not None else 1e-6
    grid = np.linspace(xmax / n, xmax, n)
    rows = []
    code = 0
    for x in grid:
        val = two_point_explicit(ns.pair, x, dens)
        row = {"x": float(x), "value": val}
        if ns.compare:
            k1, k2 = {"rr": (2, 0), "gg": (0, 2), "rg": (1, 1)}[ns.pair]
            xs = [float(x), 0.0][: k1] if ns.pair != "rg" else [float(x)]
            ys = [] if ns.pair == "rr" else ([float(x), 0.0] if ns.pair == "gg" else [0.0])
            xs = [float(x), 0.0] if ns.pair == "rr" else xs
            pf = bulk_correlation(k1, k2, xs, ys, dens)
            row["pfaffian"] = pf
            if abs(pf - val) > tol:
                code = 1
        rows.append(row)

    def writer(fh):
        cols = ["x", "value"] + (["pfaffian"] if ns.compare else [])
        fh.write(",".join(cols) + "\n")
        for r in rows:
            fh.write(",".join(_fmt(r[c]) for c in cols) + "\n")

    return code, {"rows": rows}, writer


def _run_sumrule(ns):
    dens = _densities(ns)
    _require(ns, "rule")
    xs, ys = _parse_points(ns.points) if ns.points else ((), ())
    kwargs = {}
    if ns.X is not None:
        kwargs["x_max"] = ns.X
    if ns.tol is not None:
        kwargs["tol"] = ns.tol
    rep = screening_sum(ns.rule, dens, xs=xs, ys=ys, **kwargs)
    return (0 if rep["passed"] else 1), rep, None


def _run_mc(ns):
    cfg = _plasma_config(ns)
    mc = metropolis_sample(
        cfg,
        chains=ns.chains,
        steps=ns.steps,
        burn_in=ns.burn_in,
        seed=ns.seed or 0,
        thin=ns.thin,
    )
    results = {
        "N1": cfg.n1,
        "N2": cfg.n2,
        "kept_samples": int(len(mc.samples)),
        "acceptance": mc.acceptance,
        "step_sizes": mc.step_sizes,
    }
    code = 0
    hist = None
    if ns.pair:
        edges, est, sig = binned_pair_density(mc, ns.pair, bins=ns.bins)
        ref = reference_pair_density(cfg, ns.pair, edges)
        z = np.abs(est - ref) / sig
        results["histogram"] = {
            "pair": ns.pair,
            "bins_within_3_sigma": int((z < 3.0).sum()),
            "bins": int(len(est)),
            "max_z": float(z.max()),
        }
        hist = (edges, est, sig, ref)
        if ns.compare and (z < 3.0).sum() < int(0.9 * len(est)):
            code = 1
    if ns.out:
        base = Path(ns.out)
        with open(base, "w") as fh:
            write_samples_csv(mc, fh)
        if hist is not None:
            with open(base.with_suffix(base.suffix + ".hist.csv"), "w") as fh:
                write_histogram_csv(*hist, fh)
        results["samples_file"] = str(base)
    return code, results, None


def _run_oracle_compare(ns):
    cfg = _plasma_config(ns)
    tol = ns.tol if ns.tol is not None else 1e-8
    rng = np.random.default_rng(ns.seed or 0)
    pairs = [
        (k1, k2)
        for k1 in range(cfg.n1 + 1)
        for k2 in range(cfg.n2 + 1)
        if 1 <= k1 + k2 <= (ns.kmax or 2)
    ]
    worst = 0.0
    rows = []
    for k1, k2 in pairs:
        for _ in range(ns.trials):
            xs = _spread_points(rng, k1)
            ys = _spread_points(rng, k2)
            a = correlation(k1, k2, xs, ys, cfg)
            b = oracle_correlation(k1, k2, xs, ys, cfg)
            rel = abs(a - b) / max(abs(b), 1e-8)
            worst = max(worst, rel)
            rows.append({"k1": k1, "k2": k2, "pfaffian": a, "oracle": b, "rel": rel})
    results = {"worst_rel": worst, "tol": tol, "trials": ns.trials, "rows": rows}
    return (0 if worst <= tol else 1), results, None


def _spread_points(rng, k, min_gap=0.15):
    while True:
        pts = np.sort(rng.uniform(0.0, TWO_PI, k))
        if k < 2 or (np.min(np.diff(pts)) > min_gap
                     and (TWO_PI - pts[-1] + pts[0]) > min_gap):
            return pts.tolist()


def _run_diag_tail(ns):
    dens = _densities(ns)
    _require(ns, "pair")
    window = tuple(float(t) for t in (ns.window or "20,60").split(","))
    rep = tail_coefficient_diagnostic(ns.pair, dens, window=window)
    return 0, rep, None


HANDLERS = {
    "identities": _run_identities,
    "skew-check": _run_skew_check,
    "znorm": _run_znorm,
    "corr-finite": _run_corr_finite,
    "corr-bulk": _run_corr_bulk,
    "two-point": _run_two_point,
    "sumrule": _run_sumrule,
    "mc": _run_mc,
    "oracle-compare": _run_oracle_compare,
    "diag-tail": _run_diag_tail,
}


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file with parameter defaults")
    common.add_argument("--out", help="output file path")
    common.add_argument("--format", choices=("csv", "json"), default=None)
    common.add_argument("--threads", type=int, default=1)
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--tol", type=float, default=None)

    p = argparse.ArgumentParser(
        prog="genplasma",
        description="two-component generalized circular plasma toolkit",
    )
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("identities", parents=[common],
                        help="exact Pfaffian/Vandermonde identity suite")
    sp.add_argument("--thm", default="all",
                    help=f"comma list from {('all',) + IDENTITY_NAMES}")
    sp.add_argument("--N", default=None, help="comma list of even sizes")
    sp.add_argument("--L", default=None, help="comma list of confluent orders")
    sp.add_argument("--trials", type=int, default=100)

    sp = sub.add_parser("skew-check", parents=[common],
                        help="exact block skew-diagonalization check")
    sp.add_argument("--N1", type=int)
    sp.add_argument("--N2", type=int)
    sp.add_argument("--max-order", dest="max_order", type=int)

    sp = sub.add_parser("znorm", parents=[common],
                        help="partition function normalization")
    sp.add_argument("--N1", type=int)
    sp.add_argument("--N2", type=int)
    sp.add_argument("--u", help="one-body weight JSON for species R")
    sp.add_argument("--v", help="one-body weight JSON for species G")
    sp.add_argument("--nodes", type=int, default=None)
    sp.add_argument("--dump-gram", dest="dump_gram", action="store_true")

    sp = sub.add_parser("corr-finite", parents=[common],
                        help="finite-N correlations")
    sp.add_argument("--N1", type=int)
    sp.add_argument("--N2", type=int)
    sp.add_argument("--points", action="append",
                    help="'x1,x2;y1' (repeatable)")
    sp.add_argument("--check-oracle", dest="check_oracle", action="store_true")
    sp.add_argument("--check-zeta", dest="check_zeta", action="store_true")

    sp = sub.add_parser("corr-bulk", parents=[common], help="bulk correlations")
    sp.add_argument("--rhoR", type=float)
    sp.add_argument("--rhoG", type=float)
    sp.add_argument("--points", action="append")

    sp = sub.add_parser("two-point", parents=[common],
                        help="explicit bulk two-point curves")
    sp.add_argument("--pair", choices=("rr", "gg", "rg"))
    sp.add_argument("--rhoR", type=float)
    sp.add_argument("--rhoG", type=float)
    sp.add_argument("--xmax", type=float, default=None)
    sp.add_argument("--n", type=int, default=None)
    sp.add_argument("--compare", action="store_true",
                    help="also evaluate the Pfaffian route and compare")

    sp = sub.add_parser("sumrule", parents=[common], help="screening sum rules")
    sp.add_argument("--rule",
                    choices=("rr", "rg", "gg", "general", "g-only", "r-only"))
    sp.add_argument("--rhoR", type=float)
    sp.add_argument("--rhoG", type=float)
    sp.add_argument("--X", type=float, default=None)
    sp.add_argument("--points", help="fixed points 'x1,..;y1,..'")

    sp = sub.add_parser("mc", parents=[common], help="Metropolis sampling")
    sp.add_argument("--N1", type=int)
    sp.add_argument("--N2", type=int)
    sp.add_argument("--steps", type=int, default=200_000)
    sp.add_argument("--burn-in", dest="burn_in", type=int, default=20_000)
    sp.add_argument("--chains", type=int, default=4)
    sp.add_argument("--thin", type=int, default=None)
    sp.add_argument("--pair", choices=("rr", "gg", "rg"), default=None)
    sp.add_argument("--bins", type=int, default=20)
    sp.add_argument("--compare", action="store_true")

    sp = sub.add_parser("oracle-compare", parents=[common],
                        help="Pfaffian vs brute-force correlations")
    sp.add_argument("--N1", type=int)
    sp.add_argument("--N2", type=int)
    sp.add_argument("--trials", type=int, default=20)
    sp.add_argument("--kmax", type=int, default=2)

    sp = sub.add_parser("diag-tail", parents=[common],
                        help="exploratory 1/x^2 tail coefficient fit")
    sp.add_argument("--pair", choices=("rr", "rg", "gg"))
    sp.add_argument("--rhoR", type=float)
    sp.add_argument("--rhoG", type=float)
    sp.add_argument("--window", default=None, help="fit window 'lo,hi'")

    return p


def _merge_config(ns):
    if not getattr(ns, "config", None):
        return ns
    with open(ns.config) as fh:
        defaults = json.load(fh)
    for key, value in defaults.items():
        attr = key.replace("-", "_")
        if getattr(ns, attr, None) is None:
            setattr(ns, attr, value)
    return ns


def _sanitize(obj):
    if isinstance(obj, dict):
        return {k: _sanitize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_sanitize(v) for v in obj]
    if isinstance(obj, np.ndarray):
        if np.iscomplexobj(obj):
            return {"re": _sanitize(obj.real), "im": _sanitize(obj.imag)}
        return obj.tolist()
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    return obj


def main(argv=None):
    parser = build_parser()
    ns = parser.parse_args(argv)
    started = time.time()
    try:
        ns = _merge_config(ns)
        code, results, csv_writer = HANDLERS[ns.command](ns)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    manifest = {
        "command": ns.command,
        "params": _sanitize(
            {k: v for k, v in vars(ns).items() if k not in ("command",)}
        ),
        "versions": {
            "genplasma": __version__,
            "numpy": np.__version__,
            "python": sys.version.split()[0],
        },
        "seed": getattr(ns, "seed", None),
        "wall_time_s": round(time.time() - started, 6),
        "exit_code": code,
    }
    results = _sanitize(results)
    if ns.out:
        out = Path(ns.out)
        fmt = ns.format or ("csv" if out.suffix == ".csv" else "json")
        if ns.command == "mc":
            pass  # the handler already wrote the sample files
        elif fmt == "csv" and csv_writer is not None:
            with open(out, "w") as fh:
                csv_writer(fh)
        else:
            with open(out, "w") as fh:
                json.dump(results, fh, indent=1)
                fh.write("\n")
        mpath = out.with_suffix(out.suffix + ".manifest.json")
        with open(mpath, "w") as fh:
            json.dump(manifest, fh, indent=1)
            fh.write("\n")
        print(f"{ns.command}: exit {code}; wrote {out}")
    else:
        json.dump({"results": results, "manifest": manifest}, sys.stdout, indent=1)
        sys.stdout.write("\n")
    return code


if __name__ == "__main__":
    sys.exit(main())
