"""Command-line surface: estimation, the transferability test, and the
simulation studies, all as reproducible batch runs.

Reports are plain CSV (6 significant digits, LF line endings) so runs can be
diffed; re-running any command with the same inputs and seed overwrites the
output with identical bytes.  Exit codes: 0 success, 1 input or usage error,
2 model-level failure (non-convergence or separation).
"""

from __future__ import annotations

import argparse
import csv
import sys

import numpy as np

from .dyaddata import RegressorTransform, build_design, check_identification, \
    load_edges, load_nodes
from .estimate import ModelSpec, fit
from .inference import spec_test_tu
from .montecarlo import DgpConfig, run_consistency_study, run_power_curve, \
    run_size_table, simulate_node_dataset
from .specfun import norm_cdf

MODEL_NAMES = {
    "tu-probit": "tu_probit",
    "tu-logit": "tu_logit",
    "ntu-rho0": "ntu_rho0",
    "ntu-general": "ntu_general",
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        # usage errors follow the exit-code contract (1), not argparse's 2
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _fmt(value):
    if isinstance(value, float) or isinstance(value, np.floating):
        return f"{float(value):.6g}"
    return value


def _parse_transform(text):
    parts = text.split(":")
    kind = parts[0]
    try:
        if kind == "intercept":
            if len(parts) != 1:
                raise ValueError("intercept takes no column")
            return RegressorTransform("intercept")
        if kind == "weighted_mix":
            if len(parts) != 4:
                raise ValueError("expected weighted_mix:column:w_own:w_other")
            return RegressorTransform(kind, parts[1], float(parts[2]), float(parts[3]))
        if len(parts) != 2:
            raise ValueError(f"expected {kind}:column")
        return RegressorTransform(kind, parts[1])
    except ValueError as exc:
        raise ValueError(f"bad --transform {text!r}: {exc}") from None


def _parse_grid(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise ValueError(f"bad grid {text!r}: expected comma-separated numbers") from None


def _parse_bounds(texts, k):
    if not texts:
        return None
    rows = []
    for item in texts:
        lo, _, hi = item.partition(":")
        try:
            rows.append((float(lo), float(hi)))
        except ValueError:
            raise ValueError(f"bad --theta-bound {item!r}: expected lo:hi") from None
    if len(rows) == 1:
        rows = rows * k
    if len(rows) != k:
        raise ValueError(f"got {len(rows)} --theta-bound entries for {k} regressors")
    return np.asarray(rows, dtype=float)


def _write_rows(path, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        for row in rows:
            writer.writerow([_fmt(cell) for cell in row])


def _load_design(args):
    nodes = load_nodes(args.nodes)
    net = load_edges(args.edges, nodes)
    transforms = [_parse_transform(t) for t in args.transform]
    if not transforms:
        raise ValueError("at least one --transform is required")
    return build_design(nodes, transforms), net


def _cmd_estimate(args):
    design, net = _load_design(args)
    bounds = _parse_bounds(args.theta_bound, design.k)
    spec = ModelSpec(MODEL_NAMES[args.model], theta_bounds=bounds,
                     rho_fixed=args.rho_fixed)
    report = check_identification(design)
    result = fit(spec, design, net)
    rows = [["name", "estimate", "std_error", "wald_z", "p_value"]]
    for c, name in enumerate(design.column_names):
        est = result.beta_hat[c]
        if result.std_errors is not None and np.isfinite(result.std_errors[c]):
            se = result.std_errors[c]
            z = est / se
            p = 2.0 * (1.0 - norm_cdf(abs(z)))
            rows.append([name, est, se, z, p])
        else:
            rows.append([name, est, "", "", ""])
    if result.rho_hat is not None and result.std_errors is not None \
            and len(result.std_errors) == design.k + 1 \
            and np.isfinite(result.std_errors[-1]):
        rows.append(["rho", result.rho_hat, result.std_errors[-1], "", ""])
    rows.append(["loglik", result.loglik])
    rows.append(["rho_hat", "" if result.rho_hat is None else result.rho_hat])
    rows.append(["N", result.n_dyads])
    rows.append(["identification", report.reason])
    rows.append(["converged", str(result.converged).lower()])
    _write_rows(args.out, rows)
    if not result.converged:
        print(f"fit did not converge: {result.message}", file=sys.stderr)
        return 2
    return 0


def _cmd_spec_test(args):
    design, net = _load_design(args)
    try:
        test = spec_test_tu(design, net, force=args.force_asymmetric_spec_test)
    except RuntimeError as exc:
        print(f"spec test failed: {exc}", file=sys.stderr)
        return 2
    rows = [
        ["field", "value"],
        ["statistic", test.statistic],
        ["rho_hat", test.details["rho_hat"]],
        ["p_value", test.p_value],
        ["alpha", args.alpha],
        ["reject_tu", str(test.reject_at(args.alpha)).lower()],
        ["null_dist", test.null_dist],
        ["N", test.details["n_dyads"]],
    ]
    if "caveat" in test.details:
        rows.append(["caveat", test.details["caveat"]])
    _write_rows(args.out, rows)
    return 0


def _cmd_simulate(args):
    transforms = tuple(_parse_transform(t) for t in args.transform)
    if not transforms:
        raise ValueError("simulate writes node CSVs, so it needs node-level "
                         "--transform definitions")
    cfg = DgpConfig(args.n, tuple(_parse_grid(args.beta0)), args.rho0,
                    transforms=transforms, master_seed=args.seed)
    if len(cfg.beta0) != len(transforms):
        raise ValueError(f"beta0 has {len(cfg.beta0)} entries for {len(transforms)} transforms")
    nodes, net = simulate_node_dataset(cfg)
    _write_rows(args.out_nodes,
                [["id", *nodes.column_names]]
                + [[nodes.node_ids[i], *nodes.covariates[i]] for i in range(nodes.n)])
    _write_rows(args.out_edges,
                [["i", "j"]]
                + [[nodes.node_ids[i], nodes.node_ids[j]] for i, j in sorted(net.links)])
    return 0


def _cmd_consistency_study(args):
    report = run_consistency_study(
        args.n, _parse_grid(args.rho0_grid), args.reps, beta0=args.beta0,
        covariate_law="bivariate_normal_w" if args.asymmetric else "standard_normal",
        w_cov=args.w_cov, master_seed=args.seed, workers=args.workers)
    report.to_csv(args.out)
    return 0


def _cmd_power_curve(args):
    report = run_power_curve(
        [int(v) for v in _parse_grid(args.n_list)], _parse_grid(args.rho0_grid),
        args.reps, alpha=args.alpha, beta0=args.beta0,
        master_seed=args.seed, workers=args.workers)
    report.to_csv(args.out)
    return 0


def _cmd_size_table(args):
    report = run_size_table(
        _parse_grid(args.rho0_grid), args.n, args.reps, alpha=args.alpha,
        b0=args.b0, beta0=args.beta0, master_seed=args.seed,
        workers=args.workers)
    report.to_csv(args.out)
    return 0


def _add_data_flags(sub):
    sub.add_argument("--nodes", required=True, help="node CSV (id + covariates)")
    sub.add_argument("--edges", required=True, help="edge CSV (id pairs)")
    sub.add_argument("--transform", action="append", default=[],
                     metavar="KIND:COLUMN[:W_OWN:W_OTHER]",
                     help="regressor transform (repeatable)")
    sub.add_argument("--out", required=True, help="output CSV path")


def _add_study_flags(sub):
    sub.add_argument("--reps", type=int, required=True)
    sub.add_argument("--seed", type=int, required=True)
    sub.add_argument("--out", required=True)
    sub.add_argument("--beta0", type=float, default=1.0)
    sub.add_argument("--workers", type=int, default=1)


def build_parser():
    parser = _Parser(prog="dyadlink",
                     description="Dyadic network formation models: estimation, "
                                 "transferability testing, simulation studies")
    commands = parser.add_subparsers(dest="command", required=True)

    est = commands.add_parser("estimate", help="fit a model to node/edge CSVs")
    _add_data_flags(est)
    est.add_argument("--model", choices=sorted(MODEL_NAMES), required=True)
    est.add_argument("--rho-fixed", type=float, default=None)
    est.add_argument("--theta-bound", action="append", default=[], metavar="LO:HI",
                     help="coefficient box; one entry applies to all coordinates")
    est.set_defaults(handler=_cmd_estimate)

    st = commands.add_parser("spec-test", help="LR test of utility transferability")
    _add_data_flags(st)
    st.add_argument("--alpha", type=float, default=0.05)
    st.add_argument("--force-asymmetric-spec-test", action="store_true")
    st.set_defaults(handler=_cmd_spec_test)

    sim = commands.add_parser("simulate", help="write a synthetic node/edge dataset")
    sim.add_argument("--n", type=int, required=True)
    sim.add_argument("--beta0", default="1.0", help="comma-separated true coefficients")
    sim.add_argument("--rho0", type=float, default=0.0)
    sim.add_argument("--seed", type=int, required=True)
    sim.add_argument("--transform", action="append", default=[],
                     metavar="KIND:COLUMN[:W_OWN:W_OTHER]")
    sim.add_argument("--out-nodes", required=True)
    sim.add_argument("--out-edges", required=True)
    sim.set_defaults(handler=_cmd_simulate)

    con = commands.add_parser("consistency-study", help="mean estimates across rho0 grid")
    con.add_argument("--n", type=int, required=True)
    con.add_argument("--rho0-grid", required=True)
    con.add_argument("--asymmetric", action="store_true",
                     help="bivariate-normal regressor pairs instead of a shared draw")
    con.add_argument("--w-cov", type=float, default=0.1)
    _add_study_flags(con)
    con.set_defaults(handler=_cmd_consistency_study)

    pow_ = commands.add_parser("power-curve", help="transferability-test rejection rates")
    pow_.add_argument("--n-list", required=True)
    pow_.add_argument("--rho0-grid", required=True)
    pow_.add_argument("--alpha", type=float, default=0.05)
    _add_study_flags(pow_)
    pow_.set_defaults(handler=_cmd_power_curve)

    size = commands.add_parser("size-table", help="Wald/LR test sizes for the coefficient")
    size.add_argument("--n", type=int, required=True)
    size.add_argument("--rho0-grid", required=True)
    size.add_argument("--alpha", type=float, default=0.05)
    size.add_argument("--b0", type=float, default=1.0)
    _add_study_flags(size)
    size.set_defaults(handler=_cmd_size_table)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
