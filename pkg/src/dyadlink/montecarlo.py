"""Simulation DGPs and the replication studies built on them.

Networks are generated from the NTU mechanism: per dyad, draw the regressor
pair, draw bivariate-normal errors with correlation rho0 through the 2x2
Cholesky factor (at rho0 = +/-1 the second error degenerates to +/- the
first exactly), and set a link iff both index-vs-error comparisons fire.
The two stock regressor laws are dyad-level: a single shared N(0, 1) draw
per dyad (symmetric), or a bivariate-normal (w_ij, w_ji) pair with unit
variances and a chosen covariance (asymmetric).  Passing declarative
transforms instead switches to node-level N(0, 1) covariates and the
ingestion-path design builder.

Seeding is splittable and scheduling-independent: replication r of grid
cell c draws from SeedSequence(master_seed, spawn_key=(c, r)), and study
aggregation always runs in replication-index order, so reports are
bit-identical for any worker count.
"""

from __future__ import annotations

import csv
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .dyaddata import (NodeTable, Network, build_design,
                       design_from_matrices, outcomes)
from .estimate import ModelSpec, fit
from .inference import lr_test_beta, spec_test_tu, wald_test_beta

__all__ = [
    "DgpConfig",
    "StudyReport",
    "simulate_network",
    "simulate_node_dataset",
    "run_consistency_study",
    "run_power_curve",
    "run_size_table",
]

COVARIATE_LAWS = ("standard_normal", "bivariate_normal_w")


@dataclass(frozen=True)
class DgpConfig:
    """True parameters and regressor law for one simulation cell."""

    n: int
    beta0: tuple
    rho0: float
    covariate_law: str = "standard_normal"
    w_cov: float = 0.1
    transforms: tuple = ()
    master_seed: int = 0

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("need n >= 2")
        if not -1.0 <= self.rho0 <= 1.0:
            raise ValueError("rho0 must lie in [-1, 1]")
        if self.covariate_law not in COVARIATE_LAWS:
            raise ValueError(f"unknown covariate law {self.covariate_law!r}")
        if self.covariate_law == "bivariate_normal_w" and not -1.0 < self.w_cov < 1.0:
            raise ValueError("w_cov must lie in (-1, 1)")
        object.__setattr__(self, "beta0", tuple(float(b) for b in np.atleast_1d(self.beta0)))


def _rng_for(cfg, cell_index, rep_index):
    return np.random.default_rng(
        np.random.SeedSequence(cfg.master_seed, spawn_key=(cell_index, rep_index)))


def _draw_errors(rng, n_dyads, rho0):
    e1 = rng.standard_normal(n_dyads)
    e2 = rho0 * e1 + np.sqrt(max(0.0, 1.0 - rho0 * rho0)) * rng.standard_normal(n_dyads)
    return e1, e2


def _links_from(pairs, y):
    return frozenset((int(i), int(j)) for (i, j), linked in zip(pairs, y) if linked)


def simulate_network(cfg, rep_index, cell_index=0):
    """One simulated (DyadDesign, Network) draw, deterministic in its seeds."""
    rng = _rng_for(cfg, cell_index, rep_index)
    beta0 = np.asarray(cfg.beta0)
    if cfg.transforms:
        nodes = _draw_nodes(cfg, rng)
        design = build_design(nodes, list(cfg.transforms))
    else:
        k = len(beta0)
        n_dyads = cfg.n * (cfg.n - 1) // 2
        if cfg.covariate_law == "standard_normal":
            w = rng.standard_normal((n_dyads, k))
            design = design_from_matrices(cfg.n, w, w.copy())
        else:
            z1 = rng.standard_normal((n_dyads, k))
            z2 = rng.standard_normal((n_dyads, k))
            w_ij = z1
            w_ji = cfg.w_cov * z1 + np.sqrt(1.0 - cfg.w_cov ** 2) * z2
            design = design_from_matrices(cfg.n, w_ij, w_ji)
    e1, e2 = _draw_errors(rng, design.n_dyads, cfg.rho0)
    y = (design.w_ij @ beta0 >= e1) & (design.w_ji @ beta0 >= e2)
    return design, Network(cfg.n, _links_from(design.pairs, y))


def _draw_nodes(cfg, rng):
    columns = []
    for tr in cfg.transforms:
        if tr.column is not None and tr.column not in columns:
            columns.append(tr.column)
    covariates = rng.standard_normal((cfg.n, len(columns)))
    ids = tuple(str(i) for i in range(cfg.n))
    return NodeTable(ids, covariates, tuple(columns))


def simulate_node_dataset(cfg, rep_index=0, cell_index=0):
    """Node-level draw for the CSV ingestion pathway: (NodeTable, Network)."""
    if not cfg.transforms:
        raise ValueError("simulate_node_dataset requires transforms (node-level pathway)")
    rng = _rng_for(cfg, cell_index, rep_index)
    nodes = _draw_nodes(cfg, rng)
    design = build_design(nodes, list(cfg.transforms))
    e1, e2 = _draw_errors(rng, design.n_dyads, cfg.rho0)
    beta0 = np.asarray(cfg.beta0)
    y = (design.w_ij @ beta0 >= e1) & (design.w_ji @ beta0 >= e2)
    return nodes, Network(cfg.n, _links_from(design.pairs, y))


# ---------------------------------------------------------------------------
# replication studies


@dataclass
class StudyReport:
    study: str
    rows: list
    elapsed: float = 0.0

    def to_csv(self, path):
        """One row per grid cell; elapsed time is metadata, not report content."""
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            header = list(self.rows[0].keys())
            writer.writerow(header)
            for row in self.rows:
                writer.writerow([_fmt(row[key]) for key in header])


def _fmt(value):
    if isinstance(value, float):
        return f"{value:.6g}"
    return value


def _map_reps(task, payloads, workers):
    if workers <= 1:
        return [task(p) for p in payloads]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(task, payloads, chunksize=max(1, len(payloads) // (4 * workers))))


def _consistency_rep(payload):
    cfg, cell_index, rep_index = payload
    design, net = simulate_network(cfg, rep_index, cell_index)
    y = outcomes(design, net)
    result = fit(ModelSpec("ntu_general"), design, y)
    if not result.converged:
        return None
    return tuple(result.beta_hat), result.rho_hat


def run_consistency_study(n, rho0_grid, reps, beta0=1.0,
                          covariate_law="standard_normal", w_cov=0.1,
                          master_seed=0, workers=1):
    """Average the general NTU estimates over simulated networks per rho0."""
    if reps < 1:
        raise ValueError("need reps >= 1")
    start = time.perf_counter()
    rows = []
    for cell_index, rho0 in enumerate(rho0_grid):
        cfg = DgpConfig(n, beta0, float(rho0), covariate_law, w_cov,
                        master_seed=master_seed)
        results = _map_reps(_consistency_rep,
                            [(cfg, cell_index, r) for r in range(reps)], workers)
        kept = [r for r in results if r is not None]
        betas = np.array([r[0] for r in kept]) if kept else np.empty((0, len(cfg.beta0)))
        rhos = np.array([r[1] for r in kept]) if kept else np.empty(0)
        rows.append({
            "study": "consistency", "n": n, "rho0": float(rho0),
            "beta0": _join(cfg.beta0), "covariate_law": covariate_law,
            "w_cov": w_cov, "reps": reps, "master_seed": master_seed,
            "n_converged": len(kept), "n_failed": reps - len(kept),
            "mean_beta_hat": _join(betas.mean(axis=0)) if kept else "",
            "mean_rho_hat": float(rhos.mean()) if kept else "",
        })
    return StudyReport("consistency", rows, time.perf_counter() - start)


def _join(values):
    values = np.atleast_1d(values)
    if values.size == 1:
        return float(values[0])
    return ";".join(f"{v:.6g}" for v in values)


def _power_rep(payload):
    cfg, cell_index, rep_index, alpha = payload
    design, net = simulate_network(cfg, rep_index, cell_index)
    try:
        test = spec_test_tu(design, net)
    except RuntimeError:
        return None
    return test.reject_at(alpha)


def run_power_curve(n_list, rho0_grid, reps, alpha=0.05, beta0=1.0,
                    master_seed=0, workers=1):
    """Rejection rates of the transferability test across (n, rho0) cells.

    The DGP is the general NTU model with a single symmetric standard-normal
    regressor; the rho0 = 1 cells read out empirical size, the others power.
    """
    if not 0.0 < alpha <= 0.5:
        raise ValueError("alpha must lie in (0, 0.5]")
    if reps < 1:
        raise ValueError("need reps >= 1")
    start = time.perf_counter()
    rows = []
    cell_index = 0
    for n in n_list:
        for rho0 in rho0_grid:
            cfg = DgpConfig(int(n), beta0, float(rho0), master_seed=master_seed)
            results = _map_reps(_power_rep,
                                [(cfg, cell_index, r, alpha) for r in range(reps)],
                                workers)
            kept = [r for r in results if r is not None]
            rows.append({
                "study": "power_curve", "n": int(n), "rho0": float(rho0),
                "beta0": _join(cfg.beta0), "alpha": alpha, "reps": reps,
                "master_seed": master_seed, "n_converged": len(kept),
                "n_failed": reps - len(kept),
                "rejection_rate": float(np.mean(kept)) if kept else "",
            })
            cell_index += 1
    return StudyReport("power_curve", rows, time.perf_counter() - start)


def _size_rep(payload):
    cfg, cell_index, rep_index, alpha, b0 = payload
    design, net = simulate_network(cfg, rep_index, cell_index)
    y = outcomes(design, net)
    spec = ModelSpec("ntu_general")
    unconstrained = fit(spec, design, y)
    if not unconstrained.converged:
        return None
    try:
        wald = wald_test_beta(unconstrained, 0, b0)
        lr = lr_test_beta(spec, design, y, 0, b0, unconstrained=unconstrained)
    except (RuntimeError, ValueError):
        return None
    return wald.reject_at(alpha), lr.reject_at(alpha)


def run_size_table(rho0_grid, n, reps, alpha=0.05, b0=1.0, beta0=1.0,
                   master_seed=0, workers=1):
    """Empirical sizes of the Wald and LR tests of H0: beta0 = b0 per rho0."""
    if not 0.0 < alpha <= 0.5:
        raise ValueError("alpha must lie in (0, 0.5]")
    if reps < 1:
        raise ValueError("need reps >= 1")
    start = time.perf_counter()
    rows = []
    for cell_index, rho0 in enumerate(rho0_grid):
        cfg = DgpConfig(n, beta0, float(rho0), master_seed=master_seed)
        results = _map_reps(_size_rep,
                            [(cfg, cell_index, r, alpha, b0) for r in range(reps)],
                            workers)
        kept = [r for r in results if r is not None]
        rows.append({
            "study": "size_table", "n": n, "rho0": float(rho0),
            "beta0": _join(cfg.beta0), "b0": b0, "alpha": alpha, "reps": reps,
            "master_seed": master_seed, "n_converged": len(kept),
            "n_failed": reps - len(kept),
            "wald_rejection_rate": float(np.mean([r[0] for r in kept])) if kept else "",
            "lr_rejection_rate": float(np.mean([r[1] for r in kept])) if kept else "",
        })
    return StudyReport("size_table", rows, time.perf_counter() - start)
