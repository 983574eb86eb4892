"""Node/edge ingestion and construction of per-dyad regressor pairs.

A dyad is an unordered pair (i, j) of distinct individuals with i < j; every
design enumerates all n(n-1)/2 of them.  Each regressor is produced by a
declarative transform applied to the pair's covariates, and every transform
fills two values per dyad: w_ij (individual i as ego) and w_ji (individual j
as ego).  Symmetric transforms fill both with the same number by
construction; asymmetric ones (alter_value, ego_value, unbalanced
weighted_mix) do not.

Designs are immutable once built and safe to share across readers.
"""

from __future__ import annotations

import csv
import itertools
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "NodeTable",
    "Network",
    "RegressorTransform",
    "DyadDesign",
    "IdentificationReport",
    "load_nodes",
    "load_edges",
    "build_design",
    "design_from_matrices",
    "outcomes",
    "check_identification",
]

# condition number above which a sample Gram matrix is treated as singular
SINGULARITY_THRESHOLD = 1e12

_SYMMETRIC_KINDS = frozenset({"intercept", "abs_diff", "equal_indicator", "sum"})
_ASYMMETRIC_KINDS = frozenset({"alter_value", "ego_value", "weighted_mix"})
_ALL_KINDS = _SYMMETRIC_KINDS | _ASYMMETRIC_KINDS


@dataclass(frozen=True)
class NodeTable:
    """Per-individual covariates: row i of `covariates` belongs to node_ids[i]."""

    node_ids: tuple[str, ...]
    covariates: np.ndarray
    column_names: tuple[str, ...]

    def __post_init__(self):
        if len(set(self.node_ids)) != len(self.node_ids):
            raise ValueError("node ids must be unique")
        if self.n < 2:
            raise ValueError("need at least 2 nodes")
        if self.covariates.shape != (self.n, len(self.column_names)):
            raise ValueError("covariate matrix shape does not match ids/columns")
        if not np.all(np.isfinite(self.covariates)):
            raise ValueError("covariates contain non-finite entries")

    @property
    def n(self):
        return len(self.node_ids)

    def column(self, name):
        try:
            return self.covariates[:, self.column_names.index(name)]
        except ValueError:
            raise ValueError(f"unknown covariate column {name!r}") from None


@dataclass(frozen=True)
class Network:
    """Undirected link set; only pairs with i < j are stored."""

    n: int
    links: frozenset

    def __post_init__(self):
        for i, j in self.links:
            if i == j:
                raise ValueError(f"self-link ({i}, {j}) is not allowed")
            if not 0 <= i < j < self.n:
                raise ValueError(f"link ({i}, {j}) out of range for n={self.n}")


@dataclass(frozen=True)
class RegressorTransform:
    """One declarative regressor: kind plus the covariate column it reads.

    weighted_mix(w_own, w_other) maps the pair (x_ego, x_alter) to
    w_own*x_ego + w_other*x_alter; it is symmetric exactly when the two
    weights coincide.
    """

    kind: str
    column: str | None = None
    w_own: float | None = None
    w_other: float | None = None

    def __post_init__(self):
        if self.kind not in _ALL_KINDS:
            raise ValueError(f"unknown transform kind {self.kind!r}")
        if self.kind == "intercept":
            if self.column is not None:
                raise ValueError("intercept takes no column")
        elif self.column is None:
            raise ValueError(f"transform {self.kind!r} requires a column")
        if self.kind == "weighted_mix":
            if self.w_own is None or self.w_other is None:
                raise ValueError("weighted_mix requires w_own and w_other")
            if not (np.isfinite(self.w_own) and np.isfinite(self.w_other)):
                raise ValueError("weighted_mix weights must be finite")

    @property
    def is_symmetric(self):
        if self.kind in _SYMMETRIC_KINDS:
            return True
        if self.kind == "weighted_mix":
            return self.w_own == self.w_other
        return False

    @property
    def label(self):
        if self.kind == "intercept":
            return "intercept"
        if self.kind == "weighted_mix":
            return f"weighted_mix:{self.column}:{self.w_own:g}:{self.w_other:g}"
        return f"{self.kind}:{self.column}"


@dataclass(frozen=True)
class DyadDesign:
    """All unordered pairs with their two regressor vectors.

    pairs[d] = (i, j) with i < j; w_ij[d] is the regressor vector with i as
    ego, w_ji[d] the one with j as ego.  symmetric_columns marks columns that
    are equal in the two matrices by construction.
    """

    n: int
    pairs: np.ndarray
    w_ij: np.ndarray
    w_ji: np.ndarray
    symmetric_columns: np.ndarray
    column_names: tuple[str, ...]

    def __post_init__(self):
        expected = self.n * (self.n - 1) // 2
        if len(self.pairs) != expected:
            raise ValueError(f"expected {expected} dyads for n={self.n}, got {len(self.pairs)}")
        if self.w_ij.shape != self.w_ji.shape or self.w_ij.shape[0] != expected:
            raise ValueError("regressor matrices must be N x k with N = n(n-1)/2")
        if not (np.all(np.isfinite(self.w_ij)) and np.all(np.isfinite(self.w_ji))):
            raise ValueError("regressors contain non-finite entries")
        i, j = self.pairs[:, 0], self.pairs[:, 1]
        if np.any(i >= j):
            raise ValueError("dyads must be stored with i < j")
        if len({(int(a), int(b)) for a, b in self.pairs}) != expected:
            raise ValueError("duplicate dyads")
        for c in np.flatnonzero(self.symmetric_columns):
            if not np.array_equal(self.w_ij[:, c], self.w_ji[:, c]):
                raise ValueError(f"column {self.column_names[c]!r} flagged symmetric but differs")

    @property
    def n_dyads(self):
        return self.w_ij.shape[0]

    @property
    def k(self):
        return self.w_ij.shape[1]

    @property
    def is_fully_symmetric(self):
        return bool(np.all(self.symmetric_columns))


@dataclass(frozen=True)
class IdentificationReport:
    identified: bool
    reason: str
    gram_condition_ij: float
    gram_condition_ji: float
    distinct_value_counts: dict = field(default_factory=dict)


def _parse_error(path, line_no, message):
    return ValueError(f"{path}:{line_no}: {message}")


def load_nodes(path):
    """Read a node CSV (header row; column 1 = id, rest numeric covariates)."""
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    rows = [(ln, r) for ln, r in enumerate(rows, start=1) if any(cell.strip() for cell in r)]
    if not rows:
        raise _parse_error(path, 1, "no data rows")
    header_no, header = rows[0]
    if len(header) < 1:
        raise _parse_error(path, header_no, "empty header")
    column_names = tuple(name.strip() for name in header[1:])
    data = rows[1:]
    if not data:
        raise _parse_error(path, header_no, "no data rows")
    ids, values = [], []
    for line_no, row in data:
        if len(row) != len(header):
            raise _parse_error(path, line_no, f"expected {len(header)} cells, got {len(row)}")
        node_id = row[0].strip()
        if node_id in ids:
            raise _parse_error(path, line_no, f"duplicate node id {node_id!r}")
        ids.append(node_id)
        try:
            values.append([float(cell) for cell in row[1:]])
        except ValueError:
            raise _parse_error(path, line_no, "non-numeric covariate cell") from None
    covariates = np.asarray(values, dtype=float).reshape(len(ids), len(column_names))
    return NodeTable(tuple(ids), covariates, column_names)


def load_edges(path, nodes):
    """Read an edge CSV of id pairs and normalize to an undirected Network.

    Pairs are stored with i < j, duplicates (in either order) collapse to a
    single link, and a leading row whose cells match no node id is treated as
    a header.
    """
    index = {node_id: pos for pos, node_id in enumerate(nodes.node_ids)}
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    rows = [(ln, r) for ln, r in enumerate(rows, start=1) if any(cell.strip() for cell in r)]
    if rows and not all(cell.strip() in index for cell in rows[0][1][:2]):
        rows = rows[1:]  # header
    links = set()
    for line_no, row in rows:
        if len(row) < 2:
            raise _parse_error(path, line_no, "expected two id cells")
        a, b = row[0].strip(), row[1].strip()
        for node_id in (a, b):
            if node_id not in index:
                raise _parse_error(path, line_no, f"unknown node id {node_id!r}")
        i, j = index[a], index[b]
        if i == j:
            raise _parse_error(path, line_no, f"self-link on id {a!r}")
        links.add((min(i, j), max(i, j)))
    return Network(nodes.n, frozenset(links))


def all_pairs(n):
    """(i, j) for every unordered pair, i < j, in lexicographic order."""
    return np.array(list(itertools.combinations(range(n), 2)), dtype=np.int64).reshape(-1, 2)


def build_design(nodes, transforms):
    """Fill w_ij / w_ji for every unordered pair per the transform list."""
    if not transforms:
        raise ValueError("need at least one transform")
    pairs = all_pairs(nodes.n)
    i, j = pairs[:, 0], pairs[:, 1]
    n_dyads, k = len(pairs), len(transforms)
    w_ij = np.empty((n_dyads, k))
    w_ji = np.empty((n_dyads, k))
    for c, tr in enumerate(transforms):
        if tr.kind == "intercept":
            w_ij[:, c] = w_ji[:, c] = 1.0
            continue
        x = nodes.column(tr.column)
        xi, xj = x[i], x[j]
        if tr.kind == "abs_diff":
            w_ij[:, c] = w_ji[:, c] = np.abs(xi - xj)
        elif tr.kind == "equal_indicator":
            w_ij[:, c] = w_ji[:, c] = (xi == xj).astype(float)
        elif tr.kind == "sum":
            w_ij[:, c] = w_ji[:, c] = xi + xj
        elif tr.kind == "alter_value":
            w_ij[:, c] = xj
            w_ji[:, c] = xi
        elif tr.kind == "ego_value":
            w_ij[:, c] = xi
            w_ji[:, c] = xj
        elif tr.kind == "weighted_mix":
            w_ij[:, c] = tr.w_own * xi + tr.w_other * xj
            w_ji[:, c] = tr.w_own * xj + tr.w_other * xi
    symmetric = np.array([tr.is_symmetric for tr in transforms], dtype=bool)
    names = tuple(tr.label for tr in transforms)
    return DyadDesign(nodes.n, pairs, w_ij, w_ji, symmetric, names)


def design_from_matrices(n, w_ij, w_ji, column_names=None, symmetric_columns=None):
    """Build a design from dyad-level regressor matrices directly.

    Used by the simulation DGPs whose regressor laws are stated at the dyad
    level, with no underlying node covariates.  The symmetry mask defaults to
    exact entrywise equality of the two matrices.
    """
    w_ij = np.atleast_2d(np.asarray(w_ij, dtype=float))
    w_ji = np.atleast_2d(np.asarray(w_ji, dtype=float))
    if symmetric_columns is None:
        symmetric_columns = np.array(
            [np.array_equal(w_ij[:, c], w_ji[:, c]) for c in range(w_ij.shape[1])]
        )
    if column_names is None:
        column_names = tuple(f"w{c}" for c in range(w_ij.shape[1]))
    return DyadDesign(n, all_pairs(n), w_ij, w_ji,
                      np.asarray(symmetric_columns, dtype=bool), tuple(column_names))


def outcomes(design, net):
    """0/1 link outcomes aligned with design.pairs."""
    if isinstance(net, np.ndarray):
        y = np.asarray(net)
        if y.shape != (design.n_dyads,):
            raise ValueError("outcome vector length does not match design")
        return y.astype(float)
    if net.n != design.n:
        raise ValueError("network and design disagree on node count")
    links = net.links
    return np.array([(int(i), int(j)) in links for i, j in design.pairs], dtype=float)


def _gram_condition(w):
    gram = w.T @ w / len(w)
    cond = np.linalg.cond(gram)
    return float(cond) if np.isfinite(cond) else np.inf


def check_identification(design):
    """Diagnose whether the linking coefficients are identified by this design.

    The decision tree follows the identification analysis for the
    non-transferable-utility likelihood: a singular sample Gram matrix kills
    identification outright; fully symmetric designs are identified; an
    exactly symmetric dyad restores the symmetric-case argument; otherwise
    every asymmetric regressor must take at least three distinct values,
    which rules out configurations with only binary asymmetric regressors.
    """
    if design.n_dyads == 0:
        raise ValueError("empty design")
    cond_ij = _gram_condition(design.w_ij)
    cond_ji = _gram_condition(design.w_ji)
    asym_cols = np.flatnonzero(~design.symmetric_columns)
    counts = {
        design.column_names[c]: int(np.unique(
            np.concatenate([design.w_ij[:, c], design.w_ji[:, c]])).size)
        for c in asym_cols
    }
    if cond_ij > SINGULARITY_THRESHOLD or cond_ji > SINGULARITY_THRESHOLD:
        return IdentificationReport(False, "singular_moment_matrix",
                                    cond_ij, cond_ji, counts)
    if design.is_fully_symmetric:
        return IdentificationReport(True, "all_symmetric", cond_ij, cond_ji, counts)
    if np.any(np.all(design.w_ij == design.w_ji, axis=1)):
        return IdentificationReport(True, "symmetric_pair_exists",
                                    cond_ij, cond_ji, counts)
    if all(count >= 3 for count in counts.values()):
        return IdentificationReport(True, "asymmetric_with_3plus_values",
                                    cond_ij, cond_ji, counts)
    return IdentificationReport(False, "not_identified_binary_asymmetric",
                                cond_ij, cond_ji, counts)
