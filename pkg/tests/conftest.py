"""Shared helpers: random designs, model DGP draws, finite differences."""

import numpy as np

from dyadlink.dyaddata import design_from_matrices


def random_sym_design(rng, n=None, k=None, scale=1.0):
    n = int(rng.integers(3, 8)) if n is None else n
    k = int(rng.integers(1, 4)) if k is None else k
    w = scale * rng.normal(size=(n * (n - 1) // 2, k))
    return design_from_matrices(n, w, w.copy())


def random_asym_design(rng, n=None, k=None, scale=1.0):
    n = int(rng.integers(3, 8)) if n is None else n
    k = int(rng.integers(1, 4)) if k is None else k
    n_dyads = n * (n - 1) // 2
    return design_from_matrices(n, scale * rng.normal(size=(n_dyads, k)),
                                scale * rng.normal(size=(n_dyads, k)))


def draw_outcomes(rng, design, beta, rho=0.0):
    """Simulate link outcomes from the NTU mechanism at (beta, rho)."""
    v1 = design.w_ij @ np.asarray(beta)
    v2 = design.w_ji @ np.asarray(beta)
    e1 = rng.standard_normal(design.n_dyads)
    e2 = rho * e1 + np.sqrt(max(0.0, 1.0 - rho * rho)) * rng.standard_normal(design.n_dyads)
    return ((v1 >= e1) & (v2 >= e2)).astype(float)


def fd_grad(f, x, h=1e-6):
    x = np.asarray(x, dtype=float)
    g = np.zeros_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h
        g[i] = (f(x + e) - f(x - e)) / (2.0 * h)
    return g


def fd_jacobian(f, x, h=1e-5):
    """Central differences of a vector-valued function; rows index f."""
    x = np.asarray(x, dtype=float)
    cols = []
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h
        cols.append((f(x + e) - f(x - e)) / (2.0 * h))
    return np.column_stack(cols)
