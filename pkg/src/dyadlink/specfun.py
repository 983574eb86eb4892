"""Normal-distribution primitives and test-statistic quantiles.

Everything here is a pure function of its inputs and safe to call from any
number of workers.  The univariate pieces wrap scipy.special (ndtr /
log_ndtr are accurate to machine precision over the whole real line, tail
included); the bivariate CDF is a Gauss-Legendre quadrature in the
correlation parameter after Drezner-Wesolowsky and Genz, which delivers
absolute accuracy around 1e-15 with fixed node counts.

Inputs must be finite: infinities and NaNs are rejected rather than
saturated so that upstream bugs surface here instead of propagating.
"""

from __future__ import annotations

import numpy as np
from scipy import special

__all__ = [
    "norm_pdf",
    "norm_cdf",
    "log_norm_cdf",
    "binorm_cdf",
    "binorm_sf",
    "binorm_pdf",
    "chisq1_cdf",
    "mixture_quantile",
]

_INV_SQRT_2PI = 1.0 / np.sqrt(2.0 * np.pi)


def _as_finite_array(v, name):
    arr = np.asarray(v, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} must be finite, got {v!r}")
    return arr


def _check_rho(rho):
    rho = float(rho)
    if not np.isfinite(rho) or not -1.0 <= rho <= 1.0:
        raise ValueError(f"correlation must lie in [-1, 1], got {rho!r}")
    return rho


def norm_pdf(v):
    """Standard normal density, elementwise."""
    v = _as_finite_array(v, "v")
    out = _INV_SQRT_2PI * np.exp(-0.5 * v * v)
    return out if out.ndim else float(out)


def norm_cdf(v):
    """Standard normal CDF, elementwise."""
    v = _as_finite_array(v, "v")
    out = special.ndtr(v)
    return out if out.ndim else float(out)


def log_norm_cdf(v):
    """log(norm_cdf(v)) without underflow.

    Stays finite and strictly monotone far into the left tail (the exact
    value decays like -v**2/2 - log(-v*sqrt(2*pi))), where a naive
    log(norm_cdf(v)) would return -inf below v ~ -38.
    """
    v = _as_finite_array(v, "v")
    out = special.log_ndtr(v)
    return out if out.ndim else float(out)


def _gl_half_rule(n):
    # symmetric half of the n-point Gauss-Legendre rule on (-1, 1)
    nodes, weights = np.polynomial.legendre.leggauss(n)
    pos = nodes > 0
    return nodes[pos], weights[pos]


_GL = {n: _gl_half_rule(n) for n in (6, 12, 20)}


def _gl_rule(r):
    if abs(r) < 0.3:
        return _GL[6]
    if abs(r) < 0.75:
        return _GL[12]
    return _GL[20]


def _bvnu(h, k, r):
    """P(X > h, Y > k) for standard bivariate normal, correlation r in (-1, 1).

    Vectorized over h, k (r is a scalar).  Direct port of the
    Drezner-Wesolowsky/Genz scheme: for moderate |r| integrate the bivariate
    density over the correlation parameter; for |r| >= 0.925 use the
    singular expansion around |r| = 1 plus a quadrature correction.
    """
    x, w = _gl_rule(r)
    hk = h * k
    if abs(r) < 0.925:
        bvn = np.zeros_like(h)
        if r != 0.0:
            hs = (h * h + k * k) / 2.0
            asr = np.arcsin(r)
            for xi, wi in zip(x, w):
                for sgn in (-1.0, 1.0):
                    sn = np.sin(asr * (sgn * xi + 1.0) / 2.0)
                    bvn += wi * np.exp((sn * hk - hs) / (1.0 - sn * sn))
            bvn *= asr / (4.0 * np.pi)
        return bvn + special.ndtr(-h) * special.ndtr(-k)

    if r < 0.0:
        k = -k
        hk = -hk
    asq = (1.0 - r) * (1.0 + r)
    a = np.sqrt(asq)
    bs = (h - k) ** 2
    c = (4.0 - hk) / 8.0
    d = (12.0 - hk) / 16.0
    asr = -(bs / asq + hk) / 2.0
    bvn = np.where(
        asr > -100.0,
        a * np.exp(asr) * (1.0 - c * (bs - asq) * (1.0 - d * bs / 5.0) / 3.0
                           + c * d * asq * asq / 5.0),
        0.0,
    )
    b = np.sqrt(bs)
    sp = np.sqrt(2.0 * np.pi) * special.ndtr(-b / a)
    bvn = np.where(
        -hk < 100.0,
        bvn - np.exp(np.clip(-hk / 2.0, None, 700.0)) * sp * b
        * (1.0 - c * bs * (1.0 - d * bs / 5.0) / 3.0),
        bvn,
    )
    half = a / 2.0
    for xi, wi in zip(x, w):
        for sgn in (-1.0, 1.0):
            xs = (half * (sgn * xi + 1.0)) ** 2
            rs = np.sqrt(1.0 - xs)
            asr = -(bs / xs + hk) / 2.0
            sp = 1.0 + c * xs * (1.0 + d * xs)
            ep = np.exp(-hk * (1.0 - rs) / (2.0 * (1.0 + rs))) / rs
            bvn = bvn + np.where(asr > -100.0,
                                 half * wi * np.exp(asr) * (ep - sp), 0.0)
    bvn = -bvn / (2.0 * np.pi)
    if r > 0.0:
        return bvn + special.ndtr(-np.maximum(h, k))
    return -bvn + np.maximum(0.0, special.ndtr(-h) - special.ndtr(-k))


def binorm_cdf(a, b, rho):
    """P(Z1 <= a, Z2 <= b) for standard bivariate normal with correlation rho.

    rho is a scalar in the closed interval [-1, 1]; the endpoints use the
    degenerate closed forms (Z2 = Z1 and Z2 = -Z1) exactly rather than a
    limiting quadrature, because the transferability test evaluates rho = 1.
    a and b broadcast elementwise.
    """
    rho = _check_rho(rho)
    a = _as_finite_array(a, "a")
    b = _as_finite_array(b, "b")
    a, b = np.broadcast_arrays(a, b)
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if rho == 1.0:
        out = special.ndtr(np.minimum(a, b))
    elif rho == -1.0:
        out = np.maximum(0.0, special.ndtr(a) + special.ndtr(b) - 1.0)
    else:
        out = _bvnu(-a, -b, rho)
        out = np.clip(out, 0.0, 1.0)
    return out if out.ndim else float(out)


def binorm_sf(a, b, rho):
    """P(Z1 > a, Z2 > b): upper-orthant probability, accurate when small.

    1 - binorm_cdf(a, b, rho) loses all precision once the CDF is close to
    one; the complement is instead assembled from small terms as
    norm_cdf(-a) + norm_cdf(-b) - binorm_sf(a, b, rho).
    """
    rho = _check_rho(rho)
    a = _as_finite_array(a, "a")
    b = _as_finite_array(b, "b")
    a, b = np.broadcast_arrays(a, b)
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if rho == 1.0:
        out = special.ndtr(-np.maximum(a, b))
    elif rho == -1.0:
        out = np.maximum(0.0, special.ndtr(-a) - special.ndtr(b))
    else:
        out = np.clip(_bvnu(a, b, rho), 0.0, 1.0)
    return out if out.ndim else float(out)


def binorm_pdf(a, b, rho):
    """Standard bivariate normal density at (a, b) with correlation |rho| < 1.

    The quadratic form is rearranged as (a-b)^2 + 2(1-rho)ab to avoid
    cancellation when rho is close to 1.
    """
    rho = _check_rho(rho)
    if abs(rho) == 1.0:
        raise ValueError("bivariate normal density is degenerate at |rho| = 1")
    a = _as_finite_array(a, "a")
    b = _as_finite_array(b, "b")
    ssq = (1.0 - rho) * (1.0 + rho)
    quad = (a - b) ** 2 + 2.0 * (1.0 - rho) * a * b
    out = np.exp(-quad / (2.0 * ssq)) / (2.0 * np.pi * np.sqrt(ssq))
    return out if out.ndim else float(out)


def chisq1_cdf(q):
    """CDF of the chi-squared distribution with one degree of freedom."""
    q = np.asarray(q, dtype=float)
    if np.any(q < 0.0) or not np.all(np.isfinite(q)):
        raise ValueError("chi-squared argument must be finite and >= 0")
    out = 2.0 * special.ndtr(np.sqrt(q)) - 1.0
    return out if out.ndim else float(out)


def mixture_quantile(alpha):
    """Upper-alpha critical value of the 50:50 mixture of chi2_0 and chi2_1.

    Solves 1/2 + 1/2 * chisq1_cdf(q) = 1 - alpha.  Only levels alpha in
    (0, 0.5] are meaningful: the point mass at zero absorbs half of the
    distribution, so any alpha >= 0.5 would put the critical value at the
    atom itself.
    """
    alpha = float(alpha)
    if not 0.0 < alpha <= 0.5:
        raise ValueError(f"test level must lie in (0, 0.5], got {alpha!r}")
    z = special.ndtri(1.0 - alpha)
    return float(z * z)
