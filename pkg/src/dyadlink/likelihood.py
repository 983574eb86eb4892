"""Log-likelihoods, analytic scores, Hessians, and information matrices.

Four model families share one observation structure: per dyad, a link
indicator y and the regressor pair (w_ij, w_ji).  Writing v1 = w_ij'beta and
v2 = w_ji'beta, the per-dyad link probability is

    TU (probit/logit):   F(v1)                      (requires w_ij = w_ji)
    NTU, independent:    Phi(v1) * Phi(v2)
    NTU, general rho:    Phi2(v1, v2; rho)

and every evaluation returns the mean log-likelihood over the N = n(n-1)/2
dyads together with its exact derivatives.  log-probabilities are assembled
from log-CDFs and complement-side survival terms, never from log(1 - p)
literally, so index values |v| up to ~35 stay finite.

A dyad whose model probability is exactly 0 or 1 against its observed
outcome makes the log-likelihood -inf; evaluations then return the -inf
sentinel and the offending dyad index instead of clamping, so the optimizer
can report that the MLE may not exist.

All functions are pure; dyad sums are reduced in a fixed order so results
are bit-stable.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import special

from .dyaddata import outcomes
from .specfun import binorm_pdf, _bvnu, _check_rho

__all__ = [
    "LikelihoodEval",
    "tu_loglik",
    "ntu_rho0_loglik",
    "ntu_general_loglik",
    "j1_matrix",
    "j2_matrix",
]

_LOG_SQRT_2PI = 0.5 * np.log(2.0 * np.pi)


@dataclass
class LikelihoodEval:
    """Mean log-likelihood with its analytic derivatives.

    score/hessian cover beta, plus a trailing rho component for the general
    model at interior rho.  separation_index is the first dyad whose
    probability degenerated against its outcome (value is -inf then).
    """

    value: float
    score: np.ndarray
    hessian: np.ndarray
    per_dyad_logs: np.ndarray | None = None
    separation_index: int | None = None

    @property
    def separated(self):
        return self.separation_index is not None


def _log_pdf(v):
    return -0.5 * v * v - _LOG_SQRT_2PI


def _mills(v):
    # phi(v)/Phi(v), stable far into the left tail
    return np.exp(_log_pdf(v) - special.log_ndtr(v))


def _check_beta(design, beta):
    beta = np.asarray(beta, dtype=float).reshape(-1)
    if beta.shape != (design.k,):
        raise ValueError(f"beta has length {beta.size}, design has {design.k} regressors")
    if not np.all(np.isfinite(beta)):
        raise ValueError("beta must be finite")
    return beta


def _weighted_outer(w_a, w_b, coef):
    return (w_a * coef[:, None]).T @ w_b


def _separation_eval(logs, dim, per_dyad):
    idx = int(np.flatnonzero(np.isneginf(logs))[0])
    nan_s = np.full(dim, np.nan)
    nan_h = np.full((dim, dim), np.nan)
    return LikelihoodEval(-np.inf, nan_s, nan_h,
                          logs if per_dyad else None, idx)


# ---------------------------------------------------------------------------
# TU model


def _tu_probit_parts(v, y):
    logs = y * special.log_ndtr(v) + (1.0 - y) * special.log_ndtr(-v)
    m_pos = _mills(v)
    m_neg = _mills(-v)
    alpha = y * m_pos - (1.0 - y) * m_neg
    curv = y * (-v * m_pos - m_pos ** 2) + (1.0 - y) * (v * m_neg - m_neg ** 2)
    return logs, alpha, curv


def _tu_logit_parts(v, y):
    logs = -(y * np.logaddexp(0.0, -v) + (1.0 - y) * np.logaddexp(0.0, v))
    f = special.expit(v)
    return logs, y - f, -f * (1.0 - f)


def tu_loglik(design, net, beta, link="probit", per_dyad=False):
    """Transferable-utility log-likelihood (single-index binary choice).

    Only defined on fully symmetric designs: the single joint-surplus index
    has no slot for regressors that differ within the pair.
    """
    if link not in ("probit", "logit"):
        raise ValueError(f"link must be 'probit' or 'logit', got {link!r}")
    if not design.is_fully_symmetric:
        raise ValueError("TU model requires symmetric regressors "
                         "(w_ij must equal w_ji in every column)")
    beta = _check_beta(design, beta)
    y = outcomes(design, net)
    v = design.w_ij @ beta
    parts = _tu_probit_parts if link == "probit" else _tu_logit_parts
    logs, alpha, curv = parts(v, y)
    n = design.n_dyads
    score = design.w_ij.T @ alpha / n
    hess = _weighted_outer(design.w_ij, design.w_ij, curv) / n
    return LikelihoodEval(float(np.mean(logs)), score, hess,
                          logs if per_dyad else None)


# ---------------------------------------------------------------------------
# NTU model, independent errors (rho = 0)


def _rho0_parts(v1, v2, y):
    """Per-dyad logs and derivative coefficients for the factorized model.

    Returns (logs, a1, a2, h11, h22, hx) where the score is
    a1*w_ij + a2*w_ji and the Hessian collects h11*w_ij w_ij' +
    h22*w_ji w_ji' + hx*(w_ij w_ji' + w_ji w_ij').
    """
    q1 = special.ndtr(-v1)
    q2 = special.ndtr(-v2)
    comp = q1 + q2 - q1 * q2  # 1 - Phi(v1)Phi(v2), assembled from small terms
    with np.errstate(divide="ignore"):
        log_comp = np.log(comp)
    logs = np.where(y == 1.0, special.log_ndtr(v1) + special.log_ndtr(v2), log_comp)

    m1 = _mills(v1)
    m2 = _mills(v2)
    e1 = np.exp(_log_pdf(v1))
    e2 = np.exp(_log_pdf(v2))
    with np.errstate(divide="ignore", invalid="ignore"):
        c1 = np.where(comp > 0.0, (1.0 - q2) * e1 / comp, np.inf)
        c2 = np.where(comp > 0.0, (1.0 - q1) * e2 / comp, np.inf)
        cross = np.where(comp > 0.0, -e1 * e2 / comp ** 2, -np.inf)
    with np.errstate(invalid="ignore"):
        a1 = np.where(y == 1.0, m1, -c1)
        a2 = np.where(y == 1.0, m2, -c2)
        h11 = np.where(y == 1.0, -v1 * m1 - m1 ** 2, v1 * c1 - c1 ** 2)
        h22 = np.where(y == 1.0, -v2 * m2 - m2 ** 2, v2 * c2 - c2 ** 2)
        hx = np.where(y == 1.0, 0.0, cross)
    return logs, a1, a2, h11, h22, hx


def ntu_rho0_loglik(design, net, beta, per_dyad=False):
    """NTU log-likelihood with independent within-dyad errors.

    The link probability factorizes as Phi(v1)*Phi(v2); on fully symmetric
    designs the resulting mean log-likelihood is concave in beta.
    """
    beta = _check_beta(design, beta)
    y = outcomes(design, net)
    v1 = design.w_ij @ beta
    v2 = design.w_ji @ beta
    logs, a1, a2, h11, h22, hx = _rho0_parts(v1, v2, y)
    if np.any(np.isneginf(logs)):
        return _separation_eval(logs, design.k, per_dyad)
    n = design.n_dyads
    score = (design.w_ij.T @ a1 + design.w_ji.T @ a2) / n
    hess = (_weighted_outer(design.w_ij, design.w_ij, h11)
            + _weighted_outer(design.w_ji, design.w_ji, h22)) / n
    cross = _weighted_outer(design.w_ij, design.w_ji, hx) / n
    hess += cross + cross.T
    return LikelihoodEval(float(np.mean(logs)), score, hess,
                          logs if per_dyad else None)


# ---------------------------------------------------------------------------
# NTU model, general rho


def _general_prob_parts(v1, v2, rho):
    """p, 1-p, and the partials of p = Phi2(v1, v2; rho) for |rho| < 1."""
    p = _bvnu(-v1, -v2, rho)
    comp = special.ndtr(-v1) + special.ndtr(-v2) - _bvnu(v1, v2, rho)
    p = np.clip(p, 0.0, 1.0)
    comp = np.clip(comp, 0.0, 1.0)
    s = np.sqrt((1.0 - rho) * (1.0 + rho))
    g1 = np.exp(_log_pdf(v1)) * special.ndtr((v2 - rho * v1) / s)
    g2 = np.exp(_log_pdf(v2)) * special.ndtr((v1 - rho * v2) / s)
    grho = binorm_pdf(v1, v2, rho)
    return p, comp, g1, g2, grho


def _boundary_prob_parts(v1, v2, rho):
    """Degenerate closed forms at rho = +/-1; partials of p w.r.t. (v1, v2)."""
    e1 = np.exp(_log_pdf(v1))
    e2 = np.exp(_log_pdf(v2))
    if rho == 1.0:
        take1 = v1 <= v2
        p = special.ndtr(np.where(take1, v1, v2))
        comp = special.ndtr(-np.where(take1, v1, v2))
        g1 = np.where(take1, e1, 0.0)
        g2 = np.where(take1, 0.0, e2)
    else:
        p = np.maximum(0.0, special.ndtr(v1) + special.ndtr(v2) - 1.0)
        comp = np.minimum(1.0, special.ndtr(-v1) + special.ndtr(-v2))
        interior = p > 0.0
        g1 = np.where(interior, e1, 0.0)
        g2 = np.where(interior, e2, 0.0)
    return p, comp, g1, g2


def _general_value_score(design, y, beta, rho, per_dyad):
    """Shared by value/score and the finite-difference Hessian columns."""
    v1 = design.w_ij @ beta
    v2 = design.w_ji @ beta
    boundary = abs(rho) == 1.0
    if boundary:
        p, comp, g1, g2 = _boundary_prob_parts(v1, v2, rho)
        grho = None
    else:
        p, comp, g1, g2, grho = _general_prob_parts(v1, v2, rho)

    bad = ((y == 1.0) & (p == 0.0)) | ((y == 0.0) & (comp == 0.0))
    if np.any(bad):
        logs = np.where(bad, -np.inf, 0.0)
        return None, logs

    with np.errstate(divide="ignore"):
        logs = np.where(y == 1.0, np.log(p), np.log(comp))
    with np.errstate(divide="ignore", invalid="ignore"):
        u = np.where(y == 1.0, 1.0 / p, -1.0 / comp)
    n = design.n_dyads
    score_beta = (design.w_ij.T @ (u * g1) + design.w_ji.T @ (u * g2)) / n
    if boundary:
        return (float(np.mean(logs)), score_beta, None, u, g1, g2, None,
                v1, v2, p, comp), logs
    score_rho = float(np.sum(u * grho) / n)
    return (float(np.mean(logs)), score_beta, score_rho, u, g1, g2, grho,
            v1, v2, p, comp), logs


def ntu_general_loglik(design, net, beta, rho, per_dyad=False, hessian=True):
    """NTU log-likelihood with within-dyad error correlation rho in [-1, 1].

    At interior rho the score covers (beta, rho), using
    dPhi2/da = phi(a)*Phi((b - rho*a)/sqrt(1-rho^2)) and dPhi2/drho =
    the bivariate density (Plackett's identity).  The beta block of the
    Hessian is analytic; the rho row/column comes from central finite
    differences of the analytic score (step 1e-5), since no closed-form
    rho-Hessian is available.  At rho = +/-1 the probability degenerates to
    the closed forms Phi(min(v1, v2)) / max(0, Phi(v1)+Phi(v2)-1) and only
    the beta derivatives are defined.

    hessian: True for the full matrix, "beta" for the analytic beta block
    only (the score still covers (beta, rho)), or False to skip it.
    """
    rho = _check_rho(rho)
    beta = _check_beta(design, beta)
    y = outcomes(design, net)
    parts, logs = _general_value_score(design, y, beta, rho, per_dyad)
    if parts is None:
        return _separation_eval(logs, design.k + (0 if abs(rho) == 1.0 else 1),
                                per_dyad)
    value, score_beta, score_rho, u, g1, g2, grho, v1, v2, p, comp = parts

    boundary = abs(rho) == 1.0
    k = design.k
    n = design.n_dyads
    score = score_beta if boundary else np.append(score_beta, score_rho)

    mode = {True: "full", False: "none", "full": "full", "beta": "beta",
            "none": "none"}[hessian]
    if mode == "none" and not boundary:
        return LikelihoodEval(value, score, np.full((k + 1, k + 1), np.nan),
                              logs if per_dyad else None)

    # analytic beta block: u * d2p/dbdb' - r * (dp/db)(dp/db)'
    with np.errstate(divide="ignore"):
        r = np.where(y == 1.0, 1.0 / p ** 2, 1.0 / comp ** 2)
    if boundary:
        # p is a single-index probit probability in the active argument
        p11 = -v1 * g1
        p22 = -v2 * g2
        pcross = np.zeros_like(v1)
    else:
        p11 = -v1 * g1 - rho * grho
        p22 = -v2 * g2 - rho * grho
        pcross = grho
    c11 = u * p11 - r * g1 ** 2
    c22 = u * p22 - r * g2 ** 2
    cxx = u * pcross - r * g1 * g2
    hess_beta = (_weighted_outer(design.w_ij, design.w_ij, c11)
                 + _weighted_outer(design.w_ji, design.w_ji, c22)) / n
    cross = _weighted_outer(design.w_ij, design.w_ji, cxx) / n
    hess_beta += cross + cross.T

    if boundary or mode == "beta":
        return LikelihoodEval(value, score, hess_beta,
                              logs if per_dyad else None)

    hess = np.empty((k + 1, k + 1))
    hess[:k, :k] = hess_beta
    step = min(1e-5, (1.0 - abs(rho)) / 2.0)
    if step > 0.0:
        up, _ = _general_value_score(design, y, beta, rho + step, False)
        dn, _ = _general_value_score(design, y, beta, rho - step, False)
        if up is None or dn is None:
            hess[k, :] = hess[:, k] = np.nan
        else:
            hess[k, :k] = hess[:k, k] = (up[1] - dn[1]) / (2.0 * step)
            hess[k, k] = (up[2] - dn[2]) / (2.0 * step)
    else:
        hess[k, :] = hess[:, k] = np.nan
    return LikelihoodEval(value, score, hess, logs if per_dyad else None)


# ---------------------------------------------------------------------------
# Information matrices


def j1_matrix(design, beta):
    """Sample information matrix for the symmetric-regressor NTU model.

    (1/N) sum of 4*phi(v)^2 / (1 - Phi(v)^2) * w w' over dyads; its inverse
    over N estimates Var(beta_hat).
    """
    if not design.is_fully_symmetric:
        raise ValueError("J1 is defined for fully symmetric designs; use j2_matrix")
    beta = _check_beta(design, beta)
    v = design.w_ij @ beta
    q = special.ndtr(-v)
    one_minus_sq = q * (1.0 + special.ndtr(v))  # 1 - Phi(v)^2
    coef = 4.0 * np.exp(2.0 * _log_pdf(v)) / one_minus_sq
    return _weighted_outer(design.w_ij, design.w_ij, coef) / design.n_dyads


def j2_matrix(design, beta):
    """Sample information matrix for the general (possibly asymmetric) design.

    Three-term form in w_ij w_ij', w_ji w_ji' and the symmetrized cross
    product; collapses to j1_matrix when w_ij = w_ji.
    """
    beta = _check_beta(design, beta)
    v1 = design.w_ij @ beta
    v2 = design.w_ji @ beta
    q1 = special.ndtr(-v1)
    q2 = special.ndtr(-v2)
    comp = q1 + q2 - q1 * q2
    # phi(v1)^2 / Phi(v1) computed in log space to survive deep tails
    with np.errstate(divide="ignore", invalid="ignore"):
        t1 = np.exp(2.0 * _log_pdf(v1) - special.log_ndtr(v1)) * (1.0 - q2) / comp
        t2 = np.exp(2.0 * _log_pdf(v2) - special.log_ndtr(v2)) * (1.0 - q1) / comp
        tx = np.exp(_log_pdf(v1) + _log_pdf(v2)) / comp
    out = (_weighted_outer(design.w_ij, design.w_ij, t1)
           + _weighted_outer(design.w_ji, design.w_ji, t2)) / design.n_dyads
    cross = _weighted_outer(design.w_ij, design.w_ji, tx) / design.n_dyads
    return out + cross + cross.T
