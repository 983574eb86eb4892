"""Maximum likelihood fitting over a box parameter space.

TU and independent-error NTU likelihoods are maximized by Newton steps with
the analytic Hessian and Armijo backtracking (on fully symmetric designs the
independent-error objective is globally concave, so Newton is the natural
choice; elsewhere a ridge fallback keeps the direction an ascent one).  The
general-rho model has no closed-form rho-Hessian, so it runs BFGS on
(beta, atanh rho) -- the atanh map sends the open correlation interval to
the line -- followed by a short Newton polish on the assembled
analytic-plus-finite-difference Hessian to drive the score norm below
tolerance.

Correlations are optimized over [-1+1e-8, 1-1e-8]; an optimum pinned at the
edge of that box is reported as rho_hat = +/-1.0 exactly.  Variance
estimates divide the inverted information by the dyad count: closed-form
information (J1/J2) where available for the independent-error model,
observed information elsewhere.  No closed-form asymptotic variance exists
for the general-rho model, so its standard errors are the usual
observed-information ML default.

Everything here is deterministic: identical inputs give bit-identical fits.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from . import likelihood as lk
from .dyaddata import check_identification, outcomes

__all__ = [
    "ModelSpec",
    "Params",
    "FitResult",
    "fit",
    "fit_constrained_rho",
    "warm_start",
    "FAMILIES",
]

FAMILIES = ("tu_probit", "tu_logit", "ntu_rho0", "ntu_general")

DEFAULT_BOUND = 50.0
# non-concave likelihoods on very small designs can trap a single-start
# Newton/BFGS in a local maximum; below this dyad count a handful of
# deterministic restarts is essentially free insurance
MULTISTART_MAX_DYADS = 100
RHO_EPS = 1e-8                      # optimization box is |rho| <= 1 - RHO_EPS
Z_MAX = np.arctanh(1.0 - RHO_EPS)
GRAD_TOL = 1e-8
STEP_TOL = 1e-10
MAX_ITER = 200


@dataclass(frozen=True)
class ModelSpec:
    """Model family plus the declarative design and parameter-space box.

    theta_bounds is a (k, 2) array of per-coefficient [lo, hi] limits; the
    default box of +/-50 per coordinate is effectively unbounded while still
    keeping the parameter space bounded, and a fit that runs into it is
    flagged as separation.  rho_fixed pins the error correlation (used by
    the constrained fits inside the likelihood-ratio tests).
    """

    family: str
    transforms: tuple = ()
    theta_bounds: np.ndarray | None = None
    rho_fixed: float | None = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown model family {self.family!r}")
        if self.theta_bounds is not None:
            tb = np.asarray(self.theta_bounds, dtype=float)
            if tb.ndim != 2 or tb.shape[1] != 2 or np.any(tb[:, 0] >= tb[:, 1]):
                raise ValueError("theta_bounds must be (k, 2) with lo < hi")
        if self.rho_fixed is not None and not -1.0 <= self.rho_fixed <= 1.0:
            raise ValueError("rho_fixed must lie in [-1, 1]")


@dataclass
class Params:
    beta: np.ndarray
    rho: float | None = None


@dataclass
class FitResult:
    beta_hat: np.ndarray
    rho_hat: float | None
    loglik: float                   # mean log-likelihood at the optimum
    score_norm: float
    vcov: np.ndarray | None
    std_errors: np.ndarray | None
    converged: bool
    iterations: int
    info_matrix_kind: str           # "J1" | "J2" | "observed" | "none"
    n_dyads: int
    message: str = ""
    loglik_path: np.ndarray = field(default_factory=lambda: np.empty(0))


# ---------------------------------------------------------------------------
# optimizers


def _projected_grad(x, g, lo, hi):
    pg = g.copy()
    pg[(x <= lo) & (g < 0.0)] = 0.0
    pg[(x >= hi) & (g > 0.0)] = 0.0
    return pg


def _ascent_direction(g, hess):
    """Solve (-H + ridge) d = g, escalating the ridge until -H is PD."""
    neg = -hess
    scale = max(1.0, np.max(np.abs(neg)))
    for ridge in (0.0, 1e-10, 1e-6, 1e-3, 1.0, 1e3):
        try:
            chol = np.linalg.cholesky(neg + ridge * scale * np.eye(len(g)))
            d = np.linalg.solve(chol.T, np.linalg.solve(chol, g))
            if np.all(np.isfinite(d)):
                return d
        except np.linalg.LinAlgError:
            continue
    return g / scale


def _newton_maximize(fgh, x0, lo, hi):
    """Maximize fgh = x -> (value, grad, hess) over the box [lo, hi].

    Backtracking Armijo globalization; once the projected score is small the
    full Newton step is taken without a sufficient-decrease test, since near
    the optimum the objective is flat to machine precision and the step size
    is driven by the gradient alone.  A score below tolerance with a Newton
    step that is *not* small means the likelihood has gone numerically flat
    while still increasing (separated data); the iterate is then pushed along
    the gradient sign toward the box so the boundary diagnostic can fire.
    """
    x = np.clip(np.asarray(x0, dtype=float), lo, hi)
    value, g, hess = fgh(x)
    if not np.isfinite(value):
        raise ValueError("log-likelihood not finite at the starting point")
    path = [value]
    converged = False
    message = ""
    for it in range(1, MAX_ITER + 1):
        pg = _projected_grad(x, g, lo, hi)
        gnorm = np.max(np.abs(pg)) if pg.size else 0.0
        d = _ascent_direction(pg, hess)
        dnorm = np.max(np.abs(d)) / max(1.0, np.max(np.abs(x)))
        if gnorm < GRAD_TOL:
            if dnorm < 1e-8:
                converged = True
                break
            # flat ridge: jump toward the boundary the gradient points at
            d = np.where(pg > 0.0, hi - x, np.where(pg < 0.0, lo - x, 0.0))
            if np.max(np.abs(d)) == 0.0:
                converged = True
                break
        local = gnorm < 1e-6
        step_ok = False
        t = 1.0
        while t >= 1e-12:
            x_new = np.clip(x + t * d, lo, hi)
            actual = x_new - x
            slope = g @ actual
            v_new = fgh(x_new)
            if np.isfinite(v_new[0]) and (
                    (local and v_new[0] >= value - 1e-10)
                    or v_new[0] >= value + 1e-4 * slope):
                step_ok = True
                break
            t *= 0.5
        if not step_ok:
            converged = gnorm < GRAD_TOL
            if not converged:
                message = "line search failed before reaching score tolerance"
            break
        rel_step = np.max(np.abs(actual)) / max(1.0, np.max(np.abs(x)))
        x = x_new
        value, g, hess = v_new
        path.append(value)
        pg = _projected_grad(x, g, lo, hi)
        if np.max(np.abs(pg)) < GRAD_TOL and rel_step < STEP_TOL:
            converged = True
            break
    else:
        it = MAX_ITER
        message = "maximum iterations reached"
    pg = _projected_grad(x, g, lo, hi)
    return x, value, g, hess, float(np.max(np.abs(pg))), converged, it, \
        np.asarray(path), message


def _bfgs_maximize(fg, x0, lo, hi):
    """BFGS (inverse-Hessian form) maximization over a box.

    Steps are projected onto the box and convergence is judged on the
    projected gradient, so an optimum pinned at a bound (the rho boundary
    case) terminates cleanly.
    """
    x = np.clip(np.asarray(x0, dtype=float), lo, hi)
    value, g = fg(x)
    if not np.isfinite(value):
        raise ValueError("log-likelihood not finite at the starting point")
    n = len(x)
    h_inv = np.eye(n)
    path = [value]
    converged = False
    message = ""
    for it in range(1, MAX_ITER + 1):
        pg = _projected_grad(x, g, lo, hi)
        if np.max(np.abs(pg)) < GRAD_TOL:
            converged = True
            break
        d = h_inv @ pg
        if d @ pg <= 0.0:
            h_inv = np.eye(n)
            d = pg.copy()
        t = 1.0
        step_ok = False
        while t >= 1e-14:
            x_new = np.clip(x + t * d, lo, hi)
            actual = x_new - x
            if np.max(np.abs(actual)) == 0.0:
                break
            v_new, g_new = fg(x_new)
            if np.isfinite(v_new) and v_new >= value + 1e-4 * (g @ actual):
                step_ok = True
                break
            t *= 0.5
        if not step_ok:
            converged = np.max(np.abs(pg)) < GRAD_TOL
            if not converged:
                message = "line search failed before reaching score tolerance"
            break
        s = x_new - x
        yk = g_new - g
        sy = s @ yk
        if -sy > 1e-10 * np.linalg.norm(s) * np.linalg.norm(yk):
            # update on the minimization-convention pair (s, -yk)
            rho_k = -1.0 / sy
            v_outer = np.eye(n) - rho_k * np.outer(s, -yk)
            h_inv = v_outer @ h_inv @ v_outer.T + rho_k * np.outer(s, s)
        rel_step = np.max(np.abs(s)) / max(1.0, np.max(np.abs(x)))
        x, value, g = x_new, v_new, g_new
        path.append(value)
        if rel_step < STEP_TOL and np.max(np.abs(_projected_grad(x, g, lo, hi))) < GRAD_TOL:
            converged = True
            break
    else:
        it = MAX_ITER
        message = "maximum iterations reached"
    pg = _projected_grad(x, g, lo, hi)
    return x, value, g, float(np.max(np.abs(pg))), converged, it, \
        np.asarray(path), message


# ---------------------------------------------------------------------------
# family plumbing


def _beta_bounds(spec, k):
    if spec.theta_bounds is not None:
        tb = np.asarray(spec.theta_bounds, dtype=float)
        if tb.shape[0] != k:
            raise ValueError(f"theta_bounds has {tb.shape[0]} rows, design has {k} regressors")
        return tb[:, 0].copy(), tb[:, 1].copy()
    return np.full(k, -DEFAULT_BOUND), np.full(k, DEFAULT_BOUND)


def _at_bound(x, lo, hi):
    tol = 1e-6 * np.maximum(1.0, hi - lo)
    return bool(np.any(x <= lo + tol) or np.any(x >= hi - tol))


def _separation_check(x, lo, hi, value):
    """Boundary hit or an essentially perfect fit both mean no interior MLE.

    A mean log-likelihood above -1e-6 says every dyad is predicted almost
    perfectly, which a non-degenerate binary-choice fit cannot produce; it is
    the flat-ridge signature of separated data even when the optimizer stalls
    before the box.
    """
    if _at_bound(x, lo, hi):
        return "separation: estimate at parameter-space boundary; MLE may not exist"
    if value > -1e-6:
        return "separation: perfect prediction; MLE may not exist"
    return None


def _free_indices(k, fixed):
    fixed = fixed or {}
    for c in fixed:
        if not 0 <= c < k:
            raise ValueError(f"fixed coordinate {c} out of range for k={k}")
    return np.array([c for c in range(k) if c not in fixed], dtype=int), fixed


def _embedder(k, free, fixed):
    def embed(b_free):
        beta = np.empty(k)
        beta[free] = b_free
        for c, v in fixed.items():
            beta[c] = v
        return beta
    return embed


def _fgh_for(family, design, y, rho=None):
    if family == "tu_probit":
        return lambda b: _unpack(lk.tu_loglik(design, y, b, "probit"))
    if family == "tu_logit":
        return lambda b: _unpack(lk.tu_loglik(design, y, b, "logit"))
    if family == "ntu_rho0":
        return lambda b: _unpack(lk.ntu_rho0_loglik(design, y, b))
    return lambda b: _unpack(lk.ntu_general_loglik(design, y, b, rho, hessian="beta"))


def _unpack(ev):
    if ev.separated:
        k = ev.hessian.shape[0]
        return -np.inf, np.zeros(k), -np.eye(k)
    return ev.value, ev.score[:ev.hessian.shape[0]], ev.hessian


def _reduced_fgh(fgh, embed, free):
    def wrapped(b_free):
        value, g, hess = fgh(embed(b_free))
        return value, g[free], hess[np.ix_(free, free)]
    return wrapped


def _invert_information(info, n_dyads):
    info = np.asarray(info, dtype=float)
    if not np.all(np.isfinite(info)):
        return None
    cond = np.linalg.cond(info)
    if not np.isfinite(cond) or cond > 1e12:
        return None
    try:
        np.linalg.cholesky(info)  # a usable information matrix is PD
    except np.linalg.LinAlgError:
        return None
    vcov = np.linalg.inv(info) / n_dyads
    return (vcov + vcov.T) / 2.0


def _failed_fit(init, rho, design, message):
    return FitResult(np.asarray(init.beta, dtype=float), rho, -np.inf, np.inf,
                     None, None, False, 0, "none", design.n_dyads, message)


def warm_start(spec, design, net):
    """Cheap starting point: TU probit on the symmetrized design, rho = 0.

    Averaging w_ij and w_ji makes the design symmetric, so the concave TU
    objective always applies; a failed probit fit falls back to zeros.
    """
    y = outcomes(design, net)
    w_bar = (design.w_ij + design.w_ji) / 2.0
    sym = type(design)(design.n, design.pairs, w_bar, w_bar.copy(),
                       np.ones(design.k, dtype=bool), design.column_names)
    lo, hi = _beta_bounds(spec, design.k)
    try:
        x, *_ = _newton_maximize(_fgh_for("tu_probit", sym, y), np.zeros(design.k), lo, hi)
        beta0 = x
    except (ValueError, np.linalg.LinAlgError):
        beta0 = np.zeros(design.k)
    return Params(beta0, 0.0)


def fit(spec, design, net, init=None):
    """Maximize the selected log-likelihood; returns estimates and SEs.

    A failed identification check warns rather than errors (the sample may
    still produce a usable local optimum), but separation and boundary hits
    mark the fit as non-converged.
    """
    if spec.family in ("tu_probit", "tu_logit") and not design.is_fully_symmetric:
        raise ValueError("TU families require a fully symmetric design; "
                         "asymmetric regressors need an NTU family")
    report = check_identification(design)
    if not report.identified:
        warnings.warn(f"design failed identification check ({report.reason}); "
                      "estimates may not be unique", stacklevel=2)
    y = outcomes(design, net)
    if init is None:
        init = warm_start(spec, design, net)

    if spec.family == "ntu_general":
        if spec.rho_fixed is not None:
            return fit_constrained_rho(spec, design, net, spec.rho_fixed, init=init)
        runner = lambda start: _fit_general(spec, design, y, start)
        non_concave = True
    else:
        runner = lambda start: _fit_beta_family(spec, design, y, start)
        non_concave = spec.family == "ntu_rho0" and not design.is_fully_symmetric
    if non_concave and design.n_dyads <= MULTISTART_MAX_DYADS:
        return _best_fit(runner(Params(b, init.rho)) for b in _start_betas(init))
    return runner(init)


def _start_betas(init):
    """Deterministic restart set: the warm start, zeros, and sign flips."""
    beta = np.asarray(init.beta, dtype=float)
    candidates = [beta, np.zeros_like(beta)]
    if beta.size <= 3:
        for signs in np.ndindex(*(2,) * beta.size):
            candidates.append(beta * np.where(np.array(signs) == 0, 1.0, -1.0))
    else:
        candidates.append(-beta)
    unique = []
    for cand in candidates:
        if not any(np.array_equal(cand, u) for u in unique):
            unique.append(cand)
    return unique


def _best_fit(results):
    best = None
    for result in results:
        if best is None:
            best = result
            continue
        if (result.converged, result.loglik) > (best.converged, best.loglik):
            best = result
    return best


def _fit_beta_family(spec, design, y, init, fixed=None):
    k = design.k
    free, fixed = _free_indices(k, fixed)
    embed = _embedder(k, free, fixed)
    lo, hi = _beta_bounds(spec, k)
    if len(free) == 0:
        # everything pinned: nothing to optimize, just evaluate
        x = embed(np.empty(0))
        value, _, _ = _fgh_for(spec.family, design, y)(x)
        return FitResult(x, None, value, 0.0, None, None, np.isfinite(value),
                         0, "none", design.n_dyads, "all coefficients fixed")
    fgh = _reduced_fgh(_fgh_for(spec.family, design, y), embed, free)
    try:
        xf, value, g, hess, gnorm, converged, iters, path, message = \
            _newton_maximize(fgh, np.asarray(init.beta)[free], lo[free], hi[free])
    except ValueError as exc:
        return _failed_fit(init, None, design, f"{exc}; MLE may not exist")
    x = embed(xf)

    sep = _separation_check(xf, lo[free], hi[free], value)
    if sep:
        converged = False
        message = sep

    if fixed:
        info, kind = -hess, "observed"  # free block only
        vcov_free = _invert_information(info, design.n_dyads)
        vcov = std = None
        if vcov_free is not None:
            vcov = np.full((k, k), np.nan)
            vcov[np.ix_(free, free)] = vcov_free
            std = np.sqrt(np.abs(np.diag(vcov)))
            std[list(fixed)] = np.nan
        else:
            kind = "none"
        return FitResult(x, None, value, gnorm, vcov, std, converged, iters,
                         kind, design.n_dyads, message, path)

    if spec.family == "ntu_rho0":
        info = lk.j1_matrix(design, x) if design.is_fully_symmetric else lk.j2_matrix(design, x)
        kind = "J1" if design.is_fully_symmetric else "J2"
    else:
        info, kind = -hess, "observed"
    vcov = _invert_information(info, design.n_dyads)
    if vcov is None:
        kind = "none"
        message = (message + "; " if message else "") + "information matrix singular"
    std = np.sqrt(np.diag(vcov)) if vcov is not None else None
    return FitResult(x, None, value, gnorm, vcov, std, converged, iters,
                     kind, design.n_dyads, message, path)


def _fit_general(spec, design, y, init, fixed=None):
    k = design.k
    free, fixed = _free_indices(k, fixed)
    embed = _embedder(k, free, fixed)
    nf = len(free)
    blo, bhi = _beta_bounds(spec, k)
    lo = np.append(blo[free], -Z_MAX)
    hi = np.append(bhi[free], Z_MAX)

    def fg(theta):
        beta = embed(theta[:nf])
        z = theta[nf]
        rho = float(np.tanh(z))
        ev = lk.ntu_general_loglik(design, y, beta, rho, hessian="none")
        if ev.separated:
            return -np.inf, np.zeros(nf + 1)
        sech2 = 1.0 / np.cosh(z) ** 2
        return ev.value, np.append(ev.score[free], ev.score[k] * sech2)

    rho0 = 0.0 if init.rho is None else float(np.clip(init.rho, -1 + RHO_EPS, 1 - RHO_EPS))
    x0 = np.append(np.asarray(init.beta)[free], np.arctanh(rho0))
    try:
        x, value, g, gnorm, converged, iters, path, message = _bfgs_maximize(fg, x0, lo, hi)
    except ValueError as exc:
        return _failed_fit(init, None, design, f"{exc}; MLE may not exist")

    # Newton polish on (beta, z) with the analytic-plus-FD Hessian, to push
    # the score norm past what value-comparison line searches can resolve.
    idx = np.append(free, k)
    for _ in range(30):
        pg = _projected_grad(x, g, lo, hi)
        if np.max(np.abs(pg)) < 1e-9:
            break
        beta = embed(x[:nf])
        z = x[nf]
        rho = float(np.tanh(z))
        at_z_bound = abs(z) >= Z_MAX - 1e-9
        near_edge = (1.0 - abs(rho)) < 1e-6
        if near_edge and not at_z_bound:
            # too close to |rho| = 1 for the FD rho-Hessian; if the
            # likelihood does not drop on the boundary itself, the optimum
            # is the boundary (BFGS otherwise crawls here indefinitely)
            x_try = x.copy()
            x_try[nf] = np.sign(z) * Z_MAX
            v_try, g_try = fg(x_try)
            if np.isfinite(v_try) and v_try >= value - 1e-12:
                x, value, g = x_try, v_try, g_try
                iters += 1
                continue
        if at_z_bound or near_edge:
            # the analytic beta Hessian cancels catastrophically this close
            # to |rho| = 1; the exact boundary closed form is its limit and
            # is well conditioned
            ev = lk.ntu_general_loglik(design, y, beta, float(np.sign(z)))
        else:
            ev = lk.ntu_general_loglik(design, y, beta, rho, hessian=True)
        if ev.separated or not np.all(np.isfinite(ev.hessian)):
            break
        if at_z_bound or near_edge:
            d = _ascent_direction(pg[:nf], ev.hessian[np.ix_(free, free)])
            x_new = np.clip(x + np.append(d, 0.0), lo, hi)
            if at_z_bound:
                # land exactly on the bound so the outward z-gradient projects out
                x_new[nf] = np.sign(z) * Z_MAX
        else:
            c = 1.0 / np.cosh(z) ** 2
            hz = ev.hessian[np.ix_(idx, idx)].copy()
            hz[nf, :nf] *= c
            hz[:nf, nf] *= c
            hz[nf, nf] = hz[nf, nf] * c * c + ev.score[k] * (-2.0 * c * rho)
            d = _ascent_direction(pg, hz)
            x_new = np.clip(x + d, lo, hi)
        v_new, g_new = fg(x_new)
        if not np.isfinite(v_new) or v_new < value - 1e-9:
            break
        x, value, g = x_new, v_new, g_new
        iters += 1
    gnorm = float(np.max(np.abs(_projected_grad(x, g, lo, hi))))
    converged = converged or gnorm < GRAD_TOL

    beta_hat = embed(x[:nf])
    z_hat = x[nf]
    at_rho_bound = abs(z_hat) >= Z_MAX - 1e-9
    rho_hat = float(np.sign(z_hat)) if at_rho_bound else float(np.tanh(z_hat))
    sep = _separation_check(x[:nf], blo[free], bhi[free], value)
    if sep:
        converged = False
        message = sep

    if at_rho_bound:
        ev = lk.ntu_general_loglik(design, y, beta_hat, rho_hat, hessian="beta")
        vcov_free = _invert_information(-ev.hessian[np.ix_(free, free)], design.n_dyads)
        kind = "observed"
        if vcov_free is None:
            kind = "none"
            message = (message + "; " if message else "") + "information matrix singular"
            vcov, std = None, None
        else:
            vcov = np.full((k + 1, k + 1), np.nan)
            vcov[np.ix_(free, free)] = vcov_free
            std = np.sqrt(np.abs(np.diag(vcov)))
            std[k] = np.nan  # no SE for a boundary correlation estimate
            for c in fixed:
                std[c] = np.nan
        value = ev.value
    else:
        ev = lk.ntu_general_loglik(design, y, beta_hat, rho_hat, hessian=True)
        vcov_free = _invert_information(-ev.hessian[np.ix_(idx, idx)], design.n_dyads)
        kind = "observed"
        if vcov_free is None:
            kind = "none"
            message = (message + "; " if message else "") + "information matrix singular"
            vcov, std = None, None
        else:
            vcov = np.full((k + 1, k + 1), np.nan)
            vcov[np.ix_(idx, idx)] = vcov_free
            std = np.sqrt(np.abs(np.diag(vcov)))
            for c in fixed:
                std[c] = np.nan
        value = ev.value
    return FitResult(beta_hat, rho_hat, value, gnorm, vcov, std, converged,
                     iters, kind, design.n_dyads, message, path)


def _fit_fixed_beta(spec, design, net, coord, value, init=None):
    """Fit with one linking coefficient pinned (constrained side of LR tests).

    For the general family the correlation is re-estimated alongside the
    remaining coefficients.
    """
    y = outcomes(design, net)
    if init is None:
        init = warm_start(spec, design, net)
    fixed = {int(coord): float(value)}
    if spec.family == "ntu_general":
        if spec.rho_fixed is not None:
            raise ValueError("cannot pin both beta and rho through this path")
        return _fit_general(spec, design, y, init, fixed=fixed)
    return _fit_beta_family(spec, design, y, init, fixed=fixed)


def fit_constrained_rho(spec, design, net, rho_value, init=None):
    """Maximize over beta only, holding the error correlation fixed.

    rho_value = 0 is routed through the factorized likelihood and
    rho_value = +/-1 through the degenerate closed forms, so the nesting
    identities (TU probit at rho = 1 on symmetric designs, the
    independent-error model at rho = 0) hold to optimizer precision.
    """
    if spec.family != "ntu_general":
        raise ValueError("constrained-rho fits require the ntu_general family")
    if not -1.0 <= rho_value <= 1.0:
        raise ValueError("rho_value must lie in [-1, 1]")
    y = outcomes(design, net)
    if init is None:
        init = warm_start(spec, design, net)
    k = design.k
    lo, hi = _beta_bounds(spec, k)
    if rho_value == 0.0:
        fgh = _fgh_for("ntu_rho0", design, y)
    else:
        fgh = _fgh_for("ntu_general", design, y, rho=float(rho_value))
    try:
        x, value, g, hess, gnorm, converged, iters, path, message = \
            _newton_maximize(fgh, init.beta, lo, hi)
    except ValueError as exc:
        return _failed_fit(init, float(rho_value), design, f"{exc}; MLE may not exist")
    sep = _separation_check(x, lo, hi, value)
    if sep:
        converged = False
        message = sep
    vcov = _invert_information(-hess, design.n_dyads)
    kind = "observed"
    if vcov is None:
        kind = "none"
        message = (message + "; " if message else "") + "information matrix singular"
    std = np.sqrt(np.diag(vcov)) if vcov is not None else None
    return FitResult(x, float(rho_value), value, gnorm, vcov, std, converged,
                     iters, kind, design.n_dyads, message, path)
