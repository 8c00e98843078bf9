"""Quasi-likelihood evaluation and Newton optimization.

The logistic criterion for a conditional location-scale model is

    L(theta) = sum_t [ -log sigma_t + log f((y_t - g_t) / sigma_t) ],

with f the standard logistic density.  Score and Hessian are assembled
analytically from the filter's derivative blocks; the Gaussian
criterion (classical QMLE) shares the same plumbing with its own
per-observation weights.  Optimization is damped Newton ascent with a
ridge fallback, Armijo backtracking, and projection onto the parameter
box, so the criterion value never decreases along accepted steps.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve, null_space

from .errors import (
    InfeasibleConstraint,
    NonFiniteObjective,
    NotScaleOnly,
    RankDeficientConstraint,
    SingularInformation,
)
from .kernel import logistic_logpdf
from .models.base import ModelSpec
from .params import ParamVector, as_array

__all__ = [
    "CriterionParts",
    "FitOptions",
    "FitResult",
    "ConstrainedFit",
    "KernelMoments",
    "evaluate",
    "fit",
    "fit_constrained",
    "sandwich_cov",
    "scale_only_information",
    "scale_only_cov",
    "kernel_moments",
]


@dataclass
class CriterionParts:
    """Criterion value with optional analytic derivatives.

    ``score_rows`` holds per-observation score contributions (n, d);
    ``hess`` is the Hessian of the summed criterion.  ``info_hessian``
    is the average per-observation negative Hessian and ``info_opg``
    the average outer product of score rows; both are None unless the
    requested order covers them.
    """

    loglik: float
    nobs: int
    clamped: int = 0
    score: np.ndarray | None = None
    score_rows: np.ndarray | None = None
    hess: np.ndarray | None = None
    residuals: np.ndarray | None = None

    @property
    def info_hessian(self) -> np.ndarray:
        return -self.hess / self.nobs

    @property
    def info_opg(self) -> np.ndarray:
        return self.score_rows.T @ self.score_rows / self.nobs


def _logistic_weights(x: np.ndarray):
    t = np.tanh(0.5 * x)  # 2 F(x) - 1
    fx = 0.25 * (1.0 - t * t)
    u = x * t
    return t, fx, u


def evaluate(
    model: ModelSpec,
    y,
    theta,
    order: int = 0,
    criterion: str = "logistic",
    scale_only: bool = False,
) -> CriterionParts:
    """Evaluate the criterion at theta with derivatives up to ``order``.

    ``scale_only=True`` uses the reduced score/Hessian valid when the
    conditional mean is identically zero; it must agree with the
    general assembly on such models and exists as an independently
    coded path.
    """
    if scale_only and not model.scale_only:
        raise NotScaleOnly(f"model {model.name!r} has a conditional mean part")
    th = as_array(theta)
    yv = np.asarray(y, dtype=float).ravel()
    out = model.filter(yv, th, order=order)
    sig2, sig = out.sigma2, out.sigma
    x = (yv - out.mean) / sig
    n = yv.size

    if criterion == "logistic":
        ll = float(np.sum(-0.5 * np.log(sig2) + logistic_logpdf(x)))
    elif criterion == "gaussian":
        ll = float(np.sum(-0.5 * np.log(sig2) - 0.5 * x * x))
    else:
        raise ValueError(f"unknown criterion {criterion!r}")
    if not np.isfinite(ll):
        ll = -np.inf
    parts = CriterionParts(loglik=ll, nobs=n, clamped=out.clamped, residuals=x)
    if order == 0:
        return parts

    dg, ds2 = out.dmean, out.dsigma2
    if criterion == "logistic":
        t, fx, u = _logistic_weights(x)
        a = t / sig                      # weight on dmean
        b = (u - 1.0) / (2.0 * sig2)     # weight on dsigma2
    else:
        a = x / sig
        b = (x * x - 1.0) / (2.0 * sig2)
    if scale_only:
        rows = ds2 * b[:, None]
    else:
        rows = dg * a[:, None] + ds2 * b[:, None]
    parts.score_rows = rows
    parts.score = rows.sum(axis=0)
    if order == 1:
        return parts

    d2g, d2s2 = out.d2mean, out.d2sigma2
    s4 = sig2 * sig2
    if criterion == "logistic":
        c_ss = (u - 1.0) / (2.0 * s4) + (u + 2.0 * x * x * fx) / (4.0 * s4)
        c_d2s = -(u - 1.0) / (2.0 * sig2)
        c_sg = (t + 2.0 * x * fx) / (2.0 * sig2 * sig)
        c_d2g = -t / sig
        c_gg = 2.0 * fx / sig2
    else:
        c_ss = (2.0 * x * x - 1.0) / (2.0 * s4)
        c_d2s = (1.0 - x * x) / (2.0 * sig2)
        c_sg = x / (sig2 * sig)
        c_d2g = -x / sig
        c_gg = 1.0 / sig2

    # accumulated per-observation negative Hessian, then negated once
    neg_hess = np.einsum("t,tk,tl->kl", c_ss, ds2, ds2)
    neg_hess += np.einsum("t,tkl->kl", c_d2s, d2s2)
    if not scale_only:
        cross = np.einsum("t,tk,tl->kl", c_sg, ds2, dg)
        neg_hess += cross + cross.T
        neg_hess += np.einsum("t,tkl->kl", c_d2g, d2g)
        neg_hess += np.einsum("t,tk,tl->kl", c_gg, dg, dg)
    parts.hess = -neg_hess
    return parts


# -- Newton ascent -----------------------------------------------------


@dataclass(frozen=True)
class FitOptions:
    """Optimizer controls; defaults suit series of a few hundred points."""

    criterion: str = "logistic"
    max_iter: int = 500
    step_tol: float = 1e-8
    score_tol: float = 1e-6
    multistart: bool = True
    n_random_starts: int = 3
    seed: int = 0
    start: tuple[float, ...] | None = None


@dataclass
class FitResult:
    """Unconstrained fit: point estimate, information pieces, diagnostics."""

    theta: ParamVector
    loglik: float
    score: np.ndarray
    info_hessian: np.ndarray
    info_opg: np.ndarray
    cov: np.ndarray | None
    se: np.ndarray | None
    residuals: np.ndarray
    nobs: int
    converged: bool
    iterations: int
    clamp_count: int
    boundary: tuple[bool, ...]
    trace: tuple[float, ...]
    criterion: str
    n_starts: int


@dataclass
class ConstrainedFit:
    """Fit maximized over {R theta = r} within the box."""

    theta: ParamVector
    loglik: float
    multiplier: np.ndarray
    score: np.ndarray
    info_hessian: np.ndarray
    info_opg: np.ndarray
    residuals: np.ndarray
    nobs: int
    converged: bool
    iterations: int
    trace: tuple[float, ...]


def _solve_ascent(hess: np.ndarray, score: np.ndarray) -> np.ndarray:
    """Newton direction for maximization, ridged until it is an ascent."""
    a = -0.5 * (hess + hess.T)
    d = a.shape[0]
    scale = max(1.0, float(np.max(np.abs(np.diag(a)))))
    ridge = 0.0
    eye = np.eye(d)
    for _ in range(40):
        try:
            factor = cho_factor(a + ridge * eye, lower=True)
            delta = cho_solve(factor, score)
            if score @ delta > 0.0:
                return delta
        except LinAlgError:
            pass
        ridge = 1e-10 * scale if ridge == 0.0 else ridge * 10.0
    return score / scale


def _projected_score(score, th, lo, hi, tol=1e-12):
    s = score.copy()
    s[(th <= lo + tol) & (s < 0.0)] = 0.0
    s[(th >= hi - tol) & (s > 0.0)] = 0.0
    return s


def _newton_box(model, y, th0, lo, hi, opts: FitOptions):
    """Damped Newton ascent inside a box; returns None for a dead start."""
    th = np.clip(as_array(th0), lo, hi)
    parts = evaluate(model, y, th, order=2, criterion=opts.criterion)
    if not np.isfinite(parts.loglik):
        return None
    trace = [parts.loglik]
    last_step = np.inf
    converged = False
    iterations = 0
    for it in range(1, opts.max_iter + 1):
        iterations = it
        level = opts.score_tol * (1.0 + abs(parts.loglik))
        sp = _projected_score(parts.score, th, lo, hi)
        if np.max(np.abs(sp)) <= level and last_step <= opts.step_tol:
            converged = True
            break
        # Newton restricted to coordinates not pinned at a bound: a full
        # step clipped onto a box face can stop being an ascent direction,
        # stalling short of the face optimum.
        active = ((th <= lo + 1e-12) & (parts.score < 0.0)) | (
            (th >= hi - 1e-12) & (parts.score > 0.0)
        )
        free = ~active
        delta = np.zeros_like(th)
        if free.any():
            delta[free] = _solve_ascent(
                parts.hess[np.ix_(free, free)], parts.score[free]
            )
        accepted = False
        alpha = 1.0
        while alpha >= 1e-14:
            trial = np.clip(th + alpha * delta, lo, hi)
            step_vec = trial - th
            if np.max(np.abs(step_vec)) == 0.0:
                break
            cand = evaluate(model, y, trial, order=0, criterion=opts.criterion)
            gain = float(parts.score @ step_vec)
            if np.isfinite(cand.loglik) and cand.loglik >= trace[-1] + 1e-4 * max(gain, 0.0):
                accepted = True
                break
            alpha *= 0.5
        if not accepted:
            converged = bool(np.max(np.abs(sp)) <= level)
            break
        last_step = float(np.max(np.abs(trial - th)))
        th = trial
        parts = evaluate(model, y, th, order=2, criterion=opts.criterion)
        trace.append(parts.loglik)
    return th, parts, converged, iterations, trace


def _build_starts(model: ModelSpec, y, lo, hi, opts: FitOptions) -> list[np.ndarray]:
    if opts.start is not None:
        return [np.asarray(opts.start, dtype=float)]
    starts = list(model.start_values(y))
    if opts.multistart:
        starts.append(0.5 * (lo + hi))
        rng = np.random.Generator(
            np.random.Philox(np.random.SeedSequence(opts.seed, spawn_key=(101,)))
        )
        for _ in range(opts.n_random_starts):
            starts.append(rng.uniform(lo, hi))
    return starts


def fit(model: ModelSpec, y, options: FitOptions | None = None) -> FitResult:
    """Maximize the criterion over the model's box; best of several starts."""
    opts = options or FitOptions()
    yv = model._check_series(y)
    if not np.all(np.isfinite(yv)):
        raise NonFiniteObjective("series contains non-finite values")
    if yv.size < 10 * model.dim:
        raise ValueError(
            f"need at least {10 * model.dim} observations for a {model.dim}-parameter fit"
        )
    lo, hi = model.default_bounds()
    best = None
    n_starts = 0
    for th0 in _build_starts(model, yv, lo, hi, opts):
        n_starts += 1
        res = _newton_box(model, yv, th0, lo, hi, opts)
        if res is None:
            continue
        if best is None or res[1].loglik > best[1].loglik:
            best = res
    if best is None:
        raise NonFiniteObjective("criterion was non-finite at every starting point")
    th, parts, converged, iterations, trace = best
    theta = model.wrap(th)
    a_hat, b_hat = parts.info_hessian, parts.info_opg
    try:
        cov = sandwich_cov(a_hat, b_hat, parts.nobs)
        se = np.sqrt(np.maximum(np.diag(cov), 0.0))
    except SingularInformation:
        cov, se = None, None
    return FitResult(
        theta=theta,
        loglik=parts.loglik,
        score=parts.score,
        info_hessian=a_hat,
        info_opg=b_hat,
        cov=cov,
        se=se,
        residuals=parts.residuals,
        nobs=parts.nobs,
        converged=converged,
        iterations=iterations,
        clamp_count=parts.clamped,
        boundary=theta.boundary_active(),
        trace=tuple(trace),
        criterion=opts.criterion,
        n_starts=n_starts,
    )


def _feasible_point(th0, R, r, lo, hi):
    th = np.clip(th0, lo, hi)
    gram = R @ R.T
    for _ in range(500):
        th = th - R.T @ np.linalg.solve(gram, R @ th - r)
        th = np.clip(th, lo, hi)
        if np.max(np.abs(R @ th - r)) <= 1e-11 * (1.0 + np.max(np.abs(r))):
            return th
    raise InfeasibleConstraint("no box point satisfies the linear restriction")


def fit_constrained(
    model: ModelSpec,
    y,
    R,
    r,
    options: FitOptions | None = None,
) -> ConstrainedFit:
    """Maximize subject to R theta = r by Newton in null-space coordinates.

    The Lagrange multiplier estimate is recovered from the stationarity
    of L(theta)/n + lambda' (R theta - r) at the constrained optimum:
    lambda = -(R R')^{-1} R score(theta) / n.
    """
    opts = options or FitOptions()
    yv = model._check_series(y)
    if yv.size < 10 * model.dim:
        raise ValueError(
            f"need at least {10 * model.dim} observations for a {model.dim}-parameter fit"
        )
    R = np.atleast_2d(np.asarray(R, dtype=float))
    r = np.atleast_1d(np.asarray(r, dtype=float))
    q, d = R.shape
    if d != model.dim or r.shape != (q,):
        raise RankDeficientConstraint(
            f"restriction shapes {R.shape}, {r.shape} do not match dim {model.dim}"
        )
    if np.linalg.matrix_rank(R) < q:
        raise RankDeficientConstraint("restriction matrix is not full row rank")
    lo, hi = model.default_bounds()

    base = _feasible_point(0.5 * (lo + hi), R, r, lo, hi)
    basis = null_space(R)
    if basis.shape[1] == 0:
        parts = evaluate(model, yv, base, order=2, criterion=opts.criterion)
        lam = -np.linalg.solve(R @ R.T, R @ (parts.score / parts.nobs))
        return ConstrainedFit(
            theta=model.wrap(base),
            loglik=parts.loglik,
            multiplier=lam,
            score=parts.score,
            info_hessian=parts.info_hessian,
            info_opg=parts.info_opg,
            residuals=parts.residuals,
            nobs=parts.nobs,
            converged=True,
            iterations=0,
            trace=(parts.loglik,),
        )

    def theta_of(xi):
        return base + basis @ xi

    def in_box(th):
        return np.all(th >= lo - 1e-12) and np.all(th <= hi + 1e-12)

    def eval_xi(xi, order):
        th = theta_of(xi)
        if not in_box(th):
            return None
        return evaluate(model, yv, th, order=order, criterion=opts.criterion)

    xi_starts = [np.zeros(basis.shape[1])]
    for th_s in model.start_values(yv):
        xi_starts.append(basis.T @ (np.clip(th_s, lo, hi) - base))

    best = None
    for xi0 in xi_starts:
        res = _newton_null(eval_xi, basis, base, lo, hi, xi0, opts)
        if res is None:
            continue
        if best is None or res[1].loglik > best[1].loglik:
            best = res
    if best is None:
        raise NonFiniteObjective("constrained criterion non-finite at every start")
    xi, parts, converged, iterations, trace = best
    th = theta_of(xi)
    lam = -np.linalg.solve(R @ R.T, R @ (parts.score / parts.nobs))
    return ConstrainedFit(
        theta=model.wrap(np.clip(th, lo, hi)),
        loglik=parts.loglik,
        multiplier=lam,
        score=parts.score,
        info_hessian=parts.info_hessian,
        info_opg=parts.info_opg,
        residuals=parts.residuals,
        nobs=parts.nobs,
        converged=converged,
        iterations=iterations,
        trace=tuple(trace),
    )


def _face_directions(basis, mask):
    """Orthonormal xi-directions tangent to the box faces flagged in mask."""
    if not mask.any():
        return np.eye(basis.shape[1])
    return null_space(basis[mask, :])


def _newton_null(eval_xi, basis, base, lo, hi, xi0, opts: FitOptions):
    """Working-set Newton over {theta = base + basis xi} inside the box.

    Box faces cannot be handled by clipping here: a clipped trial leaves
    the constraint plane.  Binding faces instead join a working set and
    steps move tangent to them, with a ratio test so a blocking face is
    reached exactly rather than approached in collapsing half-steps.
    """
    xi = np.asarray(xi0, dtype=float)
    parts = eval_xi(xi, 2)
    if parts is None or not np.isfinite(parts.loglik):
        return None
    trace = [parts.loglik]
    last_step = np.inf
    converged = False
    iterations = 0
    for it in range(1, opts.max_iter + 1):
        iterations = it
        th = base + basis @ xi
        level = opts.score_tol * (1.0 + abs(parts.loglik))
        pinned_lo = th <= lo + 1e-12
        pinned_hi = th >= hi - 1e-12
        active = (pinned_lo & (parts.score < 0.0)) | (pinned_hi & (parts.score > 0.0))
        s_xi = basis.T @ parts.score
        h_xi = basis.T @ parts.hess @ basis
        dirs = _face_directions(basis, active)
        sp = dirs.T @ s_xi if dirs.shape[1] else np.zeros(1)
        if np.max(np.abs(sp)) <= level and last_step <= opts.step_tol:
            converged = True
            break
        # grow the working set until the Newton direction clears every
        # pinned face; each pass removes at least one free coordinate
        working = active.copy()
        delta = None
        alpha_cap = 1.0
        for _ in range(th.size + 1):
            dirs = _face_directions(basis, working)
            if dirs.shape[1] == 0:
                delta = None
                break
            delta = dirs @ _solve_ascent(dirs.T @ h_xi @ dirs, dirs.T @ s_xi)
            dth = basis @ delta
            alpha_cap = 1.0
            blocker = -1
            for i in range(th.size):
                if working[i] or abs(dth[i]) < 1e-16:
                    continue
                room = (hi[i] - th[i]) / dth[i] if dth[i] > 0 else (lo[i] - th[i]) / dth[i]
                if room < alpha_cap:
                    alpha_cap = room
                    blocker = i
            if alpha_cap > 1e-14:
                break
            if blocker < 0:
                delta = None
                break
            working[blocker] = True
        if delta is None or not np.any(delta):
            converged = bool(np.max(np.abs(sp)) <= level)
            break
        accepted = False
        alpha = min(1.0, alpha_cap)
        while alpha >= 1e-14:
            trial = xi + alpha * delta
            cand = eval_xi(trial, 0)
            if cand is not None and np.isfinite(cand.loglik):
                gain = float(s_xi @ (alpha * delta))
                if cand.loglik >= trace[-1] + 1e-4 * max(gain, 0.0):
                    accepted = True
                    break
            alpha *= 0.5
        if not accepted:
            converged = bool(np.max(np.abs(sp)) <= level)
            break
        last_step = float(np.max(np.abs(alpha * delta)))
        xi = trial
        parts = eval_xi(xi, 2)
        trace.append(parts.loglik)
    return xi, parts, converged, iterations, trace


# -- covariance --------------------------------------------------------


def sandwich_cov(info_hessian: np.ndarray, info_opg: np.ndarray, nobs: int) -> np.ndarray:
    """Asymptotic covariance A^{-1} B A^{-1} / n from the information pair."""
    a = 0.5 * (info_hessian + info_hessian.T)
    vals = np.linalg.eigvalsh(a)
    if vals[0] <= abs(vals[-1]) * 1e-12:
        raise SingularInformation(
            f"information matrix is numerically singular "
            f"(eigenvalues {vals[0]:.3e} .. {vals[-1]:.3e})"
        )
    ainv_b = np.linalg.solve(a, info_opg)
    cov = np.linalg.solve(a, ainv_b.T).T / nobs
    return 0.5 * (cov + cov.T)


@dataclass(frozen=True)
class KernelMoments:
    """Residual moments of the logistic weight functions.

    m2 = E (k(eta) - 1)^2, mf = E eta^2 f(eta), ef = E f(eta),
    t2 = E (2 F(eta) - 1)^2, for k the even scale kernel.
    """

    m2: float
    mf: float
    ef: float
    t2: float

    @property
    def variance_ratio(self) -> float:
        """m2 / (1 + 2 mf)^2, the scalar in the pure-scale covariance."""
        return self.m2 / (1.0 + 2.0 * self.mf) ** 2


def kernel_moments(eta) -> KernelMoments:
    x = np.asarray(eta, dtype=float).ravel()
    t = np.tanh(0.5 * x)
    fx = 0.25 * (1.0 - t * t)
    u = x * t
    return KernelMoments(
        m2=float(np.mean((u - 1.0) ** 2)),
        mf=float(np.mean(x * x * fx)),
        ef=float(np.mean(fx)),
        t2=float(np.mean(t * t)),
    )


def _scale_only_pieces(model: ModelSpec, y, theta):
    if not model.scale_only:
        raise NotScaleOnly(f"model {model.name!r} has a conditional mean part")
    yv = model._check_series(y)
    out = model.filter(yv, theta, order=1)
    w = out.dsigma2 / out.sigma2[:, None]
    omega = w.T @ w / yv.size
    eta = (yv - out.mean) / out.sigma
    return omega, kernel_moments(eta), yv.size


def scale_only_information(model: ModelSpec, y, theta) -> tuple[np.ndarray, np.ndarray]:
    """Product-form information pair for pure-scale models.

    Factorizes each matrix into a residual moment times the Gram matrix
    Omega of dsigma2 / sigma^2: A = (1 + 2 mf) Omega / 4 and
    B = m2 Omega / 4.  Unlike the per-observation sums, this pair turns
    sandwich_cov into exactly 4 tau Omega^{-1} / n (see scale_only_cov);
    the two routes differ only by the sample covariance between the
    residual weights and the Gram terms, which vanishes in the limit.
    """
    omega, mom, _ = _scale_only_pieces(model, y, theta)
    a_hat = (1.0 + 2.0 * mom.mf) * omega / 4.0
    b_hat = mom.m2 * omega / 4.0
    return a_hat, b_hat


def scale_only_cov(model: ModelSpec, y, theta, nobs: int | None = None) -> np.ndarray:
    """Covariance for pure-scale models: 4 tau Omega^{-1} / n.

    Omega is the average outer product of dsigma2 / sigma^2 at theta
    and tau the residual-moment ratio m2 / (1 + 2 mf)^2.
    """
    omega, mom, nraw = _scale_only_pieces(model, y, theta)
    n = nobs or nraw
    vals = np.linalg.eigvalsh(omega)
    if vals[0] <= abs(vals[-1]) * 1e-12:
        raise SingularInformation(
            f"scale information is numerically singular "
            f"(eigenvalues {vals[0]:.3e} .. {vals[-1]:.3e})"
        )
    return 4.0 * mom.variance_ratio * np.linalg.inv(omega) / n
