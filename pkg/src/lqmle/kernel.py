"""Logistic criterion primitives and the innovation scale normalization.

The estimator standardizes innovations so that E[eta * (2 F(eta) - 1)] = 1,
where F is the standard logistic distribution function.  This module
provides the logistic density pieces in overflow-safe form, the even
kernel x (2 F(x) - 1) whose unit expectation pins down the scale, the
expectation functional itself, and root finders that locate the scale
multiplier (or stable tail index) at which the expectation equals one.
"""

from __future__ import annotations

import numpy as np
from scipy.integrate import quad

from .distributions import InnovationDist, sample_symmetric_stable
from .errors import BracketFailure, NonIntegrableError, QuadratureFailure

__all__ = [
    "logistic_pdf",
    "logistic_cdf",
    "logistic_logpdf",
    "scale_kernel",
    "kernel_expectation",
    "stable_kernel_expectation",
    "calibrate_scale",
    "calibrate_stable_index",
    "STABLE_MC_DRAWS",
    "STABLE_MC_SEED",
]

# Monte Carlo settings for the stable family, fixed so results reproduce.
STABLE_MC_DRAWS = 10_000_000
STABLE_MC_SEED = 20240817
_CHUNK = 1_000_000


def logistic_cdf(x):
    """Standard logistic distribution function 1 / (1 + exp(-x)).

    Evaluated through exp(-|x|) so neither tail overflows.
    """
    x = np.asarray(x, dtype=float)
    q = np.exp(-np.abs(x))
    out = np.where(x >= 0.0, 1.0 / (1.0 + q), q / (1.0 + q))
    return out if out.ndim else float(out)


def logistic_pdf(x):
    """Standard logistic density exp(-x) / (1 + exp(-x))^2; even in x."""
    x = np.asarray(x, dtype=float)
    q = np.exp(-np.abs(x))
    out = q / (1.0 + q) ** 2
    return out if out.ndim else float(out)


def logistic_logpdf(x):
    """log of the logistic density, -|x| - 2 log(1 + exp(-|x|)).

    Uses the symmetry of the density so the result stays finite for any
    finite x instead of overflowing past |x| ~ 745.
    """
    x = np.asarray(x, dtype=float)
    a = np.abs(x)
    out = -a - 2.0 * np.log1p(np.exp(-a))
    return out if out.ndim else float(out)


def scale_kernel(x):
    """Even kernel x * (2 F(x) - 1) = x * tanh(x / 2).

    Nonnegative, increasing in |x|, and asymptotically |x|; the
    innovation law is normalized so this kernel has unit expectation.
    """
    x = np.asarray(x, dtype=float)
    out = x * np.tanh(0.5 * x)
    return out if out.ndim else float(out)


def _expectation_by_quadrature(dist: InnovationDist, tol: float) -> float:
    # E[k(cX)] = c E|X| - 4c * int_0^U x F(-cx) p(x) dx, using
    # k(y) = |y| - 2|y| (1 - F(|y|)) and symmetry of p.  The correction
    # integrand decays like exp(-cx) so a finite upper limit suffices.
    c = dist.scale
    upper = min(dist.base_support_end(), 800.0 / c)
    eps = max(tol / 10.0, 1e-13)

    def integrand(x):
        return x * logistic_cdf(-c * x) * dist.base_pdf(x)

    val, abserr = quad(integrand, 0.0, upper, epsabs=eps, epsrel=1e-11, limit=400)
    if abserr > max(20.0 * eps, 1e-9 * max(1.0, abs(val))):
        raise QuadratureFailure(
            f"scale functional quadrature error {abserr:.2e} exceeds tolerance"
        )
    return c * dist.base_mean_abs() - 4.0 * c * val


def stable_kernel_expectation(
    index: float,
    scale: float = 1.0,
    draws: int = STABLE_MC_DRAWS,
    seed: int = STABLE_MC_SEED,
) -> tuple[float, float]:
    """Monte Carlo E[k(scale * X)] for X symmetric stable with the given index.

    Returns (estimate, standard error).  The default seed is a package
    constant so repeated calls reproduce; reusing one seed across
    indices gives common random numbers, which keeps the expectation
    monotone in the index along a bisection path.
    """
    if not 1.0 < index <= 2.0:
        raise NonIntegrableError(
            "stable index must lie in (1, 2] so that E|X| is finite"
        )
    rng = np.random.Generator(np.random.Philox(seed))
    total = 0.0
    total_sq = 0.0
    done = 0
    while done < draws:
        k = min(_CHUNK, draws - done)
        vals = scale_kernel(scale * sample_symmetric_stable(rng, index, k))
        total += float(vals.sum())
        total_sq += float((vals * vals).sum())
        done += k
    mean = total / draws
    var = max(total_sq / draws - mean * mean, 0.0)
    return mean, float(np.sqrt(var / draws))


def kernel_expectation(dist: InnovationDist, tol: float = 1e-10) -> float:
    """E[k(X)] for the scaled law, k the even kernel x (2 F(x) - 1).

    Closed-form-density families go through adaptive quadrature with a
    tail correction; the stable family uses a seeded Monte Carlo sum;
    an empirical law averages the kernel over its sample values.
    """
    if dist.family == "empirical":
        vals = scale_kernel(dist.scale * np.asarray(dist.data, dtype=float))
        return float(np.mean(vals))
    if dist.family == "stable":
        value, _ = stable_kernel_expectation(dist.shape, dist.scale)
        return value
    return _expectation_by_quadrature(dist, tol)


def _bisect_scale(objective, lo: float, hi: float, tol: float) -> float:
    f_lo, f_hi = objective(lo), objective(hi)
    grow = 0
    while f_lo > 0.0 and lo > 1e-8:
        lo /= 4.0
        f_lo = objective(lo)
        grow += 1
        if grow > 30:
            break
    grow = 0
    while f_hi < 0.0 and hi < 1e8:
        hi *= 4.0
        f_hi = objective(hi)
        grow += 1
        if grow > 30:
            break
    if not (f_lo <= 0.0 <= f_hi):
        raise BracketFailure(
            f"could not bracket the unit expectation: f({lo})={f_lo:.3g}, f({hi})={f_hi:.3g}"
        )
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if objective(mid) < 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= tol:
            break
    return 0.5 * (lo + hi)


def calibrate_scale(
    family: str,
    shape: float | None = None,
    tol: float = 1e-6,
) -> float:
    """Scale multiplier c at which E[k(c X)] = 1 for the given base family.

    The expectation is strictly increasing in c (the kernel increases in
    |x|), so bisection over an expanding bracket converges; ``tol`` is
    the absolute tolerance on the returned multiplier.

    Reference points: logistic -> 1 exactly; normal -> about 1.75;
    uniform half-width -> about 2.85; t3 -> about 1.25; t2 -> about 0.96.
    """
    if family == "stable":
        raise ValueError("use calibrate_stable_index for the stable family")

    def objective(c: float) -> float:
        return kernel_expectation(InnovationDist(family, scale=c, shape=shape)) - 1.0

    return _bisect_scale(objective, 0.25, 4.0, tol)


def calibrate_stable_index(
    tol: float = 2e-3,
    draws: int = STABLE_MC_DRAWS,
    seed: int = STABLE_MC_SEED,
) -> float:
    """Tail index in (1, 2] at which E[k(X)] = 1 for the unit-scale stable law.

    The expectation decreases in the index: heavier tails (smaller
    index) inflate E|X|, and at index 2 the law is N(0, 2) whose
    expectation sits below one.  Common random numbers across bisection
    iterates keep the sampled objective monotone.  ``tol`` is the
    absolute tolerance on the returned index; the reference value is
    about 1.69.
    """
    lo, hi = 1.05, 2.0
    f_lo = stable_kernel_expectation(lo, 1.0, draws, seed)[0] - 1.0
    f_hi = stable_kernel_expectation(hi, 1.0, draws, seed)[0] - 1.0
    if not (f_lo > 0.0 > f_hi):
        raise BracketFailure(
            f"unit expectation not bracketed on [{lo}, {hi}]: {f_lo:.3g}, {f_hi:.3g}"
        )
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if stable_kernel_expectation(mid, 1.0, draws, seed)[0] - 1.0 > 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
