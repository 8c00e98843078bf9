"""Hypothesis tests built on the sandwich information pair.

Wald and score (Lagrange multiplier) statistics for linear restrictions
R theta = r are asymptotically chi-squared with q = rank(R) degrees of
freedom under the null regardless of the innovation law, because both
are studentized by the A^{-1} B A^{-1} sandwich.  The likelihood-ratio
difference is exposed only as a descriptive quantity: its null law is
not pivotal here, so it gets no p-value.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import QuadratureFailure, RankDeficientConstraint, SingularInformation
from .estimation import ConstrainedFit, FitResult, sandwich_cov

__all__ = [
    "TestResult",
    "chisq_sf",
    "normal_sf",
    "wald_test",
    "lm_test",
    "t_test",
    "deviance",
]


@dataclass(frozen=True)
class TestResult:
    method: str
    statistic: float
    df: int | None
    p_value: float
    # (R rows, r) for restriction tests, None for coefficient t tests
    constraint: tuple[tuple[tuple[float, ...], ...], tuple[float, ...]] | None = None

    def as_dict(self) -> dict:
        out = {
            "method": self.method,
            "statistic": self.statistic,
            "df": self.df,
            "p_value": self.p_value,
        }
        if self.constraint is not None:
            out["constraint"] = {
                "R": [list(row) for row in self.constraint[0]],
                "r": list(self.constraint[1]),
            }
        return out


# -- tail probabilities -------------------------------------------------
#
# The chi-squared survival function is the regularized upper incomplete
# gamma Q(df/2, x/2), evaluated by its power series on one side of the
# transition point and by a Lentz continued fraction on the other.

_ITMAX = 600
_EPS = 1e-15
_TINY = 1e-300


def _lower_series(a: float, x: float) -> float:
    ap = a
    total = 1.0 / a
    delta = total
    for _ in range(_ITMAX):
        ap += 1.0
        delta *= x / ap
        total += delta
        if abs(delta) < abs(total) * _EPS:
            return total * math.exp(-x + a * math.log(x) - math.lgamma(a))
    raise QuadratureFailure("incomplete gamma series did not converge")


def _upper_cf(a: float, x: float) -> float:
    b = x + 1.0 - a
    c = 1.0 / _TINY
    d = 1.0 / b
    h = d
    for i in range(1, _ITMAX + 1):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < _TINY:
            d = _TINY
        c = b + an / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        step = d * c
        h *= step
        if abs(step - 1.0) < _EPS:
            return h * math.exp(-x + a * math.log(x) - math.lgamma(a))
    raise QuadratureFailure("incomplete gamma continued fraction did not converge")


def chisq_sf(x: float, df: float) -> float:
    """P(X > x) for X chi-squared with df degrees of freedom."""
    if df <= 0.0:
        raise ValueError("degrees of freedom must be positive")
    if not math.isfinite(x):
        return 0.0 if x > 0 else 1.0
    if x <= 0.0:
        return 1.0
    a, half = 0.5 * df, 0.5 * x
    if half < a + 1.0:
        return min(max(1.0 - _lower_series(a, half), 0.0), 1.0)
    return min(max(_upper_cf(a, half), 0.0), 1.0)


def normal_sf(z: float) -> float:
    """Standard normal upper tail probability."""
    return 0.5 * math.erfc(z / math.sqrt(2.0))


# -- restriction handling ------------------------------------------------


def _check_restriction(R, r, dim: int) -> tuple[np.ndarray, np.ndarray]:
    R = np.atleast_2d(np.asarray(R, dtype=float))
    r = np.atleast_1d(np.asarray(r, dtype=float))
    q, d = R.shape
    if d != dim or r.shape != (q,):
        raise RankDeficientConstraint(
            f"restriction shapes {R.shape}, {r.shape} do not match dim {dim}"
        )
    if np.linalg.matrix_rank(R) < q:
        raise RankDeficientConstraint("restriction matrix is not full row rank")
    return R, r


def _solve_quadform(mat: np.ndarray, vec: np.ndarray, what: str) -> float:
    mat = 0.5 * (mat + mat.T)
    vals = np.linalg.eigvalsh(mat)
    if vals[0] <= abs(vals[-1]) * 1e-12:
        raise SingularInformation(
            f"{what} is numerically singular (eigenvalues {vals[0]:.3e} .. {vals[-1]:.3e})"
        )
    return float(vec @ np.linalg.solve(mat, vec))


def _freeze_constraint(R: np.ndarray, r: np.ndarray):
    return (
        tuple(tuple(float(v) for v in row) for row in np.atleast_2d(R)),
        tuple(float(v) for v in np.atleast_1d(r)),
    )


def wald_test(fit: FitResult, R, r) -> TestResult:
    """Wald statistic n (R theta - r)' [R A^-1 B A^-1 R']^-1 (R theta - r)."""
    R, r = _check_restriction(R, r, fit.theta.dim)
    cov = fit.cov
    if cov is None:
        cov = sandwich_cov(fit.info_hessian, fit.info_opg, fit.nobs)
    diff = R @ fit.theta.array - r
    stat = _solve_quadform(R @ cov @ R.T, diff, "restricted covariance")
    q = R.shape[0]
    return TestResult("wald", stat, q, chisq_sf(stat, q), _freeze_constraint(R, r))


def lm_test(cfit: ConstrainedFit, R, r=None) -> TestResult:
    """Score test from the constrained fit's multiplier estimate.

    With Lambda = (R A^-1 R')^-1 R A^-1 B A^-1 R' (R A^-1 R')^-1 the
    statistic is n lambda' Lambda^-1 lambda, which equals
    n (G lambda)' M^-1 (G lambda) for G = R A^-1 R' and
    M = R A^-1 B A^-1 R'.  ``r`` is only recorded in the result; the
    statistic itself depends on the constrained fit and R alone.
    """
    rvec = np.zeros(np.atleast_2d(R).shape[0]) if r is None else r
    R, rvec = _check_restriction(R, rvec, cfit.theta.dim)
    a = 0.5 * (cfit.info_hessian + cfit.info_hessian.T)
    vals = np.linalg.eigvalsh(a)
    if vals[0] <= abs(vals[-1]) * 1e-12:
        raise SingularInformation(
            f"information matrix is numerically singular "
            f"(eigenvalues {vals[0]:.3e} .. {vals[-1]:.3e})"
        )
    ainv_rt = np.linalg.solve(a, R.T)
    gram = R @ ainv_rt
    mid = ainv_rt.T @ cfit.info_opg @ ainv_rt
    u = gram @ cfit.multiplier
    stat = cfit.nobs * _solve_quadform(mid, u, "restricted information")
    q = R.shape[0]
    return TestResult("lm", stat, q, chisq_sf(stat, q), _freeze_constraint(R, rvec))


def t_test(fit: FitResult, coef: int | str, null_value: float = 0.0) -> TestResult:
    """Two-sided studentized test for one coefficient against ``null_value``."""
    if isinstance(coef, str):
        try:
            j = fit.theta.names.index(coef)
        except ValueError:
            raise ValueError(f"unknown coefficient {coef!r}; have {fit.theta.names}") from None
    else:
        j = int(coef)
        if not 0 <= j < fit.theta.dim:
            raise ValueError(f"coefficient index {j} out of range")
    if fit.se is None:
        raise SingularInformation("fit carries no standard errors")
    se = fit.se[j]
    if not se > 0.0:
        raise SingularInformation(f"zero standard error for coefficient {j}")
    stat = (fit.theta.values[j] - null_value) / se
    return TestResult("t", float(stat), None, 2.0 * normal_sf(abs(stat)))


def deviance(fit: FitResult, cfit: ConstrainedFit) -> float:
    """Descriptive likelihood-ratio difference 2 (L_unconstrained - L_constrained).

    Reported without a p-value: under heavy-tailed innovations the
    sandwich pieces differ, so this difference is not chi-squared.
    """
    return 2.0 * (fit.loglik - cfit.loglik)
