"""ARMA(1,1) mean with GARCH(1,1) innovations."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.signal import lfilter

from ..errors import InvertibilityError
from .base import FilterOutput, ModelSpec, _floor_sigma2, lagged

__all__ = ["ArmaGarch"]


@dataclass(frozen=True)
class ArmaGarch(ModelSpec):
    """ARMA(1,1)-GARCH(1,1):

        y_t      = const + ar1 y_{t-1} + e_t + ma1 e_{t-1}
        sigma2_t = alpha0 + alpha1 e_{t-1}^2 + beta1 sigma2_{t-1}

    Residuals are reconstructed by inverting the MA part with zero
    initial conditions: e_t = y_t - const - ar1 y_{t-1} - ma1 e_{t-1},
    which requires |ma1| < 1.  The conditional mean is g_t = y_t - e_t.
    Derivatives of e_t and sigma2_t with respect to every parameter
    follow the same first-order recursions and are propagated with the
    corresponding IIR filters, including the cross terms that the
    squared-residual feedback induces between mean and scale blocks.

    With ``include_intercept=False`` the const term is dropped and the
    parameter vector has five entries.
    """

    include_intercept: bool = True

    name = "arma_garch"

    @property
    def param_names(self) -> tuple[str, ...]:
        mean = ("const", "ar1", "ma1") if self.include_intercept else ("ar1", "ma1")
        return mean + ("alpha0", "alpha1", "beta1")

    @property
    def _nmean(self) -> int:
        return 3 if self.include_intercept else 2

    def default_bounds(self) -> tuple[np.ndarray, np.ndarray]:
        lo_mean = [-10.0, -0.999, -0.999] if self.include_intercept else [-0.999, -0.999]
        hi_mean = [10.0, 0.999, 0.999] if self.include_intercept else [0.999, 0.999]
        lo = np.r_[lo_mean, 1e-6, 0.0, 0.0]
        hi = np.r_[hi_mean, 100.0, 0.9999, 0.9999]
        return lo, hi

    def _template_values(self) -> np.ndarray:
        mean = [0.0, 0.1, 0.1] if self.include_intercept else [0.1, 0.1]
        return np.r_[mean, 1.0, 0.1, 0.3]

    def _unpack(self, th: np.ndarray):
        m = self._nmean
        const = th[0] if self.include_intercept else 0.0
        ar1, ma1 = th[m - 2], th[m - 1]
        alpha0, alpha1, beta1 = th[m], th[m + 1], th[m + 2]
        return const, ar1, ma1, alpha0, alpha1, beta1

    def filter(self, y, theta, order: int = 0) -> FilterOutput:
        th = self._check_theta(theta)
        y = self._check_series(y)
        n, d, m = y.size, self.dim, self._nmean
        const, ar1, ma1, alpha0, alpha1, beta1 = self._unpack(th)
        if abs(ma1) >= 1.0:
            raise InvertibilityError(f"|ma1| = {abs(ma1)} is not invertible")
        ma_den = np.array([1.0, ma1])
        gj_den = np.array([1.0, -beta1])

        ylag = lagged(y, 1)
        e = lfilter([1.0], ma_den, y - const - ar1 * ylag)
        elag = lagged(e, 1)
        drive = alpha0 + alpha1 * elag * elag
        sigma2_raw = lfilter([1.0], gj_den, drive)
        sigma2, sigma, clamped = _floor_sigma2(sigma2_raw)

        out = FilterOutput(mean=y - e, sigma2=sigma2, sigma=sigma, clamped=clamped)
        if order == 0:
            return out

        # residual derivatives: e_t = u_t - ma1 e_{t-1}
        de = np.zeros((n, d))
        de_drives = np.empty((n, m))
        col = 0
        if self.include_intercept:
            de_drives[:, col] = -1.0
            col += 1
        de_drives[:, col] = -ylag
        de_drives[:, col + 1] = -elag
        de[:, :m] = lfilter([1.0], ma_den, de_drives, axis=0)
        delag = lagged(de, 1)

        # scale derivatives: direct part then beta feedback
        ds_drives = np.zeros((n, d))
        ds_drives[:, :m] = 2.0 * alpha1 * elag[:, None] * delag[:, :m]
        ds_drives[:, m] = 1.0
        ds_drives[:, m + 1] = elag * elag
        ds_drives[:, m + 2] = lagged(sigma2_raw, 1)
        dsigma2 = lfilter([1.0], gj_den, ds_drives, axis=0)
        out.dmean = -de
        out.dsigma2 = dsigma2
        if order == 1:
            return out

        # second derivatives of e: only pairs involving ma1 survive
        i_ma = m - 1
        d2e = np.zeros((n, d, d))
        d2e_drives = -delag[:, :m].copy()
        d2e_drives[:, i_ma] *= 2.0
        block = lfilter([1.0], ma_den, d2e_drives, axis=0)
        for k in range(m):
            d2e[:, i_ma, k] = block[:, k]
            if k != i_ma:
                d2e[:, k, i_ma] = block[:, k]

        i_a1, i_b1 = m + 1, m + 2
        pairs = [(k, l) for k in range(d) for l in range(k, d)]
        w = np.zeros((n, len(pairs)))
        d2elag = lagged(d2e, 1)
        for idx, (k, l) in enumerate(pairs):
            acc = 2.0 * alpha1 * (delag[:, k] * delag[:, l] + elag * d2elag[:, k, l])
            if k == i_a1:
                acc = acc + 2.0 * elag * delag[:, l]
            if l == i_a1:
                acc = acc + 2.0 * elag * delag[:, k]
            if k == i_b1:
                acc = acc + lagged(dsigma2[:, l], 1)
            if l == i_b1:
                acc = acc + lagged(dsigma2[:, k], 1)
            w[:, idx] = acc
        filtered = lfilter([1.0], gj_den, w, axis=0)
        d2sigma2 = np.zeros((n, d, d))
        for idx, (k, l) in enumerate(pairs):
            d2sigma2[:, k, l] = filtered[:, idx]
            if k != l:
                d2sigma2[:, l, k] = filtered[:, idx]

        out.d2mean = -d2e
        out.d2sigma2 = d2sigma2
        return out

    def path(self, theta, innovations) -> np.ndarray:
        th = self._check_theta(theta)
        eta = np.asarray(innovations, dtype=float).ravel()
        const, ar1, ma1, alpha0, alpha1, beta1 = self._unpack(th)
        n = eta.size
        y = np.zeros(n)
        e_prev = 0.0
        s2_prev = 0.0
        y_prev = 0.0
        for t in range(n):
            s2 = alpha0 + alpha1 * e_prev * e_prev + beta1 * s2_prev
            e = np.sqrt(s2) * eta[t]
            y[t] = const + ar1 * y_prev + e + ma1 * e_prev
            y_prev, e_prev, s2_prev = y[t], e, s2
        return y

    def start_values(self, y) -> list[np.ndarray]:
        y = self._check_series(y)
        starts = [self._template_values()]
        n = y.size
        if n > 8:
            cols = [np.ones(n), lagged(y, 1)] if self.include_intercept else [lagged(y, 1)]
            x = np.column_stack(cols)
            coef, *_ = np.linalg.lstsq(x, y, rcond=None)
            resid = y - x @ coef
            s = max(float(np.median(resid * resid)), 1e-3)
            lo, hi = self.default_bounds()
            starts.append(np.clip(np.r_[coef, 0.0, 0.6 * s, 0.1, 0.3], lo, hi))
        return starts
