"""Double-autoregressive model: linear AR mean, ARCH-in-levels scale."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .base import FilterOutput, ModelSpec, _floor_sigma2, lagged

__all__ = ["Dar"]


@dataclass(frozen=True)
class Dar(ModelSpec):
    """DAR(p, q):

        g_t      = const + sum_i ar_i y_{t-i}
        sigma2_t = alpha0 + sum_j alpha_j y_{t-j}^2

    with zero pre-sample values.  Both derivative blocks are linear in
    the data, so second derivatives vanish identically.  q = 0 (constant
    scale) and p = 0 (constant mean) are allowed as degenerate orders.
    """

    p: int = 1
    q: int = 1

    def __post_init__(self) -> None:
        if self.p < 0 or self.q < 0:
            raise ValueError("orders must be nonnegative")

    name = "dar"

    @property
    def param_names(self) -> tuple[str, ...]:
        return (
            ("const",)
            + tuple(f"ar{i}" for i in range(1, self.p + 1))
            + ("alpha0",)
            + tuple(f"alpha{j}" for j in range(1, self.q + 1))
        )

    def default_bounds(self) -> tuple[np.ndarray, np.ndarray]:
        lo = np.r_[-10.0, np.full(self.p, -5.0), 1e-6, np.zeros(self.q)]
        hi = np.r_[10.0, np.full(self.p, 5.0), 100.0, np.full(self.q, 50.0)]
        return lo, hi

    def _template_values(self) -> np.ndarray:
        return np.r_[0.0, np.zeros(self.p), 1.0, np.full(self.q, 0.1)]

    def _split(self, th: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        return th[: self.p + 1], th[self.p + 1 :]

    def filter(self, y, theta, order: int = 0) -> FilterOutput:
        th = self._check_theta(theta)
        y = self._check_series(y)
        n, d = y.size, self.dim
        mean_part, scale_part = self._split(th)

        ylags = np.column_stack([lagged(y, i) for i in range(1, self.p + 1)]) if self.p else np.zeros((n, 0))
        y2lags = np.column_stack([lagged(y * y, j) for j in range(1, self.q + 1)]) if self.q else np.zeros((n, 0))

        mean = np.full(n, mean_part[0])
        if self.p:
            mean += ylags @ mean_part[1:]
        sigma2_raw = np.full(n, scale_part[0])
        if self.q:
            sigma2_raw += y2lags @ scale_part[1:]
        sigma2, sigma, clamped = _floor_sigma2(sigma2_raw)

        out = FilterOutput(mean=mean, sigma2=sigma2, sigma=sigma, clamped=clamped)
        if order >= 1:
            dmean = np.zeros((n, d))
            dmean[:, 0] = 1.0
            if self.p:
                dmean[:, 1 : self.p + 1] = ylags
            dsigma2 = np.zeros((n, d))
            dsigma2[:, self.p + 1] = 1.0
            if self.q:
                dsigma2[:, self.p + 2 :] = y2lags
            out.dmean, out.dsigma2 = dmean, dsigma2
        if order >= 2:
            out.d2mean = np.zeros((n, d, d))
            out.d2sigma2 = np.zeros((n, d, d))
        return out

    def path(self, theta, innovations) -> np.ndarray:
        th = self._check_theta(theta)
        eta = np.asarray(innovations, dtype=float).ravel()
        mean_part, scale_part = self._split(th)
        p, q = self.p, self.q
        n = eta.size
        y = np.zeros(n)
        for t in range(n):
            g = mean_part[0]
            for i in range(1, p + 1):
                if t - i >= 0:
                    g += mean_part[i] * y[t - i]
            s2 = scale_part[0]
            for j in range(1, q + 1):
                if t - j >= 0:
                    s2 += scale_part[j] * y[t - j] ** 2
            y[t] = g + np.sqrt(s2) * eta[t]
        return y

    def start_values(self, y) -> list[np.ndarray]:
        y = self._check_series(y)
        starts = [self._template_values()]
        n = y.size
        if n > self.p + self.q + 4:
            x = np.column_stack([np.ones(n)] + [lagged(y, i) for i in range(1, self.p + 1)])
            coef, *_ = np.linalg.lstsq(x, y, rcond=None)
            resid = y - x @ coef
            z = np.column_stack([np.ones(n)] + [lagged(y * y, j) for j in range(1, self.q + 1)])
            acoef, *_ = np.linalg.lstsq(z, resid * resid, rcond=None)
            acoef[0] = max(acoef[0], 1e-3)
            acoef[1:] = np.clip(acoef[1:], 0.0, None)
            lo, hi = self.default_bounds()
            starts.append(np.clip(np.r_[coef, acoef], lo, hi))
        return starts
