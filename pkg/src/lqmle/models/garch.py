"""GARCH model: zero conditional mean, recursive conditional variance."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.signal import lfilter

from ..errors import NonstationaryRegionWarning
from .base import FilterOutput, ModelSpec, _floor_sigma2, lagged

__all__ = ["Garch"]


@dataclass(frozen=True)
class Garch(ModelSpec):
    """GARCH(p, q):

        sigma2_t = alpha0 + sum_i alpha_i y_{t-i}^2 + sum_j beta_j sigma2_{t-j}

    started from zero pre-sample values (so sigma2_1 = alpha0).  The
    recursion and its parameter derivatives are linear constant-
    coefficient difference equations in the beta lags, evaluated with a
    direct-form IIR filter.  The conditional mean is identically zero.
    """

    p: int = 1
    q: int = 1

    def __post_init__(self) -> None:
        if self.p < 1 or self.q < 0:
            raise ValueError("need p >= 1 and q >= 0")

    name = "garch"
    scale_only = True

    @property
    def param_names(self) -> tuple[str, ...]:
        return (
            ("alpha0",)
            + tuple(f"alpha{i}" for i in range(1, self.p + 1))
            + tuple(f"beta{j}" for j in range(1, self.q + 1))
        )

    def default_bounds(self) -> tuple[np.ndarray, np.ndarray]:
        lo = np.r_[1e-6, np.zeros(self.p + self.q)]
        hi = np.r_[100.0, np.full(self.p + self.q, 0.9999)]
        return lo, hi

    def _template_values(self) -> np.ndarray:
        return np.r_[1.0, np.full(self.p, 0.1 / self.p), np.full(self.q, 0.3 / max(self.q, 1))]

    def _split(self, th: np.ndarray) -> tuple[float, np.ndarray, np.ndarray]:
        return th[0], th[1 : self.p + 1], th[self.p + 1 :]

    def _denominator(self, beta: np.ndarray) -> np.ndarray:
        if np.sum(beta) >= 1.0:
            warnings.warn(
                "beta coefficients sum to one or more; variance recursion diverges",
                NonstationaryRegionWarning,
                stacklevel=3,
            )
        return np.r_[1.0, -beta]

    def filter(self, y, theta, order: int = 0) -> FilterOutput:
        th = self._check_theta(theta)
        y = self._check_series(y)
        n, d = y.size, self.dim
        alpha0, alpha, beta = self._split(th)
        den = self._denominator(beta)

        y2lags = np.column_stack([lagged(y * y, i) for i in range(1, self.p + 1)])
        drive = alpha0 + y2lags @ alpha
        sigma2_raw = lfilter([1.0], den, drive)
        sigma2, sigma, clamped = _floor_sigma2(sigma2_raw)

        out = FilterOutput(mean=np.zeros(n), sigma2=sigma2, sigma=sigma, clamped=clamped)
        if order >= 1:
            v = np.zeros((n, d))
            v[:, 0] = 1.0
            v[:, 1 : self.p + 1] = y2lags
            for j in range(1, self.q + 1):
                v[:, self.p + j] = lagged(sigma2_raw, j)
            dsigma2 = lfilter([1.0], den, v, axis=0)
            out.dmean = np.zeros((n, d))
            out.dsigma2 = dsigma2
        if order >= 2:
            d2sigma2 = np.zeros((n, d, d))
            # Only pairs touching a beta lag feed the recursion.
            for j in range(1, self.q + 1):
                kj = self.p + j
                for l in range(d):
                    w = lagged(dsigma2[:, l], j)
                    if l == kj:
                        d2sigma2[:, kj, kj] += lfilter([1.0], den, 2.0 * w)
                    else:
                        block = lfilter([1.0], den, w)
                        d2sigma2[:, kj, l] += block
                        d2sigma2[:, l, kj] += block
            out.d2mean = np.zeros((n, d, d))
            out.d2sigma2 = d2sigma2
        return out

    def path(self, theta, innovations) -> np.ndarray:
        th = self._check_theta(theta)
        eta = np.asarray(innovations, dtype=float).ravel()
        alpha0, alpha, beta = self._split(th)
        p, q = self.p, self.q
        n = eta.size
        y = np.zeros(n)
        s2 = np.zeros(n)
        for t in range(n):
            v = alpha0
            for i in range(1, p + 1):
                if t - i >= 0:
                    v += alpha[i - 1] * y[t - i] ** 2
            for j in range(1, q + 1):
                if t - j >= 0:
                    v += beta[j - 1] * s2[t - j]
            s2[t] = v
            y[t] = np.sqrt(v) * eta[t]
        return y

    def start_values(self, y) -> list[np.ndarray]:
        y = self._check_series(y)
        starts = [self._template_values()]
        scale = float(np.median(y * y))
        if np.isfinite(scale) and scale > 0:
            starts.append(
                np.r_[0.6 * scale, np.full(self.p, 0.1 / self.p), np.full(self.q, 0.3 / max(self.q, 1))]
            )
        return starts
