"""Lyapunov exponents for the first-order model recursions.

A negative top Lyapunov exponent of the random-coefficient recursion is
the strict-stationarity condition; it is estimated by Monte Carlo over
the innovation law except in degenerate cases with a closed form.
"""

from __future__ import annotations

import numpy as np

from ..distributions import InnovationDist
from ..params import as_array
from .arma_garch import ArmaGarch
from .base import ModelSpec
from .dar import Dar
from .garch import Garch

__all__ = ["lyapunov_exponent"]


def _mc_mean(values: np.ndarray) -> tuple[float, float]:
    if not np.all(np.isfinite(values)):
        raise ValueError("degenerate recursion: Lyapunov integrand is not finite")
    se = float(np.std(values, ddof=1) / np.sqrt(values.size)) if values.size > 1 else 0.0
    return float(np.mean(values)), se


def lyapunov_exponent(
    model: ModelSpec,
    theta,
    dist: InnovationDist,
    draws: int = 100_000,
    seed: int = 0,
) -> tuple[float, float]:
    """Estimate the recursion's top Lyapunov exponent and its MC standard error.

    Supported models: DAR(1,1) with E log |ar1 + eta sqrt(alpha1)|, and
    GARCH(1,1) or ARMA(1,1)-GARCH(1,1) with E log (beta1 + alpha1 eta^2)
    for the volatility recursion.  When the random coefficient vanishes
    the exact degenerate value is returned with zero standard error.
    """
    th = as_array(theta)
    if isinstance(model, Dar):
        if (model.p, model.q) != (1, 1):
            raise ValueError("Lyapunov exponent implemented only for first-order recursions")
        ar1, alpha1 = th[1], th[3]
        if alpha1 == 0.0:
            if ar1 == 0.0:
                raise ValueError("degenerate recursion: both coefficients are zero")
            return float(np.log(abs(ar1))), 0.0
        rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))
        eta = dist.sample(rng, draws)
        return _mc_mean(np.log(np.abs(ar1 + np.sqrt(alpha1) * eta)))

    if isinstance(model, (Garch, ArmaGarch)):
        if isinstance(model, Garch):
            if (model.p, model.q) != (1, 1):
                raise ValueError("Lyapunov exponent implemented only for first-order recursions")
            alpha1, beta1 = th[model.p], th[model.p + 1]
        else:
            m = model._nmean
            alpha1, beta1 = th[m + 1], th[m + 2]
        if alpha1 == 0.0:
            if beta1 == 0.0:
                raise ValueError("degenerate recursion: both coefficients are zero")
            return float(np.log(beta1)), 0.0
        rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))
        eta = dist.sample(rng, draws)
        return _mc_mean(np.log(beta1 + alpha1 * eta * eta))

    raise ValueError(f"no Lyapunov recursion defined for model {model.name!r}")
