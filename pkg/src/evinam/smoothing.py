"""Locally weighted scatterplot smoothing for presentation of shape curves.

Classic LOWESS: at every point, fit a weighted local line over the nearest
``fraction`` share of the data with tricube weights, then run a fixed number
of robustifying passes that downweight large residuals with the bisquare
kernel.  Smoothing is presentation-only; nothing in training or evaluation
depends on it.
"""

from __future__ import annotations

import numpy as np

from .exceptions import InvalidInputError


def lowess(x, y, fraction: float = 0.3, robust_iterations: int = 1) -> np.ndarray:
    """Smoothed y values at the input x positions.

    fraction: share of points in each local neighborhood, in (0, 1].
    robust_iterations: bisquare reweighting passes after the initial fit;
        0 gives plain (non-robust) local linear smoothing.
    """
    x = np.asarray(x, dtype=np.float64).ravel()
    y = np.asarray(y, dtype=np.float64).ravel()
    if x.size != y.size:
        raise InvalidInputError("x and y must have the same length")
    if x.size < 2:
        raise InvalidInputError("lowess needs at least two points")
    if not (0.0 < fraction <= 1.0):
        raise InvalidInputError(f"fraction must be in (0, 1], got {fraction}")
    if robust_iterations < 0:
        raise InvalidInputError("robust_iterations must be >= 0")
    n = x.size
    r = min(n, max(2, int(np.ceil(fraction * n))))

    # Tricube weights over each point's r nearest neighbors.
    distances = np.abs(x[:, None] - x[None, :])
    bandwidth = np.sort(distances, axis=1)[:, r - 1]
    bandwidth = np.where(bandwidth == 0.0, np.finfo(np.float64).tiny, bandwidth)
    w = np.clip(distances / bandwidth[:, None], 0.0, 1.0)
    w = (1.0 - w ** 3) ** 3

    delta = np.ones(n)
    smoothed = y.copy()
    for _ in range(int(robust_iterations) + 1):
        for i in range(n):
            weights = delta * w[i]
            sw = weights.sum()
            if sw <= 0.0:
                smoothed[i] = y[i]
                continue
            xc = x - x[i]
            swx = float(weights @ xc)
            swy = float(weights @ y)
            swxx = float(weights @ (xc * xc))
            swxy = float(weights @ (xc * y))
            denom = sw * swxx - swx * swx
            if abs(denom) < 1e-12 * max(sw * swxx, 1e-300):
                smoothed[i] = swy / sw
                continue
            slope = (sw * swxy - swx * swy) / denom
            intercept = (swy - slope * swx) / sw
            smoothed[i] = intercept
        residuals = y - smoothed
        scale = np.median(np.abs(residuals))
        if scale <= 0.0:
            delta = np.ones(n)
        else:
            delta = np.clip(residuals / (6.0 * scale), -1.0, 1.0)
            delta = (1.0 - delta * delta) ** 2
    return smoothed
