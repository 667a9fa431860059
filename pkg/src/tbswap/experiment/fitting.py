"""Weighted sinusoid fit for two-photon fringes."""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np


class FitError(ValueError):
    pass


class FitResult(NamedTuple):
    V: float
    sigma_V: float
    amplitude: float
    phase_offset: float


def fringe_model(beta, a: float, V: float, phase_offset: float, alpha: float = 0.0):
    return a * (1.0 + V * np.cos(alpha - np.asarray(beta) + phase_offset))


def fit_visibility(betas, counts, alpha: float = 0.0, variances=None) -> FitResult:
    """Fit C(beta) = a (1 + V cos(alpha - beta + phi0)).

    The model is linear in (a, aV cos phi0, aV sin phi0), so this is an exact
    weighted linear least-squares problem. Weights are 1/variance with
    variance = counts (floored at 1) unless ``variances`` is given. The sign
    of V is absorbed into phi0, and sigma_V comes from the parameter
    covariance.
    """
    x = np.asarray(betas, dtype=float)
    y = np.asarray(counts, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise FitError("betas and counts must be 1-d and of equal length")
    if len(x) < 5:
        raise FitError(f"need at least 5 scan points, got {len(x)}")
    distinct = np.unique(np.round(np.mod(x, 2 * math.pi), 12))
    if len(distinct) < 3:
        raise FitError("degenerate scan: fewer than 3 distinct phases")
    if variances is None:
        var = np.maximum(y, 1.0)
    else:
        # weighted counts: empty points get the smallest non-zero variance
        var = np.asarray(variances, dtype=float)
        positive = var[var > 0]
        var = np.where(var > 0, var, positive.min() if positive.size else 1.0)
    w = 1.0 / var
    u = alpha - x
    X = np.column_stack([np.ones_like(u), np.cos(u), np.sin(u)])
    sw = np.sqrt(w)
    coef, *_ = np.linalg.lstsq(X * sw[:, None], y * sw, rcond=None)
    cov = np.linalg.pinv((X * w[:, None]).T @ X)

    p0, p1, p2 = coef
    if p0 == 0.0:
        raise FitError("fitted mean rate is zero")
    r = math.hypot(p1, p2)
    V = r / p0
    phi0 = math.atan2(-p2, p1) if r > 0 else 0.0
    if r > 0:
        grad = np.array([-r / p0**2, p1 / (r * p0), p2 / (r * p0)])
        var_V = float(grad @ cov @ grad)
    else:
        var_V = float(cov[1, 1] + cov[2, 2]) / (2.0 * p0**2)
    return FitResult(float(V), math.sqrt(max(var_V, 0.0)), float(p0), float(phi0))
