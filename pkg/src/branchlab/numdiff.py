"""Centered finite differences, step sweeps and convergence-order estimation.

Shared by the kernel identity checks (numerical Laplacians of closed-form
kernels) and by the extraction diagnostics (observed orders from resolution
ladders).  Every routine reports both the raw residual and the extrapolated
order so that truncation error can be told apart from formula error.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def fd_laplacian_3d(f, x1: float, x2: float, t: float, step: float) -> complex:
    """7-point centered Laplacian of f(x1, x2, t) in R^3."""
    c = f(x1, x2, t)
    return (
        f(x1 + step, x2, t) + f(x1 - step, x2, t)
        + f(x1, x2 + step, t) + f(x1, x2 - step, t)
        + f(x1, x2, t + step) + f(x1, x2, t - step)
        - 6.0 * c
    ) / step**2


def fd_d1(f, x: float, step: float):
    return (f(x + step) - f(x - step)) / (2.0 * step)


def fd_d2(f, x: float, step: float):
    return (f(x + step) - 2.0 * f(x) + f(x - step)) / step**2


def richardson(values, steps, order: int = 2):
    """Extrapolate a step-sweep of a quantity with error ~ C*step^order.

    values[k] was computed at steps[k]; consecutive pairs are combined with
    the standard two-term rule.  Returns (extrapolated, per-pair values).
    """
    values = [np.asarray(v) for v in values]
    steps = np.asarray(steps, dtype=float)
    if len(values) < 2:
        raise ValueError("richardson needs at least two step values")
    pairs = []
    for k in range(len(values) - 1):
        r = (steps[k] / steps[k + 1]) ** order
        pairs.append((r * values[k + 1] - values[k]) / (r - 1.0))
    return pairs[-1], pairs


def observed_order(values, steps) -> float:
    """Observed convergence order from three values on a step ladder.

    Uses log2(|v1 - v2| / |v2 - v3|) / log2(s1/s2) with a geometric ladder;
    the limit does not need to be known.
    """
    if len(values) < 3:
        raise ValueError("need three values for an observed order")
    v1, v2, v3 = (np.asarray(v, dtype=complex) for v in values[-3:])
    s1, s2, s3 = steps[-3:]
    d12 = np.max(np.abs(v1 - v2))
    d23 = np.max(np.abs(v2 - v3))
    if d23 == 0.0:
        return np.inf
    return float(np.log(d12 / d23) / np.log(s1 / s2))


@dataclass
class SlopeFit:
    slope: float
    intercept: float
    stderr: float
    monotone: bool
    roundoff_floor: bool

    @property
    def exact(self) -> bool:
        return self.roundoff_floor


def loglog_slope(xs, errs, floor: float = 1e-13) -> SlopeFit:
    """Least-squares slope of log(err) vs log(x) with a plain stderr bar.

    Non-monotone error sequences are flagged rather than silently fitted;
    sequences at the roundoff floor are reported as exact.
    """
    xs = np.asarray(xs, dtype=float)
    errs = np.asarray(errs, dtype=float)
    scale = np.max(errs) if errs.size else 0.0
    if scale <= floor:
        return SlopeFit(np.nan, np.nan, np.nan, True, True)
    diffs = np.diff(errs[np.argsort(xs)])
    monotone = bool(np.all(diffs >= 0) or np.all(diffs <= 0))
    lx, le = np.log(xs), np.log(errs)
    n = len(xs)
    A = np.vstack([lx, np.ones(n)]).T
    coef, res, *_ = np.linalg.lstsq(A, le, rcond=None)
    slope, intercept = coef
    if n > 2 and res.size:
        sigma2 = res[0] / (n - 2)
        cov = sigma2 * np.linalg.inv(A.T @ A)
        stderr = float(np.sqrt(cov[0, 0]))
    else:
        stderr = 0.0
    return SlopeFit(float(slope), float(intercept), stderr, monotone, False)


def step_sweep_residual(residual_fn, steps=(1e-2, 5e-3, 2.5e-3)):
    """Evaluate a step-dependent residual on a sweep and fit its order.

    Returns (residuals, SlopeFit).  residual_fn(step) -> scalar magnitude.
    """
    steps = list(steps)
    res = np.array([abs(residual_fn(s)) for s in steps], dtype=float)
    return res, loglog_slope(steps, res)
