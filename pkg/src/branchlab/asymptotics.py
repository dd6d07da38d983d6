"""Branch-point coefficient extraction by annulus least squares.

Near a branch point p the section in the local slit gauge is

    u = center + Re(A * sq + B * sq^3) + O(r^(5/2)),

with sq the anchored square root of (z - p) and center the fixed point of
the local reflection (c/2 for the affine harmonic section, 0 for vector
sections).  Samples are transported to the point's slit gauge (composing
the cut transitions along the radial segment), re-gauged to the stored
frame anchor, and fitted against {Re sq, Im sq, Re sq^3, Im sq^3}.

The mean-curvature cross term of the second-order expansion is carried in
the basis through the optional mu argument; it vanishes identically for
point branch sets and is off by default.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .domain import ProblemConfig, _polyline_segments, _seg_intersections
from .numdiff import loglog_slope, observed_order
from .solver import TwistedField


class FitError(RuntimeError):
    pass


@dataclass
class ABCoefficients:
    """Leading (A) and subleading (B) coefficients in the stored frame."""

    A: complex
    B: complex
    residual: float          # RMS misfit of the returned coefficients
    annulus: tuple
    err_A: float             # max(LS covariance, annulus-variation spread)
    err_B: float
    n_samples: int
    cond: float


def default_annulus(config: ProblemConfig, point_index: int) -> tuple[float, float]:
    """(r1, r2) = (max(10h, r_c), 2 r1), capped at the straight-cut reach
    and at half the distance to the nearest other branch point."""
    g = config.grid_spec
    r1 = max(10.0 * g.h, g.r_c)
    cap = _annulus_cap(config, point_index)
    r2 = min(2.0 * r1, cap)
    if r2 < 1.25 * r1:
        raise FitError(
            f"no usable annulus at point {point_index}: r1={r1:.4g}, cap={cap:.4g}")
    return r1, r2


def _annulus_cap(config: ProblemConfig, point_index: int) -> float:
    cv = config.cuts[config.point_cut[point_index]]
    p = config.points[point_index]
    if abs(cv[0] - p) < 1e-12:
        first = abs(cv[1] - cv[0])
    else:
        first = abs(cv[-2] - cv[-1])
    return min(0.95 * first, 0.45 * config.min_separation())


def local_samples(field: TwistedField, point_index: int, r1: float, r2: float):
    """Annulus samples transported to the point's slit gauge.

    Returns (dz, w): displacements and V-section values (center subtracted,
    re-gauged to the frame anchor).  Radial transport composes the
    reflection transitions over every cut crossed by the segment from the
    branch point to the sample; the point's own straight first segment is
    radial and never crossed.
    """
    config = field.config
    if r2 > _annulus_cap(config, point_index) * (1.0 + 1e-9):
        raise FitError(f"annulus r2={r2:.4g} exceeds the straight-cut reach "
                       f"{_annulus_cap(config, point_index):.4g} at point {point_index}")
    p = config.points[point_index]
    dz, u = field.annulus(point_index, r1, r2)
    if dz.size == 0:
        return dz, u
    c = field.translations
    a_pts = np.full(dz.shape, p, dtype=complex)
    b_pts = p + dz
    crossings = [[] for _ in range(dz.size)]
    drop = np.zeros(dz.size, dtype=bool)
    for k, cv in enumerate(config.cuts):
        for (ca, cb) in _polyline_segments(cv):
            for shift in config.grid.lattice_shifts():
                idx, s, touch = _seg_intersections(a_pts, b_pts, ca + shift, cb + shift)
                drop[touch] = True
                for ii, sv in zip(idx, s):
                    crossings[ii].append((float(sv), k))
    v = u.copy()
    for ii, lst in enumerate(crossings):
        if not lst:
            continue
        lst.sort(reverse=True)  # nearest the sample first
        val = v[ii]
        for (_, k) in lst:
            val = -val + c[k]
        v[ii] = val
    center = field.center(point_index)
    flip = config.local_regauge(point_index, dz)
    w = flip * (v - center)
    keep = ~drop
    return dz[keep], w[keep]


def _design_matrix(config, point_index, dz, mu=0j):
    sq = config.branch_sqrt(point_index, dz)
    mfac = 1.0 - 0.5 * np.real(np.conj(mu) * dz) if mu != 0 else np.ones(dz.size)
    cols = [np.real(sq) * mfac, -np.imag(sq) * mfac,
            np.real(sq**3), -np.imag(sq**3)]
    return np.stack(cols, axis=1)


def _solve_ls(X, w):
    norms = np.linalg.norm(X, axis=0)
    norms[norms == 0] = 1.0
    Xs = X / norms
    coef, res, rank, sv = np.linalg.lstsq(Xs, w, rcond=None)
    cond = sv[0] / sv[-1] if sv[-1] > 0 else np.inf
    coef = coef / norms
    resid_vec = w - X @ coef
    dof = max(len(w) - X.shape[1], 1)
    sigma2 = float(resid_vec @ resid_vec) / dof
    cov = sigma2 * np.linalg.inv((Xs.T @ Xs)) / np.outer(norms, norms)
    rms = float(np.sqrt(np.mean(resid_vec**2)))
    return coef, rms, cond, np.sqrt(np.abs(np.diag(cov)))


def _fit_core(field, point_index, annulus, mu=0j, subtract_sigma=0j,
              min_samples=200):
    config = field.config
    r1, r2 = annulus
    dz, w = local_samples(field, point_index, r1, r2)
    if dz.size < min_samples:
        raise FitError(f"only {dz.size} samples in annulus {annulus} "
                       f"at point {point_index} (need {min_samples})")
    if subtract_sigma != 0:
        sq = config.branch_sqrt(point_index, dz)
        w = w - np.real(subtract_sigma / sq)
    X = _design_matrix(config, point_index, dz, mu)
    coef, rms, cond, errs = _solve_ls(X, w)
    if cond > 1e8:
        raise FitError(f"ill-conditioned annulus fit (cond={cond:.2e}); widen the annulus")
    A = coef[0] + 1j * coef[1]
    B = coef[2] + 1j * coef[3]
    eA = float(np.hypot(errs[0], errs[1]))
    eB = float(np.hypot(errs[2], errs[3]))
    return A, B, rms, cond, eA, eB, dz.size


def fit_AB(field: TwistedField, point_index: int, annulus=None, mu=0j,
           min_samples=200, spread_check: bool = True) -> ABCoefficients:
    """Fit the leading and subleading coefficients on an annulus.

    The returned error bars are the larger of the least-squares covariance
    and the spread against a 1.25x-shifted annulus (model error from the
    O(r^(5/2)) remainder is invisible to the covariance alone).
    """
    config = field.config
    if annulus is None:
        annulus = default_annulus(config, point_index)
    A, B, rms, cond, eA, eB, n = _fit_core(field, point_index, annulus, mu,
                                           min_samples=min_samples)
    if spread_check:
        r1, r2 = annulus
        cap = _annulus_cap(config, point_index)
        alt = (1.25 * r1, min(1.25 * r2, cap))
        if alt[1] > 1.25 * alt[0]:
            try:
                A2, B2, *_ = _fit_core(field, point_index, alt, mu,
                                       min_samples=min_samples // 2)
                eA = max(eA, abs(A - A2))
                eB = max(eB, abs(B - B2))
            except FitError:
                pass
    return ABCoefficients(A, B, rms, tuple(annulus), eA, eB, n, cond)


def fit_with_singular(field: TwistedField, point_index: int, sigma: complex,
                      annulus=None, min_samples=200) -> ABCoefficients:
    """Fit after subtracting the prescribed singular part sigma / sqrt.

    The returned A is the coefficient of sq, i.e. the value of the nonlocal
    operator at this point for input sigma.
    """
    config = field.config
    if annulus is None:
        annulus = default_annulus(config, point_index)
    A, B, rms, cond, eA, eB, n = _fit_core(field, point_index, annulus,
                                           subtract_sigma=sigma,
                                           min_samples=min_samples)
    return ABCoefficients(A, B, rms, tuple(annulus), eA, eB, n, cond)


def fit_complex_samples(dz, fvals, powers=(1, 3), frame=None):
    """Complex least squares for analytic kernel samples.

    Fits f(z) ~ sum_p c_p * sq(z)^p over half-odd powers p (sq is the
    principal square root unless a frame is supplied).  Used by the kernel
    identity checks (e.g. extracting the line kernel from h0).
    """
    dz = np.asarray(dz, dtype=complex)
    fvals = np.asarray(fvals, dtype=complex)
    if frame is None:
        sq = np.sqrt(dz)
    else:
        from .domain import anchored_sqrt
        sq = anchored_sqrt(dz, frame)
    X = np.stack([sq**p for p in powers], axis=1)
    norms = np.linalg.norm(X, axis=0)
    coef, *_ = np.linalg.lstsq(X / norms, fvals, rcond=None)
    coef = coef / norms
    resid = fvals - X @ coef
    return coef, float(np.sqrt(np.mean(np.abs(resid) ** 2)))


# ---------------------------------------------------------------------------
# convergence diagnostics
# ---------------------------------------------------------------------------

def coefficient_convergence(values, hs) -> dict:
    """Observed order of a coefficient across a resolution ladder."""
    values = [complex(v) for v in values]
    hs = list(hs)
    if len(values) < 3:
        raise ValueError("need at least three resolutions")
    order = observed_order(values, hs)
    diffs = [abs(values[k] - values[k + 1]) for k in range(len(values) - 1)]
    fit = loglog_slope(hs[:-1], diffs) if len(diffs) >= 2 else None
    monotone = all(diffs[k + 1] <= diffs[k] for k in range(len(diffs) - 1))
    exact = max(diffs) < 1e-13 * max(abs(v) for v in values)
    return {"order": order, "diffs": diffs, "monotone": monotone,
            "exact": exact, "slope_fit": fit}


def annulus_residual_exponent(field: TwistedField, point_index: int,
                              r2_values, ratio: float = 2.0) -> dict:
    """Slope of the fit residual against the outer annulus radius.

    The model remainder is O(r^(5/2)), so on resolved annuli the RMS misfit
    scales like r2^(5/2).
    """
    resids = []
    for r2 in r2_values:
        ab = fit_AB(field, point_index, annulus=(r2 / ratio, r2),
                    min_samples=50, spread_check=False)
        resids.append(ab.residual)
    fit = loglog_slope(list(r2_values), resids)
    return {"r2": list(r2_values), "residuals": resids,
            "slope": fit.slope, "monotone": fit.monotone}
