"""The nonlocal operator P, computed by independent routes.

Line model (flat, n = 3): prescribed data sigma lives on a periodic line;
the operator is the half-plane Dirichlet-to-Neumann map of the radial
reduction.  Three routes are implemented and cross-validated:

  * p_line_multiplier  -- Fourier multiplier -|xi| (sign from the ledger),
  * p_line_strip       -- 5-point solve on the strip r in (0, R], one-sided
                          wall derivative; the route that DEFINES the sign,
  * p_line_finite_part -- truncated kernel sum with the delta^-1 counterterm
                          and Richardson extrapolation in delta; returns
                          pi times the strip eigenvalue (ledger constant).

Discrete branch-point form (n = 2): columns of the solve-and-fit map built
from unit singular data at each branch point; lives in p_matrix/p_via_solve.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from . import conventions
from .flat_kernel import KAPPA3, gamma_periodic, h0


# ---------------------------------------------------------------------------
# line model
# ---------------------------------------------------------------------------

def p_line_multiplier(sigma, period: float):
    """Apply the Fourier multiplier of magnitude |xi| with the ledger sign.

    Decaying harmonic extension of mode exp(i*xi*t) is exp(-|xi|*r), so the
    wall derivative is -|xi| per mode.
    """
    sigma = np.asarray(sigma, dtype=float)
    n = sigma.size
    xi = 2.0 * np.pi * np.fft.rfftfreq(n, d=period / n)
    return conventions.DTN_SIGN * np.fft.irfft(np.abs(xi) * np.fft.rfft(sigma), n=n)


def strip_solve(sigma, period: float, r_max: float, nr: int | None = None):
    """Solve laplace(g) = 0 on the strip r in (0, r_max], t periodic.

    g(0, t) = sigma(t), g(r_max, t) = 0.  Returns (g, dr) with g of shape
    (nr + 1, n) including both boundary rows.
    """
    sigma = np.asarray(sigma, dtype=float)
    n = sigma.size
    dt = period / n
    if nr is None:
        nr = int(round(r_max / dt))
    dr = r_max / nr
    if n < 16 or nr < 20:
        raise ValueError(f"under-resolved strip: n={n}, nr={nr}")

    rows = nr - 1  # interior r-levels
    size = rows * n
    ar, at = 1.0 / dr**2, 1.0 / dt**2
    diag = np.full(size, 2.0 * ar + 2.0 * at)
    A = sp.lil_matrix((size, size))
    idx = np.arange(size).reshape(rows, n)
    A.setdiag(diag)
    # periodic tangential neighbours
    for shift in (1, -1):
        j = np.roll(np.arange(n), -shift)
        A[idx.ravel(), idx[:, j].ravel()] = -at
    # radial neighbours
    if rows > 1:
        A[idx[1:].ravel(), idx[:-1].ravel()] = -ar
        A[idx[:-1].ravel(), idx[1:].ravel()] = -ar
    b = np.zeros(size)
    b[idx[0]] = ar * sigma  # bottom Dirichlet row; top row is zero
    g_int = spla.splu(A.tocsc()).solve(b)
    g = np.zeros((nr + 1, n))
    g[0] = sigma
    g[1:nr] = g_int.reshape(rows, n)
    return g, dr


@dataclass
class LineModelP:
    """Result of one line-model application: samples + provenance."""

    values: np.ndarray
    period: float
    method: str
    report: dict = field(default_factory=dict)


def p_line_strip(sigma, period: float, r_max: float | None = None,
                 nr: int | None = None) -> LineModelP:
    """Wall derivative of the strip solve; second-order one-sided stencil.

    Requires r_max >= 3*period/(2*pi) so the slowest mode has decayed by
    e^-3 at the truncation; the truncation error bound exp(-2*pi*r_max/T)
    is reported.
    """
    sigma = np.asarray(sigma, dtype=float)
    min_r = 3.0 * period / (2.0 * np.pi)
    if r_max is None:
        r_max = min_r
    if r_max < min_r * (1.0 - 1e-12):
        raise ValueError(f"strip too shallow: r_max={r_max} < {min_r}")
    g, dr = strip_solve(sigma, period, r_max, nr)
    deriv = (-3.0 * g[0] + 4.0 * g[1] - g[2]) / (2.0 * dr)
    report = {"r_max": r_max, "dr": dr,
              "truncation_bound": float(np.exp(-2.0 * np.pi * r_max / period))}
    return LineModelP(deriv, period, "strip_solve", report)


def _finite_part_single(sigma, period: float, delta_steps: int):
    """pi * [ truncated kernel sum - counterterm ] at delta = k * spacing.

    The counterterm is the trapezoid sum of the kernel itself over the
    included region (its continuum limit is the 2*kappa3/delta value of the
    closed form, reported alongside); constants are then annihilated exactly
    at every delta and the remaining error is O(delta) for smooth data.
    """
    sigma = np.asarray(sigma, dtype=float)
    n = sigma.size
    s = period / n
    j = np.arange(n)
    dist = np.minimum(j, n - j) * s
    kern = np.zeros(n)
    mask = j > 0
    kern[mask] = gamma_periodic(dist[mask], period)
    w = np.where(dist >= delta_steps * s - 1e-12, 1.0, 0.0)
    w[dist <= delta_steps * s + 1e-12] *= np.where(
        np.abs(dist[dist <= delta_steps * s + 1e-12] - delta_steps * s) <= 1e-12, 0.5, 1.0)
    kern *= w
    # circular correlation sum_j kern_j * sigma_{i+j}
    conv = np.real(np.fft.ifft(np.fft.fft(sigma) * np.conj(np.fft.fft(kern))))
    counterterm = float(np.sum(kern))
    return np.pi * s * (conv - counterterm * sigma), counterterm * s


def p_line_finite_part(sigma, period: float, deltas=None) -> LineModelP:
    """Finite-part route with two-term Richardson extrapolation in delta.

    deltas defaults to (16s, 8s, 4s) with s the sample spacing; each must be
    at least 4 samples.  The per-delta values, counterterms (next to the
    closed-form 2*kappa3/delta) and the extrapolation consistency flag are
    reported.
    """
    sigma = np.asarray(sigma, dtype=float)
    n = sigma.size
    s = period / n
    if deltas is None:
        steps = [16, 8, 4]
    else:
        steps = [int(round(d / s)) for d in deltas]
    if any(k < 4 for k in steps):
        raise ValueError("every delta must be at least 4 sample spacings")
    vals, cterms = [], []
    for k in steps:
        v, c = _finite_part_single(sigma, period, k)
        vals.append(v)
        cterms.append({"delta": k * s, "counterterm": c,
                       "closed_form": 2.0 * KAPPA3 / (k * s)})
    pairs = [2.0 * vals[i + 1] - vals[i] for i in range(len(vals) - 1)]
    extrapolated = pairs[-1]
    flag = False
    if len(pairs) >= 2:
        drift = np.max(np.abs(pairs[-1] - pairs[-2]))
        step = np.max(np.abs(vals[-1] - vals[-2]))
        flag = bool(drift > max(0.5 * step, 1e-12 * max(1.0, np.max(np.abs(vals[-1])))))
    report = {"deltas": [k * s for k in steps], "counterterms": cterms,
              "per_delta": vals, "pairs": pairs, "nonconvergent": flag}
    return LineModelP(extrapolated, period, "finite_part", report)


def line_mode_eigenvalue(apply_fn, k: int, period: float, n: int) -> float:
    """Eigenvalue of a line-model route on the cos(2*pi*k*t/T) mode."""
    t = np.arange(n) * period / n
    mode = np.cos(2.0 * np.pi * k * t / period)
    out = apply_fn(mode)
    vals = out.values if isinstance(out, LineModelP) else out
    return float(np.dot(vals, mode) / np.dot(mode, mode))


def calibrate_line_model(period: float = 2.0 * np.pi, n: int = 256,
                         modes=(1, 2, 4)) -> dict:
    """One-shot cross-validation fixing sign and constant conventions.

    Returns the per-mode eigenvalues of the three routes, the measured
    ratios strip/multiplier and finite_part/multiplier, and the slope of
    |multiplier eigenvalue| against the mode wavenumber.  The measured
    constants are asserted against the ledger by the test suite.
    """
    eig = {"multiplier": [], "strip": [], "finite_part": []}
    for k in modes:
        eig["multiplier"].append(line_mode_eigenvalue(
            lambda s: p_line_multiplier(s, period), k, period, n))
        eig["strip"].append(line_mode_eigenvalue(
            lambda s: p_line_strip(s, period), k, period, n))
        eig["finite_part"].append(line_mode_eigenvalue(
            lambda s: p_line_finite_part(s, period), k, period, n))
    mult = np.array(eig["multiplier"])
    ratios_strip = np.array(eig["strip"]) / mult
    ratios_fp = np.array(eig["finite_part"]) / mult
    ks = np.array(modes, dtype=float)
    slope = float(np.dot(np.abs(mult), ks) / np.dot(ks, ks))
    return {
        "modes": list(modes),
        "eigenvalues": eig,
        "strip_over_multiplier": ratios_strip.tolist(),
        "finite_part_over_multiplier": ratios_fp.tolist(),
        "abs_slope": slope,
        "expected_slope": 2.0 * np.pi / period,
        "ledger_finite_part_constant": conventions.FINITE_PART_OVER_MULTIPLIER,
        "ledger_sign": conventions.DTN_SIGN,
    }


# ---------------------------------------------------------------------------
# boundary-pairing representation (flat-line analog of the Green pairing)
# ---------------------------------------------------------------------------

def c2_bump(t, center: float, width: float):
    """Compactly supported C^2 bump (1 - u^2)^3 on |u| < 1."""
    u = (np.asarray(t, dtype=float) - center) / width
    out = np.zeros_like(u)
    m = np.abs(u) < 1.0
    out[m] = (1.0 - u[m] ** 2) ** 3
    return out


def check_eq37(period: float = 24.0, n: int = 768,
               bump_center: float | None = None, bump_width: float = 1.5,
               eval_points=None) -> dict:
    """Strip-solved field versus the kernel quadrature pi * int h0 sigma.

    Evaluates Q(q) = r^-1/2 g(r, t_q) from the strip solve against the
    quadrature of the closed-form kernel for a compactly supported bump.
    Any constant-factor discrepancy between the two routes is reported and
    compared against the ledger value (pi), never folded in twice.
    """
    if bump_center is None:
        bump_center = period / 2.0
    t = np.arange(n) * period / n
    sigma = c2_bump(t, bump_center, bump_width)
    # deeper than the operator minimum: the eval points sit at r up to ~2,
    # so the slowest-mode truncation e^(-2 xi_1 (R - r)) must stay below 1e-3
    r_max = 1.3 * 3.0 * period / (2.0 * np.pi)
    # The Dirichlet top makes the mean mode sag linearly (error ~ r/r_max,
    # not covered by the exponential mode bound); the bounded periodic
    # extension of a constant is the constant, so split it off exactly.
    mean = float(sigma.mean())
    g, dr = strip_solve(sigma - mean, period, r_max)
    g = g + mean
    if eval_points is None:
        eval_points = [(1.0, bump_center), (1.0, bump_center + 2.0),
                       (0.7, bump_center - 1.5), (1.5, bump_center + 1.0),
                       (2.0, bump_center)]

    # quadrature route on the bump support (integrand is compactly supported)
    from scipy.integrate import quad

    rows = []
    for (r_q, t_q) in eval_points:
        i = r_q / dr
        i0_, frac = int(i), i - int(i)
        col = t_q / (period / n)
        j0, fj = int(col) % n, col - int(col)
        g_interp = ((1 - frac) * ((1 - fj) * g[i0_, j0] + fj * g[i0_, (j0 + 1) % n])
                    + frac * ((1 - fj) * g[i0_ + 1, j0] + fj * g[i0_ + 1, (j0 + 1) % n]))
        q_strip = g_interp / np.sqrt(r_q)

        # the strip field is periodic, so the pairing kernel is the
        # periodized one; the m = +-1 images matter at the percent level
        quad_val = 0.0
        for m_img in (-1, 0, 1):
            def integrand(t2, m_img=m_img):
                val = h0(r_q + 0.0j, t_q - t2 - m_img * period).real
                u = (t2 - bump_center) / bump_width
                return val * (1.0 - u * u) ** 3 if abs(u) < 1.0 else 0.0

            quad_val += quad(integrand, bump_center - bump_width,
                             bump_center + bump_width, limit=200, epsabs=1e-12)[0]
        quad_val *= np.pi
        rows.append({"r": r_q, "t": t_q, "q_strip": q_strip, "pi_quadrature": quad_val,
                     "ratio": quad_val / q_strip if q_strip != 0 else np.nan})
    ratios = np.array([row["ratio"] for row in rows])
    measured = float(np.mean(ratios))
    rel_after = np.abs(ratios / conventions.EQ37_OVER_STRIP - 1.0)
    return {
        "rows": rows,
        "measured_constant": measured,
        "ledger_constant": conventions.EQ37_OVER_STRIP,
        "rel_error_after_ledger": rel_after.tolist(),
        "sigma_mass": float(np.sum(sigma) * period / n),
    }


def far_field_decay(period: float = 24.0, n: int = 768,
                    bump_width: float = 0.6, radii=(1.2, 1.8, 2.4, 3.0)) -> dict:
    """Far-field of the strip field above the bump: Q ~ mass/(pi * r^(3/2))."""
    center = period / 2.0
    t = np.arange(n) * period / n
    sigma = c2_bump(t, center, bump_width)
    mass = float(np.sum(sigma) * period / n)
    r_max = 3.0 * period / (2.0 * np.pi)
    mean = float(sigma.mean())
    g, dr = strip_solve(sigma - mean, period, r_max)
    g = g + mean
    jc = int(round(center / (period / n))) % n
    qs = []
    for r in radii:
        i = int(round(r / dr))
        qs.append(g[i, jc] / np.sqrt(i * dr))
    qs = np.array(qs)
    lr, lq = np.log(np.array(radii)), np.log(qs)
    slope = float(np.polyfit(lr, lq, 1)[0])
    return {"radii": list(radii), "q": qs.tolist(), "slope": slope,
            "amplitude_ratio": float(qs[0] * np.pi * radii[0] ** 1.5 / mass)}
