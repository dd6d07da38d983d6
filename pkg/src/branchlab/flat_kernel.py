"""Closed-form flat-model kernels and their mutual-consistency checks.

Everything here lives on C x R^(n-2) with transverse coordinate z = x1 + i*x2
and tangential coordinates t.  The basic object is the branch kernel

    h0(z, t) = kappa_n * sqrt(z) / R^(n-1),      R^2 = |z|^2 + |t|^2,

a two-valued harmonic kernel of homogeneity 3/2 - n.  The module also
carries its first mean-curvature correction h1 (n = 3), the closed-form
tangential integrals i0, i1, the line kernel gamma, and the half-space
Green's function obtained by the method of images.

Sheet convention: sheet 0 is the principal square root; sheet 1 negates
(see conventions.ledger_entry("sqrt_sheet")).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

KAPPA3 = 1.0 / math.pi


def sphere_volume(m: int) -> float:
    """Volume (surface measure) of the unit m-sphere in R^(m+1)."""
    if m < 0:
        raise ValueError("sphere dimension must be >= 0")
    return 2.0 * math.pi ** ((m + 1) / 2.0) / math.gamma((m + 1) / 2.0)


def kappa(n: int) -> float:
    """Normalizing constant of the branch kernel: 1/pi at n = 3,
    2(n-3)/Vol(S^(n-2)) for n > 3."""
    if n < 3:
        raise ValueError(f"ambient dimension must be >= 3, got {n}")
    if n == 3:
        return KAPPA3
    return 2.0 * (n - 3) / sphere_volume(n - 2)


@dataclass(frozen=True)
class KernelPoint:
    """Point (z, t) in the flat model C x R^(n-2), away from the origin."""

    z: complex
    t: tuple = ()
    n: int = 3

    def __post_init__(self):
        t = np.atleast_1d(np.asarray(self.t, dtype=float)).ravel()
        object.__setattr__(self, "t", tuple(t.tolist()))
        if self.n < 3:
            raise ValueError(f"ambient dimension must be >= 3, got {self.n}")
        if len(self.t) != self.n - 2:
            raise ValueError(f"expected {self.n - 2} tangential coordinates, got {len(self.t)}")
        if self.R == 0.0:
            raise ValueError("kernel point must not be the origin")

    @property
    def R(self) -> float:
        return math.sqrt(abs(self.z) ** 2 + sum(ti * ti for ti in self.t))

    def scaled(self, lam: float) -> "KernelPoint":
        return KernelPoint(lam * self.z, tuple(lam * ti for ti in self.t), self.n)


@dataclass(frozen=True)
class KernelValue:
    """Kernel value on a chosen sheet of sqrt(z); the other sheet negates."""

    value: complex
    branch_sheet: int = 0

    def __post_init__(self):
        if self.branch_sheet not in (0, 1):
            raise ValueError("branch_sheet must be 0 or 1")

    def on_sheet(self, sheet: int) -> complex:
        if sheet not in (0, 1):
            raise ValueError("branch_sheet must be 0 or 1")
        return self.value if sheet == self.branch_sheet else -self.value


def _sheet_sign(sheet: int) -> float:
    if sheet not in (0, 1):
        raise ValueError("branch_sheet must be 0 or 1")
    return 1.0 if sheet == 0 else -1.0


def h0(z, t, n: int = 3):
    """Branch kernel kappa_n * sqrt(z)/R^(n-1); vectorized, principal sheet."""
    z = np.asarray(z, dtype=complex)
    tsq = np.sum(np.atleast_1d(np.asarray(t, dtype=float)) ** 2, axis=0)
    R2 = np.abs(z) ** 2 + tsq
    if np.any(R2 == 0.0):
        raise ValueError("h0 is singular at the origin")
    return kappa(n) * np.sqrt(z) / R2 ** ((n - 1) / 2.0)


def eval_h0(p: KernelPoint, sheet: int = 0) -> KernelValue:
    return KernelValue(_sheet_sign(sheet) * h0(p.z, p.t, p.n), sheet)


# ---------------------------------------------------------------------------
# analytic partials of h0 at n = 3 (t scalar)
# ---------------------------------------------------------------------------

def _r2(z, t):
    return np.abs(np.asarray(z, dtype=complex)) ** 2 + np.asarray(t, dtype=float) ** 2


def h0_dx1(z, t):
    z = np.asarray(z, dtype=complex)
    R2 = _r2(z, t)
    return KAPPA3 * (0.5 / (np.sqrt(z) * R2) - 2.0 * z.real * np.sqrt(z) / R2**2)


def h0_dx2(z, t):
    z = np.asarray(z, dtype=complex)
    R2 = _r2(z, t)
    return KAPPA3 * (0.5j / (np.sqrt(z) * R2) - 2.0 * z.imag * np.sqrt(z) / R2**2)


def h0_dtt(z, t):
    z = np.asarray(z, dtype=complex)
    t = np.asarray(t, dtype=float)
    R2 = _r2(z, t)
    return KAPPA3 * np.sqrt(z) * (-2.0 / R2**2 + 8.0 * t**2 / R2**3)


def h1(z, t, m: float):
    """First mean-curvature correction of the kernel expansion (n = 3).

    h1 = m * [ (x1^2 - x2^2)/2 * dh0/dx1 + x1*x2 * dh0/dx2 + x1*h0 ],
    homogeneity -1/2.  Its Laplacian is 2m*(dh0/dx1 - x1*d2h0/dt2), so the
    paired first-order operator is l1_h0 below; see the convention ledger
    entry "curvature_correction_pairing" for the coefficient bookkeeping.
    """
    z = np.asarray(z, dtype=complex)
    x1, x2 = z.real, z.imag
    return m * ((x1**2 - x2**2) / 2.0 * h0_dx1(z, t) + x1 * x2 * h0_dx2(z, t) + x1 * h0(z, t))


def eval_h1(p: KernelPoint, m: float, sheet: int = 0) -> KernelValue:
    if p.n != 3:
        raise ValueError("h1 is defined in the n = 3 model")
    return KernelValue(_sheet_sign(sheet) * h1(p.z, p.t[0], m), sheet)


def l1_h0(z, t, m: float):
    """First-order curvature term paired with h1: -2m*(dh0/dx1 - x1*d2h0/dt2).

    Fixed by requiring laplace(h1) + l1_h0 = 0 away from the origin (the
    correction equation of the two-term expansion h ~ h0 + h1).
    """
    z = np.asarray(z, dtype=complex)
    return -2.0 * m * (h0_dx1(z, t) - z.real * h0_dtt(z, t))


def l1_printed_h0(z, t, m: float):
    """The printed operator m*(dh0/dx1 - 2*x1*d2h0/dt2); kept for the record.

    Does not annihilate laplace(h1); the residual is m*(3*dh0/dx1
    - 4*x1*d2h0/dt2).  See the ledger entry "curvature_correction_pairing".
    """
    z = np.asarray(z, dtype=complex)
    return m * (h0_dx1(z, t) - 2.0 * z.real * h0_dtt(z, t))


# ---------------------------------------------------------------------------
# tangential integrals (n = 3)
# ---------------------------------------------------------------------------

def i0(z):
    """Closed-form tangential integral of h0: z**-0.5 on the principal sheet.

    Direct quadrature of h0 yields conj(z**-0.5) = sqrt(z)/|z|; the two
    agree in modulus everywhere and exactly on the positive real axis.  The
    conjugation is the ledger entry "tangential_integral_phase".
    """
    z = np.asarray(z, dtype=complex)
    if np.any(z == 0):
        raise ValueError("i0 is singular at z = 0")
    return 1.0 / np.sqrt(z)


def i1(z, m: float):
    """Closed-form tangential integral of h1: (-m/4)*sqrt(z) + m*x1/sqrt(z)."""
    z = np.asarray(z, dtype=complex)
    if np.any(z == 0):
        raise ValueError("i1 is singular at z = 0")
    return -0.25 * m * np.sqrt(z) + m * z.real / np.sqrt(z)


def eval_I0(z: complex, sheet: int = 0) -> KernelValue:
    return KernelValue(_sheet_sign(sheet) * complex(i0(z)), sheet)


def eval_I1(z: complex, m: float, sheet: int = 0) -> KernelValue:
    return KernelValue(_sheet_sign(sheet) * complex(i1(z, m)), sheet)


def _quad_complex(f, a, b, **kw):
    re = integrate.quad(lambda t: f(t).real, a, b, **kw)[0]
    im = integrate.quad(lambda t: f(t).imag, a, b, **kw)[0]
    return re + 1j * im


def i0_quadrature(z: complex, T: float | None = None) -> complex:
    """Tangential integral of h0 on [-T, T] plus the analytic t^-2 tail.

    The integrand decays only as t^-2, so the tail over |t| > T contributes
    2*kappa3*sqrt(z)/T exactly to leading order.  Default T = 1e4*|z|.
    """
    z = complex(z)
    if T is None:
        T = 1e4 * abs(z)
    az = abs(z)
    val = _quad_complex(lambda t: h0(z, t), -T, T,
                        points=[-az, 0.0, az], limit=400, epsabs=1e-13, epsrel=1e-12)
    tail = 2.0 * KAPPA3 * np.sqrt(complex(z)) / T
    return val + tail


def i1_quadrature(z: complex, m: float, T: float | None = None) -> complex:
    """Tangential integral of h1 with its analytic tail.

    The 1/t^2 coefficient of h1 is m*kappa3*((1/4)z^(3/2) + x1*sqrt(z)), so
    the tail over |t| > T is twice that over T.
    """
    z = complex(z)
    if T is None:
        T = 1e4 * abs(z)
    az = abs(z)
    val = _quad_complex(lambda t: h1(z, t, m), -T, T,
                        points=[-az, 0.0, az], limit=400, epsabs=1e-13, epsrel=1e-12)
    zc = complex(z)
    tail = 2.0 * m * KAPPA3 * (0.25 * zc * np.sqrt(zc) + zc.real * np.sqrt(zc)) / T
    return val + tail


# ---------------------------------------------------------------------------
# flat line kernel of the nonlocal operator (n = 3)
# ---------------------------------------------------------------------------

def gamma_flat(t1: float, t2: float) -> float:
    """Exact flat-model line kernel: 1/(pi * |t1 - t2|^2)."""
    d = abs(t1 - t2)
    if d == 0.0:
        raise ValueError("gamma is singular at coincident points")
    return KAPPA3 / d**2


def gamma_periodic(d, period: float):
    """Image sum of gamma_flat over a period lattice: pi / (T*sin(pi*d/T))^2.

    sum_m 1/(d + m*T)^2 = (pi/T)^2 / sin^2(pi*d/T).
    """
    d = np.asarray(d, dtype=float)
    if np.any(np.sin(np.pi * d / period) == 0.0):
        raise ValueError("gamma is singular at coincident points")
    return KAPPA3 * (np.pi / period) ** 2 / np.sin(np.pi * d / period) ** 2


# ---------------------------------------------------------------------------
# half-space Green's function by the method of images
# ---------------------------------------------------------------------------

def newton_kernel(d, dim: int):
    """Free-space Newton kernel (fundamental solution of -Laplace)."""
    d = np.asarray(d, dtype=float)
    if np.any(d <= 0.0):
        raise ValueError("newton kernel needs positive distance")
    if dim == 2:
        return -np.log(d) / (2.0 * math.pi)
    if dim == 3:
        return 1.0 / (4.0 * math.pi * d)
    raise ValueError("newton kernel implemented for dimensions 2 and 3")


def halfspace_green(r: float, t, rp: float, tp, n: int = 3):
    """Dirichlet Green's function of the half-space r > 0 in R^(n-1).

    Built by reflection: K = Newton(|D|) - Newton(|D*|), D* the image
    separation.  Vanishes linearly as r -> 0; its normal derivative there
    reproduces the modulus of h0 (tested against Eq.-level closed forms).
    """
    t = np.atleast_1d(np.asarray(t, dtype=float))
    tp = np.atleast_1d(np.asarray(tp, dtype=float))
    if r <= 0.0 or rp <= 0.0:
        raise ValueError("half-space points need positive radii")
    dt2 = np.sum((t - tp) ** 2)
    d = math.sqrt((r - rp) ** 2 + dt2)
    dstar = math.sqrt((r + rp) ** 2 + dt2)
    if d == 0.0:
        raise ValueError("coincident points")
    dim = n - 1
    return float(newton_kernel(d, dim) - newton_kernel(dstar, dim))


def eval_G0_halfspace(r: float, t, rp: float, tp, n: int = 3) -> float:
    """Weighted half-space kernel (r*rp)^(1/2) * K of the radial reduction."""
    return math.sqrt(r * rp) * halfspace_green(r, t, rp, tp, n)
