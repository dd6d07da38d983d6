"""Closed-form kernel identities: constants, homogeneity, harmonicity,
the correction equation, tangential integrals, and the image kernel."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from branchlab import flat_kernel as fk
from branchlab import numdiff


def test_kappa_values():
    assert abs(fk.kappa(3) - 1.0 / math.pi) < 1e-15
    # n = 4: Vol(S^2) = 4*pi, so 2*(4-3)/(4*pi) = 1/(2*pi)
    assert abs(fk.kappa(4) - 1.0 / (2.0 * math.pi)) < 1e-15
    # n = 5: Vol(S^3) = 2*pi^2, so 2*2/(2*pi^2) = 2/pi^2
    assert abs(fk.kappa(5) - 2.0 / math.pi**2) < 1e-15
    with pytest.raises(ValueError):
        fk.kappa(2)


def test_h0_pinned_values():
    p = fk.KernelPoint(1.0 + 0j, (0.0,), 3)
    assert abs(fk.eval_h0(p).value - 1.0 / math.pi) < 1e-15
    p = fk.KernelPoint(1.0 + 0j, (2.0,), 3)  # R^2 = 5
    assert abs(fk.eval_h0(p).value - 1.0 / (5.0 * math.pi)) < 1e-15


def test_h0_rejects_origin():
    with pytest.raises(ValueError):
        fk.KernelPoint(0.0, (0.0,), 3)
    with pytest.raises(ValueError):
        fk.h0(0.0, 0.0)


def test_sheet_flag_negates():
    p = fk.KernelPoint(0.3 + 0.4j, (0.7,), 3)
    v0 = fk.eval_h0(p, sheet=0)
    v1 = fk.eval_h0(p, sheet=1)
    assert v0.value == -v1.value
    assert v0.on_sheet(1) == v1.value


@given(
    st.complex_numbers(min_magnitude=0.1, max_magnitude=3.0, allow_infinity=False, allow_nan=False),
    st.floats(-3.0, 3.0),
    st.floats(0.05, 8.0),
    st.integers(3, 6),
)
@settings(max_examples=80, deadline=None)
def test_h0_homogeneity(z, t, lam, n):
    tvec = tuple(t for _ in range(n - 2))
    p = fk.KernelPoint(z, tvec, n)
    a = fk.eval_h0(p.scaled(lam)).value
    b = lam ** (1.5 - n) * fk.eval_h0(p).value
    assert abs(a - b) <= 1e-13 * max(abs(a), abs(b))


@given(
    st.complex_numbers(min_magnitude=0.2, max_magnitude=2.0, allow_infinity=False, allow_nan=False),
    st.floats(-2.0, 2.0),
    st.floats(0.05, 8.0),
)
@settings(max_examples=60, deadline=None)
def test_h1_homogeneity(z, t, lam):
    v1 = fk.h1(lam * z, lam * t, 1.0)
    v2 = lam ** (-0.5) * fk.h1(z, t, 1.0)
    assert abs(v1 - v2) <= 1e-12 * max(1e-30, abs(v1), abs(v2))


def test_h1_vanishes_without_curvature():
    assert fk.h1(0.3 + 1.1j, 0.4, 0.0) == 0.0
    assert fk.eval_h1(fk.KernelPoint(1 + 1j, (0.7,)), 0.0).value == 0.0


@given(st.complex_numbers(min_magnitude=0.3, max_magnitude=2.0, allow_infinity=False, allow_nan=False),
       st.floats(-2.0, 2.0))
@settings(max_examples=40, deadline=None)
def test_h0_parity_in_t(z, t):
    assert fk.h0(z, t) == fk.h0(z, -t)


def _away_from_cut(z, step):
    # FD stencils must not straddle the principal branch cut (negative reals)
    return z.real > 4 * step or abs(z.imag) > 4 * step


def _random_shell_points(rng, count, rmin=0.5, rmax=2.0, step=1e-2):
    pts = []
    while len(pts) < count:
        v = rng.normal(size=3)
        v *= rng.uniform(rmin, rmax) / np.linalg.norm(v)
        z = v[0] + 1j * v[1]
        if abs(z) > 0.25 and _away_from_cut(z, step):
            pts.append((z, v[2]))
    return pts


def test_h0_harmonic_under_fd():
    rng = np.random.default_rng(7)
    for z, t in _random_shell_points(rng, 10):
        def resid(s, z=z, t=t):
            return numdiff.fd_laplacian_3d(lambda a, b, c: fk.h0(a + 1j * b, c), z.real, z.imag, t, s)
        res, fit = numdiff.step_sweep_residual(resid, steps=(1e-2, 5e-3, 2.5e-3))
        # O(step^2) truncation; extrapolates to zero
        assert fit.roundoff_floor or abs(fit.slope - 2.0) < 0.4
        extrap, _ = numdiff.richardson(res, (1e-2, 5e-3, 2.5e-3), order=2)
        assert abs(extrap) < 1e-4 * max(1.0, abs(fk.h0(z, t)))


def test_correction_equation_fd():
    # laplace(h1) + l1_h0 = 0 away from the origin, FD order ~ 2
    rng = np.random.default_rng(11)
    for z, t in _random_shell_points(rng, 8):
        def resid(s, z=z, t=t):
            lap = numdiff.fd_laplacian_3d(lambda a, b, c: fk.h1(a + 1j * b, c, 1.0),
                                          z.real, z.imag, t, s)
            return lap + fk.l1_h0(z, t, 1.0)
        res, fit = numdiff.step_sweep_residual(resid, steps=(1e-2, 5e-3, 2.5e-3))
        assert fit.roundoff_floor or abs(fit.slope - 2.0) < 0.4
        assert res[-1] < 1e-4 * max(1.0, abs(fk.l1_h0(z, t, 1.0)))


def test_printed_l1_does_not_pair_with_h1():
    # the printed coefficients leave a residual m*(3*dh0/dx1 - 4*x1*dtt_h0)
    z, t = 1.0 + 1.0j, 0.7
    lap = numdiff.fd_laplacian_3d(lambda a, b, c: fk.h1(a + 1j * b, c, 1.0),
                                  z.real, z.imag, t, 1e-3)
    assert abs(lap + fk.l1_printed_h0(z, t, 1.0)) > 1e-2
    predicted = 3.0 * fk.h0_dx1(z, t) - 4.0 * z.real * fk.h0_dtt(z, t)
    assert abs((lap + fk.l1_printed_h0(z, t, 1.0)) - predicted) < 1e-4


def test_i0_pinned_values():
    assert abs(fk.eval_I0(4.0).value - 0.5) < 1e-14
    assert abs(fk.eval_I0(1.0).value - 1.0) < 1e-14
    with pytest.raises(ValueError):
        fk.i0(0.0)


def test_i1_pinned_values():
    assert abs(fk.eval_I1(1.0, 1.0).value - 0.75) < 1e-14
    assert fk.eval_I1(2.0 + 0.5j, 0.0).value == 0.0
    # x1 = 0 at z = i, so only the -(m/4)sqrt(z) term survives
    expected = -0.25 * np.exp(1j * np.pi / 4)
    assert abs(fk.eval_I1(1j, 1.0).value - expected) < 1e-14


def test_i0_quadrature_matches_modulus():
    for z in [0.5, 1.0, 2.0, 0.3 + 0.4j, -0.6 + 0.8j]:
        q = fk.i0_quadrature(z)
        assert abs(abs(q) - abs(fk.i0(z))) < 1e-8


def test_i0_quadrature_phase_convention():
    # direct integration gives conj(z**-0.5) = sqrt(z)/|z| (ledger entry)
    for z in [0.3 + 0.4j, 1j, -0.5 + 0.5j]:
        q = fk.i0_quadrature(z)
        assert abs(q - np.conj(fk.i0(z))) < 1e-8


def test_i1_quadrature_matches_closed_form_on_positive_axis():
    for z in [0.5, 1.0, 2.0]:
        q = fk.i1_quadrature(z, 1.0)
        assert abs(q - fk.i1(z, 1.0)) < 1e-6


def test_i1_quadrature_conjugation_off_axis():
    z = 0.8 + 0.6j
    q = fk.i1_quadrature(z, 0.7)
    assert abs(q - np.conj(fk.i1(z, 0.7))) < 1e-6


def test_gamma_values_and_symmetry():
    assert abs(fk.gamma_flat(0.0, 2.0) - 1.0 / (4.0 * math.pi)) < 1e-15
    assert abs(fk.gamma_flat(3.0, 2.0) - 1.0 / math.pi) < 1e-15
    with pytest.raises(ValueError):
        fk.gamma_flat(1.0, 1.0)


@given(st.floats(-5, 5), st.floats(-5, 5))
@settings(max_examples=50, deadline=None)
def test_gamma_symmetric(a, b):
    if abs(a - b) < 1e-6:
        return
    assert fk.gamma_flat(a, b) == fk.gamma_flat(b, a)


def test_gamma_periodic_is_image_sum():
    T, d, M = 2.0 * math.pi, 0.9, 4000
    direct = sum(fk.gamma_flat(0.0, d + m * T) for m in range(-M, M + 1))
    direct += 2.0 / (math.pi * (M + 0.5) * T**2)  # integral tail of the image sum
    assert abs(fk.gamma_periodic(d, T) - direct) < 1e-9


def test_halfspace_green_dirichlet_and_antisymmetry():
    # K -> 0 as r -> 0 and K is the image difference of Newton kernels
    for n in (3, 4):
        t = (0.3,) * (n - 3 + 1)
        t = t[: n - 2]
        tp = tuple(0.1 for _ in range(n - 2))
        vals = [fk.halfspace_green(r, t, 1.0, tp, n) for r in (1e-3, 1e-4)]
        assert abs(vals[1]) < abs(vals[0])
        assert abs(vals[1]) < 1e-3
        d = math.sqrt((0.5 - 1.0) ** 2 + sum((a - b) ** 2 for a, b in zip(t, tp)))
        ds = math.sqrt((0.5 + 1.0) ** 2 + sum((a - b) ** 2 for a, b in zip(t, tp)))
        expected = fk.newton_kernel(d, n - 1) - fk.newton_kernel(ds, n - 1)
        assert abs(fk.halfspace_green(0.5, t, 1.0, tp, n) - expected) < 1e-14
        # spec contract: G0 carries the (r*rp)^(1/2) weight
        assert abs(fk.eval_G0_halfspace(0.5, t, 1.0, tp, n)
                   - math.sqrt(0.5) * fk.halfspace_green(0.5, t, 1.0, tp, n)) < 1e-15


def test_halfspace_green_reproduces_h0_modulus():
    # mutual consistency: the wall derivative of the image kernel recovers
    # the kernel constant, K((r,.),(rp,.))/(r*sqrt(rp)) -> |h0(rp, dt)| as r -> 0
    rp, dt = 0.8, 0.6
    target = abs(fk.h0(rp, dt))  # kappa3 * sqrt(rp) / (rp^2 + dt^2)
    vals = [fk.halfspace_green(r, 0.0, rp, dt, 3) / (r * math.sqrt(rp))
            for r in (1e-4, 1e-5)]
    assert abs(vals[1] - target) < 1e-4 * target
    assert abs(vals[1] - target) < abs(vals[0] - target)


def test_radial_reduction_identity():
    # laplace(r^(-1/2) g e^(i theta/2)) = r^(-1/2) (laplace_{r,t} g) e^(i theta/2)
    # checked on a sample g via FD in cartesian (x1, x2, t) vs half-plane (r, t)
    def g(r, t):
        return np.sin(1.3 * r) * np.exp(-0.5 * t**2) + r**2 * t

    def f(x1, x2, t):
        z = x1 + 1j * x2
        r = abs(z)
        return r**-0.5 * g(r, t) * np.exp(0.5j * np.angle(z))

    z0, t0 = 1.1 + 0.6j, 0.4
    r0 = abs(z0)
    s = 1e-4
    lhs = numdiff.fd_laplacian_3d(f, z0.real, z0.imag, t0, s)

    def lap_rt(r, t, s):
        return ((g(r + s, t) - 2 * g(r, t) + g(r - s, t)) / s**2
                + (g(r, t + s) - 2 * g(r, t) + g(r, t - s)) / s**2)

    rhs = r0**-0.5 * lap_rt(r0, t0, s) * np.exp(0.5j * np.angle(z0))
    assert abs(lhs - rhs) < 1e-5 * max(1.0, abs(rhs))
