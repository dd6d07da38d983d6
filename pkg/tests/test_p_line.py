"""Line-model cross-validation of the nonlocal operator: multiplier,
strip-solve and finite-part routes, plus the boundary-pairing check."""

import numpy as np
import pytest

from branchlab import conventions
from branchlab import p_operator as pop


T = 2.0 * np.pi
N = 256


def mode(k, n=N, period=T):
    t = np.arange(n) * period / n
    return np.cos(2.0 * np.pi * k * t / period)


def test_multiplier_single_mode_amplitude():
    k = 1
    out = pop.p_line_multiplier(np.sin(2.0 * np.pi * np.arange(N) / N), T)
    amp = np.max(np.abs(out))
    assert abs(amp - (2.0 * np.pi / T)) < 1e-10


def test_multiplier_kills_constants():
    out = pop.p_line_multiplier(np.full(N, 3.7), T)
    assert np.max(np.abs(out)) < 1e-12


def test_multiplier_sign_definite():
    rng = np.random.default_rng(3)
    for _ in range(5):
        s = rng.normal(size=N)
        s -= s.mean()
        q = float(np.dot(s, pop.p_line_multiplier(s, T)) * (T / N))
        assert q < 0.0  # ledger sign: -|xi| is negative semidefinite


def test_strip_mode_eigenvalue_matches_coth():
    # separated solution on the finite strip: -k*coth(k*R) -> -k as R grows
    r_max = 3.0 * T / (2.0 * np.pi)
    dr = T / N
    for k in (1, 2, 4):
        lam = pop.line_mode_eigenvalue(lambda s: pop.p_line_strip(s, T, r_max), k, T, N)
        target = -k / np.tanh(k * r_max)
        # second-order scheme: wall-derivative truncation ~ (k*dr)^2/3
        assert abs(lam - target) < max(1e-3, 0.5 * (k * dr) ** 2) * abs(target)


def test_strip_zero_input():
    out = pop.p_line_strip(np.zeros(N), T)
    assert np.max(np.abs(out.values)) < 1e-14


def test_strip_rejects_shallow_and_unresolved():
    with pytest.raises(ValueError):
        pop.p_line_strip(np.zeros(N), T, r_max=0.5)
    with pytest.raises(ValueError):
        pop.strip_solve(np.zeros(8), T, 3.0)


def test_strip_vs_multiplier_first_modes():
    for k in (1, 2, 4):
        lam_s = pop.line_mode_eigenvalue(lambda s: pop.p_line_strip(s, T), k, T, N)
        lam_m = pop.line_mode_eigenvalue(lambda s: pop.p_line_multiplier(s, T), k, T, N)
        assert abs(lam_s / lam_m - 1.0) < 1e-2


def test_finite_part_annihilates_constants():
    out = pop.p_line_finite_part(np.full(N, 2.5), T)
    assert np.max(np.abs(out.values)) < 1e-10
    for v in out.report["per_delta"]:
        assert np.max(np.abs(v)) < 1e-10  # exact at every delta, not just in the limit


def test_finite_part_counterterm_matches_closed_form():
    out = pop.p_line_finite_part(mode(1), T)
    for entry in out.report["counterterms"]:
        # discrete counterterm approaches 2*kappa3/delta (relative O(delta))
        assert abs(entry["counterterm"] / entry["closed_form"] - 1.0) < 0.05


def test_finite_part_is_pi_times_multiplier():
    for k in (1, 2, 4):
        lam_fp = pop.line_mode_eigenvalue(lambda s: pop.p_line_finite_part(s, T), k, T, N)
        lam_m = pop.line_mode_eigenvalue(lambda s: pop.p_line_multiplier(s, T), k, T, N)
        ratio = lam_fp / lam_m
        assert abs(ratio / conventions.FINITE_PART_OVER_MULTIPLIER - 1.0) < 1e-2


def test_finite_part_delta_halving_improves():
    # extrapolation error shrinks by >= 2x when the delta ladder halves
    k = 2
    exact = conventions.FINITE_PART_OVER_MULTIPLIER * conventions.DTN_SIGN * k
    s = T / N
    coarse = pop.p_line_finite_part(mode(k), T, deltas=(32 * s, 16 * s))
    fine = pop.p_line_finite_part(mode(k), T, deltas=(16 * s, 8 * s))
    m = mode(k)
    err_c = abs(np.dot(coarse.values, m) / np.dot(m, m) - exact)
    err_f = abs(np.dot(fine.values, m) / np.dot(m, m) - exact)
    assert err_f <= err_c / 2.0


def test_calibration_report():
    cal = pop.calibrate_line_model(T, N, modes=(1, 2, 4))
    for r in cal["strip_over_multiplier"]:
        assert abs(r - 1.0) < 1e-2
    for r in cal["finite_part_over_multiplier"]:
        assert abs(r / conventions.FINITE_PART_OVER_MULTIPLIER - 1.0) < 1e-2
    assert abs(cal["abs_slope"] - cal["expected_slope"]) < 0.02 * cal["expected_slope"]


def test_eq37_constant_and_agreement():
    rep = pop.check_eq37(period=24.0, n=768)
    assert abs(rep["measured_constant"] / rep["ledger_constant"] - 1.0) < 1e-2
    assert max(rep["rel_error_after_ledger"]) < 1e-2


def test_eq37_zero_input_both_sides_zero():
    # trivially, with no bump mass both routes vanish; realized via linearity
    g, _ = pop.strip_solve(np.zeros(64), 24.0, 12.0)
    assert np.max(np.abs(g)) == 0.0


def test_far_field_decay_exponent():
    rep = pop.far_field_decay()
    assert abs(rep["slope"] + 1.5) < 0.1
    assert abs(rep["amplitude_ratio"] - 1.0) < 0.15
