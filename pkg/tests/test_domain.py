"""Configuration validation, crossing tables, loop holonomy, JSON round trip."""

import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from branchlab import domain as dm


def test_canonical_two_point_valid():
    cfg = dm.canonical_two_point(h=1.0 / 128)
    assert cfg.n_points == 2
    assert len(cfg.cuts) == 1
    assert cfg.edge_cross  # the cut crosses some grid edges
    assert cfg.min_separation() == pytest.approx(0.5)


def test_odd_point_count_rejected_on_torus():
    with pytest.raises(dm.ValidationError, match="even"):
        dm.build_config(dm.TorusDomain((1.0, 1.0)),
                        [0.2 + 0.2j, 0.5 + 0.5j, 0.8 + 0.8j],
                        [1.0], dm.GridSpec(h=1 / 64, r_c=0.125))


def test_too_close_points_rejected():
    with pytest.raises(dm.ValidationError, match="separated"):
        dm.build_config(dm.TorusDomain((1.0, 1.0)),
                        [0.5 + 0.5j, 0.52 + 0.5j],
                        [1.0], dm.GridSpec(h=1 / 64, r_c=0.125))


def test_cuts_sharing_a_vertex_rejected():
    pts = [0.2 + 0.2j, 0.8 + 0.2j, 0.2 + 0.8j, 0.8 + 0.8j]
    # explicit cuts: one point is an endpoint of two cuts
    cuts = [[pts[0], pts[1]], [pts[1], pts[2]]]
    with pytest.raises(dm.ValidationError, match="two cuts|not an endpoint"):
        dm.build_config(dm.TorusDomain((1.0, 1.0)), pts, [1.0, 1.0],
                        dm.GridSpec(h=1 / 64, r_c=0.125), cuts=cuts)


def test_intersecting_cuts_rejected():
    pts = [0.2 + 0.2j, 0.8 + 0.8j, 0.8 + 0.2j, 0.2 + 0.8j]
    cuts = [[pts[0], pts[1]], [pts[2], pts[3]]]  # diagonals cross
    with pytest.raises(dm.ValidationError, match="intersect"):
        dm.build_config(dm.TorusDomain((1.0, 1.0)), pts, [1.0, 1.0],
                        dm.GridSpec(h=1 / 64, r_c=0.125), cuts=cuts)


def test_rc_below_8h_rejected():
    with pytest.raises(dm.ValidationError, match="r_c"):
        dm.GridSpec(h=1 / 64, r_c=0.1 / 64)


def test_holonomy_small_loop_is_reflection():
    cfg = dm.canonical_two_point(h=1.0 / 64)
    p = cfg.points[0]
    loop = [p + 0.08 * np.exp(2j * np.pi * k / 64) for k in range(64)]
    sign, trans = dm.holonomy_of_loop(cfg, loop)
    assert sign == -1
    assert trans == pytest.approx(cfg.translations[0])
    # order 2: composing the element with itself is the identity
    s2, t2 = sign * sign, sign * trans + trans  # reflection: -(-u+c)+c = u
    assert s2 == 1 and t2 == pytest.approx(0.0, abs=1e-12)


def test_holonomy_contractible_loop_identity():
    cfg = dm.canonical_two_point(h=1.0 / 64)
    center = 0.5 + 0.35j
    loop = [center + 0.05 * np.exp(2j * np.pi * k / 16) for k in range(16)]
    sign, trans = dm.holonomy_of_loop(cfg, loop)
    assert sign == 1 and trans == 0.0


def test_holonomy_double_crossing_cancels():
    cfg = dm.canonical_two_point(h=1.0 / 64)
    # a thin loop poking across the cut and back: crosses twice, identity
    mid = 0.5 * (cfg.points[0] + cfg.points[1])
    loop = [mid - 0.03 - 0.05j, mid + 0.03 - 0.05j, mid + 0.03 + 0.05j,
            mid - 0.03 + 0.05j]
    sign, trans = dm.holonomy_of_loop(cfg, loop)
    assert sign == 1
    assert trans == pytest.approx(0.0, abs=1e-12)


@given(st.floats(0.02, 0.12), st.integers(3, 40), st.floats(0, 2 * np.pi))
@settings(max_examples=30, deadline=None)
def test_holonomy_homotopy_invariance(rad, nseg, phase):
    # wiggly loops around the same branch point agree with the circle
    cfg = dm.canonical_two_point(h=1.0 / 64)
    p = cfg.points[0]
    ang = np.linspace(0, 2 * np.pi, max(nseg, 8), endpoint=False) + phase
    wig = rad * (1.0 + 0.2 * np.sin(3 * ang))
    loop = p + wig * np.exp(1j * ang)
    try:
        sign, trans = dm.holonomy_of_loop(cfg, loop)
    except ValueError:
        return  # loop touched the cut: rejected, not wrong
    assert sign == -1
    assert trans == pytest.approx(cfg.translations[0])


def test_crossing_table_is_complete_and_signed():
    cfg = dm.canonical_two_point(h=1.0 / 64)
    signs, offsets = cfg.edge_transitions()
    crossed = [eid for eid in cfg.edge_cross]
    assert all(signs[eid] == -1.0 for eid in crossed if len(cfg.edge_cross[eid]) % 2 == 1)
    assert np.all(signs[[e for e in range(len(signs)) if e not in cfg.edge_cross]] == 1.0)
    # offsets on singly-crossed edges equal the cut translation
    for eid in crossed:
        if len(cfg.edge_cross[eid]) == 1:
            assert offsets[eid] == pytest.approx(cfg.translations[cfg.edge_cross[eid][0]])


def test_edge_transitions_with_scaled_class():
    cfg = dm.canonical_two_point(h=1.0 / 64)
    s1, o1 = cfg.edge_transitions()
    s2, o2 = cfg.edge_transitions(2.0 * cfg.translations)
    assert np.array_equal(s1, s2)
    assert np.allclose(o2, 2.0 * o1)


def test_json_round_trip_bit_exact(tmp_path):
    cfg = dm.canonical_four_point(h=1.0 / 64)
    path = tmp_path / "cfg.json"
    dm.save_config(cfg, path)
    cfg2 = dm.load_config(path)
    d1, d2 = dm.config_to_dict(cfg), dm.config_to_dict(cfg2)
    assert json.dumps(d1, sort_keys=True) == json.dumps(d2, sort_keys=True)
    assert cfg2.gauge_tag == cfg.gauge_tag
    assert np.array_equal(cfg2.points, cfg.points)


def test_schema_rejects_unknown_keys(tmp_path):
    cfg = dm.canonical_two_point(h=1.0 / 64)
    d = dm.config_to_dict(cfg)
    d["surprise"] = 1
    with pytest.raises(dm.ValidationError, match="schema"):
        dm.config_from_dict(d)


def test_schema_rejects_wrong_types():
    cfg = dm.canonical_two_point(h=1.0 / 64)
    d = dm.config_to_dict(cfg)
    d["grid"]["h"] = "fine"
    with pytest.raises(dm.ValidationError, match="schema"):
        dm.config_from_dict(d)


def test_plane_chart_accepts_single_point_with_boundary_cut():
    dom = dm.PlaneChartDomain(radius=1.0)
    h = 1 / 64
    # cut from the point out through the boundary
    cut = [[0.0 + 0j, 1.2 + 0.013j]]
    cfg = dm.build_config(dom, [0.0 + 0j], [0.0], dm.GridSpec(h=h, r_c=0.125),
                          cuts=cut)
    assert cfg.n_points == 1
    assert cfg.cut_endpoints[0][1] == -1


def test_anchored_sqrt_and_regauge():
    f = dm.Frame(anchor=0.3, sign=1)
    z = 0.5 * np.exp(1j * np.array([0.4, 3.0, 6.0]))
    s = dm.anchored_sqrt(z, f)
    assert np.allclose(s * s, z)
    # discontinuity sits on the anchor ray: values just above/below differ by -1
    above = dm.anchored_sqrt(0.5 * np.exp(1j * (f.anchor + 1e-9)), f)
    below = dm.anchored_sqrt(0.5 * np.exp(1j * (f.anchor - 1e-9)), f)
    assert np.allclose(above, -below, rtol=1e-6)
    # regauge flips exactly on the wedge between cut ray and anchor ray
    signs = dm.regauge_signs(np.exp(1j * np.array([0.1, 0.25, 0.5])), 0.0, 0.3)
    assert list(signs) == [-1.0, -1.0, 1.0]
