"""Domains, branch configurations, cut systems and their validation.

The computational arena is a flat 2-D domain (torus, or a disk chart of the
plane) with an even set of branch points, a system of disjoint polyline cuts
pairing them, and a per-cut translation (the additive part of the reflection
holonomy across the cut).  Validation snaps cuts away from grid nodes,
builds the per-edge crossing tables used by the solver, and caches per-point
local frames (branch anchor, local cut angle, reflection center).

Crossing a cut acts on the field by u -> -u + c; this is an involution, so
the transition does not depend on the crossing direction.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, asdict

import numpy as np


class ValidationError(ValueError):
    """Raised with a list of violated invariants and the offending elements."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("invalid configuration:\n  - " + "\n  - ".join(self.violations))


@dataclass(frozen=True)
class TorusDomain:
    periods: tuple[float, float]

    kind = "torus"

    def __post_init__(self):
        if self.periods[0] <= 0 or self.periods[1] <= 0:
            raise ValidationError([f"torus periods must be positive, got {self.periods}"])


@dataclass(frozen=True)
class PlaneChartDomain:
    radius: float
    center: complex = 0j
    far_field: str = "zero"  # zero | oracle_supplied

    kind = "plane_chart"

    def __post_init__(self):
        if self.radius <= 0:
            raise ValidationError([f"plane chart radius must be positive, got {self.radius}"])
        if self.far_field not in ("zero", "oracle_supplied"):
            raise ValidationError([f"unknown far_field {self.far_field!r}"])


@dataclass(frozen=True)
class GridSpec:
    h: float
    r_c: float  # cutoff radius for singularity subtraction

    def __post_init__(self):
        if self.h <= 0:
            raise ValidationError(["grid spacing must be positive"])
        if self.r_c < 8.0 * self.h:
            raise ValidationError([f"cutoff radius r_c={self.r_c} below 8h={8 * self.h}"])


@dataclass(frozen=True)
class Frame:
    """Per-point branch reference: sqrt is sign * sqrt(r) * exp(i*theta/2)
    with theta measured in [anchor, anchor + 2*pi)."""

    anchor: float
    sign: int = 1

    def __post_init__(self):
        if self.sign not in (1, -1):
            raise ValidationError(["frame sign must be +-1"])


def anchored_sqrt(dz, frame: Frame):
    """Branch of sqrt(dz) with discontinuity along the frame's anchor ray."""
    dz = np.asarray(dz, dtype=complex)
    theta = frame.anchor + np.mod(np.angle(dz) - frame.anchor, 2.0 * np.pi)
    return frame.sign * np.sqrt(np.abs(dz)) * np.exp(0.5j * theta)


def regauge_signs(dz, cut_angle: float, anchor: float):
    """Sign relating the cut gauge to the anchored branch at each sample.

    Field samples live in the gauge whose discontinuity is the local cut
    ray; the fit basis is anchored at the frame ray.  The two branches agree
    except on the wedge swept from the cut ray to the anchor ray (going
    counterclockwise), where they differ by -1.
    """
    dz = np.asarray(dz, dtype=complex)
    rel = np.mod(np.angle(dz) - cut_angle, 2.0 * np.pi)
    wedge = np.mod(anchor - cut_angle, 2.0 * np.pi)
    return np.where(rel < wedge, -1.0, 1.0)


# ---------------------------------------------------------------------------
# geometry helpers
# ---------------------------------------------------------------------------

def _seg_intersections(p, q, a, b):
    """Proper intersections of edge segments [p_i, q_i] with segment [a, b].

    Returns (indices, s_params, touch_indices); s is the parameter along
    [p, q].  Touching / collinear contacts land in touch_indices so callers
    can reject the degenerate geometry instead of guessing a sign.
    """
    p = np.asarray(p, dtype=complex)
    q = np.asarray(q, dtype=complex)
    d = q - p
    ab = b - a

    def cross(u, v):
        return np.real(u) * np.imag(v) - np.imag(u) * np.real(v)

    d1 = cross(ab, p - a)
    d2 = cross(ab, q - a)
    d3 = cross(d, a - p)
    d4 = cross(d, b - p)
    eps = 1e-12 * abs(ab) * (np.abs(d) + abs(ab))
    proper = (d1 * d2 < -eps**2 * 0) & (d3 * d4 < 0) & (d1 * d2 < 0)
    near1 = (np.abs(d1) <= eps) | (np.abs(d2) <= eps)
    near2 = (np.abs(d3) <= eps) | (np.abs(d4) <= eps)
    touch = (near1 & (d3 * d4 <= 0)) | (near2 & (d1 * d2 <= 0))
    idx = np.nonzero(proper & ~touch)[0]
    s = d1[idx] / (d1[idx] - d2[idx])
    return idx, s, np.nonzero(touch)[0]


def _point_segment_dist(pts, a, b):
    ab = b - a
    L2 = abs(ab) ** 2
    if L2 == 0.0:
        return np.abs(pts - a)
    t = np.clip(((pts - a) * np.conj(ab)).real / L2, 0.0, 1.0)
    return np.abs(pts - (a + t * ab))


def _polyline_segments(vertices):
    return [(vertices[k], vertices[k + 1]) for k in range(len(vertices) - 1)]


# ---------------------------------------------------------------------------
# grids
# ---------------------------------------------------------------------------

class TorusGrid:
    def __init__(self, periods, h):
        L1, L2 = periods
        nx, ny = round(L1 / h), round(L2 / h)
        if abs(nx * h - L1) > 1e-9 * L1 or abs(ny * h - L2) > 1e-9 * L2:
            raise ValidationError([f"grid spacing {h} does not divide periods {periods}"])
        self.kind = "torus"
        self.h, self.nx, self.ny = h, nx, ny
        self.periods = (L1, L2)
        self.n_nodes = nx * ny
        i = np.arange(nx)
        j = np.arange(ny)
        self.xy = np.tile(i, ny) * h + 1j * np.repeat(j, nx) * h
        # edges: east then north, segment in unwrapped coordinates
        ids = np.arange(self.n_nodes).reshape(ny, nx)
        east = np.stack([ids.ravel(), np.roll(ids, -1, axis=1).ravel()], axis=1)
        north = np.stack([ids.ravel(), np.roll(ids, -1, axis=0).ravel()], axis=1)
        self.edges = np.concatenate([east, north], axis=0)
        seg_a = np.concatenate([self.xy, self.xy])
        seg_b = np.concatenate([self.xy + h, self.xy + 1j * h])
        self.edge_a, self.edge_b = seg_a, seg_b
        self.interior = np.ones(self.n_nodes, dtype=bool)

    def min_image(self, dz):
        L1, L2 = self.periods
        x = np.mod(np.real(dz) + L1 / 2, L1) - L1 / 2
        y = np.mod(np.imag(dz) + L2 / 2, L2) - L2 / 2
        return x + 1j * y

    def lattice_shifts(self):
        L1, L2 = self.periods
        return [sx + 1j * sy for sx in (-L1, 0.0, L1) for sy in (-L2, 0.0, L2)]


class DiskGrid:
    def __init__(self, center, radius, h, collar: int = 2):
        self.kind = "disk"
        self.h = h
        self.center, self.radius = center, radius
        n_half = int(math.ceil((radius + (collar + 1) * h) / h))
        i = np.arange(-n_half, n_half + 1)
        X, Y = np.meshgrid(i * h, i * h)
        self.xy = (center + (X + 1j * Y)).ravel()
        self.nx = self.ny = 2 * n_half + 1
        self.n_nodes = self.xy.size
        ids = np.arange(self.n_nodes).reshape(self.ny, self.nx)
        r = np.abs(self.xy - center)
        self.interior = r < radius
        east = np.stack([ids[:, :-1].ravel(), ids[:, 1:].ravel()], axis=1)
        north = np.stack([ids[:-1, :].ravel(), ids[1:, :].ravel()], axis=1)
        edges = np.concatenate([east, north], axis=0)
        keep = self.interior[edges[:, 0]] | self.interior[edges[:, 1]]
        self.edges = edges[keep]
        self.edge_a = self.xy[self.edges[:, 0]]
        self.edge_b = self.xy[self.edges[:, 1]]
        # boundary nodes: non-interior endpoints of kept edges
        bd = np.zeros(self.n_nodes, dtype=bool)
        for col in (0, 1):
            e = self.edges[:, col]
            bd[e[~self.interior[e]]] = True
        self.boundary = bd

    def min_image(self, dz):
        return np.asarray(dz, dtype=complex)

    def lattice_shifts(self):
        return [0j]


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------

@dataclass
class ProblemConfig:
    """Validated bundle: domain, branch points, snapped cuts, translations,
    grid, frames, and the cached crossing tables."""

    domain: object
    points: np.ndarray               # complex branch points
    cuts: list                       # list of vertex arrays (complex)
    cut_endpoints: list              # (i, j) point indices; j = -1: boundary
    translations: np.ndarray         # one per cut
    grid_spec: GridSpec
    frames: list
    grid: object = None
    edge_cross: dict = field(default_factory=dict)   # edge id -> [cut ids in order]
    cut_angles: np.ndarray = None    # local cut departure angle per point
    point_cut: np.ndarray = None     # cut index attached to each point
    gauge_tag: str = ""

    @property
    def h(self) -> float:
        return self.grid_spec.h

    @property
    def n_points(self) -> int:
        return len(self.points)

    def min_separation(self) -> float:
        pts = self.points
        grid = self.grid
        best = np.inf
        for a in range(len(pts)):
            for b in range(a + 1, len(pts)):
                best = min(best, abs(grid.min_image(pts[a] - pts[b])))
        if self.domain.kind == "plane_chart":
            for p in pts:
                best = min(best, self.domain.radius - abs(p - self.domain.center))
        return best

    def branch_sqrt(self, point_index: int, dz):
        """Anchored square root in the stored frame of the given point."""
        return anchored_sqrt(dz, self.frames[point_index])

    def local_regauge(self, point_index: int, dz):
        f = self.frames[point_index]
        return regauge_signs(dz, self.cut_angles[point_index], f.anchor)

    def reflection_center(self, point_index: int, translations=None) -> float:
        c = self.translations if translations is None else translations
        return 0.5 * c[self.point_cut[point_index]]

    def edge_transitions(self, translations=None):
        """Per-edge (sign, offset) for the given translation data."""
        c = self.translations if translations is None else np.asarray(translations, float)
        n_edges = len(self.grid.edges)
        signs = np.ones(n_edges)
        offsets = np.zeros(n_edges)
        for eid, cuts in self.edge_cross.items():
            s, a = 1.0, 0.0
            for k in cuts:
                s, a = -s, -a + c[k]
            signs[eid], offsets[eid] = s, a
        return signs, offsets

    def with_translations(self, translations) -> "ProblemConfig":
        cfg = ProblemConfig(**{**self.__dict__, "translations": np.asarray(translations, float)})
        return cfg


def _snap_cut(p: complex, q: complex, grid, retries: int = 25):
    """Polyline from p to q whose segments stay clear of grid nodes.

    A single interior waypoint bows the cut off the lattice; the bow height
    is retried until every node keeps a safe distance from every segment.
    Straight end segments keep the local branch geometry exact near the
    branch points.
    """
    h = grid.h
    direction = (q - p) / abs(q - p)
    normal = direction * 1j
    for k in range(retries):
        # bow sideways and slide along the cut so the waypoint clears both
        # lattice line families (branch points may sit exactly on nodes)
        delta = h * (0.37 + 0.618 * k * 0.37)
        slide = h * (0.2371 + 0.618 * k * 0.1371)
        mid = 0.5 * (p + q) + delta * normal + slide * direction
        vertices = [p, mid, q]
        fx = abs(math.remainder(mid.real, h)) / h
        fy = abs(math.remainder(mid.imag, h)) / h
        if fx < 1e-3 or fy < 1e-3:
            continue
        ok = True
        for a, b in _polyline_segments(vertices):
            for shift in grid.lattice_shifts():
                d = _point_segment_dist(grid.xy, a + shift, b + shift)
                # exclude the endpoints themselves (branch points may sit on nodes)
                mask = (np.abs(grid.xy - (a + shift)) > 1e-12) & (np.abs(grid.xy - (b + shift)) > 1e-12)
                if np.any(d[mask] < 1e-7 * max(1.0, abs(b - a))):
                    ok = False
                    break
            if not ok:
                break
        if ok:
            return np.array(vertices, dtype=complex)
    raise ValidationError([f"could not snap cut {p} -> {q} clear of grid nodes"])


def _build_grid(domain, spec: GridSpec):
    if domain.kind == "torus":
        return TorusGrid(domain.periods, spec.h)
    return DiskGrid(domain.center, domain.radius, spec.h)


def build_config(domain, points, translations, grid: GridSpec,
                 cuts=None, frames=None) -> ProblemConfig:
    """Validate and assemble a full problem configuration.

    cuts: optional list of explicit polylines (vertex lists); by default
    consecutive point pairs (0-1, 2-3, ...) are joined by snapped cuts.
    frames: optional list of Frame; default anchors at the local cut angle.
    """
    violations = []
    points = np.asarray(points, dtype=complex)
    g = _build_grid(domain, grid)

    if domain.kind == "torus":
        L1, L2 = domain.periods
        pts_in = np.all((points.real >= 0) & (points.real < L1)
                        & (points.imag >= 0) & (points.imag < L2))
        if not pts_in:
            violations.append(f"branch points must lie in the fundamental domain [0,{L1})x[0,{L2})")
        if len(points) % 2 != 0 or len(points) < 2:
            violations.append(f"torus needs an even number >= 2 of branch points, got {len(points)}")
    else:
        rr = np.abs(points - domain.center)
        if np.any(rr >= domain.radius - 4 * grid.h):
            bad = points[rr >= domain.radius - 4 * grid.h]
            violations.append(f"branch points too close to the chart boundary: {bad}")
        if len(points) < 1:
            violations.append("need at least one branch point")

    # pairwise separations (periodic images included on the torus)
    min_sep = np.inf
    for a in range(len(points)):
        for b in range(a + 1, len(points)):
            d = abs(g.min_image(points[a] - points[b]))
            min_sep = min(min_sep, d)
            if d < 10.0 * grid.h:
                violations.append(
                    f"branch points {a} and {b} separated by {d:.4g} < 10h = {10 * grid.h:.4g}")
    if grid.r_c > 0.5 * min_sep:
        violations.append(f"cutoff disks overlap: r_c={grid.r_c} > half separation {0.5 * min_sep:.4g}")

    # default pairing: consecutive pairs with snapped straight cuts
    if cuts is None:
        if len(points) % 2 != 0:
            violations.append("default cut pairing needs an even point count")
            raise ValidationError(violations)
        cut_endpoints = [(2 * k, 2 * k + 1) for k in range(len(points) // 2)]
        cut_vertices = []
        for (i, j) in cut_endpoints:
            cut_vertices.append(_snap_cut(points[i], points[j], g))
    else:
        cut_vertices = [np.asarray(cv, dtype=complex) for cv in cuts]
        cut_endpoints = []
        for cv in cut_vertices:
            ends = []
            for v in (cv[0], cv[-1]):
                hit = np.nonzero(np.abs(points - v) < 1e-12)[0]
                ends.append(int(hit[0]) if hit.size else -1)
            if ends[0] == -1 and ends[1] == -1:
                violations.append(f"cut {cv} joins no branch point")
            cut_endpoints.append(tuple(ends))

    translations = np.asarray(translations, dtype=float)
    if len(translations) != len(cut_vertices):
        violations.append(
            f"{len(cut_vertices)} cuts but {len(translations)} translations")

    # each point is the endpoint of exactly one cut
    point_cut = -np.ones(len(points), dtype=int)
    for k, (i, j) in enumerate(cut_endpoints):
        for e in (i, j):
            if e >= 0:
                if point_cut[e] >= 0:
                    violations.append(f"branch point {e} is an endpoint of two cuts")
                point_cut[e] = k
    for i, k in enumerate(point_cut):
        if k < 0:
            violations.append(f"branch point {i} is not an endpoint of any cut")

    # cuts pairwise disjoint and clear of other branch points
    shifts = g.lattice_shifts()
    segs = []
    for k, cv in enumerate(cut_vertices):
        segs += [(a, b, k) for (a, b) in _polyline_segments(cv)]
    for m in range(len(segs)):
        a1, b1, k1 = segs[m]
        for mm in range(m + 1, len(segs)):
            a2, b2, k2 = segs[mm]
            if k1 == k2:
                continue
            for shift in shifts:
                idx, s, touch = _seg_intersections(
                    np.array([a1 + shift]), np.array([b1 + shift]), a2, b2)
                if idx.size or touch.size:
                    violations.append(f"cuts {k1} and {k2} intersect")
                    break
    # foreign cuts must stay out of the cutoff disks: the singular ansatz
    # and the fit transport assume only the point's own cut enters its disk
    clearance = max(2.0 * grid.h, grid.r_c)
    for k, cv in enumerate(cut_vertices):
        i, j = cut_endpoints[k]
        others = [p for idx_p, p in enumerate(points) if idx_p not in (i, j)]
        for (a, b) in _polyline_segments(cv):
            for p in others:
                for shift in shifts:
                    if _point_segment_dist(np.array([p + shift]), a, b)[0] < clearance:
                        violations.append(
                            f"cut {k} passes within max(2h, r_c)={clearance:.4g} of branch point {p}")

    if violations:
        raise ValidationError(sorted(set(violations)))

    # local cut angles and default frames
    cut_angles = np.zeros(len(points))
    for idx_p in range(len(points)):
        k = point_cut[idx_p]
        cv = cut_vertices[k]
        if abs(cv[0] - points[idx_p]) < 1e-12:
            d = cv[1] - cv[0]
        else:
            d = cv[-2] - cv[-1]
        cut_angles[idx_p] = math.atan2(d.imag, d.real)
    if frames is None:
        frames = [Frame(anchor=cut_angles[i], sign=1) for i in range(len(points))]

    cfg = ProblemConfig(
        domain=domain, points=points, cuts=cut_vertices,
        cut_endpoints=cut_endpoints, translations=translations,
        grid_spec=grid, frames=list(frames), grid=g,
        cut_angles=cut_angles, point_cut=point_cut,
    )
    cfg.edge_cross = _crossing_table(cfg)
    cfg.gauge_tag = _gauge_tag(cfg)

    # invariant: a small loop around every branch point crosses exactly its
    # own cut, exactly once
    loop_violations = []
    for idx_p in range(len(points)):
        radius = max(2.5 * grid.h, min(0.25 * min_sep, 0.9 * grid.r_c))
        counts = _loop_cut_counts(cfg, points[idx_p], radius)
        own = counts.pop(point_cut[idx_p], 0)
        if own != 1 or any(v % 2 for v in counts.values()):
            loop_violations.append(
                f"small loop around point {idx_p} crosses cuts {dict(counts, own=own)}")
    if loop_violations:
        raise ValidationError(loop_violations)
    return cfg


def _crossing_table(cfg: ProblemConfig) -> dict:
    grid = cfg.grid
    table = {}
    for k, cv in enumerate(cfg.cuts):
        for (a, b) in _polyline_segments(cv):
            # branch points terminating this segment: an edge meeting the
            # cut exactly there shares the vertex and does not cross (the
            # cut is open at its endpoints)
            terminals = [v for v in (a, b)
                         if np.min(np.abs(cfg.points - v)) < 1e-12]
            for shift in grid.lattice_shifts():
                idx, s, touch = _seg_intersections(grid.edge_a, grid.edge_b, a + shift, b + shift)
                if touch.size:
                    bad = []
                    for eid in touch:
                        pe, qe = grid.edge_a[eid], grid.edge_b[eid]
                        at_terminal = any(
                            min(abs(pe - (v + shift)), abs(qe - (v + shift))) < 1e-12
                            for v in terminals)
                        if not at_terminal:
                            bad.append(int(eid))
                    if bad:
                        raise ValidationError(
                            [f"degenerate cut/edge contact on cut {k}, edges {bad[:4]}"])
                for eid, sv in zip(idx, s):
                    table.setdefault(int(eid), []).append((float(sv), k))
    out = {}
    for eid, lst in table.items():
        lst.sort()
        out[eid] = [k for (_, k) in lst]
    return out


def _gauge_tag(cfg: ProblemConfig) -> str:
    import hashlib
    payload = json.dumps({
        "cuts": [[(v.real, v.imag) for v in cv] for cv in cfg.cuts],
        "translations": list(map(float, cfg.translations)),
        "frames": [(f.anchor, f.sign) for f in cfg.frames],
    }, sort_keys=True)
    return hashlib.sha256(payload.encode()).hexdigest()[:16]


def _loop_cut_counts(cfg: ProblemConfig, center: complex, radius: float) -> dict:
    angles = np.linspace(0.0, 2.0 * np.pi, 129)
    loop = center + radius * np.exp(1j * angles)
    counts = {}
    for (a, b) in zip(loop[:-1], loop[1:]):
        for k, cv in enumerate(cfg.cuts):
            for (ca, cb) in _polyline_segments(cv):
                for shift in cfg.grid.lattice_shifts():
                    idx, s, touch = _seg_intersections(
                        np.array([a]), np.array([b]), ca + shift, cb + shift)
                    if idx.size:
                        counts[k] = counts.get(k, 0) + 1
    return counts


# ---------------------------------------------------------------------------
# holonomy of explicit loops
# ---------------------------------------------------------------------------

def holonomy_of_loop(cfg: ProblemConfig, loop_points) -> tuple[int, float]:
    """Compose the reflection transitions u -> -u + c_k along a closed loop.

    The loop is a polyline of complex vertices (closed automatically).
    Returns (sign, translation).  Loops passing through a cut endpoint or
    touching a cut tangentially are rejected.
    """
    pts = list(np.asarray(loop_points, dtype=complex))
    if abs(pts[0] - pts[-1]) > 1e-12:
        pts.append(pts[0])
    crossings = []
    for n_seg, (a, b) in enumerate(_polyline_segments(pts)):
        for k, cv in enumerate(cfg.cuts):
            for (ca, cb) in _polyline_segments(cv):
                for shift in cfg.grid.lattice_shifts():
                    idx, s, touch = _seg_intersections(
                        np.array([a]), np.array([b]), ca + shift, cb + shift)
                    if touch.size:
                        raise ValueError("loop touches a cut or cut endpoint")
                    if idx.size:
                        crossings.append((n_seg + float(s[0]), k))
    crossings.sort()
    sign, trans = 1.0, 0.0
    for (_, k) in crossings:
        sign, trans = -sign, -trans + cfg.translations[k]
    return int(sign), float(trans)


# ---------------------------------------------------------------------------
# JSON round trip
# ---------------------------------------------------------------------------

CONFIG_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["schema_version", "domain", "branch_points", "translations", "grid"],
    "properties": {
        "schema_version": {"const": 1},
        "domain": {
            "type": "object",
            "additionalProperties": False,
            "required": ["kind"],
            "properties": {
                "kind": {"enum": ["torus", "plane_chart"]},
                "periods": {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2},
                "radius": {"type": "number"},
                "center": {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2},
                "far_field": {"enum": ["zero", "oracle_supplied"]},
            },
        },
        "branch_points": {"type": "array",
                          "items": {"type": "array", "items": {"type": "number"},
                                    "minItems": 2, "maxItems": 2}},
        "cuts": {"type": "array",
                 "items": {"type": "array",
                           "items": {"type": "array", "items": {"type": "number"},
                                     "minItems": 2, "maxItems": 2}}},
        "translations": {"type": "array", "items": {"type": "number"}},
        "grid": {
            "type": "object",
            "additionalProperties": False,
            "required": ["h", "r_c"],
            "properties": {"h": {"type": "number"}, "r_c": {"type": "number"}},
        },
        "frames": {"type": "array",
                   "items": {"type": "array",
                             "items": {"type": "number"}, "minItems": 2, "maxItems": 2}},
        "curve": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "branch_values": {"type": "array",
                                  "items": {"type": "array", "items": {"type": "number"},
                                            "minItems": 2, "maxItems": 2}},
                "class_coefficient": {"type": "array", "items": {"type": "number"},
                                      "minItems": 2, "maxItems": 2},
            },
        },
    },
}


def config_to_dict(cfg: ProblemConfig) -> dict:
    d = {"schema_version": 1}
    if cfg.domain.kind == "torus":
        d["domain"] = {"kind": "torus", "periods": list(cfg.domain.periods)}
    else:
        d["domain"] = {"kind": "plane_chart", "radius": cfg.domain.radius,
                       "center": [cfg.domain.center.real, cfg.domain.center.imag],
                       "far_field": cfg.domain.far_field}
    d["branch_points"] = [[p.real, p.imag] for p in cfg.points]
    d["cuts"] = [[[v.real, v.imag] for v in cv] for cv in cfg.cuts]
    d["translations"] = [float(c) for c in cfg.translations]
    d["grid"] = {"h": cfg.grid_spec.h, "r_c": cfg.grid_spec.r_c}
    d["frames"] = [[f.anchor, float(f.sign)] for f in cfg.frames]
    return d


def config_from_dict(d: dict) -> ProblemConfig:
    import jsonschema
    try:
        jsonschema.validate(d, CONFIG_SCHEMA)
    except jsonschema.ValidationError as e:
        raise ValidationError([f"config schema: {e.message} (at {'/'.join(map(str, e.path))})"])
    dom = d["domain"]
    if dom["kind"] == "torus":
        domain = TorusDomain(tuple(dom["periods"]))
    else:
        center = dom.get("center", [0.0, 0.0])
        domain = PlaneChartDomain(dom["radius"], center[0] + 1j * center[1],
                                  dom.get("far_field", "zero"))
    points = [x + 1j * y for (x, y) in d["branch_points"]]
    cuts = None
    if "cuts" in d:
        cuts = [[x + 1j * y for (x, y) in cv] for cv in d["cuts"]]
    frames = None
    if "frames" in d:
        frames = [Frame(anchor=a, sign=int(s)) for (a, s) in d["frames"]]
    grid = GridSpec(h=d["grid"]["h"], r_c=d["grid"]["r_c"])
    return build_config(domain, points, d["translations"], grid, cuts=cuts, frames=frames)


def save_config(cfg: ProblemConfig, path):
    with open(path, "w") as f:
        json.dump(config_to_dict(cfg), f, indent=1)


def load_config(path) -> ProblemConfig:
    with open(path) as f:
        return config_from_dict(json.load(f))


# ---------------------------------------------------------------------------
# canonical fixtures
# ---------------------------------------------------------------------------

def canonical_two_point(h: float = 1.0 / 128, c: float = 1.0,
                        r_c: float | None = None) -> ProblemConfig:
    """Unit torus, branch points 0.25 and 0.75 on the real axis, one cut."""
    if r_c is None:
        r_c = max(8.0 * h, 1.0 / 16.0)
    return build_config(TorusDomain((1.0, 1.0)), [0.25 + 0j, 0.75 + 0j],
                        [c], GridSpec(h=h, r_c=r_c))


def canonical_four_point(h: float = 1.0 / 128, c=(1.0, 0.6),
                         r_c: float | None = None) -> ProblemConfig:
    """Generic 4-point torus configuration used by the deformation tests."""
    if r_c is None:
        r_c = max(8.0 * h, 1.0 / 16.0)
    pts = [0.27 + 0.24j, 0.73 + 0.26j, 0.74 + 0.77j, 0.24 + 0.72j]
    return build_config(TorusDomain((1.0, 1.0)), pts, list(c), GridSpec(h=h, r_c=r_c))
