"""Twisted 5-point Laplace solves on branched 2-D configurations.

The discrete operator couples neighbouring nodes through the cut-crossing
transitions u -> -u + c: an edge crossing a cut carries weight -1 (sign
part) and pushes the affine part onto the right-hand side.  The resulting
matrix S = 4I - signed adjacency is symmetric positive definite whenever
the branch set is nonempty (no consistent global sign exists), which is the
discrete form of the uniqueness of the harmonic section.

Solves with prescribed singular behaviour subtract a cutoff singular
ansatz s = chi(r) * Re(sigma / sqrt(z - p)); since the ansatz is exactly
homogeneous of degree -1/2, laplace(s) = chi''(r) * s / chi pointwise and
the correction right-hand side is closed form, supported on the cutoff
annulus.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .domain import ProblemConfig

DIRECT_LIMIT = 2_600_000  # beyond this many unknowns fall back to CG
RESIDUAL_RTOL = 1e-10


class SolveError(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# cutoff profile (C^2 quintic step)
# ---------------------------------------------------------------------------

def cutoff(r, r_c: float):
    """C^2 bump: 1 on r <= r_c/2, 0 on r >= r_c, quintic in between."""
    r = np.asarray(r, dtype=float)
    u = np.clip(2.0 * r / r_c - 1.0, 0.0, 1.0)
    s2 = 6 * u**5 - 15 * u**4 + 10 * u**3
    return 1.0 - s2


def cutoff_d2(r, r_c: float):
    """Second derivative of the cutoff profile with respect to r."""
    r = np.asarray(r, dtype=float)
    u = 2.0 * r / r_c - 1.0
    inside = (u > 0.0) & (u < 1.0)
    d2 = np.zeros_like(r)
    uu = u[inside]
    d2[inside] = -(120 * uu**3 - 180 * uu**2 + 60 * uu) * (2.0 / r_c) ** 2
    return d2


# ---------------------------------------------------------------------------
# assembled system
# ---------------------------------------------------------------------------

@dataclass
class TwistedSystem:
    config: ProblemConfig
    matrix: sp.csr_matrix          # SPD stencil over unknowns
    unknown_ids: np.ndarray        # node id per unknown
    node_to_unknown: np.ndarray    # -1 for non-unknowns
    boundary_ids: np.ndarray       # node ids holding Dirichlet data (disk)
    edge_signs: np.ndarray
    _lu: object = None
    _cg_count: int = 0

    @property
    def n_unknowns(self) -> int:
        return self.matrix.shape[0]

    def solve(self, b, method: str = "auto") -> np.ndarray:
        """Solve S x = b to the residual tolerance 1e-10 * |b|_inf.

        method: direct (cached sparse LU, one refinement step) | cg
        (diagonally preconditioned conjugate gradient, deterministic) |
        auto (direct below DIRECT_LIMIT unknowns).
        """
        b = np.asarray(b, dtype=float)
        scale = np.max(np.abs(b))
        if scale == 0.0:
            return np.zeros_like(b)
        if method == "auto":
            method = "direct" if self.n_unknowns <= DIRECT_LIMIT else "cg"
        if method == "direct":
            if self._lu is None:
                self._lu = spla.splu(self.matrix.tocsc())
            x = self._lu.solve(b)
            r = b - self.matrix @ x
            if np.max(np.abs(r)) > RESIDUAL_RTOL * scale:
                x = x + self._lu.solve(r)
        elif method == "cg":
            M = sp.diags(1.0 / self.matrix.diagonal())
            x, info = spla.cg(self.matrix, b, rtol=1e-13, atol=1e-13 * scale,
                              maxiter=200 * int(np.sqrt(self.n_unknowns) + 100), M=M)
            if info != 0:
                raise SolveError(f"CG did not converge (info={info})")
        else:
            raise ValueError(f"unknown method {method!r}")
        resid = np.max(np.abs(b - self.matrix @ x))
        if resid > RESIDUAL_RTOL * scale:
            raise SolveError(f"residual {resid:.3e} exceeds {RESIDUAL_RTOL * scale:.3e}")
        return x


def assemble(config: ProblemConfig) -> TwistedSystem:
    """Build the signed 5-point matrix over the unknown nodes."""
    grid = config.grid
    signs, _ = config.edge_transitions()
    interior = grid.interior
    n_nodes = grid.n_nodes
    node_to_unknown = -np.ones(n_nodes, dtype=np.int64)
    unknown_ids = np.nonzero(interior)[0]
    node_to_unknown[unknown_ids] = np.arange(unknown_ids.size)
    boundary_ids = (np.nonzero(grid.boundary)[0]
                    if hasattr(grid, "boundary") else np.array([], dtype=np.int64))

    e = grid.edges
    both = interior[e[:, 0]] & interior[e[:, 1]]
    rows = np.concatenate([node_to_unknown[e[both, 0]], node_to_unknown[e[both, 1]]])
    cols = np.concatenate([node_to_unknown[e[both, 1]], node_to_unknown[e[both, 0]]])
    vals = np.concatenate([-signs[both], -signs[both]])
    diag = np.zeros(unknown_ids.size)
    for col in (0, 1):
        np.add.at(diag, node_to_unknown[e[interior[e[:, col]], col]], 1.0)
    S = sp.coo_matrix((np.concatenate([vals, diag]),
                       (np.concatenate([rows, np.arange(unknown_ids.size)]),
                        np.concatenate([cols, np.arange(unknown_ids.size)]))),
                      shape=(unknown_ids.size, unknown_ids.size)).tocsr()
    return TwistedSystem(config, S, unknown_ids, node_to_unknown, boundary_ids, signs)


# ---------------------------------------------------------------------------
# fields
# ---------------------------------------------------------------------------

@dataclass
class TwistedField:
    """Grid sampling of a section in the cut gauge.

    kind "affine": section of the affine bundle (carries the translations);
    kind "linear": section of the vector bundle (translations all zero).
    Comparisons require identical config and gauge tag.
    """

    values: np.ndarray
    config: ProblemConfig
    translations: np.ndarray
    kind: str
    gauge_tag: str
    report: dict = field(default_factory=dict)

    def energy(self) -> float:
        """Gauge-invariant Dirichlet energy sum over edges of the
        transported difference squared."""
        grid = self.config.grid
        signs, offsets = self.config.edge_transitions(self.translations)
        e = grid.edges
        u = self.values
        diffs = signs * u[e[:, 1]] + offsets - u[e[:, 0]]
        return float(np.nansum(diffs**2))

    def center(self, point_index: int) -> float:
        if self.kind == "affine":
            return self.config.reflection_center(point_index, self.translations)
        return 0.0

    def annulus(self, point_index: int, r1: float, r2: float):
        """Node samples with r1 <= |z - p| <= r2 (minimal image)."""
        grid = self.config.grid
        dz = grid.min_image(grid.xy - self.config.points[point_index])
        r = np.abs(dz)
        mask = (r >= r1) & (r <= r2) & ~np.isnan(self.values)
        return dz[mask], self.values[mask]


def _boundary_values(config, boundary, node_ids):
    if boundary is None:
        return np.zeros(node_ids.size)
    z = config.grid.xy[node_ids]
    if callable(boundary):
        return np.asarray(boundary(z), dtype=float)
    return np.asarray(boundary, dtype=float)


def _affine_rhs(system: TwistedSystem, translations, gvals) -> np.ndarray:
    """Offsets and Dirichlet contributions of the transported stencil."""
    config, grid = system.config, system.config.grid
    signs, offsets = config.edge_transitions(translations)
    e = grid.edges
    interior = grid.interior
    n2u = system.node_to_unknown
    b = np.zeros(system.n_unknowns)
    gfull = np.zeros(grid.n_nodes)
    if system.boundary_ids.size:
        gfull[system.boundary_ids] = gvals
    for a_col, b_col in ((0, 1), (1, 0)):
        ia = e[:, a_col]
        jb = e[:, b_col]
        m = interior[ia]
        np.add.at(b, n2u[ia[m]], offsets[m])
        mb = m & ~interior[jb]
        np.add.at(b, n2u[ia[mb]], signs[mb] * gfull[jb[mb]])
    return b


def solve_harmonic_plus(config: ProblemConfig, translations=None,
                        boundary=None, system: TwistedSystem | None = None,
                        method: str = "auto") -> TwistedField:
    """Harmonic section of the affine bundle in the cut gauge.

    The affine jumps are carried exactly by the crossing transitions, so the
    linear system is the homogeneous twisted stencil with the offsets on the
    right-hand side.  Rejects an identically zero representation class on
    closed domains (the solution would be trivial).
    """
    c = config.translations if translations is None else np.asarray(translations, float)
    if config.domain.kind == "torus" and not np.any(c != 0.0):
        raise SolveError("zero representation class: harmonic section is trivial")
    if system is None:
        system = assemble(config)
    gvals = _boundary_values(config, boundary, system.boundary_ids)
    b = _affine_rhs(system, c, gvals)
    x = system.solve(b, method=method)
    values = np.full(config.grid.n_nodes, np.nan)
    values[system.unknown_ids] = x
    if system.boundary_ids.size:
        values[system.boundary_ids] = gvals
    return TwistedField(values, config, c, "affine", config.gauge_tag)


def singular_ansatz(config: ProblemConfig, sigma) -> tuple[np.ndarray, np.ndarray]:
    """Cutoff singular field s and the closed-form right-hand side -laplace(s).

    s(z) = sum_i chi(r_i) * flip_i(z) * Re(sigma_i / sqrt_i(z - p_i)); since
    the singular factor is homogeneous of degree -1/2 around p_i,
    laplace(chi * f) = chi''(r) * f exactly, so -laplace(s) is supported on
    the cutoff annuli and is resolved by the grid.
    """
    grid = config.grid
    sigma = np.asarray(sigma, dtype=complex)
    s_field = np.zeros(grid.n_nodes)
    rho = np.zeros(grid.n_nodes)
    r_c = config.grid_spec.r_c
    for i, sig in enumerate(sigma):
        if sig == 0:
            continue
        dz = grid.min_image(grid.xy - config.points[i])
        r = np.abs(dz)
        m = (r < r_c) & (r > 0)
        sq = config.branch_sqrt(i, dz[m])
        flip = config.local_regauge(i, dz[m])
        f = flip * np.real(sig / sq)
        s_field[m] += cutoff(r[m], r_c) * f
        rho[m] -= cutoff_d2(r[m], r_c) * f
    return s_field, rho


def solve_with_singularity(config: ProblemConfig, sigma, boundary=None,
                           system: TwistedSystem | None = None,
                           second_order: bool = False,
                           method: str = "auto") -> TwistedField:
    """Section with prescribed singular behaviour sigma_i / sqrt(z - p_i).

    Subtracts the cutoff ansatz, solves for the finite-energy remainder and
    returns their sum.  Point branch sets have no tangential directions, so
    the optional second-order correction term of the subtraction vanishes
    identically in this arena; the flag is accepted and reported.
    """
    if system is None:
        system = assemble(config)
    s_field, rho = singular_ansatz(config, sigma)
    gvals = _boundary_values(config, boundary, system.boundary_ids)
    if system.boundary_ids.size:
        # remainder carries the boundary data minus the ansatz trace
        gq = gvals - s_field[system.boundary_ids]
    else:
        gq = gvals
    zeros = np.zeros_like(config.translations)
    b = _affine_rhs(system, zeros, gq)
    # (S q)_i = boundary terms - h^2 * rho_i with rho = -laplace(s)
    b = b - config.h ** 2 * rho[system.unknown_ids]
    x = system.solve(b, method=method)
    values = np.full(config.grid.n_nodes, np.nan)
    values[system.unknown_ids] = x + s_field[system.unknown_ids]
    if system.boundary_ids.size:
        values[system.boundary_ids] = gvals
    q_energy = float(np.sum(x**2))
    report = {
        "remainder_l2": np.sqrt(q_energy) * config.h,
        "annulus_cells": int(round(0.5 * config.grid_spec.r_c / config.h)),
        "second_order_correction": 0.0 if second_order else None,
    }
    return TwistedField(values, config, zeros, "linear", config.gauge_tag, report)


def smallest_eigenvalue(system: TwistedSystem, rtol: float = 1e-7,
                        max_iter: int = 400) -> float:
    """Smallest eigenvalue of the twisted Laplacian (continuum scale S/h^2).

    Inverse power iteration with the cached factorization.  An untwisted
    assembly has the exact constant null vector, detected and reported as 0.
    """
    S = system.matrix
    ones = np.ones(system.n_unknowns)
    if np.max(np.abs(S @ ones)) < 1e-12:
        return 0.0
    rng = np.random.default_rng(12345)
    x = rng.standard_normal(system.n_unknowns)
    x /= np.linalg.norm(x)
    lam_prev = np.inf
    for _ in range(max_iter):
        y = system.solve(x, method="direct" if system.n_unknowns <= DIRECT_LIMIT else "cg")
        ny = np.linalg.norm(y)
        x = y / ny
        lam = float(x @ (S @ x))
        if abs(lam - lam_prev) <= rtol * abs(lam):
            break
        lam_prev = lam
    return lam / system.config.h ** 2


def decay_exponent(field: TwistedField, point_index: int,
                   r_lo: float, r_hi: float, n_shells: int = 8) -> dict:
    """Log-log slope of the circle maximum of |phi - center| near a point."""
    radii = np.geomspace(r_lo, r_hi, n_shells)
    center = field.center(point_index)
    maxima = []
    h = field.config.h
    for r in radii:
        dz, vals = field.annulus(point_index, r - 0.75 * h, r + 0.75 * h)
        if dz.size == 0:
            maxima.append(np.nan)
        else:
            maxima.append(np.max(np.abs(vals - center)))
    radii = np.array(radii)
    maxima = np.array(maxima)
    ok = ~np.isnan(maxima)
    slope = np.polyfit(np.log(radii[ok]), np.log(maxima[ok]), 1)[0]
    return {"radii": radii.tolist(), "maxima": maxima.tolist(), "slope": float(slope)}


# ---------------------------------------------------------------------------
# field dumps
# ---------------------------------------------------------------------------

def dump_field_csv(field: TwistedField, path):
    grid = field.config.grid
    with open(path, "w") as f:
        f.write("x,y,value\n")
        for z, v in zip(grid.xy, field.values):
            if not np.isnan(v):
                f.write(f"{z.real!r},{z.imag!r},{v!r}\n")


_MAGIC = b"BLF1"


def dump_field_binary(field: TwistedField, path):
    """Compact grid dump: magic, dims, spacing, origin, gauge tag, float64."""
    grid = field.config.grid
    tag = field.gauge_tag.encode()
    origin = grid.xy[0]
    with open(path, "wb") as f:
        f.write(_MAGIC)
        f.write(struct.pack("<IIdddI", grid.nx, grid.ny, grid.h,
                            origin.real, origin.imag, len(tag)))
        f.write(tag)
        f.write(np.ascontiguousarray(field.values, dtype="<f8").tobytes())


def load_field_binary(path):
    with open(path, "rb") as f:
        if f.read(4) != _MAGIC:
            raise ValueError("not a branchlab field dump")
        nx, ny, h, ox, oy, taglen = struct.unpack("<IIdddI", f.read(36))
        tag = f.read(taglen).decode()
        values = np.frombuffer(f.read(8 * nx * ny), dtype="<f8")
    return {"nx": nx, "ny": ny, "h": h, "origin": ox + 1j * oy,
            "gauge_tag": tag, "values": values}
