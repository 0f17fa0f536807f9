"""Independent reference solver on the physical boundary curve.

Everything else in the package works in coefficient space. This module
solves the same transmission problem a second, unrelated way: a Nystrom
discretization of the real boundary integral equations with the Kelvin
(elastostatic fundamental solution) kernel,

    interior_layer[phi] - exterior_layer[psi] = loading      (displacement)
    conormal(interior_layer[phi])|- - conormal(exterior_layer[psi])|+
                                       = conormal(loading)   (traction)

with the exterior density constrained to be orthogonal to the three rigid
motions. Quadrature on the equispaced-in-angle nodes splits each kernel
into a smooth part (plain periodic trapezoid), a log part (spectrally
exact weights for the periodic log kernel), and an odd principal-value
part (spectrally exact weights for the half-cotangent kernel, whose
diagonal vanishes by odd symmetry); diagonal entries of the smooth parts
are local Taylor limits involving the curve's second derivative.

Agreement between this solver and the coefficient-space route is the
package's main end-to-end correctness check. The solver is a desk-scale
instrument (node counts up to 512), not a performance target.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .field import FieldEvaluator
from .geometry import (
    ConformalMap,
    eval_map,
    eval_map_derivative,
    eval_map_second_derivative,
    poly_eval,
)
from .loading import LoadingSpec, eval_loading, loading_pair
from .materials import MaterialPair

MIN_NODES = 8
MAX_DESK_NODES = 512
OFFSET_RATIO = 1.5
BOUNDARY_TRACE_OFFSET = 1e-8


class OracleError(ValueError):
    """Invalid mesh data or an ill-posed reference solve."""


def _as_map(geometry) -> ConformalMap:
    return geometry.cmap if hasattr(geometry, "cmap") else geometry


@dataclass(frozen=True)
class BoundaryMesh:
    """Equispaced-in-angle quadrature nodes on the boundary curve.

    theta holds the q node angles, z the boundary points, h the arclength
    scale factors (dsigma = h dtheta), normal the outward unit normals as
    complex numbers, zprime/zsecond the first and second derivatives of
    the curve parametrization theta -> Psi(gamma e^{i theta}).
    """

    cmap: ConformalMap
    q: int
    theta: np.ndarray
    z: np.ndarray
    h: np.ndarray
    normal: np.ndarray
    zprime: np.ndarray
    zsecond: np.ndarray

    def __post_init__(self) -> None:
        if self.q % 2 != 0 or self.q < MIN_NODES:
            raise OracleError(f"node count must be even and >= {MIN_NODES}, got {self.q}")
        if self.q > MAX_DESK_NODES:
            raise OracleError(
                f"reference solver is desk scale only: q <= {MAX_DESK_NODES}, got {self.q}"
            )
        if np.min(np.abs(np.roll(self.z, -1) - self.z)) <= 1e-12:
            raise OracleError("mesh nodes are not distinct")
        if np.max(np.abs(np.abs(self.normal) - 1.0)) > 1e-12:
            raise OracleError("normals are not unit length")
        x, y = self.z.real, self.z.imag
        signed_area = 0.5 * np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y)
        if signed_area <= 0.0:
            raise OracleError("boundary polygon is not positively oriented")

    @property
    def weights(self) -> np.ndarray:
        """Trapezoid arclength weights h_j * (2 pi / q)."""
        return self.h * (2.0 * np.pi / self.q)


def build_mesh(geometry, q: int) -> BoundaryMesh:
    """Boundary mesh with q equispaced angles on |w| = gamma."""
    cmap = _as_map(geometry)
    theta = 2.0 * np.pi * np.arange(q) / q
    w = cmap.gamma * np.exp(1j * theta)
    dpsi = eval_map_derivative(cmap, w)
    d2psi = eval_map_second_derivative(cmap, w)
    z = eval_map(cmap, w)
    zprime = 1j * w * dpsi
    zsecond = -w * dpsi - w * w * d2psi
    h = np.abs(zprime)
    normal = w * dpsi / h
    return BoundaryMesh(cmap, q, theta, z, h, normal, zprime, zsecond)


# -- kernels ------------------------------------------------------------------


def _kelvin_constants(material: MaterialPair, side: str) -> tuple[float, float]:
    if side == "exterior":
        return material.alpha, material.beta
    if side == "interior":
        alpha_t, beta_t, _ = material.interior_constants()
        return alpha_t, beta_t
    raise OracleError(f"unknown material side {side!r}")


def _lame_constants(material: MaterialPair, side: str) -> tuple[float, float]:
    if side == "exterior":
        return material.lam_ext, material.mu_ext
    if side == "interior":
        if not material.has_interior:
            raise OracleError("interior conormal kernel needs a non-degenerate inclusion")
        return material.lam_int, material.mu_int
    raise OracleError(f"unknown material side {side!r}")


def kelvin_kernel(x: complex, y: complex, material: MaterialPair,
                  side: str = "exterior") -> np.ndarray:
    """The 2x2 elastostatic fundamental solution evaluated at x - y.

    Entries are (alpha/2pi) log|x-y| on the diagonal minus (beta/2pi)
    times the outer product of the unit chord vector with itself, with
    the Lame constants of the requested material side. Coincident points
    are rejected.
    """
    alpha, beta = _kelvin_constants(material, side)
    d = complex(x) - complex(y)
    r = abs(d)
    if r == 0.0:
        raise OracleError("fundamental solution evaluated at coincident points")
    e = np.array([d.real / r, d.imag / r])
    return (alpha / (2.0 * np.pi)) * np.log(r) * np.eye(2) - (
        beta / (2.0 * np.pi)
    ) * np.outer(e, e)


@lru_cache(maxsize=8)
def log_weights(q: int) -> np.ndarray:
    """Quadrature weights for the periodic kernel log(4 sin^2((t-s)/2)).

    Spectrally exact on trigonometric polynomials of degree below q/2;
    applied to the smooth factor sampled at the nodes.
    """
    t = 2.0 * np.pi * np.arange(q) / q
    delta = t[:, None] - t[None, :]
    R = np.zeros((q, q))
    for m in range(1, q // 2):
        R -= (4.0 * np.pi / q) * np.cos(m * delta) / m
    R -= (4.0 * np.pi / q**2) * np.cos(0.5 * q * delta)
    return R


@lru_cache(maxsize=8)
def hilbert_weights(q: int) -> np.ndarray:
    """Quadrature weights for the principal-value kernel cot((s-t)/2).

    Spectrally exact on trigonometric polynomials of degree below q/2;
    the diagonal weight is zero (odd symmetry about the singularity).
    """
    t = 2.0 * np.pi * np.arange(q) / q
    delta = t[:, None] - t[None, :]
    W = np.zeros((q, q))
    for m in range(1, q // 2):
        W -= (4.0 * np.pi / q) * np.sin(m * delta)
    return W


@dataclass(frozen=True)
class _ChordFrames:
    """Geometry-only factors shared by every kernel block on one mesh."""

    e1: np.ndarray       # unit chord components, tangent on the diagonal
    e2: np.ndarray
    log_smooth: np.ndarray   # log(r / (2 |sin((t-s)/2)|)), log h on the diagonal
    a_normal: np.ndarray     # h(s) (chord . n(t)) / r^2, curvature limit on the diagonal
    q_smooth: np.ndarray     # odd kernel minus half-cotangent, curvature limit on the diagonal


def _chord_frames(mesh: BoundaryMesh) -> _ChordFrames:
    z, h, normal = mesh.z, mesh.h, mesh.normal
    q = mesh.q
    d = z[:, None] - z[None, :]
    eye = np.eye(q, dtype=bool)
    r = np.abs(d)
    r[eye] = 1.0

    tau = mesh.zprime / h
    e1 = d.real / r
    e2 = d.imag / r
    e1[eye] = tau.real
    e2[eye] = tau.imag

    delta = mesh.theta[:, None] - mesh.theta[None, :]
    sin_half = 2.0 * np.abs(np.sin(0.5 * delta))
    sin_half[eye] = 1.0
    log_smooth = np.log(r / sin_half)
    log_smooth[eye] = np.log(h)

    curv = mesh.zsecond / mesh.zprime
    n_over_d = normal[:, None] / np.where(eye, 1.0, d)
    a_normal = h[None, :] * n_over_d.real
    a_normal[eye] = 0.5 * curv.imag

    half_cot = 0.5 / np.tan(np.where(eye, 1.0, -0.5 * delta))
    q_smooth = h[None, :] * n_over_d.imag - half_cot
    q_smooth[eye] = 0.5 * curv.real
    return _ChordFrames(e1, e2, log_smooth, a_normal, q_smooth)


def _single_layer_blocks(mesh: BoundaryMesh, frames: _ChordFrames,
                         alpha: float, beta: float) -> np.ndarray:
    """Dense (2q, 2q) matrix mapping nodal density components to the layer trace."""
    q = mesh.q
    htrap = 2.0 * np.pi / q
    hj = mesh.h[None, :]
    log_part = 0.5 * log_weights(q) + htrap * frames.log_smooth
    diag_kernel = (alpha / (2.0 * np.pi)) * log_part * hj
    ee = -(beta / (2.0 * np.pi)) * htrap * hj
    out = np.zeros((2 * q, 2 * q))
    out[:q, :q] = diag_kernel + ee * frames.e1 * frames.e1
    out[:q, q:] = ee * frames.e1 * frames.e2
    out[q:, :q] = out[:q, q:]
    out[q:, q:] = diag_kernel + ee * frames.e2 * frames.e2
    return out


def _conormal_blocks(mesh: BoundaryMesh, frames: _ChordFrames,
                     lam: float, mu: float, jump_sign: float) -> np.ndarray:
    """Dense (2q, 2q) matrix for the one-sided conormal trace of the layer.

    jump_sign +1 gives the trace from outside, -1 from inside; the
    principal-value part is the same on both sides.
    """
    q = mesh.q
    htrap = 2.0 * np.pi / q
    c1 = mu / (lam + 2.0 * mu)
    c2 = 2.0 * (lam + mu) / (lam + 2.0 * mu)
    pref = 1.0 / (2.0 * np.pi)
    smooth = htrap * frames.a_normal
    odd = 0.5 * hilbert_weights(q) + htrap * frames.q_smooth
    out = np.zeros((2 * q, 2 * q))
    out[:q, :q] = pref * (c1 * smooth + c2 * frames.e1 * frames.e1 * smooth)
    out[:q, q:] = pref * (c2 * frames.e1 * frames.e2 * smooth + c1 * odd)
    out[q:, :q] = pref * (c2 * frames.e1 * frames.e2 * smooth - c1 * odd)
    out[q:, q:] = pref * (c1 * smooth + c2 * frames.e2 * frames.e2 * smooth)
    out += jump_sign * 0.5 * np.eye(2 * q)
    return out


def single_layer_matrix(mesh: BoundaryMesh, material: MaterialPair,
                        side: str = "exterior") -> np.ndarray:
    """Boundary trace of the single-layer displacement, one material side."""
    alpha, beta = _kelvin_constants(material, side)
    return _single_layer_blocks(mesh, _chord_frames(mesh), alpha, beta)


def conormal_matrix(mesh: BoundaryMesh, material: MaterialPair,
                    side: str = "exterior", trace: str = "exterior") -> np.ndarray:
    """One-sided conormal derivative of the single layer at the nodes.

    side picks the material whose kernel defines the layer; trace picks
    the side of the boundary the limit is taken from (the jump term flips
    sign between the two).
    """
    lam, mu = _lame_constants(material, side)
    if trace not in ("exterior", "interior"):
        raise OracleError(f"unknown trace side {trace!r}")
    jump = 1.0 if trace == "exterior" else -1.0
    return _conormal_blocks(mesh, _chord_frames(mesh), lam, mu, jump)


# -- density plumbing ---------------------------------------------------------


def _components(values: np.ndarray) -> np.ndarray:
    values = np.asarray(values, dtype=complex)
    return np.concatenate([values.real, values.imag])


def _complexify(components: np.ndarray) -> np.ndarray:
    q = components.size // 2
    return components[:q] + 1j * components[q:]


def rigid_fields(z: np.ndarray) -> tuple[np.ndarray, ...]:
    """The two translations and the rotation, as complex fields at points z."""
    z = np.asarray(z, dtype=complex)
    ones = np.ones_like(z)
    return ones, 1j * ones, -1j * z


def rigid_moments(mesh: BoundaryMesh, density: np.ndarray) -> np.ndarray:
    """Arclength inner products of a nodal density with the rigid fields."""
    values = np.asarray(density, dtype=complex)
    wq = mesh.weights
    return np.array(
        [np.sum(wq * (values.real * r.real + values.imag * r.imag)) for r in rigid_fields(mesh.z)]
    )


# -- loading data on the mesh -------------------------------------------------


def _polyder(coeffs: np.ndarray) -> np.ndarray:
    coeffs = np.asarray(coeffs, dtype=complex)
    if coeffs.size <= 1:
        return np.zeros(1, dtype=complex)
    return coeffs[1:] * np.arange(1, coeffs.size)


def loading_conormal(loading: LoadingSpec, mesh: BoundaryMesh,
                     material: MaterialPair) -> np.ndarray:
    """Conormal derivative of the background loading at the mesh nodes.

    Computed by analytic differentiation of the loading's polynomial
    pair: with F = f + z conj(f') + conj(g) the traction on the curve is
    -(2 i mu / h) dF/dt, for the counterclockwise parametrization and the
    outward normal (checked against the componentwise definition
    lambda (div u) n + mu (grad u + grad u^T) n on explicit fields).
    """
    f, g = loading_pair(loading, mesh.cmap)
    df, dg = _polyder(f), _polyder(g)
    d2f = _polyder(df)
    z, zp = mesh.z, mesh.zprime
    tangential = 2.0 * zp * np.real(poly_eval(df, z)) + np.conj(zp) * (
        z * np.conj(poly_eval(d2f, z)) + np.conj(poly_eval(dg, z))
    )
    return -(2.0j * material.mu_ext / mesh.h) * tangential


# -- system assembly and solve ------------------------------------------------


@dataclass(frozen=True)
class NystromSystem:
    """Dense real Nystrom system plus the rigid-motion constraint rows.

    For a transmission pair the matrix is (4q, 4q) over the stacked
    unknowns [phi_1, phi_2, psi_1, psi_2] (component-major nodal values);
    for a cavity it reduces to (2q, 2q) over psi alone. The three
    constraint rows enforce rigid-motion orthogonality of psi and are
    appended for the least-squares solve.
    """

    matrix: np.ndarray
    rhs: np.ndarray
    constraints: np.ndarray
    mode: str
    mesh: BoundaryMesh
    material: MaterialPair
    loading: LoadingSpec


@dataclass(frozen=True)
class OracleSolution:
    """Solved nodal densities and boundary displacement.

    psi_nodes and phi_nodes hold the real 2-vector densities as (q, 2)
    arrays (phi_nodes is None for a cavity); u_boundary is the complex
    boundary displacement taken from the exterior representation.
    """

    psi_nodes: np.ndarray
    phi_nodes: np.ndarray | None
    u_boundary: np.ndarray
    mesh: BoundaryMesh
    mode: str
    residual_norm: float
    condition_estimate: float
    rigid_moments: np.ndarray
    trace_gap: float

    @property
    def psi_complex(self) -> np.ndarray:
        return self.psi_nodes[:, 0] + 1j * self.psi_nodes[:, 1]

    @property
    def phi_complex(self) -> np.ndarray | None:
        if self.phi_nodes is None:
            return None
        return self.phi_nodes[:, 0] + 1j * self.phi_nodes[:, 1]


def assemble_nystrom(mesh: BoundaryMesh, material: MaterialPair,
                     loading: LoadingSpec) -> NystromSystem:
    """Discretize the boundary integral equations on the mesh.

    Transmission: displacement rows equate the interior layer to the
    exterior layer plus the loading; traction rows do the same for the
    one-sided conormal derivatives. Cavity: the exterior conormal rows
    alone, with a traction-free boundary.
    """
    q = mesh.q
    frames = _chord_frames(mesh)
    alpha, beta = _kelvin_constants(material, "exterior")
    lam, mu = material.lam_ext, material.mu_ext
    trac_ext = _conormal_blocks(mesh, frames, lam, mu, 1.0)

    h_nodes = eval_loading(loading, mesh.cmap, material, mesh.z)
    dh_nodes = loading_conormal(loading, mesh, material)

    wq = mesh.weights
    rig = rigid_fields(mesh.z)

    if material.has_interior:
        disp_ext = _single_layer_blocks(mesh, frames, alpha, beta)
        alpha_t, beta_t = _kelvin_constants(material, "interior")
        disp_int = _single_layer_blocks(mesh, frames, alpha_t, beta_t)
        trac_int = _conormal_blocks(mesh, frames, material.lam_int, material.mu_int, -1.0)
        matrix = np.zeros((4 * q, 4 * q))
        matrix[: 2 * q, : 2 * q] = disp_int
        matrix[: 2 * q, 2 * q :] = -disp_ext
        matrix[2 * q :, : 2 * q] = trac_int
        matrix[2 * q :, 2 * q :] = -trac_ext
        rhs = np.concatenate([_components(h_nodes), _components(dh_nodes)])
        mode = "transmission"
        psi_col = 2 * q
    else:
        matrix = trac_ext
        rhs = -_components(dh_nodes)
        mode = "cavity"
        psi_col = 0

    constraints = np.zeros((3, matrix.shape[1]))
    for i, r in enumerate(rig):
        constraints[i, psi_col : psi_col + q] = wq * r.real
        constraints[i, psi_col + q : psi_col + 2 * q] = wq * r.imag
        constraints[i] /= np.linalg.norm(constraints[i])
    return NystromSystem(matrix, rhs, constraints, mode, mesh, material, loading)


def solve_nystrom(system: NystromSystem, rcond: float | None = None) -> OracleSolution:
    """Least-squares solve of the stacked system and constraint rows."""
    stacked = np.vstack([system.matrix, system.constraints])
    rhs = np.concatenate([system.rhs, np.zeros(3)])
    sol, _, _, sv = np.linalg.lstsq(stacked, rhs, rcond=rcond)
    condition = float(sv[0] / sv[-1]) if sv[-1] > 0.0 else np.inf
    residual = float(np.linalg.norm(stacked @ sol - rhs))

    mesh, q = system.mesh, system.mesh.q
    frames = _chord_frames(mesh)
    alpha, beta = _kelvin_constants(system.material, "exterior")
    h_nodes = eval_loading(system.loading, mesh.cmap, system.material, mesh.z)

    if system.mode == "transmission":
        phi_c = _complexify(sol[: 2 * q])
        psi_c = _complexify(sol[2 * q :])
        phi_nodes = np.column_stack([phi_c.real, phi_c.imag])
        disp_ext = _single_layer_blocks(mesh, frames, alpha, beta)
        u_ext = h_nodes + _complexify(disp_ext @ sol[2 * q :])
        alpha_t, beta_t = _kelvin_constants(system.material, "interior")
        disp_int = _single_layer_blocks(mesh, frames, alpha_t, beta_t)
        u_int = _complexify(disp_int @ sol[: 2 * q])
        trace_gap = float(np.max(np.abs(u_int - u_ext)))
    else:
        psi_c = _complexify(sol)
        phi_nodes = None
        disp_ext = _single_layer_blocks(mesh, frames, alpha, beta)
        u_ext = h_nodes + _complexify(disp_ext @ sol)
        trace_gap = 0.0

    psi_nodes = np.column_stack([psi_c.real, psi_c.imag])
    return OracleSolution(
        psi_nodes=psi_nodes,
        phi_nodes=phi_nodes,
        u_boundary=u_ext,
        mesh=mesh,
        mode=system.mode,
        residual_norm=residual,
        condition_estimate=condition,
        rigid_moments=rigid_moments(mesh, psi_c),
        trace_gap=trace_gap,
    )


def solve_oracle(geometry, material: MaterialPair, loading: LoadingSpec,
                 q: int, rcond: float | None = None) -> OracleSolution:
    """Mesh, assemble, and solve in one call."""
    mesh = build_mesh(geometry, q)
    return solve_nystrom(assemble_nystrom(mesh, material, loading), rcond=rcond)


# -- off-boundary evaluation --------------------------------------------------


def single_layer_potential(mesh: BoundaryMesh, density: np.ndarray,
                           material: MaterialPair, side: str, z) -> np.ndarray:
    """Single-layer displacement at points away from the boundary.

    Plain trapezoid sum over the nodes; spectrally accurate at points
    whose distance from the curve is comparable to the node spacing or
    larger, inaccurate very close to it.
    """
    alpha, beta = _kelvin_constants(material, side)
    values = np.asarray(density, dtype=complex)
    z = np.asarray(z, dtype=complex)
    d = z[:, None] - mesh.z[None, :]
    r = np.abs(d)
    if np.min(r) == 0.0:
        raise OracleError("potential evaluated on a mesh node")
    e1 = d.real / r
    e2 = d.imag / r
    wq = mesh.weights[None, :]
    log_part = (alpha / (2.0 * np.pi)) * np.log(r) * wq
    dot = e1 * values.real[None, :] + e2 * values.imag[None, :]
    ee = (beta / (2.0 * np.pi)) * wq * dot
    u1 = np.sum(log_part * values.real[None, :] - ee * e1, axis=1)
    u2 = np.sum(log_part * values.imag[None, :] - ee * e2, axis=1)
    return u1 + 1j * u2


def eval_oracle_exterior(solution: OracleSolution, material: MaterialPair,
                         loading: LoadingSpec, z) -> np.ndarray:
    """Oracle displacement at exterior points: loading plus exterior layer."""
    z = np.asarray(z, dtype=complex)
    layer = single_layer_potential(solution.mesh, solution.psi_complex, material, "exterior", z)
    return eval_loading(loading, solution.mesh.cmap, material, z) + layer


def eval_oracle_interior(solution: OracleSolution, material: MaterialPair, z) -> np.ndarray:
    """Oracle displacement at interior points: the interior layer alone."""
    if solution.phi_nodes is None:
        raise OracleError("cavity solution has no interior displacement")
    z = np.asarray(z, dtype=complex)
    return single_layer_potential(solution.mesh, solution.phi_complex, material, "interior", z)


# -- comparison against the coefficient-space route ---------------------------


def discrepancy(a: np.ndarray, b: np.ndarray) -> tuple[float, float]:
    """Max and root-mean-square absolute difference of two sample sets."""
    diff = np.abs(np.asarray(a) - np.asarray(b))
    return float(np.max(diff)), float(np.sqrt(np.mean(diff**2)))


@dataclass(frozen=True)
class ComparisonReport:
    """Agreement between the reference solve and the coefficient-space solve."""

    boundary_max: float
    boundary_rms: float
    exterior_max: float
    exterior_rms: float
    q: int
    n_points: int
    condition_estimate: float

    def rows(self) -> list[tuple[str, float]]:
        return [
            ("boundary_max", self.boundary_max),
            ("boundary_rms", self.boundary_rms),
            ("exterior_max", self.exterior_max),
            ("exterior_rms", self.exterior_rms),
            ("condition_estimate", self.condition_estimate),
        ]


def compare(oracle: OracleSolution, series, geometry, material: MaterialPair,
            loading: LoadingSpec, n_points: int = 64,
            offset_ratio: float = OFFSET_RATIO) -> ComparisonReport:
    """Boundary and offset-circle discrepancies between the two routes.

    Boundary displacement is compared at the mesh nodes (the series side
    evaluated a relative 1e-8 outside the curve); the exterior field is
    compared at n_points on |w| = offset_ratio * gamma.
    """
    cmap = _as_map(geometry)
    evaluator = FieldEvaluator(series, loading, cmap, material)
    gamma = cmap.gamma

    w_bdry = gamma * (1.0 + BOUNDARY_TRACE_OFFSET) * np.exp(1j * oracle.mesh.theta)
    u_series_bdry = evaluator.exterior_arrays(w_bdry)["u"]
    boundary_max, boundary_rms = discrepancy(u_series_bdry, oracle.u_boundary)

    phi = 2.0 * np.pi * np.arange(n_points) / n_points
    w_out = offset_ratio * gamma * np.exp(1j * phi)
    u_series_out = evaluator.exterior_arrays(w_out)["u"]
    z_out = eval_map(cmap, w_out)
    u_oracle_out = eval_oracle_exterior(oracle, material, loading, z_out)
    exterior_max, exterior_rms = discrepancy(u_series_out, u_oracle_out)

    return ComparisonReport(
        boundary_max=boundary_max,
        boundary_rms=boundary_rms,
        exterior_max=exterior_max,
        exterior_rms=exterior_rms,
        q=oracle.mesh.q,
        n_points=n_points,
        condition_estimate=oracle.condition_estimate,
    )


def self_convergence(geometry, material: MaterialPair, loading: LoadingSpec,
                     node_counts=(32, 64, 128)) -> np.ndarray:
    """Boundary-displacement changes under mesh doubling, one per count.

    Entry k is the max difference between the solves at node_counts[k]
    and twice that, compared on the shared (even-index) nodes. On an
    analytic boundary the sequence should fall super-algebraically.
    """
    diffs = []
    for q in node_counts:
        coarse = solve_oracle(geometry, material, loading, q)
        fine = solve_oracle(geometry, material, loading, 2 * q)
        diffs.append(np.max(np.abs(coarse.u_boundary - fine.u_boundary[::2])))
    return np.array(diffs)
