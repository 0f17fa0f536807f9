"""Reference-solver tests: quadrature identities and dual-route agreement.

The boundary-integral solver is validated in layers: the quadrature
weights against known Fourier integrals, the single-layer and conormal
matrices against the per-mode complex-series transforms (a completely
different computational route), and the full solve against the
coefficient-space solver on disk and ellipse configurations.
"""

import numpy as np
import pytest

from elastinc.field import (
    FieldEvaluator,
    invert_map,
    log_layer_exterior,
    log_layer_interior,
    deriv_layer_exterior,
    deriv_layer_interior,
    _shifted_coefficients,
)
from elastinc.geometry import (
    ConformalMap,
    build_geometry,
    eval_map,
    eval_map_derivative,
    eval_map_second_derivative,
)
from elastinc.loading import LoadingSpec, eval_loading, loading_pair
from elastinc.materials import MaterialError, MaterialPair
from elastinc.oracle import (
    BoundaryMesh,
    OracleError,
    build_mesh,
    compare,
    conormal_matrix,
    discrepancy,
    eval_oracle_interior,
    hilbert_weights,
    kelvin_kernel,
    loading_conormal,
    log_weights,
    rigid_fields,
    self_convergence,
    single_layer_matrix,
    single_layer_potential,
    solve_oracle,
)
from elastinc.system import assemble_system, solve

EXACT_TOL = 1e-12
SERIES_TOL = 1e-10
TRACTION_TOL = 1e-8

CAV = MaterialPair(2.0, 1.0, cavity=True)
TRANS = MaterialPair(2.0, 1.0, lam_int=4.0, mu_int=3.0)
DISK = ConformalMap(1.0, [0.5])
ELLIPSE = ConformalMap(1.0, [0.5, 0.3])

B1 = LoadingSpec(A=np.zeros(2), B=[0.0, 1.0])


def mode_arrays(coeffs: dict) -> tuple[np.ndarray, np.ndarray]:
    """Split a mode-to-coefficient dict into (plus, minus) index arrays."""
    kmax = max([abs(k) for k in coeffs] + [1])
    plus = np.zeros(kmax + 1, complex)
    minus = np.zeros(kmax + 1, complex)
    for k, v in coeffs.items():
        if k >= 1:
            plus[k] += v
        else:
            minus[-k] += v
    return plus, minus


def series_triple(cmap, material, side, coeffs, wz, region):
    """Holomorphic pair (f, f', g) of the single layer from per-mode sums."""
    if side == "exterior":
        alpha, beta, kappa = material.alpha, material.beta, material.kappa
    else:
        alpha, beta, kappa = material.interior_constants()
    conj_coeffs = {-k: np.conj(v) for k, v in coeffs.items()}
    shifted = _shifted_coefficients(cmap, coeffs)
    p, m = mode_arrays(coeffs)
    pc, mc = mode_arrays(conj_coeffs)
    ps, ms = mode_arrays(shifted)
    if region == "exterior":
        z = eval_map(cmap, wz)
        L = log_layer_exterior(cmap, p, m, wz)
        C = deriv_layer_exterior(cmap, p, m, wz)
        Lb = log_layer_exterior(cmap, pc, mc, wz)
        Cy = deriv_layer_exterior(cmap, ps, ms, wz)
    else:
        z = np.asarray(wz, complex)
        L = log_layer_interior(cmap, p, m, z)
        C = deriv_layer_interior(cmap, p, m, z)
        Lb = log_layer_interior(cmap, pc, mc, z)
        Cy = deriv_layer_interior(cmap, ps, ms, z)
    f = beta * L
    fp = beta * C
    g = -alpha * Lb - beta * Cy
    return z, f, fp, g, kappa, beta


def series_single_layer(cmap, material, side, coeffs, wz, region):
    """Single-layer displacement from the per-mode route."""
    z, f, fp, g, kappa, beta = series_triple(cmap, material, side, coeffs, wz, region)
    c0 = coeffs.get(0, 0.0)
    return 0.5 * (kappa * f - z * np.conj(fp) - np.conj(g)) - beta * c0 / 2.0


def nodal_density(mesh: BoundaryMesh, coeffs: dict) -> np.ndarray:
    """Complex nodal values of sum_k coeffs[k] e^{i k theta} / h."""
    vals = np.zeros(mesh.q, complex)
    for k, v in coeffs.items():
        vals += v * np.exp(1j * k * mesh.theta)
    return vals / mesh.h


def components(values: np.ndarray) -> np.ndarray:
    return np.concatenate([values.real, values.imag])


def complexify(vec: np.ndarray) -> np.ndarray:
    q = vec.size // 2
    return vec[:q] + 1j * vec[q:]


def fft_derivative(vals: np.ndarray) -> np.ndarray:
    """Spectral derivative of periodic samples (zeroed Nyquist mode)."""
    n = vals.size
    k = np.fft.fftfreq(n, 1.0 / n)
    k[n // 2] = 0.0
    return np.fft.ifft(1j * k * np.fft.fft(vals))


# -- kernel basics ------------------------------------------------------------


def test_kelvin_kernel_unit_distance():
    G = kelvin_kernel(1.5 + 0.25j, 0.5 + 0.25j, TRANS, "exterior")
    beta = TRANS.beta
    expected = np.array([[-beta / (2 * np.pi), 0.0], [0.0, 0.0]])
    assert np.max(np.abs(G - expected)) <= EXACT_TOL
    G_int = kelvin_kernel(1.5 + 0.25j, 0.5 + 0.25j, TRANS, "interior")
    beta_t = TRANS.interior_constants()[1]
    assert abs(G_int[0, 0] + beta_t / (2 * np.pi)) <= EXACT_TOL


def test_kelvin_kernel_isotropy_and_symmetry():
    rng = np.random.default_rng(3)
    for _ in range(5):
        d = complex(*rng.normal(size=2))
        ang = rng.uniform(0.0, 2.0 * np.pi)
        R = np.array([[np.cos(ang), -np.sin(ang)], [np.sin(ang), np.cos(ang)]])
        G = kelvin_kernel(d, 0.0, TRANS)
        G_rot = kelvin_kernel(d * np.exp(1j * ang), 0.0, TRANS)
        assert np.max(np.abs(G_rot - R @ G @ R.T)) <= EXACT_TOL
        assert abs(G[0, 1] - G[1, 0]) <= EXACT_TOL


def test_kelvin_kernel_rejects_degenerate_input():
    with pytest.raises(OracleError):
        kelvin_kernel(0.3 + 0.1j, 0.3 + 0.1j, TRANS)
    with pytest.raises(MaterialError):
        kelvin_kernel(1.0, 0.0, CAV, "interior")
    with pytest.raises(OracleError):
        kelvin_kernel(1.0, 0.0, TRANS, "sideways")


# -- mesh ---------------------------------------------------------------------


def test_mesh_geometry_invariants():
    mesh = build_mesh(ELLIPSE, 64)
    assert np.max(np.abs(np.abs(mesh.normal) - 1.0)) <= EXACT_TOL
    tangent = mesh.zprime / np.abs(mesh.zprime)
    dot = mesh.normal.real * tangent.real + mesh.normal.imag * tangent.imag
    assert np.max(np.abs(dot)) <= EXACT_TOL
    w_out = invert_map(ELLIPSE, mesh.z + 0.05 * mesh.normal)
    assert np.all(np.abs(w_out) > ELLIPSE.gamma)
    assert np.all(mesh.weights > 0.0)
    x, y = mesh.z.real, mesh.z.imag
    area = 0.5 * np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y)
    assert area > 0.0


def test_mesh_second_derivative_matches_finite_difference():
    w = ELLIPSE.gamma * np.exp(1j * np.array([0.3, 1.1, 2.9, 4.2]))
    step = 1e-6
    fd = (eval_map_derivative(ELLIPSE, w + step) - eval_map_derivative(ELLIPSE, w - step)) / (
        2.0 * step
    )
    assert np.max(np.abs(fd - eval_map_second_derivative(ELLIPSE, w))) <= 1e-8


def test_mesh_node_count_guards():
    for bad in (63, 4, 514, 1024):
        with pytest.raises(OracleError):
            build_mesh(ELLIPSE, bad)


# -- quadrature weights -------------------------------------------------------


def test_log_weights_reproduce_fourier_integrals():
    q = 32
    t = 2.0 * np.pi * np.arange(q) / q
    R = log_weights(q)
    # integral of log(4 sin^2((t-s)/2)) against 1, cos s, sin 3s
    assert np.max(np.abs(R @ np.ones(q))) <= EXACT_TOL
    assert np.max(np.abs(R @ np.cos(t) + 2.0 * np.pi * np.cos(t))) <= EXACT_TOL
    assert np.max(np.abs(R @ np.sin(3 * t) + (2.0 * np.pi / 3.0) * np.sin(3 * t))) <= EXACT_TOL


def test_hilbert_weights_reproduce_conjugate_integrals():
    q = 32
    t = 2.0 * np.pi * np.arange(q) / q
    W = hilbert_weights(q)
    assert np.max(np.abs(W @ np.ones(q))) <= EXACT_TOL
    # principal value of cot((s-t)/2) e^{i s} is 2 pi i e^{i t}
    assert np.max(np.abs(W @ np.exp(1j * t) - 2.0j * np.pi * np.exp(1j * t))) <= EXACT_TOL
    assert np.max(np.abs(W @ np.sin(2 * t) - 2.0 * np.pi * np.cos(2 * t))) <= EXACT_TOL
    assert np.max(np.abs(np.diag(W))) == 0.0


# -- layer matrices against the per-mode series route -------------------------


COEFFS = {0: 0.7 + 0.2j, 1: 0.3 - 0.2j, -2: 0.1 + 0.05j, 3: -0.15j}
COEFFS_ZERO_MEAN = {1: 0.3 - 0.2j, -2: 0.1 + 0.05j, 3: -0.15j}


def test_single_layer_matches_series_on_boundary():
    mesh = build_mesh(ELLIPSE, 128)
    dens = nodal_density(mesh, COEFFS)
    comps = components(dens)
    w_b = ELLIPSE.gamma * np.exp(1j * mesh.theta)
    for side in ("exterior", "interior"):
        quad = complexify(single_layer_matrix(mesh, TRANS, side) @ comps)
        ser_out = series_single_layer(ELLIPSE, TRANS, side, COEFFS, w_b, "exterior")
        ser_in = series_single_layer(ELLIPSE, TRANS, side, COEFFS, mesh.z, "interior")
        assert np.max(np.abs(quad - ser_out)) <= SERIES_TOL
        assert np.max(np.abs(quad - ser_in)) <= SERIES_TOL


def test_single_layer_matches_series_off_boundary():
    mesh = build_mesh(ELLIPSE, 128)
    dens = nodal_density(mesh, COEFFS)
    phi = 2.0 * np.pi * np.arange(16) / 16
    w_out = 1.3 * np.exp(1j * phi)
    z_out = eval_map(ELLIPSE, w_out)
    pot = single_layer_potential(mesh, dens, TRANS, "exterior", z_out)
    ser = series_single_layer(ELLIPSE, TRANS, "exterior", COEFFS, w_out, "exterior")
    assert np.max(np.abs(pot - ser)) <= SERIES_TOL
    z_in = 0.5 + 0.2 * np.exp(1j * phi)
    pot_in = single_layer_potential(mesh, dens, TRANS, "exterior", z_in)
    ser_in = series_single_layer(ELLIPSE, TRANS, "exterior", COEFFS, z_in, "interior")
    assert np.max(np.abs(pot_in - ser_in)) <= SERIES_TOL


def test_conormal_matches_series_traction():
    # zero-mean density: a net-charge layer has a multivalued traction
    # potential whose secular part a spectral derivative cannot represent
    mesh = build_mesh(ELLIPSE, 128)
    dens = nodal_density(mesh, COEFFS_ZERO_MEAN)
    comps = components(dens)
    mu = TRANS.mu_ext
    w_b = ELLIPSE.gamma * np.exp(1j * mesh.theta)

    z, f, fp, g, _, _ = series_triple(ELLIPSE, TRANS, "exterior", COEFFS_ZERO_MEAN, w_b, "exterior")
    I_out = 0.5 * mu * (f + z * np.conj(fp) + np.conj(g))
    expected_out = -(2.0j / mesh.h) * fft_derivative(I_out)
    got_out = complexify(conormal_matrix(mesh, TRANS, "exterior", "exterior") @ comps)
    assert np.max(np.abs(got_out - expected_out)) <= TRACTION_TOL

    z, f, fp, g, _, _ = series_triple(ELLIPSE, TRANS, "exterior", COEFFS_ZERO_MEAN, mesh.z, "interior")
    I_in = 0.5 * mu * (f + z * np.conj(fp) + np.conj(g))
    expected_in = -(2.0j / mesh.h) * fft_derivative(I_in)
    got_in = complexify(conormal_matrix(mesh, TRANS, "exterior", "interior") @ comps)
    assert np.max(np.abs(got_in - expected_in)) <= TRACTION_TOL

    assert np.max(np.abs((got_out - got_in) - dens)) <= EXACT_TOL


def test_conormal_operator_annihilates_rigid_fields():
    # net force and torque of the interior-trace traction vanish for any
    # density; dually, the exterior trace pairs with rigid fields as the
    # density itself does
    mesh = build_mesh(ELLIPSE, 64)
    inner = conormal_matrix(mesh, TRANS, "exterior", "interior")
    outer = conormal_matrix(mesh, TRANS, "exterior", "exterior")
    wq = mesh.weights
    for r in rigid_fields(mesh.z):
        rv = np.concatenate([wq * r.real, wq * r.imag])
        assert np.max(np.abs(rv @ inner)) <= 1e-10
        assert np.max(np.abs(rv @ outer - rv)) <= 1e-10


def test_loading_conormal_matches_componentwise_definition():
    mesh = build_mesh(ELLIPSE, 32)
    loading = LoadingSpec(A=[0.0, 0.4 + 0.1j, -0.2j], B=[0.0, 1.0, 0.0, 0.3])
    f, g = loading_pair(loading, ELLIPSE)

    def pv(c, z):
        out = np.zeros_like(z)
        for ck in c[::-1]:
            out = out * z + ck
        return out

    def pd(c):
        return c[1:] * np.arange(1, len(c)) if len(c) > 1 else np.zeros(1, complex)

    lam, mu, kappa = TRANS.lam_ext, TRANS.mu_ext, TRANS.kappa
    z, n = mesh.z, mesh.normal
    du_dz = kappa * pv(pd(f), z) - np.conj(pv(pd(f), z))
    du_dzb = -z * np.conj(pv(pd(pd(f)), z)) - np.conj(pv(pd(g), z))
    du_dx = du_dz + du_dzb
    du_dy = 1j * (du_dz - du_dzb)
    expected = np.zeros_like(z)
    for i in range(mesh.q):
        grad = np.array(
            [[du_dx[i].real, du_dy[i].real], [du_dx[i].imag, du_dy[i].imag]]
        )
        nv = np.array([n[i].real, n[i].imag])
        tv = lam * np.trace(grad) * nv + mu * (grad + grad.T) @ nv
        expected[i] = tv[0] + 1j * tv[1]
    got = loading_conormal(loading, mesh, TRANS)
    assert np.max(np.abs(got - expected)) <= EXACT_TOL


# -- full solves against the coefficient-space route --------------------------


def test_zero_loading_gives_zero_solution():
    zero = LoadingSpec(A=np.zeros(2), B=np.zeros(2))
    sol = solve_oracle(ELLIPSE, TRANS, zero, 32)
    assert np.max(np.abs(sol.psi_nodes)) <= EXACT_TOL
    assert np.max(np.abs(sol.phi_nodes)) <= EXACT_TOL
    assert np.max(np.abs(sol.u_boundary)) <= EXACT_TOL


def test_disk_cavity_oracle_agrees_with_series():
    bundle = build_geometry(DISK, 12)
    series_sol = solve(assemble_system(CAV, bundle, B1))
    oracle_sol = solve_oracle(DISK, CAV, B1, 128)
    report = compare(oracle_sol, series_sol, DISK, CAV, B1)
    assert report.boundary_max <= 1e-4
    assert report.exterior_max <= 1e-4
    assert np.max(np.abs(oracle_sol.rigid_moments)) <= 1e-10
    assert oracle_sol.phi_nodes is None


def test_ellipse_transmission_oracle_agrees_with_series():
    bundle = build_geometry(ELLIPSE, 16)
    series_sol = solve(assemble_system(TRANS, bundle, B1))
    oracle_sol = solve_oracle(ELLIPSE, TRANS, B1, 256)
    report = compare(oracle_sol, series_sol, ELLIPSE, TRANS, B1)
    assert report.boundary_max <= 1e-3
    assert report.exterior_max <= 1e-3
    assert report.boundary_rms <= report.boundary_max
    assert oracle_sol.trace_gap <= 1e-10
    assert np.isfinite(report.condition_estimate)
    assert report.condition_estimate >= 1.0


def test_oracle_interior_field_matches_series():
    bundle = build_geometry(ELLIPSE, 16)
    series_sol = solve(assemble_system(TRANS, bundle, B1))
    oracle_sol = solve_oracle(ELLIPSE, TRANS, B1, 128)
    z_in = 0.5 + 0.2 * np.exp(1j * 2.0 * np.pi * np.arange(8) / 8)
    u_oracle = eval_oracle_interior(oracle_sol, TRANS, z_in)
    ev = FieldEvaluator(series_sol, B1, ELLIPSE, TRANS)
    u_series = ev.interior_arrays_z(z_in)["u"]
    assert np.max(np.abs(u_oracle - u_series)) <= TRACTION_TOL


def test_cavity_solution_has_no_interior_field():
    sol = solve_oracle(DISK, CAV, B1, 32)
    with pytest.raises(OracleError):
        eval_oracle_interior(sol, CAV, np.array([0.5 + 0.0j]))


def test_self_convergence_is_superalgebraic():
    diffs = self_convergence(ELLIPSE, TRANS, B1, (32, 64))
    assert diffs[0] / diffs[1] >= 10.0
    assert diffs[1] <= 1e-8


def test_far_field_decay_of_solved_density():
    sol = solve_oracle(ELLIPSE, CAV, B1, 128)
    phi = 2.0 * np.pi * np.arange(8) / 8
    peaks = {}
    for radius in (10.0, 20.0, 40.0):
        z = eval_map(ELLIPSE, radius * np.exp(1j * phi))
        vals = single_layer_potential(sol.mesh, sol.psi_complex, CAV, "exterior", z)
        peaks[radius] = np.max(np.abs(vals))
    scaled = [r * peaks[r] for r in (10.0, 20.0, 40.0)]
    assert max(scaled) / min(scaled) <= 1.05
    assert 0.2 <= peaks[40.0] / peaks[10.0] <= 0.3


def test_discrepancy_of_identical_samples_is_zero():
    x = np.array([1.0 + 2.0j, -0.5j, 3.0])
    assert discrepancy(x, x) == (0.0, 0.0)
