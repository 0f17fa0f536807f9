"""Tests for block assembly and the density solve.

The conjugate-coupling matrices are cross-checked against an independent
boundary-sampling route: evaluate the continuous part of the Cauchy-type
transform directly on the circle, form the coupling combination pointwise,
and read its two-sided power coefficients off an FFT.
"""

import numpy as np
import pytest

from elastinc.geometry import (
    ConformalMap,
    build_geometry,
    eval_map,
    eval_map_derivative,
    faber_matrix,
    monomial_derivative_matrix,
    poly_eval,
)
from elastinc.loading import LoadingSpec
from elastinc.materials import MaterialPair
from elastinc.system import (
    AssemblyError,
    assemble_system,
    cavity_mode_matrix,
    exterior_blocks,
    interior_blocks,
    m_blocks,
    solve,
)

EXACT_TOL = 1e-11
SOLVE_TOL = 1e-10

CAV = MaterialPair(2.0, 1.0, cavity=True)
TRANS = MaterialPair(2.0, 1.0, lam_int=4.0, mu_int=3.0)
DISK = ConformalMap(1.0, [0.5])
ELLIPSE = ConformalMap(1.0, [0.5, 0.3])


def single_mode(m, value, n, conjugate=True):
    A = np.zeros(n + 1, dtype=complex)
    B = np.zeros(n + 1, dtype=complex)
    if conjugate:
        B[m] = value
    else:
        A[m] = value
    return LoadingSpec(A, B)


# ---------------------------------------------------------------------------
# coupling matrices against boundary sampling + FFT


def continuous_transform_rows(cmap, order):
    """Coefficient rows of the continuous Cauchy-part for modes 1..order.

    Mode m maps to -(1/m) gamma^{-m} F_m'(z); returns ascending z-polynomial
    coefficients per mode (row 0 unused).
    """
    P = faber_matrix(cmap, order)
    dP = P @ monomial_derivative_matrix(order)
    rows = np.zeros((order + 1, order + 1), dtype=complex)
    for m in range(1, order + 1):
        rows[m] = -(1.0 / m) * cmap.gamma ** (-m) * dP[m]
    return rows


def coupling_row_by_fft(cmap, j, n, n_theta=512):
    """Row j of the coupling combination via boundary sampling.

    j > 0 selects the positive mode-j density, j <= 0 the mode-j density.
    Returns (pos, neg): coefficients of w^k (k=0..n) and w^{-k} (k=0..n).
    """
    gamma = cmap.gamma
    depth = cmap.a.size - 1
    order = abs(j) + depth + 1
    rows = continuous_transform_rows(cmap, max(order, 1))
    theta = np.linspace(0.0, 2.0 * np.pi, n_theta, endpoint=False)
    w = gamma * np.exp(1j * theta)
    z = eval_map(cmap, w)

    def c1(mode):
        if mode < 1 or mode > rows.shape[0] - 1:
            return np.zeros_like(z)
        return poly_eval(rows[mode], z)

    shifted = np.zeros_like(z)
    for l in range(-1, depth + 1):
        al = cmap.coeff(l)
        shifted += np.conj(al) * gamma ** (-l) * c1(j + l)
    G = -eval_map(cmap, w) * np.conj(c1(j)) + np.conj(shifted)
    coef = np.fft.fft(G) / n_theta
    pos = np.array([coef[k] / gamma**k for k in range(n + 1)])
    neg = np.array([coef[-k % n_theta] * gamma**k for k in range(n + 1)])
    neg[0] = coef[0]
    return pos, neg


@pytest.mark.parametrize("cmap", [DISK, ELLIPSE, ConformalMap(1.3, [0.2 + 0.1j, -0.15, 0.08j])])
def test_coupling_blocks_match_fft(cmap):
    # Column 0 of the positive-family matrices is structurally discarded
    # downstream; the whole constant belongs to the negative family.
    n = 8
    depth = cmap.a.size - 1
    n_big = n + depth + 1
    bundle = build_geometry(cmap, n_big)
    M21, M41, M22, M42 = m_blocks(bundle)
    for j in range(1, n + 1):
        pos, neg = coupling_row_by_fft(cmap, j, n)
        assert np.allclose(M21[j, 1 : n + 1], pos[1:], atol=EXACT_TOL)
        assert np.allclose(M22[j, : n + 1], neg, atol=EXACT_TOL)
    for j in range(0, n + 1):
        pos, neg = coupling_row_by_fft(cmap, -j, n)
        assert np.allclose(M41[j, 1 : n + 1], pos[1:], atol=EXACT_TOL)
        assert np.allclose(M42[j, : n + 1], neg, atol=EXACT_TOL)


def test_identity_map_coupling_blocks():
    # Pure rotation/scaling map: only the mode-1 density couples, because
    # its conjugate-shifted partner hits the transform's one-sided gap.
    bundle = build_geometry(ConformalMap(1.0, []), 6)
    M21, M41, M22, M42 = m_blocks(bundle)
    assert np.allclose(M41, 0.0, atol=1e-14)
    assert np.allclose(M42, 0.0, atol=1e-14)
    assert np.allclose(M22, 0.0, atol=1e-14)
    live = M21[:, 1:].copy()
    assert live[1, 0] == pytest.approx(1.0)
    live[1, 0] = 0.0
    assert np.allclose(live, 0.0, atol=1e-14)


def test_jump_part_cancellation_decays_linearly():
    gamma = ELLIPSE.gamma
    depth = ELLIPSE.a.size - 1
    theta = np.linspace(0.0, 2.0 * np.pi, 64, endpoint=False)

    def c2(k, w):
        return gamma ** (-k) * w ** (k - 1) / eval_map_derivative(ELLIPSE, w)

    maxima = []
    for j in range(1, 11):
        w = gamma * (1.0 + 2.0 ** (-j)) * np.exp(1j * theta)
        worst = 0.0
        for k in (1, -1, 2, -2, 3, -3):
            shifted = np.zeros_like(w)
            for l in range(-1, depth + 1):
                shifted += np.conj(ELLIPSE.coeff(l)) * gamma ** (-l) * c2(k + l, w)
            comb = -eval_map(ELLIPSE, w) * np.conj(c2(k, w)) + np.conj(shifted)
            worst = max(worst, float(np.max(np.abs(comb))))
        maxima.append(worst)
    for a, b in zip(maxima, maxima[1:]):
        assert b < a
    # linear decay in the distance to the boundary: ratio about one half
    tail_ratios = [maxima[i + 1] / maxima[i] for i in range(5, 9)]
    assert all(0.4 < r < 0.6 for r in tail_ratios)


# ---------------------------------------------------------------------------
# assembled system structure


def test_exterior_block_shapes_and_zero_rows():
    bundle = build_geometry(ELLIPSE, 6)
    S = exterior_blocks(CAV, bundle)
    for i in range(4):
        for j in range(4):
            assert S[i][j].shape == (7, 7)
    # structural zeros: the mode-0 rows of every unknown block
    for i in range(4):
        for j in range(4):
            assert np.allclose(S[i][j][0], 0.0, atol=1e-14)


def test_interior_blocks_require_transmission():
    bundle = build_geometry(ELLIPSE, 4)
    with pytest.raises(AssemblyError):
        interior_blocks(CAV, bundle)
    St = interior_blocks(TRANS, bundle)
    at, bt, _ = TRANS.interior_constants()
    # the mode-0 interior density carries the constant-displacement entry
    assert St[2][1][0, 0] == pytest.approx(2 * at * np.log(bundle.gamma) - bt)
    # ... and couples through the conjugate-shift of the mode-1 transform
    assert St[3][1][0, 0] == pytest.approx(-0.3 * bt)


def test_assemble_modes_and_conflicts():
    bundle = build_geometry(DISK, 4)
    spec = single_mode(1, 1.0, 4)
    sys_cav = assemble_system(CAV, bundle, spec)
    assert sys_cav.mode == "cavity"
    assert sys_cav.blocks.shape == (4, 4, 5, 5)
    sys_tr = assemble_system(TRANS, bundle, spec)
    assert sys_tr.mode == "transmission"
    assert sys_tr.blocks.shape == (8, 8, 5, 5)
    with pytest.raises(AssemblyError):
        assemble_system(CAV, bundle, spec, mode="transmission")


def test_disk_cavity_closed_form_solution():
    n = 12
    bundle = build_geometry(DISK, n)
    beta = CAV.beta
    for m in (1, 2, 3):
        Bm = 0.8 - 0.3j
        spec = single_mode(m, Bm, n)
        system = assemble_system(CAV, bundle, spec)
        sol = solve(system)
        assert sol.converged
        assert abs(sol.xe_plus[m]) <= SOLVE_TOL
        want = -2.0 * np.conj(Bm) * m / beta  # gamma = 1
        assert abs(sol.xe_minus[m] - want) <= SOLVE_TOL * abs(want)
        # mode decoupling: no other entries are excited
        mask = np.ones(n + 1, dtype=bool)
        mask[m] = False
        assert np.max(np.abs(sol.xe_plus[mask])) <= SOLVE_TOL
        assert np.max(np.abs(sol.xe_minus[mask])) <= SOLVE_TOL


def test_zero_loading_zero_solution():
    bundle = build_geometry(ELLIPSE, 8)
    spec = LoadingSpec(np.zeros(2), np.zeros(2))
    sol = solve(assemble_system(CAV, bundle, spec))
    assert sol.residual == 0.0
    assert sol.converged
    assert np.allclose(sol.xe_plus, 0.0, atol=1e-14)
    assert np.allclose(sol.xe_minus, 0.0, atol=1e-14)


def test_realification_round_trip():
    n = 10
    bundle = build_geometry(ELLIPSE, n)
    spec = single_mode(1, 1.0 + 0.5j, n)
    for material in (CAV, TRANS):
        system = assemble_system(material, bundle, spec)
        sol = solve(system)
        x = sol.block_row()
        res = system.residual_row(x)
        rel = np.linalg.norm(res) / np.linalg.norm(2 * system.rhs_row)
        assert abs(rel - sol.residual) <= 1e-12
        # conjugate equation columns are exactly the conjugated equations
        d = n + 1
        Q = system.blocks.shape[1]
        for c in range(0, Q, 2):
            a = res[c * d : (c + 1) * d]
            b = res[(c + 1) * d : (c + 2) * d]
            assert np.allclose(b, np.conj(a), atol=1e-12)


def test_ellipse_cavity_truncation_exactness():
    spec8 = single_mode(1, 1.0, 8)
    sol8 = solve(assemble_system(CAV, build_geometry(ELLIPSE, 8), spec8))
    spec16 = single_mode(1, 1.0, 16)
    sol16 = solve(assemble_system(CAV, build_geometry(ELLIPSE, 16), spec16))
    assert abs(sol8.xe_plus[1] - sol16.xe_plus[1]) < 1e-10
    assert abs(sol8.xe_minus[1] - sol16.xe_minus[1]) < 1e-10


def test_ellipse_cavity_mode_matrix_entries():
    lam, mu = 2.0, 1.0
    mat = MaterialPair(lam, mu, cavity=True)
    alpha, beta = mat.alpha, mat.beta
    gamma, a1 = 1.0, 0.3
    bundle = build_geometry(ELLIPSE, 8)
    for m in (1, 2):
        pm = cavity_mode_matrix(mat, bundle, m)
        coup = beta * a1 ** (m - 1) * gamma ** (-3 * m - 2) * (gamma**4 - a1**2)
        want = np.array(
            [
                [-alpha / (m * gamma**m), coup, -alpha * a1**m / (m * gamma ** (3 * m)), 0.0],
                [coup, -alpha / (m * gamma**m), 0.0, -alpha * a1**m / (m * gamma ** (3 * m))],
                [beta * a1**m / (m * gamma**m), 0.0, beta * gamma**m / m, 0.0],
                [0.0, beta * a1**m / (m * gamma**m), 0.0, beta * gamma**m / m],
            ],
            dtype=complex,
        )
        assert np.allclose(pm, want, atol=1e-12)


def test_ellipse_cavity_closed_form_mode_one():
    lam, mu = 2.0, 1.0
    mat = MaterialPair(lam, mu, cavity=True)
    gamma, a1 = 1.0, 0.3
    n = 10
    bundle = build_geometry(ELLIPSE, n)
    B1 = 0.7 + 0.4j
    spec = single_mode(1, B1, n)
    sol = solve(assemble_system(mat, bundle, spec))
    assert sol.converged
    lp, l2 = lam + mu, lam + 2 * mu
    num_e = 2 * gamma**3 * l2 * (lp * (B1**2 * a1**2 + abs(B1 * a1) ** 2) + 2 * mu * abs(B1 * a1) ** 2)
    den_e = B1 * a1 * lp * (gamma**4 - a1**2)
    want_e = num_e / den_e
    num_i = -2 * gamma * l2 * (lp * (B1**2 * a1**2 + abs(B1 * a1) ** 2) + 2 * mu * abs(B1) ** 2 * gamma**4)
    den_i = B1 * lp * (gamma**4 - a1**2)
    want_i = num_i / den_i
    assert abs(sol.xe_plus[1] - want_e) <= 1e-8 * abs(want_e)
    assert abs(sol.xe_minus[1] - want_i) <= 1e-8 * abs(want_i)


def test_transmission_solve_converges_and_decouples():
    n = 12
    bundle = build_geometry(ELLIPSE, n)
    spec = single_mode(1, 1.0, n)
    system = assemble_system(TRANS, bundle, spec)
    sol = solve(system)
    assert sol.converged
    assert sol.residual <= 1e-10
    assert abs(sol.rotation_projection) <= 1e-8
    assert sol.xi_plus is not None and sol.xi_minus is not None
    assert abs(sol.xe_plus[0]) <= 1e-12
    assert abs(sol.xe_minus[0]) <= 1e-12
    assert abs(sol.xi_plus[0]) <= 1e-12
    # Joukowski map: mode-1 loading excites only mode-1 coefficients
    for vec in (sol.xe_plus, sol.xe_minus, sol.xi_plus):
        mask = np.ones(n + 1, dtype=bool)
        mask[1] = False
        assert np.max(np.abs(vec[mask])) <= 1e-9
