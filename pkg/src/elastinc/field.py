"""Displacement-field evaluation from solved density coefficients.

Outside the inclusion the displacement is the loading plus the layer
contribution; inside it is the interior layer contribution alone. Both are
driven by a pair of holomorphic functions (f, g):

    u = loading_part + (kappa f - z conj(f') - conj(g) - mean_term) / 2.

Exterior evaluation carries two interchangeable routes: a polynomial route,
exact near the boundary, that evaluates the map-adapted polynomials in z and
corrects them by explicit powers of w, and a tail route for far points that
sums the reflected coefficient series in 1/w. The switch radius keeps both
routes well inside their accurate regimes. Interior evaluation uses the
polynomial closed forms, valid throughout the inclusion.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .geometry import (
    ConformalMap,
    GeometryBundle,
    GeometryError,
    eval_map,
    eval_map_derivative,
    faber_matrix,
    grunsky_rows,
    monomial_derivative_matrix,
    poly_eval,
)
from .loading import LoadingSpec, loading_pair
from .materials import MaterialPair
from .system import DensitySolution

DEFAULT_APPROACH_STEP = 1e-3
DEFAULT_BOUNDARY_BAND = 1e-3
FAR_SWITCH_RATIO = 2.0
FAR_TAIL_TERMS = 64
NEWTON_MAX_ITER = 60
NEWTON_TOL = 1e-13
REGION_SAMPLES = 2048


class FieldError(ValueError):
    """Field evaluation was asked for something the solution cannot provide."""


@dataclass(frozen=True)
class FieldSample:
    """One evaluated displacement value.

    w is the preimage coordinate (NaN when the point was given in the
    physical plane and no preimage is available), z the physical point and
    u the complex displacement u1 + i u2. f, fprime, g are the values of
    the total holomorphic pair and its derivative at z, so that the
    traction potential can be formed later. parts splits u into the
    loading part and the three layer terms; for interior samples the
    load_part slot carries the density-mean constant.
    """

    w: complex
    z: complex
    u: complex
    region: str
    f: complex
    fprime: complex
    g: complex
    parts: dict = field(default_factory=dict)
    near_boundary: bool = False

    def __post_init__(self) -> None:
        if self.region not in ("exterior", "interior"):
            raise FieldError(f"unknown region {self.region!r}")


@dataclass(frozen=True)
class GridSpec:
    """Axis-aligned rectangular grid in the physical plane, row-major order."""

    xmin: float
    xmax: float
    ymin: float
    ymax: float
    nx: int
    ny: int
    band: float = DEFAULT_BOUNDARY_BAND

    def points(self) -> np.ndarray:
        xs = np.linspace(self.xmin, self.xmax, self.nx)
        ys = np.linspace(self.ymin, self.ymax, self.ny)
        X, Y = np.meshgrid(xs, ys)
        return (X + 1j * Y).ravel()


def _as_map(geometry) -> ConformalMap:
    if isinstance(geometry, GeometryBundle):
        return geometry.cmap
    return geometry


def _two_sided(pos: np.ndarray, neg: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Evaluate sum_k pos[k] w^k (k >= 0) + sum_k neg[k] w^{-k} (k >= 1)."""
    out = np.zeros_like(w)
    for k in range(pos.size - 1, -1, -1):
        out = out * w + pos[k]
    winv = 1.0 / w
    acc = np.zeros_like(w)
    for k in range(neg.size - 1, 0, -1):
        acc = (acc + neg[k]) * winv
    return out + acc


def _shifted_coefficients(cmap: ConformalMap, full: dict) -> dict:
    """Mode coefficients of the conjugate-coordinate multiple of a density.

    full maps mode index k to its coefficient; the returned dict maps j to
    sum_l conj(a_l) gamma^{-l} full[j - l] over the map coefficients
    (a_{-1} = 1).
    """
    gamma = cmap.gamma
    depth = cmap.a.size - 1
    out: dict[int, complex] = {}
    for k, xk in full.items():
        if xk == 0.0:
            continue
        for l in range(-1, depth + 1):
            al = cmap.coeff(l)
            if al == 0.0:
                continue
            j = k + l
            out[j] = out.get(j, 0.0) + np.conj(al) * gamma ** (-l) * xk
    return out


class FieldEvaluator:
    """Precomputed series data for evaluating one solved configuration."""

    def __init__(self, solution: DensitySolution, loading: LoadingSpec,
                 geometry, material: MaterialPair):
        cmap = _as_map(geometry)
        self.cmap = cmap
        self.material = material
        self.solution = solution
        self.loading = loading
        gamma = cmap.gamma
        n = solution.n
        depth = cmap.a.size - 1
        self.gamma = gamma
        self.n = n

        order = max(n + max(depth, 0), loading.order, 1)
        P = faber_matrix(cmap, order)
        dP = P @ monomial_derivative_matrix(order)

        xp = solution.xe_plus
        xm = solution.xe_minus
        full = {m: xp[m] for m in range(1, n + 1)}
        full.update({-k: xm[k] for k in range(1, n + 1)})
        full[0] = xm[0]
        y = _shifted_coefficients(cmap, full)

        scale = np.zeros(order + 1)
        scale[1:] = 1.0 / (np.arange(1, order + 1) * gamma ** np.arange(1, order + 1))

        # polynomial route: z-polynomial rows plus explicit powers of w
        self.poly_L = -np.einsum("m,mk->k", xp[1:] * scale[1 : n + 1], P[1 : n + 1])
        self.wpos_L = np.concatenate([[0.0], xp[1:] * scale[1 : n + 1]])
        self.wneg_L = np.concatenate(
            [[0.0], -xm[1:] * gamma ** np.arange(1, n + 1) / np.arange(1, n + 1)]
        )

        self.poly_Lbar = -np.einsum(
            "m,mk->k", np.conj(xm[1:]) * scale[1 : n + 1], P[1 : n + 1]
        )
        self.wpos_Lbar = np.concatenate([[0.0], np.conj(xm[1:]) * scale[1 : n + 1]])
        self.wneg_Lbar = np.concatenate(
            [[0.0], -np.conj(xp[1:]) * gamma ** np.arange(1, n + 1) / np.arange(1, n + 1)]
        )

        self.poly_C = -np.einsum("m,mk->k", xp[1:] * scale[1 : n + 1], dP[1 : n + 1])
        # numerator of the 1/Psi' part: sum_m xp[m] gamma^{-m} w^{m-1}
        #                             + xm[0]/w + sum_k xm[k] gamma^k w^{-k-1}
        vpos = np.zeros(order + 1, dtype=complex)
        vpos[: n] = xp[1 : n + 1] * gamma ** (-np.arange(1, n + 1))
        vneg = np.zeros(n + 2, dtype=complex)
        vneg[1] = xm[0]
        vneg[2 : n + 2] = xm[1:] * gamma ** np.arange(1, n + 1)
        self.vpos_C, self.vneg_C = vpos, vneg

        ypos = np.zeros(order + 1, dtype=complex)
        poly_Cy = np.zeros(order + 1, dtype=complex)
        yneg = np.zeros(n + 3, dtype=complex)
        for j, yj in sorted(y.items()):
            if j >= 1:
                poly_Cy += yj * (-scale[j]) * dP[j]
                ypos[j - 1] += yj * gamma ** (-j)
            elif j == 0:
                yneg[1] += yj
            else:
                yneg[-j + 1] += yj * gamma ** (-j)
        self.poly_Cy = poly_Cy
        self.ypos_C, self.yneg_C = ypos, yneg
        self.y = y
        self.x0_log = xm[0]
        self.x0bar_log = np.conj(xm[0])

        # tail route: reflected coefficient series in 1/w
        kfar = FAR_TAIL_TERMS
        Cg = grunsky_rows(cmap, order, kfar, guard=kfar, P=P)
        ks = np.arange(1, kfar + 1)
        tail_f = -np.einsum("m,mk->k", xp[1 : n + 1] * scale[1 : n + 1], Cg[1 : n + 1, 1:])
        tail_f[: n] -= xm[1:] * gamma ** np.arange(1, n + 1) / np.arange(1, n + 1)
        self.tail_f = np.concatenate([[0.0], tail_f])
        tail_fbar = -np.einsum(
            "m,mk->k", np.conj(xm[1 : n + 1]) * scale[1 : n + 1], Cg[1 : n + 1, 1:]
        )
        tail_fbar[: n] -= np.conj(xp[1:]) * gamma ** np.arange(1, n + 1) / np.arange(1, n + 1)
        self.tail_fbar = np.concatenate([[0.0], tail_fbar])
        # numerator coefficients of w^{-k-1} in the shifted-density transform
        qco = np.zeros(kfar + 1, dtype=complex)
        for j, yj in sorted(y.items()):
            if j >= 1:
                qco[1:] += yj * (ks / j) * gamma ** (-j) * Cg[j, 1:]
            elif j <= -1 and -j <= kfar:
                qco[-j] += yj * gamma ** (-j)
        self.tail_q = qco
        self.y0 = y.get(0, 0.0)

        # loading polynomials
        fH, gH = loading_pair(loading, cmap)
        dfH = fH[1:] * np.arange(1, fH.size)
        self.fH, self.dfH, self.gH = fH, dfH, gH

        # interior polynomials (transmission mode)
        if solution.mode == "transmission":
            xpi = solution.xi_plus
            xmi = solution.xi_minus
            full_i = {m: xpi[m] for m in range(1, n + 1)}
            full_i.update({-k: xmi[k] for k in range(1, n + 1)})
            full_i[0] = xmi[0]
            yi = _shifted_coefficients(cmap, full_i)
            self.poly_Li = -np.einsum("m,mk->k", xpi[1:] * scale[1 : n + 1], P[1 : n + 1])
            self.const_Li = xmi[0] * np.log(gamma)
            self.poly_Ci = -np.einsum("m,mk->k", xpi[1:] * scale[1 : n + 1], dP[1 : n + 1])
            self.poly_Libar = -np.einsum(
                "m,mk->k", np.conj(xmi[1:]) * scale[1 : n + 1], P[1 : n + 1]
            )
            self.const_Libar = np.conj(xmi[0]) * np.log(gamma)
            poly_Cyi = np.zeros(order + 1, dtype=complex)
            for j, yj in sorted(yi.items()):
                if j >= 1:
                    poly_Cyi += yj * (-scale[j]) * dP[j]
            self.poly_Cyi = poly_Cyi
            self.mean_i = xmi[0]

    # -- exterior ----------------------------------------------------------

    def _pair_near(self, w, z):
        alpha, beta = self.material.alpha, self.material.beta
        dpsi = eval_map_derivative(self.cmap, w)
        logw = np.log(w)
        Lpsi = poly_eval(self.poly_L, z) + _two_sided(self.wpos_L, self.wneg_L, w)
        Lpsi = Lpsi + self.x0_log * logw
        Lbar = poly_eval(self.poly_Lbar, z) + _two_sided(self.wpos_Lbar, self.wneg_Lbar, w)
        Lbar = Lbar + self.x0bar_log * logw
        Cpsi = poly_eval(self.poly_C, z) + _two_sided(self.vpos_C, self.vneg_C, w) / dpsi
        Cy = poly_eval(self.poly_Cy, z) + _two_sided(self.ypos_C, self.yneg_C, w) / dpsi
        f = beta * Lpsi
        fp = beta * Cpsi
        g = -alpha * Lbar - beta * Cy
        return f, fp, g

    def _pair_far(self, w, z):
        alpha, beta = self.material.alpha, self.material.beta
        dpsi = eval_map_derivative(self.cmap, w)
        logw = np.log(w)
        zero = np.zeros(1)
        Lpsi = _two_sided(zero, self.tail_f, w) + self.x0_log * logw
        Lbar = _two_sided(zero, self.tail_fbar, w) + self.x0bar_log * logw
        ks = np.arange(self.tail_f.size)
        dtail = self.tail_f * (-ks)
        Cpsi = (_two_sided(zero, dtail, w) / w + self.x0_log / w) / dpsi
        Cy = (_two_sided(zero, self.tail_q, w) / w + self.y0 / w) / dpsi
        f = beta * Lpsi
        fp = beta * Cpsi
        g = -alpha * Lbar - beta * Cy
        return f, fp, g

    def exterior_arrays(self, w: np.ndarray) -> dict:
        """Vectorized exterior evaluation at preimage points w, |w| > gamma."""
        w = np.asarray(w, dtype=complex)
        if np.any(np.abs(w) <= self.gamma):
            raise FieldError("exterior evaluation requires |w| > gamma")
        z = eval_map(self.cmap, w)
        f = np.zeros_like(w)
        fp = np.zeros_like(w)
        g = np.zeros_like(w)
        near = np.abs(w) < FAR_SWITCH_RATIO * self.gamma
        if np.any(near):
            f[near], fp[near], g[near] = self._pair_near(w[near], z[near])
        if np.any(~near):
            f[~near], fp[~near], g[~near] = self._pair_far(w[~near], z[~near])
        kappa = self.material.kappa
        H = (
            kappa * poly_eval(self.fH, z)
            - z * np.conj(poly_eval(self.dfH, z))
            - np.conj(poly_eval(self.gH, z))
        )
        f_part = 0.5 * kappa * f
        fp_part = -0.5 * z * np.conj(fp)
        g_part = -0.5 * np.conj(g)
        u = H + f_part + fp_part + g_part
        return {
            "z": z,
            "u": u,
            "f": poly_eval(self.fH, z) + 0.5 * f,
            "fprime": poly_eval(self.dfH, z) + 0.5 * fp,
            "g": poly_eval(self.gH, z) + 0.5 * g,
            "load_part": H,
            "f_part": f_part,
            "fprime_part": fp_part,
            "g_part": g_part,
        }

    # -- interior ----------------------------------------------------------

    def interior_arrays_z(self, z: np.ndarray) -> dict:
        """Vectorized interior evaluation at physical points z."""
        if self.solution.mode != "transmission":
            raise FieldError("cavity solutions have no interior field")
        z = np.asarray(z, dtype=complex)
        at, bt, kt = self.material.interior_constants()
        f = bt * (poly_eval(self.poly_Li, z) + self.const_Li)
        fp = bt * poly_eval(self.poly_Ci, z)
        g = -at * (poly_eval(self.poly_Libar, z) + self.const_Libar) - bt * poly_eval(
            self.poly_Cyi, z
        )
        mean = bt * self.mean_i
        f_part = 0.5 * kt * f
        fp_part = -0.5 * z * np.conj(fp)
        g_part = -0.5 * np.conj(g)
        load = np.full_like(z, -0.5 * mean)
        u = load + f_part + fp_part + g_part
        return {
            "z": z,
            "u": u,
            "f": 0.5 * f,
            "fprime": 0.5 * fp,
            "g": 0.5 * g,
            "load_part": load,
            "f_part": f_part,
            "fprime_part": fp_part,
            "g_part": g_part,
        }

    def interior_arrays(self, w: np.ndarray) -> dict:
        """Interior evaluation at preimage points in the extension band."""
        w = np.asarray(w, dtype=complex)
        if np.any(np.abs(w) > self.gamma * (1.0 + 1e-12)):
            raise FieldError("interior evaluation requires |w| <= gamma")
        z = eval_map(self.cmap, w)
        return self.interior_arrays_z(z)


def _sample_from(arrays: dict, i: int, w: complex, region: str,
                 near_boundary: bool = False) -> FieldSample:
    parts = {
        key: complex(arrays[key][i])
        for key in ("load_part", "f_part", "fprime_part", "g_part")
    }
    return FieldSample(
        w=complex(w),
        z=complex(arrays["z"][i]),
        u=complex(arrays["u"][i]),
        region=region,
        f=complex(arrays["f"][i]),
        fprime=complex(arrays["fprime"][i]),
        g=complex(arrays["g"][i]),
        parts=parts,
        near_boundary=near_boundary,
    )


def eval_exterior(solution: DensitySolution, loading: LoadingSpec, geometry,
                  material: MaterialPair, w) -> FieldSample:
    """Displacement sample at one exterior preimage point, |w| > gamma."""
    ev = FieldEvaluator(solution, loading, geometry, material)
    arrays = ev.exterior_arrays(np.array([w], dtype=complex))
    return _sample_from(arrays, 0, w, "exterior")


def eval_interior(solution: DensitySolution, geometry, material: MaterialPair,
                  w) -> FieldSample:
    """Displacement sample at one interior preimage point, |w| <= gamma."""
    cmap = _as_map(geometry)
    loading = LoadingSpec(np.zeros(1), np.zeros(1))
    ev = FieldEvaluator(solution, loading, cmap, material)
    arrays = ev.interior_arrays(np.array([w], dtype=complex))
    return _sample_from(arrays, 0, w, "interior")


def eval_traction_potential(sample: FieldSample, material: MaterialPair) -> complex:
    """The traction potential at a sample, defined up to an additive constant."""
    mu = material.mu_ext if sample.region == "exterior" else material.mu_int
    return mu * (sample.f + sample.z * np.conj(sample.fprime) + np.conj(sample.g))


def _traction_arrays(arrays: dict, mu: float) -> np.ndarray:
    return mu * (arrays["f"] + arrays["z"] * np.conj(arrays["fprime"]) + np.conj(arrays["g"]))


def _richardson(outer: np.ndarray, inner: np.ndarray) -> np.ndarray:
    """Linear extrapolation to the boundary from values at eps and eps/2."""
    return 2.0 * inner - outer


def transmission_residual(solution: DensitySolution, loading: LoadingSpec,
                          geometry, material: MaterialPair, angles,
                          step: float = DEFAULT_APPROACH_STEP) -> tuple[float, float]:
    """Interface mismatch of the solved transmission field.

    Returns (r_disp, r_trac): the largest displacement gap across the
    boundary and the largest pairwise spread of the traction-potential
    difference, both Richardson-extrapolated to the interface from radii
    gamma (1 +/- step) and gamma (1 +/- step/2).
    """
    if solution.mode != "transmission":
        raise FieldError("transmission residual needs a transmission solution")
    cmap = _as_map(geometry)
    ev = FieldEvaluator(solution, loading, cmap, material)
    theta = _as_angles(angles)
    gamma = cmap.gamma
    ring = np.exp(1j * theta)

    ue = _richardson(
        ev.exterior_arrays(gamma * (1.0 + step) * ring)["u"],
        ev.exterior_arrays(gamma * (1.0 + 0.5 * step) * ring)["u"],
    )
    ui = _richardson(
        ev.interior_arrays(gamma * (1.0 - step) * ring)["u"],
        ev.interior_arrays(gamma * (1.0 - 0.5 * step) * ring)["u"],
    )
    r_disp = float(np.max(np.abs(ue - ui)))

    te = _richardson(
        _traction_arrays(ev.exterior_arrays(gamma * (1.0 + step) * ring), material.mu_ext),
        _traction_arrays(ev.exterior_arrays(gamma * (1.0 + 0.5 * step) * ring), material.mu_ext),
    )
    ti = _richardson(
        _traction_arrays(ev.interior_arrays(gamma * (1.0 - step) * ring), material.mu_int),
        _traction_arrays(ev.interior_arrays(gamma * (1.0 - 0.5 * step) * ring), material.mu_int),
    )
    diff = te - ti
    r_trac = float(np.max(np.abs(diff[:, None] - diff[None, :])))
    return r_disp, r_trac


def boundary_traction_spread(solution: DensitySolution, loading: LoadingSpec,
                             geometry, material: MaterialPair, angles,
                             step: float = DEFAULT_APPROACH_STEP) -> float:
    """Largest pairwise spread of the exterior traction potential on the boundary.

    For a traction-free cavity this measures how far the solved field is
    from exactly cancelling the loading traction.
    """
    cmap = _as_map(geometry)
    ev = FieldEvaluator(solution, loading, cmap, material)
    theta = _as_angles(angles)
    ring = np.exp(1j * theta)
    gamma = cmap.gamma
    te = _richardson(
        _traction_arrays(ev.exterior_arrays(gamma * (1.0 + step) * ring), material.mu_ext),
        _traction_arrays(ev.exterior_arrays(gamma * (1.0 + 0.5 * step) * ring), material.mu_ext),
    )
    return float(np.max(np.abs(te[:, None] - te[None, :])))


def _as_angles(angles) -> np.ndarray:
    if np.isscalar(angles):
        return np.linspace(0.0, 2.0 * np.pi, int(angles), endpoint=False)
    return np.asarray(angles, dtype=float)


# -- physical-plane plumbing -------------------------------------------------


def invert_map(cmap: ConformalMap, z, w0=None) -> np.ndarray:
    """Newton inversion of the exterior map at physical points z."""
    z = np.asarray(z, dtype=complex)
    w = np.array(z - cmap.coeff(0), dtype=complex) if w0 is None else np.array(w0, dtype=complex)
    w = np.where(np.abs(w) < cmap.gamma, 2.0 * cmap.gamma * np.exp(1j * np.angle(w)), w)
    for _ in range(NEWTON_MAX_ITER):
        val = eval_map(cmap, w, margin=0.5) - z
        if np.max(np.abs(val)) < NEWTON_TOL * max(1.0, float(np.max(np.abs(z)))):
            break
        w = w - val / eval_map_derivative(cmap, w, margin=0.5)
    else:
        raise FieldError("map inversion did not converge")
    return w


def classify_points(cmap: ConformalMap, z, band: float = DEFAULT_BOUNDARY_BAND):
    """Region tags and boundary-band flags for physical points.

    Returns (regions, near) where regions[i] is "exterior" or "interior"
    by the winding number of the mapped boundary circle, and near[i] marks
    points within band of the sampled boundary polyline.
    """
    z = np.asarray(z, dtype=complex)
    theta = np.linspace(0.0, 2.0 * np.pi, REGION_SAMPLES, endpoint=False)
    curve = eval_map(cmap, cmap.gamma * np.exp(1j * theta))
    closed = np.concatenate([curve, curve[:1]])
    regions = np.empty(z.shape, dtype=object)
    near = np.zeros(z.shape, dtype=bool)
    for i, zi in np.ndenumerate(z):
        rel = closed - zi
        dist = float(np.min(np.abs(rel)))
        turns = np.angle(rel[1:] / rel[:-1]).sum() / (2.0 * np.pi)
        regions[i] = "interior" if abs(turns) > 0.5 else "exterior"
        near[i] = dist <= band
    return regions, near


def grid_field(solution: DensitySolution, loading: LoadingSpec, geometry,
               material: MaterialPair, grid: GridSpec) -> list[FieldSample]:
    """Evaluate the solved field on a rectangular grid of physical points.

    Exterior points are inverted through the map; interior points use the
    polynomial forms directly (preimage recorded as NaN). Interior points
    of a cavity get NaN displacement. Points inside the boundary band are
    flagged, not skipped.
    """
    cmap = _as_map(geometry)
    ev = FieldEvaluator(solution, loading, cmap, material)
    pts = grid.points()
    regions, near = classify_points(cmap, pts, band=grid.band)
    samples: list[FieldSample] = []
    ext_idx = [i for i in range(pts.size) if regions[i] == "exterior"]
    if ext_idx:
        w_ext = invert_map(cmap, pts[ext_idx])
        # points the inversion pushed to the boundary circle are band cases
        w_ext = np.where(
            np.abs(w_ext) <= cmap.gamma, cmap.gamma * (1.0 + 1e-9) * w_ext / np.abs(w_ext), w_ext
        )
        arrays_ext = ev.exterior_arrays(w_ext)
    int_idx = [i for i in range(pts.size) if regions[i] == "interior"]
    if int_idx and solution.mode == "transmission":
        arrays_int = ev.interior_arrays_z(pts[int_idx])
    ext_pos = {i: j for j, i in enumerate(ext_idx)}
    int_pos = {i: j for j, i in enumerate(int_idx)}
    nanval = complex(np.nan, np.nan)
    for i in range(pts.size):
        if regions[i] == "exterior":
            j = ext_pos[i]
            samples.append(
                _sample_from(arrays_ext, j, w_ext[j], "exterior", near_boundary=bool(near[i]))
            )
        elif solution.mode == "transmission":
            j = int_pos[i]
            samples.append(
                _sample_from(arrays_int, j, nanval, "interior", near_boundary=bool(near[i]))
            )
        else:
            samples.append(
                FieldSample(
                    w=nanval,
                    z=complex(pts[i]),
                    u=nanval,
                    region="interior",
                    f=nanval,
                    fprime=nanval,
                    g=nanval,
                    parts={},
                    near_boundary=bool(near[i]),
                )
            )
    return samples


# -- basis-level transforms (used for cross-checks) --------------------------


def log_layer_exterior(cmap: ConformalMap, plus: np.ndarray, minus: np.ndarray, w):
    """The log-kernel layer transform of a density, evaluated outside.

    plus[m] multiplies the mode-m basis density (m >= 1), minus[k] the
    mode-(-k) one, minus[0] the mode-0 one. Straightforward per-mode sum;
    the evaluator reproduces this with precomputed combined series.
    """
    w = np.asarray(w, dtype=complex)
    gamma = cmap.gamma
    z = eval_map(cmap, w)
    P = faber_matrix(cmap, max(plus.size - 1, 1))
    out = minus[0] * np.log(w)
    for m in range(1, plus.size):
        if plus[m] != 0.0:
            out = out + plus[m] * (-1.0 / m) * gamma ** (-m) * (poly_eval(P[m], z) - w**m)
    for k in range(1, minus.size):
        if minus[k] != 0.0:
            out = out + minus[k] * (-1.0 / k) * gamma**k * w ** (-k)
    return out


def log_layer_interior(cmap: ConformalMap, plus: np.ndarray, minus: np.ndarray, z):
    """Interior branch of the log-kernel layer transform at physical points."""
    z = np.asarray(z, dtype=complex)
    gamma = cmap.gamma
    P = faber_matrix(cmap, max(plus.size - 1, 1))
    out = minus[0] * np.log(gamma) * np.ones_like(z)
    for m in range(1, plus.size):
        if plus[m] != 0.0:
            out = out + plus[m] * (-1.0 / m) * gamma ** (-m) * poly_eval(P[m], z)
    return out


def deriv_layer_exterior(cmap: ConformalMap, plus: np.ndarray, minus: np.ndarray, w):
    """z-derivative of the log-kernel layer transform, exterior branch."""
    w = np.asarray(w, dtype=complex)
    gamma = cmap.gamma
    z = eval_map(cmap, w)
    dpsi = eval_map_derivative(cmap, w)
    order = max(plus.size - 1, 1)
    P = faber_matrix(cmap, order)
    dP = P @ monomial_derivative_matrix(order)
    out = minus[0] / (w * dpsi)
    for m in range(1, plus.size):
        if plus[m] != 0.0:
            out = out + plus[m] * (
                (-1.0 / m) * gamma ** (-m) * poly_eval(dP[m], z)
                + gamma ** (-m) * w ** (m - 1) / dpsi
            )
    for k in range(1, minus.size):
        if minus[k] != 0.0:
            out = out + minus[k] * gamma**k * w ** (-k - 1) / dpsi
    return out


def deriv_layer_interior(cmap: ConformalMap, plus: np.ndarray, minus: np.ndarray, z):
    """z-derivative of the log-kernel layer transform, interior branch."""
    z = np.asarray(z, dtype=complex)
    gamma = cmap.gamma
    order = max(plus.size - 1, 1)
    P = faber_matrix(cmap, order)
    dP = P @ monomial_derivative_matrix(order)
    out = np.zeros_like(z)
    for m in range(1, plus.size):
        if plus[m] != 0.0:
            out = out + plus[m] * (-1.0 / m) * gamma ** (-m) * poly_eval(dP[m], z)
    return out
