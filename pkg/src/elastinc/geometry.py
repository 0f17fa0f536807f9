"""Exterior conformal map and every map-derived matrix.

The inclusion boundary is the image of the circle |w| = gamma under

    Psi(w) = w + a0 + a1/w + a2/w^2 + ... + aK/w^K ,

a Laurent polynomial normalized to derivative 1 at infinity. From the map the
module builds, at a shared truncation order n:

* the Faber polynomial coefficient matrix (rows = polynomials, unit lower
  triangular) and its exact inverse,
* the derivative matrices expressing F_m' in the Faber basis,
* the Grunsky coefficient matrix (negative-power coefficients of the
  composition F_m(Psi(w))), via exact Laurent composition,
* Hankel/Toeplitz/corner matrices of the map coefficients,
* the diagonal and shift matrices used by the block formulas.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_triangular

from .laurent import LaurentSeries


class GeometryError(ValueError):
    """Invalid map data or evaluation outside the allowed domain."""


class WindowError(GeometryError):
    """Requested series coefficients outside the exactly-computed range."""


DEFAULT_EXTENSION_MARGIN = 0.1  # fraction of gamma the map may be evaluated inside
SINGULAR_DERIVATIVE_TOL = 1e-12
SIMPLE_CURVE_SAMPLES = 1024


@dataclass(frozen=True)
class ConformalMap:
    """Exterior map data: conformal radius and coefficients (a0, a1, ..., aK)."""

    gamma: float
    a: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=complex))
    validate: bool = True

    def __post_init__(self) -> None:
        a = np.asarray(self.a, dtype=complex).reshape(-1)
        object.__setattr__(self, "a", a)
        if not self.gamma > 0.0:
            raise GeometryError(f"conformal radius must be positive, got {self.gamma}")
        if self.validate:
            _validate_boundary(self)

    @property
    def depth(self) -> int:
        """Largest K with a_K retained (0 for a pure translation or identity)."""
        return max(self.a.size - 1, 0)

    @property
    def rho0(self) -> float:
        return float(np.log(self.gamma))

    def coeff(self, k: int) -> complex:
        """Laurent coefficient a_k with the conventions a_{-1}=1, a_{-m}=0 (m>=2)."""
        if k == -1:
            return 1.0 + 0.0j
        if 0 <= k < self.a.size:
            return complex(self.a[k])
        return 0.0 + 0.0j

    def laurent(self) -> LaurentSeries:
        """The map as a Laurent series in w."""
        if self.a.size == 0:
            return LaurentSeries.monomial(1)
        coeffs = np.concatenate([self.a[::-1], [1.0]])
        return LaurentSeries(-self.depth if self.a.size > 1 else 0, coeffs)


def eval_map(cmap: ConformalMap, w, margin: float | None = None):
    """Psi(w); allowed for |w| >= gamma*(1 - margin), default margin 0.1."""
    w = np.asarray(w, dtype=complex)
    frac = DEFAULT_EXTENSION_MARGIN if margin is None else float(margin)
    if np.any(np.abs(w) < cmap.gamma * (1.0 - frac) - 1e-15):
        raise GeometryError(
            "map evaluated below the analytic-extension radius "
            f"gamma*(1-{frac}) = {cmap.gamma * (1.0 - frac):g}"
        )
    out = w + 0.0j
    winv = 1.0 / w
    acc = np.zeros_like(out)
    for ak in cmap.a[::-1]:
        acc = (acc + ak) * winv
    return out + acc * w  # Horner in 1/w starting at a0*w^0


def eval_map_derivative(cmap: ConformalMap, w, margin: float | None = None):
    """Psi'(w) = 1 - sum_k k a_k w^(-k-1); errors near a zero of the derivative."""
    w = np.asarray(w, dtype=complex)
    frac = DEFAULT_EXTENSION_MARGIN if margin is None else float(margin)
    if np.any(np.abs(w) < cmap.gamma * (1.0 - frac) - 1e-15):
        raise GeometryError("map derivative evaluated below the analytic-extension radius")
    winv = 1.0 / w
    acc = np.zeros_like(np.asarray(w, dtype=complex))
    for k in range(cmap.a.size - 1, 0, -1):
        acc = (acc + k * cmap.a[k]) * winv
    out = 1.0 - acc * winv
    if np.any(np.abs(out) < SINGULAR_DERIVATIVE_TOL):
        raise GeometryError("map derivative vanishes at an evaluation point")
    return out


def eval_map_second_derivative(cmap: ConformalMap, w, margin: float | None = None):
    """Psi''(w) = sum_k k (k+1) a_k w^(-k-2)."""
    w = np.asarray(w, dtype=complex)
    frac = DEFAULT_EXTENSION_MARGIN if margin is None else float(margin)
    if np.any(np.abs(w) < cmap.gamma * (1.0 - frac) - 1e-15):
        raise GeometryError("map second derivative evaluated below the analytic-extension radius")
    winv = 1.0 / w
    acc = np.zeros_like(np.asarray(w, dtype=complex))
    for k in range(cmap.a.size - 1, 0, -1):
        acc = (acc + k * (k + 1) * cmap.a[k]) * winv
    return acc * winv * winv


def boundary_point(cmap: ConformalMap, theta):
    """Return (z, h): boundary point Psi(gamma e^{i theta}) and scale factor.

    h is |w Psi'(w)| on |w| = gamma, the arclength density dsigma = h dtheta.
    """
    w = cmap.gamma * np.exp(1j * np.asarray(theta, dtype=float))
    z = eval_map(cmap, w)
    h = np.abs(w * eval_map_derivative(cmap, w))
    return z, h


def _validate_boundary(cmap: ConformalMap, samples: int = SIMPLE_CURVE_SAMPLES) -> None:
    theta = np.linspace(0.0, 2.0 * np.pi, samples, endpoint=False)
    z, h = boundary_point(cmap, theta)
    if np.any(h <= 1e-12):
        raise GeometryError("degenerate parametrization: boundary scale factor vanishes")
    pts = np.column_stack([z.real, z.imag])
    nxt = np.roll(pts, -1, axis=0)
    signed_area = 0.5 * np.sum(pts[:, 0] * nxt[:, 1] - pts[:, 1] * nxt[:, 0])
    if signed_area <= 0.0:
        raise GeometryError("boundary curve has reversed orientation (map folds)")
    if _polyline_self_intersects(pts):
        raise GeometryError("boundary curve is not simple (sampled self-intersection)")


def _polyline_self_intersects(pts: np.ndarray) -> bool:
    """Proper-intersection sweep over all non-adjacent closed-polyline segments."""
    m = pts.shape[0]
    p1 = pts
    p2 = np.roll(pts, -1, axis=0)

    def cross(o, d, q):
        # z-component of (d) x (q - o), broadcastable
        return d[..., 0] * (q[..., 1] - o[..., 1]) - d[..., 1] * (q[..., 0] - o[..., 0])

    d = p2 - p1
    # pairwise orientation tests, i indexes rows, j columns
    d1 = cross(p1[:, None, :], d[:, None, :], p1[None, :, :])
    d2 = cross(p1[:, None, :], d[:, None, :], p2[None, :, :])
    d3 = cross(p1[None, :, :], d[None, :, :], p1[:, None, :])
    d4 = cross(p1[None, :, :], d[None, :, :], p2[:, None, :])
    proper = (d1 * d2 < 0.0) & (d3 * d4 < 0.0)
    idx = np.arange(m)
    adjacent = (np.abs(idx[:, None] - idx[None, :]) % (m - 1)) <= 1
    return bool(np.any(proper & ~adjacent))


# ---------------------------------------------------------------------------
# coefficient matrices


def faber_matrix(cmap: ConformalMap, n: int) -> np.ndarray:
    """Rows 0..n of Faber polynomial coefficients (row m: F_m, ascending powers).

    Built from the recursion
        F_{m+1}(z) = z F_m(z) - m a_m - sum_{k=0}^{m} a_{m-k} F_k(z),
    which yields a unit-lower-triangular matrix.
    """
    if n < 0:
        raise GeometryError("truncation order must be nonnegative")
    P = np.zeros((n + 1, n + 1), dtype=complex)
    P[0, 0] = 1.0
    for m in range(n):
        row = np.zeros(n + 1, dtype=complex)
        row[1 : m + 2] = P[m, : m + 1]  # z * F_m
        row[0] -= m * cmap.coeff(m)
        for k in range(m + 1):
            ak = cmap.coeff(m - k)
            if ak != 0.0:
                row[: k + 1] -= ak * P[k, : k + 1]
        P[m + 1] = row
    return P


def faber_inverse(P: np.ndarray) -> np.ndarray:
    """Exact inverse of the unit-lower-triangular Faber coefficient matrix."""
    return solve_triangular(P, np.eye(P.shape[0], dtype=complex), lower=True, unit_diagonal=True)


def reciprocal_derivative_coefficients(cmap: ConformalMap, n: int) -> np.ndarray:
    """Coefficients r_s of the expansion 1/Psi'(w) = sum_{s>=0} r_s w^{-s}."""
    a = cmap.a
    r = np.zeros(n + 1, dtype=complex)
    r[0] = 1.0
    for s in range(1, n + 1):
        acc = 0.0 + 0.0j
        for k in range(1, a.size):
            if k + 1 <= s:
                acc += k * a[k] * r[s - k - 1]
        r[s] = acc
    return r


def faber_derivative_matrices(cmap: ConformalMap, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Matrices (Dt, D) expressing Faber derivatives in the Faber basis.

    Row m of Dt holds the coefficients of F_m' = sum_j Dt[m,j] F_j.
    Composing with the map, F_m'(Psi(w)) = m w^{m-1}/Psi'(w) plus strictly
    negative powers, while each F_j(Psi(w)) contributes w^j as its only
    nonnegative power; matching nonnegative powers gives
    Dt[m, j] = m r_{m-1-j} with r the reciprocal-derivative coefficients.
    The same matrix equals P T P^{-1} (T the monomial-derivative shift);
    the recurrence form avoids the triangular inverse's roundoff. D
    rescales row m by 1/(m gamma^m), with row 0 zero.
    """
    r = reciprocal_derivative_coefficients(cmap, n)
    Dt = np.zeros((n + 1, n + 1), dtype=complex)
    for m in range(1, n + 1):
        Dt[m, :m] = m * r[m - 1 :: -1]
    scale = np.zeros(n + 1)
    scale[1:] = 1.0 / (np.arange(1, n + 1) * cmap.gamma ** np.arange(1, n + 1))
    D = Dt * scale[:, None]
    return Dt, D


def monomial_derivative_matrix(n: int) -> np.ndarray:
    """Subdiagonal (1, 2, ..., n): the d/dz action on monomial coefficients."""
    T = np.zeros((n + 1, n + 1), dtype=complex)
    for m in range(1, n + 1):
        T[m, m - 1] = m
    return T


def _composition_rows(cmap: ConformalMap, rows: int, window: tuple[int, int],
                      P: np.ndarray | None = None) -> list[LaurentSeries]:
    """Laurent series of F_m(Psi(w)) for m = 0..rows, truncated to the window."""
    if P is None:
        P = faber_matrix(cmap, rows)
    psi = cmap.laurent()
    powers = [LaurentSeries.monomial(0)]
    for _ in range(rows):
        powers.append(powers[-1].multiply(psi, window=window))
    out = []
    for m in range(rows + 1):
        acc = LaurentSeries.zero()
        for j in range(m + 1):
            pj = P[m, j]
            if pj != 0.0:
                acc = acc.add(powers[j].scale(pj))
        out.append(acc.truncate(window))
    return out


def grunsky_rows(cmap: ConformalMap, rows: int, kmax: int, guard: int | None = None,
                 P: np.ndarray | None = None) -> np.ndarray:
    """Grunsky coefficients c_{mk} for m = 0..rows, k = 0..kmax.

    c_{mk} is the coefficient of w^{-k} in F_m(Psi(w)). The Laurent window is
    [-(rows + guard), rows]; coefficients are exact for k <= guard + 1 because
    a truncated term can climb at most one power per multiplication by Psi.
    """
    if guard is None:
        guard = max(rows, kmax)
    if kmax > guard + 1:
        raise WindowError(
            f"Laurent window guard {guard} too small for Grunsky column {kmax}"
        )
    window = (-(rows + guard), rows)
    comps = _composition_rows(cmap, rows, window, P=P)
    C = np.zeros((rows + 1, kmax + 1), dtype=complex)
    for m, series in enumerate(comps):
        for k in range(1, kmax + 1):
            C[m, k] = series.coefficient(-k)
    return C


def grunsky_matrix(cmap: ConformalMap, n: int, guard: int | None = None) -> np.ndarray:
    """Square Grunsky section c_{mk}, m,k = 0..n (row 0 and column 0 zero)."""
    if guard is None:
        guard = n
    return grunsky_rows(cmap, n, n, guard=guard)


def map_coefficient_matrices(cmap: ConformalMap, n: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Hankel, Toeplitz and corner matrices of the map coefficients.

    hankel[m, k] = a_{m+k};  toeplitz[m, k] = a_{m-k} (so the first
    superdiagonal is a_{-1} = 1);  corner holds a0 at (0,0) and 1 at (0,1)
    and (1,0), zero elsewhere.
    """
    idx = np.arange(n + 1)
    hankel = np.array([[cmap.coeff(m + k) for k in idx] for m in idx], dtype=complex)
    toeplitz = np.array([[cmap.coeff(m - k) for k in idx] for m in idx], dtype=complex)
    corner = np.zeros((n + 1, n + 1), dtype=complex)
    corner[0, 0] = cmap.coeff(0)
    if n >= 1:
        corner[0, 1] = 1.0
        corner[1, 0] = 1.0
    return hankel, toeplitz, corner


@dataclass(frozen=True)
class Diagonals:
    """Diagonal/shift matrices at order n for a given conformal radius."""

    n: int
    gamma: float

    @property
    def mode(self) -> np.ndarray:
        """diag(1, 1, 2, 3, ..., n)."""
        d = np.arange(self.n + 1, dtype=float)
        d[0] = 1.0
        return np.diag(d)

    @property
    def mode_inv(self) -> np.ndarray:
        """diag(1, 1, 1/2, 1/3, ...)."""
        d = np.arange(self.n + 1, dtype=float)
        d[0] = 1.0
        return np.diag(1.0 / d)

    @property
    def mode0(self) -> np.ndarray:
        """diag(0, 1, 2, 3, ...)."""
        return np.diag(np.arange(self.n + 1, dtype=float))

    @property
    def mode0_inv(self) -> np.ndarray:
        """diag(0, 1, 1/2, 1/3, ...): pseudo-inverse of mode0."""
        d = np.zeros(self.n + 1)
        d[1:] = 1.0 / np.arange(1, self.n + 1)
        return np.diag(d)

    @property
    def kill0(self) -> np.ndarray:
        """diag(0, 1, 1, ..., 1): projection dropping the index-0 entry."""
        d = np.ones(self.n + 1)
        d[0] = 0.0
        return np.diag(d)

    @property
    def shift_deriv(self) -> np.ndarray:
        return monomial_derivative_matrix(self.n)

    def gamma_pow(self, k: int) -> np.ndarray:
        """diag(gamma^{k m}) for m = 0..n (index-0 entry is 1)."""
        return np.diag(self.gamma ** (k * np.arange(self.n + 1, dtype=float)))

    def gamma_pow0(self, k: int) -> np.ndarray:
        """gamma_pow(k) with the index-0 entry zeroed."""
        g = self.gamma_pow(k)
        g[0, 0] = 0.0
        return g


def diagonal_matrices(n: int, gamma: float) -> Diagonals:
    if n < 0 or not gamma > 0.0:
        raise GeometryError("need n >= 0 and gamma > 0")
    return Diagonals(n=n, gamma=float(gamma))


@dataclass(frozen=True)
class GeometryBundle:
    """All map-derived matrices at one shared truncation order."""

    cmap: ConformalMap
    n: int
    faber: np.ndarray            # Faber polynomial coefficients, rows ascending powers
    faber_inv: np.ndarray
    faber_deriv: np.ndarray      # F_m' in the Faber basis
    faber_deriv_scaled: np.ndarray  # rows divided by m gamma^m, row 0 zero
    grunsky: np.ndarray
    coeff_hankel: np.ndarray
    coeff_toeplitz: np.ndarray
    coeff_corner: np.ndarray
    diag: Diagonals

    @property
    def gamma(self) -> float:
        return self.cmap.gamma


def build_geometry(cmap: ConformalMap, n: int, guard: int | None = None) -> GeometryBundle:
    """Construct every matrix of the bundle at truncation order n."""
    P = faber_matrix(cmap, n)
    P_inv = faber_inverse(P)
    Dt, D = faber_derivative_matrices(cmap, n)
    C = grunsky_matrix(cmap, n, guard=guard)
    hankel, toeplitz, corner = map_coefficient_matrices(cmap, n)
    return GeometryBundle(
        cmap=cmap,
        n=n,
        faber=P,
        faber_inv=P_inv,
        faber_deriv=Dt,
        faber_deriv_scaled=D,
        grunsky=C,
        coeff_hankel=hankel,
        coeff_toeplitz=toeplitz,
        coeff_corner=corner,
        diag=diagonal_matrices(n, cmap.gamma),
    )


def poly_eval(coeffs_ascending: np.ndarray, z):
    """Evaluate a polynomial given ascending coefficients (vectorized in z)."""
    z = np.asarray(z, dtype=complex)
    out = np.zeros_like(z)
    for c in np.asarray(coeffs_ascending)[::-1]:
        out = out * z + c
    return out
