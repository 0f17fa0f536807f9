"""Far-field loading in the map-adapted polynomial basis and its boundary data.

A loading is a pair of polynomial displacement potentials expanded over the
Faber polynomials of the inclusion: mode m contributes

    kappa * A_m F_m(z) - z * conj(A_m F_m'(z)) + conj(B_m F_m(z)).

On the boundary circle |w| = gamma each mode becomes a two-sided power series
in w. The module builds, per mode, the matrices of those coefficients for the
loading itself and for its traction potential, and sums them into the four
right-hand-side row vectors of the block system.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import ConformalMap, GeometryBundle, faber_matrix, monomial_derivative_matrix, poly_eval
from .materials import MaterialPair


class LoadingError(ValueError):
    """Inconsistent loading data."""


@dataclass(frozen=True)
class LoadingSpec:
    """Coefficient arrays (A, B) indexed by mode; index 0 must be zero."""

    A: np.ndarray
    B: np.ndarray

    def __post_init__(self) -> None:
        A = np.asarray(self.A, dtype=complex).reshape(-1)
        B = np.asarray(self.B, dtype=complex).reshape(-1)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)
        for name, arr in (("A", A), ("B", B)):
            if arr.size and arr[0] != 0.0:
                raise LoadingError(f"{name}[0] must be zero: constant background is omitted")

    @property
    def order(self) -> int:
        """Highest mode index carrying a nonzero coefficient."""
        top = 0
        for arr in (self.A, self.B):
            nz = np.nonzero(arr)[0]
            if nz.size:
                top = max(top, int(nz[-1]))
        return top

    def padded(self, n: int) -> tuple[np.ndarray, np.ndarray]:
        """Zero-padded coefficient arrays of length n+1; modes above n error."""
        if self.order > n:
            raise LoadingError(f"loading mode {self.order} exceeds truncation order {n}")
        A = np.zeros(n + 1, dtype=complex)
        B = np.zeros(n + 1, dtype=complex)
        A[: min(self.A.size, n + 1)] = self.A[: n + 1]
        B[: min(self.B.size, n + 1)] = self.B[: n + 1]
        return A, B


@dataclass(frozen=True)
class RhsVector:
    """Boundary power-series coefficients of the loading and its traction potential.

    disp_pos[k] multiplies w^k (k >= 1) and disp_neg[k] multiplies w^{-k}
    (k >= 0) in the loading's boundary series; trac_pos/trac_neg do the same
    for the traction potential. Index 0 of disp_pos and trac_pos is zero.
    """

    disp_pos: np.ndarray
    disp_neg: np.ndarray
    trac_pos: np.ndarray
    trac_neg: np.ndarray

    @property
    def n(self) -> int:
        return self.disp_pos.size - 1

    def block_row(self) -> np.ndarray:
        """The 1x8 block row (each block on the displacement/traction split)."""
        parts = []
        for h in (self.disp_pos, self.disp_neg, self.trac_pos, self.trac_neg):
            parts.extend([h, np.conj(h)])
        return np.concatenate(parts)

    def block_row_cavity(self) -> np.ndarray:
        """The 1x4 block row: traction blocks only."""
        return np.concatenate(
            [self.trac_pos, np.conj(self.trac_pos), self.trac_neg, np.conj(self.trac_neg)]
        )


def rhs_matrices(material: MaterialPair, bundle: GeometryBundle, spec: LoadingSpec):
    """Per-mode boundary coefficient matrices (rows: modes, columns: powers).

    Returns (disp_pos_mat, disp_neg_mat, trac_pos_mat, trac_neg_mat) where row
    m of disp_pos_mat holds the w^k coefficients of mode m's contribution to
    the loading on the boundary, and similarly for the other three.
    """
    n = bundle.n
    A, B = spec.padded(n)
    Ad = np.diag(A)
    Bd = np.diag(B)
    C = bundle.grunsky
    # mode-scaled conjugated derivative rows: row m holds conj of F_m' in the basis
    W = np.conj(bundle.faber_deriv)
    g2 = bundle.diag.gamma_pow(2)
    gm2 = bundle.diag.gamma_pow(-2)
    I0 = bundle.diag.kill0
    hank = bundle.coeff_hankel
    toep = bundle.coeff_toeplitz
    corner = bundle.coeff_corner
    kappa = material.kappa
    mu = material.mu_ext

    X_pos = np.conj(Ad) @ W @ (g2 @ corner + np.conj(C) @ gm2 @ toep) @ I0
    X_neg = np.conj(Ad) @ W @ (g2 @ toep.T + np.conj(C) @ gm2 @ hank)
    Y_pos = np.conj(Bd) @ np.conj(C) @ gm2
    Y_neg = np.conj(Bd) @ g2

    disp_pos = kappa * Ad - X_pos + Y_pos
    disp_neg = kappa * (Ad @ C) - X_neg + Y_neg
    trac_pos = mu * (Ad + X_pos - Y_pos)
    trac_neg = mu * (Ad @ C + X_neg @ I0 - Y_neg)
    return disp_pos, disp_neg, trac_pos, trac_neg


def rhs_vectors(material: MaterialPair, bundle: GeometryBundle, spec: LoadingSpec) -> RhsVector:
    """Column sums of the per-mode matrices over modes m >= 1."""
    mats = rhs_matrices(material, bundle, spec)
    sums = [m[1:].sum(axis=0) for m in mats]
    return RhsVector(*sums)


def eval_loading(spec: LoadingSpec, cmap: ConformalMap, material: MaterialPair, z):
    """The loading displacement at points z (complex, vectorized)."""
    z = np.asarray(z, dtype=complex)
    M = spec.order
    A, B = spec.padded(M)
    P = faber_matrix(cmap, M)
    dP = P @ monomial_derivative_matrix(M)
    out = np.zeros_like(z)
    for m in range(1, M + 1):
        if A[m] == 0.0 and B[m] == 0.0:
            continue
        Fm = poly_eval(P[m], z)
        dFm = poly_eval(dP[m], z)
        out = out + material.kappa * A[m] * Fm - z * np.conj(A[m] * dFm) + np.conj(B[m] * Fm)
    return out


def loading_pair(spec: LoadingSpec, cmap: ConformalMap) -> tuple[np.ndarray, np.ndarray]:
    """Ascending-coefficient polynomials (f, g) with loading = kappa f - z conj(f') - conj(g)."""
    M = spec.order
    A, B = spec.padded(M)
    P = faber_matrix(cmap, M)
    f = A @ P
    g = -(B @ P)
    return f, g


def boundary_series(pos: np.ndarray, neg: np.ndarray, w):
    """Evaluate sum_k pos[k] w^k + sum_k neg[k] w^{-k} (index 0 read from neg)."""
    w = np.asarray(w, dtype=complex)
    out = np.zeros_like(w)
    for k in range(pos.size - 1, 0, -1):
        out = (out + pos[k]) * w
    winv = 1.0 / w
    acc = np.zeros_like(w)
    for k in range(neg.size - 1, 0, -1):
        acc = (acc + neg[k]) * winv
    return out + acc + neg[0]
