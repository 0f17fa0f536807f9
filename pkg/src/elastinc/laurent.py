"""Finite two-sided power series in a single complex variable.

Substrate for composing Faber polynomials with the conformal map and reading
off Grunsky coefficients. Coefficients are stored densely between the lowest
and highest retained power; arithmetic optionally truncates to a declared
window (lo, hi).
"""

from __future__ import annotations

import numpy as np


class LaurentSeries:
    """Coefficients c[k] of w**k for k in [lo, hi], stored densely."""

    __slots__ = ("lo", "coeffs")

    def __init__(self, lo: int, coeffs) -> None:
        coeffs = np.atleast_1d(np.asarray(coeffs, dtype=complex))
        if coeffs.ndim != 1 or coeffs.size == 0:
            raise ValueError("coeffs must be a nonempty 1-d array")
        self.lo = int(lo)
        self.coeffs = coeffs

    @property
    def hi(self) -> int:
        return self.lo + self.coeffs.size - 1

    @classmethod
    def zero(cls) -> "LaurentSeries":
        return cls(0, [0.0])

    @classmethod
    def monomial(cls, power: int, coeff: complex = 1.0) -> "LaurentSeries":
        return cls(power, [coeff])

    def coefficient(self, k: int) -> complex:
        """Coefficient of w**k; zero outside the stored range."""
        if self.lo <= k <= self.hi:
            return complex(self.coeffs[k - self.lo])
        return 0.0 + 0.0j

    def truncate(self, window: tuple[int, int]) -> "LaurentSeries":
        """Restrict to powers in [window[0], window[1]]. Idempotent."""
        wlo, whi = int(window[0]), int(window[1])
        if wlo > whi:
            raise ValueError("empty truncation window")
        lo = max(self.lo, wlo)
        hi = min(self.hi, whi)
        if lo > hi:
            return LaurentSeries.zero()
        return LaurentSeries(lo, self.coeffs[lo - self.lo : hi - self.lo + 1])

    def add(self, other: "LaurentSeries") -> "LaurentSeries":
        lo = min(self.lo, other.lo)
        hi = max(self.hi, other.hi)
        out = np.zeros(hi - lo + 1, dtype=complex)
        out[self.lo - lo : self.lo - lo + self.coeffs.size] += self.coeffs
        out[other.lo - lo : other.lo - lo + other.coeffs.size] += other.coeffs
        return LaurentSeries(lo, out)

    def scale(self, factor: complex) -> "LaurentSeries":
        return LaurentSeries(self.lo, self.coeffs * factor)

    def shift_power(self, p: int) -> "LaurentSeries":
        """Multiply by w**p."""
        return LaurentSeries(self.lo + int(p), self.coeffs)

    def multiply(self, other: "LaurentSeries", window: tuple[int, int] | None = None) -> "LaurentSeries":
        """Coefficient-wise product; optionally truncated to the window."""
        out = LaurentSeries(self.lo + other.lo, np.convolve(self.coeffs, other.coeffs))
        if window is not None:
            out = out.truncate(window)
        return out

    def __call__(self, w: complex) -> complex:
        """Evaluate at a point (or vectorized over an array of points)."""
        w = np.asarray(w, dtype=complex)
        powers = np.arange(self.lo, self.hi + 1)
        return np.tensordot(self.coeffs, w[..., None] ** powers, axes=([0], [-1]))

    def derivative(self) -> "LaurentSeries":
        """Termwise d/dw."""
        powers = np.arange(self.lo, self.hi + 1)
        return LaurentSeries(self.lo - 1, self.coeffs * powers)

    def conjugate_inverted(self, gamma: float) -> "LaurentSeries":
        """Series of conj(f(w)) on |w| = gamma, as a series in w.

        Uses conj(w) = gamma**2 / w on that circle: conj(c_k w^k) becomes
        conj(c_k) gamma^(2k) w^(-k).
        """
        powers = np.arange(self.lo, self.hi + 1)
        new = np.conj(self.coeffs) * (float(gamma) ** (2 * powers))
        return LaurentSeries(-self.hi, new[::-1])

    def __repr__(self) -> str:
        return f"LaurentSeries(lo={self.lo}, hi={self.hi})"
