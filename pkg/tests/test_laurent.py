import numpy as np
import pytest
from hypothesis import given, seed, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from elastinc.laurent import LaurentSeries

ATOL = 1e-12

finite_complex = st.complex_numbers(
    min_magnitude=0.0, max_magnitude=10.0, allow_nan=False, allow_infinity=False
)


def series_from(lo, values):
    return LaurentSeries(lo, np.asarray(values, dtype=complex))


def test_monomial_product_cancels():
    w = LaurentSeries.monomial(1)
    winv = LaurentSeries.monomial(-1)
    prod = w.multiply(winv)
    assert prod.lo == 0 and prod.hi == 0
    assert prod.coefficient(0) == pytest.approx(1.0)


def test_binomial_square():
    # (w + 0.3/w)^2 = w^2 + 0.6 + 0.09/w^2
    a = series_from(-1, [0.3, 0.0, 1.0])
    sq = a.multiply(a)
    assert sq.coefficient(2) == pytest.approx(1.0)
    assert sq.coefficient(0) == pytest.approx(0.6)
    assert sq.coefficient(-2) == pytest.approx(0.09)
    assert sq.coefficient(1) == 0.0


def test_map_square_hand_expansion():
    # (w + 0.5 + 0.3/w)^2 = w^2 + w + 0.85 + 0.3/w + 0.09/w^2
    psi = series_from(-1, [0.3, 0.5, 1.0])
    sq = psi.multiply(psi)
    expected = {2: 1.0, 1: 1.0, 0: 0.85, -1: 0.3, -2: 0.09}
    for k, v in expected.items():
        assert sq.coefficient(k) == pytest.approx(v)
    assert sq.coefficient(-3) == 0.0


def test_coefficient_out_of_range_is_zero():
    s = series_from(0, [0.5, 1.0])
    assert s.coefficient(-3) == 0.0
    assert s.coefficient(0) == pytest.approx(0.5)


def test_shift_scale_add():
    one = LaurentSeries.monomial(0)
    w3 = one.shift_power(3)
    assert w3.coefficient(3) == pytest.approx(1.0)
    w = LaurentSeries.monomial(1)
    zero = w.add(w.scale(-1.0))
    assert np.allclose(zero.coeffs, 0.0)
    s = LaurentSeries.monomial(-2).scale(2j)
    assert s.coefficient(-2) == pytest.approx(2j)


def test_truncation_idempotent():
    s = series_from(-4, np.arange(9, dtype=float))
    t1 = s.truncate((-2, 3))
    t2 = t1.truncate((-2, 3))
    assert t1.lo == t2.lo and t1.hi == t2.hi
    assert np.array_equal(t1.coeffs, t2.coeffs)


def test_window_applied_in_multiply():
    a = series_from(-2, np.ones(5))
    prod = a.multiply(a, window=(-1, 1))
    assert prod.lo >= -1 and prod.hi <= 1


def test_evaluation_matches_horner():
    s = series_from(-2, [1.0, 2.0j, -0.5, 0.25, 1.5])
    w = 0.7 + 0.3j
    direct = sum(s.coeffs[i] * w ** (s.lo + i) for i in range(s.coeffs.size))
    assert s(w) == pytest.approx(direct)


def test_conjugate_inverted_on_circle():
    gamma = 1.3
    s = series_from(-2, [0.2, 1.0j, -0.4, 0.8, 0.1j])
    w = gamma * np.exp(1.2j)
    assert s.conjugate_inverted(gamma)(w) == pytest.approx(np.conj(s(w)))


def test_derivative():
    s = series_from(-1, [2.0, 5.0, 3.0])  # 2/w + 5 + 3w
    d = s.derivative()
    assert d.coefficient(-2) == pytest.approx(-2.0)
    assert d.coefficient(0) == pytest.approx(3.0)


@seed(2024)
@given(
    a=arrays(np.complex128, 4, elements=finite_complex),
    b=arrays(np.complex128, 3, elements=finite_complex),
    c=arrays(np.complex128, 5, elements=finite_complex),
)
@settings(max_examples=50, deadline=None)
def test_multiplication_commutative_associative(a, b, c):
    sa, sb, sc = series_from(-1, a), series_from(0, b), series_from(-2, c)
    ab = sa.multiply(sb)
    ba = sb.multiply(sa)
    assert ab.lo == ba.lo
    assert np.allclose(ab.coeffs, ba.coeffs, atol=ATOL)
    left = sa.multiply(sb).multiply(sc)
    right = sa.multiply(sb.multiply(sc))
    assert left.lo == right.lo
    scale = max(1.0, np.abs(left.coeffs).max())
    assert np.allclose(left.coeffs, right.coeffs, atol=1e-9 * scale)
