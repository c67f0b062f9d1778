import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import expm
from scipy.special import eval_genlaguerre

from fockfisher.special import (
    WignerIndex,
    binom,
    heaviside_discrete,
    hyp2f1_terminating,
    laguerre_gen,
    laguerre_gen_array,
    log_factorial,
    wigner_d_half_pi,
    wigner_d_matrix_half_pi,
)


def sector_rotation(total):
    # exp(-i pi/2 J_y) on |k, total-k>, k = 0..total
    ap = np.zeros((total + 1, total + 1))
    for k in range(total):
        ap[k + 1, k] = math.sqrt((k + 1) * (total - k))
    jy = (ap - ap.T) / 2j
    return expm(-1j * math.pi / 2 * jy)


def test_binom_values():
    assert binom(10, 4) == 210
    assert binom(4, 10) == 0
    assert binom(5, -1) == 0
    assert binom(0, 0) == 1


def test_heaviside():
    assert [heaviside_discrete(k) for k in (-2, -1, 0, 1)] == [0, 0, 1, 1]


def test_log_factorial():
    assert log_factorial(0) == 0.0
    assert log_factorial(20) == pytest.approx(math.log(math.factorial(20)), rel=1e-15)
    with pytest.raises(ValueError):
        log_factorial(-1)


@pytest.mark.parametrize(
    "a,b,c,z",
    [(-3, -2, 1, 0.4), (-10, -4, 1, 81.0), (-4, -4, 7, 0.0049), (-6, 2.5, 1.5, -3.0), (0, -5, 1, 9.0)],
)
def test_hyp2f1_against_mpmath(a, b, c, z):
    assert hyp2f1_terminating(a, b, c, z) == pytest.approx(float(mpmath.hyp2f1(a, b, c, z)), rel=1e-13)


def test_hyp2f1_rejects_non_terminating_and_poles():
    with pytest.raises(ValueError):
        hyp2f1_terminating(0.5, 1.5, 1, 0.2)
    with pytest.raises(ValueError):
        hyp2f1_terminating(-4, 1, -2, 0.2)
    # pole lies beyond the last term: fine
    assert hyp2f1_terminating(-2, 1, -3, 0.5) == pytest.approx(1 + (-2) * 1 / (-3) * 0.5 + (-2) * (-1) * 1 * 2 / ((-3) * (-2) * 2) * 0.25)


@given(st.integers(0, 12), st.integers(0, 12), st.floats(0.0, 50.0))
def test_hyp2f1_matches_direct_binomial_sum(m, n, z):
    # 2F1(-m, -n; 1; z) = sum_k C(m,k) C(n,k) z^k
    direct = math.fsum(binom(m, k) * binom(n, k) * z**k for k in range(min(m, n) + 1))
    assert hyp2f1_terminating(-m, -n, 1, z) == pytest.approx(direct, rel=1e-12, abs=1e-300)


@pytest.mark.parametrize("n,alpha", [(0, 0), (1, 3), (4, 6), (10, 4), (14, 0), (7, 14)])
def test_laguerre_against_scipy(n, alpha):
    x = np.linspace(0.0, 60.0, 41)
    ref = eval_genlaguerre(n, alpha, x)
    got = laguerre_gen_array(n, alpha, x)
    np.testing.assert_allclose(got, ref, rtol=1e-10, atol=1e-10 * np.abs(ref).max())
    assert laguerre_gen(n, alpha, 2.5) == pytest.approx(float(eval_genlaguerre(n, alpha, 2.5)), rel=1e-12)


def test_laguerre_negative_degree():
    with pytest.raises(ValueError):
        laguerre_gen(-1, 0, 1.0)


@pytest.mark.parametrize("total", [0, 1, 2, 3, 6, 9, 14])
def test_wigner_matrix_matches_matrix_exponential(total):
    ref = sector_rotation(total)
    assert np.abs(ref.imag).max() < 1e-12
    np.testing.assert_allclose(wigner_d_matrix_half_pi(total), ref.real, atol=1e-12)


@pytest.mark.parametrize("total", [1, 10, 20, 40])
def test_wigner_matrix_is_orthogonal(total):
    d = wigner_d_matrix_half_pi(total)
    np.testing.assert_allclose(d @ d.T, np.eye(total + 1), atol=1e-12)


def test_wigner_matrix_read_only():
    with pytest.raises(ValueError):
        wigner_d_matrix_half_pi(4)[0, 0] = 1.0
    with pytest.raises(ValueError):
        wigner_d_matrix_half_pi(-1)


@settings(max_examples=60)
@given(st.integers(0, 24).flatmap(lambda t: st.tuples(st.just(t), st.integers(0, t), st.integers(0, t))))
def test_wigner_symmetries(args):
    total, a, b = args
    two_mu, two_nu = 2 * a - total, 2 * b - total
    d = wigner_d_half_pi(WignerIndex(total, two_mu, two_nu))
    swapped = wigner_d_half_pi(WignerIndex(total, two_nu, two_mu))
    negated = wigner_d_half_pi(WignerIndex(total, -two_nu, -two_mu))
    sign = -1.0 if ((two_mu - two_nu) // 2) % 2 else 1.0
    assert swapped == pytest.approx(sign * d, abs=1e-14)
    assert negated == pytest.approx(d, abs=1e-14)


def test_wigner_known_values():
    # j = 1/2: d_{1/2,1/2} = cos(pi/4), d_{1/2,-1/2} = -sin(pi/4)
    assert wigner_d_half_pi(WignerIndex(1, 1, 1)) == pytest.approx(math.sqrt(0.5), abs=1e-15)
    assert wigner_d_half_pi(WignerIndex(1, 1, -1)) == pytest.approx(-math.sqrt(0.5), abs=1e-15)
    # j = 1: d_{0,0}(pi/2) = cos(pi/2) = 0
    assert wigner_d_half_pi(WignerIndex(2, 0, 0)) == 0.0


def test_wigner_index_validation_and_halves():
    idx = WignerIndex.from_halves(Fraction(3, 2), Fraction(1, 2), -1.5)
    assert (idx.two_j, idx.two_mu, idx.two_nu) == (3, 1, -3)
    assert idx.j == Fraction(3, 2) and idx.nu == Fraction(-3, 2)
    with pytest.raises(ValueError):
        WignerIndex(2, 1, 0)
    with pytest.raises(ValueError):
        WignerIndex(2, 4, 0)
    with pytest.raises(ValueError):
        WignerIndex.from_halves(1, Fraction(1, 3), 0)
