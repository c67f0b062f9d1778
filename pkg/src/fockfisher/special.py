"""Exact and stable special functions for two-mode Fock-space calculations.

Everything here is pure. Half-integer angular-momentum labels are carried as
twice-their-value integers (``two_j``, ``two_mu``, ``two_nu``) so that index
arithmetic never touches floats.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

__all__ = [
    "WignerIndex",
    "binom",
    "heaviside_discrete",
    "hyp2f1_terminating",
    "laguerre_gen",
    "laguerre_gen_array",
    "log_factorial",
    "wigner_d_half_pi",
    "wigner_d_matrix_half_pi",
]


def binom(n: int, k: int) -> int:
    """Binomial coefficient C(n, k) as an exact Python int; 0 outside 0 <= k <= n."""
    if k < 0 or n < 0 or k > n:
        return 0
    return math.comb(n, k)


def heaviside_discrete(n: int) -> int:
    """Discrete step: 1 for n >= 0, else 0."""
    return 1 if n >= 0 else 0


@lru_cache(maxsize=None)
def log_factorial(n: int) -> float:
    if n < 0:
        raise ValueError(f"log_factorial of negative integer {n}")
    return math.lgamma(n + 1)


def _is_nonpositive_int(x) -> bool:
    return float(x).is_integer() and x <= 0


def hyp2f1_terminating(a: int, b: int, c, z: float) -> float:
    """Gauss hypergeometric 2F1(a, b; c; z) for a terminating series.

    At least one of ``a``, ``b`` must be a non-positive integer; the series is
    then a polynomial in ``z`` and is summed exactly term by term, so any real
    ``z`` (including ``|z| > 1``) is valid.

    Raises
    ------
    ValueError
        If neither upper parameter terminates the series, or if ``c`` is a
        non-positive integer whose pole is reached before termination.
    """
    upper = [int(p) for p in (a, b) if _is_nonpositive_int(p)]
    if not upper:
        raise ValueError(f"2F1({a}, {b}; {c}; z) does not terminate")
    order = -max(upper)
    if _is_nonpositive_int(c) and int(c) > -order:
        raise ValueError(f"2F1 lower parameter c={c} hits a pole before termination")

    term = 1.0
    terms = [term]
    for k in range(order):
        term *= (a + k) * (b + k) / ((c + k) * (k + 1)) * z
        terms.append(term)
    return math.fsum(terms)


def laguerre_gen(n: int, alpha: int, x: float) -> float:
    """Generalized Laguerre polynomial L_n^(alpha)(x) by the three-term recurrence."""
    if n < 0:
        raise ValueError("Laguerre degree must be non-negative")
    if n == 0:
        return 1.0
    prev, cur = 1.0, 1.0 + alpha - x
    for k in range(1, n):
        prev, cur = cur, ((2 * k + 1 + alpha - x) * cur - (k + alpha) * prev) / (k + 1)
    return cur


def laguerre_gen_array(n: int, alpha: int, x: np.ndarray) -> np.ndarray:
    """Vectorized :func:`laguerre_gen` over an array of arguments."""
    x = np.asarray(x, dtype=float)
    if n == 0:
        return np.ones_like(x)
    prev = np.ones_like(x)
    cur = 1.0 + alpha - x
    for k in range(1, n):
        prev, cur = cur, ((2 * k + 1 + alpha - x) * cur - (k + alpha) * prev) / (k + 1)
    return cur


@dataclass(frozen=True)
class WignerIndex:
    """Labels (j, mu, nu) of d^j_{mu,nu}, stored doubled.

    ``two_j`` is the total photon number of the sector; ``two_mu`` and
    ``two_nu`` are photon-number differences between the two modes.
    """

    two_j: int
    two_mu: int
    two_nu: int

    def __post_init__(self):
        if self.two_j < 0:
            raise ValueError("j must be non-negative")
        for name in ("two_mu", "two_nu"):
            v = getattr(self, name)
            if abs(v) > self.two_j or (self.two_j - v) % 2:
                raise ValueError(f"{name}={v} incompatible with two_j={self.two_j}")

    @classmethod
    def from_halves(cls, j, mu, nu) -> "WignerIndex":
        """Build from (possibly half-integer) values such as ``Fraction(3, 2)`` or 1.5."""
        doubled = []
        for v in (j, mu, nu):
            d = Fraction(v) * 2
            if d.denominator != 1:
                raise ValueError(f"{v} is not a half-integer")
            doubled.append(int(d))
        return cls(*doubled)

    @property
    def j(self) -> Fraction:
        return Fraction(self.two_j, 2)

    @property
    def mu(self) -> Fraction:
        return Fraction(self.two_mu, 2)

    @property
    def nu(self) -> Fraction:
        return Fraction(self.two_nu, 2)


def _krawtchouk_sum(jpm: int, jmm: int, jpn: int, jmn: int) -> int:
    # sum_s (-1)^(mu-nu+s) C(j+nu, s) C(j-nu, j-mu-s), exact
    total = 0
    mu_minus_nu = jmn - jmm
    for s in range(max(0, -mu_minus_nu), min(jpn, jmm) + 1):
        total += (-1) ** ((mu_minus_nu + s) & 1) * math.comb(jpn, s) * math.comb(jmn, jmm - s)
    return total


def wigner_d_half_pi(idx: WignerIndex) -> float:
    """Wigner small-d element d^j_{mu,nu}(pi/2) = <j,mu| exp(-i pi/2 J_y) |j,nu>.

    The alternating sum runs over exact integers, so the only rounding is in
    the final prefactor; the result is accurate to a few ulps for the photon
    numbers used here.
    """
    jpm = (idx.two_j + idx.two_mu) // 2
    jmm = (idx.two_j - idx.two_mu) // 2
    jpn = (idx.two_j + idx.two_nu) // 2
    jmn = (idx.two_j - idx.two_nu) // 2
    s = _krawtchouk_sum(jpm, jmm, jpn, jmn)
    if s == 0:
        return 0.0
    ratio = Fraction(math.factorial(jpm) * math.factorial(jmm), math.factorial(jpn) * math.factorial(jmn))
    # 2^(-j) = sqrt(2^(-2j)); fold it into the exact ratio before the sqrt
    mag = math.sqrt(ratio / (2 ** idx.two_j)) * abs(s)
    return math.copysign(mag, s)


@lru_cache(maxsize=None)
def _wigner_matrix(two_j: int) -> np.ndarray:
    dim = two_j + 1
    out = np.empty((dim, dim))
    for a in range(dim):
        for b in range(dim):
            out[a, b] = wigner_d_half_pi(WignerIndex(two_j, 2 * a - two_j, 2 * b - two_j))
    out.setflags(write=False)
    return out


def wigner_d_matrix_half_pi(total: int) -> np.ndarray:
    """Matrix of d^j_{mu,nu}(pi/2) for the sector with ``total`` = 2j photons.

    Row and column indices are mode-a photon counts: index ``a`` corresponds to
    ``mu = a - j``. The returned array is cached and read-only.
    """
    if total < 0:
        raise ValueError("photon number must be non-negative")
    return _wigner_matrix(int(total))
