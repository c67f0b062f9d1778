"""Quantum Fisher information of lossy PEFS and NOON probes, plus the
Cramer-Rao sensitivity."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .states import LossSpec, LossyState, b_coeff, c_indicator

__all__ = [
    "FisherResult",
    "ZeroFisherInformation",
    "qfi_pefs_two_arm_bound",
    "qfi_pefs_one_arm",
    "qfi_noon",
    "qfi_noon_branch_variance",
    "qfi_bruteforce",
    "sensitivity",
]

METHODS = ("closed_form", "bound", "brute_force", "quadrature", "distribution")

# loss-pattern weights below this are dropped from the branch sums
_BRANCH_FLOOR = 1e-15
_EIG_FLOOR = 1e-12
MAX_DENSE_DIM = 400


class ZeroFisherInformation(ValueError):
    """Raised when a sensitivity is requested for F = 0."""


@dataclass(frozen=True)
class FisherResult:
    """A Fisher-information value with the diagnostics that produced it.

    ``skipped_terms`` counts dropped near-null probabilities or eigenvalue pairs.
    ``singular`` marks a singular phase of the outcome distribution. The
    producing function documents how the value was resolved there (a lower
    estimate from dropped outcomes, or a continuous limit).
    ``error_estimate`` is only filled in by quadrature.
    """

    value: float
    method: str
    skipped_terms: int = 0
    singular: bool = False
    error_estimate: Optional[float] = None

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method tag {self.method!r}")
        if not math.isfinite(self.value) or self.value < 0.0:
            raise ValueError(f"Fisher information must be finite and non-negative, got {self.value}")

    def __float__(self) -> float:
        return float(self.value)


def _check_pefs(m: int, n: int) -> None:
    if not m > n >= 0:
        raise ValueError(f"need m > n >= 0, got m={m}, n={n}")


def _branch_sum(m: int, n: int, loss: LossSpec, l_b_max: Optional[int]) -> tuple[float, int]:
    xi = m + n
    terms = []
    skipped = 0
    for l_a in range(xi + 1):
        top = xi - l_a if l_b_max is None else min(l_b_max, xi - l_a)
        for l_b in range(top + 1):
            wm = b_coeff(m, l_a, l_b, xi, loss) * c_indicator(m, l_a, l_b, xi)
            wn = b_coeff(n, l_a, l_b, xi, loss) * c_indicator(n, l_a, l_b, xi)
            den = wm + wn
            if den < _BRANCH_FLOOR:
                if den > 0.0:
                    skipped += 1
                continue
            terms.append((m * wm + n * wn) ** 2 / den)
    return math.fsum(terms), skipped


def qfi_pefs_two_arm_bound(m: int, n: int, loss: LossSpec) -> FisherResult:
    """Upper bound on the QFI of a PEFS with loss in both arms."""
    _check_pefs(m, n)
    s, skipped = _branch_sum(m, n, loss, None)
    value = max(2.0 * (m * m + n * n) - 2.0 * s, 0.0)
    return FisherResult(value, "bound", skipped_terms=skipped)


def qfi_pefs_one_arm(m: int, n: int, eta_a: float) -> FisherResult:
    """Exact QFI of a PEFS when only arm a is lossy."""
    _check_pefs(m, n)
    s, skipped = _branch_sum(m, n, LossSpec(eta_a, 1.0), 0)
    value = max(2.0 * (m * m + n * n) - 2.0 * s, 0.0)
    return FisherResult(value, "closed_form", skipped_terms=skipped)


def qfi_noon(N: int, loss: LossSpec) -> FisherResult:
    if N < 1:
        raise ValueError("N must be >= 1")
    pa, pb = loss.eta_a**N, loss.eta_b**N
    if pa + pb == 0.0:
        return FisherResult(0.0, "closed_form")
    return FisherResult(2.0 * N * N * pa * pb / (pa + pb), "closed_form")


def qfi_noon_branch_variance(N: int, loss: LossSpec) -> float:
    """QFI of a lossy NOON state as weight * 4 Var(n_a) of its only phase-carrying block.

    Independent of :func:`qfi_noon`; used to cross-check the direct-sum argument.
    """
    pa, pb = loss.eta_a**N, loss.eta_b**N
    weight = 0.5 * (pa + pb)
    if weight == 0.0:
        return 0.0
    # normalised populations of |N,0> and |0,N> inside the pure block
    qa = pa / (pa + pb)
    mean = N * qa
    var = N * N * qa - mean * mean
    return weight * 4.0 * var


def qfi_bruteforce(state: LossyState, phi: float = 0.0) -> FisherResult:
    """Mixed-state QFI from the spectral decomposition of the dense rho(phi).

    F = sum_{i,j} 2 |<i|d rho|j>|^2 / (l_i + l_j) over pairs with
    l_i + l_j > 1e-12.
    """
    dim = len(state.diagonals)
    if dim > MAX_DENSE_DIM:
        raise ValueError(f"state dimension {dim} exceeds the dense limit {MAX_DENSE_DIM}")
    rho, drho, _ = state.to_dense(phi)
    lam, vec = np.linalg.eigh(rho)
    lam = np.clip(lam, 0.0, None)
    d = vec.conj().T @ drho @ vec
    denom = lam[:, None] + lam[None, :]
    keep = denom > _EIG_FLOOR
    value = float(np.sum(2.0 * np.abs(d[keep]) ** 2 / denom[keep]))
    skipped = int(np.count_nonzero(~keep & (np.abs(d) > 0.0)))
    return FisherResult(max(value, 0.0), "brute_force", skipped_terms=skipped)


def sensitivity(f: FisherResult | float, repetitions: int = 1) -> float:
    """Cramer-Rao phase uncertainty 1/sqrt(repetitions * F)."""
    value = float(f)
    if repetitions < 1:
        raise ValueError("repetitions must be a positive integer")
    if value <= 0.0:
        raise ZeroFisherInformation("phase sensitivity is unbounded for zero Fisher information")
    return 1.0 / math.sqrt(repetitions * value)
