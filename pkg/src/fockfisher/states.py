"""Probe states and their evolution through a phase shift and two-arm photon loss.

The phase is never sampled. A lossy state keeps only magnitudes, and every
off-diagonal element carries the common factor exp(i * delta * phi) where
``delta = m - n``; downstream probabilities are therefore ``a + b cos(delta*phi)``
and their phi-derivatives are exact.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .special import binom

__all__ = [
    "PEFS",
    "NOON",
    "SuperposedNOON",
    "ProbeSpec",
    "LossSpec",
    "Coherence",
    "LossyState",
    "NoonDirectSum",
    "b_coeff",
    "c_indicator",
    "evolve_lossy",
    "noon_direct_sum",
    "probe_photons",
]

FockPair = tuple[int, int]


@dataclass(frozen=True)
class PEFS:
    """Path-entangled Fock state (|m,n> + |n,m>)/sqrt(2) with m > n >= 0."""

    m: int
    n: int

    def __post_init__(self):
        if not (isinstance(self.m, int) and isinstance(self.n, int)):
            raise TypeError("photon counts must be integers")
        if not self.m > self.n >= 0:
            raise ValueError(f"PEFS requires m > n >= 0, got m={self.m}, n={self.n}")

    @property
    def label(self) -> str:
        return f"pefs{self.m}_{self.n}"


@dataclass(frozen=True)
class NOON:
    """NOON state (|N,0> + |0,N>)/sqrt(2)."""

    N: int

    def __post_init__(self):
        if not isinstance(self.N, int):
            raise TypeError("photon count must be an integer")
        if self.N < 1:
            raise ValueError(f"NOON requires N >= 1, got {self.N}")

    @property
    def m(self) -> int:
        return self.N

    @property
    def n(self) -> int:
        return 0

    @property
    def label(self) -> str:
        return f"noon{self.N}"


@dataclass(frozen=True)
class SuperposedNOON:
    """sqrt(p)|Ne::0> + sqrt(1-p)|No::0> with Ne even and No odd."""

    Ne: int
    No: int
    p: float

    def __post_init__(self):
        if self.Ne < 0 or self.Ne % 2:
            raise ValueError(f"Ne must be a non-negative even integer, got {self.Ne}")
        if self.No < 1 or self.No % 2 == 0:
            raise ValueError(f"No must be an odd positive integer, got {self.No}")
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"p must lie in [0, 1], got {self.p}")

    @property
    def label(self) -> str:
        return f"snoon{self.Ne}_{self.No}"


ProbeSpec = Union[PEFS, NOON, SuperposedNOON]


def probe_photons(probe: ProbeSpec) -> tuple[int, int]:
    """(m, n) of a PEFS or NOON probe."""
    if isinstance(probe, (PEFS, NOON)):
        return probe.m, probe.n
    raise TypeError(f"expected a PEFS or NOON probe, got {type(probe).__name__}")


@dataclass(frozen=True)
class LossSpec:
    """Transmissivities of the two fictitious loss beam splitters."""

    eta_a: float = 1.0
    eta_b: float = 1.0

    def __post_init__(self):
        for name in ("eta_a", "eta_b"):
            v = getattr(self, name)
            if not (0.0 <= v <= 1.0):
                raise ValueError(f"{name} must lie in [0, 1], got {v}")

    @classmethod
    def both(cls, eta: float) -> "LossSpec":
        return cls(eta, eta)

    @classmethod
    def one_arm(cls, eta: float) -> "LossSpec":
        return cls(eta, 1.0)

    @property
    def gamma_a(self) -> float:
        return 1.0 - self.eta_a

    @property
    def gamma_b(self) -> float:
        return 1.0 - self.eta_b


def b_coeff(k: int, l_a: int, l_b: int, xi: int, loss: LossSpec) -> float:
    """Probability that a branch with k photons in arm a (xi - k in arm b) loses
    exactly l_a and l_b photons.

    Exponents are kept separate so that eta = 0 and eta = 1 are regular.
    """
    if not 0 <= k <= xi:
        raise ValueError(f"need 0 <= k <= xi, got k={k}, xi={xi}")
    ca = binom(k, l_a)
    cb = binom(xi - k, l_b)
    if ca == 0 or cb == 0:
        return 0.0
    return (
        ca
        * cb
        * loss.eta_a ** (k - l_a)
        * loss.gamma_a**l_a
        * loss.eta_b ** (xi - k - l_b)
        * loss.gamma_b**l_b
    )


def c_indicator(k: int, l_a: int, l_b: int, xi: int) -> int:
    """1 when both arms still hold enough photons to lose l_a and l_b, else 0."""
    return int(l_a <= k and l_b <= xi - k)


@dataclass(frozen=True)
class Coherence:
    """Off-diagonal element <bra| rho |ket> = magnitude * exp(i delta phi).

    ``bra`` is the branch that kept the m photons in arm a.
    """

    bra: FockPair
    ket: FockPair
    magnitude: float


@dataclass(frozen=True)
class LossyState:
    xi: int
    delta: int
    diagonals: dict[FockPair, float]
    coherences: tuple[Coherence, ...]

    @property
    def trace(self) -> float:
        return math.fsum(self.diagonals.values())

    def basis(self) -> list[FockPair]:
        """Fock pairs carrying weight, sorted by (total photons, mode-a count)."""
        return sorted(self.diagonals, key=lambda p: (p[0] + p[1], p[0]))

    def to_dense(self, phi: float) -> tuple[np.ndarray, np.ndarray, list[FockPair]]:
        """Dense rho(phi), d rho / d phi and the basis labelling their rows."""
        basis = self.basis()
        index = {p: i for i, p in enumerate(basis)}
        dim = len(basis)
        rho = np.zeros((dim, dim), dtype=complex)
        drho = np.zeros((dim, dim), dtype=complex)
        for p, w in self.diagonals.items():
            rho[index[p], index[p]] = w
        phase = np.exp(1j * self.delta * phi)
        for c in self.coherences:
            i, j = index[c.bra], index[c.ket]
            rho[i, j] = c.magnitude * phase
            rho[j, i] = np.conj(rho[i, j])
            drho[i, j] = 1j * self.delta * c.magnitude * phase
            drho[j, i] = np.conj(drho[i, j])
        return rho, drho, basis


def evolve_lossy(probe: ProbeSpec, loss: LossSpec) -> LossyState:
    """Phase shift followed by photon loss in both arms, for a PEFS or NOON probe."""
    if not isinstance(probe, (PEFS, NOON)):
        raise TypeError(f"evolve_lossy supports PEFS and NOON probes, got {type(probe).__name__}")
    m, n = probe.m, probe.n
    xi = m + n
    diagonals: dict[FockPair, float] = {}
    coherences = []
    for l_a in range(xi + 1):
        for l_b in range(xi - l_a + 1):
            cm = c_indicator(m, l_a, l_b, xi)
            cn = c_indicator(n, l_a, l_b, xi)
            hm = 0.5 * b_coeff(m, l_a, l_b, xi, loss) if cm else 0.0
            hn = 0.5 * b_coeff(n, l_a, l_b, xi, loss) if cn else 0.0
            if cm:
                key = (m - l_a, n - l_b)
                diagonals[key] = diagonals.get(key, 0.0) + hm
            if cn:
                key = (n - l_a, m - l_b)
                diagonals[key] = diagonals.get(key, 0.0) + hn
            # gate on the halved weights: a subnormal b rounds to 0 once halved
            if cm and cn and hm > 0.0 and hn > 0.0:
                coherences.append(Coherence((m - l_a, n - l_b), (n - l_a, m - l_b), math.sqrt(hm * hn)))
    # exact zeros come from eta in {0, 1}; keep the support minimal
    diagonals = {p: w for p, w in diagonals.items() if w > 0.0}
    return LossyState(xi=xi, delta=m - n, diagonals=diagonals, coherences=tuple(coherences))


@dataclass(frozen=True)
class NoonDirectSum:
    """Lossy NOON state split into a phase-carrying pure branch and a static diagonal part.

    The pure branch is ``weight_xi`` times the normalised state
    (amp_a e^{iN phi}|N,0> + amp_b |0,N>) / sqrt(amp_a^2 + amp_b^2).
    """

    N: int
    weight_xi: float
    amp_a: float
    amp_b: float
    rho_d: dict[FockPair, float] = field(default_factory=dict)

    def to_lossy_state(self) -> LossyState:
        diagonals = dict(self.rho_d)
        half = 0.5
        diagonals[(self.N, 0)] = diagonals.get((self.N, 0), 0.0) + half * self.amp_a**2
        diagonals[(0, self.N)] = diagonals.get((0, self.N), 0.0) + half * self.amp_b**2
        coh = (Coherence((self.N, 0), (0, self.N), half * self.amp_a * self.amp_b),)
        return LossyState(xi=self.N, delta=self.N, diagonals=diagonals, coherences=coh)


def noon_direct_sum(N: int, loss: LossSpec) -> NoonDirectSum:
    if N < 1:
        raise ValueError("N must be >= 1")
    amp_a = math.sqrt(loss.eta_a**N)
    amp_b = math.sqrt(loss.eta_b**N)
    rho_d = {}
    for l in range(1, N + 1):
        rho_d[(N - l, 0)] = rho_d.get((N - l, 0), 0.0) + 0.5 * b_coeff(N, l, 0, N, loss)
        rho_d[(0, N - l)] = rho_d.get((0, N - l), 0.0) + 0.5 * b_coeff(0, 0, l, N, loss)
    rho_d = {p: w for p, w in rho_d.items() if w > 0.0}
    weight = 0.5 * (loss.eta_a**N + loss.eta_b**N)
    return NoonDirectSum(N=N, weight_xi=weight, amp_a=amp_a, amp_b=amp_b, rho_d=rho_d)
