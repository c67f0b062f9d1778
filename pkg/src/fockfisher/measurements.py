"""Classical Fisher information of double-port measurements on lossy probes.

Three detection schemes are covered: double parity (with single parity as its
marginal), double photon-number resolution and double homodyne. Each has a
closed-form route and a route through an explicit outcome distribution.

Beam-splitter convention: the measured state is ``B rho B^dag`` with
``B = exp(-i pi/2 J_y)``. With this choice the parity of output port c, pulled
back through the beam splitter, is the anti-diagonal kernel
``sum |k, N-k><N-k, k|`` and port d picks up an extra ``(-1)^N``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Hashable, Optional, Sequence

import numpy as np

from . import kernels
from .qfi import FisherResult, qfi_noon
from .special import binom, hyp2f1_terminating, laguerre_gen_array, log_factorial, wigner_d_matrix_half_pi
from .states import NOON, PEFS, LossSpec, LossyState, ProbeSpec, evolve_lossy, probe_photons

__all__ = [
    "ParityExpectations",
    "OutcomeDistribution",
    "QuadratureGrid",
    "SingularPhaseError",
    "QuadratureConvergenceError",
    "parity_fringe",
    "parity_expectations",
    "parity_expectations_from_state",
    "dp_distribution",
    "parity_coarse_grain",
    "cfi_dp",
    "cfi_sp",
    "dpnr_fringes",
    "dpnr_distribution",
    "dpnr_cfi_scan",
    "cfi_noon_dpnr_closed",
    "noon_g_factor",
    "cfi_discrete",
    "marginalize",
    "homodyne_g",
    "dh_coefficients",
    "dh_probability",
    "cfi_dh",
    "cfi_dh_scan",
    "cfi_dh_angular_closed",
    "dh_total_probability",
]

_GAMMA_PRODUCT_FLOOR = 1e-12
_DP_DEN_FLOOR = 1e-14
_SP_DEN_FLOOR = 1e-14
_P_FLOOR = 1e-12
_DP_SKIP = 1e-9
_DH_P_FLOOR = 1e-14
_DH_REL_TOL = 1e-4


class SingularPhaseError(ValueError):
    """A Fisher information is undefined at this phase (p -> 0 with p' != 0)."""


class QuadratureConvergenceError(RuntimeError):
    """Grid doubling changed a quadrature result by more than the tolerance."""


@dataclass(frozen=True)
class ParityExpectations:
    exp_c: float
    exp_d: float
    exp_cd: float
    d_exp_c: float
    d_exp_d: float

    def __post_init__(self):
        for name in ("exp_c", "exp_d", "exp_cd"):
            v = getattr(self, name)
            if abs(v) > 1.0 + 1e-12:
                raise ValueError(f"{name}={v} outside [-1, 1]")


@dataclass(frozen=True)
class OutcomeDistribution:
    """Outcome probabilities and their analytic phase derivatives.

    ``prob[i]`` and ``dprob[i]`` belong to ``support[i]``.
    """

    support: tuple[Hashable, ...]
    prob: np.ndarray
    dprob: np.ndarray

    def __post_init__(self):
        if not (len(self.support) == len(self.prob) == len(self.dprob)):
            raise ValueError("support, prob and dprob must have equal length")

    def as_dict(self) -> dict:
        return {s: (float(p), float(d)) for s, p, d in zip(self.support, self.prob, self.dprob)}

    @property
    def total(self) -> float:
        return math.fsum(self.prob.tolist())


# --------------------------------------------------------------------------- parity


def parity_fringe(m: int, n: int, loss: LossSpec) -> tuple[float, float]:
    """Offset D and amplitude E of the port-c parity fringe <Pi_c> = D + E cos(delta phi).

    Uses the terminating hypergeometric closed forms. Their argument
    eta_a eta_b / (gamma_a gamma_b) blows up as a loss rate vanishes, so for
    gamma_a gamma_b < 1e-12 (or on overflow) the fringe is read off the state
    directly.
    """
    ga, gb = loss.gamma_a, loss.gamma_b
    delta = m - n
    if ga * gb >= _GAMMA_PRODUCT_FLOOR:
        z = loss.eta_a * loss.eta_b / (ga * gb)
        d_val = 0.5 * hyp2f1_terminating(-m, -n, 1, z) * (ga**m * gb**n + ga**n * gb**m)
        e_val = (
            binom(m, delta)
            * hyp2f1_terminating(-n, -n, 1 + delta, z)
            * (loss.eta_a * loss.eta_b) ** (delta / 2)
            * (ga * gb) ** n
        )
        if math.isfinite(d_val) and math.isfinite(e_val):
            return d_val, e_val
    return _fringe_from_state(evolve_lossy(NOON(m) if n == 0 else PEFS(m, n), loss))


def _fringe_from_state(state: LossyState) -> tuple[float, float]:
    offset = math.fsum(w for (ka, kb), w in state.diagonals.items() if ka == kb)
    amp = math.fsum(2.0 * c.magnitude for c in state.coherences if c.bra == c.ket[::-1])
    return offset, amp


def parity_expectations(probe: ProbeSpec, loss: LossSpec, phi: float) -> ParityExpectations:
    """<Pi_c>, <Pi_d>, <Pi_c Pi_d> and the phase derivatives of the first two."""
    m, n = probe_photons(probe)
    delta = m - n
    d_val, e_val = parity_fringe(m, n, loss)
    sign = -1.0 if delta % 2 else 1.0
    cos_t, sin_t = math.cos(delta * phi), math.sin(delta * phi)
    ea, eb = 1.0 - 2.0 * loss.eta_a, 1.0 - 2.0 * loss.eta_b
    cd = 0.5 * (ea**m * eb**n + ea**n * eb**m)
    return ParityExpectations(
        exp_c=d_val + e_val * cos_t,
        exp_d=d_val + sign * e_val * cos_t,
        exp_cd=cd,
        d_exp_c=-delta * e_val * sin_t,
        d_exp_d=-sign * delta * e_val * sin_t,
    )


def parity_expectations_from_state(state: LossyState, phi: float) -> ParityExpectations:
    """Contract rho(phi) against the three parity kernels term by term.

    Port c: anti-diagonal ones; port d: anti-diagonal (-1)^N; product: diagonal (-1)^N.
    """
    cos_t, sin_t = math.cos(state.delta * phi), math.sin(state.delta * phi)
    c_terms, d_terms, dc_terms, dd_terms, cd_terms = [], [], [], [], []
    for (ka, kb), w in state.diagonals.items():
        sgn = -1.0 if (ka + kb) % 2 else 1.0
        cd_terms.append(sgn * w)
        if ka == kb:
            c_terms.append(w)
            d_terms.append(sgn * w)
    for coh in state.coherences:
        if coh.bra != coh.ket[::-1]:
            continue
        sgn = -1.0 if sum(coh.bra) % 2 else 1.0
        # element and its conjugate both sit on the anti-diagonal
        c_terms.append(2.0 * coh.magnitude * cos_t)
        d_terms.append(sgn * 2.0 * coh.magnitude * cos_t)
        dc_terms.append(-2.0 * state.delta * coh.magnitude * sin_t)
        dd_terms.append(-sgn * 2.0 * state.delta * coh.magnitude * sin_t)
    return ParityExpectations(
        exp_c=math.fsum(c_terms),
        exp_d=math.fsum(d_terms),
        exp_cd=math.fsum(cd_terms),
        d_exp_c=math.fsum(dc_terms),
        d_exp_d=math.fsum(dd_terms),
    )


_DP_LABELS = ((1, 1), (1, -1), (-1, 1), (-1, -1))


def dp_distribution(pe: ParityExpectations) -> OutcomeDistribution:
    """Invert the four parity moments into the four double-parity outcome probabilities."""
    prob = np.array([(1.0 + pc * pe.exp_c + pd * pe.exp_d + pc * pd * pe.exp_cd) / 4.0 for pc, pd in _DP_LABELS])
    dprob = np.array([(pc * pe.d_exp_c + pd * pe.d_exp_d) / 4.0 for pc, pd in _DP_LABELS])
    return OutcomeDistribution(_DP_LABELS, prob, dprob)


def parity_coarse_grain(dist: OutcomeDistribution) -> OutcomeDistribution:
    """Map photon-number outcomes (n_c, n_d) onto parity outcomes ((-1)^n_c, (-1)^n_d)."""
    acc = {lab: ([], []) for lab in _DP_LABELS}
    for (nc, nd), p, d in zip(dist.support, dist.prob, dist.dprob):
        lab = (1 - 2 * (nc % 2), 1 - 2 * (nd % 2))
        acc[lab][0].append(p)
        acc[lab][1].append(d)
    prob = np.array([math.fsum(acc[lab][0]) for lab in _DP_LABELS])
    dprob = np.array([math.fsum(acc[lab][1]) for lab in _DP_LABELS])
    return OutcomeDistribution(_DP_LABELS, prob, dprob)


def cfi_dp(pe: ParityExpectations) -> FisherResult:
    """Double-parity CFI written through the parity moments.

    The even- and odd-photon-number sectors contribute one term each; a term
    whose denominator falls below 1e-14 is dropped and counted.
    """
    probs = dp_distribution(pe).prob
    if probs.min() < -1e-12 or probs.max() > 1.0 + 1e-12:
        raise ValueError(f"parity moments do not define a distribution: {probs}")
    total = 0.0
    skipped = 0
    for sgn in (1.0, -1.0):
        corr = 1.0 + sgn * pe.exp_cd
        mean = pe.exp_c + sgn * pe.exp_d
        slope = pe.d_exp_c + sgn * pe.d_exp_d
        den = corr * corr - mean * mean
        if den < _DP_DEN_FLOOR:
            skipped += 1
            continue
        total += 0.5 * corr * slope * slope / den
    return FisherResult(max(total, 0.0), "closed_form", skipped_terms=skipped)


def cfi_sp(pe: ParityExpectations) -> FisherResult:
    """Single-parity CFI on port c: (d<Pi_c>)^2 / (1 - <Pi_c>^2)."""
    den = 1.0 - pe.exp_c * pe.exp_c
    if den < _SP_DEN_FLOOR:
        if abs(pe.d_exp_c) < _DP_SKIP:
            return FisherResult(0.0, "closed_form", skipped_terms=1)
        raise SingularPhaseError(f"<Pi_c> = {pe.exp_c} with nonzero slope {pe.d_exp_c}")
    return FisherResult(pe.d_exp_c**2 / den, "closed_form")


# ------------------------------------------------------------------ photon counting


def dpnr_fringes(state: LossyState, second_bs: str = "forward") -> tuple[tuple, np.ndarray, np.ndarray]:
    """Outcome labels (n_c, n_d) and arrays (a, b) with p = a + b cos(delta phi).

    Outcomes run over every sector of total photon number 0..xi. Within a
    sector of 2j photons the beam splitter acts through d^j(pi/2).
    ``second_bs="inverse"`` measures ``B^dag rho B`` instead; it only moves the
    phase origin.
    """
    if second_bs not in ("forward", "inverse"):
        raise ValueError("second_bs must be 'forward' or 'inverse'")
    static: dict[int, np.ndarray] = {}
    fringe: dict[int, np.ndarray] = {}

    def amplitudes(total: int, ka: int) -> np.ndarray:
        dmat = wigner_d_matrix_half_pi(total)
        return dmat[:, ka] if second_bs == "forward" else dmat[ka, :]

    for (ka, kb), w in state.diagonals.items():
        t = ka + kb
        col = amplitudes(t, ka)
        static[t] = static.get(t, np.zeros(t + 1)) + w * col * col
    for coh in state.coherences:
        t = sum(coh.bra)
        u = amplitudes(t, coh.bra[0])
        v = amplitudes(t, coh.ket[0])
        fringe[t] = fringe.get(t, np.zeros(t + 1)) + 2.0 * coh.magnitude * u * v

    support = tuple((nc, t - nc) for t in range(state.xi + 1) for nc in range(t + 1))
    a = np.concatenate([static.get(t, np.zeros(t + 1)) for t in range(state.xi + 1)])
    b = np.concatenate([fringe.get(t, np.zeros(t + 1)) for t in range(state.xi + 1)])
    return support, a, b


def dpnr_distribution(state: LossyState, phi: float, second_bs: str = "forward") -> OutcomeDistribution:
    """Joint photon-number distribution p(n_c, n_d | phi) at the two output ports."""
    support, a, b = dpnr_fringes(state, second_bs)
    delta = state.delta
    prob = np.clip(a + b * math.cos(delta * phi), 0.0, None)
    dprob = -delta * b * math.sin(delta * phi)
    return OutcomeDistribution(support, prob, dprob)


def dpnr_cfi_scan(state: LossyState, phis) -> np.ndarray:
    """Photon-counting CFI at every phase in ``phis``.

    Same thresholds as :func:`cfi_discrete`, evaluated for the whole grid at once.
    """
    _, a, b = dpnr_fringes(state)
    theta = state.delta * np.asarray(phis, dtype=float)[:, None]
    p = np.clip(a[None, :] + b[None, :] * np.cos(theta), 0.0, None)
    dp = -state.delta * b[None, :] * np.sin(theta)
    keep = p >= _P_FLOOR
    return np.where(keep, dp * dp / np.where(keep, p, 1.0), 0.0).sum(axis=1)


def noon_g_factor(N: int, loss: LossSpec, phi: float) -> float:
    """Ratio of photon-counting CFI to QFI for a lossy NOON state."""
    pa, pb = loss.eta_a**N, loss.eta_b**N
    s = pa + pb
    if s == 0.0:
        return 0.0
    sin2 = math.sin(N * phi) ** 2
    # s^2 - 4 pa pb cos^2 rewritten without cancellation
    den = (pa - pb) ** 2 + 4.0 * pa * pb * sin2
    if den == 0.0:
        # pa == pb and sin(N phi) == 0: the equal-loss limit g = 1
        return 1.0
    return s * s * sin2 / den


def cfi_noon_dpnr_closed(N: int, loss: LossSpec, phi: float) -> FisherResult:
    g = noon_g_factor(N, loss, phi)
    return FisherResult(g * qfi_noon(N, loss).value, "closed_form")


def cfi_discrete(dist: OutcomeDistribution) -> FisherResult:
    """sum over outcomes of (dp)^2 / p.

    Outcomes with p < 1e-12 are dropped. If such an outcome still has
    |dp| >= 1e-9 the result is flagged ``singular``.
    """
    prob = np.asarray(dist.prob, dtype=float)
    dprob = np.asarray(dist.dprob, dtype=float)
    keep = prob >= _P_FLOOR
    terms = (dprob[keep] ** 2 / prob[keep]).tolist()
    dropped = ~keep
    singular = bool(np.any(np.abs(dprob[dropped]) >= _DP_SKIP))
    return FisherResult(
        max(math.fsum(terms), 0.0),
        "distribution",
        skipped_terms=int(np.count_nonzero(dropped)),
        singular=singular,
    )


def marginalize(dist: OutcomeDistribution, keep: str | int = "c") -> OutcomeDistribution:
    """Sum a two-port distribution over the discarded port."""
    axis = {"c": 0, "d": 1, 0: 0, 1: 1}.get(keep)
    if axis is None:
        raise ValueError("keep must be 'c', 'd', 0 or 1")
    acc: dict = {}
    for lab, p, d in zip(dist.support, dist.prob, dist.dprob):
        if not isinstance(lab, tuple) or len(lab) != 2:
            raise ValueError("marginalize needs pair-valued outcomes")
        slot = acc.setdefault(lab[axis], ([], []))
        slot[0].append(p)
        slot[1].append(d)
    support = tuple(acc)
    prob = np.array([math.fsum(acc[s][0]) for s in support])
    dprob = np.array([math.fsum(acc[s][1]) for s in support])
    return OutcomeDistribution(support, prob, dprob)


# -------------------------------------------------------------------------- homodyne


def homodyne_g(k: int, l: int, r):
    """Radial part g_{k,l}(r) of the double-homodyne basis in the Fock basis.

    Accepts a scalar or array ``r``. For k < l the symmetry
    g_{k,l} = (-1)^(l-k) g_{l,k} is used.
    """
    if k < l:
        sign = -1.0 if (l - k) % 2 else 1.0
        return sign * homodyne_g(l, k, r)
    r_arr = np.asarray(r, dtype=float)
    x = r_arr * r_arr
    norm = math.exp(0.5 * (log_factorial(l) - log_factorial(k))) / math.sqrt(math.pi)
    out = norm * np.exp(-0.5 * x) * r_arr ** (k - l) * laguerre_gen_array(l, k - l, x)
    return float(out) if np.ndim(out) == 0 else out


def _g_table(pairs: Sequence[tuple[int, int]], r: np.ndarray) -> dict[tuple[int, int], np.ndarray]:
    # evaluates every needed g_{k,l} on the nodes through the Laguerre kernel
    canon = sorted({(max(k, l), min(k, l)) for k, l in pairs})
    degrees = np.array([l for _, l in canon], dtype=np.int64)
    alphas = np.array([k - l for k, l in canon], dtype=np.int64)
    x = r * r
    lag = kernels.laguerre_table(degrees, alphas, x)
    gauss = np.exp(-0.5 * x) / math.sqrt(math.pi)
    table = {}
    for q, (k, l) in enumerate(canon):
        norm = math.exp(0.5 * (log_factorial(l) - log_factorial(k)))
        table[(k, l)] = norm * gauss * r ** (k - l) * lag[q]
    out = {}
    for k, l in pairs:
        if k >= l:
            out[(k, l)] = table[(k, l)]
        else:
            out[(k, l)] = (-1.0 if (l - k) % 2 else 1.0) * table[(l, k)]
    return out


def dh_coefficients(state: LossyState, r) -> tuple[np.ndarray, np.ndarray]:
    """Radial profiles (A, C) with p(r, varphi | phi) = A(r) + C(r) cos(delta (phi - 2 varphi))."""
    r_arr = np.atleast_1d(np.asarray(r, dtype=float))
    pairs = list(state.diagonals)
    for coh in state.coherences:
        pairs.extend([coh.bra, coh.ket])
    g = _g_table(pairs, r_arr)
    a = np.zeros_like(r_arr)
    for key, w in state.diagonals.items():
        a += w * g[key] ** 2
    c = np.zeros_like(r_arr)
    for coh in state.coherences:
        c += 2.0 * coh.magnitude * g[coh.bra] * g[coh.ket]
    return a, c


def dh_probability(state: LossyState, r, varphi, phi: float):
    """Double-homodyne density p(r, varphi | phi) and its phi-derivative.

    Returns arrays broadcast over ``r`` and ``varphi`` (scalars for scalars).
    """
    r_arr = np.asarray(r, dtype=float)
    v_arr = np.asarray(varphi, dtype=float)
    r_b, v_b = np.broadcast_arrays(r_arr, v_arr)
    a, c = dh_coefficients(state, r_b.ravel())
    theta = state.delta * (phi - 2.0 * v_b.ravel())
    p = (a + c * np.cos(theta)).reshape(r_b.shape)
    dp = (-state.delta * c * np.sin(theta)).reshape(r_b.shape)
    if p.ndim == 0:
        return float(p), float(dp)
    return p, dp


@dataclass(frozen=True)
class QuadratureGrid:
    """Gauss-Legendre radial nodes on [0, r_max] times a uniform angular grid."""

    radial_nodes: np.ndarray
    radial_weights: np.ndarray
    n_angular: int
    r_max: float

    def __post_init__(self):
        if len(self.radial_nodes) < 64:
            raise ValueError("need at least 64 radial nodes")
        if self.n_angular < 256:
            raise ValueError("need at least 256 angular nodes")

    @property
    def n_radial(self) -> int:
        return len(self.radial_nodes)

    @classmethod
    def build(cls, xi: int, n_radial: int = 200, n_angular: int = 1024, r_max: Optional[float] = None):
        if r_max is None:
            r_max = default_r_max(xi)
        x, w = np.polynomial.legendre.leggauss(n_radial)
        nodes = 0.5 * r_max * (x + 1.0)
        weights = 0.5 * r_max * w
        return cls(nodes, weights, int(n_angular), float(r_max))

    def doubled(self) -> "QuadratureGrid":
        return QuadratureGrid.build(0, 2 * self.n_radial, 2 * self.n_angular, self.r_max)

    def angular_nodes(self) -> np.ndarray:
        return 2.0 * math.pi * np.arange(self.n_angular) / self.n_angular


def default_r_max(xi: int) -> float:
    """sqrt(xi) + 6, pushed out until exp(-r^2) r^(2 xi + 1) < 1e-14."""
    r = math.sqrt(xi) + 6.0
    log_tol = math.log(1e-14)
    while -r * r + (2 * xi + 1) * math.log(r) >= log_tol:
        r += 0.25
    return r


def _dh_on_grid(state: LossyState, phi: float, grid: QuadratureGrid, profile=None) -> tuple[float, int]:
    a, c = dh_coefficients(state, grid.radial_nodes) if profile is None else profile
    return kernels.dh_fisher_sum(
        grid.radial_nodes, grid.radial_weights, a, c, float(state.delta), float(phi), grid.n_angular, _DH_P_FLOOR
    )


def cfi_dh(state: LossyState, phi: float, grid: Optional[QuadratureGrid] = None) -> FisherResult:
    """Double-homodyne CFI by 2-D quadrature in polar coordinates.

    The value reported is the one on the doubled grid; ``error_estimate`` is
    the change from the base grid.
    """
    return cfi_dh_scan(state, [phi], grid)[0]


def cfi_dh_scan(state: LossyState, phis: Sequence[float], grid: Optional[QuadratureGrid] = None) -> list[FisherResult]:
    """:func:`cfi_dh` at several phases, building the radial profiles once per grid."""
    if grid is None:
        grid = QuadratureGrid.build(state.xi)
    fine_grid = grid.doubled()
    coarse_prof = dh_coefficients(state, grid.radial_nodes)
    fine_prof = dh_coefficients(state, fine_grid.radial_nodes)
    out = []
    for phi in phis:
        coarse, _ = _dh_on_grid(state, phi, grid, coarse_prof)
        fine, skipped = _dh_on_grid(state, phi, fine_grid, fine_prof)
        err = abs(fine - coarse)
        if err > _DH_REL_TOL * max(abs(fine), 1e-300):
            raise QuadratureConvergenceError(f"DH quadrature moved by {err:.3e} on grid doubling (value {fine:.6g})")
        out.append(FisherResult(max(fine, 0.0), "quadrature", skipped_terms=skipped, error_estimate=err))
    return out


def dh_total_probability(state: LossyState, phi: float = 0.0, grid: Optional[QuadratureGrid] = None) -> float:
    """Integral of p(r, varphi | phi) r dr dvarphi on the 2-D quadrature grid."""
    if grid is None:
        grid = QuadratureGrid.build(state.xi)
    a, c = dh_coefficients(state, grid.radial_nodes)
    theta = state.delta * (phi - 2.0 * grid.angular_nodes())
    p = a[:, None] + c[:, None] * np.cos(theta)[None, :]
    rows = p.sum(axis=1) * (2.0 * math.pi / grid.n_angular) * grid.radial_weights * grid.radial_nodes
    return math.fsum(rows.tolist())


def cfi_dh_angular_closed(state: LossyState, grid: Optional[QuadratureGrid] = None) -> float:
    """DH CFI with the angular integral done analytically.

    The angular average of sin^2 / (A + C cos) is (A - sqrt(A^2 - C^2)) / C^2,
    which leaves 2 pi delta^2 * integral r (A - sqrt(A^2 - C^2)) dr. Used as an
    independent check of the 2-D quadrature.
    """
    if grid is None:
        grid = QuadratureGrid.build(state.xi, n_radial=400)
    a, c = dh_coefficients(state, grid.radial_nodes)
    root = np.sqrt(np.clip(a * a - c * c, 0.0, None))
    # A - sqrt(A^2 - C^2) == C^2 / (A + sqrt(A^2 - C^2)), the stable form
    den = a + root
    integrand = np.where(den > 0.0, c * c / np.where(den > 0.0, den, 1.0), 0.0)
    return float(2.0 * math.pi * state.delta**2 * np.sum(grid.radial_weights * grid.radial_nodes * integrand))
