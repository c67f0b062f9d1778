"""Experiments built on the core modules: superposed NOON probes, parameter
sweeps, figure datasets and the measurement ranking."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .measurements import (
    OutcomeDistribution,
    ParityExpectations,
    SingularPhaseError,
    cfi_dh,
    cfi_dh_scan,
    cfi_discrete,
    cfi_dp,
    cfi_sp,
    dpnr_cfi_scan,
    dpnr_distribution,
    parity_expectations,
)
from .qfi import FisherResult, qfi_noon, qfi_pefs_one_arm, qfi_pefs_two_arm_bound, sensitivity
from .states import NOON, PEFS, LossSpec, ProbeSpec, SuperposedNOON, evolve_lossy

__all__ = [
    "MEASUREMENTS",
    "SweepSpec",
    "SweepRow",
    "HierarchyReport",
    "FigureTable",
    "FIGURES",
    "superposed_noon_parity",
    "superposed_noon_cfi",
    "qfi_reference",
    "dpnr_best",
    "run_sweep",
    "hierarchy_report",
    "figure_dataset",
    "midpoint_grid",
    "synthetic_joint_distribution",
]

MEASUREMENTS = ("QFI_bound", "DP", "SP", "DPNR", "DH")
DPNR_BEST_POINTS = 721
TIE_RTOL = 1e-4
# below this |<Pi_c>''| the SP limit at a zero-point is not resolved
_CURVATURE_FLOOR = 1e-12


# ------------------------------------------------------------------ superposed NOON


def superposed_noon_parity(Ne: int, No: int, p: float, phi: float) -> ParityExpectations:
    """Parity moments of the lossless superposition sqrt(p)|Ne::0> + sqrt(1-p)|No::0>."""
    SuperposedNOON(Ne, No, p)
    q = 1.0 - p
    ce, co = math.cos(Ne * phi), math.cos(No * phi)
    se, so = math.sin(Ne * phi), math.sin(No * phi)
    return ParityExpectations(
        exp_c=p * ce + q * co,
        exp_d=p * ce - q * co,
        exp_cd=2.0 * p - 1.0,
        d_exp_c=-p * Ne * se - q * No * so,
        d_exp_d=-p * Ne * se + q * No * so,
    )


def superposed_noon_cfi(Ne: int, No: int, p: float, phi: float) -> tuple[FisherResult, FisherResult]:
    """Double- and single-parity CFI of the superposed NOON probe.

    The DP value is p Ne^2 + (1-p) No^2 at every phase. The SP value is
    (d<Pi_c>)^2 / (1 - <Pi_c>^2); where <Pi_c> = +-1 it is replaced by its
    continuous limit |d^2<Pi_c>| and the result is flagged ``singular``.
    """
    SuperposedNOON(Ne, No, p)
    dp = FisherResult(p * Ne * Ne + (1.0 - p) * No * No, "closed_form")
    pe = superposed_noon_parity(Ne, No, p, phi)
    den = 1.0 - pe.exp_c * pe.exp_c
    if den >= 1e-14:
        return dp, FisherResult(pe.d_exp_c**2 / den, "closed_form")
    curvature = abs(p * Ne * Ne * math.cos(Ne * phi) + (1.0 - p) * No * No * math.cos(No * phi))
    if curvature < _CURVATURE_FLOOR:
        raise SingularPhaseError(f"SP limit unresolved at phi={phi}: <Pi_c> and its curvature both degenerate")
    return dp, FisherResult(curvature, "closed_form", skipped_terms=1, singular=True)


# --------------------------------------------------------------------------- sweeps


def _delta(probe: ProbeSpec) -> Optional[int]:
    return probe.m - probe.n if isinstance(probe, (PEFS, NOON)) else None


def _phi_period(probe: ProbeSpec) -> float:
    d = _delta(probe)
    return math.pi / d if d else 2.0 * math.pi


@dataclass(frozen=True)
class SweepSpec:
    """Grid of transmissivities and phases for one probe.

    ``loss_mode`` is ``"both_arms"`` (eta_a = eta_b = eta) or ``"one_arm"``
    (eta_a = eta, eta_b = 1). ``phis=None`` means the single phase pi/(2 delta).
    """

    probe: ProbeSpec
    loss_mode: str
    etas: tuple[float, ...]
    phis: Optional[tuple[float, ...]] = None
    measurements: tuple[str, ...] = ("QFI_bound", "DP", "DPNR")
    repetitions: int = 1

    def __post_init__(self):
        if self.loss_mode not in ("both_arms", "one_arm"):
            raise ValueError(f"loss_mode must be 'both_arms' or 'one_arm', got {self.loss_mode!r}")
        _check_grid("eta", self.etas, 0.0, 1.0, closed_hi=True)
        if self.phis is not None:
            _check_grid("phi", self.phis, 0.0, _phi_period(self.probe), closed_hi=False)
        unknown = set(self.measurements) - set(MEASUREMENTS)
        if unknown or not self.measurements:
            raise ValueError(f"measurements must be a non-empty subset of {MEASUREMENTS}, got {self.measurements}")
        if not (isinstance(self.repetitions, int) and self.repetitions >= 1):
            raise ValueError("repetitions must be a positive integer")

    def loss(self, eta: float) -> LossSpec:
        return LossSpec.both(eta) if self.loss_mode == "both_arms" else LossSpec.one_arm(eta)

    def phase_grid(self) -> tuple[float, ...]:
        if self.phis is not None:
            return self.phis
        d = _delta(self.probe)
        return (math.pi / (2 * d),) if d else (math.pi / 2,)


def _check_grid(name, values, lo, hi, closed_hi):
    if len(values) == 0:
        raise ValueError(f"{name} grid is empty")
    arr = np.asarray(values, dtype=float)
    if np.any(np.diff(arr) <= 0.0):
        raise ValueError(f"{name} grid must be strictly increasing")
    top_ok = arr[-1] <= hi if closed_hi else arr[-1] < hi
    if arr[0] < lo or not top_ok:
        raise ValueError(f"{name} grid must lie in [{lo}, {hi}{']' if closed_hi else ')'}")


@dataclass(frozen=True)
class SweepRow:
    eta: float
    phi: float
    measurement: str
    fisher: float
    dphi: float
    method: str = ""
    error: str = ""

    def as_record(self) -> dict:
        return {
            "eta": self.eta,
            "phi": self.phi,
            "measurement": self.measurement,
            "fisher": self.fisher,
            "dphi": self.dphi,
            "method": self.method,
            "error": self.error,
        }


def qfi_reference(probe: ProbeSpec, loss: LossSpec) -> FisherResult:
    """Best available QFI for the loss pattern.

    NOON: exact. PEFS with loss in a single arm: exact (the two arms are
    interchangeable for a PEFS). PEFS with loss in both arms: upper bound.
    """
    if isinstance(probe, NOON):
        return qfi_noon(probe.N, loss)
    if isinstance(probe, PEFS):
        if loss.eta_b == 1.0:
            return qfi_pefs_one_arm(probe.m, probe.n, loss.eta_a)
        if loss.eta_a == 1.0:
            return qfi_pefs_one_arm(probe.m, probe.n, loss.eta_b)
        return qfi_pefs_two_arm_bound(probe.m, probe.n, loss)
    raise ValueError("QFI is not available for superposed NOON probes")


def dpnr_best(probe: ProbeSpec, loss: LossSpec, n_points: int = DPNR_BEST_POINTS) -> tuple[float, float]:
    """(phi, CFI) maximising photon-counting CFI over ``n_points`` phases in [0, pi/delta]."""
    state = evolve_lossy(probe, loss)
    phis = np.linspace(0.0, math.pi / state.delta, n_points)
    values = dpnr_cfi_scan(state, phis)
    k = int(np.argmax(values))
    return float(phis[k]), float(values[k])


def _evaluate(probe: ProbeSpec, loss: LossSpec, phi: float, measurement: str) -> FisherResult:
    if isinstance(probe, SuperposedNOON):
        if loss != LossSpec():
            raise ValueError("superposed NOON probes are lossless only")
        if measurement == "DP":
            return superposed_noon_cfi(probe.Ne, probe.No, probe.p, phi)[0]
        if measurement == "SP":
            return superposed_noon_cfi(probe.Ne, probe.No, probe.p, phi)[1]
        raise ValueError(f"{measurement} is not available for superposed NOON probes")
    if measurement == "QFI_bound":
        return qfi_reference(probe, loss)
    if measurement == "DP":
        return cfi_dp(parity_expectations(probe, loss, phi))
    if measurement == "SP":
        return cfi_sp(parity_expectations(probe, loss, phi))
    state = evolve_lossy(probe, loss)
    if measurement == "DPNR":
        return cfi_discrete(dpnr_distribution(state, phi))
    if measurement == "DH":
        return cfi_dh(state, phi)
    raise ValueError(f"unknown measurement {measurement!r}")


def _row(eta, phi, name, result: FisherResult, reps) -> SweepRow:
    try:
        dphi = sensitivity(result, reps)
        err = ""
    except ValueError as exc:
        dphi, err = math.inf, str(exc)
    return SweepRow(eta, phi, name, result.value, dphi, result.method, err)


def run_sweep(spec: SweepSpec) -> list[SweepRow]:
    """Fisher information and 1/sqrt(reps F) on every grid point.

    Rows run eta-major, then phi, then measurement in the order of
    :data:`MEASUREMENTS`. When DPNR is requested for a PEFS or NOON probe a
    ``DPNR_best`` row (maximum over a 721-point phase grid, ``phi`` holding
    the maximiser) closes each eta block. Failures become rows with NaN values
    and the message in ``error``.
    """
    wanted = [m for m in MEASUREMENTS if m in spec.measurements]
    rows = []
    for eta in spec.etas:
        loss = spec.loss(eta)
        for phi in spec.phase_grid():
            for name in wanted:
                try:
                    result = _evaluate(spec.probe, loss, phi, name)
                except (ValueError, RuntimeError) as exc:
                    rows.append(SweepRow(eta, phi, name, math.nan, math.nan, "", str(exc)))
                    continue
                rows.append(_row(eta, phi, name, result, spec.repetitions))
        if "DPNR" in wanted and not isinstance(spec.probe, SuperposedNOON):
            phi_best, value = dpnr_best(spec.probe, loss)
            rows.append(_row(eta, phi_best, "DPNR_best", FisherResult(value, "distribution"), spec.repetitions))
    return rows


# ------------------------------------------------------------------------ hierarchy


@dataclass(frozen=True)
class HierarchyReport:
    """DH, DP and DPNR ranked by CFI (ascending), with the QFI for reference."""

    ranking: tuple[tuple[str, float], ...]
    qfi: float
    qfi_method: str
    expected_order_holds: bool
    tie: bool

    @property
    def order(self) -> str:
        parts = [self.ranking[0][0]]
        for (_, lo), (name, hi) in zip(self.ranking, self.ranking[1:]):
            parts.append("~" if hi - lo <= TIE_RTOL * max(hi, 1e-300) else "<")
            parts.append(name)
        return " ".join(parts)


def hierarchy_report(probe: ProbeSpec, loss: LossSpec, phi: float) -> HierarchyReport:
    """Rank the three detection schemes at one operating point.

    ``expected_order_holds`` is True when DH < DP < DPNR strictly (beyond a
    1e-4 relative tie tolerance). ``tie`` is True when all three agree within
    that tolerance.
    """
    state = evolve_lossy(probe, loss)
    values = {
        "DH": cfi_dh(state, phi).value,
        "DP": cfi_dp(parity_expectations(probe, loss, phi)).value,
        "DPNR": cfi_discrete(dpnr_distribution(state, phi)).value,
    }
    ranking = tuple(sorted(values.items(), key=lambda kv: (kv[1], kv[0])))
    q = qfi_reference(probe, loss)
    top = max(values.values())
    tie = top - min(values.values()) <= TIE_RTOL * max(top, 1e-300)

    def below(a, b):
        return values[b] - values[a] > TIE_RTOL * max(values[b], 1e-300)

    holds = below("DH", "DP") and below("DP", "DPNR")
    return HierarchyReport(ranking, q.value, q.method, holds, tie)


# -------------------------------------------------------------------------- figures


def midpoint_grid(lo: float, hi: float, n: int) -> np.ndarray:
    """n cell midpoints of [lo, hi); never hits the endpoints."""
    return lo + (hi - lo) * (np.arange(n) + 0.5) / n


@dataclass(frozen=True)
class FigureTable:
    name: str
    metadata: dict
    columns: tuple[str, ...]
    rows: list = field(default_factory=list)


FIG2_ETAS = tuple(round(0.5 + 0.01 * k, 2) for k in range(51))
FIG2_PROBES = (NOON(6), PEFS(10, 4))
FIG3_ETAS = (1.0, 0.98, 0.9)
FIG3_POINTS = 120
FIG5_POINTS = 200


def _eta_tag(eta: float) -> str:
    return f"{eta:g}"


def _fig2(name: str, loss_mode: str) -> FigureTable:
    columns = ["eta"]
    by_probe = {}
    for probe in FIG2_PROBES:
        spec = SweepSpec(probe, loss_mode, FIG2_ETAS, measurements=("QFI_bound", "DP", "DPNR"))
        rows = run_sweep(spec)
        by_probe[probe.label] = {(r.eta, r.measurement): r.dphi for r in rows}
    series = (("bound", "QFI_bound"), ("dp", "DP"), ("dpnr", "DPNR_best"))
    for tag, _ in series:
        for probe in FIG2_PROBES:
            columns.append(f"dphi_{tag}_{probe.label}")
    table = []
    for eta in FIG2_ETAS:
        row = [eta]
        for _, meas in series:
            for probe in FIG2_PROBES:
                row.append(by_probe[probe.label][(eta, meas)])
        table.append(tuple(row))
    meta = {
        "figure": name,
        "probes": "noon6,pefs10_4",
        "loss": loss_mode,
        "phi": "pi/(2*delta)",
        "bound": "exact QFI except two-arm PEFS (upper bound)",
        "dpnr": f"max over {DPNR_BEST_POINTS} phases in [0,pi/delta]",
        "reps": 1,
    }
    return FigureTable(name, meta, tuple(columns), table)


def _fig3(name: str, probe: ProbeSpec) -> FigureTable:
    delta = _delta(probe)
    phis = midpoint_grid(0.0, math.pi / delta, FIG3_POINTS)
    columns = ["phi"]
    for eta in FIG3_ETAS:
        columns += [f"fc_{m}_eta{_eta_tag(eta)}" for m in ("dp", "sp", "dh")]
    cols = []
    for eta in FIG3_ETAS:
        loss = LossSpec.both(eta)
        state = evolve_lossy(probe, loss)
        dp_col, sp_col = [], []
        for phi in phis:
            pe = parity_expectations(probe, loss, float(phi))
            dp_col.append(cfi_dp(pe).value)
            sp_col.append(cfi_sp(pe).value)
        dh_col = [r.value for r in cfi_dh_scan(state, [float(phi) for phi in phis])]
        cols += [dp_col, sp_col, dh_col]
    table = [tuple([float(phi)] + [c[i] for c in cols]) for i, phi in enumerate(phis)]
    meta = {
        "figure": name,
        "probe": probe.label,
        "loss": "both_arms",
        "etas": ",".join(_eta_tag(e) for e in FIG3_ETAS),
        "phi": f"{FIG3_POINTS} midpoints of [0,pi/delta)",
    }
    return FigureTable(name, meta, tuple(columns), table)


def _fig5(name: str) -> FigureTable:
    Ne, No, p = 4, 3, 0.5
    phis = np.linspace(0.0, math.pi, FIG5_POINTS, endpoint=False)
    table = []
    for phi in phis:
        dp, sp = superposed_noon_cfi(Ne, No, p, float(phi))
        table.append((float(phi), dp.value, sp.value))
    meta = {
        "figure": name,
        "probe": f"snoon{Ne}_{No}",
        "p": p,
        "loss": "none",
        "phi": f"{FIG5_POINTS} points on [0,pi)",
        "sp_zero_points": "continuous limit",
    }
    return FigureTable(name, meta, ("phi", "fc_dp", "fc_sp"), table)


FIGURES = {
    "fig2a": lambda: _fig2("fig2a", "both_arms"),
    "fig2b": lambda: _fig2("fig2b", "one_arm"),
    "fig3a": lambda: _fig3("fig3a", NOON(6)),
    "fig3b": lambda: _fig3("fig3b", PEFS(10, 4)),
    "fig5": lambda: _fig5("fig5"),
}


def figure_dataset(name: str) -> FigureTable:
    try:
        builder = FIGURES[name]
    except KeyError:
        raise ValueError(f"unknown figure {name!r}; choose from {', '.join(FIGURES)}") from None
    return builder()


# ------------------------------------------------------------------------ synthetic


def synthetic_joint_distribution(rng: np.random.Generator, n_c: int, n_d: int) -> OutcomeDistribution:
    """Random two-port distribution with a random derivative that sums to zero.

    Built as p(theta) = softmax(u + theta v) at theta = 0, so that p and dp are
    mutually consistent.
    """
    u = rng.normal(size=(n_c, n_d))
    v = rng.normal(size=(n_c, n_d))
    w = np.exp(u - u.max())
    p = w / w.sum()
    dp = p * (v - np.sum(p * v))
    support = tuple((i, j) for i in range(n_c) for j in range(n_d))
    return OutcomeDistribution(support, p.ravel(), dp.ravel())
