"""Command-line entry point.

Examples
--------
fockfisher qfi --probe pefs:10,4 --eta 0.9
fockfisher cfi --probe noon:6 --eta 0.9 --measure dpnr --phi pi/12
fockfisher sweep --probe pefs:10,4 --grid 0.5:1:0.05 --loss-mode one --format json
fockfisher figure fig2a --out fig2a.csv
fockfisher hierarchy --probe pefs:10,4 --eta 0.9 --phi pi/12
fockfisher selftest
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import re
import sys
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from . import __version__
from .measurements import (
    cfi_dh,
    cfi_discrete,
    cfi_dp,
    cfi_sp,
    dp_distribution,
    dpnr_distribution,
    marginalize,
    parity_expectations,
)
from .qfi import FisherResult, qfi_bruteforce, qfi_noon, qfi_noon_branch_variance, qfi_pefs_one_arm, sensitivity
from .scenarios import (
    FIGURES,
    SweepSpec,
    figure_dataset,
    hierarchy_report,
    qfi_reference,
    run_sweep,
    superposed_noon_cfi,
    synthetic_joint_distribution,
)
from .states import NOON, PEFS, LossSpec, ProbeSpec, SuperposedNOON, evolve_lossy

__all__ = ["RunConfig", "parse_args", "main", "cmd_figure", "cmd_selftest", "parse_phi", "format_table"]

COMMANDS = ("qfi", "cfi", "sweep", "figure", "hierarchy", "selftest")
MEASURE_NAMES = {"qfi": "QFI_bound", "dp": "DP", "sp": "SP", "dpnr": "DPNR", "dh": "DH"}


@dataclass(frozen=True)
class RunConfig:
    command: str
    probe: Optional[ProbeSpec] = None
    loss: LossSpec = LossSpec()
    phi: Optional[float] = None
    measurements: tuple[str, ...] = ()
    grid: Optional[tuple[float, ...]] = None
    loss_mode: str = "both_arms"
    figure: Optional[str] = None
    out: str = "-"
    fmt: str = "csv"
    reps: int = 1


# ----------------------------------------------------------------- flag parsers

_PI_RE = re.compile(r"^([+-]?(?:\d+\.?\d*|\.\d+)?)\s*\*?\s*pi\s*(?:/\s*(\d+\.?\d*))?$")


def parse_phi(text: str) -> float:
    """Radians from '0.3', 'pi', 'pi/12', '3pi/4', '3*pi/4' or '-pi/6'."""
    s = text.strip().lower()
    m = _PI_RE.match(s)
    if m:
        coef = m.group(1)
        if coef in ("", "+"):
            c = 1.0
        elif coef == "-":
            c = -1.0
        else:
            c = float(coef)
        den = float(m.group(2)) if m.group(2) else 1.0
        if den == 0.0:
            raise argparse.ArgumentTypeError(f"zero denominator in {text!r}")
        return c * math.pi / den
    try:
        value = float(s)
    except ValueError:
        raise argparse.ArgumentTypeError(f"cannot read an angle from {text!r}") from None
    if not math.isfinite(value):
        raise argparse.ArgumentTypeError(f"angle must be finite, got {text!r}")
    return value


def _parse_probe(text: str) -> ProbeSpec:
    kind, _, args = text.partition(":")
    parts = [a.strip() for a in args.split(",")] if args else []
    try:
        if kind == "noon" and len(parts) == 1:
            return NOON(int(parts[0]))
        if kind == "pefs" and len(parts) == 2:
            m, n = int(parts[0]), int(parts[1])
            if m <= n:
                raise argparse.ArgumentTypeError(f"m must exceed n (got m={m}, n={n})")
            return PEFS(m, n)
        if kind == "snoon" and len(parts) == 3:
            return SuperposedNOON(int(parts[0]), int(parts[1]), float(parts[2]))
    except (TypeError, ValueError) as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None
    raise argparse.ArgumentTypeError(f"expected pefs:m,n | noon:N | snoon:Ne,No,p, got {text!r}")


def _parse_eta(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not 0.0 <= value <= 1.0:
        raise argparse.ArgumentTypeError(f"transmissivity must lie in [0, 1], got {value}")
    return value


def _parse_measure(text: str) -> tuple[str, ...]:
    names = [t.strip().lower() for t in text.split(",") if t.strip()]
    bad = [t for t in names if t not in MEASURE_NAMES]
    if bad or not names:
        raise argparse.ArgumentTypeError(f"choose from {','.join(MEASURE_NAMES)}, got {text!r}")
    return tuple(MEASURE_NAMES[t] for t in names)


def _parse_grid(text: str) -> tuple[float, ...]:
    try:
        lo, hi, step = (float(x) for x in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected lo:hi:step, got {text!r}") from None
    if step <= 0.0 or hi < lo:
        raise argparse.ArgumentTypeError("need step > 0 and hi >= lo")
    count = int(math.floor((hi - lo) / step + 1e-9)) + 1
    values = tuple(round(lo + k * step, 12) for k in range(count))
    if values[0] < 0.0 or values[-1] > 1.0:
        raise argparse.ArgumentTypeError("eta grid must lie in [0, 1]")
    return values


def _parse_reps(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError("repetitions must be >= 1")
    return value


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", default="-", help="output path, '-' for stdout")
    common.add_argument("--format", dest="fmt", choices=("csv", "json"), default="csv")
    common.add_argument("--reps", type=_parse_reps, default=1, help="repetitions in 1/sqrt(reps F)")

    state = argparse.ArgumentParser(add_help=False)
    state.add_argument("--probe", type=_parse_probe, help="pefs:m,n | noon:N | snoon:Ne,No,p")
    state.add_argument("--eta", type=_parse_eta, help="transmissivity of both arms")
    state.add_argument("--eta-a", type=_parse_eta, help="transmissivity of arm a")
    state.add_argument("--eta-b", type=_parse_eta, help="transmissivity of arm b")
    state.add_argument("--phi", type=parse_phi, help="phase in radians; 'pi/12' style accepted")

    parser = argparse.ArgumentParser(prog="fockfisher", description="Fisher information of lossy Fock-state interferometry.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")
    sub.add_parser("qfi", parents=[common, state], help="quantum Fisher information")
    p_cfi = sub.add_parser("cfi", parents=[common, state], help="CFI of selected measurements")
    p_cfi.add_argument("--measure", type=_parse_measure, default=_parse_measure("qfi,dp,sp,dpnr,dh"))
    p_sweep = sub.add_parser("sweep", parents=[common, state], help="sweep over a transmissivity grid")
    p_sweep.add_argument("--measure", type=_parse_measure, default=_parse_measure("qfi,dp,dpnr"))
    p_sweep.add_argument("--grid", type=_parse_grid, default=_parse_grid("0.5:1:0.01"), help="eta grid lo:hi:step")
    p_sweep.add_argument("--loss-mode", choices=("both", "one"), default="both")
    p_fig = sub.add_parser("figure", parents=[common], help="figure dataset")
    p_fig.add_argument("name", help=", ".join(FIGURES))
    sub.add_parser("hierarchy", parents=[common, state], help="rank DH, DP and DPNR")
    sub.add_parser("selftest", help="reduced oracle and inequality checks")
    return parser


def parse_args(argv: Optional[Sequence[str]] = None) -> RunConfig:
    """Parse and validate; usage errors exit with status 2 and name the flag."""
    parser = _build_parser()
    ns = parser.parse_args(argv)
    cmd = ns.command
    if cmd == "selftest":
        return RunConfig("selftest")
    if cmd == "figure":
        if ns.name not in FIGURES:
            parser.error(f"argument name: unknown figure {ns.name!r} (choose from {', '.join(FIGURES)})")
        return RunConfig("figure", figure=ns.name, out=ns.out, fmt=ns.fmt, reps=ns.reps)

    if ns.probe is None:
        parser.error("argument --probe: required")
    if ns.eta is not None and (ns.eta_a is not None or ns.eta_b is not None):
        parser.error("argument --eta: not allowed together with --eta-a/--eta-b")
    if ns.eta is not None:
        loss = LossSpec.both(ns.eta)
    else:
        loss = LossSpec(1.0 if ns.eta_a is None else ns.eta_a, 1.0 if ns.eta_b is None else ns.eta_b)
    if isinstance(ns.probe, SuperposedNOON) and loss != LossSpec():
        parser.error("argument --probe: superposed NOON probes are lossless only")

    measurements = tuple(getattr(ns, "measure", ()) or ())
    grid = getattr(ns, "grid", None)
    loss_mode = "one_arm" if getattr(ns, "loss_mode", "both") == "one" else "both_arms"
    if cmd == "sweep":
        if isinstance(ns.probe, SuperposedNOON) and grid != (1.0,):
            parser.error("argument --grid: superposed NOON probes are lossless only, use --grid 1:1:1")
        phis = None if ns.phi is None else (ns.phi,)
        try:
            SweepSpec(ns.probe, loss_mode, grid, phis, measurements, ns.reps)
        except ValueError as exc:
            flag = "--phi" if "phi" in str(exc) else "--grid"
            parser.error(f"argument {flag}: {exc}")
    return RunConfig(cmd, ns.probe, loss, ns.phi, measurements, grid, loss_mode, None, ns.out, ns.fmt, ns.reps)


# -------------------------------------------------------------------- formatting


def _cell(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    return str(value)


def _json_value(value):
    if isinstance(value, (float, np.floating)):
        v = float(value)
        return v if math.isfinite(v) else None
    if isinstance(value, np.integer):
        return int(value)
    return value


def format_table(columns: Sequence[str], rows: Sequence[Sequence], metadata: dict, fmt: str) -> str:
    """Render rows as CSV ('#' metadata line, header, data) or a JSON array of records.

    Floats use 17 significant digits in CSV; non-finite floats become null in JSON.
    """
    if fmt == "json":
        records = [{c: _json_value(v) for c, v in zip(columns, row)} for row in rows]
        return json.dumps(records, indent=1) + "\n"
    buf = io.StringIO()
    meta = " ".join(f"{k}={_cell(v)}" for k, v in metadata.items())
    buf.write(f"# fockfisher {__version__} {meta}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_cell(v) for v in row])
    return buf.getvalue()


def _emit(text: str, out: str) -> None:
    if out == "-":
        sys.stdout.write(text)
        return
    with open(out, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def _probe_tag(probe: ProbeSpec) -> str:
    if isinstance(probe, SuperposedNOON):
        return f"{probe.label}_p{probe.p:g}"
    return probe.label


def _meta(cfg: RunConfig, **extra) -> dict:
    meta = {"command": cfg.command, "probe": _probe_tag(cfg.probe)}
    meta.update({"eta_a": cfg.loss.eta_a, "eta_b": cfg.loss.eta_b})
    meta.update(extra)
    meta["reps"] = cfg.reps
    return meta


def _default_phi(probe: ProbeSpec) -> float:
    if isinstance(probe, SuperposedNOON):
        return math.pi / 2
    return math.pi / (2 * (probe.m - probe.n))


def _safe_dphi(result: FisherResult, reps: int) -> float:
    try:
        return sensitivity(result, reps)
    except ValueError:
        return math.inf


# ---------------------------------------------------------------------- commands


def cmd_qfi(cfg: RunConfig):
    cols = ("method", "qfi", "dphi")
    rows = []
    ref = qfi_reference(cfg.probe, cfg.loss)
    rows.append((ref.method, ref.value, _safe_dphi(ref, cfg.reps)))
    brute = qfi_bruteforce(evolve_lossy(cfg.probe, cfg.loss))
    rows.append((brute.method, brute.value, _safe_dphi(brute, cfg.reps)))
    return cols, rows, _meta(cfg)


def _single(cfg: RunConfig, name: str, phi: float) -> FisherResult:
    probe, loss = cfg.probe, cfg.loss
    if isinstance(probe, SuperposedNOON):
        if name not in ("DP", "SP"):
            raise ValueError(f"{name} is not available for superposed NOON probes")
        dp, sp = superposed_noon_cfi(probe.Ne, probe.No, probe.p, phi)
        return dp if name == "DP" else sp
    if name == "QFI_bound":
        return qfi_reference(probe, loss)
    if name in ("DP", "SP"):
        pe = parity_expectations(probe, loss, phi)
        return cfi_dp(pe) if name == "DP" else cfi_sp(pe)
    state = evolve_lossy(probe, loss)
    if name == "DPNR":
        return cfi_discrete(dpnr_distribution(state, phi))
    return cfi_dh(state, phi)


def cmd_cfi(cfg: RunConfig):
    phi = _default_phi(cfg.probe) if cfg.phi is None else cfg.phi
    cols = ("measurement", "fisher", "dphi", "method", "skipped", "singular", "error")
    rows = []
    for name in cfg.measurements:
        try:
            r = _single(cfg, name, phi)
        except (ValueError, RuntimeError) as exc:
            rows.append((name, math.nan, math.nan, "", 0, False, str(exc)))
            continue
        rows.append((name, r.value, _safe_dphi(r, cfg.reps), r.method, r.skipped_terms, r.singular, ""))
    return cols, rows, _meta(cfg, phi=phi)


def cmd_sweep(cfg: RunConfig):
    phis = None if cfg.phi is None else (cfg.phi,)
    spec = SweepSpec(cfg.probe, cfg.loss_mode, cfg.grid, phis, cfg.measurements, cfg.reps)
    rows = run_sweep(spec)
    cols = ("eta", "phi", "measurement", "fisher", "dphi", "method", "error")
    meta = {"command": "sweep", "probe": _probe_tag(cfg.probe), "loss": cfg.loss_mode}
    meta["phi"] = "pi/(2*delta)" if cfg.phi is None else cfg.phi
    meta["reps"] = cfg.reps
    return cols, [tuple(r.as_record().values()) for r in rows], meta


def cmd_figure(name: str):
    """Columns, rows and metadata of a named figure dataset."""
    table = figure_dataset(name)
    return table.columns, table.rows, dict(table.metadata)


def cmd_hierarchy(cfg: RunConfig):
    phi = _default_phi(cfg.probe) if cfg.phi is None else cfg.phi
    rep = hierarchy_report(cfg.probe, cfg.loss, phi)
    cols = ("rank", "measurement", "fisher", "qfi")
    rows = [(k + 1, name, value, rep.qfi) for k, (name, value) in enumerate(rep.ranking)]
    meta = _meta(cfg, phi=phi, order=rep.order.replace(" ", ""), dh_dp_dpnr=rep.expected_order_holds, tie=rep.tie)
    return cols, rows, meta


# ---------------------------------------------------------------------- selftest


def _check_joint_vs_marginal():
    rng = np.random.default_rng(20240601)
    for k in range(20):
        dist = synthetic_joint_distribution(rng, int(rng.integers(2, 6)), int(rng.integers(2, 6)))
        joint = cfi_discrete(dist).value
        for port in ("c", "d"):
            marg = cfi_discrete(marginalize(dist, port)).value
            if joint < marg - 1e-10:
                return False, f"distribution {k}: joint {joint} < marginal {marg} on port {port}"
    return True, "20 random joint distributions"


def _check_one_arm():
    exact = qfi_pefs_one_arm(3, 1, 0.85).value
    brute = qfi_bruteforce(evolve_lossy(PEFS(3, 1), LossSpec.one_arm(0.85))).value
    return abs(exact - brute) <= 1e-8 * (1 + brute), f"closed form {exact!r} vs eigen {brute!r}"


def _check_noon():
    worst = 0.0
    for N in (1, 2, 4, 6):
        for loss in (LossSpec(0.9, 0.7), LossSpec(0.5, 1.0), LossSpec.both(0.8)):
            a = qfi_noon(N, loss).value
            b = qfi_bruteforce(evolve_lossy(NOON(N), loss)).value
            c = qfi_noon_branch_variance(N, loss)
            worst = max(worst, abs(a - b) / (1 + b), abs(a - c) / (1 + c))
    return worst <= 1e-9, f"max relative gap {worst:.2e}"


def _check_lossless():
    worst = 0.0
    for probe in (NOON(6), PEFS(10, 4)):
        state = evolve_lossy(probe, LossSpec())
        pe = parity_expectations(probe, LossSpec(), 0.123)
        for v in (
            qfi_bruteforce(state).value,
            cfi_dp(pe).value,
            cfi_sp(pe).value,
            cfi_discrete(dpnr_distribution(state, 0.123)).value,
        ):
            worst = max(worst, abs(v - 36.0))
    return worst <= 1e-8, f"max deviation from 36: {worst:.2e}"


def _check_dp_distribution():
    worst = 0.0
    for probe in (NOON(6), PEFS(10, 4)):
        for eta in (0.98, 0.9):
            for phi in (0.05, 0.2, 0.41):
                pe = parity_expectations(probe, LossSpec.both(eta), phi)
                worst = max(worst, abs(cfi_dp(pe).value - cfi_discrete(dp_distribution(pe)).value))
    return worst <= 1e-10, f"max gap {worst:.2e}"


def _check_superposed():
    vals = [superposed_noon_cfi(4, 3, 0.5, phi)[0].value for phi in np.linspace(0, math.pi, 20, endpoint=False)]
    sp_ok = all(
        superposed_noon_cfi(4, 3, 0.5, phi)[1].value <= 12.5 + 1e-12 for phi in np.linspace(0, math.pi, 20, endpoint=False)
    )
    spread = max(abs(v - 12.5) for v in vals)
    return spread <= 1e-12 and sp_ok, f"DP spread {spread:.1e}, SP <= DP: {sp_ok}"


SELFTESTS: tuple[tuple[str, Callable[[], tuple[bool, str]]], ...] = (
    ("joint CFI >= marginal CFI", _check_joint_vs_marginal),
    ("one-arm PEFS QFI matches eigendecomposition", _check_one_arm),
    ("NOON QFI matches eigendecomposition", _check_noon),
    ("lossless anchors equal 36", _check_lossless),
    ("DP closed form matches outcome distribution", _check_dp_distribution),
    ("superposed NOON DP constant, SP below DP", _check_superposed),
)


def cmd_selftest(stream=None) -> int:
    """Run the reduced checks, print one line each, return 0 iff all pass."""
    stream = sys.stdout if stream is None else stream
    passed = 0
    for name, check in SELFTESTS:
        try:
            ok, detail = check()
        except Exception as exc:  # a crash is a failed invariant, not a usage error
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        passed += ok
        stream.write(f"{'PASS' if ok else 'FAIL'} {name} ({detail})\n")
    stream.write(f"selftest: {passed}/{len(SELFTESTS)} passed\n")
    return 0 if passed == len(SELFTESTS) else 1


# -------------------------------------------------------------------------- main


def main(argv: Optional[Sequence[str]] = None) -> int:
    cfg = parse_args(argv)
    if cfg.command == "selftest":
        return cmd_selftest()
    if cfg.command == "figure":
        cols, rows, meta = cmd_figure(cfg.figure)
    else:
        handler = {"qfi": cmd_qfi, "cfi": cmd_cfi, "sweep": cmd_sweep, "hierarchy": cmd_hierarchy}[cfg.command]
        try:
            cols, rows, meta = handler(cfg)
        except (ValueError, RuntimeError) as exc:
            sys.stderr.write(f"fockfisher: error: {exc}\n")
            return 1
    _emit(format_table(cols, rows, meta, cfg.fmt), cfg.out)
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
