import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from fockfisher.qfi import (
    FisherResult,
    ZeroFisherInformation,
    qfi_bruteforce,
    qfi_noon,
    qfi_noon_branch_variance,
    qfi_pefs_one_arm,
    qfi_pefs_two_arm_bound,
    sensitivity,
)
from fockfisher.states import NOON, PEFS, LossSpec, evolve_lossy

etas = st.floats(0.0, 1.0)


@st.composite
def mn_pairs(draw, max_total=8):
    m = draw(st.integers(1, max_total))
    n = draw(st.integers(0, min(m - 1, max_total - m)))
    return m, n


def test_fisher_result_validation():
    with pytest.raises(ValueError):
        FisherResult(-1.0, "closed_form")
    with pytest.raises(ValueError):
        FisherResult(math.nan, "closed_form")
    with pytest.raises(ValueError):
        FisherResult(1.0, "guess")
    assert float(FisherResult(2.5, "bound")) == 2.5


def test_sensitivity():
    assert sensitivity(FisherResult(36.0, "closed_form")) == pytest.approx(1 / 6)
    assert sensitivity(36.0, repetitions=4) == pytest.approx(1 / 12)
    with pytest.raises(ZeroFisherInformation):
        sensitivity(0.0)
    with pytest.raises(ValueError):
        sensitivity(1.0, repetitions=0)


@pytest.mark.parametrize("m,n", [(6, 0), (10, 4), (3, 1), (7, 6)])
def test_lossless_qfi_is_delta_squared(m, n):
    probe = NOON(m) if n == 0 else PEFS(m, n)
    d2 = (m - n) ** 2
    assert qfi_bruteforce(evolve_lossy(probe, LossSpec())).value == pytest.approx(d2, abs=1e-10)
    if n:
        assert qfi_pefs_two_arm_bound(m, n, LossSpec()).value == pytest.approx(d2, abs=1e-12)
        assert qfi_pefs_one_arm(m, n, 1.0).value == pytest.approx(d2, abs=1e-12)
    else:
        assert qfi_noon(m, LossSpec()).value == pytest.approx(d2, abs=1e-12)


@pytest.mark.parametrize("N", [1, 2, 5, 8])
@pytest.mark.parametrize("loss", [LossSpec(0.9, 0.4), LossSpec.both(0.75), LossSpec(1.0, 0.2), LossSpec(0.0, 0.8)])
def test_noon_closed_form_three_ways(N, loss):
    closed = qfi_noon(N, loss).value
    assert closed == pytest.approx(qfi_bruteforce(evolve_lossy(NOON(N), loss)).value, abs=1e-9 * (1 + closed))
    assert closed == pytest.approx(qfi_noon_branch_variance(N, loss), abs=1e-12 * (1 + closed))
    assert closed == pytest.approx(oracles.dense_qfi(N, 0, loss.eta_a, loss.eta_b), abs=1e-9 * (1 + closed))


def test_noon_both_arms_closed_form_value():
    # equal losses: 2 N^2 eta^(2N) / (2 eta^N) = N^2 eta^N
    assert qfi_noon(6, LossSpec.both(0.9)).value == pytest.approx(36 * 0.9**6, rel=1e-14)


@pytest.mark.parametrize("m,n", [(1, 0), (3, 1), (4, 2), (5, 3), (6, 2), (7, 1)])
@pytest.mark.parametrize("eta", [0.6, 0.75, 0.9])
def test_one_arm_exact_matches_dense_oracle(m, n, eta):
    exact = qfi_pefs_one_arm(m, n, eta).value
    assert exact == pytest.approx(oracles.dense_qfi(m, n, eta, 1.0), abs=1e-8 * (1 + exact))


@settings(max_examples=60)
@given(mn_pairs(), etas, etas)
def test_two_arm_bound_dominates(mn, ea, eb):
    m, n = mn
    probe = NOON(m) if n == 0 else PEFS(m, n)
    exact = qfi_bruteforce(evolve_lossy(probe, LossSpec(ea, eb))).value
    assert qfi_pefs_two_arm_bound(m, n, LossSpec(ea, eb)).value >= exact - 1e-9


@settings(max_examples=60)
@given(mn_pairs(), etas, etas, st.floats(-2.0, 2.0))
def test_qfi_never_exceeds_lossless_value(mn, ea, eb, phi):
    m, n = mn
    probe = NOON(m) if n == 0 else PEFS(m, n)
    assert qfi_bruteforce(evolve_lossy(probe, LossSpec(ea, eb)), phi).value <= (m - n) ** 2 + 1e-9


@settings(max_examples=30)
@given(mn_pairs(), etas, st.floats(-3.0, 3.0))
def test_bruteforce_is_phase_independent(mn, eta, phi):
    m, n = mn
    probe = NOON(m) if n == 0 else PEFS(m, n)
    state = evolve_lossy(probe, LossSpec(eta, 0.8))
    assert qfi_bruteforce(state, phi).value == pytest.approx(qfi_bruteforce(state, 0.0).value, abs=1e-9)


@settings(max_examples=40)
@given(mn_pairs(), st.floats(0.0, 1.0), st.floats(0.0, 1.0))
def test_one_arm_qfi_monotone_in_eta(mn, e1, e2):
    m, n = mn
    lo, hi = sorted((e1, e2))
    assert qfi_pefs_one_arm(m, n, lo).value <= qfi_pefs_one_arm(m, n, hi).value + 1e-12


def test_argument_checks():
    with pytest.raises(ValueError):
        qfi_pefs_one_arm(2, 3, 0.5)
    with pytest.raises(ValueError):
        qfi_noon(0, LossSpec())


def test_total_loss_gives_zero():
    assert qfi_noon(4, LossSpec(0.0, 0.0)).value == 0.0
    assert qfi_noon(4, LossSpec(0.0, 1.0)).value == 0.0
    assert qfi_pefs_one_arm(3, 1, 0.0).value == pytest.approx(0.0, abs=1e-12)
