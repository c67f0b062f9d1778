import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from fockfisher.states import (
    NOON,
    PEFS,
    LossSpec,
    SuperposedNOON,
    b_coeff,
    c_indicator,
    evolve_lossy,
    noon_direct_sum,
    probe_photons,
)

etas = st.floats(0.0, 1.0)


@st.composite
def pefs_probes(draw, max_total=9):
    m = draw(st.integers(1, max_total))
    n = draw(st.integers(0, min(m - 1, max_total - m)))
    return PEFS(m, n)


def embed(state, phi, dim):
    """Place the sparse state into the (dim x dim)-mode dense layout of the oracle."""
    rho, _, basis = state.to_dense(phi)
    full = np.zeros((dim * dim, dim * dim), complex)
    idx = [ka * dim + kb for ka, kb in basis]
    full[np.ix_(idx, idx)] = rho
    return full


def test_probe_validation():
    with pytest.raises(ValueError):
        PEFS(4, 10)
    with pytest.raises(ValueError):
        PEFS(3, 3)
    with pytest.raises(TypeError):
        PEFS(3.0, 1)
    with pytest.raises(ValueError):
        NOON(0)
    with pytest.raises(ValueError):
        SuperposedNOON(3, 3, 0.5)
    with pytest.raises(ValueError):
        SuperposedNOON(4, 2, 0.5)
    with pytest.raises(ValueError):
        SuperposedNOON(4, 3, 1.5)
    with pytest.raises(ValueError):
        LossSpec(1.2, 1.0)
    with pytest.raises(TypeError):
        probe_photons(SuperposedNOON(4, 3, 0.5))


def test_labels_and_photons():
    assert PEFS(10, 4).label == "pefs10_4"
    assert NOON(6).label == "noon6"
    assert SuperposedNOON(4, 3, 0.5).label == "snoon4_3"
    assert probe_photons(NOON(6)) == (6, 0)
    assert LossSpec.one_arm(0.7) == LossSpec(0.7, 1.0)
    assert LossSpec.both(0.7).gamma_b == pytest.approx(0.3)


def test_b_coeff_regular_at_extremes():
    assert b_coeff(3, 0, 0, 5, LossSpec(1.0, 1.0)) == 1.0
    assert b_coeff(3, 3, 2, 5, LossSpec(0.0, 0.0)) == 1.0
    assert b_coeff(3, 1, 0, 5, LossSpec(1.0, 1.0)) == 0.0
    assert b_coeff(3, 4, 0, 5, LossSpec.both(0.5)) == 0.0
    with pytest.raises(ValueError):
        b_coeff(6, 0, 0, 5, LossSpec())
    assert c_indicator(3, 3, 2, 5) == 1
    assert c_indicator(3, 4, 0, 5) == 0


@settings(max_examples=80)
@given(pefs_probes(), etas, etas)
def test_trace_is_one(probe, ea, eb):
    state = evolve_lossy(probe, LossSpec(ea, eb))
    assert state.trace == pytest.approx(1.0, abs=1e-12)
    assert all(w > 0.0 for w in state.diagonals.values())


@settings(max_examples=40)
@given(pefs_probes(), etas, etas)
def test_binomial_weights_sum_to_one(probe, ea, eb):
    xi = probe.m + probe.n
    loss = LossSpec(ea, eb)
    for k in (probe.m, probe.n):
        total = math.fsum(b_coeff(k, la, lb, xi, loss) for la in range(xi + 1) for lb in range(xi + 1))
        assert total == pytest.approx(1.0, abs=1e-12)


@settings(max_examples=40)
@given(pefs_probes(max_total=7), etas, etas, st.floats(-3.0, 3.0))
def test_density_is_positive_semidefinite(probe, ea, eb, phi):
    rho, _, _ = evolve_lossy(probe, LossSpec(ea, eb)).to_dense(phi)
    assert np.linalg.eigvalsh(rho).min() > -1e-12
    np.testing.assert_allclose(rho, rho.conj().T, atol=1e-15)


@pytest.mark.parametrize("m,n", [(1, 0), (3, 1), (4, 0), (5, 2), (6, 0), (4, 3)])
@pytest.mark.parametrize("ea,eb", [(0.9, 0.9), (0.6, 1.0), (1.0, 0.35), (0.8, 0.5), (0.0, 0.7)])
def test_matches_dense_kraus_model(m, n, ea, eb):
    dim = m + 1
    probe = NOON(m) if n == 0 else PEFS(m, n)
    state = evolve_lossy(probe, LossSpec(ea, eb))
    phi = 0.37
    ref = oracles.lossy_rho(m, n, ea, eb, phi)
    np.testing.assert_allclose(embed(state, phi, dim), ref, atol=1e-13)


@pytest.mark.parametrize("m,n", [(3, 1), (6, 0), (5, 2)])
def test_loss_commutes_with_phase(m, n):
    a = oracles.lossy_rho(m, n, 0.8, 0.6, 0.9, loss_first=False)
    b = oracles.lossy_rho(m, n, 0.8, 0.6, 0.9, loss_first=True)
    np.testing.assert_allclose(a, b, atol=1e-13)


def test_derivative_matches_finite_difference():
    state = evolve_lossy(PEFS(5, 2), LossSpec(0.7, 0.85))
    _, drho, _ = state.to_dense(0.4)
    h = 1e-6
    fd = (state.to_dense(0.4 + h)[0] - state.to_dense(0.4 - h)[0]) / (2 * h)
    np.testing.assert_allclose(drho, fd, atol=1e-8)


def test_lossless_state_is_pure_probe():
    state = evolve_lossy(PEFS(10, 4), LossSpec())
    assert state.diagonals == {(10, 4): 0.5, (4, 10): 0.5}
    assert len(state.coherences) == 1
    c = state.coherences[0]
    assert (c.bra, c.ket, c.magnitude) == ((10, 4), (4, 10), 0.5)


def test_total_loss_leaves_vacuum():
    state = evolve_lossy(PEFS(3, 1), LossSpec(0.0, 0.0))
    assert state.diagonals == {(0, 0): 1.0}
    assert state.coherences == ()


@pytest.mark.parametrize("N", [1, 2, 3, 6])
@pytest.mark.parametrize("loss", [LossSpec(0.9, 0.7), LossSpec.both(0.5), LossSpec.one_arm(0.8)])
def test_noon_direct_sum_rebuilds_evolved_state(N, loss):
    split = noon_direct_sum(N, loss)
    a = split.to_lossy_state()
    b = evolve_lossy(NOON(N), loss)
    ra, _, ba = a.to_dense(0.3)
    rb, _, bb = b.to_dense(0.3)
    assert ba == bb
    np.testing.assert_allclose(ra, rb, atol=1e-15)
    assert split.weight_xi == pytest.approx(0.5 * (split.amp_a**2 + split.amp_b**2))


def test_noon_direct_sum_vacuum_merges():
    split = noon_direct_sum(6, LossSpec.both(0.9))
    # (N-l, 0) and (0, N-l) for l = 1..N, with the two vacua merged
    assert len(split.rho_d) == 2 * 6 - 1
    assert split.rho_d[(0, 0)] == pytest.approx(0.5 * 0.1**6 * 2)


def test_evolve_rejects_superposed_noon():
    with pytest.raises(TypeError):
        evolve_lossy(SuperposedNOON(4, 3, 0.5), LossSpec())



@pytest.mark.parametrize("probe", [NOON(1), NOON(4), PEFS(3, 1)])
@pytest.mark.parametrize("loss", [LossSpec(1.0, 5e-324), LossSpec(5e-324, 0.7)])
def test_subnormal_transmissivity_keeps_coherences_on_support(probe, loss):
    state = evolve_lossy(probe, loss)
    for c in state.coherences:
        assert c.bra in state.diagonals and c.ket in state.diagonals
    rho, _, _ = state.to_dense(0.3)
    assert np.trace(rho).real == pytest.approx(1.0, abs=1e-12)
