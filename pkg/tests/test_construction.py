import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pbitswitch import channels as ch
from pbitswitch import construction as cons
from pbitswitch import linalg as la
from pbitswitch import pbit as pb
from pbitswitch.coherent import coherent_information_of_state
from pbitswitch.errors import DimensionCapError
from pbitswitch.linalg import DensityMatrix, SystemLayout

DESK = cons.ChannelParams(n=1, kappa=0.25, p=0.8, q=1 / 3, d=2, r=1, m=1, N=1)


def perfect_source():
    shield = pb.symmetric_state(2, labels=("A1", "B1"))
    return pb.perfect_pbit(pb.PbitSpec.trivial(shield))


# -- params ---------------------------------------------------------------------


def test_params_json_roundtrip():
    doc = json.loads(json.dumps(DESK.to_json()))
    assert cons.ChannelParams.from_json(doc) == DESK


def test_regimes():
    assert DESK.in_converse_regime() and DESK.in_achievability_regime()
    assert not DESK.replace(p=0.7).in_converse_regime()
    assert not DESK.replace(kappa=0.5).in_achievability_regime()


# -- M ------------------------------------------------------------------------


def test_build_M_dims_and_validity():
    M = cons.build_M(DESK)
    assert (M.d_in, M.d_out) == (8, 16)
    assert M.in_layout.labels == ("S", "a", "A1")
    assert M.out_layout.labels == ("S", "F", "b", "B1")
    assert M.min_choi_eigenvalue() >= -1e-12
    assert M.trace_preservation_error() <= 1e-12


def test_build_M_branches_at_kappa_zero(rng):
    params = DESK.replace(kappa=0.0, p=1.0)
    zeta = cons.grouped_zeta(params.zeta)
    gamma = cons.gamma_channel(zeta, 1)
    M = cons.build_M(params, choi_source=zeta)
    rho = la.random_density_matrix(gamma.in_layout, rng)
    for s in (0, 1):
        inp = la.tensor(DensityMatrix.basis(SystemLayout.of(("S", 2)), s), rho)
        out = ch.apply(M, inp).matrix.reshape(2, 8, 2, 8)[s, :, s, :]
        if s == 0:
            expected = np.kron(np.diag([1, 0]), ch.apply(gamma, rho).matrix)
        else:
            expected = np.kron(np.diag([0, 1]), np.eye(4) / 4)
        assert np.allclose(out, expected)


def test_gamma_choi_is_zeta():
    zeta = cons.grouped_zeta(DESK.zeta)
    gamma = cons.gamma_channel(zeta, 1)
    back = la.permute(ch.choi_state(gamma), ["a", "b", "A1", "B1"])
    assert np.allclose(back.matrix, zeta.matrix)


def test_build_M_refuses_full_scale():
    with pytest.raises(DimensionCapError):
        cons.build_M(cons.pick_parameters(1))


# -- converse ---------------------------------------------------------------------


def test_converse_threshold_examples():
    assert cons.converse_threshold(1, 0.25) == pytest.approx(0.8)
    assert cons.converse_threshold(3, 0.0) == 1.0
    assert cons.converse_threshold(2, 0.5) == pytest.approx(0.894427191, abs=1e-9)


def test_converse_bound_examples():
    resolved, uniform = cons.converse_upper_bound(1, 0, 0.25, 0.8, 1.0)
    # l = 0: -p + 1 - p; the uniform bound 1 - (1 + kappa) p vanishes at the threshold.
    assert resolved == pytest.approx(-0.6, abs=1e-15)
    assert uniform == pytest.approx(0, abs=1e-15)
    assert cons.converse_upper_bound(2, 1, 0.3, 0.6, 0.0) == (0.0, 0.0)


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 8), st.floats(0, 1))
def test_threshold_saturates_uniform_bound(n, kappa):
    p = cons.converse_threshold(n, kappa)
    assert abs(cons.converse_upper_bound(n, n, kappa, p, 1.0)[1]) <= 1e-12


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 6), st.data(), st.floats(0, 1), st.floats(0, 1), st.floats(0, 5))
def test_resolved_bound_below_uniform(n, data, kappa, p, entropy):
    l = data.draw(st.integers(0, n))
    resolved, uniform = cons.converse_upper_bound(n, l, kappa, p, entropy)
    assert resolved <= uniform + 1e-12


@pytest.mark.parametrize("kappa,p", [(0.25, 0.8), (0.25, 1.0), (0.0, 1.0)])
def test_numeric_converse(kappa, p):
    assert cons.numeric_converse_check(DESK.replace(kappa=kappa, p=p), restarts=6) <= 1e-4


# -- bound arithmetic ---------------------------------------------------------------


def test_alicki_fannes():
    assert cons.alicki_fannes_delta(0.0) == 0
    assert cons.alicki_fannes_delta(0.5) == pytest.approx(4)
    assert cons.alicki_fannes_delta(pb.tau_bound(68)) == pytest.approx(0.02697380244, rel=1e-9)


def test_delta_bound_values():
    assert cons.delta_bound(68) == pytest.approx(72 * 2**-17 * 68**1.5, rel=1e-13)
    assert 0.3080 < cons.delta_bound(68) < 0.3081
    assert cons.delta_bound(67) > 1 / 3
    assert math.exp(cons.log_delta_bound(200)) == pytest.approx(cons.delta_bound(200))


def test_delta_bound_dominates_alicki_fannes():
    for m in range(68, 400):
        assert cons.alicki_fannes_delta(pb.tau_bound(m)) <= cons.delta_bound(m)


def test_achievability_bound_examples():
    assert cons.achievability_lower_bound(0.25, 0.8, 8, 0.0)[0] == pytest.approx(0.37417088, abs=1e-8)
    val, ok = cons.achievability_lower_bound(0.25, 0.8, 8, 0.30807)
    assert val == pytest.approx(0.14311838, abs=1e-8) and ok
    for p in (0.1, 0.5, 0.9):
        assert cons.achievability_lower_bound(0.5, p, 4, 0.0)[0] <= 0


def test_smallest_m():
    assert cons.smallest_m(1 / 3) == 68
    assert cons.smallest_m(0.0) is None
    m = cons.smallest_m(0.01)
    assert cons.delta_bound(m) < 0.01 <= cons.delta_bound(m - 1)


# -- parameter picker -----------------------------------------------------------------


def test_pick_parameters_n1():
    params = cons.pick_parameters(1)
    assert (params.kappa, params.p, params.N, params.m, params.r, params.d, params.q) == (
        0.25, pytest.approx(0.8), 8, 68, 143, 2288, pytest.approx(1 / 3))
    assert 1144 * math.log(2288 / 2287) == pytest.approx(0.5002, abs=1e-4)
    assert all(cons.parameter_checks(params).values())


def test_pick_parameters_n2():
    params = cons.pick_parameters(2)
    assert params.N == 64
    assert params.p == pytest.approx(0.970143, abs=1e-6)
    assert 1 - params.p**64 == pytest.approx(1 - (17 / 16) ** -32, rel=1e-12)
    assert 1 - params.p**64 >= 2 / 3


@pytest.mark.parametrize("n", range(1, 7))
def test_pick_parameters_certified(n):
    params = cons.pick_parameters(n)
    assert params.N == 2 * n * 4**n
    assert all(cons.parameter_checks(params).values())


# -- achievability ------------------------------------------------------------------


def test_achievability_input():
    nu = cons.achievability_input(DESK)
    assert nu.trace() == pytest.approx(1, abs=1e-12)
    assert np.allclose(la.keep_only(nu, ["a"]).matrix, np.eye(2) / 2)
    pair = la.keep_only(nu, ["A1^0", "A1^1"])
    assert np.allclose(pair.matrix, la.max_entangled(2).matrix)
    assert la.von_neumann_entropy(nu) == pytest.approx(0, abs=1e-10)


def test_eta_trivial_branches():
    params = DESK.replace(kappa=0.0, p=0.0)
    zeta = cons.grouped_zeta(params.zeta)
    eta = cons.eta_state(params)
    g0 = np.diag([1.0, 0.0])
    assert np.allclose(eta.matrix, np.kron(np.kron(zeta.matrix, g0), g0))
    assert cons.numeric_achievability_check(DESK.replace(kappa=1.0)) == pytest.approx(-1)


def test_eta_perfect_pbit():
    params = DESK.replace(kappa=0.0, p=0.0)
    assert cons.numeric_achievability_check(params, choi_source=perfect_source()) == pytest.approx(1)


@pytest.mark.parametrize("kappa", [0.0, 0.25, 0.5])
@pytest.mark.parametrize("p", [0.2, 0.8])
def test_eta_decomposition_and_channel(kappa, p):
    params = DESK.replace(kappa=kappa, p=p)
    dec = cons.eta_decomposition(params)
    assert sum(dec.weights) == pytest.approx(1)
    assert dec.value == pytest.approx(dec.branch_sum, abs=1e-9)
    expected = kappa * -1 + (1 - kappa) * p * dec.branch_values[1] + (1 - kappa) * (1 - p) * dec.branch_values[2]
    assert dec.value == pytest.approx(expected, abs=1e-9)
    assert cons.numeric_achievability_check(params, against_channel=True) == pytest.approx(dec.value)


# -- feasibility --------------------------------------------------------------------


def test_feasibility_points():
    assert cons.feasibility_point(1, 0.25, 0.8).zone == "both"
    assert not cons.feasibility_point(1, 0.6, 0.9).achievable
    assert not cons.feasibility_point(1, 0.1, 0.5).converse
    assert cons.classify(False, False) == "neither"


def test_n_ladder():
    assert cons.n_ladder(1) == [1, 2, 4, 8]
    assert cons.n_ladder(3) == [1, 2, 4, 8, 16, 32, 64, 128, 256, 384]


def test_feasibility_scan_csv():
    reports = cons.feasibility_scan(1, 11)
    assert len(reports) == 121
    assert all(not r.achievable for r in reports if r.kappa >= 0.5)
    assert all(r.converse for r in reports if r.p == 1.0)
    for r in reports:
        assert r.zone == cons.classify(r.converse, r.achievable)
    lines = cons.reports_to_csv(reports).splitlines()
    assert lines[0] == "kappa,p,converse,achievable,zone,delta_bound,lower_bound"
    assert len(lines) == 122
    with pytest.raises(ValueError):
        cons.feasibility_scan(1, 1)
