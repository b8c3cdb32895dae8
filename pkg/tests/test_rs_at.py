import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import optimize

from pspin_at.errors import PreconditionError
from pspin_at.mixture import CouplingParams, MixtureSpec, xi0, xi0_d1, xi0_d2
from pspin_at.parisi import RSBMeasure, parisi_value
from pspin_at.rs_at import (
    alpha,
    alpha_at,
    f_rs,
    f_rs_d2,
    fixed_point_residual,
    qstar_set,
    rs_minimize,
)

from conftest import SPECS, gauss_oracle

spec_st = st.sampled_from(list(SPECS.values()))


def logcosh(x):
    return abs(x) + math.log1p(math.exp(-2 * abs(x))) - math.log(2)


def sech4(x):
    return (2 * math.exp(-abs(x)) / (1 + math.exp(-2 * abs(x)))) ** 4


def f_rs_oracle(spec, beta, h, q):
    s = beta * math.sqrt(xi0_d1(spec, q))
    pen = beta**2 / 2 * (xi0(spec, 1.0) - xi0(spec, q) - (1 - q) * xi0_d1(spec, q))
    return gauss_oracle(logcosh, s, h) + pen


def phi_oracle(spec, beta, h, q):
    s = beta * math.sqrt(xi0_d1(spec, q))
    return gauss_oracle(lambda x: math.tanh(x) ** 2, s, h) - q


# f_rs


@pytest.mark.parametrize("spec", SPECS.values(), ids=SPECS.keys())
@pytest.mark.parametrize("beta", [0.4, 1.7])
def test_f_rs_at_zero_overlap(spec, beta):
    assert f_rs(spec, CouplingParams(beta), 0.0) == pytest.approx(beta**2 / 2 * xi0(spec, 1.0), abs=1e-14)


def test_f_rs_sk_beta_one(sk):
    assert f_rs(sk, CouplingParams(1.0), 0.0) == 0.25


def test_f_rs_matches_dirac_parisi_value(sk):
    params = CouplingParams(2.0, 0.5)
    assert f_rs(sk, params, 0.7) == pytest.approx(parisi_value(RSBMeasure.dirac(0.7), sk, params), abs=1e-8)


@given(spec=spec_st, beta=st.floats(0, 2.5), h=st.floats(-1.5, 1.5), q=st.floats(0, 1))
def test_f_rs_against_integration_oracle(spec, beta, h, q):
    assert f_rs(spec, CouplingParams(beta, h), q) == pytest.approx(f_rs_oracle(spec, beta, h, q), abs=1e-11)


def test_f_rs_vectorised(sk):
    params = CouplingParams(1.3, 0.2)
    q = np.linspace(0, 1, 7)
    np.testing.assert_allclose(f_rs(sk, params, q), [f_rs(sk, params, float(x)) for x in q], atol=1e-14)


@pytest.mark.parametrize("q", [-0.1, 1.1, math.nan])
def test_f_rs_rejects_bad_overlap(sk, q):
    with pytest.raises(PreconditionError):
        f_rs(sk, CouplingParams(1.0), q)


# rs_minimize


def test_rs_minimize_sk_high_temperature(sk):
    res = rs_minimize(sk, CouplingParams(0.5))
    assert res.minimizers == [0.0]
    assert res.value == pytest.approx(0.0625, abs=1e-15)
    assert res.unique


def test_rs_minimize_counterexample_model_keeps_zero():
    res = rs_minimize(MixtureSpec.sk_plus_p(4, 5.0), CouplingParams(0.12))
    assert res.unique and res.minimizers == [0.0]


@pytest.mark.parametrize("h", [0.0, 0.4])
def test_rs_minimize_infinite_temperature_is_degenerate(sk, h):
    res = rs_minimize(sk, CouplingParams(0.0, h))
    assert not res.unique
    assert res.value == pytest.approx(math.log(math.cosh(h)), abs=1e-15)


def test_rs_minimize_against_bounded_scalar_oracle(sk):
    params = CouplingParams(2.0, 0.3)
    res = rs_minimize(sk, params)
    ref = optimize.minimize_scalar(
        lambda q: f_rs_oracle(sk, 2.0, 0.3, q), bounds=(0.3, 1.0), method="bounded", options={"xatol": 1e-10}
    )
    assert res.unique
    assert res.minimizers[0] == pytest.approx(ref.x, abs=1e-6)
    assert res.value == pytest.approx(ref.fun, abs=1e-11)


@pytest.mark.parametrize("spec", SPECS.values(), ids=SPECS.keys())
@pytest.mark.parametrize("beta,h", [(0.7, 0.0), (1.5, 0.0), (1.5, 0.6), (2.5, 0.2)])
def test_rs_minimizers_are_fixed_points(spec, beta, h):
    params = CouplingParams(beta, h)
    rep = alpha(spec, params)
    roots = [q for q, _ in rep.roots]
    for q in rep.rs_minimizers:
        assert min(abs(q - r) for r in roots) <= 1e-6


# qstar_set


@pytest.mark.parametrize("spec", SPECS.values(), ids=SPECS.keys())
def test_zero_is_a_fixed_point_without_field(spec):
    assert 0.0 in qstar_set(spec, CouplingParams(1.2))


def test_single_root_sk_with_field(sk):
    roots = qstar_set(sk, CouplingParams(0.5, 0.3))
    q = 0.0
    for _ in range(200):
        q = phi_oracle(sk, 0.5, 0.3, q) + q
    assert len(roots) == 1
    assert roots[0] == pytest.approx(q, abs=1e-9)


def test_two_roots_sk_low_temperature(sk):
    roots = qstar_set(sk, CouplingParams(2.0))
    q_plus = optimize.brentq(lambda q: phi_oracle(sk, 2.0, 0.0, q), 0.1, 1.0, xtol=1e-14)
    assert len(roots) == 2
    assert roots[0] == 0.0
    assert roots[1] == pytest.approx(q_plus, abs=1e-9)


@pytest.mark.parametrize("spec", SPECS.values(), ids=SPECS.keys())
@pytest.mark.parametrize("beta,h", [(0.5, 0.3), (2.0, 0.0), (1.2, 1.0), (3.0, 0.1)])
def test_root_residuals_and_grid_stability(spec, beta, h):
    params = CouplingParams(beta, h)
    roots = qstar_set(spec, params)
    assert roots
    for q in roots:
        assert abs(fixed_point_residual(spec, params, q)) <= 1e-10
    assert len(qstar_set(spec, params, grid_points=4001)) == len(roots)


@pytest.mark.parametrize("spec", [SPECS["sk"], SPECS["mixed"]], ids=["sk", "mixed"])
def test_fixed_points_are_stationary_points(spec):
    params = CouplingParams(1.8, 0.25)
    for q in qstar_set(spec, params):
        if 1e-3 < q < 1 - 1e-3:
            d = (f_rs(spec, params, q + 1e-5) - f_rs(spec, params, q - 1e-5)) / 2e-5
            assert abs(d) <= 1e-7


# alpha_at / alpha


@pytest.mark.parametrize("beta", [0.3, 0.9, 1.4])
def test_alpha_at_zero_equals_beta_squared(beta):
    spec = MixtureSpec.sk_plus_p(4, 7.0)
    assert alpha_at(spec, CouplingParams(beta), 0.0) == pytest.approx(beta**2, abs=1e-15)


@pytest.mark.parametrize("beta", [0.5, 3.0])
def test_alpha_at_pure_quartic_vanishes(pure4, beta):
    assert alpha_at(pure4, CouplingParams(beta), 0.0) == 0.0


def test_alpha_at_degenerate_gaussian(sk):
    beta = 1.3
    assert alpha_at(sk, CouplingParams(beta, 1.0), 0.0) == pytest.approx(beta**2 / math.cosh(1.0) ** 4, rel=1e-14)


@given(spec=spec_st, beta=st.floats(0, 3), h=st.floats(-1, 1), q=st.floats(0, 1))
def test_alpha_at_against_oracle(spec, beta, h, q):
    s = beta * math.sqrt(xi0_d1(spec, q))
    want = beta**2 * xi0_d2(spec, q) * gauss_oracle(sech4, s, h)
    got = alpha_at(spec, CouplingParams(beta, h), q)
    assert got >= 0
    assert got == pytest.approx(want, abs=1e-11 * max(1.0, want))


def test_alpha_counterexample_model_in_at_region():
    rep = alpha(MixtureSpec.sk_plus_p(4, 5.0), CouplingParams(0.9))
    assert rep.at_member
    assert rep.alpha_min <= 0.81 + 1e-9


def test_alpha_sk_high_temperature(sk):
    rep = alpha(sk, CouplingParams(0.3))
    assert rep.roots == [(0.0, pytest.approx(0.09, abs=1e-15))]
    assert rep.alpha_min == pytest.approx(0.09, abs=1e-15)
    assert rep.at_member


def test_alpha_sk_low_temperature_both_roots(sk):
    params = CouplingParams(2.0)
    rep = alpha(sk, params)
    (q0, a0), (qp, ap) = rep.roots
    assert a0 == pytest.approx(4.0, abs=1e-14)
    assert ap == pytest.approx(4.0 * gauss_oracle(sech4, 2.0 * math.sqrt(qp)), rel=1e-10)
    assert rep.alpha_min == pytest.approx(min(a0, ap))
    assert rep.at_member == (rep.alpha_min <= 1)
    assert rep.rs_minimizers == [pytest.approx(qp, abs=1e-6)]


@pytest.mark.parametrize("beta", [0.5, 2.0, 5.0])
def test_pure_quartic_alpha_degenerate(pure4, beta):
    assert alpha(pure4, CouplingParams(beta)).alpha_min <= 1e-12


@pytest.mark.parametrize("spec", SPECS.values(), ids=SPECS.keys())
def test_alpha_min_below_value_at_zero(spec):
    params = CouplingParams(1.6)
    rep = alpha(spec, params)
    assert rep.alpha_min <= alpha_at(spec, params, 0.0)


def test_at_report_serialises(sk):
    rep = alpha(sk, CouplingParams(1.5, 0.2))
    obj = json.loads(json.dumps(rep.to_json()))
    assert set(obj) == {"roots", "alpha_min", "at_member", "rs_minimizers", "alpha_at_rs_min"}
    assert obj["alpha_min"] == rep.alpha_min


# f_rs_d2


@pytest.mark.parametrize("beta", [0.5, 0.8, 1.0])
def test_second_derivative_at_zero(beta):
    spec = MixtureSpec.sk_plus_p(4, 5.0)
    assert f_rs_d2(spec, CouplingParams(beta), 0.0) == pytest.approx(beta**2 / 2 * (1 - beta**2), abs=2e-4)


def test_second_derivative_sk_critical(sk):
    assert f_rs_d2(sk, CouplingParams(1.0), 0.0) == pytest.approx(0.0, abs=2e-4)


def test_second_derivative_infinite_temperature(sk):
    assert f_rs_d2(sk, CouplingParams(0.0, 0.7), 0.4) == 0.0


@pytest.mark.parametrize("q", [0.3, 1.0])
def test_second_derivative_against_oracle_differences(q):
    spec, params = SPECS["mixed"], CouplingParams(1.4, 0.3)
    h = 1e-3
    pts = [q - 2 * h, q - h, q] if q == 1.0 else [q - h, q, q + h]
    f = [f_rs_oracle(spec, 1.4, 0.3, x) for x in pts]
    fd = (f[0] - 2 * f[1] + f[2]) / h**2
    assert f_rs_d2(spec, params, q) == pytest.approx(fd, abs=5e-3 * max(1, abs(fd)))
