"""Transform engine: singularity chain, decay rates, sigma properties,
and the Gittins tail classification."""

import math

import pytest

from mg1soap.distributions import make_distribution
from mg1soap.errors import ClassMismatchError, InvalidParameterError
from mg1soap.light_tail import (
    Verdict,
    classify_gittins,
    classify_soap,
    decay_rates,
    gamma_W,
    gamma_sigma,
    params,
    pole_diagnostic,
    sigma,
    sigma_inv,
    work_lst,
)

INF = math.inf

EXP1 = make_distribution("exp(1)")
DET1 = make_distribution("det(1)")
ERL = make_distribution("erlang(2,2)")
HYPER = make_distribution("hyperexp(0.5,0.5;2,0.5)")
UNI = make_distribution("uniform(1)")

AC4_CATALOG = (EXP1, make_distribution("det(3)"), ERL, HYPER)


def test_params_validation():
    p = params(EXP1, rho=0.5)
    assert p.lam == pytest.approx(0.5)
    with pytest.raises(InvalidParameterError):
        params(EXP1, lam=1.0)  # rho = 1
    with pytest.raises(InvalidParameterError):
        params(EXP1)


def test_sigma_inv_examples():
    p = params(EXP1, lam=0.5)
    assert sigma_inv(EXP1, p, 0.0) == pytest.approx(0.0)
    # closed-form negative root at lam - mu
    assert sigma_inv(EXP1, p, -0.5) == pytest.approx(0.0, abs=1e-14)
    pd = params(DET1, lam=0.5)
    expect = -1.0 - 0.5 * (1.0 - math.e)
    assert sigma_inv(DET1, pd, -1.0) == pytest.approx(expect, rel=1e-12)
    assert expect == pytest.approx(-0.14086, abs=1e-5)
    # divergence signal passes through
    assert sigma_inv(EXP1, p, -1.0) == INF


def test_gamma_W_mm1_closed_form():
    assert gamma_W(EXP1, params(EXP1, lam=0.5)).value == pytest.approx(
        -0.5, abs=1e-9)
    e2 = make_distribution("exp(2)")
    assert gamma_W(e2, params(e2, lam=1.0)).value == pytest.approx(
        -1.0, abs=1e-9)


def test_gamma_W_deterministic_two_root_finders():
    # bisection vs an independent high-accuracy brentq oracle
    from scipy.optimize import brentq
    pd = params(DET1, lam=0.5)
    got = gamma_W(DET1, pd).value
    oracle = brentq(lambda s: s - 0.5 * (1.0 - math.exp(-s)), -10.0, -1e-9,
                    xtol=1e-12)
    assert got == pytest.approx(oracle, abs=1e-9)


def test_gamma_sigma_mm1_closed_form():
    p = params(EXP1, lam=0.5)
    ms = gamma_sigma(EXP1, p)
    assert ms.argmin == pytest.approx(-1.0 + math.sqrt(0.5), abs=1e-8)
    assert ms.value == pytest.approx(-((1.0 - math.sqrt(0.5)) ** 2), abs=1e-10)


def test_light_load_limit_trend():
    # d_fcfs -> mu as the queue empties
    for lam, tol in ((0.1, 0.11), (0.01, 0.011), (0.001, 0.0011)):
        rep = decay_rates(EXP1, params(EXP1, lam=lam))
        assert abs(rep.d_fcfs - 1.0) <= tol


def test_decay_rates_mm1():
    rep = decay_rates(EXP1, params(EXP1, lam=0.5), a_star=1.0)
    assert rep.d_fcfs == pytest.approx(0.5, abs=1e-8)
    assert rep.d_fb == pytest.approx((1.0 - math.sqrt(0.5)) ** 2, abs=1e-6)
    assert rep.d_fb < rep.d_policy < rep.d_fcfs


@pytest.mark.parametrize("d", AC4_CATALOG, ids=str)
@pytest.mark.parametrize("rho", [0.3, 0.5, 0.7, 0.9])
def test_gamma_chain(d, rho):
    p = params(d, rho=rho)
    ms = gamma_sigma(d, p)
    gw = gamma_W(d, p).value
    chain = (d.lst_abscissa, gw, ms.argmin, ms.value, 0.0)
    for a, b in zip(chain, chain[1:]):
        assert b - a > 1e-9


@pytest.mark.parametrize("d", AC4_CATALOG, ids=str)
@pytest.mark.parametrize("rho", [0.3, 0.7])
@pytest.mark.parametrize("a_star", [0.5, 1.0, 2.0])
def test_poles_ordering(d, rho, a_star):
    if a_star >= d.x_max:
        pytest.skip("knee beyond support")
    rep = decay_rates(d, params(d, rho=rho), a_star=a_star)
    assert rep.d_fb < rep.d_policy - 1e-9
    assert rep.d_policy < rep.d_fcfs - 1e-9


@pytest.mark.parametrize("d", [EXP1, ERL, HYPER, DET1], ids=str)
def test_sigma_properties(d):
    # sigma(s) < sigma_trunc(s) < s and the mirrored inverse ordering
    p = params(d, rho=0.6)
    a_star = 0.5 * min(d.x_max, d.mean)
    dt = d.truncate(a_star)
    ms = gamma_sigma(d, p)
    import numpy as np
    rng = np.random.default_rng(2)
    for s in rng.uniform(ms.value * 0.98, -1e-6, size=25):
        s = float(s)
        sig = sigma(d, p, s)
        sig_t = sigma(dt, p, s)
        assert sig < sig_t < s
        assert sigma_inv(d, p, s) > sigma_inv(dt, p, s) > s
    # inversion identity on the sigma branch
    for s in rng.uniform(ms.value * 0.95, -1e-6, size=25):
        s = float(s)
        assert sigma_inv(d, p, sigma(d, p, s)) == pytest.approx(s, abs=1e-8)


def test_fb_decay_equals_mm1_closed_form_via_composition():
    # composition route must land exactly on -min(sigma_inv)
    for lam in (0.2, 0.5, 0.8):
        rep = decay_rates(EXP1, params(EXP1, lam=lam))
        assert rep.d_fb == pytest.approx((1.0 - math.sqrt(lam)) ** 2, abs=1e-8)


@pytest.mark.parametrize("d", AC4_CATALOG, ids=str)
def test_pole_diagnostic_first_order(d):
    p = params(d, rho=0.5)
    gw = gamma_W(d, p).value
    prods, drift = pole_diagnostic(d, p, gw)
    assert all(math.isfinite(x) and x != 0.0 for x in prods)
    assert drift < 0.02


def test_classify_soap_examples():
    assert classify_soap(0.0, INF) is Verdict.OPTIMAL
    assert classify_soap(INF, INF) is Verdict.PESSIMAL
    assert classify_soap(1.0, INF) is Verdict.INTERMEDIATE
    assert classify_soap(1.0, 1.0) is Verdict.PESSIMAL


def test_classify_gittins():
    assert classify_gittins(EXP1) is Verdict.OPTIMAL
    assert classify_gittins(UNI) is Verdict.OPTIMAL
    assert classify_gittins(HYPER) is Verdict.PESSIMAL


def test_classify_gittins_rejects_heavy():
    with pytest.raises(ClassMismatchError):
        classify_gittins(make_distribution("pareto(2.5,1)"))


def test_work_lst_basics():
    p = params(EXP1, lam=0.5)
    assert work_lst(EXP1, p, 0.0) == 1.0
    # known M/M/1 workload transform value at s=1:
    # W~(s) = (1-rho) s / (s - lam s/(mu+s))
    s = 1.0
    expect = s * 0.5 / (s - 0.5 * s / (1.0 + s))
    assert work_lst(EXP1, p, s) == pytest.approx(expect, rel=1e-12)
