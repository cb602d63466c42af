import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qclmc.bounds import (
    REFERENCE_RATES,
    RateParams,
    appendix_integral_I_closed,
    appendix_integral_II_closed,
    clmc_bias_bound,
    clmc_variance_bound,
    effective_max_level,
    epsilon_schedule,
    exp_integral,
    max_kernel_integral,
    mse_bound,
    qclmc_bias_bound,
)
from qclmc.errors import DivergentBound, InvalidArgument
from qclmc.lowdisc import exp_inverse_transform, generate_sequence

from .oracles import (
    clmc_variance_eq_verbatim,
    clmc_variance_quad,
    integral_I_bound_quad,
    integral_I_realized,
    integral_II_quad,
)

GRID = np.linspace(0.5, 4.0, 5)
LGRID = np.linspace(0.5, 5.0, 5)


def _p(r, beta, **kw):
    base = dict(c1=1.0, alpha=1.0, c2=1.0, beta=beta, r=r, c_disc=1.0, c_tilde=0.5)
    base.update(kw)
    return RateParams(**base)


def _rel(a, b):
    return abs(a - b) / max(abs(b), 1e-300)


def test_rate_params_validation():
    with pytest.raises(InvalidArgument):
        RateParams(c1=1, alpha=0, c2=1, beta=1)
    with pytest.raises(InvalidArgument):
        RateParams(c1=-1, alpha=1, c2=1, beta=1)
    with pytest.raises(InvalidArgument):
        RateParams(c1=1, alpha=1, c2=1, beta=1, kappa=1.0)
    with pytest.raises(InvalidArgument):
        RateParams(c1=1, alpha=1, c2=1, beta=1, c_disc=0.5, c_tilde=0.7)
    p = RateParams.from_mapping(REFERENCE_RATES.as_dict())
    assert p == REFERENCE_RATES


# --- closed forms against quadrature ------------------------------------------------

@pytest.mark.parametrize("r,beta", list(itertools.product(GRID, GRID)))
def test_integral_II_matches_quadrature_grid(r, beta):
    for l in LGRID:
        got = appendix_integral_II_closed(_p(r, beta), 1, l)
        assert _rel(got, integral_II_quad(r, beta, l)) < 1e-8


@pytest.mark.parametrize("r,beta", list(itertools.product(GRID, GRID)))
def test_integral_I_matches_quadrature_grid(r, beta):
    for l in LGRID:
        got = appendix_integral_I_closed(_p(r, beta), 1, l)
        assert _rel(got, integral_I_bound_quad(r, beta, l)) < 1e-8


@pytest.mark.parametrize("beta", [1.0, 2.5, 4.0])
@pytest.mark.parametrize("offset", [-1e-7, -1e-10, 0.0, 1e-10, 1e-7])
def test_near_half_beta_branch(beta, offset):
    r = beta / 2 + offset
    for l in (0.5, 2.0, 5.0):
        assert _rel(appendix_integral_II_closed(_p(r, beta), 1, l), integral_II_quad(r, beta, l)) < 1e-8
        assert _rel(appendix_integral_I_closed(_p(r, beta), 1, l), integral_I_bound_quad(r, beta, l)) < 1e-8


@pytest.mark.parametrize("beta", [0.5, 2.0, 3.5])
@pytest.mark.parametrize("offset", [-1e-7, 0.0, 1e-7])
def test_near_beta_branch(beta, offset):
    r = beta + offset
    for l in (0.5, 2.0, 5.0):
        assert _rel(appendix_integral_II_closed(_p(r, beta), 1, l), integral_II_quad(r, beta, l)) < 1e-8


def test_scaling_in_m_and_constants():
    p = _p(1.3, 2.1, c2=0.7, c_disc=2.0, c_tilde=1.0)
    l = 1.7
    assert _rel(appendix_integral_I_closed(p, 8, l), integral_I_bound_quad(1.3, 2.1, l, c2=0.7, m=8, c_disc=2.0)) < 1e-8
    assert _rel(appendix_integral_II_closed(p, 8, l), integral_II_quad(1.3, 2.1, l, c2=0.7, m=8)) < 1e-8


@pytest.mark.parametrize("special", ["half", "beta"])
def test_branch_continuity(special):
    beta = 2.2
    r0 = beta / 2 if special == "half" else beta
    for l in (0.3, 1.0, 4.0):
        at = max_kernel_integral(r0, beta, l)
        for d in (-1e-6, 1e-6):
            assert _rel(max_kernel_integral(r0 + d, beta, l), at) < 1e-4
        if special == "half":
            at_i = appendix_integral_I_closed(_p(r0, beta), 1, l)
            for d in (-1e-6, 1e-6):
                assert _rel(appendix_integral_I_closed(_p(r0 + d, beta), 1, l), at_i) < 1e-4


def test_r_equals_alpha_bias_branch():
    for l in (0.5, 2.0):
        at = qclmc_bias_bound(_p(1.0, 2.0, alpha=1.0), 4, l)[1]
        assert at == pytest.approx(l / 4, rel=1e-15)
        for d in (-1e-6, 1e-6):
            near = qclmc_bias_bound(_p(1.0 + d, 2.0, alpha=1.0), 4, l)[1]
            assert _rel(near, at) < 1e-4


def test_zero_length_integrals():
    for r, beta in [(1.0, 2.0), (1.0, 1.0), (0.7, 3.0)]:
        assert appendix_integral_II_closed(_p(r, beta), 3, 0.0) == 0.0
        assert appendix_integral_I_closed(_p(r, beta), 3, 0.0) == 0.0


def test_r_equals_beta_hand_value():
    val = appendix_integral_II_closed(_p(1.0, 1.0, c2=1.0), 1, 2.0)
    assert val == pytest.approx(8 / math.e, rel=1e-14)


def test_exp_integral_small_and_infinite():
    assert exp_integral(1e-12, 2.0) == pytest.approx(2.0 + 2e-12, rel=1e-15)
    assert exp_integral(-2.0, math.inf) == 0.5
    assert exp_integral(0.1, math.inf) == math.inf


@given(st.floats(0.05, 5), st.floats(0.05, 5), st.floats(0.0, 6))
def test_kernel_integral_non_negative(r, b, l):
    assert max_kernel_integral(r, b, l) >= -1e-12 * max(1.0, math.exp((r - b / 2) * 2 * l))


def test_realized_integral_below_closed_bound():
    # grid levels have F-discrepancy 1/(2M) <= c_disc / M
    for m, r, beta, l in [(16, 1.0, 2.0, 2.0), (64, 2.76, 3.69, 3.0), (128, 1.5, 1.0, 4.0)]:
        lv = exp_inverse_transform(generate_sequence("grid", m), r).levels
        realized = integral_I_realized(lv, r, beta, l, c2=1.0, m=m)
        assert abs(realized) <= appendix_integral_I_closed(_p(r, beta), m, l) * (1 + 1e-9)


# --- CLMC -------------------------------------------------------------------------

@pytest.mark.parametrize("alpha,beta,r", [(1.85, 3.69, 2.76), (1.0, 3.0, 1.4), (2.0, 2.5, 1.2), (1.2, 5.0, 3.1)])
@pytest.mark.parametrize("l", [0.7, 2.0, 5.0])
def test_clmc_finite_matches_transcription_and_quadrature(alpha, beta, r, l):
    p = RateParams(c1=0.3, alpha=alpha, c2=0.02, beta=beta, r=r)
    got = clmc_variance_bound(p, 5, l)
    verb = clmc_variance_eq_verbatim(0.3, alpha, 0.02, beta, r, 5, l)
    quad = clmc_variance_quad(0.3, alpha, 0.02, beta, r, 5, l)
    for g, v, q in zip(got, verb, quad):
        assert _rel(g, v) < 1e-9
        assert _rel(g, q) < 1e-8


def test_clmc_infinite_limit():
    p = REFERENCE_RATES
    fin = clmc_variance_bound(p, 16, 50.0)
    inf = clmc_variance_bound(p, 16)
    for a, b in zip(fin, inf):
        assert abs(a - b) < 1e-10


def test_clmc_infinite_c1_zero():
    p = RateParams(c1=0.0, alpha=1.0, c2=2.0, beta=3.0, r=1.0)
    var, bias = clmc_variance_bound(p, 4)
    assert bias == 0.0 and var == pytest.approx(4 * 2.0 / (2.0 * 3.0 * 4))


def test_clmc_divergent():
    with pytest.raises(DivergentBound):
        clmc_variance_bound(REFERENCE_RATES.replace(r=3.7), 16)
    with pytest.raises(DivergentBound):
        clmc_variance_bound(REFERENCE_RATES.replace(r=3.69), 16)


def test_clmc_bias_convergence_dominates_reference_rates():
    var, bias = clmc_variance_bound(REFERENCE_RATES, 16)
    assert bias / var > 1
    p = REFERENCE_RATES
    assert bias == pytest.approx(p.c1**2 * p.r / ((2 * p.alpha - p.r) * p.alpha**2 * 16), rel=1e-15)


def test_clmc_bias_bound_examples():
    p = RateParams(c1=math.log(2), alpha=math.log(2), c2=1.0, beta=1.0)
    assert clmc_bias_bound(p, 1.0) == pytest.approx(0.5, rel=1e-15)
    assert clmc_bias_bound(p) == 0.0
    assert clmc_bias_bound(p, 0.0) == pytest.approx(1.0)


# --- assembly ---------------------------------------------------------------------

def test_effective_max_level_examples():
    p = RateParams(c1=1, alpha=1, c2=1, beta=1, r=1.0, c_tilde=0.5)
    assert effective_max_level(p, 8) == pytest.approx(math.log(16), rel=1e-15)
    lv = exp_inverse_transform(generate_sequence("grid", 8), 1.0).levels
    assert lv.max() == pytest.approx(effective_max_level(p, 8), rel=1e-12)
    assert effective_max_level(p.replace(c_tilde=1.0), 1) == 0.0
    q = REFERENCE_RATES
    assert effective_max_level(q, 64) - effective_max_level(q, 32) == pytest.approx(math.log(2) / q.r, rel=1e-12)


def test_qclmc_bias_zero_level():
    p = REFERENCE_RATES
    assert qclmc_bias_bound(p, 16, 0.0) == (pytest.approx(p.c1 / p.alpha), 0.0)


def test_qclmc_discrepancy_bias_decays_fast():
    p = REFERENCE_RATES.replace(c_disc=1.0)
    ms = [16 * 2**i for i in range(10)]
    disc = [qclmc_bias_bound(p, m, effective_max_level(p, m))[1] for m in ms]
    assert all(d > 0 for d in disc)
    slope = np.polyfit(np.log(ms), np.log(disc), 1)[0]
    assert slope < -0.5


def test_report_consistency():
    for method in ("qclmc", "clmc"):
        rep = mse_bound(method, REFERENCE_RATES, 64)
        row = rep.row()
        assert rep.mse == pytest.approx(rep.variance + rep.bias**2)
        assert all(v >= 0 for v in list(rep.bias_terms.values()) + list(rep.variance_terms.values()))
        assert row["mse_bound"] == rep.mse
    clmc = mse_bound("clmc", REFERENCE_RATES, 64)
    assert clmc.mse == clmc.variance


def test_c2_zero_has_no_variance_convergence():
    p = REFERENCE_RATES.replace(c2=0.0)
    rep = mse_bound("qclmc", p, 128)
    assert rep.variance_terms["variance_convergence"] == 0.0
    assert rep.mse == pytest.approx(rep.variance_terms["discrepancy"] + rep.bias**2)


@pytest.mark.parametrize("c_tilde", [0.5, 1.0])
def test_bounds_monotone_in_m(c_tilde):
    p = REFERENCE_RATES.replace(c_disc=1.0, c_tilde=c_tilde)
    for method in ("qclmc", "clmc"):
        vals = [mse_bound(method, p, 2**k).mse for k in range(4, 15)]
        assert all(b <= a for a, b in zip(vals, vals[1:]))


@pytest.mark.parametrize("c_tilde", [0.5, 1.0])
def test_qclmc_below_clmc_for_large_m(c_tilde):
    p = REFERENCE_RATES.replace(c_disc=1.0, c_tilde=c_tilde)
    for k in range(7, 15):
        assert mse_bound("qclmc", p, 2**k).mse < mse_bound("clmc", p, 2**k).mse


def test_unknown_method():
    with pytest.raises(InvalidArgument):
        mse_bound("mlmc", REFERENCE_RATES, 4)


# --- accuracy schedule --------------------------------------------------------------

def test_epsilon_schedule_optimal_regime():
    s = epsilon_schedule(REFERENCE_RATES, 1e-3)
    assert s.cost_exponent == -2.0 and s.cost_log_power == 0
    p = REFERENCE_RATES
    assert s.l_max == pytest.approx(math.log(p.c1 * math.sqrt(2) / (p.alpha * 1e-3)) / p.alpha)


def test_epsilon_schedule_log_power_when_r_equals_beta():
    p = RateParams(c1=1, alpha=2.0, c2=1, beta=3.0, gamma=1.0, r=3.0)
    s = epsilon_schedule(p, 0.01)
    assert s.m_log_power == 1 and s.cost_log_power == 1
    assert s.m_exponent == -2.0


def test_epsilon_schedule_expensive_regime():
    p = RateParams(c1=1, alpha=1.0, c2=1, beta=1.5, gamma=2.5, r=2.0)
    s = epsilon_schedule(p, 0.01)
    assert s.cost_exponent == pytest.approx(-2.0 - 1.0)
    assert s.m_exponent == pytest.approx(-2.5)


@pytest.mark.parametrize("eps", [1 / math.e, 0.5, 0.0, -1.0])
def test_epsilon_schedule_rejects_large_eps(eps):
    with pytest.raises(InvalidArgument):
        epsilon_schedule(REFERENCE_RATES, eps)
