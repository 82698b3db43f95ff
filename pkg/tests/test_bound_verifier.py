"""Tests for the inequality-layer verifiers."""

import json
import math

import numpy as np
import pytest

from bcs_tc_lab.bound_verifier import (
    BoundReport,
    SingularApproximant,
    e_gap,
    fit_e_gap_constant,
    verify_chain,
    verify_lemma31_approx,
    verify_lemma32_bounds,
    verify_lemma41_integrals,
    verify_region_bounds,
    verify_strong_coupling,
)
from bcs_tc_lab.bs_spectra import sup_over_q
from bcs_tc_lab.errors import PreconditionError
from bcs_tc_lab.interactions import InteractionModel
from bcs_tc_lab.kernels import PhysParams
from bcs_tc_lab.quadrature import closed_form_oracles

GAUSS = InteractionModel.gaussian(1.0, 1.0)
FAST = dict(base_nodes=14, octave_nodes=6, scan_points=40, golden_iterations=40)


# ---------------------------------------------------------------------------
# singular approximants
# ---------------------------------------------------------------------------


def test_approximant_windows_and_kernel():
    params = PhysParams(mu=1.0, temp=0.01)
    q_small = SingularApproximant.build("Q", 0.0, params)
    assert q_small.fermi_window and not q_small.zero_window
    assert q_small.kernel(0.0) == pytest.approx(q_small.coefficient / math.pi)

    w_fermi = SingularApproximant.build("W", 1.0, params)
    assert not w_fermi.fermi_window and w_fermi.zero_window
    # constant part only: kernel is z-independent
    assert w_fermi.kernel(3.7) == pytest.approx(w_fermi.coefficient / math.pi)

    w_both = SingularApproximant.build("W", 0.49, params)
    assert w_both.fermi_window  # zero window needs |q - sqrt(mu)| small
    assert not w_both.zero_window

    hot = SingularApproximant.build("W", 0.0, PhysParams(mu=1.0, temp=0.6))
    assert not hot.fermi_window and not hot.zero_window
    assert hot.kernel(1.0) == 0.0


def test_approximant_validation():
    params = PhysParams(mu=1.0, temp=0.01)
    with pytest.raises(PreconditionError):
        SingularApproximant.build("X", 0.0, params)
    with pytest.raises(PreconditionError):
        SingularApproximant.build("Q", 0.0, PhysParams(mu=-1.0, temp=0.01))


# ---------------------------------------------------------------------------
# log-divergence bounds
# ---------------------------------------------------------------------------


def test_lemma32_default_passes():
    rep = verify_lemma32_bounds()
    assert rep.passed
    assert rep.lemma == "lemma32"
    d = rep.details
    assert abs(d["slope_q0"] - 1.0) <= 0.05
    assert abs(d["slope_fermi"] - 0.5) <= 0.05
    assert d["ratio_m_fermi"] < 3.0
    assert d["identity_m0_eq_n0_rel"] <= 1e-8
    assert d["refine_drift"] < 0.10
    assert math.isfinite(rep.c_emp)


def test_lemma32_other_mu_passes():
    rep = verify_lemma32_bounds(mu=2.0)
    assert rep.passed
    assert abs(rep.details["slope_q0"] - 1.0) <= 0.05
    assert abs(rep.details["slope_fermi"] - 0.5) <= 0.05


def test_lemma32_grid_coverage_enforced():
    with pytest.raises(PreconditionError):
        verify_lemma32_bounds(T_grid=np.geomspace(1e-4, 10.0, 8))
    with pytest.raises(PreconditionError):
        verify_lemma32_bounds(q_grid=np.linspace(0.1, 3.0, 8))
    with pytest.raises(PreconditionError):
        verify_lemma32_bounds(mu=-1.0)


# ---------------------------------------------------------------------------
# closed forms vs quadrature
# ---------------------------------------------------------------------------


def test_lemma41_default_passes():
    rep = verify_lemma41_integrals()
    assert rep.passed
    assert rep.worst_margin >= 0.0
    assert rep.details["n_points"] >= 60
    assert rep.details["window_refine_drift"] < 0.10
    for v in rep.details["window_sups"].values():
        assert math.isfinite(v) and v > 0.0


def test_oracle_special_values():
    # the edge integral vanishes exactly at the Fermi momentum, and the
    # inner weighted integral vanishes where its log argument is 1
    assert closed_form_oracles("m_edge_integral", mu=1.0, q=1.0) == 0.0
    assert closed_form_oracles("abs_p_inner", mu=1.0, q=1.0) == 0.0
    # on-sphere band branch reduces to 1/lo - 1/hi
    v = closed_form_oracles("outer_band_integral", mu=1.0, q=1.0, lo=0.5, hi=2.0)
    assert v == pytest.approx(1.0 / 0.5 - 1.0 / 2.0)


# ---------------------------------------------------------------------------
# kernel vs approximant
# ---------------------------------------------------------------------------


def test_lemma31_reduced_passes():
    rep = verify_lemma31_approx(
        GAUSS,
        1.0,
        T_list=(0.1, 0.01, 0.001),
        q_list=(0.0, 0.3, 0.95, 1.05),
        xy_grid=np.linspace(0.0, 6.0, 13),
    )
    assert rep.passed
    assert rep.details["temperature_stability_ratio"] < 10.0
    assert rep.details["refine_drift"] < 0.10
    assert rep.details["hs_norm_bound"] > 0.0
    assert rep.c_emp > 0.0


def test_lemma31_validation():
    with pytest.raises(PreconditionError):
        verify_lemma31_approx(GAUSS, mu=-1.0)


# ---------------------------------------------------------------------------
# region integrals
# ---------------------------------------------------------------------------


@pytest.mark.parametrize("dim", [2, 3])
def test_regions_pass(dim):
    rep = verify_region_bounds(1.0, dim)
    assert rep.passed
    assert rep.worst_margin >= 0.0
    assert rep.details["max_refine_drift"] <= 0.01
    sm = 1.0
    for key, a2 in rep.details["a2_values"].items():
        cap = rep.details["cap_high_q"] if float(key) >= sm else rep.details["cap_low_q"]
        assert a2 <= cap
    for a3 in rep.details["a3_values"].values():
        assert math.isfinite(a3) and a3 >= 0.0


def test_regions_validation():
    with pytest.raises(PreconditionError):
        verify_region_bounds(1.0, 1)
    with pytest.raises(PreconditionError):
        verify_region_bounds(-1.0, 2)
    with pytest.raises(PreconditionError):
        verify_region_bounds(1.0, 2, eps=0.3, q_list=(0.1,))  # below eps
    with pytest.raises(PreconditionError):
        verify_region_bounds(1.0, 2, q_list=(5.0,))  # above 4 sqrt(mu)


# ---------------------------------------------------------------------------
# gap of the momentum-maximized criterion
# ---------------------------------------------------------------------------


def test_e_gap_zero_at_maximizer_positive_away():
    params = PhysParams(mu=1.0, temp=1e-3)
    res = sup_over_q("N", params, GAUSS, "symmetric", **FAST)
    at_star = e_gap(1e-3, res.q_star, GAUSS, mu=1.0, **FAST)
    away = e_gap(1e-3, 0.5, GAUSS, mu=1.0, **FAST)
    assert at_star >= -1e-10
    assert abs(at_star) <= 1e-10
    assert away > 0.1


def test_e_gap_requires_nonnegative_interaction():
    with pytest.raises(PreconditionError):
        e_gap(1e-3, 0.5, InteractionModel.gaussian(-1.0, 1.0), mu=1.0, **FAST)


def test_fit_e_gap_constant_reports_growth():
    fit = fit_e_gap_constant(GAUSS, mu=1.0, q=0.5, **FAST)
    assert len(fit["gaps"]) == len(fit["temps"]) == 5
    # gaps grow as T decreases, at a rate set by the top sphere coefficient
    assert all(b > a for a, b in zip(fit["gaps"][:-1], fit["gaps"][1:]))
    assert 0.2 < fit["slope"] < 0.8


# ---------------------------------------------------------------------------
# strong coupling
# ---------------------------------------------------------------------------


def test_strong_coupling_passes():
    rep = verify_strong_coupling()
    assert rep.passed
    hs = list(rep.details["hs_values"].values())
    si = list(rep.details["sup_integral_values"].values())
    assert all(b < a for a, b in zip(hs[:-1], hs[1:]))
    assert all(b < a for a, b in zip(si[:-1], si[1:]))
    assert hs[-1] < 0.25 * hs[0]
    assert si[-1] < 0.25 * si[0]
    assert rep.details["k_majorization_corner_gap"] == 0.0
    assert rep.details["max_abs_f_prime"] < 1.0
    cx = rep.details["quarter_tail_counterexample"]
    assert cx["fails"] and cx["value_at_witness"] > cx["quarter_tail_bound"]


def test_strong_coupling_validation():
    with pytest.raises(PreconditionError):
        verify_strong_coupling(mu_list=(0.1, 0.2))  # not decreasing
    with pytest.raises(PreconditionError):
        verify_strong_coupling(mu_list=(1.5, 0.5))  # outside (0, 1)


# ---------------------------------------------------------------------------
# chain
# ---------------------------------------------------------------------------


def test_chain_wrapper_at_solved_temperature():
    rep = verify_chain(
        1.0, GAUSS, mu=1.0,
        base_nodes=FAST["base_nodes"], octave_nodes=FAST["octave_nodes"],
    )
    assert rep.passed
    assert rep.details["nonneg_fourier"]
    chain = rep.details["chain"]
    assert all(a >= b - 1e-9 for a, b in zip(chain[:-1], chain[1:]))
    assert rep.details["max_abs_over_scale"] <= 1e-4


def test_chain_wrapper_supplied_temperature():
    rep = verify_chain(
        1.0, GAUSS, mu=1.0, temp=0.05,
        base_nodes=FAST["base_nodes"], octave_nodes=FAST["octave_nodes"],
    )
    # away from the critical temperature the ordering must still hold,
    # but the near-zero clause is not asserted for a generic temperature
    chain = rep.details["chain"]
    assert all(a >= b - 1e-9 for a, b in zip(chain[:-1], chain[1:]))


# ---------------------------------------------------------------------------
# report serialization
# ---------------------------------------------------------------------------


def test_reports_serialize_to_json():
    reports = [
        verify_lemma41_integrals(),
        verify_lemma32_bounds(),
        verify_strong_coupling(),
        verify_region_bounds(1.0, 2),
    ]
    for rep in reports:
        assert isinstance(rep, BoundReport)
        payload = json.dumps(rep.as_dict(), sort_keys=True)
        back = json.loads(payload)
        assert back["lemma"] == rep.lemma
        assert isinstance(back["passed"], bool)
