"""Gate figures of merit: combination formulas, closed forms, full pipeline."""

import math

import numpy as np
import pytest

from stationary_gate import eit, fidelity, sagnac
from stationary_gate.ensemble import EnsembleSpec, Regular, Scheme
from stationary_gate.fidelity import (
    FidelityReport,
    PhotonBSpectrum,
    SpectrumShape,
    TBMode,
    analytic_fidelities,
    bandwidth_corrected_f_cj,
    effective_decay_rates,
    evaluate_gate,
    f_cj,
    gate_time_budget,
    misalignment_error,
    optimal_params,
    p_suc,
    phi_out_0,
    phi_out_1,
    pi_pulse_fidelity_factor,
    r1_site_vector,
    r11_spin_average,
    spectrum_nodes,
)
from stationary_gate.numerics import DEFAULT_SETTINGS


def lambda_spec(n_atoms: int, delta_c: float = -10.0, omega0: float = 10.0) -> EnsembleSpec:
    return EnsembleSpec(n_atoms=n_atoms, scheme=Scheme.LAMBDA, gamma_1d=0.05,
                        omega0=omega0, delta_c=delta_c)


# --- photon-B spectrum -------------------------------------------------------


def test_spectrum_validation():
    PhotonBSpectrum(center=0.1)
    with pytest.raises(ValueError):
        PhotonBSpectrum(center=0.1, shape=SpectrumShape.GAUSSIAN)
    with pytest.raises(ValueError):
        PhotonBSpectrum(center=0.1, sigma_b=-1.0)


def test_spectrum_nodes_dirac():
    nodes, weights = spectrum_nodes(PhotonBSpectrum(center=0.25))
    assert np.array_equal(nodes, [0.25])
    assert np.array_equal(weights, [1.0])


def test_spectrum_nodes_gaussian():
    spectrum = PhotonBSpectrum(center=0.2, sigma_b=0.01, shape=SpectrumShape.GAUSSIAN)
    nodes, weights = spectrum_nodes(spectrum)
    assert nodes.size == DEFAULT_SETTINGS.quadrature_nodes
    assert nodes[0] == pytest.approx(0.2 - 0.05)
    assert nodes[-1] == pytest.approx(0.2 + 0.05)
    assert weights.sum() == pytest.approx(1.0)
    assert np.allclose(weights, weights[::-1])
    assert weights.max() == pytest.approx(weights[nodes.size // 2 - 1])


# --- combination formulas ----------------------------------------------------


def test_f_cj_hand_formula():
    eta, t_b, r0, r11 = 0.9, 1.0, 0.5 - 0.1j, -0.6 + 0.2j
    assert f_cj(eta, t_b, r0, r11) == pytest.approx(
        eta / 16.0 * abs(2.0 * t_b + r0 - r11) ** 2
    )
    # perfect ingredients give unit fidelity
    assert f_cj(1.0, 1.0, 1.0, -1.0) == pytest.approx(1.0)


def test_p_suc_hand_formula():
    assert p_suc(0.8, 1.0, 0.3, 0.4) == pytest.approx(0.8 / 4.0 * (2.0 + 0.3 + 0.4))
    assert p_suc(1.0, 1.0, 1.0, 1.0) == pytest.approx(1.0)


def test_r11_spin_average():
    spin = eit.SpinWave(np.array([1.0, 1.0, 0.0, 0.0], dtype=complex))
    r1 = np.array([0.5, -0.5, 3.0, 3.0])
    assert r11_spin_average(spin, r1) == pytest.approx(0.0)
    spin2 = eit.SpinWave(np.array([2.0, 0.0, 0.0, 1.0], dtype=complex))
    assert r11_spin_average(spin2, r1) == pytest.approx((4 * 0.5 + 1 * 3.0) / 5.0)


# --- closed forms ------------------------------------------------------------


def test_analytic_fidelities_frozen_values():
    f, f_cond = analytic_fidelities(10_000, 0.05)
    assert f == pytest.approx(0.40309739581793935, rel=1e-12)
    assert f_cond == pytest.approx(0.9109268202801686, rel=1e-12)
    f2, f2_cond = analytic_fidelities(10_000, 0.05, TBMode.MATCH_R0)
    assert f2 == pytest.approx(-0.1938052083641213, rel=1e-12)
    assert f2_cond == pytest.approx(0.9918996102172717, rel=1e-12)
    with pytest.raises(ValueError):
        analytic_fidelities(10_000, 0.05, "matched")


def test_analytic_fidelities_scaling():
    # leading errors scale as 1/sqrt(N) and 1/N respectively
    f_small, fc_small = analytic_fidelities(10_000, 0.05)
    f_large, fc_large = analytic_fidelities(40_000, 0.05)
    assert (1.0 - f_large) == pytest.approx(0.5 * (1.0 - f_small))
    assert (1.0 - fc_large) == pytest.approx(0.25 * (1.0 - fc_small))


def test_optimal_params_frozen_values():
    delta_c, sigma = optimal_params(10_000, 0.05)
    assert delta_c == pytest.approx(-9.973557010035819, rel=1e-12)
    assert sigma == pytest.approx(0.13230263588946706, rel=1e-12)


def test_bandwidth_penalty_is_quadratic():
    base = bandwidth_corrected_f_cj(10_000, 0.05, 10.0, 0.0)
    drop1 = base - bandwidth_corrected_f_cj(10_000, 0.05, 10.0, 0.01)
    drop2 = base - bandwidth_corrected_f_cj(10_000, 0.05, 10.0, 0.02)
    assert drop2 == pytest.approx(4.0 * drop1, rel=1e-9)
    expected = 0.05**2 * 10_000**3 * 0.01**2 / (16.0 * math.pi**2 * 10.0**4)
    assert drop1 == pytest.approx(expected, rel=1e-12)


def test_gate_time_budget_frozen_values():
    budget = gate_time_budget(10_000, 0.05, 10.0, hfs_splitting=1000.0)
    assert budget.t_eit_pass == pytest.approx(2.5)
    assert budget.t_eit_round_trip == pytest.approx(5.0)
    assert budget.t_pi == pytest.approx(0.10026513098523999, rel=1e-12)
    assert budget.t_scatter == pytest.approx(51.500139270059123, rel=1e-12)
    assert budget.loss_hfs == pytest.approx(0.0048925132306556155, rel=1e-12)
    assert gate_time_budget(10_000, 0.05, 10.0).loss_hfs is None


def test_pump_scatter_time_exceeds_gate_time():
    # the pump-scattering window must comfortably contain the slow-light
    # round trip for the gate to make sense at the design point
    budget = gate_time_budget(10_000, 0.05, 10.0)
    assert budget.t_scatter > 10.0 * budget.t_eit_round_trip


def test_effective_decay_rates_hand_values():
    r1, r2 = effective_decay_rates(10.0, 1000.0, 0.95, 0.05)
    assert r1 == pytest.approx(0.95 * 100.0 / (1000.0**2 + 0.25), rel=1e-12)
    assert r2 == pytest.approx(0.05 * 100.0 / (1000.0**2 + 0.25), rel=1e-12)


def test_pi_pulse_factor():
    assert pi_pulse_fidelity_factor(0.0) == 1.0
    assert pi_pulse_fidelity_factor(0.25 * math.pi) == pytest.approx(0.25)
    assert pi_pulse_fidelity_factor(-0.1) == pi_pulse_fidelity_factor(0.1)
    with pytest.raises(ValueError):
        pi_pulse_fidelity_factor(0.5 * math.pi)


def test_misalignment_error_pure_quadratic():
    args = (10_000, 0.05, 0.13, 0.005)
    f0 = misalignment_error(*args, k0_l1=0.0)
    drops = [(misalignment_error(*args, k0_l1=l) - f0) / l**2 for l in (0.02, 0.05)]
    assert drops[0] == pytest.approx(drops[1], rel=1e-9)
    assert drops[0] < 0.0


# --- per-site reflection vector -----------------------------------------------


def test_r1_site_vector_standing_wave_layout():
    spec = lambda_spec(16)
    geom = sagnac.balanced_geometry(spec)
    vec = r1_site_vector(spec, geom, 0.2)
    assert vec.shape == (32,)
    # both atoms of a unit cell share one value; both spin-wave halves match
    assert np.array_equal(vec[0::2], vec[1::2])
    assert np.array_equal(vec[:16], vec[16:])


def test_r1_site_vector_dual_v_layout():
    spec = EnsembleSpec(n_atoms=10, scheme=Scheme.DUAL_V, gamma_1d=0.1, omega0=1.0,
                        delta_c=-5.0, placement=Regular(spacing=0.266))
    vec = r1_site_vector(spec, sagnac.balanced_geometry(spec), 0.2)
    assert vec.shape == (20,)
    assert np.array_equal(vec[:10], vec[10:])


# --- round-trip helpers ---------------------------------------------------------


def test_round_trip_rejects_unknown_model_and_bad_shape():
    spec = lambda_spec(40)
    params = eit.eit_params(40, 0.05, 10.0, 0.1)
    packet = eit.gaussian_input(params)
    with pytest.raises(ValueError):
        phi_out_0(packet, spec, params, model="magic")
    with pytest.raises(ValueError):
        phi_out_1(packet, spec, params, np.ones(7))


def test_phi_out_1_scales_with_uniform_reflection():
    spec = lambda_spec(40)
    params = eit.eit_params(40, 0.05, 10.0, 0.1)
    packet = eit.gaussian_input(params)
    base = phi_out_0(packet, spec, params)
    half = phi_out_1(packet, spec, params, np.full(80, 0.5 + 0.0j))
    assert np.allclose(half.amplitudes, 0.5 * base.amplitudes)


# --- full pipeline ----------------------------------------------------------------


def test_evaluate_gate_frozen_point():
    delta_c, sigma = optimal_params(10_000, 0.05)
    report = evaluate_gate(lambda_spec(10_000, delta_c=delta_c), sigma)
    assert report.delta_res == pytest.approx(0.15696796093438387, rel=1e-9)
    assert report.f_cj == pytest.approx(0.54340234045771629, rel=1e-9)
    assert report.p_suc == pytest.approx(0.60206224991152812, rel=1e-9)
    assert report.f_cj_cond == pytest.approx(0.9025683648784959, rel=1e-9)
    assert report.eta_eit == pytest.approx(0.9469359058726963, rel=1e-9)


def test_evaluate_gate_report_consistency():
    spec = lambda_spec(1000)
    report = evaluate_gate(spec, 0.15, delta_res=0.5)
    assert isinstance(report, FidelityReport)
    assert report.f_cj_cond == pytest.approx(report.f_cj / report.p_suc, rel=1e-12)
    assert 0.0 < report.eta_eit < 1.0
    assert report.t_b == 1.0
    assert report.sigma_tilde == 0.15
    assert report.delta_res == 0.5
    assert report.spectrum.center == 0.5
    assert report.model == "kernel"


def test_evaluate_gate_bypass_modes():
    spec = lambda_spec(1000)
    matched = evaluate_gate(spec, 0.15, t_b=TBMode.MATCH_R0, delta_res=0.5)
    assert matched.t_b == pytest.approx(float(np.real(matched.r0)))
    custom = evaluate_gate(spec, 0.15, t_b=0.7, delta_res=0.5)
    assert custom.t_b == 0.7


def test_evaluate_gate_pi_pulse_cancels_in_conditional():
    spec = lambda_spec(1000)
    clean = evaluate_gate(spec, 0.15, delta_res=0.5)
    tilted = evaluate_gate(spec, 0.15, delta_res=0.5, pi_pulse_varphi=0.3)
    factor = math.cos(0.3) ** 4
    assert tilted.f_cj == pytest.approx(factor * clean.f_cj, rel=1e-12)
    assert tilted.p_suc == pytest.approx(factor * clean.p_suc, rel=1e-12)
    assert tilted.f_cj_cond == pytest.approx(clean.f_cj_cond, rel=1e-12)


def test_evaluate_gate_narrow_spectrum_matches_dirac():
    spec = lambda_spec(1000)
    dirac = evaluate_gate(spec, 0.15, delta_res=0.5)
    narrow = evaluate_gate(
        spec, 0.15, delta_res=0.5,
        spectrum=PhotonBSpectrum(center=0.5, sigma_b=1e-5, shape=SpectrumShape.GAUSSIAN),
    )
    assert narrow.f_cj == pytest.approx(dirac.f_cj, rel=1e-4)
    assert narrow.p_suc == pytest.approx(dirac.p_suc, rel=1e-4)


def test_evaluate_gate_finite_bandwidth_degrades_fidelity():
    # centered on the transmission peak, a wider photon-B spectrum can only
    # wash out the conditional phase and lower the fidelity
    from stationary_gate.ensemble import find_resonance

    spec = lambda_spec(1000)
    dres = find_resonance(spec)
    values = [evaluate_gate(spec, 0.15, delta_res=dres).f_cj]
    for sigma_b in (0.05, 0.2, 0.5):
        pulse = PhotonBSpectrum(center=dres, sigma_b=sigma_b, shape=SpectrumShape.GAUSSIAN)
        values.append(evaluate_gate(spec, 0.15, delta_res=dres, spectrum=pulse).f_cj)
    assert all(a > b for a, b in zip(values, values[1:]))
