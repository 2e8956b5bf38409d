"""Loop geometry, combined reflection coefficient, and mirror-symmetry helpers."""

import math

import numpy as np
import pytest

from stationary_gate.ensemble import EnsembleSpec, ScatterResult, Scheme, ensemble_length_phase
from stationary_gate.sagnac import (
    SagnacGeometry,
    balanced_geometry,
    gate_reflections,
    reflection_from_coeffs,
    sagnac_matrix,
    symmetrize_site_values,
    symmetrized_r1,
)

TAU = 2.0 * math.pi

FIG2 = dict(n_atoms=10_000, scheme=Scheme.LAMBDA, gamma_1d=0.05,
            omega0=10.0, delta_c=-10.0)
FIG2_DELTA_RES = 0.1573942806264941


# --- geometry ------------------------------------------------------------


def test_geometry_reduces_phases_mod_tau():
    geom = SagnacGeometry(k0_l1=7.0 * math.pi, k0_l2=-0.5, d_extra_phase=4.0 * math.pi)
    assert geom.k0_l1 == pytest.approx(math.pi)
    assert geom.k0_l2 == pytest.approx(TAU - 0.5)
    assert geom.d_extra_phase == pytest.approx(0.0, abs=1e-12)


def test_balanced_geometry_round_trip_sums_to_pi():
    spec = EnsembleSpec(**FIG2)
    for l1, l2 in [(0.0, 0.0), (0.3, 1.7), (5.0, 0.01)]:
        geom = balanced_geometry(spec, k0_l1=l1, k0_l2=l2)
        total = ensemble_length_phase(spec) + l1 + l2 + geom.d_extra_phase
        assert total % TAU == pytest.approx(math.pi, abs=1e-9)


def test_balanced_geometry_value_for_half_wavelength_array():
    # 10000 atoms at half-wavelength spacing: array length is a whole number
    # of wavelengths, so the compensation phase is pi itself.
    geom = balanced_geometry(EnsembleSpec(**FIG2))
    assert geom.k0_l1 == 0.0
    assert geom.k0_l2 == 0.0
    assert geom.d_extra_phase == pytest.approx(3.141592653589754, abs=1e-12)


# --- combined reflection --------------------------------------------------


def test_reflection_hand_formula_trivial_geometry():
    geom = SagnacGeometry()
    rng = np.random.default_rng(3)
    for _ in range(20):
        r_p, t_p, r_m, t_m = rng.standard_normal(4) + 1j * rng.standard_normal(4)
        expected = -0.5 * (r_p - (t_p + t_m) + r_m)
        got = reflection_from_coeffs(r_p, t_p, r_m, t_m, geom)
        assert got == pytest.approx(expected, abs=1e-14)


def test_reflection_ideal_limits_in_balanced_geometry():
    geom = balanced_geometry(EnsembleSpec(**FIG2))
    # full transmission with a sign flip leaves the loop transparent
    assert reflection_from_coeffs(0.0, -1.0, 0.0, -1.0, geom) == pytest.approx(1.0, abs=1e-12)
    # a perfect mirror in the loop flips the sign of the reflected photon
    assert reflection_from_coeffs(1.0, 0.0, 1.0, 0.0, geom) == pytest.approx(-1.0, abs=1e-12)


def test_reflection_broadcasts_over_arrays():
    geom = SagnacGeometry(k0_l1=0.4, k0_l2=1.2, d_extra_phase=2.5)
    rng = np.random.default_rng(5)
    r_p, t_p, r_m, t_m = rng.standard_normal((4, 7)) + 1j * rng.standard_normal((4, 7))
    vec = reflection_from_coeffs(r_p, t_p, r_m, t_m, geom)
    assert vec.shape == (7,)
    for i in range(7):
        one = reflection_from_coeffs(r_p[i], t_p[i], r_m[i], t_m[i], geom)
        assert vec[i] == pytest.approx(one, abs=1e-14)


def test_matrix_reflection_port_consistency():
    rng = np.random.default_rng(9)
    for _ in range(10):
        r_p, t_p, r_m, t_m = rng.standard_normal(4) + 1j * rng.standard_normal(4)
        scatter = ScatterResult(delta=0.0, r_plus=r_p, t_plus=t_p, r_minus=r_m, t_minus=t_m)
        geom = SagnacGeometry(*rng.uniform(0.0, TAU, 3))
        matrix = sagnac_matrix(scatter, geom)
        direct = reflection_from_coeffs(r_p, t_p, r_m, t_m, geom)
        assert direct == pytest.approx(-matrix[1, 1], abs=1e-12)


def test_matrix_is_unitary_for_lossless_coefficients():
    # gamma_prime = 0 array: scattering is lossless, so the loop matrix is unitary
    spec = EnsembleSpec(**{**FIG2, "n_atoms": 64, "gamma_1d": 1.0})
    from stationary_gate.ensemble import spectrum

    one = spectrum(spec, np.array([0.21]))[0]
    matrix = sagnac_matrix(one, balanced_geometry(spec))
    assert np.linalg.norm(matrix.conj().T @ matrix - np.eye(2)) < 1e-9


# --- gate reflections on the reference array -------------------------------


def test_gate_reflections_frozen_values():
    spec = EnsembleSpec(**FIG2)
    geom = balanced_geometry(spec)
    r0, r1 = gate_reflections(spec, geom, FIG2_DELTA_RES, stored_sites=[2500])
    assert r0 == pytest.approx(0.5260489737878741 - 0.04229872297221257j, abs=1e-12)
    assert r1[0] == pytest.approx(-0.5744395025788969 - 0.017431320140364283j, abs=1e-12)


def test_gate_reflections_without_stored_sites():
    spec = EnsembleSpec(**{**FIG2, "n_atoms": 500})
    r0, r1 = gate_reflections(spec, balanced_geometry(spec), 0.5)
    assert isinstance(r0, complex)
    assert r1 is None


def test_gate_reflections_site_array_alignment():
    spec = EnsembleSpec(**{**FIG2, "n_atoms": 400})
    geom = balanced_geometry(spec)
    sites = [10, 100, 150]
    _, r1 = gate_reflections(spec, geom, 0.3, stored_sites=sites)
    assert r1.shape == (3,)
    _, single = gate_reflections(spec, geom, 0.3, stored_sites=[100])
    assert r1[1] == pytest.approx(single[0], abs=1e-14)


# --- mirror symmetrization --------------------------------------------------


def test_symmetrized_r1_averages_mirror_positions():
    assert symmetrized_r1(lambda z: z, 0.2) == pytest.approx(0.5)
    assert symmetrized_r1(lambda z: z * z, 0.25) == pytest.approx(0.5 * (0.0625 + 0.5625))


def test_symmetrize_site_values():
    out = symmetrize_site_values([1.0, 2.0, 4.0, 8.0])
    assert np.allclose(out, [4.5, 3.0, 3.0, 4.5])
    even = symmetrize_site_values(out)
    assert np.allclose(even, out)
