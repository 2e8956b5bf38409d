"""Gate figures of merit assembled from storage round trips and reflections.

The controlled-phase gate stores photon A as a spin wave, reflects photon
B off the loaded ensemble inside the Sagnac loop, and retrieves photon A.
Its quality is summarized by the Choi-Jamiolkowski fidelity F_cj, the
success probability P_suc, and their ratio, the conditional fidelity.

Inputs to the combination formulas:
 - eta_eit: round-trip storage/retrieval efficiency of photon A,
 - R0: loop reflection of photon B without a stored excitation,
 - R11: overlap of the retrieved packets with and without photon B,
   normalized by eta_eit,
 - R12: norm of the retrieved packet with photon B, normalized the same
   way,
 - t_b: amplitude of the bypass path photon B takes when photon A is
   absent (either exactly one, or matched to the computed R0).

Everything here is narrow-band in photon A and optionally averaged over a
finite spectrum for photon B.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from . import eit, sagnac
from .ensemble import EnsembleSpec, Scheme, find_resonance
from .numerics import DEFAULT_SETTINGS, NumericSettings, trapezoid


class TBMode(enum.Enum):
    """How the bypass amplitude t_b is chosen."""

    ONE = "one"
    MATCH_R0 = "match_r0"


class SpectrumShape(enum.Enum):
    GAUSSIAN = "gaussian"
    DIRAC = "dirac"


@dataclass(frozen=True)
class PhotonBSpectrum:
    """Spectral density of photon B around a center detuning."""

    center: float
    sigma_b: float = 0.0
    shape: SpectrumShape = SpectrumShape.DIRAC

    def __post_init__(self):
        if self.shape is SpectrumShape.GAUSSIAN and self.sigma_b <= 0:
            raise ValueError("a Gaussian spectrum needs a positive width")
        if self.sigma_b < 0:
            raise ValueError("spectral width cannot be negative")


def spectrum_nodes(
    spectrum: PhotonBSpectrum, settings: NumericSettings = DEFAULT_SETTINGS
) -> tuple[np.ndarray, np.ndarray]:
    """Detuning nodes and unit-sum weights for spectral averages."""
    if spectrum.shape is SpectrumShape.DIRAC:
        return np.array([spectrum.center]), np.array([1.0])
    half = settings.quadrature_half_width * spectrum.sigma_b
    nodes = spectrum.center + np.linspace(-half, half, settings.quadrature_nodes)
    weights = np.exp(-((nodes - spectrum.center) ** 2) / (2.0 * spectrum.sigma_b**2))
    return nodes, weights / weights.sum()


@dataclass(frozen=True)
class FidelityReport:
    """One evaluated gate operating point."""

    f_cj: float
    p_suc: float
    f_cj_cond: float
    eta_eit: float
    delta_res: float
    r0: complex
    r0_avg: complex
    r0_abs2_avg: float
    r11: complex
    r12: float
    t_b: float
    sigma_tilde: float
    spec: EnsembleSpec
    geometry: sagnac.SagnacGeometry
    spectrum: PhotonBSpectrum
    model: str
    two_sided: bool
    pi_pulse_varphi: float


def f_cj(eta_eit: float, t_b: float, r0_avg: complex, r11: complex) -> float:
    """Gate fidelity from the combination amplitudes."""
    return eta_eit / 16.0 * abs(2.0 * t_b + r0_avg - r11) ** 2


def p_suc(eta_eit: float, t_b: float, r0_abs2_avg: float, r12: float) -> float:
    """Probability that both photons survive the gate."""
    return eta_eit / 4.0 * (2.0 * abs(t_b) ** 2 + r0_abs2_avg + r12)


def r1_site_vector(
    spec: EnsembleSpec,
    geom: sagnac.SagnacGeometry,
    delta: float,
    settings: NumericSettings = DEFAULT_SETTINGS,
) -> np.ndarray:
    """Per-sample loop reflection for a stored excitation, 2N layout.

    For the standing-wave scheme both atoms of a unit cell share the cell
    value; the second half of the vector repeats the first (the backward
    spin-wave component sees the same per-site reflections).
    """
    if spec.scheme is Scheme.LAMBDA:
        sites = np.arange(spec.n_atoms // 2)
    else:
        sites = np.arange(spec.n_atoms)
    _, per_site = sagnac.gate_reflections(spec, geom, delta, sites, settings)
    if spec.scheme is Scheme.LAMBDA:
        per_site = np.repeat(per_site, 2)
    return np.concatenate([per_site, per_site])


def phi_out_0(
    packet: eit.WavePacket,
    spec: EnsembleSpec,
    params: eit.EitParams,
    model: str = "kernel",
    two_sided: bool = True,
    settings: NumericSettings = DEFAULT_SETTINGS,
) -> eit.WavePacket:
    """Round trip of photon A with no photon B present."""
    return _round_trip(packet, spec, params, None, model, two_sided, settings)


def phi_out_1(
    packet: eit.WavePacket,
    spec: EnsembleSpec,
    params: eit.EitParams,
    r1_per_site: np.ndarray,
    model: str = "kernel",
    two_sided: bool = True,
    settings: NumericSettings = DEFAULT_SETTINGS,
) -> eit.WavePacket:
    """Round trip of photon A with photon B reflected off each site."""
    return _round_trip(packet, spec, params, r1_per_site, model, two_sided, settings)


def _round_trip(packet, spec, params, r1_per_site, model, two_sided, settings):
    if model not in ("kernel", "discrete"):
        raise ValueError(f"unknown storage model {model!r}")
    if model == "kernel":
        spin = eit.store_kernel_model(packet, params, two_sided, settings)
    else:
        spin = eit.store_discrete(packet, spec, two_sided, settings)
    if r1_per_site is not None:
        r1_per_site = np.asarray(r1_per_site)
        if r1_per_site.shape != spin.amplitudes.shape:
            raise ValueError("per-site reflection vector must have 2N entries")
        spin = eit.SpinWave(spin.amplitudes * r1_per_site, two_sided=spin.two_sided)
    if model == "kernel":
        return eit.retrieve_kernel_model(spin, params, settings)
    return eit.retrieve_discrete(spin, spec, settings)


def r11_spin_average(spin: eit.SpinWave, r1_per_site: np.ndarray) -> complex:
    """Cheap estimate of R11: spin-wave-weighted mean site reflection."""
    weights = np.abs(spin.amplitudes) ** 2
    return complex(np.sum(weights * np.asarray(r1_per_site)) / np.sum(weights))


def evaluate_gate(
    spec: EnsembleSpec,
    sigma_tilde: float,
    t_b: TBMode | float = TBMode.ONE,
    geometry: sagnac.SagnacGeometry | None = None,
    spectrum: PhotonBSpectrum | None = None,
    model: str = "kernel",
    two_sided: bool = True,
    pi_pulse_varphi: float = 0.0,
    delta_res: float | None = None,
    settings: NumericSettings = DEFAULT_SETTINGS,
) -> FidelityReport:
    """Run the full gate pipeline at one parameter point."""
    if geometry is None:
        geometry = sagnac.balanced_geometry(spec)
    if delta_res is None:
        delta_res = find_resonance(spec, settings)
    if spectrum is None:
        spectrum = PhotonBSpectrum(center=delta_res)
    params = eit.eit_params(spec.n_atoms, spec.gamma_1d, spec.omega0, sigma_tilde)
    packet = eit.gaussian_input(params, settings)
    nodes, weights = spectrum_nodes(spectrum, settings)

    r0_center, _ = sagnac.gate_reflections(spec, geometry, spectrum.center, None, settings)
    r0_nodes = np.array(
        [sagnac.gate_reflections(spec, geometry, d, None, settings)[0] for d in nodes]
    )
    r0_avg = complex(np.sum(weights * r0_nodes))
    r0_abs2_avg = float(np.sum(weights * np.abs(r0_nodes) ** 2))

    if isinstance(t_b, TBMode):
        t_b_value = 1.0 if t_b is TBMode.ONE else float(np.real(r0_center))
    else:
        t_b_value = float(t_b)

    r1_vectors = [r1_site_vector(spec, geometry, d, settings) for d in nodes]

    if model == "kernel":
        spin = eit.store_kernel_model(packet, params, two_sided, settings)
        times = eit.retrieval_times(params, settings)
        matrix = eit.retrieval_matrix(params, times, settings)
        n = params.n_atoms
        scale = 1.0 / math.sqrt(2.0) if two_sided else 1.0

        def retrieve(amplitudes: np.ndarray) -> np.ndarray:
            out = matrix @ amplitudes[:n]
            if two_sided:
                out = (out + matrix @ amplitudes[n:]) * scale
            return out

        phi0 = retrieve(spin.amplitudes)
        phi1 = [retrieve(spin.amplitudes * r1) for r1 in r1_vectors]
    else:
        out0 = phi_out_0(packet, spec, params, model, two_sided, settings)
        times = out0.times
        phi0 = out0.amplitudes
        phi1 = [
            phi_out_1(packet, spec, params, r1, model, two_sided, settings).amplitudes
            for r1 in r1_vectors
        ]

    eta = float(trapezoid(np.abs(phi0) ** 2, times))
    overlaps = np.array([trapezoid(np.conj(phi0) * p, times) for p in phi1])
    norms = np.array([trapezoid(np.abs(p) ** 2, times) for p in phi1])
    r11 = complex(np.sum(weights * overlaps) / eta)
    r12 = float(np.sum(weights * norms) / eta)

    factor = pi_pulse_fidelity_factor(pi_pulse_varphi)
    f = f_cj(eta, t_b_value, r0_avg, r11) * factor
    p = p_suc(eta, t_b_value, r0_abs2_avg, r12) * factor
    return FidelityReport(
        f_cj=f,
        p_suc=p,
        f_cj_cond=f / p,
        eta_eit=eta,
        delta_res=delta_res,
        r0=r0_center,
        r0_avg=r0_avg,
        r0_abs2_avg=r0_abs2_avg,
        r11=r11,
        r12=r12,
        t_b=t_b_value,
        sigma_tilde=sigma_tilde,
        spec=spec,
        geometry=geometry,
        spectrum=spectrum,
        model=model,
        two_sided=two_sided,
        pi_pulse_varphi=pi_pulse_varphi,
    )


def analytic_fidelities(
    n_atoms: int, gamma_1d: float, t_b_mode: TBMode = TBMode.ONE
) -> tuple[float, float]:
    """Large-ensemble closed forms for (F_cj, F_cj_cond)."""
    gp = 1.0 - gamma_1d
    root_n = math.sqrt(n_atoms)
    if t_b_mode is TBMode.ONE:
        f = 1.0 - math.pi * gp / (gamma_1d * root_n)
        f_cond = 1.0 - math.pi**2 * gp**2 / (4.0 * gamma_1d**2 * n_atoms)
    elif t_b_mode is TBMode.MATCH_R0:
        f = 1.0 - 2.0 * math.pi * gp / (gamma_1d * root_n)
        f_cond = 1.0 - 11.0 * math.pi**3 * (gamma_1d + gp) * gp / (
            16.0 * gamma_1d**2 * n_atoms**1.5
        )
    else:
        raise ValueError(f"unknown bypass mode {t_b_mode!r}")
    return f, f_cond


def optimal_params(n_atoms: int, gamma_1d: float) -> tuple[float, float]:
    """Control detuning and stored width that balance the error budget."""
    gp = 1.0 - gamma_1d
    delta_c = -gamma_1d * n_atoms**0.75 / math.sqrt(8.0 * math.pi)
    sigma_tilde = math.sqrt(
        math.pi**-1.5 * n_atoms**-0.25 * math.sqrt(gp / (gamma_1d + gp))
    )
    return delta_c, sigma_tilde


def bandwidth_corrected_f_cj(
    n_atoms: int, gamma_1d: float, omega0: float, sigma_b: float
) -> float:
    """Unconditional fidelity including the photon-B bandwidth penalty."""
    gp = 1.0 - gamma_1d
    base = (
        1.0
        - math.pi * gp / (gamma_1d * math.sqrt(n_atoms))
        - math.pi**1.5 * math.sqrt((gamma_1d + gp) * gp) / (gamma_1d * n_atoms**0.75)
    )
    penalty = gamma_1d**2 * n_atoms**3 * sigma_b**2 / (16.0 * math.pi**2 * omega0**4)
    return base - penalty


@dataclass(frozen=True)
class GateTimeBudget:
    """Characteristic times (inverse linewidths) and the pump-scatter loss."""

    t_eit_pass: float
    t_eit_round_trip: float
    t_pi: float
    t_scatter: float
    loss_hfs: float | None


def gate_time_budget(
    n_atoms: int, gamma_1d: float, omega0: float, hfs_splitting: float | None = None
) -> GateTimeBudget:
    """Time scales of one gate: slow-light transit, flip pulse, scattering."""
    gp = 1.0 - gamma_1d
    t_eit = n_atoms * gamma_1d / (2.0 * omega0**2)
    delta_c, _ = optimal_params(n_atoms, gamma_1d)
    t_scatter = gamma_1d**1.5 * n_atoms**1.75 / (
        4.0 * math.pi**1.5 * math.sqrt(gp) * omega0**2
    )
    loss = None
    if hfs_splitting is not None:
        loss = (
            gamma_1d**1.5
            * math.sqrt(gp)
            * n_atoms**1.75
            / (4.0 * math.pi**1.5 * hfs_splitting**2)
        )
    return GateTimeBudget(
        t_eit_pass=t_eit,
        t_eit_round_trip=2.0 * t_eit,
        t_pi=1.0 / abs(delta_c),
        t_scatter=t_scatter,
        loss_hfs=loss,
    )


def effective_decay_rates(
    omega0: float, delta_hfs: float, gamma1: float, gamma2: float
) -> tuple[float, float]:
    """Residual decay of the two storage states under the strong pump."""
    gp = gamma1 + gamma2
    denom = delta_hfs**2 + 0.25 * gp**2
    return gamma1 * omega0**2 / denom, gamma2 * omega0**2 / denom


def pi_pulse_fidelity_factor(varphi: float) -> float:
    """Common reduction of F_cj and P_suc from an imperfect flip pulse."""
    if abs(varphi) >= 0.5 * math.pi:
        raise ValueError("flip-pulse error angle must satisfy |varphi| < pi/2")
    return math.cos(varphi) ** 4


def misalignment_error(
    n_atoms: int, gamma_1d: float, sigma_tilde: float, eps_b: float, k0_l1: float
) -> float:
    """Truncated fidelity expansion with an arm-length phase mismatch.

    Evaluated at the balancing control detuning; eps_b is the bypass-path
    loss probability of photon B.  Returns the approximate unconditional
    fidelity including the quadratic mismatch penalty.
    """
    gp = 1.0 - gamma_1d
    root_n = math.sqrt(n_atoms)
    aligned = (
        1.0
        - eps_b
        - math.pi * gp / (gamma_1d * root_n)
        - math.pi**3 * (gamma_1d + gp) * sigma_tilde**2 / (2.0 * gamma_1d * root_n)
        - gp / (2.0 * n_atoms * gamma_1d * sigma_tilde**2)
    )
    curvature = (
        -0.5
        + 0.375 * eps_b
        + 5.0 * math.pi * gp / (8.0 * gamma_1d * root_n)
        + math.pi**3 * (7.0 * gamma_1d + 5.0 * gp) * sigma_tilde**2 / (16.0 * gamma_1d * root_n)
    )
    return aligned + curvature * k0_l1**2
