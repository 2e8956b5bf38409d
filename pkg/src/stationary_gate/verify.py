"""Built-in cross-check battery: analytic pins, model agreement, invariants.

Each check compares an independently derived expectation with the numeric
pipeline and reports a measured deviation.  Checks that compare the
numeric scattering coefficients against the truncated large-ensemble
closed forms are expected to be tight only asymptotically; they report
honest deviations rather than tuned thresholds.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, replace

import numpy as np

from . import eit, fidelity, optimize, sagnac, tmatrix
from .ensemble import (
    EnsembleSpec,
    Regular,
    Scheme,
    analytic_coeffs,
    find_resonance,
    resonance_seed,
    resonance_width,
    spectrum,
)
from .numerics import DEFAULT_SETTINGS


@dataclass(frozen=True)
class CheckResult:
    criterion: int
    name: str
    passed: bool
    detail: str
    seconds: float


def _fig2_spec(n_atoms: int = 10_000, omega0: float = 10.0, delta_c: float = -10.0,
               stored_site: int | None = None) -> EnsembleSpec:
    return EnsembleSpec(
        n_atoms=n_atoms, scheme=Scheme.LAMBDA, gamma_1d=0.05,
        omega0=omega0, delta_c=delta_c, stored_site=stored_site,
    )


def criterion_01_resonance(tolerance_scale: float = 1.0) -> tuple[bool, str]:
    """Numeric transparency-window resonance near the analytic seed."""
    target = 0.1579
    found = find_resonance(_fig2_spec())
    rel = abs(found - target) / target
    return rel <= 0.10 * tolerance_scale, (
        f"delta_res={found:.6f}, seed value {target}, deviation {rel:.2%} (limit 10%)"
    )


def criterion_02_scattering_asymptotics(tolerance_scale: float = 1.0) -> tuple[bool, str]:
    """Numeric r0 and |r1(center)| against the truncated closed forms."""
    gamma_1d = 0.05
    parts = []
    ok = True
    for n_atoms, limit in ((10_000, 0.10), (100_000, 0.05)):
        delta_c, _ = fidelity.optimal_params(n_atoms, gamma_1d)
        spec = _fig2_spec(n_atoms=n_atoms, delta_c=delta_c)
        delta_res = find_resonance(spec)
        r0_num = spectrum(spec, np.array([delta_res]))[0].r_plus
        r0_ref = analytic_coeffs(spec).r0
        rel = abs(r0_num - r0_ref) / abs(r0_ref)
        ok &= rel <= limit * tolerance_scale
        parts.append(f"r0 N={n_atoms:.0e}: dev {rel:.2%} (limit {limit:.0%})")
    n_atoms, limit = 10_000, 0.10
    delta_c, _ = fidelity.optimal_params(n_atoms, gamma_1d)
    site = (n_atoms // 2) // 2
    spec = _fig2_spec(n_atoms=n_atoms, delta_c=delta_c, stored_site=site)
    delta_res = find_resonance(spec)
    r1_num = spectrum(spec, np.array([delta_res]))[0].r_plus
    r1_ref = analytic_coeffs(_fig2_spec(n_atoms=n_atoms, delta_c=delta_c), z_tilde=0.5).r1
    rel = abs(abs(r1_num) - abs(r1_ref)) / abs(r1_ref)
    ok &= rel <= limit * tolerance_scale
    parts.append(f"|r1(1/2)| N={n_atoms:.0e}: dev {rel:.2%} (limit {limit:.0%})")
    return bool(ok), "; ".join(parts)


def criterion_03_width(tolerance_scale: float = 1.0) -> tuple[bool, str]:
    """Curvature-based resonance width against the closed form."""
    spec = _fig2_spec()
    analytic = resonance_width(spec, method="analytic")
    numeric = resonance_width(spec, method="numeric")
    rel = abs(numeric - analytic) / analytic
    return rel <= 0.20 * tolerance_scale, (
        f"width numeric={numeric:.5f}, analytic={analytic:.5f}, "
        f"deviation {rel:.1%} (limit 20%)"
    )


def criterion_04_cell_power(tolerance_scale: float = 1.0) -> tuple[bool, str]:
    """Closed-form unit-cell powers against repeated multiplication."""
    rng = np.random.default_rng(20240817)
    worst = 0.0
    cells = 0
    while cells < 100:
        beta_node = 1j * rng.uniform(-2.0, 2.0)
        beta_anti = 1j * rng.uniform(-2.0, 2.0)
        quarter = tmatrix.free_matrix(np.pi / 2)
        cell = (
            quarter @ tmatrix.atom_matrix(beta_node)
            @ quarter @ tmatrix.atom_matrix(beta_anti)
        )
        angle = tmatrix.bloch_angle(cell)
        cos_theta = np.cos(angle.theta)
        sin_theta = np.sin(angle.theta)
        if abs(cos_theta) > 0.99 or abs(sin_theta) < 1e-6:
            continue
        cells += 1
        for power in (2, 10, 100, 1000):
            closed = tmatrix.cell_power(cell, power)
            brute = np.linalg.matrix_power(cell, power)
            rel = np.linalg.norm(closed - brute) / np.linalg.norm(brute)
            worst = max(worst, rel)
    return worst <= 1e-9 * tolerance_scale, (
        f"worst relative deviation {worst:.3e} over 100 cells x 4 powers (limit 1e-9)"
    )


def criterion_05_model_agreement(tolerance_scale: float = 1.0) -> tuple[bool, str]:
    """Stored spin waves from the discrete and kernel models overlap."""
    n_atoms = 2000
    spec = EnsembleSpec(
        n_atoms=n_atoms, scheme=Scheme.DUAL_V, gamma_1d=0.05, omega0=1.0,
        delta_c=-10.0, placement=Regular(spacing=0.266),
    )
    params = eit.eit_params(n_atoms, 0.05, 1.0, 0.1)
    packet = eit.gaussian_input(params)
    kernel_wave = eit.store_kernel_model(packet, params, two_sided=False)
    discrete_wave = eit.store_discrete(packet, spec, two_sided=False)
    a = kernel_wave.amplitudes
    b = discrete_wave.amplitudes
    overlap = abs(np.vdot(a, b)) ** 2 / (np.vdot(a, a).real * np.vdot(b, b).real)
    threshold = 1.0 - 0.01 * tolerance_scale
    return overlap >= threshold, (
        f"stored-wave overlap {overlap:.5f} (threshold {threshold:.3f})"
    )


def criterion_06_eta(tolerance_scale: float = 1.0) -> tuple[bool, str]:
    """Kernel-model round-trip efficiency against the closed form."""
    parts = []
    ok = True
    for sigma in (0.05, 0.10, 0.15):
        params = eit.eit_params(10_000, 0.05, 1.0, sigma)
        packet = eit.gaussian_input(params)
        spin = eit.store_kernel_model(packet, params, two_sided=True)
        out = eit.retrieve_kernel_model(spin, params)
        eta = out.norm_sq()
        exact = eit.eta_eit_analytic(params)
        rel = abs(eta - exact) / exact
        ok &= rel <= 0.10 * tolerance_scale
        parts.append(f"sigma={sigma}: eta={eta:.4f} vs {exact:.4f} ({rel:.2%})")
    return bool(ok), "; ".join(parts)


def _gate_point(n_atoms: int, t_b: fidelity.TBMode, omega0: float = 10.0):
    gamma_1d = 0.05
    delta_c, sigma = fidelity.optimal_params(n_atoms, gamma_1d)
    spec = EnsembleSpec(
        n_atoms=n_atoms, scheme=Scheme.LAMBDA, gamma_1d=gamma_1d,
        omega0=omega0, delta_c=delta_c,
    )
    return fidelity.evaluate_gate(spec, sigma, t_b=t_b)


def criterion_07_fidelity_asymptotics(tolerance_scale: float = 1.0) -> tuple[bool, str]:
    """Numeric fidelities track the closed forms, tightening with size."""
    gamma_1d = 0.05
    sizes = (1000, 3162, 10_000)
    dev_f = []
    dev_c = []
    report_large = None
    for n_atoms in sizes:
        report = _gate_point(n_atoms, fidelity.TBMode.ONE)
        f_ref, c_ref = fidelity.analytic_fidelities(n_atoms, gamma_1d, fidelity.TBMode.ONE)
        dev_f.append(abs(report.f_cj - f_ref))
        dev_c.append(abs(report.f_cj_cond - c_ref))
        report_large = report
    trend = all(a > b for a, b in zip(dev_f, dev_f[1:])) and all(
        a > b for a, b in zip(dev_c, dev_c[1:])
    )
    point_one = abs(report_large.f_cj_cond - 0.911) <= 0.03 * tolerance_scale
    report_match = _gate_point(10_000, fidelity.TBMode.MATCH_R0)
    point_match = abs(report_match.f_cj_cond - 0.992) <= 0.005 * tolerance_scale
    ok = trend and point_one and point_match
    return bool(ok), (
        f"|F-closed| {['%.4f' % d for d in dev_f]}, "
        f"|Fcond-closed| {['%.4f' % d for d in dev_c]} over N={list(sizes)}; "
        f"Fcond(t_b=1, N=1e4)={report_large.f_cj_cond:.4f} (target 0.911+-0.03 "
        f"{'ok' if point_one else 'out'}); "
        f"Fcond(t_b=R0)={report_match.f_cj_cond:.4f} (target 0.992+-0.005 "
        f"{'ok' if point_match else 'out'})"
    )


def criterion_08_structural(tolerance_scale: float = 1.0) -> tuple[bool, str]:
    """Bounds, ordering, and flip-pulse invariance on random points."""
    rng = np.random.default_rng(11)
    slack = 1e-9
    worst_gap = -np.inf
    worst_pi = 0.0
    for _ in range(200):
        scheme = Scheme.LAMBDA if rng.random() < 0.5 else Scheme.DUAL_V
        n_atoms = int(rng.integers(25, 150)) * 2
        gamma_1d = float(rng.uniform(0.02, 0.3))
        spec = EnsembleSpec(
            n_atoms=n_atoms, scheme=scheme, gamma_1d=gamma_1d,
            omega0=float(rng.uniform(0.5, 12.0)),
            delta_c=float(rng.uniform(-15.0, -1.5)),
        )
        sigma = float(rng.uniform(0.06, 0.2))
        t_b_choice = rng.random()
        if t_b_choice < 0.4:
            t_b = fidelity.TBMode.ONE
        elif t_b_choice < 0.7:
            t_b = fidelity.TBMode.MATCH_R0
        else:
            t_b = float(rng.uniform(0.0, 1.0))
        delta_res = abs(resonance_seed(spec))
        report = fidelity.evaluate_gate(spec, sigma, t_b=t_b, delta_res=delta_res)
        values = (report.f_cj, report.p_suc, report.f_cj_cond)
        if any(v < -slack or v > 1 + slack for v in values):
            return False, f"figure of merit out of [0,1]: {values} at {spec}"
        worst_gap = max(worst_gap, report.f_cj - report.p_suc)
        varphi = float(rng.uniform(-1.4, 1.4))
        tilted = fidelity.evaluate_gate(
            spec, sigma, t_b=t_b, delta_res=delta_res, pi_pulse_varphi=varphi
        )
        worst_pi = max(worst_pi, abs(tilted.f_cj_cond - report.f_cj_cond))
    ok = worst_gap <= slack and worst_pi <= 1e-12 * tolerance_scale
    return bool(ok), (
        f"200 random points: max F-P = {worst_gap:.2e} (limit 1e-9), "
        f"max flip-pulse shift of conditional fidelity = {worst_pi:.2e} (limit 1e-12)"
    )


def criterion_09_gate_time(tolerance_scale: float = 1.0) -> tuple[bool, str]:
    """Closed-form time budget numbers against the quoted values."""
    budget = fidelity.gate_time_budget(10_000, 0.05, 10.0, hfs_splitting=1000.0)
    budget_large = fidelity.gate_time_budget(100_000, 0.05, 10.0, hfs_splitting=1000.0)
    checks = [
        ("1/sigma_B", budget.t_scatter, 52.0, 0.03),
        ("t_pi", budget.t_pi, 0.1, 0.10),
        ("loss(1e4)", budget.loss_hfs, 0.005, 0.10),
        ("loss(1e5)", budget_large.loss_hfs, 0.28, 0.10),
    ]
    parts = []
    ok = True
    for name, value, target, limit in checks:
        rel = abs(value - target) / target
        ok &= rel <= limit * tolerance_scale
        parts.append(f"{name}={value:.4g} vs {target} ({rel:.1%}, limit {limit:.0%})")
    return bool(ok), "; ".join(parts)


def criterion_10_misalignment(tolerance_scale: float = 1.0) -> tuple[bool, str]:
    """Arm-mismatch parabola coefficient against the quoted caption form."""
    n_atoms, gamma_1d = 10_000, 0.05
    delta_c, sigma = fidelity.optimal_params(n_atoms, gamma_1d)
    spec = EnsembleSpec(
        n_atoms=n_atoms, scheme=Scheme.LAMBDA, gamma_1d=gamma_1d,
        omega0=1.0, delta_c=delta_c,
    )
    geom0 = sagnac.balanced_geometry(spec)
    delta_res = find_resonance(spec)
    f0 = fidelity.evaluate_gate(
        spec, sigma, geometry=geom0, delta_res=delta_res
    ).f_cj
    points = (0.02, 0.04)
    ratios = []
    for k0_l1 in points:
        geom = replace(geom0, k0_l1=k0_l1)
        f = fidelity.evaluate_gate(
            spec, sigma, geometry=geom, delta_res=delta_res
        ).f_cj
        ratios.append((f - f0) / k0_l1**2)
    # fit f - f0 = a*l1 + b*l1^2 so a residual linear term cannot bias b
    slope = (ratios[0] - ratios[1]) / (1.0 / points[0] - 1.0 / points[1])
    measured = float(ratios[0] - slope / points[0])
    gp = 1.0 - gamma_1d
    reference = -(0.5 - 5.0 * np.pi * gp / (8.0 * gamma_1d * np.sqrt(n_atoms)))
    rel = abs(measured - reference) / abs(reference)
    return rel <= 0.10 * tolerance_scale, (
        f"curvature measured {measured:.4f} vs quoted {reference:.4f} "
        f"(deviation {rel:.1%}, limit 10%)"
    )


def criterion_11_placement(tolerance_scale: float = 1.0) -> tuple[bool, str]:
    """Dual-V robustness to spacing and to random placement.

    At a thousand atoms the stationary resonance sits below the smooth
    background (its closed-form peak transmission is ~0.06 in amplitude),
    so the operating point is the closed-form resonance position rather
    than a numeric peak search; the comparisons here are relative, which
    is what placement robustness means.
    """
    n_atoms, gamma_1d = 1000, 0.05
    delta_c, sigma = fidelity.optimal_params(n_atoms, gamma_1d)
    values = {}
    for spacing in (0.15, 0.266, 0.35):
        spec = EnsembleSpec(
            n_atoms=n_atoms, scheme=Scheme.DUAL_V, gamma_1d=gamma_1d,
            omega0=1.0, delta_c=delta_c, placement=Regular(spacing=spacing),
        )
        delta_res = abs(resonance_seed(spec))
        values[spacing] = fidelity.evaluate_gate(
            spec, sigma, delta_res=delta_res
        ).f_cj_cond
    spread = (max(values.values()) - min(values.values())) / np.mean(list(values.values()))
    base = EnsembleSpec(
        n_atoms=n_atoms, scheme=Scheme.DUAL_V, gamma_1d=gamma_1d,
        omega0=1.0, delta_c=delta_c, placement=Regular(spacing=0.266),
    )
    regular_value = values[0.266]
    delta_res = abs(resonance_seed(base))
    mean, _ = optimize.random_placement_average(
        base,
        lambda s: fidelity.evaluate_gate(s, sigma, delta_res=delta_res).f_cj_cond,
        n_realizations=20,
        seed0=7,
    )
    random_dev = abs(mean - regular_value) / regular_value
    ok = spread <= 0.10 * tolerance_scale and random_dev <= 0.05 * tolerance_scale
    return bool(ok), (
        f"spacing spread {spread:.2%} (limit 10%) over {sorted(values)}; "
        f"random-mean deviation {random_dev:.2%} (limit 5%), "
        f"regular={regular_value:.4f}, random mean={mean:.4f}"
    )


CHECKS = [
    (1, "resonance-position", criterion_01_resonance),
    (2, "scattering-asymptotics", criterion_02_scattering_asymptotics),
    (3, "resonance-width", criterion_03_width),
    (4, "cell-power-closed-form", criterion_04_cell_power),
    (5, "storage-model-agreement", criterion_05_model_agreement),
    (6, "round-trip-efficiency", criterion_06_eta),
    (7, "fidelity-asymptotics", criterion_07_fidelity_asymptotics),
    (8, "structural-inequalities", criterion_08_structural),
    (9, "gate-time-budget", criterion_09_gate_time),
    (10, "misalignment-parabola", criterion_10_misalignment),
    (11, "placement-robustness", criterion_11_placement),
]

QUICK_CRITERIA = (1, 4, 9)


def run_checks(level: str = "quick", tolerance_scale: float = 1.0) -> list[CheckResult]:
    """Execute the requested battery; never raises on check failure."""
    if level not in ("quick", "full"):
        raise ValueError(f"unknown level {level!r}")
    selected = [c for c in CHECKS if level == "full" or c[0] in QUICK_CRITERIA]
    results = []
    for criterion, name, func in selected:
        start = time.perf_counter()
        try:
            passed, detail = func(tolerance_scale)
        except Exception as exc:  # a crashed check is a failed check
            passed, detail = False, f"raised {type(exc).__name__}: {exc}"
        elapsed = time.perf_counter() - start
        results.append(CheckResult(criterion, name, passed, detail, elapsed))
    return results
