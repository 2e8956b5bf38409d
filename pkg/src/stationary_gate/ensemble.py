"""Atomic ensembles coupled to a waveguide: exact scattering spectra.

Unit conventions used across the whole package:
- The total single-atom decay rate (guided plus unguided) is 1 and fixes
  the frequency unit; gamma_1d is the guided fraction and
  gamma_prime = 1 - gamma_1d the unguided remainder.
- Positions are optical phases k0*z in radians; interatomic spacing is
  given in units of pi/k0, so spacing 0.5 puts neighbours a quarter
  wavelength (phase pi/2) apart.
- delta is the two-photon detuning and delta_c the drive detuning; the
  probe detuning is delta_c + delta.

Two level schemes are supported.  The lambda scheme uses one drive
polarization forming a standing wave: atoms alternate between drive
antinodes (full EIT response) and drive nodes (plain two-level response),
and the regular spacing must be 0.5 so the closed-form unit-cell power
applies.  The dual-V scheme separates the counter-propagating drives by
polarization; every atom carries a 2x2 mode-space coupling block and any
spacing (or random placement) is allowed.

A "stored" site marks the atom (dual-V) or unit cell (lambda) holding a
previously stored excitation; its coupling switches to the saturated
two-level response, which is what the second photon scatters from.
"""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .numerics import DEFAULT_SETTINGS, NumericSettings
from .tmatrix import (
    DegenerateCellWarning,
    IllConditionedError,
    atom_matrix,
    cell_power,
    compose,
    extract_scattering,
    free_matrix,
)

# Linear Zeeman shift per ground-state quantum number, MHz per Gauss.
ZEEMAN_MHZ_PER_GAUSS = 1.4


class PoleError(ZeroDivisionError):
    """A coupling-parameter denominator vanished exactly."""


class ResonanceNotFound(RuntimeError):
    """No transmission maximum found inside the scan bracket."""


class Scheme(Enum):
    LAMBDA = "lambda"
    DUAL_V = "dual_v"


class AtomState(Enum):
    GROUND = "ground"
    STORED = "stored"


@dataclass(frozen=True)
class Regular:
    """Equidistant placement; spacing in units of pi/k0."""

    spacing: float

    def __post_init__(self):
        if not (self.spacing > 0):
            raise ValueError("spacing must be positive")


@dataclass(frozen=True)
class RandomUniform:
    """Positions drawn uniformly over the ensemble length, sorted ascending.

    spacing sets the length via L = n_atoms * spacing * pi / k0 so random
    ensembles are comparable to a regular ensemble of the same density.
    """

    seed: int
    spacing: float

    def __post_init__(self):
        if not (self.spacing > 0):
            raise ValueError("spacing must be positive")


LAMBDA_SPACING = 0.5
DUAL_V_SPACING = 0.266


@dataclass(frozen=True)
class EnsembleSpec:
    """Physical description of one ensemble.

    stored_site indexes the unit cell (lambda, 0..n_atoms/2-1) or the atom
    (dual-V, 0..n_atoms-1) holding the stored excitation, counted from the
    input side; None means no stored excitation.
    """

    n_atoms: int
    scheme: Scheme
    gamma_1d: float
    omega0: float
    delta_c: float
    placement: Regular | RandomUniform | None = None
    stored_site: int | None = None

    def __post_init__(self):
        if int(self.n_atoms) != self.n_atoms or self.n_atoms < 0:
            raise ValueError("n_atoms must be a non-negative integer")
        if not (0 < self.gamma_1d <= 1):
            raise ValueError("gamma_1d must lie in (0, 1]")
        if self.omega0 < 0:
            raise ValueError("omega0 must be non-negative")
        if self.placement is None:
            default = LAMBDA_SPACING if self.scheme is Scheme.LAMBDA else DUAL_V_SPACING
            object.__setattr__(self, "placement", Regular(default))
        if self.scheme is Scheme.LAMBDA:
            if self.n_atoms % 2 != 0:
                raise ValueError("lambda scheme needs an even atom count")
            if not isinstance(self.placement, Regular) or not math.isclose(
                self.placement.spacing, LAMBDA_SPACING
            ):
                raise ValueError(
                    "lambda scheme requires regular spacing 0.5; the standing-wave "
                    "role assignment is undefined for other placements"
                )
        if self.stored_site is not None:
            n_sites = self.n_atoms // 2 if self.scheme is Scheme.LAMBDA else self.n_atoms
            if not 0 <= self.stored_site < n_sites:
                raise ValueError(f"stored_site {self.stored_site} outside 0..{n_sites - 1}")

    @property
    def gamma_prime(self) -> float:
        return 1.0 - self.gamma_1d

    @property
    def n_modes(self) -> int:
        return 2 if self.scheme is Scheme.DUAL_V else 1

    @property
    def spacing(self) -> float:
        return self.placement.spacing


@dataclass(frozen=True)
class ScatterResult:
    """Scattering coefficients at one two-photon detuning.

    For the dual-V scheme the drives phase-match one circulating loop: a
    plus-polarized input from the left reflects into the minus polarization,
    and a minus-polarized input from the right reflects into plus.  The r/t
    values are that loop channel (reflection converts polarization,
    transmission keeps it) and the cross_* fields hold the residual
    unmatched-channel amplitudes; for the lambda scheme the cross terms are
    zero.  A non-None error marks a failed evaluation (coefficients are NaN
    then).
    """

    delta: float
    r_plus: complex
    t_plus: complex
    r_minus: complex
    t_minus: complex
    stored: bool = False
    stored_site: int | None = None
    cross_r_plus: complex = 0j
    cross_t_plus: complex = 0j
    cross_r_minus: complex = 0j
    cross_t_minus: complex = 0j
    error: str | None = None


def atom_phases(spec: EnsembleSpec) -> np.ndarray:
    """Positions of all atoms as k0*z phases in radians, ascending."""
    if isinstance(spec.placement, Regular):
        return np.arange(spec.n_atoms) * (spec.placement.spacing * math.pi)
    length = ensemble_length_phase(spec)
    rng = np.random.default_rng(spec.placement.seed)
    return np.sort(rng.uniform(0.0, length, size=spec.n_atoms))


def ensemble_length_phase(spec: EnsembleSpec) -> float:
    """Total ensemble length as the phase k0*L."""
    return spec.n_atoms * spec.spacing * math.pi


def beta_lambda_antinode(delta, delta_c, omega0, gamma_1d, gamma_prime) -> complex:
    """Coupling parameter of a driven EIT atom at a drive antinode."""
    probe = delta_c + delta
    denom = (gamma_prime - 2j * probe) * delta + 2j * abs(omega0) ** 2
    if denom == 0:
        raise PoleError("EIT coupling denominator vanished")
    return gamma_1d * delta / denom


def beta_lambda_node(delta, delta_c, gamma_1d, gamma_prime) -> complex:
    """Coupling parameter of an undriven (two-level) atom at a drive node."""
    probe = delta_c + delta
    return gamma_1d / (gamma_prime - 2j * probe)


def beta_stored(gamma_1d, gamma_prime) -> complex:
    """Resonant two-level coupling of the atom holding the stored photon."""
    if gamma_prime <= 0:
        raise PoleError("stored-site coupling requires gamma_prime > 0")
    return complex(gamma_1d / gamma_prime)


def dual_v_scatter(z_phase, state: AtomState, delta, delta_c, omega0, gamma_1d, gamma_prime):
    """2x2 single-atom scattering block of a dual-V atom at phase k0*z.

    Indexed [out, in] over the (plus, minus) polarizations.  The diagonal
    keeps the polarization; the off-diagonal converts it and carries the
    drive phases e^{+-2i k0 z}, which cancel the round-trip propagation
    phase so the plus-in/minus-out reflections add coherently across atoms
    regardless of placement.
    """
    if state is AtomState.STORED:
        return -gamma_1d * np.eye(2, dtype=complex)
    probe = complex(delta_c + delta)
    probe_g = probe + 0.5j  # probe detuning with total linewidth
    dd = probe_g * probe_g * delta - 2.0 * probe_g * abs(omega0) ** 2
    if dd == 0:
        raise PoleError("dual-V scattering denominator vanished")
    common = -0.5j * gamma_1d / dd
    diag = common * (probe_g * delta - abs(omega0) ** 2)
    off = common * abs(omega0) ** 2
    return np.array(
        [
            [diag, off * cmath.exp(2j * z_phase)],
            [off * cmath.exp(-2j * z_phase), diag],
        ]
    )


def dual_v_beta(z_phase, state: AtomState, delta, delta_c, omega0, gamma_1d, gamma_prime):
    """Transfer-matrix coupling block of one dual-V atom: -(I+S)^-1 S."""
    s = dual_v_scatter(z_phase, state, delta, delta_c, omega0, gamma_1d, gamma_prime)
    eye_s = np.eye(2, dtype=complex) + s
    det = eye_s[0, 0] * eye_s[1, 1] - eye_s[0, 1] * eye_s[1, 0]
    if abs(det) < 1e-300:
        raise PoleError("dual-V response is singular (I + S not invertible)")
    return -np.linalg.solve(eye_s, s)


def _lambda_cell(spec: EnsembleSpec, delta, stored: bool) -> np.ndarray:
    """Two-atom unit cell: antinode atom, quarter wave, node atom, quarter wave."""
    g1, gp = spec.gamma_1d, spec.gamma_prime
    if stored:
        first = beta_stored(g1, gp)
    else:
        first = beta_lambda_antinode(delta, spec.delta_c, spec.omega0, g1, gp)
    node = beta_lambda_node(delta, spec.delta_c, g1, gp)
    quarter = free_matrix(math.pi / 2.0)
    return quarter @ atom_matrix(node) @ quarter @ atom_matrix(first)


def ensemble_matrix(
    spec: EnsembleSpec, delta, settings: NumericSettings = DEFAULT_SETTINGS
) -> np.ndarray:
    """Full transfer matrix of the ensemble at one two-photon detuning."""
    if spec.n_atoms == 0:
        return np.eye(2 * spec.n_modes, dtype=complex)
    if spec.scheme is Scheme.LAMBDA:
        cell = _lambda_cell(spec, delta, stored=False)
        n_cells = spec.n_atoms // 2
        if spec.stored_site is None:
            return cell_power(cell, n_cells, settings)
        k = spec.stored_site
        stored_cell = _lambda_cell(spec, delta, stored=True)
        left = cell_power(cell, n_cells - 1 - k, settings)
        right = cell_power(cell, k, settings)
        return compose(compose(left, stored_cell), right)
    return _dual_v_transfer_batch(spec, np.asarray([delta], dtype=float), settings)[0]


def _dual_v_atom_blocks(spec: EnsembleSpec, deltas: np.ndarray, z_phase: float, state: AtomState):
    """Coupling blocks beta for one atom over a detuning grid, shape (G, 2, 2)."""
    g1 = spec.gamma_1d
    probe = spec.delta_c + deltas
    probe_g = probe + 0.5j
    om2 = abs(spec.omega0) ** 2
    if state is AtomState.STORED:
        s = np.zeros((deltas.size, 2, 2), dtype=complex)
        s[:, 0, 0] = s[:, 1, 1] = -g1
    else:
        dd = probe_g * probe_g * deltas - 2.0 * probe_g * om2
        if np.any(dd == 0):
            raise PoleError("dual-V scattering denominator vanished")
        common = -0.5j * g1 / dd
        s = np.empty((deltas.size, 2, 2), dtype=complex)
        s[:, 0, 0] = s[:, 1, 1] = common * (probe_g * deltas - om2)
        s[:, 0, 1] = common * om2 * cmath.exp(2j * z_phase)
        s[:, 1, 0] = common * om2 * cmath.exp(-2j * z_phase)
    eye_s = np.eye(2, dtype=complex) + s
    return -np.linalg.solve(eye_s, s)


def _atom_transfer_batch(betas: np.ndarray) -> np.ndarray:
    """Stack of atom transfer matrices from coupling blocks, (G,2,2)->(G,4,4)."""
    g = betas.shape[0]
    eye = np.eye(2, dtype=complex)
    out = np.empty((g, 4, 4), dtype=complex)
    out[:, :2, :2] = eye - betas
    out[:, :2, 2:] = -betas
    out[:, 2:, :2] = betas
    out[:, 2:, 2:] = eye + betas
    return out


def _apply_free_phase(mats: np.ndarray, phase: float) -> None:
    """In-place left-multiplication by the free-propagation matrix."""
    if phase == 0.0:
        return
    mats[:, :2, :] *= cmath.exp(1j * phase)
    mats[:, 2:, :] *= cmath.exp(-1j * phase)


def _dual_v_transfer_batch(
    spec: EnsembleSpec, deltas: np.ndarray, settings: NumericSettings
) -> np.ndarray:
    """Transfer matrices of a dual-V ensemble over a detuning grid, (G, 4, 4)."""
    phases = atom_phases(spec)
    length = ensemble_length_phase(spec)
    total = np.broadcast_to(np.eye(4, dtype=complex), (deltas.size, 4, 4)).copy()
    _apply_free_phase(total, phases[0] if spec.n_atoms else length)
    for j in range(spec.n_atoms):
        state = AtomState.STORED if j == spec.stored_site else AtomState.GROUND
        betas = _dual_v_atom_blocks(spec, deltas, phases[j], state)
        total = _atom_transfer_batch(betas) @ total
        gap = (phases[j + 1] if j + 1 < spec.n_atoms else length) - phases[j]
        _apply_free_phase(total, gap)
    return total


def _scatter_from_matrix(
    spec: EnsembleSpec, delta: float, transfer: np.ndarray, settings: NumericSettings
) -> ScatterResult:
    coeffs = extract_scattering(transfer, settings)
    stored = spec.stored_site is not None
    if spec.n_modes == 1:
        return ScatterResult(
            delta=delta,
            r_plus=coeffs.r_plus,
            t_plus=coeffs.t_plus,
            r_minus=coeffs.r_minus,
            t_minus=coeffs.t_minus,
            stored=stored,
            stored_site=spec.stored_site,
        )
    # loop channel: plus in from the left reflects into minus ([1, 0]) and
    # transmits into plus ([0, 0]); minus in from the right reflects into
    # plus ([0, 1]) and transmits into minus ([1, 1])
    return ScatterResult(
        delta=delta,
        r_plus=complex(coeffs.r_plus[1, 0]),
        t_plus=complex(coeffs.t_plus[0, 0]),
        r_minus=complex(coeffs.r_minus[0, 1]),
        t_minus=complex(coeffs.t_minus[1, 1]),
        stored=stored,
        stored_site=spec.stored_site,
        cross_r_plus=complex(coeffs.r_plus[0, 0]),
        cross_t_plus=complex(coeffs.t_plus[1, 0]),
        cross_r_minus=complex(coeffs.r_minus[1, 1]),
        cross_t_minus=complex(coeffs.t_minus[0, 1]),
    )


def _error_result(spec: EnsembleSpec, delta: float, message: str) -> ScatterResult:
    nan = complex(float("nan"), float("nan"))
    return ScatterResult(
        delta=delta,
        r_plus=nan,
        t_plus=nan,
        r_minus=nan,
        t_minus=nan,
        stored=spec.stored_site is not None,
        stored_site=spec.stored_site,
        error=message,
    )


def spectrum(
    spec: EnsembleSpec, delta_grid, settings: NumericSettings = DEFAULT_SETTINGS
) -> list[ScatterResult]:
    """Scattering coefficients over a sorted detuning grid.

    Per-point numerical failures are recorded on the result row instead of
    aborting the whole sweep.
    """
    deltas = np.asarray(delta_grid, dtype=float)
    if deltas.ndim != 1:
        raise ValueError("delta_grid must be one-dimensional")
    if np.any(np.diff(deltas) < 0):
        raise ValueError("delta_grid must be sorted ascending")
    results: list[ScatterResult] = []
    if spec.scheme is Scheme.DUAL_V and spec.n_atoms > 0:
        transfers = _dual_v_transfer_batch(spec, deltas, settings)
        for delta, transfer in zip(deltas, transfers):
            try:
                results.append(_scatter_from_matrix(spec, float(delta), transfer, settings))
            except (IllConditionedError, PoleError) as exc:
                results.append(_error_result(spec, float(delta), str(exc)))
        return results
    for delta in deltas:
        try:
            transfer = ensemble_matrix(spec, float(delta), settings)
            results.append(_scatter_from_matrix(spec, float(delta), transfer, settings))
        except (IllConditionedError, PoleError) as exc:
            results.append(_error_result(spec, float(delta), str(exc)))
    return results


def transmission_abs2(
    spec: EnsembleSpec, delta: float, settings: NumericSettings = DEFAULT_SETTINGS
) -> float:
    """|t|^2 of the co-polarized forward channel at one detuning."""
    transfer = ensemble_matrix(spec, delta, settings)
    coeffs = extract_scattering(transfer, settings)
    t = coeffs.t_plus if spec.n_modes == 1 else coeffs.t_plus[0, 0]
    return abs(t) ** 2


def resonance_seed(spec: EnsembleSpec) -> float:
    """Leading-order position of the transmission resonance nearest delta=0."""
    g1, n = spec.gamma_1d, spec.n_atoms
    return -4.0 * math.pi**2 * spec.delta_c * abs(spec.omega0) ** 2 / (g1**2 * n**2)


def find_resonance(spec: EnsembleSpec, settings: NumericSettings = DEFAULT_SETTINGS) -> float:
    """Numerically locate the transmission maximum nearest delta=0.

    Coarse scan outward from zero on the side opposite in sign to delta_c,
    then golden-section refinement of the first interior local maximum of
    |t|^2.  One retry with a wider bracket before giving up.
    """
    seed = resonance_seed(spec)
    if seed == 0.0:
        raise ResonanceNotFound("analytic seed is zero (delta_c or omega0 vanishes)")
    unstored = spec if spec.stored_site is None else _without_stored(spec)

    def objective(delta: float) -> float:
        # delta=0 is the exact dark point where the unit cell degenerates;
        # the repeated-multiplication fallback is exact there, so the
        # degeneracy warning carries no information during a scan.
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", DegenerateCellWarning)
            try:
                return -transmission_abs2(unstored, delta, settings)
            except IllConditionedError:
                # a singular lower-right block means the chain is opaque
                # here (deep in a band gap); such a point transmits nothing
                # and cannot host the maximum, so score it as zero
                return 0.0

    for widen in (1.0, settings.resonance_retry_factor):
        bracket = settings.resonance_bracket_factor * abs(seed) * widen
        step = abs(seed) / settings.resonance_scan_divisor
        n_steps = int(round(bracket / step))
        sign = 1.0 if seed > 0 else -1.0
        grid = sign * step * np.arange(n_steps + 1)
        values = np.array([-objective(d) for d in grid])
        for i in range(1, n_steps):
            # the candidate must actually transmit: opaque points score an
            # exact zero and a flat zero plateau is not a resonance
            if values[i] > 0.0 and values[i] >= values[i - 1] and values[i] >= values[i + 1]:
                lo, hi = sorted((grid[i - 1], grid[i + 1]))
                best, _ = _golden_max(objective, lo, hi, settings.resonance_xtol)
                return best
    raise ResonanceNotFound(
        f"no interior transmission maximum within {settings.resonance_retry_factor}x bracket"
    )


def _without_stored(spec: EnsembleSpec) -> EnsembleSpec:
    from dataclasses import replace

    return replace(spec, stored_site=None)


def _golden_max(neg_objective, lo: float, hi: float, xtol: float):
    from .numerics import golden_section_min

    x = golden_section_min(neg_objective, lo, hi, xtol)
    return x, -neg_objective(x)


def resonance_width(
    spec: EnsembleSpec,
    method: str = "analytic",
    settings: NumericSettings = DEFAULT_SETTINGS,
) -> float:
    """Width of the transmission resonance nearest delta=0.

    "analytic": closed-form large-N expression.  "numeric": curvature of
    the complex forward transmission at the numerically located resonance,
    w = Re[sqrt(4 / t'')], with a central second difference.
    """
    g1, n = spec.gamma_1d, spec.n_atoms
    analytic = 32.0 * math.sqrt(2.0) * math.pi**2 * spec.delta_c**2 * abs(spec.omega0) ** 2 / (
        g1**3 * n**3
    )
    if method == "analytic":
        return analytic
    if method != "numeric":
        raise ValueError("method must be 'analytic' or 'numeric'")
    unstored = spec if spec.stored_site is None else _without_stored(spec)
    delta_res = find_resonance(unstored, settings)
    h = settings.width_step_fraction * analytic

    def t_of(delta: float) -> complex:
        transfer = ensemble_matrix(unstored, delta, settings)
        coeffs = extract_scattering(transfer, settings)
        return coeffs.t_plus if unstored.n_modes == 1 else complex(coeffs.t_plus[0, 0])

    curvature = (t_of(delta_res + h) - 2.0 * t_of(delta_res) + t_of(delta_res - h)) / h**2
    return (cmath.sqrt(4.0 / curvature)).real


@dataclass(frozen=True)
class ScatterArrays:
    """Co-polarized scattering coefficients for many stored sites at once."""

    delta: float
    sites: np.ndarray
    r_plus: np.ndarray
    t_plus: np.ndarray
    r_minus: np.ndarray
    t_minus: np.ndarray


def site_z_tilde(spec: EnsembleSpec, sites) -> np.ndarray:
    """Fractional position (0..1) of stored sites along the ensemble."""
    sites = np.asarray(sites, dtype=int)
    if spec.scheme is Scheme.LAMBDA:
        return sites / (spec.n_atoms // 2)
    return atom_phases(spec)[sites] / ensemble_length_phase(spec)


def stored_site_coeffs(
    spec: EnsembleSpec,
    delta: float,
    sites=None,
    settings: NumericSettings = DEFAULT_SETTINGS,
) -> ScatterArrays:
    """Scattering coefficients with the stored excitation at each listed site.

    Equivalent to evaluating the stored-site spectrum once per site, but
    shares the unchanged left/right ensemble sections between sites: for
    the lambda scheme via closed-form cell powers, for dual-V via prefix
    and suffix cumulative products.
    """
    if spec.scheme is Scheme.LAMBDA:
        n_cells = spec.n_atoms // 2
        sites = np.arange(n_cells) if sites is None else np.asarray(sites, dtype=int)
        if sites.size and (sites.min() < 0 or sites.max() >= n_cells):
            raise ValueError("stored site outside the ensemble")
        from .tmatrix import cell_power_batch

        cell = _lambda_cell(spec, delta, stored=False)
        stored_cell = _lambda_cell(spec, delta, stored=True)
        left = cell_power_batch(cell, n_cells - 1 - sites, settings)
        right = cell_power_batch(cell, sites, settings)
        transfers = left @ stored_cell @ right
        t22 = transfers[:, 1, 1]
        if np.any(t22 == 0) or not np.all(np.isfinite(transfers)):
            raise IllConditionedError("stored-site transfer matrix is singular", float("inf"))
        r_plus = -transfers[:, 1, 0] / t22
        t_plus = transfers[:, 0, 0] - transfers[:, 0, 1] * transfers[:, 1, 0] / t22
        return ScatterArrays(
            delta=delta,
            sites=sites,
            r_plus=r_plus,
            t_plus=t_plus,
            r_minus=transfers[:, 0, 1] / t22,
            t_minus=1.0 / t22,
        )
    sites = np.arange(spec.n_atoms) if sites is None else np.asarray(sites, dtype=int)
    if sites.size and (sites.min() < 0 or sites.max() >= spec.n_atoms):
        raise ValueError("stored site outside the ensemble")
    phases = atom_phases(spec)
    length = ensemble_length_phase(spec)
    base = _without_stored(spec)
    # prefix[j]: everything to the right of atom j (input side, applied first);
    # suffix[j]: everything to its left (output side).
    prefix = np.empty((spec.n_atoms, 4, 4), dtype=complex)
    suffix = np.empty((spec.n_atoms, 4, 4), dtype=complex)
    deltas = np.asarray([delta], dtype=float)
    running = np.eye(4, dtype=complex) * cmath.exp(0j)
    running = running[None, :, :].copy()
    _apply_free_phase(running, phases[0])
    for j in range(spec.n_atoms):
        prefix[j] = running[0]
        betas = _dual_v_atom_blocks(base, deltas, phases[j], AtomState.GROUND)
        running = _atom_transfer_batch(betas) @ running
        gap = (phases[j + 1] if j + 1 < spec.n_atoms else length) - phases[j]
        _apply_free_phase(running, gap)
    running = np.eye(4, dtype=complex)[None, :, :].copy()
    _apply_free_phase(running, length - phases[-1])
    for j in range(spec.n_atoms - 1, -1, -1):
        suffix[j] = running[0]
        betas = _dual_v_atom_blocks(base, deltas, phases[j], AtomState.GROUND)
        running = running @ _atom_transfer_batch(betas)
        gap = phases[j] - (phases[j - 1] if j > 0 else 0.0)
        running[:, :, :2] *= cmath.exp(1j * gap)
        running[:, :, 2:] *= cmath.exp(-1j * gap)
    stored_block = _dual_v_atom_blocks(spec, deltas, 0.0, AtomState.STORED)
    stored_transfer = _atom_transfer_batch(stored_block)[0]
    transfers = suffix[sites] @ stored_transfer @ prefix[sites]
    t11 = transfers[:, :2, :2]
    t12 = transfers[:, :2, 2:]
    t21 = transfers[:, 2:, :2]
    t22 = transfers[:, 2:, 2:]
    if not np.all(np.isfinite(transfers)):
        raise IllConditionedError("stored-site transfer matrix overflowed", float("inf"))
    inv22 = np.linalg.inv(t22)
    r_plus = -(inv22 @ t21)
    t_plus = t11 - t12 @ inv22 @ t21
    # same loop-channel extraction as the unstored dual-V spectrum
    return ScatterArrays(
        delta=delta,
        sites=sites,
        r_plus=r_plus[:, 1, 0],
        t_plus=t_plus[:, 0, 0],
        r_minus=(t12 @ inv22)[:, 0, 1],
        t_minus=inv22[:, 1, 1],
    )


@dataclass(frozen=True)
class AnalyticCoeffs:
    """Large-N closed-form scattering coefficients (lambda scheme)."""

    r0: float
    t0: float
    r1: complex | None = None
    t1: complex | None = None


def analytic_coeffs(
    spec: EnsembleSpec,
    z_tilde: float | None = None,
    include_drive_terms: bool = False,
) -> AnalyticCoeffs:
    """Closed-form large-N approximations at the transmission resonance.

    r0/t0 describe the bare ensemble; r1/t1 (returned when z_tilde is
    given) describe scattering with the stored excitation at fractional
    position z_tilde.  The forward coefficients carry the alternating
    ensemble sign (-1)^(n-1) with n the unit-cell count.  Drive-dependent
    corrections are off by default, matching the leading-order forms.
    """
    if spec.scheme is not Scheme.LAMBDA:
        raise ValueError("closed-form coefficients are defined for the lambda scheme")
    g1, gp, dc = spec.gamma_1d, spec.gamma_prime, spec.delta_c
    om2 = abs(spec.omega0) ** 2
    n = spec.n_atoms // 2
    sign = -1.0 if n % 2 == 0 else 1.0  # (-1)^(n-1)
    r0 = g1 * gp * n / (8.0 * dc**2)
    if include_drive_terms:
        r0 += math.pi**2 * gp * om2 / (4.0 * dc**2 * g1 * n)
    t0 = sign * (1.0 - r0)
    if z_tilde is None:
        return AnalyticCoeffs(r0=r0, t0=t0)
    x = z_tilde - 0.5
    curv = math.pi**4 * dc**2 / (g1**3 * n**2)
    r1 = (
        1.0
        - math.pi**2 * dc**2 * gp / (g1**3 * n**2)
        - 2j * math.pi**2 * dc / (g1 * n) * x
        - curv * (2.0 * g1 + gp) * x**2
    )
    t1_mag = (
        math.pi**2 * dc**2 * gp / (g1**3 * n**2)
        + math.pi**4 * dc**2 * gp / (g1**3 * n**3) * x
        + curv * gp * x**2
    )
    if include_drive_terms:
        drive = 2.0 * math.pi**4 * dc**2 * gp * om2 / (g1**5 * n**4)
        r1 += drive
        t1_mag -= drive
    return AnalyticCoeffs(r0=r0, t0=t0, r1=r1, t1=sign * t1_mag)


@dataclass(frozen=True)
class MagneticSplittings:
    """Zeeman shifts in MHz: drive/probe detuning, auxiliary level shift,
    and the splitting between adjacent ground sublevels."""

    delta: float
    delta_a: float
    adjacent: float


def magnetic_splittings(b_z: float) -> MagneticSplittings:
    """Level shifts (MHz) produced by a weak axial magnetic field in Gauss."""
    delta = ZEEMAN_MHZ_PER_GAUSS * b_z
    return MagneticSplittings(delta=delta, delta_a=delta / 6.0, adjacent=-delta / 2.0)


@dataclass(frozen=True)
class DualColorCheck:
    """Validity flags for running the two drives at split frequencies.

    close_enough: the frequency split is small next to the mean detuning.
    split_enough: the split exceeds the two-photon coupling scale
    |omega0|^2 / |sum of detunings|, so each drive addresses only its own
    transition.  Margins are (threshold - violation) style: positive when
    the condition holds.
    """

    close_enough: bool
    split_enough: bool
    close_margin: float
    split_margin: float


def dual_color_check(delta_c_plus: float, delta_c_minus: float, omega0: float) -> DualColorCheck:
    split = abs(delta_c_plus - delta_c_minus)
    mean_abs = 0.5 * abs(delta_c_plus + delta_c_minus)
    total = abs(delta_c_plus + delta_c_minus)
    if omega0 == 0:
        threshold = 0.0
    elif total == 0:
        threshold = math.inf
    else:
        threshold = abs(omega0) ** 2 / total
    return DualColorCheck(
        close_enough=split < mean_abs,
        split_enough=split >= threshold,
        close_margin=mean_abs - split,
        split_margin=split - threshold,
    )
