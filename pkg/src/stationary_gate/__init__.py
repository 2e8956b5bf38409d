"""Waveguide-QED simulator for a stationary-light controlled-phase photon gate.

Layers, bottom up:

- ``numerics``: shared numeric settings, fixed-step RK4, golden-section search.
- ``tmatrix``: two-mode transfer matrices, closed-form cell powers,
  scattering-coefficient extraction.
- ``ensemble``: atom-array builders for the lambda and dual-V level schemes,
  reflection/transmission spectra, resonance location and width,
  stored-excitation site coefficients, closed-form asymptotics.
- ``sagnac``: interferometer wrapper turning ensemble scattering into a
  single reflection coefficient, with arm-length bookkeeping.
- ``eit``: slow-light storage and retrieval (closed-form kernel model,
  dispersion estimate, and a discrete atom integrator), wave packets and
  spin waves.
- ``fidelity``: gate figures of merit (Choi-Jamiolkowski fidelity, success
  probability, conditional fidelity), closed-form asymptotics, time budget.
- ``optimize``: derivative-free maximization, parameter sweeps, random
  placement averaging.
- ``cli``: configuration-driven runs writing CSV tables plus a JSON manifest.
- ``verify``: self-check battery comparing the numeric pipeline against
  independently derived values.
"""

__version__ = "0.1.0"

from .ensemble import (  # noqa: F401
    DUAL_V_SPACING,
    LAMBDA_SPACING,
    EnsembleSpec,
    RandomUniform,
    Regular,
    ResonanceNotFound,
    Scheme,
    analytic_coeffs,
    find_resonance,
    resonance_seed,
    resonance_width,
    spectrum,
    stored_site_coeffs,
)
from .eit import (  # noqa: F401
    EitParams,
    IntegrationError,
    ResolutionError,
    SpinWave,
    WavePacket,
    eit_params,
    eta_eit_analytic,
    gaussian_input,
    retrieve_discrete,
    retrieve_kernel_model,
    store_discrete,
    store_dispersion,
    store_kernel_model,
)
from .fidelity import (  # noqa: F401
    FidelityReport,
    PhotonBSpectrum,
    SpectrumShape,
    TBMode,
    analytic_fidelities,
    evaluate_gate,
    gate_time_budget,
    optimal_params,
)
from .numerics import DEFAULT_SETTINGS, NumericSettings  # noqa: F401
from .sagnac import SagnacGeometry, balanced_geometry, gate_reflections  # noqa: F401
from .tmatrix import (  # noqa: F401
    DegenerateCellWarning,
    DimensionError,
    IllConditionedError,
    atom_matrix,
    cell_power,
    extract_scattering,
    free_matrix,
)
