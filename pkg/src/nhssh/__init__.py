"""Thermodynamics, topology, and entanglement of non-reciprocal SSH chains."""

__version__ = "0.1.0"

from .errors import (
    NhsshError,
    ExceptionalCoupling,
    DefectiveMatrix,
    AmbiguousFilling,
    GapClosed,
    OnCriticalLine,
    ComplexLeakage,
    NonPositiveTemperature,
    StepTooLarge,
    WindowTooNarrow,
    InsufficientSizes,
    NoPeaksFound,
)
from .lattice import (
    Boundary,
    MatrixKind,
    ModelParams,
    HamiltonianMatrix,
    MomentumGrid,
    build_realspace,
    build_bloch,
    bloch_dispersion,
    momentum_deformation,
    build_surrogate,
    surrogate_dispersion,
    gauged_obc_matrix,
    obc_spectrum,
    bulk_spectrum,
    surrogate_band_distance,
)
from .eig import EigSystem, eig_general, occupied_indices
from .topology import (
    CriticalDeltas,
    PhasePoint,
    winding_hermitian,
    winding_surrogate,
    critical_deltas,
    classify_phase,
)
from .thermo import (
    grand_potential,
    grand_potential_T0,
    entropy,
    heat_capacity,
    HillDecomposition,
    hill_split,
    ThermoCurve,
    thermo_curve,
    CentralChargeFit,
    fit_central_charge_cv,
    DerivativeScan,
    delta_derivative_scan,
    ItcReport,
    itc_scan,
)
from .entanglement import (
    correlation_matrix,
    cut_sites,
    subsystem_spectrum,
    entanglement_entropy,
    EntanglementResult,
    entanglement_result,
    direct_entanglement_result,
    ee_vs_delta,
    ScalingFit,
    ee_scaling_fit,
)

__all__ = [
    "__version__",
    "NhsshError",
    "ExceptionalCoupling",
    "DefectiveMatrix",
    "AmbiguousFilling",
    "GapClosed",
    "OnCriticalLine",
    "ComplexLeakage",
    "NonPositiveTemperature",
    "StepTooLarge",
    "WindowTooNarrow",
    "InsufficientSizes",
    "NoPeaksFound",
    "Boundary",
    "MatrixKind",
    "ModelParams",
    "HamiltonianMatrix",
    "MomentumGrid",
    "build_realspace",
    "build_bloch",
    "bloch_dispersion",
    "momentum_deformation",
    "build_surrogate",
    "surrogate_dispersion",
    "gauged_obc_matrix",
    "obc_spectrum",
    "bulk_spectrum",
    "surrogate_band_distance",
    "EigSystem",
    "eig_general",
    "occupied_indices",
    "CriticalDeltas",
    "PhasePoint",
    "winding_hermitian",
    "winding_surrogate",
    "critical_deltas",
    "classify_phase",
    "grand_potential",
    "grand_potential_T0",
    "entropy",
    "heat_capacity",
    "HillDecomposition",
    "hill_split",
    "ThermoCurve",
    "thermo_curve",
    "CentralChargeFit",
    "fit_central_charge_cv",
    "DerivativeScan",
    "delta_derivative_scan",
    "ItcReport",
    "itc_scan",
    "correlation_matrix",
    "cut_sites",
    "subsystem_spectrum",
    "entanglement_entropy",
    "EntanglementResult",
    "entanglement_result",
    "direct_entanglement_result",
    "ee_vs_delta",
    "ScalingFit",
    "ee_scaling_fit",
]
