"""Resonances of hyperbolic flows from periodic-orbit data.

Zeta functions, exact resonance lattices, argument-principle localisation,
trace-formula checks and strip counts for suspensions of toral automorphisms,
linear horseshoes and Morse-Smale flows.
"""
__version__ = "0.1.0"

from .counting import CountReport, count_in_strip, growth_fit, growth_ratio, strip_count_report
from .exceptions import (
    AccuracyDomainExceeded,
    ConfigError,
    ContourTooClose,
    DivergentRegion,
    HorizonTooShort,
    IncompleteSource,
    InsufficientData,
    LocalizationMismatch,
    MissingPrimitiveData,
    NoConvergence,
    NonHyperbolic,
    NonIntegerResidue,
    NotHyperbolic,
    NumericalGuardError,
    ResLabError,
    ValidationError,
    ZeroMapResonance,
)
from .orbits import (
    FixedPointDatum,
    OrbitIterate,
    PeriodClass,
    PrimitiveOrbit,
    det_factor,
    geometric_term,
    iterate_weight,
)
from .resonances import (
    ClosedOrbitLattice,
    FixedPointLattice,
    MapResonanceSet,
    Provenance,
    Resonance,
    ResonanceSet,
    SuspensionLattice,
    UnionLattice,
    WindowSpec,
    count_zeros_argument_principle,
    exact_fixed_point_lattice,
    exact_morse_smale_closed_orbit,
    exact_suspension_lattice,
    locate_resonances,
    morse_smale_union,
    refine_newton,
    system_lattice,
)
from .systems import (
    ExplicitOrbits,
    HorseshoeSuspension,
    MorseSmale,
    PeriodicOrbitData,
    ToralSuspension,
    assemble_morse_smale,
    horseshoe_orbits,
    orbit_data,
    toral_fixed_point_count,
    toral_suspension_period_classes,
)
from .trace import BumpSpec, TraceReport, bump_fourier, bump_value, geometric_side, spectral_side, trace_check
from .zeta import (
    AnalyticFunction,
    ZetaEvaluation,
    ZetaFunction,
    abscissa_estimate,
    product_form_zeta1,
    ruelle_zeta,
    zeta1,
    zeta1_log_derivative,
)
