"""Situation-aware sensor-module configuration for a four-corner-module vehicle."""

from .application import ModuleActivation, ModuleState, apply_mlam
from .attention import (
    MLAM,
    REGIONS,
    Directional,
    Lateral,
    LayerId,
    Region,
    Situation,
    activate_layers,
    build_mlam,
    layer_regions,
)
from .configuration import (
    Candidate,
    ConfigurationForest,
    Fixture,
    ModuleDescriptor,
    QuadrantLayout,
    Relation,
    build_forest,
    load_fixture,
    optimize,
    prune_forest,
)
from .power import (
    EnergyReport,
    PowerModel,
    PowerSampleSet,
    calibrate_from_trip,
    day_scenario,
    integrate_energy,
    load_samples,
    module_power,
    summarize_samples,
)
from .route import (
    ManeuverTimeline,
    SimulationTrace,
    generate_reference_route,
    load_timeline,
    maneuver_distribution,
    run_simulation,
)

__version__ = "0.1.0"
