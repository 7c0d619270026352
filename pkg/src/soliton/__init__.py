from . import (
    asymptotic_atlas,
    compact_shooter,
    env,
    exceptions,
    flow_engine,
    kahler_closed_form,
    phase_core,
    reference_solutions,
    runner,
    schema,
    series_boundary,
)

__all__ = [
    "asymptotic_atlas",
    "compact_shooter",
    "env",
    "exceptions",
    "flow_engine",
    "kahler_closed_form",
    "phase_core",
    "reference_solutions",
    "runner",
    "schema",
    "series_boundary",
]
