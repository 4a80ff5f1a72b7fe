"""Python access to the isoclock core."""

from importlib import resources
import os

from ._core import (
    DomainError,
    Error,
    FitError,
    NotFoundError,
    ParseError,
    Registry,
    ScenarioError,
    estimate_age,
    exp_divided_difference,
    memoryless_test,
    purity,
    required_shots,
    run_scenario,
    solve_chain,
    stages_required,
)


def default_registry():
    """Loads $ISOCLOCK_NUCLIDES if set, otherwise the bundled nuclides.dat."""
    path = os.environ.get("ISOCLOCK_NUCLIDES")
    if path:
        return Registry.from_file(path)
    return Registry.from_text(resources.files(__name__).joinpath("data/nuclides.dat").read_text())


__all__ = [
    "DomainError", "Error", "FitError", "NotFoundError", "ParseError", "Registry", "ScenarioError",
    "default_registry", "estimate_age", "exp_divided_difference", "memoryless_test", "purity",
    "required_shots", "run_scenario", "solve_chain", "stages_required",
]
