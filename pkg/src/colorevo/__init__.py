"""Simulation and IB-style efficiency analysis of evolving color naming systems."""

from .grid import (
    Chip,
    ChipGrid,
    MeaningModel,
    build_meaning_model,
    default_grid,
    load_chip_grid,
    perceptual_distance_sq,
)
from .ib import (
    IBCurve,
    IBPoint,
    NamingSystem,
    accuracy,
    analyze,
    complexity,
    default_beta_schedule,
    fit_tradeoff,
    gnid,
    ib_frontier,
    inefficiency_epsilon,
    min_gnid_to_set,
    mode_map,
    mutual_information,
)

__all__ = [
    "Chip",
    "ChipGrid",
    "MeaningModel",
    "build_meaning_model",
    "default_grid",
    "load_chip_grid",
    "perceptual_distance_sq",
    "IBCurve",
    "IBPoint",
    "NamingSystem",
    "accuracy",
    "analyze",
    "complexity",
    "default_beta_schedule",
    "fit_tradeoff",
    "gnid",
    "ib_frontier",
    "inefficiency_epsilon",
    "min_gnid_to_set",
    "mode_map",
    "mutual_information",
]

__version__ = "0.1.0"
