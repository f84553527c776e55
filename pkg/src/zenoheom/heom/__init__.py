"""Hierarchical equations of motion for a system linearly coupled to a Gaussian bath."""

from .generator import (
    LINK_PAIRINGS,
    HeomGenerator,
    build_finite_T_generator,
    build_generator,
    build_zero_T_generator,
)
from .layout import HierarchyLayout, layout_size
from .propagate import (
    HierarchyState,
    TrajectoryStats,
    auto_dt,
    check_step,
    converge_in_depth,
    evolve,
    reduced_state,
    trajectory,
)

__all__ = [
    "LINK_PAIRINGS",
    "HeomGenerator",
    "HierarchyLayout",
    "HierarchyState",
    "TrajectoryStats",
    "auto_dt",
    "build_finite_T_generator",
    "build_generator",
    "build_zero_T_generator",
    "check_step",
    "converge_in_depth",
    "evolve",
    "layout_size",
    "reduced_state",
    "trajectory",
]
