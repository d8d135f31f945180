"""Post-search analytics: fANOVA importance and plot-ready exports."""

from .exports import (
    contour_export,
    importance_frame,
    save_frame,
    save_importance,
    scatter_export,
    slice_export,
    trajectory_export,
    trials_frame,
)
from .fanova import FanovaTree, fanova_importance

__all__ = [
    "FanovaTree",
    "contour_export",
    "fanova_importance",
    "importance_frame",
    "save_frame",
    "save_importance",
    "scatter_export",
    "slice_export",
    "trajectory_export",
    "trials_frame",
]
