"""Gradient-scheme elasticity toolkit."""

from ._gse import (  # noqa: F401
    BackendSpec,
    CellKind,
    ConvergenceRow,
    GradientDiscretisation,
    IsoTensor4,
    Mesh,
    check_law,
    convergence_study,
    indicators,
    solve_case,
    study_csv,
    unit_square,
)

__all__ = [
    "BackendSpec",
    "CellKind",
    "ConvergenceRow",
    "GradientDiscretisation",
    "IsoTensor4",
    "Mesh",
    "check_law",
    "convergence_study",
    "indicators",
    "solve_case",
    "study_csv",
    "unit_square",
]
