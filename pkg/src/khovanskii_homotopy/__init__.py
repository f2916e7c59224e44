"""Homotopy continuation through toric degenerations given by Khovanskii bases."""
from .homotopies import (
    FlatFamily,
    KhovanskiiInput,
    SolveResult,
    WitnessSet,
    khovanskii_solve,
    linear_section_homotopy,
    polyhedral_solve,
    predicted_root_count,
    square_subsystem,
    toric_components,
    toric_two_step,
    weighted_khovanskii_solve,
    witness_move,
)
from .lattice import hnf, kernel_basis, normalized_volume, no_body_slice, snf
from .poly import HomotopyPolynomial, PolySystem, SparsePolynomial, deform, initial_form
from .toric import MonomialMap, ProjectivePoint, ValuationMatrix
from .tracker import PathResult, SquareHomotopy, TrackerOptions, track

__version__ = "0.1.0"

__all__ = [
    "FlatFamily",
    "HomotopyPolynomial",
    "KhovanskiiInput",
    "MonomialMap",
    "PathResult",
    "PolySystem",
    "ProjectivePoint",
    "SolveResult",
    "SparsePolynomial",
    "SquareHomotopy",
    "TrackerOptions",
    "ValuationMatrix",
    "WitnessSet",
    "deform",
    "hnf",
    "initial_form",
    "kernel_basis",
    "khovanskii_solve",
    "linear_section_homotopy",
    "no_body_slice",
    "normalized_volume",
    "polyhedral_solve",
    "predicted_root_count",
    "snf",
    "square_subsystem",
    "toric_components",
    "toric_two_step",
    "track",
    "weighted_khovanskii_solve",
    "witness_move",
]
