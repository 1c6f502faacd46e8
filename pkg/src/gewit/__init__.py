"""Geometric entanglement witnesses for bipartite quantum states."""

from .criteria import Label, Verdict, classify, ppt_check, realignment_check
from .matcore import DensityMatrix
from .witness import (
    ShiftFamily,
    find_witness_crossing,
    geometric_operator,
    is_witness,
    min_product_expectation,
    shift_operator,
)

__all__ = [
    "DensityMatrix",
    "Label",
    "ShiftFamily",
    "Verdict",
    "classify",
    "find_witness_crossing",
    "geometric_operator",
    "is_witness",
    "min_product_expectation",
    "ppt_check",
    "realignment_check",
    "shift_operator",
]
