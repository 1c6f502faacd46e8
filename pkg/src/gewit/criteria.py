"""PPT and realignment criteria and the combined classification verdict."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

import numpy as np

from . import matcore as mc

PPT_TOL = 1e-10
REALIGN_TOL = 1e-10
WITNESS_VALUE_TOL = 1e-10


class Label(str, Enum):
    INVALID_STATE = "INVALID_STATE"
    NPT_ENTANGLED = "NPT_ENTANGLED"
    BOUND_ENTANGLED = "BOUND_ENTANGLED"
    PPT_UNDECIDED = "PPT_UNDECIDED"
    SEPARABLE_ASSERTED = "SEPARABLE_ASSERTED"


@dataclass(frozen=True)
class Verdict:
    label: Label
    ppt_margin: float | None = None
    realignment_sum: float | None = None
    witness_values: tuple = ()
    min_eigenvalue: float | None = None
    evidence: tuple = field(default=())

    def to_json(self) -> dict:
        return {
            "label": self.label.value,
            "ppt_margin": self.ppt_margin,
            "realignment_sum": self.realignment_sum,
            "witness_values": list(self.witness_values),
        }


def _as_state(rho, dims) -> mc.DensityMatrix:
    if isinstance(rho, mc.DensityMatrix):
        return rho
    if dims is None:
        raise ValueError("dims are required for a bare matrix")
    return mc.DensityMatrix(rho, dims)


def ppt_check(rho, dims=None) -> float:
    """Smallest eigenvalue of the partial transpose; PPT iff ``>= -PPT_TOL``."""
    st = _as_state(rho, dims).validate()
    return mc.min_eigenvalue(mc.partial_transpose(st.mat, st.dims))


def realignment_check(rho, dims=None) -> float:
    """Trace norm of the realigned matrix; a value above ``1 + REALIGN_TOL`` proves entanglement."""
    st = _as_state(rho, dims).validate()
    return mc.realignment_sum(st.mat, st.dims)


def classify(
    rho,
    dims=None,
    witnesses: Sequence[np.ndarray] | None = None,
    separable_assertion: bool = False,
) -> Verdict:
    """Combine positivity, PPT, realignment and optional witnesses into a label.

    Separability is never inferred; ``separable_assertion`` lets the caller
    supply an external certificate for a PPT state that no test flags.
    """
    st = _as_state(rho, dims)
    m = st.mat
    if not mc.is_hermitian(m) or abs(np.trace(m) - 1.0) > mc.TRACE_TOL:
        return Verdict(Label.INVALID_STATE, evidence=(("hermitian/trace", float("nan")),))
    lam = mc.min_eigenvalue(m)
    if lam < -mc.POSITIVITY_TOL:
        return Verdict(Label.INVALID_STATE, min_eigenvalue=lam, evidence=(("min_eigenvalue", lam),))

    ppt = mc.min_eigenvalue(mc.partial_transpose(m, st.dims))
    rsum = mc.realignment_sum(m, st.dims)
    wvals = tuple(float(np.real(np.trace(np.asarray(w) @ m))) for w in (witnesses or ()))
    evidence = [("min_eigenvalue", lam), ("ppt_margin", ppt), ("realignment_excess", rsum - 1.0)]
    evidence += [(f"witness[{i}]", v) for i, v in enumerate(wvals)]

    if ppt < -PPT_TOL:
        label = Label.NPT_ENTANGLED
    elif rsum > 1.0 + REALIGN_TOL or any(v < -WITNESS_VALUE_TOL for v in wvals):
        label = Label.BOUND_ENTANGLED
    elif separable_assertion:
        label = Label.SEPARABLE_ASSERTED
    else:
        label = Label.PPT_UNDECIDED
    return Verdict(label, ppt, rsum, wvals, lam, tuple(evidence))
