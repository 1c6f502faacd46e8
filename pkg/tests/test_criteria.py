import numpy as np
import pytest

from gewit import criteria
from gewit import matcore as mc
from gewit import simplex3 as s3
from gewit import witness as wt
from gewit.criteria import Label


def test_ppt_margin_of_phi_plus():
    phi = s3.bell_state(3, 0, 0)
    assert criteria.ppt_check(phi, (3, 3)) == pytest.approx(-1 / 3)
    assert criteria.realignment_check(phi, (3, 3)) == pytest.approx(3)
    assert criteria.classify(phi, (3, 3)).label is Label.NPT_ENTANGLED


def test_checks_validate_input():
    with pytest.raises(ValueError):
        criteria.ppt_check(np.eye(9), (3, 3))
    with pytest.raises(ValueError):
        criteria.realignment_check(np.eye(9) / 9)


def test_invalid_states():
    assert criteria.classify(np.eye(9) / 8, (3, 3)).label is Label.INVALID_STATE
    neg = s3.family_state((1.0, 1.0, 0.0))
    v = criteria.classify(neg, (3, 3))
    assert v.label is Label.INVALID_STATE and v.min_eigenvalue < 0
    assert criteria.classify(np.triu(np.ones((4, 4))) / 4, (2, 2)).label is Label.INVALID_STATE


def test_maximally_mixed_is_undecided_unless_asserted():
    v = criteria.classify(mc.DensityMatrix(np.eye(9) / 9, (3, 3)))
    assert v.label is Label.PPT_UNDECIDED and v.ppt_margin > 0
    assert criteria.classify(np.eye(9) / 9, (3, 3), separable_assertion=True).label is Label.SEPARABLE_ASSERTED


def test_witness_evidence_gives_bound_label():
    p, rho = s3.horodecki(3.5)
    g = s3.g_re(p.beta, p.gamma)
    v = criteria.classify(rho, (3, 3), witnesses=[g])
    assert v.label is Label.BOUND_ENTANGLED
    assert v.witness_values[0] < 0


def test_verdict_json():
    obj = criteria.classify(np.eye(4) / 4, (2, 2)).to_json()
    assert set(obj) == {"label", "ppt_margin", "realignment_sum", "witness_values"}
    assert obj["label"] == "PPT_UNDECIDED"


def _npt_witness(rho, dims):
    pt = mc.partial_transpose(rho, dims)
    w, v = np.linalg.eigh(pt)
    return mc.partial_transpose(np.outer(v[:, 0], v[:, 0].conj()), dims)


def test_two_qubit_npt_iff_witness_exists():
    rng = np.random.default_rng(3)
    n_npt = 0
    for i in range(1000):
        rho = mc.random_density_matrix(4, rng, rank=int(rng.integers(1, 5)))
        v = criteria.classify(rho, (2, 2))
        # PPT states of two qubits are separable, so no criterion may flag them
        assert v.label in (Label.NPT_ENTANGLED, Label.PPT_UNDECIDED)
        if v.label is Label.NPT_ENTANGLED:
            n_npt += 1
            if n_npt <= 60:
                w = _npt_witness(rho, (2, 2))
                assert np.trace(w @ rho).real < 0
                assert wt.is_witness(w, (2, 2), restarts=8).is_witness
        else:
            assert v.realignment_sum <= 1 + 1e-10
    assert 0 < n_npt < 1000
