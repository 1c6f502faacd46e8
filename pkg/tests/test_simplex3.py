import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gewit import bloch
from gewit import matcore as mc
from gewit import simplex3 as s3
from gewit import witness as wt

W3 = bloch.weyl_basis(3)
LABELS = [(n, m) for n in range(3) for m in range(3)]


def test_bell_state_d2():
    p = s3.bell_state(2, 0, 0)
    expected = np.zeros((4, 4))
    expected[np.ix_([0, 3], [0, 3])] = 0.5
    np.testing.assert_allclose(p, expected, atol=1e-15)
    with pytest.raises(ValueError):
        s3.bell_state(3, 3, 0)


def test_bell_basis_complete_and_orthogonal():
    ps = [s3.bell_state(3, n, m) for n, m in LABELS]
    np.testing.assert_allclose(sum(ps), np.eye(9), atol=1e-14)
    gram = np.array([[np.trace(a @ b).real for b in ps] for a in ps])
    np.testing.assert_allclose(gram, np.eye(9), atol=1e-14)
    for p in ps:
        np.testing.assert_allclose(mc.partial_trace(p, (3, 3), keep=0), np.eye(3) / 3, atol=1e-15)
        np.testing.assert_allclose(mc.partial_trace(p, (3, 3), keep=1), np.eye(3) / 3, atol=1e-15)


def test_family_state_examples():
    np.testing.assert_allclose(s3.family_state((0, 0, 0)), np.eye(9) / 9, atol=1e-15)
    np.testing.assert_allclose(s3.family_state((1, 0, 0)), s3.bell_state(3, 0, 0), atol=1e-15)
    w = s3.bell_weights((0.2, -0.1, 0.3))
    assert sum(w.values()) == pytest.approx(1)


@settings(max_examples=40, deadline=None)
@given(st.tuples(*[st.floats(-1, 1)] * 3))
def test_family_states_are_locally_maximally_mixed(p):
    rho = s3.family_state(p)
    assert np.trace(rho).real == pytest.approx(1)
    assert mc.is_hermitian(rho)
    dec = bloch.decompose_op(rho, W3, W3)
    assert np.max(np.abs(dec.a)) < 1e-14 and np.max(np.abs(dec.b)) < 1e-14
    back = s3.project_to_family(rho)
    np.testing.assert_allclose(back, p, atol=1e-13)


def test_horodecki_mapping():
    p = s3.horodecki_point(3)
    np.testing.assert_allclose(p, (1 / 7, -2 / 7, -1 / 7))
    np.testing.assert_allclose(s3.horodecki_point(2.5), (1 / 6, -5 / 21, 0), atol=1e-15)
    for b in np.linspace(0, 5, 11):
        assert s3.boundary_plane_residual(s3.horodecki_point(b)) == pytest.approx(0, abs=1e-15)
    for b in (-0.1, 5.1):
        with pytest.raises(ValueError):
            s3.horodecki(b)


@pytest.mark.parametrize("b,ppt", [(0.5, False), (2.0, True), (4.5, False)])
def test_horodecki_ppt_pattern(b, ppt):
    assert (s3.horodecki_ppt_margin(b) >= -1e-10) is ppt


def test_euclid_examples():
    np.testing.assert_allclose(s3.to_euclid((1, 0, 0)), (1, 0, 0))
    np.testing.assert_allclose(s3.to_euclid((0, 0, 1)), (-1 / 8, -np.sqrt(3) / 8, np.sqrt(3) / 4))
    p = (0.3, -0.2, 0.5)
    np.testing.assert_allclose(s3.from_euclid(s3.to_euclid(p)), p, atol=1e-15)


def test_hs_distance_proportional_to_euclid(rng):
    # constant from ||P_00 - 1/9|| = sqrt(8/9) with |E(1,0,0)| = 1
    assert s3.HS_PER_EUCLID == pytest.approx(mc.hs_distance(s3.bell_state(3, 0, 0), np.eye(9) / 9))
    for _ in range(50):
        p, q = rng.uniform(-1, 1, (2, 3))
        ratio = mc.hs_distance(s3.family_state(p), s3.family_state(q)) / np.linalg.norm(
            np.subtract(s3.to_euclid(p), s3.to_euclid(q))
        )
        assert ratio == pytest.approx(s3.HS_PER_EUCLID, abs=1e-9)


def test_reconciliation_log():
    rec = s3.reconcile()
    text = "\n".join(rec.lines())
    assert "ppt1: sense flipped" in text
    assert "ppt2: primary bound" in text and "ppt3: primary bound" in text
    assert "still disagree" not in text
    for name in ("pos1", "pos2", "pos3", "pos4", "re1", "re2", "re3", "re4"):
        r = rec.resolved[name]
        assert r.candidate.primary and r.sense == r.cdef.sense


def test_origin_report():
    rep = s3.constraint_report((0, 0, 0))
    assert rep.is_state and rep.is_ppt and rep.satisfies_realignment and not rep.in_bound_region


def test_ppt_closed_form_on_pyramid_grid():
    ax = np.linspace(-1, 1, 10)
    n = 0
    for p in ((a, b, g) for a in ax for b in ax for g in ax):
        if s3.oracle_min_eig(p) < -1e-10:
            continue
        n += 1
        assert s3.constraint_report(p).is_ppt == (s3.oracle_ppt_margin(p) >= -1e-8), p
    assert n > 20


def test_bound_region_states_are_ppt_and_violate_realignment(rng):
    found = 0
    for _ in range(3000):
        p = s3.FamilyPoint(*rng.uniform([-0.2, -0.6, -1], [0.6, 0.4, 1]))
        if s3.bound_region(p) and s3.oracle_min_eig(p) >= 0:
            found += 1
            assert s3.oracle_ppt_margin(p) >= -1e-10
            assert s3.oracle_realign_sum(p) > 1
    assert found > 10


def test_horodecki_bound_entangled_states_lie_in_bound_region():
    for b in (3.2, 3.5, 3.8):
        assert s3.bound_region(s3.horodecki_point(b))
    assert not s3.bound_region(s3.horodecki_point(2.5))


# -- tangent witnesses -------------------------------------------------------------------


def test_gre_reconciliation_choice():
    chosen, report = s3.gre_reconciliation()
    assert chosen == s3.GreVariant(beta_in_root=True, c_on_first=False)
    by = {v: (ec, et) for v, ec, et, _ in report}
    # the constant 36 under the root breaks |c| = 1
    assert by[s3.GreVariant(False, True)][0] > 1e-3
    assert by[s3.GreVariant(True, True)][1] > 1e-3


@pytest.mark.parametrize("bt,gt", [(0.0, 1 / 3), (-0.3, -0.5), (0.1, 0.8), (-0.2, 0.1)])
def test_g_re_structure(bt, gt):
    g = s3.g_re(bt, gt)
    assert mc.is_hermitian(g, 1e-14)
    form = bloch.svo_witness(bloch.witness_form(g, W3, W3))
    assert np.max(np.abs(form.r)) < 1e-12 and np.max(np.abs(form.t)) < 1e-12
    np.testing.assert_allclose(form.s, np.ones(8), atol=1e-9)
    p = s3.tangent_point(bt, gt)
    assert np.trace(g @ s3.family_state(p)).real == pytest.approx(0, abs=1e-12)


def test_g_re_tangent_to_surface():
    bt, gt = -0.1, 0.2
    g = s3.g_re(bt, gt)
    vals = []
    for b in np.linspace(-0.6, 0.4, 41):
        for c in np.linspace(-1, 1, 41):
            p = s3.tangent_point(b, c)
            vals.append(np.trace(g @ s3.family_state(p)).real)
    assert min(vals) >= -1e-6
    assert np.trace(g @ s3.family_state(s3.tangent_point(bt, gt))).real == pytest.approx(0, abs=1e-12)


def test_g_re_detects_states_above_its_plane(rng):
    n = 0
    for _ in range(3000):
        p = s3.FamilyPoint(*rng.uniform([-0.2, -0.6, -1], [0.6, 0.4, 1]))
        if not (s3.bound_region(p) and s3.oracle_min_eig(p) >= 0):
            continue
        try:
            g = s3.g_re(p.beta, p.gamma)
        except s3.DomainError:
            continue
        n += 1
        assert np.trace(g @ s3.family_state(p)).real < 0
    assert n > 10


def test_g_re_domain_errors():
    with pytest.raises(s3.DomainError):
        s3.g_re(-2 / 9, 0.0)
    samples = s3.default_tangent_samples()
    assert 100 < len(samples) <= 441


# -- kernel polytope -------------------------------------------------------------------------


KERNEL = {
    1: (0, 0, 1),
    2: (-1 / 12, 1 / 3, 0),
    3: (1 / 3, 2 / 3, 0),
    4: (2 / 9, -2 / 9, 0),
    5: (-1 / 3, -2 / 3, -1),
}


def test_kernel_vertices():
    kv = s3.kernel_vertices()
    for k, v in KERNEL.items():
        np.testing.assert_allclose(kv[k], v, atol=1e-12)
    for k in (2, 3, 4):
        assert s3.oracle_ppt_margin(kv[k]) == pytest.approx(0, abs=1e-12)
    for k in (1, 5):
        assert s3.boundary_plane_residual(kv[k]) == pytest.approx(0, abs=1e-12)
        assert s3.oracle_realign_sum(kv[k]) == pytest.approx(1, abs=1e-12)
        assert s3.oracle_ppt_margin(kv[k]) >= -1e-12


def test_pyramid_vertices():
    verts = sorted(tuple(np.round(v, 12)) for v in s3.pyramid_vertices())
    assert verts == sorted([(1, 0, 0), (0, 1, 0), (0, 0, 1), (-1 / 3, -2 / 3, -1)]) or len(verts) == 4
    for v in s3.pyramid_vertices():
        assert s3.oracle_min_eig(v) == pytest.approx(0, abs=1e-12)


@pytest.mark.parametrize("name", s3.POLYGON_NAMES)
def test_polygon_operator(name):
    g = s3.polygon_ops()[name]
    np.testing.assert_array_equal(g, mc.dag(g))
    form = bloch.svo_witness(bloch.witness_form(g, W3, W3))
    np.testing.assert_allclose(np.sort(form.s), [1, 1, 1, 1, 1, 1, 2, 2], atol=1e-9)
    kv = s3.kernel_vertices()
    for k in s3.POLYGON_FACES[name]:
        assert np.trace(g @ s3.family_state(kv[k])).real == pytest.approx(0, abs=1e-12)
    for k in set(kv) - set(s3.POLYGON_FACES[name]):
        assert np.trace(g @ s3.family_state(kv[k])).real > 0
    # same plane from three vertices through the generic construction
    face = s3.face_operator([kv[k] for k in s3.POLYGON_FACES[name]])
    ratio = mc.hs_inner(face, g).real / mc.hs_inner(g, g).real
    np.testing.assert_allclose(face, ratio * g, atol=1e-12)
    assert ratio > 0


def test_polygon_operator_regression():
    # see-saw minimum, frozen: -1/84 (S = -11/8)
    opt = wt.min_product_expectation(s3.polygon_ops()["u+"], (3, 3))
    assert opt.value == pytest.approx(-1 / 84, abs=1e-12)
    assert opt.s_min == pytest.approx(-11 / 8, abs=1e-10)


def test_projection_preserves_separability(rng):
    for _ in range(30):
        psi = np.kron(mc.random_unit_vector(3, rng), mc.random_unit_vector(3, rng))
        p = s3.project_to_family(mc.pure_state(psi))
        assert s3.oracle_min_eig(p) >= -1e-12
        assert s3.oracle_ppt_margin(p) >= -1e-12
        assert s3.oracle_realign_sum(p) <= 1 + 1e-12


def test_plane_normal_shift_geometry():
    g = s3.polygon_ops()["u+"]
    rho, rho_tilde = s3.plane_normal_shift(g)
    assert np.trace(g @ rho_tilde).real == pytest.approx(0, abs=1e-12)
    assert np.trace(g @ rho).real < 0
    assert s3.oracle_min_eig(s3.project_to_family(rho)) == pytest.approx(0, abs=1e-9)
    with pytest.raises(ValueError):
        s3.plane_normal_shift(-g)


def test_inside_out_u_plus():
    t = s3.inside_out(s3.polygon_ops()["u+"], "u+")
    assert t.on_boundary(1e-3)
    assert 0 < t.lam < 1
