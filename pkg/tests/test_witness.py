import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gewit import bloch
from gewit import matcore as mc
from gewit import simplex3 as s3
from gewit import witness as wt

MIXED = np.eye(9) / 9


def test_geometric_operator_example():
    g = wt.geometric_operator(MIXED, s3.bell_state(3, 0, 0))
    assert np.trace(s3.bell_state(3, 0, 0) @ g.G).real == pytest.approx(-8 / 9)
    assert np.trace(MIXED @ g.G).real == pytest.approx(0, abs=1e-15)
    assert g.distance_sq == pytest.approx(8 / 9)


def test_geometric_operator_rejects_equal_states():
    with pytest.raises(ValueError):
        wt.geometric_operator(MIXED, MIXED.copy())
    with pytest.raises(ValueError):
        wt.geometric_operator(MIXED, np.eye(4) / 4)


def test_hyperplane_is_orthogonal(rng):
    r1, r2 = mc.random_density_matrix(9, rng), mc.random_density_matrix(9, rng)
    g = wt.geometric_operator(r1, r2)
    # a traceless X orthogonal to rho1 - rho2 moves along the plane
    x = mc.random_hermitian(9, rng)
    x -= np.trace(x) / 9 * np.eye(9)
    diff = r1 - r2
    x -= mc.hs_inner(diff, x).real / mc.hs_inner(diff, diff).real * diff
    on_plane = r1 + 1e-3 * x
    assert np.trace(on_plane @ g.G).real == pytest.approx(0, abs=1e-12)
    assert mc.hs_inner(on_plane - r1, r1 - r2).real == pytest.approx(0, abs=1e-12)


def test_seesaw_identity_operator():
    opt = wt.min_product_expectation(np.eye(9), (3, 3))
    assert opt.value == pytest.approx(1)
    assert opt.s_min == pytest.approx(0)
    res = wt.is_witness(np.eye(9), (3, 3))
    assert res.is_witness and not res.detecting and not res.optimal


def test_seesaw_value_is_direct_evaluation(rng):
    c = mc.random_hermitian(9, rng)
    opt = wt.min_product_expectation(c, (3, 3), restarts=8)
    assert np.trace(opt.state @ c).real == pytest.approx(opt.value, abs=1e-12)
    assert np.linalg.norm(opt.psi) == pytest.approx(1) and np.linalg.norm(opt.phi) == pytest.approx(1)
    assert all(b <= a + 1e-12 for a, b in zip(opt.history, opt.history[1:]))


def test_seesaw_rejects_bad_input(rng):
    with pytest.raises(ValueError):
        wt.min_product_expectation(np.triu(np.ones((9, 9))), (3, 3))
    with pytest.raises(ValueError):
        wt.min_product_expectation(np.eye(9), (2, 2))


def test_seesaw_is_deterministic(rng):
    c = mc.random_hermitian(9, rng)
    a = wt.min_product_expectation(c, (3, 3), seed=5)
    b = wt.min_product_expectation(c, (3, 3), seed=5)
    assert a.value == b.value


def test_seesaw_product_operator_exact(rng):
    # for C = A (x) B with A, B > 0 the minimum is the product of smallest eigenvalues
    a = mc.random_density_matrix(3, rng)
    b = mc.random_density_matrix(3, rng)
    opt = wt.min_product_expectation(np.kron(a, b), (3, 3))
    assert opt.value == pytest.approx(np.linalg.eigvalsh(a)[0] * np.linalg.eigvalsh(b)[0], abs=1e-12)


def test_witness_of_swap_like_operator():
    # the partial transpose of a maximally entangled projector is a witness but not positive
    v = s3.phi_plus(3)
    w = mc.partial_transpose(np.outer(v, v.conj()), (3, 3))
    res = wt.is_witness(w, (3, 3))
    assert res.is_witness and res.detecting


def test_witness_scale_invariance(rng):
    for op in (s3.polygon_ops()["u+"], s3.g_re(0.0, 1 / 3), mc.random_hermitian(9, rng)):
        base = wt.is_witness(op, (3, 3)).is_witness
        for k in (1e-3, 7.0, 1e3):
            assert wt.is_witness(k * op, (3, 3)).is_witness == base


def test_g_re_example_is_optimal():
    res = wt.is_witness(s3.g_re(0.0, 1 / 3), (3, 3))
    assert res.is_witness and res.optimal
    assert abs(res.optimum.value) < 1e-8


def test_singular_value_bound_implies_seesaw_nonnegative(rng):
    w3 = bloch.weyl_basis(3)
    hits = 0
    for _ in range(15):
        c = rng.normal(size=(8, 8)) + 1j * rng.normal(size=(8, 8))
        c = c / np.linalg.norm(c, 2) * rng.uniform(0.3, 1.0)
        dec = bloch.OpDecomp(2.0, np.zeros(8), np.zeros(8), c, w3, w3)
        op = dec.reconstruct()
        op = 0.5 * (op + mc.dag(op))
        form = bloch.svo_witness(bloch.witness_form(op, w3, w3))
        if bloch.singular_value_bound(form):
            hits += 1
            assert wt.min_product_expectation(op, (3, 3), restarts=8).value >= -1e-8
    assert hits > 0


def _family(rng):
    return wt.ShiftFamily(mc.random_density_matrix(9, rng), mc.random_density_matrix(9, rng), (3, 3))


def test_shift_operator_identities(rng):
    fam = _family(rng)
    dist = mc.hs_distance(fam.rho, fam.rho_tilde) ** 2
    for lam in (0.0, 0.3, 0.9):
        g = wt.shift_operator(fam, lam).G
        assert np.trace(fam.state(lam) @ g).real == pytest.approx(0, abs=1e-13)
        assert np.trace(fam.rho @ g).real == pytest.approx(-((1 - lam) ** 2) * dist, abs=1e-13)
    np.testing.assert_allclose(wt.shift_operator(fam, 0.0).G, wt.geometric_operator(fam.rho_tilde, fam.rho).G)
    with pytest.raises(ValueError):
        wt.shift_operator(fam, 1.0)
    with pytest.raises(ValueError):
        wt.shift_operator(fam, -0.1)


def test_degenerate_family():
    with pytest.raises(ValueError):
        wt.ShiftFamily(MIXED, MIXED.copy(), (3, 3))


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(0, 0.99), st.floats(0, 1))
def test_shift_expectation_identity(seed, lam_i, lam):
    fam = _family(np.random.default_rng(seed))
    g = wt.shift_operator(fam, lam_i).G
    dist = mc.hs_distance(fam.rho, fam.rho_tilde) ** 2
    lhs = np.trace(fam.state(lam) @ g).real
    assert lhs == pytest.approx((lam_i - lam) * (1 - lam_i) * dist, abs=1e-10)


def test_outside_in_from_npt_horodecki():
    fam = wt.ShiftFamily(s3.horodecki(0.0)[1], MIXED, (3, 3))
    cr = wt.find_witness_crossing(fam, "outside_in", tol=1e-4)
    assert 0 < cr.lam < 1
    assert cr.upper - cr.lower <= 1e-4
    assert cr.upper_check.is_witness and cr.upper_open
    # the state just past the crossing is detected by the witness found there
    g = wt.shift_operator(fam, cr.upper).G
    assert np.trace(fam.state(min(1.0, cr.upper + 0.05)) @ g).real < 0


def test_crossing_errors():
    with pytest.raises(ValueError):
        wt.find_witness_crossing(wt.ShiftFamily(s3.horodecki(0.0)[1], MIXED, (3, 3)), "sideways")
    # no status change: both ends are separable-side planes through a product state
    prod = mc.pure_state(np.kron([1, 0, 0], [1, 0, 0]))
    fam = wt.ShiftFamily(prod, MIXED, (3, 3))
    with pytest.raises(ValueError):
        wt.find_witness_crossing(fam, "outside_in")


def test_brute_force_two_qubit_small(rng):
    pauli = bloch.pauli_basis()
    c = rng.normal(size=(3, 3)) * 0.5
    op = np.eye(4) + sum(c[i, j] * np.kron(pauli.units[i], pauli.units[j]) for i in range(3) for j in range(3))
    # min over m of 1 + n.c.m is 1 - |c^T n|: minimise over the sphere
    th, ph = np.meshgrid(np.linspace(0, np.pi, 100), np.linspace(0, 2 * np.pi, 200))
    n = np.stack([np.sin(th) * np.cos(ph), np.sin(th) * np.sin(ph), np.cos(th)], -1).reshape(-1, 3)
    grid_min = np.min(1 - np.linalg.norm(n @ c, axis=1))
    opt = wt.min_product_expectation(op, (2, 2))
    assert opt.value <= grid_min + 1e-12
    assert opt.value == pytest.approx(1 - np.linalg.svd(c, compute_uv=False)[0], abs=1e-10)
