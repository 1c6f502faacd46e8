"""Geometric operators, product-state minimization and the shift method."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Literal

import numpy as np

from . import matcore as mc

log = logging.getLogger(__name__)

WITNESS_TOL = 1e-8
OPTIMAL_TOL = 1e-6
DEFAULT_RESTARTS = 32
DEFAULT_SEED = 42


@dataclass(frozen=True)
class GeometricOperator:
    """``G = rho1 - rho2 - <rho1, rho1 - rho2> 1``.

    The hyperplane ``Tr(rho G) = 0`` passes through ``rho1`` and is orthogonal
    to ``rho1 - rho2``; ``rho2`` lies on the negative side.
    """

    rho1: np.ndarray
    rho2: np.ndarray
    G: np.ndarray

    @property
    def distance_sq(self) -> float:
        return mc.hs_distance(self.rho1, self.rho2) ** 2


def geometric_operator(rho1, rho2, tol: float = 1e-12) -> GeometricOperator:
    rho1 = mc.as_cmat(rho1)
    rho2 = mc.as_cmat(rho2)
    if rho1.shape != rho2.shape:
        raise ValueError("states have different dimensions")
    diff = rho1 - rho2
    if mc.hs_norm(diff) <= tol:
        raise ValueError("geometric operator needs two distinct states")
    g = diff - mc.hs_inner(rho1, diff).real * np.eye(rho1.shape[0])
    return GeometricOperator(rho1, rho2, g)


# -- minimization over pure product states -----------------------------------


@dataclass(frozen=True)
class ProductOptimum:
    psi: np.ndarray
    phi: np.ndarray
    value: float
    s_min: float
    restarts_used: int
    converged: bool
    history: tuple = field(default=(), repr=False)

    @property
    def state(self) -> np.ndarray:
        return mc.pure_state(np.kron(self.psi, self.phi))


def _lowest_vectors(k: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # batched LAPACK solve of the (R, d, d) partial operators; see decisions
    w, v = np.linalg.eigh(k)
    return w[:, 0], v[:, :, 0]


def min_product_expectation(
    C,
    dims: tuple[int, int],
    restarts: int = DEFAULT_RESTARTS,
    seed: int = DEFAULT_SEED,
    max_iter: int = 2000,
    tol: float = 1e-12,
) -> ProductOptimum:
    """Minimize ``<psi phi| C |psi phi>`` over unit vectors by see-saw.

    Each half-step replaces one party's vector with the lowest eigenvector of
    the operator obtained by contracting ``C`` with the other party's vector,
    so the objective never increases. All restarts run as one batch; the best
    final value wins. ``s_min`` is ``value / e - 1`` with ``e = Tr C / D``
    (``nan`` when ``e <= 0``).
    """
    C = mc.as_cmat(C)
    da, db = int(dims[0]), int(dims[1])
    if C.shape != (da * db, da * db):
        raise ValueError(f"operator shape {C.shape} does not match dims {dims}")
    if not mc.is_hermitian(C, 1e-10 * max(1.0, float(np.max(np.abs(C))))):
        raise ValueError("operator is not Hermitian")
    C = 0.5 * (C + mc.dag(C))
    t = C.reshape(da, db, da, db)
    rng = np.random.default_rng(seed)
    r = max(1, int(restarts))
    phi = rng.normal(size=(r, db)) + 1j * rng.normal(size=(r, db))
    phi /= np.linalg.norm(phi, axis=1, keepdims=True)

    values = np.full(r, np.inf)
    active = np.ones(r, dtype=bool)
    history = []
    psi = np.zeros((r, da), dtype=complex)
    for _ in range(max_iter):
        # K_phi[i, k] = sum_{b, d} conj(phi_b) C[ib, kd] phi_d
        k_a = np.einsum("rb,ibkd,rd->rik", np.conj(phi), t, phi)
        _, psi = _lowest_vectors(k_a)
        k_b = np.einsum("ri,ibkd,rk->rbd", np.conj(psi), t, psi)
        new, phi = _lowest_vectors(k_b)
        if history and np.any(new > values + 1e-12 * (1 + np.abs(values))):
            raise RuntimeError("see-saw objective increased")
        delta = np.abs(values - new)
        values = new
        history.append(float(values.min()))
        active = delta > tol
        if not np.any(active):
            break
    best = int(np.argmin(values))
    value = float(values[best])
    e = float(np.trace(C).real) / (da * db)
    s_min = value / e - 1.0 if e > 0 else float("nan")
    return ProductOptimum(
        psi[best].copy(), phi[best].copy(), value, s_min, r, not bool(np.any(active)), tuple(history)
    )


@dataclass(frozen=True)
class WitnessCheck:
    is_witness: bool
    optimal: bool
    detecting: bool
    relative_min: float
    optimum: ProductOptimum


def is_witness(
    C,
    dims: tuple[int, int],
    restarts: int = DEFAULT_RESTARTS,
    seed: int = DEFAULT_SEED,
    tol: float = WITNESS_TOL,
) -> WitnessCheck:
    """Test the separability condition on pure product states.

    The see-saw minimum is compared against ``-tol`` after dividing by the
    Hilbert-Schmidt norm of ``C``, which makes the verdict invariant under
    positive rescaling. ``detecting`` is true when ``C`` has a negative
    eigenvalue (some state gives ``Tr C rho < 0``); ``optimal`` additionally
    requires the minimum to sit within ``OPTIMAL_TOL`` of zero.
    """
    C = mc.as_cmat(C)
    opt = min_product_expectation(C, dims, restarts=restarts, seed=seed)
    scale = mc.hs_norm(C)
    rel = opt.value / scale if scale > 0 else 0.0
    witness = rel >= -tol
    detecting = mc.min_eigenvalue(0.5 * (C + mc.dag(C))) < -tol * scale
    optimal = witness and detecting and abs(rel) <= OPTIMAL_TOL
    return WitnessCheck(bool(witness), bool(optimal), bool(detecting), float(rel), opt)


# -- shift method ---------------------------------------------------------------


@dataclass(frozen=True)
class ShiftFamily:
    """States ``rho_lambda = lambda rho + (1 - lambda) rho_tilde``."""

    rho: np.ndarray
    rho_tilde: np.ndarray
    dims: tuple[int, int]

    def __post_init__(self):
        if mc.hs_distance(self.rho, self.rho_tilde) <= 1e-12:
            raise ValueError("degenerate shift family: rho equals rho_tilde")

    def state(self, lam: float) -> np.ndarray:
        return lam * np.asarray(self.rho) + (1.0 - lam) * np.asarray(self.rho_tilde)


def shift_operator(family: ShiftFamily, lam: float) -> GeometricOperator:
    """``G_lambda`` built from ``(rho_lambda, rho)``; defined for ``0 <= lambda < 1``."""
    if not 0.0 <= lam < 1.0:
        raise ValueError(f"lambda={lam} outside [0, 1)")
    return geometric_operator(family.state(lam), family.rho)


@dataclass(frozen=True)
class Crossing:
    """Result of a bisection along a shift family.

    ``lower`` is the largest probed parameter whose operator is not a
    witness, ``upper`` the smallest one that is. In outside-in mode every
    ``rho_lambda`` with ``lambda > upper`` is certified entangled; in
    inside-out mode the crossing marks the optimal-witness position.
    ``upper_open`` records that ``lambda = 1`` itself is never probed.
    """

    mode: str
    lam: float
    lower: float
    upper: float
    iterations: int
    trace: tuple
    upper_check: WitnessCheck
    upper_open: bool = True


def find_witness_crossing(
    family: ShiftFamily,
    mode: Literal["outside_in", "inside_out"] = "outside_in",
    tol: float = 1e-6,
    restarts: int = DEFAULT_RESTARTS,
    seed: int = DEFAULT_SEED,
    max_iter: int = 80,
    lam_max: float = 1.0 - 1e-6,
    check: Callable | None = None,
) -> Crossing:
    """Bisect on ``lambda`` for the switch of ``G_lambda`` into a witness.

    Both modes bracket the same event; they differ in interpretation (see
    :class:`Crossing`). Raises ``ValueError`` when the witness status does not
    change between ``lambda = 0`` and ``lam_max``. The upper probe stays away
    from one: when ``rho`` is a pure product state the relative minimum of
    ``G_lambda`` shrinks like ``1 - lambda`` and would fall inside the witness
    tolerance.
    """
    if mode not in ("outside_in", "inside_out"):
        raise ValueError(f"unknown mode {mode!r}")

    def probe(lam: float) -> WitnessCheck:
        g = shift_operator(family, lam).G
        if check is not None:
            return check(g)
        return is_witness(g, family.dims, restarts=restarts, seed=seed)

    lo, hi = 0.0, lam_max
    at_lo, at_hi = probe(lo), probe(hi)
    trace = [(lo, at_lo.relative_min, at_lo.is_witness), (hi, at_hi.relative_min, at_hi.is_witness)]
    if at_lo.is_witness == at_hi.is_witness:
        raise ValueError(
            f"no change of witness status on [0, {lam_max}] "
            f"(both endpoints {'are' if at_lo.is_witness else 'are not'} witnesses)"
        )
    if at_lo.is_witness:
        raise ValueError("witness at lambda=0 but not near 1; the family is oriented the wrong way")
    n = 0
    while hi - lo > tol and n < max_iter:
        mid = 0.5 * (lo + hi)
        res = probe(mid)
        trace.append((mid, res.relative_min, res.is_witness))
        if res.is_witness:
            hi, at_hi = mid, res
        else:
            lo = mid
        n += 1
    log.debug("crossing bracket [%g, %g] after %d probes", lo, hi, n)
    return Crossing(mode, 0.5 * (lo + hi), lo, hi, n, tuple(trace), at_hi)
