"""The three-parameter family of two-qutrit Bell-state mixtures.

    rho(alpha, beta, gamma) = (1 - alpha - beta - gamma)/9 * 1 + alpha P_00
                              + beta/2 (P_10 + P_20) + gamma/3 (P_01 + P_11 + P_21)

Closed-form constraint surfaces (positivity, PPT, realignment) are kept as
candidate formulas with an inequality sense. :func:`reconcile` fixes, once,
which candidate and which sense agree with the numerical criteria, and keeps
a log of every deviation from the primary form.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, NamedTuple

import numpy as np

from . import matcore as mc
from .bloch import weyl_operator

log = logging.getLogger(__name__)

D = 3
DIMS = (3, 3)
SQ3 = np.sqrt(3.0)


class DomainError(ValueError):
    pass


class FamilyPoint(NamedTuple):
    alpha: float
    beta: float
    gamma: float


class EuclidPoint(NamedTuple):
    a: float
    b: float
    c: float


# -- Bell states ---------------------------------------------------------------


def phi_plus(d: int) -> np.ndarray:
    v = np.zeros(d * d, dtype=complex)
    v[[j * d + j for j in range(d)]] = 1 / np.sqrt(d)
    return v


def bell_state(d: int, n: int, m: int) -> np.ndarray:
    """``P_nm = (U_nm (x) 1) |phi+><phi+| (U_nm^dagger (x) 1)``."""
    if not (0 <= n < d and 0 <= m < d):
        raise ValueError(f"Bell index ({n}, {m}) out of range for d={d}")
    v = np.kron(weyl_operator(n, m, d), np.eye(d)) @ phi_plus(d)
    return np.outer(v, np.conj(v))


@lru_cache(maxsize=None)
def _bell3() -> dict:
    out = {(n, m): bell_state(3, n, m) for n in range(3) for m in range(3)}
    for p in out.values():
        p.setflags(write=False)
    return out


def weyl_pair(l: int, m: int) -> np.ndarray:
    """``U_lm (x) U_{-l,m}`` for d = 3."""
    return np.kron(weyl_operator(l, m, D), weyl_operator(-l, m, D))


@lru_cache(maxsize=None)
def _weyl_sums() -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    u1 = sum(weyl_pair(l, m) for l, m in [(0, 1), (0, 2), (1, 1), (1, 2), (2, 1), (2, 2)])
    return u1, weyl_pair(1, 0), weyl_pair(2, 0)


def u1_u2():
    """``(U_1, U_2^I, U_2^II)`` as 9 x 9 matrices."""
    return _weyl_sums()


# -- the family --------------------------------------------------------------------

# classes of Bell labels sharing one weight in the family
_CLASSES = {
    "alpha": [(0, 0)],
    "beta": [(1, 0), (2, 0)],
    "gamma": [(0, 1), (1, 1), (2, 1)],
    "rest": [(0, 2), (1, 2), (2, 2)],
}


def bell_weights(p) -> dict:
    """Bell-state weights ``q_nm`` of a family point (they sum to one)."""
    a, b, g = (float(x) for x in p)
    r = (1 - a - b - g) / 9
    q = {}
    for lab in _CLASSES["alpha"]:
        q[lab] = a + r
    for lab in _CLASSES["beta"]:
        q[lab] = b / 2 + r
    for lab in _CLASSES["gamma"]:
        q[lab] = g / 3 + r
    for lab in _CLASSES["rest"]:
        q[lab] = r
    return q


def family_state(p) -> np.ndarray:
    a, b, g = (float(x) for x in p)
    bell = _bell3()
    out = (1 - a - b - g) / 9 * np.eye(9, dtype=complex)
    out = out + a * bell[0, 0] + b / 2 * (bell[1, 0] + bell[2, 0])
    out = out + g / 3 * (bell[0, 1] + bell[1, 1] + bell[2, 1])
    return out


def project_to_family(op) -> FamilyPoint:
    """Orthogonal (Hilbert-Schmidt) projection of a unit-trace operator onto the family.

    Bell weights are averaged over each class of the family; this is the
    composition of the Bell-diagonal twirl with local symmetries of the
    simplex, so separable inputs land on separable family states.
    """
    op = mc.as_cmat(op)
    bell = _bell3()
    avg = {k: np.mean([np.real(np.trace(bell[lab] @ op)) for lab in labs]) for k, labs in _CLASSES.items()}
    r = avg["rest"]
    return FamilyPoint(avg["alpha"] - r, 2 * (avg["beta"] - r), 3 * (avg["gamma"] - r))


# -- Euclidean picture ---------------------------------------------------------------

_TO_EUCLID = np.array(
    [
        [1.0, -1 / 8, -1 / 8],
        [0.0, 3 * SQ3 / 8, -SQ3 / 8],
        [0.0, 0.0, SQ3 / 4],
    ]
)
_FROM_EUCLID = np.linalg.inv(_TO_EUCLID)

# ||rho(p) - rho(q)||_HS = HS_PER_EUCLID * |E(p) - E(q)|
HS_PER_EUCLID = float(np.sqrt(8.0) / 3.0)


def to_euclid(p) -> EuclidPoint:
    return EuclidPoint(*(_TO_EUCLID @ np.asarray(p, dtype=float)))


def from_euclid(e) -> FamilyPoint:
    return FamilyPoint(*(_FROM_EUCLID @ np.asarray(e, dtype=float)))


# -- closed-form constraints ------------------------------------------------------------


def delta_ppt(b, g):
    return 4 + 9 * b * b + 4 * g - 7 * g * g - 6 * b * (2 + g)


def delta1_sq(b, g):
    return 4 + 36 * b + 81 * b * b - 12 * g - 54 * b * g + 33 * g * g


def delta2_sq(b, g):
    return 4 - 36 * b + 81 * b * b + 12 * g - 54 * b * g + 33 * g * g


def _sqrt0(x):
    # the realignment discriminants are nonnegative (minimum 0); clip rounding
    return np.sqrt(max(float(x), 0.0))


def _ppt_root(sign: float, with_gamma: bool) -> Callable:
    def bound(a, b, g):
        dl = delta_ppt(b, g)
        shift = -g if with_gamma else 0.0
        if dl < 0:
            # no real root: no alpha satisfies the pair; report a negative
            # margin of the size of the imaginary part
            return None, -3 * np.sqrt(-dl) / 16
        return (-2 + 11 * b + shift + sign * 3 * np.sqrt(dl)) / 16, None

    return bound


def _plain(fn: Callable) -> Callable:
    return lambda a, b, g: (fn(b, g), None)


@dataclass(frozen=True)
class Candidate:
    formula: str
    bound: Callable
    primary: bool


@dataclass(frozen=True)
class ConstraintDef:
    name: str
    group: str
    sense: str  # primary sense, "<=" or ">="
    candidates: tuple


CONSTRAINTS = (
    ConstraintDef("pos1", "positivity", "<=", (Candidate("7/2 b + 1 - g", _plain(lambda b, g: 3.5 * b + 1 - g), True),)),
    ConstraintDef("pos2", "positivity", "<=", (Candidate("-b + 1 - g", _plain(lambda b, g: -b + 1 - g), True),)),
    ConstraintDef("pos3", "positivity", "<=", (Candidate("-b + 1 + 2g", _plain(lambda b, g: -b + 1 + 2 * g), True),)),
    ConstraintDef("pos4", "positivity", ">=", (Candidate("b/8 - 1/8 + g/8", _plain(lambda b, g: b / 8 - 1 / 8 + g / 8), True),)),
    ConstraintDef("ppt1", "ppt", "<=", (Candidate("-b - 1/2 + g/2", _plain(lambda b, g: -b - 0.5 + 0.5 * g), True),)),
    ConstraintDef(
        "ppt2",
        "ppt",
        "<=",
        (
            Candidate("(-2 + 11b + 3 sqrt(Delta))/16", _ppt_root(+1, False), True),
            Candidate("(-2 + 11b - g + 3 sqrt(Delta))/16", _ppt_root(+1, True), False),
        ),
    ),
    ConstraintDef(
        "ppt3",
        "ppt",
        ">=",
        (
            Candidate("(-2 + 11b - 3 sqrt(Delta))/16", _ppt_root(-1, False), True),
            Candidate("(-2 + 11b - g - 3 sqrt(Delta))/16", _ppt_root(-1, True), False),
        ),
    ),
    ConstraintDef("re1", "realign", "<=", (Candidate("(6 + 11b - g - D1)/16", _plain(lambda b, g: (6 + 11 * b - g - _sqrt0(delta1_sq(b, g))) / 16), True),)),
    ConstraintDef("re2", "realign", "<=", (Candidate("(6 + 11b - g + D1)/16", _plain(lambda b, g: (6 + 11 * b - g + _sqrt0(delta1_sq(b, g))) / 16), True),)),
    ConstraintDef("re3", "realign", ">=", (Candidate("(-6 + 11b - g - D2)/16", _plain(lambda b, g: (-6 + 11 * b - g - _sqrt0(delta2_sq(b, g))) / 16), True),)),
    ConstraintDef("re4", "realign", ">=", (Candidate("(-6 + 11b - g + D2)/16", _plain(lambda b, g: (-6 + 11 * b - g + _sqrt0(delta2_sq(b, g))) / 16), True),)),
)

GROUPS = ("positivity", "ppt", "realign")


@dataclass(frozen=True)
class Resolved:
    cdef: ConstraintDef
    candidate: Candidate
    sense: str

    @property
    def name(self) -> str:
        return self.cdef.name

    def margin(self, p) -> float:
        a, b, g = (float(x) for x in p)
        rhs, forced = self.candidate.bound(a, b, g)
        if forced is not None:
            return float(forced)
        return float(rhs - a) if self.sense == "<=" else float(a - rhs)

    def describe(self) -> str:
        return f"alpha {self.sense} {self.candidate.formula}"


def _flip(sense: str) -> str:
    return ">=" if sense == "<=" else "<="


# -- numerical oracles -----------------------------------------------------------------


def oracle_min_eig(p) -> float:
    return mc.min_eigenvalue(family_state(p))


def oracle_ppt_margin(p) -> float:
    return mc.min_eigenvalue(mc.partial_transpose(family_state(p), DIMS))


def oracle_realign_sum(p) -> float:
    return mc.realignment_sum(family_state(p), DIMS)


def oracle_verdicts(p, tol: float = 1e-8) -> dict:
    return {
        "positivity": oracle_min_eig(p) >= -tol,
        "ppt": oracle_ppt_margin(p) >= -tol,
        "realign": oracle_realign_sum(p) <= 1 + tol,
    }


@dataclass
class ReconciliationLog:
    resolved: dict
    entries: list = field(default_factory=list)
    samples: int = 0

    def group(self, name: str) -> list:
        return [r for r in self.resolved.values() if r.cdef.group == name]

    def lines(self) -> list[str]:
        return list(self.entries)


def _sample_points(n: int, rng: np.random.Generator, states_only: bool) -> list:
    pts = []
    while len(pts) < n:
        p = FamilyPoint(*rng.uniform(-1, 1, 3))
        if states_only and oracle_min_eig(p) < -1e-12:
            continue
        pts.append(p)
    return pts


def _reconcile_group(defs, points, oracle, tol) -> tuple[list, list]:
    options = []
    for cdef in defs:
        opts = []
        for cand in cdef.candidates:
            for sense in (cdef.sense, _flip(cdef.sense)):
                r = Resolved(cdef, cand, sense)
                # a constraint of a necessary-and-sufficient set must hold on
                # every point the oracle accepts
                if all(r.margin(p) >= -tol for p, ok in zip(points, oracle) if ok):
                    opts.append(r)
        if not opts:
            raise RuntimeError(f"no candidate of {cdef.name} is consistent with the oracle")
        options.append(opts)
    best, best_bad = None, None
    for combo in itertools.product(*options):
        bad = sum(
            (min(r.margin(p) for r in combo) >= -tol) != ok for p, ok in zip(points, oracle)
        )
        if best_bad is None or bad < best_bad:
            best, best_bad = combo, bad
        if bad == 0:
            break
    return list(best), [best_bad]


@lru_cache(maxsize=None)
def reconcile(n: int = 400, seed: int = 7, tol: float = 1e-9) -> ReconciliationLog:
    """Fix the formula variant and sense of every closed-form constraint.

    Positivity constraints are compared with the minimum eigenvalue of the
    family matrix on points of the box ``[-1, 1]^3``; PPT and realignment
    constraints with the partial-transpose spectrum and the realigned trace
    norm on valid states. Primary forms and senses are preferred.
    """
    rng = np.random.default_rng(seed)
    box = _sample_points(n, rng, states_only=False)
    states = _sample_points(n, rng, states_only=True)
    oracles = {
        "positivity": (box, [oracle_min_eig(p) >= -tol for p in box]),
        "ppt": (states, [oracle_ppt_margin(p) >= -tol for p in states]),
        "realign": (states, [oracle_realign_sum(p) <= 1 + tol for p in states]),
    }
    resolved, entries = {}, []
    for group in GROUPS:
        defs = [c for c in CONSTRAINTS if c.group == group]
        pts, ok = oracles[group]
        chosen, (bad,) = _reconcile_group(defs, pts, ok, tol)
        for r in chosen:
            resolved[r.name] = r
            if not r.candidate.primary:
                first = next(c for c in r.cdef.candidates if c.primary)
                entries.append(f"{r.name}: primary bound {first.formula} replaced by {r.candidate.formula}")
            if r.sense != r.cdef.sense:
                entries.append(f"{r.name}: sense flipped from {r.cdef.sense} to {r.sense}")
        if bad:
            entries.append(f"{group}: {bad} of {len(pts)} sample points still disagree with the oracle")
    for line in entries:
        log.info("reconcile: %s", line)
    return ReconciliationLog(resolved, entries, n)


@dataclass(frozen=True)
class ConstraintReport:
    point: FamilyPoint
    positivity: tuple
    ppt_closed: tuple
    realign_closed: tuple
    in_bound_region: bool

    @property
    def is_state(self) -> bool:
        return min(self.positivity) >= -1e-8

    @property
    def is_ppt(self) -> bool:
        return min(self.ppt_closed) >= -1e-8

    @property
    def satisfies_realignment(self) -> bool:
        return min(self.realign_closed) >= -1e-8


def _margins(p, group: str, rec: ReconciliationLog) -> tuple:
    return tuple(r.margin(p) for r in rec.group(group))


def positivity_check(p, rec: ReconciliationLog | None = None) -> tuple:
    return _margins(p, "positivity", rec or reconcile())


def ppt_closed_form(p, rec: ReconciliationLog | None = None) -> tuple:
    return _margins(p, "ppt", rec or reconcile())


def realign_closed_form(p, rec: ReconciliationLog | None = None) -> tuple:
    return _margins(p, "realign", rec or reconcile())


def bound_region(p, rec: ReconciliationLog | None = None, tol: float = 1e-12) -> bool:
    """Region of PPT states exposed by the realignment criterion.

    Bounded by the first positivity plane, the upper PPT root and the first
    realignment surface (approached from the violating side).
    """
    rec = rec or reconcile()
    return (
        rec.resolved["pos1"].margin(p) >= -tol
        and rec.resolved["ppt2"].margin(p) >= -tol
        and rec.resolved["re1"].margin(p) < -tol
    )


def constraint_report(p, rec: ReconciliationLog | None = None) -> ConstraintReport:
    rec = rec or reconcile()
    p = FamilyPoint(*p)
    return ConstraintReport(
        p,
        positivity_check(p, rec),
        ppt_closed_form(p, rec),
        realign_closed_form(p, rec),
        bound_region(p, rec),
    )


# -- realignment surface and its tangent witnesses -----------------------------------------


def realign_surface_alpha(beta: float, gamma: float) -> float:
    """``alpha`` on the realignment surface that bounds the bound-entangled region."""
    return (6 + 11 * beta - gamma - _sqrt0(delta1_sq(beta, gamma))) / 16


@dataclass(frozen=True)
class GreVariant:
    """One variant of the tangent-witness formula.

    ``beta_in_root``: the constant under the root is ``36 beta_t`` rather
    than ``36``. ``c_on_first``: the coefficient ``c`` multiplies ``U_2^I``
    (otherwise ``U_2^II``, with ``c*`` on the other term).
    """

    beta_in_root: bool
    c_on_first: bool


GRE_VARIANTS = (
    GreVariant(False, True),
    GreVariant(True, True),
    GreVariant(False, False),
    GreVariant(True, False),
)


def g_re_coefficients(beta_t: float, gamma_t: float, variant: GreVariant | None = None) -> tuple[float, complex]:
    v = variant or resolved_gre_variant()
    root_arg = (
        4 + (36 * beta_t if v.beta_in_root else 36) + 81 * beta_t**2 - 12 * gamma_t - 54 * beta_t * gamma_t + 33 * gamma_t**2
    )
    if root_arg < -1e-12:
        raise DomainError(f"negative root argument at beta={beta_t}, gamma={gamma_t}")
    dc = _sqrt0(root_arg)
    x = 2 + 9 * beta_t
    denom = x * x - 6 * x * gamma_t + 36 * gamma_t**2
    if denom <= 1e-12:
        raise DomainError("tangent point at the tip of the realignment cone")
    a = (-2 - 9 * beta_t + 3 * gamma_t + 3 * dc) / 36
    if a <= 1e-12:
        raise DomainError(f"non-positive prefactor a={a}")
    c = (9 * gamma_t**2 + (-2 - 9 * beta_t + 3 * gamma_t) * dc + 1j * SQ3 * gamma_t * (2 + 9 * beta_t - 3 * gamma_t + 3 * dc)) / denom
    return float(a), complex(c)


def _weyl_witness(a: float, u1_sign: float, c: complex, c_on_first: bool) -> np.ndarray:
    u1, u2i, u2ii = u1_u2()
    first, second = (c, np.conj(c)) if c_on_first else (np.conj(c), c)
    g = a * (2 * np.eye(9) + u1_sign * u1 + first * u2i + second * u2ii)
    # the pairing of c with c* makes g Hermitian; remove phase rounding
    return 0.5 * (g + mc.dag(g))


def g_re_raw(beta_t: float, gamma_t: float, variant: GreVariant) -> np.ndarray:
    a, c = g_re_coefficients(beta_t, gamma_t, variant)
    return _weyl_witness(a, -1.0, c, variant.c_on_first)


def g_re(beta_t: float, gamma_t: float) -> np.ndarray:
    """Witness whose plane touches the realignment surface at ``(alpha_t, beta_t, gamma_t)``."""
    return g_re_raw(beta_t, gamma_t, resolved_gre_variant())


def tangent_point(beta_t: float, gamma_t: float) -> FamilyPoint:
    return FamilyPoint(realign_surface_alpha(beta_t, gamma_t), beta_t, gamma_t)


def _linear_form(op) -> np.ndarray:
    """Coefficients ``(k0, k_alpha, k_beta, k_gamma)`` of ``Tr(op rho(p))``."""
    f0 = np.real(np.trace(op @ family_state((0, 0, 0))))
    return np.array([f0] + [np.real(np.trace(op @ family_state(e))) - f0 for e in np.eye(3)])


def _surface_gradient(beta: float, gamma: float, h: float = 1e-6) -> np.ndarray:
    """Gradient of ``alpha_surface(beta, gamma) - alpha`` by central differences."""
    fb = (realign_surface_alpha(beta + h, gamma) - realign_surface_alpha(beta - h, gamma)) / (2 * h)
    fg = (realign_surface_alpha(beta, gamma + h) - realign_surface_alpha(beta, gamma - h)) / (2 * h)
    return np.array([-1.0, fb, fg])


def gre_variant_errors(variant: GreVariant, samples) -> tuple[float, float]:
    """Worst deviation of ``|c|`` from one and worst tangency residual over samples."""
    worst_c, worst_t = 0.0, 0.0
    for bt, gt in samples:
        a, c = g_re_coefficients(bt, gt, variant)
        worst_c = max(worst_c, abs(abs(c) - 1))
        form = _linear_form(g_re_raw(bt, gt, variant))
        p = tangent_point(bt, gt)
        value = form[0] + form[1:] @ np.asarray(p)
        grad = _surface_gradient(bt, gt)
        k = form[1:]
        # parallel with the same orientation: Tr(G rho) grows into the surface's allowed side
        cos = k @ grad / (np.linalg.norm(k) * np.linalg.norm(grad))
        worst_t = max(worst_t, abs(value) / np.linalg.norm(k), 1 - cos)
    return worst_c, worst_t


def default_tangent_samples(nb: int = 21, ng: int = 21) -> list[tuple[float, float]]:
    out = []
    for bt in np.linspace(-0.4, 0.2, nb):
        for gt in np.linspace(-1, 1, ng):
            try:
                g_re_coefficients(bt, gt, GreVariant(True, True))
            except DomainError:
                continue
            out.append((float(bt), float(gt)))
    return out


@lru_cache(maxsize=None)
def gre_reconciliation(tol: float = 1e-6) -> tuple[GreVariant, tuple]:
    samples = default_tangent_samples(7, 7)
    report = []
    chosen = None
    for v in GRE_VARIANTS:
        try:
            ec, et = gre_variant_errors(v, samples)
        except DomainError as exc:
            report.append((v, float("inf"), float("inf"), str(exc)))
            continue
        report.append((v, ec, et, ""))
        if chosen is None and ec <= tol and et <= tol:
            chosen = v
    if chosen is None:
        raise RuntimeError("no variant of the tangent-witness formula is unimodular and tangent")
    return chosen, tuple(report)


def resolved_gre_variant() -> GreVariant:
    return gre_reconciliation()[0]


# -- kernel-polygon operators ------------------------------------------------------------------

POLYGON_NAMES = ("u+", "u-", "d+", "d-")


def polygon_ops() -> dict[str, np.ndarray]:
    """Operators of the four non-trivial faces of the kernel polytope.

    ``a = 1/63``, ``c = -1 +- sqrt(3) i``; ``u`` faces carry ``-U_1``, ``d``
    faces ``+U_1``. The phase placement of ``c`` follows the same
    convention as :func:`g_re`.
    """
    v = resolved_gre_variant()
    out = {}
    for name in POLYGON_NAMES:
        u1_sign = -1.0 if name[0] == "u" else 1.0
        c = complex(-1, SQ3 if name[1] == "+" else -SQ3)
        out[name] = _weyl_witness(1 / 63, u1_sign, c, v.c_on_first)
    return out


# -- Horodecki states ---------------------------------------------------------------------------


def horodecki_point(b: float) -> FamilyPoint:
    if not 0 <= b <= 5:
        raise ValueError(f"Horodecki parameter b={b} outside [0, 5]")
    return FamilyPoint((6 - b) / 21, -2 * b / 21, (5 - 2 * b) / 7)


def horodecki(b: float) -> tuple[FamilyPoint, np.ndarray]:
    p = horodecki_point(b)
    return p, family_state(p)


def horodecki_ppt_margin(b: float) -> float:
    return mc.min_eigenvalue(mc.partial_transpose(horodecki(b)[1], DIMS))


def horodecki_ppt_edges(tol: float = 1e-8, coarse: int = 12) -> list[float]:
    """Values of ``b`` where the numeric PPT margin changes sign, by bracketing and bisection."""
    from scipy.optimize import brentq

    # 12 nodes keep the coarse grid off the expected edges
    bs = np.linspace(0, 5, coarse)
    vals = [horodecki_ppt_margin(b) for b in bs]
    edges = []
    for b0, b1, v0, v1 in zip(bs[:-1], bs[1:], vals[:-1], vals[1:]):
        if v0 * v1 < 0:
            edges.append(float(brentq(horodecki_ppt_margin, b0, b1, xtol=tol)))
    return edges


def boundary_plane_residual(p) -> float:
    """``7/2 beta + 1 - gamma - alpha``; zero on the plane holding the Horodecki line."""
    a, b, g = p
    return 3.5 * b + 1 - g - a


# -- kernel polytope -------------------------------------------------------------------------------


def pyramid_vertices(rec: ReconciliationLog | None = None) -> list[FamilyPoint]:
    """Vertices of the positivity region (intersections of three face planes)."""
    rec = rec or reconcile()
    planes = []
    for r in rec.group("positivity"):
        # alpha = rhs(beta, gamma) is affine: recover its coefficients
        f = lambda b, g, r=r: r.candidate.bound(0.0, b, g)[0]
        c0 = f(0, 0)
        planes.append((np.array([1.0, -(f(1, 0) - c0), -(f(0, 1) - c0)]), c0))
    verts = []
    for (n1, c1), (n2, c2), (n3, c3) in itertools.combinations(planes, 3):
        m = np.array([n1, n2, n3])
        if abs(np.linalg.det(m)) < 1e-12:
            continue
        p = FamilyPoint(*np.linalg.solve(m, [c1, c2, c3]))
        if min(positivity_check(p, rec)) >= -1e-9:
            verts.append(p)
    return verts


def _gamma0_ppt_corners(rec: ReconciliationLog) -> list[FamilyPoint]:
    """Corners of the PPT states of the plane ``gamma = 0`` by root finding."""
    from scipy.optimize import brentq

    res = rec.group("positivity") + rec.group("ppt")

    def rhs(r, b):
        val, forced = r.candidate.bound(0.0, b, 0.0)
        return np.nan if forced is not None else val

    betas = np.linspace(-1.0, 1.0, 4001)
    cands = []
    for r1, r2 in itertools.combinations(res, 2):
        diff = np.array([rhs(r1, b) - rhs(r2, b) for b in betas])
        for i in range(len(betas) - 1):
            d0, d1 = diff[i], diff[i + 1]
            if not (np.isfinite(d0) and np.isfinite(d1)):
                continue
            if d0 == 0:
                roots = [betas[i]]
            elif d0 * d1 < 0:
                roots = [brentq(lambda b: rhs(r1, b) - rhs(r2, b), betas[i], betas[i + 1], xtol=1e-15)]
            else:
                continue
            for b in roots:
                p = FamilyPoint(rhs(r1, b), b, 0.0)
                if min(r.margin(p) for r in res) >= -1e-9:
                    cands.append(p)
    from scipy.spatial import ConvexHull

    pts = []
    for p in cands:
        q = np.array([p.beta, p.alpha])
        if all(np.linalg.norm(q - r) > 1e-9 for r in pts):
            pts.append(q)
    pts = np.array(pts)
    hull = ConvexHull(pts)
    return [FamilyPoint(pts[i][1], pts[i][0], 0.0) for i in hull.vertices]


def _on_segment(p, pts, tol: float = 1e-8) -> bool:
    x = np.asarray(p)
    for q, r in itertools.combinations([np.asarray(v) for v in pts if v is not p], 2):
        d = r - q
        t = (x - q) @ d / (d @ d)
        if -tol < t < 1 + tol and np.linalg.norm(q + t * d - x) < tol:
            return True
    return False


@lru_cache(maxsize=None)
def kernel_vertices() -> dict[int, FamilyPoint]:
    """Default vertices 1..5 of the kernel polytope (asserted separable).

    Candidates are the corners of the PPT region at ``gamma = 0`` and the
    pyramid vertices at ``gamma = +-1`` on the Horodecki boundary plane; the
    five vertices of their convex hull are numbered 1 (gamma = +1),
    2 (gamma = 0 on the lower positivity face), 3 (the remaining gamma = 0
    vertex off the boundary plane), 4 (gamma = 0 on the boundary plane) and
    5 (gamma = -1).
    """
    from scipy.spatial import ConvexHull

    rec = reconcile()
    apex = [p for p in pyramid_vertices(rec) if abs(abs(p.gamma) - 1) < 1e-9 and abs(boundary_plane_residual(p)) < 1e-9]
    cands = _gamma0_ppt_corners(rec) + apex
    arr = np.array([list(p) for p in cands])
    hull = ConvexHull(arr)
    verts = [FamilyPoint(*arr[i]) for i in sorted(hull.vertices)]
    # qhull keeps points lying on an edge; drop them
    verts = [p for p in verts if not _on_segment(p, verts)]
    if len(verts) != 5:
        raise RuntimeError(f"kernel polytope has {len(verts)} vertices, expected 5")
    top = next(p for p in verts if p.gamma > 0.5)
    bottom = next(p for p in verts if p.gamma < -0.5)
    mid = [p for p in verts if abs(p.gamma) < 1e-9]
    on_plane = next(p for p in mid if abs(boundary_plane_residual(p)) < 1e-9)
    on_lower = next(p for p in mid if p is not on_plane and abs(rec.resolved["pos4"].margin(p)) < 1e-9)
    rest = next(p for p in mid if p is not on_plane and p is not on_lower)
    return {1: top, 2: on_lower, 3: rest, 4: on_plane, 5: bottom}


POLYGON_FACES = {"u+": (1, 3, 4), "u-": (3, 4, 5), "d+": (1, 2, 3), "d-": (2, 3, 5)}


def face_operator(points) -> np.ndarray:
    """Geometric operator of the plane through three family points.

    The plane's positive side contains the maximally mixed state. Built as
    ``rho_a - rho_b - <rho_a, rho_a - rho_b> 1`` with ``rho_a`` the foot of
    the perpendicular from the maximally mixed state and ``rho_b`` on the
    far side.
    """
    e = [np.asarray(to_euclid(p)) for p in points]
    normal = np.cross(e[1] - e[0], e[2] - e[0])
    normal /= np.linalg.norm(normal)
    origin = np.zeros(3)
    dist = normal @ (e[0] - origin)
    if dist < 0:
        normal, dist = -normal, -dist
    foot = origin + dist * normal
    beyond = foot + normal
    rho_a = family_state(from_euclid(foot))
    rho_b = family_state(from_euclid(beyond))
    return rho_a - rho_b - mc.hs_inner(rho_a, rho_a - rho_b).real * np.eye(9)


def plane_normal_shift(G) -> tuple[np.ndarray, np.ndarray]:
    """Shift family endpoints for pushing the plane of ``G`` outward.

    Returns ``(rho, rho_tilde)``: ``rho_tilde`` is the family point on the
    plane closest to the maximally mixed state, ``rho`` the point where the
    outward normal ray leaves the positivity pyramid.
    """
    G = mc.as_cmat(G)
    form = _linear_form(G)
    k0, k = form[0], form[1:]
    # Euclidean picture: Tr(G rho(p)) = k0 + k.p with p = from_euclid(E)
    ke = _FROM_EUCLID.T @ k
    # plane k0 + ke.E = 0; the maximally mixed state (E = 0) has value k0 > 0
    if k0 <= 0:
        raise ValueError("maximally mixed state is not on the positive side of the plane")
    n = -ke / np.linalg.norm(ke)
    foot = n * (k0 / np.linalg.norm(ke))
    lo, hi = 0.0, 10.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        p = from_euclid(foot + mid * n)
        if min(positivity_check(p)) >= 0:
            lo = mid
        else:
            hi = mid
    rho_tilde = family_state(from_euclid(foot))
    rho = family_state(from_euclid(foot + lo * n))
    return rho, rho_tilde


# -- inside-out tangency ------------------------------------------------------------------------


@dataclass(frozen=True)
class Tangency:
    """Outcome of pushing a plane outward until it becomes a witness.

    ``touch`` is the family projection of the product state that attains
    the see-saw minimum at the first witness position; ``boundary_gap`` is
    the smallest absolute closed-form margin there and ``overshoot`` the
    largest violation of any margin (both in units of ``alpha``).
    """

    name: str
    lam: float
    touch: FamilyPoint
    boundary_gap: float
    overshoot: float
    crossing: object

    def on_boundary(self, tol: float = 1e-3) -> bool:
        return self.boundary_gap <= tol and self.overshoot <= tol


def inside_out(G, name: str = "", tol: float = 1e-6, restarts: int = 32, seed: int = 42) -> Tangency:
    from . import witness as wt

    rho, rho_tilde = plane_normal_shift(G)
    fam = wt.ShiftFamily(rho, rho_tilde, DIMS)
    cr = wt.find_witness_crossing(fam, "inside_out", tol=tol, restarts=restarts, seed=seed)
    touch = project_to_family(cr.upper_check.optimum.state)
    rep = constraint_report(touch)
    margins = rep.positivity + rep.ppt_closed + rep.realign_closed
    gap = min(abs(m) for m in margins)
    over = max(0.0, -min(margins))
    return Tangency(name, cr.lam, FamilyPoint(*(float(x) for x in touch)), float(gap), float(over), cr)
