"""Bloch decompositions of bipartite operators in orthogonal operator bases.

An operator basis for one party is ``{1, A_1, ..., A_{d^2-1}}`` with traceless
units obeying ``Tr A_i^dagger A_j = N delta_ij``. The units need not be
Hermitian (the Weyl operators are not), so every coefficient is extracted with
the adjoint, ``x_i = Tr(A_i^dagger X) / N``.

A Hermitian operator with positive identity part is written as

    C = delta * (mu * 1 + sum_i a~_i A_i (x) 1 + sum_j b~_j 1 (x) B_j
                 + sum_ij c~_ij A_i (x) B_j),     mu = sqrt((dA-1)(dB-1)),

and its expectation in a product state with Bloch vectors ``n``, ``m`` is
``delta * mu * (1 + S(n, m))``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import matcore as mc

ORTHO_TOL = 1e-10


@dataclass(frozen=True)
class OperatorBasis:
    """Traceless orthogonal units of a single-party operator basis."""

    d: int
    units: np.ndarray  # shape (d^2 - 1, d, d)
    norm: float
    labels: tuple = field(default=())

    def __post_init__(self):
        u = np.asarray(self.units, dtype=complex)
        if u.shape != (self.d * self.d - 1, self.d, self.d):
            raise ValueError(f"expected {self.d * self.d - 1} units of size {self.d}, got {u.shape}")
        u.setflags(write=False)
        object.__setattr__(self, "units", u)

    def __len__(self) -> int:
        return self.units.shape[0]

    @property
    def scale(self) -> float:
        """Bloch-vector scale ``f = sqrt(d(d-1)/N)`` of a single-party state."""
        return float(np.sqrt(self.d * (self.d - 1) / self.norm))

    def gram(self) -> np.ndarray:
        """Matrix of ``Tr A_i^dagger A_j``."""
        return np.einsum("iab,jab->ij", np.conj(self.units), self.units)

    def check(self, tol: float = ORTHO_TOL) -> None:
        traces = np.einsum("iaa->i", self.units)
        if np.max(np.abs(traces)) > tol:
            raise ValueError("basis units are not traceless")
        if np.max(np.abs(self.gram() - self.norm * np.eye(len(self)))) > tol:
            raise ValueError("basis units are not orthogonal with the stated norm")

    def coefficients(self, x) -> np.ndarray:
        """Coefficients ``Tr(A_i^dagger X) / N`` of a single-party operator."""
        return np.einsum("iab,ab->i", np.conj(self.units), np.asarray(x)) / self.norm

    def combine(self, coeffs) -> np.ndarray:
        return np.einsum("i,iab->ab", np.asarray(coeffs, dtype=complex), self.units)

    def rotated(self, w) -> OperatorBasis:
        """Basis ``D_i = sum_j w[j, i] A_j`` for a unitary ``w``."""
        units = np.einsum("ji,jab->iab", np.asarray(w), self.units)
        return OperatorBasis(self.d, units, self.norm)


def weyl_operator(n: int, m: int, d: int) -> np.ndarray:
    """``U_nm = sum_k exp(2 pi i k n / d) |k><(k + m) mod d|``; indices taken mod d."""
    n %= d
    m %= d
    u = np.zeros((d, d), dtype=complex)
    for k in range(d):
        u[k, (k + m) % d] = np.exp(2j * np.pi * k * n / d)
    return u


def weyl_basis(d: int) -> OperatorBasis:
    """The ``d^2 - 1`` non-identity Weyl operators, ordered ``(n, m)`` lexicographically."""
    if d < 2:
        raise ValueError("dimension must be at least 2")
    labels = tuple((n, m) for n in range(d) for m in range(d) if (n, m) != (0, 0))
    units = np.array([weyl_operator(n, m, d) for n, m in labels])
    return OperatorBasis(d, units, float(d), labels)


def weyl_index(n: int, m: int, d: int) -> int:
    """Position of ``U_nm`` in :func:`weyl_basis`."""
    n %= d
    m %= d
    if (n, m) == (0, 0):
        raise ValueError("U_00 is the identity and not a basis unit")
    return n * d + m - 1


def pauli_basis() -> OperatorBasis:
    sx = np.array([[0, 1], [1, 0]], dtype=complex)
    sy = np.array([[0, -1j], [1j, 0]], dtype=complex)
    sz = np.array([[1, 0], [0, -1]], dtype=complex)
    return OperatorBasis(2, np.array([sx, sy, sz]), 2.0, ("x", "y", "z"))


# -- single-party Bloch vectors ---------------------------------------------


def bloch_vector(rho, basis: OperatorBasis) -> np.ndarray:
    """Bloch vector ``n`` with ``rho = (1 + f sum_i n_i A_i) / d``."""
    return basis.d * basis.coefficients(rho) / basis.scale


def state_from_bloch(n, basis: OperatorBasis) -> np.ndarray:
    return (np.eye(basis.d) + basis.scale * basis.combine(n)) / basis.d


# -- bipartite decompositions -------------------------------------------------


@dataclass(frozen=True)
class OpDecomp:
    e: complex
    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    basis_a: OperatorBasis
    basis_b: OperatorBasis

    @property
    def dims(self) -> tuple[int, int]:
        return self.basis_a.d, self.basis_b.d

    def reconstruct(self) -> np.ndarray:
        ba, bb = self.basis_a, self.basis_b
        ia, ib = np.eye(ba.d), np.eye(bb.d)
        out = self.e * np.kron(ia, ib)
        out = out + np.kron(ba.combine(self.a), ib) + np.kron(ia, bb.combine(self.b))
        out = out + np.einsum("ij,iab,jcd->acbd", self.c, ba.units, bb.units).reshape(out.shape)
        return out

    def to_json(self) -> dict:
        def pairs(x):
            x = np.asarray(x)
            return np.stack([x.real, x.imag], axis=-1).tolist()

        return {
            "e": [float(np.real(self.e)), float(np.imag(self.e))],
            "a": pairs(self.a),
            "b": pairs(self.b),
            "c": pairs(self.c),
        }


def decompose_op(op, basis_a: OperatorBasis, basis_b: OperatorBasis) -> OpDecomp:
    """Project ``op`` onto ``{1, A_i} (x) {1, B_j}``; reconstruction is exact."""
    op = mc.as_cmat(op)
    da, db = basis_a.d, basis_b.d
    if op.shape != (da * db, da * db):
        raise ValueError(f"operator of shape {op.shape} does not match bases of dims {(da, db)}")
    t = op.reshape(da, db, da, db)
    ua, ub = np.conj(basis_a.units), np.conj(basis_b.units)
    # Tr[(X (x) Y)^dagger O] = sum conj(X)[a,c] conj(Y)[b,d] O[a b, c d]
    e = np.trace(op) / (da * db)
    a = np.einsum("iac,abcb->i", ua, t) / (basis_a.norm * db)
    b = np.einsum("jbd,abad->j", ub, t) / (basis_b.norm * da)
    c = np.einsum("iac,jbd,abcd->ij", ua, ub, t) / (basis_a.norm * basis_b.norm)
    return OpDecomp(complex(e), a, b, c, basis_a, basis_b)


@dataclass(frozen=True)
class SvoForm:
    """Decomposition with a diagonal correlation matrix in rotated bases."""

    e: complex
    r: np.ndarray
    t: np.ndarray
    s: np.ndarray
    basis_a: OperatorBasis
    basis_b: OperatorBasis

    def reconstruct(self) -> np.ndarray:
        ba, bb = self.basis_a, self.basis_b
        ia, ib = np.eye(ba.d), np.eye(bb.d)
        out = self.e * np.kron(ia, ib)
        out = out + np.kron(ba.combine(self.r), ib) + np.kron(ia, bb.combine(self.t))
        out = out + np.einsum("i,iab,icd->acbd", self.s, ba.units, bb.units).reshape(out.shape)
        return out


def svo(dec: OpDecomp) -> SvoForm:
    """Singular-value-optimized form of a decomposition.

    With ``c = W diag(s) X^dagger`` the rotated units are
    ``D^A_k = sum_i W[i, k] A_i`` and ``D^B_k = sum_j conj(X[j, k]) B_j``; the
    local parts transform as ``r = W^dagger a`` and ``t = X^T b``.
    """
    if dec.basis_a.d != dec.basis_b.d:
        raise ValueError("the singular value optimized form needs equal subsystem dimensions")
    w, s, x = mc.svd(dec.c)
    r = mc.dag(w) @ dec.a
    t = x.T @ dec.b
    return SvoForm(dec.e, r, t, s, dec.basis_a.rotated(w), dec.basis_b.rotated(np.conj(x)))


# -- witness normalization ------------------------------------------------------


@dataclass(frozen=True)
class WitnessForm:
    delta: float
    mu: float
    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    basis_a: OperatorBasis
    basis_b: OperatorBasis
    negated: bool = False

    @property
    def dims(self) -> tuple[int, int]:
        return self.basis_a.d, self.basis_b.d

    @property
    def prefactors(self) -> tuple[float, float, float]:
        """Weights of the local-A, local-B and correlation sums in ``S``.

        They reduce to ``1/sqrt(dB-1)``, ``1/sqrt(dA-1)`` and ``1`` whenever
        ``N = d`` (Weyl and Pauli bases).
        """
        (da, na), (db, nb) = (self.basis_a.d, self.basis_a.norm), (self.basis_b.d, self.basis_b.norm)
        return (
            float(np.sqrt(na / (da * (db - 1)))),
            float(np.sqrt(nb / (db * (da - 1)))),
            float(np.sqrt(na * nb / (da * db))),
        )

    def to_decomp(self) -> OpDecomp:
        sign = -1.0 if self.negated else 1.0
        k = sign * self.delta
        return OpDecomp(k * self.mu, k * self.a, k * self.b, k * self.c, self.basis_a, self.basis_b)


def witness_form(op, basis_a: OperatorBasis, basis_b: OperatorBasis) -> WitnessForm:
    """Normalize a Hermitian operator to ``delta * (mu 1 + ...)`` with ``delta > 0``.

    An operator with negative identity part is negated first (``negated`` is
    set). A traceless operator has no such form and raises ``ValueError``.
    """
    op = mc.as_cmat(op)
    if not mc.is_hermitian(op, 1e-10):
        raise ValueError("witness form needs a Hermitian operator")
    dec = decompose_op(op, basis_a, basis_b)
    da, db = basis_a.d, basis_b.d
    if da < 2 or db < 2:
        raise ValueError("both parties need dimension >= 2")
    mu = float(np.sqrt((da - 1) * (db - 1)))
    e = float(np.real(dec.e))
    if abs(e) <= 1e-14:
        raise ValueError("operator has no identity component; delta would be zero")
    negated = e < 0
    sign = -1.0 if negated else 1.0
    delta = sign * e / mu
    k = sign / delta
    return WitnessForm(delta, mu, k * dec.a, k * dec.b, k * dec.c, basis_a, basis_b, negated)


def s_value(w: WitnessForm, n, m) -> float:
    """``S(n, m)`` such that ``Tr(sigma_p C') = delta mu (1 + S)``.

    ``C'`` is the operator after the sign normalization of
    :func:`witness_form`. Conjugated Bloch components enter every sum.
    """
    n = np.asarray(n, dtype=complex)
    m = np.asarray(m, dtype=complex)
    if n.shape != w.a.shape or m.shape != w.b.shape:
        raise ValueError("Bloch vector length does not match the basis")
    ka, kb, kc = w.prefactors
    nc, mcj = np.conj(n), np.conj(m)
    s = ka * (w.a @ nc) + kb * (w.b @ mcj) + kc * (nc @ w.c @ mcj)
    return float(np.real(s))


def svo_witness(w: WitnessForm) -> SvoForm:
    """SVO form of the normalized coefficients (``e`` holds ``mu``)."""
    dec = OpDecomp(w.mu, w.a, w.b, w.c, w.basis_a, w.basis_b)
    return svo(dec)


def singular_value_bound(form: SvoForm, local_tol: float = 1e-10) -> bool:
    """Sufficient test that an operator is nonnegative on all product states.

    ``form`` is the SVO form of a normalized witness (see :func:`svo_witness`)
    with vanishing local parts. Returns ``True`` when every correlation
    singular value, times the correlation prefactor, is at most one. ``False``
    is inconclusive except for two qubits.
    """
    if np.max(np.abs(form.r), initial=0.0) > local_tol or np.max(np.abs(form.t), initial=0.0) > local_tol:
        raise ValueError("local Bloch parts do not vanish")
    if form.basis_a.d != form.basis_b.d:
        raise ValueError("needs equal subsystem dimensions")
    d, n = form.basis_a.d, form.basis_a.norm
    kc = np.sqrt(n * form.basis_b.norm) / d
    return bool(np.max(form.s, initial=0.0) * kc <= 1.0 + 1e-12)
