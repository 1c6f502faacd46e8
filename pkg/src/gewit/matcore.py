"""Dense complex linear algebra for small bipartite systems.

Matrices are plain ``numpy.ndarray`` objects of dtype ``complex128``. The
eigensolver and the SVD are cyclic Jacobi implementations; they are exact
enough at the sizes used here (D <= 16) that every downstream tolerance can
be pinned without worrying about the solver.

Index conventions for a bipartite operator on ``C^dA (x) C^dB``::

    rho[i*dB + j, k*dB + l] = <ij| rho |kl>

The partial transpose acts on Bob's indices, ``rho^G[ij, kl] = rho[il, kj]``,
and the realignment maps ``rho_R[ik, jl] = rho[ij, kl]``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple

import numpy as np

HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-12
POSITIVITY_TOL = 1e-10

_JACOBI_MAX_SWEEPS = 100


class EigResult(NamedTuple):
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


class SvdResult(NamedTuple):
    u: np.ndarray
    s: np.ndarray
    v: np.ndarray


def as_cmat(a) -> np.ndarray:
    """Return ``a`` as a finite 2-D complex array."""
    m = np.array(a, dtype=complex)
    if m.ndim != 2:
        raise ValueError(f"expected a 2-D matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    return m


def dag(a: np.ndarray) -> np.ndarray:
    return np.conj(a).T


def kron(a, b) -> np.ndarray:
    return np.kron(as_cmat(a), as_cmat(b))


def hs_inner(a, b) -> complex:
    """Hilbert-Schmidt inner product ``Tr A^dagger B``."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return complex(np.vdot(a, b))


def hs_norm(a) -> float:
    return float(np.sqrt(max(hs_inner(a, a).real, 0.0)))


def hs_distance(a, b) -> float:
    return hs_norm(np.asarray(a) - np.asarray(b))


def is_hermitian(a, tol: float = HERMITIAN_TOL) -> bool:
    a = np.asarray(a)
    return a.shape[0] == a.shape[1] and float(np.max(np.abs(a - dag(a)), initial=0.0)) <= tol


def _offdiag_norm(a: np.ndarray) -> float:
    off = a - np.diag(np.diag(a))
    return float(np.linalg.norm(off))


def herm_eig(a, tol: float = 1e-10) -> EigResult:
    """Eigendecomposition of a complex Hermitian matrix by cyclic Jacobi sweeps.

    Eigenvalues are returned ascending, eigenvectors as the matching columns.
    Raises ``ValueError`` if ``a`` is not Hermitian within ``tol`` (relative
    to its largest entry when that exceeds one).
    """
    a = as_cmat(a)
    n = a.shape[0]
    if a.shape != (n, n):
        raise ValueError(f"expected a square matrix, got {a.shape}")
    scale = max(1.0, float(np.max(np.abs(a), initial=0.0)))
    if np.max(np.abs(a - dag(a)), initial=0.0) > tol * scale:
        raise ValueError("matrix is not Hermitian")
    w = 0.5 * (a + dag(a))
    v = np.eye(n, dtype=complex)
    fro = float(np.linalg.norm(w))
    target = 1e-15 * fro
    for _ in range(_JACOBI_MAX_SWEEPS):
        if _offdiag_norm(w) <= target:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                g = w[p, q]
                ag = abs(g)
                if ag <= 1e-300 or ag <= 1e-18 * fro:
                    continue
                phase = g / ag
                tau = (w[q, q].real - w[p, p].real) / (2.0 * ag)
                t = (1.0 if tau >= 0 else -1.0) / (abs(tau) + np.hypot(1.0, tau))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                # columns p, q of the rotation J; w <- J^dagger w J
                jp = np.array([c, -s * np.conj(phase)])
                jq = np.array([s * phase, c])
                cols = w[:, [p, q]]
                new_p = cols @ jp
                new_q = cols @ jq
                w[:, p] = new_p
                w[:, q] = new_q
                rows = w[[p, q], :]
                w[p, :] = np.conj(jp) @ rows
                w[q, :] = np.conj(jq) @ rows
                w[p, q] = 0.0
                w[q, p] = 0.0
                vcols = v[:, [p, q]]
                v[:, p] = vcols @ jp
                v[:, q] = vcols @ jq
    evals = np.real(np.diag(w))
    order = np.argsort(evals, kind="stable")
    return EigResult(evals[order], v[:, order])


def eigvalsh(a) -> np.ndarray:
    return herm_eig(a).eigenvalues


def min_eigenvalue(a) -> float:
    return float(herm_eig(a).eigenvalues[0])


def _complete_orthonormal(cols: np.ndarray, n: int) -> np.ndarray:
    """Extend orthonormal columns to an ``n x n`` unitary by Gram-Schmidt."""
    basis = [cols[:, k] for k in range(cols.shape[1])]
    for e in np.eye(n, dtype=complex):
        if len(basis) == n:
            break
        x = e.copy()
        for _ in range(2):
            for b in basis:
                x = x - np.vdot(b, x) * b
        nx = np.linalg.norm(x)
        if nx > 1e-8:
            basis.append(x / nx)
    return np.column_stack(basis) if basis else np.zeros((n, 0), dtype=complex)


def _one_sided_jacobi(a: np.ndarray) -> SvdResult:
    m, n = a.shape
    w = a.copy()
    v = np.eye(n, dtype=complex)
    for _ in range(_JACOBI_MAX_SWEEPS):
        rotated = False
        for p in range(n - 1):
            for q in range(p + 1, n):
                alpha = float(np.real(np.vdot(w[:, p], w[:, p])))
                beta = float(np.real(np.vdot(w[:, q], w[:, q])))
                gamma = np.vdot(w[:, p], w[:, q])
                ag = abs(gamma)
                if ag <= 1e-300 or ag <= 1e-15 * np.sqrt(alpha * beta):
                    continue
                rotated = True
                phase = gamma / ag
                zeta = (beta - alpha) / (2.0 * ag)
                t = (1.0 if zeta >= 0 else -1.0) / (abs(zeta) + np.hypot(1.0, zeta))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                jp = np.array([c, -s * np.conj(phase)])
                jq = np.array([s * phase, c])
                cols = w[:, [p, q]]
                w[:, p] = cols @ jp
                w[:, q] = cols @ jq
                vcols = v[:, [p, q]]
                v[:, p] = vcols @ jp
                v[:, q] = vcols @ jq
        if not rotated:
            break
    s = np.linalg.norm(w, axis=0)
    order = np.argsort(-s, kind="stable")
    s = s[order]
    w = w[:, order]
    v = v[:, order]
    smax = s[0] if s.size else 0.0
    rank = int(np.sum(s > 1e-14 * max(smax, 1e-300))) if smax > 0 else 0
    u = w[:, :rank] / s[:rank]
    u = _complete_orthonormal(u, m)
    s = np.where(np.arange(s.size) < rank, s, 0.0)
    return SvdResult(u, s, v)


def svd(a) -> SvdResult:
    """Singular value decomposition ``A = U diag(s) V^dagger`` (one-sided Jacobi).

    ``s`` is descending with length ``min(rows, cols)``; ``U`` and ``V`` are
    square unitaries.
    """
    a = as_cmat(a)
    m, n = a.shape
    if m >= n:
        u, s, v = _one_sided_jacobi(a)
        return SvdResult(u, s[: min(m, n)], v)
    # wide matrix: decompose A^dagger = V S U^dagger
    v, s, u = _one_sided_jacobi(dag(a))
    return SvdResult(u, s[: min(m, n)], v)


def singular_values(a) -> np.ndarray:
    return svd(a).s


def _split(dims, size: int) -> tuple[int, int]:
    da, db = int(dims[0]), int(dims[1])
    if da < 1 or db < 1 or da * db != size:
        raise ValueError(f"dims {dims} do not factor a matrix of size {size}")
    return da, db


def partial_transpose(rho, dims) -> np.ndarray:
    """Transpose Bob's indices: ``rho^G[ij, kl] = rho[il, kj]``."""
    rho = as_cmat(rho)
    da, db = _split(dims, rho.shape[0])
    if rho.shape != (da * db, da * db):
        raise ValueError(f"expected a square matrix of size {da * db}")
    return rho.reshape(da, db, da, db).transpose(0, 3, 2, 1).reshape(da * db, da * db)


def realign(rho, dims) -> np.ndarray:
    """Realigned matrix ``rho_R[ik, jl] = rho[ij, kl]`` of shape ``(dA^2, dB^2)``."""
    rho = as_cmat(rho)
    da, db = _split(dims, rho.shape[0])
    if rho.shape != (da * db, da * db):
        raise ValueError(f"expected a square matrix of size {da * db}")
    return rho.reshape(da, db, da, db).transpose(0, 2, 1, 3).reshape(da * da, db * db)


def realignment_sum(rho, dims) -> float:
    """Sum of the singular values of the realigned matrix (trace norm)."""
    return float(np.sum(singular_values(realign(rho, dims))))


def partial_trace(rho, dims, keep: int = 0) -> np.ndarray:
    """Reduced operator of party ``keep`` (0 = Alice, 1 = Bob)."""
    rho = as_cmat(rho)
    da, db = _split(dims, rho.shape[0])
    r = rho.reshape(da, db, da, db)
    if keep == 0:
        return np.einsum("ijkj->ik", r)
    return np.einsum("ijil->jl", r)


@dataclass(frozen=True)
class DensityMatrix:
    """A bipartite density matrix with its subsystem dimensions.

    Construction does not enforce positivity; call :meth:`validate` or
    :meth:`is_valid` when that matters. ``dims = (d, 1)`` describes a single
    system.
    """

    mat: np.ndarray
    dims: tuple[int, int]

    def __post_init__(self):
        m = as_cmat(self.mat)
        _split(self.dims, m.shape[0])
        if m.shape[0] != m.shape[1]:
            raise ValueError("density matrix must be square")
        m.setflags(write=False)
        object.__setattr__(self, "mat", m)
        object.__setattr__(self, "dims", (int(self.dims[0]), int(self.dims[1])))

    @property
    def dim(self) -> int:
        return self.mat.shape[0]

    def violations(self) -> list[str]:
        problems = []
        if np.max(np.abs(self.mat - dag(self.mat))) > HERMITIAN_TOL:
            problems.append("not Hermitian")
            return problems
        tr = np.trace(self.mat)
        if abs(tr - 1.0) > TRACE_TOL:
            problems.append(f"trace {tr.real:.6g} != 1")
        lam = min_eigenvalue(self.mat)
        if lam < -POSITIVITY_TOL:
            problems.append(f"negative eigenvalue {lam:.3e}")
        return problems

    def is_valid(self) -> bool:
        return not self.violations()

    def validate(self) -> DensityMatrix:
        problems = self.violations()
        if problems:
            raise ValueError("invalid state: " + "; ".join(problems))
        return self


def pure_state(vec) -> np.ndarray:
    v = np.asarray(vec, dtype=complex).ravel()
    v = v / np.linalg.norm(v)
    return np.outer(v, np.conj(v))


def random_unit_vector(d: int, rng: np.random.Generator) -> np.ndarray:
    z = rng.normal(size=d) + 1j * rng.normal(size=d)
    return z / np.linalg.norm(z)


def random_density_matrix(d: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    """Random mixed state from a Ginibre matrix of the given rank."""
    k = d if rank is None else rank
    g = rng.normal(size=(d, k)) + 1j * rng.normal(size=(d, k))
    r = g @ dag(g)
    return r / np.trace(r).real


def random_hermitian(d: int, rng: np.random.Generator) -> np.ndarray:
    g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return 0.5 * (g + dag(g))


# -- matrix literal files ---------------------------------------------------


def matrix_to_json(a) -> dict:
    a = as_cmat(a)
    flat = a.ravel()
    return {
        "rows": a.shape[0],
        "cols": a.shape[1],
        "re": [float(x) for x in flat.real],
        "im": [float(x) for x in flat.imag],
    }


def matrix_from_json(obj: dict) -> np.ndarray:
    rows, cols = int(obj["rows"]), int(obj["cols"])
    re = np.asarray(obj["re"], dtype=float)
    im = np.asarray(obj.get("im", [0.0] * (rows * cols)), dtype=float)
    if re.size != rows * cols or im.size != rows * cols:
        raise ValueError(f"expected {rows * cols} entries, got re={re.size} im={im.size}")
    return as_cmat((re + 1j * im).reshape(rows, cols))


def load_matrix(path) -> np.ndarray:
    with open(Path(path)) as fh:
        return matrix_from_json(json.load(fh))


def save_matrix(path, a) -> None:
    with open(Path(path), "w") as fh:
        json.dump(matrix_to_json(a), fh)
