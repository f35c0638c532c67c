"""Tolerance-aware dense complex linear algebra.

Supports and kernels of Hermitian operators, subspace arithmetic through
orthonormal column bases, orthogonal and oblique projectors, operator
square roots, Moore-Penrose inverses and Jordan (canonical) bases of
subspace pairs.  All functions are pure; arrays are never mutated.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, NotHermitian, NotPSD, SkewViolation
from .tolerances import DEFAULT_TOL, ToleranceContext

__all__ = [
    "Subspace", "dag", "hermitian_part", "is_hermitian", "assert_hermitian",
    "min_eigenvalue", "is_psd", "rank", "support", "kernel", "intersect",
    "subspace_sum", "orthogonal_projector", "oblique_projector",
    "pseudo_inverse", "sqrt_psd", "jordan_bases",
]


def dag(a: np.ndarray) -> np.ndarray:
    """Conjugate transpose."""
    return a.conj().T


def hermitian_part(a: np.ndarray) -> np.ndarray:
    return 0.5 * (a + dag(a))


def is_hermitian(a: np.ndarray, tol: ToleranceContext = DEFAULT_TOL) -> bool:
    scale = max(1.0, np.abs(a).max(initial=0.0))
    return bool(np.abs(a - dag(a)).max(initial=0.0) <= tol.hermitian * scale)


def assert_hermitian(a: np.ndarray, tol: ToleranceContext = DEFAULT_TOL,
                     what: str = "operator") -> np.ndarray:
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"{what} must be square, got shape {a.shape}")
    if not is_hermitian(a, tol):
        raise NotHermitian(f"{what} deviates from its adjoint beyond tolerance")
    return hermitian_part(a)


def min_eigenvalue(a: np.ndarray) -> float:
    """Smallest eigenvalue of the Hermitian part."""
    if a.shape[0] == 0:
        return 0.0
    return float(np.linalg.eigvalsh(hermitian_part(a)).min())


def is_psd(a: np.ndarray, tol: ToleranceContext = DEFAULT_TOL) -> bool:
    """PSD test admitting eigenvalues down to -psd_floor (norm-scaled above 1)."""
    if a.shape[0] == 0:
        return True
    w = np.linalg.eigvalsh(hermitian_part(a))
    floor = tol.psd_floor * max(1.0, float(np.abs(w).max()))
    return bool(w.min() >= -floor)


def _rank_threshold(values: np.ndarray, tol: ToleranceContext) -> float:
    top = float(values.max(initial=0.0))
    return max(tol.rank_cutoff * top, tol.rank_atol)


def rank(a: np.ndarray, tol: ToleranceContext = DEFAULT_TOL) -> int:
    """Numerical rank by singular values against the shared cutoff."""
    if a.size == 0:
        return 0
    s = np.linalg.svd(a, compute_uv=False)
    return int(np.sum(s > _rank_threshold(s, tol)))


@dataclass(frozen=True)
class Subspace:
    """A linear subspace of C^dim given by a column-orthonormal basis."""

    dim: int
    basis: np.ndarray  # shape (dim, k)

    def __post_init__(self):
        if self.basis.ndim != 2 or self.basis.shape[0] != self.dim:
            raise DimensionMismatch(
                f"basis shape {self.basis.shape} does not match dim {self.dim}")

    @property
    def size(self) -> int:
        """Dimension of the subspace itself."""
        return self.basis.shape[1]

    def projector(self) -> np.ndarray:
        return self.basis @ dag(self.basis)

    @staticmethod
    def zero(dim: int) -> "Subspace":
        return Subspace(dim, np.zeros((dim, 0), dtype=complex))

    @staticmethod
    def full(dim: int) -> "Subspace":
        return Subspace(dim, np.eye(dim, dtype=complex))

    @staticmethod
    def from_columns(columns: np.ndarray,
                     tol: ToleranceContext = DEFAULT_TOL) -> "Subspace":
        """Column space of an arbitrary matrix, orthonormalized by SVD."""
        if columns.shape[1] == 0:
            return Subspace.zero(columns.shape[0])
        u, s, _ = np.linalg.svd(columns, full_matrices=False)
        k = int(np.sum(s > _rank_threshold(s, tol)))
        return Subspace(columns.shape[0], u[:, :k].astype(complex))


def _eig_split(a, tol):
    a = assert_hermitian(a, tol)
    w, u = np.linalg.eigh(a)
    cut = max(tol.rank_cutoff * max(float(w.max(initial=0.0)), 0.0), tol.rank_atol)
    return w, u, cut


def support(a: np.ndarray, tol: ToleranceContext = DEFAULT_TOL) -> Subspace:
    """Span of eigenvectors with eigenvalue above the rank cutoff."""
    w, u, cut = _eig_split(a, tol)
    return Subspace(a.shape[0], u[:, w > cut].astype(complex))


def kernel(a: np.ndarray, tol: ToleranceContext = DEFAULT_TOL) -> Subspace:
    """Orthocomplement of the support."""
    w, u, cut = _eig_split(a, tol)
    return Subspace(a.shape[0], u[:, w <= cut].astype(complex))


def _check_same_dim(a: Subspace, b: Subspace):
    if a.dim != b.dim:
        raise DimensionMismatch(f"ambient dimensions differ: {a.dim} vs {b.dim}")


def intersect(a: Subspace, b: Subspace,
              tol: ToleranceContext = DEFAULT_TOL) -> Subspace:
    """Intersection via principal angles: keep directions with cosine ~ 1."""
    _check_same_dim(a, b)
    if a.size == 0 or b.size == 0:
        return Subspace.zero(a.dim)
    overlap = dag(a.basis) @ b.basis
    x, s, _ = np.linalg.svd(overlap)
    k = int(np.sum(s > 1.0 - tol.equality))
    return Subspace(a.dim, (a.basis @ x[:, :k]).astype(complex))


def subspace_sum(a: Subspace, b: Subspace,
                 tol: ToleranceContext = DEFAULT_TOL) -> Subspace:
    """Column space of the concatenated bases."""
    _check_same_dim(a, b)
    return Subspace.from_columns(np.hstack([a.basis, b.basis]), tol)


def orthogonal_projector(s: Subspace) -> np.ndarray:
    return s.projector()


def oblique_projector(lam: np.ndarray, pi: np.ndarray,
                      tol: ToleranceContext = DEFAULT_TOL) -> np.ndarray:
    """Idempotent Q with range pi*H and kernel equal to ker(lam).

    lam and pi must be orthogonal projectors onto skew-compatible subspaces
    (neither may contain a direction orthogonal to the other).  Q is the
    Moore-Penrose inverse of lam @ pi and satisfies
    Q lam = Q,  pi Q = Q,  lam Q = lam,  Q pi = pi.
    """
    lam_s = support(lam, tol)
    pi_s = support(pi, tol)
    if lam_s.size != pi_s.size:
        raise SkewViolation(
            f"subspace dimensions differ: {lam_s.size} vs {pi_s.size}")
    if lam_s.size == 0:
        return np.zeros_like(lam)
    cosines = np.linalg.svd(dag(lam_s.basis) @ pi_s.basis, compute_uv=False)
    if cosines.min() <= tol.equality:
        raise SkewViolation(
            "subspaces contain near-orthogonal directions; oblique projector "
            f"is unbounded (smallest principal cosine {cosines.min():.3e})")
    return np.linalg.pinv(lam @ pi, rcond=tol.rank_cutoff)


def pseudo_inverse(a: np.ndarray, tol: ToleranceContext = DEFAULT_TOL) -> np.ndarray:
    """Moore-Penrose inverse with the shared rank cutoff."""
    return np.linalg.pinv(a, rcond=tol.rank_cutoff)


def sqrt_psd(a: np.ndarray, tol: ToleranceContext = DEFAULT_TOL) -> np.ndarray:
    """PSD square root with rank truncation.

    Eigenvalues below the rank cutoff are zeroed before the root: keeping
    them would amplify O(eps) noise to O(sqrt(eps)) in nearly rank-deficient
    arguments.  Eigenvalues below -psd_floor (norm-scaled) raise NotPSD.
    """
    a = assert_hermitian(a, tol)
    if a.shape[0] == 0:
        return a.copy()
    w, u = np.linalg.eigh(a)
    top = max(float(w.max(initial=0.0)), 0.0)
    floor = tol.psd_floor * max(1.0, float(np.abs(w).max(initial=0.0)))
    if w.min(initial=0.0) < -floor:
        raise NotPSD(f"eigenvalue {w.min():.3e} below admissible floor {-floor:.3e}")
    cut = max(tol.rank_cutoff * top, tol.rank_atol)
    w = np.where(w > cut, w, 0.0)
    return (u * np.sqrt(w)) @ dag(u)


def jordan_bases(a: Subspace, b: Subspace,
                 tol: ToleranceContext = DEFAULT_TOL,
                 degeneracy_operator: np.ndarray | None = None,
                 ) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Jordan bases of two subspaces via the SVD of the basis overlap.

    Returns (basis_a, basis_b, cosines) with <a_i|b_j> = 0 for i != j and
    <a_k|b_k> = cosines[k] >= 0, sorted descending.  When consecutive
    cosines degenerate within tolerance and degeneracy_operator is given,
    the paired vectors inside the degenerate group are co-rotated so the
    operator's quadratic form becomes diagonal on the b-side group; this is
    the extra convention the four-dimensional solver relies on.
    """
    _check_same_dim(a, b)
    overlap = dag(a.basis) @ b.basis
    if a.size == 0 or b.size == 0:
        return (a.basis.copy(), b.basis.copy(),
                np.zeros(min(a.size, b.size)))
    x, s, yh = np.linalg.svd(overlap)
    basis_a = a.basis @ x
    basis_b = b.basis @ dag(yh)
    npair = min(a.size, b.size)
    cosines = np.clip(s[:npair], 0.0, 1.0)
    if degeneracy_operator is not None:
        for lo, hi in _degenerate_groups(cosines, tol.equality):
            block = basis_b[:, lo:hi]
            form = hermitian_part(dag(block) @ degeneracy_operator @ block)
            _, rot = np.linalg.eigh(form)
            basis_b[:, lo:hi] = block @ rot
            basis_a[:, lo:hi] = basis_a[:, lo:hi] @ rot
            for k in range(lo, hi):
                z = np.vdot(basis_a[:, k], basis_b[:, k])
                if abs(z) > tol.rank_atol:
                    basis_b[:, k] *= z.conjugate() / abs(z)
    return basis_a, basis_b, cosines


def _degenerate_groups(cosines, eq_tol):
    groups = []
    start = 0
    for i in range(1, len(cosines) + 1):
        if i == len(cosines) or abs(cosines[i] - cosines[start]) > 10 * eq_tol:
            if i - start > 1:
                groups.append((start, i))
            start = i
    return groups
