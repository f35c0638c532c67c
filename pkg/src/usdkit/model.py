"""Problem and measurement model for two-state unambiguous discrimination.

A problem instance is a pair of weighted density operators (PSD operators
whose traces are the a-priori probabilities).  A measurement is a POVM
triple (e1, e2, e_inconclusive); outcome 1 must never fire on state 2 and
vice versa.  The inconclusive element alone determines a proper
measurement, and this module implements that completion explicitly.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import linalg as la
from .errors import (DimensionMismatch, InvalidInconclusive, NotPSD,
                     NotReconstructible)
from .linalg import Subspace, dag, hermitian_part
from .tolerances import DEFAULT_TOL, ToleranceContext

__all__ = [
    "WeightedDensityPair", "UsdMeasurement", "MeasurementClassTag",
    "InconclusiveDiagnostics",
    "success_probability", "failure_probability", "is_proper", "is_usd",
    "validate_inconclusive", "complete_measurement", "reconstruct_from_core",
    "projective_kernel_decomposition", "compress_pair", "expand_measurement",
]


@dataclass(frozen=True)
class WeightedDensityPair:
    """The two input states as weighted density operators.

    Each operator is PSD with trace equal to its a-priori probability; the
    traces may sum to less than one (sub-normalized instances are valid and
    show up naturally after reductions).
    """

    dim: int
    gamma1: np.ndarray
    gamma2: np.ndarray
    tol: ToleranceContext = field(default=DEFAULT_TOL)

    def __post_init__(self):
        g1 = la.assert_hermitian(np.asarray(self.gamma1, dtype=complex),
                                 self.tol, "gamma1")
        g2 = la.assert_hermitian(np.asarray(self.gamma2, dtype=complex),
                                 self.tol, "gamma2")
        if g1.shape != (self.dim, self.dim) or g2.shape != (self.dim, self.dim):
            raise DimensionMismatch("state operators do not match dim")
        for name, g in (("gamma1", g1), ("gamma2", g2)):
            if not la.is_psd(g, self.tol):
                raise NotPSD(f"{name} is not positive semi-definite")
        total = float(np.real(np.trace(g1) + np.trace(g2)))
        if total > 1.0 + self.tol.equality:
            raise ValueError(f"trace(gamma1)+trace(gamma2) = {total} exceeds 1")
        object.__setattr__(self, "gamma1", g1)
        object.__setattr__(self, "gamma2", g2)

    @staticmethod
    def from_states(rho1: np.ndarray, rho2: np.ndarray, p1: float,
                    tol: ToleranceContext = DEFAULT_TOL) -> "WeightedDensityPair":
        """Build the pair p1*rho1, (1-p1)*rho2 from unit-trace states."""
        if not 0.0 < p1 < 1.0:
            raise ValueError("p1 must lie strictly between 0 and 1")
        rho1 = np.asarray(rho1, dtype=complex)
        return WeightedDensityPair(rho1.shape[0], p1 * rho1,
                                   (1.0 - p1) * np.asarray(rho2, dtype=complex),
                                   tol)

    @property
    def total(self) -> np.ndarray:
        return self.gamma1 + self.gamma2

    @property
    def total_trace(self) -> float:
        return float(np.real(np.trace(self.total)))

    def collective_support(self) -> Subspace:
        return la.support(self.total, self.tol)

    def common_kernel(self) -> Subspace:
        return la.kernel(self.total, self.tol)


@dataclass(frozen=True)
class UsdMeasurement:
    """POVM triple (e1, e2, e_inconclusive)."""

    e1: np.ndarray
    e2: np.ndarray
    e_inconclusive: np.ndarray

    @property
    def dim(self) -> int:
        return self.e1.shape[0]

    def elements(self):
        return self.e1, self.e2, self.e_inconclusive

    def validate(self, pair: WeightedDensityPair | None = None,
                 tol: ToleranceContext = DEFAULT_TOL) -> None:
        """Raise unless this is a valid (USD) measurement (for pair, if given)."""
        d = self.dim
        for name, e in zip(("e1", "e2", "e_inconclusive"), self.elements()):
            la.assert_hermitian(e, tol, name)
            if not la.is_psd(e, tol):
                raise NotPSD(f"{name} is not positive semi-definite")
        closure = np.abs(self.e1 + self.e2 + self.e_inconclusive - np.eye(d)).max()
        if closure > tol.equality:
            raise ValueError(f"POVM elements sum to identity only up to {closure:.2e}")
        if pair is not None and not is_usd(self, pair):
            raise ValueError("measurement misidentifies a state (not USD)")


@dataclass(frozen=True)
class MeasurementClassTag:
    """Measurement type by conclusive-operator ranks.

    For strictly skew pairs with conclusive rank r the ranks obey
    e_mu <= r <= e1 + e2; the unordered pair [e1, e2] is the measurement
    class.  The measurement is von Neumann exactly when e1 + e2 = r.
    """

    e1_rank: int
    e2_rank: int
    is_von_neumann: bool

    @property
    def as_class(self) -> tuple[int, int]:
        """Unordered class label [min, max]."""
        return (min(self.e1_rank, self.e2_rank),
                max(self.e1_rank, self.e2_rank))


def is_usd(m: UsdMeasurement, pair: WeightedDensityPair) -> bool:
    """No misidentification: tr(e2 gamma1) = 0 = tr(e1 gamma2)."""
    tol = pair.tol
    wrong2 = abs(float(np.real(np.trace(m.e2 @ pair.gamma1))))
    wrong1 = abs(float(np.real(np.trace(m.e1 @ pair.gamma2))))
    return wrong2 <= tol.equality and wrong1 <= tol.equality


def success_probability(m: UsdMeasurement, pair: WeightedDensityPair) -> float:
    """tr(e1 gamma1) + tr(e2 gamma2)."""
    return float(np.real(np.trace(m.e1 @ pair.gamma1) +
                         np.trace(m.e2 @ pair.gamma2)))


def failure_probability(m: UsdMeasurement, pair: WeightedDensityPair) -> float:
    """tr(e_inconclusive (gamma1 + gamma2))."""
    return float(np.real(np.trace(m.e_inconclusive @ pair.total)))


def is_proper(m: UsdMeasurement, pair: WeightedDensityPair) -> bool:
    """True iff supp(e1+e2) lies inside the collective state support."""
    tol = pair.tol
    conclusive = la.support(m.e1 + m.e2, tol)
    p_supp = pair.collective_support().projector()
    if conclusive.size == 0:
        return True
    leak = conclusive.basis - p_supp @ conclusive.basis
    return bool(np.abs(leak).max() <= np.sqrt(tol.equality))


@dataclass(frozen=True)
class InconclusiveDiagnostics:
    """Per-condition report for a candidate inconclusive operator."""

    identity_on_kernel: bool
    psd: bool
    complement_psd: bool
    separates_states: bool
    residual_kernel: float
    residual_psd: float
    residual_complement: float
    residual_separation: float

    @property
    def ok(self) -> bool:
        return (self.identity_on_kernel and self.psd and self.complement_psd
                and self.separates_states)

    def first_failure(self) -> str | None:
        for name in ("identity_on_kernel", "psd", "complement_psd",
                     "separates_states"):
            if not getattr(self, name):
                return name
        return None


def validate_inconclusive(e_q: np.ndarray,
                          pair: WeightedDensityPair) -> InconclusiveDiagnostics:
    """Check the four conditions an inconclusive element must satisfy.

    It must act as identity on the common kernel, satisfy 0 <= e_q <= 1,
    and annihilate the cross term: gamma1 (1 - e_q) gamma2 = 0.
    """
    tol = pair.tol
    d = pair.dim
    kb = pair.common_kernel().basis
    res_k = float(np.abs(e_q @ kb - kb).max()) if kb.shape[1] else 0.0
    w = np.linalg.eigvalsh(hermitian_part(e_q))
    res_psd = max(0.0, -float(w.min()))
    res_comp = max(0.0, float(w.max()) - 1.0)
    cross = pair.gamma1 @ (np.eye(d) - e_q) @ pair.gamma2
    res_sep = float(np.linalg.norm(cross))
    floor = tol.psd_floor * max(1.0, float(np.abs(w).max(initial=0.0)))
    return InconclusiveDiagnostics(
        identity_on_kernel=res_k <= tol.equality,
        psd=res_psd <= floor,
        complement_psd=res_comp <= floor,
        separates_states=res_sep <= tol.equality,
        residual_kernel=res_k,
        residual_psd=res_psd,
        residual_complement=res_comp,
        residual_separation=res_sep,
    )


def _conclusive_oblique(pair: WeightedDensityPair, which: int) -> np.ndarray:
    """Oblique projector used to complete element `which` from e_q.

    For which=1 this projects from ker(gamma2) within the collective
    support onto the part of supp(gamma1) outside the common support
    overlap; the roles swap for which=2.
    """
    tol = pair.tol
    own = pair.gamma1 if which == 1 else pair.gamma2
    other = pair.gamma2 if which == 1 else pair.gamma1
    s_all = pair.collective_support()
    lam_space = la.intersect(la.kernel(other, tol), s_all, tol)
    if lam_space.size == 0:
        return np.zeros((pair.dim, pair.dim), dtype=complex)
    overlap = la.intersect(la.support(own, tol), la.support(other, tol), tol)
    non_parallel = la.kernel(overlap.projector(), tol)
    target = la.intersect(la.support(own, tol), non_parallel, tol)
    return la.oblique_projector(lam_space.projector(), target.projector(), tol)


def complete_measurement(e_q: np.ndarray,
                         pair: WeightedDensityPair) -> UsdMeasurement:
    """The unique proper USD measurement with the given inconclusive element.

    e1 = Q1^dag (1 - e_q) Q1 with Q1 the oblique projector of the
    conclusive-1 geometry; e2 analogously.
    """
    diag = validate_inconclusive(e_q, pair)
    if not diag.ok:
        raise InvalidInconclusive(
            f"inconclusive operator rejected: {diag.first_failure()}", diag)
    one = np.eye(pair.dim)
    q1 = _conclusive_oblique(pair, 1)
    q2 = _conclusive_oblique(pair, 2)
    e1 = hermitian_part(dag(q1) @ (one - e_q) @ q1)
    e2 = hermitian_part(dag(q2) @ (one - e_q) @ q2)
    m = UsdMeasurement(e1, e2, hermitian_part(e_q))
    closure = float(np.abs(e1 + e2 + e_q - one).max())
    if closure > pair.tol.equality:
        raise InvalidInconclusive(
            f"completion does not close to identity (residual {closure:.2e})",
            diag)
    return m


def reconstruct_from_core(core: np.ndarray,
                          pair: WeightedDensityPair) -> np.ndarray:
    """Recover e_q from its core e_q (gamma2 - gamma1) e_q.

    Evaluates the closed-form sandwich identity: the inverse of
    gamma1+gamma2 on its support applied around
    gamma1 gamma2 + gamma2 gamma1
    + sqrt(g1) sqrt( sqrt(g1) [gamma2 - core] sqrt(g1) ) sqrt(g1)
    + sqrt(g2) sqrt( sqrt(g2) [gamma1 + core] sqrt(g2) ) sqrt(g2),
    plus the projector onto the common kernel.
    """
    tol = pair.tol
    g1, g2 = pair.gamma1, pair.gamma2
    total_inv = la.pseudo_inverse(pair.total, tol)
    p_kernel = pair.common_kernel().projector()
    r1 = la.sqrt_psd(g1, tol)
    r2 = la.sqrt_psd(g2, tol)
    try:
        inner1 = la.sqrt_psd(r1 @ (g2 - core) @ r1, tol)
        inner2 = la.sqrt_psd(r2 @ (g1 + core) @ r2, tol)
    except NotPSD as exc:
        raise NotReconstructible(
            f"inner square-root argument not PSD: {exc}") from exc
    curly = g1 @ g2 + g2 @ g1 + r1 @ inner1 @ r1 + r2 @ inner2 @ r2
    return hermitian_part(p_kernel + total_inv @ curly @ total_inv)


def projective_kernel_decomposition(
        e_q: np.ndarray, pair: WeightedDensityPair,
) -> tuple[Subspace, Subspace, Subspace]:
    """Split ker(1 - e_q) into its supp(gamma1), supp(gamma2), ker parts.

    For any proper measurement the projective part of the inconclusive
    element decomposes as the (generally non-orthogonal) sum of its
    intersections with the two state supports, plus the common kernel.
    The first two components may overlap inside supp g1 ∩ supp g2.
    """
    tol = pair.tol
    fixed = la.kernel(np.eye(pair.dim) - e_q, tol)
    part1 = la.intersect(fixed, la.support(pair.gamma1, tol), tol)
    part2 = la.intersect(fixed, la.support(pair.gamma2, tol), tol)
    return part1, part2, pair.common_kernel()


def compress_pair(pair: WeightedDensityPair,
                  ) -> tuple[WeightedDensityPair, np.ndarray]:
    """Restrict the pair to its collective support.

    Returns the compressed pair and the isometry (columns = support basis)
    mapping compressed vectors back into the ambient space.
    """
    v = pair.collective_support().basis
    g1 = hermitian_part(dag(v) @ pair.gamma1 @ v)
    g2 = hermitian_part(dag(v) @ pair.gamma2 @ v)
    return WeightedDensityPair(v.shape[1], g1, g2, pair.tol), v


def expand_measurement(m: UsdMeasurement, isometry: np.ndarray) -> UsdMeasurement:
    """Push a measurement on the compressed space back to the ambient one.

    Conclusive elements are conjugated by the isometry; the inconclusive
    element absorbs the rest so the triple still sums to the identity (it
    acts as identity on the removed directions).
    """
    v = isometry
    d = v.shape[0]
    e1 = v @ m.e1 @ dag(v)
    e2 = v @ m.e2 @ dag(v)
    return UsdMeasurement(e1, e2, np.eye(d) - e1 - e2)
