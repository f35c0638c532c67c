"""Operational optimality checking, classification and certificates.

A proper measurement is optimal iff four residual conditions on the
inconclusive element hold (two PSD sandwiches, one cross term, one
projective-part equation).  This module evaluates them directly, exposes
the rank law obeyed by every optimal inconclusive element, classifies
measurements by conclusive-operator ranks, and constructs the explicit
dual certificate operator whose existence is equivalent to optimality.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import linalg as la
from . import reductions as red
from .errors import CertificateFailure, NotProper, PreconditionViolated
from .linalg import dag, hermitian_part
from .model import (MeasurementClassTag, UsdMeasurement, WeightedDensityPair,
                    compress_pair, is_proper)
from .tolerances import ToleranceContext

__all__ = [
    "OptimalityReport", "CertificateZ", "SolverOutcome", "check_optimality",
    "rank_law_check", "classify", "count_types_classes",
    "projective_part_law", "build_certificate",
]


@dataclass(frozen=True)
class OptimalityReport:
    """Outcome of the four-condition optimality check.

    The two PSD residuals are most-negative eigenvalues of the Hermitian
    parts (>= -psd_floor passes); the equality residuals are Frobenius
    norms.  lambda1/lambda2 are the projectors onto ker(gamma2) resp.
    ker(gamma1) within the collective support.
    """

    cond_a1: bool
    cond_a2: bool
    cond_cross: bool
    cond_b: bool
    residual_a1: float
    residual_a2: float
    residual_cross: float
    residual_b: float
    residual_antihermitian: float
    lambda1: np.ndarray
    lambda2: np.ndarray

    @property
    def is_optimal(self) -> bool:
        return self.cond_a1 and self.cond_a2 and self.cond_cross and self.cond_b

    def to_dict(self) -> dict:
        return {
            "is_optimal": self.is_optimal,
            "cond_a1": self.cond_a1, "cond_a2": self.cond_a2,
            "cond_cross": self.cond_cross, "cond_b": self.cond_b,
            "residual_a1": self.residual_a1, "residual_a2": self.residual_a2,
            "residual_cross": self.residual_cross, "residual_b": self.residual_b,
            "residual_antihermitian": self.residual_antihermitian,
        }


def _detector_projectors(pair: WeightedDensityPair):
    tol = pair.tol
    s_all = pair.collective_support()
    lam1 = la.intersect(la.kernel(pair.gamma2, tol), s_all, tol).projector()
    lam2 = la.intersect(la.kernel(pair.gamma1, tol), s_all, tol).projector()
    return lam1, lam2


def check_optimality(m: UsdMeasurement, pair: WeightedDensityPair,
                     require_proper: bool = True) -> OptimalityReport:
    """Evaluate the four operational optimality conditions for a measurement.

    With e = e_inconclusive, M = e (gamma2 - gamma1) e and Lambda_mu the
    detector projectors, the conditions are
      (a1)  Lambda1 M Lambda1 >= 0,
      (a2) -Lambda2 M Lambda2 >= 0,
      (cross) Lambda1 M Lambda2 = 0,
      (b)   (Lambda1 - Lambda2) M (1 - e) = 0.
    A proper measurement is optimal iff all four hold.
    """
    if require_proper and not is_proper(m, pair):
        raise NotProper("optimality conditions apply to proper measurements")
    tol = pair.tol
    lam1, lam2 = _detector_projectors(pair)
    e = m.e_inconclusive
    core = e @ (pair.gamma2 - pair.gamma1) @ e
    scale = max(1.0, pair.total_trace)
    s11 = lam1 @ core @ lam1
    s22 = lam2 @ core @ lam2
    anti = max(float(np.linalg.norm(s11 - hermitian_part(s11))),
               float(np.linalg.norm(s22 - hermitian_part(s22))))
    res_a1 = min(0.0, la.min_eigenvalue(s11))
    res_a2 = min(0.0, la.min_eigenvalue(-s22))
    res_cross = float(np.linalg.norm(lam1 @ core @ lam2))
    res_b = float(np.linalg.norm(
        (lam1 - lam2) @ core @ (np.eye(pair.dim) - e)))
    floor = tol.psd_floor * scale
    return OptimalityReport(
        cond_a1=res_a1 >= -floor and anti <= tol.hermitian * scale,
        cond_a2=res_a2 >= -floor,
        cond_cross=res_cross <= tol.equality * scale,
        cond_b=res_b <= tol.equality * scale,
        residual_a1=res_a1,
        residual_a2=res_a2,
        residual_cross=res_cross,
        residual_b=res_b,
        residual_antihermitian=anti,
        lambda1=lam1,
        lambda2=lam2,
    )


def rank_law_check(m: UsdMeasurement, pair: WeightedDensityPair) -> bool:
    """Rank law for optimal proper measurements.

    rank(e_inconclusive) must equal rank(gamma1 gamma2) + dim ker(g1+g2),
    and the support of the inconclusive element may meet either state
    kernel only in the common kernel.
    """
    tol = pair.tol
    e_supp = la.support(m.e_inconclusive, tol)
    k_dim = pair.common_kernel().size
    expected = la.rank(pair.gamma1 @ pair.gamma2, tol) + k_dim
    if e_supp.size != expected:
        return False
    for gamma in (pair.gamma1, pair.gamma2):
        meet = la.intersect(e_supp, la.kernel(gamma, tol), tol)
        if meet.size != k_dim:
            return False
    return True


def classify(m: UsdMeasurement, pair: WeightedDensityPair) -> MeasurementClassTag:
    """Rank-based measurement type (e1, e2).

    A measurement is von Neumann exactly when the conclusive ranks sum to
    rank(gamma1 gamma2); all three elements are then verified to be
    projectors.
    """
    tol = pair.tol
    e1_rank = la.rank(m.e1, tol)
    e2_rank = la.rank(m.e2, tol)
    r = la.rank(pair.gamma1 @ pair.gamma2, tol)
    von_neumann = e1_rank + e2_rank == r
    if von_neumann:
        for e in m.elements():
            if np.abs(e @ e - e).max() > tol.idempotent:
                von_neumann = False
                break
    return MeasurementClassTag(e1_rank, e2_rank, von_neumann)


def count_types_classes(r: int) -> tuple[int, int]:
    """Number of measurement types and classes for conclusive rank r.

    Types are pairs (e1, e2) with e_mu <= r <= e1 + e2; classes identify
    (a, b) with (b, a).
    """
    if r < 0:
        raise ValueError("r must be non-negative")
    types = (r + 1) * (r + 2) // 2
    classes = int(np.floor((r / 2 + 1) ** 2))
    return types, classes


def projective_part_law(m: UsdMeasurement, pair: WeightedDensityPair) -> bool:
    """Core identity of optimal measurements on support-disjoint pairs.

    e (g2-g1) e must equal both P (g2-g1) P and D (g2-g1) D, where P
    projects onto supp(e) and D onto ker(1-e).
    """
    tol = pair.tol
    if la.intersect(la.support(pair.gamma1, tol),
                    la.support(pair.gamma2, tol), tol).size:
        raise PreconditionViolated("state supports overlap; reduce first")
    e = m.e_inconclusive
    diff = pair.gamma2 - pair.gamma1
    p_supp = la.support(e, tol).projector()
    delta = la.kernel(np.eye(pair.dim) - e, tol).projector()
    core = e @ diff @ e
    scale = max(1.0, pair.total_trace)
    return (np.linalg.norm(core - p_supp @ diff @ p_supp) <= tol.equality * scale
            and np.linalg.norm(core - delta @ diff @ delta) <= tol.equality * scale)


@dataclass(frozen=True)
class CertificateZ:
    """Explicit dual certificate for an optimal measurement.

    z is PSD, annihilates the inconclusive element, dominates gamma_mu on
    the detector subspaces and agrees with gamma_mu against the conclusive
    elements.  v1/v2/w12 are the intermediate operators of the
    construction; v1_condition tracks how ill-posed the inversion of v1
    was.  For pairs that are not strictly skew the certificate refers to
    the strictly skew core recorded in `pair`.
    """

    z: np.ndarray
    v1: np.ndarray
    v2: np.ndarray
    w12: np.ndarray
    pair: WeightedDensityPair
    residuals: dict = field(default_factory=dict)
    v1_condition: float = float("nan")


def _certificate_residuals(z, m: UsdMeasurement, pair: WeightedDensityPair):
    lam1, lam2 = _detector_projectors(pair)
    return {
        "z_psd": min(0.0, la.min_eigenvalue(z)),
        "z_annihilates_inconclusive": float(np.linalg.norm(z @ m.e_inconclusive)),
        "dominates_1": min(0.0, la.min_eigenvalue(lam1 @ (z - pair.gamma1) @ lam1)),
        "dominates_2": min(0.0, la.min_eigenvalue(lam2 @ (z - pair.gamma2) @ lam2)),
        "agrees_1": float(np.linalg.norm(lam1 @ (z - pair.gamma1) @ m.e1)),
        "agrees_2": float(np.linalg.norm(lam2 @ (z - pair.gamma2) @ m.e2)),
    }


def _build_certificate_skew(m: UsdMeasurement, pair: WeightedDensityPair,
                            residual_tol: float) -> CertificateZ:
    tol = pair.tol
    g1, g2 = pair.gamma1, pair.gamma2
    k1 = la.kernel(g1, tol).projector()
    k2 = la.kernel(g2, tol).projector()
    p1 = la.support(g1, tol).projector()
    p2 = la.support(g2, tol).projector()
    lam1, lam2 = _detector_projectors(pair)
    # oblique projectors between the kernels and onto the supports
    r1 = la.oblique_projector(k2, k1, tol)
    q1 = la.oblique_projector(lam1, p1, tol)
    q2 = la.oblique_projector(lam2, p2, tol)
    e = m.e_inconclusive
    v1 = hermitian_part(lam1 @ e @ (g2 - g1) @ e @ lam1 + lam1 @ g1 @ lam1)
    v2 = hermitian_part(lam2 @ e @ (g1 - g2) @ e @ lam2 + lam2 @ g2 @ lam2)
    w1 = (r1 @ (lam1 - m.e1) + lam2 @ m.e1) @ v1
    v1_pinv = la.pseudo_inverse(v1, tol)
    sv = np.linalg.svd(v1, compute_uv=False)
    sv = sv[sv > max(tol.rank_cutoff * sv.max(initial=0.0), tol.rank_atol)]
    v1_cond = float(sv.max() / sv.min()) if sv.size else float("inf")
    t = q1 + q2 @ w1 @ v1_pinv
    z = hermitian_part(t @ v1 @ dag(t))
    residuals = _certificate_residuals(z, m, pair)
    cert = CertificateZ(z, v1, v2, w1, pair, residuals, v1_cond)
    for name, value in residuals.items():
        if name.startswith(("z_psd", "dominates")):
            if value < -residual_tol:
                raise CertificateFailure(
                    f"certificate violates {name}: {value:.3e}", residuals)
        elif value > residual_tol:
            raise CertificateFailure(
                f"certificate violates {name}: {value:.3e}", residuals)
    return cert


def build_certificate(m: UsdMeasurement, pair: WeightedDensityPair,
                      residual_tol: float = 1e-7) -> CertificateZ:
    """Construct and verify the dual certificate for an optimal measurement.

    Pairs that are not strictly skew are first reduced (the free detector
    parts folded into the conclusive elements, then compressed onto the
    skew core); the certificate is built and verified for that core
    problem, which is equivalent to the original by the reduction laws.
    """
    report = check_optimality(m, pair)
    if not report.is_optimal:
        raise CertificateFailure(
            "measurement fails the operational optimality conditions; "
            "no certificate exists", report.to_dict())
    if red.is_strictly_skew(pair):
        return _build_certificate_skew(m, pair, residual_tol)
    record = red.reduce_fully(pair)
    core, isometry = compress_pair(record.reduced_pair)
    if core.dim == 0:
        raise CertificateFailure(
            "pair reduces to nothing; optimality is trivial and the "
            "certificate construction is empty", {})
    mc = UsdMeasurement(
        hermitian_part(dag(isometry) @ m.e1 @ isometry),
        hermitian_part(dag(isometry) @ m.e2 @ isometry),
        hermitian_part(dag(isometry) @ m.e_inconclusive @ isometry))
    return _build_certificate_skew(mc, core, residual_tol)


@dataclass(frozen=True)
class SolverOutcome:
    """Result of a solve: measurement, class, success and its evidence."""

    measurement: UsdMeasurement
    class_tag: MeasurementClassTag
    success: float
    report: OptimalityReport
    branch: str
    certificate: CertificateZ | None = None
    optimal: bool = True
    boundary: bool = False
    warnings: tuple[str, ...] = ()
