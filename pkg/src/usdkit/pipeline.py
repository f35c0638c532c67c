"""Generic solve strategy, parameter sweeps and file formats.

The dispatcher follows the standard playbook: reduce the pair to its
strictly skew core, try the closed-form families, use the complete
four-dimensional solver when the core supports it, and otherwise fall
back to the numerical oracle (flagged as best-known unless the
operational checker happens to certify the point).  Sweeps evaluate the
dispatcher over a prior grid and report class labels together with the
single-state-detection lower bounds and the convexity ("bound triangle")
upper bound.
"""
from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from . import linalg as la
from .closed_form import (BRANCH_FIDELITY, BRANCH_SINGLE_STATE,
                          try_fidelity_form, try_single_state_detection)
from .errors import CertificateFailure, NoSolutionFound, UsdKitError
from .model import (MeasurementClassTag, UsdMeasurement, WeightedDensityPair,
                    complete_measurement, success_probability)
from .optimality import (SolverOutcome, build_certificate, check_optimality,
                         classify)
from .oracle import OracleConfig, oracle_optimize
from .reductions import ReductionRecord, lift_measurement, reduce_fully
from .solver4d import solve_4d
from .tolerances import DEFAULT_TOL, ToleranceContext

__all__ = [
    "ProblemFile", "SweepRow", "BRANCH_TRIVIAL", "BRANCH_ORACLE",
    "dispatch", "sweep", "sweep_bounds", "load_problem", "save_problem",
    "load_measurement", "save_measurement", "rows_to_csv",
    "BLOCK_STRUCTURE_NOTE",
]

BRANCH_TRIVIAL = "trivial"
BRANCH_ORACLE = "oracle-best-known"
BRANCH_ORACLE_CERTIFIED = "oracle-checker"

BLOCK_STRUCTURE_NOTE = (
    "unsupported: detection of two-dimensional common block-diagonal "
    "structure is out of scope; a block-structured core may admit a "
    "composed solution this dispatcher does not attempt")


# --------------------------------------------------------------------------
# dispatch
# --------------------------------------------------------------------------

def _trivial_outcome(record: ReductionRecord,
                     pair: WeightedDensityPair) -> SolverOutcome:
    d = pair.dim
    zero = np.zeros((d, d), dtype=complex)
    m = lift_measurement(UsdMeasurement(zero, zero, np.eye(d)), record)
    report = check_optimality(m, pair)
    return SolverOutcome(
        measurement=m,
        class_tag=MeasurementClassTag(0, 0, True),
        success=success_probability(m, pair),
        report=report,
        branch=BRANCH_TRIVIAL,
        optimal=report.is_optimal,
    )


def _oracle_fallback(record: ReductionRecord, pair: WeightedDensityPair,
                     oracle_cfg: OracleConfig | None,
                     notes: tuple[str, ...]) -> SolverOutcome:
    cfg = oracle_cfg if oracle_cfg is not None else OracleConfig(restarts=3)
    reduced = record.reduced_pair
    result = oracle_optimize(reduced, cfg)
    m_red = complete_measurement(result.e_q_opt, reduced)
    m = lift_measurement(m_red, record)
    report = check_optimality(m, pair)
    certified = report.is_optimal
    return SolverOutcome(
        measurement=m,
        class_tag=classify(m_red, reduced),
        success=success_probability(m, pair),
        report=report,
        branch=BRANCH_ORACLE_CERTIFIED if certified else BRANCH_ORACLE,
        optimal=certified,
        warnings=notes + (() if certified else (
            "no analytic branch applied; success is the oracle's best known "
            "value and the checker did not certify it",)),
    )


def dispatch(pair: WeightedDensityPair,
             oracle_cfg: OracleConfig | None = None,
             with_certificate: bool = True) -> SolverOutcome:
    """Solve an arbitrary two-state instance end to end.

    Reduces first, then tries: closed forms, the four-dimensional solver
    (when the core is 4-dim of ranks two), the oracle as last resort.  The
    outcome's class tag always refers to the strictly skew core
    measurement; the measurement itself and the optimality report refer to
    the original pair.
    """
    record = reduce_fully(pair)
    notes = tuple(record.boundary_warnings)
    core = record.reduced_pair
    core_support = la.rank(core.total, pair.tol)
    if core_support == 0:
        return _trivial_outcome(record, pair)
    notes = notes + (BLOCK_STRUCTURE_NOTE,)

    core_outcome: SolverOutcome | None = None
    for family in (try_single_state_detection, try_fidelity_form):
        core_outcome = family(core)
        if core_outcome is not None:
            break
    if core_outcome is None and core_support == 4 and \
            la.rank(core.gamma1, pair.tol) == 2 and \
            la.rank(core.gamma2, pair.tol) == 2:
        try:
            core_outcome = solve_4d(core)
        except (NoSolutionFound, UsdKitError) as exc:
            notes = notes + (f"four-dimensional solver failed: {exc}",)
            core_outcome = None
    if core_outcome is None:
        return _oracle_fallback(record, pair, oracle_cfg, notes)

    m = lift_measurement(core_outcome.measurement, record)
    report = check_optimality(m, pair)
    certificate = None
    if with_certificate and report.is_optimal:
        try:
            certificate = build_certificate(m, pair)
        except CertificateFailure as exc:
            notes = notes + (f"certificate construction failed: {exc}",)
    return SolverOutcome(
        measurement=m,
        class_tag=core_outcome.class_tag,
        success=success_probability(m, pair),
        report=report,
        branch=core_outcome.branch,
        certificate=certificate,
        optimal=report.is_optimal,
        boundary=core_outcome.boundary,
        warnings=notes + core_outcome.warnings,
    )


# --------------------------------------------------------------------------
# sweeps
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class SweepRow:
    """One solved prior in a sweep."""

    p1: float
    success_probability: float
    class_tag: tuple[int, int]
    branch: str
    lower_bound: float
    upper_bound: float


def _min_supported_eigenvalue(a: np.ndarray, b: np.ndarray,
                              tol: ToleranceContext) -> float:
    sup = la.support(a, tol)
    if sup.size == 0:
        return 0.0
    root_inv = la.pseudo_inverse(la.sqrt_psd(a, tol), tol)
    compressed = la.hermitian_part(
        sup.basis.conj().T @ root_inv @ b @ root_inv @ sup.basis)
    return float(np.linalg.eigvalsh(compressed).min())


def sweep_bounds(rho1: np.ndarray, rho2: np.ndarray,
                 tol: ToleranceContext = DEFAULT_TOL):
    """Prior-independent bound data; returns bounds(p1) -> (lower, upper).

    The lower bound is the best single-state-detection success (a valid
    measurement for every prior).  The upper bound is the chord joining
    the priors where single state detection stops being optimal, which
    dominates the success probability by convexity; outside that prior
    range it coincides with the lower bound.
    """
    probe = WeightedDensityPair.from_states(rho1, rho2, 0.5, tol)
    record = reduce_fully(probe)
    sig1, sig2, xi = record.sigma1, record.sigma2, record.xi
    core1 = xi @ np.asarray(rho1, dtype=complex) @ xi
    core2 = xi @ np.asarray(rho2, dtype=complex) @ xi
    off1 = float(np.real(np.trace(sig1 @ rho1)))
    off2 = float(np.real(np.trace(sig2 @ rho2)))
    core_total = la.support(core1 + core2, tol)
    if core_total.size == 0:
        def bounds(p1: float):
            value = p1 * off1 + (1 - p1) * off2
            return value, value
        return bounds
    det2 = la.intersect(la.kernel(core1, tol), core_total, tol).projector()
    det1 = la.intersect(la.kernel(core2, tol), core_total, tol).projector()
    gain2 = float(np.real(np.trace(det2 @ core2)))
    gain1 = float(np.real(np.trace(det1 @ core1)))
    lam1 = max(_min_supported_eigenvalue(core1, core2, tol), 0.0)
    lam2 = max(_min_supported_eigenvalue(core2, core1, tol), 0.0)
    p_lo = lam1 / (1 + lam1)
    p_hi = 1.0 / (1 + lam2)

    def lower(p1: float) -> float:
        offset = p1 * off1 + (1 - p1) * off2
        return max((1 - p1) * gain2, p1 * gain1) + offset

    lo_val, hi_val = lower(p_lo), lower(p_hi)

    def bounds(p1: float):
        low = lower(p1)
        if p_lo < p1 < p_hi and p_hi > p_lo:
            t = (p1 - p_lo) / (p_hi - p_lo)
            return low, (1 - t) * lo_val + t * hi_val
        return low, low

    return bounds


def sweep(rho1: np.ndarray, rho2: np.ndarray, p1_grid,
          tol: ToleranceContext = DEFAULT_TOL,
          oracle_cfg: OracleConfig | None = None,
          with_certificate: bool = False) -> list[SweepRow]:
    """Dispatch every prior on the grid independently."""
    bounds = sweep_bounds(rho1, rho2, tol)
    rows = []
    for p1 in p1_grid:
        pair = WeightedDensityPair.from_states(rho1, rho2, float(p1), tol)
        outcome = dispatch(pair, oracle_cfg=oracle_cfg,
                           with_certificate=with_certificate)
        low, up = bounds(float(p1))
        rows.append(SweepRow(
            p1=float(p1),
            success_probability=outcome.success,
            class_tag=(outcome.class_tag.e1_rank, outcome.class_tag.e2_rank),
            branch=outcome.branch,
            lower_bound=low,
            upper_bound=up,
        ))
    return rows


def rows_to_csv(rows: list[SweepRow]) -> str:
    """Fixed-format CSV with 17 significant digits and LF line endings."""
    lines = ["p1,success,class_e1,class_e2,branch,lower_bound,upper_bound"]
    for r in rows:
        lines.append(
            f"{r.p1:.17g},{r.success_probability:.17g},{r.class_tag[0]},"
            f"{r.class_tag[1]},{r.branch},{r.lower_bound:.17g},"
            f"{r.upper_bound:.17g}")
    return "\n".join(lines) + "\n"


# --------------------------------------------------------------------------
# file formats
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class ProblemFile:
    """Parsed problem description: two unit-trace states and optionally p1."""

    dim: int
    rho1: np.ndarray
    rho2: np.ndarray
    p1: float | None = None

    def pair(self, p1: float | None = None,
             tol: ToleranceContext = DEFAULT_TOL) -> WeightedDensityPair:
        prior = p1 if p1 is not None else self.p1
        if prior is None:
            raise ValueError("no prior probability given (set p1)")
        return WeightedDensityPair.from_states(self.rho1, self.rho2, prior, tol)


def _matrix_from_json(obj, dim: int, where: str) -> np.ndarray:
    if not isinstance(obj, list) or len(obj) != dim:
        raise ValueError(f"{where}: expected {dim} rows")
    out = np.zeros((dim, dim), dtype=complex)
    for i, row in enumerate(obj):
        if not isinstance(row, list) or len(row) != dim:
            raise ValueError(f"{where}: row {i} must have {dim} entries")
        for j, entry in enumerate(row):
            if (not isinstance(entry, list) or len(entry) != 2
                    or not all(isinstance(v, (int, float)) for v in entry)):
                raise ValueError(
                    f"{where}: entry ({i},{j}) must be a [re, im] pair")
            out[i, j] = complex(entry[0], entry[1])
    return out


def _matrix_to_json(a: np.ndarray):
    return [[[float(np.real(v)), float(np.imag(v))] for v in row]
            for row in np.asarray(a)]


def _validate_state(rho: np.ndarray, tol: ToleranceContext, where: str):
    if not la.is_hermitian(rho, tol):
        raise ValueError(f"{where}: matrix is not Hermitian within tolerance")
    if not la.is_psd(rho, tol):
        raise ValueError(f"{where}: matrix is not positive semi-definite")
    tr = float(np.real(np.trace(rho)))
    if abs(tr - 1.0) > max(tol.equality, 1e-9):
        raise ValueError(f"{where}: trace {tr} differs from 1")


def load_problem(path, tol: ToleranceContext = DEFAULT_TOL) -> ProblemFile:
    """Parse and validate a problem JSON file."""
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    if not isinstance(data, dict):
        raise ValueError("problem file must contain a JSON object")
    try:
        dim = int(data["dim"])
    except KeyError:
        raise ValueError("problem file: missing field 'dim'") from None
    if dim <= 0:
        raise ValueError("problem file: dim must be positive")
    rho1 = _matrix_from_json(data.get("rho1"), dim, "rho1")
    rho2 = _matrix_from_json(data.get("rho2"), dim, "rho2")
    _validate_state(rho1, tol, "rho1")
    _validate_state(rho2, tol, "rho2")
    p1 = data.get("p1")
    if p1 is not None:
        p1 = float(p1)
        if not 0.0 < p1 < 1.0:
            raise ValueError("problem file: p1 must lie strictly in (0, 1)")
    return ProblemFile(dim, rho1, rho2, p1)


def _format_matrix(a: np.ndarray, indent: str) -> str:
    rows = [indent + " " + json.dumps(row, separators=(",", ":"))
            for row in _matrix_to_json(a)]
    return "[\n" + ",\n".join(rows) + "\n" + indent + "]"


def save_problem(path, problem: ProblemFile) -> None:
    parts = [f'  "dim": {problem.dim}',
             f'  "rho1": {_format_matrix(problem.rho1, "  ")}',
             f'  "rho2": {_format_matrix(problem.rho2, "  ")}']
    if problem.p1 is not None:
        parts.append(f'  "p1": {json.dumps(problem.p1)}')
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("{\n" + ",\n".join(parts) + "\n}\n")


def load_measurement(path, dim: int) -> UsdMeasurement:
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    if not isinstance(data, dict):
        raise ValueError("measurement file must contain a JSON object")
    elements = []
    for name in ("e1", "e2", "e_inconclusive"):
        if name not in data:
            raise ValueError(f"measurement file: missing field '{name}'")
        elements.append(_matrix_from_json(data[name], dim, name))
    return UsdMeasurement(*elements)


def save_measurement(path, m: UsdMeasurement) -> None:
    parts = [f'  "{name}": {_format_matrix(matrix, "  ")}'
             for name, matrix in (("e1", m.e1), ("e2", m.e2),
                                  ("e_inconclusive", m.e_inconclusive))]
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("{\n" + ",\n".join(parts) + "\n}\n")
