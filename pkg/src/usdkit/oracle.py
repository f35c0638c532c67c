"""Independent brute-force optimizer over inconclusive operators.

The feasible set is the convex body of Hermitian E with 0 <= E <= 1 that
act as identity on the common kernel and satisfy the linear separation
constraint gamma1 (1 - E) gamma2 = 0.  The success probability is a linear
functional of E, so the optimum is found by projected supergradient
ascent, where the projection onto the feasible set runs cyclic
Dykstra-style alternating projections (both spectral clips plus the exact
affine projection).  A diminishing-step first-order phase alone hovers at
step-size accuracy, so a splitting refinement (alternating the affine
projection with the spectral box, plus a running dual correction) is run
afterwards to push the iterate to certificate-grade residuals; the final
answer is re-projected onto the feasible set.

This module deliberately knows nothing about optimal-measurement theory:
it only uses the feasibility conditions, so it can serve as an
independent reference for the analytic solvers.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .errors import NonConvergence
from .linalg import dag, hermitian_part
from .model import WeightedDensityPair

__all__ = [
    "OracleConfig", "OracleResult", "UniquenessReport", "FeasibleSet",
    "oracle_optimize", "uniqueness_probe", "random_feasible_inconclusive",
]


@dataclass(frozen=True)
class OracleConfig:
    """Knobs for the optimizer.

    step_rule selects the diminishing schedule of the ascent phase
    ("1/sqrt(k)" or "geometric"); refine enables the splitting phase that
    follows it.  max_iters caps the total iteration count across phases.
    """

    seed: int = 0
    restarts: int = 1
    max_iters: int = 200_000
    step_rule: str = "1/sqrt(k)"
    step_scale: float = 0.3
    ascent_iters: int = 150
    convergence_tol: float = 1e-8
    refine: bool = True

    def __post_init__(self):
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")
        if self.convergence_tol <= 0:
            raise ValueError("convergence_tol must be positive")
        if self.step_rule not in ("1/sqrt(k)", "geometric"):
            raise ValueError(f"unknown step_rule {self.step_rule!r}")


@dataclass(frozen=True)
class OracleResult:
    """Best feasible inconclusive operator found, with diagnostics."""

    e_q_opt: np.ndarray
    success: float
    per_restart_distances: tuple[float, ...]
    feasibility_residual: float
    iterations: int
    history: tuple[float, ...] = field(default=(), repr=False)


@dataclass(frozen=True)
class UniquenessReport:
    """Spread of the converged optimizers across restarts."""

    unique: bool
    max_distance: float
    result: OracleResult

    def __bool__(self) -> bool:
        return self.unique


def _hermitian_basis(d: int) -> np.ndarray:
    """Orthonormal real basis of d x d Hermitian matrices."""
    mats = []
    for i in range(d):
        m = np.zeros((d, d), dtype=complex)
        m[i, i] = 1.0
        mats.append(m)
    inv_sqrt2 = 1.0 / np.sqrt(2.0)
    for i in range(d):
        for j in range(i + 1, d):
            m = np.zeros((d, d), dtype=complex)
            m[i, j] = m[j, i] = inv_sqrt2
            mats.append(m)
            m = np.zeros((d, d), dtype=complex)
            m[i, j] = -1j * inv_sqrt2
            m[j, i] = 1j * inv_sqrt2
            mats.append(m)
    return np.array(mats)


class FeasibleSet:
    """Projection machinery for the inconclusive-operator feasible set."""

    def __init__(self, pair: WeightedDensityPair):
        self.pair = pair
        d = pair.dim
        self.dim = d
        self.kernel_basis = pair.common_kernel().basis
        self._basis = _hermitian_basis(d)
        n = len(self._basis)
        g1, g2 = pair.gamma1, pair.gamma2
        blocks = [(np.array([(g1 @ h @ g2).ravel() for h in self._basis]).T,
                   (g1 @ g2).ravel())]
        if self.kernel_basis.shape[1]:
            kb = self.kernel_basis
            blocks.append((np.array([(h @ kb).ravel() for h in self._basis]).T,
                           kb.ravel()))
        rows = np.vstack([np.vstack([b.real, b.imag]) for b, _ in blocks])
        rhs = np.concatenate([np.concatenate([c.real, c.imag]) for _, c in blocks])
        self._rows = rows
        self._rhs = rhs
        self._solver = np.linalg.pinv(rows, rcond=1e-12)

    # -- vectorization ----------------------------------------------------
    def to_vec(self, e: np.ndarray) -> np.ndarray:
        return np.real(np.tensordot(self._basis.conj(), e, axes=([1, 2], [0, 1])))

    def to_mat(self, x: np.ndarray) -> np.ndarray:
        return np.tensordot(x, self._basis, axes=(0, 0))

    # -- individual projections -------------------------------------------
    def project_affine(self, e: np.ndarray) -> np.ndarray:
        x = self.to_vec(e)
        x = x - self._solver @ (self._rows @ x - self._rhs)
        return self.to_mat(x)

    @staticmethod
    def _clip_spectrum(e: np.ndarray, lo, hi) -> np.ndarray:
        w, u = np.linalg.eigh(hermitian_part(e))
        return (u * np.clip(w, lo, hi)) @ dag(u)

    def project(self, e: np.ndarray, cycles: int = 500,
                tol: float = 1e-13) -> np.ndarray:
        """Dykstra projection onto the full feasible set.

        Runs until the iterate's feasibility residual drops below tol (or
        the cycle cap); the result is clipped to the spectral box once more
        so the returned operator satisfies 0 <= E <= 1 exactly, with the
        remaining residual pushed into the affine constraint.
        """
        x = hermitian_part(e)
        inc_psd = np.zeros_like(x)
        inc_cap = np.zeros_like(x)
        inc_aff = np.zeros_like(x)
        for cycle in range(cycles):
            y = self._clip_spectrum(x + inc_psd, 0.0, None)
            inc_psd = x + inc_psd - y
            z = self._clip_spectrum(y + inc_cap, None, 1.0)
            inc_cap = y + inc_cap - z
            nxt = self.project_affine(z + inc_aff)
            inc_aff = z + inc_aff - nxt
            moved = float(np.linalg.norm(nxt - x))
            x = nxt
            if moved < tol and (cycle % 8 == 0 or moved == 0.0) \
                    and self.residual(x) < max(tol, 1e-13):
                break
        return self._clip_spectrum(x, 0.0, 1.0)

    def residual(self, e: np.ndarray) -> float:
        """Worst violation of any feasibility condition."""
        w = np.linalg.eigvalsh(hermitian_part(e))
        res = max(0.0, -float(w.min()), float(w.max()) - 1.0)
        cross = self.pair.gamma1 @ (np.eye(self.dim) - e) @ self.pair.gamma2
        res = max(res, float(np.linalg.norm(cross)))
        kb = self.kernel_basis
        if kb.shape[1]:
            res = max(res, float(np.abs(e @ kb - kb).max()))
        return res

    def success(self, e: np.ndarray) -> float:
        return float(np.real(np.trace((np.eye(self.dim) - e) @ self.pair.total)))


def random_feasible_inconclusive(pair: WeightedDensityPair, seed: int = 0,
                                 cycles: int = 60_000,
                                 tol: float = 1e-13) -> np.ndarray:
    """A random valid inconclusive operator, via the feasibility projection.

    Draws a contraction X, forms 1 - X X^dag and projects it onto the
    feasible set; deterministic in the seed.
    """
    feas = FeasibleSet(pair)
    rng = np.random.default_rng(seed)
    d = pair.dim
    x = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    x /= 1.3 * np.linalg.norm(x, 2)
    return feas.project(np.eye(d) - x @ dag(x), cycles=cycles, tol=tol)


def _ascent_phase(feas: FeasibleSet, e0, iters, cfg: OracleConfig):
    """Projected supergradient ascent with a diminishing step schedule."""
    grad = feas.pair.total  # ascent direction is -grad for the failure mass
    grad_norm = max(float(np.linalg.norm(grad, 2)), 1e-300)
    e = e0
    best = e0
    best_success = feas.success(e0)
    history = [best_success]
    step = cfg.step_scale / grad_norm
    for k in range(1, iters + 1):
        if cfg.step_rule == "1/sqrt(k)":
            alpha = step / np.sqrt(k)
        else:
            alpha = step * 0.5 ** (k // 50)
        e = feas.project(e - alpha * grad, cycles=20, tol=1e-12)
        s = feas.success(e)
        if s > best_success and feas.residual(e) <= cfg.convergence_tol:
            best_success, best = s, e
        history.append(best_success)
    # pull the tracked point fully into the feasible set so later phases
    # compare genuinely feasible successes (loose projections inflate them)
    best = feas.project(best, cycles=30_000, tol=1e-13)
    best_success = feas.success(best)
    history.append(best_success)
    return best, best_success, history


def _refine_phase(feas: FeasibleSet, e0, iters, tol):
    """Operator-splitting refinement: alternate the exact affine projection
    with the spectral box while a running correction term accumulates the
    constraint forces; converges linearly on non-degenerate instances."""
    objective = feas.pair.total
    objective = objective / max(float(np.linalg.norm(objective, 2)), 1e-300)
    boxed = hermitian_part(e0)
    correction = np.zeros_like(boxed)
    used = 0
    for used in range(1, iters + 1):
        affine = feas.project_affine(boxed - correction - objective)
        prev = boxed
        boxed = feas._clip_spectrum(affine + correction, 0.0, 1.0)
        correction = correction + affine - boxed
        if (np.linalg.norm(affine - boxed) < tol
                and np.linalg.norm(boxed - prev) < tol):
            break
    return boxed, used


def oracle_optimize(pair: WeightedDensityPair,
                    cfg: OracleConfig = OracleConfig()) -> OracleResult:
    """Maximize the success probability over valid inconclusive operators.

    Each restart starts from a random feasible point, runs the projected
    supergradient ascent and (when enabled) the splitting refinement, and
    ends with a final Dykstra projection so the reported operator is
    feasible to within the convergence tolerance.  The reported success is
    the best over restarts; restart-to-restart spreads are returned for
    uniqueness probing.
    """
    feas = FeasibleSet(pair)
    finals = []
    best = None
    best_success = -np.inf
    best_history: list[float] = []
    total_iters = 0
    for restart in range(cfg.restarts):
        seed = cfg.seed * 1_000_003 + restart
        e = random_feasible_inconclusive(pair, seed=seed)
        budget = cfg.max_iters
        ascent_iters = min(cfg.ascent_iters, budget) if cfg.refine else budget
        e, success, history = _ascent_phase(feas, e, ascent_iters, cfg)
        total_iters += ascent_iters
        if cfg.refine and budget > ascent_iters:
            refined, used = _refine_phase(feas, e, budget - ascent_iters,
                                          tol=min(1e-13, cfg.convergence_tol))
            total_iters += used
            refined = feas.project(refined, cycles=30_000,
                                   tol=min(1e-14, cfg.convergence_tol))
            s = feas.success(refined)
            if s >= success - 1e-12 and \
                    feas.residual(refined) <= cfg.convergence_tol:
                e, success = refined, s
                history.append(s)
        finals.append(e)
        if success > best_success:
            best, best_success, best_history = e, success, history
    residual = feas.residual(best)
    if residual > cfg.convergence_tol:
        raise NonConvergence(
            f"feasibility residual {residual:.3e} above tolerance "
            f"{cfg.convergence_tol:.1e} after {total_iters} iterations")
    distances = tuple(
        float(np.linalg.norm(a - b))
        for a, b in combinations(finals, 2))
    return OracleResult(
        e_q_opt=best,
        success=best_success,
        per_restart_distances=distances,
        feasibility_residual=residual,
        iterations=total_iters,
        history=tuple(best_history),
    )


def uniqueness_probe(pair: WeightedDensityPair,
                     cfg: OracleConfig | None = None) -> UniquenessReport:
    """Do independent restarts land on one optimizer?

    Runs the oracle with at least ten restarts and reports whether the
    largest pairwise distance between the converged inconclusive operators
    stays below ten times the convergence tolerance.
    """
    if cfg is None:
        cfg = OracleConfig(restarts=10)
    if cfg.restarts < 10:
        raise ValueError("uniqueness probing needs at least 10 restarts")
    result = oracle_optimize(pair, cfg)
    spread = max(result.per_restart_distances, default=0.0)
    return UniquenessReport(
        unique=spread <= 10 * cfg.convergence_tol,
        max_distance=spread,
        result=result,
    )
