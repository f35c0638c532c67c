"""Shared construction helpers for the test suite."""
from __future__ import annotations

import numpy as np

from usdkit import WeightedDensityPair
from usdkit.linalg import dag
from usdkit.reductions import is_strictly_skew


def unit_phase(q: float) -> complex:
    """e^{i pi q}: principal value of (-1)**q."""
    return complex(np.exp(1j * np.pi * q))


def random_unit(rng: np.random.Generator, d: int) -> np.ndarray:
    v = rng.normal(size=d) + 1j * rng.normal(size=d)
    return v / np.linalg.norm(v)


def random_density(rng: np.random.Generator, d: int, r: int) -> np.ndarray:
    """Random rank-r density matrix on C^d."""
    a = rng.normal(size=(d, r)) + 1j * rng.normal(size=(d, r))
    rho = a @ dag(a)
    return rho / np.real(np.trace(rho))


def random_skew_pair(rng: np.random.Generator, p1: float | None = None,
                     d: int = 4, r: int = 2,
                     margin: float = 0.05) -> WeightedDensityPair:
    """Random strictly skew pair of rank-r states on C^d.

    Generic draws are strictly skew with probability one.  Samples whose
    support geometry sits within `margin` of a reducible configuration
    (principal cosines near 0 or 1) are redrawn: those instances are
    ill-conditioned for every method and would only test roundoff.
    """
    from usdkit.linalg import support, jordan_bases

    while True:
        rho1 = random_density(rng, d, r)
        rho2 = random_density(rng, d, r)
        weight = float(rng.uniform(0.1, 0.9)) if p1 is None else p1
        pair = WeightedDensityPair.from_states(rho1, rho2, weight)
        if not is_strictly_skew(pair):
            continue
        _, _, cosines = jordan_bases(support(pair.gamma1), support(pair.gamma2))
        if len(cosines) and (cosines.max() > 1 - margin or cosines.min() < margin):
            continue
        return pair


def peres_states(dim: int = 2):
    """The classic symmetric pure-state pair |1>, |+>."""
    rho1 = np.zeros((dim, dim), dtype=complex)
    rho1[1, 1] = 1.0
    rho2 = np.zeros((dim, dim), dtype=complex)
    rho2[:2, :2] = 0.5
    return rho1, rho2


def peres_nonproper_measurement():
    """The non-proper optimal USD measurement from the motivating example
    (lives in C^3, leaks into the third direction)."""
    strength = 3.0 - 3.0 / np.sqrt(2)
    f1 = np.array([1, -1, -1], dtype=complex) / np.sqrt(3)
    f2 = np.array([np.sqrt(2), 0, 1], dtype=complex) / np.sqrt(3)
    e1 = strength * np.outer(f1, f1.conj())
    e2 = strength * np.outer(f2, f2.conj())
    return e1, e2, np.eye(3) - e1 - e2


def example1_states():
    """Rank-2 pair on C^4 with small-rational entries (sweep workhorse)."""
    rho1 = np.diag([1.0, 2.0, 0.0, 0.0]).astype(complex) / 3.0
    rho2 = np.array([
        [11, 10, 12, 10],
        [10, 10, 10, 10],
        [12, 10, 14, 10],
        [10, 10, 10, 10],
    ], dtype=complex) / 45.0
    return rho1, rho2


def examples2_states():
    """Asymmetric rank-2 pair on C^4 whose sweep shows a direct
    single-state-detection -> fidelity-form transition."""
    rho1 = np.diag([0.5 + np.sqrt(5 / 22), 0.5 - np.sqrt(5 / 22), 0.0, 0.0]
                   ).astype(complex)
    w = (1 / (2 * np.sqrt(41))) * np.array([
        unit_phase(1 / 7) * (np.sqrt(22) + 2 * np.sqrt(5)),
        unit_phase(1 / 7) * (np.sqrt(22) - 2 * np.sqrt(5)),
        2 * np.sqrt(10),
        2 * np.sqrt(10),
    ], dtype=complex)
    v = (1 / np.sqrt(10)) * np.array([
        unit_phase(4 / 21).conjugate(),
        unit_phase(17 / 21),
        2 * np.sqrt(2) * unit_phase(1 / 5),
        0.0,
    ], dtype=complex)
    rho2 = (5 / 46) * np.outer(v, v.conj()) + (41 / 46) * np.outer(w, w.conj())
    return rho1, rho2
