import numpy as np
import pytest

from usdkit import (NonConvergence, OracleConfig, WeightedDensityPair,
                    complete_measurement, is_proper, success_probability,
                    try_single_state_detection, uniqueness_probe)
from usdkit import linalg as la
from usdkit.oracle import (FeasibleSet, oracle_optimize,
                           random_feasible_inconclusive)

from util import example1_states, peres_states, random_skew_pair

IDP = 1 - 1 / np.sqrt(2)


def fidelity_bound(pair):
    r1, r2 = la.sqrt_psd(pair.gamma1), la.sqrt_psd(pair.gamma2)
    return pair.total_trace - 2 * float(
        np.sum(np.linalg.svd(r1 @ r2, compute_uv=False)))


def test_orthogonal_states_full_recovery():
    g1 = np.diag([0.5, 0.0, 0.0]).astype(complex)
    g2 = np.diag([0.0, 0.3, 0.0]).astype(complex)
    pair = WeightedDensityPair(3, g1, g2)
    res = oracle_optimize(pair, OracleConfig(seed=1, ascent_iters=40))
    assert res.success == pytest.approx(pair.total_trace, abs=1e-9)
    np.testing.assert_allclose(res.e_q_opt, np.diag([0, 0, 1]), atol=1e-7)


def test_peres_value():
    rho1, rho2 = peres_states(dim=2)
    pair = WeightedDensityPair.from_states(rho1, rho2, 0.5)
    res = oracle_optimize(pair, OracleConfig(seed=2, ascent_iters=60))
    assert res.success == pytest.approx(IDP, abs=1e-9)


def test_deterministic_given_seed(rng):
    pair = random_skew_pair(rng)
    cfg = OracleConfig(seed=11, ascent_iters=40)
    r1 = oracle_optimize(pair, cfg)
    r2 = oracle_optimize(pair, cfg)
    assert r1.success == r2.success
    np.testing.assert_array_equal(r1.e_q_opt, r2.e_q_opt)


def test_history_monotone_up_to_projection(rng):
    pair = random_skew_pair(rng)
    res = oracle_optimize(pair, OracleConfig(seed=3, ascent_iters=120))
    hist = np.array(res.history)
    assert np.all(np.diff(hist) >= -1e-6)


def test_never_exceeds_fidelity_bound(rng):
    for trial in range(8):
        pair = random_skew_pair(rng)
        res = oracle_optimize(pair, OracleConfig(seed=trial, ascent_iters=50))
        assert res.success <= fidelity_bound(pair) + 1e-6


def test_never_below_detection_value(rng):
    seen = 0
    for trial in range(25):
        pair = random_skew_pair(rng)
        ssd = try_single_state_detection(pair)
        if ssd is None:
            continue
        seen += 1
        res = oracle_optimize(pair, OracleConfig(seed=trial, ascent_iters=50))
        assert res.success >= ssd.success - 1e-6
        if seen >= 3:
            break
    assert seen >= 1


def test_separation_constraint_at_termination(rng):
    pair = random_skew_pair(rng)
    res = oracle_optimize(pair, OracleConfig(seed=4, ascent_iters=40))
    cross = pair.gamma1 @ (np.eye(4) - res.e_q_opt) @ pair.gamma2
    assert np.linalg.norm(cross) <= 1e-8
    assert res.feasibility_residual <= 1e-8


def test_example1_reference_value():
    # frozen reference for the midpoint prior, produced by this oracle;
    # guards against regressions of the optimizer itself
    rho1, rho2 = example1_states()
    pair = WeightedDensityPair.from_states(rho1, rho2, 0.5)
    res = oracle_optimize(pair, OracleConfig(seed=5, ascent_iters=60))
    assert res.success == pytest.approx(0.4492730800184392, abs=1e-8)


def test_completed_oracle_measurement_is_proper(rng):
    pair = random_skew_pair(rng)
    res = oracle_optimize(pair, OracleConfig(seed=6, ascent_iters=40))
    m = complete_measurement(res.e_q_opt, pair)
    assert is_proper(m, pair)
    assert success_probability(m, pair) == pytest.approx(res.success, abs=1e-9)


def test_random_feasible_points_are_feasible(rng):
    pair = random_skew_pair(rng)
    feas = FeasibleSet(pair)
    for seed in range(5):
        e = random_feasible_inconclusive(pair, seed=seed)
        assert feas.residual(e) <= 1e-11
        # distinct seeds give distinct points
    e1 = random_feasible_inconclusive(pair, seed=0)
    e2 = random_feasible_inconclusive(pair, seed=1)
    assert np.linalg.norm(e1 - e2) > 1e-3


def test_uniqueness_probe_positive(rng):
    pair = random_skew_pair(rng)
    probe = uniqueness_probe(pair, OracleConfig(seed=7, restarts=10,
                                                ascent_iters=40))
    assert probe.unique
    assert probe.max_distance <= 1e-7
    assert len(probe.result.per_restart_distances) == 45


def test_uniqueness_probe_negative_control(rng):
    # deliberately under-converged runs scatter: diagnostic false with the
    # spread reported
    pair = random_skew_pair(rng)
    cfg = OracleConfig(seed=8, restarts=10, max_iters=3, ascent_iters=3,
                       refine=False)
    probe = uniqueness_probe(pair, cfg)
    assert not probe.unique
    assert probe.max_distance > 10 * cfg.convergence_tol
    assert max(probe.result.per_restart_distances) == probe.max_distance


def test_nonconvergence_raised(rng):
    pair = random_skew_pair(rng)
    cfg = OracleConfig(seed=9, max_iters=2, ascent_iters=2, refine=False,
                       convergence_tol=1e-15)
    with pytest.raises(NonConvergence):
        oracle_optimize(pair, cfg)


def test_probe_requires_ten_restarts(rng):
    pair = random_skew_pair(rng)
    with pytest.raises(ValueError):
        uniqueness_probe(pair, OracleConfig(restarts=3))
