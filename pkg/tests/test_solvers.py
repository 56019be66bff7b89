import itertools

import numpy as np
import pytest

from unlabeled_sensing import (
    AdmmConfig,
    ModelParams,
    Permutation,
    admm_solve,
    apply_rows,
    estimate_b,
    generate,
    hamming,
    init_sort,
    make_rng,
    oracle_ml,
    residual,
)
from unlabeled_sensing.errors import SizeMismatch


def fit(perm, X, Y, B):
    return float(np.sum((Y - apply_rows(perm, X @ B)) ** 2))


def all_perms(n):
    return [Permutation(p) for p in itertools.permutations(range(n))]


def test_oracle_noiseless_recovery():
    params = ModelParams(n=20, p=4, m=3, h=8, snr=1e30, sigma_sq=1e-30)
    rng = make_rng(0)
    for _ in range(10):
        inst = generate(params, rng)
        assert hamming(oracle_ml(inst.X, inst.Y, inst.B_star), inst.Pi_star) == 0


def test_oracle_matches_enumeration():
    params = ModelParams(n=6, p=2, m=2, h=4, snr=2.0)
    perms = all_perms(6)
    rng = make_rng(1)
    for _ in range(100):
        inst = generate(params, rng)
        est = oracle_ml(inst.X, inst.Y, inst.B_star)
        costs = [fit(p, inst.X, inst.Y, inst.B_star) for p in perms]
        best = min(costs)
        assert fit(est, inst.X, inst.Y, inst.B_star) == pytest.approx(best, rel=1e-9)
        if sorted(costs)[1] > best * (1 + 1e-9):
            assert est == perms[int(np.argmin(costs))]


def test_oracle_objective_expansion():
    params = ModelParams(n=40, p=5, m=3, h=20, snr=4.0)
    inst = generate(params, make_rng(2))
    X, Y, B = inst.X, inst.Y, inst.B_star
    est = oracle_ml(X, Y, B)
    C = Y @ (X @ B).T
    inner = float(np.sum(est.matrix() * C))
    expanded = np.sum(Y**2) + np.sum((X @ B) ** 2) - 2 * inner
    assert fit(est, X, Y, B) == pytest.approx(expanded, rel=1e-8)
    rng = np.random.default_rng(2)
    for _ in range(100):
        other = Permutation(rng.permutation(40))
        assert fit(est, X, Y, B) <= fit(other, X, Y, B) + 1e-9


def test_oracle_shape_checks():
    with pytest.raises(SizeMismatch):
        oracle_ml(np.ones((4, 2)), np.ones((4, 3)), np.ones((2, 2)))


def test_estimate_b_examples():
    params = ModelParams(n=30, p=4, m=3, h=6, snr=1e30, sigma_sq=1e-30)
    inst = generate(params, make_rng(3))
    B = estimate_b(inst.Pi_star, inst.X, inst.Y)
    assert np.linalg.norm(B - inst.B_star) <= 1e-6 * np.linalg.norm(inst.B_star)
    assert np.all(estimate_b(inst.Pi_star, inst.X, np.zeros((30, 2))) == 0.0)


def test_estimate_b_is_stationary():
    rng = np.random.default_rng(4)
    X = rng.standard_normal((20, 3))
    Y = rng.standard_normal((20, 2))
    perm = Permutation(rng.permutation(20))
    B = estimate_b(perm, X, Y)
    base = fit(perm, X, Y, B)
    assert base == pytest.approx(residual(perm, X, Y), rel=1e-8)
    for _ in range(50):
        D = rng.standard_normal(B.shape)
        D *= 1e-3 * np.linalg.norm(B) / np.linalg.norm(D)
        assert fit(perm, X, Y, B + D) >= base


def sort_score(perm, X, Y):
    return float(Y.mean(axis=1) @ apply_rows(perm, X.mean(axis=1))) ** 2


def test_init_sort_examples():
    rng = np.random.default_rng(5)
    X = rng.standard_normal((7, 3))
    perm = init_sort(X, X)
    rx = X.mean(axis=1)
    assert sort_score(perm, X, X) == pytest.approx(float(rx @ rx) ** 2)
    X2 = np.array([[1.0], [2.0]])
    Y2 = np.array([[-5.0], [3.0]])
    best = max(sort_score(p, X2, Y2) for p in all_perms(2))
    assert sort_score(init_sort(X2, Y2), X2, Y2) == best


def test_init_sort_matches_enumeration():
    rng = np.random.default_rng(6)
    for _ in range(100):
        n = int(rng.integers(2, 8))
        X = rng.standard_normal((n, 2))
        Y = rng.standard_normal((n, 3))
        best = max(sort_score(p, X, Y) for p in all_perms(n))
        assert sort_score(init_sort(X, Y), X, Y) == pytest.approx(best, rel=1e-12)


def test_admm_identity_instance():
    rng = np.random.default_rng(7)
    X = rng.standard_normal((20, 3))
    Y = X @ rng.standard_normal((3, 4))
    trace = admm_solve(X, Y)
    assert trace.final == Permutation.identity(20)
    assert trace.converged and trace.iterations_run <= 3


def test_admm_noiseless_recovery():
    params = ModelParams(n=50, p=5, m=10, h=10, snr=1e30, sigma_sq=1e-30)
    rng = make_rng(8)
    hits = 0
    for _ in range(100):
        inst = generate(params, rng)
        hits += admm_solve(inst.X, inst.Y).final == inst.Pi_star
    assert hits >= 95


def test_admm_trace_contract():
    params = ModelParams(n=40, p=4, m=2, h=20, snr=5.0)
    inst = generate(params, make_rng(9))
    trace = admm_solve(inst.X, inst.Y, AdmmConfig(t_max=7, starts=("sort",)))
    assert trace.iterations_run <= 7
    assert len(trace.objective_history) == trace.iterations_run + 1
    for p1, p2 in trace.history:
        assert sorted(p1.mapping) == list(range(40)) and sorted(p2.mapping) == list(range(40))
    if trace.converged:
        assert trace.history[-1][0] == trace.history[-1][1]
    assert trace.final_residual == pytest.approx(residual(trace.final, inst.X, inst.Y), rel=1e-8)
    assert trace.final_residual <= min(trace.objective_history) + 1e-9
    rows = list(trace.rows(inst.Pi_star))
    assert [r[0] for r in rows] == list(range(len(rows)))
    assert rows[0][1] == hamming(trace.history[0][0], inst.Pi_star)


def test_admm_keeps_lower_residual_start():
    params = ModelParams(n=30, p=3, m=4, h=6, snr=50.0)
    inst = generate(params, make_rng(10))
    both = admm_solve(inst.X, inst.Y)
    for start in ("sort", "identity"):
        single = admm_solve(inst.X, inst.Y, AdmmConfig(starts=(start,)))
        assert both.final_residual <= single.final_residual


def test_admm_zero_data():
    X = np.random.default_rng(11).standard_normal((10, 2))
    trace = admm_solve(X, np.zeros((10, 3)))
    assert trace.rho == 1.0 and trace.final_residual == 0.0


@pytest.mark.parametrize("kw", [dict(rho=0.0), dict(rho=-1.0), dict(t_max=0), dict(starts=()),
                                dict(starts=("random",))])
def test_admm_config_validation(kw):
    with pytest.raises(ValueError):
        AdmmConfig(**kw)
