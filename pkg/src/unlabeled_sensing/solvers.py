"""Permutation estimators.

* :func:`oracle_ml` -- maximum likelihood with the signal ``B*`` known, a
  single linear assignment.
* :func:`estimate_b` -- least-squares signal for a fixed permutation.
* :func:`admm_solve` -- alternating updates on a split ``Π1 = Π2`` of the
  unknown-signal problem, each update an exact linear assignment, started
  from :func:`init_sort` and from the identity.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .assignment import lap_maximize
from .errors import SizeMismatch
from .linalg import as_matrix, least_squares_solve, orth_projector
from .permutation import Permutation, apply_rows, hamming


def lap_over_matrices(M) -> Permutation:
    """Permutation whose matrix ``Π`` maximizes ``<Π, M> = sum_i M[π(i), i]``."""
    # the assignment solver maximizes sum_i C[i, p(i)]; transpose to match
    perm, _ = lap_maximize(np.asarray(M).T)
    return perm


def oracle_ml(X, Y, B_star) -> Permutation:
    X = as_matrix(X, "X")
    Y = as_matrix(Y, "Y")
    B_star = as_matrix(B_star, "B_star")
    if X.shape[1] != B_star.shape[0] or Y.shape != (X.shape[0], B_star.shape[1]):
        raise SizeMismatch(f"incompatible shapes X{X.shape}, Y{Y.shape}, B{B_star.shape}")
    # <Π, Y B^T X^T> = sum_i <Y[π(i)], (X B)[i]>
    return lap_over_matrices(Y @ (X @ B_star).T)


def estimate_b(p: Permutation, X, Y) -> np.ndarray:
    return least_squares_solve(apply_rows(p, X), Y)


def _sort_match(order_y: np.ndarray, order_x: np.ndarray) -> Permutation:
    mapping = np.empty(order_x.size, dtype=np.int64)
    mapping[order_x] = order_y
    return Permutation(mapping)


def init_sort(X, Y) -> Permutation:
    """Sorting initializer: maximize ``<mean row of Y, Π mean row of X>²``.

    Both sign alignments are tried (ascending-to-ascending and
    ascending-to-descending); ties keep the ascending one.
    """
    X = as_matrix(X, "X")
    Y = as_matrix(Y, "Y")
    ry = Y.mean(axis=1)
    rx = X.mean(axis=1)
    oy = np.argsort(ry, kind="stable")
    ox = np.argsort(rx, kind="stable")
    asc = _sort_match(oy, ox)
    desc = _sort_match(oy[::-1], ox)
    score_asc = float(ry @ apply_rows(asc, rx)) ** 2
    score_desc = float(ry @ apply_rows(desc, rx)) ** 2
    return desc if score_desc > score_asc else asc


START_SORT = "sort"
START_IDENTITY = "identity"


@dataclass(frozen=True)
class AdmmConfig:
    """Penalty ``rho`` (``None``: scale to the data) and iteration cap.

    The loop stops as soon as both split copies agree.  One run is made per
    entry of ``starts`` and the lowest-residual outcome is kept.
    ``printed_sign`` flips the data term of the second update so that it
    minimizes the fit; off by default, kept for comparison runs only.
    """

    rho: float | None = None
    t_max: int = 100
    starts: tuple[str, ...] = (START_SORT, START_IDENTITY)
    printed_sign: bool = False

    def __post_init__(self):
        if self.rho is not None and not self.rho > 0:
            raise ValueError(f"rho must be positive, got {self.rho}")
        if self.t_max < 1:
            raise ValueError(f"t_max must be >= 1, got {self.t_max}")
        if not self.starts or any(s not in (START_SORT, START_IDENTITY) for s in self.starts):
            raise ValueError(f"starts must be drawn from sort/identity, got {self.starts!r}")


@dataclass
class AdmmTrace:
    iterations_run: int
    converged: bool
    objective_history: list[float]
    final: Permutation
    final_residual: float
    rho: float
    start: str = START_SORT
    history: list[tuple[Permutation, Permutation]] = field(default_factory=list, repr=False)

    def rows(self, truth: Permutation | None = None):
        """``(t, hamming of Π1 to truth or None, residual of Π1)`` per iteration."""
        for t, ((p1, _), res) in enumerate(zip(self.history, self.objective_history)):
            yield t, (hamming(p1, truth) if truth is not None else None), res


def default_rho(YYt: np.ndarray, Q: np.ndarray) -> float:
    """``0.1 ‖Y Yᵀ P_X‖_F / n``."""
    n = YYt.shape[0]
    return 0.1 * float(np.linalg.norm((YYt @ Q) @ Q.T)) / n


def _admm_run(start: Permutation, Q, Y, YYt, rho: float, cfg: AdmmConfig) -> AdmmTrace:
    n = Y.shape[0]
    y_energy = float(np.sum(Y * Y))

    def resid(perm: Permutation) -> float:
        # P_{ΠX} = Π P_X Πᵀ, so ‖P_{ΠX} Y‖ = ‖Qᵀ Πᵀ Y‖
        fit = Q.T @ apply_rows(perm.inverse(), Y)
        return max(y_energy - float(np.sum(fit * fit)), 0.0)

    sign = -1.0 if cfg.printed_sign else 1.0
    p1 = p2 = start
    best, best_res = p1, resid(p1)
    mu = np.zeros((n, n))
    history = [(p1, p2)]
    objective = [best_res]
    converged = False
    t = 0
    for t in range(cfg.t_max):
        # Y Yᵀ Π2 P_X, with P_X = Q Qᵀ symmetric
        data1 = (YYt @ apply_rows(p2, Q)) @ Q.T
        p1 = lap_over_matrices(data1 - mu + rho * p2.matrix())
        data2 = (YYt @ apply_rows(p1, Q)) @ Q.T
        p2 = lap_over_matrices(sign * data2 + mu + rho * p1.matrix())
        mu = mu + rho * (p1.matrix() - p2.matrix())
        history.append((p1, p2))
        r1 = resid(p1)
        objective.append(r1)
        if r1 < best_res:
            best, best_res = p1, r1
        if p1 == p2:
            converged = True
            break
        r2 = resid(p2)
        if r2 < best_res:
            best, best_res = p2, r2
    return AdmmTrace(
        iterations_run=t + 1,
        converged=converged,
        objective_history=objective,
        final=best,
        final_residual=best_res,
        rho=rho,
        history=history,
    )


def admm_solve(X, Y, cfg: AdmmConfig | None = None) -> AdmmTrace:
    """Alternating assignment updates on the split ``Π1 = Π2`` with a dual ``μ``.

    Each update maximizes a linear functional over permutation matrices:
    ``Π1 <- argmax <Π1, Y Yᵀ Π2 P_X - μ + ρ Π2>``,
    ``Π2 <- argmax <Π2, Y Yᵀ Π1 P_X + μ + ρ Π1>``, ``μ += ρ (Π1 - Π2)``,
    starting from ``μ = 0``.  The reported permutation is the iterate of
    either sequence with the smallest residual ``‖P⊥_{ΠX} Y‖²``.
    """
    cfg = cfg or AdmmConfig()
    X = as_matrix(X, "X")
    Y = as_matrix(Y, "Y")
    if X.shape[0] != Y.shape[0]:
        raise SizeMismatch("X and Y must have the same number of rows")
    Q = orth_projector(X).basis
    YYt = Y @ Y.T
    rho = cfg.rho if cfg.rho is not None else default_rho(YYt, Q)
    if not rho > 0:
        # Y = 0: nothing to fit, any positive penalty gives the same answer
        rho = 1.0
    best = None
    for name in dict.fromkeys(cfg.starts):
        start = init_sort(X, Y) if name == START_SORT else Permutation.identity(X.shape[0])
        trace = _admm_run(start, Q, Y, YYt, rho, cfg)
        trace.start = name
        if best is None or trace.final_residual < best.final_residual:
            best = trace
    return best
