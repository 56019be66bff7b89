"""Closed-form recovery and failure thresholds.

Every function here evaluates an inequality on ``(B*, sigma², n, ...)``.
Several thresholds involve universal constants whose numeric values are
not known; those live in :class:`TheoryConstants` with fixed defaults, so
the booleans are reproducible but only meaningful relative to the chosen
constants.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import HypothesisViolated
from .linalg import as_matrix, require_nonzero, singular_values, stable_rank

# below this n the high-probability statements of the unknown-signal
# results are not known to apply (eps = 0.5 example)
MIN_N_UNKNOWN_SIGNAL = 36


@dataclass(frozen=True)
class TheoryConstants:
    kappa: float = 1.0
    alpha0: float = 0.5
    prop1_c: float = 1.0
    eps: float = 0.5
    # unknown-signal result, explicit form
    thm4_scale: float = 380.0
    thm4_mix: float = 190.0
    # refined unknown-signal result, explicit form
    thm5_snr_floor: float = 26.2
    thm5_rank_coef: float = 5.0
    thm5_c0: float = 1.0
    thm5_log_coef: float = 288.0
    thm5_log_offset: float = 33.44

    def __post_init__(self):
        if not 0.0 < self.alpha0 < 1.0:
            raise ValueError(f"alpha0 must lie in (0, 1), got {self.alpha0}")
        for name, value in asdict(self).items():
            if name != "alpha0" and not value > 0:
                raise ValueError(f"{name} must be positive, got {value}")

    @property
    def alpha1(self) -> float:
        return 2.0 / math.log(1.0 / self.alpha0)

    @property
    def alpha2(self) -> float:
        inv = 1.0 / self.alpha0
        return math.log(64.0 * inv**4 * math.log(inv))


_LOG_FACT = np.zeros(2)


def log_factorial_table(k: int) -> np.ndarray:
    """``[log 0!, log 1!, ..., log k!]`` as running sums of ``log j``."""
    global _LOG_FACT
    if _LOG_FACT.size <= k:
        size = max(1024, 1 << k.bit_length())
        table = np.zeros(size + 1)
        table[2:] = np.cumsum(np.log(np.arange(2, size + 1, dtype=np.float64)))
        _LOG_FACT = table
    return _LOG_FACT[: k + 1]


def log_factorial(k: int) -> float:
    """``sum_{j=2}^{k} log j``, summed directly (no Stirling)."""
    if k < 0:
        raise ValueError(f"k must be nonnegative, got {k}")
    return float(log_factorial_table(k)[k])


def log_det_term(B, sigma_sq: float) -> float:
    """``log det(I + BᵀB / sigma²) = sum_i log(1 + λ_i² / sigma²)``."""
    B = as_matrix(B, "B")
    require_nonzero(B)
    s = singular_values(B)
    return math.fsum(np.log1p(s * s / sigma_sq).tolist())


def required_snr(n: int, rho: float, c: float) -> float:
    """snr at which ``rho log(1 + snr) = c log n`` (equal-spectrum signal)."""
    if n < 2:
        raise ValueError(f"n must be >= 2, got {n}")
    return math.expm1(c * math.log(n) / rho)


def thm1_inachievable(B, sigma_sq: float, n: int, log_card_H: float | None = None) -> bool:
    """True when every estimator errs with probability >= 1/2 over ``H``.

    ``log_card_H`` defaults to ``log n!`` (all permutations).
    """
    if log_card_H is None:
        log_card_H = log_factorial(n)
    if not log_card_H > 2:
        raise HypothesisViolated(f"log|H| must exceed 2, got {log_card_H}")
    return log_det_term(B, sigma_sq) < (log_card_H - 2.0) / n


def cor1_rhs(n: int, D: int) -> float:
    return (log_factorial(n - D + 1) - math.log(4.0)) / n


def cor1_inachievable(B, sigma_sq: float, n: int, D: int) -> bool:
    """True when even recovery within Hamming distance ``D`` fails w.p. >= 1/2."""
    if not 0 <= D <= n:
        raise ValueError(f"D must lie in [0, n], got {D}")
    return log_det_term(B, sigma_sq) <= cor1_rhs(n, D)


def minimax_dh_lower_from_logdet(logdet: float, n: int) -> float:
    if n < 2:
        raise ValueError(f"n must be >= 2, got {n}")
    num = 0.5 * n * logdet + math.log(2.0)
    d = np.arange(n + 1)
    lf = log_factorial_table(n + 1)[n - d + 1]
    ok = lf > 0.0
    vals = (d[ok] + 1) * (1.0 - num / lf[ok])
    return max(float(vals.max()), 0.0)


def minimax_dh_lower(B, sigma_sq: float, n: int) -> float:
    """Lower bound on the worst-case expected Hamming error of any estimator."""
    return minimax_dh_lower_from_logdet(log_det_term(B, sigma_sq), n)


def prop1_threshold(n: int, srank: float, consts: TheoryConstants = TheoryConstants()) -> float:
    return 2.0 * math.log(n) / (4.0 * (1.0 + consts.prop1_c / math.sqrt(srank)) ** 2)


def prop1_fails(B, sigma_sq: float, n: int, consts: TheoryConstants = TheoryConstants()) -> bool:
    """True when the known-signal ML estimator errs with probability >= 1/2."""
    if n < 10:
        raise HypothesisViolated(f"stated for n >= 10, got n={n}")
    B = as_matrix(B, "B")
    energy = float(np.sum(B * B)) / sigma_sq
    return energy <= prop1_threshold(n, stable_rank(B), consts)


def thm3_threshold(n: int, srank: float, consts: TheoryConstants = TheoryConstants()) -> float:
    """Right-hand side of the known-signal success condition on ``log(‖B‖²/σ²)``."""
    kr = consts.kappa * srank
    return 8.0 * math.log(n) / kr + math.log(max(kr, consts.alpha1 * math.log(n))) + consts.alpha2


def thm3_succeeds(B, sigma_sq: float, n: int, consts: TheoryConstants = TheoryConstants()) -> bool:
    B = as_matrix(B, "B")
    energy = float(np.sum(B * B)) / sigma_sq
    return math.log(energy) >= thm3_threshold(n, stable_rank(B), consts)


def _warn_small_n(n: int) -> None:
    if n < MIN_N_UNKNOWN_SIGNAL:
        warnings.warn(
            f"n={n} is below {MIN_N_UNKNOWN_SIGNAL}; the high-probability guarantee may not apply",
            stacklevel=3,
        )


def _resolve_log_snr(snr: float | None, log_snr: float | None) -> float:
    if log_snr is not None:
        return float(log_snr)
    if snr is None or not snr > 0:
        raise ValueError(f"snr must be positive, got {snr}")
    return math.log(snr)


def thm4_succeeds(n: int, p: int, m: int, snr: float | None, r: int = 1,
                  consts: TheoryConstants = TheoryConstants(), *,
                  log_snr: float | None = None) -> bool:
    """Unknown-signal success: ``snr n^{-2n/(n-p)} >= 1`` and the explicit
    ``log(m snr)`` condition with rank ``r`` of the signal.

    With the default constants the second condition needs ``log snr`` in
    the thousands, beyond double range; pass ``log_snr`` instead of ``snr``
    to evaluate there.
    """
    if n < 2 * p or p < 1:
        raise HypothesisViolated(f"need n >= 2p, got n={n}, p={p}")
    if r < 1 or m < 1:
        raise ValueError("m and r must be positive")
    ls = _resolve_log_snr(snr, log_snr)
    _warn_small_n(n)
    logn = math.log(n)
    cond_i = ls - 2.0 * n / (n - p) * logn >= 0.0
    rhs = (1.0 + consts.eps + n / (consts.thm4_mix * (n - p))) * logn + 0.5 * math.log(r)
    cond_ii = (math.log(m) + ls) / consts.thm4_scale >= rhs
    return cond_i and cond_ii


def thm5_succeeds(n: int, p: int, m: int, snr: float | None, rho: float, h_max: int, r: int,
                  consts: TheoryConstants = TheoryConstants(), *,
                  log_snr: float | None = None) -> bool:
    """Refined unknown-signal success for ``Π*`` within Hamming distance ``h_max``.

    ``rho`` is the stable rank of the signal and ``r`` its rank.
    """
    if n < 2 * p or p < 1:
        raise HypothesisViolated(f"need n >= 2p, got n={n}, p={p}")
    if h_max * r > n / 8:
        raise HypothesisViolated(f"need h_max * r <= n/8, got {h_max} * {r} > {n / 8}")
    ls = _resolve_log_snr(snr, log_snr)
    _warn_small_n(n)
    logn = math.log(n)
    one_eps = 1.0 + consts.eps
    cond_i = ls > math.log(consts.thm5_snr_floor)
    cond_ii = rho >= consts.thm5_rank_coef * one_eps * logn / consts.thm5_c0
    cond_iii = ls >= consts.thm5_log_coef * one_eps * logn / rho + consts.thm5_log_offset
    return cond_i and cond_ii and cond_iii


@dataclass
class ThresholdReport:
    n: int
    p: int
    m: int
    snr: float
    sigma_sq: float
    logdet: float
    logdet_over_logn: float
    stable_rank: float
    rank: int
    thm1_fails: bool
    cor1_fails_at_D: dict[int, bool]
    minimax_dh_lower: float
    prop1_fails: bool | None
    thm3_succeeds: bool
    thm4_succeeds: bool | None
    thm5_succeeds: bool | None
    h_max: int
    constants_used: TheoryConstants = field(default_factory=TheoryConstants)

    def items(self) -> list[tuple[str, object]]:
        """Flat ``(key, value)`` pairs in a fixed order."""
        out: list[tuple[str, object]] = []
        for key, value in asdict(self).items():
            if key == "cor1_fails_at_D":
                out.extend((f"cor1_fails_at_D{d}", v) for d, v in self.cor1_fails_at_D.items())
            elif key == "constants_used":
                out.extend((f"const_{k}", v) for k, v in value.items())
            else:
                out.append((key, value))
        return out


def threshold_report(B, sigma_sq: float, n: int, p: int, D_values=(),
                     h_max: int | None = None,
                     consts: TheoryConstants = TheoryConstants()) -> ThresholdReport:
    """Evaluate every threshold for one parameter point.

    Conditions whose hypotheses fail at this point are reported as ``None``.
    """
    B = as_matrix(B, "B")
    m = B.shape[1]
    logdet = log_det_term(B, sigma_sq)
    s = singular_values(B)
    rank = int(np.sum(s > s[0] * 1e-12))
    srank = stable_rank(B)
    snr = float(np.sum(B * B)) / (m * sigma_sq)
    if h_max is None:
        h_max = max(int(n // (8 * rank)), 0)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        try:
            t4 = thm4_succeeds(n, p, m, snr, rank, consts)
        except HypothesisViolated:
            t4 = None
        try:
            t5 = thm5_succeeds(n, p, m, snr, srank, h_max, rank, consts)
        except HypothesisViolated:
            t5 = None
    return ThresholdReport(
        n=n, p=p, m=m, snr=snr, sigma_sq=sigma_sq,
        logdet=logdet,
        logdet_over_logn=logdet / math.log(n),
        stable_rank=srank,
        rank=rank,
        thm1_fails=thm1_inachievable(B, sigma_sq, n),
        cor1_fails_at_D={int(d): cor1_inachievable(B, sigma_sq, n, int(d)) for d in D_values},
        minimax_dh_lower=minimax_dh_lower_from_logdet(logdet, n),
        prop1_fails=prop1_fails(B, sigma_sq, n, consts) if n >= 10 else None,
        thm3_succeeds=thm3_succeeds(B, sigma_sq, n, consts),
        thm4_succeeds=t4,
        thm5_succeeds=t5,
        h_max=h_max,
        constants_used=consts,
    )
