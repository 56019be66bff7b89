"""Seeded Monte Carlo sweeps over the sensing model.

Every trial draws its instance from its own generator, seeded from
``(master_seed, cell_index, trial_index)`` through a numpy
``SeedSequence``, so results do not depend on how trials are scheduled.
"""
from __future__ import annotations

import io
import itertools
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np

from .bounds import log_det_term, required_snr
from .errors import InvalidParams, NumericalError
from .model import ModelParams, SensingInstance, Spectrum, generate, make_rng
from .permutation import Permutation, hamming
from .solvers import AdmmConfig, admm_solve, oracle_ml

ORACLE = "oracle"
ADMM = "admm"
BOTH = "both"
SOLVERS = (ORACLE, ADMM, BOTH)


class TrialError(NumericalError):
    """A solver failed on one trial; carries the seed that reproduces it."""

    def __init__(self, seed: "TrialSeed", params: ModelParams, cause: BaseException):
        self.seed = seed
        self.params = params
        super().__init__(f"trial failed at {seed} with {params}: {cause!r}")


@dataclass(frozen=True)
class TrialSeed:
    master: int
    cell: int
    trial: int

    def rng(self) -> np.random.Generator:
        return make_rng(np.random.SeedSequence(self.master, spawn_key=(self.cell, self.trial)))


def solve(instance: SensingInstance, solver: str, admm: AdmmConfig | None = None) -> Permutation:
    if solver == ORACLE:
        return oracle_ml(instance.X, instance.Y, instance.B_star)
    if solver == ADMM:
        return admm_solve(instance.X, instance.Y, admm).final
    raise ValueError(f"unknown solver {solver!r}")


def _solver_list(solver: str) -> tuple[str, ...]:
    if solver == BOTH:
        return (ORACLE, ADMM)
    if solver in (ORACLE, ADMM):
        return (solver,)
    raise ValueError(f"solver must be one of {SOLVERS}, got {solver!r}")


def run_trial(params: ModelParams, solver: str, seed: TrialSeed,
              admm: AdmmConfig | None = None) -> tuple[bool, int]:
    """``(exact recovery, Hamming error)`` for one seeded instance."""
    inst = generate(params, seed.rng())
    try:
        est = solve(inst, solver, admm)
    except (NumericalError, np.linalg.LinAlgError) as exc:
        raise TrialError(seed, params, exc) from exc
    d = hamming(est, inst.Pi_star)
    return d == 0, d


# ---------------------------------------------------------------- sweep spec


@dataclass(frozen=True)
class SweepSpec:
    """Grid of parameter cells; cells are the product n x p x m x h x spectrum x snr.

    ``h`` entries are integers or fractions of ``n`` written like ``0.1n``.
    """

    n: tuple[int, ...]
    p: tuple[int, ...]
    m: tuple[int, ...]
    h: tuple[str, ...]
    snr: tuple[float, ...]
    spectrum: tuple[Spectrum, ...] = (Spectrum("fullrank"),)
    sigma_sq: float = 1.0
    trials: int = 200
    solver: str = ORACLE
    master_seed: int = 0
    admm: AdmmConfig = field(default_factory=AdmmConfig)
    output: str | None = None
    workers: int = 1

    def __post_init__(self):
        if self.trials < 1:
            raise InvalidParams("trials must be >= 1")
        _solver_list(self.solver)
        if not 0 <= self.master_seed < 2**64:
            raise InvalidParams("seed must be a 64-bit unsigned integer")
        for name in ("n", "p", "m", "h", "snr", "spectrum"):
            if not getattr(self, name):
                raise InvalidParams(f"grid axis {name!r} is empty")
        self.cells()  # ModelParams validates each cell

    def cells(self) -> list[ModelParams]:
        out = []
        for n, p, m, h, spec, snr in itertools.product(
            self.n, self.p, self.m, self.h, self.spectrum, self.snr
        ):
            out.append(ModelParams(n=n, p=p, m=m, h=resolve_h(h, n), snr=snr,
                                   spectrum=spec, sigma_sq=self.sigma_sq))
        return out


def resolve_h(token, n: int) -> int:
    """``"10"`` -> 10, ``"0.1n"`` -> round(0.1 n)."""
    text = str(token).strip()
    if text.endswith("n"):
        frac = float(text[:-1] or 1.0)
        return int(round(frac * n))
    return int(text)


def logspace_grid(lo_exp: float, hi_exp: float, per_decade: int = 10) -> tuple[float, ...]:
    """``10**lo_exp .. 10**hi_exp`` with ``per_decade`` points per decade."""
    count = int(round((hi_exp - lo_exp) * per_decade)) + 1
    return tuple(float(v) for v in np.logspace(lo_exp, hi_exp, count))


# ------------------------------------------------------------- config files

_INT_KEYS = ("n", "p", "m")


def parse_config(text: str) -> SweepSpec:
    """Parse the flat ``key = value`` config format (see README).

    Repeated keys and comma separated values both accumulate into lists.
    """
    raw: dict[str, list[str]] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InvalidParams(f"config line {lineno}: expected key = value")
        key, _, value = line.partition("=")
        key = key.strip().replace("-", "_")
        if key == "spectrum":
            # explicit spectra contain commas themselves
            vals = [value.strip()]
        else:
            vals = [v.strip() for v in value.split(",") if v.strip()]
        raw.setdefault(key, []).extend(vals)

    def single(key, conv, default=None):
        if key not in raw:
            return default
        if len(raw[key]) != 1:
            raise InvalidParams(f"config key {key!r} takes one value")
        return conv(raw[key][0])

    known = {"n", "p", "m", "h", "snr", "snr_logspace", "spectrum", "sigma_sq", "trials",
             "solver", "seed", "rho", "t_max", "output", "workers"}
    unknown = set(raw) - known
    if unknown:
        raise InvalidParams(f"unknown config keys: {sorted(unknown)}")
    try:
        kw = {k: tuple(int(v) for v in raw.get(k, ())) for k in _INT_KEYS}
        kw["h"] = tuple(raw.get("h", ("0",)))
        snr = [float(v) for v in raw.get("snr", ())]
        if "snr_logspace" in raw:
            lo, hi, *per = (float(v) for v in raw["snr_logspace"])
            snr.extend(logspace_grid(lo, hi, int(per[0]) if per else 10))
        kw["snr"] = tuple(snr)
        kw["spectrum"] = tuple(Spectrum.parse(s) for s in raw.get("spectrum", ("fullrank",)))
        rho = single("rho", float)
        admm = AdmmConfig(rho=rho, t_max=single("t_max", int, 100))
        return SweepSpec(
            **kw,
            sigma_sq=single("sigma_sq", float, 1.0),
            trials=single("trials", int, 200),
            solver=single("solver", str, ORACLE),
            master_seed=single("seed", int, 0),
            admm=admm,
            output=single("output", str),
            workers=single("workers", int, 1),
        )
    except (TypeError, ValueError) as exc:
        if isinstance(exc, InvalidParams):
            raise
        raise InvalidParams(f"bad config value: {exc}") from exc


# ------------------------------------------------------------------ results


@dataclass(frozen=True)
class SweepResult:
    n: int
    p: int
    m: int
    h: int
    spectrum: str
    snr: float
    sigma_sq: float
    solver: str
    trials: int
    recovery_rate: float
    mean_hamming: float
    axis_snr: float
    axis_logdet_over_logn: float
    axis_logmsnr_over_logn: float
    wall_time: float


RESULT_FIELDS = tuple(f.name for f in fields(SweepResult))


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def result_header(timing: bool = False) -> str:
    cols = RESULT_FIELDS if timing else RESULT_FIELDS[:-1]
    return ",".join(cols)


def result_row(r: SweepResult, timing: bool = False) -> str:
    cols = RESULT_FIELDS if timing else RESULT_FIELDS[:-1]
    return ",".join(_fmt(getattr(r, c)) for c in cols)


def read_results(path) -> list[dict[str, str]]:
    lines = Path(path).read_text().splitlines()
    header = lines[0].split(",")
    return [dict(zip(header, line.split(","))) for line in lines[1:] if line]


def _run_cell(args) -> list[SweepResult]:
    cell_index, params, solver, trials, master_seed, admm = args
    names = _solver_list(solver)
    hits = {s: 0 for s in names}
    dist = {s: 0 for s in names}
    start = time.perf_counter()
    for t in range(trials):
        seed = TrialSeed(master_seed, cell_index, t)
        inst = generate(params, seed.rng())
        for s in names:
            try:
                est = solve(inst, s, admm)
            except (NumericalError, np.linalg.LinAlgError) as exc:
                raise TrialError(seed, params, exc) from exc
            d = hamming(est, inst.Pi_star)
            hits[s] += d == 0
            dist[s] += d
    elapsed = time.perf_counter() - start
    B = params.signal()
    logn = math.log(params.n)
    axis_logdet = log_det_term(B, params.sigma_sq) / logn
    axis_logm = math.log(params.m * params.snr) / logn
    return [
        SweepResult(
            n=params.n, p=params.p, m=params.m, h=params.h,
            spectrum=str(params.spectrum).replace(",", ";"), snr=params.snr, sigma_sq=params.sigma_sq,
            solver=s, trials=trials,
            recovery_rate=hits[s] / trials,
            mean_hamming=dist[s] / trials,
            axis_snr=params.snr,
            axis_logdet_over_logn=axis_logdet,
            axis_logmsnr_over_logn=axis_logm,
            wall_time=elapsed,
        )
        for s in names
    ]


def run_sweep(spec: SweepSpec,
              sink: Callable[[SweepResult], None] | None = None) -> list[SweepResult]:
    """Evaluate every grid cell; results come back (and reach ``sink``) in grid order.

    With ``spec.workers > 1`` cells run in a process pool; output is
    identical to a serial run.
    """
    jobs = [(i, params, spec.solver, spec.trials, spec.master_seed, spec.admm)
            for i, params in enumerate(spec.cells())]
    results: list[SweepResult] = []
    if spec.workers > 1:
        with ProcessPoolExecutor(max_workers=spec.workers) as pool:
            batches: Iterable[list[SweepResult]] = pool.map(_run_cell, jobs)
            for batch in batches:
                for r in batch:
                    results.append(r)
                    if sink:
                        sink(r)
    else:
        for job in jobs:
            for r in _run_cell(job):
                results.append(r)
                if sink:
                    sink(r)
    return results


def write_sweep(spec: SweepSpec, out, timing: bool = False) -> list[SweepResult]:
    """Run ``spec`` streaming DSV rows to the text stream ``out``."""
    out.write(result_header(timing) + "\n")
    out.flush()

    def sink(r: SweepResult) -> None:
        out.write(result_row(r, timing) + "\n")
        out.flush()

    return run_sweep(spec, sink)


# ------------------------------------------------------------- snr table


def format_snr(v: float) -> str:
    return f"{v:.2f}" if v >= 0.005 else f"{v:.2e}"


def emit_table2(n: int, rho_list: Sequence[float], c_list: Sequence[float]) -> str:
    """DSV grid of :func:`required_snr`, one row per stable rank."""
    buf = io.StringIO()
    buf.write("rho," + ",".join(f"c={_num(c)}" for c in c_list) + "\n")
    for rho in rho_list:
        vals = [format_snr(required_snr(n, rho, c)) for c in c_list]
        buf.write(_num(rho) + "," + ",".join(vals) + "\n")
    return buf.getvalue()


def _num(v: float) -> str:
    return str(int(v)) if float(v).is_integer() else repr(float(v))


# ----------------------------------------------------------------- analysis


def isotonic_fit(y: Sequence[float], w: Sequence[float] | None = None) -> np.ndarray:
    """Nondecreasing least-squares fit (pool adjacent violators)."""
    y = np.asarray(y, dtype=np.float64)
    w = np.ones_like(y) if w is None else np.asarray(w, dtype=np.float64)
    vals: list[float] = []
    wts: list[float] = []
    counts: list[int] = []
    for yi, wi in zip(y, w):
        vals.append(yi)
        wts.append(wi)
        counts.append(1)
        while len(vals) > 1 and vals[-2] > vals[-1]:
            wsum = wts[-2] + wts[-1]
            merged = (vals[-2] * wts[-2] + vals[-1] * wts[-1]) / wsum
            c = counts[-2] + counts[-1]
            del vals[-1], wts[-1], counts[-1]
            vals[-1], wts[-1], counts[-1] = merged, wsum, c
    return np.repeat(vals, counts)


def crossing(x: Sequence[float], rate: Sequence[float], level: float = 0.5) -> float:
    """Abscissa where the isotonic fit of ``rate`` first reaches ``level``.

    Linear interpolation between grid points; ``nan`` if never reached,
    ``x[0]`` if already reached at the first point.
    """
    x = np.asarray(x, dtype=np.float64)
    order = np.argsort(x, kind="stable")
    x = x[order]
    fit = isotonic_fit(np.asarray(rate, dtype=np.float64)[order])
    idx = np.nonzero(fit >= level)[0]
    if idx.size == 0:
        return float("nan")
    k = int(idx[0])
    if k == 0:
        return float(x[0])
    x0, x1, f0, f1 = x[k - 1], x[k], fit[k - 1], fit[k]
    return float(x0 + (level - f0) * (x1 - x0) / (f1 - f0))
