"""Synthetic instances of ``Y = Π* X B* + W``.

``X`` and ``W`` are i.i.d. Gaussian (``W`` with variance ``sigma_sq``),
``Π*`` sits at an exact Hamming distance ``h`` from the identity, and
``B*`` has a prescribed singular-value profile, rescaled by one scalar so
that ``‖B*‖_F² / (m sigma_sq)`` equals the requested snr.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.fft import dct

from . import dsv
from .errors import InvalidParams, InvalidSpectrum, SizeMismatch
from .linalg import require_nonzero, as_matrix, frobenius_norm_sq, orth_projector
from .permutation import Permutation, apply_rows, sample_with_hamming

RANK_ONE = "rank1"
FULL_RANK_EQUAL = "fullrank"
EXPLICIT = "explicit"


@dataclass(frozen=True)
class Spectrum:
    """Shape of the signal matrix, before snr scaling.

    ``rank1``: every column equals ``e_1``.
    ``fullrank``: equal singular values and rank ``min(p, m)``; columns are
    ``e_i`` when ``m <= p``, otherwise rows of an orthonormal DCT basis.
    ``explicit``: ``diag(values)`` embedded in the top-left corner.
    """

    kind: str
    values: tuple[float, ...] = ()

    @classmethod
    def parse(cls, text: str) -> "Spectrum":
        text = text.strip()
        if text in (RANK_ONE, "rank-one", "rankone"):
            return cls(RANK_ONE)
        if text in (FULL_RANK_EQUAL, "full-rank", "fullrankequal"):
            return cls(FULL_RANK_EQUAL)
        if text.startswith(EXPLICIT + ":"):
            try:
                vals = tuple(float(v) for v in text.split(":", 1)[1].replace(";", ",").split(",") if v.strip())
            except ValueError as exc:
                raise InvalidSpectrum(f"bad explicit spectrum {text!r}") from exc
            return cls(EXPLICIT, vals)
        raise InvalidSpectrum(f"unknown spectrum {text!r}")

    def __str__(self) -> str:
        if self.kind == EXPLICIT:
            return EXPLICIT + ":" + ",".join(format(v, "g") for v in self.values)
        return self.kind

    def shape_matrix(self, p: int, m: int) -> np.ndarray:
        """Unscaled ``p x m`` signal with this spectrum."""
        B = np.zeros((p, m))
        if self.kind == RANK_ONE:
            B[0, :] = 1.0
        elif self.kind == FULL_RANK_EQUAL:
            if m <= p:
                B[np.arange(m), np.arange(m)] = 1.0
            else:
                # rows of an orthonormal m x m transform: B B^T = I_p
                B[:] = dct(np.eye(m), type=2, norm="ortho", axis=0)[:p]
        elif self.kind == EXPLICIT:
            vals = np.asarray(self.values, dtype=np.float64)
            if vals.size == 0 or vals.size > min(p, m):
                raise InvalidSpectrum(
                    f"explicit spectrum needs 1..{min(p, m)} values, got {vals.size}"
                )
            if np.any(vals < 0) or not np.any(vals > 0) or not np.all(np.isfinite(vals)):
                raise InvalidSpectrum("explicit singular values must be finite, nonnegative, not all zero")
            B[np.arange(vals.size), np.arange(vals.size)] = vals
        else:
            raise InvalidSpectrum(f"unknown spectrum kind {self.kind!r}")
        return B


@dataclass(frozen=True)
class ModelParams:
    n: int
    p: int
    m: int
    h: int
    snr: float
    spectrum: Spectrum = Spectrum(FULL_RANK_EQUAL)
    sigma_sq: float = 1.0

    def __post_init__(self):
        if self.p < 1 or self.m < 1:
            raise InvalidParams("p and m must be positive")
        if self.n < 2 * self.p:
            raise InvalidParams(f"need n >= 2p, got n={self.n}, p={self.p}")
        if self.h < 0 or self.h == 1 or self.h > self.n:
            raise InvalidParams(f"h must be 0 or in [2, n], got {self.h}")
        if not (self.snr > 0 and math.isfinite(self.snr)):
            raise InvalidParams(f"snr must be positive, got {self.snr}")
        if not (self.sigma_sq > 0 and math.isfinite(self.sigma_sq)):
            raise InvalidParams(f"sigma_sq must be positive, got {self.sigma_sq}")

    def signal(self) -> np.ndarray:
        """The deterministic ``B*`` for these parameters."""
        B = self.spectrum.shape_matrix(self.p, self.m)
        gamma = math.sqrt(self.snr * self.m * self.sigma_sq / frobenius_norm_sq(B))
        return B * gamma


@dataclass(frozen=True)
class SensingInstance:
    params: ModelParams
    X: np.ndarray
    B_star: np.ndarray
    Pi_star: Permutation
    W: np.ndarray
    Y: np.ndarray

    def write(self, directory, tag: str = "instance") -> list[Path]:
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        written = []
        for name in ("X", "B_star", "W", "Y"):
            path = directory / f"{tag}_{name}.dsv"
            dsv.write_matrix(path, getattr(self, name))
            written.append(path)
        path = directory / f"{tag}_Pi_star.txt"
        path.write_text(self.Pi_star.to_text() + "\n")
        written.append(path)
        path = directory / f"{tag}_params.txt"
        pr = self.params
        dsv.write_key_values(path, {
            "n": pr.n, "p": pr.p, "m": pr.m, "h": pr.h, "snr": pr.snr,
            "spectrum": str(pr.spectrum), "sigma_sq": pr.sigma_sq,
        })
        written.append(path)
        return written

    @classmethod
    def read(cls, directory, tag: str = "instance") -> "SensingInstance":
        directory = Path(directory)
        kv = dsv.read_key_values(directory / f"{tag}_params.txt")
        params = ModelParams(
            n=int(kv["n"]), p=int(kv["p"]), m=int(kv["m"]), h=int(kv["h"]),
            snr=float(kv["snr"]), spectrum=Spectrum.parse(kv["spectrum"]),
            sigma_sq=float(kv["sigma_sq"]),
        )
        mats = {name: dsv.read_matrix(directory / f"{tag}_{name}.dsv")
                for name in ("X", "B_star", "W", "Y")}
        pi = Permutation.from_text((directory / f"{tag}_Pi_star.txt").read_text())
        return cls(params, Pi_star=pi, **mats)


def make_rng(seed) -> np.random.Generator:
    """Counter-based (Philox) generator; ``seed`` may be an int or a SeedSequence."""
    return np.random.Generator(np.random.Philox(seed))


def snr_of(B, sigma_sq: float, m: int) -> float:
    """``‖B‖_F² / (m sigma_sq)``."""
    B = as_matrix(B, "B")
    require_nonzero(B)
    return frobenius_norm_sq(B) / (m * sigma_sq)


def generate(params: ModelParams, rng: np.random.Generator) -> SensingInstance:
    n, p, m = params.n, params.p, params.m
    B = params.signal()
    X = rng.standard_normal((n, p))
    pi = sample_with_hamming(n, params.h, rng)
    W = math.sqrt(params.sigma_sq) * rng.standard_normal((n, m))
    Y = apply_rows(pi, X @ B) + W
    for A in (X, B, W, Y):
        A.setflags(write=False)
    return SensingInstance(params, X, B, pi, W, Y)


def residual(p: Permutation, X, Y) -> float:
    """``‖P⊥_{ΠX} Y‖_F²``, the least-squares misfit left after fitting ``B``."""
    X = as_matrix(X, "X")
    Y = as_matrix(Y, "Y")
    if X.shape[0] != Y.shape[0]:
        raise SizeMismatch("X and Y must have the same number of rows")
    proj = orth_projector(apply_rows(p, X))
    R = proj.apply_complement(Y)
    return float(np.sum(R * R))
