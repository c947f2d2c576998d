"""Seeded generators for fractional Gaussian noise, fBm, AR(1) and white noise.

All randomness comes from ``numpy.random.Generator(PCG64(seed))``, whose
stream is stable across platforms and numpy releases, so a given
:class:`GeneratorSpec` always yields the same series.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Literal

import numpy as np

from .errors import InputError
from .series import MonthlySeries

__all__ = ["GeneratorSpec", "generate", "theoretical_fgn_acf", "fgn_autocovariance", "SYNTH_START"]

SYNTH_START = np.datetime64("2000-01", "M")


@dataclass(frozen=True)
class GeneratorSpec:
    kind: Literal["fgn", "fbm", "ar1", "white"]
    n: int
    seed: int = 0
    h: float = 0.5
    phi: float = 0.0
    sigma: float = 1.0

    def __post_init__(self):
        if self.kind not in ("fgn", "fbm", "ar1", "white"):
            raise InputError(f"unknown generator kind {self.kind!r}")
        if self.n < 2:
            raise InputError("n must be >= 2")
        if not 0.0 < self.h < 1.0:
            raise InputError("h must lie strictly inside (0, 1)")
        if not -1.0 < self.phi < 1.0:
            raise InputError("|phi| must be < 1")
        if not self.sigma > 0:
            raise InputError("sigma must be positive")


def theoretical_fgn_acf(h: float, k) -> np.ndarray | float:
    """Autocorrelation of unit-variance fGn at lag(s) ``k``."""
    k = np.abs(np.asarray(k, dtype=float))
    out = 0.5 * ((k + 1) ** (2 * h) - 2 * k ** (2 * h) + np.abs(k - 1) ** (2 * h))
    return float(out) if out.ndim == 0 else out


def fgn_autocovariance(h: float, n: int) -> np.ndarray:
    return theoretical_fgn_acf(h, np.arange(n))


def _davies_harte(h: float, n: int, rng: np.random.Generator) -> np.ndarray:
    gamma = fgn_autocovariance(h, n + 1)
    # first row of the 2n circulant that embeds the n x n Toeplitz covariance
    row = np.r_[gamma, gamma[-2:0:-1]]
    m = row.size
    eig = np.fft.fft(row).real
    if eig.min() < 0:
        neg = eig.min()
        # only happens at rounding level for valid H; clip and say so
        if neg < -1e-8 * eig.max():
            warnings.warn(f"circulant embedding has negative eigenvalue {neg:.3g}; clipping",
                          RuntimeWarning, stacklevel=3)
        eig = np.clip(eig, 0.0, None)
    w = rng.standard_normal(m) + 1j * rng.standard_normal(m)
    # real part of this complex Gaussian vector has exactly the target covariance
    return np.fft.fft(np.sqrt(eig / m) * w).real[:n]


def generate(spec: GeneratorSpec) -> MonthlySeries:
    """Draw one realisation of ``spec`` as a monthly series anchored at 2000-01."""
    rng = np.random.Generator(np.random.PCG64(spec.seed))
    n = spec.n
    if spec.kind == "white":
        x = rng.standard_normal(n)
    elif spec.kind == "fgn":
        x = _davies_harte(spec.h, n, rng)
    elif spec.kind == "fbm":
        x = np.cumsum(_davies_harte(spec.h, n, rng))
    else:
        e = rng.standard_normal(n)
        x = np.empty(n)
        x[0] = e[0] / math.sqrt(1.0 - spec.phi**2)
        for t in range(1, n):
            x[t] = spec.phi * x[t - 1] + e[t]
    label = {"fgn": f"fGn H={spec.h}", "fbm": f"fBm H={spec.h}",
             "ar1": f"AR(1) phi={spec.phi}", "white": "white noise"}[spec.kind]
    return MonthlySeries(SYNTH_START, spec.sigma * x, 12, f"{label} seed={spec.seed}")
