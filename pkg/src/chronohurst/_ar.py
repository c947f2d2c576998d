"""Autocovariances, Durbin-Levinson recursion and Yule-Walker AR fits."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def autocovariance(x: np.ndarray, max_lag: int) -> np.ndarray:
    """Biased (divisor n) sample autocovariances for lags 0..max_lag."""
    x = np.asarray(x, dtype=float)
    n = x.size
    y = x - x.mean()
    # FFT route: O(n log n), exact up to rounding
    nfft = 1 << int(np.ceil(np.log2(2 * n - 1)))
    f = np.fft.rfft(y, nfft)
    acov = np.fft.irfft(f * np.conj(f), nfft)[: max_lag + 1] / n
    return acov


def durbin_levinson(acov: np.ndarray):
    """Run the Durbin-Levinson recursion on ``acov[0..p]``.

    Returns ``(pacf, phis, sigma2)`` where ``pacf[k-1]`` is the lag-k partial
    autocorrelation, ``phis[k]`` the AR(k) coefficient vector and ``sigma2[k]``
    the AR(k) innovation variance.
    """
    p = len(acov) - 1
    pacf = np.zeros(p)
    phis = [np.zeros(0)]
    sigma2 = np.empty(p + 1)
    sigma2[0] = acov[0]
    phi = np.zeros(0)
    for k in range(1, p + 1):
        # a perfectly predictable process has nothing left to explain
        a = (acov[k] - phi @ acov[1:k][::-1]) / sigma2[k - 1] if sigma2[k - 1] > 0 else 0.0
        phi = np.r_[phi - a * phi[::-1], a]
        pacf[k - 1] = a
        phis.append(phi.copy())
        sigma2[k] = sigma2[k - 1] * (1.0 - a * a)
    return pacf, phis, sigma2


@dataclass(frozen=True)
class ARFit:
    order: int
    coefficients: np.ndarray
    innovation_variance: float
    mean: float
    aic: np.ndarray


def default_max_order(n: int) -> int:
    return int(min(n - 1, np.floor(10.0 * np.log10(n))))


def yule_walker_aic(x, max_order: int | None = None) -> ARFit:
    """Select an AR order by AIC among Yule-Walker fits of order 0..max_order.

    AIC is ``n log(sigma2_k) + 2k``. The reported innovation variance carries
    the ``n / (n - (k + 1))`` small-sample factor.
    """
    x = np.asarray(x, dtype=float)
    n = x.size
    if max_order is None:
        max_order = default_max_order(n)
    max_order = int(min(max_order, n - 1))
    acov = autocovariance(x, max_order)
    _, phis, sigma2 = durbin_levinson(acov)
    with np.errstate(divide="ignore"):
        aic = n * np.log(sigma2) + 2.0 * np.arange(max_order + 1)
    order = int(np.nanargmin(np.where(np.isfinite(aic), aic, np.inf)))
    var = sigma2[order] * n / (n - (order + 1))
    return ARFit(order, phis[order], float(var), float(x.mean()), aic)


def ar_spectrum(fit: ARFit, freqs: np.ndarray) -> np.ndarray:
    """AR spectral density at ``freqs`` (cycles per sample)."""
    k = np.arange(1, fit.order + 1)
    transfer = 1.0 - np.exp(-2j * np.pi * np.outer(freqs, k)) @ fit.coefficients
    return fit.innovation_variance / np.abs(transfer) ** 2


def lag_matrix(x: np.ndarray, order: int):
    """Response ``x[order:]`` and the matrix of its lags 1..order."""
    n = x.size
    y = x[order:]
    lags = np.column_stack([x[order - k: n - k] for k in range(1, order + 1)]) \
        if order else np.empty((n, 0))
    return y, lags
