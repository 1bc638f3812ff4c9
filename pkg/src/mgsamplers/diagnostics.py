"""Autocorrelation, effective sample size and trace summaries."""

from __future__ import annotations

import io
from dataclasses import dataclass
from typing import Optional

import numpy as np

ESS_SLACK = 1.05  # estimator noise can push ESS marginally above N
ACF_REPORT_LAGS = 50
TRUNCATION_RULE = "geyer-initial-positive"


def _autocovariance(x, max_lag):
    n = x.size
    x = x - x.mean()
    nfft = 1 << int(np.ceil(np.log2(2 * n)))
    f = np.fft.rfft(x, nfft)
    acov = np.fft.irfft(f * np.conj(f), nfft)[: max_lag + 1]
    return acov / n  # biased (divide-by-N) estimator, keeps the ACF psd


def autocorrelation(samples, max_lag: int) -> np.ndarray:
    """Lag 1..max_lag autocorrelations of a scalar chain."""
    x = np.asarray(samples, dtype=float).reshape(-1)
    if x.size < 10:
        raise ValueError(f"need at least 10 samples, got {x.size}")
    if max_lag < 1 or max_lag > x.size - 1:
        raise ValueError(f"max_lag must be in [1, {x.size - 1}], got {max_lag}")
    acov = _autocovariance(x, max_lag)
    if acov[0] <= 0:
        raise ValueError("degenerate chain: zero variance")
    return acov[1:] / acov[0]


def effective_sample_size(samples) -> float:
    """ESS = N / (1 + 2 sum_h rho(h)), truncated by Geyer's
    initial-positive-sequence rule over lag pairs (2k-1, 2k)."""
    x = np.asarray(samples, dtype=float).reshape(-1)
    if x.size < 10:
        raise ValueError(f"need at least 10 samples, got {x.size}")
    n = x.size
    acov = _autocovariance(x, n - 1)
    if acov[0] <= 0:
        raise ValueError("degenerate chain: zero variance")
    rho = acov[1:] / acov[0]
    tau = 1.0
    k = 0
    while 2 * k + 1 < rho.size:
        pair = rho[2 * k] + rho[2 * k + 1]
        if pair <= 0:
            break
        tau += 2.0 * pair
        k += 1
    ess = n / tau
    return float(min(max(ess, 1.0), ESS_SLACK * n))


def mode_crossings(samples, center: float = 0.0) -> int:
    """Sign changes of the (mean-)coordinate relative to the saddle."""
    arr = np.asarray(samples, dtype=float)
    series = arr[:, 0] if arr.ndim == 2 and arr.shape[1] == 1 else (
        arr if arr.ndim == 1 else arr.mean(axis=1))
    signs = np.sign(series - center)
    return int(np.count_nonzero(np.diff(signs) != 0))


@dataclass
class DiagnosticsReport:
    acf: np.ndarray                 # (dim, n_lags)
    ess: np.ndarray                 # per dimension
    min_ess: float
    median_ess: float
    acceptance_rate: float
    divergence_count: int
    mode_cross_count: Optional[int] = None
    truncation: str = TRUNCATION_RULE

    @property
    def rho1(self) -> float:
        return float(np.max(self.acf[:, 0]))

    def to_key_values(self) -> str:
        lines = [
            f"acceptance_rate = {self.acceptance_rate:.17g}",
            f"divergence_count = {self.divergence_count}",
            f"min_ess = {self.min_ess:.17g}",
            f"median_ess = {self.median_ess:.17g}",
            f"rho1 = {self.rho1:.17g}",
            f"truncation = {self.truncation}",
        ]
        if self.mode_cross_count is not None:
            lines.append(f"mode_cross_count = {self.mode_cross_count}")
        for d in range(self.acf.shape[0]):
            head = ", ".join(f"{v:.6g}" for v in self.acf[d, :10])
            lines.append(f"acf_dim{d} = {head}")
            lines.append(f"ess_dim{d} = {self.ess[d]:.17g}")
        return "\n".join(lines) + "\n"

    @staticmethod
    def csv_header() -> str:
        return ("acceptance_rate,divergence_count,min_ess,median_ess,"
                "rho1,mode_cross_count,truncation")

    def to_csv_row(self) -> str:
        cross = "" if self.mode_cross_count is None else str(self.mode_cross_count)
        return (f"{self.acceptance_rate:.17g},{self.divergence_count},"
                f"{self.min_ess:.17g},{self.median_ess:.17g},"
                f"{self.rho1:.17g},{cross},{self.truncation}")

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(self.csv_header() + "\n")
        buf.write(self.to_csv_row() + "\n")
        return buf.getvalue()


def summarize(trace, target=None, max_lag: int = ACF_REPORT_LAGS) -> DiagnosticsReport:
    """Per-dimension ACF/ESS plus acceptance and mode-crossing statistics."""
    samples = trace.samples
    if samples.size == 0:
        raise ValueError("empty trace")
    n, dim = samples.shape
    lags = min(max_lag, n - 1)
    acf = np.empty((dim, lags))
    ess = np.empty(dim)
    for d in range(dim):
        acf[d] = autocorrelation(samples[:, d], lags)
        ess[d] = effective_sample_size(samples[:, d])
    crossings = None
    if target is not None and target.symmetry_center is not None:
        crossings = mode_crossings(samples, target.symmetry_center)
    return DiagnosticsReport(
        acf=acf,
        ess=ess,
        min_ess=float(ess.min()),
        median_ess=float(np.median(ess)),
        acceptance_rate=trace.acceptance_rate,
        divergence_count=trace.divergences,
        mode_cross_count=crossings,
    )
