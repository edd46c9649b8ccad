"""Chain diagnostics: autocorrelation, ESS, KS distance, mode coverage, AUROC."""

import csv
import json
from dataclasses import dataclass, field, asdict

import numpy as np
from scipy.special import expit
from scipy.stats import rankdata


class DegenerateInputError(ValueError):
    """Constant series or single-class labels."""


def _series(x):
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.size < 2 or np.ptp(x) == 0:
        raise DegenerateInputError("series has zero variance")
    return x


def _acf_full(x):
    n = x.size
    d = x - x.mean()
    m = 1 << (2 * n - 1).bit_length()
    f = np.fft.rfft(d, m)
    acov = np.fft.irfft(f * np.conj(f), m)[:n] / n
    return acov / acov[0]


def autocorrelation(series, max_lag):
    """Biased (length-normalized) autocorrelation for lags 0..max_lag."""
    x = _series(series)
    if not 1 <= max_lag < x.size:
        raise ValueError("need 1 <= max_lag < len(series)")
    return _acf_full(x)[: max_lag + 1]


def effective_sample_size(series):
    """ESS with Geyer's initial positive sequence truncation, capped at T.

    Consecutive lag pairs ``rho_2k + rho_2k+1`` are summed until the first
    non-positive pair.
    """
    x = _series(series)
    n = x.size
    if n < 100:
        raise ValueError("ESS needs at least 100 draws")
    rho = _acf_full(x)
    total = 0.0
    for k in range(0, n - 1, 2):
        pair = rho[k] + rho[k + 1]
        if pair <= 0:
            break
        total += pair
    tau = 2.0 * total - 1.0
    return float(min(n, n / tau))


def ks_statistic(samples, cdf):
    """Sup distance between the empirical CDF of ``samples`` and ``cdf``."""
    x = np.sort(np.asarray(samples, dtype=float).reshape(-1))
    n = x.size
    if n == 0:
        raise ValueError("no samples")
    f = np.asarray(cdf(x), dtype=float)
    i = np.arange(1, n + 1)
    return float(max(np.max(i / n - f), np.max(f - (i - 1) / n)))


def ks_two_sample(a, b):
    a = np.sort(np.asarray(a, dtype=float).reshape(-1))
    b = np.sort(np.asarray(b, dtype=float).reshape(-1))
    grid = np.concatenate([a, b])
    fa = np.searchsorted(a, grid, side="right") / a.size
    fb = np.searchsorted(b, grid, side="right") / b.size
    return float(np.max(np.abs(fa - fb)))


def mode_coverage(samples, centers, radius=1.0):
    centers = np.asarray(centers, dtype=float)
    if centers.size > 1 and radius >= 0.5 * np.min(np.diff(np.sort(centers))):
        raise ValueError("radius must be below half the minimum center spacing")
    x = np.asarray(samples, dtype=float).reshape(-1)
    return int(sum(np.any(np.abs(x - m) <= radius) for m in centers))


def auroc(scores, labels):
    """Mann-Whitney AUROC; ties count one half."""
    s = np.asarray(scores, dtype=float)
    y = np.asarray(labels).astype(bool)
    n_pos, n_neg = int(y.sum()), int((~y).sum())
    if n_pos == 0 or n_neg == 0:
        raise DegenerateInputError("AUROC needs both classes")
    r = rankdata(s)
    return float((r[y].sum() - n_pos * (n_pos + 1) / 2) / (n_pos * n_neg))


def blr_predict(samples, features):
    """Posterior-averaged predictive probabilities ``mean_s sigmoid(x . theta_s)``.

    ``samples`` may be a ChainTrace or an (S, D) array.
    """
    thetas = np.atleast_2d(getattr(samples, "samples", samples))
    x = np.atleast_2d(features)
    if thetas.shape[0] == 0:
        raise ValueError("empty trace")
    if thetas.shape[1] != x.shape[1]:
        raise ValueError(f"dimension mismatch: trace has {thetas.shape[1]}, data has {x.shape[1]}")
    return expit(x @ thetas.T).mean(axis=1)


def histogram(samples, bins=50, range=None):
    counts, edges = np.histogram(np.asarray(samples).reshape(-1), bins=bins, range=range)
    return counts, edges


@dataclass
class DiagnosticsReport:
    n_samples: int
    ess_per_dim: list
    ess_median: float
    acf: list = field(default_factory=list)
    ks: float | None = None
    modes_visited: int | None = None
    auroc: float | None = None

    def to_dict(self):
        return asdict(self)

    def summary_lines(self):
        out = [f"n_samples = {self.n_samples}", f"ess_median = {self.ess_median:.6g}"]
        out.append("ess_per_dim = " + ", ".join(f"{e:.6g}" for e in self.ess_per_dim))
        for key in ("ks", "modes_visited", "auroc"):
            v = getattr(self, key)
            if v is not None:
                out.append(f"{key} = {v:.6g}" if isinstance(v, float) else f"{key} = {v}")
        return out

    def write(self, stem):
        with open(f"{stem}.report.txt", "w") as fh:
            fh.write("\n".join(self.summary_lines()) + "\n")
        with open(f"{stem}.report.json", "w") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True)


def diagnose(samples, max_lag=50, cdf=None, centers=None, radius=1.0, scores_labels=None):
    x = np.asarray(samples, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    ess, acfs = [], []
    for d in range(x.shape[1]):
        try:
            ess.append(effective_sample_size(x[:, d]))
            acfs.append(autocorrelation(x[:, d], min(max_lag, x.shape[0] - 1)).tolist())
        except DegenerateInputError:
            ess.append(0.0)
            acfs.append([])
    rep = DiagnosticsReport(x.shape[0], ess, float(np.median(ess)), acfs)
    if cdf is not None:
        rep.ks = ks_statistic(x[:, 0], cdf)
    if centers is not None:
        rep.modes_visited = mode_coverage(x[:, 0], centers, radius)
    if scores_labels is not None:
        rep.auroc = auroc(*scores_labels)
    return rep


def write_histogram(path, samples, bins=50, range=None):
    counts, edges = histogram(samples, bins, range)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["bin_left", "bin_right", "count"])
        for lo, hi, c in zip(edges[:-1], edges[1:], counts):
            w.writerow([repr(float(lo)), repr(float(hi)), int(c)])
