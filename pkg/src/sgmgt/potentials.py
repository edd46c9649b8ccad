"""Target models: analytic Gaussian, multi-well mixture, noisy wrapper and
Bayesian logistic regression on tabular data."""

import csv
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np
from scipy.special import expit, logsumexp

from .errors import DataError

BUNDLED = ("pima", "heart", "synthetic")


class PotentialModel(ABC):
    """Negative log density ``U(theta)`` with exact and stochastic gradients.

    ``stoch_grad`` must be an unbiased estimator of ``grad``; it draws all of
    its randomness from the stream it is handed.
    """

    dim: int

    @abstractmethod
    def energy(self, theta): ...

    @abstractmethod
    def grad(self, theta): ...

    def stoch_grad(self, theta, rng):
        return self.grad(theta)


class GaussianPotential(PotentialModel):
    def __init__(self, mean, variance=1.0):
        if variance <= 0:
            raise ValueError("variance must be positive")
        self.mean = np.atleast_1d(np.asarray(mean, dtype=float))
        self.variance = float(variance)
        self.dim = self.mean.size

    def energy(self, theta):
        d = np.asarray(theta, dtype=float) - self.mean
        return float(d @ d) / (2.0 * self.variance)

    def grad(self, theta):
        return (np.asarray(theta, dtype=float) - self.mean) / self.variance


def gaussian_potential(mean, variance=1.0):
    return GaussianPotential(mean, variance)


@dataclass(frozen=True)
class MultiwellSpec:
    centers: tuple = (-8.0, -4.0, 0.0, 4.0, 8.0)
    width: float = 0.8
    noise_B: float = 1.0

    def __post_init__(self):
        centers = tuple(float(m) for m in self.centers)
        object.__setattr__(self, "centers", centers)
        if len(centers) == 0 or np.any(np.diff(centers) <= 0):
            raise ValueError("multiwell centers must be strictly increasing")
        if self.width <= 0:
            raise ValueError("multiwell width must be positive")
        if self.noise_B < 0:
            raise ValueError("noise_B must be non-negative")


class MultiwellPotential(PotentialModel):
    """Equal-weight 1-D Gaussian mixture; ``U = -log sum_i exp(-(x-m_i)^2 / 2w^2)``."""

    dim = 1

    def __init__(self, spec=None):
        self.spec = spec or MultiwellSpec()
        self.centers = np.asarray(self.spec.centers)
        self.width = self.spec.width
        self._noise_sd = np.sqrt(2.0 * self.spec.noise_B)

    def _logits(self, theta):
        d = np.asarray(theta, dtype=float).reshape(-1)[0] - self.centers
        return d, -(d * d) / (2.0 * self.width**2)

    def energy(self, theta):
        _, z = self._logits(theta)
        return float(-logsumexp(z))

    def grad(self, theta):
        d, z = self._logits(theta)
        w = np.exp(z - z.max())
        return np.array([(w @ d) / (w.sum() * self.width**2)])

    def stoch_grad(self, theta, rng):
        g = self.grad(theta)
        if self._noise_sd > 0:
            g = g + self._noise_sd * rng.standard_normal(1)
        return g


def multiwell_potential(spec=None):
    return MultiwellPotential(spec)


class NoisyGradient(PotentialModel):
    """Wraps a model so that ``stoch_grad = grad + N(0, 2B)`` per coordinate."""

    def __init__(self, base, B):
        if B < 0:
            raise ValueError("B must be non-negative")
        self.base = base
        self.B = float(B)
        self.dim = base.dim
        self._sd = np.sqrt(2.0 * self.B)

    def energy(self, theta):
        return self.base.energy(theta)

    def grad(self, theta):
        return self.base.grad(theta)

    def stoch_grad(self, theta, rng):
        g = self.base.grad(theta)
        if self.B == 0:
            return g
        return g + self._sd * rng.standard_normal(self.dim)


def noisy_gradient(base, B):
    return NoisyGradient(base, B)


@dataclass
class Dataset:
    """Standardized design matrix with an appended intercept column.

    ``labels`` hold {0, 1}; ``is_test`` marks the held-out split.
    """

    features: np.ndarray
    labels: np.ndarray
    is_test: np.ndarray
    columns: list = field(default_factory=list)

    @property
    def dim(self):
        return self.features.shape[1]

    def train(self):
        m = ~self.is_test
        return self.features[m], self.labels[m]

    def test(self):
        return self.features[self.is_test], self.labels[self.is_test]


def bundled_path(name):
    if name not in BUNDLED:
        raise FileNotFoundError(f"no bundled dataset {name!r}; choose from {BUNDLED}")
    return Path(str(resources.files("sgmgt") / "data" / f"{name}.csv"))


BUNDLED_LABELS = {"pima": "diabetes", "heart": "disease", "synthetic": "label"}


def _read_csv(path, label_column):
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: empty file, header row required") from None
        header = [h.strip() for h in header]
        if label_column not in header:
            raise DataError(f"{path}: label column {label_column!r} not in header {header}")
        li = header.index(label_column)
        rows, labels = [], []
        for row in reader:
            lineno = reader.line_num
            if not row or all(not v.strip() for v in row):
                continue
            if len(row) != len(header):
                raise DataError(f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}")
            try:
                vals = [float(v) for v in row]
            except ValueError:
                raise DataError(f"{path}:{lineno}: non-numeric field in row {row}") from None
            if not np.all(np.isfinite(vals)):
                raise DataError(f"{path}:{lineno}: missing or non-finite value")
            labels.append(vals.pop(li))
            rows.append(vals)
    if not rows:
        raise DataError(f"{path}: no data rows")
    names = [h for i, h in enumerate(header) if i != li]
    return np.array(rows), np.array(labels), names


def _binary_labels(raw, path):
    values = set(np.unique(raw).tolist())
    if values <= {0.0, 1.0}:
        return raw.astype(int)
    if values <= {-1.0, 1.0}:
        return (raw > 0).astype(int)
    raise DataError(f"{path}: labels must be binary (0/1 or -1/+1), found {sorted(values)[:6]}")


def load_dataset(path, label_column=None, test_fraction=0.2, seed=0):
    """Read a headed CSV, split train/test by seed and standardize on the train rows.

    ``path`` may also name a bundled dataset (``pima``, ``heart``, ``synthetic``).
    """
    if isinstance(path, str) and path in BUNDLED:
        label_column = label_column or BUNDLED_LABELS[path]
        path = bundled_path(path)
    if label_column is None:
        raise ValueError("label_column is required for non-bundled datasets")
    if not 0 <= test_fraction < 1:
        raise ValueError("test_fraction must lie in [0, 1)")
    x, raw, names = _read_csv(path, label_column)
    y = _binary_labels(raw, path)
    n = len(y)
    n_test = int(round(test_fraction * n))
    is_test = np.zeros(n, dtype=bool)
    is_test[np.random.default_rng(seed).permutation(n)[:n_test]] = True

    mu = x[~is_test].mean(axis=0)
    sd = x[~is_test].std(axis=0)
    if np.any(sd == 0):
        bad = [names[i] for i in np.flatnonzero(sd == 0)]
        raise DataError(f"{path}: constant feature column(s) on the training split: {bad}")
    z = (x - mu) / sd
    features = np.hstack([z, np.ones((n, 1))])
    return Dataset(features, y, is_test, names + ["intercept"])


def save_dataset(data, directory):
    """Persist the standardized matrix (``features.csv``: feature columns then
    ``intercept``) and the split sidecar (``split.csv``: ``row,label,split``)."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    with open(directory / "features.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(data.columns)
        for row in data.features:
            w.writerow([repr(float(v)) for v in row])
    with open(directory / "split.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["row", "label", "split"])
        for i, (lab, t) in enumerate(zip(data.labels, data.is_test)):
            w.writerow([i, int(lab), "test" if t else "train"])


def load_saved_dataset(directory):
    directory = Path(directory)
    with open(directory / "features.csv", newline="") as fh:
        r = csv.reader(fh)
        columns = next(r)
        features = np.array([[float(v) for v in row] for row in r])
    with open(directory / "split.csv", newline="") as fh:
        r = csv.DictReader(fh)
        rows = list(r)
    labels = np.array([int(row["label"]) for row in rows])
    is_test = np.array([row["split"] == "test" for row in rows])
    return Dataset(features, labels, is_test, columns)


class BLRPotential(PotentialModel):
    """Logistic-regression posterior with isotropic Gaussian prior on the train split.

    ``stoch_grad`` subsamples ``minibatch`` rows without replacement and
    rescales the likelihood part by ``N / minibatch``.
    """

    def __init__(self, data, prior_variance=1.0, minibatch=16):
        x, y = data.train()
        if not 1 <= minibatch <= len(y):
            raise ValueError(f"minibatch must lie in [1, {len(y)}], got {minibatch}")
        if prior_variance <= 0:
            raise ValueError("prior_variance must be positive")
        self.x = x
        self.y = np.where(y > 0, 1.0, -1.0)
        self.n = len(y)
        self.dim = x.shape[1]
        self.prior_variance = float(prior_variance)
        self.minibatch = int(minibatch)

    def log_likelihood_terms(self, theta):
        z = self.y * (self.x @ theta)
        return -np.logaddexp(0.0, -z)

    def energy(self, theta):
        theta = np.asarray(theta, dtype=float)
        return float(-self.log_likelihood_terms(theta).sum() + theta @ theta / (2 * self.prior_variance))

    def _lik_grad(self, x, y, theta):
        # d/dtheta of -sum log sigmoid(y x.theta)
        return -(x.T @ (y * expit(-y * (x @ theta))))

    def grad(self, theta):
        theta = np.asarray(theta, dtype=float)
        return self._lik_grad(self.x, self.y, theta) + theta / self.prior_variance

    def stoch_grad(self, theta, rng):
        if self.minibatch == self.n:
            return self.grad(theta)
        idx = rng.choice(self.n, self.minibatch, replace=False)
        scale = self.n / self.minibatch
        return scale * self._lik_grad(self.x[idx], self.y[idx], theta) + theta / self.prior_variance


def blr_potential(data, prior_variance=1.0, minibatch=16):
    return BLRPotential(data, prior_variance, minibatch)
