"""Monomial-gamma kinetic energies, stiff and softened.

All functions act coordinate-wise on a momentum vector with an identity mass
matrix. The softened forms are smooth for every ``c > 0`` and approach the
stiff ``|p|**(1/a)`` kinetics as ``c`` grows.
"""

from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.special import expit

from .errors import DomainError, SamplerError

SUPPORTED_A = (0.5, 1.0, 2.0)
DEFAULT_SOFTENING = 5.0

# a = 2 near-origin handling
TAYLOR_EPS = 1e-6
HESS_S_MIN = 1e-3

MAX_RETRIES = 10_000

# sup_x tanh(x)^2 / (4x): the a = 2 gradient never exceeds this times c
A2_GRAD_BOUND = 0.1456457271


def _as_monomial(a):
    if isinstance(a, str):
        try:
            a = Fraction(a.strip())
        except ValueError:
            raise ValueError(f"unsupported monomial parameter {a!r}") from None
    a = float(a)
    if a not in SUPPORTED_A:
        raise ValueError(f"unsupported monomial parameter a={a:g}; expected one of 1/2, 1, 2")
    return a


@dataclass(frozen=True)
class KineticSpec:
    """Monomial parameter ``a`` and softening ``c`` of the kinetic energy."""

    a: float = 1.0
    c: float = DEFAULT_SOFTENING

    def __post_init__(self):
        object.__setattr__(self, "a", _as_monomial(self.a))
        c = float(self.c)
        if not (np.isfinite(c) and c > 0):
            raise ValueError(f"softening parameter must be positive and finite, got {self.c!r}")
        object.__setattr__(self, "c", c)

    @property
    def quadratic(self):
        return self.a == 0.5

    def label(self):
        return "1/2" if self.quadratic else f"{self.a:g}"


@dataclass
class MomentumSample:
    value: np.ndarray
    rejections: int = 0


def _checked(p):
    p = np.asarray(p, dtype=float)
    if not np.all(np.isfinite(p)):
        raise DomainError("momentum contains non-finite coordinates")
    return p


def _sech2(x):
    e = np.exp(-2.0 * np.abs(x))
    return 4.0 * e / (1.0 + e) ** 2


def stiff_elementwise(p, a):
    """Per-coordinate stiff kinetics ``|p|**(1/a)``; ``p**2/2`` when a = 1/2."""
    if a == 0.5:
        return 0.5 * p * p
    if a == 1.0:
        return np.abs(p)
    return np.sqrt(np.abs(p))


def soft_elementwise(p, spec):
    """Per-coordinate softened kinetics (no input checks)."""
    c = spec.c
    if spec.a == 0.5:
        return 0.5 * p * p
    if spec.a == 1.0:
        # -p + (2/c)[max(cp, 0) + log1p(exp(-|cp|))], with the -p folded in;
        # rounding can then never push K_c below the stiff |p|
        return np.abs(p) + (2.0 / c) * np.log1p(np.exp(-c * np.abs(p)))
    s = np.sqrt(np.abs(p))
    return s + (4.0 / c) * expit(-c * s)


def stiff_energy(p, spec):
    """Sum of stiff monomial-gamma kinetics over coordinates."""
    p = _checked(p)
    return float(np.sum(stiff_elementwise(p, spec.a)))


def soft_energy(p, spec):
    """Sum of softened kinetics ``K_c(p)`` over coordinates."""
    p = _checked(p)
    return float(np.sum(soft_elementwise(p, spec)))


def _soft_grad(p, spec):
    # unchecked kernel used by the steppers on every iteration
    if spec.a == 0.5:
        return p * 1.0
    c = spec.c
    if spec.a == 1.0:
        return np.tanh(0.5 * c * p)
    s = np.sqrt(np.abs(p))
    if s.min() < TAYLOR_EPS:
        return _a2_grad_series(p, s, c)
    t = np.tanh(0.5 * c * s)
    return np.copysign(t * t / (2.0 * s), p)


def _a2_grad_series(p, s, c):
    safe = np.maximum(s, TAYLOR_EPS)
    t = np.tanh(0.5 * c * safe)
    out = np.copysign(t * t / (2.0 * safe), p)
    series = np.copysign((c * c / 8.0) * s, p)
    return np.where(s < TAYLOR_EPS, series, out)


def _soft_hess_diag(p, spec):
    if spec.a == 0.5:
        return np.ones_like(p)
    c = spec.c
    if spec.a == 1.0:
        return 0.5 * c * _sech2(0.5 * c * p)
    s = np.maximum(np.sqrt(np.abs(p)), HESS_S_MIN)
    x = 0.5 * c * s
    t = np.tanh(x)
    return (c * s * t * _sech2(x) - t * t) / (4.0 * s**3)


def soft_grad(p, spec):
    """Coordinate-wise derivative of the softened kinetics.

    For a = 1 this is ``tanh(c p / 2)``, bounded by 1. For a = 2 the bound is
    ``A2_GRAD_BOUND * c`` (below 1 whenever ``c < 6.86``). For a = 2 the branch
    ``sqrt|p| < TAYLOR_EPS`` uses the leading series term ``c**2 sqrt|p| / 8``.
    """
    return _soft_grad(_checked(p), spec)


def soft_hess_diag(p, spec):
    """Coordinate-wise second derivative of the softened kinetics.

    For a = 2 the exact curvature diverges like ``|p|**-1/2`` at the origin;
    ``sqrt|p|`` is floored at ``HESS_S_MIN`` to keep the thermostat drift bounded.
    """
    return _soft_hess_diag(_checked(p), spec)


def propose_stiff(a, size, rng):
    """Draw from the stiff marginal ``exp(-|p|**(1/a))`` (normal when a = 1/2).

    ``|p|**(1/a)`` is Gamma(a, 1) distributed under the stiff density, so a
    signed ``G**a`` with ``G ~ Gamma(a, 1)`` is an exact draw.
    """
    if a == 0.5:
        return rng.standard_normal(size)
    g = rng.gamma(a, 1.0, size)
    sign = np.where(rng.random(size) < 0.5, -1.0, 1.0)
    return sign * g**a


def sample_momentum(spec, dim, rng, max_retries=MAX_RETRIES):
    """Exact draw of ``dim`` momentum coordinates from ``exp(-K_c(p))``.

    Coordinates are proposed from the stiff marginal and accepted with
    probability ``exp(K(p) - K_c(p))``; rejected coordinates are re-proposed.
    """
    if spec.quadratic:
        return MomentumSample(rng.standard_normal(dim), 0)
    out = np.empty(dim)
    retries = np.zeros(dim, dtype=int)
    pending = np.arange(dim)
    while pending.size:
        prop = propose_stiff(spec.a, pending.size, rng)
        log_acc = stiff_elementwise(prop, spec.a) - soft_elementwise(prop, spec)
        ok = np.log(rng.random(pending.size)) < log_acc
        out[pending[ok]] = prop[ok]
        pending = pending[~ok]
        retries[pending] += 1
        if pending.size and retries[pending].max() > max_retries:
            raise SamplerError(
                f"momentum rejection sampler exceeded {max_retries} retries "
                f"(a={spec.label()}, c={spec.c:g}); softening is likely mis-set"
            )
    return MomentumSample(out, int(retries.sum()))


def sample_thermostat(dim, rng):
    """Thermostat draw from its Gaussian marginal, ``F(xi) = |xi|**2 / 2``."""
    return rng.standard_normal(dim)
