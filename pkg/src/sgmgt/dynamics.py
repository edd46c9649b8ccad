"""Discretized stochastic-gradient dynamics and the chain runner.

Random-number consumption per step (the contract the reduction tests rely on):

* every stepper first calls ``model.stoch_grad(theta, rng)`` exactly once
  (MGHMC uses exact gradients and draws nothing here);
* SGLD then draws ``dim`` normals;
* SGHMC, SGNHT and SGMGT draw ``dim`` normals for the momentum if ``A > 0``;
* SGMGT-D draws ``dim`` normals for each of p, theta, xi (in that order),
  skipping any block whose variance is zero;
* MGHMC draws a fresh momentum (rejection sampler) then one uniform.
"""

import math
from dataclasses import dataclass, field, asdict

import numpy as np

from .errors import DivergenceError
from .kinetics import (
    KineticSpec,
    _soft_grad,
    _soft_hess_diag,
    sample_momentum,
    sample_thermostat,
    soft_elementwise,
)

ALGORITHMS = ("SGLD", "SGHMC", "SGNHT", "SGMGT", "SGMGT-D", "MGHMC")
INTEGRATORS = ("euler", "splitting")
# baselines always run with quadratic kinetics
GAUSSIAN_KINETICS = ("SGLD", "SGHMC", "SGNHT")


@dataclass(frozen=True)
class SamplerConfig:
    algorithm: str = "SGMGT-D"
    kinetic: KineticSpec = field(default_factory=KineticSpec)
    h: float = 0.01
    A: float = 1.0
    sigma_theta: float = 0.0
    sigma_p: float = 1.0
    sigma_xi: float = 0.0
    gamma: float = 1.0
    T_p: int | None = 100
    T_xi: int | None = 100
    integrator: str = "euler"
    n_iters: int = 1000
    n_burnin: int = 0
    thin: int = 1
    leapfrog_steps: int = 10
    seed: int = 0
    theta0: tuple | None = None
    record_energy: bool = False

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {self.algorithm!r}; expected one of {ALGORITHMS}")
        if self.algorithm in GAUSSIAN_KINETICS and not self.kinetic.quadratic:
            object.__setattr__(self, "kinetic", KineticSpec(0.5, self.kinetic.c))
        if self.integrator not in INTEGRATORS:
            raise ValueError(f"unknown integrator {self.integrator!r}")
        if self.integrator == "splitting" and self.algorithm not in ("SGMGT", "SGMGT-D"):
            raise ValueError("splitting integrator is only defined for SGMGT/SGMGT-D")
        if not self.h > 0:
            raise ValueError("stepsize h must be positive")
        for name in ("A", "sigma_theta", "sigma_p", "sigma_xi"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")
        if self.gamma < 0:
            raise ValueError("gamma must be non-negative")
        for name in ("T_p", "T_xi"):
            v = getattr(self, name)
            if v is not None and v < 1:
                raise ValueError(f"{name} must be a positive integer or disabled")
        if self.n_iters < 1 or not 0 <= self.n_burnin < self.n_iters:
            raise ValueError("need 0 <= n_burnin < n_iters")
        if self.thin < 1 or self.leapfrog_steps < 1:
            raise ValueError("thin and leapfrog_steps must be positive")

    def validate(self):
        """Invariants required for a sampling run (steppers alone accept the
        degenerate ``gamma = 0`` / ``sigma_p = 0`` limits)."""
        if not self.gamma > 0:
            raise ValueError("gamma must be positive")
        if self.algorithm == "SGMGT-D" and not self.sigma_p > 0:
            raise ValueError("SGMGT-D requires sigma_p > 0")
        return self

    @property
    def n_samples(self):
        return (self.n_iters - self.n_burnin) // self.thin


@dataclass
class SamplerState:
    theta: np.ndarray
    p: np.ndarray
    xi: np.ndarray
    iter: int = 0

    def hamiltonian(self, model, kinetic):
        """Total energy ``U(theta) + K_c(p) + |xi|^2 / 2``."""
        return (
            model.energy(self.theta)
            + float(np.sum(soft_elementwise(self.p, kinetic)))
            + 0.5 * float(self.xi @ self.xi)
        )


@dataclass
class ChainTrace:
    samples: np.ndarray
    iters: np.ndarray
    energies: np.ndarray | None
    config: SamplerConfig
    seed: int
    accepted: int = 0
    proposals: int = 0
    resample_p: int = 0
    resample_xi: int = 0
    failed: bool = False
    failure: str = ""

    @property
    def acceptance_rate(self):
        return self.accepted / self.proposals if self.proposals else float("nan")


def _check(theta, p, xi, it):
    if not (np.isfinite(theta).all() and np.isfinite(p).all() and np.isfinite(xi).all()):
        raise DivergenceError(it)


def _normal(rng, var, dim):
    # zero-variance blocks draw nothing
    if var == 0:
        return 0.0
    return math.sqrt(var) * rng.standard_normal(dim)


def step_sgld(state, model, config, rng):
    h = config.h
    g = model.stoch_grad(state.theta, rng)
    theta = state.theta - h * g + math.sqrt(2 * h) * rng.standard_normal(state.theta.size)
    _check(theta, state.p, state.xi, state.iter + 1)
    return SamplerState(theta, state.p, state.xi, state.iter + 1)


def step_sghmc(state, model, config, rng):
    h, A = config.h, config.A
    g = model.stoch_grad(state.theta, rng)
    p = state.p - h * (g + A * state.p) + _normal(rng, 2 * A * h, state.p.size)
    theta = state.theta + h * p
    _check(theta, p, state.xi, state.iter + 1)
    return SamplerState(theta, p, state.xi, state.iter + 1)


def step_sgnht(state, model, config, rng):
    h, A = config.h, config.A
    g = model.stoch_grad(state.theta, rng)
    p = state.p - h * (g + state.xi * state.p) + _normal(rng, 2 * A * h, state.p.size)
    theta = state.theta + h * p
    xi = state.xi + h * (p * p - 1.0)
    _check(theta, p, xi, state.iter + 1)
    return SamplerState(theta, p, xi, state.iter + 1)


def step_sgmgt(state, model, config, rng):
    h, A, kin = config.h, config.A, config.kinetic
    g = model.stoch_grad(state.theta, rng)
    k = _soft_grad(state.p, kin)
    p = state.p - h * (g + state.xi * k) + _normal(rng, 2 * A * h, state.p.size)
    k = _soft_grad(p, kin)
    theta = state.theta + h * k
    xi = state.xi + h * (k * k - _soft_hess_diag(p, kin))
    _check(theta, p, xi, state.iter + 1)
    return SamplerState(theta, p, xi, state.iter + 1)


def step_sgmgt_d(state, model, config, rng):
    h, kin, gam = config.h, config.kinetic, config.gamma
    s_th, s_p, s_xi = config.sigma_theta, config.sigma_p, config.sigma_xi
    dim = state.p.size
    g = model.stoch_grad(state.theta, rng)
    k = _soft_grad(state.p, kin)
    p = state.p - h * ((s_p + gam * state.xi) * k + g) + _normal(rng, 2 * s_p * h, dim)
    k = _soft_grad(p, kin)
    theta = state.theta + h * (k - s_th * g) + _normal(rng, 2 * s_th * h, dim)
    xi = state.xi + h * (gam * (k * k - _soft_hess_diag(p, kin)) - s_xi * state.xi)
    xi = xi + _normal(rng, 2 * s_xi * h, dim)
    _check(theta, p, xi, state.iter + 1)
    return SamplerState(theta, p, xi, state.iter + 1)


def splitting_step_sgmgt_d(state, model, config, rng):
    """Symmetric A(h/2) B(h/2) O(h) B(h/2) A(h/2) composition.

    A drifts theta and xi by their momentum-only terms, B applies the
    friction and potential kick to p, O carries every Brownian increment plus
    the first-order Langevin drifts of theta and xi. The single stochastic
    gradient is evaluated after the first A half-step and reused by both
    B half-steps and O. Plain SGMGT is the special case with zero theta/xi
    noise, ``sigma_p = A`` entering only the noise and ``gamma = 1``.
    """
    h, kin = config.h, config.kinetic
    half = 0.5 * h
    if config.algorithm == "SGMGT":
        gam, fric, s_th, s_xi, s_p = 1.0, 0.0, 0.0, 0.0, config.A
    else:
        gam, s_th, s_xi, s_p = config.gamma, config.sigma_theta, config.sigma_xi, config.sigma_p
        fric = s_p
    dim = state.p.size

    def drift_a(theta, p, xi):
        k = _soft_grad(p, kin)
        return theta + half * k, xi + half * gam * (k * k - _soft_hess_diag(p, kin))

    theta, xi = drift_a(state.theta, state.p, state.xi)
    g = model.stoch_grad(theta, rng)
    p = state.p - half * ((fric + gam * xi) * _soft_grad(state.p, kin) + g)
    # O: Brownian pieces, rng order p, theta, xi
    p = p + _normal(rng, 2 * s_p * h, dim)
    theta = theta - h * s_th * g + _normal(rng, 2 * s_th * h, dim)
    xi = xi - h * s_xi * xi + _normal(rng, 2 * s_xi * h, dim)
    p = p - half * ((fric + gam * xi) * _soft_grad(p, kin) + g)
    theta, xi = drift_a(theta, p, xi)
    _check(theta, p, xi, state.iter + 1)
    return SamplerState(theta, p, xi, state.iter + 1)


def mghmc_leapfrog(state, model, config, rng):
    """One Metropolis-corrected leapfrog trajectory with softened kinetics.

    Returns ``(state, accepted)``; uses exact gradients throughout.
    """
    kin, eps = config.kinetic, config.h
    mom = sample_momentum(kin, state.theta.size, rng)
    p0 = mom.value
    theta = state.theta
    h0 = model.energy(theta) + float(np.sum(soft_elementwise(p0, kin)))
    p = p0 - 0.5 * eps * model.grad(theta)
    for i in range(config.leapfrog_steps):
        theta = theta + eps * _soft_grad(p, kin)
        gr = model.grad(theta)
        p = p - (eps if i < config.leapfrog_steps - 1 else 0.5 * eps) * gr
    if np.isfinite(theta).all() and np.isfinite(p).all():
        h1 = model.energy(theta) + float(np.sum(soft_elementwise(p, kin)))
    else:
        h1 = math.inf
    accept = bool(np.log(rng.random()) < h0 - h1)
    if not accept:
        theta, p = state.theta, p0
    return SamplerState(theta, p, state.xi, state.iter + 1), accept


STEPPERS = {
    "SGLD": step_sgld,
    "SGHMC": step_sghmc,
    "SGNHT": step_sgnht,
    "SGMGT": step_sgmgt,
    "SGMGT-D": step_sgmgt_d,
}


def stepper_for(config):
    if config.integrator == "splitting":
        return splitting_step_sgmgt_d
    return STEPPERS[config.algorithm]


def _due(period, it):
    return period is not None and it >= 1 and it % period == 0


def _draw_thermostat(config, dim, rng):
    xi = sample_thermostat(dim, rng)
    if config.algorithm in ("SGNHT", "SGMGT"):
        xi = xi + config.A
    return xi


def maybe_resample(state, config, rng):
    """Redraw p and/or xi from their marginals when the period divides
    ``state.iter`` (the number of completed steps, >= 1).

    Momentum is drawn before the thermostat when both are due. Under
    SGNHT/SGMGT the thermostat equilibrates around the diffusion factor ``A``
    rather than zero, so its marginal draw is shifted by ``A`` there.
    """
    dim = state.p.size
    p, xi = state.p, state.xi
    if _due(config.T_p, state.iter):
        p = sample_momentum(config.kinetic, dim, rng).value
    if _due(config.T_xi, state.iter):
        xi = _draw_thermostat(config, dim, rng)
    if p is state.p and xi is state.xi:
        return state
    return SamplerState(state.theta, p, xi, state.iter)


def initial_state(model, config, rng):
    if config.theta0 is None:
        theta = np.zeros(model.dim)
    else:
        theta = np.array(config.theta0, dtype=float).reshape(-1)
        if theta.size == 1 and model.dim > 1:
            theta = np.full(model.dim, theta[0])
        if theta.size != model.dim:
            raise ValueError(f"theta0 has {theta.size} coordinates, model has {model.dim}")
    p = sample_momentum(config.kinetic, model.dim, rng).value
    xi = _draw_thermostat(config, model.dim, rng)
    return SamplerState(theta, p, xi, 0)


def run_chain(model, config, state=None, callback=None):
    """Run one chain and return its post-burn-in, thinned trace.

    Iterations are numbered 1..n_iters. After iteration ``t`` has been
    recorded the state is offered to ``maybe_resample``, so p and xi are
    redrawn before step ``t + 1`` whenever the period divides ``t``; n
    iterations see ``n // T`` events. Divergence stops the chain and returns
    the partial trace with ``failed`` set.
    """
    config.validate()
    rng = np.random.default_rng(config.seed)
    if state is None:
        state = initial_state(model, config, rng)
    mghmc = config.algorithm == "MGHMC"
    step = None if mghmc else stepper_for(config)
    n_keep = config.n_samples
    samples = np.empty((n_keep, model.dim))
    iters = np.empty(n_keep, dtype=int)
    energies = np.empty(n_keep) if config.record_energy else None
    trace = ChainTrace(samples, iters, energies, config, config.seed)
    j = 0
    try:
        # overflow on the way to a divergence is reported by _check instead
        with np.errstate(over="ignore", invalid="ignore"):
            for t in range(1, config.n_iters + 1):
                if not mghmc:
                    state = step(state, model, config, rng)
                else:
                    state, acc = mghmc_leapfrog(state, model, config, rng)
                    trace.accepted += acc
                    trace.proposals += 1
                if callback is not None:
                    callback(state)
                if t > config.n_burnin and (t - config.n_burnin) % config.thin == 0 and j < n_keep:
                    samples[j] = state.theta
                    iters[j] = t
                    if energies is not None:
                        energies[j] = state.hamiltonian(model, config.kinetic)
                    j += 1
                if not mghmc:
                    trace.resample_p += _due(config.T_p, state.iter)
                    trace.resample_xi += _due(config.T_xi, state.iter)
                    state = maybe_resample(state, config, rng)
    except DivergenceError as err:
        trace.failed = True
        trace.failure = str(err)
        trace.samples = samples[:j]
        trace.iters = iters[:j]
        if energies is not None:
            trace.energies = energies[:j]
    return trace


def config_dict(config):
    d = asdict(config)
    d["kinetic"] = {"a": config.kinetic.label(), "c": config.kinetic.c}
    return d


__all__ = [
    "ALGORITHMS",
    "SamplerConfig",
    "SamplerState",
    "ChainTrace",
    "step_sgld",
    "step_sghmc",
    "step_sgnht",
    "step_sgmgt",
    "step_sgmgt_d",
    "splitting_step_sgmgt_d",
    "mghmc_leapfrog",
    "maybe_resample",
    "run_chain",
]
