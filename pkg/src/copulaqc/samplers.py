"""Bimodal Gaussian-mixture target and the two samplers used against it.

SGLD is the biased sampler whose step size the diagnostics are meant to
tune; random-walk Metropolis provides the exact reference chain used to
pin down the target's true rank correlation.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "MixtureTarget",
    "Chain",
    "default_target",
    "log_density_and_grad",
    "sgld",
    "rwm",
    "save_chain_csv",
]


class SamplerDivergence(ArithmeticError):
    """Raised when a chain state becomes non-finite."""

    def __init__(self, step: int):
        super().__init__(f"chain diverged: non-finite state at step {step}")
        self.step = step


@dataclass(frozen=True)
class MixtureTarget:
    """Two-component bivariate Gaussian mixture, unnormalised log density."""

    weights: tuple[float, float]
    means: tuple[tuple[float, float], tuple[float, float]]
    covariances: tuple[tuple[tuple[float, float], tuple[float, float]], ...]

    def __post_init__(self):
        w = np.asarray(self.weights, float)
        if w.shape != (2,) or np.any(w <= 0) or abs(w.sum() - 1.0) > 1e-12:
            raise ValueError("weights must be two positive numbers summing to 1")
        for c in self.covariances:
            c = np.asarray(c, float)
            if not np.all(np.linalg.eigvalsh(c) > 0):
                raise ValueError("covariances must be positive-definite")

    def _frozen(self):
        mus = [np.asarray(m, float) for m in self.means]
        precs, log_norms = [], []
        for c in self.covariances:
            c = np.asarray(c, float)
            precs.append(np.linalg.inv(c))
            log_norms.append(-0.5 * math.log(np.linalg.det(c)) - math.log(2 * math.pi))
        return mus, precs, log_norms


@dataclass(frozen=True)
class Chain:
    """States produced by a sampler run, one row per step."""

    states: np.ndarray
    step_size: float
    seed: int
    acceptance_rate: float | None = None
    x0: tuple[float, float] = field(default=(0.0, 0.0))


def default_target() -> MixtureTarget:
    """Equal-weight bimodal target with strong positive in-mode dependence."""
    cov = ((1.0, 0.8), (0.8, 1.0))
    return MixtureTarget(
        weights=(0.5, 0.5),
        means=((-2.0, -2.0), (2.0, 2.0)),
        covariances=(cov, cov),
    )


def log_density_and_grad(target: MixtureTarget, x) -> tuple[float, np.ndarray]:
    """Log density (up to a constant) and its exact gradient at ``x``."""
    x = np.asarray(x, dtype=float)
    mus, precs, log_norms = target._frozen()
    logs = np.empty(2)
    grads = np.empty((2, 2))
    for k in range(2):
        d = x - mus[k]
        pd = precs[k] @ d
        logs[k] = math.log(target.weights[k]) + log_norms[k] - 0.5 * float(d @ pd)
        grads[k] = -pd
    m = logs.max()
    w = np.exp(logs - m)
    total = w.sum()
    return m + math.log(total), (w @ grads) / total


class _MixtureEvaluator:
    """Precomputed mixture quantities for tight sampler loops."""

    def __init__(self, target: MixtureTarget):
        mus, precs, log_norms = target._frozen()
        self.mus = mus
        self.precs = precs
        self.log_w = [math.log(w) + ln for w, ln in zip(target.weights, log_norms)]

    def logp(self, x: np.ndarray) -> float:
        vals = [
            lw - 0.5 * float((x - mu) @ (prec @ (x - mu)))
            for lw, mu, prec in zip(self.log_w, self.mus, self.precs)
        ]
        m = max(vals)
        return m + math.log(math.fsum(math.exp(v - m) for v in vals))

    def logp_and_grad(self, x: np.ndarray) -> tuple[float, np.ndarray]:
        vals, pds = [], []
        for lw, mu, prec in zip(self.log_w, self.mus, self.precs):
            d = x - mu
            pd = prec @ d
            vals.append(lw - 0.5 * float(d @ pd))
            pds.append(pd)
        m = max(vals)
        w = [math.exp(v - m) for v in vals]
        total = w[0] + w[1]
        grad = -(w[0] * pds[0] + w[1] * pds[1]) / total
        return m + math.log(total), grad


def sgld(target, epsilon: float, T: int, gradient_noise_sd: float = 1.0,
         seed: int = 0, x0=(0.0, 0.0)) -> Chain:
    """Stochastic gradient Langevin dynamics, no accept/reject step.

    x <- x + (eps/2) (grad log p(x) + noise) + sqrt(eps) xi, with
    isotropic Gaussian gradient noise of the given standard deviation
    standing in for mini-batch noise.  Deterministic given ``seed``;
    aborts with the step index if the state becomes non-finite.
    """
    if epsilon <= 0:
        raise ValueError(f"epsilon must be > 0, got {epsilon!r}")
    if T < 1:
        raise ValueError(f"chain length must be >= 1, got {T}")
    rng = np.random.default_rng(seed)
    xi = rng.standard_normal((T, 2)) * math.sqrt(epsilon)
    grad_noise = (
        rng.standard_normal((T, 2)) * gradient_noise_sd
        if gradient_noise_sd > 0
        else np.zeros((T, 2))
    )
    ev = target if hasattr(target, "logp_and_grad") else _MixtureEvaluator(target)
    x = np.asarray(x0, dtype=float).copy()
    states = np.empty((T, 2))
    half_eps = 0.5 * epsilon
    with np.errstate(over="ignore", invalid="ignore"):
        for t in range(T):
            _, grad = ev.logp_and_grad(x)
            x = x + half_eps * (grad + grad_noise[t]) + xi[t]
            if not (math.isfinite(x[0]) and math.isfinite(x[1])):
                raise SamplerDivergence(t)
            states[t] = x
    return Chain(states=states, step_size=epsilon, seed=seed, x0=tuple(np.asarray(x0, float)))


def rwm(target, proposal_sd: float, T: int, seed: int = 0,
        x0=(0.0, 0.0)) -> Chain:
    """Random-walk Metropolis with isotropic Gaussian proposals."""
    if proposal_sd <= 0:
        raise ValueError(f"proposal_sd must be > 0, got {proposal_sd!r}")
    if T < 1:
        raise ValueError(f"chain length must be >= 1, got {T}")
    rng = np.random.default_rng(seed)
    steps = rng.standard_normal((T, 2)) * proposal_sd
    log_u = np.log(rng.random(T))
    ev = target if hasattr(target, "logp") else _MixtureEvaluator(target)
    x = np.asarray(x0, dtype=float).copy()
    logp = ev.logp(x)
    states = np.empty((T, 2))
    accepted = 0
    for t in range(T):
        prop = x + steps[t]
        logp_prop = ev.logp(prop)
        if logp_prop - logp > log_u[t]:
            x, logp = prop, logp_prop
            accepted += 1
        states[t] = x
    return Chain(
        states=states,
        step_size=proposal_sd,
        seed=seed,
        acceptance_rate=accepted / T,
        x0=tuple(np.asarray(x0, float)),
    )


def save_chain_csv(chain: Chain, path) -> None:
    """Write chain states as a two-column CSV, one row per state."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        for row in chain.states:
            writer.writerow([format(row[0], ".17g"), format(row[1], ".17g")])
