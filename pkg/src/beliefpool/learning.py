"""Social learning dynamics: local Bayesian update followed by AA or GA fusion.

Beliefs live in the log domain throughout.  Arrays of log-beliefs have shape
``(..., K, H)`` so a whole batch of independent trials advances in one call.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import DegenerateBeliefError, InvalidSpecError
from .numerics import logsumexp
from .observation import ObservationModel
from .topology import CombinationMatrix, _weights

SAMPLE_BLOCK = 1024


class RuleKind(str, Enum):
    AA_DIFFUSION = "aa_diffusion"
    GA_DIFFUSION = "ga_diffusion"
    AA_CONSENSUS = "aa_consensus"
    GA_CONSENSUS = "ga_consensus"

    @property
    def arithmetic(self) -> bool:
        return self in (RuleKind.AA_DIFFUSION, RuleKind.AA_CONSENSUS)

    @property
    def consensus(self) -> bool:
        return self in (RuleKind.AA_CONSENSUS, RuleKind.GA_CONSENSUS)


@dataclass
class BeliefState:
    log_beliefs: np.ndarray  # (K, H), or (T, K, H) for a batch
    iteration: int = 0

    @property
    def beliefs(self) -> np.ndarray:
        return np.exp(self.log_beliefs)


def uniform_log_beliefs(K: int, H: int) -> np.ndarray:
    return np.full((K, H), -np.log(H))


def normalize_log(z: np.ndarray, iteration: int | None = None, what: str = "belief") -> np.ndarray:
    norm = logsumexp(z, axis=-1, keepdims=True)
    if np.any(np.isneginf(norm)):
        raise DegenerateBeliefError(f"{what} row has zero mass on every hypothesis", iteration)
    return z - norm


def bayesian_update(log_beliefs: np.ndarray, log_lik: np.ndarray, iteration: int | None = None) -> np.ndarray:
    """Intermediate log-beliefs log psi = log L + log mu, renormalized per agent."""
    return normalize_log(log_beliefs + log_lik, iteration, "intermediate belief")


def _mixed_inputs(log_inputs: np.ndarray, log_previous: np.ndarray | None) -> np.ndarray:
    """(..., l, k, H) tensor whose diagonal carries the agent's own update.

    Diffusion uses ``log_inputs`` for every neighbor; consensus uses the
    neighbors' previous beliefs off the diagonal.
    """
    K = log_inputs.shape[-2]
    if log_previous is None:
        return np.broadcast_to(log_inputs[..., :, None, :], log_inputs.shape[:-2] + (K, K, log_inputs.shape[-1]))
    X = np.repeat(log_previous[..., :, None, :], K, axis=-2)
    idx = np.arange(K)
    X[..., idx, idx, :] = log_inputs
    return X


def fuse_aa(log_inputs: np.ndarray, A, log_previous: np.ndarray | None = None) -> np.ndarray:
    """Arithmetic pooling: mu_k = sum_l a_lk * input_l, evaluated with log-sum-exp."""
    W = _weights(A)
    with np.errstate(divide="ignore"):
        logW = np.log(W)
    X = _mixed_inputs(log_inputs, log_previous)
    # the convex combination is normalized in exact arithmetic; renormalizing stops round-off drift
    return normalize_log(logsumexp(logW[:, :, None] + X, axis=-3))


def fuse_ga(log_inputs: np.ndarray, A, log_previous: np.ndarray | None = None,
            iteration: int | None = None) -> np.ndarray:
    """Geometric pooling: mu_k proportional to exp(sum_l a_lk log input_l); zeros veto."""
    W = _weights(A)
    finite = np.all(np.isfinite(log_inputs)) and (log_previous is None or np.all(np.isfinite(log_previous)))
    if finite and log_previous is None:
        S = W.T @ log_inputs
    elif finite:
        d = np.diag(W)[:, None]
        S = W.T @ log_previous + d * (log_inputs - log_previous)
    else:
        X = _mixed_inputs(log_inputs, log_previous)
        with np.errstate(invalid="ignore"):
            terms = np.where(W[:, :, None] > 0, W[:, :, None] * X, 0.0)
        S = terms.sum(axis=-3)
    return normalize_log(S, iteration, "fused belief")


def _advance(log_mu: np.ndarray, x: np.ndarray, rule: RuleKind, W: np.ndarray,
             model: ObservationModel, iteration: int | None = None) -> np.ndarray:
    log_psi = bayesian_update(log_mu, model.log_likelihoods(x), iteration)
    prev = log_mu if rule.consensus else None
    if rule.arithmetic:
        return fuse_aa(log_psi, W, prev)
    return fuse_ga(log_psi, W, prev, iteration)


def step(state: BeliefState, rule: RuleKind, A, model: ObservationModel,
         true_index: int, rng: np.random.Generator) -> BeliefState:
    """One synchronous iteration: sample, local Bayes, fuse."""
    rule = RuleKind(rule)
    lead = state.log_beliefs.shape[:-2]
    x = model.sample(true_index, rng, size=lead[0] if lead else None)
    new = _advance(state.log_beliefs, x, rule, _weights(A), model, state.iteration + 1)
    return BeliefState(new, state.iteration + 1)


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    """Independent stream for trial ``trial``; unaffected by how many trials run."""
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=(int(trial),)))


def default_snapshot_iterations(iterations: int, stride: int | None = None) -> np.ndarray:
    """Every step up to 1000 then every 10th, unless a uniform ``stride`` is given; the last step always kept."""
    i = np.arange(1, iterations + 1)
    if stride is None:
        keep = (i <= 1000) | (i % 10 == 0)
    else:
        if stride < 1:
            raise InvalidSpecError("snapshot stride must be >= 1")
        keep = i % stride == 0
    keep[-1] = True
    return i[keep]


@dataclass
class SimulationTrace:
    rule: RuleKind
    true_index: int
    iterations: np.ndarray   # (n,) snapshot iteration indices, strictly increasing
    log_beliefs: np.ndarray  # (n, T, K, H)
    seed: int | None = None

    @property
    def trials(self) -> int:
        return self.log_beliefs.shape[1]

    @property
    def K(self) -> int:
        return self.log_beliefs.shape[2]

    @property
    def H(self) -> int:
        return self.log_beliefs.shape[3]

    @property
    def length(self) -> int:
        return int(self.iterations[-1]) if self.iterations.size else 0

    def neg_log_belief_over_i(self, theta: int) -> np.ndarray:
        """-(1/i) log mu_{k,i}(theta), shape (n, T, K)."""
        return -self.log_beliefs[..., theta] / self.iterations[:, None, None]

    def log_belief_ratio(self, theta: int) -> np.ndarray:
        """lambda_{k,i}(theta) = log mu(true) - log mu(theta), shape (n, T, K)."""
        return self.log_beliefs[..., self.true_index] - self.log_beliefs[..., theta]

    def final_state(self, trial: int = 0) -> BeliefState:
        return BeliefState(self.log_beliefs[-1, trial].copy(), self.length)

    def to_csv(self, path, trial: int = 0) -> None:
        """Columns: iter, agent, hypothesis, log_belief."""
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["iter", "agent", "hypothesis", "log_belief"])
            lb = self.log_beliefs[:, trial]
            for n, it in enumerate(self.iterations):
                for k in range(self.K):
                    for h in range(self.H):
                        w.writerow([int(it), k, h, repr(float(lb[n, k, h]))])

    def derived_to_csv(self, path, trial: int = 0) -> None:
        """Columns: iter, agent, hypothesis, neg_log_belief_over_i (wrong hypotheses only)."""
        wrong = [h for h in range(self.H) if h != self.true_index]
        series = {h: self.neg_log_belief_over_i(h)[:, trial] for h in wrong}
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["iter", "agent", "hypothesis", "neg_log_belief_over_i"])
            for n, it in enumerate(self.iterations):
                for k in range(self.K):
                    for h in wrong:
                        w.writerow([int(it), k, h, repr(float(series[h][n, k]))])


def run(rule: RuleKind, A, model: ObservationModel, true_index: int, iterations: int,
        seed: int, trials: int = 1, initial=None, stride: int | None = None,
        observations=None) -> SimulationTrace:
    """Simulate ``trials`` independent trajectories and record log-belief snapshots.

    ``observations`` optionally replaces sampling; shape ``(iterations, K)``
    or ``(trials, iterations, K)``.
    """
    rule = RuleKind(rule)
    if iterations < 1:
        raise InvalidSpecError("iterations must be >= 1")
    if trials < 1:
        raise InvalidSpecError("trials must be >= 1")
    W = _weights(A)
    K, H = W.shape[0], model.H
    if model.K != K:
        raise InvalidSpecError(f"model has {model.K} agents but the network has {K}")
    if not (0 <= true_index < H):
        raise InvalidSpecError(f"true hypothesis {true_index} out of range for H={H}")

    if initial is None:
        log_mu = np.broadcast_to(uniform_log_beliefs(K, H), (trials, K, H)).copy()
    else:
        with np.errstate(divide="ignore"):
            init = np.log(np.asarray(initial, dtype=float))
        log_mu = normalize_log(np.broadcast_to(init, (trials, K, H)).copy(), 0, "initial belief")

    if observations is not None:
        obs = np.asarray(observations, dtype=float)
        if obs.ndim == 2:
            obs = np.broadcast_to(obs, (trials,) + obs.shape)
        if obs.shape != (trials, iterations, K):
            raise InvalidSpecError(f"observations must have shape {(trials, iterations, K)}")
        rngs = None
    else:
        rngs = [trial_rng(seed, t) for t in range(trials)]

    snaps = default_snapshot_iterations(iterations, stride)
    out = np.empty((snaps.size, trials, K, H))
    s = 0
    block = None
    for i in range(1, iterations + 1):
        j = (i - 1) % SAMPLE_BLOCK
        if rngs is not None and j == 0:
            n = min(SAMPLE_BLOCK, iterations - i + 1)
            block = np.stack([model.sample(true_index, g, size=n) for g in rngs])
        x = block[:, j] if rngs is not None else obs[:, i - 1]
        log_mu = _advance(log_mu, x, rule, W, model, i)
        if snaps[s] == i:
            out[s] = log_mu
            s += 1
    return SimulationTrace(rule, true_index, snaps, out, seed)


def log_belief_ratio_recursion(A, llr, lambda0=None) -> np.ndarray:
    """lambda_i = A^T (lambda_{i-1} + x_i) for an LLR sequence ``llr`` of shape (n, ..., K)."""
    W = _weights(A)
    llr = np.asarray(llr, dtype=float)
    lam = np.zeros(llr.shape[1:]) if lambda0 is None else np.asarray(lambda0, dtype=float)
    out = np.empty_like(llr)
    for i in range(llr.shape[0]):
        lam = (lam + llr[i]) @ W
        out[i] = lam
    return out
