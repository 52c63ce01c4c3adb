"""Decay-rate analysis: closed forms, Monte-Carlo estimators, and bounds on the AA-GA gap.

Every Monte-Carlo routine is a pure function of its inputs and ``seed``.
Sign conventions: ``gamma`` is the growth exponent of the random matrix
product and the AA decay rate is ``-gamma``.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from typing import Iterator, NamedTuple

import numpy as np

from .errors import (
    ConvergenceError,
    InapplicableError,
    InsufficientDataError,
    InternalConsistencyError,
    InvalidSpecError,
)
from .learning import SimulationTrace, trial_rng
from .numerics import logsumexp
from .observation import ObservationModel
from .topology import (
    CombinationMatrix,
    _weights,
    contraction_coefficient_estimate,
    dobrushin_coefficient,
    perron_vector,
)

MC_CHUNK = 1 << 17
DPI_SLACK = 1e-10


class MCEstimate(NamedTuple):
    value: float
    stderr: float
    samples: int


def _perron(A_or_pi) -> np.ndarray:
    if isinstance(A_or_pi, CombinationMatrix):
        return perron_vector(A_or_pi)
    arr = np.asarray(A_or_pi, dtype=float)
    if arr.ndim == 2:
        return perron_vector(arr)
    if np.any(arr <= 0) or abs(arr.sum() - 1.0) > 1e-12:
        raise InvalidSpecError("Perron vector must be a strictly positive probability vector")
    return arr


def _stream(seed: int, key: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=(int(key),)))


def _log_ratio_chunks(model: ObservationModel, true_index: int, theta: int, samples: int,
                      seed: int, chunk: int = MC_CHUNK) -> Iterator[np.ndarray]:
    """i.i.d. draws of the log likelihood-ratio vector, in fixed-size chunks."""
    rng = _stream(seed, 0)
    done = 0
    while done < samples:
        n = min(chunk, samples - done)
        yield model.sample_log_ratios(theta, true_index, rng, n)
        done += n


def _mean_stderr(values: np.ndarray) -> tuple[float, float]:
    values = np.asarray(values, dtype=float)
    if values.size < 2:
        return float(values.mean()), 0.0
    return float(values.mean()), float(values.std(ddof=1) / np.sqrt(values.size))


class _Accumulator:
    """Streaming mean and standard error."""

    def __init__(self):
        self.n = 0
        self.s = 0.0
        self.s2 = 0.0

    def add(self, x: np.ndarray):
        self.n += x.size
        self.s += float(x.sum())
        self.s2 += float((x * x).sum())

    def result(self) -> MCEstimate:
        mean = self.s / self.n
        var = max(self.s2 / self.n - mean * mean, 0.0) * self.n / max(self.n - 1, 1)
        return MCEstimate(mean, float(np.sqrt(var / self.n)), self.n)


# ---------------------------------------------------------------------------
# closed form and empirical rates
# ---------------------------------------------------------------------------

def ga_rate(A, model: ObservationModel, true_index: int, theta: int) -> float:
    """Perron-weighted average of the agents' KL divergences."""
    return float(_perron(A) @ model.kl_vector(true_index, theta))


@dataclass
class EmpiricalRate:
    per_agent: np.ndarray
    pooled: float
    stderr: float
    spread: float
    trials: int


def empirical_rate(trace: SimulationTrace, theta: int, min_length: int = 100) -> EmpiricalRate:
    """Least-squares slope of -log mu_{k,i}(theta) against i over the last half of the trace.

    Slopes are averaged over trials per agent; ``pooled`` averages over
    agents and ``spread`` is the max-min over agents.
    """
    if trace.length < min_length:
        raise InsufficientDataError(f"trace has {trace.length} iterations, need at least {min_length}")
    it = trace.iterations.astype(float)
    sel = it > trace.length / 2.0
    if sel.sum() < 3:
        raise InsufficientDataError("too few snapshots in the second half of the trace")
    t = it[sel]
    y = -trace.log_beliefs[sel][..., theta]  # (n, T, K)
    tc = t - t.mean()
    slopes = np.tensordot(tc, y - y.mean(axis=0), axes=(0, 0)) / (tc @ tc)  # (T, K)
    per_agent = slopes.mean(axis=0)
    pooled_by_trial = slopes.mean(axis=1)
    if trace.trials > 1:
        pooled, stderr = _mean_stderr(pooled_by_trial)
    else:
        ybar = y.mean(axis=2)[:, 0]
        resid = ybar - ybar.mean() - slopes.mean() * tc
        pooled = float(pooled_by_trial[0])
        stderr = float(np.sqrt(resid @ resid / max(t.size - 2, 1) / (tc @ tc)))
    return EmpiricalRate(per_agent, float(pooled), stderr, float(per_agent.max() - per_agent.min()), trace.trials)


def network_rate(rates) -> float:
    """Slowest wrong hypothesis dominates: min over hypotheses of the pooled rate."""
    values = rates.values() if isinstance(rates, dict) else rates
    pooled = [float(np.mean(np.atleast_1d(v))) for v in values]
    if not pooled:
        raise InvalidSpecError("no wrong-hypothesis rates supplied")
    if not np.all(np.isfinite(pooled)):
        raise InvalidSpecError("rates must be finite")
    return min(pooled)


# ---------------------------------------------------------------------------
# random matrix products
# ---------------------------------------------------------------------------

def _ratio_blocks(model, true_index, theta, trials, seed, horizon, block=1024):
    """Yield (T, n, K) blocks of log r, one independent stream per trial."""
    rngs = [trial_rng(seed, t) for t in range(trials)]
    done = 0
    while done < horizon:
        n = min(block, horizon - done)
        yield np.stack([model.sample_log_ratios(theta, true_index, g, n) for g in rngs])
        done += n


def _product_steps(W, model, true_index, theta, trials, seed, horizon):
    """Iterate Y_i = Y_{i-1} A^T R_i with total-mass renormalization.

    Yields ``(i, Y_normalized, log_scale)`` with ``Y_i = exp(log_scale) * Y_normalized``.
    """
    K = W.shape[0]
    Y = np.broadcast_to(np.eye(K), (trials, K, K)).copy()
    log_scale = np.zeros(trials)
    WT = W.T
    i = 0
    for blk in _ratio_blocks(model, true_index, theta, trials, seed, horizon):
        for j in range(blk.shape[1]):
            lr = blk[:, j]
            m = lr.max(axis=1)
            Y = (Y @ WT) * np.exp(lr - m[:, None])[:, None, :]
            s = Y.sum(axis=(1, 2))
            Y /= s[:, None, None]
            log_scale += m + np.log(s)
            i += 1
            yield i, Y, log_scale


@dataclass
class MatrixProductRate:
    gamma: float
    stderr: float
    trials: int
    horizon: int
    entry_spread: float
    spread_at: dict = field(default_factory=dict)

    @property
    def rate(self) -> float:
        return -self.gamma


def matrix_product_rate(A, model: ObservationModel, true_index: int, theta: int,
                        horizon: int = 10_000, trials: int = 50, seed: int = 0,
                        checkpoints=()) -> MatrixProductRate:
    """Monte-Carlo estimate of gamma = lim (1/i) log [Y_i]_{11}.

    ``entry_spread`` is the trial-averaged max-min over (l, k) of
    (1/i) log [Y_i]_{lk}; ``spread_at`` records it at each checkpoint.
    """
    W = _weights(A)
    checkpoints = set(int(c) for c in checkpoints)
    spread_at = {}

    def spread(i, Y, log_scale):
        with np.errstate(divide="ignore"):
            L = (np.log(Y) + log_scale[:, None, None]) / i
        return float(np.mean(L.max(axis=(1, 2)) - L.min(axis=(1, 2))))

    for i, Y, log_scale in _product_steps(W, model, true_index, theta, trials, seed, horizon):
        if i in checkpoints:
            spread_at[i] = spread(i, Y, log_scale)
    with np.errstate(divide="ignore"):
        g = (np.log(Y[:, 0, 0]) + log_scale) / horizon
    gamma, se = _mean_stderr(g)
    return MatrixProductRate(gamma, se, trials, horizon, spread(horizon, Y, log_scale), spread_at)


@dataclass
class SubadditiveBounds:
    j: int
    lower: float
    lower_stderr: float
    upper: float
    upper_stderr: float
    trials: int


def subadditive_bounds(A, model: ObservationModel, true_index: int, theta: int, j: int,
                       trials: int = 20_000, seed: int = 0) -> SubadditiveBounds:
    """(1/j) E[log min row sum of Y_j] <= gamma <= (1/j) E[log max row sum of Y_j].

    Row sums of Y = prod A^T R are the orientation in which the rank-one
    case collapses both sides onto E[log sum_k pi_k r_k].
    """
    if j < 1:
        raise InvalidSpecError("j must be >= 1")
    W = _weights(A)
    Y = log_scale = None
    for _, Y, log_scale in _product_steps(W, model, true_index, theta, trials, seed, j):
        pass
    rows = Y.sum(axis=2)
    with np.errstate(divide="ignore"):
        lo = (np.log(rows.min(axis=1)) + log_scale) / j
        hi = (np.log(rows.max(axis=1)) + log_scale) / j
    lo_m, lo_s = _mean_stderr(lo)
    hi_m, hi_s = _mean_stderr(hi)
    return SubadditiveBounds(j, lo_m, lo_s, hi_m, hi_s, trials)


def inept_bound(A, model: ObservationModel, true_index: int, theta: int, k: int) -> float:
    """Upper bound -log a_kk + D_k on the AA rate from a single self-looped agent."""
    a = float(_weights(A)[k, k])
    if a <= 0:
        raise InapplicableError(f"agent {k} has no self-loop (a_kk = 0)")
    return -np.log(a) + model.kl_divergence(k, true_index, theta)


# ---------------------------------------------------------------------------
# the u-chain and the gap
# ---------------------------------------------------------------------------

def u_chain_step(u, A, r) -> np.ndarray:
    """T(u, R) = R A u / sum(R A u); ``u`` and ``r`` may carry leading batch axes."""
    v = (np.asarray(u, dtype=float) @ _weights(A).T) * np.asarray(r, dtype=float)
    return v / v.sum(axis=-1, keepdims=True)


@dataclass
class GapEstimate:
    value: float
    stderr: float
    chains: int
    horizon: int
    burn_in: int
    chain_spread: float


def gap_estimate(A, model: ObservationModel, true_index: int, theta: int, horizon: int = 20_000,
                 burn_in: int | None = None, seed: int = 0, chains: int = 8) -> GapEstimate:
    """Time average of D(pi||u_j) - D(pi||A u_j) along independent u-chains.

    Chains start from the first row of Y_0 = I and run in the log domain.
    """
    if burn_in is None:
        burn_in = horizon // 10
    if not (0 <= burn_in < horizon):
        raise InvalidSpecError("need 0 <= burn_in < horizon")
    W = _weights(A)
    pi = perron_vector(A)
    K = W.shape[0]
    with np.errstate(divide="ignore"):
        logW = np.log(W)
        log_u = np.broadcast_to(np.log(np.eye(K)[0]), (chains, K)).copy()
    total = np.zeros(chains)
    i = 0
    for blk in _ratio_blocks(model, true_index, theta, chains, seed, horizon):
        for j in range(blk.shape[1]):
            i += 1
            log_v = logsumexp(logW[None, :, :] + log_u[:, None, :], axis=-1)  # log (A u)
            if i > burn_in:
                with np.errstate(invalid="ignore"):
                    d = (log_v - log_u) @ pi
                if not np.all(np.isfinite(d)):
                    raise InvalidSpecError(
                        f"u-chain still has empty support at step {i}; increase burn_in"
                    )
                if np.any(d < -DPI_SLACK):
                    raise InternalConsistencyError(
                        f"negative divergence difference {d.min():.3e} at step {i}"
                    )
                total += d
            z = log_v + blk[:, j]
            log_u = z - logsumexp(z, axis=-1, keepdims=True)
    per_chain = total / (horizon - burn_in)
    value, se = _mean_stderr(per_chain)
    return GapEstimate(value, se, chains, horizon, burn_in, float(per_chain.max() - per_chain.min()))


# ---------------------------------------------------------------------------
# rank-one closed forms
# ---------------------------------------------------------------------------

def rank_one_exact(pi, model: ObservationModel, true_index: int, theta: int,
                   samples: int = 1_000_000, seed: int = 0) -> MCEstimate:
    """AA rate for A = pi 1^T: -E[log sum_k pi_k r_k]."""
    log_pi = np.log(_perron(pi))
    acc = _Accumulator()
    for lr in _log_ratio_chunks(model, true_index, theta, samples, seed):
        acc.add(-logsumexp(lr + log_pi, axis=1))
    return acc.result()


def jensen_gap(pi, model: ObservationModel, true_index: int, theta: int,
               samples: int = 1_000_000, seed: int = 0) -> MCEstimate:
    """E[log sum_k pi_k r_k - sum_k pi_k log r_k]; same draws as ``rank_one_exact`` for a given seed."""
    p = _perron(pi)
    log_pi = np.log(p)
    acc = _Accumulator()
    for lr in _log_ratio_chunks(model, true_index, theta, samples, seed):
        acc.add(logsumexp(lr + log_pi, axis=1) - lr @ p)
    return acc.result()


# ---------------------------------------------------------------------------
# variational bound
# ---------------------------------------------------------------------------

class _Objective:
    """F and G evaluated on one fixed sample of log-ratio vectors."""

    def __init__(self, pi: np.ndarray, log_r: np.ndarray):
        self.pi = pi
        self.log_r = log_r
        self.ga_hat = -float(np.mean(log_r @ pi))

    def parts(self, v):
        log_s = logsumexp(self.log_r + np.log(v), axis=1)
        E = np.mean(np.exp(self.log_r - log_s[:, None]), axis=0)
        return log_s, E

    def F_samples(self, v, log_s=None):
        if log_s is None:
            log_s, _ = self.parts(v)
        # per-sample D(pi || normalize(v * r)) >= 0
        return float(self.pi @ (np.log(self.pi) - np.log(v))) + log_s - self.log_r @ self.pi

    def F(self, v) -> float:
        return float(np.mean(self.F_samples(v)))

    def G(self, v) -> float:
        log_s, E = self.parts(v)
        return float(self.pi @ np.log(E) + log_s.mean() + self.ga_hat)


@dataclass
class FMinimum:
    v: np.ndarray
    F: float
    F_stderr: float
    G: float
    kkt_residual: float
    iterations: int
    samples: int
    converged_starts: int


def _fixed_point(obj: _Objective, v0, damping, tol, max_iter):
    v = np.asarray(v0, dtype=float)
    pi = obj.pi
    for it in range(1, max_iter + 1):
        _, E = obj.parts(v)
        res = float(np.max(np.abs(pi / v - E)))
        if res < tol:
            return v, res, it
        v = (1.0 - damping) * v + damping * pi / E
        v /= v.sum()
    return v, res, None


def minimize_F(A, model: ObservationModel, true_index: int, theta: int, samples: int = 200_000,
               seed: int = 0, starts: int = 5, damping: float = 0.5, tol: float = 1e-4,
               max_iter: int = 10_000) -> FMinimum:
    """Damped KKT fixed-point iteration for inf_v F(v) on common random numbers.

    Starts from pi plus ``starts - 1`` random simplex points; the smallest
    converged F wins.
    """
    pi = _perron(A)
    log_r = np.concatenate(list(_log_ratio_chunks(model, true_index, theta, samples, seed)))
    obj = _Objective(pi, log_r)
    rng = _stream(seed, 1)
    inits = [pi] + [rng.dirichlet(np.ones(pi.size)) * 0.5 + 0.5 * pi for _ in range(max(starts - 1, 0))]
    best = None
    converged = 0
    for v0 in inits:
        v, res, it = _fixed_point(obj, v0, damping, tol, max_iter)
        if it is None:
            continue
        converged += 1
        f = obj.F_samples(v)
        cand = FMinimum(v, float(f.mean()), float(f.std(ddof=1) / np.sqrt(f.size)), obj.G(v), res, it, f.size, 0)
        if best is None or cand.F < best.F:
            best = cand
    if best is None:
        raise ConvergenceError(f"KKT fixed-point iteration did not converge in {max_iter} iterations")
    best.converged_starts = converged
    return best


def objective_on_grid(pi, model: ObservationModel, true_index: int, theta: int, v_grid,
                      samples: int = 200_000, seed: int = 0) -> np.ndarray:
    """F evaluated at each row of ``v_grid`` on the same draws ``minimize_F`` uses."""
    log_r = np.concatenate(list(_log_ratio_chunks(model, true_index, theta, samples, seed)))
    obj = _Objective(_perron(pi), log_r)
    return np.array([obj.F(v) for v in np.asarray(v_grid, dtype=float)])


@dataclass
class VariationalBound:
    delta_relaxed: float
    eta_reference: float
    dobrushin: float
    eta_estimate: float
    F: float | None
    G: float | None
    v: np.ndarray | None
    trivial: bool
    diagnostic: str


def variational_gap_bound(A, model: ObservationModel, true_index: int, theta: int,
                          samples: int = 200_000, seed: int = 0,
                          eta_samples: int = 1000) -> VariationalBound:
    """(1 - delta_A) inf F, plus the (1 - eta_hat) inf F reference from the random-search eta.

    Since eta_A <= delta_A the delta-relaxed value never exceeds the
    eta-based bound; the reference uses a lower estimate of eta and can
    overshoot it.
    """
    delta = dobrushin_coefficient(A)
    eta = contraction_coefficient_estimate(A, samples=eta_samples, rng_seed=seed).estimate
    if delta >= 1.0 - 1e-15:
        return VariationalBound(0.0, 0.0, delta, eta, None, None, None, True,
                                "Dobrushin coefficient equals 1: only the trivial bound 0 follows")
    m = minimize_F(A, model, true_index, theta, samples=samples, seed=seed)
    return VariationalBound((1.0 - delta) * m.F, (1.0 - eta) * m.F, delta, eta, m.F, m.G, m.v, False, "")


@dataclass
class ExchangeableBound:
    B_A: float
    gap_lower: float
    gap_lower_stderr: float
    mean_log_mean_r: float
    dobrushin: float
    ga_rate: float
    samples: int


def exchangeable_bound(A, model: ObservationModel, true_index: int, theta: int,
                       samples: int = 1_000_000, seed: int = 0) -> ExchangeableBound:
    """Closed-form bounds for exchangeable data over a doubly stochastic network.

    ``B_A`` upper-bounds the AA rate and ``gap_lower`` lower-bounds the
    GA-AA gap, both with the Dobrushin coefficient in place of eta.
    Joint exchangeability is assumed, only identical marginals are checked.
    """
    W = _weights(A)
    if np.max(np.abs(W.sum(axis=1) - 1.0)) > 1e-10:
        raise InapplicableError("exchangeable bound needs a doubly stochastic combination matrix")
    if not model.has_identical_marginals():
        raise InapplicableError("exchangeable bound needs identical marginals across agents")
    K = W.shape[0]
    delta = dobrushin_coefficient(W)
    uniform = np.full(K, 1.0 / K)
    rho = ga_rate(uniform, model, true_index, theta)
    j = jensen_gap(uniform, model, true_index, theta, samples=samples, seed=seed)
    gap = (1.0 - delta) * j.value
    return ExchangeableBound(rho - gap, gap, (1.0 - delta) * j.stderr, j.value - rho, delta, rho, j.samples)


# ---------------------------------------------------------------------------
# report
# ---------------------------------------------------------------------------

DEFAULT_REPORT_OPTIONS = {
    "matrix_product_rate": {"horizon": 10_000, "trials": 50},
    "subadditive": {"j": [1, 5, 20], "trials": 20_000},
    "inept": True,
    "rank_one": {"samples": 1_000_000},
    "gap_estimate": {"horizon": 20_000, "chains": 8},
    "variational": {"samples": 200_000},
    "exchangeable": {"samples": 1_000_000},
}


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, (np.floating, float)):
        return float(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    return x


@dataclass
class RateReport:
    true_index: int
    hypotheses: dict = field(default_factory=dict)
    provenance: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return _jsonable({"true_index": self.true_index, "hypotheses": self.hypotheses,
                          "provenance": self.provenance})

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def table(self) -> str:
        lines = []
        for theta, entry in self.hypotheses.items():
            lines.append(f"hypothesis {theta} (true {self.true_index})")
            for name, val in entry.items():
                if isinstance(val, dict) and "value" in val:
                    se = val.get("stderr")
                    tail = f" +/- {se:.2e}" if se else ""
                    lines.append(f"  {name:<28s} {val['value']:.6f}{tail}")
                elif isinstance(val, list):
                    for b in val:
                        lines.append(f"  subadditive j={b['j']:<3d}            [{b['lower']:.6f}, {b['upper']:.6f}]")
        return "\n".join(lines) + "\n"


def _is_rank_one(W: np.ndarray) -> bool:
    return bool(np.max(np.abs(W - W[:, :1])) < 1e-14)


def build_rate_report(A: CombinationMatrix, model: ObservationModel, true_index: int,
                      seed: int, options: dict | None = None) -> RateReport:
    """Every applicable rate and bound for each wrong hypothesis."""
    if model.H < 2:
        raise InvalidSpecError("rate analysis needs at least one wrong hypothesis")
    opts = dict(DEFAULT_REPORT_OPTIONS)
    opts.update(options or {})
    W = _weights(A)
    pi = perron_vector(A)
    delta = dobrushin_coefficient(W)
    report = RateReport(true_index)
    report.provenance = {
        "seed": seed,
        "dobrushin": delta,
        "perron": pi,
        "coefficient_for_bounds": "dobrushin (upper surrogate for the KL contraction coefficient)",
        "options": opts,
    }
    for theta in range(model.H):
        if theta == true_index:
            continue
        e: dict = {}
        e["ga_rate"] = {"value": ga_rate(pi, model, true_index, theta), "method": "closed form, Perron-weighted KL"}
        if opts.get("matrix_product_rate"):
            o = opts["matrix_product_rate"]
            m = matrix_product_rate(A, model, true_index, theta, horizon=o["horizon"], trials=o["trials"], seed=seed)
            e["aa_rate_estimate"] = {"value": m.rate, "stderr": m.stderr, "samples": m.trials,
                                     "horizon": m.horizon, "entry_spread": m.entry_spread,
                                     "method": "Monte-Carlo random matrix product, entry (1,1)"}
        if opts.get("subadditive"):
            o = opts["subadditive"]
            e["subadditive_gamma"] = [
                asdict(subadditive_bounds(A, model, true_index, theta, j, trials=o["trials"], seed=seed))
                for j in o["j"]
            ]
        if opts.get("inept"):
            looped = [k for k in range(A.K) if W[k, k] > 0]
            if looped:
                bounds = [inept_bound(A, model, true_index, theta, k) for k in looped]
                k = looped[int(np.argmin(bounds))]
                e["inept_bound"] = {"value": min(bounds), "agent": k, "method": "single self-looped agent"}
        if opts.get("rank_one") and _is_rank_one(W):
            n = opts["rank_one"]["samples"]
            r1 = rank_one_exact(pi, model, true_index, theta, samples=n, seed=seed)
            jg = jensen_gap(pi, model, true_index, theta, samples=n, seed=seed)
            e["rank_one_exact"] = {"value": r1.value, "stderr": r1.stderr, "samples": r1.samples,
                                   "method": "Monte-Carlo of -E log sum pi_k r_k"}
            e["jensen_gap"] = {"value": jg.value, "stderr": jg.stderr, "samples": jg.samples}
        if opts.get("gap_estimate"):
            o = opts["gap_estimate"]
            g = gap_estimate(A, model, true_index, theta, horizon=o["horizon"], chains=o["chains"], seed=seed)
            e["gap_estimate"] = {"value": g.value, "stderr": g.stderr, "samples": g.chains,
                                 "horizon": g.horizon, "burn_in": g.burn_in, "chain_spread": g.chain_spread,
                                 "method": "u-chain time average of divergence differences"}
        if opts.get("variational"):
            vb = variational_gap_bound(A, model, true_index, theta, samples=opts["variational"]["samples"], seed=seed)
            e["variational_gap_bound"] = {"value": vb.delta_relaxed, "label": "delta-relaxed",
                                          "coefficient": vb.dobrushin, "F": vb.F, "G": vb.G,
                                          "diagnostic": vb.diagnostic}
            e["variational_gap_bound_eta_reference"] = {"value": vb.eta_reference, "label": "eta-hat (optimistic)",
                                                        "coefficient": vb.eta_estimate}
        if opts.get("exchangeable"):
            try:
                xb = exchangeable_bound(A, model, true_index, theta,
                                        samples=opts["exchangeable"]["samples"], seed=seed)
            except InapplicableError:
                pass
            else:
                e["exchangeable_B_A"] = {"value": xb.B_A, "coefficient": xb.dobrushin, "samples": xb.samples,
                                         "method": "upper bound on the AA rate, exchangeable data"}
                e["exchangeable_gap_lower"] = {"value": xb.gap_lower, "stderr": xb.gap_lower_stderr}
        report.hypotheses[theta] = e
    return report
