"""Combination matrices: construction, validation, and spectral/contraction analysis.

Orientation: ``weights[l, k]`` is the weight agent ``k`` places on information
received from agent ``l``.  Columns sum to one (left-stochastic) and fusion
reads ``mu <- A.T @ psi``.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import NamedTuple, Sequence

import numpy as np
from scipy import optimize

from .errors import ConvergenceError, InvalidSpecError, NonPrimitiveError

COLUMN_SUM_TOL = 1e-12
PERRON_TOL = 1e-10

# Stand-in for the unpublished 10-agent, 24-edge non-regular network.
# Degrees (3..6), diameter 2, and with lazy-Metropolis alpha=0.05 the
# Dobrushin coefficient is exactly 0.81.
NONREGULAR_24_EDGES: tuple[tuple[int, int], ...] = (
    (0, 4), (0, 5), (0, 7), (0, 8), (1, 2), (1, 4), (1, 5), (1, 6),
    (1, 7), (1, 9), (2, 3), (2, 5), (2, 7), (2, 9), (3, 8), (3, 9),
    (4, 5), (4, 6), (4, 9), (5, 6), (6, 7), (6, 8), (7, 8), (8, 9),
)


class NetworkKind(str, Enum):
    D_REGULAR = "d_regular_with_self_weight"
    LAZY_METROPOLIS = "lazy_metropolis"
    RANK_ONE = "rank_one"
    FULLY_CONNECTED = "fully_connected_uniform"
    EXPLICIT = "explicit"


@dataclass(frozen=True, eq=False)
class CombinationMatrix:
    """Left-stochastic K x K weight matrix with its Perron vector.

    ``perron`` and ``primitivity_exponent`` are ``None`` when the matrix is
    not primitive.
    """

    weights: np.ndarray
    perron: np.ndarray | None = None
    primitivity_exponent: int | None = None

    @classmethod
    def from_weights(cls, weights, require_primitive: bool = True) -> "CombinationMatrix":
        W = np.array(weights, dtype=float)
        if W.ndim != 2 or W.shape[0] != W.shape[1]:
            raise InvalidSpecError(f"combination matrix must be square, got shape {W.shape}")
        if not np.all(np.isfinite(W)) or np.any(W < 0):
            raise InvalidSpecError("combination matrix entries must be finite and nonnegative")
        col = W.sum(axis=0)
        if np.max(np.abs(col - 1.0)) > COLUMN_SUM_TOL:
            raise InvalidSpecError(
                f"columns must sum to 1 (max deviation {np.max(np.abs(col - 1.0)):.3e})"
            )
        W.setflags(write=False)
        n = primitivity_exponent(W)
        if n is None:
            if require_primitive:
                raise NonPrimitiveError("combination matrix is not primitive")
            return cls(W, None, None)
        pi = perron_vector(W, _checked=True)
        pi.setflags(write=False)
        return cls(W, pi, n)

    @property
    def K(self) -> int:
        return self.weights.shape[0]

    @property
    def is_primitive(self) -> bool:
        return self.primitivity_exponent is not None

    def is_doubly_stochastic(self, tol: float = 1e-10) -> bool:
        return bool(np.max(np.abs(self.weights.sum(axis=1) - 1.0)) <= tol)

    def to_csv(self, path=None) -> str:
        """Row-major CSV; the first line holds ``K``."""
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow([self.K])
        for row in self.weights:
            writer.writerow([repr(float(x)) for x in row])
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text)
        return text

    @classmethod
    def from_csv(cls, path, require_primitive: bool = True) -> "CombinationMatrix":
        rows = list(csv.reader(io.StringIO(Path(path).read_text())))
        K = int(rows[0][0])
        W = np.array([[float(x) for x in r] for r in rows[1 : K + 1]])
        if W.shape != (K, K):
            raise InvalidSpecError(f"CSV declares K={K} but holds a {W.shape} matrix")
        return cls.from_weights(W, require_primitive=require_primitive)


def _weights(A) -> np.ndarray:
    return A.weights if isinstance(A, CombinationMatrix) else np.asarray(A, dtype=float)


# ---------------------------------------------------------------------------
# constructors
# ---------------------------------------------------------------------------

def ring_neighbors(K: int, D: int, k: int) -> list[int]:
    """Neighbors {k-floor(D/2), ..., k-1, k+1, ..., k+ceil(D/2)} mod K."""
    lo, hi = D // 2, -(-D // 2)
    return [(k + off) % K for off in range(-lo, 0)] + [(k + off) % K for off in range(1, hi + 1)]


def build_d_regular(K: int, D: int, alpha: float) -> CombinationMatrix:
    """Ring D-regular network with self-weight ``alpha`` and ``(1-alpha)/D`` per neighbor."""
    if not (1 <= D < K):
        raise InvalidSpecError(f"degree must satisfy 1 <= D < K, got D={D}, K={K}")
    if not (0.0 <= alpha < 1.0):
        raise InvalidSpecError(f"self-weight alpha must lie in [0, 1), got {alpha}")
    W = np.zeros((K, K))
    for k in range(K):
        for l in ring_neighbors(K, D, k):
            W[l, k] += (1.0 - alpha) / D
        W[k, k] += alpha
    return CombinationMatrix.from_weights(W)


def build_lazy_metropolis(edges: Sequence[tuple[int, int]], alpha: float, K: int | None = None) -> CombinationMatrix:
    """A = alpha*I + (1-alpha)*B with Metropolis weights b_lk = 1/max(deg l, deg k)."""
    if not (0.0 <= alpha < 1.0):
        raise InvalidSpecError(f"laziness alpha must lie in [0, 1), got {alpha}")
    edge_set = set()
    for l, k in edges:
        l, k = int(l), int(k)
        if l == k:
            continue
        edge_set.add((min(l, k), max(l, k)))
    if K is None:
        K = 1 + max((max(e) for e in edge_set), default=0)
    if any(l < 0 or k >= K for l, k in edge_set):
        raise InvalidSpecError("edge endpoint outside 0..K-1")
    deg = np.zeros(K, dtype=int)
    for l, k in edge_set:
        deg[l] += 1
        deg[k] += 1
    B = np.zeros((K, K))
    for l, k in edge_set:
        B[l, k] = B[k, l] = 1.0 / max(deg[l], deg[k])
    B[np.diag_indices(K)] = 1.0 - B.sum(axis=0)
    W = alpha * np.eye(K) + (1.0 - alpha) * B
    try:
        return CombinationMatrix.from_weights(W)
    except NonPrimitiveError:
        raise NonPrimitiveError("graph is disconnected; lazy Metropolis matrix is not primitive") from None


def build_rank_one(pi) -> CombinationMatrix:
    """A = pi 1^T: every column equals ``pi``."""
    pi = np.asarray(pi, dtype=float)
    if pi.ndim != 1 or np.any(pi <= 0) or abs(pi.sum() - 1.0) > 1e-12:
        raise InvalidSpecError("rank-one Perron vector must be strictly positive and sum to 1")
    return CombinationMatrix.from_weights(np.tile(pi[:, None], (1, pi.size)))


def build_fully_connected_uniform(K: int) -> CombinationMatrix:
    return build_rank_one(np.full(K, 1.0 / K))


@dataclass
class NetworkSpec:
    """Serializable recipe for a combination matrix."""

    kind: NetworkKind
    K: int
    degree: int | None = None
    alpha: float = 0.0
    perron: list[float] | None = None
    edges: list[tuple[int, int]] | None = None
    weights: list[list[float]] | None = None

    def __post_init__(self):
        try:
            self.kind = NetworkKind(self.kind)
        except ValueError:
            raise InvalidSpecError(f"unknown network kind {self.kind!r}") from None
        if self.K < 1:
            raise InvalidSpecError(f"K must be positive, got {self.K}")
        if self.kind is NetworkKind.D_REGULAR and self.degree is None:
            raise InvalidSpecError("d_regular network requires 'degree'")
        if self.kind is NetworkKind.LAZY_METROPOLIS and self.edges is None:
            raise InvalidSpecError("lazy_metropolis network requires 'edges'")
        if self.kind is NetworkKind.RANK_ONE and self.perron is None:
            raise InvalidSpecError("rank_one network requires 'perron'")
        if self.kind is NetworkKind.EXPLICIT and self.weights is None:
            raise InvalidSpecError("explicit network requires 'weights'")

    def build(self) -> CombinationMatrix:
        if self.kind is NetworkKind.D_REGULAR:
            return build_d_regular(self.K, int(self.degree), float(self.alpha))
        if self.kind is NetworkKind.LAZY_METROPOLIS:
            return build_lazy_metropolis(self.edges, float(self.alpha), K=self.K)
        if self.kind is NetworkKind.RANK_ONE:
            A = build_rank_one(self.perron)
        elif self.kind is NetworkKind.FULLY_CONNECTED:
            A = build_fully_connected_uniform(self.K)
        else:
            A = CombinationMatrix.from_weights(self.weights)
        if A.K != self.K:
            raise InvalidSpecError(f"network declares K={self.K} but builds {A.K} agents")
        return A

    def to_dict(self) -> dict:
        out: dict = {"kind": self.kind.value, "K": self.K}
        if self.degree is not None:
            out["degree"] = self.degree
        if self.kind in (NetworkKind.D_REGULAR, NetworkKind.LAZY_METROPOLIS):
            out["alpha"] = self.alpha
        if self.perron is not None:
            out["perron"] = list(self.perron)
        if self.edges is not None:
            out["edges"] = [list(e) for e in self.edges]
        if self.weights is not None:
            out["weights"] = [list(r) for r in self.weights]
        return out

    @classmethod
    def from_dict(cls, d: dict) -> "NetworkSpec":
        known = {"kind", "K", "degree", "alpha", "perron", "edges", "weights"}
        extra = set(d) - known
        if extra:
            raise InvalidSpecError(f"unknown network fields: {sorted(extra)}")
        edges = d.get("edges")
        if isinstance(edges, str):
            if edges != "nonregular_24":
                raise InvalidSpecError(f"unknown named edge list {edges!r}")
            edges = [tuple(e) for e in NONREGULAR_24_EDGES]
        elif edges is not None:
            edges = [tuple(int(v) for v in e) for e in edges]
        return cls(
            kind=d["kind"],
            K=int(d["K"]),
            degree=d.get("degree"),
            alpha=float(d.get("alpha", 0.0)),
            perron=d.get("perron"),
            edges=edges,
            weights=d.get("weights"),
        )


# ---------------------------------------------------------------------------
# analysis
# ---------------------------------------------------------------------------

def primitivity_exponent(A) -> int | None:
    """Smallest n with A^n entrywise positive, searched up to Wielandt's (K-1)^2+1."""
    P = _weights(A) > 0
    K = P.shape[0]
    Pi = P.astype(np.int64)
    M = P.copy()
    for n in range(1, (K - 1) ** 2 + 2):
        if M.all():
            return n
        M = (M.astype(np.int64) @ Pi) > 0
    return None


def perron_vector(A, tol: float = 1e-12, max_iter: int = 100_000, _checked: bool = False) -> np.ndarray:
    """Power iteration pi <- A pi from the uniform vector, stopped on an L1 step below ``tol``."""
    if isinstance(A, CombinationMatrix) and A.perron is not None:
        return A.perron.copy()
    W = _weights(A)
    if not _checked and primitivity_exponent(W) is None:
        raise NonPrimitiveError("Perron vector requires a primitive matrix")
    K = W.shape[0]
    pi = np.full(K, 1.0 / K)
    for _ in range(max_iter):
        nxt = W @ pi
        nxt /= nxt.sum()
        if np.abs(nxt - pi).sum() < tol:
            pi = nxt
            break
        pi = nxt
    else:
        raise ConvergenceError(f"power iteration did not converge in {max_iter} iterations")
    if np.max(np.abs(W @ pi - pi)) > PERRON_TOL:
        raise ConvergenceError("power iteration stopped away from the Perron vector")
    return pi


def dobrushin_coefficient(A) -> float:
    """max over column pairs of half the L1 distance."""
    W = _weights(A)
    diff = np.abs(W[:, :, None] - W[:, None, :]).sum(axis=0)
    return float(0.5 * diff.max())


def kl_simplex(p, q) -> float:
    """KL divergence between probability vectors with 0 log(0/q) = 0."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    mask = p > 0
    if np.any(q[mask] <= 0):
        return float("inf")
    return float(np.sum(p[mask] * (np.log(p[mask]) - np.log(q[mask]))))


class ContractionEstimate(NamedTuple):
    estimate: float
    dobrushin: float


def _kl_ratio(W, u, v):
    den = kl_simplex(u, v)
    # below ~1e-8 the ratio is dominated by cancellation error
    if not np.isfinite(den) or den <= 1e-8:
        return -np.inf
    return kl_simplex(W @ u, W @ v) / den


def contraction_coefficient_estimate(A, samples: int = 2000, rng_seed: int = 0) -> ContractionEstimate:
    """Lower estimate of the KL contraction coefficient by random search plus local refinement.

    Returns ``(min(estimate, delta_A), delta_A)``; only the Dobrushin value
    is a guaranteed upper bound.
    """
    if samples < 1:
        raise InvalidSpecError("samples must be >= 1")
    W = _weights(A)
    K = W.shape[0]
    delta = dobrushin_coefficient(W)
    if K == 1:
        return ContractionEstimate(0.0, delta)
    rng = np.random.default_rng(rng_seed)
    cands = []
    for s in range(samples):
        conc = (0.3, 1.0, 4.0)[s % 3]
        u = rng.dirichlet(np.full(K, conc))
        if s % 2:
            v = rng.dirichlet(np.full(K, conc))
        else:
            v = u * np.exp(1e-2 * rng.standard_normal(K))
            v /= v.sum()
        u = np.clip(u, 1e-300, None)
        v = np.clip(v, 1e-300, None)
        cands.append((_kl_ratio(W, u, v), u, v))
    cands.sort(key=lambda c: c[0], reverse=True)
    best = max(cands[0][0], 0.0)

    def neg_ratio(z):
        u = np.exp(z[:K] - z[:K].max())
        v = np.exp(z[K:] - z[K:].max())
        r = _kl_ratio(W, u / u.sum(), v / v.sum())
        return -r if np.isfinite(r) else 0.0

    for _, u, v in cands[:3]:
        z0 = np.concatenate([np.log(u), np.log(v)])
        res = optimize.minimize(neg_ratio, z0, method="Nelder-Mead",
                                options={"maxiter": 400 * K, "xatol": 1e-9, "fatol": 1e-12})
        best = max(best, -res.fun)
    return ContractionEstimate(float(min(best, delta)), delta)


def second_eigenvalue_modulus(A) -> float:
    ev = np.sort(np.abs(np.linalg.eigvals(_weights(A))))[::-1]
    return float(ev[1]) if ev.size > 1 else 0.0
