"""Per-agent likelihood families, joint sampling under the true hypothesis, and KL divergences."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import DomainError, InvalidSpecError

LOG_2PI = math.log(2.0 * math.pi)


class Family(str, Enum):
    EXPONENTIAL = "exponential_rates"
    GAUSSIAN = "gaussian_mean_shift"


@dataclass(frozen=True)
class HypothesisSet:
    H: int
    true_index: int

    def __post_init__(self):
        if self.H < 2:
            raise InvalidSpecError(f"need at least two hypotheses, got H={self.H}")
        if not (0 <= self.true_index < self.H):
            raise InvalidSpecError(f"true hypothesis index {self.true_index} out of range for H={self.H}")

    @property
    def wrong(self) -> list[int]:
        return [t for t in range(self.H) if t != self.true_index]


class IdentifiabilityWarning(UserWarning):
    pass


@dataclass(frozen=True, eq=False)
class ObservationModel:
    """Marginal likelihoods for every (hypothesis, agent) pair.

    ``params[theta, k]`` is the exponential rate or the Gaussian mean of
    agent ``k`` under hypothesis ``theta``.  Gaussian marginals have unit
    variance; ``correlation`` only shapes the joint used for sampling,
    with covariance ``c * 11^T + (1 - c) * I``.
    """

    family: Family
    params: np.ndarray
    correlation: float = 0.0

    def __post_init__(self):
        try:
            family = Family(self.family)
        except ValueError:
            raise InvalidSpecError(f"unknown likelihood family {self.family!r}") from None
        object.__setattr__(self, "family", family)
        P = np.array(self.params, dtype=float)
        if P.ndim != 2 or P.shape[0] < 1 or P.shape[1] < 1:
            raise InvalidSpecError("params must be an H x K array")
        if not np.all(np.isfinite(P)):
            raise InvalidSpecError("model parameters must be finite")
        if family is Family.EXPONENTIAL:
            if np.any(P <= 0):
                raise InvalidSpecError("exponential rates must be strictly positive")
            if self.correlation != 0.0:
                raise InvalidSpecError("exponential observations are independent across agents")
        elif not (0.0 <= self.correlation <= 1.0):
            raise InvalidSpecError(f"correlation must lie in [0, 1], got {self.correlation}")
        P.setflags(write=False)
        object.__setattr__(self, "params", P)
        object.__setattr__(self, "correlation", float(self.correlation))

    @classmethod
    def exponential(cls, rates) -> "ObservationModel":
        return cls(Family.EXPONENTIAL, rates)

    @classmethod
    def gaussian(cls, means, correlation: float = 0.0) -> "ObservationModel":
        return cls(Family.GAUSSIAN, means, correlation)

    @property
    def H(self) -> int:
        return self.params.shape[0]

    @property
    def K(self) -> int:
        return self.params.shape[1]

    # -- sampling ---------------------------------------------------------

    def sample(self, true_index: int, rng: np.random.Generator, size: int | None = None) -> np.ndarray:
        """One private signal per agent; shape ``(K,)`` or ``(size, K)``."""
        shape = () if size is None else (int(size),)
        p = self.params[true_index]
        if self.family is Family.EXPONENTIAL:
            return rng.standard_exponential(shape + (self.K,)) / p
        z = rng.standard_normal(shape + (self.K + 1,))
        c = self.correlation
        return p + math.sqrt(c) * z[..., :1] + math.sqrt(1.0 - c) * z[..., 1:]

    # -- likelihoods ------------------------------------------------------

    def _check_domain(self, x):
        if self.family is Family.EXPONENTIAL and np.any(np.asarray(x) < 0):
            raise DomainError("exponential observations must be nonnegative")

    def log_likelihood(self, k: int, theta: int, x):
        self._check_domain(x)
        p = self.params[theta, k]
        if self.family is Family.EXPONENTIAL:
            return np.log(p) - p * x
        return -0.5 * (x - p) ** 2 - 0.5 * LOG_2PI

    def log_likelihoods(self, x) -> np.ndarray:
        """All marginal log-likelihoods; ``x`` has shape ``(..., K)``, result ``(..., K, H)``."""
        x = np.asarray(x, dtype=float)
        self._check_domain(x)
        P = self.params.T  # (K, H)
        xe = x[..., None]
        if self.family is Family.EXPONENTIAL:
            return np.log(P) - P * xe
        return -0.5 * (xe - P) ** 2 - 0.5 * LOG_2PI

    def log_ratios(self, theta: int, true_index: int, x) -> np.ndarray:
        """log r_k(theta) = log L_k(x_k|theta) - log L_k(x_k|true) for every agent."""
        x = np.asarray(x, dtype=float)
        self._check_domain(x)
        p1, p0 = self.params[theta], self.params[true_index]
        if self.family is Family.EXPONENTIAL:
            return np.log(p1) - np.log(p0) - (p1 - p0) * x
        return (p1 - p0) * x - 0.5 * (p1 ** 2 - p0 ** 2)

    def likelihood_ratio(self, k: int, theta: int, true_index: int, x):
        if theta == true_index:
            self._check_domain(x)
            return np.ones_like(np.asarray(x, dtype=float))
        return np.exp(self.log_likelihood(k, theta, x) - self.log_likelihood(k, true_index, x))

    def sample_log_ratios(self, theta: int, true_index: int, rng: np.random.Generator, n: int) -> np.ndarray:
        """``(n, K)`` draws of log r under the true hypothesis."""
        return self.log_ratios(theta, true_index, self.sample(true_index, rng, size=n))

    # -- divergences ------------------------------------------------------

    def kl_divergence(self, k: int, true_index: int, theta: int) -> float:
        return float(self.kl_vector(true_index, theta)[k])

    def kl_vector(self, true_index: int, theta: int) -> np.ndarray:
        """D(L_k(.|true) || L_k(.|theta)) for every agent."""
        p0, p1 = self.params[true_index], self.params[theta]
        if self.family is Family.EXPONENTIAL:
            out = np.log(p0 / p1) + p1 / p0 - 1.0
        else:
            out = 0.5 * (p0 - p1) ** 2
        return np.maximum(out, 0.0)

    def check_assumptions(self, true_index: int) -> None:
        """Warn when some wrong hypothesis is invisible to every agent."""
        HypothesisSet(self.H, true_index)
        for theta in range(self.H):
            if theta != true_index and not np.any(self.kl_vector(true_index, theta) > 0):
                warnings.warn(
                    f"hypothesis {theta} is not globally identifiable from {true_index}",
                    IdentifiabilityWarning,
                    stacklevel=2,
                )

    def has_identical_marginals(self) -> bool:
        return bool(np.all(self.params == self.params[:, :1]))

    # -- serialization ----------------------------------------------------

    def to_dict(self) -> dict:
        out = {"family": self.family.value, "params": self.params.tolist()}
        if self.family is Family.GAUSSIAN:
            out["correlation"] = self.correlation
        return out

    @classmethod
    def from_dict(cls, d: dict) -> "ObservationModel":
        extra = set(d) - {"family", "params", "correlation"}
        if extra:
            raise InvalidSpecError(f"unknown model fields: {sorted(extra)}")
        return cls(d["family"], d["params"], float(d.get("correlation", 0.0)))


def two_hypothesis_exponential(betas, true_rate: float = 1.0) -> ObservationModel:
    """H=2 model: rate ``true_rate`` under hypothesis 0, agent rates ``betas`` under hypothesis 1."""
    betas = np.asarray(betas, dtype=float)
    return ObservationModel.exponential(np.vstack([np.full_like(betas, true_rate), betas]))


def two_hypothesis_gaussian(K: int, shift: float, correlation: float) -> ObservationModel:
    """H=2 model: mean 0 under hypothesis 0, mean ``shift`` under hypothesis 1."""
    return ObservationModel.gaussian(np.vstack([np.zeros(K), np.full(K, float(shift))]), correlation)
