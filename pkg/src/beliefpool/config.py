"""Experiment configuration documents (JSON) and the bundled figure fixtures."""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .errors import BeliefPoolError, ConfigError
from .learning import RuleKind
from .observation import ObservationModel, two_hypothesis_exponential, two_hypothesis_gaussian
from .rates import DEFAULT_REPORT_OPTIONS
from .topology import NetworkSpec

FIGURE_IDS = ("3i", "3ii", "3iii", "4i", "4ii", "4iii")

_TOP_LEVEL = {"network", "networks", "model", "rules", "true_index", "iterations", "trials",
              "seed", "outputs", "analysis", "stride", "agent"}


def _line_of(text: str | None, key: str) -> int | None:
    if not text:
        return None
    m = re.search(r'"%s"\s*:' % re.escape(key), text)
    return text.count("\n", 0, m.start()) + 1 if m else None


class _Ctx:
    """Builds ConfigError messages that carry the field path and, when findable, the line."""

    def __init__(self, text: str | None, source: str):
        self.text = text
        self.source = source

    def error(self, path: str, msg: str) -> ConfigError:
        line = _line_of(self.text, path.split(".")[-1].split("[")[0])
        where = f"{self.source}:{line}" if line else self.source
        return ConfigError(f"{where}: field '{path}': {msg}")


def parse_model(d: dict, K: int | None = None) -> ObservationModel:
    """Accepts full ``params`` or the two-hypothesis shorthands ``betas`` / ``shift``."""
    d = dict(d)
    family = d.get("family")
    if "betas" in d:
        extra = set(d) - {"family", "betas", "true_rate"}
        if extra:
            raise ConfigError(f"unknown model fields: {sorted(extra)}")
        if family not in (None, "exponential_rates"):
            raise ConfigError("'betas' shorthand is for the exponential_rates family")
        return two_hypothesis_exponential(d["betas"], float(d.get("true_rate", 1.0)))
    if "shift" in d:
        extra = set(d) - {"family", "shift", "correlation", "K"}
        if extra:
            raise ConfigError(f"unknown model fields: {sorted(extra)}")
        if family not in (None, "gaussian_mean_shift"):
            raise ConfigError("'shift' shorthand is for the gaussian_mean_shift family")
        K = int(d.get("K", K or 0))
        if K < 1:
            raise ConfigError("'shift' shorthand needs the agent count K")
        return two_hypothesis_gaussian(K, float(d["shift"]), float(d.get("correlation", 0.0)))
    return ObservationModel.from_dict(d)


@dataclass
class ExperimentConfig:
    networks: dict            # name -> NetworkSpec
    model: ObservationModel
    rules: list
    true_index: int
    iterations: int
    trials: int
    seed: int
    outputs: str = "out"
    analysis: dict = field(default_factory=lambda: dict(DEFAULT_REPORT_OPTIONS))
    stride: int | None = None
    agent: int = 0
    raw: dict = field(default_factory=dict)

    @classmethod
    def from_dict(cls, d: dict, text: str | None = None, source: str = "<config>") -> "ExperimentConfig":
        ctx = _Ctx(text, source)
        if not isinstance(d, dict):
            raise ConfigError(f"{source}: top level must be an object")
        unknown = set(d) - _TOP_LEVEL
        if unknown:
            k = sorted(unknown)[0]
            raise ctx.error(k, "unknown field")
        if "seed" not in d:
            raise ConfigError(f"{source}: field 'seed' is required (no implicit entropy)")
        seed = d["seed"]
        if not isinstance(seed, int) or isinstance(seed, bool) or seed < 0 or seed >= 2 ** 64:
            raise ctx.error("seed", "must be an unsigned 64-bit integer")

        if ("network" in d) == ("networks" in d):
            raise ConfigError(f"{source}: give exactly one of 'network' or 'networks'")
        raw_nets = {"main": d["network"]} if "network" in d else d["networks"]
        if not isinstance(raw_nets, dict) or not raw_nets:
            raise ctx.error("networks", "must be a non-empty object of named networks")
        networks = {}
        for name, spec in raw_nets.items():
            try:
                networks[name] = NetworkSpec.from_dict(spec)
            except (BeliefPoolError, TypeError, KeyError, ValueError) as exc:
                raise ctx.error(f"networks.{name}" if "networks" in d else "network", str(exc)) from None
        Ks = {s.K for s in networks.values() if s.K is not None}
        K = Ks.pop() if len(Ks) == 1 else None

        if "model" not in d:
            raise ConfigError(f"{source}: field 'model' is required")
        try:
            model = parse_model(d["model"], K)
        except (BeliefPoolError, TypeError, KeyError, ValueError) as exc:
            raise ctx.error("model", str(exc)) from None

        rules_raw = d.get("rules", ["aa_diffusion", "ga_diffusion"])
        if isinstance(rules_raw, str):
            rules_raw = [rules_raw]
        try:
            rules = [RuleKind(r) for r in rules_raw]
        except ValueError as exc:
            raise ctx.error("rules", str(exc)) from None

        true_index = d.get("true_index", 0)
        if not isinstance(true_index, int) or not (0 <= true_index < model.H):
            raise ctx.error("true_index", f"index {true_index} out of range for H={model.H}")
        iterations = d.get("iterations", 20_000)
        if not isinstance(iterations, int) or iterations < 1:
            raise ctx.error("iterations", "must be an integer >= 1")
        trials = d.get("trials", 20)
        if not isinstance(trials, int) or trials < 1:
            raise ctx.error("trials", "must be an integer >= 1")
        agent = d.get("agent", 0)
        if not isinstance(agent, int) or not (0 <= agent < model.K):
            raise ctx.error("agent", f"agent {agent} out of range for K={model.K}")
        for name, spec in networks.items():
            if spec.K is not None and spec.K != model.K:
                raise ctx.error("model", f"model has {model.K} agents but network '{name}' has {spec.K}")

        analysis = dict(DEFAULT_REPORT_OPTIONS)
        user_analysis = d.get("analysis", {})
        if not isinstance(user_analysis, dict):
            raise ctx.error("analysis", "must be an object")
        unknown = set(user_analysis) - set(DEFAULT_REPORT_OPTIONS)
        if unknown:
            raise ctx.error("analysis", f"unknown toggles {sorted(unknown)}")
        for key, val in user_analysis.items():
            if isinstance(val, dict) and isinstance(analysis[key], dict):
                analysis[key] = {**analysis[key], **val}
            else:
                analysis[key] = val

        return cls(networks, model, rules, true_index, iterations, trials, int(seed),
                   str(d.get("outputs", "out")), analysis, d.get("stride"), agent, d)

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        path = Path(path)
        try:
            text = path.read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        return cls.from_text(text, str(path))

    @classmethod
    def from_text(cls, text: str, source: str = "<config>") -> "ExperimentConfig":
        try:
            d = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{source}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
        return cls.from_dict(d, text, source)

    def with_overrides(self, seed=None, trials=None, iterations=None, outputs=None) -> "ExperimentConfig":
        raw = dict(self.raw)
        for key, val in (("seed", seed), ("trials", trials), ("iterations", iterations), ("outputs", outputs)):
            if val is not None:
                raw[key] = val
        return ExperimentConfig.from_dict(raw)

    def resolved(self) -> dict:
        """Fully explicit config; re-parsing it reproduces the run."""
        return {
            "networks": {n: s.to_dict() for n, s in self.networks.items()},
            "model": self.model.to_dict(),
            "rules": [r.value for r in self.rules],
            "true_index": self.true_index,
            "iterations": self.iterations,
            "trials": self.trials,
            "seed": self.seed,
            "outputs": self.outputs,
            "analysis": self.analysis,
            "stride": self.stride,
            "agent": self.agent,
        }


# ---------------------------------------------------------------------------
# figure fixtures
# ---------------------------------------------------------------------------

@dataclass
class Curve:
    name: str
    rule: RuleKind
    network: NetworkSpec
    model: ObservationModel


@dataclass
class FigureConfig:
    figure: str
    description: str
    iterations: int
    trials: int
    seed: int
    true_index: int
    theta: int
    agent: int
    curves: list
    references: list
    raw: dict

    @classmethod
    def from_dict(cls, d: dict) -> "FigureConfig":
        base_model = d.get("model")
        base_net = d.get("network")
        curves = []
        for c in d["curves"]:
            net = NetworkSpec.from_dict(c.get("network", base_net))
            model = parse_model(c.get("model", base_model), net.K)
            curves.append(Curve(c["name"], RuleKind(c["rule"]), net, model))
        return cls(d["figure"], d.get("description", ""), int(d["iterations"]), int(d["trials"]),
                   int(d["seed"]), int(d.get("true_index", 0)), int(d.get("theta", 1)),
                   int(d.get("agent", 0)), curves, list(d.get("references", [])), d)

    def reference_inputs(self, ref: dict):
        net = NetworkSpec.from_dict(ref.get("network", self.raw.get("network")))
        model = parse_model(ref.get("model", self.raw.get("model")), net.K)
        return net, model


def load_figure(figure_id: str) -> FigureConfig:
    if figure_id not in FIGURE_IDS:
        raise ConfigError(f"unknown figure id {figure_id!r}; choose from {', '.join(FIGURE_IDS)}")
    text = resources.files("beliefpool.figures").joinpath(f"{figure_id}.json").read_text()
    return FigureConfig.from_dict(json.loads(text))

