"""Experiment configuration: presets, validation, JSON (de)serialization.

A config is a plain nested dataclass that fully determines an experiment:
topology sizes, training schedule, binning intervals, goal weights,
initialization scale, run count and base seed. The three presets reproduce
the published protocols; any field can be overridden via
``preset(name, **overrides)`` or by editing a serialized config file.

Seeding scheme: run i uses seed ``base_seed + i`` (for the memory experiment
runs are enumerated pattern-count-major). Within a run the seed splits into
independent streams for network construction (weight init, initial state,
one firing stream per neuron), batch sampling, and evaluation. Identical
configs therefore reproduce identical outputs byte for byte.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass

from .activations import ModulatedContext, SaturatingSum
from .binning import BinningSpec
from .network import Phase, Schedule

__all__ = ["PhaseConfig", "BinningConfig", "ExperimentConfig", "preset", "preset_names", "validate", "serialize", "parse"]

EXPERIMENTS = ("supervised", "unsupervised", "memory")
ACTIVATIONS = ("modulated_context", "saturating_sum")


@dataclass(frozen=True)
class PhaseConfig:
    n_steps: int
    eta: float
    pullback: float = 0.0


@dataclass(frozen=True)
class BinningConfig:
    lower: float
    upper: float
    n_bins: int

    def to_spec(self) -> BinningSpec:
        return BinningSpec(self.lower, self.upper, self.n_bins)


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    n_neurons: int
    n_receptive: int
    activation: str
    phases: tuple[PhaseConfig, ...]
    n_train: int
    n_test: int
    m_rep: int
    b_init: float
    goal: tuple[float, float, float, float, float]
    binning_r: BinningConfig
    binning_c: BinningConfig
    n_runs: int
    base_seed: int
    data_dir: str | None = None
    out_dir: str | None = None
    # memory experiment only
    pattern_counts: tuple[int, ...] = ()
    noise_levels: tuple[float, ...] = (0.0,)
    recall_steps: int = 20
    recall_repeats: int = 1
    # unsupervised experiment only
    mi_samples: int = 100_000

    def schedule(self) -> Schedule:
        return Schedule(
            phases=tuple(Phase(p.n_steps, p.eta, p.pullback) for p in self.phases),
            n_train=self.n_train,
            n_test=self.n_test,
            m_rep=self.m_rep,
        )

    def make_activation(self):
        if self.activation == "modulated_context":
            return ModulatedContext()
        if self.activation == "saturating_sum":
            return SaturatingSum()
        raise ValueError(f"unknown activation {self.activation!r}")


def _table1_supervised() -> ExperimentConfig:
    return ExperimentConfig(
        experiment="supervised",
        n_neurons=10,
        n_receptive=784,
        activation="modulated_context",
        phases=(PhaseConfig(n_steps=800, eta=1.0, pullback=0.0),),
        n_train=1000,
        n_test=1000,
        m_rep=1,
        b_init=0.01,
        goal=(0.1, 0.1, 1.0, 0.1, 0.0),
        binning_r=BinningConfig(-20.0, 20.0, 200),
        binning_c=BinningConfig(-20.0, 20.0, 200),
        n_runs=100,
        base_seed=1000,
    )


def _table2_unsupervised() -> ExperimentConfig:
    return ExperimentConfig(
        experiment="unsupervised",
        n_neurons=8,
        n_receptive=64,
        activation="modulated_context",
        phases=(PhaseConfig(n_steps=50, eta=10.0, pullback=0.28),
                PhaseConfig(n_steps=50, eta=1.0, pullback=0.0)),
        n_train=1000,
        n_test=1000,
        m_rep=8,
        b_init=0.1,
        goal=(1.0, 0.0, 0.0, 0.0, 0.0),
        binning_r=BinningConfig(-25.0, 25.0, 500),
        binning_c=BinningConfig(-25.0, 25.0, 500),
        n_runs=300,
        base_seed=2000,
    )


def _table3_memory() -> ExperimentConfig:
    return ExperimentConfig(
        experiment="memory",
        n_neurons=100,
        n_receptive=1,
        activation="saturating_sum",
        phases=(PhaseConfig(n_steps=300, eta=0.48, pullback=0.0),),
        n_train=200,
        n_test=200,
        m_rep=8,
        b_init=0.1,
        goal=(0.1, 0.1, 1.0, 0.1, 0.0),
        binning_r=BinningConfig(-20.0, 20.0, 20),
        binning_c=BinningConfig(-20.0, 20.0, 20),
        n_runs=25,
        base_seed=3000,
        pattern_counts=(1, 2, 4, 6, 8, 12, 15, 20, 25, 30, 35, 40, 45, 50, 55, 60),
        noise_levels=(0.0, 0.2),
        recall_steps=20,
        recall_repeats=1,
    )


_PRESETS = {
    "supervised": _table1_supervised,
    "unsupervised": _table2_unsupervised,
    "memory": _table3_memory,
}


def preset_names() -> tuple[str, ...]:
    return tuple(_PRESETS)


def preset(name: str, **overrides) -> ExperimentConfig:
    """A preset config, optionally with overridden fields."""
    if name not in _PRESETS:
        raise KeyError(f"unknown preset {name!r}; choose from {preset_names()}")
    cfg = _PRESETS[name]()
    if overrides:
        cfg = dataclasses.replace(cfg, **overrides)
    return cfg


def validate(config: ExperimentConfig) -> list[str]:
    """Every constraint violation as a 'field: problem' message (empty = runnable)."""
    bad: list[str] = []
    if config.experiment not in EXPERIMENTS:
        bad.append(f"experiment: must be one of {EXPERIMENTS}")
    if config.activation not in ACTIVATIONS:
        bad.append(f"activation: must be one of {ACTIVATIONS}")
    if config.n_neurons < 1:
        bad.append("n_neurons: must be >= 1")
    if config.n_receptive < 1:
        bad.append("n_receptive: must be >= 1")
    if config.experiment == "memory" and config.n_receptive != 1:
        bad.append("n_receptive: memory neurons read a single pattern element")
    if not config.phases:
        bad.append("phases: need at least one phase")
    for i, p in enumerate(config.phases):
        if p.n_steps < 1:
            bad.append(f"phases[{i}].n_steps: must be >= 1")
        if p.eta < 0:
            bad.append(f"phases[{i}].eta: must be >= 0")
        if not 0.0 <= p.pullback < 0.5:
            bad.append(f"phases[{i}].pullback: must lie in [0, 0.5) to keep 1-2*pullback positive")
    if config.n_train < 1:
        bad.append("n_train: must be >= 1")
    if config.n_test < 1:
        bad.append("n_test: must be >= 1")
    if config.m_rep < 1:
        bad.append("m_rep: must be >= 1")
    if config.b_init <= 0:
        bad.append("b_init: must be > 0")
    if len(config.goal) != 5 or not all(isinstance(g, (int, float)) for g in config.goal):
        bad.append("goal: must be 5 numbers")
    for side, b in (("binning_r", config.binning_r), ("binning_c", config.binning_c)):
        if not b.lower < b.upper:
            bad.append(f"{side}: needs lower < upper")
        if b.n_bins < 1:
            bad.append(f"{side}.n_bins: must be >= 1")
    if config.n_runs < 1:
        bad.append("n_runs: must be >= 1")
    if config.experiment == "memory":
        if not config.pattern_counts:
            bad.append("pattern_counts: memory experiment needs at least one pattern count")
        if any(p < 1 for p in config.pattern_counts):
            bad.append("pattern_counts: all counts must be >= 1")
        if any(not 0.0 <= nl <= 1.0 for nl in config.noise_levels):
            bad.append("noise_levels: must lie in [0, 1]")
        if config.recall_steps < 1:
            bad.append("recall_steps: must be >= 1")
        if config.recall_repeats < 1:
            bad.append("recall_repeats: must be >= 1")
    if config.experiment == "unsupervised" and config.mi_samples < 1:
        bad.append("mi_samples: must be >= 1")
    return bad


def serialize(config: ExperimentConfig) -> str:
    """Human-readable JSON; parse(serialize(c)) == c."""
    return json.dumps(dataclasses.asdict(config), indent=2, sort_keys=True) + "\n"


def parse(text: str) -> ExperimentConfig:
    data = json.loads(text)
    try:
        data["phases"] = tuple(PhaseConfig(**p) for p in data["phases"])
        data["binning_r"] = BinningConfig(**data["binning_r"])
        data["binning_c"] = BinningConfig(**data["binning_c"])
        data["goal"] = tuple(float(g) for g in data["goal"])
        data["pattern_counts"] = tuple(int(p) for p in data.get("pattern_counts", ()))
        data["noise_levels"] = tuple(float(n) for n in data.get("noise_levels", (0.0,)))
        return ExperimentConfig(**data)
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed config: {exc}") from exc
