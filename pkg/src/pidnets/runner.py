"""Experiment drivers: execute a config end to end and export CSV artifacts.

Every run is seeded as ``base_seed + run_index`` (memory runs are enumerated
pattern-count-major) and splits its seed into independent streams for network
construction, batch sampling, evaluation and (memory) pattern generation, so
re-running a config reproduces identical artifacts byte for byte. Runs are
independent and can execute in parallel worker processes; outputs are written
by the parent in run order.

Artifacts (written under the output directory):

* ``trajectories.csv`` — per run, batch and neuron: the five goal components,
  the classical entropies/informations, and the goal value.
* ``summary.csv`` — per-run final metrics in (run, metric, value) rows.
* ``fields.csv`` — final weights and biases of every neuron.
* ``capacity.csv`` — memory only: accuracy per run, pattern count, noise
  level and model (trained network vs. the Hebbian outer-product baseline).

Floats are formatted with nine significant digits.
"""

from __future__ import annotations

import csv
import dataclasses
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .baselines import hopfield_train, train_logreg
from .config import ExperimentConfig
from .datasets import MnistDataset, corrupt_patterns, generate_bars, generate_patterns, load_mnist
from .metrics import (
    cosine_similarity,
    hebbian_similarity,
    layer_mutual_information,
    weight_symmetry,
    wta_accuracy,
)
from .network import (
    MemoryRecurrent,
    Network,
    RecurrentFull,
    SupervisedOneVsAll,
    TrajectoryRecord,
)
from .pid import GoalParams

__all__ = ["RunResult", "ExperimentResult", "run_experiment", "write_outputs", "run_config"]

FLOAT_FMT = "%.9g"


# --------------------------------------------------------------- data sources


class MnistSource:
    """Uniform-with-replacement batches from the train/test splits; labels are
    delivered as ±1 one-hot vectors."""

    def __init__(self, dataset: MnistDataset, n_classes: int = 10):
        self._data = dataset
        self._eye = np.eye(n_classes)

    def _onehots(self, labels):
        return 2.0 * self._eye[labels] - 1.0

    def sample_train(self, rng, n):
        idx = rng.integers(0, self._data.train_images.shape[0], size=n)
        return self._data.train_images[idx], self._onehots(self._data.train_labels[idx])

    def sample_eval(self, rng, n):
        idx = rng.integers(0, self._data.test_images.shape[0], size=n)
        return self._data.test_images[idx], self._onehots(self._data.test_labels[idx])


class BarsSource:
    def __init__(self, n_bars: int = 8):
        self.n_bars = n_bars

    def sample_train(self, rng, n):
        return generate_bars(rng, n, self.n_bars).pixels

    sample_eval = sample_train


class PatternSource:
    """Uniform-with-replacement presentation of a fixed stored-pattern set."""

    def __init__(self, patterns: np.ndarray):
        self.patterns = patterns

    def sample_train(self, rng, n):
        idx = rng.integers(0, self.patterns.shape[0], size=n)
        return self.patterns[idx]

    sample_eval = sample_train


# -------------------------------------------------------------------- results


@dataclass
class RunResult:
    run_index: int
    trajectories: list[TrajectoryRecord]
    weights: list[dict]  # per neuron: {"w_r": ..., "b_r": ..., "w_c": ..., "b_c": ...}
    summary: dict[str, float]
    pattern_count: int | None = None
    capacity_rows: list[tuple] = dataclasses.field(default_factory=list)  # (noise, model, accuracy)


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    runs: list[RunResult]
    summary: dict[str, float]


# ---------------------------------------------------------------- single runs


def _run_streams(seed: int, extra: int = 0):
    children = np.random.SeedSequence(seed).spawn(3 + extra)
    net_ss = children[0]
    rngs = [np.random.default_rng(c) for c in children[1:]]
    return net_ss, *rngs


def _snapshot_weights(net: Network) -> list[dict]:
    return [{"w_r": n.w_r.copy(), "b_r": n.b_r, "w_c": n.w_c.copy(), "b_c": n.b_c}
            for n in net.neurons]


def _final_batch_means(trajectories: list[TrajectoryRecord]) -> dict[str, float]:
    last = max(rec.batch_index for rec in trajectories)
    finals = [rec.atoms for rec in trajectories if rec.batch_index == last]
    return {
        "final_mean_i_unq_r": float(np.mean([a.i_unq_r for a in finals])),
        "final_mean_i_unq_c": float(np.mean([a.i_unq_c for a in finals])),
        "final_mean_i_red": float(np.mean([a.i_red for a in finals])),
        "final_mean_i_syn": float(np.mean([a.i_syn for a in finals])),
        "final_mean_h_res": float(np.mean([a.h_res for a in finals])),
        "final_mean_h_y": float(np.mean([a.h_y for a in finals])),
    }


def run_supervised(config: ExperimentConfig, run_index: int, dataset: MnistDataset) -> RunResult:
    net_ss, data_rng, eval_rng = _run_streams(config.base_seed + run_index)
    topology = SupervisedOneVsAll(n_classes=config.n_neurons, n_inputs=config.n_receptive)
    net = Network.build(topology, config.make_activation(), config.binning_r.to_spec(),
                        config.binning_c.to_spec(), GoalParams(config.goal), config.b_init, net_ss)
    source = MnistSource(dataset, config.n_neurons)
    trajectories = net.train(config.schedule(), source, data_rng, eval_rng)
    net.normalize_polarity()

    summary = _final_batch_means(trajectories)
    summary["test_accuracy"] = wta_accuracy(net.test_thetas(dataset.test_images), dataset.test_labels)
    summary["train_accuracy"] = wta_accuracy(net.test_thetas(dataset.train_images), dataset.train_labels)
    return RunResult(run_index, trajectories, _snapshot_weights(net), summary)


def bar_preferences(weights: list[dict], n_bars: int = 8) -> np.ndarray:
    """Preferred bar per neuron: strongest mean receptive weight over a bar's
    pixel block (magnitude, since a bar can be coded by either sign)."""
    prefs = []
    for w in weights:
        per_bar = w["w_r"].reshape(n_bars, -1).mean(axis=1)
        prefs.append(int(np.argmax(np.abs(per_bar))))
    return np.array(prefs)


def run_unsupervised(config: ExperimentConfig, run_index: int) -> RunResult:
    net_ss, data_rng, eval_rng = _run_streams(config.base_seed + run_index)
    topology = RecurrentFull(n_neurons=config.n_neurons, n_inputs=config.n_receptive)
    net = Network.build(topology, config.make_activation(), config.binning_r.to_spec(),
                        config.binning_c.to_spec(), GoalParams(config.goal), config.b_init, net_ss)
    source = BarsSource(config.n_neurons)
    trajectories = net.train(config.schedule(), source, data_rng, eval_rng)

    weights = _snapshot_weights(net)
    prefs = bar_preferences(weights, config.n_neurons)
    summary = _final_batch_means(trajectories)
    summary["all_bars_encoded"] = float(len(set(prefs.tolist())) == config.n_neurons)
    summary["layer_mutual_information"] = layer_mutual_information(
        net, config.mi_samples, config.m_rep, eval_rng)
    result = RunResult(run_index, trajectories, weights, summary)
    result.summary.update({f"preferred_bar_{k}": float(b) for k, b in enumerate(prefs)})
    return result


def _batch_hopfield_recall(weights: np.ndarray, cues: np.ndarray, n_steps: int) -> np.ndarray:
    states = cues
    for _ in range(n_steps):
        states = np.where(states @ weights.T >= 0, 1.0, -1.0)
    return states


def run_memory(config: ExperimentConfig, pattern_count: int, run_index: int, seed: int) -> RunResult:
    net_ss, data_rng, eval_rng, pattern_rng = _run_streams(seed, extra=1)
    patterns = generate_patterns(pattern_rng, pattern_count, config.n_neurons)
    topology = MemoryRecurrent(n_neurons=config.n_neurons)
    net = Network.build(topology, config.make_activation(), config.binning_r.to_spec(),
                        config.binning_c.to_spec(), GoalParams(config.goal), config.b_init, net_ss)
    source = PatternSource(patterns.patterns)
    trajectories = net.train(config.schedule(), source, data_rng, eval_rng)
    net.normalize_polarity()

    hopfield = hopfield_train(patterns)
    originals = np.repeat(patterns.patterns, config.recall_repeats, axis=0)
    capacity_rows = []
    summary = _final_batch_means(trajectories)
    for noise in config.noise_levels:
        # Both models recall from the same corrupted cues.
        cues = corrupt_patterns(originals, noise, eval_rng)
        states = net.recall_batch(cues, 0.0, config.recall_steps, eval_rng)
        acc_net = float(np.mean([cosine_similarity(states[i, -1], originals[i])
                                 for i in range(originals.shape[0])]))
        hop_states = _batch_hopfield_recall(hopfield.weights, cues, config.recall_steps)
        acc_hop = float(np.mean([cosine_similarity(hop_states[i], originals[i])
                                 for i in range(originals.shape[0])]))
        capacity_rows.append((noise, "infomorphic", acc_net))
        capacity_rows.append((noise, "hopfield", acc_hop))
        summary[f"recall_accuracy_beta_{noise:g}"] = acc_net
        summary[f"hopfield_accuracy_beta_{noise:g}"] = acc_hop

    w_c = net.contextual_matrix()
    summary["weight_symmetry"] = weight_symmetry(w_c)
    summary["hebbian_similarity"] = hebbian_similarity(w_c, patterns)
    return RunResult(run_index, trajectories, _snapshot_weights(net), summary,
                     pattern_count=pattern_count, capacity_rows=capacity_rows)


# ------------------------------------------------------------- orchestration

_DATASET_CACHE: dict[str, MnistDataset] = {}


def _cached_mnist(data_dir: str | None) -> MnistDataset:
    key = data_dir or ""
    if key not in _DATASET_CACHE:
        _DATASET_CACHE[key] = load_mnist(data_dir)
    return _DATASET_CACHE[key]


def _execute_task(config: ExperimentConfig, task: tuple) -> RunResult:
    if config.experiment == "supervised":
        (run_index,) = task
        return run_supervised(config, run_index, _cached_mnist(config.data_dir))
    if config.experiment == "unsupervised":
        (run_index,) = task
        return run_unsupervised(config, run_index)
    pattern_count, run_index, seed = task
    return run_memory(config, pattern_count, run_index, seed)


def _limit_worker_blas():
    try:
        from threadpoolctl import threadpool_limits

        threadpool_limits(1)
    except Exception:
        pass


def run_experiment(config: ExperimentConfig, threads: int = 1, verbose: bool = False) -> ExperimentResult:
    """Execute all runs of a config and aggregate experiment-level metrics."""
    if config.experiment == "memory":
        tasks = [(count, i, config.base_seed + ci * config.n_runs + i)
                 for ci, count in enumerate(config.pattern_counts)
                 for i in range(config.n_runs)]
    else:
        tasks = [(i,) for i in range(config.n_runs)]

    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads, initializer=_limit_worker_blas) as pool:
            runs = list(pool.map(_execute_task, [config] * len(tasks), tasks))
    else:
        runs = []
        for t in tasks:
            runs.append(_execute_task(config, t))
            if verbose:
                r = runs[-1]
                tag = f"run {r.run_index}" if r.pattern_count is None else \
                    f"patterns {r.pattern_count} run {r.run_index}"
                print(f"[{config.experiment}] {tag}: " +
                      ", ".join(f"{k}={v:.4g}" for k, v in sorted(r.summary.items())
                                if not k.startswith("preferred")))

    summary: dict[str, float] = {}
    if config.experiment == "supervised":
        summary["mean_test_accuracy"] = float(np.mean([r.summary["test_accuracy"] for r in runs]))
        summary["mean_train_accuracy"] = float(np.mean([r.summary["train_accuracy"] for r in runs]))
        if verbose:
            print("[supervised] training logistic-regression baseline ...")
        logreg = train_logreg(_cached_mnist(config.data_dir))
        dataset = _cached_mnist(config.data_dir)
        summary["logreg_test_accuracy"] = wta_accuracy(
            logreg.predict_theta(dataset.test_images), dataset.test_labels)
    elif config.experiment == "unsupervised":
        summary["runs_encoding_all_bars"] = float(sum(r.summary["all_bars_encoded"] for r in runs))
        summary["mean_final_i_unq_r"] = float(np.mean([r.summary["final_mean_i_unq_r"] for r in runs]))
        summary["mean_layer_mutual_information"] = float(
            np.mean([r.summary["layer_mutual_information"] for r in runs]))
    else:
        for count in config.pattern_counts:
            for noise in config.noise_levels:
                for model in ("infomorphic", "hopfield"):
                    accs = [acc for r in runs if r.pattern_count == count
                            for nz, m, acc in r.capacity_rows if nz == noise and m == model]
                    summary[f"{model}_accuracy_p{count}_beta_{noise:g}"] = float(np.mean(accs))
    return ExperimentResult(config=config, runs=runs, summary=summary)


def run_config(config: ExperimentConfig, out_dir: str | Path | None = None,
               threads: int = 1, verbose: bool = False) -> ExperimentResult:
    """run_experiment + write_outputs in one call (the CLI entry point)."""
    result = run_experiment(config, threads=threads, verbose=verbose)
    target = out_dir if out_dir is not None else config.out_dir
    if target is not None:
        write_outputs(result, target)
    return result


# ------------------------------------------------------------------- writing


def _fmt(x) -> str:
    if isinstance(x, (float, np.floating)):
        return FLOAT_FMT % x
    return str(x)


def _run_sort_key(r: RunResult):
    return (r.pattern_count if r.pattern_count is not None else -1, r.run_index)


def write_outputs(result: ExperimentResult, out_dir: str | Path):
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    runs = sorted(result.runs, key=_run_sort_key)
    memory = result.config.experiment == "memory"
    group_cols = ["run", "pattern_count"] if memory else ["run"]

    def group_values(r: RunResult):
        return [r.run_index, r.pattern_count] if memory else [r.run_index]

    with open(out / "trajectories.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(group_cols + ["batch", "neuron", "i_unq_r", "i_unq_c", "i_red", "i_syn",
                                      "h_res", "h_y", "i_y_r", "i_y_c", "i_y_rc", "goal"])
        for r in runs:
            for rec in r.trajectories:
                a = rec.atoms
                writer.writerow([_fmt(v) for v in group_values(r) + [
                    rec.batch_index, rec.neuron_id, a.i_unq_r, a.i_unq_c, a.i_red, a.i_syn,
                    a.h_res, a.h_y, a.i_y_r, a.i_y_c, a.i_y_rc, rec.goal]])

    with open(out / "summary.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(group_cols + ["metric", "value"])
        for r in runs:
            for key in sorted(r.summary):
                writer.writerow([_fmt(v) for v in group_values(r) + [key, r.summary[key]]])
        for key in sorted(result.summary):
            writer.writerow([_fmt(v) for v in ["all"] + ([""] if memory else []) + [key, result.summary[key]]])

    with open(out / "fields.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(group_cols + ["neuron", "kind", "index", "value"])
        for r in runs:
            for k, w in enumerate(r.weights):
                for i, v in enumerate(w["w_r"]):
                    writer.writerow([_fmt(x) for x in group_values(r) + [k, "w_r", i, v]])
                writer.writerow([_fmt(x) for x in group_values(r) + [k, "b_r", 0, w["b_r"]]])
                for i, v in enumerate(w["w_c"]):
                    writer.writerow([_fmt(x) for x in group_values(r) + [k, "w_c", i, v]])
                writer.writerow([_fmt(x) for x in group_values(r) + [k, "b_c", 0, w["b_c"]]])

    if memory:
        with open(out / "capacity.csv", "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["run", "pattern_count", "noise", "model", "accuracy"])
            for r in runs:
                for noise, model, acc in r.capacity_rows:
                    writer.writerow([_fmt(x) for x in [r.run_index, r.pattern_count, noise, model, acc]])
