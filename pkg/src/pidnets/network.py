"""Network topologies, synchronous dynamics and the training loop.

Three wirings cover the experiments:

* :class:`SupervisedOneVsAll` — every neuron sees the full stimulus as
  receptive input and one element of a ±1 one-hot label as its scalar
  contextual input. No recurrence; in test mode the context input is 0.
* :class:`RecurrentFull` — every neuron sees the full stimulus; its context
  is the previous-step output of all *other* neurons (no self-connections).
* :class:`MemoryRecurrent` — neuron k's receptive input is the single
  element k of the pattern; context as above. During recall the pattern is
  presented for one step only, afterwards the receptive input is 0.

Dynamics are synchronous with a one-step delay: within a step every neuron
reads the same previous output vector, and the state is swapped atomically
after all neurons fired. Each neuron owns an independent random stream for
its firing draws, so the outcome does not depend on any evaluation order.

Training is mini-batch: a batch presents ``n_train`` freshly drawn samples
for ``m_rep`` consecutive steps each (all presentation steps enter the
histogram), then every neuron computes its goal gradient from the batch and
takes one update. The network state carries over across samples, batches and
phases; it is randomized once per run.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .activations import sigmoid
from .binning import BinningSpec
from .datasets import corrupt_patterns
from .neuron import GradientPair, Neuron
from .pid import GoalParams, PidAtoms, _build_joint_from_indices, goal_value, pid_decompose

__all__ = [
    "Phase",
    "Schedule",
    "SupervisedOneVsAll",
    "RecurrentFull",
    "MemoryRecurrent",
    "NetworkState",
    "Network",
    "TrajectoryRecord",
]


@dataclass(frozen=True)
class Phase:
    """One training phase: number of mini-batches, learning rate, pullback."""

    n_steps: int
    eta: float
    pullback: float = 0.0

    def __post_init__(self):
        if self.n_steps < 1:
            raise ValueError("a phase needs at least one batch")
        if self.eta < 0 or not 0.0 <= self.pullback < 0.5:
            raise ValueError("need eta >= 0 and pullback in [0, 0.5)")


@dataclass(frozen=True)
class Schedule:
    phases: tuple[Phase, ...]
    n_train: int
    n_test: int
    m_rep: int

    def __post_init__(self):
        object.__setattr__(self, "phases", tuple(self.phases))
        if not self.phases:
            raise ValueError("schedule needs at least one phase")
        if min(self.n_train, self.n_test, self.m_rep) < 1:
            raise ValueError("sample counts and m_rep must be >= 1")

    @property
    def n_batches(self) -> int:
        return sum(p.n_steps for p in self.phases)


@dataclass(frozen=True)
class SupervisedOneVsAll:
    n_classes: int
    n_inputs: int


@dataclass(frozen=True)
class RecurrentFull:
    n_neurons: int
    n_inputs: int


@dataclass(frozen=True)
class MemoryRecurrent:
    n_neurons: int


@dataclass
class NetworkState:
    outputs: np.ndarray
    step_counter: int = 0


@dataclass(frozen=True)
class TrajectoryRecord:
    batch_index: int
    neuron_id: int
    atoms: PidAtoms
    goal: float


class _PerNeuronUniforms:
    """One independent generator per neuron.

    Sequential dynamics consume one uniform per neuron per step; those are
    drawn in blocks to keep the loop fast. ``matrix`` serves vectorized
    no-recurrence batches with one (count, n) draw per call."""

    def __init__(self, seed_seqs, block: int = 4096):
        self.generators = [np.random.default_rng(s) for s in seed_seqs]
        self._block = block
        self._buffer = None
        self._pos = 0

    def next_step(self) -> np.ndarray:
        if self._buffer is None or self._pos == self._block:
            self._buffer = np.column_stack([g.random(self._block) for g in self.generators])
            self._pos = 0
        row = self._buffer[self._pos]
        self._pos += 1
        return row

    def matrix(self, count: int) -> np.ndarray:
        return np.column_stack([g.random(count) for g in self.generators])


class Network:
    """A set of neurons wired by a topology, plus their shared dynamics."""

    def __init__(self, topology, neurons: list[Neuron], streams: _PerNeuronUniforms,
                 initial_outputs: np.ndarray):
        self.topology = topology
        self.neurons = neurons
        self._streams = streams
        self.state = NetworkState(outputs=np.asarray(initial_outputs, dtype=float))
        if self.state.outputs.shape != (len(neurons),):
            raise ValueError("initial state length must equal the neuron count")
        self._refresh_cache()

    # ---------------------------------------------------------------- build

    @classmethod
    def build(cls, topology, activation, spec_r: BinningSpec, spec_c: BinningSpec,
              goal: GoalParams, b_init: float, seed_seq: np.random.SeedSequence) -> "Network":
        """Create and initialize a network.

        ``seed_seq`` is split into one child for weight initialization, one
        for the initial ±1 state, and one per neuron for firing draws.
        """
        n, d_r, d_c = _dimensions(topology)
        children = seed_seq.spawn(2 + n)
        init_rng = np.random.default_rng(children[0])
        state_rng = np.random.default_rng(children[1])
        neurons = []
        stream_seeds = []
        for k in range(n):
            stream_ss, own_ss = children[2 + k].spawn(2)
            stream_seeds.append(stream_ss)
            neuron = Neuron(
                w_r=np.zeros(d_r), b_r=0.0, w_c=np.zeros(d_c), b_c=0.0,
                activation=activation, spec_r=spec_r, spec_c=spec_c, goal=goal,
                rng=np.random.default_rng(own_ss),
            )
            neuron.init_weights(b_init, init_rng)
            neurons.append(neuron)
        streams = _PerNeuronUniforms(stream_seeds)
        initial = state_rng.choice(np.array([-1.0, 1.0]), size=n)
        return cls(topology, neurons, streams, initial)

    # ------------------------------------------------------------- plumbing

    @property
    def n_neurons(self) -> int:
        return len(self.neurons)

    def _refresh_cache(self):
        """Stack per-neuron weights for vectorized dynamics. Must be called
        after any weight update (run_batch does)."""
        n = self.n_neurons
        self._W_r = np.stack([nr.w_r for nr in self.neurons])
        self._b_r = np.array([nr.b_r for nr in self.neurons])
        self._b_c = np.array([nr.b_c for nr in self.neurons])
        self.activation = self.neurons[0].activation
        if isinstance(self.topology, SupervisedOneVsAll):
            self._w_c_scalar = np.array([float(nr.w_c[0]) for nr in self.neurons])
        else:
            # Row k holds neuron k's contextual weights spread over the other
            # neurons' columns; the zero diagonal enforces "no self-connections".
            full = np.zeros((n, n))
            for k, nr in enumerate(self.neurons):
                full[k, _others(n, k)] = nr.w_c
            self._W_c_full = full

    def _receptive_drive(self, stimulus) -> np.ndarray:
        """R vector for a single stimulus presentation."""
        if isinstance(self.topology, MemoryRecurrent):
            if stimulus is None:
                return -self._b_r
            return self._W_r[:, 0] * stimulus - self._b_r
        return self._W_r @ stimulus - self._b_r

    # ------------------------------------------------------------- dynamics

    def step(self, stimulus, mode: str = "train") -> np.ndarray:
        """Advance one synchronous time step and return the new outputs.

        Supervised stimuli are (image, onehot) pairs; pass onehot=None or
        mode="test" for a zero contextual input. Recurrent topologies take
        the bare stimulus (or None for a free-running memory step).
        """
        if isinstance(self.topology, SupervisedOneVsAll):
            image, onehot = stimulus
            r = self._W_r @ np.asarray(image, dtype=float) - self._b_r
            if mode == "test" or onehot is None:
                c = -self._b_c
            else:
                c = self._w_c_scalar * np.asarray(onehot, dtype=float) - self._b_c
        else:
            r = self._receptive_drive(stimulus)
            c = self._W_c_full @ self.state.outputs - self._b_c
        theta = sigmoid(self.activation.value(r, c))
        y = np.where(self._streams.next_step() < theta, 1.0, -1.0)
        self.state.outputs = y
        self.state.step_counter += 1
        return y

    def _run_recurrent_steps(self, stimuli: np.ndarray, m_rep: int):
        """Sequential presentation of each stimulus for m_rep steps.

        Returns (per-step receptive drive inputs, per-step previous outputs),
        both with one row per time step."""
        n = self.n_neurons
        total = stimuli.shape[0] * m_rep
        prev_hist = np.empty((total, n))
        x_r_hist = np.repeat(stimuli, m_rep, axis=0)
        out = self.state.outputs
        act = self.activation
        w_c = self._W_c_full
        b_c = self._b_c
        t = 0
        for s in range(stimuli.shape[0]):
            r = self._receptive_drive(stimuli[s])
            for _ in range(m_rep):
                prev_hist[t] = out
                c = w_c @ out - b_c
                theta = sigmoid(act.value(r, c))
                out = np.where(self._streams.next_step() < theta, 1.0, -1.0)
                t += 1
        self.state.outputs = out
        self.state.step_counter += total
        return x_r_hist, prev_hist

    # ------------------------------------------------------------- training

    def run_batch(self, data_source, schedule: Schedule, phase: Phase,
                  rng: np.random.Generator) -> list[GradientPair]:
        """One mini-batch: present, accumulate, update every neuron."""
        n = self.n_neurons
        if isinstance(self.topology, SupervisedOneVsAll):
            images, onehots = data_source.sample_train(rng, schedule.n_train)
            if schedule.m_rep > 1:
                images = np.repeat(images, schedule.m_rep, axis=0)
                onehots = np.repeat(onehots, schedule.m_rep, axis=0)
            # No recurrence: the whole batch fires in one vectorized sweep.
            r = images @ self._W_r.T - self._b_r
            c = onehots * self._w_c_scalar - self._b_c
            theta = sigmoid(self.activation.value(r, c))
            u = self._streams.matrix(images.shape[0])
            y = np.where(u < theta, 1.0, -1.0)
            self.state.outputs = y[-1]
            self.state.step_counter += images.shape[0]
            batches = [(images, onehots[:, k:k + 1]) for k in range(n)]
        else:
            stimuli = data_source.sample_train(rng, schedule.n_train)
            x_r_hist, prev_hist = self._run_recurrent_steps(stimuli, schedule.m_rep)
            if isinstance(self.topology, MemoryRecurrent):
                batches = [(x_r_hist[:, k:k + 1], prev_hist[:, _others(n, k)]) for k in range(n)]
            else:
                batches = [(x_r_hist, prev_hist[:, _others(n, k)]) for k in range(n)]

        grads = [neuron.compute_gradients(batch) for neuron, batch in zip(self.neurons, batches)]
        for neuron, g in zip(self.neurons, grads):
            neuron.apply_update(g, phase.eta, phase.pullback)
        self._refresh_cache()
        return grads

    def train(self, schedule: Schedule, data_source, rng: np.random.Generator,
              eval_rng: np.random.Generator, trajectory_sink=None) -> list[TrajectoryRecord]:
        """Run all phases; after every batch, log each neuron's goal components
        measured on a fresh test batch (training-mode inputs)."""
        records: list[TrajectoryRecord] = []
        batch_index = 0
        for phase in schedule.phases:
            for _ in range(phase.n_steps):
                self.run_batch(data_source, schedule, phase, rng)
                for k, (atoms, goal) in enumerate(
                        self.evaluate_atoms(data_source, schedule.n_test, schedule.m_rep, eval_rng)):
                    rec = TrajectoryRecord(batch_index, k, atoms, goal)
                    if trajectory_sink is None:
                        records.append(rec)
                    else:
                        trajectory_sink(rec)
                batch_index += 1
        return records

    # ----------------------------------------------------------- evaluation

    def _atoms_from_observations(self, r_obs: np.ndarray, c_obs: np.ndarray):
        """Per-neuron goal components from integrated-input observations."""
        out = []
        for k, neuron in enumerate(self.neurons):
            ir = neuron.spec_r.bin_values(r_obs[:, k])
            ic = neuron.spec_c.bin_values(c_obs[:, k])

            def theta_fn(rcen, ccen, _n=neuron):
                return sigmoid(_n.activation.value(rcen, ccen))

            model, _ = _build_joint_from_indices(ir, ic, theta_fn, neuron.spec_r, neuron.spec_c)
            atoms = pid_decompose(model)
            out.append((atoms, goal_value(atoms, neuron.goal)))
        return out

    def evaluate_atoms(self, data_source, n_test: int, m_rep: int,
                       rng: np.random.Generator):
        """Measure each neuron's goal components on a fresh evaluation batch.

        Supervised evaluation keeps the labels on the context (information
        about the label is only defined when the label is present). Recurrent
        topologies run n_test independent m_rep-step rollouts from random
        states; all rollout steps enter the histogram, mirroring training."""
        if isinstance(self.topology, SupervisedOneVsAll):
            images, onehots = data_source.sample_eval(rng, n_test)
            r = images @ self._W_r.T - self._b_r
            c = onehots * self._w_c_scalar - self._b_c
            return self._atoms_from_observations(r, c)
        stimuli = data_source.sample_eval(rng, n_test)
        r_hist, c_hist, _ = self._parallel_rollout(stimuli, m_rep, rng, collect=True)
        return self._atoms_from_observations(r_hist, c_hist)

    def _parallel_rollout(self, stimuli: np.ndarray, m_rep: int,
                          rng: np.random.Generator, collect: bool = False):
        """Present each stimulus row in its own independent chain for m_rep
        steps, starting from random states. Returns per-step (r, c) histories
        (if collected) and the final outputs, all vectorized across chains."""
        n = self.n_neurons
        chains = stimuli.shape[0]
        if isinstance(self.topology, MemoryRecurrent):
            r = stimuli * self._W_r[:, 0] - self._b_r
        else:
            r = stimuli @ self._W_r.T - self._b_r
        out = rng.choice(np.array([-1.0, 1.0]), size=(chains, n))
        r_hist = np.empty((chains * m_rep, n)) if collect else None
        c_hist = np.empty((chains * m_rep, n)) if collect else None
        for rep in range(m_rep):
            c = out @ self._W_c_full.T - self._b_c
            if collect:
                r_hist[rep * chains:(rep + 1) * chains] = r
                c_hist[rep * chains:(rep + 1) * chains] = c
            theta = sigmoid(self.activation.value(r, c))
            out = np.where(rng.random((chains, n)) < theta, 1.0, -1.0)
        return r_hist, c_hist, out

    def rollout_outputs(self, stimuli: np.ndarray, settle_steps: int,
                        rng: np.random.Generator) -> np.ndarray:
        """Final output word per stimulus after settle_steps presentation steps."""
        _, _, out = self._parallel_rollout(stimuli, settle_steps, rng, collect=False)
        return out

    def test_thetas(self, images: np.ndarray) -> np.ndarray:
        """Supervised test-mode firing probabilities (context input 0)."""
        if not isinstance(self.topology, SupervisedOneVsAll):
            raise TypeError("test_thetas is a supervised-topology readout")
        r = images @ self._W_r.T - self._b_r
        c = -self._b_c
        return sigmoid(self.activation.value(r, c[None, :]))

    # --------------------------------------------------------------- recall

    def recall(self, cue_pattern: np.ndarray, noise_beta: float, n_steps: int = 20,
               rng: np.random.Generator | None = None) -> np.ndarray:
        """Cue with a corrupted pattern for one step, then run free.

        A fraction ``noise_beta`` of elements is resampled uniformly from ±1.
        Returns the (n_steps, n) sequence of output states; dynamics start
        from a fresh random state and do not disturb the training state."""
        states = self.recall_batch(cue_pattern[None, :], noise_beta, n_steps, rng)
        return states[0]

    def recall_batch(self, cues: np.ndarray, noise_beta: float, n_steps: int = 20,
                     rng: np.random.Generator | None = None) -> np.ndarray:
        if not isinstance(self.topology, MemoryRecurrent):
            raise TypeError("recall requires the memory topology")
        if not 0.0 <= noise_beta <= 1.0 or n_steps < 1:
            raise ValueError("need 0 <= noise_beta <= 1 and n_steps >= 1")
        gen = rng if rng is not None else np.random.default_rng()
        cues = np.asarray(cues, dtype=float)
        b, n = cues.shape
        corrupted = corrupt_patterns(cues, noise_beta, gen)

        out = gen.choice(np.array([-1.0, 1.0]), size=(b, n))
        states = np.empty((b, n_steps, n))
        for t in range(n_steps):
            r = corrupted * self._W_r[:, 0] - self._b_r if t == 0 else np.broadcast_to(-self._b_r, (b, n))
            c = out @ self._W_c_full.T - self._b_c
            theta = sigmoid(self.activation.value(r, c))
            out = np.where(gen.random((b, n)) < theta, 1.0, -1.0)
            states[:, t, :] = out
        return states

    def contextual_matrix(self) -> np.ndarray:
        """Recurrent weights as a full (n, n) matrix with a zero diagonal."""
        if isinstance(self.topology, SupervisedOneVsAll):
            raise TypeError("supervised topology has no recurrent matrix")
        return self._W_c_full.copy()

    # ------------------------------------------------------- gauge polarity

    def normalize_polarity(self):
        """Pin each neuron's output-sign convention after training.

        The goal of a neuron is exactly invariant under negating all of its
        parameters (w_r, b_r, w_c, b_c): that relabels Y -> -Y and leaves all
        information quantities unchanged, so the sign in which a neuron codes
        its target is an arbitrary coin flip decided by the initialization.
        Readouts that compare outputs against labels or patterns (WTA, recall
        cosine) need one fixed convention, so after training we flip neurons
        that settled on the inverted code:

        * supervised: flip when the label synapse w_c is negative (the
          detector code has firing increase with its own label);
        * memory: flip when the receptive weight is negative (firing should
          follow the pattern element), and negate the other neurons' weights
          *from* the flipped neuron so their contextual inputs keep the same
          meaning (Y_k is relabeled everywhere consistently).

        The unsupervised readouts are polarity-blind, so that topology is
        left untouched. Flipping never changes any neuron's goal value or the
        network's dynamics up to the Y relabeling; it only fixes the gauge."""
        if isinstance(self.topology, SupervisedOneVsAll):
            for neuron in self.neurons:
                if neuron.w_c[0] < 0:
                    _flip_neuron(neuron)
            self._refresh_cache()
        elif isinstance(self.topology, MemoryRecurrent):
            n = self.n_neurons
            flipped = [k for k, neuron in enumerate(self.neurons) if neuron.w_r[0] < 0]
            for k in flipped:
                _flip_neuron(self.neurons[k])
            flip_sign = np.ones(n)
            flip_sign[flipped] = -1.0
            for j, neuron in enumerate(self.neurons):
                neuron.w_c = neuron.w_c * flip_sign[_others(n, j)]
            self._refresh_cache()


def _others(n: int, k: int) -> np.ndarray:
    idx = np.arange(n - 1)
    return np.where(idx >= k, idx + 1, idx)


def _flip_neuron(neuron: Neuron):
    neuron.w_r = -neuron.w_r
    neuron.b_r = -neuron.b_r
    neuron.w_c = -neuron.w_c
    neuron.b_c = -neuron.b_c


def _dimensions(topology) -> tuple[int, int, int]:
    if isinstance(topology, SupervisedOneVsAll):
        return topology.n_classes, topology.n_inputs, 1
    if isinstance(topology, RecurrentFull):
        return topology.n_neurons, topology.n_inputs, topology.n_neurons - 1
    if isinstance(topology, MemoryRecurrent):
        return topology.n_neurons, 1, topology.n_neurons - 1
    raise TypeError(f"unknown topology {topology!r}")
