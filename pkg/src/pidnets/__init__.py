"""Networks of stochastic binary neurons trained by local information goals.

Each neuron separates its afferents into a receptive and a contextual class,
fires Y = ±1 with probability σ(A(r, c)) of the two integrated inputs, and
performs gradient ascent on a weighted sum of the five components of its
output entropy: unique (receptive / contextual), redundant and synergistic
information plus residual entropy. The decomposition is estimated from a
binned joint histogram of the integrated inputs, with redundancy measured
through the union event of the two source realizations, which keeps the goal
differentiable in the firing table.

Subpackages: ``pid`` (decomposition and goal gradients), ``neuron`` and
``network`` (units, topologies, dynamics, training), ``datasets`` /
``baselines`` / ``metrics`` (tasks and evaluation), ``config`` / ``runner`` /
``cli`` (experiment orchestration).
"""

from .activations import ModulatedContext, SaturatingSum, activation_partials, sigmoid
from .binning import BinningSpec, bin_center, bin_value
from .config import BinningConfig, ExperimentConfig, PhaseConfig, preset, preset_names, validate
from .datasets import (
    BarsDataset,
    BarsSample,
    MemoryPatternSet,
    MnistDataset,
    corrupt_patterns,
    generate_bars,
    generate_patterns,
    load_mnist,
)
from .baselines import HopfieldNet, LogRegModel, hopfield_recall, hopfield_train, train_logreg
from .metrics import (
    capacity,
    cosine_similarity,
    hebbian_similarity,
    layer_mutual_information,
    weight_symmetry,
    wta_accuracy,
)
from .network import (
    MemoryRecurrent,
    Network,
    NetworkState,
    Phase,
    RecurrentFull,
    Schedule,
    SupervisedOneVsAll,
    TrajectoryRecord,
)
from .neuron import GradientPair, Neuron
from .pid import (
    BinnedJointModel,
    GoalParams,
    PidAtoms,
    dg_dtheta,
    estimate_joint,
    goal_value,
    goal_value_gamma,
    i_sx_redundancy,
    inverse_reparameterize,
    marginal_theta,
    pid_decompose,
    reparameterize,
    union_probabilities,
)
from .runner import ExperimentResult, RunResult, run_config, run_experiment, write_outputs

__version__ = "0.1.0"
