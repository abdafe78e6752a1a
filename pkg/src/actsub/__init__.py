"""actsub: online activation-subspace tracking for memory-efficient training.

Core pieces: an Oja-style streaming tracker for the activation subspace
(plus periodic-PCA and fixed baselines), linear layers that cache rank-r
projected activations instead of full ones, a projection-aware low-rank
Adam whose moments are transported across subspace changes, a drift
metric, and an analytic memory ledger. The experiment harness lives in
``actsub.harness`` and is exposed through the ``actsub`` CLI.
"""

__version__ = "0.1.0"

from .backend import backend_name
from .numerics import (
    EigenPair,
    fro_norm,
    make_rng,
    matmul,
    qr_orthonormalize,
    spectral_norm_estimate,
    sym_eig_topr,
)
from .optim import (
    AdamHyper,
    FullAdamState,
    LowRankAdamState,
    apply_update,
    full_adam_step,
    lowrank_adam_step,
)
from .subspace import (
    FixedTracker,
    OjaConfig,
    OjaTracker,
    PeriodicPcaTracker,
    SubspaceBasis,
    TrackerKind,
    TransitionMatrix,
    covariance,
    drift,
    fixed_step,
    init_basis,
    oja_step,
    periodic_pca_step,
    principal_angles,
    tracker_step,
)

__all__ = [
    "AdamHyper",
    "EigenPair",
    "FixedTracker",
    "FullAdamState",
    "LowRankAdamState",
    "OjaConfig",
    "OjaTracker",
    "PeriodicPcaTracker",
    "SubspaceBasis",
    "TrackerKind",
    "TransitionMatrix",
    "__version__",
    "apply_update",
    "backend_name",
    "covariance",
    "drift",
    "fixed_step",
    "fro_norm",
    "full_adam_step",
    "init_basis",
    "lowrank_adam_step",
    "make_rng",
    "matmul",
    "oja_step",
    "periodic_pca_step",
    "principal_angles",
    "qr_orthonormalize",
    "spectral_norm_estimate",
    "sym_eig_topr",
    "tracker_step",
]
