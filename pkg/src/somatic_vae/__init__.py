"""Compress sparse binary somatic-mutation profiles with a small VAE.

The package is organized as:

- :mod:`somatic_vae.cohort` - TSV ingestion, filtering, splits, synthesis
- :mod:`somatic_vae.layers` - dense / batch-norm / activation / dropout stacks
- :mod:`somatic_vae.losses` - reconstruction losses, KL term, beta schedule
- :mod:`somatic_vae.optim` - RMSprop
- :mod:`somatic_vae.vae` - model assembly, training loop, encoding
- :mod:`somatic_vae.gradcheck` - finite-difference gradient verification
- :mod:`somatic_vae.checkpoint` - binary checkpoint format
- :mod:`somatic_vae.baselines` - PCA and k-means
- :mod:`somatic_vae.metrics` - micro-F1, cosine, NMI, logistic probe
- :mod:`somatic_vae.cli` - command-line pipeline
"""

from .baselines import (
    KmeansResult,
    PcaModel,
    kmeans_cluster,
    pca_fit,
    pca_project,
)
from .cohort import (
    Cohort,
    SplitPlan,
    SyntheticSpec,
    filter_low_frequency,
    generate_synthetic_cohort,
    holdout_split,
    ingest_profiles,
    kfold_split,
    load_cohort,
    read_labels,
    save_cohort,
    write_label_tsv,
    write_profile_tsv,
)
from .checkpoint import CheckpointError, load_checkpoint, save_checkpoint
from .gradcheck import GradReport, compare_grads, finite_difference_grads, grad_check
from .losses import (
    BetaSchedule,
    VaeLossBreakdown,
    beta_at_epoch,
    kl_divergence,
    kl_grads,
    reconstruction_grad,
    reconstruction_loss,
    total_loss,
)
from .metrics import (
    ClassificationReport,
    ProbeModel,
    classification_report,
    eval_probe,
    fit_probe,
    mean_cosine_similarity,
    micro_f1,
    nmi,
    probe_objective,
)
from .optim import RmspropState, init_rmsprop, rmsprop_update
from .seeding import indexed_rng, sub_rng
from .vae import (
    EpochStats,
    LatentDistribution,
    VaeConfig,
    VaeModel,
    build_vae,
    count_parameters,
    decode_batch,
    encode_batch,
    reconstruct_mu,
    reparameterize,
    train,
    vae_grad_check,
)

__version__ = "0.1.0"

__all__ = [
    "BetaSchedule",
    "CheckpointError",
    "ClassificationReport",
    "Cohort",
    "EpochStats",
    "GradReport",
    "KmeansResult",
    "LatentDistribution",
    "PcaModel",
    "ProbeModel",
    "RmspropState",
    "SplitPlan",
    "SyntheticSpec",
    "VaeConfig",
    "VaeLossBreakdown",
    "VaeModel",
    "beta_at_epoch",
    "build_vae",
    "classification_report",
    "compare_grads",
    "count_parameters",
    "decode_batch",
    "encode_batch",
    "eval_probe",
    "filter_low_frequency",
    "finite_difference_grads",
    "fit_probe",
    "generate_synthetic_cohort",
    "grad_check",
    "holdout_split",
    "indexed_rng",
    "ingest_profiles",
    "init_rmsprop",
    "kfold_split",
    "kl_divergence",
    "kl_grads",
    "kmeans_cluster",
    "load_checkpoint",
    "load_cohort",
    "mean_cosine_similarity",
    "micro_f1",
    "nmi",
    "pca_fit",
    "pca_project",
    "probe_objective",
    "read_labels",
    "reconstruct_mu",
    "reconstruction_grad",
    "reconstruction_loss",
    "reparameterize",
    "rmsprop_update",
    "save_checkpoint",
    "save_cohort",
    "sub_rng",
    "total_loss",
    "train",
    "vae_grad_check",
    "write_label_tsv",
    "write_profile_tsv",
]
