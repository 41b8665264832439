"""MLP variational autoencoder over binary mutation profiles.

Encoder: Dense -> BatchNorm -> LeakyReLU -> Dropout -> Dense -> BatchNorm
-> LeakyReLU, then two linear heads for mu and log-variance. Decoder
mirrors it back up with ReLU activations and a sigmoid output layer.
Training is plain minibatch RMSprop on
    recon + beta * KL + L1
with beta following the configured schedule. The whole run is a pure
function of (cohort, split, config.seed).
"""

from dataclasses import dataclass, field, replace

import numpy as np

from .layers import (
    INFERENCE,
    TRAIN,
    Activation,
    BatchNorm,
    Dense,
    Dropout,
    init_stack_params,
    stack_backward,
    stack_forward,
    stack_l1_penalty,
)
from .gradcheck import FD_DTYPE, _cast_stack, compare_grads, finite_difference_grads
from .losses import (
    BetaSchedule,
    beta_at_epoch,
    kl_divergence,
    kl_grads,
    reconstruction_grad,
    reconstruction_loss,
    total_loss,
)
from .metrics import mean_cosine_similarity, micro_f1
from .optim import init_rmsprop, rmsprop_update
from .seeding import sub_rng


@dataclass
class VaeConfig:
    input_dim: int
    hidden_dims: tuple = (1024, 256)
    latent_dim: int = 64
    dropout_rate: float = 0.2
    l1_coefficient: float = 1e-5
    leaky_slope: float = 0.3
    loss_kind: str = "soft_f1"  # bce | soft_f1
    beta_schedule: BetaSchedule = field(default_factory=BetaSchedule)
    learning_rate: float = 1e-3
    rho: float = 0.9
    epsilon: float = 1e-8
    batch_size: int = 128
    epochs: int = 100
    seed: int = 0

    def validate(self):
        if int(self.input_dim) < 1:
            raise ValueError("input_dim must be >= 1")
        dims = tuple(int(h) for h in self.hidden_dims)
        if len(dims) != 2 or any(h < 1 for h in dims):
            raise ValueError("hidden_dims must be two dimensions >= 1")
        if int(self.latent_dim) < 1:
            raise ValueError("latent_dim must be >= 1")
        if not 0.0 <= float(self.dropout_rate) < 1.0:
            raise ValueError("dropout_rate must be in [0, 1)")
        if float(self.l1_coefficient) < 0.0:
            raise ValueError("l1_coefficient must be nonnegative")
        if self.loss_kind not in ("bce", "soft_f1"):
            raise ValueError("loss_kind must be bce or soft_f1")
        self.beta_schedule.validate()
        if float(self.learning_rate) <= 0.0:
            raise ValueError("learning_rate must be positive")
        if not 0.0 < float(self.rho) < 1.0:
            raise ValueError("rho must be in (0, 1)")
        if float(self.epsilon) <= 0.0:
            raise ValueError("epsilon must be positive")
        if int(self.batch_size) < 1:
            raise ValueError("batch_size must be >= 1")
        if int(self.epochs) < 1:
            raise ValueError("epochs must be >= 1")


@dataclass
class LatentDistribution:
    mu: np.ndarray
    logvar: np.ndarray


@dataclass
class EpochStats:
    epoch: int
    recon: float
    kl: float
    l1: float
    beta: float
    total: float
    val_micro_f1: float
    val_cosine: float


@dataclass
class VaeModel:
    config: VaeConfig
    enc_specs: list
    enc_params: list
    mu_specs: list
    mu_params: list
    lv_specs: list
    lv_params: list
    dec_specs: list
    dec_params: list

    def param_stacks(self):
        """(section name, specs, params) triples in canonical order."""
        return [
            ("enc", self.enc_specs, self.enc_params),
            ("mu", self.mu_specs, self.mu_params),
            ("lv", self.lv_specs, self.lv_params),
            ("dec", self.dec_specs, self.dec_params),
        ]

    def flat_params(self):
        """One flat list of parameter dicts (canonical order, shared refs)."""
        out = []
        for _, _, params in self.param_stacks():
            out.extend(params)
        return out

    def named_tensors(self):
        """(name, array) pairs for every parameter and buffer."""
        for section, _, params in self.param_stacks():
            for i, p in enumerate(params):
                for key in sorted(p):
                    yield f"{section}/{i}/{key}", p[key]

    def l1_penalty(self):
        return sum(
            stack_l1_penalty(specs, params)
            for _, specs, params in self.param_stacks()
        )


def _architecture(config):
    h1, h2 = (int(h) for h in config.hidden_dims)
    d, q = int(config.input_dim), int(config.latent_dim)
    l1 = float(config.l1_coefficient)
    enc = [
        Dense(d, h1, l1),
        BatchNorm(h1),
        Activation("leaky_relu", slope=float(config.leaky_slope)),
        Dropout(float(config.dropout_rate)),
        Dense(h1, h2, l1),
        BatchNorm(h2),
        Activation("leaky_relu", slope=float(config.leaky_slope)),
    ]
    mu = [Dense(h2, q, l1)]
    lv = [Dense(h2, q, l1)]
    dec = [
        Dense(q, h2, l1),
        BatchNorm(h2),
        Activation("relu"),
        Dropout(float(config.dropout_rate)),
        Dense(h2, h1, l1),
        BatchNorm(h1),
        Activation("relu"),
        Dense(h1, d, l1),
        Activation("sigmoid"),
    ]
    return enc, mu, lv, dec


def build_vae(config, rng):
    """Initialize a model: Glorot-uniform weights, zero biases, unit
    batch-norm scale. Draw order is encoder, mu head, logvar head,
    decoder."""
    config.validate()
    enc, mu, lv, dec = _architecture(config)
    return VaeModel(
        config,
        enc, init_stack_params(enc, rng),
        mu, init_stack_params(mu, rng),
        lv, init_stack_params(lv, rng),
        dec, init_stack_params(dec, rng),
    )


def count_parameters(model):
    """Trainable scalars (weights, biases, batch-norm scale/shift)."""
    total = 0
    for _, _, params in model.param_stacks():
        for p in params:
            for key, arr in p.items():
                if key not in ("run_mean", "run_var"):
                    total += arr.size
    return total


def _check_binary(x):
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2:
        raise ValueError("expected a 2-D batch")
    if x.size and not np.isin(x, (0.0, 1.0)).all():
        raise ValueError("encoder input entries must be 0 or 1")
    return x


def encode_batch(model, x, mode=INFERENCE, rng=None):
    """Run the encoder and both heads; returns the latent Gaussian."""
    x = _check_binary(x)
    if x.shape[1] != model.config.input_dim:
        raise ValueError(
            f"input has {x.shape[1]} columns, model expects {model.config.input_dim}"
        )
    h, _ = stack_forward(model.enc_specs, model.enc_params, x, mode, rng=rng)
    mu, _ = stack_forward(model.mu_specs, model.mu_params, h, mode)
    lv, _ = stack_forward(model.lv_specs, model.lv_params, h, mode)
    return LatentDistribution(mu, lv)


def reparameterize(dist, rng):
    """z = mu + exp(logvar / 2) * eps with eps ~ N(0, 1) from rng."""
    eps = rng.standard_normal(dist.mu.shape)
    return dist.mu + np.exp(0.5 * dist.logvar) * eps


def decode_batch(model, z, mode=INFERENCE, rng=None):
    """Decode latent points to per-locus probabilities in (0, 1)."""
    z = np.asarray(z, dtype=np.float64)
    if z.ndim != 2 or z.shape[1] != model.config.latent_dim:
        raise ValueError(f"latent batch must have {model.config.latent_dim} columns")
    probs, _ = stack_forward(model.dec_specs, model.dec_params, z, mode, rng=rng)
    # sigmoid can round to exactly 0 or 1 at extreme logits; keep the
    # documented open interval
    return np.clip(probs, np.nextafter(0.0, 1.0), np.nextafter(1.0, 0.0))


def reconstruct_mu(model, x):
    """Deterministic reconstruction through mu (inference mode)."""
    dist = encode_batch(model, x, INFERENCE)
    return decode_batch(model, dist.mu, INFERENCE)


def _forward_train(model, x, beta, rngs, masks=None, eps=None, update_running=True):
    """One training-mode pass; returns loss breakdown plus everything the
    backward pass needs. masks/eps, when given, freeze the stochastic path."""
    enc_masks = masks[0] if masks is not None else None
    dec_masks = masks[1] if masks is not None else None
    h, enc_tape = stack_forward(
        model.enc_specs, model.enc_params, x, TRAIN,
        rng=None if enc_masks is not None else rngs.get("dropout"),
        masks=enc_masks, update_running=update_running,
    )
    mu, mu_tape = stack_forward(model.mu_specs, model.mu_params, h, TRAIN)
    lv, lv_tape = stack_forward(model.lv_specs, model.lv_params, h, TRAIN)
    if eps is None:
        eps = rngs["reparam"].standard_normal(mu.shape)
    z = mu + np.exp(0.5 * lv) * eps
    probs, dec_tape = stack_forward(
        model.dec_specs, model.dec_params, z, TRAIN,
        rng=None if dec_masks is not None else rngs.get("dropout"),
        masks=dec_masks, update_running=update_running,
    )
    recon = reconstruction_loss(model.config.loss_kind, probs, x)
    kl = kl_divergence(mu, lv)
    breakdown = total_loss(recon, kl, model.l1_penalty(), beta)
    return {
        "breakdown": breakdown,
        "probs": probs,
        "mu": mu,
        "lv": lv,
        "eps": eps,
        "tapes": (enc_tape, mu_tape, lv_tape, dec_tape),
    }


def _backward_train(model, x, beta, fwd):
    """Gradients of the total loss for every parameter dict, in the
    canonical flat order matching model.flat_params()."""
    enc_tape, mu_tape, lv_tape, dec_tape = fwd["tapes"]
    mu, lv, eps = fwd["mu"], fwd["lv"], fwd["eps"]
    dprobs = reconstruction_grad(model.config.loss_kind, fwd["probs"], x)
    dz, dec_grads = stack_backward(model.dec_specs, model.dec_params, dec_tape, dprobs)
    dmu_kl, dlv_kl = kl_grads(mu, lv)
    dmu = dz + beta * dmu_kl
    dlv = dz * eps * 0.5 * np.exp(0.5 * lv) + beta * dlv_kl
    dh_mu, mu_grads = stack_backward(model.mu_specs, model.mu_params, mu_tape, dmu)
    dh_lv, lv_grads = stack_backward(model.lv_specs, model.lv_params, lv_tape, dlv)
    _, enc_grads = stack_backward(
        model.enc_specs, model.enc_params, enc_tape, dh_mu + dh_lv
    )
    return enc_grads + mu_grads + lv_grads + dec_grads


def train(cohort, split, config):
    """Train on the split's training rows; returns (model, history).

    Per epoch: seeded shuffle, minibatches (last partial batch kept),
    forward in train mode, RMSprop step, then validation micro-F1 and
    mean cosine similarity on deterministic mu reconstructions. History
    loss components are per-sample means over the epoch's batches.
    """
    config.validate()
    if cohort.n_loci != config.input_dim:
        raise ValueError(
            f"cohort has {cohort.n_loci} loci, config.input_dim is {config.input_dim}"
        )
    train_idx = np.asarray(split.train_indices, dtype=int)
    val_idx = np.asarray(split.val_indices, dtype=int)
    if train_idx.size == 0:
        raise ValueError("empty training split")
    x_all = cohort.matrix.astype(np.float64)
    x_train = x_all[train_idx]
    x_val = x_all[val_idx] if val_idx.size else None

    rngs = {
        "dropout": sub_rng(config.seed, "dropout"),
        "reparam": sub_rng(config.seed, "reparam"),
    }
    model = build_vae(config, sub_rng(config.seed, "init"))
    params = model.flat_params()
    state = init_rmsprop(params)
    shuffle_rng = sub_rng(config.seed, "shuffle")

    history = []
    bs = int(config.batch_size)
    for epoch in range(int(config.epochs)):
        beta = beta_at_epoch(config.beta_schedule, epoch)
        perm = shuffle_rng.permutation(train_idx.size)
        sums = {"recon": 0.0, "kl": 0.0, "l1": 0.0, "total": 0.0}
        seen = 0
        for start in range(0, train_idx.size, bs):
            rows = perm[start : start + bs]
            xb = x_train[rows]
            try:
                fwd = _forward_train(model, xb, beta, rngs)
            except FloatingPointError as exc:
                raise FloatingPointError(
                    f"epoch {epoch} batch {start // bs}: {exc}"
                ) from None
            breakdown = fwd["breakdown"]
            if not np.isfinite(breakdown.total):
                raise FloatingPointError(
                    f"epoch {epoch} batch {start // bs}: non-finite loss"
                )
            grads = _backward_train(model, xb, beta, fwd)
            rmsprop_update(
                params, grads, state,
                lr=config.learning_rate, rho=config.rho, eps=config.epsilon,
            )
            for key in sums:
                sums[key] += getattr(breakdown, key) * len(rows)
            seen += len(rows)
        if x_val is not None:
            probs = reconstruct_mu(model, x_val)
            val_f1 = micro_f1((probs >= 0.5).astype(np.uint8), x_val.astype(np.uint8))
            val_cos = mean_cosine_similarity(probs, x_val)
        else:
            val_f1 = float("nan")
            val_cos = float("nan")
        history.append(
            EpochStats(
                epoch,
                sums["recon"] / seen,
                sums["kl"] / seen,
                sums["l1"] / seen,
                beta,
                sums["total"] / seen,
                val_f1,
                val_cos,
            )
        )
    return model, history


def vae_grad_check(config, beta, batch_size=4, tolerance=1e-5, fd_step=1e-5):
    """Full-model finite-difference check of the training gradients.

    Builds a model from config, draws one binary batch, freezes the
    dropout masks and reparameterization noise, then compares the
    analytic gradients of recon + beta * KL + L1 against central
    differences for every parameter.
    """
    config.validate()
    rng = sub_rng(config.seed, "gradcheck")
    model = build_vae(config, rng)
    x = (rng.random((batch_size, config.input_dim)) < 0.3).astype(np.float64)

    rngs = {"dropout": rng, "reparam": rng}
    fwd = _forward_train(model, x, beta, rngs)
    enc_tape, _, _, dec_tape = fwd["tapes"]
    masks = (enc_tape.masks, dec_tape.masks)
    eps = fwd["eps"]
    analytic = _backward_train(model, x, beta, fwd)

    flat = model.flat_params()
    x_fd = x.astype(FD_DTYPE)

    def objective(_params):
        # _params aliases flat, whose arrays the finite-difference loop
        # perturbs in place; each evaluation re-clones them at extended
        # precision so the replay sees the perturbed values
        wide = replace(
            model,
            enc_params=_cast_stack(model.enc_params, FD_DTYPE),
            mu_params=_cast_stack(model.mu_params, FD_DTYPE),
            lv_params=_cast_stack(model.lv_params, FD_DTYPE),
            dec_params=_cast_stack(model.dec_params, FD_DTYPE),
        )
        out = _forward_train(
            wide, x_fd, beta, rngs={}, masks=masks, eps=eps, update_running=False
        )
        return out["breakdown"].total

    numeric = finite_difference_grads(objective, flat, fd_step)
    return compare_grads(analytic, numeric, tolerance)
