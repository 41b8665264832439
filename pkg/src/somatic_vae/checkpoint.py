"""Binary checkpoint format.

Layout: 8-byte magic ``FLATVAE\\0``, version u32, then a length-prefixed
canonical (key-sorted, compact) JSON block holding the config, the epoch
reached, and optimizer metadata, then a tensor count and the named
tensors themselves (u32 name length, UTF-8 name, u32 ndim, u64 dims,
float64 little-endian data), and finally a CRC32 trailer computed over
everything between the magic and the trailer. Tensors round-trip
bit-exactly.
"""

import json
import struct
import zlib

import numpy as np

from .layers import init_layer_params
from .losses import BetaSchedule
from .optim import RmspropState
from .vae import VaeConfig, VaeModel, _architecture

MAGIC = b"FLATVAE\x00"
VERSION = 1


class CheckpointError(ValueError):
    pass


def _config_to_dict(config):
    return {
        "input_dim": int(config.input_dim),
        "hidden_dims": [int(h) for h in config.hidden_dims],
        "latent_dim": int(config.latent_dim),
        "dropout_rate": float(config.dropout_rate),
        "l1_coefficient": float(config.l1_coefficient),
        "leaky_slope": float(config.leaky_slope),
        "loss_kind": config.loss_kind,
        "beta_schedule": {
            "kind": config.beta_schedule.kind,
            "beta_max": float(config.beta_schedule.beta_max),
            "warmup_epochs": int(config.beta_schedule.warmup_epochs),
        },
        "learning_rate": float(config.learning_rate),
        "rho": float(config.rho),
        "epsilon": float(config.epsilon),
        "batch_size": int(config.batch_size),
        "epochs": int(config.epochs),
        "seed": int(config.seed),
    }


def config_from_dict(d):
    sched = d["beta_schedule"]
    return VaeConfig(
        input_dim=d["input_dim"],
        hidden_dims=tuple(d["hidden_dims"]),
        latent_dim=d["latent_dim"],
        dropout_rate=d["dropout_rate"],
        l1_coefficient=d["l1_coefficient"],
        leaky_slope=d["leaky_slope"],
        loss_kind=d["loss_kind"],
        beta_schedule=BetaSchedule(sched["kind"], sched["beta_max"], sched["warmup_epochs"]),
        learning_rate=d["learning_rate"],
        rho=d["rho"],
        epsilon=d["epsilon"],
        batch_size=d["batch_size"],
        epochs=d["epochs"],
        seed=d["seed"],
    )


def _pack_tensor(name, arr):
    arr = np.ascontiguousarray(arr, dtype=np.float64)
    encoded = name.encode("utf-8")
    parts = [struct.pack("<I", len(encoded)), encoded, struct.pack("<I", arr.ndim)]
    parts.append(struct.pack(f"<{arr.ndim}Q", *arr.shape))
    parts.append(arr.tobytes(order="C"))
    return b"".join(parts)


def save_checkpoint(model, config, optimizer_state, epoch, path):
    """Write model parameters, buffers, and optional optimizer state."""
    tensors = list(model.named_tensors())
    if optimizer_state is not None:
        for i, acc in enumerate(optimizer_state.accumulators):
            for key in sorted(acc):
                tensors.append((f"opt/{i}/{key}", acc[key]))
    meta = {
        "config": _config_to_dict(config),
        "epoch": int(epoch),
        "has_optimizer": optimizer_state is not None,
        "opt_step": int(optimizer_state.step) if optimizer_state is not None else 0,
    }
    blob = json.dumps(meta, sort_keys=True, separators=(",", ":")).encode("utf-8")
    payload = [struct.pack("<I", VERSION), struct.pack("<I", len(blob)), blob]
    payload.append(struct.pack("<I", len(tensors)))
    for name, arr in tensors:
        payload.append(_pack_tensor(name, arr))
    body = b"".join(payload)
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(body)
        fh.write(struct.pack("<I", zlib.crc32(body)))


class _Reader:
    def __init__(self, data):
        self.data = data
        self.pos = 0

    def take(self, n):
        if self.pos + n > len(self.data):
            raise CheckpointError("corrupt checkpoint: truncated file")
        out = self.data[self.pos : self.pos + n]
        self.pos += n
        return out

    def u32(self):
        return struct.unpack("<I", self.take(4))[0]


def load_checkpoint(path):
    """Returns (model, config, optimizer_state or None, epoch)."""
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < len(MAGIC) or raw[: len(MAGIC)] != MAGIC:
        raise CheckpointError("not a checkpoint")
    if len(raw) < len(MAGIC) + 4:
        raise CheckpointError("corrupt checkpoint: truncated file")
    body, trailer = raw[len(MAGIC) : -4], raw[-4:]
    if struct.unpack("<I", trailer)[0] != zlib.crc32(body):
        raise CheckpointError("corrupt checkpoint: CRC mismatch")
    r = _Reader(body)
    version = r.u32()
    if version != VERSION:
        raise CheckpointError(f"unsupported checkpoint version {version}")
    meta = json.loads(r.take(r.u32()).decode("utf-8"))
    n_tensors = r.u32()
    tensors = {}
    for _ in range(n_tensors):
        name = r.take(r.u32()).decode("utf-8")
        ndim = r.u32()
        shape = struct.unpack(f"<{ndim}Q", r.take(8 * ndim))
        count = int(np.prod(shape)) if ndim else 1
        data = np.frombuffer(r.take(8 * count), dtype="<f8").reshape(shape).copy()
        tensors[name] = data
    if r.pos != len(body):
        raise CheckpointError("corrupt checkpoint: trailing bytes")

    config = config_from_dict(meta["config"])
    enc, mu, lv, dec = _architecture(config)
    model = VaeModel(config, enc, [], mu, [], lv, [], dec, [])
    for section, specs, params in model.param_stacks():
        for i, spec in enumerate(specs):
            # init gives the expected key set and shapes for this layer
            template = init_layer_params(spec, np.random.default_rng(0))
            p = {}
            for key in template:
                full = f"{section}/{i}/{key}"
                if full not in tensors:
                    raise CheckpointError(f"corrupt checkpoint: missing tensor {full}")
                if tensors[full].shape != template[key].shape:
                    raise CheckpointError(f"corrupt checkpoint: bad shape for {full}")
                p[key] = tensors[full]
            params.append(p)

    optimizer_state = None
    if meta.get("has_optimizer"):
        flat = model.flat_params()
        accs = []
        for i, p in enumerate(flat):
            acc = {}
            for key in p:
                full = f"opt/{i}/{key}"
                if full not in tensors:
                    raise CheckpointError(f"corrupt checkpoint: missing tensor {full}")
                acc[key] = tensors[full]
            accs.append(acc)
        optimizer_state = RmspropState(accs, int(meta.get("opt_step", 0)))
    return model, config, optimizer_state, int(meta["epoch"])
