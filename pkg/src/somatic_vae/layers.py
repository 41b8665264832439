"""Dense layer stacks with hand-written forward/backward passes.

Tensors are 2-D float64 C-order numpy arrays (rows = batch). Matrix
products delegate to numpy's BLAS matmul, whose reduction over the inner
dimension is a fixed tree for a given build, so repeated calls are
bit-deterministic. Each layer follows the (out, cache) convention and
the stack records caches on a Tape for the backward pass.
"""

from dataclasses import dataclass

import numpy as np

TRAIN = "train"
INFERENCE = "inference"


def _as_real(t):
    # promote ints/float32 to float64; leave extended precision alone so
    # finite-difference replays can run the same code at higher precision
    return np.asarray(t, dtype=np.result_type(t, np.float64))


def matmul(a, b):
    """Shape-checked matrix product of two 2-D float64 arrays."""
    a = _as_real(a)
    b = _as_real(b)
    if a.ndim != 2 or b.ndim != 2:
        raise ValueError("matmul expects 2-D arrays")
    if a.shape[1] != b.shape[0]:
        raise ValueError(f"matmul dimension mismatch: {a.shape} x {b.shape}")
    return a @ b


def sigmoid(x):
    # split by sign so exp never overflows
    x = _as_real(x)
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def elementwise(op, *tensors, lo=None, hi=None):
    """Elementwise kernel used by the loss plumbing.

    op is one of add, sub, mul (binary), sigmoid, log, clamp (unary).
    """
    arrays = [_as_real(t) for t in tensors]
    if op in ("add", "sub", "mul"):
        if len(arrays) != 2:
            raise ValueError(f"{op} expects exactly two tensors")
        a, b = arrays
        if a.shape != b.shape:
            raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
        return {"add": a + b, "sub": a - b, "mul": a * b}[op]
    if len(arrays) != 1:
        raise ValueError(f"{op} expects exactly one tensor")
    (a,) = arrays
    if op == "sigmoid":
        return sigmoid(a)
    if op == "log":
        if np.any(a <= 0):
            raise ValueError("log of non-positive value (clamp first)")
        return np.log(a)
    if op == "clamp":
        if lo is None or hi is None:
            raise ValueError("clamp requires lo and hi")
        return np.clip(a, lo, hi)
    raise ValueError(f"unknown elementwise op {op!r}")


@dataclass
class Dense:
    in_dim: int
    out_dim: int
    l1_coefficient: float = 0.0


@dataclass
class BatchNorm:
    dim: int
    epsilon: float = 1e-5
    momentum: float = 0.9


@dataclass
class Activation:
    kind: str  # relu | leaky_relu | sigmoid | identity
    slope: float = 0.3  # leaky_relu only


@dataclass
class Dropout:
    rate: float


@dataclass
class Tape:
    """Per-layer caches from one stack_forward call (train mode keeps
    dropout masks so the pass can be replayed exactly)."""

    mode: str
    caches: list
    masks: list


def init_layer_params(spec, rng):
    if isinstance(spec, Dense):
        # uniform Glorot scaling, biases zero
        limit = np.sqrt(6.0 / (spec.in_dim + spec.out_dim))
        return {
            "w": rng.uniform(-limit, limit, size=(spec.in_dim, spec.out_dim)),
            "b": np.zeros(spec.out_dim),
        }
    if isinstance(spec, BatchNorm):
        return {
            "gamma": np.ones(spec.dim),
            "delta": np.zeros(spec.dim),
            "run_mean": np.zeros(spec.dim),
            "run_var": np.ones(spec.dim),
        }
    return {}


def init_stack_params(specs, rng):
    return [init_layer_params(spec, rng) for spec in specs]


def check_stack_dims(specs):
    """Raise if adjacent layers are dimension-incompatible."""
    width = None
    for i, spec in enumerate(specs):
        if isinstance(spec, Dense):
            if width is not None and width != spec.in_dim:
                raise ValueError(f"layer {i} (Dense) expects {spec.in_dim}, gets {width}")
            width = spec.out_dim
        elif isinstance(spec, BatchNorm):
            if width is not None and width != spec.dim:
                raise ValueError(f"layer {i} (BatchNorm) expects {spec.dim}, gets {width}")
            width = spec.dim
    return width


def _dense_forward(x, p):
    return x @ p["w"] + p["b"], x


def _dense_backward(dout, cache, p, l1_coefficient):
    x = cache
    dw = x.T @ dout
    if l1_coefficient > 0.0:
        dw = dw + l1_coefficient * np.sign(p["w"])
    return dout @ p["w"].T, {"w": dw, "b": dout.sum(axis=0)}


def _batchnorm_forward(x, p, spec, mode, update_running):
    if mode == INFERENCE:
        inv = 1.0 / np.sqrt(p["run_var"] + spec.epsilon)
        xhat = (x - p["run_mean"]) * inv
        return p["gamma"] * xhat + p["delta"], None
    mean = x.mean(axis=0)
    xmu = x - mean
    var = (xmu * xmu).mean(axis=0)  # biased, ddof=0
    inv = 1.0 / np.sqrt(var + spec.epsilon)
    xhat = xmu * inv
    if update_running:
        m = spec.momentum
        p["run_mean"] = m * p["run_mean"] + (1.0 - m) * mean
        p["run_var"] = m * p["run_var"] + (1.0 - m) * var
    return p["gamma"] * xhat + p["delta"], (xmu, inv, xhat)


def _batchnorm_backward(dout, cache, p):
    # full backprop through the batch statistics
    xmu, inv, xhat = cache
    n = dout.shape[0]
    dgamma = (dout * xhat).sum(axis=0)
    ddelta = dout.sum(axis=0)
    dxhat = dout * p["gamma"]
    dvar = (dxhat * xmu).sum(axis=0) * (-0.5) * inv**3
    dmean = -(dxhat.sum(axis=0)) * inv + dvar * (-2.0) * xmu.mean(axis=0)
    dx = dxhat * inv + dvar * 2.0 * xmu / n + dmean / n
    return dx, {"gamma": dgamma, "delta": ddelta}


def _activation_forward(x, spec):
    if spec.kind == "relu":
        return np.maximum(x, 0.0), x
    if spec.kind == "leaky_relu":
        return np.where(x > 0.0, x, spec.slope * x), x
    if spec.kind == "sigmoid":
        out = sigmoid(x)
        return out, out
    if spec.kind == "identity":
        return x, None
    raise ValueError(f"unknown activation kind {spec.kind!r}")


def _activation_backward(dout, cache, spec):
    if spec.kind == "relu":
        return dout * (cache > 0.0)
    if spec.kind == "leaky_relu":
        return dout * np.where(cache > 0.0, 1.0, spec.slope)
    if spec.kind == "sigmoid":
        return dout * cache * (1.0 - cache)
    return dout


def stack_forward(specs, params, x, mode, rng=None, masks=None, update_running=True):
    """Run the layer stack; returns (output, Tape).

    mode is "train" or "inference". In train mode an rng is required when
    the stack contains Dropout (unless pre-drawn masks are supplied, which
    is how finite-difference replays freeze the stochastic path).
    """
    if mode not in (TRAIN, INFERENCE):
        raise ValueError(f"unknown mode {mode!r}")
    x = _as_real(x)
    caches = []
    used_masks = []
    out = x
    for i, (spec, p) in enumerate(zip(specs, params)):
        mask = None
        if isinstance(spec, Dense):
            if out.shape[1] != spec.in_dim:
                raise ValueError(f"layer {i} (Dense) expects {spec.in_dim} columns, got {out.shape[1]}")
            out, cache = _dense_forward(out, p)
        elif isinstance(spec, BatchNorm):
            out, cache = _batchnorm_forward(out, p, spec, mode, update_running)
        elif isinstance(spec, Activation):
            out, cache = _activation_forward(out, spec)
        elif isinstance(spec, Dropout):
            cache = None
            if mode == TRAIN and spec.rate > 0.0:
                if masks is not None:
                    mask = masks[i]
                elif rng is not None:
                    # inverted dropout: survivors pre-scaled, inference is identity
                    mask = (rng.random(out.shape) >= spec.rate) / (1.0 - spec.rate)
                else:
                    raise ValueError(f"layer {i} (Dropout) needs an rng in train mode")
                out = out * mask
        else:
            raise ValueError(f"unknown layer spec {spec!r}")
        if not np.isfinite(out).all():
            raise FloatingPointError(f"non-finite output at layer {i} ({type(spec).__name__})")
        caches.append(cache)
        used_masks.append(mask)
    return out, Tape(mode, caches, used_masks)


def stack_backward(specs, params, tape, dout):
    """Reverse-mode gradients through a recorded train-mode pass.

    Returns (input gradient, per-layer parameter gradient dicts). Dense
    weight gradients include the L1 subgradient term.
    """
    if tape.mode != TRAIN:
        raise ValueError("stack_backward requires a train-mode tape")
    if len(tape.caches) != len(specs):
        raise ValueError("tape does not match the layer stack")
    dout = _as_real(dout)
    grads = [None] * len(specs)
    dx = dout
    for i in range(len(specs) - 1, -1, -1):
        spec, p, cache = specs[i], params[i], tape.caches[i]
        if isinstance(spec, Dense):
            dx, g = _dense_backward(dx, cache, p, spec.l1_coefficient)
            grads[i] = g
        elif isinstance(spec, BatchNorm):
            dx, g = _batchnorm_backward(dx, cache, p)
            grads[i] = g
        elif isinstance(spec, Activation):
            dx = _activation_backward(dx, cache, spec)
            grads[i] = {}
        else:  # Dropout
            mask = tape.masks[i]
            if mask is not None:
                dx = dx * mask
            grads[i] = {}
    return dx, grads


def stack_l1_penalty(specs, params):
    """Sum of l1_coefficient * |w| over Dense layers (unscaled)."""
    total = 0.0
    for spec, p in zip(specs, params):
        if isinstance(spec, Dense) and spec.l1_coefficient > 0.0:
            total += spec.l1_coefficient * np.abs(p["w"]).sum()
    return total
