"""Single-layer LSTM regressor with a linear head, trained by BPTT + RMSprop.

The cell is the standard gated recurrence:

    i = sigmoid(wi*x + Ui.h + bi)      input gate
    f = sigmoid(wf*x + Uf.h + bf)      forget gate
    o = sigmoid(wo*x + Uo.h + bo)      output gate
    g = tanh   (wg*x + Ug.h + bg)      candidate
    c' = f*c + i*g
    h' = o*tanh(c')

Input is univariate (one scalar per timestep), the prediction is a linear
readout of the final hidden state: y = wy.h_W + by, no output activation.
Everything is float64 so finite-difference checks are meaningful. Forward
and backward are vectorized over the sample batch; the per-sample
``lstm_step``/``forward`` surfaces wrap the same math and are cross-checked
in the tests.
"""

from __future__ import annotations

import base64
import binascii
import json
import math
from dataclasses import dataclass, fields

import numpy as np
from scipy.special import expit

from .errors import (
    CacheMismatchError,
    CorruptCheckpointError,
    DivergedNonFiniteError,
    EmptyInputError,
    EmptySplitError,
    LengthMismatchError,
    NonFiniteStateError,
    TrainSetEmptyError,
    VersionMismatchError,
)
from .windowing import WindowedDataset

CHECKPOINT_VERSION = 1

# Gate order everywhere: input, forget, output, candidate.
PARAM_FIELDS = (
    "wi", "wf", "wo", "wg",
    "ui", "uf", "uo", "ug",
    "bi", "bf", "bo", "bg",
    "wy", "by",
)


@dataclass(frozen=True)
class LstmParams:
    """All trainable parameters. Shapes for hidden size H:

    wi/wf/wo/wg: (H,) input-to-hidden weights (univariate input),
    ui/uf/uo/ug: (H, H) recurrent weights,
    bi/bf/bo/bg: (H,) gate biases,
    wy: (H,) readout weights, by: (1,) readout bias.
    """

    wi: np.ndarray
    wf: np.ndarray
    wo: np.ndarray
    wg: np.ndarray
    ui: np.ndarray
    uf: np.ndarray
    uo: np.ndarray
    ug: np.ndarray
    bi: np.ndarray
    bf: np.ndarray
    bo: np.ndarray
    bg: np.ndarray
    wy: np.ndarray
    by: np.ndarray

    @property
    def hidden_size(self) -> int:
        return self.wi.shape[0]


@dataclass(frozen=True)
class LstmState:
    h: np.ndarray
    c: np.ndarray


@dataclass(frozen=True)
class TrainConfig:
    window_size: int
    hidden_size: int
    learning_rate: float = 0.0002
    epochs: int = 100
    batch_size: int = 32
    rho: float = 0.9
    epsilon: float = 1e-7
    seed: int = 0
    clip_norm: float = 5.0

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")


@dataclass
class TrainHistory:
    train_mse: list[float]
    val_mse: list[float]

    def __len__(self) -> int:
        return len(self.train_mse)


@dataclass(frozen=True)
class RmsPropState:
    """Per-parameter squared-gradient accumulators, same shapes as the params."""

    acc: LstmParams

    @staticmethod
    def zeros_like(params: LstmParams) -> "RmsPropState":
        return RmsPropState(
            acc=LstmParams(**{n: np.zeros_like(getattr(params, n)) for n in PARAM_FIELDS})
        )


def param_count(params: LstmParams) -> int:
    return sum(getattr(params, n).size for n in PARAM_FIELDS)


def flatten_params(params: LstmParams) -> np.ndarray:
    return np.concatenate([getattr(params, n).ravel() for n in PARAM_FIELDS])


def unflatten_params(flat: np.ndarray, like: LstmParams) -> LstmParams:
    out = {}
    offset = 0
    for name in PARAM_FIELDS:
        ref = getattr(like, name)
        out[name] = flat[offset : offset + ref.size].reshape(ref.shape).copy()
        offset += ref.size
    return LstmParams(**out)


def init_model(hidden_size: int, seed: int) -> LstmParams:
    """Seeded initialization.

    Input and readout weights are Glorot-uniform (+-sqrt(6/(fan_in+fan_out))
    with fan 1 on the scalar side), recurrent matrices are orthogonalized
    seeded Gaussians (QR with sign-fixed diagonal), biases start at zero
    except the forget gate at one.
    """
    if hidden_size < 1:
        raise ValueError("hidden_size must be >= 1")
    rng = np.random.default_rng(seed)
    h = hidden_size

    lim_in = math.sqrt(6.0 / (1 + h))
    w_in = {k: rng.uniform(-lim_in, lim_in, size=h) for k in ("wi", "wf", "wo", "wg")}

    def orthogonal() -> np.ndarray:
        m = rng.standard_normal((h, h))
        q, r = np.linalg.qr(m)
        return q * np.sign(np.diag(r))[np.newaxis, :]

    u = {k: orthogonal() for k in ("ui", "uf", "uo", "ug")}
    lim_out = math.sqrt(6.0 / (h + 1))
    wy = rng.uniform(-lim_out, lim_out, size=h)

    return LstmParams(
        **w_in,
        **u,
        bi=np.zeros(h),
        bf=np.ones(h),
        bo=np.zeros(h),
        bg=np.zeros(h),
        wy=wy,
        by=np.zeros(1),
    )


def lstm_step(params: LstmParams, x_t: float, state: LstmState) -> LstmState:
    """One recurrence step for a single sample; direct gate equations."""
    h, c = state.h, state.c
    i = expit(params.wi * x_t + params.ui @ h + params.bi)
    f = expit(params.wf * x_t + params.uf @ h + params.bf)
    o = expit(params.wo * x_t + params.uo @ h + params.bo)
    g = np.tanh(params.wg * x_t + params.ug @ h + params.bg)
    c_new = f * c + i * g
    h_new = o * np.tanh(c_new)
    if not (np.isfinite(h_new).all() and np.isfinite(c_new).all()):
        raise NonFiniteStateError("LSTM state overflowed")
    return LstmState(h=h_new, c=c_new)


@dataclass
class ForwardCache:
    """Per-timestep activations retained for the backward pass."""

    x: np.ndarray      # (B, W) inputs
    i: np.ndarray      # (B, W, H) input gate
    f: np.ndarray      # (B, W, H) forget gate
    o: np.ndarray      # (B, W, H) output gate
    g: np.ndarray      # (B, W, H) candidate
    c: np.ndarray      # (B, W, H) cell state after the step
    h: np.ndarray      # (B, W, H) hidden state after the step
    tc: np.ndarray     # (B, W, H) tanh of the cell state
    pred: np.ndarray   # (B,) readout


def _stacked(params: LstmParams):
    w = np.concatenate([params.wi, params.wf, params.wo, params.wg])
    u = np.vstack([params.ui, params.uf, params.uo, params.ug])
    b = np.concatenate([params.bi, params.bf, params.bo, params.bg])
    return w, u, b


def _run_batch(params: LstmParams, x: np.ndarray, want_cache: bool):
    """Shared forward over a (B, W) input batch, state zero-initialized."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2:
        raise ValueError("batch input must have shape (B, W)")
    n_batch, n_steps = x.shape
    h_dim = params.hidden_size
    w_st, u_st, b_st = _stacked(params)

    h = np.zeros((n_batch, h_dim))
    c = np.zeros((n_batch, h_dim))
    cache = None
    if want_cache:
        shape = (n_batch, n_steps, h_dim)
        cache = ForwardCache(
            x=x,
            i=np.empty(shape), f=np.empty(shape), o=np.empty(shape), g=np.empty(shape),
            c=np.empty(shape), h=np.empty(shape), tc=np.empty(shape),
            pred=np.empty(n_batch),
        )

    for t in range(n_steps):
        a = x[:, t, np.newaxis] * w_st[np.newaxis, :] + h @ u_st.T + b_st[np.newaxis, :]
        i = expit(a[:, :h_dim])
        f = expit(a[:, h_dim : 2 * h_dim])
        o = expit(a[:, 2 * h_dim : 3 * h_dim])
        g = np.tanh(a[:, 3 * h_dim :])
        c = f * c + i * g
        tc = np.tanh(c)
        h = o * tc
        if want_cache:
            cache.i[:, t] = i
            cache.f[:, t] = f
            cache.o[:, t] = o
            cache.g[:, t] = g
            cache.c[:, t] = c
            cache.h[:, t] = h
            cache.tc[:, t] = tc

    pred = h @ params.wy + params.by[0]
    if not (np.isfinite(pred).all() and np.isfinite(h).all() and np.isfinite(c).all()):
        raise NonFiniteStateError("LSTM state overflowed during forward")
    if want_cache:
        cache.pred = pred
    return pred, cache


def forward(params: LstmParams, window) -> tuple[float, ForwardCache]:
    """Run one window through the net; state starts at zero every sample."""
    arr = np.asarray(window, dtype=np.float64)
    pred, cache = _run_batch(params, arr[np.newaxis, :], want_cache=True)
    return float(pred[0]), cache


def forward_batch(params: LstmParams, x: np.ndarray) -> tuple[np.ndarray, ForwardCache]:
    return _run_batch(params, x, want_cache=True)


def predict_batch(params: LstmParams, x: np.ndarray) -> np.ndarray:
    """Forward without retaining activations (evaluation path)."""
    pred, _ = _run_batch(params, x, want_cache=False)
    return pred


def mse(targets, predictions) -> float:
    """Mean squared error (1/N) sum (y - yhat)^2."""
    y = np.asarray(targets, dtype=np.float64)
    yhat = np.asarray(predictions, dtype=np.float64)
    if y.shape != yhat.shape:
        raise LengthMismatchError(f"{y.shape} vs {yhat.shape}")
    if y.size == 0:
        raise EmptyInputError("mse over zero points")
    diff = y - yhat
    return float(np.dot(diff, diff) / y.size)


def mae(targets, predictions) -> float:
    """Mean absolute error (1/N) sum |y - yhat|."""
    y = np.asarray(targets, dtype=np.float64)
    yhat = np.asarray(predictions, dtype=np.float64)
    if y.shape != yhat.shape:
        raise LengthMismatchError(f"{y.shape} vs {yhat.shape}")
    if y.size == 0:
        raise EmptyInputError("mae over zero points")
    return float(np.abs(y - yhat).sum() / y.size)


def backward(params: LstmParams, cache: ForwardCache, targets) -> LstmParams:
    """Exact gradients of batch-mean MSE w.r.t. every parameter.

    Unrolls the recurrence backwards over all timesteps, accumulating into
    stacked gate blocks, then splits them back out per gate.
    """
    y = np.asarray(targets, dtype=np.float64)
    n_batch, n_steps, h_dim = cache.h.shape
    if y.shape != (n_batch,):
        raise CacheMismatchError(f"targets {y.shape} vs cached batch of {n_batch}")

    _, u_st, _ = _stacked(params)

    # d(loss)/d(pred) for loss = (1/B) sum (pred - y)^2
    dpred = 2.0 * (cache.pred - y) / n_batch

    d_wy = cache.h[:, -1, :].T @ dpred
    d_by = np.array([dpred.sum()])

    dw_st = np.zeros(4 * h_dim)
    du_st = np.zeros((4 * h_dim, h_dim))
    db_st = np.zeros(4 * h_dim)

    dh = dpred[:, np.newaxis] * params.wy[np.newaxis, :]
    dc = np.zeros((n_batch, h_dim))
    for t in range(n_steps - 1, -1, -1):
        i = cache.i[:, t]
        f = cache.f[:, t]
        o = cache.o[:, t]
        g = cache.g[:, t]
        tc = cache.tc[:, t]
        if t > 0:
            h_prev = cache.h[:, t - 1]
            c_prev = cache.c[:, t - 1]
        else:
            h_prev = np.zeros((n_batch, h_dim))
            c_prev = np.zeros((n_batch, h_dim))

        do = dh * tc
        dc = dc + dh * o * (1.0 - tc * tc)
        di = dc * g
        dg = dc * i
        df = dc * c_prev

        da = np.hstack(
            [
                di * i * (1.0 - i),
                df * f * (1.0 - f),
                do * o * (1.0 - o),
                dg * (1.0 - g * g),
            ]
        )
        dw_st += da.T @ cache.x[:, t]
        du_st += da.T @ h_prev
        db_st += da.sum(axis=0)

        dh = da @ u_st
        dc = dc * f

    return LstmParams(
        wi=dw_st[:h_dim], wf=dw_st[h_dim : 2 * h_dim],
        wo=dw_st[2 * h_dim : 3 * h_dim], wg=dw_st[3 * h_dim :],
        ui=du_st[:h_dim], uf=du_st[h_dim : 2 * h_dim],
        uo=du_st[2 * h_dim : 3 * h_dim], ug=du_st[3 * h_dim :],
        bi=db_st[:h_dim], bf=db_st[h_dim : 2 * h_dim],
        bo=db_st[2 * h_dim : 3 * h_dim], bg=db_st[3 * h_dim :],
        wy=d_wy, by=d_by,
    )


def gradient_norm(grads: LstmParams) -> float:
    total = 0.0
    for name in PARAM_FIELDS:
        g = getattr(grads, name)
        total += float(np.dot(g.ravel(), g.ravel()))
    return math.sqrt(total)


def clip_gradients(grads: LstmParams, max_norm: float) -> LstmParams:
    """Scale all gradients down so their global norm is at most max_norm."""
    norm = gradient_norm(grads)
    if norm <= max_norm or norm == 0.0:
        return grads
    scale = max_norm / norm
    return LstmParams(**{n: getattr(grads, n) * scale for n in PARAM_FIELDS})


def rmsprop_update(
    params: LstmParams,
    grads: LstmParams,
    opt_state: RmsPropState,
    lr: float,
    rho: float = 0.9,
    epsilon: float = 1e-7,
) -> tuple[LstmParams, RmsPropState]:
    """a <- rho*a + (1-rho)*g^2 ; theta <- theta - lr*g/(sqrt(a)+eps)."""
    new_params = {}
    new_acc = {}
    for name in PARAM_FIELDS:
        theta = getattr(params, name)
        g = getattr(grads, name)
        a = rho * getattr(opt_state.acc, name) + (1.0 - rho) * g * g
        new_acc[name] = a
        new_params[name] = theta - lr * g / (np.sqrt(a) + epsilon)
    return LstmParams(**new_params), RmsPropState(acc=LstmParams(**new_acc))


def train(
    params: LstmParams, dataset: WindowedDataset, config: TrainConfig
) -> tuple[LstmParams, TrainHistory]:
    """Seeded mini-batch training loop.

    Each epoch shuffles the train samples with the config seed's generator,
    steps RMSprop once per batch (gradients clipped to the global-norm cap),
    then records post-epoch train and validation MSE. Fully deterministic
    for a fixed (seed, dataset, config). Validation MSE is NaN when the
    validation split is too short to hold a single window.
    """
    train_ws = dataset.train
    if len(train_ws) == 0:
        raise TrainSetEmptyError("train split has no samples")

    rng = np.random.default_rng(config.seed)
    opt_state = RmsPropState.zeros_like(params)
    history = TrainHistory(train_mse=[], val_mse=[])

    n = len(train_ws)
    for _epoch in range(config.epochs):
        perm = rng.permutation(n)
        for lo in range(0, n, config.batch_size):
            idx = perm[lo : lo + config.batch_size]
            try:
                preds, cache = forward_batch(params, train_ws.x[idx])
            except NonFiniteStateError as exc:
                raise DivergedNonFiniteError(str(exc), history=history) from exc
            grads = backward(params, cache, train_ws.y[idx])
            if not all(np.isfinite(getattr(grads, f)).all() for f in PARAM_FIELDS):
                raise DivergedNonFiniteError("non-finite gradients", history=history)
            grads = clip_gradients(grads, config.clip_norm)
            params, opt_state = rmsprop_update(
                params, grads, opt_state, config.learning_rate, config.rho, config.epsilon
            )

        try:
            epoch_train = mse(train_ws.y, predict_batch(params, train_ws.x))
            if len(dataset.validation) > 0:
                epoch_val = mse(
                    dataset.validation.y, predict_batch(params, dataset.validation.x)
                )
            else:
                epoch_val = math.nan
        except NonFiniteStateError as exc:
            raise DivergedNonFiniteError(str(exc), history=history) from exc
        if not math.isfinite(epoch_train):
            raise DivergedNonFiniteError("training loss became non-finite", history=history)
        history.train_mse.append(epoch_train)
        history.val_mse.append(epoch_val)

    return params, history


def predict_series(
    params: LstmParams,
    dataset: WindowedDataset,
    split_name: str,
    denormalized: bool = False,
) -> tuple[np.ndarray, np.ndarray]:
    """One-step-ahead predictions over a whole split, chronological order.

    Returns (targets, predictions) in normalized units, or multiplied back
    by sigma when denormalized=True.
    """
    ws = dataset.split(split_name)
    if len(ws) == 0:
        raise EmptySplitError(f"split {split_name!r} has no samples")
    preds = predict_batch(params, ws.x)
    targets = ws.y.copy()
    if denormalized:
        sigma = dataset.normalization.sigma
        return targets * sigma, preds * sigma
    return targets, preds


# --- checkpointing ----------------------------------------------------------


def _encode_array(arr: np.ndarray) -> dict:
    contiguous = np.ascontiguousarray(arr, dtype="<f8")
    return {
        "shape": list(arr.shape),
        "data": base64.b64encode(contiguous.tobytes()).decode("ascii"),
    }


def _decode_array(obj: dict) -> np.ndarray:
    raw = base64.b64decode(obj["data"].encode("ascii"), validate=True)
    arr = np.frombuffer(raw, dtype="<f8").copy()
    return arr.reshape([int(s) for s in obj["shape"]])


def save_checkpoint(
    params: LstmParams,
    opt_state: RmsPropState,
    config: TrainConfig,
    meta: dict | None = None,
) -> bytes:
    """Self-describing JSON checkpoint; round-trips bit-exactly."""
    payload = {
        "format_version": CHECKPOINT_VERSION,
        "hidden_size": config.hidden_size,
        "window_size": config.window_size,
        "rho": config.rho,
        "epsilon": config.epsilon,
        "config": {f.name: getattr(config, f.name) for f in fields(config)},
        "params": {n: _encode_array(getattr(params, n)) for n in PARAM_FIELDS},
        "opt_acc": {n: _encode_array(getattr(opt_state.acc, n)) for n in PARAM_FIELDS},
        "meta": meta or {},
    }
    return json.dumps(payload, sort_keys=True, separators=(",", ":")).encode("utf-8")


def load_checkpoint(raw: bytes):
    """Inverse of save_checkpoint: (params, opt_state, config, meta).

    Unknown format versions raise VersionMismatchError; anything
    structurally wrong (truncation, bad base64, shape drift) raises
    CorruptCheckpointError.
    """
    try:
        payload = json.loads(raw.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise CorruptCheckpointError(f"unreadable checkpoint: {exc}") from exc
    if not isinstance(payload, dict):
        raise CorruptCheckpointError("checkpoint is not an object")
    version = payload.get("format_version")
    if version != CHECKPOINT_VERSION:
        raise VersionMismatchError(
            f"checkpoint format {version!r}, expected {CHECKPOINT_VERSION}"
        )
    try:
        config = TrainConfig(**payload["config"])
        params = LstmParams(**{n: _decode_array(payload["params"][n]) for n in PARAM_FIELDS})
        acc = LstmParams(**{n: _decode_array(payload["opt_acc"][n]) for n in PARAM_FIELDS})
        meta = payload.get("meta", {})
    except (KeyError, TypeError, ValueError, binascii.Error) as exc:
        raise CorruptCheckpointError(f"malformed checkpoint field: {exc}") from exc
    h = config.hidden_size
    if params.hidden_size != h or params.ui.shape != (h, h):
        raise CorruptCheckpointError("parameter shapes disagree with header")
    return params, RmsPropState(acc=acc), config, meta
