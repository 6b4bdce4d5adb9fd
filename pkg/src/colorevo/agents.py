"""One-hidden-layer speaker and listener networks, trained from scratch.

The speaker maps a CIELAB triple (scaled by 1/100 so the sigmoid layer is
not saturated by raw coordinate magnitudes) to a distribution over K words;
the listener maps a one-hot word to a distribution over the 330 chips.
Supervised training uses exact backpropagated cross-entropy gradients;
reinforcement updates use the score-function (REINFORCE) estimator.  Both
are driven by bias-corrected Adam.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import IO

import numpy as np

from .errors import ValidationError
from .grid import NUM_CHIPS
from .util import fmt_float, open_text

HIDDEN_UNITS = 25
LAB_SCALE = 10.0
DEFAULT_LEARNING_RATE = 0.005

_PARAM_KEYS = ("w1", "b1", "w2", "b2")


@dataclass(frozen=True)
class AgentParams:
    """Weights of one agent; role fixes the input/output conventions."""

    w1: np.ndarray  # (hidden, in)
    b1: np.ndarray  # (hidden,)
    w2: np.ndarray  # (out, hidden)
    b2: np.ndarray  # (out,)
    role: str  # "speaker" | "listener"
    input_scale: float = LAB_SCALE  # divisor applied to speaker CIELAB input

    def as_dict(self) -> dict[str, np.ndarray]:
        return {k: getattr(self, k) for k in _PARAM_KEYS}

    @property
    def num_outputs(self) -> int:
        return self.w2.shape[0]


@dataclass(frozen=True)
class OptimizerState:
    """Adam accumulators; shapes mirror the parameters they update."""

    step: int
    m: dict[str, np.ndarray]
    v: dict[str, np.ndarray]
    learning_rate: float = DEFAULT_LEARNING_RATE
    beta1: float = 0.9
    beta2: float = 0.999
    eps_hat: float = 1e-8


def init_agent(
    role: str,
    num_words: int,
    rng: np.random.Generator,
    hidden: int = HIDDEN_UNITS,
    num_chips: int = NUM_CHIPS,
    init_scale: float = 1.0,
    input_scale: float = LAB_SCALE,
) -> AgentParams:
    """Fresh agent with uniform(-a, a) weights, a = sqrt(6/(fan_in+fan_out)).

    `init_scale` multiplies the first-layer range; values above 1 start the
    hidden units in their nonlinear range, which decorrelates the agent's
    responses to distinct inputs from the very first episode.
    """
    if role == "speaker":
        n_in, n_out = 3, num_words
    elif role == "listener":
        n_in, n_out = num_words, num_chips
    else:
        raise ValidationError(f"unknown role {role!r}")

    def glorot(n_o: int, n_i: int, scale: float = 1.0) -> np.ndarray:
        a = scale * np.sqrt(6.0 / (n_i + n_o))
        return rng.uniform(-a, a, size=(n_o, n_i))

    return AgentParams(
        w1=glorot(hidden, n_in, init_scale),
        b1=np.zeros(hidden),
        w2=glorot(n_out, hidden),
        b2=np.zeros(n_out),
        role=role,
        input_scale=input_scale,
    )


def init_optimizer(
    params: AgentParams, learning_rate: float = DEFAULT_LEARNING_RATE
) -> OptimizerState:
    zeros = {k: np.zeros_like(v) for k, v in params.as_dict().items()}
    return OptimizerState(
        step=0,
        m=zeros,
        v={k: np.zeros_like(v) for k, v in params.as_dict().items()},
        learning_rate=learning_rate,
    )


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=-1, keepdims=True)


def _forward(params: AgentParams, x: np.ndarray):
    """x: (batch, in) -> probs (batch, out) plus the activations backprop needs."""
    z1 = x @ params.w1.T + params.b1
    h = _sigmoid(z1)
    logits = h @ params.w2.T + params.b2
    return _softmax(logits), h


def _backward(
    params: AgentParams, x: np.ndarray, h: np.ndarray, dlogits: np.ndarray
) -> dict[str, np.ndarray]:
    dw2 = dlogits.T @ h
    db2 = dlogits.sum(axis=0)
    dh = dlogits @ params.w2
    dz1 = dh * h * (1.0 - h)
    return {"w1": dz1.T @ x, "b1": dz1.sum(axis=0), "w2": dw2, "b2": db2}


def _speaker_input(params: AgentParams, lab: np.ndarray) -> np.ndarray:
    return np.atleast_2d(np.asarray(lab, dtype=np.float64)) / params.input_scale


def speaker_forward(params: AgentParams, lab: np.ndarray) -> np.ndarray:
    """Distribution over words for CIELAB input(s); accepts (3,) or (B, 3)."""
    if params.role != "speaker":
        raise ValidationError("params belong to a listener")
    lab = np.asarray(lab, dtype=np.float64)
    probs, _ = _forward(params, _speaker_input(params, lab))
    return probs[0] if lab.ndim == 1 else probs


def listener_forward(params: AgentParams, word: np.ndarray) -> np.ndarray:
    """Distribution over chips for one-hot word input(s); accepts (K,) or (B, K)."""
    if params.role != "listener":
        raise ValidationError("params belong to a speaker")
    word = np.asarray(word, dtype=np.float64)
    probs, _ = _forward(params, np.atleast_2d(word))
    return probs[0] if word.ndim == 1 else probs


def _one_hot(indices: np.ndarray, width: int) -> np.ndarray:
    out = np.zeros((len(indices), width))
    out[np.arange(len(indices)), indices] = 1.0
    return out


def cross_entropy_grads(
    params: AgentParams, x: np.ndarray, targets: np.ndarray
) -> tuple[float, dict[str, np.ndarray]]:
    """Mean -log p(target) over the batch and its exact parameter gradients.

    `x` is the raw model input (CIELAB for a speaker, one-hot for a listener).
    """
    x = _speaker_input(params, x) if params.role == "speaker" else np.atleast_2d(x)
    probs, h = _forward(params, x)
    b = len(targets)
    picked = probs[np.arange(b), targets]
    loss = float(-np.log(np.maximum(picked, 1e-300)).mean())
    dlogits = (probs - _one_hot(targets, probs.shape[1])) / b
    return loss, _backward(params, x, h, dlogits)


def reinforce_grads(
    params: AgentParams,
    x: np.ndarray,
    actions: np.ndarray,
    rewards: np.ndarray,
    baseline: bool = False,
) -> tuple[float, dict[str, np.ndarray]]:
    """Score-function surrogate -(1/B) sum r_i log pi(a_i | x_i) and gradients.

    `baseline=True` subtracts the batch mean reward (variance reduction
    only; the estimator stays unbiased).
    """
    x = _speaker_input(params, x) if params.role == "speaker" else np.atleast_2d(x)
    probs, h = _forward(params, x)
    b = len(actions)
    r = np.asarray(rewards, dtype=np.float64)
    if not np.all(np.isfinite(r)):
        raise ValidationError("rewards must be finite")
    if baseline:
        r = r - r.mean()
    picked = probs[np.arange(b), actions]
    loss = float(-(r * np.log(np.maximum(picked, 1e-300))).mean())
    dlogits = (probs - _one_hot(actions, probs.shape[1])) * (r / b)[:, None]
    return loss, _backward(params, x, h, dlogits)


def adam_step(
    opt: OptimizerState, params: AgentParams, grads: dict[str, np.ndarray]
) -> tuple[OptimizerState, AgentParams]:
    """One bias-corrected Adam update; returns fresh state and parameters."""
    for key in _PARAM_KEYS:
        if grads[key].shape != getattr(params, key).shape:
            raise ValidationError(f"gradient shape mismatch for {key}")
    t = opt.step + 1
    new_m, new_v, updated = {}, {}, {}
    for key in _PARAM_KEYS:
        g = grads[key]
        m = opt.beta1 * opt.m[key] + (1.0 - opt.beta1) * g
        v = opt.beta2 * opt.v[key] + (1.0 - opt.beta2) * g * g
        m_hat = m / (1.0 - opt.beta1**t)
        v_hat = v / (1.0 - opt.beta2**t)
        new_m[key] = m
        new_v[key] = v
        updated[key] = getattr(params, key) - opt.learning_rate * m_hat / (
            np.sqrt(v_hat) + opt.eps_hat
        )
    return (
        replace(opt, step=t, m=new_m, v=new_v),
        replace(params, **updated),
    )


def sample_categorical(rng: np.random.Generator, probs: np.ndarray) -> np.ndarray:
    """One draw per row of a (batch, n) probability matrix."""
    u = rng.random(probs.shape[0])
    return (probs.cumsum(axis=1) < u[:, None]).sum(axis=1)


def train_supervised(
    params: AgentParams,
    inputs: np.ndarray,
    targets: np.ndarray,
    opt: OptimizerState,
    steps: int,
    batch_size: int,
    rng: np.random.Generator,
) -> tuple[AgentParams, OptimizerState]:
    """Minibatch cross-entropy training over a fixed (inputs, targets) set.

    `inputs` are raw model inputs (CIELAB rows for a speaker); batches are
    drawn with replacement.
    """
    if len(inputs) == 0:
        raise ValidationError("training data is empty")
    for _ in range(steps):
        idx = rng.integers(len(inputs), size=batch_size)
        _, grads = cross_entropy_grads(params, inputs[idx], targets[idx])
        opt, params = adam_step(opt, params, grads)
    return params, opt


def reinforce_update(
    params: AgentParams,
    opt: OptimizerState,
    x: np.ndarray,
    actions: np.ndarray,
    rewards: np.ndarray,
    baseline: bool = False,
) -> tuple[AgentParams, OptimizerState]:
    """One REINFORCE batch update through Adam."""
    _, grads = reinforce_grads(params, x, actions, rewards, baseline=baseline)
    opt, params = adam_step(opt, params, grads)
    return params, opt


def save_params(params: AgentParams, dest: str | IO[str]) -> None:
    """Checkpoint as TSV: `role` line, then one `name shape values...` per array."""
    stream, owned = open_text(dest, "w")
    try:
        stream.write(f"role\t{params.role}\n")
        stream.write(f"input_scale\t{fmt_float(params.input_scale)}\n")
        for key in _PARAM_KEYS:
            arr = getattr(params, key)
            shape = "x".join(str(s) for s in arr.shape)
            flat = "\t".join(fmt_float(v) for v in arr.ravel())
            stream.write(f"{key}\t{shape}\t{flat}\n")
    finally:
        if owned:
            stream.close()


def load_params(src: str | IO[str]) -> AgentParams:
    stream, owned = open_text(src)
    try:
        lines = [ln for ln in stream.read().splitlines() if ln.strip()]
    finally:
        if owned:
            stream.close()
    tag, role = lines[0].split("\t")
    if tag != "role":
        raise ValidationError("checkpoint must start with a role line")
    scale_tag, scale_val = lines[1].split("\t")
    if scale_tag != "input_scale":
        raise ValidationError("checkpoint missing input_scale line")
    arrays: dict[str, np.ndarray] = {}
    for line in lines[2:]:
        name, shape_s, *values = line.split("\t")
        shape = tuple(int(s) for s in shape_s.split("x"))
        arrays[name] = np.array([float(v) for v in values]).reshape(shape)
    missing = set(_PARAM_KEYS) - set(arrays)
    if missing:
        raise ValidationError(f"checkpoint missing arrays: {sorted(missing)}")
    return AgentParams(role=role, input_scale=float(scale_val), **arrays)
