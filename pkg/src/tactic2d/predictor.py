"""Trainable pass predictor: an MLP mapping features to an 11-way target
distribution, plus masked top-2 selection that builds hypothetical successor
states for the decision tree.

The network is 180-350-250-11 with ReLU hidden layers and a softmax output;
training is plain minibatch SGD with seeded shuffling. A heuristic backend
exposing the same probability interface lets every downstream module run
without a trained model.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .config import Config, DEFAULT_CONFIG
from .extractor import FEATURE_DIM, LabeledSample, extract_features
from .motion import PassSpec, fast_forward, receiver_interception, simulate_pass
from .world import GameState, Side

DEFAULT_DIMS = (FEATURE_DIM, 350, 250, 11)
MODEL_SCHEMA = "mlp-v1"


@dataclass
class MlpModel:
    dims: tuple[int, ...]
    weights: list[np.ndarray]  # weights[l] has shape (dims[l], dims[l+1])
    biases: list[np.ndarray]

    def copy(self) -> "MlpModel":
        return MlpModel(self.dims, [w.copy() for w in self.weights], [b.copy() for b in self.biases])


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 0.01
    batch_size: int = 64
    epochs: int = 20
    seed: int = 0
    l2: float = 0.0
    # standardize inputs on train-set statistics; the affine transform is
    # folded into the first layer afterwards so the model file stays a plain MLP
    standardize: bool = False

    def __post_init__(self):
        if self.learning_rate < 0:
            raise ValueError("learning_rate must be >= 0")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")


@dataclass(frozen=True)
class EpochStats:
    epoch: int
    train_loss: float
    test_accuracy: float


@dataclass(frozen=True, slots=True)
class PassStateValue:
    passer: int
    receiver: int
    outcome: GameState
    value: float


def init(seed: int, dims: tuple[int, ...] = DEFAULT_DIMS) -> MlpModel:
    """He-initialized weights (scale sqrt(2/fan_in)), zero biases."""
    rng = np.random.default_rng(seed)
    weights = []
    biases = []
    for fan_in, fan_out in zip(dims[:-1], dims[1:]):
        weights.append(rng.standard_normal((fan_in, fan_out)) * math.sqrt(2.0 / fan_in))
        biases.append(np.zeros(fan_out))
    return MlpModel(tuple(dims), weights, biases)


def _forward_activations(model: MlpModel, x: np.ndarray) -> list[np.ndarray]:
    """Activations per layer for a batch; the last entry holds raw logits."""
    acts = [x]
    h = x
    last = len(model.weights) - 1
    for l, (w, b) in enumerate(zip(model.weights, model.biases)):
        z = h @ w + b
        if l < last:
            z = np.maximum(z, 0.0)
        acts.append(z)
        h = z
    return acts


def _softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=-1, keepdims=True)


def forward(model: MlpModel, features: np.ndarray) -> np.ndarray:
    """Class probabilities; index i-1 corresponds to teammate unum i."""
    features = np.asarray(features, dtype=np.float64)
    single = features.ndim == 1
    x = features[None, :] if single else features
    if x.shape[-1] != model.dims[0]:
        raise ValueError(f"expected {model.dims[0]} features, got {x.shape[-1]}")
    probs = _softmax(_forward_activations(model, x)[-1])
    return probs[0] if single else probs


def loss_and_gradients(
    model: MlpModel, batch: Sequence[LabeledSample] | tuple[np.ndarray, np.ndarray],
    l2: float = 0.0,
) -> tuple[float, list[np.ndarray], list[np.ndarray]]:
    """Mean cross-entropy over the batch and gradients for every parameter.

    Labels are uniform numbers 1..11 mapped to class indices 0..10. With
    l2 > 0 the loss gains l2/2 * sum ||W||^2 (weights only).
    """
    if isinstance(batch, tuple):
        x, y = batch
    else:
        if len(batch) == 0:
            raise ValueError("empty batch")
        x = np.stack([s.features for s in batch])
        y = np.array([s.label - 1 for s in batch], dtype=np.intp)
    if x.shape[0] == 0:
        raise ValueError("empty batch")
    n = x.shape[0]

    acts = _forward_activations(model, x)
    logits = acts[-1]
    shifted = logits - logits.max(axis=1, keepdims=True)
    log_z = np.log(np.exp(shifted).sum(axis=1))
    log_probs = shifted - log_z[:, None]
    loss = -log_probs[np.arange(n), y].mean()

    probs = np.exp(log_probs)
    delta = probs
    delta[np.arange(n), y] -= 1.0
    delta /= n

    grads_w: list[np.ndarray] = [None] * len(model.weights)  # type: ignore[list-item]
    grads_b: list[np.ndarray] = [None] * len(model.biases)  # type: ignore[list-item]
    for l in range(len(model.weights) - 1, -1, -1):
        grads_w[l] = acts[l].T @ delta
        grads_b[l] = delta.sum(axis=0)
        if l > 0:
            delta = (delta @ model.weights[l].T) * (acts[l] > 0.0)
    if l2 > 0.0:
        loss += 0.5 * l2 * sum(float((w * w).sum()) for w in model.weights)
        for l, w in enumerate(model.weights):
            grads_w[l] = grads_w[l] + l2 * w
    return loss, grads_w, grads_b


def accuracy(model: MlpModel, samples: Sequence[LabeledSample], batch: int = 1024) -> float:
    """Top-1 accuracy; empty input counts as 0."""
    if not samples:
        return 0.0
    x = np.stack([s.features for s in samples])
    y = np.array([s.label - 1 for s in samples], dtype=np.intp)
    hits = 0
    for i in range(0, len(samples), batch):
        probs = forward(model, x[i:i + batch])
        hits += int((probs.argmax(axis=1) == y[i:i + batch]).sum())
    return hits / len(samples)


def _fold_standardization(model: MlpModel, mean: np.ndarray, std: np.ndarray) -> MlpModel:
    """Absorb (x - mean) / std into the first layer; output model eats raw features."""
    w0 = model.weights[0] / std[:, None]
    b0 = model.biases[0] - (mean / std) @ model.weights[0]
    folded = model.copy()
    folded.weights[0] = w0
    folded.biases[0] = b0
    return folded


def train(
    model: MlpModel,
    train_set: Sequence[LabeledSample],
    test_set: Sequence[LabeledSample],
    config: TrainConfig = TrainConfig(),
) -> tuple[MlpModel, list[EpochStats]]:
    """Minibatch SGD with per-epoch seeded shuffling; deterministic per seed.

    Returns the trained model and per-epoch train loss / test accuracy.
    """
    if not train_set:
        raise ValueError("empty training set")
    x = np.stack([s.features for s in train_set])
    y = np.array([s.label - 1 for s in train_set], dtype=np.intp)
    if x.shape[1] != model.dims[0]:
        raise ValueError(f"feature dim {x.shape[1]} does not match model input {model.dims[0]}")
    if int(y.max()) >= model.dims[-1] or int(y.min()) < 0:
        raise ValueError("label outside model output range")

    if config.standardize:
        mean = x.mean(axis=0)
        std = x.std(axis=0)
        std[std < 1e-8] = 1.0
        x = (x - mean) / std
        test_set = [replace(s, features=(s.features - mean) / std) for s in test_set]

    work = model.copy()
    rng = np.random.default_rng(config.seed)
    history: list[EpochStats] = []
    n = len(train_set)
    for epoch in range(1, config.epochs + 1):
        perm = rng.permutation(n)
        total = 0.0
        batches = 0
        for start in range(0, n, config.batch_size):
            idx = perm[start:start + config.batch_size]
            loss, gw, gb = loss_and_gradients(work, (x[idx], y[idx]), l2=config.l2)
            for l in range(len(work.weights)):
                work.weights[l] -= config.learning_rate * gw[l]
                work.biases[l] -= config.learning_rate * gb[l]
            total += loss
            batches += 1
        history.append(EpochStats(epoch, total / batches, accuracy(work, test_set)))

    if config.standardize:
        work = _fold_standardization(work, mean, std)
    return work, history


# --- model file --------------------------------------------------------------


def save_model(model: MlpModel, path: str) -> None:
    doc = {
        "schema": MODEL_SCHEMA,
        "dims": list(model.dims),
        "layers": [
            {"w": [float(v) for v in w.ravel()], "b": [float(v) for v in b]}
            for w, b in zip(model.weights, model.biases)
        ],
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh)


def load_model(path: str) -> MlpModel:
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    if doc.get("schema") != MODEL_SCHEMA:
        raise ValueError(f"{path}: unsupported model schema {doc.get('schema')!r}")
    dims = tuple(int(d) for d in doc["dims"])
    weights = []
    biases = []
    for (fan_in, fan_out), layer in zip(zip(dims[:-1], dims[1:]), doc["layers"]):
        w = np.array(layer["w"], dtype=np.float64).reshape(fan_in, fan_out)
        b = np.array(layer["b"], dtype=np.float64)
        weights.append(w)
        biases.append(b)
    if len(weights) != len(dims) - 1:
        raise ValueError(f"{path}: layer count does not match dims")
    return MlpModel(dims, weights, biases)


# --- probability backends ----------------------------------------------------


class MlpPredictor:
    """Pass-probability backend over a trained (or fresh) MLP."""

    def __init__(self, model: MlpModel, config: Config = DEFAULT_CONFIG):
        self.model = model
        self.config = config

    def pass_probabilities(self, state: GameState) -> np.ndarray:
        return forward(self.model, extract_features(state, self.config))


class HeuristicPredictor:
    """Model-free backend: softmax over the geometric labeling scores."""

    def __init__(self, config: Config = DEFAULT_CONFIG):
        self.config = config

    def pass_probabilities(self, state: GameState) -> np.ndarray:
        from .extractor import _candidate_score
        from .motion import pack_state

        if state.ball_owner is None:
            raise ValueError("state has no ball owner")
        packed = pack_state(state)
        scores = np.full(11, -np.inf)
        for p in state.teammates:
            if p.unum == state.ball_owner:
                continue
            scores[p.unum - 1] = _candidate_score(state, p.unum, self.config, packed)
        return _softmax(scores)


class TabulatedPredictor:
    """Fixed probability rows keyed by ball owner; for tests and analysis."""

    def __init__(self, table: dict[int, np.ndarray]):
        self.table = {k: np.asarray(v, dtype=np.float64) for k, v in table.items()}

    def pass_probabilities(self, state: GameState) -> np.ndarray:
        if state.ball_owner is None:
            raise ValueError("state has no ball owner")
        return self.table[state.ball_owner]


def predict_targets(
    predictor,
    state: GameState,
    ignored: frozenset[int] | set[int] = frozenset(),
    config: Config = DEFAULT_CONFIG,
) -> list[PassStateValue]:
    """Up to two best pass candidates with hypothetical successor states.

    Probabilities of ignored players and the ball owner are zeroed before
    picking the two highest remaining entries (ties to the lower unum). Each
    outcome is the state after a straight pass to the receiver's current
    position; the intended receiver is assumed to collect it, and the value
    is the raw masked probability (not renormalized).
    """
    if state.ball_owner is None:
        raise ValueError("state has no ball owner")
    probs = np.asarray(predictor.pass_probabilities(state), dtype=np.float64)
    if probs.shape != (11,):
        raise ValueError(f"predictor must produce 11 probabilities, got {probs.shape}")
    owner = state.ball_owner
    blocked = set(ignored) | {owner}
    eligible = [u for u in range(1, 12) if u not in blocked]
    eligible.sort(key=lambda u: (-probs[u - 1], u))

    results: list[PassStateValue] = []
    for receiver in eligible[:2]:
        value = float(probs[receiver - 1])
        target = state.teammate(receiver).pos
        if state.ball.pos.dist(target) <= 1e-9:
            # degenerate: receiver already on the ball spot; hand the ball over in place
            outcome = fast_forward(
                state,
                _receiver_here(receiver, target, config),
                config,
            )
        else:
            spec = PassSpec(state.ball.pos, target, config.pass_speed)
            res = simulate_pass(state, spec, receiver_hint=receiver, config=config)
            if not (res.intercepted and res.side is Side.TEAMMATE and res.unum == receiver):
                res = receiver_interception(state, spec, receiver, config)
            outcome = fast_forward(state, res, config)
        results.append(PassStateValue(passer=owner, receiver=receiver, outcome=outcome, value=value))
    return results


def _receiver_here(receiver: int, point, config: Config):
    from .motion import InterceptResult

    return InterceptResult(True, Side.TEAMMATE, receiver, config.reaction_delay, point)
