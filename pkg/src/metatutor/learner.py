"""From-scratch MLP Q-network and offline Double-DQN trainer.

The network is 152-16-16-3 (ReLU hidden layers, linear output). Training is
plain SGD on the squared error of the taken action's Q-value against the
double-DQN bootstrap target: the main network selects the next action, the
periodically synchronized target network evaluates it.
"""

from __future__ import annotations

import copy
import json
from dataclasses import dataclass, field, asdict
from typing import Optional, Sequence

import numpy as np

from .domain import Action, Dataset, StudentState, Transition

DEFAULT_LAYER_SIZES = (152, 16, 16, 3)


@dataclass
class QNetwork:
    layer_sizes: tuple
    weights: list  # per layer, shape (fan_in, fan_out)
    biases: list   # per layer, shape (fan_out,)

    def copy(self) -> "QNetwork":
        return QNetwork(self.layer_sizes,
                        [w.copy() for w in self.weights],
                        [b.copy() for b in self.biases])

    def params_equal(self, other: "QNetwork") -> bool:
        return (self.layer_sizes == other.layer_sizes
                and all(np.array_equal(a, b) for a, b in zip(self.weights, other.weights))
                and all(np.array_equal(a, b) for a, b in zip(self.biases, other.biases)))


def init_network(seed, layer_sizes=DEFAULT_LAYER_SIZES) -> QNetwork:
    """He-uniform weights (bound sqrt(6/fan_in)), zero biases."""
    rng = np.random.default_rng(seed)
    sizes = tuple(layer_sizes)
    weights, biases = [], []
    for fan_in, fan_out in zip(sizes, sizes[1:]):
        bound = np.sqrt(6.0 / fan_in)
        weights.append(rng.uniform(-bound, bound, size=(fan_in, fan_out)))
        biases.append(np.zeros(fan_out))
    return QNetwork(sizes, weights, biases)


def _as_features(state) -> np.ndarray:
    if isinstance(state, StudentState):
        return state.features
    return np.asarray(state, dtype=np.float64)


def forward_batch(net: QNetwork, X: np.ndarray) -> np.ndarray:
    h = X
    for W, b in zip(net.weights[:-1], net.biases[:-1]):
        h = np.maximum(h @ W + b, 0.0)
    return h @ net.weights[-1] + net.biases[-1]


def forward(net: QNetwork, state) -> np.ndarray:
    x = _as_features(state)
    if x.shape != (net.layer_sizes[0],):
        raise ValueError(f"state length {x.shape} != {net.layer_sizes[0]}")
    return forward_batch(net, x[None, :])[0]


def ddqn_target(main: QNetwork, target: QNetwork, t: Transition, gamma: float) -> float:
    """r for terminal transitions; else r + gamma * Q_target(s', a*) with a*
    chosen by the main network (argmax ties broken by lowest action index)."""
    if t.terminal:
        return float(t.reward)
    q_main = forward(main, t.next_state)
    a_star = int(np.argmax(q_main))  # np.argmax takes the lowest index on ties
    q_target = forward(target, t.next_state)
    return float(t.reward + gamma * q_target[a_star])


def _batch_arrays(batch: Sequence[Transition], state_size: int):
    n = len(batch)
    S = np.stack([_as_features(t.state) for t in batch])
    A = np.array([t.action.value for t in batch], dtype=np.intp)
    R = np.array([t.reward for t in batch], dtype=np.float64)
    done = np.array([t.terminal for t in batch], dtype=bool)
    SP = np.zeros((n, state_size))
    for i, t in enumerate(batch):
        if not t.terminal:
            SP[i] = _as_features(t.next_state)
    return S, A, R, SP, done


def _batch_targets(main, target, R, SP, done, gamma, reward_scale):
    q_main_next = forward_batch(main, SP)
    a_star = np.argmax(q_main_next, axis=1)
    q_target_next = forward_batch(target, SP)
    bootstrap = q_target_next[np.arange(len(R)), a_star]
    return R * reward_scale + gamma * np.where(done, 0.0, bootstrap)


def _loss_and_grads(net: QNetwork, S, A, targets):
    """MSE over the taken actions' Q-values, with its analytic gradient.

    Only the taken action's output carries an error signal.
    """
    acts = [S]
    pre = []
    h = S
    for W, b in zip(net.weights[:-1], net.biases[:-1]):
        z = h @ W + b
        pre.append(z)
        h = np.maximum(z, 0.0)
        acts.append(h)
    q = h @ net.weights[-1] + net.biases[-1]
    n = len(S)
    idx = np.arange(n)
    pred = q[idx, A]
    diff = pred - targets
    loss = float(np.mean(diff ** 2))

    dq = np.zeros_like(q)
    dq[idx, A] = 2.0 * diff / n
    grads_w, grads_b = [None] * len(net.weights), [None] * len(net.biases)
    delta = dq
    for layer in range(len(net.weights) - 1, -1, -1):
        grads_w[layer] = acts[layer].T @ delta
        grads_b[layer] = delta.sum(axis=0)
        if layer > 0:
            delta = (delta @ net.weights[layer].T) * (pre[layer - 1] > 0.0)
    return loss, grads_w, grads_b


def train_step(main: QNetwork, target: QNetwork, batch, lr: float,
               gamma: float = 0.9, reward_scale: float = 1.0) -> float:
    """One SGD update of the main network on a batch; returns pre-update loss."""
    if not batch:
        raise ValueError("empty batch")
    S, A, R, SP, done = _batch_arrays(batch, main.layer_sizes[0])
    targets = _batch_targets(main, target, R, SP, done, gamma, reward_scale)
    loss, gw, gb = _loss_and_grads(main, S, A, targets)
    for layer in range(len(main.weights)):
        main.weights[layer] -= lr * gw[layer]
        main.biases[layer] -= lr * gb[layer]
    return loss


def gradient_check(net: QNetwork, batch, gamma: float = 0.9, h: float = 1e-5) -> float:
    """Max relative error of analytic gradients vs. central finite
    differences over every parameter (targets held fixed, as in training)."""
    if not batch:
        raise ValueError("empty batch")
    S, A, R, SP, done = _batch_arrays(batch, net.layer_sizes[0])
    frozen = net.copy()
    targets = _batch_targets(frozen, frozen, R, SP, done, gamma, 1.0)
    _, gw, gb = _loss_and_grads(net, S, A, targets)

    def loss_of(n):
        l, _, _ = _loss_and_grads(n, S, A, targets)
        return l

    max_err = 0.0
    work = net.copy()
    for analytic, params in ((gw, work.weights), (gb, work.biases)):
        for g, p in zip(analytic, params):
            it = np.nditer(p, flags=["multi_index"])
            for _ in it:
                i = it.multi_index
                orig = p[i]
                p[i] = orig + h
                lp = loss_of(work)
                p[i] = orig - h
                lm = loss_of(work)
                p[i] = orig
                g_num = (lp - lm) / (2.0 * h)
                g_ana = g[i]
                denom = max(abs(g_ana), abs(g_num), 1e-8)
                max_err = max(max_err, abs(g_ana - g_num) / denom)
    return max_err


@dataclass
class Hyperparams:
    learning_rate: float = 1e-3
    gamma: float = 0.9
    batch_size: int = 32
    sync_every: int = 4
    max_epochs: int = 2000
    seed: int = 0
    reward_scale: float = 1.0   # set to 0.01 for [0,1]-scaled rewards
    patience: int = 50
    tol: float = 1e-6

    def __post_init__(self):
        if not 0.0 <= self.gamma < 1.0:
            raise ValueError("gamma must be in [0, 1)")
        if self.batch_size < 1 or self.sync_every < 1:
            raise ValueError("batch_size and sync_every must be >= 1")


@dataclass
class TrainedModel:
    network: QNetwork
    hyperparams: Hyperparams
    test_mse: float
    train_loss_curve: list = field(default_factory=list)
    test_mse_curve: list = field(default_factory=list)
    schema_id: str = ""


def evaluate_mse(model_or_net, dataset: Dataset, gamma: Optional[float] = None,
                 reward_scale: Optional[float] = None) -> float:
    """Mean squared error of Q(s, a) against the double-DQN target computed
    with the checkpoint's own network as both main and target."""
    if isinstance(model_or_net, TrainedModel):
        net = model_or_net.network
        gamma = model_or_net.hyperparams.gamma if gamma is None else gamma
        if reward_scale is None:
            reward_scale = model_or_net.hyperparams.reward_scale
    else:
        net = model_or_net
        gamma = 0.9 if gamma is None else gamma
        reward_scale = 1.0 if reward_scale is None else reward_scale
    if len(dataset.transitions) == 0:
        raise ValueError("empty dataset")
    S, A, R, SP, done = _batch_arrays(dataset.transitions, net.layer_sizes[0])
    targets = _batch_targets(net, net, R, SP, done, gamma, reward_scale)
    q = forward_batch(net, S)
    pred = q[np.arange(len(S)), A]
    return float(np.mean((pred - targets) ** 2))


def train(train_set: Dataset, test_set: Dataset, hp: Hyperparams) -> TrainedModel:
    """Offline training loop: shuffled epochs in batches of hp.batch_size,
    target network synchronized every hp.sync_every gradient steps, best
    checkpoint selected by held-out MSE. Stops early once the best test MSE
    has improved by less than hp.tol for hp.patience consecutive epochs."""
    if len(train_set) == 0 or len(test_set) == 0:
        raise ValueError("empty dataset")
    if train_set.schema_id != test_set.schema_id:
        raise ValueError("schema mismatch between train and test sets")
    rng = np.random.default_rng(hp.seed)
    main = init_network(hp.seed, (len(train_set.schema), 16, 16, 3))
    target = main.copy()
    transitions = train_set.transitions
    n = len(transitions)
    step = 0
    best_mse = np.inf
    best_net = main.copy()
    stall = 0
    train_curve, test_curve = [], []
    for _epoch in range(hp.max_epochs):
        order = rng.permutation(n)
        losses = []
        for start in range(0, n, hp.batch_size):
            batch = [transitions[i] for i in order[start:start + hp.batch_size]]
            losses.append(train_step(main, target, batch, hp.learning_rate,
                                     hp.gamma, hp.reward_scale))
            step += 1
            if step % hp.sync_every == 0:
                target = main.copy()
        train_curve.append(float(np.mean(losses)))
        mse = evaluate_mse(main, test_set, hp.gamma, hp.reward_scale)
        test_curve.append(mse)
        if mse < best_mse - hp.tol:
            stall = 0
        else:
            stall += 1
        if mse < best_mse:
            best_mse = mse
            best_net = main.copy()
        if stall >= hp.patience:
            break
    return TrainedModel(
        network=best_net, hyperparams=hp, test_mse=best_mse,
        train_loss_curve=train_curve, test_mse_curve=test_curve,
        schema_id=train_set.schema_id,
    )


# ---------------------------------------------------------------------------
# Persistence

def save_model(model: TrainedModel, path) -> None:
    doc = {
        "schema_id": model.schema_id,
        "layer_sizes": list(model.network.layer_sizes),
        "weights": [w.tolist() for w in model.network.weights],
        "biases": [b.tolist() for b in model.network.biases],
        "hyperparams": asdict(model.hyperparams),
        "test_mse": model.test_mse,
        "train_loss_curve": model.train_loss_curve,
        "test_mse_curve": model.test_mse_curve,
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh)


def load_model(path) -> TrainedModel:
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    net = QNetwork(
        tuple(doc["layer_sizes"]),
        [np.array(w, dtype=np.float64) for w in doc["weights"]],
        [np.array(b, dtype=np.float64) for b in doc["biases"]],
    )
    return TrainedModel(
        network=net,
        hyperparams=Hyperparams(**doc["hyperparams"]),
        test_mse=doc["test_mse"],
        train_loss_curve=doc.get("train_loss_curve", []),
        test_mse_curve=doc.get("test_mse_curve", []),
        schema_id=doc["schema_id"],
    )
