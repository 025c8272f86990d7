"""Minimal feed-forward binary classifier with Adam training.

Implements exactly what the two-sample divergence estimators need: a ReLU
MLP with a single logit output, binary cross-entropy (computed on logits for
numerical stability), L2 weight decay, and an unconstrained-critic training
mode for the f-divergence lower bound.  Everything is plain numpy and fully
deterministic given a seed.
"""

from dataclasses import dataclass, field

import numpy as np

from .seeding import derive_seed, rng_from

__all__ = [
    "MlpArchitecture",
    "TrainConfig",
    "MlpClassifier",
    "TrainingDivergedError",
    "mlp_init",
    "forward_logit",
    "predict_proba",
    "predict_logit",
    "bce_loss",
    "loss_and_gradients",
    "adam_step",
    "train_binary_classifier",
    "train_f_mine_critic",
    "f_critic_objective",
]


class TrainingDivergedError(RuntimeError):
    """Loss or a parameter became non-finite during training."""


@dataclass(frozen=True)
class MlpArchitecture:
    """Input width plus ReLU hidden layer sizes; output is a single logit."""

    input_dim: int
    hidden_layer_sizes: tuple[int, ...] = (64, 64)

    def __post_init__(self):
        object.__setattr__(self, "hidden_layer_sizes", tuple(self.hidden_layer_sizes))
        if self.input_dim < 1:
            raise ValueError("input_dim must be positive")
        if len(self.hidden_layer_sizes) < 1:
            raise ValueError("need at least one hidden layer")
        if any(h < 1 for h in self.hidden_layer_sizes):
            raise ValueError("hidden layer sizes must be positive")

    @property
    def layer_dims(self) -> list[tuple[int, int]]:
        dims = [self.input_dim, *self.hidden_layer_sizes, 1]
        return list(zip(dims[:-1], dims[1:]))


@dataclass(frozen=True)
class TrainConfig:
    batch_size: int = 64
    learning_rate: float = 1e-3
    adam_beta1: float = 0.90
    adam_beta2: float = 0.999
    epochs: int = 20
    l2_coefficient: float = 1e-3
    seed: int = 0

    def __post_init__(self):
        if self.batch_size < 1 or self.epochs < 1:
            raise ValueError("batch_size and epochs must be positive")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if not (0 < self.adam_beta1 < 1 and 0 < self.adam_beta2 < 1):
            raise ValueError("Adam betas must lie in (0, 1)")
        if self.l2_coefficient < 0:
            raise ValueError("l2_coefficient must be nonnegative")


ADAM_EPS = 1e-8


@dataclass
class AdamState:
    m_w: list[np.ndarray]
    v_w: list[np.ndarray]
    m_b: list[np.ndarray]
    v_b: list[np.ndarray]
    step: int = 0

    @classmethod
    def zeros_like(cls, weights, biases) -> "AdamState":
        return cls(
            m_w=[np.zeros_like(w) for w in weights],
            v_w=[np.zeros_like(w) for w in weights],
            m_b=[np.zeros_like(b) for b in biases],
            v_b=[np.zeros_like(b) for b in biases],
        )


@dataclass
class MlpClassifier:
    """Weights, biases, and optimizer state of one binary classifier.

    Mutated only while its owning training loop runs; treat as immutable
    afterwards.  ``epoch_losses`` records the full-training-set objective
    after each epoch.
    """

    architecture: MlpArchitecture
    weights: list[np.ndarray]
    biases: list[np.ndarray]
    adam: AdamState
    epoch_losses: list[float] = field(default_factory=list)


def mlp_init(arch: MlpArchitecture, seed: int) -> MlpClassifier:
    """Fan-in-scaled Gaussian weights (He scaling before ReLU), zero biases."""
    rng = rng_from(seed)
    weights, biases = [], []
    n_layers = len(arch.layer_dims)
    for li, (fan_in, fan_out) in enumerate(arch.layer_dims):
        gain = 2.0 if li < n_layers - 1 else 1.0  # ReLU follows all but the last
        weights.append(rng.normal(0.0, np.sqrt(gain / fan_in), size=(fan_in, fan_out)))
        biases.append(np.zeros(fan_out))
    return MlpClassifier(arch, weights, biases, AdamState.zeros_like(weights, biases))


def _forward(c: MlpClassifier, x: np.ndarray):
    """Forward pass on a batch; returns (per-layer inputs, pre-activations, logits)."""
    acts = [x]
    pre = []
    h = x
    last = len(c.weights) - 1
    for li, (w, b) in enumerate(zip(c.weights, c.biases)):
        z = h @ w + b
        pre.append(z)
        h = z if li == last else np.maximum(z, 0.0)
        if li != last:
            acts.append(h)
    return acts, pre, pre[-1][:, 0]


def predict_logit(c: MlpClassifier, x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 1:
        x = x[None, :]
    if x.shape[1] != c.architecture.input_dim:
        raise ValueError(
            f"input has {x.shape[1]} features, classifier expects "
            f"{c.architecture.input_dim}"
        )
    return _forward(c, x)[2]


def forward_logit(c: MlpClassifier, x) -> float:
    """Pre-sigmoid logit for a single input vector."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise ValueError("forward_logit expects a single 1-D input")
    return float(predict_logit(c, x)[0])


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def predict_proba(c: MlpClassifier, x) -> np.ndarray:
    """Predicted probability of class 1 for each row of ``x``."""
    return _sigmoid(predict_logit(c, x))


def bce_loss(probabilities, labels) -> float:
    """Mean binary cross entropy in nats from already-computed probabilities."""
    p = np.asarray(probabilities, dtype=np.float64)
    l = np.asarray(labels, dtype=np.float64)
    if p.shape != l.shape:
        raise ValueError("probabilities and labels must have equal length")
    if p.size == 0:
        raise ValueError("empty inputs")
    if np.any(p <= 0.0) or np.any(p >= 1.0):
        raise ValueError("probabilities must lie strictly inside (0, 1)")
    return float(-np.mean(l * np.log(p) + (1.0 - l) * np.log(1.0 - p)))


def _l2_penalty(c: MlpClassifier, l2: float) -> float:
    if l2 == 0.0:
        return 0.0
    return l2 * float(sum(np.sum(w * w) for w in c.weights))


def _backprop(c: MlpClassifier, acts, pre, dlogit, l2: float):
    """Gradients of (objective + l2 * sum w^2) given d(objective)/d(logit)."""
    grads_w = [None] * len(c.weights)
    grads_b = [None] * len(c.biases)
    delta = dlogit[:, None]
    for li in range(len(c.weights) - 1, -1, -1):
        grads_w[li] = acts[li].T @ delta + 2.0 * l2 * c.weights[li]
        grads_b[li] = delta.sum(axis=0)
        if li > 0:
            delta = (delta @ c.weights[li].T) * (pre[li - 1] > 0)
    return grads_w, grads_b


def loss_and_gradients(c: MlpClassifier, x: np.ndarray, labels: np.ndarray, l2: float = 0.0):
    """Mean BCE (on logits) plus L2 weight penalty, with parameter gradients.

    This is the exact objective optimized by :func:`train_binary_classifier`;
    the logit formulation ``softplus(z) - y*z`` avoids overflow for large
    ``|z|``.
    """
    acts, pre, logit = _forward(c, x)
    y = np.asarray(labels, dtype=np.float64)
    n = x.shape[0]
    softplus = np.maximum(logit, 0.0) + np.log1p(np.exp(-np.abs(logit)))
    loss = float(np.mean(softplus - y * logit)) + _l2_penalty(c, l2)
    dlogit = (_sigmoid(logit) - y) / n
    grads_w, grads_b = _backprop(c, acts, pre, dlogit, l2)
    return loss, grads_w, grads_b


def adam_step(c: MlpClassifier, grads_w, grads_b, cfg: TrainConfig) -> None:
    """One in-place Adam update of all parameters."""
    st = c.adam
    st.step += 1
    b1, b2 = cfg.adam_beta1, cfg.adam_beta2
    c1 = 1.0 - b1**st.step
    c2 = 1.0 - b2**st.step
    for params, grads, ms, vs in (
        (c.weights, grads_w, st.m_w, st.v_w),
        (c.biases, grads_b, st.m_b, st.v_b),
    ):
        for p, g, m, v in zip(params, grads, ms, vs):
            m *= b1
            m += (1.0 - b1) * g
            v *= b2
            v += (1.0 - b2) * g * g
            p -= cfg.learning_rate * (m / c1) / (np.sqrt(v / c2) + ADAM_EPS)


def _balanced_classes(pos, neg, seed: int):
    # Subsample the larger class so Pr(label=1) = 0.5 during training.
    pos = np.asarray(pos, dtype=np.float64)
    neg = np.asarray(neg, dtype=np.float64)
    if pos.ndim != 2 or neg.ndim != 2:
        raise ValueError("pos and neg must be row matrices")
    if pos.shape[0] == 0 or neg.shape[0] == 0:
        raise ValueError("pos and neg must be nonempty")
    if pos.shape[1] != neg.shape[1]:
        raise ValueError("pos and neg must have equal column counts")
    n = min(pos.shape[0], neg.shape[0])
    rng = rng_from(seed, 1)
    if pos.shape[0] > n:
        pos = pos[np.sort(rng.choice(pos.shape[0], size=n, replace=False))]
    if neg.shape[0] > n:
        neg = neg[np.sort(rng.choice(neg.shape[0], size=n, replace=False))]
    return pos, neg


def _check_finite(c: MlpClassifier, loss: float, where: str) -> None:
    if not np.isfinite(loss):
        raise TrainingDivergedError(f"non-finite loss at {where}")
    for w in c.weights:
        if not np.all(np.isfinite(w)):
            raise TrainingDivergedError(f"non-finite parameters at {where}")


def train_binary_classifier(
    pos: np.ndarray, neg: np.ndarray, arch: MlpArchitecture, cfg: TrainConfig
) -> MlpClassifier:
    """Train an MLP to separate ``pos`` rows (label 1) from ``neg`` rows (label 0).

    Minimizes BCE + L2 over shuffled minibatches with Adam for a fixed number
    of epochs.  Classes are balanced by subsampling the larger one; the
    minibatch order is reseeded each epoch from the run seed.
    """
    pos, neg = _balanced_classes(pos, neg, cfg.seed)
    if pos.shape[1] != arch.input_dim:
        raise ValueError(
            f"data has {pos.shape[1]} columns, architecture expects {arch.input_dim}"
        )
    c = mlp_init(arch, derive_seed(cfg.seed, 0))
    x = np.vstack([pos, neg])
    y = np.concatenate([np.ones(pos.shape[0]), np.zeros(neg.shape[0])])
    n = x.shape[0]
    for epoch in range(cfg.epochs):
        perm = rng_from(cfg.seed, 2, epoch).permutation(n)
        for start in range(0, n, cfg.batch_size):
            sl = perm[start : start + cfg.batch_size]
            loss, gw, gb = loss_and_gradients(c, x[sl], y[sl], cfg.l2_coefficient)
            if not np.isfinite(loss):
                raise TrainingDivergedError(
                    f"non-finite loss at epoch {epoch}, batch offset {start}"
                )
            adam_step(c, gw, gb, cfg)
        full, _, _ = loss_and_gradients(c, x, y, cfg.l2_coefficient)
        _check_finite(c, full, f"end of epoch {epoch}")
        c.epoch_losses.append(full)
    return c


def f_critic_objective(c: MlpClassifier, rows_p: np.ndarray, rows_q: np.ndarray) -> float:
    """Value of the f-divergence lower bound E_p[f] - E_q[exp(f - 1)] for critic f."""
    fp = predict_logit(c, rows_p)
    fq = predict_logit(c, rows_q)
    return float(np.mean(fp) - np.mean(np.exp(fq - 1.0)))


def _f_critic_loss_and_grads(c: MlpClassifier, bp: np.ndarray, bq: np.ndarray):
    # Minimize the negated bound: -mean_p f + mean_q exp(f - 1).
    x = np.vstack([bp, bq])
    acts, pre, logit = _forward(c, x)
    np_, nq = bp.shape[0], bq.shape[0]
    fq = logit[np_:]
    eq = np.exp(fq - 1.0)
    loss = -float(np.mean(logit[:np_])) + float(np.mean(eq))
    dlogit = np.concatenate([-np.ones(np_) / np_, eq / nq])
    grads_w, grads_b = _backprop(c, acts, pre, dlogit, 0.0)
    return loss, grads_w, grads_b


F_CRITIC_TRAIN_DEFAULTS = TrainConfig(
    batch_size=128, learning_rate=1e-4, adam_beta1=0.5, adam_beta2=0.999,
    epochs=200, l2_coefficient=0.0,
)


def train_f_mine_critic(
    pos: np.ndarray,
    neg: np.ndarray,
    cfg: TrainConfig = F_CRITIC_TRAIN_DEFAULTS,
    hidden_layer_sizes: tuple[int, ...] = (64,),
) -> MlpClassifier:
    """Train an unconstrained critic maximizing E_pos[f] - E_neg[exp(f-1)].

    ``pos`` rows are the numerator distribution.  The objective's exponential
    can blow up; training aborts with a diagnostic if it goes non-finite.
    """
    pos, neg = _balanced_classes(pos, neg, cfg.seed)
    arch = MlpArchitecture(pos.shape[1], hidden_layer_sizes)
    c = mlp_init(arch, derive_seed(cfg.seed, 0))
    n = pos.shape[0]
    for epoch in range(cfg.epochs):
        rng = rng_from(cfg.seed, 2, epoch)
        perm_p = rng.permutation(n)
        perm_q = rng.permutation(n)
        for start in range(0, n, cfg.batch_size):
            bp = pos[perm_p[start : start + cfg.batch_size]]
            bq = neg[perm_q[start : start + cfg.batch_size]]
            loss, gw, gb = _f_critic_loss_and_grads(c, bp, bq)
            if not np.isfinite(loss):
                raise TrainingDivergedError(
                    "f-critic objective diverged to a non-finite value at "
                    f"epoch {epoch}, batch offset {start}; lower the learning "
                    "rate or epochs"
                )
            adam_step(c, gw, gb, cfg)
        full = -f_critic_objective(c, pos, neg)
        _check_finite(c, full, f"end of epoch {epoch}")
        c.epoch_losses.append(full)
    return c
