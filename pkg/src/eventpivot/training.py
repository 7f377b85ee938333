"""Joint optimization of both stages with Adam and early stopping.

One batch shares a single label-transformation pass: the pivot block is
built once (fresh noise, this epoch's label order) and every sentence in
the batch attends to it, so label-side gradients accumulate across the
batch through the shared subgraph.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .corpus import AnnotatedSentence, CorpusSplit, EventSchema, filter_split_eventful
from .evaluation import EvalReport, score
from .model import EventModel, ModelConfig
from .pivots import shuffle_label_blocks
from .tensor import NumericError, Tensor
from .text import Vocabulary, build_vocab


@dataclass(frozen=True)
class TrainConfig:
    lr: float = 3e-4               # from-scratch scale; 3e-5 suits fine-tuning
    batch_size: int = 8
    max_epochs: int = 50
    patience: int = 5
    dropout_keep: float = 0.9
    tau: float = 0.1
    seed: int = 0
    bypass_lsl: bool = False
    no_labels: bool = False
    small_tc: bool = False
    eventful_only: bool = False
    clip_norm: float = 1.0

    def __post_init__(self):
        problems = []
        if self.batch_size < 1:
            problems.append(f"batch_size must be >= 1, got {self.batch_size}")
        if self.patience > self.max_epochs:
            problems.append(
                f"patience {self.patience} exceeds max_epochs {self.max_epochs}")
        if not 0.0 < self.dropout_keep <= 1.0:
            problems.append(f"dropout_keep {self.dropout_keep} outside (0, 1]")
        if self.lr <= 0:
            problems.append(f"lr must be positive, got {self.lr}")
        if self.tau <= 0:
            problems.append(f"tau must be positive, got {self.tau}")
        if self.max_epochs < 1:
            problems.append("max_epochs must be >= 1")
        if problems:
            raise ValueError("; ".join(problems))

    def resolve_model_config(self, base: ModelConfig | None = None) -> ModelConfig:
        """Fold the schedule and ablation flags into a model configuration."""
        mc = base if base is not None else ModelConfig()
        mc = replace(mc, tau=self.tau, drop_rate=1.0 - self.dropout_keep)
        if self.bypass_lsl:
            mc = replace(mc, lsl_mode="bypass")
        if self.no_labels:
            mc = replace(mc, use_labels=False)
        if self.small_tc:
            mc = replace(mc, tc_layers=max(1, mc.tc_layers // 2))
        return mc


class Adam:
    """Bias-corrected Adam over named parameters.

    ``clip_norm`` rescales the whole gradient (computed from, never written
    to, each tensor's ``.grad``) so the global norm is at most that value.
    """

    def __init__(self, params: dict[str, Tensor], lr: float = 3e-4,
                 beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        self.params = dict(params)
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self.m = {k: np.zeros_like(p.data) for k, p in self.params.items()}
        self.v = {k: np.zeros_like(p.data) for k, p in self.params.items()}

    def zero_grad(self) -> None:
        for p in self.params.values():
            p.zero_grad()

    def step(self, clip_norm: float | None = None) -> float:
        """Apply one update; returns the pre-clip global gradient norm."""
        grads = {}
        sq = 0.0
        for k, p in self.params.items():
            g = p.grad
            if g is None:
                g = np.zeros_like(p.data)
            elif np.isnan(g).any():
                raise NumericError(f"NaN gradient in parameter {k}")
            grads[k] = g
            sq += float((g * g).sum())
        norm = float(np.sqrt(sq))
        scale = 1.0
        if clip_norm is not None and norm > clip_norm:
            scale = clip_norm / norm
        self.t += 1
        bc1 = 1.0 - self.beta1 ** self.t
        bc2 = 1.0 - self.beta2 ** self.t
        for k, p in self.params.items():
            g = grads[k] * scale
            self.m[k] = self.beta1 * self.m[k] + (1.0 - self.beta1) * g
            self.v[k] = self.beta2 * self.v[k] + (1.0 - self.beta2) * (g * g)
            mhat = self.m[k] / bc1
            vhat = self.v[k] / bc2
            p.data -= self.lr * mhat / (np.sqrt(vhat) + self.eps)
        return norm


@dataclass
class TrainLog:
    epochs: list[dict] = field(default_factory=list)
    best_epoch: int = -1
    best_dev_f1: float = 0.0
    stop_reason: str = ""
    grad_untouched: list[str] = field(default_factory=list)

    def record(self, epoch: int, train_loss: float, dev: EvalReport) -> None:
        prev = self.epochs[-1]["running_best_f1"] if self.epochs else dev.f1
        best = max(prev, dev.f1)
        self.epochs.append({
            "epoch": epoch,
            "train_loss": train_loss,
            "dev_precision": dev.precision,
            "dev_recall": dev.recall,
            "dev_f1": dev.f1,
            "running_best_f1": best,
        })

    def to_json(self) -> str:
        return json.dumps({
            "epochs": self.epochs,
            "best_epoch": self.best_epoch,
            "best_dev_f1": self.best_dev_f1,
            "stop_reason": self.stop_reason,
            "grad_untouched": self.grad_untouched,
        }, sort_keys=True, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "TrainLog":
        obj = json.loads(text)
        log = cls(obj["epochs"], obj["best_epoch"], obj["best_dev_f1"],
                  obj["stop_reason"], obj["grad_untouched"])
        return log

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as f:
            f.write(self.to_json())
            f.write("\n")


# ---------------------------------------------------------------------------
# checkpoints


def save_checkpoint(params: dict[str, Tensor], path) -> None:
    obj = {k: {"shape": list(t.data.shape),
               "data": t.data.reshape(-1).tolist()}
           for k, t in params.items()}
    with open(path, "w", encoding="utf-8") as f:
        json.dump(obj, f, sort_keys=True)
        f.write("\n")


def load_checkpoint(path) -> dict[str, np.ndarray]:
    with open(path, encoding="utf-8") as f:
        obj = json.load(f)
    out = {}
    for k, rec in obj.items():
        out[k] = np.asarray(rec["data"], dtype=np.float64).reshape(rec["shape"])
    return out


def apply_checkpoint(model: EventModel, state: dict[str, np.ndarray]) -> None:
    params = model.parameters()
    missing = sorted(set(params) - set(state))
    extra = sorted(set(state) - set(params))
    if missing or extra:
        raise ValueError(
            f"checkpoint does not match model: missing {missing[:5]}, "
            f"unexpected {extra[:5]}")
    for k, t in params.items():
        if state[k].shape != t.data.shape:
            raise ValueError(
                f"checkpoint entry {k} has shape {state[k].shape}, "
                f"model expects {t.data.shape}")
        t.data = state[k].copy()


# ---------------------------------------------------------------------------
# the training loop


def _encode_dataset(model: EventModel, sentences: Sequence[AnnotatedSentence]
                    ) -> list[tuple[np.ndarray, np.ndarray]]:
    out = []
    for s in sentences:
        ids = model.encode_sentence(s.tokens)
        tags = model.tags.encode_spans(s.triggers, len(ids))
        out.append((ids, tags))
    return out


def evaluate_model(model: EventModel, sentences: Sequence[AnnotatedSentence]
                   ) -> EvalReport:
    pred = predict_sentences(model, sentences)
    return score(sentences, pred)


def predict_sentences(model: EventModel, sentences: Sequence[AnnotatedSentence]
                      ) -> dict[tuple[str, str], list]:
    pivots = model.eval_pivots()
    out = {}
    for s in sentences:
        tags = model.predict_tags(model.encode_sentence(s.tokens), pivots)
        out[s.key] = model.tags.decode_tags(tags)
    return out


def train(config: TrainConfig, corpus: CorpusSplit, schema: EventSchema,
          model_config: ModelConfig | None = None,
          vocab: Vocabulary | None = None) -> tuple[EventModel, TrainLog]:
    """Train on the corpus's train split, early-stopping on dev F1.

    Returns the model restored to its best-dev-F1 state plus the log. Same
    config and corpus always produce the same result; all randomness flows
    from ``config.seed`` through purpose-specific child generators.
    """
    if config.eventful_only:
        corpus = filter_split_eventful(corpus)
    if vocab is None:
        vocab = build_vocab((s.tokens for s in corpus.train), schema)
    mc = config.resolve_model_config(model_config)

    ss = np.random.SeedSequence(config.seed)
    init_rng, order_rng, noise_rng, shuffle_rng = (
        np.random.default_rng(c) for c in ss.spawn(4))
    model = EventModel(vocab, schema, mc, init_rng)

    train_lsl = mc.use_labels and mc.lsl_mode != "bypass"
    trainable = model.trainable_parameters(train_lsl=train_lsl)
    opt = Adam(trainable, lr=config.lr)

    data = _encode_dataset(model, corpus.train)
    if not data:
        raise ValueError("training split is empty")

    log = TrainLog()
    best_state: dict[str, np.ndarray] | None = None
    best_f1 = -1.0
    since_best = 0
    touched: dict[str, bool] = {k: False for k in trainable}

    for epoch in range(1, config.max_epochs + 1):
        order = order_rng.permutation(len(data))
        block_order = shuffle_label_blocks(schema, shuffle_rng)
        loss_sum = 0.0
        for lo in range(0, len(order), config.batch_size):
            batch = order[lo:lo + config.batch_size]
            pivots = model.lsl_pivots(train=True, rng=noise_rng,
                                      block_order=block_order)
            total: Tensor | None = None
            for i in batch:
                ids, tags = data[int(i)]
                loss = model.sentence_loss(ids, tags, pivots, train=True,
                                           rng=noise_rng)
                total = loss if total is None else total + loss
            batch_loss = total * (1.0 / len(batch))
            value = batch_loss.item()
            if not np.isfinite(value):
                raise NumericError(
                    f"non-finite training loss {value} at epoch {epoch}, "
                    f"batch starting at {lo}")
            batch_loss.backward()
            if epoch == 1:
                for k, t in trainable.items():
                    if not touched[k] and t.grad is not None and np.any(t.grad):
                        touched[k] = True
            opt.step(clip_norm=config.clip_norm)
            opt.zero_grad()
            loss_sum += value * len(batch)
        if epoch == 1:
            log.grad_untouched = sorted(k for k, v in touched.items() if not v)

        dev = evaluate_model(model, corpus.dev)
        log.record(epoch, loss_sum / len(data), dev)
        if dev.f1 > best_f1:
            best_f1 = dev.f1
            log.best_epoch = epoch
            log.best_dev_f1 = dev.f1
            best_state = {k: t.data.copy() for k, t in model.parameters().items()}
            since_best = 0
        else:
            since_best += 1
            if since_best >= config.patience:
                log.stop_reason = "early_stop"
                break
    if not log.stop_reason:
        log.stop_reason = "max_epochs"

    if best_state is not None:
        for k, t in model.parameters().items():
            t.data = best_state[k]
    return model, log
