"""Cheap proxy evaluations on frozen embeddings.

Both proxies fit on the train split and score accuracy on the val split.
Scores are pure functions of (embeddings, config): reruns and any parallel
schedule reproduce them exactly, which is what makes the cache sound.
"""

from __future__ import annotations

import hashlib
import json
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from typing import Dict, List, Optional, Tuple

import numpy as np

from .catalog import Pool
from .errors import (
    ConfigError,
    DimensionMismatchError,
    EmptySplitError,
    MissingEmbeddingError,
    NumericError,
)
from .rng import SplitMix64, derive
from .store import DataStore, EmbeddingMatrix, ProxyScoreTable

PROXY_KINDS = ("knn", "linear")


@dataclass(frozen=True)
class KnnConfig:
    k: int = 1

    def __post_init__(self):
        if self.k < 1:
            raise ConfigError(f"k must be >= 1, got {self.k}")


@dataclass(frozen=True)
class LinearEvalConfig:
    """Softmax probe protocol: per repeat, train once per learning rate for
    `steps` minibatch-SGD updates and keep the best val accuracy; the score
    is the median of the per-repeat bests."""

    learning_rates: Tuple[float, ...] = (0.1, 0.01)
    steps: int = 2500
    batch_size: int = 512
    repeats: int = 5
    seed: int = 0

    def __post_init__(self):
        if not self.learning_rates or any(lr <= 0 for lr in self.learning_rates):
            raise ConfigError("learning_rates must be non-empty and positive")
        if self.steps < 1:
            raise ConfigError("steps must be >= 1")
        if self.batch_size < 1:
            raise ConfigError("batch_size must be >= 1")
        if self.repeats < 1:
            raise ConfigError("repeats must be >= 1")


def default_config(proxy_kind: str):
    if proxy_kind == "knn":
        return KnnConfig()
    if proxy_kind == "linear":
        return LinearEvalConfig()
    raise ConfigError(f"unknown proxy kind {proxy_kind!r}")


def config_digest(proxy_kind: str, cfg) -> str:
    """Stable short digest of the full evaluation configuration."""
    payload = {"proxy_kind": proxy_kind, **asdict(cfg)}
    blob = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()[:16]


def _check_pair(train: EmbeddingMatrix, val: EmbeddingMatrix) -> None:
    if train.n == 0 or val.n == 0:
        raise EmptySplitError("empty split")
    if train.d != val.d:
        raise DimensionMismatchError(f"train d={train.d} vs val d={val.d}")
    if train.n_classes != val.n_classes:
        raise DimensionMismatchError(
            f"train n_classes={train.n_classes} vs val n_classes={val.n_classes}"
        )
    if (train.model_id, train.task_id) != (val.model_id, val.task_id):
        raise ConfigError(
            f"split pair mixes ({train.model_id}, {train.task_id}) "
            f"with ({val.model_id}, {val.task_id})"
        )


def _sq_distances(val_x: np.ndarray, train_x: np.ndarray) -> np.ndarray:
    # ||v - t||^2 expanded; float64 keeps the ordering stable
    v = val_x.astype(np.float64)
    t = train_x.astype(np.float64)
    return (
        (v * v).sum(axis=1)[:, None]
        - 2.0 * (v @ t.T)
        + (t * t).sum(axis=1)[None, :]
    )


def knn_eval(train: EmbeddingMatrix, val: EmbeddingMatrix, cfg: KnnConfig = KnnConfig()) -> float:
    """Val accuracy of a k-nearest-neighbor vote in embedding space.

    Distance ties resolve to the lowest train row index. Vote ties (k > 1)
    resolve to the label of the closest contributing neighbor.
    """
    _check_pair(train, val)
    if cfg.k > train.n:
        raise ConfigError(f"k={cfg.k} larger than train split (n={train.n})")
    d2 = _sq_distances(val.features, train.features)
    if cfg.k == 1:
        # argmin returns the first minimum: the lowest-index tie wins
        preds = train.labels[np.argmin(d2, axis=1)]
    else:
        order = np.argsort(d2, axis=1, kind="stable")[:, : cfg.k]
        preds = np.empty(val.n, dtype=np.int64)
        for i in range(val.n):
            labs = train.labels[order[i]]
            counts = np.bincount(labs, minlength=train.n_classes)
            top = counts.max()
            for lab in labs:
                if counts[lab] == top:
                    preds[i] = lab
                    break
    return float(np.mean(preds == val.labels))


def linear_eval(
    train: EmbeddingMatrix, val: EmbeddingMatrix, cfg: LinearEvalConfig = LinearEvalConfig()
) -> float:
    """Val accuracy of a zero-initialized softmax probe trained by SGD.

    All repeats and learning rates train simultaneously as stacked weight
    tensors; the two learning rates inside one repeat consume identical
    shuffle streams seeded from (cfg.seed, repeat). When the batch covers the
    whole train split the pass is full-batch gradient descent: shuffle order
    cannot change the gradient and every repeat coincides, so a single run
    stands in for all of them.
    """
    _check_pair(train, val)
    n, d = train.n, train.d
    n_classes = train.n_classes
    n_lr = len(cfg.learning_rates)
    batch = min(cfg.batch_size, n)
    full_batch = batch == n
    reps = 1 if full_batch else cfg.repeats

    x_train = train.features.astype(np.float64)
    y_train = train.labels
    x_val = val.features.astype(np.float64)
    y_val = val.labels

    weights = np.zeros((reps, n_lr, d, n_classes))
    bias = np.zeros((reps, n_lr, n_classes))
    lrs = np.asarray(cfg.learning_rates, dtype=np.float64)
    eye = np.eye(n_classes)
    streams = [SplitMix64(derive(cfg.seed, r)) for r in range(reps)]

    if full_batch:
        xb_full = x_train[None]
        xbt_full = xb_full[:, None].transpose(0, 1, 3, 2)
        onehot_full = eye[y_train][None, None]
        take_full = np.broadcast_to(y_train[None, None, :, None], (reps, n_lr, n, 1))

    done = 0
    while done < cfg.steps:
        if full_batch:
            perms = None
            spans = [(0, n)]
        else:
            perms = np.stack([s.permutation(n) for s in streams])
            spans = [(lo, min(lo + batch, n)) for lo in range(0, n, batch)]
        for lo, hi in spans:
            if done == cfg.steps:
                break
            bs = hi - lo
            if full_batch:
                xb, xbt, onehot, take_idx = xb_full, xbt_full, onehot_full, take_full
            else:
                idx = perms[:, lo:hi]
                yb = y_train[idx]
                xb = x_train[idx]
                xbt = xb[:, None].transpose(0, 1, 3, 2)
                onehot = eye[yb][:, None]
                take_idx = np.broadcast_to(yb[:, None, :, None], (reps, n_lr, bs, 1))
            logits = xb[:, None] @ weights + bias[:, :, None, :]
            shifted = logits - logits.max(axis=3, keepdims=True)
            expz = np.exp(shifted)
            sumexp = expz.sum(axis=3, keepdims=True)
            loss = -(np.take_along_axis(shifted, take_idx, axis=3) - np.log(sumexp)).mean(axis=2)
            if not np.isfinite(loss).all():
                raise NumericError(
                    f"probe loss non-finite at step {done} for ({train.model_id}, {train.task_id})"
                )
            grad = (expz / sumexp - onehot) / bs
            weights -= lrs[None, :, None, None] * (xbt @ grad)
            bias -= lrs[None, :, None] * grad.sum(axis=2)
            done += 1

    logits_val = x_val[None, None] @ weights + bias[:, :, None, :]
    acc = (logits_val.argmax(axis=3) == y_val).mean(axis=2)
    best_per_repeat = acc.max(axis=1)
    scores = best_per_repeat.tolist() * (cfg.repeats if full_batch else 1)
    return float(statistics.median(scores))


def evaluate_proxy(
    train: EmbeddingMatrix, val: EmbeddingMatrix, proxy_kind: str, cfg=None
) -> float:
    if cfg is None:
        cfg = default_config(proxy_kind)
    if proxy_kind == "knn":
        return knn_eval(train, val, cfg)
    if proxy_kind == "linear":
        return linear_eval(train, val, cfg)
    raise ConfigError(f"unknown proxy kind {proxy_kind!r}")


def _score_one(args) -> float:
    root, model_id, task_id, proxy_kind, cfg = args
    store = DataStore(root)
    train = store.load_embedding(model_id, task_id, "train")
    val = store.load_embedding(model_id, task_id, "val")
    return evaluate_proxy(train, val, proxy_kind, cfg)


@dataclass
class ScorePoolResult:
    task_id: str
    proxy_kind: str
    config_digest: str
    scores: Dict[str, float]
    computed: List[str]
    cache_hits: List[str]


def score_pool(
    pool: Pool,
    task_id: str,
    proxy_kind: str,
    store: DataStore,
    cfg=None,
    jobs: int = 1,
    cache: Optional[ProxyScoreTable] = None,
) -> ScorePoolResult:
    """Score every pool member on one task, reusing cached entries.

    Cache entries only count as hits under the exact config digest. The
    updated cache is persisted unless the caller passed one in (then the
    caller owns persistence).
    """
    if proxy_kind not in PROXY_KINDS:
        raise ConfigError(f"unknown proxy kind {proxy_kind!r}")
    if cfg is None:
        cfg = default_config(proxy_kind)
    if jobs < 1:
        raise ConfigError(f"jobs must be >= 1, got {jobs}")

    digest = config_digest(proxy_kind, cfg)
    own_cache = cache is None
    if own_cache:
        cache = store.load_proxy_cache()

    scores: Dict[str, float] = {}
    todo: List[str] = []
    hits: List[str] = []
    for model_id in pool:
        hit = cache.get(model_id, task_id, proxy_kind, digest)
        if hit is None:
            todo.append(model_id)
        else:
            scores[model_id] = hit
            hits.append(model_id)

    missing = []
    for model_id in todo:
        for split in ("train", "val"):
            if not store.has_embedding(model_id, task_id, split):
                missing.append((model_id, task_id, split))
    if missing:
        raise MissingEmbeddingError(
            "missing embeddings: " + ", ".join(f"({m}, {t}, {s})" for m, t, s in missing)
        )

    if todo:
        work = [(str(store.root), m, task_id, proxy_kind, cfg) for m in todo]
        if jobs == 1 or len(todo) == 1:
            fresh = [_score_one(w) for w in work]
        else:
            with ProcessPoolExecutor(max_workers=jobs) as pool_exec:
                fresh = list(pool_exec.map(_score_one, work))
        for model_id, score in zip(todo, fresh):
            # store at CSV precision so in-memory scores match reloaded ones
            score = float(format(score, ".6f"))
            scores[model_id] = score
            cache.put(model_id, task_id, proxy_kind, score, digest)

    if todo and own_cache:
        store.save_proxy_cache(cache)

    ordered = {m: scores[m] for m in pool}
    return ScorePoolResult(task_id, proxy_kind, digest, ordered, todo, hits)
