"""Proxy scorers against hand-checked and brute-force references."""

import numpy as np
import pytest

from zooselect.catalog import Pool
from zooselect.errors import (
    CacheConflictError,
    ConfigError,
    DimensionMismatchError,
    MissingEmbeddingError,
)
from zooselect.proxy import (
    KnnConfig,
    LinearEvalConfig,
    config_digest,
    default_config,
    evaluate_proxy,
    knn_eval,
    linear_eval,
    score_pool,
)
from zooselect.rng import SplitMix64
from zooselect.store import DataStore, EmbeddingMatrix
from zooselect.synth import SynthConfig, generate


def mat(features, labels, n_classes, split="train", model_id="m", task_id="t"):
    return EmbeddingMatrix(
        model_id=model_id,
        task_id=task_id,
        split=split,
        n_classes=n_classes,
        labels=np.asarray(labels),
        features=np.asarray(features, dtype=np.float32),
    )


def brute_knn(train, val, k):
    """All-pairs scalar reference; same tie rules, different arithmetic path."""
    correct = 0
    for v, true_lab in zip(val.features, val.labels):
        dists = [
            float(((v.astype(np.float64) - t.astype(np.float64)) ** 2).sum())
            for t in train.features
        ]
        order = sorted(range(train.n), key=lambda i: (dists[i], i))[:k]
        labs = [int(train.labels[i]) for i in order]
        counts = {}
        for lab in labs:
            counts[lab] = counts.get(lab, 0) + 1
        top = max(counts.values())
        pred = next(lab for lab in labs if counts[lab] == top)
        correct += int(pred == int(true_lab))
    return correct / val.n


def test_knn_hand_example():
    train = mat([[0, 0], [10, 10]], [0, 1], 2)
    # (6,6) sits nearer (10,10): predicted 1, true 0
    val = mat([[1, 1], [9, 9], [6, 6]], [0, 1, 0], 2, split="val")
    assert knn_eval(train, val) == pytest.approx(2 / 3)


def test_knn_perfect_on_itself():
    stream = SplitMix64(2)
    train = mat(stream.normal(60).reshape(20, 3), np.arange(20) % 4, 4)
    val = mat(train.features, train.labels, 4, split="val")
    assert knn_eval(train, val) == 1.0


def test_knn_matches_brute_force_on_random_instances():
    # integer-valued features keep both distance computations exact, so
    # deliberate distance ties exercise the lowest-index rule
    stream = SplitMix64(13)
    for trial in range(40):
        n_classes = 2 + stream.choice(3)
        n_train = n_classes + stream.choice(40)
        n_val = 1 + stream.choice(20)
        d = 1 + stream.choice(8)
        k = 1 + stream.choice(min(3, n_train))

        def draw(n):
            feats = (stream.uint64(n * d) % np.uint64(9)).astype(np.float32).reshape(n, d) - 4.0
            labs = (stream.uint64(n) % np.uint64(n_classes)).astype(np.int64)
            return feats, labs

        tf, tl = draw(n_train)
        tl[:n_classes] = np.arange(n_classes)  # every class seen at least once
        vf, vl = draw(n_val)
        train = mat(tf, tl, n_classes)
        val = mat(vf, vl, n_classes, split="val")
        got = knn_eval(train, val, KnnConfig(k=k))
        assert got == brute_knn(train, val, k), f"trial {trial}, k={k}"


def test_knn_distance_tie_takes_lowest_train_row():
    val = mat([[1.0, 1.0]], [1], 2, split="val")
    assert knn_eval(mat([[1, 1], [1, 1]], [1, 0], 2), val) == 1.0
    assert knn_eval(mat([[1, 1], [1, 1]], [0, 1], 2), val) == 0.0


def test_knn_vote_tie_takes_closest_neighbor():
    train = mat([[0.0], [0.5], [0.6]], [0, 1, 1], 2)
    val = mat([[0.1]], [0], 2, split="val")
    # k=2 splits the vote 1-1; the nearer neighbor (row 0) decides
    assert knn_eval(train, val, KnnConfig(k=2)) == 1.0
    assert knn_eval(train, val, KnnConfig(k=3)) == 0.0


def test_knn_invariant_under_train_permutation():
    stream = SplitMix64(4)
    train_x = stream.normal(90).reshape(30, 3)
    train_y = (stream.uint64(30) % np.uint64(3)).astype(np.int64)
    val = mat(stream.normal(36).reshape(12, 3), (stream.uint64(12) % np.uint64(3)).astype(np.int64), 3, split="val")
    base = knn_eval(mat(train_x, train_y, 3), val, KnnConfig(k=3))
    perm = stream.permutation(30)
    shuffled = knn_eval(mat(train_x[perm], train_y[perm], 3), val, KnnConfig(k=3))
    assert base == shuffled


def test_knn_config_validation():
    train = mat([[0.0], [1.0]], [0, 1], 2)
    val = mat([[0.2]], [0], 2, split="val")
    with pytest.raises(ConfigError):
        KnnConfig(k=0)
    with pytest.raises(ConfigError):
        knn_eval(train, val, KnnConfig(k=3))


def test_split_pair_checks():
    train = mat([[0.0, 0.0]], [0], 2)
    with pytest.raises(DimensionMismatchError):
        knn_eval(train, mat([[0.0]], [0], 2, split="val"))
    with pytest.raises(DimensionMismatchError):
        knn_eval(train, mat([[0.0, 0.0]], [0], 3, split="val"))
    with pytest.raises(ConfigError):
        knn_eval(train, mat([[0.0, 0.0]], [0], 2, split="val", task_id="other"))


def two_blob(margin=10.0, per_class_train=100, per_class_val=20, sd=1.0, seed=5):
    stream = SplitMix64(seed)

    def split(per_class, name):
        n = 2 * per_class
        centers = np.where(np.arange(n) < per_class, -margin, margin)
        feats = (centers + sd * stream.normal(n)).reshape(n, 1)
        labs = (np.arange(n) >= per_class).astype(np.int64)
        return mat(feats, labs, 2, split=name)

    return split(per_class_train, "train"), split(per_class_val, "val")


def test_linear_separable_blobs():
    train, val = two_blob()
    score = linear_eval(train, val)
    assert score >= 0.95
    # identical inputs and config give identical output
    assert linear_eval(train, val) == score


def test_linear_degenerate_single_class():
    train = mat([[1.0], [2.0], [1.5]], [0, 0, 0], 2)
    val = mat([[1.0], [1.2], [9.0], [1.1]], [0, 1, 0, 0], 2, split="val")
    # zero init plus one-class gradients can only ever favor class 0
    assert linear_eval(train, val) == 0.75


def test_linear_minibatch_path_learns_and_is_deterministic():
    train, val = two_blob(per_class_train=40, per_class_val=10, seed=9)
    cfg = LinearEvalConfig(batch_size=16, steps=200, repeats=3, seed=1)
    score = linear_eval(train, val, cfg)
    assert score >= 0.95
    assert linear_eval(train, val, cfg) == score
    # a different probe seed still scores in range
    other = linear_eval(train, val, LinearEvalConfig(batch_size=16, steps=200, repeats=3, seed=2))
    assert 0.0 <= other <= 1.0


def test_linear_config_validation():
    with pytest.raises(ConfigError):
        LinearEvalConfig(learning_rates=())
    with pytest.raises(ConfigError):
        LinearEvalConfig(steps=0)
    with pytest.raises(ConfigError):
        LinearEvalConfig(repeats=0)
    with pytest.raises(ConfigError):
        LinearEvalConfig(batch_size=0)


def test_default_configs_and_digests():
    assert default_config("knn") == KnnConfig()
    lin = default_config("linear")
    assert lin.learning_rates == (0.1, 0.01)
    assert lin.steps == 2500 and lin.repeats == 5 and lin.batch_size == 512
    with pytest.raises(ConfigError):
        default_config("svm")

    d_knn = config_digest("knn", KnnConfig())
    assert len(d_knn) == 16 and d_knn == config_digest("knn", KnnConfig())
    assert d_knn != config_digest("knn", KnnConfig(k=3))
    assert d_knn != config_digest("linear", lin)


def test_evaluate_proxy_dispatch():
    train, val = two_blob(per_class_train=10, per_class_val=5)
    assert evaluate_proxy(train, val, "knn") == knn_eval(train, val)
    with pytest.raises(ConfigError):
        evaluate_proxy(train, val, "ridge")


@pytest.fixture(scope="module")
def small_store(tmp_path_factory):
    root = tmp_path_factory.mktemp("small") / "data"
    cfg = SynthConfig(
        n_models=3, n_tasks=2, n_experts=1, seed=3,
        n_train=24, n_val=24, n_test=8, n_classes=2, dims=(4, 8),
    )
    generate(cfg, root)
    store = DataStore(root)
    pool = Pool("all", tuple(store.load_models().model_ids))
    return store, pool


def test_score_pool_caches_by_digest(small_store):
    store, pool = small_store
    first = score_pool(pool, "t0", "knn", store)
    assert set(first.scores) == set(pool.model_ids)
    assert first.computed == list(pool.model_ids)
    assert all(0.0 <= s <= 1.0 for s in first.scores.values())

    second = score_pool(pool, "t0", "knn", store)
    assert second.computed == []
    assert second.cache_hits == list(pool.model_ids)
    assert second.scores == first.scores

    # a changed config would shadow the stored scores; the cache refuses it
    with pytest.raises(CacheConflictError):
        score_pool(pool, "t0", "knn", store, cfg=KnnConfig(k=3))


def test_score_pool_parallel_matches_serial(small_store):
    from zooselect.store import ProxyScoreTable

    store, pool = small_store
    serial = score_pool(pool, "t1", "knn", store, cfg=KnnConfig(k=2), cache=ProxyScoreTable(), jobs=1)
    assert serial.computed == list(pool.model_ids)
    parallel = score_pool(pool, "t1", "knn", store, cfg=KnnConfig(k=2), cache=ProxyScoreTable(), jobs=2)
    assert parallel.scores == serial.scores

    shared = ProxyScoreTable()
    once = score_pool(pool, "t1", "knn", store, cfg=KnnConfig(k=2), cache=shared, jobs=2)
    again = score_pool(pool, "t1", "knn", store, cfg=KnnConfig(k=2), cache=shared, jobs=1)
    assert again.computed == []
    assert again.scores == once.scores


def test_score_pool_reports_missing_embeddings(small_store, tmp_path):
    store, pool = small_store
    bare = DataStore(tmp_path / "empty")
    with pytest.raises(MissingEmbeddingError) as exc:
        score_pool(pool, "t0", "knn", bare)
    assert "t0" in str(exc.value)
