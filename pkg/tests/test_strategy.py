"""Ranking strategies: ordering rules, tie chains, hybrid composition."""

from pathlib import Path

import pytest

from zooselect.catalog import (
    ModelCatalog,
    ModelRecord,
    Pool,
    builtin_pool,
    load_model_manifest,
)
from zooselect.errors import BudgetTooLargeError, ConfigError, MissingScoreError
from zooselect.store import AccuracyTable
from zooselect.strategy import (
    Ranking,
    rank_hybrid,
    rank_oracle_task_agnostic,
    rank_task_agnostic,
    rank_task_aware,
    save_selections,
    select_hybrid,
    select_top,
)

ZOO46 = Path(__file__).parent / "data" / "models_zoo46.csv"


@pytest.fixture(scope="module")
def zoo():
    return load_model_manifest(ZOO46)


def small_catalog():
    return ModelCatalog(
        [
            ModelRecord("acc_mid", "Acc mid", 256, 5_000_000, imagenet_accuracy=0.7,
                        upstream_dataset_size=1_000_000),
            ModelRecord("acc_top", "Acc top", 128, 2_000_000, imagenet_accuracy=0.9,
                        upstream_dataset_size=1_000_000),
            ModelRecord("big_data", "Big data", 512, 8_000_000,
                        upstream_dataset_size=10**9),
            ModelRecord("small_data", "Small data", 512, 9_000_000,
                        upstream_dataset_size=10**6),
            ModelRecord("no_data_big", "No data big", 512, 7_000_000),
            ModelRecord("no_data_small", "No data small", 512, 1_000_000),
        ]
    )


def whole(catalog):
    return Pool("all", tuple(catalog.model_ids))


def test_agnostic_order_layers():
    catalog = small_catalog()
    ranking = rank_task_agnostic(whole(catalog), catalog)
    # accuracy block first (descending), then known sizes (descending),
    # then the size-less tail by parameter count
    assert ranking.model_ids == (
        "acc_top", "acc_mid", "big_data", "small_data", "no_data_big", "no_data_small",
    )
    assert ranking.strategy_id == "agnostic"
    assert ranking.task_id == ""


def test_agnostic_tie_falls_back_to_params_then_catalog():
    catalog = ModelCatalog(
        [
            ModelRecord("a", "A", 64, 1_000, imagenet_accuracy=0.5),
            ModelRecord("b", "B", 64, 2_000, imagenet_accuracy=0.5),
            ModelRecord("c", "C", 64, 2_000, imagenet_accuracy=0.5),
        ]
    )
    ranking = rank_task_agnostic(whole(catalog), catalog)
    assert ranking.model_ids == ("b", "c", "a")


def test_agnostic_top_of_reference_zoo(zoo):
    pool = builtin_pool(zoo, "imnetaccuracies")
    ranking = rank_task_agnostic(pool, zoo)
    assert ranking.model_ids[0] == "pnasnet_large"
    assert ranking.model_ids[1] == "nasnet_large"
    # on the full zoo the experts (300M upstream) outrank the 1.28M-example
    # self-supervised block; equal params within the expert block fall back
    # to catalog order
    full = rank_task_agnostic(builtin_pool(zoo, "all"), zoo)
    assert full.model_ids[0] == "pnasnet_large"
    assert full.model_ids[15] == "expert_mode_of_transport"
    assert full.model_ids[31] == "cond_biggan"


def test_aware_orders_by_score_with_agnostic_ties():
    catalog = small_catalog()
    pool = whole(catalog)
    scores = {
        "acc_top": 0.5, "acc_mid": 0.9, "big_data": 0.5,
        "small_data": 0.2, "no_data_big": 0.9, "no_data_small": 0.1,
    }
    ranking = rank_task_aware(pool, "t", scores, catalog, "knn")
    # 0.9 tie: acc_mid precedes no_data_big agnostically; likewise 0.5 tie
    assert ranking.model_ids == (
        "acc_mid", "no_data_big", "acc_top", "big_data", "small_data", "no_data_small",
    )
    assert ranking.strategy_id == "knn"
    assert ranking.task_id == "t"


def test_aware_all_equal_scores_degrade_to_agnostic():
    catalog = small_catalog()
    pool = whole(catalog)
    scores = {m: 0.5 for m in pool}
    ranking = rank_task_aware(pool, "t", scores, catalog, "linear")
    assert ranking.model_ids == rank_task_agnostic(pool, catalog).model_ids


def test_aware_invariant_under_monotone_score_transform():
    catalog = small_catalog()
    pool = whole(catalog)
    scores = {m: 0.1 * (i + 1) for i, m in enumerate(pool)}
    base = rank_task_aware(pool, "t", scores, catalog, "knn")
    squashed = rank_task_aware(pool, "t", {m: s**3 for m, s in scores.items()}, catalog, "knn")
    assert base.model_ids == squashed.model_ids


def test_aware_missing_score_is_an_error():
    catalog = small_catalog()
    pool = whole(catalog)
    with pytest.raises(MissingScoreError) as exc:
        rank_task_aware(pool, "t", {"acc_top": 0.5}, catalog, "knn")
    assert "acc_mid" in str(exc.value)


def hybrid_fixture():
    catalog = ModelCatalog(
        [
            ModelRecord("x", "X", 64, 3_000, imagenet_accuracy=0.9),
            ModelRecord("y", "Y", 64, 2_000, imagenet_accuracy=0.8),
            ModelRecord("z", "Z", 64, 1_000, imagenet_accuracy=0.7),
        ]
    )
    return catalog, whole(catalog)


def test_hybrid_when_agnostic_pick_is_not_aware_top():
    catalog, pool = hybrid_fixture()
    # aware order [y, x, z]
    scores = {"x": 0.8, "y": 0.9, "z": 0.1}
    sel = select_hybrid(pool, "t", scores, catalog, "linear", 2)
    assert sel.model_ids == ("x", "y")
    assert sel.strategy_id == "hybrid-linear"


def test_hybrid_dedupes_shared_top_pick():
    catalog, pool = hybrid_fixture()
    # aware order [x, y, z]: x occupies both slots, so y fills the second
    scores = {"x": 0.9, "y": 0.8, "z": 0.1}
    sel = select_hybrid(pool, "t", scores, catalog, "linear", 2)
    assert sel.model_ids == ("x", "y")


def test_hybrid_is_a_full_ranking_with_nested_prefixes():
    catalog, pool = hybrid_fixture()
    scores = {"x": 0.2, "y": 0.9, "z": 0.5}
    ranking = rank_hybrid(pool, "t", scores, catalog, "knn")
    assert sorted(ranking.model_ids) == ["x", "y", "z"]
    assert ranking.model_ids[0] == "x"  # agnostic pick pinned first
    assert ranking.strategy_id == "hybrid-knn"
    for b in (1, 2, 3):
        sel = select_hybrid(pool, "t", scores, catalog, "knn", b)
        assert sel.model_ids == ranking.model_ids[:b]
    assert select_hybrid(pool, "t", scores, catalog, "knn", 3).model_ids == ("x", "y", "z")


def test_oracle_agnostic_orders_by_mean_aggregate():
    catalog, pool = hybrid_fixture()
    table = AccuracyTable()
    table.add("x", "t1", 0, 0.5)
    table.add("x", "t2", 0, 0.7)
    table.add("y", "t1", 0, 0.8)
    table.add("y", "t2", 0, 0.2)
    table.add("z", "t1", 0, 0.1)
    table.add("z", "t2", 0, 0.1)
    ranking = rank_oracle_task_agnostic(pool, table, catalog)
    # means: x 0.6, y 0.5, z 0.1
    assert ranking.model_ids == ("x", "y", "z")
    assert ranking.strategy_id == "oracle-agnostic"


def test_oracle_agnostic_ties_take_catalog_order():
    catalog, pool = hybrid_fixture()
    table = AccuracyTable()
    for m in ("x", "y", "z"):
        table.add(m, "t1", 0, 0.5)
    ranking = rank_oracle_task_agnostic(pool, table, catalog)
    assert ranking.model_ids == ("x", "y", "z")
    with pytest.raises(ConfigError):
        rank_oracle_task_agnostic(pool, table, catalog, tasks=[])


def test_select_top_prefixes_and_bounds():
    ranking = Ranking("agnostic", "all", "", ("a", "b", "c"))
    assert select_top(ranking, 2).model_ids == ("a", "b")
    assert select_top(ranking, 3).model_ids == ("a", "b", "c")
    prev = ()
    for b in (1, 2, 3):
        cur = select_top(ranking, b).model_ids
        assert cur[: len(prev)] == prev
        prev = cur
    with pytest.raises(ConfigError):
        select_top(ranking, 0)
    with pytest.raises(BudgetTooLargeError):
        select_top(ranking, 4)


def test_selection_csv(tmp_path):
    ranking = Ranking("agnostic", "all", "", ("a", "b"))
    path = tmp_path / "selections.csv"
    save_selections([select_top(ranking, 2)], path)
    lines = path.read_text().splitlines()
    assert lines[0] == "strategy_id,pool_id,task_id,budget,rank,model_id"
    assert lines[1] == "agnostic,all,,2,1,a"
    assert lines[2] == "agnostic,all,,2,2,b"
