"""Acceptance gate: emitted files must round-trip through the selection toolkit.

Prints one `ACCEPTANCE <n> <name>: PASS|FAIL` line, following the toolkit's
own acceptance suite.
"""

import functools

import pytest
import torch
from torchvision import models

from zooselect.catalog import load_model_manifest
from zooselect.store import DataStore

from zooextract.backbone import param_count, strip_head
from zooextract.extract import ExtractJob, run


def criterion(num, name):
    def deco(fn):
        @functools.wraps(fn)
        def wrapper(*args, **kwargs):
            try:
                fn(*args, **kwargs)
            except BaseException:
                print(f"ACCEPTANCE {num} {name}: FAIL")
                raise
            print(f"ACCEPTANCE {num} {name}: PASS")
        return wrapper
    return deco


@criterion(9, "extractor output readable by the toolkit")
def test_extractor_output_round_trips_through_the_toolkit(pets_dir, tmp_path):
    torch.manual_seed(7)
    sd_path = tmp_path / "shufflenet.pt"
    torch.save(models.shufflenet_v2_x0_5(weights=None).state_dict(), sd_path)

    out = tmp_path / "out"
    job = ExtractJob(
        model_ref="shufflenet_v2_x0_5",
        data_dir=pets_dir,
        out_dir=out,
        n_train=10,
        n_val=4,
        weights_path=sd_path,
    )
    result = run(job)

    store = DataStore(out)
    train = store.load_embedding(result.model_id, result.task_id, "train")
    val = store.load_embedding(result.model_id, result.task_id, "val")
    # n and d as requested; d is the backbone's representation width
    assert (train.n, val.n) == (job.n_train, job.n_val)
    assert train.d == val.d == result.dim == 1024
    assert train.n_classes == val.n_classes == 2
    assert train.labels.tolist() == [0, 1] * 5
    assert val.labels.tolist() == [0, 1, 0, 1]

    catalog = load_model_manifest(out / "models.csv")
    record = catalog.get("shufflenet_v2_x0_5")
    assert record.embedding_dim == 1024
    reference = models.shufflenet_v2_x0_5(weights=None)
    strip_head(reference)
    assert record.param_count == param_count(reference) >= 1
    assert record.imagenet_accuracy is None
    assert record.tags == frozenset()
