import pytest

from zooselect.catalog import builtin_pool
from zooselect.proxy import score_pool
from zooselect.store import DataStore
from zooselect.synth import SynthConfig, generate

EXPERT_SCENARIO = SynthConfig(n_models=12, n_tasks=6, n_experts=2, seed=7, accuracy_noise_sd=0.0)


class ScoredSuite:
    """Generated benchmark plus proxy scores for every (model, task)."""

    def __init__(self, root, plan):
        self.root = root
        self.plan = plan
        self.store = DataStore(root)
        self.catalog = self.store.load_models()
        self.tasks = self.store.load_tasks()
        self.table = self.store.load_accuracy()
        self.pool = builtin_pool(self.catalog, "all")
        self.cache = self.store.load_proxy_cache()
        self.scores = {}
        for kind in ("knn", "linear"):
            for task in self.tasks:
                result = score_pool(
                    self.pool, task.task_id, kind, self.store, cache=self.cache, jobs=1
                )
                self.scores[(kind, task.task_id)] = result.scores
        self.store.save_proxy_cache(self.cache)


@pytest.fixture(scope="session")
def expert_suite(tmp_path_factory):
    """The 12-model / 6-task / 2-expert scenario, scored once per session."""
    root = tmp_path_factory.mktemp("expert_suite") / "data"
    plan = generate(EXPERT_SCENARIO, root)
    return ScoredSuite(root, plan)
