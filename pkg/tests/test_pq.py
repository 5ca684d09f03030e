"""Proactive querying: subtree norms, node selection, norm preservation."""

import numpy as np

from privcache.linalg import l1_norm
from privcache.proactive import compute_subtree_norms, search_proactive_nodes
from privcache.schema import Attribute, DomainSchema
from privcache.tree import CombinedTree, StrategyTree, decompose_marginal


def setup(size=8, k=2):
    view = DomainSchema((Attribute("v", "int_range", size),)).view(["v"])
    tree = StrategyTree("v", size, k)
    return view, tree, {"v": tree}


A2 = [((2, 4),), ((4, 6),), ((3, 4),), ((6, 7),)]
P2 = [((2, 4),), ((3, 4),)]


class TestSubtreeNorms:
    def test_empty_paid_all_zero(self):
        view, tree, trees = setup()
        combined = CombinedTree(trees, view, [((0, 1),)])
        norms = compute_subtree_norms(combined, [])
        assert set(norms.values()) == {0}

    def test_figure_annotations(self):
        # marks are the whole instant strategy (free rows included), matching
        # the annotated example tree
        view, tree, trees = setup()
        combined = CombinedTree(trees, view, A2)
        norms = compute_subtree_norms(combined, A2)
        assert norms[((0, 8),)] == 2
        assert norms[((2, 4),)] == 2
        assert norms[((4, 8),)] == 1
        assert norms[((0, 2),)] == 0
        assert norms[((6, 8),)] == 1

    def test_root_norm_matches_l1_oracle(self):
        rng = np.random.default_rng(5)
        for _ in range(60):
            size = int(rng.integers(2, 33))
            view, tree, trees = setup(size, int(rng.integers(2, 4)))
            nodes = rng.choice(len(tree.nodes), size=int(rng.integers(1, 7)), replace=False)
            marked = [((tree.node(int(i)).lo, tree.node(int(i)).hi),) for i in nodes]
            marked = list(dict.fromkeys(marked))
            combined = CombinedTree(trees, view, marked)
            norms = compute_subtree_norms(combined, marked)
            # oracle: dense column sums
            assert norms[combined.root.key] == l1_norm([view.mask(k) for k in marked])


class TestSearchProactiveNodes:
    def test_worked_example_output(self):
        view, tree, trees = setup()
        combined = CombinedTree(trees, view, A2)
        budget = l1_norm([view.mask(k) for k in P2])
        got = search_proactive_nodes(combined, A2, P2, cached_keys=[((7, 8),)], budget=budget)
        assert set(got) == {((4, 8),), ((0, 2),), ((0, 1),), ((1, 2),), ((2, 3),)}

    def test_without_precached_leaf_it_is_added(self):
        view, tree, trees = setup()
        combined = CombinedTree(trees, view, A2)
        got = search_proactive_nodes(combined, A2, P2, cached_keys=[], budget=2)
        assert ((7, 8),) in got

    def test_root_paid_exhausts_budget(self):
        view, tree, trees = setup()
        root = [((0, 8),)]
        combined = CombinedTree(trees, view, root)
        got = search_proactive_nodes(combined, root, root, cached_keys=[], budget=1)
        assert got == []

    def test_norm_preservation_random(self):
        rng = np.random.default_rng(7)
        for _ in range(120):
            size = int(rng.integers(2, 33))
            view, tree, trees = setup(size, int(rng.integers(2, 4)))
            picks = rng.choice(len(tree.nodes), size=min(len(tree.nodes), int(rng.integers(1, 6))), replace=False)
            strategy = list(dict.fromkeys(
                ((tree.node(int(i)).lo, tree.node(int(i)).hi),) for i in picks))
            count = int(rng.integers(1, len(strategy) + 1))
            paid = strategy[:count]
            cached = [s for s in strategy if s not in paid]
            others = [((n.lo, n.hi),) for n in tree.nodes]
            cached += [others[int(i)] for i in rng.choice(len(others), size=3)]
            combined = CombinedTree(trees, view, strategy)
            budget = l1_norm([view.mask(k) for k in paid])
            got = search_proactive_nodes(combined, strategy, paid, cached, budget)
            union = [view.mask(k) for k in paid + got]
            assert l1_norm(union) == budget
            # selected nodes never collide with the cache or the paid rows
            assert not set(got) & set(cached)
            assert not set(got) & set(paid)

    def test_path_bound(self):
        view, tree, trees = setup(16)
        strategy = [((0, 8),), ((0, 2),), ((12, 16),)]
        paid = strategy
        combined = CombinedTree(trees, view, strategy)
        budget = l1_norm([view.mask(k) for k in paid])
        got = search_proactive_nodes(combined, strategy, paid, [], budget)
        chosen = [view.mask(k) for k in paid + got]
        depth = np.zeros(16, dtype=int)
        for m in chosen:
            depth += m
        assert depth.max() <= budget

    def test_multi_attribute_norm_preservation(self):
        rng = np.random.default_rng(11)
        schema = DomainSchema(
            (Attribute("a", "int_range", 4), Attribute("b", "int_range", 8))
        )
        view = schema.view(["a", "b"])
        trees = {"a": StrategyTree("a", 4, 2), "b": StrategyTree("b", 8, 2)}
        for _ in range(40):
            lo1 = int(rng.integers(0, 4)); hi1 = int(rng.integers(lo1 + 1, 5))
            lo2 = int(rng.integers(0, 8)); hi2 = int(rng.integers(lo2 + 1, 9))
            strategy = decompose_marginal(((lo1, hi1), (lo2, hi2)), trees, view)
            count = int(rng.integers(1, len(strategy) + 1))
            paid = strategy[:count]
            combined = CombinedTree(trees, view, strategy)
            budget = l1_norm([view.mask(k) for k in paid])
            got = search_proactive_nodes(combined, strategy, paid, [], budget)
            assert l1_norm([view.mask(k) for k in paid + got]) == budget


class TestExtendAnswerIntegration:
    def test_noop_when_no_proactive_rows(self):
        from privcache import mmm
        from privcache.cache import StrategyCache

        view, tree, trees = setup()
        keys = [((0, 8),)]
        cache = StrategyCache(("v",))
        plan = mmm.CostPlan("MMM", keys, [], np.array([]), keys, 4.0, 0.25, 1, np.eye(1))
        mmm.answer_workload(cache, plan, {keys[0]: 3}, np.random.default_rng(0), proactive_keys=[])
        assert sorted(cache.valid_entries()) == keys

    def test_response_values_identical_with_pq_toggled(self):
        # the paid rows draw their noise before the proactive rows, so the
        # analyst-visible response is bit-identical with the module on or off
        from privcache.engine import Engine, EngineConfig, WorkloadRequest
        from privcache.backend import Dataset
        from privcache.schema import RangeQuery, WorstError

        schema = DomainSchema((Attribute("v", "int_range", 8),))
        rng = np.random.default_rng(12)
        data = Dataset.from_records(schema, [{"v": int(rng.integers(8))} for _ in range(80)])
        request = WorkloadRequest(
            (RangeQuery({"v": (2, 6)}), RangeQuery({"v": (3, 7)})), WorstError(20.0, 0.05))
        responses = {}
        for flag in (True, False):
            engine = Engine(schema, data, EngineConfig(
                total_budget=100.0, seed=31, mc_samples=2000, enable_pq=flag))
            responses[flag] = engine.process(request).responses
        assert np.array_equal(responses[True], responses[False])

    def test_charge_unchanged_and_followup_free(self):
        from privcache.engine import Engine, EngineConfig, WorkloadRequest
        from privcache.backend import Dataset
        from privcache.schema import RangeQuery, WorstError

        schema = DomainSchema((Attribute("v", "int_range", 8),))
        rng = np.random.default_rng(3)
        data = Dataset.from_records(schema, [{"v": int(rng.integers(8))} for _ in range(64)])

        def charge_of(enable_pq):
            engine = Engine(schema, data, EngineConfig(
                total_budget=100.0, seed=9, mc_samples=2000, enable_pq=enable_pq))
            first = engine.process(WorkloadRequest(
                (RangeQuery({"v": (2, 6)}), RangeQuery({"v": (3, 7)})), WorstError(20.0, 0.05)))
            return engine, first

        engine_on, first_on = charge_of(True)
        engine_off, first_off = charge_of(False)
        assert first_on.epsilon == first_off.epsilon  # PQ never changes the charge

        # a follow-up covered by proactive rows at a looser requirement is free
        followup = WorkloadRequest((RangeQuery({"v": (0, 2)}),), WorstError(40.0, 0.05))
        assert engine_on.process(followup).epsilon == 0.0
