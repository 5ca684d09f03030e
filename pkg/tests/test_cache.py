"""Structured cache: lookup partition, latest-wins updates, timestamp groups."""

import numpy as np
import pytest

from privcache.cache import CacheRegistry, StrategyCache


K = lambda lo, hi: ((lo, hi),)


class TestLookup:
    def test_empty_cache_all_misses(self):
        cache = StrategyCache(("v",))
        hits, misses = cache.lookup([K(0, 4), K(4, 6)])
        assert hits == [] and misses == [K(0, 4), K(4, 6)]

    def test_hit_and_miss_partition(self):
        cache = StrategyCache(("v",))
        cache.update([K(0, 4)], 10.0, [3.3], cache.next_timestamp())
        hits, misses = cache.lookup([K(0, 4), K(4, 6)])
        assert [k for k, _ in hits] == [K(0, 4)]
        assert misses == [K(4, 6)]
        assert hits[0][1].b == 10.0

    def test_random_interleaving_matches_replay_oracle(self):
        rng = np.random.default_rng(31)
        cache = StrategyCache(("v",))
        oracle = {}  # plain dict replay of latest writes
        keys = [K(i, i + 1) for i in range(16)]
        for _ in range(1000):
            if rng.random() < 0.5:
                chosen = [keys[i] for i in rng.choice(16, size=rng.integers(1, 5), replace=False)]
                b = float(rng.uniform(0.5, 30))
                vals = list(rng.normal(size=len(chosen)))
                t = cache.next_timestamp()
                cache.update(chosen, b, vals, t)
                for k, v in zip(chosen, vals):
                    oracle[k] = (b, v, t)
            else:
                probe = [keys[i] for i in rng.choice(16, size=4, replace=False)]
                hits, misses = cache.lookup(probe)
                assert {k for k, _ in hits} == {k for k in probe if k in oracle}
                for k, e in hits:
                    assert (e.b, e.value, e.t) == oracle[k]


class TestUpdate:
    def test_latest_wins_both_directions(self):
        cache = StrategyCache(("v",))
        cache.update([K(0, 4)], 10.0, [1.0], cache.next_timestamp())
        cache.update([K(0, 4)], 5.0, [2.0], cache.next_timestamp())
        assert cache.get(K(0, 4)).b == 5.0
        cache.update([K(0, 4)], 10.0, [3.0], cache.next_timestamp())
        assert cache.get(K(0, 4)).b == 10.0  # latest wins even when less accurate

    def test_shared_timestamp_within_event(self):
        cache = StrategyCache(("v",))
        t = cache.next_timestamp()
        cache.update([K(0, 2), K(2, 4)], 7.0, [1.0, 2.0], t)
        assert cache.get(K(0, 2)).t == cache.get(K(2, 4)).t == t

    def test_dimension_mismatch(self):
        cache = StrategyCache(("v",))
        with pytest.raises(ValueError):
            cache.update([K(0, 2)], 7.0, [1.0, 2.0], 1)

    def test_invalid_scale(self):
        cache = StrategyCache(("v",))
        with pytest.raises(ValueError):
            cache.update([K(0, 2)], 0.0, [1.0], 1)


class TestGroupByTimestamp:
    def test_empty(self):
        assert StrategyCache(("v",)).group_by_timestamp() == []

    def test_two_groups(self):
        cache = StrategyCache(("v",))
        cache.update([K(0, 2), K(2, 4), K(4, 6)], 10.0, [1, 2, 3], cache.next_timestamp())
        cache.update([K(6, 7), K(7, 8)], 7.0, [4, 5], cache.next_timestamp())
        groups = cache.group_by_timestamp()
        assert [(t, len(ms), ms[0].b) for t, ms in groups] == [(1, 3, 10.0), (2, 2, 7.0)]

    def test_reconstructs_latest_surviving_writes(self):
        rng = np.random.default_rng(77)
        cache = StrategyCache(("v",))
        events = {}  # event log replay oracle: key -> (t, b, v)
        keys = [K(i, i + 1) for i in range(10)]
        for _ in range(60):
            chosen = [keys[i] for i in rng.choice(10, size=rng.integers(1, 4), replace=False)]
            b = float(rng.uniform(1, 20))
            vals = list(rng.normal(size=len(chosen)))
            t = cache.next_timestamp()
            cache.update(chosen, b, vals, t)
            for k, v in zip(chosen, vals):
                events[k] = (t, b, v)
        flat = {(e.key, e.t, e.b, e.value)
                for _, members in cache.group_by_timestamp() for e in members}
        assert flat == {(k, t, b, v) for k, (t, b, v) in events.items()}

    def test_flatten_is_identity_on_valid_entries(self):
        cache = StrategyCache(("v",))
        cache.update([K(0, 2)], 3.0, [0.5], cache.next_timestamp())
        cache.update([K(2, 4), K(4, 8)], 6.0, [1.5, 2.5], cache.next_timestamp())
        flat = [e.key for _, ms in cache.group_by_timestamp() for e in ms]
        assert sorted(flat) == sorted(cache.valid_entries())


class TestRegistryAndSnapshot:
    def test_independent_per_attribute_set(self):
        reg = CacheRegistry()
        reg.cache(["a"]).update([K(0, 1)], 2.0, [1.0], 1)
        assert len(reg.cache(["b"])) == 0
        assert reg.attribute_sets() == [("a",), ("b",)]

    def test_snapshot_roundtrip(self, tmp_path):
        reg = CacheRegistry()
        cache = reg.cache(["v"])
        cache.update([K(0, 2), K(2, 4)], 9.0, [1.25, -0.5], cache.next_timestamp())
        path = tmp_path / "cache.json"
        reg.save(str(path))
        loaded = CacheRegistry.load(str(path))
        entry = loaded.cache(["v"]).get(K(0, 2))
        assert entry.b == 9.0 and entry.value == 1.25 and entry.t == 1
        # clock resumes monotonically
        assert loaded.cache(["v"]).next_timestamp() == 2

    def test_snapshot_never_contains_ground_truth(self, tmp_path):
        reg = CacheRegistry()
        cache = reg.cache(["v"])
        cache.update([K(0, 2)], 9.0, [1.0], cache.next_timestamp())
        snap = reg.snapshot()
        assert set(snap) == {"version", "caches"}
        assert set(snap["caches"][0]) == {"attrs", "clock", "entries"}
        assert set(snap["caches"][0]["entries"][0]) == {"key", "b", "value", "t"}

    def test_stats(self):
        cache = StrategyCache(("v",))
        cache.update([K(0, 2), K(2, 4)], 9.0, [1, 2], cache.next_timestamp())
        cache.update([K(4, 6)], 4.0, [3], cache.next_timestamp())
        stats = cache.stats()
        assert stats["entries"] == 3
        assert stats["by_timestamp"] == {"1": 2, "2": 1}
        assert stats["best_scale"] == 4.0
