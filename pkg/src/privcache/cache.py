"""Structured cache of noisy strategy responses.

One cache per attribute set; one entry per global-strategy row holding the
latest (noise scale, noisy response, timestamp). Timestamps come from a
per-cache monotonic counter bumped once per cache-writing answer, so entries
written together form one group with a single scale. Ground truth is never
stored.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

from .schema import RowKey

SNAPSHOT_VERSION = 1


@dataclass
class CacheEntry:
    key: RowKey
    b: float  # Laplace scale, count units
    value: float  # noisy response
    t: int  # write timestamp; 0 means never answered

    @property
    def valid(self) -> bool:
        return self.t > 0


class StrategyCache:
    """Latest noisy response per strategy row for one attribute set."""

    def __init__(self, attr_names: Sequence[str]):
        self.attr_names = tuple(attr_names)
        self._entries: dict[RowKey, CacheEntry] = {}
        self._clock = 0

    def __len__(self) -> int:
        return len(self._entries)

    def next_timestamp(self) -> int:
        self._clock += 1
        return self._clock

    def get(self, key: RowKey) -> Optional[CacheEntry]:
        entry = self._entries.get(key)
        if entry is not None and entry.valid:
            return entry
        return None

    def lookup(self, keys: Iterable[RowKey]) -> tuple[list[tuple[RowKey, CacheEntry]], list[RowKey]]:
        """Partition rows into cache hits (with entries) and misses."""
        hits, misses = [], []
        for key in keys:
            entry = self.get(key)
            if entry is None:
                misses.append(key)
            else:
                hits.append((key, entry))
        return hits, misses

    def update(self, keys: Sequence[RowKey], b: float, values: Sequence[float], t: int) -> None:
        """Overwrite entries with one write event; latest always wins."""
        if len(keys) != len(values):
            raise ValueError(f"{len(keys)} rows but {len(values)} responses")
        if b <= 0:
            raise ValueError("noise scale must be positive")
        if t <= 0:
            raise ValueError("timestamps start at 1")
        for key, value in zip(keys, values):
            self._entries[key] = CacheEntry(key, float(b), float(value), t)

    def valid_entries(self) -> dict[RowKey, CacheEntry]:
        """Consistent snapshot of all answered rows."""
        return {k: CacheEntry(e.key, e.b, e.value, e.t) for k, e in self._entries.items() if e.valid}

    def group_by_timestamp(self) -> list[tuple[int, list[CacheEntry]]]:
        """Valid entries grouped by write event, oldest first.

        Entries of one group share a single scale because every write event
        uses one scale; asserted here since the RP module depends on it.
        """
        groups: dict[int, list[CacheEntry]] = {}
        for entry in self._entries.values():
            if entry.valid:
                groups.setdefault(entry.t, []).append(entry)
        out = []
        for t in sorted(groups):
            members = groups[t]
            scales = {e.b for e in members}
            assert len(scales) == 1, f"timestamp group {t} mixes scales {scales}"
            out.append((t, members))
        return out

    def stats(self) -> dict:
        groups = self.group_by_timestamp()
        valid = [e for _, members in groups for e in members]
        return {
            "entries": len(valid),
            "by_timestamp": {str(t): len(members) for t, members in groups},
            "best_scale": min((e.b for e in valid), default=None),
        }

    def snapshot(self) -> dict:
        return {
            "attrs": list(self.attr_names),
            "clock": self._clock,
            "entries": [
                {"key": [list(iv) for iv in e.key], "b": e.b, "value": e.value, "t": e.t}
                for e in self._entries.values()
                if e.valid
            ],
        }

    @staticmethod
    def from_snapshot(doc: dict) -> "StrategyCache":
        cache = StrategyCache(tuple(doc["attrs"]))
        cache._clock = int(doc["clock"])
        for item in doc["entries"]:
            key = tuple(tuple(iv) for iv in item["key"])
            cache._entries[key] = CacheEntry(key, float(item["b"]), float(item["value"]), int(item["t"]))
        return cache


class CacheRegistry:
    """Independent caches keyed by sorted attribute set."""

    def __init__(self):
        self._caches: dict[tuple[str, ...], StrategyCache] = {}

    def cache(self, attr_names: Iterable[str]) -> StrategyCache:
        key = tuple(sorted(set(attr_names)))
        if key not in self._caches:
            self._caches[key] = StrategyCache(key)
        return self._caches[key]

    def existing(self, attr_names: Iterable[str]) -> Optional[StrategyCache]:
        return self._caches.get(tuple(sorted(set(attr_names))))

    def attribute_sets(self) -> list[tuple[str, ...]]:
        return sorted(self._caches)

    def clear(self) -> None:
        self._caches.clear()

    def snapshot(self) -> dict:
        return {
            "version": SNAPSHOT_VERSION,
            "caches": [c.snapshot() for _, c in sorted(self._caches.items())],
        }

    def save(self, path: str) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.snapshot(), fh)

    @staticmethod
    def from_snapshot(doc: dict) -> "CacheRegistry":
        if doc.get("version") != SNAPSHOT_VERSION:
            raise ValueError(f"unsupported cache snapshot version {doc.get('version')!r}")
        reg = CacheRegistry()
        for cache_doc in doc["caches"]:
            cache = StrategyCache.from_snapshot(cache_doc)
            reg._caches[cache.attr_names] = cache
        return reg

    @staticmethod
    def load(path: str) -> "CacheRegistry":
        with open(path, "r", encoding="utf-8") as fh:
            return CacheRegistry.from_snapshot(json.load(fh))
