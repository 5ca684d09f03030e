"""Domain schema, range queries, workloads, and accuracy requirements.

Every attribute has a finite, totally ordered domain; values are addressed
by their index in that order. A multi-attribute domain is the row-major
cross product of the attribute domains (sorted by attribute name).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Mapping, Union

import numpy as np


class SchemaError(ValueError):
    """Raised when data or queries violate the declared domain."""


Interval = tuple[int, int]
# A row key is one half-open interval per attribute of the attribute set,
# in sorted-attribute-name order. It identifies a strategy/workload row
# (a node of the global strategy) independently of any tree object.
RowKey = tuple[Interval, ...]


@dataclass(frozen=True)
class Attribute:
    """One schema attribute with a finite ordered domain."""

    name: str
    kind: str  # "int_range" | "categorical"
    size: int
    lo: int = 0  # int_range only: domain is [lo, lo + size)
    values: tuple = ()  # categorical only: ordered raw values

    def index_of(self, raw: str) -> int:
        """Map a raw CSV cell to its domain index, or raise SchemaError."""
        if self.kind == "int_range":
            try:
                value = int(raw)
            except ValueError as exc:
                raise SchemaError(f"attribute {self.name!r}: unparseable value {raw!r}") from exc
            idx = value - self.lo
        else:
            try:
                idx = self._value_index[raw]
            except KeyError:
                idx = -1
        if not 0 <= idx < self.size:
            raise SchemaError(f"attribute {self.name!r}: value {raw!r} outside domain")
        return idx

    @property
    def _value_index(self) -> dict:
        index = self.__dict__.get("_value_index_cache")
        if index is None:
            index = {str(v): i for i, v in enumerate(self.values)}
            self.__dict__["_value_index_cache"] = index
        return index


@dataclass(frozen=True)
class DomainSchema:
    """Ordered finite domain over named attributes; n = product of sizes."""

    attributes: tuple[Attribute, ...]

    def __post_init__(self):
        if not self.attributes:
            raise SchemaError("schema needs at least one attribute")
        seen = set()
        for attr in self.attributes:
            if attr.size <= 0:
                raise SchemaError(f"attribute {attr.name!r} has empty domain")
            if attr.name in seen:
                raise SchemaError(f"duplicate attribute {attr.name!r}")
            seen.add(attr.name)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(a.name for a in self.attributes)

    @property
    def size(self) -> int:
        return int(np.prod([a.size for a in self.attributes]))

    def attribute(self, name: str) -> Attribute:
        for attr in self.attributes:
            if attr.name == name:
                return attr
        raise SchemaError(f"unknown attribute {name!r}")

    def view(self, attr_names: Iterable[str]) -> "DomainView":
        names = sorted(set(attr_names))
        if not names:
            raise SchemaError("attribute set is empty")
        return DomainView(tuple(self.attribute(n) for n in names))

    @staticmethod
    def from_json(path: str) -> "DomainSchema":
        """Load { attributes: [ {name, type, lo, hi | values} ] }."""
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
        attrs = []
        for spec in doc["attributes"]:
            kind = spec["type"]
            if kind == "int_range":
                lo, hi = int(spec["lo"]), int(spec["hi"])
                if hi <= lo:
                    raise SchemaError(f"attribute {spec['name']!r}: empty range [{lo}, {hi})")
                attrs.append(Attribute(spec["name"], "int_range", hi - lo, lo=lo))
            elif kind == "categorical":
                values = tuple(spec["values"])
                if not values:
                    raise SchemaError(f"attribute {spec['name']!r}: no values")
                attrs.append(Attribute(spec["name"], "categorical", len(values), values=values))
            else:
                raise SchemaError(f"attribute {spec['name']!r}: unknown type {kind!r}")
        return DomainSchema(tuple(attrs))


@dataclass(frozen=True)
class DomainView:
    """The joint domain of a sorted attribute set, in row-major order."""

    attributes: tuple[Attribute, ...]

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(a.name for a in self.attributes)

    @property
    def sizes(self) -> tuple[int, ...]:
        return tuple(a.size for a in self.attributes)

    @property
    def size(self) -> int:
        return int(np.prod(self.sizes))

    def full_key(self) -> RowKey:
        return tuple((0, a.size) for a in self.attributes)

    def validate_key(self, key: RowKey) -> None:
        if len(key) != len(self.attributes):
            raise SchemaError(f"row key {key} does not match attribute set {self.names}")
        for (lo, hi), attr in zip(key, self.attributes):
            if not (0 <= lo < hi <= attr.size):
                raise SchemaError(
                    f"interval [{lo}, {hi}) outside domain of {attr.name!r} (size {attr.size})"
                )

    def mask(self, key: RowKey) -> np.ndarray:
        """Boolean indicator of the key's cross product over the joint domain."""
        self.validate_key(key)
        out = np.ones(1, dtype=bool)
        for (lo, hi), attr in zip(key, self.attributes):
            part = np.zeros(attr.size, dtype=bool)
            part[lo:hi] = True
            out = np.multiply.outer(out, part)
        return out.reshape(-1)


@dataclass(frozen=True)
class RangeQuery:
    """One counting query: a half-open interval per attribute of its set."""

    intervals: Mapping[str, Interval]

    def __post_init__(self):
        if not self.intervals:
            raise SchemaError("range query has no intervals")
        for name, (lo, hi) in self.intervals.items():
            if lo >= hi:
                raise SchemaError(f"query interval [{lo}, {hi}) on {name!r} is empty")

    @property
    def attr_names(self) -> tuple[str, ...]:
        return tuple(sorted(self.intervals))

    def key(self, view: DomainView) -> RowKey:
        key = []
        for attr in view.attributes:
            interval = self.intervals.get(attr.name, (0, attr.size))
            key.append((int(interval[0]), int(interval[1])))
        key = tuple(key)
        view.validate_key(key)
        return key


@dataclass(frozen=True)
class Workload:
    """A set of range queries answered together under one accuracy requirement."""

    queries: tuple[RangeQuery, ...]

    def __post_init__(self):
        if not self.queries:
            raise SchemaError("workload has no queries")

    @property
    def attr_names(self) -> tuple[str, ...]:
        names = set()
        for q in self.queries:
            names.update(q.attr_names)
        return tuple(sorted(names))

    def keys(self, view: DomainView) -> list[RowKey]:
        return [q.key(view) for q in self.queries]


@dataclass(frozen=True)
class WorstError:
    """(alpha, beta)-worst error: P[max abs error >= alpha] <= beta."""

    alpha: float
    beta: float

    def __post_init__(self):
        if self.alpha <= 0:
            raise SchemaError("alpha must be positive")
        if not 0 < self.beta < 1:
            raise SchemaError("beta must lie in (0, 1)")


@dataclass(frozen=True)
class ExpectedSquaredError:
    """Expected total squared error bound: error functional <= alpha_squared."""

    alpha_squared: float

    def __post_init__(self):
        if self.alpha_squared <= 0:
            raise SchemaError("alpha_squared must be positive")


AccuracyRequirement = Union[WorstError, ExpectedSquaredError]


def requirement_from_json(doc: Mapping) -> AccuracyRequirement:
    kind = doc.get("kind")
    if kind == "worst_error":
        return WorstError(float(doc["alpha"]), float(doc["beta"]))
    if kind == "expected_squared":
        return ExpectedSquaredError(float(doc["alpha_squared"]))
    raise SchemaError(f"unknown accuracy kind {kind!r}")


def requirement_to_json(req: AccuracyRequirement) -> dict:
    if isinstance(req, WorstError):
        return {"kind": "worst_error", "alpha": req.alpha, "beta": req.beta}
    return {"kind": "expected_squared", "alpha_squared": req.alpha_squared}
