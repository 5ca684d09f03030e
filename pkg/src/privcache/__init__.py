"""Accuracy-aware differentially private query engine with a response cache."""

from .backend import Dataset, VectorRegistry, ingest_csv, materialize_vector
from .cache import CacheEntry, CacheRegistry, StrategyCache
from .engine import (
    Answered,
    BudgetLedger,
    Engine,
    EngineConfig,
    Rejected,
    WorkloadRequest,
)
from .schema import (
    Attribute,
    DomainSchema,
    ExpectedSquaredError,
    RangeQuery,
    SchemaError,
    Workload,
    WorstError,
)
from .tree import StrategyTree

__all__ = [
    "Answered",
    "Attribute",
    "BudgetLedger",
    "CacheEntry",
    "CacheRegistry",
    "Dataset",
    "DomainSchema",
    "Engine",
    "EngineConfig",
    "ExpectedSquaredError",
    "RangeQuery",
    "Rejected",
    "SchemaError",
    "StrategyCache",
    "StrategyTree",
    "VectorRegistry",
    "Workload",
    "WorkloadRequest",
    "WorstError",
    "ingest_csv",
    "materialize_vector",
]

__version__ = "0.1.0"
