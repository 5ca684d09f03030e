"""Data backend: CSV ingestion and marginal vector materialization."""

import threading

import numpy as np
import pytest

from privcache.backend import Dataset, VectorRegistry, ingest_csv, materialize_vector
from privcache.schema import Attribute, DomainSchema, SchemaError


def schema_age8():
    return DomainSchema((Attribute("Age", "int_range", 8),))


def schema_two():
    return DomainSchema(
        (Attribute("a", "int_range", 2), Attribute("b", "int_range", 2))
    )


class TestIngestCSV:
    def test_small_fixture(self, tmp_path):
        path = tmp_path / "d.csv"
        path.write_text("Age\n0\n3\n7\n")
        ds = ingest_csv(str(path), schema_age8())
        assert ds.row_count == 3

    def test_out_of_domain_strict_names_row_and_column(self, tmp_path):
        path = tmp_path / "d.csv"
        path.write_text("Age\n1\n99\n")
        with pytest.raises(SchemaError) as err:
            ingest_csv(str(path), schema_age8())
        assert "Age" in str(err.value) and ":3" in str(err.value)

    def test_lenient_drops_and_counts(self, tmp_path):
        path = tmp_path / "d.csv"
        path.write_text("Age\n1\n99\n2\n")
        ds = ingest_csv(str(path), schema_age8(), mode="lenient")
        assert ds.row_count == 2 and ds.dropped == 1

    def test_missing_column(self, tmp_path):
        path = tmp_path / "d.csv"
        path.write_text("Other\n1\n")
        with pytest.raises(SchemaError):
            ingest_csv(str(path), schema_age8())

    def test_empty_file(self, tmp_path):
        path = tmp_path / "d.csv"
        path.write_text("")
        with pytest.raises(SchemaError):
            ingest_csv(str(path), schema_age8())

    def test_unparseable_cell(self, tmp_path):
        path = tmp_path / "d.csv"
        path.write_text("Age\nnope\n")
        with pytest.raises(SchemaError):
            ingest_csv(str(path), schema_age8())

    def test_synthetic_uniform_sums(self, tmp_path):
        rng = np.random.default_rng(0)
        values = rng.integers(0, 8, 1000)
        path = tmp_path / "d.csv"
        path.write_text("Age\n" + "\n".join(str(v) for v in values) + "\n")
        ds = ingest_csv(str(path), schema_age8())
        vec = materialize_vector(ds, ["Age"])
        # oracle: recount via an independent scan
        recount = np.zeros(8, dtype=int)
        for v in values:
            recount[v] += 1
        assert vec.tolist() == recount.tolist()
        assert vec.sum() == 1000

    def test_categorical_values(self, tmp_path):
        schema = DomainSchema((Attribute("c", "categorical", 2, values=("x", "y")),))
        path = tmp_path / "d.csv"
        path.write_text("c\nx\ny\ny\n")
        ds = ingest_csv(str(path), schema)
        assert materialize_vector(ds, ["c"]).tolist() == [1, 2]


class TestMaterializeVector:
    def test_single_attribute_tally(self):
        schema = DomainSchema((Attribute("v", "int_range", 4),))
        ds = Dataset.from_records(schema, [{"v": 0}, {"v": 0}, {"v": 3}])
        assert materialize_vector(ds, ["v"]).tolist() == [2, 0, 0, 1]

    def test_two_attribute_joint_tally(self):
        ds = Dataset.from_records(schema_two(), [{"a": 0, "b": 1}, {"a": 1, "b": 1}])
        vec = materialize_vector(ds, ["a", "b"])
        # oracle: brute-force joint tally in row-major (a, b) order
        oracle = [0] * 4
        for rec in [(0, 1), (1, 1)]:
            oracle[rec[0] * 2 + rec[1]] += 1
        assert vec.tolist() == oracle == [0, 1, 0, 1]

    def test_sum_conservation_every_subset(self):
        rng = np.random.default_rng(5)
        schema = schema_two()
        recs = [{"a": int(rng.integers(2)), "b": int(rng.integers(2))} for _ in range(57)]
        ds = Dataset.from_records(schema, recs)
        for subset in (["a"], ["b"], ["a", "b"]):
            assert materialize_vector(ds, subset).sum() == 57

    def test_marginal_consistency(self):
        rng = np.random.default_rng(6)
        schema = schema_two()
        recs = [{"a": int(rng.integers(2)), "b": int(rng.integers(2))} for _ in range(40)]
        ds = Dataset.from_records(schema, recs)
        joint = materialize_vector(ds, ["a", "b"]).reshape(2, 2)
        assert joint.sum(axis=1).tolist() == materialize_vector(ds, ["a"]).tolist()
        assert joint.sum(axis=0).tolist() == materialize_vector(ds, ["b"]).tolist()

    def test_unknown_attribute(self):
        ds = Dataset.from_records(schema_age8(), [{"Age": 1}])
        with pytest.raises(SchemaError):
            materialize_vector(ds, ["Nope"])


class TestVectorRegistry:
    def test_sorted_key_sharing(self):
        ds = Dataset.from_records(schema_two(), [{"a": 0, "b": 1}])
        reg = VectorRegistry(ds)
        v1 = reg.vector(["a", "b"])
        v2 = reg.vector(["b", "a"])
        assert v1 is v2

    def test_concurrent_materialization(self):
        rng = np.random.default_rng(9)
        schema = schema_two()
        recs = [{"a": int(rng.integers(2)), "b": int(rng.integers(2))} for _ in range(200)]
        reg = VectorRegistry(Dataset.from_records(schema, recs))
        out = {}

        def work(name):
            out[name] = reg.vector([name]).sum()

        threads = [threading.Thread(target=work, args=(n,)) for n in ("a", "b", "a", "b")]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        assert out == {"a": 200, "b": 200}
