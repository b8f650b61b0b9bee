import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fairtrees.data import (
    ColumnSpec,
    DataError,
    SchemaError,
    encode_features,
    enumerate_thresholds,
    holdout_split,
    k_folds,
    load_csv,
    parse_schema,
    synth_biased,
)


def write_csv(tmp_path, text, name="data.csv"):
    path = tmp_path / name
    path.write_text(text)
    return path


BASIC_SCHEMA = [
    ColumnSpec("cat", kind="categorical", role="feature"),
    ColumnSpec("num", kind="numeric", role="feature"),
    ColumnSpec("grp", kind="binary", role="sensitive", positive_value="1"),
    ColumnSpec("out", kind="binary", role="target", positive_value="yes"),
]


class TestLoadCsv:
    def test_one_hot_partition(self, tmp_path):
        path = write_csv(
            tmp_path,
            "cat,num,grp,out\na,1.0,0,yes\nb,2.0,1,no\na,3.0,0,yes\nc,4.0,1,no\n",
        )
        ds = load_csv(path, BASIC_SCHEMA)
        derived = [n for n in ds.feature_names if n.startswith("cat=")]
        assert derived == ["cat=a", "cat=b", "cat=c"]
        idx = [ds.feature_index(n) for n in derived]
        assert np.array_equal(ds.X[:, idx].sum(axis=1), np.ones(4))
        assert ds.onehot_groups == {"cat": ("cat=a", "cat=b", "cat=c")}

    def test_constant_target_flag(self, tmp_path):
        path = write_csv(
            tmp_path, "cat,num,grp,out\na,1,0,yes\nb,2,1,yes\na,3,0,yes\nb,4,1,yes\n"
        )
        ds = load_csv(path, BASIC_SCHEMA)
        assert ds.constant_target
        assert np.array_equal(ds.y, np.ones(4, dtype=np.uint8))

    def test_drop_rules_counted(self, tmp_path):
        path = write_csv(
            tmp_path,
            "cat,num,grp,out\na,1,0,yes\nb,?,1,no\na,oops,0,yes\nb,4,1,no\na,,1,no\n",
        )
        ds = load_csv(path, BASIC_SCHEMA)
        assert ds.n == 2
        assert ds.dropped_rows == 3

    def test_missing_file(self, tmp_path):
        with pytest.raises(DataError, match="not found"):
            load_csv(tmp_path / "nope.csv", BASIC_SCHEMA)

    def test_header_mismatch(self, tmp_path):
        path = write_csv(tmp_path, "cat,num,grp\na,1,0\n")
        with pytest.raises(SchemaError, match="lacks"):
            load_csv(path, BASIC_SCHEMA)

    def test_extra_columns_rejected_without_marker(self, tmp_path):
        path = write_csv(tmp_path, "cat,num,grp,out,junk\na,1,0,yes,x\n")
        with pytest.raises(SchemaError, match="junk"):
            load_csv(path, BASIC_SCHEMA)
        ds = load_csv(path, BASIC_SCHEMA + [ColumnSpec("*", role="ignored")])
        assert ds.n == 1

    def test_zero_usable_rows(self, tmp_path):
        path = write_csv(tmp_path, "cat,num,grp,out\na,?,0,yes\n")
        with pytest.raises(DataError, match="no usable rows"):
            load_csv(path, BASIC_SCHEMA)

    def test_binarization_multivalued(self, tmp_path):
        schema = [
            ColumnSpec("num", kind="numeric", role="feature"),
            ColumnSpec("race", kind="categorical", role="sensitive",
                       positive_value="groupA"),
            ColumnSpec("out", kind="binary", role="target", positive_value="1"),
        ]
        path = write_csv(
            tmp_path, "num,race,out\n1,groupA,1\n2,groupB,0\n3,groupC,1\n"
        )
        ds = load_csv(path, schema)
        assert ds.s.tolist() == [1, 0, 0]

    def test_preprocessing_idempotent(self, tmp_path):
        path = write_csv(
            tmp_path, "cat,num,grp,out\na,1,0,yes\nb,2,1,no\nc,3,0,yes\n"
        )
        ds = load_csv(path, BASIC_SCHEMA)
        columns = [
            (ColumnSpec(name, kind="binary" if ds.feature_kinds[i] == 0 else "numeric"),
             ds.X[:, i])
            for i, name in enumerate(ds.feature_names)
        ]
        reencoded, groups = encode_features(columns)
        assert groups == {}
        assert [sp.name for sp, _ in reencoded] == list(ds.feature_names)
        for (_, vec), i in zip(reencoded, range(ds.m)):
            assert np.array_equal(vec, ds.X[:, i])


class TestSchemaFile:
    def test_roundtrip(self, tmp_path):
        text = (
            "# demo schema\n"
            "column age kind=numeric role=feature\n"
            "column job kind=categorical role=feature\n"
            "column sex kind=categorical role=sensitive positive=Female\n"
            "column hired kind=binary role=target positive=1\n"
            "other_columns = ignore\n"
        )
        path = tmp_path / "demo.schema"
        path.write_text(text)
        specs = parse_schema(path)
        assert [sp.name for sp in specs] == ["age", "job", "sex", "hired", "*"]
        assert specs[2].positive_value == "Female"

    def test_requires_one_target_one_sensitive(self, tmp_path):
        path = tmp_path / "bad.schema"
        path.write_text("column a kind=numeric role=feature\n")
        with pytest.raises(SchemaError, match="target"):
            parse_schema(path)

    def test_target_needs_positive(self):
        with pytest.raises(SchemaError, match="positive"):
            ColumnSpec("out", kind="binary", role="target")


class TestThresholds:
    def test_midpoint(self):
        assert enumerate_thresholds([0.0, 1.0], 1).tolist() == [0.5]

    def test_spacing_formula(self):
        assert enumerate_thresholds([0.0, 10.0], 4).tolist() == [2.0, 4.0, 6.0, 8.0]

    def test_constant_column(self):
        assert enumerate_thresholds([5.0, 5.0, 5.0], 10).size == 0

    def test_open_interval(self, rng):
        values = rng.normal(size=50)
        ts = enumerate_thresholds(values, 10)
        assert (ts > values.min()).all() and (ts < values.max()).all()
        assert (np.diff(ts) > 0).all()

    def test_even_spacing(self, rng):
        values = rng.uniform(-3, 7, size=30)
        ts = enumerate_thresholds(values, 10)
        gaps = np.diff(ts)
        assert np.allclose(gaps, gaps[0], rtol=1e-12)


class TestSplits:
    def test_holdout_sizes(self):
        ds = synth_biased(9, 0.5, seed=1)
        train, test = holdout_split(ds, 2.0 / 3.0, seed=0)
        assert (train.n, test.n) == (6, 3)

    def test_holdout_deterministic(self):
        ds = synth_biased(50, 0.5, seed=1)
        a1, b1 = holdout_split(ds, 0.5, seed=9)
        a2, b2 = holdout_split(ds, 0.5, seed=9)
        assert np.array_equal(a1.X, a2.X) and np.array_equal(b1.y, b2.y)

    def test_holdout_compas_scale_rounding(self):
        ds = synth_biased(6172, 0.5, seed=1)
        train, test = holdout_split(ds, 2.0 / 3.0, seed=0)
        assert (train.n, test.n) == (4115, 2057)

    def test_holdout_partitions_rows(self):
        ds = synth_biased(40, 0.5, seed=2)
        train, test = holdout_split(ds, 0.7, seed=3)
        combined = np.vstack([train.X, test.X])
        assert combined.shape[0] == ds.n
        key = lambda M: sorted(map(tuple, M.tolist()))
        assert key(combined) == key(ds.X)

    def test_kfolds_sizes(self):
        ds = synth_biased(10, 0.5, seed=1)
        folds = k_folds(ds, 3, seed=0)
        sizes = sorted(val.n for _, val in folds)
        assert sizes == [3, 3, 4]

    def test_kfolds_cover_all_rows(self):
        ds = synth_biased(9, 0.5, seed=1)
        folds = k_folds(ds, 3, seed=5)
        rows = [tuple(r) for _, val in folds for r in val.X.tolist()]
        assert len(rows) == 9
        assert sorted(rows) == sorted(tuple(r) for r in ds.X.tolist())

    def test_kfolds_requires_enough_rows(self):
        ds = synth_biased(4, 0.5, seed=1)
        with pytest.raises(DataError):
            k_folds(ds, 5, seed=0)

    @given(st.integers(0, 2**31 - 1))
    @settings(max_examples=20, deadline=None)
    def test_holdout_deterministic_property(self, seed):
        ds = synth_biased(30, 0.5, seed=7)
        a1, _ = holdout_split(ds, 0.5, seed=seed)
        a2, _ = holdout_split(ds, 0.5, seed=seed)
        assert np.array_equal(a1.X, a2.X)


class TestShippedSchemas:
    """The repository schema files parse and drive the loader correctly."""

    def schemas_dir(self):
        from pathlib import Path

        return Path(__file__).parent.parent / "schemas"

    def test_all_schemas_parse(self):
        for name in ("compas.schema", "adult.schema", "dutch.schema"):
            specs = parse_schema(self.schemas_dir() / name)
            roles = [sp.role for sp in specs]
            assert roles.count("target") == 1
            assert roles.count("sensitive") == 1

    def test_compas_schema_against_shaped_csv(self, tmp_path):
        header = (
            "id,name,sex,age,race,juv_fel_count,juv_misd_count,juv_other_count,"
            "priors_count,c_charge_degree,decile_score,two_year_recid"
        )
        rows = [
            "1,alpha,Male,25,African-American,0,0,1,3,F,7,1",
            "2,beta,Female,31,Caucasian,0,1,0,0,M,2,0",
            "3,gamma,Male,47,African-American,1,0,0,5,F,8,1",
            "4,delta,Female,29,Hispanic,0,0,0,?,M,3,0",
        ]
        path = tmp_path / "compas_mini.csv"
        path.write_text(header + "\n" + "\n".join(rows) + "\n")
        specs = parse_schema(self.schemas_dir() / "compas.schema")
        ds = load_csv(path, specs)
        assert ds.n == 3  # the '?' priors_count row drops
        assert ds.dropped_rows == 1
        assert ds.s.tolist() == [1, 0, 1]
        assert ds.y.tolist() == [1, 0, 1]
        assert "sex=Male" in ds.feature_names
        assert "c_charge_degree=F" in ds.feature_names


class TestSynth:
    def test_bias_zero_independent(self):
        ds = synth_biased(10000, 0.0, seed=4)
        corr = np.corrcoef(ds.y, ds.s)[0, 1]
        assert abs(corr) < 0.05

    def test_bias_one_identical(self):
        ds = synth_biased(500, 1.0, seed=4)
        assert np.array_equal(ds.y, ds.s)

    def test_deterministic(self):
        a = synth_biased(100, 0.3, seed=11)
        b = synth_biased(100, 0.3, seed=11)
        assert np.array_equal(a.X, b.X)
        assert np.array_equal(a.y, b.y)
        assert np.array_equal(a.s, b.s)

    def test_rejects_tiny(self):
        with pytest.raises(DataError):
            synth_biased(2, 0.5, seed=0)
