"""Tabular dataset loading, preprocessing and splitting.

A dataset is a binarized feature matrix plus two binary label vectors: the
prediction target ``y`` and the sensitive group ``s``. Loading is driven by
a declarative schema that names each raw CSV column's kind and role;
categorical features are one-hot encoded into binary columns, and the
target/sensitive columns are binarized by comparing the raw cell against a
configured positive value. Rows with missing or unparseable values in any
used column are dropped and counted.

Schema file format (one directive per line, ``#`` comments)::

    column <name> kind=<numeric|binary|categorical> role=<feature|target|sensitive|ignored> [positive=<raw value>]
    other_columns = ignore          # optional: unlisted header columns are ignored

All randomness flows through explicit integer seeds; split operations are
pure functions of (dataset, parameters, seed).
"""

from __future__ import annotations

import csv
import shlex
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from ._kernel import scan_split_candidates

KIND_BINARY = 0
KIND_NUMERIC = 1

COLUMN_KINDS = ("binary", "numeric", "categorical")
COLUMN_ROLES = ("feature", "target", "sensitive", "ignored")

#: raw cell values treated as missing
MISSING_TOKENS = frozenset({"", "?", "NA", "N/A", "nan", "NaN"})


class SchemaError(ValueError):
    """Schema file invalid or inconsistent with the CSV header."""


class DataError(ValueError):
    """Dataset contents violate an operation's precondition."""


@dataclass(frozen=True)
class ColumnSpec:
    """Declaration of one raw CSV column."""

    name: str
    kind: str = "numeric"
    role: str = "feature"
    positive_value: str | None = None

    def __post_init__(self):
        if self.kind not in COLUMN_KINDS:
            raise SchemaError(f"unknown column kind {self.kind!r} for {self.name!r}")
        if self.role not in COLUMN_ROLES:
            raise SchemaError(f"unknown column role {self.role!r} for {self.name!r}")
        if self.role in ("target", "sensitive") and self.positive_value is None:
            raise SchemaError(
                f"{self.role} column {self.name!r} needs positive=<raw value>"
            )


@dataclass(frozen=True)
class ThresholdSet:
    """Candidate cut points of one numeric column, strictly inside its range."""

    column: str
    thresholds: tuple[float, ...]


@dataclass(frozen=True)
class Subset:
    """Rows of a dataset as seen by one tree node. Arrays are shared, not copied."""

    X: np.ndarray
    y: np.ndarray
    s: np.ndarray
    kinds: np.ndarray
    names: tuple[str, ...]

    @property
    def n(self) -> int:
        return self.X.shape[0]

    def prior(self) -> float:
        """Fraction of rows with y = 1."""
        return float(self.y.sum()) / self.n

    def partition(self, column_index: int, threshold: float | None):
        """Split rows into (left, right); left is value <= threshold, or value == 0
        for binary columns."""
        v = self.X[:, column_index]
        mask = v == 0.0 if threshold is None else v <= threshold
        return self._take(mask), self._take(~mask)

    def _take(self, mask):
        return Subset(
            np.ascontiguousarray(self.X[mask]),
            self.y[mask],
            self.s[mask],
            self.kinds,
            self.names,
        )

    def scan(self, n_thresholds: int, min_child: int):
        """Kernel split-candidate scan over this subset."""
        return scan_split_candidates(
            self.X, self.y, self.s, self.kinds, n_thresholds, min_child
        )


@dataclass(frozen=True)
class Dataset:
    """Preprocessed tabular data: binarized features, binary y and s."""

    feature_names: tuple[str, ...]
    feature_kinds: np.ndarray  # uint8, KIND_BINARY or KIND_NUMERIC per feature
    X: np.ndarray  # (n, m) float64
    y: np.ndarray  # (n,) uint8
    s: np.ndarray  # (n,) uint8
    dropped_rows: int = 0
    constant_target: bool = False
    constant_sensitive: bool = False
    onehot_groups: dict = field(default_factory=dict)

    def __post_init__(self):
        for arr in (self.X, self.y, self.s, self.feature_kinds):
            arr.setflags(write=False)

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def m(self) -> int:
        return self.X.shape[1]

    def prior(self) -> float:
        return float(self.y.sum()) / self.n

    def feature_index(self, name: str) -> int:
        try:
            return self.feature_names.index(name)
        except ValueError:
            raise KeyError(f"unknown feature column {name!r}") from None

    def root_subset(self) -> Subset:
        return Subset(self.X, self.y, self.s, self.feature_kinds, self.feature_names)

    def take(self, indices) -> "Dataset":
        """New dataset restricted to the given row indices."""
        idx = np.asarray(indices, dtype=np.int64)
        y = self.y[idx].copy()
        s = self.s[idx].copy()
        return replace(
            self,
            X=np.ascontiguousarray(self.X[idx]),
            y=y,
            s=s,
            dropped_rows=0,
            constant_target=bool(y.min() == y.max()) if len(y) else True,
            constant_sensitive=bool(s.min() == s.max()) if len(s) else True,
        )

    def thresholds(self, name: str, k: int = 10) -> ThresholdSet:
        """Equally spaced cut points of a numeric feature over the full data."""
        j = self.feature_index(name)
        if self.feature_kinds[j] != KIND_NUMERIC:
            raise DataError(f"column {name!r} is not numeric")
        return ThresholdSet(name, tuple(enumerate_thresholds(self.X[:, j], k)))


def parse_schema(path) -> list[ColumnSpec]:
    """Read a schema file into column specs.

    Returns the specs in file order; an ``other_columns = ignore`` directive
    is encoded as a trailing spec named ``*`` with role ``ignored``.
    """
    path = Path(path)
    if not path.exists():
        raise SchemaError(f"schema file not found: {path}")
    specs: list[ColumnSpec] = []
    ignore_rest = False
    for lineno, raw in enumerate(path.read_text().splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        compact = line.replace(" ", "")
        if compact == "other_columns=ignore":
            ignore_rest = True
            continue
        try:
            tokens = shlex.split(line)
        except ValueError as exc:
            raise SchemaError(f"{path}:{lineno}: {exc}") from exc
        if len(tokens) < 2 or tokens[0] != "column":
            raise SchemaError(f"{path}:{lineno}: expected 'column <name> ...'")
        name = tokens[1]
        kv = {}
        for tok in tokens[2:]:
            if "=" not in tok:
                raise SchemaError(f"{path}:{lineno}: expected key=value, got {tok!r}")
            key, _, value = tok.partition("=")
            kv[key] = value
        role = kv.pop("role", "feature")
        kind = kv.pop("kind", "numeric")
        positive = kv.pop("positive", None)
        if kv:
            raise SchemaError(f"{path}:{lineno}: unknown keys {sorted(kv)}")
        specs.append(ColumnSpec(name, kind=kind, role=role, positive_value=positive))
    if ignore_rest:
        specs.append(ColumnSpec("*", kind="numeric", role="ignored"))
    validate_schema([sp for sp in specs if sp.name != "*"])
    return specs


def validate_schema(specs: list[ColumnSpec]):
    names = [sp.name for sp in specs]
    if len(set(names)) != len(names):
        raise SchemaError("duplicate column names in schema")
    targets = [sp for sp in specs if sp.role == "target"]
    sensitives = [sp for sp in specs if sp.role == "sensitive"]
    if len(targets) != 1:
        raise SchemaError(f"schema must name exactly one target column, got {len(targets)}")
    if len(sensitives) != 1:
        raise SchemaError(
            f"schema must name exactly one sensitive column, got {len(sensitives)}"
        )


def _parse_cell(spec: ColumnSpec, raw: str):
    """Parse one raw cell to its numeric value, or None if unusable."""
    if raw in MISSING_TOKENS:
        return None
    if spec.role in ("target", "sensitive"):
        return 1.0 if raw == spec.positive_value else 0.0
    if spec.kind == "numeric":
        try:
            v = float(raw)
        except ValueError:
            return None
        return v if np.isfinite(v) else None
    if spec.kind == "binary":
        if spec.positive_value is not None:
            return 1.0 if raw == spec.positive_value else 0.0
        if raw in ("0", "1"):
            return float(raw)
        return None
    return raw  # categorical: keep the raw label for one-hot encoding


def encode_features(columns):
    """Binarize/one-hot a list of (ColumnSpec, values) feature columns.

    Idempotent: running the encoder on its own output returns equal columns.
    Categorical columns expand into one binary column per observed category,
    named ``<column>=<category>``; per row exactly one of them is 1.
    """
    out = []
    groups = {}
    for spec, values in columns:
        if spec.kind != "categorical":
            out.append((spec, np.asarray(values, dtype=np.float64)))
            continue
        cats = sorted(set(values))
        derived = []
        for cat in cats:
            name = f"{spec.name}={cat}"
            vec = np.fromiter((1.0 if v == cat else 0.0 for v in values), dtype=np.float64)
            out.append((ColumnSpec(name, kind="binary", role="feature"), vec))
            derived.append(name)
        groups[spec.name] = tuple(derived)
    return out, groups


def load_csv(path, schema: list[ColumnSpec]) -> Dataset:
    """Load a headered CSV into a preprocessed Dataset.

    The header must cover every schema column; extra header columns are an
    error unless the schema carries the ``other_columns = ignore`` marker
    (a spec named ``*``). Rows with missing or unparseable values in any
    used column are dropped and counted in ``dropped_rows``.
    """
    path = Path(path)
    if not path.exists():
        raise DataError(f"dataset file not found: {path}")
    ignore_rest = any(sp.name == "*" for sp in schema)
    specs = [sp for sp in schema if sp.name != "*"]
    by_name = {sp.name: sp for sp in specs}

    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: empty file") from None
        header = [h.strip() for h in header]
        missing = sorted(set(by_name) - set(header))
        if missing:
            raise SchemaError(f"{path}: header lacks schema columns {missing}")
        extra = sorted(set(header) - set(by_name))
        if extra and not ignore_rest:
            raise SchemaError(
                f"{path}: header columns {extra} not in schema "
                "(add 'other_columns = ignore' to skip them)"
            )
        used = [
            (sp, header.index(sp.name)) for sp in specs if sp.role != "ignored"
        ]
        raw_columns = {sp.name: [] for sp, _ in used}
        n_dropped = 0
        width = len(header)
        for row in reader:
            if not row:
                continue
            if len(row) != width:
                n_dropped += 1
                continue
            parsed = {}
            for sp, idx in used:
                value = _parse_cell(sp, row[idx].strip())
                if value is None:
                    break
                parsed[sp.name] = value
            else:
                for name, value in parsed.items():
                    raw_columns[name].append(value)
                continue
            n_dropped += 1

    n = len(next(iter(raw_columns.values()))) if raw_columns else 0
    if n == 0:
        raise DataError(f"{path}: no usable rows after drop rules")

    y = s = None
    feature_cols = []
    for sp, _ in used:
        values = raw_columns[sp.name]
        if sp.role == "target":
            y = np.asarray(values, dtype=np.uint8)
        elif sp.role == "sensitive":
            s = np.asarray(values, dtype=np.uint8)
        else:
            feature_cols.append((sp, values))

    encoded, groups = encode_features(feature_cols)
    names = tuple(sp.name for sp, _ in encoded)
    kinds = np.array(
        [KIND_BINARY if sp.kind == "binary" else KIND_NUMERIC for sp, _ in encoded],
        dtype=np.uint8,
    )
    X = (
        np.column_stack([vec for _, vec in encoded])
        if encoded
        else np.empty((n, 0), dtype=np.float64)
    )
    return Dataset(
        feature_names=names,
        feature_kinds=kinds,
        X=np.ascontiguousarray(X, dtype=np.float64),
        y=y,
        s=s,
        dropped_rows=n_dropped,
        constant_target=bool(y.min() == y.max()),
        constant_sensitive=bool(s.min() == s.max()),
        onehot_groups=groups,
    )


def enumerate_thresholds(column, k: int) -> np.ndarray:
    """k cut points equally spaced in the open interval (min, max) of a column.

    ``threshold_i = min + i * (max - min) / (k + 1)`` for i = 1..k. A constant
    column yields an empty result; floating-point collapse may yield fewer
    than k values (duplicates and endpoint hits are skipped).
    """
    if k < 1:
        raise DataError("threshold count must be >= 1")
    values = np.asarray(column, dtype=np.float64)
    values = values[np.isfinite(values)]
    if values.size == 0:
        raise DataError("column has no finite values")
    mn = float(values.min())
    mx = float(values.max())
    if not mx > mn:
        return np.empty(0, dtype=np.float64)
    step = (mx - mn) / (k + 1)
    out = []
    for i in range(1, k + 1):
        t = mn + i * step
        if t <= mn or t >= mx:
            continue
        if out and t == out[-1]:
            continue
        out.append(t)
    return np.asarray(out, dtype=np.float64)


def holdout_split(dataset: Dataset, train_fraction: float, seed: int):
    """Random (train, test) partition; train size = round(n * train_fraction)."""
    if not 0.0 < train_fraction < 1.0:
        raise DataError("train_fraction must be strictly between 0 and 1")
    n = dataset.n
    n_train = int(round(n * float(train_fraction)))
    if n_train == 0 or n_train == n:
        raise DataError(f"holdout split would leave an empty part (n={n})")
    perm = np.random.default_rng(seed).permutation(n)
    train_idx = np.sort(perm[:n_train])
    test_idx = np.sort(perm[n_train:])
    return dataset.take(train_idx), dataset.take(test_idx)


def k_folds(dataset: Dataset, k: int, seed: int):
    """k cross-validation (train, validation) pairs with disjoint validations."""
    if k < 2:
        raise DataError("k must be >= 2")
    n = dataset.n
    if n < k:
        raise DataError(f"cannot build {k} folds from {n} rows")
    perm = np.random.default_rng(seed).permutation(n)
    base, rem = divmod(n, k)
    pairs = []
    start = 0
    for i in range(k):
        size = base + (1 if i < rem else 0)
        val_idx = np.sort(perm[start : start + size])
        train_idx = np.sort(np.concatenate([perm[:start], perm[start + size :]]))
        pairs.append((dataset.take(train_idx), dataset.take(val_idx)))
        start += size
    return pairs


def synth_biased(n: int, bias: float, seed: int) -> Dataset:
    """Synthetic fixture: 3 numeric + 2 binary features, y driven by feature 0,
    s coupled to y with strength ``bias`` (0 = independent, 1 = identical)."""
    if n < 4:
        raise DataError("need at least 4 rows")
    if not 0.0 <= bias <= 1.0:
        raise DataError("bias must be in [0, 1]")
    rng = np.random.default_rng(seed)
    x0 = rng.normal(0.0, 1.0, n)
    x1 = rng.normal(0.0, 1.0, n)
    x2 = rng.normal(0.0, 1.0, n)
    b0 = rng.integers(0, 2, n).astype(np.float64)
    b1 = rng.integers(0, 2, n).astype(np.float64)
    z = x0 + 0.8 * (2.0 * b0 - 1.0) + 0.5 * x1 + rng.normal(0.0, 0.6, n)
    y = (z > 0.0).astype(np.uint8)
    coupled = rng.random(n) < bias
    s_free = rng.integers(0, 2, n).astype(np.uint8)
    s = np.where(coupled, y, s_free).astype(np.uint8)
    X = np.column_stack([x0, x1, x2, b0, b1])
    return Dataset(
        feature_names=("x0", "x1", "x2", "b0", "b1"),
        feature_kinds=np.array(
            [KIND_NUMERIC, KIND_NUMERIC, KIND_NUMERIC, KIND_BINARY, KIND_BINARY],
            dtype=np.uint8,
        ),
        X=np.ascontiguousarray(X),
        y=y,
        s=s,
        constant_target=bool(y.min() == y.max()),
        constant_sensitive=bool(s.min() == s.max()),
    )
