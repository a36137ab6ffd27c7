"""NSL-KDD ingestion: typed records, label binarization, and the feature schema.

Records are kept as raw field strings so that parsing followed by
re-serialization reproduces the input line byte for byte. Numeric fields are
validated at parse time but converted only during encoding.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import ParseError

NUMERIC = "numeric"
CATEGORICAL = "categorical"

# Official NSL-KDD column order: 41 features, then label, then difficulty.
NSL_KDD_FEATURES: tuple[tuple[str, str], ...] = (
    ("duration", NUMERIC),
    ("protocol_type", CATEGORICAL),
    ("service", CATEGORICAL),
    ("flag", CATEGORICAL),
    ("src_bytes", NUMERIC),
    ("dst_bytes", NUMERIC),
    ("land", NUMERIC),
    ("wrong_fragment", NUMERIC),
    ("urgent", NUMERIC),
    ("hot", NUMERIC),
    ("num_failed_logins", NUMERIC),
    ("logged_in", NUMERIC),
    ("num_compromised", NUMERIC),
    ("root_shell", NUMERIC),
    ("su_attempted", NUMERIC),
    ("num_root", NUMERIC),
    ("num_file_creations", NUMERIC),
    ("num_shells", NUMERIC),
    ("num_access_files", NUMERIC),
    ("num_outbound_cmds", NUMERIC),
    ("is_host_login", NUMERIC),
    ("is_guest_login", NUMERIC),
    ("count", NUMERIC),
    ("srv_count", NUMERIC),
    ("serror_rate", NUMERIC),
    ("srv_serror_rate", NUMERIC),
    ("rerror_rate", NUMERIC),
    ("srv_rerror_rate", NUMERIC),
    ("same_srv_rate", NUMERIC),
    ("diff_srv_rate", NUMERIC),
    ("srv_diff_host_rate", NUMERIC),
    ("dst_host_count", NUMERIC),
    ("dst_host_srv_count", NUMERIC),
    ("dst_host_same_srv_rate", NUMERIC),
    ("dst_host_diff_srv_rate", NUMERIC),
    ("dst_host_same_src_port_rate", NUMERIC),
    ("dst_host_srv_diff_host_rate", NUMERIC),
    ("dst_host_serror_rate", NUMERIC),
    ("dst_host_srv_serror_rate", NUMERIC),
    ("dst_host_rerror_rate", NUMERIC),
    ("dst_host_srv_rerror_rate", NUMERIC),
)

NORMAL_LABEL = "normal"


class BinaryLabel(enum.Enum):
    NORMAL = "normal"
    ANOMALOUS = "anomalous"


@dataclass(frozen=True)
class FeatureSchema:
    """Ordered column catalog plus fitted categorical vocabularies.

    Vocabularies start empty and are filled by :func:`fit_vocabularies`;
    entry order is first appearance in the fitting data.
    """

    columns: tuple[tuple[str, str], ...]
    vocabularies: dict[str, tuple[str, ...]] = field(default_factory=dict)
    label_column: str = "label"
    difficulty_column: str = "difficulty"

    @property
    def column_names(self) -> tuple[str, ...]:
        return tuple(name for name, _ in self.columns)

    @property
    def categorical_columns(self) -> tuple[str, ...]:
        return tuple(name for name, kind in self.columns if kind == CATEGORICAL)

    @property
    def numeric_columns(self) -> tuple[str, ...]:
        return tuple(name for name, kind in self.columns if kind == NUMERIC)

    @property
    def field_count(self) -> int:
        """Fields per data line: features plus label plus difficulty."""
        return len(self.columns) + 2

    def index_of(self, name: str) -> int:
        for i, (col, _) in enumerate(self.columns):
            if col == name:
                return i
        raise KeyError(f"unknown column {name!r}")

    def encoded_dimension(self) -> int:
        """Width of an encoded vector: numeric columns + one-hot blocks."""
        dim = 0
        for name, kind in self.columns:
            if kind == NUMERIC:
                dim += 1
            else:
                vocab = self.vocabularies.get(name)
                if vocab is None:
                    raise ValueError(f"vocabulary not fitted for column {name!r}")
                dim += len(vocab)
        return dim


@dataclass(frozen=True, slots=True)
class RawRecord:
    """One parsed data line: raw feature strings, label, and difficulty."""

    values: tuple[str, ...]
    label: str
    difficulty: int


def nsl_kdd_schema() -> FeatureSchema:
    return FeatureSchema(columns=NSL_KDD_FEATURES)


def binarize_label(label: str) -> BinaryLabel:
    """Map the raw label string to normal/anomalous ("normal" vs anything else)."""
    if not label:
        raise ValueError("empty label")
    return BinaryLabel.NORMAL if label == NORMAL_LABEL else BinaryLabel.ANOMALOUS


def anomalous_mask(labels: Iterable[BinaryLabel]) -> np.ndarray:
    """Boolean array, True where the label is anomalous."""
    return np.fromiter(
        (lab is BinaryLabel.ANOMALOUS for lab in labels), dtype=bool
    )


def record_labels(records: Sequence[RawRecord]) -> list[BinaryLabel]:
    return [binarize_label(r.label) for r in records]


def _check_numeric(value: str) -> bool:
    try:
        parsed = float(value)
    except ValueError:
        return False
    return math.isfinite(parsed)


def parse_line(line: str, schema: FeatureSchema, lineno: int, source: str) -> RawRecord:
    parts = line.split(",")
    expected = schema.field_count
    if len(parts) != expected:
        raise ParseError(
            f"{source}: line {lineno}: expected {expected} fields, got {len(parts)}"
        )
    values = tuple(parts[: len(schema.columns)])
    for (name, kind), value in zip(schema.columns, values):
        if kind == NUMERIC and not _check_numeric(value):
            raise ParseError(
                f"{source}: line {lineno}: non-numeric value {value!r} "
                f"in numeric column {name!r}"
            )
    label = parts[-2]
    if not label:
        raise ParseError(f"{source}: line {lineno}: empty label")
    try:
        difficulty = int(parts[-1])
    except ValueError:
        raise ParseError(
            f"{source}: line {lineno}: non-integer difficulty {parts[-1]!r}"
        ) from None
    return RawRecord(values=values, label=label, difficulty=difficulty)


def parse_nslkdd(path: str | Path, schema: FeatureSchema) -> list[RawRecord]:
    """Parse a comma-separated NSL-KDD file into records, in file order."""
    path = Path(path)
    records: list[RawRecord] = []
    with path.open("r", encoding="utf-8") as handle:
        for lineno, raw in enumerate(handle, start=1):
            line = raw.strip()
            if not line:
                continue
            records.append(parse_line(line, schema, lineno, str(path)))
    return records


def serialize_record(record: RawRecord) -> str:
    """Inverse of parsing: the original comma-separated line."""
    return ",".join((*record.values, record.label, str(record.difficulty)))


def concat_datasets(a: Sequence[RawRecord], b: Sequence[RawRecord]) -> list[RawRecord]:
    """Concatenate two record lists parsed under the same schema."""
    arities = {len(r.values) for r in a} | {len(r.values) for r in b}
    if len(arities) > 1:
        raise ValueError(f"schema mismatch: records have differing arities {sorted(arities)}")
    return list(a) + list(b)


def drop_feature(
    schema: FeatureSchema, records: Sequence[RawRecord], name: str
) -> tuple[FeatureSchema, list[RawRecord]]:
    """Remove one column from the schema and from every record, order preserved."""
    try:
        idx = schema.index_of(name)
    except KeyError:
        raise ValueError(f"unknown column {name!r}") from None
    columns = schema.columns[:idx] + schema.columns[idx + 1 :]
    vocabularies = {k: v for k, v in schema.vocabularies.items() if k != name}
    new_schema = replace(schema, columns=columns, vocabularies=vocabularies)
    new_records = [
        replace(r, values=r.values[:idx] + r.values[idx + 1 :]) for r in records
    ]
    return new_schema, new_records


def fit_vocabularies(
    schema: FeatureSchema, records: Sequence[RawRecord]
) -> FeatureSchema:
    """Fill categorical vocabularies from the data (first-appearance order)."""
    positions = {
        name: schema.index_of(name) for name in schema.categorical_columns
    }
    vocab: dict[str, dict[str, None]] = {name: {} for name in positions}
    for record in records:
        for name, idx in positions.items():
            vocab[name].setdefault(record.values[idx])
    return replace(
        schema,
        vocabularies={name: tuple(seen) for name, seen in vocab.items()},
    )
