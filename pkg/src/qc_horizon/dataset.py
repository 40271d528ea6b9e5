"""Hardware-announcement dataset: parsing, validation, filtering, matrices.

The canonical on-disk form is a UTF-8 CSV with header
``id,date,physical_qubits,gate_error_rate,technology,source`` where the
date column accepts ``YYYY``, ``YYYY-MM`` or ``YYYY-MM-DD`` and an empty
cell means missing.
"""

from __future__ import annotations

import csv
import hashlib
import io
import math
import re
from dataclasses import dataclass, field
from importlib import resources
from typing import Iterable, Mapping, Optional

import numpy as np

from .errors import InsufficientDataError, RecordValidationError, SchemaError
from .glq import DEFAULT_QEC, QecParams

__all__ = [
    "TECHNOLOGIES",
    "SystemRecord",
    "Dataset",
    "FilterSpec",
    "ParseResult",
    "RejectedRow",
    "impute_fractional_year",
    "parse_dataset",
    "apply_filter",
    "design_matrices",
    "serialize_dataset",
    "load_bundled_dataset",
    "year_window",
]

TECHNOLOGIES = frozenset(
    {"superconducting", "trapped-ion", "spin", "silicon", "photonic", "other"}
)

# Cumulative days before each month in the fixed 365-day reference year.
_CUM_DAYS = (0, 31, 59, 90, 120, 151, 181, 212, 243, 273, 304, 334)
_MONTH_LEN = (31, 29, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31)

_DATE_RE = re.compile(r"^(\d{4})(?:-(\d{2}))?(?:-(\d{2}))?$")

DEFAULT_SCHEMA = {
    "record_id": "id",
    "date": "date",
    "physical_qubits": "physical_qubits",
    "gate_error_rate": "gate_error_rate",
    "technology": "technology",
    "source": "source",
}


def impute_fractional_year(
    year: int, month: Optional[int] = None, day: Optional[int] = None
) -> float:
    """Convert a possibly partial date to a fractional year.

    Year-only dates are imputed to 1 June, year-month dates to the 15th.
    A fixed 365-day year is used for the day-of-year fraction; sub-day
    precision is far below the noise in the data.
    """
    if not 1990 <= year <= 2100:
        raise RecordValidationError(f"year {year} outside supported range [1990, 2100]")
    if month is None:
        if day is not None:
            raise RecordValidationError("day given without month")
        month, day = 6, 1
    elif day is None:
        day = 15
    if not 1 <= month <= 12:
        raise RecordValidationError(f"invalid month {month}")
    max_day = _MONTH_LEN[month - 1]
    if month == 2 and day == 29 and year % 4 != 0:
        max_day = 28
    if not 1 <= day <= max_day:
        raise RecordValidationError(f"invalid day {day} for month {month}")
    # Feb 29 shares the fraction of Mar 1 in the 365-day reference.
    day_of_year = min(_CUM_DAYS[month - 1] + day, 365)
    return year + (day_of_year - 1) / 365.0


def _parse_date(text: str) -> tuple[str, float]:
    m = _DATE_RE.match(text.strip())
    if m is None:
        raise RecordValidationError(f"unparseable date {text!r}")
    year = int(m.group(1))
    month = int(m.group(2)) if m.group(2) else None
    day = int(m.group(3)) if m.group(3) else None
    return text.strip(), impute_fractional_year(year, month, day)


@dataclass(frozen=True)
class SystemRecord:
    """One hardware announcement scored on the two metrics of interest."""

    record_id: str
    date: str
    fractional_year: float
    physical_qubits: int
    gate_error_rate: Optional[float]
    technology: str
    source: str = ""
    annotations: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self):
        if self.physical_qubits < 1:
            raise RecordValidationError(
                f"record {self.record_id}: physical_qubits must be >= 1"
            )
        if self.gate_error_rate is not None and not (0.0 < self.gate_error_rate < 1.0):
            raise RecordValidationError(
                f"record {self.record_id}: gate_error_rate must lie in (0, 1), "
                f"got {self.gate_error_rate}"
            )
        if self.technology not in TECHNOLOGIES:
            raise RecordValidationError(
                f"record {self.record_id}: unknown technology {self.technology!r}"
            )

    @classmethod
    def from_fields(cls, record_id, date, physical_qubits, gate_error_rate,
                    technology, source="", annotations=None):
        date, fy = _parse_date(date)
        return cls(
            record_id=record_id,
            date=date,
            fractional_year=fy,
            physical_qubits=physical_qubits,
            gate_error_rate=gate_error_rate,
            technology=technology,
            source=source,
            annotations=annotations or {},
        )


@dataclass(frozen=True)
class Provenance:
    source_digest: str
    source_name: str = ""


@dataclass(frozen=True)
class Dataset:
    """Immutable, chronologically sorted collection of system records."""

    records: tuple[SystemRecord, ...]
    provenance: Optional[Provenance] = None

    @classmethod
    def from_records(cls, records: Iterable[SystemRecord], provenance=None) -> "Dataset":
        ordered = tuple(sorted(records, key=lambda r: (r.fractional_year, r.record_id)))
        seen = set()
        for r in ordered:
            if r.record_id in seen:
                raise RecordValidationError(f"duplicate record_id {r.record_id!r}")
            seen.add(r.record_id)
        return cls(records=ordered, provenance=provenance)

    def __len__(self):
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def with_error_rate(self) -> "Dataset":
        return Dataset(
            records=tuple(r for r in self.records if r.gate_error_rate is not None),
            provenance=self.provenance,
        )

    def view_counts(self, qec: QecParams = DEFAULT_QEC) -> dict:
        """Counts of the dataset views used throughout the analysis."""
        with_error = [r for r in self.records if r.gate_error_rate is not None]
        glq_defined = [r for r in with_error if r.gate_error_rate < qec.p_th]
        return {
            "total": len(self.records),
            "with_error_rate": len(with_error),
            "glq_defined": len(glq_defined),
        }


@dataclass(frozen=True)
class FilterSpec:
    """Criteria for selecting a dataset view; absent criteria match all."""

    technologies: Optional[frozenset] = None
    date_window: Optional[tuple[float, float]] = None
    min_physical_qubits: Optional[int] = None
    require_error_rate: bool = False

    def __post_init__(self):
        if self.technologies is not None:
            object.__setattr__(self, "technologies", frozenset(self.technologies))
            unknown = self.technologies - TECHNOLOGIES
            if unknown:
                raise RecordValidationError(f"unknown technologies {sorted(unknown)}")
        if self.date_window is not None:
            start, end = self.date_window
            if start > end:
                raise RecordValidationError(
                    f"date window start {start} exceeds end {end}"
                )

    def matches(self, record: SystemRecord) -> bool:
        if self.technologies is not None and record.technology not in self.technologies:
            return False
        if self.date_window is not None:
            start, end = self.date_window
            if not start <= record.fractional_year <= end:
                return False
        if (
            self.min_physical_qubits is not None
            and record.physical_qubits < self.min_physical_qubits
        ):
            return False
        if self.require_error_rate and record.gate_error_rate is None:
            return False
        return True


def year_window(from_year: int, to_year: int) -> tuple[float, float]:
    """Inclusive fractional-year window covering whole calendar years."""
    return (float(from_year), to_year + 1.0 - 1e-9)


def apply_filter(dataset: Dataset, spec: FilterSpec) -> Dataset:
    return Dataset(
        records=tuple(r for r in dataset.records if spec.matches(r)),
        provenance=dataset.provenance,
    )


@dataclass(frozen=True)
class RejectedRow:
    row: int
    reason: str
    column: Optional[str] = None


@dataclass(frozen=True)
class ParseResult:
    dataset: Dataset
    rejects: tuple[RejectedRow, ...]


def _parse_float_field(text: str, row_num: int, column: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise RecordValidationError(
            f"unparseable number {text!r}", row=row_num, column=column
        ) from None
    if math.isnan(value) or math.isinf(value):
        raise RecordValidationError(
            f"non-finite value {text!r}", row=row_num, column=column
        )
    return value


def parse_dataset(
    stream,
    schema: Optional[Mapping[str, str]] = None,
    strict: bool = False,
    source_name: str = "",
) -> ParseResult:
    """Parse a CSV stream of announcements into a validated Dataset.

    In lenient mode (the default) malformed rows are skipped and reported
    in the returned rejects; in strict mode the first bad row raises.
    """
    if isinstance(stream, (str, bytes)):
        stream = io.StringIO(stream if isinstance(stream, str) else stream.decode())
    text = stream.read()
    digest = hashlib.sha256(text.encode()).hexdigest()
    reader = csv.DictReader(io.StringIO(text))
    columns = schema or DEFAULT_SCHEMA
    header = reader.fieldnames or []
    mandatory = ["record_id", "date", "physical_qubits", "technology"]
    for logical in mandatory:
        if columns[logical] not in header:
            raise SchemaError(f"missing mandatory column {columns[logical]!r}")

    records: list[SystemRecord] = []
    rejects: list[RejectedRow] = []
    seen_ids: set[str] = set()
    for row_num, row in enumerate(reader, start=2):
        try:
            record_id = (row.get(columns["record_id"]) or "").strip()
            if not record_id:
                raise RecordValidationError(
                    "empty id", row=row_num, column=columns["record_id"]
                )
            if record_id in seen_ids:
                raise RecordValidationError(
                    f"duplicate id {record_id!r}", row=row_num,
                    column=columns["record_id"],
                )
            date_text = (row.get(columns["date"]) or "").strip()
            if not date_text:
                raise RecordValidationError(
                    "empty date", row=row_num, column=columns["date"]
                )
            qubits_text = (row.get(columns["physical_qubits"]) or "").strip()
            try:
                qubits = int(qubits_text)
            except ValueError:
                raise RecordValidationError(
                    f"unparseable qubit count {qubits_text!r}",
                    row=row_num, column=columns["physical_qubits"],
                ) from None
            error_text = (row.get(columns["gate_error_rate"]) or "").strip()
            error_rate = (
                _parse_float_field(error_text, row_num, columns["gate_error_rate"])
                if error_text
                else None
            )
            technology = (row.get(columns["technology"]) or "").strip()
            source = (row.get(columns["source"]) or "").strip()
            try:
                record = SystemRecord.from_fields(
                    record_id=record_id,
                    date=date_text,
                    physical_qubits=qubits,
                    gate_error_rate=error_rate,
                    technology=technology,
                    source=source,
                )
            except RecordValidationError as exc:
                raise RecordValidationError(str(exc), row=row_num) from None
        except RecordValidationError as exc:
            if strict:
                raise
            rejects.append(RejectedRow(row=exc.row or row_num, reason=str(exc),
                                       column=exc.column))
            continue
        seen_ids.add(record_id)
        records.append(record)

    dataset = Dataset.from_records(
        records, provenance=Provenance(source_digest=digest, source_name=source_name)
    )
    return ParseResult(dataset=dataset, rejects=tuple(rejects))


def serialize_dataset(dataset: Dataset) -> str:
    """Canonical normalized CSV; round-trips through parse_dataset."""
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["id", "date", "physical_qubits", "gate_error_rate",
                     "technology", "source"])
    for r in dataset.records:
        writer.writerow([
            r.record_id,
            r.date,
            r.physical_qubits,
            "" if r.gate_error_rate is None else repr(r.gate_error_rate),
            r.technology,
            r.source,
        ])
    return out.getvalue()


def design_matrices(dataset: Dataset) -> tuple[np.ndarray, np.ndarray]:
    """(X, Y) for the multivariate log-linear model.

    X stacks an intercept with the fractional year; Y columns are the
    natural logs of physical qubits and gate error rate.  Records lacking
    the error rate are excluded before counting n.
    """
    usable = [r for r in dataset.records if r.gate_error_rate is not None]
    if len(usable) < 3:
        raise InsufficientDataError(
            f"need at least 3 records with both metrics, have {len(usable)}"
        )
    X = np.array([[1.0, r.fractional_year] for r in usable])
    Y = np.array(
        [[math.log(r.physical_qubits), math.log(r.gate_error_rate)] for r in usable]
    )
    return X, Y


def load_bundled_dataset() -> Dataset:
    """The curated announcement snapshot shipped with the package."""
    text = (
        resources.files("qc_horizon.data")
        .joinpath("quantum_systems.csv")
        .read_text(encoding="utf-8")
    )
    result = parse_dataset(text, strict=True, source_name="quantum_systems.csv")
    return result.dataset
