"""Shared fixtures for the test suite."""

import pytest

from qc_horizon.dataset import (
    Dataset,
    FilterSpec,
    SystemRecord,
    load_bundled_dataset,
    year_window,
)


@pytest.fixture(scope="session")
def bundled():
    return load_bundled_dataset()


@pytest.fixture(scope="session")
def sc_window():
    """The main analysis view: superconducting announcements, 2007-2020."""
    return FilterSpec(
        technologies=frozenset({"superconducting"}),
        date_window=year_window(2007, 2020),
    )


def make_record(record_id, date, qubits, error, tech="superconducting"):
    return SystemRecord.from_fields(
        record_id=record_id,
        date=date,
        physical_qubits=qubits,
        gate_error_rate=error,
        technology=tech,
    )


@pytest.fixture
def tiny_dataset():
    """Six records spanning 2010-2020 with an improving error trend."""
    return Dataset.from_records([
        make_record("a", "2010-06", 2, 5e-2),
        make_record("b", "2012-03", 4, 2e-2),
        make_record("c", "2014-09", 8, 8e-3),
        make_record("d", "2016-01", 16, 4e-3),
        make_record("e", "2018-07", 40, 2e-3),
        make_record("f", "2020-11", 100, 1e-3),
    ])
