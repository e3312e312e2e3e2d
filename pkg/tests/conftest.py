import numpy as np
import pytest

from chartforge.chart_core import ChartSpec, DataTable, derive_geometry, parse_table


@pytest.fixture
def bar_table() -> DataTable:
    return parse_table(
        b"year,area\n2000,3.1\n2001,3.4\n2002,2.9\n2003,4.4\n2004,4.1",
        "csv",
        title="The global change in desert area",
    )


@pytest.fixture
def bar_spec() -> ChartSpec:
    return ChartSpec("bar", "year", "area")


@pytest.fixture
def bar_geometry(bar_table, bar_spec):
    return derive_geometry(bar_table, bar_spec)


@pytest.fixture
def line_geometry(bar_table):
    return derive_geometry(bar_table, ChartSpec("line", "year", "area"))


@pytest.fixture
def pie_geometry(bar_table):
    return derive_geometry(bar_table, ChartSpec("pie", "year", "area"))


@pytest.fixture
def scatter_geometry(bar_table):
    return derive_geometry(
        bar_table, ChartSpec("scatter", "year", "area", size_column="area")
    )


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240811)
