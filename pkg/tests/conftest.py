"""Shared fixtures: the example charts, witnesses and maps under fixtures/."""

import pathlib

import pytest

from lleekit.bisim import BisimMap
from lleekit.chart import Chart
from lleekit.lee import Witness

FIXTURES = pathlib.Path(__file__).resolve().parent.parent / "fixtures"


def fixture_path(name):
    return FIXTURES / name


def load_chart(name):
    return Chart.from_text(fixture_path(name).read_text())


def load_witness(name, chart):
    return Witness.from_text(fixture_path(name).read_text(), chart)


def load_map(name, source, target):
    return BisimMap.from_text(fixture_path(name).read_text(), source, target)


@pytest.fixture(scope="session")
def chart_g():
    return load_chart("g.chart")


@pytest.fixture(scope="session")
def witness_g_hat(chart_g):
    return load_witness("g_hat.witness", chart_g)


@pytest.fixture(scope="session")
def chart_h():
    return load_chart("h.chart")


@pytest.fixture(scope="session")
def witness_h_hat(chart_h):
    return load_witness("h_hat.witness", chart_h)


@pytest.fixture(scope="session")
def map_g_to_h(chart_g, chart_h):
    return load_map("g_to_h.map", chart_g, chart_h)


@pytest.fixture(scope="session")
def chart_ci():
    return load_chart("ci.chart")


@pytest.fixture(scope="session")
def witness_ci_hat(chart_ci):
    return load_witness("ci_hat.witness", chart_ci)


@pytest.fixture(scope="session")
def witness_ci_hat_prime(chart_ci):
    return load_witness("ci_hat_prime.witness", chart_ci)


@pytest.fixture(scope="session")
def chart_cii():
    return load_chart("cii.chart")


@pytest.fixture(scope="session")
def witness_cii_hat(chart_cii):
    return load_witness("cii_hat.witness", chart_cii)


@pytest.fixture(scope="session")
def map_cii_to_ci(chart_cii, chart_ci):
    return load_map("cii_to_ci.map", chart_cii, chart_ci)
