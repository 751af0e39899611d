import json
import sys

import pytest


def pytest_configure(config):
    config.addinivalue_line(
        "markers", "acceptance: release-gate checks with a printed verdict line"
    )


def pytest_runtest_logreport(report):
    # one PASS/FAIL line per acceptance check, written past the capture
    # machinery so the suite output doubles as a checklist
    if report.when != "call" or "test_acceptance" not in report.nodeid:
        return
    verdict = "PASS" if report.passed else "FAIL"
    name = report.nodeid.split("::")[-1]
    sys.stderr.write(f"[{verdict}] {name}\n")

from bargainbench.catalog import Product, configure_session
from bargainbench.money import cents


@pytest.fixture
def make_product():
    def _make(high, low, codename="electronics_1", category="Electronics", title="Widget"):
        return Product(
            title=title,
            description="A test product.",
            category=category,
            highest_price=cents(high),
            lowest_price=cents(low),
            codename=codename,
        )

    return _make


@pytest.fixture
def make_config(make_product):
    def _make(high, low, f=0.8, max_turns=10, codename="electronics_1"):
        return configure_session(
            make_product(high, low, codename=codename), f, max_turns
        )

    return _make


@pytest.fixture
def write_catalog(tmp_path):
    def _write(records, name="catalog.json"):
        path = tmp_path / name
        path.write_text(json.dumps(records))
        return path

    return _write
