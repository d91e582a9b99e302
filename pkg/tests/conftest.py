import pytest


def pytest_addoption(parser):
    parser.addoption("--run-heavy", action="store_true", default=False, help="heavy マーク付きのテストも実行する")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--run-heavy"):
        return
    skip_heavy = pytest.mark.skip(reason="--run-heavy を指定したときだけ実行")
    for item in items:
        if "heavy" in item.keywords:
            item.add_marker(skip_heavy)
