import pytest


def pytest_addoption(parser):
    parser.addoption('--acceptance', action='store_true', default=False,
                     help='run the full-size sweeps')


def pytest_configure(config):
    config.addinivalue_line('markers', 'acceptance: full-size sweep, only runs with --acceptance')


def pytest_collection_modifyitems(config, items):
    if config.getoption('--acceptance'):
        return
    skip = pytest.mark.skip(reason='full-size sweep; pass --acceptance to run')
    for item in items:
        if 'acceptance' in item.keywords:
            item.add_marker(skip)
