import pytest

from polypulse.catalog import builtin_catalog_path, load_catalog


@pytest.fixture(scope="session")
def builtin_entries():
    return load_catalog(builtin_catalog_path(), validate=False)
