from pathlib import Path

import pytest

from lamcert.bundle import load_manifold

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture(scope="session")
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture(scope="session")
def family_bundle_path() -> Path:
    return FIXTURES / "two_cusp_family.json"


@pytest.fixture(scope="session")
def knot_bundle_path() -> Path:
    return FIXTURES / "knot_square.json"


@pytest.fixture(scope="session")
def family_bundle(family_bundle_path):
    return load_manifold(family_bundle_path)


@pytest.fixture(scope="session")
def knot_bundle(knot_bundle_path):
    return load_manifold(knot_bundle_path)
