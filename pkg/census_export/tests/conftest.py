import pytest

from census_export.backend import RecordedBackend, synthetic_dataset_path


@pytest.fixture(scope="session")
def synth_path():
    return synthetic_dataset_path()


@pytest.fixture(scope="session")
def synth_backend(synth_path):
    return RecordedBackend(synth_path)
