"""Export census link exteriors to manifold bundle files."""

__version__ = "0.1.0"

from .backend import (
    CuspData,
    FilledCores,
    ManifoldFacts,
    RecordedBackend,
    filling_key,
    resolve_backend,
    synthetic_dataset_path,
)
from .errors import (
    BackendUnavailableError,
    ExportError,
    FillingError,
    UnknownManifoldError,
)
from .export import (
    ConeData,
    ExportRequest,
    build_bundle,
    dumps_canonical,
    export,
    parse_filling,
    record_dataset,
)

__all__ = [
    "BackendUnavailableError",
    "ConeData",
    "CuspData",
    "ExportError",
    "ExportRequest",
    "FilledCores",
    "FillingError",
    "ManifoldFacts",
    "RecordedBackend",
    "UnknownManifoldError",
    "build_bundle",
    "dumps_canonical",
    "export",
    "filling_key",
    "parse_filling",
    "record_dataset",
    "resolve_backend",
    "synthetic_dataset_path",
]
