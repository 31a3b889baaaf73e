"""CSV output with YAML metadata sidecars.

Floats are written with 17 significant digits, '.' as decimal separator and
'\\n' line endings, so the same inputs always give byte-identical files.
"""

import logging
from pathlib import Path
from typing import Any, Dict, Optional, Union

import numpy as np
import pandas as pd
import yaml

from .. import __version__
from ..models import TimeSeries

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.17g"


def _plain(value: Any) -> Any:
    """numpy scalars and arrays to YAML-safe builtins."""
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return [_plain(v) for v in value.tolist()]
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, float) and np.isinf(value):
        return "inf" if value > 0 else "-inf"
    if isinstance(value, Path):
        return str(value)
    return value


def series_frame(series: TimeSeries) -> pd.DataFrame:
    return pd.DataFrame({"t": series.t, **series.columns})


def write_frame(frame: pd.DataFrame, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    logger.info(f"Wrote {len(frame)} rows to {path}")
    return path


def metadata_path(path: Union[str, Path]) -> Path:
    path = Path(path)
    return path.with_name(f"{path.stem}.meta.yaml")


def write_metadata(path: Union[str, Path], metadata: Dict[str, Any]) -> Path:
    target = metadata_path(path)
    document = {"generator": f"sbc-dephasing {__version__}", **_plain(metadata)}
    with open(target, "w", newline="\n") as f:
        yaml.safe_dump(document, f, default_flow_style=False, sort_keys=True)
    return target


def write_series(series: TimeSeries, path: Union[str, Path], metadata: Optional[Dict[str, Any]] = None) -> Path:
    """Write ``series`` as CSV and its metadata as ``<stem>.meta.yaml`` next to it."""
    path = write_frame(series_frame(series), path)
    write_metadata(path, {**series.metadata, **(metadata or {})})
    return path


def read_series(path: Union[str, Path]) -> TimeSeries:
    """Load a CSV written by :func:`write_series`; metadata is read from the sidecar when present."""
    path = Path(path)
    frame = pd.read_csv(path, float_precision="round_trip")
    meta_file = metadata_path(path)
    metadata = {}
    if meta_file.exists():
        with open(meta_file) as f:
            metadata = yaml.safe_load(f) or {}
    columns = {name: frame[name].to_numpy() for name in frame.columns if name != "t"}
    return TimeSeries(frame["t"].to_numpy(), columns, metadata)


__all__ = [
    "FLOAT_FORMAT",
    "metadata_path",
    "read_series",
    "series_frame",
    "write_frame",
    "write_metadata",
    "write_series",
]
