"""
Report emission for hyperlab runs.

CSV data files go through pandas with 17 significant digits so a rerun from the
same manifest is byte-identical. Key-value records share the run-file format
read by config.load_key_value_file.
"""
import json
import logging
import os
from typing import Any, Dict, List, Mapping, Optional, Sequence, Union

import numpy as np
import pandas as pd
from dotenv import dotenv_values

from __version__ import __version__
from errors import DomainError
from models.base_model import SampleField, SamplePath

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.17g"
MANIFEST_NAME = "manifest.txt"

PATH_COLUMNS = ["t", "value"]
MOMENT_COLUMNS = ["p", "ratio", "max_ratio", "bound", "pass"]
TAIL_COLUMNS = ["u", "empirical_prob", "bound", "pass"]


def format_value(value: Any) -> str:
    """Render one record value; floats keep every digit, sequences are comma-joined."""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return FLOAT_FORMAT % float(value)
    if isinstance(value, (list, tuple)):
        return ",".join(format_value(item) for item in value)
    if value is None:
        return ""
    return str(value)


def _json_ready(value: Any) -> Any:
    if isinstance(value, Mapping):
        return {str(key): _json_ready(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json_ready(item) for item in value]
    if isinstance(value, (np.bool_, bool)):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, (np.floating, float)):
        value = float(value)
        return value if np.isfinite(value) else str(value)
    return value


class ReportWriter:
    """Writes the files of one run into its output directory."""

    def __init__(self, out_dir: str):
        self.out_dir = out_dir
        self.written: List[str] = []
        self.logger = logging.getLogger(f"{__name__}.{self.__class__.__name__}")
        os.makedirs(out_dir, exist_ok=True)

    def _path(self, name: str) -> str:
        path = os.path.join(self.out_dir, name)
        self.written.append(path)
        return path

    def write_frame(self, name: str, frame: pd.DataFrame) -> str:
        path = self._path(name)
        frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
        self.logger.debug(f"Wrote {len(frame)} rows to {path}")
        return path

    def write_rows(self, name: str, rows: Sequence[Mapping[str, Any]],
                   columns: Optional[Sequence[str]] = None) -> str:
        frame = pd.DataFrame(list(rows), columns=list(columns) if columns else None)
        for column in frame.columns:
            if frame[column].dtype == bool:
                frame[column] = frame[column].map({True: "true", False: "false"})
        return self.write_frame(name, frame)

    def write_path(self, name: str, path: SamplePath) -> str:
        return self.write_frame(name, path_frame(path))

    def write_field(self, name: str, field: SampleField) -> str:
        return self.write_frame(name, field_frame(field))

    def write_record(self, name: str, record: Mapping[str, Any]) -> str:
        """key=value lines in insertion order."""
        path = self._path(name)
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            for key, value in record.items():
                f.write(f"{key}={format_value(value)}\n")
        return path

    def write_json(self, name: str, payload: Mapping[str, Any]) -> str:
        path = self._path(name)
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            json.dump(_json_ready(payload), f, sort_keys=True, indent=2)
            f.write("\n")
        return path

    def write_manifest(self, settings: Mapping[str, Any]) -> str:
        """Every run setting plus the package version; reusable as --config."""
        record = {"version": __version__}
        record.update(settings)
        return self.write_record(MANIFEST_NAME, record)


def path_frame(path: SamplePath) -> pd.DataFrame:
    return pd.DataFrame({"t": path.grid_points, "value": path.values})


def field_frame(field: SampleField) -> pd.DataFrame:
    """Columns t1..tn, value in row-major order of the product grid."""
    mesh = np.meshgrid(*field.axes, indexing="ij")
    columns = {f"t{j + 1}": axis_values.ravel() for j, axis_values in enumerate(mesh)}
    columns["value"] = field.flat_values
    return pd.DataFrame(columns)


def read_sample(path: str) -> Union[SamplePath, SampleField]:
    """
    Load a path CSV (t,value) or a field CSV (t1..tn,value) written by this module.

    Raises:
        DomainError: for unknown columns or a grid that is not a uniform product grid
    """
    frame = pd.read_csv(path)
    columns = list(frame.columns)
    if columns == PATH_COLUMNS:
        return SamplePath(frame["t"].to_numpy(float), frame["value"].to_numpy(float))
    axis_columns = [c for c in columns if c != "value"]
    if "value" not in columns or axis_columns != [f"t{j + 1}" for j in range(len(axis_columns))]:
        raise DomainError(f"{path}: expected columns t,value or t1..tn,value, got {columns}")
    frame = frame.sort_values(axis_columns, kind="mergesort")
    axes = [np.unique(frame[c].to_numpy(float)) for c in axis_columns]
    sizes = tuple(axis.size for axis in axes)
    if int(np.prod(sizes)) != len(frame):
        raise DomainError(f"{path}: {len(frame)} rows do not form a {sizes} product grid")
    values = frame["value"].to_numpy(float).reshape(sizes)
    return SampleField(tuple(axes), values)


def read_rows(path: str) -> pd.DataFrame:
    return pd.read_csv(path)


def read_record(path: str) -> Dict[str, Optional[str]]:
    """key=value file as strings, in file order."""
    if not os.path.exists(path):
        raise FileNotFoundError(f"Record file not found: {path}")
    return dict(dotenv_values(path))


def read_json(path: str) -> Dict[str, Any]:
    with open(path, "r", encoding="utf-8") as f:
        return json.load(f)

