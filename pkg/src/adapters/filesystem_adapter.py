"""FileSystemAdapter - Data, graph, model and configuration files.

Provides file-based I/O with:
- Data CSV loading with validation (header, numeric cells, no missing values,
  no constant columns) and saving
- Graph JSON and Model JSON via the domain objects' dict formats
- YAML and JSON configuration files, chosen by suffix
"""

from __future__ import annotations

import json
import logging
from pathlib import Path
from typing import Any

import numpy as np
import pandas as pd
import yaml

from src.core.domain.graph import WindowGraph
from src.core.domain.ground_truth import GroundTruthModel

logger = logging.getLogger(__name__)


class ConfigurationError(Exception):
    """Raised when configuration is invalid."""

    def __init__(self, path: str, message: str) -> None:
        self.path = path
        super().__init__(f"Configuration error in '{path}': {message}")


class DataValidationError(Exception):
    """Raised when a data CSV is unusable; row is the 1-based file line (None: whole column)."""

    def __init__(self, row: int | None, column: str | None, message: str) -> None:
        self.row = row
        self.column = column
        location = ", ".join(
            part
            for part in (
                f"line {row}" if row is not None else "",
                f"column '{column}'" if column is not None else "",
            )
            if part
        )
        super().__init__(f"{location}: {message}" if location else message)


def _looks_numeric(name: str) -> bool:
    try:
        float(name)
    except ValueError:
        return False
    return True


class FileSystemAdapter:
    """Adapter for the engine's file formats.

    Relative paths are resolved against base_path.
    """

    def __init__(self, base_path: str | Path | None = None) -> None:
        """Initialize FileSystemAdapter.

        Args:
            base_path: Base directory for relative paths (defaults to cwd)
        """
        self._base_path = Path(base_path) if base_path else Path.cwd()

    def _resolve_path(self, path: str | Path) -> Path:
        p = Path(path)
        if p.is_absolute():
            return p
        return self._base_path / p

    def _existing(self, path: str | Path) -> Path:
        full_path = self._resolve_path(path)
        if not full_path.exists():
            raise FileNotFoundError(f"File not found: {full_path}")
        return full_path

    # ------------------------------------------------------------------
    # Data CSV
    # ------------------------------------------------------------------

    def load_csv(self, path: str | Path) -> pd.DataFrame:
        """Load a data CSV with a header row and one row per time step.

        Raises:
            FileNotFoundError: If the file doesn't exist
            DataValidationError: On a missing header, empty, non-numeric or
                missing cells, or constant columns
        """
        full_path = self._existing(path)
        try:
            frame = pd.read_csv(full_path, dtype=str, keep_default_na=False)
        except pd.errors.EmptyDataError as e:
            raise DataValidationError(None, None, f"{full_path} is empty") from e
        except pd.errors.ParserError as e:
            raise DataValidationError(None, None, f"Malformed CSV: {e}") from e

        if frame.shape[1] == 0 or frame.shape[0] == 0:
            raise DataValidationError(None, None, "CSV needs a header and at least one data row")
        for name in frame.columns:
            if _looks_numeric(str(name)):
                raise DataValidationError(1, str(name), "header row is missing")

        # Data row r (0-based) sits on file line r + 2
        numeric = pd.DataFrame(index=frame.index)
        for name in frame.columns:
            raw = frame[name].str.strip()
            missing = raw == ""
            if missing.any():
                row = int(np.argmax(missing.to_numpy()))
                raise DataValidationError(row + 2, str(name), "missing value")
            values = pd.to_numeric(raw, errors="coerce")
            bad = values.isna() | ~np.isfinite(values.to_numpy(dtype=float, na_value=np.nan))
            if bad.any():
                row = int(np.argmax(bad.to_numpy()))
                raise DataValidationError(
                    row + 2, str(name), f"non-numeric or non-finite value {raw.iloc[row]!r}"
                )
            numeric[name] = values
            if len(values) > 1 and values.nunique() == 1:
                raise DataValidationError(None, str(name), "column is constant")

        logger.debug("Loaded %s: %d rows x %d columns", full_path, *numeric.shape)
        return numeric

    def save_csv(self, path: str | Path, data: pd.DataFrame, *, create_dirs: bool = True) -> None:
        full_path = self._resolve_path(path)
        if create_dirs:
            full_path.parent.mkdir(parents=True, exist_ok=True)
        data.to_csv(full_path, index=False)

    # ------------------------------------------------------------------
    # JSON / YAML
    # ------------------------------------------------------------------

    def load_yaml(self, path: str | Path) -> dict[str, Any]:
        """Load a YAML mapping; an empty file gives an empty dict.

        Raises:
            FileNotFoundError: If file doesn't exist
            ConfigurationError: If YAML is invalid or not a mapping
        """
        full_path = self._existing(path)
        try:
            with open(full_path, encoding="utf-8") as f:
                data = yaml.safe_load(f)
        except yaml.YAMLError as e:
            raise ConfigurationError(str(path), f"Invalid YAML: {e}") from e
        if data is None:
            return {}
        if not isinstance(data, dict):
            raise ConfigurationError(str(path), "Root element must be a dictionary")
        return data

    def save_yaml(self, path: str | Path, data: dict[str, Any], *, create_dirs: bool = True) -> None:
        if not isinstance(data, dict):
            raise ConfigurationError(str(path), "Data must be a dictionary")
        full_path = self._resolve_path(path)
        if create_dirs:
            full_path.parent.mkdir(parents=True, exist_ok=True)
        with open(full_path, "w", encoding="utf-8") as f:
            yaml.safe_dump(data, f, default_flow_style=False, sort_keys=False)

    def load_json(self, path: str | Path) -> dict[str, Any]:
        """Load a JSON object.

        Raises:
            FileNotFoundError: If file doesn't exist
            ConfigurationError: If JSON is invalid or not an object
        """
        full_path = self._existing(path)
        try:
            with open(full_path, encoding="utf-8") as f:
                data = json.load(f)
        except json.JSONDecodeError as e:
            raise ConfigurationError(str(path), f"Invalid JSON: {e}") from e
        if not isinstance(data, dict):
            raise ConfigurationError(str(path), "Root element must be a dictionary")
        return data

    def save_json(
        self,
        path: str | Path,
        data: dict[str, Any],
        *,
        create_dirs: bool = True,
        indent: int = 2,
    ) -> None:
        """Write a JSON object in insertion key order."""
        if not isinstance(data, dict):
            raise ConfigurationError(str(path), "Data must be a dictionary")
        full_path = self._resolve_path(path)
        if create_dirs:
            full_path.parent.mkdir(parents=True, exist_ok=True)
        with open(full_path, "w", encoding="utf-8") as f:
            json.dump(data, f, indent=indent, default=str)
            f.write("\n")

    def load_config(self, path: str | Path) -> dict[str, Any]:
        """YAML for .yaml/.yml, JSON otherwise."""
        if Path(path).suffix.lower() in (".yaml", ".yml"):
            return self.load_yaml(path)
        return self.load_json(path)

    # ------------------------------------------------------------------
    # Domain formats
    # ------------------------------------------------------------------

    def load_graph(self, path: str | Path) -> WindowGraph:
        """Load Graph JSON.

        Raises:
            ConfigurationError: If the JSON does not describe a valid graph
        """
        data = self.load_json(path)
        try:
            return WindowGraph.from_dict(data)
        except ValueError as e:
            raise ConfigurationError(str(path), str(e)) from e

    def save_graph(self, path: str | Path, graph: WindowGraph) -> None:
        self.save_json(path, graph.to_dict())

    def load_model(self, path: str | Path) -> GroundTruthModel:
        """Load Model JSON.

        Raises:
            ConfigurationError: If the JSON does not describe a valid model
        """
        data = self.load_json(path)
        try:
            return GroundTruthModel.from_dict(data)
        except ValueError as e:
            raise ConfigurationError(str(path), str(e)) from e

    def save_model(self, path: str | Path, model: GroundTruthModel) -> None:
        self.save_json(path, model.to_dict())

    def exists(self, path: str | Path) -> bool:
        return self._resolve_path(path).exists()
