"""Unit tests for FileSystemAdapter."""

from pathlib import Path

import pandas as pd
import pytest
import yaml

from src.adapters.filesystem_adapter import (
    ConfigurationError,
    DataValidationError,
    FileSystemAdapter,
)
from src.core.domain.graph import Edge, EndMark, MiddleMark, NodeRef, WindowGraph
from src.core.domain.ground_truth import motivational_model


class TestFileSystemAdapterCSV:
    """Test data CSV loading and saving."""

    def test_load_csv_valid(self, tmp_path: Path) -> None:
        """Header plus numeric rows load as numbers."""
        (tmp_path / "data.csv").write_text("X,Y\n1.0,2\n3.5, 4\n-1,0\n")

        frame = FileSystemAdapter(tmp_path).load_csv("data.csv")

        assert list(frame.columns) == ["X", "Y"]
        assert frame.shape == (3, 2)
        assert frame["Y"].tolist() == [2.0, 4.0, 0.0]

    def test_load_csv_file_not_found(self, tmp_path: Path) -> None:
        """Missing file should raise FileNotFoundError."""
        with pytest.raises(FileNotFoundError):
            FileSystemAdapter(tmp_path).load_csv("missing.csv")

    def test_missing_header(self, tmp_path: Path) -> None:
        """A numeric first row means there is no header."""
        (tmp_path / "data.csv").write_text("1,2\n3,4\n")

        with pytest.raises(DataValidationError, match="header row is missing") as exc:
            FileSystemAdapter(tmp_path).load_csv("data.csv")

        assert exc.value.row == 1

    def test_non_numeric_cell_reports_line(self, tmp_path: Path) -> None:
        """Errors name the file line and column."""
        (tmp_path / "data.csv").write_text("X,Y\n1,2\n3,abc\n")

        with pytest.raises(DataValidationError, match="line 3, column 'Y'") as exc:
            FileSystemAdapter(tmp_path).load_csv("data.csv")

        assert exc.value.row == 3
        assert exc.value.column == "Y"

    def test_missing_value(self, tmp_path: Path) -> None:
        """Empty cells are rejected."""
        (tmp_path / "data.csv").write_text("X,Y\n1,\n3,4\n")

        with pytest.raises(DataValidationError, match="missing value"):
            FileSystemAdapter(tmp_path).load_csv("data.csv")

    def test_non_finite_value(self, tmp_path: Path) -> None:
        """inf parses as a number but is still rejected."""
        (tmp_path / "data.csv").write_text("X,Y\n1,2\ninf,4\n")

        with pytest.raises(DataValidationError, match="non-finite"):
            FileSystemAdapter(tmp_path).load_csv("data.csv")

    def test_constant_column(self, tmp_path: Path) -> None:
        """A column with a single value carries no information."""
        (tmp_path / "data.csv").write_text("X,Y\n1,5\n2,5\n3,5\n")

        with pytest.raises(DataValidationError, match="constant") as exc:
            FileSystemAdapter(tmp_path).load_csv("data.csv")

        assert exc.value.row is None

    def test_empty_file(self, tmp_path: Path) -> None:
        """An empty file is a validation error."""
        (tmp_path / "data.csv").write_text("")

        with pytest.raises(DataValidationError, match="empty"):
            FileSystemAdapter(tmp_path).load_csv("data.csv")

    def test_header_only(self, tmp_path: Path) -> None:
        """At least one data row is needed."""
        (tmp_path / "data.csv").write_text("X,Y\n")

        with pytest.raises(DataValidationError, match="at least one data row"):
            FileSystemAdapter(tmp_path).load_csv("data.csv")

    def test_save_then_load(self, tmp_path: Path) -> None:
        """Saved frames load back with the same values."""
        adapter = FileSystemAdapter(tmp_path)
        frame = pd.DataFrame({"X0": [0.5, -1.0, 2.0], "X1": [1, 2, 3]})

        adapter.save_csv("out/data.csv", frame)

        pd.testing.assert_frame_equal(
            adapter.load_csv("out/data.csv"), frame.astype(float), check_dtype=False
        )


class TestFileSystemAdapterConfig:
    """Test YAML and JSON configuration files."""

    def test_load_yaml_valid(self, tmp_path: Path) -> None:
        """Valid YAML should load successfully."""
        (tmp_path / "experiment.yaml").write_text("name: grid\nk: [0, 1]\nmodel:\n  n_total: 4\n")

        result = FileSystemAdapter(tmp_path).load_yaml("experiment.yaml")

        assert result == {"name": "grid", "k": [0, 1], "model": {"n_total": 4}}

    def test_load_yaml_empty_file(self, tmp_path: Path) -> None:
        """An empty YAML file is an empty mapping."""
        (tmp_path / "empty.yaml").write_text("")

        assert FileSystemAdapter(tmp_path).load_yaml("empty.yaml") == {}

    def test_load_yaml_invalid(self, tmp_path: Path) -> None:
        """Invalid YAML should raise ConfigurationError."""
        (tmp_path / "invalid.yaml").write_text("{ invalid: yaml: content")

        with pytest.raises(ConfigurationError, match="Invalid YAML"):
            FileSystemAdapter(tmp_path).load_yaml("invalid.yaml")

    def test_load_yaml_non_dict_root(self, tmp_path: Path) -> None:
        """Non-dict root element should raise ConfigurationError."""
        (tmp_path / "list.yaml").write_text("- item1\n- item2")

        with pytest.raises(ConfigurationError, match="dictionary"):
            FileSystemAdapter(tmp_path).load_yaml("list.yaml")

    def test_save_yaml_keeps_key_order(self, tmp_path: Path) -> None:
        """Keys are written in insertion order."""
        adapter = FileSystemAdapter(tmp_path)

        adapter.save_yaml("nested/out.yaml", {"z": 1, "a": 2})

        text = (tmp_path / "nested" / "out.yaml").read_text()
        assert text.index("z:") < text.index("a:")
        assert yaml.safe_load(text) == {"z": 1, "a": 2}

    def test_load_json_invalid(self, tmp_path: Path) -> None:
        """Invalid JSON should raise ConfigurationError."""
        (tmp_path / "bad.json").write_text("{not json")

        with pytest.raises(ConfigurationError, match="Invalid JSON"):
            FileSystemAdapter(tmp_path).load_json("bad.json")

    def test_save_json_rejects_non_dict(self, tmp_path: Path) -> None:
        """Only JSON objects are written."""
        with pytest.raises(ConfigurationError, match="dictionary"):
            FileSystemAdapter(tmp_path).save_json("x.json", [1, 2])  # type: ignore[arg-type]

    def test_load_config_picks_format_by_suffix(self, tmp_path: Path) -> None:
        """.yml is YAML, anything else JSON."""
        adapter = FileSystemAdapter(tmp_path)
        adapter.save_yaml("a.yml", {"alpha": 0.01})
        adapter.save_json("a.json", {"alpha": 0.05})

        assert adapter.load_config("a.yml") == {"alpha": 0.01}
        assert adapter.load_config("a.json") == {"alpha": 0.05}

    def test_absolute_paths_ignore_base(self, tmp_path: Path) -> None:
        """Absolute paths are used as given."""
        adapter = FileSystemAdapter(tmp_path / "elsewhere")
        target = tmp_path / "abs.json"

        adapter.save_json(target, {"ok": True})

        assert adapter.exists(target)
        assert not adapter.exists("abs.json")


class TestFileSystemAdapterDomainFormats:
    """Test Graph JSON and Model JSON files."""

    def test_graph_round_trip(self, tmp_path: Path) -> None:
        """Marks and middle marks survive a save and load."""
        adapter = FileSystemAdapter(tmp_path)
        graph = WindowGraph(2, 1)
        graph.set_edge(
            Edge(NodeRef(0, 1), NodeRef(1, 0), EndMark.CIRCLE, EndMark.HEAD, MiddleMark.UNKNOWN)
        )

        adapter.save_graph("graph.json", graph)

        assert adapter.load_graph("graph.json") == graph

    def test_invalid_graph(self, tmp_path: Path) -> None:
        """Unknown marks become configuration errors."""
        adapter = FileSystemAdapter(tmp_path)
        adapter.save_json(
            "graph.json",
            {
                "n_vars": 2,
                "tau_max": 0,
                "edges": [{"i": 0, "tau": 0, "j": 1, "mark_i": "?", "mark_j": ">"}],
            },
        )

        with pytest.raises(ConfigurationError, match="graph.json"):
            adapter.load_graph("graph.json")

    def test_model_round_trip(self, tmp_path: Path) -> None:
        """Models load back into equal dictionaries."""
        adapter = FileSystemAdapter(tmp_path)
        model = motivational_model()

        adapter.save_model("model.json", model)

        assert adapter.load_model("model.json").to_dict() == model.to_dict()

    def test_invalid_model(self, tmp_path: Path) -> None:
        """A model without n_vars is rejected."""
        adapter = FileSystemAdapter(tmp_path)
        adapter.save_json("model.json", {"links": []})

        with pytest.raises(ConfigurationError, match="model.json"):
            adapter.load_model("model.json")
