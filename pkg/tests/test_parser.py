"""
Tests for the manifest parser.
"""

import json

import pytest

from chainlab.data.errors import ManifestError
from chainlab.data.models import Scenario
from chainlab.data.parser import ManifestParser


def manifest(**fields):
    raw = {"name": "demo", "horizon": 100, "chain": {"generator": "swap"}, "analyses": ["certificates"]}
    raw.update(fields)
    return raw


class TestManifestParser:
    """Test cases for ManifestParser.parse_dict."""

    def test_parse_minimal(self):
        """Test parsing of a valid manifest."""
        scenario = ManifestParser.parse_dict(manifest())

        assert isinstance(scenario, Scenario)
        assert scenario.name == "demo"
        assert scenario.horizon == 100
        assert scenario.analyses == ["certificates"]
        assert scenario.start is None
        assert scenario.tolerances == {}

    def test_full_manifest(self):
        """Every optional field is carried over."""
        scenario = ManifestParser.parse_dict(manifest(
            start=3, x0=[0, 1], seed=4, output_dir="out", cross_checks=["T2"],
            tolerances={"span": 1e-6}, flow={"variant": "reduced", "tau_abs": 2},
            nominal={"matrix": [[1, 0], [0, 1]]},
        ))

        assert scenario.start == 3
        assert scenario.x0 == [0.0, 1.0]
        assert scenario.seed == 4
        assert scenario.output_dir == "out"
        assert scenario.cross_checks == ["T2"]
        assert scenario.tolerances == {"span": 1e-6}
        assert scenario.flow == {"variant": "reduced", "tau_abs": 2}
        assert scenario.nominal == {"matrix": [[1, 0], [0, 1]]}

    def test_default_name(self):
        raw = manifest()
        del raw["name"]

        assert ManifestParser.parse_dict(raw, default_name="fallback").name == "fallback"

    @pytest.mark.parametrize("fields, field", [
        ({"schema": 2}, "schema"),
        ({"horizon": 0}, "horizon"),
        ({"horizon": True}, "horizon"),
        ({"horizon": 1.5}, "horizon"),
        ({"start": -1}, "start"),
        ({"start": 100}, "start"),
        ({"analyses": ["spectral"]}, "analyses"),
        ({"analyses": "certificates"}, "analyses"),
        ({"cross_checks": ["T1"]}, "cross_checks"),
        ({"tolerances": {"span": 0}}, "tolerances.span"),
        ({"tolerances": {"speed": 1e-3}}, "tolerances.speed"),
        ({"flow": {"variant": "partial"}}, "flow.variant"),
        ({"flow": {"theta": -1}}, "flow.theta"),
        ({"flow": {"rate": 1}}, "flow.rate"),
        ({"x0": [0, "a"]}, "x0"),
        ({"seed": "7"}, "seed"),
        ({"output_dir": 3}, "output_dir"),
    ])
    def test_invalid_fields(self, fields, field):
        """Each invalid field is named in the error."""
        with pytest.raises(ManifestError) as excinfo:
            ManifestParser.parse_dict(manifest(**fields))

        assert excinfo.value.field == field

    def test_not_an_object(self):
        with pytest.raises(ManifestError) as excinfo:
            ManifestParser.parse_dict([1, 2, 3])

        assert excinfo.value.field == "<document>"


class TestChainSpec:
    """Test cases for parse_chain_spec."""

    def test_needs_exactly_one_form(self):
        """Test that chain forms are mutually exclusive."""
        with pytest.raises(ManifestError):
            ManifestParser.parse_chain_spec({})
        with pytest.raises(ManifestError):
            ManifestParser.parse_chain_spec({"generator": "swap", "matrix": [[1]]})

    def test_unknown_generator(self):
        with pytest.raises(ManifestError) as excinfo:
            ManifestParser.parse_chain_spec({"generator": "voter_model"})

        assert excinfo.value.field == "chain.generator"

    def test_generators_cannot_declare_edges(self):
        with pytest.raises(ManifestError):
            ManifestParser.parse_chain_spec({"generator": "swap", "unbounded_edges": [[1, 2]]})

    def test_edges_are_one_based_pairs(self):
        spec = {"matrix": [[1, 0], [0, 1]], "unbounded_edges": [[1, 2], [2, 1]]}

        assert ManifestParser.parse_chain_spec(spec)["unbounded_edges"] == [[1, 2], [2, 1]]
        with pytest.raises(ManifestError):
            ManifestParser.parse_chain_spec({"matrix": [[1]], "unbounded_edges": [[0, 1]]})

    def test_empty_matrices(self):
        with pytest.raises(ManifestError):
            ManifestParser.parse_chain_spec({"matrices": []}, "nominal")

    def test_relative_file_resolved(self, tmp_path):
        spec = ManifestParser.parse_chain_spec({"file": "a.csv"}, base_dir=str(tmp_path))

        assert spec["file"] == str(tmp_path / "a.csv")


class TestMatrixFiles:
    """Test cases for reading matrices from disk."""

    def test_csv(self, tmp_path):
        path = tmp_path / "a.csv"
        path.write_text("0.5,0.5\n\n0.25,0.75\n", encoding="utf-8")

        assert ManifestParser.read_matrices(str(path)) == [[[0.5, 0.5], [0.25, 0.75]]]

    def test_csv_with_bad_cell(self, tmp_path):
        path = tmp_path / "a.csv"
        path.write_text("0.5,x\n", encoding="utf-8")

        with pytest.raises(ManifestError):
            ManifestParser.read_matrices(str(path))

    def test_json_single_matrix(self, tmp_path):
        path = tmp_path / "a.json"
        path.write_text(json.dumps([[1, 0], [0, 1]]), encoding="utf-8")

        assert ManifestParser.read_matrices(str(path)) == [[[1, 0], [0, 1]]]

    def test_json_matrix_list(self, tmp_path):
        path = tmp_path / "a.json"
        matrices = [[[1, 0], [0, 1]], [[0, 1], [1, 0]]]
        path.write_text(json.dumps({"matrices": matrices}), encoding="utf-8")

        assert ManifestParser.read_matrices(str(path)) == matrices

    def test_matrix_from_rows_wraps_validation(self):
        with pytest.raises(ManifestError) as excinfo:
            ManifestParser.matrix_from_rows([[0.5, 0.6], [0.5, 0.5]], "chain.matrix")

        assert excinfo.value.field == "chain.matrix"


class TestParseFile:
    """Test cases for parse_file."""

    def test_name_from_file(self, write_manifest, tmp_path):
        raw = manifest(chain={"file": "m.csv"})
        del raw["name"]
        path = write_manifest(raw, name="krause_demo.json")

        scenario = ManifestParser.parse_file(str(path))

        assert scenario.name == "krause_demo"
        assert scenario.chain["file"] == str(tmp_path / "m.csv")

    def test_invalid_json(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text("{", encoding="utf-8")

        with pytest.raises(ManifestError):
            ManifestParser.parse_file(str(path))

    def test_missing_file(self, tmp_path):
        with pytest.raises(ManifestError):
            ManifestParser.parse_file(str(tmp_path / "absent.json"))
