"""
Parser for chainlab scenario manifests and matrix files.
Manifests are JSON (schema 1); matrices are headerless row-major CSV or JSON
arrays of arrays.
"""

import csv
import json
import logging
import os
from typing import Any, Dict, List, Optional

from .errors import ManifestError, ChainLabError
from .models import Scenario, StochasticMatrix
from ..config.constants import (
    MANIFEST_SCHEMA, ANALYSES, THEOREMS, TOLERANCE_KEYS, GENERATOR_NAMES, FLOW_VARIANTS,
)

logger = logging.getLogger("chainlab.data.parser")

_CHAIN_FORMS = ("generator", "matrices", "matrix", "file")
_FLOW_KEYS = ("variant", "theta", "sigma", "tau_abs", "tau_tail")


def _is_number(value: Any) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool)


def _is_int(value: Any) -> bool:
    return isinstance(value, int) and not isinstance(value, bool)


class ManifestParser:
    """
    Turns manifest files and matrix files into typed objects. Every failure is
    a ManifestError naming the offending field.
    """

    @staticmethod
    def load_document(path: str) -> Any:
        """Read a JSON document, reporting unreadable or malformed files as ManifestError."""
        try:
            with open(path, 'r', encoding='utf-8') as f:
                return json.load(f)
        except json.JSONDecodeError as e:
            raise ManifestError("<document>", f"invalid JSON: {e}") from e
        except OSError as e:
            raise ManifestError("<document>", f"cannot read {path}: {e}") from e

    @staticmethod
    def parse_file(path: str) -> Scenario:
        """
        Parse a scenario manifest from disk.

        Args:
            path: Path to the JSON manifest

        Returns:
            Scenario: The validated scenario; relative chain file paths are
            resolved against the manifest's directory
        """
        raw = ManifestParser.load_document(path)
        default_name = os.path.splitext(os.path.basename(path))[0]
        return ManifestParser.parse_dict(raw, base_dir=os.path.dirname(os.path.abspath(path)),
                                         default_name=default_name)

    @staticmethod
    def parse_dict(raw: Any, base_dir: Optional[str] = None, default_name: str = "scenario") -> Scenario:
        """
        Validate an already-decoded manifest.

        Args:
            raw: Decoded JSON object
            base_dir: Directory used to resolve relative matrix files
            default_name: Scenario name when the manifest has none

        Returns:
            Scenario: The validated scenario
        """
        if not isinstance(raw, dict):
            raise ManifestError("<document>", "manifest must be a JSON object")

        schema = raw.get("schema", MANIFEST_SCHEMA)
        if schema != MANIFEST_SCHEMA:
            raise ManifestError("schema", f"unsupported schema {schema!r}, expected {MANIFEST_SCHEMA}")

        name = raw.get("name", default_name)
        if not isinstance(name, str) or not name:
            raise ManifestError("name", "must be a non-empty string")

        horizon = raw.get("horizon")
        if not _is_int(horizon) or horizon <= 0:
            raise ManifestError("horizon", f"must be a positive integer, got {horizon!r}")

        start = raw.get("start")
        if start is not None and (not _is_int(start) or start < 0):
            raise ManifestError("start", f"must be a nonnegative integer, got {start!r}")
        if start is not None and start >= horizon:
            raise ManifestError("start", "must precede the horizon")

        analyses = raw.get("analyses", [])
        if not isinstance(analyses, list):
            raise ManifestError("analyses", "must be a list")
        for analysis in analyses:
            if analysis not in ANALYSES:
                raise ManifestError("analyses", f"unknown analysis {analysis!r}")

        cross_checks = raw.get("cross_checks", [])
        if not isinstance(cross_checks, list) or any(t not in THEOREMS for t in cross_checks):
            raise ManifestError("cross_checks", f"must be a list drawn from {list(THEOREMS)}")

        tolerances = raw.get("tolerances", {})
        if not isinstance(tolerances, dict):
            raise ManifestError("tolerances", "must be an object")
        for key, value in tolerances.items():
            if key not in TOLERANCE_KEYS:
                raise ManifestError(f"tolerances.{key}", "unknown tolerance")
            if not _is_number(value) or value <= 0:
                raise ManifestError(f"tolerances.{key}", f"must be positive, got {value!r}")

        flow = ManifestParser._parse_flow(raw.get("flow", {}))

        x0 = raw.get("x0")
        if x0 is not None and (not isinstance(x0, list) or not all(_is_number(v) for v in x0)):
            raise ManifestError("x0", "must be a list of numbers")

        seed = raw.get("seed")
        if seed is not None and not _is_int(seed):
            raise ManifestError("seed", "must be an integer")

        output_dir = raw.get("output_dir")
        if output_dir is not None and not isinstance(output_dir, str):
            raise ManifestError("output_dir", "must be a string")

        chain = ManifestParser.parse_chain_spec(raw.get("chain"), "chain", base_dir)
        nominal = None
        if raw.get("nominal") is not None:
            nominal = ManifestParser.parse_chain_spec(raw["nominal"], "nominal", base_dir)

        scenario = Scenario(
            name=name,
            chain=chain,
            analyses=list(analyses),
            horizon=horizon,
            start=start,
            x0=[float(v) for v in x0] if x0 is not None else None,
            nominal=nominal,
            tolerances={k: float(v) for k, v in tolerances.items()},
            flow=flow,
            cross_checks=list(cross_checks),
            output_dir=output_dir,
            seed=seed,
            schema=schema,
        )
        logger.debug(f"Parsed scenario {name} with analyses {analyses}")
        return scenario

    @staticmethod
    def _parse_flow(flow: Any) -> Dict[str, Any]:
        if not isinstance(flow, dict):
            raise ManifestError("flow", "must be an object")
        for key, value in flow.items():
            if key not in _FLOW_KEYS:
                raise ManifestError(f"flow.{key}", "unknown flow option")
            if key == "variant":
                if value not in FLOW_VARIANTS:
                    raise ManifestError("flow.variant", f"must be one of {list(FLOW_VARIANTS)}")
            elif not _is_number(value) or value <= 0:
                raise ManifestError(f"flow.{key}", f"must be positive, got {value!r}")
        return dict(flow)

    @staticmethod
    def parse_chain_spec(spec: Any, field: str = "chain", base_dir: Optional[str] = None) -> Dict[str, Any]:
        """
        Validate a chain specification: exactly one of ``generator`` (with
        optional ``params``), inline ``matrices`` (a list), a single constant
        ``matrix``, or a ``file`` holding a matrix or a list of matrices.
        """
        if not isinstance(spec, dict):
            raise ManifestError(field, "must be an object")
        forms = [key for key in _CHAIN_FORMS if key in spec]
        if len(forms) != 1:
            raise ManifestError(field, f"needs exactly one of {list(_CHAIN_FORMS)}")
        out = dict(spec)
        form = forms[0]

        if form == "generator":
            if spec["generator"] not in GENERATOR_NAMES:
                raise ManifestError(f"{field}.generator", f"unknown generator {spec['generator']!r}")
            if not isinstance(spec.get("params", {}), dict):
                raise ManifestError(f"{field}.params", "must be an object")
        elif form == "matrices":
            matrices = spec["matrices"]
            if not isinstance(matrices, list) or not matrices:
                raise ManifestError(f"{field}.matrices", "must be a non-empty list of matrices")
        elif form == "file":
            path = spec["file"]
            if not isinstance(path, str):
                raise ManifestError(f"{field}.file", "must be a path")
            if base_dir and not os.path.isabs(path):
                out["file"] = os.path.join(base_dir, path)

        start = spec.get("start", 0)
        if not _is_int(start) or start < 0:
            raise ManifestError(f"{field}.start", "must be a nonnegative integer")

        edges = spec.get("unbounded_edges")
        if edges is not None:
            if form == "generator":
                raise ManifestError(f"{field}.unbounded_edges", "generators declare their own edges")
            if not isinstance(edges, list) or not all(
                isinstance(e, list) and len(e) == 2 and all(_is_int(v) and v >= 1 for v in e)
                for e in edges
            ):
                raise ManifestError(f"{field}.unbounded_edges", "must be a list of 1-based [i, j] pairs")
        return out

    @staticmethod
    def read_matrix_csv(path: str) -> List[List[float]]:
        """Headerless, row-major CSV with '.' decimals."""
        try:
            with open(path, 'r', encoding='utf-8', newline='') as f:
                rows = [[float(cell) for cell in row] for row in csv.reader(f) if row]
        except (OSError, ValueError) as e:
            raise ManifestError("file", f"cannot read matrix from {path}: {e}") from e
        return rows

    @staticmethod
    def read_matrices(path: str) -> List[List[List[float]]]:
        """
        Matrices stored in a file: a CSV holds one matrix; a JSON file holds an
        array of arrays (one matrix) or a list of them.
        """
        if path.lower().endswith(".csv"):
            return [ManifestParser.read_matrix_csv(path)]
        try:
            with open(path, 'r', encoding='utf-8') as f:
                data = json.load(f)
        except (OSError, json.JSONDecodeError) as e:
            raise ManifestError("file", f"cannot read matrices from {path}: {e}") from e
        if isinstance(data, dict) and "matrices" in data:
            data = data["matrices"]
        if not isinstance(data, list) or not data:
            raise ManifestError("file", f"{path} holds no matrices")
        if all(isinstance(row, list) and row and _is_number(row[0]) for row in data):
            return [data]
        return data

    @staticmethod
    def matrix_from_rows(rows: Any, field: str = "matrix", tol_row: Optional[float] = None) -> StochasticMatrix:
        """Validate raw rows, wrapping validation failures in ManifestError."""
        from ..core.stochastic import validate
        try:
            return validate(rows, tol_row)
        except (ChainLabError, ValueError) as e:
            raise ManifestError(field, str(e)) from e
