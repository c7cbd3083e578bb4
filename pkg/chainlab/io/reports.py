"""
Report writer for chainlab.
Writes the deterministic CSV/JSON artefacts of a scenario run and exports
chains in the manifest format.
"""

import csv
import io
import json
import logging
import math
import os
from typing import TYPE_CHECKING, Any, Dict, Iterable, List, Optional, Sequence

import numpy as np

from ..config.constants import (
    MANIFEST_SCHEMA, SUMMARY_FILE, TRAJECTORY_FILE, SORTED_FILE, LYAPUNOV_FILE, FLOW_FILE,
    GRAPH_FILE, CERTIFICATES_FILE, CHAIN_FILE,
)
from ..data.errors import ReportIoError
from .files import create_directory

if TYPE_CHECKING:
    from ..core.chain import ChainSource
    from ..core.harness import ReportBundle

logger = logging.getLogger("chainlab.io.reports")


def to_plain(value: Any) -> Any:
    """JSON-ready copy: numpy values become Python ones, +-inf and nan become strings."""
    if isinstance(value, dict):
        return {str(k): to_plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_plain(v) for v in value]
    if isinstance(value, (frozenset, set)):
        return sorted(to_plain(v) for v in value)
    if isinstance(value, np.ndarray):
        return to_plain(value.tolist())
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return value
    return value


def _cell(value: Any) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if value is None:
        return ""
    return str(value)


def chain_to_manifest(chain: "ChainSource", N: int, start: Optional[int] = None) -> Dict[str, Any]:
    """
    Chain specification with the matrices A_start..A_{N-1} inlined, so a
    generated chain can be re-ingested and analysed like any other.
    """
    first = chain.start if start is None else start
    spec: Dict[str, Any] = {
        "name": chain.name,
        "start": first,
        "matrices": [m.to_list() for m in chain.matrices(first, N)],
    }
    if chain.unbounded_edges is not None:
        spec["unbounded_edges"] = [[i + 1, j + 1] for i, j in sorted(chain.unbounded_edges)]
    return spec


class ReportWriter:
    """
    Writes report files into one directory. JSON uses sorted keys and CSV uses
    LF line endings, so identical inputs give byte-identical files.
    """

    def __init__(self, directory: str):
        self.directory = directory
        self.written: List[str] = []

    def _path(self, name: str) -> str:
        return os.path.join(self.directory, name)

    def _write_text(self, name: str, text: str) -> str:
        if not create_directory(self.directory):
            raise ReportIoError(f"cannot create output directory {self.directory}")
        path = self._path(name)
        try:
            with open(path, 'w', encoding='utf-8', newline='') as f:
                f.write(text)
        except OSError as e:
            raise ReportIoError(f"cannot write {path}: {e}") from e
        self.written.append(path)
        logger.debug(f"Wrote {path}")
        return path

    def write_json(self, name: str, payload: Any) -> str:
        text = json.dumps(to_plain(payload), indent=2, sort_keys=True, allow_nan=False)
        return self._write_text(name, text + "\n")

    def write_csv(self, name: str, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_cell(v) for v in row])
        return self._write_text(name, buffer.getvalue())

    def write_chain(self, chain: "ChainSource", N: int, start: Optional[int] = None) -> str:
        """chain.json: a runnable manifest with the chain inlined and no analyses."""
        manifest = {
            "schema": MANIFEST_SCHEMA,
            "name": chain.name,
            "horizon": N,
            "analyses": [],
            "chain": chain_to_manifest(chain, N, start),
        }
        return self.write_json(CHAIN_FILE, manifest)

    def write_bundle(self, bundle: "ReportBundle") -> List[str]:
        """Write every artefact the bundle holds; summary.json always."""
        requested = set(bundle.scenario.analyses)
        if bundle.certificates is not None and "certificates" in requested:
            payload = bundle.certificates.to_dict()
            if bundle.nominal_certificates is not None:
                payload["nominal"] = bundle.nominal_certificates.to_dict()
            self.write_json(CERTIFICATES_FILE, payload)

        if bundle.flow is not None:
            self.write_csv(FLOW_FILE, ["n", "c", "F_c"], bundle.flow.rows())

        if bundle.graph is not None:
            self.write_csv(GRAPH_FILE, ["i", "j", "W_ij", "flagged"], bundle.graph.rows())

        traj = bundle.trajectory
        if traj is not None:
            s = traj.order
            times = range(traj.start, traj.horizon + 1)
            self.write_csv(
                TRAJECTORY_FILE, ["n"] + [f"X_{i}" for i in range(1, s + 1)],
                ([n] + list(row) for n, row in zip(times, traj.states)),
            )
            self.write_csv(
                SORTED_FILE, ["n"] + [f"z_{i}" for i in range(1, s + 1)],
                ([n] + list(row) for n, row in zip(times, traj.z)),
            )

        series = bundle.lyapunov
        if series is not None:
            s = series.order
            bounds = series.lower_bound_increments
            rows = []
            for t, partial in enumerate(series.partial):
                bound = bounds[t] if bounds is not None and t < len(bounds) else None
                rows.append([series.start + t] + list(partial) + [bound])
            self.write_csv(
                LYAPUNOV_FILE,
                ["n"] + [f"S_{r}" for r in range(1, s + 1)] + [f"increment_lower_bound_{series.r}"],
                rows,
            )

        self.write_json(SUMMARY_FILE, bundle.summary())
        logger.info(f"Wrote {len(self.written)} report files to {self.directory}")
        return list(self.written)


def emit_reports(bundle: "ReportBundle", directory: str) -> List[str]:
    """
    Write the report bundle to ``directory``.

    Returns:
        List[str]: Paths written, summary.json last

    Raises:
        ReportIoError: when the directory or a file cannot be written
    """
    return ReportWriter(directory).write_bundle(bundle)
