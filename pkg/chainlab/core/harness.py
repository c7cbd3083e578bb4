"""
Scenario harness for chainlab.
Builds the chain a manifest describes, runs the requested analyses in
dependency order, cross-checks the consensus theorems and writes reports.
"""

import asyncio
import functools
import logging
import math
import time
from concurrent.futures import Executor
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np

from ..config.constants import (
    MANIFEST_SCHEMA, EXIT_OK, EXIT_DISAGREEMENT, FLOW_FULL, FLOW_DIVERGENT, FLOW_BOUNDED,
    FLOW_TRIVIAL, VERDICT_ERGODIC, VERDICT_UNDECIDED,
)
from ..config.settings import settings
from ..data.errors import ManifestError, MissingArtifact, InfiniteM
from ..data.models import (
    Scenario, CertificateReport, L1Distance, FlowProfile, InteractionGraph, IslandPartition,
    ErgodicityVerdict, Trajectory, ClusterReport, LyapunovSeries, TheoremCrossCheck,
    DivergenceRule, AgentSet, agents_out,
)
from ..data.parser import ManifestParser
from ..io.files import get_output_directory
from ..io.reports import emit_reports
from ..utils.events import EventType, publish_event
from .chain import ChainSource, StaticChain, ConstantChain, record
from .dynamics import trajectory, detect_clusters, lyapunov_series, check_S_monotonic, tail_oscillation
from .flow import aif_profile, unbounded_graph, islands, per_island_aif
from .properties import certify_chain, l1_distance
from .stochastic import ergodicity_probe, class_ergodicity_probe
from .zoo import build_generator

logger = logging.getLogger("chainlab.core.harness")

# Analyses each cross-check reads
REQUIRED_ANALYSES = {
    "T2": ("certificates", "aif", "ergodicity"),
    "T3": ("islands", "class-ergodicity"),
    "T4": ("certificates", "class-ergodicity"),
}


def build_chain(spec: Dict[str, Any],
                seed: Optional[int],
                horizon: int,
                field_name: str = "chain",
                tol_row: Optional[float] = None) -> ChainSource:
    """
    Turn a validated chain specification into a chain source.

    Raises:
        ManifestError: when generator parameters or matrices are unusable
    """
    if "generator" in spec:
        try:
            chain = build_generator(spec["generator"], spec.get("params", {}), seed, horizon)
        except KeyError as e:
            raise ManifestError(f"{field_name}.params", f"missing parameter {e}") from e
        except (TypeError, ValueError) as e:
            raise ManifestError(f"{field_name}.params", str(e)) from e
        return chain

    start = spec.get("start", 0)
    name = spec.get("name", field_name)
    if "matrix" in spec:
        chain: ChainSource = ConstantChain(
            ManifestParser.matrix_from_rows(spec["matrix"], f"{field_name}.matrix", tol_row),
            start=start, name=name,
        )
    else:
        if "matrices" in spec:
            raw, where = spec["matrices"], f"{field_name}.matrices"
        else:
            raw, where = ManifestParser.read_matrices(spec["file"]), f"{field_name}.file"
        matrices = [ManifestParser.matrix_from_rows(m, f"{where}[{i}]", tol_row) for i, m in enumerate(raw)]
        if "file" in spec and len(matrices) == 1:
            chain = ConstantChain(matrices[0], start=start, name=name)
        else:
            try:
                chain = StaticChain(matrices, start=start, name=name)
            except ValueError as e:
                raise ManifestError(where, str(e)) from e

    edges = spec.get("unbounded_edges")
    if edges is not None:
        if any(not 1 <= i <= chain.order or not 1 <= j <= chain.order or i == j for i, j in edges):
            raise ManifestError(f"{field_name}.unbounded_edges", "edge outside the chain's agents")
        chain.unbounded_edges = frozenset((i - 1, j - 1) for i, j in edges)
    return chain


@dataclass
class ReportBundle:
    """Everything a scenario run produced."""
    scenario: Scenario
    chain_info: Dict[str, Any]
    start: int
    horizon: int
    nominal_info: Optional[Dict[str, Any]] = None
    certificates: Optional[CertificateReport] = None
    nominal_certificates: Optional[CertificateReport] = None
    l1: Optional[L1Distance] = None
    flow: Optional[FlowProfile] = None
    graph: Optional[InteractionGraph] = None
    partition: Optional[IslandPartition] = None
    island_flow: Dict[AgentSet, FlowProfile] = field(default_factory=dict)
    ergodicity: Optional[ErgodicityVerdict] = None
    class_ergodicity: Optional[ErgodicityVerdict] = None
    trajectory: Optional[Trajectory] = None
    clusters: Optional[ClusterReport] = None
    lyapunov: Optional[LyapunovSeries] = None
    lyapunov_note: Optional[str] = None
    monotonic_violations: Dict[int, List[int]] = field(default_factory=dict)
    tail: Optional[np.ndarray] = None
    rule: Optional[DivergenceRule] = None
    cross_checks: List[TheoremCrossCheck] = field(default_factory=list)
    files: List[str] = field(default_factory=list)

    @property
    def agreement(self) -> bool:
        return all(check.agreement for check in self.cross_checks)

    @property
    def exit_code(self) -> int:
        return EXIT_OK if self.agreement else EXIT_DISAGREEMENT

    def _analyses(self) -> Dict[str, Any]:
        out: Dict[str, Any] = {}
        if self.certificates is not None:
            cert = self.certificates
            out["certificates"] = {
                "chain_M": cert.chain_M,
                "chain_K": cert.chain_K,
                "delta": cert.delta,
                "doubly_stochastic": cert.all_doubly_stochastic,
                "worst_step": cert.worst_step(),
            }
            if self.nominal_certificates is not None and self.l1 is not None:
                out["certificates"]["nominal_M"] = self.nominal_certificates.chain_M
                out["certificates"]["l1"] = dict(self.l1.to_dict(), trend=self.l1.trend(self.rule))
        if self.flow is not None:
            out["aif"] = self.flow.to_dict()
        if self.partition is not None:
            out["islands"] = dict(
                self.partition.to_dict(),
                graph=self.graph.to_dict(),
                per_island={
                    "-".join(str(a) for a in agents_out(island)): profile.classification
                    for island, profile in sorted(self.island_flow.items(), key=lambda kv: min(kv[0]))
                },
            )
        if self.ergodicity is not None:
            out["ergodicity"] = self.ergodicity.to_dict()
        if self.class_ergodicity is not None:
            out["class-ergodicity"] = self.class_ergodicity.to_dict()
        if self.trajectory is not None and "simulate" in self.scenario.analyses:
            out["simulate"] = dict(self.trajectory.to_dict(), clusters=self.clusters.to_dict())
        if "lyapunov" in self.scenario.analyses:
            if self.lyapunov is not None:
                out["lyapunov"] = {
                    "K": self.lyapunov.K,
                    "L": self.lyapunov.L,
                    "violations": {str(r): v for r, v in sorted(self.monotonic_violations.items())},
                    "tail_oscillation": self.tail,
                }
            else:
                out["lyapunov"] = {"skipped": self.lyapunov_note}
        return out

    def summary(self) -> Dict[str, Any]:
        """Deterministic summary: no timestamps, sorted keys on output."""
        return {
            "schema": MANIFEST_SCHEMA,
            "scenario": self.scenario.name,
            "chain": self.chain_info,
            "nominal": self.nominal_info,
            "start": self.start,
            "horizon": self.horizon,
            "seed": self.scenario.seed,
            "analyses": self._analyses(),
            "cross_checks": [check.to_dict() for check in self.cross_checks],
            "exit_code": self.exit_code,
        }


def _balanced_scope(bundle: ReportBundle) -> Tuple[bool, str]:
    """Whether the chain (or its nominal chain) carries a finite balanced-asymmetry certificate."""
    cert = bundle.certificates
    if cert is not None and math.isfinite(cert.chain_M):
        return True, f"balanced asymmetric with M={cert.chain_M:g} up to N={bundle.horizon}"
    nominal = bundle.nominal_certificates
    if nominal is not None and math.isfinite(nominal.chain_M) and bundle.l1 is not None:
        if bundle.l1.trend(bundle.rule) == "bounded":
            return True, (f"l1-close (distance {bundle.l1.total:g}) to a balanced asymmetric "
                          f"nominal chain with M={nominal.chain_M:g}")
    return False, "no finite balanced-asymmetry certificate; outside the theorem's scope"


def _require(theorem: str, name: str, artifact: Any) -> None:
    if artifact is None:
        raise MissingArtifact(theorem, name)


def cross_check(theorem: str, artifacts: ReportBundle) -> TheoremCrossCheck:
    """
    Compare a theorem's prediction with what the probes observed. Only
    horizon-safe contradictions count as disagreement: an undecided probe never
    refutes a predicted (class-)ergodicity.

    Raises:
        MissingArtifact: when an analysis the theorem reads was not run
    """
    if theorem == "T2":
        _require(theorem, "certificates", artifacts.certificates)
        _require(theorem, "aif", artifacts.flow)
        _require(theorem, "ergodicity", artifacts.ergodicity)
        in_scope, note = _balanced_scope(artifacts)
        flow = artifacts.flow.classification
        observed = artifacts.ergodicity.kind
        prediction = {
            FLOW_DIVERGENT: "ergodic", FLOW_TRIVIAL: "ergodic", FLOW_BOUNDED: "not ergodic",
        }.get(flow, "undetermined")
        agreement = not (in_scope and flow == FLOW_BOUNDED and observed == VERDICT_ERGODIC)
        if in_scope and prediction == "ergodic" and observed == VERDICT_UNDECIDED:
            note += "; contraction not observed by the horizon, not counted as a refutation"
        return TheoremCrossCheck(theorem, prediction, observed, agreement, in_scope, note)

    if theorem == "T3":
        _require(theorem, "islands", artifacts.partition)
        _require(theorem, "class-ergodicity", artifacts.class_ergodicity)
        in_scope, note = _balanced_scope(artifacts)
        probe = artifacts.class_ergodicity
        kinds = [p.classification for p in artifacts.island_flow.values()]
        predicted_clusters = set(artifacts.partition.islands)
        if all(k in (FLOW_DIVERGENT, FLOW_TRIVIAL) for k in kinds):
            prediction = f"class-ergodic with {len(predicted_clusters)} clusters"
            contradiction = probe.kind != VERDICT_UNDECIDED and set(probe.clusters) != predicted_clusters
        elif any(k == FLOW_BOUNDED for k in kinds):
            prediction = "not class-ergodic"
            contradiction = probe.kind != VERDICT_UNDECIDED
        else:
            prediction = "undetermined"
            contradiction = False
        observed = f"{probe.kind} with {probe.cluster_count} clusters"
        agreement = not (in_scope and contradiction)
        return TheoremCrossCheck(theorem, prediction, observed, agreement, in_scope, note)

    if theorem == "T4":
        _require(theorem, "certificates", artifacts.certificates)
        _require(theorem, "class-ergodicity", artifacts.class_ergodicity)
        cert = artifacts.certificates
        in_scope = cert.delta > 0 and math.isfinite(cert.chain_K)
        note = (f"self-confident (delta={cert.delta:g}) and cut-balanced (K={cert.chain_K:g})"
                if in_scope else "not self-confident and cut-balanced; outside the theorem's scope")
        observed = artifacts.class_ergodicity.kind
        if in_scope and observed == VERDICT_UNDECIDED:
            note += "; limit not settled by the horizon, not counted as a refutation"
        return TheoremCrossCheck(theorem, "class-ergodic", observed, True, in_scope, note)

    raise ValueError(f"unknown theorem {theorem!r}")


def _default_state(chain: ChainSource, info: Dict[str, Any]) -> np.ndarray:
    """The generator's own 1-D x0 when it has one, else evenly spread states in [0, 1]."""
    x0 = info.get("params", {}).get("x0")
    if x0 is not None:
        arr = np.asarray(x0, dtype=float)
        if arr.ndim == 1 and arr.shape[0] == chain.order:
            return arr
    if chain.order == 1:
        return np.zeros(1)
    return np.linspace(0.0, 1.0, chain.order)


class ScenarioRunner:
    """
    Orchestrates one scenario: chain, certificates, flow and islands, probes,
    trajectory, Lyapunov series, cross-checks, reports. Independent analyses of
    a stage run concurrently in an executor.
    """

    def __init__(self,
                 scenario: Scenario,
                 output_dir: Optional[str] = None,
                 executor: Optional[Executor] = None):
        """
        Initialize the runner.

        Args:
            scenario: The parsed scenario
            output_dir: Report directory; nothing is written when None
            executor: Executor for the numeric work (default: the loop's)
        """
        self.scenario = scenario
        self.output_dir = output_dir
        self.executor = executor
        self._tol = scenario.tolerances
        flow = scenario.flow
        self.variant = flow.get("variant", FLOW_FULL)
        self.theta = flow.get("theta")
        self.sigma = flow.get("sigma")
        self.rule = DivergenceRule(
            float(flow.get("tau_abs", settings.get("flow_tau_abs"))),
            float(flow.get("tau_tail", settings.get("flow_tau_tail"))),
        )

    def _check_requirements(self) -> None:
        requested = set(self.scenario.analyses)
        for theorem in self.scenario.cross_checks:
            for name in REQUIRED_ANALYSES[theorem]:
                if name not in requested:
                    raise MissingArtifact(theorem, name)

    async def _analysis(self, name: str, fn: Callable, *args, **kwargs) -> Any:
        """Run one analysis in the executor, publishing lifecycle events."""
        await publish_event(EventType.ANALYSIS_STARTED, {"analysis": name}, "ScenarioRunner")
        began = time.perf_counter()
        loop = asyncio.get_running_loop()
        try:
            result = await loop.run_in_executor(self.executor, functools.partial(fn, *args, **kwargs))
        except Exception as e:
            logger.error(f"Analysis {name} failed: {e}")
            await publish_event(EventType.ANALYSIS_FAILED, {"analysis": name, "error": str(e)}, "ScenarioRunner")
            raise
        logger.debug(f"Analysis {name} took {time.perf_counter() - began:.3f}s")
        await publish_event(EventType.ANALYSIS_COMPLETED, {"analysis": name}, "ScenarioRunner")
        return result

    def _materialise(self, spec: Dict[str, Any], field_name: str) -> Tuple[ChainSource, Dict[str, Any]]:
        source = build_chain(spec, self.scenario.seed, self.scenario.horizon, field_name,
                             self._tol.get("row"))
        info = source.describe()
        # Recorded chains are immutable, so concurrent analyses share them safely
        return record(source, self.scenario.horizon), info

    def _islands(self, chain: ChainSource, start: int):
        graph = unbounded_graph(chain, self.scenario.horizon, self.rule, start=start)
        partition = islands(graph)
        per_island = per_island_aif(chain, partition, self.scenario.horizon, self.variant,
                                    start=start, theta=self.theta, sigma=self.sigma)
        return graph, partition, per_island

    def _simulate(self, chain: ChainSource, x0: np.ndarray, start: int):
        traj = trajectory(chain, x0, start, self.scenario.horizon)
        window = min(int(settings.get("cluster_window")), traj.states.shape[0] - 1)
        return traj, detect_clusters(traj, self._tol.get("cluster"), window)

    def _lyapunov(self, bundle: ReportBundle, chain: ChainSource, nominal: Optional[ChainSource]):
        if nominal is not None and bundle.nominal_certificates is not None:
            M = bundle.nominal_certificates.chain_M
            reference = nominal
            offset = bundle.start - bundle.l1.start
            if offset < 0:
                raise ValueError("the nominal chain starts after the scenario start")
            steps = bundle.trajectory.states.shape[0]
            cumulative = bundle.l1.cumulative
            mprime = cumulative[offset:offset + steps] - cumulative[offset]
        else:
            M, reference, mprime = bundle.certificates.chain_M, chain, None
        traj = bundle.trajectory
        s = traj.order
        series = lyapunov_series(traj, s, M, mprime, nominal=reference)
        tol = self._tol.get("monotonic")
        violations = {}
        for r in range(1, s + 1):
            per_r = lyapunov_series(traj, r, M, mprime)
            violations[r] = check_S_monotonic(per_r, traj, reference, tol)
        return series, violations, tail_oscillation(traj)

    async def run(self) -> ReportBundle:
        """
        Execute the scenario.

        Returns:
            ReportBundle: All results, with ``files`` filled when reports were written

        Raises:
            ManifestError, MissingArtifact and propagated analysis errors
        """
        sc = self.scenario
        requested = set(sc.analyses)
        self._check_requirements()
        await publish_event(EventType.SCENARIO_STARTED, {"scenario": sc.name}, "ScenarioRunner")
        logger.info(f"Running scenario {sc.name} to horizon {sc.horizon}")

        chain, info = self._materialise(sc.chain, "chain")
        nominal, nominal_info = (None, None)
        if sc.nominal is not None:
            nominal, nominal_info = self._materialise(sc.nominal, "nominal")
        start = sc.start if sc.start is not None else chain.start
        chain.check_range(start)
        bundle = ReportBundle(scenario=sc, chain_info=info, nominal_info=nominal_info,
                              start=start, horizon=sc.horizon, rule=self.rule)

        # Certificates first: cross-check scope and the Lyapunov constant depend on them
        needs_certificates = (
            requested & {"certificates", "lyapunov"} or set(sc.cross_checks) & {"T2", "T3", "T4"}
        )
        stage = []
        if needs_certificates:
            stage.append(self._analysis("certificates", certify_chain, chain, sc.horizon, start=start,
                                        tol_doubly=self._tol.get("doubly")))
            if nominal is not None:
                stage.append(self._analysis("nominal-certificates", certify_chain, nominal, sc.horizon,
                                            tol_doubly=self._tol.get("doubly")))
                stage.append(self._analysis("l1", l1_distance, chain, nominal, sc.horizon))
        results = await asyncio.gather(*stage)
        if results:
            bundle.certificates = results[0]
            if nominal is not None:
                bundle.nominal_certificates, bundle.l1 = results[1], results[2]

        # Flow, islands, probes and the trajectory are independent of each other
        jobs: Dict[str, Any] = {}
        if "aif" in requested:
            jobs["aif"] = self._analysis("aif", aif_profile, chain, sc.horizon, self.variant,
                                         start=start, theta=self.theta, sigma=self.sigma)
        if "islands" in requested:
            jobs["islands"] = self._analysis("islands", self._islands, chain, start)
        if "ergodicity" in requested:
            jobs["ergodicity"] = self._analysis("ergodicity", ergodicity_probe, chain, start, sc.horizon,
                                                self._tol.get("span"))
        if "class-ergodicity" in requested:
            jobs["class-ergodicity"] = self._analysis("class-ergodicity", class_ergodicity_probe, chain,
                                                      start, sc.horizon, self._tol.get("cluster"))
        if requested & {"simulate", "lyapunov"}:
            x0 = np.asarray(sc.x0, dtype=float) if sc.x0 is not None else _default_state(chain, info)
            jobs["simulate"] = self._analysis("simulate", self._simulate, chain, x0, start)
        done = dict(zip(jobs, await asyncio.gather(*jobs.values())))

        bundle.flow = done.get("aif")
        if "islands" in done:
            bundle.graph, bundle.partition, bundle.island_flow = done["islands"]
        bundle.ergodicity = done.get("ergodicity")
        bundle.class_ergodicity = done.get("class-ergodicity")
        if "simulate" in done:
            bundle.trajectory, bundle.clusters = done["simulate"]

        if "lyapunov" in requested:
            try:
                bundle.lyapunov, bundle.monotonic_violations, bundle.tail = await self._analysis(
                    "lyapunov", self._lyapunov, bundle, chain, nominal
                )
            except InfiniteM as e:
                bundle.lyapunov_note = str(e)
                logger.warning(f"Lyapunov series skipped for {sc.name}: {e}")

        for theorem in sc.cross_checks:
            check = cross_check(theorem, bundle)
            bundle.cross_checks.append(check)
            level = logging.INFO if check.agreement else logging.WARNING
            logger.log(level, f"{theorem}: predicted {check.prediction}, observed {check.observation}, "
                              f"agreement={check.agreement} (in scope: {check.in_scope})")
            await publish_event(EventType.CROSS_CHECK_COMPLETED, check.to_dict(), "ScenarioRunner")

        if self.output_dir is not None:
            bundle.files = emit_reports(bundle, self.output_dir)
            await publish_event(EventType.REPORTS_WRITTEN,
                                {"directory": self.output_dir, "files": bundle.files}, "ScenarioRunner")

        await publish_event(EventType.SCENARIO_COMPLETED,
                            {"scenario": sc.name, "exit_code": bundle.exit_code}, "ScenarioRunner")
        logger.info(f"Scenario {sc.name} finished with exit code {bundle.exit_code}")
        return bundle


async def run_scenario(path: str,
                       out_dir: Optional[str] = None,
                       write: bool = True) -> ReportBundle:
    """
    Parse a manifest and run it.

    Args:
        path: Manifest path
        out_dir: Output directory from the command line (highest precedence)
        write: Write the report files

    Returns:
        ReportBundle: The results; ``exit_code`` is 0 or 2
    """
    scenario = ManifestParser.parse_file(path)
    directory = get_output_directory(out_dir, scenario.output_dir) if write else None
    return await ScenarioRunner(scenario, directory).run()
