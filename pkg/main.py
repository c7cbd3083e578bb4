#!/usr/bin/env python3

"""
Command-line entry point for chainlab.

Subcommands:
    run <manifest>        run a scenario manifest
    certify <chain>       certificate constants of a chain
    flow <chain>          absolute infinite flow profile and islands
    simulate <chain>      trajectory from --x0, plus the chain exported as a manifest

A <chain> is a registered generator name (inv_n, swap, krause, ...) or a path
to a matrix file or manifest.
"""

import argparse
import asyncio
import dataclasses
import json
import logging
import os
import sys
from typing import Any, Dict, List, Optional

logging.basicConfig(
    level=logging.INFO,
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
)
logger = logging.getLogger("chainlab.main")


def parse_args(argv: Optional[List[str]] = None) -> argparse.Namespace:
    """Parse command line arguments."""
    shared = argparse.ArgumentParser(add_help=False)
    shared.add_argument('--horizon', type=int, help='Horizon N (number of steps)')
    shared.add_argument('--tol-span', type=float, help='Ergodicity span tolerance')
    shared.add_argument('--tol-cluster', type=float, help='Row/state proximity tolerance')
    shared.add_argument('--seed', type=int, help='Seed for random generators')
    shared.add_argument('--out-dir', help='Report directory (overrides CHAINLAB_OUT_DIR)')
    shared.add_argument('--debug', action='store_true', help='Enable debug logging')

    chain_args = argparse.ArgumentParser(add_help=False)
    chain_args.add_argument('chain', help='Generator name or path to a matrix file / manifest')
    chain_args.add_argument('--params', default='{}', help='Generator parameters as a JSON object')

    parser = argparse.ArgumentParser(
        prog='chainlab',
        description='Finite-horizon certificates and cross-checks for linear consensus chains'
    )
    sub = parser.add_subparsers(dest='command', required=True)

    run = sub.add_parser('run', parents=[shared], help='Run a scenario manifest')
    run.add_argument('manifest', help='Path to the scenario manifest (JSON)')

    sub.add_parser('certify', parents=[shared, chain_args], help='Certificate constants of a chain')

    flow = sub.add_parser('flow', parents=[shared, chain_args], help='Flow profile and islands')
    flow.add_argument('--variant', choices=['full', 'reduced'], default='full')

    simulate = sub.add_parser('simulate', parents=[shared, chain_args], help='Simulate a trajectory')
    simulate.add_argument('--x0', type=float, nargs='+', help='Initial state, one value per agent')

    return parser.parse_args(argv)


def _chain_spec(arg: str, params: str) -> Dict[str, Any]:
    """Chain specification for a CLI <chain> argument."""
    from chainlab.config.constants import GENERATOR_NAMES
    from chainlab.data.errors import ManifestError
    from chainlab.data.parser import ManifestParser

    if os.path.exists(arg):
        if arg.lower().endswith('.json'):
            data = ManifestParser.load_document(arg)
            if isinstance(data, dict) and 'chain' in data:
                spec = dict(data['chain'])
                if 'file' in spec and not os.path.isabs(spec['file']):
                    spec['file'] = os.path.join(os.path.dirname(os.path.abspath(arg)), spec['file'])
                return spec
        return {'file': os.path.abspath(arg)}
    if arg in GENERATOR_NAMES:
        try:
            decoded = json.loads(params)
        except json.JSONDecodeError as e:
            raise ManifestError('params', f'invalid JSON: {e}') from e
        return {'generator': arg, 'params': decoded}
    raise ManifestError('chain', f'{arg!r} is neither a file nor a generator')


def _apply_overrides(raw: Dict[str, Any], args: argparse.Namespace) -> Dict[str, Any]:
    if args.horizon is not None:
        raw['horizon'] = args.horizon
    tolerances = dict(raw.get('tolerances', {}))
    if args.tol_span is not None:
        tolerances['span'] = args.tol_span
    if args.tol_cluster is not None:
        tolerances['cluster'] = args.tol_cluster
    raw['tolerances'] = tolerances
    if args.seed is not None:
        raw['seed'] = args.seed
    return raw


def build_scenario(args: argparse.Namespace):
    """Scenario for any subcommand; ad-hoc manifests for certify/flow/simulate."""
    from chainlab.config.settings import settings
    from chainlab.data.parser import ManifestParser

    if args.command == 'run':
        raw = ManifestParser.load_document(args.manifest)
        if not isinstance(raw, dict):
            return ManifestParser.parse_dict(raw)
        base_dir = os.path.dirname(os.path.abspath(args.manifest))
        name = os.path.splitext(os.path.basename(args.manifest))[0]
        return ManifestParser.parse_dict(_apply_overrides(raw, args), base_dir, name)

    analyses = {
        'certify': ['certificates'],
        'flow': ['aif', 'islands'],
        'simulate': ['simulate'],
    }[args.command]
    raw: Dict[str, Any] = {
        'name': f'{args.command}-{os.path.splitext(os.path.basename(args.chain))[0]}',
        'chain': _chain_spec(args.chain, args.params),
        'analyses': analyses,
        'horizon': settings.get('default_horizon'),
    }
    if args.command == 'flow':
        raw['flow'] = {'variant': args.variant}
    if args.command == 'simulate' and args.x0:
        raw['x0'] = args.x0
    return ManifestParser.parse_dict(_apply_overrides(raw, args))


async def _log_progress(event) -> None:
    logger.info(f"{event.type.name.lower()}: {event.data.get('analysis')}")


async def main(argv: Optional[List[str]] = None) -> int:
    """Main entry point. Returns the process exit code."""
    from chainlab.config.constants import EXIT_ERROR
    from chainlab.config.settings import settings
    from chainlab.core.harness import ScenarioRunner
    from chainlab.data.errors import ChainLabError
    from chainlab.io.files import get_output_directory
    from chainlab.io.reports import ReportWriter
    from chainlab.utils.events import EventType, event_bus

    args = parse_args(argv)
    if args.debug:
        logging.getLogger().setLevel(logging.DEBUG)
    else:
        logging.getLogger().setLevel(str(settings.get('log_level', 'INFO')).upper())

    await event_bus.subscribe(EventType.ANALYSIS_COMPLETED, _log_progress)
    try:
        scenario = build_scenario(args)
        directory = get_output_directory(args.out_dir, scenario.output_dir)
        runner = ScenarioRunner(scenario, directory)
        bundle = await runner.run()
        if args.command == 'simulate':
            from chainlab.core.harness import build_chain
            chain = build_chain(scenario.chain, scenario.seed, scenario.horizon)
            ReportWriter(directory).write_chain(chain, scenario.horizon)
        print(json.dumps(
            {'exit_code': bundle.exit_code, 'directory': directory,
             'cross_checks': [dataclasses.asdict(c) for c in bundle.cross_checks]},
            sort_keys=True,
        ))
        return bundle.exit_code
    except ChainLabError as e:
        logger.error(f"{type(e).__name__}: {e}")
        return EXIT_ERROR
    except Exception as e:
        logger.error(f"Error running chainlab: {e}")
        return EXIT_ERROR
    finally:
        await event_bus.unsubscribe(EventType.ANALYSIS_COMPLETED, _log_progress)


def cli() -> None:
    """Console script entry point."""
    sys.exit(asyncio.run(main()))


if __name__ == '__main__':
    if sys.platform == 'win32':
        asyncio.set_event_loop_policy(asyncio.WindowsSelectorEventLoopPolicy())
    cli()
