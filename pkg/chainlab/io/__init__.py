"""
I/O package for chainlab.
Contains output directory handling and the report writer.
"""

from .files import get_output_directory, create_directory
from .reports import ReportWriter, emit_reports, chain_to_manifest, to_plain

__all__ = [
    'get_output_directory',
    'create_directory',
    'ReportWriter',
    'emit_reports',
    'chain_to_manifest',
    'to_plain',
]
