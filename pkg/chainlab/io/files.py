"""
File management utilities for chainlab.
Output directory resolution and report directory creation.
"""

import os
import logging
from typing import Optional

from ..config.constants import OUT_DIR_ENV
from ..config.settings import settings

logger = logging.getLogger("chainlab.io.files")


def get_output_directory(cli_dir: Optional[str] = None, manifest_dir: Optional[str] = None) -> str:
    """
    Resolve the report directory.

    Precedence: command-line flag, then the CHAINLAB_OUT_DIR environment
    variable, then the manifest's ``output_dir``, then settings.

    Args:
        cli_dir: Value of --out-dir
        manifest_dir: Value of the manifest's output_dir field

    Returns:
        str: Path to the output directory (not created)
    """
    for candidate in (cli_dir, os.environ.get(OUT_DIR_ENV), manifest_dir):
        if candidate:
            return candidate
    return settings.get('output_directory')


def create_directory(path: str) -> bool:
    """
    Create a directory if it doesn't exist.

    Args:
        path: Path to create

    Returns:
        bool: True if successful, False otherwise
    """
    try:
        if os.path.exists(path):
            if os.path.isdir(path):
                logger.debug(f"Directory already exists: {path}")
                return True
            logger.error(f"Path exists but is not a directory: {path}")
            return False

        os.makedirs(path, exist_ok=True)
        logger.info(f"Created directory: {path}")
        return True
    except Exception as e:
        logger.error(f"Error creating directory {path}: {e}")
        return False

