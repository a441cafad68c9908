"""
Validation of command output and input files against the shipped JSON schemas.
"""

import json
import logging
from functools import lru_cache
from pathlib import Path
from typing import Any, Dict, List, Tuple

from jsonschema import Draft7Validator

logger = logging.getLogger(__name__)

SCHEMA_DIR = Path(__file__).parent / 'schemas'

SCHEMAS = ('classification', 'orbit_report', 'certificates', 'transport', 'ball',
           'generators', 'connection')


@lru_cache(maxsize=None)
def load_schema(name: str) -> Dict[str, Any]:
    """
    Load a shipped schema by name.

    Raises:
        ValueError: If no schema has that name
    """
    if name not in SCHEMAS:
        raise ValueError(f"unknown schema: {name}")
    with open(SCHEMA_DIR / f"{name}.schema.json", 'r') as f:
        return json.load(f)


def schema_errors(name: str, document: Any) -> List[str]:
    """Every violation of the named schema, as 'path: message' strings in document order."""
    validator = Draft7Validator(load_schema(name))
    errors = sorted(validator.iter_errors(document), key=lambda e: list(e.absolute_path))
    return [f"{'/'.join(str(p) for p in e.absolute_path) or '<root>'}: {e.message}"
            for e in errors]


def validate_document(name: str, document: Any) -> Tuple[bool, str]:
    """
    Validate a JSON document against a shipped schema.

    Returns:
        Tuple of (valid: bool, message: str)
    """
    errors = schema_errors(name, document)
    if errors:
        msg = f"{name} document is invalid: " + '; '.join(errors)
        logger.error(msg)
        return False, msg
    logger.debug(f"{name} document is valid")
    return True, f"{name} document is valid"


def validate_file(name: str, path: Path) -> Tuple[bool, str]:
    """
    Validate a JSON file against a shipped schema.

    Returns:
        Tuple of (valid: bool, message: str)
    """
    if not path.exists():
        msg = f"File not found: {path}"
        logger.error(msg)
        return False, msg
    try:
        with open(path, 'r') as f:
            document = json.load(f)
    except json.JSONDecodeError as e:
        msg = f"Invalid JSON in {path}: {e}"
        logger.error(msg)
        return False, msg
    return validate_document(name, document)
