"""
Report writing: JSON documents and CSV tables, to stdout or to a new file.
"""

import csv
import io
import json
import sys
from pathlib import Path
from typing import Iterable, Optional, Sequence

from ..logging_config import get_logger

logger = get_logger(__name__)

#: significant digits of floats in CSV cells
CSV_DIGITS = 17


def format_cell(value) -> str:
    """floats with CSV_DIGITS significant digits, None as empty, the rest via str"""
    if value is None:
        return ""
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, float):
        return format(value, f".{CSV_DIGITS}g")
    if isinstance(value, (list, tuple)):
        return " ".join(format_cell(v) for v in value)
    return str(value)


def to_csv(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    """CSV text with a header line and one line per row ('\\n' line ends)"""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([format_cell(v) for v in row])
    return buffer.getvalue()


def to_json(document) -> str:
    """indented JSON; key order is kept so identical inputs give identical text"""
    return json.dumps(document, indent=2) + "\n"


def check_output(filename: Optional[str]) -> None:
    """
    Raises:
        FileExistsError: filename already exists
    """
    if filename is not None and Path(filename).exists():
        raise FileExistsError(f"{filename} already exists")


def write_output(text: str, filename: Optional[str] = None) -> None:
    """
    Write text to filename, or to stdout when filename is None.

    Raises:
        FileExistsError: filename already exists
    """
    if filename is None:
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    check_output(filename)
    Path(filename).write_text(text)
    logger.info(f"report saved: {filename}")
