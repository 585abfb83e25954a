"""
Atomic artifact writers for GSV Mode Share.
"""
import json
import logging
import os
import tempfile
from pathlib import Path
from typing import Any, List

import pandas as pd

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.10g"


def atomic_write_text(path: Path, text: str) -> Path:
    """Write text to a temporary sibling file and rename it into place.

    Args:
        path: Destination path
        text: File contents

    Returns:
        The destination path
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(prefix=f".{path.name}.", suffix=".tmp", dir=path.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)
        os.replace(tmp_name, path)
    except BaseException:
        if os.path.exists(tmp_name):
            os.unlink(tmp_name)
        raise
    logger.debug("Wrote %s", path)
    return path


def frame_to_csv_text(frame: pd.DataFrame) -> str:
    """Render a frame as CSV with a fixed float format and newline."""
    return frame.to_csv(index=False, lineterminator="\n", float_format=FLOAT_FORMAT)


def write_frame(path: Path, frame: pd.DataFrame) -> Path:
    """Atomically write a frame as CSV."""
    return atomic_write_text(path, frame_to_csv_text(frame))


def write_json(path: Path, document: Any) -> Path:
    """Atomically write a JSON document with stable key order."""
    return atomic_write_text(path, json.dumps(document, indent=2, sort_keys=True) + "\n")


class ArtifactLog:
    """Tracks the artifacts a stage has written so a failed stage can remove them."""

    def __init__(self) -> None:
        self.written: List[Path] = []

    def text(self, path: Path, text: str) -> Path:
        self.written.append(atomic_write_text(path, text))
        return path

    def frame(self, path: Path, frame: pd.DataFrame) -> Path:
        return self.text(path, frame_to_csv_text(frame))

    def json(self, path: Path, document: Any) -> Path:
        return self.text(path, json.dumps(document, indent=2, sort_keys=True) + "\n")

    def remove_all(self) -> None:
        """Delete every artifact recorded so far."""
        for path in reversed(self.written):
            try:
                path.unlink()
                logger.info("Removed partial output %s", path)
            except FileNotFoundError:
                pass
        self.written = []
