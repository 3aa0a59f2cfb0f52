"""Per-iteration run log written as JSON lines"""

import logging
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, TextIO, Union

import ujson

from src.utils.constants import LOGGER_NAME
from src.utils.errors import OutputError

logger = logging.getLogger(LOGGER_NAME)


@dataclass(frozen=True)
class IterationRecord:
    iteration: int
    destination_id: str
    pl: float
    path_type: str
    penalties: Sequence[str]
    flow_in: Sequence[int]
    importance: float
    fallback: bool
    candidates: int

    def to_dict(self) -> Dict[str, Any]:
        return {
            'iteration': self.iteration,
            'destination': self.destination_id,
            'pl': self.pl,
            'type': self.path_type,
            'penalties': list(self.penalties),
            'flow_in': list(self.flow_in),
            'importance': self.importance,
            'fallback': self.fallback,
            'candidates': self.candidates,
        }


class RunLog:
    """Collects iteration records and mirrors them to a file when a path is given

    Lines go to a sibling `.partial` file that replaces the target only when
    the block exits cleanly; a failed layout leaves no run log behind.
    """

    def __init__(self, path: Optional[Union[str, Path]] = None):
        self.path = Path(path) if path is not None else None
        self.records: List[IterationRecord] = []
        self._stream: Optional[TextIO] = None

    @property
    def partial_path(self) -> Optional[Path]:
        return self.path.with_name(self.path.name + ".partial") if self.path is not None else None

    def __enter__(self) -> 'RunLog':
        if self.path is not None:
            try:
                self.path.parent.mkdir(parents=True, exist_ok=True)
                if self.path.is_dir():
                    raise IsADirectoryError(f"{self.path} is a directory")
                self._stream = self.partial_path.open('w', encoding='utf-8')
            except OSError as e:
                logger.error(f"Cannot open run log {self.path}: {e}")
                raise OutputError(f"cannot open run log {self.path}: {e}") from e
        return self

    def __exit__(self, exc_type, exc, tb) -> None:
        self.close()
        if self.path is None:
            return
        if exc_type is not None:
            self.partial_path.unlink(missing_ok=True)
            logger.warning(f"Run log {self.path} discarded after {len(self.records)} iterations")
            return
        try:
            os.replace(self.partial_path, self.path)
        except OSError as e:
            logger.error(f"Cannot write run log {self.path}: {e}")
            raise OutputError(f"cannot write run log {self.path}: {e}") from e

    def append(self, record: IterationRecord) -> None:
        self.records.append(record)
        if self._stream is not None:
            self._stream.write(ujson.dumps(record.to_dict(), sort_keys=True) + "\n")

    @property
    def fallbacks(self) -> List[str]:
        return [r.destination_id for r in self.records if r.fallback]

    def close(self) -> None:
        if self._stream is not None:
            self._stream.close()
            self._stream = None


def read_run_log(path: Union[str, Path]) -> List[Dict[str, Any]]:
    """Parse a run log file back into dictionaries"""
    with Path(path).open(encoding='utf-8') as f:
        return [ujson.loads(line) for line in f if line.strip()]
