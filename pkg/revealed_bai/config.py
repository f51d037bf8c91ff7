"""
Configuration

Environment defaults from .env files, JSON cell grids, and the precedence
flags > config file > environment > built-in defaults.
"""

import json
import logging
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Union

from dotenv import load_dotenv

from .exceptions import ConfigurationError
from .harness import ExperimentCell

logger = logging.getLogger(__name__)

# JSON grid key -> ExperimentCell field
CELL_KEYS = {
    "delta": "delta",
    "k": "n_arms",
    "gap": "gap",
    "alpha": "alpha",
    "rho": "rho_policy",
    "noise_p": "noise_p",
    "algos": "algorithms",
    "reps": "replications",
    "seed": "master_seed",
    "n1": "n1_override",
    "m": "m_override",
    "runs_per_instance": "runs_per_instance",
    "phase1_stop": "phase1_stop",
    "uni_schedule": "uni_schedule",
    "budget_matching": "budget_matching",
    "coupled": "coupled",
    "reward_family": "reward_family",
    "ts_refresh_every": "ts_refresh_every",
    "ts_warm_start": "ts_warm_start",
    "max_steps": "max_steps",
    "shared_phase1": "shared_phase1",
    "label": "label",
}
REQUIRED_CELL_KEYS = ("delta", "k")


def _env_int(name: str, default: Optional[int]) -> Optional[int]:
    raw = os.getenv(name)
    if raw is None or raw.strip() == "":
        return default
    try:
        return int(raw)
    except ValueError:
        raise ConfigurationError(f"{name} must be an integer, got {raw!r}") from None


@dataclass(frozen=True)
class Settings:
    """
    Environment-level defaults.

    Attributes:
        seed: REVBAI_SEED, default master seed
        threads: REVBAI_THREADS, worker processes (default: available cores)
        reps: REVBAI_REPS, instances per cell
        log_level: REVBAI_LOG_LEVEL, root log level name
    """

    seed: int = 0
    threads: Optional[int] = None
    reps: int = 1000
    log_level: str = "WARNING"

    @classmethod
    def from_env(cls, dotenv_path: Optional[Union[str, Path]] = None) -> "Settings":
        """Read REVBAI_* variables after loading a .env file; set variables win over the file."""
        load_dotenv(dotenv_path=dotenv_path, override=False)
        return cls(
            seed=_env_int("REVBAI_SEED", 0),
            threads=_env_int("REVBAI_THREADS", os.cpu_count()),
            reps=_env_int("REVBAI_REPS", 1000),
            log_level=os.getenv("REVBAI_LOG_LEVEL", "WARNING").upper(),
        )

    def cell_defaults(self) -> Dict[str, Any]:
        return {"master_seed": self.seed, "replications": self.reps}


def parse_grid(text: str, source: str = "<config>") -> List[Dict[str, Any]]:
    """
    Parse a grid document {"cells": [{...}, ...]} into cell field dicts.

    Raises:
        ConfigurationError: malformed JSON (with line and column), missing
            or unknown keys
    """
    try:
        document = json.loads(text)
    except json.JSONDecodeError as error:
        raise ConfigurationError(f"{source}: line {error.lineno} column {error.colno}: {error.msg}") from error
    if not isinstance(document, dict) or not isinstance(document.get("cells"), list):
        raise ConfigurationError(f"{source}: expected an object with a 'cells' list")
    extra = set(document) - {"cells"}
    if extra:
        raise ConfigurationError(f"{source}: unknown top-level key(s) {sorted(extra)}")

    entries = []
    for position, raw in enumerate(document["cells"]):
        if not isinstance(raw, dict):
            raise ConfigurationError(f"{source}: cell {position} is not an object")
        unknown = sorted(set(raw) - set(CELL_KEYS))
        if unknown:
            raise ConfigurationError(f"{source}: cell {position} has unknown key(s) {unknown}; valid keys: {', '.join(CELL_KEYS)}")
        missing = [key for key in REQUIRED_CELL_KEYS if key not in raw]
        if missing:
            raise ConfigurationError(f"{source}: cell {position} lacks {missing}")
        entries.append({CELL_KEYS[key]: value for key, value in raw.items()})
    if not entries:
        raise ConfigurationError(f"{source}: 'cells' is empty")
    return entries


def load_grid(path: Union[str, Path]) -> List[Dict[str, Any]]:
    """Read and parse a grid file."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as error:
        raise ConfigurationError(f"cannot read config {path}: {error}") from error
    return parse_grid(text, source=str(path))


def resolve_cell(
    entry: Mapping[str, Any],
    settings: Settings,
    flags: Optional[Mapping[str, Any]] = None,
) -> ExperimentCell:
    """
    Merge one cell: flags over config entry over environment defaults.

    Flags set to None are treated as absent.
    """
    values: Dict[str, Any] = settings.cell_defaults()
    values.update(entry)
    values.update({key: value for key, value in (flags or {}).items() if value is not None})
    if "algorithms" in values:
        values["algorithms"] = tuple(values["algorithms"])
    try:
        return ExperimentCell(**values)
    except TypeError as error:
        raise ConfigurationError(f"invalid cell {dict(entry)}: {error}") from error


def resolve_cells(
    entries: List[Mapping[str, Any]],
    settings: Settings,
    flags: Optional[Mapping[str, Any]] = None,
) -> List[ExperimentCell]:
    cells = [resolve_cell(entry, settings, flags) for entry in entries]
    logger.debug("resolved %d cell(s)", len(cells))
    return cells
