"""Power-model document loader.

Loads drive power models from JSON documents whose keys are the PowerModel
field names. The packaged defaults describe the unloaded reference drives in
up (or right) travel.
"""

import json
from functools import lru_cache
from pathlib import Path

from pydantic import ValidationError

from cranetraj.errors import ConfigError
from cranetraj.models.kinematics import Drive
from cranetraj.models.power import PowerModel

_PACKAGED = {
    Drive.RUNNING: Path(__file__).parent / "running_gear.json",
    Drive.LIFTING: Path(__file__).parent / "lifting_gear.json",
}


def _read(path: Path) -> PowerModel:
    if not path.exists():
        raise ConfigError(f"Power model file not found: {path}")
    try:
        with open(path) as f:
            data = json.load(f)
    except json.JSONDecodeError as e:
        raise ConfigError(f"Invalid JSON in power model {path}: {e}") from e
    try:
        return PowerModel(**data)
    except (ValidationError, TypeError) as e:
        raise ConfigError(f"Invalid power model {path}: {e}") from e


@lru_cache(maxsize=8)
def _load_cached(path: Path) -> PowerModel:
    return _read(path)


def load_power_model(path: Path | None, drive: Drive) -> PowerModel:
    """Load a power-model document, or the packaged default for ``drive``."""
    return _load_cached(Path(path) if path is not None else _PACKAGED[drive])
