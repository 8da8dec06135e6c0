"""Data loader service."""
import json
from functools import lru_cache
from pathlib import Path
from typing import Any, Dict, List, Union

from pydantic import ValidationError

from app.core.config import settings
from app.core.errors import ConfigError
from app.core.logging import logger
from app.schemas.experiment import ExperimentConfig, parse_experiment_config
from app.schemas.numerics import NumericsConfig


@lru_cache(maxsize=1)
def load_numerics() -> NumericsConfig:
    """
    Load numerical defaults from ``data/config.json``.

    Returns:
        NumericsConfig, falling back to built-in defaults when the file is
        missing or unreadable
    """
    config_file = settings.CONFIG_FILE
    if not config_file.exists():
        logger.warning(f"Config file not found: {config_file}, using defaults")
        return NumericsConfig()

    try:
        with open(config_file, "r", encoding="utf-8") as f:
            data = json.load(f)
        numerics = NumericsConfig(**data.get("numerics", {}))
        logger.debug(f"Numerics loaded from {config_file}")
        return numerics
    except json.JSONDecodeError as e:
        logger.error(f"Invalid JSON in config file: {str(e)}")
        return NumericsConfig()
    except ValidationError as e:
        logger.error(f"Invalid numerics section in config file: {str(e)}")
        return NumericsConfig()


def read_json(path: Union[str, Path]) -> Any:
    """
    Read a JSON file.

    Raises:
        FileNotFoundError: If the file does not exist
        ConfigError: If it is not valid JSON
    """
    path = Path(path)
    if not path.exists():
        logger.error(f"Loader: file not found: {path}")
        raise FileNotFoundError(f"File not found: {path}")
    try:
        with open(path, "r", encoding="utf-8") as f:
            return json.load(f)
    except json.JSONDecodeError as e:
        logger.error(f"Loader: invalid JSON in {path}: {str(e)}")
        raise ConfigError(f"Invalid JSON in {path}: {e.msg} (line {e.lineno})", ["<json>"])


def _offending_fields(error: ValidationError) -> List[str]:
    return [".".join(str(part) for part in err["loc"]) or "<root>" for err in error.errors()]


def validate_experiment_config(data: Dict[str, Any]) -> ExperimentConfig:
    """
    Validate a raw experiment configuration.

    Raises:
        ConfigError: listing every offending field
    """
    try:
        return parse_experiment_config(data)
    except ValidationError as e:
        fields = _offending_fields(e)
        details = "; ".join(
            f"{'.'.join(str(p) for p in err['loc'])}: {err['msg']}" for err in e.errors()
        )
        logger.error(f"Loader: invalid experiment config ({details})")
        raise ConfigError(f"Invalid experiment config: {details}", fields)


async def load_experiment_config(path: Union[str, Path]) -> ExperimentConfig:
    """
    Load and validate an experiment configuration file.

    Args:
        path: Path to a JSON config

    Returns:
        Validated ExperimentConfig

    Raises:
        FileNotFoundError: If the file doesn't exist
        ConfigError: If the JSON or its contents are invalid
    """
    path = Path(path)
    logger.info(f"Loading experiment config from {path}")
    data = read_json(path)
    if not isinstance(data, dict):
        raise ConfigError("Experiment config must be a JSON object", ["<root>"])
    cfg = validate_experiment_config(data)
    logger.info(f"Experiment config loaded: kind={cfg.kind}, seed={cfg.seed}")
    return cfg


async def load_builtin_experiments() -> List[ExperimentConfig]:
    """
    Load every built-in experiment under ``data/experiments`` in name order.

    Returns:
        List of validated configs
    """
    experiments_dir = settings.EXPERIMENTS_DIR
    if not experiments_dir.exists():
        logger.warning(f"Experiments directory not found: {experiments_dir}")
        return []

    configs = []
    for path in sorted(experiments_dir.glob("*.json")):
        configs.append(await load_experiment_config(path))
    logger.info(f"Loaded {len(configs)} built-in experiments")
    return configs
