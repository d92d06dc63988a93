"""Recipe files: YAML (or JSON) documents validated into pydantic models."""
import copy
from pathlib import Path
from typing import Any, Dict, Type, TypeVar, Union

import yaml
from pydantic import BaseModel, ValidationError

from exceptions import ConfigError
from logger import get_logger
from ..protocols import resolve_channel_paths

logger = get_logger(__name__)

ModelT = TypeVar("ModelT", bound=BaseModel)

# Sections of a recipe that hold a QHLConfig.
CONFIG_SECTIONS = ("base", "null", "alt")


def deep_merge(base: Dict[str, Any], override: Dict[str, Any]) -> Dict[str, Any]:
    """Recursively merge ``override`` into a copy of ``base``; non-dict values replace."""
    merged = copy.deepcopy(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = deep_merge(merged[key], value)
        else:
            merged[key] = copy.deepcopy(value)
    return merged


def read_recipe(path: Union[str, Path]) -> Dict[str, Any]:
    """Parse a recipe into a dict, with channel paths made relative to the recipe."""
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"Recipe not found: {path}", path=str(path))
    try:
        document = yaml.safe_load(path.read_text(encoding="utf-8"))
    except yaml.YAMLError as e:
        raise ConfigError(f"Recipe {path} is not valid YAML: {e}", path=str(path))
    if not isinstance(document, dict):
        raise ConfigError(f"Recipe {path} must be a mapping", path=str(path))
    # YAML reads a bare ``null:`` key as None
    if None in document:
        document["null"] = document.pop(None)

    base_dir = path.parent
    document = resolve_channel_paths(document, base_dir)
    for section in CONFIG_SECTIONS:
        if isinstance(document.get(section), dict):
            document[section] = resolve_channel_paths(document[section], base_dir)
    for variant in document.get("variants") or []:
        if isinstance(variant, dict) and isinstance(variant.get("overrides"), dict):
            variant["overrides"] = resolve_channel_paths(variant["overrides"], base_dir)
    return document


def load_recipe(path: Union[str, Path], model: Type[ModelT], **overrides: Any) -> ModelT:
    """
    Load and validate a recipe.

    Args:
        path: YAML or JSON recipe file
        model: Pydantic model the recipe describes
        **overrides: Top-level values replacing the recipe's (None values are ignored)

    Returns:
        Validated model instance
    """
    document = read_recipe(path)
    document.update({key: value for key, value in overrides.items() if value is not None})
    try:
        recipe = model.model_validate(document)
    except ValidationError as e:
        raise ConfigError(f"Invalid {model.__name__} recipe {path}: {e}", path=str(path))
    logger.debug(f"Loaded {model.__name__} recipe from {path}")
    return recipe
