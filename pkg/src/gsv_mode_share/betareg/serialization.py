"""
Reading and writing fitted models as JSON.
"""
import json
import logging
from importlib import resources
from pathlib import Path

from pydantic import ValidationError

from gsv_mode_share.betareg.fitting import FittedModel
from gsv_mode_share.dataset.records import Mode
from gsv_mode_share.reporting.artifacts import atomic_write_text

logger = logging.getLogger(__name__)


def model_to_json(model: FittedModel) -> str:
    return json.dumps(model.model_dump(mode="json"), indent=2, sort_keys=True) + "\n"


def save_model(model: FittedModel, path: Path) -> None:
    atomic_write_text(Path(path), model_to_json(model))


def load_model(path: Path) -> FittedModel:
    """Load a model JSON document.

    Raises:
        ValueError: If the document does not describe a valid model
    """
    text = Path(path).read_text(encoding="utf-8")
    try:
        return FittedModel.model_validate_json(text)
    except ValidationError as exc:
        raise ValueError(f"{path}: not a valid model document: {exc}") from None


def load_bundled_model(mode: Mode) -> FittedModel:
    """The published-coefficient model shipped with the package for ``mode``."""
    mode = Mode(mode)
    resource = resources.files("gsv_mode_share.betareg").joinpath("models", f"{mode.value}.json")
    logger.debug("Loading bundled %s model from %s", mode.value, resource)
    return FittedModel.model_validate_json(resource.read_text(encoding="utf-8"))
