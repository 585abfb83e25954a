"""
Detection and count types for GSV Mode Share.
"""
from enum import Enum
from typing import Self, Tuple

from pydantic import BaseModel, ConfigDict, Field, model_validator

BBox = Tuple[float, float, float, float]


class VehicleClass(str, Enum):
    """Object classes emitted by the vehicle detector."""
    MOTOR = "motor"
    PEDAL = "pedal"
    CARGO = "cargo"
    RICKSHAW = "rickshaw"

    def __str__(self) -> str:
        return self.value


def _check_bbox(bbox: BBox) -> None:
    x_min, y_min, x_max, y_max = bbox
    if not (x_min < x_max and y_min < y_max):
        raise ValueError(f"invalid rectangle {bbox}: need x_min < x_max and y_min < y_max")


class Detection(BaseModel):
    """A single detected object in one image."""

    model_config = ConfigDict(frozen=True)

    image_id: str
    vehicle_class: VehicleClass
    confidence: float = Field(ge=0.0, le=1.0)
    bbox: BBox

    @model_validator(mode="after")
    def _valid_box(self) -> Self:
        _check_bbox(self.bbox)
        return self


class GroundTruthBox(BaseModel):
    """A labelled object in one image."""

    model_config = ConfigDict(frozen=True)

    image_id: str
    vehicle_class: VehicleClass
    bbox: BBox

    @model_validator(mode="after")
    def _valid_box(self) -> Self:
        _check_bbox(self.bbox)
        return self


class CityCounts(BaseModel):
    """Per-city detection counts.

    Only ``gsv_cycle`` (pedal) and ``gsv_motorcycle`` (motor) feed the regression;
    cargo cycles and rickshaws are tracked to keep them out of the other classes.
    """

    model_config = ConfigDict(frozen=True)

    city_id: str = ""
    gsv_cycle: int = Field(default=0, ge=0)
    gsv_motorcycle: int = Field(default=0, ge=0)
    gsv_cargo: int = Field(default=0, ge=0)
    gsv_rickshaw: int = Field(default=0, ge=0)
    n_images: int = Field(default=0, ge=0)

    def count(self, vehicle_class: VehicleClass) -> int:
        return {
            VehicleClass.PEDAL: self.gsv_cycle,
            VehicleClass.MOTOR: self.gsv_motorcycle,
            VehicleClass.CARGO: self.gsv_cargo,
            VehicleClass.RICKSHAW: self.gsv_rickshaw,
        }[vehicle_class]

    def merge(self, other: "CityCounts") -> "CityCounts":
        """Combine counts from disjoint image subsets of the same city."""
        return CityCounts(
            city_id=self.city_id or other.city_id,
            gsv_cycle=self.gsv_cycle + other.gsv_cycle,
            gsv_motorcycle=self.gsv_motorcycle + other.gsv_motorcycle,
            gsv_cargo=self.gsv_cargo + other.gsv_cargo,
            gsv_rickshaw=self.gsv_rickshaw + other.gsv_rickshaw,
            n_images=self.n_images + other.n_images,
        )

    def __str__(self) -> str:
        return (
            f"{self.city_id}: cycle {self.gsv_cycle}, motorcycle {self.gsv_motorcycle} "
            f"over {self.n_images} images"
        )
