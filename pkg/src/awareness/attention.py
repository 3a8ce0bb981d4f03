"""Situations, regions, attention layers and the multi-layer attention map.

A situation is a (directional, lateral) maneuver tuple. It switches a subset
of three attention layers on; every active layer marks its mapped regions with
a requirement of 1, and the map is the per-region sum over active layers.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Mapping

from .errors import ContractError, SituationError


class Region(str, Enum):
    FL = "fl"
    F = "f"
    FR = "fr"
    R = "r"
    BR = "br"
    B = "b"
    BL = "bl"
    L = "l"

    def __str__(self):
        return self.value


# serialization order of the map, clockwise from front-left
REGIONS: tuple[Region, ...] = tuple(Region)


class Directional(str, Enum):
    FORWARD = "forward"
    BACKWARD = "backward"
    LEFT = "left"
    RIGHT = "right"
    MANEUVERING = "maneuvering"
    STANDBY = "standby"

    def __str__(self):
        return self.value


class Lateral(str, Enum):
    TURN_LEFT = "turn_left"
    TURN_RIGHT = "turn_right"
    CHANGE_LEFT = "change_left"
    CHANGE_RIGHT = "change_right"
    NONE = "none"

    def __str__(self):
        return self.value


class LayerId(str, Enum):
    DIRECTIONAL_INTENTION = "directional_intention"
    LATERAL_INTENTION = "lateral_intention"
    MANEUVERING = "maneuvering"

    def __str__(self):
        return self.value


DI = LayerId.DIRECTIONAL_INTENTION
LI = LayerId.LATERAL_INTENTION
M = LayerId.MANEUVERING

# directional maneuvers that may carry a lateral component
_LATERAL_CAPABLE = frozenset({Directional.FORWARD, Directional.BACKWARD})


@dataclass(frozen=True)
class Situation:
    directional: Directional
    lateral: Lateral = Lateral.NONE

    def __post_init__(self):
        try:
            object.__setattr__(self, "directional", Directional(self.directional))
            object.__setattr__(self, "lateral", Lateral(self.lateral))
        except ValueError as exc:
            raise SituationError(str(exc)) from None
        if self.lateral is not Lateral.NONE and self.directional not in _LATERAL_CAPABLE:
            raise SituationError(
                f"lateral maneuver {self.lateral} is not allowed with directional {self.directional}"
            )

    def to_dict(self) -> dict:
        return {"directional": self.directional.value, "lateral": self.lateral.value}

    @classmethod
    def from_dict(cls, data: Mapping) -> "Situation":
        try:
            return cls(data["directional"], data.get("lateral", "none"))
        except KeyError as exc:
            raise SituationError(f"missing field {exc.args[0]!r}") from None

    def __str__(self):
        return f"({self.directional}, {self.lateral})"


def all_situations() -> list[Situation]:
    """Every valid situation, in enum order."""
    out = []
    for d in Directional:
        for lat in Lateral:
            if lat is Lateral.NONE or d in _LATERAL_CAPABLE:
                out.append(Situation(d, lat))
    return out


_DI_REGIONS = {
    Directional.FORWARD: frozenset({Region.FL, Region.F, Region.FR}),
    Directional.BACKWARD: frozenset({Region.BR, Region.B, Region.BL}),
    Directional.LEFT: frozenset({Region.FL, Region.BL, Region.L}),
    Directional.RIGHT: frozenset({Region.FR, Region.R, Region.BR}),
}

_TURN_REGIONS = {
    Lateral.TURN_LEFT: frozenset({Region.FL, Region.BL, Region.L}),
    Lateral.TURN_RIGHT: frozenset({Region.FR, Region.R, Region.BR}),
}

# lane changes: the side region always, plus the corner behind (forward) or ahead (backward)
_CHANGE_REGIONS = {
    Lateral.CHANGE_LEFT: (Region.L, {Directional.FORWARD: Region.BL, Directional.BACKWARD: Region.FL}),
    Lateral.CHANGE_RIGHT: (Region.R, {Directional.FORWARD: Region.BR, Directional.BACKWARD: Region.FR}),
}


def activate_layers(situation: Situation) -> frozenset[LayerId]:
    """Return the attention layers switched on by ``situation``."""
    d = situation.directional
    layers = set()
    if d in _DI_REGIONS:
        layers.add(DI)
    elif d is Directional.MANEUVERING:
        layers.add(M)
    if situation.lateral is not Lateral.NONE:
        layers.add(LI)
    return frozenset(layers)


def layer_regions(layer: LayerId, situation: Situation) -> frozenset[Region]:
    """Regions a single active layer marks as relevant for ``situation``.

    Raises ContractError if the layer is not active for the situation.
    """
    layer = LayerId(layer)
    if layer not in activate_layers(situation):
        raise ContractError(f"layer {layer} is not active for situation {situation}")
    if layer is DI:
        return _DI_REGIONS[situation.directional]
    if layer is M:
        return frozenset(REGIONS)
    lat = situation.lateral
    if lat in _TURN_REGIONS:
        return _TURN_REGIONS[lat]
    side, corner = _CHANGE_REGIONS[lat]
    return frozenset({side, corner[situation.directional]})


def layer_value(layer: LayerId, situation: Situation, region: Region) -> int:
    """Requirement one layer assigns to one region (0 for inactive layers)."""
    if layer not in activate_layers(situation):
        return 0
    return 1 if region in layer_regions(layer, situation) else 0


@dataclass(frozen=True)
class MLAM:
    """Per-region performance requirements, stored in ``REGIONS`` order."""

    requirements: tuple[int, ...] = (0,) * len(REGIONS)

    def __post_init__(self):
        if len(self.requirements) != len(REGIONS):
            raise ValueError(f"MLAM needs {len(REGIONS)} entries, got {len(self.requirements)}")
        if any(v < 0 for v in self.requirements):
            raise ValueError("requirements must be non-negative")

    @classmethod
    def from_mapping(cls, values: Mapping) -> "MLAM":
        values = {Region(k): v for k, v in values.items()}
        return cls(tuple(values.get(r, 0) for r in REGIONS))

    def __getitem__(self, region) -> int:
        return self.requirements[REGIONS.index(Region(region))]

    def items(self):
        return zip(REGIONS, self.requirements)

    def required_regions(self) -> frozenset[Region]:
        return frozenset(r for r, v in self.items() if v > 0)

    def is_zero(self) -> bool:
        return not any(self.requirements)

    def __le__(self, other: "MLAM") -> bool:
        return all(a <= b for a, b in zip(self.requirements, other.requirements))

    def to_dict(self) -> dict[str, int]:
        return {r.value: v for r, v in self.items()}

    def __str__(self):
        return " ".join(f"{r}:{v}" for r, v in self.items())


def build_mlam(situation: Situation) -> MLAM:
    """Sum the active layers' region indicators into a multi-layer attention map."""
    acc = dict.fromkeys(REGIONS, 0)
    for layer in activate_layers(situation):
        for region in layer_regions(layer, situation):
            acc[region] += 1
    return MLAM(tuple(acc[r] for r in REGIONS))


def distinct_mlams(situations: Iterable[Situation] | None = None) -> dict[MLAM, list[Situation]]:
    """Group situations by the attention map they produce."""
    groups: dict[MLAM, list[Situation]] = {}
    for s in situations if situations is not None else all_situations():
        groups.setdefault(build_mlam(s), []).append(s)
    return groups
