"""Restrict each active sensor module to the quadrants the attention map needs."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Sequence

from .attention import MLAM, REGIONS
from .configuration import Candidate, QuadrantLayout
from .errors import ConsistencyError


class ModuleState(str, Enum):
    STANDBY = "standby"
    ACTIVE = "active"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class ModuleActivation:
    module: str
    active_quadrants: int = 0

    def __post_init__(self):
        if not 0 <= self.active_quadrants <= 3:
            raise ValueError(f"active_quadrants out of range: {self.active_quadrants}")

    @property
    def state(self) -> ModuleState:
        return ModuleState.ACTIVE if self.active_quadrants else ModuleState.STANDBY

    @property
    def is_active(self) -> bool:
        return self.active_quadrants > 0


def active_quadrant_sets(layout: QuadrantLayout, mlam: MLAM):
    required = mlam.required_regions()
    return [q for q in layout.quadrants if q & required]


def apply_mlam(candidate: Candidate, mlam: MLAM, layouts: Sequence[QuadrantLayout]) -> list[ModuleActivation]:
    """Per-module active-quadrant counts, in layout order.

    A quadrant of a candidate member is active when it overlaps any region
    with a positive requirement, independent of what other members cover.
    Modules outside the candidate are reported in standby.
    """
    known = {layout.module for layout in layouts}
    unknown = candidate.members - known
    if unknown:
        raise ConsistencyError(f"no quadrant layout for candidate modules {sorted(unknown)}")
    seen = set()
    out = []
    for layout in layouts:
        if layout.module in candidate.members:
            quads = active_quadrant_sets(layout, mlam)
            for q in quads:
                seen |= q
            out.append(ModuleActivation(layout.module, len(quads)))
        else:
            out.append(ModuleActivation(layout.module, 0))
    missing = mlam.required_regions() - seen
    if missing:
        names = ", ".join(str(r) for r in sorted(missing, key=REGIONS.index))
        raise ConsistencyError(f"candidate {candidate.label()} leaves required regions uncovered: {names}")
    return out
