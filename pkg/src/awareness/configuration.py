"""Sensor-module descriptors and minimum-cost configuration search.

Candidates are organised as a forest of configuration trees: each root is a
subset of source modules and its descendants add non-source modules whose
dependencies are met. Trees whose best-case coverage misses a required region
are discarded before the exhaustive cost search.
"""

from __future__ import annotations

import itertools
import json
import math
import warnings
from dataclasses import dataclass, field
from enum import Enum
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence

from .attention import MLAM, REGIONS, Region
from .errors import ConfigurationError, InfeasibleError

COST_TOLERANCE = 1e-9


class RelationKind(str, Enum):
    DEPENDENCY = "dependency"
    LINKABILITY = "linkability"


@dataclass(frozen=True)
class Relation:
    kind: RelationKind
    subject: str
    object: str

    def __post_init__(self):
        try:
            object.__setattr__(self, "kind", RelationKind(self.kind))
        except ValueError:
            raise ConfigurationError(f"unknown relation kind {self.kind!r}") from None


@dataclass(frozen=True)
class ModuleDescriptor:
    id: str
    cost: float = 1.0
    performance: float = math.inf
    coverage: frozenset[Region] = frozenset()
    is_source: bool = True
    relations: tuple[Relation, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "coverage", frozenset(Region(r) for r in self.coverage))
        object.__setattr__(self, "relations", tuple(self.relations))
        if self.cost < 0 or math.isnan(self.cost):
            raise ConfigurationError(f"module {self.id}: cost must be non-negative")
        if self.performance < 0 or math.isnan(self.performance):
            raise ConfigurationError(f"module {self.id}: performance must be non-negative")
        if self.is_source and not self.coverage:
            raise ConfigurationError(f"source module {self.id} has empty coverage")

    @property
    def dependencies(self) -> frozenset[str]:
        return frozenset(
            r.object for r in self.relations
            if r.kind is RelationKind.DEPENDENCY and r.subject == self.id
        )


@dataclass(frozen=True)
class Candidate:
    """A set of module ids that are configured active together."""

    members: frozenset[str] = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "members", frozenset(self.members))

    def __contains__(self, module_id):
        return module_id in self.members

    def __iter__(self):
        return iter(sorted(self.members))

    def __len__(self):
        return len(self.members)

    def label(self, order: Sequence[str] | None = None) -> str:
        ids = [m for m in order if m in self.members] if order else sorted(self.members)
        return "+".join(ids)


EMPTY = Candidate()


@dataclass
class ConfigurationTree:
    candidate: Candidate
    children: list["ConfigurationTree"] = field(default_factory=list)

    def nodes(self):
        """Depth-first iteration over this tree's nodes, root first."""
        yield self.candidate
        for child in self.children:
            yield from child.nodes()


@dataclass
class ConfigurationForest:
    trees: list[ConfigurationTree]
    modules: tuple[ModuleDescriptor, ...] = ()

    @property
    def roots(self) -> list[Candidate]:
        return [t.candidate for t in self.trees]

    def candidates(self) -> list[Candidate]:
        return [c for t in self.trees for c in t.nodes()]

    def n_children(self) -> int:
        return sum(1 for t in self.trees for _ in t.nodes()) - len(self.trees)


def _index(modules: Sequence[ModuleDescriptor]) -> dict[str, ModuleDescriptor]:
    by_id: dict[str, ModuleDescriptor] = {}
    for m in modules:
        if m.id in by_id:
            raise ConfigurationError(f"duplicate module id {m.id!r}")
        by_id[m.id] = m
    return by_id


def check_modules(modules: Sequence[ModuleDescriptor]) -> dict[str, ModuleDescriptor]:
    """Validate a descriptor set and return it keyed by id."""
    by_id = _index(modules)
    warned = False
    for m in modules:
        for rel in m.relations:
            for ref in (rel.subject, rel.object):
                if ref not in by_id:
                    raise ConfigurationError(f"module {m.id}: relation references unknown module {ref!r}")
            if rel.kind is RelationKind.LINKABILITY and not warned:
                warnings.warn("linkability relations are ignored by the configuration search", stacklevel=3)
                warned = True
        if m.is_source and m.dependencies:
            raise ConfigurationError(f"source module {m.id} cannot have dependencies")
        if not m.is_source and not m.dependencies:
            raise ConfigurationError(f"non-source module {m.id} needs at least one dependency")
        if m.id in m.dependencies:
            raise ConfigurationError(f"module {m.id} depends on itself")
    _check_acyclic(by_id)
    return by_id


def _check_acyclic(by_id):
    state: dict[str, int] = {}

    def visit(mid, path):
        if state.get(mid) == 2:
            return
        if state.get(mid) == 1:
            raise ConfigurationError("dependency cycle: " + " -> ".join(path + [mid]))
        state[mid] = 1
        for dep in sorted(by_id[mid].dependencies):
            visit(dep, path + [mid])
        state[mid] = 2

    for mid in by_id:
        visit(mid, [])


def is_valid(candidate: Candidate, by_id: dict[str, ModuleDescriptor]) -> bool:
    """True if every member's dependencies are other members of the candidate."""
    return all(by_id[m].dependencies <= candidate.members for m in candidate.members)


def build_forest(modules: Sequence[ModuleDescriptor]) -> ConfigurationForest:
    by_id = check_modules(modules)
    sources = [m.id for m in modules if m.is_source]
    extras = [m.id for m in modules if not m.is_source]

    def grow(node: ConfigurationTree, seen: set):
        for mid in extras:
            if mid in node.candidate.members or not by_id[mid].dependencies <= node.candidate.members:
                continue
            child = Candidate(node.candidate.members | {mid})
            if child.members in seen:
                continue
            seen.add(child.members)
            node.children.append(ConfigurationTree(child))
        for child in node.children:
            grow(child, seen)

    trees = []
    for k in range(len(sources) + 1):
        for combo in itertools.combinations(sources, k):
            tree = ConfigurationTree(Candidate(frozenset(combo)))
            grow(tree, {tree.candidate.members})
            trees.append(tree)
    return ConfigurationForest(trees, tuple(modules))


def coverage_of(candidate: Candidate, by_id) -> frozenset[Region]:
    out: set[Region] = set()
    for m in candidate.members:
        out |= by_id[m].coverage
    return frozenset(out)


def prune_forest(forest: ConfigurationForest, mlam: MLAM) -> ConfigurationForest:
    """Drop every tree whose union coverage over all its nodes misses a required region."""
    by_id = _index(forest.modules)
    required = mlam.required_regions()
    kept = []
    for tree in forest.trees:
        reach: set[Region] = set()
        for node in tree.nodes():
            reach |= coverage_of(node, by_id)
        if required <= reach:
            kept.append(tree)
    return ConfigurationForest(kept, forest.modules)


def satisfies(candidate: Candidate, mlam: MLAM, by_id) -> bool:
    """Per-region check: summed performance of covering members meets the requirement."""
    for region, req in mlam.items():
        if req <= 0:
            continue
        total = sum(by_id[m].performance for m in candidate.members if region in by_id[m].coverage)
        if total < req:
            return False
    return True


def total_cost(candidate: Candidate, by_id) -> float:
    return sum(by_id[m].cost for m in candidate.members)


def tie_break_key(candidate: Candidate, current: Candidate, order: Sequence[str]):
    """Ordering among equal-cost candidates: overlap with current, size, preference order."""
    rank = {mid: i for i, mid in enumerate(order)}
    return (
        -len(candidate.members & current.members),
        len(candidate.members),
        tuple(sorted(rank[m] for m in candidate.members)),
    )


def select(candidates: Iterable[Candidate], mlam: MLAM, modules: Sequence[ModuleDescriptor],
           current: Candidate = EMPTY) -> Candidate | None:
    """Pick the cheapest satisfying candidate, or None if none satisfies."""
    by_id = _index(modules)
    order = [m.id for m in modules]
    feasible = [(total_cost(c, by_id), c) for c in candidates if satisfies(c, mlam, by_id)]
    if not feasible:
        return None
    best = min(cost for cost, _ in feasible)
    tied = [c for cost, c in feasible if cost <= best + COST_TOLERANCE]
    return min(tied, key=lambda c: tie_break_key(c, current, order))


def unsatisfiable_regions(mlam: MLAM, modules: Sequence[ModuleDescriptor]) -> list[Region]:
    """Regions whose requirement exceeds what all modules together provide."""
    out = []
    for region, req in mlam.items():
        if req > 0 and sum(m.performance for m in modules if region in m.coverage) < req:
            out.append(region)
    return out


def optimize(mlam: MLAM, modules: Sequence[ModuleDescriptor], current: Candidate = EMPTY,
             forest: ConfigurationForest | None = None) -> Candidate:
    """Minimum-cost valid candidate meeting ``mlam``.

    ``current`` is the previously active candidate; among equally cheap
    solutions the one sharing most modules with it wins. A prebuilt
    ``forest`` may be passed to avoid rebuilding it per call.
    """
    if forest is None:
        forest = build_forest(modules)
    pruned = prune_forest(forest, mlam)
    best = select(pruned.candidates(), mlam, modules, current)
    if best is None:
        missing = unsatisfiable_regions(mlam, modules)
        if not missing:
            # every region individually satisfiable but not by one valid candidate
            missing = sorted(mlam.required_regions(), key=REGIONS.index)
        raise InfeasibleError(missing)
    return best


# quadrant layouts are stored alongside the descriptors in the fixture file
@dataclass(frozen=True)
class QuadrantLayout:
    module: str
    middle: frozenset[Region]
    outer_a: frozenset[Region]
    outer_b: frozenset[Region]

    def __post_init__(self):
        for name in ("middle", "outer_a", "outer_b"):
            object.__setattr__(self, name, frozenset(Region(r) for r in getattr(self, name)))

    @property
    def quadrants(self) -> tuple[frozenset[Region], ...]:
        return (self.middle, self.outer_a, self.outer_b)

    def regions(self) -> frozenset[Region]:
        return self.middle | self.outer_a | self.outer_b


@dataclass(frozen=True)
class Fixture:
    modules: tuple[ModuleDescriptor, ...]
    layouts: tuple[QuadrantLayout, ...]

    @property
    def module_ids(self) -> list[str]:
        return [m.id for m in self.modules]


def _parse_performance(value):
    if isinstance(value, str):
        if value.strip().lower() in ("inf", "infinity"):
            return math.inf
        raise ConfigurationError(f"bad performance value {value!r}")
    return float(value)


def parse_fixture(data: dict) -> Fixture:
    try:
        raw_modules = data["modules"]
    except (KeyError, TypeError):
        raise ConfigurationError("fixture needs a 'modules' list") from None
    modules, layouts = [], []
    for raw in raw_modules:
        try:
            mid = str(raw["id"])
            relations = tuple(
                Relation(r["kind"], r.get("subject", mid), r["object"]) for r in raw.get("relations", [])
            )
            module = ModuleDescriptor(
                id=mid,
                cost=float(raw.get("cost", 1.0)),
                performance=_parse_performance(raw.get("performance", "inf")),
                coverage=frozenset(raw["coverage"]),
                is_source=bool(raw.get("is_source", True)),
                relations=relations,
            )
            quads = raw.get("quadrants")
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, ConfigurationError):
                raise
            raise ConfigurationError(f"bad module record {raw!r}: {exc}") from None
        modules.append(module)
        if quads is not None:
            if len(quads) != 3:
                raise ConfigurationError(f"module {mid}: expected 3 quadrants, got {len(quads)}")
            try:
                layout = QuadrantLayout(mid, *quads)
            except ValueError as exc:
                raise ConfigurationError(f"module {mid}: {exc}") from None
            if layout.regions() != module.coverage:
                raise ConfigurationError(f"module {mid}: quadrant regions do not match coverage")
            layouts.append(layout)
    check_modules(modules)
    return Fixture(tuple(modules), tuple(layouts))


def load_fixture(path: str | Path | None = None) -> Fixture:
    """Load module descriptors and quadrant layouts; the bundled vehicle if no path."""
    if path is None:
        text = resources.files("awareness").joinpath("data/unicaragil.json").read_text()
    else:
        text = Path(path).read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"fixture is not valid JSON: {exc}") from None
    return parse_fixture(data)
