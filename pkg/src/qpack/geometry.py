"""Discretized packing instances.

A scenario fixes the boundary (circle of radius R_b in 2-D, finite cylinder
in 3-D), the admissible sphere radii, and the lattice spacing(s). Building a
graph places an axis-aligned lattice (centered on the boundary axis, with a
point at the origin) for each radius, keeps the sites where a sphere fits
inside the boundary, and connects every pair of placements whose spheres
would strictly overlap. Pre-placed spheres ("fixed placements") remove their
own lattice node and every node they overlap.

Conventions:
  * Boundary admissibility: |v| + r <= R_b within BOUNDARY_TOL.
  * Overlap is strict: distance < r_i + r_j - TANGENCY_TOL, so tangent
    placements (e.g. diagonal neighbors at spacing sqrt(2) with r = 1) are
    legal. Pass ``include_tangent=True`` to switch to the closed predicate.
  * Node ids are assigned lexicographically by coordinate, then by radius
    index, over the full candidate set before fixed-placement reduction;
    reduction leaves gaps but never renumbers.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping, Sequence

import numpy as np

from qpack.errors import FormatError, ValidationError

BOUNDARY_TOL = 1e-9
TANGENCY_TOL = 1e-9

SCENARIO_FORMAT = "qpack-scenario/1"
GRAPH_FORMAT = "qpack-graph/1"


@dataclass(frozen=True)
class PackingScenario:
    """Problem definition: boundary geometry, radii and lattice spacing.

    ``spacing`` is shared by all radii unless ``spacing_per_radius`` (parallel
    to ``radii``) is given. ``fixed_placements`` is a tuple of
    ``(coordinate, radius)`` pairs for pre-placed spheres.
    """

    dimension: int
    boundary_radius: float
    radii: tuple[float, ...]
    spacing: float | None = None
    spacing_per_radius: tuple[float, ...] | None = None
    cylinder_height: float | None = None
    fixed_placements: tuple[tuple[tuple[float, ...], float], ...] = ()

    def __post_init__(self):
        if self.dimension not in (2, 3):
            raise ValidationError(f"dimension must be 2 or 3, got {self.dimension}")
        if self.boundary_radius <= 0:
            raise ValidationError("boundary_radius must be positive")
        if not self.radii:
            raise ValidationError("at least one radius is required")
        if any(r <= 0 for r in self.radii):
            raise ValidationError("all radii must be strictly positive")
        if len(set(self.radii)) != len(self.radii):
            raise ValidationError("radii must be distinct")
        if (self.spacing is None) == (self.spacing_per_radius is None):
            raise ValidationError("exactly one of spacing / spacing_per_radius is required")
        if self.spacing is not None and self.spacing <= 0:
            raise ValidationError("spacing must be positive")
        if self.spacing_per_radius is not None:
            if len(self.spacing_per_radius) != len(self.radii):
                raise ValidationError("spacing_per_radius must parallel radii")
            if any(a <= 0 for a in self.spacing_per_radius):
                raise ValidationError("spacing must be positive")
        if self.dimension == 3:
            if self.cylinder_height is None or self.cylinder_height <= 0:
                raise ValidationError("d=3 requires a positive cylinder_height")
        elif self.cylinder_height is not None:
            raise ValidationError("cylinder_height only applies to d=3")
        for coord, r in self.fixed_placements:
            if len(coord) != self.dimension:
                raise ValidationError("fixed placement dimension mismatch")
            if not self.admits(coord, r):
                raise ValidationError(
                    f"fixed placement {coord} with radius {r} violates the boundary"
                )

    def spacing_for(self, radius: float) -> float:
        """Lattice spacing used for the given radius."""
        try:
            idx = self.radii.index(radius)
        except ValueError:
            raise ValidationError(f"radius {radius} is not part of the scenario") from None
        if self.spacing is not None:
            return self.spacing
        return self.spacing_per_radius[idx]

    @property
    def shared_lattice(self) -> bool:
        return self.spacing is not None

    def admits(self, coord: Sequence[float], radius: float) -> bool:
        """True if a sphere of ``radius`` centered at ``coord`` fits inside."""
        radial = math.hypot(*coord[:2])
        if radial + radius > self.boundary_radius + BOUNDARY_TOL:
            return False
        if self.dimension == 3:
            z = coord[2]
            if z < radius - BOUNDARY_TOL or z > self.cylinder_height - radius + BOUNDARY_TOL:
                return False
        return True

    def sphere_measure(self, radius: float) -> float:
        """Area (d=2) or volume (d=3) of one sphere."""
        if self.dimension == 2:
            return math.pi * radius**2
        return 4.0 / 3.0 * math.pi * radius**3

    def boundary_measure(self) -> float:
        """Area of the boundary circle or volume of the cylinder."""
        disc = math.pi * self.boundary_radius**2
        if self.dimension == 2:
            return disc
        return disc * self.cylinder_height

    def with_spacing(self, spacing: float) -> "PackingScenario":
        return replace(self, spacing=spacing, spacing_per_radius=None)


@dataclass(frozen=True)
class PackingGraph:
    """Discretized instance: placements as nodes, strict overlaps as edges.

    ``nodes`` maps node id -> (coordinate, radius_index); ``edges`` are
    deduplicated pairs (i, j) with i < j tagged by their sorted radius-index
    pair. Node ids follow the candidate ordering documented in the module
    docstring.
    """

    scenario: PackingScenario
    nodes: dict[int, tuple[tuple[float, ...], int]]
    edges: tuple[tuple[int, int, tuple[int, int]], ...]
    _adj: dict[int, frozenset[int]] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        adj: dict[int, set[int]] = {nid: set() for nid in self.nodes}
        for i, j, _kind in self.edges:
            if i == j:
                raise ValidationError("self-edges are not allowed")
            if i not in self.nodes or j not in self.nodes:
                raise ValidationError(f"edge ({i},{j}) references unknown node")
            adj[i].add(j)
            adj[j].add(i)
        object.__setattr__(self, "_adj", {k: frozenset(v) for k, v in adj.items()})

    @property
    def node_ids(self) -> tuple[int, ...]:
        return tuple(sorted(self.nodes))

    @property
    def num_nodes(self) -> int:
        return len(self.nodes)

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    def coordinate(self, node_id: int) -> tuple[float, ...]:
        return self.nodes[node_id][0]

    def radius_of(self, node_id: int) -> float:
        return self.scenario.radii[self.nodes[node_id][1]]

    def neighbors(self, node_id: int) -> frozenset[int]:
        return self._adj[node_id]

    def max_degree(self) -> int:
        return max((len(v) for v in self._adj.values()), default=0)

    def is_homogeneous(self) -> bool:
        return len(self.scenario.radii) == 1

    def is_independent(self, node_ids: Iterable[int]) -> bool:
        chosen = set(node_ids)
        return all(self._adj[n].isdisjoint(chosen) for n in chosen)


def build_lattice(scenario: PackingScenario, radius: float) -> list[tuple[float, ...]]:
    """All admissible lattice points for one radius, lexicographically sorted.

    The lattice is square/cubic with the scenario's spacing for that radius,
    centered on the boundary axis with a point at the origin. A point is kept
    iff the sphere fits: radial |v| + r <= R_b, and for d=3 the full sphere
    lies within the cylinder height. An empty result is valid.
    """
    spacing = scenario.spacing_for(radius)
    if spacing <= 0:
        raise ValidationError("spacing must be positive")
    reach = scenario.boundary_radius - radius
    if reach < -BOUNDARY_TOL:
        return []
    k = int(max(reach, 0.0) / spacing + BOUNDARY_TOL)
    axes = [
        [i * spacing for i in range(-k, k + 1)],
        [i * spacing for i in range(-k, k + 1)],
    ]
    if scenario.dimension == 3:
        kz = int(scenario.cylinder_height / spacing + BOUNDARY_TOL)
        axes.append([i * spacing for i in range(0, kz + 1)])
    points = []
    if scenario.dimension == 2:
        for x in axes[0]:
            for y in axes[1]:
                if scenario.admits((x, y), radius):
                    points.append((x, y))
    else:
        for x in axes[0]:
            for y in axes[1]:
                for z in axes[2]:
                    if scenario.admits((x, y, z), radius):
                        points.append((x, y, z))
    points.sort()
    return points


def overlap_edge(
    p: Sequence[float],
    r_i: float,
    q: Sequence[float],
    r_j: float,
    include_tangent: bool = False,
) -> bool:
    """True iff spheres (p, r_i) and (q, r_j) strictly overlap.

    Tangency (distance == r_i + r_j within TANGENCY_TOL) is not an overlap
    unless ``include_tangent`` is set. Identical coordinates are rejected;
    same-site conflicts are handled by the graph builder directly.
    """
    if tuple(p) == tuple(q):
        raise ValidationError("overlap_edge requires distinct coordinates")
    dist = math.dist(p, q)
    if include_tangent:
        return dist <= r_i + r_j + TANGENCY_TOL
    return dist < r_i + r_j - TANGENCY_TOL


def build_graph(scenario: PackingScenario, include_tangent: bool = False) -> PackingGraph:
    """Construct the full packing graph for a scenario.

    Nodes are (lattice point, radius index) placements over all radii; edges
    connect every overlapping pair, including pairs at the same lattice point
    with different radii (those always conflict). Fixed placements remove
    their own node (same coordinate and radius) and every node they overlap.
    """
    candidates: list[tuple[tuple[float, ...], int]] = []
    for ri, radius in enumerate(scenario.radii):
        for coord in build_lattice(scenario, radius):
            candidates.append((coord, ri))
    candidates.sort(key=lambda c: (c[0], c[1]))

    alive = list(range(len(candidates)))
    for fcoord, fradius in scenario.fixed_placements:
        fcoord = tuple(float(x) for x in fcoord)
        kept = []
        for nid in alive:
            coord, ri = candidates[nid]
            radius = scenario.radii[ri]
            same_site = all(abs(a - b) <= BOUNDARY_TOL for a, b in zip(coord, fcoord))
            if same_site:
                continue  # own node, or a coincident placement that always conflicts
            if overlap_edge(coord, radius, fcoord, fradius, include_tangent):
                continue
            kept.append(nid)
        alive = kept

    nodes = {nid: candidates[nid] for nid in alive}
    edges: list[tuple[int, int, tuple[int, int]]] = []
    ids = sorted(nodes)
    coords = np.array([nodes[nid][0] for nid in ids], dtype=float)
    radii = np.array([scenario.radii[nodes[nid][1]] for nid in ids], dtype=float)
    if len(ids) > 1:
        diff = coords[:, None, :] - coords[None, :, :]
        dist = np.sqrt((diff**2).sum(axis=2))
        limit = radii[:, None] + radii[None, :]
        if include_tangent:
            hit = dist <= limit + TANGENCY_TOL
        else:
            hit = dist < limit - TANGENCY_TOL
        same_site = dist <= BOUNDARY_TOL
        hit |= same_site  # coincident placements of different radii
        for a in range(len(ids)):
            for b in range(a + 1, len(ids)):
                if hit[a, b]:
                    i, j = ids[a], ids[b]
                    kind = tuple(sorted((nodes[i][1], nodes[j][1])))
                    edges.append((i, j, kind))
    return PackingGraph(scenario=scenario, nodes=nodes, edges=tuple(edges))


def extract_subgraph(graph: PackingGraph, node_ids: Iterable[int]) -> PackingGraph:
    """Induced subgraph on ``node_ids``; node ids are preserved."""
    wanted = set(node_ids)
    unknown = wanted - set(graph.nodes)
    if unknown:
        raise ValidationError(f"unknown node ids: {sorted(unknown)}")
    nodes = {nid: graph.nodes[nid] for nid in wanted}
    edges = tuple(e for e in graph.edges if e[0] in wanted and e[1] in wanted)
    return PackingGraph(scenario=graph.scenario, nodes=nodes, edges=edges)


def packing_density(graph: PackingGraph, selected: Iterable[int]) -> float:
    """Fraction of the boundary measure filled by the selection.

    Fixed placements of the scenario count toward the packing: the graph was
    already reduced around them, so they are part of every admissible packing.
    Rejects selections containing an edge (overlapping spheres).
    """
    chosen = sorted(set(selected))
    unknown = set(chosen) - set(graph.nodes)
    if unknown:
        raise ValidationError(f"unknown node ids: {sorted(unknown)}")
    if not graph.is_independent(chosen):
        raise ValidationError("selection is not independent: spheres overlap")
    scn = graph.scenario
    total = sum(scn.sphere_measure(graph.radius_of(nid)) for nid in chosen)
    total += sum(scn.sphere_measure(r) for _, r in scn.fixed_placements)
    return total / scn.boundary_measure()


# --- serialization ---------------------------------------------------------


def scenario_to_dict(scenario: PackingScenario) -> dict:
    out = {
        "format": SCENARIO_FORMAT,
        "dimension": scenario.dimension,
        "boundary_radius": scenario.boundary_radius,
        "radii": list(scenario.radii),
    }
    if scenario.spacing is not None:
        out["spacing"] = scenario.spacing
    else:
        out["spacing_per_radius"] = {
            repr(r): a for r, a in zip(scenario.radii, scenario.spacing_per_radius)
        }
    if scenario.cylinder_height is not None:
        out["cylinder_height"] = scenario.cylinder_height
    if scenario.fixed_placements:
        out["fixed_placements"] = [
            {"coord": list(coord), "radius": r} for coord, r in scenario.fixed_placements
        ]
    return out


def scenario_from_dict(data: Mapping) -> PackingScenario:
    if data.get("format") != SCENARIO_FORMAT:
        raise FormatError(f"expected format {SCENARIO_FORMAT!r}, got {data.get('format')!r}")
    try:
        radii = tuple(float(r) for r in data["radii"])
        spacing = data.get("spacing")
        per = data.get("spacing_per_radius")
        if per is not None:
            per = tuple(float(per[repr(r)]) for r in radii)
        fixed = tuple(
            (tuple(float(x) for x in fp["coord"]), float(fp["radius"]))
            for fp in data.get("fixed_placements", [])
        )
        return PackingScenario(
            dimension=int(data["dimension"]),
            boundary_radius=float(data["boundary_radius"]),
            radii=radii,
            spacing=None if spacing is None else float(spacing),
            spacing_per_radius=per,
            cylinder_height=(
                float(data["cylinder_height"]) if "cylinder_height" in data else None
            ),
            fixed_placements=fixed,
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"malformed scenario file: {exc}") from exc


def graph_to_dict(graph: PackingGraph) -> dict:
    return {
        "format": GRAPH_FORMAT,
        "scenario": scenario_to_dict(graph.scenario),
        "nodes": [
            {"id": nid, "coord": list(graph.nodes[nid][0]), "radius_index": graph.nodes[nid][1]}
            for nid in graph.node_ids
        ],
        "edges": [[i, j, f"{k[0]}-{k[1]}"] for i, j, k in graph.edges],
    }


def graph_from_dict(data: Mapping) -> PackingGraph:
    if data.get("format") != GRAPH_FORMAT:
        raise FormatError(f"expected format {GRAPH_FORMAT!r}, got {data.get('format')!r}")
    try:
        scenario = scenario_from_dict(data["scenario"])
        nodes = {
            int(n["id"]): (tuple(float(x) for x in n["coord"]), int(n["radius_index"]))
            for n in data["nodes"]
        }
        edges = []
        for i, j, kind in data["edges"]:
            a, b = kind.split("-")
            edges.append((int(i), int(j), (int(a), int(b))))
        return PackingGraph(scenario=scenario, nodes=nodes, edges=tuple(edges))
    except (KeyError, TypeError, ValueError, AttributeError) as exc:
        raise FormatError(f"malformed graph file: {exc}") from exc


def write_json(path, payload: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_json(path) -> dict:
    with open(path, encoding="utf-8") as fh:
        try:
            return json.load(fh)
        except json.JSONDecodeError as exc:
            raise FormatError(f"invalid JSON in {path}: {exc}") from exc
