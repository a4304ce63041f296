"""Bundled reference instances.

The 20-qubit grid device and the matching packing scenario used throughout
the tests and the experiment harness: unit circles on a sqrt(2)-spaced grid
inside a boundary circle of radius 4.2, with one circle pre-placed at the
grid position that the device is missing. The candidate lattice is the 5x5
grid minus its four corners (21 sites); the pre-placed circle removes itself
and its two lattice neighbors, leaving 18 problem nodes.
"""

from __future__ import annotations

import json
import math
from importlib import resources

import numpy as np

from qpack.compiler import CouplingMap, coupling_map_from_dict
from qpack.geometry import PackingGraph, PackingScenario, build_graph
from qpack.noise import CalibrationData, QubitCalibration, calibration_from_dict

GRID_SPACING = math.sqrt(2.0)
BOUNDARY_RADIUS = 4.2
CIRCLE_RADIUS = 1.0

# Grid coordinate (units of spacing, centered) of the device's absent site;
# the pre-placed circle sits there.
MISSING_SITE = (2, -1)


def garnet_scenario() -> PackingScenario:
    """Packing scenario matching the 20-qubit grid device experiment."""
    fixed = ((MISSING_SITE[0] * GRID_SPACING, MISSING_SITE[1] * GRID_SPACING), CIRCLE_RADIUS)
    return PackingScenario(
        dimension=2,
        boundary_radius=BOUNDARY_RADIUS,
        radii=(CIRCLE_RADIUS,),
        spacing=GRID_SPACING,
        fixed_placements=(fixed,),
    )


def garnet_candidate_scenario() -> PackingScenario:
    """Same lattice without the pre-placed circle (21 candidate nodes)."""
    return PackingScenario(
        dimension=2,
        boundary_radius=BOUNDARY_RADIUS,
        radii=(CIRCLE_RADIUS,),
        spacing=GRID_SPACING,
    )


def garnet_graph() -> PackingGraph:
    """The 18-node experiment graph."""
    return build_graph(garnet_scenario())


def _grid_sites() -> list[tuple[int, int]]:
    sites = [
        (i, j)
        for i in range(-2, 3)
        for j in range(-2, 3)
        if abs(i) + abs(j) < 4  # drop the four corners
    ]
    sites.remove(MISSING_SITE)
    return sorted(sites)


def garnet_coupling_map() -> CouplingMap:
    """20-qubit grid coupling map (5x5 minus corners minus one edge site)."""
    sites = _grid_sites()
    index = {s: i for i, s in enumerate(sites)}
    edges = []
    for (i, j), qid in index.items():
        for di, dj in ((1, 0), (0, 1)):
            other = (i + di, j + dj)
            if other in index:
                edges.append((qid, index[other]))
    coords = {qid: (float(i), float(j)) for (i, j), qid in index.items()}
    return CouplingMap(
        qubits=tuple(range(len(sites))),
        edges=tuple(sorted(tuple(sorted(e)) for e in edges)),
        coords=coords,
    )


def grid_placement(graph: PackingGraph, cmap: CouplingMap) -> dict[int, int]:
    """Map op qubits (sorted node ids) onto device qubits by grid coordinate.

    Works for graphs built on the same lattice the device map was drawn from:
    node coordinates divided by the spacing must land on map coordinates.
    """
    if cmap.coords is None:
        raise ValueError("coupling map has no coordinates to match against")
    spacing = graph.scenario.spacing
    by_coord = {tuple(c): q for q, c in cmap.coords.items()}
    placement = {}
    for op_q, nid in enumerate(graph.node_ids):
        coord = graph.nodes[nid][0]
        key = tuple(round(x / spacing) for x in coord)
        key = tuple(float(k) for k in key)
        if key not in by_coord:
            raise ValueError(f"node {nid} at {coord} has no matching device qubit")
        placement[op_q] = by_coord[key]
    return placement


def synthetic_calibration(cmap: CouplingMap | None = None, seed: int = 20) -> CalibrationData:
    """Synthetic calibration with representative magnitudes (not measured).

    T1 30-50 us, T2 below the 2*T1 ceiling, single-qubit fidelities around
    99.85%, CZ around 99.1%, readout 97-98.5% - the scales typical of
    current superconducting grid devices. Deterministic from the seed; the
    bundled ``garnet-like.json`` is exactly ``synthetic_calibration()``.
    """
    cmap = cmap or garnet_coupling_map()
    rng = np.random.default_rng(seed)
    qubits = {}
    for q in cmap.qubits:
        t1 = float(rng.uniform(30.0, 50.0))
        t2 = float(min(rng.uniform(0.6, 1.5) * t1, 1.9 * t1))
        qubits[q] = QubitCalibration(
            t1_us=round(t1, 2),
            t2_us=round(t2, 2),
            f1q=round(float(rng.uniform(0.9980, 0.9992)), 5),
            f_readout=round(float(rng.uniform(0.968, 0.985)), 4),
        )
    couplers = {
        (min(i, j), max(i, j)): round(float(rng.uniform(0.988, 0.994)), 4)
        for i, j in sorted(cmap.edge_set())
    }
    return CalibrationData(qubits=qubits, couplers=couplers, gate_1q_ns=24.0, cz_ns=48.0)


def _data_text(name: str) -> str:
    return resources.files("qpack").joinpath("data", name).read_text(encoding="utf-8")


def bundled_coupling_map() -> CouplingMap:
    """The shipped ``garnet.json`` device map."""
    return coupling_map_from_dict(json.loads(_data_text("garnet.json")))


def bundled_calibration() -> CalibrationData:
    """The shipped synthetic ``garnet-like.json`` calibration."""
    return calibration_from_dict(json.loads(_data_text("garnet-like.json")))


def garnet_subgraph_ids(graph: PackingGraph, size: int = 8) -> tuple[int, ...]:
    """Canonical induced sub-instances of the experiment graph.

    Returns the ``size`` lexicographically smallest nodes of the bottom-left
    grid block; 8 is the parameter-concentration subgraph, 10 the reduced
    instance used for the depth sweeps. Both are connected grid patches that
    look locally like the full instance.
    """
    spacing = graph.scenario.spacing
    block = []
    for nid in graph.node_ids:
        x, y = graph.nodes[nid][0]
        i, j = round(x / spacing), round(y / spacing)
        if -2 <= i <= 1 and -2 <= j <= 0:
            block.append(((j, i), nid))
    block.sort()
    ids = tuple(nid for _, nid in block[:size])
    if len(ids) != size:
        raise ValueError(f"requested {size} nodes, block has {len(block)}")
    return ids
