import math

import pytest

from qpack.geometry import PackingGraph, PackingScenario, build_graph
from qpack.instances import garnet_graph, garnet_scenario


@pytest.fixture(scope="session")
def garnet():
    return garnet_graph()


@pytest.fixture(scope="session")
def garnet_scn():
    return garnet_scenario()


@pytest.fixture
def two_node_graph():
    """Two overlapping unit circles: the standard hand-checked instance."""
    scn = PackingScenario(dimension=2, boundary_radius=3.0, radii=(1.0,), spacing=1.2)
    return PackingGraph(
        scenario=scn,
        nodes={0: ((0.0, 0.0), 0), 1: ((1.2, 0.0), 0)},
        edges=((0, 1, (0, 0)),),
    )


def random_unit_disk_graph(rng, num_nodes, box=4.0, radius=1.0):
    """Random homogeneous instance via explicit placements."""
    scn = PackingScenario(
        dimension=2, boundary_radius=box + radius + 1.0, radii=(radius,), spacing=1.0
    )
    nodes = {}
    placed = []
    nid = 0
    while len(nodes) < num_nodes:
        p = (round(float(rng.uniform(-box, box)), 6), round(float(rng.uniform(-box, box)), 6))
        if any(math.dist(p, q) < 1e-6 for q in placed):
            continue
        placed.append(p)
        nodes[nid] = (p, 0)
        nid += 1
    edges = []
    for i in range(num_nodes):
        for j in range(i + 1, num_nodes):
            if math.dist(nodes[i][0], nodes[j][0]) < 2.0 * radius - 1e-9:
                edges.append((i, j, (0, 0)))
    return PackingGraph(scenario=scn, nodes=nodes, edges=tuple(edges))


@pytest.fixture
def make_random_graph():
    return random_unit_disk_graph


@pytest.fixture(scope="session")
def garnet_setup():
    from qpack.instances import garnet_coupling_map, grid_placement

    g = garnet_graph()
    cmap = garnet_coupling_map()
    return g, cmap, grid_placement(g, cmap)


def bound_sweep_scenarios():
    """20 scenarios in the 4-neighborhood regime the resource bounds cover."""
    scenarios = [garnet_scenario()]
    for spacing in (1.45, 1.5, 1.6, 1.8):
        for rb in (3.0, 4.2, 5.0):
            scenarios.append(
                PackingScenario(
                    dimension=2, boundary_radius=rb, radii=(1.0,), spacing=spacing
                )
            )
    for spacing in (1.5, 1.6):
        for rb in (3.0, 4.0):
            scenarios.append(
                PackingScenario(
                    dimension=2, boundary_radius=rb, radii=(1.0, 0.6), spacing=spacing
                )
            )
    for spacing in (1.6, 1.8):
        scenarios.append(
            PackingScenario(
                dimension=3, boundary_radius=3.0, radii=(1.0,),
                spacing=spacing, cylinder_height=4.0,
            )
        )
    scenarios.append(
        PackingScenario(dimension=2, boundary_radius=4.0, radii=(0.5,), spacing=0.75)
    )
    return scenarios[:20]
