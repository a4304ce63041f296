"""Classical baselines: exact MIS search and simulated annealing.

``exact_mis`` runs a bitset branch-and-bound (max-degree-first branching);
``anneal_qubo`` is a seeded geometric-schedule Metropolis annealer over any
expanded diagonal operator. Both report the *packing* size, i.e. witnesses
are graph nodes but sizes include the scenario's pre-placed spheres, which
every admissible packing contains by construction.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, replace
from typing import Iterable, Sequence

import numpy as np

from qpack.errors import SolverTimeout, ValidationError
from qpack.geometry import (
    TANGENCY_TOL,
    PackingGraph,
    PackingScenario,
    build_graph,
    packing_density,
)
from qpack.hamiltonian import IsingOperator, index_to_bitstring


@dataclass(frozen=True)
class MisResult:
    """Exact solution: ``size`` counts witness nodes plus fixed placements."""

    size: int
    witness: tuple[int, ...]
    all_optima: tuple[tuple[int, ...], ...] | None
    method: str
    seconds: float


def exact_mis(
    graph: PackingGraph,
    enumerate_all: bool = False,
    time_budget: float | None = None,
) -> MisResult:
    """Maximum independent set of a homogeneous graph, exactly.

    Deterministic: among maximum sets the lexicographically smallest witness
    (by sorted node ids) is returned. With ``enumerate_all`` every maximum
    set is collected. A ``time_budget`` in seconds raises SolverTimeout
    carrying the best set seen so far.
    """
    if not graph.is_homogeneous():
        raise ValidationError("exact_mis requires a single-radius graph")
    ids = graph.node_ids
    n = len(ids)
    pos = {nid: k for k, nid in enumerate(ids)}
    adj = [0] * n
    for i, j, _kind in graph.edges:
        adj[pos[i]] |= 1 << pos[j]
        adj[pos[j]] |= 1 << pos[i]

    start = time.perf_counter()
    deadline = None if time_budget is None else start + time_budget
    best_size = -1
    best_witness: tuple[int, ...] = ()
    optima: set[tuple[int, ...]] = set()
    checks = 0

    def to_ids(mask: int) -> tuple[int, ...]:
        return tuple(ids[k] for k in range(n) if (mask >> k) & 1)

    def consider(mask: int, size: int) -> None:
        nonlocal best_size, best_witness
        witness = to_ids(mask)
        if size > best_size:
            best_size = size
            best_witness = witness
            if enumerate_all:
                optima.clear()
                optima.add(witness)
        elif size == best_size:
            if enumerate_all:
                optima.add(witness)
            if witness < best_witness:
                best_witness = witness

    def expand(current: int, size: int, candidates: int) -> None:
        nonlocal checks
        checks += 1
        if deadline is not None and checks % 256 == 0 and time.perf_counter() > deadline:
            raise SolverTimeout(
                f"exact_mis exceeded {time_budget}s",
                best_size=best_size + len(graph.scenario.fixed_placements),
                best_witness=best_witness,
            )
        if candidates == 0:
            consider(current, size)
            return
        remaining = candidates.bit_count()
        if enumerate_all:
            if size + remaining < best_size:
                return
        elif size + remaining <= best_size:
            return
        # branch on the candidate with the largest degree inside the pool
        v, v_deg = -1, -1
        m = candidates
        while m:
            k = (m & -m).bit_length() - 1
            deg = (adj[k] & candidates).bit_count()
            if deg > v_deg:
                v, v_deg = k, deg
            m &= m - 1
        bit = 1 << v
        expand(current | bit, size + 1, candidates & ~(adj[v] | bit))
        expand(current, size, candidates & ~bit)

    if n == 0:
        best_size, best_witness = 0, ()
        if enumerate_all:
            optima.add(())
    else:
        expand(0, 0, (1 << n) - 1)

    _check_witness_geometry(graph, best_witness)
    fixed = len(graph.scenario.fixed_placements)
    return MisResult(
        size=best_size + fixed,
        witness=best_witness,
        all_optima=tuple(sorted(optima)) if enumerate_all else None,
        method="branch-and-bound",
        seconds=time.perf_counter() - start,
    )


def _check_witness_geometry(graph: PackingGraph, witness: Sequence[int]) -> None:
    """Re-check a witness against raw coordinates, not just the edge list."""
    spheres = [(graph.nodes[nid][0], graph.radius_of(nid)) for nid in witness]
    spheres += [(c, r) for c, r in graph.scenario.fixed_placements]
    for a in range(len(spheres)):
        for b in range(a + 1, len(spheres)):
            (pa, ra), (pb, rb) = spheres[a], spheres[b]
            if math.dist(pa, pb) < ra + rb - TANGENCY_TOL:
                raise ValidationError("solver produced overlapping spheres")


@dataclass(frozen=True)
class AnnealSchedule:
    """Geometric temperature schedule; None bounds derive from coefficients."""

    sweeps: int = 1000
    t_start: float | None = None
    t_end: float | None = None
    restarts: int = 1


@dataclass(frozen=True)
class AnnealResult:
    bitstring: str
    energy: float


def anneal_qubo(
    op: IsingOperator,
    schedule: AnnealSchedule | None = None,
    seed: int = 0,
) -> AnnealResult:
    """Simulated annealing over an expanded operator (no projector terms).

    Best-seen state across sweeps and restarts; reproducible from the seed.
    The default temperature range spans 2*max|coeff| down to
    0.01*min nonzero |coeff| so both objective and penalty scales anneal.
    """
    if op.has_projectors:
        raise ValidationError("anneal_qubo needs projectors pre-expanded")
    schedule = schedule or AnnealSchedule()
    n = op.num_qubits
    coeffs = [abs(w) for w in op.linear.values()]
    coeffs += [abs(w) for w in op.quadratic.values()]
    coeffs += [abs(w) for w in op.higher.values()]
    if coeffs:
        t0 = schedule.t_start if schedule.t_start is not None else 2.0 * max(coeffs)
        t1 = schedule.t_end if schedule.t_end is not None else 0.01 * min(coeffs)
    else:
        t0, t1 = 1.0, 0.01
    t1 = min(t1, t0)

    lin = np.zeros(n)
    for q, w in op.linear.items():
        lin[q] = w
    pair_terms: list[list[tuple[int, float]]] = [[] for _ in range(n)]
    for (i, j), w in op.quadratic.items():
        pair_terms[i].append((j, w))
        pair_terms[j].append((i, w))
    high_terms: list[list[tuple[tuple[int, ...], float]]] = [[] for _ in range(n)]
    for qs, w in op.higher.items():
        for q in qs:
            high_terms[q].append((qs, w))

    temps = np.geomspace(t0, max(t1, 1e-12), schedule.sweeps)
    best_energy = math.inf
    best_state: np.ndarray | None = None
    seeds = np.random.SeedSequence(seed).spawn(schedule.restarts)
    for ss in seeds:
        rng = np.random.default_rng(ss)
        z = rng.choice(np.array([1.0, -1.0]), size=n)
        energy = _ising_energy(op, z)
        if energy < best_energy:
            best_energy, best_state = energy, z.copy()
        for t in temps:
            order = rng.permutation(n)
            for q in order:
                delta = -2.0 * z[q] * (lin[q] + sum(w * z[j] for j, w in pair_terms[q]))
                for qs, w in high_terms[q]:
                    prod = w
                    for qq in qs:
                        prod *= z[qq]
                    delta += -2.0 * prod
                if delta <= 0.0 or rng.random() < math.exp(-delta / t):
                    z[q] = -z[q]
                    energy += delta
                    if energy < best_energy - 1e-12:
                        best_energy, best_state = energy, z.copy()

    bits = "".join("1" if v < 0 else "0" for v in best_state)
    return AnnealResult(bitstring=bits, energy=best_energy)


def _ising_energy(op: IsingOperator, z: np.ndarray) -> float:
    total = op.constant
    for q, w in op.linear.items():
        total += w * z[q]
    for (i, j), w in op.quadratic.items():
        total += w * z[i] * z[j]
    for qs, w in op.higher.items():
        prod = w
        for q in qs:
            prod *= z[q]
        total += prod
    return total


@dataclass(frozen=True)
class SweepRow:
    spacing: float
    nodes: int
    edges: int
    mis_size: int
    density: float
    solver: str
    seconds: float
    status: str = "ok"


SWEEP_CSV_COLUMNS = ("spacing", "nodes", "edges", "mis_size", "density", "solver", "seconds")


def spacing_sweep(
    scenario: PackingScenario,
    spacings: Iterable[float],
    exact_limit: int = 30,
    lam: float = 2.0,
    seed: int = 0,
    time_budget: float | None = None,
) -> list[SweepRow]:
    """Solve the scenario across lattice spacings.

    Each spacing is solved exactly when the graph has at most ``exact_limit``
    nodes, otherwise by annealing with 10 restarts (greedily repaired to an
    independent set before the density is computed). Timeouts keep the
    best-so-far answer and mark the row.
    """
    from qpack.hamiltonian import mis_hamiltonian

    if len(scenario.radii) != 1:
        raise ValidationError("spacing_sweep requires a homogeneous scenario")
    rows = []
    for a in spacings:
        t0 = time.perf_counter()
        graph = build_graph(scenario.with_spacing(float(a)))
        status = "ok"
        if graph.num_nodes == 0:
            size, witness, method = len(scenario.fixed_placements), (), "exact"
        elif graph.num_nodes <= exact_limit:
            method = "exact"
            try:
                res = exact_mis(graph, time_budget=time_budget)
                size, witness = res.size, res.witness
            except SolverTimeout as exc:
                status = "timeout"
                size, witness = exc.best_size, exc.best_witness
        else:
            method = "anneal"
            op, layout = mis_hamiltonian(graph, lam)
            result = anneal_qubo(op, AnnealSchedule(restarts=10), seed=seed)
            chosen = _selected_nodes(graph, layout, result.bitstring)
            witness = _repair_independent(graph, chosen)
            size = len(witness) + len(scenario.fixed_placements)
        density = packing_density(graph, witness) if graph.num_nodes else (
            packing_density(graph, ())
        )
        rows.append(
            SweepRow(
                spacing=float(a),
                nodes=graph.num_nodes,
                edges=graph.num_edges,
                mis_size=size,
                density=density,
                solver=method,
                seconds=time.perf_counter() - t0,
                status=status,
            )
        )
    return rows


def _selected_nodes(graph: PackingGraph, layout, bitstring: str) -> tuple[int, ...]:
    return tuple(nid for nid in graph.node_ids if bitstring[layout.qubit_of(nid)] == "1")


def _repair_independent(graph: PackingGraph, chosen: Sequence[int]) -> tuple[int, ...]:
    """Drop nodes until no chosen pair overlaps (highest-conflict first)."""
    chosen_set = set(chosen)
    while True:
        conflicts = {
            nid: len(graph.neighbors(nid) & chosen_set)
            for nid in chosen_set
            if graph.neighbors(nid) & chosen_set
        }
        if not conflicts:
            return tuple(sorted(chosen_set))
        worst = max(conflicts, key=lambda nid: (conflicts[nid], nid))
        chosen_set.remove(worst)
