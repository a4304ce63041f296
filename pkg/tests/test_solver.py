import math

import numpy as np
import pytest

from qpack.errors import SolverTimeout, ValidationError
from qpack.geometry import PackingGraph, PackingScenario, build_graph
from qpack.hamiltonian import IsingOperator, classical_energy, mis_hamiltonian
from qpack.solver import (
    AnnealResult,
    AnnealSchedule,
    anneal_qubo,
    exact_mis,
    spacing_sweep,
)

from .conftest import random_unit_disk_graph
from .oracles import brute_force_mis


class TestExactMis:
    def test_garnet_packing_size(self, garnet):
        res = exact_mis(garnet)
        assert res.size == 12  # 11 selectable nodes + the pre-placed circle
        assert len(res.witness) == 11
        assert garnet.is_independent(res.witness)

    def test_edgeless_graph(self):
        scn = PackingScenario(dimension=2, boundary_radius=8.0, radii=(1.0,), spacing=2.5)
        g = build_graph(scn)
        assert g.num_edges == 0
        res = exact_mis(g)
        assert res.size == g.num_nodes
        assert res.witness == g.node_ids

    def test_matches_enumeration_on_random_graphs(self):
        rng = np.random.default_rng(2)
        for _ in range(25):
            n = int(rng.integers(2, 15))
            g = random_unit_disk_graph(rng, n)
            res = exact_mis(g, enumerate_all=True)
            pos = {nid: k for k, nid in enumerate(g.node_ids)}
            edges = [(pos[i], pos[j]) for i, j, _ in g.edges]
            best, witnesses = brute_force_mis(n, edges)
            assert res.size == best
            got = sorted(tuple(sorted(pos[nid] for nid in w)) for w in res.all_optima)
            assert got == witnesses

    def test_thirty_node_instance(self):
        rng = np.random.default_rng(30)
        g = random_unit_disk_graph(rng, 30, box=5.0)
        res = exact_mis(g)
        assert g.is_independent(res.witness)
        assert res.size == len(res.witness)

    def test_deterministic_lexicographic_witness(self, garnet):
        first = exact_mis(garnet)
        second = exact_mis(garnet)
        assert first.witness == second.witness
        allres = exact_mis(garnet, enumerate_all=True)
        assert first.witness == min(allres.all_optima)

    def test_heterogeneous_rejected(self):
        scn = PackingScenario(dimension=2, boundary_radius=3.0, radii=(1.0, 0.5), spacing=1.0)
        with pytest.raises(ValidationError):
            exact_mis(build_graph(scn))

    def test_timeout_carries_best_so_far(self):
        rng = np.random.default_rng(8)
        g = random_unit_disk_graph(rng, 38, box=5.5)
        with pytest.raises(SolverTimeout) as exc:
            exact_mis(g, time_budget=1e-4)
        assert exc.value.best_size is not None


class TestAnnealQubo:
    def test_two_node_reaches_optimum(self, two_node_graph):
        op, _ = mis_hamiltonian(two_node_graph, 2.0)
        res = anneal_qubo(op, AnnealSchedule(sweeps=100), seed=1)
        assert res.energy == pytest.approx(1.0)
        assert res.bitstring in ("01", "10")

    def test_garnet_reaches_exact_energy(self, garnet):
        op, _ = mis_hamiltonian(garnet, 2.0)
        res = anneal_qubo(op, AnnealSchedule(restarts=10), seed=3)
        assert res.energy == pytest.approx(7.0)  # 18 - 11 placed

    def test_zero_coupling_follows_linear_signs(self):
        op = IsingOperator(num_qubits=4, linear={0: 1.0, 1: -2.0, 2: 0.5, 3: -0.25})
        res = anneal_qubo(op, AnnealSchedule(sweeps=200), seed=0)
        assert res.bitstring == "1010"  # positive weight -> bit 1 (z = -1)

    def test_energy_matches_classical_energy(self, garnet):
        op, _ = mis_hamiltonian(garnet, 1.3)
        res = anneal_qubo(op, AnnealSchedule(sweeps=300), seed=5)
        assert res.energy == pytest.approx(classical_energy(op, res.bitstring))

    def test_reproducible(self, garnet):
        op, _ = mis_hamiltonian(garnet, 2.0)
        a = anneal_qubo(op, AnnealSchedule(restarts=3), seed=11)
        b = anneal_qubo(op, AnnealSchedule(restarts=3), seed=11)
        assert a == b

    def test_never_beats_exact_optimum(self):
        rng = np.random.default_rng(17)
        hits = 0
        runs = 20
        for k in range(runs):
            g = random_unit_disk_graph(rng, int(rng.integers(5, 20)))
            op, _ = mis_hamiltonian(g, 2.0)
            exact = exact_mis(g)
            optimum = g.num_nodes - len(exact.witness)
            res = anneal_qubo(op, AnnealSchedule(restarts=10), seed=k)
            assert res.energy >= optimum - 1e-9
            hits += res.energy == pytest.approx(optimum)
        assert hits >= 0.95 * runs

    def test_projectors_rejected(self):
        op = IsingOperator(num_qubits=2, projectors=(((0, 1), (1, 1), 1.0),))
        with pytest.raises(ValidationError):
            anneal_qubo(op)


class TestSpacingSweep:
    def test_trend_non_decreasing_packing(self, garnet_scn):
        from dataclasses import replace

        scn = replace(garnet_scn, fixed_placements=())
        rows = spacing_sweep(scn, [1.4, 1.1, 0.9, 0.75])
        sizes = [r.mis_size for r in rows]
        assert sizes == sorted(sizes, reverse=False) or all(
            sizes[i] <= sizes[i + 1] for i in range(len(sizes) - 1)
        )

    def test_repeated_spacing_identical_rows(self, garnet_scn):
        rows = spacing_sweep(garnet_scn, [1.4, 1.4])
        a, b = rows
        assert (a.spacing, a.nodes, a.edges, a.mis_size, a.density) == (
            b.spacing, b.nodes, b.edges, b.mis_size, b.density,
        )

    def test_oversized_spacing(self):
        scn = PackingScenario(dimension=2, boundary_radius=2.0, radii=(1.0,), spacing=1.0)
        rows = spacing_sweep(scn, [50.0])
        assert rows[0].mis_size in (0, 1)

    def test_heterogeneous_rejected(self):
        scn = PackingScenario(dimension=2, boundary_radius=3.0, radii=(1.0, 0.5), spacing=1.0)
        with pytest.raises(ValidationError):
            spacing_sweep(scn, [1.0])

    def test_anneal_path_used_above_exact_limit(self, garnet_scn):
        from dataclasses import replace

        scn = replace(garnet_scn, fixed_placements=())
        rows = spacing_sweep(scn, [1.0], exact_limit=5)
        assert rows[0].solver == "anneal"
        assert rows[0].mis_size > 0
