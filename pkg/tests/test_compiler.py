import math

import numpy as np
import pytest

from qpack.compiler import (
    CompiledCircuit,
    CouplingMap,
    Cz,
    Prx,
    circuit_from_dict,
    circuit_to_dict,
    color_edges,
    compile_qaoa,
    coupling_map_from_dict,
    coupling_map_to_dict,
    edge_color,
    prx_matrix,
    simulate_circuit,
    verify_circuit,
    zxz_angles,
)
from qpack.errors import LayoutError, ValidationError
from qpack.geometry import extract_subgraph
from qpack.hamiltonian import IsingOperator, mis_hamiltonian
from qpack.instances import (
    garnet_coupling_map,
    garnet_graph,
    garnet_subgraph_ids,
    grid_placement,
)
from qpack.qaoa import QaoaParams


def proper(coloring):
    seen = set()
    for (i, j), c in coloring.items():
        for v in (i, j):
            key = (v, c)
            if key in seen:
                return False
            seen.add(key)
    return True


class TestEdgeColor:
    def test_garnet_map_uses_exactly_four_colors(self):
        coloring = edge_color(garnet_coupling_map())
        assert proper(coloring)
        assert len(set(coloring.values())) == 4

    def test_single_edge(self):
        cmap = CouplingMap(qubits=(0, 1), edges=((0, 1),))
        assert set(edge_color(cmap).values()) == {0}

    @pytest.mark.parametrize("k", [2, 3, 5, 8])
    def test_star_needs_k_colors(self, k):
        cmap = CouplingMap(
            qubits=tuple(range(k + 1)), edges=tuple((0, i + 1) for i in range(k))
        )
        coloring = edge_color(cmap)
        assert proper(coloring)
        assert len(set(coloring.values())) == k

    def test_triangle_vizing_bound(self):
        coloring = color_edges([(0, 1), (0, 2), (1, 2)])
        assert proper(coloring)
        assert len(set(coloring.values())) == 3  # Delta + 1

    def test_random_bipartite_hits_max_degree(self):
        rng = np.random.default_rng(4)
        for _ in range(10):
            left, right = 5, 6
            edges = sorted(
                {
                    (int(i), int(left + j))
                    for i, j in zip(rng.integers(0, left, 30), rng.integers(0, right, 30))
                }
            )
            if not edges:
                continue
            deg = {}
            for i, j in edges:
                deg[i] = deg.get(i, 0) + 1
                deg[j] = deg.get(j, 0) + 1
            coloring = color_edges(edges)
            assert proper(coloring)
            assert len(set(coloring.values())) == max(deg.values())

    def test_deterministic(self):
        cmap = garnet_coupling_map()
        assert edge_color(cmap) == edge_color(cmap)


class TestZxz:
    def test_reconstructs_random_unitaries(self):
        rng = np.random.default_rng(9)
        for _ in range(100):
            z = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
            q, _ = np.linalg.qr(z)
            a, theta, b = zxz_angles(q)
            rz = lambda t: np.diag([np.exp(-0.5j * t), np.exp(0.5j * t)])
            rx = prx_matrix(theta, 0.0)
            rebuilt = rz(a) @ rx @ rz(b)
            phase = np.vdot(rebuilt.ravel(), q.ravel())
            phase /= abs(phase)
            np.testing.assert_allclose(rebuilt * phase, q, atol=1e-10)


class TestCompile:

    def test_cz_count_formula(self, garnet_setup):
        g, cmap, placement = garnet_setup
        op, _ = mis_hamiltonian(g, 0.5)
        for p in (1, 2, 3):
            params = QaoaParams(tuple([0.3] * p), tuple([0.2] * p))
            circ = compile_qaoa(op, params, cmap, placement)
            assert circ.cz_count == 2 * len(op.quadratic) * p

    def test_zz_schedule_uses_four_colors(self, garnet_setup):
        g, cmap, placement = garnet_setup
        op, _ = mis_hamiltonian(g, 0.5)
        circ = compile_qaoa(op, QaoaParams((0.3,), (0.2,)), cmap, placement)
        assert circ.metadata["zz_colors"] == 4

    @pytest.mark.parametrize("p", [1, 3, 5])
    def test_compiled_state_matches_abstract(self, garnet_setup, p):
        g, cmap, placement = garnet_setup
        op, _ = mis_hamiltonian(g, 0.5)
        rng = np.random.default_rng(p)
        params = QaoaParams(
            tuple(float(x) for x in rng.uniform(0, 1.5, p)),
            tuple(float(x) for x in rng.uniform(0, 0.9, p)),
        )
        circ = compile_qaoa(op, params, cmap, placement)
        report = verify_circuit(circ, op, params)
        assert report.ok
        assert report.max_deviation < 1e-8

    def test_p_zero_is_state_prep(self, garnet_setup):
        g, cmap, placement = garnet_setup
        op, _ = mis_hamiltonian(g, 0.5)
        circ = compile_qaoa(op, None, cmap, placement)
        assert circ.cz_count == 0
        report = verify_circuit(circ, op, None)
        assert report.ok

    def test_corrupted_angle_flagged(self, garnet_setup):
        g, cmap, placement = garnet_setup
        op, _ = mis_hamiltonian(g, 0.5)
        params = QaoaParams((0.4,), (0.3,))
        circ = compile_qaoa(op, params, cmap, placement)
        bad_layers = []
        fixed = False
        for layer in circ.layers:
            gates = []
            for gate in layer:
                if isinstance(gate, Prx) and not fixed and gate.theta > 0.5:
                    gates.append(Prx(gate.qubit, gate.theta + 0.2, gate.phi))
                    fixed = True
                else:
                    gates.append(gate)
            bad_layers.append(tuple(gates))
        corrupted = CompiledCircuit(
            qubits=circ.qubits, layers=tuple(bad_layers),
            measurements=circ.measurements, metadata=circ.metadata,
        )
        assert not verify_circuit(corrupted, op, params).ok

    def test_no_quadratic_terms_means_no_cz(self, garnet_setup):
        _g, cmap, _placement = garnet_setup
        op = IsingOperator(num_qubits=3, linear={0: 0.5, 1: 0.5, 2: 0.5})
        circ = compile_qaoa(op, QaoaParams((0.3,), (0.1,)), cmap, {0: 0, 1: 4, 2: 11})
        assert circ.cz_count == 0
        assert all(isinstance(gate, Prx) for gate in circ.gates())
        assert verify_circuit(circ, op, QaoaParams((0.3,), (0.1,))).ok

    def test_off_map_term_rejected(self, garnet_setup):
        op = IsingOperator(
            num_qubits=2, linear={0: 0.1}, quadratic={(0, 1): 0.5}
        )
        cmap = CouplingMap(qubits=(0, 1, 2), edges=((0, 1), (1, 2)))
        with pytest.raises(LayoutError):
            compile_qaoa(op, QaoaParams((0.1,), (0.1,)), cmap, {0: 0, 1: 2})

    def test_layer_legality(self, garnet_setup):
        g, cmap, placement = garnet_setup
        op, _ = mis_hamiltonian(g, 0.5)
        circ = compile_qaoa(op, QaoaParams((0.3, 0.6), (0.2, 0.1)), cmap, placement)
        for layer in circ.layers:
            used = set()
            for gate in layer:
                touched = {gate.qubit} if isinstance(gate, Prx) else {gate.a, gate.b}
                assert not (used & touched)
                used |= touched

    def test_subgraph_instance(self):
        g = garnet_graph()
        sub = extract_subgraph(g, garnet_subgraph_ids(g, 8))
        op, _ = mis_hamiltonian(sub, 2.0)
        cmap = garnet_coupling_map()
        placement = grid_placement(sub, cmap)
        params = QaoaParams((0.9, 0.2), (0.5, 0.8))
        circ = compile_qaoa(op, params, cmap, placement)
        assert verify_circuit(circ, op, params).ok


class TestSerialization:
    def test_map_roundtrip(self):
        cmap = garnet_coupling_map()
        data = coupling_map_to_dict(cmap)
        assert coupling_map_to_dict(coupling_map_from_dict(data)) == data

    def test_circuit_roundtrip(self):
        g = garnet_graph()
        sub = extract_subgraph(g, garnet_subgraph_ids(g, 8))
        op, _ = mis_hamiltonian(sub, 0.5)
        cmap = garnet_coupling_map()
        circ = compile_qaoa(op, QaoaParams((0.3,), (0.2,)), cmap, grid_placement(sub, cmap))
        data = circuit_to_dict(circ)
        again = circuit_from_dict(data)
        assert circuit_to_dict(again) == data
        np.testing.assert_allclose(simulate_circuit(again), simulate_circuit(circ))

    def test_duplicate_edge_rejected(self):
        with pytest.raises(ValidationError):
            CouplingMap(qubits=(0, 1), edges=((0, 1), (1, 0)))
