"""qpack: bounded sphere packing as graph optimization with a simulated
quantum (QAOA) solution pipeline and closed-form resource bounds."""

from qpack.backends import BACKEND
from qpack.geometry import (
    PackingGraph,
    PackingScenario,
    build_graph,
    build_lattice,
    extract_subgraph,
    overlap_edge,
    packing_density,
)
from qpack.hamiltonian import (
    IsingOperator,
    QubitLayout,
    XMixer,
    classical_energy,
    diagonal_energies,
    expand_projectors,
    first_quantization_hamiltonian,
    mis_hamiltonian,
    second_quantization_hamiltonian,
    x_mixer,
)
from qpack.qaoa import QaoaParams, QaoaResult, evolve, expectation, sample, train
from qpack.solver import anneal_qubo, exact_mis, spacing_sweep

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "IsingOperator",
    "PackingGraph",
    "PackingScenario",
    "QaoaParams",
    "QaoaResult",
    "QubitLayout",
    "XMixer",
    "anneal_qubo",
    "build_graph",
    "build_lattice",
    "classical_energy",
    "diagonal_energies",
    "evolve",
    "exact_mis",
    "expand_projectors",
    "expectation",
    "extract_subgraph",
    "first_quantization_hamiltonian",
    "mis_hamiltonian",
    "overlap_edge",
    "packing_density",
    "sample",
    "second_quantization_hamiltonian",
    "spacing_sweep",
    "train",
    "x_mixer",
]
