"""Lowering the QAOA ansatz to a CZ-native gate set on a device map.

Gate set: PRX(theta, phi) = Rz(phi) Rx(theta) Rz(-phi) single-qubit pulses
plus CZ on coupler edges. Each ZZ phase exp(-i*v*Z_i*Z_j) lowers to exactly
two CZ gates via  H_t . CZ . Rx_t(2v) . CZ . H_t ; ZZ terms are scheduled
color-by-color over a proper edge coloring so same-colored terms run
simultaneously. Z rotations are tracked as virtual frames and merged with
neighboring pulses; whatever frame remains at the end is flushed as a pair
of pi-pulses so the compiled state matches the abstract ansatz exactly (up
to global phase), which ``verify_circuit`` checks against the statevector
engine. No routing: a quadratic term off the coupling map is an error.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from qpack import backends
from qpack.errors import FormatError, LayoutError, QubitCapError, ValidationError
from qpack.hamiltonian import IsingOperator, XMixer
from qpack.qaoa import DEFAULT_QUBIT_CAP, QaoaParams, evolve, initial_state

MAP_FORMAT = "qpack-map/1"
CIRCUIT_FORMAT = "qpack-circ/1"

_ANGLE_TOL = 1e-12


@dataclass(frozen=True)
class CouplingMap:
    """Device qubits, undirected coupler edges, optional grid coordinates."""

    qubits: tuple[int, ...]
    edges: tuple[tuple[int, int], ...]
    coords: dict[int, tuple[float, float]] | None = None

    def __post_init__(self):
        qs = set(self.qubits)
        if len(qs) != len(self.qubits):
            raise ValidationError("duplicate qubit ids")
        seen = set()
        for i, j in self.edges:
            if i == j:
                raise ValidationError("self-loop in coupling map")
            if i not in qs or j not in qs:
                raise ValidationError(f"edge ({i},{j}) references unknown qubit")
            key = (min(i, j), max(i, j))
            if key in seen:
                raise ValidationError(f"duplicate edge {key}")
            seen.add(key)
        if self.coords is not None and set(self.coords) != qs:
            raise ValidationError("coords must cover exactly the qubits")

    def edge_set(self) -> frozenset[tuple[int, int]]:
        return frozenset((min(i, j), max(i, j)) for i, j in self.edges)

    def max_degree(self) -> int:
        deg: dict[int, int] = {}
        for i, j in self.edges:
            deg[i] = deg.get(i, 0) + 1
            deg[j] = deg.get(j, 0) + 1
        return max(deg.values(), default=0)


@dataclass(frozen=True)
class Prx:
    qubit: int
    theta: float
    phi: float


@dataclass(frozen=True)
class Cz:
    a: int
    b: int


Gate = Prx | Cz


@dataclass(frozen=True)
class CompiledCircuit:
    """Layered gate schedule on device qubits.

    ``qubits[k]`` is the device qubit carrying op qubit k; measurements
    follow the same order so sampled bitstrings align with the operator's
    bit convention.
    """

    qubits: tuple[int, ...]
    layers: tuple[tuple[Gate, ...], ...]
    measurements: tuple[int, ...]
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        for layer in self.layers:
            used: set[int] = set()
            for gate in layer:
                touched = {gate.qubit} if isinstance(gate, Prx) else {gate.a, gate.b}
                if used & touched:
                    raise ValidationError("qubit used twice within a layer")
                used |= touched

    @property
    def num_active(self) -> int:
        return len(self.qubits)

    @property
    def cz_count(self) -> int:
        return sum(1 for layer in self.layers for g in layer if isinstance(g, Cz))

    @property
    def depth(self) -> int:
        return len(self.layers)

    def gates(self) -> Iterable[Gate]:
        for layer in self.layers:
            yield from layer


def edge_color(cmap: CouplingMap) -> dict[tuple[int, int], int]:
    """Proper edge coloring of the coupling map, deterministic.

    Bipartite graphs (all grid maps) get exactly max-degree colors via
    Kempe-chain swaps; otherwise a fresh color is opened when a swap is
    unsafe, staying within the usual Delta+1 on small device graphs.
    """
    return color_edges(sorted(cmap.edge_set()))


def color_edges(edges: Sequence[tuple[int, int]]) -> dict[tuple[int, int], int]:
    """Kempe-chain edge coloring over an explicit, ordered edge list."""
    at: dict[int, dict[int, tuple[int, int]]] = {}  # vertex -> color -> edge
    coloring: dict[tuple[int, int], int] = {}
    deg: dict[int, int] = {}
    for i, j in edges:
        deg[i] = deg.get(i, 0) + 1
        deg[j] = deg.get(j, 0) + 1
    delta = max(deg.values(), default=0)
    num_colors = delta

    def free_color(v: int, limit: int) -> int | None:
        used = at.setdefault(v, {})
        for c in range(limit):
            if c not in used:
                return c
        return None

    def assign(edge: tuple[int, int], c: int) -> None:
        u, v = edge
        coloring[edge] = c
        at.setdefault(u, {})[c] = edge
        at.setdefault(v, {})[c] = edge

    def unassign(edge: tuple[int, int]) -> int:
        c = coloring.pop(edge)
        u, v = edge
        del at[u][c]
        del at[v][c]
        return c

    for edge in edges:
        u, v = edge
        a = free_color(u, num_colors)
        b = free_color(v, num_colors)
        if a is not None and a not in at.setdefault(v, {}):
            assign(edge, a)
            continue
        if b is not None and b not in at.setdefault(u, {}):
            assign(edge, b)
            continue
        if a is None or b is None:
            num_colors += 1
            assign(edge, num_colors - 1)
            continue
        # Kempe chain from v alternating a, b; in bipartite graphs it cannot
        # reach u, after the swap color a is free at both endpoints.
        path = []
        current, want = v, a
        while want in at.get(current, {}):
            e = at[current][want]
            path.append(e)
            current = e[0] if e[1] == current else e[1]
            want = b if want == a else a
        if current == u:
            num_colors += 1
            assign(edge, num_colors - 1)
            continue
        for e in path:
            c = unassign(e)
            assign(e, b if c == a else a)
        assign(edge, a)

    _check_proper(coloring)
    return coloring


def _check_proper(coloring: Mapping[tuple[int, int], int]) -> None:
    seen: set[tuple[int, int]] = set()
    for (i, j), c in coloring.items():
        for v in (i, j):
            if (v, c) in seen:
                raise ValidationError("edge coloring is not proper")
            seen.add((v, c))


# --- single-qubit algebra ----------------------------------------------------


def prx_matrix(theta: float, phi: float) -> np.ndarray:
    c = math.cos(theta / 2.0)
    s = math.sin(theta / 2.0)
    return np.array(
        [
            [c, -1j * s * cmath.exp(-1j * phi)],
            [-1j * s * cmath.exp(1j * phi), c],
        ],
        dtype=np.complex128,
    )


def _rz(angle: float) -> np.ndarray:
    return np.array(
        [[cmath.exp(-0.5j * angle), 0.0], [0.0, cmath.exp(0.5j * angle)]],
        dtype=np.complex128,
    )


def _rx(angle: float) -> np.ndarray:
    return prx_matrix(angle, 0.0)


_HADAMARD = np.array([[1.0, 1.0], [1.0, -1.0]], dtype=np.complex128) / math.sqrt(2.0)
_RY90 = np.array(
    [[math.cos(math.pi / 4), -math.sin(math.pi / 4)],
     [math.sin(math.pi / 4), math.cos(math.pi / 4)]],
    dtype=np.complex128,
)


def zxz_angles(u: np.ndarray) -> tuple[float, float, float]:
    """Euler angles (a, theta, b) with u ~ Rz(a) Rx(theta) Rz(b) up to phase."""
    det = u[0, 0] * u[1, 1] - u[0, 1] * u[1, 0]
    su = u / cmath.sqrt(det)
    theta = 2.0 * math.atan2(abs(su[1, 0]), abs(su[0, 0]))
    plus = -2.0 * cmath.phase(su[0, 0]) if abs(su[0, 0]) > 1e-12 else 0.0
    minus = (
        2.0 * (cmath.phase(su[1, 0]) + math.pi / 2.0) if abs(su[1, 0]) > 1e-12 else 0.0
    )
    return (plus + minus) / 2.0, theta, (plus - minus) / 2.0


class _Emitter:
    """Accumulates single-qubit matrices and virtual Z frames.

    The physical state always equals Rz(frame[q]) applied after the emitted
    gates on each qubit; CZ commutes with the frames, so flushing is only
    forced at CZ boundaries and at the end of the circuit.
    """

    def __init__(self, n: int):
        self.n = n
        self.pending: list[np.ndarray | None] = [None] * n
        self.frame = [0.0] * n
        self.gates: list[Gate] = []

    def _mul(self, q: int, m: np.ndarray) -> None:
        self.pending[q] = m if self.pending[q] is None else m @ self.pending[q]

    def rz(self, q: int, angle: float) -> None:
        self._mul(q, _rz(angle))

    def rx(self, q: int, angle: float) -> None:
        self._mul(q, _rx(angle))

    def ry90(self, q: int) -> None:
        self._mul(q, _RY90)

    def h(self, q: int) -> None:
        self._mul(q, _HADAMARD)

    def cz(self, i: int, j: int) -> None:
        self._flush(i)
        self._flush(j)
        self.gates.append(Cz(min(i, j), max(i, j)))

    def _flush(self, q: int) -> None:
        u = self.pending[q]
        if u is None:
            return
        a, theta, b = zxz_angles(u)
        if abs(math.sin(theta / 2.0)) < _ANGLE_TOL:
            # diagonal up to phase: pure frame advance
            self.frame[q] += a + b
        else:
            phi = _wrap(-(b + self.frame[q]))
            self.gates.append(Prx(q, theta, phi))
            self.frame[q] += a + b
        self.pending[q] = None

    def finish(self) -> None:
        for q in range(self.n):
            self._flush(q)
        for q in range(self.n):
            f = _wrap(self.frame[q])
            if abs(f) > 1e-9:
                # Rz(f) = (up to phase) PRX(pi, f/2) after PRX(pi, 0)
                self.gates.append(Prx(q, math.pi, 0.0))
                self.gates.append(Prx(q, math.pi, _wrap(f / 2.0)))
            self.frame[q] = 0.0


def _wrap(angle: float) -> float:
    return (angle + math.pi) % (2.0 * math.pi) - math.pi


def _schedule(gates: Sequence[Gate]) -> tuple[tuple[Gate, ...], ...]:
    """ASAP list scheduling preserving per-qubit gate order."""
    layers: list[list[Gate]] = []
    frontier: dict[int, int] = {}
    for gate in gates:
        touched = (gate.qubit,) if isinstance(gate, Prx) else (gate.a, gate.b)
        level = max((frontier.get(q, -1) for q in touched), default=-1) + 1
        while len(layers) <= level:
            layers.append([])
        layers[level].append(gate)
        for q in touched:
            frontier[q] = level
    return tuple(tuple(layer) for layer in layers)


def compile_qaoa(
    op: IsingOperator,
    params: QaoaParams | None,
    cmap: CouplingMap,
    placement: Mapping[int, int] | None = None,
) -> CompiledCircuit:
    """Lower the ansatz for ``op`` at ``params`` onto the device.

    ``placement`` maps op qubits to device qubits (identity by default).
    Exactly two CZ per quadratic term per layer; ZZ terms are grouped by
    edge color, so their schedule depth per QAOA layer equals the number of
    colors. ``params=None`` compiles the bare state preparation (p = 0).
    """
    if op.has_projectors:
        raise ValidationError("expand projectors before compiling")
    n = op.num_qubits
    if placement is None:
        placement = {q: q for q in range(n)}
    missing = [q for q in range(n) if q not in placement]
    if missing:
        raise LayoutError(f"placement missing op qubits {missing}")
    device = [placement[q] for q in range(n)]
    if len(set(device)) != n:
        raise LayoutError("placement maps two op qubits to one device qubit")
    unknown = set(device) - set(cmap.qubits)
    if unknown:
        raise LayoutError(f"placement targets unknown device qubits {sorted(unknown)}")

    couplers = cmap.edge_set()
    active: list[tuple[int, int]] = []
    for (i, j) in sorted(op.quadratic):
        dev = (min(placement[i], placement[j]), max(placement[i], placement[j]))
        if dev not in couplers:
            raise LayoutError(
                f"term ({i},{j}) maps to non-coupler pair {dev}; routing is unsupported"
            )
        active.append((i, j))
    coloring = color_edges(active)
    num_colors = 1 + max(coloring.values(), default=-1)
    by_color: dict[int, list[tuple[int, int]]] = {}
    for edge, c in coloring.items():
        by_color.setdefault(c, []).append(edge)

    em = _Emitter(n)
    for q in range(n):
        em.ry90(q)  # |0> -> |+>
    p = 0 if params is None else params.p
    for layer in range(p):
        alpha = params.alphas[layer]
        beta = params.betas[layer]
        for q, w in sorted(op.linear.items()):
            em.rz(q, 2.0 * alpha * w)
        for c in range(num_colors):
            for (i, j) in sorted(by_color.get(c, [])):
                v = alpha * op.quadratic[(i, j)]
                em.h(j)
                em.cz(i, j)
                em.rx(j, 2.0 * v)
                em.cz(i, j)
                em.h(j)
        for q in range(n):
            em.rx(q, -2.0 * beta)  # exp(+i*beta*X)
    em.finish()

    layers = _schedule(em.gates)
    circuit = CompiledCircuit(
        qubits=tuple(device),
        layers=tuple(
            tuple(_to_device(g, device) for g in layer) for layer in layers
        ),
        measurements=tuple(device),
        metadata={
            "p": p,
            "cz_count": sum(1 for g in em.gates if isinstance(g, Cz)),
            "prx_count": sum(1 for g in em.gates if isinstance(g, Prx)),
            "depth": len(layers),
            "zz_colors": num_colors,
        },
    )
    expected_cz = 2 * len(op.quadratic) * p
    if circuit.cz_count != expected_cz:
        raise ValidationError(
            f"CZ bookkeeping broke: {circuit.cz_count} != {expected_cz}"
        )
    return circuit


def _to_device(gate: Gate, device: Sequence[int]) -> Gate:
    if isinstance(gate, Prx):
        return Prx(device[gate.qubit], gate.theta, gate.phi)
    return Cz(min(device[gate.a], device[gate.b]), max(device[gate.a], device[gate.b]))


def simulate_circuit(
    circuit: CompiledCircuit, qubit_cap: int = DEFAULT_QUBIT_CAP
) -> np.ndarray:
    """Noiseless statevector of the compiled circuit from |0...0>."""
    n = circuit.num_active
    if n > qubit_cap:
        raise QubitCapError(f"{n} qubits exceeds cap {qubit_cap}")
    index = {dev: k for k, dev in enumerate(circuit.qubits)}
    state = np.zeros(1 << n, dtype=np.complex128)
    state[0] = 1.0
    for layer in circuit.layers:
        for gate in layer:
            if isinstance(gate, Prx):
                backends.apply_1q(state, n, index[gate.qubit], prx_matrix(gate.theta, gate.phi))
            else:
                backends.apply_cz(state, n, index[gate.a], index[gate.b])
    return state


@dataclass(frozen=True)
class VerifyReport:
    max_deviation: float
    ok: bool
    global_phase: float


def verify_circuit(
    circuit: CompiledCircuit,
    op: IsingOperator,
    params: QaoaParams | None,
    tol: float = 1e-8,
    qubit_cap: int = DEFAULT_QUBIT_CAP,
) -> VerifyReport:
    """Compare the compiled circuit against the abstract ansatz.

    Simulates both and removes the global phase; deviations beyond ``tol``
    flag a compiler defect.
    """
    sim = simulate_circuit(circuit, qubit_cap)
    if params is None:
        ref = initial_state(op.num_qubits)
    else:
        ref = evolve(op, XMixer(op.num_qubits), params, qubit_cap)
    overlap = np.vdot(sim, ref)
    phase = cmath.phase(overlap) if abs(overlap) > 0 else 0.0
    deviation = float(np.max(np.abs(ref - sim * cmath.exp(1j * phase))))
    return VerifyReport(max_deviation=deviation, ok=deviation < tol, global_phase=phase)


# --- serialization ----------------------------------------------------------


def coupling_map_to_dict(cmap: CouplingMap) -> dict:
    out = {
        "format": MAP_FORMAT,
        "qubits": list(cmap.qubits),
        "edges": [[i, j] for i, j in cmap.edges],
    }
    if cmap.coords is not None:
        out["coords"] = {str(q): list(c) for q, c in cmap.coords.items()}
    return out


def coupling_map_from_dict(data: Mapping) -> CouplingMap:
    if data.get("format") != MAP_FORMAT:
        raise FormatError(f"expected format {MAP_FORMAT!r}, got {data.get('format')!r}")
    try:
        coords = data.get("coords")
        return CouplingMap(
            qubits=tuple(int(q) for q in data["qubits"]),
            edges=tuple((int(i), int(j)) for i, j in data["edges"]),
            coords=(
                None
                if coords is None
                else {int(q): tuple(float(x) for x in c) for q, c in coords.items()}
            ),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"malformed coupling map: {exc}") from exc


def circuit_to_dict(circuit: CompiledCircuit) -> dict:
    layers = []
    for layer in circuit.layers:
        records = []
        for gate in layer:
            if isinstance(gate, Prx):
                records.append(
                    {"gate": "prx", "q": gate.qubit, "theta": gate.theta, "phi": gate.phi}
                )
            else:
                records.append({"gate": "cz", "qubits": [gate.a, gate.b]})
        layers.append(records)
    return {
        "format": CIRCUIT_FORMAT,
        "qubits": list(circuit.qubits),
        "layers": layers,
        "measurements": list(circuit.measurements),
        "metadata": circuit.metadata,
    }


def circuit_from_dict(data: Mapping) -> CompiledCircuit:
    if data.get("format") != CIRCUIT_FORMAT:
        raise FormatError(f"expected format {CIRCUIT_FORMAT!r}, got {data.get('format')!r}")
    try:
        layers = []
        for layer in data["layers"]:
            gates: list[Gate] = []
            for rec in layer:
                if rec["gate"] == "prx":
                    gates.append(Prx(int(rec["q"]), float(rec["theta"]), float(rec["phi"])))
                elif rec["gate"] == "cz":
                    a, b = rec["qubits"]
                    gates.append(Cz(int(a), int(b)))
                else:
                    raise FormatError(f"unknown gate {rec['gate']!r}")
            layers.append(tuple(gates))
        return CompiledCircuit(
            qubits=tuple(int(q) for q in data["qubits"]),
            layers=tuple(layers),
            measurements=tuple(int(q) for q in data["measurements"]),
            metadata=dict(data.get("metadata", {})),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"malformed circuit file: {exc}") from exc
