"""Cost operators for packing graphs.

Three encodings share one diagonal-operator container:

  * ``mis_hamiltonian`` - homogeneous instances, one qubit per node. The
    integer program  min sum(1 - x_v)  s.t.  x_v x_w = 0 on edges  is
    penalized with weight ``lam`` and mapped to Z operators through
    x -> (I - Z)/2. Constants are kept so that classical energies equal the
    integer-program cost exactly (the evolution engine skips them; they only
    contribute global phase).
  * ``second_quantization_hamiltonian`` - heterogeneous, one qubit per
    (site, radius) placement, occupied placements score -V(r), every
    overlap edge carries a penalty ``lam``.
  * ``first_quantization_hamiltonian`` - heterogeneous, one binary register
    of width ceil(log2(|R|+1)) per lattice site; codeword n places the n-th
    radius (0 = empty). Objective, pairwise-overlap and invalid-codeword
    terms are stored as bitstring projectors and can be expanded into
    Z-products of degree <= 2 * register width.

Bit conventions, used everywhere in the package: character ``q`` of a
bitstring is qubit ``q`` ('1' = occupied, Z eigenvalue -1); amplitude index
``k`` holds qubit ``q`` in bit ``(k >> q) & 1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Mapping, Sequence

import numpy as np

from qpack.errors import FormatError, ValidationError
from qpack.geometry import BOUNDARY_TOL, PackingGraph

OPERATOR_FORMAT = "qpack-ham/1"

_PRUNE_TOL = 1e-15

Projector = tuple[tuple[int, ...], tuple[int, ...], float]


@dataclass(frozen=True)
class IsingOperator:
    """Diagonal operator: constant + Z terms + ZZ terms (+ projectors).

    ``projectors`` hold first-quantization terms as (qubits, bits, weight):
    the weight applies to basis states whose restriction to ``qubits`` equals
    ``bits``. ``higher`` stores Z-products of degree >= 3 produced by
    projector expansion. Zero-weight terms are never stored.
    """

    num_qubits: int
    constant: float = 0.0
    linear: dict[int, float] = field(default_factory=dict)
    quadratic: dict[tuple[int, int], float] = field(default_factory=dict)
    projectors: tuple[Projector, ...] = ()
    higher: dict[tuple[int, ...], float] = field(default_factory=dict)

    def __post_init__(self):
        if self.num_qubits < 1:
            raise ValidationError("operator needs at least one qubit")
        for q in self.linear:
            self._check_qubit(q)
        for (i, j) in self.quadratic:
            if not i < j:
                raise ValidationError(f"quadratic key ({i},{j}) must be ordered i < j")
            self._check_qubit(i)
            self._check_qubit(j)
        for qs in self.higher:
            if len(qs) < 3 or tuple(sorted(set(qs))) != qs:
                raise ValidationError(f"higher-order key {qs} must be >= 3 sorted distinct qubits")
            for q in qs:
                self._check_qubit(q)
        for qubits, bits, _w in self.projectors:
            if len(qubits) != len(bits) or len(set(qubits)) != len(qubits):
                raise ValidationError("projector qubits/bits mismatch")
            for q in qubits:
                self._check_qubit(q)
            if any(b not in (0, 1) for b in bits):
                raise ValidationError("projector bits must be 0/1")
        for w in (*self.linear.values(), *self.quadratic.values(), *self.higher.values()):
            if w == 0.0:
                raise ValidationError("zero-weight terms must be pruned")

    def _check_qubit(self, q: int) -> None:
        if not 0 <= q < self.num_qubits:
            raise ValidationError(f"qubit {q} outside 0..{self.num_qubits - 1}")

    @property
    def has_projectors(self) -> bool:
        return bool(self.projectors)

    @property
    def num_terms(self) -> int:
        return (
            len(self.linear) + len(self.quadratic) + len(self.higher) + len(self.projectors)
        )


@dataclass(frozen=True)
class QubitLayout:
    """Mapping from graph nodes to operator qubits.

    ``assignments`` maps node id -> qubit tuple: a single qubit for the
    mis/second-quantization encodings, the owning site's full register for
    first quantization (nodes at one site share the register and are told
    apart by ``codewords``).
    """

    formulation: str
    assignments: dict[int, tuple[int, ...]]
    codewords: dict[int, int] | None = None

    def __post_init__(self):
        if self.formulation not in ("mis", "second_quantization", "first_quantization"):
            raise ValidationError(f"unknown formulation {self.formulation!r}")
        used: set[int] = set()
        for reg in {tuple(qs) for qs in self.assignments.values()}:
            if used & set(reg):
                raise ValidationError("distinct registers share a qubit")
            used |= set(reg)
        if used != set(range(len(used))):
            raise ValidationError("layout qubits must cover 0..n-1 exactly")

    @property
    def num_qubits(self) -> int:
        return len({q for qs in self.assignments.values() for q in qs})

    def qubit_of(self, node_id: int) -> int:
        qs = self.assignments[node_id]
        if len(qs) != 1:
            raise ValidationError("node owns a multi-qubit register; use assignments")
        return qs[0]


def sphere_weights(graph: PackingGraph) -> dict[float, float]:
    """Default objective weights V(r): the sphere measure (area or volume)."""
    scn = graph.scenario
    return {r: scn.sphere_measure(r) for r in scn.radii}


def mis_hamiltonian(graph: PackingGraph, lam: float) -> tuple[IsingOperator, QubitLayout]:
    """Penalized maximum-independent-set operator for a homogeneous graph.

    Classical energy of a bitstring equals (number of empty nodes) +
    lam * (number of overlapping pairs); the all-zeros string scores |V|.
    """
    if not graph.is_homogeneous():
        raise ValidationError("mis_hamiltonian requires a single-radius graph")
    if lam <= 0:
        raise ValidationError("lam must be positive")
    ids = graph.node_ids
    qubit = {nid: q for q, nid in enumerate(ids)}
    n = len(ids)
    if n == 0:
        raise ValidationError("graph has no nodes")
    linear = {qubit[nid]: 0.5 for nid in ids}
    quadratic: dict[tuple[int, int], float] = {}
    for i, j, _kind in graph.edges:
        qi, qj = sorted((qubit[i], qubit[j]))
        quadratic[(qi, qj)] = quadratic.get((qi, qj), 0.0) + lam / 4.0
        linear[qi] -= lam / 4.0
        linear[qj] -= lam / 4.0
    constant = n / 2.0 + lam * len(graph.edges) / 4.0
    op = IsingOperator(
        num_qubits=n,
        constant=constant,
        linear=_prune(linear),
        quadratic=_prune(quadratic),
    )
    layout = QubitLayout("mis", {nid: (qubit[nid],) for nid in ids})
    return op, layout


def second_quantization_hamiltonian(
    graph: PackingGraph,
    lam: float,
    weights: Mapping[float, float] | None = None,
) -> tuple[IsingOperator, QubitLayout]:
    """One qubit per placement: occupied scores -V(r), overlaps cost lam."""
    if lam <= 0:
        raise ValidationError("lam must be positive")
    if weights is None:
        weights = sphere_weights(graph)
    for r in graph.scenario.radii:
        if r not in weights:
            raise ValidationError(f"missing objective weight for radius {r}")
    ids = graph.node_ids
    if not ids:
        raise ValidationError("graph has no nodes")
    qubit = {nid: q for q, nid in enumerate(ids)}
    linear: dict[int, float] = {}
    constant = 0.0
    for nid in ids:
        v = weights[graph.radius_of(nid)]
        linear[qubit[nid]] = v / 2.0
        constant -= v / 2.0
    quadratic: dict[tuple[int, int], float] = {}
    for i, j, _kind in graph.edges:
        qi, qj = sorted((qubit[i], qubit[j]))
        quadratic[(qi, qj)] = quadratic.get((qi, qj), 0.0) + lam / 4.0
        linear[qi] -= lam / 4.0
        linear[qj] -= lam / 4.0
        constant += lam / 4.0
    op = IsingOperator(
        num_qubits=len(ids),
        constant=constant,
        linear=_prune(linear),
        quadratic=_prune(quadratic),
    )
    layout = QubitLayout("second_quantization", {nid: (qubit[nid],) for nid in ids})
    return op, layout


def first_quantization_hamiltonian(
    graph: PackingGraph,
    lam: float,
    invalid_penalty: float | None = None,
    weights: Mapping[float, float] | None = None,
) -> tuple[IsingOperator, QubitLayout]:
    """Per-site binary registers encoding which radius (if any) is placed.

    Requires a shared lattice (one spacing for all radii). Codeword n in
    1..|R| selects radius r_n at the site, 0 leaves it empty; codewords that
    exceed |R| or select a radius the site does not admit are penalized with
    ``invalid_penalty`` (default: twice the largest per-site objective mass,
    which strictly dominates any objective gain). Terms are returned as
    projectors; ``expand_projectors`` rewrites them into Z-products of degree
    at most twice the register width.
    """
    if lam <= 0:
        raise ValidationError("lam must be positive")
    if not graph.scenario.shared_lattice:
        raise ValidationError("first quantization requires one shared lattice")
    if weights is None:
        weights = sphere_weights(graph)
    radii = graph.scenario.radii
    num_radii = len(radii)
    if num_radii >= 1 << 16:
        raise ValidationError("register width overflow: too many radii")
    for r in radii:
        if r not in weights:
            raise ValidationError(f"missing objective weight for radius {r}")
    if not graph.nodes:
        raise ValidationError("graph has no nodes")

    width = max(1, math.ceil(math.log2(num_radii + 1)))

    # Group placements into lattice sites by coordinate.
    sites: dict[tuple[float, ...], list[int]] = {}
    for nid in graph.node_ids:
        coord = graph.nodes[nid][0]
        key = _site_key(coord)
        sites.setdefault(key, []).append(nid)
    site_keys = sorted(sites)
    site_index = {key: s for s, key in enumerate(site_keys)}
    register = {key: tuple(site_index[key] * width + b for b in range(width)) for key in site_keys}

    node_site: dict[int, tuple[float, ...]] = {}
    node_code: dict[int, int] = {}
    for key, nids in sites.items():
        for nid in nids:
            node_site[nid] = key
            node_code[nid] = graph.nodes[nid][1] + 1  # codeword 0 = empty

    if invalid_penalty is None:
        per_site_mass = [
            sum(weights[graph.radius_of(nid)] for nid in nids) for nids in sites.values()
        ]
        invalid_penalty = 2.0 * max(per_site_mass)
    if invalid_penalty <= 0:
        raise ValidationError("invalid_penalty must be positive")

    projectors: list[Projector] = []
    for key in site_keys:
        reg = register[key]
        admitted = {node_code[nid] for nid in sites[key]}
        for nid in sites[key]:
            v = weights[graph.radius_of(nid)]
            projectors.append((reg, _codeword_bits(node_code[nid], width), -v))
        for n in range(1, 1 << width):
            if n not in admitted:
                projectors.append((reg, _codeword_bits(n, width), invalid_penalty))

    for i, j, _kind in graph.edges:
        si, sj = node_site[i], node_site[j]
        if si == sj:
            continue  # one codeword per site; coincident conflicts are structural
        qubits = register[si] + register[sj]
        bits = _codeword_bits(node_code[i], width) + _codeword_bits(node_code[j], width)
        projectors.append((qubits, bits, lam))

    total_qubits = width * len(site_keys)
    op = IsingOperator(num_qubits=total_qubits, projectors=tuple(projectors))
    layout = QubitLayout(
        "first_quantization",
        {nid: register[node_site[nid]] for nid in graph.node_ids},
        codewords=dict(node_code),
    )
    return op, layout


def decode_register_state(layout: QubitLayout, bitstring: str) -> tuple[int, ...] | None:
    """Node ids selected by a first-quantization bitstring, or None if any
    site holds an invalid codeword."""
    if layout.formulation != "first_quantization":
        raise ValidationError("decode_register_state needs a first-quantization layout")
    by_register: dict[tuple[int, ...], dict[int, int]] = {}
    for nid, reg in layout.assignments.items():
        by_register.setdefault(reg, {})[layout.codewords[nid]] = nid
    selected = []
    for reg, code_to_node in by_register.items():
        n = sum(int(bitstring[q]) << b for b, q in enumerate(reg))
        if n == 0:
            continue
        if n not in code_to_node:
            return None
        selected.append(code_to_node[n])
    return tuple(sorted(selected))


def x_mixer(num_qubits: int) -> "XMixer":
    """Transverse-field mixer -sum_q X_q with unit coefficient per qubit."""
    return XMixer(num_qubits)


@dataclass(frozen=True)
class XMixer:
    """Mixer -sum X; its ground state is the uniform superposition."""

    num_qubits: int

    def __post_init__(self):
        if self.num_qubits < 1:
            raise ValidationError("mixer needs at least one qubit")

    @property
    def coefficients(self) -> tuple[float, ...]:
        return (1.0,) * self.num_qubits

    def expectation(self, state: np.ndarray) -> float:
        """<state| -sum X |state>."""
        if state.size != 1 << self.num_qubits:
            raise ValidationError("state dimension mismatch")
        total = 0.0
        for q in range(self.num_qubits):
            v = state.reshape(1 << (self.num_qubits - q - 1), 2, 1 << q)
            total += 2.0 * float(np.sum((v[:, 0, :].conj() * v[:, 1, :]).real))
        return -total


def classical_energy(op: IsingOperator, bitstring: str | Sequence[int]) -> float:
    """Exact diagonal energy of a basis state, constant included."""
    bits = _as_bits(bitstring)
    if len(bits) != op.num_qubits:
        raise ValidationError(
            f"bitstring length {len(bits)} != num_qubits {op.num_qubits}"
        )
    z = [1.0 - 2.0 * b for b in bits]
    total = op.constant
    for q, w in op.linear.items():
        total += w * z[q]
    for (i, j), w in op.quadratic.items():
        total += w * z[i] * z[j]
    for qs, w in op.higher.items():
        prod = 1.0
        for q in qs:
            prod *= z[q]
        total += w * prod
    for qubits, pbits, w in op.projectors:
        if all(bits[q] == b for q, b in zip(qubits, pbits)):
            total += w
    return total


def diagonal_energies(op: IsingOperator, include_constant: bool = True) -> np.ndarray:
    """Energies of all 2**n basis states (index bit q = qubit q)."""
    n = op.num_qubits
    size = 1 << n
    diag = np.full(size, op.constant if include_constant else 0.0, dtype=np.float64)
    idx = np.arange(size, dtype=np.int64)
    zcache: dict[int, np.ndarray] = {}

    def z(q: int) -> np.ndarray:
        if q not in zcache:
            zcache[q] = 1.0 - 2.0 * ((idx >> q) & 1).astype(np.float64)
        return zcache[q]

    for q, w in op.linear.items():
        diag += w * z(q)
    for (i, j), w in op.quadratic.items():
        diag += w * (z(i) * z(j))
    for qs, w in op.higher.items():
        prod = z(qs[0]).copy()
        for q in qs[1:]:
            prod *= z(q)
        diag += w * prod
    for qubits, bits, w in op.projectors:
        match = np.ones(size, dtype=bool)
        for q, b in zip(qubits, bits):
            match &= ((idx >> q) & 1) == b
        diag[match] += w
    return diag


def expand_projectors(op: IsingOperator) -> IsingOperator:
    """Rewrite projector terms into Z-products.

    |b><b| over k qubits expands to 2**-k * sum over subsets S of
    prod_{q in S} (+-Z_q) with sign (-1)^(number of 1-bits of b inside S),
    so the result has terms of degree at most k. Energies are unchanged.
    """
    constant = op.constant
    linear = dict(op.linear)
    quadratic = dict(op.quadratic)
    higher = dict(op.higher)
    for qubits, bits, w in op.projectors:
        k = len(qubits)
        base = w / (1 << k)
        signed = sorted(zip(qubits, bits))
        for size in range(k + 1):
            for subset in combinations(signed, size):
                coeff = base
                for _q, b in subset:
                    if b:
                        coeff = -coeff
                qs = tuple(q for q, _b in subset)
                if size == 0:
                    constant += coeff
                elif size == 1:
                    linear[qs[0]] = linear.get(qs[0], 0.0) + coeff
                elif size == 2:
                    quadratic[qs] = quadratic.get(qs, 0.0) + coeff
                else:
                    higher[qs] = higher.get(qs, 0.0) + coeff
    return IsingOperator(
        num_qubits=op.num_qubits,
        constant=constant,
        linear=_prune(linear),
        quadratic=_prune(quadratic),
        higher=_prune(higher),
    )


# --- helpers ----------------------------------------------------------------


def _prune(terms: dict) -> dict:
    return {k: w for k, w in terms.items() if abs(w) > _PRUNE_TOL}


def _as_bits(bitstring: str | Sequence[int]) -> list[int]:
    if isinstance(bitstring, str):
        if any(c not in "01" for c in bitstring):
            raise ValidationError("bitstring must contain only 0/1")
        return [int(c) for c in bitstring]
    bits = list(bitstring)
    if any(b not in (0, 1) for b in bits):
        raise ValidationError("bits must be 0/1")
    return bits


def _codeword_bits(n: int, width: int) -> tuple[int, ...]:
    return tuple((n >> b) & 1 for b in range(width))


def _site_key(coord: tuple[float, ...]) -> tuple[float, ...]:
    return tuple(round(x / BOUNDARY_TOL) * BOUNDARY_TOL for x in coord)


def index_to_bitstring(index: int, num_qubits: int) -> str:
    """Amplitude index -> bitstring (character q is qubit q)."""
    return "".join("1" if (index >> q) & 1 else "0" for q in range(num_qubits))


def bitstring_to_index(bitstring: str) -> int:
    return sum(1 << q for q, c in enumerate(bitstring) if c == "1")


# --- serialization ----------------------------------------------------------


def operator_to_dict(
    op: IsingOperator,
    layout: QubitLayout | None = None,
    lam: float | None = None,
) -> dict:
    out = {
        "format": OPERATOR_FORMAT,
        "num_qubits": op.num_qubits,
        "constant": op.constant,
        "linear": [[q, w] for q, w in sorted(op.linear.items())],
        "quadratic": [[i, j, w] for (i, j), w in sorted(op.quadratic.items())],
        "projectors": [
            [list(qubits), "".join(str(b) for b in bits), w]
            for qubits, bits, w in op.projectors
        ],
        "lambda": lam,
        "layout": None,
    }
    if op.higher:
        out["higher"] = [[list(qs), w] for qs, w in sorted(op.higher.items())]
    if layout is not None:
        out["layout"] = {
            "formulation": layout.formulation,
            "assignments": {str(nid): list(qs) for nid, qs in layout.assignments.items()},
            "codewords": (
                None
                if layout.codewords is None
                else {str(nid): n for nid, n in layout.codewords.items()}
            ),
        }
    return out


def operator_from_dict(data: Mapping) -> tuple[IsingOperator, QubitLayout | None, float | None]:
    if data.get("format") != OPERATOR_FORMAT:
        raise FormatError(f"expected format {OPERATOR_FORMAT!r}, got {data.get('format')!r}")
    try:
        op = IsingOperator(
            num_qubits=int(data["num_qubits"]),
            constant=float(data["constant"]),
            linear={int(q): float(w) for q, w in data["linear"]},
            quadratic={(int(i), int(j)): float(w) for i, j, w in data["quadratic"]},
            projectors=tuple(
                (tuple(int(q) for q in qubits), tuple(int(c) for c in bits), float(w))
                for qubits, bits, w in data.get("projectors", [])
            ),
            higher={
                tuple(int(q) for q in qs): float(w) for qs, w in data.get("higher", [])
            },
        )
        layout = None
        if data.get("layout"):
            ld = data["layout"]
            layout = QubitLayout(
                formulation=ld["formulation"],
                assignments={int(k): tuple(v) for k, v in ld["assignments"].items()},
                codewords=(
                    None
                    if ld.get("codewords") is None
                    else {int(k): int(v) for k, v in ld["codewords"].items()}
                ),
            )
        lam = data.get("lambda")
        return op, layout, None if lam is None else float(lam)
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"malformed operator file: {exc}") from exc
