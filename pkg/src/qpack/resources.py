"""Closed-form qubit and CNOT bounds for both heterogeneous encodings.

For a d-dimensional lattice with q points per side inside a boundary of
radius R_b, radii set R with maximum r_m:

  second quantization:  qubits <= |R| q^d
                        CNOTs per cost layer <= |R| (r_m q^2 / R_b)^d
  first quantization:   register width w = ceil(log2(|R|+1))
                        qubits <= w q^d
                        CNOTs per cost layer <= |R| 2^(2w) (r_m q / R_b)^d

The loose approximations (log|R| q^d and |R|^3 (r_m q / R_b)^d) are reported
alongside the exact ceiling forms. ``empirical_vs_bound`` rebuilds the graph
and asserts the qubit and edge-count bounds; the per-node degree reference
(r_m q / R_b)^d drops geometric constants and is reported with its slack
rather than asserted (it already fails on the bundled grid instance, whose
max degree is 4 against a reference of ~2).

Accounting convention: one ZZ term costs two CNOT-equivalents (CZ), so
compiled CZ counts divided by 2p are compared against the per-layer bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

from qpack.errors import BoundViolationError, ValidationError
from qpack.geometry import PackingScenario, build_graph, build_lattice


@dataclass(frozen=True)
class ScalingInput:
    num_radii: int
    points_per_side: int
    dimension: int
    max_radius: float
    boundary_radius: float

    def __post_init__(self):
        if self.num_radii < 1:
            raise ValidationError("num_radii must be >= 1")
        if self.points_per_side < 1:
            raise ValidationError("points_per_side must be >= 1")
        if self.dimension not in (2, 3):
            raise ValidationError("dimension must be 2 or 3")
        if self.max_radius <= 0 or self.boundary_radius <= 0:
            raise ValidationError("radii must be positive")
        if self.max_radius > self.boundary_radius:
            raise ValidationError("max_radius cannot exceed boundary_radius")


@dataclass(frozen=True)
class SecondQuantBounds:
    qubits: float
    qubits_ceil: int
    cnots: float
    cnots_ceil: int
    qubits_approx: float
    cnots_approx: float


@dataclass(frozen=True)
class FirstQuantBounds:
    register_width: int
    qubits: float
    qubits_ceil: int
    cnots: float
    cnots_ceil: int
    qubits_approx: float
    cnots_approx: float


def second_quant_bounds(si: ScalingInput) -> SecondQuantBounds:
    """Qubit and per-layer CNOT bounds for one qubit per placement."""
    qubits = si.num_radii * si.points_per_side**si.dimension
    cnots = si.num_radii * (
        si.max_radius * si.points_per_side**2 / si.boundary_radius
    ) ** si.dimension
    return SecondQuantBounds(
        qubits=float(qubits),
        qubits_ceil=math.ceil(qubits),
        cnots=cnots,
        cnots_ceil=math.ceil(cnots),
        qubits_approx=float(qubits),
        cnots_approx=cnots,
    )


def first_quant_bounds(si: ScalingInput) -> FirstQuantBounds:
    """Bounds for per-site registers of width ceil(log2(|R|+1))."""
    width = max(1, math.ceil(math.log2(si.num_radii + 1)))
    qubits = width * si.points_per_side**si.dimension
    degree = (si.max_radius * si.points_per_side / si.boundary_radius) ** si.dimension
    cnots = si.num_radii * (1 << (2 * width)) * degree
    return FirstQuantBounds(
        register_width=width,
        qubits=float(qubits),
        qubits_ceil=math.ceil(qubits),
        cnots=cnots,
        cnots_ceil=math.ceil(cnots),
        qubits_approx=math.log2(max(si.num_radii, 2)) * si.points_per_side**si.dimension,
        cnots_approx=si.num_radii**3 * degree,
    )


@dataclass(frozen=True)
class EmpiricalReport:
    scaling_input: ScalingInput
    span_input: ScalingInput
    formulation: str
    actual_qubits: int
    actual_terms: int
    actual_max_degree: int
    qubit_bound: float
    cnot_bound: float
    cnot_bound_span: float
    degree_reference: float
    qubit_slack: float
    cnot_slack: float
    note: str


def scaling_input_from_scenario(scenario: PackingScenario) -> ScalingInput:
    """(q, d, r_m, R_b) with q = points per side of the constructed lattice."""
    per_side = 1
    for r in scenario.radii:
        pts = build_lattice(scenario, r)
        if not pts:
            continue
        for axis in range(scenario.dimension):
            values = {p[axis] for p in pts}
            per_side = max(per_side, len(values))
    return ScalingInput(
        num_radii=len(scenario.radii),
        points_per_side=per_side,
        dimension=scenario.dimension,
        max_radius=max(scenario.radii),
        boundary_radius=scenario.boundary_radius,
    )


def span_input_from_scenario(scenario: PackingScenario) -> ScalingInput:
    """Same, but q from the diameter-spanning lattice (a ~ 2 R_b / q).

    The CNOT-count derivations implicitly assume this lattice density; the
    clipped lattice is sparser, so bounds evaluated at the span q are
    conservative for the edge count.
    """
    if scenario.spacing is not None:
        a = scenario.spacing
    else:
        a = min(scenario.spacing_per_radius)
    per_side = int(2.0 * scenario.boundary_radius / a) + 1
    return ScalingInput(
        num_radii=len(scenario.radii),
        points_per_side=per_side,
        dimension=scenario.dimension,
        max_radius=max(scenario.radii),
        boundary_radius=scenario.boundary_radius,
    )


def check_bounds(actual_qubits: int, qubit_bound: float,
                 actual_terms: int, cnot_bound: float) -> None:
    violations = []
    if actual_qubits > qubit_bound + 1e-9:
        violations.append(f"qubits {actual_qubits} > bound {qubit_bound:.3f}")
    if actual_terms > cnot_bound + 1e-9:
        violations.append(f"terms {actual_terms} > bound {cnot_bound:.3f}")
    if violations:
        raise BoundViolationError("; ".join(violations))


def empirical_vs_bound(
    scenario: PackingScenario, formulation: str = "second"
) -> EmpiricalReport:
    """Construct the instance and check it against the closed-form bounds.

    The qubit count is checked against the bound at the constructed
    lattice's q; the ZZ-term count against the CNOT bound at the
    diameter-span q that the bound's derivation assumes (one ZZ term = two
    CNOT-equivalents; bounds count a single cost layer). Violations raise
    BoundViolationError.
    """
    if formulation not in ("second", "first"):
        raise ValidationError("formulation must be 'second' or 'first'")
    graph = build_graph(scenario)
    si = scaling_input_from_scenario(scenario)
    si_span = span_input_from_scenario(scenario)
    if formulation == "second":
        bounds = second_quant_bounds(si)
        bounds_span = second_quant_bounds(si_span)
        actual_qubits = graph.num_nodes
        actual_terms = graph.num_edges
    else:
        fb = first_quant_bounds(si)
        bounds = fb
        bounds_span = first_quant_bounds(si_span)
        sites = {graph.nodes[nid][0] for nid in graph.nodes}
        actual_qubits = fb.register_width * len(sites)
        actual_terms = sum(
            1 for i, j, _k in graph.edges if graph.nodes[i][0] != graph.nodes[j][0]
        )
    degree_reference = (
        si.max_radius * si.points_per_side / si.boundary_radius
    ) ** si.dimension
    check_bounds(actual_qubits, bounds.qubits, actual_terms, bounds_span.cnots)
    return EmpiricalReport(
        scaling_input=si,
        span_input=si_span,
        formulation=formulation,
        actual_qubits=actual_qubits,
        actual_terms=actual_terms,
        actual_max_degree=graph.max_degree(),
        qubit_bound=bounds.qubits,
        cnot_bound=bounds.cnots,
        cnot_bound_span=bounds_span.cnots,
        degree_reference=degree_reference,
        qubit_slack=bounds.qubits / max(actual_qubits, 1),
        cnot_slack=bounds_span.cnots / max(actual_terms, 1),
        note=(
            "qubit bound evaluated at the constructed lattice's q "
            f"({si.points_per_side}); the CNOT bound's derivation assumes a "
            f"diameter-spanning lattice (a ~ 2*R_b/q), so the enforced edge "
            f"check uses the span q ({si_span.points_per_side}). The "
            "per-node degree reference drops geometric constants and is "
            "informational only."
        ),
    )


def sweep_scenarios(scenarios: Iterable[PackingScenario]) -> list[EmpiricalReport]:
    """empirical_vs_bound over many scenarios; any violation raises."""
    return [empirical_vs_bound(s) for s in scenarios]
