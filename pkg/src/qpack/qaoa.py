"""Noiseless statevector QAOA engine.

The ansatz alternates a diagonal cost phase exp(-i*alpha*H_C) with the
transverse mixer exp(-i*beta*H_M), H_M = -sum X, starting from the uniform
superposition. Training is derivative-free (Nelder-Mead simplex) from a
linear-ramp initialization (cost angles ascending, mixer angles descending,
mimicking an annealing schedule) plus seeded random restarts. The operator
constant is ignored during evolution (global phase) but reported in every
expectation value.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy.optimize import minimize

from qpack import backends
from qpack.errors import FormatError, QubitCapError, ValidationError
from qpack.hamiltonian import (
    IsingOperator,
    XMixer,
    diagonal_energies,
    index_to_bitstring,
)

RESULT_FORMAT = "qpack-qaoa/1"
DEFAULT_QUBIT_CAP = 26
HISTOGRAM_EXPORT_CAP = 1024


@dataclass(frozen=True)
class QaoaParams:
    """Per-layer cost angles (alphas) and mixer angles (betas)."""

    alphas: tuple[float, ...]
    betas: tuple[float, ...]

    def __post_init__(self):
        if len(self.alphas) != len(self.betas):
            raise ValidationError("alphas and betas must have equal length")
        if not self.alphas:
            raise ValidationError("at least one layer is required")

    @property
    def p(self) -> int:
        return len(self.alphas)

    def canonical(self) -> "QaoaParams":
        """Wrap angles into alpha in [0, 2pi), beta in [0, pi)."""
        two_pi = 2.0 * np.pi
        return QaoaParams(
            alphas=tuple(float(a % two_pi) for a in self.alphas),
            betas=tuple(float(b % np.pi) for b in self.betas),
        )

    def flat(self) -> np.ndarray:
        return np.array(self.alphas + self.betas, dtype=float)

    @staticmethod
    def from_flat(x: Sequence[float]) -> "QaoaParams":
        p = len(x) // 2
        return QaoaParams(tuple(float(v) for v in x[:p]), tuple(float(v) for v in x[p:]))


@dataclass(frozen=True)
class QaoaResult:
    """Sampled run: histogram counts (plus any export tail) sum to ``shots``.

    ``tail_counts`` is zero for fresh samples; results re-read from a capped
    export carry the dropped low-count mass there.
    """

    params: QaoaParams
    energy_trace: tuple[float, ...]
    histogram: dict[str, int]
    success_probability: float | None
    seed: int
    shots: int
    expectation: float
    tail_counts: int = 0

    def __post_init__(self):
        if sum(self.histogram.values()) + self.tail_counts != self.shots:
            raise ValidationError("histogram counts must sum to shots")
        if self.success_probability is not None and not 0.0 <= self.success_probability <= 1.0:
            raise ValidationError("success_probability must lie in [0, 1]")

    def modal_bitstring(self) -> str:
        return min(self.histogram, key=lambda b: (-self.histogram[b], b))


def _check_dims(op: IsingOperator, mixer: XMixer, qubit_cap: int) -> None:
    if op.has_projectors:
        raise ValidationError("expand projectors before QAOA evolution")
    if mixer.num_qubits != op.num_qubits:
        raise ValidationError("mixer/operator qubit count mismatch")
    if op.num_qubits > qubit_cap:
        raise QubitCapError(f"{op.num_qubits} qubits exceeds cap {qubit_cap}")


def initial_state(num_qubits: int) -> np.ndarray:
    """Uniform superposition, the mixer ground state."""
    size = 1 << num_qubits
    state = np.full(size, 1.0 / np.sqrt(size), dtype=np.complex128)
    return state


@dataclass(frozen=True)
class CostPhases:
    """Cost diagonal prepared for fast phase layers.

    Packing diagonals take few distinct values, so exp(-i*alpha*E) is
    evaluated once per unique energy and gathered; dense diagonals fall back
    to the direct per-amplitude path.
    """

    diag: np.ndarray
    codes: np.ndarray | None
    uniq: np.ndarray | None

    @staticmethod
    def build(op: IsingOperator) -> "CostPhases":
        diag = diagonal_energies(op, include_constant=False)
        uniq, codes = np.unique(diag, return_inverse=True)
        if uniq.size * 16 <= diag.size:
            return CostPhases(diag=diag, codes=codes.astype(np.int32), uniq=uniq)
        return CostPhases(diag=diag, codes=None, uniq=None)

    def apply(self, state: np.ndarray, alpha: float) -> None:
        if self.uniq is None:
            backends.apply_phase(state, self.diag, alpha)
        else:
            table = np.exp(-1j * alpha * self.uniq)
            backends.apply_phase_table(state, self.codes, table)


def evolve(
    op: IsingOperator,
    mixer: XMixer,
    params: QaoaParams,
    qubit_cap: int = DEFAULT_QUBIT_CAP,
    phases: CostPhases | None = None,
) -> np.ndarray:
    """Exact statevector after the full alternating ansatz."""
    _check_dims(op, mixer, qubit_cap)
    n = op.num_qubits
    if phases is None:
        phases = CostPhases.build(op)
    state = initial_state(n)
    for alpha, beta in zip(params.alphas, params.betas):
        phases.apply(state, alpha)
        backends.apply_rx_all(state, n, beta)
    return state


def expectation(op: IsingOperator, state: np.ndarray) -> float:
    """<state|H_C|state> including the constant offset."""
    if state.size != 1 << op.num_qubits:
        raise ValidationError("statevector dimension mismatch")
    diag = diagonal_energies(op, include_constant=True)
    probs = state.real**2 + state.imag**2
    return float(diag @ probs)


@dataclass(frozen=True)
class TrainConfig:
    starts: int = 8
    max_evals: int | None = None  # per start; default scales with 2p
    ramp_alpha: float = 1.0
    ramp_beta: float = 0.6
    perturbation: float = 0.3
    xatol: float = 1e-3
    fatol: float = 1e-5


@dataclass(frozen=True)
class TrainResult:
    params: QaoaParams
    energy_trace: tuple[float, ...]
    expectation: float


def linear_ramp(p: int, alpha_max: float, beta_max: float) -> QaoaParams:
    """Annealing-like initialization: alphas ascend, betas descend."""
    fracs = [(k + 0.5) / p for k in range(p)]
    return QaoaParams(
        alphas=tuple(alpha_max * f for f in fracs),
        betas=tuple(beta_max * (1.0 - f) for f in fracs),
    )


def train(
    op: IsingOperator,
    mixer: XMixer,
    p: int,
    config: TrainConfig | None = None,
    seed: int = 0,
    extra_starts: Iterable[QaoaParams] = (),
    qubit_cap: int = DEFAULT_QUBIT_CAP,
) -> TrainResult:
    """Derivative-free simplex search over the 2p angles, multi-start.

    Start points: the linear ramp, any ``extra_starts`` (e.g. parameters
    extended from a shallower depth), and seeded Gaussian perturbations of
    the ramp, ``config.starts`` points in total. Returns the best point by
    expectation; fully reproducible from the seed.
    """
    if p < 1:
        raise ValidationError("p must be at least 1")
    config = config or TrainConfig()
    _check_dims(op, mixer, qubit_cap)
    phases = CostPhases.build(op)
    probs_diag = phases.diag + op.constant

    def objective(x: np.ndarray, trace: list[float]) -> float:
        state = evolve(op, mixer, QaoaParams.from_flat(x), qubit_cap, phases=phases)
        value = float(probs_diag @ (state.real**2 + state.imag**2))
        trace.append(value)
        return value

    rng = np.random.default_rng(seed)
    ramp = linear_ramp(p, config.ramp_alpha, config.ramp_beta)
    starts: list[np.ndarray] = [ramp.flat()]
    for extra in extra_starts:
        if extra.p != p:
            raise ValidationError("extra start has wrong layer count")
        starts.append(extra.flat())
    while len(starts) < config.starts:
        starts.append(ramp.flat() + rng.normal(0.0, config.perturbation, size=2 * p))

    max_evals = config.max_evals or (120 * 2 * p + 80)
    best_value = np.inf
    best_x = starts[0]
    best_trace: list[float] = []
    for x0 in starts:
        trace: list[float] = []
        res = minimize(
            objective,
            x0,
            args=(trace,),
            method="Nelder-Mead",
            options={
                "maxfev": max_evals,
                "xatol": config.xatol,
                "fatol": config.fatol,
            },
        )
        if res.fun < best_value:
            best_value = float(res.fun)
            best_x = res.x
            best_trace = trace
    return TrainResult(
        params=QaoaParams.from_flat(best_x).canonical(),
        energy_trace=tuple(best_trace),
        expectation=best_value,
    )


def sample(
    op: IsingOperator,
    mixer: XMixer,
    params: QaoaParams,
    shots: int,
    seed: int = 0,
    optimal_states: Iterable[str] | None = None,
    energy_trace: Sequence[float] = (),
    qubit_cap: int = DEFAULT_QUBIT_CAP,
) -> QaoaResult:
    """Multinomial sampling of the evolved state.

    ``optimal_states`` (bitstrings) defines the success event; the success
    probability is the sampled fraction of shots landing in that set.
    """
    if shots < 1:
        raise ValidationError("shots must be >= 1")
    state = evolve(op, mixer, params, qubit_cap)
    probs = state.real**2 + state.imag**2
    probs /= probs.sum()
    exp_value = float(diagonal_energies(op, include_constant=True) @ probs)
    rng = np.random.default_rng(seed)
    counts = rng.multinomial(shots, probs)
    nonzero = np.nonzero(counts)[0]
    n = op.num_qubits
    histogram = {index_to_bitstring(int(k), n): int(counts[k]) for k in nonzero}
    success = None
    if optimal_states is not None:
        wanted = set(optimal_states)
        success = sum(c for b, c in histogram.items() if b in wanted) / shots
    return QaoaResult(
        params=params,
        energy_trace=tuple(energy_trace),
        histogram=histogram,
        success_probability=success,
        seed=seed,
        shots=shots,
        expectation=exp_value,
    )


def transfer_params(
    params: QaoaParams,
    op: IsingOperator,
    mixer: XMixer,
    shots: int,
    seed: int = 0,
    optimal_states: Iterable[str] | None = None,
    expected_p: int | None = None,
    qubit_cap: int = DEFAULT_QUBIT_CAP,
) -> QaoaResult:
    """Evaluate a circuit at angles trained elsewhere (C_full(rho_sub))."""
    if expected_p is not None and params.p != expected_p:
        raise ValidationError(f"params have p={params.p}, expected {expected_p}")
    return sample(op, mixer, params, shots, seed, optimal_states, qubit_cap=qubit_cap)


@dataclass(frozen=True)
class DepthSweepRow:
    lam: float
    p: int
    success_probability: float
    modal_is_optimal: bool
    expectation: float
    params: QaoaParams


def depth_sweep(
    graph,
    ps: Sequence[int],
    lams: Sequence[float],
    shots: int,
    seed: int = 0,
    config: TrainConfig | None = None,
    qubit_cap: int = DEFAULT_QUBIT_CAP,
) -> list[DepthSweepRow]:
    """Train and sample over a (lambda, depth) grid on one graph.

    The success event is the lambda-independent set of maximum independent
    sets, supplied by the exact solver. Within one lambda, each depth seeds
    the next through interpolated warm starts.
    """
    from qpack.hamiltonian import mis_hamiltonian
    from qpack.solver import exact_mis

    if not ps or not lams:
        raise ValidationError("ps and lams must be non-empty")
    mis = exact_mis(graph, enumerate_all=True)
    rows: list[DepthSweepRow] = []
    for lam in lams:
        op, layout = mis_hamiltonian(graph, lam)
        optimal = {
            witness_bitstring(layout, w, op.num_qubits) for w in mis.all_optima
        }
        mixer = XMixer(op.num_qubits)
        prev: QaoaParams | None = None
        for p in sorted(ps):
            extra = [] if prev is None else [extend_params(prev, p)]
            trained = train(
                op, mixer, p, config=config, seed=seed, extra_starts=extra,
                qubit_cap=qubit_cap,
            )
            result = sample(
                op, mixer, trained.params, shots,
                seed=seed + p, optimal_states=optimal, qubit_cap=qubit_cap,
            )
            prev = trained.params
            rows.append(
                DepthSweepRow(
                    lam=float(lam),
                    p=p,
                    success_probability=result.success_probability,
                    modal_is_optimal=result.modal_bitstring() in optimal,
                    expectation=result.expectation,
                    params=trained.params,
                )
            )
    return rows


def extend_params(params: QaoaParams, p: int) -> QaoaParams:
    """Interpolate a trained schedule onto a different layer count."""
    if p == params.p:
        return params
    old = np.linspace(0.0, 1.0, params.p)
    new = np.linspace(0.0, 1.0, p)
    if params.p == 1:
        old = np.array([0.5])
    return QaoaParams(
        alphas=tuple(np.interp(new, old, params.alphas)),
        betas=tuple(np.interp(new, old, params.betas)),
    )


def witness_bitstring(layout, witness: Iterable[int], num_qubits: int) -> str:
    """Bitstring with 1s on the qubits of the witness nodes."""
    bits = ["0"] * num_qubits
    for nid in witness:
        bits[layout.qubit_of(nid)] = "1"
    return "".join(bits)


# --- serialization ----------------------------------------------------------


def result_to_dict(result: QaoaResult) -> dict:
    items = sorted(result.histogram.items(), key=lambda kv: (-kv[1], kv[0]))
    kept = items[:HISTOGRAM_EXPORT_CAP]
    tail = result.tail_counts + sum(c for _b, c in items[HISTOGRAM_EXPORT_CAP:])
    return {
        "format": RESULT_FORMAT,
        "params": {
            "p": result.params.p,
            "alphas": list(result.params.alphas),
            "betas": list(result.params.betas),
        },
        "histogram": {b: c for b, c in kept},
        "tail_counts": tail,
        "success_probability": result.success_probability,
        "energy_trace": list(result.energy_trace),
        "seed": result.seed,
        "shots": result.shots,
        "expectation": result.expectation,
    }


def result_from_dict(data: Mapping) -> QaoaResult:
    if data.get("format") != RESULT_FORMAT:
        raise FormatError(f"expected format {RESULT_FORMAT!r}, got {data.get('format')!r}")
    try:
        params = QaoaParams(
            alphas=tuple(float(a) for a in data["params"]["alphas"]),
            betas=tuple(float(b) for b in data["params"]["betas"]),
        )
        histogram = {str(b): int(c) for b, c in data["histogram"].items()}
        return QaoaResult(
            params=params,
            energy_trace=tuple(float(e) for e in data["energy_trace"]),
            histogram=histogram,
            success_probability=(
                None
                if data["success_probability"] is None
                else float(data["success_probability"])
            ),
            seed=int(data["seed"]),
            shots=int(data["shots"]),
            expectation=float(data["expectation"]),
            tail_counts=int(data.get("tail_counts", 0)),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"malformed result file: {exc}") from exc
