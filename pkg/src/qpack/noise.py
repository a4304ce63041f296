"""Calibration-driven noisy execution via stochastic Kraus trajectories.

Channel inventory, all derived from a device calibration snapshot:

  * amplitude damping, gamma = 1 - exp(-t_gate/T1)
  * phase damping, lambda = 1 - exp(-t_gate/T_phi), 1/T_phi = 1/T2 - 1/(2 T1)
  * single-qubit depolarizing, p1 = 1 - single-qubit fidelity
  * two-qubit depolarizing after each CZ, p2 = 1 - CZ fidelity
  * readout bit flip, p_ro = 1 - readout fidelity

Depolarizing convention: p is the probability of applying one uniformly
random non-identity Pauli (3 options on one qubit, 15 on two). A trajectory
samples one Kraus branch per channel per gate and renormalizes, keeping
memory at statevector size; averaging trajectories converges to the exact
open-system evolution (the test suite checks this against a density-matrix
oracle on one and two qubits). Damping is applied before dephasing before
depolarizing at each gate. Idle qubits optionally receive damping/dephasing
for the layer duration (CZ-long when the layer contains any CZ).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from qpack import backends
from qpack.compiler import CompiledCircuit, Prx, compile_qaoa, prx_matrix
from qpack.errors import FormatError, QubitCapError, ValidationError
from qpack.hamiltonian import bitstring_to_index, index_to_bitstring
from qpack.qaoa import DEFAULT_QUBIT_CAP, QaoaParams

CALIBRATION_FORMAT = "qpack-cal/1"

_PAULIS = (
    np.array([[0.0, 1.0], [1.0, 0.0]], dtype=np.complex128),
    np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=np.complex128),
    np.array([[1.0, 0.0], [0.0, -1.0]], dtype=np.complex128),
)


@dataclass(frozen=True)
class QubitCalibration:
    t1_us: float
    t2_us: float
    f1q: float
    f_readout: float

    def __post_init__(self):
        if self.t1_us <= 0 or self.t2_us <= 0:
            raise ValidationError("T1 and T2 must be positive")
        if math.isfinite(self.t2_us) and self.t2_us > 2.0 * self.t1_us + 1e-9:
            raise ValidationError(f"T2={self.t2_us} exceeds 2*T1={2 * self.t1_us}")
        for f in (self.f1q, self.f_readout):
            if not 0.0 < f <= 1.0:
                raise ValidationError("fidelities must lie in (0, 1]")


@dataclass(frozen=True)
class CalibrationData:
    """Per-qubit T1/T2/fidelities, per-coupler CZ fidelity, gate durations."""

    qubits: dict[int, QubitCalibration]
    couplers: dict[tuple[int, int], float]
    gate_1q_ns: float
    cz_ns: float

    def __post_init__(self):
        if self.gate_1q_ns <= 0 or self.cz_ns <= 0:
            raise ValidationError("gate durations must be positive")
        for (i, j), f in self.couplers.items():
            if i >= j:
                raise ValidationError("coupler keys must be ordered (i < j)")
            if i not in self.qubits or j not in self.qubits:
                raise ValidationError(f"coupler ({i},{j}) references unknown qubit")
            if not 0.0 < f <= 1.0:
                raise ValidationError("CZ fidelities must lie in (0, 1]")


@dataclass(frozen=True)
class NoiseModel:
    """Channel rates per qubit/coupler; all probabilities in [0, 1].

    Damping/dephasing rates are precomputed for both gate durations so idle
    periods during CZ-long layers use the right exponent.
    """

    gamma_1q: dict[int, float]
    phi_1q: dict[int, float]
    gamma_cz: dict[int, float]
    phi_cz: dict[int, float]
    p1: dict[int, float]
    p2: dict[tuple[int, int], float]
    p_ro: dict[int, float]

    def __post_init__(self):
        for rates in (self.gamma_1q, self.phi_1q, self.gamma_cz, self.phi_cz,
                      self.p1, self.p2, self.p_ro):
            for v in rates.values():
                if not 0.0 <= v <= 1.0:
                    raise ValidationError("channel rates must lie in [0, 1]")
        _check_kraus_completeness(self)

    @staticmethod
    def noiseless(qubits: Iterable[int]) -> "NoiseModel":
        qs = list(qubits)
        zeros = {q: 0.0 for q in qs}
        return NoiseModel(
            gamma_1q=dict(zeros), phi_1q=dict(zeros), gamma_cz=dict(zeros),
            phi_cz=dict(zeros), p1=dict(zeros), p2={}, p_ro=dict(zeros),
        )

    def scaled(self, factor: float) -> "NoiseModel":
        """Multiply every rate by ``factor`` (clipped to [0, 1])."""

        def scale(d: Mapping) -> dict:
            return {k: min(1.0, v * factor) for k, v in d.items()}

        return NoiseModel(
            gamma_1q=scale(self.gamma_1q), phi_1q=scale(self.phi_1q),
            gamma_cz=scale(self.gamma_cz), phi_cz=scale(self.phi_cz),
            p1=scale(self.p1), p2=scale(self.p2), p_ro=scale(self.p_ro),
        )


def amplitude_damping_kraus(gamma: float) -> list[np.ndarray]:
    return [
        np.array([[1.0, 0.0], [0.0, math.sqrt(1.0 - gamma)]], dtype=np.complex128),
        np.array([[0.0, math.sqrt(gamma)], [0.0, 0.0]], dtype=np.complex128),
    ]


def phase_damping_kraus(lam: float) -> list[np.ndarray]:
    return [
        np.array([[1.0, 0.0], [0.0, math.sqrt(1.0 - lam)]], dtype=np.complex128),
        np.array([[0.0, 0.0], [0.0, math.sqrt(lam)]], dtype=np.complex128),
    ]


def depolarizing_kraus(p: float, num_qubits: int = 1) -> list[np.ndarray]:
    if num_qubits == 1:
        ops = [np.eye(2, dtype=np.complex128) * math.sqrt(1.0 - p)]
        ops += [math.sqrt(p / 3.0) * s for s in _PAULIS]
        return ops
    eye = np.eye(2, dtype=np.complex128)
    singles = (eye,) + _PAULIS
    ops = []
    for a in range(4):
        for b in range(4):
            if a == 0 and b == 0:
                ops.append(math.sqrt(1.0 - p) * np.kron(eye, eye))
            else:
                ops.append(math.sqrt(p / 15.0) * np.kron(singles[a], singles[b]))
    return ops


def bit_flip_kraus(p: float) -> list[np.ndarray]:
    return [
        math.sqrt(1.0 - p) * np.eye(2, dtype=np.complex128),
        math.sqrt(p) * _PAULIS[0],
    ]


def _check_kraus_completeness(model: NoiseModel) -> None:
    samples = []
    for q in model.gamma_1q:
        samples.append(amplitude_damping_kraus(model.gamma_1q[q]))
        samples.append(phase_damping_kraus(model.phi_1q[q]))
        samples.append(amplitude_damping_kraus(model.gamma_cz[q]))
        samples.append(phase_damping_kraus(model.phi_cz[q]))
        samples.append(depolarizing_kraus(model.p1[q]))
        samples.append(bit_flip_kraus(model.p_ro[q]))
    for p in model.p2.values():
        samples.append(depolarizing_kraus(p, num_qubits=2))
    for ops in samples:
        dim = ops[0].shape[0]
        total = sum(k.conj().T @ k for k in ops)
        if not np.allclose(total, np.eye(dim), atol=1e-12):
            raise ValidationError("Kraus completeness violated")


def _decay(t_ns: float, time_constant_us: float) -> float:
    if math.isinf(time_constant_us):
        return 0.0
    return 1.0 - math.exp(-t_ns / (time_constant_us * 1000.0))


def noise_from_calibration(cal: CalibrationData) -> NoiseModel:
    """Channel rates from a calibration snapshot (formulas in the module doc)."""
    gamma_1q, phi_1q, gamma_cz, phi_cz, p1, p_ro = {}, {}, {}, {}, {}, {}
    for q, qc in cal.qubits.items():
        if math.isinf(qc.t2_us):
            t_phi = math.inf
        else:
            inv = 1.0 / qc.t2_us - (0.0 if math.isinf(qc.t1_us) else 0.5 / qc.t1_us)
            t_phi = math.inf if inv <= 1e-15 else 1.0 / inv
        gamma_1q[q] = _decay(cal.gate_1q_ns, qc.t1_us)
        gamma_cz[q] = _decay(cal.cz_ns, qc.t1_us)
        phi_1q[q] = _decay(cal.gate_1q_ns, t_phi)
        phi_cz[q] = _decay(cal.cz_ns, t_phi)
        p1[q] = 1.0 - qc.f1q
        p_ro[q] = 1.0 - qc.f_readout
    p2 = {edge: 1.0 - f for edge, f in cal.couplers.items()}
    return NoiseModel(
        gamma_1q=gamma_1q, phi_1q=phi_1q, gamma_cz=gamma_cz, phi_cz=phi_cz,
        p1=p1, p2=p2, p_ro=p_ro,
    )


@dataclass(frozen=True)
class NoisyResult:
    """Aggregated histogram plus per-trajectory success fractions."""

    histogram: dict[str, int]
    trajectories: int
    shots_per_trajectory: int
    trajectory_success: tuple[float, ...] | None = None

    @property
    def shots(self) -> int:
        return self.trajectories * self.shots_per_trajectory

    @property
    def success_probability(self) -> float | None:
        if self.trajectory_success is None:
            return None
        return float(np.mean(self.trajectory_success))

    @property
    def success_std_error(self) -> float | None:
        """Monte-Carlo standard error over trajectories."""
        if self.trajectory_success is None:
            return None
        if len(self.trajectory_success) < 2:
            return float("inf")
        return float(
            np.std(self.trajectory_success, ddof=1) / math.sqrt(len(self.trajectory_success))
        )


def run_noisy(
    circuit: CompiledCircuit,
    model: NoiseModel,
    trajectories: int,
    shots_per_trajectory: int,
    seed: int = 0,
    optimal_states: Iterable[str] | None = None,
    include_idle: bool = True,
    qubit_cap: int = DEFAULT_QUBIT_CAP,
) -> NoisyResult:
    """Monte-Carlo trajectory execution of a compiled circuit.

    Per gate, one Kraus branch of each attached channel is sampled and the
    state renormalized; readout flips are applied per shot. Trajectory t
    draws its RNG stream from (seed, t), so parallel and serial execution
    agree. Empty circuits measure the initial state.
    """
    if trajectories < 1 or shots_per_trajectory < 1:
        raise ValidationError("trajectories and shots_per_trajectory must be >= 1")
    n = circuit.num_active
    if n > qubit_cap:
        raise QubitCapError(f"{n} qubits exceeds cap {qubit_cap}")
    index = {dev: k for k, dev in enumerate(circuit.qubits)}
    wanted = None
    if optimal_states is not None:
        wanted = np.array(sorted(bitstring_to_index(b) for b in optimal_states))
    p_ro = np.array([model.p_ro.get(dev, 0.0) for dev in circuit.qubits])
    qubit_bits = np.arange(n)

    counts = np.zeros(1 << n, dtype=np.int64)
    success: list[float] = []
    for t in range(trajectories):
        rng = np.random.default_rng(np.random.SeedSequence((seed, t)))
        state = np.zeros(1 << n, dtype=np.complex128)
        state[0] = 1.0
        for layer in circuit.layers:
            touched: set[int] = set()
            has_cz = False
            for gate in layer:
                if isinstance(gate, Prx):
                    k = index[gate.qubit]
                    backends.apply_1q(state, n, k, prx_matrix(gate.theta, gate.phi))
                    _single_qubit_channels(
                        state, n, k, model.gamma_1q.get(gate.qubit, 0.0),
                        model.phi_1q.get(gate.qubit, 0.0),
                        model.p1.get(gate.qubit, 0.0), rng,
                    )
                    touched.add(gate.qubit)
                else:
                    has_cz = True
                    ka, kb = index[gate.a], index[gate.b]
                    backends.apply_cz(state, n, ka, kb)
                    p2 = model.p2.get((gate.a, gate.b), model.p2.get((gate.b, gate.a), 0.0))
                    if p2 > 0.0 and rng.random() < p2:
                        pick = int(rng.integers(15))
                        a, b = divmod(pick + 1, 4)
                        if a:
                            backends.apply_1q(state, n, ka, _PAULIS[a - 1])
                        if b:
                            backends.apply_1q(state, n, kb, _PAULIS[b - 1])
                    touched.update((gate.a, gate.b))
            if include_idle:
                gammas = model.gamma_cz if has_cz else model.gamma_1q
                phis = model.phi_cz if has_cz else model.phi_1q
                for dev in circuit.qubits:
                    if dev not in touched:
                        _single_qubit_channels(
                            state, n, index[dev], gammas.get(dev, 0.0),
                            phis.get(dev, 0.0), 0.0, rng,
                        )
        probs = state.real**2 + state.imag**2
        probs /= probs.sum()
        drawn = rng.choice(1 << n, size=shots_per_trajectory, p=probs)
        bits = (drawn[:, None] >> qubit_bits) & 1
        flips = rng.random(bits.shape) < p_ro
        bits ^= flips
        final = (bits << qubit_bits).sum(axis=1)
        counts += np.bincount(final, minlength=1 << n)
        if wanted is not None:
            hits = int(np.isin(final, wanted).sum())
            success.append(hits / shots_per_trajectory)

    nonzero = np.nonzero(counts)[0]
    histogram = {index_to_bitstring(int(k), n): int(counts[k]) for k in nonzero}
    return NoisyResult(
        histogram=histogram,
        trajectories=trajectories,
        shots_per_trajectory=shots_per_trajectory,
        trajectory_success=tuple(success) if wanted is not None else None,
    )


def _single_qubit_channels(
    state: np.ndarray, n: int, k: int,
    gamma: float, lam: float, p_dep: float, rng,
) -> None:
    """Sample amplitude damping, then phase damping, then depolarizing."""
    if gamma > 0.0:
        p1 = backends.prob_one(state, n, k)
        jump = gamma * p1
        if rng.random() < jump:
            m = np.array([[0.0, 1.0 / math.sqrt(p1)], [0.0, 0.0]], dtype=np.complex128)
            backends.apply_1q(state, n, k, m)
        else:
            norm = math.sqrt(1.0 - jump)
            m = np.array(
                [[1.0 / norm, 0.0], [0.0, math.sqrt(1.0 - gamma) / norm]],
                dtype=np.complex128,
            )
            backends.apply_1q(state, n, k, m)
    if lam > 0.0:
        p1 = backends.prob_one(state, n, k)
        jump = lam * p1
        if rng.random() < jump:
            m = np.array([[0.0, 0.0], [0.0, 1.0 / math.sqrt(p1)]], dtype=np.complex128)
            backends.apply_1q(state, n, k, m)
        else:
            norm = math.sqrt(1.0 - jump)
            m = np.array(
                [[1.0 / norm, 0.0], [0.0, math.sqrt(1.0 - lam) / norm]],
                dtype=np.complex128,
            )
            backends.apply_1q(state, n, k, m)
    if p_dep > 0.0 and rng.random() < p_dep:
        backends.apply_1q(state, n, k, _PAULIS[int(rng.integers(3))])


@dataclass(frozen=True)
class NoisySweepRow:
    p: int
    success_probability: float
    std_error: float
    cz_count: int


def noisy_depth_sweep(
    op,
    params_by_p: Mapping[int, QaoaParams],
    model: NoiseModel,
    cmap,
    placement: Mapping[int, int] | None,
    ps: Sequence[int],
    trajectories: int,
    shots_per_trajectory: int,
    seed: int = 0,
    optimal_states: Iterable[str] | None = None,
    include_idle: bool = True,
) -> list[NoisySweepRow]:
    """Compile and noisily execute pre-trained parameters per depth.

    Training stays noiseless; this sweep only measures how noise erodes the
    sampled success probability as the circuit deepens.
    """
    rows = []
    optimal = None if optimal_states is None else set(optimal_states)
    for p in ps:
        if p not in params_by_p:
            raise ValidationError(f"no trained parameters supplied for p={p}")
        circuit = compile_qaoa(op, params_by_p[p], cmap, placement)
        result = run_noisy(
            circuit, model, trajectories, shots_per_trajectory,
            seed=seed + p, optimal_states=optimal, include_idle=include_idle,
        )
        rows.append(
            NoisySweepRow(
                p=p,
                success_probability=result.success_probability,
                std_error=result.success_std_error,
                cz_count=circuit.cz_count,
            )
        )
    return rows


# --- serialization ----------------------------------------------------------


def _num_out(v: float):
    return "inf" if math.isinf(v) else v


def _num_in(v) -> float:
    if v == "inf":
        return math.inf
    return float(v)


def calibration_to_dict(cal: CalibrationData, description: str | None = None) -> dict:
    out = {
        "format": CALIBRATION_FORMAT,
        "qubits": {
            str(q): {
                "t1_us": _num_out(qc.t1_us),
                "t2_us": _num_out(qc.t2_us),
                "f1q": qc.f1q,
                "f_readout": qc.f_readout,
            }
            for q, qc in cal.qubits.items()
        },
        "couplers": {f"{i}-{j}": {"f_cz": f} for (i, j), f in cal.couplers.items()},
        "durations": {"gate_1q_ns": cal.gate_1q_ns, "cz_ns": cal.cz_ns},
    }
    if description is not None:
        out["description"] = description
    return out


def calibration_from_dict(data: Mapping) -> CalibrationData:
    if data.get("format") != CALIBRATION_FORMAT:
        raise FormatError(
            f"expected format {CALIBRATION_FORMAT!r}, got {data.get('format')!r}"
        )
    try:
        qubits = {
            int(q): QubitCalibration(
                t1_us=_num_in(qc["t1_us"]),
                t2_us=_num_in(qc["t2_us"]),
                f1q=float(qc["f1q"]),
                f_readout=float(qc["f_readout"]),
            )
            for q, qc in data["qubits"].items()
        }
        couplers = {}
        for key, rec in data["couplers"].items():
            i, j = key.split("-")
            couplers[(int(i), int(j))] = float(rec["f_cz"])
        durations = data["durations"]
        return CalibrationData(
            qubits=qubits,
            couplers=couplers,
            gate_1q_ns=float(durations["gate_1q_ns"]),
            cz_ns=float(durations["cz_ns"]),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"malformed calibration file: {exc}") from exc
