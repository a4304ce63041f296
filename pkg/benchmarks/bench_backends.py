"""Benchmark the compiled statevector core against the NumPy reference.

Two regimes matter:
  * large states (QAOA training sweeps the full register every layer);
  * tiny states at high gate rates (trajectory noise simulation), where
    per-call dispatch overhead dominates.

Run:  python benchmarks/bench_backends.py [--qubits 18] [--repeats 20]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from qpack.backends import get_backend
from qpack.hamiltonian import XMixer, mis_hamiltonian
from qpack.instances import garnet_graph
from qpack.qaoa import CostPhases, QaoaParams, evolve


def random_state(n: int, seed: int = 0) -> np.ndarray:
    rng = np.random.default_rng(seed)
    state = rng.normal(size=1 << n) + 1j * rng.normal(size=1 << n)
    state /= np.linalg.norm(state)
    return state.astype(np.complex128)


def time_call(fn, repeats: int) -> float:
    fn()  # warm-up
    start = time.perf_counter()
    for _ in range(repeats):
        fn()
    return (time.perf_counter() - start) / repeats


def bench_kernels(backend, n: int, repeats: int) -> dict[str, float]:
    state = random_state(n)
    diag = np.random.default_rng(1).normal(size=1 << n)
    uniq, inv = np.unique(np.round(diag, 1), return_inverse=True)
    codes = inv.astype(np.int32)
    table = np.exp(-1j * 0.3 * uniq)
    u = np.array([[0.6, 0.8j], [0.8j, 0.6]], dtype=np.complex128)
    return {
        "apply_phase": time_call(lambda: backend.apply_phase(state, diag, 0.3), repeats),
        "apply_phase_table": time_call(
            lambda: backend.apply_phase_table(state, codes, table), repeats
        ),
        "apply_rx_all": time_call(lambda: backend.apply_rx_all(state, n, 0.4), repeats),
        "apply_1q": time_call(lambda: backend.apply_1q(state, n, n // 2, u), repeats),
        "apply_cz": time_call(lambda: backend.apply_cz(state, n, 0, n - 1), repeats),
    }


def bench_small_gates(backend, repeats: int) -> float:
    """Trajectory regime: thousands of 1q gates on a 10-qubit state."""
    n = 10
    state = random_state(n, 3)
    u = np.array([[0.6, 0.8j], [0.8j, 0.6]], dtype=np.complex128)

    def burst():
        for q in range(n):
            for _ in range(100):
                backend.apply_1q(state, n, q, u)

    return time_call(burst, max(10, repeats)) / (100 * n)


def bench_evolve(n_repeats: int) -> dict[str, float]:
    """End-to-end p=3 evolution on the bundled 18-qubit instance."""
    import qpack.backends as backends_mod

    op, _ = mis_hamiltonian(garnet_graph(), 0.5)
    mixer = XMixer(op.num_qubits)
    phases = CostPhases.build(op)
    params = QaoaParams((0.3, 0.5, 0.7), (0.6, 0.4, 0.2))
    out = {}
    saved = {
        name: getattr(backends_mod, name)
        for name in ("apply_phase", "apply_phase_table", "apply_rx_all")
    }
    for label in ("compiled", "reference"):
        try:
            impl, _ = get_backend(label)
        except ImportError:
            continue
        for name in saved:
            setattr(backends_mod, name, getattr(impl, name))
        out[label] = time_call(
            lambda: evolve(op, mixer, params, phases=phases), n_repeats
        )
    for name, fn in saved.items():
        setattr(backends_mod, name, fn)
    return out


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--qubits", type=int, default=18)
    parser.add_argument("--repeats", type=int, default=20)
    args = parser.parse_args()

    backends = {}
    for label in ("compiled", "reference"):
        try:
            backends[label], _ = get_backend(label)
        except ImportError:
            print(f"{label}: not available")
    if not backends:
        return

    print(f"== kernel timings at {args.qubits} qubits (ms/call) ==")
    results = {label: bench_kernels(b, args.qubits, args.repeats)
               for label, b in backends.items()}
    kernels = next(iter(results.values())).keys()
    width = max(len(k) for k in kernels)
    header = "  ".join(f"{label:>12}" for label in results)
    print(f"{'kernel':<{width}}  {header}  speedup")
    for kernel in kernels:
        times = [results[label][kernel] for label in results]
        cells = "  ".join(f"{t * 1e3:12.3f}" for t in times)
        speedup = times[-1] / times[0] if len(times) == 2 and times[0] > 0 else 1.0
        print(f"{kernel:<{width}}  {cells}  {speedup:6.1f}x")

    print("\n== trajectory regime: 1q gate on 10 qubits (us/gate) ==")
    for label, backend in backends.items():
        per_gate = bench_small_gates(backend, args.repeats)
        print(f"{label:>12}: {per_gate * 1e6:8.2f}")

    print("\n== end-to-end evolve, bundled 18-qubit instance, p=3 (ms) ==")
    for label, t in bench_evolve(args.repeats).items():
        print(f"{label:>12}: {t * 1e3:8.1f}")


if __name__ == "__main__":
    main()
