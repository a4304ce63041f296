"""Config-driven experiment harness behind ``qpack experiment``.

Three named studies, each writing figure-ready CSVs plus a machine-readable
summary with pass/fail per configured assertion:

  * ``lambda-sweep``: trained success probability over a (lambda, p) grid;
    asserts chosen lambdas never place the optimum as the modal state.
  * ``depth-sweep``: ideal curve over p, optionally a noisy curve from a
    calibration file; asserts the ideal upward trend and the noisy
    intermediate peak.
  * ``param-conc``: the three parameter-concentration curves
    C_sub(rho_sub), C_full(rho_sub), C_full(rho_full); asserts the transfer
    ratio at a designated depth.

Every cell is deterministic given the config seed. QPACK_THREADS > 1 lets
independent sweep cells run on a thread pool; results are always assembled
in cell order, so the output is identical either way.
"""

from __future__ import annotations

import csv
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Mapping, Sequence

import numpy as np

from qpack.errors import FormatError, ValidationError
from qpack.geometry import PackingGraph, extract_subgraph, graph_from_dict, read_json, write_json
from qpack.hamiltonian import XMixer, mis_hamiltonian
from qpack.noise import NoiseModel, calibration_from_dict, noise_from_calibration, noisy_depth_sweep
from qpack.qaoa import (
    QaoaParams,
    TrainConfig,
    depth_sweep,
    extend_params,
    sample,
    train,
    witness_bitstring,
)
from qpack.solver import exact_mis

SUMMARY_FORMAT = "qpack-experiment-summary/1"


@dataclass(frozen=True)
class Assertion:
    name: str
    passed: bool
    detail: str


@dataclass(frozen=True)
class ExperimentOutcome:
    name: str
    csv_files: tuple[str, ...]
    assertions: tuple[Assertion, ...]

    @property
    def passed(self) -> bool:
        return all(a.passed for a in self.assertions)


def _thread_workers() -> int:
    raw = os.environ.get("QPACK_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _map_cells(fn: Callable, cells: Sequence) -> list:
    workers = _thread_workers()
    if workers == 1 or len(cells) <= 1:
        return [fn(c) for c in cells]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, cells))


def load_graph_spec(spec, base: Path) -> PackingGraph:
    """Graph from a config entry: a file path or a builtin name."""
    from qpack.instances import garnet_graph, garnet_subgraph_ids

    if isinstance(spec, str):
        if spec == "garnet":
            return garnet_graph()
        if spec.startswith("garnet-sub"):
            size = int(spec.removeprefix("garnet-sub"))
            g = garnet_graph()
            return extract_subgraph(g, garnet_subgraph_ids(g, size))
        return graph_from_dict(read_json(base / spec))
    raise FormatError(f"unsupported graph spec {spec!r}")


def _train_config(cfg: Mapping) -> TrainConfig:
    section = cfg.get("train", {})
    return TrainConfig(
        starts=int(section.get("starts", 8)),
        max_evals=section.get("max_evals"),
        perturbation=float(section.get("perturbation", 0.3)),
    )


def _write_csv(path: Path, header: Sequence[str], rows: Sequence[Sequence]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def _optimal_bitstrings(graph: PackingGraph, layout, num_qubits: int) -> set[str]:
    mis = exact_mis(graph, enumerate_all=True)
    return {witness_bitstring(layout, w, num_qubits) for w in mis.all_optima}


def run_lambda_sweep(cfg: Mapping, out_dir: Path, base: Path) -> ExperimentOutcome:
    graph = load_graph_spec(cfg.get("graph", "garnet"), base)
    lambdas = [float(x) for x in cfg["lambdas"]]
    ps = [int(p) for p in cfg["ps"]]
    shots = int(cfg.get("shots", 20000))
    seed = int(cfg.get("seed", 0))
    rows = depth_sweep(graph, ps, lambdas, shots, seed=seed, config=_train_config(cfg))
    _write_csv(
        out_dir / "lambda_sweep.csv",
        ("lambda", "p", "success_probability", "modal_is_optimal", "expectation"),
        [
            (r.lam, r.p, r.success_probability, int(r.modal_is_optimal), r.expectation)
            for r in rows
        ],
    )
    assertions = []
    for lam in cfg.get("assertions", {}).get("never_modal_lambdas", []):
        hits = [r for r in rows if r.lam == float(lam) and r.modal_is_optimal]
        assertions.append(
            Assertion(
                name=f"lambda={lam} never modal-optimal",
                passed=not hits,
                detail=f"{len(hits)} of {len(ps)} depths had the optimum modal",
            )
        )
    for lam in cfg.get("assertions", {}).get("always_modal_lambdas", []):
        misses = [r for r in rows if r.lam == float(lam) and not r.modal_is_optimal]
        assertions.append(
            Assertion(
                name=f"lambda={lam} always modal-optimal",
                passed=not misses,
                detail=f"{len(misses)} of {len(ps)} depths missed",
            )
        )
    return ExperimentOutcome("lambda-sweep", ("lambda_sweep.csv",), tuple(assertions))


def run_depth_sweep(cfg: Mapping, out_dir: Path, base: Path) -> ExperimentOutcome:
    graph = load_graph_spec(cfg.get("graph", "garnet-sub10"), base)
    lam = float(cfg.get("lambda", 0.5))
    ps = sorted(int(p) for p in cfg["ps"])
    shots = int(cfg.get("shots", 20000))
    seed = int(cfg.get("seed", 0))
    op, layout = mis_hamiltonian(graph, lam)
    mixer = XMixer(op.num_qubits)
    optimal = _optimal_bitstrings(graph, layout, op.num_qubits)
    tcfg = _train_config(cfg)

    params_by_p: dict[int, QaoaParams] = {}
    ideal_rows = []
    prev = None
    for p in ps:
        extra = [] if prev is None else [extend_params(prev, p)]
        trained = train(op, mixer, p, config=tcfg, seed=seed, extra_starts=extra)
        params_by_p[p] = trained.params
        prev = trained.params
        result = sample(op, mixer, trained.params, shots, seed=seed + p, optimal_states=optimal)
        ideal_rows.append((p, result.success_probability, result.expectation))
    _write_csv(
        out_dir / "depth_sweep_ideal.csv",
        ("p", "success_probability", "expectation"),
        ideal_rows,
    )
    csv_files = ["depth_sweep_ideal.csv"]
    assertions = []

    checks = cfg.get("assertions", {})
    if checks.get("ideal_trend", False):
        succ = [r[1] for r in ideal_rows]
        passed = succ[-1] > succ[0]
        assertions.append(
            Assertion(
                "ideal success increases with depth",
                passed,
                f"p={ps[0]}: {succ[0]:.4f} -> p={ps[-1]}: {succ[-1]:.4f}",
            )
        )

    noise_cfg = cfg.get("noise")
    if noise_cfg:
        from qpack.instances import garnet_coupling_map, grid_placement

        cal_spec = noise_cfg.get("calibration", "garnet-like")
        if cal_spec == "garnet-like":
            from qpack.instances import bundled_calibration

            cal = bundled_calibration()
        else:
            cal = calibration_from_dict(read_json(base / cal_spec))
        model = noise_from_calibration(cal)
        scale = float(noise_cfg.get("scale", 1.0))
        if scale != 1.0:
            model = model.scaled(scale)
        map_spec = cfg.get("map", "garnet")
        if map_spec == "garnet":
            cmap = garnet_coupling_map()
        else:
            from qpack.compiler import coupling_map_from_dict

            cmap = coupling_map_from_dict(read_json(base / map_spec))
        placement = grid_placement(graph, cmap)
        noisy_rows = noisy_depth_sweep(
            op,
            params_by_p,
            model,
            cmap,
            placement,
            ps,
            trajectories=int(noise_cfg.get("trajectories", 200)),
            shots_per_trajectory=int(noise_cfg.get("shots_per_trajectory", 100)),
            seed=seed,
            optimal_states=optimal,
            include_idle=bool(noise_cfg.get("include_idle", True)),
        )
        _write_csv(
            out_dir / "depth_sweep_noisy.csv",
            ("p", "success_probability", "std_error", "cz_count"),
            [(r.p, r.success_probability, r.std_error, r.cz_count) for r in noisy_rows],
        )
        csv_files.append("depth_sweep_noisy.csv")
        if checks.get("noisy_peak_before_max", False):
            best = max(noisy_rows, key=lambda r: r.success_probability)
            last = noisy_rows[-1]
            sigma = float(np.hypot(best.std_error, last.std_error))
            passed = best.p < last.p and (
                best.success_probability - last.success_probability > 3.0 * sigma
            )
            assertions.append(
                Assertion(
                    "noisy success peaks before max depth",
                    passed,
                    f"peak p={best.p} ({best.success_probability:.4f}) vs "
                    f"p={last.p} ({last.success_probability:.4f}), 3*sigma={3 * sigma:.4f}",
                )
            )
    return ExperimentOutcome("depth-sweep", tuple(csv_files), tuple(assertions))


def run_param_conc(cfg: Mapping, out_dir: Path, base: Path) -> ExperimentOutcome:
    from qpack.instances import garnet_subgraph_ids

    full = load_graph_spec(cfg.get("graph", "garnet"), base)
    if "subgraph_ids" in cfg:
        sub_ids = [int(x) for x in cfg["subgraph_ids"]]
    else:
        sub_ids = list(garnet_subgraph_ids(full, int(cfg.get("subgraph_size", 8))))
    sub = extract_subgraph(full, sub_ids)
    lam = float(cfg.get("lambda", 0.5))
    ps = sorted(int(p) for p in cfg["ps"])
    shots = int(cfg.get("shots", 20000))
    seed = int(cfg.get("seed", 0))
    tcfg = _train_config(cfg)

    op_sub, lay_sub = mis_hamiltonian(sub, lam)
    op_full, lay_full = mis_hamiltonian(full, lam)
    mix_sub = XMixer(op_sub.num_qubits)
    mix_full = XMixer(op_full.num_qubits)
    opt_sub = _optimal_bitstrings(sub, lay_sub, op_sub.num_qubits)
    opt_full = _optimal_bitstrings(full, lay_full, op_full.num_qubits)

    rows = []
    prev_sub = prev_full = None
    for p in ps:
        t_sub = train(
            op_sub, mix_sub, p, config=tcfg, seed=seed,
            extra_starts=[] if prev_sub is None else [extend_params(prev_sub, p)],
        )
        t_full = train(
            op_full, mix_full, p, config=tcfg, seed=seed,
            extra_starts=[] if prev_full is None else [extend_params(prev_full, p)],
        )
        prev_sub, prev_full = t_sub.params, t_full.params
        c_sub_sub = sample(
            op_sub, mix_sub, t_sub.params, shots, seed=seed + p, optimal_states=opt_sub
        ).success_probability
        c_full_sub = sample(
            op_full, mix_full, t_sub.params, shots, seed=seed + p, optimal_states=opt_full
        ).success_probability
        c_full_full = sample(
            op_full, mix_full, t_full.params, shots, seed=seed + p, optimal_states=opt_full
        ).success_probability
        rows.append((p, c_sub_sub, c_full_sub, c_full_full))
    _write_csv(
        out_dir / "param_conc.csv",
        ("p", "c_sub_rho_sub", "c_full_rho_sub", "c_full_rho_full"),
        rows,
    )
    assertions = []
    checks = cfg.get("assertions", {})
    if "transfer_ratio_min" in checks:
        ratio_min = float(checks["transfer_ratio_min"])
        at_p = int(checks.get("at_p", ps[-1]))
        row = next(r for r in rows if r[0] == at_p)
        ratio = row[2] / row[3] if row[3] > 0 else float("inf")
        assertions.append(
            Assertion(
                f"transfer ratio at p={at_p} >= {ratio_min}",
                ratio >= ratio_min,
                f"C_full(rho_sub)={row[2]:.4f}, C_full(rho_full)={row[3]:.4f}, "
                f"ratio={ratio:.3f}",
            )
        )
    return ExperimentOutcome("param-conc", ("param_conc.csv",), tuple(assertions))


_RUNNERS = {
    "lambda-sweep": run_lambda_sweep,
    "depth-sweep": run_depth_sweep,
    "param-conc": run_param_conc,
}


def run_experiment(name: str, cfg: Mapping, out_dir: Path, base: Path) -> ExperimentOutcome:
    if name not in _RUNNERS:
        raise ValidationError(
            f"unknown experiment {name!r}; choose from {sorted(_RUNNERS)}"
        )
    out_dir.mkdir(parents=True, exist_ok=True)
    outcome = _RUNNERS[name](cfg, out_dir, base)
    write_json(
        out_dir / "summary.json",
        {
            "format": SUMMARY_FORMAT,
            "experiment": outcome.name,
            "csv_files": list(outcome.csv_files),
            "passed": outcome.passed,
            "assertions": [
                {"name": a.name, "passed": a.passed, "detail": a.detail}
                for a in outcome.assertions
            ],
        },
    )
    return outcome
