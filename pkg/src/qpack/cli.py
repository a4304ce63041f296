"""``qpack``: one binary, subcommand per pipeline.

Every command is deterministic given its inputs and ``--seed``; all file
formats are versioned JSON (see docs/formats.md). Exit codes: 0 success,
1 experiment assertion failure, 2 usage or input error.
"""

from __future__ import annotations

import functools
import sys
from pathlib import Path

import click

from qpack import __version__
from qpack.errors import QpackError
from qpack.geometry import (
    GRAPH_FORMAT,
    SCENARIO_FORMAT,
    build_graph,
    graph_from_dict,
    graph_to_dict,
    packing_density,
    read_json,
    scenario_from_dict,
    write_json,
)
from qpack.hamiltonian import (
    OPERATOR_FORMAT,
    XMixer,
    classical_energy,
    expand_projectors,
    first_quantization_hamiltonian,
    mis_hamiltonian,
    operator_from_dict,
    operator_to_dict,
    second_quantization_hamiltonian,
)
from qpack.solver import (
    SWEEP_CSV_COLUMNS,
    AnnealSchedule,
    anneal_qubo,
    exact_mis,
    spacing_sweep,
)

FORMAT_VERSIONS = (
    SCENARIO_FORMAT,
    GRAPH_FORMAT,
    OPERATOR_FORMAT,
    "qpack-qaoa/1",
    "qpack-circ/1",
    "qpack-map/1",
    "qpack-cal/1",
)


def fail_on_qpack_error(fn):
    """Input and domain errors exit with code 2, per the CLI contract."""

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except QpackError as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(2)
        except OSError as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(2)

    return wrapper


def _print_version(ctx, _param, value):
    if not value or ctx.resilient_parsing:
        return
    click.echo(f"qpack {__version__}")
    for tag in FORMAT_VERSIONS:
        click.echo(f"  format {tag}")
    ctx.exit(0)


@click.group()
@click.option(
    "--version", is_flag=True, callback=_print_version, expose_value=False,
    is_eager=True, help="Print the package and file-format versions.",
)
def main():
    """Bounded sphere packing: graphs, classical solvers, simulated QAOA."""


@main.command("graph")
@click.option("--scenario", "scenario_path", required=True, type=click.Path(exists=True))
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--include-tangent", is_flag=True, help="Treat tangent spheres as overlapping.")
@fail_on_qpack_error
def cmd_graph(scenario_path, out_path, include_tangent):
    """Build the packing graph for a scenario file."""
    scenario = scenario_from_dict(read_json(scenario_path))
    graph = build_graph(scenario, include_tangent=include_tangent)
    write_json(out_path, graph_to_dict(graph))
    click.echo(f"{graph.num_nodes} nodes, {graph.num_edges} edges -> {out_path}")


@main.command("ham")
@click.option("--graph", "graph_path", required=True, type=click.Path(exists=True))
@click.option(
    "--formulation", type=click.Choice(["mis", "second", "first"]), default="mis",
    show_default=True,
)
@click.option("--lam", "--lambda", "lam", type=float, default=2.0, show_default=True)
@click.option("--invalid-penalty", type=float, default=None,
              help="First-quantization invalid-codeword penalty (auto by default).")
@click.option("--expand", is_flag=True, help="Expand projector terms into Z-products.")
@click.option("--out", "out_path", required=True, type=click.Path())
@fail_on_qpack_error
def cmd_ham(graph_path, formulation, lam, invalid_penalty, expand, out_path):
    """Build a cost operator file from a graph file."""
    graph = graph_from_dict(read_json(graph_path))
    if formulation == "mis":
        op, layout = mis_hamiltonian(graph, lam)
    elif formulation == "second":
        op, layout = second_quantization_hamiltonian(graph, lam)
    else:
        op, layout = first_quantization_hamiltonian(graph, lam, invalid_penalty)
    if expand:
        op = expand_projectors(op)
    write_json(out_path, operator_to_dict(op, layout, lam))
    click.echo(f"{op.num_qubits} qubits, {op.num_terms} terms -> {out_path}")


@main.command("solve")
@click.option("--graph", "graph_path", required=True, type=click.Path(exists=True))
@click.option("--method", type=click.Choice(["exact", "anneal"]), default="exact",
              show_default=True)
@click.option("--sweep", "sweep_spacings", default=None,
              help="Comma-separated spacings; re-solves the scenario per spacing.")
@click.option("--lam", type=float, default=2.0, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--restarts", type=int, default=10, show_default=True)
@click.option("--time-budget", type=float, default=None, help="Seconds per solve.")
@click.option("--out", "out_path", default=None, type=click.Path())
@click.option("--csv", "csv_path", default=None, type=click.Path())
@fail_on_qpack_error
def cmd_solve(graph_path, method, sweep_spacings, lam, seed, restarts, time_budget,
              out_path, csv_path):
    """Solve a packing graph classically (exact or annealing)."""
    graph = graph_from_dict(read_json(graph_path))
    if sweep_spacings is not None:
        spacings = [float(x) for x in sweep_spacings.split(",") if x.strip()]
        rows = spacing_sweep(
            graph.scenario, spacings, lam=lam, seed=seed, time_budget=time_budget
        )
        lines = [",".join(SWEEP_CSV_COLUMNS)]
        for r in rows:
            solver = r.solver if r.status == "ok" else f"{r.solver}({r.status})"
            lines.append(
                f"{r.spacing},{r.nodes},{r.edges},{r.mis_size},{r.density!r},"
                f"{solver},{r.seconds:.3f}"
            )
        text = "\n".join(lines) + "\n"
        if csv_path:
            Path(csv_path).write_text(text, encoding="utf-8")
        click.echo(text, nl=False)
        return
    if method == "exact":
        res = exact_mis(graph, time_budget=time_budget)
        witness, size, solver = res.witness, res.size, res.method
    else:
        op, layout = mis_hamiltonian(graph, lam)
        anneal = anneal_qubo(op, AnnealSchedule(restarts=restarts), seed=seed)
        from qpack.solver import _repair_independent, _selected_nodes

        witness = _repair_independent(graph, _selected_nodes(graph, layout, anneal.bitstring))
        size = len(witness) + len(graph.scenario.fixed_placements)
        solver = "anneal"
    density = packing_density(graph, witness)
    payload = {
        "format": "qpack-solution/1",
        "solver": solver,
        "size": size,
        "witness": list(witness),
        "density": density,
    }
    if out_path:
        write_json(out_path, payload)
    click.echo(f"size={size} density={density:.4f} solver={solver}")


@main.command("qaoa")
@click.option("--ham", "ham_path", default=None, type=click.Path(exists=True))
@click.option("--graph", "graph_path", default=None, type=click.Path(exists=True))
@click.option("--lam", "--lambda", "lam", type=float, default=None,
              help="Builds the MIS operator when only --graph is given.")
@click.option("--p", "p", type=int, default=None)
@click.option("--shots", type=int, default=20000, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--train-starts", type=int, default=8, show_default=True)
@click.option("--transfer-from", "transfer_path", default=None, type=click.Path(exists=True),
              help="Reuse trained parameters from a prior result file.")
@click.option("--noise", "cal_path", default=None, type=click.Path(exists=True),
              help="Calibration file; runs the compiled circuit noisily.")
@click.option("--map", "map_path", default=None, type=click.Path(exists=True),
              help="Coupling map (defaults to the bundled 20-qubit grid).")
@click.option("--trajectories", type=int, default=200, show_default=True)
@click.option("--shots-per-trajectory", type=int, default=100, show_default=True)
@click.option("--out", "out_path", required=True, type=click.Path())
@fail_on_qpack_error
def cmd_qaoa(ham_path, graph_path, lam, p, shots, seed, train_starts, transfer_path,
             cal_path, map_path, trajectories, shots_per_trajectory, out_path):
    """Train (or load) angles, then sample ideally or noisily."""
    from qpack.qaoa import (
        TrainConfig,
        result_from_dict,
        result_to_dict,
        sample,
        train,
        witness_bitstring,
    )

    if ham_path is None and graph_path is None:
        raise click.UsageError("provide --ham or --graph")
    graph = None
    layout = None
    if graph_path is not None:
        graph = graph_from_dict(read_json(graph_path))
    if ham_path is not None:
        op, layout, file_lam = operator_from_dict(read_json(ham_path))
        lam = lam if lam is not None else file_lam
    else:
        if lam is None:
            raise click.UsageError("--lam is required with --graph")
        op, layout = mis_hamiltonian(graph, lam)
    if op.has_projectors:
        op = expand_projectors(op)
    mixer = XMixer(op.num_qubits)

    optimal = None
    if graph is not None and layout is not None and graph.is_homogeneous():
        mis = exact_mis(graph, enumerate_all=True)
        optimal = {witness_bitstring(layout, w, op.num_qubits) for w in mis.all_optima}

    if transfer_path is not None:
        params = result_from_dict(read_json(transfer_path)).params
        if p is not None and params.p != p:
            raise click.UsageError(f"transferred params have p={params.p}, asked for p={p}")
        trace = ()
    else:
        if p is None or p < 1:
            raise click.UsageError("--p must be a positive integer")
        trained = train(op, mixer, p, config=TrainConfig(starts=train_starts), seed=seed)
        params, trace = trained.params, trained.energy_trace

    if cal_path is None:
        result = sample(op, mixer, params, shots, seed=seed, optimal_states=optimal,
                        energy_trace=trace)
        write_json(out_path, result_to_dict(result))
        modal = result.modal_bitstring()
        click.echo(
            f"expectation={result.expectation:.4f} "
            f"success={result.success_probability} modal={modal} -> {out_path}"
        )
        return

    # Noisy path: compile onto the map and run trajectories.
    from qpack.compiler import compile_qaoa, coupling_map_from_dict
    from qpack.instances import bundled_coupling_map, grid_placement
    from qpack.noise import calibration_from_dict, noise_from_calibration, run_noisy
    from qpack.qaoa import QaoaResult

    if graph is None:
        raise click.UsageError("--noise needs --graph to place qubits on the device")
    cmap = (
        coupling_map_from_dict(read_json(map_path))
        if map_path
        else bundled_coupling_map()
    )
    placement = grid_placement(graph, cmap)
    circuit = compile_qaoa(op, params, cmap, placement)
    model = noise_from_calibration(calibration_from_dict(read_json(cal_path)))
    noisy = run_noisy(
        circuit, model, trajectories, shots_per_trajectory, seed=seed,
        optimal_states=optimal,
    )
    sampled_energy = sum(
        classical_energy(op, bits) * count for bits, count in noisy.histogram.items()
    ) / noisy.shots
    result = QaoaResult(
        params=params,
        energy_trace=trace,
        histogram=noisy.histogram,
        success_probability=noisy.success_probability,
        seed=seed,
        shots=noisy.shots,
        expectation=sampled_energy,
    )
    write_json(out_path, result_to_dict(result))
    click.echo(
        f"noisy run: cz={circuit.cz_count} success={noisy.success_probability} "
        f"-> {out_path}"
    )


@main.command("experiment")
@click.argument("name")
@click.option("--config", "config_path", required=True, type=click.Path(exists=True))
@click.option("--out-dir", "out_dir", required=True, type=click.Path())
@fail_on_qpack_error
def cmd_experiment(name, config_path, out_dir):
    """Run a named study end-to-end (lambda-sweep | depth-sweep | param-conc)."""
    from qpack.experiments import run_experiment

    cfg = read_json(config_path)
    base = Path(config_path).resolve().parent
    outcome = run_experiment(name, cfg, Path(out_dir), base)
    for a in outcome.assertions:
        click.echo(f"[{'PASS' if a.passed else 'FAIL'}] {a.name}: {a.detail}")
    click.echo(f"wrote {', '.join(outcome.csv_files)} and summary.json to {out_dir}")
    if not outcome.passed:
        sys.exit(1)


@main.command("estimate")
@click.option("--radii", "num_radii", type=int, required=True)
@click.option("--q", "points_per_side", type=int, required=True)
@click.option("--d", "dimension", type=int, required=True)
@click.option("--rm", "max_radius", type=float, required=True)
@click.option("--rb", "boundary_radius", type=float, required=True)
@click.option("--formulation", type=click.Choice(["first", "second", "both"]),
              default="both", show_default=True)
@click.option("--scenario", "scenario_path", default=None, type=click.Path(exists=True),
              help="Also compare the bounds against the constructed instance.")
@click.option("--csv", "csv_path", default=None, type=click.Path())
@fail_on_qpack_error
def cmd_estimate(num_radii, points_per_side, dimension, max_radius, boundary_radius,
                 formulation, scenario_path, csv_path):
    """Evaluate the closed-form qubit/CNOT bounds."""
    from qpack.resources import (
        ScalingInput,
        empirical_vs_bound,
        first_quant_bounds,
        second_quant_bounds,
    )

    si = ScalingInput(
        num_radii=num_radii,
        points_per_side=points_per_side,
        dimension=dimension,
        max_radius=max_radius,
        boundary_radius=boundary_radius,
    )
    rows = []
    if formulation in ("second", "both"):
        b = second_quant_bounds(si)
        rows.append(("second", b.qubits_ceil, b.cnots, b.cnots_ceil, ""))
    if formulation in ("first", "both"):
        b = first_quant_bounds(si)
        rows.append(("first", b.qubits_ceil, b.cnots, b.cnots_ceil, f"width={b.register_width}"))
    header = ("formulation", "qubits_bound", "cnots_bound", "cnots_ceil", "notes")
    lines = [",".join(header)]
    click.echo(" | ".join(header))
    for row in rows:
        click.echo(" | ".join(str(x) for x in row))
        lines.append(",".join(str(x) for x in row))
    if scenario_path:
        scn = scenario_from_dict(read_json(scenario_path))
        for form in ("second", "first") if formulation == "both" else (formulation,):
            rep = empirical_vs_bound(scn, form)
            click.echo(
                f"empirical[{form}]: qubits {rep.actual_qubits} <= {rep.qubit_bound:.1f} "
                f"(slack {rep.qubit_slack:.2f}), terms {rep.actual_terms} <= "
                f"{rep.cnot_bound_span:.1f} (slack {rep.cnot_slack:.2f}), "
                f"max degree {rep.actual_max_degree} "
                f"(reference {rep.degree_reference:.2f}, informational)"
            )
            click.echo(f"note: {rep.note}")
    if csv_path:
        Path(csv_path).write_text("\n".join(lines) + "\n", encoding="utf-8")


if __name__ == "__main__":
    main()
