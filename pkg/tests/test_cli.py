import json
import shutil
import subprocess
import sys
from pathlib import Path

import pytest

DATA = Path(__file__).resolve().parent.parent / "src" / "qpack" / "data"


def run_cli(*args, cwd=None):
    return subprocess.run(
        [sys.executable, "-m", "qpack.cli", *args],
        capture_output=True, text=True, cwd=cwd,
    )


@pytest.fixture(scope="module")
def workdir(tmp_path_factory):
    path = tmp_path_factory.mktemp("cli")
    shutil.copy(DATA / "garnet_scenario.json", path / "scenario.json")
    return path


@pytest.fixture(scope="module")
def graph_file(workdir):
    out = workdir / "graph.json"
    res = run_cli("graph", "--scenario", str(workdir / "scenario.json"), "--out", str(out))
    assert res.returncode == 0, res.stderr
    return out


class TestGraphCommand:
    def test_garnet_file(self, graph_file):
        data = json.loads(graph_file.read_text())
        assert data["format"] == "qpack-graph/1"
        assert len(data["nodes"]) == 18

    def test_malformed_json_exits_2(self, workdir):
        bad = workdir / "bad.json"
        bad.write_text("{not json")
        res = run_cli("graph", "--scenario", str(bad), "--out", str(workdir / "x.json"))
        assert res.returncode == 2
        assert "error" in res.stderr.lower()

    def test_missing_file_exits_2(self, workdir):
        res = run_cli("graph", "--scenario", str(workdir / "nope.json"),
                      "--out", str(workdir / "x.json"))
        assert res.returncode == 2

    def test_empty_lattice_scenario(self, workdir):
        scn = {
            "format": "qpack-scenario/1", "dimension": 2,
            "boundary_radius": 0.5, "radii": [1.0], "spacing": 1.0,
        }
        src = workdir / "empty.json"
        src.write_text(json.dumps(scn))
        out = workdir / "empty_graph.json"
        res = run_cli("graph", "--scenario", str(src), "--out", str(out))
        assert res.returncode == 0
        assert json.loads(out.read_text())["nodes"] == []


class TestSolveCommand:
    def test_exact_garnet(self, graph_file):
        res = run_cli("solve", "--graph", str(graph_file), "--method", "exact")
        assert res.returncode == 0
        assert "size=12" in res.stdout
        assert "density=0.6803" in res.stdout

    def test_sweep_csv(self, graph_file, workdir):
        csv_path = workdir / "sweep.csv"
        res = run_cli(
            "solve", "--graph", str(graph_file),
            "--sweep", "1.4,1.1,0.9,0.75", "--csv", str(csv_path),
        )
        assert res.returncode == 0
        lines = csv_path.read_text().strip().splitlines()
        assert lines[0] == "spacing,nodes,edges,mis_size,density,solver,seconds"
        assert len(lines) == 5
        sizes = [int(line.split(",")[3]) for line in lines[1:]]
        assert sizes == sorted(sizes)  # packing grows as spacing shrinks


class TestHamCommand:
    def test_writes_operator(self, graph_file, workdir):
        out = workdir / "ham.json"
        res = run_cli("ham", "--graph", str(graph_file), "--lam", "0.5",
                      "--out", str(out))
        assert res.returncode == 0
        data = json.loads(out.read_text())
        assert data["format"] == "qpack-ham/1"
        assert data["num_qubits"] == 18
        assert data["lambda"] == 0.5


class TestQaoaCommand:
    def test_p_zero_rejected(self, graph_file, workdir):
        res = run_cli(
            "qaoa", "--graph", str(graph_file), "--lam", "0.5", "--p", "0",
            "--out", str(workdir / "r.json"),
        )
        assert res.returncode == 2

    def test_same_seed_byte_identical(self, workdir):
        # tiny instance: keep the CLI determinism check fast
        scn = {
            "format": "qpack-scenario/1", "dimension": 2,
            "boundary_radius": 2.7, "radii": [1.0], "spacing": 1.5,
        }
        (workdir / "small.json").write_text(json.dumps(scn))
        g = workdir / "small_graph.json"
        assert run_cli("graph", "--scenario", str(workdir / "small.json"),
                       "--out", str(g)).returncode == 0
        out1, out2 = workdir / "r1.json", workdir / "r2.json"
        for out in (out1, out2):
            res = run_cli(
                "qaoa", "--graph", str(g), "--lam", "2.0", "--p", "2",
                "--shots", "2000", "--seed", "7", "--train-starts", "3",
                "--out", str(out),
            )
            assert res.returncode == 0, res.stderr
        assert out1.read_bytes() == out2.read_bytes()

    def test_transfer_mismatch_exits_2(self, workdir):
        res = run_cli(
            "qaoa", "--graph", str(workdir / "small_graph.json"), "--lam", "2.0",
            "--p", "3", "--transfer-from", str(workdir / "r1.json"),
            "--out", str(workdir / "r3.json"),
        )
        assert res.returncode == 2

    def test_transfer_reuses_params(self, workdir):
        res = run_cli(
            "qaoa", "--graph", str(workdir / "small_graph.json"), "--lam", "2.0",
            "--transfer-from", str(workdir / "r1.json"),
            "--shots", "500", "--out", str(workdir / "r4.json"),
        )
        assert res.returncode == 0
        r1 = json.loads((workdir / "r1.json").read_text())
        r4 = json.loads((workdir / "r4.json").read_text())
        assert r1["params"] == r4["params"]

    def test_noisy_run(self, workdir):
        res = run_cli(
            "qaoa", "--graph", str(workdir / "small_graph.json"), "--lam", "2.0",
            "--p", "1", "--seed", "3", "--train-starts", "2",
            "--noise", str(DATA / "garnet-like.json"),
            "--trajectories", "20", "--shots-per-trajectory", "25",
            "--out", str(workdir / "noisy.json"),
        )
        assert res.returncode == 0, res.stderr
        data = json.loads((workdir / "noisy.json").read_text())
        assert data["shots"] == 500


class TestEstimateCommand:
    def test_reference_numbers(self):
        res = run_cli("estimate", "--radii", "2", "--q", "8", "--d", "2",
                      "--rm", "1", "--rb", "4", "--formulation", "second")
        assert res.returncode == 0
        assert "128" in res.stdout and "512" in res.stdout

    def test_first_quant_numbers(self):
        res = run_cli("estimate", "--radii", "3", "--q", "8", "--d", "2",
                      "--rm", "1", "--rb", "4", "--formulation", "first")
        assert res.returncode == 0
        assert "192" in res.stdout and "width=2" in res.stdout

    def test_both_two_rows(self):
        res = run_cli("estimate", "--radii", "2", "--q", "4", "--d", "2",
                      "--rm", "1", "--rb", "4", "--formulation", "both")
        assert res.returncode == 0
        rows = [l for l in res.stdout.splitlines() if l.startswith(("first", "second"))]
        assert len(rows) == 2

    def test_dimension_four_rejected(self):
        res = run_cli("estimate", "--radii", "1", "--q", "2", "--d", "4",
                      "--rm", "1", "--rb", "2")
        assert res.returncode == 2

    def test_empirical_against_scenario(self, workdir):
        res = run_cli(
            "estimate", "--radii", "1", "--q", "5", "--d", "2", "--rm", "1",
            "--rb", "4.2", "--formulation", "second",
            "--scenario", str(workdir / "scenario.json"),
        )
        assert res.returncode == 0
        assert "qubits 18 <= 25.0" in res.stdout


class TestExperimentCommand:
    def test_unknown_name_exits_2(self, workdir):
        cfg = workdir / "cfg.json"
        cfg.write_text(json.dumps({"ps": [1]}))
        res = run_cli("experiment", "bogus", "--config", str(cfg),
                      "--out-dir", str(workdir / "exp"))
        assert res.returncode == 2

    def test_lambda_sweep_tiny(self, workdir):
        cfg = workdir / "lam.json"
        cfg.write_text(json.dumps({
            "graph": "garnet-sub8",
            "lambdas": [2.0],
            "ps": [1],
            "shots": 1000,
            "seed": 0,
            "train": {"starts": 2},
        }))
        out = workdir / "lam_out"
        res = run_cli("experiment", "lambda-sweep", "--config", str(cfg),
                      "--out-dir", str(out))
        assert res.returncode == 0, res.stderr
        summary = json.loads((out / "summary.json").read_text())
        assert summary["passed"] is True
        assert (out / "lambda_sweep.csv").exists()

    def test_failed_assertion_exits_1(self, workdir):
        # lambda=2 concentrates on the optimum at modest depth; asserting it
        # is NEVER modal must fail and exit 1
        cfg = workdir / "lam_fail.json"
        cfg.write_text(json.dumps({
            "graph": "garnet-sub8",
            "lambdas": [2.0],
            "ps": [3],
            "shots": 4000,
            "seed": 0,
            "train": {"starts": 4},
            "assertions": {"never_modal_lambdas": [2.0]},
        }))
        res = run_cli("experiment", "lambda-sweep", "--config", str(cfg),
                      "--out-dir", str(workdir / "lam_fail_out"))
        assert res.returncode == 1


class TestVersion:
    def test_version_lists_formats(self):
        res = run_cli("--version")
        assert res.returncode == 0
        assert "qpack" in res.stdout
        assert "qpack-graph/1" in res.stdout
