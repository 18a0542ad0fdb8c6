import json

import pytest
from click.testing import CliRunner

from trapcodes.cli import main


@pytest.fixture()
def runner():
    return CliRunner()


def invoke(runner, *args):
    return runner.invoke(main, list(args), catch_exceptions=False)


class TestCodeCommand:
    def test_code_json(self, runner):
        r = invoke(runner, "code", "7", "1")
        assert r.exit_code == 0
        doc = json.loads(r.output)
        assert doc["code"]["params"] == [14, 6, 6, 2]
        assert doc["meta"]["tool"] == "trapcodes"
        assert doc["meta"]["config"]["m"] == 7

    def test_code_base_case(self, runner):
        doc = json.loads(invoke(runner, "code", "3", "1").output)
        assert doc["code"]["params"] == [6, 2, 2, 2]

    def test_bad_params_exit_4(self, runner):
        r = runner.invoke(main, ["code", "7", "9"])
        assert r.exit_code == 4
        assert "error" in r.output or "error" in (r.stderr or "")

    def test_dot_output(self, runner):
        r = invoke(runner, "code", "4", "1", "--dot")
        assert r.exit_code == 0 and r.output.startswith("graph induced {")


class TestLogicalsCommand:
    def test_matrices_and_dressed(self, runner):
        doc = json.loads(invoke(runner, "logicals", "7", "1").output)
        assert doc["operator_matrices"]["X"][0] == "0101010"
        assert doc["gauge_matrices"]["Xbar"][0] == "0010100"
        assert doc["dressed"]["xhat"][0] == {"x": "01000000000010", "z": "0" * 14}
        assert all(doc["validation"].values())

    def test_search_space_count(self, runner):
        doc = json.loads(invoke(runner, "logicals", "7", "2", "--search-space").output)
        assert len(doc["two_local_strings"]["z"]) == 21
        assert sorted(s[::-1] for s in doc["two_local_strings"]["z"]) == doc["two_local_strings"]["x"]


class TestGapCommand:
    def test_sweep_with_fits(self, runner, tmp_path):
        out = tmp_path / "gap.csv"
        r = invoke(runner, "gap", "--l", "1", "--m", "3..6", "--fit", "both", "--out", str(out))
        assert r.exit_code == 0
        text = out.read_text()
        assert "m,l,n,n_g,dim_reduced,gap,method,error" in text
        assert text.count("\n# fits:") == 1
        assert "# tool=trapcodes" in text

    def test_byte_identical_reruns(self, runner, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        invoke(runner, "gap", "--l", "1", "--m", "3..5", "--seed", "11", "--out", str(a))
        invoke(runner, "gap", "--l", "1", "--m", "3..5", "--seed", "11", "--out", str(b))
        assert a.read_bytes() == b.read_bytes()

    def test_threads_match_serial(self, runner, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        invoke(runner, "gap", "--l", "1", "--m", "3..6", "--out", str(a))
        invoke(runner, "gap", "--l", "1", "--m", "3..6", "--threads", "2", "--out", str(b))

        def data(path):
            return [ln for ln in path.read_text().splitlines() if not ln.startswith("#")]

        assert data(a) == data(b)

    def test_empty_range(self, runner):
        r = invoke(runner, "gap", "--l", "1", "--m", "9..8")
        assert r.exit_code == 0
        assert r.output.strip().endswith("m,l,n,n_g,dim_reduced,gap,method,error")

    def test_plot_written(self, runner, tmp_path):
        out = tmp_path / "gap.csv"
        r = invoke(runner, "gap", "--l", "1", "--m", "3..5", "--out", str(out), "--plot")
        assert r.exit_code == 0
        assert (tmp_path / "gap.png").exists()

    def test_k_rule(self, runner):
        r = invoke(runner, "gap", "--l", "k", "--m", "3..5")
        body = [ln for ln in r.output.splitlines() if ln and not ln.startswith("#")]
        assert body[1].startswith("3,1,") and body[-1].startswith("5,2,")


class TestFitCommand:
    def test_fit_from_csv(self, runner, tmp_path):
        out = tmp_path / "gap.csv"
        invoke(runner, "gap", "--l", "1", "--m", "3..7", "--out", str(out))
        r = invoke(runner, "fit", "--in", str(out), "--model", "both")
        doc = json.loads(r.output)
        assert doc["preferred_by_aic"] == "power"
        assert 0.9 < doc["fits"]["power"]["nu"] < 1.15


class TestGraphCommand:
    def test_induced_json(self, runner):
        doc = json.loads(invoke(runner, "graph", "--code", "7", "1").output)
        assert len(doc["induced"]["edges"]) == 37

    def test_hardware_csv_and_dot(self, runner):
        r = invoke(runner, "graph", "--hardware", "kagome", "--format", "csv")
        assert r.output.splitlines()[0].startswith(",0,1,")
        r = invoke(runner, "graph", "--hardware", "kagome", "--format", "dot")
        assert r.output.startswith("graph kagome {")

    def test_requires_exactly_one_source(self, runner):
        assert runner.invoke(main, ["graph"]).exit_code == 4
        assert runner.invoke(main, ["graph", "--code", "4", "1", "--hardware", "kagome"]).exit_code == 4

    def test_extent(self, runner):
        doc = json.loads(invoke(runner, "graph", "--hardware", "union_jack", "--extent", "4", "4").output)
        assert len(doc["hardware"]["vertices"]) == 16


class TestMapCommand:
    def test_exact_map(self, runner, tmp_path):
        out = tmp_path / "map.json"
        r = invoke(runner, "map", "4", "1", "union_jack", "--exact", "--out", str(out), "--plot")
        assert r.exit_code == 0
        doc = json.load(open(out))
        assert doc["score"]["total"] == 13 and doc["score"]["average"] == 1.0
        assert doc["meta"]["seed"] == 0
        assert (tmp_path / "map.png").exists()

    def test_cap_exit_3(self, runner):
        assert runner.invoke(main, ["map", "5", "2", "kagome", "--exact"]).exit_code == 3

    def test_anneal_fallback(self, runner):
        r = invoke(runner, "map", "5", "2", "kagome", "--anneal")
        doc = json.loads(r.output)
        assert doc["method"] == "anneal" and doc["score"]["total"] <= 34

    def test_unknown_layout_exit_4(self, runner):
        r = runner.invoke(main, ["map", "4", "1", "banana"])
        assert r.exit_code == 4

    def test_lp_export(self, runner, tmp_path):
        out = tmp_path / "prob.lp"
        r = invoke(runner, "map", "5", "2", "kagome", "--export-lp", "--out", str(out))
        assert r.exit_code == 0
        text = out.read_text()
        assert text.splitlines()[0].startswith("\\ trapcodes placement MIP")
        assert "Minimize" in text and "Subject To" in text and text.rstrip().endswith("End")


class TestEncodeCommand:
    def test_encode_terms(self, runner, tmp_path):
        src = tmp_path / "logical.json"
        src.write_text(json.dumps({"terms": [
            {"family": "x", "indices": [1], "coefficient": 1.0},
            {"family": "zz", "indices": [1, 2], "coefficient": 0.25},
        ]}))
        r = invoke(runner, "encode", "7", "1", "--in", str(src))
        doc = json.loads(r.output)
        assert doc["terms"][0]["qubits"] == [2, 13]
        assert doc["terms"][1]["qubits"] == [2, 4]
        assert doc["edge_sets"]["x"] == [[2, 13]]
        assert all(t["error"] == "" for t in doc["terms"])

    def test_empty_hamiltonian(self, runner, tmp_path):
        src = tmp_path / "logical.json"
        src.write_text(json.dumps({"terms": []}))
        doc = json.loads(invoke(runner, "encode", "7", "1", "--in", str(src)).output)
        assert doc["terms"] == []

    def test_malformed_input_exit_4(self, runner, tmp_path):
        src = tmp_path / "logical.json"
        src.write_text(json.dumps({"wrong": True}))
        assert runner.invoke(main, ["encode", "7", "1", "--in", str(src)]).exit_code == 4
