"""End-to-end tests for the command-line interface."""

import json

import pytest

from src.errors import EXIT_INPUT_ERROR, EXIT_MISMATCH, EXIT_OK, EXIT_RESOURCE_CAP
from src.main import main


@pytest.fixture
def workspace(tmp_path, monkeypatch):
    """Isolated data dir with the eg2(5,3) example already written."""
    monkeypatch.setenv("BUNDLE_DATA_DIR", str(tmp_path / "data"))
    monkeypatch.delenv("BUNDLE_LEDGER_ENABLED", raising=False)
    monkeypatch.delenv("BUNDLE_COUNT_MAX_LENGTH", raising=False)
    out_dir = tmp_path / "out"
    assert main(["example", "eg2", "--n", "5", "--m", "3", "--dir", str(out_dir)]) == EXIT_OK
    return out_dir


def read_json(capsys):
    return json.loads(capsys.readouterr().out)


class TestExample:
    def test_files_written(self, workspace, capsys):
        for name in ("eg2_5_3.conn", "eg2_5_3_base.graph", "eg2_5_3_fiber.graph", "eg2_5_3_bundle.graph"):
            assert (workspace / name).exists()
        card = json.loads((workspace / "eg2_5_3.card.json").read_text())
        assert card["expected"]["orbits"] == 2
        assert card["bundle"] == {"vertices": 15, "edges": 30}

    def test_missing_parameter(self, workspace, capsys):
        assert main(["example", "eg3", "--n", "5"]) == EXIT_INPUT_ERROR
        assert "--i" in capsys.readouterr().err

    def test_out_of_range_parameter(self, workspace):
        assert main(["example", "dvb2-torus", "--N", "5", "--dir", str(workspace)]) == EXIT_INPUT_ERROR


class TestCheck:
    def test_card_expectations_met(self, workspace, capsys):
        capsys.readouterr()
        code = main(["check", str(workspace / "eg2_5_3.conn"), "--checks", "trivial,transitive,orbits"])
        report = read_json(capsys)
        assert code == EXIT_OK
        checks = report["results"]["checks"]
        assert checks["trivial"]["result"]["trivial"] is False
        assert checks["transitive"]["actual"] is False
        assert checks["orbits"]["actual"] == 2
        assert report["results"]["expectations_met"]
        assert report["schema"] == 1

    def test_wrong_card_is_a_mismatch(self, workspace, tmp_path, capsys):
        card = tmp_path / "wrong.card.json"
        card.write_text(json.dumps({"expected": {"orbits": 3}}))
        capsys.readouterr()
        code = main(["check", str(workspace / "eg2_5_3.conn"), "--checks", "orbits", "--card", str(card)])
        assert code == EXIT_MISMATCH
        assert read_json(capsys)["results"]["checks"]["orbits"]["status"] == "mismatch"

    def test_failed_hypothesis_is_reported(self, workspace, capsys):
        assert main(["example", "product", "--n", "5", "--m", "3", "--dir", str(workspace)]) == EXIT_OK
        capsys.readouterr()
        code = main(["check", str(workspace / "product_5_3.conn"), "--checks", "trivial,theorem2"])
        checks = read_json(capsys)["results"]["checks"]
        assert code == EXIT_OK
        assert checks["trivial"]["result"]["trivial"] is True
        assert checks["theorem2"]["status"] == "hypothesis-failed"

    def test_four_loop_witness(self, workspace, capsys):
        assert main(["example", "eg2", "--n", "4", "--m", "3", "--dir", str(workspace)]) == EXIT_OK
        capsys.readouterr()
        assert main(["check", str(workspace / "eg2_4_3.conn"), "--checks", "4loop"]) == EXIT_OK
        result = read_json(capsys)["results"]["checks"]["4loop"]["result"]
        assert result["balanced"] is False
        assert result["witness"] == [0, 1, 2, 3, 0]

    def test_parallel_relabeled_run_agrees(self, workspace, capsys):
        capsys.readouterr()
        conn = str(workspace / "eg2_5_3.conn")
        args = ["check", conn, "--checks", "transitive,orbits,4loop", "--workers", "3", "--relabel", "--seed", "7"]
        assert main(args) == EXIT_OK
        checks = read_json(capsys)["results"]["checks"]
        assert checks["orbits"]["actual"] == 2
        assert checks["4loop"]["result"]["balanced"] is True

    def test_text_summary(self, workspace, capsys):
        capsys.readouterr()
        main(["check", str(workspace / "eg2_5_3.conn"), "--checks", "trivial,dvb", "--format", "text"])
        assert capsys.readouterr().out.splitlines()[-1] == "2 of 2 checks passed"

    def test_unknown_check(self, workspace):
        assert main(["check", str(workspace / "eg2_5_3.conn"), "--checks", "curvature"]) == EXIT_INPUT_ERROR

    def test_missing_file(self, workspace, tmp_path):
        assert main(["check", str(tmp_path / "absent.conn")]) == EXIT_INPUT_ERROR


class TestCount:
    def test_bundle_counts_differ_between_fibers(self, workspace, capsys):
        graph = str(workspace / "eg2_5_3_bundle.graph")
        capsys.readouterr()
        main(["count", graph, "--vertex", "0", "--length", "5"])
        null = read_json(capsys)["results"]["count"]
        main(["count", graph, "--vertex", "1", "--length", "5"])
        moved = read_json(capsys)["results"]["count"]
        assert (null, moved) == (52, 50)

    def test_all_vertices(self, workspace, capsys):
        capsys.readouterr()
        main(["count", str(workspace / "eg2_5_3_base.graph"), "--length", "5"])
        assert read_json(capsys)["results"]["counts"] == [2] * 5

    def test_length_cap(self, workspace, capsys):
        graph = str(workspace / "eg2_5_3_base.graph")
        assert main(["count", graph, "--vertex", "0", "--length", "17"]) == EXIT_RESOURCE_CAP
        assert "count_max_length" in capsys.readouterr().err

    def test_vertex_out_of_range(self, workspace):
        graph = str(workspace / "eg2_5_3_base.graph")
        assert main(["count", graph, "--vertex", "9", "--length", "3"]) == EXIT_INPUT_ERROR


class TestOtherCommands:
    def test_project(self, workspace, capsys):
        capsys.readouterr()
        assert main(["project", str(workspace / "eg2_5_3.conn"), "--walk", "1,5,8,11,14,2,1"]) == EXIT_OK
        results = read_json(capsys)["results"]
        assert results["base"] == [0, 1, 2, 3, 4, 0]
        assert results["fiber"] == [1, 2]
        assert results["labels"][1] == "(1,2)"

    def test_export_dot_to_file(self, workspace, tmp_path):
        out = tmp_path / "eg2.dot"
        assert main(["--out", str(out), "export-dot", str(workspace / "eg2_5_3.conn")]) == EXIT_OK
        text = out.read_text()
        assert text.count(" -- ") == 30
        assert "group=4" in text

    def test_verify_lemmas(self, workspace, capsys):
        capsys.readouterr()
        code = main(["verify-lemmas", str(workspace / "eg2_5_3.conn"), "--vertex", "1", "--max-length", "5"])
        assert code == EXIT_OK
        assert read_json(capsys)["results"]["ok"] is True

    def test_history_lists_logged_runs(self, workspace, capsys):
        main(["count", str(workspace / "eg2_5_3_base.graph"), "--vertex", "0", "--length", "3"])
        main(["--no-ledger", "count", str(workspace / "eg2_5_3_base.graph"), "--vertex", "0", "--length", "4"])
        capsys.readouterr()
        assert main(["history", "--limit", "5"]) == EXIT_OK
        runs = read_json(capsys)["runs"]
        assert runs[0]["command"].startswith("count")
        assert runs[0]["command"].endswith("--length 3")
        assert runs[0]["status"] == "success"
        assert runs[1]["command"].startswith("example eg2")

    def test_history_ignores_out_value_named_like_a_command(self, workspace, tmp_path, monkeypatch, capsys):
        monkeypatch.chdir(tmp_path)
        graph = str(workspace / "eg2_5_3_base.graph")
        assert main(["--out", "count", "count", graph, "--vertex", "0", "--length", "3"]) == EXIT_OK
        assert (tmp_path / "count").exists()
        capsys.readouterr()
        main(["history", "--limit", "1"])
        assert read_json(capsys)["runs"][0]["command"] == f"count {graph} --vertex 0 --length 3"
