from __future__ import annotations

import json
import subprocess
import sys

from chainbench.bench import tree_hash
from chainbench.cli import main
from paper_cases import NIBBLES_ANSWER, NIBBLES_STATE


def _run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_tasks_listing(capsys):
    code, out, _ = _run(capsys, "tasks", "--format", "structured")
    data = json.loads(out)
    assert code == 0 and data["count"] == 42
    assert {t["category"] for t in data["tasks"]} == {"Algorithm", "Graph", "Puzzle", "Game"}


def test_verify_nibbles_example(capsys, tmp_path):
    state = tmp_path / "state.json"
    state.write_text(json.dumps(NIBBLES_STATE))
    code, out, _ = _run(capsys, "verify", "--task", "nibbles", "--state", str(state),
                        "--answer", NIBBLES_ANSWER, "--format", "structured")
    assert code == 0 and json.loads(out)["reward"] == 1
    code, out, _ = _run(capsys, "verify", "--task", "nibbles", "--state", str(state), "--answer", "left")
    assert code == 0 and out.startswith("reward 0")


def test_generate_solve_verify_chain(capsys, tmp_path):
    inst = tmp_path / "inst.jsonl"
    assert _run(capsys, "generate", "--task", "sudoku", "--level", "2", "--seed", "9", "--count", "3",
                "--out", str(inst))[0] == 0
    rec = json.loads(inst.read_text().splitlines()[1])
    code, out, _ = _run(capsys, "solve", "--instance", str(inst), "--id", rec["id"], "--format", "structured")
    answer = json.loads(out)["answer"]
    ans_file = tmp_path / "ans.txt"
    ans_file.write_text(f"Reasoning...\nFinal answer: {answer}\n")
    code, out, _ = _run(capsys, "verify", "--instance", str(inst), "--id", rec["id"],
                        "--answer-file", str(ans_file), "--format", "structured")
    assert json.loads(out)["accepted"] is True


def test_render(capsys, tmp_path):
    code, _, _ = _run(capsys, "render", "--task", "maze", "--level", "1", "--seed", "1", "--out", str(tmp_path))
    assert code == 0
    assert len(list(tmp_path.glob("*.svg"))) == 1 and len(list(tmp_path.glob("*.txt"))) == 1


def test_usage_errors(capsys):
    assert _run(capsys, "generate", "--task", "chess")[0] == 1
    assert _run(capsys, "generate", "--task", "sudoku", "--level", "7")[0] == 1
    assert _run(capsys, "tasks", "--bogus")[0] == 1
    assert _run(capsys)[0] == 1
    assert _run(capsys, "verify", "--task", "sudoku")[0] == 1


def test_data_errors(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert _run(capsys, "solve", "--task", "sudoku", "--state", str(bad))[0] == 2
    assert _run(capsys, "solve", "--task", "sudoku", "--state", str(tmp_path / "missing.json"))[0] == 2


def test_config_file_and_flag_precedence(capsys, tmp_path):
    conf = tmp_path / "run.conf"
    conf.write_text("# generation settings\ntask = lis\nlevel = 3\nseed = 4\n")
    code, out, _ = _run(capsys, "generate", "--config", str(conf))
    assert code == 0 and json.loads(out)["level"] == 3 and json.loads(out)["task"] == "lis"
    code, out, _ = _run(capsys, "generate", "--config", str(conf), "--level", "2")
    assert json.loads(out)["level"] == 2
    conf.write_text("colour = blue\n")
    assert _run(capsys, "generate", "--config", str(conf), "--task", "lis")[0] == 1


def test_bench_emit_and_score(capsys, tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for d in (a, b):
        assert _run(capsys, "bench-emit", "--seed", "7", "--out", str(d), "--per-level", "1",
                    "--tasks", "lis,maze,binairo,max_flow")[0] == 0
    assert tree_hash(a) == tree_hash(b)
    preds = tmp_path / "p.jsonl"
    recs = [json.loads(l) for l in (a / "instances.jsonl").read_text().splitlines()]
    preds.write_text("".join(json.dumps({"id": r["id"], "output": r["ground_truth"]}) + "\n" for r in recs))
    code, out, _ = _run(capsys, "score", "--manifest", str(a), "--predictions", str(preds),
                        "--format", "structured", "--out", str(tmp_path / "report.json"))
    assert code == 0 and json.loads(out)["overall"] == 100.0
    preds.write_text(json.dumps({"id": "ghost", "output": "1"}) + "\n")
    assert _run(capsys, "score", "--manifest", str(a), "--predictions", str(preds))[0] == 2


def test_serg_mock(capsys, tmp_path):
    code, out, _ = _run(capsys, "serg", "--out", str(tmp_path), "--tasks", "maze,lis", "--per-task", "4",
                        "--mock", "--format", "structured")
    assert code == 0 and json.loads(out)["count"] == 8


def test_ahpo_demo(capsys, tmp_path):
    code, out, _ = _run(capsys, "ahpo-demo")
    assert code == 0 and "grad check" in out
    assert _run(capsys, "ahpo-demo", "--eps", "3")[0] == 1
    assert _run(capsys, "ahpo-demo", "--batch", str(tmp_path / "none.json"))[0] == 2


def test_console_entry_point():
    out = subprocess.run([sys.executable, "-m", "chainbench.cli", "tasks"], capture_output=True, text=True)
    assert out.returncode == 0 and len(out.stdout.splitlines()) == 42
