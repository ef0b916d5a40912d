from __future__ import annotations

import json
import threading
import time
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import pytest

from chainbench.core import all_tasks, generate_instance, instance_from_state
from chainbench.serg import (FINAL_MARK, HEADERS, DatasetRecord, HttpRefiner, MockRefiner,
                             RefinerError, TrainingSpec, allocate_levels, anchors_replay,
                             build_scaffold, emit_training_set, extract_final_answer,
                             filter_verified, make_record, refine)
from paper_cases import NIBBLES_ANSWER, NIBBLES_STATE

TASKS = [s.name for s in all_tasks()]


def test_nibbles_appendix_anchor():
    inst = instance_from_state("nibbles", NIBBLES_STATE)
    sc = build_scaffold(inst, NIBBLES_ANSWER)
    lines = [text for _, text in sc.steps]
    move3 = next(i for i, l in enumerate(lines) if l.startswith("Move 3:"))
    assert "Apple consumed at (2, 3)" in lines[move3]
    assert any(a.position == move3 and a.kind == "key_calculation" for a in sc.anchors)
    assert anchors_replay(inst, sc)


@pytest.mark.parametrize("task", TASKS)
def test_scaffold_structure(task):
    for level in (1, 4):
        inst = generate_instance(task, level, 13)
        sc = build_scaffold(inst)
        text = sc.text
        positions = [text.index(HEADERS[k]) for k in ("rules", "state", "steps", "validation")]
        assert positions == sorted(positions)
        finals = [a for a in sc.anchors if a.kind == "final_answer"]
        assert len(finals) == 1 and finals[0].position == len(sc.steps) - 1
        assert extract_final_answer(text) == sc.final_answer
        assert build_scaffold(inst).text == text
        assert anchors_replay(inst, sc)


def test_scaffold_rejects_wrong_solution():
    inst = instance_from_state("nibbles", NIBBLES_STATE)
    with pytest.raises(ValueError):
        build_scaffold(inst, "left left")


def test_scaffold_length_grows_with_level():
    means = []
    for level in range(1, 6):
        words = [len(build_scaffold(generate_instance("nibbles", level, s)).text.split()) for s in range(20)]
        means.append(sum(words) / len(words))
    assert means == sorted(means) and means[0] < means[-1]


def test_mock_refiner_passthrough():
    inst = generate_instance("sudoku", 1, 1)
    sc = build_scaffold(inst)
    assert refine(sc, MockRefiner(), inst.question) == sc.text
    rec, err = make_record(inst, MockRefiner())
    assert err is None and rec.verified and rec.refined_cot == rec.rule_cot


def test_corrupted_refinement_is_rejected():
    inst = generate_instance("maze", 2, 1)
    rec, _ = make_record(inst, MockRefiner())
    rec.refined_cot = rec.refined_cot.rsplit(FINAL_MARK, 1)[0] + f"{FINAL_MARK} up up up"
    assert not filter_verified(rec)
    rec.refined_cot = "Some text without any marker."
    assert not filter_verified(rec)
    rec.refined_cot = None
    assert filter_verified(rec)


class _Refiner(BaseHTTPRequestHandler):
    delay = 0.0

    def do_POST(self):
        body = json.loads(self.rfile.read(int(self.headers["Content-Length"])))
        time.sleep(self.delay)
        data = json.dumps({"refined_cot": "Refined.\n" + body["rule_cot"]}).encode()
        self.send_response(200)
        self.send_header("Content-Length", str(len(data)))
        self.end_headers()
        self.wfile.write(data)

    def log_message(self, *a):
        pass


@pytest.fixture
def refiner_server():
    servers = []

    def start(delay=0.0):
        handler = type("H", (_Refiner,), {"delay": delay})
        srv = ThreadingHTTPServer(("127.0.0.1", 0), handler)
        threading.Thread(target=srv.serve_forever, daemon=True).start()
        servers.append(srv)
        return f"http://127.0.0.1:{srv.server_address[1]}/refine"

    yield start
    for s in servers:
        s.shutdown()
        s.server_close()


def test_http_refiner_round_trip(refiner_server):
    client = HttpRefiner(refiner_server(), timeout=5, retries=0)
    rec, err = make_record(generate_instance("hanoi", 2, 3), client)
    assert err is None and rec.refined_cot.startswith("Refined.") and rec.verified


def test_unreachable_refiner_keeps_record():
    dead = HttpRefiner("http://127.0.0.1:9/refine", timeout=1, retries=1, backoff=0)
    rec, err = make_record(generate_instance("lis", 1, 3), dead)
    assert err == "refiner_unavailable"
    assert rec.refined_cot is None and rec.verified
    assert "refined_cot" not in rec.to_json()


def test_slow_refiner_times_out(refiner_server):
    client = HttpRefiner(refiner_server(delay=1.0), timeout=0.2, retries=0)
    with pytest.raises(RefinerError) as e:
        client.refine("q", "cot")
    assert e.value.code == "refiner_timeout"


def test_level_allocation():
    assert allocate_levels(1000, {k: 1.0 for k in range(1, 6)}) == {k: 200 for k in range(1, 6)}
    for total in range(1, 40):
        for off in range(5):
            alloc = allocate_levels(total, {k: 1.0 for k in range(1, 6)}, off)
            assert sum(alloc.values()) == total and max(alloc.values()) - min(alloc.values()) <= 1


def test_small_training_set(tmp_path):
    man = emit_training_set(TrainingSpec({"sudoku": 5}, seed=3), tmp_path, MockRefiner())
    recs = [json.loads(l) for l in (tmp_path / "records.jsonl").read_text().splitlines()]
    assert man["count"] == len(recs) == 5
    assert all(r["verified"] for r in recs)
    assert man["stats"]["unrefined"] == 0


def test_training_set_mixed_tasks(tmp_path):
    counts = {t: 3 for t in TASKS}
    man = emit_training_set(TrainingSpec(counts, seed=1), tmp_path, MockRefiner())
    recs = [DatasetRecord(**json.loads(l)) for l in (tmp_path / "records.jsonl").read_text().splitlines()]
    assert len(recs) == 3 * len(TASKS) == man["count"]
    assert all(filter_verified(r) for r in recs)
    assert man["stats"]["rejected_by_verifier"] == 0
    again = tmp_path / "again"
    emit_training_set(TrainingSpec(counts, seed=1), again, MockRefiner())
    assert (again / "records.jsonl").read_bytes() == (tmp_path / "records.jsonl").read_bytes()
