from __future__ import annotations

import json
import urllib.error
import urllib.request
from concurrent.futures import ThreadPoolExecutor

import pytest

from chainbench.bench import BenchConfig, emit_benchmark, load_instances
from chainbench.core import generate_instance, instance_from_state, verify_answer
from chainbench.harness import (ManifestMismatch, ServiceContext, encode, handle, score,
                                score_instances, serve_in_thread)
from paper_cases import NIBBLES_ANSWER, NIBBLES_STATE, regression_requests


@pytest.fixture(scope="module")
def small_bench(tmp_path_factory):
    d = tmp_path_factory.mktemp("bench")
    emit_benchmark(d, cfg=BenchConfig(seed=5, per_level=2, tasks=("lis", "max_flow", "sudoku", "nibbles")))
    return d


def _write(path, rows):
    path.write_text("".join(json.dumps(r) + "\n" for r in rows), encoding="utf-8")
    return path


def test_scores(small_bench, tmp_path):
    insts = load_instances(small_bench)
    ids = sorted(insts)
    full = score(small_bench, _write(tmp_path / "all.jsonl",
                                     [{"id": i, "output": f"Final answer: {insts[i].ground_truth}"} for i in ids]))
    assert full.overall == 100.0 and full.missing == 0
    assert set(full.per_category) == {"Algorithm", "Graph", "Puzzle", "Game"}
    empty = score(small_bench, _write(tmp_path / "none.jsonl", []))
    assert empty.overall == 0.0 and empty.missing == len(ids)
    half = score(small_bench, _write(tmp_path / "half.jsonl",
                                     [{"id": i, "output": insts[i].ground_truth if k % 2 == 0 else "nonsense"}
                                      for k, i in enumerate(ids)]))
    assert abs(half.overall - 50.0) <= 0.1
    table = full.table().splitlines()
    assert table[0].split(" | ")[-1].strip() == "Overall"
    assert table[2].startswith("text")


def test_unknown_ids_are_a_mismatch(small_bench, tmp_path):
    with pytest.raises(ManifestMismatch):
        score(small_bench, _write(tmp_path / "bad.jsonl", [{"id": "ghost-1-0000", "output": "1"}]))


def test_track_is_validated(small_bench):
    with pytest.raises(ValueError):
        score_instances(load_instances(small_bench), {}, track="audio")


# -- request handling ------------------------------------------------------------------------


def test_verify_matches_in_process():
    ctx = ServiceContext()
    for task, state, answer in regression_requests():
        status, body = handle("POST", "/v1/verify", {"task": task, "initial_state": state, "answer": answer}, ctx)
        v = verify_answer(instance_from_state(task, state), answer)
        assert status == 200
        assert body == {"reward": v.reward, "accepted": v.accepted, "reason": v.reason, "normalized": v.normalized}
        assert body["reward"] == 1


def test_verify_garbage_and_errors():
    ctx = ServiceContext()
    status, body = handle("POST", "/v1/verify", {"task": "nibbles", "initial_state": NIBBLES_STATE,
                                                 "answer": "%%%"}, ctx)
    assert status == 200 and body["reward"] == 0 and body["reason"] == "parse_error"
    assert handle("POST", "/v1/verify", {"task": "chess", "initial_state": {}, "answer": ""}, ctx)[1]["error"] == "unknown_task"
    assert handle("POST", "/v1/verify", {"instance_id": "x", "answer": ""}, ctx)[1]["error"] == "unknown_instance"
    assert handle("POST", "/v1/verify", [], ctx)[0] == 400
    assert handle("GET", "/v1/nothing", None, ctx)[0] == 404
    status, body = handle("POST", "/v1/verify", {"task": "sudoku", "initial_state": {"grid": [[1, 1]]},
                                                 "answer": "1"}, ctx)
    assert status == 400 and body["error"] == "unsolvable"


def test_batch_is_elementwise():
    ctx = ServiceContext()
    items = [{"task": t, "initial_state": s, "answer": a} for t, s, a in regression_requests()]
    items.append({"task": "nibbles", "initial_state": NIBBLES_STATE, "answer": "up"})
    items.append({"task": "nope", "initial_state": {}, "answer": ""})
    status, body = handle("POST", "/v1/verify_batch", {"items": items}, ctx)
    assert status == 200
    singles = [handle("POST", "/v1/verify", it, ctx)[1] for it in items[:-1]]
    assert body["results"][:-1] == singles
    assert body["results"][-1]["error"] == "unknown_task" and body["results"][-1]["reward"] == 0


def test_generate_and_tasks():
    ctx = ServiceContext()
    status, body = handle("POST", "/v1/generate", {"task": "sudoku", "level": 2, "seed": 4}, ctx)
    assert status == 200
    assert body["instances"][0] == generate_instance("sudoku", 2, 4).to_record()
    assert len(handle("POST", "/v1/generate", {"task": "lis", "level": 1, "seed": 4, "count": 3}, ctx)[1]["instances"]) == 3
    assert handle("POST", "/v1/generate", {"task": "lis", "level": 9, "seed": 4}, ctx)[0] == 400
    assert len(handle("GET", "/v1/tasks", None, ctx)[1]["tasks"]) == 42


def test_manifest_instances_by_id(small_bench):
    ctx = ServiceContext.from_manifest(str(small_bench))
    iid, inst = next(iter(ctx.instances.items()))
    status, body = handle("POST", "/v1/verify", {"instance_id": iid, "answer": inst.ground_truth}, ctx)
    assert status == 200 and body["reward"] == 1


# -- over HTTP -------------------------------------------------------------------------------


def _post(url, obj):
    req = urllib.request.Request(url, data=json.dumps(obj).encode(), headers={"Content-Type": "application/json"})
    try:
        with urllib.request.urlopen(req, timeout=60) as r:
            return r.status, r.read()
    except urllib.error.HTTPError as e:
        return e.code, e.read()


def test_http_service_concurrency():
    server, _ = serve_in_thread(0)
    base = f"http://127.0.0.1:{server.server_address[1]}"
    try:
        for task, state, answer in regression_requests():
            expected = encode(handle("POST", "/v1/verify", {"task": task, "initial_state": state, "answer": answer},
                                     ServiceContext())[1])
            with ThreadPoolExecutor(64) as ex:
                got = list(ex.map(lambda _: _post(base + "/v1/verify",
                                                  {"task": task, "initial_state": state, "answer": answer}),
                                  range(200)))
            assert {g for g in got} == {(200, expected)}
        status, raw = _post(base + "/v1/verify", {"task": "nibbles", "initial_state": NIBBLES_STATE,
                                                  "answer": NIBBLES_ANSWER})
        assert json.loads(raw)["reward"] == 1
        assert _post(base + "/v1/unknown", {})[0] == 404
    finally:
        server.shutdown()
        server.server_close()
