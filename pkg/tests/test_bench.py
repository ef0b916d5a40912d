from __future__ import annotations

import json

from chainbench.bench import (BenchConfig, bench_jobs, emit_benchmark, load_instances, load_manifest,
                              sha256, solution_count, sweep, tree_hash)
from chainbench.core import generate_instance


def test_layout_and_hashes(tmp_path):
    man = emit_benchmark(tmp_path, cfg=BenchConfig(seed=3, per_level=1, tasks=("sudoku", "hanoi")))
    assert man["count"] == 10 and len(man["entries"]) == 10
    assert load_manifest(tmp_path) == load_manifest(tmp_path / "manifest.json")
    for e in man["entries"]:
        assert sha256((tmp_path / e["text"]).read_bytes()) == e["text_sha256"]
        assert sha256((tmp_path / e["image"]).read_bytes()) == e["image_sha256"]
    lines = (tmp_path / "instances.jsonl").read_text(encoding="utf-8").splitlines()
    assert [json.loads(l)["id"] for l in lines] == [e["id"] for e in man["entries"]]
    insts = load_instances(tmp_path)
    rep = sweep(insts.values())
    assert rep.accepted == rep.total == 10 and rep.unique_checked == 5 and not rep.not_unique


def test_parallel_matches_serial(tmp_path):
    cfg = dict(seed=4, per_level=1, tasks=("lis", "maze", "kakuro"))
    emit_benchmark(tmp_path / "a", cfg=BenchConfig(**cfg))
    emit_benchmark(tmp_path / "b", cfg=BenchConfig(workers=2, **cfg))
    assert tree_hash(tmp_path / "a") == tree_hash(tmp_path / "b")


def test_jobs_are_balanced():
    jobs = bench_jobs(BenchConfig())
    assert len(jobs) == 1260
    assert len({j[3] for j in jobs}) == 1260


def test_solution_count_claims():
    assert solution_count(generate_instance("lis", 1, 0)) is None
    assert solution_count(generate_instance("wordsearch", 2, 0)) == 1
    assert solution_count(generate_instance("minesweeper", 2, 0)) == 1
