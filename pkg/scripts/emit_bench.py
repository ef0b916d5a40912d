"""Emit the benchmark, self-verify it and print its hashes.

Usage: python3 scripts/emit_bench.py OUT_DIR [--seed N] [--workers K]
"""
from __future__ import annotations

import argparse
import logging
import time

from chainbench.bench import BenchConfig, emit_benchmark, load_instances, sweep, tree_hash


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("out")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(asctime)s %(name)s %(message)s")
    t0 = time.perf_counter()
    man = emit_benchmark(args.out, cfg=BenchConfig(seed=args.seed, workers=args.workers))
    secs = time.perf_counter() - t0
    rep = sweep(load_instances(args.out).values())
    print(f"instances       {man['count']}  {man['category_counts']}")
    print(f"emit time       {secs:.1f}s")
    print(f"self-verified   {rep.accepted}/{rep.total}")
    print(f"unique puzzles  {rep.unique_checked - len(rep.not_unique)}/{rep.unique_checked}")
    print(f"content sha256  {man['content_sha256']}")
    print(f"tree sha256     {tree_hash(args.out)}")


if __name__ == "__main__":
    main()
