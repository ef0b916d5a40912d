"""Short tour: generate, render, verify, scaffold and the loss kernel.

Usage: python3 scripts/demo.py [TASK] [LEVEL]
"""
from __future__ import annotations

import json
import sys

from chainbench.ahpo import demo as ahpo_demo
from chainbench.core import generate_instance, verify_answer
from chainbench.render import render_text
from chainbench.serg import build_scaffold


def main() -> None:
    task = sys.argv[1] if len(sys.argv) > 1 else "nibbles"
    level = int(sys.argv[2]) if len(sys.argv) > 2 else 2
    inst = generate_instance(task, level, seed=1)
    print(render_text(inst))
    print("\nground truth:", inst.ground_truth)
    print("verify(ground truth):", verify_answer(inst, inst.ground_truth))
    print("verify(empty):       ", verify_answer(inst, ""))
    print("\nscaffold:\n" + build_scaffold(inst).text)
    print("\nloss kernel on a toy batch:")
    print(json.dumps(ahpo_demo(), indent=1, default=float))


if __name__ == "__main__":
    main()
