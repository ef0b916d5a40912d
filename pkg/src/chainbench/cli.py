"""Command-line entry point.

Exit codes: 0 success, 1 usage error, 2 data error (unreadable input,
manifest mismatch, generation exhausted).  ``--config FILE`` reads
``key = value`` lines whose keys mirror the long flags of the subcommand;
flags given on the command line win over the file.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path
from typing import Any, Optional

from . import __version__

log = logging.getLogger("chainbench")

EXIT_OK, EXIT_USAGE, EXIT_DATA = 0, 1, 2


class UsageError(Exception):
    pass


class DataError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def read_config(path: str) -> dict[str, str]:
    """``key = value`` lines; ``#`` starts a comment."""
    out = {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise DataError(f"cannot read config {path}: {e}") from None
    for n, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise UsageError(f"{path}:{n}: expected key = value")
        out[key.strip().lstrip("-").replace("-", "_")] = value.strip()
    return out


def _emit(args, obj: Any, text: Optional[str] = None) -> None:
    if args.format == "structured":
        print(json.dumps(obj, ensure_ascii=False, sort_keys=True))
    else:
        print(text if text is not None else json.dumps(obj, ensure_ascii=False, indent=1))


def _load_json(path: str) -> Any:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as e:
        raise DataError(f"cannot read {path}: {e}") from None
    except ValueError as e:
        raise DataError(f"{path} is not valid JSON: {e}") from None


def _task(name: str):
    from .core import get_task

    try:
        return get_task(name)
    except KeyError:
        raise UsageError(f"--task: unknown task {name!r} (see `chainbench tasks`)") from None


def _instance_arg(args):
    """Instance from --instance FILE [--id ID], or from --task with --state FILE."""
    from .core import TaskInstance, instance_from_state

    if getattr(args, "instance", None):
        from .bench import read_instances

        try:
            insts = read_instances(args.instance)
        except (OSError, ValueError, KeyError) as e:
            raise DataError(f"cannot read instances from {args.instance}: {e}") from None
        if args.id:
            insts = [i for i in insts if i.id == args.id]
        if not insts:
            raise DataError("no matching instance")
        return insts[0]
    if not args.task or not args.state:
        raise UsageError("give --instance FILE, or --task NAME with --state FILE")
    _task(args.task)
    state = _load_json(args.state)
    if isinstance(state, dict) and "initial_state" in state and "task" in state:
        return TaskInstance.from_record(state)
    try:
        return instance_from_state(args.task, state)
    except Exception as e:
        raise DataError(f"state could not be solved: {type(e).__name__}: {e}") from None


# -- subcommands ---------------------------------------------------------------------------


def cmd_tasks(args) -> int:
    from .core import all_tasks

    rows = [{"name": s.name, "title": s.title, "category": s.category, "grammar": s.grammar,
             "verify_mode": s.verify_mode} for s in all_tasks()]
    text = "\n".join(f"{r['category']:<10} {r['name']:<22} grammar={r['grammar']:<22} {r['verify_mode']}"
                     for r in rows)
    _emit(args, {"tasks": rows, "count": len(rows)}, text)
    return EXIT_OK


def cmd_generate(args) -> int:
    from .bench import record_line
    from .core import generate_instance
    from .rng import instance_seed

    _task(args.task)
    if not 1 <= args.level <= 5:
        raise UsageError("--level: must be in 1..5")
    lines = []
    for i in range(args.count):
        seed = args.seed if args.count == 1 else instance_seed(args.task, args.level, i, args.seed)
        lines.append(record_line(generate_instance(args.task, args.level, seed, index=i)))
    data = "\n".join(lines) + "\n"
    if args.out:
        Path(args.out).write_text(data, encoding="utf-8")
        _emit(args, {"written": len(lines), "path": args.out}, f"wrote {len(lines)} instances to {args.out}")
    else:
        sys.stdout.write(data)
    return EXIT_OK


def cmd_solve(args) -> int:
    from . import grammar as G

    inst = _instance_arg(args)
    spec = _task(inst.task)
    try:
        sol = G.normalize(spec.grammar, spec.solve(inst.initial_state))
    except Exception as e:
        raise DataError(f"solver failed: {type(e).__name__}: {e}") from None
    _emit(args, {"id": inst.id, "task": inst.task, "answer": sol}, sol)
    return EXIT_OK


def cmd_verify(args) -> int:
    from .core import verify_answer

    inst = _instance_arg(args)
    if args.answer is None and args.answer_file is None:
        raise UsageError("give --answer TEXT or --answer-file FILE")
    answer = args.answer
    if args.answer_file:
        try:
            answer = Path(args.answer_file).read_text(encoding="utf-8")
        except OSError as e:
            raise DataError(str(e)) from None
    v = verify_answer(inst, answer)
    obj = {"id": inst.id, "task": inst.task, "reward": v.reward, "accepted": v.accepted,
           "reason": v.reason}
    _emit(args, obj, f"reward {v.reward}" + (f" ({v.reason})" if v.reason else ""))
    return EXIT_OK


def cmd_render(args) -> int:
    from .core import generate_instance
    from .render import render_image, render_text

    if args.instance or args.state:
        inst = _instance_arg(args)
    else:
        if not args.task:
            raise UsageError("give --task with --level/--seed, or --instance FILE")
        _task(args.task)
        inst = generate_instance(args.task, args.level, args.seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / f"{inst.id}.txt").write_text(render_text(inst), encoding="utf-8")
    (out / f"{inst.id}.svg").write_bytes(render_image(inst))
    _emit(args, {"id": inst.id, "text": str(out / f"{inst.id}.txt"), "image": str(out / f"{inst.id}.svg")},
          f"wrote {out / inst.id}.txt and .svg")
    return EXIT_OK


def cmd_bench_emit(args) -> int:
    from .bench import BenchConfig, emit_benchmark

    tasks = tuple(t for t in args.tasks.split(",") if t) if args.tasks else None
    for t in tasks or ():
        _task(t)
    cfg = BenchConfig(seed=args.seed, per_level=args.per_level, tasks=tasks, workers=args.workers)
    man = emit_benchmark(args.out, cfg=cfg)
    obj = {"count": man["count"], "category_counts": man["category_counts"],
           "content_sha256": man["content_sha256"], "out": args.out}
    _emit(args, obj, f"wrote {man['count']} instances to {args.out} "
                     f"(content {man['content_sha256'][:16]}, {man['category_counts']})")
    return EXIT_OK


def cmd_serg(args) -> int:
    from .core import all_tasks
    from .serg import HttpRefiner, MockRefiner, TrainingSpec, emit_training_set

    names = [t for t in args.tasks.split(",") if t] if args.tasks else [s.name for s in all_tasks()]
    for t in names:
        _task(t)
    if args.total:
        base, extra = divmod(args.total, len(names))
        counts = {t: base + (i < extra) for i, t in enumerate(names)}
    else:
        counts = {t: args.per_task for t in names}
    counts = {t: c for t, c in counts.items() if c > 0}
    endpoint = args.refiner_url or os.environ.get("CHAINBENCH_REFINER_URL")
    client = HttpRefiner(endpoint, timeout=args.timeout) if endpoint and not args.mock else MockRefiner()
    man = emit_training_set(TrainingSpec(counts=counts, seed=args.seed, max_inflight=args.inflight),
                            args.out, client)
    _emit(args, {"count": man["count"], "stats": man["stats"], "out": args.out},
          f"wrote {man['count']} verified records to {args.out}\n" + json.dumps(man["stats"], indent=1))
    return EXIT_OK


def cmd_score(args) -> int:
    from .harness import ManifestMismatch, score

    try:
        rep = score(args.manifest, args.predictions, args.track)
    except ManifestMismatch as e:
        print(f"manifest_mismatch: {e}", file=sys.stderr)
        return EXIT_DATA
    except (OSError, ValueError, KeyError) as e:
        raise DataError(f"cannot score: {type(e).__name__}: {e}") from None
    if args.out:
        Path(args.out).write_text(json.dumps(rep.to_dict(), sort_keys=True) + "\n", encoding="utf-8")
    _emit(args, rep.to_dict(), rep.table())
    return EXIT_OK


def cmd_serve(args) -> int:
    from .harness import serve

    try:
        serve(args.host, args.port, args.manifest)
    except OSError as e:
        raise DataError(f"bind_failure: {e}") from None
    except KeyboardInterrupt:
        pass
    return EXIT_OK


def cmd_ahpo_demo(args) -> int:
    from .ahpo import AhpoConfig, AhpoError, demo

    try:
        cfg = AhpoConfig(eps=args.eps, r_hat=args.r_hat, z_mode=args.z_mode)
    except ValueError as e:
        raise UsageError(str(e)) from None
    try:
        out = demo(args.batch, cfg)
    except (OSError, ValueError, KeyError, AhpoError) as e:
        raise DataError(f"cannot evaluate batch: {e}") from None
    lines = [f"loss {out['loss']:.10g}", f"xi {out['xi']}", f"advantages {out['advantages']}", f"Z {out['z']}"]
    if "grad_check_max_rel_error" in out:
        lines.append(f"grad check max relative error {out['grad_check_max_rel_error']:.3g}")
    _emit(args, out, "\n".join(lines))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="chainbench", description="Procedural reasoning tasks: generate, verify, score.")
    p.add_argument("--version", action="version", version=__version__)
    common = _Parser(add_help=False)
    common.add_argument("--format", choices=("text", "structured"), default="text")
    common.add_argument("--config", help="key = value file; flags win over it")
    common.add_argument("--log-level", default="WARNING")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    def add(name, fn, help_):
        sp = sub.add_parser(name, parents=[common], help=help_)
        sp.set_defaults(fn=fn)
        return sp

    add("tasks", cmd_tasks, "list the task catalog")

    sp = add("generate", cmd_generate, "generate instances")
    sp.add_argument("--task", required=True)
    sp.add_argument("--level", type=int, default=1)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--count", type=int, default=1)
    sp.add_argument("--out")

    for name, fn, help_ in (("solve", cmd_solve, "solve an instance"),
                            ("verify", cmd_verify, "verify an answer")):
        sp = add(name, fn, help_)
        sp.add_argument("--task")
        sp.add_argument("--state", help="JSON file holding an initial state (or an instance record)")
        sp.add_argument("--instance", help="instance file (one record per line)")
        sp.add_argument("--id", help="instance id inside --instance")
        if name == "verify":
            sp.add_argument("--answer")
            sp.add_argument("--answer-file")

    sp = add("render", cmd_render, "write text and image renderings")
    sp.add_argument("--task")
    sp.add_argument("--level", type=int, default=1)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--state")
    sp.add_argument("--instance")
    sp.add_argument("--id")
    sp.add_argument("--out", default="render_out")

    sp = add("bench-emit", cmd_bench_emit, "emit the balanced benchmark")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out", required=True)
    sp.add_argument("--per-level", type=int, default=6)
    sp.add_argument("--tasks", help="comma-separated subset (default: all)")
    sp.add_argument("--workers", type=int, default=1)

    sp = add("serg", cmd_serg, "build verified reasoning-scaffold records")
    sp.add_argument("--out", required=True)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--tasks")
    sp.add_argument("--per-task", type=int, default=5)
    sp.add_argument("--total", type=int, default=0, help="spread this many records over the tasks")
    sp.add_argument("--refiner-url", help="refiner endpoint (default: $CHAINBENCH_REFINER_URL)")
    sp.add_argument("--timeout", type=float, default=60.0)
    sp.add_argument("--inflight", type=int, default=8)
    sp.add_argument("--mock", action="store_true", help="use the pass-through refiner")

    sp = add("score", cmd_score, "score a predictions file against a manifest")
    sp.add_argument("--manifest", required=True)
    sp.add_argument("--predictions", required=True)
    sp.add_argument("--track", choices=("text", "image"), default="text")
    sp.add_argument("--out")

    sp = add("serve", cmd_serve, "run the reward-oracle HTTP service")
    sp.add_argument("--host", default="127.0.0.1")
    sp.add_argument("--port", type=int, default=8080)
    sp.add_argument("--manifest")

    sp = add("ahpo-demo", cmd_ahpo_demo, "evaluate the hybrid loss on a batch file")
    sp.add_argument("--batch")
    sp.add_argument("--eps", type=float, default=0.2)
    sp.add_argument("--r-hat", type=int, default=2)
    sp.add_argument("--z-mode", choices=("total_tokens", "per_term"), default="total_tokens")
    return p


def _config_path(argv: list[str]) -> Optional[str]:
    for i, tok in enumerate(argv):
        if tok == "--config":
            if i + 1 >= len(argv):
                raise UsageError("--config: expected a file path")
            return argv[i + 1]
        if tok.startswith("--config="):
            return tok.split("=", 1)[1]
    return None


def _apply_config(parser: argparse.ArgumentParser, argv: list[str]) -> argparse.Namespace:
    path = _config_path(argv)
    if path:
        sub = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction))
        cmd = next((t for t in argv if t in sub.choices), None)
        if cmd is None:
            raise UsageError("--config needs a subcommand")
        sp = sub.choices[cmd]
        known = {a.dest: a for a in sp._actions}
        conf = read_config(path)
        for key, value in conf.items():
            if key not in known or key in ("help", "config"):
                raise UsageError(f"{path}: unknown setting {key!r}")
            action = known[key]
            if isinstance(action, argparse._StoreTrueAction):
                conf[key] = value.lower() in ("1", "true", "yes", "on")
            action.required = False  # the file supplies it unless the flag overrides it
        sp.set_defaults(**conf)
    return parser.parse_args(argv)


def main(argv: Optional[list[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = _apply_config(parser, argv)
        if not getattr(args, "fn", None):
            parser.print_help()
            return EXIT_USAGE
        logging.basicConfig(level=getattr(logging, str(args.log_level).upper(), logging.WARNING),
                            format="%(levelname)s %(name)s: %(message)s")
        return args.fn(args)
    except UsageError as e:
        print(f"usage error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as e:
        print(f"data error: {e}", file=sys.stderr)
        return EXIT_DATA
    except Exception as e:
        from .core import GenerationExhausted

        if isinstance(e, GenerationExhausted):
            print(f"generation_exhausted: {e}", file=sys.stderr)
            return EXIT_DATA
        raise


if __name__ == "__main__":
    sys.exit(main())
