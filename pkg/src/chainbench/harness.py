"""Offline scoring of prediction files and the reward-oracle HTTP service.

Service endpoints (JSON bodies, UTF-8):

POST /v1/verify
    {"task", "initial_state" | "instance_id", "answer", ["ground_truth"]}
    -> {"reward": 0|1, "accepted": bool, "reason": str|null, "normalized": str|null}
POST /v1/verify_batch
    {"items": [<verify body>, ...]} -> {"results": [<verify response> | {"reward": 0, "error": code}]}
POST /v1/generate
    {"task", "level", "seed", ["count"]} -> {"instances": [<instance record>, ...]}
GET  /v1/tasks
    -> {"tasks": [{"name", "title", "category", "grammar", "verify_mode"}, ...]}

Errors are {"error": code, "detail": text} with status 400 (bad_request,
unknown_task, unknown_instance, unsolvable) or 404 (not_found).
"""
from __future__ import annotations

import json
import logging
import threading
from dataclasses import asdict, dataclass, field
from functools import lru_cache
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from typing import Any, Optional

from .bench import load_instances, load_manifest
from .core import CATEGORIES, TaskInstance, all_tasks, generate_instance, get_task, instance_from_state, verify_answer
from .serg import extract_final_answer

log = logging.getLogger(__name__)

TRACKS = ("text", "image")


class ManifestMismatch(ValueError):
    code = "manifest_mismatch"


def answer_of(output: str) -> str:
    """The answer part of a raw model output (text after the last final-answer marker)."""
    ans = extract_final_answer(output or "")
    return output if ans is None else ans


@dataclass
class ScoreReport:
    track: str
    n: int
    overall: float
    per_category: dict[str, float]
    per_level: dict[str, float]
    per_task: dict[str, float]
    missing: int = 0
    reasons: dict[str, int] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)

    def table(self) -> str:
        """Accuracy table: one row for the track, one column per category plus overall."""
        head = ["Track"] + list(CATEGORIES) + ["Overall"]
        row = [self.track] + [f"{self.per_category.get(c, 0.0):.1f}" for c in CATEGORIES] + [f"{self.overall:.1f}"]
        width = [max(len(a), len(b)) for a, b in zip(head, row)]
        fmt = lambda cells: " | ".join(c.ljust(w) for c, w in zip(cells, width))
        return "\n".join([fmt(head), "-+-".join("-" * w for w in width), fmt(row)])


def read_predictions(path) -> dict[str, str]:
    """Line-delimited records with "id" and the raw output under "output" (or "answer")."""
    out = {}
    with open(path, encoding="utf-8") as fh:
        for n, line in enumerate(fh, 1):
            if not line.strip():
                continue
            rec = json.loads(line)
            text = rec.get("output", rec.get("answer", rec.get("prediction", "")))
            out[str(rec["id"])] = text if isinstance(text, str) else json.dumps(text)
    return out


def _pct(hits: int, total: int) -> float:
    return round(100.0 * hits / total, 4) if total else 0.0


def score_instances(instances: dict[str, TaskInstance], predictions: dict[str, str],
                    track: str = "text") -> ScoreReport:
    if track not in TRACKS:
        raise ValueError(f"track must be one of {TRACKS}")
    extra = sorted(set(predictions) - set(instances))
    if extra:
        raise ManifestMismatch(f"{len(extra)} prediction ids are not in the manifest, e.g. {extra[0]}")
    groups: dict[str, dict[Any, list[int]]] = {"cat": {}, "lvl": {}, "task": {}}
    total = hits = missing = 0
    reasons: dict[str, int] = {}
    for iid in sorted(instances):
        inst = instances[iid]
        if iid in predictions:
            v = verify_answer(inst, answer_of(predictions[iid]))
            r = v.reward
            if not v.accepted:
                reasons[v.reason] = reasons.get(v.reason, 0) + 1
        else:
            missing += 1
            r = 0
        total += 1
        hits += r
        for key, g in (("cat", inst.category), ("lvl", str(inst.level)), ("task", inst.task)):
            cell = groups[key].setdefault(g, [0, 0])
            cell[0] += r
            cell[1] += 1
    if missing:
        log.warning("%d instances have no prediction and score 0", missing)
    agg = {k: {g: _pct(h, t) for g, (h, t) in sorted(v.items())} for k, v in groups.items()}
    per_cat = {c: agg["cat"][c] for c in CATEGORIES if c in agg["cat"]}
    return ScoreReport(track, total, _pct(hits, total), per_cat, agg["lvl"], agg["task"], missing,
                       dict(sorted(reasons.items())))


def score(manifest, predictions, track: str = "text") -> ScoreReport:
    return score_instances(load_instances(manifest), read_predictions(predictions), track)


# -- request handling (pure) ---------------------------------------------------------


class RequestError(ValueError):
    def __init__(self, code: str, detail: str = "", status: int = 400):
        super().__init__(detail or code)
        self.code = code
        self.status = status


@lru_cache(maxsize=4096)
def _instance_for_state(task: str, state_json: str) -> TaskInstance:
    return instance_from_state(task, json.loads(state_json))


@dataclass
class ServiceContext:
    instances: dict[str, TaskInstance] = field(default_factory=dict)
    max_batch: int = 100_000
    max_generate: int = 100

    @classmethod
    def from_manifest(cls, manifest: Optional[str]) -> "ServiceContext":
        if not manifest:
            return cls()
        load_manifest(manifest)
        return cls(instances=load_instances(manifest))


def _resolve(item: dict, ctx: ServiceContext) -> TaskInstance:
    if not isinstance(item, dict):
        raise RequestError("bad_request", "item must be an object")
    if "instance_id" in item:
        inst = ctx.instances.get(str(item["instance_id"]))
        if inst is None:
            raise RequestError("unknown_instance", str(item["instance_id"]))
        return inst
    task = item.get("task")
    state = item.get("initial_state")
    if not isinstance(task, str) or not isinstance(state, dict):
        raise RequestError("bad_request", "need task and initial_state, or instance_id")
    try:
        spec = get_task(task)
    except KeyError:
        raise RequestError("unknown_task", task) from None
    if isinstance(item.get("ground_truth"), str):
        return TaskInstance(id="adhoc", task=task, category=spec.category, level=0, seed=0,
                            question="", initial_state=state, ground_truth=item["ground_truth"],
                            grammar=spec.grammar)
    try:
        return _instance_for_state(task, json.dumps(state))
    except Exception as e:  # the state itself is malformed or has no solution
        raise RequestError("unsolvable", f"{type(e).__name__}: {e}") from None


def verify_item(item: dict, ctx: ServiceContext) -> dict:
    inst = _resolve(item, ctx)
    answer = item.get("answer", "")
    if not isinstance(answer, str):
        raise RequestError("bad_request", "answer must be a string")
    v = verify_answer(inst, answer)
    return {"reward": v.reward, "accepted": v.accepted, "reason": v.reason,
            "normalized": v.normalized}


def handle(method: str, path: str, body: Any, ctx: ServiceContext) -> tuple[int, dict]:
    """Route one request; returns (status, response object).  Never raises."""
    try:
        if method == "GET" and path == "/v1/tasks":
            return 200, {"tasks": [{"name": s.name, "title": s.title, "category": s.category,
                                    "grammar": s.grammar, "verify_mode": s.verify_mode}
                                   for s in all_tasks()]}
        if method != "POST" or path not in ("/v1/verify", "/v1/verify_batch", "/v1/generate"):
            raise RequestError("not_found", f"{method} {path}", 404)
        if not isinstance(body, dict):
            raise RequestError("bad_request", "body must be a JSON object")
        if path == "/v1/verify":
            return 200, verify_item(body, ctx)
        if path == "/v1/verify_batch":
            items = body.get("items")
            if not isinstance(items, list) or len(items) > ctx.max_batch:
                raise RequestError("bad_request", "items must be a list within the batch limit")
            results = []
            for it in items:
                try:
                    results.append(verify_item(it, ctx))
                except RequestError as e:
                    results.append({"reward": 0, "error": e.code, "detail": str(e)})
            return 200, {"results": results}
        task, level, seed = body.get("task"), body.get("level"), body.get("seed", 0)
        count = body.get("count", 1)
        if not isinstance(task, str) or not isinstance(level, int) or not isinstance(seed, int) \
                or not isinstance(count, int) or not 1 <= count <= ctx.max_generate:
            raise RequestError("bad_request", "need task, integer level, seed and count")
        try:
            get_task(task)
        except KeyError:
            raise RequestError("unknown_task", task) from None
        if not 1 <= level <= 5:
            raise RequestError("bad_request", "level must be in 1..5")
        from .rng import instance_seed

        insts = [generate_instance(task, level, seed if count == 1 else instance_seed(task, level, i, seed), index=i)
                 for i in range(count)]
        return 200, {"instances": [i.to_record() for i in insts]}
    except RequestError as e:
        return e.status, {"error": e.code, "detail": str(e)}
    except Exception as e:  # pragma: no cover - last-resort guard
        log.exception("request failed")
        return 500, {"error": "internal", "detail": type(e).__name__}


def encode(obj: dict) -> bytes:
    return json.dumps(obj, sort_keys=True, ensure_ascii=False, separators=(",", ":")).encode("utf-8")


class _Server(ThreadingHTTPServer):
    daemon_threads = True
    request_queue_size = 1024  # listen backlog for bursts of concurrent trainers


def make_server(host: str = "127.0.0.1", port: int = 8080, manifest: Optional[str] = None) -> ThreadingHTTPServer:
    """Bound (not yet serving) threaded HTTP server; raises OSError on bind failure."""
    ctx = ServiceContext.from_manifest(manifest)

    class Handler(BaseHTTPRequestHandler):
        protocol_version = "HTTP/1.1"

        def _reply(self, status: int, obj: dict) -> None:
            data = encode(obj)
            self.send_response(status)
            self.send_header("Content-Type", "application/json")
            self.send_header("Content-Length", str(len(data)))
            self.end_headers()
            self.wfile.write(data)

        def do_GET(self):
            self._reply(*handle("GET", self.path, None, ctx))

        def do_POST(self):
            n = int(self.headers.get("Content-Length") or 0)
            raw = self.rfile.read(n) if n else b""
            try:
                body = json.loads(raw.decode("utf-8")) if raw else None
            except (UnicodeDecodeError, ValueError):
                self._reply(400, {"error": "bad_request", "detail": "body is not JSON"})
                return
            self._reply(*handle("POST", self.path, body, ctx))

        def log_message(self, fmt, *args):
            log.debug("%s - %s", self.address_string(), fmt % args)

    return _Server((host, port), Handler)


def serve(host: str = "127.0.0.1", port: int = 8080, manifest: Optional[str] = None) -> None:
    server = make_server(host, port, manifest)
    log.info("serving on http://%s:%d", host, server.server_address[1])
    try:
        server.serve_forever()
    finally:
        server.server_close()


def serve_in_thread(port: int = 0, manifest: Optional[str] = None) -> tuple[ThreadingHTTPServer, threading.Thread]:
    """Start a server on a background thread (port 0 picks a free port)."""
    server = make_server("127.0.0.1", port, manifest)
    t = threading.Thread(target=server.serve_forever, daemon=True)
    t.start()
    return server, t
