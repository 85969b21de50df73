"""Human gold-annotation workflow: task creation, per-annotator queues,
label collection, agreement, adjudication, and gold export.

State lives in an append-only line-record log; restarting the service
replays the log and reproduces identical state. A small HTTP/JSON layer
exposes the store to clients on a local socket; every mutation is
serialized through one writer lock.

Annotators never see the automatic label: item payloads for the annotator
role carry the marked sentence and id only.
"""
from __future__ import annotations

import json
import random
import threading
import time
from dataclasses import dataclass, field
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from urllib.parse import parse_qs, urlparse

from .errors import BiogdsError
from .labeller import RELATION_NAMES, Relation, RelationInstance
from .metrics import cohens_kappa


class AnnotationError(BiogdsError):
    def __init__(self, code: str, message: str, offending_ids: list[str] | None = None):
        super().__init__(message)
        self.code = code
        self.message = message
        self.offending_ids = offending_ids or []

    def to_dict(self) -> dict:
        return {"code": self.code, "message": self.message, "offending_ids": self.offending_ids}


@dataclass
class AnnotationTask:
    task_id: str
    items: list[RelationInstance]
    annotator_ids: tuple[str, str]
    guideline_text: str
    seed: int
    # per-annotator presentation order (instance ids)
    orders: dict[str, list[str]] = field(default_factory=dict)


def _shuffled_order(items: list[RelationInstance], seed: int, task_id: str, annotator: str) -> list[str]:
    ids = [i.instance_id for i in items]
    random.Random(f"{seed}:{task_id}:{annotator}").shuffle(ids)
    return ids


def _instance_record(inst: RelationInstance) -> dict:
    return {
        "instance_id": inst.instance_id,
        "article_id": inst.article_id,
        "sentence_index": inst.sentence_index,
        "marked_text": inst.marked_text,
        "e1_start": inst.e1_span[0],
        "e1_end": inst.e1_span[1],
        "e2_start": inst.e2_span[0],
        "e2_end": inst.e2_span[1],
        "label": inst.label.value,
        "method": inst.method,
        "matched_key": inst.matched_key,
    }


def _instance_from(rec: dict) -> RelationInstance:
    return RelationInstance(
        instance_id=rec["instance_id"],
        article_id=rec["article_id"],
        sentence_index=rec["sentence_index"],
        marked_text=rec["marked_text"],
        e1_span=(rec["e1_start"], rec["e1_end"]),
        e2_span=(rec["e2_start"], rec["e2_end"]),
        label=Relation(rec["label"]),
        method=rec["method"],
        matched_key=rec.get("matched_key"),
    )


def blind_item_view(inst: RelationInstance) -> dict:
    """Payload shown to annotators: no automatic label, no matched key."""
    return {
        "instance_id": inst.instance_id,
        "marked_text": inst.marked_text,
        "method": inst.method,
    }


class AnnotationStore:
    """Replayable annotation state. All mutations append to the log first."""

    def __init__(self, log_path: str | Path):
        self.log_path = Path(log_path)
        self.tasks: dict[str, AnnotationTask] = {}
        # (task_id, instance_id, annotator_id) -> label value (latest wins)
        self.labels: dict[tuple[str, str, str], str] = {}
        self.label_history: list[dict] = []
        # (task_id, instance_id) -> (final_label, resolver)
        self.adjudications: dict[tuple[str, str], tuple[str, str]] = {}
        self._lock = threading.Lock()
        if self.log_path.exists():
            self._replay()

    # -- persistence --

    def _append(self, event: dict) -> None:
        with self.log_path.open("a", encoding="utf-8") as fh:
            fh.write(json.dumps(event, ensure_ascii=False, sort_keys=True) + "\n")

    def _replay(self) -> None:
        with self.log_path.open(encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if line:
                    self._apply(json.loads(line), replay=True)

    def _apply(self, event: dict, replay: bool = False) -> None:
        kind = event["event"]
        if kind == "task_created":
            items = [_instance_from(r) for r in event["items"]]
            task = AnnotationTask(
                task_id=event["task_id"],
                items=items,
                annotator_ids=tuple(event["annotators"]),
                guideline_text=event["guidelines"],
                seed=event["seed"],
            )
            task.orders = {
                a: _shuffled_order(items, task.seed, task.task_id, a)
                for a in task.annotator_ids
            }
            self.tasks[task.task_id] = task
        elif kind == "label":
            key = (event["task_id"], event["instance_id"], event["annotator_id"])
            self.labels[key] = event["label"]
            self.label_history.append(event)
        elif kind == "adjudication":
            self.adjudications[(event["task_id"], event["instance_id"])] = (
                event["final_label"], event["resolved_by"],
            )
        else:
            raise AnnotationError("bad_event", f"unknown log event {kind!r}")

    # -- operations --

    def create_task(
        self,
        items: list[RelationInstance],
        annotators: list[str],
        guidelines: str,
        seed: int = 0,
        task_id: str | None = None,
    ) -> AnnotationTask:
        with self._lock:
            if len(annotators) != 2 or annotators[0] == annotators[1]:
                raise AnnotationError("bad_annotators", "exactly two distinct annotators required")
            if not items:
                raise AnnotationError("empty_task", "a task needs at least one item")
            ids = [i.instance_id for i in items]
            if len(ids) != len(set(ids)):
                raise AnnotationError("duplicate_items", "duplicate instance ids in task")
            task_id = task_id or f"task-{len(self.tasks) + 1:04d}"
            if task_id in self.tasks:
                raise AnnotationError("duplicate_task", f"task {task_id} already exists")
            event = {
                "event": "task_created",
                "task_id": task_id,
                "items": [_instance_record(i) for i in items],
                "annotators": list(annotators),
                "guidelines": guidelines,
                "seed": seed,
            }
            self._append(event)
            self._apply(event)
            return self.tasks[task_id]

    def _task(self, task_id: str) -> AnnotationTask:
        task = self.tasks.get(task_id)
        if task is None:
            raise AnnotationError("unknown_task", f"no such task: {task_id}")
        return task

    def _check_annotator(self, task: AnnotationTask, annotator_id: str) -> None:
        if annotator_id not in task.annotator_ids:
            raise AnnotationError(
                "unknown_annotator", f"annotator {annotator_id!r} is not on task {task.task_id}"
            )

    def next_item(self, task_id: str, annotator_id: str) -> RelationInstance | None:
        """First unlabelled item in this annotator's order; None when done.
        Idempotent until a label for it is submitted."""
        task = self._task(task_id)
        self._check_annotator(task, annotator_id)
        by_id = {i.instance_id: i for i in task.items}
        for iid in task.orders[annotator_id]:
            if (task_id, iid, annotator_id) not in self.labels:
                return by_id[iid]
        return None

    def progress(self, task_id: str, annotator_id: str) -> dict:
        task = self._task(task_id)
        self._check_annotator(task, annotator_id)
        done = sum(
            1 for iid in task.orders[annotator_id] if (task_id, iid, annotator_id) in self.labels
        )
        return {"done": done, "total": len(task.items)}

    def submit_label(
        self, task_id: str, instance_id: str, annotator_id: str, label: str,
        submitted_at: float | None = None,
    ) -> dict:
        with self._lock:
            task = self._task(task_id)
            self._check_annotator(task, annotator_id)
            if instance_id not in {i.instance_id for i in task.items}:
                raise AnnotationError(
                    "unknown_instance", f"instance not in task {task_id}", [instance_id]
                )
            if label not in RELATION_NAMES:
                raise AnnotationError("unknown_label", f"label {label!r} is not in the relation set")
            replaced = (task_id, instance_id, annotator_id) in self.labels
            event = {
                "event": "label",
                "task_id": task_id,
                "instance_id": instance_id,
                "annotator_id": annotator_id,
                "label": label,
                "submitted_at": submitted_at if submitted_at is not None else time.time(),
            }
            self._append(event)
            self._apply(event)
            return {"ok": True, "replaced": replaced}

    def _pairs(self, task_id: str) -> list[tuple[str, str, str]]:
        """(instance_id, label_a, label_b) for doubly-labelled items, in task order."""
        task = self._task(task_id)
        a, b = task.annotator_ids
        out = []
        for item in task.items:
            la = self.labels.get((task_id, item.instance_id, a))
            lb = self.labels.get((task_id, item.instance_id, b))
            if la is not None and lb is not None:
                out.append((item.instance_id, la, lb))
        return out

    def agreement(self, task_id: str) -> dict:
        pairs = self._pairs(task_id)
        if not pairs:
            raise AnnotationError("insufficient_data", "no doubly-labelled items yet")
        kappa = cohens_kappa([p[1] for p in pairs], [p[2] for p in pairs])
        disagreements = sum(1 for p in pairs if p[1] != p[2])
        return {
            "kappa": kappa,
            "double_labelled": len(pairs),
            "disagreements": disagreements,
            "total_items": len(self._task(task_id).items),
        }

    def list_disagreements(self, task_id: str) -> list[dict]:
        task = self._task(task_id)
        a, b = task.annotator_ids
        by_id = {i.instance_id: i for i in task.items}
        out = []
        for iid, la, lb in self._pairs(task_id):
            if la != lb:
                resolved = self.adjudications.get((task_id, iid))
                out.append({
                    "instance_id": iid,
                    "marked_text": by_id[iid].marked_text,
                    "labels": {a: la, b: lb},
                    "adjudicated": resolved[0] if resolved else None,
                })
        return out

    def adjudicate(
        self, task_id: str, instance_id: str, final_label: str, resolver: str,
        force: bool = False,
    ) -> dict:
        with self._lock:
            task = self._task(task_id)
            if instance_id not in {i.instance_id for i in task.items}:
                raise AnnotationError(
                    "unknown_instance", f"instance not in task {task_id}", [instance_id]
                )
            if final_label not in RELATION_NAMES:
                raise AnnotationError("unknown_label", f"label {final_label!r} is not in the relation set")
            disagreeing = {iid for iid, la, lb in self._pairs(task_id) if la != lb}
            if instance_id not in disagreeing and not force:
                raise AnnotationError(
                    "not_a_disagreement",
                    "item is not a disagreement; pass force to confirm explicitly",
                    [instance_id],
                )
            event = {
                "event": "adjudication",
                "task_id": task_id,
                "instance_id": instance_id,
                "final_label": final_label,
                "resolved_by": resolver,
                "forced": instance_id not in disagreeing,
            }
            self._append(event)
            self._apply(event)
            return {"ok": True}

    def export_gold(self, task_id: str) -> dict[str, str]:
        """instance_id -> final label. Fails while any item lacks either an
        agreed double label or an adjudication."""
        task = self._task(task_id)
        pairs = {iid: (la, lb) for iid, la, lb in self._pairs(task_id)}
        unresolved = []
        out: dict[str, str] = {}
        for item in task.items:
            iid = item.instance_id
            adjudicated = self.adjudications.get((task_id, iid))
            if adjudicated is not None:
                out[iid] = adjudicated[0]
                continue
            pair = pairs.get(iid)
            if pair is None or pair[0] != pair[1]:
                unresolved.append(iid)
            else:
                out[iid] = pair[0]
        if unresolved:
            raise AnnotationError(
                "unresolved_items",
                f"{len(unresolved)} items lack agreement or adjudication",
                unresolved,
            )
        return out


# --- HTTP layer ---------------------------------------------------------------


class AnnotationService:
    """HTTP/JSON endpoints over an AnnotationStore on a local socket.

    Endpoints: POST /create-task, GET /next-item?task=&annotator=,
    POST /submit-label, GET /agreement?task=, GET /disagreements?task=,
    POST /adjudicate, POST /export?task=. Errors come back as
    {"error": {"code", "message", "offending_ids"}} with a 4xx status.

    Auth is a shared token per annotator plus one admin token; with no
    tokens configured the service is open (tests, local demos).
    """

    def __init__(
        self,
        store: AnnotationStore,
        annotator_tokens: dict[str, str] | None = None,
        admin_token: str | None = None,
        static_dir: str | Path | None = None,
    ):
        self.store = store
        self.annotator_tokens = annotator_tokens or {}
        self.admin_token = admin_token
        self.static_dir = Path(static_dir) if static_dir else None
        self.httpd: ThreadingHTTPServer | None = None

    # role checks ---------------------------------------------------------

    def _check_annotator_token(self, annotator_id: str, token: str | None) -> None:
        if not self.annotator_tokens:
            return
        if self.annotator_tokens.get(annotator_id) != token:
            raise AnnotationError("forbidden", f"bad token for annotator {annotator_id!r}")

    def _check_admin_token(self, token: str | None) -> None:
        if self.admin_token is None:
            return
        if token != self.admin_token:
            raise AnnotationError("forbidden", "bad admin token")

    # request handling ------------------------------------------------------

    def handle(self, method: str, path: str, params: dict, body: dict, token: str | None) -> dict:
        route = (method, path)
        if route == ("POST", "/create-task"):
            self._check_admin_token(token)
            items = [_instance_from(r) for r in body["items"]]
            task = self.store.create_task(
                items=items,
                annotators=body["annotators"],
                guidelines=body.get("guidelines", ""),
                seed=body.get("seed", 0),
                task_id=body.get("task_id"),
            )
            return {
                "task_id": task.task_id,
                "n_items": len(task.items),
                "annotators": list(task.annotator_ids),
                "guidelines": task.guideline_text,
            }
        if route == ("GET", "/next-item"):
            task_id, annotator = params["task"], params["annotator"]
            self._check_annotator_token(annotator, token)
            item = self.store.next_item(task_id, annotator)
            progress = self.store.progress(task_id, annotator)
            if item is None:
                return {"done": True, "progress": progress}
            return {"done": False, "item": blind_item_view(item), "progress": progress,
                    "guidelines": self.store.tasks[task_id].guideline_text}
        if route == ("POST", "/submit-label"):
            annotator = body["annotator_id"]
            self._check_annotator_token(annotator, token)
            return self.store.submit_label(
                task_id=body["task_id"],
                instance_id=body["instance_id"],
                annotator_id=annotator,
                label=body["label"],
            )
        if route == ("GET", "/agreement"):
            self._check_admin_token(token)
            return self.store.agreement(params["task"])
        if route == ("GET", "/disagreements"):
            self._check_admin_token(token)
            return {"items": self.store.list_disagreements(params["task"])}
        if route == ("POST", "/adjudicate"):
            self._check_admin_token(token)
            return self.store.adjudicate(
                task_id=body["task_id"],
                instance_id=body["instance_id"],
                final_label=body["final_label"],
                resolver=body["resolver"],
                force=body.get("force", False),
            )
        if route == ("POST", "/export"):
            self._check_admin_token(token)
            task_id = params.get("task") or body.get("task_id")
            labels = self.store.export_gold(task_id)
            return {"task_id": task_id, "labels": labels}
        raise AnnotationError("not_found", f"no endpoint {method} {path}")

    # server ------------------------------------------------------------------

    def make_server(self, host: str = "127.0.0.1", port: int = 0) -> ThreadingHTTPServer:
        service = self

        class Handler(BaseHTTPRequestHandler):
            def log_message(self, *args):  # quiet
                pass

            def _respond(self, status: int, payload: dict) -> None:
                data = json.dumps(payload, ensure_ascii=False).encode("utf-8")
                self.send_response(status)
                self.send_header("Content-Type", "application/json; charset=utf-8")
                self.send_header("Content-Length", str(len(data)))
                self.end_headers()
                self.wfile.write(data)

            def _serve_static(self, path: str) -> bool:
                if service.static_dir is None:
                    return False
                rel = "index.html" if path == "/" else path.lstrip("/")
                target = (service.static_dir / rel).resolve()
                if not str(target).startswith(str(service.static_dir.resolve())) or not target.is_file():
                    return False
                types = {".html": "text/html", ".js": "text/javascript",
                         ".css": "text/css", ".map": "application/json"}
                data = target.read_bytes()
                self.send_response(200)
                self.send_header("Content-Type", types.get(target.suffix, "application/octet-stream"))
                self.send_header("Content-Length", str(len(data)))
                self.end_headers()
                self.wfile.write(data)
                return True

            def _dispatch(self, method: str) -> None:
                parsed = urlparse(self.path)
                params = {k: v[0] for k, v in parse_qs(parsed.query).items()}
                body = {}
                if method == "POST":
                    length = int(self.headers.get("Content-Length") or 0)
                    if length:
                        body = json.loads(self.rfile.read(length).decode("utf-8"))
                token = self.headers.get("X-Annot-Token")
                try:
                    payload = service.handle(method, parsed.path, params, body, token)
                except AnnotationError as e:
                    status = {"not_found": 404, "forbidden": 403}.get(e.code, 400)
                    self._respond(status, {"error": e.to_dict()})
                except (KeyError, ValueError) as e:
                    self._respond(400, {"error": {
                        "code": "bad_request", "message": str(e), "offending_ids": []}})
                else:
                    self._respond(200, payload)

            def do_GET(self):
                if self._serve_static(urlparse(self.path).path):
                    return
                self._dispatch("GET")

            def do_POST(self):
                self._dispatch("POST")

        self.httpd = ThreadingHTTPServer((host, port), Handler)
        return self.httpd

    def serve_forever(self, host: str = "127.0.0.1", port: int = 8765) -> None:
        server = self.make_server(host, port)
        server.serve_forever()
