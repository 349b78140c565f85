"""Local HTTP API serving generated items to human reviewers.

Reviewers work independently: every item-facing endpoint filters verdicts
to the requesting reviewer, so neither sees the other's judgments before
finishing. Verdicts persist to an append-only JSON Lines store with
last-write-wins per (reviewer, target), which survives restarts and stays
diffable. The stem's answer options are shuffled with a per-item seed so
both reviewers see the same order.
"""

from __future__ import annotations

import json
import random
import threading
import uuid
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

from fastapi import FastAPI, Header, HTTPException, Response
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from . import evalkit
from .errors import InsufficientOverlapError, MalformedOutputFileError
from .pipeline import NA_SLOT, read_output_csv

STEM_TARGET = "stem"
DISTRACTOR_TARGETS = ("distractor_1", "distractor_2", "distractor_3")
VALID_TARGETS = (STEM_TARGET,) + DISTRACTOR_TARGETS


@dataclass
class ReviewItem:
    item_id: int
    stem: str
    options: list[str]
    targets: list[str]  # ratable targets: stem plus non-N/A distractor slots
    target_words: dict[str, str | None]  # slot -> displayed word (stem -> None)


@dataclass
class ReviewSession:
    session_id: str
    reviewer_id: str
    started_at: str
    cursor: int = 0
    completed: bool = False


class RatingsStore:
    """Append-only JSONL store; reads stay in memory, writes serialize."""

    def __init__(self, path: Path):
        self.path = Path(path)
        self._lock = threading.Lock()
        self._records: dict[tuple[str, str], evalkit.ReviewRecord] = {}
        if self.path.exists():
            for line in self.path.read_text("utf-8").splitlines():
                if not line.strip():
                    continue
                obj = json.loads(line)
                record = evalkit.ReviewRecord(**obj)
                self._records[(record.reviewer_id, record.target_id)] = record

    def put(self, record: evalkit.ReviewRecord) -> None:
        with self._lock:
            self._records[(record.reviewer_id, record.target_id)] = record
            with open(self.path, "a", encoding="utf-8") as fh:
                fh.write(json.dumps({
                    "target_id": record.target_id,
                    "target_kind": record.target_kind,
                    "reviewer_id": record.reviewer_id,
                    "verdict": record.verdict,
                    "comment": record.comment,
                }, ensure_ascii=False))
                fh.write("\n")

    def records(self) -> list[evalkit.ReviewRecord]:
        with self._lock:
            return [self._records[k] for k in sorted(self._records)]

    def for_reviewer(self, reviewer_id: str) -> list[evalkit.ReviewRecord]:
        return [r for r in self.records() if r.reviewer_id == reviewer_id]


class VerdictBody(BaseModel):
    reviewer_id: str
    target: str
    verdict: str
    comment: str = ""


def load_items(output_csv_path, shuffle_seed: int = 0) -> list[ReviewItem]:
    try:
        rows = read_output_csv(output_csv_path)
    except (ValueError, OSError) as exc:
        raise MalformedOutputFileError(str(exc)) from exc
    items = []
    for row in rows:
        item_id = int(row["item_id"])
        options = [row["key"]]
        targets = [STEM_TARGET]
        target_words: dict[str, str | None] = {STEM_TARGET: None}
        for slot in DISTRACTOR_TARGETS:
            if row[slot] != NA_SLOT:
                options.append(row[slot])
                targets.append(slot)
                target_words[slot] = row[slot]
        # same option order for every reviewer, shuffled per item
        random.Random(f"{shuffle_seed}:{item_id}").shuffle(options)
        items.append(ReviewItem(item_id=item_id, stem=row["stem"], options=options,
                                targets=targets, target_words=target_words))
    return items


def target_id_of(item_id: int, target: str) -> str:
    return f"{item_id}:{target}"


def create_app(
    output_csv_path,
    ratings_store_path,
    shuffle_seed: int = 0,
    ui_dir: str | None = None,
) -> FastAPI:
    items = load_items(output_csv_path, shuffle_seed)
    by_id = {item.item_id: item for item in items}
    store = RatingsStore(Path(ratings_store_path))
    sessions: dict[str, ReviewSession] = {}
    sessions_lock = threading.Lock()

    app = FastAPI(title="clozegen review service")

    def session_for(reviewer_id: str) -> ReviewSession:
        with sessions_lock:
            if reviewer_id not in sessions:
                sessions[reviewer_id] = ReviewSession(
                    session_id=uuid.uuid4().hex,
                    reviewer_id=reviewer_id,
                    started_at=datetime.now(timezone.utc).isoformat(),
                )
            session = sessions[reviewer_id]
            total = sum(len(item.targets) for item in items)
            done = len([r for r in store.for_reviewer(reviewer_id)])
            session.cursor = done
            session.completed = done >= total
            return session

    def item_payload(item: ReviewItem, reviewer_id: str | None) -> dict:
        own = {}
        if reviewer_id:
            for record in store.for_reviewer(reviewer_id):
                item_part, _, target = record.target_id.partition(":")
                if item_part == str(item.item_id):
                    own[target] = {"verdict": record.verdict, "comment": record.comment}
        return {
            "item_id": item.item_id,
            "stem": item.stem,
            "options": item.options,
            "targets": item.targets,
            "target_words": item.target_words,
            "own_verdicts": own,
        }

    @app.get("/items")
    def list_items(x_reviewer_id: str | None = Header(default=None)):
        return [item_payload(item, x_reviewer_id) for item in items]

    @app.get("/items/{item_id}")
    def get_item(item_id: int, x_reviewer_id: str | None = Header(default=None)):
        item = by_id.get(item_id)
        if item is None:
            raise HTTPException(status_code=404, detail=f"no item {item_id}")
        return item_payload(item, x_reviewer_id)

    @app.post("/items/{item_id}/verdicts")
    def post_verdict(item_id: int, body: VerdictBody):
        item = by_id.get(item_id)
        if item is None:
            raise HTTPException(status_code=404, detail=f"no item {item_id}")
        if body.target not in item.targets:
            raise HTTPException(
                status_code=422,
                detail=f"target must be one of {item.targets}, got {body.target!r}",
            )
        if body.verdict not in (evalkit.APPROPRIATE, evalkit.INAPPROPRIATE):
            raise HTTPException(status_code=422, detail="verdict must be appropriate|inappropriate")
        if not body.reviewer_id.strip():
            raise HTTPException(status_code=422, detail="reviewer_id must be non-empty")
        if body.verdict == evalkit.INAPPROPRIATE and not body.comment.strip():
            raise HTTPException(
                status_code=422,
                detail="an inappropriate verdict requires a reason in the comment",
            )
        record = evalkit.ReviewRecord(
            target_id=target_id_of(item_id, body.target),
            target_kind=STEM_TARGET if body.target == STEM_TARGET else "distractor",
            reviewer_id=body.reviewer_id,
            verdict=body.verdict,
            comment=body.comment,
        )
        store.put(record)
        session = session_for(body.reviewer_id)
        return {
            "ok": True,
            "target_id": record.target_id,
            "progress": {"done": session.cursor, "completed": session.completed},
        }

    @app.get("/sessions/{reviewer_id}")
    def get_session(reviewer_id: str):
        session = session_for(reviewer_id)
        total = sum(len(item.targets) for item in items)
        return {
            "session_id": session.session_id,
            "reviewer_id": session.reviewer_id,
            "started_at": session.started_at,
            "done": session.cursor,
            "total": total,
            "completed": session.completed,
        }

    @app.get("/stats")
    def stats():
        try:
            report = evalkit.agreement_report(store.records())
        except InsufficientOverlapError as exc:
            raise HTTPException(status_code=409, detail=str(exc)) from exc
        return Response(content=evalkit.report_json(report), media_type="application/json")

    @app.get("/export")
    def export():
        csv_text = evalkit.ratings_to_csv_text(store.records())
        return Response(content=csv_text, media_type="text/csv")

    if ui_dir and Path(ui_dir).is_dir():
        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app


def serve(
    output_csv_path,
    ratings_store_path,
    bind_address: str = "127.0.0.1:8321",
    shuffle_seed: int = 0,
    ui_dir: str | None = None,
) -> None:
    """Run the review service until interrupted."""
    import uvicorn

    host, _, port = bind_address.partition(":")
    app = create_app(output_csv_path, ratings_store_path, shuffle_seed, ui_dir)
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port or 8321), log_level="info")
