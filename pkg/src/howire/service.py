"""HTTP service backing the viewpoint-curation UI.

Serves view renders from the generated dataset and records keep/discard
votes in an append-only JSON-lines log (one line per vote, flushed and
fsynced before the request is acknowledged).  The export endpoint runs
the same majority/removal rules as `howire curate-export`:

  * a view with 2 or more discard votes (of 3 voters) is dropped;
  * a solid left with 3 or fewer views is dropped entirely.

The server is the single writer of the log; the UI never recomputes the
rules itself.
"""

from __future__ import annotations

import io
import threading
import time
from pathlib import Path

from fastapi import FastAPI, HTTPException
from fastapi.responses import JSONResponse, Response
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from .config import ToolConfig
from .dataset import (
    CurationLog,
    DatasetError,
    Manifest,
    Vote,
    apply_curation,
    deserialize_sample,
    read_manifest,
)
from .render import draw_wireframe_overlay, write_png

SPLITS = ("train", "test")


class VoteBody(BaseModel):
    voter: str
    keep: bool


class CurationState:
    def __init__(self, config: ToolConfig):
        self.config = config
        self.root = Path(config.data_root)
        self.log_path = self.root / "curation_log.jsonl"
        self.manifests = {}
        for split in SPLITS:
            path = self.root / split / "manifest.json"
            if path.exists():
                self.manifests[split] = read_manifest(path)
        if not self.manifests:
            raise DatasetError(f"no manifests under {self.root}; generate a dataset first")
        self.views = {}
        for split, manifest in self.manifests.items():
            for entry in manifest.samples:
                self.views[entry["sample_id"]] = {"split": split, **entry}
        self._write_lock = threading.Lock()

    def log(self) -> CurationLog:
        return CurationLog.load(self.log_path)

    def record_vote(self, view_id: str, voter: str, keep: bool) -> dict:
        if view_id not in self.views:
            raise KeyError(view_id)
        if voter not in self.config.voter_roster:
            raise ValueError(f"voter {voter!r} not in roster {list(self.config.voter_roster)}")
        warning = None
        with self._write_lock:
            existing = self.log().effective().get(view_id, {})
            if voter in existing:
                warning = f"previous vote by {voter} ({existing[voter]}) overwritten"
            vote = Vote(view_id=view_id, voter=voter, keep=keep, timestamp=time.time())
            CurationLog.append(self.log_path, vote)
        return {"view_id": view_id, "voter": voter, "keep": keep, "warning": warning}

    def solids_summary(self):
        votes = self.log().effective()
        by_solid = {}
        for view_id, info in self.views.items():
            sid = info["solid_id"]
            rec = by_solid.setdefault(sid, {"solid_id": sid, "view_count": 0, "kept_count": 0})
            rec["view_count"] += 1
            cast = votes.get(view_id, {})
            discards = sum(1 for r in self.config.voter_roster if cast.get(r) is False)
            if discards < 2:
                rec["kept_count"] += 1
        return [by_solid[k] for k in sorted(by_solid)]

    def views_of_solid(self, solid_id: int):
        votes = self.log().effective()
        out = []
        for view_id in sorted(self.views):
            info = self.views[view_id]
            if info["solid_id"] != solid_id:
                continue
            out.append({"view_id": view_id, "split": info["split"], "votes": votes.get(view_id, {})})
        return out

    def export(self, allow_partial: bool | None = None):
        if allow_partial is None:
            allow_partial = self.config.allow_partial
        log = self.log()
        unknown = sorted({v.view_id for v in log.votes} - set(self.views))
        if unknown:
            raise DatasetError(f"votes reference unknown views: {unknown[:5]}")
        result = {}
        for split, manifest in self.manifests.items():
            ids = set(manifest.sample_ids())
            split_log = CurationLog([v for v in log.votes if v.view_id in ids])
            filtered = apply_curation(
                manifest, split_log, self.config.voter_roster, allow_partial=allow_partial
            )
            result[split] = filtered.to_dict()
        return result


def create_app(config: ToolConfig, frontend_dir=None) -> FastAPI:
    state = CurationState(config)
    app = FastAPI(title="wireframe viewpoint curation")
    app.state.curation = state

    @app.get("/api/solids")
    def solids():
        return state.solids_summary()

    @app.get("/api/solids/{solid_id}/views")
    def views(solid_id: int):
        out = state.views_of_solid(solid_id)
        if not out:
            raise HTTPException(status_code=404, detail=f"unknown solid {solid_id}")
        return out

    @app.get("/api/views/{view_id}/image.png")
    def image(view_id: str, overlay: int = 0):
        info = state.views.get(view_id)
        if info is None:
            raise HTTPException(status_code=404, detail=f"unknown view {view_id}")
        sample_dir = state.root / info["path"]
        if not overlay:
            png = (sample_dir / "image.png").read_bytes()
            return Response(content=png, media_type="image/png")
        sample = deserialize_sample(sample_dir)
        rgb = draw_wireframe_overlay(sample.image, sample.wireframe, sample.intrinsics)
        buf = io.BytesIO()
        write_png(buf, rgb)
        return Response(content=buf.getvalue(), media_type="image/png")

    @app.post("/api/views/{view_id}/vote")
    def vote(view_id: str, body: VoteBody):
        try:
            return state.record_vote(view_id, body.voter, body.keep)
        except KeyError:
            raise HTTPException(status_code=404, detail=f"unknown view {view_id}")
        except ValueError as exc:
            raise HTTPException(status_code=400, detail=str(exc))

    @app.get("/api/export")
    def export(allow_partial: int | None = None):
        try:
            return state.export(None if allow_partial is None else bool(allow_partial))
        except DatasetError as exc:
            return JSONResponse(status_code=409, content={"error": str(exc)})

    @app.get("/api/config")
    def config_view():
        return {
            "roster": list(config.voter_roster),
            "splits": sorted(state.manifests),
            "allow_partial": config.allow_partial,
        }

    if frontend_dir and Path(frontend_dir).exists():
        app.mount("/", StaticFiles(directory=str(frontend_dir), html=True), name="ui")
    return app
