"""HTTP service bridging the browser annotation UI to the solver.

Data root layout:
    images/{id}.png          input images
    annotations/{id}.json    annotation documents (PUT/GET)
    gt/{id}.bczf             optional ground truth for metric reporting
    jobs/{job_id}/           reconstruction artifacts

Jobs are queued FIFO and executed by a single worker, one at a time; a
second reconstruction for an image whose job is still queued or running
is rejected with 409.
"""

import json
import queue
import threading
import uuid
from pathlib import Path

from fastapi import FastAPI, Request, Response
from fastapi.responses import FileResponse, JSONResponse

QUEUE_LIMIT = 16


class JobTable:
    def __init__(self):
        self._lock = threading.Lock()
        self._jobs = {}

    def create(self, image_id, variant):
        with self._lock:
            job_id = uuid.uuid4().hex[:12]
            self._jobs[job_id] = {
                "job_id": job_id,
                "image_id": image_id,
                "variant": variant,
                "status": "queued",
                "progress": 0.0,
            }
            return job_id

    def update(self, job_id, **fields):
        with self._lock:
            self._jobs[job_id].update(fields)

    def get(self, job_id):
        with self._lock:
            job = self._jobs.get(job_id)
            return dict(job) if job else None

    def busy(self, image_id):
        with self._lock:
            return any(
                j["image_id"] == image_id and j["status"] in ("queued", "running")
                for j in self._jobs.values()
            )


def _run_job(root: Path, table: JobTable, job_id: str, payload: dict):
    from . import io
    from .annotations import parse_annotations
    from .energies import FoldConfig
    from .gsm import GsmParams
    from .metrics import evaluate
    from .optimizer import SolveConfig, VariantSpec, solve
    from .shading import LogImage

    table.update(job_id, status="running")
    try:
        image_id = payload["id"]
        spec = VariantSpec.named(payload["variant"])
        config = payload.get("config") or {}
        annotations = parse_annotations(
            (root / "annotations" / f"{image_id}.json").read_text(),
            base_dir=root / "annotations",
        )
        image = None
        if spec.uses_shading:
            image = LogImage.from_intensity(
                io.read_png(root / "images" / f"{image_id}.png"), annotations.mask
            )
        cfg = SolveConfig.from_dict(config)
        fold_cfg = FoldConfig.from_dict(config.get("fold", {}))
        gsm = GsmParams.from_dict(config.get("gsm", {}))

        def progress(done, total):
            table.update(job_id, progress=done / total)

        result = solve(image, annotations, spec, cfg, fold_cfg=fold_cfg, gsm=gsm,
                       progress=progress)
        job_dir = root / "jobs" / job_id
        job_dir.mkdir(parents=True, exist_ok=True)
        io.write_bczf(job_dir / "height.bczf", result.height)
        io.write_pfm(job_dir / "height.pfm", result.height.values)
        io.write_obj(job_dir / "mesh.obj", result.height)
        io.write_trace_csv(job_dir / "trace.csv", result.trace)

        metrics = None
        gt_path = root / "gt" / f"{image_id}.bczf"
        if gt_path.exists():
            metrics = evaluate(result.height, io.read_bczf(gt_path)).to_dict()
        table.update(job_id, status="done", progress=1.0, metrics=metrics)
    except Exception as e:
        table.update(job_id, status="error", error=str(e))


def create_app(root: Path) -> FastAPI:
    root = Path(root)
    for sub in ("images", "annotations", "gt", "jobs"):
        (root / sub).mkdir(parents=True, exist_ok=True)

    app = FastAPI(title="boundcue")
    table = JobTable()
    jobs_q = queue.Queue(maxsize=QUEUE_LIMIT)

    def worker():
        while True:
            job_id, payload = jobs_q.get()
            _run_job(root, table, job_id, payload)
            jobs_q.task_done()

    threading.Thread(target=worker, daemon=True, name="boundcue-jobs").start()
    app.state.job_table = table

    @app.get("/api/images")
    def list_images():
        from . import io

        out = []
        for p in sorted((root / "images").glob("*.png")):
            img = io.read_png(p)
            out.append(
                {
                    "id": p.stem,
                    "width": img.shape[1],
                    "height": img.shape[0],
                    "has_annotations": (root / "annotations" / f"{p.stem}.json").exists(),
                }
            )
        return out

    @app.get("/api/images/{image_id}")
    def get_image(image_id: str):
        path = root / "images" / f"{image_id}.png"
        if not path.exists():
            return JSONResponse({"detail": f"unknown image {image_id}"}, status_code=404)
        return FileResponse(path, media_type="image/png")

    @app.get("/api/annotations/{image_id}")
    def get_annotations(image_id: str):
        path = root / "annotations" / f"{image_id}.json"
        if not path.exists():
            return JSONResponse({"detail": f"no annotations for {image_id}"}, status_code=404)
        return Response(path.read_text(), media_type="application/json")

    @app.put("/api/annotations/{image_id}")
    async def put_annotations(image_id: str, request: Request):
        from .annotations import AnnotationError, SchemaError, parse_annotations, serialize_annotations

        if not (root / "images" / f"{image_id}.png").exists():
            return JSONResponse({"detail": f"unknown image {image_id}"}, status_code=404)
        body = await request.body()
        try:
            aset = parse_annotations(body.decode("utf-8"), base_dir=root / "annotations")
        except SchemaError as e:
            return JSONResponse({"detail": str(e), "field": e.field}, status_code=400)
        except AnnotationError as e:
            return JSONResponse({"detail": str(e)}, status_code=400)
        # store canonically re-serialized
        (root / "annotations" / f"{image_id}.json").write_text(serialize_annotations(aset))
        return {"ok": True, "samples": len(aset.samples_smooth) + len(aset.samples_sharp)
                + len(aset.samples_selfocc) + len(aset.samples_fold)}

    @app.post("/api/reconstruct")
    async def reconstruct(request: Request):
        from .optimizer import VARIANT_NAMES

        payload = await request.json()
        image_id = payload.get("id")
        variant = payload.get("variant")
        if not image_id or not (root / "images" / f"{image_id}.png").exists():
            return JSONResponse({"detail": f"unknown image {image_id}"}, status_code=404)
        if variant not in VARIANT_NAMES:
            return JSONResponse(
                {"detail": f"unknown variant {variant!r}", "field": "variant"},
                status_code=400,
            )
        if not (root / "annotations" / f"{image_id}.json").exists():
            return JSONResponse(
                {"detail": f"no annotations for {image_id}", "field": "id"},
                status_code=400,
            )
        if table.busy(image_id):
            return JSONResponse(
                {"detail": f"a job for {image_id} is already queued or running"},
                status_code=409,
            )
        job_id = table.create(image_id, variant)
        try:
            jobs_q.put_nowait((job_id, payload))
        except queue.Full:
            table.update(job_id, status="error", error="queue full")
            return JSONResponse({"detail": "job queue full"}, status_code=503)
        return {"job_id": job_id}

    @app.get("/api/jobs/{job_id}")
    def job_status(job_id: str):
        job = table.get(job_id)
        if job is None:
            return JSONResponse({"detail": f"unknown job {job_id}"}, status_code=404)
        return job

    def _job_file(job_id, filename, media_type):
        job = table.get(job_id)
        if job is None:
            return JSONResponse({"detail": f"unknown job {job_id}"}, status_code=404)
        path = root / "jobs" / job_id / filename
        if job["status"] != "done" or not path.exists():
            return JSONResponse(
                {"detail": f"job {job_id} is {job['status']}"}, status_code=404
            )
        return FileResponse(path, media_type=media_type)

    @app.get("/api/jobs/{job_id}/mesh")
    def job_mesh(job_id: str):
        return _job_file(job_id, "mesh.obj", "model/obj")

    @app.get("/api/jobs/{job_id}/depth")
    def job_depth(job_id: str):
        return _job_file(job_id, "height.pfm", "application/octet-stream")

    return app
