"""HTTP review API over the registry store.

Contract consumed by the review UI: collections, bucket reports,
versioned threshold configs (optimistic concurrency: a PUT must carry
current version + 1), the domain verification queue, and domain verdicts.
Every mutation lands in the registry's append-only event log.
"""

from __future__ import annotations

from typing import Literal, Optional

from fastapi import Depends, FastAPI, Header, HTTPException, Query
from fastapi.middleware.cors import CORSMiddleware
from pydantic import BaseModel

from .curate import ThresholdConfig
from .errors import AlreadyDecidedError, ConfigurationError, VersionConflictError
from .policy import DEFAULT_MIN_WORDS, DomainStatus
from .registry import RegistryStore


class VerdictBody(BaseModel):
    status: Literal["verified_permissive", "rejected"]
    note: str = ""
    reviewer: Optional[str] = None


class ThresholdBody(BaseModel):
    collection_id: str
    bounds: dict[str, dict[str, Optional[float]]] = {}
    target_languages: list[str] = []
    language_minimums: dict[str, float] = {}
    version: int
    author_note: str = ""


def create_app(store: RegistryStore, token: Optional[str] = None) -> FastAPI:
    app = FastAPI(title="corpuskit review api")
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )

    def check_token(authorization: Optional[str] = Header(default=None)) -> None:
        if token is not None and authorization != f"Bearer {token}":
            raise HTTPException(status_code=401, detail="missing or invalid token")

    guard = Depends(check_token)

    @app.get("/collections", dependencies=[guard])
    def list_collections():
        return {"collections": [record.to_dict() for record in store.list_collections()]}

    @app.get("/collections/{collection_id}/buckets", dependencies=[guard])
    def get_buckets(collection_id: str, dimension: str = Query(...)):
        try:
            return store.get_bucket_report(collection_id, dimension)
        except KeyError as exc:
            raise HTTPException(status_code=404, detail=str(exc))

    @app.get("/collections/{collection_id}/thresholds", dependencies=[guard])
    def get_thresholds(collection_id: str):
        try:
            return store.get_thresholds(collection_id).to_dict()
        except KeyError as exc:
            raise HTTPException(status_code=404, detail=str(exc))

    @app.put("/collections/{collection_id}/thresholds", dependencies=[guard])
    def put_thresholds(collection_id: str, body: ThresholdBody):
        if body.collection_id != collection_id:
            raise HTTPException(status_code=409, detail="collection_id mismatch")
        try:
            cfg = ThresholdConfig.from_dict(body.model_dump())
            return store.save_thresholds(cfg).to_dict()
        except VersionConflictError as exc:
            raise HTTPException(status_code=409, detail=str(exc))
        except ConfigurationError as exc:
            raise HTTPException(status_code=409, detail=str(exc))
        except KeyError as exc:
            raise HTTPException(status_code=404, detail=str(exc))

    @app.get("/domains/queue", dependencies=[guard])
    def get_queue(min_words: int = Query(default=DEFAULT_MIN_WORDS)):
        return store.verification_queue(min_words).to_dict()

    @app.post("/domains/{domain}/verdict", status_code=201, dependencies=[guard])
    def post_verdict(domain: str, body: VerdictBody):
        try:
            entry = store.record_domain_verdict(
                domain, DomainStatus(body.status), note=body.note, reviewer=body.reviewer
            )
            return entry.to_dict()
        except KeyError as exc:
            raise HTTPException(status_code=404, detail=str(exc))
        except AlreadyDecidedError as exc:
            raise HTTPException(status_code=409, detail=str(exc))

    return app
