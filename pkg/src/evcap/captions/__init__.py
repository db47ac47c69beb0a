"""Caption annotation pipeline: manifest state, model clients, QA engine, review API."""

from .client import (
    CaptionClient,
    HttpCaptionClient,
    MediaAttachment,
    MockCaptionClient,
    build_request_body,
    extract_caption,
)
from .engine import (
    DEFAULT_PROBLEM_LISTS,
    MixWeights,
    ProblemList,
    annotate_item,
    apply_verdict,
    build_training_mix,
    load_media,
    qa_sample,
    run_annotation,
    sample_question,
    uniform_frame_sample,
)
from .manifest import (
    DomainKind,
    LEGAL_TRANSITIONS,
    ManifestRecord,
    ManifestStore,
    MediaKind,
    Status,
    transition,
)
from .service import ReviewServiceHandle, create_review_app, serve_review_api

__all__ = [
    "CaptionClient",
    "HttpCaptionClient",
    "MediaAttachment",
    "MockCaptionClient",
    "build_request_body",
    "extract_caption",
    "DEFAULT_PROBLEM_LISTS",
    "MixWeights",
    "ProblemList",
    "annotate_item",
    "apply_verdict",
    "build_training_mix",
    "load_media",
    "qa_sample",
    "run_annotation",
    "sample_question",
    "uniform_frame_sample",
    "DomainKind",
    "LEGAL_TRANSITIONS",
    "ManifestRecord",
    "ManifestStore",
    "MediaKind",
    "Status",
    "transition",
    "ReviewServiceHandle",
    "create_review_app",
    "serve_review_api",
]
