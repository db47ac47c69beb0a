"""Caption generation engine: question sampling, annotation passes, QA flow.

The flow mirrors a coarse-generate / manually-check / regenerate loop: every
media item gets a caption from the model client, a handful of captions per
class is sampled for human review, and a bad verdict sends the whole class
back for regeneration with a modified prompt.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Mapping

import numpy as np

from .. import ingest, representation
from ..errors import CaptionError, ConfigError, EvcapError, UnknownClassError
from .client import CaptionClient, MediaAttachment
from .manifest import (
    DomainKind,
    ManifestRecord,
    ManifestStore,
    MediaKind,
    Status,
    transition,
)

DEFAULT_FRAME_SAMPLE = 14
DEFAULT_QA_PER_CLASS = 5


@dataclass(frozen=True)
class ProblemList:
    """Question pool plus prompts for one media domain."""

    domain: DomainKind
    questions: tuple[str, ...]
    system_prompt: str = ""
    retry_prompt: str = ""

    def __post_init__(self) -> None:
        if not self.questions:
            raise ConfigError(f"problem list for {self.domain.value} has no questions")


# Editable placeholders; real deployments load their own lists from config.
DEFAULT_PROBLEM_LISTS: dict[DomainKind, ProblemList] = {
    DomainKind.STATIC_IMAGES: ProblemList(
        DomainKind.STATIC_IMAGES,
        (
            "Describe the main object in this picture in detail.",
            "What is shown in this image? Mention shape, parts, and context.",
            "Give a precise description of the object, including any visible attributes.",
            "Summarize what this image depicts and what stands out about it.",
        ),
        system_prompt="You describe single objects captured by a camera.",
        retry_prompt="The previous description was inadequate. Be specific and avoid guessing. ",
    ),
    DomainKind.HUMAN_MOTIONS: ProblemList(
        DomainKind.HUMAN_MOTIONS,
        (
            "Describe the action the person is performing across these frames.",
            "What movement happens in this clip? Describe it step by step.",
            "Explain what the person is doing and how their posture changes.",
            "Summarize the activity shown, including speed and direction of motion.",
        ),
        system_prompt="You describe human activities captured as frame sequences.",
        retry_prompt="The previous description was inadequate. Focus on the motion itself. ",
    ),
    DomainKind.DRIVE_SCENES: ProblemList(
        DomainKind.DRIVE_SCENES,
        (
            "Describe this driving scene: road layout, vehicles, and pedestrians.",
            "What is happening in this traffic scene? Note signals and movement.",
            "Summarize the scene from the driver's perspective, including hazards.",
            "Describe the environment, traffic participants, and their motion.",
        ),
        system_prompt="You describe road scenes recorded from a vehicle.",
        retry_prompt="The previous description was inadequate. Describe the full scene. ",
    ),
}


def sample_question(problem_list: ProblemList, seed: int) -> str:
    """Uniform, seed-deterministic draw from the question pool."""
    rng = np.random.default_rng(seed)
    return problem_list.questions[int(rng.integers(len(problem_list.questions)))]


def uniform_frame_sample(frame_count: int, n: int = DEFAULT_FRAME_SAMPLE) -> list[int]:
    """Evenly spaced frame indices; short clips are taken whole.

    For frame_count > n the k-th index is round(k * (F-1) / (n-1)), so the
    first and last frames are always included.
    """
    if frame_count < 1:
        raise ConfigError(f"frame_count must be >= 1, got {frame_count}")
    if n < 2:
        raise ConfigError(f"n must be >= 2, got {n}")
    if frame_count <= n:
        return list(range(frame_count))
    step = (frame_count - 1) / (n - 1)
    return [int(round(k * step)) for k in range(n)]


_MIME_BY_EXT = {
    ".png": "image/png",
    ".jpg": "image/jpeg",
    ".jpeg": "image/jpeg",
    ".ppm": "image/x-portable-pixmap",
}


def media_mime(path: str) -> str:
    return _MIME_BY_EXT.get(os.path.splitext(path)[1].lower(), "application/octet-stream")


def render_stream_preview(path: str, geometry=None) -> bytes:
    """Render an event file to a whole-stream red-blue PPM preview."""
    with open(path, "rb") as fh:
        data = fh.read()
    stream = ingest.parse_any(path, data, geometry)
    return representation.write_ppm(representation.render_frame(stream))


def load_media(record: ManifestRecord, frame_sample: int = DEFAULT_FRAME_SAMPLE) -> list[MediaAttachment]:
    """Materialize a record's media for submission.

    Frame sequences are thinned with uniform_frame_sample; event streams are
    rendered to a single preview frame.
    """
    if record.media_kind is MediaKind.EVENT_STREAM:
        return [
            MediaAttachment("image/x-portable-pixmap", render_stream_preview(p))
            for p in record.media_paths
        ]
    paths = list(record.media_paths)
    if record.media_kind is MediaKind.FRAME_SEQUENCE and len(paths) > frame_sample:
        paths = [paths[i] for i in uniform_frame_sample(len(paths), frame_sample)]
    out = []
    for p in paths:
        with open(p, "rb") as fh:
            out.append(MediaAttachment(media_mime(p), fh.read()))
    return out


def _question_seed(seed: int, record: ManifestRecord) -> int:
    # fold the record identity and attempt into the seed so regeneration
    # re-samples while runs stay reproducible
    digest = np.uint64(1469598103934665603)
    for byte in f"{record.id}:{record.attempt}".encode("utf-8"):
        digest = np.uint64((int(digest) ^ byte) * 1099511628211 % (1 << 64))
    return int(np.uint64(seed) ^ digest)


def annotate_item(
    record: ManifestRecord,
    client: CaptionClient,
    problem_list: ProblemList,
    seed: int = 0,
    frame_sample: int = DEFAULT_FRAME_SAMPLE,
) -> ManifestRecord:
    """Caption one pending or regenerating record.

    The question is re-sampled on every attempt; retries carry the retry
    prompt as a prefix. On any failure the record is returned to the caller
    unchanged via the raised CaptionError.
    """
    if record.status not in (Status.PENDING, Status.REGENERATING):
        raise EvcapError(
            f"record {record.id} is {record.status.value}, expected pending/regenerating"
        )
    question = sample_question(problem_list, _question_seed(seed, record))
    if record.attempt > 0:
        question = problem_list.retry_prompt + question
    media = load_media(record, frame_sample)
    caption = client.caption(question, media)
    if not caption.strip():
        raise CaptionError(f"empty caption for record {record.id}")
    return transition(record, Status.CAPTIONED, question=question, caption=caption)


def run_annotation(
    store: ManifestStore,
    client: CaptionClient,
    problem_lists: Mapping[DomainKind, ProblemList] | None = None,
    max_in_flight: int = 4,
    seed: int = 0,
    frame_sample: int = DEFAULT_FRAME_SAMPLE,
) -> dict[str, int]:
    """Annotate every pending/regenerating record; returns success/failure counts."""
    lists = dict(DEFAULT_PROBLEM_LISTS)
    if problem_lists:
        lists.update(problem_lists)
    todo = store.by_status(Status.PENDING, Status.REGENERATING)
    succeeded = failed = 0

    def work(record: ManifestRecord):
        return annotate_item(record, client, lists[record.domain], seed, frame_sample)

    with ThreadPoolExecutor(max_workers=max(1, max_in_flight)) as pool:
        for record, outcome in zip(todo, pool.map(_swallow(work), todo)):
            if isinstance(outcome, Exception):
                failed += 1
            else:
                store.update(outcome)
                succeeded += 1
    if store.path:
        store.save()
    return {"succeeded": succeeded, "failed": failed}


def _swallow(fn):
    def wrapped(record):
        try:
            return fn(record)
        except (CaptionError, OSError) as exc:
            return exc

    return wrapped


def qa_sample(
    store: ManifestStore, per_class: int = DEFAULT_QA_PER_CLASS, seed: int = 0
) -> list[ManifestRecord]:
    """Draw up to per_class captioned records per class and mark them qa_sampled."""
    if per_class < 1:
        raise ConfigError(f"per_class must be >= 1, got {per_class}")
    by_class: dict[str, list[ManifestRecord]] = {}
    for record in store.by_status(Status.CAPTIONED):
        by_class.setdefault(record.class_id, []).append(record)
    sampled: list[ManifestRecord] = []
    for class_id in sorted(by_class):
        candidates = by_class[class_id]
        rng = np.random.default_rng([seed, len(class_id), *class_id.encode("utf-8")])
        take = min(per_class, len(candidates))
        picks = rng.choice(len(candidates), size=take, replace=False)
        for i in sorted(int(v) for v in picks):
            updated = transition(candidates[i], Status.QA_SAMPLED)
            store.update(updated)
            sampled.append(updated)
    if store.path:
        store.save()
    return sampled


def apply_verdict(store: ManifestStore, class_id: str, verdict: str) -> int:
    """Apply a class-wide human verdict; returns the number of affected records.

    good: the class's sampled records become accepted. bad: every record of
    the class that already has a caption goes back to regenerating with its
    attempt bumped; the old caption is kept for audit.
    """
    if verdict not in ("good", "bad"):
        raise EvcapError(f"verdict must be 'good' or 'bad', got {verdict!r}")
    members = store.by_class(class_id)
    if not members:
        raise UnknownClassError(f"no records for class {class_id!r}")
    affected = 0
    for record in members:
        if verdict == "good":
            if record.status is Status.QA_SAMPLED:
                store.update(transition(record, Status.ACCEPTED))
                affected += 1
        else:
            if record.status is not Status.PENDING:
                store.update(
                    transition(record, Status.REGENERATING, attempt=record.attempt + 1)
                )
                affected += 1
    if store.path:
        store.save()
    return affected


@dataclass(frozen=True)
class MixWeights:
    """Per-source sampling probabilities, normalized on construction."""

    weights: dict[str, float]

    def __post_init__(self) -> None:
        if not self.weights:
            raise ConfigError("mix weights are empty")
        if any(w < 0 for w in self.weights.values()):
            raise ConfigError(f"mix weights must be >= 0: {self.weights}")
        total = sum(self.weights.values())
        if total <= 0:
            raise ConfigError("mix weights sum to zero")
        object.__setattr__(
            self, "weights", {k: v / total for k, v in sorted(self.weights.items())}
        )


def build_training_mix(
    manifests_by_source: Mapping[str, list[ManifestRecord]],
    weights: MixWeights,
    total: int,
    seed: int = 0,
) -> list[ManifestRecord]:
    """Interleave `total` draws across sources by weight, uniform within source."""
    if total < 1:
        raise ConfigError(f"total must be >= 1, got {total}")
    sources = [s for s, w in weights.weights.items() if w > 0]
    probs = np.array([weights.weights[s] for s in sources])
    for s in sources:
        if not manifests_by_source.get(s):
            raise ConfigError(f"weighted source {s!r} has no records")
    rng = np.random.default_rng(seed)
    picks = rng.choice(len(sources), size=total, p=probs)
    out: list[ManifestRecord] = []
    for k in picks:
        pool = manifests_by_source[sources[int(k)]]
        out.append(pool[int(rng.integers(len(pool)))])
    return out
