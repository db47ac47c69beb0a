import json

import pytest

from evcap.captions.manifest import (
    DomainKind,
    LEGAL_TRANSITIONS,
    ManifestRecord,
    ManifestStore,
    MediaKind,
    Status,
    transition,
)
from evcap.errors import EvcapError, ParseError


def record(i: int, class_id: str = "cls", status: Status = Status.PENDING, **kw) -> ManifestRecord:
    caption = kw.pop("caption", "" if status is Status.PENDING else f"caption {i}")
    return ManifestRecord(
        id=f"rec-{i:04d}",
        domain=kw.pop("domain", DomainKind.STATIC_IMAGES),
        class_id=class_id,
        media_paths=kw.pop("media_paths", (f"media/{i}.png",)),
        media_kind=kw.pop("media_kind", MediaKind.IMAGE),
        caption=caption,
        status=status,
        **kw,
    )


class TestRecord:
    def test_json_field_names_are_exact(self):
        r = record(1, status=Status.CAPTIONED, question="what?")
        keys = list(json.loads(r.to_json()).keys())
        assert keys == [
            "id", "domain", "class_id", "media_paths", "media_kind",
            "question", "caption", "status", "attempt", "updated_at",
        ]

    def test_json_round_trip(self):
        r = record(2, status=Status.CAPTIONED, question="q", attempt=3)
        assert ManifestRecord.from_json(r.to_json()) == r

    def test_caption_iff_not_pending(self):
        with pytest.raises(EvcapError):
            record(1, status=Status.PENDING, caption="should not be here")
        with pytest.raises(EvcapError):
            record(1, status=Status.CAPTIONED, caption="")

    def test_negative_attempt_rejected(self):
        with pytest.raises(EvcapError):
            record(1, attempt=-1)

    def test_bad_line_raises_parse_error(self):
        with pytest.raises(ParseError):
            ManifestRecord.from_json('{"id": "x"}')


class TestTransitions:
    def test_legal_path(self):
        r = record(1)
        r = transition(r, Status.CAPTIONED, caption="a cat")
        r = transition(r, Status.QA_SAMPLED)
        r = transition(r, Status.REGENERATING, attempt=1)
        r = transition(r, Status.CAPTIONED, caption="a better cat")
        assert r.attempt == 1

    def test_illegal_jump_rejected(self):
        with pytest.raises(EvcapError, match="illegal transition"):
            transition(record(1), Status.ACCEPTED, caption="x")

    def test_rejected_is_never_reachable(self):
        for status, targets in LEGAL_TRANSITIONS.items():
            assert Status.REJECTED not in targets


class TestStore:
    def test_round_trip(self, tmp_path):
        path = str(tmp_path / "manifest.ndjson")
        store = ManifestStore(path)
        for i in range(7):
            store.add(record(i, class_id=f"c{i % 3}", status=Status.CAPTIONED, question="q"))
        store.save()
        again = ManifestStore.load(path)
        assert again.records() == store.records()

    def test_duplicate_ids_rejected(self):
        store = ManifestStore()
        store.add(record(1))
        with pytest.raises(EvcapError, match="duplicate"):
            store.add(record(1))

    def test_update_requires_known_id(self):
        store = ManifestStore()
        with pytest.raises(EvcapError, match="unknown"):
            store.update(record(1))

    def test_stats_counts(self):
        store = ManifestStore()
        store.add(record(1, status=Status.CAPTIONED))
        store.add(record(2, status=Status.CAPTIONED, domain=DomainKind.DRIVE_SCENES))
        store.add(record(3))
        stats = store.stats()
        assert stats["by_status"]["captioned"] == 2
        assert stats["by_status"]["pending"] == 1
        assert stats["by_domain"] == {"static_images": 2, "drive_scenes": 1}
        assert stats["total"] == 3

    def test_by_class_and_status(self):
        store = ManifestStore()
        store.add(record(1, class_id="a", status=Status.CAPTIONED))
        store.add(record(2, class_id="b"))
        assert [r.id for r in store.by_class("a")] == ["rec-0001"]
        assert [r.id for r in store.by_status(Status.PENDING)] == ["rec-0002"]
