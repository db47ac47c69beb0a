"""Caption model clients speaking a chat-completions style wire format.

Request body:
    {"model": ..., "messages": [{"role": "user", "content":
        [{"type": "text", "text": question},
         {"type": "image_url", "image_url": {"url": "data:<mime>;base64,<...>"}}, ...]}]}

Response: the first choice's message content. The HTTP client is thin on
purpose; tests and offline runs use the deterministic mock.
"""

from __future__ import annotations

import base64
import os
import threading
from dataclasses import dataclass, field
from typing import Callable, Protocol

import requests

from ..errors import CaptionError

ENV_ENDPOINT = "CAPTION_ENDPOINT"
ENV_MODEL = "CAPTION_MODEL"
ENV_API_KEY = "CAPTION_API_KEY"


@dataclass(frozen=True)
class MediaAttachment:
    mime: str
    data: bytes


class CaptionClient(Protocol):
    def caption(self, question: str, media: list[MediaAttachment]) -> str:
        """Return the generated caption or raise CaptionError."""
        ...


def build_request_body(model: str, question: str, media: list[MediaAttachment]) -> dict:
    content: list[dict] = [{"type": "text", "text": question}]
    for item in media:
        encoded = base64.b64encode(item.data).decode("ascii")
        content.append(
            {"type": "image_url", "image_url": {"url": f"data:{item.mime};base64,{encoded}"}}
        )
    return {"model": model, "messages": [{"role": "user", "content": content}]}


def extract_caption(payload: dict) -> str:
    try:
        text = payload["choices"][0]["message"]["content"]
    except (KeyError, IndexError, TypeError) as exc:
        raise CaptionError(f"malformed caption response: {exc}") from exc
    if not isinstance(text, str) or not text.strip():
        raise CaptionError("caption response was empty")
    return text


@dataclass
class HttpCaptionClient:
    """POSTs chat-completions requests to a configurable endpoint."""

    endpoint: str
    model: str
    timeout: float = 60.0
    max_in_flight: int = 4
    api_key: str = ""

    def __post_init__(self) -> None:
        if self.max_in_flight < 1:
            raise CaptionError(f"max_in_flight must be >= 1, got {self.max_in_flight}")
        self._gate = threading.Semaphore(self.max_in_flight)

    @classmethod
    def from_env(cls, **overrides) -> "HttpCaptionClient":
        endpoint = overrides.pop("endpoint", None) or os.environ.get(ENV_ENDPOINT)
        model = overrides.pop("model", None) or os.environ.get(ENV_MODEL, "internvl2-76b")
        if not endpoint:
            raise CaptionError(f"{ENV_ENDPOINT} is not set and no endpoint was given")
        return cls(
            endpoint=endpoint,
            model=model,
            api_key=overrides.pop("api_key", None) or os.environ.get(ENV_API_KEY, ""),
            **overrides,
        )

    def caption(self, question: str, media: list[MediaAttachment]) -> str:
        body = build_request_body(self.model, question, media)
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        with self._gate:
            try:
                resp = requests.post(self.endpoint, json=body, headers=headers, timeout=self.timeout)
            except requests.RequestException as exc:
                raise CaptionError(f"caption request failed: {exc}") from exc
        if resp.status_code != 200:
            raise CaptionError(f"caption endpoint returned {resp.status_code}: {resp.text[:200]}")
        try:
            payload = resp.json()
        except ValueError as exc:
            raise CaptionError("caption endpoint returned non-JSON body") from exc
        return extract_caption(payload)


@dataclass
class MockCaptionClient:
    """Deterministic stand-in: captions by call order, failures by schedule.

    fail_on receives the zero-based call index and returns True to simulate
    a transport failure for that call. Submitted questions are recorded for
    contract checks.
    """

    template: str = "caption #{index} for: {question}"
    fail_on: Callable[[int], bool] | None = None
    calls: list[str] = field(default_factory=list)

    def __post_init__(self) -> None:
        self._lock = threading.Lock()

    def caption(self, question: str, media: list[MediaAttachment]) -> str:
        with self._lock:
            index = len(self.calls)
            self.calls.append(question)
        if self.fail_on is not None and self.fail_on(index):
            raise CaptionError(f"scripted failure on call {index}")
        return self.template.format(index=index, question=question)
