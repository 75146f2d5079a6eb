"""Extraction backends: a networked language-model endpoint or deterministic
fixture replay from recorded responses.

Every request is identified by a stable key hashed from (mode, input text,
instruction id); fixture files map those keys to recorded response payloads.
"""

from __future__ import annotations

import hashlib
import json
import os
from importlib import resources
from typing import Protocol

REMOTE = "remote"
FIXTURE = "fixture"

INSTRUCTION_TOP_LEVEL = "top_level.v1"
INSTRUCTION_SELF_CORRECT = "self_correct.v1"
INSTRUCTION_REFINE = "refine_entity.v1"

ENV_BACKEND_URL = "PROSEGRAPH_BACKEND_URL"
ENV_BACKEND_TOKEN = "PROSEGRAPH_BACKEND_TOKEN"


class BackendError(RuntimeError):
    """The backend could not produce a response."""


class FixtureMissingError(BackendError):
    """Fixture mode has no recorded response for this request."""


def load_template(instruction_id: str) -> str:
    path = resources.files("prosegraph.templates").joinpath(f"{instruction_id}.txt")
    return path.read_text(encoding="utf-8")


def request_key(mode: str, input_text: str, instruction_id: str) -> str:
    h = hashlib.sha256()
    h.update(mode.encode("utf-8"))
    h.update(b"\x00")
    h.update(instruction_id.encode("utf-8"))
    h.update(b"\x00")
    h.update(input_text.encode("utf-8"))
    return h.hexdigest()


class ExtractionBackend(Protocol):
    mode: str

    def extract(self, input_text: str, instruction_id: str) -> dict:
        """Return the raw response payload (entities/relations JSON object)."""
        ...


class FixtureBackend:
    """Replays recorded responses; bit-deterministic for identical inputs."""

    mode = FIXTURE

    def __init__(self, responses: dict[str, dict]):
        self._responses = responses
        self.requested_keys: list[str] = []

    @classmethod
    def from_file(cls, path: str) -> "FixtureBackend":
        with open(path, encoding="utf-8") as f:
            return cls(json.load(f))

    @classmethod
    def from_bundled(cls, name: str) -> "FixtureBackend":
        data = resources.files("prosegraph.data").joinpath(name).read_text(encoding="utf-8")
        return cls(json.loads(data))

    def extract(self, input_text: str, instruction_id: str) -> dict:
        key = request_key(self.mode, input_text, instruction_id)
        self.requested_keys.append(key)
        try:
            return self._responses[key]
        except KeyError:
            raise FixtureMissingError(
                f"no recorded response for instruction {instruction_id!r} "
                f"on input {input_text!r} (key {key})"
            ) from None


class RemoteBackend:
    """POSTs the rendered instruction to an HTTP endpoint.

    The endpoint URL and credential come from PROSEGRAPH_BACKEND_URL and
    PROSEGRAPH_BACKEND_TOKEN unless given explicitly. The response body must
    be the entities/relations JSON object.
    """

    mode = REMOTE

    def __init__(self, url: str | None = None, token: str | None = None, session=None):
        self.url = url or os.environ.get(ENV_BACKEND_URL)
        self.token = token or os.environ.get(ENV_BACKEND_TOKEN)
        if not self.url:
            raise BackendError(f"remote backend needs a URL ({ENV_BACKEND_URL})")
        if session is None:
            import requests

            session = requests.Session()
        self._session = session

    def extract(self, input_text: str, instruction_id: str) -> dict:
        template = load_template(instruction_id)
        body = {
            "instruction": template.replace("{input}", input_text),
            "instruction_id": instruction_id,
            "input": input_text,
        }
        headers = {"Content-Type": "application/json"}
        if self.token:
            headers["Authorization"] = f"Bearer {self.token}"
        try:
            resp = self._session.post(self.url, json=body, headers=headers, timeout=60)
        except Exception as exc:
            raise BackendError(f"backend unreachable: {exc}") from exc
        if resp.status_code != 200:
            raise BackendError(f"backend returned HTTP {resp.status_code}")
        return resp.json()


def make_backend(mode: str, fixture_path: str | None = None,
                 url: str | None = None, token: str | None = None) -> ExtractionBackend:
    if mode == FIXTURE:
        if fixture_path is None:
            raise BackendError("fixture mode needs a fixture file path")
        return FixtureBackend.from_file(fixture_path)
    if mode == REMOTE:
        return RemoteBackend(url=url, token=token)
    raise BackendError(f"unknown backend mode {mode!r}")
