"""Language-model backends for the agent loop.

Two implementations: an HTTP client speaking the OpenAI-compatible
chat-completion wire format, and a scripted replay backend that serves
canned responses from scenario files so tests never touch the network.
"""

from __future__ import annotations

import json
import logging
import os
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Protocol

import httpx

logger = logging.getLogger(__name__)


class BackendError(Exception):
    """The backend could not produce a completion."""


class ScriptAssertionError(AssertionError):
    """A scripted prompt-substring assertion failed: the prompt drifted."""


@dataclass(frozen=True)
class BackendRequest:
    """One completion request.

    step_index is the 1-based count of backend calls within the current
    interaction, so a scripted backend can replay without holding state.
    """

    system_prompt: str
    step_prompt: str
    step_index: int
    user_input: str
    max_tokens: int = 1024
    temperature: float = 0.0


class Backend(Protocol):
    def complete(self, request: BackendRequest) -> str: ...


@dataclass(frozen=True)
class ScriptStep:
    response: str
    require_substring: tuple[str, ...] = ()


@dataclass(frozen=True)
class Scenario:
    """Canned responses for one interaction, keyed by step index."""

    steps: tuple[ScriptStep, ...]
    name: str = ""
    user_input_contains: str | None = None
    repeat_last: bool = False

    def matches(self, user_input: str) -> bool:
        if self.user_input_contains is None:
            return True
        return self.user_input_contains.lower() in user_input.lower()

    def step_for(self, index: int) -> ScriptStep:
        if index < 1:
            raise BackendError(f"scenario {self.name!r}: step index {index} < 1")
        if index <= len(self.steps):
            return self.steps[index - 1]
        if self.repeat_last and self.steps:
            return self.steps[-1]
        raise BackendError(
            f"scenario {self.name!r} exhausted: no scripted response for step {index}"
        )


def _scenario_from_dict(data: dict, default_name: str = "") -> Scenario:
    if not isinstance(data, dict) or "steps" not in data:
        raise ValueError("a scenario requires a 'steps' list")
    steps = []
    for i, raw in enumerate(data["steps"]):
        if isinstance(raw, str):
            steps.append(ScriptStep(raw))
            continue
        if not isinstance(raw, dict) or "response" not in raw:
            raise ValueError(f"scenario step {i} must be a string or have 'response'")
        steps.append(
            ScriptStep(
                raw["response"],
                tuple(raw.get("require_substring", ())),
            )
        )
    match = data.get("match", {})
    return Scenario(
        steps=tuple(steps),
        name=data.get("name", default_name),
        user_input_contains=match.get("user_input_contains"),
        repeat_last=bool(data.get("repeat_last", False)),
    )


@dataclass
class ScriptedBackend:
    """Replays scenario responses; asserts expected prompt content."""

    scenarios: tuple[Scenario, ...] = field(default_factory=tuple)

    @classmethod
    def from_file(cls, path: str | Path) -> ScriptedBackend:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        raw_list = data["scenarios"] if isinstance(data, dict) else data
        scenarios = tuple(
            _scenario_from_dict(item, default_name=f"{Path(path).stem}[{i}]")
            for i, item in enumerate(raw_list)
        )
        return cls(scenarios)

    @classmethod
    def from_files(cls, *paths: str | Path) -> ScriptedBackend:
        """Concatenates scenarios from several files; first match wins."""
        scenarios: tuple[Scenario, ...] = ()
        for path in paths:
            scenarios += cls.from_file(path).scenarios
        return cls(scenarios)

    def complete(self, request: BackendRequest) -> str:
        scenario = next(
            (s for s in self.scenarios if s.matches(request.user_input)), None
        )
        if scenario is None:
            raise BackendError(
                f"no scripted scenario matches user input {request.user_input!r}"
            )
        step = scenario.step_for(request.step_index)
        haystack = request.system_prompt + "\n" + request.step_prompt
        for needle in step.require_substring:
            if needle not in haystack:
                raise ScriptAssertionError(
                    f"scenario {scenario.name!r} step {request.step_index}: "
                    f"expected prompt to contain {needle!r}"
                )
        return step.response


@dataclass
class HttpBackend:
    """OpenAI-compatible chat-completions client with bounded retries."""

    base_url: str
    model: str
    api_key: str = ""
    timeout: float = 60.0
    max_attempts: int = 3
    backoff: float = 0.5

    def complete(self, request: BackendRequest) -> str:
        url = self.base_url.rstrip("/") + "/chat/completions"
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        body = {
            "model": self.model,
            "messages": [
                {"role": "system", "content": request.system_prompt},
                {"role": "user", "content": request.step_prompt},
            ],
            "temperature": request.temperature,
            "max_tokens": request.max_tokens,
        }
        last_error: Exception | None = None
        for attempt in range(self.max_attempts):
            if attempt:
                time.sleep(self.backoff * 2 ** (attempt - 1))
            try:
                response = httpx.post(url, json=body, headers=headers, timeout=self.timeout)
                if response.status_code in (429,) or response.status_code >= 500:
                    last_error = BackendError(
                        f"backend returned HTTP {response.status_code}"
                    )
                    logger.warning("completion attempt %d failed: %s", attempt + 1, last_error)
                    continue
                response.raise_for_status()
                payload = response.json()
                return payload["choices"][0]["message"]["content"]
            except (httpx.HTTPError, KeyError, IndexError, ValueError) as exc:
                last_error = exc
                logger.warning("completion attempt %d failed: %s", attempt + 1, exc)
        raise BackendError(
            f"backend unreachable after {self.max_attempts} attempts: {last_error}"
        )


def backend_from_env(env: dict[str, str] | None = None) -> Backend:
    """Builds a backend from environment configuration.

    SCENEALIGN_SCENARIO_FILE (comma-separated paths) selects the scripted
    backend; otherwise SCENEALIGN_BASE_URL (+ SCENEALIGN_MODEL,
    SCENEALIGN_API_KEY, SCENEALIGN_TIMEOUT) selects the HTTP backend.
    """
    env = dict(os.environ) if env is None else env
    scenario_file = env.get("SCENEALIGN_SCENARIO_FILE")
    if scenario_file:
        return ScriptedBackend.from_files(*scenario_file.split(","))
    base_url = env.get("SCENEALIGN_BASE_URL")
    if base_url:
        return HttpBackend(
            base_url=base_url,
            model=env.get("SCENEALIGN_MODEL", "gpt-4-turbo"),
            api_key=env.get("SCENEALIGN_API_KEY", ""),
            timeout=float(env.get("SCENEALIGN_TIMEOUT", "60")),
        )
    raise BackendError(
        "no backend configured: set SCENEALIGN_SCENARIO_FILE or SCENEALIGN_BASE_URL"
    )
