"""Task-scorer backends: deterministic mock, shortest-path oracle, remote chat API.

A scorer is any callable taking a TaskScorerQuery and returning one raw
non-negative score per candidate. All benchmark and test runs use the mock or
oracle backends (or recorded cassettes); nothing here touches the network
unless a live RemoteScorer is constructed explicitly.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
import time
from dataclasses import dataclass
from pathlib import Path
from typing import TYPE_CHECKING, Callable

import requests

from .classical import distance_field
from .errors import (
    AuthMissing,
    MalformedReply,
    RetriesExhausted,
    ScorerFailure,
    ScorerTimeout,
)
from .gridmap import Connectivity, GridPose, OccupancyGrid
from . import translator

if TYPE_CHECKING:
    from .grounded import Instruction


@dataclass(frozen=True)
class TaskScorerQuery:
    """One scoring request: rate the four candidate cells for this state.

    Candidates arrive in tie-break order (up, right, left, down) and may be
    blocked or out of bounds; backends score them anyway and the planner's
    affordance term handles validity.
    """

    instruction: "Instruction"
    grid: OccupancyGrid
    state: GridPose
    candidates: tuple[GridPose, ...]


ScoreTuple = tuple[float, float, float, float]


def mock_score(query: TaskScorerQuery, tau: float = 0.5) -> ScoreTuple:
    """Distance-ranked softmax stand-in for a language model.

    Each candidate k gets exp(-(d_k - d_min) / tau) where d is the Manhattan
    distance to the goal, so the best candidate always scores 1 and tau sets
    how sharply worse candidates fall off.
    """
    if not (tau > 0):
        raise ScorerFailure(f"tau must be > 0, got {tau}")
    goal = query.instruction.goal
    dists = [abs(c[0] - goal[0]) + abs(c[1] - goal[1]) for c in query.candidates]
    d_min = min(dists)
    scores = tuple(math.exp(-(d - d_min) / tau) for d in dists)
    return scores  # type: ignore[return-value]


@dataclass
class MockScorer:
    """Callable wrapper fixing tau for use as a planner backend."""

    tau: float = 0.5

    def __call__(self, query: TaskScorerQuery) -> ScoreTuple:
        return mock_score(query, self.tau)


def oracle_score(query: TaskScorerQuery) -> ScoreTuple:
    """Score 1 for candidates that lie on a shortest path, else 0.

    A candidate is on a shortest path when its four-connected cost-to-goal
    equals the state's cost minus one. All-zero when the state itself is
    disconnected from the goal.
    """
    grid = query.grid
    fld = distance_field(grid, query.instruction.goal, Connectivity.FOUR)
    return _oracle_from_field(fld, grid, query.state, query.candidates)


def _oracle_from_field(
    fld: list[float], grid: OccupancyGrid, state: GridPose, candidates: tuple[GridPose, ...]
) -> ScoreTuple:
    here = fld[state[1] * grid.width + state[0]] if grid.in_bounds(state[0], state[1]) else math.inf
    if not math.isfinite(here):
        return (0.0, 0.0, 0.0, 0.0)
    out = []
    for c in candidates:
        if grid.in_bounds(c[0], c[1]) and fld[c[1] * grid.width + c[0]] == here - 1.0:
            out.append(1.0)
        else:
            out.append(0.0)
    return (out[0], out[1], out[2], out[3])


class OracleScorer:
    """oracle_score with a memoized distance field per (grid, goal)."""

    def __init__(self):
        # keyed by (id(grid), goal); the grid is pinned in the value so the
        # id cannot be recycled while the entry lives
        self._fields: dict[tuple[int, GridPose], tuple[OccupancyGrid, list[float]]] = {}

    def __call__(self, query: TaskScorerQuery) -> ScoreTuple:
        goal = GridPose(*query.instruction.goal)
        key = (id(query.grid), goal)
        entry = self._fields.get(key)
        if entry is None:
            entry = (query.grid, distance_field(query.grid, goal, Connectivity.FOUR))
            self._fields[key] = entry
        return _oracle_from_field(entry[1], query.grid, query.state, query.candidates)


# --- remote chat endpoint ---


@dataclass
class ChatEndpointConfig:
    """Where and how to reach a chat-completions endpoint."""

    base_url: str
    model_name: str
    api_key_env: str = "API_KEY"
    timeout: float = 30.0
    max_retries: int = 3
    temperature: float = 0.0

    def __post_init__(self):
        if not (self.timeout > 0):
            raise ValueError(f"timeout must be > 0, got {self.timeout}")
        if self.max_retries < 0:
            raise ValueError(f"max_retries must be >= 0, got {self.max_retries}")


BACKOFF_BASE_S = 1.0
BACKOFF_FACTOR = 2.0


def _retryable(status: int) -> bool:
    return status == 429 or 500 <= status < 600


def request_fingerprint(body: dict) -> str:
    """Stable hash of a request body (canonical JSON, sha256 hex)."""
    canon = json.dumps(body, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode("utf-8")).hexdigest()


class Cassette:
    """Line-delimited store of {request_hash, response_body} records.

    Replay serves recorded response bodies without any network or
    credentials; record mode appends after each live success.
    """

    def __init__(self, path: str | Path, record: bool = False):
        self.path = Path(path)
        self.record = record
        self._entries: dict[str, str] = {}
        if self.path.exists():
            for line in self.path.read_text(encoding="utf-8").splitlines():
                if not line.strip():
                    continue
                rec = json.loads(line)
                self._entries[rec["request_hash"]] = rec["response_body"]

    def lookup(self, fingerprint: str) -> str | None:
        return self._entries.get(fingerprint)

    def store(self, fingerprint: str, response_body: str) -> None:
        self._entries[fingerprint] = response_body
        rec = {"request_hash": fingerprint, "response_body": response_body}
        with self.path.open("a", encoding="utf-8") as fh:
            fh.write(json.dumps(rec, sort_keys=True) + "\n")


# transport signature: (url, headers, json_body, timeout) -> (status_code, body_text)
Transport = Callable[[str, dict, dict, float], tuple[int, str]]


def _requests_transport(url: str, headers: dict, body: dict, timeout: float) -> tuple[int, str]:
    resp = requests.post(url, headers=headers, json=body, timeout=timeout)
    return resp.status_code, resp.text


class RemoteScorer:
    """Scores candidates by asking a chat-completions endpoint.

    Builds the step prompt through the translator, POSTs it to
    ``{base_url}/chat/completions`` with a Bearer key read from the
    environment, and parses the reply's scores line. Transport errors and
    429/5xx responses are retried with exponential backoff (1 s base,
    factor 2) up to max_retries. With a replay cassette no network or key
    is needed at all.
    """

    def __init__(
        self,
        config: ChatEndpointConfig,
        cassette: Cassette | None = None,
        transport: Transport = _requests_transport,
        sleep: Callable[[float], None] = time.sleep,
    ):
        self.config = config
        self.cassette = cassette
        self._transport = transport
        self._sleep = sleep
        # (attempt, outcome, backoff_s) per transport attempt, for tests/audit
        self.call_log: list[tuple[int, str, float]] = []

    def __call__(self, query: TaskScorerQuery) -> ScoreTuple:
        prompt = translator.serialize_step_prompt(
            query.grid, query.state, query.instruction, query.candidates
        )
        body = self._request_body(prompt)
        content = self._complete(body)
        return translator.parse_action_scores(content)

    def _request_body(self, prompt: translator.StepPrompt) -> dict:
        return {
            "model": self.config.model_name,
            "temperature": self.config.temperature,
            "messages": [
                {"role": "system", "content": prompt.system_text},
                {"role": "user", "content": prompt.user_text},
            ],
        }

    def complete_text(self, prompt: translator.StepPrompt) -> str:
        """Run one completion and return the assistant text (fullpath mode)."""
        return self._complete(self._request_body(prompt))

    def _complete(self, body: dict) -> str:
        fingerprint = request_fingerprint(body)
        if self.cassette is not None:
            hit = self.cassette.lookup(fingerprint)
            if hit is not None:
                return self._extract_content(hit)
            if not self.cassette.record:
                raise ScorerFailure(
                    f"cassette {self.cassette.path} has no record for request {fingerprint[:12]}"
                )

        api_key = os.environ.get(self.config.api_key_env)
        if not api_key:
            raise AuthMissing(
                f"environment variable {self.config.api_key_env} is not set"
            )
        url = self.config.base_url.rstrip("/") + "/chat/completions"
        headers = {"Authorization": f"Bearer {api_key}"}

        last_error = "no attempt made"
        timed_out = False
        for attempt in range(self.config.max_retries + 1):
            try:
                status, text = self._transport(url, headers, body, self.config.timeout)
            except requests.Timeout as exc:
                timed_out, last_error = True, f"timeout: {exc}"
                status = None
            except requests.RequestException as exc:
                timed_out, last_error = False, f"transport error: {exc}"
                status = None
            else:
                if status == 200:
                    self.call_log.append((attempt, "ok", 0.0))
                    if self.cassette is not None and self.cassette.record:
                        self.cassette.store(fingerprint, text)
                    return self._extract_content(text)
                timed_out, last_error = False, f"HTTP {status}"
                if not _retryable(status):
                    self.call_log.append((attempt, last_error, 0.0))
                    raise ScorerFailure(f"endpoint rejected request: {last_error}")
            if attempt < self.config.max_retries:
                delay = BACKOFF_BASE_S * BACKOFF_FACTOR ** attempt
                self.call_log.append((attempt, last_error, delay))
                self._sleep(delay)
            else:
                self.call_log.append((attempt, last_error, 0.0))
        if timed_out:
            raise ScorerTimeout(f"gave up after {self.config.max_retries + 1} attempts: {last_error}")
        raise RetriesExhausted(f"gave up after {self.config.max_retries + 1} attempts: {last_error}")

    @staticmethod
    def _extract_content(response_body: str) -> str:
        try:
            payload = json.loads(response_body)
            content = payload["choices"][0]["message"]["content"]
        except (json.JSONDecodeError, KeyError, IndexError, TypeError):
            raise MalformedReply(
                "response body is not a chat completion", reply=response_body
            ) from None
        if not isinstance(content, str):
            raise MalformedReply("completion content is not text", reply=response_body)
        return content


def remote_score(
    query: TaskScorerQuery,
    config: ChatEndpointConfig,
    cassette: Cassette | None = None,
    transport: Transport = _requests_transport,
    sleep: Callable[[float], None] = time.sleep,
) -> ScoreTuple:
    """One-shot functional form of RemoteScorer."""
    return RemoteScorer(config, cassette=cassette, transport=transport, sleep=sleep)(query)
