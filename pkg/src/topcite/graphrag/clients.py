"""LLM clients: a deterministic offline mock and a remote HTTP client.

Both expose complete(bundle) -> response text. The mock always emits
schema-valid JSON; its "oracle" mode reads the true labels so downstream
evaluation has a known-separable signal, while "hash" mode derives
probabilities from a digest of the prompt bytes and seed.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import time

import requests

from ..labeling import LabelKey, LabelTable
from .prompts import PromptBundle, parse_user_prompt

log = logging.getLogger(__name__)


def _digest_fraction(digest: bytes, index: int) -> float:
    """Deterministic value in [0, 1) from a digest and a position."""
    h = hashlib.sha256(digest + index.to_bytes(4, "little")).digest()
    return int.from_bytes(h[:8], "little") / 2.0 ** 64


def mock_llm(bundle: PromptBundle, mode: str = "hash",
             labels: dict[LabelKey, LabelTable] | None = None,
             seed: int = 0, jitter: float = 0.05) -> str:
    """Deterministic stand-in for a remote model; output is always valid.

    hash mode: probabilities derived from a digest of the prompt and seed.
    oracle mode: 0.9 for horizons where the target's true label is positive
    and 0.1 otherwise, plus small seeded jitter; requires the label grid.
    """
    parsed = parse_user_prompt(bundle.user)
    years = parsed["target"]["years"]
    digest = hashlib.sha256(
        seed.to_bytes(8, "little", signed=True)
        + bundle.system.encode("utf-8")
        + bundle.developer.encode("utf-8")
        + bundle.user.encode("utf-8")).digest()

    if mode == "hash":
        probs = [round(_digest_fraction(digest, i), 6)
                 for i in range(len(years))]
    elif mode == "oracle":
        if labels is None:
            raise ValueError("oracle mode requires the label grid")
        percentile = round(100 * (1.0 - parsed["config"]["q_value"]))
        probs = []
        for i, year in enumerate(years):
            table = labels.get(LabelKey(Y=int(year), P=int(percentile)))
            if table is None or bundle.target_id not in table.labels:
                raise ValueError(
                    f"no label for target {bundle.target_id!r} at "
                    f"Y={year} P={percentile}")
            base = 0.9 if table.labels[bundle.target_id] else 0.1
            wobble = jitter * (2.0 * _digest_fraction(digest, i) - 1.0)
            probs.append(round(min(1.0, max(0.0, base + wobble)), 6))
    else:
        raise ValueError(f"unknown mock mode {mode!r}")
    return json.dumps({"response": {"y_acc_vector": probs}})


class MockLlmClient:
    """Offline client wrapping mock_llm with fixed settings."""

    def __init__(self, mode: str = "hash",
                 labels: dict[LabelKey, LabelTable] | None = None,
                 seed: int = 0, jitter: float = 0.05):
        if mode == "oracle" and labels is None:
            raise ValueError("oracle mode requires the label grid")
        self.mode = mode
        self.labels = labels
        self.seed = seed
        self.jitter = jitter

    def complete(self, bundle: PromptBundle) -> str:
        return mock_llm(bundle, mode=self.mode, labels=self.labels,
                        seed=self.seed, jitter=self.jitter)


class RemoteLlmClient:
    """Chat-completions-style HTTP client with bounded retries.

    Sends the three role-tagged messages (system/developer/user); endpoint,
    model and key come from configuration and the environment. Provider
    options (temperature, reasoning effort, ...) are passed through opaquely.
    """

    RETRYABLE_STATUS = (429, 500, 502, 503, 504)

    def __init__(self, endpoint: str, model: str,
                 api_key_env: str = "TOPCITE_LLM_API_KEY",
                 timeout: float = 120.0, max_retries: int = 3,
                 backoff: float = 1.0, options: dict | None = None,
                 session=None):
        self.endpoint = endpoint
        self.model = model
        self.timeout = timeout
        self.max_retries = max_retries
        self.backoff = backoff
        self.options = dict(options or {})
        self._session = session or requests.Session()
        self._api_key = os.environ.get(api_key_env, "")

    def complete(self, bundle: PromptBundle) -> str:
        headers = {"Content-Type": "application/json"}
        if self._api_key:
            headers["Authorization"] = f"Bearer {self._api_key}"
        payload = {
            "model": self.model,
            "messages": [
                {"role": "system", "content": bundle.system},
                {"role": "developer", "content": bundle.developer},
                {"role": "user", "content": bundle.user},
            ],
            **self.options,
        }
        last_error: Exception | None = None
        for attempt in range(self.max_retries + 1):
            if attempt:
                time.sleep(self.backoff * 2 ** (attempt - 1))
            try:
                resp = self._session.post(self.endpoint, json=payload,
                                          headers=headers,
                                          timeout=self.timeout)
            except requests.RequestException as exc:
                last_error = exc
                continue
            if resp.status_code in self.RETRYABLE_STATUS:
                last_error = RuntimeError(
                    f"HTTP {resp.status_code} from {self.endpoint}")
                continue
            if resp.status_code != 200:
                raise RuntimeError(
                    f"HTTP {resp.status_code} from {self.endpoint}: "
                    f"{resp.text[:200]}")
            return resp.json()["choices"][0]["message"]["content"]
        raise RuntimeError(
            f"giving up after {self.max_retries} retries: {last_error}")
