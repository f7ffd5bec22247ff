"""HTTP client for an OpenAI-compatible chat-completion judge endpoint.

The bearer token is read from the RUQEVAL_JUDGE_TOKEN environment variable
only; it is never accepted as a flag or config value, so config echoes in
output documents can never leak it. Request/response bodies are logged at
debug level with the Authorization header redacted.
"""

from __future__ import annotations

import json
import logging
import os
from dataclasses import dataclass

import httpx

from .errors import InputError, ProtocolError, TransportError

__all__ = ["JUDGE_TOKEN_ENV", "JudgeConfig", "JudgeClient"]

JUDGE_TOKEN_ENV = "RUQEVAL_JUDGE_TOKEN"

logger = logging.getLogger("ruqeval.judge")


@dataclass(frozen=True)
class JudgeConfig:
    """Connection settings for the judge model."""

    endpoint: str
    model_name: str
    timeout: float = 30.0
    max_retries: int = 2
    temperature: float = 0.0

    def validate(self) -> None:
        if not self.endpoint:
            raise InputError("judge endpoint must be a nonempty URL")
        if not self.model_name:
            raise InputError("judge model_name must be nonempty")
        if self.timeout <= 0:
            raise InputError(f"judge timeout must be > 0, got {self.timeout}")
        if self.max_retries < 0:
            raise InputError(f"judge max_retries must be >= 0, got {self.max_retries}")


class JudgeClient:
    """Thin chat-completion wrapper with retries and strict response parsing."""

    def __init__(self, config: JudgeConfig, transport: httpx.BaseTransport | None = None):
        config.validate()
        self.config = config
        self._client = httpx.Client(transport=transport, timeout=config.timeout)

    def close(self) -> None:
        self._client.close()

    def __enter__(self) -> "JudgeClient":
        return self

    def __exit__(self, *exc) -> None:
        self.close()

    def _headers(self) -> dict[str, str]:
        headers = {"Content-Type": "application/json"}
        token = os.environ.get(JUDGE_TOKEN_ENV)
        if token:
            headers["Authorization"] = f"Bearer {token}"
        return headers

    def chat(self, system: str, user: str) -> str:
        """One chat completion; returns the assistant message content."""
        url = self.config.endpoint.rstrip("/") + "/chat/completions"
        body = {
            "model": self.config.model_name,
            "temperature": self.config.temperature,
            "messages": [
                {"role": "system", "content": system},
                {"role": "user", "content": user},
            ],
        }
        logger.debug("judge request to %s: %s", url, json.dumps(body)[:2000])
        attempts = self.config.max_retries + 1
        last_error: Exception | None = None
        for attempt in range(attempts):
            try:
                response = self._client.post(url, json=body, headers=self._headers())
            except httpx.HTTPError as exc:
                last_error = exc
                logger.debug("judge attempt %d failed: %s", attempt + 1, exc)
                continue
            if response.status_code >= 500:
                last_error = TransportError(
                    f"judge returned HTTP {response.status_code}"
                )
                logger.debug("judge attempt %d got HTTP %d", attempt + 1, response.status_code)
                continue
            if response.status_code != 200:
                raise TransportError(
                    f"judge rejected the request with HTTP {response.status_code}: "
                    f"{response.text[:500]}"
                )
            return self._extract_content(response)
        raise TransportError(
            f"judge unreachable after {attempts} attempts: {last_error}"
        )

    @staticmethod
    def _extract_content(response: httpx.Response) -> str:
        try:
            payload = response.json()
        except json.JSONDecodeError as exc:
            raise ProtocolError(
                "judge response body is not JSON", payload=response.text
            ) from exc
        logger.debug("judge response: %s", json.dumps(payload)[:2000])
        try:
            content = payload["choices"][0]["message"]["content"]
        except (KeyError, IndexError, TypeError) as exc:
            raise ProtocolError(
                "judge response missing choices[0].message.content", payload=payload
            ) from exc
        if not isinstance(content, str):
            raise ProtocolError("judge message content is not a string", payload=payload)
        return content

    def chat_json(self, system: str, user: str):
        """Chat completion whose content must parse as JSON; no fence stripping."""
        content = self.chat(system, user)
        try:
            return json.loads(content)
        except json.JSONDecodeError as exc:
            raise ProtocolError(
                f"judge content is not valid JSON: {exc}", payload=content
            ) from exc
