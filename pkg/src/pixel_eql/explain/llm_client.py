# pixel_eql/explain/llm_client.py
"""
OpenAI-compatible chat client.

Online, each call is one chat-completion request, retried with exponential
backoff on rate limits, server errors and dropped connections. Offline, the
messages are written to a timestamped text file and its path is returned; no
connection is opened.
"""

from __future__ import annotations

import datetime as dt
import hashlib
import logging
from pathlib import Path
from typing import Any, Callable, Optional, Sequence

import backoff
import httpx
from openai import APIConnectionError, APIStatusError, OpenAI

from pixel_eql.config import ExplainConfig
from pixel_eql.errors import ConfigError, TransportError
from pixel_eql.explain.settings import LLMSettings

logger = logging.getLogger(__name__)

Message = dict[str, str]
TRANSIENT_STATUS = {408, 409, 429}


class _Transient(Exception):
    def __init__(self, message: str, status: Optional[int]) -> None:
        super().__init__(message)
        self.status = status


def _is_transient(status: Optional[int]) -> bool:
    return status is None or status in TRANSIENT_STATUS or status >= 500


def _log_retry(details: dict[str, Any]) -> None:
    exc = details.get("exception")
    logger.warning(
        "Chat request failed (%s); retry %s in %.1fs",
        exc,
        details.get("tries"),
        details.get("wait", 0.0),
    )


def render_transcript(messages: Sequence[Message]) -> str:
    return "\n\n".join(f"[{m['role']}]\n{m['content']}" for m in messages) + "\n"


def write_offline(
    messages: Sequence[Message],
    outbox: Path,
    clock: Callable[[], dt.datetime] = lambda: dt.datetime.now(dt.timezone.utc),
) -> Path:
    """Write the messages to ``outbox/<timestamp>-<digest>.txt``."""
    text = render_transcript(messages)
    digest = hashlib.sha256(text.encode("utf-8")).hexdigest()[:12]
    outbox.mkdir(parents=True, exist_ok=True)
    path = outbox / f"{clock().strftime('%Y%m%dT%H%M%S')}-{digest}.txt"
    path.write_text(text, encoding="utf-8")
    logger.info("Offline mode: wrote prompt to %s", path)
    return path


def llm_chat(
    messages: Sequence[Message],
    endpoint: ExplainConfig,
    *,
    outbox: Optional[Path] = None,
    settings: Optional[LLMSettings] = None,
    http_client: Optional[httpx.Client] = None,
) -> str | Path:
    """
    Send ``messages`` to the configured endpoint, or write them out when offline.

    Raises:
        ConfigError: online without ``PIXEL_EQL_LLM_API_KEY``, or offline without an outbox.
        TransportError: when the request still fails after the configured retries.
    """
    if endpoint.offline:
        if outbox is None:
            raise ConfigError("Offline mode needs an output directory for prompts")
        return write_offline(messages, outbox)

    settings = settings or LLMSettings()
    if settings.api_key is None or not settings.api_key.get_secret_value():
        raise ConfigError("PIXEL_EQL_LLM_API_KEY is not set; use --offline or export the key")

    client = OpenAI(
        base_url=endpoint.base_url,
        api_key=settings.api_key.get_secret_value(),
        max_retries=0,
        timeout=endpoint.timeout_seconds,
        http_client=http_client,
    )

    def _once() -> str:
        try:
            response = client.chat.completions.create(
                model=endpoint.model,
                messages=list(messages),  # type: ignore[arg-type]
                temperature=endpoint.temperature,
            )
        except APIStatusError as exc:
            if _is_transient(exc.status_code):
                raise _Transient(str(exc), exc.status_code) from exc
            raise TransportError(f"Chat endpoint returned {exc.status_code}", exc.status_code) from exc
        except APIConnectionError as exc:
            raise _Transient(str(exc), None) from exc
        return response.choices[0].message.content or ""

    retrying = backoff.on_exception(
        backoff.expo,
        _Transient,
        max_tries=endpoint.max_retries + 1,
        factor=endpoint.backoff_seconds,
        jitter=None,
        on_backoff=_log_retry,
        raise_on_giveup=True,
    )(_once)
    try:
        return retrying()
    except _Transient as exc:
        raise TransportError(
            f"Chat request failed after {endpoint.max_retries + 1} attempt(s): {exc}", exc.status
        ) from exc


def run_dialogue(
    turns: Sequence[str],
    endpoint: ExplainConfig,
    *,
    outbox: Optional[Path] = None,
    settings: Optional[LLMSettings] = None,
    http_client: Optional[httpx.Client] = None,
) -> list[str | Path]:
    """
    Play user ``turns`` in order, feeding every reply back as an assistant message.

    Offline, each turn's transcript so far is written out and a placeholder
    naming the file stands in for the reply.
    """
    history: list[Message] = []
    replies: list[str | Path] = []
    for turn in turns:
        history.append({"role": "user", "content": turn})
        reply = llm_chat(history, endpoint, outbox=outbox, settings=settings, http_client=http_client)
        replies.append(reply)
        content = reply if isinstance(reply, str) else f"(response pending: {Path(reply).name})"
        history.append({"role": "assistant", "content": content})
    return replies
