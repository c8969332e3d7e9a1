# pixel_eql/explain/settings.py
"""Secrets for the chat endpoint; read from the environment (or a .env file) only."""

from __future__ import annotations

from typing import Optional

from pydantic import Field, SecretStr
from pydantic_settings import BaseSettings, SettingsConfigDict


class LLMSettings(BaseSettings):
    """Reads ``PIXEL_EQL_LLM_API_KEY``."""

    model_config = SettingsConfigDict(env_prefix="PIXEL_EQL_LLM_", extra="ignore")

    api_key: Optional[SecretStr] = Field(None, description="API key for the chat endpoint.")
