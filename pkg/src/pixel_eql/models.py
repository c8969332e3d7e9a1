# pixel_eql/models.py

from __future__ import annotations

import logging
from datetime import datetime, timezone
from typing import Dict, List, Optional

from pydantic import BaseModel, Field

from pixel_eql.__about__ import __version__

logger = logging.getLogger(__name__)


def _now() -> datetime:
    return datetime.now(timezone.utc)


class RunMetadata(BaseModel):
    """Everything that legitimately differs between two identical runs."""

    started_at: datetime = Field(default_factory=_now)
    finished_at: Optional[datetime] = None
    version: str = __version__
    timings: Dict[str, float] = Field(default_factory=dict)


class GradCheckRow(BaseModel):
    """Worst relative error of one analytic gradient against finite differences."""

    name: str
    instances: int
    max_rel_error: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.max_rel_error < self.tolerance


class CommandSummary(BaseModel):
    """The machine-readable result of one subcommand."""

    command: str
    seed: int
    env_id: str
    variant: Optional[str] = None
    artifacts: Dict[str, str] = Field(default_factory=dict)
    metrics: Dict[str, Optional[float]] = Field(default_factory=dict)
    grad_checks: List[GradCheckRow] = Field(default_factory=list)
    notes: List[str] = Field(default_factory=list)
    metadata: RunMetadata = Field(default_factory=RunMetadata)
