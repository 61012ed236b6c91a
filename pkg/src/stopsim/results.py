from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any


@dataclass
class RunResult:
    """Outcome of one online run."""

    algorithm: str
    selected: tuple[int, ...]
    value: float
    hallucinated_count: int = 0
    skipped_infeasible: int = 0
    seed: int | None = None
    flags: dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        return {
            "algorithm": self.algorithm,
            "selected": list(self.selected),
            "value": self.value,
            "hallucinated_count": self.hallucinated_count,
            "skipped_infeasible": self.skipped_infeasible,
            "seed": self.seed,
            "flags": self.flags,
        }
