"""Event trace with newline-delimited JSON export."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from typing import Any, Iterator


@dataclass
class EventTrace:
    records: list[dict[str, Any]] = field(default_factory=list)

    def add(self, t: int, event: str, **fields: Any) -> None:
        self.records.append({"t": t, "event": event, **fields})

    def __iter__(self) -> Iterator[dict[str, Any]]:
        return iter(self.records)

    def __len__(self) -> int:
        return len(self.records)

    def of(self, event: str) -> list[dict[str, Any]]:
        return [r for r in self.records if r["event"] == event]

    def to_ndjson(self) -> str:
        return "".join(json.dumps(r, sort_keys=True, separators=(",", ":")) + "\n" for r in self.records)

    def digest(self) -> str:
        return hashlib.sha256(self.to_ndjson().encode()).hexdigest()

    def write(self, path) -> None:
        with open(path, "w", encoding="utf-8") as f:
            f.write(self.to_ndjson())
