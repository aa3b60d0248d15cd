"""Ranked result lists shared by the lexical, semantic and fused paths."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class RankedEntry:
    paper_id: str
    score: float
    rank: int  # 1-based


@dataclass(frozen=True)
class RankedList:
    entries: tuple
    source: str  # "lexical" | "semantic" | "fused"

    @classmethod
    def empty(cls, source: str) -> "RankedList":
        return cls(entries=(), source=source)

    @classmethod
    def from_scored(cls, scored, source: str) -> "RankedList":
        """Build from (score, paper_id) pairs already in final order."""
        return cls(
            entries=tuple(
                RankedEntry(pid, float(score), rank)
                for rank, (score, pid) in enumerate(scored, 1)
            ),
            source=source,
        )

    def __len__(self) -> int:
        return len(self.entries)

    def paper_ids(self) -> list:
        return [e.paper_id for e in self.entries]

    def ranks(self) -> dict:
        return {e.paper_id: e.rank for e in self.entries}

    def truncated(self, limit: int) -> "RankedList":
        return RankedList(entries=self.entries[:limit], source=self.source)

    def validate(self):
        prev_score = None
        for pos, e in enumerate(self.entries, 1):
            if e.rank != pos:
                raise ValueError(f"rank {e.rank} at position {pos} in {self.source} list")
            if prev_score is not None and e.score > prev_score:
                raise ValueError("scores must be non-increasing with rank")
            prev_score = e.score
        return self
