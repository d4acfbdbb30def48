"""Plain dictionary model of what the CAM is supposed to answer."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

from .ops import Learn, MemoryPattern, Operation, RecallByContent, RecallByCue


@dataclass
class OracleCam:
    table: dict[int, frozenset[int]] = field(default_factory=dict)

    def learn(self, pattern: MemoryPattern) -> frozenset[int]:
        if not pattern.content:
            raise ValueError("cannot learn an empty content")
        old = self.table.get(pattern.cue, frozenset())
        self.table[pattern.cue] = frozenset(pattern.content)
        return old - pattern.content

    def recall_by_cue(self, cue: int) -> frozenset[int]:
        return self.table.get(cue, frozenset())

    def recall_by_content(self, fragment: Iterable[int]) -> frozenset[int]:
        fragment = frozenset(fragment)
        if not fragment:
            raise ValueError("recall by content needs a non-empty fragment")
        return frozenset(c for c, content in self.table.items() if content & fragment)

    def apply(self, op: Operation) -> frozenset[int]:
        """Run one operation; returns forgotten content, recalled content or recalled cues."""
        if isinstance(op, Learn):
            return self.learn(op.pattern)
        if isinstance(op, RecallByCue):
            return self.recall_by_cue(op.cue)
        if isinstance(op, RecallByContent):
            return self.recall_by_content(op.fragment)
        raise TypeError(f"not an operation: {op!r}")


def oracle_learn(oracle: OracleCam, pattern: MemoryPattern) -> frozenset[int]:
    return oracle.learn(pattern)


def oracle_recall_by_cue(oracle: OracleCam, cue: int) -> frozenset[int]:
    return oracle.recall_by_cue(cue)


def oracle_recall_by_content(oracle: OracleCam, fragment: Iterable[int]) -> frozenset[int]:
    return oracle.recall_by_content(fragment)
