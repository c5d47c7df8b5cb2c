"""Partial injective mappings between the nodes of two graphs."""

from __future__ import annotations

from typing import Iterable

import numpy as np


class LinkError(ValueError):
    """A pair collection is not injective (or otherwise malformed)."""


class LinkSet:
    """Set of ``(left, right)`` pairs, injective in both directions.

    Stored as two parallel int64 arrays sorted by ``left``.
    """

    __slots__ = ("left", "right")

    def __init__(self, left=(), right=(), *, check: bool = True):
        left = np.asarray(left, dtype=np.int64).reshape(-1)
        right = np.asarray(right, dtype=np.int64).reshape(-1)
        if left.shape != right.shape:
            raise LinkError("left and right arrays differ in length")
        order = np.argsort(left, kind="stable")
        self.left = left[order]
        self.right = right[order]
        if check:
            self.check()

    @classmethod
    def from_pairs(cls, pairs: Iterable | np.ndarray, check: bool = True) -> "LinkSet":
        arr = np.asarray(pairs, dtype=np.int64)
        if arr.size == 0:
            return cls(check=check)
        arr = arr.reshape(-1, 2)
        return cls(arr[:, 0], arr[:, 1], check=check)

    def check(self) -> None:
        if np.unique(self.left).size != self.left.size:
            raise LinkError("a left node appears in more than one link")
        if np.unique(self.right).size != self.right.size:
            raise LinkError("a right node appears in more than one link")
        if self.left.size and (self.left.min() < 0 or self.right.min() < 0):
            raise LinkError("negative node id in links")

    def pairs(self) -> np.ndarray:
        return np.column_stack([self.left, self.right]) if len(self) else np.zeros((0, 2), np.int64)

    def to_set(self) -> set[tuple[int, int]]:
        return set(zip(self.left.tolist(), self.right.tolist()))

    def partner_arrays(self, n1: int, n2: int) -> tuple[np.ndarray, np.ndarray]:
        """Dense lookups: ``p1[a] = b`` and ``p2[b] = a`` (-1 when unlinked)."""
        if len(self) and (self.left.max() >= n1 or self.right.max() >= n2):
            raise LinkError("link references a node outside the graphs")
        p1 = np.full(n1, -1, dtype=np.int64)
        p2 = np.full(n2, -1, dtype=np.int64)
        p1[self.left] = self.right
        p2[self.right] = self.left
        return p1, p2

    def union(self, other: "LinkSet") -> "LinkSet":
        return LinkSet(
            np.concatenate([self.left, other.left]), np.concatenate([self.right, other.right])
        )

    def transpose(self) -> "LinkSet":
        return LinkSet(self.right, self.left, check=False)

    def __len__(self) -> int:
        return int(self.left.size)

    def __iter__(self):
        return zip(self.left.tolist(), self.right.tolist())

    def __contains__(self, pair) -> bool:
        a, b = pair
        i = np.searchsorted(self.left, a)
        return bool(i < self.left.size and self.left[i] == a and self.right[i] == b)

    def __eq__(self, other) -> bool:
        if not isinstance(other, LinkSet):
            return NotImplemented
        return np.array_equal(self.left, other.left) and np.array_equal(self.right, other.right)

    def __repr__(self):
        return f"LinkSet({len(self)} links)"
