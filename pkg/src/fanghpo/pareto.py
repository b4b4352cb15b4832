"""Pareto dominance, a nondominated archive, and WFG hypervolume.

All objectives are minimized. The hypervolume of a front P with reference
point r is the Lebesgue measure of the union of boxes [p, r], computed with
the recursive exclusive-hypervolume scheme: the contribution of each point
is its own box volume minus the hypervolume of the part covered by the
points after it in a sorted sweep.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

Outcome = np.ndarray
"""Objective vector, shape ``(M,)``, minimization."""


def dominates(a: Outcome, b: Outcome) -> bool:
    """True iff ``a`` is no worse than ``b`` everywhere and strictly better somewhere."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ValueError(f"objective length mismatch: {a.shape} vs {b.shape}")
    return bool(np.all(a <= b) and np.any(a < b))


def _nondominated_unique(points: np.ndarray) -> np.ndarray:
    """Distinct mutually nondominated rows, lexicographically sorted."""
    pts = np.unique(points, axis=0)
    n = pts.shape[0]
    keep = np.ones(n, dtype=bool)
    for i in range(n):
        if not keep[i]:
            continue
        others = pts[keep]
        dominated = np.all(others <= pts[i], axis=1) & np.any(others < pts[i], axis=1)
        if np.any(dominated):
            keep[i] = False
    return pts[keep]


def _wfg(pts: np.ndarray, reference: np.ndarray) -> float:
    # pts: distinct, mutually nondominated, all strictly inside the reference box.
    total = 0.0
    for i in range(pts.shape[0]):
        inclusive = float(np.prod(reference - pts[i]))
        rest = pts[i + 1 :]
        if rest.shape[0] == 0:
            total += inclusive
            continue
        limited = np.maximum(rest, pts[i])
        total += inclusive - _wfg(_nondominated_unique(limited), reference)
    return total


def hypervolume(front: np.ndarray | list, reference: Outcome) -> float:
    """Hypervolume dominated by ``front`` and bounded by ``reference``.

    Points not strictly inside the reference box contribute nothing.
    An empty front has hypervolume 0.
    """
    r = np.asarray(reference, dtype=float).reshape(-1)
    pts = np.asarray(front, dtype=float).reshape(-1, r.size)
    pts = pts[np.all(pts < r, axis=1)]
    if pts.shape[0] == 0:
        return 0.0
    return _wfg(_nondominated_unique(pts), r)


def hvi(front: np.ndarray | list, reference: Outcome, candidate: Outcome) -> float:
    """Hypervolume improvement of ``candidate`` over ``front``."""
    r = np.asarray(reference, dtype=float).reshape(-1)
    pts = np.asarray(front, dtype=float).reshape(-1, r.size)
    cand = np.asarray(candidate, dtype=float).reshape(1, -1)
    return hypervolume(np.vstack([pts, cand]), r) - hypervolume(pts, r)


@dataclass
class ArchiveEntry:
    location: np.ndarray
    outcome: np.ndarray
    source: int


class ParetoArchive:
    """Mutually nondominated (location, outcome, source) triples.

    Entries outside the reference box are retained (they are still
    nondominated information) but excluded from hypervolume.
    """

    def __init__(self, reference: Outcome):
        self.reference = np.asarray(reference, dtype=float).reshape(-1)
        self.entries: list[ArchiveEntry] = []

    def __len__(self) -> int:
        return len(self.entries)

    def insert(self, location: np.ndarray, outcome: Outcome, source: int) -> bool:
        """Add an outcome unless dominated (or equal to an entry); prune what it dominates.

        Returns True iff the outcome was accepted.
        """
        y = np.asarray(outcome, dtype=float).reshape(-1)
        if not np.all(np.isfinite(y)):
            raise ValueError("outcome coordinates must be finite")
        for entry in self.entries:
            if dominates(entry.outcome, y) or np.array_equal(entry.outcome, y):
                return False
        self.entries = [e for e in self.entries if not dominates(y, e.outcome)]
        self.entries.append(
            ArchiveEntry(np.asarray(location, dtype=float).copy(), y.copy(), int(source))
        )
        return True

    def front(self) -> np.ndarray:
        """Outcome matrix, shape ``(len(self), M)``."""
        if not self.entries:
            return np.empty((0, self.reference.size))
        return np.array([e.outcome for e in self.entries])

    def hypervolume(self) -> float:
        return hypervolume(self.front(), self.reference)

    def snapshot(self) -> list[dict]:
        """JSON-friendly copy of the entries."""
        return [
            {
                "location": [float(v) for v in e.location],
                "outcome": [float(v) for v in e.outcome],
                "source": e.source,
            }
            for e in self.entries
        ]
