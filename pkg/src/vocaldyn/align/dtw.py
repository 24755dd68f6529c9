"""Dynamic time warping with the symmetric step set {(1,1),(1,2),(2,1)}.

Step weights (2, 3, 3) multiply the cost of the step's target cell, so the
accumulated cost of a path is sum(w_k * c(i_k, j_k)) with the start cell
counted at weight 2.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# (di, dj, weight), in backtrack preference order
STEPS = ((1, 1, 2.0), (2, 1, 3.0), (1, 2, 3.0))


class InfeasiblePathError(ValueError):
    """No monotone step sequence reaches the opposite corner."""


@dataclass(frozen=True)
class WarpingPath:
    pairs: tuple[tuple[int, int], ...]
    total_cost: float

    def __post_init__(self):
        if not self.pairs or self.pairs[0] != (0, 0):
            raise ValueError("warping path must start at (0, 0)")

    def first_match(self) -> dict[int, int]:
        """Earliest matched column per matched row."""
        out: dict[int, int] = {}
        for i, j in self.pairs:
            out.setdefault(i, j)
        return out


def _check_feasible(rows: int, cols: int):
    a, b = rows - 1, cols - 1
    # (1,2)/(2,1) steps cap the advance of one axis at twice the other
    if b > 2 * a or a > 2 * b:
        raise InfeasiblePathError(
            f"no step sequence traverses a {rows}x{cols} matrix: "
            "side lengths differ by more than a factor of two"
        )


def dtw(cost: np.ndarray) -> WarpingPath:
    cost = np.asarray(cost, dtype=np.float64)
    if cost.ndim != 2 or cost.size == 0:
        raise ValueError("cost must be a non-empty 2-d matrix")
    if not np.isfinite(cost).all() or (cost < 0).any():
        raise ValueError("cost cells must be finite and non-negative")
    rows, cols = cost.shape
    _check_feasible(rows, cols)

    acc = np.full((rows, cols), np.inf)
    acc[0, 0] = 2.0 * cost[0, 0]
    for i in range(1, rows):
        row = acc[i]
        diag = acc[i - 1, :-1] + 2.0 * cost[i, 1:]
        row[1:] = diag
        if cols > 2:
            wide = acc[i - 1, :-2] + 3.0 * cost[i, 2:]
            np.minimum(row[2:], wide, out=row[2:])
        if i >= 2:
            tall = acc[i - 2, :-1] + 3.0 * cost[i, 1:]
            np.minimum(row[1:], tall, out=row[1:])

    total = acc[rows - 1, cols - 1]
    if not np.isfinite(total):
        raise InfeasiblePathError("end cell unreachable")  # pragma: no cover

    pairs = [(rows - 1, cols - 1)]
    i, j = rows - 1, cols - 1
    while (i, j) != (0, 0):
        for di, dj, w in STEPS:
            pi, pj = i - di, j - dj
            if pi < 0 or pj < 0:
                continue
            # same expression the forward pass used, so equality is exact
            if acc[pi, pj] + w * cost[i, j] == acc[i, j]:
                i, j = pi, pj
                break
        else:  # pragma: no cover - forward pass guarantees a predecessor
            raise RuntimeError("backtrack found no predecessor")
        pairs.append((i, j))
    pairs.reverse()
    return WarpingPath(pairs=tuple(pairs), total_cost=float(total))
