"""Node placement, square-let grid, staircase routing and TDMA colouring."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

__all__ = [
    "HELPER_POSITION",
    "Placement",
    "Grid",
    "RoutePath",
    "TdmaSchedule",
    "transmission_range",
    "place_uniform",
    "build_grid",
    "route",
    "tdma_colors",
    "protocol_check",
    "slot_transmissions",
]

HELPER_POSITION = (0.5, 0.5)

Cell = Tuple[int, int]


def transmission_range(n: int) -> float:
    """Connectivity range ``sqrt(ln n / n)`` on the unit square."""
    if n < 2:
        raise ValueError(f"transmission range needs n >= 2, got {n}")
    return math.sqrt(math.log(n) / n)


@dataclass(frozen=True)
class Placement:
    positions: np.ndarray
    helper_position: Tuple[float, float] = HELPER_POSITION

    @property
    def n(self) -> int:
        return len(self.positions)


def place_uniform(n: int, rng: np.random.Generator) -> Placement:
    """Drop ``n`` nodes i.i.d. uniformly on the unit square."""
    if n < 1:
        raise ValueError(f"need at least one node, got n={n}")
    positions = rng.random((n, 2))
    positions.setflags(write=False)
    return Placement(positions)


@dataclass(frozen=True)
class Grid:
    """Tessellation of the unit square into ``g * g`` square-lets.

    Cells are addressed ``(column, row)``; ``members[(i, j)]`` lists the node
    indices falling in that cell (possibly empty).
    """

    g: int
    c1: float
    tx_range: float
    cell_of_node: np.ndarray
    members: dict = field(repr=False)

    @property
    def cell_side(self) -> float:
        return 1.0 / self.g

    @property
    def n_cells(self) -> int:
        return self.g * self.g

    def cell_of(self, point: Sequence[float]) -> Cell:
        i = min(int(point[0] * self.g), self.g - 1)
        j = min(int(point[1] * self.g), self.g - 1)
        return (i, j)

    @property
    def helper_cell(self) -> Cell:
        return self.cell_of(HELPER_POSITION)

    def occupancy(self) -> np.ndarray:
        counts = np.zeros((self.g, self.g), dtype=int)
        for (i, j), nodes in self.members.items():
            counts[i, j] = len(nodes)
        return counts


def build_grid(placement: Placement, c1: float = 1.0) -> Grid:
    """Square-lets of side about ``c1 * s(n)``, ``g = floor(1 / (c1 s(n)))`` per axis."""
    if c1 <= 0:
        raise ValueError(f"c1 must be positive, got {c1}")
    s = transmission_range(placement.n)
    g = max(1, math.floor(1.0 / (c1 * s)))
    # coordinate 1.0 falls on the outer edge; clamp it into the last cell
    idx = np.minimum((placement.positions * g).astype(int), g - 1)
    cell_of_node = idx[:, 0] * g + idx[:, 1]
    members = {(i, j): [] for i in range(g) for j in range(g)}
    for node, (i, j) in enumerate(idx.tolist()):
        members[(i, j)].append(node)
    members = {k: tuple(v) for k, v in members.items()}
    cell_of_node.setflags(write=False)
    return Grid(g=g, c1=c1, tx_range=s, cell_of_node=cell_of_node, members=members)


@dataclass(frozen=True)
class RoutePath:
    cells: Tuple[Cell, ...]

    @property
    def hop_count(self) -> int:
        return len(self.cells) - 1


def _staircase(a: Cell, b: Cell) -> List[Cell]:
    # 4-connected traversal of the segment between the two cell centres;
    # exact corner crossings step horizontally first
    (x, y), (x1, y1) = a, b
    dx, dy = x1 - x, y1 - y
    nx, ny = abs(dx), abs(dy)
    sx = 1 if dx > 0 else -1
    sy = 1 if dy > 0 else -1
    cells = [(x, y)]
    ix = iy = 0
    while ix < nx or iy < ny:
        # next vertical boundary at t=(2ix+1)/(2nx), horizontal at (2iy+1)/(2ny)
        if iy == ny or (ix < nx and (2 * ix + 1) * ny <= (2 * iy + 1) * nx):
            x += sx
            ix += 1
        else:
            y += sy
            iy += 1
        cells.append((x, y))
    return cells


def route(grid: Grid, from_cell: Cell, to_cell: Cell) -> RoutePath:
    """Cells crossed by the straight line between two square-let centres.

    The traversal is computed from the lexicographically smaller endpoint so
    that ``route(a, b)`` is exactly ``route(b, a)`` reversed.
    """
    for c in (from_cell, to_cell):
        if not (0 <= c[0] < grid.g and 0 <= c[1] < grid.g):
            raise ValueError(f"cell {c} is outside the {grid.g}x{grid.g} grid")
    a, b = tuple(from_cell), tuple(to_cell)
    if a <= b:
        cells = _staircase(a, b)
    else:
        cells = _staircase(b, a)[::-1]
    return RoutePath(tuple(cells))


@dataclass(frozen=True)
class TdmaSchedule:
    """Spatial-reuse colouring: cells congruent modulo ``c2`` in both axes share a slot."""

    c2: int
    delta: float
    g: int

    @property
    def n_colors(self) -> int:
        return self.c2 * self.c2

    def color_of(self, cell: Cell) -> int:
        return (cell[0] % self.c2) * self.c2 + (cell[1] % self.c2)

    def cells_with_color(self, color: int) -> List[Cell]:
        return [
            (i, j)
            for i in range(color // self.c2, self.g, self.c2)
            for j in range(color % self.c2, self.g, self.c2)
        ]


def reuse_spacing(c1: float, delta: float) -> int:
    """Integer reuse distance ``ceil((2 + delta) / c1)`` in square-lets."""
    # round before ceil so that e.g. 3.0000000000000004 stays 3
    return max(1, math.ceil(round((2.0 + delta) / c1, 9)))


def tdma_colors(grid: Grid, delta: float) -> TdmaSchedule:
    if delta < 0:
        raise ValueError(f"guard factor must be >= 0, got {delta}")
    return TdmaSchedule(c2=reuse_spacing(grid.c1, delta), delta=delta, g=grid.g)


def protocol_check(
    placement: Placement,
    pairs: Sequence[Tuple[int, int]],
    delta: float,
    tx_range: float,
) -> bool:
    """Protocol-model feasibility of a set of concurrent transmissions.

    Every receiver must be strictly within ``tx_range`` of its transmitter and
    strictly farther than ``(1 + delta) * tx_range`` from every other active
    transmitter.
    """
    if not pairs:
        return True
    pos = placement.positions
    tx = np.array([p[0] for p in pairs])
    rx = np.array([p[1] for p in pairs])
    d = np.linalg.norm(pos[rx][:, None, :] - pos[tx][None, :, :], axis=2)
    if np.any(np.diag(d) >= tx_range):
        return False
    # same node transmitting to several receivers is one transmitter
    same_tx = tx[None, :] == tx[:, None]
    guard = (1.0 + delta) * tx_range
    return bool(np.all((d > guard) | same_tx))


def slot_transmissions(
    placement: Placement,
    grid: Grid,
    schedule: TdmaSchedule,
    color: int,
    rng: np.random.Generator,
    tx_range: Optional[float] = None,
) -> List[Tuple[int, int]]:
    """One transmission per occupied cell of ``color``.

    Each such cell gets a uniformly chosen transmitter; its receiver is the
    nearest other node of the same cell, kept only if it lies within
    ``tx_range`` (default ``c1 * s(n)``).
    """
    if tx_range is None:
        tx_range = grid.c1 * grid.tx_range
    pos = placement.positions
    pairs = []
    for cell in schedule.cells_with_color(color):
        nodes = grid.members[cell]
        if len(nodes) < 2:
            continue
        tx = nodes[int(rng.integers(len(nodes)))]
        others = np.array([v for v in nodes if v != tx])
        d = np.linalg.norm(pos[others] - pos[tx], axis=1)
        k = int(np.argmin(d))
        if d[k] < tx_range:
            pairs.append((tx, int(others[k])))
    return pairs
