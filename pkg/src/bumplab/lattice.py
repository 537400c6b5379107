"""Dyadic lattices on a cubical box, shifted copies, cubes and sparse families.

Geometry lives on a refined integer grid with ``3 * 2**d`` cells per axis:
an ordinary level-d cell ``i`` is refined cells ``3i, 3i+1, 3i+2``.  A shift
of ``s/3`` of the box side is ``s * 2**d`` refined cells, so every cube of
every shifted lattice is an exact union of refined cells.

Shifted lattices keep the dyadic nesting but their cubes overhang the box.
Cube indices therefore start at -1 on shifted axes; overhanging cubes are
clipped to the box and flagged, and measures use the clipped part.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, Optional, Sequence

import numpy as np

from .errors import DegenerateCubeError, ParameterError, ResourceError, StructuralError

__all__ = [
    "DyadicLattice",
    "Cube",
    "SparseFamily",
    "SparsityResult",
    "build_lattice",
    "shifted_lattices",
    "enumerate_cubes",
    "cover_cube",
    "sparsity_check",
    "level_blocks",
    "spread_level",
    "family_to_json",
    "family_from_json",
]

MAX_DEPTH = 24
CELL_BUDGET = 2 ** 26


@dataclass(frozen=True)
class DyadicLattice:
    box: tuple                      # ((lo, hi),) * n, equal sides
    depth: int
    shift: tuple = ()               # thirds of the box side per axis, in {0, 1, 2}
    lattice_id: int = 0

    @property
    def n(self) -> int:
        return len(self.box)

    @property
    def cells_per_axis(self) -> int:
        return 2 ** self.depth

    @property
    def refined_per_axis(self) -> int:
        return 3 * 2 ** self.depth

    @property
    def side(self) -> float:
        lo, hi = self.box[0]
        return hi - lo

    @property
    def cell_side(self) -> float:
        return self.side / self.cells_per_axis

    @property
    def cell_volume(self) -> float:
        return self.cell_side ** self.n

    @property
    def refined_volume(self) -> float:
        return (self.cell_side / 3) ** self.n

    @property
    def shift_refined(self) -> tuple:
        return tuple(s * 2 ** self.depth for s in self.shift)

    @property
    def is_base(self) -> bool:
        return not any(self.shift)

    def base(self) -> "DyadicLattice":
        return DyadicLattice(self.box, self.depth, (0,) * self.n, 0)

    def same_grid(self, other: "DyadicLattice") -> bool:
        return self.box == other.box and self.depth == other.depth

    def refined_side(self, k: int) -> int:
        return 3 * 2 ** (self.depth - k)

    def index_range(self, k: int, axis: int) -> tuple:
        """Inclusive index range of level-k cubes meeting the box on ``axis``."""
        S = self.refined_side(k)
        sh = self.shift_refined[axis]
        R = self.refined_per_axis
        return (-sh) // S, -(-(R - sh) // S) - 1

    def level_shape(self, k: int) -> tuple:
        out = []
        for ax in range(self.n):
            lo, hi = self.index_range(k, ax)
            out.append(hi - lo + 1)
        return tuple(out)

    def cubes_at(self, k: int) -> Iterator["Cube"]:
        ranges = [range(lo, hi + 1) for lo, hi in
                  (self.index_range(k, ax) for ax in range(self.n))]
        for idx in itertools.product(*ranges):
            yield Cube(self, k, idx)

    def contains(self, Q: "Cube") -> bool:
        if Q.lattice != self or not 0 <= Q.level <= self.depth:
            return False
        for ax, j in enumerate(Q.index):
            lo, hi = self.index_range(Q.level, ax)
            if not lo <= j <= hi:
                return False
        return True

    def root(self) -> "Cube":
        if not self.is_base:
            raise StructuralError("shifted lattices have no single root cube")
        return Cube(self, 0, (0,) * self.n)

    def cell_center(self, idx: Sequence[int]) -> np.ndarray:
        return np.array([self.box[ax][0] + (i + 0.5) * self.cell_side
                         for ax, i in enumerate(idx)])

    def centers(self) -> np.ndarray:
        """Cell-center coordinates along one axis (all axes are identical)."""
        lo = self.box[0][0]
        return lo + (np.arange(self.cells_per_axis) + 0.5) * self.cell_side

    def to_json(self) -> dict:
        return {"box": [list(b) for b in self.box], "depth": self.depth,
                "shift": list(self.shift), "lattice_id": self.lattice_id}


def _parse_shift(shift, n: int) -> tuple:
    if shift is None:
        shift = 0.0
    if np.isscalar(shift):
        shift = [shift] * n
    if len(shift) != n:
        raise ParameterError("shift needs one component per axis")
    thirds = []
    for s in shift:
        if not 0 <= s < 1:
            raise ParameterError("shift components must lie in [0, 1)")
        t = round(3 * s)
        if abs(3 * s - t) > 1e-9:
            raise ParameterError("shift components must be multiples of 1/3")
        thirds.append(int(t))
    return tuple(thirds)


def build_lattice(box, depth: int, shift=0.0, lattice_id: int = 0) -> DyadicLattice:
    """Lattice on ``box`` (list of (lo, hi) per axis) with 2**depth cells per axis."""
    if isinstance(box[0], (int, float)):
        box = [box]
    box = tuple((float(lo), float(hi)) for lo, hi in box)
    sides = [hi - lo for lo, hi in box]
    if any(s <= 0 for s in sides):
        raise ParameterError("box intervals must have positive length")
    if max(sides) - min(sides) > 1e-12 * max(sides):
        raise ParameterError("box must be a cube (equal side lengths)")
    if not 1 <= depth <= MAX_DEPTH:
        raise ParameterError(f"depth must lie in [1, {MAX_DEPTH}]")
    if (2 ** depth) ** len(box) > CELL_BUDGET:
        raise ResourceError(f"{(2 ** depth) ** len(box)} cells exceed budget {CELL_BUDGET}")
    return DyadicLattice(box, int(depth), _parse_shift(shift, len(box)), lattice_id)


def shifted_lattices(base: DyadicLattice) -> list:
    """The 3^n lattices with shifts in {0, 1/3, 2/3}^n; id 0 is ``base`` itself."""
    out = []
    for lid, sh in enumerate(itertools.product(range(3), repeat=base.n)):
        out.append(DyadicLattice(base.box, base.depth, tuple(sh), lid))
    return out


def enumerate_cubes(lat: DyadicLattice, max_level: Optional[int] = None) -> Iterator["Cube"]:
    top = lat.depth if max_level is None else max_level
    for k in range(top + 1):
        yield from lat.cubes_at(k)


@dataclass(frozen=True)
class Cube:
    lattice: DyadicLattice
    level: int
    index: tuple

    def __post_init__(self):
        object.__setattr__(self, "index", tuple(int(j) for j in self.index))

    @property
    def n(self) -> int:
        return self.lattice.n

    def unclipped_refined(self) -> list:
        S = self.lattice.refined_side(self.level)
        sh = self.lattice.shift_refined
        return [(sh[ax] + j * S, sh[ax] + (j + 1) * S) for ax, j in enumerate(self.index)]

    def refined_bounds(self) -> list:
        """Half-open refined-cell bounds per axis, clipped to the box."""
        R = self.lattice.refined_per_axis
        out = [(max(lo, 0), min(hi, R)) for lo, hi in self.unclipped_refined()]
        if any(lo >= hi for lo, hi in out):
            raise DegenerateCubeError(f"cube {self.key()} misses the domain")
        return out

    @property
    def clipped(self) -> bool:
        R = self.lattice.refined_per_axis
        return any(lo < 0 or hi > R for lo, hi in self.unclipped_refined())

    @property
    def side(self) -> float:
        return self.lattice.side / 2 ** self.level

    @property
    def measure(self) -> float:
        """Clipped Lebesgue measure."""
        return self.refined_count * self.lattice.refined_volume

    @property
    def refined_count(self) -> int:
        return math.prod(hi - lo for lo, hi in self.refined_bounds())

    @property
    def aligned(self) -> bool:
        return all(lo % 3 == 0 and hi % 3 == 0 for lo, hi in self.refined_bounds())

    def cell_bounds(self) -> list:
        """Half-open level-d cell bounds; only for cubes that are unions of cells."""
        rb = self.refined_bounds()
        if not all(lo % 3 == 0 and hi % 3 == 0 for lo, hi in rb):
            raise StructuralError(f"cube {self.key()} is not a union of level-d cells")
        return [(lo // 3, hi // 3) for lo, hi in rb]

    def triple_cell_bounds(self) -> list:
        """Cell bounds of the concentric triple 3Q intersected with the box."""
        N = self.lattice.cells_per_axis
        s = 2 ** (self.lattice.depth - self.level)
        return [(max(lo - s, 0), min(hi + s, N)) for lo, hi in self.cell_bounds()]

    def triple_refined(self) -> list:
        R = self.lattice.refined_per_axis
        S = self.lattice.refined_side(self.level)
        return [(max(lo - S, 0), min(hi + S, R)) for lo, hi in self.unclipped_refined()]

    def refined_slices(self) -> tuple:
        return tuple(slice(lo, hi) for lo, hi in self.refined_bounds())

    def cell_slices(self) -> tuple:
        return tuple(slice(lo, hi) for lo, hi in self.cell_bounds())

    def refined_mask(self) -> np.ndarray:
        m = np.zeros((self.lattice.refined_per_axis,) * self.n, dtype=bool)
        m[self.refined_slices()] = True
        return m

    def cell_indices(self) -> np.ndarray:
        """Flat indices of the level-d cells whose centers lie in the cube."""
        N = self.lattice.cells_per_axis
        axes = []
        for lo, hi in self.refined_bounds():
            i = np.arange(N)
            mid = 3 * i + 1
            axes.append(i[(mid >= lo) & (mid < hi)])
        grids = np.meshgrid(*axes, indexing="ij")
        return np.ravel_multi_index(tuple(g.ravel() for g in grids), (N,) * self.n)

    def children(self) -> list:
        if self.level >= self.lattice.depth:
            return []
        out = []
        for off in itertools.product((0, 1), repeat=self.n):
            c = Cube(self.lattice, self.level + 1,
                     tuple(2 * j + o for j, o in zip(self.index, off)))
            if self.lattice.contains(c):
                out.append(c)
        return out

    def parent(self) -> Optional["Cube"]:
        if self.level == 0:
            return None
        return Cube(self.lattice, self.level - 1, tuple(j // 2 for j in self.index))

    def contains_refined_box(self, bounds: Sequence[tuple]) -> bool:
        own = self.refined_bounds()
        return all(a >= lo and b <= hi for (a, b), (lo, hi) in zip(bounds, own))

    def key(self) -> tuple:
        return (self.lattice.lattice_id, self.level, self.index)

    def to_json(self) -> dict:
        return {"lattice": self.lattice.lattice_id, "level": self.level,
                "index": list(self.index)}

    def __repr__(self):
        flag = ",clipped" if self.clipped else ""
        return f"Cube(L{self.lattice.lattice_id},k={self.level},{self.index}{flag})"


def cover_cube(bounds: Sequence[tuple], lattices: Sequence[DyadicLattice]) -> Cube:
    """Smallest cube of any lattice whose clipped extent contains the clipped
    refined box ``bounds``; ties go to the lower lattice id."""
    best = None
    for lat in lattices:
        for k in range(lat.depth, -1, -1):
            S = lat.refined_side(k)
            idx = []
            for ax, (a, b) in enumerate(bounds):
                j = (a - lat.shift_refined[ax]) // S
                idx.append(j)
            P = Cube(lat, k, tuple(idx))
            if lat.contains(P) and P.contains_refined_box(bounds):
                if best is None or P.level > best.level:
                    best = P
                break
    if best is None:
        raise StructuralError("no covering cube found")
    return best


def cover_triple(Q: Cube, lattices: Sequence[DyadicLattice]) -> Cube:
    """R_Q: a cube of the shifted lattices containing 3Q (within the box)."""
    return cover_cube(Q.triple_refined(), lattices)


# -- vectorised level scans ----------------------------------------------------

def level_blocks(lat: DyadicLattice, k: int, arr: np.ndarray, fill=0.0):
    """Rearrange refined-grid data into one row per level-k cube.

    Returns ``(rows, mask)`` of shape ``(ncubes, cells_per_cube)``; row order is
    the C-order of cube indices, ``mask`` marks cells inside the box.
    """
    n, R, S = lat.n, lat.refined_per_axis, lat.refined_side(k)
    pads, shape = [], []
    for ax in range(n):
        jlo, jhi = lat.index_range(k, ax)
        start = lat.shift_refined[ax] + jlo * S
        stop = lat.shift_refined[ax] + (jhi + 1) * S
        pads.append((-start, stop - R))
        shape += [jhi - jlo + 1, S]
    rows = np.pad(arr, pads, constant_values=fill).reshape(shape)
    mask = np.pad(np.ones(arr.shape, dtype=bool), pads).reshape(shape)
    order = list(range(0, 2 * n, 2)) + list(range(1, 2 * n, 2))
    ncubes = math.prod(shape[0::2])
    rows = rows.transpose(order).reshape(ncubes, S ** n)
    mask = mask.transpose(order).reshape(ncubes, S ** n)
    return rows, mask


def spread_level(lat: DyadicLattice, k: int, per_cube: np.ndarray) -> np.ndarray:
    """Inverse of ``level_blocks`` for one value per cube: refined-grid array."""
    n, R, S = lat.n, lat.refined_per_axis, lat.refined_side(k)
    shape = lat.level_shape(k)
    out = np.asarray(per_cube).reshape(shape)
    for ax in range(n):
        out = np.repeat(out, S, axis=ax)
    sl = []
    for ax in range(n):
        jlo, _ = lat.index_range(k, ax)
        start = -(lat.shift_refined[ax] + jlo * S)
        sl.append(slice(start, start + R))
    return out[tuple(sl)]


def level_cube(lat: DyadicLattice, k: int, row: int) -> Cube:
    shape = lat.level_shape(k)
    rel = np.unravel_index(row, shape)
    return Cube(lat, k, tuple(int(r) + lat.index_range(k, ax)[0] for ax, r in enumerate(rel)))


def centers_of(refined: np.ndarray) -> np.ndarray:
    """Sample a refined-grid array at the middle subcell of each level-d cell."""
    sl = tuple(slice(1, None, 3) for _ in range(refined.ndim))
    return refined[sl]


# -- sparse families -----------------------------------------------------------

@dataclass
class SparseFamily:
    cubes: list
    alpha: float = 0.5
    # flat level-d cell indices per cube, sorted
    witnesses: list = field(default_factory=list)

    def __len__(self):
        return len(self.cubes)

    @property
    def lattice(self) -> DyadicLattice:
        if not self.cubes:
            raise StructuralError("empty family has no lattice")
        return self.cubes[0].lattice


@dataclass
class SparsityResult:
    ok: bool
    worst_cube: Optional[Cube]
    worst_ratio: float
    disjoint: bool = True


def sparsity_check(fam: SparseFamily) -> SparsityResult:
    if not fam.cubes:
        return SparsityResult(True, None, 1.0)
    if len(fam.witnesses) != len(fam.cubes):
        raise StructuralError("every cube needs a witness set")
    lat = fam.lattice
    seen = np.zeros(lat.cells_per_axis ** lat.n, dtype=bool)
    worst, worst_ratio, disjoint = None, math.inf, True
    for Q, w in zip(fam.cubes, fam.witnesses):
        if not lat.contains(Q):
            raise StructuralError(f"{Q!r} does not belong to the family lattice")
        w = np.asarray(w, dtype=np.int64)
        inside = np.zeros_like(seen)
        inside[_cells_inside(Q)] = True
        if w.size and not inside[w].all():
            raise StructuralError(f"witness of {Q!r} leaves the cube")
        if seen[w].any():
            disjoint = False
            if worst is None:
                worst = Q
        seen[w] = True
        ratio = w.size * lat.cell_volume / Q.measure
        if ratio < worst_ratio:
            worst_ratio = ratio
            if disjoint:
                worst = Q
    ok = disjoint and worst_ratio >= fam.alpha - 1e-12
    return SparsityResult(ok, worst, worst_ratio, disjoint)


def _cells_inside(Q: Cube) -> np.ndarray:
    """Flat indices of level-d cells lying entirely inside Q."""
    N = Q.lattice.cells_per_axis
    axes = []
    for lo, hi in Q.refined_bounds():
        i = np.arange(N)
        axes.append(i[(3 * i >= lo) & (3 * i + 3 <= hi)])
    grids = np.meshgrid(*axes, indexing="ij")
    return np.ravel_multi_index(tuple(g.ravel() for g in grids), (N,) * Q.n)


def family_to_json(fam: SparseFamily, lattices: Sequence[DyadicLattice]) -> dict:
    return {
        "alpha": fam.alpha,
        "lattices": [lat.to_json() for lat in lattices],
        "cubes": [dict(Q.to_json(), witness_cells=[int(c) for c in w])
                  for Q, w in zip(fam.cubes, fam.witnesses)],
    }


def family_from_json(doc, lattices: Optional[Sequence[DyadicLattice]] = None) -> SparseFamily:
    if isinstance(doc, (str, Path)):
        doc = json.loads(Path(doc).read_text())
    if lattices is None:
        lattices = [DyadicLattice(tuple(tuple(b) for b in L["box"]), L["depth"],
                                  tuple(L["shift"]), L["lattice_id"])
                    for L in doc["lattices"]]
    by_id = {lat.lattice_id: lat for lat in lattices}
    cubes, wit = [], []
    for c in doc["cubes"]:
        if c["lattice"] not in by_id:
            raise StructuralError(f"unknown lattice id {c['lattice']}")
        cubes.append(Cube(by_id[c["lattice"]], c["level"], tuple(c["index"])))
        wit.append(np.asarray(c["witness_cells"], dtype=np.int64))
    return SparseFamily(cubes, doc.get("alpha", 0.5), wit)
