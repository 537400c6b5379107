"""Sparse operators, the stopping-time construction of sparse families, and
pointwise domination of commutators by sums of sparse operators."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import ConstructionError, InvariantViolation, ParameterError, StructuralError
from .field import GridFunction, SymbolVector
from .lattice import (
    Cube,
    DyadicLattice,
    SparseFamily,
    centers_of,
    cover_triple,
    shifted_lattices,
)
from .operators import LinearOp, commutator, grand_maximal_trunc

__all__ = [
    "TauSubset",
    "all_taus",
    "sparse_apply",
    "build_family",
    "FamilyResult",
    "lift_family",
    "domination_ratio",
    "DominationResult",
]

MAX_DOUBLINGS = 40


@dataclass(frozen=True)
class TauSubset:
    """Subset τ of {0, ..., m-1} stored as a bitmask."""

    mask: int
    m: int

    def __post_init__(self):
        if not 0 <= self.mask < 2 ** self.m:
            raise ParameterError(f"tau mask {self.mask} out of range for m={self.m}")

    @property
    def members(self) -> list:
        return [i for i in range(self.m) if self.mask >> i & 1]

    @property
    def complement(self) -> list:
        return [i for i in range(self.m) if not self.mask >> i & 1]

    def label(self) -> str:
        return "{" + ",".join(str(i + 1) for i in self.members) + "}"


def all_taus(m: int) -> list:
    return [TauSubset(k, m) for k in range(2 ** m)]


def _check_lattices(fam: SparseFamily, f: GridFunction, symbols: SymbolVector):
    if fam.cubes and not fam.lattice.same_grid(f.lattice):
        raise StructuralError("family and function live on different grids")
    for b in symbols:
        if not b.lattice.same_grid(f.lattice):
            raise StructuralError("symbol and function live on different grids")


def sparse_apply(fam: SparseFamily, symbols: SymbolVector, tau: TauSubset, alpha: float,
                 f: GridFunction) -> GridFunction:
    """Σ_Q |Q|^{α/n} Π_{i∈τ}|b_i(x) - (b_i)_Q| ⨍_Q Π_{l∉τ}|b_l - (b_l)_Q| |f| χ_Q(x)."""
    if not isinstance(symbols, SymbolVector):
        symbols = SymbolVector(symbols)
    if tau.m != symbols.m:
        raise ParameterError("tau and symbol vector disagree on m")
    n = f.lattice.n
    if not 0 <= alpha < n:
        raise ParameterError(f"alpha must lie in [0, {n})")
    _check_lattices(fam, f, symbols)
    fr = np.abs(f.refined())
    brs = [b.refined() for b in symbols]
    out = np.zeros(fr.shape)
    for Q in fam.cubes:
        sl = Q.refined_slices()
        inner = fr[sl]
        outer = 1.0
        for i, br in enumerate(brs):
            loc = br[sl]
            dev = np.abs(loc - loc.mean())
            if i in tau.members:
                outer = outer * dev
            else:
                inner = inner * dev
        out[sl] += Q.measure ** (alpha / n) * inner.mean() * outer
    return f.with_values(centers_of(out), "signed")


# -- stopping-time construction ----------------------------------------------------

@dataclass
class FamilyResult:
    family: SparseFamily
    per_level_log: list                       # dicts: level, cube_count, mass_fraction, C_height
    C_height: float                           # largest C used by any cube
    e_mass: list = field(default_factory=list)   # |E| / |Q| per processed cube
    doublings: int = 0

    @property
    def max_e_mass(self) -> float:
        return max(self.e_mass, default=0.0)


def _restrict(values: np.ndarray, bounds) -> np.ndarray:
    out = np.zeros_like(values)
    sl = tuple(slice(a, b) for a, b in bounds)
    out[sl] = values[sl]
    return out


def _select_maximal(E: np.ndarray, Q0: Cube, height: float) -> list:
    """Maximal dyadic P ⊊ Q₀ with ⨍_P χ_E > height (top-down stopping time)."""
    chosen = []
    stack = Q0.children()
    while stack:
        P = stack.pop(0)
        avg = float(E[P.cell_slices()].mean())
        if avg > height:
            chosen.append(P)
        elif avg > 0:
            stack.extend(P.children())
    chosen.sort(key=lambda c: (c.level, c.index))
    return chosen


def build_family(op: LinearOp, symbols: SymbolVector, f: GridFunction, Q0: Optional[Cube] = None,
                 C_height: float = 1.0, alpha: Optional[float] = None) -> FamilyResult:
    """1/2-sparse family on the base lattice from the stopping-time recursion.

    For each cube Q (starting with Q₀, f restricted to 3Q), with
    g_τ = Π_{l∉τ}|b_l - (b_l)_{R_Q}| |f χ_{3Q}|, the exceptional set is
    E = ∪_τ {x ∈ Q : 𝓜_{Q} g_τ(x) > C |3Q|^{α/n} ⨍_{3Q} g_τ}, 𝓜_Q being the local
    grand maximal truncation of ``op``.  For every cube C starts at
    ``C_height`` and doubles until |E| <= |Q|/2^{n+2}; the largest C used is
    reported.  The children are the maximal dyadic P ⊊ Q where χ_E has
    average above 2^{-(n+1)}.  Cubes at the finest level are leaves.
    """
    if not isinstance(symbols, SymbolVector):
        symbols = SymbolVector(symbols)
    lat = f.lattice
    n = lat.n
    if alpha is None:
        alpha = op.alpha if op.family == "potential" else 0.0
    Q0 = lat.root() if Q0 is None else Q0
    if not Q0.lattice.is_base:
        raise StructuralError("the construction runs on the base lattice")
    lattices = shifted_lattices(lat)
    taus = all_taus(symbols.m)
    C_max = float(C_height)
    doublings = 0
    cubes, witnesses, e_mass = [], [], []
    generation = [Q0]
    log = []
    gen_idx = 0
    total = Q0.measure
    N = lat.cells_per_axis
    while generation:
        gen_C = float(C_height)
        nxt = []
        for Q in generation:
            children = []
            if Q.level < lat.depth:
                children, C, used, frac = _process_cube(op, symbols, f, Q, float(C_height),
                                                        taus, lattices, alpha)
                doublings += used
                e_mass.append(frac)
                gen_C = max(gen_C, C)
            mass = sum(P.measure for P in children)
            if mass >= Q.measure / 2:
                raise InvariantViolation(
                    f"selected cubes carry {mass / Q.measure:.4f} of {Q!r}, not < 1/2")
            own = np.zeros((N,) * n, dtype=bool)
            own[Q.cell_slices()] = True
            for P in children:
                own[P.cell_slices()] = False
            cubes.append(Q)
            witnesses.append(np.flatnonzero(own))
            nxt.extend(children)
        log.append({"level": gen_idx, "cube_count": len(generation),
                    "mass_fraction": sum(Q.measure for Q in generation) / total,
                    "C_height": gen_C})
        C_max = max(C_max, gen_C)
        generation = nxt
        gen_idx += 1
    fam = SparseFamily(cubes, 0.5, witnesses)
    return FamilyResult(fam, log, C_max, e_mass, doublings)


def _process_cube(op, symbols, f, Q, C, taus, lattices, alpha):
    lat = f.lattice
    n = lat.n
    trip = Q.triple_cell_bounds()
    fa = _restrict(np.abs(f.values), trip)
    if not fa.any():
        return [], C, 0, 0.0
    R = cover_triple(Q, lattices)
    rsl = R.refined_slices()
    trip_sl = tuple(slice(a, b) for a, b in trip)
    trip_measure = math.prod(b - a for a, b in trip) * lat.cell_volume
    maxs, thresholds = [], []
    for tau in taus:
        g = fa.copy()
        for l in tau.complement:
            b = symbols[l]
            g = g * np.abs(b.values - float(b.refined()[rsl].mean()))
        thresholds.append(trip_measure ** (alpha / n) * float(g[trip_sl].mean()))
        M = grand_maximal_trunc(f.with_values(g), alpha, Q, op=op)
        maxs.append(M.values[Q.cell_slices()])
    used = 0
    limit = Q.measure / 2 ** (n + 2)
    while True:
        E = np.zeros(maxs[0].shape, dtype=bool)
        for M, t in zip(maxs, thresholds):
            E |= M > C * t
        frac = float(E.mean())
        if frac * Q.measure <= limit:
            break
        if used >= MAX_DOUBLINGS:
            raise ConstructionError(
                f"|E|/|Q| = {frac:.4g} still above 2^-(n+2) after {MAX_DOUBLINGS} doublings", frac)
        C *= 2.0
        used += 1
    full = np.zeros((lat.cells_per_axis,) * n)
    full[Q.cell_slices()] = E
    return _select_maximal(full, Q, 2.0 ** -(n + 1)), C, used, frac


# -- lifting and domination -------------------------------------------------------

def lift_family(fam: SparseFamily, lattices: Optional[Sequence[DyadicLattice]] = None) -> list:
    """Replace each Q by its cover R_Q ⊇ 3Q; one family per shifted lattice.

    Witnesses carry over (E_Q ⊆ Q ⊆ R_Q); cubes hit twice merge their witnesses.
    """
    if not fam.cubes:
        return []
    base = fam.lattice
    lattices = shifted_lattices(base) if lattices is None else list(lattices)
    per = {lat.lattice_id: {} for lat in lattices}
    for Q, w in zip(fam.cubes, fam.witnesses):
        R = cover_triple(Q, lattices)
        bucket = per[R.lattice.lattice_id]
        bucket.setdefault(R, []).append(np.asarray(w))
    out = []
    n = base.n
    for lat in lattices:
        bucket = per[lat.lattice_id]
        if not bucket:
            continue
        keys = sorted(bucket, key=lambda c: (c.level, c.index))
        wits = [np.sort(np.concatenate(bucket[k])) for k in keys]
        out.append(SparseFamily(keys, fam.alpha / 9 ** n, wits))
    return out


@dataclass
class DominationResult:
    sup_ratio: float
    worst_cell: Optional[tuple]
    lhs: np.ndarray
    rhs: np.ndarray


def domination_ratio(op: LinearOp, symbols: SymbolVector, f: GridFunction,
                     families: Sequence[SparseFamily], alpha: Optional[float] = None,
                     mask: Optional[np.ndarray] = None) -> DominationResult:
    """sup_x |L_b f(x)| / Σ_families Σ_τ T^{α,τ} |f|(x), with 0/0 read as 0."""
    if not isinstance(symbols, SymbolVector):
        symbols = SymbolVector(symbols)
    if alpha is None:
        alpha = op.alpha if op.family == "potential" else 0.0
    lhs = np.abs(commutator(op, symbols, f).values)
    rhs = np.zeros_like(lhs)
    fa = f.abs()
    for fam in families:
        for tau in all_taus(symbols.m):
            rhs += sparse_apply(fam, symbols, tau, alpha, fa).values
    if mask is not None:
        lhs = np.where(mask, lhs, 0.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(lhs == 0, 0.0, lhs / rhs)
    if not ratio.size or ratio.max() == 0:
        return DominationResult(0.0, None, lhs, rhs)
    k = int(np.argmax(ratio))
    return DominationResult(float(ratio.flat[k]), tuple(int(i) for i in np.unravel_index(k, ratio.shape)), lhs, rhs)
