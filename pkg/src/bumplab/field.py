"""Piecewise-constant functions and weights on the finest cells of a lattice."""

from __future__ import annotations

import csv
import functools
import json
import math
import re
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
from scipy.special import roots_legendre

from .errors import DegenerateCubeError, DomainError, ParameterError, StructuralError
from .lattice import (
    Cube,
    DyadicLattice,
    build_lattice,
    level_blocks,
    shifted_lattices,
)
from .young import YoungFunction, inverse

__all__ = [
    "GridFunction",
    "SymbolVector",
    "average",
    "luxemburg_norm",
    "luxemburg_rows",
    "bmo_norm",
    "oscillation_sup",
    "sample",
    "parse_sample",
    "save_grid_function",
    "load_grid_function",
]

WEIGHT_FLOOR = 1e-12
LUX_RTOL = 1e-10
MAX_SYMBOLS = 8


class GridFunction:
    """Cell values on the level-d cells of a base lattice (shape ``(2**d,)*n``)."""

    def __init__(self, lattice: DyadicLattice, values, kind: str = "signed"):
        if kind not in ("signed", "weight"):
            raise ParameterError(f"unknown grid function kind {kind!r}")
        lattice = lattice.base()
        v = np.array(values, dtype=float)
        shape = (lattice.cells_per_axis,) * lattice.n
        if v.size != math.prod(shape):
            raise StructuralError(f"expected {math.prod(shape)} values, got {v.size}")
        v = v.reshape(shape)
        if not np.all(np.isfinite(v)):
            raise DomainError("grid function values must be finite")
        if kind == "weight":
            v = np.maximum(v, WEIGHT_FLOOR)
        v.setflags(write=False)
        self.lattice = lattice
        self.values = v
        self.kind = kind
        self._refined = None

    def refined(self) -> np.ndarray:
        """Values on the refined grid (each cell split into 3 per axis)."""
        if self._refined is None:
            r = self.values
            for ax in range(self.lattice.n):
                r = np.repeat(r, 3, axis=ax)
            r.setflags(write=False)
            self._refined = r
        return self._refined

    def with_values(self, values, kind: Optional[str] = None) -> "GridFunction":
        return GridFunction(self.lattice, values, kind or self.kind)

    def map(self, fn, kind: Optional[str] = None) -> "GridFunction":
        return self.with_values(fn(self.values), kind)

    def __mul__(self, other):
        o = other.values if isinstance(other, GridFunction) else other
        return GridFunction(self.lattice, self.values * o)

    __rmul__ = __mul__

    def __add__(self, other):
        o = other.values if isinstance(other, GridFunction) else other
        return GridFunction(self.lattice, self.values + o)

    def __sub__(self, other):
        o = other.values if isinstance(other, GridFunction) else other
        return GridFunction(self.lattice, self.values - o)

    def __neg__(self):
        return GridFunction(self.lattice, -self.values)

    def abs(self) -> "GridFunction":
        return GridFunction(self.lattice, np.abs(self.values))

    def lp_norm(self, p: float, weight: Optional["GridFunction"] = None) -> float:
        """(∫ |f|^p w)^{1/p} over the box."""
        w = 1.0 if weight is None else weight.values
        s = float(np.sum(np.abs(self.values) ** p * w)) * self.lattice.cell_volume
        return s ** (1.0 / p)

    def __repr__(self):
        return f"GridFunction(n={self.lattice.n}, d={self.lattice.depth}, kind={self.kind})"


class SymbolVector:
    """Symbols (b_1, ..., b_m) on one lattice; m = 0 is the empty product."""

    def __init__(self, symbols: Sequence[GridFunction] = ()):
        symbols = list(symbols)
        if len(symbols) > MAX_SYMBOLS:
            raise ParameterError(f"at most {MAX_SYMBOLS} symbols")
        for b in symbols[1:]:
            if not b.lattice.same_grid(symbols[0].lattice):
                raise StructuralError("symbols live on different lattices")
        self.symbols = symbols

    @classmethod
    def repeat(cls, b: GridFunction, m: int) -> "SymbolVector":
        return cls([b] * m)

    @property
    def m(self) -> int:
        return len(self.symbols)

    def __iter__(self):
        return iter(self.symbols)

    def __getitem__(self, i):
        return self.symbols[i]

    def __len__(self):
        return len(self.symbols)


def _check_same(f: GridFunction, Q: Cube):
    if not f.lattice.same_grid(Q.lattice):
        raise StructuralError("cube and function live on different grids")


def _cube_data(f: GridFunction, Q: Cube) -> np.ndarray:
    _check_same(f, Q)
    if Q.aligned:
        return f.values[Q.cell_slices()]
    return f.refined()[Q.refined_slices()]


def average(f: GridFunction, Q: Cube) -> float:
    """Measure-weighted mean of f over the (clipped) cube."""
    data = _cube_data(f, Q)
    if data.size == 0:
        raise DegenerateCubeError(f"{Q!r} is empty")
    return float(np.mean(data))


@functools.lru_cache(maxsize=256)
def _inv_one(yf: YoungFunction) -> float:
    return inverse(yf, 1.0)


def luxemburg_rows(rows: np.ndarray, mask: Optional[np.ndarray], yf: YoungFunction,
                   rtol: float = LUX_RTOL) -> np.ndarray:
    """Luxemburg averages ||f||_{A,Q} for many cubes at once.

    ``rows[i]`` holds |f| on cube i (padding marked False in ``mask``).  The
    bracket [mean, max] / A^{-1}(1) follows from Jensen and monotonicity; the
    geometric bisection stops once hi/lo - 1 < rtol.
    """
    x = np.abs(np.asarray(rows, dtype=float))
    if mask is None:
        mask = np.ones(x.shape, dtype=bool)
    x = np.where(mask, x, 0.0)
    counts = mask.sum(axis=1)
    if np.any(counts == 0):
        raise DegenerateCubeError("empty cube in Luxemburg batch")
    c1 = _inv_one(yf)
    top = x.max(axis=1)
    out = np.zeros(x.shape[0])
    live = top > 0
    # homogeneity: bisect on rows scaled to max 1, so a tiny mean cannot underflow to 0
    top, ms, cs = top[live], mask[live], counts[live]
    xs = x[live] / top[:, None]
    lo = xs.sum(axis=1) / cs / c1
    hi = np.full(lo.shape, 1.0 / c1)
    # a mean below 1 at lo only happens through rounding; widen slightly
    lo = lo * (1 - 1e-12)
    hi = hi * (1 + 1e-12)
    with np.errstate(over="ignore", invalid="ignore"):
        while True:
            todo = hi / lo - 1.0 > rtol
            if not todo.any():
                break
            mid = np.sqrt(lo * hi)
            idx = np.nonzero(todo)[0]
            vals = yf.eval_array(xs[idx] / mid[idx, None], saturate=True)
            vals = np.where(ms[idx], vals, 0.0)
            mean = vals.sum(axis=1) / cs[idx]
            big = mean > 1.0
            lo[idx] = np.where(big, mid[idx], lo[idx])
            hi[idx] = np.where(big, hi[idx], mid[idx])
    out[live] = np.sqrt(lo * hi) * top
    return out


def luxemburg_norm(f: GridFunction, yf: YoungFunction, Q: Cube) -> float:
    """inf{λ > 0 : mean over Q of A(|f|/λ) <= 1}."""
    data = _cube_data(f, Q).ravel()
    if data.size == 0:
        raise DegenerateCubeError(f"{Q!r} is empty")
    return float(luxemburg_rows(data[None, :], None, yf)[0])


def _all_lattices(f: GridFunction, lattices) -> list:
    if lattices is None:
        return [f.lattice]
    if lattices == "shifted":
        return shifted_lattices(f.lattice)
    return list(lattices)


def bmo_norm(b: GridFunction, lattices=None) -> float:
    """sup over all cubes of the given lattices of the mean oscillation."""
    best = 0.0
    r = b.refined()
    for lat in _all_lattices(b, lattices):
        for k in range(lat.depth + 1):
            rows, mask = level_blocks(lat, k, r)
            cnt = mask.sum(axis=1)
            mean = rows.sum(axis=1) / cnt
            osc = (np.abs(rows - mean[:, None]) * mask).sum(axis=1) / cnt
            best = max(best, float(osc.max()))
    return best


def oscillation_sup(b: GridFunction, yf: YoungFunction, lattices=None) -> float:
    """sup over cubes of ||b - b_Q||_{A,Q} (exp-L oscillation when A = e^t - 1)."""
    best = 0.0
    r = b.refined()
    for lat in _all_lattices(b, lattices):
        for k in range(lat.depth + 1):
            rows, mask = level_blocks(lat, k, r)
            cnt = mask.sum(axis=1)
            mean = rows.sum(axis=1) / cnt
            dev = np.abs(rows - mean[:, None])
            best = max(best, float(luxemburg_rows(dev, mask, yf).max()))
    return best


# -- sample library --------------------------------------------------------------

_GAUSS = 6


def _cell_average(lat: DyadicLattice, fn, order: int = _GAUSS) -> np.ndarray:
    """Cell averages of a smooth function by tensor Gauss-Legendre."""
    x, w = roots_legendre(order)
    h = lat.cell_side
    left = lat.box[0][0] + np.arange(lat.cells_per_axis) * h
    pts = (left[:, None] + h * (x[None, :] + 1) / 2).ravel()
    w = w / 2
    n = lat.n
    grids = np.meshgrid(*([pts] * n), indexing="ij")
    vals = fn(np.stack(grids, axis=-1))
    N = lat.cells_per_axis
    vals = vals.reshape(sum(((N, order) for _ in range(n)), ()))
    for ax in range(n):
        vals = np.tensordot(vals, w, axes=([ax + 1], [0]))
    return vals


def _radius(points: np.ndarray, center) -> np.ndarray:
    c = np.broadcast_to(np.asarray(center, dtype=float), (points.shape[-1],))
    return np.sqrt(np.sum((points - c) ** 2, axis=-1))


def _edges(lat: DyadicLattice) -> np.ndarray:
    return lat.box[0][0] + np.arange(lat.cells_per_axis + 1) * lat.cell_side


def _indicator(lat, params):
    lo = params.get("a", -1.0)
    hi = params.get("b", 1.0)
    e = _edges(lat)
    frac = np.clip(np.minimum(e[1:], hi) - np.maximum(e[:-1], lo), 0, None) / lat.cell_side
    out = frac
    for _ in range(lat.n - 1):
        out = np.multiply.outer(out, frac)
    return params.get("c", 1.0) * out


def _power_weight(lat, params):
    a = params.get("a", 0.5)
    x0 = params.get("x0", 0.0)
    if lat.n == 1 and a > -1:
        e = _edges(lat) - x0
        F = np.sign(e) * np.abs(e) ** (a + 1) / (a + 1)
        return np.diff(F) / lat.cell_side
    if a > -lat.n:
        # radial singularity: Gauss points never hit it
        return _cell_average(lat, lambda p: _radius(p, x0) ** a, order=10)
    centers = np.stack(np.meshgrid(*([lat.centers()] * lat.n), indexing="ij"), axis=-1)
    return _radius(centers, x0) ** a


def _log_abs(lat, params):
    x0 = params.get("x0", 0.0)
    if lat.n == 1:
        e = _edges(lat) - x0
        with np.errstate(divide="ignore", invalid="ignore"):
            F = np.where(e == 0, 0.0, e * np.log(np.abs(e)) - e)
        return np.diff(F) / lat.cell_side
    return _cell_average(lat, lambda p: np.log(np.maximum(_radius(p, x0), 1e-300)), order=10)


def _smooth_bump(lat, params):
    c = params.get("x0", 0.0)
    r0 = params.get("radius", 1.0)
    h = params.get("height", 1.0)

    def fn(p):
        s = (_radius(p, c) / r0) ** 2
        with np.errstate(divide="ignore", over="ignore"):
            v = np.where(s < 1, np.exp(1.0 - 1.0 / np.maximum(1.0 - s, 1e-300)), 0.0)
        return h * v

    return _cell_average(lat, fn, order=8)


def _gaussian(lat, params):
    c = params.get("x0", 0.0)
    w = params.get("width", 1.0)
    return params.get("height", 1.0) * _cell_average(
        lat, lambda p: np.exp(-_radius(p, c) ** 2 / (2 * w * w)))


def _linear(lat, params):
    slope = params.get("slope", 1.0)
    x0 = params.get("x0", 0.0)
    axis = int(params.get("axis", 0))
    x = lat.centers() - x0
    shape = [1] * lat.n
    shape[axis] = -1
    out = slope * x.reshape(shape)
    return np.broadcast_to(out, (lat.cells_per_axis,) * lat.n) + params.get("c", 0.0)


def _random_piecewise(lat, params, seed):
    rng = np.random.default_rng(seed)
    pieces = int(params.get("pieces", 8))
    N = lat.cells_per_axis
    pieces = max(1, min(pieces, N))
    cuts = np.sort(rng.choice(np.arange(1, N), size=pieces - 1, replace=False)) if pieces > 1 else []
    labels = np.searchsorted(cuts, np.arange(N), side="right")
    vals = rng.normal(params.get("mean", 0.0), params.get("sd", 1.0), size=(pieces,) * lat.n)
    grids = np.meshgrid(*([labels] * lat.n), indexing="ij")
    return vals[tuple(grids)]


SAMPLES = ("constant", "indicator", "smooth_bump", "log_abs", "power_weight",
           "random_piecewise", "gaussian", "linear")


def sample(name: str, params: Optional[dict] = None, lattice: Optional[DyadicLattice] = None,
           seed: int = 0) -> GridFunction:
    """Deterministic member of the test corpus on ``lattice``.

    Values are exact (or Gauss-Legendre) cell averages, not point samples.
    """
    params = dict(params or {})
    if lattice is None:
        lattice = build_lattice([(-8.0, 8.0)], int(params.pop("depth", 10)))
    kind = params.pop("kind", None)
    if name == "constant":
        v = np.full((lattice.cells_per_axis,) * lattice.n, params.get("c", 1.0))
    elif name == "indicator":
        v = _indicator(lattice, params)
    elif name == "smooth_bump":
        v = _smooth_bump(lattice, params)
    elif name == "log_abs":
        v = _log_abs(lattice, params)
    elif name == "power_weight":
        v = _power_weight(lattice, params)
        kind = kind or "weight"
    elif name == "random_piecewise":
        v = _random_piecewise(lattice, params, int(params.get("seed", seed)))
    elif name == "gaussian":
        v = _gaussian(lattice, params)
    elif name == "linear":
        v = _linear(lattice, params)
    else:
        raise ParameterError(f"unknown sample {name!r}; expected one of {SAMPLES}")
    return GridFunction(lattice, v, kind or "signed")


_SAMPLE_RE = re.compile(r"^sample:(\w+)(?:\((.*)\))?$")


def parse_sample(text: str, lattice: DyadicLattice, seed: int = 0) -> GridFunction:
    """``sample:name(k=v,...)`` or a CSV path written by ``save_grid_function``."""
    m = _SAMPLE_RE.match(text.strip())
    if not m:
        return load_grid_function(text, lattice)
    params = {}
    for part in filter(None, (m.group(2) or "").split(",")):
        k, _, v = part.partition("=")
        v = v.strip()
        try:
            params[k.strip()] = float(v)
        except ValueError:
            params[k.strip()] = v
    return sample(m.group(1), params, lattice, seed)


def save_grid_function(f: GridFunction, path) -> None:
    """CSV ``cell_index,value`` plus a JSON header next to it."""
    path = Path(path)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["cell_index", "value"])
        for i, v in enumerate(f.values.ravel()):
            w.writerow([i, f"{v:.17g}"])
    header = {"box": [list(b) for b in f.lattice.box], "depth": f.lattice.depth,
              "kind": f.kind}
    path.with_suffix(".json").write_text(json.dumps(header, sort_keys=True) + "\n")


def load_grid_function(path, lattice: Optional[DyadicLattice] = None) -> GridFunction:
    path = Path(path)
    header = json.loads(path.with_suffix(".json").read_text())
    lat = build_lattice([tuple(b) for b in header["box"]], header["depth"])
    if lattice is not None and not lat.same_grid(lattice):
        raise StructuralError(f"{path} lives on a different grid")
    vals = np.zeros(lat.cells_per_axis ** lat.n)
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            vals[int(row["cell_index"])] = float(row["value"])
    return GridFunction(lat, vals, header.get("kind", "signed"))

