"""Maximal operators, fractional integrals, model singular integrals and
iterated commutators on piecewise-constant data.

Every linear operator here is translation invariant, so it is stored as a
table of cell integrals ``kappa[o] = ∫_{cell o} K(x_0 - y) dy`` indexed by
the offset ``o = i - j`` between target and source cells; applying it is a
direct (non-FFT) discrete convolution.
"""

from __future__ import annotations

import functools
import itertools
import math
import re
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import integrate, signal
from scipy.special import roots_legendre

from .errors import ParameterError, StructuralError
from .field import GridFunction, SymbolVector, luxemburg_rows
from .lattice import Cube, DyadicLattice, centers_of, level_blocks, shifted_lattices, spread_level
from .young import YoungFunction

__all__ = [
    "Kernel",
    "LinearOp",
    "hilbert",
    "riesz_transform",
    "potential",
    "identity",
    "maximal",
    "riesz_potential",
    "cz_apply",
    "maximal_truncation",
    "grand_maximal_trunc",
    "commutator",
    "mixed_commutator",
    "ramp",
    "parse_op",
    "TRUNCATE_BOUND_C",
]

# |T^eta f| <= T# f + 12 M f: the ramp region lies in an interval of length
# 4 eta, which some shifted-lattice cube of side < 12 eta contains.
TRUNCATE_BOUND_C = 12.0
ROW_BLOCK = 256


def ramp(s):
    """Cubic smoothstep: 0 on [0,1], 1 on [2,inf), C^1 in between."""
    u = np.clip(np.asarray(s, dtype=float) - 1.0, 0.0, 1.0)
    return u * u * (3.0 - 2.0 * u)


def ramp_slope_max() -> float:
    return 1.5


@dataclass(frozen=True)
class Kernel:
    """Model kernel K(x, y) = k(x - y).

    ``kind`` is ``hilbert`` (n = 1), ``riesz_j`` (component ``j``) or
    ``custom`` (``fn`` maps offsets of shape (..., n) to kernel values).
    """

    kind: str
    n: int = 1
    j: int = 0
    c_size: float = 1.0
    c_smooth: float = 1.0
    odd: bool = True
    fn: Optional[Callable] = None

    def value(self, t: np.ndarray) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        if self.kind == "hilbert":
            return 1.0 / t[..., 0]
        if self.kind == "riesz_j":
            r = np.sqrt(np.sum(t * t, axis=-1))
            return t[..., self.j] / r ** (self.n + 1)
        return self.fn(t)

    def gradient_norm(self, t: np.ndarray) -> np.ndarray:
        """|∇_x K(x, y)| at offset t = x - y."""
        t = np.asarray(t, dtype=float)
        if self.kind == "hilbert":
            return 1.0 / t[..., 0] ** 2
        if self.kind == "riesz_j":
            r2 = np.sum(t * t, axis=-1)
            r = np.sqrt(r2)
            grad = -(self.n + 1) * t[..., self.j, None] * t / r[..., None] ** (self.n + 3)
            grad[..., self.j] += 1.0 / r ** (self.n + 1)
            return np.sqrt(np.sum(grad * grad, axis=-1))
        # custom: central differences
        h = 1e-6 * np.maximum(np.sqrt(np.sum(t * t, axis=-1)), 1e-12)
        g = []
        for ax in range(self.n):
            e = np.zeros(self.n)
            e[ax] = 1.0
            g.append((self.fn(t + h[..., None] * e) - self.fn(t - h[..., None] * e)) / (2 * h))
        return np.sqrt(sum(x * x for x in g))


def hilbert_kernel() -> Kernel:
    return Kernel("hilbert", 1, 0, 1.0, 1.0, True)


def riesz_kernel(n: int, j: int) -> Kernel:
    if not 0 <= j < n:
        raise ParameterError("component index out of range")
    # |∇(t_j/|t|^{n+1})| peaks at n/|t|^{n+1} along e_j
    return Kernel("riesz_j", n, j, 1.0, float(n), True)


@dataclass(frozen=True)
class LinearOp:
    """Translation-invariant operator: a CZ kernel or the Riesz potential I_α.

    ``mode`` is ``pv``, ``truncated`` or ``smooth``; ``eta`` is in ambient
    units.  ``identity`` is the trivial operator.
    """

    family: str                      # "cz" | "potential" | "identity"
    kernel: Optional[Kernel] = None
    alpha: float = 0.0
    mode: str = "pv"
    eta: float = 0.0

    @property
    def label(self) -> str:
        if self.family == "identity":
            return "identity"
        base = (f"riesz(alpha={self.alpha:g})" if self.family == "potential"
                else self.kernel.kind + (f"{self.kernel.j}" if self.kernel.kind == "riesz_j" else ""))
        if self.mode == "pv":
            return base
        return f"{base}.{self.mode}(eta={self.eta:g})"

    def with_mode(self, mode: str, eta: float = 0.0) -> "LinearOp":
        return LinearOp(self.family, self.kernel, self.alpha, mode, eta)

    def order(self, n: int) -> float:
        """Exponent s with |k(t)| ~ |t|^{-s}."""
        return n - self.alpha if self.family == "potential" else float(n)

    def check(self, lat: DyadicLattice):
        if self.family == "potential" and not 0 < self.alpha < lat.n:
            raise ParameterError(f"alpha must lie in (0, {lat.n})")
        if self.family == "cz" and self.kernel.n != lat.n:
            raise StructuralError("kernel dimension does not match the lattice")
        if self.mode in ("truncated", "smooth") and self.eta < 2 * lat.cell_side * (1 - 1e-12):
            raise ParameterError(f"eta={self.eta:g} below resolution 2*cell={2 * lat.cell_side:g}")
        if self.mode not in ("pv", "truncated", "smooth"):
            raise ParameterError(f"unknown mode {self.mode!r}")

    def table(self, lat: DyadicLattice) -> np.ndarray:
        self.check(lat)
        return _offset_table(self, lat.n, lat.cells_per_axis, lat.cell_side)

    def apply(self, f: GridFunction) -> GridFunction:
        if self.family == "identity":
            return f.with_values(f.values, "signed")
        return f.with_values(convolve_table(self.table(f.lattice), f.values), "signed")


def hilbert(mode: str = "pv", eta: float = 0.0) -> LinearOp:
    return LinearOp("cz", hilbert_kernel(), 0.0, mode, eta)


def riesz_transform(n: int, j: int, mode: str = "pv", eta: float = 0.0) -> LinearOp:
    return LinearOp("cz", riesz_kernel(n, j), 0.0, mode, eta)


def potential(alpha: float, mode: str = "pv", eta: float = 0.0) -> LinearOp:
    return LinearOp("potential", None, float(alpha), mode, eta)


def identity() -> LinearOp:
    return LinearOp("identity")


# -- offset tables ---------------------------------------------------------------

def _pieces(a: float, b: float, eta: float, mode: str):
    """Split [a, b] at the truncation breakpoints; yield (lo, hi, weight kind)."""
    cuts = [a, b]
    if mode != "pv":
        cuts += [c for c in (-2 * eta, -eta, eta, 2 * eta) if a < c < b]
    cuts = sorted(cuts)
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        mid = abs(0.5 * (lo + hi))
        if mode == "pv" or mid >= (2 * eta if mode == "smooth" else eta):
            yield lo, hi, "full"
        elif mode == "smooth" and mid > eta:
            yield lo, hi, "ramp"


def _table_1d(op: LinearOp, N: int, h: float) -> np.ndarray:
    o = np.arange(-(N - 1), N)
    a = (o - 0.5) * h
    b = (o + 0.5) * h
    if op.family == "potential":
        al = op.alpha

        def F(t):
            return np.sign(t) * np.abs(t) ** al / al

        def k(t):
            return np.abs(t) ** (al - 1.0)
    elif op.kernel.kind == "hilbert":
        def F(t):
            return np.log(np.abs(t))

        def k(t):
            return 1.0 / t
    else:
        return _table_custom_1d(op, N, h)
    x, w = roots_legendre(24)
    out = np.zeros(o.size)
    for idx in range(o.size):
        if op.family == "cz" and o[idx] == 0 and op.mode == "pv":
            continue                      # symmetric principal value of an odd kernel
        total = 0.0
        for lo, hi, kind in _pieces(a[idx], b[idx], op.eta, op.mode):
            if kind == "full":
                total += F(hi) - F(lo)
            else:
                t = 0.5 * (hi - lo) * x + 0.5 * (hi + lo)
                total += 0.5 * (hi - lo) * float(np.sum(w * k(t) * ramp(np.abs(t) / op.eta)))
        out[idx] = total
    return out


def _table_custom_1d(op: LinearOp, N: int, h: float) -> np.ndarray:
    x, w = roots_legendre(24)
    kern = op.kernel
    out = np.zeros(2 * N - 1)
    for idx, o in enumerate(range(-(N - 1), N)):
        a, b = (o - 0.5) * h, (o + 0.5) * h
        segs = [(a, b)]
        if o == 0:
            if kern.odd and op.mode == "pv":
                continue
            # exclude the symmetric core |t| < cell/16
            segs = [(a, -h / 16), (h / 16, b)]
        total = 0.0
        for lo, hi in segs:
            t = 0.5 * (hi - lo) * x + 0.5 * (hi + lo)
            wt = np.ones_like(t)
            if op.mode == "truncated":
                wt = (np.abs(t) > op.eta).astype(float)
            elif op.mode == "smooth":
                wt = ramp(np.abs(t) / op.eta)
            total += 0.5 * (hi - lo) * float(np.sum(w * kern.value(t[:, None]) * wt))
        out[idx] = total
    return out


def _potential_self_cell_2d(alpha: float, h: float) -> float:
    # ∫_{[-h/2,h/2]^2} |t|^{alpha-2} dt in polar coordinates
    theta, _ = integrate.quad(lambda th: math.cos(th) ** (-alpha), 0.0, math.pi / 4)
    return 8.0 / alpha * (h / 2) ** alpha * theta


def _table_nd(op: LinearOp, n: int, N: int, h: float) -> np.ndarray:
    o = np.arange(-(N - 1), N)
    grids = np.meshgrid(*([o] * n), indexing="ij")
    offs = np.stack(grids, axis=-1).reshape(-1, n).astype(float)
    cheb = np.max(np.abs(offs), axis=1)

    if op.family == "potential":
        def k(t):
            return np.sqrt(np.sum(t * t, axis=-1)) ** (op.alpha - n)
    else:
        k = op.kernel.value

    def weight(t):
        if op.mode == "pv":
            return 1.0
        r = np.sqrt(np.sum(t * t, axis=-1))
        if op.mode == "truncated":
            return (r > op.eta).astype(float)
        return ramp(r / op.eta)

    def integrate_cells(centers, sub, order):
        # tensor Gauss-Legendre on sub^n subcells of each cell
        x, w = roots_legendre(order)
        nodes = ((np.arange(sub)[:, None] + (x[None, :] + 1) / 2) / sub - 0.5).ravel()
        wts = np.tile(w / 2 / sub, sub)
        pts = np.stack(np.meshgrid(*([nodes] * n), indexing="ij"), axis=-1).reshape(-1, n)
        pw = np.prod(np.stack(np.meshgrid(*([wts] * n), indexing="ij"), axis=-1).reshape(-1, n), axis=1)
        res = np.empty(len(centers))
        for s in range(0, len(centers), 2048):
            c = centers[s:s + 2048]
            t = (c[:, None, :] + pts[None, :, :]) * h
            res[s:s + 2048] = np.sum(k(t) * weight(t) * pw[None, :], axis=1) * h ** n
        return res

    out = np.zeros(len(offs))
    far = cheb > 2
    if op.mode != "pv":
        # cells cut by the truncation annulus need more nodes
        rmin = np.sqrt(np.sum(np.maximum(np.abs(offs) - 0.5, 0) ** 2, axis=1)) * h
        rmax = np.sqrt(np.sum((np.abs(offs) + 0.5) ** 2, axis=1)) * h
        cut = far & (rmin < 2 * op.eta) & (rmax > op.eta)
        out[cut] = integrate_cells(offs[cut], 4, 6)
        far &= ~cut
    out[far] = integrate_cells(offs[far], 1, 4)
    near = (cheb <= 2) & (cheb > 0)
    out[near] = integrate_cells(offs[near], 8, 6)
    self_idx = np.nonzero(cheb == 0)[0][0]
    if op.family == "potential" and op.mode == "pv":
        out[self_idx] = _potential_self_cell_2d(op.alpha, h) if n == 2 else integrate_cells(
            offs[cheb == 0], 32, 6)[0]
    elif op.mode == "pv":
        out[self_idx] = 0.0              # odd kernel: symmetric principal value
    else:
        out[self_idx] = 0.0              # eta >= 2 cells: whole cell inside the core
    return out.reshape((2 * N - 1,) * n)


@functools.lru_cache(maxsize=64)
def _offset_table(op: LinearOp, n: int, N: int, h: float) -> np.ndarray:
    tab = _table_1d(op, N, h) if n == 1 else _table_nd(op, n, N, h)
    tab.setflags(write=False)
    return tab


def convolve_table(kappa: np.ndarray, values: np.ndarray) -> np.ndarray:
    """out[i] = Σ_j kappa[i - j] values[j] (direct summation)."""
    N = values.shape[0]
    if values.ndim == 1:
        return np.convolve(values, kappa)[N - 1:2 * N - 1]
    full = signal.convolve(values, kappa, mode="full", method="direct")
    return full[tuple(slice(N - 1, 2 * N - 1) for _ in range(values.ndim))]


def riesz_potential(f: GridFunction, alpha: float) -> GridFunction:
    """I_α f = ∫ f(y) |x - y|^{α-n} dy at cell centers."""
    return potential(alpha).apply(f)


def cz_apply(k: Kernel, f: GridFunction, mode: str = "principal_value",
             eta: float = 0.0) -> GridFunction:
    """Apply the singular integral with kernel ``k`` in the given mode."""
    modes = {"principal_value": "pv", "pv": "pv", "truncated": "truncated",
             "smooth_truncated": "smooth", "smooth": "smooth"}
    if mode == "maximal_truncation":
        return maximal_truncation(LinearOp("cz", k), f)
    if mode not in modes:
        raise ParameterError(f"unknown mode {mode!r}")
    return LinearOp("cz", k, 0.0, modes[mode], eta).apply(f)


def eta_ladder(lat: DyadicLattice) -> list:
    """η = 2^j cells, j >= 1, up to half the box side."""
    out, j = [], 1
    while 2 ** j * lat.cell_side <= lat.side / 2 + 1e-12:
        out.append(2 ** j * lat.cell_side)
        j += 1
    return out


def maximal_truncation(op: LinearOp, f: GridFunction, ladder: Optional[Sequence[float]] = None,
                       return_all: bool = False):
    """T# f = max over the η-ladder of |T_η f| (sharp truncations)."""
    ladder = eta_ladder(f.lattice) if ladder is None else list(ladder)
    best = np.zeros_like(f.values)
    per = []
    for eta in ladder:
        t = op.with_mode("truncated", eta).apply(f).values
        per.append(t)
        best = np.maximum(best, np.abs(t))
    out = f.with_values(best, "signed")
    return (out, ladder, per) if return_all else out


# -- maximal functions ----------------------------------------------------------------

def _lattices_for(f: GridFunction, lattices) -> list:
    if lattices is None or lattices == "shifted":
        return shifted_lattices(f.lattice)
    if lattices == "dyadic":
        return [f.lattice]
    return list(lattices)


def maximal(f: GridFunction, variant: str = "plain", *, alpha: Optional[float] = None,
            yf: Optional[YoungFunction] = None, lattices="shifted") -> GridFunction:
    """Sup over cubes Q containing the cell of the cube functional of ``variant``:

    plain ⨍|f|, orlicz ||f||_{A,Q}, fractional |Q|^{α/n} ⨍|f|,
    fractional_orlicz |Q|^{β/n} ||f||_{A,Q}.
    """
    lat0 = f.lattice
    n = lat0.n
    if variant not in ("plain", "orlicz", "fractional", "fractional_orlicz"):
        raise ParameterError(f"unknown maximal variant {variant!r}")
    if variant == "fractional" and (alpha is None or not 0 < alpha < n):
        raise ParameterError(f"fractional maximal needs 0 < alpha < {n}")
    if variant == "fractional_orlicz" and (alpha is None or alpha < 0):
        raise ParameterError("fractional Orlicz maximal needs beta >= 0")
    if variant in ("orlicz", "fractional_orlicz") and yf is None:
        raise ParameterError("Orlicz variants need a Young function")
    r = np.abs(f.refined())
    best = np.zeros(r.shape)
    for lat in _lattices_for(f, lattices):
        for k in range(lat.depth + 1):
            rows, mask = level_blocks(lat, k, r)
            cnt = mask.sum(axis=1)
            if variant in ("plain", "fractional"):
                val = rows.sum(axis=1) / cnt
            else:
                val = luxemburg_rows(rows, mask, yf)
            if variant.startswith("fractional"):
                val = val * (cnt * lat.refined_volume) ** (alpha / n)
            best = np.maximum(best, spread_level(lat, k, val))
    return f.with_values(centers_of(best), "signed")


# -- grand maximal truncated operator -------------------------------------------------

def _near_1d(kappa: np.ndarray, g: np.ndarray, lo: int, hi: int, s: int) -> np.ndarray:
    """For each aligned block of ``s`` cells in [lo, hi): Σ_{j in 3Q} kappa[ξ-j] g_j."""
    N = g.size
    C = (hi - lo) // s
    if s > 64:
        out = []
        for c in range(C):
            a = lo + c * s
            w0, w1 = max(a - s, 0), min(a + 2 * s, N)
            ks = kappa[a - (w1 - 1) + N - 1:a + s - 1 - w0 + N]
            out.append(np.convolve(g[w0:w1], ks, mode="valid"))
        return np.concatenate(out)
    # local kernel K[u, v] = kappa[u - v + s] over the window of 3s cells
    u = np.arange(s)[:, None]
    v = np.arange(3 * s)[None, :]
    # offsets beyond the box only meet the zero padding of g
    P = max(0, 2 * s - N)
    kp = np.concatenate([np.zeros(P), kappa, np.zeros(P)]) if P else kappa
    Kloc = kp[u - v + s + N - 1 + P]
    gp = np.concatenate([np.zeros(s), g, np.zeros(s)])
    starts = lo + np.arange(C) * s        # 3Q starts s cells left; the pad adds s back
    W = np.lib.stride_tricks.sliding_window_view(gp, 3 * s)[starts]
    return (W @ Kloc.T).reshape(-1)


def _near_nd(kappa: np.ndarray, g: np.ndarray, Q: Cube) -> np.ndarray:
    N = g.shape[0]
    cb = Q.cell_bounds()
    s = cb[0][1] - cb[0][0]
    win = tuple(slice(max(a - s, 0), min(b + s, N)) for a, b in cb)
    gw = g[win]
    # kernel slice covering offsets from window cells to cube cells
    ks = []
    for (a, b), w in zip(cb, win):
        lo_off = a - (w.stop - 1)
        hi_off = (b - 1) - w.start
        ks.append(slice(lo_off + N - 1, hi_off + N))
    return signal.convolve(gw, kappa[tuple(ks)], mode="valid", method="direct")


def grand_maximal_trunc(f: GridFunction, alpha: float, Q0: Optional[Cube] = None,
                        op: Optional[LinearOp] = None, point_limit: bool = True) -> GridFunction:
    """Per cell x ∈ Q₀: sup over dyadic Q ∋ x, Q ⊆ Q₀, of max over the cells ξ
    of Q of |L(f χ_{3Q₀ \\ 3Q})(ξ)|, with L = I_α unless ``op`` is given.

    With ``point_limit`` the sup also includes the limit of shrinking cubes
    inside the cell of x, which is |L(f χ_{3Q₀})(x)|.
    """
    lat = f.lattice
    n = lat.n
    if op is None:
        if not 0 < alpha < n:
            raise ParameterError(f"alpha must lie in (0, {n})")
        op = potential(alpha)
    Q0 = lat.root() if Q0 is None else Q0
    if not Q0.lattice.is_base:
        raise StructuralError("local grand maximal needs a cube of the base lattice")
    kappa = op.table(lat)
    g = np.zeros_like(f.values)
    trip = tuple(slice(a, b) for a, b in Q0.triple_cell_bounds())
    g[trip] = f.values[trip]
    q0 = Q0.cell_slices()
    # g lives on 3Q₀, so the 3Q₀ window sum is the full operator on Q₀
    if n == 1:
        lo, hi = Q0.cell_bounds()[0]
        full = np.zeros_like(g)
        full[lo:hi] = _near_1d(kappa, g, lo, hi, hi - lo)
    else:
        full = np.zeros_like(g)
        full[q0] = _near_nd(kappa, g, Q0)
    best = np.zeros_like(g)
    if point_limit:
        best[q0] = np.abs(full[q0])
    for k in range(Q0.level, lat.depth + 1):
        s = 2 ** (lat.depth - k)
        if n == 1:
            near = _near_1d(kappa, g, lo, hi, s)
            val = np.abs(full[lo:hi] - near).reshape(-1, s).max(axis=1)
            best[lo:hi] = np.maximum(best[lo:hi], np.repeat(val, s))
            continue
        for Q in _subcubes(Q0, k):
            sl = Q.cell_slices()
            v = float(np.max(np.abs(full[sl] - _near_nd(kappa, g, Q))))
            best[sl] = np.maximum(best[sl], v)
    return f.with_values(best, "signed")


def _subcubes(Q0: Cube, k: int):
    s = 2 ** (k - Q0.level)
    for off in itertools.product(range(s), repeat=Q0.n):
        yield Cube(Q0.lattice, k, tuple(j * s + o for j, o in zip(Q0.index, off)))


# -- commutators ---------------------------------------------------------------------

def commutator(op: LinearOp, symbols: SymbolVector, f: GridFunction) -> GridFunction:
    """L_b f(x) = Σ_y Π_j (b_j(x) - b_j(y)) kappa[x - y] f(y) as a direct double sum.

    With no symbols this is exactly ``op.apply(f)``.
    """
    if not isinstance(symbols, SymbolVector):
        symbols = SymbolVector(symbols)
    if symbols.m == 0 or op.family == "identity":
        return op.apply(f) if symbols.m == 0 else f.with_values(np.zeros_like(f.values))
    return mixed_commutator(op, list(symbols), list(symbols), f)


def mixed_commutator(op: LinearOp, x_side: Sequence[GridFunction], y_side: Sequence[GridFunction],
                     f: GridFunction) -> GridFunction:
    """Σ_y Π_j (X_j(x) - Y_j(y)) kappa[x - y] f(y); the commutator has X_j = Y_j."""
    if len(x_side) != len(y_side):
        raise ParameterError("x-side and y-side symbol lists differ in length")
    for b in list(x_side) + list(y_side):
        if not b.lattice.same_grid(f.lattice):
            raise StructuralError("symbol and function live on different grids")
    if op.family == "identity":
        vals = f.values.copy()
        for bx, by in zip(x_side, y_side):
            vals = vals * (bx.values - by.values)
        return f.with_values(vals, "signed")
    lat = f.lattice
    kappa = op.table(lat).ravel()
    N, n = lat.cells_per_axis, lat.n
    P = N ** n
    fv = f.values.ravel()
    xs = [b.values.ravel() for b in x_side]
    ys = [b.values.ravel() for b in y_side]
    coords = np.stack(np.unravel_index(np.arange(P), (N,) * n), axis=1)
    strides = np.array([(2 * N - 1) ** (n - 1 - ax) for ax in range(n)])
    col_key = coords @ strides
    out = np.empty(P)
    for s in range(0, P, ROW_BLOCK):
        rows = slice(s, min(s + ROW_BLOCK, P))
        key = (coords[rows] + (N - 1)) @ strides
        M = kappa[key[:, None] - col_key[None, :]]
        for bx, by in zip(xs, ys):
            M = M * (bx[rows, None] - by[None, :])
        out[rows] = M @ fv
    return f.with_values(out.reshape(f.values.shape), "signed")


# -- operator specs ------------------------------------------------------------------

_OP_RE = re.compile(r"^(?:op:)?([\w.]+?)(?:\((.*)\))?$")


def _split_args(body: str) -> dict:
    out, depth, cur = {}, 0, ""
    parts = []
    for ch in body:
        if ch == "," and depth == 0:
            parts.append(cur)
            cur = ""
            continue
        depth += ch == "("
        depth -= ch == ")"
        cur += ch
    if cur:
        parts.append(cur)
    for part in parts:
        k, _, v = part.partition("=")
        out[k.strip()] = v.strip()
    return out


@dataclass
class OpSpec:
    """Parsed operator specification: a base operator plus optional symbols."""

    base: LinearOp
    m: int = 0
    symbol: Optional[str] = None

    def build(self, lat: DyadicLattice, seed: int = 0):
        from .field import parse_sample

        b = parse_sample(self.symbol, lat, seed) if self.symbol else None
        syms = SymbolVector.repeat(b, self.m) if b is not None else SymbolVector()
        return self.base, syms


def parse_op(text: str) -> OpSpec:
    """``op:hilbert.pv``, ``op:hilbert.smooth(eta=..)``, ``op:hilbert.trunc(eta=..)``,
    ``op:riesz(alpha=..)``, ``op:riesz_j(j=..,n=..)``, ``op:identity`` and
    ``op:commutator(base=<op>,m=..,b=sample:..)``."""
    text = text.strip()
    m = _OP_RE.match(text)
    if not m:
        raise ParameterError(f"cannot parse operator {text!r}")
    name, args = m.group(1), _split_args(m.group(2) or "")
    if name == "commutator":
        inner = parse_op(args["base"])
        return OpSpec(inner.base, int(float(args.get("m", 1))), args.get("b"))
    head, _, mode = name.partition(".")
    mode = {"": "pv", "pv": "pv", "smooth": "smooth", "trunc": "truncated",
            "truncated": "truncated"}.get(mode)
    if mode is None:
        raise ParameterError(f"unknown operator mode in {text!r}")
    eta = float(args.get("eta", 0.0))
    if head == "hilbert":
        return OpSpec(hilbert(mode, eta))
    if head == "riesz":
        return OpSpec(potential(float(args["alpha"]), mode, eta))
    if head == "riesz_j":
        return OpSpec(riesz_transform(int(float(args.get("n", 2))), int(float(args.get("j", 0))), mode, eta))
    if head == "identity":
        return OpSpec(identity())
    raise ParameterError(f"unknown operator {head!r}")
