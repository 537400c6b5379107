"""Kolmogorov-Riesz diagnostics for commutator families: uniform bounds, tail
and translation-modulus profiles, truncation-convergence rates and the
telescoping identities used to pass from smooth to general symbols."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Union

import numpy as np

from .errors import ParameterError, StructuralError
from .field import GridFunction, SymbolVector
from .lattice import DyadicLattice
from .operators import LinearOp, commutator, maximal, mixed_commutator

__all__ = [
    "KRProfile",
    "kr_profile",
    "scale_sample",
    "eta_sample",
    "EtaConvergence",
    "eta_convergence",
    "telescope_check",
    "telescope_details",
    "weighted_tail_sum",
    "maximal_lower_bound",
]

EXACT_GAP = 1e-13


def _centers(lat: DyadicLattice) -> np.ndarray:
    grids = np.meshgrid(*([lat.centers()] * lat.n), indexing="ij")
    return np.stack(grids, axis=-1)


def _radius(lat: DyadicLattice) -> np.ndarray:
    return np.sqrt((_centers(lat) ** 2).sum(axis=-1))


def _wnorm(values: np.ndarray, q: float, weight: Optional[np.ndarray], vol: float) -> float:
    a = np.abs(values) ** q
    if weight is not None:
        a = a * weight
    return float((a.sum() * vol) ** (1.0 / q))


def _operator(opspec) -> Callable[[GridFunction], GridFunction]:
    if isinstance(opspec, tuple):
        op, syms = opspec
        return lambda f: commutator(op, syms, f)
    if isinstance(opspec, LinearOp):
        return opspec.apply
    if callable(opspec):
        return opspec
    raise ParameterError("opspec must be a LinearOp, an (op, symbols) pair or a callable")


def _shift_cells(h, lat: DyadicLattice) -> tuple:
    hv = np.atleast_1d(np.asarray(h, dtype=float))
    if hv.size == 1 and lat.n > 1:
        hv = np.concatenate([hv, np.zeros(lat.n - 1)])
    if hv.size != lat.n:
        raise ParameterError("translation vector has the wrong dimension")
    k = hv / lat.cell_side
    kr = np.rint(k)
    if np.any(np.abs(k - kr) > 1e-9):
        raise ParameterError(f"translation {h} is not a whole number of cells")
    if np.any(kr != 0) and np.max(np.abs(hv)) < lat.cell_side * (1 - 1e-12):
        raise ParameterError("translations must be at least one cell")
    return tuple(int(x) for x in kr)


def _translate_pair(arr: np.ndarray, k: tuple):
    """Slices (src, dst) with arr[src] = arr(x + h) aligned to arr[dst] = arr(x)."""
    src, dst = [], []
    for ax, s in enumerate(k):
        N = arr.shape[ax]
        if s >= 0:
            src.append(slice(s, N))
            dst.append(slice(0, N - s))
        else:
            src.append(slice(0, N + s))
            dst.append(slice(-s, N))
    return tuple(src), tuple(dst)


@dataclass
class KRProfile:
    uniform_bound: float
    tail: dict
    modulus: dict
    per_f: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {"uniform_bound": self.uniform_bound,
                "tail": [{"R": r, "value": v} for r, v in self.tail.items()],
                "modulus": [{"h": h, "value": v} for h, v in self.modulus.items()],
                "per_f": self.per_f}


def kr_profile(opspec, u: GridFunction, v: GridFunction, p: float, q: float,
               ball_sample: Sequence[GridFunction], R_list: Sequence[float],
               h_list: Sequence[float]) -> KRProfile:
    """Uniform bound, tail and translation modulus of L over a sample of the
    unit ball of L^p(v), measured in L^q(u).

    Sample members are rescaled to ||f||_{L^p(v)} = 1.  Translations move
    by whole cells along the first axis (or by the given vector); cells that
    leave the box are dropped from both terms.
    """
    if not ball_sample:
        raise ParameterError("kr_profile needs a non-empty sample")
    lat = u.lattice
    vol = lat.cell_volume
    rad = _radius(lat)
    for R in R_list:
        if not 0 <= R < rad.max():
            raise ParameterError(f"radius {R} outside the box")
    L = _operator(opspec)
    uw = u.values
    shifts = [(h, _shift_cells(h, lat)) for h in h_list]
    bound = 0.0
    tail = {float(R): 0.0 for R in R_list}
    mod = {float(h) if np.ndim(h) == 0 else tuple(h): 0.0 for h in h_list}
    per = []
    for i, f in enumerate(ball_sample):
        nv = _wnorm(f.values, p, v.values, vol)
        if not nv > 0:
            raise ParameterError(f"sample member {i} has zero L^p(v) norm")
        Lf = L(f.with_values(f.values / nv)).values
        nb = _wnorm(Lf, q, uw, vol)
        bound = max(bound, nb)
        row = {"index": i, "norm": nb}
        for R in R_list:
            t = _wnorm(np.where(rad > R, Lf, 0.0), q, uw, vol)
            tail[float(R)] = max(tail[float(R)], t)
        for h, k in shifts:
            src, dst = _translate_pair(Lf, k)
            diff = Lf[src] - Lf[dst]
            m = _wnorm(diff, q, uw[dst], vol)
            key = float(h) if np.ndim(h) == 0 else tuple(h)
            mod[key] = max(mod[key], m)
        per.append(row)
    return KRProfile(bound, tail, mod, per)


def _normalized(lat: DyadicLattice, vals: np.ndarray, p: float, v: Optional[GridFunction]):
    f = GridFunction(lat, vals)
    nv = _wnorm(vals, p, None if v is None else v.values, lat.cell_volume)
    return f.with_values(vals / nv) if nv > 0 else None


def scale_sample(lat: DyadicLattice, p: float, v: Optional[GridFunction] = None, x0: float = 0.0,
                 min_cells: int = 1) -> list:
    """Even and odd unit-ball profiles centered at x0, one pair per dyadic
    radius from ``min_cells`` cells up to a quarter of the box."""
    c = _centers(lat)
    dist = np.sqrt(((c - x0) ** 2).sum(axis=-1))
    first = c[..., 0] - x0
    out = []
    r_cells = min_cells
    while r_cells * lat.cell_side <= lat.side / 4 + 1e-12:
        r = r_cells * lat.cell_side
        ind = (dist < r).astype(float)
        for vals in (ind, np.sign(first) * ind):
            g = _normalized(lat, vals, p, v)
            if g is not None:
                out.append(g)
        r_cells *= 2
    return out


def eta_sample(lat: DyadicLattice, eta_list: Sequence[float], p: float, x0: float = 0.0) -> list:
    """Even and odd profiles of radius η at x0 for each η, plus a Gaussian."""
    c = _centers(lat)
    dist = np.sqrt(((c - x0) ** 2).sum(axis=-1))
    first = c[..., 0] - x0
    out = []
    for eta in eta_list:
        ind = (dist < eta).astype(float)
        for vals in (ind, np.sign(first) * ind):
            g = _normalized(lat, vals, p, None)
            if g is not None:
                out.append(g)
    g = _normalized(lat, np.exp(-dist ** 2), p, None)
    out.append(g)
    return out


# -- truncation convergence -------------------------------------------------------

@dataclass
class EtaConvergence:
    slope: Optional[float]
    gaps: dict
    exact_agreement: bool = False

    def to_json(self) -> dict:
        return {"slope": self.slope, "exact_agreement": self.exact_agreement,
                "per_eta": [{"eta": e, "gap": g} for e, g in self.gaps.items()]}


def eta_convergence(base: LinearOp, b: GridFunction, m: int, f_sample: Sequence[GridFunction],
                    eta_list: Sequence[float], u: Optional[GridFunction] = None,
                    q: float = 2.0) -> EtaConvergence:
    """Least-squares slope of log gap against log η, where
    gap(η) = max_f ||L^η_b f - L_b f||_{L^q(u)} and L^η uses the smooth cutoff."""
    lat = b.lattice
    if len(eta_list) < 4:
        raise ParameterError("eta_convergence needs at least 4 values of eta")
    etas = sorted(float(e) for e in eta_list)
    for a, c in zip(etas, etas[1:]):
        if abs(c / a - 2) > 1e-9:
            raise ParameterError("eta_list must be dyadic")
    if etas[0] < 2 * lat.cell_side * (1 - 1e-12):
        raise ParameterError("eta must be at least two cells")
    if not f_sample:
        raise ParameterError("eta_convergence needs a non-empty sample")
    syms = SymbolVector.repeat(b, m)
    pv = base.with_mode("pv")
    uw = None if u is None else u.values
    exact = [commutator(pv, syms, f).values for f in f_sample]
    gaps = {}
    for eta in etas:
        sm = base.with_mode("smooth", eta)
        g = 0.0
        for f, e in zip(f_sample, exact):
            g = max(g, _wnorm(commutator(sm, syms, f).values - e, q, uw, lat.cell_volume))
        gaps[eta] = g
    vals = np.array([gaps[e] for e in etas])
    if np.all(vals < EXACT_GAP):
        return EtaConvergence(None, gaps, True)
    keep = vals >= EXACT_GAP
    slope = float(np.polyfit(np.log(np.array(etas)[keep]), np.log(vals[keep]), 1)[0])
    return EtaConvergence(slope, gaps, False)


# -- telescoping ------------------------------------------------------------------

def telescope_details(b: GridFunction, b_eps: GridFunction, m: int, f: GridFunction,
                      op: Optional[LinearOp] = None, shift: int = 1,
                      eta: Optional[float] = None) -> dict:
    """Residuals of the two algebraic identities behind the CMO reduction.

    ``telescope``: T_b^m f - T_{b_ε}^m f - Σ_{i<m} T_{𝐛_i} f with
    𝐛_i = (b - b_ε, b repeated i times, b_ε repeated m-1-i times).
    ``binomial``: B f(x, h) computed directly against
    Σ_k C(m,k) (b(x+h) - b(x))^k Σ_j C(m-k,j) b(x)^j (-1)^{m-k-j} T^η(b^{m-k-j} f)(x)
    on the smooth truncation, for a translation by ``shift`` cells.
    """
    from .operators import hilbert

    if not (b.lattice.same_grid(b_eps.lattice) and b.lattice.same_grid(f.lattice)):
        raise StructuralError("telescope_check needs a common lattice")
    if m < 1:
        raise ParameterError("telescoping needs m >= 1")
    lat = f.lattice
    op = hilbert() if op is None else op
    lhs = (commutator(op, SymbolVector.repeat(b, m), f).values
           - commutator(op, SymbolVector.repeat(b_eps, m), f).values)
    diff = b - b_eps
    rhs = np.zeros_like(lhs)
    for i in range(m):
        vec = SymbolVector([diff] + [b] * i + [b_eps] * (m - 1 - i))
        rhs += commutator(op, vec, f).values
    scale = float(np.max(np.abs(commutator(op, SymbolVector.repeat(b, m), f).values)))
    tele = float(np.max(np.abs(lhs - rhs)))

    eta = 4 * lat.cell_side if eta is None else eta
    smooth = op.with_mode("smooth", eta)
    k = (shift,) + (0,) * (lat.n - 1)
    src, dst = _translate_pair(b.values, k)
    bh = np.array(b.values)
    bh[dst] = b.values[src]           # b(x + h) where x + h stays in the box
    bhf = b.with_values(bh)
    direct = (mixed_commutator(smooth, [bhf] * m, [b] * m, f).values
              - commutator(smooth, SymbolVector.repeat(b, m), f).values)
    expand = np.zeros_like(direct)
    dh = bh - b.values
    for kk in range(1, m + 1):
        for j in range(m - kk + 1):
            e = m - kk - j
            inner = smooth.apply(f.with_values(b.values ** e * f.values)).values
            expand += (math.comb(m, kk) * math.comb(m - kk, j) * (-1) ** e
                       * dh ** kk * b.values ** j * inner)
    bscale = float(np.max(np.abs(direct[dst]))) if direct[dst].size else 0.0
    binom = float(np.max(np.abs(direct[dst] - expand[dst]))) if direct[dst].size else 0.0
    return {"telescope": tele, "binomial": binom, "scale": scale, "binomial_scale": bscale}


def telescope_check(b: GridFunction, b_eps: GridFunction, m: int, f: GridFunction,
                    op: Optional[LinearOp] = None) -> float:
    """Largest absolute residual of the telescoping and binomial identities."""
    d = telescope_details(b, b_eps, m, f, op)
    return max(d["telescope"], d["binomial"])


# -- tails ---------------------------------------------------------------------------

def weighted_tail_sum(u: GridFunction, p: float, alpha: float = 0.0,
                      power_exponent: Optional[float] = None) -> dict:
    """Σ u(x) / (|x| + 1)^{(n-α)p} |cell| over the box.

    For a power weight |x|^a (``power_exponent`` = a) the part beyond the box
    is finite iff a < (n-α)p - n; that closed form is reported alongside.
    """
    lat = u.lattice
    n = lat.n
    e = (n - alpha) * p
    box = float((u.values / (_radius(lat) + 1.0) ** e).sum() * lat.cell_volume)
    out = {"box_sum": box, "exponent": e, "beyond_box_finite": None}
    if power_exponent is not None:
        out["beyond_box_finite"] = bool(power_exponent < e - n)
    return out


def maximal_lower_bound(lat: DyadicLattice) -> float:
    """min over cells of M(χ_{[-1,1]^n})(x) (|x| + 1)^n."""
    c = _centers(lat)
    chi = np.all(np.abs(c) < 1.0, axis=-1).astype(float)
    M = maximal(GridFunction(lat, chi), "plain").values
    return float(np.min(M * (_radius(lat) + 1.0) ** lat.n))
