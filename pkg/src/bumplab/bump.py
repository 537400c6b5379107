"""Two-weight bump constants, A_p constants, empirical operator-norm ratios
and a step-by-step audit of the duality argument behind sparse bounds."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Union

import numpy as np

from .errors import ClassConditionError, ParameterError, StructuralError
from .field import GridFunction, SymbolVector, luxemburg_rows
from .lattice import (
    Cube,
    DyadicLattice,
    SparseFamily,
    centers_of,
    level_blocks,
    level_cube,
    shifted_lattices,
)
from .operators import LinearOp, commutator, maximal
from .sparse import TauSubset, all_taus
from .young import (
    YoungFunction,
    associate,
    class_membership,
    format_young,
    inverse,
    power,
    power_log,
)

__all__ = [
    "PRESETS",
    "BumpSpec",
    "BumpResult",
    "preset",
    "check_classes",
    "ap_constant",
    "bump_constant",
    "NormRatioResult",
    "norm_ratio",
    "adversarial_corpus",
    "duality_chain_audit",
    "holder_dilation",
]

PRESETS = ("ap", "twoweight-ap", "maxbump", "czobump", "doublebumpfrac", "commbump",
           "commbumpfrac", "oscbump", "oscbumpfrac", "thm11", "thm12", "thm13", "thm14")
TIE_RTOL = 1e-9


def conj(p: float) -> float:
    return p / (p - 1.0)


@dataclass
class BumpSpec:
    """Exponents, Young pair and τ policy of one bump condition.

    ``tau_policy`` is ``sum`` (all τ ⊆ {1..m}), ``single`` (only ``tau``),
    ``ends`` (τ = ∅ and τ = full, the oscillation-class form) or ``weights``
    (symbols ignored).  ``A`` acts on the u side, ``B`` on the v side; either
    may be None only for the ``ap`` preset.
    """

    p: float
    q: Optional[float] = None
    alpha: float = 0.0
    s: Optional[float] = None
    m: int = 0
    A: Optional[YoungFunction] = None
    B: Optional[YoungFunction] = None
    symbols: SymbolVector = field(default_factory=SymbolVector)
    tau_policy: str = "sum"
    tau: Optional[TauSubset] = None
    delta: float = 0.1
    name: str = "custom"
    # (label, which side, class p, class q or None)
    required: list = field(default_factory=list)

    def __post_init__(self):
        self.q = self.p if self.q is None else self.q
        self.s = self.p if self.s is None else self.s
        if not isinstance(self.symbols, SymbolVector):
            self.symbols = SymbolVector(self.symbols)
        if not self.p > 1:
            raise ParameterError("bump spec needs p > 1")
        if self.q < self.p:
            raise ParameterError("bump spec needs p <= q")
        if not self.p - 1e-12 <= self.s <= self.q + 1e-12:
            raise ParameterError("bump spec needs p <= s <= q")
        if self.alpha < 0:
            raise ParameterError("bump spec needs alpha >= 0")
        if self.tau_policy not in ("sum", "single", "ends", "weights"):
            raise ParameterError(f"unknown tau policy {self.tau_policy!r}")
        if self.tau_policy == "single" and self.tau is None:
            raise ParameterError("single tau policy needs a tau")
        if self.delta <= 0:
            raise ParameterError("delta must be positive")

    def taus(self) -> list:
        m = 0 if self.tau_policy == "weights" else self.symbols.m
        if self.tau_policy == "single":
            if self.tau.m != m:
                raise ParameterError("tau and symbol vector disagree on m")
            return [self.tau]
        if self.tau_policy == "ends":
            full = TauSubset(2 ** m - 1, m)
            return [TauSubset(0, m)] if m == 0 else [TauSubset(0, m), full]
        return all_taus(m)

    def to_json(self) -> dict:
        return {
            "name": self.name, "p": self.p, "q": self.q, "alpha": self.alpha, "s": self.s,
            "m": self.m, "delta": self.delta, "tau_policy": self.tau_policy,
            "tau": None if self.tau is None else self.tau.label(),
            "A": None if self.A is None else format_young(self.A),
            "B": None if self.B is None else format_young(self.B),
            "symbols": self.symbols.m,
        }


def _epsilon(p, q, s, delta):
    # largest ε keeping both generalized-Hölder pairings of the BMO corollaries valid
    return delta * min(conj(s) / q, s / conj(p))


def _standard_classes(p, q, s):
    qq, ss = conj(q), conj(s)
    a_lab = "Ā ∈ B_{q′}" if abs(ss - qq) < 1e-12 else "Ā ∈ B_{q′,s′}"
    b_lab = "B̄ ∈ B_p" if abs(s - p) < 1e-12 else "B̄ ∈ B_{p,s}"
    return [(a_lab, "A", qq, None if abs(ss - qq) < 1e-12 else ss),
            (b_lab, "B", p, None if abs(s - p) < 1e-12 else s)]


def preset(name: str, p: float, q: Optional[float] = None, alpha: float = 0.0,
           s: Optional[float] = None, m: int = 0, delta: float = 0.1,
           symbols: Optional[SymbolVector] = None) -> BumpSpec:
    """Build the BumpSpec of a named condition.

    thm11/thm12 use A = L^q(log L)^{(1+ε)q/s′}, B = L^{p′}(log L)^{(1+ε)p′/s}
    with ε = δ min(s′/q, s/p′); thm13/thm14 are the log-bumped weight-only
    conditions L^q(log L)^{(m+1/s′)q+δ}, L^{p′}(log L)^{(m+1/s)p′+δ}.
    """
    if name not in PRESETS:
        raise ParameterError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}")
    q = p if q is None else q
    s = p if s is None else s
    symbols = SymbolVector() if symbols is None else symbols
    if not isinstance(symbols, SymbolVector):
        symbols = SymbolVector(symbols)
    pp = conj(p)
    eps = _epsilon(p, q, s, delta)
    kw = dict(p=p, q=q, alpha=alpha, s=s, m=m, delta=delta, name=name)
    if name in ("thm11", "czobump", "commbump", "thm13", "oscbump", "maxbump"):
        if q != p or alpha != 0:
            raise ParameterError(f"preset {name} is the diagonal case p = q, alpha = 0")
    if name == "ap":
        return BumpSpec(A=None, B=None, tau_policy="weights", **kw)
    if name == "twoweight-ap":
        return BumpSpec(A=power(q), B=power(pp), tau_policy="weights", **kw)
    if name == "maxbump":
        return BumpSpec(A=power(q), B=power_log(pp, pp - 1 + delta), tau_policy="weights",
                        required=[_standard_classes(p, q, s)[1]], **kw)
    if name in ("czobump", "doublebumpfrac"):
        return BumpSpec(A=power_log(q, q - 1 + delta), B=power_log(pp, pp - 1 + delta),
                        tau_policy="weights", required=_standard_classes(p, q, s), **kw)
    if name in ("commbump", "commbumpfrac"):
        k = 1 if name == "commbump" else m
        kw["m"] = k
        return BumpSpec(A=power_log(q, (k + 1) * q - 1 + delta),
                        B=power_log(pp, (k + 1) * pp - 1 + delta),
                        tau_policy="weights", required=_standard_classes(p, q, s), **kw)
    if name in ("thm13", "thm14"):
        return BumpSpec(A=power_log(q, (m + 1 / conj(s)) * q + delta),
                        B=power_log(pp, (m + 1 / s) * pp + delta),
                        tau_policy="weights", required=_standard_classes(p, q, s), **kw)
    A = power_log(q, (1 + eps) * q / conj(s))
    B = power_log(pp, (1 + eps) * pp / s)
    if name in ("oscbump", "oscbumpfrac"):
        if symbols.m > 1:
            raise ParameterError("oscillation presets take one symbol, repeated m times")
        if symbols.m == 1 and m > 0:
            symbols = SymbolVector.repeat(symbols[0], m)
        return BumpSpec(A=A, B=B, symbols=symbols, tau_policy="ends",
                        required=_standard_classes(p, q, s), **kw)
    kw["m"] = symbols.m if symbols.m else m
    return BumpSpec(A=A, B=B, symbols=symbols, tau_policy="sum",
                    required=_standard_classes(p, q, s), **kw)


def check_classes(spec: BumpSpec, raise_on_fail: bool = True) -> list:
    """Run the required B-class checks on the associates of A and B."""
    out = []
    for label, side, cp, cq in spec.required:
        yf = spec.A if side == "A" else spec.B
        bar = associate(yf)
        res = class_membership(bar, cp, cq)
        rec = {"class": label, "function": format_young(yf), "p": cp, "q": cq,
               "in_class": bool(res.in_class), "integral_estimate": res.integral_estimate,
               "method": res.method}
        out.append(rec)
        if raise_on_fail and not res.in_class:
            raise ClassConditionError(f"{label} fails for {format_young(yf)}", label)
    return out


# -- A_p constants -------------------------------------------------------------

def _level_scan(lattices, depth):
    for lat in lattices:
        for k in range(depth + 1):
            yield lat, k


def ap_constant(w: GridFunction, p: float, second: Optional[GridFunction] = None,
                lattices="shifted") -> float:
    """One-weight [w]_{A_p}, or the two-weight constant with u = w, v = second."""
    if not p > 1:
        raise ParameterError("A_p constant needs p > 1")
    pp = conj(p)
    lats = shifted_lattices(w.lattice) if lattices == "shifted" else list(lattices)
    u = np.maximum(w.refined(), 0.0)
    v = u if second is None else np.maximum(second.refined(), 0.0)
    vinv = np.maximum(v, 1e-300) ** (1 - pp)
    best = 0.0
    for lat, k in _level_scan(lats, w.lattice.depth):
        ru, mask = level_blocks(lat, k, u)
        rv, _ = level_blocks(lat, k, vinv)
        cnt = mask.sum(axis=1)
        mu, mv = ru.sum(axis=1) / cnt, rv.sum(axis=1) / cnt
        if second is None:
            val = mu * mv ** (p - 1)
        else:
            val = mu ** (1 / p) * mv ** (1 / pp)
        best = max(best, float(val.max()))
    return best


# -- bump constants ------------------------------------------------------------

@dataclass
class BumpResult:
    value: float
    argmax_cube: Optional[Cube]
    per_tau: list
    class_checks: list
    spec: BumpSpec

    def to_json(self) -> dict:
        return {
            "value": self.value,
            "argmax": None if self.argmax_cube is None else self.argmax_cube.to_json(),
            "per_tau": self.per_tau,
            "class_checks": self.class_checks,
            "spec": self.spec.to_json(),
        }


def _symbol_key(symbols: SymbolVector, idx) -> tuple:
    return tuple(sorted(id(symbols[i]) for i in idx))


def bump_constant(u: GridFunction, v: GridFunction, spec: BumpSpec, lattices="shifted",
                  check: bool = True) -> BumpResult:
    """sup over cubes of |Q|^{α/n+1/q-1/p} ||Π_τ (b_i - (b_i)_Q) u^{1/q}||_{A,Q}
    ||Π_{τ^c} (b_l - (b_l)_Q) v^{-1/p}||_{B,Q}, summed over τ per the policy.

    The sup runs over every cube of the 3^n shifted lattices.  Ties go to the
    lowest (lattice id, level, index).
    """
    if not u.lattice.same_grid(v.lattice):
        raise StructuralError("u and v live on different grids")
    n = u.lattice.n
    if not spec.alpha < n:
        raise ParameterError(f"alpha must lie in [0, {n})")
    checks = check_classes(spec) if check else []
    if spec.name == "ap":
        val = ap_constant(u, spec.p, None if v is u else v, lattices)
        return BumpResult(val, None, [{"tau": "{}", "value": val, "argmax": None}], checks, spec)
    lats = shifted_lattices(u.lattice) if lattices == "shifted" else list(lattices)
    taus = spec.taus()
    symbols = spec.symbols if spec.tau_policy != "weights" else SymbolVector()
    for b in symbols:
        if not b.lattice.same_grid(u.lattice):
            raise StructuralError("symbol and weights live on different grids")
    ur = np.maximum(u.refined(), 0.0) ** (1.0 / spec.q)
    vr = np.maximum(v.refined(), 1e-300) ** (-1.0 / spec.p)
    brs = [b.refined() for b in symbols]
    e = spec.alpha / n + 1.0 / spec.q - 1.0 / spec.p
    # per tau: list of (lat id, level, values array)
    scans = {t.mask: [] for t in taus}
    for lat in lats:
        for k in range(u.lattice.depth + 1):
            ru, mask = level_blocks(lat, k, ur)
            rv, _ = level_blocks(lat, k, vr)
            cnt = mask.sum(axis=1)
            devs = []
            for br in brs:
                rb, _ = level_blocks(lat, k, br)
                mean = rb.sum(axis=1) / cnt
                devs.append(np.where(mask, np.abs(rb - mean[:, None]), 0.0))
            measure = (cnt * lat.refined_volume) ** e
            cache_a, cache_b = {}, {}
            for t in taus:
                ka, kb = _symbol_key(symbols, t.members), _symbol_key(symbols, t.complement)
                if ka not in cache_a:
                    x = ru.copy()
                    for i in t.members:
                        x = x * devs[i]
                    cache_a[ka] = luxemburg_rows(x, mask, spec.A)
                if kb not in cache_b:
                    y = rv.copy()
                    for i in t.complement:
                        y = y * devs[i]
                    cache_b[kb] = luxemburg_rows(y, mask, spec.B)
                scans[t.mask].append((lat, k, measure * cache_a[ka] * cache_b[kb]))
    per_tau, total = [], 0.0
    best_tau_val, best_cube = -1.0, None
    for t in taus:
        sup = max(float(vals.max()) for _, _, vals in scans[t.mask])
        cube = None
        if sup > 0:
            thr = sup * (1 - TIE_RTOL)
            for lat, k, vals in scans[t.mask]:
                hit = np.flatnonzero(vals >= thr)
                if hit.size:
                    cube = level_cube(lat, k, int(hit[0]))
                    break
        per_tau.append({"tau": t.label(), "value": sup,
                        "argmax": None if cube is None else cube.to_json()})
        total += sup
        if sup > best_tau_val * (1 + TIE_RTOL):
            best_tau_val, best_cube = sup, cube
    return BumpResult(total, best_cube, per_tau, checks, spec)


def holder_dilation(factors: Sequence[YoungFunction], target: YoungFunction,
                    t_grid: Optional[np.ndarray] = None) -> float:
    """κ = sup_t Π A_i^{-1}(t) / C^{-1}(t) over a log grid.

    With C_κ(t) = C(t/κ) the inverse hypothesis of the generalized Hölder
    inequality holds on the grid, and ||·||_{C} = κ ||·||_{C_κ}.
    """
    if t_grid is None:
        t_grid = np.logspace(-6, 12, 400)
    best = 0.0
    for t in t_grid:
        lhs = math.prod(inverse(A, t) for A in factors)
        best = max(best, lhs / inverse(target, t))
    return best


# -- empirical norms -------------------------------------------------------------

@dataclass
class NormRatioResult:
    best_ratio: float
    per_f: list


def _lq(values: np.ndarray, q: float, weight: Optional[np.ndarray], cell_volume: float) -> float:
    a = np.abs(values) ** q
    if weight is not None:
        a = a * weight
    return float((a.sum() * cell_volume) ** (1.0 / q))


OpLike = Union[LinearOp, Callable[[GridFunction], GridFunction], tuple]


def _as_callable(opspec: OpLike, symbols: Optional[SymbolVector]):
    if isinstance(opspec, tuple):
        op, syms = opspec
        return lambda f: commutator(op, syms, f)
    if isinstance(opspec, LinearOp):
        syms = SymbolVector() if symbols is None else symbols
        return lambda f: commutator(opspec, syms, f)
    if callable(opspec):
        return opspec
    raise ParameterError("opspec must be a LinearOp, an (op, symbols) pair or a callable")


def norm_ratio(opspec: OpLike, u: GridFunction, v: GridFunction, p: float, q: float,
               test_set: Sequence[GridFunction], symbols: Optional[SymbolVector] = None
               ) -> NormRatioResult:
    """max_f ||L f||_{L^q(u)} / ||f||_{L^p(v)} over ``test_set``."""
    if not test_set:
        raise ParameterError("norm_ratio needs a non-empty test set")
    L = _as_callable(opspec, symbols)
    vol = u.lattice.cell_volume
    rows, best = [], 0.0
    for i, f in enumerate(test_set):
        den = _lq(f.values, p, v.values, vol)
        if not den > 0:
            raise ParameterError(f"test function {i} has zero L^p(v) norm")
        num = _lq(L(f).values, q, u.values, vol)
        r = num / den
        rows.append({"index": i, "lhs": num, "rhs": den, "ratio": r})
        best = max(best, r)
    return NormRatioResult(best, rows)


def adversarial_corpus(u: GridFunction, v: GridFunction, p: float,
                       argmax_cube: Optional[Cube] = None, op: Optional[LinearOp] = None,
                       seed: int = 0, n_random: int = 4) -> list:
    """Fixed test functions, each normalized to ||f||_{L^p(v)} = 1.

    Indicators and v^{1-p'} profiles at the argmax cube and its ancestors,
    sign patterns matching ``op`` applied to that profile, and seeded random
    fields.
    """
    lat = u.lattice
    vol = lat.cell_volume
    pp = conj(p)
    sigma = np.maximum(v.values, 1e-300) ** (1 - pp)
    if argmax_cube is None:
        argmax_cube = lat.root()
    masks = []
    Q = argmax_cube
    for _ in range(3):
        m = centers_of(Q.refined_mask()).astype(float)
        if m.any():
            masks.append(m)
        if Q.level == 0:
            break
        Q = Q.parent()
    raw = []
    for m in masks:
        raw.append(m)
        raw.append(m * sigma)
    if op is not None and masks:
        prof = u.with_values(masks[0] * sigma)
        sgn = np.sign(op.apply(prof).values)
        support = masks[-1] if len(masks) > 1 else np.ones_like(sgn)
        raw.append(sgn * support * sigma)
        raw.append(-sgn * masks[0] * sigma)
    alt = (np.indices(lat.cells_per_axis * np.ones(lat.n, int)).sum(axis=0) % 2) * 2 - 1.0
    if masks:
        raw.append(alt * masks[0] * sigma)
    rng = np.random.default_rng(seed)
    for _ in range(n_random):
        raw.append(rng.standard_normal(u.values.shape) * sigma ** (1 / p))
    out = []
    for r in raw:
        nrm = _lq(r, p, v.values, vol)
        if nrm > 0:
            out.append(u.with_values(r / nrm, "signed"))
    return out


# -- duality chain ----------------------------------------------------------------

def _row_norm(data: np.ndarray, yf: YoungFunction) -> float:
    return float(luxemburg_rows(data.ravel()[None, :], None, yf)[0])


def _ratio(lhs: float, rhs: float) -> float:
    if lhs == 0:
        return 0.0
    return lhs / rhs if rhs > 0 else math.inf


def duality_chain_audit(fam: SparseFamily, symbols: SymbolVector, tau: TauSubset, alpha: float,
                        f: GridFunction, g: GridFunction, spec: BumpSpec,
                        u: Optional[GridFunction] = None, v: Optional[GridFunction] = None,
                        slack: float = 1e-9) -> list:
    """Both sides of each inequality in the duality bound for T^{α,τ}_{S,b}.

    Steps: (1) pairing vs Hölder-expanded cube sum, constant 2 per Hölder
    application; (2) extraction of K_{α,τ}, constant 1; (3) |Q| -> |E_Q|/α_S,
    constant 1/α_S; (4) cube sum vs ∫ M_{β,Ā} g M_{γ,B̄}(f v^{1/p}), constant 1;
    (5) Hölder in L^{s'} x L^s, constant 1.  g is normalized in L^{q'}.
    """
    if not isinstance(symbols, SymbolVector):
        symbols = SymbolVector(symbols)
    if tau.m != symbols.m:
        raise ParameterError("tau and symbol vector disagree on m")
    lat = f.lattice
    n = lat.n
    p, q, s = spec.p, spec.q, spec.s
    if spec.A is None or spec.B is None:
        raise ParameterError("duality audit needs a Young pair")
    if fam.cubes and len(fam.witnesses) != len(fam.cubes):
        raise StructuralError("sparsity witnesses missing")
    u = f.with_values(np.ones_like(f.values), "weight") if u is None else u
    v = f.with_values(np.ones_like(f.values), "weight") if v is None else v
    qq, ss = conj(q), conj(s)
    gabs = np.abs(g.values)
    gn = _lq(gabs, qq, None, lat.cell_volume)
    gabs = gabs / gn if gn > 0 else gabs
    gfun = g.with_values(gabs)
    hvals = np.abs(f.values) * np.maximum(v.values, 1e-300) ** (1 / p)
    hfun = f.with_values(hvals)
    Abar, Bbar = associate(spec.A), associate(spec.B)
    beta = n * (1 / s - 1 / q)
    gamma = n * (1 / p - 1 / s)

    ur = u.refined() ** (1 / q)
    vr = np.maximum(v.refined(), 1e-300) ** (-1 / p)
    gr, hr = gfun.refined(), hfun.refined()
    brs = [b.refined() for b in symbols]
    rvol = lat.refined_volume
    N = lat.cells_per_axis

    lhs = s1 = 0.0
    kq, hold_u, hold_v = [], 0.0, 0.0
    pieces = []
    for idx, Q in enumerate(fam.cubes):
        if not Q.lattice.same_grid(lat):
            raise StructuralError("family and function live on different grids")
        sl = Q.refined_slices()
        X, Y = ur[sl], vr[sl]
        for i, br in enumerate(brs):
            d = np.abs(br[sl] - br[sl].mean())
            if i in tau.members:
                X = X * d
            else:
                Y = Y * d
        meas = Q.measure
        avg_xg = float((X * gr[sl]).mean())
        avg_yh = float((Y * hr[sl]).mean())
        nx, ny = _row_norm(X, spec.A), _row_norm(Y, spec.B)
        ng, nh = _row_norm(gr[sl], Abar), _row_norm(hr[sl], Bbar)
        lhs += meas ** (alpha / n) * meas * avg_xg * avg_yh
        s1 += meas ** (alpha / n + 1) * nx * ng * ny * nh
        hold_u = max(hold_u, _ratio(avg_xg, nx * ng))
        hold_v = max(hold_v, _ratio(avg_yh, ny * nh))
        kq.append(meas ** (alpha / n + 1 / q - 1 / p) * nx * ny)
        w = np.asarray(fam.witnesses[idx])
        if w.size and (w.min() < 0 or w.max() >= N ** n):
            raise StructuralError("witness cell outside the grid")
        pieces.append((meas, w.size * lat.cell_volume, ng, nh))
    # the K of the theorem: sup over all cubes of the shifted lattices
    single = BumpSpec(p=p, q=q, alpha=alpha, s=s, m=symbols.m, A=spec.A, B=spec.B,
                      symbols=symbols, tau_policy="single", tau=tau, name="audit")
    K = bump_constant(u, v, single, check=False).value if fam.cubes else 0.0
    K = max(K, max(kq, default=0.0))
    e_pow = 1 / qq + 1 / p
    s2 = K * sum(mq ** e_pow * a * b for mq, _, a, b in pieces)
    s3 = K * sum(me * mq ** (1 / p - 1 / q) * a * b for mq, me, a, b in pieces)
    if fam.cubes:
        Mg = maximal(gfun, "fractional_orlicz", alpha=beta, yf=Abar).values
        Mh = maximal(hfun, "fractional_orlicz", alpha=gamma, yf=Bbar).values
    else:
        Mg = Mh = np.zeros_like(gabs)
    vol = lat.cell_volume
    s4 = K * float((Mg * Mh).sum() * vol)
    s5 = K * _lq(Mg, ss, None, vol) * _lq(Mh, s, None, vol)
    alpha_s = fam.alpha
    steps = [
        ("pairing vs Hölder-expanded sum", lhs, s1, 4.0),
        ("extraction of K", s1, s2, 1.0),
        ("sparsity |Q| <= |E_Q|/alpha", s2, s3, 1.0 / alpha_s),
        ("cube sum vs maximal pairing", s3, s4, 1.0),
        ("Hölder in L^{s'} x L^s", s4, s5, 1.0),
    ]
    out = []
    for i, (name, a, b, c) in enumerate(steps, start=1):
        r = _ratio(a, b)
        rec = {"step": i, "name": name, "lhs": a, "rhs": b, "ratio": r, "constant": c,
               "ok": bool(r <= c * (1 + slack))}
        if i == 1:
            rec["holder_u"] = hold_u
            rec["holder_v"] = hold_v
            rec["ok"] = rec["ok"] and hold_u <= 2 * (1 + slack) and hold_v <= 2 * (1 + slack)
        out.append(rec)
    return out
