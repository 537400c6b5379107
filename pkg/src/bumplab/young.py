"""Young functions: evaluation, inversion, associates and B_p classes.

A Young function here is one of four kinds

* ``power``          A(t) = t^p
* ``power_log``      A(t) = t^p log(e + t)^a
* ``exp_minus_one``  A(t) = e^t - 1
* ``tabulated``      monotone log-log interpolation of sample points

each optionally dilated, A_c(t) = A(t / c), so that A_c^{-1} = c A^{-1} and
``||f||_{A_c,Q} = ||f||_{A,Q} / c``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .errors import (
    DomainError,
    ExtrapolationError,
    HypothesisViolation,
    ParameterError,
    ResolutionError,
    YoungOverflowError,
)

__all__ = [
    "YoungFunction",
    "power",
    "power_log",
    "exp_minus_one",
    "tabulated",
    "evaluate",
    "inverse",
    "associate",
    "class_membership",
    "ClassResult",
    "holder_product_ratio",
    "parse_young",
    "format_young",
]

EXP_CAP = 700.0
HYPOTHESIS_POINTS = (1.0, 10.0, 1e3, 1e6)
ASSOCIATE_GRID = (1e-6, 1e8, 2048)
MIN_TABLE_POINTS = 16


@dataclass(frozen=True, eq=False)
class YoungFunction:
    kind: str
    p: Optional[float] = None
    a: Optional[float] = None
    scale: float = 1.0
    ts: Optional[np.ndarray] = field(default=None, repr=False)
    values: Optional[np.ndarray] = field(default=None, repr=False)
    # closed-form function equivalent at infinity, used for class checks
    asymptotic: Optional["YoungFunction"] = field(default=None, repr=False)
    label: str = ""

    def __post_init__(self):
        if self.kind not in ("power", "power_log", "exp_minus_one", "tabulated"):
            raise ParameterError(f"unknown Young function kind {self.kind!r}")
        if not self.scale > 0:
            raise ParameterError("scale must be positive")
        if self.kind == "power" and not (self.p is not None and self.p > 1):
            raise ParameterError("power kind requires p > 1")
        if self.kind == "power_log":
            if self.p is None or self.a is None:
                raise ParameterError("power_log requires p and a")
            # p == 1 is allowed only when the log factor makes A superlinear
            if not (self.p > 1 or (self.p == 1 and self.a > 0)):
                raise ParameterError("power_log requires p > 1 (or p = 1 with a > 0)")
        if self.kind == "tabulated":
            ts = np.asarray(self.ts, dtype=float)
            vs = np.asarray(self.values, dtype=float)
            if ts.ndim != 1 or ts.shape != vs.shape or ts.size < 2:
                raise ParameterError("tabulated kind needs matching 1-D t and value arrays")
            if np.any(ts <= 0) or np.any(vs <= 0):
                raise ParameterError("tabulated samples must be strictly positive")
            if np.any(np.diff(ts) <= 0) or np.any(np.diff(vs) <= 0):
                raise ParameterError("tabulated samples must be strictly increasing")
            object.__setattr__(self, "ts", ts)
            object.__setattr__(self, "values", vs)

    # -- evaluation ---------------------------------------------------------

    def __call__(self, t):
        return evaluate(self, t)

    def eval_array(self, t, saturate=False):
        """Vectorised evaluation.

        With ``saturate=True`` arguments beyond the representable range map
        to ``inf`` instead of raising; Luxemburg bisection relies on this
        since such levels certainly have mean A(|f|/λ) > 1.
        """
        t = np.asarray(t, dtype=float)
        if np.any(t < 0):
            raise DomainError("Young functions are defined on [0, inf)")
        x = t / self.scale
        if self.kind == "power":
            return x ** self.p
        if self.kind == "power_log":
            return x ** self.p * np.log(math.e + x) ** self.a
        if self.kind == "exp_minus_one":
            over = x > EXP_CAP
            if np.any(over):
                if not saturate:
                    bad = float(np.max(t[over])) if t.ndim else float(t)
                    raise YoungOverflowError(
                        f"exp argument {bad / self.scale:.6g} exceeds cap {EXP_CAP}", bad)
                out = np.expm1(np.minimum(x, EXP_CAP))
                return np.where(over, np.inf, out)
            return np.expm1(x)
        return self._eval_table(x, saturate)

    def _eval_table(self, x, saturate):
        lt, lv = np.log(self.ts), np.log(self.values)
        over = x > self.ts[-1] * (1 + 1e-12)
        if np.any(over) and not saturate:
            raise ExtrapolationError(
                f"tabulated Young function queried at {float(np.max(x)):.6g} "
                f"above table end {self.ts[-1]:.6g}")
        with np.errstate(divide="ignore"):
            lx = np.log(np.where(x > 0, x, 1.0))
        body = np.exp(np.interp(lx, lt, lv))
        # below the table: continue the first log-log segment towards 0
        slope = (lv[1] - lv[0]) / (lt[1] - lt[0])
        below = np.exp(lv[0] + slope * (lx - lt[0]))
        out = np.where(x < self.ts[0], below, body)
        out = np.where(x > 0, out, 0.0)
        if saturate:
            out = np.where(over, np.inf, out)
        return out

    @property
    def inverse_at_one(self):
        return inverse(self, 1.0)

    def dilate(self, c):
        """Return A(t / c) (Luxemburg norms divide by ``c``)."""
        asym = self.asymptotic.dilate(c) if self.asymptotic is not None else None
        return replace(self, scale=self.scale * c, asymptotic=asym)

    def __repr__(self):
        return f"YoungFunction({format_young(self)})"


def power(p):
    return YoungFunction("power", p=float(p))


def power_log(p, a):
    return YoungFunction("power_log", p=float(p), a=float(a))


def exp_minus_one():
    return YoungFunction("exp_minus_one")


def tabulated(ts, values, asymptotic=None, label=""):
    return YoungFunction("tabulated", ts=np.asarray(ts, float),
                         values=np.asarray(values, float),
                         asymptotic=asymptotic, label=label)


def evaluate(yf: YoungFunction, t):
    """A(t) for scalar or array ``t`` >= 0."""
    if np.ndim(t) == 0:
        if t < 0:
            raise DomainError(f"negative argument {t}")
        return float(yf.eval_array(np.asarray(float(t))))
    return yf.eval_array(t)


# -- inversion ----------------------------------------------------------------

def _bisect_inverse(yf, s, rtol=1e-14):
    lo = hi = max(s, 1.0) ** (1.0 / (yf.p or 1.0)) * yf.scale
    for _ in range(2000):
        if evaluate(yf, hi) >= s:
            break
        hi *= 2.0
    else:
        raise YoungOverflowError("inverse bracket doubling did not terminate", hi)
    for _ in range(2000):
        if evaluate(yf, lo) <= s:
            break
        lo *= 0.5
    while hi / lo - 1.0 > rtol:
        mid = math.sqrt(lo * hi)
        if evaluate(yf, mid) < s:
            lo = mid
        else:
            hi = mid
    return math.sqrt(lo * hi)


def inverse(yf: YoungFunction, s):
    """t >= 0 with A(t) = s."""
    s = float(s)
    if s < 0:
        raise DomainError("inverse needs s >= 0")
    if s == 0:
        return 0.0
    if yf.kind == "power":
        return yf.scale * s ** (1.0 / yf.p)
    if yf.kind == "exp_minus_one":
        return yf.scale * math.log1p(s)
    if yf.kind == "tabulated":
        lt, lv = np.log(yf.ts), np.log(yf.values)
        ls = math.log(s)
        if s > yf.values[-1] * (1 + 1e-12):
            raise ExtrapolationError(f"inverse queried at {s:.6g} above table range")
        if s < yf.values[0]:
            slope = (lv[1] - lv[0]) / (lt[1] - lt[0])
            return yf.scale * math.exp(lt[0] + (ls - lv[0]) / slope)
        return yf.scale * math.exp(float(np.interp(ls, lv, lt)))
    return _bisect_inverse(yf, s)


# -- associate functions ------------------------------------------------------

def _legendre(yf, s, t_grid):
    """sup_t (s t - A(t)) on a log grid, refined by golden section."""
    A = yf.eval_array(t_grid, saturate=True)
    vals = s[:, None] * t_grid[None, :] - A[None, :]
    k = np.argmax(vals, axis=1)
    lt = np.log(t_grid)
    lo = lt[np.maximum(k - 1, 0)]
    hi = lt[np.minimum(k + 1, t_grid.size - 1)]
    g = (math.sqrt(5) - 1) / 2

    def obj(x):
        t = np.exp(x)
        return s * t - yf.eval_array(t, saturate=True)

    for _ in range(100):
        c = hi - g * (hi - lo)
        d = lo + g * (hi - lo)
        left = obj(c) >= obj(d)
        hi = np.where(left, d, hi)
        lo = np.where(left, lo, c)
    best = np.maximum(obj(0.5 * (lo + hi)), vals[np.arange(s.size), k])
    return best


def _asymptotic_associate(yf):
    """Closed-form function equivalent to the associate at infinity."""
    base = yf.asymptotic if yf.kind == "tabulated" else yf
    if base is None:
        return None
    if base.kind == "power":
        return power(base.p / (base.p - 1))
    if base.kind == "power_log":
        if base.p == 1:
            return exp_minus_one()
        pp = base.p / (base.p - 1)
        return YoungFunction("power_log", p=pp, a=-base.a / (base.p - 1))
    if base.kind == "exp_minus_one":
        return YoungFunction("power_log", p=1.0, a=1.0)
    return None


def associate(yf: YoungFunction) -> YoungFunction:
    """Associate (complementary) Young function.

    ``power(p)`` maps to ``power(p')``.  ``exp_minus_one`` maps to a table of
    t log(e + t), which is equivalent to its Legendre conjugate.  Everything
    else gets a numeric Legendre conjugate tabulated on 2048 log-spaced
    points over [1e-6, 1e8].
    """
    lo, hi, npts = ASSOCIATE_GRID
    s = np.logspace(math.log10(lo), math.log10(hi), npts)
    if yf.kind == "power":
        out = power(yf.p / (yf.p - 1))
        # (A(t/c))^* (s) = A^*(c s)
        return out.dilate(1.0 / yf.scale) if yf.scale != 1.0 else out
    if yf.kind == "exp_minus_one":
        vals = s * np.log(math.e + s * yf.scale)
        return tabulated(s, vals, asymptotic=_asymptotic_associate(yf), label="assoc(expm1)")
    if yf.kind == "tabulated":
        if yf.ts.size < MIN_TABLE_POINTS:
            raise ResolutionError(
                f"tabulated input has {yf.ts.size} points, need >= {MIN_TABLE_POINTS}")
        t_grid = np.logspace(-12, math.log10(yf.ts[-1] * yf.scale), 6000)
    else:
        t_grid = np.logspace(-12, 14, 6000)
    vals = _legendre(yf, s, t_grid)
    vals = np.maximum.accumulate(np.maximum(vals, 1e-300))
    # strictly increasing for the table constructor
    bump = np.arange(vals.size) * 1e-15
    vals = vals * (1 + bump)
    asym = _asymptotic_associate(yf)
    if asym is not None and yf.scale != 1.0:
        asym = asym.dilate(1.0 / yf.scale)
    return tabulated(s, vals, asymptotic=asym, label=f"assoc({format_young(yf)})")


# -- B_p and B_{p,q} classes --------------------------------------------------

@dataclass
class ClassResult:
    in_class: bool
    integral_estimate: float
    method: str
    blocks: int = 0

    def __bool__(self):
        return self.in_class


def _simpson(f, a, b, fa, fm, fb, whole, tol, depth):
    m = 0.5 * (a + b)
    lm, rm = 0.5 * (a + m), 0.5 * (m + b)
    flm, frm = f(lm), f(rm)
    left = (m - a) / 6 * (fa + 4 * flm + fm)
    right = (b - m) / 6 * (fm + 4 * frm + fb)
    if depth <= 0 or abs(left + right - whole) <= 15 * tol:
        return left + right + (left + right - whole) / 15
    return (_simpson(f, a, m, fa, flm, fm, left, tol / 2, depth - 1)
            + _simpson(f, m, b, fm, frm, fb, right, tol / 2, depth - 1))


def adaptive_simpson(f, a, b, rtol=1e-10, depth=30):
    fa, fm, fb = f(a), f(0.5 * (a + b)), f(b)
    whole = (b - a) / 6 * (fa + 4 * fm + fb)
    if not math.isfinite(whole):
        return math.inf
    tol = max(rtol * abs(whole), 1e-300)
    return _simpson(f, a, b, fa, fm, fb, whole, tol, depth)


def _class_exponents(p, q):
    # integrand A(t)^{q/p} t^{-q} dt/t ; B_p is q = p
    q = p if q is None else q
    return q / p, q


def _closed_form_class(base, p, q):
    power_ratio, q_exp = _class_exponents(p, q)
    if base.kind == "exp_minus_one":
        return False
    r = base.p
    a = base.a if base.kind == "power_log" else 0.0
    # A^{q/p} t^{-q} ~ t^{r q/p - q} log^{a q/p}
    growth = r * power_ratio - q_exp
    if abs(growth) > 1e-12:
        return growth < 0
    return a * power_ratio < -1


def _quadrature(yf, p, q, t_cap=2.0 ** 60):
    power_ratio, q_exp = _class_exponents(p, q)

    def integrand(x):
        t = math.exp(x)
        A = float(yf.eval_array(np.asarray(t), saturate=True))
        if not math.isfinite(A):
            return math.inf
        if A == 0:
            return 0.0
        return math.exp(power_ratio * math.log(A) - q_exp * x)

    k_cap = int(math.floor(math.log2(t_cap) + 1e-9))
    total, prev, nondecreasing = 0.0, None, 0
    for k in range(k_cap):
        inc = adaptive_simpson(integrand, k * math.log(2), (k + 1) * math.log(2))
        if not math.isfinite(inc):
            return ClassResult(False, math.inf, "quadrature", k + 1)
        total += inc
        if k >= 9:
            if inc <= 1e-8 * total:
                return ClassResult(True, total, "quadrature", k + 1)
            if prev is not None and inc >= prev:
                nondecreasing += 1
                if nondecreasing >= 10:
                    return ClassResult(False, math.inf, "quadrature", k + 1)
            else:
                nondecreasing = 0
        prev = inc
    return ClassResult(False, total, "quadrature-exhausted", k_cap)


def _closed_form_estimate(base, p, q):
    """Block quadrature to 2^60 plus the analytic tail of t^{E-1} log(t)^F."""
    power_ratio, q_exp = _class_exponents(p, q)

    def integrand(x):
        A = float(base.eval_array(np.asarray(math.exp(x))))
        return math.exp(power_ratio * math.log(A) - q_exp * x) if A > 0 else 0.0

    total = sum(adaptive_simpson(integrand, k * math.log(2), (k + 1) * math.log(2))
                for k in range(60))
    E = base.p * power_ratio - q_exp
    F = (base.a if base.kind == "power_log" else 0.0) * power_ratio
    c = base.scale ** (-base.p * power_ratio)
    L = 60 * math.log(2)
    if E < -1e-12:
        tail = c * math.exp(E * L) * L ** F / (-E)
    else:
        tail = c * L ** (F + 1) / (-F - 1)
    return total + tail


def class_membership(yf: YoungFunction, p, q=None) -> ClassResult:
    """Membership of ``yf`` in B_p (or B_{p,q} when ``q`` is given)."""
    if not p > 1:
        raise ParameterError("class_membership needs p > 1")
    if q is not None and q < p:
        raise ParameterError("B_{p,q} needs q >= p")
    base = yf
    if yf.kind == "tabulated" and yf.asymptotic is not None:
        base = yf.asymptotic
    if base.kind != "tabulated":
        ok = _closed_form_class(base, p, q)
        est = _closed_form_estimate(base, p, q) if ok else math.inf
        return ClassResult(ok, est, "closed-form")
    t_end = float(yf.ts[-1] * yf.scale)
    res = _quadrature(yf, p, q, t_cap=min(2.0 ** 60, t_end))
    if res.method != "quadrature-exhausted" or t_end >= 2.0 ** 60:
        return res
    # table ends before 2^60: decide from the terminal log-log slope
    lt, lv = np.log(yf.ts), np.log(yf.values)
    r = (lv[-1] - lv[-9]) / (lt[-1] - lt[-9])
    power_ratio, q_exp = _class_exponents(p, q)
    growth = r * power_ratio - q_exp
    if growth < -1e-6:
        return ClassResult(True, res.integral_estimate, "quadrature+slope", res.blocks)
    return ClassResult(False, math.inf, "quadrature+slope", res.blocks)


# -- generalized Hölder -------------------------------------------------------

def holder_product_ratio(factors: Sequence[YoungFunction], target: YoungFunction,
                         fns, Q) -> float:
    """||f_1...f_n||_{C,Q} / (n prod ||f_i||_{A_i,Q}); at most 1 when the
    inverse-compatibility hypothesis holds."""
    from .field import luxemburg_norm, GridFunction

    if len(factors) != len(fns) or not factors:
        raise ParameterError("need matching, non-empty factor and function lists")
    for t in HYPOTHESIS_POINTS:
        lhs = math.prod(inverse(A, t) for A in factors)
        rhs = inverse(target, t)
        if lhs > rhs * (1 + 1e-12):
            raise HypothesisViolation(
                f"prod A_i^-1({t:g}) = {lhs:.6g} > C^-1({t:g}) = {rhs:.6g}", t)
    prod = np.ones_like(fns[0].values)
    for g in fns:
        prod = prod * g.values
    joint = GridFunction(fns[0].lattice, prod)
    den = len(fns) * math.prod(luxemburg_norm(g, A, Q) for g, A in zip(fns, factors))
    num = luxemburg_norm(joint, target, Q)
    if den == 0:
        return 0.0 if num == 0 else math.inf
    return num / den


# -- text form ----------------------------------------------------------------

def _fmt(x):
    return repr(float(x)).rstrip("0").rstrip(".") if float(x) != int(x) else str(int(x))


def format_young(yf: YoungFunction) -> str:
    extra = f",scale={_fmt(yf.scale)}" if yf.scale != 1.0 else ""
    if yf.kind == "power":
        return f"power:p={_fmt(yf.p)}{extra}"
    if yf.kind == "power_log":
        return f"powerlog:p={_fmt(yf.p)},a={_fmt(yf.a)}{extra}"
    if yf.kind == "exp_minus_one":
        return "expm1" + (f":scale={_fmt(yf.scale)}" if extra else "")
    return f"table:{yf.label or '<memory>'}"


def _kv(body):
    out = {}
    for part in filter(None, body.split(",")):
        k, _, v = part.partition("=")
        out[k.strip()] = float(v)
    return out


def parse_young(text: str, base_dir=None) -> YoungFunction:
    """Parse ``power:p=2``, ``powerlog:p=2,a=3.5``, ``expm1``, ``table:<csv>``."""
    text = text.strip()
    head, _, body = text.partition(":")
    if head == "table":
        path = Path(body)
        if base_dir is not None and not path.is_absolute():
            path = Path(base_dir) / path
        ts, vs = [], []
        with open(path, newline="") as fh:
            for row in csv.reader(fh):
                if not row or row[0].strip().lower() == "t":
                    continue
                ts.append(float(row[0]))
                vs.append(float(row[1]))
        return tabulated(ts, vs, label=str(body))
    kv = _kv(body)
    scale = kv.pop("scale", 1.0)
    if head == "power":
        yf = power(kv["p"])
    elif head == "powerlog":
        yf = power_log(kv["p"], kv["a"])
    elif head == "expm1":
        yf = exp_minus_one()
    else:
        raise ParameterError(f"unknown Young function form {text!r}")
    return yf.dilate(scale) if scale != 1.0 else yf
