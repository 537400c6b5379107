"""Command-line scenario runner.

Every subcommand builds a config dict of the same shape as a TOML config
file and hands it to :func:`run_config`.  Exit codes: 0 all checks pass,
1 a check failed, 2 the config or arguments could not be parsed, 3 a
precondition (class condition, parameter domain, ...) failed while running.
"""

from __future__ import annotations

import copy
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

import click
import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from . import __version__
from .bump import (
    PRESETS,
    adversarial_corpus,
    bump_constant,
    duality_chain_audit,
    norm_ratio,
    preset,
)
from .compactlab import kr_profile, scale_sample, weighted_tail_sum
from .errors import BumplabError, ClassConditionError
from .field import GridFunction, SymbolVector, parse_sample
from .lattice import build_lattice, family_to_json, shifted_lattices, sparsity_check
from .operators import LinearOp, hilbert, parse_op, potential
from .report import dumps, emit_all, emit_report
from .sparse import TauSubset, all_taus, build_family, domination_ratio, lift_family
from .young import class_membership, format_young, inverse, parse_young

SCENARIOS = ("bump-eval", "sparse-dominate", "norm-verify", "duality-audit", "compactness",
             "young-check")
SECTIONS = ("domain", "weights", "symbols", "young", "exponents", "checks")

EXIT_OK, EXIT_CHECK, EXIT_PARSE, EXIT_PRECONDITION = 0, 1, 2, 3


class ConfigError(Exception):
    """Config could not be parsed or refers to something that does not exist."""


# -- config resolution -----------------------------------------------------------

DEFAULTS: dict = {
    "seed": 0,
    "threads": 1,
    "op": None,
    "domain": {"box": [[-8.0, 8.0]], "depth": 9, "radii": [1.0, 2.0, 4.0],
               "shifts": [1.0, 2.0, 4.0, 8.0], "x0": 0.0},
    "weights": {"u": "sample:constant(c=1)", "v": None},
    "symbols": {"b": None, "m": 0, "f": None, "g": None, "tau": "all"},
    "young": {"preset": None, "delta": 0.1, "fn": None, "classes": []},
    "exponents": {"p": 2.0, "q": None, "alpha": 0.0, "s": None, "c_height": 1.0},
    "checks": {},
}


def load_config(path) -> dict:
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"invalid TOML in {path}: {exc}") from exc


def resolve_config(raw: dict, overrides: Optional[dict] = None) -> dict:
    """Fill defaults, apply global-flag overrides and validate basic types."""
    cfg = copy.deepcopy(DEFAULTS)
    for key, val in raw.items():
        if key in SECTIONS:
            if not isinstance(val, dict):
                raise ConfigError(f"[{key}] must be a table")
            cfg[key].update(val)
        elif key in ("scenario", "seed", "threads", "op", "name"):
            cfg[key] = val
        else:
            raise ConfigError(f"unknown config key {key!r}")
    for key, val in (overrides or {}).items():
        if val is None:
            continue
        if key == "depth":
            cfg["domain"]["depth"] = val
        else:
            cfg[key] = val
    scen = cfg.get("scenario")
    if scen not in SCENARIOS:
        raise ConfigError(f"scenario must be one of {', '.join(SCENARIOS)}; got {scen!r}")
    cfg.setdefault("name", scen)
    box = cfg["domain"]["box"]
    if box and isinstance(box[0], (int, float)):
        cfg["domain"]["box"] = [list(box)]
    ex = cfg["exponents"]
    try:
        for k in ("p", "alpha", "c_height"):
            ex[k] = float(ex[k])
        for k in ("q", "s"):
            ex[k] = None if ex[k] is None else float(ex[k])
        cfg["domain"]["depth"] = int(cfg["domain"]["depth"])
        cfg["symbols"]["m"] = int(cfg["symbols"]["m"])
        cfg["seed"] = int(cfg["seed"])
        cfg["threads"] = int(cfg["threads"])
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad numeric value in config: {exc}") from exc
    if cfg["young"]["preset"] is not None and cfg["young"]["preset"] not in PRESETS:
        raise ConfigError(f"unknown preset {cfg['young']['preset']!r}")
    return cfg


# -- object construction (failures here are parse errors) ---------------------------

@dataclass
class Built:
    lat: Any = None
    u: Optional[GridFunction] = None
    v: Optional[GridFunction] = None
    symbols: SymbolVector = field(default_factory=SymbolVector)
    f: Optional[GridFunction] = None
    g: Optional[GridFunction] = None
    op: Optional[LinearOp] = None


def _grid(text, lat, seed, what) -> GridFunction:
    try:
        return parse_sample(str(text), lat, seed)
    except (BumplabError, OSError, KeyError, ValueError) as exc:
        raise ConfigError(f"cannot build {what} from {text!r}: {exc}") from exc


def _default_op(alpha: float) -> LinearOp:
    return potential(alpha) if alpha > 0 else hilbert()


def build_objects(cfg: dict, need: tuple) -> Built:
    dom, sy, seed = cfg["domain"], cfg["symbols"], cfg["seed"]
    try:
        lat = build_lattice(dom["box"], dom["depth"])
    except BumplabError as exc:
        raise ConfigError(f"bad [domain]: {exc}") from exc
    out = Built(lat=lat)
    if "weights" in need:
        w = cfg["weights"]
        out.u = _grid(w["u"], lat, seed, "weight u")
        out.v = out.u if w["v"] is None else _grid(w["v"], lat, seed, "weight v")
        out.u = out.u.with_values(out.u.values, "weight")
        out.v = out.v.with_values(out.v.values, "weight")
    m = sy["m"]
    opspec = None
    if cfg["op"] is not None:
        try:
            opspec = parse_op(str(cfg["op"]))
        except (BumplabError, KeyError, ValueError) as exc:
            raise ConfigError(f"cannot parse operator {cfg['op']!r}: {exc}") from exc
        out.op = opspec.base
    elif "op" in need:
        out.op = _default_op(cfg["exponents"]["alpha"])
    b = sy["b"]
    if b is None and opspec is not None and opspec.symbol:
        b, m = opspec.symbol, max(m, opspec.m)
    if b is not None:
        if isinstance(b, list):
            syms = [_grid(t, lat, seed, f"symbol {i}") for i, t in enumerate(b)]
            if m and m != len(syms):
                raise ConfigError(f"m = {m} but {len(syms)} symbols given")
            out.symbols = SymbolVector(syms)
        else:
            out.symbols = SymbolVector.repeat(_grid(b, lat, seed, "symbol b"), m)
    elif m:
        raise ConfigError("m > 0 needs a symbol b")
    if "f" in need:
        out.f = _grid(sy["f"] or "sample:indicator(a=-1,b=1)", lat, seed, "function f")
    if "g" in need:
        out.g = _grid(sy["g"] or "sample:gaussian", lat, seed, "function g")
    return out


# -- checks ------------------------------------------------------------------------

def _check(checks: list, cid: str, passed: bool, **info) -> None:
    checks.append(dict(info, id=cid, passed=bool(passed)))


def _bound_checks(checks: list, cfg: dict, prefix: str, value: float) -> None:
    c = cfg["checks"]
    if "max_value" in c:
        _check(checks, f"{prefix}.max_value", value <= float(c["max_value"]),
               value=value, bound=float(c["max_value"]))
    if "min_value" in c:
        _check(checks, f"{prefix}.min_value", value >= float(c["min_value"]),
               value=value, bound=float(c["min_value"]))
    if "expect_value" in c:
        tgt, rtol = float(c["expect_value"]), float(c.get("rtol", 1e-9))
        _check(checks, f"{prefix}.expect_value", abs(value - tgt) <= rtol * max(abs(tgt), 1e-300),
               value=value, bound=tgt, rtol=rtol)


def _spec(cfg: dict, objs: Built, default: Optional[str]):
    name = cfg["young"]["preset"] or default
    if name is None:
        return None
    ex = cfg["exponents"]
    return preset(name, ex["p"], ex["q"], ex["alpha"], ex["s"], objs.symbols.m or cfg["symbols"]["m"],
                  float(cfg["young"]["delta"]), objs.symbols)


# -- scenarios ------------------------------------------------------------------------

def _class_label(p: float, q: Optional[float]) -> str:
    return f"in_B{p:g}" if q is None else f"in_B{p:g}_{q:g}"


def scenario_young_check(cfg: dict) -> dict:
    y = cfg["young"]
    if not y["fn"]:
        raise ConfigError("young-check needs [young] fn")
    try:
        yf = parse_young(str(y["fn"]))
    except (BumplabError, OSError, ValueError) as exc:
        raise ConfigError(f"cannot parse Young function {y['fn']!r}: {exc}") from exc
    classes = y["classes"] or [[cfg["exponents"]["p"]]]
    results, rows, checks = {"function": format_young(yf)}, [], []
    for cl in classes:
        cl = [cl] if isinstance(cl, (int, float)) else list(cl)
        p, q = float(cl[0]), (float(cl[1]) if len(cl) > 1 else None)
        res = class_membership(yf, p, q)
        label = _class_label(p, q)
        results[label] = bool(res.in_class)
        rows.append({"class": label, "p": p, "q": q, "in_class": bool(res.in_class),
                     "integral_estimate": res.integral_estimate, "method": res.method})
    for label in cfg["checks"].get("require_in", []):
        _check(checks, f"young.{label}", results.get(label) is True, label=label)
    for label in cfg["checks"].get("require_not_in", []):
        _check(checks, f"young.not_{label}", results.get(label) is False, label=label)
    ts = [1e-3, 1e-1, 1.0, 10.0, 1e3]
    values = [{"t": t, "A": float(yf(t)), "A_inverse": float(inverse(yf, t))} for t in ts]
    return {"results": results, "checks": checks, "tables": {"classes": rows, "values": values}}


def scenario_bump_eval(cfg: dict) -> dict:
    objs = build_objects(cfg, ("weights",))
    spec = _spec(cfg, objs, "thm11" if cfg["exponents"]["alpha"] == 0 else "thm12")
    res = bump_constant(objs.u, objs.v, spec)
    checks: list = []
    _bound_checks(checks, cfg, "bump", res.value)
    rows = [dict(r) for r in res.per_tau]
    return {"results": res.to_json(), "checks": checks,
            "tables": {"per_tau": rows, "class_checks": res.class_checks}}


def scenario_sparse_dominate(cfg: dict) -> dict:
    objs = build_objects(cfg, ("f", "op"))
    alpha = cfg["exponents"]["alpha"]
    fr = build_family(objs.op, objs.symbols, objs.f, C_height=cfg["exponents"]["c_height"],
                      alpha=alpha if objs.op.family == "potential" else 0.0)
    sp = sparsity_check(fr.family)
    fams = lift_family(fr.family)
    dom = domination_ratio(objs.op, objs.symbols, objs.f, fams,
                           alpha if objs.op.family == "potential" else 0.0)
    lats = shifted_lattices(objs.lat)
    checks: list = []
    _check(checks, "sparse.sparsity", sp.ok, worst_ratio=sp.worst_ratio, disjoint=sp.disjoint)
    if "max_ratio" in cfg["checks"]:
        bound = float(cfg["checks"]["max_ratio"])
        _check(checks, "sparse.max_ratio", dom.sup_ratio <= bound, value=dom.sup_ratio, bound=bound)
    _check(checks, "sparse.finite_ratio", bool(np.isfinite(dom.sup_ratio)), value=dom.sup_ratio)
    results = {
        "cube_count": len(fr.family), "C_height": fr.C_height, "doublings": fr.doublings,
        "max_e_mass": fr.max_e_mass,
        "sparsity": {"ok": sp.ok, "worst_ratio": sp.worst_ratio, "disjoint": sp.disjoint},
        "sup_ratio": dom.sup_ratio,
        "worst_cell": None if dom.worst_cell is None else list(dom.worst_cell),
    }
    ratio_rows = [{"family": i, "lattice_id": fam.lattice.lattice_id, "cube_count": len(fam)}
                  for i, fam in enumerate(fams)]
    return {"results": results, "checks": checks,
            "tables": {"levels": fr.per_level_log, "families": ratio_rows},
            "primary": "levels", "family": family_to_json(fr.family, lats)}


def scenario_norm_verify(cfg: dict) -> dict:
    objs = build_objects(cfg, ("weights", "op"))
    ex = cfg["exponents"]
    p = ex["p"]
    q = p if ex["q"] is None else ex["q"]
    spec = _spec(cfg, objs, None)
    K = argmax = None
    results: dict = {}
    if spec is not None:
        bres = bump_constant(objs.u, objs.v, spec)
        K, argmax = bres.value, bres.argmax_cube
        results["bump"] = bres.to_json()
    corpus = adversarial_corpus(objs.u, objs.v, p, argmax, op=objs.op, seed=cfg["seed"])
    nr = norm_ratio((objs.op, objs.symbols), objs.u, objs.v, p, q, corpus)
    results.update({"ratio": nr.best_ratio, "bump_value": K,
                    "ratio_over_bump": None if not K else nr.best_ratio / K,
                    "corpus_size": len(corpus)})
    checks: list = []
    c = cfg["checks"]
    if "max_ratio" in c:
        _check(checks, "norm.max_ratio", nr.best_ratio <= float(c["max_ratio"]),
               value=nr.best_ratio, bound=float(c["max_ratio"]))
    if "expect_ratio" in c:
        tgt, rtol = float(c["expect_ratio"]), float(c.get("rtol", 1e-9))
        _check(checks, "norm.expect_ratio", abs(nr.best_ratio - tgt) <= rtol * abs(tgt),
               value=nr.best_ratio, bound=tgt, rtol=rtol)
    if "max_ratio_over_bump" in c and K:
        bound = float(c["max_ratio_over_bump"])
        _check(checks, "norm.max_ratio_over_bump", nr.best_ratio / K <= bound,
               value=nr.best_ratio / K, bound=bound)
    return {"results": results, "checks": checks, "tables": {"per_f": nr.per_f}}


def _taus(cfg: dict, m: int) -> list:
    t = cfg["symbols"]["tau"]
    if t == "all":
        return all_taus(m)
    masks = t if isinstance(t, list) else [t]
    try:
        return [TauSubset(int(x), m) for x in masks]
    except (BumplabError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad tau {t!r}: {exc}") from exc


def scenario_duality_audit(cfg: dict) -> dict:
    objs = build_objects(cfg, ("weights", "f", "g", "op"))
    alpha = cfg["exponents"]["alpha"]
    spec = _spec(cfg, objs, "thm11" if alpha == 0 else "thm12")
    taus = _taus(cfg, objs.symbols.m)
    fr = build_family(objs.op, objs.symbols, objs.f, C_height=cfg["exponents"]["c_height"],
                      alpha=alpha if objs.op.family == "potential" else 0.0)
    rows, checks = [], []
    for tau in taus:
        for rec in duality_chain_audit(fr.family, objs.symbols, tau, alpha, objs.f, objs.g,
                                       spec, u=objs.u, v=objs.v):
            rows.append(dict(rec, tau=tau.label()))
            _check(checks, f"audit.tau{tau.label()}.step{rec['step']}", rec["ok"],
                   ratio=rec["ratio"], bound=rec["constant"])
    return {"results": {"cube_count": len(fr.family), "taus": [t.label() for t in taus],
                        "all_ok": all(r["ok"] for r in rows)},
            "checks": checks, "tables": {"steps": rows}}


def scenario_compactness(cfg: dict) -> dict:
    objs = build_objects(cfg, ("weights", "op"))
    ex, dom = cfg["exponents"], cfg["domain"]
    p = ex["p"]
    q = p if ex["q"] is None else ex["q"]
    sample = scale_sample(objs.lat, p, objs.v, float(dom["x0"]))
    radii = [float(r) for r in dom["radii"]]
    shifts = [float(h) for h in dom["shifts"]]
    prof = kr_profile((objs.op, objs.symbols), objs.u, objs.v, p, q, sample, radii, shifts)
    tail_note = weighted_tail_sum(objs.u, q, ex["alpha"])
    rows = ([{"kind": "tail", "x": r, "y": prof.tail[r]} for r in radii]
            + [{"kind": "modulus", "x": h, "y": prof.modulus[h]} for h in shifts])
    checks: list = []
    c = cfg["checks"]
    if "max_uniform_bound" in c:
        _check(checks, "compact.uniform_bound", prof.uniform_bound <= float(c["max_uniform_bound"]),
               value=prof.uniform_bound, bound=float(c["max_uniform_bound"]))
    if "max_tail_ratio" in c:
        worst = max((prof.tail[b] / prof.tail[a] for a, b in zip(radii, radii[1:])
                     if prof.tail[a] > 0), default=0.0)
        _check(checks, "compact.tail_decay", worst <= float(c["max_tail_ratio"]),
               value=worst, bound=float(c["max_tail_ratio"]))
    if "max_modulus_ratio" in c:
        hs = sorted(shifts)
        worst = max((prof.modulus[a] / prof.modulus[b] for a, b in zip(hs, hs[1:])
                     if prof.modulus[b] > 0), default=0.0)
        _check(checks, "compact.modulus_decay", worst <= float(c["max_modulus_ratio"]),
               value=worst, bound=float(c["max_modulus_ratio"]))
    return {"results": dict(prof.to_json(), tail_note=tail_note, sample_size=len(sample)),
            "checks": checks, "tables": {"profile": rows, "per_f": prof.per_f}}


SCENARIO_FUNCS: dict = {
    "young-check": scenario_young_check,
    "bump-eval": scenario_bump_eval,
    "sparse-dominate": scenario_sparse_dominate,
    "norm-verify": scenario_norm_verify,
    "duality-audit": scenario_duality_audit,
    "compactness": scenario_compactness,
}


# -- driver -------------------------------------------------------------------------

def execute(cfg: dict) -> dict:
    """Run a resolved config; returns the full report (config embedded)."""
    out = SCENARIO_FUNCS[cfg["scenario"]](cfg)
    out["scenario"] = cfg["scenario"]
    out["config"] = cfg
    out["passed"] = all(c["passed"] for c in out["checks"])
    return out


def write_outputs(report: dict, out_dir, stem: str, out: Optional[str] = None,
                  family_out: Optional[str] = None, table_out: Optional[str] = None) -> list:
    extra = {k: report.pop(k) for k in ("family",) if k in report}
    paths = []
    if out is not None:
        target = Path(out)
        paths = emit_all(report, target.parent, target.stem)
    else:
        paths = emit_all(report, out_dir, stem)
    if "family" in extra:
        fpath = Path(family_out) if family_out else Path(out_dir) / f"{stem}_family.json"
        fpath.parent.mkdir(parents=True, exist_ok=True)
        fpath.write_text(dumps(extra["family"]))
        paths.append(fpath)
    if table_out is not None:
        name = report.get("primary") or sorted(report["tables"])[0]
        paths.append(emit_report(report, table_out, "csv", name))
    return paths


def run_config(raw: dict, obj: dict, out: Optional[str] = None,
               family_out: Optional[str] = None, table_out: Optional[str] = None) -> int:
    """Resolve, run and report; returns the process exit status."""
    overrides = {k: obj.get(k) for k in ("seed", "depth", "threads")}
    try:
        cfg = resolve_config(raw, overrides)
    except ConfigError as exc:
        click.echo(f"parse error: {exc}", err=True)
        return EXIT_PARSE
    try:
        report = execute(cfg)
    except ConfigError as exc:
        click.echo(f"parse error: {exc}", err=True)
        return EXIT_PARSE
    except ClassConditionError as exc:
        click.echo(f"precondition failed: ClassConditionError [{exc.failing_class}]: {exc}", err=True)
        return EXIT_PRECONDITION
    except BumplabError as exc:
        click.echo(f"precondition failed: {type(exc).__name__}: {exc}", err=True)
        return EXIT_PRECONDITION
    paths = write_outputs(report, obj.get("out_dir") or ".", cfg["name"], out, family_out, table_out)
    for p in paths:
        click.echo(f"wrote {p}")
    failed = [c["id"] for c in report["checks"] if not c["passed"]]
    if failed:
        for cid in failed:
            click.echo(f"check failed: {cid}", err=True)
        return EXIT_CHECK
    click.echo(f"ok: {len(report['checks'])} checks passed")
    return EXIT_OK


# -- click wiring ---------------------------------------------------------------------

def _floats(text: Optional[str]) -> Optional[list]:
    if text is None:
        return None
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise click.BadParameter(f"expected comma-separated numbers, got {text!r}") from exc


def _finish(ctx: click.Context, raw: dict, **kw) -> None:
    ctx.exit(run_config(raw, ctx.obj, **kw))


def _prune(d: dict) -> dict:
    return {k: v for k, v in d.items() if v is not None}


@click.group()
@click.version_option(__version__, prog_name="bumplab")
@click.option("--seed", type=int, default=None, help="Seed for random samples.")
@click.option("--depth", type=int, default=None, help="Grid depth (2**depth cells per axis).")
@click.option("--threads", type=int, default=None, help="Worker cap (runs are sequential).")
@click.option("--out-dir", type=click.Path(file_okay=False), default=".", help="Report directory.")
@click.pass_context
def main(ctx: click.Context, seed, depth, threads, out_dir) -> None:
    """Numerical checks of bump conditions, sparse bounds and commutators."""
    ctx.obj = {"seed": seed, "depth": depth, "threads": threads, "out_dir": out_dir}


@main.command("run")
@click.argument("config", type=click.Path(dir_okay=False))
@click.pass_context
def run_cmd(ctx: click.Context, config: str) -> None:
    """Run the scenario described by a TOML config."""
    try:
        raw = load_config(config)
    except ConfigError as exc:
        click.echo(f"parse error: {exc}", err=True)
        ctx.exit(EXIT_PARSE)
    _finish(ctx, raw)


@main.command("young-check")
@click.option("--fn", "fn", required=True, help="Young function, e.g. powerlog:p=2,a=-1.5.")
@click.option("--class", "classes", multiple=True, help="Class p or p,q; repeatable.")
@click.option("--require", multiple=True, help="Label that must hold, e.g. in_B2.")
@click.pass_context
def young_check_cmd(ctx, fn, classes, require) -> None:
    """B_p / B_{p,q} membership of one Young function."""
    cl = [_floats(c) for c in classes] or [[2.0]]
    raw = {"scenario": "young-check", "young": {"fn": fn, "classes": cl},
           "checks": {"require_in": list(require)} if require else {}}
    _finish(ctx, raw)


_weight_opts = [
    click.option("--u", default="sample:constant(c=1)", help="Weight u (sample:... or CSV)."),
    click.option("--v", default=None, help="Weight v; defaults to u."),
]
_exp_opts = [
    click.option("--p", type=float, default=2.0),
    click.option("--q", type=float, default=None),
    click.option("--alpha", type=float, default=0.0),
    click.option("--s", type=float, default=None),
    click.option("--m", type=int, default=0),
    click.option("--b", default=None, help="Symbol b (sample:...), repeated m times."),
    click.option("--box", default="-8,8", help="Interval lo,hi (1-D) of the domain."),
]


def _apply(opts):
    def deco(fn):
        for o in reversed(opts):
            fn = o(fn)
        return fn
    return deco


def _base_raw(scenario, u, v, p, q, alpha, s, m, b, box) -> dict:
    return {"scenario": scenario,
            "domain": {"box": [_floats(box)]},
            "weights": _prune({"u": u, "v": v}),
            "symbols": _prune({"b": b, "m": m}),
            "exponents": _prune({"p": p, "q": q, "alpha": alpha, "s": s})}


@main.group("bump")
def bump_group() -> None:
    """Bump constants."""


@bump_group.command("eval")
@_apply(_weight_opts + _exp_opts)
@click.option("--preset", "preset_name", type=click.Choice(PRESETS), default="thm11")
@click.option("--delta", type=float, default=0.1)
@click.option("--max-value", type=float, default=None)
@click.option("--out", default=None, help="JSON report path.")
@click.pass_context
def bump_eval_cmd(ctx, u, v, p, q, alpha, s, m, b, box, preset_name, delta, max_value, out) -> None:
    """Evaluate a two-weight bump constant."""
    raw = _base_raw("bump-eval", u, v, p, q, alpha, s, m, b, box)
    raw["young"] = {"preset": preset_name, "delta": delta}
    raw["checks"] = _prune({"max_value": max_value})
    _finish(ctx, raw, out=out)


@main.group("sparse")
def sparse_group() -> None:
    """Sparse families."""


@sparse_group.command("dominate")
@click.option("--op", "op", default=None, help="Operator, e.g. op:riesz(alpha=0.5).")
@click.option("--b", default=None)
@click.option("--m", type=int, default=0)
@click.option("--f", "f", default="sample:indicator(a=-1,b=1)")
@click.option("--alpha", type=float, default=0.0)
@click.option("--c-height", type=float, default=1.0)
@click.option("--box", default="-8,8")
@click.option("--max-ratio", type=float, default=None)
@click.option("--out", "outs", nargs=2, default=None, metavar="FAMILY.json REPORT.csv")
@click.pass_context
def sparse_dominate_cmd(ctx, op, b, m, f, alpha, c_height, box, max_ratio, outs) -> None:
    """Build a sparse family and measure the domination ratio."""
    raw = {"scenario": "sparse-dominate", "domain": {"box": [_floats(box)]},
           "symbols": _prune({"b": b, "m": m, "f": f}),
           "exponents": {"alpha": alpha, "c_height": c_height},
           "checks": _prune({"max_ratio": max_ratio})}
    if op is not None:
        raw["op"] = op
    kw = {"family_out": outs[0], "table_out": outs[1]} if outs else {}
    _finish(ctx, raw, **kw)


@main.command("norm-verify")
@click.option("--op", "op", default="op:hilbert.pv")
@_apply(_weight_opts + _exp_opts)
@click.option("--preset", "preset_name", type=click.Choice(PRESETS), default=None)
@click.option("--max-ratio", type=float, default=None)
@click.option("--out", default=None)
@click.pass_context
def norm_verify_cmd(ctx, op, u, v, p, q, alpha, s, m, b, box, preset_name, max_ratio, out) -> None:
    """Empirical L^p(v) -> L^q(u) norm over the adversarial corpus."""
    raw = _base_raw("norm-verify", u, v, p, q, alpha, s, m, b, box)
    raw["op"] = op
    raw["young"] = _prune({"preset": preset_name})
    raw["checks"] = _prune({"max_ratio": max_ratio})
    _finish(ctx, raw, out=out)


@main.command("duality-audit")
@click.option("--op", "op", default=None)
@_apply(_weight_opts + _exp_opts)
@click.option("--f", "f", default=None)
@click.option("--g", "g", default=None)
@click.option("--tau", default="all", help="Bitmask of τ, or 'all'.")
@click.option("--preset", "preset_name", type=click.Choice(PRESETS), default=None)
@click.option("--out", default=None)
@click.pass_context
def duality_audit_cmd(ctx, op, u, v, p, q, alpha, s, m, b, box, f, g, tau, preset_name, out) -> None:
    """Both sides of every step of the duality chain."""
    raw = _base_raw("duality-audit", u, v, p, q, alpha, s, m, b, box)
    raw["symbols"].update(_prune({"f": f, "g": g, "tau": tau if tau == "all" else int(tau)}))
    raw["young"] = _prune({"preset": preset_name})
    if op is not None:
        raw["op"] = op
    _finish(ctx, raw, out=out)


@main.command("compactness")
@click.option("--op", "op", default="op:hilbert.pv")
@click.option("--b", default=None)
@click.option("--m", type=int, default=1)
@click.option("--weights", default="sample:constant(c=1)", help="Weight used for u = v.")
@click.option("--p", type=float, default=2.0)
@click.option("--q", type=float, default=None)
@click.option("--radii", default="1,2,4")
@click.option("--shifts", default="1,2,4,8")
@click.option("--x0", type=float, default=0.0)
@click.option("--box", default="-8,8")
@click.option("--out", default=None)
@click.pass_context
def compactness_cmd(ctx, op, b, m, weights, p, q, radii, shifts, x0, box, out) -> None:
    """Tail and translation-modulus profile of a commutator."""
    raw = {"scenario": "compactness", "op": op,
           "domain": {"box": [_floats(box)], "radii": _floats(radii), "shifts": _floats(shifts),
                      "x0": x0},
           "weights": {"u": weights},
           "symbols": _prune({"b": b, "m": m if b is not None else 0}),
           "exponents": _prune({"p": p, "q": q})}
    _finish(ctx, raw, out=out)


if __name__ == "__main__":  # pragma: no cover
    main()
