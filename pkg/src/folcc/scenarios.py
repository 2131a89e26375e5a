"""Scenario configuration: presentations, candidates and checks in TOML.

A scenario file looks like::

    name = "resilient"
    description = "R modulo x+1 and x/2"

    [charts.R]
    interval = ["-inf", "inf"]
    window = [-4, 4]            # sampling window on unbounded charts

    [[generators]]
    name = "shift"
    map = "x + 1"               # map spec, see parse_map_spec
    source = "R"
    target = "R"

    [[checks]]
    kind = "affine"
    candidate = { R = "0" }

Numbers may be written as expression strings (``"sqrt(2)"``, ``"-inf"``).
See ``docs/scenarios.md`` for every check kind.
"""

from dataclasses import dataclass, field
import importlib.resources
import math
import sys

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from . import connections as cn
from . import dynamics as dyn
from . import expr as ex
from . import frames as fr
from . import gf
from . import szekeres as sz
from .diffeo import (Generator, LocalDiffeo, PseudogroupPresentation, reeb_holonomy,
                     reeb_mirror_holonomy)
from .errors import ConfigError, FolccError, ParseError

SCHEMA = "folcc-report/1"
MAP_KINDS = ("expr", "lift", "conj", "reeb", "reeb-mirror")


def number(value):
    """Float from a TOML number or an expression string (``inf`` allowed)."""
    if isinstance(value, (int, float)):
        return float(value)
    if isinstance(value, str):
        text = value.strip().lower()
        if text in ("inf", "+inf", "infinity"):
            return math.inf
        if text in ("-inf", "-infinity"):
            return -math.inf
        try:
            return float(ex.evaluate(ex.parse(value), 0))
        except ParseError as exc:
            raise ConfigError(f"bad number {value!r}: {exc}") from exc
    raise ConfigError(f"expected a number, got {value!r}")


def parse_map_spec(spec, domain=None, lift=False, name=None):
    """Build a :class:`LocalDiffeo` from ``[kind:]body``.

    ``expr:BODY``
        closed form (the default when no kind is given);
    ``lift:BODY``
        lift of a circle map, checked for ``F(z+1) = F(z)+1``;
    ``conj:PROFILE | SHIFT``
        ``f^{-1}(f(x) + SHIFT)``;
    ``reeb:PROFILE`` / ``reeb-mirror:PROFILE``
        the two Reeb holonomy maps on ``(0, sqrt 2)`` (empty profile: the sample).
    """
    text = spec.strip()
    kind, body = "expr", text
    head, sep, rest = text.partition(":")
    if sep and head.strip() in MAP_KINDS:
        kind, body = head.strip(), rest.strip()
    dom = tuple(number(v) for v in domain) if domain is not None else (-math.inf, math.inf)
    try:
        if kind == "expr":
            return LocalDiffeo("explicit", expr=body, domain=dom, name=name, lift=lift)
        if kind == "lift":
            return LocalDiffeo("lift", expr=body, name=name)
        if kind == "conj":
            profile, bar, shift = body.partition("|")
            if not bar:
                raise ConfigError(f"conj map needs 'PROFILE | SHIFT', got {body!r}")
            return LocalDiffeo.conjugated_shift(profile.strip(), number(shift.strip()), dom,
                                                name=name, lift=lift)
        profile = body or dyn.REEB_PROFILE
        if kind == "reeb":
            return reeb_holonomy(profile, name=name or "phi")
        return reeb_mirror_holonomy(profile, name=name or "psi")
    except ParseError as exc:
        raise ConfigError(f"cannot parse map {spec!r}: {exc}") from exc


@dataclass
class ScenarioConfig:
    name: str
    description: str
    presentation: PseudogroupPresentation
    checks: list
    tolerances: dict = field(default_factory=dict)
    output: str = None


def _table(data, key, kind=dict, required=True):
    if key not in data:
        if required:
            raise ConfigError(f"missing key {key!r}")
        return kind()
    value = data[key]
    if not isinstance(value, kind):
        raise ConfigError(f"key {key!r} must be a {kind.__name__}")
    return value


def config_from_dict(data):
    name = data.get("name")
    if not isinstance(name, str) or not name:
        raise ConfigError("scenario needs a non-empty 'name'")
    charts, windows = {}, {}
    for cname, spec in _table(data, "charts").items():
        if not isinstance(spec, dict) or "interval" not in spec:
            raise ConfigError(f"chart {cname!r} needs an 'interval'")
        lo, hi = (number(v) for v in spec["interval"])
        if not lo < hi:
            raise ConfigError(f"chart {cname!r} has an empty interval")
        charts[cname] = (lo, hi)
        if "window" in spec:
            windows[cname] = tuple(number(v) for v in spec["window"])
    gens = []
    for g in _table(data, "generators", list, required=False):
        for key in ("name", "map", "source", "target"):
            if key not in g:
                raise ConfigError(f"generator needs {key!r}: {g!r}")
        diffeo = parse_map_spec(g["map"], g.get("domain"), bool(g.get("lift", False)), g["name"])
        gens.append(Generator(g["name"], diffeo, g["source"], g["target"]))
    pres = PseudogroupPresentation(charts, gens, name, data.get("description", ""), windows)
    checks = _table(data, "checks", list, required=False)
    for c in checks:
        if not isinstance(c, dict) or c.get("kind") not in CHECKS:
            raise ConfigError(f"unknown check {c!r}; known kinds: {sorted(CHECKS)}")
        for key in ("candidate",):
            if key in c:
                for chart, e in c[key].items():
                    try:
                        ex.parse(e)
                    except ParseError as exc:
                        raise ConfigError(f"candidate on {chart!r} does not parse: {exc}") from exc
    return ScenarioConfig(name, data.get("description", ""), pres, checks,
                          dict(data.get("tolerances", {})), data.get("output"))


def load_config(path):
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"invalid TOML in {path}: {exc}") from exc
    return config_from_dict(data)


def builtin_names():
    files = importlib.resources.files("folcc") / "data"
    return sorted(p.name[:-5] for p in files.iterdir() if p.name.endswith(".toml"))


def load_builtin(name):
    path = importlib.resources.files("folcc") / "data" / f"{name}.toml"
    if not path.is_file():
        raise ConfigError(f"unknown scenario {name!r}; built-ins: {builtin_names()}")
    try:
        return config_from_dict(tomllib.loads(path.read_text()))
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"invalid built-in scenario {name!r}: {exc}") from exc


def resolve(name_or_path):
    if name_or_path.endswith(".toml"):
        return load_config(name_or_path)
    return load_builtin(name_or_path)


# -- checks -------------------------------------------------------------------------


def _generator(cfg, name):
    for g in cfg.presentation.generators:
        if g.name == name:
            return g
    raise ConfigError(f"check refers to unknown generator {name!r}")


def _tol(check, cfg, key, default, override=None):
    if override is not None:
        return override
    return float(check.get("tol", cfg.tolerances.get(key, default)))


def _check_affine(cfg, check, ctx):
    charts = list(cfg.presentation.charts)
    if "conjugacy" in check:
        cand = cn.connection_from_conjugacy(check["conjugacy"], charts)
    else:
        cand = cn.ConnectionCandidate("affine", check.get("candidate", {c: "0" for c in charts}))
    rep = cn.verify_affine_connection(cfg.presentation, cand, int(check.get("samples", 256)),
                                      float(check.get("trim", 0.01)),
                                      _tol(check, cfg, "connection", 1e-8, ctx["tol"]))
    return rep["passed"], rep


def _check_projective(cfg, check, ctx):
    charts = list(cfg.presentation.charts)
    cand = cn.ConnectionCandidate("projective", check.get("candidate", {c: "0" for c in charts}))
    rep = cn.verify_projective_connection(cfg.presentation, cand, int(check.get("samples", 256)),
                                          float(check.get("trim", 0.01)),
                                          _tol(check, cfg, "connection", 1e-8, ctx["tol"]))
    return rep["passed"], rep


def _check_identities(cfg, check, ctx):
    rep = fr.structure_identities()
    return all(v["ok"] for v in rep.values()), {"identities": rep}


def reeb_summary(rep):
    """Qualitative targets of the probe: decreasing ratios, growing ``ln f'``,
    vanishing ``ln f' / f`` and ``ln f' > 50`` somewhere in the tail."""
    rows = rep.rows
    out = {"profile valid": rep.valid}
    for k in ("2", "3", "4"):
        vals = [r["ratios"][k] for r in rows]
        out[f"ratio {k} decreasing"] = all(b < a for a, b in zip(vals, vals[1:]))
    everything = rows + rep.tail
    logs = [r["ln_fprime"] for r in everything]
    out["ln f' increasing"] = all(b > a for a, b in zip(logs, logs[1:]))
    out["ln f' exceeds 50"] = max(logs) > 50
    quot = [r["ln_fprime_over_f"] for r in everything]
    out["ln f'/f decreasing"] = all(b < a for a, b in zip(quot, quot[1:]))
    out["ln f'/f small at the end"] = quot[-1] < 1e-6
    return out


def _check_reeb_probe(cfg, check, ctx):
    rep = dyn.reeb_probe(check.get("profile", dyn.REEB_PROFILE), int(check.get("n_max", 12)))
    summary = reeb_summary(rep)
    return all(summary.values()), {"summary": summary, "probe": rep.to_json()}


def _check_fixed_points(cfg, check, ctx):
    gen = _generator(cfg, check["generator"])
    tol = float(check.get("tol", 1e-9))
    pts = dyn.classify_fixed_points(gen.diffeo, tol=tol)
    found = [p.to_json() for p in pts]
    ok = True
    matched = []
    for want in check.get("expect", []):
        hit = None
        for p in pts:
            if abs(p.point - number(want["point"])) <= float(want.get("tol", 1e-6)):
                hit = p
        good = hit is not None
        if good and "class" in want:
            good &= hit.kind == want["class"]
        if good and "semi_isolated" in want:
            good &= hit.semi_isolated == want["semi_isolated"]
        matched.append({"expect": want, "matched": good})
        ok &= good
    return ok, {"generator": gen.name, "fixed_points": found, "expectations": matched}


def _check_rotation(cfg, check, ctx):
    gen = _generator(cfg, check["generator"])
    it = int(check.get("iterations", 100000))
    est = dyn.rotation_number(gen.diffeo, it, number(check.get("seed_point", 0.0)),
                              check.get("method", "auto"))
    rep = {"estimate": est.to_json()}
    ok = True
    if "alpha" in check:
        err = dyn.circle_distance(est.rho, number(check["alpha"]))
        rep["error"] = err
        ok = err <= est.bound
    return ok, rep


def _check_conjugacy(cfg, check, ctx):
    gen = _generator(cfg, check["generator"])
    f = LocalDiffeo.explicit(check["conjugacy"])
    rep = dyn.verify_conjugacy(gen.diffeo, f, number(check["alpha"]))
    return rep["max_residual"] <= _tol(check, cfg, "conjugacy", 1e-9, ctx["tol"]), rep


def _check_szekeres(cfg, check, ctx):
    xs = [number(v) for v in check.get("x", [0.1, 0.2, 0.5])]
    tol = _tol(check, cfg, "szekeres", 1e-8, ctx["tol"])
    rows = {}
    ok = True
    for n in range(1, int(check.get("n", 4)) + 1):
        r = sz.verify_szekeres_identity(check["field"], n, xs, check.get("profile"))
        rows[str(n)] = r
        ok &= r["max_residual"] <= tol
    return ok, {"field": check["field"], "orders": rows}


def _check_flow(cfg, check, ctx):
    gen = _generator(cfg, check["generator"])
    rep = sz.flow_check(gen.diffeo, check["field"],
                        x_samples=[number(v) for v in check.get("x", [0.05, 0.2, 0.35, 0.5])],
                        fixed_point=number(check.get("fixed_point", 0.0)))
    return sz.flow_check_passes(rep), rep


def _check_invariance(cfg, check, ctx):
    seed = ctx["seed"] if ctx["seed"] is not None else int(check.get("seed", 0))
    order = ctx["jet_order"] or int(check.get("order", 5))
    rep = fr.invariance_sweep(int(check.get("count", 20)), seed, order)
    tol = _tol(check, cfg, "invariance", 1e-9, ctx["tol"])
    return rep["max_invariance_residual"] <= tol and rep["max_theta_mismatch"] <= tol, rep


def _check_diophantine(cfg, check, ctx):
    rep = dyn.diophantine_exponent(check["alpha"], int(check.get("cap", 10**6)))
    ok = True
    if "max_exponent" in check:
        ok = rep.exponent <= float(check["max_exponent"])
    if "liouville" in check:
        ok &= rep.liouville_suspect == bool(check["liouville"])
    return ok, rep.to_json()


def _check_gf(cfg, check, ctx):
    try:
        flavor = gf.flavor(check.get("flavor", "full"), check.get("max_index"))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    lo, hi = check.get("weights", [-2, 6])
    dims = {}
    for d in range(int(check.get("max_degree", 5)) + 1):
        dims[str(d)] = {str(w): v for w, v in gf.cohomology_dim(flavor, d, (lo, hi)).items()}
    ok = True
    if "expect_nonzero" in check:
        want = {(int(d), int(w)): int(v) for d, w, v in check["expect_nonzero"]}
        for d, row in dims.items():
            for w, v in row.items():
                ok &= v == want.get((int(d), int(w)), 0)
    return ok, {"flavor": str(flavor), "dims": dims}


def _check_presentation(cfg, check, ctx):
    bad = cfg.presentation.check_images(int(check.get("samples", 64)))
    return not bad, {"violations": [{"generator": g, "x": x, "image": y} for g, x, y in bad]}


CHECKS = {
    "affine": _check_affine,
    "projective": _check_projective,
    "identities": _check_identities,
    "reeb-probe": _check_reeb_probe,
    "fixed-points": _check_fixed_points,
    "rotation": _check_rotation,
    "conjugacy": _check_conjugacy,
    "szekeres": _check_szekeres,
    "flow": _check_flow,
    "invariance": _check_invariance,
    "gf-cohomology": _check_gf,
    "diophantine": _check_diophantine,
    "presentation": _check_presentation,
}


def run_scenario(cfg, seed=None, tol=None, jet_order=None, kinds=None):
    """Run every check (or those whose kind is in ``kinds``).

    Returns ``(exit_status, report)`` with status 0 when all checks pass and 1
    otherwise; configuration problems raise :class:`ConfigError`.
    """
    ctx = {"seed": seed, "tol": tol, "jet_order": jet_order}
    results = []
    for i, check in enumerate(cfg.checks):
        kind = check["kind"]
        if kinds is not None and kind not in kinds:
            continue
        label = check.get("name", f"{kind}#{i}")
        try:
            ok, detail = CHECKS[kind](cfg, check, ctx)
        except ConfigError:
            raise
        except KeyError as exc:
            raise ConfigError(f"check {label!r} is missing {exc}") from exc
        except FolccError as exc:
            ok, detail = False, {"error": f"{type(exc).__name__}: {exc}"}
        results.append({"name": label, "kind": kind, "passed": bool(ok), "detail": detail})
    passed = all(r["passed"] for r in results)
    report = {
        "schema": SCHEMA,
        "command": "scenario",
        "scenario": cfg.name,
        "description": cfg.description,
        "seed": seed,
        "presentation": {
            "charts": {c: list(v) for c, v in cfg.presentation.charts.items()},
            "generators": [{"name": g.name, "map": g.diffeo.describe(), "source": g.source,
                            "target": g.target} for g in cfg.presentation.generators],
        },
        "checks": results,
        "passed": passed,
    }
    return (0 if passed else 1), report
