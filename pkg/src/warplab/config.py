"""Sectioned text configuration for scenarios.

Config files are INI-style with the sections [manifold], [potential],
[conditions], [simulation], [coupling], [contractivity] and [suites].
Unknown sections and unknown keys are errors (no silent defaults for
typos); known keys left out take the documented defaults.  parse and
emit round-trip: parse_config(emit_config(s)) == s for every built-in.
"""

from __future__ import annotations

import configparser
import io
import math
from typing import Dict, Tuple

from .diffusion import SimConfig
from .errors import ConfigError
from .geometry import ScenarioConditions
from .scenarios import (SUITES, ContractivitySettings, CouplingSettings,
                        Scenario)

_SQRT2P1 = 1.0 + math.sqrt(2.0)

# (kind, default, predicate, constraint text); default REQUIRED means
# the key must be present
_REQUIRED = object()

_MANIFOLD_PARAMS = {
    "flat": (("dim", "int", 2, lambda x: x >= 2, "dim must be an integer >= 2"),),
    "hyperbolic": (("dim", "int", 2, lambda x: x >= 2, "dim must be an integer >= 2"),),
    "gauss_warp": (("k", "float", 1.0, lambda x: x > 0, "k must be > 0"),
                   ("dim", "int", 2, lambda x: x >= 2, "dim must be an integer >= 2")),
    "power_curv": (("alpha", "float", 3.0, lambda x: x > 1, "alpha must be > 1"),
                   ("eps", "float", 1.0e-4, lambda x: x > 0, "eps must be > 0"),
                   ("dim", "int", 2, lambda x: x >= 2, "dim must be an integer >= 2")),
}

_POTENTIAL_PARAMS = {
    "zero": (),
    "gaussian_well": (("delta", "float", _REQUIRED, lambda x: x > 0,
                       "delta must be > 0"),),
    "quad_sqrt_well": (("k", "float", 1.0, lambda x: x > 0, "k must be > 0"),
                       ("lam", "float", 1.0, lambda x: x >= 0,
                        "lam must be >= 0")),
    "power_well": (("alpha", "float", _REQUIRED, lambda x: x > 1,
                    "alpha must be > 1"),),
}

_CONDITION_KEYS = (
    ("sigma", "float", 0.0, lambda x: x >= 0, "sigma must be >= 0"),
    ("c", "float", 0.0, lambda x: x >= 0, "c must be >= 0"),
    ("delta", "float", 1.0, lambda x: x > 0, "delta must be > 0"),
    ("r0", "float", 0.0, lambda x: x >= 0, "r0 must be >= 0"),
    ("theta", "float", None, lambda x: 0 < x < 1.0 / _SQRT2P1,
     "theta must lie in (0, 1/(1+sqrt 2))"),
)

_SIMULATION_KEYS = (
    ("step", "float", 1.0e-3, lambda x: x > 0, "step must be > 0"),
    ("horizon", "float", 1.0, lambda x: x > 0, "horizon must be > 0"),
    ("paths", "int", 10000, lambda x: x > 0, "paths must be an integer > 0"),
    ("seed", "int", 12345, lambda x: x >= 0, "seed must be an integer >= 0"),
    ("pole_guard", "float", 1.0e-3, lambda x: x > 0,
     "pole_guard must be > 0"),
)

_COUPLING_KEYS = (
    ("schedule", "str", "quad", lambda x: x in ("quad", "growth"),
     "schedule must be quad or growth"),
    ("starts", "pairs", ((1.0, 3.0), (0.5, 4.0)),
     lambda x: all(a >= 0 and b >= 0 for a, b in x),
     "starts must be pairs of radii >= 0"),
    ("horizons", "floats", (1.0, 5.0), lambda x: all(t > 0 for t in x),
     "horizons must be > 0"),
    ("xi_mode", "str", "schedule",
     lambda x: x in ("schedule", "zero", "const"),
     "xi_mode must be schedule, zero or const"),
    ("alpha", "float", 2.0, lambda x: x > 1, "alpha must be > 1"),
)

_CONTRACTIVITY_KEYS = (
    ("phi", "str", "none", lambda x: x in ("none", "power"),
     "phi must be none or power"),
    ("alpha", "float", 3.0, lambda x: x > 1, "alpha must be > 1"),
    ("epsilon", "float", 1.0e-4, lambda x: x >= 0, "epsilon must be >= 0"),
    ("theta", "float", 0.9 / _SQRT2P1, lambda x: 0 < x < 1.0 / _SQRT2P1,
     "theta must lie in (0, 1/(1+sqrt 2))"),
    ("lambda_grid", "floats", (0.5, 1.0, 2.0, 5.0, 10.0),
     lambda x: all(v > 0 for v in x), "lambda_grid must be > 0"),
    ("t_grid", "floats", (0.25, 1.0, 4.0), lambda x: all(v > 0 for v in x),
     "t_grid must be > 0"),
)

_SUITE_KEYS = (
    ("name", "str", "custom", lambda x: len(x) > 0, "name must be nonempty"),
    ("run", "suites", SUITES, lambda x: True, ""),
    ("expect_fail", "strs", (), lambda x: True, ""),
)

_SECTIONS = ("manifold", "potential", "conditions", "simulation",
             "coupling", "contractivity", "suites")


def _parse_value(key: str, kind: str, raw: str):
    raw = raw.strip()
    try:
        if kind == "int":
            return int(raw)
        if kind == "float":
            return float(raw)
        if kind == "str":
            return raw
        if kind == "floats":
            return tuple(float(t) for t in raw.replace(",", " ").split())
        if kind == "strs":
            return tuple(raw.split())
        if kind == "suites":
            items = tuple(raw.split())
            if items == ("all",):
                return SUITES
            return items
        if kind == "pairs":
            pairs = []
            for chunk in raw.split(";"):
                chunk = chunk.strip()
                if not chunk:
                    continue
                parts = chunk.replace(",", " ").split()
                if len(parts) != 2:
                    raise ValueError(chunk)
                pairs.append((float(parts[0]), float(parts[1])))
            return tuple(pairs)
    except ValueError:
        raise ConfigError(f"key {key!r}: cannot parse {raw!r} as {kind}")
    raise ConfigError(f"internal: unknown kind {kind!r}")


def _read_section(cp, section: str, spec, context: str) -> dict:
    present = dict(cp[section]) if cp.has_section(section) else {}
    known = {k[0] for k in spec}
    for key in present:
        if key not in known:
            raise ConfigError(
                f"unknown key {key!r} in [{section}]; known keys: "
                f"{', '.join(sorted(known)) or '(none)'}")
    out = {}
    for key, kind, default, pred, constraint in spec:
        if key in present:
            val = _parse_value(key, kind, present[key])
        else:
            if default is _REQUIRED:
                raise ConfigError(
                    f"[{section}] for {context} requires key {key!r}")
            val = default
        if val is not None and not pred(val):
            raise ConfigError(f"key {key!r}: {constraint}; got {val!r}")
        out[key] = val
    return out


def parse_config(text: str) -> Scenario:
    """Parse sectioned config text into a validated Scenario."""
    cp = configparser.ConfigParser(interpolation=None, strict=True)
    cp.optionxform = str
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"config parse error: {exc}") from exc
    for section in cp.sections():
        if section not in _SECTIONS:
            raise ConfigError(f"unknown section [{section}]; known: "
                              + ", ".join(f"[{s}]" for s in _SECTIONS))

    if not cp.has_section("manifold") or "name" not in cp["manifold"]:
        raise ConfigError("[manifold] section with key 'name' is required")
    mname = cp["manifold"]["name"].strip()
    if mname not in _MANIFOLD_PARAMS:
        raise ConfigError(f"unknown manifold {mname!r}; known: "
                          + ", ".join(sorted(_MANIFOLD_PARAMS)))
    spec = (("name", "str", mname, lambda x: True, ""),) \
        + _MANIFOLD_PARAMS[mname]
    mvals = _read_section(cp, "manifold", spec, mname)
    mvals.pop("name")

    if not cp.has_section("potential") or "name" not in cp["potential"]:
        raise ConfigError("[potential] section with key 'name' is required")
    pname = cp["potential"]["name"].strip()
    if pname not in _POTENTIAL_PARAMS:
        raise ConfigError(f"unknown potential {pname!r}; known: "
                          + ", ".join(sorted(_POTENTIAL_PARAMS)))
    spec = (("name", "str", pname, lambda x: True, ""),) \
        + _POTENTIAL_PARAMS[pname]
    pvals = _read_section(cp, "potential", spec, pname)
    pvals.pop("name")

    cvals = _read_section(cp, "conditions", _CONDITION_KEYS, "conditions")
    svals = _read_section(cp, "simulation", _SIMULATION_KEYS, "simulation")
    kvals = _read_section(cp, "coupling", _COUPLING_KEYS, "coupling")
    tvals = _read_section(cp, "contractivity", _CONTRACTIVITY_KEYS,
                          "contractivity")
    uvals = _read_section(cp, "suites", _SUITE_KEYS, "suites")

    return Scenario(
        name=uvals["name"],
        manifold=mname, manifold_params=mvals,
        potential=pname, potential_params=pvals,
        conditions=ScenarioConditions(**cvals),
        sim=SimConfig(**svals),
        coupling=CouplingSettings(**kvals),
        contractivity=ContractivitySettings(**tvals),
        suites=uvals["run"],
        expect_fail=uvals["expect_fail"],
    )


def _fmt(val) -> str:
    if isinstance(val, bool):
        return "true" if val else "false"
    if isinstance(val, float):
        return repr(val)
    if isinstance(val, tuple):
        if val and isinstance(val[0], tuple):
            return "; ".join(f"{repr(a)}, {repr(b)}" for a, b in val)
        return " ".join(_fmt(v) for v in val)
    return str(val)


def emit_config(s: Scenario) -> str:
    """Write a Scenario back to config text (inverse of parse_config)."""
    out = io.StringIO()

    def section(header, rows):
        out.write(f"[{header}]\n")
        for k, v in rows:
            out.write(f"{k} = {_fmt(v)}\n")
        out.write("\n")

    section("manifold", [("name", s.manifold)]
            + [(k, s.manifold_params[k])
               for k, *_ in _MANIFOLD_PARAMS[s.manifold]])
    section("potential", [("name", s.potential)]
            + [(k, s.potential_params[k])
               for k, *_ in _POTENTIAL_PARAMS[s.potential]])
    c = s.conditions
    crows = [("sigma", c.sigma), ("c", c.c), ("delta", c.delta),
             ("r0", c.r0)]
    if c.theta is not None:
        crows.append(("theta", c.theta))
    section("conditions", crows)
    section("simulation", [("step", s.sim.step), ("horizon", s.sim.horizon),
                           ("paths", s.sim.paths), ("seed", s.sim.seed),
                           ("pole_guard", s.sim.pole_guard)])
    k = s.coupling
    section("coupling", [("schedule", k.schedule), ("starts", k.starts),
                         ("horizons", k.horizons), ("xi_mode", k.xi_mode),
                         ("alpha", k.alpha)])
    t = s.contractivity
    section("contractivity", [("phi", t.phi), ("alpha", t.alpha),
                              ("epsilon", t.epsilon), ("theta", t.theta),
                              ("lambda_grid", t.lambda_grid),
                              ("t_grid", t.t_grid)])
    rows = [("name", s.name), ("run", s.suites)]
    if s.expect_fail:
        rows.append(("expect_fail", s.expect_fail))
    section("suites", rows)
    return out.getvalue()
