"""Run configuration for the command line: parsing, defaults, overrides,
and the horizon normalization that brings every run onto T = 1.

A run is described by a JSON file with the top-level keys `domain`,
`certificate`, `sim`, `command` and `output`.  Command-line flags mirror the
key paths (`--sim.seed 7`) and override file values.  Parsing either
succeeds completely or fails with a message anchored to the offending
field; the fully expanded configuration (defaults included) is embedded in
every report so a run can be reproduced from its own output.
"""

from __future__ import annotations

import copy
import json
import math

import numpy as np

from .closedform import Polyline
from .domains import VectorPolyline
from . import domains

__all__ = [
    "ConfigError",
    "DEFAULTS",
    "load_config",
    "parse_overrides",
    "apply_overrides",
    "build_domain",
    "normalize_domain",
    "certificate_to_json",
]


class ConfigError(ValueError):
    """Invalid run configuration; the message names the offending field."""


DEFAULTS = {
    "certificate": {"K": None, "beta": None, "gamma": None, "v0": None},
    "sim": {
        "n_paths": 100_000,
        "n_steps": 1024,
        "seed": 0,
        "bridge_correction": True,
        "threads": None,
    },
    "command": {
        "eps": [0.01],
        "bins": 50,
        "gamma_n": 100_000,
        "lipschitz_refine_until": 0.01,
    },
    "output": None,
}

_TOP_KEYS = ("domain", "certificate", "sim", "command", "output")


def _fail(path, message):
    raise ConfigError(f"{path}: {message}")


def _require(mapping, key, path):
    if key not in mapping:
        _fail(f"{path}.{key}", "missing required field")
    return mapping[key]


def _number(value, path, positive=False):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        _fail(path, f"expected a number, got {value!r}")
    value = float(value)
    if positive and not value > 0:
        _fail(path, f"expected a positive number, got {value}")
    return value


def _integer(value, path, minimum=None):
    if isinstance(value, bool) or not isinstance(value, int):
        _fail(path, f"expected an integer, got {value!r}")
    if minimum is not None and value < minimum:
        _fail(path, f"expected at least {minimum}, got {value}")
    return value


def load_config(path, overrides=()):
    """Read a JSON run configuration and fold defaults and overrides in."""
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path} is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("config root: expected a JSON object")
    for key in raw:
        if key not in _TOP_KEYS:
            _fail(key, f"unknown top-level key; expected one of {_TOP_KEYS}")
    cfg = copy.deepcopy(DEFAULTS)
    cfg["domain"] = {}
    _merge(cfg, raw)
    cfg = apply_overrides(cfg, overrides)
    if not cfg["domain"]:
        _fail("domain", "missing required section")
    _check_sections(cfg)
    return cfg


def _merge(base, update):
    for key, value in update.items():
        if isinstance(value, dict) and isinstance(base.get(key), dict):
            _merge(base[key], value)
        else:
            base[key] = copy.deepcopy(value)


def parse_overrides(args):
    """Turn ["--sim.seed", "7", ...] into {"sim": {"seed": 7}, ...}."""
    if len(args) % 2 != 0:
        raise ConfigError(f"override flags come in --key value pairs, got {args}")
    tree = {}
    for flag, text in zip(args[::2], args[1::2]):
        if not flag.startswith("--"):
            raise ConfigError(f"expected an override flag, got {flag!r}")
        dotted = flag[2:]
        if dotted.split(".")[0] not in _TOP_KEYS:
            raise ConfigError(f"{dotted}: unknown top-level key")
        try:
            value = json.loads(text)
        except json.JSONDecodeError:
            value = text
        node = tree
        parts = dotted.split(".")
        for part in parts[:-1]:
            node = node.setdefault(part, {})
            if not isinstance(node, dict):
                raise ConfigError(f"{dotted}: conflicting overrides")
        node[parts[-1]] = value
    return tree


def apply_overrides(cfg, overrides):
    if isinstance(overrides, (list, tuple)):
        overrides = parse_overrides(list(overrides))
    out = copy.deepcopy(cfg)
    _merge(out, overrides)
    return out


def _check_sections(cfg):
    sim = cfg["sim"]
    sim["n_paths"] = _integer(sim["n_paths"], "sim.n_paths", minimum=1)
    sim["n_steps"] = _integer(sim["n_steps"], "sim.n_steps", minimum=1)
    sim["seed"] = _integer(sim["seed"], "sim.seed", minimum=0)
    if not isinstance(sim["bridge_correction"], bool):
        _fail("sim.bridge_correction", f"expected true or false, got {sim['bridge_correction']!r}")
    if sim["threads"] is not None:
        sim["threads"] = _integer(sim["threads"], "sim.threads", minimum=1)
    cmd = cfg["command"]
    if not isinstance(cmd["eps"], list) or not all(
        isinstance(e, (int, float)) and not isinstance(e, bool) for e in cmd["eps"]
    ):
        _fail("command.eps", f"expected a list of numbers, got {cmd['eps']!r}")
    cmd["bins"] = _integer(cmd["bins"], "command.bins", minimum=1)
    cmd["gamma_n"] = _integer(cmd["gamma_n"], "command.gamma_n", minimum=1)
    cert = cfg["certificate"]
    for key in ("K", "gamma", "v0"):
        if cert[key] is not None:
            cert[key] = _number(cert[key], f"certificate.{key}")
    if cert["beta"] is not None:
        # validate, but keep the JSON form ("any" or a number) so the
        # effective config embedded in reports stays plain JSON
        cert["beta"] = _beta_out(_beta_in(cert["beta"], "certificate.beta"))
    if cfg["output"] is not None and not isinstance(cfg["output"], str):
        _fail("output", f"expected a path string, got {cfg['output']!r}")


def _beta_in(value, path):
    # "any" marks sections with exterior tangent balls of every radius
    if value == "any":
        return math.inf
    return _number(value, path, positive=True)


def _beta_out(value):
    return "any" if math.isinf(value) else value


def _scalar_path(spec, horizon, path):
    if isinstance(spec, (int, float)) and not isinstance(spec, bool):
        return domains.constant_path(float(spec), horizon)
    if isinstance(spec, dict) and set(spec) == {"knots", "values"}:
        try:
            poly = Polyline(spec["knots"], spec["values"])
        except (ValueError, TypeError) as exc:
            _fail(path, str(exc))
        if poly.horizon != horizon:
            _fail(path, f"knots end at {poly.horizon}, domain horizon is {horizon}")
        if poly.knots[0] != 0.0:
            _fail(path, "knots must start at 0")
        return poly
    _fail(path, f"expected a number or {{knots, values}}, got {spec!r}")


def _vector_path(spec, horizon, path):
    if isinstance(spec, list):
        return domains.constant_vector_path(spec, horizon)
    if isinstance(spec, dict) and set(spec) == {"knots", "values"}:
        try:
            poly = VectorPolyline(spec["knots"], np.asarray(spec["values"], dtype=float))
        except (ValueError, TypeError) as exc:
            _fail(path, str(exc))
        if poly.horizon != horizon:
            _fail(path, f"knots end at {poly.horizon}, domain horizon is {horizon}")
        return poly
    _fail(path, f"expected a point or {{knots, values}}, got {spec!r}")


_FAMILY_KEYS = {
    "ball": {"center", "radius"},
    "cone": {"u", "slope", "m"},
    "band": {"lower", "upper"},
    "polytope": {"normals", "offsets", "translation"},
    "annulus": {"center", "inner", "outer"},
}


def build_domain(spec):
    """Construct the TimeSpaceDomain described by the `domain` section."""
    if not isinstance(spec, dict):
        _fail("domain", "expected an object")
    family = _require(spec, "family", "domain")
    if family in _FAMILY_KEYS:
        for key in spec:
            if key not in _FAMILY_KEYS[family] and key not in ("family", "horizon", "start"):
                _fail(f"domain.{key}", f"not a {family} field; "
                      f"expected {sorted(_FAMILY_KEYS[family])}, horizon or start")
    horizon = _number(spec.get("horizon", 1.0), "domain.horizon", positive=True)
    start = spec.get("start")
    if start is not None:
        start = np.asarray(start, dtype=float)
    try:
        fam = _build_family(family, spec, horizon)
    except ConfigError:
        raise
    except ValueError as exc:
        _fail("domain", str(exc))
    try:
        return domains.TimeSpaceDomain(fam, start=start)
    except ValueError as exc:
        _fail("domain.start", str(exc))


def _build_family(family, spec, horizon):
    if family == "ball":
        return domains.BallTube(
            _vector_path(_require(spec, "center", "domain"), horizon, "domain.center"),
            _scalar_path(_require(spec, "radius", "domain"), horizon, "domain.radius"),
        )
    if family == "cone":
        return domains.TruncatedCone(
            _number(_require(spec, "u", "domain"), "domain.u", positive=True),
            _number(_require(spec, "slope", "domain"), "domain.slope"),
            _integer(_require(spec, "m", "domain"), "domain.m", minimum=1),
            horizon,
        )
    if family == "band":
        lower = spec.get("lower")
        upper = spec.get("upper")
        return domains.Band1DTube(
            None if lower is None else _scalar_path(lower, horizon, "domain.lower"),
            None if upper is None else _scalar_path(upper, horizon, "domain.upper"),
        )
    if family == "polytope":
        from .geometry import ConvexPolytope

        poly = ConvexPolytope(
            np.asarray(_require(spec, "normals", "domain"), dtype=float),
            np.asarray(_require(spec, "offsets", "domain"), dtype=float),
        )
        translation = spec.get("translation")
        if translation is not None:
            translation = _vector_path(translation, horizon, "domain.translation")
        return domains.PolytopeTube(poly, translation, horizon)
    if family == "annulus":
        return domains.AnnulusTube(
            np.asarray(_require(spec, "center", "domain"), dtype=float),
            _scalar_path(_require(spec, "inner", "domain"), horizon, "domain.inner"),
            _scalar_path(_require(spec, "outer", "domain"), horizon, "domain.outer"),
        )
    _fail("domain.family", f"unknown family {family!r}; "
          "expected ball, cone, band, polytope or annulus")


def _scale_poly(poly, T, space):
    return Polyline(poly.knots / T, poly.values * space)


def _scale_vpoly(poly, T, space):
    return VectorPolyline(poly.knots / T, poly.values * space)


def normalize_domain(domain):
    """Rescale a domain onto horizon 1: time / T, space / sqrt(T).

    Brownian scaling makes the crossing probability invariant, so every
    bound and estimate runs in normalized units; lengths reported back to
    the caller (eps, certificate parameters) must be scaled consistently,
    which `space_scale` in the returned info records.
    """
    T = domain.horizon
    if T == 1.0:
        return domain, {"T": 1.0, "time_scale": 1.0, "space_scale": 1.0}
    s = 1.0 / math.sqrt(T)
    fam = domain.family
    if isinstance(fam, domains.BallTube):
        scaled = domains.BallTube(_scale_vpoly(fam.center, T, s), _scale_poly(fam.radius, T, s))
    elif isinstance(fam, domains.TruncatedCone):
        scaled = domains.TruncatedCone(fam.u * s, fam.slope * T * s, fam.dim_, 1.0)
    elif isinstance(fam, domains.Band1DTube):
        scaled = domains.Band1DTube(
            None if fam.lower is None else _scale_poly(fam.lower, T, s),
            None if fam.upper is None else _scale_poly(fam.upper, T, s),
        )
    elif isinstance(fam, domains.PolytopeTube):
        from .geometry import ConvexPolytope

        poly = ConvexPolytope(fam.polytope.normals, fam.polytope.offsets * s)
        translation = None if fam.translation is None else _scale_vpoly(fam.translation, T, s)
        scaled = domains.PolytopeTube(poly, translation, 1.0)
    elif isinstance(fam, domains.AnnulusTube):
        scaled = domains.AnnulusTube(fam.center * s, _scale_poly(fam.inner, T, s),
                                     _scale_poly(fam.outer, T, s))
    else:
        raise ConfigError(f"domain: cannot normalize family {type(fam).__name__}")
    start = None if domain.start is None else domain.start * s
    return domains.TimeSpaceDomain(scaled, start=start), {
        "T": T,
        "time_scale": 1.0 / T,
        "space_scale": s,
    }


def certificate_to_json(cert):
    """Serialize a DomainCertificate with the "any" convention for beta."""
    return {
        "m": cert.m,
        "T": cert.T,
        "K": cert.K,
        "beta": _beta_out(cert.beta),
        "gamma": cert.gamma,
        "v0": cert.v0,
        "provenance": dict(cert.provenance),
    }
