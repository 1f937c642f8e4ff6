"""Batch front door: four subcommands emitting machine-readable reports.

    crossprob validate  run.json [--sim.seed 7 ...]
    crossprob estimate  run.json
    crossprob certify   run.json
    crossprob density   run.json

Each run reads one JSON configuration (see the config module for the
schema), optionally patched by --key.path value flags, and writes a JSON
report embedding the fully expanded configuration, the RNG identity and
the package version, so the report reproduces itself byte-for-byte apart
from its timestamp.  Tabular results are additionally rendered as CSV.
Exit codes: 0 success, 1 certification or bound failure, 2 input error.
"""

from __future__ import annotations

import argparse
import datetime
import io
import json
import math
import sys

import numpy as np

from . import __version__, _rng, config
from .bounds import certified_gap_constant, density_envelope
from .closedform import piecewise_linear_bcp_1d
from .domains import (
    Band1DTube,
    DomainCertificate,
    estimate_gamma,
    estimate_lipschitz,
    exterior_ball_radius,
)
from .mc import SimConfig, estimate_gap, estimate_survival, hitting_time_histogram

__all__ = ["main"]

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_INPUT = 2


class CertificationFailure(Exception):
    """The requested certification cannot be produced; exits with code 1."""


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="crossprob",
        description="Boundary-crossing probabilities: certificates, estimates, "
                    "certified dilation gaps and hitting-time densities.",
    )
    parser.add_argument("subcommand", choices=["validate", "estimate", "certify", "density"])
    parser.add_argument("config", help="path to a JSON run configuration")
    args, overrides = parser.parse_known_args(argv)
    try:
        cfg = config.load_config(args.config, overrides)
        report, code = _COMMANDS[args.subcommand](cfg)
        _emit(report, cfg)
    except config.ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except CertificationFailure as exc:
        print(f"certification failure: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    except ValueError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"input error: cannot write report: {exc}", file=sys.stderr)
        return EXIT_INPUT
    return code


def _sim_config(cfg):
    sim = cfg["sim"]
    return SimConfig(
        n_paths=sim["n_paths"],
        n_steps=sim["n_steps"],
        seed=sim["seed"],
        bridge_correction=sim["bridge_correction"],
        threads=sim["threads"],
    )


def _report(command, cfg, norm, result):
    return {
        "command": command,
        "version": __version__,
        "generated_at": datetime.datetime.now(datetime.timezone.utc).isoformat(),
        "effective_config": {key: cfg[key] for key in ("domain", "certificate", "sim",
                                                       "command", "output")},
        "normalization": norm,
        "rng": {
            "generator": "philox4x64",
            "seed": cfg["sim"]["seed"],
            "chunk_paths": _rng.CHUNK_PATHS,
            "block_steps": _rng.BLOCK_STEPS,
        },
        "result": result,
    }


def _estimate_json(est):
    return {
        "mean": float(est.mean),
        "stderr": float(est.stderr),
        "n": est.n,
        "seed": est.seed,
        "n_steps": est.n_steps,
        "bias_note": est.bias_note,
    }


def _normalized_domain(cfg):
    domain = config.build_domain(cfg["domain"])
    return config.normalize_domain(domain)


def _resolve_certificate(cfg, dom, norm):
    """Certificate on the normalized domain: supplied values win, missing
    ones are measured.  Supplied values are interpreted in normalized
    (horizon 1) units; the report's normalization block records the scale.
    """
    given = cfg["certificate"]
    provenance = {"units": "normalized to horizon 1"}
    K = given["K"]
    if K is None:
        K = estimate_lipschitz(dom, refine_until=cfg["command"]["lipschitz_refine_until"])
        provenance["K"] = "sampled Hausdorff rate of the sections on a refining grid"
    else:
        provenance["K"] = "supplied"
    beta = given["beta"]
    if beta is None:
        beta = exterior_ball_radius(dom)
        provenance["beta"] = ("every exterior ball radius fits (convex sections)"
                              if math.isinf(beta) else "smallest inner radius of the sections")
    else:
        beta = config._beta_in(beta, "certificate.beta")
        provenance["beta"] = "supplied"
    gamma, v0 = given["gamma"], given["v0"]
    if gamma is None or v0 is None:
        g_hat, v0_hat = estimate_gamma(dom, n=cfg["command"]["gamma_n"],
                                       seed=cfg["sim"]["seed"], threads=cfg["sim"]["threads"])
        if gamma is None:
            gamma = g_hat
            provenance["gamma"] = (f"Monte Carlo boundary-mass rate, n={cfg['command']['gamma_n']}, "
                                   f"seed={cfg['sim']['seed']}, inflated by 3 standard errors")
        else:
            provenance["gamma"] = "supplied"
        if v0 is None:
            v0 = v0_hat
            provenance["v0"] = "largest grid scale with a flat mass-to-distance ratio"
        else:
            provenance["v0"] = "supplied"
    else:
        provenance["gamma"] = provenance["v0"] = "supplied"
    return DomainCertificate(m=dom.dim, T=1.0, K=float(K), beta=float(beta),
                             gamma=float(gamma), v0=float(v0), provenance=provenance)


def cmd_validate(cfg):
    dom, norm = _normalized_domain(cfg)
    try:
        beta = exterior_ball_radius(dom)
    except ValueError as exc:
        raise ValueError(f"{exc}; supply certificate.K/beta/gamma/v0 explicitly to proceed")
    K = estimate_lipschitz(dom, refine_until=cfg["command"]["lipschitz_refine_until"])
    gamma, v0 = estimate_gamma(dom, n=cfg["command"]["gamma_n"], seed=cfg["sim"]["seed"],
                               threads=cfg["sim"]["threads"])
    cert = DomainCertificate(
        m=dom.dim, T=1.0, K=float(K), beta=float(beta), gamma=float(gamma), v0=float(v0),
        provenance={
            "units": "normalized to horizon 1",
            "K": "sampled Hausdorff rate of the sections on a refining grid (a lower estimate)",
            "beta": ("every exterior ball radius fits (convex sections)"
                     if math.isinf(beta) else "smallest inner radius of the sections"),
            "gamma": (f"Monte Carlo boundary-mass rate, n={cfg['command']['gamma_n']}, "
                      f"seed={cfg['sim']['seed']}, inflated by 3 standard errors"),
            "v0": "largest grid scale with a flat mass-to-distance ratio",
        },
    )
    warnings = []
    if cert.K == 0:
        warnings.append("the certified gap constant requires K > 0; the linear "
                        "dilation-gap guarantee is unavailable for time-constant sections")
    result = {"certificate": config.certificate_to_json(cert), "warnings": warnings}
    return _report("validate", cfg, norm, result), EXIT_OK


def cmd_estimate(cfg):
    dom, norm = _normalized_domain(cfg)
    sim = cfg["sim"]
    if isinstance(dom.family, Band1DTube):
        est = piecewise_linear_bcp_1d(dom.family.lower, dom.family.upper,
                                      sim["n_paths"], sim["seed"], threads=sim["threads"])
        estimator = "knot-exact bridge product"
    else:
        est = estimate_survival(dom, _sim_config(cfg))
        estimator = "step simulation"
    result = {"estimator": estimator, "estimate": _estimate_json(est)}
    return _report("estimate", cfg, norm, result), EXIT_OK


def cmd_certify(cfg):
    dom, norm = _normalized_domain(cfg)
    cert = _resolve_certificate(cfg, dom, norm)
    try:
        factory = certified_gap_constant(cert)
    except ValueError as exc:
        raise CertificationFailure(str(exc))
    simcfg = _sim_config(cfg)
    rows = []
    for eps_orig in cfg["command"]["eps"]:
        eps = float(eps_orig) * norm["space_scale"]
        row = {"eps": float(eps_orig), "eps_normalized": eps}
        try:
            bound = factory(eps)
            gap = estimate_gap(dom, eps, simcfg, certificate=cert)
        except ValueError as exc:
            row.update(status="error", message=str(exc))
            rows.append(row)
            continue
        ok = gap.gap <= bound.certified_gap + 3.0 * gap.joint_stderr
        row.update(
            gap=float(gap.gap),
            joint_stderr=float(gap.joint_stderr),
            p_inner=float(gap.p_inner.mean),
            p_outer=float(gap.p_outer.mean),
            bound=float(bound.certified_gap),
            status="pass" if ok else "fail",
        )
        if gap.warning:
            row["warning"] = gap.warning
        rows.append(row)
    result = {
        "certificate": config.certificate_to_json(cert),
        "constant": float(factory.c),
        "constant_rate": float(factory.c_star),
        "beta_eff": float(factory.beta_eff),
        "rows": rows,
        "csv": _certify_csv(rows),
    }
    code = EXIT_OK if all(r.get("status") == "pass" for r in rows) else EXIT_FAILURE
    return _report("certify", cfg, norm, result), code


def _certify_csv(rows):
    out = io.StringIO()
    out.write("eps,eps_normalized,gap,joint_stderr,bound,status\n")
    for r in rows:
        if r["status"] == "error":
            out.write(f"{r['eps']:.10g},{r['eps_normalized']:.10g},,,,error\n")
        else:
            out.write(f"{r['eps']:.10g},{r['eps_normalized']:.10g},{r['gap']:.10g},"
                      f"{r['joint_stderr']:.10g},{r['bound']:.10g},{r['status']}\n")
    return out.getvalue()


def cmd_density(cfg):
    dom, norm = _normalized_domain(cfg)
    cert = _resolve_certificate(cfg, dom, norm)
    hist = hitting_time_histogram(dom, cfg["command"]["bins"], _sim_config(cfg))
    bins = len(hist.masses)
    width = float(hist.edges[1] - hist.edges[0])
    rows, violating = [], []
    for k in range(bins):
        lo, hi = float(hist.edges[k]), float(hist.edges[k + 1])
        mid = 0.5 * (lo + hi)
        # the envelope lives on the open unit interval
        grid = np.linspace(max(lo, 1e-9), min(hi, 1.0 - 1e-9), 33)
        env_min = min(density_envelope(t, cert) for t in grid)
        env_mid = density_envelope(mid, cert)
        mass = float(hist.masses[k])
        stderr = float(hist.stderrs[k])
        violated = mass / width - 3.0 * stderr / width > env_min
        rows.append({
            "bin_lo": lo, "bin_hi": hi, "mass": mass, "stderr": stderr,
            "envelope_mid": float(env_mid), "envelope_min": float(env_min),
            "violated": bool(violated),
        })
        if violated:
            violating.append(k)
    result = {
        "certificate": config.certificate_to_json(cert),
        "survivor_mass": float(hist.survivor_mass),
        "bias_note": hist.bias_note,
        "violations": len(violating),
        "violating_bins": violating,
        "rows": rows,
        "csv": _density_csv(rows),
    }
    code = EXIT_OK if not violating else EXIT_FAILURE
    return _report("density", cfg, norm, result), code


def _density_csv(rows):
    out = io.StringIO()
    out.write("bin_lo,bin_hi,mass,stderr,envelope_mid,envelope_min\n")
    for r in rows:
        out.write(f"{r['bin_lo']:.10g},{r['bin_hi']:.10g},{r['mass']:.10g},"
                  f"{r['stderr']:.10g},{r['envelope_mid']:.10g},{r['envelope_min']:.10g}\n")
    return out.getvalue()


_COMMANDS = {
    "validate": cmd_validate,
    "estimate": cmd_estimate,
    "certify": cmd_certify,
    "density": cmd_density,
}


def _emit(report, cfg):
    text = json.dumps(report, indent=2, sort_keys=True) + "\n"
    output = cfg.get("output")
    if output is None:
        sys.stdout.write(text)
        return
    json_path = output if output.endswith(".json") else output + ".json"
    with open(json_path, "w") as fh:
        fh.write(text)
    csv_text = report["result"].get("csv")
    if csv_text is not None:
        csv_path = json_path[: -len(".json")] + ".csv"
        with open(csv_path, "w") as fh:
            fh.write(csv_text)


if __name__ == "__main__":
    sys.exit(main())
