"""Seeded, reproducible Monte-Carlo oracle for boundary-crossing events.

Everything here is deterministic in (seed, n_paths, n_steps, domain):
counter-based streams are laid out per chunk of paths, partial results merge
in chunk order with exact summation, so estimates are bitwise-identical for
any thread count.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import _rng, domains
from .geometry import signed_distance

__all__ = [
    "SimConfig",
    "MCEstimate",
    "GapEstimate",
    "HittingHistogram",
    "estimate_survival",
    "estimate_survival_many",
    "estimate_gap",
    "hitting_time_histogram",
    "bridge_conditional_survival",
    "radial_domination_rate",
    "quick_exit_probability",
    "cone_avoidance_survival",
]

_BIG = 1e300


@dataclass(frozen=True)
class SimConfig:
    """Simulation plumbing: grid size, seed, start point, thread budget."""

    n_paths: int
    n_steps: int
    seed: int
    bridge_correction: bool = True
    start: np.ndarray | None = None
    threads: int | None = None  # None: CROSSPROB_THREADS env var, else 1

    def __post_init__(self):
        object.__setattr__(self, "n_paths", int(self.n_paths))
        object.__setattr__(self, "n_steps", int(self.n_steps))
        object.__setattr__(self, "seed", int(self.seed))
        if self.n_paths < 1:
            raise ValueError(f"n_paths must be >= 1, got {self.n_paths}")
        if self.n_steps < 2:
            raise ValueError(f"n_steps must be >= 2, got {self.n_steps}")
        if self.start is not None:
            object.__setattr__(self, "start", np.atleast_1d(np.asarray(self.start, dtype=float)))

    def start_point(self, dim):
        if self.start is None:
            return np.zeros(dim)
        if self.start.shape[0] != dim:
            raise ValueError(f"start has dimension {self.start.shape[0]}, domain has {dim}")
        return self.start

    def as_dict(self):
        return {
            "n_paths": self.n_paths,
            "n_steps": self.n_steps,
            "seed": self.seed,
            "bridge_correction": self.bridge_correction,
            "start": None if self.start is None else list(map(float, self.start)),
            "threads": self.threads,
            "rng": _rng.rng_identity(),
        }


@dataclass(frozen=True)
class MCEstimate:
    """A Bernoulli-mean estimate with its provenance."""

    mean: float
    stderr: float
    n: int
    seed: int
    n_steps: int
    bias_note: str = ""

    def as_dict(self):
        return {
            "mean": self.mean,
            "stderr": self.stderr,
            "n": self.n,
            "seed": self.seed,
            "n_steps": self.n_steps,
            "bias_note": self.bias_note,
            "rng": _rng.rng_identity(),
        }


@dataclass(frozen=True)
class GapEstimate:
    """Common-random-number estimate of the dilation gap P(G^(eps)) - P(G)."""

    eps: float
    p_inner: MCEstimate
    p_outer: MCEstimate
    gap: float
    joint_stderr: float
    warning: str = ""

    def as_dict(self):
        return {
            "eps": self.eps,
            "p_inner": self.p_inner.as_dict(),
            "p_outer": self.p_outer.as_dict(),
            "gap": self.gap,
            "joint_stderr": self.joint_stderr,
            "warning": self.warning,
        }


@dataclass(frozen=True)
class HittingHistogram:
    """First-exit-time histogram; survivors carry the remaining mass."""

    edges: np.ndarray
    masses: np.ndarray
    stderrs: np.ndarray
    n: int
    bias_note: str = ""

    @property
    def survivor_mass(self):
        return 1.0 - float(self.masses.sum())

    def as_dict(self):
        return {
            "edges": list(map(float, self.edges)),
            "masses": list(map(float, self.masses)),
            "stderrs": list(map(float, self.stderrs)),
            "n": self.n,
            "survivor_mass": self.survivor_mass,
            "bias_note": self.bias_note,
            "rng": _rng.rng_identity(),
        }

def _interp(poly, times):
    return np.interp(times, poly.knots, poly.values)


def _interp_vec(vpoly, times):
    out = np.empty((times.shape[0], vpoly.dim))
    for d in range(vpoly.dim):
        out[:, d] = np.interp(times, vpoly.knots, vpoly.values[:, d])
    return out


def _radial_columns(family, times, shifts):
    """(centers, inner, outer) kernel arrays for one radial-shell tube."""
    nb = times.shape[0]
    if isinstance(family, domains.BallTube):
        centers = _interp_vec(family.center, times)
        inner = np.full(nb, -_BIG)
        outer = _interp(family.radius, times)
    elif isinstance(family, domains.TruncatedCone):
        centers = np.zeros((nb, family.dim))
        inner = np.full(nb, -_BIG)
        outer = family.u - family.slope * times
    else:
        centers = np.tile(family.center, (nb, 1))
        inner = _interp(family.inner, times)
        outer = _interp(family.outer, times)
    inner_v = np.where(inner[:, None] <= -_BIG, -_BIG, inner[:, None] - shifts[None, :])
    outer_v = np.where(outer[:, None] >= _BIG, _BIG, outer[:, None] + shifts[None, :])
    return centers, inner_v, outer_v


def _band_columns(family, times, shifts):
    lo = _interp(family.lower, times) if family.lower is not None else np.full(times.shape, -_BIG)
    hi = _interp(family.upper, times) if family.upper is not None else np.full(times.shape, _BIG)
    lower_v = np.where(lo[:, None] <= -_BIG, -_BIG, lo[:, None] - shifts[None, :])
    upper_v = np.where(hi[:, None] >= _BIG, _BIG, hi[:, None] + shifts[None, :])
    return lower_v, upper_v


def _polytope_columns(family, times):
    poly = family.polytope
    offs = np.tile(poly.offsets, (times.shape[0], 1))
    if family.translation is not None:
        offs = offs + _interp_vec(family.translation, times) @ poly.normals.T
    rownorm = np.sqrt(np.sum(poly.normals * poly.normals, axis=1))
    return poly.normals, offs, rownorm


def _simulate(op, cfg, geom, x0, pull, sigma, target, dt):
    """Run the chunked kernels over all paths; return first-failure indices.

    geom packs the kernel arrays for one tube kind together with the
    per-variant start distances; the returned array holds, per path and
    variant, the grid index of the first failed check (-1 = survived, 0 =
    the start itself was outside that variant).
    """
    from . import _kernels

    kind = geom[0]
    n_steps = pull.shape[0]
    sizes = _rng.chunk_sizes(cfg.n_paths)
    use_bridge = bool(cfg.bridge_correction)
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    m = x0.shape[0]
    n_blocks = (n_steps + _rng.BLOCK_STEPS - 1) // _rng.BLOCK_STEPS

    if kind == "radial":
        centers, inner, outer, d_in0, d_out0 = geom[1:]
        n_var = inner.shape[1]
        start_dead = np.minimum(d_in0, d_out0) < 0
    elif kind == "band":
        lower, upper, d_lo0, d_hi0 = geom[1:]
        n_var = lower.shape[1]
        start_dead = np.minimum(d_lo0, d_hi0) < 0
    else:
        normals, offs, rownorm, eps, d0 = geom[1:]
        n_var = eps.shape[0]
        start_dead = d0 < 0

    def worker(ci):
        n_chunk = sizes[ci]
        dead = np.full((n_chunk, n_var), -1, dtype=np.int32)
        dead[:, start_dead] = 0
        logl = np.zeros((n_chunk, n_var))
        if use_bridge:
            u = _rng.stream(cfg.seed, op, ci, 0, kind=1).random(n_chunk)
            logu = np.log(np.maximum(u, 1e-300))
        else:
            logu = np.full(n_chunk, -np.inf)
        if kind == "band":
            pos = np.full(n_chunk, x0[0])
            prev_a = np.tile(np.maximum(d_lo0, 0.0), (n_chunk, 1))
            prev_b = np.tile(np.maximum(d_hi0, 0.0), (n_chunk, 1))
        elif kind == "radial":
            pos = np.tile(x0, (n_chunk, 1))
            prev_a = np.tile(np.maximum(d_in0, 0.0), (n_chunk, 1))
            prev_b = np.tile(np.maximum(d_out0, 0.0), (n_chunk, 1))
        else:
            pos = np.tile(x0, (n_chunk, 1))
            prev_a = np.tile(np.maximum(d0, 0.0), (n_chunk, 1))
        for bi in range(n_blocks):
            j0 = bi * _rng.BLOCK_STEPS
            j1 = min(n_steps, j0 + _rng.BLOCK_STEPS)
            gen = _rng.stream(cfg.seed, op, ci, bi, kind=0)
            if kind == "band":
                noise = gen.standard_normal((n_chunk, j1 - j0))
                _kernels.band_chunk(pos, noise, pull[j0:j1], sigma[j0:j1], x0[0],
                                    lower[j0:j1], upper[j0:j1], prev_a, prev_b,
                                    logl, logu, dead, j0, dt, use_bridge)
            elif kind == "radial":
                noise = gen.standard_normal((n_chunk, j1 - j0, m))
                _kernels.radial_chunk(pos, noise, pull[j0:j1], sigma[j0:j1], target,
                                      centers[j0:j1], inner[j0:j1], outer[j0:j1],
                                      prev_a, prev_b, logl, logu, dead, j0, dt, use_bridge)
            else:
                noise = gen.standard_normal((n_chunk, j1 - j0, m))
                _kernels.polytope_chunk(pos, noise, pull[j0:j1], sigma[j0:j1], target,
                                        normals, offs[j0:j1], rownorm, eps,
                                        prev_a, logl, logu, dead, j0, dt, use_bridge)
        return dead

    parts = _rng.thread_map(worker, len(sizes), _rng.resolve_threads(cfg.threads))
    return parts[0] if len(parts) == 1 else np.concatenate(parts, axis=0)


def _free_motion(n_steps, dt, m):
    pull = np.zeros(n_steps)
    sigma = np.full(n_steps, math.sqrt(dt))
    return pull, sigma, np.zeros(m)


def _bridge_motion(n_steps, dt, endpoint):
    # exact Gaussian bridge transitions: the j-th step covers (j dt, (j+1) dt)
    # of the pinning interval [0, n dt], so t - s_j = (n - j) dt
    rem = n_steps - np.arange(n_steps)
    pull = 1.0 / rem
    sigma = np.sqrt(dt * (rem - 1) / rem)
    return pull, sigma, np.atleast_1d(np.asarray(endpoint, dtype=float))


def _tube_geometry(family, times, shifts, x0, t0=0.0):
    """Kernel arrays plus start distances for a tube and its dilation shifts."""
    shifts = np.asarray(shifts, dtype=float)
    tt = np.asarray(times, dtype=float)
    t0a = np.array([t0])
    if isinstance(family, domains.Band1DTube):
        lower, upper = _band_columns(family, tt, shifts)
        lo0, hi0 = _band_columns(family, t0a, shifts)
        return ("band", lower, upper, x0[0] - lo0[0], hi0[0] - x0[0])
    if isinstance(family, domains.PolytopeTube):
        normals, offs, rownorm = _polytope_columns(family, tt)
        _, offs0, _ = _polytope_columns(family, t0a)
        d0 = np.min((offs0[0] - normals @ x0) / rownorm)
        return ("poly", normals, offs, rownorm, shifts, d0 + shifts)
    centers, inner, outer = _radial_columns(family, tt, shifts)
    c0, inner0, outer0 = _radial_columns(family, t0a, shifts)
    r0 = float(np.linalg.norm(x0 - c0[0]))
    return ("radial", centers, inner, outer, r0 - inner0[0], outer0[0] - r0)


def _resolve_start(domain, cfg):
    x0 = cfg.start if cfg.start is not None else domain.start_point()
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    if x0.shape[0] != domain.dim:
        raise ValueError(f"start has dimension {x0.shape[0]}, domain has {domain.dim}")
    if signed_distance(domain.section(0.0), x0) < -1e-9:
        raise ValueError("start lies outside the initial section")
    return x0


def _bernoulli(count, cfg, note=""):
    mean = count / cfg.n_paths
    return MCEstimate(
        mean=mean,
        stderr=math.sqrt(mean * (1.0 - mean) / cfg.n_paths),
        n=cfg.n_paths,
        seed=cfg.seed,
        n_steps=cfg.n_steps,
        bias_note=note,
    )


def _survival_note(cfg):
    if not cfg.bridge_correction:
        return "overestimates without correction (grid membership only, crossings between grid points missed)"
    return "bridge-corrected; residual bias from boundary curvature shrinks with the step"


def estimate_survival(domain, cfg):
    """Fraction of simulated paths staying inside the sections up to the horizon.

    With the bridge correction each surviving step also multiplies in the
    tangent half-space non-crossing factor built from the signed distances at
    the step's two ends, and the path is thinned against a per-path uniform.
    """
    x0 = _resolve_start(domain, cfg)
    dt = domain.horizon / cfg.n_steps
    times = dt * np.arange(1, cfg.n_steps + 1)
    geom = _tube_geometry(domain.family, times, [0.0], x0)
    pull, sigma, target = _free_motion(cfg.n_steps, dt, domain.dim)
    dead = _simulate(_rng.OP_SURVIVAL, cfg, geom, x0, pull, sigma, target, dt)
    return _bernoulli(int(np.sum(dead[:, 0] < 0)), cfg, _survival_note(cfg))


def estimate_survival_many(domain_list, cfg):
    """Survival estimates for several same-shaped tubes on shared noise.

    All domains must share the family kind, dimension, horizon and start;
    radial tubes must also share their center path (they may differ in the
    radii).  Sharing the noise makes differences between the estimates exact
    common-random-number comparisons.  A domain whose start lies outside its
    initial section gets mean 0 rather than an error.
    """
    if not domain_list:
        raise ValueError("need at least one domain")
    first = domain_list[0]
    if isinstance(first.family, domains.PolytopeTube):
        raise ValueError("batch evaluation supports ball, cone, annulus and band tubes")
    for dom in domain_list[1:]:
        if type(dom.family) is not type(first.family) or dom.dim != first.dim or \
                dom.horizon != first.horizon:
            raise ValueError("domains in a batch must share family kind, dimension and horizon")
        if not np.array_equal(dom.start_point(), first.start_point()):
            raise ValueError("domains in a batch must share the start point")
    x0 = cfg.start if cfg.start is not None else first.start_point()
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    dt = first.horizon / cfg.n_steps
    times = dt * np.arange(1, cfg.n_steps + 1)
    zero = np.zeros(1)
    geoms = [_tube_geometry(d.family, times, zero, x0) for d in domain_list]
    kind = geoms[0][0]
    if kind == "band":
        geom = ("band",
                np.hstack([g[1] for g in geoms]), np.hstack([g[2] for g in geoms]),
                np.concatenate([g[3] for g in geoms]), np.concatenate([g[4] for g in geoms]))
    else:
        for g in geoms[1:]:
            if not np.array_equal(g[1], geoms[0][1]):
                raise ValueError("radial tubes in a batch must share the center path")
        geom = ("radial", geoms[0][1],
                np.hstack([g[2] for g in geoms]), np.hstack([g[3] for g in geoms]),
                np.concatenate([g[4] for g in geoms]), np.concatenate([g[5] for g in geoms]))
    pull, sigma, target = _free_motion(cfg.n_steps, dt, first.dim)
    dead = _simulate(_rng.OP_SURVIVAL, cfg, geom, x0, pull, sigma, target, dt)
    note = _survival_note(cfg)
    return [_bernoulli(int(np.sum(dead[:, v] < 0)), cfg, note) for v in range(len(domain_list))]


def estimate_gap(domain, eps, cfg, certificate=None):
    """Common-random-number estimate of the dilation gap P(G^(eps)) - P(G).

    Each path is simulated once and scored against the sections and their
    eps-dilations on identical noise, so the gap is exactly nonnegative and
    the per-path gap indicator is Bernoulli.  Radial and band dilations are
    exact radius/barrier shifts; a polytope dilation is realized as the outer
    parallel polytope, a superset that can only inflate the measured gap
    (noted in the result).
    """
    eps = float(eps)
    if eps < 0:
        raise ValueError(f"eps must be nonnegative, got {eps}")
    x0 = _resolve_start(domain, cfg)
    dt = domain.horizon / cfg.n_steps
    times = dt * np.arange(1, cfg.n_steps + 1)
    geom = _tube_geometry(domain.family, times, [0.0, eps], x0)
    pull, sigma, target = _free_motion(cfg.n_steps, dt, domain.dim)
    dead = _simulate(_rng.OP_SURVIVAL, cfg, geom, x0, pull, sigma, target, dt)
    inner_alive = dead[:, 0] < 0
    outer_alive = dead[:, 1] < 0
    note = _survival_note(cfg)
    if isinstance(domain.family, domains.PolytopeTube) and eps > 0:
        note += "; polytope dilation taken as the outer parallel polytope (corner overshoot)"
    p_inner = _bernoulli(int(np.sum(inner_alive)), cfg, note)
    p_outer = _bernoulli(int(np.sum(outer_alive)), cfg, note)
    gap = (p_outer.n * p_outer.mean - p_inner.n * p_inner.mean) / cfg.n_paths
    warning = ""
    if certificate is not None:
        from .bounds import beta_effective

        budget = beta_effective(certificate) / 2.0
        if eps > budget:
            warning = (f"eps={eps:.6g} exceeds the certified budget beta_eff/2={budget:.6g}; "
                       "the gap estimate is still well-defined but the linear guarantee does not apply")
    return GapEstimate(
        eps=eps,
        p_inner=p_inner,
        p_outer=p_outer,
        gap=gap,
        joint_stderr=math.sqrt(max(gap * (1.0 - gap), 0.0) / cfg.n_paths),
        warning=warning,
    )


def hitting_time_histogram(domain, bins, cfg):
    """Histogram of the first grid time at which a path fails its section check."""
    bins = int(bins)
    if bins < 10:
        raise ValueError(f"need at least 10 bins, got {bins}")
    x0 = _resolve_start(domain, cfg)
    horizon = domain.horizon
    dt = horizon / cfg.n_steps
    times = dt * np.arange(1, cfg.n_steps + 1)
    geom = _tube_geometry(domain.family, times, [0.0], x0)
    pull, sigma, target = _free_motion(cfg.n_steps, dt, domain.dim)
    dead = _simulate(_rng.OP_SURVIVAL, cfg, geom, x0, pull, sigma, target, dt)[:, 0]
    edges = np.linspace(0.0, horizon, bins + 1)
    counts, _ = np.histogram(dead[dead >= 0] * dt, bins=edges)
    masses = counts / cfg.n_paths
    return HittingHistogram(
        edges=edges,
        masses=masses,
        stderrs=np.sqrt(masses * (1.0 - masses) / cfg.n_paths),
        n=cfg.n_paths,
        bias_note="exit recorded at the right endpoint of the offending step (bias at most one step width); "
                  + _survival_note(cfg),
    )


def bridge_conditional_survival(domain, t, z, cfg):
    """Survival fraction of exact Brownian bridges pinned at z at time t.

    Bridges run from the start point to z with exact Gaussian transitions on
    the grid, so the only discretisation effect is the finite number of
    membership checks (plus the usual crossing correction between them).
    """
    t = float(t)
    if not 0.0 < t <= domain.horizon + 1e-12:
        raise ValueError(f"t must lie in (0, horizon], got {t}")
    z = np.atleast_1d(np.asarray(z, dtype=float))
    if signed_distance(domain.section(t), z) <= 0:
        raise ValueError("bridge endpoint lies outside the section at time t")
    x0 = _resolve_start(domain, cfg)
    dt = t / cfg.n_steps
    times = dt * np.arange(1, cfg.n_steps + 1)
    geom = _tube_geometry(domain.family, times, [0.0], x0)
    pull, sigma, target = _bridge_motion(cfg.n_steps, dt, z)
    dead = _simulate(_rng.OP_BRIDGE, cfg, geom, x0, pull, sigma, target, dt)
    return _bernoulli(int(np.sum(dead[:, 0] < 0)), cfg,
                      "exact bridge transitions; " + _survival_note(cfg))


def quick_exit_probability(domain, x, t, h, cfg):
    """Fraction of paths from x at time t that leave the sections within h."""
    t, h = float(t), float(h)
    if t < 0 or h <= 0 or t + h > domain.horizon + 1e-12:
        raise ValueError(f"need t >= 0, h > 0 and t + h <= horizon, got t={t}, h={h}")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if signed_distance(domain.section(t), x) <= 0:
        raise ValueError("exit-window start lies outside the section at time t")
    dt = h / cfg.n_steps
    times = t + dt * np.arange(1, cfg.n_steps + 1)
    geom = _tube_geometry(domain.family, times, [0.0], x, t0=t)
    pull, sigma, target = _free_motion(cfg.n_steps, dt, domain.dim)
    dead = _simulate(_rng.OP_QUICK_EXIT, cfg, geom, x, pull, sigma, target, dt)
    return _bernoulli(int(np.sum(dead[:, 0] >= 0)), cfg,
                      "exit fraction over the window; " + _survival_note(cfg))


def cone_avoidance_survival(x, r0, slope, t, cfg):
    """Probability that free Brownian motion from x stays outside the
    shrinking central ball of radius r0 - slope * s up to time t."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    r0, slope, t = float(r0), float(slope), float(t)
    if r0 <= 0 or slope < 0 or t <= 0:
        raise ValueError("need r0 > 0, slope >= 0 and t > 0")
    if np.linalg.norm(x) <= r0:
        raise ValueError(f"start norm {np.linalg.norm(x):.6g} must exceed the initial radius {r0}")
    n = cfg.n_steps
    dt = t / n
    times = dt * np.arange(1, n + 1)
    inner = (r0 - slope * times)[:, None]
    geom = ("radial", np.zeros((n, x.shape[0])), inner, np.full((n, 1), _BIG),
            np.array([float(np.linalg.norm(x)) - r0]), np.array([_BIG]))
    pull, sigma, target = _free_motion(n, dt, x.shape[0])
    dead = _simulate(_rng.OP_CONE_AVOID, cfg, geom, x, pull, sigma, target, dt)
    return _bernoulli(int(np.sum(dead[:, 0] < 0)), cfg, _survival_note(cfg))


def radial_domination_rate(x, y, t, beta, K, cfg):
    """Violation rate of the radial-process domination on a discrete grid.

    The radial part of a Brownian bridge from x to y at time t is co-simulated
    (Euler, with the direction and noise extracted from an exactly simulated
    vector bridge) against the constant-drift line that dominates it up to
    the comparison window t0 and above the level a:

        window (t0, a) = (beta/(2K), beta/2)      when t >= beta/K,
                         (t/2, beta - K t/2)      when t <  beta/K.

    Reported is the fraction of paths whose reference line drops below the
    Euler radial value at a grid point before the bridge norm reaches the
    level; the continuum comparison has no violations, so the rate measures
    pure discretisation error and vanishes under step refinement.  cfg.n_steps
    spans the window [0, t0].
    """
    from . import _kernels

    x = np.atleast_1d(np.asarray(x, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    t, beta, K = float(t), float(beta), float(K)
    if x.shape != y.shape:
        raise ValueError("start and endpoint must have the same dimension")
    if beta <= 0 or K < 0 or t <= 0:
        raise ValueError("need beta > 0, K >= 0 and t > 0")
    x_norm = float(np.linalg.norm(x))
    y_norm = float(np.linalg.norm(y))
    if x_norm <= beta:
        raise ValueError(f"start norm {x_norm:.6g} must exceed beta={beta}")
    if K > 0 and t >= beta / K:
        t0, level = beta / (2.0 * K), beta / 2.0
    else:
        t0, level = t / 2.0, beta - K * t / 2.0
    if y_norm < level:
        raise ValueError(
            f"endpoint norm {y_norm:.6g} below the comparison level {level:.6g}; "
            "the dominating drift is not certified there")
    m = x.shape[0]
    n = cfg.n_steps
    dt = t0 / n
    s_grid = dt * np.arange(n)
    inv_rem = 1.0 / (t - s_grid)
    pull = dt * inv_rem
    sigma = np.sqrt(dt * (t - s_grid - dt) * inv_rem)
    mu_bar = (y_norm - level) / (t - t0) + (m - 1) / (2.0 * level)
    sizes = _rng.chunk_sizes(cfg.n_paths)
    n_blocks = (n + _rng.BLOCK_STEPS - 1) // _rng.BLOCK_STEPS

    def worker(ci):
        n_chunk = sizes[ci]
        bridge = np.tile(x, (n_chunk, 1))
        s_rad = np.full(n_chunk, x_norm)
        s_ref = np.full(n_chunk, x_norm)
        status = np.zeros(n_chunk, dtype=np.int8)
        for bi in range(n_blocks):
            j0 = bi * _rng.BLOCK_STEPS
            j1 = min(n, j0 + _rng.BLOCK_STEPS)
            noise = _rng.stream(cfg.seed, _rng.OP_RADIAL, ci, bi, kind=0).standard_normal(
                (n_chunk, j1 - j0, m))
            _kernels.domination_chunk(bridge, s_rad, s_ref, status, noise,
                                      pull[j0:j1], sigma[j0:j1], inv_rem[j0:j1],
                                      y, mu_bar, level, dt, 0.5 * (m - 1), 1e-9)
        return int(np.sum(status == 2))

    violated = sum(_rng.thread_map(worker, len(sizes), _rng.resolve_threads(cfg.threads)))
    return _bernoulli(violated, cfg,
                      "violations are discretisation artifacts of the Euler radial step; "
                      "the continuum comparison has none")
