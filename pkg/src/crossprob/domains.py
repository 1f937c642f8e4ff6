"""Concrete time-space domains and certification of their class parameters.

A domain is a time interval [0, T] together with an open spatial section for
every t, drawn from a small family of tube shapes whose sections move
piecewise-linearly in time.  Certification produces the quadruple
(K, beta, gamma, v0): the section Lipschitz rate in the two-sided Hausdorff
metric, the exterior tangent-ball radius, and the mass-near-boundary rate
with its validity radius.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _rng
from .closedform import Polyline
from .geometry import Annulus, Ball, Band1D, ConvexPolytope, rho_H, signed_distance

__all__ = [
    "VectorPolyline",
    "BallTube",
    "TruncatedCone",
    "Band1DTube",
    "PolytopeTube",
    "AnnulusTube",
    "TimeSpaceDomain",
    "DomainCertificate",
    "make_domain",
    "estimate_lipschitz",
    "analytic_lipschitz",
    "exterior_ball_radius",
    "estimate_gamma",
    "certify_domain",
]

_ANCHOR_TOL = 1e-7


@dataclass(frozen=True)
class VectorPolyline:
    """Piecewise-linear path in R^m given by knots and per-knot points."""

    knots: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        k = np.atleast_1d(np.asarray(self.knots, dtype=float))
        v = np.atleast_2d(np.asarray(self.values, dtype=float))
        if v.shape[0] != k.size or k.size < 2:
            raise ValueError("need one point per knot, at least two knots")
        if k[0] != 0.0 or np.any(np.diff(k) <= 0):
            raise ValueError("knots must start at 0 and strictly increase")
        if not np.all(np.isfinite(v)):
            raise ValueError("path points must be finite")
        object.__setattr__(self, "knots", k)
        object.__setattr__(self, "values", v)

    @property
    def horizon(self):
        return float(self.knots[-1])

    @property
    def dim(self):
        return self.values.shape[1]

    def __call__(self, t):
        return np.array([np.interp(t, self.knots, self.values[:, j]) for j in range(self.dim)])

    def as_dict(self):
        return {"knots": list(map(float, self.knots)), "values": [list(map(float, row)) for row in self.values]}


def constant_path(value, horizon):
    """Scalar Polyline constant at value on [0, horizon]."""
    return Polyline([0.0, float(horizon)], [float(value), float(value)])


def constant_vector_path(point, horizon):
    p = np.atleast_1d(np.asarray(point, dtype=float))
    return VectorPolyline([0.0, float(horizon)], np.vstack([p, p]))


@dataclass(frozen=True)
class BallTube:
    """Sections are balls with piecewise-linear center and radius."""

    center: VectorPolyline
    radius: Polyline

    def __post_init__(self):
        if self.center.horizon != self.radius.horizon:
            raise ValueError("center and radius paths must share the horizon")
        if np.min(self.radius.values) <= 0:
            raise ValueError("radius path must stay positive")

    @property
    def dim(self):
        return self.center.dim

    @property
    def horizon(self):
        return self.radius.horizon

    def section(self, t):
        return Ball(self.center(t), float(self.radius(t)))


@dataclass(frozen=True)
class TruncatedCone:
    """Sections are centered balls of radius u - slope * t."""

    u: float
    slope: float
    dim_: int
    horizon_: float

    def __post_init__(self):
        if self.u <= 0 or self.slope < 0:
            raise ValueError("need u > 0 and slope >= 0")
        if self.u - self.slope * self.horizon_ <= 0:
            raise ValueError("cone radius must stay positive up to the horizon")

    @property
    def dim(self):
        return self.dim_

    @property
    def horizon(self):
        return self.horizon_

    def section(self, t):
        return Ball(np.zeros(self.dim_), self.u - self.slope * t)


@dataclass(frozen=True)
class Band1DTube:
    """1-D sections between piecewise-linear barriers; None means no barrier."""

    lower: Polyline | None
    upper: Polyline | None

    def __post_init__(self):
        if self.lower is None and self.upper is None:
            raise ValueError("at least one barrier is required")
        if self.lower is not None and self.upper is not None:
            if self.lower.horizon != self.upper.horizon:
                raise ValueError("barriers must share the horizon")
            knots = np.unique(np.concatenate([self.lower.knots, self.upper.knots]))
            if np.any(self.lower(knots) >= self.upper(knots)):
                raise ValueError("lower barrier must stay strictly below upper")

    @property
    def dim(self):
        return 1

    @property
    def horizon(self):
        return self.lower.horizon if self.lower is not None else self.upper.horizon

    def section(self, t):
        lo = float(self.lower(t)) if self.lower is not None else -math.inf
        hi = float(self.upper(t)) if self.upper is not None else math.inf
        return Band1D(lo, hi)


@dataclass(frozen=True)
class PolytopeTube:
    """A fixed bounded polytope, optionally translated along a path."""

    polytope: ConvexPolytope
    translation: VectorPolyline | None
    horizon_: float

    def __post_init__(self):
        if self.horizon_ <= 0:
            raise ValueError("horizon must be positive")
        if self.translation is not None:
            if self.translation.dim != self.polytope.dim:
                raise ValueError("translation dimension mismatch")
            if self.translation.horizon != self.horizon_:
                raise ValueError("translation path must cover the horizon")
        self.polytope.chebyshev_center()  # nonempty interior
        if not self.polytope.is_bounded():
            raise ValueError("polytope cross-section must be bounded")

    @property
    def dim(self):
        return self.polytope.dim

    @property
    def horizon(self):
        return self.horizon_

    def section(self, t):
        if self.translation is None:
            return self.polytope
        shift = self.polytope.normals @ self.translation(t)
        return ConvexPolytope(self.polytope.normals, self.polytope.offsets + shift)


@dataclass(frozen=True)
class AnnulusTube:
    """Sections are concentric annuli with piecewise-linear radii."""

    center: np.ndarray
    inner: Polyline
    outer: Polyline

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.center, dtype=float))
        object.__setattr__(self, "center", c)
        if self.inner.horizon != self.outer.horizon:
            raise ValueError("inner and outer radius paths must share the horizon")
        knots = np.unique(np.concatenate([self.inner.knots, self.outer.knots]))
        inner_v, outer_v = self.inner(knots), self.outer(knots)
        if np.any(inner_v <= 0) or np.any(inner_v >= outer_v):
            raise ValueError("need 0 < inner < outer along the whole tube")

    @property
    def dim(self):
        return self.center.shape[0]

    @property
    def horizon(self):
        return self.inner.horizon

    def section(self, t):
        return Annulus(self.center, float(self.inner(t)), float(self.outer(t)))


_FAMILIES = (BallTube, TruncatedCone, Band1DTube, PolytopeTube, AnnulusTube)


@dataclass(frozen=True)
class TimeSpaceDomain:
    """A tube family with its horizon and the path start point.

    The canonical anchoring puts the start on the boundary of the initial
    section; interior starts are allowed and recorded (crossing
    probabilities are translation-anchored at the start either way).  A
    start outside the closure of the initial section is rejected.
    """

    family: object
    start: np.ndarray | None = None

    def __post_init__(self):
        if not isinstance(self.family, _FAMILIES):
            raise ValueError(f"unknown domain family {type(self.family).__name__}")
        if self.start is not None:
            s = np.atleast_1d(np.asarray(self.start, dtype=float))
            if s.shape[0] != self.family.dim:
                raise ValueError("start dimension mismatch")
            object.__setattr__(self, "start", s)
        d0 = signed_distance(self.family.section(0.0), self.start_point())
        if d0 < -_ANCHOR_TOL:
            raise ValueError(f"start lies outside the initial section (signed distance {d0:.3g})")
        object.__setattr__(self, "boundary_anchored", abs(d0) <= _ANCHOR_TOL)

    @property
    def dim(self):
        return self.family.dim

    @property
    def horizon(self):
        return self.family.horizon

    def section(self, t):
        t = float(t)
        if t < -1e-12 or t > self.horizon + 1e-12:
            raise ValueError(f"t={t} outside [0, {self.horizon}]")
        return self.family.section(min(max(t, 0.0), self.horizon))

    def start_point(self):
        return np.zeros(self.dim) if self.start is None else self.start

    def min_section_thickness(self):
        """Smallest over t of the deepest interior distance of section(t)."""
        fam = self.family
        if isinstance(fam, BallTube):
            return float(np.min(fam.radius.values))
        if isinstance(fam, TruncatedCone):
            return fam.u - fam.slope * fam.horizon_
        if isinstance(fam, Band1DTube):
            if fam.lower is None or fam.upper is None:
                return math.inf
            knots = np.unique(np.concatenate([fam.lower.knots, fam.upper.knots]))
            return float(np.min(fam.upper(knots) - fam.lower(knots))) / 2.0
        if isinstance(fam, PolytopeTube):
            return fam.polytope.chebyshev_center()[1]
        knots = np.unique(np.concatenate([fam.inner.knots, fam.outer.knots]))
        return float(np.min(fam.outer(knots) - fam.inner(knots))) / 2.0


def make_domain(spec):
    """Build a TimeSpaceDomain from a plain-dict description (the CLI format).

    spec["family"] selects the shape; remaining keys are family parameters.
    Scalar paths are either a number (constant) or {"knots": [...],
    "values": [...]}; vector paths use per-knot points.
    """
    if not isinstance(spec, dict) or "family" not in spec:
        raise ValueError("domain spec must be a dict with a 'family' key")
    spec = dict(spec)
    family = spec.pop("family")
    start = spec.pop("start", None)
    try:
        horizon = float(spec.pop("T"))
    except KeyError:
        raise ValueError("domain spec needs a horizon T") from None
    if horizon <= 0:
        raise ValueError(f"T must be positive, got {horizon}")

    def scalar_path(value):
        if isinstance(value, dict):
            return Polyline(value["knots"], value["values"])
        return constant_path(value, horizon)

    def vector_path(value, dim=None):
        if isinstance(value, dict):
            return VectorPolyline(value["knots"], value["values"])
        return constant_vector_path(value if value is not None else np.zeros(dim), horizon)

    if family == "ball_tube":
        center = spec.get("center")
        if "m" in spec:
            m = int(spec["m"])
        elif isinstance(center, dict):
            m = len(center["values"][0])
        elif center is not None:
            m = np.atleast_1d(np.asarray(center, dtype=float)).shape[0]
        else:
            raise ValueError("ball_tube needs m or an explicit center")
        fam = BallTube(vector_path(center, m), scalar_path(spec["radius"]))
    elif family == "truncated_cone":
        fam = TruncatedCone(float(spec["u"]), float(spec["slope"]), int(spec["m"]), horizon)
    elif family == "band1d_tube":
        lower = spec.get("lower")
        upper = spec.get("upper")
        fam = Band1DTube(
            None if lower is None else scalar_path(lower),
            None if upper is None else scalar_path(upper),
        )
    elif family == "polytope_tube":
        poly = ConvexPolytope(np.asarray(spec["normals"], dtype=float), np.asarray(spec["offsets"], dtype=float))
        translation = spec.get("translation")
        fam = PolytopeTube(poly, None if translation is None else vector_path(translation), horizon)
    elif family == "annulus_tube":
        center = np.asarray(spec.get("center", np.zeros(2)), dtype=float)
        fam = AnnulusTube(center, scalar_path(spec["inner"]), scalar_path(spec["outer"]))
    else:
        raise ValueError(f"unknown domain family {family!r}")
    if fam.horizon != horizon:
        raise ValueError(f"family paths end at {fam.horizon}, spec says T={horizon}")
    return TimeSpaceDomain(fam, start)


def analytic_lipschitz(domain):
    """Exact section Lipschitz rate from the family's path slopes, or None.

    For piecewise-linear paths the two-sided Hausdorff distance between
    nearby sections is linear in the time step on each piece, so the rate is
    the maximal piece slope: |center'| + |radius'| for ball tubes, the cone
    slope, max(|lower'|, |upper'|) for bands, |translation'| for polytope
    tubes, max(|inner'|, |outer'|) for annulus tubes.
    """
    fam = domain.family
    if isinstance(fam, TruncatedCone):
        return float(fam.slope)
    if isinstance(fam, BallTube):
        knots = np.unique(np.concatenate([fam.center.knots, fam.radius.knots]))
        centers = np.column_stack([np.interp(knots, fam.center.knots, fam.center.values[:, j]) for j in range(fam.dim)])
        radii = fam.radius(knots)
        dts = np.diff(knots)
        rate = np.linalg.norm(np.diff(centers, axis=0), axis=1) / dts + np.abs(np.diff(radii)) / dts
        return float(np.max(rate))
    if isinstance(fam, Band1DTube):
        rates = []
        for p in (fam.lower, fam.upper):
            if p is not None:
                rates.append(np.max(np.abs(np.diff(p.values) / np.diff(p.knots))))
        return float(max(rates))
    if isinstance(fam, PolytopeTube):
        if fam.translation is None:
            return 0.0
        path = fam.translation
        steps = np.linalg.norm(np.diff(path.values, axis=0), axis=1) / np.diff(path.knots)
        return float(np.max(steps))
    if isinstance(fam, AnnulusTube):
        rates = [np.max(np.abs(np.diff(p.values) / np.diff(p.knots))) for p in (fam.inner, fam.outer)]
        return float(max(rates))
    return None


def estimate_lipschitz(domain, grid=None, refine_until=0.01, max_refinements=4, resolution=1e-3):
    """Grid estimate of the section Lipschitz rate: the max over adjacent
    grid times of rho_H(section(s), section(t)) / (t - s).

    A lower estimate of the true rate (the sup is over all pairs); the
    default grid is 256 uniform intervals augmented with the family's own
    knot times, and is refined by doubling until the estimate moves by less
    than refine_until (relative).
    """
    T = domain.horizon
    if grid is None:
        base = np.linspace(0.0, T, 257)
        knots = _family_knots(domain.family)
        grid = np.unique(np.concatenate([base, knots]))
        refine = True
    else:
        grid = np.asarray(grid, dtype=float)
        if grid.size < 2 or np.any(np.diff(grid) <= 0):
            raise ValueError("grid must be strictly increasing with at least 2 points")
        if grid[0] < -1e-12 or grid[-1] > T + 1e-12:
            raise ValueError("grid must lie within [0, T]")
        refine = False

    def rate_on(g):
        worst = 0.0
        prev = domain.section(g[0])
        for s, t in zip(g[:-1], g[1:]):
            cur = domain.section(t)
            worst = max(worst, rho_H(prev, cur, resolution=resolution).value / (t - s))
            prev = cur
        return worst

    k_hat = rate_on(grid)
    if refine:
        for _ in range(max_refinements):
            mids = 0.5 * (grid[:-1] + grid[1:])
            grid = np.unique(np.concatenate([grid, mids]))
            k_new = rate_on(grid)
            converged = abs(k_new - k_hat) <= refine_until * max(k_hat, 1e-12)
            k_hat = max(k_hat, k_new)
            if converged:
                break
    return k_hat


def _family_knots(fam):
    if isinstance(fam, BallTube):
        return np.concatenate([fam.center.knots, fam.radius.knots])
    if isinstance(fam, Band1DTube):
        return np.concatenate([p.knots for p in (fam.lower, fam.upper) if p is not None])
    if isinstance(fam, PolytopeTube):
        return fam.translation.knots if fam.translation is not None else np.array([0.0, fam.horizon])
    if isinstance(fam, AnnulusTube):
        return np.concatenate([fam.inner.knots, fam.outer.knots])
    return np.array([0.0, fam.horizon])


def exterior_ball_radius(domain):
    """The exterior tangent-ball radius of the sections.

    Convex sections (balls, cones, bands, polytopes) admit exterior tangent
    balls of every radius, returned as +inf; callers clamp it against K (see
    the bounds module).  Annulus sections are limited by the inner disc, so
    the radius is the smallest inner radius along the tube.
    """
    fam = domain.family
    if isinstance(fam, (BallTube, TruncatedCone, Band1DTube, PolytopeTube)):
        return math.inf
    if isinstance(fam, AnnulusTube):
        return float(np.min(fam.inner.values))
    raise ValueError(f"family {type(fam).__name__} needs a manual certificate")


def estimate_gamma(domain, t_grid=None, v_grid=None, n=100_000, seed=0, threads=None):
    """Monte-Carlo certificate (gamma_hat, v0_hat) for the mass-near-boundary
    condition: E[(1 + |W_t|) ; 0 < dist(W_t, complement) < v] < gamma * v.

    gamma_hat is the sup over the t x v grid of the estimated ratio inflated
    by 3 standard errors.  v0_hat is the largest grid v below which the
    ratio stays flat in v within a joint 3 sigma band (per t, then the min
    over t), reflecting that the condition is a small-v statement.  A single
    uniform v0_hat is reported even though the condition is stated per t.
    Deterministic for fixed seed, any thread count.
    """
    n = int(n)
    if n < 10_000:
        raise ValueError(f"n={n} too small for a 3-sigma certificate; need at least 10000")
    T = domain.horizon
    if t_grid is None:
        t_grid = T * np.array([0.25, 0.5, 0.75])
    t_grid = np.asarray(t_grid, dtype=float)
    if np.any(t_grid <= 0) or np.any(t_grid > T):
        raise ValueError("t grid must lie in (0, T]")
    thickness = domain.min_section_thickness()
    if v_grid is None:
        v_max = 0.4 * min(thickness, 1.0) if math.isfinite(thickness) else 0.4
        v_grid = v_max * np.linspace(0.1, 1.0, 10)
    v_grid = np.sort(np.asarray(v_grid, dtype=float))
    if v_grid[0] <= 0 or v_grid[-1] >= thickness:
        raise ValueError(f"v grid must lie in (0, {thickness}) for this domain")

    x0 = domain.start_point()
    threads = _rng.resolve_threads(threads)
    sizes = _rng.chunk_sizes(n)
    gamma_hat = 0.0
    v0_by_t = []
    for ti, t in enumerate(t_grid):
        section = domain.section(t)

        def run(ci, t=t, section=section, ti=ti):
            gen = _rng.stream(seed, _rng.OP_GAMMA, chunk=ci, block=ti)
            w = x0 + math.sqrt(t) * gen.standard_normal((sizes[ci], domain.dim))
            s = section.signed_distance(w)
            weight = 1.0 + np.linalg.norm(w, axis=1)
            sums, sqs = [], []
            for v in v_grid:
                contrib = np.where((s > 0) & (s < v), weight, 0.0)
                sums.append(float(contrib.sum()))
                sqs.append(float((contrib * contrib).sum()))
            return sums, sqs

        parts = _rng.thread_map(run, len(sizes), threads)
        ratios, sigmas = [], []
        for vi, v in enumerate(v_grid):
            mean, stderr = _rng.merge_mean_stderr(
                [p[0][vi] for p in parts], [p[1][vi] for p in parts], n
            )
            ratios.append(mean / v)
            sigmas.append(stderr / v)
            gamma_hat = max(gamma_hat, (mean + 3.0 * stderr) / v)
        v0_by_t.append(_largest_flat_v(v_grid, ratios, sigmas))
    return float(gamma_hat), float(min(v0_by_t))


def _largest_flat_v(v_grid, ratios, sigmas):
    """Largest v whose smaller-v ratios all match the smallest-v ratio
    within a joint 3 sigma band."""
    v0 = v_grid[0]
    for j in range(1, len(v_grid)):
        joint = 3.0 * math.hypot(sigmas[j], sigmas[0])
        if abs(ratios[j] - ratios[0]) > joint:
            break
        v0 = v_grid[j]
    return v0


@dataclass(frozen=True)
class DomainCertificate:
    """Certified class parameters (K, beta, gamma, v0) with provenance.

    beta may be +inf, meaning sections admit exterior tangent balls of every
    radius (serialized as "any"); gamma may be 0 for domains with no mass
    near the boundary.  K = 0 (static sections) is representable but the
    bounds module rejects it, since the certified gap constant needs a
    positive Lipschitz certificate.
    """

    m: int
    T: float
    K: float
    beta: float
    gamma: float
    v0: float
    provenance: dict

    def __post_init__(self):
        if self.m < 1 or self.T <= 0:
            raise ValueError("need m >= 1 and T > 0")
        if self.K < 0 or not math.isfinite(self.K):
            raise ValueError(f"K must be finite and nonnegative, got {self.K}")
        if self.beta <= 0:
            raise ValueError(f"beta must be positive (possibly inf), got {self.beta}")
        if self.gamma < 0 or not math.isfinite(self.gamma):
            raise ValueError(f"gamma must be finite and nonnegative, got {self.gamma}")
        if self.v0 <= 0 or not math.isfinite(self.v0):
            raise ValueError(f"v0 must be positive and finite, got {self.v0}")

    def as_dict(self):
        return {
            "m": self.m,
            "T": self.T,
            "K": self.K,
            "beta": "any" if math.isinf(self.beta) else self.beta,
            "gamma": self.gamma,
            "v0": self.v0,
            "provenance": self.provenance,
        }

    @staticmethod
    def from_dict(d):
        beta = d["beta"]
        if beta == "any":
            beta = math.inf
        return DomainCertificate(
            int(d["m"]), float(d["T"]), float(d["K"]), float(beta),
            float(d["gamma"]), float(d["v0"]), dict(d.get("provenance", {})),
        )


def certify_domain(domain, n=100_000, seed=0, t_grid=None, v_grid=None, threads=None):
    """Full certificate for a domain: analytic K and beta where the family
    permits, Monte-Carlo gamma and v0."""
    k_exact = analytic_lipschitz(domain)
    if k_exact is not None:
        k_value, k_prov = k_exact, {"method": "analytic"}
    else:
        k_value = estimate_lipschitz(domain)
        k_prov = {"method": "estimated", "kind": "grid", "note": "lower estimate"}
    beta = exterior_ball_radius(domain)
    gamma_hat, v0_hat = estimate_gamma(domain, t_grid, v_grid, n=n, seed=seed, threads=threads)
    return DomainCertificate(
        m=domain.dim,
        T=domain.horizon,
        K=k_value,
        beta=beta,
        gamma=gamma_hat,
        v0=v0_hat,
        provenance={
            "K": k_prov,
            "beta": {"method": "analytic"},
            "gamma": {"method": "estimated", "seed": seed, "n": n},
            "v0": {"method": "estimated", "seed": seed, "n": n},
        },
    )
