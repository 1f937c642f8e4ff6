"""Certified closed-form bounds, as pure functions of a domain certificate.

All bounds assume the horizon is normalized to 1 (the CLI rescales domains
first) and use the clamped exterior-ball radius beta_eff = min(beta, K/2):
larger exterior tangent balls imply smaller ones, so the clamp is sound, and
the dilation budget is capped at eps <= beta_eff/2.  Probability-valued
bounds are clipped to [0, 1] by default; pass raw=True for the unclipped
value (dominance plots).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

__all__ = [
    "CertifiedBound",
    "GapConstant",
    "certified_gap_constant",
    "density_envelope",
    "density_envelope_branches",
    "survival_given_endpoint_bound",
    "endpoint_survival_branches",
    "bridge_cone_survival_bound",
    "bridge_cone_branches",
    "quick_exit_bound",
    "cone_survival_bound",
    "cone_survival_branches",
    "linear_noncrossing_bound",
]

_SQRT_2_OVER_PI = math.sqrt(2.0 / math.pi)


def _check_cert(cert):
    if abs(cert.T - 1.0) > 1e-9:
        raise ValueError(f"bounds require the horizon normalized to 1, got T={cert.T}; rescale the domain first")


def beta_effective(cert):
    """min(beta, K/2); the unclamped beta when K = 0 (no slope to clamp by)."""
    return min(cert.beta, cert.K / 2.0) if cert.K > 0 else cert.beta


@dataclass(frozen=True)
class CertifiedBound:
    """A certified dilation-gap bound: P(G^(eps)) - P(G) <= c * eps."""

    epsilon: float
    c: float
    c_star: float
    certified_gap: float
    beta_eff: float

    def __post_init__(self):
        if self.certified_gap != min(1.0, self.c * self.epsilon):
            raise ValueError("certified_gap must equal min(1, c * epsilon)")
        if self.c < 2.0 * _SQRT_2_OVER_PI:
            raise ValueError(f"gap constant {self.c} below its structural floor 2*sqrt(2/pi)")

    def as_dict(self):
        return {
            "epsilon": self.epsilon,
            "c": self.c,
            "c_star": self.c_star,
            "certified_gap": self.certified_gap,
            "beta_eff": self.beta_eff,
        }


@dataclass(frozen=True)
class GapConstant:
    """The explicit gap constant c(K, beta, gamma) with its intermediate
    rate; call it with a dilation radius to obtain a CertifiedBound."""

    m: int
    K: float
    beta_eff: float
    gamma: float
    c_star: float
    c: float

    def __call__(self, epsilon):
        epsilon = float(epsilon)
        if epsilon < 0:
            raise ValueError(f"epsilon must be nonnegative, got {epsilon}")
        if epsilon > self.beta_eff / 2.0:
            raise ValueError(
                f"epsilon={epsilon} exceeds the certified budget beta_eff/2={self.beta_eff / 2:.6g}"
            )
        return CertifiedBound(
            epsilon=epsilon,
            c=self.c,
            c_star=self.c_star,
            certified_gap=min(1.0, self.c * epsilon),
            beta_eff=self.beta_eff,
        )


def certified_gap_constant(cert):
    """Assemble the explicit dilation-gap constant from a certificate.

    With b = min(beta, K/2):
      c_star = sqrt(2/pi) + 8 m^2 gamma sqrt(2/pi) (sqrt(K/(pi b)) + 2(b+2)
               + (m-1)/b + K)
      c      = 2 (c_star + sqrt(2K/(pi b)) + 2(m-1)/b + K)
    The returned factory rejects dilation radii above b/2.
    """
    _check_cert(cert)
    if cert.K == 0:
        raise ValueError("certified gap constant undefined at K=0; pass a positive Lipschitz certificate")
    if cert.gamma < 0:
        raise ValueError(f"gamma must be nonnegative, got {cert.gamma}")
    m, k, gamma = cert.m, cert.K, cert.gamma
    b = beta_effective(cert)
    c_star = _SQRT_2_OVER_PI + 8.0 * m * m * gamma * _SQRT_2_OVER_PI * (
        math.sqrt(k / (math.pi * b)) + 2.0 * (b + 2.0) + (m - 1) / b + k
    )
    c = 2.0 * (c_star + math.sqrt(2.0 * k / (math.pi * b)) + 2.0 * (m - 1) / b + k)
    return GapConstant(m=m, K=k, beta_eff=b, gamma=gamma, c_star=c_star, c=c)


def density_envelope_branches(t, cert):
    """Both branch values of the exit-time density envelope at time t.

    The early branch applies for t < min(beta_eff/K, 1), the late branch
    after; the two agree exactly at the split.  Values may be +inf near
    t = 0 (the envelope diverges like 2/t).
    """
    m, k, gamma = cert.m, cert.K, cert.gamma
    b = beta_effective(cert)
    lead = 8.0 * m * m * gamma
    early = lead * (math.sqrt(1.0 / (math.pi * t)) + _ratio(m - 1, 2.0 * b - k * t) + 2.0 * k + 2.0 / t)
    if k > 0 and t >= b / k:
        late = lead * (
            math.sqrt(k / (math.pi * b)) + (b + 2.0) / (2.0 * t - b / k) + _ratio(m - 1, b) + k
        )
    else:
        late = math.inf  # late branch valid only past the split
    return early, late


def density_envelope(t, cert):
    """Pointwise envelope of the boundary-hitting density on (0, 1)."""
    _check_cert(cert)
    t = float(t)
    if not 0.0 < t < 1.0:
        raise ValueError(f"t must lie in (0, 1), got {t}")
    early, late = density_envelope_branches(t, cert)
    b = beta_effective(cert)
    split = min(b / cert.K, 1.0) if cert.K > 0 else 1.0
    return early if t < split else late


def endpoint_survival_branches(t, z_norm, r, cert):
    """Both branch values of the endpoint-conditioned survival bound."""
    m, k = cert.m, cert.K
    b = beta_effective(cert)
    early = 2.0 * r * (
        math.sqrt(1.0 / (math.pi * t)) + 2.0 * (z_norm + r) / t + _ratio(m - 1, 2.0 * b - k * t) + 2.0 * k
    )
    if k > 0 and t > b / (2.0 * k):
        late = 2.0 * r * (
            math.sqrt(k / (math.pi * b)) + (z_norm + r + b / 2.0) / (t - b / (2.0 * k)) + _ratio(m - 1, b) + k
        )
    else:
        late = math.inf
    return early, late


def survival_given_endpoint_bound(t, z_norm, r, cert, raw=False):
    """Bound on the survival probability of a path pinned at distance r
    inside the section at time t, with endpoint norm |z|.

    Branches split at t = beta_eff/K and agree there exactly; the result is
    proportional to 2r and clipped to [0, 1] unless raw=True.
    """
    _check_cert(cert)
    t, r = float(t), float(r)
    if not 0.0 < t < 1.0:
        raise ValueError(f"t must lie in (0, 1), got {t}")
    if r <= 0:
        raise ValueError(f"r must be positive, got {r}")
    early, late = endpoint_survival_branches(t, z_norm, r, cert)
    b = beta_effective(cert)
    value = early if (cert.K == 0 or t < b / cert.K) else late
    return value if raw else min(1.0, max(0.0, value))


def bridge_cone_branches(u, t, x_norm, y_norm, cert):
    """Both regime values of the bridge cone-exit bound."""
    m, k = cert.m, cert.K
    b = beta_effective(cert)
    tail = math.sqrt(2.0 / (math.pi * u))
    early = (x_norm - b) * (
        tail + 2.0 * max(0.0, 2.0 * (y_norm - b) / t + _ratio(m - 1, 2.0 * b - k * t) + 2.0 * k)
    )
    if k > 0 and t > b / (2.0 * k):
        late = (x_norm - b) * (
            tail + 2.0 * max(0.0, (y_norm - b / 2.0) / (t - b / (2.0 * k)) + _ratio(m - 1, b) + k)
        )
    else:
        late = math.inf
    return early, late


def bridge_cone_survival_bound(u, t, x_norm, y_norm, cert):
    """Bound on the probability that a bridge started at x (norm above
    beta_eff) avoids the shrinking central cone for u more time units.

    Regimes: t < beta_eff/K requires u <= t/2; t >= beta_eff/K requires
    u <= beta_eff/(2K); the two displays agree at the common corner."""
    _check_cert(cert)
    u, t = float(u), float(t)
    b = beta_effective(cert)
    k = cert.K
    if not u > 0:
        raise ValueError(f"u must be positive, got {u}")
    if x_norm <= b:
        raise ValueError(f"start norm {x_norm} must exceed beta_eff={b:.6g}")
    early_regime = k == 0 or t < b / k
    if early_regime:
        if u > t / 2.0:
            raise ValueError(f"regime t < beta_eff/K requires u <= t/2, got u={u}, t/2={t / 2}")
        return bridge_cone_branches(u, t, x_norm, y_norm, cert)[0]
    if u > b / (2.0 * k):
        raise ValueError(
            f"regime t >= beta_eff/K requires u <= beta_eff/(2K), got u={u}, beta_eff/(2K)={b / (2 * k):.6g}"
        )
    return bridge_cone_branches(u, t, x_norm, y_norm, cert)[1]


def quick_exit_bound(h, r, t, cert):
    """Bound on the probability of exiting within h more time units from a
    point at depth r inside the section: min(1, 2m exp(rK/m - r^2/(2hm)))."""
    _check_cert(cert)
    h, r, t = float(h), float(r), float(t)
    if r <= 0:
        raise ValueError(f"r must be positive, got {r}")
    if not 0.0 <= t < 1.0:
        raise ValueError(f"t must lie in [0, 1), got {t}")
    limit = min(r / cert.K if cert.K > 0 else math.inf, 1.0 - t)
    if not 0.0 < h < limit:
        raise ValueError(f"h must lie in (0, min(r/K, 1-t)) = (0, {limit:.6g}), got {h}")
    m = cert.m
    return min(1.0, 2.0 * m * math.exp(r * cert.K / m - r * r / (2.0 * h * m)))


def cone_survival_branches(t, x_norm, r, cert):
    """Both branch values of the shrinking-cone avoidance bound."""
    m, k = cert.m, cert.K
    early = 2.0 * (x_norm - r) * (math.sqrt(1.0 / (math.pi * t)) + _ratio(m - 1, 2.0 * r - k * t) + k)
    if k > 0 and t >= r / (2.0 * k):
        late = 2.0 * (x_norm - r) * (math.sqrt(k / (math.pi * r)) + _ratio(m - 1, r) + k)
    else:
        late = math.inf
    return early, late


def cone_survival_bound(t, x_norm, r, cert, raw=False):
    """Bound on the probability that a path started at norm |x| stays out
    of the shrinking central ball of initial radius r up to time t.

    Branches split at t = r/K and agree there exactly; clipped to [0, 1]
    unless raw=True."""
    _check_cert(cert)
    t, r = float(t), float(r)
    if not 0 < r < x_norm:
        raise ValueError(f"need 0 < r < x_norm, got r={r}, x_norm={x_norm}")
    if not t > 0:
        raise ValueError(f"t must be positive, got {t}")
    early, late = cone_survival_branches(t, x_norm, r, cert)
    value = early if (cert.K == 0 or t < r / cert.K) else late
    return value if raw else min(1.0, max(0.0, value))


def linear_noncrossing_bound(t, c, eps):
    """Linear upper bound on the linear-barrier survival probability:
    min(1, eps (sqrt(2/(pi t)) + 2 max(0, c))); dominates the exact law."""
    t, eps = float(t), float(eps)
    if not t > 0:
        raise ValueError(f"t must be positive, got {t}")
    if not eps > 0:
        raise ValueError(f"eps must be positive, got {eps}")
    return min(1.0, eps * (math.sqrt(2.0 / (math.pi * t)) + 2.0 * max(0.0, float(c))))


def _ratio(num, den):
    """num/den with the 0/0 convention 0 (vanishing dimension terms)."""
    if num == 0:
        return 0.0
    if den <= 0:
        return math.inf
    return num / den
