"""Numba path-simulation kernels.

All kernels advance a chunk of paths through one block of steps, mutating the
carried state arrays in place.  The position update

    x <- x + pull[j] * (target - x) + sigma[j] * noise[p, j]

covers free Brownian motion (pull = 0, sigma = sqrt(dt)) and exact Gaussian
bridge transitions (pull = dt/(t - s_j), sigma matching the bridge
conditional variance) with the same code path.

Survival bookkeeping is shared across barrier variants evaluated on the same
noise: `dead[p, v]` holds the grid index of the first failed membership check
(-1 while alive).  With the bridge correction enabled, each surviving step
multiplies a tangent half-space non-crossing factor into a running log
product, and the path is killed at the first step where the product drops
below the path's single uniform draw; sharing one uniform across variants
keeps nested variants nested pathwise.

Everything is sequential per path with no shared mutable state, so results
are reproducible bit for bit regardless of how chunks are scheduled.
"""

import math

from numba import njit

BIG = 1e300  # sentinel for an absent boundary
_LOG_SKIP = -38.0  # exp(arg) below double noise; skip the log1p


@njit(nogil=True, cache=True)
def radial_chunk(pos, noise, pull, sigma, target, centers, inner, outer,
                 prev_in, prev_out, logl, logu, dead, step0, dt, use_bridge):
    """Sections are radial shells: inner[j, v] < ||x - centers[j]|| < outer[j, v]."""
    n_paths, nb, m = noise.shape
    n_var = inner.shape[1]
    for p in range(n_paths):
        alive = 0
        for v in range(n_var):
            if dead[p, v] < 0:
                alive += 1
        if alive == 0:
            continue
        for j in range(nb):
            r2 = 0.0
            for d in range(m):
                x = pos[p, d] + pull[j] * (target[d] - pos[p, d]) + sigma[j] * noise[p, j, d]
                pos[p, d] = x
                dx = x - centers[j, d]
                r2 += dx * dx
            r = math.sqrt(r2)
            for v in range(n_var):
                if dead[p, v] >= 0:
                    continue
                d_out = outer[j, v] - r
                d_in = r - inner[j, v]
                if d_out <= 0.0 or d_in <= 0.0:
                    dead[p, v] = step0 + j + 1
                    alive -= 1
                    continue
                if use_bridge:
                    arg = -2.0 * prev_out[p, v] * d_out / dt
                    if arg > _LOG_SKIP:
                        logl[p, v] += math.log1p(-math.exp(arg))
                    arg = -2.0 * prev_in[p, v] * d_in / dt
                    if arg > _LOG_SKIP:
                        logl[p, v] += math.log1p(-math.exp(arg))
                    if logl[p, v] < logu[p]:
                        dead[p, v] = step0 + j + 1
                        alive -= 1
                        continue
                prev_out[p, v] = d_out
                prev_in[p, v] = d_in
            if alive == 0:
                break


@njit(nogil=True, cache=True)
def band_chunk(pos, noise, pull, sigma, target, lower, upper,
               prev_lo, prev_hi, logl, logu, dead, step0, dt, use_bridge):
    """1-D sections lower[j, v] < x < upper[j, v]; +-BIG marks a missing barrier."""
    n_paths, nb = noise.shape
    n_var = lower.shape[1]
    for p in range(n_paths):
        alive = 0
        for v in range(n_var):
            if dead[p, v] < 0:
                alive += 1
        if alive == 0:
            continue
        for j in range(nb):
            x = pos[p] + pull[j] * (target - pos[p]) + sigma[j] * noise[p, j]
            pos[p] = x
            for v in range(n_var):
                if dead[p, v] >= 0:
                    continue
                d_lo = x - lower[j, v]
                d_hi = upper[j, v] - x
                if d_lo <= 0.0 or d_hi <= 0.0:
                    dead[p, v] = step0 + j + 1
                    alive -= 1
                    continue
                if use_bridge:
                    arg = -2.0 * prev_lo[p, v] * d_lo / dt
                    if arg > _LOG_SKIP:
                        logl[p, v] += math.log1p(-math.exp(arg))
                    arg = -2.0 * prev_hi[p, v] * d_hi / dt
                    if arg > _LOG_SKIP:
                        logl[p, v] += math.log1p(-math.exp(arg))
                    if logl[p, v] < logu[p]:
                        dead[p, v] = step0 + j + 1
                        alive -= 1
                        continue
                prev_lo[p, v] = d_lo
                prev_hi[p, v] = d_hi
            if alive == 0:
                break


@njit(nogil=True, cache=True)
def polytope_chunk(pos, noise, pull, sigma, target, normals, offs, rownorm, eps,
                   prev_d, logl, logu, dead, step0, dt, use_bridge):
    """Sections are a polytope with per-step facet offsets offs[j, f].

    The interior signed distance min_f (offs[j, f] - u_f . x) / ||u_f|| is
    exact inside; each variant shifts it by eps[v] (an outer parallel set for
    eps > 0, the exact erosion for eps < 0).
    """
    n_paths, nb, m = noise.shape
    n_fac = normals.shape[0]
    n_var = eps.shape[0]
    for p in range(n_paths):
        alive = 0
        for v in range(n_var):
            if dead[p, v] < 0:
                alive += 1
        if alive == 0:
            continue
        for j in range(nb):
            for d in range(m):
                pos[p, d] = pos[p, d] + pull[j] * (target[d] - pos[p, d]) + sigma[j] * noise[p, j, d]
            dmin = BIG
            for f in range(n_fac):
                s = offs[j, f]
                for d in range(m):
                    s -= normals[f, d] * pos[p, d]
                s /= rownorm[f]
                if s < dmin:
                    dmin = s
            for v in range(n_var):
                if dead[p, v] >= 0:
                    continue
                dv = dmin + eps[v]
                if dv <= 0.0:
                    dead[p, v] = step0 + j + 1
                    alive -= 1
                    continue
                if use_bridge:
                    arg = -2.0 * prev_d[p, v] * dv / dt
                    if arg > _LOG_SKIP:
                        logl[p, v] += math.log1p(-math.exp(arg))
                    if logl[p, v] < logu[p]:
                        dead[p, v] = step0 + j + 1
                        alive -= 1
                        continue
                prev_d[p, v] = dv
            if alive == 0:
                break


@njit(nogil=True, cache=True)
def domination_chunk(bridge, s_rad, s_ref, status, noise, pull, sigma, inv_rem,
                     y, mu_bar, level, dt, half_m1, clamp):
    """Co-simulate the bridge radial process against its dominating line.

    Per step, from the exact bridge transition residual we extract the scalar
    noise increment along the current radial direction and feed the identical
    increment to both the Euler radial recursion `s_rad` (drift
    (xi . y - S)/(t - s) + (m - 1)/(2 S), S clamped below) and the constant
    drift reference `s_ref`.  A path stops cleanly when the bridge norm
    reaches `level` (the radial process has left the comparison window) and
    counts as a violation when the reference drops below the radial value at
    a grid point before that.

    status: 0 running, 1 stopped at the level or the window end, 2 violated.
    """
    n_paths, nb, m = noise.shape
    for p in range(n_paths):
        if status[p] != 0:
            continue
        for j in range(nb):
            nrm2 = 0.0
            for d in range(m):
                nrm2 += bridge[p, d] * bridge[p, d]
            nrm = math.sqrt(nrm2)
            if nrm < clamp:
                nrm = clamp
            xi_y = 0.0
            noise_rad = 0.0
            for d in range(m):
                xi_y += bridge[p, d] / nrm * y[d]
                noise_rad += bridge[p, d] / nrm * noise[p, j, d]
            s_cl = s_rad[p] if s_rad[p] > clamp else clamp
            drift = (xi_y - s_rad[p]) * inv_rem[j] + half_m1 / s_cl
            d_noise = sigma[j] * noise_rad
            for d in range(m):
                bridge[p, d] += pull[j] * (y[d] - bridge[p, d]) + sigma[j] * noise[p, j, d]
            s_rad[p] += drift * dt + d_noise
            s_ref[p] += mu_bar * dt + d_noise
            nrm2 = 0.0
            for d in range(m):
                nrm2 += bridge[p, d] * bridge[p, d]
            if math.sqrt(nrm2) <= level:
                status[p] = 1
                break
            if s_ref[p] < s_rad[p]:
                status[p] = 2
                break
