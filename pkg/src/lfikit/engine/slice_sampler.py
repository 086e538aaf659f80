"""Coordinate-alternating slice sampling (step-out and shrink).

Deliberately the vanilla procedure: it mixes poorly between well-separated
non-axis-aligned modes, which some experiments are meant to exhibit.
"""

from __future__ import annotations

import numpy as np


def slice_sample(log_density, x0: np.ndarray, n_samples: int,
                 rng: np.random.Generator, widths, burn_in: int = 0,
                 thinning: int = 1, max_stepout: int = 100):
    """Markov chain of n_samples points targeting exp(log_density).

    widths: per-dimension initial bracket sizes. Returns (samples, n_evals).
    """
    x = np.array(x0, dtype=np.float64)
    d = x.size
    widths = np.broadcast_to(np.asarray(widths, dtype=np.float64), (d,))
    evals = 0

    def logp(v):
        nonlocal evals
        evals += 1
        out = float(log_density(v))
        return out if not np.isnan(out) else -np.inf

    cur = logp(x)
    out = np.empty((n_samples, d))
    kept = 0
    it = 0
    while kept < n_samples:
        it += 1
        for dd in range(d):
            level = cur + np.log1p(-rng.random())  # log of u * exp(cur)
            u = rng.random()
            left = x.copy()
            right = x.copy()
            left[dd] = x[dd] - u * widths[dd]
            right[dd] = x[dd] + (1.0 - u) * widths[dd]
            steps = 0
            while logp(left) > level and steps < max_stepout:
                left[dd] -= widths[dd]
                steps += 1
            steps = 0
            while logp(right) > level and steps < max_stepout:
                right[dd] += widths[dd]
                steps += 1
            while True:
                prop = x.copy()
                prop[dd] = left[dd] + rng.random() * (right[dd] - left[dd])
                cand = logp(prop)
                if cand > level:
                    x = prop
                    cur = cand
                    break
                if prop[dd] > x[dd]:
                    right[dd] = prop[dd]
                elif prop[dd] < x[dd]:
                    left[dd] = prop[dd]
                else:
                    # bracket collapsed onto the current point
                    cur = logp(x)
                    break
        if it > burn_in and (it - burn_in) % thinning == 0:
            out[kept] = x
            kept += 1
    return out, evals
