"""Independent numeric oracles shared by the test suite.

These deliberately use brute-force quadrature / enumeration, not the code
paths they check.
"""

import numpy as np


def trapezoid_grid_1d(f, lo, hi, n=4001):
    """Integral of f over [lo, hi] by trapezoid on a dense grid."""
    xs = np.linspace(lo, hi, n)
    return np.trapezoid(f(xs[:, None]), xs)


def trapezoid_grid_2d(f, lo, hi, n=401):
    """Integral of f over [lo, hi]^2; f takes (m, 2) points."""
    xs = np.linspace(lo, hi, n)
    xx, yy = np.meshgrid(xs, xs, indexing="ij")
    pts = np.column_stack([xx.ravel(), yy.ravel()])
    vals = f(pts).reshape(n, n)
    return np.trapezoid(np.trapezoid(vals, xs, axis=1), xs)


def grid_normalized_density(unnorm_logpdf, pts, weights):
    """Normalize exp(unnorm_logpdf) with quadrature weights; returns pdf values."""
    logs = unnorm_logpdf(pts)
    hi = logs.max()
    z = np.sum(np.exp(logs - hi) * weights)
    return np.exp(logs - hi) / z


def gauss_logpdf(x, mean, cov):
    """Dense multivariate normal log density (scipy-free brute force)."""
    x = np.atleast_2d(x)
    diff = x - mean
    cov = np.atleast_2d(cov)
    sol = np.linalg.solve(cov, diff.T).T
    _, logdet = np.linalg.slogdet(cov)
    return -0.5 * (np.sum(diff * sol, axis=1) + logdet + x.shape[1] * np.log(2 * np.pi))
