"""Differentiable proposal-posterior transform for MDN training.

Mirrors transform.gaussian.mog_proposal_posterior, but runs inside the
autodiff graph so the analytic-proposal training loss can backpropagate
through the transform into the emitted mixture parameters.
"""

from __future__ import annotations

import numpy as np

from ..diffcore import tape
from ..errors import PrecisionNotPD
from .gaussian import GaussianDist, _as_mog, _component_naturals, _prior_natural

_LOG_2PI = np.log(2.0 * np.pi)


def transformed_mog_log_prob(psi, theta, prior, proposal):
    """log of the transformed mixture, evaluated at each batch row's theta.

    psi is the (log_weights, means, chols, log_det) tuple from MDN.psi with
    batch shape (B, K, ...); prior and proposal are constants. Returns a
    (B,) node (or ndarray when psi holds plain arrays).
    """
    log_w, means, chols, log_det = psi
    b, k, n = tape.value_of(means).shape
    proposal = _as_mog(proposal)
    ncomp = proposal.n_components
    p_prior, eta_prior = _prior_natural(prior, n)
    prec_p, eta_p, logdet_p, quad_p = _component_naturals(proposal)
    with np.errstate(divide="ignore"):
        log_beta = np.log(proposal.weights)

    inv_l = tape.matinv(chols)
    prec_q = tape.matmul(tape.swapaxes(inv_l, -1, -2), inv_l)
    eta_q = tape.reshape(tape.matmul(prec_q, tape.reshape(means, (b, k, n, 1))), (b, k, n))
    quad_q = tape.sum_(tape.mul(means, eta_q), axis=-1)
    logdet_q = 2.0 * log_det

    prec_star = (tape.reshape(prec_q, (b, k, 1, n, n))
                 + (prec_p - p_prior)[None, None])
    _assert_pd(tape.value_of(prec_star))
    eta_star = tape.reshape(eta_q, (b, k, 1, n)) + (eta_p - eta_prior)[None, None]
    mean_star = tape.posdef_solve(prec_star, eta_star)
    quad_star = tape.sum_(tape.mul(mean_star, eta_star), axis=-1)
    logdet_prec_star = tape.posdef_logdet(prec_star)

    log_zeta = (tape.reshape(log_w, (b, k, 1)) + log_beta[None, None]
                + 0.5 * (-logdet_prec_star - tape.reshape(logdet_q, (b, k, 1))
                         - logdet_p[None, None])
                - 0.5 * (tape.reshape(quad_q, (b, k, 1)) + quad_p[None, None]
                         - quad_star))
    c = k * ncomp
    log_zeta = tape.reshape(log_zeta, (b, c))
    log_zeta = log_zeta - tape.logsumexp(log_zeta, axis=-1, keepdims=True)

    prec_flat = tape.reshape(prec_star, (b, c, n, n))
    mean_flat = tape.reshape(mean_star, (b, c, n))
    diff = tape.reshape(theta, (b, 1, n)) - mean_flat
    pdiff = tape.reshape(tape.matmul(prec_flat, tape.reshape(diff, (b, c, n, 1))), (b, c, n))
    quad_form = tape.sum_(tape.mul(diff, pdiff), axis=-1)
    comp = (log_zeta + 0.5 * tape.reshape(logdet_prec_star, (b, c))
            - 0.5 * n * _LOG_2PI - 0.5 * quad_form)
    return tape.logsumexp(comp, axis=-1)


def _assert_pd(prec_values: np.ndarray) -> None:
    try:
        np.linalg.cholesky(0.5 * (prec_values + np.swapaxes(prec_values, -1, -2)))
    except np.linalg.LinAlgError:
        bad = None
        flat = prec_values.reshape(-1, *prec_values.shape[-2:])
        for idx in range(flat.shape[0]):
            try:
                np.linalg.cholesky(0.5 * (flat[idx] + flat[idx].T))
            except np.linalg.LinAlgError:
                bad = np.unravel_index(idx, prec_values.shape[:-2])
                break
        raise PrecisionNotPD(
            f"combined precision not PD during training transform at {bad}",
            component=bad)
