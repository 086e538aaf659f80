"""Atomic (finite-support) proposal transform and its minibatch loss.

With a uniform proposal over a finite atom set, the proposal posterior is
a categorical distribution over the atoms and the training loss becomes a
cross entropy; the estimator's own normalization cancels in the ratio, so
any density estimator can be plugged in.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..diffcore import tape
from ..errors import ConfigurationError, InvalidAtomError
from .priors import is_uniform


@dataclass(frozen=True)
class AtomSet:
    """Candidate parameter vectors drawn (without replacement) from past
    simulations; duplicates of identical vectors are allowed, duplicate
    table indices are not."""

    atoms: np.ndarray
    indices: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "atoms", np.atleast_2d(np.asarray(self.atoms, dtype=np.float64)))
        object.__setattr__(self, "indices", np.asarray(self.indices, dtype=np.int64))
        if self.atoms.shape[0] < 2:
            raise ConfigurationError("an atom set needs at least 2 atoms")
        if self.indices.shape != (self.atoms.shape[0],):
            raise ConfigurationError("one table index per atom required")
        if np.unique(self.indices).size != self.indices.size:
            raise ConfigurationError("atom indices must be distinct")

    @property
    def size(self) -> int:
        return self.atoms.shape[0]


def prior_log_weights(prior, atoms: np.ndarray):
    """Per-atom log prior, or None when the prior is uniform (it cancels).

    Atoms outside the prior support raise InvalidAtomError either way.
    """
    if is_uniform(prior):
        if not np.all(prior.inside(atoms)):
            bad = np.flatnonzero(~prior.inside(atoms)).tolist()
            raise InvalidAtomError(f"atoms outside prior support: rows {bad}")
        return None
    logs = prior.log_prob(atoms)
    if not np.all(np.isfinite(logs)):
        bad = np.flatnonzero(~np.isfinite(logs)).tolist()
        raise InvalidAtomError(f"atoms outside prior support: rows {bad}")
    return logs


def atomic_log_prob(q_log_prob, prior, atom_set: AtomSet, theta: np.ndarray):
    """Log probability of `theta` under the atomic proposal posterior.

    q_log_prob maps a parameter vector to the estimator's log density
    (may return graph nodes, through which this stays differentiable).
    theta must be a member of the atom set.
    """
    theta = np.asarray(theta, dtype=np.float64)
    matches = np.flatnonzero(np.all(atom_set.atoms == theta, axis=1))
    if matches.size == 0:
        raise ConfigurationError("theta is not a member of the atom set")
    target = int(matches[0])
    prior_logs = prior_log_weights(prior, atom_set.atoms)
    logs = [q_log_prob(atom_set.atoms[j]) for j in range(atom_set.size)]
    stacked = tape.concat([tape.reshape(v, (1,)) for v in logs], axis=0)
    if prior_logs is not None:
        stacked = stacked - prior_logs
    return stacked[target] - tape.logsumexp(stacked, axis=0)


def atomic_loss_from_matrix(pair_logq, prior_logs=None):
    """Summed atomic cross-entropy from a pair matrix.

    pair_logq[i, j] = log q(theta_j | x_i) over one minibatch whose rows
    double as the atom set for every row's transform; prior_logs is the
    per-atom log prior (None for uniform priors, where it cancels).
    Returns the scalar sum of -log q~(theta_i | x_i).
    """
    m = tape.value_of(pair_logq).shape[0]
    ratios = pair_logq if prior_logs is None else pair_logq - prior_logs[None, :]
    diag = ratios[np.arange(m), np.arange(m)]
    return -tape.sum_(diag - tape.logsumexp(ratios, axis=-1))


def atomic_loss_minibatch(estimator, params, prior, theta_batch: np.ndarray,
                          x_batch: np.ndarray, root=None):
    """Minibatch loss where the batch's own parameter rows are the atoms.

    Needs M^2 estimator evaluations: for an MDN, one mixture decode per x
    and M evaluations of each; for a MAF, one pass per (theta, x) pair.
    """
    if theta_batch.shape[0] != x_batch.shape[0]:
        raise ConfigurationError("theta and x batches must align")
    if theta_batch.shape[0] < 2:
        raise ConfigurationError("atomic loss needs at least 2 rows")
    prior_logs = prior_log_weights(prior, theta_batch)
    pair = estimator.pair_log_prob(params, x_batch, theta_batch, root=root)
    return atomic_loss_from_matrix(pair, prior_logs)
