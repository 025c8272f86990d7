"""Shared helpers for the test suite."""

import numpy as np

from cmikit.data import split_rows
from cmikit.divergence import dv_plugin
from cmikit.seeding import derive_seed


def _sigmoid(v):
    out = np.empty_like(v)
    pos = v >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-v[pos]))
    e = np.exp(v[~pos])
    out[~pos] = e / (1.0 + e)
    return out


def biasfree_logistic_dkl(dp, dq, clip=1e-3, seed=0, lr=0.05, steps=2000):
    """Deliberately crippled discriminator: linear logit w.x with no bias.

    Trained on BCE with full-batch Adam, then pushed through the same
    split / clip / plug-in protocol as the real classifier route.  Exists to
    demonstrate that this classifier family cannot detect dependence whose
    likelihood ratio is not linear in the raw features.
    """
    p_tr, p_ev = split_rows(np.asarray(dp, float), derive_seed(seed, 1))
    q_tr, q_ev = split_rows(np.asarray(dq, float), derive_seed(seed, 2))
    x = np.vstack([p_tr, q_tr])
    labels = np.concatenate([np.ones(len(p_tr)), np.zeros(len(q_tr))])
    w = np.zeros(x.shape[1])
    m = np.zeros_like(w)
    v = np.zeros_like(w)
    b1, b2, eps = 0.9, 0.999, 1e-8
    for t in range(1, steps + 1):
        g = x.T @ (_sigmoid(x @ w) - labels) / len(labels)
        m = b1 * m + (1 - b1) * g
        v = b2 * v + (1 - b2) * g * g
        w -= lr * (m / (1 - b1**t)) / (np.sqrt(v / (1 - b2**t)) + eps)
    gp = np.clip(_sigmoid(p_ev @ w), clip, 1 - clip)
    gq = np.clip(_sigmoid(q_ev @ w), clip, 1 - clip)
    return dv_plugin(gp, gq, clip)
