"""Numpy implementations of the sampling kernels (import-time fallback)."""

import numpy as np


def axis_signs(lam, axes):
    lam = np.ascontiguousarray(lam, dtype=float)
    axes = np.ascontiguousarray(axes, dtype=float)
    # same association order as the compiled loop: (x*ax + y*ay) + z*az
    d = lam[None, :, 0] * axes[:, 0, None] + lam[None, :, 1] * axes[:, 1, None] + lam[None, :, 2] * axes[:, 2, None]
    return np.where(d >= 0, 1, -1).astype(np.int8)


def sign_gram(lam, axes):
    s = axis_signs(lam, axes).astype(np.int64)
    return s @ s.T


def pair_outcomes(u_first, u_malus, p_keep):
    se = np.where(np.asarray(u_first) < 0.5, 1, -1).astype(np.int8)
    sp = np.where(np.asarray(u_malus) < p_keep, -se, se).astype(np.int8)
    return se, sp
