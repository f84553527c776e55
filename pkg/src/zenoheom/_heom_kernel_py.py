"""Pure numpy implementation of the hierarchy RK4 stepper.

Same signature and in-place semantics as the compiled kernel. Neighbour
sentinels (-1) index an appended zero row.
"""

import numpy as np


def rhs(x, diag, decay, up, down, level, phi, links):
    """Single evaluation of the hierarchy derivative."""
    N, D = x.shape
    xp = np.concatenate([x, np.zeros((1, D), dtype=x.dtype)])
    out = x @ diag.T - decay[:, None] * x
    if up.shape[1]:
        acc = xp[up].sum(axis=1)
        out += acc @ phi.T
        for p in range(up.shape[1]):
            out += level[:, p, None] * (xp[down[:, p]] @ links[p].T)
    return out


def rk4_steps(x, diag, decay, up, down, level, phi, links, h, nsteps):
    """Advance ``x`` in place by ``nsteps`` classic RK4 steps of size ``h``."""
    args = (diag, decay, up, down, level, phi, links)
    for _ in range(int(nsteps)):
        k1 = rhs(x, *args)
        k2 = rhs(x + 0.5 * h * k1, *args)
        k3 = rhs(x + 0.5 * h * k2, *args)
        k4 = rhs(x + h * k3, *args)
        x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
