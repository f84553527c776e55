"""Dense enumeration of hierarchy multi-indices and their neighbour tables."""

from math import comb

import numpy as np

from ..errors import CapacityError, DomainError
from ..policy import DEFAULT_POLICY

# complex128 state plus four RK4 stages and one scratch buffer
_BUFFERS = 6


def layout_size(K, L):
    """Number of multi-indices of length ``K`` with depth ``<= L``."""
    return comb(L + K, K)


def _compositions(total, parts):
    """All ``parts``-tuples of non-negative ints summing to ``total``, first slot largest first."""
    if parts == 1:
        yield (total,)
        return
    for head in range(total, -1, -1):
        for tail in _compositions(total - head, parts - 1):
            yield (head,) + tail


class HierarchyLayout:
    """Multi-indices ordered by depth, neighbour tables with sentinel ``-1``.

    ``up[n, p]`` is the position of ``index[n] + e_p`` and ``down[n, p]`` that
    of ``index[n] - e_p``; ``level[n, p]`` is the ``p``-th component.
    """

    def __init__(self, K, L, dim=None, policy=DEFAULT_POLICY):
        if int(K) != K or K < 1:
            raise DomainError(f"number of exponentials must be >= 1, got {K!r}")
        if int(L) != L or L < 0:
            raise DomainError(f"depth cap must be >= 0, got {L!r}")
        K, L = int(K), int(L)
        size = layout_size(K, L)
        if dim is not None:
            need = size * dim * dim * 16 * _BUFFERS
            if need > policy.max_hierarchy_bytes:
                raise CapacityError(
                    f"hierarchy with K={K}, L={L} has {size} ADOs and needs {need / 2**20:.1f} MiB, "
                    f"budget is {policy.max_hierarchy_bytes / 2**20:.1f} MiB"
                )
        self.K, self.L = K, L
        self.indices = [c for depth in range(L + 1) for c in _compositions(depth, K)]
        self.position = {c: n for n, c in enumerate(self.indices)}
        N = len(self.indices)
        up = np.full((N, K), -1, dtype=np.intp)
        down = np.full((N, K), -1, dtype=np.intp)
        for n, c in enumerate(self.indices):
            for p in range(K):
                if c[p] > 0:
                    down[n, p] = self.position[c[:p] + (c[p] - 1,) + c[p + 1:]]
                # depth L + 1 neighbours are truncated to zero
                hi = self.position.get(c[:p] + (c[p] + 1,) + c[p + 1:])
                if hi is not None:
                    up[n, p] = hi
        self.up = up
        self.down = down
        self.level = np.array(self.indices, dtype=float).reshape(N, K)
        for a in (self.up, self.down, self.level):
            a.setflags(write=False)

    def __len__(self):
        return len(self.indices)

    @property
    def depth(self):
        return self.level.sum(axis=1)

    def __repr__(self):
        return f"HierarchyLayout(K={self.K}, L={self.L}, size={len(self)})"
