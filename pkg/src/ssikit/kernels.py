"""Graph kernels over CSR adjacency arrays.

Every kernel has a numba version and a numpy version with identical
results.  ``bfs_distances`` dispatches on :data:`ssikit._accel.USING_NUMBA`;
the ``*_numba`` / ``*_numpy`` names are public so both paths can be tested
and benchmarked side by side.
"""
import numpy as np

from ._accel import USING_NUMBA, njit


def build_csr(n_nodes, src, dst):
    """Return ``(indptr, indices)`` for the edge list ``src -> dst``.

    Parallel edges are collapsed; neighbour lists are sorted.
    """
    src = np.asarray(src, dtype=np.int64)
    dst = np.asarray(dst, dtype=np.int64)
    if src.size:
        key = np.unique(src * n_nodes + dst)
        src, dst = key // n_nodes, key % n_nodes
    counts = np.bincount(src, minlength=n_nodes)
    indptr = np.zeros(n_nodes + 1, dtype=np.int64)
    np.cumsum(counts, out=indptr[1:])
    return indptr, dst.astype(np.int64)


def reverse_csr(indptr, indices):
    n = indptr.size - 1
    src = np.repeat(np.arange(n, dtype=np.int64), np.diff(indptr))
    return build_csr(n, indices, src)


@njit(cache=True)
def _bfs_numba(indptr, indices, sources, blocked):
    n = indptr.size - 1
    dist = np.full(n, -1, dtype=np.int64)
    queue = np.empty(n, dtype=np.int64)
    head = 0
    tail = 0
    for s in sources:
        if dist[s] < 0 and not blocked[s]:
            dist[s] = 0
            queue[tail] = s
            tail += 1
    while head < tail:
        u = queue[head]
        head += 1
        for k in range(indptr[u], indptr[u + 1]):
            v = indices[k]
            if dist[v] < 0 and not blocked[v]:
                dist[v] = dist[u] + 1
                queue[tail] = v
                tail += 1
    return dist


def bfs_distances_numba(indptr, indices, sources, blocked):
    return _bfs_numba(indptr, indices, np.asarray(sources, dtype=np.int64), blocked)


def bfs_distances_numpy(indptr, indices, sources, blocked):
    n = indptr.size - 1
    dist = np.full(n, -1, dtype=np.int64)
    frontier = np.unique(np.asarray(sources, dtype=np.int64))
    frontier = frontier[~blocked[frontier]]
    dist[frontier] = 0
    level = 0
    while frontier.size:
        level += 1
        starts, stops = indptr[frontier], indptr[frontier + 1]
        lengths = stops - starts
        if not lengths.sum():
            break
        # gather all neighbour slots of the frontier in one shot
        offsets = np.repeat(starts - np.cumsum(lengths) + lengths, lengths)
        slots = offsets + np.arange(lengths.sum())
        nxt = np.unique(indices[slots])
        nxt = nxt[(dist[nxt] < 0) & ~blocked[nxt]]
        dist[nxt] = level
        frontier = nxt
    return dist


def bfs_distances(indptr, indices, sources, blocked=None):
    """Hop distance from the nearest source, ``-1`` where unreachable.

    Nodes flagged in ``blocked`` are never entered (not even as sources).
    """
    n = indptr.size - 1
    if blocked is None:
        blocked = np.zeros(n, dtype=np.bool_)
    if USING_NUMBA:
        return bfs_distances_numba(indptr, indices, sources, blocked)
    return bfs_distances_numpy(indptr, indices, sources, blocked)
