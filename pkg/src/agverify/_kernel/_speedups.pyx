# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled reachability kernel: 0-1 BFS minimizing observable steps.

Must stay behaviorally identical to agverify._kernel._pure; the test suite
cross-checks the two on random machines.
"""

from libc.stdlib cimport malloc, free


def shortest_error_path(int n_states, int init, src_obj, label_obj, dst_obj, target_obj):
    cdef int m = len(src_obj)
    cdef int i, e, u, v, w, du
    cdef int *src = <int *> malloc(m * sizeof(int))
    cdef int *label = <int *> malloc(m * sizeof(int))
    cdef int *dst = <int *> malloc(m * sizeof(int))
    cdef char *target = <char *> malloc(n_states * sizeof(char))
    cdef int *head = <int *> malloc((n_states + 1) * sizeof(int))
    cdef int *fill = <int *> malloc(n_states * sizeof(int))
    cdef int *order = <int *> malloc(m * sizeof(int)) if m else <int *> malloc(sizeof(int))
    cdef int *dist = <int *> malloc(n_states * sizeof(int))
    cdef int *parent = <int *> malloc(n_states * sizeof(int))
    cdef char *done = <char *> malloc(n_states * sizeof(char))
    # deque as a ring buffer: capacity m + n + 2 suffices (each edge enqueues
    # its destination at most once per improvement; improvements <= m + 1)
    cdef int cap = 2 * (m + n_states + 2)
    cdef int *ring = <int *> malloc(cap * sizeof(int))
    cdef int lo, hi  # half-open [lo, hi) window into ring, start centered
    cdef int INF = 1 << 30
    cdef list path

    if (src is NULL or label is NULL or dst is NULL or target is NULL or
            head is NULL or fill is NULL or order is NULL or dist is NULL or
            parent is NULL or done is NULL or ring is NULL):
        raise MemoryError()

    try:
        for e in range(m):
            src[e] = src_obj[e]
            label[e] = label_obj[e]
            dst[e] = dst_obj[e]
        for i in range(n_states):
            target[i] = 1 if target_obj[i] else 0

        if target[init]:
            return []

        for i in range(n_states + 1):
            head[i] = 0
        for e in range(m):
            head[src[e] + 1] += 1
        for i in range(n_states):
            head[i + 1] += head[i]
            fill[i] = head[i]
        for e in range(m):
            order[fill[src[e]]] = e
            fill[src[e]] += 1

        for i in range(n_states):
            dist[i] = INF
            parent[i] = -1
            done[i] = 0
        dist[init] = 0
        lo = cap // 2
        hi = lo
        ring[hi] = init
        hi += 1

        while lo < hi:
            u = ring[lo]
            lo += 1
            if done[u]:
                continue
            done[u] = 1
            if target[u]:
                path = []
                v = u
                while parent[v] != -1:
                    e = parent[v]
                    path.append(e)
                    v = src[e]
                path.reverse()
                return path
            du = dist[u]
            for i in range(head[u], head[u + 1]):
                e = order[i]
                w = 0 if label[e] < 0 else 1
                v = dst[e]
                if du + w < dist[v]:
                    dist[v] = du + w
                    parent[v] = e
                    if w == 0:
                        if lo == 0:
                            raise MemoryError("ring underflow")
                        lo -= 1
                        ring[lo] = v
                    else:
                        if hi == cap:
                            raise MemoryError("ring overflow")
                        ring[hi] = v
                        hi += 1
        return None
    finally:
        free(src); free(label); free(dst); free(target); free(head)
        free(fill); free(order); free(dist); free(parent); free(done); free(ring)
