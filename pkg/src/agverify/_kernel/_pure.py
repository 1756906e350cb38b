"""Pure-Python reachability kernel.

Mirrors the compiled kernel in agverify._kernel._speedups; both implement the
same 0-1 breadth-first search and must produce identical paths.
"""

from collections import deque


def shortest_error_path(n_states, init, src, label, dst, target):
    """0-1 BFS over a transition list, minimizing the number of observable
    (label >= 0) steps; tau steps (label == -1) are free.

    src/label/dst are parallel int sequences; target is a byte/bool sequence
    of length n_states.  Returns the list of transition indices of a minimal
    witness path from init to a target state, or None if none is reachable.
    """
    if target[init]:
        return []
    # CSR adjacency
    m = len(src)
    count = [0] * n_states
    for s in src:
        count[s] += 1
    head = [0] * (n_states + 1)
    for i in range(n_states):
        head[i + 1] = head[i] + count[i]
    fill = list(head[:n_states])
    order = [0] * m
    for e in range(m):
        order[fill[src[e]]] = e
        fill[src[e]] += 1

    INF = float("inf")
    dist = [INF] * n_states
    parent = [-1] * n_states
    done = [False] * n_states
    dist[init] = 0
    dq = deque([init])
    while dq:
        u = dq.popleft()
        if done[u]:
            continue
        done[u] = True
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
                    dq.appendleft(v)
                else:
                    dq.append(v)
    return None
