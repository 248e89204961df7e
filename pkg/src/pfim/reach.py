"""Bitmask reachability primitives shared by estimators and oracles.

Node sets are Python ints used as bitmasks (bit v = node v), which keeps
set algebra to single machine ops for n <= 64 and stays correct for
larger graphs via big ints. Adjacency is a plain list of target lists.
"""


def node_mask(nodes) -> int:
    m = 0
    for v in nodes:
        m |= 1 << v
    return m


def mask_nodes(mask: int):
    """Yield node ids set in the mask, ascending."""
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def reachable_mask(adjacency: list, start_mask: int) -> int:
    """All nodes reachable from the start set, start included."""
    seen = start_mask
    stack = list(mask_nodes(start_mask))
    while stack:
        u = stack.pop()
        for v in adjacency[u]:
            bit = 1 << v
            if not seen & bit:
                seen |= bit
                stack.append(v)
    return seen


def _strongly_connected(n: int, adjacency: list):
    """Tarjan, iterative. Returns (component id per node, members per
    component) with components emitted in reverse topological order."""
    unvisited = -1
    index = [unvisited] * n
    low = [0] * n
    on_stack = [False] * n
    comp_of = [-1] * n
    comps: list[list[int]] = []
    tarjan_stack: list[int] = []
    counter = 0
    for root in range(n):
        if index[root] != unvisited:
            continue
        index[root] = low[root] = counter
        counter += 1
        tarjan_stack.append(root)
        on_stack[root] = True
        work = [(root, iter(adjacency[root]))]
        while work:
            node, edge_iter = work[-1]
            advanced = False
            for t in edge_iter:
                if index[t] == unvisited:
                    index[t] = low[t] = counter
                    counter += 1
                    tarjan_stack.append(t)
                    on_stack[t] = True
                    work.append((t, iter(adjacency[t])))
                    advanced = True
                    break
                if on_stack[t] and index[t] < low[node]:
                    low[node] = index[t]
            if advanced:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                if low[node] < low[parent]:
                    low[parent] = low[node]
            if low[node] == index[node]:
                members = []
                while True:
                    w = tarjan_stack.pop()
                    on_stack[w] = False
                    comp_of[w] = len(comps)
                    members.append(w)
                    if w == node:
                        break
                comps.append(members)
    return comp_of, comps

def closure_masks(n: int, adjacency: list) -> list[int]:
    """Per-node reachability masks (self included) for the whole graph.

    Condenses to strongly connected components first, so the cost is one
    pass over nodes plus edges instead of a BFS per node.
    """
    comp_of, comps = _strongly_connected(n, adjacency)
    comp_mask = [0] * len(comps)
    for ci, members in enumerate(comps):
        m = 0
        for v in members:
            m |= 1 << v
        for v in members:
            for t in adjacency[v]:
                ct = comp_of[t]
                if ct != ci:
                    # emitted before ci, so its mask is final
                    m |= comp_mask[ct]
        comp_mask[ci] = m
    return [comp_mask[comp_of[v]] for v in range(n)]
