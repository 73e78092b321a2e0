"""Maximum spanning arborescence decoding (Chu-Liu/Edmonds).

Scores are dense matrices ``scores[h][d]`` over nodes 0..n with node 0 the
artificial root.  ``decode_mst`` returns the best arborescence rooted at 0
with exactly one child of the root; ties break toward lower head indices and
lower root-child candidates.
"""

from __future__ import annotations

import numpy as np

NEG_INF = -np.inf


def _find_cycle(heads: np.ndarray):
    """First cycle in the head function, scanning dependents in order."""
    m = len(heads)
    color = np.zeros(m, dtype=np.int8)  # 0 unseen, 1 on path, 2 done
    color[0] = 2
    for start in range(1, m):
        if color[start]:
            continue
        path = []
        node = start
        while color[node] == 0:
            color[node] = 1
            path.append(node)
            node = int(heads[node])
        if color[node] == 1:  # found a new cycle; cut it out of the path
            cycle = path[path.index(node):]
            return cycle
        for visited in path:
            color[visited] = 2
    return None


def _greedy_heads(scores: np.ndarray) -> np.ndarray:
    m = len(scores)
    heads = np.zeros(m, dtype=np.intp)
    for d in range(1, m):
        heads[d] = int(np.argmax(scores[:, d]))
    return heads


def _cle(scores: np.ndarray) -> np.ndarray:
    """Unconstrained maximum arborescence by recursive cycle contraction."""
    heads = _greedy_heads(scores)
    cycle = _find_cycle(heads)
    if cycle is None:
        return heads

    m = len(scores)
    in_cycle = np.zeros(m, dtype=bool)
    in_cycle[cycle] = True
    outside = [v for v in range(m) if not in_cycle[v]]  # node 0 stays first
    contracted = len(outside)  # index of the contracted cycle node
    new_m = contracted + 1

    new_scores = np.full((new_m, new_m), NEG_INF)
    enter_choice = np.full(new_m, -1, dtype=np.intp)  # cycle node that takes the incoming arc
    leave_choice = np.full(new_m, -1, dtype=np.intp)  # cycle node that emits the outgoing arc

    for hn, h_old in enumerate(outside):
        for dn, d_old in enumerate(outside):
            if dn != hn:
                new_scores[hn, dn] = scores[h_old, d_old]
        # Entering the cycle at v costs the cycle arc into v instead.
        best = NEG_INF
        best_v = -1
        for v in cycle:
            gain = scores[h_old, v] - scores[heads[v], v]
            if gain > best:
                best, best_v = gain, v
        new_scores[hn, contracted] = best
        enter_choice[hn] = best_v
    for dn, d_old in enumerate(outside):
        if d_old == 0:
            continue
        best = NEG_INF
        best_v = -1
        for v in cycle:
            if scores[v, d_old] > best:
                best, best_v = scores[v, d_old], v
        new_scores[contracted, dn] = best
        leave_choice[dn] = best_v

    sub_heads = _cle(new_scores)

    result = heads.copy()  # cycle arcs stay unless broken below
    old_of_new = outside + [cycle[0]]
    for dn in range(1, new_m):
        hn = int(sub_heads[dn])
        if dn == contracted:
            result[enter_choice[hn]] = outside[hn]
        else:
            d_old = outside[dn]
            result[d_old] = leave_choice[dn] if hn == contracted else outside[hn]
    return result


def _prepare(scores: np.ndarray) -> np.ndarray:
    prepared = np.array(scores, dtype=np.float64)
    np.fill_diagonal(prepared, NEG_INF)
    prepared[:, 0] = NEG_INF  # nothing points at the root
    return prepared


def _total(scores: np.ndarray, heads: np.ndarray) -> float:
    return float(sum(scores[int(heads[d]), d] for d in range(1, len(heads))))


def is_arborescence(heads) -> bool:
    """True iff heads (indexed 1..n, with heads[0] ignored) form a tree
    rooted at 0 with exactly one child of the root."""
    n = len(heads) - 1
    if n < 1:
        return False
    if sum(1 for d in range(1, n + 1) if heads[d] == 0) != 1:
        return False
    for d in range(1, n + 1):
        node, steps = d, 0
        while node != 0:
            node = int(heads[node])
            steps += 1
            if steps > n:
                return False
    return True


def decode_mst(scores) -> list[int]:
    """Best single-root arborescence for an (n+1, n+1) score matrix.

    Returns heads for dependents 1..n.  Runs unconstrained first; when the
    root ends up with several children, re-runs with the root arc pinned to
    each candidate child and keeps the best total.
    """
    scores = np.asarray(scores, dtype=np.float64)
    n = scores.shape[0] - 1
    if n < 1 or scores.shape[0] != scores.shape[1]:
        raise ValueError(f"need a square matrix over >= 2 nodes, got {scores.shape}")
    off_diag = ~np.eye(n + 1, dtype=bool)
    off_diag[:, 0] = False
    if not np.all(np.isfinite(scores[off_diag])):
        raise ValueError("arc scores must be finite off the diagonal")

    prepared = _prepare(scores)
    heads = _cle(prepared)
    if sum(1 for d in range(1, n + 1) if heads[d] == 0) == 1:
        assert is_arborescence(heads)
        return [int(h) for h in heads[1:]]

    best_heads = None
    best_total = NEG_INF
    for cand in range(1, n + 1):
        pinned = prepared.copy()
        pinned[0, :] = NEG_INF
        pinned[0, cand] = prepared[0, cand]
        cand_heads = _cle(pinned)
        total = _total(prepared, cand_heads)
        if total > best_total:
            best_total = total
            best_heads = cand_heads
    assert best_heads is not None and is_arborescence(best_heads)
    return [int(h) for h in best_heads[1:]]
