"""Numpy implementations of the tree kernels.

This is the fallback backend. It mirrors the compiled extension exactly:
sequential prefix sums (``np.cumsum`` accumulates in order, like the C
loops), first-occurrence tie-breaking, and the same integer RNG for
per-node feature subsampling, so both backends grow bit-identical trees.
"""

from __future__ import annotations

import numpy as np

BACKEND_NAME = "python"

_MASK64 = (1 << 64) - 1
_NODE_SALT = 0xD1B54A32D192ED03


def _splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


def _node_feature_subset(tree_seed: int, node_id: int, p: int, m: int) -> list[int]:
    # Partial Fisher-Yates; selection order is the candidate iteration order.
    state = _splitmix64((tree_seed ^ ((node_id * _NODE_SALT) & _MASK64)) & _MASK64)
    feats = list(range(p))
    out = []
    for j in range(m):
        state = _splitmix64(state)
        r = j + state % (p - j)
        feats[j], feats[r] = feats[r], feats[j]
        out.append(feats[j])
    return out


def grow_tree(X, y, rows, min_leaf, max_depth, m_features, tree_seed):
    """Grow a CART regression tree with variance-reduction splits.

    ``rows`` indexes into ``X``/``y`` and may contain repeats (bootstrap).
    Returns ``(feature, threshold, left, right, depth, gain, n_node,
    entry_rows, entry_leaf)`` where ``entry_rows`` is the input row
    multiset regrouped so that each leaf owns a contiguous run, and
    ``entry_leaf[i]`` is the leaf node id of ``entry_rows[i]``.
    """
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.float64)
    buf = np.array(rows, dtype=np.int64, copy=True)
    n_total = buf.shape[0]
    p = X.shape[1]
    if n_total < 1:
        raise ValueError("grow_tree needs at least one row")
    if min_leaf < 1:
        raise ValueError("min_leaf must be >= 1")
    if not (1 <= m_features <= p):
        raise ValueError("m_features out of range")
    if max_depth <= 0:
        max_depth = 1 << 30

    cap = 2 * (n_total // min_leaf) + 3
    feature = np.full(cap, -1, np.int32)
    threshold = np.zeros(cap, np.float64)
    left = np.full(cap, -1, np.int32)
    right = np.full(cap, -1, np.int32)
    depth_arr = np.zeros(cap, np.int32)
    gain_arr = np.zeros(cap, np.float64)
    nnode_arr = np.zeros(cap, np.int64)
    entry_leaf = np.full(n_total, -1, np.int32)

    tree_seed = int(tree_seed) & _MASK64
    stack = [(0, n_total, 0, -1, False)]
    n_nodes = 0
    while stack:
        lo, hi, depth, parent, is_left = stack.pop()
        node = n_nodes
        n_nodes += 1
        depth_arr[node] = depth
        nnode_arr[node] = hi - lo
        if parent >= 0:
            if is_left:
                left[parent] = node
            else:
                right[parent] = node

        seg = buf[lo:hi]
        m = hi - lo
        did_split = False
        if depth < max_depth and m >= 2 * min_leaf:
            yseg = y[seg]
            cs_node = np.cumsum(yseg)
            css_node = np.cumsum(yseg * yseg)
            s_tot = cs_node[-1]
            ss_tot = css_node[-1]
            if yseg.max() > yseg.min():
                parent_sse = ss_tot - (s_tot * s_tot) / m
                best_score = np.inf
                best_f = -1
                best_cnt = -1
                best_a = 0.0
                best_b = 0.0
                for f in _node_feature_subset(tree_seed, node, p, m_features):
                    xcol = X[seg, f]
                    order = np.argsort(xcol, kind="stable")
                    xs = xcol[order]
                    ys = yseg[order]
                    cs = np.cumsum(ys)
                    css = np.cumsum(ys * ys)
                    i = np.arange(min_leaf, m - min_leaf + 1, dtype=np.int64)
                    valid = xs[i - 1] < xs[i]
                    if not valid.any():
                        continue
                    iv = i[valid]
                    ls = cs[iv - 1]
                    lss = css[iv - 1]
                    left_sse = lss - ls * ls / iv
                    rs = cs[-1] - ls
                    rss = css[-1] - lss
                    right_sse = rss - rs * rs / (m - iv)
                    scores = left_sse + right_sse
                    k = int(np.argmin(scores))
                    if scores[k] < best_score:
                        best_score = scores[k]
                        best_f = f
                        best_cnt = int(iv[k])
                        best_a = xs[best_cnt - 1]
                        best_b = xs[best_cnt]
                if best_f >= 0 and best_score < parent_sse:
                    thr = 0.5 * (best_a + best_b)
                    if thr == best_b:
                        thr = best_a
                    mask = X[seg, best_f] <= thr
                    nl = best_cnt
                    buf[lo:lo + nl] = seg[mask]
                    buf[lo + nl:hi] = seg[~mask]
                    feature[node] = best_f
                    threshold[node] = thr
                    gain_arr[node] = parent_sse - best_score
                    stack.append((lo + nl, hi, depth + 1, node, False))
                    stack.append((lo, lo + nl, depth + 1, node, True))
                    did_split = True
        if not did_split:
            entry_leaf[lo:hi] = node

    n = n_nodes
    return (feature[:n].copy(), threshold[:n].copy(), left[:n].copy(),
            right[:n].copy(), depth_arr[:n].copy(), gain_arr[:n].copy(),
            nnode_arr[:n].copy(), buf, entry_leaf)


def apply_tree(feature, threshold, left, right, X):
    """Route each row of ``X`` to its leaf; returns leaf node ids."""
    X = np.ascontiguousarray(X, dtype=np.float64)
    n = X.shape[0]
    out = np.zeros(n, dtype=np.int32)
    if feature[0] < 0 or n == 0:
        return out
    active = np.arange(n)
    while active.size:
        node = out[active]
        f = feature[node]
        go_left = X[active, f] <= threshold[node]
        out[active] = np.where(go_left, left[node], right[node])
        active = active[feature[out[active]] >= 0]
    return out


def accumulate_leaf_weights(W, q_slot, slot_w, leaf_start, member_pos):
    """Scatter one tree's co-leaf weights into ``W`` (in place).

    ``W`` is (n_query, n_train); ``q_slot[r]`` is the compact leaf index of
    query row r; leaf ``s`` owns ``member_pos[leaf_start[s]:leaf_start[s+1]]``
    (training positions in sorted-target space), each contributing
    ``slot_w[s]``.
    """
    sizes = leaf_start[q_slot + 1] - leaf_start[q_slot]
    total = int(sizes.sum())
    if total == 0:
        return
    nq = W.shape[0]
    row_rep = np.repeat(np.arange(nq, dtype=np.int64), sizes)
    offs = leaf_start[q_slot]
    excl = np.cumsum(sizes) - sizes
    pos = (np.arange(total, dtype=np.int64)
           - np.repeat(excl, sizes) + np.repeat(offs, sizes))
    np.add.at(W, (row_rep, member_pos[pos]), np.repeat(slot_w[q_slot], sizes))
