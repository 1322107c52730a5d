"""Independent reference implementations used only by the tests."""

import numpy as np

from raidnc.clique import WeightedGraph, weights_tie


def maximal_clique_table(n, adj):
    """Masks of all maximal cliques, by dynamic programming over every subset."""
    size = 1 << n
    masks = np.arange(size, dtype=np.int64)
    clique = np.zeros(size, dtype=bool)
    clique[0] = True
    for i in range(n):
        lo, hi = 1 << i, 1 << (i + 1)
        rest = masks[lo:hi] - lo
        clique[lo:hi] = clique[rest] & ((rest & ~np.int64(adj[i])) == 0)
    extendable = np.zeros(size, dtype=bool)
    for v in range(n):
        outside = (masks >> v) & 1 == 0
        extendable |= outside & ((masks & ~np.int64(adj[v])) == 0)
    return masks[clique & ~extendable]


def subset_weights(n, weights, masks):
    total = np.zeros(len(masks))
    for v in range(n):
        total += np.where((masks >> v) & 1 == 1, weights[v], 0.0)
    return total


def exhaustive_best(n, weights, adj):
    """(weight, sorted vertex tuple) of the best maximal clique under the
    solver's tie-break: weight, then size, then lexicographic ids."""
    if n == 0:
        return 0.0, ()
    masks = maximal_clique_table(n, adj)
    totals = subset_weights(n, weights, masks)
    top = totals.max()
    tied = [int(m) for m, t in zip(masks, totals) if weights_tie(float(t), float(top))]
    verts = [tuple(v for v in range(n) if m >> v & 1) for m in tied]
    best = min(verts, key=lambda vs: (-len(vs), vs))
    return float(sum(weights[v] for v in best)), best


def exhaustive_ties(n, weights, adj):
    if n == 0:
        return set()
    masks = maximal_clique_table(n, adj)
    totals = subset_weights(n, weights, masks)
    top = totals.max()
    return {
        tuple(v for v in range(n) if int(m) >> v & 1)
        for m, t in zip(masks, totals)
        if weights_tie(float(t), float(top))
    }


def random_weighted_graph(rng, max_n=16):
    """Random graph with a mix of weight styles: continuous, signed, small
    integers (many ties) and uniform."""
    n = int(rng.integers(0, max_n + 1))
    p = float(rng.uniform(0.1, 0.9))
    style = int(rng.integers(4))
    if style == 0:
        weights = rng.uniform(0, 10, n)
    elif style == 1:
        weights = rng.normal(0, 3, n)
    elif style == 2:
        weights = rng.integers(0, 4, n).astype(float)
    else:
        weights = np.full(n, 1.5)
    edges = [(i, j) for i in range(n) for j in range(i + 1, n) if rng.random() < p]
    return WeightedGraph.from_edges(weights.tolist(), edges)
