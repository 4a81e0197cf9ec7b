"""Seeded random geometries for differential, semantic and scaling runs."""

from __future__ import annotations

import random
from fractions import Fraction

from flowopt.flow import Determinism, FlowMap, classify_geometry
from flowopt.graph import Angle, OpenGraph

# Pauli angles are over-represented on purpose: they drive the simplification paths.
ANGLE_POOL = tuple(
    Angle(Fraction(a))
    for a in ("0", "1/2", "-1/2", "1", "1/4", "-1/4", "1/3", "2/7", "-5/9", "1/10")
)


def random_angles(vertices, rng: random.Random, pool=ANGLE_POOL) -> dict:
    return {v: rng.choice(pool) for v in vertices}


def _split(n: int, k: int, rng: random.Random) -> list[int]:
    cuts = sorted(rng.sample(range(1, n), k - 1))
    return [b - a for a, b in zip([0] + cuts, cuts + [n])]


def flow_geometry(
    n: int,
    rng: random.Random,
    *,
    chains: int | None = None,
    edge_prob: float = 0.35,
    square: bool = True,
    max_degree: int | None = None,
) -> tuple[OpenGraph, FlowMap]:
    """A geometry with a known causal flow.

    Vertices are split into paths; each path is a run of flow successors from
    an input-side head to an output tail. Paths are interleaved into one
    random measurement schedule and cross edges are added only where the
    flow conditions survive under that schedule. With ``square=False`` some
    path heads are not inputs, so ``|I| < |O|``. Returns the geometry and
    the construction flow (its layers are the schedule positions).
    """
    if n < 1:
        raise ValueError("need at least one vertex")
    k = chains if chains is not None else rng.randint(1, max(1, min(n, 1 + n // 3)))
    k = max(1, min(k, n))
    lengths = _split(n, k, rng)
    labels = list(range(1, n + 1))
    rng.shuffle(labels)
    paths, pos = [], 0
    for ln in lengths:
        paths.append(labels[pos : pos + ln])
        pos += ln

    # random merge keeping each path in order
    cursors = [0] * k
    schedule = []
    while len(schedule) < n:
        c = rng.choice([i for i in range(k) if cursors[i] < len(paths[i])])
        schedule.append(paths[c][cursors[c]])
        cursors[c] += 1
    time = {v: t for t, v in enumerate(schedule)}

    pred, succ, path_of = {}, {}, {}
    edges = []
    for c, path in enumerate(paths):
        for v in path:
            path_of[v] = c
        for a, b in zip(path, path[1:]):
            succ[a], pred[b] = b, a
            edges.append((a, b))
    degree = {v: 0 for v in labels}
    for a, b in edges:
        degree[a] += 1
        degree[b] += 1

    def allowed(u: int, w: int) -> bool:
        if path_of[u] == path_of[w]:
            return False
        if u in pred and not time[w] > time[pred[u]]:
            return False
        if w in pred and not time[u] > time[pred[w]]:
            return False
        if max_degree is not None and max(degree[u], degree[w]) >= max_degree:
            return False
        return True

    for i, u in enumerate(schedule):
        for w in schedule[i + 1 :]:
            if allowed(u, w) and rng.random() < edge_prob:
                edges.append((u, w))
                degree[u] += 1
                degree[w] += 1
    rng.shuffle(edges)

    heads = [p[0] for p in paths]
    if square:
        inputs = set(heads)
    else:
        inputs = {h for h in heads if rng.random() < 0.6}
    outputs = {p[-1] for p in paths}
    g = OpenGraph(
        range(1, n + 1), edges, inputs, outputs, random_angles(set(labels) - outputs, rng)
    )
    layer = dict(time)
    top = n
    for v in outputs:
        layer[v] = top
    return g, FlowMap(dict(succ), layer)


def random_geometry(
    n: int, rng: random.Random, *, edge_prob: float = 0.4, max_outputs: int | None = None
) -> OpenGraph:
    """Arbitrary geometry: Erdos-Renyi edges, random outputs, inputs of at most |O| vertices."""
    vs = list(range(1, n + 1))
    edges = [(u, w) for u in vs for w in vs if u < w and rng.random() < edge_prob]
    n_out = rng.randint(1, max_outputs or n)
    outputs = set(rng.sample(vs, min(n_out, n)))
    inputs = set(rng.sample(vs, rng.randint(0, len(outputs))))
    return OpenGraph(vs, edges, inputs, outputs, random_angles(set(vs) - outputs, rng))


def gflow_only_geometry(
    n: int, rng: random.Random, *, max_tries: int = 20000, max_measured: int | None = None
) -> OpenGraph:
    """Rejection-sample until the geometry has gflow but no causal flow."""
    for _ in range(max_tries):
        g = random_geometry(n, rng, edge_prob=rng.uniform(0.3, 0.8))
        if max_measured is not None and len(g.non_outputs) > max_measured:
            continue
        if not g.non_outputs:
            continue
        if classify_geometry(g).kind is Determinism.GFLOW:
            return g
    raise RuntimeError(f"no gflow-only geometry on {n} vertices after {max_tries} draws")
