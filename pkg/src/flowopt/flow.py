"""Causal flow and gflow: verification and maximally delayed construction.

Layer labels put the earliest-measured vertices at 0 and the outputs on the
final layer. Both finders work backwards from the outputs and place every
vertex as late as the definitions allow.
"""

from __future__ import annotations

import enum
from collections.abc import Mapping
from dataclasses import dataclass
from functools import cached_property

from flowopt.gf2 import solve_many
from flowopt.graph import OpenGraph, QubitId


class FlowError(ValueError):
    """A candidate map is not even shaped like a flow/gflow for the geometry."""


@dataclass(frozen=True)
class FlowMap:
    f: Mapping[QubitId, QubitId]
    layer: Mapping[QubitId, int]

    def correcting_sets(self) -> dict[QubitId, frozenset]:
        return {i: frozenset((j,)) for i, j in self.f.items()}

    def depth(self) -> int:
        return _longest_path(self.correcting_sets(), self.layer)


@dataclass(frozen=True)
class GflowMap:
    g: Mapping[QubitId, frozenset]
    layer: Mapping[QubitId, int]

    def correcting_sets(self) -> dict[QubitId, frozenset]:
        return {i: frozenset(k) for i, k in self.g.items()}

    def depth(self) -> int:
        return _longest_path(self.correcting_sets(), self.layer)

    @classmethod
    def from_flow(cls, fm: FlowMap) -> GflowMap:
        return cls(fm.correcting_sets(), dict(fm.layer))


def _longest_path(sets: Mapping[QubitId, frozenset], layer: Mapping[QubitId, int]) -> int:
    """Number of vertices on the longest chain ``i -> j`` with ``j`` in the set of ``i``."""
    if not layer:
        return 0
    best: dict[QubitId, int] = {}
    for v in sorted(layer, key=lambda q: -layer[q]):
        best[v] = 1 + max((best[j] for j in sets.get(v, ())), default=0)
    return max(best.values())


class Determinism(enum.Enum):
    FLOW = "flow"
    GFLOW = "gflow"
    NONE = "none"


@dataclass(frozen=True)
class GeometryClass:
    kind: Determinism
    map: FlowMap | GflowMap | None = None

    @property
    def has_flow(self) -> bool:
        return self.kind is Determinism.FLOW

    @property
    def deterministic(self) -> bool:
        return self.kind is not Determinism.NONE

    @cached_property
    def correcting_sets(self) -> dict[QubitId, frozenset]:
        if self.map is None:
            raise UnsupportedGeometry("geometry has neither flow nor gflow")
        return self.map.correcting_sets()

    @property
    def layer(self) -> Mapping[QubitId, int]:
        if self.map is None:
            raise UnsupportedGeometry("geometry has neither flow nor gflow")
        return self.map.layer

    def describe(self) -> str:
        if self.map is None:
            return "none"
        return f"{self.kind.value}, depth {self.map.depth()}"


class UnsupportedGeometry(ValueError):
    """Raised for geometries without flow or gflow."""


def _check_layers(g: OpenGraph, layer: Mapping[QubitId, int]) -> None:
    missing = g.vertices - set(layer)
    if missing:
        raise FlowError(f"no layer for vertex {min(missing)}")


def verify_flow(g: OpenGraph, fm: FlowMap) -> bool:
    """Check the three causal-flow conditions under ``fm.layer``."""
    if set(fm.f) != set(g.non_outputs):
        raise FlowError("flow must be defined on exactly the non-output vertices")
    if any(j in g.inputs or j not in g.vertices for j in fm.f.values()):
        raise FlowError("flow maps into an input or unknown vertex")
    _check_layers(g, fm.layer)
    if len(set(fm.f.values())) != len(fm.f):
        return False
    lay = fm.layer
    for i, fi in fm.f.items():
        nb = g.neighbors(fi)
        if i not in nb or not lay[i] < lay[fi]:
            return False
        if any(j != i and not lay[i] < lay[j] for j in nb):
            return False
    return True


def verify_gflow(g: OpenGraph, gm: GflowMap) -> bool:
    """Check the three gflow conditions under ``gm.layer``."""
    if set(gm.g) != set(g.non_outputs):
        raise FlowError("gflow must be defined on exactly the non-output vertices")
    for i, k in gm.g.items():
        if not k:
            raise FlowError(f"empty correcting set for {i}")
        if any(j in g.inputs or j not in g.vertices for j in k):
            raise FlowError(f"correcting set of {i} contains an input or unknown vertex")
    _check_layers(g, gm.layer)
    lay = gm.layer
    for i, k in gm.g.items():
        if any(not lay[i] < lay[j] for j in k):
            return False
        odd = g.odd_neighborhood(k)
        if i not in odd:
            return False
        if any(j != i and not lay[i] < lay[j] for j in odd):
            return False
    return True


def _relabel(rounds: dict[QubitId, int]) -> dict[QubitId, int]:
    # rounds count backwards from the outputs (outputs = 0)
    top = max(rounds.values(), default=0)
    return {v: top - r for v, r in rounds.items()}


def find_flow(g: OpenGraph) -> FlowMap | None:
    """Maximally delayed causal flow, or ``None`` if the geometry has none."""
    rounds = {v: 0 for v in g.outputs}
    solved = set(g.outputs)
    correctors = sorted(g.outputs - g.inputs)
    f: dict[QubitId, QubitId] = {}
    r = 0
    while True:
        r += 1
        fresh: dict[QubitId, QubitId] = {}
        used: set[QubitId] = set()
        for v in correctors:
            open_nb = [u for u in g.neighbors(v) if u not in solved]
            if len(open_nb) == 1 and open_nb[0] not in fresh:
                fresh[open_nb[0]] = v
                used.add(v)
        if not fresh:
            break
        for u, v in fresh.items():
            f[u] = v
            rounds[u] = r
        solved |= fresh.keys()
        correctors = sorted((set(correctors) - used) | (set(fresh) - g.inputs))
    if solved != g.vertices:
        return None
    return FlowMap(f, _relabel(rounds))


def find_gflow(g: OpenGraph) -> GflowMap | None:
    """Maximally delayed gflow, or ``None`` if the geometry has none.

    Each round solves, for every unsolved vertex ``u``, the GF(2) system
    ``Odd(K) ∩ unsolved = {u}`` with ``K`` drawn from the solved non-inputs.
    """
    rounds = {v: 0 for v in g.outputs}
    solved = set(g.outputs)
    gmap: dict[QubitId, frozenset] = {}
    r = 0
    while solved != g.vertices:
        r += 1
        cols = sorted(solved - g.inputs)
        open_rows = sorted(g.vertices - solved)
        if not cols:
            break
        col_index = {c: n for n, c in enumerate(cols)}
        rows = []
        for w in open_rows:
            bits = 0
            for c in g.neighbors(w):
                if c in col_index:
                    bits |= 1 << col_index[c]
            rows.append(bits)
        sols = solve_many(rows, len(cols), [1 << n for n in range(len(open_rows))])
        fresh = {}
        for w, x in zip(open_rows, sols):
            if x is not None:
                fresh[w] = frozenset(c for n, c in enumerate(cols) if x >> n & 1)
        if not fresh:
            break
        for w, k in fresh.items():
            gmap[w] = k
            rounds[w] = r
        solved |= fresh.keys()
    if solved != g.vertices:
        return None
    return GflowMap(gmap, _relabel(rounds))


def classify_geometry(g: OpenGraph) -> GeometryClass:
    fm = find_flow(g)
    if fm is not None:
        return GeometryClass(Determinism.FLOW, fm)
    gm = find_gflow(g)
    if gm is not None:
        return GeometryClass(Determinism.GFLOW, gm)
    return GeometryClass(Determinism.NONE)


def invert_fg(m: FlowMap | GflowMap | Mapping[QubitId, frozenset]) -> dict[QubitId, frozenset]:
    """Reverse correction map: ``q -> {k : q in fg(k)}``.

    Keys cover every vertex carrying a layer label (all of V for maps built
    by this module); plain mappings only produce keys for corrected vertices.
    """
    if isinstance(m, (FlowMap, GflowMap)):
        sets = m.correcting_sets()
        inv: dict[QubitId, set[QubitId]] = {v: set() for v in m.layer}
    else:
        sets = dict(m)
        inv = {}
    for k, targets in sets.items():
        for q in targets:
            inv.setdefault(q, set()).add(k)
    return {q: frozenset(v) for q, v in inv.items()}
