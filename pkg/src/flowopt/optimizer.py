"""Direct computation of the optimized pattern from a geometry.

For every qubit this derives the X- and Z-correction sources left after
standardization, Pauli simplification and signal shifting, without touching a
single rewrite rule. The procedure runs over the qubits in correction order
and uses per-qubit parity flags to fold dependency multisets mod 2.

Levels are stored 0-based; :func:`display_level` gives the 1-based value used
in reports.
"""

from __future__ import annotations

from collections.abc import Iterator, Mapping
from dataclasses import dataclass, field

from flowopt.flow import (
    FlowMap,
    GeometryClass,
    GflowMap,
    UnsupportedGeometry,
    classify_geometry,
    invert_fg,
)
from flowopt.graph import E, M, Angle, OpenGraph, Pattern, QubitId, Signal, X, Z


@dataclass
class QubitRecord:
    id: QubitId
    angle: Angle | None = None
    x_list: list[QubitId] = field(default_factory=list)
    z_list: list[QubitId] = field(default_factory=list)
    level: int | None = None
    fg: frozenset = frozenset()
    fg_inv: list[QubitId] = field(default_factory=list)
    neighbor_list: list[QubitId] = field(default_factory=list)
    neighbor_z_list: list[QubitId] = field(default_factory=list)
    odd: bool = False

    @property
    def is_output(self) -> bool:
        return self.angle is None


class QList:
    """Qubit records in correction order, outputs last."""

    def __init__(self, records: list[QubitRecord]) -> None:
        self.records = records
        self.by_id = {r.id: r for r in records}

    def __iter__(self) -> Iterator[QubitRecord]:
        return iter(self.records)

    def __len__(self) -> int:
        return len(self.records)

    def __getitem__(self, q: QubitId) -> QubitRecord:
        return self.by_id[q]

    def ids(self) -> list[QubitId]:
        return [r.id for r in self.records]


def build_qlist(g: OpenGraph, cls: GeometryClass | FlowMap | GflowMap) -> QList:
    if isinstance(cls, GeometryClass):
        if not cls.deterministic:
            raise UnsupportedGeometry("geometry has neither flow nor gflow")
        fgmap = cls.map
    else:
        fgmap = cls
    sets = fgmap.correcting_sets()
    inv = invert_fg(fgmap)
    layer = fgmap.layer

    def key(q: QubitId) -> tuple:
        return (q in g.outputs, layer[q], q)

    records = []
    for q in sorted(g.vertices, key=key):
        records.append(
            QubitRecord(
                id=q,
                angle=g.angles.get(q),
                fg=sets.get(q, frozenset()),
                fg_inv=sorted(inv.get(q, ())),
                neighbor_list=sorted(g.neighbors(q)),
            )
        )
    return QList(records)


def find_neighbor_z(qlist: QList) -> QList:
    for q in qlist:
        q.neighbor_z_list = []
        for n in q.neighbor_list:
            q.neighbor_z_list.extend(k for k in qlist[n].fg_inv if k != q.id)
    return qlist


def _fold(sources: list[QubitId], qlist: QList) -> tuple[list[QubitId], list[QubitRecord]]:
    """Toggle parity over each source and its z_list; return the dependency list."""
    deps: list[QubitRecord] = []
    seen: set[QubitId] = set()
    for p in sources:
        rec = qlist[p]
        rec.odd = not rec.odd
        if p not in seen:
            seen.add(p)
            deps.append(rec)
        for sq in rec.z_list:
            srec = qlist[sq]
            if sq not in seen:
                seen.add(sq)
                deps.append(srec)
            srec.odd = not srec.odd
    return [d.id for d in deps], deps


def find_x_list(q: QubitRecord, qlist: QList) -> QubitRecord:
    _, deps = _fold(q.fg_inv, qlist)
    q.x_list = []
    if not deps:
        q.level = 0
    else:
        top = 0
        for d in deps:
            if d.odd:
                q.x_list.append(d.id)
                d.odd = False
                top = max(top, d.level or 0)
        q.level = top + 1
    if q.angle is not None and q.angle.is_pauli:
        q.x_list = []
    return q


def find_z_list(q: QubitRecord, qlist: QList) -> QubitRecord:
    sources = list(q.neighbor_z_list)
    if q.angle is not None and q.angle.is_pauli_y:
        sources += q.fg_inv
    _, deps = _fold(sources, qlist)
    q.z_list = []
    for d in deps:
        if d.odd:
            q.z_list.append(d.id)
            d.odd = False
    return q


@dataclass(frozen=True)
class Measurement:
    q: QubitId
    angle: Angle
    s: Signal


@dataclass(frozen=True)
class OptimizedPattern:
    """Optimized pattern in command sections plus the per-qubit correction lists.

    ``measurements`` and ``output_corrections`` are in emission order
    (leftmost first); ``entanglement`` likewise.
    """

    vertices: frozenset
    inputs: frozenset
    outputs: frozenset
    entanglement: tuple
    measurements: tuple
    output_corrections: tuple  # (q, X signal, Z signal), descending q
    levels: Mapping[QubitId, int]
    x_lists: Mapping[QubitId, Signal]
    z_lists: Mapping[QubitId, Signal]

    def to_pattern(self) -> Pattern:
        cmds: list = []
        for q, xs, zs in self.output_corrections:
            if zs:
                cmds.append(Z(q, zs))
            if xs:
                cmds.append(X(q, xs))
        cmds += [M(m.q, m.angle, m.s) for m in self.measurements]
        cmds += [E(u, v) for u, v in self.entanglement]
        return Pattern(self.vertices, self.inputs, self.outputs, cmds)

    def to_text(self) -> str:
        return self.to_pattern().to_text()

    def to_dict(self) -> dict:
        return {
            "vertices": sorted(self.vertices),
            "inputs": sorted(self.inputs),
            "outputs": sorted(self.outputs),
            "entanglement": [list(e) for e in self.entanglement],
            "measurements": [
                {"qubit": m.q, "angle": str(m.angle), "s": sorted(m.s)} for m in self.measurements
            ],
            "output_corrections": [
                {"qubit": q, "x": sorted(xs), "z": sorted(zs)} for q, xs, zs in self.output_corrections
            ],
            "levels": {str(q): display_level(v) for q, v in sorted(self.levels.items())},
            "pattern": self.to_text(),
        }

    def same_corrections(self, other: OptimizedPattern) -> bool:
        return (
            self.x_lists == other.x_lists
            and self.z_lists == other.z_lists
            and {m.q: m.s for m in self.measurements} == {m.q: m.s for m in other.measurements}
            and set(self.output_corrections) == set(other.output_corrections)
        )


def display_level(level: int) -> int:
    return level + 1


def _measurement_key(m: Measurement, levels: Mapping[QubitId, int]) -> tuple:
    # dependent measurements leftmost, then later levels first; always definite
    return (not m.s, -levels[m.q], -m.q)


def assemble(
    g: OpenGraph,
    x_lists: Mapping[QubitId, Signal],
    z_lists: Mapping[QubitId, Signal],
    levels: Mapping[QubitId, int],
) -> OptimizedPattern:
    """Lay out the optimized command sections from per-qubit correction lists."""
    meas = [Measurement(q, g.angles[q], x_lists[q]) for q in g.non_outputs]
    meas.sort(key=lambda m: _measurement_key(m, levels))
    corr = tuple((q, x_lists[q], z_lists[q]) for q in sorted(g.outputs, reverse=True))
    return OptimizedPattern(
        vertices=g.vertices,
        inputs=g.inputs,
        outputs=g.outputs,
        entanglement=tuple(reversed(g.edges)),
        measurements=tuple(meas),
        output_corrections=corr,
        levels=dict(levels),
        x_lists=dict(x_lists),
        z_lists=dict(z_lists),
    )


def run_direct(g: OpenGraph, fgmap: GeometryClass | FlowMap | GflowMap | None = None) -> QList:
    """Build the QList and fill every record's lists and level."""
    if fgmap is None:
        fgmap = classify_geometry(g)
    qlist = find_neighbor_z(build_qlist(g, fgmap))
    for q in qlist:
        find_x_list(q, qlist)
        find_z_list(q, qlist)
    return qlist


def optimize_geometry(
    g: OpenGraph, fgmap: GeometryClass | FlowMap | GflowMap | None = None
) -> OptimizedPattern:
    """Optimized pattern of ``g``.

    ``fgmap`` defaults to the classifier's maximally delayed flow or gflow;
    pass an explicit map to optimize relative to a different correction
    strategy.
    """
    qlist = run_direct(g, fgmap)
    return assemble(
        g,
        {r.id: Signal(r.x_list) for r in qlist},
        {r.id: Signal(r.z_list) for r in qlist},
        {r.id: r.level for r in qlist if not r.is_output},
    )


def gflow_levels(g: OpenGraph) -> dict[QubitId, int]:
    """0-based levels of the non-outputs; defined for geometries with flow."""
    cls = classify_geometry(g)
    if not cls.has_flow:
        raise UnsupportedGeometry("levels are only defined for geometries with flow")
    return {r.id: r.level for r in run_direct(g, cls) if not r.is_output}
