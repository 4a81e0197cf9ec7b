"""Geometries, angles, signals and the pattern command IR.

Angles are exact rationals in units of pi. Signals are sets of qubit ids
added by symmetric difference. A :class:`Pattern` stores its commands in
the usual left-to-right notation; execution runs right-to-left, so the last
element of ``Pattern.commands`` is applied first.
"""

from __future__ import annotations

import json
from collections.abc import Iterable, Iterator, Mapping
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Union

QubitId = int


class GeometryError(ValueError):
    """Base class for invalid geometries and geometry files."""


class MalformedGeometry(GeometryError):
    """The document is not valid JSON or does not have the expected shape."""


class DuplicateVertex(GeometryError):
    pass


class UnknownVertex(GeometryError):
    """An edge, input, output or angle refers to a vertex not in ``vertices``."""


class MissingAngle(GeometryError):
    pass


class UnexpectedAngle(GeometryError):
    """An output vertex was given a measurement angle."""


class EmptyGeometry(GeometryError):
    pass


class InvalidEdge(GeometryError):
    """Self-loop or parallel edge."""


@dataclass(frozen=True, order=True)
class Angle:
    """A measurement angle ``value * pi`` normalized into (-1, 1]."""

    value: Fraction

    def __init__(self, value: Union[Fraction, int, str] = 0) -> None:
        v = Fraction(value) % 2
        if v > 1:
            v -= 2
        object.__setattr__(self, "value", v)

    @classmethod
    def parse(cls, text: str) -> Angle:
        try:
            return cls(Fraction(text.strip()))
        except (ValueError, ZeroDivisionError) as exc:
            raise MalformedGeometry(f"bad angle {text!r}") from exc

    @property
    def numerator(self) -> int:
        return self.value.numerator

    @property
    def denominator(self) -> int:
        return self.value.denominator

    @property
    def is_pauli_x(self) -> bool:
        return self.value == 0

    @property
    def is_pauli_y(self) -> bool:
        # -pi/2 measures in the same basis as pi/2 (outcome relabelled), and the
        # gate tables this package reproduces simplify it as a Y measurement.
        return abs(self.value) == Fraction(1, 2)

    @property
    def is_pauli(self) -> bool:
        return self.is_pauli_x or self.is_pauli_y

    def negate(self) -> Angle:
        return Angle(-self.value)

    def radians(self) -> float:
        from math import pi

        return float(self.value) * pi

    def __str__(self) -> str:
        return str(self.value)

    def __repr__(self) -> str:
        return f"Angle({str(self.value)!r})"


@dataclass(frozen=True)
class Signal:
    """A mod-2 sum of measurement outcomes, kept as the set of qubits it mentions."""

    terms: frozenset = field(default_factory=frozenset)

    def __init__(self, terms: Iterable[QubitId] = ()) -> None:
        object.__setattr__(self, "terms", frozenset(terms))

    def __add__(self, other: Signal) -> Signal:
        return Signal(self.terms ^ other.terms)

    __xor__ = __add__

    def __bool__(self) -> bool:
        return bool(self.terms)

    def __len__(self) -> int:
        return len(self.terms)

    def __iter__(self) -> Iterator[QubitId]:
        return iter(sorted(self.terms))

    def __contains__(self, q: object) -> bool:
        return q in self.terms

    def substitute(self, q: QubitId, replacement: Signal) -> Signal:
        """Replace ``s_q`` by ``s_q + replacement`` (identity if ``q`` is absent)."""
        if q in self.terms:
            return self + replacement
        return self

    def value(self, outcomes: Mapping[QubitId, int]) -> int:
        return sum(outcomes[q] for q in self.terms) % 2

    def __str__(self) -> str:
        return "+".join(f"s{q}" for q in self)

    def __repr__(self) -> str:
        return f"Signal({sorted(self.terms)})"


def signal_add(a: Signal, b: Signal) -> Signal:
    return a + b


# ---------------------------------------------------------------------------
# commands


@dataclass(frozen=True)
class E:
    u: QubitId
    v: QubitId

    def __post_init__(self) -> None:
        if self.u == self.v:
            raise ValueError(f"entangling a qubit with itself: {self.u}")

    @property
    def qubits(self) -> tuple[QubitId, ...]:
        return (self.u, self.v)

    def __str__(self) -> str:
        return f"E({self.u},{self.v})"


@dataclass(frozen=True)
class M:
    """Measurement ``^t[M_q^angle]^s``; ``s`` flips the angle sign, ``t`` adds pi."""

    q: QubitId
    angle: Angle
    s: Signal = Signal()
    t: Signal = Signal()

    @property
    def qubits(self) -> tuple[QubitId, ...]:
        return (self.q,)

    def __str__(self) -> str:
        body = f"M{self.q}^{{{self.angle}}}"
        if self.s:
            body = f"[{body}]^{{{self.s}}}"
        if self.t:
            body = f"^{{{self.t}}}" + (body if self.s else f"[{body}]")
        return body


@dataclass(frozen=True)
class X:
    q: QubitId
    s: Signal = Signal()

    @property
    def qubits(self) -> tuple[QubitId, ...]:
        return (self.q,)

    def __str__(self) -> str:
        return f"X{self.q}^{{{self.s}}}"


@dataclass(frozen=True)
class Z:
    q: QubitId
    s: Signal = Signal()

    @property
    def qubits(self) -> tuple[QubitId, ...]:
        return (self.q,)

    def __str__(self) -> str:
        return f"Z{self.q}^{{{self.s}}}"


@dataclass(frozen=True)
class S:
    """Signal shift: substitutes ``s_q -> s_q + s`` in everything executed later."""

    q: QubitId
    s: Signal = Signal()

    @property
    def qubits(self) -> tuple[QubitId, ...]:
        return (self.q,)

    def __str__(self) -> str:
        return f"S{self.q}^{{{self.s}}}"


Command = Union[E, M, X, Z, S]


def command_signals(cmd: Command) -> tuple[Signal, ...]:
    if isinstance(cmd, M):
        return (cmd.s, cmd.t)
    if isinstance(cmd, E):
        return ()
    return (cmd.s,)


# ---------------------------------------------------------------------------
# geometry


def _edge(u: QubitId, v: QubitId) -> tuple[QubitId, QubitId]:
    return (u, v) if u < v else (v, u)


class OpenGraph:
    """An entanglement graph with input and output sets and measurement angles.

    The edge list keeps the order it was given in (each pair stored with the
    smaller id first); equality compares edge *sets*.
    """

    __slots__ = ("vertices", "edges", "inputs", "outputs", "angles", "_adj")

    def __init__(
        self,
        vertices: Iterable[QubitId],
        edges: Iterable[tuple[QubitId, QubitId]],
        inputs: Iterable[QubitId] = (),
        outputs: Iterable[QubitId] = (),
        angles: Mapping[QubitId, Angle | str | Fraction | int] | None = None,
    ) -> None:
        verts = list(vertices)
        vset = frozenset(verts)
        if len(vset) != len(verts):
            dup = sorted(v for v in vset if verts.count(v) > 1)
            raise DuplicateVertex(f"duplicate vertex {dup[0]}")
        if not vset:
            raise EmptyGeometry("geometry has no vertices")
        adj: dict[QubitId, set[QubitId]] = {v: set() for v in vset}
        elist: list[tuple[QubitId, QubitId]] = []
        for u, v in edges:
            for w in (u, v):
                if w not in vset:
                    raise UnknownVertex(f"edge ({u},{v}) uses unknown vertex {w}")
            if u == v:
                raise InvalidEdge(f"self-loop on {u}")
            if v in adj[u]:
                raise InvalidEdge(f"parallel edge ({u},{v})")
            adj[u].add(v)
            adj[v].add(u)
            elist.append(_edge(u, v))
        ins, outs = frozenset(inputs), frozenset(outputs)
        for name, group in (("input", ins), ("output", outs)):
            bad = group - vset
            if bad:
                raise UnknownVertex(f"{name} {min(bad)} is not a vertex")
        raw = dict(angles or {})
        unknown = set(raw) - vset
        if unknown:
            raise UnknownVertex(f"angle given for unknown vertex {min(unknown)}")
        on_out = set(raw) & outs
        if on_out:
            raise UnexpectedAngle(f"output vertex {min(on_out)} has an angle")
        missing = vset - outs - set(raw)
        if missing:
            raise MissingAngle(f"vertex {min(missing)} has no angle")
        ang = {q: a if isinstance(a, Angle) else Angle.parse(str(a)) for q, a in raw.items()}
        self.vertices = vset
        self.edges = tuple(elist)
        self.inputs = ins
        self.outputs = outs
        self.angles = ang
        self._adj = {v: frozenset(n) for v, n in adj.items()}

    @property
    def non_outputs(self) -> frozenset:
        return self.vertices - self.outputs

    @property
    def non_inputs(self) -> frozenset:
        return self.vertices - self.inputs

    def neighbors(self, q: QubitId) -> frozenset:
        try:
            return self._adj[q]
        except KeyError:
            raise UnknownVertex(f"unknown vertex {q}") from None

    def odd_neighborhood(self, k: Iterable[QubitId]) -> frozenset:
        """Vertices with an odd number of neighbours in ``k``."""
        odd: set[QubitId] = set()
        for v in k:
            odd ^= self.neighbors(v)
        return frozenset(odd)

    def edge_set(self) -> frozenset:
        return frozenset(self.edges)

    def with_angles(self, angles: Mapping[QubitId, Angle]) -> OpenGraph:
        return OpenGraph(sorted(self.vertices), self.edges, self.inputs, self.outputs, angles)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, OpenGraph):
            return NotImplemented
        return (
            self.vertices == other.vertices
            and self.edge_set() == other.edge_set()
            and self.inputs == other.inputs
            and self.outputs == other.outputs
            and self.angles == other.angles
        )

    def __hash__(self) -> int:
        return hash((self.vertices, self.edge_set(), self.inputs, self.outputs))

    def __repr__(self) -> str:
        return (
            f"OpenGraph(|V|={len(self.vertices)}, |E|={len(self.edges)}, "
            f"I={sorted(self.inputs)}, O={sorted(self.outputs)})"
        )


def neighbors(g: OpenGraph, q: QubitId) -> frozenset:
    return g.neighbors(q)


def odd_neighborhood(g: OpenGraph, k: Iterable[QubitId]) -> frozenset:
    return g.odd_neighborhood(k)


def parse_geometry(text: bytes | str) -> OpenGraph:
    """Read a geometry document.

    Raises a :class:`GeometryError` subclass naming the first problem found.
    """
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MalformedGeometry(f"line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    if not isinstance(doc, dict):
        raise MalformedGeometry("top level must be an object")
    for key in ("vertices", "edges", "inputs", "outputs", "angles"):
        if key not in doc:
            raise MalformedGeometry(f"missing key {key!r}")

    def ids(seq: object, what: str) -> list[int]:
        if not isinstance(seq, list) or not all(isinstance(x, int) and not isinstance(x, bool) for x in seq):
            raise MalformedGeometry(f"{what} must be a list of integers")
        if any(x < 1 for x in seq):
            raise MalformedGeometry(f"{what} must contain positive integers")
        return seq

    vertices = ids(doc["vertices"], "vertices")
    edges = doc["edges"]
    if not isinstance(edges, list) or not all(isinstance(e, list) and len(e) == 2 for e in edges):
        raise MalformedGeometry("edges must be a list of [u, v] pairs")
    edges = [tuple(ids(e, "edge")) for e in edges]
    angles = doc["angles"]
    if not isinstance(angles, dict) or not all(isinstance(a, str) for a in angles.values()):
        raise MalformedGeometry("angles must map vertex ids to rational strings")
    try:
        angle_map = {int(k): Angle.parse(v) for k, v in angles.items()}
    except ValueError as exc:
        if isinstance(exc, GeometryError):
            raise
        raise MalformedGeometry(f"bad angle key: {exc}") from exc
    return OpenGraph(
        vertices,
        edges,
        ids(doc["inputs"], "inputs"),
        ids(doc["outputs"], "outputs"),
        angle_map,
    )


def geometry_to_dict(g: OpenGraph, *, sort_edges: bool = False) -> dict:
    edges = sorted(g.edges) if sort_edges else list(g.edges)
    return {
        "vertices": sorted(g.vertices),
        "edges": [list(e) for e in edges],
        "inputs": sorted(g.inputs),
        "outputs": sorted(g.outputs),
        "angles": {str(q): str(g.angles[q]) for q in sorted(g.angles)},
    }


def serialize_geometry(g: OpenGraph, *, sort_edges: bool = False) -> bytes:
    """Write ``g`` as a geometry document.

    Vertices are sorted ascending. Edges keep their stored order unless
    ``sort_edges`` is set, because emission order of entangling commands
    follows the edge order.
    """
    return (json.dumps(geometry_to_dict(g, sort_edges=sort_edges), indent=None) + "\n").encode()


# ---------------------------------------------------------------------------
# patterns


@dataclass(frozen=True)
class Pattern:
    vertices: frozenset
    inputs: frozenset
    outputs: frozenset
    commands: tuple = ()

    def __init__(
        self,
        vertices: Iterable[QubitId],
        inputs: Iterable[QubitId],
        outputs: Iterable[QubitId],
        commands: Iterable[Command] = (),
    ) -> None:
        object.__setattr__(self, "vertices", frozenset(vertices))
        object.__setattr__(self, "inputs", frozenset(inputs))
        object.__setattr__(self, "outputs", frozenset(outputs))
        object.__setattr__(self, "commands", tuple(commands))

    def execution_order(self) -> Iterator[Command]:
        return reversed(self.commands)

    def replace(self, commands: Iterable[Command]) -> Pattern:
        return Pattern(self.vertices, self.inputs, self.outputs, commands)

    def measured(self) -> list[QubitId]:
        return [c.q for c in self.execution_order() if isinstance(c, M)]

    def count(self) -> dict[str, int]:
        counts = {"E": 0, "M": 0, "X": 0, "Z": 0, "S": 0}
        for c in self.commands:
            counts[type(c).__name__] += 1
        return counts

    def check(self) -> None:
        """Raise ``ValueError`` unless the pattern is well formed and definite."""
        measured: set[QubitId] = set()
        for c in self.execution_order():
            for q in c.qubits:
                if q not in self.vertices:
                    raise ValueError(f"{c} acts on unknown qubit {q}")
                if q in measured and not isinstance(c, S):
                    raise ValueError(f"{c} acts on measured qubit {q}")
            for sig in command_signals(c):
                pending = sig.terms - measured
                if pending:
                    raise ValueError(f"{c} depends on unmeasured qubit {min(pending)}")
            if isinstance(c, M):
                if c.q in self.outputs:
                    raise ValueError(f"output qubit {c.q} is measured")
                measured.add(c.q)
        missing = self.vertices - self.outputs - measured
        if missing:
            raise ValueError(f"qubit {min(missing)} is never measured")

    def to_text(self) -> str:
        return " ".join(str(c) for c in self.commands)

    def __str__(self) -> str:
        return self.to_text()
