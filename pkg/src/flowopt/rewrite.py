"""Measurement-calculus rewriting: the slow reference path.

Builds the standard pattern of a flow/gflow, then standardizes, Pauli
simplifies and signal shifts it by local rewrite rules. Every rule
application is recorded as ``(rule, position)`` so a run can be replayed
step by step; positions index ``Pattern.commands`` (left-to-right
notation).

Rules (``L R`` -> replacement, ``R`` executes first):

=====  ==========================================================
EX     ``E_ij X_i^s  -> X_i^s Z_j^s E_ij``
EZ     ``E_ij Z_i^s  -> Z_i^s E_ij``
EA     ``E_ij A_k    -> A_k E_ij``       (k disjoint from i, j)
AX     ``M_k X_i^s   -> X_i^s M_k``      (k != i)
AZ     ``M_k Z_i^s   -> Z_i^s M_k``      (k != i)
MX     ``M_i X_i^s   -> [M_i]^s``
MZ     ``M_i Z_i^t   -> ^t[M_i]``
P0     ``[M_i^0]^s   -> M_i^0``
PY     ``^t[M_i^{±pi/2}]^s -> ^{t+s}[M_i^{±pi/2}]``
S1     ``^t[M_i]^s   -> S_i^t [M_i]^s``
SM,SX,SZ,SS   ``A S_i^r -> S_i^r A[s_i := s_i + r]``
SD     drop ``S`` at the left end
=====  ==========================================================
"""

from __future__ import annotations

from collections.abc import Iterable
from dataclasses import replace

from flowopt.flow import FlowMap, GeometryClass, GflowMap, UnsupportedGeometry, classify_geometry
from flowopt.graph import E, M, S, X, Z, Command, OpenGraph, Pattern, QubitId, Signal
from flowopt.optimizer import OptimizedPattern, assemble

Trace = list[tuple[str, int]]


class RewriteError(ValueError):
    pass


def standard_pattern(g: OpenGraph, cls: GeometryClass | FlowMap | GflowMap | None = None) -> Pattern:
    """Entangle everything, then measure in layer order with flow/gflow corrections."""
    if cls is None:
        cls = classify_geometry(g)
    if isinstance(cls, GeometryClass):
        if not cls.deterministic:
            raise UnsupportedGeometry("geometry has neither flow nor gflow")
        cls = cls.map
    sets = cls.correcting_sets()
    layer = cls.layer
    run: list[Command] = [E(u, v) for u, v in g.edges]
    for i in sorted(g.non_outputs, key=lambda q: (layer[q], q)):
        run.append(M(i, g.angles[i]))
        k = sets[i]
        si = Signal((i,))
        run.extend(X(j, si) for j in sorted(k))
        run.extend(Z(j, si) for j in sorted(g.odd_neighborhood(k) - {i}))
    return Pattern(g.vertices, g.inputs, g.outputs, reversed(run))


# ---------------------------------------------------------------------------
# single steps


def _shifted(cmd: Command, q: QubitId, r: Signal) -> Command:
    if isinstance(cmd, M):
        return replace(cmd, s=cmd.s.substitute(q, r), t=cmd.t.substitute(q, r))
    return replace(cmd, s=cmd.s.substitute(q, r))


def apply_rule(cmds: list[Command], rule: str, pos: int) -> None:
    """Apply ``rule`` at ``pos`` in place; raises :class:`RewriteError` if it does not match."""
    try:
        cur = cmds[pos]
    except IndexError:
        raise RewriteError(f"{rule}: position {pos} out of range") from None
    if rule in ("P0", "PY", "S1", "SD"):
        if rule == "SD":
            if pos != 0 or not isinstance(cur, S):
                raise RewriteError("SD only removes a leading S command")
            del cmds[0]
            return
        if not isinstance(cur, M):
            raise RewriteError(f"{rule} needs a measurement at {pos}")
        if rule == "P0" and cur.angle.is_pauli_x and cur.s:
            cmds[pos] = replace(cur, s=Signal())
        elif rule == "PY" and cur.angle.is_pauli_y and cur.s:
            cmds[pos] = replace(cur, s=Signal(), t=cur.t + cur.s)
        elif rule == "S1" and cur.t:
            cmds[pos : pos + 1] = [S(cur.q, cur.t), replace(cur, t=Signal())]
        else:
            raise RewriteError(f"{rule} does not apply to {cur}")
        return

    try:
        left, right = cmds[pos], cmds[pos + 1]
    except IndexError:
        raise RewriteError(f"{rule}: no pair at {pos}") from None
    if rule == "EX":
        if not (isinstance(left, E) and isinstance(right, X) and right.q in left.qubits):
            raise RewriteError(f"EX does not apply to {left} {right}")
        other = left.v if right.q == left.u else left.u
        cmds[pos : pos + 2] = [right, Z(other, right.s), left]
    elif rule in ("EZ", "EA", "AX", "AZ"):
        cmds[pos : pos + 2] = [right, left]
    elif rule == "MX":
        cmds[pos : pos + 2] = [replace(left, s=left.s + right.s)]
    elif rule == "MZ":
        cmds[pos : pos + 2] = [replace(left, t=left.t + right.s)]
    elif rule in ("SM", "SX", "SZ", "SS"):
        if not isinstance(right, S):
            raise RewriteError(f"{rule} needs a shift at {pos + 1}")
        cmds[pos : pos + 2] = [right, _shifted(left, right.q, right.s)]
    else:
        raise RewriteError(f"unknown rule {rule!r}")


def _standard_rule(left: Command, right: Command) -> str | None:
    if isinstance(left, E):
        if isinstance(right, E):
            return None
        touches = right.q in left.qubits
        if isinstance(right, X):
            return "EX" if touches else "EA"
        if isinstance(right, Z):
            return "EZ" if touches else "EA"
        if touches:
            raise RewriteError(f"{left} acts on qubit {right.q} after it is measured")
        return "EA"
    if isinstance(left, M) and isinstance(right, (X, Z)):
        if right.q == left.q:
            return "MX" if isinstance(right, X) else "MZ"
        return "AX" if isinstance(right, X) else "AZ"
    return None


def _shift_rule(left: Command, right: Command) -> str | None:
    if not isinstance(right, S) or isinstance(left, E):
        return None
    return {M: "SM", X: "SX", Z: "SZ", S: "SS"}[type(left)]


def _sweep(cmds: list[Command], pick, trace: Trace) -> bool:
    """One right-to-left pass applying every matching pair rule."""
    changed = False
    i = len(cmds) - 2
    while i >= 0:
        rule = pick(cmds[i], cmds[i + 1])
        if rule is not None:
            apply_rule(cmds, rule, i)
            trace.append((rule, i))
            changed = True
        i -= 1
    return changed


def standardize(p: Pattern, trace: Trace | None = None) -> Pattern:
    """Rewrite to correction-measurement-entanglement form."""
    trace = [] if trace is None else trace
    cmds = list(p.commands)
    while _sweep(cmds, _standard_rule, trace):
        pass
    return p.replace(cmds)


def pauli_simplify(p: Pattern, trace: Trace | None = None) -> Pattern:
    trace = [] if trace is None else trace
    cmds = list(p.commands)
    for pos, c in enumerate(cmds):
        if isinstance(c, M) and c.s:
            if c.angle.is_pauli_x:
                apply_rule(cmds, "P0", pos)
                trace.append(("P0", pos))
            elif c.angle.is_pauli_y:
                apply_rule(cmds, "PY", pos)
                trace.append(("PY", pos))
    return p.replace(cmds)


def signal_shift(
    p: Pattern, trace: Trace | None = None, shifted: dict[QubitId, Signal] | None = None
) -> Pattern:
    """Pull every t-exponent out as an S command and push it off the left end.

    ``shifted`` (if given) accumulates, per qubit, the signal that was shifted
    away, i.e. the Z-dependency that the measurement no longer carries.
    """
    trace = [] if trace is None else trace
    cmds = list(p.commands)
    pos = 0
    while pos < len(cmds):
        c = cmds[pos]
        if isinstance(c, M) and c.t:
            apply_rule(cmds, "S1", pos)
            trace.append(("S1", pos))
            pos += 1
        pos += 1
    while True:
        moved = _sweep(cmds, _shift_rule, trace)
        dropped = False
        while cmds and isinstance(cmds[0], S):
            if shifted is not None:
                q = cmds[0].q
                shifted[q] = shifted.get(q, Signal()) + cmds[0].s
            apply_rule(cmds, "SD", 0)
            trace.append(("SD", 0))
            dropped = True
        if not (moved or dropped):
            break
    return p.replace(cmds)


def replay(p: Pattern, trace: Iterable[tuple[str, int]]) -> Pattern:
    cmds = list(p.commands)
    for rule, pos in trace:
        apply_rule(cmds, rule, pos)
    return p.replace(cmds)


def _needs_work(p: Pattern) -> bool:
    for c in p.commands:
        if isinstance(c, M) and (c.t or (c.s and c.angle.is_pauli)):
            return True
    return False


def optimize_pattern(p: Pattern, trace: Trace | None = None) -> tuple[Pattern, dict[QubitId, Signal]]:
    """Standardize, then alternate Pauli simplification and signal shifting to a fixpoint."""
    trace = [] if trace is None else trace
    shifted: dict[QubitId, Signal] = {}
    p = standardize(p, trace)
    while _needs_work(p):
        p = pauli_simplify(p, trace)
        p = signal_shift(p, trace, shifted)
    return p, shifted


def _levels(p: Pattern) -> dict[QubitId, int]:
    levels: dict[QubitId, int] = {}
    for c in p.execution_order():
        if isinstance(c, M):
            levels[c.q] = 1 + max((levels[k] for k in c.s), default=-1)
    return levels


def optimize_by_rules(
    g: OpenGraph,
    cls: GeometryClass | FlowMap | GflowMap | None = None,
    trace: Trace | None = None,
) -> OptimizedPattern:
    """Optimized pattern of ``g`` obtained purely by rewriting its standard pattern."""
    p, shifted = optimize_pattern(standard_pattern(g, cls), trace)
    x_lists = {q: Signal() for q in g.vertices}
    z_lists = {q: Signal() for q in g.vertices}
    for c in p.commands:
        if isinstance(c, M):
            x_lists[c.q] = c.s
        elif isinstance(c, X):
            x_lists[c.q] = x_lists[c.q] + c.s
        elif isinstance(c, Z):
            z_lists[c.q] = z_lists[c.q] + c.s
        elif not isinstance(c, E):
            raise RewriteError(f"unexpected {c} after optimization")
    for q, sig in shifted.items():
        z_lists[q] = z_lists[q] + sig
    return assemble(g, x_lists, z_lists, _levels(p))
