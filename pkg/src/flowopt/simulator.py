"""Dense state-vector execution of patterns.

States are numpy tensors with one axis per live qubit. Measured qubits are
projected out, non-inputs are prepared in |+> the first time a command
touches them. Most routines push all computational-basis inputs through at
once by carrying an extra leading axis, which yields the branch operator of
an outcome assignment directly.
"""

from __future__ import annotations

import itertools
from collections.abc import Mapping, Sequence
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from flowopt.graph import E, M, S, X, Z, Angle, Pattern, QubitId, Signal

TOL = 1e-9
MAX_MEASURED = 20

_PLUS = np.array([1.0, 1.0], dtype=complex) / np.sqrt(2)


class SimulationError(ValueError):
    pass


class TooManyBranches(SimulationError):
    pass


@dataclass
class StateVector:
    """Amplitudes over ``qubits``; the first listed qubit is the most significant bit."""

    amplitudes: np.ndarray
    qubits: tuple

    def __post_init__(self) -> None:
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        self.qubits = tuple(self.qubits)
        if self.amplitudes.size != 2 ** len(self.qubits):
            raise SimulationError(f"{self.amplitudes.size} amplitudes for {len(self.qubits)} qubits")

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    @classmethod
    def basis(cls, qubits: Sequence[QubitId], bits: Sequence[int]) -> StateVector:
        amp = np.zeros(2 ** len(qubits), dtype=complex)
        amp[int("".join(map(str, bits)) or "0", 2)] = 1
        return cls(amp, tuple(qubits))


@dataclass
class Branch:
    outcomes: dict
    probability: float
    output_state: StateVector


class _Register:
    """State tensor: axis 0 enumerates input columns, then one axis per qubit."""

    def __init__(self, columns: np.ndarray, qubits: list[QubitId]) -> None:
        # copied: cz() negates entries in place and callers reuse ``columns``
        self.t = columns.reshape((columns.shape[0],) + (2,) * len(qubits)).copy()
        self.qubits = list(qubits)

    def axis(self, q: QubitId) -> int:
        return 1 + self.qubits.index(q)

    def add_plus(self, q: QubitId) -> None:
        self.t = np.multiply.outer(self.t, _PLUS)
        self.qubits.append(q)

    def apply_1q(self, q: QubitId, u: np.ndarray) -> None:
        ax = self.axis(q)
        self.t = np.moveaxis(np.tensordot(u, self.t, axes=([1], [ax])), 0, ax)

    def cz(self, a: QubitId, b: QubitId) -> None:
        idx: list = [slice(None)] * self.t.ndim
        idx[self.axis(a)] = 1
        idx[self.axis(b)] = 1
        self.t[tuple(idx)] *= -1

    def project(self, q: QubitId, bra: np.ndarray) -> None:
        ax = self.axis(q)
        self.t = np.tensordot(self.t, bra, axes=([ax], [0]))
        self.qubits.remove(q)

    def columns(self, order: Sequence[QubitId]) -> np.ndarray:
        perm = [0] + [self.axis(q) for q in order]
        return np.transpose(self.t, perm).reshape(self.t.shape[0], -1)


_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Z = np.array([[1, 0], [0, -1]], dtype=complex)


def measurement_angle(angle: float, s: int, t: int) -> float:
    """Effective angle of ``^t[M^angle]^s``: ``(-1)^s * angle + t*pi``."""
    return (-1) ** s * angle + t * np.pi


def _execute(
    p: Pattern,
    columns: np.ndarray,
    outcomes: Mapping[QubitId, int],
    angles: Mapping[QubitId, float] | None = None,
) -> np.ndarray:
    inputs = sorted(p.inputs)
    reg = _Register(columns, inputs)
    live = set(inputs)
    measured: set[QubitId] = set()
    values: dict[QubitId, int] = {}

    def sig(s: Signal, cmd) -> int:
        pending = s.terms - measured
        if pending:
            raise SimulationError(f"{cmd} depends on unmeasured qubit {min(pending)}")
        return s.value(values)

    def touch(q: QubitId, cmd) -> None:
        if q in measured:
            raise SimulationError(f"{cmd} acts on measured qubit {q}")
        if q not in p.vertices:
            raise SimulationError(f"{cmd} acts on unknown qubit {q}")
        if q not in live:
            reg.add_plus(q)
            live.add(q)

    for cmd in p.execution_order():
        if isinstance(cmd, S):
            if cmd.q not in measured:
                raise SimulationError(f"{cmd} shifts an unmeasured qubit")
            values[cmd.q] ^= sig(cmd.s, cmd)
            continue
        for q in cmd.qubits:
            touch(q, cmd)
        if isinstance(cmd, E):
            reg.cz(cmd.u, cmd.v)
        elif isinstance(cmd, X):
            if sig(cmd.s, cmd):
                reg.apply_1q(cmd.q, _X)
        elif isinstance(cmd, Z):
            if sig(cmd.s, cmd):
                reg.apply_1q(cmd.q, _Z)
        elif isinstance(cmd, M):
            if cmd.q not in outcomes:
                raise SimulationError(f"no outcome given for measured qubit {cmd.q}")
            base = angles[cmd.q] if angles and cmd.q in angles else cmd.angle.radians()
            a = measurement_angle(base, sig(cmd.s, cmd), sig(cmd.t, cmd))
            b = outcomes[cmd.q]
            bra = np.array([1.0, (-1) ** b * np.exp(-1j * a)]) / np.sqrt(2)
            reg.project(cmd.q, bra)
            live.discard(cmd.q)
            measured.add(cmd.q)
            values[cmd.q] = b
        else:
            raise SimulationError(f"unknown command {cmd!r}")

    extra = set(outcomes) - measured
    if extra:
        raise SimulationError(f"outcome given for unmeasured qubit {min(extra)}")
    for q in sorted(p.outputs - live):
        if q in measured:
            raise SimulationError(f"output {q} was measured")
        reg.add_plus(q)
        live.add(q)
    if live != set(p.outputs):
        raise SimulationError(f"qubits {sorted(live - p.outputs)} left unmeasured")
    return reg.columns(sorted(p.outputs))


def _basis_columns(n: int) -> np.ndarray:
    return np.eye(2**n, dtype=complex)


def run_pattern(
    p: Pattern,
    input_state: StateVector | np.ndarray,
    outcomes: Mapping[QubitId, int],
) -> tuple[StateVector, float]:
    """Run one branch; returns the normalized output state and its probability."""
    amps = input_state.amplitudes if isinstance(input_state, StateVector) else np.asarray(input_state)
    if amps.size != 2 ** len(p.inputs):
        raise SimulationError("input state dimension does not match the inputs")
    out = _execute(p, amps.reshape(1, -1).astype(complex), outcomes)[0]
    prob = float(np.vdot(out, out).real)
    if prob > 0:
        out = out / np.sqrt(prob)
    return StateVector(out, tuple(sorted(p.outputs))), prob


def _outcome_space(p: Pattern) -> tuple[list[QubitId], list[dict]]:
    measured = p.measured()
    if len(measured) > MAX_MEASURED:
        raise TooManyBranches(f"{len(measured)} measured qubits exceed the limit of {MAX_MEASURED}")
    space = [dict(zip(measured, bits)) for bits in itertools.product((0, 1), repeat=len(measured))]
    return measured, space


def enumerate_branches(p: Pattern, input_state: StateVector | np.ndarray) -> list[Branch]:
    _, space = _outcome_space(p)
    branches = []
    for outcomes in space:
        state, prob = run_pattern(p, input_state, outcomes)
        branches.append(Branch(outcomes, prob, state))
    return branches


def branch_maps(
    p: Pattern, angles: Mapping[QubitId, float] | None = None
) -> list[tuple[dict, np.ndarray]]:
    """(outcomes, unnormalized 2^|O| x 2^|I| operator) for every branch."""
    _, space = _outcome_space(p)
    cols = _basis_columns(len(p.inputs))
    return [(o, _execute(p, cols, o, angles).T) for o in space]


def equal_up_to_phase(a: np.ndarray, b: np.ndarray, tol: float = TOL) -> bool:
    """Compare after dividing out the phase of ``a``'s largest-magnitude entry."""
    if a.shape != b.shape:
        return False
    fa, fb = a.reshape(-1), b.reshape(-1)
    if fa.size == 0:
        return True
    k = int(np.argmax(np.abs(fa)))
    if abs(fb[k]) < TOL or abs(fa[k]) < TOL:
        return float(np.max(np.abs(fa - fb))) <= tol
    phase = (fa[k] / abs(fa[k])) / (fb[k] / abs(fb[k]))
    return float(np.max(np.abs(fa - fb * phase))) <= tol


def _deterministic_maps(maps: list[np.ndarray], tol: float) -> bool:
    n = len(maps)
    ident = np.eye(maps[0].shape[1])
    ref = maps[0]
    for a in maps:
        if np.max(np.abs(a.conj().T @ a * n - ident), initial=0.0) > tol:
            return False
        if not equal_up_to_phase(a, ref, tol):
            return False
    return True


def _random_angles(p: Pattern, rng: np.random.Generator) -> dict[QubitId, float]:
    out = {}
    for c in p.commands:
        if isinstance(c, M) and not c.angle.is_pauli:
            out[c.q] = Angle(Fraction(int(rng.integers(-23, 24)), int(rng.integers(2, 25)))).radians()
    return out


def check_determinism(p: Pattern, *, trials: int = 3, seed: int = 0, tol: float = TOL) -> bool:
    """Strong determinism over the computational basis, re-tested with random angles.

    Pauli angles (0, ±pi/2) are kept, since simplified patterns rely on them.
    """
    maps = [m for _, m in branch_maps(p)]
    if not _deterministic_maps(maps, tol):
        return False
    rng = np.random.default_rng(seed)
    for _ in range(trials):
        angles = _random_angles(p, rng)
        if not angles:
            break
        if not _deterministic_maps([m for _, m in branch_maps(p, angles)], tol):
            return False
    return True


def extract_linear_map(p: Pattern, *, check: bool = True) -> np.ndarray:
    """Operator on the all-zero branch, columns renormalized; defined up to global phase."""
    if check and not check_determinism(p, trials=0):
        raise SimulationError("pattern is not deterministic")
    zero = {q: 0 for q in p.measured()}
    a = _execute(p, _basis_columns(len(p.inputs)), zero).T
    norms = np.linalg.norm(a, axis=0)
    norms[norms < TOL] = 1.0
    return a / norms


def patterns_equivalent(p1: Pattern, p2: Pattern, *, check: bool = True, tol: float = TOL) -> bool:
    if p1.inputs != p2.inputs or p1.outputs != p2.outputs:
        return False
    return equal_up_to_phase(extract_linear_map(p1, check=check), extract_linear_map(p2, check=check), tol)


def branch_multiset_equal(p1: Pattern, p2: Pattern, tol: float = 1e-9) -> bool:
    """Same branch operators up to per-branch global phase and relabelling of outcomes.

    Signal shifting and Pauli rules permute outcome labels, so branches are
    matched as a multiset.
    """
    a = [m for _, m in branch_maps(p1)]
    b = [m for _, m in branch_maps(p2)]
    if len(a) != len(b):
        return False
    unused = list(range(len(b)))
    for m in a:
        hit = next(
            (
                j
                for j in unused
                if np.max(np.abs(np.abs(m) - np.abs(b[j])), initial=0.0) <= tol
                and equal_up_to_phase(m, b[j], tol)
            ),
            None,
        )
        if hit is None:
            return False
        unused.remove(hit)
    return True
