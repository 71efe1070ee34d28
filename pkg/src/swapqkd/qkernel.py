"""Dense pure-state simulation over named qubits.

States are value objects: every operation returns a fresh ``PureState``
and never mutates its inputs, so states can be shared freely between
rounds and threads. The first label of a state is the most significant
bit of the basis index, i.e. ``amplitude("01")`` on labels ``("a", "b")``
is the coefficient of qubit *a* in 0 and qubit *b* in 1.

Conventions (fixed once, used everywhere):

* ``PhiPlus/PhiMinus  = (|00> +/- |11>)/sqrt(2)``
* ``PsiPlus/PsiMinus  = (|01> +/- |10>)/sqrt(2)``
* ``Y = [[0, -i], [i, 0]]``

Measurement outcomes are phase-free Bell labels; relative phases are
tracked in the amplitudes but only probabilities and labels are ever
observable.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import Hashable, Iterable, Mapping, Sequence, Tuple

import numpy as np

QubitId = Hashable

#: Tolerance for exact-arithmetic comparisons. All amplitudes in this
#: problem are dyadic rationals times powers of sqrt(2), so doubles carry
#: them essentially exactly.
ATOL = 1e-12

_SQRT1_2 = 1.0 / np.sqrt(2.0)


class BellOutcome(Enum):
    """The four Bell states, valued by their agreed 2-bit encoding."""

    PHI_PLUS = 0
    PHI_MINUS = 1
    PSI_PLUS = 2
    PSI_MINUS = 3

    @property
    def bits(self) -> str:
        """Classical 2-bit string for this outcome."""
        return _BITS[self.value]

    def __repr__(self) -> str:
        return self.name

    def __str__(self) -> str:
        return ("Phi+", "Phi-", "Psi+", "Psi-")[self.value]


class PauliOp(Enum):
    """Single-qubit Pauli operations, valued by their 2-bit encoding."""

    I = 0
    X = 1
    Y = 2
    Z = 3

    @property
    def bits(self) -> str:
        return _BITS[self.value]

    @property
    def matrix(self) -> np.ndarray:
        return _PAULI_MATRICES[self]

    def __repr__(self) -> str:
        return self.name


_BITS = ("00", "01", "10", "11")
_OUTCOMES = tuple(BellOutcome)

_PAULI_MATRICES = {
    PauliOp.I: np.eye(2, dtype=complex),
    PauliOp.X: np.array([[0, 1], [1, 0]], dtype=complex),
    PauliOp.Y: np.array([[0, -1j], [1j, 0]], dtype=complex),
    PauliOp.Z: np.array([[1, 0], [0, -1]], dtype=complex),
}

HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) * _SQRT1_2

# Rows indexed by BellOutcome.value, in the pair's computational basis
# |00>, |01>, |10>, |11> (first pair label most significant).
_BELL_KETS = np.array(
    [
        [1, 0, 0, 1],
        [1, 0, 0, -1],
        [0, 1, 1, 0],
        [0, 1, -1, 0],
    ],
    dtype=complex,
) * _SQRT1_2


class PureState:
    """Normalized complex amplitude vector over an ordered tuple of labels.

    Treat instances as immutable: operations return new states and the
    amplitude buffer must not be written to.
    """

    __slots__ = ("labels", "amps")

    def __init__(self, labels: Iterable[QubitId], amps) -> None:
        labels = tuple(labels)
        if len(set(labels)) != len(labels):
            raise ValueError(f"duplicate qubit labels: {labels!r}")
        amps = np.asarray(amps, dtype=complex).reshape(-1).copy()
        if amps.size != 1 << len(labels):
            raise ValueError(
                f"amplitude vector of length {amps.size} does not match "
                f"{len(labels)} qubit labels"
            )
        norm = float(np.sum(amps.real**2 + amps.imag**2))
        if abs(norm - 1.0) > 1e-9:
            raise ValueError(f"state is not normalized: sum |amp|^2 = {norm!r}")
        self.labels = labels
        self.amps = amps

    @classmethod
    def _wrap(cls, labels: Tuple[QubitId, ...], amps: np.ndarray) -> "PureState":
        # Internal fast path: caller guarantees the invariants.
        s = object.__new__(cls)
        s.labels = labels
        s.amps = amps
        return s

    @property
    def num_qubits(self) -> int:
        return len(self.labels)

    def norm_squared(self) -> float:
        return float(np.sum(self.amps.real**2 + self.amps.imag**2))

    def position(self, label: QubitId) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise ValueError(f"unknown qubit label {label!r} (have {self.labels!r})") from None

    def amplitude(self, bits: str) -> complex:
        """Amplitude of one computational basis state, written in label order."""
        if len(bits) != len(self.labels):
            raise ValueError(f"expected {len(self.labels)} bits, got {bits!r}")
        return complex(self.amps[int(bits, 2)])

    def reordered(self, labels: Sequence[QubitId]) -> "PureState":
        """Same state with its labels permuted into the given order."""
        labels = tuple(labels)
        if set(labels) != set(self.labels) or len(labels) != len(self.labels):
            raise ValueError(f"label sets differ: {labels!r} vs {self.labels!r}")
        if labels == self.labels:
            return self
        k = len(self.labels)
        perm = tuple(self.labels.index(l) for l in labels)
        amps = self.amps.reshape((2,) * k).transpose(perm).reshape(-1)
        return PureState._wrap(labels, amps)

    def __repr__(self) -> str:
        return f"PureState(labels={self.labels!r}, dim={self.amps.size})"


@dataclass(frozen=True)
class BranchAction:
    """One (phase, Pauli list) per Bell outcome of a control pair.

    Encodes the controlled operator ``sum_B phase_B |B><B| (x) U_B`` where
    ``U_B`` is the product of the listed Paulis on the listed qubits. Each
    branch op is a phase times a Pauli product, so the whole operator is
    unitary by construction.
    """

    branches: Mapping[BellOutcome, Tuple[complex, Tuple[Tuple[QubitId, PauliOp], ...]]]

    def __post_init__(self) -> None:
        missing = [b for b in BellOutcome if b not in self.branches]
        if missing:
            raise ValueError(f"branch action missing outcomes: {missing}")
        for phase, _ in self.branches.values():
            if abs(abs(complex(phase)) - 1.0) > 1e-12:
                raise ValueError(f"branch phase {phase!r} is not unit magnitude")

    def target_labels(self) -> set:
        out = set()
        for _, paulis in self.branches.values():
            out.update(q for q, _ in paulis)
        return out


# ---------------------------------------------------------------------------
# state constructors


def bell_pair(a: QubitId, b: QubitId, which: BellOutcome) -> PureState:
    """Two-qubit Bell state on labels (a, b)."""
    if a == b:
        raise ValueError(f"duplicate qubit labels: {a!r}")
    return PureState._wrap((a, b), _BELL_KETS[which.value].copy())


def omega_pair(a: QubitId, b: QubitId, sign: int = +1) -> PureState:
    """Hadamard-on-first image of PhiPlus/PhiMinus: (Phi-/+  +/- Psi+/-)/sqrt(2)."""
    if sign not in (+1, -1):
        raise ValueError("sign must be +1 or -1")
    phi = BellOutcome.PHI_MINUS if sign == +1 else BellOutcome.PHI_PLUS
    psi = BellOutcome.PSI_PLUS if sign == +1 else BellOutcome.PSI_MINUS
    amps = (_BELL_KETS[phi.value] + sign * _BELL_KETS[psi.value]) * _SQRT1_2
    return PureState._wrap((a, b), amps)


def chi_pair(a: QubitId, b: QubitId, sign: int = +1) -> PureState:
    """Hadamard-on-first image of PsiPlus/PsiMinus: (Psi-/+  +/- Phi+/-)/sqrt(2)."""
    if sign not in (+1, -1):
        raise ValueError("sign must be +1 or -1")
    psi = BellOutcome.PSI_MINUS if sign == +1 else BellOutcome.PSI_PLUS
    phi = BellOutcome.PHI_PLUS if sign == +1 else BellOutcome.PHI_MINUS
    amps = (_BELL_KETS[psi.value] + sign * _BELL_KETS[phi.value]) * _SQRT1_2
    return PureState._wrap((a, b), amps)


_DELTA_BITS = (
    "000000",
    "001101",
    "010111",
    "011010",
    "100110",
    "101011",
    "110001",
    "111100",
)
_DELTA_INDICES = tuple(int(b, 2) for b in _DELTA_BITS)


def prepare_delta(labels: Sequence[QubitId]) -> PureState:
    """Eve's six-qubit resource state: amplitude 1/(2 sqrt 2) on eight basis states.

    Its defining property is the matched Bell-triple decomposition over the
    pairs (1st,3rd), (2nd,4th), (5th,6th) of the given labels: measuring any
    of those pairs in the Bell basis forces the other two to the same label.
    """
    labels = tuple(labels)
    if len(labels) != 6 or len(set(labels)) != 6:
        raise ValueError(f"need six distinct labels, got {labels!r}")
    amps = np.zeros(64, dtype=complex)
    amps[list(_DELTA_INDICES)] = 0.5 * _SQRT1_2
    return PureState._wrap(labels, amps)


def delta_circuit_stages(
    labels: Sequence[QubitId], *, _corrupt_phase: bool = False
) -> list:
    """Build the six-qubit resource state from three Bell pairs.

    Returns the three intermediate states: after the two Hadamards, after
    the first Bell-conditioned operator, and the final state. The final
    stage equals ``prepare_delta`` up to global phase.

    ``_corrupt_phase`` flips one derived branch sign; it exists only so the
    verification suite can demonstrate that the identity checks actually
    bite.
    """
    labels = tuple(labels)
    if len(labels) != 6 or len(set(labels)) != 6:
        raise ValueError(f"need six distinct labels, got {labels!r}")
    p, q, r, s, t, u = labels
    state = tensor(
        tensor(bell_pair(p, r, BellOutcome.PHI_MINUS), bell_pair(q, s, BellOutcome.PHI_PLUS)),
        bell_pair(t, u, BellOutcome.PHI_PLUS),
    )
    state = apply_hadamard(state, p)
    state = apply_hadamard(state, q)
    stage_h = state

    first = BranchAction(
        {
            BellOutcome.PHI_PLUS: (1, ((q, PauliOp.Z),)),
            BellOutcome.PHI_MINUS: (1, ()),
            BellOutcome.PSI_PLUS: (1, ()),
            BellOutcome.PSI_MINUS: (-1, ()),
        }
    )
    state = apply_bell_conditioned(state, (p, r), first)
    stage_first = state

    # The PhiMinus branch needs an explicit -1 under the sign conventions
    # fixed above; without it the PhiMinus Bell triple comes out with a
    # relative (not global) phase and the construction misses its target.
    phi_minus_phase = +1 if _corrupt_phase else -1
    second = BranchAction(
        {
            BellOutcome.PHI_PLUS: (1, ()),
            BellOutcome.PHI_MINUS: (phi_minus_phase, ((p, PauliOp.X), (t, PauliOp.Z))),
            BellOutcome.PSI_PLUS: (1, ((p, PauliOp.Z), (t, PauliOp.X))),
            # i*sigma_y on both qubits, written as phase (i*i) times Y (x) Y
            BellOutcome.PSI_MINUS: (-1, ((p, PauliOp.Y), (t, PauliOp.Y))),
        }
    )
    state = apply_bell_conditioned(state, (q, s), second)
    return [stage_h, stage_first, state]


def prepare_delta_circuit(labels: Sequence[QubitId]) -> PureState:
    """Circuit-built six-qubit resource state (equals prepare_delta up to phase)."""
    return delta_circuit_stages(labels)[-1]


# ---------------------------------------------------------------------------
# operations


def tensor(a: PureState, b: PureState) -> PureState:
    """Kronecker composition; a's labels stay most significant."""
    overlap = set(a.labels) & set(b.labels)
    if overlap:
        raise ValueError(f"overlapping qubit labels: {sorted(map(repr, overlap))}")
    amps = np.multiply.outer(a.amps, b.amps).reshape(-1)
    return PureState._wrap(a.labels + b.labels, amps)


def _axis_view(state: PureState, q: QubitId) -> np.ndarray:
    # View of the amplitudes as (before, qubit, after).
    pos = state.position(q)
    pre = 1 << pos
    post = state.amps.size >> (pos + 1)
    return state.amps.reshape(pre, 2, post)


_Z_COLUMN = np.array([1.0, -1.0]).reshape(1, 2, 1)
_Y_COLUMN = np.array([-1j, 1j]).reshape(1, 2, 1)


def apply_pauli(state: PureState, q: QubitId, p: PauliOp) -> PureState:
    """Apply one Pauli to the named qubit."""
    if p is PauliOp.I:
        return state
    arr = _axis_view(state, q)
    if p is PauliOp.X:
        out = np.ascontiguousarray(arr[:, ::-1, :])
    elif p is PauliOp.Z:
        out = arr * _Z_COLUMN
    else:  # Y: swap the halves, then -i / +i
        out = arr[:, ::-1, :] * _Y_COLUMN
    return PureState._wrap(state.labels, out.reshape(-1))


def apply_hadamard(state: PureState, q: QubitId) -> PureState:
    """Apply a Hadamard to the named qubit (an involution)."""
    arr = _axis_view(state, q)
    out = np.empty_like(arr)
    np.add(arr[:, 0, :], arr[:, 1, :], out=out[:, 0, :])
    np.subtract(arr[:, 0, :], arr[:, 1, :], out=out[:, 1, :])
    out *= _SQRT1_2
    return PureState._wrap(state.labels, out.reshape(-1))


_PERM_CACHE: dict = {}


def _front_pair_perm(k: int, ia: int, ib: int) -> Tuple[int, ...]:
    key = (k, ia, ib)
    perm = _PERM_CACHE.get(key)
    if perm is None:
        perm = (ia, ib) + tuple(i for i in range(k) if i != ia and i != ib)
        _PERM_CACHE[key] = perm
    return perm


def _bell_split(state: PureState, pair: Tuple[QubitId, QubitId]):
    """Coefficients of the state in the Bell basis of the pair.

    Returns (c, perm) where c has shape (4, 2**(k-2)), row order follows
    BellOutcome, the trailing axis runs over the remaining labels in their
    original relative order, and perm is the axis permutation that brought
    the pair to the front.
    """
    a, b = pair
    if a == b:
        raise ValueError(f"pair labels must differ, got {pair!r}")
    ia, ib = state.position(a), state.position(b)
    k = len(state.labels)
    perm = _front_pair_perm(k, ia, ib)
    arr = state.amps.reshape((2,) * k).transpose(perm).reshape(4, -1)
    # Bell kets are real, so no conjugation is needed for the projection.
    return _BELL_KETS @ arr, perm


def bell_distribution(
    state: PureState, pair: Tuple[QubitId, QubitId]
) -> Tuple[float, float, float, float]:
    """Probabilities of the four Bell projectors on the pair (sum to 1)."""
    c, _ = _bell_split(state, pair)
    probs = _branch_probabilities(c)
    return tuple(float(x) for x in probs)


def _rest_labels(state: PureState, pair) -> Tuple[QubitId, ...]:
    a, b = pair
    return tuple(l for l in state.labels if l != a and l != b)


def _inverse_perm(perm) -> Tuple[int, ...]:
    inv = [0] * len(perm)
    for i, p in enumerate(perm):
        inv[p] = i
    return tuple(inv)


def _branch_probabilities(c: np.ndarray) -> np.ndarray:
    # |z|^2 row sums via the float view, avoiding a conjugated copy.
    v = c.view(np.float64)
    return np.einsum("ij,ij->i", v, v)


def measure_bell(state, pair, rnd) -> Tuple[BellOutcome, PureState]:
    """Projective Bell measurement; the pair is left in the reported state.

    The outcome index is drawn through ``rnd.choose``, so a zero-probability
    branch can never be sampled and deterministic replay sources see every
    choice point.
    """
    c, perm = _bell_split(state, pair)
    probs = _branch_probabilities(c)
    idx = rnd.choose(probs.tolist())
    rest = c[idx] * probs[idx] ** -0.5
    k = len(state.labels)
    full = np.multiply.outer(_BELL_KETS[idx], rest).reshape((2,) * k)
    full = full.transpose(_inverse_perm(perm))
    return _OUTCOMES[idx], PureState._wrap(state.labels, full.reshape(-1))


def measure_bell_remove(state, pair, rnd) -> Tuple[BellOutcome, PureState]:
    """As ``measure_bell`` but drops the measured pair from the state."""
    c, perm = _bell_split(state, pair)
    probs = _branch_probabilities(c)
    idx = rnd.choose(probs.tolist())
    p = probs[idx]
    row = c[idx] if p > 1.0 - 1e-12 else c[idx] * p**-0.5
    labels = state.labels
    rest = tuple([labels[i] for i in perm[2:]])
    return _OUTCOMES[idx], PureState._wrap(rest, row)


def apply_bell_conditioned(
    state: PureState, control: Tuple[QubitId, QubitId], act: BranchAction
) -> PureState:
    """Apply ``sum_B phase_B |B><B|_control (x) U_B`` (unitary)."""
    targets = act.target_labels()
    if targets & set(control):
        raise ValueError(f"action labels collide with control pair: {control!r}")
    rest = _rest_labels(state, control)
    missing = targets - set(rest)
    if missing:
        raise ValueError(f"unknown action labels: {sorted(map(repr, missing))}")
    c, perm = _bell_split(state, control)
    new = np.empty_like(c)
    for outcome in BellOutcome:
        phase, paulis = act.branches[outcome]
        vec = c[outcome.value]
        if paulis:
            sub = PureState._wrap(rest, vec)
            for q, p in paulis:
                sub = apply_pauli(sub, q, p)
            vec = sub.amps
        new[outcome.value] = phase * vec
    k = len(state.labels)
    full = (_BELL_KETS.T @ new).reshape((2,) * k).transpose(_inverse_perm(perm))
    return PureState._wrap(state.labels, full.reshape(-1))


def equal_up_to_global_phase(a: PureState, b: PureState, tol: float = ATOL) -> bool:
    """True iff a = e^(i theta) b within tol, label order normalized."""
    if set(a.labels) != set(b.labels) or len(a.labels) != len(b.labels):
        raise ValueError(f"mismatched label sets: {a.labels!r} vs {b.labels!r}")
    bb = b.reordered(a.labels)
    ref = int(np.argmax(np.abs(a.amps)))
    if abs(bb.amps[ref]) <= tol:
        return False
    phase = a.amps[ref] / bb.amps[ref]
    mag = abs(phase)
    if mag == 0.0:
        return False
    phase /= mag
    return bool(np.allclose(a.amps, phase * bb.amps, rtol=0.0, atol=tol))


@lru_cache(maxsize=1)
def _pauli_action_table():
    # Built once by brute force: apply each Pauli to the first qubit of each
    # Bell ket and identify the resulting Bell label up to phase.
    table = {}
    for p in PauliOp:
        for b in BellOutcome:
            image = (_PAULI_MATRICES[p] @ _BELL_KETS[b.value].reshape(2, 2)).reshape(4)
            for o in BellOutcome:
                if abs(abs(np.vdot(_BELL_KETS[o.value], image)) - 1.0) < 1e-9:
                    table[(p, b)] = o
                    break
            else:  # pragma: no cover - would mean the Bell basis is broken
                raise RuntimeError(f"no Bell state matches {p} applied to {b}")
    return table


def pauli_bell_action(p: PauliOp, b: BellOutcome) -> BellOutcome:
    """Bell label reached when p acts on the first qubit of b (phase-free)."""
    return _pauli_action_table()[(p, b)]
