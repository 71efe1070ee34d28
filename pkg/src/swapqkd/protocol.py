"""One round of the entanglement-swapping key distribution protocol.

Two party layouts are supported:

* exchange (default): Alice prepares a PhiPlus pair on qubits (1, 2), Bob
  prepares one on (3, 4), Alice sends qubit 2 to Bob and Bob sends qubit 3
  to Alice;
* Alice-prepares-both: Alice prepares both pairs, keeps (1, 3) and sends
  qubits 2 and 4 to Bob.

Alice applies a secret Pauli to qubit 1 and Bell-measures her two qubits;
Bob Bell-measures his. In the hardened variant Alice first applies a
Hadamard to qubit 1 with probability 1/2 and announces the choice after
her measurement; Bob undoes it on his side before measuring. From Alice's
announced result and his own outcome Bob deduces her Pauli, and the round
key is the Pauli's 2-bit code followed by Bob's outcome code.

Everything an eavesdropper may touch goes through ``ChannelHooks``:
qubits in transit and the classical announcements. The identity hooks
model an honest channel.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import Optional, Tuple

from .qkernel import (
    BellOutcome,
    PauliOp,
    PureState,
    apply_hadamard,
    apply_pauli,
    bell_pair,
    measure_bell_remove,
    pauli_bell_action,
    tensor,
)

# Wire labels used by the round drivers. Eve's internal labels (P..U) must
# stay disjoint from these.
ALICE_KEEP = "1"
ALICE_SEND = "2"
BOB_SEND = "3"
BOB_KEEP = "4"

_PAULIS = (PauliOp.I, PauliOp.X, PauliOp.Y, PauliOp.Z)
_UNIFORM4 = (0.25, 0.25, 0.25, 0.25)
_COIN = (0.5, 0.5)


class Variant(Enum):
    ORIGINAL = "original"
    MODIFIED = "modified"


@dataclass(frozen=True)
class RoundConfig:
    """Per-round choices; ``None`` means sample uniformly at run time."""

    variant: Variant
    alice_pauli: Optional[PauliOp] = None
    hadamard_flag: Optional[bool] = None
    alice_prepares_both: bool = False


@dataclass(slots=True)
class RoundTranscript:
    """Everything one round produces."""

    alice_pauli: PauliOp
    hadamard_flag: bool
    alice_result: BellOutcome
    bob_result: BellOutcome
    imaginary_result: BellOutcome
    bob_deduced_pauli: PauliOp
    key_bits: str
    eve_bits: Optional[str]
    detected: bool


class ChannelHooks:
    """Identity pass-throughs; adversaries subclass and intercept.

    Quantum hooks receive the joint world state and the label of the qubit
    in transit, and return the (possibly transformed) state plus the label
    actually delivered. Classical hooks observe announcements and may act
    on the state Eve holds.
    """

    def on_round_start(self, world: PureState) -> PureState:
        return world

    def on_qubit_from_alice(self, world: PureState, label) -> Tuple[PureState, object]:
        return world, label

    def on_qubit_from_bob(self, world: PureState, label) -> Tuple[PureState, object]:
        return world, label

    def on_pair_to_bob(self, world: PureState, labels) -> Tuple[PureState, tuple]:
        return world, labels

    def on_bsm_announcement(self, world: PureState) -> PureState:
        return world

    def on_h_announcement(self, world: PureState, applied: bool) -> PureState:
        return world

    def on_result_announcement(self, world: PureState, result: BellOutcome) -> PureState:
        return world

    def on_round_finish(self, world: PureState) -> PureState:
        return world

    def record(self):
        """Eve's per-round record, or None for an honest channel."""
        return None


def imaginary_result(bob: BellOutcome) -> BellOutcome:
    """The state Alice's pair would show had she applied no operation.

    Unoperated swapping yields matched pairs, so this is Bob's own outcome.
    """
    return bob


@lru_cache(maxsize=1)
def _deduction_table():
    table = {}
    for p in _PAULIS:
        for a in BellOutcome:
            table[(a, pauli_bell_action(p, a))] = p
    if len(table) != 16:  # pragma: no cover - the action is a group action
        raise RuntimeError("Pauli action on Bell labels is not bijective")
    return table


def deduce_pauli(alice: BellOutcome, bob: BellOutcome) -> PauliOp:
    """The unique Pauli mapping Alice's announced result to Bob's outcome."""
    return _deduction_table()[(alice, bob)]


def key_bits(p: PauliOp, bob: BellOutcome) -> str:
    """Raw key contribution of one round: operation bits, then result bits."""
    return p.bits + bob.bits


@lru_cache(maxsize=2)
def _initial_world(prepares_both: bool) -> PureState:
    # Same state either way; the layouts differ only in who holds what.
    return tensor(
        bell_pair(ALICE_KEEP, ALICE_SEND, BellOutcome.PHI_PLUS),
        bell_pair(BOB_SEND, BOB_KEEP, BellOutcome.PHI_PLUS),
    )


def run_round(cfg: RoundConfig, hooks: ChannelHooks, rnd) -> RoundTranscript:
    """Execute one round of either variant through the given hooks."""
    pauli = cfg.alice_pauli
    if pauli is None:
        pauli = _PAULIS[rnd.choose(_UNIFORM4)]
    flag = False
    if cfg.variant is Variant.MODIFIED:
        flag = cfg.hadamard_flag
        if flag is None:
            flag = bool(rnd.choose(_COIN))

    world = hooks.on_round_start(_initial_world(cfg.alice_prepares_both))

    if cfg.alice_prepares_both:
        world, delivered = hooks.on_pair_to_bob(world, (ALICE_SEND, BOB_KEEP))
        alice_pair = (ALICE_KEEP, BOB_SEND)
        bob_pair = tuple(delivered)
    else:
        world, to_bob = hooks.on_qubit_from_alice(world, ALICE_SEND)
        world, to_alice = hooks.on_qubit_from_bob(world, BOB_SEND)
        alice_pair = (ALICE_KEEP, to_alice)
        bob_pair = (to_bob, BOB_KEEP)

    if flag:
        world = apply_hadamard(world, ALICE_KEEP)
    world = apply_pauli(world, ALICE_KEEP, pauli)

    alice_result, world = measure_bell_remove(world, alice_pair, rnd)
    world = hooks.on_bsm_announcement(world)

    if cfg.variant is Variant.MODIFIED:
        world = hooks.on_h_announcement(world, flag)
        if flag:
            world = apply_hadamard(world, bob_pair[0])

    bob_result, world = measure_bell_remove(world, bob_pair, rnd)
    world = hooks.on_result_announcement(world, alice_result)
    hooks.on_round_finish(world)

    deduced = deduce_pauli(alice_result, bob_result)
    rec = hooks.record()
    return RoundTranscript(
        alice_pauli=pauli,
        hadamard_flag=flag,
        alice_result=alice_result,
        bob_result=bob_result,
        imaginary_result=imaginary_result(bob_result),
        bob_deduced_pauli=deduced,
        key_bits=key_bits(deduced, bob_result),
        eve_bits=rec.inferred_bits if rec is not None else None,
        detected=deduced is not pauli,
    )


def run_original_round(cfg: RoundConfig, hooks: ChannelHooks, rnd) -> RoundTranscript:
    if cfg.variant is not Variant.ORIGINAL:
        raise ValueError("run_original_round requires an ORIGINAL config")
    return run_round(cfg, hooks, rnd)


def run_modified_round(cfg: RoundConfig, hooks: ChannelHooks, rnd) -> RoundTranscript:
    if cfg.variant is not Variant.MODIFIED:
        raise ValueError("run_modified_round requires a MODIFIED config")
    return run_round(cfg, hooks, rnd)
