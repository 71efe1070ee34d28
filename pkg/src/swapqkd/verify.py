"""Self-contained identity checks behind the ``verify`` command.

Each check re-derives one of the exact statements the simulator is built
on (swapping correlations, the resource state's structure, correction
completeness, the detection formulas) and fails loudly on any mismatch.
The suite doubles as a mutation canary: corrupting one branch phase of
the resource-state builder must make the circuit check fail.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import List

import numpy as np

from . import analysis
from .adversary import (
    AttackKind,
    _twisted_first_correction_table,
    first_bsm_corrections,
    second_bsm_corrections,
)
from .analysis import exact_round_stats, session_detection
from .protocol import Variant
from .qkernel import (
    BellOutcome,
    PauliOp,
    apply_hadamard,
    apply_pauli,
    bell_distribution,
    bell_pair,
    chi_pair,
    delta_circuit_stages,
    equal_up_to_global_phase,
    measure_bell_remove,
    omega_pair,
    pauli_bell_action,
    prepare_delta,
    tensor,
)
from .sampling import BranchSource

TOL = 1e-12


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str


def _matched_triple(b: BellOutcome, labels=("P", "Q", "R", "S", "T", "U")):
    p, q, r, s, t, u = labels
    state = tensor(tensor(bell_pair(p, r, b), bell_pair(q, s, b)), bell_pair(t, u, b))
    return state.reordered(labels)


def _check_swap_uniformity() -> str:
    state = tensor(bell_pair("1", "2", BellOutcome.PHI_PLUS), bell_pair("3", "4", BellOutcome.PHI_PLUS))
    probs = bell_distribution(state, ("1", "3"))
    assert all(abs(p - 0.25) <= TOL for p in probs), f"non-uniform: {probs}"
    for b in BellOutcome:
        _, rest = measure_bell_remove(state, ("1", "3"), BranchSource([b.value]))
        want = bell_pair("2", "4", b)
        assert equal_up_to_global_phase(rest, want, TOL), f"partner pair not {b}"
    return "outcome uniform, partner pair matched in all four branches"


def _check_pauli_twisted_swap() -> str:
    for p in PauliOp:
        base = tensor(bell_pair("1", "2", BellOutcome.PHI_PLUS), bell_pair("3", "4", BellOutcome.PHI_PLUS))
        base = apply_pauli(base, "1", p)
        probs = bell_distribution(base, ("1", "3"))
        assert all(abs(x - 0.25) <= TOL for x in probs), f"{p}: non-uniform {probs}"
        for b in BellOutcome:
            _, rest = measure_bell_remove(base, ("1", "3"), BranchSource([b.value]))
            want = bell_pair("2", "4", pauli_bell_action(p, b))
            assert equal_up_to_global_phase(rest, want, TOL), f"{p}, {b}: wrong partner state"
    return "all 16 (Pauli, outcome) partner states match the action table"


def _check_hadamard_images() -> str:
    cases = [
        (BellOutcome.PHI_PLUS, omega_pair("a", "b", +1)),
        (BellOutcome.PHI_MINUS, omega_pair("a", "b", -1)),
        (BellOutcome.PSI_PLUS, chi_pair("a", "b", +1)),
        (BellOutcome.PSI_MINUS, chi_pair("a", "b", -1)),
    ]
    for src, want in cases:
        got = apply_hadamard(bell_pair("a", "b", src), "a")
        assert np.allclose(got.amps, want.amps, atol=TOL), f"H image of {src} wrong"
        again = apply_hadamard(got, "a")
        assert np.allclose(again.amps, bell_pair("a", "b", src).amps, atol=TOL), "H not involutive"
    return "superposed-pair constructors equal Hadamard images; H is involutive"


def _check_resource_state_support() -> str:
    state = prepare_delta(("P", "Q", "R", "S", "T", "U"))
    amp = 0.5 / np.sqrt(2.0)
    support = {"000000", "001101", "010111", "011010", "100110", "101011", "110001", "111100"}
    for i in range(64):
        bits = format(i, "06b")
        want = amp if bits in support else 0.0
        assert abs(state.amps[i] - want) <= TOL, f"amplitude of |{bits}> is {state.amps[i]}"
    return "eight support amplitudes at 1/(2*sqrt(2)), all others zero"


def _check_resource_state_triples() -> str:
    labels = ("P", "Q", "R", "S", "T", "U")
    state = prepare_delta(labels)
    acc = sum(0.5 * _matched_triple(b).amps for b in BellOutcome)
    assert np.allclose(acc, state.amps, atol=TOL), "Bell-triple regrouping mismatch"
    for b in BellOutcome:
        first, rest = measure_bell_remove(state, ("P", "R"), BranchSource([b.value]))
        probs = bell_distribution(rest, ("Q", "S"))
        assert abs(probs[b.value] - 1.0) <= TOL, f"second pair not forced to {b}"
        _, rest2 = measure_bell_remove(rest, ("Q", "S"), BranchSource([b.value]))
        assert equal_up_to_global_phase(rest2, bell_pair("T", "U", b), TOL), f"kept pair not {b}"
    return "matched Bell triples; sequential pair measurements agree and fix the kept pair"


def _check_builder_circuit(corrupt: bool = False) -> str:
    labels = ("P", "Q", "R", "S", "T", "U")
    stages = delta_circuit_stages(labels, _corrupt_phase=corrupt)
    t = lambda bpr, bqs: _matched_triple_mixed(labels, bpr, bqs)
    ph, pm = BellOutcome.PHI_PLUS, BellOutcome.PHI_MINUS
    sp, sm = BellOutcome.PSI_PLUS, BellOutcome.PSI_MINUS
    after_h = 0.5 * (t(ph, pm) + t(ph, sp) - t(sm, pm) - t(sm, sp))
    assert np.allclose(stages[0].reordered(labels).amps, after_h, atol=TOL), "state after Hadamards wrong"
    after_first = 0.5 * (t(ph, ph) + t(ph, sm) + t(sm, pm) + t(sm, sp))
    assert np.allclose(stages[1].reordered(labels).amps, after_first, atol=TOL), "state after first conditioned operator wrong"
    assert equal_up_to_global_phase(stages[2], prepare_delta(labels), TOL), (
        "circuit output differs from the direct preparation"
    )
    return "both intermediates and the final state match the direct preparation"


def _matched_triple_mixed(labels, bpr: BellOutcome, bqs: BellOutcome) -> np.ndarray:
    p, q, r, s, t, u = labels
    state = tensor(
        tensor(bell_pair(p, r, bpr), bell_pair(q, s, bqs)),
        bell_pair(t, u, BellOutcome.PHI_PLUS),
    )
    return state.reordered(labels).amps


def _check_first_corrections() -> str:
    target = prepare_delta(("1", "Q", "R", "S", "T", "U"))
    for pa in PauliOp:
        base = tensor(bell_pair("1", "2", BellOutcome.PHI_PLUS), prepare_delta(("P", "Q", "R", "S", "T", "U")))
        base = apply_pauli(base, "1", pa)
        want = apply_pauli(target, "1", pa)
        for outcome in BellOutcome:
            _, state = measure_bell_remove(base, ("2", "P"), BranchSource([outcome.value]))
            for q, p in first_bsm_corrections(outcome):
                state = apply_pauli(state, q, p)
            assert equal_up_to_global_phase(state, want, TOL), f"{pa}, {outcome}: not restored"
    return "all four outcomes restore the resource state, for every secret Pauli"


def _check_second_corrections() -> str:
    table = {b: second_bsm_corrections(b) for b in BellOutcome}
    target = prepare_delta(("1", "Q", "R", "4", "T", "U"))
    for pa in PauliOp:
        base = tensor(prepare_delta(("1", "Q", "R", "S", "T", "U")), bell_pair("3", "4", BellOutcome.PHI_PLUS))
        base = apply_pauli(base, "1", pa)
        want = apply_pauli(target, "1", pa)
        for outcome in BellOutcome:
            _, state = measure_bell_remove(base, ("3", "S"), BranchSource([outcome.value]))
            for q, p in table[outcome]:
                state = apply_pauli(state, q, p)
            assert equal_up_to_global_phase(state, want, TOL), f"{pa}, {outcome}: not restored"
    return "derived table restores the relabeled resource state for every outcome"


def _check_twisted_first_corrections() -> str:
    table = _twisted_first_correction_table()
    base = tensor(
        bell_pair("1", "2", BellOutcome.PHI_PLUS),
        apply_hadamard(apply_hadamard(prepare_delta(("P", "Q", "R", "S", "T", "U")), "P"), "Q"),
    )
    want = apply_hadamard(apply_hadamard(prepare_delta(("1", "Q", "R", "S", "T", "U")), "1"), "Q")
    for outcome in BellOutcome:
        _, state = measure_bell_remove(base, ("2", "P"), BranchSource([outcome.value]))
        for q, p in table[outcome]:
            state = apply_pauli(state, q, p)
        assert equal_up_to_global_phase(state, want, TOL), f"{outcome}: not restored"
    return "pre-Hadamarded resource restored for every outcome"


def _check_original_vs_resource_swap() -> str:
    s = exact_round_stats(Variant.ORIGINAL, AttackKind.DELTA_SWAP)
    assert s.detection == 0, f"detection {s.detection}"
    assert s.eve_agreement == 1, f"agreement {s.eve_agreement}"
    return "detection 0, full key leakage, by exact enumeration"


def _check_modified_vs_resource_swap() -> str:
    s = exact_round_stats(Variant.MODIFIED, AttackKind.DELTA_SWAP)
    assert s.detection == Fraction(1, 4), f"detection {s.detection}"
    assert s.detection_given_h == Fraction(1, 2), f"given H {s.detection_given_h}"
    assert s.detection_given_no_h == 0, f"given no H {s.detection_given_no_h}"
    for n in range(1, 33):
        exact = float(session_detection(Variant.MODIFIED, AttackKind.DELTA_SWAP, n))
        closed = 1.0 - 0.75**n
        assert abs(exact - closed) <= TOL, f"n={n}: {exact} vs {closed}"
    return "per-round 1/4 (1/2 given H, 0 without), session curve 1-(3/4)^n"


def _check_modified_vs_h_pre() -> str:
    s = exact_round_stats(Variant.MODIFIED, AttackKind.DELTA_SWAP_H_PRE)
    assert s.detection == Fraction(1, 4), f"detection {s.detection}"
    assert s.detection_given_h == 0, f"given H {s.detection_given_h}"
    assert s.detection_given_no_h == Fraction(1, 2), f"given no H {s.detection_given_no_h}"
    leaves = analysis.enumerate_round_branches(Variant.MODIFIED, AttackKind.DELTA_SWAP_H_PRE)
    flagged = [(w, t) for w, t in leaves if t.hadamard_flag]
    total = sum(w for w, _ in flagged)
    leaked = sum(w for w, t in flagged if t.eve_bits == t.key_bits)
    assert leaked == total, "leakage under the Hadamard flag is not total"
    return "zero error and full leakage when Alice flips, 1/2 otherwise; 1/4 overall"


def _check_modified_vs_random_h() -> str:
    s = exact_round_stats(Variant.MODIFIED, AttackKind.DELTA_SWAP_RANDOM_H)
    assert s.detection == Fraction(1, 4), f"detection {s.detection}"
    assert s.detection_given_h == s.detection_given_no_h, (
        f"unequal conditionals {s.detection_given_h} vs {s.detection_given_no_h}"
    )
    assert s.detection_given_h > 0, "errors not spread over both flags"
    return "equal strictly-positive error rates on both announcement flags"


def _check_modified_vs_delayed() -> str:
    s = exact_round_stats(Variant.MODIFIED, AttackKind.DELAYED_MEASUREMENT)
    assert s.detection == Fraction(3, 4), f"detection {s.detection}"
    tables = analysis.correlation_table(Variant.MODIFIED, AttackKind.DELAYED_MEASUREMENT)
    for key, joint in tables.items():
        for row in joint:
            for cell in row:
                assert cell == Fraction(1, 16), f"{key}: joint not uniform"
    leaves = analysis.enumerate_round_branches(Variant.MODIFIED, AttackKind.DELAYED_MEASUREMENT)
    assert all(t.eve_bits == t.key_bits for _, t in leaves), "kept pair does not clone Bob"
    for n in range(1, 33):
        exact = float(session_detection(Variant.MODIFIED, AttackKind.DELAYED_MEASUREMENT, n))
        closed = 1.0 - 0.25**n
        assert abs(exact - closed) <= TOL, f"n={n}: {exact} vs {closed}"
    return "Bob uniform and independent of Alice, session curve 1-(1/4)^n"


def _check_intercept_resend() -> str:
    s = exact_round_stats(Variant.ORIGINAL, AttackKind.INTERCEPT_RESEND, alice_prepares_both=True)
    assert s.detection == 0, f"detection {s.detection}"
    assert s.eve_agreement == 1, f"agreement {s.eve_agreement}"
    honest = analysis.correlation_table(Variant.ORIGINAL, AttackKind.NONE, alice_prepares_both=True)
    attacked = analysis.correlation_table(Variant.ORIGINAL, AttackKind.INTERCEPT_RESEND, alice_prepares_both=True)
    assert honest == attacked, "outcome correlations disturbed"
    return "full key knowledge, zero disturbance on the prepare-both layout"


def _transcript_distribution(variant: Variant, attack: AttackKind):
    dist: dict = {}
    for w, t in analysis.enumerate_round_branches(variant, attack):
        key = (
            t.alice_pauli,
            t.hadamard_flag,
            t.alice_result,
            t.bob_result,
            t.detected,
            t.eve_bits == t.key_bits,
        )
        dist[key] = dist.get(key, Fraction(0)) + w
    return dist


def _check_source_control() -> str:
    for variant in (Variant.ORIGINAL, Variant.MODIFIED):
        a = _transcript_distribution(variant, AttackKind.SOURCE_CONTROL)
        b = _transcript_distribution(variant, AttackKind.DELTA_SWAP)
        assert a == b, f"{variant}: source-control transcripts differ from interception"
    return "malicious source reproduces the interception statistics on both variants"


def _check_honest_rounds() -> str:
    for variant in (Variant.ORIGINAL, Variant.MODIFIED):
        s = exact_round_stats(variant, AttackKind.NONE)
        assert s.detection == 0, f"{variant}: honest detection {s.detection}"
        leaves = analysis.enumerate_round_branches(variant, AttackKind.NONE)
        assert all(t.bob_deduced_pauli is t.alice_pauli for _, t in leaves), (
            f"{variant}: deduction failed on some branch"
        )
    return "no false alarms and exact Pauli deduction on every branch, both variants"


def checks(corrupt_circuit: bool = False) -> List:
    """The ordered check list; ``corrupt_circuit`` arms the mutation canary."""
    return [
        ("swap-uniformity", _check_swap_uniformity),
        ("pauli-twisted-swap", _check_pauli_twisted_swap),
        ("hadamard-superposition-images", _check_hadamard_images),
        ("resource-state-support", _check_resource_state_support),
        ("resource-state-bell-triples", _check_resource_state_triples),
        ("builder-circuit", lambda: _check_builder_circuit(corrupt=corrupt_circuit)),
        ("first-interception-corrections", _check_first_corrections),
        ("second-interception-corrections", _check_second_corrections),
        ("twisted-first-interception-corrections", _check_twisted_first_corrections),
        ("honest-rounds", _check_honest_rounds),
        ("original-vs-resource-swap", _check_original_vs_resource_swap),
        ("modified-vs-resource-swap", _check_modified_vs_resource_swap),
        ("modified-vs-h-precompensation", _check_modified_vs_h_pre),
        ("modified-vs-random-h", _check_modified_vs_random_h),
        ("modified-vs-delayed-measurement", _check_modified_vs_delayed),
        ("prepare-both-vs-intercept-resend", _check_intercept_resend),
        ("source-control-equivalence", _check_source_control),
    ]


def run_checks(corrupt_circuit: bool = False) -> List[CheckResult]:
    results = []
    for name, fn in checks(corrupt_circuit):
        try:
            detail = fn()
            results.append(CheckResult(name, True, detail))
        except AssertionError as exc:
            results.append(CheckResult(name, False, str(exc)))
    return results


def format_correction_tables() -> str:
    """Human-readable dump of the fixed and derived correction tables."""
    lines = ["correction tables (applied after Eve's interception measurements):"]
    sections = [
        ("first interception, plain resource (fixed)", first_bsm_corrections),
        ("second interception (derived by search)", second_bsm_corrections),
        (
            "first interception, pre-Hadamarded resource (derived by search)",
            lambda b: _twisted_first_correction_table()[b],
        ),
    ]
    for title, lookup in sections:
        lines.append(f"  {title}:")
        for b in BellOutcome:
            ops = ", ".join(f"{p.name} on {q}" for q, p in lookup(b)) or "nothing"
            lines.append(f"    {b}: {ops}")
    return "\n".join(lines)
