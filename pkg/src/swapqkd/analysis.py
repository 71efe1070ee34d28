"""Exact and Monte Carlo statistics per (protocol variant, attack) pair.

Exact figures come from full branch enumeration: a round is replayed once
per path through its choice points (secret Pauli, Hadamard flag, every
measurement branch, Eve's coins), each path carrying an exact rational
weight. The state space is tiny (at most ten qubits, choice trees of
depth about eight), so enumeration is cheap and Monte Carlo is purely
confirmatory: it runs real rounds through the same hooks machinery with a
seeded generator and is expected to land within a few standard errors of
the enumerated values.
"""
from __future__ import annotations

import multiprocessing
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Dict, List, Optional, Tuple

from .adversary import AttackKind, make_hooks, warm_correction_tables
from .protocol import RoundConfig, RoundTranscript, Variant, run_round
from .qkernel import PauliOp
from .sampling import BranchPoint, BranchSource, TapeSource, uniform_tapes

WEIGHT_TOL = 1e-12


def check_compatible(variant: Variant, attack: AttackKind, alice_prepares_both: bool) -> None:
    """Reject pairings the strategies are not wired for."""
    if attack is AttackKind.INTERCEPT_RESEND and not alice_prepares_both:
        raise ValueError(
            "the intercept-resend strategy needs the Alice-prepares-both layout"
        )
    if alice_prepares_both and attack not in (AttackKind.NONE, AttackKind.INTERCEPT_RESEND):
        raise ValueError(
            f"{attack.value} intercepts the exchanged qubits and is incompatible "
            "with the Alice-prepares-both layout"
        )
    if attack is AttackKind.DELAYED_MEASUREMENT and variant is not Variant.MODIFIED:
        raise ValueError(
            "the delayed-measurement strategy waits for the Hadamard announcement, "
            "which only the modified protocol makes"
        )


Branch = Tuple[Fraction, RoundTranscript]


def enumerate_round_branches(
    variant: Variant,
    attack: AttackKind,
    alice_prepares_both: bool = False,
    alice_pauli: Optional[PauliOp] = None,
    hadamard_flag: Optional[bool] = None,
) -> List[Branch]:
    """All (weight, transcript) leaves of one round's choice tree.

    Weights are exact rationals and sum to 1. Free choices left as None
    are enumerated alongside the measurement branches.
    """
    check_compatible(variant, attack, alice_prepares_both)
    cfg = RoundConfig(
        variant=variant,
        alice_pauli=alice_pauli,
        hadamard_flag=hadamard_flag,
        alice_prepares_both=alice_prepares_both,
    )
    leaves: List[Branch] = []
    stack: List[Tuple[int, ...]] = [()]
    while stack:
        path = stack.pop()
        src = BranchSource(path)
        try:
            transcript = run_round(cfg, make_hooks(attack, src), src)
        except BranchPoint as bp:
            stack.extend(path + (i,) for i in bp.indices)
            continue
        leaves.append((src.weight, transcript))
    total = sum(w for w, _ in leaves)
    if abs(float(total) - 1.0) > WEIGHT_TOL:
        raise RuntimeError(f"branch weights sum to {total}, not 1")
    return leaves


@lru_cache(maxsize=64)
def _enumeration(variant: Variant, attack: AttackKind, alice_prepares_both: bool) -> Tuple[Branch, ...]:
    return tuple(enumerate_round_branches(variant, attack, alice_prepares_both))


@dataclass(frozen=True)
class RoundStats:
    """Exact per-round statistics from full enumeration."""

    detection: Fraction
    eve_agreement: Optional[Fraction]
    detection_given_h: Optional[Fraction]
    detection_given_no_h: Optional[Fraction]
    branch_count: int


def _conditional(leaves, predicate, event) -> Optional[Fraction]:
    weight = sum((w for w, t in leaves if predicate(t)), Fraction(0))
    if weight == 0:
        return None
    hits = sum((w for w, t in leaves if predicate(t) and event(t)), Fraction(0))
    return hits / weight


def exact_round_stats(
    variant: Variant, attack: AttackKind, alice_prepares_both: bool = False
) -> RoundStats:
    """Exact detection and key-leakage probabilities for one round."""
    leaves = _enumeration(variant, attack, alice_prepares_both)
    detection = sum((w for w, t in leaves if t.detected), Fraction(0))
    has_eve = any(t.eve_bits is not None for _, t in leaves)
    agreement = None
    if has_eve:
        agreement = sum(
            (w for w, t in leaves if t.eve_bits == t.key_bits), Fraction(0)
        )
    if variant is Variant.MODIFIED:
        given_h = _conditional(leaves, lambda t: t.hadamard_flag, lambda t: t.detected)
        given_no_h = _conditional(leaves, lambda t: not t.hadamard_flag, lambda t: t.detected)
    else:
        given_h = given_no_h = None
    return RoundStats(
        detection=detection,
        eve_agreement=agreement,
        detection_given_h=given_h,
        detection_given_no_h=given_no_h,
        branch_count=len(leaves),
    )


def session_detection(
    variant: Variant, attack: AttackKind, n: int, alice_prepares_both: bool = False
) -> Fraction:
    """Probability at least one of n compared rounds shows a mismatch."""
    if n < 1:
        raise ValueError("n must be >= 1")
    per_round = exact_round_stats(variant, attack, alice_prepares_both).detection
    return 1 - (1 - per_round) ** n


# Closed-form per-round undetected probabilities where a reference formula
# exists; everything else falls back to the enumerated value.
_CLOSED_FORM_UNDETECTED: Dict[Tuple[Variant, AttackKind], Fraction] = {
    (Variant.ORIGINAL, AttackKind.NONE): Fraction(1),
    (Variant.MODIFIED, AttackKind.NONE): Fraction(1),
    (Variant.ORIGINAL, AttackKind.INTERCEPT_RESEND): Fraction(1),
    (Variant.ORIGINAL, AttackKind.DELTA_SWAP): Fraction(1),
    (Variant.ORIGINAL, AttackKind.SOURCE_CONTROL): Fraction(1),
    (Variant.MODIFIED, AttackKind.DELTA_SWAP): Fraction(3, 4),
    (Variant.MODIFIED, AttackKind.DELTA_SWAP_H_PRE): Fraction(3, 4),
    (Variant.MODIFIED, AttackKind.DELTA_SWAP_RANDOM_H): Fraction(3, 4),
    (Variant.MODIFIED, AttackKind.SOURCE_CONTROL): Fraction(3, 4),
    (Variant.MODIFIED, AttackKind.DELAYED_MEASUREMENT): Fraction(1, 4),
}


def closed_form_session_detection(
    variant: Variant, attack: AttackKind, n: int, alice_prepares_both: bool = False
) -> float:
    """Reference curve 1 - undetected^n from the closed-form table."""
    undetected = _CLOSED_FORM_UNDETECTED.get((variant, attack))
    if undetected is None:
        undetected = 1 - exact_round_stats(variant, attack, alice_prepares_both).detection
    return float(1 - undetected**n)


def correlation_table(
    variant: Variant, attack: AttackKind, alice_prepares_both: bool = False
) -> Dict[Tuple[PauliOp, Optional[bool]], List[List[Fraction]]]:
    """Joint (Alice result, Bob result) distribution per hidden choice.

    Keys are (secret Pauli, Hadamard flag) with the flag None for the
    original variant; each value is a 4x4 matrix of exact probabilities
    indexed by BellOutcome value, conditional on the key's choices.
    """
    leaves = _enumeration(variant, attack, alice_prepares_both)
    grouped: Dict[Tuple[PauliOp, Optional[bool]], List[List[Fraction]]] = {}
    weights: Dict[Tuple[PauliOp, Optional[bool]], Fraction] = {}
    for w, t in leaves:
        flag = t.hadamard_flag if variant is Variant.MODIFIED else None
        key = (t.alice_pauli, flag)
        if key not in grouped:
            grouped[key] = [[Fraction(0)] * 4 for _ in range(4)]
            weights[key] = Fraction(0)
        grouped[key][t.alice_result.value][t.bob_result.value] += w
        weights[key] += w
    for key, matrix in grouped.items():
        total = weights[key]
        for row in matrix:
            for j in range(4):
                row[j] /= total
    return grouped


@dataclass(frozen=True)
class MonteCarloStats:
    """Empirical rates from seeded sessions, with binomial standard errors."""

    trials: int
    rounds_total: int
    detection_rate: float
    detection_std_error: float
    agreement_rate: Optional[float]
    agreement_std_error: Optional[float]
    seed: int


def _binomial_se(p: float, n: int) -> float:
    return (p * (1.0 - p) / n) ** 0.5 if n > 0 else 0.0


def _run_trial_range(
    variant: Variant,
    attack: AttackKind,
    n: int,
    trials: int,
    seed: int,
    alice_prepares_both: bool,
    compare_fraction: float,
    start: int,
    stop: int,
) -> Tuple[int, int, int]:
    """Counts (detected sessions, adversary rounds, adversary hits) over [start, stop)."""
    cfg = RoundConfig(variant=variant, alice_prepares_both=alice_prepares_both)
    compare_all = compare_fraction >= 1.0
    compare_probs = (compare_fraction, 1.0 - compare_fraction)
    # At most 9 choices per round (Pauli, flag, Eve's coin, five Bell
    # measurements, the comparison draw); one spare column of slack.
    tapes = uniform_tapes(seed, trials, 10 * n)
    detected_sessions = 0
    eve_rounds = 0
    eve_hits = 0
    for trial in range(start, stop):
        rnd = TapeSource(tapes[trial].tolist())
        session_detected = False
        for _ in range(n):
            t = run_round(cfg, make_hooks(attack, rnd), rnd)
            compared = compare_all or rnd.choose(compare_probs) == 0
            if compared and t.detected:
                session_detected = True
            if t.eve_bits is not None:
                eve_rounds += 1
                eve_hits += t.eve_bits == t.key_bits
        detected_sessions += session_detected
    return detected_sessions, eve_rounds, eve_hits


def monte_carlo(
    variant: Variant,
    attack: AttackKind,
    n: int,
    trials: int,
    seed: int,
    alice_prepares_both: bool = False,
    compare_fraction: float = 1.0,
    workers: int = 1,
) -> MonteCarloStats:
    """Run seeded sessions of n rounds and report empirical rates.

    Each trial draws from its own row of a uniform tape derived once from
    the seed (a pure function of seed and trial index), so results are
    reproducible and independent of execution order. A session counts as
    detected when any compared round shows a deduction mismatch;
    ``compare_fraction`` < 1 samples which rounds the parties compare.

    ``workers`` > 1 splits the trial range over forked processes; the
    aggregated counts are integers, so the result is bit-identical to a
    serial run.
    """
    check_compatible(variant, attack, alice_prepares_both)
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if n < 1:
        raise ValueError("n must be >= 1")
    if not 0.0 < compare_fraction <= 1.0:
        raise ValueError("compare_fraction must be in (0, 1]")
    args = (variant, attack, n, trials, seed, alice_prepares_both, compare_fraction)
    workers = max(1, min(int(workers), trials))
    if workers > 1:
        try:
            ctx = multiprocessing.get_context("fork")
        except ValueError:
            workers = 1
    if workers > 1:
        warm_correction_tables(attack)  # build lookup tables once, pre-fork
        bounds = [trials * i // workers for i in range(workers + 1)]
        with ctx.Pool(workers) as pool:
            parts = pool.starmap(
                _run_trial_range,
                [args + (bounds[i], bounds[i + 1]) for i in range(workers)],
            )
        detected_sessions = sum(p[0] for p in parts)
        eve_rounds = sum(p[1] for p in parts)
        eve_hits = sum(p[2] for p in parts)
    else:
        detected_sessions, eve_rounds, eve_hits = _run_trial_range(*args, 0, trials)
    detection = detected_sessions / trials
    agreement = eve_hits / eve_rounds if eve_rounds else None
    return MonteCarloStats(
        trials=trials,
        rounds_total=trials * n,
        detection_rate=detection,
        detection_std_error=_binomial_se(detection, trials),
        agreement_rate=agreement,
        agreement_std_error=_binomial_se(agreement, eve_rounds) if eve_rounds else None,
        seed=seed,
    )


@dataclass(frozen=True)
class DetectionReport:
    """Exact and sampled statistics for one (variant, attack, n) setting."""

    variant: Variant
    attack: AttackKind
    alice_prepares_both: bool
    n: int
    per_round_detection: Fraction
    eve_agreement: Optional[Fraction]
    detection_given_h: Optional[Fraction]
    detection_given_no_h: Optional[Fraction]
    p_detect_session: Fraction
    closed_form_reference: float
    branch_count: int
    monte_carlo: Optional[MonteCarloStats]

    @property
    def mc_within_tolerance(self) -> Optional[bool]:
        """Sampled detection within 4 standard errors of the exact value."""
        mc = self.monte_carlo
        if mc is None:
            return None
        exact = float(session_detection(self.variant, self.attack, self.n, self.alice_prepares_both))
        margin = 4.0 * mc.detection_std_error
        return abs(mc.detection_rate - exact) <= max(margin, WEIGHT_TOL)


def build_report(
    variant: Variant,
    attack: AttackKind,
    n: int,
    trials: int = 0,
    seed: int = 0,
    alice_prepares_both: bool = False,
    compare_fraction: float = 1.0,
    workers: int = 1,
) -> DetectionReport:
    """Exact statistics plus optional Monte Carlo confirmation (trials > 0)."""
    stats = exact_round_stats(variant, attack, alice_prepares_both)
    mc = None
    if trials > 0:
        mc = monte_carlo(
            variant, attack, n, trials, seed,
            alice_prepares_both=alice_prepares_both,
            compare_fraction=compare_fraction,
            workers=workers,
        )
    return DetectionReport(
        variant=variant,
        attack=attack,
        alice_prepares_both=alice_prepares_both,
        n=n,
        per_round_detection=stats.detection,
        eve_agreement=stats.eve_agreement,
        detection_given_h=stats.detection_given_h,
        detection_given_no_h=stats.detection_given_no_h,
        p_detect_session=session_detection(variant, attack, n, alice_prepares_both),
        closed_form_reference=closed_form_session_detection(variant, attack, n, alice_prepares_both),
        branch_count=stats.branch_count,
        monte_carlo=mc,
    )
