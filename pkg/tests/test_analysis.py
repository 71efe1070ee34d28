from fractions import Fraction

import pytest

from swapqkd.adversary import AttackKind
from swapqkd.analysis import (
    build_report,
    check_compatible,
    closed_form_session_detection,
    correlation_table,
    enumerate_round_branches,
    exact_round_stats,
    monte_carlo,
    session_detection,
)
from swapqkd.protocol import Variant
from swapqkd.qkernel import BellOutcome, PauliOp

ORIG, MOD = Variant.ORIGINAL, Variant.MODIFIED


# ---------------------------------------------------------------------------
# exact statistics


EXPECTED = {
    (ORIG, AttackKind.NONE, False): (Fraction(0), None),
    (MOD, AttackKind.NONE, False): (Fraction(0), None),
    (ORIG, AttackKind.DELTA_SWAP, False): (Fraction(0), Fraction(1)),
    (MOD, AttackKind.DELTA_SWAP, False): (Fraction(1, 4), Fraction(1, 2)),
    (MOD, AttackKind.DELTA_SWAP_H_PRE, False): (Fraction(1, 4), Fraction(1, 2)),
    (MOD, AttackKind.DELTA_SWAP_RANDOM_H, False): (Fraction(1, 4), Fraction(1, 2)),
    (MOD, AttackKind.DELAYED_MEASUREMENT, False): (Fraction(3, 4), Fraction(1)),
    (ORIG, AttackKind.INTERCEPT_RESEND, True): (Fraction(0), Fraction(1)),
    # the hardening also fixes the prepare-both layout: regression value
    (MOD, AttackKind.INTERCEPT_RESEND, True): (Fraction(1, 4), Fraction(1, 2)),
    (ORIG, AttackKind.SOURCE_CONTROL, False): (Fraction(0), Fraction(1)),
    (MOD, AttackKind.SOURCE_CONTROL, False): (Fraction(1, 4), Fraction(1, 2)),
}


@pytest.mark.parametrize("variant,attack,both", sorted(EXPECTED, key=str))
def test_exact_round_stats(variant, attack, both):
    detection, agreement = EXPECTED[(variant, attack, both)]
    stats = exact_round_stats(variant, attack, both)
    assert stats.detection == detection
    assert stats.eve_agreement == agreement


def test_modified_conditional_detection():
    s = exact_round_stats(MOD, AttackKind.DELTA_SWAP)
    assert s.detection_given_h == Fraction(1, 2)
    assert s.detection_given_no_h == 0

    s = exact_round_stats(MOD, AttackKind.DELTA_SWAP_H_PRE)
    assert s.detection_given_h == 0
    assert s.detection_given_no_h == Fraction(1, 2)

    s = exact_round_stats(MOD, AttackKind.DELTA_SWAP_RANDOM_H)
    assert s.detection_given_h == s.detection_given_no_h == Fraction(1, 4)

    s = exact_round_stats(MOD, AttackKind.DELAYED_MEASUREMENT)
    assert s.detection_given_h == s.detection_given_no_h == Fraction(3, 4)


def test_h_precompensation_leaks_fully_under_the_flag():
    leaves = enumerate_round_branches(MOD, AttackKind.DELTA_SWAP_H_PRE)
    flagged = [(w, t) for w, t in leaves if t.hadamard_flag]
    total = sum(w for w, _ in flagged)
    assert sum(w for w, t in flagged if t.eve_bits == t.key_bits) == total
    assert sum(w for w, t in flagged if t.detected) == 0


def test_branch_weights_sum_to_one():
    for variant, attack, both in EXPECTED:
        leaves = enumerate_round_branches(variant, attack, both)
        assert sum(w for w, _ in leaves) == 1


# ---------------------------------------------------------------------------
# sessions and closed forms


def test_session_detection_values():
    assert session_detection(MOD, AttackKind.DELTA_SWAP, 4) == Fraction(175, 256)
    assert float(session_detection(MOD, AttackKind.DELTA_SWAP, 4)) == 0.68359375
    assert float(session_detection(MOD, AttackKind.DELAYED_MEASUREMENT, 4)) == 0.99609375


def test_session_detection_base_case_and_monotonicity():
    for attack in (AttackKind.DELTA_SWAP, AttackKind.DELAYED_MEASUREMENT):
        per_round = exact_round_stats(MOD, attack).detection
        assert session_detection(MOD, attack, 1) == per_round
        previous = Fraction(0)
        for n in range(1, 12):
            current = session_detection(MOD, attack, n)
            assert current >= previous
            previous = current
    with pytest.raises(ValueError):
        session_detection(MOD, AttackKind.DELTA_SWAP, 0)


def test_closed_forms_match_enumeration():
    for attack, base in [
        (AttackKind.DELTA_SWAP, 0.75),
        (AttackKind.DELTA_SWAP_H_PRE, 0.75),
        (AttackKind.DELTA_SWAP_RANDOM_H, 0.75),
        (AttackKind.SOURCE_CONTROL, 0.75),
        (AttackKind.DELAYED_MEASUREMENT, 0.25),
    ]:
        for n in range(1, 33):
            closed = closed_form_session_detection(MOD, attack, n)
            assert closed == pytest.approx(1.0 - base**n, abs=1e-15)
            assert abs(float(session_detection(MOD, attack, n)) - closed) <= 1e-12


# ---------------------------------------------------------------------------
# compatibility


def test_incompatible_pairings_raise():
    with pytest.raises(ValueError):
        check_compatible(ORIG, AttackKind.INTERCEPT_RESEND, False)
    with pytest.raises(ValueError):
        check_compatible(ORIG, AttackKind.DELTA_SWAP, True)
    with pytest.raises(ValueError):
        check_compatible(ORIG, AttackKind.DELAYED_MEASUREMENT, False)
    with pytest.raises(ValueError):
        exact_round_stats(ORIG, AttackKind.DELAYED_MEASUREMENT)
    with pytest.raises(ValueError):
        monte_carlo(ORIG, AttackKind.INTERCEPT_RESEND, 1, 10, seed=0)
    check_compatible(MOD, AttackKind.DELAYED_MEASUREMENT, False)
    check_compatible(ORIG, AttackKind.NONE, True)


# ---------------------------------------------------------------------------
# Monte Carlo


def test_monte_carlo_is_deterministic_given_seed():
    a = monte_carlo(MOD, AttackKind.DELTA_SWAP, 2, 500, seed=42)
    b = monte_carlo(MOD, AttackKind.DELTA_SWAP, 2, 500, seed=42)
    c = monte_carlo(MOD, AttackKind.DELTA_SWAP, 2, 500, seed=43)
    assert a == b
    assert a != c


def test_monte_carlo_zero_variance_events():
    mc = monte_carlo(ORIG, AttackKind.DELTA_SWAP, 1, 2000, seed=7)
    assert mc.detection_rate == 0.0
    assert mc.agreement_rate == 1.0


def test_monte_carlo_matches_exact_within_four_sigma():
    mc = monte_carlo(MOD, AttackKind.DELTA_SWAP, 1, 20000, seed=11)
    assert abs(mc.detection_rate - 0.25) <= 4 * mc.detection_std_error


def test_monte_carlo_workers_do_not_change_results():
    serial = monte_carlo(MOD, AttackKind.DELTA_SWAP, 1, 2000, seed=5, workers=1)
    parallel = monte_carlo(MOD, AttackKind.DELTA_SWAP, 1, 2000, seed=5, workers=2)
    assert serial == parallel


def test_monte_carlo_compare_fraction_scales_detection():
    mc = monte_carlo(MOD, AttackKind.DELTA_SWAP, 1, 20000, seed=3, compare_fraction=0.5)
    # with one round and half the rounds compared, detection halves to 1/8
    assert abs(mc.detection_rate - 0.125) <= 4 * mc.detection_std_error


def test_monte_carlo_argument_validation():
    with pytest.raises(ValueError):
        monte_carlo(MOD, AttackKind.DELTA_SWAP, 0, 10, seed=0)
    with pytest.raises(ValueError):
        monte_carlo(MOD, AttackKind.DELTA_SWAP, 1, 0, seed=0)
    with pytest.raises(ValueError):
        monte_carlo(MOD, AttackKind.DELTA_SWAP, 1, 10, seed=0, compare_fraction=0.0)


# ---------------------------------------------------------------------------
# correlation tables and reports


def test_honest_identity_table_is_diagonal():
    tables = correlation_table(ORIG, AttackKind.NONE)
    joint = tables[(PauliOp.I, None)]
    for a in BellOutcome:
        for b in BellOutcome:
            want = Fraction(1, 4) if a is b else 0
            assert joint[a.value][b.value] == want


def test_delayed_measurement_table_is_flat():
    tables = correlation_table(MOD, AttackKind.DELAYED_MEASUREMENT)
    for joint in tables.values():
        assert all(cell == Fraction(1, 16) for row in joint for cell in row)


def test_interception_preserves_correlations_against_original():
    honest = correlation_table(ORIG, AttackKind.NONE)
    attacked = correlation_table(ORIG, AttackKind.DELTA_SWAP)
    assert honest[(PauliOp.X, None)] == attacked[(PauliOp.X, None)]
    assert honest == attacked


def test_build_report_shapes():
    report = build_report(MOD, AttackKind.DELTA_SWAP, n=8)
    assert report.monte_carlo is None
    assert report.mc_within_tolerance is None
    assert report.per_round_detection == Fraction(1, 4)
    assert float(report.p_detect_session) == pytest.approx(1 - 0.75**8, abs=1e-12)
    assert report.closed_form_reference == pytest.approx(1 - 0.75**8, abs=1e-12)

    report = build_report(MOD, AttackKind.DELTA_SWAP, n=1, trials=4000, seed=2)
    assert report.monte_carlo is not None
    assert report.mc_within_tolerance is True
