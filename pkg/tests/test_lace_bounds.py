import dataclasses
import math
from fractions import Fraction

import pytest

from bccop.bcc_rw import build_table
from bccop.diagram_bounds import (
    BootstrapConstants,
    build_diagram_set,
)
from bccop.lace_bounds import (
    pi01_m,
    pi01_mcos,
    pi01_mt,
    pi2_m,
    pi2_mcos,
    pi2_mt,
    piN_m,
    piN_mcos,
    piN_mt,
    totals,
)
from bccop.policy import Policy

PAPER_K = BootstrapConstants(1.0020, 1.0500, 1.2500)

INF = float("inf")


@pytest.fixture(scope="module")
def walk9():
    return build_table(9)


@pytest.fixture(scope="module")
def diagrams9(walk9):
    return build_diagram_set(PAPER_K, walk9)


@pytest.fixture(scope="module")
def report9(diagrams9):
    return totals(diagrams9)


def zero_diagrams():
    base = build_diagram_set(BootstrapConstants(1.0, 1.0, 1.0), build_table(9))
    return dataclasses.replace(
        base,
        bubble={k: 0.0 for k in base.bubble},
        triangle={k: 0.0 for k in base.triangle},
        wbubble={k: 0.0 for k in base.wbubble},
    )


def oracle_values(walk):
    """Independent closed-form arithmetic for the d=9 endgame factors."""
    k1, k2, k3 = 1.0020, 1.0500, 1.2500

    def bubble(l, r):
        return k1 ** (l + r) * k2 ** 2 * walk.eps1[(l + r) // 2]

    def triangle(l, r):
        return math.sqrt(2) * k1 ** (l + r) * k2 ** 3 * walk.eps2[(l + r) // 2]

    return bubble, triangle


def test_pi01_m_five_term_oracle(walk9, diagrams9):
    bubble, triangle = oracle_values(walk9)
    oracle = (
        0.5 * bubble(2, 2)
        + bubble(2, 2) * bubble(0, 2)
        + 1.5 * bubble(2, 2) * bubble(1, 3)
        + 3.0 * bubble(2, 2) ** 2
        + 3.0 * bubble(2, 1) * triangle(2, 2)
    )
    value = pi01_m(diagrams9)
    assert value == pytest.approx(oracle, rel=1e-12)
    assert value == pytest.approx(1.09688e-4, rel=1e-4)
    # dominated by the published rounded head value
    assert value <= 1.15844e-4


def test_pi2_m_seven_term_oracle(walk9, diagrams9):
    bubble, triangle = oracle_values(walk9)
    oracle = (
        bubble(2, 2) * bubble(1, 3)
        + 2.0 * bubble(2, 2) ** 2
        + 2.0 * bubble(2, 1) * triangle(2, 2)
        + 0.5 * bubble(2, 2) * bubble(1, 3) * triangle(1, 2)
        + bubble(2, 1) * triangle(1, 1) * triangle(1, 2)
        + 0.5 * bubble(2, 2) * bubble(1, 3) * triangle(2, 1)
        + bubble(2, 1) * triangle(1, 1) * triangle(2, 1)
    )
    value = pi2_m(diagrams9)
    assert value == pytest.approx(oracle, rel=1e-12)
    assert value == pytest.approx(2.3e-6, rel=5e-3)


def test_zero_inputs_give_zero():
    zeros = zero_diagrams()
    assert pi01_m(zeros) == 0.0
    assert pi2_m(zeros) == 0.0
    assert pi01_mt(zeros) == 0.0
    assert pi2_mt(zeros) == 0.0
    assert pi01_mcos(zeros) == 0.0
    assert pi2_mcos(zeros) == 0.0
    for n in (3, 4, 9):
        assert piN_m(n, zeros) == 0.0
        assert piN_mt(n, zeros) == 0.0
        assert piN_mcos(n, zeros) == 0.0
    report = totals(zeros)
    assert not report.divergent
    assert (report.pi_even, report.pi_odd, report.pi_t, report.pi_cos) == (0, 0, 0, 0)


def test_order_n_rejects_small_n(diagrams9):
    for fn in (piN_m, piN_mt, piN_mcos):
        with pytest.raises(ValueError):
            fn(2, diagrams9)


def exact_prefactors(diagrams):
    """Exact-rational order-N prefactors and ratio from the float bound values."""
    from bccop.diagram_bounds import factor_values

    values = {k: Fraction(v) for k, v in factor_values(diagrams).items()}
    t = values["T11"]
    x = 2 * t
    pref_m = values["B11"] + Fraction(1, 2) * values["B22"] * values["B13"] \
        + values["T11"] * values["B11"]
    pref_a = t + values["B22"] * values["B13"] \
        + Fraction(1, 2) * values["B22"] * values["T31"] + 2 * t * t
    pref_b = t + Fraction(1, 2) * values["B22"] * values["T13"] + t * t
    pref_c = values["V11"] + Fraction(1, 2) * values["B22"] * values["V13"] \
        + 2 * t * values["V11"]
    return values, t, x, pref_m, pref_a, pref_b, pref_c


def test_series_consistency_plain_family(diagrams9):
    # Exact-rational oracle: partial sums of the order-N bounds sit below the
    # closed-form tails with only the (negligible) geometric remainder as gap.
    _, _, x, pref_m, *_ = exact_prefactors(diagrams9)
    even_closed = pref_m * x ** 3 / (1 - x ** 2)
    odd_closed = pref_m * x ** 2 / (1 - x ** 2)
    even_sum = sum(pref_m * x ** (n - 1) for n in range(4, 201, 2))
    odd_sum = sum(pref_m * x ** (n - 1) for n in range(3, 201, 2))
    for partial, closed in ((even_sum, even_closed), (odd_sum, odd_closed)):
        assert partial <= closed
        assert (closed - partial) / closed < 1e-15
    # the float evaluator agrees with the exact oracle
    for n in (3, 4, 10):
        assert piN_m(n, diagrams9) == pytest.approx(float(pref_m * x ** (n - 1)), rel=1e-12)


def test_series_consistency_weighted_families(diagrams9, report9):
    values, t, x, _, pref_a, pref_b, pref_c = exact_prefactors(diagrams9)
    t_closed = pref_a * x ** 2 / (1 - x) + pref_b * x / (1 - x) ** 2 \
        + pref_b * x ** 2 / (1 - x)
    v11 = values["V11"]
    cos_closed = (
        pref_c * 8 * t ** 2 * (2 - 3 * t) / (1 - x) ** 2
        + 2 * pref_b * v11 * 8 * t * (1 - t) / (1 - x) ** 3
        + 2 * pref_b * v11 * 4 * t * (2 - 3 * t) / (1 - x) ** 2
    )
    t_sum = sum(
        pref_a * x ** (n - 1) + (n - 2) * pref_b * x ** (n - 2) + pref_b * x ** (n - 1)
        for n in range(3, 201)
    )
    cos_sum = sum(
        (n + 1) * (
            pref_c * x ** (n - 1)
            + 2 * (n - 2) * pref_b * v11 * x ** (n - 2)
            + 2 * pref_b * v11 * x ** (n - 2)
        )
        for n in range(3, 201)
    )
    for partial, closed in ((t_sum, t_closed), (cos_sum, cos_closed)):
        assert partial <= closed
        assert (closed - partial) / closed < 1e-15
    # float evaluator agreement, and the report totals use the same tails
    assert piN_mt(3, diagrams9) == pytest.approx(
        float(pref_a * x ** 2 + pref_b * x + pref_b * x ** 2), rel=1e-12
    )
    assert piN_mcos(3, diagrams9) == pytest.approx(
        float(4 * (pref_c * x ** 2 + 2 * pref_b * v11 * x + 2 * pref_b * v11 * x)),
        rel=1e-12,
    )
    assert report9.pi_t - pi01_mt(diagrams9) - pi2_mt(diagrams9) == pytest.approx(
        float(t_closed), rel=1e-12
    )
    assert report9.pi_cos - pi01_mcos(diagrams9) - pi2_mcos(diagrams9) == pytest.approx(
        float(cos_closed), rel=1e-12
    )


def test_piN_mt_ratio_tracks_series_ratio(diagrams9, report9):
    # The (N-2)-weighted middle term dominates, so consecutive orders scale by
    # twice the series ratio: piN(4)/piN(3) ~ 2 * (2 T(1,1)).
    ratio = piN_mt(4, diagrams9) / piN_mt(3, diagrams9)
    assert abs(ratio / (2 * report9.small_t) - 1.0) < 0.35


def test_cos_leading_term(diagrams9):
    half_v22 = 0.5 * diagrams9.wbubble[(2, 2)]
    assert half_v22 == pytest.approx(1.9614e-2, rel=1e-4)
    assert pi01_mcos(diagrams9) >= half_v22


def test_geometric_factor_example(report9):
    t = 3.96190e-3
    x = 2 * t
    assert x ** 3 / (1 - x ** 2) == pytest.approx(4.975e-7, rel=1e-3)
    assert report9.small_t == pytest.approx(2 * 3.96190e-3, rel=1e-5)
    assert report9.small_t < 1


def test_totals_dominated_by_published_values(report9):
    assert report9.pi_even <= 1.00000e-5
    assert report9.pi_odd <= 1.15844e-4
    assert report9.pi_t <= 4.00000e-4
    assert report9.pi_cos <= 2.10000e-2
    assert not report9.divergent


def test_totals_monotone_in_every_input(walk9, diagrams9, report9):
    base = (report9.pi_even, report9.pi_odd, report9.pi_t, report9.pi_cos)
    for family in ("bubble", "triangle", "wbubble"):
        store = getattr(diagrams9, family)
        for idx in store:
            bumped_store = dict(store)
            bumped_store[idx] = store[idx] * 1.01
            bumped = dataclasses.replace(diagrams9, **{family: bumped_store})
            rep = totals(bumped, with_terms=False)
            new = (rep.pi_even, rep.pi_odd, rep.pi_t, rep.pi_cos)
            assert all(n >= b for n, b in zip(new, base)), (family, idx)


def test_divergent_report_below_five_dimensions():
    report = totals(build_diagram_set(PAPER_K, build_table(4)))
    assert report.divergent
    assert report.pi_even == INF and report.pi_cos == INF
    assert "triangle" in report.divergence_reason
    report2 = totals(build_diagram_set(PAPER_K, build_table(2)))
    assert report2.divergent
    assert "bubble" in report2.divergence_reason


def test_divergent_when_ratio_reaches_one(diagrams9):
    fat = dataclasses.replace(
        diagrams9, triangle={k: (0.51 if k == (1, 1) else v)
                             for k, v in diagrams9.triangle.items()}
    )
    report = totals(fat)
    assert report.divergent
    assert "ratio" in report.divergence_reason


def test_breakdown_terms_recorded(report9):
    payload = report9.to_json_dict()
    equations = {t["equation"] for t in payload["terms"]}
    assert {"m01", "m2", "mt01", "mt2", "mcos01", "mcos2"} <= equations
    assert {"even_tail", "odd_tail", "cos_tail_b"} <= equations
    m01 = [t for t in payload["terms"] if t["equation"] == "m01"]
    assert len(m01) == 5
    assert m01[0]["coefficient"] == 0.5 and m01[0]["factors"] == ["B22"]


def test_certified_totals_dominate_fast(walk9, report9):
    cert_walk = build_table(9, policy=Policy.CERTIFIED)
    cert = totals(build_diagram_set(PAPER_K, cert_walk), with_terms=False)
    assert cert.pi_even >= report9.pi_even
    assert cert.pi_odd >= report9.pi_odd
    assert cert.pi_t >= report9.pi_t
    assert cert.pi_cos >= report9.pi_cos
    assert cert.pi_cos <= report9.pi_cos * (1 + 1e-9)
