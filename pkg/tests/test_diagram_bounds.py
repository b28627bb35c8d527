import math

import pytest

from bccop.bcc_rw import build_table
from bccop.diagram_bounds import (
    BootstrapConstants,
    WBUBBLE_INDICES,
    build_diagram_set,
    bubble_bound,
    factor_values,
    triangle_bound,
    weighted_bubble_bound,
)
PAPER_K = BootstrapConstants(1.0020, 1.0500, 1.2500)
UNIT_K = BootstrapConstants(1.0, 1.0, 1.0)


@pytest.fixture(scope="module")
def walk9():
    return build_table(9)


@pytest.fixture(scope="module")
def walk10():
    return build_table(10)


# Reference endgame values at d = 9 with K = (1.0020, 1.0500, 1.2500),
# matched to 6 significant digits.
GOLDEN = {
    ("B", 2, 2): 2.11688e-4,
    ("B", 0, 2): 2.37279e-3,
    ("T", 2, 2): 4.40247e-4,
    ("T", 1, 1): 3.96190e-3,
    ("V", 2, 2): 3.92276e-2,
}


def test_golden_values(walk9):
    assert bubble_bound(2, 2, PAPER_K, walk9) == pytest.approx(GOLDEN[("B", 2, 2)], rel=5e-6)
    assert bubble_bound(0, 2, PAPER_K, walk9) == pytest.approx(GOLDEN[("B", 0, 2)], rel=5e-6)
    assert triangle_bound(2, 2, PAPER_K, walk9) == pytest.approx(GOLDEN[("T", 2, 2)], rel=5e-6)
    assert triangle_bound(1, 1, PAPER_K, walk9) == pytest.approx(GOLDEN[("T", 1, 1)], rel=5e-6)
    assert weighted_bubble_bound(2, 2, PAPER_K, walk9) == pytest.approx(
        GOLDEN[("V", 2, 2)], rel=5e-6
    )


def test_triangle_12_derived_oracle(walk9):
    # oracle: sqrt(2) * K1^3 * K2^3 * eps2(1), composed by direct arithmetic
    oracle = math.sqrt(2) * 1.0020 ** 3 * 1.0500 ** 3 * 2.410377e-3
    assert triangle_bound(1, 2, PAPER_K, walk9) == pytest.approx(oracle, rel=1e-5)
    assert oracle == pytest.approx(3.96982e-3, rel=1e-5)


def test_weighted_bubble_21_derived_oracle(walk9):
    # oracle: 2*K1^3*K2^2*eps1(1) + 2*K1^2*K2*K3*(sqrt(2)+4)*eps2(1)
    oracle = (
        2 * 1.0020 ** 3 * 1.0500 ** 2 * walk9.eps1[1]
        + 2 * 1.0020 ** 2 * 1.0500 * 1.2500 * (math.sqrt(2) + 4) * walk9.eps2[1]
    )
    assert weighted_bubble_bound(2, 1, PAPER_K, walk9) == pytest.approx(oracle, rel=1e-12)
    assert oracle == pytest.approx(3.91502e-2, rel=1e-4)


def test_weighted_bubble_11_composition(walk9):
    # lam = rho = 1 composes the walk peak, sqrt(eps1(2)) and the (2,1) bound
    expected = (
        1.0020 ** 2 * 2.0 ** -9
        + 1.0020 ** 3 * 1.0500 * math.sqrt(walk9.eps1[2])
        + weighted_bubble_bound(2, 1, PAPER_K, walk9)
    )
    assert weighted_bubble_bound(1, 1, PAPER_K, walk9) == pytest.approx(expected, rel=1e-12)


def test_unit_constants_reduce_to_walk_quantities(walk9):
    assert bubble_bound(1, 1, UNIT_K, walk9) == pytest.approx(walk9.eps1[1], rel=1e-14)
    assert triangle_bound(1, 1, UNIT_K, walk9) == pytest.approx(
        math.sqrt(2) * walk9.eps2[1], rel=1e-14
    )


def test_bounds_depend_only_on_index_sum(walk9):
    quad = [(1, 3), (2, 2), (3, 1)]
    bubbles = {bubble_bound(l, r, PAPER_K, walk9) for l, r in quad}
    triangles = {triangle_bound(l, r, PAPER_K, walk9) for l, r in quad}
    assert len(bubbles) == 1
    assert len(triangles) == 1


def test_strictly_increasing_in_constants(walk9):
    bumps = {
        "K1": BootstrapConstants(1.01, 1.05, 1.25),
        "K2": BootstrapConstants(1.002, 1.06, 1.25),
        "K3": BootstrapConstants(1.002, 1.05, 1.26),
    }
    base_b = bubble_bound(2, 2, PAPER_K, walk9)
    base_t = triangle_bound(2, 2, PAPER_K, walk9)
    base_v = weighted_bubble_bound(2, 2, PAPER_K, walk9)
    base_v11 = weighted_bubble_bound(1, 1, PAPER_K, walk9)
    assert bubble_bound(2, 2, bumps["K1"], walk9) > base_b
    assert bubble_bound(2, 2, bumps["K2"], walk9) > base_b
    assert triangle_bound(2, 2, bumps["K1"], walk9) > base_t
    assert triangle_bound(2, 2, bumps["K2"], walk9) > base_t
    for name in ("K1", "K2", "K3"):
        assert weighted_bubble_bound(2, 2, bumps[name], walk9) > base_v
        assert weighted_bubble_bound(1, 1, bumps[name], walk9) > base_v11


def test_monotone_in_dimension(walk9, walk10):
    set9 = build_diagram_set(PAPER_K, walk9)
    set10 = build_diagram_set(PAPER_K, walk10)
    for idx in set9.bubble:
        assert set10.bubble[idx] <= set9.bubble[idx]
    for idx in set9.triangle:
        assert set10.triangle[idx] <= set9.triangle[idx]
    for idx in set9.wbubble:
        assert set10.wbubble[idx] <= set9.wbubble[idx]


def test_infinity_propagates_below_five_dimensions():
    walk4 = build_table(4)
    assert triangle_bound(1, 1, PAPER_K, walk4) == float("inf")
    assert weighted_bubble_bound(2, 2, PAPER_K, walk4) == float("inf")
    # the bubble only needs eps1, finite from d = 3 on
    assert bubble_bound(1, 1, PAPER_K, walk4) < float("inf")


def test_invalid_indices_rejected(walk9):
    with pytest.raises(ValueError):
        bubble_bound(1, 0, PAPER_K, walk9)
    with pytest.raises(ValueError):
        weighted_bubble_bound(0, 2, PAPER_K, walk9)


def test_constants_validation():
    with pytest.raises(ValueError):
        BootstrapConstants(0.99, 1.05, 1.25)


def test_factor_values_cover_chain_symbols(walk9):
    values = factor_values(build_diagram_set(PAPER_K, walk9))
    needed = {
        "B11", "B02", "B12", "B21", "B22", "B13",
        "T11", "T02", "T12", "T21", "T22", "T13", "T31",
        "V11", "V12", "V21", "V22", "V31", "V13", "MT12",
    }
    assert needed <= set(values)
    assert values["MT12"] == pytest.approx(1.0020 * values["T12"], rel=1e-14)
    assert all(v > 0 for v in values.values())


def test_all_wbubble_indices_finite_at_d9(walk9):
    diagrams = build_diagram_set(PAPER_K, walk9)
    assert set(WBUBBLE_INDICES) == set(diagrams.wbubble)
    assert all(v < float("inf") for v in diagrams.wbubble.values())


def test_json_dict_serialization(walk9):
    payload = build_diagram_set(PAPER_K, walk9).to_json_dict()
    assert payload["d"] == 9
    assert payload["policy"] == "fast"
    assert payload["B_2_2"] == pytest.approx(2.11688e-4, rel=5e-6)
    walk4 = build_table(4)
    payload4 = build_diagram_set(PAPER_K, walk4).to_json_dict()
    assert payload4["T_1_1"] == "inf"


def test_overflow_degrades_to_infinity(walk9):
    huge = BootstrapConstants(1e308, 1.05, 1.25)
    assert bubble_bound(2, 2, huge, walk9) == float("inf")
