"""Per-coefficient bounds on the expansion coefficients and their series totals.

The alternating-series coefficients of the two-point-function expansion are
bounded by polynomials in the basic diagram bounds.  Three weighted families
are needed: plain (weight m^t), time-weighted (m^t * t) and cosine-weighted
(m^t * (1 - cos k.x), always divided through by 1 - Dhat(k) so the weighted
bubbles enter as their sup-norm bounds).

Every polynomial lives here as a data table of (coefficient, factor symbols),
so each formula can be audited term by term; ``B{l}{r}``/``T{l}{r}``/``V{l}{r}``
name the bubble, triangle and weighted-bubble bounds and ``MT12`` the
m-carrying triangle (one extra K1).  The order >= 3 coefficients share
geometric prefactors in the ratio x = 2 * T(1,1), and their sums collapse to
closed forms (valid for x < 1; otherwise the report is DIVERGENT):

    sum_{N>=3, N even} x^(N-1)          = x^3 / (1 - x^2)
    sum_{N>=3, N odd}  x^(N-1)          = x^2 / (1 - x^2)
    sum_{N>=3} x^(N-1)                  = x^2 / (1 - x)
    sum_{N>=3} (N-2) x^(N-2)            = x / (1 - x)^2
    sum_{N>=3} (N+1) x^(N-1)            = 8 t^2 (2 - 3t) / (1 - x)^2
    sum_{N>=3} (N+1)(N-2) x^(N-2)       = 8 t (1 - t) / (1 - x)^3
    sum_{N>=3} (N+1) x^(N-2)            = 4 t (2 - 3t) / (1 - x)^2
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .diagram_bounds import BootstrapConstants, DiagramBoundSet, factor_values
from .policy import DirectedOps, Policy, ops_for

__all__ = [
    "LaceBoundReport",
    "pi01_m",
    "pi2_m",
    "piN_m",
    "pi01_mt",
    "pi2_mt",
    "piN_mt",
    "pi01_mcos",
    "pi2_mcos",
    "piN_mcos",
    "totals",
]

_INF = float("inf")

Term = tuple[float, tuple[str, ...]]

# Plain m^t weight: head coefficients of the alternating series.
TERMS_M01: tuple[Term, ...] = (
    (0.5, ("B22",)),
    (1.0, ("B22", "B02")),
    (1.5, ("B22", "B13")),
    (3.0, ("B22", "B22")),
    (3.0, ("B21", "T22")),
)
TERMS_M2: tuple[Term, ...] = (
    (1.0, ("B22", "B13")),
    (2.0, ("B22", "B22")),
    (2.0, ("B21", "T22")),
    (0.5, ("B22", "B13", "T12")),
    (1.0, ("B21", "T11", "T12")),
    (0.5, ("B22", "B13", "T21")),
    (1.0, ("B21", "T11", "T21")),
)
# Prefactor of the order-N coefficients (times x^(N-1)).
TERMS_PREF_M: tuple[Term, ...] = (
    (1.0, ("B11",)),
    (0.5, ("B22", "B13")),
    (1.0, ("T11", "B11")),
)

# m^t * t weight.
TERMS_MT01: tuple[Term, ...] = (
    (0.5, ("B22",)),
    (0.5, ("T22",)),
    (1.0, ("B22", "B02")),
    (1.0, ("B22", "T02")),
    (3.0, ("B22", "B13")),
    (1.5, ("B22", "T13")),
    (6.0, ("B22", "B22")),
    (6.0, ("B22", "T22")),
    (3.0, ("MT12", "T22")),
    (3.0, ("B12", "T22")),
    (3.0, ("T22", "T21")),
)
TERMS_MT2: tuple[Term, ...] = (
    (2.0, ("B22", "B13")),
    (1.0, ("B22", "T13")),
    (4.0, ("B22", "B22")),
    (4.0, ("B22", "T22")),
    (2.0, ("MT12", "T22")),
    (2.0, ("B12", "T22")),
    (2.0, ("T22", "T21")),
    (1.5, ("B22", "B13", "T12")),
    (1.0, ("B22", "T13", "T12")),
    (3.0, ("T12", "T11", "T21")),
    (1.0, ("B12", "T11", "T21")),
    (1.0, ("B22", "B13", "T21")),
    (1.0, ("B22", "T13", "T21")),
    (3.0, ("T21", "T11", "T21")),
)
# Order-N prefactors: A multiplies x^(N-1), B multiplies both the (N-2)-weighted
# x^(N-2) middle term and a trailing x^(N-1) term.
TERMS_PREF_MT_A: tuple[Term, ...] = (
    (1.0, ("T11",)),
    (1.0, ("B22", "B13")),
    (0.5, ("B22", "T31")),
    (2.0, ("T11", "T11")),
)
TERMS_PREF_MT_B: tuple[Term, ...] = (
    (1.0, ("T11",)),
    (0.5, ("B22", "T13")),
    (1.0, ("T11", "T11")),
)

# m^t * (1 - cos k.x) weight, divided through by 1 - Dhat(k); exactly one
# weighted-bubble factor per term carries the cosine weight.
TERMS_MCOS01: tuple[Term, ...] = (
    (0.5, ("V22",)),
    (2.0, ("V22", "B02")),
    (2.0, ("B22", "V12")),
    (1.5, ("B22", "V31")),
    (12.0, ("B22", "V22")),
    (6.0, ("V12", "T22")),
    (6.0, ("T22", "V21")),
)
TERMS_MCOS2: tuple[Term, ...] = (
    (1.0, ("B22", "V31")),
    (8.0, ("B22", "V22")),
    (4.0, ("V12", "T22")),
    (4.0, ("T22", "V21")),
    (1.0, ("B22", "V31", "T21")),
    (1.0, ("B22", "T31", "V21")),
    (3.0, ("V12", "T11", "T21")),
    (3.0, ("T12", "V11", "T21")),
    (3.0, ("T12", "T11", "V21")),
    (1.0, ("B22", "V31", "T12")),
    (1.0, ("B22", "T31", "V12")),
    (3.0, ("V12", "T11", "T12")),
    (3.0, ("T12", "V11", "T12")),
    (3.0, ("T12", "T11", "V12")),
)
TERMS_PREF_MCOS_C: tuple[Term, ...] = (
    (1.0, ("V11",)),
    (0.5, ("B22", "V13")),
    (2.0, ("T11", "V11")),
)

EQUATIONS: dict[str, tuple[Term, ...]] = {
    "m01": TERMS_M01,
    "m2": TERMS_M2,
    "pref_m": TERMS_PREF_M,
    "mt01": TERMS_MT01,
    "mt2": TERMS_MT2,
    "pref_mt_a": TERMS_PREF_MT_A,
    "pref_mt_b": TERMS_PREF_MT_B,
    "mcos01": TERMS_MCOS01,
    "mcos2": TERMS_MCOS2,
    "pref_mcos_c": TERMS_PREF_MCOS_C,
}


def _eval_terms(ops: DirectedOps, terms: tuple[Term, ...], values, breakdown=None, eq_id=""):
    total = 0.0
    for index, (coeff, factors) in enumerate(terms):
        term = coeff
        for name in factors:
            term = ops.mul_up(term, values[name])
        total = ops.add_up(total, term)
        if breakdown is not None:
            breakdown.append(
                {
                    "equation": eq_id,
                    "term": index,
                    "coefficient": coeff,
                    "factors": list(factors),
                    "value": float(term),
                }
            )
    return total


def _series_factors(ops: DirectedOps, t):
    """Closed-form tail factors in the ratio x = 2t; +inf wherever x >= 1."""
    t = np.asarray(t, dtype=float)  # scalar zero denominators become inf, not errors
    x = ops.mul_up(2.0, t)
    converged = x < 1.0
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        one_minus_x = ops.one_minus_dn(x)
        one_minus_x2 = ops.one_minus_dn(ops.powi_up(x, 2))
        two_minus_3t = ops.sub_up(2.0, ops.mul_dn(3.0, t))
        one_minus_t = ops.sub_up(1.0, t)
        factors = {
            "even_tail": ops.div_up(ops.powi_up(x, 3), one_minus_x2),
            "odd_tail": ops.div_up(ops.powi_up(x, 2), one_minus_x2),
            "t_tail_a": ops.div_up(ops.powi_up(x, 2), one_minus_x),
            "t_tail_b": ops.div_up(x, ops.powi_dn(one_minus_x, 2)),
            "cos_tail_a": ops.div_up(
                ops.mul_up(ops.mul_up(8.0, ops.powi_up(t, 2)), two_minus_3t),
                ops.powi_dn(one_minus_x, 2),
            ),
            "cos_tail_b": ops.div_up(
                ops.mul_up(ops.mul_up(8.0, t), one_minus_t),
                ops.powi_dn(one_minus_x, 3),
            ),
            "cos_tail_c": ops.div_up(
                ops.mul_up(ops.mul_up(4.0, t), two_minus_3t),
                ops.powi_dn(one_minus_x, 2),
            ),
        }
        factors = {name: np.where(converged, value, _INF) for name, value in factors.items()}
    return factors, converged


def _totals_from_values(ops: DirectedOps, values, breakdown=None):
    """Chain the head polynomials and closed-form tails; array-friendly."""
    tails, converged = _series_factors(ops, values["T11"])

    def head(eq_id):
        return _eval_terms(ops, EQUATIONS[eq_id], values, breakdown, eq_id)

    pref_m = head("pref_m")
    pref_a = head("pref_mt_a")
    pref_b = head("pref_mt_b")
    pref_c = head("pref_mcos_c")
    pi_even = ops.add_up(head("m2"), ops.mul_up(pref_m, tails["even_tail"]))
    pi_odd = ops.add_up(head("m01"), ops.mul_up(pref_m, tails["odd_tail"]))
    pi_t = ops.add_up(head("mt01"), head("mt2"))
    pi_t = ops.add_up(pi_t, ops.mul_up(pref_a, tails["t_tail_a"]))
    pi_t = ops.add_up(pi_t, ops.mul_up(pref_b, tails["t_tail_b"]))
    pi_t = ops.add_up(pi_t, ops.mul_up(pref_b, tails["t_tail_a"]))
    b_v11 = ops.mul_up(ops.mul_up(2.0, pref_b), values["V11"])
    pi_cos = ops.add_up(head("mcos01"), head("mcos2"))
    pi_cos = ops.add_up(pi_cos, ops.mul_up(pref_c, tails["cos_tail_a"]))
    pi_cos = ops.add_up(pi_cos, ops.mul_up(b_v11, tails["cos_tail_b"]))
    pi_cos = ops.add_up(pi_cos, ops.mul_up(b_v11, tails["cos_tail_c"]))
    small_t = ops.mul_up(2.0, values["T11"])
    out = {
        "pi_even": np.where(converged, pi_even, _INF),
        "pi_odd": np.where(converged, pi_odd, _INF),
        "pi_t": np.where(converged, pi_t, _INF),
        "pi_cos": np.where(converged, pi_cos, _INF),
        "small_t": small_t,
    }
    if breakdown is not None:
        for name, value in tails.items():
            breakdown.append(
                {"equation": name, "term": 0, "coefficient": 1.0, "factors": [],
                 "value": float(value)}
            )
    return out, converged


# -- per-coefficient bounds (head orders and generic order N) -----------------


def _values(diagrams: DiagramBoundSet):
    return ops_for(diagrams.policy), factor_values(diagrams)


def pi01_m(diagrams: DiagramBoundSet) -> float:
    """Bound on the head |pi^(0) - pi^(1)| coefficient under the m^t weight."""
    ops, values = _values(diagrams)
    return float(_eval_terms(ops, TERMS_M01, values))


def pi2_m(diagrams: DiagramBoundSet) -> float:
    ops, values = _values(diagrams)
    return float(_eval_terms(ops, TERMS_M2, values))


def _check_order(n: int) -> None:
    if n < 3:
        raise ValueError(f"generic-order bound holds for N >= 3, got {n}")


def piN_m(n: int, diagrams: DiagramBoundSet) -> float:
    _check_order(n)
    ops, values = _values(diagrams)
    pref = _eval_terms(ops, TERMS_PREF_M, values)
    x = ops.mul_up(2.0, values["T11"])
    return float(ops.mul_up(pref, ops.powi_up(x, n - 1)))


def pi01_mt(diagrams: DiagramBoundSet) -> float:
    ops, values = _values(diagrams)
    return float(_eval_terms(ops, TERMS_MT01, values))


def pi2_mt(diagrams: DiagramBoundSet) -> float:
    ops, values = _values(diagrams)
    return float(_eval_terms(ops, TERMS_MT2, values))


def piN_mt(n: int, diagrams: DiagramBoundSet) -> float:
    _check_order(n)
    ops, values = _values(diagrams)
    pref_a = _eval_terms(ops, TERMS_PREF_MT_A, values)
    pref_b = _eval_terms(ops, TERMS_PREF_MT_B, values)
    x = ops.mul_up(2.0, values["T11"])
    value = ops.mul_up(pref_a, ops.powi_up(x, n - 1))
    value = ops.add_up(value, ops.mul_up(float(n - 2), ops.mul_up(pref_b, ops.powi_up(x, n - 2))))
    return float(ops.add_up(value, ops.mul_up(pref_b, ops.powi_up(x, n - 1))))


def pi01_mcos(diagrams: DiagramBoundSet) -> float:
    ops, values = _values(diagrams)
    return float(_eval_terms(ops, TERMS_MCOS01, values))


def pi2_mcos(diagrams: DiagramBoundSet) -> float:
    ops, values = _values(diagrams)
    return float(_eval_terms(ops, TERMS_MCOS2, values))


def piN_mcos(n: int, diagrams: DiagramBoundSet) -> float:
    _check_order(n)
    ops, values = _values(diagrams)
    pref_c = _eval_terms(ops, TERMS_PREF_MCOS_C, values)
    pref_b = _eval_terms(ops, TERMS_PREF_MT_B, values)
    x = ops.mul_up(2.0, values["T11"])
    mid = ops.mul_up(ops.mul_up(2.0 * (n - 2), pref_b), ops.mul_up(values["V11"], ops.powi_up(x, n - 2)))
    last = ops.mul_up(ops.mul_up(2.0, pref_b), ops.mul_up(values["V11"], ops.powi_up(x, n - 2)))
    value = ops.add_up(ops.mul_up(pref_c, ops.powi_up(x, n - 1)), ops.add_up(mid, last))
    return float(ops.mul_up(float(n + 1), value))


# -- series totals -------------------------------------------------------------


@dataclass(frozen=True)
class LaceBoundReport:
    """The four chained series totals plus the convergence ratio."""

    d: int
    constants: BootstrapConstants
    policy: Policy
    pi_even: float
    pi_odd: float
    pi_t: float
    pi_cos: float
    small_t: float  # series ratio 2 * T(1,1); must be < 1 for a finite report
    divergent: bool
    divergence_reason: str | None = None
    terms: list[dict] = field(default_factory=list, repr=False)

    def to_json_dict(self) -> dict:
        def enc(v):
            return "inf" if v == _INF else v

        return {
            "d": self.d,
            "K1": self.constants.K1,
            "K2": self.constants.K2,
            "K3": self.constants.K3,
            "policy": self.policy.value,
            "pi_even": enc(self.pi_even),
            "pi_odd": enc(self.pi_odd),
            "pi_t": enc(self.pi_t),
            "pi_cos": enc(self.pi_cos),
            "small_t": enc(self.small_t),
            "divergent": self.divergent,
            "divergence_reason": self.divergence_reason,
            "terms": self.terms,
        }


def _divergence_reason(diagrams: DiagramBoundSet, small_t: float) -> str | None:
    if any(v == _INF for v in diagrams.bubble.values()):
        return "bubble bound infinite: eps1 diverges (d <= 2)"
    if any(v == _INF for v in diagrams.triangle.values()):
        return "triangle bound infinite: eps2 diverges (d <= 4)"
    if not small_t < 1.0:
        return f"series ratio 2*T(1,1) = {small_t} >= 1"
    return None


def totals(diagrams: DiagramBoundSet, with_terms: bool = True) -> LaceBoundReport:
    """Assemble the four series totals; DIVERGENT when the ratio reaches 1."""
    ops = ops_for(diagrams.policy)
    values = factor_values(diagrams)
    breakdown: list[dict] | None = [] if with_terms else None
    out, converged = _totals_from_values(ops, values, breakdown)
    small_t = float(out["small_t"])
    divergent = not bool(converged)
    return LaceBoundReport(
        d=diagrams.d,
        constants=diagrams.constants,
        policy=diagrams.policy,
        pi_even=float(out["pi_even"]),
        pi_odd=float(out["pi_odd"]),
        pi_t=float(out["pi_t"]),
        pi_cos=float(out["pi_cos"]),
        small_t=small_t,
        divergent=divergent,
        divergence_reason=_divergence_reason(diagrams, small_t) if divergent else None,
        terms=breakdown or [],
    )
