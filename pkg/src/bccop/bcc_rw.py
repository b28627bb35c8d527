"""Random-walk return probabilities and tail-certified series on the BCC lattice.

The d-dimensional BCC lattice is generated by the neighbor set {-1,+1}^d, so
its one-step distribution factorizes across coordinates and the 2n-step
return probability is an exact rational:

    r(d, n) = (C(2n, n) / 4^n) ** d  <=  (pi * n)^(-d/2)         (n >= 1).

Everything downstream is controlled by two series built from r(d, n):

    eps1(nu) = sum_{n >= nu} r(d, n)
    eps2(nu) = sum_{n >= nu} (n - nu + 1) * r(d, n)

Neither series is summable in closed form, so both are bounded above by a
truncated partial sum of N exact terms plus an integral-test tail:

    eps1(nu) <= sum_{n=0}^{N-1} r(d, n + nu)
                + pi^(-d/2) * M^(-d/2)
                + 2 / (pi^(d/2) * (d - 2)) * M^((2-d)/2),          M = nu + N

    eps2(nu) <= sum_{n=0}^{N-1} (n+1) * r(d, n + nu)
                + pi^(-d/2) * M^(-(d-2)/2)
                + 2 / (pi^(d/2) * (d - 4)) * M^((4-d)/2)
                - 2 (nu-1) / (pi^(d/2) * (d - 2)) * M^((2-d)/2).

The tails diverge for d <= 2 (eps1) and d <= 4 (eps2); those values are +inf,
which is a legitimate table entry rather than an error.  Under the CERTIFIED
policy the subtracted eps2 correction is dropped (a valid relaxation of an
upper bound) and every rounding is outward; under FAST the expressions are
evaluated verbatim in round-to-nearest, which reproduces the reference table
digits.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from decimal import ROUND_CEILING, Decimal
from fractions import Fraction

from .policy import Policy, ops_for

__all__ = [
    "return_prob",
    "eps1",
    "eps2",
    "RwTable",
    "build_table",
    "format_upper_7",
    "table_to_csv",
    "table_to_json",
]

_INF = float("inf")


def format_upper_7(value: float) -> str:
    """Format an upper bound as 7 significant digits, rounding the last digit up.

    Ceiling in the final digit keeps a printed upper bound a true upper bound,
    and is the convention the reference table uses ("%.6e" nearest-rounding
    disagrees with it in the seventh digit on several rows).
    """
    if value == _INF:
        return "inf"
    if value < 0:
        raise ValueError("bound values are nonnegative")
    if value == 0.0:
        return "0.000000e+00"
    exact = Decimal(value)  # exact binary-to-decimal expansion
    quantum = Decimal(1).scaleb(exact.adjusted() - 6)
    rounded = exact.quantize(quantum, rounding=ROUND_CEILING)
    exp = rounded.adjusted()
    digits = rounded.scaleb(-exp).quantize(Decimal("1.000000"))
    return f"{digits}e{exp:+03d}"


def return_prob(d: int, n: int, policy: Policy = Policy.FAST) -> float:
    """Return probability of the 2n-step walk at the origin, (C(2n,n)/4^n)^d.

    The central binomial ratio is evaluated as one exact integer division
    (correctly rounded to double), then raised to the d-th power; no
    intermediate float touches the binomial itself.
    """
    if d < 1:
        raise ValueError(f"dimension must be >= 1, got {d}")
    if n < 0:
        raise ValueError(f"step count must be >= 0, got {n}")
    if n == 0:
        return 1.0
    ops = ops_for(policy)
    try:
        ratio = math.comb(2 * n, n) / (4 ** n)
        return float(ops.powi_up(ops.up(ratio), d))
    except OverflowError:
        # Degrade to a certain upper bound instead of wrapping around.
        return _INF


def _return_prob_exact(d: int, n: int) -> Fraction:
    """Exact rational return probability, for oracle/testing use."""
    if n == 0:
        return Fraction(1)
    return Fraction(math.comb(2 * n, n), 4 ** n) ** d


def _check_args(d: int, nu: int, truncation: int) -> None:
    if d < 1:
        raise ValueError(f"dimension must be >= 1, got {d}")
    if nu < 1:
        # The weighted series is only defined from its own starting index on;
        # the bound chain never needs nu = 0, so it is rejected outright.
        raise ValueError(f"series start nu must be >= 1, got {nu}")
    if truncation < 1:
        raise ValueError(f"truncation must be >= 1, got {truncation}")


def eps1(d: int, nu: int, truncation: int = 500, policy: Policy = Policy.FAST) -> float:
    """Upper bound on the plain return-probability tail sum eps1(nu).

    Returns +inf for d <= 2, where the tail integral diverges.
    """
    _check_args(d, nu, truncation)
    if d <= 2:
        return _INF
    ops = ops_for(policy)
    total = 0.0
    for n in range(truncation):
        total = ops.add_up(total, return_prob(d, n + nu, policy))
    m = float(nu + truncation)
    pi_pow_dn = ops.pow_half_dn(ops.pi_dn, d)
    # pi^(-d/2) * M^(-d/2)
    total = ops.add_up(total, ops.div_up(1.0, ops.mul_dn(pi_pow_dn, ops.pow_half_dn(m, d))))
    # 2 / (pi^(d/2) (d-2)) * M^((2-d)/2)
    den = ops.mul_dn(ops.mul_dn(pi_pow_dn, float(d - 2)), ops.pow_half_dn(m, d - 2))
    total = ops.add_up(total, ops.div_up(2.0, den))
    return float(total)


def eps2(d: int, nu: int, truncation: int = 500, policy: Policy = Policy.FAST) -> float:
    """Upper bound on the linearly weighted tail sum eps2(nu).

    Returns +inf for d <= 4.  The negative correction term is kept verbatim
    under FAST and dropped under CERTIFIED (dropping a subtracted nonnegative
    term can only loosen an upper bound, never break it).
    """
    _check_args(d, nu, truncation)
    if d <= 4:
        return _INF
    ops = ops_for(policy)
    total = 0.0
    for n in range(truncation):
        term = ops.mul_up(float(n + 1), return_prob(d, n + nu, policy))
        total = ops.add_up(total, term)
    m = float(nu + truncation)
    pi_pow_dn = ops.pow_half_dn(ops.pi_dn, d)
    # pi^(-d/2) * M^(-(d-2)/2)
    total = ops.add_up(total, ops.div_up(1.0, ops.mul_dn(pi_pow_dn, ops.pow_half_dn(m, d - 2))))
    # 2 / (pi^(d/2) (d-4)) * M^((4-d)/2)
    den = ops.mul_dn(ops.mul_dn(pi_pow_dn, float(d - 4)), ops.pow_half_dn(m, d - 4))
    total = ops.add_up(total, ops.div_up(2.0, den))
    if nu > 1 and Policy(policy) is Policy.FAST:
        correction = 2.0 * (nu - 1) / (math.pi ** (d / 2) * (d - 2)) * m ** ((2 - d) / 2)
        total -= correction
    return float(total)


@dataclass(frozen=True)
class RwTable:
    """eps1/eps2 upper bounds for one dimension, indexed by series start nu."""

    d: int
    truncation: int
    policy: Policy
    eps1: dict[int, float]
    eps2: dict[int, float]

    def eps1_at(self, nu: int) -> float:
        try:
            return self.eps1[nu]
        except KeyError:
            raise ValueError(
                f"table for d={self.d} holds nu <= {max(self.eps1)}, needs nu={nu}; "
                f"rebuild with a larger nu_max"
            ) from None

    def eps2_at(self, nu: int) -> float:
        try:
            return self.eps2[nu]
        except KeyError:
            raise ValueError(
                f"table for d={self.d} holds nu <= {max(self.eps2)}, needs nu={nu}; "
                f"rebuild with a larger nu_max"
            ) from None


def build_table(
    d: int,
    nu_max: int = 2,
    truncation: int = 500,
    policy: Policy = Policy.FAST,
) -> RwTable:
    """Populate eps1/eps2 bounds for nu = 1..nu_max at one dimension."""
    if nu_max < 2:
        raise ValueError(f"nu_max must be >= 2 (the bound chain uses nu in {{1,2}}), got {nu_max}")
    e1 = {nu: eps1(d, nu, truncation, policy) for nu in range(1, nu_max + 1)}
    e2 = {nu: eps2(d, nu, truncation, policy) for nu in range(1, nu_max + 1)}
    return RwTable(d=d, truncation=truncation, policy=Policy(policy), eps1=e1, eps2=e2)


def table_to_csv(tables: list[RwTable]) -> str:
    """Long-format CSV: one row per (d, nu), 7-significant-digit display values."""
    lines = ["d,nu,eps1,eps2,N,policy"]
    for table in tables:
        for nu in sorted(table.eps1):
            lines.append(
                f"{table.d},{nu},{format_upper_7(table.eps1[nu])},"
                f"{format_upper_7(table.eps2[nu])},{table.truncation},{table.policy.value}"
            )
    return "\n".join(lines) + "\n"


def _json_value(value: float):
    return "inf" if value == _INF else value


def table_to_json(tables: list[RwTable]) -> str:
    payload = []
    for table in tables:
        payload.append(
            {
                "d": table.d,
                "N": table.truncation,
                "policy": table.policy.value,
                "entries": [
                    {
                        "nu": nu,
                        "eps1": _json_value(table.eps1[nu]),
                        "eps1_display": format_upper_7(table.eps1[nu]),
                        "eps2": _json_value(table.eps2[nu]),
                        "eps2_display": format_upper_7(table.eps2[nu]),
                    }
                    for nu in sorted(table.eps1)
                ],
            }
        )
    return json.dumps(payload, indent=2) + "\n"
