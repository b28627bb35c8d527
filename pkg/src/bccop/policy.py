"""Numeric policy and directed rounding.

Every quantity this library produces is an *upper bound* on some exact
nonnegative real.  Two policies control how floating-point error is handled:

* ``FAST`` evaluates with ordinary round-to-nearest arithmetic.  Results agree
  with the exact value to machine precision but carry no rounding guarantee.
* ``CERTIFIED`` rounds every elementary operation outward: quantities that
  must stay upper bounds are bumped one ulp toward +inf, and the few
  lower-bound intermediates (denominators of the form ``1 - x``) are bumped
  toward -inf.  Round-to-nearest is within half an ulp of the exact result,
  so a single ``nextafter`` step after each operation preserves the bound
  direction by induction over the whole formula tree.

All helpers accept scalars or numpy arrays, so the same bound formulas serve
both single evaluations and vectorized parameter sweeps.  +inf is a first
class value (a divergent series, not an error) and propagates through.
"""

from __future__ import annotations

import enum

import numpy as np

__all__ = ["Policy", "DirectedOps", "ops_for", "FAST_OPS", "CERTIFIED_OPS"]

_INF = float("inf")


class Policy(str, enum.Enum):
    """Rounding policy tag attached to every computed table and report."""

    FAST = "fast"
    CERTIFIED = "certified"


class DirectedOps:
    """Arithmetic with policy-controlled rounding direction.

    ``*_up`` methods return upper bounds of the exact operation applied to
    upper-bound inputs; ``*_dn`` methods return lower bounds of the exact
    operation applied to lower-bound inputs.  Under FAST both directions
    collapse to plain arithmetic.
    """

    def __init__(self, policy: Policy):
        self.policy = Policy(policy)
        self._directed = self.policy is Policy.CERTIFIED

    # rounding primitives ---------------------------------------------------

    def up(self, x):
        return np.nextafter(x, _INF) if self._directed else x

    def dn(self, x):
        return np.nextafter(x, -_INF) if self._directed else x

    # upper-bound arithmetic ------------------------------------------------

    def add_up(self, a, b):
        return self.up(a + b)

    def mul_up(self, a, b):
        return self.up(a * b)

    def div_up(self, num_up, den_dn):
        """Upper bound of num/den from an upper num and a *lower* positive den."""
        return self.up(num_up / den_dn)

    def sub_up(self, a_up, b_dn):
        """Upper bound of a - b from an upper a and a lower b."""
        return self.up(a_up - b_dn)

    def sqrt_up(self, x):
        return self.up(np.sqrt(x))

    def powi_up(self, x, k: int):
        """x**k for integer k >= 0 by repeated directed multiplication."""
        if k < 0:
            raise ValueError("negative exponent: use div_up against powi_dn")
        out = 1.0
        for _ in range(k):
            out = self.mul_up(out, x)
        return out

    # lower-bound arithmetic (used for denominators only) --------------------

    def sub_dn(self, a_dn, b_up):
        return self.dn(a_dn - b_up)

    def one_minus_dn(self, x_up):
        """Lower bound of 1 - x from an upper bound of x (may be <= 0)."""
        return self.dn(1.0 - x_up)

    def mul_dn(self, a, b):
        """Lower bound of a*b for nonnegative lower-bound inputs."""
        return self.dn(a * b)

    def sqrt_dn(self, x):
        return self.dn(np.sqrt(x))

    def powi_dn(self, x, k: int):
        if k < 0:
            raise ValueError("negative exponent")
        out = 1.0
        for _ in range(k):
            out = self.mul_dn(out, x)
        return out

    def pow_half_dn(self, x_dn, k: int):
        """Lower bound of x**(k/2) for nonnegative x and integer k >= 0."""
        q, r = divmod(k, 2)
        out = self.powi_dn(x_dn, q)
        if r:
            out = self.mul_dn(out, self.sqrt_dn(x_dn))
        return out

    def pow_half_up(self, x_up, k: int):
        """Upper bound of x**(k/2) for nonnegative x and integer k >= 0."""
        q, r = divmod(k, 2)
        out = self.powi_up(x_up, q)
        if r:
            out = self.mul_up(out, self.sqrt_up(x_up))
        return out

    # constants ---------------------------------------------------------------

    @property
    def pi_up(self) -> float:
        # math.pi is correctly rounded; one ulp out is a safe directed bound.
        return float(np.nextafter(np.pi, _INF)) if self._directed else float(np.pi)

    @property
    def pi_dn(self) -> float:
        return float(np.nextafter(np.pi, 0.0)) if self._directed else float(np.pi)

    @property
    def sqrt2_up(self) -> float:
        return float(self.sqrt_up(2.0))


FAST_OPS = DirectedOps(Policy.FAST)
CERTIFIED_OPS = DirectedOps(Policy.CERTIFIED)


def ops_for(policy: Policy) -> DirectedOps:
    return CERTIFIED_OPS if Policy(policy) is Policy.CERTIFIED else FAST_OPS


def ceil_to_sig(value: float, digits: int) -> float:
    """Round a positive value up in its ``digits``-th significant decimal digit."""
    import decimal

    if value <= 0 or value == float("inf"):
        raise ValueError(f"ceil_to_sig needs a finite positive value, got {value}")
    exact = decimal.Decimal(value)
    quantum = decimal.Decimal(1).scaleb(exact.adjusted() - (digits - 1))
    return float(exact.quantize(quantum, rounding=decimal.ROUND_CEILING))
