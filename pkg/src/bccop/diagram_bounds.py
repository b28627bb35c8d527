"""Closed-form upper bounds on the basic bubble/triangle/weighted-bubble diagrams.

Under the bootstrap hypotheses g_i <= K_i, the three families of space-time
diagrams that control the expansion coefficients are bounded purely in terms
of the random-walk series eps1/eps2:

    bubble   B(lam, rho)  <=  K1^(lam+rho) * K2^2 * eps1(floor((lam+rho)/2))
    triangle T(lam, rho)  <=  sqrt(2) * K1^(lam+rho) * K2^3 * eps2(floor((lam+rho)/2))

    weighted bubble, as a sup-norm bound on V(k)/(1 - Dhat(k)):
      lam = rho = 1:   K1^2 * ||D||_inf + K1^3 * K2 * sqrt(eps1(2)) + V(2,1) bound
      lam >= 2 or rho >= 2:
                       lam*(lam-1) * K1^(lam+rho) * K2^2 * eps1(floor((lam+rho-1)/2))
                       + lam * K1^(lam+rho-1) * K2 * K3 * (sqrt(2)+4)
                             * eps2(floor((lam+rho-1)/2))

with ||D||_inf = 2^(-d) on the BCC lattice (the one-step distribution is
uniform over 2^d neighbors).  The bounds are uniform in the weight parameter
m below its radius of convergence, so subscripts m and 1 share one formula,
and B/T depend on (lam, rho) only through lam + rho.

The kernels accept scalar or numpy-array K values; vectorized parameter
sweeps reuse exactly the formulas that single verifications run.
"""

from __future__ import annotations

from dataclasses import dataclass

from .bcc_rw import RwTable
from .policy import DirectedOps, Policy, ops_for

__all__ = [
    "BootstrapConstants",
    "DiagramBoundSet",
    "bubble_bound",
    "triangle_bound",
    "weighted_bubble_bound",
    "build_diagram_set",
    "BUBBLE_INDICES",
    "TRIANGLE_INDICES",
    "WBUBBLE_INDICES",
]

# Indices the bound chain consumes (lam + rho <= 4, plus the (0, 2) variants).
BUBBLE_INDICES = ((0, 2), (1, 1), (1, 2), (2, 1), (2, 2), (1, 3))
TRIANGLE_INDICES = ((0, 2), (1, 1), (1, 2), (2, 1), (2, 2), (1, 3), (3, 1))
WBUBBLE_INDICES = ((1, 1), (1, 2), (2, 1), (2, 2), (3, 1), (1, 3))


@dataclass(frozen=True)
class BootstrapConstants:
    """Hypothesized bootstrap constants (K1, K2, K3).

    The bootstrap argument needs K_i > 1; unit values are accepted as well
    because they reduce the bounds to bare random-walk quantities, which is
    the natural cross-check.
    """

    K1: float
    K2: float
    K3: float

    def __post_init__(self):
        for name, value in (("K1", self.K1), ("K2", self.K2), ("K3", self.K3)):
            if not value >= 1.0:
                raise ValueError(f"{name} must be >= 1, got {value}")

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.K1, self.K2, self.K3)


def _check_index(lam: int, rho: int, allow_lam0: bool) -> None:
    if rho < 1 or lam < 0 or (lam == 0 and not allow_lam0):
        raise ValueError(f"unsupported diagram index ({lam}, {rho})")


def _bubble_kernel(ops: DirectedOps, lam: int, rho: int, k1, k2, walk: RwTable):
    nu = (lam + rho) // 2
    value = ops.mul_up(ops.powi_up(k1, lam + rho), ops.powi_up(k2, 2))
    return ops.mul_up(value, walk.eps1_at(nu))


def _triangle_kernel(ops: DirectedOps, lam: int, rho: int, k1, k2, walk: RwTable):
    nu = (lam + rho) // 2
    value = ops.mul_up(ops.sqrt2_up, ops.powi_up(k1, lam + rho))
    value = ops.mul_up(value, ops.powi_up(k2, 3))
    return ops.mul_up(value, walk.eps2_at(nu))


def _wbubble_kernel(ops: DirectedOps, lam: int, rho: int, k1, k2, k3, walk: RwTable):
    if lam == 1 and rho == 1:
        walk_peak = ops.mul_up(ops.powi_up(k1, 2), 2.0 ** (-walk.d))
        near = ops.mul_up(
            ops.mul_up(ops.powi_up(k1, 3), k2), ops.sqrt_up(walk.eps1_at(2))
        )
        far = _wbubble_kernel(ops, 2, 1, k1, k2, k3, walk)
        return ops.add_up(ops.add_up(walk_peak, near), far)
    nu = (lam + rho - 1) // 2
    curvature = ops.mul_up(
        float(lam * (lam - 1)),
        ops.mul_up(ops.powi_up(k1, lam + rho), ops.powi_up(k2, 2)),
    )
    curvature = ops.mul_up(curvature, walk.eps1_at(nu))
    cross = ops.mul_up(float(lam), ops.powi_up(k1, lam + rho - 1))
    cross = ops.mul_up(cross, ops.mul_up(k2, k3))
    cross = ops.mul_up(cross, ops.add_up(ops.sqrt2_up, 4.0))
    cross = ops.mul_up(cross, walk.eps2_at(nu))
    return ops.add_up(curvature, cross)


def bubble_bound(lam: int, rho: int, constants: BootstrapConstants, walk: RwTable) -> float:
    """Upper bound on the (lam, rho) bubble diagram; lam = 0 is allowed."""
    _check_index(lam, rho, allow_lam0=True)
    ops = ops_for(walk.policy)
    return float(_bubble_kernel(ops, lam, rho, constants.K1, constants.K2, walk))


def triangle_bound(lam: int, rho: int, constants: BootstrapConstants, walk: RwTable) -> float:
    """Upper bound on the (lam, rho) triangle diagram; finite only for d >= 5."""
    _check_index(lam, rho, allow_lam0=True)
    ops = ops_for(walk.policy)
    return float(_triangle_kernel(ops, lam, rho, constants.K1, constants.K2, walk))


def weighted_bubble_bound(
    lam: int, rho: int, constants: BootstrapConstants, walk: RwTable
) -> float:
    """Sup-norm bound on the cosine-weighted bubble divided by 1 - Dhat."""
    _check_index(lam, rho, allow_lam0=False)
    ops = ops_for(walk.policy)
    return float(
        _wbubble_kernel(ops, lam, rho, constants.K1, constants.K2, constants.K3, walk)
    )


@dataclass(frozen=True)
class DiagramBoundSet:
    """All diagram bounds the chain needs, for one (d, K) point."""

    d: int
    constants: BootstrapConstants
    policy: Policy
    bubble: dict[tuple[int, int], float]
    triangle: dict[tuple[int, int], float]
    wbubble: dict[tuple[int, int], float]

    def to_json_dict(self) -> dict:
        payload: dict = {"d": self.d, "policy": self.policy.value}
        payload.update(
            {f"K{i}": k for i, k in enumerate(self.constants.as_tuple(), start=1)}
        )
        for prefix, store in (("B", self.bubble), ("T", self.triangle), ("V", self.wbubble)):
            for (lam, rho), value in sorted(store.items()):
                payload[f"{prefix}_{lam}_{rho}"] = value if value != float("inf") else "inf"
        return payload


def build_diagram_set(constants: BootstrapConstants, walk: RwTable) -> DiagramBoundSet:
    """Evaluate every index the chain uses against one random-walk table."""
    return DiagramBoundSet(
        d=walk.d,
        constants=constants,
        policy=walk.policy,
        bubble={idx: bubble_bound(*idx, constants, walk) for idx in BUBBLE_INDICES},
        triangle={idx: triangle_bound(*idx, constants, walk) for idx in TRIANGLE_INDICES},
        wbubble={idx: weighted_bubble_bound(*idx, constants, walk) for idx in WBUBBLE_INDICES},
    )


def factor_values_from_arrays(ops: DirectedOps, walk: RwTable, k1, k2, k3) -> dict:
    """Factor symbols -> bound values, broadcasting over array-valued constants.

    This is the kernel the vectorized grid search runs; the scalar API is the
    same arithmetic with plain floats.
    """
    values: dict = {}
    for lam, rho in BUBBLE_INDICES:
        values[f"B{lam}{rho}"] = _bubble_kernel(ops, lam, rho, k1, k2, walk)
    for lam, rho in TRIANGLE_INDICES:
        values[f"T{lam}{rho}"] = _triangle_kernel(ops, lam, rho, k1, k2, walk)
    for lam, rho in WBUBBLE_INDICES:
        values[f"V{lam}{rho}"] = _wbubble_kernel(ops, lam, rho, k1, k2, k3, walk)
    values["MT12"] = ops.mul_up(k1, values["T12"])
    return values


def factor_values(diagrams: DiagramBoundSet) -> dict[str, float]:
    """Flatten a bound set into the factor symbols the series tables reference.

    ``MT12`` is the triangle (1, 2) carrying one bare weight factor m; the
    spare K1 power available when lam >= 1 absorbs it, so its bound is one
    K1 multiple of the plain (1, 2) triangle bound.
    """
    ops = ops_for(diagrams.policy)
    values: dict[str, float] = {}
    for (lam, rho), value in diagrams.bubble.items():
        values[f"B{lam}{rho}"] = value
    for (lam, rho), value in diagrams.triangle.items():
        values[f"T{lam}{rho}"] = value
    for (lam, rho), value in diagrams.wbubble.items():
        values[f"V{lam}{rho}"] = value
    values["MT12"] = float(ops.mul_up(diagrams.constants.K1, values["T12"]))
    return values
