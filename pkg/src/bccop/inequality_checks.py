"""Grid and randomized certification of the auxiliary analytic inequalities.

Each check evaluates an inequality's margin (bound side minus sharp side) on
a dense grid or a reproducible random sample and reports the exact minimum
with its location.  A check passes when the margin never drops below
``-tolerance``.  This is practical certification, not formal proof: margins
plus grid density give confidence, the analytic proofs remain the authority.

Randomized checks use a counter-based generator (Philox) so any failure is
reproducible from (seed, trial index) alone.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import qmc

__all__ = [
    "CheckResult",
    "check_green_lower",
    "check_mu_bound",
    "check_d2k",
    "check_cosine_telescope",
    "check_double_derivative_identity",
    "run_all",
    "DEFAULT_TOLERANCE",
]

DEFAULT_TOLERANCE = 1e-12


@dataclass(frozen=True)
class CheckResult:
    """Outcome of one inequality certification."""

    name: str
    points_checked: int
    min_margin: float
    worst_point: tuple
    tolerance: float
    passed: bool
    details: dict = field(default_factory=dict)

    def to_json_dict(self) -> dict:
        return {
            "name": self.name,
            "points_checked": self.points_checked,
            "min_margin": self.min_margin,
            "worst_point": list(self.worst_point),
            "tolerance": self.tolerance,
            "passed": self.passed,
            "details": self.details,
        }


def _result(name, margins, coords, tolerance, details=None) -> CheckResult:
    flat = int(np.argmin(margins))
    idx = np.unravel_index(flat, margins.shape)
    worst = tuple(float(c[idx]) for c in coords)
    min_margin = float(margins[idx])
    passed = min_margin >= -tolerance
    if details:
        passed = passed and all(details.get(k, True) for k in details if k.endswith("_ok"))
    return CheckResult(
        name=name,
        points_checked=int(margins.size),
        min_margin=min_margin,
        worst_point=worst,
        tolerance=tolerance,
        passed=passed,
        details=details or {},
    )


def green_margin(xi, r, theta):
    """Margin of 4|1 - r e^{i theta} xi|^2 >= (|theta|/pi + 1 - xi)^2."""
    modulus_sq = 1.0 - 2.0 * r * xi * np.cos(theta) + (r * xi) ** 2
    return 4.0 * modulus_sq - (np.abs(theta) / np.pi + 1.0 - xi) ** 2


def check_green_lower(points_per_axis: int = 101,
                      tolerance: float = DEFAULT_TOLERANCE) -> CheckResult:
    """Green-function modulus lower bound on xi in [0,1], r in [0,1], theta in [0,pi].

    xi stands for the transform of the one-step distribution on its
    nonnegative range; the bound is what keeps the sup-norm chain finite.
    """
    xi = np.linspace(0.0, 1.0, points_per_axis)[:, None, None]
    r = np.linspace(0.0, 1.0, points_per_axis)[None, :, None]
    theta = np.linspace(0.0, math.pi, points_per_axis)[None, None, :]
    margins = green_margin(xi, r, theta)
    grids = np.broadcast_arrays(xi, r, theta)
    return _result("green_lower", margins, grids, tolerance)


def mu_margin(r, y, theta):
    """Margin of 4|1 - r e^{i theta} y|^2 >= |1 - e^{i theta} y|^2."""
    return 3.0 + (4.0 * r ** 2 - 1.0) * y ** 2 - 2.0 * (4.0 * r - 1.0) * y * np.cos(theta)


def check_mu_bound(points_per_axis: int = 101,
                   tolerance: float = DEFAULT_TOLERANCE) -> CheckResult:
    """Unit-argument comparison bound over r in [0,1], y in [-1,1], theta in [0,pi]."""
    r = np.linspace(0.0, 1.0, points_per_axis)[:, None, None]
    y = np.linspace(-1.0, 1.0, points_per_axis)[None, :, None]
    theta = np.linspace(0.0, math.pi, points_per_axis)[None, None, :]
    margins = mu_margin(r, y, theta)
    grids = np.broadcast_arrays(r, y, theta)
    return _result("mu_bound", margins, grids, tolerance)


def doubled_angle_margin(points: np.ndarray) -> np.ndarray:
    """h(xi) = 1 - 2 prod(xi_j) + prod(2 xi_j - 1) over rows of points."""
    return 1.0 - 2.0 * np.prod(points, axis=-1) + np.prod(2.0 * points - 1.0, axis=-1)


def _full_grid(d: int, points_per_axis: int) -> np.ndarray:
    axes = [np.linspace(0.0, 1.0, points_per_axis)] * d
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=-1)


def check_d2k(
    d: int,
    points_per_axis: int = 101,
    samples: int = 1 << 17,
    seed: int = 0,
    tolerance: float = DEFAULT_TOLERANCE,
    full_grid_limit: int = 2_000_000,
) -> CheckResult:
    """Doubled-angle transform bound: h_d >= 0 on [0,1]^d.

    Full grid when points_per_axis**d stays below ``full_grid_limit`` (cost
    grows as the d-th power), scrambled Sobol samples otherwise.  Also runs
    the induction skeleton: appending a 0 coordinate gives a nonnegative
    value, appending a 1 reproduces h_d exactly.
    """
    if d < 1:
        raise ValueError(f"dimension must be >= 1, got {d}")
    if points_per_axis ** d <= full_grid_limit:
        pts = _full_grid(d, points_per_axis)
        mode = "full_grid"
    else:
        sampler = qmc.Sobol(d=d, scramble=True, seed=seed)
        m = max(1, math.ceil(math.log2(max(2, samples))))
        pts = sampler.random_base2(m)
        mode = "sobol"
    margins = doubled_angle_margin(pts)
    with_zero = doubled_angle_margin(
        np.concatenate([pts, np.zeros((len(pts), 1))], axis=1)
    )
    with_one = doubled_angle_margin(
        np.concatenate([pts, np.ones((len(pts), 1))], axis=1)
    )
    identity_dev = float(np.max(np.abs(with_one - margins)))
    details = {
        "mode": mode,
        "d": d,
        "append_zero_min": float(np.min(with_zero)),
        "append_zero_ok": bool(np.min(with_zero) >= -tolerance),
        "append_one_identity_dev": identity_dev,
        "append_one_identity_ok": bool(identity_dev <= tolerance),
    }
    worst = int(np.argmin(margins))
    result = CheckResult(
        name=f"d2k_dim{d}",
        points_checked=int(margins.size),
        min_margin=float(margins[worst]),
        worst_point=tuple(float(v) for v in pts[worst]),
        tolerance=tolerance,
        passed=bool(
            margins[worst] >= -tolerance
            and details["append_zero_ok"]
            and details["append_one_identity_ok"]
        ),
        details=details,
    )
    return result


def check_d2k_range(
    dims: tuple[int, ...] = (1, 2, 3, 4, 5, 6, 7, 8, 9),
    points_per_axis: int = 101,
    samples: int = 1 << 17,
    seed: int = 0,
    tolerance: float = DEFAULT_TOLERANCE,
) -> CheckResult:
    """Aggregate doubled-angle check across a dimension range."""
    sub = [
        check_d2k(d, points_per_axis, samples, seed + d, tolerance)
        for d in dims
    ]
    worst = min(sub, key=lambda r: r.min_margin)
    return CheckResult(
        name="d2k",
        points_checked=sum(r.points_checked for r in sub),
        min_margin=worst.min_margin,
        worst_point=worst.worst_point,
        tolerance=tolerance,
        passed=all(r.passed for r in sub),
        details={"per_dim": {r.details["d"]: r.min_margin for r in sub},
                 "worst_dim": worst.details["d"]},
    )


def check_cosine_telescope(
    trials: int = 1_000_000,
    j_max: int = 8,
    seed: int = 0,
    tolerance: float = DEFAULT_TOLERANCE,
) -> CheckResult:
    """Cosine telescoping: 0 <= 1 - cos(sum t_j) <= J * sum (1 - cos t_j)."""
    if j_max < 1:
        raise ValueError(f"j_max must be >= 1, got {j_max}")
    gen = np.random.Generator(np.random.Philox(key=seed))
    counts = gen.integers(1, j_max + 1, size=trials)
    angles = gen.uniform(-math.pi, math.pi, size=(trials, j_max))
    mask = np.arange(j_max)[None, :] < counts[:, None]
    total = np.where(mask, angles, 0.0).sum(axis=1)
    lhs = 1.0 - np.cos(total)
    rhs = counts * np.where(mask, 1.0 - np.cos(angles), 0.0).sum(axis=1)
    lower_margin = lhs  # nonnegativity of 1 - cos
    upper_margin = rhs - lhs
    margins = np.minimum(lower_margin, upper_margin)
    worst = int(np.argmin(margins))
    return CheckResult(
        name="cosine_telescope",
        points_checked=trials,
        min_margin=float(margins[worst]),
        worst_point=(float(worst), float(counts[worst]), float(total[worst])),
        tolerance=tolerance,
        passed=bool(margins[worst] >= -tolerance),
        details={
            "min_lower_margin": float(lower_margin.min()),
            "min_upper_margin": float(upper_margin.min()),
            "worst_trial": worst,
            "seed": seed,
        },
    )


# Support box for the double-derivative identity check: one spatial dimension,
# |x| <= 2, time 0..3, sequences symmetric in x with total mass <= 0.4 so the
# resolvent denominator keeps |1 - a_hat| >= 0.6 everywhere.
_DD_X = np.arange(-2, 3)
_DD_T = np.arange(0, 4)


def _dd_transform(a, x_phase, z_pow):
    # a: (trials, nx, nt); x_phase: (trials, nx); z_pow: (trials, nt)
    return np.einsum("ixt,ix,it->i", a, x_phase, z_pow)


def double_derivative_margin(a, k, ell, z):
    """Margin of the resolvent double-derivative bound for one batch.

    a has shape (trials, 5, 4) and is symmetric in x; k, ell are wave numbers
    and z complex Laplace points with |z| <= 1.
    """
    x = _DD_X[None, :]
    t = _DD_T[None, :]
    abs_z_pow = np.abs(z)[:, None] ** t

    def resolvent(theta):
        phase = np.exp(1j * theta[:, None] * x)
        z_pow = z[:, None] ** t
        a_hat = _dd_transform(a.astype(complex), phase, z_pow)
        return 1.0 / (1.0 - a_hat)

    def mass_gap(theta):
        cos_part = np.cos(theta[:, None] * x)
        full = _dd_transform(np.abs(a), np.ones_like(cos_part), abs_z_pow)
        at_theta = _dd_transform(np.abs(a), cos_part, abs_z_pow)
        return full - at_theta

    res_plus = resolvent(ell + k)
    res_minus = resolvent(ell - k)
    res_mid = resolvent(ell)
    lhs = 0.5 * np.abs(res_plus + res_minus - 2.0 * res_mid)
    gap_k = mass_gap(k)
    gap_2l = mass_gap(2.0 * ell)
    rhs = gap_k * (
        0.5 * (np.abs(res_plus) + np.abs(res_minus)) * np.abs(res_mid)
        + np.abs(res_mid) * np.abs(res_plus) * np.abs(res_minus) * gap_2l
    )
    return rhs - lhs


def check_double_derivative_identity(
    trials: int = 10_000,
    seed: int = 0,
    tolerance: float = DEFAULT_TOLERANCE,
) -> CheckResult:
    """Randomized certification of the resolvent double-derivative bound."""
    gen = np.random.Generator(np.random.Philox(key=seed))
    raw = gen.uniform(-1.0, 1.0, size=(trials, 3, len(_DD_T)))  # x = 0, 1, 2
    a = np.zeros((trials, len(_DD_X), len(_DD_T)))
    a[:, 2, :] = raw[:, 0, :]
    a[:, 3, :] = raw[:, 1, :]
    a[:, 1, :] = raw[:, 1, :]
    a[:, 4, :] = raw[:, 2, :]
    a[:, 0, :] = raw[:, 2, :]
    mass = np.abs(a).sum(axis=(1, 2))
    target = gen.uniform(0.05, 0.4, size=trials)
    a *= (target / np.maximum(mass, 1e-300))[:, None, None]
    k = gen.uniform(-math.pi, math.pi, size=trials)
    ell = gen.uniform(-math.pi, math.pi, size=trials)
    z = gen.uniform(0.0, 1.0, size=trials) * np.exp(
        1j * gen.uniform(-math.pi, math.pi, size=trials)
    )
    margins = double_derivative_margin(a, k, ell, z)
    worst = int(np.argmin(margins))
    return CheckResult(
        name="double_derivative",
        points_checked=trials,
        min_margin=float(margins[worst]),
        worst_point=(float(worst), float(k[worst]), float(ell[worst])),
        tolerance=tolerance,
        passed=bool(margins[worst] >= -tolerance),
        details={"seed": seed, "worst_trial": worst},
    )


def run_all(
    points_per_axis: int = 101,
    d2k_dims: tuple[int, ...] = (1, 2, 3, 4, 5, 6, 7, 8, 9),
    d2k_samples: int = 1 << 17,
    telescope_trials: int = 1_000_000,
    dd_trials: int = 10_000,
    seed: int = 0,
    tolerance: float = DEFAULT_TOLERANCE,
) -> list[CheckResult]:
    """The five certifications at their standard sizes."""
    return [
        check_green_lower(points_per_axis, tolerance),
        check_mu_bound(points_per_axis, tolerance),
        check_d2k_range(d2k_dims, points_per_axis, d2k_samples, seed, tolerance),
        check_cosine_telescope(telescope_trials, 8, seed, tolerance),
        check_double_derivative_identity(dd_trials, seed, tolerance),
    ]
