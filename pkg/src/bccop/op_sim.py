"""Monte Carlo oriented percolation on the BCC space-time lattice, plus exact oracles.

The process grows level by level: a site y at time s+1 is reached when some
reached site x at time s has |y_i - x_i| = 1 in every coordinate and the bond
(x, s) -> (y, s+1) is occupied.  Bonds are independent with probability
p * 2^(-d) each (p is the percolation parameter, scaled so p = 1 matches one
expected forward bond... p / ||D||_inf^-1 in distribution terms).

Bond randomness is counter-based: the word deciding bond ((x, s), (x+delta,
s+1)) in trial i is the fixed position ((i mod 4096), x, delta) of a Philox
stream keyed by (seed, s, i // 4096).  Trials are therefore reproducible and
order-independent, and a trial never samples a bond twice; running two bond
probabilities on the same words yields the standard monotone coupling.

Exact oracles for cross-checking the sampler:

* ``rw_two_point``   -- the random-walk two-point function (product of
  per-coordinate binomials), an upper bound for the percolation one.
* ``exact_two_step`` -- closed form at time 2: independent two-step paths
  through distinct midpoints share no bonds.
* ``exact_dp_1d``    -- exact distribution of the reached set in d = 1 by
  dynamic programming over subsets (exponential in t; capped at t <= 14).
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "SimConfig",
    "SimStats",
    "simulate",
    "rw_two_point",
    "exact_two_step",
    "exact_dp_1d",
    "coupling_violations",
]

_BLOCK_TRIALS = 4096  # fixed so bond words are independent of total trial count


@dataclass(frozen=True)
class SimConfig:
    """Simulation parameters; ``p * 2**-d`` is the per-bond probability."""

    d: int
    p: float
    t_max: int
    trials: int
    seed: int = 0
    site_budget: int = 1_000_000

    def __post_init__(self):
        if self.d < 1:
            raise ValueError(f"dimension must be >= 1, got {self.d}")
        if self.t_max < 1:
            raise ValueError(f"t_max must be >= 1, got {self.t_max}")
        if self.trials < 1:
            raise ValueError(f"trials must be >= 1, got {self.trials}")
        if not 0.0 <= self.bond_prob <= 1.0:
            raise ValueError(
                f"effective bond probability p*2^-d = {self.bond_prob} outside [0, 1]"
            )
        if self.site_budget < 1:
            raise ValueError("site_budget must be >= 1")

    @property
    def bond_prob(self) -> float:
        return self.p * 2.0 ** (-self.d)


@dataclass(frozen=True)
class SimStats:
    """Estimated two-point function, survival and truncated susceptibility.

    All estimates divide by the total trial count; if ``truncated_trials`` is
    nonzero, levels past a truncation are biased low and the run should be
    repeated with a larger budget.
    """

    config: SimConfig
    two_point: dict[tuple, tuple[float, float]]  # (x..., t) -> (estimate, stderr)
    survival: dict[int, tuple[float, float]]
    chi_trunc: float
    chi_stderr: float
    truncated_trials: int

    def estimate(self, x: tuple[int, ...], t: int) -> tuple[float, float]:
        return self.two_point.get((*x, t), (0.0, 0.0))

    def to_json_dict(self) -> dict:
        return {
            "config": {
                "d": self.config.d,
                "p": self.config.p,
                "bond_prob": self.config.bond_prob,
                "t_max": self.config.t_max,
                "trials": self.config.trials,
                "seed": self.config.seed,
                "site_budget": self.config.site_budget,
            },
            "two_point": [
                {"x": list(key[:-1]), "t": key[-1], "estimate": est, "stderr": err}
                for key, (est, err) in sorted(self.two_point.items())
            ],
            "survival": [
                {"t": t, "estimate": est, "stderr": err}
                for t, (est, err) in sorted(self.survival.items())
            ],
            "chi_trunc": self.chi_trunc,
            "chi_stderr": self.chi_stderr,
            "truncated_trials": self.truncated_trials,
        }

    def two_point_csv(self) -> str:
        header = ",".join(f"x{i+1}" for i in range(self.config.d))
        lines = [f"{header},t,estimate,stderr"]
        for key, (est, err) in sorted(self.two_point.items()):
            coords = ",".join(str(c) for c in key[:-1])
            lines.append(f"{coords},{key[-1]},{est!r},{err!r}")
        return "\n".join(lines) + "\n"


def _offsets(d: int) -> list[tuple[int, ...]]:
    return list(itertools.product((-1, 1), repeat=d))


def _bond_words(seed: int, level: int, block: int, shape: tuple[int, ...]) -> np.ndarray:
    """The uint32 words deciding one block's bonds at one level."""
    bitgen = np.random.Philox(key=np.random.SeedSequence((seed, level, block)).generate_state(2, np.uint64))
    gen = np.random.Generator(bitgen)
    return gen.integers(0, 1 << 32, size=shape, dtype=np.uint32)


def _occupied(words: np.ndarray, threshold: int) -> np.ndarray:
    """Occupation mask: word < threshold, with exact closed endpoints."""
    if threshold >= (1 << 32):
        return np.ones(words.shape, dtype=bool)
    if threshold <= 0:
        return np.zeros(words.shape, dtype=bool)
    return words < np.uint32(threshold)


_MAX_WORDS_PER_BLOCK = 500_000_000


def _check_memory(d: int, t_max: int) -> None:
    side = 2 * t_max + 1
    words = _BLOCK_TRIALS * side ** d * 2 ** d
    if words > _MAX_WORDS_PER_BLOCK:
        raise ValueError(
            f"cone of side {side}^{d} with 2^{d} bonds needs {words} words per "
            f"block; reduce t_max or d"
        )


def _shift_slices(delta: tuple[int, ...]):
    src = tuple(slice(None, -1) if step == 1 else slice(1, None) for step in delta)
    dst = tuple(slice(1, None) if step == 1 else slice(None, -1) for step in delta)
    return src, dst


def _grow_level(reached: np.ndarray, occupied: np.ndarray,
                offsets: list[tuple[int, ...]]) -> np.ndarray:
    """One synchronous growth step; occupied has a trailing bond-direction axis."""
    child = np.zeros_like(reached)
    for b_index, delta in enumerate(offsets):
        src, dst = _shift_slices(delta)
        child[(slice(None),) + dst] |= (reached & occupied[..., b_index])[(slice(None),) + src]
    return child


def simulate(config: SimConfig) -> SimStats:
    """Estimate the two-point function, survival and truncated susceptibility."""
    d, t_max, trials = config.d, config.t_max, config.trials
    side = 2 * t_max + 1
    _check_memory(d, t_max)
    threshold = int(round(config.bond_prob * (1 << 32)))
    offsets = _offsets(d)
    origin = (t_max,) * d
    space = (side,) * d

    counts = np.zeros((t_max + 1,) + space, dtype=np.int64)
    survival_counts = np.zeros(t_max + 1, dtype=np.int64)
    size_sum = 0.0
    size_sqsum = 0.0
    truncated = 0

    n_blocks = (trials + _BLOCK_TRIALS - 1) // _BLOCK_TRIALS
    for block in range(n_blocks):
        block_trials = min(_BLOCK_TRIALS, trials - block * _BLOCK_TRIALS)
        reached = np.zeros((block_trials,) + space, dtype=bool)
        reached[(slice(None),) + origin] = True
        active = np.ones(block_trials, dtype=bool)
        counts[0][origin] += block_trials
        survival_counts[0] += block_trials
        per_trial_total = np.ones(block_trials, dtype=np.int64)
        for level in range(t_max):
            words = _bond_words(
                config.seed, level, block,
                (_BLOCK_TRIALS,) + space + (len(offsets),),
            )[:block_trials]
            occupied = _occupied(words, threshold)
            parents = reached & active[(slice(None),) + (None,) * d]
            reached = _grow_level(parents, occupied, offsets)
            sizes = reached.reshape(block_trials, -1).sum(axis=1)
            over = active & (sizes > config.site_budget)
            if over.any():
                truncated += int(over.sum())
                active &= ~over
                reached[over] = False
                sizes = reached.reshape(block_trials, -1).sum(axis=1)
            counts[level + 1] += reached.sum(axis=0)
            survival_counts[level + 1] += int((sizes > 0).sum())
            per_trial_total += sizes
        size_sum += float(per_trial_total.sum())
        size_sqsum += float((per_trial_total.astype(float) ** 2).sum())

    two_point: dict[tuple, tuple[float, float]] = {}
    for t in range(t_max + 1):
        level_counts = counts[t]
        for flat in np.flatnonzero(level_counts):
            idx = np.unravel_index(flat, space)
            coords = tuple(int(i) - t_max for i in idx)
            est = level_counts[idx] / trials
            err = math.sqrt(est * (1.0 - est) / trials)
            two_point[(*coords, t)] = (float(est), float(err))
    survival = {}
    for t in range(t_max + 1):
        est = survival_counts[t] / trials
        err = math.sqrt(est * (1.0 - est) / trials)
        survival[t] = (float(est), float(err))
    chi = size_sum / trials
    chi_var = max(size_sqsum / trials - chi ** 2, 0.0)
    chi_err = math.sqrt(chi_var / trials)
    return SimStats(
        config=config,
        two_point=two_point,
        survival=survival,
        chi_trunc=float(chi),
        chi_stderr=float(chi_err),
        truncated_trials=truncated,
    )


def coupling_violations(config: SimConfig, p_high: float, trials: int) -> int:
    """Count per-level inclusion failures of reached sets under shared words.

    With identical bond words and one threshold per parameter, the reached
    set at the smaller parameter must stay inside the larger one's at every
    level of every trial; any violation indicates broken stream alignment.
    """
    if p_high < config.p:
        raise ValueError("p_high must be >= config.p")
    high = SimConfig(config.d, p_high, config.t_max, trials, config.seed,
                     config.site_budget)
    d, t_max = config.d, config.t_max
    _check_memory(d, t_max)
    side = 2 * t_max + 1
    space = (side,) * d
    offsets = _offsets(d)
    origin = (t_max,) * d
    thr_lo = int(round(config.bond_prob * (1 << 32)))
    thr_hi = int(round(high.bond_prob * (1 << 32)))
    violations = 0
    n_blocks = (trials + _BLOCK_TRIALS - 1) // _BLOCK_TRIALS
    for block in range(n_blocks):
        block_trials = min(_BLOCK_TRIALS, trials - block * _BLOCK_TRIALS)
        lo = np.zeros((block_trials,) + space, dtype=bool)
        hi = np.zeros_like(lo)
        lo[(slice(None),) + origin] = True
        hi[(slice(None),) + origin] = True
        for level in range(t_max):
            words = _bond_words(config.seed, level, block,
                                (_BLOCK_TRIALS,) + space + (len(offsets),))[:block_trials]
            lo = _grow_level(lo, _occupied(words, thr_lo), offsets)
            hi = _grow_level(hi, _occupied(words, thr_hi), offsets)
            violations += int((lo & ~hi).sum())
    return violations


# -- exact oracles ---------------------------------------------------------------


def rw_two_point(d: int, p: float, x: tuple[int, ...], t: int) -> float:
    """Random-walk two-point function p^t D^(*t)(x), exact per-coordinate form.

    Zero for parity-violating or out-of-range x (including t = 0 off-origin).
    """
    if len(x) != d:
        raise ValueError(f"x has {len(x)} coordinates, expected {d}")
    if t < 0:
        raise ValueError("time must be >= 0")
    if t == 0:
        return 1.0 if all(c == 0 for c in x) else 0.0
    value = p ** t
    for coord in x:
        if abs(coord) > t or (t + coord) % 2 != 0:
            return 0.0
        value *= math.comb(t, (t + coord) // 2) / 2 ** t
    return value


def exact_two_step(d: int, p: float, x: tuple[int, ...]) -> float:
    """Exact probability of reaching (x, 2): paths through distinct midpoints
    use disjoint bonds, so the union is an independent-event complement."""
    if len(x) != d:
        raise ValueError(f"x has {len(x)} coordinates, expected {d}")
    midpoints = 1
    for coord in x:
        if coord == 0:
            midpoints *= 2
        elif abs(coord) == 2:
            midpoints *= 1
        else:
            return 0.0
    q = p * 2.0 ** (-d)
    return 1.0 - (1.0 - q * q) ** midpoints


def exact_dp_1d(p: float, t_max: int) -> dict[tuple[int, int], float]:
    """Exact 1-d two-point function by DP over the reached-set distribution.

    State space is all subsets of the parity sublattice of [-t, t]; cost
    grows like 4^t, so t_max is capped at 14.
    """
    if t_max > 14:
        raise ValueError(f"t_max={t_max} beyond the subset-DP budget (14)")
    if t_max < 0:
        raise ValueError("t_max must be >= 0")
    q = p * 0.5
    if not 0.0 <= q <= 1.0:
        raise ValueError(f"effective bond probability p/2 = {q} outside [0, 1]")
    phi: dict[tuple[int, int], float] = {(0, 0): 1.0}
    # Level s sites are x = -s, -s+2, ..., s; index i = (x + s) // 2.
    states: dict[int, float] = {1: 1.0}  # singleton {origin}
    for s in range(t_max):
        next_states: dict[int, float] = {}
        n_children = s + 2
        for mask, prob in states.items():
            if mask == 0:
                next_states[0] = next_states.get(0, 0.0) + prob
                continue
            reach = []
            for j in range(n_children):
                parents = ((mask >> (j - 1)) & 1 if j >= 1 else 0) + (
                    (mask >> j) & 1 if j <= s else 0
                )
                r = 1.0 - (1.0 - q) ** parents
                if r > 0.0:
                    reach.append((j, r))
            _scatter(next_states, prob, reach)
        states = next_states
        for mask, prob in states.items():
            m = mask
            while m:
                j = (m & -m).bit_length() - 1
                x = 2 * j - (s + 1)
                key = (x, s + 1)
                phi[key] = phi.get(key, 0.0) + prob
                m &= m - 1
    return phi


def _scatter(sink: dict[int, float], prob: float, reach: list[tuple[int, float]]) -> None:
    """Distribute prob over all outcomes of independently reached children."""
    outcomes = [(0, prob)]
    for j, r in reach:
        outcomes = [
            item
            for mask, pr in outcomes
            for item in ((mask, pr * (1.0 - r)), (mask | (1 << j), pr * r))
        ]
    for mask, pr in outcomes:
        sink[mask] = sink.get(mask, 0.0) + pr


def stats_to_json(stats: SimStats) -> str:
    return json.dumps(stats.to_json_dict(), indent=2) + "\n"
