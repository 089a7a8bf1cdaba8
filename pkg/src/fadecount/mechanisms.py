"""The four streaming counters over unbounded [0,1]-valued streams.

All four release a (possibly delayed) noisy prefix sum at every step:

* ``SimpleCounter``      — fresh Laplace draw per step, outputs lag one step.
* ``LogarithmicCounter`` — one draw per dyadic interval containing t.
* ``ExpirationCounter``  — the delayed, level-budgeted counter: outputs 0 for
  the first `delay` steps, then adds one draw per dyadic interval containing
  the release position, with level-l scale (1+l)^(1-level_exponent)/epsilon.
* ``BaselineCounter``    — windowed rounds: a fresh binary tree per round
  plus a once-per-round noisy prefix of everything before the round.

Mechanisms take no horizon: streams are unbounded, state is O(delay + log t),
and noise upkeep is amortized O(1) per step (a binary-counter argument: the
level-l entry is refreshed every 2^l steps).

Counters are deliberately generic over the numeric type of the inputs and of
the noise values handed to them: run them with floats for production, or
with exact rationals (``fractions.Fraction``) when replaying a run whose
outputs must be compared bit-for-bit.  Nothing in the update path forces a
float coercion.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass

import numpy as np

from .dyadic import floor_log2
from .noise import (keyed_noise, laplace_sample_array, prf_uniform,
                    prf_uniform_array)

# key domains, so draws of different kinds can never collide
DOMAIN_INTERVAL = 1   # (DOMAIN_INTERVAL, level, index)         interval noise
DOMAIN_STEP = 2       # (DOMAIN_STEP, step)                     per-step noise
DOMAIN_TREE = 3       # (DOMAIN_TREE, round, level, node)       baseline tree
DOMAIN_PAST = 4       # (DOMAIN_PAST, round)                    baseline past


@dataclass(frozen=True)
class MechanismParams:
    """Parameters of the delayed level-budgeted counter.

    epsilon         privacy parameter (> 0)
    level_exponent  exponent shaping per-level noise: the scale of a level-l
                    interval draw is (1+l)^(1-level_exponent) / epsilon.
                    1.0 gives every level the same scale; larger values
                    shrink noise on coarse levels at the price of faster
                    privacy-loss growth, and 0 is allowed.
    delay           number of initial steps released as exact 0 (>= 0)
    """

    epsilon: float
    level_exponent: float = 1.0
    delay: int = 0

    def __post_init__(self):
        if self.epsilon <= 0:
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")
        if self.level_exponent < 0:
            raise ValueError(
                f"level_exponent must be nonnegative, got {self.level_exponent}")
        if self.delay < 0 or int(self.delay) != self.delay:
            raise ValueError(f"delay must be a nonnegative integer, got {self.delay}")

    def level_scale(self, level: int) -> float:
        """Noise scale of a level-`level` interval draw."""
        return (1.0 + level) ** (1.0 - self.level_exponent) / self.epsilon


@dataclass(frozen=True)
class BaselineParams:
    """Windowed-baseline parameters: window length and the two budgets."""

    window: int
    eps_cur: float
    eps_past: float

    def __post_init__(self):
        if self.window < 1 or int(self.window) != self.window:
            raise ValueError(f"window must be a positive integer, got {self.window}")
        if self.eps_cur <= 0 or self.eps_past <= 0:
            raise ValueError("both eps values must be positive")

    @property
    def tree_depth(self) -> int:
        """Number of tree levels k = ceil(log2(window+1))."""
        return max(1, math.ceil(math.log2(self.window + 1)))


# ---------------------------------------------------------------------------
# noise sources


class SeededNoise:
    """Draws keyed Laplace noise deterministically from a 64-bit seed."""

    def __init__(self, seed: int):
        self.seed = int(seed)

    def draw(self, parts, scale):
        return keyed_noise(self.seed, parts, scale)


class ZeroNoise:
    """Forces every draw to exactly 0 — for exactness tests and debugging."""

    def draw(self, parts, scale):
        return 0


class RecordingNoise:
    """Wraps a source and remembers every draw in a ledger dict.

    The ledger maps the key parts tuple to the drawn value.  Within one run
    each key is drawn at most once by the counters, but the cache also makes
    that a guarantee rather than a convention.
    """

    def __init__(self, inner):
        self.inner = inner
        self.ledger: dict = {}

    def draw(self, parts, scale):
        if parts not in self.ledger:
            self.ledger[parts] = self.inner.draw(parts, scale)
        return self.ledger[parts]


class ReplayNoise:
    """Replays a ledger exactly; a missing key is a hard error."""

    def __init__(self, ledger: dict):
        self.ledger = ledger

    def draw(self, parts, scale):
        return self.ledger[parts]


# ---------------------------------------------------------------------------
# scalar counters


def _check_input(x):
    if not 0 <= x <= 1:
        raise ValueError(f"stream values must lie in [0,1], got {x!r}")


class SimpleCounter:
    """Fresh noise each step; output t is the prefix through t-1 plus Lap(1/eps).

    The first output is exactly 0 and every release lags the stream by one
    step; kept verbatim (not harmonized with the other counters' timing).
    """

    def __init__(self, params: MechanismParams, noise=None):
        self.params = params
        self.noise = noise if noise is not None else SeededNoise(0)
        self._t = 0
        self._prefix = 0

    def step(self, x):
        _check_input(x)
        self._t += 1
        if self._t == 1:
            out = 0
        else:
            z = self.noise.draw((DOMAIN_STEP, self._t - 1), 1.0 / self.params.epsilon)
            out = self._prefix + z
        self._prefix = self._prefix + x
        return out


class ExpirationCounter:
    """Delayed level-budgeted counter; the main mechanism.

    State: the last `delay` inputs, the prefix sum through the current
    release position p = t - delay, and one live noise value per level
    0..floor(log2 p).  Stepping refreshes exactly the levels whose interval
    boundary p crosses (levels 0..nu2(p), nu2 = number of trailing zero
    bits), so total redraws over P released positions are
    sum_p (nu2(p)+1) <= 2P.
    """

    def __init__(self, params: MechanismParams, noise=None):
        self.params = params
        self.noise = noise if noise is not None else SeededNoise(0)
        self._t = 0
        self._position = 0          # release position p = t - delay
        self._delayed_sum = 0       # sum of x_1..x_p
        self._buffer = deque()      # the delay most recent inputs
        self._active = {}           # level -> (interval index, noise value)
        self.redraws = 0

    @property
    def active_noise_count(self) -> int:
        return len(self._active)

    @property
    def buffer_len(self) -> int:
        return len(self._buffer)

    def step(self, x):
        _check_input(x)
        self._t += 1
        delay = self.params.delay
        if delay:
            self._buffer.append(x)
            if self._t <= delay:
                return 0
            x_rel = self._buffer.popleft()
        else:
            x_rel = x
        p = self._position = self._position + 1
        self._delayed_sum = self._delayed_sum + x_rel
        # levels whose containing interval changed at p: 0..nu2(p)
        refresh = (p & -p).bit_length()  # nu2(p) + 1
        for lvl in range(refresh):
            k = p >> lvl
            self._active[lvl] = (
                k, self.noise.draw((DOMAIN_INTERVAL, lvl, k),
                                   self.params.level_scale(lvl)))
            self.redraws += 1
        out = self._delayed_sum
        for _lvl, (_k, z) in self._active.items():
            out = out + z
        return out


class LogarithmicCounter(ExpirationCounter):
    """Undelayed counter with uniform per-level scale 1/epsilon."""

    def __init__(self, epsilon: float, noise=None):
        super().__init__(MechanismParams(epsilon, level_exponent=1.0, delay=0),
                         noise)


class BaselineCounter:
    """Windowed baseline: per-round binary tree plus a noisy past prefix.

    Round r covers steps (r-1)W+1 .. rW.  Inside a round the in-round prefix
    [1, s] is estimated by the standard binary tree over [1, W]: the
    decomposition of [1, s] follows the binary expansion of s (highest bit
    first), each node carrying one Lap(k/eps_cur) draw, k = ceil(log2(W+1)).
    At each round start r >= 2 the true prefix of everything before the
    round gets one fresh Lap(1/eps_past) draw, shared by the round's W
    outputs; round 1 outputs omit the past term entirely.
    """

    def __init__(self, params: BaselineParams, noise=None):
        self.params = params
        self.noise = noise if noise is not None else SeededNoise(0)
        self._t = 0
        self._total_prefix = 0     # sum of all inputs seen so far
        self._round = 0
        self._round_sum = 0        # in-round prefix
        self._past_estimate = 0    # c_r, noisy prefix before current round
        self._tree = {}            # (level, node index) -> noise value

    def step(self, x):
        _check_input(x)
        self._t += 1
        w = self.params.window
        r = (self._t + w - 1) // w
        s = self._t - (r - 1) * w
        if s == 1:
            self._tree.clear()
            self._round_sum = 0
            self._round = r
            if r >= 2:
                z = self.noise.draw((DOMAIN_PAST, r), 1.0 / self.params.eps_past)
                self._past_estimate = self._total_prefix + z
        self._total_prefix = self._total_prefix + x
        self._round_sum = self._round_sum + x
        k = self.params.tree_depth
        scale = k / self.params.eps_cur
        out = (0 if r == 1 else self._past_estimate) + self._round_sum
        # walk the binary expansion of s, highest bit first
        start = 1
        for lvl in range(s.bit_length() - 1, -1, -1):
            if s >> lvl & 1:
                node = ((start - 1) >> lvl) + 1
                key = (lvl, node)
                if key not in self._tree:
                    self._tree[key] = self.noise.draw(
                        (DOMAIN_TREE, r, lvl, node), scale)
                out = out + self._tree[key]
                start += 1 << lvl
        return out


# ---------------------------------------------------------------------------
# vectorized runners (single stream / Monte Carlo batches)
#
# These produce exactly the same numbers as the scalar counters above — the
# noise keys and the PRF lane are shared — but evaluate whole streams with
# numpy.  Used by the CLI on long streams and by the calibration Monte
# Carlo, where stepping a Python loop 10^4 x 1024 times would dominate.


def expiration_noise_totals(params: MechanismParams, positions: int,
                            seed: int) -> np.ndarray:
    """Total interval noise at release positions 1..positions (index 0 unused)."""
    total = np.zeros(positions + 1)
    if positions < 1:
        return total
    p = np.arange(positions + 1, dtype=np.int64)
    for lvl in range(floor_log2(positions) + 1):
        hi = positions >> lvl
        u = prf_uniform_array(seed, (DOMAIN_INTERVAL, lvl),
                              np.arange(hi + 1, dtype=np.uint64))
        z = laplace_sample_array(params.level_scale(lvl), u)
        idx = p >> lvl
        live = idx >= 1
        total[live] += z[idx[live]]
    total[0] = 0.0
    return total


def run_expiration(params: MechanismParams, xs: np.ndarray,
                   seed: int) -> np.ndarray:
    """Released values of ExpirationCounter over the whole stream xs."""
    T = len(xs)
    out = np.zeros(T)
    P = T - params.delay
    if P >= 1:
        noise = expiration_noise_totals(params, P, seed)
        delayed_prefix = np.cumsum(xs[:P])
        out[params.delay:] = delayed_prefix + noise[1:]
    return out


def run_simple(params: MechanismParams, xs: np.ndarray, seed: int) -> np.ndarray:
    T = len(xs)
    out = np.zeros(T)
    if T >= 2:
        u = prf_uniform_array(seed, (DOMAIN_STEP,),
                              np.arange(1, T, dtype=np.uint64))
        z = laplace_sample_array(1.0 / params.epsilon, u)
        out[1:] = np.cumsum(xs[:-1]) + z
    return out


def expiration_max_and_mse_batch(params: MechanismParams, positions: int,
                                 seeds) -> tuple[np.ndarray, np.ndarray]:
    """Per-seed (max |noise|, mean noise^2) over release positions 1..positions.

    The workhorse of the error-agreement and lower-bound Monte Carlos: for a
    zero stream the released error at position p is exactly the interval
    noise total, so these statistics need no stream at all.
    """
    seeds = np.asarray(list(seeds), dtype=np.uint64)
    maxes = np.empty(len(seeds))
    mses = np.empty(len(seeds))
    p = np.arange(1, positions + 1, dtype=np.int64)
    idxs = [p >> lvl for lvl in range(floor_log2(positions) + 1)]
    for i, s in enumerate(seeds):
        total = np.zeros(positions)
        for lvl, idx in enumerate(idxs):
            hi = positions >> lvl
            u = prf_uniform_array(int(s), (DOMAIN_INTERVAL, lvl),
                                  np.arange(hi + 1, dtype=np.uint64))
            z = laplace_sample_array(params.level_scale(lvl), u)
            live = idx >= 1
            total[live] += z[idx[live]]
        np.abs(total, out=total)
        maxes[i] = total.max()
        mses[i] = np.mean(total * total)
    return maxes, mses
