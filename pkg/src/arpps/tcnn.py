"""Transiently chaotic network solving the feature-matching assignment grid.

An M x N grid of neurons encodes candidate matches between M reference
descriptors and N scene descriptors; v_ij = 1 means reference i matches
scene j. Row/column penalty couplings push the grid towards a one-to-one
assignment while the compatibility bias rewards good matches. A scalar
self-feedback weight z starts large (chaotic search) and decays
geometrically, after which the dynamics settle like a plain Hopfield net.

The damped membrane update per neuron is
    y(t+1) = k*y(t) + alpha*(W x(t) + I) - z(t)*(x(t) - i0)
    z(t+1) = (1 - beta)*z(t)
with all neurons updated synchronously, and the output activation is the
steep sigmoid x = 1 / (1 + exp(-y / epsilon)). A configuration switch
selects the variant activation x = 1 / (1 + exp(-y * (1 + epsilon)))
instead; the steep form is the default because epsilon acts as the
steepness parameter only there.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

EXHAUSTIVE_LIMIT = 25       # max M*N for all-binary-matrix enumeration
PERMUTATION_LIMIT = 12      # max M and N for assignment-only search

_X_FLOOR = np.nextafter(0.0, 1.0)
_X_CEIL = np.nextafter(1.0, 0.0)


@dataclass(frozen=True)
class TcnnParams:
    k: float = 0.9                  # membrane damping, [0, 1]
    alpha: float = 0.015            # input scaling, > 0
    beta: float = 0.015             # self-feedback decay, (0, 1)
    i0: float = 0.65                # self-feedback set point
    epsilon: float = 1.0 / 250.0    # activation steepness, > 0
    z0: float = 0.08                # initial self-feedback weight, >= 0
    max_steps: int = 3000
    binarize_threshold: float = 0.1  # saturation distance from {0, 1}
    printed_activation: bool = False  # use the 1/(1+e^{-y(1+eps)}) variant

    def __post_init__(self) -> None:
        if not (0.0 <= self.k <= 1.0):
            raise ValueError(f"k must be in [0, 1], got {self.k}")
        if self.alpha <= 0.0:
            raise ValueError(f"alpha must be positive, got {self.alpha}")
        if not (0.0 < self.beta < 1.0):
            raise ValueError(f"beta must be in (0, 1), got {self.beta}")
        if self.i0 <= 0.0:
            raise ValueError(f"i0 must be positive, got {self.i0}")
        if self.epsilon <= 0.0:
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")
        if self.z0 < 0.0:
            raise ValueError(f"z0 must be non-negative, got {self.z0}")
        if not (0.0 < self.binarize_threshold < 1.0):
            raise ValueError(f"binarize_threshold must be in (0, 1), got {self.binarize_threshold}")

    def activate(self, y: np.ndarray) -> np.ndarray:
        # exp overflow gives inf and the correct limit 0 after division
        with np.errstate(over="ignore"):
            if self.printed_activation:
                x = 1.0 / (1.0 + np.exp(-y * (1.0 + self.epsilon)))
            else:
                x = 1.0 / (1.0 + np.exp(-y / self.epsilon))
        # the logistic never reaches 0 or 1; keep the float image inside the
        # open interval too (rounding would cross it once |y|/eps > ~37)
        return np.clip(x, _X_FLOOR, _X_CEIL)


@dataclass
class TcnnState:
    x: np.ndarray       # outputs in (0, 1), shape (M, N)
    y: np.ndarray       # internal states, shape (M, N)
    z: float            # shared self-feedback weight, >= 0
    t: int = 0


@dataclass(frozen=True)
class MatchProblem:
    """Reference/scene descriptor sets plus their compatibility matrix."""

    g: np.ndarray       # (M, dim)
    s: np.ndarray       # (N, dim)
    c: np.ndarray       # (M, N), entries in [0, 1]

    def __post_init__(self) -> None:
        if self.g.ndim != 2 or self.s.ndim != 2 or self.g.shape[1] != self.s.shape[1]:
            raise ValueError("descriptor sets must be 2-D with equal dimension")
        m, n = self.g.shape[0], self.s.shape[0]
        if m < 1 or n < 1:
            raise ValueError("need at least one descriptor on each side")
        if self.c.shape != (m, n):
            raise ValueError(f"compatibility must be {m}x{n}, got {self.c.shape}")
        if np.any(self.c < 0.0) or np.any(self.c > 1.0):
            raise ValueError("compatibility entries must lie in [0, 1]")

    @property
    def m(self) -> int:
        return self.g.shape[0]

    @property
    def n(self) -> int:
        return self.s.shape[0]

    @classmethod
    def from_descriptors(cls, g, s, sigma: float = 0.5) -> "MatchProblem":
        """Gaussian compatibility c_ij = exp(-|g_i - s_j|^2 / (2 sigma^2))."""
        g = np.asarray(g, dtype=np.float64)
        s = np.asarray(s, dtype=np.float64)
        if sigma <= 0.0:
            raise ValueError(f"sigma must be positive, got {sigma}")
        d2 = np.sum((g[:, None, :] - s[None, :, :]) ** 2, axis=2)
        return cls(g=g, s=s, c=np.exp(-d2 / (2.0 * sigma * sigma)))


@dataclass(frozen=True)
class MatchMatrix:
    v: np.ndarray       # (M, N) binary
    converged: bool
    steps_used: int

    def pairs(self) -> list[tuple[int, int]]:
        return [(int(i), int(j)) for i, j in np.argwhere(self.v == 1)]


@dataclass(frozen=True)
class HopfieldWeights:
    w: np.ndarray       # (MN, MN), symmetric, zero diagonal
    i_bias: np.ndarray  # (MN,)
    shape: tuple[int, int]


def build_matching_network(problem: MatchProblem, a_row: float, a_col: float,
                           b_data: float) -> HopfieldWeights:
    """Couplings for the assignment grid.

    Neurons sharing a row repel with -a_row, neurons sharing a column with
    -a_col, and each neuron gets bias (a_row + a_col)/2 + b_data * c_ij.
    The half-sum constant is what makes the network energy
    -x'Wx/2 - I'x coincide with matching_energy on binary states (up to a
    constant): with zero self-coupling, the quadratic penalty loses a
    x_ij^2 term that the linear bias must absorb at half weight. A
    full-sum constant instead rewards every extra active neuron, and the
    dynamics then prefer doubly-assigned grids over assignments.
    """
    if a_row <= 0.0 or a_col <= 0.0 or b_data <= 0.0:
        raise ValueError("penalty/reward coefficients must all be positive")
    m, n = problem.m, problem.n
    mn = m * n
    w = np.zeros((mn, mn))
    rows = np.arange(mn) // n
    cols = np.arange(mn) % n
    same_row = rows[:, None] == rows[None, :]
    same_col = cols[:, None] == cols[None, :]
    w[same_row] -= a_row
    w[same_col] -= a_col
    np.fill_diagonal(w, 0.0)
    i_bias = 0.5 * (a_row + a_col) + b_data * problem.c.reshape(-1)
    return HopfieldWeights(w=w, i_bias=i_bias, shape=(m, n))


def matching_energy(v: np.ndarray, problem: MatchProblem, a_row: float,
                    a_col: float, b_data: float) -> float:
    """Quadratic assignment energy: row/column deviation penalties minus
    the compatibility reward. Defined for any binary (or relaxed) v."""
    v = np.asarray(v, dtype=np.float64)
    row_dev = v.sum(axis=1) - 1.0
    col_dev = v.sum(axis=0) - 1.0
    return float(0.5 * a_row * np.dot(row_dev, row_dev)
                 + 0.5 * a_col * np.dot(col_dev, col_dev)
                 - b_data * np.sum(problem.c * v))


def initial_state(problem: MatchProblem, params: TcnnParams, seed: int = 0) -> TcnnState:
    """Seeded small uniform y perturbation; breaks grid symmetry."""
    rng = np.random.default_rng(seed)
    y = rng.uniform(-0.01, 0.01, size=(problem.m, problem.n))
    return TcnnState(x=params.activate(y), y=y, z=params.z0, t=0)


def tcnn_step(state: TcnnState, weights: HopfieldWeights, params: TcnnParams) -> TcnnState:
    """One synchronous update of every neuron from the time-t values."""
    m, n = weights.shape
    if state.x.shape != (m, n):
        raise ValueError(f"state shape {state.x.shape} does not match network {weights.shape}")
    x_flat = state.x.reshape(-1)
    net = weights.w @ x_flat + weights.i_bias
    y_next = (params.k * state.y.reshape(-1)
              + params.alpha * net
              - state.z * (x_flat - params.i0))
    if not np.all(np.isfinite(y_next)):
        raise FloatingPointError("internal state became non-finite")
    y_next = y_next.reshape(m, n)
    return TcnnState(
        x=params.activate(y_next),
        y=y_next,
        z=(1.0 - params.beta) * state.z,
        t=state.t + 1,
    )


STABLE_STEPS = 10


def run_matching(problem: MatchProblem, params: TcnnParams | None = None,
                 a_row: float = 1.0, a_col: float = 1.0, b_data: float = 0.5,
                 seed: int = 0) -> MatchMatrix:
    """Iterate the chaotic dynamics until the outputs saturate and the
    binarized pattern holds for STABLE_STEPS consecutive steps, or until
    max_steps; non-convergence is reported, not raised."""
    params = params or TcnnParams()
    weights = build_matching_network(problem, a_row, a_col, b_data)
    state = initial_state(problem, params, seed)
    thr = params.binarize_threshold
    stable = 0
    last_pattern: np.ndarray | None = None
    while state.t < params.max_steps:
        state = tcnn_step(state, weights, params)
        saturated = bool(np.all((state.x <= thr) | (state.x >= 1.0 - thr)))
        if saturated:
            pattern = (state.x >= 0.5).astype(np.int8)
            if last_pattern is not None and np.array_equal(pattern, last_pattern):
                stable += 1
            else:
                stable = 1
            last_pattern = pattern
            if stable >= STABLE_STEPS:
                return MatchMatrix(v=pattern, converged=True, steps_used=state.t)
        else:
            stable = 0
            last_pattern = None
    return MatchMatrix(v=(state.x >= 0.5).astype(np.int8), converged=False,
                       steps_used=state.t)


def brute_force_match(problem: MatchProblem, a_row: float = 1.0, a_col: float = 1.0,
                      b_data: float = 0.5, mode: str = "exhaustive") -> MatchMatrix:
    """Exact minimizer of matching_energy.

    mode="exhaustive" enumerates every binary matrix (M*N <= 25);
    mode="permutations" searches one-to-one full assignments only
    (M, N <= 12) via subset DP. Ties break towards the candidate that
    appears first in ascending enumeration order of the flattened bits.
    """
    m, n = problem.m, problem.n
    if mode == "exhaustive":
        if m * n > EXHAUSTIVE_LIMIT:
            raise ValueError(
                f"exhaustive mode limited to M*N <= {EXHAUSTIVE_LIMIT}, got {m * n}")
        return _exhaustive_min(problem, a_row, a_col, b_data)
    if mode == "permutations":
        if m > PERMUTATION_LIMIT or n > PERMUTATION_LIMIT:
            raise ValueError(
                f"permutation mode limited to M, N <= {PERMUTATION_LIMIT}, got {m}x{n}")
        return _assignment_min(problem, a_row, a_col, b_data)
    raise ValueError(f"unknown mode {mode!r}")


def _exhaustive_min(problem: MatchProblem, a_row: float, a_col: float,
                    b_data: float) -> MatchMatrix:
    m, n = problem.m, problem.n
    mn = m * n
    c_flat = problem.c.reshape(-1)
    best_e = math.inf
    best_code = 0
    chunk = 1 << 20
    # bit k of the code is flattened cell k, most significant bit first,
    # so ascending codes enumerate flattened patterns lexicographically
    shifts = np.arange(mn - 1, -1, -1, dtype=np.uint64)
    for start in range(0, 1 << mn, chunk):
        codes = np.arange(start, min(start + chunk, 1 << mn), dtype=np.uint64)
        bits = ((codes[:, None] >> shifts[None, :]) & 1).astype(np.float64)
        grids = bits.reshape(-1, m, n)
        row_dev = grids.sum(axis=2) - 1.0
        col_dev = grids.sum(axis=1) - 1.0
        e = (0.5 * a_row * np.sum(row_dev ** 2, axis=1)
             + 0.5 * a_col * np.sum(col_dev ** 2, axis=1)
             - b_data * bits @ c_flat)
        i = int(np.argmin(e))
        if e[i] < best_e:
            best_e = float(e[i])
            best_code = int(codes[i])
    v = np.array([(best_code >> int(s)) & 1 for s in shifts], dtype=np.int8).reshape(m, n)
    return MatchMatrix(v=v, converged=True, steps_used=0)


def _assignment_min(problem: MatchProblem, a_row: float, a_col: float,
                    b_data: float) -> MatchMatrix:
    """Best full one-to-one assignment by DP over used-column subsets."""
    c = problem.c
    transposed = problem.m > problem.n
    if transposed:
        c = c.T
    m, n = c.shape
    size = 1 << n
    inf = math.inf
    dp = np.full(size, inf)
    dp[0] = 0.0
    choice = np.full((m, size), -1, dtype=np.int32)
    for i in range(m):
        nxt = np.full(size, inf)
        for mask in range(size):
            if dp[mask] == inf or bin(mask).count("1") != i:
                continue
            for j in range(n):
                bit = 1 << j
                if mask & bit:
                    continue
                cost = dp[mask] - b_data * c[i, j]
                new = mask | bit
                # ">=" prefers the larger column index on ties, which is the
                # lexicographically smaller flattened row vector
                if cost <= nxt[new]:
                    nxt[new] = cost
                    choice[i][new] = j
        dp = nxt
    full_masks = [mask for mask in range(size) if bin(mask).count("1") == m]
    best_mask = min(full_masks, key=lambda mk: dp[mk])
    cols = []
    mask = best_mask
    for i in range(m - 1, -1, -1):
        j = int(choice[i][mask])
        cols.append(j)
        mask ^= 1 << j
    cols.reverse()
    v = np.zeros((m, n), dtype=np.int8)
    for i, j in enumerate(cols):
        v[i, j] = 1
    if transposed:
        v = v.T
    return MatchMatrix(v=v, converged=True, steps_used=0)


def nn_baseline_match(problem: MatchProblem, ratio_threshold: float = 0.8) -> MatchMatrix:
    """Exact nearest-neighbour matching with ratio test and mutual-best filter.

    With a single scene descriptor there is no second neighbour, so the
    ratio test is skipped and the match accepted.
    """
    g, s = problem.g, problem.s
    m, n = problem.m, problem.n
    d = np.sqrt(np.sum((g[:, None, :] - s[None, :, :]) ** 2, axis=2))
    v = np.zeros((m, n), dtype=np.int8)
    best_ref_for_scene = np.argmin(d, axis=0)
    for i in range(m):
        order = np.argsort(d[i])
        j = int(order[0])
        if n > 1:
            d1, d2 = d[i, j], d[i, order[1]]
            if d2 == 0.0 or d1 / d2 >= ratio_threshold:
                continue
        if int(best_ref_for_scene[j]) != i:
            continue
        v[i, j] = 1
    return MatchMatrix(v=v, converged=True, steps_used=0)


def separable_problem(seed: int, m: int, n: int, dim: int = 4,
                      min_margin: float = 0.5, sigma: float = 0.5) -> MatchProblem:
    """Seeded synthetic instance whose planted matches dominate each row's
    compatibility by at least min_margin; used by benchmarks and tests."""
    rng = np.random.default_rng(seed)
    for _ in range(1000):
        g = rng.uniform(-3.0, 3.0, size=(m, dim))
        perm = rng.permutation(n)[:m]
        s = rng.uniform(-3.0, 3.0, size=(n, dim))
        s[perm] = g + rng.normal(0.0, 0.02, size=(m, dim))
        problem = MatchProblem.from_descriptors(g, s, sigma=sigma)
        c = problem.c
        planted = c[np.arange(m), perm]
        others = c.copy()
        others[np.arange(m), perm] = -1.0
        if np.all(planted - others.max(axis=1) >= min_margin):
            return problem
    raise RuntimeError(f"could not build a separable instance for seed {seed}")


def row_col_sums_ok(v: np.ndarray) -> bool:
    return bool(np.all(v.sum(axis=1) <= 1) and np.all(v.sum(axis=0) <= 1))
