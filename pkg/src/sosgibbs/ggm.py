"""Gradient Gibbs measures built from a period-4 boundary law on finite balls.

For a ball of radius R with boundary shell W_R, the weight of an increment
assignment zeta on the ball's edges is

    sum_{s in Z_4} prod_{y in W_R} l(s + path_sum(y))  *  prod_b theta^|zeta_b|

with l = (1, b^k, 1, a^k) indexed by residue mod 4.  Because l only sees
residues, single-edge quantities and sampling reduce to a dynamic program
over Z_4 classes with closed-form class weights, and need no truncation.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .boundary import Params, PeriodicBoundaryLaw
from .tree import TreeBall, build_ball

__all__ = [
    "TableTooLarge", "MarginalTable", "EdgeMarginal", "SampleResult",
    "class_weights", "law_weights", "marginal_table", "class_table",
    "edge_marginal_exact", "consistency_check", "sample", "DEFAULT_BUDGET",
]

DEFAULT_BUDGET = 10_000_000


class TableTooLarge(ValueError):
    """The requested joint table exceeds the entry budget."""


def class_weights(theta: float, M: Optional[int] = None) -> np.ndarray:
    """T(d) = sum of theta^|j| over integers j = d (mod 4), optionally |j| <= M."""
    th = float(theta)
    if M is None:
        den = 1.0 - th ** 4
        odd = (th + th ** 3) / den
        return np.array([1.0 + 2.0 * th ** 4 / den, odd, 2.0 * th ** 2 / den, odd])
    js = np.arange(-M, M + 1)
    return np.bincount(js % 4, weights=th ** np.abs(js), minlength=4)


def law_weights(law: PeriodicBoundaryLaw, k: int, power: Optional[int] = None) -> np.ndarray:
    """Boundary-law values on Z_4 classes: (1, b^p, 1, a^p) with p = k by default.

    ``power=1`` gives the alternative l = u reading, kept for comparison.
    """
    p = k if power is None else power
    return np.array([1.0, float(law.b ** p), 1.0, float(law.a ** p)])


def _conv(T: np.ndarray, m: np.ndarray) -> np.ndarray:
    # (c) -> sum_d T(d) m(c + d)
    return np.array([sum(T[d] * m[(c + d) % 4] for d in range(4)) for c in range(4)])


def _upward(l: np.ndarray, T: np.ndarray, k: int, top: int, bottom: int) -> dict[int, np.ndarray]:
    """Messages m[t] for top <= t <= bottom; m[bottom] = l, each rescaled to max 1."""
    m = {bottom: l / l.max()}
    for t in range(bottom - 1, top - 1, -1):
        v = _conv(T, m[t + 1]) ** k
        m[t] = v / v.max()
    return m


@dataclass
class MarginalTable:
    """Joint law of the increments on ``edges``.

    ``probs`` is a dense array with one axis per edge (canonical order);
    axis values are ``support`` (increments -M..M, or classes 0..3 when
    ``mode == "class"``).
    """

    edges: tuple[tuple[int, int], ...]
    support: np.ndarray
    probs: np.ndarray
    truncation: Optional[int]
    tail_bound: float
    normalizer: float
    mode: str = "gradient"

    @property
    def n_entries(self) -> int:
        return int(self.probs.size)

    def prob(self, zeta) -> float:
        idx = tuple(int(np.searchsorted(self.support, z)) for z in zeta)
        for i, z in zip(idx, zeta):
            if i >= len(self.support) or self.support[i] != z:
                return 0.0
        return float(self.probs[idx])

    def flipped(self) -> np.ndarray:
        """The table under zeta -> -zeta."""
        if self.mode == "class":
            perm = np.array([0, 3, 2, 1])
            out = self.probs
            for ax in range(out.ndim):
                out = np.take(out, perm, axis=ax)
            return out
        return self.probs[(slice(None, None, -1),) * self.probs.ndim]

    def flip_asymmetry(self) -> float:
        return float(np.abs(self.probs - self.flipped()).max())

    def edge_marginal(self, edge_pos: int) -> np.ndarray:
        axes = tuple(a for a in range(self.probs.ndim) if a != edge_pos)
        return self.probs.sum(axis=axes)

    def entries(self):
        for idx in np.ndindex(*self.probs.shape):
            yield tuple(int(self.support[i]) for i in idx), float(self.probs[idx])

    def to_dict(self) -> dict:
        return {
            "edges": [list(e) for e in self.edges],
            "mode": self.mode,
            "truncation": self.truncation,
            "tail_bound": self.tail_bound,
            "entries": [{"zeta": z, "p": p} for z, p in self.entries()],
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)


def _joint(ball: TreeBall, leaf: np.ndarray, per_edge: np.ndarray, values: np.ndarray,
           budget: int) -> tuple[np.ndarray, float]:
    E = ball.n_edges
    L = len(values)
    if float(L) ** E > budget:
        raise TableTooLarge(
            f"joint table would have {L}^{E} = {float(L) ** E:.3g} entries (budget {budget}); "
            "use edge_marginal_exact for single-edge quantities")

    def axis(e_pos, arr):
        shape = [1] * E
        shape[e_pos] = L
        return arr.reshape(shape)

    cls = values % 4
    psum = {0: np.zeros([1] * E, dtype=np.int64)}
    for v in range(1, ball.n_vertices):
        psum[v] = psum[ball.parent[v]] + axis(v - 1, cls)
    full = tuple([L] * E)
    bsum = np.zeros(full)
    for s in range(4):
        acc = np.ones([1] * E)
        for y in ball.boundary:
            acc = acc * leaf[(s + psum[y]) % 4]
        bsum += np.broadcast_to(acc, full)
    w = bsum
    for e in range(E):
        w = w * axis(e, per_edge)
    total = float(w.sum())
    return w / total, total


def marginal_table(ball: TreeBall, law: PeriodicBoundaryLaw, params: Params, M: int,
                   budget: int = DEFAULT_BUDGET, power: Optional[int] = None) -> MarginalTable:
    """Joint law of all increments of a radius >= 1 ball, increments cut at |zeta_b| <= M.

    ``tail_bound`` bounds the probability mass outside the box.
    """
    if ball.radius < 1:
        raise ValueError("ball radius must be at least 1")
    if M < 1:
        raise ValueError("truncation M must be at least 1")
    _check_ball(ball, params)
    th = float(params.theta)
    l = law_weights(law, params.k, power)
    values = np.arange(-M, M + 1)
    probs, total = _joint(ball, l, th ** np.abs(values), values, budget)
    ratio = (l.max() / l.min()) ** len(ball.boundary)
    tail = min(1.0, ball.n_edges * ratio * 2 * th ** (M + 1) / (1 + th))
    return MarginalTable(ball.edges, values, probs, M, tail, 1.0 / total)


def class_table(ball: TreeBall, law: PeriodicBoundaryLaw, params: Params,
                budget: int = DEFAULT_BUDGET) -> MarginalTable:
    """Exact joint law of the increment residues mod 4 (no truncation)."""
    if ball.radius < 1:
        raise ValueError("ball radius must be at least 1")
    _check_ball(ball, params)
    values = np.arange(4)
    probs, total = _joint(ball, law_weights(law, params.k), class_weights(params.theta),
                          values, budget)
    return MarginalTable(ball.edges, values, probs, None, 0.0, 1.0 / total, mode="class")


def _check_ball(ball: TreeBall, params: Params) -> None:
    if ball.k != params.k:
        raise ValueError(f"ball has order {ball.k} but params have k={params.k}")


@dataclass(frozen=True)
class EdgeMarginal:
    """Law of one increment: P(j) = class_mass[j % 4] * theta^|j| / T(j % 4).

    Within a residue class the law is two-sided geometric with ratio theta
    per unit step, so the representation is exact on all of Z.
    """

    edge: tuple[int, int]
    theta: float
    class_mass: np.ndarray

    def pmf(self, j):
        j = np.asarray(j)
        T = class_weights(self.theta)
        return self.class_mass[j % 4] * self.theta ** np.abs(j) / T[j % 4]

    def probs(self, M: int) -> dict[int, float]:
        js = np.arange(-M, M + 1)
        return dict(zip(js.tolist(), self.pmf(js).tolist()))

    def mean(self) -> float:
        js = np.arange(-400, 401)
        return float((js * self.pmf(js)).sum())


def edge_marginal_exact(law: PeriodicBoundaryLaw, params: Params, ball: TreeBall,
                        edge) -> EdgeMarginal:
    """Untruncated single-edge law by message passing over Z_4 classes."""
    _check_ball(ball, params)
    child = ball.edge_index(edge) + 1
    k, R = params.k, ball.radius
    T = class_weights(params.theta)
    m = _upward(law_weights(law, k), T, k, 1, R)
    t_edge = ball.depth[child] - 1
    D = np.ones(4)
    for t in range(t_edge + 1):
        nchild = k + 1 if t == 0 else k
        Dt = D * _conv(T, m[t + 1]) ** (nchild - 1)
        if t == t_edge:
            w = np.array([sum(Dt[c] * m[t + 1][(c + d) % 4] for c in range(4)) for d in range(4)])
            break
        D = np.array([sum(Dt[c] * T[(c2 - c) % 4] for c in range(4)) for c2 in range(4)])
        D = D / D.max()
    mass = T * w
    return EdgeMarginal((ball.parent[child], child), float(params.theta), mass / mass.sum())


def consistency_check(law: PeriodicBoundaryLaw, params: Params, radius_small: int,
                      radius_big: int, M: int, power: Optional[int] = None,
                      budget: int = DEFAULT_BUDGET) -> float:
    """Max entry gap between the small-ball table and the big-ball table marginalized onto it.

    Both tables use the same cut |zeta_b| <= M.  The outer edges of the big
    ball are summed out subtree by subtree, which equals summing the
    materialized big table over those axes.
    """
    if not 1 <= radius_small < radius_big:
        raise ValueError("need 1 <= radius_small < radius_big")
    k = params.k
    small_ball = build_ball(k, radius_small)
    direct = marginal_table(small_ball, law, params, M, budget, power)
    l = law_weights(law, k, power)
    TM = class_weights(params.theta, M)
    outer = _upward(l, TM, k, radius_small, radius_big)[radius_small]
    th = float(params.theta)
    values = np.arange(-M, M + 1)
    marg, _ = _joint(small_ball, outer, th ** np.abs(values), values, budget)
    return float(np.abs(direct.probs - marg).max())


@dataclass
class SampleResult:
    edges: tuple[tuple[int, int], ...]
    samples: np.ndarray  # (n, n_edges) int64, canonical edge order
    seed: int
    frequencies: dict = field(default_factory=dict)

    def edge_frequencies(self, edge_pos: int) -> dict[int, float]:
        vals, counts = np.unique(self.samples[:, edge_pos], return_counts=True)
        n = self.samples.shape[0]
        return {int(v): c / n for v, c in zip(vals, counts)}

    def to_csv(self, path) -> None:
        header = ",".join(f"e{p}_{c}" for p, c in self.edges)
        np.savetxt(path, self.samples, fmt="%d", delimiter=",", header=header, comments="")


def _increment_in_class(d: np.ndarray, theta: float, rng: np.random.Generator) -> np.ndarray:
    # j = d + 4n (n >= 0) with weight theta^(d+4n), or j = d - 4 - 4n with weight theta^(4-d+4n)
    q = theta ** 4
    pos = theta ** d
    neg = theta ** (4 - d)
    up = rng.random(d.shape) < pos / (pos + neg)
    n = np.floor(np.log1p(-rng.random(d.shape)) / np.log(q)).astype(np.int64)
    return np.where(up, d + 4 * n, d - 4 - 4 * n)


def sample(ball: TreeBall, law: PeriodicBoundaryLaw, params: Params, n: int,
           seed: int) -> SampleResult:
    """Exact i.i.d. draws of all increments on ``ball``.

    Residue classes are drawn root-down from the class dynamic program, then
    each increment within its class by inverse CDF; one PCG64 stream per call.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    if ball.radius < 1:
        raise ValueError("ball radius must be at least 1")
    _check_ball(ball, params)
    k, R = params.k, ball.radius
    th = float(params.theta)
    T = class_weights(th)
    m = _upward(law_weights(law, k), T, k, 1, R)
    rng = np.random.default_rng(seed)

    root = _conv(T, m[1]) ** (k + 1)
    cum = np.cumsum(root / root.sum())
    cls = np.empty((n, ball.n_vertices), dtype=np.int64)
    cls[:, 0] = (rng.random(n)[:, None] > cum[None, :3]).sum(axis=1)

    kernels = {}
    for t in range(1, R + 1):
        K = np.array([[T[(cw - cp) % 4] * m[t][cw] for cw in range(4)] for cp in range(4)])
        kernels[t] = np.cumsum(K / K.sum(axis=1, keepdims=True), axis=1)

    out = np.empty((n, ball.n_edges), dtype=np.int64)
    for v in range(1, ball.n_vertices):
        cp = cls[:, ball.parent[v]]
        cdf = kernels[ball.depth[v]][cp]
        cls[:, v] = (rng.random(n)[:, None] > cdf[:, :3]).sum(axis=1)
        d = (cls[:, v] - cp) % 4
        out[:, v - 1] = _increment_in_class(d, th, rng)
    res = SampleResult(ball.edges, out, seed)
    res.frequencies = {e: res.edge_frequencies(i) for i, e in enumerate(ball.edges)}
    return res
