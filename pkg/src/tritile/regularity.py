"""Regularity diagnostics for bipartite pairs at desk scale.

All thresholds are exact: ``epsilon`` and ``delta`` are turned into
fractions, subset-size conditions are strict (``|X| > eps |A|``) and
densities are compared with integer arithmetic.  Subsets ``X ⊆ A``,
``Y ⊆ B`` may be the whole side.

For a fixed ``X`` and size ``k`` the extremal ``e(X, Y)`` over ``|Y| = k`` is
attained by taking the ``k`` vertices of ``B`` with the most (or fewest)
neighbours in ``X``, so only ``X`` has to be enumerated.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import _pykernels, kernels
from .checks import Violation
from .graph import BipartitePair

EXHAUSTIVE_CAP = 16
_C_LIMITS = (31, 64)
_BATCH = 1024


MAX_DENOMINATOR = 10**9  # keeps the kernels' 64-bit products exact


def as_fraction(x) -> Fraction:
    if isinstance(x, float):
        x = Fraction(repr(x))
    x = Fraction(x)
    if x.denominator > MAX_DENOMINATOR:
        raise ValueError(f"{x} has a denominator above {MAX_DENOMINATOR}")
    return x


def _min_size(eps: Fraction, n: int) -> int:
    """Smallest integer ``s`` with ``s > eps * n``."""
    return math.floor(eps * n) + 1


def _as_pair(pair) -> BipartitePair:
    if isinstance(pair, BipartitePair):
        return pair
    return BipartitePair(np.asarray(pair, dtype=bool))


@dataclass(frozen=True)
class RegularityWitness:
    X: tuple[int, ...]
    Y: tuple[int, ...]
    density: Fraction
    base_density: Fraction

    @property
    def deviation(self) -> Fraction:
        return abs(self.density - self.base_density)

    def to_json(self) -> dict:
        return {
            "X": list(self.X),
            "Y": list(self.Y),
            "density": str(self.density),
            "base_density": str(self.base_density),
            "deviation": str(self.deviation),
        }


@dataclass(frozen=True)
class RegularityVerdict:
    epsilon: Fraction
    method: str  # EXHAUSTIVE | SAMPLED
    regular: bool
    witness: RegularityWitness | None = None
    trials: int | None = None
    seed: int | None = None

    @property
    def result(self) -> str:
        return "REGULAR" if self.regular else "IRREGULAR"

    def to_json(self) -> dict:
        out = {"epsilon": str(self.epsilon), "method": self.method, "result": self.result}
        if self.method == "SAMPLED":
            out["trials"] = self.trials
            out["seed"] = self.seed
        if self.witness is not None:
            out["witness"] = self.witness.to_json()
        return out


def validate_irregular_witness(pair, epsilon, X: Sequence[int], Y: Sequence[int]) -> bool:
    """Independent re-check of an irregularity witness."""
    pair = _as_pair(pair)
    eps = as_fraction(epsilon)
    na, nb = pair.shape
    if len(set(X)) != len(X) or len(set(Y)) != len(Y):
        return False
    if not all(0 <= x < na for x in X) or not all(0 <= y < nb for y in Y):
        return False
    if not (len(X) > eps * na and len(Y) > eps * nb):
        return False
    return abs(pair.subset_density(X, Y) - pair.density()) >= eps


def _extremal_y(m: np.ndarray, X: Sequence[int], k: int, side: int) -> tuple[int, ...]:
    counts = m[list(X)].sum(axis=0)
    sign = -1 if side == 0 else 1
    order = sorted(range(m.shape[1]), key=lambda y: (sign * int(counts[y]), y))
    return tuple(sorted(order[:k]))


def _bits(mask: int) -> tuple[int, ...]:
    return tuple(i for i in range(mask.bit_length()) if mask >> i & 1)


def _scan(m: np.ndarray, xmin: int, kmin: int, mode: int, p: int, q: int):
    na, nb = m.shape
    colmasks = [sum(1 << int(a) for a in np.flatnonzero(m[:, y])) for y in range(nb)]
    scan = kernels.irregular_scan
    if kernels.BACKEND == "cython" and (na > _C_LIMITS[0] or nb > _C_LIMITS[1]):
        scan = _pykernels.irregular_scan
    return scan(colmasks, na, nb, xmin, kmin, mode, p, q)


def _oriented(pair: BipartitePair) -> tuple[np.ndarray, bool]:
    """Matrix with the smaller side first, and whether it was transposed."""
    m = pair.adj
    if m.shape[0] > m.shape[1]:
        return m.T, True
    return m, False


def eps_regular_exhaustive(pair, epsilon, cap: int = EXHAUSTIVE_CAP) -> RegularityVerdict:
    """Exact epsilon-regularity test over all large enough subset pairs.

    The first witness in canonical order (subsets of the smaller side by
    bitmask, then ``|Y|`` increasing) is returned.
    """
    pair = _as_pair(pair)
    eps = as_fraction(epsilon)
    if eps <= 0:
        raise ValueError("epsilon must be positive")
    na, nb = pair.shape
    if max(na, nb) > cap:
        raise ValueError(f"pair is {na}x{nb}, above the exhaustive cap {cap}; use eps_regular_sampled")
    if na == 0 or nb == 0:
        return RegularityVerdict(eps, "EXHAUSTIVE", True)
    m, flipped = _oriented(pair)
    xmin, kmin = _min_size(eps, m.shape[0]), _min_size(eps, m.shape[1])
    hit = _scan(m, xmin, kmin, 0, eps.numerator, eps.denominator)
    if hit is None:
        return RegularityVerdict(eps, "EXHAUSTIVE", True)
    return RegularityVerdict(eps, "EXHAUSTIVE", False, _witness(pair, m, flipped, hit))


def _witness(pair: BipartitePair, m: np.ndarray, flipped: bool, hit) -> RegularityWitness:
    mask, k, side = hit
    X = _bits(mask)
    Y = _extremal_y(m, X, k, side)
    if flipped:
        X, Y = Y, X
    return RegularityWitness(X, Y, pair.subset_density(X, Y), pair.density())


def _sample_hits(m: np.ndarray, rng: np.random.Generator, trials: int, xmin: int, kmin: int, mode: int, p: int, q: int):
    """First hit among ``trials`` random ``X``; every ``k`` is tested with the extremal ``Y``.

    Returns ``(X, k, side)`` or ``None``.  Trials are drawn as one batch.
    """
    na, nb = m.shape
    sizes = rng.integers(xmin, na + 1, size=trials)
    ranks = np.argsort(rng.random((trials, na)), axis=1).argsort(axis=1)
    member = ranks < sizes[:, None]
    counts = np.sort(member.astype(np.int64) @ m.astype(np.int64), axis=1)
    total = int(m.sum())
    n = na * nb
    ks = np.arange(1, nb + 1, dtype=np.int64)
    bot = np.cumsum(counts, axis=1)
    top = np.cumsum(counts[:, ::-1], axis=1)
    xk = sizes[:, None].astype(np.int64) * ks[None, :]
    valid = ks[None, :] >= kmin
    if mode == 0:
        hi = valid & ((top * n - total * xk) * q >= p * xk * n)
        lo = valid & ((total * xk - bot * n) * q >= p * xk * n)
    else:
        hi = np.zeros((len(sizes), nb), dtype=bool)
        lo = valid & (bot * q <= p * xk)
    any_hit = (hi | lo).any(axis=1)
    if not any_hit.any():
        return None
    t = int(np.argmax(any_hit))
    k = int(np.argmax(hi[t] | lo[t]))
    side = 0 if hi[t, k] else 1
    return tuple(int(a) for a in np.flatnonzero(member[t])), k + 1, side


def eps_regular_sampled(pair, epsilon, trials: int = 1000, seed: int = 0) -> RegularityVerdict:
    """Randomised search for an irregularity witness.

    IRREGULAR is always backed by an exact witness; REGULAR only means no
    witness turned up in ``trials`` random subsets.
    """
    if trials < 1:
        raise ValueError("trials must be at least 1")
    pair = _as_pair(pair)
    eps = as_fraction(epsilon)
    if eps <= 0:
        raise ValueError("epsilon must be positive")
    na, nb = pair.shape
    m, flipped = _oriented(pair)
    xmin, kmin = _min_size(eps, m.shape[0]), _min_size(eps, m.shape[1])
    if na == 0 or nb == 0 or xmin > m.shape[0] or kmin > m.shape[1]:
        return RegularityVerdict(eps, "SAMPLED", True, trials=trials, seed=seed)
    rng = np.random.default_rng(seed)
    for start in range(0, trials, _BATCH):
        hit = _sample_hits(m, rng, min(_BATCH, trials - start), xmin, kmin, 0, eps.numerator, eps.denominator)
        if hit is not None:
            X, k, side = hit
            w = _witness(pair, m, flipped, (sum(1 << a for a in X), k, side))
            return RegularityVerdict(eps, "SAMPLED", False, w, trials, seed)
    return RegularityVerdict(eps, "SAMPLED", True, trials=trials, seed=seed)


def super_regular_check(
    pair, epsilon, delta, method: str = "exhaustive", trials: int = 1000, seed: int = 0,
    cap: int = EXHAUSTIVE_CAP,
) -> Violation | None:
    """Degree floors first, then the density floor ``d(X, Y) > delta`` on large subset pairs."""
    pair = _as_pair(pair)
    eps, dl = as_fraction(epsilon), as_fraction(delta)
    m = pair.adj
    na, nb = m.shape
    for side, degs, other in (("A", m.sum(axis=1), nb), ("B", m.sum(axis=0), na)):
        for v, d in enumerate(degs.tolist()):
            if not d > dl * other:
                return Violation("degree floor", (side, v, int(d)))
    if na == 0 or nb == 0:
        return None
    mo, flipped = _oriented(pair)
    xmin, kmin = _min_size(eps, mo.shape[0]), _min_size(eps, mo.shape[1])
    if xmin > mo.shape[0] or kmin > mo.shape[1]:
        return None
    if method == "exhaustive":
        if max(na, nb) > cap:
            raise ValueError(f"pair is {na}x{nb}, above the exhaustive cap {cap}")
        hit = _scan(mo, xmin, kmin, 1, dl.numerator, dl.denominator)
    elif method == "sampled":
        rng = np.random.default_rng(seed)
        hit = None
        for start in range(0, trials, _BATCH):
            h = _sample_hits(mo, rng, min(_BATCH, trials - start), xmin, kmin, 1, dl.numerator, dl.denominator)
            if h is not None:
                X, k, side = h
                hit = (sum(1 << a for a in X), k, side)
                break
    else:
        raise ValueError(f"unknown method {method!r}")
    if hit is None:
        return None
    w = _witness(pair, mo, flipped, hit)
    return Violation("density floor", (w.X, w.Y, w.density))


@dataclass
class SlicingReport:
    epsilon: Fraction
    alpha: Fraction
    epsilon_prime: Fraction
    trials: int
    seed: int
    density_violations: int = 0
    regularity_violations: int = 0
    first_violation: dict | None = None

    @property
    def violations(self) -> int:
        return self.density_violations + self.regularity_violations

    def to_json(self) -> dict:
        return {
            "epsilon": str(self.epsilon),
            "alpha": str(self.alpha),
            "epsilon_prime": str(self.epsilon_prime),
            "trials": self.trials,
            "seed": self.seed,
            "density_violations": self.density_violations,
            "regularity_violations": self.regularity_violations,
            "first_violation": self.first_violation,
        }


def slicing_property_test(
    pair, epsilon, alpha, trials: int = 200, seed: int = 0, inner_trials: int = 200
) -> SlicingReport:
    """Sample sub-pairs ``(A', B')`` with ``|A'| >= alpha|A|``, ``|B'| >= alpha|B|`` and check
    that each is ``max(eps/alpha, 2 eps)``-regular (sampled) with density within ``eps``."""
    pair = _as_pair(pair)
    eps, al = as_fraction(epsilon), as_fraction(alpha)
    if not al > eps:
        raise ValueError("alpha must exceed epsilon")
    if al > 1:
        raise ValueError("alpha must be at most 1")
    eps2 = max(eps / al, 2 * eps)
    na, nb = pair.shape
    d = pair.density()
    rep = SlicingReport(eps, al, eps2, trials, seed)
    rng = np.random.default_rng(seed)
    amin, bmin = math.ceil(al * na), math.ceil(al * nb)
    for t in range(trials):
        a = np.sort(rng.choice(na, size=int(rng.integers(amin, na + 1)), replace=False))
        b = np.sort(rng.choice(nb, size=int(rng.integers(bmin, nb + 1)), replace=False))
        sub = pair.restrict(a.tolist(), b.tolist())
        d2 = sub.density()
        if not abs(d2 - d) < eps:
            rep.density_violations += 1
            rep.first_violation = rep.first_violation or {"trial": t, "kind": "density", "A": a.tolist(), "B": b.tolist()}
        v = eps_regular_sampled(sub, eps2, inner_trials, seed=int(rng.integers(2**31)))
        if not v.regular:
            rep.regularity_violations += 1
            rep.first_violation = rep.first_violation or {
                "trial": t, "kind": "regularity", "A": a.tolist(), "B": b.tolist(), "witness": v.witness.to_json()
            }
    return rep
