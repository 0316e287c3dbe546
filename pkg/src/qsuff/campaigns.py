"""Seeded batches of random instances checked against the inequalities.

Every instance draws from its own generator, spawned from the campaign seed,
so results do not depend on evaluation order or thread count.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .divergences import alpha_divergence, rel_entropy
from .golden_thompson import fs_scan, gt_gap
from .measurements import holevo_bound_check, random_povm
from .modular import replay_monotonicity
from .ssa import random_markov_classical, random_tripartite, rss_check, ssa_gap
from .states import Ensemble, random_channel, random_density
from .sufficiency import check_theorem2

VIOLATION_TOL = 1e-9


def instance_rngs(seed: int, n: int) -> list:
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(n)]


def _dims(rng, lo, hi):
    return int(rng.integers(lo, hi + 1))


def _random_hermitian(n, rng, scale=1.0):
    G = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return scale * 0.5 * (G + G.conj().T)


def _kraus_count(rng, n, m, max_kraus=4, invertible=False):
    # trace preservation needs m * k >= n; a full-rank image needs n * k >= m
    least = -(-n // m)
    if invertible:
        least = max(least, -(-m // n), 2)
    return int(rng.integers(least, max(least, max_kraus) + 1))


def monotonicity_instance(rng, lo=2, hi=6, max_kraus=4):
    n = _dims(rng, lo, hi)
    m = _dims(rng, lo, hi)
    k = _kraus_count(rng, n, m, max_kraus)
    return random_density(n, rng), random_density(n, rng), random_channel(n, m, k, rng)


def _monotonicity(rng, lo, hi, alpha=None):
    D1, D2, T = monotonicity_instance(rng, lo, hi)
    if alpha is None:
        return rel_entropy(D1, D2) - rel_entropy(T(D1), T(D2))
    return alpha_divergence(D1, D2, alpha) - alpha_divergence(T(D1), T(D2), alpha)


def _replay(rng, lo, hi):
    n = _dims(rng, lo, hi)
    D1, D2 = random_density(n, rng), random_density(n, rng)
    T = random_channel(n, n, int(rng.integers(2, 4)), rng)
    rep = replay_monotonicity(D1, D2, T)
    return min(rep.gap, rep.worst_integrand_margin)


def _theorem2(rng, lo, hi):
    n = _dims(rng, lo, hi)
    m = _dims(rng, lo, hi)
    D1, D2 = random_density(n, rng), random_density(n, rng)
    T = random_channel(n, m, _kraus_count(rng, n, m, invertible=True), rng)
    v = check_theorem2(D1, D2, T)
    # a disagreement between the two equality tests counts as a violation
    return v.entropy_gap if v.consistent else -math.inf


def _tri_dims(rng, lo, hi):
    return tuple(_dims(rng, lo, min(hi, 3)) for _ in range(3))


def _ssa(rng, lo, hi):
    state = random_tripartite(_tri_dims(rng, lo, hi), rng)
    gap = ssa_gap(state)
    rss = rss_check(state, replay=False)
    if rss.identity_residual > 1e-8:
        return -math.inf
    return gap


def _markov(rng, lo, hi):
    state = random_markov_classical(_tri_dims(rng, lo, hi), rng)
    # the gap must vanish, so its size counts against the margin
    return -abs(ssa_gap(state))


def random_ensemble(n, size, rng) -> Ensemble:
    w = rng.dirichlet(np.ones(size))
    return Ensemble(w, tuple(random_density(n, rng) for _ in range(size)))


def _holevo(rng, lo, hi):
    n = _dims(rng, lo, min(hi, 4))
    m = _dims(rng, lo, min(hi, 4))
    e = random_ensemble(n, int(rng.integers(2, 5)), rng)
    T = random_channel(n, m, _kraus_count(rng, n, m), rng)
    E = random_povm(m, int(rng.integers(2, 5)), rng)
    return holevo_bound_check(e, T, E).gap


def _gt(rng, lo, hi):
    n = _dims(rng, lo, hi)
    A, B = _random_hermitian(n, rng), _random_hermitian(n, rng)
    scan = fs_scan(A, B)
    return min(gt_gap(A, B), scan.min_increment)


CHECKS = {
    "monotonicity": _monotonicity,
    "alpha": _monotonicity,
    "replay": _replay,
    "theorem2": _theorem2,
    "ssa": _ssa,
    "markov": _markov,
    "holevo": _holevo,
    "gt": _gt,
}


@dataclass
class CampaignResult:
    check: str
    n: int
    dims: tuple
    seed: int
    params: dict
    margins: np.ndarray
    tol: float = VIOLATION_TOL

    @property
    def violations(self) -> int:
        # nan margins count as violations
        return int(np.sum(~(self.margins >= -self.tol)))

    @property
    def worst_margin(self) -> float:
        return float(np.min(self.margins))

    @property
    def worst_instance(self) -> int:
        return int(np.argmin(np.nan_to_num(self.margins, nan=-np.inf)))

    def report(self) -> dict:
        return {
            "check": self.check,
            "n": self.n,
            "dims": list(self.dims),
            "seed": self.seed,
            "params": self.params,
            "thresholds": {"violation": self.tol},
            "violations": self.violations,
            "worst_margin": self.worst_margin,
            "worst_instance": self.worst_instance,
            "verdict": "violation" if self.violations else "holds",
        }


def default_threads() -> int:
    try:
        return max(1, int(os.environ.get("QSUFF_THREADS", "1")))
    except ValueError:
        return 1


def run_campaign(check: str, n: int, dims=(2, 6), seed: int = 0, alpha: float | None = None,
                 threads: int | None = None) -> CampaignResult:
    if check not in CHECKS:
        raise ValueError(f"unknown check {check!r}; choose from {sorted(CHECKS)}")
    if check == "alpha" and alpha is None:
        alpha = 0.0
    lo, hi = int(dims[0]), int(dims[1])
    if lo < 1 or hi < lo:
        raise ValueError("invalid dimension range")
    fn = CHECKS[check]
    rngs = instance_rngs(seed, n)
    kwargs = {"alpha": alpha} if check == "alpha" else {}

    def one(rng):
        return fn(rng, lo, hi, **kwargs)

    threads = threads or default_threads()
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            margins = list(pool.map(one, rngs))
    else:
        margins = [one(r) for r in rngs]
    params = {"alpha": alpha} if alpha is not None else {}
    return CampaignResult(check, n, (lo, hi), seed, params, np.array(margins, dtype=float))
