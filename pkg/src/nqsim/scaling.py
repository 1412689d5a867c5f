"""Scaling diagnostics and the max-rule freeze classifier.

For even-M asymmetric chains the parity gap H(t) behaves like a diffusion:
its variance across independent replicas grows linearly in t and its terminal
law is Gaussian.  `estimate_sigma` fits Var H(t) = sigma^2 t through the
origin and runs a KS normality check on the rescaled terminal values; sigma
is estimated, never asserted against a reference value.

Under the max-potential rule the chain freezes: eventually all arrivals land
on one site, or alternate between one adjacent pair with asymptotic shares
1/2 each.  `classify_freeze` reads the outcome off an allocation-site
trajectory.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import stats

from .dynamics import AllocationRule, ChainState, MaxRule, MinRule, transition_distribution
from .ensemble import EnsembleRequest, EnsembleResult, run_ensemble
from .ring import Neighborhood

MIN_REPLICAS_FOR_KS = 100


@dataclass(frozen=True)
class SigmaEstimate:
    sigma_hat: float
    points: tuple[tuple[int, float], ...]  # (t, Var H(t)) pairs
    slope: float
    r2: float
    replicas: int
    ks_stat: float | None
    ks_p: float | None
    ks_skipped_reason: str | None

    def to_json_dict(self) -> dict:
        return {
            "sigma_hat": self.sigma_hat,
            "slope": self.slope,
            "r2": self.r2,
            "replicas": self.replicas,
            "variance_points": [[t, v] for t, v in self.points],
            "ks_stat": self.ks_stat,
            "ks_p": self.ks_p,
            "ks_skipped_reason": self.ks_skipped_reason,
        }


def fit_variance_line(points: Sequence[tuple[int, float]]) -> tuple[float, float]:
    """Least-squares slope of var = slope * t through the origin, plus R^2."""
    t = np.array([p[0] for p in points], dtype=float)
    v = np.array([p[1] for p in points], dtype=float)
    slope = float((t * v).sum() / (t * t).sum())
    ss_res = float(((v - slope * t) ** 2).sum())
    ss_tot = float(((v - v.mean()) ** 2).sum())
    r2 = 1.0 if ss_tot == 0 else 1.0 - ss_res / ss_tot
    return slope, r2


def estimate_sigma(
    m: int,
    replicas: int,
    checkpoints: Sequence[int],
    seed: int,
    rule: AllocationRule = MinRule(),
    min_replicas_for_ks: int = MIN_REPLICAS_FOR_KS,
) -> tuple[SigmaEstimate, EnsembleResult]:
    """Diffusivity estimate for the parity gap of an asymmetric even-M chain.

    Runs `replicas` independent chains, records H(t) at the checkpoints, fits
    the variances linearly through the origin and (given enough replicas)
    KS-tests the rescaled terminal H against a standard normal.  Renewal
    increments are tracked alongside for the symmetry/tail diagnostics.
    """
    if m % 2 != 0:
        raise ValueError(f"the parity gap scales diffusively only for even M, got M={m}")
    if replicas < 2:
        raise ValueError(f"need at least 2 replicas to estimate a variance, got {replicas}")
    checkpoints = tuple(sorted(int(t) for t in checkpoints))
    if not checkpoints or checkpoints[0] < 1:
        raise ValueError("checkpoints must be positive step counts")
    result = run_ensemble(
        EnsembleRequest(
            m=m,
            kind=Neighborhood.ASYMMETRIC,
            rule=rule,
            steps=checkpoints[-1],
            replicas=replicas,
            seed=seed,
            h_checkpoints=checkpoints,
            track_renewals=True,
        )
    )
    points = tuple(
        (t, float(result.h_checkpoints[t].var(ddof=1))) for t in checkpoints
    )
    slope, r2 = fit_variance_line(points)
    sigma = math.sqrt(max(slope, 0.0))

    ks_stat = ks_p = None
    skipped = None
    if replicas < min_replicas_for_ks:
        skipped = f"replicas {replicas} below minimum {min_replicas_for_ks}"
    elif sigma == 0:
        skipped = "degenerate variance fit"
    else:
        t_max = checkpoints[-1]
        z = result.h_checkpoints[t_max] / (sigma * math.sqrt(t_max))
        ks = stats.kstest(z, "norm")
        ks_stat, ks_p = float(ks.statistic), float(ks.pvalue)
    estimate = SigmaEstimate(
        sigma_hat=sigma,
        points=points,
        slope=slope,
        r2=r2,
        replicas=replicas,
        ks_stat=ks_stat,
        ks_p=ks_p,
        ks_skipped_reason=skipped,
    )
    return estimate, result


def zeta_sign_test(positive: int, negative: int) -> float:
    """Two-sided sign-test p-value for symmetry of the renewal increments."""
    n = positive + negative
    if n == 0:
        return 1.0
    return float(stats.binomtest(positive, n, 0.5).pvalue)


def zeta_tail_check(
    tail_counts: Sequence[int], ratio: float = 0.95, min_count: int = 100
) -> tuple[bool, list[float]]:
    """Geometric-decay sanity check on P(|zeta| > c), c = 1..10.

    tail_counts[c] counts increments with |zeta| > c.  Decay is accepted when
    each successive tail is at most `ratio` times the previous one; tails with
    fewer than `min_count` samples are too thin to judge and pass by default.
    """
    ratios = []
    ok = True
    for c in range(1, len(tail_counts) - 1):
        cur, nxt = tail_counts[c], tail_counts[c + 1]
        if cur >= min_count:
            ratios.append(nxt / cur)
            if nxt > ratio * cur:
                ok = False
    return ok, ratios


@dataclass(frozen=True)
class FreezeOutcome:
    tag: str  # "single", "pair" or "unfrozen"
    sites: tuple[int, ...]  # 1-based; (k,) or (k, k+1); empty when unfrozen
    freeze_time: int | None  # first step of the all-inside suffix


def freeze_window(total_steps: int) -> int:
    # Geometric stabilisation makes false "unfrozen" verdicts exponentially
    # rare once the window is this long.
    return min(total_steps, max(1000, total_steps // 10))


def classify_freeze(sites: Sequence[int], m: int, window: int | None = None) -> FreezeOutcome:
    """Classify a max-rule run from its 1-based allocation sites (steps 1..T)."""
    total = len(sites)
    if total == 0:
        return FreezeOutcome("unfrozen", (), None)
    w = freeze_window(total) if window is None else min(window, total)
    tail = np.asarray(sites[total - w :], dtype=np.int64)
    distinct = np.unique(tail)
    if distinct.size == 1:
        frozen = {int(distinct[0])}
        ordered = (int(distinct[0]),)
        tag = "single"
    elif distinct.size == 2:
        a, b = (int(x) for x in distinct)
        if b == a % m + 1:
            ordered = (a, b)
        elif a == b % m + 1:
            ordered = (b, a)
        else:
            return FreezeOutcome("unfrozen", (), None)
        frozen = {a, b}
        tag = "pair"
    else:
        return FreezeOutcome("unfrozen", (), None)
    outside = np.flatnonzero(~np.isin(np.asarray(sites, dtype=np.int64), list(frozen)))
    freeze_time = int(outside[-1]) + 2 if outside.size else 1  # steps are 1-based
    return FreezeOutcome(tag, ordered, freeze_time)


def total_variation(p: np.ndarray, q: np.ndarray) -> float:
    return 0.5 * float(np.abs(np.asarray(p) - np.asarray(q)).sum())


def potential_gap(u: Sequence[int], side: str) -> int | None:
    """Distance from the extreme potential to the nearest other value."""
    distinct = sorted(set(u))
    if len(distinct) < 2:
        return None
    return distinct[1] - distinct[0] if side == "min" else distinct[-1] - distinct[-2]


def kernel_limit_check(
    state: ChainState, beta_small: float = 1e-4, beta_large: float = 1e4
) -> dict:
    """Total-variation distances of the softmax kernel to its two limits."""
    from .dynamics import Softmax

    p_min = transition_distribution(state, MinRule())
    p_max = transition_distribution(state, MaxRule())
    tv_min = total_variation(transition_distribution(state, Softmax(beta_small)), p_min)
    tv_max = total_variation(transition_distribution(state, Softmax(beta_large)), p_max)
    return {
        "beta_small": beta_small,
        "beta_large": beta_large,
        "tv_to_min": tv_min,
        "tv_to_max": tv_max,
        "gap_min": potential_gap(state.u, "min"),
        "gap_max": potential_gap(state.u, "max"),
    }
