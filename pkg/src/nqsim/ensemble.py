"""Vectorised replica ensemble: one numpy row per chain, stepped in lock-step.

Replica r draws from RandomStream(seed, stream=r) and reproduces the
single-chain driver bit for bit (the uniform variates, the inverse-CDF site
choice and the float arithmetic of the kernels are identical; tests pin this).
Reports are therefore independent of any batching and stay in replica order.

The engine optionally tracks, fully vectorised:
  * per-level statistics (S, Q, W, signatures) with monotonicity, persistence
    and window-exclusion monitors,
  * renewal times (reduced potential identically zero) and the parity-gap
    increments between them,
  * the even/odd potential-sum identity each step,
  * neighbour-difference and residual bounds over the final half of the run,
  * parity-gap checkpoints and raw allocation sites.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dynamics import (
    MAX_TOTAL_PARTICLES,
    AllocationRule,
    MaxRule,
    MinRule,
    RandomStream,
    Softmax,
)
from .ring import Neighborhood, check_ring_size, potentials, validate_occupancy

_FLAG_BITS = {
    "three_positives": 1,
    "three_zeros": 2,
    "pair_into_zeros": 4,
    "lone_positive_in_zeros": 8,
}
_FLAG_NAMES = list(_FLAG_BITS)


@dataclass
class EnsembleRequest:
    m: int
    kind: Neighborhood
    rule: AllocationRule
    steps: int
    replicas: int
    seed: int
    init: tuple[int, ...] | None = None
    h_checkpoints: tuple[int, ...] = ()
    track_levels: bool = False
    store_level_flags: bool = False
    debug_level_trace: bool = False
    track_renewals: bool = False
    check_parity: bool = False
    check_comb_final_half: bool = False
    check_residual_final_half: bool = False
    record_sites: bool = False
    chunk_steps: int = 4096


@dataclass
class EnsembleResult:
    request: EnsembleRequest
    t: int
    xi: np.ndarray  # (R, M) final occupancies
    u: np.ndarray  # (R, M) final potentials
    # level statistics (None unless track_levels)
    level_counts: np.ndarray | None = None
    s_violations: np.ndarray | None = None
    q_violations: np.ndarray | None = None
    w_violations: np.ndarray | None = None
    first_s_violation_step: np.ndarray | None = None
    persistence_violations: np.ndarray | None = None
    run_length: np.ndarray | None = None
    run_started_level: np.ndarray | None = None
    current_sigmask: np.ndarray | None = None
    level_flags: np.ndarray | None = None  # (R, cap) uint8, valid up to level_counts
    debug_levels: list | None = None
    # renewals
    renewal_counts: np.ndarray | None = None
    zeta_positive: int = 0
    zeta_negative: int = 0
    zeta_zero: int = 0
    zeta_tail: np.ndarray | None = None  # index c: count of |zeta| > c, c = 0..10
    # step-by-step checks
    parity_violations: int = 0
    first_parity_violation_step: int | None = None
    comb_violations: np.ndarray | None = None
    comb_max_seen: int = 0
    residual_violations: np.ndarray | None = None
    # raw data
    h_checkpoints: dict[int, np.ndarray] = field(default_factory=dict)
    sites: np.ndarray | None = None

    @property
    def empirical_fractions(self) -> np.ndarray:
        return self.xi / max(self.t, 1)


def run_ensemble(req: EnsembleRequest) -> EnsembleResult:
    m = check_ring_size(req.m, req.kind)
    R, T = req.replicas, req.steps
    if R < 1:
        raise ValueError("replicas must be >= 1")
    if T < 0:
        raise ValueError("steps must be >= 0")
    init = validate_occupancy(req.init, req.kind) if req.init is not None else (0,) * m
    if req.kind.window * (sum(init) + T) > MAX_TOTAL_PARTICLES:
        raise ValueError(f"step budget {T} overflows the int64 potential range")
    if (req.store_level_flags or req.debug_level_trace) and not req.track_levels:
        raise ValueError("level flags / traces require track_levels")

    offsets = req.kind.offsets
    rows = np.arange(R)
    xi = np.tile(np.asarray(init, dtype=np.int64), (R, 1))
    u = np.tile(np.asarray(potentials(init, req.kind), dtype=np.int64), (R, 1))
    m_cur = u.min(axis=1)

    rule = req.rule
    beta = rule.beta if isinstance(rule, Softmax) else None
    uniform_p = np.full((R, m), 1.0 / m)
    bit_values = 1 << np.arange(m, dtype=np.int64)

    # --- level tracking state ---
    if req.track_levels:
        level_counts = np.zeros(R, dtype=np.int64)
        prev_s = np.zeros(R, dtype=np.int64)
        prev_q = np.zeros(R, dtype=np.int64)
        prev_w = np.zeros(R, dtype=np.int64)
        s_viol = np.zeros(R, dtype=np.int64)
        q_viol = np.zeros(R, dtype=np.int64)
        w_viol = np.zeros(R, dtype=np.int64)
        first_s_viol = np.full(R, -1, dtype=np.int64)
        required_centers = np.zeros(R, dtype=np.int64)
        persist_viol = np.zeros(R, dtype=np.int64)
        cur_sig = np.full(R, -1, dtype=np.int64)
        run_len = np.zeros(R, dtype=np.int64)
        run_start = np.zeros(R, dtype=np.int64)
        flags_buf = None
        if req.store_level_flags:
            cap = req.kind.window * (sum(init) + T) // m + 2
            flags_buf = np.zeros((R, cap), dtype=np.uint8)
        debug_levels: list[list] | None = [[] for _ in range(R)] if req.debug_level_trace else None

        def open_levels(idx: np.ndarray, t: int, m_new: np.ndarray) -> None:
            v = u[idx] - m_new[idx, None]
            pos = v > 0
            z = ~pos
            p1 = np.roll(pos, -1, axis=1)
            p2 = np.roll(pos, -2, axis=1)
            z1 = np.roll(z, -1, axis=1)
            z2 = np.roll(z, -2, axis=1)
            z3 = np.roll(z, -3, axis=1)
            s_here = np.where(v >= 2, v, 0).sum(axis=1)
            q_here = (np.roll(pos, 1, axis=1) & z & p1).sum(axis=1)
            w_here = (z & p1 & p2 & z3).sum(axis=1)
            sig = (pos * bit_values).sum(axis=1)
            centers = ((np.roll(pos, 1, axis=1) & z & p1) * bit_values).sum(axis=1)

            has_prev = level_counts[idx] > 0
            bad_s = has_prev & (s_here > prev_s[idx])
            bad_q = has_prev & (q_here < prev_q[idx])
            bad_w = has_prev & (w_here > prev_w[idx])
            s_viol[idx] += bad_s
            q_viol[idx] += bad_q
            w_viol[idx] += bad_w
            if bad_s.any():
                hit = idx[bad_s]
                first_s_viol[hit] = np.where(first_s_viol[hit] < 0, t, first_s_viol[hit])
            lost = required_centers[idx] & ~centers
            persist_viol[idx] += lost != 0
            required_centers[idx] |= centers
            prev_s[idx] = s_here
            prev_q[idx] = q_here
            prev_w[idx] = w_here

            if flags_buf is not None or debug_levels is not None:
                flag_bits = (
                    (pos & p1 & p2).any(axis=1) * _FLAG_BITS["three_positives"]
                    | (z & z1 & z2).any(axis=1) * _FLAG_BITS["three_zeros"]
                    | (pos & p1 & z2 & z3).any(axis=1) * _FLAG_BITS["pair_into_zeros"]
                    | (z & z1 & p2 & z3 & np.roll(z, -4, axis=1)).any(axis=1)
                    * _FLAG_BITS["lone_positive_in_zeros"]
                ).astype(np.uint8)
                if flags_buf is not None:
                    flags_buf[idx, level_counts[idx]] = flag_bits
                if debug_levels is not None:
                    for row, srow, qrow, wrow, sigrow in zip(
                        idx.tolist(), s_here.tolist(), q_here.tolist(), w_here.tolist(), sig.tolist()
                    ):
                        debug_levels[row].append((t, int(m_new[row]), srow, qrow, wrow, sigrow))

            same = sig == cur_sig[idx]
            run_len[idx] = np.where(same, run_len[idx] + 1, 1)
            run_start[idx] = np.where(same, run_start[idx], level_counts[idx])
            cur_sig[idx] = sig
            level_counts[idx] += 1

        open_levels(rows, 0, m_cur)

    # --- renewal tracking state ---
    parity_sign = np.where(np.arange(m) % 2 == 1, 1, -1).astype(np.int64)  # +1 at even 1-based sites
    D = (xi * parity_sign).sum(axis=1)
    if req.track_renewals:
        renew_count = np.zeros(R, dtype=np.int64)
        has_base = np.zeros(R, dtype=bool)
        d_last = np.zeros(R, dtype=np.int64)
        zeta_pos = zeta_neg = zeta_zero = 0
        # histogram of floor((|zeta|*M - 1) / M) clipped at 10, for nonzero zeta
        zeta_mag_hist = np.zeros(11, dtype=np.int64)

        def handle_renewals(t: int, m_new: np.ndarray) -> None:
            nonlocal zeta_pos, zeta_neg, zeta_zero
            mask = u.max(axis=1) == m_new
            if not mask.any():
                return
            idx = np.flatnonzero(mask)
            renew_count[idx] += 1
            based = idx[has_base[idx]]
            if based.size:
                dd = D[based] - d_last[based]
                zeta_pos += int((dd > 0).sum())
                zeta_neg += int((dd < 0).sum())
                mag = np.abs(dd)
                nonzero = mag[mag > 0]
                zeta_zero += based.size - nonzero.size
                if nonzero.size:
                    zeta_mag_hist[:] += np.bincount(
                        np.minimum((nonzero - 1) // m, 10), minlength=11
                    )
            d_last[idx] = D[idx]
            has_base[idx] = True

        handle_renewals(0, m_cur)

    parity_violations = 0
    first_parity_step: int | None = None
    if req.check_comb_final_half:
        comb_viol = np.zeros(R, dtype=np.int64)
        comb_max = 0
    if req.check_residual_final_half:
        resid_viol = np.zeros(R, dtype=np.int64)
        resid_sign = parity_sign if m % 2 == 0 else np.zeros(m, dtype=np.int64)
    half_start = T - T // 2
    cp_index = {int(t): i for i, t in enumerate(req.h_checkpoints)}
    h_store = np.zeros((len(cp_index), R)) if cp_index else None
    sites_buf = np.zeros((R, T), dtype=np.int16) if req.record_sites else None
    if 0 in cp_index:
        h_store[cp_index[0]] = D / m

    if isinstance(rule, MinRule):
        def probabilities():
            mask = u == m_cur[:, None]
            return mask / mask.sum(axis=1)[:, None]
    elif isinstance(rule, MaxRule):
        def probabilities():
            mask = u == u.max(axis=1)[:, None]
            return mask / mask.sum(axis=1)[:, None]
    elif beta == 1.0:
        def probabilities():
            return uniform_p
    else:
        def probabilities():
            anchor = m_cur if beta < 1.0 else u.max(axis=1)
            w = np.power(beta, (u - anchor[:, None]).astype(np.float64))
            return w / w.sum(axis=1)[:, None]

    # affected[d][k]: site whose potential gains when k receives a particle
    affected = [np.arange(-d, m - d) % m for d in offsets]

    gens = [RandomStream(req.seed, r).generator() for r in range(R)]
    done = 0
    while done < T:
        csize = min(req.chunk_steps, T - done)
        unif = np.empty((R, csize))
        for r in range(R):
            unif[r] = gens[r].random(csize)
        for j in range(csize):
            t = done + j + 1
            c = np.cumsum(probabilities(), axis=1)
            c[:, -1] = 1.0
            sites = (unif[:, j, None] < c).argmax(axis=1)

            xi[rows, sites] += 1
            for table in affected:
                u[rows, table[sites]] += 1
            D += parity_sign[sites]
            m_new = u.min(axis=1)

            if req.track_levels:
                opened = m_new > m_cur
                if opened.any():
                    open_levels(np.flatnonzero(opened), t, m_new)
            m_cur = m_new
            if req.track_renewals:
                handle_renewals(t, m_new)
            if req.check_parity:
                bad = u[:, 0::2].sum(axis=1) != u[:, 1::2].sum(axis=1)
                if bad.any():
                    parity_violations += int(bad.sum())
                    if first_parity_step is None:
                        first_parity_step = t
            if t >= half_start:
                if req.check_comb_final_half:
                    dev = np.abs(xi - np.roll(xi, -2, axis=1))
                    comb_max = max(comb_max, int(dev.max()))
                    comb_viol += (dev > 2).any(axis=1)
                if req.check_residual_final_half:
                    resid = np.abs(m * xi - t - resid_sign * D[:, None])
                    resid_viol += (resid > 2 * m * m).any(axis=1)
            if t in cp_index:
                h_store[cp_index[t]] = D / m
            if sites_buf is not None:
                sites_buf[:, t - 1] = sites + 1  # 1-based in all exported data
        done += csize

    result = EnsembleResult(request=req, t=T, xi=xi, u=u)
    if req.track_levels:
        result.level_counts = level_counts
        result.s_violations = s_viol
        result.q_violations = q_viol
        result.w_violations = w_viol
        result.first_s_violation_step = first_s_viol
        result.persistence_violations = persist_viol
        result.run_length = run_len
        result.run_started_level = run_start
        result.current_sigmask = cur_sig
        result.level_flags = flags_buf
        result.debug_levels = debug_levels
    if req.track_renewals:
        result.renewal_counts = renew_count
        result.zeta_positive = zeta_pos
        result.zeta_negative = zeta_neg
        result.zeta_zero = zeta_zero
        # tail[c] = #{|zeta| > c}: bucket b holds c*M < |zeta|*M <= (c+1)*M
        result.zeta_tail = zeta_mag_hist[::-1].cumsum()[::-1].copy()
    result.parity_violations = parity_violations
    result.first_parity_violation_step = first_parity_step
    if req.check_comb_final_half:
        result.comb_violations = comb_viol
        result.comb_max_seen = comb_max
    if req.check_residual_final_half:
        result.residual_violations = resid_viol
    if h_store is not None:
        result.h_checkpoints = {t: h_store[i] for t, i in cp_index.items()}
    result.sites = sites_buf
    return result


def final_half_flag_counts(result: EnsembleResult) -> np.ndarray:
    """Per-replica count of levels in the final half carrying any excluded window.

    Requires store_level_flags.  The final half of replica r is the levels
    with index >= level_counts[r] // 2.
    """
    if result.level_flags is None or result.level_counts is None:
        raise ValueError("run was not tracked with store_level_flags")
    R = result.level_flags.shape[0]
    counts = np.zeros((R, 4), dtype=np.int64)
    for r in range(R):
        n = int(result.level_counts[r])
        tail = result.level_flags[r, n // 2 : n]
        for col, bit in enumerate(_FLAG_BITS.values()):
            counts[r, col] = int(((tail & bit) != 0).sum())
    return counts
