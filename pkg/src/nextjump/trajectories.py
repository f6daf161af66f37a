"""Monte Carlo quantum-jump unraveling over a constant effective generator.

A model supplies the no-click generator M (so the unnormalized conditioned
state obeys dpsi/dt = M psi between clicks), one jump operator per detection
channel, and a reset rule.  Jump times are sampled by inverse transform on
the decaying norm: draw u ~ U(0,1), then locate ||psi(t)||^2 = u by bisection
on the closed eigenmode propagator.  With that sampling the trajectory
ensemble carries the physical measure, so averages of normalized projectors
reproduce the Lindblad density matrix.

Everything here is deterministic given (seed, stream): trajectory i always
consumes stream i of the counter-based generator no matter which thread runs
it, and ensemble reductions sum in slot order.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .numerics import RngStream, integrate_ode

__all__ = [
    "EffectiveModel",
    "JumpRecord",
    "NullFlow",
    "TelegraphTrace",
    "TelegraphStats",
    "ensemble_map",
    "lindblad_consistency",
    "run_trajectory",
    "sample_gaps",
    "sample_next_jump",
    "telegraph_run",
    "telegraph_stats",
    "telegraph_trace",
    "thread_count",
]

#: eigenbasis condition number above which the propagator falls back to an ODE
EIG_COND_LIMIT = 1e8
#: bisection iterations for jump-time location (resolves t_hi / 2^64)
BISECT_ITERS = 64


def thread_count() -> int:
    """Worker cap from NEXTJUMP_THREADS; 0 or unset means auto."""
    raw = os.environ.get("NEXTJUMP_THREADS", "0")
    try:
        n = int(raw)
    except ValueError:
        n = 0
    if n <= 0:
        n = min(os.cpu_count() or 1, 8)
    return n


@dataclass(frozen=True)
class EffectiveModel:
    """No-click generator plus detection channels.

    generator: (d, d) complex matrix M; between clicks dpsi/dt = M psi.
    jump_ops: channel operators L_k, one per detector.
    labels: channel names parallel to jump_ops.
    initial_state: normalized state the trajectory starts from.
    beta_fast: fast decay scale; sets default dark thresholds and the
        bisection bracket for gap sampling.
    reset_state: constant post-jump state when every channel resets to the
        same place (lets long runs reuse one propagator); None applies the
        chosen jump operator and renormalizes.
    """

    generator: np.ndarray
    jump_ops: tuple
    labels: tuple
    initial_state: np.ndarray
    beta_fast: float
    reset_state: np.ndarray | None = None

    def __post_init__(self):
        object.__setattr__(self, "generator",
                           np.asarray(self.generator, dtype=complex))
        object.__setattr__(self, "jump_ops",
                           tuple(np.asarray(L, dtype=complex)
                                 for L in self.jump_ops))
        object.__setattr__(self, "labels", tuple(self.labels))
        object.__setattr__(self, "initial_state",
                           np.asarray(self.initial_state, dtype=complex))
        if self.reset_state is not None:
            object.__setattr__(self, "reset_state",
                               np.asarray(self.reset_state, dtype=complex))
        if len(self.jump_ops) != len(self.labels):
            raise ValueError("one label per jump operator required")

    @property
    def dim(self) -> int:
        return self.generator.shape[0]

    def jump_rates(self, psi: np.ndarray) -> np.ndarray:
        """||L_k psi||^2 per channel (unnormalized state accepted)."""
        return np.array([float(np.vdot(L @ psi, L @ psi).real)
                         for L in self.jump_ops])

    def rate_identity_gap(self, psi: np.ndarray) -> float:
        """| -d||psi||^2/dt - sum_k ||L_k psi||^2 | at psi, normalized.

        Zero (to rounding) when the generator is exactly
        -iH - (1/2) sum L_k^dag L_k for Hermitian H.
        """
        loss = -2.0 * float(np.vdot(psi, self.generator @ psi).real)
        gain = float(np.sum(self.jump_rates(psi)))
        scale = max(loss, gain, 1e-300)
        return abs(loss - gain) / scale

    def reset(self, channel: int, psi_at_jump: np.ndarray) -> np.ndarray:
        if self.reset_state is not None:
            return self.reset_state.copy()
        post = self.jump_ops[channel] @ psi_at_jump
        nrm = np.linalg.norm(post)
        if nrm == 0.0:
            raise ValueError("jump operator annihilated the state; "
                             "channel should have had zero rate")
        return post / nrm


class NullFlow:
    """Closed propagator psi(t) = exp(M t) psi0 with survival evaluation.

    Diagonalizes M once; if the eigenbasis is ill-conditioned (defective or
    nearly so) the flow falls back to adaptive integration with dense output.
    Survival is ||psi(t)||^2 normalized to 1 at t=0.
    """

    def __init__(self, generator: np.ndarray, state0: np.ndarray,
                 t_max_hint: float = 0.0):
        M = np.asarray(generator, dtype=complex)
        s0 = np.asarray(state0, dtype=complex)
        self._norm0 = float(np.vdot(s0, s0).real)
        if self._norm0 == 0.0:
            raise ValueError("cannot start a flow from the zero state")
        self._s0 = s0
        self._M = M
        lam, V = np.linalg.eig(M)
        cond = np.linalg.cond(V)
        if np.isfinite(cond) and cond <= EIG_COND_LIMIT:
            self._lam = lam
            self._V = V
            self._coef = np.linalg.solve(V, s0)
            self._dense = None
        else:
            self._lam = None
            self._dense = None
            self._dense_tmax = 0.0
            if t_max_hint > 0.0:
                self._ensure_dense(t_max_hint)

    @property
    def uses_eig(self) -> bool:
        return self._lam is not None

    def _ensure_dense(self, tmax: float) -> None:
        if self._dense is not None and tmax <= self._dense_tmax:
            return
        rhs = lambda t, y: self._M @ y
        _, interp = integrate_ode(rhs, self._s0, 0.0, tmax,
                                  tol=1e-12, dense=True)
        self._dense = interp
        self._dense_tmax = tmax

    def state(self, t):
        """psi(t); t scalar -> (d,), t array -> (d, len(t))."""
        t_arr = np.atleast_1d(np.asarray(t, dtype=float))
        if self._lam is not None:
            phases = np.exp(np.multiply.outer(self._lam, t_arr))
            psi = self._V @ (self._coef[:, np.newaxis] * phases)
        else:
            self._ensure_dense(float(t_arr.max()) if t_arr.size else 1.0)
            psi = np.empty((self._s0.size, t_arr.size), dtype=complex)
            for i, ti in enumerate(t_arr):
                psi[:, i] = self._s0 if ti == 0.0 else self._dense(ti)
        if np.isscalar(t) or np.asarray(t).ndim == 0:
            return psi[:, 0]
        return psi

    def survival(self, t):
        """W(t) = ||psi(t)||^2 / ||psi(0)||^2, shaped like t."""
        t_arr = np.atleast_1d(np.asarray(t, dtype=float))
        psi = self.state(t_arr)
        w = np.sum(np.abs(psi) ** 2, axis=0) / self._norm0
        if np.isscalar(t) or np.asarray(t).ndim == 0:
            return float(w[0])
        return w


def sample_gaps(survival, n: int, rng, t_hi: float,
                iters: int = BISECT_ITERS) -> np.ndarray:
    """n inverse-transform samples of the first-jump time for a survival
    curve W(t) (vectorized over t), bisected on [0, t_hi].

    Samples whose u falls below W(t_hi) come back as ~t_hi (censored at the
    bracket); choose t_hi so W(t_hi) is negligible for the statistic at hand.
    """
    if isinstance(rng, RngStream):
        rng = rng.generator()
    u = rng.random(n)
    lo = np.zeros(n)
    hi = np.full(n, float(t_hi))
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        sel = survival(mid) > u
        lo[sel] = mid[sel]
        hi[~sel] = mid[~sel]
    return 0.5 * (lo + hi)


def sample_next_jump(model: EffectiveModel, state0, rng, tmax: float):
    """(t_jump or None, state_at_jump_or_tmax) for one draw.

    Draws u ~ U(0,1); returns None when the norm stays above u through tmax.
    The returned state is the unnormalized conditioned state at the jump (or
    at tmax), suitable for channel attribution.
    """
    if isinstance(rng, RngStream):
        rng = rng.generator()
    flow = NullFlow(model.generator, state0)
    u = float(rng.random())
    if flow.survival(tmax) > u:
        return None, flow.state(tmax)
    lo, hi = 0.0, float(tmax)
    for _ in range(BISECT_ITERS):
        mid = 0.5 * (lo + hi)
        if flow.survival(mid) > u:
            lo = mid
        else:
            hi = mid
        if abs(flow.survival(0.5 * (lo + hi)) - u) < 1e-10:
            break
    t_j = 0.5 * (lo + hi)
    return t_j, flow.state(t_j)


def _choose_channel(model: EffectiveModel, psi_at_jump: np.ndarray,
                    rng) -> int:
    """Channel k with probability ||L_k psi||^2 / sum_j ||L_j psi||^2."""
    if len(model.jump_ops) == 1:
        return 0
    rates = model.jump_rates(psi_at_jump)
    tot = rates.sum()
    if tot <= 0.0:
        raise ValueError("all channel rates vanish at the sampled jump time")
    u = float(rng.random())
    acc = 0.0
    for k, r in enumerate(rates):
        acc += r / tot
        if u < acc:
            return k
    return len(rates) - 1


@dataclass(frozen=True)
class JumpRecord:
    """Ordered click times with channel labels and the final conditioned
    state (unnormalized, relative to the last reset)."""

    times: np.ndarray
    channels: np.ndarray          # integer channel index per jump
    labels: tuple                 # channel names, indexed by channels
    final_state: np.ndarray
    tmax: float

    def __post_init__(self):
        object.__setattr__(self, "times", np.asarray(self.times, dtype=float))
        object.__setattr__(self, "channels",
                           np.asarray(self.channels, dtype=int))
        if self.times.size > 1 and np.any(np.diff(self.times) <= 0):
            raise ValueError("jump times must be strictly increasing")

    @property
    def njumps(self) -> int:
        return int(self.times.size)

    def gaps(self) -> np.ndarray:
        """Inter-click intervals, the first measured from t=0."""
        return np.diff(self.times, prepend=0.0)


def run_trajectory(model: EffectiveModel, tmax: float, rng) -> JumpRecord:
    """Sequential jump unraveling on [0, tmax]: repeated sample_next_jump
    plus reset, single random stream consumed in order."""
    if isinstance(rng, RngStream):
        rng = rng.generator()
    times = []
    channels = []
    state = model.initial_state
    nrm = np.linalg.norm(state)
    state = state / nrm
    # constant-reset models reuse one propagator for every segment
    cached_flow = None
    t = 0.0
    final_state = state
    while t < tmax:
        if model.reset_state is not None and times:
            if cached_flow is None:
                cached_flow = NullFlow(model.generator, state)
            flow = cached_flow
        else:
            flow = NullFlow(model.generator, state)
        u = float(rng.random())
        remaining = tmax - t
        if flow.survival(remaining) > u:
            final_state = flow.state(remaining)
            break
        lo, hi = 0.0, remaining
        for _ in range(BISECT_ITERS):
            mid = 0.5 * (lo + hi)
            if flow.survival(mid) > u:
                lo = mid
            else:
                hi = mid
        t_rel = 0.5 * (lo + hi)
        psi_j = flow.state(t_rel)
        k = _choose_channel(model, psi_j, rng)
        state = model.reset(k, psi_j)
        t += t_rel
        times.append(t)
        channels.append(k)
        final_state = state
    return JumpRecord(np.array(times), np.array(channels, dtype=int),
                      model.labels, final_state, float(tmax))


def telegraph_run(model: EffectiveModel, total_time: float, rng,
                  rng_channels=None, batch: int = 4096,
                  t_hi: float | None = None) -> JumpRecord:
    """Long telegraph record for a constant-reset model.

    Gaps are iid, so they are drawn in vectorized batches until their sum
    crosses total_time (the crossing gap is kept).  Channel labels are
    attributed afterwards from a second, independent stream, which keeps the
    gap sequence invariant under changes in channel handling.
    """
    if model.reset_state is None:
        raise ValueError("telegraph_run needs a constant reset state")
    if isinstance(rng, RngStream):
        rng = rng.generator()
    if isinstance(rng_channels, RngStream):
        rng_channels = rng_channels.generator()
    if t_hi is None:
        t_hi = 900.0 / model.beta_fast
    flow = NullFlow(model.generator, model.reset_state)
    chunks = []
    tot = 0.0
    while tot < total_time:
        g = sample_gaps(flow.survival, batch, rng, t_hi)
        cs = np.cumsum(g)
        if tot + cs[-1] >= total_time:
            k = int(np.searchsorted(tot + cs, total_time)) + 1
            chunks.append(g[:k])
            tot += cs[min(k, g.size) - 1]
            break
        chunks.append(g)
        tot += cs[-1]
    gaps = np.concatenate(chunks) if chunks else np.empty(0)
    times = np.cumsum(gaps)

    nj = gaps.size
    if len(model.jump_ops) == 1 or rng_channels is None:
        channels = np.zeros(nj, dtype=int)
    else:
        amps = flow.state(gaps)                      # (d, nj)
        rates = np.empty((len(model.jump_ops), nj))
        for i, L in enumerate(model.jump_ops):
            rates[i] = np.sum(np.abs(L @ amps) ** 2, axis=0)
        tot_r = rates.sum(axis=0)
        tot_r[tot_r == 0.0] = 1.0
        probs = rates / tot_r
        u2 = rng_channels.random(nj)
        if len(model.jump_ops) == 2:
            channels = np.where(u2 < probs[0], 0, 1).astype(int)
        else:
            cum = np.cumsum(probs, axis=0)
            channels = np.sum(u2[np.newaxis, :] >= cum[:-1], axis=0)
    return JumpRecord(times, channels, model.labels,
                      model.reset_state.copy(), float(max(total_time, tot)))


@dataclass(frozen=True)
class TelegraphStats:
    """Dark-time statistics of a jump record at a given threshold."""

    p_dark: float
    p_dark_se: float              # delta-method standard error
    dark_durations: np.ndarray    # gap lengths above threshold
    branch_fractions: dict        # label -> share of dark periods it ends
    threshold: float
    total_time: float
    n_dark: int


def telegraph_stats(record: JumpRecord, dark_threshold: float) -> TelegraphStats:
    """Dark fraction, dark-duration sample, and terminating-channel shares.

    A dark period is an inter-click gap longer than dark_threshold; p_dark is
    total dark time over total observed time.  The standard error treats each
    gap as one observation of (dark time, time) and propagates the ratio.
    """
    gaps = record.gaps()
    total = float(gaps.sum())
    if total <= 0.0:
        return TelegraphStats(0.0, 0.0, np.empty(0), {}, dark_threshold, 0.0, 0)
    dark_mask = gaps > dark_threshold
    dark = gaps[dark_mask]
    p = float(dark.sum() / total)
    resid = np.where(dark_mask, gaps, 0.0) - p * gaps
    se = float(np.sqrt(np.sum(resid ** 2)) / total)
    branch: dict = {}
    n_dark = int(dark_mask.sum())
    if n_dark and record.channels.size == gaps.size:
        term = record.channels[dark_mask]
        for k, label in enumerate(record.labels):
            branch[label] = float(np.mean(term == k))
    return TelegraphStats(p, se, dark, branch, float(dark_threshold),
                          total, n_dark)


@dataclass(frozen=True)
class TelegraphTrace:
    """Bright/dark segmentation of a record: maximal bright runs merged,
    each dark gap its own segment.  Segments partition [0, last click]."""

    threshold: float
    starts: np.ndarray
    ends: np.ndarray
    dark: np.ndarray              # bool per segment
    terminating_label: tuple      # channel name ending each segment

    @property
    def durations(self) -> np.ndarray:
        return self.ends - self.starts


def telegraph_trace(record: JumpRecord, dark_threshold: float) -> TelegraphTrace:
    gaps = record.gaps()
    if gaps.size == 0:
        return TelegraphTrace(float(dark_threshold), np.empty(0), np.empty(0),
                              np.empty(0, dtype=bool), ())
    is_dark = gaps > dark_threshold
    starts, ends, dark_flags, term = [], [], [], []
    seg_start = 0.0
    for i in range(gaps.size):
        t_end = record.times[i]
        if is_dark[i]:
            # close any open bright run, then the dark gap stands alone
            if seg_start < t_end - gaps[i]:
                starts.append(seg_start)
                ends.append(t_end - gaps[i])
                dark_flags.append(False)
                term.append(record.labels[record.channels[i - 1]]
                            if i > 0 else "")
            starts.append(t_end - gaps[i])
            ends.append(t_end)
            dark_flags.append(True)
            term.append(record.labels[record.channels[i]])
            seg_start = t_end
    if seg_start < record.times[-1]:
        starts.append(seg_start)
        ends.append(record.times[-1])
        dark_flags.append(False)
        term.append(record.labels[record.channels[-1]])
    return TelegraphTrace(float(dark_threshold), np.array(starts),
                          np.array(ends), np.array(dark_flags, dtype=bool),
                          tuple(term))


def ensemble_map(fn, n: int, max_workers: int | None = None) -> list:
    """fn(i) for i in range(n), threaded, results returned in slot order.

    Slot-ordered collection plus per-index random streams is what makes the
    reduction independent of scheduling, so threaded runs stay byte-stable.
    """
    workers = max_workers if max_workers is not None else thread_count()
    out = [None] * n
    if workers <= 1 or n <= 1:
        for i in range(n):
            out[i] = fn(i)
        return out
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = {pool.submit(fn, i): i for i in range(n)}
        for fut, i in futures.items():
            out[i] = fut.result()
    return out


def _lindblad_rhs(model: EffectiveModel):
    d = model.dim
    G = model.generator
    Ls = model.jump_ops

    def rhs(t, y):
        rho = y.reshape(d, d)
        drho = G @ rho + rho @ G.conj().T
        for L in Ls:
            drho = drho + L @ rho @ L.conj().T
        return drho.reshape(-1)

    return rhs


def lindblad_consistency(model: EffectiveModel, ntraj: int, t: float,
                         seedbase: int, max_workers: int | None = None) -> dict:
    """Compare the jump-unraveling ensemble to direct density-matrix
    integration.

    The ensemble average uses normalized projectors at time t (trajectories
    sampled by inverse transform already carry the physical measure).  The
    direct solution integrates drho/dt = G rho + rho G^dag + sum L rho L^dag.
    Returns a report with elementwise deviations against the 5/sqrt(ntraj)
    Monte Carlo band.
    """
    d = model.dim
    psi0 = model.initial_state / np.linalg.norm(model.initial_state)
    rho0 = np.outer(psi0, psi0.conj())
    rho_direct = integrate_ode(_lindblad_rhs(model), rho0.reshape(-1),
                               0.0, t, tol=1e-10).reshape(d, d)

    def one(i: int) -> np.ndarray:
        rec = run_trajectory(model, t, RngStream(seedbase, i))
        psi_t = rec.final_state / np.linalg.norm(rec.final_state)
        return np.outer(psi_t, psi_t.conj())

    projectors = ensemble_map(one, ntraj, max_workers)
    rho_mc = np.zeros((d, d), dtype=complex)
    for p in projectors:          # fixed summation order
        rho_mc += p
    rho_mc /= ntraj

    dev = np.abs(rho_mc - rho_direct)
    tol = 5.0 / np.sqrt(ntraj)
    return {
        "rho_direct": rho_direct,
        "rho_ensemble": rho_mc,
        "deviation": dev,
        "max_deviation": float(dev.max()),
        "tolerance": tol,
        "passed": bool(dev.max() < tol),
        "ntraj": int(ntraj),
        "t": float(t),
    }
