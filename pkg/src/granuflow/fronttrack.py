"""Event-driven epsilon-front-tracking for the homogeneous system.

A TrackedSolution owns an ordered list of fronts (exact Hugoniot jumps moving
at their RH speeds) plus a lazy priority queue of pairwise collision events.
Simultaneous events are processed in increasing x; a re-collision produced at
exactly the current time is nudged forward by one ulp so that every processed
interaction is binary.
"""

from __future__ import annotations

import heapq
import itertools
from dataclasses import dataclass

import numpy as np

from .model import State
from .profiles import Profile
from .riemann import partition_rarefaction, solve_riemann
from .wavecurves import riemann_P
from . import functionals

_TIME_BUMP = 2.0 ** -52


class EventCascadeError(RuntimeError):
    """Event or front count exceeded the configured cap."""


@dataclass
class FrontSegment:
    """One straight piece of a front trajectory in the (x, t) plane."""

    family: int
    kind: str
    t0: float
    x0: float
    speed: float
    left: State
    right: State
    gamma: float
    rho: float
    p_left: float
    P_left: float
    t1: float | None = None
    x1: float | None = None    # exact death position (collision point)

    def x_at(self, t):
        # colliding partners must coincide exactly at their event
        if self.t1 is not None and self.x1 is not None and t == self.t1:
            return self.x1
        return self.x0 + self.speed * (t - self.t0)


class _Front:
    __slots__ = ("seg", "x_ref", "t_ref", "version")

    def __init__(self, seg, x, t):
        self.seg = seg
        self.x_ref = x
        self.t_ref = t
        self.version = 0

    @property
    def speed(self):
        return self.seg.speed

    def x_at(self, t):
        return self.x_ref + self.seg.speed * (t - self.t_ref)


@dataclass
class InteractionRecord:
    time: float
    x: float
    incoming: list     # (family, kind, rho, gamma)
    outgoing: list
    delta_V: float
    delta_Q: float
    delta_G: float
    G_pre: float
    G_post: float
    V_post: float = 0.0
    Q_post: float = 0.0


class TrackedSolution:
    def __init__(self, profile: Profile, eps: float, box=None, omega_delta: float = 0.1,
                 t0: float = 0.0, max_events: int = 10 ** 6, max_fronts: int = 10 ** 5,
                 track_g: bool = True, drop_tol: float = 1e-14,
                 speed_jitter: float = 0.0):
        """speed_jitter > 0 adds a deterministic perturbation of at most
        speed_jitter*eps to each front's speed, breaking pathological
        simultaneous collisions at the cost of exact front-by-front
        conservation (off by default; RH speeds are exact)."""
        if eps <= 0:
            raise ValueError("eps must be positive")
        profile.validate()
        self.eps = eps
        self.drop_tol = drop_tol
        self.speed_jitter = speed_jitter
        self._jit_count = itertools.count()
        self.box = box
        self.omega_delta = omega_delta
        self.time = t0
        self.far_left = profile.far_left
        self.max_events = max_events
        self.max_fronts = max_fronts
        self.track_g = track_g
        self.fronts: list[_Front] = []
        self.segments: list[FrontSegment] = []
        self.event_log: list[InteractionRecord] = []
        self.events_processed = 0
        self.max_tv_seen = 0.0
        self.box_violations = 0
        self._heap = []
        self._seq = itertools.count()
        self._kappas = functionals.Kappas(delta_bar=omega_delta)
        for x, s_right in zip(profile.xs, profile.states[1:]):
            left = self.fronts[-1].seg.right if self.fronts else profile.far_left
            fan = solve_riemann(left, s_right, eps=self.eps)
            self._emit_fan(fan, float(x))
        self._rebuild_queue()
        self._sync_g()
        self._tv = self.profile().total_variation()
        self.max_tv_seen = self._tv
        self._check_box(self.fronts)

    # -- construction helpers ------------------------------------------------

    def _emit_fan(self, fan, x):
        for w in fan.waves:
            parts = partition_rarefaction(w, self.eps) if w.kind == "rarefaction" else [w]
            for pw in parts:
                if abs(pw.gamma) < self.drop_tol:
                    continue
                speed = pw.speed
                if self.speed_jitter > 0.0:
                    k = next(self._jit_count)
                    # golden-ratio low-discrepancy sequence in [-1, 1]
                    speed += self.speed_jitter * self.eps * (
                        2.0 * ((k * 0.6180339887498949) % 1.0) - 1.0)
                seg = FrontSegment(
                    family=pw.family, kind=pw.kind, t0=self.time, x0=x,
                    speed=speed, left=pw.left, right=pw.right,
                    gamma=pw.gamma, rho=pw.rho,
                    p_left=pw.left.p,
                    P_left=float(riemann_P(*pw.left)),
                    t1=None)
                self.segments.append(seg)
                self.fronts.append(_Front(seg, x, self.time))
        if len(self.fronts) > self.max_fronts:
            raise EventCascadeError(f"front count exceeded {self.max_fronts}")

    def _check_box(self, fronts):
        if self.box is None:
            return
        lo, hi = -1e-12, self.box.delta0 + 1e-12
        plo, phi_ = self.box.p0 - 1e-12, self.box.p1 + 1e-12
        for f in fronts:
            for s in (f.seg.left, f.seg.right):
                if not (lo <= s.h <= hi and plo <= s.p <= phi_):
                    self.box_violations += 1

    @staticmethod
    def _wave_tuple(seg):
        return (seg.family, seg.rho, seg.p_left, seg.P_left,
                bool(functionals.shock_flag(seg.family, seg.gamma, seg.p_left)))

    def _sync_g(self):
        """Recompute the running V, Q and the order-catalog arrays in full."""
        segs = [f.seg for f in self.fronts]
        self._ofam = np.array([s.family for s in segs], dtype=int)
        self._orho = np.array([s.rho for s in segs], dtype=float)
        self._opl = np.array([s.p_left for s in segs], dtype=float)
        self._oPl = np.array([s.P_left for s in segs], dtype=float)
        self._osh = functionals.shock_flag(
            np.array([s.family for s in segs]),
            np.array([s.gamma for s in segs]),
            np.array([s.p_left for s in segs])).astype(bool) if segs else np.empty(0, bool)
        cat = functionals.JumpCatalog(self._ofam, np.arange(len(segs), dtype=float),
                                      self._orho, self._opl, self._oPl, self._osh)
        self._V = functionals.total_strength(cat)[0]
        self._Q = functionals.interaction_potential(cat, self._kappas)[3]

    def _q_delta(self, i, old_segs, new_segs):
        """Exact change of (V, Q) when fronts [i, i+1] become new_segs."""
        k = self._kappas
        left = (self._ofam[:i], self._orho[:i], self._opl[:i], self._oPl[:i],
                self._osh[:i])
        right = (self._ofam[i + 2:], self._orho[i + 2:], self._opl[i + 2:],
                 self._oPl[i + 2:], self._osh[i + 2:])
        olds = [self._wave_tuple(s) for s in old_segs]
        news = [self._wave_tuple(s) for s in new_segs]

        def block(waves):
            q = 0.0
            for w in waves:
                q += functionals.q_cross(left, w, False, k)
                q += functionals.q_cross(right, w, True, k)
            for a in range(len(waves)):
                for b in range(a + 1, len(waves)):
                    q += functionals.q_pair(waves[a], waves[b], k)
            return q

        dq = block(news) - block(olds)
        dv = (sum(abs(w[1]) for w in news) - sum(abs(w[1]) for w in olds))
        return dv, dq

    # -- queue management ----------------------------------------------------

    def _collision(self, i):
        """Schedule the collision of fronts i and i+1, if converging."""
        a, b = self.fronts[i], self.fronts[i + 1]
        dv = a.speed - b.speed
        if dv <= 0:
            return
        t_hit = self.time + max(b.x_at(self.time) - a.x_at(self.time), 0.0) / dv
        if t_hit <= self.time:
            t_hit = self.time + abs(self.time) * _TIME_BUMP + 1e-300
        x_hit = a.x_at(t_hit)
        heapq.heappush(self._heap, (t_hit, x_hit, next(self._seq),
                                    a, b, a.version, b.version))

    def _rebuild_queue(self):
        self._heap = []
        for i in range(len(self.fronts) - 1):
            self._collision(i)

    def next_event(self):
        """Earliest valid (time, x, index-of-left-front) collision, or None."""
        while self._heap:
            t, x, _, a, b, va, vb = self._heap[0]
            if a.version != va or b.version != vb:
                heapq.heappop(self._heap)
                continue
            try:
                i = self.fronts.index(a)
            except ValueError:
                heapq.heappop(self._heap)
                continue
            if i + 1 >= len(self.fronts) or self.fronts[i + 1] is not b:
                heapq.heappop(self._heap)
                continue
            return t, x, i
        return None

    # -- evolution -----------------------------------------------------------

    def _advance(self, t):
        if t < self.time:
            raise ValueError("cannot advance backwards")
        self.time = t

    def resolve_next(self):
        """Process the earliest event; returns its InteractionRecord or None."""
        ev = self.next_event()
        if ev is None:
            return None
        t, x, i = ev
        heapq.heappop(self._heap)
        self._advance(t)
        a, b = self.fronts[i], self.fronts[i + 1]

        outer_l, outer_r = a.seg.left, b.seg.right
        old_segs = (a.seg, b.seg)
        for f in (a, b):
            f.seg.t1 = t
            f.seg.x1 = x
            f.version += 1
        fan = solve_riemann(outer_l, outer_r, eps=self.eps)
        incoming = [(f.seg.family, f.seg.kind, f.seg.rho, f.seg.gamma, f.seg.p_left)
                    for f in (a, b)]
        keep_tail = self.fronts[i + 2:]
        self.fronts = self.fronts[:i]
        n_before = len(self.fronts)
        self._emit_fan(fan, x)
        new_fronts = self.fronts[n_before:]
        self.fronts.extend(keep_tail)

        # repair the queue locally: new pairs around the splice
        for j in range(max(n_before - 1, 0), min(n_before + len(new_fronts), len(self.fronts) - 1)):
            self._collision(j)

        rec = None
        if self.track_g:
            new_segs = [f.seg for f in new_fronts]
            dv, dq = self._q_delta(i, old_segs, new_segs)
            V0, Q0 = self._V, self._Q
            V1, Q1 = V0 + dv, Q0 + dq
            rec = InteractionRecord(
                time=t, x=x, incoming=incoming,
                outgoing=[(w.family, w.kind, w.rho, w.gamma, w.left.p) for w in fan.waves],
                delta_V=dv, delta_Q=dq, delta_G=dv + dq,
                G_pre=V0 + Q0, G_post=V1 + Q1, V_post=V1, Q_post=Q1)
            self.event_log.append(rec)
            self._V, self._Q = V1, Q1
        # splice the order-catalog arrays and the running total variation
        def seg_cols(segs):
            fam = np.array([s.family for s in segs], dtype=int)
            gam = np.array([s.gamma for s in segs], dtype=float)
            pl = np.array([s.p_left for s in segs], dtype=float)
            return (fam,
                    np.array([s.rho for s in segs], dtype=float),
                    pl,
                    np.array([s.P_left for s in segs], dtype=float),
                    functionals.shock_flag(fam, gam, pl).astype(bool)
                    if segs else np.empty(0, bool))

        cols = seg_cols([f.seg for f in new_fronts])
        for name, col in zip(("_ofam", "_orho", "_opl", "_oPl", "_osh"), cols):
            arr = getattr(self, name)
            setattr(self, name, np.concatenate([arr[:i], col, arr[i + 2:]]))
        jump = lambda s: abs(s.right.h - s.left.h) + abs(s.right.p - s.left.p)
        self._tv += (sum(jump(f.seg) for f in new_fronts)
                     - jump(old_segs[0]) - jump(old_segs[1]))
        self.max_tv_seen = max(self.max_tv_seen, self._tv)
        self._check_box(new_fronts)

        self.events_processed += 1
        if self.events_processed > self.max_events:
            raise EventCascadeError(f"event count exceeded {self.max_events}")
        if self.track_g and self.events_processed % 512 == 0:
            self._sync_g()
        return rec

    def evolve(self, T):
        """Process all events with time <= T, then advance to T."""
        if T < self.time:
            raise ValueError("horizon before current time")
        while True:
            ev = self.next_event()
            if ev is None or ev[0] > T:
                break
            self.resolve_next()
        self._advance(T)
        return self

    # -- views ---------------------------------------------------------------

    def profile(self) -> Profile:
        """Piecewise-constant view at the current time."""
        xs, states = [], [self.far_left]
        for f in self.fronts:
            xs.append(f.x_at(self.time))
            states.append(f.seg.right)
        prof = Profile(np.asarray(xs, float), states)
        # coincident breakpoints can appear at interaction instants
        if len(prof.xs) and np.any(np.diff(prof.xs) <= 0):
            keep_x, keep_s = [], [states[0]]
            for x, s in zip(xs, states[1:]):
                if keep_x and x <= keep_x[-1]:
                    keep_s[-1] = s
                    continue
                keep_x.append(x)
                keep_s.append(s)
            prof = Profile(np.asarray(keep_x, float), keep_s)
        return prof.merge_equal()

    def sample(self, t, grid=None) -> Profile:
        """Profile at any past (or current inter-event) time from the segment log."""
        if t > self.time:
            nxt = self.next_event()
            if nxt is not None and t > nxt[0]:
                raise ValueError("t beyond the evolved horizon")
        live = [s for s in self.segments if s.t0 <= t and (s.t1 is None or t < s.t1)]
        live.sort(key=lambda s: (s.x_at(t), s.speed))
        xs, states = [], [self.far_left]
        for s in live:
            x = s.x_at(t)
            if xs and x <= xs[-1]:
                states[-1] = s.right
                continue
            xs.append(x)
            states.append(s.right)
        prof = Profile(np.asarray(xs, float), states).merge_equal()
        if grid is not None:
            grid = np.asarray(grid, float)
            return Profile(grid, [prof.state_at(grid[0] - 1.0)]
                           + [prof.state_at(0.5 * (a + b)) for a, b in zip(grid, grid[1:])]
                           + [prof.state_at(grid[-1] + 1.0)])
        return prof

    def catalog(self):
        """JumpCatalog of the current fronts (for the functionals module)."""
        segs = [f.seg for f in self.fronts]
        return functionals.JumpCatalog(
            family=np.array([s.family for s in segs], dtype=int),
            x=np.array([f.x_at(self.time) for f in self.fronts], dtype=float),
            rho=np.array([s.rho for s in segs], dtype=float),
            p_left=np.array([s.p_left for s in segs], dtype=float),
            P_left=np.array([s.P_left for s in segs], dtype=float),
            is_shock=functionals.shock_flag(
                np.array([s.family for s in segs]),
                np.array([s.gamma for s in segs]),
                np.array([s.p_left for s in segs])).astype(bool)
            if segs else np.empty(0, bool))

    def _segment_arrays(self):
        if getattr(self, "_segarr_n", -1) != len(self.segments):
            segs = self.segments
            self._segarr_n = len(segs)
            self._sa = dict(
                t0=np.array([s.t0 for s in segs]),
                t1=np.array([np.inf if s.t1 is None else s.t1 for s in segs]),
                x0=np.array([s.x0 for s in segs]),
                x1=np.array([np.nan if s.x1 is None else s.x1 for s in segs]),
                speed=np.array([s.speed for s in segs]),
                family=np.array([s.family for s in segs], dtype=int),
                rho=np.array([s.rho for s in segs]),
                p_left=np.array([s.p_left for s in segs]),
                P_left=np.array([s.P_left for s in segs]),
                gamma=np.array([s.gamma for s in segs]),
                shock=functionals.shock_flag(
                    np.array([s.family for s in segs]),
                    np.array([s.gamma for s in segs]),
                    np.array([s.p_left for s in segs])).astype(bool)
                if segs else np.empty(0, bool),
                rh=np.array([s.right.h for s in segs]),
                rp=np.array([s.right.p for s in segs]))
        return self._sa

    def snapshot(self, t, side="post"):
        """(Profile, JumpCatalog) reconstructed from the segment history at t.

        side="pre" gives the configuration just before an event at t,
        side="post" just after; away from events the two agree.
        """
        sa = self._segment_arrays()
        if side == "pre":
            alive = (sa["t0"] < t) & (sa["t1"] >= t)
            tie = -sa["speed"]      # faster colliding front sits on the left
        else:
            alive = (sa["t0"] <= t) & (sa["t1"] > t)
            tie = sa["speed"]
        idx = np.nonzero(alive)[0]
        x = sa["x0"][idx] + sa["speed"][idx] * (t - sa["t0"][idx])
        at_death = sa["t1"][idx] == t
        x = np.where(at_death & np.isfinite(sa["x1"][idx]), sa["x1"][idx], x)
        order = np.lexsort((tie[idx], x))
        idx = idx[order]
        x = x[order]
        for k in range(1, len(x)):
            if x[k] <= x[k - 1]:
                x[k] = np.nextafter(x[k - 1], np.inf)
        states = [self.far_left] + [State(h, p) for h, p in
                                    zip(sa["rh"][idx], sa["rp"][idx])]
        prof = Profile(x, states)
        cat = functionals.JumpCatalog(
            family=sa["family"][idx], x=x, rho=sa["rho"][idx],
            p_left=sa["p_left"][idx], P_left=sa["P_left"][idx],
            is_shock=sa["shock"][idx])
        return prof, cat

    def snapshot_raw(self, t, side="post"):
        """((x, h, p) arrays, JumpCatalog) without Profile construction."""
        sa = self._segment_arrays()
        if side == "pre":
            alive = (sa["t0"] < t) & (sa["t1"] >= t)
            tie = -sa["speed"]
        else:
            alive = (sa["t0"] <= t) & (sa["t1"] > t)
            tie = sa["speed"]
        idx = np.nonzero(alive)[0]
        x = sa["x0"][idx] + sa["speed"][idx] * (t - sa["t0"][idx])
        at_death = sa["t1"][idx] == t
        x = np.where(at_death & np.isfinite(sa["x1"][idx]), sa["x1"][idx], x)
        order = np.lexsort((tie[idx], x))
        idx = idx[order]
        x = x[order]
        for k in range(1, len(x)):
            if x[k] <= x[k - 1]:
                x[k] = np.nextafter(x[k - 1], np.inf)
        h = np.concatenate([[self.far_left.h], sa["rh"][idx]])
        p = np.concatenate([[self.far_left.p], sa["rp"][idx]])
        cat = functionals.JumpCatalog(
            family=sa["family"][idx], x=x, rho=sa["rho"][idx],
            p_left=sa["p_left"][idx], P_left=sa["P_left"][idx],
            is_shock=sa["shock"][idx])
        return (x, h, p), cat

    def conserved_integrals(self):
        return self.profile().conserved_integrals()


def init_tracking(profile: Profile, eps: float, **kw) -> TrackedSolution:
    return TrackedSolution(profile, eps, **kw)


def next_event(ts: TrackedSolution):
    return ts.next_event()


def resolve_interaction(ts: TrackedSolution):
    return ts.resolve_next()


def evolve(ts: TrackedSolution, T: float) -> TrackedSolution:
    return ts.evolve(T)


def sample(ts: TrackedSolution, t: float, grid=None) -> Profile:
    return ts.sample(t, grid)
