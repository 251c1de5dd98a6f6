"""Piecewise-constant profiles on the line."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .model import State


@dataclass
class Profile:
    """Sorted breakpoints xs and one state per interval (len(states) = len(xs)+1).

    states[0] holds on (-inf, xs[0]); states[-1] on (xs[-1], inf).
    """

    xs: np.ndarray
    states: list

    def __post_init__(self):
        self.xs = np.asarray(self.xs, dtype=float)
        self.states = [State(float(h), float(p)) for (h, p) in self.states]
        if len(self.states) != len(self.xs) + 1:
            raise ValueError("need exactly len(xs)+1 states")

    @classmethod
    def constant(cls, state) -> "Profile":
        return cls(np.empty(0), [state])

    @classmethod
    def from_jumps(cls, far_left, jumps) -> "Profile":
        """jumps: iterable of (x, state-to-the-right-of-x), sorted by x."""
        xs = [x for x, _ in jumps]
        return cls(np.asarray(xs, float), [State(*far_left)] + [State(*s) for _, s in jumps])

    def validate(self, box=None):
        if np.any(np.diff(self.xs) <= 0):
            raise ValueError("breakpoints must be strictly increasing")
        for a, b in zip(self.states, self.states[1:]):
            if a == b:
                raise ValueError(f"consecutive states equal at {a}")
        for s in self.states:
            if not (s.h >= 0 and s.p > 0):
                raise ValueError(f"state outside the hyperbolicity domain: {s}")
        if box is not None and not all(box.contains(s.h, s.p) for s in self.states):
            bad = [s for s in self.states if not box.contains(s.h, s.p)]
            raise ValueError(f"states outside K: {bad[:3]}")
        return self

    @property
    def far_left(self) -> State:
        return self.states[0]

    @property
    def far_right(self) -> State:
        return self.states[-1]

    def state_at(self, x) -> State:
        i = int(np.searchsorted(self.xs, x, side="right"))
        return self.states[i]

    def total_variation(self):
        dh = sum(abs(b.h - a.h) for a, b in zip(self.states, self.states[1:]))
        dp = sum(abs(b.p - a.p) for a, b in zip(self.states, self.states[1:]))
        return dh + dp

    def merge_equal(self) -> "Profile":
        """Drop breakpoints whose two sides carry identical states."""
        xs, states = [], [self.states[0]]
        for x, s in zip(self.xs, self.states[1:]):
            if s != states[-1]:
                xs.append(x)
                states.append(s)
        return Profile(np.asarray(xs, float), states)

    def coarsen(self, tol: float) -> "Profile":
        """Remove jumps with |dh| + |dp| < tol, keeping the far fields intact.

        The left state extends across a removed breakpoint, so the result is
        a consistent piecewise-constant profile differing from the original
        by at most the dropped jump sizes on bounded intervals.
        """
        if tol <= 0 or len(self.xs) == 0:
            return self
        xs, states = [], [self.states[0]]
        for x, s in zip(self.xs, self.states[1:]):
            if abs(s.h - states[-1].h) + abs(s.p - states[-1].p) < tol:
                continue
            xs.append(x)
            states.append(s)
        # never move the far-right value: restore the last jump if needed
        if states[-1] != self.far_right:
            xs.append(float(self.xs[-1]))
            states.append(self.far_right)
        return Profile(np.asarray(xs, float), states)

    def map_states(self, f) -> "Profile":
        return Profile(self.xs.copy(), [f(s) for s in self.states])

    def conserved_integrals(self):
        """(int (h - h_inf) dx, int (p - p_inf) dx) for equal far fields."""
        if self.far_left != self.far_right:
            raise ValueError("conserved integrals need equal far-field states")
        if len(self.xs) == 0:
            return 0.0, 0.0
        h0, p0 = self.far_left
        lens = np.diff(self.xs)
        hmid = np.array([s.h for s in self.states[1:-1]])
        pmid = np.array([s.p for s in self.states[1:-1]])
        return (float(math.fsum((hmid - h0) * lens)),
                float(math.fsum((pmid - p0) * lens)))

    def refine_with(self, *others):
        """Common breakpoint refinement of several profiles.

        Returns (cuts, list-of-state-lists): cuts has the merged breakpoints,
        and each state list gives the owning profile's state on each of the
        len(cuts)+1 intervals.
        """
        cuts = np.unique(np.concatenate([self.xs] + [o.xs for o in others]))
        out = []
        for prof in (self,) + others:
            idx = np.searchsorted(prof.xs, cuts, side="right")
            states = [prof.states[0]]
            for i in idx:
                states.append(prof.states[i])
            out.append(states)
        return cuts, out
