"""Exact one-dimensional set algebra and thinness functionals.

Sets are finite unions of closed intervals kept in canonical form (sorted,
pairwise disjoint, non-degenerate).  Every functional here is measure
theoretic, so boundary conventions never matter; touching intervals are
merged and zero-length pieces are dropped.

The thinness ratio of a set ``S`` at a point ``x`` is

    |S ∩ B(x, rho(x))| / |B(x, rho(x))|,   rho(x) = min(1, 1/|x|),

and its supremum over ``|x| > R`` is the profile that decides whether a set
is very thin at infinity.  The supremum is computed exactly: on every piece
between breakpoints (where a ball edge crosses an interval endpoint) the
ratio is a polynomial of degree at most two in ``x``, so the maximum is
attained at a breakpoint or at a single stationary point.
"""

from __future__ import annotations

import csv
import enum
import io
import json
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

# Floor for the error reported on quantities computed exactly in doubles.
ROUNDING_ERROR = 1e-12


def rho(x):
    """Radial scale ``min(1, 1/|x|)``; accepts scalars or arrays."""
    ax = np.abs(np.asarray(x, dtype=float))
    with np.errstate(divide="ignore"):
        out = np.where(ax <= 1.0, 1.0, 1.0 / np.where(ax <= 1.0, 1.0, ax))
    if out.ndim == 0:
        return float(out)
    return out


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float

    def __post_init__(self):
        if not self.lo <= self.hi:
            raise ValueError(f"invalid interval [{self.lo}, {self.hi}]")

    @property
    def length(self) -> float:
        return self.hi - self.lo


class IntervalSet:
    """Finite disjoint union of closed intervals on the real line."""

    __slots__ = ("lo", "hi", "_cum")

    def __init__(self, items: Iterable = ()):
        pairs = [(it.lo, it.hi) if isinstance(it, Interval) else tuple(it) for it in items]
        if pairs:
            arr = np.asarray(pairs, dtype=float).reshape(-1, 2)
        else:
            arr = np.zeros((0, 2))
        if np.any(arr[:, 0] > arr[:, 1]):
            raise ValueError("interval with lo > hi")
        lo, hi = _canonicalize(arr[:, 0], arr[:, 1])
        self.lo = lo
        self.hi = hi
        self.lo.flags.writeable = False
        self.hi.flags.writeable = False
        self._cum = None

    @classmethod
    def from_arrays(cls, lo, hi) -> "IntervalSet":
        return cls(zip(np.asarray(lo, float), np.asarray(hi, float)))

    @classmethod
    def empty(cls) -> "IntervalSet":
        return cls()

    # -- basic protocol ---------------------------------------------------
    @property
    def items(self) -> list[Interval]:
        return [Interval(float(a), float(b)) for a, b in zip(self.lo, self.hi)]

    def __len__(self):
        return self.lo.size

    def __iter__(self):
        return iter(self.items)

    def __bool__(self):
        return self.lo.size > 0

    def __eq__(self, other):
        if not isinstance(other, IntervalSet):
            return NotImplemented
        return np.array_equal(self.lo, other.lo) and np.array_equal(self.hi, other.hi)

    def __repr__(self):
        body = ", ".join(f"[{a:g}, {b:g}]" for a, b in zip(self.lo[:6], self.hi[:6]))
        more = ", ..." if len(self) > 6 else ""
        return f"IntervalSet({body}{more})"

    def to_list(self) -> list[list[float]]:
        return [[float(a), float(b)] for a, b in zip(self.lo, self.hi)]

    @property
    def bounds(self) -> tuple[float, float]:
        if not self:
            return (0.0, 0.0)
        return float(self.lo[0]), float(self.hi[-1])

    # -- measure ------------------------------------------------------------
    def measure(self) -> float:
        return float(np.sum(self.hi - self.lo))

    def _cumulative(self):
        if self._cum is None:
            self._cum = np.concatenate([[0.0], np.cumsum(self.hi - self.lo)])
        return self._cum

    def distribution(self, t):
        """``|S ∩ (-inf, t]|`` for scalar or array ``t``."""
        t = np.asarray(t, dtype=float)
        cum = self._cumulative()
        idx = np.searchsorted(self.lo, t, side="right")  # intervals starting at or before t
        prev = np.maximum(idx - 1, 0)
        full = cum[prev]
        if self.lo.size == 0:
            return np.zeros_like(t)
        partial = np.clip(t - self.lo[prev], 0.0, self.hi[prev] - self.lo[prev])
        return np.where(idx > 0, full + partial, 0.0)

    def measure_in(self, a, b):
        """Exact ``|S ∩ [a, b]|`` (vectorised over ``a``, ``b``)."""
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        out = np.where(b > a, self.distribution(b) - self.distribution(a), 0.0)
        return out

    def contains(self, t) -> np.ndarray:
        """Boolean membership for points ``t`` (closed intervals)."""
        t = np.asarray(t, dtype=float)
        if self.lo.size == 0:
            return np.zeros(t.shape, dtype=bool)
        idx = np.searchsorted(self.lo, t, side="right") - 1
        ok = idx >= 0
        safe = np.where(ok, idx, 0)
        return ok & (t <= self.hi[safe])

    def interior_index(self, t) -> np.ndarray:
        """Index of the interval whose open interior contains ``t``, else -1."""
        t = np.asarray(t, dtype=float)
        if self.lo.size == 0:
            return np.full(t.shape, -1)
        idx = np.searchsorted(self.lo, t, side="left") - 1
        ok = idx >= 0
        safe = np.where(ok, idx, 0)
        inside = ok & (t < self.hi[safe]) & (t > self.lo[safe])
        return np.where(inside, idx, -1)

    # -- algebra ------------------------------------------------------------
    def clip(self, a: float, b: float) -> "IntervalSet":
        """``S ∩ [a, b]``."""
        lo = np.maximum(self.lo, a)
        hi = np.minimum(self.hi, b)
        keep = hi > lo
        return IntervalSet.from_arrays(lo[keep], hi[keep])

    def intersect(self, other: "IntervalSet") -> "IntervalSet":
        if not self or not other:
            return IntervalSet()
        # sweep: candidate pairs are those whose ranges overlap
        i = np.searchsorted(other.hi, self.lo, side="left")
        j = np.searchsorted(other.lo, self.hi, side="right")
        los, his = [], []
        for k in range(self.lo.size):
            for m in range(i[k], j[k]):
                a = max(self.lo[k], other.lo[m])
                b = min(self.hi[k], other.hi[m])
                if b > a:
                    los.append(a)
                    his.append(b)
        return IntervalSet.from_arrays(los, his)

    def union(self, other: "IntervalSet") -> "IntervalSet":
        return IntervalSet.from_arrays(
            np.concatenate([self.lo, other.lo]), np.concatenate([self.hi, other.hi])
        )

    def complement(self) -> "IntervalSet":
        edges_lo = np.concatenate([[-np.inf], self.hi])
        edges_hi = np.concatenate([self.lo, [np.inf]])
        keep = edges_hi > edges_lo
        return IntervalSet.from_arrays(edges_lo[keep], edges_hi[keep])

    def difference(self, other: "IntervalSet") -> "IntervalSet":
        return self.intersect(other.complement())

    def scale(self, lam: float) -> "IntervalSet":
        if not lam > 0:
            raise ValueError("scale factor must be positive")
        return IntervalSet.from_arrays(lam * self.lo, lam * self.hi)

    def mirror(self) -> "IntervalSet":
        return IntervalSet.from_arrays(-self.hi[::-1], -self.lo[::-1])

    def endpoints(self) -> np.ndarray:
        return np.concatenate([self.lo, self.hi])


def _canonicalize(lo: np.ndarray, hi: np.ndarray):
    keep = hi > lo
    lo, hi = lo[keep], hi[keep]
    if lo.size == 0:
        return lo.copy(), hi.copy()
    order = np.argsort(lo, kind="stable")
    lo, hi = lo[order], hi[order]
    run_hi = np.maximum.accumulate(hi)
    # a new component starts where lo exceeds everything seen so far
    starts = np.concatenate([[True], lo[1:] > run_hi[:-1]])
    start_idx = np.flatnonzero(starts)
    end_idx = np.concatenate([start_idx[1:] - 1, [lo.size - 1]])
    return lo[start_idx].copy(), run_hi[end_idx].copy()


# ---------------------------------------------------------------------------
# spec-level functions


def measure(S: IntervalSet) -> float:
    return S.measure()


def intersect_ball(S: IntervalSet, x: float, r: float) -> float:
    """Exact measure of ``S ∩ [x - r, x + r]``."""
    if not r > 0:
        raise ValueError("radius must be positive")
    return float(S.measure_in(x - r, x + r))


def thinness_ratio(S: IntervalSet, x):
    """``|S ∩ B(x, rho(x))| / |B(x, rho(x))|``, vectorised over ``x``.

    The ball length is taken as ``(x + r) - (x - r)`` in floating point, so a
    ball that coincides with an interval of ``S`` gives exactly 1.
    """
    x = np.asarray(x, dtype=float)
    r = rho(x)
    a, b = x - r, x + r
    out = np.clip(S.measure_in(a, b) / (b - a), 0.0, 1.0)
    if out.ndim == 0:
        return float(out)
    return out


def truncate(S: IntervalSet, R: float) -> IntervalSet:
    """``S ∩ [-R, R]``."""
    if not R > 0:
        raise ValueError("R must be positive")
    return S.clip(-R, R)


def tail(S: IntervalSet, R: float) -> IntervalSet:
    """``S`` minus the open ball ``(-R, R)``; closed pieces may touch ``±R``."""
    if not R > 0:
        raise ValueError("R must be positive")
    return S.intersect(IntervalSet([(-np.inf, -R), (R, np.inf)]))


def scale_set(S: IntervalSet, lam: float) -> IntervalSet:
    return S.scale(lam)


# ---------------------------------------------------------------------------
# exact supremum of the thinness ratio


def _breakpoints_positive(S: IntervalSet, a: float, b: float) -> np.ndarray:
    """Points in [a, b] (a >= 0) where x ± rho(x) hits an endpoint of S."""
    e = S.endpoints()
    pts = [np.array([a, b, 1.0])]
    # |x| <= 1: the ball is [x - 1, x + 1]
    pts.append(e - 1.0)
    pts.append(e + 1.0)
    # x > 1: x + 1/x = e  and  x - 1/x = e
    big = e[e >= 2.0]
    pts.append((big + np.sqrt(big * big - 4.0)) / 2.0)
    pos = e[e > 0.0]
    pts.append((pos + np.sqrt(pos * pos + 4.0)) / 2.0)
    p = np.concatenate(pts)
    p = p[(p >= a) & (p <= b)]
    return np.unique(p)


def _sup_ratio_positive(S: IntervalSet, a: float, b: float) -> tuple[float, float]:
    """Exact max of the thinness ratio over x in [a, b], 0 <= a <= b."""
    if b < a:
        return 0.0, a
    if not S:
        return 0.0, a
    bp = _breakpoints_positive(S, a, b)
    cands = [bp]
    if bp.size > 1:
        mid = 0.5 * (bp[:-1] + bp[1:])
        far = mid > 1.0
        m = mid[far]
        r = 1.0 / m
        u, v = m - r, m + r
        left_in = S.interior_index(u) >= 0
        right_in = S.interior_index(v) >= 0
        # ratio = x (K - x + 1/x) / 2 when only the left ball edge sits inside S
        sel = left_in & ~right_in
        if np.any(sel):
            K = S.measure_in(u[sel], v[sel]) + u[sel]
            xs = K / 2.0
            lo_p = bp[:-1][far][sel]
            hi_p = bp[1:][far][sel]
            ok = (xs > lo_p) & (xs < hi_p)
            cands.append(xs[ok])
    c = np.concatenate(cands)
    vals = thinness_ratio(S, c)
    vals = np.atleast_1d(vals)
    k = int(np.argmax(vals))
    return float(vals[k]), float(c[k])


def sup_ratio(S: IntervalSet, a: float, b: float) -> tuple[float, float]:
    """Exact ``max`` of the thinness ratio over ``a <= |x| <= b``.

    Returns ``(value, argmax)``.
    """
    a = max(a, 0.0)
    vp, xp = _sup_ratio_positive(S, a, b)
    vn, xn = _sup_ratio_positive(S.mirror(), a, b)
    if vn > vp:
        return vn, -xn
    return vp, xp


# ---------------------------------------------------------------------------
# set families


@dataclass(frozen=True)
class SetFamily:
    """Possibly unbounded set, materialised on demand.

    ``window(W)`` returns the family intersected with ``[-W, W]``.
    ``tail_bound(R)``, when present, is a proven upper bound for the supremum
    of the thinness ratio over ``|x| > R``.  ``extent`` marks families known
    to lie inside ``[-extent, extent]``.
    """

    label: str
    window: Callable[[float], IntervalSet]
    tail_bound: Optional[Callable[[float], float]] = None
    extent: Optional[float] = None
    params: dict = field(default_factory=dict)

    def materialize(self, W: float) -> IntervalSet:
        return self.window(W)


def from_intervals(S: IntervalSet, label: str = "intervals") -> SetFamily:
    lo, hi = S.bounds
    return SetFamily(
        label=label,
        window=lambda W: S.clip(-W, W),
        extent=max(abs(lo), abs(hi)),
        params={"items": S.to_list()},
    )


def empty_family() -> SetFamily:
    return from_intervals(IntervalSet(), label="empty")


def full_line_family() -> SetFamily:
    return SetFamily(
        label="full", window=lambda W: IntervalSet([(-W, W)]), tail_bound=lambda R: 1.0
    )


def family_E1() -> SetFamily:
    """Balls ``B(n^2, rho(n^2))``, n >= 1: finite measure, not thin at infinity."""

    def window(W):
        n = np.arange(1, int(math.isqrt(int(W + 1))) + 2, dtype=float)
        c = n * n
        r = rho(c)
        return IntervalSet.from_arrays(c - r, c + r).clip(-W, W)

    return SetFamily(label="E1", window=window, tail_bound=lambda R: 1.0)


def eta(x):
    """``min(1, 1/(|x| log|x|))`` for ``|x| > 1``."""
    ax = np.abs(np.asarray(x, dtype=float))
    with np.errstate(divide="ignore"):
        val = 1.0 / (ax * np.log(ax))
    return np.minimum(1.0, val)


def _e2_tail_bound(R: float) -> float:
    # For |x| > R >= 4 the ball B(x, 1/x) meets at most one interval, centred
    # at an integer c >= R - 1/R - eta(R - 1); the ratio is then at most
    # eta(c) * |x| <= eta(c) * (c + 1/R + eta(c)), which decreases in c.
    if R < 4.0:
        return 1.0
    c = math.ceil(R - 1.0 / R - float(eta(R - 1.0)))
    c = max(c, 4)
    e = float(eta(c))
    return min(1.0, e * (c + 1.0 / R + e))


def family_E2() -> SetFamily:
    """Balls ``B(n + 1, eta(n + 1))``, n >= 1: infinite measure, very thin at infinity."""

    def window(W):
        c = np.arange(2, int(math.floor(W + 1)) + 2, dtype=float)
        r = eta(c)
        return IntervalSet.from_arrays(c - r, c + r).clip(-W, W)

    return SetFamily(label="E2", window=window, tail_bound=_e2_tail_bound)


def comb_set(eps_target: float, W: float) -> IntervalSet:
    """Dyadic comb: inside ``2^k <= |x| < 2^(k+1)`` keep the first
    ``eps_target`` fraction of every cell of length ``2^-k``.  ``|x| < 1`` is
    treated like the ``k = 0`` annulus.  The negative half is the mirror image.
    """
    if not 0 < eps_target < 1:
        raise ValueError("eps_target must lie in (0, 1)")
    # [0, 1) and [1, 2) both use unit cells
    starts = [np.arange(0.0, 2.0, 1.0)]
    widths = [np.full(2, eps_target)]
    k = 1
    while 2.0**k < W:
        c = 2.0**-k
        s = np.arange(2.0**k, 2.0 ** (k + 1), c)
        starts.append(s)
        widths.append(np.full(s.size, eps_target * c))
        k += 1
    s = np.concatenate(starts)
    w = np.concatenate(widths)
    lo = np.concatenate([s, -(s + w)])
    hi = np.concatenate([s + w, -s])
    return IntervalSet.from_arrays(lo, hi).clip(-W, W)


def comb_family(eps_target: float, W: float) -> SetFamily:
    S = comb_set(eps_target, W)
    return SetFamily(
        label=f"comb({eps_target:g},{W:g})",
        window=lambda V: S.clip(-V, V),
        extent=float(W),
        params={"eps_target": eps_target, "W": W},
    )


# ---------------------------------------------------------------------------
# profiles


@dataclass
class ThinnessProfile:
    label: str
    entries: list = field(default_factory=list)  # (R, theta, certified_error)

    @property
    def R(self):
        return np.array([e[0] for e in self.entries])

    @property
    def theta(self):
        return np.array([e[1] for e in self.entries])

    @property
    def err(self):
        return np.array([e[2] for e in self.entries])

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "entries": [{"R": r, "theta": t, "err": e} for r, t, e in self.entries],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["R", "theta", "err"])
        for r, t, e in self.entries:
            w.writerow([repr(float(r)), repr(float(t)), repr(float(e))])
        return buf.getvalue()


def _windowed_sup(F: SetFamily, R: float, W: float) -> tuple[float, float, float]:
    """(theta, upper, argmax) for the sup over |x| > R using window W."""
    S = F.window(W)
    if F.extent is not None and F.extent <= W:
        # the window holds the whole set; beyond extent + 1 the ratio vanishes
        theta, xm = sup_ratio(S, R, max(R, F.extent + 1.0))
        return theta, theta, xm
    stop = W - 1.0
    theta, xm = sup_ratio(S, R, stop) if stop >= R else (0.0, R)
    beyond = F.tail_bound(max(stop, R)) if F.tail_bound is not None else 1.0
    return theta, max(theta, beyond), xm


def thin_profile(
    F: SetFamily,
    R_list: Sequence[float],
    tol: float = 1e-3,
    W: Optional[float] = None,
    max_window: float = 2.0**16,
) -> ThinnessProfile:
    """Supremum of the thinness ratio over ``|x| > R`` for each ``R``.

    The windowed part is exact; the region beyond the window is covered by the
    family's certified tail bound.  The window is doubled until the reported
    error is at most ``tol`` or ``max_window`` is reached, in which case the
    wider error is reported as is.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    R_list = [float(r) for r in R_list]
    if any(r <= 0 for r in R_list) or any(b <= a for a, b in zip(R_list, R_list[1:])):
        raise ValueError("R_list must be positive and increasing")
    prof = ThinnessProfile(label=F.label)
    for R in R_list:
        Wc = W if W is not None else max(2.0 * R, R + 8.0)
        while True:
            theta, upper, _ = _windowed_sup(F, R, Wc)
            err = max(upper - theta, ROUNDING_ERROR)
            done = err <= tol or (F.extent is not None and F.extent <= Wc)
            if done or W is not None or Wc >= max_window:
                break
            Wc = min(2.0 * Wc, max_window)
        prof.entries.append((R, theta, err))
    return prof


class Thinness(enum.Enum):
    THIN = "Thin"
    NOT_THIN = "NotThin"
    UNKNOWN = "Unknown"


@dataclass
class ThinResult:
    verdict: Thinness
    sup: float
    upper: float
    witness: float

    @property
    def gap(self) -> float:
        return self.upper - self.sup


def is_eps_thin(F: SetFamily, eps: float, W: float = 64.0, tol: float = 1e-3) -> ThinResult:
    """Decide ``sup_x ratio < eps`` over the whole line, with a certified margin."""
    if not (eps > 0 and W > 0 and tol > 0):
        raise ValueError("eps, W and tol must be positive")
    S = F.window(W)
    if F.extent is not None and F.extent <= W:
        sup, xm = sup_ratio(S, 0.0, F.extent + 1.0)
        upper = sup
    else:
        sup, xm = sup_ratio(S, 0.0, max(W - 1.0, 0.0))
        beyond = F.tail_bound(max(W - 1.0, 1.0)) if F.tail_bound is not None else 1.0
        upper = max(sup, beyond)
    upper = upper + ROUNDING_ERROR
    if sup >= eps:
        verdict = Thinness.NOT_THIN
    elif upper < eps:
        verdict = Thinness.THIN
    else:
        verdict = Thinness.UNKNOWN
    return ThinResult(verdict, sup, upper, xm)


@dataclass
class BallEstimate:
    value: float
    certified_error: float
    argmax: float
    thinness: float  # sup of the thinness ratio over |x| > R - 1

    @property
    def constant(self) -> float:
        """Measured ratio ``value / thinness`` (the lemma's constant times 1)."""
        return self.value / self.thinness if self.thinness > 0 else 0.0


def ball_estimate_sup(F: SetFamily, R: float, W: float, tol: float = 1e-3) -> BallEstimate:
    """``sup_x |R * tail(F, R) ∩ [x - 1, x + 1]|`` over the materialised window."""
    if not R > 1:
        raise ValueError("R must exceed 1")
    S = F.window(W)
    T = tail(S, R).scale(R) if S else S
    if T:
        e = T.endpoints()
        c = np.unique(np.concatenate([e - 1.0, e + 1.0]))
        vals = T.measure_in(c - 1.0, c + 1.0)
        k = int(np.argmax(vals))
        value, xm = float(vals[k]), float(c[k])
    else:
        value, xm = 0.0, R * R
    complete = F.extent is not None and F.extent <= W
    err = ROUNDING_ERROR if complete else max(2.0 - value, ROUNDING_ERROR)
    theta = thin_profile(F, [max(R - 1.0, 1e-9)], tol=tol).theta[0]
    return BallEstimate(value, err, xm, float(theta))
