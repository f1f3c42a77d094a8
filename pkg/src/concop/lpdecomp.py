"""Littlewood-Paley splitting of the identity into a smoothing part S and a
remainder T, with their integral kernels and numerical Schur-test integrals.

With a radial bump ``phihat`` (1 on ``|xi| <= 1``, 0 on ``|xi| >= 2``) put

    phi_j(x)  = 2^j phi(2^j x),            phihat_j(xi) = phihat(2^-j xi)
    psi_0(x)  = phihat(x)
    psi_j(x)  = phihat(2^-j x) - phihat(2^(1-j) x),   j >= 1

so the spatial windows ``psi_j`` live on ``2^(j-1) < |x| < 2^(j+1)`` and
telescope to ``phihat(2^-J x)``.  Then

    S f = sum_j psi_j (phi_j * f),        T f = sum_j psi_j (f - phi_j * f),

``S + T`` is the identity wherever the windows sum to one, and

    A(x, y)    = sum_j psi_j(x) phi_j(x - y)                     (kernel of S)
    B(xi, eta) = sum_j psihat_j(xi - eta) (1 - phihat_j(eta))    (kernel of T^)

with ``psihat_j = phi_j - phi_(j-1)`` (``phi_(-1) = 0``).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Optional, Sequence

import numpy as np
from scipy.interpolate import CubicSpline

from .sets import IntervalSet
from .spectral import (
    Grid,
    PowerResult,
    forward_ft,
    inverse_ft,
    lanczos_top,
    power_iteration,
    sample_mask,
    top_eig,
)

T_TAB = 64.0
H_TAB = 2.0**-10


def smooth_step(t):
    """C-infinity step: 0 for t <= 0, 1 for t >= 1, ``g(t) / (g(t) + g(1-t))``
    with ``g(t) = exp(-1/t)`` in between."""
    t = np.asarray(t, dtype=float)

    def g(s):
        pos = s > 0
        return np.where(pos, np.exp(-1.0 / np.where(pos, s, 1.0)), 0.0)

    a, b = g(t), g(1.0 - t)
    out = a / (a + b)
    return float(out) if out.ndim == 0 else out


def phihat(xi):
    """Bump profile ``1 - smooth_step(|xi| - 1)``."""
    return 1.0 - smooth_step(np.abs(xi) - 1.0)


class TabulationError(RuntimeError):
    pass


@dataclass(frozen=True, eq=False)
class BumpProfile:
    """``phihat`` together with a cubic-spline table of ``phi`` on ``[-T, T]``."""

    z: np.ndarray
    values: np.ndarray
    truncation_bound: float
    T: float = T_TAB

    @staticmethod
    def phihat(xi):
        return phihat(xi)

    @cached_property
    def _spline(self):
        return CubicSpline(self.z, self.values)

    def phi(self, z):
        """``phi(z)``; zero outside the table (see ``truncation_bound``)."""
        z = np.asarray(z, dtype=float)
        inside = np.abs(z) <= self.T
        out = np.where(inside, self._spline(np.clip(z, -self.T, self.T)), 0.0)
        return float(out) if out.ndim == 0 else out

    def phi_j(self, j: int, z):
        s = 2.0**j
        return s * self.phi(s * np.asarray(z, dtype=float))

    def to_csv(self, stride: int = 1) -> str:
        lines = ["x,phi"]
        for a, b in zip(self.z[::stride], self.values[::stride]):
            lines.append(f"{a!r},{b!r}")
        return "\n".join(lines) + "\n"


def make_bump(T: float = T_TAB, h: float = H_TAB) -> BumpProfile:
    """Tabulate ``phi = F^-1 phihat`` with one fine inverse FFT."""
    N = int(round(2 * T / h))
    grid = Grid(2 * T, N)
    phi = inverse_ft(grid, phihat(grid.xi))
    if np.max(np.abs(phi.imag)) > 1e-12:
        raise TabulationError("phi table is not real")
    vals = phi.real
    z = grid.x
    outer = np.abs(z) >= 0.75 * T
    bound = float(np.max(np.abs(vals[outer])))
    if bound > 1e-10:
        raise TabulationError(f"phi has not decayed at the table edge ({bound:.2e})")
    # close the table symmetrically at +T
    z = np.append(z, T)
    vals = np.append(vals, vals[0])
    return BumpProfile(z, vals, bound, T)


@dataclass(frozen=True, eq=False)
class ScaleStack:
    J: int
    bump: BumpProfile

    def psi(self, j: int, x):
        if j < 0 or j > self.J:
            raise ValueError(f"scale {j} outside 0..{self.J}")
        x = np.asarray(x, dtype=float)
        if j == 0:
            return phihat(x)
        return phihat(2.0**-j * x) - phihat(2.0 ** (1 - j) * x)

    def psi_all(self, x) -> np.ndarray:
        """Array of shape ``(J + 1,) + x.shape``."""
        return np.stack([self.psi(j, x) for j in range(self.J + 1)])

    def active(self, x: float) -> list[int]:
        """Scales whose window can be non-zero at ``x``."""
        ax = abs(x)
        return [j for j in range(self.J + 1) if (j == 0 and ax < 2) or (j > 0 and 2.0 ** (j - 1) < ax < 2.0 ** (j + 1))]

    def psihat(self, j: int, z):
        out = self.bump.phi_j(j, z)
        if j > 0:
            out = out - self.bump.phi_j(j - 1, z)
        return out


def default_J(L: float) -> int:
    return math.ceil(math.log2(L / 2)) + 1


def psi_j(stack: ScaleStack, j: int, x):
    return stack.psi(j, x)


# ---------------------------------------------------------------------------
# grid operators


class LPOperators:
    """``S``, ``T`` and their adjoints on a fixed grid."""

    def __init__(self, grid: Grid, stack: ScaleStack):
        if 2.0**stack.J < grid.L / 2:
            raise ValueError(f"J={stack.J} too small: windows do not cover [-L/2, L/2)")
        self.grid = grid
        self.stack = stack
        x = grid.x
        self.windows = stack.psi_all(x)
        self.multipliers = np.stack([phihat(2.0**-j * grid.xi) for j in range(stack.J + 1)])

    def _check(self, f):
        f = np.asarray(f, dtype=complex)
        if f.shape != (self.grid.N,):
            raise ValueError("grid mismatch")
        return f

    def smooth(self, f) -> np.ndarray:
        """``phi_j * f`` for every scale, shape ``(J + 1, N)``."""
        fh = forward_ft(self.grid, self._check(f))
        return np.stack([inverse_ft(self.grid, m * fh) for m in self.multipliers])

    def S(self, f):
        return np.sum(self.windows * self.smooth(f), axis=0)

    def T(self, f):
        f = self._check(f)
        return np.sum(self.windows * (f[None, :] - self.smooth(f)), axis=0)

    def S_adj(self, g):
        g = self._check(g)
        out = np.zeros(self.grid.N, complex)
        for w, m in zip(self.windows, self.multipliers):
            out += inverse_ft(self.grid, m * forward_ft(self.grid, w * g))
        return out

    def T_adj(self, g):
        g = self._check(g)
        return np.sum(self.windows, axis=0) * g - self.S_adj(g)


def apply_S(f, grid: Grid, stack: ScaleStack) -> np.ndarray:
    return LPOperators(grid, stack).S(f)


def apply_T(f, grid: Grid, stack: ScaleStack) -> np.ndarray:
    return LPOperators(grid, stack).T(f)


# ---------------------------------------------------------------------------
# kernels


def kernel_A(bump: BumpProfile, stack: ScaleStack, x, y):
    """``A(x, y) = sum_j psi_j(x) phi_j(x - y)``; broadcasts over x and y."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    out = np.zeros(np.broadcast(x, y).shape)
    for j in range(stack.J + 1):
        w = stack.psi(j, x)
        if not np.any(w):
            continue
        out = out + w * bump.phi_j(j, x - y)
    return out


def kernel_B(bump: BumpProfile, stack: ScaleStack, xi, eta):
    """``B(xi, eta) = sum_j psihat_j(xi - eta) (1 - phihat_j(eta))``.

    Terms with ``2^j >= |eta|`` vanish, so the sum is finite for every eta.
    """
    xi = np.asarray(xi, dtype=float)
    eta = np.asarray(eta, dtype=float)
    out = np.zeros(np.broadcast(xi, eta).shape)
    jmax = int(np.ceil(np.log2(max(float(np.max(np.abs(eta))), 1.0)))) + 1
    for j in range(jmax + 1):
        damp = 1.0 - phihat(2.0**-j * eta)
        if not np.any(damp):
            continue
        out = out + stack.psihat(j, xi - eta) * damp
    return out


def kernel_in_range(bump: BumpProfile, stack: ScaleStack, x, y) -> bool:
    """False when some active scale needs phi beyond the table."""
    d = abs(x - y)
    return all(2.0**j * d <= bump.T for j in stack.active(x))


# ---------------------------------------------------------------------------
# Schur-test integrals

_GL_X, _GL_W = np.polynomial.legendre.leggauss(8)
ITEMS = ("i", "ii", "iii", "iv", "v", "vi")


def _band_segments(c: float, jmin: int, jmax: int, Z: float):
    """Segments around ``c`` with a resolution scale for each.

    Distance band ``[Z 2^-(j+1), Z 2^-j]`` only sees kernel terms of index
    <= j (the others fall off the table), so it is resolved at ``2^-j``.
    """
    segs = []
    for j in range(jmin, jmax + 1):
        d0, d1 = Z * 2.0 ** -(j + 1), Z * 2.0**-j
        scale = 2.0**-j
        segs.append((c + d0, c + d1, scale))
        segs.append((c - d1, c - d0, scale))
    d = Z * 2.0 ** -(jmax + 1)
    segs.append((c - d, c + d, 2.0**-jmax))
    return segs


def _restrict(segs, S: Optional[IntervalSet]):
    if S is None:
        return segs
    out = []
    for a, b, s in segs:
        piece = S.clip(a, b)
        for lo, hi in zip(piece.lo, piece.hi):
            out.append((lo, hi, s))
    return out


def _nodes(segs, density: float):
    """Composite 8-point Gauss-Legendre nodes/weights, ``density`` panels per scale."""
    xs, ws = [], []
    for a, b, s in segs:
        n = max(1, int(math.ceil((b - a) * density / s)))
        edges = np.linspace(a, b, n + 1)
        mid = 0.5 * (edges[1:] + edges[:-1])
        half = 0.5 * (edges[1:] - edges[:-1])
        xs.append((mid[:, None] + half[:, None] * _GL_X[None, :]).ravel())
        ws.append((half[:, None] * _GL_W[None, :]).ravel())
    if not xs:
        return np.zeros(0), np.zeros(0)
    return np.concatenate(xs), np.concatenate(ws)


@dataclass
class SchurItem:
    item: str
    sup_estimate: float
    argsup: float
    quad_tol: float
    converged: bool
    samples: int

    def to_dict(self) -> dict:
        return {
            "item": self.item,
            "sup_estimate": self.sup_estimate,
            "argsup": self.argsup,
            "quad_tol": self.quad_tol,
            "converged": self.converged,
            "samples": self.samples,
        }


def _abs_integral(func, segs, quad_tol, density=4.0, max_density=256.0):
    """Integral of ``|func|`` over the segments, doubling panel density until
    two successive values agree to ``quad_tol`` (relative)."""
    prev = None
    while True:
        t, w = _nodes(segs, density)
        val = float(np.sum(w * np.abs(func(t)))) if t.size else 0.0
        if prev is not None and abs(val - prev) <= quad_tol * max(abs(val), 1e-300):
            return val, True
        if prev is not None and val == 0.0 and prev == 0.0:
            return val, True
        if density >= max_density:
            return val, False
        prev = val
        density *= 2


def _jrange_A(stack, x):
    act = stack.active(x)
    return min(act), max(act)


def schur_integrals(
    E: IntervalSet,
    F: IntervalSet,
    bump: BumpProfile,
    stack: ScaleStack,
    sample_points: Sequence[float],
    quad_tol: float = 1e-4,
    density: float = 4.0,
    items: Iterable[str] = ITEMS,
) -> dict[str, SchurItem]:
    """Suprema over ``sample_points`` of the six Schur-test integrals.

    i)   int |A(x,y)| dy        ii)  int |A(x,y)| dx        iii) int_E |A(x,y)| dy
    iv)  int |B(xi,eta)| deta   v)   int |B(xi,eta)| dxi    vi)  int_F |B(xi,eta)| dxi

    Sample points play the role of x (i, iii), y (ii), xi (iv) or eta (v, vi).
    """
    Z = bump.T
    pts = [float(p) for p in sample_points]
    out = {}
    for item in items:
        best, arg, ok = 0.0, pts[0] if pts else 0.0, True
        for p in pts:
            if item in ("i", "iii"):
                j0, j1 = _jrange_A(stack, p)
                segs = _band_segments(p, j0, j1, Z)
                segs = _restrict(segs, E if item == "iii" else None)
                f = lambda y, p=p: kernel_A(bump, stack, p, y)
            elif item == "ii":
                j1 = min(stack.J, int(math.ceil(math.log2(abs(p) + Z + 1))) + 1)
                segs = _band_segments(p, 0, j1, Z)
                f = lambda x, p=p: kernel_A(bump, stack, x, p)
            elif item == "iv":
                j1 = int(math.ceil(math.log2(abs(p) + Z + 2))) + 1
                segs = _band_segments(p, 0, j1, Z)
                f = lambda eta, p=p: kernel_B(bump, stack, p, eta)
            else:  # v, vi: eta fixed, integrate over xi
                j1 = int(math.ceil(math.log2(max(abs(p), 1.0)))) + 1
                segs = _band_segments(p, 0, j1, Z)
                segs = _restrict(segs, F if item == "vi" else None)
                f = lambda xi, p=p: kernel_B(bump, stack, xi, p)
            val, conv = _abs_integral(f, segs, quad_tol, density)
            ok &= conv
            if val > best:
                best, arg = val, p
        out[item] = SchurItem(item, best, arg, quad_tol, ok, len(pts))
    return out


def schur_report_json(report: dict[str, SchurItem]) -> str:
    return json.dumps([report[k].to_dict() for k in ITEMS if k in report], indent=2)


# ---------------------------------------------------------------------------
# epsilon estimates


@dataclass
class STBounds:
    normSE: float
    normFT: float
    resSE: PowerResult = field(repr=False)
    resFT: PowerResult = field(repr=False)


def st_eps_bounds(
    E: IntervalSet,
    F: IntervalSet,
    grid: Grid,
    stack: ScaleStack,
    tol: float = 1e-8,
    seed: int = 0,
    ops: Optional[LPOperators] = None,
    method: str = "lanczos",
) -> STBounds:
    """Operator norms of ``S P_E`` and of ``f -> chi_F (Tf)^``.

    Both come from the top eigenvalue of the normal operator.  The top of
    the ``S P_E`` spectrum is nearly degenerate for comb-like sets, so the
    default solver is Lanczos; ``method="power"`` is kept for comparison.
    """
    top = lanczos_top if method == "lanczos" else power_iteration
    ops = ops or LPOperators(grid, stack)
    em = sample_mask(grid, E, "space")
    fm = sample_mask(grid, F, "frequency")

    def SE(v):
        return em * ops.S_adj(ops.S(em * v))

    def FT(v):
        t = ops.T(v)
        return ops.T_adj(inverse_ft(grid, fm * forward_ft(grid, t)))

    if em.any():
        r1 = top(SE, grid.N, tol, seed, start=em)
    else:
        r1 = PowerResult(0.0, np.zeros(grid.N, complex), 0, 0.0, True)
    if fm.any():
        r2 = top(FT, grid.N, tol, seed)
    else:
        r2 = PowerResult(0.0, np.zeros(grid.N, complex), 0, 0.0, True)
    return STBounds(math.sqrt(max(r1.value, 0.0)), math.sqrt(max(r2.value, 0.0)), r1, r2)


def operator_norm(apply, grid: Grid, apply_adj, tol=1e-8, seed=0) -> float:
    """Norm of a generic grid operator given its adjoint."""
    r = top_eig(lambda v: apply_adj(apply(v)), grid.N, tol, seed)
    return math.sqrt(max(r.value, 0.0))
