"""Fourier concentration operators on a periodic grid.

The grid samples ``[-L/2, L/2)`` at ``x_k = -L/2 + k h`` (``h = L/N``) and
carries the dual lattice ``xi_m = m / L``, ``m = -N/2 .. N/2 - 1``.  The
transform pair is

    fhat(xi_m) = h * sum_k exp(-2 pi i xi_m x_k) f(x_k)
    f(x_k)     = (1/L) * sum_m exp(2 pi i xi_m x_k) fhat(xi_m)

so Plancherel reads ``h sum |f|^2 = (1/L) sum |fhat|^2`` and the transform of
an interval indicator is a sinc without 2*pi factors.  Frequency arrays are
ordered by increasing ``m`` (i.e. fft-shifted).

Sets enter through 0/1 masks: a node belongs to a set when the centre of its
cell, ``x_k + h/2`` (resp. ``xi_m + 1/(2L)``), does.  Masks therefore stay
exact projections, and the discrepancy between the masked measure and the
true measure is at most one cell per interval endpoint.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
import scipy.fft
from scipy.sparse.linalg import ArpackNoConvergence, LinearOperator, eigsh

from .sets import IntervalSet, SetFamily

DENSE_CAP = 4096


class UnresolvedSetWarning(UserWarning):
    """A set has pieces shorter than two grid cells."""


class ConvergenceWarning(UserWarning):
    """An iterative eigensolver stopped before reaching its tolerance."""


def _workers() -> int:
    try:
        return max(1, int(os.environ.get("CONCOP_THREADS", "1")))
    except ValueError:
        return 1


@dataclass(frozen=True)
class Grid:
    L: float
    N: int

    def __post_init__(self):
        if not self.L > 0:
            raise ValueError("L must be positive")
        if self.N < 2 or self.N & (self.N - 1):
            raise ValueError("N must be a power of two")

    @property
    def h(self) -> float:
        return self.L / self.N

    @property
    def x(self) -> np.ndarray:
        return -self.L / 2 + np.arange(self.N) * self.h

    @property
    def m(self) -> np.ndarray:
        return np.arange(-self.N // 2, self.N // 2)

    @property
    def xi(self) -> np.ndarray:
        return self.m / self.L

    @property
    def nyquist(self) -> float:
        return self.N / (2 * self.L)

    def scaled(self, lam: float) -> "Grid":
        return Grid(lam * self.L, self.N)


def forward_ft(grid: Grid, f) -> np.ndarray:
    f = np.asarray(f, dtype=complex)
    sign = 1.0 - 2.0 * (grid.m & 1)
    return grid.h * sign * scipy.fft.fftshift(scipy.fft.fft(f, workers=_workers()))


def inverse_ft(grid: Grid, fhat) -> np.ndarray:
    fhat = np.asarray(fhat, dtype=complex)
    sign = 1.0 - 2.0 * (grid.m & 1)
    g = scipy.fft.ifft(scipy.fft.ifftshift(sign * fhat), workers=_workers())
    return (grid.N / grid.L) * g


def l2_norm(grid: Grid, f) -> float:
    return math.sqrt(grid.h) * float(np.linalg.norm(f))


def sample_mask(grid: Grid, S: IntervalSet, side: str = "space") -> np.ndarray:
    """0/1 mask of the nodes whose cell centre lies in ``S``.

    ``side`` is ``"space"`` (nodes ``x_k``) or ``"frequency"`` (nodes
    ``xi_m``).  Warns when a piece of ``S`` inside the grid range is shorter
    than two cells.
    """
    if side == "space":
        step, start = grid.h, -grid.L / 2
    elif side == "frequency":
        step, start = 1.0 / grid.L, -grid.nyquist
    else:
        raise ValueError(f"unknown side {side!r}")
    centres = start + (np.arange(grid.N) + 0.5) * step
    mask = S.contains(centres).astype(float)
    if S:
        inside = S.clip(start, start + grid.N * step)
        if inside and np.min(inside.hi - inside.lo) < 2 * step:
            warnings.warn(
                f"{side} set has pieces shorter than 2 cells ({step:g}); masks are unresolved",
                UnresolvedSetWarning,
                stacklevel=2,
            )
    return mask


def masked_measure(grid: Grid, mask: np.ndarray, side: str = "space") -> float:
    step = grid.h if side == "space" else 1.0 / grid.L
    return float(np.sum(mask)) * step


@dataclass(frozen=True, eq=False)
class ConcentrationOp:
    """``Q_F P_E``: restrict to ``E`` in space, then to ``F`` in frequency."""

    grid: Grid
    e_mask: np.ndarray
    f_mask: np.ndarray
    _f_unshifted: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        for name in ("e_mask", "f_mask"):
            m = np.asarray(getattr(self, name), dtype=float)
            if m.shape != (self.grid.N,):
                raise ValueError(f"{name} has shape {m.shape}, expected ({self.grid.N},)")
            if not np.all((m == 0) | (m == 1)):
                raise ValueError(f"{name} must be 0/1")
            object.__setattr__(self, name, m)
        object.__setattr__(self, "_f_unshifted", scipy.fft.ifftshift(self.f_mask))

    @classmethod
    def from_sets(cls, grid: Grid, E: IntervalSet, F: IntervalSet) -> "ConcentrationOp":
        return cls(grid, sample_mask(grid, E, "space"), sample_mask(grid, F, "frequency"))

    # The DFT phase and h*N/L factors cancel inside Q_F, so plain fft/ifft
    # with an unshifted mask is the same operator.
    def _Q(self, g):
        w = _workers()
        return scipy.fft.ifft(self._f_unshifted * scipy.fft.fft(g, workers=w), workers=w)

    def matvec(self, f):
        """``Q_F P_E f``."""
        return self._Q(self.e_mask * np.asarray(f, dtype=complex))

    def rmatvec(self, g):
        """Adjoint ``P_E Q_F g``."""
        return self.e_mask * self._Q(np.asarray(g, dtype=complex))

    def normal(self, f):
        """``P_E Q_F P_E f``."""
        return self.e_mask * self._Q(self.e_mask * np.asarray(f, dtype=complex))

    @property
    def trace(self) -> float:
        """``tr(P_E Q_F P_E) = |E|_h * |F|_{1/L}`` (diagonal of the composition)."""
        g = self.grid
        return g.h * float(self.e_mask.sum()) * float(self.f_mask.sum()) / g.L

    def adjoint_pair(self) -> "ConcentrationOp":
        """``Q_E P_F``: the same sets with their roles exchanged (same grid)."""
        return ConcentrationOp(self.grid, self.f_mask, self.e_mask)

    def compressed(self) -> np.ndarray:
        """Isometric matrix of ``Q_F P_E`` from E-nodes to F-frequencies."""
        g = self.grid
        ei = np.flatnonzero(self.e_mask)
        fi = np.flatnonzero(self.f_mask)
        phase = np.exp(-2j * np.pi * np.outer(g.xi[fi], g.x[ei]))
        return math.sqrt(g.h / g.L) * phase


def apply_concop(op: ConcentrationOp, f, grid: Optional[Grid] = None) -> np.ndarray:
    if grid is not None and grid != op.grid:
        raise ValueError("grid mismatch")
    f = np.asarray(f)
    if f.shape != (op.grid.N,):
        raise ValueError("grid mismatch")
    return op.matvec(f)


def kernel_matrix(op: ConcentrationOp, dense_cap: int = DENSE_CAP) -> np.ndarray:
    """Dense matrix ``M`` with ``M @ f == apply_concop(op, f)``.

    Built as inverse-DFT @ diag(f_mask) @ DFT @ diag(e_mask); the continuum
    kernel at ``(x_k, y_j)`` is ``M[k, j] / h``.
    """
    N = op.grid.N
    if N > dense_cap:
        raise ValueError(f"N={N} exceeds dense cap {dense_cap}")
    D = scipy.fft.fft(np.eye(N), axis=0)
    Di = scipy.fft.ifft(np.eye(N), axis=0)
    fm = op._f_unshifted
    return (Di * fm[None, :]) @ D * op.e_mask[None, :]


def frobenius(op: ConcentrationOp) -> float:
    """Continuum-scaled Hilbert-Schmidt norm ``(h^2 sum |K|^2)^(1/2)``.

    Every kernel column sits in ``E`` and carries energy ``|F|`` by
    Plancherel, so the double sum collapses to ``|E|_h |F|_{1/L}``.
    """
    g = op.grid
    col_energy = float(op.f_mask.sum()) / g.L
    return math.sqrt(g.h * float(np.sum(op.e_mask * col_energy)))


# ---------------------------------------------------------------------------
# eigen-solvers


@dataclass
class PowerResult:
    value: float
    vector: np.ndarray
    iterations: int
    residual: float
    converged: bool


def power_iteration(
    apply: Callable[[np.ndarray], np.ndarray],
    n: int,
    tol: float = 1e-8,
    seed: int = 0,
    maxiter: int = 5000,
    start: Optional[np.ndarray] = None,
) -> PowerResult:
    """Largest eigenvalue of a Hermitian positive semidefinite map.

    Stops when ``||A v - theta v|| <= tol * theta``; the Rayleigh quotient
    then lies within ``tol * theta`` of an eigenvalue.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    if start is not None:
        v = v * start
    nv = np.linalg.norm(v)
    if nv == 0:
        return PowerResult(0.0, v, 0, 0.0, True)
    v = v / nv
    theta, res = 0.0, np.inf
    for it in range(1, maxiter + 1):
        w = apply(v)
        theta = float(np.vdot(v, w).real)
        nw = np.linalg.norm(w)
        if nw == 0:
            return PowerResult(0.0, v, it, 0.0, True)
        res = float(np.linalg.norm(w - theta * v))
        if res <= tol * abs(theta):
            return PowerResult(theta, v, it, res, True)
        v = w / nw
    warnings.warn(
        f"power iteration stopped after {maxiter} steps (residual {res:.3g})",
        ConvergenceWarning,
        stacklevel=2,
    )
    return PowerResult(theta, v, maxiter, res, False)


def lanczos_top(
    apply: Callable[[np.ndarray], np.ndarray],
    n: int,
    tol: float = 1e-10,
    seed: int = 0,
    start: Optional[np.ndarray] = None,
    k: int = 1,
    maxiter: int = 500,
) -> PowerResult:
    """Largest eigenvalue of a Hermitian PSD map by implicitly restarted
    Lanczos (ARPACK).  Used where the top of the spectrum is clustered and
    plain power iteration stalls."""
    rng = np.random.default_rng(seed)
    v0 = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    if start is not None:
        v0 = v0 * start
    A = LinearOperator((n, n), matvec=apply, dtype=complex)
    k = min(k, n - 2)
    ncv = min(n - 1, max(2 * k + 1, 64))
    try:
        vals, vecs = eigsh(A, k=k, which="LA", tol=tol, v0=v0, ncv=ncv, maxiter=maxiter)
    except ArpackNoConvergence as exc:
        if len(exc.eigenvalues) == 0:
            return PowerResult(0.0, v0, maxiter, np.inf, False)
        vals, vecs = exc.eigenvalues, exc.eigenvectors
    i = int(np.argmax(vals))
    v = vecs[:, i]
    res = float(np.linalg.norm(apply(v) - vals[i] * v))
    return PowerResult(float(vals[i]), v, k, res, bool(res <= max(tol, 1e-12) * abs(vals[i]) or res < 1e-14))


def top_eig(
    apply: Callable[[np.ndarray], np.ndarray],
    n: int,
    tol: float = 1e-8,
    seed: int = 0,
    maxiter: int = 5000,
    start: Optional[np.ndarray] = None,
    quick: int = 300,
) -> PowerResult:
    """Power iteration with a short budget, then Lanczos if the top of the
    spectrum turns out to be clustered."""
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ConvergenceWarning)
        res = power_iteration(apply, n, tol, seed, min(quick, maxiter), start)
    if res.converged or maxiter <= quick:
        if not res.converged:
            warnings.warn(f"power iteration stopped after {res.iterations} steps", ConvergenceWarning, stacklevel=2)
        return res
    lz = lanczos_top(apply, n, min(tol, 1e-10), seed, start)
    if lz.residual <= tol * abs(lz.value) or lz.residual < 1e-14:
        return PowerResult(lz.value, lz.vector, lz.iterations, lz.residual, True)
    return power_iteration(apply, n, tol, seed, maxiter, start)


def op_norm(
    op: ConcentrationOp,
    tol: float = 1e-8,
    seed: int = 0,
    maxiter: int = 5000,
    full_output: bool = False,
):
    """``||Q_F P_E|| = sqrt(lambda_max(P_E Q_F P_E))``.

    Power iteration, switching to Lanczos when the top is clustered."""
    if not op.e_mask.any() or not op.f_mask.any():
        res = PowerResult(0.0, np.zeros(op.grid.N, complex), 0, 0.0, True)
    else:
        res = top_eig(op.normal, op.grid.N, tol, seed, maxiter, start=op.e_mask)
    val = math.sqrt(min(max(res.value, 0.0), 1.0))
    if full_output:
        return val, res
    return val


@dataclass
class SpectrumReport:
    eigenvalues: np.ndarray
    trace: float
    frobenius: float
    method: str
    iterations: int = 0
    residual: float = 0.0

    def to_dict(self) -> dict:
        return {
            "eigenvalues": [float(v) for v in self.eigenvalues],
            "trace": self.trace,
            "frobenius": self.frobenius,
            "method": self.method,
            "iterations": int(self.iterations),
            "residual": float(self.residual),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["index", "eigenvalue"])
        for i, v in enumerate(self.eigenvalues):
            w.writerow([i, repr(float(v))])
        return buf.getvalue()


def spectrum(
    op: ConcentrationOp,
    k: int,
    method: str = "dense",
    dense_cap: int = DENSE_CAP,
    tol: float = 1e-10,
    seed: int = 0,
) -> SpectrumReport:
    """Top ``k`` eigenvalues of ``P_E Q_F P_E``.

    ``dense`` takes squared singular values of the compressed F-by-E block of
    the unitary DFT (non-negative by construction) and pads with zeros;
    ``lanczos`` runs ARPACK on the matrix-free normal operator.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    N = op.grid.N
    k = min(k, N)
    tr = op.trace
    fro = frobenius(op)
    if method == "dense":
        ne, nf = int(op.e_mask.sum()), int(op.f_mask.sum())
        if max(ne, nf) > dense_cap:
            raise ValueError(f"compressed block {nf}x{ne} exceeds dense cap {dense_cap}")
        if ne == 0 or nf == 0:
            sv = np.zeros(0)
        else:
            sv = np.linalg.svd(op.compressed(), compute_uv=False)
        ev = np.zeros(k)
        top = np.sort(sv**2)[::-1][:k]
        ev[: top.size] = top
        return SpectrumReport(ev, tr, fro, "dense")
    if method == "lanczos":
        if not op.e_mask.any() or not op.f_mask.any():
            return SpectrumReport(np.zeros(k), tr, fro, "lanczos")
        A = LinearOperator((N, N), matvec=op.normal, dtype=complex)
        rng = np.random.default_rng(seed)
        v0 = op.e_mask * (rng.standard_normal(N) + 1j * rng.standard_normal(N))
        kk = min(k, N - 2)
        vals, vecs = eigsh(A, k=kk, which="LA", tol=tol, v0=v0)
        order = np.argsort(vals)[::-1]
        vals, vecs = vals[order], vecs[:, order]
        resid = max(
            float(np.linalg.norm(op.normal(vecs[:, i]) - vals[i] * vecs[:, i])) for i in range(kk)
        )
        ev = np.zeros(k)
        ev[:kk] = np.clip(vals, 0.0, None)
        return SpectrumReport(ev, tr, fro, "lanczos", iterations=kk, residual=resid)
    raise ValueError(f"unknown method {method!r}")


# ---------------------------------------------------------------------------
# block decomposition and tail norms

BLOCKS = ("FR_ER", "Finf_ER", "FR_Einf", "Finf_Einf")


def _ball_masks(grid: Grid, R: float) -> tuple[np.ndarray, np.ndarray]:
    xc = grid.x + grid.h / 2
    xic = grid.xi + 0.5 / grid.L
    return (np.abs(xc) <= R).astype(float), (np.abs(xic) <= R).astype(float)


def block_decomposition(
    E: IntervalSet, F: IntervalSet, R: float, grid: Grid
) -> dict[str, ConcentrationOp]:
    """The four operators ``Q_{F^R} P_{E^R}``, ``Q_{F_inf} P_{E^R}``,
    ``Q_{F^R} P_{E_inf}``, ``Q_{F_inf} P_{E_inf}`` (keys in ``BLOCKS``).

    Truncation is applied to the masks, so the split is exact on the grid.
    """
    if not R > 0:
        raise ValueError("R must be positive")
    em = sample_mask(grid, E, "space")
    fm = sample_mask(grid, F, "frequency")
    return _blocks_from_masks(grid, em, fm, R)


def _blocks_from_masks(grid, em, fm, R):
    bx, bxi = _ball_masks(grid, R)
    eR, eInf = em * bx, em * (1 - bx)
    fR, fInf = fm * bxi, fm * (1 - bxi)
    return {
        "FR_ER": ConcentrationOp(grid, eR, fR),
        "Finf_ER": ConcentrationOp(grid, eR, fInf),
        "FR_Einf": ConcentrationOp(grid, eInf, fR),
        "Finf_Einf": ConcentrationOp(grid, eInf, fInf),
    }


def block_residual(blocks: dict, full: ConcentrationOp, f) -> float:
    total = sum(blocks[k].matvec(f) for k in BLOCKS)
    return float(np.linalg.norm(total - full.matvec(f)) / np.linalg.norm(f))


@dataclass
class TailNormTable:
    rows: list = field(default_factory=list)  # (R, FinfE, FEinf, FinfEinf)
    converged: bool = True

    COLUMNS = ("R", "norm_FinfE", "norm_FEinf", "norm_FinfEinf")

    def column(self, name: str) -> np.ndarray:
        i = self.COLUMNS.index(name)
        return np.array([r[i] for r in self.rows])

    def to_dict(self) -> dict:
        return {"rows": [dict(zip(self.COLUMNS, map(float, r))) for r in self.rows],
                "converged": self.converged}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.COLUMNS)
        for r in self.rows:
            w.writerow([repr(float(v)) for v in r])
        return buf.getvalue()


def tail_norm_curve(
    E: SetFamily,
    F: SetFamily,
    R_list: Sequence[float],
    grid: Grid,
    tol: float = 1e-8,
    seed: int = 0,
    window: Optional[float] = None,
    freq_window: Optional[float] = None,
) -> TailNormTable:
    """Norms of the three non-compact blocks for each ``R``.

    ``E`` is materialised on ``[-window, window]`` (default ``L/4``) and
    ``F`` on ``[-freq_window, freq_window]`` (default half the Nyquist
    frequency), keeping both away from the periodic seam.
    """
    R_list = [float(r) for r in R_list]
    if any(b <= a for a, b in zip(R_list, R_list[1:])):
        raise ValueError("R_list must be increasing")
    W = grid.L / 4 if window is None else window
    Wf = grid.nyquist / 2 if freq_window is None else freq_window
    em = sample_mask(grid, E.window(W), "space")
    fm = sample_mask(grid, F.window(Wf), "frequency")
    table = TailNormTable()
    for R in R_list:
        blocks = _blocks_from_masks(grid, em, fm, R)
        row = [R]
        for key in ("Finf_ER", "FR_Einf", "Finf_Einf"):
            val, res = op_norm(blocks[key], tol, seed, full_output=True)
            table.converged &= res.converged
            row.append(val)
        table.rows.append(tuple(row))
    return table


# ---------------------------------------------------------------------------
# scaling, Logvinenko-Sereda and the two-projection lower bound


@dataclass
class ScalingCheck:
    norm1: float
    norm2: float
    gap: float
    masks_equal: bool


def scaling_check(A: IntervalSet, R: float, grid: Grid, tol: float = 1e-8, seed: int = 0) -> ScalingCheck:
    """Compare ``||Q_[-R,R] P_A||`` on ``(L, N)`` with ``||Q_[-1,1] P_{RA}||`` on ``(RL, N)``."""
    if not R > 0:
        raise ValueError("R must be positive")
    g2 = grid.scaled(R)
    op1 = ConcentrationOp.from_sets(grid, A, IntervalSet([(-R, R)]))
    op2 = ConcentrationOp.from_sets(g2, A.scale(R), IntervalSet([(-1.0, 1.0)]))
    n1 = op_norm(op1, tol, seed)
    n2 = op_norm(op2, tol, seed)
    same = np.array_equal(op1.e_mask, op2.e_mask) and np.array_equal(op1.f_mask, op2.f_mask)
    return ScalingCheck(n1, n2, abs(n1 - n2), same)


def ls_delta(A: IntervalSet, grid: Grid, tol: float = 1e-8, seed: int = 0, full_output=False):
    """``||P_A Q_[-1,1]||``: largest fraction of a unit-band-limited function on ``A``.

    Computed from ``Q P_A Q`` (the normal operator of ``P_A Q``), i.e. the
    other composition order from :func:`op_norm`.
    """
    op = ConcentrationOp.from_sets(grid, A, IntervalSet([(-1.0, 1.0)]))
    if not op.e_mask.any():
        res = PowerResult(0.0, np.zeros(grid.N, complex), 0, 0.0, True)
    else:
        apply = lambda v: op._Q(op.e_mask * op._Q(v))
        res = top_eig(apply, grid.N, tol, seed, start=op.e_mask)
    val = math.sqrt(min(max(res.value, 0.0), 1.0))
    return (val, res) if full_output else val


@dataclass
class SVWResult:
    lambda_min: float
    residual: float
    iterations: int
    converged: bool
    lower_bound: float  # 1 - sqrt(trace), certified when E and F are non-empty


def svw_lambda_min(
    E: IntervalSet, F: IntervalSet, grid: Grid, tol: float = 1e-8, seed: int = 0, maxiter: int = 5000
) -> SVWResult:
    """Smallest eigenvalue of ``P_{E^c} + Q_{F^c}``.

    ``||f||^2_{L^2(E^c)} + ||fhat||^2_{L^2(F^c)}`` is the quadratic form of
    this operator, so a positive minimum is a quantitative uncertainty
    principle.  Power iteration runs on the reflection ``2 Id - T``.
    """
    op = ConcentrationOp.from_sets(grid, E, F)
    ec = 1.0 - op.e_mask

    def T(v):
        return ec * v + (v - op._Q(v))

    res = top_eig(lambda v: 2.0 * v - T(v), grid.N, tol, seed, maxiter)
    lam = 2.0 - res.value
    # for two projections lambda_max(P_E + Q_F) = 1 + ||Q_F P_E|| <= 1 + sqrt(tr)
    if op.e_mask.any() and op.f_mask.any():
        lower = 1.0 - math.sqrt(op.trace)
    elif op.e_mask.any() or op.f_mask.any():
        lower = 1.0
    else:
        lower = 2.0
    return SVWResult(lam, res.residual, res.iterations, res.converged, lower)
