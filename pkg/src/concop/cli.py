"""Command-line front end: every experiment as a reproducible run on disk.

Each run writes ``<command>.json`` (and optionally ``.csv`` / ``.svg``) into
the output directory and appends one line to ``manifest.jsonl``.  Exit codes:
0 success, 2 input error, 3 numeric non-convergence, 4 I/O error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import platform
import sys
import warnings
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional

import jsonschema
import numpy as np
import scipy
from scipy.sparse.linalg import ArpackNoConvergence

from . import __version__
from .io import DescriptorError, load_descriptor, parse_family, parse_set, validate
from .lpdecomp import ScaleStack, TabulationError, make_bump, schur_integrals
from .sets import thin_profile
from .spectral import (
    BLOCKS,
    ConcentrationOp,
    ConvergenceWarning,
    Grid,
    _blocks_from_masks,
    block_residual,
    ls_delta,
    op_norm,
    scaling_check,
    spectrum,
    svw_lambda_min,
    tail_norm_curve,
)

COMMANDS = ("profile", "spectrum", "tailnorm", "lsdelta", "schur", "decomp", "scalecheck", "svw")

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC, EXIT_IO = 0, 2, 3, 4

# command-specific defaults, applied under config file and flags
DEFAULT_R = {"profile": [10.0, 100.0], "tailnorm": [5.0, 10.0, 20.0, 40.0], "decomp": [5.0, 10.0],
             "scalecheck": [4.0]}
DEFAULT_TOL = {"profile": 1e-3, "spectrum": 1e-10, "schur": 1e-4}


class RunError(Exception):
    def __init__(self, code: int, kind: str, message: str):
        super().__init__(message)
        self.code = code
        self.kind = kind


@dataclass
class RunConfig:
    command: str
    set: Optional[dict] = None
    set2: Optional[dict] = None
    L: float = 64.0
    N: int = 2**13
    R: list = field(default_factory=list)
    tol: float = 1e-8
    seed: int = 0
    out: str = "."
    format: list = field(default_factory=lambda: ["json", "csv"])
    dense_cap: int = 4096
    k: int = 10
    method: str = "dense"
    window: Optional[float] = None
    freq_window: Optional[float] = None
    samples: int = 65
    sample_range: list = field(default_factory=lambda: [-8.0, 8.0])
    J: Optional[int] = None
    trials: int = 10

    def numeric(self) -> dict:
        """Fields that determine the numbers (no output location or format)."""
        d = asdict(self)
        d.pop("out")
        d.pop("format")
        return d

    def hash(self) -> str:
        blob = json.dumps(self.numeric(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="concop", description=__doc__.splitlines()[0])
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--set", help="set descriptor (JSON file or inline JSON); E for operators")
    p.add_argument("--set2", help="second set descriptor; F for operators (default: same as --set)")
    p.add_argument("--L", type=float, help="period length (default 64)")
    p.add_argument("--N", type=int, help="grid size (default 8192)")
    p.add_argument("--R", type=float, action="append", help="radius; repeat for a list")
    p.add_argument("--tol", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--out", help="output directory (default .)")
    p.add_argument("--format", action="append", choices=("json", "csv", "svg"),
                   help="output format; repeatable (default json and csv)")
    p.add_argument("--dense-cap", type=int, dest="dense_cap")
    p.add_argument("--k", type=int, help="number of eigenvalues for spectrum")
    p.add_argument("--method", choices=("dense", "lanczos"))
    p.add_argument("--window", type=float, help="space window for unbounded families")
    p.add_argument("--freq-window", type=float, dest="freq_window")
    p.add_argument("--samples", type=int, help="number of Schur sample points")
    p.add_argument("--sample-range", type=float, nargs=2, dest="sample_range")
    p.add_argument("--J", type=int, help="number of Littlewood-Paley scales")
    p.add_argument("--trials", type=int, help="random inputs for decomp")
    p.add_argument("--config", help="JSON config file; flags override its values")
    return p


def resolve_config(args: argparse.Namespace) -> RunConfig:
    merged: dict = {"command": args.command}
    if args.command in DEFAULT_R:
        merged["R"] = DEFAULT_R[args.command]
    if args.command in DEFAULT_TOL:
        merged["tol"] = DEFAULT_TOL[args.command]
    if args.config:
        try:
            cfg = json.loads(Path(args.config).read_text())
        except OSError as exc:
            raise RunError(EXIT_IO, "io", f"cannot read config: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise RunError(EXIT_INPUT, "input", f"bad config JSON: {exc}") from exc
        if not isinstance(cfg, dict):
            raise RunError(EXIT_INPUT, "input", "config must be a JSON object")
        unknown = set(cfg) - set(RunConfig.__dataclass_fields__) - {"command"}
        if unknown:
            raise RunError(EXIT_INPUT, "input", f"unknown config keys: {sorted(unknown)}")
        cfg.pop("command", None)
        merged.update(cfg)
    for key, val in vars(args).items():
        if key in ("command", "config") or val is None:
            continue
        merged[key] = val
    try:
        for key in ("set", "set2"):
            if merged.get(key) is not None:
                merged[key] = load_descriptor(merged[key])
    except DescriptorError as exc:
        raise RunError(EXIT_INPUT, "descriptor", str(exc)) from exc
    if isinstance(merged.get("format"), str):
        merged["format"] = [merged["format"]]
    merged["R"] = [float(r) for r in merged.get("R", [])]
    cfg = RunConfig(**merged)
    if cfg.L <= 0 or cfg.N < 4 or cfg.N % 2:
        raise RunError(EXIT_INPUT, "input", "need L > 0 and even N >= 4")
    return cfg


# ---------------------------------------------------------------------------
# commands; each returns (result dict, csv text or None, plot spec or None, ok)


def _need_set(cfg: RunConfig) -> dict:
    if cfg.set is None:
        raise RunError(EXIT_INPUT, "input", f"{cfg.command} needs --set")
    return cfg.set


def _sets(cfg: RunConfig, grid: Grid):
    W = grid.L / 4 if cfg.window is None else cfg.window
    E = parse_set(_need_set(cfg), W)
    F = parse_set(cfg.set2, W) if cfg.set2 is not None else E
    return E, F


def _csv(header, rows) -> str:
    lines = [",".join(header)]
    for r in rows:
        lines.append(",".join(repr(float(v)) if not isinstance(v, (bool, str)) else str(v) for v in r))
    return "\n".join(lines) + "\n"


def cmd_profile(cfg: RunConfig):
    fam, W = parse_family(_need_set(cfg))
    if not cfg.R:
        raise RunError(EXIT_INPUT, "input", "profile needs at least one --R")
    prof = thin_profile(fam, cfg.R, tol=cfg.tol, W=W)
    ok = bool(np.all(prof.err <= cfg.tol))
    plot = ("R", "theta", prof.R, {"theta": prof.theta})
    return prof.to_dict(), prof.to_csv(), plot, ok


def cmd_spectrum(cfg: RunConfig):
    grid = Grid(cfg.L, cfg.N)
    E, F = _sets(cfg, grid)
    op = ConcentrationOp.from_sets(grid, E, F)
    rep = spectrum(op, cfg.k, cfg.method, cfg.dense_cap, min(cfg.tol, 1e-6), cfg.seed)
    plot = ("index", "eigenvalue", np.arange(len(rep.eigenvalues)), {"eigenvalue": rep.eigenvalues})
    return rep.to_dict(), rep.to_csv(), plot, True


def cmd_tailnorm(cfg: RunConfig):
    grid = Grid(cfg.L, cfg.N)
    E, _ = parse_family(_need_set(cfg))
    F, _ = parse_family(cfg.set2) if cfg.set2 is not None else (E, None)
    table = tail_norm_curve(E, F, cfg.R, grid, cfg.tol, cfg.seed, cfg.window, cfg.freq_window)
    cols = table.COLUMNS[1:]
    plot = ("R", "norm", table.column("R"), {c: table.column(c) for c in cols})
    return table.to_dict(), table.to_csv(), plot, table.converged


def cmd_lsdelta(cfg: RunConfig):
    grid = Grid(cfg.L, cfg.N)
    E, _ = _sets(cfg, grid)
    val, res = ls_delta(E, grid, cfg.tol, cfg.seed, full_output=True)
    out = {"delta": val, "iterations": res.iterations, "residual": res.residual,
           "converged": res.converged}
    return out, _csv(["delta"], [[val]]), None, res.converged


def cmd_schur(cfg: RunConfig):
    W = cfg.window if cfg.window is not None else cfg.L / 4
    E = parse_set(_need_set(cfg), W)
    F = parse_set(cfg.set2, W) if cfg.set2 is not None else E
    bump = make_bump()
    stack = ScaleStack(cfg.J if cfg.J is not None else 8, bump)
    pts = np.linspace(cfg.sample_range[0], cfg.sample_range[1], cfg.samples)
    rep = schur_integrals(E, F, bump, stack, pts, quad_tol=cfg.tol)
    items = [rep[k].to_dict() for k in rep]
    rows = [[d["item"], d["sup_estimate"], d["quad_tol"], d["samples"]] for d in items]
    csv = "item,sup_estimate,quad_tol,samples\n" + "".join(
        f"{r[0]},{r[1]!r},{r[2]!r},{r[3]}\n" for r in rows)
    return {"items": items}, csv, None, all(d["converged"] for d in items)


def cmd_decomp(cfg: RunConfig):
    grid = Grid(cfg.L, cfg.N)
    E, F = _sets(cfg, grid)
    full = ConcentrationOp.from_sets(grid, E, F)
    rng = np.random.default_rng(cfg.seed)
    rows, worst, ok = [], 0.0, True
    for R in cfg.R:
        blocks = _blocks_from_masks(grid, full.e_mask, full.f_mask, R)
        res = 0.0
        for _ in range(cfg.trials):
            f = rng.standard_normal(grid.N) + 1j * rng.standard_normal(grid.N)
            res = max(res, block_residual(blocks, full, f))
        norms = {}
        for key in BLOCKS:
            val, pr = op_norm(blocks[key], cfg.tol, cfg.seed, full_output=True)
            ok &= pr.converged
            norms[key] = val
        rows.append({"R": R, "residual": res, "block_norms": norms})
        worst = max(worst, res)
    csv = _csv(["R", "residual", *BLOCKS],
               [[r["R"], r["residual"], *(r["block_norms"][k] for k in BLOCKS)] for r in rows])
    return {"rows": rows, "residual": worst, "trials": cfg.trials}, csv, None, ok


def cmd_scalecheck(cfg: RunConfig):
    grid = Grid(cfg.L, cfg.N)
    A, _ = _sets(cfg, grid)
    rows = []
    for R in cfg.R:
        sc = scaling_check(A, R, grid, cfg.tol, cfg.seed)
        rows.append({"R": R, "norm1": sc.norm1, "norm2": sc.norm2, "gap": sc.gap,
                     "masks_equal": bool(sc.masks_equal)})
    gap = max((r["gap"] for r in rows), default=0.0)
    csv = _csv(["R", "norm1", "norm2", "gap"], [[r["R"], r["norm1"], r["norm2"], r["gap"]] for r in rows])
    return {"rows": rows, "gap": gap}, csv, None, True


def cmd_svw(cfg: RunConfig):
    grid = Grid(cfg.L, cfg.N)
    E, F = _sets(cfg, grid)
    r = svw_lambda_min(E, F, grid, cfg.tol, cfg.seed)
    out = {"lambda_min": r.lambda_min, "lower_bound": r.lower_bound, "residual": r.residual,
           "iterations": r.iterations, "converged": r.converged}
    return out, _csv(["lambda_min", "lower_bound"], [[r.lambda_min, r.lower_bound]]), None, r.converged


HANDLERS = {name: globals()[f"cmd_{name}"] for name in COMMANDS}


# ---------------------------------------------------------------------------
# output


def _plain(obj):
    """Replace numpy scalars so the payload is plain JSON."""
    if isinstance(obj, dict):
        return {k: _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def versions() -> dict:
    return {"concop": __version__, "numpy": np.__version__, "scipy": scipy.__version__,
            "python": platform.python_version()}


def _write_svg(path: Path, cfg: RunConfig, plot) -> bool:
    try:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError:
        print("concop: matplotlib not installed, skipping SVG", file=sys.stderr)
        return False
    xlabel, ylabel, x, series = plot
    fig, ax = plt.subplots(figsize=(5, 3.5))
    for name, y in series.items():
        ax.plot(x, y, marker="o", label=name)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.set_title(cfg.command)
    if len(series) > 1:
        ax.legend()
    fig.tight_layout()
    fig.savefig(path, format="svg",
                metadata={"Title": f"concop {cfg.command}", "Description": f"config_hash={cfg.hash()}",
                          "Date": None})
    plt.close(fig)
    return True


def _append_manifest(out: Path, cfg: Optional[RunConfig], command: str, code: int) -> None:
    line = {
        "command": command,
        "config_hash": cfg.hash() if cfg else None,
        "versions": versions(),
        "exit_code": code,
        "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds"),
    }
    with open(out / "manifest.jsonl", "a") as fh:
        fh.write(json.dumps(line, sort_keys=True) + "\n")


def _emit_error(exc: RunError, command: Optional[str], out: Optional[Path]) -> None:
    payload = {"error": exc.kind, "exit_code": exc.code, "message": str(exc), "command": command}
    text = json.dumps(payload, sort_keys=True)
    print(text, file=sys.stderr)
    if out is not None:
        try:
            out.mkdir(parents=True, exist_ok=True)
            (out / "error.json").write_text(text + "\n")
        except OSError:
            pass


def execute(cfg: RunConfig) -> int:
    out = Path(cfg.out)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        try:
            result, csv, plot, ok = HANDLERS[cfg.command](cfg)
        except (DescriptorError, ValueError) as exc:
            raise RunError(EXIT_INPUT, "input", str(exc)) from exc
        except (ArpackNoConvergence, TabulationError, np.linalg.LinAlgError) as exc:
            raise RunError(EXIT_NUMERIC, "numeric", str(exc)) from exc
    for w in caught:
        print(f"concop: {w.category.__name__}: {w.message}", file=sys.stderr)
    ok = ok and not any(issubclass(w.category, ConvergenceWarning) for w in caught)
    payload = {"command": cfg.command, "config_hash": cfg.hash(), "config": cfg.numeric(),
               "result": _plain(result)}
    validate(payload, cfg.command)
    try:
        out.mkdir(parents=True, exist_ok=True)
        if "json" in cfg.format:
            (out / f"{cfg.command}.json").write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
        if "csv" in cfg.format and csv is not None:
            (out / f"{cfg.command}.csv").write_text(csv)
        if "svg" in cfg.format and plot is not None:
            _write_svg(out / f"{cfg.command}.svg", cfg, plot)
    except OSError as exc:
        raise RunError(EXIT_IO, "io", str(exc)) from exc
    if not ok:
        raise RunError(EXIT_NUMERIC, "convergence", f"{cfg.command}: tolerance not met")
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    cfg = None
    out = Path(args.out) if args.out else None
    try:
        cfg = resolve_config(args)
        out = Path(cfg.out)
        code = execute(cfg)
    except RunError as exc:
        _emit_error(exc, args.command, out)
        code = exc.code
    except jsonschema.ValidationError as exc:
        _emit_error(RunError(EXIT_NUMERIC, "schema", exc.message), args.command, out)
        code = EXIT_NUMERIC
    if out is not None:
        try:
            out.mkdir(parents=True, exist_ok=True)
            _append_manifest(out, cfg, args.command, code)
        except OSError:
            code = code or EXIT_IO
    return code


if __name__ == "__main__":
    sys.exit(main())
