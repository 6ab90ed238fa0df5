"""Experiment drivers, reference comparisons and output writers."""

from __future__ import annotations

import csv
import gc
import json
import math
import os
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .oracle import oracle_mode, rsq_closed_form, square_shell_closed_form, zero_closed_form
from .pbessel import XI_LEFT, NormalFormQ, Nonoscillatory, PotentialSpec, eval_mode, solve_mode
from .potentials import canonical_name, load_potential_file, named_potential
from .scatter import (
    ScatterProblem,
    _coefficients,
    eval_scattered,
    eval_total,
    eval_total_everywhere,
    incident_from_spec,
    precompute_modes,
    solve_scatter,
)

DEFAULT_THREADS_ENV = "HELMRAD_THREADS"
ORACLE_MAX_KR = 2000.0
#: largest k accepted without ``allow_large_k``
DESK_MAX_K = 4096.0

SERIES_COLUMNS = ("regime", "k", "n", "seconds", "max_abs_error", "pieces")
SK_COLUMNS = ("k", "modes", "seconds", "ratio", "max_abs_error", "pieces")


def check_k(k, allow_large_k=False):
    if not k > 0:
        raise ValueError("k must be positive")
    if k > DESK_MAX_K and not allow_large_k:
        raise ValueError(f"k = {k:g} exceeds {DESK_MAX_K:g}; pass allow_large_k to run it anyway")


def resolve_threads(threads=None):
    """Explicit value, else $HELMRAD_THREADS, else 1."""
    if threads is not None:
        return max(1, int(threads))
    env = os.environ.get(DEFAULT_THREADS_ENV)
    return max(1, int(env)) if env else 1


@dataclass
class ExperimentConfig:
    potential: str = "gaussian"
    k: float = 16.0
    m: int | None = None  # None: ceil(pi R k / 2); 0: adaptive
    incident: str = "plane:0.7853981633974483"
    grid: int = 64
    output_dir: str = "results"
    tol: float = 1e-12
    threads: int | None = None
    potential_file: str | None = None
    R: float | None = None
    oracle: bool | None = None  # None: only when k R is small enough
    allow_large_k: bool = False

    def __post_init__(self):
        check_k(self.k, self.allow_large_k)
        if self.grid < 2:
            raise ValueError("grid must be at least 2")

    def build_potential(self) -> PotentialSpec:
        if canonical_name(self.potential) == "custom":
            if not self.potential_file:
                raise ValueError("custom potential needs a potential file")
            return load_potential_file(self.potential_file)
        return named_potential(self.potential, self.R)


@dataclass
class RunReport:
    k: float
    m: int
    precomp_seconds: float
    solve_seconds: float
    max_abs_error: float | None = None
    mode_counts: dict = field(default_factory=dict)
    piece_counts: list = field(default_factory=list)

    def to_json(self):
        return json.dumps(asdict(self), indent=2)


def _mode_stats(modes):
    intervals_osc = 0
    intervals_evan = 0
    turning = 0
    for ms in modes:
        kinds = [isinstance(b, Nonoscillatory) for b in ms.bases]
        intervals_evan += sum(kinds)
        intervals_osc += len(kinds) - sum(kinds)
        turning += any(kinds)
    counts = {
        "modes": len(modes),
        "modes_with_evanescent_part": turning,
        "oscillatory_intervals": intervals_osc,
        "evanescent_intervals": intervals_evan,
    }
    return counts, [ms.piece_count for ms in modes]


def check_points(R, count=100, seed=0):
    """Deterministic mix of interior and near-boundary polar points."""
    rng = np.random.default_rng(seed)
    inner = count * 3 // 5
    r = np.concatenate([R * np.sqrt(rng.random(inner)), R * (0.95 + 0.05 * rng.random(count - inner))])
    t = 2.0 * np.pi * rng.random(count)
    return np.maximum(r, 1e-12), t


def oracle_total_field(sol, pot, r, t, tol=1e-13):
    """Total field at (r, t) rebuilt from dense-oracle modes and the same c_n, d_n."""
    k, m = sol.k, sol.m
    psis = []
    ends = []
    for n in range(m + 1):
        om = oracle_mode(NormalFormQ(k, n, pot), r, rtol=tol)
        psis.append(om.psi)
        ends.append(om)
    shim = [_EndValues(o.psi_R, o.dpsi_R) for o in ends]
    a, _ = _coefficients(k, shim, sol.hankel_R, sol.hankel_logd_R, sol.c, sol.d, m)
    psis = np.array(psis)
    n = np.arange(-m, m + 1)
    return (a[:, None] * psis[np.abs(n)] * np.exp(1j * np.outer(n, t))).sum(axis=0)


@dataclass(frozen=True)
class _EndValues:
    psi_R: float
    dpsi_R: float


def _grid(sol, inc, R, size):
    x = np.linspace(-2.0 * R, 2.0 * R, size)
    X, Y = np.meshgrid(x, x, indexing="xy")
    r = np.maximum(np.hypot(X, Y), XI_LEFT)
    t = np.arctan2(Y, X)
    total = eval_total_everywhere(sol, r, t)
    incident = inc.value(r, t)
    inside = r < R
    scattered = np.empty_like(total)
    scattered[inside] = total[inside] - incident[inside]
    scattered[~inside] = eval_scattered(sol, r[~inside], t[~inside])
    return X, Y, incident, total, scattered


def write_grid(path, X, Y, values):
    """One line per lattice point: x y re im."""
    data = np.column_stack([X.ravel(), Y.ravel(), values.real.ravel(), values.imag.ravel()])
    np.savetxt(path, data, fmt="%.17g", header="x y re im")


def write_series(path, rows, columns):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(columns)
        for row in rows:
            w.writerow([row.get(c, "") for c in columns])


def run_experiment(cfg: ExperimentConfig):
    """Solve one scattering problem, write grids and report.json; return the report."""
    pot = cfg.build_potential()
    inc = incident_from_spec(cfg.incident, cfg.k)
    threads = resolve_threads(cfg.threads)
    prob = ScatterProblem(cfg.k, pot, cfg.m, cfg.tol)
    timings = {}
    try:
        sol = solve_scatter(prob, inc, threads=threads, timings=timings)
    except Exception as exc:
        raise RuntimeError(f"scattering solve failed: {exc}") from exc
    counts, pieces = _mode_stats(sol.modes)
    report = RunReport(
        k=float(cfg.k),
        m=int(sol.m),
        precomp_seconds=timings["precomp_seconds"],
        solve_seconds=timings["solve_seconds"],
        mode_counts=counts,
        piece_counts=pieces,
    )
    use_oracle = cfg.oracle if cfg.oracle is not None else cfg.k * pot.R <= ORACLE_MAX_KR
    if use_oracle:
        try:
            r, t = check_points(pot.R)
            ref = oracle_total_field(sol, pot, r, t)
            report.max_abs_error = float(np.max(np.abs(eval_total(sol, r, t) - ref)))
        except Exception as exc:
            raise RuntimeError(f"oracle comparison failed: {exc}") from exc
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    X, Y, ui, ut, us = _grid(sol, inc, pot.R, cfg.grid)
    write_grid(out / "incident.txt", X, Y, ui)
    write_grid(out / "total.txt", X, Y, ut)
    write_grid(out / "scattered.txt", X, Y, us)
    (out / "report.json").write_text(report.to_json() + "\n")
    return report


def closed_form(name, pot: PotentialSpec):
    """psi_n oracle (k, n, r) -> (psi, dpsi) when one is known, else None."""
    key = canonical_name(name)
    if key == "rsq":
        return lambda k, n, r: rsq_closed_form(k, n, r, pot.R)
    if key == "square_shell" and pot.R == 2.0:
        return lambda k, n, r: square_shell_closed_form(k, n, r, pot.R)
    if key == "zero":
        return lambda k, n, r: zero_closed_form(k, n, r, pot.R)
    return None


def mode_error(ms, pot, ref, points=100):
    """Max |psi - psi_ref| at ``points`` equispaced radii in (0, R]."""
    r = np.linspace(pot.R / points, pot.R, points)
    psi, _ = eval_mode(ms, r)
    if ref is not None:
        expect, _ = ref(ms.k, ms.n, r)
    elif ms.k * pot.R <= ORACLE_MAX_KR:
        expect = oracle_mode(NormalFormQ(ms.k, ms.n, pot), r).psi
    else:
        return math.nan
    return float(np.max(np.abs(psi - expect)))


def timed_modes(cases, pot, tol=1e-12, repeats=1):
    """Solve every (k, n) in ``cases``; return (modes, seconds).

    The cases are timed round-robin, ``repeats`` rounds with the garbage
    collector paused, and each time is the lower quartile of its rounds.
    Interleaving spreads machine drift evenly over the cases, and the lower
    quartile discards rounds slowed by other processes.
    """
    nfs = [NormalFormQ(float(k), int(n), pot) for k, n in cases]
    times = [[] for _ in nfs]
    modes = [None] * len(nfs)
    enabled = gc.isenabled()
    gc.disable()
    try:
        for _ in range(max(1, int(repeats))):
            for i, nf in enumerate(nfs):
                t0 = time.perf_counter()
                modes[i] = solve_mode(nf, tol)
                times[i].append(time.perf_counter() - t0)
    finally:
        if enabled:
            gc.enable()
    return modes, [float(np.percentile(t, 25)) for t in times]


REGIMES = ("fixed-k", "n-eq-0", "n-eq-k-half", "n-eq-k")


def sweep_modes(
    potential, k, regime="n-eq-k", kmin=256, steps=9, tol=1e-12, repeats=1, check=True, allow_large_k=False
):
    """Per-mode timing/error rows for one of the four regimes.

    fixed-k: n = 0..k in ``steps`` values at fixed k.  The others sweep
    k = kmin, 2 kmin, ..., k with n = 0, k/2 or k.
    """
    check_k(k, allow_large_k)
    pot = named_potential(potential) if isinstance(potential, str) else potential
    ref = closed_form(potential, pot) if isinstance(potential, str) else None
    if regime == "fixed-k":
        cases = [(k, int(round(n))) for n in np.linspace(0, k, steps)]
    elif regime in ("n-eq-0", "n-eq-k-half", "n-eq-k"):
        ks = []
        kk = float(kmin)
        while kk <= k * (1 + 1e-12):
            ks.append(kk)
            kk *= 2.0
        frac = {"n-eq-0": 0.0, "n-eq-k-half": 0.5, "n-eq-k": 1.0}[regime]
        cases = [(kk, int(round(frac * kk))) for kk in ks]
    else:
        raise ValueError(f"unknown regime {regime!r}; choose from {', '.join(REGIMES)}")
    rows = []
    modes, seconds = timed_modes(cases, pot, tol, repeats)
    for (kk, n), ms, secs in zip(cases, modes, seconds):
        err = mode_error(ms, pot, ref) if check else math.nan
        rows.append(
            {"regime": regime, "k": kk, "n": n, "seconds": secs, "max_abs_error": err, "pieces": ms.piece_count}
        )
    return rows


def build_sk(potential, kmin=256, kmax=4096, tol=1e-12, threads=None, check=True, allow_large_k=False):
    """Time construction of S_k = {psi_0, ..., psi_k} for k = kmin, 2 kmin, ..., kmax."""
    check_k(kmax, allow_large_k)
    pot = named_potential(potential) if isinstance(potential, str) else potential
    ref = closed_form(potential, pot) if isinstance(potential, str) else None
    threads = resolve_threads(threads)
    rows = []
    k = float(kmin)
    prev = None
    while k <= kmax * (1 + 1e-12):
        t0 = time.perf_counter()
        modes = precompute_modes(k, pot, int(k), tol, threads)
        secs = time.perf_counter() - t0
        err = math.nan
        if check and (ref is not None or k * pot.R <= ORACLE_MAX_KR / 10):
            err = max(mode_error(ms, pot, ref) for ms in modes)
        rows.append(
            {
                "k": k,
                "modes": len(modes),
                "seconds": secs,
                "ratio": secs / prev if prev else math.nan,
                "max_abs_error": err,
                "pieces": sum(ms.piece_count for ms in modes),
            }
        )
        prev = secs
        k *= 2.0
    return rows
