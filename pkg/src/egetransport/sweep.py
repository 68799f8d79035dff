"""Ensemble experiments over parameter grids with reproducible seeding.

Each realization r derives its random streams solely from
(master_seed, r): stream (r, 0) draws the base Hamiltonian and (r, 1) the
perturbation, so results are independent of execution order and worker
count, and adding realizations never changes the existing ones.  Within a
realization the same sample pair is reused across the whole grid, which
makes the curves smooth in the swept parameter without biasing the mean.

Grid semantics depend on the experiment kind: the mixing and breaking
experiments sweep the perturbation strength eps in [0, 1], "eta-sweep"
sweeps the contact coupling, and "dephasing-sweep" sweeps the probe
strength nu.
"""

from __future__ import annotations

import concurrent.futures
import datetime
import math
import os
from dataclasses import dataclass, field

import numpy as np

from .dephasing import DephasingError, DephasingSpec, dephased_current
from .ensembles import (mix, sample_cs_breaker, sample_csege, sample_ege,
                        sample_parity_breaker, CS_CONSTRUCTIONS)
from .fock import Basis, BasisSpec, enumerate_basis
from .negf import TransportError, contact_pair, total_current
from .quadrature import QuadratureError, QuadratureSpec
from .version import VERSION

MIX_CS_VS_EGE = "mix-cs-vs-ege"
MIX_SAME = "mix-same-ensemble"
PARITY_BREAK = "parity-break"
CS_BREAK = "cs-break"
ETA_SWEEP = "eta-sweep"
DEPHASING_SWEEP = "dephasing-sweep"

KINDS = (MIX_CS_VS_EGE, MIX_SAME, PARITY_BREAK, CS_BREAK, ETA_SWEEP, DEPHASING_SWEEP)
EPS_KINDS = (MIX_CS_VS_EGE, MIX_SAME, PARITY_BREAK, CS_BREAK)
ENSEMBLES = ("ege", "csege")

_FAILURE_BUDGET = 0.01


class SweepError(RuntimeError):
    pass


class FailureBudgetExceeded(SweepError):
    pass


def default_eps_grid() -> tuple:
    """0 to 1 in steps of 0.01."""
    return tuple(i / 100 for i in range(101))


def default_eta_grid() -> tuple:
    """25 linear points on [0.1, 3] merged with 25 log points on [0.01, 10]."""
    lin = np.linspace(0.1, 3.0, 25)
    log = np.logspace(-2.0, 1.0, 25)
    return tuple(sorted(set(np.concatenate([lin, log]).tolist())))


def default_nu_grid() -> tuple:
    """nu = 0 plus 25 log points on [1e-3, 50]."""
    pts = np.logspace(-3.0, math.log10(50.0), 25).tolist()
    pts[-1] = 50.0  # 10**log10(50) rounds to 49.99999999999999
    return (0.0,) + tuple(pts)


@dataclass(frozen=True)
class ExperimentSpec:
    kind: str
    basis: BasisSpec
    k: int
    realizations: int
    master_seed: int
    grid: tuple = None
    k_prime: int = None
    ensemble: str = "csege"
    construction: str = "projection"
    eta: float = 0.5
    quad: QuadratureSpec = field(default_factory=QuadratureSpec)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown experiment kind {self.kind!r}")
        if self.realizations < 1:
            raise ValueError("realizations must be at least 1")
        if not self.eta > 0:
            raise ValueError("eta must be positive")
        if not 1 <= self.k <= self.basis.n:
            raise ValueError(f"k must lie in [1, {self.basis.n}], got {self.k}")
        if self.k_prime is not None and not 1 <= self.k_prime <= self.basis.n:
            raise ValueError(f"k_prime must lie in [1, {self.basis.n}], got {self.k_prime}")
        if self.ensemble not in ENSEMBLES:
            raise ValueError(f"unknown ensemble {self.ensemble!r}")
        if self.construction not in CS_CONSTRUCTIONS:
            raise ValueError(f"unknown construction {self.construction!r}")
        grid = self.grid
        if grid is None:
            grid = {ETA_SWEEP: default_eta_grid(),
                    DEPHASING_SWEEP: default_nu_grid()}.get(self.kind, default_eps_grid())
        grid = tuple(float(g) for g in grid)
        if not grid:
            raise ValueError("grid must not be empty")
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise ValueError("grid values must be strictly increasing")
        if self.kind in EPS_KINDS and (grid[0] < 0.0 or grid[-1] > 1.0):
            raise ValueError("eps grid must lie within [0, 1]")
        if self.kind == ETA_SWEEP and grid[0] <= 0.0:
            raise ValueError("eta grid values must be positive")
        if self.kind == DEPHASING_SWEEP and grid[0] < 0.0:
            raise ValueError("nu grid values must be nonnegative")
        object.__setattr__(self, "grid", grid)

    @property
    def rank_pair(self):
        return self.k, self.k if self.k_prime is None else self.k_prime


@dataclass(frozen=True)
class SweepResult:
    spec: ExperimentSpec
    grid: tuple
    mean: tuple
    stderr: tuple
    count: tuple
    failures: tuple
    version: str
    timestamp: str


def realization_rng(master_seed: int, r: int, stream: int) -> np.random.Generator:
    """Splittable per-realization stream; stream 0 is the base draw, 1 the
    perturbation draw."""
    return np.random.default_rng(np.random.SeedSequence(master_seed, spawn_key=(r, stream)))


def _sampler(ensemble: str, construction: str):
    if ensemble == "ege":
        return lambda basis, k, rng: sample_ege(basis, k, rng)
    return lambda basis, k, rng: sample_csege(basis, k, rng, construction)


_NUMERIC_FAILURES = (TransportError, QuadratureError, DephasingError, np.linalg.LinAlgError)


def realization_currents(spec: ExperimentSpec, r: int) -> np.ndarray:
    """Currents of realization r on the whole grid; failed points are NaN."""
    basis = _basis(spec.basis)
    k, k_right = spec.rank_pair
    rng_left = realization_rng(spec.master_seed, r, 0)
    rng_right = realization_rng(spec.master_seed, r, 1)
    out = np.empty(len(spec.grid))

    if spec.kind in (MIX_CS_VS_EGE, MIX_SAME, PARITY_BREAK, CS_BREAK):
        if spec.kind == MIX_CS_VS_EGE:
            left = sample_csege(basis, k, rng_left, spec.construction)
            right = sample_ege(basis, k_right, rng_right)
        elif spec.kind == MIX_SAME:
            draw = _sampler(spec.ensemble, spec.construction)
            left = draw(basis, k, rng_left)
            right = draw(basis, k_right, rng_right)
        elif spec.kind == PARITY_BREAK:
            left = sample_csege(basis, k, rng_left, spec.construction)
            right = sample_parity_breaker(basis, rng_right)
        else:
            left = sample_csege(basis, k, rng_left, spec.construction)
            right = sample_cs_breaker(basis, rng_right)
        contacts = contact_pair(basis, spec.eta)
        for i, eps in enumerate(spec.grid):
            try:
                out[i] = total_current(mix(eps, left, right), contacts, spec.quad).value
            except _NUMERIC_FAILURES:
                out[i] = np.nan
        return out

    draw = _sampler(spec.ensemble, spec.construction)
    h = draw(basis, k, rng_left)
    if spec.kind == ETA_SWEEP:
        for i, eta in enumerate(spec.grid):
            try:
                out[i] = total_current(h, contact_pair(basis, eta), spec.quad).value
            except _NUMERIC_FAILURES:
                out[i] = np.nan
        return out

    src, dst = contact_pair(basis, spec.eta)
    for i, nu in enumerate(spec.grid):
        try:
            out[i] = dephased_current(h, src, dst, DephasingSpec(nu), spec.quad).value
        except _NUMERIC_FAILURES:
            out[i] = np.nan
    return out


_basis_cache = {}


def _basis(spec: BasisSpec) -> Basis:
    if spec not in _basis_cache:
        _basis_cache[spec] = enumerate_basis(spec)
    return _basis_cache[spec]


def _task(args):
    spec, r = args
    return r, realization_currents(spec, r)


def run_experiment(spec: ExperimentSpec, workers: int = 1) -> SweepResult:
    """Run all realizations and reduce to per-grid-point statistics.

    Statistics are accumulated into an array keyed by realization index, so
    the result is bit-identical for any worker count.  Aborts if more than
    1% of all (realization, grid point) evaluations fail numerically.
    """
    rows = np.empty((spec.realizations, len(spec.grid)))
    if workers <= 1:
        for r in range(spec.realizations):
            rows[r] = realization_currents(spec, r)
    else:
        jobs = [(spec, r) for r in range(spec.realizations)]
        chunk = max(1, spec.realizations // (workers * 4))
        with concurrent.futures.ProcessPoolExecutor(max_workers=workers) as pool:
            for r, row in pool.map(_task, jobs, chunksize=chunk):
                rows[r] = row

    ok = np.isfinite(rows)
    failed = rows.size - int(ok.sum())
    if failed > _FAILURE_BUDGET * rows.size:
        raise FailureBudgetExceeded(
            f"{failed} of {rows.size} evaluations failed, exceeding the 1% budget"
        )

    mean, stderr, count, failures = [], [], [], []
    for g in range(len(spec.grid)):
        vals = rows[:, g][ok[:, g]]
        c = vals.size
        count.append(c)
        failures.append(spec.realizations - c)
        mean.append(float(np.mean(vals)) if c else float("nan"))
        stderr.append(float(np.std(vals, ddof=1) / math.sqrt(c)) if c > 1 else 0.0)
    return SweepResult(
        spec=spec,
        grid=spec.grid,
        mean=tuple(mean),
        stderr=tuple(stderr),
        count=tuple(count),
        failures=tuple(failures),
        version=VERSION,
        timestamp=datetime.datetime.now(datetime.timezone.utc).isoformat(),
    )


def _run_kind(spec: ExperimentSpec, allowed, workers: int) -> SweepResult:
    if spec.kind not in allowed:
        raise ValueError(f"spec kind {spec.kind!r} not valid here, expected one of {allowed}")
    return run_experiment(spec, workers)


def run_mix_experiment(spec: ExperimentSpec, workers: int = 1) -> SweepResult:
    return _run_kind(spec, (MIX_CS_VS_EGE, MIX_SAME), workers)


def run_parity_break(spec: ExperimentSpec, workers: int = 1) -> SweepResult:
    return _run_kind(spec, (PARITY_BREAK,), workers)


def run_cs_break(spec: ExperimentSpec, workers: int = 1) -> SweepResult:
    return _run_kind(spec, (CS_BREAK,), workers)


def run_eta_sweep(spec: ExperimentSpec, workers: int = 1) -> SweepResult:
    return _run_kind(spec, (ETA_SWEEP,), workers)


def run_dephasing_sweep(spec: ExperimentSpec, workers: int = 1) -> SweepResult:
    return _run_kind(spec, (DEPHASING_SWEEP,), workers)


def _spec_metadata(spec: ExperimentSpec):
    k, kp = spec.rank_pair
    return [
        ("kind", spec.kind),
        ("l", spec.basis.l),
        ("n", spec.basis.n),
        ("k", k),
        ("k_prime", kp),
        ("ensemble", spec.ensemble),
        ("construction", spec.construction),
        ("eta", repr(spec.eta)),
        ("realizations", spec.realizations),
        ("master_seed", spec.master_seed),
        ("quad_atol", repr(spec.quad.atol)),
        ("quad_rtol", repr(spec.quad.rtol)),
        ("quad_max_depth", spec.quad.max_depth),
        ("grid", ",".join(repr(g) for g in spec.grid)),
    ]


def _atomic_write(path, text: str):
    tmp = f"{path}.tmp"
    with open(tmp, "w") as fh:
        fh.write(text)
    os.replace(tmp, path)


def write_csv(result: SweepResult, path):
    """Deterministic CSV: metadata comments, then one line per grid point.

    Everything written here is a pure function of the ExperimentSpec and the
    results, so equal specs give byte-identical files; the timestamp goes
    only into the sidecar.
    """
    lines = [f"# {key}={value}" for key, value in _spec_metadata(result.spec)]
    lines.append(f"# version={result.version}")
    lines.append("param,mean_I,stderr,count,failures")
    for g, m, s, c, f in zip(result.grid, result.mean, result.stderr,
                             result.count, result.failures):
        lines.append(f"{g!r},{m!r},{s!r},{c},{f}")
    _atomic_write(path, "\n".join(lines) + "\n")


def write_sidecar(result: SweepResult, path):
    """Key-value metadata companion, including the run timestamp."""
    lines = [f"{key}={value}" for key, value in _spec_metadata(result.spec)]
    lines.append(f"version={result.version}")
    lines.append(f"timestamp={result.timestamp}")
    _atomic_write(path, "\n".join(lines) + "\n")


def format_summary(result: SweepResult) -> str:
    rows = [f"{'param':>12}  {'mean_I':>18}  {'stderr':>12}  {'count':>6}  {'fail':>4}"]
    for g, m, s, c, f in zip(result.grid, result.mean, result.stderr,
                             result.count, result.failures):
        rows.append(f"{g:>12.6g}  {m:>18.12g}  {s:>12.4g}  {c:>6}  {f:>4}")
    return "\n".join(rows)
