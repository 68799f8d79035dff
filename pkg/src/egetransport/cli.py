"""Command-line interface.

Subcommands:
  generate      sample one Hamiltonian and write it as plain text
  transmission  transmission curve of one realization on an energy grid
  current       integrated current of one realization
  sweep         run an ensemble experiment described by a TOML config

Exit codes: 0 success, 1 configuration error, 2 numerical failure budget
exceeded, 3 output I/O failure.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from .config import ConfigError, apply_overrides, load_config
from .dephasing import DephasingSpec, dephased_current, effective_transmission_curve
from .ensembles import sample_csege, sample_ege
from .fock import BasisSpec, enumerate_basis
from .negf import contact_pair, write_transmission_csv
from .quadrature import QuadratureSpec
from .sweep import (FailureBudgetExceeded, format_summary, run_experiment,
                    write_csv, write_sidecar)
from .version import VERSION

THREADS_ENV = "EGETRANSPORT_THREADS"


def _model_arguments(p: argparse.ArgumentParser):
    p.add_argument("--l", type=int, required=True, help="single-particle levels")
    p.add_argument("--n", type=int, required=True, help="particle number")
    p.add_argument("--k", type=int, required=True, help="interaction rank")
    p.add_argument("--cs", action="store_true",
                   help="draw from the centrosymmetric ensemble")
    p.add_argument("--construction", default="projection",
                   choices=("projection", "coupling"),
                   help="centrosymmetric construction variant")
    p.add_argument("--seed", type=int, required=True)


def _quad_arguments(p: argparse.ArgumentParser):
    p.add_argument("--atol", type=float, default=1e-8)
    p.add_argument("--rtol", type=float, default=1e-6)
    p.add_argument("--max-depth", type=int, default=40)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="egetransport",
        description="Quantum transport through disordered interacting many-body networks",
    )
    parser.add_argument("--version", action="version", version=VERSION)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="sample one Hamiltonian matrix")
    _model_arguments(p)
    p.add_argument("--out", help="output file (default: stdout)")
    p.set_defaults(func=_cmd_generate)

    p = sub.add_parser("transmission", help="transmission curve on an energy grid")
    _model_arguments(p)
    p.add_argument("--eta", type=float, default=0.5)
    p.add_argument("--nu", type=float, default=0.0, help="probe strength")
    p.add_argument("--emin", type=float, required=True)
    p.add_argument("--emax", type=float, required=True)
    p.add_argument("--points", type=int, required=True)
    p.add_argument("--out", help="output CSV (default: stdout)")
    p.set_defaults(func=_cmd_transmission)

    p = sub.add_parser("current", help="integrated current of one realization")
    _model_arguments(p)
    p.add_argument("--eta", type=float, default=0.5)
    p.add_argument("--nu", type=float, default=0.0)
    _quad_arguments(p)
    p.set_defaults(func=_cmd_current)

    p = sub.add_parser("sweep", help="run an ensemble experiment from a config")
    p.add_argument("--config", required=True)
    p.add_argument("--out-dir", default=".")
    p.add_argument("--seed", type=int, help="override master seed")
    p.add_argument("--realizations", type=int, help="override realization count")
    p.add_argument("--eta", type=float, help="override contact coupling")
    p.add_argument("--full-scale", action="store_true",
                   help="run 10^4 realizations instead of the config value")
    p.add_argument("--threads", type=int,
                   help=f"worker processes (default: ${THREADS_ENV} or 1)")
    p.add_argument("-v", "--verbose", action="store_true")
    p.set_defaults(func=_cmd_sweep)
    return parser


def _sample(args):
    basis = enumerate_basis(BasisSpec(args.l, args.n))
    if args.cs:
        return basis, sample_csege(basis, args.k, args.seed, args.construction)
    return basis, sample_ege(basis, args.k, args.seed)


def _matrix_text(matrix) -> str:
    rows = (" ".join(f"{x:.17g}" for x in row) for row in matrix.values)
    return "\n".join(rows) + "\n"


def _write_text(path, text: str):
    tmp = f"{path}.tmp"
    with open(tmp, "w") as fh:
        fh.write(text)
    os.replace(tmp, path)


def _cmd_generate(args) -> int:
    _, matrix = _sample(args)
    text = _matrix_text(matrix)
    if args.out:
        _write_text(args.out, text)
    else:
        sys.stdout.write(text)
    return 0


def _cmd_transmission(args) -> int:
    if args.points < 2:
        raise ConfigError("field points must be at least 2")
    if args.nu < 0:
        raise ConfigError("field nu must be nonnegative")
    basis, matrix = _sample(args)
    src, dst = contact_pair(basis, args.eta)
    energies = np.linspace(args.emin, args.emax, args.points)
    values = effective_transmission_curve(matrix, src, dst,
                                          DephasingSpec(args.nu), energies)
    if args.out:
        nu = args.nu if args.nu > 0 else None
        write_transmission_csv(args.out, energies, values, args.eta, args.seed, nu=nu)
    else:
        head = f"# E,T,eta={args.eta!r},seed={args.seed}"
        if args.nu > 0:
            head += f",nu={args.nu!r}"
        print(head)
        for e, t in zip(energies, values):
            print(f"{float(e)!r},{float(t)!r}")
    return 0


def _cmd_current(args) -> int:
    if args.nu < 0:
        raise ConfigError("field nu must be nonnegative")
    basis, matrix = _sample(args)
    src, dst = contact_pair(basis, args.eta)
    quad = QuadratureSpec(atol=args.atol, rtol=args.rtol, max_depth=args.max_depth)
    result = dephased_current(matrix, src, dst, DephasingSpec(args.nu), quad)
    print(f"current={result.value!r}")
    print(f"abs_error_estimate={result.abs_error_estimate!r}")
    print(f"evaluations={result.evaluations}")
    return 0


def _resolve_threads(args) -> int:
    if args.threads is not None:
        threads = args.threads
    else:
        raw = os.environ.get(THREADS_ENV, "1")
        try:
            threads = int(raw)
        except ValueError:
            raise ConfigError(f"environment variable {THREADS_ENV} must be an integer")
    if threads < 1:
        raise ConfigError("field threads must be at least 1")
    return threads


def _cmd_sweep(args) -> int:
    spec = load_config(args.config)
    spec = apply_overrides(spec, seed=args.seed, realizations=args.realizations,
                           eta=args.eta, full_scale=args.full_scale)
    threads = _resolve_threads(args)
    if args.verbose:
        print(f"running {spec.kind} with {spec.realizations} realizations "
              f"on {len(spec.grid)} grid points ({threads} worker(s))")
    result = run_experiment(spec, workers=threads)
    stem = os.path.splitext(os.path.basename(args.config))[0]
    os.makedirs(args.out_dir, exist_ok=True)
    csv_path = os.path.join(args.out_dir, f"{stem}.csv")
    write_csv(result, csv_path)
    write_sidecar(result, os.path.join(args.out_dir, f"{stem}.meta"))
    print(format_summary(result))
    if args.verbose:
        print(f"wrote {csv_path}")
    return 0


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 1
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except FailureBudgetExceeded as exc:
        print(f"numerical failure budget exceeded: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"i/o failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
