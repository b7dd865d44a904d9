"""Command-line interface: synthesis, validation, sweeps, noisy simulation.

Exit codes: 0 success, 1 validation failure, 2 usage error.  Every run echoes
one reproducibility line with the full parameter set and seed.  All user-facing
Rabi frequencies and detunings are in pi/T units.
"""

from __future__ import annotations

import argparse
import math
import sys

import numpy as np

from . import catalog as catalog_mod
from . import deriv_solver
from .cost_synthesis import (
    ProfileClass,
    SynthesisProblem,
    minimize as synthesize_minimize,
    validate as validate_synthesis,
)
from .catalog import CatalogEntry, CatalogError, load_catalog, save_catalog
from .noise_sim import NoiseModel, noisy_sweep_1d
from .profile_analysis import GridSpec, sweep_1d, sweep_2d, write_profile_csv

_CLASS_ALIASES = {
    "bb": ProfileClass.BROADBAND,
    "broadband": ProfileClass.BROADBAND,
    "nb": ProfileClass.NARROWBAND,
    "narrowband": ProfileClass.NARROWBAND,
    "pb": ProfileClass.PASSBAND,
    "passband": ProfileClass.PASSBAND,
    "2d": ProfileClass.DOUBLECOMP2D,
    "double2d": ProfileClass.DOUBLECOMP2D,
}


def _fmt(x: float) -> str:
    return f"{x:.9g}"


def _pi(x: float) -> str:
    return _fmt(x / math.pi)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="polypulse",
        description="Synthesize and analyze polychromatic pulse trains.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--rng-seed", type=int, default=0)
        p.add_argument("--unit", choices=["pi"], default="pi",
                       help="I/O unit for rabi/detunings (pi/T)")
        p.add_argument("--catalog", default=None,
                       help="catalog file (default: $POLYPULSE_CATALOG or builtin)")

    p = sub.add_parser("derive", help="derivative-based broadband synthesis")
    p.add_argument("--target", type=float, required=True)
    p.add_argument("--n", type=int, required=True, help="number of free detunings")
    p.add_argument("--seeds", type=int, default=200)
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--out", default=None, help="write solutions to this catalog file")
    add_common(p)

    p = sub.add_parser("synthesize", help="cost-function synthesis")
    p.add_argument("--class", dest="profile_class", required=True,
                   choices=sorted(_CLASS_ALIASES))
    p.add_argument("--target", type=float, default=1.0)
    p.add_argument("--n", type=int, required=True, help="train length N")
    p.add_argument("--eps0", type=float, required=True)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--seeds", type=int, default=40)
    p.add_argument("--suppress-from", type=float, default=0.8,
                   help="passband only: |eps| where wings must be suppressed")
    p.add_argument("--max-results", type=int, default=5)
    p.add_argument("--out", default=None, help="write results to this catalog file")
    add_common(p)

    p = sub.add_parser("profile", help="1D excitation-profile sweep to CSV")
    p.add_argument("--id", required=True, help="catalog entry id")
    p.add_argument("--eps-min", type=float, default=-1.0)
    p.add_argument("--eps-max", type=float, default=1.0)
    p.add_argument("--eps-step", type=float, default=2e-3)
    p.add_argument("--out", required=True)
    p.add_argument("--fig", default=None, help="also render a figure (png/pdf)")
    add_common(p)

    p = sub.add_parser("profile2d", help="2D (eps, delta) sweep to CSV")
    p.add_argument("--id", required=True)
    p.add_argument("--eps-min", type=float, default=-1.0)
    p.add_argument("--eps-max", type=float, default=1.0)
    p.add_argument("--eps-step", type=float, default=0.01)
    p.add_argument("--delta-span", type=float, default=2.0,
                   help="half-span of the detuning error, pi/T units")
    p.add_argument("--delta-step", type=float, default=0.02,
                   help="detuning error step, pi/T units")
    p.add_argument("--out", required=True)
    p.add_argument("--fig", default=None)
    add_common(p)

    p = sub.add_parser("simulate", help="noisy-qubit profile simulation")
    p.add_argument("--id", required=True)
    p.add_argument("--eps-min", type=float, default=-1.0)
    p.add_argument("--eps-max", type=float, default=1.0)
    p.add_argument("--eps-step", type=float, default=0.02)
    p.add_argument("--t1", type=float, default=195.52e-6, help="seconds")
    p.add_argument("--t2", type=float, default=232.57e-6, help="seconds")
    p.add_argument("--readout", type=float, default=0.0347)
    p.add_argument("--shots", type=int, default=1024)
    p.add_argument("--pulse-ns", type=float, default=100.0)
    p.add_argument("--out", required=True)
    p.add_argument("--fig", default=None)
    add_common(p)

    p = sub.add_parser("validate", help="re-validate a catalog entry")
    p.add_argument("--id", required=True)
    p.add_argument("--class", dest="profile_class", default=None,
                   choices=sorted(_CLASS_ALIASES))
    p.add_argument("--eps0", type=float, default=None)
    p.add_argument("--alpha", type=float, default=None)
    add_common(p)

    p = sub.add_parser("catalog", help="list or show catalog entries")
    p.add_argument("action", choices=["list", "show"])
    p.add_argument("--id", default=None)
    add_common(p)

    return parser


def _echo_repro(args, argv) -> None:
    print("# run: polypulse " + " ".join(argv) + f" [rng-seed={getattr(args, 'rng_seed', 0)}]")


def _catalog_path(args) -> str:
    return args.catalog if args.catalog else catalog_mod.default_catalog_path()


def _find_entry(args) -> CatalogEntry:
    entries = load_catalog(_catalog_path(args), validate=False)
    for entry in entries:
        if entry.id == args.id:
            return entry
    raise CatalogError(f"no catalog entry with id '{args.id}'")


def _cmd_derive(args) -> int:
    prob = deriv_solver.DerivProblem(
        target_p=args.target, n_free=args.n, tolerance=args.tol
    )
    solutions = deriv_solver.solve(prob, seeds=args.seeds, rng_seed=args.rng_seed)
    if not solutions:
        print("no solutions converged")
        return 1
    print(f"found {len(solutions)} solution(s), N={prob.length}, unit=pi/T")
    for k, sol in enumerate(solutions):
        dets = ", ".join(_pi(d) for d in sol.detunings)
        print(
            f"  [{k}] rabi={_pi(sol.rabi)} detunings=[{dets}] "
            f"max_residual={max(abs(r) for r in sol.residuals):.3e} "
            f"area={_fmt(sol.total_area / math.pi)}pi"
        )
    if args.out:
        entries = [
            CatalogEntry(
                id=f"BB-N{prob.length}-p{_fmt(args.target)}-deriv-{k}",
                train=sol.train(),
                target_p=args.target,
                profile_class=ProfileClass.BROADBAND,
                method="derivative",
                provenance="derived",
                center_p=args.target,
                center_tol=1e-6,
                # catalog files carry 9 significant digits, which limits how
                # small the reload-checked residuals can be
                residual_tol=max(args.tol, 1e-7),
            )
            for k, sol in enumerate(solutions)
        ]
        save_catalog(entries, args.out)
        print(f"wrote {len(entries)} entries to {args.out}")
    return 0


def _cmd_synthesize(args) -> int:
    cls = _CLASS_ALIASES[args.profile_class]
    prob = SynthesisProblem(
        profile_class=cls,
        target_p=args.target,
        length_N=args.n,
        bandwidth_eps0=args.eps0,
        error_level_alpha=args.alpha,
        suppress_from=args.suppress_from,
    )
    results = synthesize_minimize(prob, seeds=args.seeds, rng_seed=args.rng_seed)
    results = results[: args.max_results]
    if not results:
        print("no validated solutions")
        return 1
    print(f"found {len(results)} validated solution(s), unit=pi/T")
    for k, res in enumerate(results):
        dets = ", ".join(_pi(d) for d in res.train.detunings)
        print(
            f"  [{k}] rabi={_pi(res.train.rabi)} detunings=[{dets}] "
            f"cost={res.cost_value:.3e} bb_band={_fmt(res.measured_bb_band)} "
            f"nb_band={_fmt(res.measured_nb_band)}"
        )
    if args.out:
        entries = []
        for k, res in enumerate(results):
            center = res.diagnostics.get("center", args.target)
            entries.append(
                CatalogEntry(
                    id=f"{args.profile_class.upper()}-N{args.n}-p{_fmt(args.target)}-{k}",
                    train=res.train,
                    target_p=args.target,
                    profile_class=cls,
                    method="cost",
                    provenance="derived",
                    center_p=float(f"{center:.9g}"),
                    center_tol=1e-3,
                    eps0=args.eps0,
                    alpha=args.alpha,
                    wing_from=args.suppress_from if cls is ProfileClass.PASSBAND else None,
                )
            )
        save_catalog(entries, args.out)
        print(f"wrote {len(entries)} entries to {args.out}")
    return 0


def _cmd_profile(args) -> int:
    entry = _find_entry(args)
    grid = GridSpec((args.eps_min, args.eps_max), args.eps_step)
    profile = sweep_1d(entry.train, grid, train_id=entry.id)
    write_profile_csv(profile, args.out)
    print(f"wrote {args.out}")
    if args.fig:
        from .plotting import render_profile_1d

        render_profile_1d(profile, args.fig, target=entry.target_p)
        print(f"wrote {args.fig}")
    return 0


def _cmd_profile2d(args) -> int:
    entry = _find_entry(args)
    grid = GridSpec(
        (args.eps_min, args.eps_max),
        args.eps_step,
        (-args.delta_span * math.pi, args.delta_span * math.pi),
        args.delta_step * math.pi,
    )
    profile = sweep_2d(entry.train, grid, train_id=entry.id)
    write_profile_csv(profile, args.out)
    print(f"wrote {args.out}")
    if args.fig:
        from .plotting import render_profile_2d

        render_profile_2d(profile, args.fig)
        print(f"wrote {args.fig}")
    return 0


def _cmd_simulate(args) -> int:
    entry = _find_entry(args)
    nm = NoiseModel(
        t1=args.t1,
        t2=args.t2,
        readout_error=args.readout,
        shots=args.shots,
        pulse_duration=args.pulse_ns * 1e-9,
    )
    grid = GridSpec((args.eps_min, args.eps_max), args.eps_step)
    profile = noisy_sweep_1d(entry.train, grid, nm, rng_seed=args.rng_seed, train_id=entry.id)
    write_profile_csv(
        profile,
        args.out,
        extra_header={
            "t1": _fmt(nm.t1),
            "t2": _fmt(nm.t2),
            "readout": _fmt(nm.readout_error),
            "shots": str(nm.shots),
        },
    )
    peak = float(np.max(profile.values))
    print(f"wrote {args.out} (peak={peak:.4f})")
    if args.fig:
        from .plotting import render_profile_1d

        render_profile_1d(profile, args.fig, target=entry.target_p)
        print(f"wrote {args.fig}")
    return 0


def _cmd_validate(args) -> int:
    entry = _find_entry(args)
    if args.profile_class is not None:
        cls = _CLASS_ALIASES[args.profile_class]
        prob = SynthesisProblem(
            profile_class=cls,
            target_p=entry.target_p,
            length_N=len(entry.train),
            bandwidth_eps0=args.eps0 if args.eps0 is not None else (entry.eps0 or 0.2),
            error_level_alpha=args.alpha if args.alpha is not None else (entry.alpha or 1e-4),
            symmetry=entry.train.symmetry,
        )
        result = validate_synthesis(entry.train, prob)
        print(
            f"{entry.id}: validated={result.validated} "
            f"bb_band={_fmt(result.measured_bb_band)} nb_band={_fmt(result.measured_nb_band)}"
        )
        return 0 if result.validated else 1
    ok, detail = catalog_mod.revalidate(entry)
    print(f"{entry.id}: {'ok' if ok else 'FAILED'} ({detail})")
    return 0 if ok else 1


def _cmd_catalog(args) -> int:
    entries = load_catalog(_catalog_path(args), validate=False)
    if args.action == "list":
        for entry in entries:
            print(
                f"{entry.id}  class={entry.profile_class.value} N={len(entry.train)} "
                f"p={_fmt(entry.target_p)} provenance={entry.provenance}"
            )
        return 0
    if args.id is None:
        print("catalog show requires --id", file=sys.stderr)
        return 2
    for entry in entries:
        if entry.id == args.id:
            print(catalog_mod.serialize_entry(entry))
            return 0
    print(f"no catalog entry with id '{args.id}'", file=sys.stderr)
    return 1


_COMMANDS = {
    "derive": _cmd_derive,
    "synthesize": _cmd_synthesize,
    "profile": _cmd_profile,
    "profile2d": _cmd_profile2d,
    "simulate": _cmd_simulate,
    "validate": _cmd_validate,
    "catalog": _cmd_catalog,
}


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    _echo_repro(args, argv)
    try:
        return _COMMANDS[args.command](args)
    except CatalogError as exc:
        print(f"catalog error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
