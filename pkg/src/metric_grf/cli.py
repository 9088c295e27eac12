"""Command line entry point: ``metric-grf <subcommand> ...``."""
from __future__ import annotations

import argparse
import logging
import sys

from .assembly import MassMode
from .graph import default_test_graph, generate_barabasi_albert, load_graph, save_graph

log = logging.getLogger("metric_grf")


def _floats(text: str) -> list[float]:
    out = []
    for part in text.split(","):
        part = part.strip()
        if "/" in part:
            num, den = part.split("/")
            out.append(float(num) / float(den))
        else:
            out.append(float(part))
    return out


def _ints(text: str) -> list[int]:
    return [int(p) for p in text.split(",")]


def _common(p: argparse.ArgumentParser, betas=True):
    p.add_argument("--graph", help="graph file; defaults to the built-in triangle-plus-pendant graph")
    if betas:
        p.add_argument("--beta", type=_floats, default=[0.5],
                       help="fractional order(s), comma separated; fractions like 3/8 allowed")
    p.add_argument("--kappa", type=float, default=1.0)
    p.add_argument("--mode", choices=[m.value for m in MassMode], default=MassMode.LUMPED.value)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="output CSV path (stdout if omitted)")
    p.add_argument("--quad-step", type=float, default=None, help="override k = -1/(beta ln h)")
    p.add_argument("--pcg-tol", type=float, default=1e-10)
    p.add_argument("--threads", type=int, default=1)


def _graph(args):
    return load_graph(args.graph) if args.graph else default_test_graph()


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="metric-grf", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sample", help="draw one field sample and write it as CSV")
    _common(p)
    grp = p.add_mutually_exclusive_group()
    grp.add_argument("--h", type=float)
    grp.add_argument("--ell", type=int, help="use h = 2**-ell")

    p = sub.add_parser("gen-graph", help="generate a synthetic metric graph")
    p.add_argument("--model", choices=["barabasi-albert"], default="barabasi-albert")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, default=2)
    p.add_argument("--edge-length", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)

    p = sub.add_parser("strong-error", help="strong convergence study")
    _common(p)
    p.set_defaults(beta=[3 / 8, 4 / 8, 5 / 8, 6 / 8, 7 / 8])
    p.add_argument("--ell-ok", type=int, default=10)
    p.add_argument("--ell-coarse", type=_ints, default=[3, 4, 5, 6])
    p.add_argument("--reps", type=int, default=50)

    p = sub.add_parser("cov-error", help="covariance convergence study")
    _common(p)
    p.set_defaults(beta=[3 / 8, 4 / 8, 5 / 8, 6 / 8, 7 / 8])
    p.add_argument("--ell-ok", type=int, default=7)
    p.add_argument("--ell-coarse", type=_ints, default=[2, 3, 4])

    p = sub.add_parser("perf", help="timing sweep on Barabasi-Albert graphs")
    _common(p)
    p.add_argument("--sizes", type=_ints, default=[100, 500, 1000, 2000, 5000])
    grp = p.add_mutually_exclusive_group()
    grp.add_argument("--h", type=float)
    grp.add_argument("--ell", type=int, default=6)
    p.add_argument("--modes", default="lumped,consistent")
    p.add_argument("--tasks", default="noise_only,full_grf")
    p.add_argument("--repeats", type=int, default=3)
    p.add_argument("--memory", action="store_true", help="also record peak allocations")
    return parser


def _mesh_size(args, default_ell=None) -> float:
    if getattr(args, "h", None) is not None:
        return args.h
    ell = args.ell if getattr(args, "ell", None) is not None else default_ell
    if ell is None:
        raise SystemExit("one of --h or --ell is required")
    return 2.0**-ell


def _emit_reports(reports, out):
    from .experiments import rate_summary, write_report_csv

    write_report_csv(reports, out or sys.stdout)
    print(rate_summary(reports), file=sys.stderr)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")

    if args.command == "gen-graph":
        g = generate_barabasi_albert(args.n, args.m, args.edge_length, args.seed)
        save_graph(g, args.out)
        log.info("wrote %r to %s", g, args.out)
        return 0

    if args.command == "sample":
        from .sampler import sample_field, write_field_csv

        if len(args.beta) != 1:
            raise SystemExit("sample takes a single --beta")
        s = sample_field(_graph(args), _mesh_size(args), args.beta[0], args.kappa, args.mode,
                         args.seed, quad_step=args.quad_step, pcg_tol=args.pcg_tol,
                         threads=args.threads)
        write_field_csv(s, args.out or sys.stdout)
        log.info("N=%d, total PCG iterations %d", s.mesh.num_nodes, s.pcg_iterations)
        return 0

    from . import experiments as ex

    if args.quad_step is not None:
        log.warning("--quad-step is ignored by the convergence and perf studies")

    if args.command == "strong-error":
        reports = ex.strong_error_study(args.beta, args.ell_ok, args.ell_coarse, args.reps,
                                        args.seed, _graph(args), args.mode, args.kappa,
                                        args.pcg_tol, args.threads)
        _emit_reports(reports, args.out)
        return 0

    if args.command == "cov-error":
        reports = ex.covariance_error_study(args.beta, args.ell_ok, args.ell_coarse, _graph(args),
                                            args.mode, args.kappa, args.pcg_tol, args.threads)
        _emit_reports(reports, args.out)
        return 0

    if args.command == "perf":
        def show(rec):
            print(f"|V|={rec.graph_vertices:>6} N={rec.num_nodes:>8} {rec.mode:>10} "
                  f"{rec.task:>10} {rec.wall_time:10.4g}s iters={rec.pcg_iterations}",
                  file=sys.stderr, flush=True)

        records = ex.perf_study(args.sizes, _mesh_size(args, 6), args.modes.split(","),
                                args.tasks.split(","), args.seed, args.beta[0], args.kappa,
                                repeats=args.repeats, measure_memory=args.memory,
                                threads=args.threads, progress=show)
        ex.write_perf_csv(records, args.out or sys.stdout)
        return 0

    return 1


if __name__ == "__main__":
    sys.exit(main())
