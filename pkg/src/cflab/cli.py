"""Command-line entry point: ``cflab track | compare | sim kernel | sim fractional | synth``.

Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical-consistency error.
"""

from __future__ import annotations

import argparse
import logging
import sys

from .bench import (
    boxes_csv,
    compare_strategies,
    load_sequence,
    report_csv,
    run_tracking,
    synthesize_sequence,
    write_csv_text,
)
from .errors import CflabError, DataError, InvalidInputError, NumericalConsistencyError
from .kernels import KernelSpec
from .simlab import FractionalSimConfig, KernelSimConfig, parse_grid, simulate_fractional, simulate_kernel_update
from .tracker import TrackerConfig
from .updates import STRATEGIES

log = logging.getLogger("cflab")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _add_tracker_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--sequence", required=True, help="OTB-layout sequence directory")
    p.add_argument("--eta", type=float, default=0.025)
    p.add_argument("--lambda", dest="lam", type=float, default=1e-4)
    p.add_argument("--kernel", choices=("gaussian", "polynomial", "linear"), default="gaussian")
    p.add_argument("--kernel-sigma", type=float, default=0.5)
    p.add_argument("--poly-a", type=float, default=1.5)
    p.add_argument("--poly-b", type=int, default=7)
    p.add_argument("--padding", type=float, default=1.5)
    p.add_argument("--output-sigma-factor", type=float, default=0.1)
    p.add_argument("--mosse-plus-eta", action="store_true", help="use the (1 + eta) fractional weighting")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="cflab", description="Correlation-filter update-strategy lab")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    track = sub.add_parser("track", help="run one strategy on a sequence")
    _add_tracker_flags(track)
    track.add_argument("--strategy", required=True, choices=STRATEGIES)
    track.add_argument("--out", default="boxes.csv")
    track.add_argument("--report", default=None)
    track.add_argument("--dump-filters", default=None, metavar="DIR")

    compare = sub.add_parser("compare", help="run several strategies and tabulate per-frame traces")
    _add_tracker_flags(compare)
    compare.add_argument("--strategies", default=",".join(STRATEGIES))
    compare.add_argument("--out", required=True)

    sim = sub.add_parser("sim", help="scalar simulations")
    sim_sub = sim.add_subparsers(dest="sim_command", required=True, parser_class=_Parser)
    kern = sim_sub.add_parser("kernel", help="feature-first versus coefficient interpolation")
    kern.add_argument("--kernel", choices=("gaussian", "polynomial"), required=True)
    kern.add_argument("--x-init", type=float, default=2.0)
    kern.add_argument("--eta", type=float, default=0.025)
    kern.add_argument("--sigma", type=float, default=60.0)
    kern.add_argument("--poly-a", type=float, default=1.5)
    kern.add_argument("--poly-b", type=int, default=7)
    kern.add_argument("--y", type=float, default=1.0)
    kern.add_argument("--lambda", dest="lam", type=float, default=1e-4)
    kern.add_argument("--grid", default="-300:300:0.5", help="x_curr grid as min:max:step")
    kern.add_argument("--out", required=True)

    frac = sim_sub.add_parser("fractional", help="direct versus fractional ratio updates")
    frac.add_argument("--a-prev", type=float, default=1.0)
    frac.add_argument("--b-prev", type=float, default=2.0)
    frac.add_argument("--a-new", type=float, default=1.0)
    frac.add_argument("--b-new", default="1:3:0.01", help="B_new grid as min:max:step")
    frac.add_argument("--eta", type=float, default=0.025)
    frac.add_argument("--plus-eta", action="store_true")
    frac.add_argument("--out", required=True)

    synth = sub.add_parser("synth", help="generate a synthetic OTB-layout sequence")
    synth.add_argument("--motion", choices=("translate", "static"), default="translate")
    synth.add_argument("--step-px", type=float, default=2.0)
    synth.add_argument("--frames", type=int, default=50)
    synth.add_argument("--out", required=True)
    return parser


def _kernel_from(args) -> KernelSpec:
    if args.kernel == "gaussian":
        return KernelSpec.gaussian(args.kernel_sigma)
    if args.kernel == "polynomial":
        return KernelSpec.polynomial(args.poly_a, args.poly_b)
    return KernelSpec.linear()


def _tracker_config(args, strategy: str) -> TrackerConfig:
    return TrackerConfig(
        eta=args.eta,
        lam=args.lam,
        kernel=_kernel_from(args),
        padding=args.padding,
        output_sigma_factor=args.output_sigma_factor,
        strategy=strategy,
        mosse_plus_eta=args.mosse_plus_eta,
    )


def _cmd_track(args) -> None:
    cfg = _tracker_config(args, args.strategy)
    seq = load_sequence(args.sequence)
    run = run_tracking(seq, cfg, dump_dir=args.dump_filters)
    write_csv_text(args.out, boxes_csv(run.boxes, run.psrs))
    if args.report:
        write_csv_text(args.report, report_csv(run.report))
    log.info(
        "%s/%s: precision@20=%.3f auc=%.3f mean psr=%.2f",
        seq.name, cfg.strategy, run.report.precision_at_20, run.report.success_auc, run.report.mean_psr,
    )


def _cmd_compare(args) -> None:
    names = [s.strip() for s in args.strategies.split(",") if s.strip()]
    unknown = [s for s in names if s not in STRATEGIES]
    if unknown or not names:
        raise UsageError(f"unknown strategies {unknown}; choose from {', '.join(STRATEGIES)}")
    seq = load_sequence(args.sequence)
    table = compare_strategies(seq, [_tracker_config(args, s) for s in names])
    write_csv_text(args.out, table.to_csv())


def _cmd_sim(args) -> None:
    if args.sim_command == "kernel":
        kernel = KernelSpec.gaussian(args.sigma) if args.kernel == "gaussian" else KernelSpec.polynomial(
            args.poly_a, args.poly_b
        )
        cfg = KernelSimConfig(
            x_init=args.x_init, eta=args.eta, y=args.y, lam=args.lam, kernel=kernel, x_curr_grid=parse_grid(args.grid)
        )
        table = simulate_kernel_update(cfg)
    else:
        cfg = FractionalSimConfig(
            a_prev=args.a_prev,
            b_prev=args.b_prev,
            a_new=args.a_new,
            b_new_grid=parse_grid(args.b_new),
            eta=args.eta,
            plus_eta_variant=args.plus_eta,
        )
        table = simulate_fractional(cfg)
    write_csv_text(args.out, table.to_csv())


def _cmd_synth(args) -> None:
    synthesize_sequence(args.out, motion=args.motion, step_px=args.step_px, frames=args.frames)


COMMANDS = {"track": _cmd_track, "compare": _cmd_compare, "sim": _cmd_sim, "synth": _cmd_synth}


GRID_FLAGS = ("--grid", "--b-new")


def _join_grid_values(argv: list[str]) -> list[str]:
    # "--grid -300:300:0.5" would otherwise be read as an unknown option
    out, i = [], 0
    while i < len(argv):
        tok = argv[i]
        if tok in GRID_FLAGS and i + 1 < len(argv):
            out.append(f"{tok}={argv[i + 1]}")
            i += 2
            continue
        out.append(tok)
        i += 1
    return out


def main(argv=None) -> int:
    parser = build_parser()
    argv = _join_grid_values(list(sys.argv[1:] if argv is None else argv))
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return EXIT_OK if not exc.code else EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"cflab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except InvalidInputError as exc:
        print(f"cflab: invalid input: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as exc:
        print(f"cflab: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except NumericalConsistencyError as exc:
        print(f"cflab: numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except CflabError as exc:
        print(f"cflab: error: {exc}", file=sys.stderr)
        return EXIT_DATA
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
