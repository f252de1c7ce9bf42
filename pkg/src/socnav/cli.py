"""``socnav`` command line: gen-data, train, compare, voxelize."""

from __future__ import annotations

import argparse
import logging
import sys

from . import experiment
from .errors import (
    EpisodeFormatError,
    EpisodeValidationError,
    InputError,
    MissingPrerequisite,
    NonFiniteLoss,
)
from .network import MODALITIES

EXIT_OK, EXIT_INVALID, EXIT_MISSING, EXIT_NUMERIC = 0, 2, 3, 4

log = logging.getLogger("socnav")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="socnav", description="Multimodal behavior-cloning navigation experiments.")
    p.add_argument("command", choices=["gen-data", "train", "compare", "voxelize"])
    p.add_argument("--spec", help="experiment YAML (or builtin:<name>); for voxelize, optional grid source")
    p.add_argument("--variant", choices=MODALITIES, help="train only this variant (default: all in the spec)")
    p.add_argument("--out", help="output directory (default: the spec's `out`, else runs/<name>)")
    p.add_argument("--force", action="store_true", help="regenerate into a non-empty output directory")
    p.add_argument("--points", help="voxelize: points file (.npy or raw float32 xyz)")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def run(args) -> int:
    if args.command == "voxelize":
        if not args.points:
            raise InputError("voxelize needs --points <file>")
        grid = experiment.load_spec(args.spec).grid if args.spec else experiment.GridSpec()
        n = experiment.cmd_voxelize(args.points, args.out or ".", grid)
        print(n)
        return EXIT_OK

    if not args.spec:
        raise InputError(f"{args.command} needs --spec <file>")
    spec = experiment.load_spec(args.spec)
    out = args.out or experiment.default_out(spec)
    if args.command == "gen-data":
        m = experiment.cmd_gen_data(spec, out, force=args.force)
        print(f"wrote {sum(len(v) for v in m['splits'].values())} episodes to {out}")
    elif args.command == "train":
        res = experiment.cmd_train(spec, out, args.variant)
        for (variant, seed), hist in res.items():
            final = [r for r in hist if r.split == "test" and r.scenario == "all"][-1]
            print(f"{variant} seed={seed} test_total={final.total:.6f}")
    else:
        table = experiment.cmd_compare(spec, out)
        for r in table:
            if r["scenario"] == "all":
                print(f"{r['method']:<18} total {r['total_mean']:.4f} +- {r['total_std']:.4f} (median {r['total_median']:.4f})")
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        return run(args)
    except MissingPrerequisite as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_MISSING
    except NonFiniteLoss as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (InputError, EpisodeFormatError, EpisodeValidationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
