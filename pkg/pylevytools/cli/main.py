import argparse
import logging
import sys

from pylevytools import logger
from pylevytools.cli.config import PipelineConfig, describe_defaults
from pylevytools.cli.pipeline import run_pipeline, scan, STAGES
from pylevytools.cli.validate import validate
from pylevytools.core.exceptions import PyLevyToolsException
from pylevytools.tools.misc import str_to_list, float_list

COMMAND_STAGES = {
    "pipeline": None,
    "spectrum": ["density", "spectrum"],
    "chi2": ["chi2"],
    "sample": ["sample"],
}


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=str, default="",
                        help="INI configuration or run.json manifest (default: built-in defaults).")
    common.add_argument("--out", type=str, default="", help="Output directory (default: [output] dir).")
    common.add_argument("--seed", type=int, default=None, help="Sampler seed, overrides [sampler] seed.")
    common.add_argument("--stages", type=str, default="", help="Comma separated subset of " + ",".join(STAGES) + ".")
    common.add_argument("--quiet", action="store_true", help="Log warnings and errors only.")

    ap = argparse.ArgumentParser(
        prog="pylevytools",
        description="Infinitely divisible ground states: density, potential, spectrum and chi2 diagnostics.",
        epilog="Configuration defaults:\n" + describe_defaults(),
        formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = ap.add_subparsers(dest="command", required=True)
    sub.add_parser("pipeline", parents=[common], help="Run all stages (sample only when [sampler] enabled).")
    sub.add_parser("spectrum", parents=[common], help="Density, potential and spectrum.")
    sub.add_parser("chi2", parents=[common], help="Everything up to the chi2 report.")
    sub.add_parser("sample", parents=[common], help="Monte Carlo sampling of the ground state diffusion.")
    v = sub.add_parser("validate", parents=[common], help="Cross-validation against closed forms.")
    v.add_argument("--sampler", action="store_true", help="Include the Monte Carlo checks.")
    v.add_argument("--quick", action="store_true", help="Skip the alpha family pipelines, fewer paths.")
    v.add_argument("--perturb-q", action="store_true", help="Inject a parity forbidden matrix element.")
    s = sub.add_parser("scan", parents=[common], help="chi2_small / chi2_large over a list of alpha.")
    s.add_argument("--alphas", type=str, default="2,2.25,2.5,2.75")
    return ap


def load_config(path):
    if not path:
        return PipelineConfig()
    if str(path).endswith(".json"):
        return PipelineConfig.from_manifest(path)
    return PipelineConfig.from_file(path)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.quiet:
        logger.setLevel(logging.WARNING)
    try:
        if args.command == "validate":
            status, _ = validate(sampler=args.sampler, perturb_q=args.perturb_q, quick=args.quick,
                                 seed=12345 if args.seed is None else args.seed)
            return status
        config = load_config(args.config)
        if args.command == "scan":
            scan(config, float_list(args.alphas), out_dir=args.out or None)
            return 0
        if args.command == "sample":
            config = config.with_values("sampler", enabled=True)
        stages = str_to_list(args.stages) or COMMAND_STAGES[args.command]
        return run_pipeline(config, out_dir=args.out or None, stages=stages, seed=args.seed)
    except PyLevyToolsException as e:
        logger.error(f"{type(e).__name__}: {e}")
        return 2


if __name__ == "__main__":
    sys.exit(main())
