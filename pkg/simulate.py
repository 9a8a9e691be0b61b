# simulate.py

import argparse
import sys
from typing import Any, Dict, List, Optional

import yaml

from core.context import build_run_config, load_profile, RunContext
from core.errors import ConfigError, FvegError
from core.log import console, set_quiet
from core.loop import SimulationLoop, run_convergence
from modules.scenarios import SCENARIOS


def _float_list(text: str) -> List[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _int_list(text: str) -> List[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _options(pairs: Optional[List[str]]) -> Optional[Dict[str, Any]]:
    if not pairs:
        return None
    options = {}
    for pair in pairs:
        key, sep, value = pair.partition("=")
        if not sep or not key:
            raise ConfigError(f"--option expects key=value, got {pair!r}")
        try:
            options[key.strip()] = yaml.safe_load(value)
        except yaml.YAMLError as e:
            raise ConfigError(f"cannot parse value of option {key!r}: {e}") from e
    return options


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="simulate", description="FVEG shallow water solver")
    verbs = parser.add_subparsers(dest="verb", required=True)

    def add_run_flags(p: argparse.ArgumentParser):
        p.add_argument("--scenario", required=True, help="scenario id (see list-scenarios)")
        p.add_argument("--config", default=None, help="profile YAML (default config/profiles.yaml)")
        p.add_argument("--nx", type=int)
        p.add_argument("--ny", type=int)
        p.add_argument("--g", type=float, help="gravity")
        p.add_argument("--mu", type=float, help="CFL number in (0, 1)")
        p.add_argument("--end", type=float, dest="end_time")
        p.add_argument("--snapshots", type=_float_list, dest="snapshot_times",
                       help="comma-separated snapshot times")
        p.add_argument("--output", dest="output_dir")
        p.add_argument("--format", dest="formats", action="append", choices=["txt", "npz"])
        p.add_argument("--eps-h", type=float, dest="eps_h")
        p.add_argument("--entropy-fix", dest="entropy_fix", action=argparse.BooleanOptionalAction,
                       default=None)
        p.add_argument("--order", choices=["first", "second"])
        p.add_argument("--option", action="append", dest="option_pairs", metavar="KEY=VALUE",
                       help="scenario option, repeatable")
        p.add_argument("--workers", type=int)
        p.add_argument("--chunk-size", type=int, dest="chunk_size")
        p.add_argument("--quiet", action="store_true")

    add_run_flags(verbs.add_parser("run", help="run one scenario"))
    conv = verbs.add_parser("convergence", help="errors and EOC over a list of grids")
    add_run_flags(conv)
    conv.add_argument("--grids", type=_int_list, help="comma-separated nx values")
    conv.add_argument("--periods", type=float, help="end time in oscillation periods")
    verbs.add_parser("list-scenarios", help="print the scenario ids")
    return parser


OVERRIDE_KEYS = ("nx", "ny", "g", "mu", "end_time", "snapshot_times", "output_dir", "formats",
                 "eps_h", "entropy_fix", "order", "workers", "chunk_size", "grids", "periods")


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)

    if args.verb == "list-scenarios":
        for name, builder in SCENARIOS.items():
            console.print(f"{name:20s} {builder().description}", markup=False)
        return 0

    set_quiet(args.quiet)
    try:
        profile = load_profile(args.config)
        overrides = {k: getattr(args, k, None) for k in OVERRIDE_KEYS}
        overrides["options"] = _options(args.option_pairs)
        config = build_run_config(args.scenario, profile, overrides)
        context = RunContext(config)
        if args.verb == "run":
            SimulationLoop(context).run()
        else:
            run_convergence(context)
    except FvegError as e:
        console.print(f"[error] {type(e).__name__}: {e}", markup=False)
        return e.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())
