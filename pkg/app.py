#!/usr/bin/env python3
"""
Command line front end.

    rlmove build  --perm lf --alpha 4 --in text.rlbwt --out lf.mvst [--stats]
    rlmove lcp    --in text.rlbwt [--out lcp.txt] [--format text|binary]
    rlmove plcp   --in text.rlbwt [--out plcp.txt]
    rlmove verify --in lf.mvst [--rlbwt text.rlbwt --perm lf --full]
    rlmove stats  --in lf.mvst | text.rlbwt
    rlmove sweep  --in text.rlbwt [--alphas 2,4,8,16] [--csv | --kv]

Exit codes: 0 ok, 1 usage, 2 input format, 3 verification failure, 4 internal.
"""

import argparse
import logging
import os
import sys
from contextlib import contextmanager
from pathlib import Path

import numpy as np

from config import BINARY, FORMATS, FULL, PERMUTATIONS, QUICK, SWEEP_ALPHAS, TEXT, Config, settings
from errors import EXIT_INTERNAL, EXIT_OK, EXIT_USAGE, InputMismatchError, RlmoveError, VerificationError
from lcp import LcpStats, LcpWriter, irreducible_plcp, lcp_stream, write_plcp
from movequery import MAGIC as MOVE_MAGIC
from movequery import deserialize, locate, move_query, save, validate_move_structure
from report import balance_summary, format_key_values, format_sweep, structure_summary, sweep
from rlbwt import build_move_structure, read_rlbwt
from utils import stopwatch

logger = logging.getLogger(__name__)


class UsageParser(argparse.ArgumentParser):
    """ArgumentParser whose usage errors exit with status 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _alpha_list(text):
    try:
        return tuple(int(part) for part in text.split(",") if part.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got '{text}'") from None


def build_parser():
    parser = UsageParser(prog="rlmove", description="Balanced move structures and LCP from run-length BWTs")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress at INFO level")
    parser.add_argument("--debug", action="store_true", help="log every split at DEBUG level")
    commands = parser.add_subparsers(dest="subcommand", required=True, parser_class=UsageParser)

    def add_input(sub, help_text="RLBWT input file"):
        sub.add_argument("--in", dest="input_path", required=True, help=help_text)
        sub.add_argument("--input-format", dest="format", choices=FORMATS, default=None, help="RLBWT format")

    build = commands.add_parser("build", help="balance one permutation and write its move structure")
    add_input(build)
    build.add_argument("--perm", choices=PERMUTATIONS, default="lf")
    build.add_argument("--alpha", type=int, default=None)
    build.add_argument("--out", dest="output_path", required=True)
    build.add_argument("--stats", action="store_true", help="print balancing figures as key=value lines")

    lcp = commands.add_parser("lcp", help="stream the LCP array")
    add_input(lcp)
    lcp.add_argument("--out", dest="output_path", default=None)
    lcp.add_argument("--format", dest="output_format", choices=(TEXT, BINARY), default=TEXT)
    lcp.add_argument("--alpha", type=int, default=None)
    lcp.add_argument("--stats", action="store_true", help="print figures to stderr")

    plcp = commands.add_parser("plcp", help="write the irreducible PLCP values")
    add_input(plcp)
    plcp.add_argument("--out", dest="output_path", default=None)
    plcp.add_argument("--alpha", type=int, default=None)
    plcp.add_argument("--stats", action="store_true", help="print work counters to stderr")

    verify = commands.add_parser("verify", help="check a serialized move structure")
    verify.add_argument("--in", dest="input_path", required=True, help="MVST0001 file")
    verify.add_argument("--rlbwt", dest="rlbwt_path", default=None, help="source RLBWT for --full")
    verify.add_argument("--input-format", dest="format", choices=FORMATS, default=None)
    verify.add_argument("--perm", choices=PERMUTATIONS, default="lf")
    verify.add_argument("--full", action="store_true", help="rebuild from --rlbwt and compare queries")
    verify.add_argument("--samples", dest="verify_samples", type=int, default=None)
    verify.add_argument("--seed", type=int, default=None)

    stats = commands.add_parser("stats", help="summarise a move structure or an RLBWT")
    add_input(stats, "MVST0001 or RLBWT file")
    stats.add_argument("--alpha", type=int, default=None)

    sweep_cmd = commands.add_parser("sweep", help="balance LF and phi for several alphas")
    add_input(sweep_cmd)
    sweep_cmd.add_argument("--alphas", type=_alpha_list, default=None)
    style = sweep_cmd.add_mutually_exclusive_group()
    style.add_argument("--csv", action="store_true")
    style.add_argument("--kv", action="store_true")
    return parser


def make_config(args):
    """Resolve parsed arguments against the process-wide settings."""
    values = vars(args)

    def pick(name, default):
        value = values.get(name)
        return default if value is None else value

    return Config(
        subcommand=args.subcommand,
        input_path=values.get("input_path"),
        output_path=values.get("output_path"),
        rlbwt_path=values.get("rlbwt_path"),
        alpha=pick("alpha", settings.alpha),
        format=pick("format", settings.format),
        output_format=pick("output_format", TEXT),
        perm=pick("perm", "lf"),
        stats=bool(values.get("stats")),
        verify_depth=FULL if values.get("full") else QUICK,
        verify_samples=pick("verify_samples", settings.verify_samples),
        seed=pick("seed", settings.seed),
        alphas=pick("alphas", SWEEP_ALPHAS),
        csv=bool(values.get("csv")),
        kv=bool(values.get("kv")),
    )


def configure_logging(args):
    if args.debug:
        level = logging.DEBUG
    elif args.verbose:
        level = logging.INFO
    else:
        level = getattr(logging, settings.log_level, logging.WARNING)
    logging.basicConfig(stream=sys.stderr, level=level, format="%(levelname)s %(name)s: %(message)s")


@contextmanager
def _output(path):
    if path is None:
        sys.stdout.flush()
        yield sys.stdout.buffer
        sys.stdout.buffer.flush()
    else:
        # written beside the target, moved into place only once complete
        target = Path(path)
        partial = target.with_name(f".{target.name}.partial")
        try:
            with open(partial, "wb") as stream:
                yield stream
        except BaseException:
            partial.unlink(missing_ok=True)
            raise
        os.replace(partial, target)


def cmd_build(config):
    rlbwt = read_rlbwt(config.input_path, config.format)
    with stopwatch() as timing:
        ms, pair = build_move_structure(rlbwt, config.perm, config.alpha)
    save(ms, config.output_path)
    logger.info(f"Wrote {config.perm} move structure with {ms.r_prime} intervals to {config.output_path}")
    if config.stats:
        values = {"perm": config.perm, "alpha": config.alpha, "n": rlbwt.n}
        values.update(balance_summary(pair, timing["seconds"]))
        print(format_key_values(values), end="")
    return EXIT_OK


def cmd_lcp(config):
    rlbwt = read_rlbwt(config.input_path, config.format)
    with _output(config.output_path) as stream:
        writer = LcpWriter(stream, rlbwt.n, binary=config.output_format == BINARY)
        with stopwatch() as timing:
            count = lcp_stream(rlbwt, writer, config.alpha)
    if config.stats:
        values = {"n": rlbwt.n, "r": rlbwt.r, "values": count, "seconds": round(timing["seconds"], 6)}
        print(format_key_values(values), end="", file=sys.stderr)
    return EXIT_OK


def cmd_plcp(config):
    rlbwt = read_rlbwt(config.input_path, config.format)
    stats = LcpStats()
    pp = irreducible_plcp(rlbwt, config.alpha, stats)
    with _output(config.output_path) as stream:
        write_plcp(pp, stream)
    if config.stats:
        print(format_key_values({"n": rlbwt.n, "r": rlbwt.r, **stats.as_dict()}), end="", file=sys.stderr)
    return EXIT_OK


def _sample_positions(n, samples, seed):
    if n <= samples:
        return np.arange(n, dtype=np.int64)
    rng = np.random.default_rng(seed)
    return np.sort(rng.choice(n, size=samples, replace=False))


def cmd_verify(config):
    ms = deserialize(Path(config.input_path).read_bytes(), validate=False)
    violation = validate_move_structure(ms)
    if violation is not None:
        print(format_key_values({"status": "fail", "violation": violation.message}), end="")
        raise VerificationError(f"{violation.field}: {violation.message}")

    values = {"status": "ok", **structure_summary(ms)}
    if config.verify_depth == FULL:
        if config.rlbwt_path is None:
            print("Error: verify --full needs --rlbwt", file=sys.stderr)
            return EXIT_USAGE
        rlbwt = read_rlbwt(config.rlbwt_path, config.format)
        if rlbwt.n != ms.n:
            raise InputMismatchError(f"structure has n={ms.n}, RLBWT has n={rlbwt.n}")
        reference, _ = build_move_structure(rlbwt, config.perm, ms.alpha)
        positions = _sample_positions(ms.n, config.verify_samples, config.seed)
        mismatches = 0
        for i in positions.tolist():
            got, _ = move_query(ms, i, locate(ms, i))
            expected, _ = move_query(reference, i, locate(reference, i))
            if got != expected:
                mismatches += 1
                logger.debug(f"Mismatch at {i}: structure gives {got}, rebuild gives {expected}")
        values.update({"checked": len(positions), "mismatches": mismatches})
        if mismatches:
            values["status"] = "fail"
            print(format_key_values(values), end="")
            raise VerificationError(f"{mismatches} of {len(positions)} sampled queries disagree with the rebuild")
    print(format_key_values(values), end="")
    return EXIT_OK


def cmd_stats(config):
    data = Path(config.input_path).read_bytes()
    if data.startswith(MOVE_MAGIC):
        values = structure_summary(deserialize(data))
    else:
        rlbwt = read_rlbwt(data, config.format)
        lf, lf_pair = build_move_structure(rlbwt, "lf", config.alpha)
        phi, phi_pair = build_move_structure(rlbwt, "phi", config.alpha)
        values = {
            "n": rlbwt.n,
            "r": rlbwt.r,
            "sigma": rlbwt.sigma,
            "alpha": config.alpha,
            "lf_r_prime": lf.r_prime,
            "lf_insertions": lf_pair.insertion_count,
            "phi_r_prime": phi.r_prime,
            "phi_insertions": phi_pair.insertion_count,
        }
    print(format_key_values(values), end="")
    return EXIT_OK


def cmd_sweep(config):
    rlbwt = read_rlbwt(config.input_path, config.format)
    df = sweep(rlbwt, config.alphas)
    style = "csv" if config.csv else "kv" if config.kv else "table"
    print(format_sweep(df, style), end="")
    return EXIT_OK


COMMANDS = {
    "build": cmd_build,
    "lcp": cmd_lcp,
    "plcp": cmd_plcp,
    "verify": cmd_verify,
    "stats": cmd_stats,
    "sweep": cmd_sweep,
}


def main(argv=None):
    """
    Run one subcommand.

    Args:
        argv (list, optional): Arguments without the program name

    Returns:
        int: Exit status
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if not e.code else EXIT_USAGE
    configure_logging(args)

    try:
        config = make_config(args)
        return COMMANDS[config.subcommand](config)
    except RlmoveError as e:
        print(f"Error: {str(e)}", file=sys.stderr)
        return e.exit_code
    except OSError as e:
        print(f"Error: {str(e)}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as e:
        logger.exception(f"Unexpected failure in {args.subcommand}")
        print(f"Error: internal failure: {str(e)}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
