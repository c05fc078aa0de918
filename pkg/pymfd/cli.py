# -*- coding: utf-8 -*-
# Copyright (c) 2026-present pymfd contributors
#
# Permission is hereby granted, free of charge, to any person obtaining a copy
# of this software and associated documentation files (the "Software"), to deal
# in the Software without restriction, including without limitation the rights
# to use, copy, modify, merge, publish, distribute, sublicense, and/or sell
# copies of the Software, and to permit persons to whom the Software is
# furnished to do so, subject to the following conditions:
#
# The above copyright notice and this permission notice shall be included in all
# copies or substantial portions of the Software.
#
# THE SOFTWARE IS PROVIDED "AS IS", WITHOUT WARRANTY OF ANY KIND, EXPRESS OR
# IMPLIED, INCLUDING BUT NOT LIMITED TO THE WARRANTIES OF MERCHANTABILITY,
# FITNESS FOR A PARTICULAR PURPOSE AND NONINFRINGEMENT. IN NO EVENT SHALL THE
# AUTHORS OR COPYRIGHT HOLDERS BE LIABLE FOR ANY CLAIM, DAMAGES OR OTHER
# LIABILITY, WHETHER IN AN ACTION OF CONTRACT, TORT OR OTHERWISE, ARISING FROM,
# OUT OF OR IN CONNECTION WITH THE SOFTWARE OR THE USE OR OTHER DEALINGS IN THE
# SOFTWARE.
"""The ``pymfd`` command line."""
from __future__ import annotations

import argparse
import logging
import os
import sys
import typing as t

import numpy as np

from pymfd import __version__
from pymfd import arch
from pymfd import config as config_
from pymfd import errors
from pymfd import moments
from pymfd import params
from pymfd import pipeline
from pymfd import snapshot
from pymfd import spatial

__all__ = ["build_parser", "main"]

_LOGGER = logging.getLogger(__name__)

LOG_LEVEL_ENV = "PYMFD_LOG_LEVEL"

# generate flags that map one-to-one onto config keys
_GENERATE_FLAGS = (
    ("snapshot", "Input CMD-SNAP snapshot; a synthetic snapshot is generated when omitted."),
    ("synthetic_seed", "Seed of the synthetic snapshot."),
    ("synthetic_box", "Box size of the synthetic snapshot in h^-1 Mpc."),
    ("fields", "Comma separated field prefixes, or 'default' for every available field."),
    ("output", "Output directory."),
    ("grid_sizes", "Comma separated 3D grid sizes."),
    ("map_size", "2D map size."),
    ("slices", "'default' or comma separated axis:offset:thickness slabs."),
    ("kernel2d", "Projected kernel: uniform_disk or projected_sphere."),
    ("tracers", "Tracers per projected kernel."),
    ("neighbours", "Neighbour rank defining the smoothing radius."),
    ("seed", "Seed of the latin-hypercube label draw."),
    ("threads", "Worker threads (overridden by CMD_THREADS)."),
    ("suite", "Label suite: IllustrisTNG, SIMBA or N-body."),
    ("params", "Comma separated parameter values instead of a random draw."),
)


class _ArgumentParser(argparse.ArgumentParser):
    def error(self, message: str) -> t.NoReturn:
        raise errors.UsageError(f"{self.prog}: {message}")


def _comma_floats(text: str) -> t.Tuple[float, ...]:
    try:
        return tuple(float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma separated numbers, got {text!r}") from None


def _comma_ints(text: str) -> t.Tuple[int, ...]:
    try:
        return tuple(int(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma separated integers, got {text!r}") from None


def cmd_generate(args: argparse.Namespace) -> int:
    file_settings = config_.load_config(args.config) if args.config else {}
    flags = {key: getattr(args, key) for key, _ in _GENERATE_FLAGS if getattr(args, key) is not None}
    for assignment in args.set or []:
        key, sep, value = assignment.partition("=")
        if not sep:
            raise errors.UsageError(f"--set expects KEY=VALUE, got {assignment!r}")
        flags[key.strip()] = value.strip()
    flag_settings = config_.parse_assignments(flags)
    if args.bulk_velocity is not None:
        flag_settings["bulk_velocity"] = args.bulk_velocity
    if args.deterministic is not None:
        flag_settings["deterministic"] = args.deterministic

    manifest = pipeline.cmd_generate(config_.resolve(file_settings, flag_settings))
    print(os.path.join(manifest.output, pipeline.MANIFEST_NAME))
    return 0


def cmd_render(args: argparse.Namespace) -> int:
    height, width = pipeline.cmd_render(args.file, args.out, args.record, args.axis, args.voxel_start, args.voxel_count)
    print(f"{args.out}: {width}x{height}")
    return 0


def cmd_info(args: argparse.Namespace) -> int:
    print(pipeline.cmd_info(args.file))
    return 0


def cmd_synth(args: argparse.Namespace) -> int:
    try:
        snap = snapshot.gen_synthetic(
            args.seed,
            args.box,
            args.gas,
            args.dm,
            args.star,
            args.clumps,
            n_bh=args.bh,
            redshift=args.redshift,
            with_magnetic=args.magnetic,
        )
    except ValueError as ex:
        raise errors.UsageError(str(ex)) from None
    snapshot.write_snapshot(snap.header, snap.species, args.out)
    _LOGGER.info("wrote %s", args.out)
    return 0


def cmd_radii(args: argparse.Namespace) -> int:
    try:
        kinds = [snapshot.Kind.from_tag(tag) for tag in args.species.split(",")] if args.species else None
    except ValueError as ex:
        raise errors.UsageError(str(ex)) from None
    snap = snapshot.read_snapshot(args.snapshot)

    lines = ["# species index radius"]
    for particle_set in snap.species:
        if kinds is not None and particle_set.kind not in kinds:
            continue
        radii = spatial.smoothing_radii(particle_set, snap.header.box_size, args.k)
        lines.extend(f"{particle_set.kind.tag} {i} {r!r}" for i, r in enumerate(radii.radii.tolist()))
        if particle_set.count:
            _LOGGER.info(
                "%s: %d radii, median %.6g h^-1 Mpc", particle_set.kind.tag, particle_set.count, np.median(radii.radii)
            )
    _emit("\n".join(lines) + "\n", args.out)
    return 0


def cmd_sample_params(args: argparse.Namespace) -> int:
    try:
        vectors = params.sample_lhs(args.n, args.seed, params.Suite.from_tag(args.suite))
    except ValueError as ex:
        raise errors.UsageError(str(ex)) from None
    params.write_labels(args.out, vectors)
    _LOGGER.info("wrote %d labels to %s", len(vectors), args.out)
    return 0


def _read_group_ids(path: str) -> t.List[str]:
    try:
        with open(path, encoding="utf-8") as fp:
            lines = fp.read().split("\n")
    except OSError as ex:
        raise errors.IoFailure(f"Could not read group ids {path!r}: {ex}") from ex
    return [line.split("#", 1)[0].strip() for line in lines if line.split("#", 1)[0].strip()]


def cmd_split(args: argparse.Namespace) -> int:
    if args.file is not None:
        group_ids: t.Sequence[t.Any] = _read_group_ids(args.file)
    elif args.groups is not None:
        group_ids = np.repeat(np.arange(args.groups), args.per_group).tolist()
    else:
        raise errors.UsageError("split needs a group id file or --groups")

    fractions = args.fractions
    if len(fractions) != 3:
        raise errors.UsageError("--fractions takes three values: train,validation,test")
    try:
        splits = moments.split_by_simulation(group_ids, (fractions[0], fractions[1], fractions[2]), args.seed)
    except ValueError as ex:
        raise errors.UsageError(str(ex)) from None

    names = ("train", "validation", "test")
    for name, indices in zip(names, splits):
        print(f"{name}: {len(indices)} items")
    if args.out:
        rows = sorted((int(i), name) for name, indices in zip(names, splits) for i in indices)
        _emit("".join(f"{i} {name}\n" for i, name in rows), args.out)
    return 0


def cmd_loss_eval(args: argparse.Namespace) -> int:
    batch = moments.read_predictions(args.file)
    print(f"batch: {batch.batch_size} x {batch.n_params}")
    print(f"loss (log): {moments.loss_moments_log(batch, args.epsilon)!r}")
    print(f"loss (sum): {moments.loss_moments_sum(batch)!r}")
    return 0


def cmd_check_arch(args: argparse.Namespace) -> int:
    if args.file is None:
        network = arch.bundled_architecture()
    else:
        try:
            with open(args.file, encoding="utf-8") as fp:
                text = fp.read()
        except OSError as ex:
            raise errors.IoFailure(f"Could not read architecture {args.file!r}: {ex}") from ex
        network = arch.parse_architecture(text, args.file)

    if len(args.input) != 3:
        raise errors.UsageError("--input takes C,height,width")
    shapes = arch.propagate_shapes(network, (args.input[0], args.input[1], args.input[2]), args.width)
    for layer, shape in zip(network.layers, shapes):
        print(f"{str(layer):<24} -> {shape}")
    return 0


def _emit(text: str, out: t.Optional[str]) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    try:
        with open(out, "w", encoding="utf-8", newline="\n") as fp:
            fp.write(text)
    except OSError as ex:
        raise errors.IoFailure(f"Could not write {out!r}: {ex}") from ex


def build_parser() -> argparse.ArgumentParser:
    parser = _ArgumentParser(prog="pymfd", description="Deposit particle snapshots into multifield maps and grids.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument(
        "--log-level",
        default=os.environ.get(LOG_LEVEL_ENV, "INFO"),
        help=f"Logging level (default: ${LOG_LEVEL_ENV} or INFO).",
    )
    commands = parser.add_subparsers(dest="command", required=True, parser_class=_ArgumentParser)

    generate = commands.add_parser("generate", help="Generate grids, maps, labels and a manifest.")
    generate.add_argument("--config", help="Config file of key = value lines.")
    for key, help_text in _GENERATE_FLAGS:
        generate.add_argument(f"--{key.replace('_', '-')}", dest=key, help=help_text)
    generate.add_argument("--set", action="append", metavar="KEY=VALUE", help="Set any config key; repeatable.")
    generate.add_argument("--bulk-velocity", action=argparse.BooleanOptionalAction, default=None)
    generate.add_argument("--deterministic", action=argparse.BooleanOptionalAction, default=None)
    generate.set_defaults(handler=cmd_generate)

    render = commands.add_parser("render", help="Dump one record as a grayscale PGM image.")
    render.add_argument("file")
    render.add_argument("--out", "-o", required=True)
    render.add_argument("--record", type=int, default=0)
    render.add_argument("--axis", choices=("x", "y", "z"), default="z")
    render.add_argument("--voxel-start", type=int, help="First voxel of the slab (3D inputs).")
    render.add_argument("--voxel-count", type=int, default=1)
    render.set_defaults(handler=cmd_render)

    info = commands.add_parser("info", help="Summarise a CMD-GRID file.")
    info.add_argument("file")
    info.set_defaults(handler=cmd_info)

    synth = commands.add_parser("synth", help="Write a synthetic CMD-SNAP snapshot.")
    synth.add_argument("--out", "-o", required=True)
    synth.add_argument("--seed", type=int, default=0)
    synth.add_argument("--box", type=float, default=25.0)
    synth.add_argument("--gas", type=int, default=20000)
    synth.add_argument("--dm", type=int, default=20000)
    synth.add_argument("--star", type=int, default=2000)
    synth.add_argument("--bh", type=int, default=0)
    synth.add_argument("--clumps", type=int, default=16)
    synth.add_argument("--redshift", type=float, default=0.0)
    synth.add_argument("--magnetic", action=argparse.BooleanOptionalAction, default=True)
    synth.set_defaults(handler=cmd_synth)

    radii = commands.add_parser("radii", help="Dump the smoothing radii of a snapshot.")
    radii.add_argument("snapshot")
    radii.add_argument("--species", help="Comma separated species tags (default: all).")
    radii.add_argument("-k", type=int, default=spatial.DEFAULT_NEIGHBOURS)
    radii.add_argument("--out", "-o")
    radii.set_defaults(handler=cmd_radii)

    sample = commands.add_parser("sample-params", help="Write a latin-hypercube label file.")
    sample.add_argument("--n", type=int, required=True)
    sample.add_argument("--seed", type=int, default=0)
    sample.add_argument("--suite", default=params.Suite.ILLUSTRIS_TNG.value)
    sample.add_argument("--out", "-o", required=True)
    sample.set_defaults(handler=cmd_sample_params)

    split = commands.add_parser("split", help="Split items into train/validation/test by group.")
    split.add_argument("file", nargs="?", help="One group id per line.")
    split.add_argument("--groups", type=int, help="Number of groups when no file is given.")
    split.add_argument("--per-group", type=int, default=15)
    split.add_argument("--fractions", type=_comma_floats, default=moments.DEFAULT_FRACTIONS)
    split.add_argument("--seed", type=int, default=0)
    split.add_argument("--out", "-o", help="Write '<index> <split>' lines here.")
    split.set_defaults(handler=cmd_split)

    loss = commands.add_parser("loss-eval", help="Evaluate both moment losses on a prediction table.")
    loss.add_argument("file")
    loss.add_argument("--epsilon", type=float, default=moments.DEFAULT_EPSILON)
    loss.set_defaults(handler=cmd_loss_eval)

    check = commands.add_parser("check-arch", help="Shape-check an architecture file.")
    check.add_argument("file", nargs="?", help="Architecture file (default: the bundled network).")
    check.add_argument("--input", type=_comma_ints, default=(1, 256, 256), help="C,height,width")
    check.add_argument("--width", type=int, help="Value of H (default: symbolic).")
    check.set_defaults(handler=cmd_check_arch)

    return parser


def main(argv: t.Optional[t.Sequence[str]] = None) -> int:
    """Run the command line and return its exit code: 0 ok, 1 usage, 2 bad data, 3 internal failure."""
    try:
        args = build_parser().parse_args(argv)
    except errors.UsageError as ex:
        sys.stderr.write(f"{ex}\n")
        return ex.exit_code

    level = logging.getLevelName(str(args.log_level).upper())
    if not isinstance(level, int):
        sys.stderr.write(f"pymfd: unknown log level {args.log_level!r}\n")
        return errors.UsageError.exit_code
    logging.basicConfig(
        level=level,
        format="%(asctime)s %(levelname)-7s %(name)s: %(message)s",
    )
    try:
        return int(args.handler(args))
    except errors.PymfdError as ex:
        _LOGGER.error("%s", ex)
        return ex.exit_code
    except Exception:
        _LOGGER.exception("internal error")
        return 3
