"""Command-line pipeline driver.

Subcommands: predict (baseline relation maps from an image), embed
(relations to eigenvectors), decode (eigenvectors to rank map, boundary
map and segmentation), globalize (annotations to dense rank), bench
(figure/ground metrics) and synth (synthetic oracle scenes).

Exit codes are a stable scripting contract: 0 success, 1 usage, 2 I/O or
parse failure, 3 numerical failure. All commands are deterministic for a
fixed config and seed. The predictor here is a deliberately simple
non-learned stand-in: boundary strength from color contrast and a flat
"ambiguous" figural prior of 0.5, under which the embedding degrades
gracefully to pure grouping.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import asdict, dataclass, fields
from pathlib import Path

import numpy as np

from .affinity import AffinityParams, assemble
from .decoder import (
    RankMap,
    cut_hierarchy,
    fg_order,
    spectral_boundaries,
    transfer_fg,
    watershed_hierarchy,
)
from .eigensolver import ConvergenceError, SolverConfig, ZeroDegreeError, solve
from .fileio import (
    FileFormatError,
    load_image,
    read_aff1,
    read_eig1,
    read_own1,
    read_rnk1,
    read_seg1,
    write_aff1,
    write_eig1,
    write_image,
    write_own1,
    write_rnk1,
    write_seg1,
)
from .groundtruth import globalize
from .metrics import evaluate
from .stencil import GridDomain, RelationMap, default_stencil, pair_slices
from .synth import random_scene, render

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_IO = 2
EXIT_NUMERIC = 3

CONFIG_ENV = "AESEG_CONFIG"


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class PipelineConfig:
    """Flat, exhaustively-validated knobs for the whole pipeline."""

    sigma_b: float = 0.1
    sigma_fg: float = 0.05
    phi: float = math.pi / 4
    wedge_rescale: bool = True
    m: int = 16
    tol: float = 1e-8
    max_iter: int = 50000
    seed: int = 0
    lambda_floor: float = 1e-6
    cut_level: float = 0.0
    stencil_radii: tuple = (1, 4, 16)
    sigma_color: float = 0.1

    def affinity_params(self) -> AffinityParams:
        return AffinityParams(self.sigma_b, self.sigma_fg, self.phi, self.wedge_rescale)

    def solver_config(self) -> SolverConfig:
        return SolverConfig(self.m, self.tol, self.max_iter, self.seed)

    def stencil(self):
        return default_stencil(tuple(self.stencil_radii))


_FIELD_TYPES = {f.name: f.type for f in fields(PipelineConfig)}


def _coerce(key: str, value):
    if key == "wedge_rescale":
        if isinstance(value, bool):
            return value
        if isinstance(value, str) and value.lower() in ("true", "false"):
            return value.lower() == "true"
        raise ConfigError(f"config key {key!r} must be a boolean, got {value!r}")
    if key == "stencil_radii":
        if isinstance(value, str):
            value = value.split(",")
        try:
            radii = tuple(int(v) for v in value)
        except (TypeError, ValueError):
            raise ConfigError(f"config key {key!r} must be a list of ints") from None
        return radii
    if key in ("m", "max_iter", "seed"):
        try:
            if isinstance(value, bool) or int(value) != float(value):
                raise ValueError
        except (TypeError, ValueError):
            raise ConfigError(
                f"config key {key!r} must be an integer, got {value!r}"
            ) from None
        return int(value)
    try:
        return float(value)
    except (TypeError, ValueError):
        raise ConfigError(f"config key {key!r} must be a number, got {value!r}") from None


def load_config(path=None, overrides=None) -> PipelineConfig:
    """Defaults, then JSON config file, then explicit overrides.

    Unknown keys are rejected so typos cannot silently fall back to a
    default.
    """
    values: dict = {}
    if path is not None:
        try:
            raw = json.loads(Path(path).read_text())
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
        if not isinstance(raw, dict):
            raise ConfigError(f"config {path} must hold a JSON object")
        values.update(raw)
    for key, val in (overrides or {}).items():
        if val is not None:
            values[key] = val
    unknown = sorted(set(values) - set(_FIELD_TYPES))
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
    coerced = {k: _coerce(k, v) for k, v in values.items()}
    cfg = PipelineConfig(**coerced)
    try:
        cfg.affinity_params()
        cfg.solver_config()
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    return cfg


def baseline_relations(image: np.ndarray, stencil, sigma_color: float) -> RelationMap:
    """Non-learned stand-in predictor.

    b(p, q) = 1 - exp(-||color(p) - color(q)|| / sigma_color) and
    f = 0.5 everywhere: with no learned figural cue the honest prior is
    "ambiguous", leaving pure grouping behavior.
    """
    chan = image if image.ndim == 3 else image[:, :, None]
    h, w = chan.shape[:2]
    domain = GridDomain(h, w)
    k = len(stencil)
    b = np.zeros((k, h, w))
    f = np.full((k, h, w), 0.5)
    for i, off in enumerate(stencil.offsets):
        p_sl, q_sl = pair_slices(domain, off)
        dist = np.sqrt(((chan[p_sl] - chan[q_sl]) ** 2).sum(axis=-1))
        b[i][p_sl] = 1.0 - np.exp(-dist / sigma_color)
    return RelationMap(domain, stencil, b, f)


def cmd_predict(args, cfg: PipelineConfig) -> int:
    image = load_image(args.image)
    rel = baseline_relations(image, cfg.stencil(), cfg.sigma_color)
    write_aff1(args.out, rel)
    print(f"wrote {args.out}: {len(rel.stencil)} offsets over {rel.domain.height}x{rel.domain.width}")
    return EXIT_OK


def cmd_embed(args, cfg: PipelineConfig) -> int:
    rel = read_aff1(args.relations)
    w, d = assemble(rel, cfg.affinity_params())
    emb = solve(w, d, cfg.solver_config(), domain=rel.domain)
    write_eig1(args.out, emb)
    print(f"wrote {args.out}: m={emb.m}, worst residual {emb.residuals.max():.3e}")
    return EXIT_OK


def cmd_decode(args, cfg: PipelineConfig) -> int:
    emb = read_eig1(args.embedding)
    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)

    rank = fg_order(emb)
    write_rnk1(outdir / "rank.rnk1", rank)
    if emb.m < 2:
        print(
            "rank map written, but boundary/segmentation outputs need at "
            f"least 2 eigenvectors (got {emb.m})",
            file=sys.stderr,
        )
        return EXIT_USAGE

    bmap = spectral_boundaries(emb, lambda_floor=cfg.lambda_floor)
    hier = watershed_hierarchy(bmap)
    seg = cut_hierarchy(hier, cfg.cut_level)
    write_seg1(outdir / "regions.seg1", seg)

    region_rank = transfer_fg(rank, seg)
    write_rnk1(outdir / "region_rank.rnk1", RankMap(region_rank[seg.labels]))

    peak = bmap.strength.max()
    preview = bmap.strength / peak if peak > 0 else bmap.strength
    write_image(outdir / "boundary.pgm", preview)
    print(f"wrote {outdir}: {seg.region_count} regions at cut level {cfg.cut_level}")
    return EXIT_OK


def cmd_globalize(args, cfg: PipelineConfig) -> int:
    seg = read_seg1(args.segmentation)
    own = read_own1(args.ownership)
    rank = globalize(seg, own, cfg.affinity_params(), cfg.solver_config())
    write_rnk1(args.out, rank)
    spread = rank.theta.max() - rank.theta.min()
    print(f"wrote {args.out}: rank spread {spread:.4f}")
    return EXIT_OK


def cmd_bench(args, cfg: PipelineConfig) -> int:
    pred = read_rnk1(args.pred)
    gt = read_rnk1(args.gt)
    seg = read_seg1(args.segmentation)
    report = evaluate(pred, gt, seg)
    print(report.to_text())
    if args.json:
        Path(args.json).write_text(
            json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n"
        )
    return EXIT_OK


def cmd_synth(args, cfg: PipelineConfig) -> int:
    try:
        h, w = (int(v) for v in args.size.lower().split("x"))
    except ValueError:
        raise ConfigError(f"--size must look like 64x64, got {args.size!r}") from None
    spec = random_scene(GridDomain(h, w), args.shapes, cfg.seed)
    seg, rank, own = render(spec)
    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    write_seg1(outdir / "scene.seg1", seg)
    write_rnk1(outdir / "scene_rank.rnk1", rank)
    write_own1(outdir / "scene.own1", own)
    if args.preview:
        gray = (seg.labels + 1.0) / (seg.region_count + 1.0)
        write_image(outdir / "scene.pgm", gray)
    print(f"wrote {outdir}: {seg.region_count} regions, {len(spec.shapes)} shapes")
    return EXIT_OK


class _ArgumentError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _ArgumentError(message)


def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--config", help=f"JSON config file (or set ${CONFIG_ENV})")
    p.add_argument(
        "--print-config",
        action="store_true",
        help="print the effective config as JSON and exit",
    )
    for key in _FIELD_TYPES:
        flag = "--" + key.replace("_", "-")
        p.add_argument(flag, dest=f"cfg_{key}", default=None, metavar="V")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="aeseg", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("predict", help="baseline relation maps from a P5/P6 image")
    p.add_argument("image")
    p.add_argument("out", help="output AFF1 path")
    p.set_defaults(func=cmd_predict)
    _add_common(p)

    p = sub.add_parser("embed", help="relations to embedding eigenvectors")
    p.add_argument("relations", help="input AFF1 path")
    p.add_argument("out", help="output EIG1 path")
    p.set_defaults(func=cmd_embed)
    _add_common(p)

    p = sub.add_parser("decode", help="embedding to rank, boundaries, regions")
    p.add_argument("embedding", help="input EIG1 path")
    p.add_argument("outdir")
    p.set_defaults(func=cmd_decode)
    _add_common(p)

    p = sub.add_parser("globalize", help="annotations to a dense rank map")
    p.add_argument("segmentation", help="input SEG1 path")
    p.add_argument("ownership", help="input OWN1 path")
    p.add_argument("out", help="output RNK1 path")
    p.set_defaults(func=cmd_globalize)
    _add_common(p)

    p = sub.add_parser("bench", help="figure/ground accuracy of a prediction")
    p.add_argument("pred", help="predicted RNK1")
    p.add_argument("gt", help="ground-truth RNK1")
    p.add_argument("segmentation", help="common SEG1")
    p.add_argument("--json", help="also write the report as JSON")
    p.set_defaults(func=cmd_bench)
    _add_common(p)

    p = sub.add_parser("synth", help="generate a synthetic layered scene")
    p.add_argument("outdir")
    p.add_argument("--size", default="64x64", help="HxW, default 64x64")
    p.add_argument("--shapes", type=int, default=3)
    p.add_argument("--preview", action="store_true", help="also write scene.pgm")
    p.set_defaults(func=cmd_synth)
    _add_common(p)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _ArgumentError as exc:
        print(f"aeseg: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return 0 if exc.code in (0, None) else EXIT_USAGE

    try:
        overrides = {
            key: getattr(args, f"cfg_{key}") for key in _FIELD_TYPES
        }
        path = args.config or os.environ.get(CONFIG_ENV)
        cfg = load_config(path, overrides)
    except ConfigError as exc:
        print(f"aeseg: {exc}", file=sys.stderr)
        return EXIT_IO

    if args.print_config:
        print(json.dumps(asdict(cfg), indent=2, sort_keys=True, default=list))
        return EXIT_OK

    try:
        return args.func(args, cfg)
    except FileFormatError as exc:
        print(f"aeseg: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ZeroDegreeError, ConvergenceError) as exc:
        print(f"aeseg: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"aeseg: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ConfigError, ValueError) as exc:
        print(f"aeseg: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
