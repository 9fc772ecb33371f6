"""Command-line front end: ``slickseg {segment,synth,eval,sweep}``.

Exit codes: 0 success (segment: converged), 2 segment stopped at
``max_iters`` without converging, 1 any error.
"""
from __future__ import annotations

import argparse
import configparser
import csv
import io
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import pgm
from .config import ConfigError, config_from_mapping, dump_config, load_config
from .levelset import parse_geometry
from .metrics import accuracy, batch_stats, confusion, precision
from .models import make_model
from .pipeline import EvolutionError, SegmentationConfig, run
from .synth import SceneSpec, generate, parse_shape

log = logging.getLogger("slickseg")

EXIT_OK, EXIT_ERROR, EXIT_MAX_ITERS = 0, 1, 2
TRACE_HEADER = ("iter", "fitting", "contour", "distance", "total")
EVAL_HEADER = ("name", "accuracy", "precision", "tp", "fp", "tn", "fn", "accuracy_sd", "precision_sd")
# intensities are stored as 16-bit counts of 1/QUANT_SCALE
QUANT_SCALE = 1000.0


class CliError(Exception):
    """Error reported to the user as a one-line message and exit code 1."""


def _num(x: float) -> str:
    return repr(float(x))


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


class OutputDir:
    """Output directory that refuses to overwrite files unless forced."""

    def __init__(self, path, force: bool):
        self.path = Path(path)
        self.force = force
        self.path.mkdir(parents=True, exist_ok=True)

    def claim(self, *names: str) -> list[Path]:
        paths = [self.path / n for n in names]
        existing = [str(p) for p in paths if p.exists()]
        if existing and not self.force:
            raise CliError(f"refusing to overwrite {', '.join(existing)} (use --force)")
        return paths

    def write_text(self, name: str, text: str) -> Path:
        (path,) = self.claim(name)
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        return path


# -- configuration -------------------------------------------------------------

def _base_config(args) -> SegmentationConfig:
    cfg = SegmentationConfig()
    if args.config:
        try:
            cfg = load_config(args.config, cfg)
        except OSError as exc:
            raise CliError(f"cannot read config {args.config}: {exc.strerror}") from None
    overrides = {}
    if getattr(args, "model", None):
        overrides["model"] = args.model
    if getattr(args, "init_rect", None):
        overrides["init"] = "rect:" + args.init_rect
    if getattr(args, "init_circle", None):
        overrides["init"] = "circle:" + args.init_circle
    return config_from_mapping(overrides, cfg)


def _load_image(path) -> np.ndarray:
    try:
        return pgm.to_field(pgm.read_pgm(path))
    except FileNotFoundError:
        raise CliError(f"image not found: {path}") from None
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc.strerror}") from None


def _map(fn, items, jobs: int):
    if jobs <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


# -- segment -------------------------------------------------------------------

def _segment_one(job):
    path, cfg = job
    image = _load_image(path)
    try:
        return path, run(image, cfg), image
    except EvolutionError as exc:
        raise CliError(f"{path}: {exc}") from None


def _summary_text(path, result) -> str:
    e = result.final_energy
    pairs = [
        ("image", str(path)),
        ("converged", str(result.converged).lower()),
        ("iterations_used", str(result.iterations_used)),
        ("final_fitting", _num(e.fitting)),
        ("final_contour", _num(e.contour)),
        ("final_distance", _num(e.distance)),
        ("final_total", _num(e.total)),
        ("region_mean_outside", _num(result.region_means[0])),
        ("region_mean_inside", _num(result.region_means[1])),
        ("oil_sign", str(result.oil_sign)),
        ("single_region", str(result.single_region).lower()),
        ("oil_pixels", str(int(result.oil_mask.sum()))),
        ("contour_pixels", str(len(result.contour))),
    ]
    return "".join(f"{k}={v}\n" for k, v in pairs)


def cmd_segment(args) -> int:
    cfg = _base_config(args)
    out = OutputDir(args.out, args.force)
    stems = [Path(p).stem for p in args.images]
    if len(set(stems)) != len(stems):
        raise CliError("input images must have distinct file names")
    for stem in stems:
        out.claim(f"{stem}_mask.pgm", f"{stem}_overlay.ppm", f"{stem}_trace.csv",
                  f"{stem}_summary.txt")
    out.write_text("effective_config.txt", dump_config(cfg))

    code = EXIT_OK
    for path, result, image in _map(_segment_one, [(p, cfg) for p in args.images], args.jobs):
        stem = Path(path).stem
        pgm.write_mask(result.oil_mask, out.path / f"{stem}_mask.pgm")
        pgm.write_overlay(image, result.contour, out.path / f"{stem}_overlay.ppm")
        rows = [(i, *(_num(v) for v in e.as_row())) for i, e in enumerate(result.energy_trace)]
        out.write_text(f"{stem}_trace.csv", _csv_text(TRACE_HEADER, rows))
        out.write_text(f"{stem}_summary.txt", _summary_text(path, result))
        if not result.converged:
            log.warning("%s: no convergence within %d iterations", path, cfg.max_iters)
            code = EXIT_MAX_ITERS
    return code


# -- synth ---------------------------------------------------------------------

def _scene_from_section(name: str, sec, index: int, base_seed: int) -> SceneSpec:
    known = {"width", "height", "shape", "background_sigma", "oil_sigma", "model", "ks",
             "upsilon", "kappa", "seed"}
    unknown = set(sec) - known
    if unknown:
        raise CliError(f"scene [{name}]: unknown keys {sorted(unknown)}")
    try:
        model = make_model(sec.get("model", "exp"), ks=float(sec.get("ks", 1.0)),
                           upsilon=float(sec.get("upsilon", 1.0)),
                           kappa=float(sec.get("kappa", 1.0)))
        spec = SceneSpec(
            width=int(sec.get("width", 128)),
            height=int(sec.get("height", 128)),
            oil_shape=parse_shape(sec.get("shape", "circle:64,64,30")),
            background_sigma=float(sec.get("background_sigma", 1.0)),
            oil_sigma=float(sec.get("oil_sigma", 0.2)),
            model=model,
            seed=int(sec.get("seed", base_seed + index)),
        )
        spec.validate()
    except ValueError as exc:
        raise CliError(f"scene [{name}]: {exc}") from None
    return spec


def quantize(image) -> pgm.GrayImage:
    """Store intensities as 16-bit counts of ``1/QUANT_SCALE``, saturating at 65535."""
    q = np.rint(np.asarray(image) * QUANT_SCALE)
    n_sat = int(np.count_nonzero(q > 65535))
    if n_sat:
        log.info("%d samples saturated at 65535", n_sat)
    return pgm.GrayImage(np.minimum(q, 65535).astype(np.uint16), 65535)


def cmd_synth(args) -> int:
    parser = configparser.ConfigParser(comment_prefixes=("#",), inline_comment_prefixes=("#",),
                                       interpolation=None)
    try:
        with open(args.spec, encoding="utf-8") as fh:
            parser.read_file(fh)
    except FileNotFoundError:
        raise CliError(f"scene spec not found: {args.spec}") from None
    except configparser.Error as exc:
        raise CliError(f"{args.spec}: {exc}") from None
    names = parser.sections()
    if not names:
        raise CliError(f"{args.spec}: no [scene] sections")
    scenes = [_scene_from_section(n, parser[n], i, args.seed) for i, n in enumerate(names)]
    out = OutputDir(args.out, args.force)
    for name in names:
        out.claim(f"{name}.pgm", f"{name}_truth.pgm")
    for name, spec in zip(names, scenes):
        image, truth = generate(spec)
        pgm.write_pgm(quantize(image), out.path / f"{name}.pgm")
        pgm.write_mask(truth, out.path / f"{name}_truth.pgm")
    log.info("wrote %d scenes to %s", len(names), out.path)
    return EXIT_OK


# -- eval ----------------------------------------------------------------------

def _index(directory, suffix: str) -> dict[str, Path]:
    d = Path(directory)
    if not d.is_dir():
        raise CliError(f"not a directory: {d}")
    out = {}
    for p in sorted(d.glob("*.pgm")):
        stem = p.stem
        if stem.endswith(suffix):
            stem = stem[: -len(suffix)]
        elif stem.endswith(("_mask", "_truth")):
            # the other half of a pair sharing this directory
            continue
        out[stem] = p
    return out


def evaluate_pairs(masks: dict[str, Path], truths: dict[str, Path]):
    unpaired = sorted(set(masks) ^ set(truths))
    if unpaired:
        raise CliError("unpaired files: " + ", ".join(
            str(masks.get(n) or truths.get(n)) for n in unpaired))
    rows = []
    for name in sorted(masks):
        mask, truth = pgm.read_mask(masks[name]), pgm.read_mask(truths[name])
        if mask.shape != truth.shape:
            raise CliError(f"{name}: mask {mask.shape} and truth {truth.shape} differ in size")
        c = confusion(mask, truth)
        rows.append((name, accuracy(c), precision(c), c.tp, c.fp, c.tn, c.fn))
    return rows


def eval_csv(rows) -> str:
    if not rows:
        raise CliError("no mask/truth pairs found")
    acc = batch_stats([r[1] for r in rows])
    prec = batch_stats([r[2] for r in rows])
    body = [(n, _num(a), _num(p), tp, fp, tn, fn, "", "") for n, a, p, tp, fp, tn, fn in rows]
    body.append(("summary", _num(acc.mean), _num(prec.mean), "", "", "", "",
                 _num(acc.sd), _num(prec.sd)))
    return _csv_text(EVAL_HEADER, body)


def cmd_eval(args) -> int:
    text = eval_csv(evaluate_pairs(_index(args.masks, "_mask"), _index(args.truths, "_truth")))
    if args.out:
        OutputDir(args.out, args.force).write_text("eval.csv", text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


# -- sweep ---------------------------------------------------------------------

def _read_grid(path) -> tuple[list[str], list[dict[str, str]]]:
    try:
        with open(path, encoding="utf-8", newline="") as fh:
            reader = csv.DictReader(fh)
            rows = [{k.strip(): v.strip() for k, v in r.items()} for r in reader]
            header = [h.strip() for h in (reader.fieldnames or [])]
    except FileNotFoundError:
        raise CliError(f"grid file not found: {path}") from None
    if not rows:
        raise CliError(f"{path}: empty parameter grid")
    missing = {"gamma1", "gamma2", "nu", "model"} - set(header)
    if missing:
        raise CliError(f"{path}: grid lacks columns {sorted(missing)}")
    return header, rows


def _corpus(directory) -> list[tuple[str, Path, Path]]:
    d = Path(directory)
    if not d.is_dir():
        raise CliError(f"not a directory: {d}")
    scenes = []
    for p in sorted(d.glob("*.pgm")):
        if p.stem.endswith(("_truth", "_mask")):
            continue
        truth = d / f"{p.stem}_truth.pgm"
        if not truth.exists():
            raise CliError(f"unpaired file: {p} has no {truth.name}")
        scenes.append((p.stem, p, truth))
    if not scenes:
        raise CliError(f"no scenes in {d}")
    return scenes


def _sweep_one(job):
    cfg, image_path, truth_path = job
    result = run(_load_image(image_path), cfg)
    c = confusion(result.oil_mask, pgm.read_mask(truth_path))
    return accuracy(c), precision(c)


def cmd_sweep(args) -> int:
    base = _base_config(args)
    header, grid = _read_grid(args.grid)
    try:
        cfgs = [config_from_mapping(row, base) for row in grid]
    except ConfigError as exc:
        raise CliError(f"{args.grid}: {exc}") from None
    scenes = _corpus(args.corpus)
    out = OutputDir(args.out, args.force)
    out.claim("sweep.csv")
    out.write_text("effective_config.txt", dump_config(base))

    jobs = [(cfg, img, truth) for cfg in cfgs for _, img, truth in scenes]
    scores = _map(_sweep_one, jobs, args.jobs)
    rows = []
    n = len(scenes)
    for i, row in enumerate(grid):
        chunk = scores[i * n:(i + 1) * n]
        acc = batch_stats([a for a, _ in chunk])
        prec = batch_stats([p for _, p in chunk])
        rows.append([row[h] for h in header]
                    + [_num(acc.mean), _num(acc.sd), _num(prec.mean), n])
    out.write_text("sweep.csv", _csv_text(
        header + ["mean_accuracy", "sd_accuracy", "mean_precision", "n_scenes"], rows))
    return EXIT_OK


# -- entry point ---------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="slickseg", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, config=True):
        sp.add_argument("--out", required=True, help="output directory (created if absent)")
        sp.add_argument("--force", action="store_true", help="overwrite existing outputs")
        if config:
            sp.add_argument("--config", help="flat key=value config file")
            sp.add_argument("--model", choices=("exp", "weibull", "gamma"))
            g = sp.add_mutually_exclusive_group()
            g.add_argument("--init-rect", metavar="X0,Y0,X1,Y1")
            g.add_argument("--init-circle", metavar="CX,CY,R")
            sp.add_argument("--jobs", type=int, default=1, help="parallel worker processes")

    s = sub.add_parser("segment", help="segment one or more PGM images")
    s.add_argument("images", nargs="+")
    common(s)
    s.set_defaults(func=cmd_segment)

    s = sub.add_parser("synth", help="generate speckled scenes from an INI scene list")
    s.add_argument("spec")
    s.add_argument("--seed", type=int, default=0, help="base seed for scenes without one")
    common(s, config=False)
    s.set_defaults(func=cmd_synth)

    s = sub.add_parser("eval", help="score masks against truth masks")
    s.add_argument("masks")
    s.add_argument("truths")
    s.add_argument("--out", help="write eval.csv here instead of stdout")
    s.add_argument("--force", action="store_true")
    s.set_defaults(func=cmd_eval)

    s = sub.add_parser("sweep", help="mean accuracy per parameter tuple over a corpus")
    s.add_argument("grid")
    s.add_argument("corpus")
    common(s)
    s.set_defaults(func=cmd_sweep)
    return p


def _setup_logging():
    name = os.environ.get("SLICKSEG_LOG", "warning").strip().lower()
    level = {"error": logging.ERROR, "warning": logging.WARNING, "info": logging.INFO,
             "debug": logging.DEBUG}.get(name, logging.WARNING)
    logging.basicConfig(level=level, format="slickseg: %(levelname)s: %(message)s")


def main(argv=None) -> int:
    _setup_logging()
    args = build_parser().parse_args(argv)
    if getattr(args, "jobs", 1) < 1:
        print("slickseg: error: --jobs must be at least 1", file=sys.stderr)
        return EXIT_ERROR
    try:
        return args.func(args)
    except (CliError, ConfigError, pgm.PGMError) as exc:
        print(f"slickseg: error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except ValueError as exc:
        print(f"slickseg: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
