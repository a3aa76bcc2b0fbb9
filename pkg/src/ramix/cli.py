"""Command-line entry point: ``ramix <subcommand> [options]``.

Exit codes: 0 success, 1 usage/config error, 2 data error, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

import numpy as np

from . import config as rconfig
from .checkpoint import load_checkpoint, parse_checkpoint, save_checkpoint
from .dataset import build_dataset, build_test_set, read_dataset, write_dataset
from .errors import CheckpointError, ConfigError, NumericalError, RamixError, SpectrumFormatError
from .io_utils import dumps_canonical, read_json, write_json
from .metrics import build_report
from .model import build_model, predict
from .plot import PlotSpec, write_plot
from .spectrum import Spectrum, WavenumberGrid, read_spectrum_csv, write_spectrum_csv
from .synthgen import STANDARD_COMPOUNDS, STANDARD_PEAKS, CompoundLibrary, standard_library
from .train import split_dataset, train

log = logging.getLogger("ramix")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _d(section, key):
    return rconfig.DEFAULTS[section][key]


def _common():
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--config", metavar="PATH", help="JSON run config; flags override it (default: built-in defaults)")
    p.add_argument("--seed", type=int, metavar="N", help=f"master seed (default: {rconfig.DEFAULTS['seed']})")
    p.add_argument("--out", metavar="DIR", default=".", help="working directory for all artefacts (default: .)")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = _Parser(prog="ramix", description="Raman mixture synthesis, RaMixNet training and evaluation.")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    sub.required = True

    sub.add_parser("synth-compounds", parents=[common], help="write the stand-in compound library as CSV files")

    p = sub.add_parser("gen-dataset", parents=[common], help="enumerate and augment the mixture training set")
    p.add_argument(
        "--test-set",
        action=argparse.BooleanOptionalAction,
        default=None,
        help="also write the six standard test mixtures (default: on when the library is the standard four)",
    )

    p = sub.add_parser("train", parents=[common], help="train RaMixNet I or II on a generated dataset")
    p.add_argument("--variant", choices=("ramixnet1", "ramixnet2"), help=f"model variant (default: {_d('model', 'variant')})")
    p.add_argument("--epochs", type=int, metavar="N", help=f"maximum epochs (default: {_d('train', 'epochs')})")
    p.add_argument("--lambda-reg", type=float, metavar="X", help=f"regression loss weight (default: {_d('train', 'lambda_reg')})")
    p.add_argument("--threshold", type=float, metavar="X", help=f"presence threshold (default: {_d('eval', 'threshold')})")

    p = sub.add_parser("predict", parents=[common], help="classify one spectrum CSV")
    p.add_argument("spectrum", help="spectrum CSV (wavenumber_cm1,intensity); resampled to the model grid")
    p.add_argument("--checkpoint", metavar="PATH", help="checkpoint file (default: <out>/<paths.model>/checkpoint.rmxc)")
    p.add_argument("--threshold", type=float, metavar="X", help=f"presence threshold (default: {_d('eval', 'threshold')})")

    p = sub.add_parser("evaluate", parents=[common], help="evaluate a checkpoint on a dataset manifest")
    p.add_argument("--checkpoint", metavar="PATH", help="checkpoint file (default: <out>/<paths.model>/checkpoint.rmxc)")
    p.add_argument("--manifest", metavar="PATH", help="test manifest (default: <out>/<paths.test_set>/manifest.json)")
    p.add_argument("--threshold", type=float, metavar="X", help=f"presence threshold (default: {_d('eval', 'threshold')})")

    p = sub.add_parser("plot", parents=[common], help="overlay spectra in a static SVG")
    p.add_argument("spectra", nargs="*", help="spectrum CSV files")
    p.add_argument("--manifest", metavar="PATH", help="dataset manifest to take items from")
    p.add_argument("--items", type=int, nargs="+", default=[], metavar="I", help="item indices in --manifest")
    p.add_argument("--labels", nargs="+", metavar="TEXT", help="legend labels (default: file names / item ids)")
    p.add_argument("--output", metavar="PATH", help="SVG path (default: <out>/<paths.plots>/plot.svg)")
    p.add_argument("--width", type=int, default=800, help="width in px (default: 800)")
    p.add_argument("--height", type=int, default=450, help="height in px (default: 450)")
    p.add_argument("--title", default="", help="plot title (default: none)")

    p = sub.add_parser("inspect-checkpoint", parents=[common], help="print a checkpoint's config and metadata")
    p.add_argument("checkpoint", nargs="?", help="checkpoint file (default: <out>/<paths.model>/checkpoint.rmxc)")
    return parser


def _overrides(args) -> dict:
    o = {}
    if args.seed is not None:
        o["seed"] = args.seed
    if getattr(args, "variant", None) is not None:
        o.setdefault("model", {})["variant"] = args.variant
    if getattr(args, "epochs", None) is not None:
        o.setdefault("train", {})["epochs"] = args.epochs
    if getattr(args, "lambda_reg", None) is not None:
        o.setdefault("train", {})["lambda_reg"] = args.lambda_reg
    if getattr(args, "threshold", None) is not None:
        o.setdefault("eval", {})["threshold"] = args.threshold
    return o


def _path(args, cfg, key, *parts):
    return os.path.join(args.out, cfg["paths"][key], *parts)


def _print_json(obj):
    sys.stdout.write(dumps_canonical(obj))


# ---------------------------------------------------------------- commands


def cmd_synth_compounds(args, cfg) -> int:
    grid = rconfig.grid(cfg)
    lib = standard_library(cfg["compounds"]["count"], grid)
    directory = _path(args, cfg, "compounds")
    entries = []
    for name, s in zip(lib.names, lib.pure_spectra):
        fname = f"{name}.csv"
        write_spectrum_csv(s, os.path.join(directory, fname))
        peaks = [
            {"center": p.center, "half_width": p.half_width, "amplitude": p.amplitude, "shape": p.shape}
            for p in STANDARD_PEAKS[name]
        ]
        entries.append({"name": name, "file": fname, "peaks": peaks})
    write_json(os.path.join(directory, "library.json"), {"grid": grid.to_dict(), "compounds": entries})
    print(f"wrote {len(entries)} compound spectra to {directory}")
    return EXIT_OK


def load_library(directory) -> CompoundLibrary:
    path = os.path.join(directory, "library.json")
    if not os.path.exists(path):
        raise SpectrumFormatError("compound library not found; run synth-compounds first", path)
    meta = read_json(path)
    grid = WavenumberGrid.from_dict(meta["grid"])
    names, spectra = [], []
    for entry in meta["compounds"]:
        s = read_spectrum_csv(os.path.join(directory, entry["file"]), grid=grid)
        # CSV round trip may perturb the peak maximum in the last ulp
        spectra.append(Spectrum(grid, s.intensities / s.intensities.max()))
        names.append(entry["name"])
    return CompoundLibrary(tuple(names), tuple(spectra))


def cmd_gen_dataset(args, cfg) -> int:
    lib = load_library(_path(args, cfg, "compounds"))
    ds = build_dataset(lib, rconfig.mixture_gen(cfg), rconfig.augment(cfg))
    ds.meta["seed"] = cfg["seed"]
    path = write_dataset(_path(args, cfg, "dataset"), ds)
    print(f"items: {len(ds)}")
    print(f"manifest: {path}")
    want_test = args.test_set if args.test_set is not None else lib.names == STANDARD_COMPOUNDS
    if want_test:
        if lib.names != STANDARD_COMPOUNDS:
            raise UsageError(f"the standard test set needs the compounds {', '.join(STANDARD_COMPOUNDS)}")
        # with augmentation disabled the test baselines still use the default intervals
        test = build_test_set(lib, seed=cfg["seed"], aug_cfg=rconfig.augment(cfg))
        tpath = write_dataset(_path(args, cfg, "test_set"), test)
        print(f"test items: {len(test)}")
        print(f"test manifest: {tpath}")
    return EXIT_OK


def _sample_names(ds):
    names = []
    for i, rec in enumerate(ds.records or [{} for _ in range(len(ds))]):
        names.append(str(rec.get("name", i)))
    return names


def evaluate_dataset(model, ds, threshold, full_scale_ul):
    if len(ds) == 0:
        raise SpectrumFormatError("evaluation set is empty")
    probs, ratios = model.predict_arrays(ds.X)
    pred = (probs >= threshold).astype(int)
    return build_report(
        ds.names,
        pred,
        ds.presence,
        threshold=threshold,
        class_probs=probs,
        pred_ratios=ratios,
        true_ratios=None if ratios is None else ds.ratios,
        sample_names=_sample_names(ds),
        full_scale_ul=full_scale_ul,
    )


def cmd_train(args, cfg) -> int:
    manifest = _path(args, cfg, "dataset", "manifest.json")
    if not os.path.exists(manifest):
        raise SpectrumFormatError("dataset manifest not found; run gen-dataset first", manifest)
    ds = read_dataset(manifest)
    tcfg = rconfig.train(cfg)
    mcfg = rconfig.model(cfg, ds.n_classes, ds.grid.n_points)
    tr, va = split_dataset(ds, tcfg.validation_fraction, tcfg.seed)
    model = build_model(mcfg, seed=cfg["seed"])
    progress = None
    if args.verbose:

        def progress(row):
            log.info("epoch %d  train %.5f  val %.5f", row["epoch"], row["train_loss"], row["val_loss"])

    model, history = train(model, tr, va, tcfg, progress=progress)
    history["compounds"] = list(ds.names)
    directory = _path(args, cfg, "model")
    last = history["epochs"][history["best_epoch"] - 1]
    meta = {
        "seed": cfg["seed"],
        "epochs_run": history["epochs_run"],
        "best_epoch": history["best_epoch"],
        "final_losses": {k: last[k] for k in ("train_loss", "val_loss", "train_bce", "val_bce", "train_mse", "val_mse")},
        "compounds": list(ds.names),
        "grid": ds.grid.to_dict(),
    }
    save_checkpoint(model, os.path.join(directory, "checkpoint.rmxc"), meta)
    write_json(os.path.join(directory, "history.json"), history)
    report = evaluate_dataset(model, va, tcfg.threshold, cfg["eval"]["full_scale_ul"])
    write_json(os.path.join(directory, "val_report.json"), report.to_dict())
    with open(os.path.join(directory, "val_report.txt"), "w", encoding="utf-8") as fh:
        fh.write(report.to_text())
    print(f"trained {model.variant}: {history['epochs_run']} epochs, best epoch {history['best_epoch']}")
    print(f"checkpoint: {os.path.join(directory, 'checkpoint.rmxc')}")
    return EXIT_OK


def _checkpoint_path(args, cfg):
    return args.checkpoint or _path(args, cfg, "model", "checkpoint.rmxc")


def _model_grid(meta, model):
    if "grid" in meta:
        return WavenumberGrid.from_dict(meta["grid"])
    return WavenumberGrid(300.0, 2500.0, model.cfg.input_length)


def cmd_predict(args, cfg) -> int:
    model, meta = load_checkpoint(_checkpoint_path(args, cfg))
    grid = _model_grid(meta, model)
    s = read_spectrum_csv(args.spectrum, grid=grid)
    pred = predict(model, s, threshold=cfg["eval"]["threshold"])
    out = pred.to_dict()
    if pred.ratios is not None:
        out["volumes_ul"] = [float(v) for v in pred.volumes_ul(cfg["eval"]["full_scale_ul"])]
    if "compounds" in meta:
        out["compounds"] = meta["compounds"]
    _print_json(out)
    return EXIT_OK


def cmd_evaluate(args, cfg) -> int:
    model, _ = load_checkpoint(_checkpoint_path(args, cfg))
    manifest = args.manifest or _path(args, cfg, "test_set", "manifest.json")
    if not os.path.exists(manifest):
        raise SpectrumFormatError("test manifest not found", manifest)
    ds = read_dataset(manifest)
    if ds.n_classes != model.cfg.num_classes or ds.grid.n_points != model.cfg.input_length:
        raise SpectrumFormatError("test set does not match the model's classes or grid", manifest)
    report = evaluate_dataset(model, ds, cfg["eval"]["threshold"], cfg["eval"]["full_scale_ul"])
    directory = _path(args, cfg, "eval")
    write_json(os.path.join(directory, "report.json"), report.to_dict())
    text = report.to_text()
    with open(os.path.join(directory, "report.txt"), "w", encoding="utf-8") as fh:
        fh.write(text)
    sys.stdout.write(text)
    return EXIT_OK


def cmd_plot(args, cfg) -> int:
    series, labels = [], []
    grid = rconfig.grid(cfg)
    for path in args.spectra:
        series.append(read_spectrum_csv(path, grid=grid))
        labels.append(os.path.splitext(os.path.basename(path))[0])
    if args.items:
        if not args.manifest:
            raise UsageError("--items requires --manifest")
        ds = read_dataset(args.manifest)
        for i in args.items:
            if not 0 <= i < len(ds):
                raise UsageError(f"item {i} out of range (dataset has {len(ds)} items)")
            series.append(Spectrum(ds.grid, ds.X[i]))
            labels.append(f"item {i}")
    if not series:
        raise UsageError("nothing to plot: pass spectrum files or --manifest with --items")
    if args.labels:
        if len(args.labels) != len(series):
            raise UsageError(f"{len(args.labels)} labels for {len(series)} series")
        labels = args.labels
    output = args.output or _path(args, cfg, "plots", "plot.svg")
    try:
        spec = PlotSpec(series, labels, output, args.width, args.height, args.title)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    write_plot(spec)
    print(f"wrote {output}")
    return EXIT_OK


def cmd_inspect_checkpoint(args, cfg) -> int:
    path = args.checkpoint or _path(args, cfg, "model", "checkpoint.rmxc")
    try:
        with open(path, "rb") as fh:
            data = fh.read()
    except OSError as exc:
        raise CheckpointError(f"cannot read checkpoint {path}: {exc}") from None
    model, meta = parse_checkpoint(data)
    _print_json(
        {
            "path": path,
            "config": model.cfg.to_dict(),
            "n_params": model.n_params(),
            "metadata": meta,
            "bytes": len(data),
        }
    )
    return EXIT_OK


COMMANDS = {
    "synth-compounds": cmd_synth_compounds,
    "gen-dataset": cmd_gen_dataset,
    "train": cmd_train,
    "predict": cmd_predict,
    "evaluate": cmd_evaluate,
    "plot": cmd_plot,
    "inspect-checkpoint": cmd_inspect_checkpoint,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        cfg = rconfig.load(args.config, _overrides(args))
        return COMMANDS[args.command](args, cfg)
    except (ConfigError, UsageError) as exc:
        print(f"ramix: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NumericalError as exc:
        print(f"ramix: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (RamixError, OSError, KeyError, ValueError) as exc:
        print(f"ramix: data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
