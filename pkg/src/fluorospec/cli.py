"""Command-line entry point: ``fluorospec <command> ...``.

Exit codes: 0 success, 2 invalid input or configuration, 3 I/O failure,
4 numerical failure.

Every command accepts ``--config FILE``: a JSON object whose keys are the
command's long option names (dashes or underscores). Explicit flags override
the file. The global ``--seed`` expands into named sub-seeds with
``seeding.sub_seed(seed, name)`` for ``synth``, ``split`` and ``init``.
"""
from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import ann, core, ingest, seeding, synth
from .classifiers import ALGORITHMS, PCA_COMPONENTS, ClassifierSpec, fit, model_from_json
from .core import NumericalError, QualityClass, RejectedInputError
from .evaluation import SplitPlan, accuracy, benchmark_all, save_split_audit, split_holdout

EXIT_OK, EXIT_INPUT, EXIT_IO, EXIT_NUMERIC = 0, 2, 3, 4


class UsageError(RejectedInputError):
    pass


def _int_list(text):
    try:
        return [int(t) for t in str(text).split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _name_list(text):
    return [t.strip() for t in str(text).split(",") if t.strip()]


def _key_value(text):
    key, sep, raw = text.partition("=")
    if not sep:
        raise argparse.ArgumentTypeError(f"expected key=value, got {text!r}")
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    return key.strip(), value


def _log(msg):
    print(msg, file=sys.stderr, flush=True)


# -- shared option groups ----------------------------------------------------

def _add_common(p, seed=True):
    p.add_argument("--config", help="JSON file with option values for this command")
    if seed:
        p.add_argument("--seed", type=int, help="global seed (required)")
    p.add_argument("--threads", type=int, default=os.cpu_count() or 1,
                   help="worker threads (results do not depend on this)")


def _add_plan(p, repetitions=100):
    p.add_argument("--repetitions", type=int, default=repetitions, help="holdout repetitions")
    p.add_argument("--train-fraction", type=float, default=0.8)
    p.add_argument("--unstratified", action="store_true", help="plain random splits")
    p.add_argument("--group-by-sample", action="store_true",
                   help="keep all repetitions of a sample on the same side")


def _add_normalize(p):
    p.add_argument("--no-normalize", dest="normalize", action="store_false",
                   help="skip per-spectrum z-score normalization")


def _plan(args):
    return SplitPlan(args.train_fraction, args.repetitions, not args.unstratified,
                     args.group_by_sample, seeding.sub_seed(args.seed, "split"))


def _require_seed(args):
    if args.seed is None:
        raise UsageError("--seed is required for this command")
    seeding.check_seed(args.seed)


def _features(path, normalize):
    return core.build_feature_matrix(ingest.load_dataset(path), normalize=normalize)


def _write(path, text):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


# -- commands ----------------------------------------------------------------

def cmd_synth(args):
    _require_seed(args)
    cfg = synth.SynthConfig.from_dict(args.profiles_config) if args.profiles_config else synth.SynthConfig()
    spc = tuple(args.samples_per_class) if args.samples_per_class else cfg.samples_per_class
    cfg = synth.SynthConfig(
        profiles=cfg.profiles, samples_per_class=spc,
        repetitions_per_sample=args.repetitions if args.repetitions is not None else cfg.repetitions_per_sample,
        seed=seeding.sub_seed(args.seed, "synth"),
        grid_start_nm=args.grid_start if args.grid_start is not None else cfg.grid_start_nm,
        grid_end_nm=args.grid_end if args.grid_end is not None else cfg.grid_end_nm,
    ).scaled(noise=args.noise_scale, variability=args.variability_scale)
    d = synth.generate_dataset(cfg)
    ingest.save_dataset(d, args.out)
    if args.background_out:
        ingest.save_spectrum(synth.baseline_spectrum(cfg.profiles[0], d.grid), args.background_out)
    if args.config_out:
        _write(args.config_out, json.dumps(cfg.to_dict(), indent=2) + "\n")
    counts = d.sample_counts()
    print(" ".join(f"{q.name}:{counts[q]}" for q in QualityClass)
          + f" ×{cfg.repetitions_per_sample} = {len(d)} spectra -> {args.out}")


def cmd_preprocess(args):
    d = ingest.load_dataset(args.dataset)
    bg = ingest.load_spectrum(args.background, d.grid) if args.background else None
    records = []
    for rec in d.records:
        s = rec.spectrum
        if bg is not None:
            s = core.subtract_background(s, bg)
        if args.normalize:
            try:
                s = core.zscore_normalize(s)
            except core.DegenerateInputError as exc:
                raise core.DegenerateInputError(f"sample {rec.sample_id!r} repetition "
                                                f"{rec.repetition_index}: {exc}") from exc
        records.append(core.LabeledSpectrum(s, rec.sample_id, rec.repetition_index, rec.label))
    ingest.save_dataset(core.SpectraSet(d.grid, tuple(records)), args.out)
    print(f"{len(records)} spectra -> {args.out}")


def _spec(args):
    return ClassifierSpec(args.algorithm, dict(args.param or []))


def cmd_train(args):
    _require_seed(args)
    spec = _spec(args)
    fm = _features(args.dataset, args.normalize)
    fit_seed = seeding.sub_seed(args.seed, "init")
    if args.holdout:
        plan = SplitPlan(args.train_fraction, 1, not args.unstratified, args.group_by_sample,
                         seeding.sub_seed(args.seed, "split"))
        tr, va = split_holdout(fm, plan, 0)
        model = fit(spec, fm.subset(tr), fit_seed)
        acc = accuracy(model.predict(fm.rows[va]), fm.labels[va])
        print(f"{spec.label}: validation accuracy {acc:.4f} ({len(va)} spectra)")
    else:
        model = fit(spec, fm, fit_seed)
        acc = accuracy(model.predict(fm.rows), fm.labels)
        print(f"{spec.label}: training accuracy {acc:.4f} ({len(fm)} spectra)")
    _write(args.model, model.to_json())


def cmd_predict(args):
    with open(args.model, encoding="utf-8") as fh:
        text = fh.read()
    try:
        model = model_from_json(text)
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise RejectedInputError(f"{args.model}: not a valid model file ({exc})") from None
    d = ingest.load_dataset(args.dataset)
    fm = core.build_feature_matrix(d, normalize=args.normalize)
    pred = model.predict(fm.rows)
    lines = ["sample_id,repetition,label,predicted,correct"]
    for rec, p in zip(d.records, pred):
        lines.append(f"{rec.sample_id},{rec.repetition_index},{rec.label.name},"
                     f"{QualityClass(int(p)).name},{int(p == rec.label)}")
    if args.out:
        _write(args.out, "\n".join(lines) + "\n")
    print(f"accuracy {accuracy(pred, fm.labels):.4f} ({len(fm)} spectra)")


def cmd_benchmark(args):
    _require_seed(args)
    fm = _features(args.dataset, args.normalize)
    plan = _plan(args)
    algorithms = args.algorithms or list(ALGORITHMS)
    if args.audit:
        save_split_audit(fm, plan, args.audit)
    report = benchmark_all(fm, plan, algorithms, tuple(args.pca_components), dict(args.mlp_param or []),
                           threads=args.threads, aggregate=args.aggregate,
                           progress=lambda r: _log(f"  {r.label}: {r.mean_accuracy:.4f} +- {r.std_accuracy:.4f}"))
    ingest.save_report(report, args.out_json, "json")
    if args.out_table:
        ingest.save_report(report, args.out_table, "table")
    sys.stdout.write(ingest.format_table(report))


def cmd_gridsearch(args):
    _require_seed(args)
    fm = _features(args.dataset, args.normalize)
    plan = _plan(args)
    cells = ann.grid_search(fm, plan, args.layers, args.widths, args.epochs, threads=args.threads)
    doc = {"format_version": ingest.FORMAT_VERSION, "plan": plan.to_dict(),
           "records": [c.record() for c in cells]}
    _write(args.out_json, json.dumps(doc, indent=2, sort_keys=True) + "\n")
    rows = ["# layers width epochs mean_accuracy std_accuracy"]
    rows += [f"{c.layers} {c.width} {c.epochs} {c.mean_accuracy:.6f} {c.std_accuracy:.6f}" for c in cells]
    if args.out_plot:
        _write(args.out_plot, "\n".join(rows) + "\n")
    print("\n".join(rows))


def cmd_report(args):
    report = ingest.load_report(args.input)
    text = ingest.report_json(report) if args.format == "json" else ingest.format_table(report)
    if args.out:
        _write(args.out, text)
    else:
        sys.stdout.write(text)


# -- parser ------------------------------------------------------------------

def build_parser():
    parser = argparse.ArgumentParser(prog="fluorospec", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic dataset")
    _add_common(p)
    p.add_argument("--out", required=True, help="dataset CSV to write")
    p.add_argument("--samples-per-class", type=_int_list, help="EVOO,VOO,LOO sample counts (12,8,7)")
    p.add_argument("--repetitions", type=int, help="acquisitions per sample (20)")
    p.add_argument("--noise-scale", type=float, default=1.0, help="multiply every class's noise_std")
    p.add_argument("--variability-scale", type=float, default=1.0,
                   help="multiply every class's sample_variability")
    p.add_argument("--grid-start", type=float, help="first wavelength in nm (350)")
    p.add_argument("--grid-end", type=float, help="last wavelength in nm (800)")
    p.add_argument("--profiles-config", type=json.loads, help=argparse.SUPPRESS)
    p.add_argument("--background-out", help="also write the instrument background spectrum")
    p.add_argument("--config-out", help="write the effective SynthConfig as JSON")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("preprocess", help="background-subtract and normalize a dataset")
    _add_common(p, seed=False)
    p.add_argument("--dataset", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--background", help="single-spectrum CSV to subtract")
    _add_normalize(p)
    p.set_defaults(func=cmd_preprocess)

    p = sub.add_parser("train", help="fit one classifier and save it as JSON")
    _add_common(p)
    p.add_argument("--dataset", required=True)
    p.add_argument("--algorithm", required=True, help=f"one of {', '.join(ALGORITHMS)}")
    p.add_argument("--param", type=_key_value, action="append",
                   help="classifier parameter key=value (JSON value), repeatable")
    p.add_argument("--model", required=True, help="model JSON to write")
    p.add_argument("--holdout", action="store_true",
                   help="train on one split and report its validation accuracy")
    p.add_argument("--train-fraction", type=float, default=0.8)
    p.add_argument("--unstratified", action="store_true")
    p.add_argument("--group-by-sample", action="store_true")
    _add_normalize(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", help="apply a saved model to a dataset")
    _add_common(p, seed=False)
    p.add_argument("--model", required=True)
    p.add_argument("--dataset", required=True)
    p.add_argument("--out", help="predictions CSV to write")
    _add_normalize(p)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("benchmark", help="repeated-holdout benchmark of all classifiers")
    _add_common(p)
    p.add_argument("--dataset", required=True)
    p.add_argument("--out-json", required=True)
    p.add_argument("--out-table")
    p.add_argument("--algorithms", type=_name_list, help="comma-separated subset, e.g. knn,rf")
    p.add_argument("--pca-components", type=_int_list, default=list(PCA_COMPONENTS))
    p.add_argument("--mlp-param", type=_key_value, action="append",
                   help="MLP parameter key=value, repeatable")
    p.add_argument("--aggregate", choices=("spectrum", "sample"), default="spectrum",
                   help="score each spectrum, or majority-vote each sample")
    p.add_argument("--audit", help="write every split's index lists to this JSON file")
    _add_plan(p)
    _add_normalize(p)
    p.set_defaults(func=cmd_benchmark)

    p = sub.add_parser("gridsearch", help="MLP layers x width x epochs grid search")
    _add_common(p)
    p.add_argument("--dataset", required=True)
    p.add_argument("--out-json", required=True)
    p.add_argument("--out-plot", help="whitespace-separated plot data")
    p.add_argument("--layers", type=_int_list, default=list(ann.GRID_LAYERS))
    p.add_argument("--widths", type=_int_list, default=list(ann.GRID_WIDTHS))
    p.add_argument("--epochs", type=_int_list, default=list(ann.GRID_EPOCHS))
    _add_plan(p)
    _add_normalize(p)
    p.set_defaults(func=cmd_gridsearch)

    p = sub.add_parser("report", help="render a saved benchmark report")
    _add_common(p, seed=False)
    p.add_argument("--input", required=True, help="report JSON")
    p.add_argument("--format", choices=("table", "json"), default="table")
    p.add_argument("--out")
    p.set_defaults(func=cmd_report)
    return parser


def _config_path(argv):
    """Command name and ``--config`` value, read before argparse enforces required flags."""
    command = config = None
    it = iter(argv)
    for tok in it:
        if tok == "--config":
            config = next(it, None)
        elif tok.startswith("--config="):
            config = tok.split("=", 1)[1]
        elif command is None and not tok.startswith("-"):
            command = tok
    return command, config


def _apply_config(parser, argv):
    """Parse ``argv`` with defaults taken from its ``--config`` file, if any."""
    argv = sys.argv[1:] if argv is None else list(argv)
    command, path = _config_path(argv)
    choices = parser._subparsers._group_actions[0].choices
    if not path or command not in choices:
        return parser.parse_args(argv)
    with open(path, encoding="utf-8") as fh:
        try:
            cfg = json.load(fh)
        except json.JSONDecodeError as exc:
            raise UsageError(f"{path}: invalid JSON ({exc.msg})") from None
    if not isinstance(cfg, dict):
        raise UsageError(f"{path}: expected a JSON object")
    sub = choices[command]
    known = {a.dest for a in sub._actions}
    defaults = {}
    for key, value in cfg.items():
        dest = key.replace("-", "_")
        if dest == "profiles" and command == "synth":
            dest, value = "profiles_config", {"profiles": value}
        elif dest not in known or dest in ("config", "help", "func"):
            raise UsageError(f"{path}: unknown option {key!r} for '{command}'")
        if dest in ("param", "mlp_param") and isinstance(value, dict):
            value = list(value.items())
        defaults[dest] = value
    sub.set_defaults(**defaults)
    # required options satisfied by the config file
    for action in sub._actions:
        if action.dest in defaults:
            action.required = False
    return parser.parse_args(argv)


def main(argv=None):
    parser = build_parser()
    try:
        args = _apply_config(parser, argv)
        args.func(args)
    except SystemExit:
        raise
    except NumericalError as exc:
        _log(f"error: {exc}")
        return EXIT_NUMERIC
    except RejectedInputError as exc:
        _log(f"error: {exc}")
        return EXIT_INPUT
    except (argparse.ArgumentTypeError, ValueError) as exc:
        _log(f"error: {exc}")
        return EXIT_INPUT
    except OSError as exc:
        _log(f"error: {exc}")
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
