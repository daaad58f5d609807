"""Command-line interface: ``bandsel <command> [options]``.

Exit codes: 0 success, 1 usage error, 2 data error, 3 numeric failure.
Options may also come from a JSON ``--config`` file whose keys are option
names (``seed``, ``zones``, ``percents``, ...); command-line flags win.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

import numpy as np

from . import _backend
from .dataset import DatasetError, band_spec, load_dataset, select_binary, synthesize, write_dataset
from .energy_select import EnergyError, ZoneConfig, cumulative_groups, energy_ratios, write_groups_csv
from .experiment import (
    DEFAULT_PERCENTS, REF_PERCENT, REFERENCE_PAIRS, all_pairs, pair_name, read_suite_csv,
    run_pairwise_suite, trend_fit, write_suite_csv, write_suite_json,
)
from .neuralnet import (
    NetworkConfig, TrainingError, fold_standardization, predict_class, save_model,
    standardize_fit, train,
)
from .window_stats import build_dim, sweep_windows, write_dim_csv, write_dim_pgm

log = logging.getLogger("bandsel")

EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _int_list(text):
    try:
        return [int(v) for v in str(text).split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _float_list(text):
    try:
        return [float(v) for v in str(text).split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _span(text):
    try:
        lo, hi = (int(v) for v in str(text).split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected START:END, got {text!r}")
    return lo, hi


def _zones(text):
    vals = _int_list(text)
    if len(vals) != 2:
        raise argparse.ArgumentTypeError("expected z1_end,z2_end")
    return vals


def _bool(text):
    t = str(text).lower()
    if t in ("true", "1", "yes"):
        return True
    if t in ("false", "0", "no"):
        return False
    raise argparse.ArgumentTypeError(f"expected true/false, got {text!r}")


def _pair(text):
    parts = str(text).replace(" vs ", ":").split(":")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"expected CLASS_A:CLASS_B, got {text!r}")
    return parts[0].strip(), parts[1].strip()


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("global options")
    g.add_argument("--config", help="JSON file of option defaults")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--zones", type=_zones, default=None,
                   help="z1_end,z2_end (default 120,400 for m=512, scaled otherwise)")
    g.add_argument("--jobs", type=int, default=1)
    g.add_argument("--out", default=".", help="output directory")
    g.add_argument("--mode", choices=("paper", "nested"), default="paper",
                   help="feature selection on all pair data or inside each training fold")
    g.add_argument("--include-z1", type=_bool, default=True, metavar="true|false")
    g.add_argument("-v", "--verbose", action="store_true")

    data = argparse.ArgumentParser(add_help=False)
    data.add_argument("--data", help="dataset CSV")
    data.add_argument("--echo-time", choices=("SET", "LET"), default=None)

    pair = argparse.ArgumentParser(add_help=False)
    pair.add_argument("--pair", type=_pair, required=False, help="CLASS_A:CLASS_B, e.g. G2:mm")

    parser = _Parser(prog="bandsel", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("synth", parents=[common], help="write a synthetic dataset")
    p.add_argument("--classes", type=_int_list, required=False, help="spectra per class, e.g. 20,20")
    p.add_argument("--labels", default=None, help="class codes, e.g. gl,me")
    p.add_argument("--sep-band", type=_span, default=(200, 250), help="START:END of the separating band")
    p.add_argument("--amplitudes", type=_float_list, default=None,
                   help="band line amplitude per class (default 0,1,2,...)")
    p.add_argument("--noise", type=float, default=0.2)
    p.add_argument("--m", type=int, default=512)
    p.add_argument("--no-base-peaks", action="store_true")
    p.add_argument("-o", "--output", default=None, help="output CSV (default OUT/synth.csv)")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("dim", parents=[common, data, pair], help="Dissimilarity Index Matrix")
    p.set_defaults(func=cmd_dim)

    p = sub.add_parser("energy", parents=[common, data, pair], help="zone energies")
    p.set_defaults(func=cmd_energy)

    p = sub.add_parser("select", parents=[common, data, pair], help="cumulative-energy feature groups")
    p.add_argument("--percents", type=_int_list, default=list(DEFAULT_PERCENTS))
    p.set_defaults(func=cmd_select)

    p = sub.add_parser("train", parents=[common, data, pair], help="train one classifier")
    p.add_argument("--percent", type=int, default=REF_PERCENT)
    p.add_argument("--hidden", type=int, default=20)
    p.add_argument("--epochs", type=int, default=150)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("suite", parents=[common, data], help="cross-validated pairwise suite")
    p.add_argument("--pairs", default="all",
                   help="'all', 'reference', or comma-separated A:B pairs")
    p.add_argument("--percents", type=_int_list, default=list(DEFAULT_PERCENTS))
    p.add_argument("--hidden", type=int, default=20)
    p.add_argument("--epochs", type=int, default=150)
    p.add_argument("--folds", type=int, default=5)
    p.set_defaults(func=cmd_suite)

    p = sub.add_parser("trend", parents=[common], help="quartic log-trend of a suite report")
    p.add_argument("--report", required=False, help="suite CSV")
    p.set_defaults(func=cmd_trend)
    return parser


def _apply_config(parser, argv):
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if not known.config:
        return
    try:
        with open(known.config, encoding="utf-8") as fh:
            cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config {known.config}: {exc}")
    cfg = {k.replace("-", "_"): v for k, v in cfg.items()}
    # string values go through the same converters as flags
    converters = {"zones": _zones, "percents": _int_list, "classes": _int_list,
                  "amplitudes": _float_list, "sep_band": _span, "include_z1": _bool,
                  "pair": _pair}
    for k, fn in converters.items():
        if isinstance(cfg.get(k), str):
            cfg[k] = fn(cfg[k])
    for sp in parser._subparsers._group_actions[0].choices.values():
        dests = {a.dest for a in sp._actions}
        sp.set_defaults(**{k: v for k, v in cfg.items() if k in dests})


def _outdir(args) -> str:
    os.makedirs(args.out, exist_ok=True)
    return args.out


def _load(args):
    if not args.data:
        raise UsageError("--data is required")
    if not os.path.exists(args.data):
        raise DatasetError(f"dataset not found: {args.data}")
    return load_dataset(args.data, args.echo_time)


def _binary(args):
    if not args.pair:
        raise UsageError("--pair is required")
    return select_binary(_load(args), *args.pair)


def _zone_config(args, m) -> ZoneConfig:
    zc = ZoneConfig(*args.zones) if args.zones else ZoneConfig.default(m)
    try:
        zc.validate(m)
    except EnergyError as exc:
        raise UsageError(str(exc))
    print(f"zones: Z1=[0,{zc.z1_end}) Z2=[{zc.z1_end},{zc.z2_end}) Z3=[{zc.z2_end},{m})")
    return zc


def cmd_synth(args):
    if not args.classes:
        raise UsageError("--classes is required")
    labels = args.labels.split(",") if args.labels else None
    lo, hi = args.sep_band
    if not (0 <= lo < hi <= args.m):
        raise UsageError("band outside signal")
    spec = band_spec(args.classes, args.sep_band, args.amplitudes, args.noise, args.seed,
                     args.m, labels, base_peaks=not args.no_base_peaks)
    ds = synthesize(spec)
    path = args.output or os.path.join(_outdir(args), "synth.csv")
    try:
        write_dataset(ds, path)
    except OSError as exc:
        raise DatasetError(f"cannot write {path}: {exc}")
    for lab, n in ds.class_counts().items():
        print(f"{lab}: {n}")
    print(f"wrote {len(ds)} spectra to {path}")


def cmd_dim(args):
    bd = _binary(args)
    zc = _zone_config(args, bd.m)
    dim = build_dim(bd, jobs=args.jobs)
    out = _outdir(args)
    write_dim_csv(dim, os.path.join(out, "dim.csv"))
    write_dim_pgm(dim, os.path.join(out, "dim.pgm"))
    try:
        rep = energy_ratios(dim.row(1), zc)
        print(f"E1={rep.e1:.6g} E2={rep.e2:.6g} E3={rep.e3:.6g} E1/E3={rep.r1:.6g} E2/E3={rep.r2:.6g}")
    except EnergyError as exc:
        print(f"zone energies undefined: {exc}")
    print(f"wrote {dim.values.size} cells to {os.path.join(out, 'dim.csv')} and dim.pgm")


def cmd_energy(args):
    bd = _binary(args)
    zc = _zone_config(args, bd.m)
    rep = energy_ratios(sweep_windows(bd, 1), zc)
    path = os.path.join(_outdir(args), "energy.json")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(rep.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(json.dumps(rep.to_dict(), sort_keys=True))


def cmd_select(args):
    bd = _binary(args)
    zc = _zone_config(args, bd.m)
    groups = cumulative_groups(sweep_windows(bd, 1), zc, args.percents, args.include_z1)
    path = os.path.join(_outdir(args), "groups.csv")
    write_groups_csv(groups, path)
    for g in groups:
        print(f"E'{g.percent}: {g.n_vars} variables, ratio {g.group_energy_ratio:.6g}")


def cmd_train(args):
    bd = _binary(args)
    zc = _zone_config(args, bd.m)
    (group,) = cumulative_groups(sweep_windows(bd, 1), zc, [args.percent], args.include_z1)
    X = bd.X[:, list(group.indices)]
    mean, scale = standardize_fit(X)
    cfg = NetworkConfig(X.shape[1], args.hidden, args.epochs)
    state, trace = train(cfg, (X - mean) / scale, bd.y, seed=args.seed)
    state = fold_standardization(state, mean, scale)
    acc = 100.0 * float(np.mean(predict_class(state, X) == bd.y))
    out = _outdir(args)
    save_model(state, os.path.join(out, "model.txt"))
    with open(os.path.join(out, "model_features.txt"), "w", encoding="utf-8") as fh:
        fh.write(" ".join(map(str, group.indices)) + "\n")
    print(f"features: {group.n_vars} ({' '.join(map(str, group.indices))})")
    print(f"epochs: {trace.epochs} stop: {trace.stop_reason} gamma: {state.gamma:.4g}")
    print(f"training accuracy: {acc:.2f}%")


def _pairs_arg(args, ds):
    text = args.pairs.strip()
    if text == "all":
        return all_pairs(ds, args.folds)
    if text == "reference":
        return [(a, b) for a, b, *_ in REFERENCE_PAIRS]
    return [_pair(p) for p in text.split(",") if p.strip()]


def _reference_report():
    print("dataset not provided: the reference pairs need the INTERPRET spectra, which are not distributed.")
    print("reference values (pair, E'10/E3, mean +- std at 10%, best mean +- std, best percent):")
    for a, b, ratio, mean, sd, bmean, bsd, bp in REFERENCE_PAIRS:
        print(f"  {a} vs {b}: {ratio:.2f}  {mean:.2f} +- {sd:.1f}  {bmean:.2f} +- {bsd:.1f}  E'{bp}")


def cmd_suite(args):
    if not args.data:
        _reference_report()
        return EXIT_DATA
    ds = _load(args)
    zc = _zone_config(args, ds.m)
    pairs = _pairs_arg(args, ds)
    if not pairs:
        raise DatasetError(f"need at least 2 classes with >= {args.folds} spectra")
    for a, b in pairs:
        try:
            bd = select_binary(ds, a, b)
        except DatasetError as exc:
            raise DatasetError(f"pair {a}:{b}: {exc}")
        for side in (-1, 1):
            if np.sum(bd.y == side) < args.folds:
                raise DatasetError(f"pair {a}:{b} has a class with fewer than {args.folds} spectra")
    rows = run_pairwise_suite(ds, pairs, args.percents, zc, args.seed, args.mode,
                              args.include_z1, args.hidden, args.epochs, args.folds, args.jobs)
    trend = None
    if len(rows) >= 6 and all(r.ratio_e10_e3 > 0 for r in rows):
        trend = trend_fit(rows)
    out = _outdir(args)
    write_suite_csv(rows, os.path.join(out, "suite.csv"))
    meta = {"seed": args.seed, "mode": args.mode, "include_z1": args.include_z1,
            "zones": {"z1_end": zc.z1_end, "z2_end": zc.z2_end},
            "percents": sorted(set(args.percents) | {REF_PERCENT}), "folds": args.folds}
    write_suite_json(rows, os.path.join(out, "suite.json"), trend, meta)
    for r in rows:
        print(f"{r.name}: E'10/E3={r.ratio_e10_e3:.4g} acc@10={r.result_at_10.mean:.2f}+-{r.result_at_10.stdev:.2f} "
              f"best={r.best_result.mean:.2f}+-{r.best_result.stdev:.2f} (E'{r.best_percent})")
    if trend is not None:
        print(f"spearman: {trend.spearman:.4f}")
    else:
        print("trend fit skipped: needs at least 6 pairs")


def cmd_trend(args):
    if not args.report:
        raise UsageError("--report is required")
    if not os.path.exists(args.report):
        raise DatasetError(f"report not found: {args.report}")
    try:
        recs = read_suite_csv(args.report)
    except ValueError as exc:
        raise DatasetError(str(exc))
    try:
        fit = trend_fit([r["ratio_e10_e3"] for r in recs], [r["mean_at_10"] for r in recs])
    except ValueError as exc:
        raise DatasetError(str(exc))
    path = os.path.join(_outdir(args), "trend.json")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(fit.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")
    print("coefficients (u^0..u^4, u = ln ratio): " + " ".join(f"{c:.6g}" for c in fit.coefficients))
    print(f"spearman: {fit.spearman:.4f}")


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        _apply_config(parser, argv)
    except (UsageError, argparse.ArgumentTypeError) as exc:
        print(f"bandsel: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(asctime)s %(levelname)s %(message)s")
    log.info("command %s, kernel backend %s", args.command, _backend.BACKEND)
    try:
        rc = args.func(args)
    except UsageError as exc:
        print(f"bandsel: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DatasetError, EnergyError, FileNotFoundError) as exc:
        print(f"bandsel: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (TrainingError, FloatingPointError, np.linalg.LinAlgError) as exc:
        print(f"bandsel: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return int(rc or 0)


if __name__ == "__main__":
    sys.exit(main())
