"""Command-line pipeline: ingest, explore, train, validate, evaluate,
compare, predict, generate, serve.

Every command is reproducible: all randomness flows from --seed, and the
same flags plus the same seed produce byte-identical output files (no
timestamps in any artifact). When --seed is omitted a seed is generated
and logged to standard error so the run can still be replayed.

Exit codes: 0 success, 1 validation or usage error, 2 unexpected failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .ensemble import (
    BAGGING_TREES,
    FOREST_TREES,
    EnsembleParams,
    default_mtry,
    fit_ensemble,
    predict_ensemble,
)
from .evaluation import (
    confusion,
    cross_validate,
    eda_summary,
    metrics,
    report_lines,
    report_mapping,
    roc,
)
from .features import SplitSpec, encode, encode_record, split, split_indices
from .ingest import HeaderMap, IngestError, read_csv, validate_consistency, write_csv
from .mlp import GRADIENT_DESCENT, RPROP, TrainParams, fit_mlp, predict_mlp
from .persist import PersistError, load, model_digest, model_kind, save
from .records import FieldError, ValidationError, derive_label, record_from_payload
from .synth import generate
from .tree import GAIN_RATIO, GINI, TreeParams, fit_tree, predict_tree

MODEL_KINDS = ("cart", "c45", "bagcart", "rf", "mlp")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse that reports usage problems as exit code 1, not 2."""

    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _fmt(x) -> str:
    if isinstance(x, float):
        return repr(x)
    return str(x)


def _emit(lines, out_path=None) -> None:
    text = "\n".join(lines) + "\n"
    if out_path:
        Path(out_path).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _write_kv(path, mapping) -> None:
    lines = [f"{k}={_fmt(v) if v is not None else 'NA'}" for k, v in mapping.items()]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def _resolve_seed(args) -> int:
    if args.seed is not None:
        return args.seed
    seed = int.from_bytes(os.urandom(4), "big")
    print(f"generated seed: {seed}", file=sys.stderr)
    return seed


def _data_path(args) -> str:
    path = args.data or os.environ.get("SCREENLAB_DATA")
    if not path:
        raise UsageError("no dataset: pass --data or set SCREENLAB_DATA")
    return path


def _load_records(args):
    header_map = HeaderMap.from_config(args.config) if args.config else HeaderMap()
    result = read_csv(_data_path(args), header_map=header_map, strict=args.strict)
    for issue in result.issues:
        print(f"quarantined row {issue.row}: {issue.column}: {issue.message}",
              file=sys.stderr)
    if not result.records:
        raise ValidationError("dataset contains no usable rows")
    return result


def _add_data_flags(p) -> None:
    p.add_argument("--data", help="dataset CSV (default: $SCREENLAB_DATA)")
    p.add_argument("--config", help="header-map config file")
    p.add_argument("--strict", action="store_true",
                   help="abort on the first malformed row instead of quarantining")


def _add_model_flags(p) -> None:
    p.add_argument("--model", required=True, choices=MODEL_KINDS)
    p.add_argument("--trees", type=int, help="ensemble size (default 50 bagcart, 500 rf)")
    p.add_argument("--mtry", type=int, help="columns per split search (default floor(sqrt(p)))")
    p.add_argument("--min-leaf", type=int, help="minimum rows per child (default 2; ensembles 1)")
    p.add_argument("--max-depth", type=int)
    p.add_argument("--prune", action=argparse.BooleanOptionalAction, default=None,
                   help="pessimistic pruning (default: on for c45, off otherwise)")
    p.add_argument("--prune-confidence", type=float, default=0.25)
    p.add_argument("--epochs", type=int, default=100000, help="network epoch limit")
    p.add_argument("--stop-threshold", type=float, default=0.01)
    p.add_argument("--algorithm", choices=(RPROP, GRADIENT_DESCENT), default=RPROP)
    p.add_argument("--learning-rate", type=float, default=0.01)
    p.add_argument("--restarts", type=int, default=1)


def _tree_params(args, kind: str) -> TreeParams:
    if args.prune is None:
        prune = kind == "c45"
    else:
        prune = args.prune
    return TreeParams(
        criterion=GAIN_RATIO if kind == "c45" else GINI,
        min_leaf=args.min_leaf if args.min_leaf is not None else 2,
        max_depth=args.max_depth,
        prune=prune,
        prune_confidence=args.prune_confidence,
    )


def _fit_model(kind: str, train, args, seed: int):
    if kind in ("cart", "c45"):
        return fit_tree(train, _tree_params(args, kind))
    if kind in ("bagcart", "rf"):
        base = TreeParams(
            criterion=GINI,
            min_leaf=args.min_leaf if args.min_leaf is not None else 1,
            max_depth=args.max_depth,
            prune=False,
        )
        mtry = None
        if kind == "rf":
            mtry = args.mtry if args.mtry is not None else default_mtry(train.p)
        n_trees = args.trees
        if n_trees is None:
            n_trees = FOREST_TREES if kind == "rf" else BAGGING_TREES
        return fit_ensemble(train, EnsembleParams(n_trees=n_trees, mtry=mtry,
                                                  seed=seed, base=base))
    params = TrainParams(
        algorithm=args.algorithm,
        stop_threshold=args.stop_threshold,
        max_epochs=args.epochs,
        seed=seed,
        learning_rate=args.learning_rate,
        restarts=args.restarts,
    )
    return fit_mlp(train, params)


def _predict_one(model, row) -> tuple[str, float]:
    kind = model_kind(model)
    if kind in ("cart", "c45"):
        return predict_tree(model, row)
    if kind in ("bagcart", "rf"):
        return predict_ensemble(model, row)
    return predict_mlp(model, row)


def _predict_labels(model, matrix) -> list[str]:
    return [_predict_one(model, r)[0] for r in matrix.rows]


def _accuracy(model, matrix) -> float:
    predicted = _predict_labels(model, matrix)
    hits = sum(1 for p, lab in zip(predicted, matrix.labels) if p == lab)
    return hits / matrix.n



def cmd_ingest(args) -> int:
    result = _load_records(args)
    report = validate_consistency(result.records)
    lines = [
        f"rows accepted: {len(result.records)}",
        f"rows quarantined: {result.n_quarantined}",
        f"score/item-sum mismatches: {report.score_sum_mismatches}",
        f"label-rule mismatches: {report.label_rule_mismatches}",
        f"ages out of range: {report.age_out_of_range}",
        f"scores out of range: {report.score_out_of_range}",
        f"consistent: {'yes' if report.clean else 'no'}",
    ]
    _emit(lines, args.report)
    if args.out:
        write_csv(args.out, result.records)
    return 0


def cmd_eda(args) -> int:
    result = _load_records(args)
    summary = eda_summary(result.records)
    lines = []
    mapping = {}
    for label, n in summary.label_counts.items():
        lines.append(f"label {label}: {n}")
        mapping[f"count_{label}"] = n
    for label, shares in summary.sex_shares.items():
        for sex, share in shares.items():
            lines.append(f"label {label} sex {sex}: {share:.4f}")
            mapping[f"sex_{label}_{sex}"] = share
    for label, shares in summary.ethnicity_shares.items():
        for eth, share in shares.items():
            lines.append(f"label {label} ethnicity {eth}: {share:.4f}")
            mapping[f"ethnicity_{label}_{eth.replace(' ', '_')}"] = share
    _emit(lines)
    if args.out:
        _write_kv(args.out, mapping)
    return 0


def cmd_train(args) -> int:
    seed = _resolve_seed(args)
    result = _load_records(args)
    matrix = encode(result.records)
    spec = SplitSpec(train_fraction=args.train_frac, seed=seed)
    train, test = split(matrix, spec)
    model = _fit_model(args.model, train, args, seed)
    save(model, args.out)
    lines = [
        f"{train.n} train / {test.n} test",
        f"model: {args.model}",
        f"seed: {seed}",
        f"train accuracy: {_accuracy(model, train):.4f}",
        f"test accuracy: {_accuracy(model, test):.4f}",
        f"model file: {args.out}",
    ]
    if args.model == "mlp":
        lines.insert(3, f"converged: {'yes' if model.converged else 'no'} "
                        f"after {model.epochs_run} epochs (error {model.final_error:.6f})")
    _emit(lines, args.log)
    if args.log:
        _emit(lines)
    if args.test_out:
        _, test_idx = split_indices(matrix.labels, spec)
        write_csv(args.test_out, [result.records[i] for i in test_idx])
    return 0


def cmd_cv(args) -> int:
    seed = _resolve_seed(args)
    result = _load_records(args)
    matrix = encode(result.records)

    def trainer(train, test):
        model = _fit_model(args.model, train, args, seed)
        return _predict_labels(model, test)

    cv = cross_validate(matrix, trainer, k=args.k, seed=seed)
    lines = [f"fold {i + 1} accuracy: {a:.4f}" for i, a in enumerate(cv.fold_accuracies)]
    lines.append(f"mean accuracy: {cv.mean:.4f}")
    lines.append(f"sd: {cv.sd:.4f}")
    lines.append(f"seed: {cv.seed}")
    _emit(lines)
    if args.out:
        mapping = {f"fold_{i + 1}": a for i, a in enumerate(cv.fold_accuracies)}
        mapping.update(mean=cv.mean, sd=cv.sd, seed=cv.seed, k=cv.k)
        _write_kv(args.out, mapping)
    return 0


def cmd_evaluate(args) -> int:
    model, schema = load(args.model_file)
    result = _load_records(args)
    matrix = encode(result.records, schema)
    predicted = _predict_labels(model, matrix)
    cm = confusion(matrix.labels, predicted, args.positive_class)
    report = metrics(cm)
    _emit(report_lines(report))
    if args.out:
        _write_kv(args.out, report_mapping(report))
    return 0


def cmd_roc(args) -> int:
    model, schema = load(args.model_file)
    result = _load_records(args)
    matrix = encode(result.records, schema)
    scores = [_predict_one(model, r)[1] for r in matrix.rows]
    curve = roc(matrix.labels, scores, args.positive_class)
    lines = ["fpr,tpr"] + [f"{_fmt(fpr)},{_fmt(tpr)}" for fpr, tpr in curve.points]
    if args.out:
        _emit(lines, args.out)
    else:
        _emit(lines)
    print(f"auc: {curve.auc:.4f}")
    return 0


def cmd_compare(args) -> int:
    seed = _resolve_seed(args)
    result = _load_records(args)
    matrix = encode(result.records)
    train, test = split(matrix, SplitSpec(train_fraction=args.train_frac, seed=seed))
    rows = []
    mapping = {"seed": seed}
    for kind, title in (("c45", "C4.5"), ("rf", "Random Forest"), ("mlp", "Neural Network")):
        model = _fit_model(kind, train, args, seed)
        predicted = _predict_labels(model, test)
        report = metrics(confusion(test.labels, predicted, args.positive_class))
        rows.append((title, report.accuracy, report.sensitivity, report.specificity))
        mapping[f"{kind}_accuracy"] = report.accuracy
        mapping[f"{kind}_sensitivity"] = report.sensitivity
        mapping[f"{kind}_specificity"] = report.specificity
    lines = [f"{'Model':<16}{'Accuracy':>10}{'Sensitivity':>13}{'Specificity':>13}"]
    for title, acc, sens, spec in rows:
        lines.append(f"{title:<16}{acc:>10.4f}{sens:>13.4f}{spec:>13.4f}")
    lines.append(f"seed: {seed}")
    _emit(lines)
    if args.out:
        _write_kv(args.out, mapping)
    return 0


def cmd_predict(args) -> int:
    model, _schema = load(args.model_file)
    if args.input == "-":
        payload = json.load(sys.stdin)
    else:
        with open(args.input, encoding="utf-8") as fh:
            payload = json.load(fh)
    record = record_from_payload(payload)
    row, warnings = encode_record(record, model.schema)
    label, score = _predict_one(model, row)
    rule_label = derive_label(record.qchat_score)
    out = {
        "qchat_score": record.qchat_score,
        "qchat_label": rule_label,
        "label": label,
        "score": score,
        "model_kind": model_kind(model),
        "model_id": model_digest(args.model_file),
        "warnings": warnings,
        "rule_model_disagree": label != rule_label,
    }
    sys.stdout.write(json.dumps(out, indent=2) + "\n")
    return 0


def cmd_synth(args) -> int:
    seed = _resolve_seed(args)
    records = generate(args.n, seed=seed, target_prevalence=args.prevalence)
    write_csv(args.out, records)
    share = sum(1 for r in records if r.label == "Yes") / len(records)
    print(f"wrote {len(records)} rows to {args.out} (positive share {share:.4f}, seed {seed})")
    return 0


def cmd_serve(args) -> int:
    from .serve import run

    origins = args.cors_origin or None
    run(args.model_file, host=args.host, port=args.port, cors_origins=origins)
    return 0


def build_parser() -> _Parser:
    parser = _Parser(prog="screenlab", description=__doc__,
                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("ingest", help="validate a CSV and report consistency")
    _add_data_flags(p)
    p.add_argument("--out", help="write the accepted rows back out as CSV")
    p.add_argument("--report", help="write the consistency report to a file")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("eda", help="label, sex, and ethnicity proportions")
    _add_data_flags(p)
    p.add_argument("--out", help="machine-readable key=value output")
    p.set_defaults(func=cmd_eda)

    p = sub.add_parser("train", help="split, fit a model, write the model file")
    _add_data_flags(p)
    _add_model_flags(p)
    p.add_argument("--train-frac", type=float, default=0.7)
    p.add_argument("--seed", type=int)
    p.add_argument("--out", default="model.json")
    p.add_argument("--log", help="also write the training log to a file")
    p.add_argument("--test-out", help="write the held-out test rows as CSV")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("cv", help="stratified k-fold cross-validation")
    _add_data_flags(p)
    _add_model_flags(p)
    p.add_argument("--k", type=int, default=5)
    p.add_argument("--seed", type=int)
    p.add_argument("--out", help="machine-readable key=value output")
    p.set_defaults(func=cmd_cv)

    p = sub.add_parser("evaluate", help="score a model file against a dataset")
    _add_data_flags(p)
    p.add_argument("--model-file", required=True)
    p.add_argument("--positive-class", default="Yes", choices=("Yes", "No"))
    p.add_argument("--out", help="machine-readable key=value output")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("roc", help="ROC points and AUC for a model file")
    _add_data_flags(p)
    p.add_argument("--model-file", required=True)
    p.add_argument("--positive-class", default="Yes", choices=("Yes", "No"))
    p.add_argument("--out", help="write points as CSV")
    p.set_defaults(func=cmd_roc)

    p = sub.add_parser("compare", help="train the three candidates, print the comparison grid")
    _add_data_flags(p)
    p.add_argument("--train-frac", type=float, default=0.7)
    p.add_argument("--seed", type=int)
    p.add_argument("--positive-class", default="Yes", choices=("Yes", "No"))
    p.add_argument("--out", help="machine-readable key=value output")
    # model hyperparameters reuse the train defaults
    p.add_argument("--trees", type=int)
    p.add_argument("--mtry", type=int)
    p.add_argument("--min-leaf", type=int)
    p.add_argument("--max-depth", type=int)
    p.add_argument("--prune", action=argparse.BooleanOptionalAction, default=None)
    p.add_argument("--prune-confidence", type=float, default=0.25)
    p.add_argument("--epochs", type=int, default=100000)
    p.add_argument("--stop-threshold", type=float, default=0.01)
    p.add_argument("--algorithm", choices=(RPROP, GRADIENT_DESCENT), default=RPROP)
    p.add_argument("--learning-rate", type=float, default=0.01)
    p.add_argument("--restarts", type=int, default=1)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("predict", help="classify one record with a model file")
    p.add_argument("--model-file", required=True)
    p.add_argument("--input", required=True, help="JSON payload file, or - for stdin")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("synth", help="generate a synthetic dataset CSV")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--prevalence", type=float, default=0.69)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("serve", help="start the HTTP prediction service")
    p.add_argument("--model-file", required=True)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8080)
    p.add_argument("--cors-origin", action="append",
                   help="origin allowed for cross-site requests (repeatable)")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    try:
        return args.func(args)
    except UsageError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    except (ValidationError, IngestError, PersistError, OSError, json.JSONDecodeError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    except KeyboardInterrupt:
        return 2
    except Exception as err:  # pragma: no cover - defensive
        print(f"unexpected failure: {type(err).__name__}: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
