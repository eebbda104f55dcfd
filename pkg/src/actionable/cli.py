"""Command-line pipeline: ingest -> build-dataset -> train -> eval/predict.

Exit codes are fixed for scripting: 0 success, 2 invalid arguments or
values, 3 I/O failures, 4 empty dataset (no positives survived filtering),
5 embedding backend unavailable. Every command writes a manifest next to
its artifacts recording config, seeds, inputs, and output hashes.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from . import __version__
from .corpus import CorpusFormat, CorpusSpec, CsvSchemaError, load_corpus
from .dataset import (
    EmptyDataset,
    FunnelCounts,
    LabeledDataset,
    LabeledExample,
    RatioError,
    SPLIT_NAMES,
    SplitRatios,
    assemble_dataset,
    assign_split,
    load_dataset_jsonl,
    weak_label,
    write_dataset_jsonl,
)
from .dense import (
    DenseHead,
    ThresholdMode,
    TrainConfig,
    classify_batch,
    forward_batch,
    load_head,
    save_head,
    train,
)
from .embeddings import (
    BackendConfig,
    BackendKind,
    BackendUnavailable,
    EmbeddingClient,
)
from .filters import FilterConfig, apply_filters, default_lexicon_dir, load_lexicon
from .forest import (
    Forest,
    ForestParams,
    forest_from_json,
    forest_to_json,
    predict_forest_batch,
    train_forest,
)
from .manifest import manifest_path_for, write_manifest
from .metrics import MetricsReport, confusion, emit_report, metrics, report_to_json
from .segment import Sentence, split_sentences, tokenize
from .tfidf import TfidfModel, fit_vocabulary, tfidf_from_json, tfidf_to_json, tfidf_transform_batch

FOREST_THRESHOLD = 0.5


def load_config(path: Path | str) -> dict[str, str]:
    """Flat key=value config file; # starts a comment; later keys win."""
    conf: dict[str, str] = {}
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected key = value, got {line!r}")
        key, _, value = line.partition("=")
        conf[key.strip()] = value.strip()
    return conf


def _parse_bool(value: str) -> bool:
    if value.lower() in ("true", "1", "yes"):
        return True
    if value.lower() in ("false", "0", "no"):
        return False
    raise ValueError(f"not a boolean: {value!r}")


def _filter_config(conf: dict[str, str], lexicon_dir: Path) -> FilterConfig:
    lexicon = load_lexicon(lexicon_dir)
    kwargs = {}
    if "min_tokens" in conf:
        kwargs["min_tokens"] = int(conf["min_tokens"])
    if "max_tokens" in conf:
        kwargs["max_tokens"] = int(conf["max_tokens"])
    if "min_action_ratio" in conf:
        kwargs["min_action_ratio"] = float(conf["min_action_ratio"])
    if "allow_imperative_as_pronoun_pass" in conf:
        kwargs["allow_imperative_as_pronoun_pass"] = _parse_bool(
            conf["allow_imperative_as_pronoun_pass"]
        )
    return FilterConfig(lexicon=lexicon, **kwargs)


def _train_config(conf: dict[str, str], seed: int) -> TrainConfig:
    kwargs: dict = {"seed": seed}
    for key, cast in (
        ("epochs", int),
        ("batch_size", int),
        ("dropout_rate", float),
        ("learning_rate", float),
        ("beta1", float),
        ("beta2", float),
        ("epsilon", float),
        ("threshold", float),
    ):
        if key in conf:
            kwargs[key] = cast(conf[key])
    if "threshold_mode" in conf:
        kwargs["threshold_mode"] = ThresholdMode(conf["threshold_mode"])
    return TrainConfig(**kwargs)


def _forest_params(conf: dict[str, str]) -> ForestParams:
    kwargs: dict = {}
    if "n_trees" in conf:
        kwargs["n_trees"] = int(conf["n_trees"])
    if "max_depth" in conf:
        kwargs["max_depth"] = int(conf["max_depth"])
    if "min_samples_split" in conf:
        kwargs["min_samples_split"] = int(conf["min_samples_split"])
    if "feature_subsample" in conf:
        kwargs["feature_subsample"] = int(conf["feature_subsample"])
    return ForestParams(**kwargs)


def _backend_config(args: argparse.Namespace) -> BackendConfig:
    endpoint = args.endpoint or os.environ.get("ACTIONABLE_EMBED_ENDPOINT", "")
    return BackendConfig(
        kind=BackendKind(args.backend),
        dim=args.dim,
        seed=args.stub_seed,
        endpoint=endpoint,
        cache_path=Path(args.cache) if args.cache else None,
    )


def _doc_tokens(text: str) -> list[str]:
    return [t.lower for t in tokenize(text)]


def _evaluate(
    prob_fn: Callable[[Sequence[str]], np.ndarray],
    dataset: LabeledDataset,
    threshold: float,
    model_name: str,
    prf_split: str,
) -> MetricsReport:
    """Accuracy on every split, precision/recall/f1 on the chosen one."""
    accuracy: dict[str, float] = {}
    prf = (0.0, 0.0, 0.0)
    for split_name in SPLIT_NAMES:
        subset = dataset.subset(split_name)
        if not subset:
            accuracy[split_name] = 0.0
            continue
        probs = prob_fn([ex.text for ex in subset])
        preds = classify_batch(np.asarray(probs), threshold)
        truth = [ex.label for ex in subset]
        accuracy[split_name] = float(np.mean(preds == np.asarray(truth)))
        if split_name == prf_split:
            sm = metrics(confusion(list(preds), truth))
            prf = (sm.precision, sm.recall, sm.f1)
    return MetricsReport(
        accuracy=accuracy,
        precision=prf[0],
        recall=prf[1],
        f1=prf[2],
        threshold=threshold,
        model=model_name,
    )


def _embed_texts(dataset: LabeledDataset, backend: BackendConfig) -> dict[str, np.ndarray]:
    texts = sorted({ex.text for ex in dataset.examples})
    client = EmbeddingClient(backend)
    vectors = client.embed(texts)
    return dict(zip(texts, vectors))


def cmd_ingest(args: argparse.Namespace) -> int:
    started = time.time()
    fmt = CorpusFormat.MAILDIR_TREE if args.format == "maildir" else CorpusFormat.CSV
    spec = CorpusSpec(root=Path(args.corpus), format=fmt, limit=args.limit)
    messages = load_corpus(spec)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    count = 0
    with open(out, "w", encoding="utf-8") as fh:
        for msg in messages:
            for sent in split_sentences(msg.body, msg.id):
                fh.write(
                    json.dumps({"origin": sent.origin, "text": sent.text}, sort_keys=True)
                    + "\n"
                )
                count += 1
    write_manifest(
        manifest_path_for(out),
        command="ingest",
        config={"format": args.format, "limit": args.limit},
        seeds={},
        inputs=[args.corpus],
        outputs=[out],
        started=started,
    )
    print(f"{len(messages)} messages -> {count} sentences -> {out}")
    return 0


def cmd_build_dataset(args: argparse.Namespace) -> int:
    started = time.time()
    conf = load_config(args.config) if args.config else {}
    lexicon_dir = Path(args.lexicon_dir) if args.lexicon_dir else default_lexicon_dir()
    fcfg = _filter_config(conf, lexicon_dir)
    balance = args.balance if args.balance is not None else float(conf.get("balance", 1.0))
    ratios = SplitRatios(*(float(r) for r in args.ratios.split(",")))

    examples: list[LabeledExample] = []
    funnel = FunnelCounts()
    with open(args.sentences, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            record = json.loads(line)
            sentence = Sentence(
                text=record["text"],
                tokens=tuple(tokenize(record["text"])),
                origin=record.get("origin", ""),
            )
            verdict = apply_filters(sentence, fcfg)
            funnel.record(verdict)
            examples.append(
                LabeledExample(
                    text=sentence.text,
                    label=weak_label(verdict),
                    origin=sentence.origin,
                    trace=verdict,
                )
            )

    dataset = assemble_dataset(examples, balance, args.seed)
    dataset = assign_split(dataset, ratios, args.seed)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    write_dataset_jsonl(dataset, out)
    funnel_path = out.parent / (out.stem + ".funnel.json")
    funnel_payload = funnel.as_dict() | {
        "kept": len(dataset.examples),
        "negative_shortfall": dataset.negative_shortfall,
    }
    funnel_path.write_text(
        json.dumps(funnel_payload, sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )
    write_manifest(
        manifest_path_for(out),
        command="build-dataset",
        config={
            "min_tokens": fcfg.min_tokens,
            "max_tokens": fcfg.max_tokens,
            "min_action_ratio": fcfg.min_action_ratio,
            "allow_imperative_as_pronoun_pass": fcfg.allow_imperative_as_pronoun_pass,
            "balance": balance,
            "ratios": args.ratios,
            "lexicon_dir": str(lexicon_dir),
        },
        seeds={"dataset": args.seed},
        inputs=[args.sentences],
        outputs=[out, funnel_path],
        started=started,
    )
    rej = funnel.rejected
    print(
        f"{funnel.total} sentences: {funnel.passed} passed, "
        + ", ".join(f"{k}={v}" for k, v in sorted(rej.items()))
        + f"; kept {len(dataset.examples)} -> {out}"
    )
    return 0


def _forest_prob_fn(tfidf: TfidfModel, forest: Forest) -> Callable[[Sequence[str]], np.ndarray]:
    def fn(texts: Sequence[str]) -> np.ndarray:
        X = tfidf_transform_batch([_doc_tokens(t) for t in texts], tfidf)
        return predict_forest_batch(forest, X)

    return fn


def _dense_prob_fn(
    head: DenseHead, embeddings: dict[str, np.ndarray]
) -> Callable[[Sequence[str]], np.ndarray]:
    def fn(texts: Sequence[str]) -> np.ndarray:
        X = np.stack([embeddings[t] for t in texts])
        return forward_batch(X, head)[0]

    return fn


def cmd_train(args: argparse.Namespace) -> int:
    started = time.time()
    conf = load_config(args.config) if args.config else {}
    dataset = load_dataset_jsonl(args.dataset, seed=args.seed)
    train_set = dataset.subset("train")
    val_set = dataset.subset("val")
    if not train_set:
        raise EmptyDataset("dataset has no training examples")
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    model_path = out_dir / "model.json"
    outputs = [model_path]

    if args.model == "forest":
        params = _forest_params(conf)
        docs_train = [_doc_tokens(ex.text) for ex in train_set]
        tfidf = fit_vocabulary(docs_train)
        X_train = tfidf_transform_batch(docs_train, tfidf)
        y_train = np.array([ex.label for ex in train_set])
        forest = train_forest(X_train, y_train, params, args.seed)
        model_path.write_text(
            json.dumps(
                {
                    "format_version": 1,
                    "tfidf": tfidf_to_json(tfidf),
                    "forest": forest_to_json(forest),
                },
                sort_keys=True,
            )
            + "\n",
            encoding="utf-8",
        )
        report = _evaluate(
            _forest_prob_fn(tfidf, forest), dataset, FOREST_THRESHOLD, "forest", "val"
        )
        metrics_path = out_dir / "metrics.json"
        metrics_path.write_text(
            json.dumps(report_to_json(report), sort_keys=True, indent=2) + "\n",
            encoding="utf-8",
        )
        outputs.append(metrics_path)
        config_snapshot: dict = {
            "model": "forest",
            "n_trees": params.n_trees,
            "max_depth": params.max_depth,
            "min_samples_split": params.min_samples_split,
            "feature_subsample": params.feature_subsample,
        }
    else:
        backend = _backend_config(args)
        tcfg = _train_config(conf, args.seed)
        embeddings = _embed_texts(dataset, backend)
        head, history, threshold = train(train_set, val_set, embeddings, tcfg)
        save_head(model_path, head, threshold)
        report = _evaluate(
            _dense_prob_fn(head, embeddings), dataset, threshold, "dense_head", "val"
        )
        metrics_path, history_path = emit_report(report, history, out_dir)
        outputs += [metrics_path, history_path]
        config_snapshot = {
            "model": "dense",
            "backend": backend.backend_id,
            "epochs": tcfg.epochs,
            "batch_size": tcfg.batch_size,
            "dropout_rate": tcfg.dropout_rate,
            "learning_rate": tcfg.learning_rate,
            "threshold_mode": tcfg.threshold_mode.value,
            "threshold": threshold,
        }

    write_manifest(
        out_dir / "manifest.json",
        command="train",
        config=config_snapshot,
        seeds={"train": args.seed},
        inputs=[args.dataset],
        outputs=outputs,
        started=started,
    )
    print(
        f"{args.model}: val accuracy {report.accuracy['val']:.3f}, "
        f"f1 {report.f1:.3f} -> {out_dir}"
    )
    return 0


def _load_model(path: Path):
    """Returns ("forest", tfidf, forest) or ("dense", head, threshold)."""
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    if "tfidf" in data:
        return "forest", tfidf_from_json(data["tfidf"]), forest_from_json(data["forest"])
    head, threshold = load_head(path)
    return "dense", head, threshold


def cmd_eval(args: argparse.Namespace) -> int:
    started = time.time()
    dataset = load_dataset_jsonl(args.dataset)
    kind, first, second = _load_model(Path(args.model))
    if kind == "forest":
        prob_fn = _forest_prob_fn(first, second)
        threshold = FOREST_THRESHOLD
        model_name = "forest"
    else:
        head, threshold = first, second
        backend = _backend_config(args)
        if backend.kind is BackendKind.STUB and backend.dim != head.d:
            backend = BackendConfig(
                kind=BackendKind.STUB,
                dim=head.d,
                seed=backend.seed,
                cache_path=backend.cache_path,
            )
        embeddings = _embed_texts(dataset, backend)
        prob_fn = _dense_prob_fn(head, embeddings)
        model_name = "dense_head"
    report = _evaluate(prob_fn, dataset, threshold, model_name, args.split)
    out_dir = Path(args.out)
    metrics_path, history_path = emit_report(report, [], out_dir)
    write_manifest(
        out_dir / "manifest.json",
        command="eval",
        config={"split": args.split, "model": model_name},
        seeds={},
        inputs=[args.model, args.dataset],
        outputs=[metrics_path, history_path],
        started=started,
    )
    print(
        f"{model_name} on {args.split}: accuracy {report.accuracy[args.split]:.3f}, "
        f"precision {report.precision:.3f}, recall {report.recall:.3f}, f1 {report.f1:.3f}"
    )
    return 0


def cmd_predict(args: argparse.Namespace) -> int:
    text = args.text
    if not text or not text.strip():
        print("error: --text must be a nonempty sentence", file=sys.stderr)
        return 2
    kind, first, second = _load_model(Path(args.model))
    if kind == "forest":
        prob = float(_forest_prob_fn(first, second)([text])[0])
        threshold = FOREST_THRESHOLD
    else:
        head, threshold = first, second
        backend = _backend_config(args)
        if backend.kind is BackendKind.STUB and backend.dim != head.d:
            backend = BackendConfig(kind=BackendKind.STUB, dim=head.d, seed=backend.seed)
        client = EmbeddingClient(backend)
        vec = client.embed([text])[0]
        prob = float(forward_batch(vec[None, :], head)[0][0])
    label = 1 if prob >= threshold else 0
    print(f"{prob:.6f} {label}")
    return 0


def _add_backend_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--backend", choices=["stub", "remote"], default="stub")
    parser.add_argument(
        "--endpoint",
        default="",
        help="remote backend URL; defaults to $ACTIONABLE_EMBED_ENDPOINT",
    )
    parser.add_argument("--dim", type=int, default=512, help="stub embedding dimension")
    parser.add_argument("--stub-seed", type=int, default=0, help="stub hash seed")
    parser.add_argument("--cache", default="", help="embedding cache JSONL path")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="actionable",
        description="Email corpus to actionable-sentence classifier pipeline.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="parse a corpus into sentences JSONL")
    p.add_argument("--corpus", required=True)
    p.add_argument("--format", choices=["maildir", "csv"], default="maildir")
    p.add_argument("--limit", type=int, default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("build-dataset", help="filter, weak-label, balance, split")
    p.add_argument("--sentences", required=True)
    p.add_argument("--lexicon-dir", default="")
    p.add_argument("--config", default="")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--balance", type=float, default=None)
    p.add_argument("--ratios", default="0.72,0.08,0.20")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_build_dataset)

    p = sub.add_parser("train", help="train a classifier on a dataset")
    p.add_argument("--dataset", required=True)
    p.add_argument("--model", choices=["forest", "dense"], required=True)
    p.add_argument("--config", default="")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    _add_backend_flags(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="evaluate a trained model on a split")
    p.add_argument("--model", required=True)
    p.add_argument("--dataset", required=True)
    p.add_argument("--split", choices=list(SPLIT_NAMES), default="test")
    p.add_argument("--out", required=True)
    _add_backend_flags(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("predict", help="score one sentence with a trained model")
    p.add_argument("--model", required=True)
    p.add_argument("--text", required=True)
    _add_backend_flags(p)
    p.set_defaults(func=cmd_predict)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except BackendUnavailable as exc:
        print(f"error: embedding backend unavailable: {exc}", file=sys.stderr)
        return 5
    except EmptyDataset as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except (FileNotFoundError, NotADirectoryError, CsvSchemaError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (RatioError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
