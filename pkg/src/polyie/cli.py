"""Command-line surface: every subcommand is a thin shell over the library.

Stages communicate through JSONL files so any stage can be replaced by an
external tool. Exit codes: 0 success, 2 user/validation error, 3 transport
error.
"""

from __future__ import annotations

import hashlib
import json
import sys
from datetime import datetime, timezone
from importlib.metadata import PackageNotFoundError, version

import click

from . import dataset as ds
from . import gateway, metrics, parsing
from .compiler import (
    CodePrompt,
    InvalidInstanceError,
    PromptStyle,
    compile_prompt,
    render_gold_output,
)
from .model import Dialect, load_dataset, validate_instance

EXIT_USER = 2
EXIT_TRANSPORT = 3

_STYLES = {
    "function": PromptStyle.FUNCTION,
    "function-no-virtual-run": PromptStyle.FUNCTION_NO_VIRTUAL_RUN,
    "class": PromptStyle.CLASS,
}


def _tool_version() -> str:
    try:
        return version("polyie")
    except PackageNotFoundError:
        return "unknown"


def _fail(code: int, message: str) -> None:
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _parse_dialects(spec: str) -> list[Dialect]:
    out = []
    for name in spec.split(","):
        name = name.strip().upper()
        if not name:
            continue
        try:
            out.append(Dialect(name))
        except ValueError:
            _fail(EXIT_USER, f"unknown dialect {name!r} (expected py, cpp, java)")
    if not out:
        _fail(EXIT_USER, "no dialects given")
    return out


def _write_manifest(out_path: str, command: str, inputs: list[str], params: dict, seed=None) -> None:
    digest = hashlib.sha256(
        json.dumps(params, sort_keys=True, default=str).encode("utf-8")
    ).hexdigest()
    manifest = {
        "command": command,
        "config_digest": digest,
        "inputs": inputs,
        "outputs": [out_path],
        "seed": seed,
        "timestamp": datetime.now(timezone.utc).isoformat(),
        "tool_version": _tool_version(),
    }
    ds.atomic_write_text(out_path + ".manifest.json", json.dumps(manifest, indent=2) + "\n")


def _load_config(path: str) -> dict:
    """Simple key=value file mirroring the CLI flags."""
    out = {}
    with open(path, encoding="utf-8") as f:
        for lineno, raw in enumerate(f, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise click.UsageError(f"{path}:{lineno}: expected key=value")
            key, value = line.split("=", 1)
            out[key.strip().replace("-", "_")] = value.strip()
    return out


@click.group()
@click.option("--config", "config_path", type=click.Path(exists=True), default=None,
              help="Optional key=value file providing flag defaults.")
@click.pass_context
def main(ctx, config_path):
    """Compile IE tasks into code-style prompts, parse completions, and score."""
    if config_path:
        cfg = _load_config(config_path)
        ctx.default_map = {cmd: cfg for cmd in main.commands}


def _load_dataset_checked(path):
    try:
        schema, instances = load_dataset(path)
    except (OSError, ValueError, KeyError) as exc:
        _fail(EXIT_USER, f"cannot load dataset {path}: {exc}")
    violations = []
    for inst in instances:
        violations.extend(validate_instance(inst, schema))
    if violations:
        for v in violations:
            click.echo(f"validation: instance {v.instance_id}: {v.message}", err=True)
        _fail(EXIT_USER, f"{len(violations)} validation error(s) in {path}")
    return schema, instances


@main.command("compile")
@click.argument("dataset_path", type=click.Path(exists=True))
@click.option("--dialects", default="py,cpp,java", show_default=True)
@click.option("--style", type=click.Choice(sorted(_STYLES)), default="function", show_default=True)
@click.option("--out", required=True, type=click.Path())
def cmd_compile(dataset_path, dialects, style, out):
    """Render prompts and gold completions to JSONL."""
    schema, instances = _load_dataset_checked(dataset_path)
    dialect_list = _parse_dialects(dialects)
    prompt_style = _STYLES[style]
    records = []
    lengths = []
    for inst in instances:
        for dialect in dialect_list:
            prompt = compile_prompt(inst, schema, dialect, prompt_style)
            gold = render_gold_output(inst, schema, dialect)
            lengths.append(len(prompt.text))
            records.append(
                {
                    "id": inst.id,
                    "dialect": dialect.value,
                    "style": prompt_style.value,
                    "prompt": prompt.text,
                    "boundary": prompt.boundary,
                    "gold_completion": gold.text,
                }
            )
    ds.write_jsonl(out, records)
    _write_manifest(out, "compile", [dataset_path],
                    {"dialects": dialects, "style": style})
    avg = sum(lengths) / len(lengths) if lengths else 0.0
    click.echo(f"wrote {len(records)} prompts to {out} (avg length {avg:.1f} chars)")


def _prompts_from_jsonl(path) -> list[dict]:
    try:
        return ds.read_jsonl(path)
    except (OSError, ValueError) as exc:
        _fail(EXIT_USER, f"cannot read {path}: {exc}")


@main.command("infer")
@click.argument("prompts_path", type=click.Path(exists=True))
@click.option("--dataset", "dataset_path", type=click.Path(exists=True), default=None,
              help="Dataset file; required for --mock.")
@click.option("--mock", is_flag=True, default=False)
@click.option("--endpoint", default=None)
@click.option("--model", default="default")
@click.option("--seed", type=int, default=None)
@click.option("--drop-rate", type=float, default=0.0, show_default=True)
@click.option("--spurious-rate", type=float, default=0.0, show_default=True)
@click.option("--max-tokens", type=int, default=512, show_default=True)
@click.option("--temperature", type=float, default=0.0, show_default=True)
@click.option("--timeout", type=float, default=30.0, show_default=True)
@click.option("--max-concurrent", type=int, default=4, show_default=True)
@click.option("--max-attempts", type=int, default=3, show_default=True)
@click.option("--backoff-base", type=float, default=0.5, show_default=True)
@click.option("--out", required=True, type=click.Path())
def cmd_infer(prompts_path, dataset_path, mock, endpoint, model, seed, drop_rate,
              spurious_rate, max_tokens, temperature, timeout, max_concurrent,
              max_attempts, backoff_base, out):
    """Obtain completions for compiled prompts (mock model or HTTP endpoint)."""
    prompt_records = _prompts_from_jsonl(prompts_path)
    completions = []
    if mock:
        if dataset_path is None:
            _fail(EXIT_USER, "--mock requires --dataset")
        if seed is None:
            _fail(EXIT_USER, "--mock requires --seed")
        schema, instances = _load_dataset_checked(dataset_path)
        by_id = {inst.id: inst for inst in instances}
        cfg = gateway.MockModelConfig(drop_rate=drop_rate, spurious_rate=spurious_rate, seed=seed)
        for rec in prompt_records:
            inst = by_id.get(rec["id"])
            if inst is None:
                _fail(EXIT_USER, f"prompt id {rec['id']!r} not in dataset")
            dialect = Dialect(rec["dialect"])
            completions.append(
                {"id": inst.id, "dialect": dialect.value,
                 "completion": gateway.complete_mock(inst, schema, dialect, cfg)}
            )
    else:
        if not endpoint:
            _fail(EXIT_USER, "either --mock or --endpoint is required")
        cfg = gateway.GatewayConfig(
            endpoint=endpoint, model=model, max_tokens=max_tokens,
            temperature=temperature, timeout=timeout, max_concurrent=max_concurrent,
            max_attempts=max_attempts, backoff_base=backoff_base,
        )
        prompts = [
            CodePrompt(
                dialect=Dialect(rec["dialect"]),
                style=PromptStyle(rec.get("style", "FUNCTION")),
                text=rec["prompt"],
                boundary=rec["boundary"],
                instance_id=rec["id"],
            )
            for rec in prompt_records
        ]
        try:
            results = gateway.complete_remote_batch(prompts, cfg)
        except (gateway.TransportError, gateway.RequestFailed) as exc:
            _fail(EXIT_TRANSPORT, str(exc))
        for rec in prompt_records:
            key = (rec["id"], Dialect(rec["dialect"]))
            completions.append(
                {"id": rec["id"], "dialect": rec["dialect"], "completion": results[key]}
            )
    ds.write_jsonl(out, completions)
    _write_manifest(out, "infer", [prompts_path] + ([dataset_path] if dataset_path else []),
                    {"mock": mock, "endpoint": endpoint, "drop_rate": drop_rate,
                     "spurious_rate": spurious_rate}, seed=seed)
    click.echo(f"wrote {len(completions)} completions to {out}")


@main.command("parse")
@click.argument("completions_path", type=click.Path(exists=True))
@click.argument("dataset_path", type=click.Path(exists=True))
@click.option("--out", required=True, type=click.Path())
def cmd_parse(completions_path, dataset_path, out):
    """Parse completions into prediction JSONL."""
    schema, _ = _load_dataset_checked(dataset_path)
    records = _prompts_from_jsonl(completions_path)
    predictions = []
    n_diag = 0
    for rec in records:
        pred = parsing.parse_completion(
            rec["completion"], Dialect(rec["dialect"]), schema, instance_id=rec["id"]
        )
        n_diag += len(pred.diagnostics)
        predictions.append(parsing.prediction_to_json(pred))
    ds.write_jsonl(out, predictions)
    _write_manifest(out, "parse", [completions_path, dataset_path], {})
    click.echo(f"wrote {len(predictions)} prediction sets to {out} ({n_diag} diagnostics)")


@main.command("score")
@click.argument("predictions_path", type=click.Path(exists=True))
@click.argument("dataset_path", type=click.Path(exists=True))
@click.option("--ensemble", type=click.Choice(["vote", "union", "oracle-recall", "none"]),
              default="vote", show_default=True)
@click.option("--threshold", type=int, default=None, help="Voting threshold (default: majority).")
@click.option("--jaccard-mode", type=click.Choice(["macro", "micro"]), default="macro",
              show_default=True)
@click.option("--out", required=True, type=click.Path())
@click.option("--fig", "fig_path", type=click.Path(), default=None,
              help="Also render a Micro-F1 bar chart to this image file.")
def cmd_score(predictions_path, dataset_path, ensemble, threshold, jaccard_mode, out, fig_path):
    """Score predictions against gold with per-dialect and ensemble Micro-F1."""
    schema, instances = _load_dataset_checked(dataset_path)
    golds = {inst.id: frozenset(inst.gold) for inst in instances}
    preds_flat: dict[Dialect, dict[str, frozenset]] = {d: {} for d in Dialect}
    for rec in _prompts_from_jsonl(predictions_path):
        pred = parsing.prediction_from_json(rec)
        preds_flat[pred.dialect][pred.instance_id] = pred.annotations

    present = [d for d in Dialect if preds_flat[d]]
    report = {
        "task": schema.task.value,
        "n_instances": len(instances),
        "per_dialect": {
            d.value: metrics.micro_f1(preds_flat[d], golds).to_json() for d in present
        },
    }
    if ensemble != "none":
        if len(present) != len(Dialect):
            _fail(EXIT_USER,
                  f"ensemble scoring needs all dialects; found {[d.value for d in present]}")
        triples = {
            iid: {d: preds_flat[d].get(iid, frozenset()) for d in Dialect}
            for iid in golds
        }
        voted = {iid: metrics.vote([per[d] for d in Dialect], threshold)
                 for iid, per in triples.items()}
        unioned = {iid: metrics.union_agg([per[d] for d in Dialect])
                   for iid, per in triples.items()}
        report["voting"] = metrics.micro_f1(voted, golds).to_json()
        report["union"] = metrics.micro_f1(unioned, golds).to_json()
        report["oracle_recall"] = metrics.oracle_recall_score(triples, golds).to_json()
        pairs = metrics.pairwise_jaccard(triples)
        report["jaccard"] = {
            "pairs": {f"{a.value}-{b.value}": v for (a, b), v in pairs.items()},
            "mean": metrics.dataset_jaccard(triples, mode=jaccard_mode),
            "mode": jaccard_mode,
        }
        report["union_voting_gap"] = metrics.union_voting_gap(triples, golds, threshold)
    ds.atomic_write_text(out, json.dumps(report, indent=2) + "\n")
    _write_manifest(out, "score", [predictions_path, dataset_path],
                    {"ensemble": ensemble, "jaccard_mode": jaccard_mode})
    if fig_path:
        from .figures import plot_score_report

        plot_score_report(report, fig_path)
        click.echo(f"figure written to {fig_path}")
    for d in present:
        click.echo(f"{d.value:5s} F1 {report['per_dialect'][d.value]['f1']:.4f}")
    if ensemble == "vote":
        click.echo(f"vote  F1 {report['voting']['f1']:.4f}")
    elif ensemble == "union":
        click.echo(f"union F1 {report['union']['f1']:.4f}")
    elif ensemble == "oracle-recall":
        click.echo(f"oracle F1 {report['oracle_recall']['f1']:.4f}")
    click.echo(f"report written to {out}")


@main.command("stats")
@click.argument("prompts_path", type=click.Path(exists=True))
@click.option("--unit", type=click.Choice(["chars", "ws_tokens"]), default="chars",
              show_default=True)
@click.option("--bucket-width", type=int, default=100, show_default=True)
@click.option("--token-counts", "token_counts_path", type=click.Path(exists=True), default=None,
              help="TSV of id<TAB>count overriding the computed unit.")
@click.option("--out", required=True, type=click.Path())
@click.option("--fig", "fig_path", type=click.Path(), default=None,
              help="Also render the histogram to this image file.")
def cmd_stats(prompts_path, unit, bucket_width, token_counts_path, out, fig_path):
    """Prompt-length histogram as JSON, a text table, and optionally a figure."""
    records = _prompts_from_jsonl(prompts_path)
    prompts = [
        CodePrompt(
            dialect=Dialect(rec["dialect"]),
            style=PromptStyle(rec.get("style", "FUNCTION")),
            text=rec["prompt"],
            boundary=rec["boundary"],
            instance_id=rec["id"],
        )
        for rec in records
    ]
    token_counts = None
    if token_counts_path:
        token_counts = ds.read_token_counts(token_counts_path)
    try:
        hist = ds.length_stats(prompts, unit=unit, bucket_width=bucket_width,
                               token_counts=token_counts)
    except KeyError as exc:
        _fail(EXIT_USER, str(exc))
    ds.atomic_write_text(out, json.dumps(hist.to_json(), indent=2) + "\n")
    _write_manifest(out, "stats", [prompts_path], {"unit": unit, "bucket_width": bucket_width})
    click.echo(f"{'interval':>14s}  {'count':>6s}  {'proportion':>10s}")
    for (lo, hi), count, prop in hist.buckets:
        click.echo(f"{f'[{lo},{hi})':>14s}  {count:6d}  {prop:10.4f}")
    click.echo(f"average {unit}: {hist.average:.2f}")
    if fig_path:
        from .figures import plot_length_histogram

        plot_length_histogram(hist, fig_path)
        click.echo(f"figure written to {fig_path}")


@main.command("export-sft")
@click.argument("dataset_path", type=click.Path(exists=True))
@click.option("--dialects", default="py,cpp,java", show_default=True)
@click.option("--style", type=click.Choice(sorted(_STYLES)), default="function", show_default=True)
@click.option("--seed", type=int, required=True)
@click.option("--out", required=True, type=click.Path())
def cmd_export_sft(dataset_path, dialects, style, seed, out):
    """Export a shuffled SFT corpus plus its manifest."""
    schema, instances = _load_dataset_checked(dataset_path)
    dialect_list = _parse_dialects(dialects)
    try:
        manifest = ds.export_sft(instances, schema, dialect_list, _STYLES[style], seed, out)
    except OSError as exc:
        _fail(EXIT_USER, str(exc))
    ds.atomic_write_text(out + ".manifest.json", json.dumps(manifest, indent=2) + "\n")
    click.echo(
        f"wrote {manifest['total']} records to {out} "
        f"(seed {seed}, sha256 {manifest['sha256'][:12]}...)"
    )


if __name__ == "__main__":
    main()
