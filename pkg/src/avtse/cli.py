"""Command-line entry points tying the modules into reproducible runs."""

from __future__ import annotations

import sys
from pathlib import Path

import click

from .datagen.corpus import build_corpus, load_corpus
from .errors import AvtseError, CorpusError
from .evaluation.conditions import InferenceCondition, evaluate_condition
from .evaluation.report import write_raw_values, write_report_grid, render_violin
from .evaluation.self_enrol import (
    SEGMENT_LABELS,
    compose_self_enrolment_examples,
    self_enrolment_run,
)
from .experiment import freeze_config, resolve_config
from .model.checkpoint import load_checkpoint, save_checkpoint
from .training.loop import train, write_history


def _common_options(fn):
    fn = click.option("--config", "config_path", type=click.Path(exists=True), default=None,
                      help="YAML config file.")(fn)
    fn = click.option("--preset", default=None, help="Named preset (e.g. toy-8k).")(fn)
    fn = click.option("--seed", type=int, default=None, help="Experiment seed override.")(fn)
    fn = click.option("--out", "out_dir", type=click.Path(), default=None,
                      help="Output directory override.")(fn)
    return fn


def _resolve(config_path, preset, seed, extra=None):
    overrides = dict(extra or {})
    if seed is not None:
        overrides["seed"] = seed
    try:
        return resolve_config(preset=preset, config_path=config_path, overrides=overrides)
    except AvtseError as exc:
        raise click.ClickException(str(exc)) from exc


@click.group()
def main():
    """Multi-modal target speaker extraction experiments."""


@main.command("generate-data")
@_common_options
@click.option("--resume", is_flag=True, help="Fill in a partial previous build.")
def cmd_generate_data(config_path, preset, seed, out_dir, resume):
    """Build (or resume) the synthetic corpus."""
    config = _resolve(config_path, preset, seed)
    corpus_dir = Path(out_dir or config.paths.corpus_dir)
    spec_file = corpus_dir / "corpus.yaml"
    if spec_file.exists() and not resume:
        click.echo(f"corpus directory {corpus_dir} already initialized; verifying")
    try:
        corpus, stats = build_corpus(config.corpus, corpus_dir)
    except CorpusError as exc:
        raise click.ClickException(str(exc)) from exc
    freeze_config(config, corpus_dir)
    click.echo(
        f"corpus at {corpus_dir}: {stats.files_written} files written, "
        f"{stats.files_skipped} verified unchanged"
    )
    click.echo(f"manifest sha256 {stats.manifest_sha256}")


@main.command("train")
@_common_options
@click.option("--corpus", "corpus_dir", type=click.Path(), default=None,
              help="Corpus directory (defaults to the configured path).")
@click.option("--strategy", type=click.Choice(["ST", "MTT", "MDT"]), default=None)
@click.option("--resume", is_flag=True, help="Continue from the existing checkpoint.")
def cmd_train(config_path, preset, seed, out_dir, corpus_dir, strategy, resume):
    """Train a model with the configured strategy."""
    extra = {"train": {"strategy": strategy}} if strategy else None
    config = _resolve(config_path, preset, seed, extra)
    corpus_dir = Path(corpus_dir or config.paths.corpus_dir)
    if not (corpus_dir / "corpus.yaml").exists():
        raise click.ClickException(
            f"no corpus at {corpus_dir}; run `avtse generate-data` first"
        )
    corpus = load_corpus(corpus_dir)
    checkpoint_dir = Path(out_dir or config.paths.checkpoint_dir)
    checkpoint_dir.mkdir(parents=True, exist_ok=True)
    ckpt_path = checkpoint_dir / f"mtse_{config.train.strategy.lower()}.pt"

    resume_state = None
    if resume:
        if not ckpt_path.exists():
            raise click.ClickException(f"--resume given but {ckpt_path} does not exist")
        _, _, extra_payload = load_checkpoint(ckpt_path)
        resume_state = extra_payload.get("trainer_state")
        if resume_state is None:
            raise click.ClickException(f"{ckpt_path} carries no trainer state to resume from")

    def progress(rec):
        click.echo(
            f"epoch {rec.epoch:4d}  train {rec.train_loss:8.3f}  "
            f"val {rec.val_loss:8.3f}  lr {rec.lr:.2e}"
        )

    result = train(
        config.model,
        config.train,
        corpus,
        dump_dir=checkpoint_dir,
        resume=resume_state,
        progress=progress,
    )
    save_checkpoint(
        ckpt_path,
        result.model,
        strategy=config.train.strategy,
        extra={
            "trainer_state": result.trainer_state,
            "train_config": config.train.to_dict(),
            "corpus_spec": corpus.spec.to_dict(),
        },
    )
    write_history(checkpoint_dir / f"history_{config.train.strategy.lower()}.tsv", result.history)
    freeze_config(config, checkpoint_dir)
    click.echo(
        f"checkpoint {ckpt_path} (best epoch {result.best_epoch}, "
        f"val loss {result.best_val_loss:.3f})"
    )


@main.command("evaluate")
@_common_options
@click.option("--checkpoint", "ckpt_path", type=click.Path(exists=True), required=True)
@click.option("--corpus", "corpus_dir", type=click.Path(), default=None)
@click.option("--conditions", default=None,
              help="Comma-separated subset of MTSE,AoTSE,VoTSE,MTSE_FD.")
@click.option("--split", default="test", type=click.Choice(["train", "val", "test"]))
@click.option("--plot", is_flag=True, help="Render violin plots (needs matplotlib).")
def cmd_evaluate(config_path, preset, seed, out_dir, ckpt_path, corpus_dir, conditions, split, plot):
    """Evaluate a checkpoint under the inference conditions."""
    config = _resolve(config_path, preset, seed)
    corpus_dir = Path(corpus_dir or config.paths.corpus_dir)
    if not (corpus_dir / "corpus.yaml").exists():
        raise click.ClickException(
            f"no corpus at {corpus_dir}; run `avtse generate-data` first"
        )
    corpus = load_corpus(corpus_dir)
    model, strategy, _ = load_checkpoint(ckpt_path)
    if strategy is None:
        raise click.ClickException(f"{ckpt_path} carries no training-strategy tag")
    report_dir = Path(out_dir or config.paths.report_dir)
    kinds = [c.strip() for c in (conditions or ",".join(config.eval_conditions)).split(",") if c.strip()]

    split_data = corpus.materialize(split)
    examples = [split_data.example(i) for i in range(len(split_data))]
    model_tag = {
        "causal": model.config.causal,
        "strategy": strategy,
        "norm_kind": model.config.norm_kind,
    }
    reports = []
    failures = []
    for kind in kinds:
        try:
            condition = InferenceCondition(kind, strategy, fd_rate=config.fd_rate)
            rep = evaluate_condition(
                model, examples, condition, strategy=strategy,
                seed=config.seed, model_tag=model_tag,
            )
            reports.append(rep)
            write_raw_values(report_dir, rep)
            click.echo(f"{kind:8s} SI-SDRi {rep.mean:6.2f} ± {rep.sd:.2f} dB ({len(rep.values)} examples)")
        except AvtseError as exc:
            failures.append((kind, str(exc)))
            click.echo(f"{kind:8s} FAILED: {exc}", err=True)
    if reports:
        grid = write_report_grid(report_dir / "report_grid.csv", reports)
        click.echo(f"grid written to {grid}")
        if plot:
            png = report_dir / "conditions_violin.png"
            render_violin(png, {r.condition: r.values for r in reports})
            click.echo(f"plot written to {png}")
    freeze_config(config, report_dir)
    if failures:
        sys.exit(1)


@main.command("self-enroll")
@_common_options
@click.option("--checkpoint", "ckpt_path", type=click.Path(exists=True), required=True)
@click.option("--corpus", "corpus_dir", type=click.Path(), default=None)
@click.option("--n-examples", type=int, default=32, show_default=True)
@click.option("--plot", is_flag=True, help="Render the third-segment violin plot.")
def cmd_self_enroll(config_path, preset, seed, out_dir, ckpt_path, corpus_dir, n_examples, plot):
    """Run the self-enrolment protocol on composed long examples."""
    config = _resolve(config_path, preset, seed)
    corpus_dir = Path(corpus_dir or config.paths.corpus_dir)
    if not (corpus_dir / "corpus.yaml").exists():
        raise click.ClickException(
            f"no corpus at {corpus_dir}; run `avtse generate-data` first"
        )
    corpus = load_corpus(corpus_dir)
    model, strategy, _ = load_checkpoint(ckpt_path)
    if strategy is None:
        raise click.ClickException(f"{ckpt_path} carries no training-strategy tag")
    report_dir = Path(out_dir or config.paths.report_dir)
    report_dir.mkdir(parents=True, exist_ok=True)

    try:
        examples = compose_self_enrolment_examples(corpus, n_examples)
    except AvtseError as exc:
        raise click.ClickException(str(exc)) from exc
    rows = []
    for ex in examples:
        result = self_enrolment_run(model, ex, strategy)
        rows.append((ex.example_id, *result.segment_sisdri))

    csv_path = report_dir / "self_enrolment.csv"
    lines = ["example_id," + ",".join(SEGMENT_LABELS)]
    for row in rows:
        lines.append(row[0] + "," + ",".join(f"{v:.6f}" for v in row[1:]))
    csv_path.write_text("\n".join(lines) + "\n")

    tag = f"{'causal' if model.config.causal else 'non-causal'}_{strategy}_{model.config.norm_kind}"
    raw3 = report_dir / f"raw_selfenrol_segment3_{tag}.txt"
    raw3.write_text("\n".join(f"{row[3]:.6f}" for row in rows) + "\n")

    means = [sum(row[k] for row in rows) / len(rows) for k in (1, 2, 3)]
    for label, mean in zip(SEGMENT_LABELS, means):
        click.echo(f"segment {label:6s} mean SI-SDRi {mean:6.2f} dB")
    click.echo(f"per-example table written to {csv_path}")
    if plot:
        png = report_dir / f"selfenrol_segment3_{tag}.png"
        render_violin(png, {"segment 3": [row[3] for row in rows]})
        click.echo(f"plot written to {png}")
    freeze_config(config, report_dir)


@main.command("report")
@click.option("--reports", "report_dirs", type=click.Path(exists=True), multiple=True, required=True,
              help="One or more report directories holding raw_*.txt files.")
@click.option("--out", "out_path", type=click.Path(), default="combined_report.csv", show_default=True)
def cmd_report(report_dirs, out_path):
    """Merge raw condition files from several runs into one grid."""
    from .evaluation.conditions import CONDITION_KINDS, ConditionReport

    reports = []
    for d in report_dirs:
        for path in sorted(Path(d).glob("raw_*_*.txt")):
            # condition names may contain underscores (MTSE_FD): bound the split
            parts = path.stem.split("_", 4)
            if len(parts) != 5 or parts[4] not in CONDITION_KINDS:
                continue  # not a condition raw file (e.g. self-enrolment)
            _, causality, strategy, norm, condition = parts
            values = [float(v) for v in path.read_text().split()]
            reports.append(
                ConditionReport(
                    condition=condition,
                    strategy=strategy,
                    model_tag={"causal": causality == "causal", "strategy": strategy, "norm_kind": norm},
                    values=values,
                )
            )
    if not reports:
        raise click.ClickException("no raw condition files found")
    grid = write_report_grid(out_path, reports)
    click.echo(f"combined grid written to {grid} ({len(reports)} cells)")


if __name__ == "__main__":
    main()
