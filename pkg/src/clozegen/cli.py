"""Command-line interface.

Subcommands: preprocess (word list -> word groups), generate (word groups
-> question items), record/replay presets for transcript handling, review
serve, and eval for offline agreement statistics.

Exit codes: 0 success, 1 configuration error, 2 partial output (distractor
shortfalls or exhausted headwords), 3 transport failure. Progress goes to
stderr; ``--json`` puts a machine-readable summary on stdout.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from . import evalkit, review_service
from .errors import ClozegenError, ConfigError, TransportError
from .morphology import PosTag, default_lexicon
from .pipeline import DEFAULT_API_KEY_ENV, RunConfig, run_pipeline
from .stem_generator import StemConstraints
from .wordlist import build_group_set, parse_headword_list, write_word_groups

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_PARTIAL = 2
EXIT_TRANSPORT = 3


def _read_config_file(path: str | None) -> dict[str, str]:
    """key=value lines; blank lines and # comments ignored."""
    if not path:
        return {}
    values: dict[str, str] = {}
    for lineno, line in enumerate(Path(path).read_text("utf-8").splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ConfigError(f"{path}:{lineno}: expected key=value")
        values[key.strip()] = value.strip()
    return values


def _merge(ctx: click.Context, name: str, cli_value, file_values: dict, cast=str):
    """CLI flag wins over config file wins over the click default."""
    source = ctx.get_parameter_source(name)
    if source is not None and source.name != "DEFAULT":
        return cli_value
    if name in file_values:
        raw = file_values[name]
        if cast is bool:
            return raw.lower() in ("1", "true", "yes", "on")
        return cast(raw)
    return cli_value


@click.group()
def main():
    """Multiple-choice cloze question generator."""


@main.command()
@click.option("--wordlist", "wordlist_path", required=True, type=click.Path(exists=True),
              help="Headword CSV (headword,sublist).")
@click.option("--output", "output_path", required=True, type=click.Path(),
              help="Word-group CSV to write.")
@click.option("--source-label", default="", help="Label stored with the group set.")
@click.option("--secondary", type=click.Choice(["none", "lexicon"]), default="none",
              help="Cross-validate tags against a second tagger.")
def preprocess(wordlist_path, output_path, source_label, secondary):
    """Expand a headword list into POS-tagged inflection groups."""
    try:
        entries = parse_headword_list(wordlist_path)
        secondary_tagger = None
        if secondary == "lexicon":
            # self-agreement run: useful for exercising the consensus path
            secondary_tagger = lambda word: default_lexicon().tag_pos(word)
        skipped = []
        group_set = build_group_set(
            entries,
            secondary_tagger=secondary_tagger,
            source_label=source_label or Path(wordlist_path).stem,
            on_empty_consensus=lambda entry, exc: skipped.append(entry.headword),
        )
        write_word_groups(group_set, output_path)
    except ClozegenError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_CONFIG)
    click.echo(f"wrote {len(group_set)} word groups to {output_path}", err=True)
    if skipped:
        click.echo(f"skipped (no tag consensus): {', '.join(skipped)}", err=True)
        sys.exit(EXIT_PARTIAL)


def _generate_options(fn):
    options = [
        click.option("--groups", "wordlist_path", required=True, type=click.Path(exists=True),
                     help="Word-group CSV from preprocess."),
        click.option("--output", "output_path", required=True, type=click.Path(),
                     help="Question-item CSV to write."),
        click.option("--log", "log_path", required=True, type=click.Path(),
                     help="Prompt/response log CSV to write."),
        click.option("--threshold", "item_threshold", default=60, show_default=True,
                     help="Number of question items to produce."),
        click.option("--seed", default=0, show_default=True, help="Run seed."),
        click.option("--max-words", default=20, show_default=True,
                     help="Stem length limit in words."),
        click.option("--domain", default="Academic English", show_default=True,
                     help="Text domain named in the stem prompt."),
        click.option("--pool-size", default=10, show_default=True,
                     help="Distractor candidates judged per round."),
        click.option("--max-rounds", default=6, show_default=True,
                     help="Distractor selection rounds per item."),
        click.option("--stem-attempts", default=3, show_default=True,
                     help="Stem regeneration cap per key."),
        click.option("--parallelism", default=1, show_default=True,
                     help="Headwords processed concurrently."),
        click.option("--temperature", default=0.0, show_default=True),
        click.option("--max-output-tokens", default=256, show_default=True),
        click.option("--endpoint-url", default="", help="Chat-completion endpoint (live)."),
        click.option("--model", default="", help="Model name sent to the endpoint (live)."),
        click.option("--api-key-env", default=DEFAULT_API_KEY_ENV, show_default=True,
                     help="Environment variable holding the API key (live)."),
        click.option("--judgment-mode", type=click.Choice(["blank", "full-sentences"]),
                     default="blank", show_default=True,
                     help="Judge bare candidates or complete filled-in sentences."),
        click.option("--llm-pos-check", is_flag=True, default=False,
                     help="Extra judgment call verifying the key kept its tag."),
        click.option("--no-timestamps", is_flag=True, default=False,
                     help="Blank the log timestamp column (for byte-stable diffs)."),
        click.option("--config", "config_path", type=click.Path(exists=True), default=None,
                     help="key=value config file; flags take precedence."),
        click.option("--json", "json_summary", is_flag=True, default=False,
                     help="Print the run summary as JSON on stdout."),
    ]
    for option in reversed(options):
        fn = option(fn)
    return fn


def _run_generation(ctx, transport, transcripts_path, record_path, **kw):
    file_values = _read_config_file(kw.pop("config_path"))
    json_summary = kw.pop("json_summary")

    def merged(name, cast=str):
        return _merge(ctx, name, kw[name], file_values, cast)

    try:
        config = RunConfig(
            wordlist_path=kw["wordlist_path"],
            output_path=kw["output_path"],
            log_path=kw["log_path"],
            item_threshold=merged("item_threshold", int),
            seed=merged("seed", int),
            stem_constraints=StemConstraints(
                max_words=merged("max_words", int),
                domain_label=merged("domain", str),
            ),
            pool_size=merged("pool_size", int),
            max_rounds=merged("max_rounds", int),
            stem_attempts=merged("stem_attempts", int),
            transport=transport,
            transcripts_path=transcripts_path,
            record_path=record_path,
            endpoint_url=merged("endpoint_url", str),
            model=merged("model", str),
            api_key_env=merged("api_key_env", str),
            temperature=merged("temperature", float),
            max_output_tokens=merged("max_output_tokens", int),
            parallelism=merged("parallelism", int),
            include_timestamps=not kw["no_timestamps"],
            judgment_mode=merged("judgment_mode", str),
            llm_pos_check=merged("llm_pos_check", bool),
        )
        summary = run_pipeline(config)
    except ConfigError as exc:
        click.echo(f"config error: {exc}", err=True)
        sys.exit(EXIT_CONFIG)
    except TransportError as exc:
        click.echo(f"transport failure: {exc}", err=True)
        sys.exit(EXIT_TRANSPORT)
    except ClozegenError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_CONFIG)

    click.echo(
        f"{summary.items_written} items written to {summary.output_path} "
        f"({summary.llm_calls} LLM calls, {summary.shortfalls} distractor shortfalls, "
        f"{len(summary.exhausted_headwords)} exhausted headwords) "
        f"in {summary.duration_s:.2f}s",
        err=True,
    )
    if json_summary:
        click.echo(json.dumps(summary.to_dict(), sort_keys=True))
    sys.exit(EXIT_PARTIAL if summary.partial else EXIT_OK)


@main.command()
@click.option("--transport", type=click.Choice(["live", "replay"]), default="replay",
              show_default=True)
@click.option("--transcripts", "transcripts_path", type=click.Path(), default=None,
              help="Transcript JSONL (required for replay).")
@click.option("--record", "record_path", type=click.Path(), default=None,
              help="Capture exchanges to this transcript JSONL.")
@_generate_options
@click.pass_context
def generate(ctx, transport, transcripts_path, record_path, **kw):
    """Generate question items from a word-group file."""
    _run_generation(ctx, transport, transcripts_path, record_path, **kw)


@main.command()
@click.option("--transcripts", "transcripts_path", required=True, type=click.Path(),
              help="Transcript JSONL to write.")
@_generate_options
@click.pass_context
def record(ctx, transcripts_path, **kw):
    """Generate against the live endpoint while capturing transcripts."""
    _run_generation(ctx, "live", None, transcripts_path, **kw)


@main.command()
@click.option("--transcripts", "transcripts_path", required=True, type=click.Path(exists=True),
              help="Transcript JSONL to replay.")
@_generate_options
@click.pass_context
def replay(ctx, transcripts_path, **kw):
    """Generate offline from recorded transcripts."""
    _run_generation(ctx, "replay", transcripts_path, None, **kw)


@main.group()
def review():
    """Human review workflow."""


@review.command()
@click.option("--items", "items_path", required=True, type=click.Path(exists=True),
              help="Question-item CSV to review.")
@click.option("--ratings", "ratings_path", required=True, type=click.Path(),
              help="Ratings store (JSON Lines, appended).")
@click.option("--bind", default="127.0.0.1:8321", show_default=True)
@click.option("--shuffle-seed", default=0, show_default=True,
              help="Seed for the per-item option order.")
@click.option("--ui-dir", type=click.Path(), default=None,
              help="Static review UI bundle to serve at /.")
def serve(items_path, ratings_path, bind, shuffle_seed, ui_dir):
    """Serve items to reviewers over HTTP."""
    try:
        review_service.serve(items_path, ratings_path, bind, shuffle_seed, ui_dir)
    except ClozegenError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_CONFIG)


@main.command("eval")
@click.option("--ratings", "ratings_path", required=True, type=click.Path(exists=True),
              help="Ratings CSV (target_id,target_kind,reviewer_id,verdict,comment).")
@click.option("--labels", "labels_path", type=click.Path(exists=True), default=None,
              help="Annotation labels CSV (target_id,category,subcategory).")
@click.option("--vocabulary", "vocabulary_path", type=click.Path(exists=True), default=None,
              help="JSON category vocabulary overriding the built-in one.")
@click.option("--json", "json_output", is_flag=True, default=False)
def eval_cmd(ratings_path, labels_path, vocabulary_path, json_output):
    """Agreement statistics (and optional annotation tallies) from files."""
    import csv as _csv

    try:
        records = evalkit.load_ratings_csv(ratings_path)
        report = evalkit.agreement_report(records)
    except (ClozegenError, ValueError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_CONFIG)

    output: dict = dict(report)
    if labels_path:
        vocabulary = evalkit.load_vocabulary(vocabulary_path) if vocabulary_path else None
        labels = []
        with open(labels_path, encoding="utf-8", newline="") as fh:
            reader = _csv.reader(fh)
            header = next(reader, None)
            if header != ["target_id", "category", "subcategory"]:
                click.echo(f"error: bad labels header {header!r}", err=True)
                sys.exit(EXIT_CONFIG)
            for row in reader:
                if row:
                    labels.append(evalkit.AnnotationLabel(*row))
        try:
            table = evalkit.tally(labels, vocabulary)
        except ClozegenError as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(EXIT_CONFIG)
        output["annotation_tally"] = table
        output["annotation_total"] = evalkit.tally_total(table)

    if json_output:
        # byte-identical to the review service /stats when no labels are given
        click.echo(evalkit.report_json(output), nl=False)
    else:
        click.echo(evalkit.report_text(report), nl=False)
        if labels_path:
            for category in output["annotation_tally"]:
                for subcategory, count in output["annotation_tally"][category].items():
                    click.echo(f"{category}/{subcategory}: {count}")
            click.echo(f"total labels: {output['annotation_total']}")


if __name__ == "__main__":
    main()
