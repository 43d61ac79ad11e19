#!/usr/bin/env python3
"""
Batch command line for the scoring toolkit.

Every subcommand reads line-delimited records, reports malformed lines with
their line numbers, and exits 0 on success, 1 when any record was rejected or
a data error stopped the run, and 2 on usage errors.
"""

from __future__ import annotations

import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, Type, TypeVar

import click
import numpy as np
from pydantic import BaseModel

from ..composite.pls import composite, fit_attributes, load_model, save_model
from ..cot.builder import (
    STAGE1_MODES,
    STAGE2_FORMS,
    Stage1Input,
    assign_forms,
    build_stage1,
    build_stage2,
    to_message_record,
)
from ..cot.merge import merge_self_labels
from ..cot.parser import parse_response
from ..cot.templates import load_bank
from ..models.schemas import (
    AttributeRecord,
    LogitRecord,
    ResponseRecord,
    ScorePairRecord,
    SortTrialRecord,
    Stage2Record,
)
from ..ncm.curves import REPORT_HEADER, SERIES_HEADER, curve_report, series_rows
from ..ncm.expectation import DigitLogitSeq, MetricReport, evaluate_batch
from ..rank.attributes import LEVEL_ORDERS, AttributeVector, attr_mos_ranking, attribute_encode, per_attribute_corr
from ..rank.correlation import PairedSeries, plcc, srcc
from ..rank.sorting import (
    SortTrial,
    generate_sort_numbers,
    mean_sort_metrics,
    parse_sorted_answer,
    sort_metrics,
    sort_prompt,
)
from ..score.grid import QuantizerConfig, ScoreValue, digit_ablation, normalize, quantize, render
from ..shared.config import load_run_config, settings
from ..shared.errors import (
    BuildError,
    DomainError,
    EnumeratedValueError,
    ExtractionError,
    RecordError,
    ToolkitError,
    UsageError,
)
from ..shared.logging import get_event_logger, setup_json_logging
from ..shared.metrics import metrics
from ..shared.records import RecordBatch, iter_lines, read_records, write_csv, write_jsonl
from ..sim.logits import ADJACENT, NAIVE, SimProfile, iter_training, uniform_grid_sampler
from ..sim.rng import SeededRNG

log = get_event_logger("scoretk.cli")

ModelT = TypeVar("ModelT", bound=BaseModel)

INPUT = click.Path(exists=True, dir_okay=False, path_type=Path)
OUTPUT = click.Path(dir_okay=False, path_type=Path)


def _read(path: Path, model: Type[ModelT], kind: str) -> RecordBatch[ModelT]:
    with metrics.time_stage(f"read_{kind}"):
        batch = read_records(path, model)
    metrics.record(kind, "ok", len(batch.records))
    metrics.record(kind, "rejected", len(batch.errors))
    return batch


def _report(errors: Sequence[RecordError], kind: str = "record") -> int:
    """Log every rejected line; the exit status is 1 when there were any"""
    for error in errors:
        log.warning("rejected_line", kind=kind, line=error.line_no, error=error.message)
        click.echo(f"{kind} line {error.line_no}: {error.message}", err=True)
    return 1 if errors else 0


def _nothing_valid(errors: Sequence[RecordError], kind: str, path: Path) -> int:
    """Report the rejected lines of an input with no usable record; always a data failure"""
    _report(errors, kind)
    log.error("no_valid_records", kind=kind, path=str(path), rejected=len(errors))
    click.echo(f"Error: no valid {kind} records in {path}", err=True)
    return 1


def _source_config(m: int, lo: Optional[float], hi: Optional[float]) -> Optional[QuantizerConfig]:
    if (lo is None) != (hi is None):
        raise UsageError("--lo and --hi must be given together")
    if lo is None or hi is None:
        return None
    return QuantizerConfig(m=m, source_lo=lo, source_hi=hi)


@click.group(context_settings={"help_option_names": ["-h", "--help"]})
@click.option("--config", "config_path", type=INPUT, help="JSON file of option defaults; flags win")
@click.option("--verbose", "-v", is_flag=True, help="Enable debug logging")
@click.pass_context
def cli(ctx: click.Context, config_path: Optional[Path], verbose: bool) -> None:
    """Numerical score toolkit: grid scores, expectation metrics, rank metrics,
    conversation data and composite scores."""
    setup_json_logging(logging.DEBUG if verbose else logging.INFO)
    metrics.reset()
    if config_path is not None:
        ctx.default_map = load_run_config(config_path, sorted(cli.commands))
        log.debug("config_loaded", path=str(config_path))


# -- score grid ---------------------------------------------------------------

@cli.command("quantize")
@click.option("--input", "input_path", type=INPUT, required=True, help="One raw score per line")
@click.option("--output", type=OUTPUT, default=None, help="Defaults to stdout")
@click.option("--m", type=click.IntRange(min=1), default=settings.digits, show_default=True)
@click.option("--lo", type=float, default=settings.source_lo, help="Source range lower bound")
@click.option("--hi", type=float, default=settings.source_hi, help="Source range upper bound")
@click.option("--ablate", default=None, help="Comma-separated digit counts; write an ablation CSV")
def quantize_cmd(input_path: Path, output: Optional[Path], m: int, lo: Optional[float],
                 hi: Optional[float], ablate: Optional[str]) -> int:
    """Normalize and quantize raw scores onto the m-digit grid."""
    cfg = _source_config(m, lo, hi)
    errors: List[RecordError] = []
    raw: List[Tuple[int, float]] = []
    for line_no, text in iter_lines(input_path):
        try:
            raw.append((line_no, float(text)))
        except ValueError:
            errors.append(RecordError(line_no, f"not a number: {text!r}"))

    if ablate:
        if output is None:
            raise UsageError("--ablate needs --output")
        try:
            ms = [int(part) for part in ablate.split(",") if part.strip()]
        except ValueError:
            raise UsageError(f"--ablate expects comma-separated integers, got {ablate!r}") from None
        lo_, hi_ = (cfg.source_lo, cfg.source_hi) if cfg else (0.0, 10.0)
        rows = digit_ablation([value for _, value in raw], lo_, hi_, ms)
        write_csv(output, ("m", "mean_abs_error", "max_abs_error", "srcc", "plcc"),
                  [(r.m, r.mean_abs_error, r.max_abs_error, r.srcc, r.plcc) for r in rows])
        return _report(errors, "score")

    lines: List[str] = []
    with metrics.time_stage("quantize"):
        for line_no, value in raw:
            try:
                lines.append(render(quantize(normalize(value, cfg) if cfg else value, m)))
            except DomainError as e:
                errors.append(RecordError(line_no, str(e)))
    text = "".join(f"{line}\n" for line in lines)
    if output is None:
        click.echo(text, nl=False)
    else:
        output.write_text(text, encoding="utf-8")
    metrics.record("score", "ok", len(lines))
    log.info("stage_done", stage="quantize", records=len(lines), rejected=len(errors))
    return _report(sorted(errors, key=lambda e: e.line_no), "score")


# -- token expectation ----------------------------------------------------------

def _step_reports(records: Sequence[Tuple[int, LogitRecord]],
                  renormalized: bool) -> Tuple[List[Tuple[int, MetricReport]], List[RecordError]]:
    errors: List[RecordError] = []
    by_step: Dict[int, List[DigitLogitSeq]] = {}
    m: Optional[int] = None
    for line_no, record in records:
        if m is None:
            m = record.m
        if record.m != m:
            errors.append(RecordError(line_no, f"digit count {record.m} differs from {m}"))
            continue
        seq = DigitLogitSeq(np.asarray(record.logits), record.gt_score())
        by_step.setdefault(record.step or 0, []).append(seq)
    series = [(step, evaluate_batch(by_step[step], renormalized)) for step in sorted(by_step)]
    return series, errors


@cli.command("ncm")
@click.option("--input", "input_path", type=INPUT, required=True, help="Logit records (JSONL)")
@click.option("--output", type=OUTPUT, required=True, help="Per-step metric CSV")
@click.option("--curve", type=OUTPUT, default=None, help="First/last window summary CSV")
@click.option("--window", type=click.IntRange(min=1), default=settings.window, show_default=True)
@click.option("--renormalized", is_flag=True, help="Mask the GT digit in the NCM* denominator too")
def ncm_cmd(input_path: Path, output: Path, curve: Optional[Path], window: int, renormalized: bool) -> int:
    """NCM, NCM* and CE per step from exported digit logits."""
    batch = _read(input_path, LogitRecord, "logits")
    if not batch.records:
        return _nothing_valid(batch.errors, "logits", input_path)
    with metrics.time_stage("ncm"):
        series, errors = _step_reports(batch.records, renormalized)
    header = SERIES_HEADER + ("expectation", "expectation_star", "n_samples")
    write_csv(output, header, [
        (*row, report.expectation, report.expectation_star, report.n_samples)
        for row, (_, report) in zip(series_rows(series), series)
    ])
    if curve is not None:
        write_csv(curve, REPORT_HEADER, curve_report(series, window).to_rows())
    log.info("stage_done", stage="ncm", steps=len(series), records=len(batch.records))
    return _report([*batch.errors, *errors], "logits")


# -- rank metrics ---------------------------------------------------------------

def _encoded(batch: RecordBatch[AttributeRecord]) -> Tuple[List[Tuple[int, AttributeRecord, AttributeVector]], List[RecordError]]:
    rows, errors = [], []
    for line_no, record in batch.records:
        try:
            rows.append((line_no, record, attribute_encode(record.attributes)))
        except EnumeratedValueError as e:
            errors.append(RecordError(line_no, str(e)))
    return rows, errors


@cli.command("corr")
@click.option("--pairs", type=INPUT, default=None, help="Records {id, pred, mos}")
@click.option("--pred-attrs", type=INPUT, default=None, help="Predicted attribute records")
@click.option("--gt-attrs", type=INPUT, default=None, help="Reference attribute records")
@click.option("--attrs", type=INPUT, default=None, help="Attribute records carrying mos, for ranking")
@click.option("--top-k", type=click.IntRange(min=0), default=3, show_default=True)
@click.option("--output", type=OUTPUT, required=True)
def corr_cmd(pairs: Optional[Path], pred_attrs: Optional[Path], gt_attrs: Optional[Path],
             attrs: Optional[Path], top_k: int, output: Path) -> int:
    """SRCC/PLCC of predictions, per-attribute tables, or attribute-MOS ranking."""
    modes = [pairs is not None, pred_attrs is not None or gt_attrs is not None, attrs is not None]
    if sum(modes) != 1 or (modes[1] and (pred_attrs is None or gt_attrs is None)):
        raise UsageError("give exactly one of --pairs, --pred-attrs with --gt-attrs, or --attrs")

    if pairs is not None:
        batch = _read(pairs, ScorePairRecord, "pairs")
        values = batch.values()
        series = PairedSeries([r.pred for r in values], [r.mos for r in values])
        write_csv(output, ("metric", "value"), [("srcc", srcc(series)), ("plcc", plcc(series)), ("n", len(values))])
        return _report(batch.errors, "pairs")

    if attrs is not None:
        batch = _read(attrs, AttributeRecord, "attributes")
        rows, errors = _encoded(batch)
        kept = []
        for line_no, record, vector in rows:
            if record.mos is None:
                errors.append(RecordError(line_no, "record has no mos"))
            else:
                kept.append((vector, record.mos))
        ranking = attr_mos_ranking([v for v, _ in kept], [mos for _, mos in kept], top_k)
        write_csv(output, ("rank", "attribute", "pearson_r"),
                  [(i + 1, name, r) for i, (name, r) in enumerate(ranking.top)])
        for name in ranking.skipped:
            log.info("attribute_skipped", attribute=name, reason="constant column")
        return _report([*batch.errors, *errors], "attributes")

    assert pred_attrs is not None and gt_attrs is not None
    pred_batch = _read(pred_attrs, AttributeRecord, "attributes")
    gt_batch = _read(gt_attrs, AttributeRecord, "attributes")
    pred_rows, pred_errors = _encoded(pred_batch)
    gt_rows, gt_errors = _encoded(gt_batch)
    gt_by_id = {record.id: vector for _, record, vector in gt_rows}
    aligned = [(vector, gt_by_id[record.id]) for _, record, vector in pred_rows if record.id in gt_by_id]
    unmatched = len(pred_rows) - len(aligned)
    if unmatched:
        log.warning("unmatched_ids", count=unmatched)
    table = per_attribute_corr([p for p, _ in aligned], [g for _, g in aligned])
    write_csv(output, ("attribute", "srcc", "plcc"), [(r.attribute, r.srcc, r.plcc) for r in table])
    return max(_report([*pred_batch.errors, *pred_errors], "pred-attributes"),
               _report([*gt_batch.errors, *gt_errors], "gt-attributes"))


@cli.command("sort-trials")
@click.option("--output", type=OUTPUT, required=True, help="Generated trials (JSONL)")
@click.option("--trials", type=click.IntRange(min=1), default=settings.sort_trials, show_default=True)
@click.option("--count", type=click.IntRange(min=1), default=settings.sort_count, show_default=True)
@click.option("--seed", type=click.IntRange(min=0), default=settings.seed, show_default=True)
def sort_trials_cmd(output: Path, trials: int, count: int, seed: int) -> int:
    """Generate random sorting trials and their prompts."""
    root = SeededRNG(seed)
    rows = []
    for i in range(trials):
        numbers = generate_sort_numbers(root.fork(i).generator, count)
        rows.append({"id": f"trial-{i:04d}", "gt": numbers, "prompt": sort_prompt(numbers)})
    write_jsonl(output, rows)
    log.info("stage_done", stage="sort-trials", records=trials)
    return 0


@cli.command("sort-eval")
@click.option("--input", "input_path", type=INPUT, required=True, help="Trials with pred or response")
@click.option("--output", type=OUTPUT, required=True, help="Per-trial metrics CSV with a mean row")
def sort_eval_cmd(input_path: Path, output: Path) -> int:
    """Accuracy, recall and hallucination of sorted answers."""
    batch = _read(input_path, SortTrialRecord, "trials")
    if not batch.records:
        return _nothing_valid(batch.errors, "trials", input_path)
    rows, results = [], []
    for line_no, record in batch.records:
        pred = record.pred
        if pred is None:
            pred = parse_sorted_answer(record.response or "")
            if pred is None:
                log.info("no_list_in_response", line=line_no)
                pred = []
        result = sort_metrics(SortTrial(gt=list(record.gt), pred=list(pred)))
        results.append(result)
        rows.append((record.id or str(line_no), result.accuracy, result.recall,
                     result.hallucination if result.hallucination_defined else None,
                     result.hallucination_defined))
    summary = mean_sort_metrics(results)
    rows.append(("mean", summary.accuracy, summary.recall, summary.hallucination,
                 f"{summary.trials - summary.undefined_hallucination}/{summary.trials}"))
    write_csv(output, ("id", "accuracy", "recall", "hallucination", "hallucination_defined"), rows)
    log.info("sort_summary", trials=summary.trials, accuracy=summary.accuracy,
             recall=summary.recall, hallucination=summary.hallucination)
    return _report(batch.errors, "trials")


# -- conversations ----------------------------------------------------------------

def _form_ratios(forms: Sequence[str]) -> Dict[str, float]:
    ratios: Dict[str, float] = {}
    for item in forms or ("Q1R1",):
        name, _, ratio = item.partition("=")
        try:
            ratios[name.strip().upper()] = float(ratio) if ratio else 1.0
        except ValueError:
            raise UsageError(f"bad --form value {item!r}; use FORM or FORM=RATIO") from None
    return ratios


@cli.command("build-cot")
@click.option("--input", "input_path", type=INPUT, required=True)
@click.option("--output", type=OUTPUT, required=True, help="Conversation records (JSONL)")
@click.option("--stage", type=click.IntRange(1, 2), required=True)
@click.option("--mode", type=click.Choice(STAGE1_MODES, case_sensitive=False), default="UNION", show_default=True)
@click.option("--form", "forms", multiple=True, help="Stage-2 form, optionally with a ratio: q3r3=0.5")
@click.option("--level-order", type=click.Choice(LEVEL_ORDERS), default=settings.level_order, show_default=True)
@click.option("--template-bank", type=INPUT, default=None, help="Template bank file")
@click.option("--seed", type=click.IntRange(min=0), default=settings.seed, show_default=True)
def build_cot_cmd(input_path: Path, output: Path, stage: int, mode: str, forms: Sequence[str],
                  level_order: str, template_bank: Optional[Path], seed: int) -> int:
    """Build stage-1 attribute or stage-2 scoring conversations."""
    bank = load_bank(str(template_bank) if template_bank else None)
    out_rows: List[Dict[str, Any]] = []
    errors: List[RecordError] = []

    if stage == 1:
        batch1 = _read(input_path, AttributeRecord, "attributes")
        errors.extend(batch1.errors)
        for line_no, record in batch1.records:
            source = Stage1Input(record.id, record.attributes, record.subject, record.reasons)
            try:
                samples = build_stage1(source, mode.upper(), level_order, bank)
            except (BuildError, EnumeratedValueError) as e:
                errors.append(RecordError(line_no, str(e)))
                continue
            out_rows.extend(to_message_record(s) for s in samples)
    else:
        batch2 = _read(input_path, Stage2Record, "stage2")
        errors.extend(batch2.errors)
        assigned = assign_forms([r.id for r in batch2.values()], _form_ratios(forms), seed)
        for line_no, record in batch2.records:
            try:
                attrs = attribute_encode(record.attributes) if record.attributes else None
                sample = build_stage2(record.id, record.score_value(), attrs, assigned[record.id],
                                      level_order, record.subject, bank)
            except (UsageError, EnumeratedValueError) as e:
                errors.append(RecordError(line_no, str(e)))
                continue
            out_rows.append(to_message_record(sample))

    write_jsonl(output, out_rows)
    metrics.record("conversations", "ok", len(out_rows))
    log.info("stage_done", stage=f"build-cot-{stage}", records=len(out_rows), rejected=len(errors))
    return _report(errors)


@cli.command("parse")
@click.option("--input", "input_path", type=INPUT, required=True, help="Response records (JSONL)")
@click.option("--output", type=OUTPUT, required=True, help="Parsed records (JSONL)")
@click.option("--form", type=click.Choice(STAGE2_FORMS, case_sensitive=False), default=None,
              help="Expected answer form when a record does not name one")
@click.option("--m", type=click.IntRange(min=1), default=None, help="Digit count of scores")
@click.option("--template-bank", type=INPUT, default=None)
def parse_cmd(input_path: Path, output: Path, form: Optional[str], m: Optional[int],
              template_bank: Optional[Path]) -> int:
    """Extract scores and attributes from model responses."""
    bank = load_bank(str(template_bank) if template_bank else None)
    batch = _read(input_path, ResponseRecord, "responses")
    errors = list(batch.errors)
    rows = []
    for line_no, record in batch.records:
        expected = record.form or (form.upper() if form else None)
        try:
            parsed = parse_response(record.response, expected, m, bank)
        except ExtractionError as e:
            errors.append(RecordError(line_no, f"{e} {e.diagnostics}"))
            continue
        rows.append(parsed.as_record(record.id))
    write_jsonl(output, rows)
    log.info("stage_done", stage="parse", records=len(rows), rejected=len(errors))
    return _report(errors, "responses")


@cli.command("merge-labels")
@click.option("--mos", "mos_path", type=INPUT, required=True, help="Records {id, mos}")
@click.option("--attrs", "attr_path", type=INPUT, required=True, help="Predicted attribute records")
@click.option("--output", type=OUTPUT, required=True, help="Stage-2 ready records (JSONL)")
@click.option("--skipped", type=OUTPUT, default=None, help="Write ids found in only one file")
@click.option("--m", type=click.IntRange(min=1), default=settings.digits, show_default=True)
@click.option("--lo", type=float, required=True, help="MOS range lower bound")
@click.option("--hi", type=float, required=True, help="MOS range upper bound")
def merge_labels_cmd(mos_path: Path, attr_path: Path, output: Path, skipped: Optional[Path],
                     m: int, lo: float, hi: float) -> int:
    """Join MOS with self-labelled attributes into stage-2 records."""
    cfg = _source_config(m, lo, hi)
    assert cfg is not None
    result = merge_self_labels(mos_path, attr_path, cfg)
    write_jsonl(output, (r.model_dump(exclude_none=True) for r in result.records))
    if skipped is not None:
        skipped.write_text("".join(f"{i}\n" for i in result.skipped_ids), encoding="utf-8")
    for sample_id in result.skipped_ids:
        log.info("id_skipped", id=sample_id)
    log.info("stage_done", stage="merge-labels", records=len(result.records),
             skipped=len(result.skipped_ids), rejected=len(result.errors))
    return _report(result.errors)


# -- composite score -----------------------------------------------------------------

@cli.command("fit-pls")
@click.option("--input", "input_path", type=INPUT, required=True, help="Attribute records with feedback")
@click.option("--output", type=OUTPUT, required=True, help="Model JSON document")
@click.option("--k", type=click.IntRange(min=1), default=settings.pls_components, show_default=True)
@click.option("--rescale", is_flag=True, help="Record the training composite range for rescaling")
def fit_pls_cmd(input_path: Path, output: Path, k: int, rescale: bool) -> int:
    """Fit attribute weights by partial least squares."""
    batch = _read(input_path, AttributeRecord, "attributes")
    rows, errors = _encoded(batch)
    vectors, targets = [], []
    for line_no, record, vector in rows:
        if record.feedback is None:
            errors.append(RecordError(line_no, "record has no feedback target"))
            continue
        vectors.append(vector)
        targets.append(record.feedback)
    with metrics.time_stage("fit_pls"):
        model = fit_attributes(vectors, targets, k, rescale=rescale)
    save_model(model, output)
    log.info("model_fitted", components=model.components, intercept=model.intercept,
             weights=dict(zip(model.attribute_order, model.weights)))
    return _report([*batch.errors, *errors], "attributes")


@cli.command("score-composite")
@click.option("--model", "model_path", type=INPUT, required=True)
@click.option("--input", "input_path", type=INPUT, required=True, help="Attribute records")
@click.option("--output", type=OUTPUT, required=True, help="CSV of id, composite")
@click.option("--rescale/--no-rescale", default=None, help="Override the model's rescale setting")
def score_composite_cmd(model_path: Path, input_path: Path, output: Path, rescale: Optional[bool]) -> int:
    """Apply a fitted composite model to attribute records."""
    model = load_model(model_path)
    batch = _read(input_path, AttributeRecord, "attributes")
    rows, errors = _encoded(batch)
    write_csv(output, ("id", "composite"),
              [(record.id, composite(model, vector, rescale)) for _, record, vector in rows])
    return _report([*batch.errors, *errors], "attributes")


# -- simulation ------------------------------------------------------------------------

@cli.command("simulate")
@click.option("--kind", type=click.Choice((NAIVE, ADJACENT), case_sensitive=False), required=True)
@click.option("--start-prob", type=float, required=True, help="on_gt_prob at the first step")
@click.option("--end-prob", type=float, required=True, help="on_gt_prob at the last step")
@click.option("--start-spread", type=float, default=1.0, show_default=True)
@click.option("--end-spread", type=float, default=None, help="Defaults to --start-spread")
@click.option("--jitter", type=click.FloatRange(min=0), default=0.0, show_default=True)
@click.option("--steps", type=click.IntRange(min=2), default=200, show_default=True)
@click.option("--batch", type=click.IntRange(min=1), default=64, show_default=True)
@click.option("--m", type=click.IntRange(min=1), default=settings.digits, show_default=True)
@click.option("--seed", type=click.IntRange(min=0), default=settings.seed, show_default=True)
@click.option("--renormalized", is_flag=True)
@click.option("--window", type=click.IntRange(min=1), default=settings.window, show_default=True)
@click.option("--output", type=OUTPUT, required=True, help="Per-step metric CSV")
@click.option("--curve", type=OUTPUT, default=None, help="First/last window summary CSV")
@click.option("--records", type=OUTPUT, default=None, help="Also write the sampled logit records")
def simulate_cmd(kind: str, start_prob: float, end_prob: float, start_spread: float,
                 end_spread: Optional[float], jitter: float, steps: int, batch: int, m: int,
                 seed: int, renormalized: bool, window: int, output: Path, curve: Optional[Path],
                 records: Optional[Path]) -> int:
    """Emulate a training run and emit its metric curves."""
    kind = kind.upper()
    start = SimProfile(kind, start_prob, start_spread, seed, jitter)
    end = SimProfile(kind, end_prob, start_spread if end_spread is None else end_spread, seed, jitter)

    series: List[Tuple[int, MetricReport]] = []
    logit_rows: List[Dict[str, Any]] = []
    with metrics.time_stage("simulate"):
        for step in iter_training(start, end, steps, batch, uniform_grid_sampler(m), seed):
            seqs = [DigitLogitSeq(z, ScoreValue(tuple(g))) for z, g in zip(step.logits, step.gt_digits)]
            series.append((step.step, evaluate_batch(seqs, renormalized)))
            if records is not None:
                logit_rows.extend(
                    {"id": f"{step.step}-{j}", "gt": render(seq.gt), "m": m,
                     "logits": seq.logits.tolist(), "step": step.step}
                    for j, seq in enumerate(seqs)
                )

    write_csv(output, SERIES_HEADER, series_rows(series))
    if curve is not None:
        write_csv(curve, REPORT_HEADER, curve_report(series, window).to_rows())
    if records is not None:
        write_jsonl(records, logit_rows)
    log.info("stage_done", stage="simulate", steps=steps, batch=batch, kind=kind)
    return 0


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Run the CLI and map failures onto exit statuses"""
    try:
        status = cli.main(args=list(argv) if argv is not None else None,
                          prog_name="scoretk", standalone_mode=False)
    except click.exceptions.UsageError as e:
        e.show()
        return 2
    except click.ClickException as e:
        e.show()
        return 1
    except click.exceptions.Abort:
        click.echo("Aborted", err=True)
        return 1
    except UsageError as e:
        log.error("usage_error", error=str(e))
        click.echo(f"Usage error: {e}", err=True)
        return 2
    except ToolkitError as e:
        log.error("run_failed", error=str(e), error_type=type(e).__name__)
        click.echo(f"Error: {e}", err=True)
        return 1
    log.info("run_metrics", **metrics.summary())
    return int(status or 0)


if __name__ == "__main__":
    sys.exit(main())
