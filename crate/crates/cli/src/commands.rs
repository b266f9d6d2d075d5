//! One function per subcommand.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use fincpt_core::comparer::{compare_outputs, read_prompts, render_comparison, summarize, ComparisonCase};
use fincpt_core::corpus::{build_corpus, corpus_stats, load_manifest, CorpusRecord, RawDocument};
use fincpt_core::evalharness::{
    diff, load_task, render_table, run_benchmark, AuditRecord, BenchmarkReport, JsonlAudit, ReportDocument,
    TaskRegistry,
};
use fincpt_core::jsonl::{read_jsonl, JsonlError};
use fincpt_core::synthgen::{generate_synthetic, results_to_records, ItemKind, Passage};
use fincpt_core::trainer::tokenizer::tokenizer_by_name;
use fincpt_core::trainer::{
    analyze_curve, epoch_mean_losses, pack_records, train_reference, PackPolicy, PackedHeader, PackedSequence,
    TrainPlan,
};
use fincpt_core::Tokenizer;
use serde::{Deserialize, Serialize};

use crate::backend::{build_backend, BackendSpec};
use crate::config::PipelineConfig;
use crate::error::CliError;
use crate::meta::RunMeta;

pub struct Context {
    pub config: PipelineConfig,
    pub timestamp: bool,
}

impl Context {
    fn meta(&self, command: &str) -> RunMeta {
        RunMeta::new(command, &self.config, self.timestamp)
    }

    fn tokenizer(&self) -> Result<Box<dyn Tokenizer>, CliError> {
        tokenizer_by_name(&self.config.tokenizer)
            .ok_or_else(|| CliError::Usage(format!("unknown tokenizer `{}`", self.config.tokenizer)))
    }
}

fn read_records<T: serde::de::DeserializeOwned>(path: &Path) -> Result<Vec<T>, CliError> {
    let file = File::open(path).map_err(|e| CliError::io(path, e))?;
    read_jsonl(BufReader::new(file)).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

/// Writes `meta` then one JSON line per item.
fn write_records<'a, T, I>(path: &Path, meta: &RunMeta, items: I) -> Result<(), CliError>
where
    T: Serialize + 'a,
    I: IntoIterator<Item = &'a T>,
{
    let file = File::create(path).map_err(|e| CliError::io(path, e))?;
    let mut w = BufWriter::new(file);
    w.write_all(meta.jsonl_line().as_bytes()).map_err(|e| CliError::io(path, e))?;
    fincpt_core::jsonl::write_jsonl(&mut w, items).map_err(|e| match e {
        JsonlError::Io(io) => CliError::io(path, io),
        other => CliError::Data(other.to_string()),
    })?;
    w.flush().map_err(|e| CliError::io(path, e))
}

pub fn ingest(ctx: &Context, manifest: &Path, out: &Path) -> Result<(), CliError> {
    let docs = load_manifest(manifest)?;
    write_records(out, &ctx.meta("ingest"), &docs)?;
    println!("documents={}", docs.len());
    Ok(())
}

pub fn format(ctx: &Context, input: &Path, out: &Path, report_path: Option<&Path>) -> Result<(), CliError> {
    let docs: Vec<RawDocument> = read_records(input)?;
    let tokenizer = ctx.tokenizer()?;
    let (records, report) = build_corpus(&docs, &ctx.config.format, tokenizer.as_ref())?;
    write_records(out, &ctx.meta("format"), &records)?;
    if let Some(path) = report_path {
        write_text(path, &serde_json::to_string_pretty(&report)?)?;
    }
    println!(
        "documents={} skipped={} records_before_dedupe={} records={}",
        report.documents,
        report.skipped.len(),
        report.records_before_dedupe,
        report.records
    );
    Ok(())
}

pub fn synth(
    ctx: &Context,
    input: &Path,
    out: &Path,
    kind: ItemKind,
    spec: &BackendSpec,
    results_path: Option<&Path>,
) -> Result<(), CliError> {
    let records: Vec<CorpusRecord> = read_records(input)?;
    let passages: Vec<Passage> =
        records.into_iter().map(|r| Passage { id: r.id, text: r.text, provenance: r.provenance }).collect();
    let backend = build_backend(spec, &spec_label(spec), ctx.config.retry)?;
    let output = generate_synthetic(&passages, kind, backend.as_ref(), &ctx.config.synth)?;
    let tokenizer = ctx.tokenizer()?;
    let synthetic = results_to_records(&output.results, tokenizer.as_ref());
    write_records(out, &ctx.meta("synth"), &synthetic)?;
    if let Some(path) = results_path {
        write_records(path, &ctx.meta("synth"), &output.results)?;
    }
    println!(
        "passages={} results={} skipped={} records={}",
        passages.len(),
        output.results.len(),
        output.skipped.len(),
        synthetic.len()
    );
    Ok(())
}

pub fn pack(ctx: &Context, input: &Path, out: &Path, max_len: Option<usize>) -> Result<(), CliError> {
    let records: Vec<CorpusRecord> = read_records(input)?;
    let max_len = max_len.or(ctx.config.pack.max_len).unwrap_or(ctx.config.plan.max_seq_len);
    if max_len == 0 {
        return Err(CliError::Usage("max_len must be positive".into()));
    }
    let policy = PackPolicy { max_len, pad_id: ctx.config.pack.pad_id };
    let tokenizer = ctx.tokenizer()?;
    let packed = pack_records(&records, tokenizer.as_ref(), &policy);
    let header = PackedHeader::describe(&policy, &packed);
    write_records(out, &ctx.meta("pack").with_data(serde_json::to_value(&header)?), &packed)?;
    println!("sequences={} tokens={} max_len={max_len}", header.sequences, header.tokens);
    Ok(())
}

pub fn stats(_ctx: &Context, input: &Path, json: bool) -> Result<(), CliError> {
    let records: Vec<CorpusRecord> = read_records(input)?;
    let stats = corpus_stats(&records)?;
    if json {
        println!("{}", serde_json::to_string_pretty(&stats)?);
        return Ok(());
    }
    println!("doc_count={}", stats.doc_count);
    println!("token_count={}", stats.token_count);
    for (kind, count) in &stats.per_format {
        println!("{kind}.records={count}");
        println!("{kind}.tokens={}", stats.per_format_tokens.get(kind).copied().unwrap_or(0));
    }
    Ok(())
}

fn load_plan(ctx: &Context, path: Option<&Path>) -> Result<TrainPlan, CliError> {
    match path {
        Some(p) => Ok(TrainPlan::from_manifest(&fs::read_to_string(p).map_err(|e| CliError::io(p, e))?)?),
        None => Ok(ctx.config.plan.clone()),
    }
}

pub fn train(
    ctx: &Context,
    input: &Path,
    curve_path: &Path,
    model_path: Option<&Path>,
    plan_path: Option<&Path>,
) -> Result<(), CliError> {
    let packed: Vec<PackedSequence> = read_records(input)?;
    let plan = load_plan(ctx, plan_path)?;
    let (model, curve) = train_reference(&packed, &plan, &ctx.config.reference, ctx.config.seed)?;
    write_text(curve_path, &format!("{}{}", ctx.meta("train").comment_line(), curve.to_csv()))?;
    if let Some(path) = model_path {
        write_text(path, &serde_json::to_string(&model)?)?;
    }
    let steps_per_epoch = packed.len().div_ceil(plan.global_batch);
    let epoch_means = epoch_mean_losses(&curve, steps_per_epoch);
    println!("steps={} steps_per_epoch={steps_per_epoch}", curve.len());
    for (i, mean) in epoch_means.iter().enumerate() {
        println!("epoch{}.mean_loss={mean:?}", i + 1);
    }
    match analyze_curve(&curve, &ctx.config.analyze) {
        Ok(a) => println!("spikes={} saturated={} tail_slope={:e}", a.spikes.len(), a.saturated, a.tail_slope),
        Err(e) => println!("analysis=unavailable ({e})"),
    }
    Ok(())
}

pub fn plan(ctx: &Context, out: Option<&Path>, check: Option<&Path>) -> Result<(), CliError> {
    if let Some(path) = check {
        let plan = load_plan(ctx, Some(path))?;
        plan.validate()?;
        println!("ok: devices={} epochs={} lr_init={:e}", plan.devices, plan.epochs, plan.lr_init);
        return Ok(());
    }
    let manifest = ctx.config.plan.to_manifest()?;
    match out {
        Some(path) => write_text(path, &format!("{}{manifest}", ctx.meta("plan").comment_line())),
        None => {
            print!("{manifest}");
            Ok(())
        }
    }
}

fn spec_label(spec: &BackendSpec) -> String {
    match spec {
        BackendSpec::MockEcho => "mock-echo".into(),
        BackendSpec::MockFail => "mock-fail".into(),
        BackendSpec::MockFixed(_) => "mock-fixed".into(),
        BackendSpec::MockHashed(seed) => format!("mock-hashed-{seed}"),
        BackendSpec::Http(_) => "http".into(),
        BackendSpec::Reference(path) => {
            Path::new(path).file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| path.clone())
        }
    }
}

/// The `--out` document of `eval`.
#[derive(Debug, Serialize, Deserialize)]
struct EvalDocument {
    #[serde(rename = "_meta")]
    meta: serde_json::Value,
    report: BenchmarkReport,
}

pub fn eval(
    ctx: &Context,
    task_args: &[(String, PathBuf)],
    spec: &BackendSpec,
    label: Option<String>,
    out: &Path,
    audit_path: Option<&Path>,
    max_retries: Option<u32>,
) -> Result<(), CliError> {
    let registry = TaskRegistry::financial();
    let mut tasks = Vec::new();
    for (name, path) in task_args {
        let file = File::open(path).map_err(|e| CliError::io(path, e))?;
        tasks.push(load_task(name, BufReader::new(file), &registry)?);
    }
    let mut retry = ctx.config.retry;
    if let Some(n) = max_retries {
        retry.max_retries = n;
    }
    let label = label.unwrap_or_else(|| spec_label(spec));
    let backend = build_backend(spec, &label, retry)?;
    let meta = ctx.meta("eval");
    let report = match audit_path {
        Some(path) => {
            let mut file = BufWriter::new(File::create(path).map_err(|e| CliError::io(path, e))?);
            file.write_all(meta.jsonl_line().as_bytes()).map_err(|e| CliError::io(path, e))?;
            let mut sink = JsonlAudit(file);
            run_benchmark(&tasks, backend.as_ref(), &ctx.config.generation, &ctx.config.eval, &registry, &mut sink)?
        }
        None => {
            let mut sink: Vec<AuditRecord> = Vec::new();
            run_benchmark(&tasks, backend.as_ref(), &ctx.config.generation, &ctx.config.eval, &registry, &mut sink)?
        }
    };
    let doc = EvalDocument { meta: serde_json::to_value(&meta)?, report };
    write_text(out, &format!("{}\n", serde_json::to_string_pretty(&doc)?))?;
    print!("{}", render_table(std::slice::from_ref(&doc.report), None)?);
    Ok(())
}

pub fn compare(
    ctx: &Context,
    prompts_path: &Path,
    sides: &[(BackendSpec, Option<String>); 2],
    out: &Path,
    cases_path: Option<&Path>,
    max_retries: Option<u32>,
) -> Result<(), CliError> {
    let text = fs::read_to_string(prompts_path).map_err(|e| CliError::io(prompts_path, e))?;
    let prompts = read_prompts(&text);
    let mut retry = ctx.config.retry;
    if let Some(n) = max_retries {
        retry.max_retries = n;
    }
    let mut labels: Vec<String> =
        sides.iter().map(|(spec, label)| label.clone().unwrap_or_else(|| spec_label(spec))).collect();
    if labels[0] == labels[1] {
        labels[0].push_str(" (A)");
        labels[1].push_str(" (B)");
    }
    let a = build_backend(&sides[0].0, &labels[0], retry)?;
    let b = build_backend(&sides[1].0, &labels[1], retry)?;
    let tokenizer = ctx.tokenizer()?;
    let cases = compare_outputs(&prompts, a.as_ref(), b.as_ref(), &ctx.config.generation, tokenizer.as_ref(), ctx.config.workers)
        .map_err(|e| CliError::Data(e.to_string()))?;
    let report = render_comparison(&cases).map_err(|e| CliError::Data(e.to_string()))?;
    write_text(out, &format!("{}{report}", ctx.meta("compare").markdown_line()))?;
    if let Some(path) = cases_path {
        write_records::<ComparisonCase, _>(path, &ctx.meta("compare"), &cases)?;
    }
    let summary = summarize(&cases).map_err(|e| CliError::Data(e.to_string()))?;
    for s in &summary {
        let mean = s.chars.map(|c| format!("{:.1}", c.mean)).unwrap_or_else(|| "-".into());
        println!("{}: cases={} failed={} mean_chars={mean}", s.model, cases.len(), s.failed);
    }
    if summary.iter().all(|s| s.failed == cases.len()) {
        return Err(CliError::Backend("every generation failed on both sides".into()));
    }
    Ok(())
}

fn read_eval_report(path: &Path) -> Result<BenchmarkReport, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    let report = value.get("report").cloned().unwrap_or(value);
    serde_json::from_value(report).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

pub fn report(ctx: &Context, tuned: &Path, original: &Path, out: Option<&Path>, json: Option<&Path>) -> Result<(), CliError> {
    let tuned = read_eval_report(tuned)?;
    let original = read_eval_report(original)?;
    let delta = diff(&tuned, &original)?;
    let table = render_table(&[original.clone(), tuned.clone()], Some(&delta))?;
    match out {
        Some(path) => write_text(path, &format!("{}{table}", ctx.meta("report").markdown_line()))?,
        None => print!("{table}"),
    }
    if let Some(path) = json {
        let doc = ReportDocument { reports: vec![original, tuned], diff: Some(delta) };
        let mut value = serde_json::to_value(&doc)?;
        value["_meta"] = serde_json::to_value(ctx.meta("report"))?;
        let sorted: BTreeMap<String, serde_json::Value> = serde_json::from_value(value)?;
        write_text(path, &format!("{}\n", serde_json::to_string_pretty(&sorted)?))?;
    }
    Ok(())
}
