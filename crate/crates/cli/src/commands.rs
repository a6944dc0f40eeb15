use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use log::info;
use reseb_core::attribution::{
    background_mean, explain_all, importance_report, model_value_fn, pick_samples, write_summary, AttributionManifest,
    AttributionMatrix, SampleAttribution, BACKGROUND_SAMPLES,
};
use reseb_core::evaluation::{
    average_trials, format_avgr, format_ranks, format_table, rank_rows, read_table, Group, Metric, MetricRow,
};
use reseb_core::models::{ablation_variant, Architecture, Model, ModelSpec, Variant};
use reseb_core::pipeline::{
    build_cohort, cohort_summary, group_loans, parse_file, read_archive, write_archive, write_compact, CohortDataset,
    CohortManifest, Layout, INPUT_MONTHS,
};
use reseb_core::synth::generate;
use reseb_core::training::{evaluate_model, predict, run_trials, TrialSet};
use serde::Serialize;

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use crate::manifest::Run;
use crate::Common;

pub const RECORDS_FILE: &str = "records.txt";
pub const METRICS_FILE: &str = "metrics.csv";

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Validation(msg.into())
}

fn require(path: &Path, what: &str) -> CliResult<()> {
    if path.exists() {
        Ok(())
    } else {
        Err(invalid(format!("missing {what}: {}", path.display())))
    }
}

fn out_dir(common: &Common) -> CliResult<PathBuf> {
    let dir = common.out.clone().ok_or_else(|| invalid("--out is required"))?;
    std::fs::create_dir_all(&dir)?;
    Ok(dir)
}

fn write(dir: &Path, run: &mut Run, name: &str, contents: &str) -> CliResult<()> {
    std::fs::write(dir.join(name), contents)?;
    run.output(name);
    Ok(())
}

fn layout(config: &RunConfig) -> CliResult<Layout> {
    let mut layout = Layout::resolve(&config.input.layout)?;
    if let Some(d) = config.input.delimiter {
        layout.delimiter = d;
    }
    Ok(layout)
}

fn load_cohort(data: &Path, run: &mut Run) -> CliResult<CohortDataset> {
    require(data, "cohort archive")?;
    run.input(data);
    let (ds, _) = read_archive(data)?;
    Ok(ds)
}

fn load_model(checkpoint: &Path, ds: &CohortDataset, run: &mut Run) -> CliResult<Model> {
    require(checkpoint, "checkpoint")?;
    run.input(checkpoint);
    let model = Model::load(checkpoint)?;
    if model.spec.features != ds.features() || model.spec.steps != INPUT_MONTHS {
        return Err(invalid(format!(
            "checkpoint expects {} months of {} features, cohort has {} of {}",
            model.spec.steps,
            model.spec.features,
            INPUT_MONTHS,
            ds.features()
        )));
    }
    Ok(model)
}

pub fn synth(common: &Common, loans: Option<usize>, delimiter: Option<char>) -> CliResult<()> {
    let mut config = RunConfig::load(common.config.as_deref())?;
    if let Some(s) = common.seed {
        config.synth.seed = s;
    }
    if let Some(n) = loans {
        config.synth.loans = n;
    }
    if let Some(d) = delimiter {
        config.input.delimiter = Some(d);
    }
    config.synth.validate()?;
    let dir = out_dir(common)?;
    let mut run = Run::start("synth", config.to_toml());
    run.seeds.insert("synth".into(), config.synth.seed);
    let records = generate(&config.synth)?;
    let mut buf = Vec::new();
    write_compact(&mut buf, &records, config.input.delimiter.unwrap_or('|'))?;
    std::fs::write(dir.join(RECORDS_FILE), buf)?;
    run.output(RECORDS_FILE);
    println!("synth: {} loans, {} records -> {}", config.synth.loans, records.len(), dir.display());
    run.finish(&dir)
}

#[derive(Serialize)]
struct IngestReport {
    parse: reseb_core::pipeline::ParseDiagnostics,
    grouping: reseb_core::pipeline::GroupDiagnostics,
    summary: reseb_core::pipeline::CohortSummary,
}

pub fn ingest(common: &Common, input: &Path, layout_flag: Option<String>, delimiter: Option<char>) -> CliResult<()> {
    let mut config = RunConfig::load(common.config.as_deref())?;
    if let Some(l) = layout_flag {
        config.input.layout = l;
    }
    if delimiter.is_some() {
        config.input.delimiter = delimiter;
    }
    let layout = layout(&config)?;
    require(input, "input file")?;
    let dir = out_dir(common)?;
    let mut run = Run::start("ingest", config.to_toml());
    run.input(input);
    let (records, parse) = parse_file(input, &layout, false)?;
    let (loans, grouping) = group_loans(records);
    let summary = cohort_summary(&loans);
    let records: Vec<_> = loans.into_iter().flat_map(|l| l.records).collect();
    let mut buf = Vec::new();
    write_compact(&mut buf, &records, '|')?;
    std::fs::write(dir.join(RECORDS_FILE), buf)?;
    run.output(RECORDS_FILE);
    println!(
        "ingest: {} rows read, {} rejected, {} loans, default rate {:.4}",
        parse.rows_read, parse.rows_rejected, summary.loans, summary.default_rate
    );
    let report = IngestReport {
        parse,
        grouping,
        summary,
    };
    write(&dir, &mut run, "ingest.toml", &toml::to_string(&report).expect("report serializes"))?;
    run.finish(&dir)
}

pub fn window(
    common: &Common,
    input: &Path,
    layout_flag: Option<String>,
    delimiter: Option<char>,
    stride: Option<usize>,
    balanced_test: bool,
    cohort: Option<String>,
) -> CliResult<()> {
    let mut config = RunConfig::load(common.config.as_deref())?;
    if let Some(l) = layout_flag {
        config.input.layout = l;
    }
    if delimiter.is_some() {
        config.input.delimiter = delimiter;
    }
    if let Some(s) = stride {
        config.pipeline.stride = s;
    }
    if balanced_test {
        config.pipeline.balanced_test = true;
    }
    if let Some(s) = common.seed {
        config.pipeline.seed = s;
    }
    if let Some(c) = cohort {
        config.input.cohort = c;
    }
    config.pipeline.validate()?;
    let layout = layout(&config)?;
    require(input, "input file")?;
    let dir = out_dir(common)?;
    let mut run = Run::start("window", config.to_toml());
    run.input(input);
    run.seeds.insert("pipeline".into(), config.pipeline.seed);
    let (records, parse) = parse_file(input, &layout, false)?;
    let (loans, _) = group_loans(records.clone());
    let summary = cohort_summary(&loans);
    let (ds, diag) = build_cohort(&config.input.cohort, records, &layout, &config.pipeline)?;
    let mut manifest = CohortManifest::new(&ds, &config.pipeline, &layout, diag);
    manifest.summary = Some(summary);
    manifest.parse = Some(parse);
    write_archive(&dir, &ds, &manifest)?;
    for f in [
        reseb_core::pipeline::archive::ARRAYS_FILE,
        reseb_core::pipeline::archive::MANIFEST_FILE,
        reseb_core::pipeline::archive::LOANS_FILE,
        reseb_core::pipeline::archive::PROVENANCE_FILE,
    ] {
        run.output(f);
    }
    println!(
        "window: {} candidates, {} filtered, train {} ({} positive), test {} ({} positive)",
        manifest.diagnostics.candidates,
        manifest.diagnostics.filtered,
        manifest.train_samples,
        manifest.train_positives,
        manifest.test_samples,
        manifest.test_positives
    );
    run.finish(&dir)
}

fn trial_config(common: &Common, trials: Option<usize>) -> CliResult<RunConfig> {
    let mut config = RunConfig::load(common.config.as_deref())?;
    if let Some(s) = common.seed {
        config.train.seed = s;
    }
    if let Some(w) = common.workers {
        config.trials.workers = w;
    }
    if let Some(n) = trials {
        config.trials.count = n;
    }
    if config.trials.count == 0 {
        return Err(invalid("trial count must be at least 1"));
    }
    config.train.validate()?;
    Ok(config)
}

fn shaped(spec: &ModelSpec, ds: &CohortDataset) -> ModelSpec {
    ModelSpec {
        steps: INPUT_MONTHS,
        features: ds.features(),
        ..spec.clone()
    }
}

fn trial_rows(name: &str, cohort: &str, set: &TrialSet) -> Vec<MetricRow> {
    set.trials
        .iter()
        .map(|t| MetricRow::from_report(name, cohort, Some(t.index), &t.report))
        .collect()
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or("NA".into(), |x| format!("{x:.4}"))
}

pub fn train(common: &Common, data: &Path, model: Option<String>, trials: Option<usize>) -> CliResult<()> {
    let mut config = trial_config(common, trials)?;
    if let Some(m) = model {
        config.model.architecture = m.parse::<Architecture>()?;
    }
    let dir = out_dir(common)?;
    let mut run = Run::start("train", config.to_toml());
    let ds = load_cohort(data, &mut run)?;
    let spec = shaped(&config.model, &ds);
    spec.validate()?;
    run.seeds.insert("train".into(), config.train.seed);
    let n = config.trials.count;
    info!("training {} x{n} on {}", spec.architecture, ds.cohort);
    let set = run_trials(&spec, &ds, &ds.train, &ds.test, &config.train, n, config.trials.workers)?;

    let name = spec.architecture.display_name();
    let mut rows = trial_rows(name, &ds.cohort, &set);
    rows.extend(average_trials(&rows));
    write(&dir, &mut run, METRICS_FILE, &format_table(&rows))?;
    let mut log = String::new();
    for t in &set.trials {
        log.push_str(&t.history.log_lines(Some(t.index)));
    }
    write(&dir, &mut run, "train.log", &log)?;
    std::fs::create_dir_all(dir.join("checkpoints"))?;
    for t in &set.trials {
        let name = format!("checkpoints/trial-{}.reseb", t.index);
        t.model.save(&dir.join(&name))?;
        run.output(&name);
    }
    let mean = set.mean();
    println!(
        "train: {name} on {} over {n} trials: accuracy {} precision {} recall {} f1 {} auc {} (auc std {})",
        ds.cohort,
        fmt_opt(mean[0]),
        fmt_opt(mean[1]),
        fmt_opt(mean[2]),
        fmt_opt(mean[3]),
        fmt_opt(mean[4]),
        fmt_opt(set.std(Metric::Auc))
    );
    run.finish(&dir)
}

pub fn eval(common: &Common, data: &Path, checkpoint: &Path) -> CliResult<()> {
    let config = RunConfig::load(common.config.as_deref())?;
    let dir = out_dir(common)?;
    let mut run = Run::start("eval", config.to_toml());
    let ds = load_cohort(data, &mut run)?;
    let model = load_model(checkpoint, &ds, &mut run)?;
    let batch = config.train.eval_batch_size;
    let report = evaluate_model(&model, &ds, &ds.test, batch)?;
    let scores = predict(&model, &ds, &ds.test, batch)?;
    let row = MetricRow::from_report(model.spec.architecture.display_name(), &ds.cohort, Some(0), &report);
    write(&dir, &mut run, METRICS_FILE, &format_table(std::slice::from_ref(&row)))?;
    let mut text = String::from("loan_id,start,label,score\n");
    for (s, p) in ds.test.iter().zip(&scores) {
        writeln!(text, "{},{},{},{p:.12e}", ds.loan_id(s), ds.start_period(s), s.label).unwrap();
    }
    write(&dir, &mut run, "scores.csv", &text)?;
    println!(
        "eval: accuracy {} precision {} recall {} f1 {} auc {}",
        fmt_opt(report.accuracy),
        fmt_opt(report.precision),
        fmt_opt(report.recall),
        fmt_opt(report.f1),
        fmt_opt(report.auc)
    );
    run.finish(&dir)
}

pub fn rank(metrics: &Path, group: Group, out: Option<&Path>) -> CliResult<()> {
    require(metrics, "metric table")?;
    let rows = read_table(metrics)?;
    if rows.is_empty() {
        return Err(invalid(format!("metric table {} has no rows", metrics.display())));
    }
    let tables = rank_rows(&rows, group)?;
    let wide = format_avgr(&tables);
    let long = format_ranks(&tables);
    println!("{wide}\n{long}");
    if let Some(dir) = out {
        std::fs::create_dir_all(dir)?;
        let mut run = Run::start("rank", format!("group = \"{group:?}\"\n"));
        run.input(metrics);
        write(dir, &mut run, "avgr.csv", &wide)?;
        write(dir, &mut run, "ranks.csv", &long)?;
        run.finish(dir)?;
    }
    Ok(())
}

fn variant_label(v: Option<Variant>, spec: &ModelSpec) -> String {
    match v {
        None => spec.architecture.display_name().to_string(),
        Some(v) => format!("{} ({v})", spec.architecture.display_name()),
    }
}

/// Metrics down the side, models across, one block per cohort.
pub fn format_ablation(cohort: &str, columns: &[(String, [Option<f64>; 5])]) -> String {
    let mut out = String::from("cohort,metric");
    for (name, _) in columns {
        write!(out, ",{name}").unwrap();
    }
    out.push('\n');
    for m in Metric::ALL {
        write!(out, "{cohort},{}", m.name()).unwrap();
        for (_, values) in columns {
            write!(out, ",{}", fmt_opt(values[m as usize])).unwrap();
        }
        out.push('\n');
    }
    out
}

pub fn ablate(common: &Common, data: &Path, variants: &str, trials: Option<usize>) -> CliResult<()> {
    let config = trial_config(common, trials)?;
    let mut chosen: Vec<Variant> = Vec::new();
    for v in variants.split(',').map(str::trim).filter(|v| !v.is_empty()) {
        let v: Variant = v.parse()?;
        if !chosen.contains(&v) {
            chosen.push(v);
        }
    }
    chosen.sort_by_key(|v| *v as usize);
    let dir = out_dir(common)?;
    let mut run = Run::start("ablate", config.to_toml());
    let ds = load_cohort(data, &mut run)?;
    run.seeds.insert("train".into(), config.train.seed);
    let base = shaped(&config.model, &ds);
    let mut specs = vec![(None, ModelSpec {
        architecture: Architecture::ReseBilstm,
        ..base.clone()
    })];
    for v in chosen {
        specs.push((Some(v), ablation_variant(&specs[0].1, v)?));
    }
    let mut rows = Vec::new();
    let mut columns = Vec::new();
    for (v, spec) in &specs {
        let label = variant_label(*v, spec);
        info!("ablation: training {label}");
        let set = run_trials(spec, &ds, &ds.train, &ds.test, &config.train, config.trials.count, config.trials.workers)?;
        rows.extend(trial_rows(&label, &ds.cohort, &set));
        columns.push((label, set.mean()));
    }
    rows.extend(average_trials(&rows));
    write(&dir, &mut run, METRICS_FILE, &format_table(&rows))?;
    let report = format_ablation(&ds.cohort, &columns);
    write(&dir, &mut run, "ablation.csv", &report)?;
    print!("{report}");
    run.finish(&dir)
}

pub fn explain(
    common: &Common,
    data: &Path,
    checkpoint: &Path,
    samples: Option<usize>,
    permutations: Option<usize>,
) -> CliResult<()> {
    let mut config = RunConfig::load(common.config.as_deref())?;
    if let Some(s) = common.seed {
        config.explain.seed = s;
    }
    if let Some(n) = samples {
        config.explain.samples = n;
    }
    if let Some(n) = permutations {
        config.explain.permutations = n;
    }
    if config.explain.samples == 0 || config.explain.permutations == 0 {
        return Err(invalid("explain needs at least one sample and one permutation"));
    }
    let workers = common.workers.unwrap_or(1);
    let dir = out_dir(common)?;
    let mut run = Run::start("explain", config.to_toml());
    let ds = load_cohort(data, &mut run)?;
    let model = load_model(checkpoint, &ds, &mut run)?;
    run.seeds.insert("explain".into(), config.explain.seed);
    run.seeds.insert("background".into(), config.explain.background_seed);

    let train_rows: Vec<&[f64]> = ds.train.iter().map(|s| ds.inputs(s)).collect();
    let background = background_mean(&train_rows, config.explain.background_seed)?;
    let chosen = pick_samples(&ds.test, config.explain.samples, config.explain.seed);
    let inputs: Vec<&[f64]> = chosen.iter().map(|s| ds.inputs(s)).collect();
    let f = model_value_fn(&model);
    let explanations = explain_all(&f, &inputs, &background, config.explain.permutations, config.explain.seed, workers)?;
    let set = AttributionMatrix {
        model_tag: model.spec.architecture.tag().to_string(),
        steps: INPUT_MONTHS,
        feature_names: ds.feature_names.clone(),
        samples: chosen
            .iter()
            .zip(explanations)
            .map(|(s, explanation)| SampleAttribution {
                id: format!("{}@{}", ds.loan_id(s), ds.start_period(s)),
                explanation,
                raw: ds.raw_inputs(s),
            })
            .collect(),
    };
    let mut summary = Vec::new();
    write_summary(&mut summary, &set)?;
    std::fs::write(dir.join("summary.csv"), summary)?;
    run.output("summary.csv");
    let report = importance_report(&set)?;
    write(&dir, &mut run, "importance.csv", &report.format_ranking())?;
    write(&dir, &mut run, "month_counts.csv", &report.format_counts())?;
    let manifest = AttributionManifest {
        model_checkpoint: checkpoint.display().to_string(),
        model_tag: set.model_tag.clone(),
        background_seed: config.explain.background_seed,
        background_samples: BACKGROUND_SAMPLES.min(ds.train.len()),
        permutations: config.explain.permutations,
        permutation_seed: config.explain.seed,
        samples: set.samples.len(),
    };
    write(&dir, &mut run, "attribution.toml", &toml::to_string(&manifest).expect("manifest serializes"))?;
    print!("{}", report.format_counts());
    run.finish(&dir)
}
