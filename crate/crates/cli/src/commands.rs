//! Subcommand implementations. Each is independently runnable and
//! idempotent given caches; outputs land under the resolved out_dir.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::Serialize;

use poskit_core::corpus::{read_corpus, write_mixture, CorpusRecord};
use poskit_core::evalplan::{conditions, generate_condition};
use poskit_core::prompting::PromptInstance;
use poskit_core::pyindex::{generate_benchmark, render_benchmark_prompts};
use poskit_core::runner::{
    prompt_hash, read_trials, run_condition, write_trials, Backend, HttpBackend, OracleBackend,
    ReasoningMode, ResponseCache, RunContext, TrialRecord, UniformRandomBackend,
};
use poskit_core::scoring::{
    accuracy, accuracy_csv, asymmetry_csv, asymmetry_report, confusion, per_offset_accuracy,
    ScoreError,
};

use crate::config::Resolved;

pub fn cmd_generate(cfg: &Resolved) -> anyhow::Result<()> {
    cfg.write_snapshot()?;
    let prompts_dir = cfg.out_dir.join("prompts");
    std::fs::create_dir_all(&prompts_dir)?;
    let specs = conditions(&cfg.eval)?;
    let mut total = 0usize;
    for spec in &specs {
        let prompts = generate_condition(&cfg.eval, spec)?;
        let path = prompts_dir.join(format!("{}.jsonl", spec.id()));
        write_prompts(&path, &prompts)?;
        println!("{}\t{} prompts", spec.id(), prompts.len());
        total += prompts.len();
    }
    println!("generated {total} prompts across {} conditions", specs.len());
    Ok(())
}

pub fn cmd_pyindex(cfg: &Resolved) -> anyhow::Result<()> {
    cfg.write_snapshot()?;
    let cases = generate_benchmark(cfg.seed, cfg.pyindex_per_category)?;
    let dir = cfg.out_dir.join("pyindex");
    std::fs::create_dir_all(&dir)?;

    // Benchmark wire format: {category, source_text, xs, gold, case_id}.
    let mut out = String::new();
    for case in &cases {
        let line = serde_json::json!({
            "category": case.category.label(),
            "source_text": case.source_text,
            "xs": case.values,
            "gold": case.gold,
            "case_id": case.case_id,
        });
        out.push_str(&line.to_string());
        out.push('\n');
    }
    let cases_path = dir.join("cases.jsonl");
    std::fs::write(&cases_path, out)?;

    let prompts = render_benchmark_prompts(&cases, cfg.seed)?;
    let mut by_condition: BTreeMap<String, Vec<PromptInstance>> = BTreeMap::new();
    for prompt in prompts {
        by_condition
            .entry(prompt.condition.id())
            .or_default()
            .push(prompt);
    }
    let prompts_dir = cfg.out_dir.join("prompts");
    std::fs::create_dir_all(&prompts_dir)?;
    for (condition_id, prompts) in &by_condition {
        write_prompts(&prompts_dir.join(format!("{condition_id}.jsonl")), prompts)?;
        println!("{condition_id}\t{} prompts", prompts.len());
    }
    println!(
        "pyindex benchmark: {} cases ({} per category) -> {}",
        cases.len(),
        cfg.pyindex_per_category,
        cases_path.display()
    );
    Ok(())
}

pub fn cmd_adapt(
    cfg: &Resolved,
    code_flags: &[PathBuf],
    adapted_flags: &[PathBuf],
) -> anyhow::Result<()> {
    cfg.write_snapshot()?;
    let code_paths: Vec<PathBuf> = if code_flags.is_empty() {
        cfg.corpus.code_paths.clone()
    } else {
        code_flags.to_vec()
    };
    let adapted_paths: Vec<PathBuf> = if adapted_flags.is_empty() {
        cfg.corpus.adapted_paths.clone()
    } else {
        adapted_flags.to_vec()
    };
    if cfg.mixture.code > 0 && code_paths.is_empty() {
        anyhow::bail!("mixture requests code examples but no code corpus was given (--code or [corpus].code_paths)");
    }
    if cfg.mixture.adapted > 0 && adapted_paths.is_empty() {
        anyhow::bail!("mixture requests adapted examples but no corpus was given (--adapted or [corpus].adapted_paths)");
    }

    let format = cfg.corpus_format();
    let mut code_records = load_records(&code_paths, &format)?;
    let mut adapted_records = load_records(&adapted_paths, &format)?;
    let mut code_snippets = code_records.drain(..).map(|r| r.text);
    let mut adapted_iter = adapted_records.drain(..);

    let train_dir = cfg.out_dir.join("train");
    std::fs::create_dir_all(&train_dir)?;
    let path = train_dir.join("mixture.jsonl");
    let stats = write_mixture(&path, &cfg.mixture, &mut code_snippets, &mut adapted_iter)?;
    println!(
        "mixture: {} examples ({} synthetic / {} code / {} adapted) -> {}",
        stats.total(),
        stats.synthetic,
        stats.code,
        stats.adapted,
        path.display()
    );
    println!(
        "synthetic forward fraction {:.4}, endpoint fraction {:.4}",
        stats.synthetic_forward as f64 / stats.synthetic.max(1) as f64,
        stats.synthetic_endpoint as f64 / stats.synthetic.max(1) as f64
    );
    Ok(())
}

fn load_records(
    paths: &[PathBuf],
    format: &poskit_core::corpus::CorpusFormat,
) -> anyhow::Result<Vec<CorpusRecord>> {
    let mut records = Vec::new();
    for path in paths {
        for record in read_corpus(path, format)? {
            match record {
                Ok(r) => records.push(r),
                Err(e) => eprintln!("skipping record: {e}"),
            }
        }
    }
    Ok(records)
}

pub struct EvalArgs {
    pub backend: String,
    pub prompts: Option<PathBuf>,
    pub reasoning: Option<ReasoningMode>,
    pub compare_reasoning: bool,
    pub concurrency: Option<usize>,
}

pub fn cmd_eval(cfg: &Resolved, args: &EvalArgs) -> anyhow::Result<()> {
    cfg.write_snapshot()?;
    let backend: Box<dyn Backend> = match args.backend.as_str() {
        "mock-oracle" => Box::new(OracleBackend),
        "mock-random" => Box::new(UniformRandomBackend { seed: cfg.seed }),
        name => {
            let config = cfg
                .backend
                .clone()
                .with_context(|| format!("backend {name:?} needs a [backend] config section"))?;
            if config.id != name {
                anyhow::bail!(
                    "backend {name:?} does not match the configured backend id {:?}",
                    config.id
                );
            }
            Box::new(HttpBackend::new(config).map_err(|e| anyhow::anyhow!("{e}"))?)
        }
    };

    let prompt_files = {
        let root = args
            .prompts
            .clone()
            .unwrap_or_else(|| cfg.out_dir.join("prompts"));
        collect_jsonl(&root)?
    };
    if prompt_files.is_empty() {
        anyhow::bail!("no prompt files found; run `poskit generate` first");
    }

    let cache = ResponseCache::new(cfg.out_dir.join("cache")).map_err(|e| anyhow::anyhow!("{e}"))?;
    let backend_cfg_concurrency = cfg.backend.as_ref().map(|b| b.concurrency);
    let reasoning = args
        .reasoning
        .or(cfg.backend.as_ref().map(|b| b.reasoning))
        .unwrap_or(ReasoningMode::Off);
    let ctx = RunContext {
        concurrency: args.concurrency.or(backend_cfg_concurrency).unwrap_or(4),
        max_retries: cfg.backend.as_ref().map(|b| b.max_retries).unwrap_or(3),
        backoff_base_ms: cfg.backend.as_ref().map(|b| b.backoff_base_ms).unwrap_or(250),
        reasoning,
        cache: Some(&cache),
        gauge: None,
    };

    let trials_dir = cfg.out_dir.join("trials").join(backend.id());
    std::fs::create_dir_all(&trials_dir)?;
    for file in &prompt_files {
        let prompts = read_prompts(file)?;
        if prompts.is_empty() {
            eprintln!(
                "note: {} holds no prompts (condition unsatisfiable at its length); skipped",
                file.display()
            );
            continue;
        }
        let out_path = trials_dir.join(file.file_name().expect("prompt files are named"));

        if args.compare_reasoning {
            let pairs =
                poskit_core::runner::run_reasoning_comparison(&prompts, backend.as_ref(), &ctx)
                    .map_err(|e| anyhow::anyhow!("{e}"))?;
            let mut out = String::new();
            for pair in &pairs {
                out.push_str(&serde_json::to_string(pair)?);
                out.push('\n');
            }
            let pair_path = trials_dir.join(format!(
                "reasoning_{}",
                file.file_name().unwrap().to_string_lossy()
            ));
            std::fs::write(&pair_path, out)?;
            let on_acc = accuracy(pairs.iter().map(|p| &p.on)).unwrap_or(0.0);
            let off_acc = accuracy(pairs.iter().map(|p| &p.off)).unwrap_or(0.0);
            println!(
                "{}\toff {:.1}% -> on {:.1}%",
                file.file_stem().unwrap().to_string_lossy(),
                off_acc * 100.0,
                on_acc * 100.0
            );
            continue;
        }

        // Resume: keep existing records, run only prompts without one.
        let existing: Vec<TrialRecord> = if out_path.exists() {
            read_trials(&out_path)?
        } else {
            Vec::new()
        };
        let have: std::collections::HashSet<&str> =
            existing.iter().map(|t| t.prompt_hash.as_str()).collect();
        let missing: Vec<PromptInstance> = prompts
            .iter()
            .filter(|p| !have.contains(prompt_hash(&p.messages).as_str()))
            .cloned()
            .collect();

        let mut all = existing;
        if !missing.is_empty() {
            let fresh = run_condition(&missing, backend.as_ref(), &ctx)
                .map_err(|e| anyhow::anyhow!("{e}"))?;
            all.extend(fresh);
        }
        write_trials(&out_path, &all)?;
        let acc = accuracy(all.iter()).map(|a| a * 100.0).unwrap_or(0.0);
        println!(
            "{}\t{} trials\t{:.1}% correct",
            file.file_stem().unwrap().to_string_lossy(),
            all.len(),
            acc
        );
    }
    Ok(())
}

#[derive(Serialize)]
struct ScoreSummary {
    overall_accuracy: f64,
    n_trials: usize,
    per_condition: Vec<ConditionLine>,
}

#[derive(Serialize)]
struct ConditionLine {
    condition: String,
    overall: f64,
    mean_across_positions: f64,
    sd_across_positions: f64,
    n_trials: usize,
}

pub fn cmd_score(cfg: &Resolved, trial_paths: &[PathBuf]) -> anyhow::Result<()> {
    let trials = load_all_trials(cfg, trial_paths)?;
    let reports_dir = cfg.out_dir.join("reports");
    std::fs::create_dir_all(&reports_dir)?;

    let groups = group_by_condition(&trials);
    let mut per_condition = Vec::new();
    for (condition_id, group) in &groups {
        let owned: Vec<TrialRecord> = group.iter().map(|t| (*t).clone()).collect();
        let rows = per_offset_accuracy(&owned)?;
        std::fs::write(
            reports_dir.join(format!("accuracy_{condition_id}.csv")),
            accuracy_csv(&rows),
        )?;
        let accs: Vec<f64> = rows.iter().map(|r| r.accuracy).collect();
        let mean = accs.iter().sum::<f64>() / accs.len() as f64;
        let sd = (accs.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / accs.len() as f64).sqrt();
        let overall = accuracy(group.iter().copied())?;
        println!(
            "{condition_id}\t{:.1}% over {} trials",
            overall * 100.0,
            group.len()
        );
        per_condition.push(ConditionLine {
            condition: condition_id.clone(),
            overall,
            mean_across_positions: mean,
            sd_across_positions: sd,
            n_trials: group.len(),
        });
    }

    let summary = ScoreSummary {
        overall_accuracy: accuracy(trials.iter())?,
        n_trials: trials.len(),
        per_condition,
    };
    let path = reports_dir.join("accuracy_summary.json");
    std::fs::write(&path, serde_json::to_vec_pretty(&summary)?)?;
    println!(
        "overall {:.2}% over {} trials -> {}",
        summary.overall_accuracy * 100.0,
        summary.n_trials,
        path.display()
    );
    Ok(())
}

pub fn cmd_report(cfg: &Resolved, trial_paths: &[PathBuf]) -> anyhow::Result<()> {
    let reports_dir = cfg.out_dir.join("reports");
    std::fs::create_dir_all(&reports_dir)?;
    let paired_tables = write_reasoning_tables(cfg, trial_paths, &reports_dir)?;

    let trials = match load_all_trials(cfg, trial_paths) {
        Ok(trials) => trials,
        // A pure reasoning-comparison run has only paired records.
        Err(e) if paired_tables > 0 => {
            eprintln!("note: {e}");
            return Ok(());
        }
        Err(e) => return Err(e),
    };

    for (condition_id, group) in &group_by_condition(&trials) {
        let owned: Vec<TrialRecord> = group.iter().map(|t| (*t).clone()).collect();
        let matrix = confusion(&owned)?;
        std::fs::write(
            reports_dir.join(format!("confusion_{condition_id}.csv")),
            matrix.to_csv(),
        )?;
        println!(
            "confusion_{condition_id}.csv\t{} x {} bins",
            matrix.queried_bins.len(),
            matrix.answered_bins.len()
        );
    }

    match asymmetry_report(&trials) {
        Ok(report) => {
            std::fs::write(
                reports_dir.join("asymmetry.json"),
                serde_json::to_vec_pretty(&report)?,
            )?;
            std::fs::write(reports_dir.join("asymmetry.csv"), asymmetry_csv(&report))?;
            for entry in &report.asymmetry {
                println!(
                    "{} {}: forward {:.1}% backward {:.1}% gap {:.1}pp",
                    entry.task,
                    entry.anchor.map(|a| a.label()).unwrap_or("-"),
                    entry.forward_mean * 100.0,
                    entry.backward_mean * 100.0,
                    entry.asymmetry * 100.0
                );
            }
        }
        Err(ScoreError::MissingDirection) => {
            eprintln!("note: trials cover a single direction; asymmetry table skipped");
        }
        Err(e) => return Err(e.into()),
    }
    Ok(())
}

/// Paired per-position accuracy tables from `reasoning_*.jsonl` files:
/// one row per queried position with reasoning-off and reasoning-on
/// accuracy side by side.
fn write_reasoning_tables(
    cfg: &Resolved,
    trial_paths: &[PathBuf],
    reports_dir: &Path,
) -> anyhow::Result<usize> {
    let roots: Vec<PathBuf> = if trial_paths.is_empty() {
        vec![cfg.out_dir.join("trials")]
    } else {
        trial_paths.to_vec()
    };
    let mut written = 0usize;
    for root in roots {
        for file in collect_jsonl(&root)? {
            let Some(name) = file.file_name().map(|n| n.to_string_lossy().into_owned()) else {
                continue;
            };
            if !name.starts_with("reasoning_") {
                continue;
            }
            let text = std::fs::read_to_string(&file)?;
            let pairs: Vec<poskit_core::runner::ReasoningPair> = text
                .lines()
                .filter(|l| !l.trim().is_empty())
                .map(serde_json::from_str)
                .collect::<Result<_, _>>()?;
            if pairs.is_empty() {
                continue;
            }
            let off: Vec<TrialRecord> = pairs.iter().map(|p| p.off.clone()).collect();
            let on: Vec<TrialRecord> = pairs.iter().map(|p| p.on.clone()).collect();
            let off_rows = per_offset_accuracy(&off)?;
            let on_rows = per_offset_accuracy(&on)?;
            let mut csv = String::from("position,off_accuracy,on_accuracy,n_trials\n");
            for (off_row, on_row) in off_rows.iter().zip(&on_rows) {
                csv.push_str(&format!(
                    "{},{:.6},{:.6},{}\n",
                    off_row.bin, off_row.accuracy, on_row.accuracy, off_row.n_trials
                ));
            }
            let stem = name.trim_end_matches(".jsonl");
            std::fs::write(reports_dir.join(format!("{stem}.csv")), csv)?;
            println!(
                "{stem}.csv\toff {:.1}% -> on {:.1}%",
                accuracy(off.iter())? * 100.0,
                accuracy(on.iter())? * 100.0
            );
            written += 1;
        }
    }
    Ok(written)
}

pub fn cmd_export_sft(cfg: &Resolved, input: Option<&Path>) -> anyhow::Result<()> {
    cfg.write_snapshot()?;
    let input = input
        .map(Path::to_path_buf)
        .unwrap_or_else(|| cfg.out_dir.join("train").join("mixture.jsonl"));
    let examples = poskit_core::corpus::read_training_examples(&input)
        .with_context(|| format!("reading training examples from {}", input.display()))?;
    let sft_dir = cfg.out_dir.join("sft");
    std::fs::create_dir_all(&sft_dir)?;
    let data_path = sft_dir.join("train.jsonl");
    let manifest_path = sft_dir.join("manifest.json");
    let manifest = poskit_core::sft::export(examples, &data_path, &manifest_path, Some(cfg.seed))?;
    println!(
        "exported {} records -> {} (manifest {})",
        manifest.total,
        data_path.display(),
        manifest_path.display()
    );
    Ok(())
}

fn write_prompts(path: &Path, prompts: &[PromptInstance]) -> anyhow::Result<()> {
    let file = std::fs::File::create(path)?;
    let mut writer = std::io::BufWriter::new(file);
    for prompt in prompts {
        serde_json::to_writer(&mut writer, prompt)?;
        writer.write_all(b"\n")?;
    }
    writer.flush()?;
    Ok(())
}

fn read_prompts(path: &Path) -> anyhow::Result<Vec<PromptInstance>> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading prompts from {}", path.display()))?;
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|line| serde_json::from_str(line).context("parsing prompt line"))
        .collect()
}

/// All .jsonl files under a path (file, or directory walked recursively),
/// sorted for stable processing order.
fn collect_jsonl(root: &Path) -> anyhow::Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    if root.is_file() {
        files.push(root.to_path_buf());
        return Ok(files);
    }
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        if !dir.is_dir() {
            continue;
        }
        for entry in std::fs::read_dir(&dir)? {
            let path = entry?.path();
            if path.is_dir() {
                stack.push(path);
            } else if path.extension().is_some_and(|e| e == "jsonl") {
                files.push(path);
            }
        }
    }
    files.sort();
    Ok(files)
}

fn load_all_trials(cfg: &Resolved, paths: &[PathBuf]) -> anyhow::Result<Vec<TrialRecord>> {
    let roots: Vec<PathBuf> = if paths.is_empty() {
        vec![cfg.out_dir.join("trials")]
    } else {
        paths.to_vec()
    };
    let mut trials = Vec::new();
    for root in roots {
        for file in collect_jsonl(&root)? {
            if file
                .file_name()
                .is_some_and(|n| n.to_string_lossy().starts_with("reasoning_"))
            {
                continue;
            }
            trials.extend(read_trials(&file)?);
        }
    }
    if trials.is_empty() {
        anyhow::bail!("no trial records found; run `poskit eval` first");
    }
    Ok(trials)
}

fn group_by_condition(
    trials: &[TrialRecord],
) -> BTreeMap<String, Vec<&TrialRecord>> {
    let mut groups: BTreeMap<String, Vec<&TrialRecord>> = BTreeMap::new();
    for trial in trials {
        groups.entry(trial.condition.id()).or_default().push(trial);
    }
    groups
}
