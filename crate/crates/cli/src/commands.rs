use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use serde_json::json;

use arcdsl_core::annotate::{aggregate_tactics, corpus_jsonl, export_corpus, PartBundle};
use arcdsl_core::diag::has_errors;
use arcdsl_core::dsl::Registry;
use arcdsl_core::refactor::{check_call_graph, check_equivalence, check_variable_consistency, parse_chunked, CallGraphConfig};
use arcdsl_core::script::{check_static, interpret, load_solver, permute_colors_check, validate_task, LoadError};
use arcdsl_core::{load_task, ColorTable, Diagnostic, PairKind, TaskRecord};
use arcdsl_pipeline::{
    read_dataset, run_pipeline, HttpClient, Job, LlmClient, PipelineConfig, ReplayClient, RunOptions, DATASET_FILE,
};

use crate::{Format, Outcome};

fn outcome(pass: bool) -> Outcome {
    if pass {
        Outcome::Pass
    } else {
        Outcome::Fail
    }
}

fn task(path: &Path) -> Result<TaskRecord> {
    load_task(path, ColorTable::standard()).with_context(|| format!("reading task {}", path.display()))
}

fn files_with_ext(dir: &Path, ext: &str) -> Result<Vec<PathBuf>> {
    let mut out: Vec<PathBuf> = std::fs::read_dir(dir)
        .with_context(|| format!("reading {}", dir.display()))?
        .map(|e| e.map(|e| e.path()))
        .collect::<Result<_, _>>()?;
    out.retain(|p| p.extension().is_some_and(|e| e == ext));
    out.sort();
    Ok(out)
}

fn stem(p: &Path) -> String {
    p.file_stem().unwrap_or_default().to_string_lossy().into_owned()
}

fn print_diagnostics(diags: &[Diagnostic]) {
    for d in diags {
        println!("  {d}");
    }
}

pub fn validate(tasks: &Path, solvers: &Path, permutations: u64, format: Format) -> Result<Outcome> {
    let reg = Registry::standard();
    let mut missing = Vec::new();
    let mut all_pass = true;
    let mut passed = 0;
    let task_files = files_with_ext(tasks, "json")?;
    for path in &task_files {
        let id = stem(path);
        let solver_path = solvers.join(format!("{id}.py"));
        if !solver_path.is_file() {
            missing.push(id);
            continue;
        }
        let t = task(path)?;
        let script = match load_solver(&solver_path) {
            Ok(s) => s,
            Err(e @ LoadError::Io(..)) => return Err(e.into()),
            Err(e) => {
                all_pass = false;
                match format {
                    Format::Text => println!("FAIL {id}\n  {e}"),
                    Format::Json => println!("{}", json!({"task_id": id, "passed": false, "error": e.to_string()})),
                }
                continue;
            }
        };
        let diags = check_static(&script, reg);
        let report = validate_task(&script, &t, reg);
        let perm_ok = if report.passed {
            (0..permutations).filter(|s| permute_colors_check(&script, &t, reg, *s)).count() as u64
        } else {
            0
        };
        let pass = report.passed && !has_errors(&diags) && perm_ok == permutations;
        all_pass &= pass;
        passed += pass as usize;
        match format {
            Format::Text => {
                let count = |k: PairKind| {
                    let of: Vec<_> = report.pairs.iter().filter(|p| p.kind == k).collect();
                    format!("{k} {}/{}", of.iter().filter(|p| p.passed).count(), of.len())
                };
                print!("{} {id}  {}  {}", if pass { "PASS" } else { "FAIL" }, count(PairKind::Train), count(PairKind::Test));
                if permutations > 0 {
                    print!("  permutations {perm_ok}/{permutations}");
                }
                println!();
                print_diagnostics(&diags);
                for p in report.pairs.iter().filter(|p| !p.passed) {
                    match &p.error {
                        Some(e) => println!("  {} {}: {e}", p.kind, p.index),
                        None => println!("  {} {}: {} cells differ", p.kind, p.index, p.mismatches),
                    }
                }
            }
            Format::Json => println!(
                "{}",
                json!({
                    "task_id": id,
                    "passed": pass,
                    "pairs": report.pairs,
                    "permutations": {"passed": perm_ok, "total": permutations},
                    "diagnostics": diags,
                })
            ),
        }
    }
    if format == Format::Text {
        println!("{passed}/{} tasks pass", task_files.len() - missing.len());
    }
    if !missing.is_empty() {
        bail!("no solver for task(s): {}", missing.join(", "));
    }
    Ok(outcome(all_pass))
}

fn parse_pair(selector: &str) -> Result<(PairKind, usize)> {
    let (kind, index) = selector
        .split_once(':')
        .ok_or_else(|| anyhow!("pair selector must look like train:0 or test:0, got `{selector}`"))?;
    let kind = match kind {
        "train" => PairKind::Train,
        "test" => PairKind::Test,
        _ => bail!("unknown pair kind `{kind}`"),
    };
    Ok((kind, index.parse().with_context(|| format!("bad pair index `{index}`"))?))
}

pub fn trace(task_path: &Path, solver: &Path, selector: &str, format: Format) -> Result<Outcome> {
    let (kind, index) = parse_pair(selector)?;
    let t = task(task_path)?;
    let script = load_solver(solver).with_context(|| format!("reading {}", solver.display()))?;
    let pair = t
        .pair(kind, index)
        .ok_or_else(|| anyhow!("{kind}:{index} is out of range for {}", t.task_id))?;
    let table = ColorTable::standard();
    let diags = check_static(&script, Registry::standard());
    if has_errors(&diags) {
        print_diagnostics(&diags);
        return Ok(Outcome::Fail);
    }
    match interpret(&script, &pair.input, Registry::standard(), table) {
        Ok(trace) => {
            match format {
                Format::Text => print!("{}", trace.render(table)),
                Format::Json => println!("{}", serde_json::to_string(&trace.rendered(table))?),
            }
            Ok(Outcome::Pass)
        }
        Err(e) => {
            println!("{e}");
            Ok(Outcome::Fail)
        }
    }
}

pub fn refactor_check(original: &Path, chunked: &Path, task_path: &Path, format: Format) -> Result<Outcome> {
    let reg = Registry::standard();
    let table = ColorTable::standard();
    let script = load_solver(original).with_context(|| format!("reading {}", original.display()))?;
    let text = std::fs::read_to_string(chunked).with_context(|| format!("reading {}", chunked.display()))?;
    let program = parse_chunked(&text).map_err(|e| anyhow!("{}: {e}", chunked.display()))?;
    let t = task(task_path)?;
    let mut diags = check_call_graph(&program, reg, &CallGraphConfig::default());
    diags.extend(check_variable_consistency(&program, &script));
    let eq = check_equivalence(&program, &script, &t, reg, table);
    diags.extend(eq.diagnostics);
    let pass = eq.equivalent && !has_errors(&diags);
    match format {
        Format::Text => {
            print_diagnostics(&diags);
            println!("{}", if pass { "refactor OK" } else { "refactor rejected" });
        }
        Format::Json => println!("{}", json!({"passed": pass, "equivalent": eq.equivalent, "diagnostics": diags})),
    }
    Ok(outcome(pass))
}

pub fn pipeline(config_path: &Path, offline: Option<&Path>, selected: &[String], format: Format) -> Result<Outcome> {
    let config = PipelineConfig::load(config_path)?;
    let spec = config.prompt_spec();
    spec.check()?;
    let client: Box<dyn LlmClient> = match offline {
        Some(dir) => Box::new(ReplayClient::from_dir(dir).with_context(|| format!("reading {}", dir.display()))?),
        None => {
            let key = config.endpoint.api_key()?;
            Box::new(HttpClient::new(config.endpoint.clone(), key))
        }
    };
    let available: BTreeSet<String> = files_with_ext(&config.run.solvers_dir, "py")?
        .iter()
        .map(|p| stem(p))
        .filter(|id| config.run.tasks_dir.join(format!("{id}.json")).is_file())
        .collect();
    let ids: Vec<String> = if selected.is_empty() {
        available.iter().cloned().collect()
    } else {
        let unknown: Vec<&str> = selected.iter().filter(|id| !available.contains(*id)).map(String::as_str).collect();
        if !unknown.is_empty() {
            bail!("unknown task id(s): {}", unknown.join(", "));
        }
        selected.to_vec()
    };
    let jobs = ids
        .iter()
        .map(|id| {
            let solver = config.run.solvers_dir.join(format!("{id}.py"));
            Ok(Job {
                task: task(&config.run.tasks_dir.join(format!("{id}.json")))?,
                script: load_solver(&solver).with_context(|| format!("reading {}", solver.display()))?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let options = RunOptions {
        out_dir: config.run.out_dir.clone(),
        concurrency: config.run.concurrency,
        tokens_per_minute: config.run.tokens_per_minute,
        cancel: None,
    };
    let summary = run_pipeline(&jobs, &spec, client.as_ref(), Registry::standard(), &options)?;
    match format {
        Format::Text => println!("{summary}"),
        Format::Json => println!("{}", serde_json::to_string(&summary)?),
    }
    Ok(outcome(summary.accepted == summary.attempted()))
}

pub fn export(dataset: &Path, out: &Path, tactics_report: bool, format: Format) -> Result<Outcome> {
    let path = if dataset.is_dir() { dataset.join(DATASET_FILE) } else { dataset.to_path_buf() };
    let bundles: Vec<PartBundle> = read_dataset(&path)
        .with_context(|| format!("reading {}", path.display()))?
        .into_iter()
        .map(|r| r.bundle)
        .collect();
    if !bundles.iter().any(|b| b.accepted) {
        eprintln!("{}: no accepted bundles to export", path.display());
        return Ok(Outcome::Fail);
    }
    let (records, warnings) = export_corpus(&bundles, Registry::standard());
    std::fs::write(out, corpus_jsonl(&records)).with_context(|| format!("writing {}", out.display()))?;
    for w in &warnings {
        eprintln!("{w}");
    }
    let report_path = out.with_extension("tactics.json");
    let table = tactics_report.then(|| aggregate_tactics(&bundles));
    if let Some(table) = &table {
        std::fs::write(&report_path, serde_json::to_string_pretty(table)? + "\n")
            .with_context(|| format!("writing {}", report_path.display()))?;
    }
    match format {
        Format::Text => {
            println!("{} records written to {}", records.len(), out.display());
            if let Some(table) = &table {
                println!("tactics report written to {}", report_path.display());
                for g in table {
                    println!("  {:>4}  {}", g.count, g.heading);
                }
            }
        }
        Format::Json => println!(
            "{}",
            json!({
                "records": records.len(),
                "out": out,
                "tactics_report": table.as_ref().map(|_| &report_path),
                "warnings": warnings,
            })
        ),
    }
    Ok(Outcome::Pass)
}
