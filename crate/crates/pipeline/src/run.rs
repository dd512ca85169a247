//! The batch run: prompt, call, gate and persist each task.

use std::collections::{BTreeMap, HashSet, VecDeque};
use std::fs::OpenOptions;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{mpsc, Arc, Mutex};
use std::time::{Duration, Instant, SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use arcdsl_core::annotate::{evaluate_response, GateContext, PartBundle, SplitConfig, Verdict};
use arcdsl_core::dsl::Registry;
use arcdsl_core::script::{interpret, validate_task, SolverScript};
use arcdsl_core::{ColorTable, TaskRecord};

use crate::client::{sha256_hex, LlmClient, LlmRequest};
use crate::prompt::{build_prompt, PromptSpec};

pub const DATASET_FILE: &str = "dataset.jsonl";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub task_id: String,
    pub prompt_sha256: String,
    pub model_id: String,
    pub template_version: String,
    pub response: String,
    pub response_sha256: String,
    #[serde(default)]
    pub parameters: serde_json::Value,
    pub verdicts: Vec<Verdict>,
    pub accepted: bool,
    pub started_unix_ms: u64,
    pub finished_unix_ms: u64,
    pub attempts: u32,
}

/// One line of `dataset.jsonl`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetRecord {
    pub run: RunRecord,
    pub bundle: PartBundle,
}

pub struct Job {
    pub task: TaskRecord,
    pub script: SolverScript,
}

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    pub out_dir: PathBuf,
    pub concurrency: usize,
    pub tokens_per_minute: Option<u64>,
    pub cancel: Option<Arc<AtomicBool>>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunSummary {
    /// Jobs handed to the run, including skipped ones.
    pub total: usize,
    pub accepted: usize,
    pub rejected: usize,
    /// Tasks whose model call or preparation failed; not persisted.
    pub failed: usize,
    /// Tasks already present in the dataset.
    pub skipped: usize,
    pub cancelled: bool,
    /// Failed gate checks and failure kinds, with counts.
    pub histogram: BTreeMap<String, usize>,
}

impl RunSummary {
    pub fn attempted(&self) -> usize {
        self.accepted + self.rejected + self.failed
    }
}

impl std::fmt::Display for RunSummary {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}/{} accepted", self.accepted, self.attempted())?;
        if self.skipped > 0 {
            write!(f, ", {} skipped", self.skipped)?;
        }
        if self.cancelled {
            write!(f, ", cancelled")?;
        }
        for (reason, n) in &self.histogram {
            write!(f, "\n  {reason}: {n}")?;
        }
        Ok(())
    }
}

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Prompt(#[from] crate::prompt::PromptError),
}

/// Gate a response against the original script and task.
pub fn sanity_gate(response: &str, script: &SolverScript, task: &TaskRecord, parts: usize) -> PartBundle {
    let split = SplitConfig {
        expected: parts,
        ..SplitConfig::default()
    };
    let ctx = GateContext::new(script, task, Registry::standard(), &split);
    evaluate_response(&task.task_id, response, &ctx)
}

/// Records in a dataset file. A torn final line is ignored.
pub fn read_dataset(path: &Path) -> std::io::Result<Vec<DatasetRecord>> {
    let file = std::fs::File::open(path)?;
    let mut out = Vec::new();
    let lines: Vec<String> = BufReader::new(file).lines().collect::<Result<_, _>>()?;
    let n = lines.len();
    for (i, line) in lines.into_iter().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str(&line) {
            Ok(r) => out.push(r),
            Err(_) if i + 1 == n => {}
            Err(e) => return Err(std::io::Error::new(std::io::ErrorKind::InvalidData, format!("line {}: {e}", i + 1))),
        }
    }
    Ok(out)
}

/// Drop a torn final line so appends start on a fresh line.
fn repair_tail(path: &Path) -> std::io::Result<()> {
    let Ok(bytes) = std::fs::read(path) else {
        return Ok(());
    };
    if bytes.is_empty() || bytes.ends_with(b"\n") {
        return Ok(());
    }
    let keep = bytes.iter().rposition(|b| *b == b'\n').map_or(0, |i| i + 1);
    OpenOptions::new().write(true).open(path)?.set_len(keep as u64)
}

fn now_ms() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_millis() as u64)
}

/// Rolling one-minute budget of estimated prompt tokens.
struct TokenBudget {
    limit: u64,
    window: Mutex<(Instant, u64)>,
}

impl TokenBudget {
    fn acquire(&self, tokens: u64) {
        loop {
            let wait = {
                let mut w = self.window.lock().expect("budget lock");
                let elapsed = w.0.elapsed();
                if elapsed >= Duration::from_secs(60) {
                    *w = (Instant::now(), 0);
                }
                // A single oversized request still goes out in an empty window.
                if w.1 == 0 || w.1 + tokens <= self.limit {
                    w.1 += tokens;
                    return;
                }
                Duration::from_secs(60).saturating_sub(elapsed)
            };
            std::thread::sleep(wait.min(Duration::from_millis(200)));
        }
    }
}

enum Outcome {
    Done(Box<DatasetRecord>),
    Failed { task_id: String, reason: String },
}

fn process(job: &Job, spec: &PromptSpec, client: &dyn LlmClient, registry: &Registry, budget: Option<&TokenBudget>) -> Outcome {
    let table = ColorTable::standard();
    let task_id = job.task.task_id.clone();
    let fail = |reason: String| Outcome::Failed {
        task_id: task_id.clone(),
        reason,
    };
    if !validate_task(&job.script, &job.task, registry).passed {
        return fail("invalid-solver".into());
    }
    let trace = job
        .task
        .train
        .first()
        .and_then(|p| interpret(&job.script, &p.input, registry, table).ok());
    let prompt = match build_prompt(&job.task, &job.script, trace.as_ref(), spec, registry, table) {
        Ok(p) => p.text(),
        Err(e) => return fail(format!("prompt-error: {e}")),
    };
    if let Some(b) = budget {
        b.acquire(prompt.len() as u64 / 4);
    }
    let started = now_ms();
    let request = LlmRequest {
        task_id: task_id.clone(),
        model_id: spec.model_id.clone(),
        prompt,
    };
    let response = match client.complete(&request) {
        Ok(r) => r,
        Err(e) => {
            log::warn!("{task_id}: {e}");
            return fail(format!("llm-error: {}", e.kind()));
        }
    };
    let bundle = sanity_gate(&response.text, &job.script, &job.task, spec.part_count());
    let run = RunRecord {
        task_id,
        prompt_sha256: sha256_hex(&request.prompt),
        model_id: spec.model_id.clone(),
        template_version: spec.template_version.clone(),
        response_sha256: sha256_hex(&response.text),
        response: response.text,
        parameters: response.parameters,
        verdicts: bundle.verdicts.clone(),
        accepted: bundle.accepted,
        started_unix_ms: started,
        finished_unix_ms: now_ms(),
        attempts: response.attempts,
    };
    Outcome::Done(Box::new(DatasetRecord { run, bundle }))
}

/// Run every job not already in `out_dir/dataset.jsonl`. Workers take jobs in
/// order; a single writer appends one record per gated response.
pub fn run_pipeline(
    jobs: &[Job],
    spec: &PromptSpec,
    client: &dyn LlmClient,
    registry: &Registry,
    options: &RunOptions,
) -> Result<RunSummary, RunError> {
    spec.check()?;
    let path = options.out_dir.join(DATASET_FILE);
    let io = |source| RunError::Io {
        path: path.clone(),
        source,
    };
    std::fs::create_dir_all(&options.out_dir).map_err(io)?;
    repair_tail(&path).map_err(io)?;
    let done: HashSet<String> = if path.exists() {
        read_dataset(&path).map_err(io)?.into_iter().map(|r| r.run.task_id).collect()
    } else {
        HashSet::new()
    };
    let mut file = OpenOptions::new().create(true).append(true).open(&path).map_err(io)?;

    let mut summary = RunSummary {
        total: jobs.len(),
        ..RunSummary::default()
    };
    let mut seen = HashSet::new();
    let pending: VecDeque<&Job> = jobs
        .iter()
        .filter(|j| {
            let fresh = !done.contains(&j.task.task_id) && seen.insert(j.task.task_id.clone());
            if !fresh {
                summary.skipped += 1;
            }
            fresh
        })
        .collect();
    let queue = Mutex::new(pending);
    let budget = options.tokens_per_minute.map(|limit| TokenBudget {
        limit,
        window: Mutex::new((Instant::now(), 0)),
    });
    let cancelled = || options.cancel.as_ref().is_some_and(|c| c.load(Ordering::SeqCst));
    let (tx, rx) = mpsc::channel::<Outcome>();
    let mut write_error = None;

    std::thread::scope(|scope| {
        for _ in 0..options.concurrency.max(1) {
            let tx = tx.clone();
            let queue = &queue;
            let budget = budget.as_ref();
            scope.spawn(move || loop {
                if cancelled() {
                    break;
                }
                let Some(job) = queue.lock().expect("queue lock").pop_front() else {
                    break;
                };
                if tx.send(process(job, spec, client, registry, budget)).is_err() {
                    break;
                }
            });
        }
        drop(tx);
        for outcome in rx {
            match outcome {
                Outcome::Done(record) => {
                    let line = serde_json::to_string(&*record).expect("record serialises") + "\n";
                    if let Err(e) = file.write_all(line.as_bytes()).and_then(|_| file.flush()) {
                        write_error = Some(e);
                        if let Some(c) = &options.cancel {
                            c.store(true, Ordering::SeqCst);
                        }
                        continue;
                    }
                    if record.bundle.accepted {
                        summary.accepted += 1;
                    } else {
                        summary.rejected += 1;
                        for check in record.bundle.failed_checks() {
                            *summary.histogram.entry(check.to_string()).or_default() += 1;
                        }
                    }
                }
                Outcome::Failed { task_id, reason } => {
                    log::warn!("{task_id}: {reason}");
                    summary.failed += 1;
                    let key = reason.split(':').next().unwrap_or(&reason).to_string();
                    let key = if key == "llm-error" { reason } else { key };
                    *summary.histogram.entry(key).or_default() += 1;
                }
            }
        }
    });
    if let Some(e) = write_error {
        return Err(io(e));
    }
    summary.cancelled = cancelled();
    Ok(summary)
}
