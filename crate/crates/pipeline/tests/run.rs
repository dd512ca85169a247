mod common;

use std::collections::HashMap;
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::Arc;

use arcdsl_core::dsl::Registry;
use arcdsl_pipeline::{
    read_dataset, run_pipeline, sanity_gate, EndpointConfig, HttpClient, Job, LlmClient, LlmError, LlmRequest,
    LlmResponse, PromptSpec, ReplayClient, RunOptions, DATASET_FILE,
};
use common::{canned, job, Reply, StubServer};

fn jobs(ids: &[&str]) -> Vec<Job> {
    ids.iter().map(|id| job(id)).collect()
}

fn replay(pairs: &[(&str, String)]) -> ReplayClient {
    ReplayClient::new(pairs.iter().map(|(k, v)| (k.to_string(), v.clone())).collect::<HashMap<_, _>>())
}

fn options(dir: &std::path::Path) -> RunOptions {
    RunOptions {
        out_dir: dir.to_path_buf(),
        concurrency: 2,
        ..RunOptions::default()
    }
}

#[test]
fn gate_verdicts() {
    let j = job("00d62c1b");
    assert!(sanity_gate(&canned(), &j.script, &j.task, 4).accepted);
    let truncated = canned().split("### Part 4").next().unwrap().to_string();
    let b = sanity_gate(&truncated, &j.script, &j.task, 4);
    assert!(!b.accepted);
    assert!(b.rejection_reasons().iter().any(|r| r.contains("missing part")));
    // Fewer parts requested: three parts are enough.
    assert!(sanity_gate(&truncated, &j.script, &j.task, 3).accepted);
}

#[test]
fn all_accepted_through_stub_endpoint() {
    let server = StubServer::start(vec![Reply::ok(&canned())]);
    let client = HttpClient::new(EndpointConfig::new(&server.base_url, "stub-model"), "k".into());
    let dir = tempfile::tempdir().unwrap();
    let s = run_pipeline(&jobs(&["a", "b", "c"]), &PromptSpec::new("stub-model"), &client, Registry::standard(), &options(dir.path())).unwrap();
    assert_eq!(s.to_string(), "3/3 accepted");
    assert_eq!(server.hits(), 3);
    let records = read_dataset(&dir.path().join(DATASET_FILE)).unwrap();
    assert_eq!(records.len(), 3);
    assert!(records.iter().all(|r| r.run.accepted && r.run.attempts == 1 && r.run.model_id == "stub-model"));
}

#[test]
fn malformed_response_is_rejected_not_fatal() {
    let bad = canned().replace("tactics:\n", "tactics\n");
    let client = replay(&[("a", canned()), ("b", bad), ("c", canned())]);
    let dir = tempfile::tempdir().unwrap();
    let s = run_pipeline(&jobs(&["a", "b", "c"]), &PromptSpec::new("m"), &client, Registry::standard(), &options(dir.path())).unwrap();
    assert_eq!((s.accepted, s.rejected), (2, 1));
    assert_eq!(s.histogram.get("part3"), Some(&1));
    assert!(s.to_string().starts_with("2/3 accepted"));
}

#[test]
fn client_failures_are_isolated_and_retried_on_resume() {
    let client = replay(&[("a", canned()), ("c", canned())]);
    let dir = tempfile::tempdir().unwrap();
    let s = run_pipeline(&jobs(&["a", "b", "c"]), &PromptSpec::new("m"), &client, Registry::standard(), &options(dir.path())).unwrap();
    assert_eq!((s.accepted, s.failed), (2, 1));
    assert_eq!(s.histogram.get("llm-error: no-response"), Some(&1));
    let client = replay(&[("b", canned())]);
    let s = run_pipeline(&jobs(&["a", "b", "c"]), &PromptSpec::new("m"), &client, Registry::standard(), &options(dir.path())).unwrap();
    assert_eq!((s.accepted, s.skipped), (1, 2));
}

/// Replays the canned response and raises the cancel flag after `after` calls.
struct Interrupting {
    calls: AtomicUsize,
    after: usize,
    cancel: Arc<AtomicBool>,
}

impl LlmClient for Interrupting {
    fn complete(&self, _: &LlmRequest) -> Result<LlmResponse, LlmError> {
        if self.calls.fetch_add(1, Ordering::SeqCst) + 1 >= self.after {
            self.cancel.store(true, Ordering::SeqCst);
        }
        Ok(LlmResponse {
            text: canned(),
            attempts: 1,
            parameters: serde_json::Value::Null,
        })
    }
}

#[test]
fn interrupted_run_resumes_without_duplicates() {
    let ids = ["a", "b", "c", "d", "e"];
    let dir = tempfile::tempdir().unwrap();
    let cancel = Arc::new(AtomicBool::new(false));
    let client = Interrupting {
        calls: AtomicUsize::new(0),
        after: 2,
        cancel: cancel.clone(),
    };
    let opts = RunOptions {
        out_dir: dir.path().to_path_buf(),
        concurrency: 1,
        cancel: Some(cancel),
        ..RunOptions::default()
    };
    let first = run_pipeline(&jobs(&ids), &PromptSpec::new("m"), &client, Registry::standard(), &opts).unwrap();
    assert!(first.cancelled);
    assert_eq!(first.accepted, 2);

    // A write torn by the interruption.
    let path = dir.path().join(DATASET_FILE);
    let mut text = std::fs::read_to_string(&path).unwrap();
    text.push_str("{\"run\": {\"task_id\": \"c\"");
    std::fs::write(&path, text).unwrap();

    let client = replay(&ids.iter().map(|id| (*id, canned())).collect::<Vec<_>>());
    let second = run_pipeline(&jobs(&ids), &PromptSpec::new("m"), &client, Registry::standard(), &options(dir.path())).unwrap();
    assert_eq!((second.accepted, second.skipped), (3, 2));
    let third = run_pipeline(&jobs(&ids), &PromptSpec::new("m"), &client, Registry::standard(), &options(dir.path())).unwrap();
    assert_eq!((third.attempted(), third.skipped), (0, 5));

    let records = read_dataset(&path).unwrap();
    let mut seen: Vec<_> = records.iter().map(|r| r.run.task_id.as_str()).collect();
    seen.sort();
    assert_eq!(seen, ids);
}

#[test]
fn replaying_stored_responses_reproduces_verdicts() {
    let bad = canned().replace("variables_output: [x5]", "variables_output: [x9]");
    let client = replay(&[("a", canned()), ("b", bad)]);
    let live = tempfile::tempdir().unwrap();
    run_pipeline(&jobs(&["a", "b"]), &PromptSpec::new("m"), &client, Registry::standard(), &options(live.path())).unwrap();

    let offline = ReplayClient::from_dir(live.path()).unwrap();
    let again = tempfile::tempdir().unwrap();
    run_pipeline(&jobs(&["a", "b"]), &PromptSpec::new("m"), &offline, Registry::standard(), &options(again.path())).unwrap();

    let key = |dir: &std::path::Path| {
        let mut v: Vec<_> = read_dataset(&dir.join(DATASET_FILE))
            .unwrap()
            .into_iter()
            .map(|r| (r.run.task_id, r.run.response_sha256, r.run.verdicts, r.bundle))
            .collect();
        v.sort_by(|a, b| a.0.cmp(&b.0));
        v
    };
    assert_eq!(key(live.path()), key(again.path()));
}

#[test]
fn token_budget_does_not_block_small_runs() {
    let client = replay(&[("a", canned())]);
    let dir = tempfile::tempdir().unwrap();
    let opts = RunOptions {
        tokens_per_minute: Some(1),
        ..options(dir.path())
    };
    let s = run_pipeline(&jobs(&["a"]), &PromptSpec::new("m"), &client, Registry::standard(), &opts).unwrap();
    assert_eq!(s.accepted, 1);
}
