use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpListener;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn fx(rel: &str) -> String {
    fixtures().join(rel).to_string_lossy().into_owned()
}

fn arcdsl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_arcdsl"))
        .args(args)
        .env_remove("ARCDSL_API_KEY")
        .output()
        .unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn validate_fixtures() {
    let o = arcdsl(&["validate", "--tasks", &fx("tasks"), "--solvers", &fx("solvers"), "--permutations", "5"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    assert!(stdout(&o).contains("PASS 00d62c1b  train 5/5  test 1/1  permutations 5/5"));
    assert!(stdout(&o).ends_with("10/10 tasks pass\n"));

    let o = arcdsl(&["validate", "--format", "json", "--tasks", &fx("tasks"), "--solvers", &fx("solvers")]);
    let lines: Vec<serde_json::Value> = stdout(&o).lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines.len(), 10);
    assert!(lines.iter().all(|l| l["passed"] == true));
}

fn single_task_dir() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    std::fs::copy(fixtures().join("tasks/00d62c1b.json"), dir.path().join("00d62c1b.json")).unwrap();
    dir
}

#[test]
fn validate_failures() {
    let tasks = single_task_dir();
    let t = tasks.path().to_str().unwrap();
    let o = arcdsl(&["validate", "--tasks", t, "--solvers", &fx("broken/mismatch")]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains("train 0: 2 cells differ"));

    let o = arcdsl(&["validate", "--tasks", t, "--solvers", &fx("broken/permutation")]);
    assert_eq!(code(&o), 0);
    let o = arcdsl(&["validate", "--tasks", t, "--solvers", &fx("broken/permutation"), "--permutations", "10"]);
    assert_eq!(code(&o), 1);

    let empty = tempfile::tempdir().unwrap();
    let o = arcdsl(&["validate", "--tasks", t, "--solvers", empty.path().to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("no solver for task(s): 00d62c1b"));
}

#[test]
fn trace_sections() {
    let args = ["trace", "--task", &fx("tasks/00d62c1b.json"), "--solver", &fx("solvers/00d62c1b.py"), "--pair", "train:0"];
    let o = arcdsl(&args);
    assert_eq!(code(&o), 0);
    let headers: Vec<String> = stdout(&o)
        .lines()
        .filter(|l| l.ends_with("):"))
        .map(|l| l.split(' ').next().unwrap().to_string())
        .collect();
    assert_eq!(headers, ["I", "x1", "x2", "x3", "x4", "x5", "O"]);
    assert_eq!(arcdsl(&args).stdout, o.stdout);

    let o = arcdsl(&["trace", "--task", &fx("tasks/00d62c1b.json"), "--solver", &fx("solvers/00d62c1b.py"), "--pair", "test:1"]);
    assert_eq!(code(&o), 2);
    let o = arcdsl(&["trace", "--task", &fx("tasks/00d62c1b.json"), "--solver", &fx("solvers/00d62c1b.py"), "--pair", "nope"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn trace_of_identity_solver() {
    let dir = tempfile::tempdir().unwrap();
    let solver = dir.path().join("identity.py");
    std::fs::write(&solver, "def solver_virtual(I):\n  x1 = rot180(grid=I)\n  O = rot180(grid=x1)\n  return O\n").unwrap();
    let o = arcdsl(&["trace", "--format", "json", "--task", &fx("tasks/00d62c1b.json"), "--solver", solver.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["I"], v["O"]);
}

#[test]
fn refactor_check() {
    let run = |chunked: &str| {
        arcdsl(&[
            "refactor-check",
            "--original",
            &fx("solvers/00d62c1b.py"),
            "--chunked",
            &fx(chunked),
            "--task",
            &fx("tasks/00d62c1b.json"),
        ])
    };
    assert_eq!(code(&run("chunked/00d62c1b.py")), 0);
    let o = run("chunked/mutations/sub_calls_sub.py");
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains("error[sub-calls-sub]"));
    let o = run("chunked/mutations/renamed_main_variable.py");
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains("error[unknown-main-variable]"));
    assert_eq!(code(&run("chunked/mutations/changed_fill_color.py")), 1);
    assert_eq!(code(&run("solvers/00d62c1b.py")), 2);
}

/// Minimal chat-completions endpoint returning `content` to every request.
fn stub_endpoint(content: String) -> (String, Arc<AtomicUsize>) {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    let hits = Arc::new(AtomicUsize::new(0));
    let counter = hits.clone();
    let body = serde_json::json!({"choices": [{"message": {"role": "assistant", "content": content}}]}).to_string();
    std::thread::spawn(move || {
        for stream in listener.incoming() {
            let mut stream = stream.unwrap();
            let mut reader = BufReader::new(stream.try_clone().unwrap());
            let mut length = 0;
            loop {
                let mut line = String::new();
                reader.read_line(&mut line).unwrap();
                if line == "\r\n" || line.is_empty() {
                    break;
                }
                if let Some(v) = line.to_ascii_lowercase().strip_prefix("content-length:") {
                    length = v.trim().parse().unwrap();
                }
            }
            let mut buf = vec![0; length];
            reader.read_exact(&mut buf).unwrap();
            counter.fetch_add(1, Ordering::SeqCst);
            let reply = format!(
                "HTTP/1.1 200 OK\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
                body.len()
            );
            stream.write_all(reply.as_bytes()).unwrap();
        }
    });
    (format!("http://{addr}/v1"), hits)
}

/// Two copies of the golden task and solver, plus a config pointing at `base_url`.
fn pipeline_workspace(base_url: &str) -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    for sub in ["tasks", "solvers"] {
        std::fs::create_dir(dir.path().join(sub)).unwrap();
    }
    for id in ["00d62c1b", "golden-copy"] {
        std::fs::copy(fixtures().join("tasks/00d62c1b.json"), dir.path().join(format!("tasks/{id}.json"))).unwrap();
        std::fs::copy(fixtures().join("solvers/00d62c1b.py"), dir.path().join(format!("solvers/{id}.py"))).unwrap();
    }
    let config = format!(
        "[endpoint]\nbase_url = \"{base_url}\"\nmodel_id = \"stub-model\"\napi_key_env = \"ARCDSL_TEST_KEY\"\nmax_attempts = 2\n\n[run]\ntasks_dir = \"tasks\"\nsolvers_dir = \"solvers\"\nout_dir = \"out\"\nconcurrency = 2\n"
    );
    std::fs::write(dir.path().join("config.toml"), config).unwrap();
    dir
}

fn pipeline(dir: &Path, key: Option<&str>, extra: &[&str]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_arcdsl"));
    cmd.args(["pipeline", "--config", dir.join("config.toml").to_str().unwrap()]).args(extra);
    cmd.env_remove("ARCDSL_TEST_KEY");
    if let Some(k) = key {
        cmd.env("ARCDSL_TEST_KEY", k);
    }
    cmd.output().unwrap()
}

#[test]
fn pipeline_against_stub_endpoint() {
    let canned = std::fs::read_to_string(fixtures().join("responses/00d62c1b.txt")).unwrap();
    let (url, hits) = stub_endpoint(canned);
    let dir = pipeline_workspace(&url);

    let o = pipeline(dir.path(), None, &[]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("ARCDSL_TEST_KEY"));
    assert_eq!(hits.load(Ordering::SeqCst), 0);

    assert_eq!(code(&pipeline(dir.path(), Some("k"), &["--task", "nope"])), 2);
    assert_eq!(hits.load(Ordering::SeqCst), 0);

    let o = pipeline(dir.path(), Some("k"), &[]);
    assert_eq!(code(&o), 0, "{}{}", stdout(&o), String::from_utf8_lossy(&o.stderr));
    assert_eq!(stdout(&o), "2/2 accepted\n");
    assert_eq!(hits.load(Ordering::SeqCst), 2);

    let o = pipeline(dir.path(), Some("k"), &[]);
    assert_eq!(stdout(&o), "0/0 accepted, 2 skipped\n");
    assert_eq!(hits.load(Ordering::SeqCst), 2);

    // Offline replay into a fresh output directory needs no credential.
    let live = dir.path().join("out");
    let config = std::fs::read_to_string(dir.path().join("config.toml")).unwrap();
    std::fs::write(dir.path().join("config.toml"), config.replace("out_dir = \"out\"", "out_dir = \"replay\"")).unwrap();
    let o = pipeline(dir.path(), None, &["--offline", live.to_str().unwrap()]);
    assert_eq!(stdout(&o), "2/2 accepted\n");
    let verdicts = |p: PathBuf| {
        let mut v: Vec<(String, serde_json::Value)> = std::fs::read_to_string(p)
            .unwrap()
            .lines()
            .map(|l| serde_json::from_str::<serde_json::Value>(l).unwrap())
            .map(|r| (r["run"]["task_id"].as_str().unwrap().to_string(), r["bundle"].clone()))
            .collect();
        v.sort_by(|a, b| a.0.cmp(&b.0));
        v
    };
    assert_eq!(verdicts(live.join("dataset.jsonl")), verdicts(dir.path().join("replay/dataset.jsonl")));

    // Export from the same dataset.
    let out = dir.path().join("corpus.jsonl");
    let args = ["export", "--dataset", live.to_str().unwrap(), "--out", out.to_str().unwrap(), "--tactics-report"];
    let o = arcdsl(&args);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let first = std::fs::read(&out).unwrap();
    assert!(String::from_utf8_lossy(&first).lines().count() >= 1);
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("corpus.tactics.json")).unwrap()).unwrap();
    assert_eq!(report.as_array().unwrap().len(), 6);
    assert!(report.as_array().unwrap().iter().all(|g| g["count"] == 2));
    arcdsl(&args);
    assert_eq!(std::fs::read(&out).unwrap(), first);
}

#[test]
fn export_of_empty_dataset_fails() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("dataset.jsonl"), "").unwrap();
    let out = dir.path().join("c.jsonl");
    let o = arcdsl(&["export", "--dataset", dir.path().to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("no accepted bundles"));
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(code(&arcdsl(&["validate"])), 2);
    assert_eq!(code(&arcdsl(&["bogus"])), 2);
    assert_eq!(code(&arcdsl(&["--help"])), 0);
}
