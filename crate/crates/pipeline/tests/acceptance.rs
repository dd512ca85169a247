//! One line per acceptance criterion; exits non-zero if any fails.

mod common;

use std::collections::{BTreeSet, VecDeque};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use arcdsl_core::annotate::{
    corpus_jsonl, cross_index, evaluate_response, export_corpus, parse_steps, parse_tactics, split_parts,
    GateContext, SplitConfig,
};
use arcdsl_core::dsl::Registry;
use arcdsl_core::grid::{parse_rendered_grid, render_grid};
use arcdsl_core::refactor::{check_call_graph, check_equivalence, check_variable_consistency, parse_chunked, CallGraphConfig};
use arcdsl_core::script::{
    check_static, interpret, load_solver, parse_solver, permute_colors_check, pretty_print, run_outputs, validate_task,
    validate_task_with, SolverScript,
};
use arcdsl_core::{load_task, Color, ColorTable, Grid, TaskRecord};
use arcdsl_pipeline::{
    read_dataset, run_pipeline, sha256_hex, EndpointConfig, HttpClient, Job, LlmClient, LlmError, LlmRequest,
    LlmResponse, PromptSpec, RunOptions, DATASET_FILE,
};
use common::{canned, fixtures, job, Reply, StubServer};

fn golden() -> (SolverScript, TaskRecord) {
    let s = load_solver(&fixtures().join("solvers/00d62c1b.py")).unwrap();
    let t = load_task(&fixtures().join("tasks/00d62c1b.json"), ColorTable::standard()).unwrap();
    (s, t)
}

fn read(rel: &str) -> String {
    std::fs::read_to_string(fixtures().join(rel)).unwrap()
}

fn random_grid(rng: &mut ChaCha8Rng, digits: &[u8], weights: &[u32]) -> Grid {
    let t = ColorTable::standard();
    let (h, w) = (rng.random_range(1..=10), rng.random_range(1..=10));
    let total: u32 = weights.iter().sum();
    let cells = (0..h * w)
        .map(|_| {
            let mut x = rng.random_range(0..total);
            let mut i = 0;
            while x >= weights[i] {
                x -= weights[i];
                i += 1;
            }
            t.by_digit(digits[i]).unwrap()
        })
        .collect();
    Grid::from_cells(h, w, cells).unwrap()
}

fn golden_validation() -> String {
    let start = Instant::now();
    let (s, t) = golden();
    let report = validate_task(&s, &t, Registry::standard());
    let elapsed = start.elapsed();
    assert!(report.passed, "{report:?}");
    assert!(report.pairs.iter().all(|p| p.mismatches == 0));
    assert!(elapsed < Duration::from_secs(1), "took {elapsed:?}");
    format!("{} pairs exact in {elapsed:.1?}", report.pairs.len())
}

/// Black cells not 4-connected through black to the edge become yellow.
fn interior_fill_oracle(g: &Grid) -> Grid {
    let t = ColorTable::standard();
    let (black, yellow) = (t.by_digit(0).unwrap(), t.by_digit(4).unwrap());
    let (h, w) = (g.height(), g.width());
    let mut outside = vec![false; h * w];
    let mut queue = VecDeque::new();
    for r in 0..h {
        for c in 0..w {
            if (r == 0 || c == 0 || r == h - 1 || c == w - 1) && g.get(r, c) == black {
                outside[r * w + c] = true;
                queue.push_back((r, c));
            }
        }
    }
    while let Some((r, c)) = queue.pop_front() {
        let steps = [(r.wrapping_sub(1), c), (r + 1, c), (r, c.wrapping_sub(1)), (r, c + 1)];
        for (nr, nc) in steps {
            if nr < h && nc < w && !outside[nr * w + nc] && g.get(nr, nc) == black {
                outside[nr * w + nc] = true;
                queue.push_back((nr, nc));
            }
        }
    }
    let cells: Vec<Color> = (0..h * w)
        .map(|i| {
            let c = g.colors()[i];
            if c == black && !outside[i] { yellow } else { c }
        })
        .collect();
    Grid::from_cells(h, w, cells).unwrap()
}

fn interior_fill_equivalence() -> String {
    let start = Instant::now();
    let (s, _) = golden();
    let reg = Registry::standard();
    let table = ColorTable::standard();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut changed = 0;
    for i in 0..200 {
        let majority = rng.random_range(0..10u8);
        let second = if majority == 0 { rng.random_range(1..10u8) } else { 0 };
        let g = random_grid(&mut rng, &[majority, second], &[3, 2]);
        let got = interpret(&s, &g, reg, table).unwrap().output().cloned().unwrap();
        let expected = interior_fill_oracle(&g);
        assert_eq!(got, expected, "grid {i}:\n{}", render_grid(&g, table));
        changed += usize::from(got != g);
    }
    let elapsed = start.elapsed();
    assert!(elapsed < Duration::from_secs(5), "took {elapsed:?}");
    assert!(changed > 20, "only {changed} grids had an interior");
    format!("200/200 match, {changed} with interiors, {elapsed:.1?}")
}

fn colour_permutation() -> String {
    let (s, t) = golden();
    let reg = Registry::standard();
    let standard = ColorTable::standard();
    let baseline: Vec<Grid> = run_outputs(&s, &t, reg, standard).into_iter().map(|(_, _, g)| g.unwrap()).collect();
    for seed in 0..20 {
        let table = standard.permuted(seed);
        assert!(permute_colors_check(&s, &t, reg, seed), "seed {seed}");
        let task = t.translate(standard, &table);
        assert!(validate_task_with(&s, &task, reg, &table).passed, "seed {seed}");
        let outputs: Vec<Grid> = run_outputs(&s, &task, reg, &table)
            .into_iter()
            .map(|(_, _, g)| g.unwrap().translate(&table, standard))
            .collect();
        assert_eq!(outputs, baseline, "seed {seed}");
        assert_eq!(table.resolve_constant("COLOR_BELOW"), Some(Color::BELOW));
    }
    "20/20 permutations keep verdict and outputs".into()
}

fn trace_contract() -> String {
    let (s, t) = golden();
    let trace = interpret(&s, &t.train[0].input, Registry::standard(), ColorTable::standard()).unwrap();
    let names: Vec<&str> = trace.names().collect();
    assert_eq!(names, ["I", "x1", "x2", "x3", "x4", "x5", "O"]);
    assert_eq!(s.returned_vars, ["I", "x1", "x2", "x5", "O"]);
    format!("bindings {}; returned {}", names.join(","), s.returned_vars.join(","))
}

fn refactor_gate() -> String {
    let reg = Registry::standard();
    let table = ColorTable::standard();
    let (s, t) = golden();
    let config = CallGraphConfig::default();
    let program = |name: &str| parse_chunked(&read(&format!("chunked/{name}"))).unwrap();
    let rules = |d: &[arcdsl_core::Diagnostic]| -> BTreeSet<String> {
        d.iter().filter(|d| d.is_error()).map(|d| d.rule.clone()).collect()
    };
    let mut correct = 0;

    let reference = program("00d62c1b.py");
    let graph = rules(&check_call_graph(&reference, reg, &config));
    correct += usize::from(!graph.contains("sub-calls-sub"));
    correct += usize::from(!graph.contains("unknown-callee"));
    correct += usize::from(check_variable_consistency(&reference, &s).is_empty());
    correct += usize::from(check_equivalence(&reference, &s, &t, reg, table).equivalent);

    let mutation_rules = |name: &str| {
        let p = program(&format!("mutations/{name}"));
        let mut all = rules(&check_call_graph(&p, reg, &config));
        all.extend(rules(&check_variable_consistency(&p, &s)));
        all.extend(rules(&check_equivalence(&p, &s, &t, reg, table).diagnostics));
        all
    };
    for (name, rule) in [
        ("sub_calls_sub.py", "sub-calls-sub"),
        ("sub_as_argument.py", "sub-calls-sub"),
        ("renamed_main_variable.py", "unknown-main-variable"),
        ("changed_fill_color.py", "not-equivalent"),
    ] {
        let found = mutation_rules(name);
        assert!(found.contains(rule), "{name}: {found:?}");
        correct += 1;
    }
    assert_eq!(correct, 8);
    "8/8 verdicts".into()
}

fn annotation_parsers() -> String {
    let reg = Registry::standard();
    let parts = split_parts(&canned(), &SplitConfig::default()).unwrap();
    let (tactics, _) = parse_tactics(&parts[2], reg).unwrap();
    assert_eq!(tactics.len(), 6);
    assert_eq!(tactics[0].heading, "Object Segmentation");
    let (steps, _) = parse_steps(&parts[3]).unwrap();
    assert_eq!(steps.steps.len(), 4);
    assert_eq!(steps.steps[2].variables_input, ["x2", "I"]);
    let (s, t) = golden();
    let trace = interpret(&s, &t.train[0].input, reg, ColorTable::standard()).unwrap();
    let cross = cross_index(&steps, &tactics, &trace);
    assert!(cross.is_empty(), "{cross:?}");
    let err = parse_tactics(&read("responses/four_tactics.yaml"), reg).unwrap_err();
    assert!(err.to_string().contains("Return 5 or more tactics"), "{err}");
    "6 tactics, 4 steps, cross-index clean, 4-tactic document rejected".into()
}

fn round_trips() -> String {
    let table = ColorTable::standard();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..200 {
        let g = random_grid(&mut rng, &[0, 1, 2, 3, 4, 5, 6, 7, 8, 9], &[1; 10]);
        assert_eq!(parse_rendered_grid(&render_grid(&g, table), table).unwrap(), g);
    }
    let mut solvers = 0;
    for entry in std::fs::read_dir(fixtures().join("solvers")).unwrap() {
        let text = std::fs::read_to_string(entry.unwrap().path()).unwrap();
        let s = parse_solver(&text).unwrap();
        assert_eq!(parse_solver(&pretty_print(&s)).unwrap(), s);
        solvers += 1;
    }
    let (s, t) = golden();
    let split = SplitConfig::default();
    let ctx = GateContext::new(&s, &t, Registry::standard(), &split);
    let digest = || {
        let bundle = evaluate_response("00d62c1b", &canned(), &ctx);
        sha256_hex(&corpus_jsonl(&export_corpus(&[bundle], Registry::standard()).0))
    };
    let first = digest();
    assert_eq!(digest(), first);
    format!("200 grids, {solvers} solvers, corpus sha256 {}", &first[..12])
}

/// Forwards to an inner client and raises the cancel flag after `after` calls.
struct Interrupting<C> {
    inner: C,
    calls: AtomicUsize,
    after: usize,
    cancel: Arc<AtomicBool>,
}

impl<C: LlmClient> LlmClient for Interrupting<C> {
    fn complete(&self, request: &LlmRequest) -> Result<LlmResponse, LlmError> {
        if self.calls.fetch_add(1, Ordering::SeqCst) + 1 >= self.after {
            self.cancel.store(true, Ordering::SeqCst);
        }
        self.inner.complete(request)
    }
}

fn pipeline_replay() -> String {
    let reg = Registry::standard();
    let spec = PromptSpec::new("stub-model");
    let client = |server: &StubServer| HttpClient::new(EndpointConfig::new(&server.base_url, "stub-model"), "k".into());
    let options = |dir: &std::path::Path| RunOptions {
        out_dir: dir.to_path_buf(),
        concurrency: 1,
        ..RunOptions::default()
    };

    let server = StubServer::start(vec![Reply::ok(&canned())]);
    let dir = tempfile::tempdir().unwrap();
    let summary = run_pipeline(&[job("00d62c1b")], &spec, &client(&server), reg, &options(dir.path())).unwrap();
    assert_eq!(summary.to_string(), "1/1 accepted");

    let truncated = canned().split("### Part 4").next().unwrap().to_string();
    let server = StubServer::start(vec![Reply::ok(&truncated)]);
    let dir = tempfile::tempdir().unwrap();
    let summary = run_pipeline(&[job("00d62c1b")], &spec, &client(&server), reg, &options(dir.path())).unwrap();
    assert_eq!(summary.rejected, 1);
    let records = read_dataset(&dir.path().join(DATASET_FILE)).unwrap();
    let reasons = records[0].bundle.rejection_reasons();
    assert!(reasons.iter().any(|r| r.contains("missing part")), "{reasons:?}");

    let ids = ["a", "b", "c", "d"];
    let jobs: Vec<Job> = ids.iter().map(|id| job(id)).collect();
    let server = StubServer::start(vec![Reply::ok(&canned())]);
    let dir = tempfile::tempdir().unwrap();
    let cancel = Arc::new(AtomicBool::new(false));
    let interrupted = Interrupting {
        inner: client(&server),
        calls: AtomicUsize::new(0),
        after: 2,
        cancel: cancel.clone(),
    };
    let first = run_pipeline(&jobs, &spec, &interrupted, reg, &RunOptions {
        cancel: Some(cancel),
        ..options(dir.path())
    })
    .unwrap();
    assert!(first.cancelled && first.accepted < ids.len());
    let second = run_pipeline(&jobs, &spec, &client(&server), reg, &options(dir.path())).unwrap();
    assert_eq!(second.skipped, first.accepted);
    let records = read_dataset(&dir.path().join(DATASET_FILE)).unwrap();
    let seen: BTreeSet<&str> = records.iter().map(|r| r.run.task_id.as_str()).collect();
    assert_eq!(records.len(), ids.len(), "duplicate records");
    assert_eq!(seen.len(), ids.len());
    format!("accepted; truncated part 4 rejected (missing part); resume {}+{} records, 0 duplicates", first.accepted, second.accepted)
}

fn rename_aliasing() -> String {
    let reg = Registry::standard();
    let cases = [
        ("fork", "x1 = fork(outer=equals, a=size, b=size)", "combine_two_function_results"),
        ("dmirror", "x1 = dmirror(grid=I)", "diagonal_mirror"),
        ("subgrid", "x1 = subgrid(patch=I, grid=I)", "smallest_subgrid_containing"),
        ("product", "x1 = product(a=I, b=I)", "cartesian_product"),
        ("color", "x1 = color(obj=I)", "get_color"),
    ];
    let mut hits = 0;
    for (legacy, line, new) in cases {
        let text = format!("def solver_virtual(I):\n  {line}\n  O = rot90(grid=I)\n  return dict(I=I,x1=x1,O=O)\n");
        let diags = check_static(&parse_solver(&text).unwrap(), reg);
        let named = diags
            .iter()
            .any(|d| d.is_error() && d.message.contains(&format!("`{legacy}`")) && d.message.contains(&format!("`{new}`")));
        assert!(named, "{legacy}: {diags:?}");
        hits += 1;
    }
    format!("{hits}/5 legacy names point at their new identifiers")
}

fn main() {
    std::panic::set_hook(Box::new(|_| {}));
    let criteria: [(&str, fn() -> String); 9] = [
        ("golden task validation", golden_validation),
        ("interior-fill oracle equivalence", interior_fill_equivalence),
        ("colour permutation invariance", colour_permutation),
        ("trace contract", trace_contract),
        ("refactor gate", refactor_gate),
        ("annotation parsers", annotation_parsers),
        ("round-trip properties", round_trips),
        ("pipeline replay", pipeline_replay),
        ("rename aliasing", rename_aliasing),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match catch_unwind(AssertUnwindSafe(check)) {
            Ok(detail) => println!("PASS {} {name}: {detail}", i + 1),
            Err(payload) => {
                failed += 1;
                let message = payload
                    .downcast_ref::<String>()
                    .cloned()
                    .or_else(|| payload.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_default();
                println!("FAIL {} {name}: {message}", i + 1);
            }
        }
    }
    println!("{}/{} criteria pass", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
