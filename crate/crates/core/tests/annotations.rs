use std::path::PathBuf;

use arcdsl_core::annotate::{
    aggregate_tactics, check_code_drift, corpus_jsonl, cross_index, evaluate_response, export_corpus,
    parse_commented_solver, parse_steps, parse_tactics, split_parts, strip_fences, GateContext, PartBundle,
    SplitConfig, UnitKind,
};
use arcdsl_core::dsl::Registry;
use arcdsl_core::script::{interpret, load_solver, SolverScript};
use arcdsl_core::{load_task, ColorTable, TaskRecord};

fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn read(rel: &str) -> String {
    std::fs::read_to_string(fixtures().join(rel)).unwrap()
}

fn golden() -> (SolverScript, TaskRecord) {
    let s = load_solver(&fixtures().join("solvers/00d62c1b.py")).unwrap();
    let t = load_task(&fixtures().join("tasks/00d62c1b.json"), ColorTable::standard()).unwrap();
    (s, t)
}

fn parts() -> Vec<String> {
    split_parts(&read("responses/00d62c1b.txt"), &SplitConfig::default()).unwrap()
}

fn gate(response: &str) -> PartBundle {
    let (s, t) = golden();
    let split = SplitConfig::default();
    evaluate_response("00d62c1b", response, &GateContext::new(&s, &t, Registry::standard(), &split))
}

#[test]
fn commented_solver_blocks() {
    let table = ColorTable::standard();
    let c = parse_commented_solver(&strip_fences(&parts()[0]), table).unwrap();
    assert_eq!(c.blocks.len(), 4);
    assert_eq!(c.blocks[2].attached_lines, ["x3", "x4", "x5"]);
    assert_eq!(
        c.blocks[2].goal,
        "Identify black objects that are not bordering the grid. This effectively selects the internal black objects."
    );
    assert_eq!(c.blocks[0].core_knowledge, ["Object cohesion"]);
    let (original, _) = golden();
    assert!(check_code_drift(&c.script, &original, table).is_empty());
}

#[test]
fn display_colour_name_is_drift() {
    // The listing's display name for the fill colour is the digit-1 colour.
    let table = ColorTable::standard();
    let text = strip_fences(&parts()[0]).replace("color=YELLOW, patch", "color=BLUE, patch");
    let c = parse_commented_solver(&text, table).unwrap();
    let (original, _) = golden();
    let d = check_code_drift(&c.script, &original, table);
    assert_eq!(d.len(), 2);
    assert!(d.iter().all(|d| d.rule == "code-drift"));
}

#[test]
fn missing_goal_is_an_incomplete_block() {
    let text = strip_fences(&parts()[0]).replace("  # Goal: Filter the objects to keep only those that are black.\n", "");
    let e = parse_commented_solver(&text, ColorTable::standard()).unwrap_err();
    assert!(e.to_string().starts_with("incomplete comment block"), "{e}");
}

#[test]
fn tactics_and_steps() {
    let reg = Registry::standard();
    let p = parts();
    let (tactics, warnings) = parse_tactics(&p[2], reg).unwrap();
    assert_eq!(tactics.len(), 6);
    assert_eq!(tactics[0].heading, "Object Segmentation");
    assert_eq!(tactics[0].dsl_functions, ["as_objects", "partition"]);
    assert!(warnings.is_empty(), "{warnings:?}");

    let (steps, warnings) = parse_steps(&p[3]).unwrap();
    assert_eq!(steps.steps.len(), 4);
    assert_eq!(steps.steps[2].variables_input, ["x2", "I"]);
    assert_eq!(steps.steps[2].variables_output, ["x5"]);
    assert!(steps.input_description.ends_with("(i.e. no holes exist within objects)."));
    // `Object manipulation` is outside the vocabulary.
    assert_eq!(warnings.len(), 1);

    let (s, t) = golden();
    let trace = interpret(&s, &t.train[0].input, reg, ColorTable::standard()).unwrap();
    assert!(cross_index(&steps, &tactics, &trace).is_empty());

    let e = parse_tactics(&read("responses/four_tactics.yaml"), reg).unwrap_err();
    assert!(e.to_string().contains("Return 5 or more tactics"));
}

#[test]
fn canned_response_is_accepted() {
    let b = gate(&read("responses/00d62c1b.txt"));
    assert!(b.accepted, "{:?}", b.rejection_reasons());
    assert_eq!(b.raw_parts.len(), 4);
    assert_eq!(b.verdicts.len(), 9);
    let line = serde_json::to_string(&b).unwrap();
    assert_eq!(serde_json::from_str::<PartBundle>(&line).unwrap(), b);
}

#[test]
fn gate_rejections() {
    let response = read("responses/00d62c1b.txt");
    let truncated = response.split("### Part 4").next().unwrap();
    let b = gate(truncated);
    assert!(!b.accepted);
    assert!(b.rejection_reasons()[0].contains("missing part 4"));

    let sub_calls_sub = response.replace(&read("chunked/00d62c1b.py"), &read("chunked/mutations/sub_calls_sub.py"));
    assert_ne!(sub_calls_sub, response);
    let b = gate(&sub_calls_sub);
    assert!(!b.accepted);
    assert_eq!(b.failed_checks(), ["call-graph"]);
    assert!(b.rejection_reasons().iter().any(|r| r.contains("sub-function calls sub-function")));

    let bad_step = response.replace("variables_output: [x5]", "variables_output: [x9]");
    let b = gate(&bad_step);
    assert_eq!(b.failed_checks(), ["cross-index"]);

    let malformed = response.replace("tactics:\n", "tactics\n");
    assert_eq!(gate(&malformed).failed_checks(), ["part3", "cross-index"]);
}

#[test]
fn corpus_from_accepted_bundle() {
    let reg = Registry::standard();
    let b = gate(&read("responses/00d62c1b.txt"));
    let (records, warnings) = export_corpus(std::slice::from_ref(&b), reg);
    assert!(warnings.is_empty(), "{warnings:?}");
    let count = |k| records.iter().filter(|r| r.kind == k).count();
    assert_eq!((count(UnitKind::CodeBlock), count(UnitKind::Subfunction)), (4, 4));
    assert_eq!((count(UnitKind::Tactic), count(UnitKind::Steps)), (6, 1));
    let fio = records.iter().find(|r| r.id == "00d62c1b/subfunction/find_internal_objects").unwrap();
    assert_eq!(
        fio.dsl_functions,
        ["compose", "logical_not", "fix_last_argument", "bordering", "keep_if_condition_and_flatten"]
    );
    let ids: std::collections::BTreeSet<_> = records.iter().map(|r| &r.id).collect();
    assert_eq!(ids.len(), records.len());

    let mut other = b.clone();
    other.task_id = "copy".into();
    let once = corpus_jsonl(&export_corpus(&[b.clone(), other.clone()], reg).0);
    let again = corpus_jsonl(&export_corpus(&[other, b], reg).0);
    assert_eq!(once, again);
}

#[test]
fn corpus_without_subfunctions() {
    let mut b = gate(&read("responses/00d62c1b.txt"));
    if let Some(arcdsl_core::annotate::Parsed::Ok(p)) = b.parsed.chunked.as_mut() {
        p.subfunctions.clear();
    }
    let (records, _) = export_corpus(&[b], Registry::standard());
    assert!(records.iter().all(|r| r.kind != UnitKind::Subfunction));
    assert_eq!(records.len(), 4 + 6 + 1);
}

#[test]
fn tactic_frequencies() {
    let b = gate(&read("responses/00d62c1b.txt"));
    let mut c = b.clone();
    c.task_id = "other".into();
    if let Some(arcdsl_core::annotate::Parsed::Ok(t)) = c.parsed.tactics.as_mut() {
        t[1].heading = "color filtering".into();
        t[1].dsl_functions.push("palette".into());
    }
    let table = aggregate_tactics(&[b, c]);
    assert_eq!(table.len(), 6);
    assert_eq!(table.iter().map(|g| g.count).sum::<usize>(), 12);
    let cf = table.iter().find(|g| g.key == "color filtering").unwrap();
    assert_eq!(cf.count, 2);
    assert_eq!(cf.heading, "Color Filtering");
    assert_eq!(cf.dsl_functions.iter().collect::<Vec<_>>(), ["color_filter", "palette"]);
    assert_eq!(table[0].key, "color filtering");
}
