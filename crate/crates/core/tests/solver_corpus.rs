use std::path::PathBuf;

use arcdsl_core::dsl::Registry;
use arcdsl_core::script::{check_static, load_solver, parse_solver, permute_colors_check, pretty_print, validate_task};
use arcdsl_core::{load_task, ColorTable};

fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn corpus() -> Vec<(String, PathBuf, PathBuf)> {
    let mut out: Vec<_> = std::fs::read_dir(fixtures().join("solvers"))
        .unwrap()
        .map(|e| e.unwrap().path())
        .map(|p| {
            let id = p.file_stem().unwrap().to_string_lossy().into_owned();
            let task = fixtures().join("tasks").join(format!("{id}.json"));
            (id, p, task)
        })
        .collect();
    out.sort();
    out
}

#[test]
fn every_shipped_solver_is_clean_and_valid() {
    let reg = Registry::standard();
    let corpus = corpus();
    assert_eq!(corpus.len(), 10);
    for (id, solver, task) in corpus {
        let s = load_solver(&solver).unwrap();
        assert_eq!(s.task_id, id);
        assert!(check_static(&s, reg).is_empty(), "{id}: {:?}", check_static(&s, reg));
        let t = load_task(&task, ColorTable::standard()).unwrap();
        let report = validate_task(&s, &t, reg);
        assert!(report.passed, "{id}: {report:?}");
    }
}

#[test]
fn shipped_solvers_survive_colour_permutation() {
    let reg = Registry::standard();
    for (id, solver, task) in corpus() {
        let s = load_solver(&solver).unwrap();
        let t = load_task(&task, ColorTable::standard()).unwrap();
        for seed in 0..10 {
            assert!(permute_colors_check(&s, &t, reg, seed), "{id} seed {seed}");
        }
    }
}

#[test]
fn shipped_solvers_round_trip_through_printer() {
    for (id, solver, _) in corpus() {
        let text = std::fs::read_to_string(&solver).unwrap();
        let s = parse_solver(&text).unwrap();
        assert_eq!(parse_solver(&pretty_print(&s)).unwrap(), s, "{id}");
        assert_eq!(pretty_print(&s), text, "{id} is not in canonical form");
    }
}
