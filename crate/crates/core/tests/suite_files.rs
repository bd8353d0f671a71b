//! The shipped files under `scenarios/` are exactly what the frozen suite
//! table regenerates. Set `BLOCKSBENCH_WRITE_SUITE=1` to rewrite them.

use std::fs;
use std::path::PathBuf;

use blocksbench_core::planner::Budgets;
use blocksbench_core::scenario::{
    audit_scenario, audit_suite_shape, build_suite, load_scenario, recompute_metadata,
    write_scenario, ScenarioStore,
};

fn suite_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
}

#[test]
fn regeneration_is_byte_identical() {
    let dir = suite_dir();
    let suite = build_suite().expect("every frozen spec generates");
    assert_eq!(suite.len(), 50);
    let write = std::env::var_os("BLOCKSBENCH_WRITE_SUITE").is_some();
    for scenario in &suite {
        if write {
            write_scenario(&dir, scenario).unwrap();
            continue;
        }
        let path = dir.join(format!("{}.json", scenario.id));
        let shipped =
            fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        assert_eq!(shipped, scenario.to_json(), "{} drifted", scenario.id);
    }
}

#[test]
fn shipped_files_load_and_metadata_recomputes() {
    let store = ScenarioStore::load_dir(&suite_dir()).unwrap();
    assert_eq!(store.len(), 50);
    for scenario in store.iter() {
        let bytes = scenario.to_json();
        assert_eq!(load_scenario(bytes.as_bytes()).as_ref(), Ok(scenario));
        assert_eq!(
            recompute_metadata(scenario, Budgets::default()).as_ref(),
            Ok(scenario.metadata.as_ref().unwrap()),
            "{}",
            scenario.id
        );
    }
}

#[test]
fn shipped_suite_passes_the_audit() {
    let store = ScenarioStore::load_dir(&suite_dir()).unwrap();
    assert_eq!(audit_suite_shape(store.iter()), Vec::<String>::new());
    for scenario in store.iter() {
        let problems = audit_scenario(scenario, Budgets::default());
        assert!(problems.is_empty(), "{}: {problems:?}", scenario.id);
    }
}
