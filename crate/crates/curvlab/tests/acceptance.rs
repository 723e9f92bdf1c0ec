use std::io::Write;

use curvlab::acceptance::{run_all, DEFAULT_SEED};
use curvlab::harness::Workers;

#[test]
fn acceptance_criteria() {
    let workers = Workers::from_env().unwrap();
    let suite = run_all(DEFAULT_SEED, &workers);
    // written to the raw handle so the lines survive the test harness capture
    let mut err = std::io::stderr().lock();
    writeln!(err, "worker threads: {}", workers.threads()).unwrap();
    for c in &suite.criteria {
        writeln!(err, "{}", c.line()).unwrap();
    }
    drop(err);
    assert_eq!(suite.criteria.len(), 12);
    let failed: Vec<u8> = suite.criteria.iter().filter(|c| !c.pass).map(|c| c.id).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
