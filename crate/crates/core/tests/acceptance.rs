use wgqed::harness::acceptance::{run_all, CRITERIA};

#[test]
fn acceptance_criteria() {
    let results = run_all();
    assert_eq!(results.len(), CRITERIA.len());
    for r in &results {
        println!("{}", r.line());
    }
    let failed: Vec<u32> = results.iter().filter(|r| !r.passed).map(|r| r.id).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
