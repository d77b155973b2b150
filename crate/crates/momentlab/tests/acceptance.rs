//! Acceptance gate: every headline property at its pinned tolerance,
//! one pass/fail line per criterion (run with --nocapture to see them).

use std::sync::OnceLock;
use std::time::Instant;

use momentlab::calabi::FlowSample;
use momentlab::grid::Grid;
use momentlab::suite::{self, CheckRecord, Level};

const SEED: u64 = 1;

fn assert_records(criterion: &str, records: &[CheckRecord]) {
    let passed = records.iter().all(|r| r.passed);
    let worst = records
        .iter()
        .map(|r| (r.residual, r.tolerance, r.name.as_str()))
        .max_by(|a, b| (a.0 / a.1).total_cmp(&(b.0 / b.1)))
        .expect("at least one record");
    println!(
        "ACCEPTANCE {criterion}: {} — worst {} residual {:.3e} (tol {:.1e}) over {} checks",
        if passed { "PASS" } else { "FAIL" },
        worst.2,
        worst.0,
        worst.1,
        records.len()
    );
    for r in records {
        assert!(
            r.passed,
            "{}: residual {:.3e} vs tolerance {:.3e} (order {:?}, margin {:?})",
            r.name, r.residual, r.tolerance, r.order, r.margin
        );
    }
}

fn flow_results() -> &'static (Vec<CheckRecord>, Vec<FlowSample>) {
    static CELL: OnceLock<(Vec<CheckRecord>, Vec<FlowSample>)> = OnceLock::new();
    CELL.get_or_init(|| suite::check_prescribed_volume_flow().expect("flow completes"))
}

#[test]
fn criterion_01_moment_map_identity() {
    let start = Instant::now();
    let mut records = suite::check_moment_identity(Grid::torus2(), 20, SEED);
    records.extend(suite::check_moment_identity(Grid::torus4(), 5, SEED + 1));
    let elapsed = start.elapsed().as_secs_f64();
    assert_records("01 moment-map identity", &records);
    println!("  probes finished in {elapsed:.1}s (budget 60s)");
    assert!(elapsed < 60.0, "criterion 1 runtime {elapsed:.1}s");
}

#[test]
fn criterion_02_closedness_of_omega() {
    let start = Instant::now();
    let records = vec![
        suite::check_d_omega(SEED + 2, 20),
        suite::check_contraction_identity(SEED + 3, 5),
    ];
    let elapsed = start.elapsed().as_secs_f64();
    assert_records("02 closedness of Ω", &records);
    println!("  residuals finished in {elapsed:.1}s (budget 30s)");
    assert!(elapsed < 30.0, "criterion 2 runtime {elapsed:.1}s");
}

#[test]
fn criterion_03_positivity() {
    let records = vec![
        suite::check_positivity(Grid::torus2(), 50, 1e-10, SEED + 4),
        suite::check_positivity(Grid::torus4(), 50, 0.1, SEED + 5),
    ];
    assert_records("03 positivity of Ω(·, J·)", &records);
}

#[test]
fn criterion_04_prescribed_volume_flow() {
    let (records, trace) = flow_results();
    let flow_only: Vec<CheckRecord> = records
        .iter()
        .filter(|r| r.name.contains("flow"))
        .cloned()
        .collect();
    assert_records("04 prescribed-volume flow", &flow_only);
    let wall_s = trace.last().expect("non-empty trace").wall_ms / 1e3;
    println!("  flow of {} steps finished in {wall_s:.1}s (budget 30s)", trace.len() - 1);
    assert!(wall_s < 30.0, "criterion 4 runtime {wall_s:.1}s");
}

#[test]
fn criterion_05_kempf_ness_structure() {
    let (records, _) = flow_results();
    let mut checks: Vec<CheckRecord> = records
        .iter()
        .filter(|r| r.name.contains("energy_monotone"))
        .cloned()
        .collect();
    checks.push(suite::check_convexity(Grid::torus2(), 20, SEED + 6));
    checks.push(suite::check_convexity(Grid::torus4(), 20, SEED + 7));
    assert_records("05 Kempf–Ness convexity and monotonicity", &checks);
}

#[test]
fn criterion_06_weinstein_homomorphism() {
    let start = Instant::now();
    let records = suite::check_weinstein_values(SEED + 8);
    let elapsed = start.elapsed().as_secs_f64();
    assert_records("06 Weinstein homomorphism on S²", &records);
    println!("  holonomies finished in {elapsed:.1}s (budget 10s)");
    assert!(elapsed < 10.0, "criterion 6 runtime {elapsed:.1}s");
}

#[test]
fn criterion_07_fibre_structure() {
    let records = suite::check_fibre_structure(SEED + 9);
    assert_records("07 fixed-volume fibre structure", &records);
}

#[test]
fn criterion_08_isotropy_of_gauge_orbits() {
    let records = vec![suite::check_isotropy(Grid::torus2(), 20, SEED + 10)];
    assert_records("08 isotropy of gauge orbits", &records);
}

#[test]
fn criterion_09_complexified_action() {
    let mut records = suite::check_complexified_consistency(Grid::torus2(), SEED + 11);
    records.extend(suite::check_complexified_consistency(
        Grid::torus4(),
        SEED + 12,
    ));
    assert_records("09 complexified action consistency", &records);
}

#[test]
fn criterion_10_theta_pairing() {
    let records = suite::check_theta_pairing(SEED + 13, 10);
    assert_records("10 Θ pairing on T⁴", &records);
}

#[test]
fn criterion_11_witnesses() {
    let records = suite::check_witnesses(Grid::torus2(), 20, SEED + 14);
    assert_records("11 injectivity and surjectivity witnesses", &records);
}

#[test]
fn criterion_12_full_suite_deterministic_under_ten_minutes() {
    let start = Instant::now();
    let first = suite::verify_suite(SEED, Level::Full).expect("suite runs");
    let first_elapsed = start.elapsed().as_secs_f64();
    assert!(first.passed, "full suite has failing records");
    assert!(
        first_elapsed < 600.0,
        "full suite took {first_elapsed:.0}s"
    );

    let second = suite::verify_suite(SEED, Level::Full).expect("suite runs");
    let identical = first.canonical_json() == second.canonical_json();
    println!(
        "ACCEPTANCE 12 full verify suite: {} — {} records in {first_elapsed:.0}s (budget 600s), reports byte-identical: {identical}",
        if first.passed && identical { "PASS" } else { "FAIL" },
        first.records.len()
    );
    assert!(identical, "two runs with one seed differ");
}
