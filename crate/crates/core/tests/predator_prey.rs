//! Runs only when the predator-prey series is supplied, either through
//! `DPE_PREDATOR_PREY_CSV` or as `tests/data/predator_prey.csv`. Columns are
//! predator then prey unless `DPE_PREDATOR_PREY_COLS` (e.g. `3,2`) says
//! otherwise.

use std::path::PathBuf;

use dpe::bench::run_predator_prey;
use dpe::seqcore::{load_pair_csv, PairCsvOptions};
use dpe::Direction;

fn data_file() -> Option<PathBuf> {
    if let Ok(p) = std::env::var("DPE_PREDATOR_PREY_CSV") {
        return Some(PathBuf::from(p));
    }
    let local = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data/predator_prey.csv");
    local.exists().then_some(local)
}

fn columns() -> PairCsvOptions {
    let Ok(text) = std::env::var("DPE_PREDATOR_PREY_COLS") else {
        return PairCsvOptions::default();
    };
    let cols: Vec<usize> = text.split(',').map(|c| c.trim().parse().unwrap()).collect();
    PairCsvOptions {
        x_column: cols[0],
        y_column: cols[1],
    }
}

#[test]
fn predator_prey_table_values() {
    let Some(path) = data_file() else {
        eprintln!("predator-prey data not supplied; skipping");
        return;
    };
    let pair = load_pair_csv(&path, columns()).unwrap();
    let result = run_predator_prey(&pair.x, &pair.y).unwrap();
    let report = &result.report;
    assert_eq!(result.samples, 62);
    assert_eq!(report.verdict, Direction::XCausesY);
    let (xy, yx) = (
        report.score_xy.h_bar.unwrap(),
        report.score_yx.h_bar.unwrap(),
    );
    assert!((xy - 0.1700).abs() <= 5e-4, "pred->prey {xy}");
    assert!((yx - 0.2825).abs() <= 5e-4, "prey->pred {yx}");
    assert!(
        (report.strength - 0.1125).abs() <= 5e-4,
        "strength {}",
        report.strength
    );
}
