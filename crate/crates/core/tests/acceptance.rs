use std::io::Write;
use std::time::{Duration, Instant};

use mcop::acceptance::{self, Config, CriterionResult};

/// Wall-clock budget per criterion, in seconds.
fn budget(id: u32) -> u64 {
    match id {
        1 => 5,
        2 => 30,
        3 => 10,
        7 => 60,
        9 => 120,
        _ => 60,
    }
}

// Written to the raw handle so the lines survive the test harness capture.
fn line(r: &CriterionResult, took: Duration) {
    let mark = if r.pass { "PASS" } else { "FAIL" };
    let mut err = std::io::stderr().lock();
    let _ = writeln!(err, "[{mark}] {:>2} {:<42} {:>8.2?}", r.id, r.name, took);
    if let Some(cmd) = &r.repro {
        let _ = writeln!(err, "       repro: {cmd}");
        let _ = writeln!(err, "       detail: {}", r.detail);
    }
}

#[test]
fn acceptance_suite() {
    let cfg = Config::default();
    let _ = writeln!(std::io::stderr());
    let mut first = Vec::new();
    let mut failed = Vec::new();
    for id in 1..=13 {
        let t = Instant::now();
        let r = acceptance::run_criterion(id, &cfg);
        let took = t.elapsed();
        line(&r, took);
        if !r.pass || took > Duration::from_secs(budget(id)) {
            failed.push(id);
        }
        first.push(r);
    }

    let t = Instant::now();
    let second = acceptance::run_core(&cfg);
    let same = serde_json::to_string(&first).unwrap() == serde_json::to_string(&second).unwrap();
    let r = CriterionResult {
        id: 14,
        name: acceptance::NAMES[13],
        pass: same,
        detail: serde_json::json!({ "identical": same }),
        repro: (!same).then(|| "mcop acceptance --only 14".to_string()),
    };
    line(&r, t.elapsed());
    if !same {
        failed.push(14);
    }

    assert!(failed.is_empty(), "failing criteria: {failed:?}");
}
