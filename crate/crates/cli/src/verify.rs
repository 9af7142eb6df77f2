//! Built-in verification suites behind `pgc verify`.
//!
//! Quick runs in seconds and exercises every identity the library rests
//! on; full adds the 23# max-gap sweep, which costs minutes.

use std::collections::BTreeMap;
use std::time::Instant;

use pgc_core::numtheory::next_prime_after;
use pgc_core::{
    census, closure_audit, convergence_factor, decimal_string, hl_ratio, predict_vs_construct,
    stage_ratio_sum, total_driving_terms, CensusSink, CountInt, Cycle, ExactRational,
    FactoredInteger, GapSink, MaxGapSink,
};

use crate::table13;

const AUDIT_LIMIT: u64 = 1 << 22;

type Check = fn() -> Result<(), String>;

pub fn run_suite(full: bool) -> bool {
    let mut checks: Vec<(&str, Check)> = vec![
        ("cycle goldens", check_goldens),
        ("cycle invariants", check_invariants),
        ("snapshot round trip", check_snapshot),
        ("closure audits", check_closure_audits),
        ("corollary identities", check_corollaries),
        ("stage table at 13", check_table13),
        ("streaming census", check_streaming),
        ("recursion vs construction", check_recursion),
        ("ratio closed forms", check_ratios),
    ];
    if full {
        checks.push(("max gaps through 23", check_max_gaps_full));
    }
    let mut failed = 0usize;
    for (name, f) in &checks {
        let t = Instant::now();
        match f() {
            Ok(()) => println!("ok   {name} ({:.1?})", t.elapsed()),
            Err(detail) => {
                failed += 1;
                println!("FAIL {name}: {detail}");
            }
        }
    }
    let passed = checks.len() - failed;
    println!(
        "verify {}: {passed} passed, {failed} failed",
        if full { "full" } else { "quick" }
    );
    failed == 0
}

fn expect<T: PartialEq + std::fmt::Debug>(got: T, want: T, what: &str) -> Result<(), String> {
    if got == want {
        Ok(())
    } else {
        Err(format!("{what}: got {got:?}, want {want:?}"))
    }
}

fn rat(n: i64, d: i64) -> ExactRational {
    ExactRational::new(n.into(), d.into())
}

fn gaps(c: &Cycle) -> Vec<u64> {
    c.gaps_u64().collect()
}

/// The cycle for any modulus, built by ascending extension over its
/// factorization.
fn cycle_of(n: u64) -> Result<Cycle, String> {
    let f = FactoredInteger::of(n).map_err(|e| e.to_string())?;
    let mut cycle: Option<Cycle> = None;
    for &(p, e) in f.factors() {
        for _ in 0..e {
            cycle = Some(match cycle {
                None => Cycle::base(p).map_err(|e| e.to_string())?,
                Some(c) => c.extend(p).map_err(|e| e.to_string())?,
            });
        }
    }
    cycle.ok_or_else(|| "empty modulus".into())
}

fn check_goldens() -> Result<(), String> {
    expect(
        gaps(&Cycle::primorial(5).map_err(|e| e.to_string())?),
        vec![6, 4, 2, 4, 2, 4, 6, 2],
        "30-cycle",
    )?;
    expect(gaps(&cycle_of(6)?), vec![4, 2], "6-cycle")?;
    expect(gaps(&cycle_of(2)?), vec![2], "2-cycle")?;
    expect(gaps(&cycle_of(3)?), vec![1, 2], "3-cycle")?;
    expect(gaps(&cycle_of(5)?), vec![1, 1, 1, 2], "5-cycle")?;
    Ok(())
}

fn check_invariants() -> Result<(), String> {
    for p in [2u64, 3, 5, 7, 11, 13] {
        let c = Cycle::primorial(p).map_err(|e| e.to_string())?;
        let report = c.validate();
        if !report.is_valid() {
            return Err(format!("{p}# failed validation: {report}"));
        }
    }
    // extension order must not matter
    let ascending = cycle_of(30)?;
    let descending = Cycle::base(5)
        .and_then(|c| c.extend(3))
        .and_then(|c| c.extend(2))
        .map_err(|e| e.to_string())?;
    expect(gaps(&ascending), gaps(&descending), "order independence")?;
    Ok(())
}

struct TempFile(std::path::PathBuf);

impl Drop for TempFile {
    fn drop(&mut self) {
        let _ = std::fs::remove_file(&self.0);
    }
}

fn check_snapshot() -> Result<(), String> {
    let tmp = TempFile(
        std::env::temp_dir().join(format!("pgc-verify-{}.pgc", std::process::id())),
    );
    let cycle = Cycle::primorial(7).map_err(|e| e.to_string())?;
    pgc_core::write_snapshot(&tmp.0, &cycle).map_err(|e| e.to_string())?;
    let back = pgc_core::read_snapshot(&tmp.0).map_err(|e| e.to_string())?;
    if back != cycle {
        return Err("round trip changed the cycle".into());
    }
    let mut bytes = std::fs::read(&tmp.0).map_err(|e| e.to_string())?;
    let last = bytes.len() - 1;
    bytes[last] ^= 0xff;
    match pgc_core::gapcycle::parse_snapshot(&bytes) {
        Err(pgc_core::Error::ChecksumMismatch { .. }) => Ok(()),
        other => Err(format!(
            "tampered payload parsed as {other:?}, expected a checksum mismatch"
        )),
    }
}

fn check_closure_audits() -> Result<(), String> {
    for (n, q) in [(6u64, 5u64), (30, 7), (30, 11), (210, 11), (210, 13)] {
        let cycle = cycle_of(n)?;
        let audit = closure_audit(&cycle, q, AUDIT_LIMIT).map_err(|e| e.to_string())?;
        if !audit.pass {
            return Err(format!(
                "extension of the {n}-cycle by {q}: removals {:?}",
                audit.removals
            ));
        }
        expect(audit.positions, cycle.len(), "audited positions")?;
    }
    Ok(())
}

fn check_corollaries() -> Result<(), String> {
    // totals scale by q-2 under a non-dividing extension
    let t30 = census(&cycle_of(30)?, 12, 6);
    let t210 = census(&cycle_of(210)?, 12, 6);
    for g in [6u64, 10, 12] {
        expect(
            t210.row_total(g),
            t30.row_total(g) * CountInt::from(5u32),
            &format!("total for gap {g} under extension by 7"),
        )?;
    }
    // per-length counts scale by q under a dividing extension
    let t90 = census(&cycle_of(90)?, 6, 3);
    for j in 1..=3usize {
        expect(
            t90.count(6, j),
            t30.count(6, j) * CountInt::from(3u32),
            &format!("length-{j} count for gap 6 under extension by 3"),
        )?;
    }
    // closed-form totals at the closing stage
    for g in [6u64, 10, 12, 20, 30] {
        let (q_bar, total) = total_driving_terms(g).map_err(|e| e.to_string())?;
        let table = census(
            &Cycle::primorial(q_bar).map_err(|e| e.to_string())?,
            g,
            (g / 2) as usize,
        );
        expect(table.row_total(g), total, &format!("closed-form total for gap {g}"))?;
    }
    Ok(())
}

fn check_table13() -> Result<(), String> {
    let cycle = Cycle::primorial(13).map_err(|e| e.to_string())?;
    let table = census(&cycle, 32, 16);
    let mut expected: BTreeMap<u64, BTreeMap<usize, CountInt>> = BTreeMap::new();
    for &(g, j, n) in table13::CELLS {
        expected.entry(g).or_default().insert(j, CountInt::from(n));
    }
    for g in (2..=32u64).step_by(2) {
        let got = table.row(g).cloned().unwrap_or_default();
        let want = expected.remove(&g).unwrap_or_default();
        if got != want {
            return Err(format!("row {g}: got {got:?}, want {want:?}"));
        }
    }
    // every row total against the closed-form ratio
    let n21 = table.n21();
    expect(n21.clone(), CountInt::from(1485u32), "count of 2s at 13#")?;
    for (g, _) in table.rows() {
        let ratio = ExactRational::new(table.row_total(g).into(), n21.clone().into());
        let hl = hl_ratio(g).map_err(|e| e.to_string())?;
        expect(ratio, hl, &format!("ratio for gap {g}"))?;
    }
    Ok(())
}

fn check_streaming() -> Result<(), String> {
    let c30 = cycle_of(30)?;
    let mut sink = CensusSink::new(
        c30.modulus().times_prime(7).map_err(|e| e.to_string())?,
        32,
        16,
    )
    .map_err(|e| e.to_string())?;
    let summary = c30.extend_streaming(7, &mut sink).map_err(|e| e.to_string())?;
    expect(summary.closures, 8, "closures for the extension by 7")?;
    let streamed = sink.finish().map_err(|e| e.to_string())?;
    let direct = census(&cycle_of(210)?, 32, 16);
    if streamed != direct {
        return Err("streamed census differs from the materialized census".into());
    }
    let mut max = MaxGapSink::default();
    c30.extend_streaming(7, &mut max).map_err(|e| e.to_string())?;
    expect(max.max, 10, "maximum gap at 7#")?;
    // a short stream must be rejected
    let mut partial = CensusSink::new(c30.modulus().clone(), 10, 8).map_err(|e| e.to_string())?;
    for gap in c30.gaps_u64().take(5) {
        partial.accept(gap).map_err(|e| e.to_string())?;
    }
    match partial.finish() {
        Err(pgc_core::Error::Truncated { got: 5, expected: 8 }) => Ok(()),
        other => Err(format!("short stream finished as {other:?}")),
    }
}

fn check_recursion() -> Result<(), String> {
    let report =
        predict_vs_construct(13, 19, 32, 16, 1 << 24).map_err(|e| e.to_string())?;
    if !report.clean() {
        return Err(format!("{} cell mismatches", report.mismatches.len()));
    }
    expect(report.stages.clone(), vec![17, 19], "stages compared")?;
    Ok(())
}

fn check_ratios() -> Result<(), String> {
    expect(
        stage_ratio_sum(222, 13).map_err(|e| e.to_string())?,
        rat(2, 1),
        "ratio sum for 222 at 13",
    )?;
    expect(
        stage_ratio_sum(222, 31).map_err(|e| e.to_string())?,
        rat(2, 1),
        "ratio sum for 222 at 31",
    )?;
    expect(
        stage_ratio_sum(222, 37).map_err(|e| e.to_string())?,
        rat(72, 35),
        "ratio sum for 222 at 37",
    )?;
    expect(
        stage_ratio_sum(74, 31).map_err(|e| e.to_string())?,
        rat(1, 1),
        "ratio sum for 74 at 31",
    )?;
    // census-derived ratio sum for 222 at the 13 stage
    let table = census(&Cycle::primorial(13).map_err(|e| e.to_string())?, 222, 111);
    expect(
        ExactRational::new(table.row_total(222).into(), table.n21().into()),
        rat(2, 1),
        "census ratio sum for 222 at 13#",
    )?;
    expect(hl_ratio(76).map_err(|e| e.to_string())?, rat(18, 17), "limit ratio for 76")?;
    expect(
        decimal_string(&rat(18, 17), 5).as_str(),
        "1.0588",
        "decimal for 18/17",
    )?;
    expect(
        decimal_string(&rat(8, 3), 5).as_str(),
        "2.6667",
        "decimal for 8/3",
    )?;
    expect(
        convergence_factor(5, 11).map_err(|e| e.to_string())?,
        rat(64, 135),
        "convergence factor 5 to 11",
    )?;
    Ok(())
}

fn check_max_gaps_full() -> Result<(), String> {
    let expected = [
        (3u64, 4u64),
        (5, 6),
        (7, 10),
        (11, 14),
        (13, 22),
        (17, 26),
        (19, 34),
        (23, 40),
    ];
    let mut cycle = Cycle::base(2).map_err(|e| e.to_string())?;
    let mut prev = 2u64;
    for (p, want) in expected {
        expect(next_prime_after(prev), p, "stage order")?;
        cycle = cycle.extend(p).map_err(|e| e.to_string())?;
        expect(cycle.max_gap(), want, &format!("maximum gap at {p}#"))?;
        if !cycle.contains_gap(2 * prev) {
            return Err(format!("gap {} missing from the {p}# stage", 2 * prev));
        }
        prev = p;
    }
    Ok(())
}
