//! Exact evolution of driving-term counts and ratios across sieve stages,
//! with the closed forms the counts converge to.
//!
//! One stage step multiplies every length-j count by `p_next - j - 1` and
//! folds in `j` times the length-(j+1) count. The step is proven only for
//! rows with `g < 2 * p_next`, so rows past that bound are dropped and
//! reported rather than advanced on faith. All arithmetic is exact; the
//! only decimals anywhere are produced by [`decimal_string`], which is
//! display-only.

use std::collections::BTreeMap;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{Signed, Zero};

use crate::census::{census, DrivingTermTable};
use crate::error::{Error, Result};
use crate::gapcycle::Cycle;
use crate::numtheory::{next_prime_after, primes_up_to, FactoredInteger};

/// What one advancement step did besides the arithmetic.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdvanceReport {
    pub from: u64,
    pub to: u64,
    /// Rows with g >= 2 * to, dropped because the recurrence does not
    /// cover them.
    pub dropped: Vec<u64>,
}

fn stage_of(table: &DrivingTermTable) -> Result<u64> {
    table
        .modulus()
        .as_primorial()
        .ok_or_else(|| Error::NotPrimorial(table.modulus().to_string()))
}

fn check_successor(stage: u64, p_next: u64) -> Result<()> {
    if next_prime_after(stage) != p_next {
        return Err(Error::NonSuccessorPrime { stage, p_next });
    }
    Ok(())
}

/// Advance a primorial-stage count table by one prime.
///
/// Every kept row must be complete (no driving term longer than the
/// table's j_max), since the recurrence consumes the length-(j+1) count.
pub fn advance_counts(
    table: &DrivingTermTable,
    p_next: u64,
) -> Result<(DrivingTermTable, AdvanceReport)> {
    let stage = stage_of(table)?;
    check_successor(stage, p_next)?;
    let mut counts: BTreeMap<u64, BTreeMap<usize, BigUint>> = BTreeMap::new();
    let mut dropped = Vec::new();
    for (g, _) in table.rows() {
        if g >= 2 * p_next {
            dropped.push(g);
            continue;
        }
        if !table.is_complete(g) {
            return Err(Error::IncompleteRow {
                g,
                j_max: table.j_max(),
            });
        }
        let mut new_row = BTreeMap::new();
        for j in 1..=table.j_max() {
            let n_j = table.count(g, j);
            let n_j1 = table.count(g, j + 1);
            let mut v = BigUint::zero();
            if !n_j.is_zero() {
                match p_next.checked_sub(j as u64 + 1) {
                    Some(c) => v += n_j * c,
                    None => {
                        return Err(Error::InvalidArgument(format!(
                            "row {g} holds a length-{j} term, beyond what stage {p_next} admits"
                        )))
                    }
                }
            }
            if !n_j1.is_zero() {
                v += n_j1 * (j as u64);
            }
            if !v.is_zero() {
                new_row.insert(j, v);
            }
        }
        counts.insert(g, new_row);
    }
    let modulus = table.modulus().times_prime(p_next)?;
    let advanced = DrivingTermTable::from_parts(modulus, table.g_max(), table.j_max(), counts);
    Ok((
        advanced,
        AdvanceReport {
            from: stage,
            to: p_next,
            dropped,
        },
    ))
}

/// Advance through every prime up to and including `p_target`.
pub fn advance_counts_to(
    table: &DrivingTermTable,
    p_target: u64,
) -> Result<(DrivingTermTable, Vec<AdvanceReport>)> {
    let stage = stage_of(table)?;
    if !crate::numtheory::is_prime(p_target) {
        return Err(Error::NotPrime(p_target));
    }
    if p_target < stage {
        return Err(Error::InvalidArgument(format!(
            "target stage {p_target} precedes the table's stage {stage}"
        )));
    }
    let mut current = table.clone();
    let mut reports = Vec::new();
    let mut p = stage;
    while p < p_target {
        let next = next_prime_after(p);
        let (advanced, report) = advance_counts(&current, next)?;
        current = advanced;
        reports.push(report);
        p = next;
    }
    Ok((current, reports))
}

/// Per-gap ratios `n_{g,j} / n_{2,1}` at one stage, evolved exactly.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RatioTable {
    stage: u64,
    g_max: u64,
    j_max: usize,
    ratios: BTreeMap<u64, BTreeMap<usize, BigRational>>,
    complete_gaps: Vec<u64>,
}

impl RatioTable {
    /// Normalize a primorial-stage count table by its 2-gap count.
    pub fn from_table(table: &DrivingTermTable) -> Result<RatioTable> {
        let stage = stage_of(table)?;
        let n21 = table.n21();
        if n21.is_zero() {
            return Err(Error::InvalidArgument(format!(
                "table at stage {stage} counts no 2-gaps; ratios are undefined"
            )));
        }
        let n21 = BigInt::from(n21);
        let ratios = table
            .rows()
            .map(|(g, row)| {
                let row = row
                    .iter()
                    .map(|(&j, n)| {
                        (j, BigRational::new(BigInt::from(n.clone()), n21.clone()))
                    })
                    .collect();
                (g, row)
            })
            .collect();
        Ok(RatioTable {
            stage,
            g_max: table.g_max(),
            j_max: table.j_max(),
            ratios,
            complete_gaps: table.complete_gaps().to_vec(),
        })
    }

    pub fn stage(&self) -> u64 {
        self.stage
    }

    pub fn g_max(&self) -> u64 {
        self.g_max
    }

    pub fn j_max(&self) -> usize {
        self.j_max
    }

    pub fn ratio(&self, g: u64, j: usize) -> BigRational {
        self.ratios
            .get(&g)
            .and_then(|row| row.get(&j))
            .cloned()
            .unwrap_or_default()
    }

    pub fn rows(&self) -> impl Iterator<Item = (u64, &BTreeMap<usize, BigRational>)> {
        self.ratios.iter().map(|(&g, row)| (g, row))
    }

    /// The row sum, which stays fixed under advancement.
    pub fn row_sum(&self, g: u64) -> BigRational {
        self.ratios
            .get(&g)
            .map(|row| row.values().sum())
            .unwrap_or_default()
    }

    pub fn is_complete(&self, g: u64) -> bool {
        self.complete_gaps.binary_search(&g).is_ok()
    }

    /// One stage step in ratio form: divide the count recurrence by the
    /// new normalizer `(p_next - 2) * n_{2,1}`.
    pub fn advance(&self, p_next: u64) -> Result<(RatioTable, AdvanceReport)> {
        check_successor(self.stage, p_next)?;
        let denom = BigInt::from(p_next - 2);
        let mut ratios: BTreeMap<u64, BTreeMap<usize, BigRational>> = BTreeMap::new();
        let mut dropped = Vec::new();
        for &g in self.ratios.keys() {
            if g >= 2 * p_next {
                dropped.push(g);
                continue;
            }
            if self.complete_gaps.binary_search(&g).is_err() {
                return Err(Error::IncompleteRow {
                    g,
                    j_max: self.j_max,
                });
            }
            let mut new_row = BTreeMap::new();
            for j in 1..=self.j_max {
                let r_j = self.ratio(g, j);
                let r_j1 = self.ratio(g, j + 1);
                let mut v = BigRational::zero();
                if !r_j.is_zero() {
                    match p_next.checked_sub(j as u64 + 1) {
                        Some(c) => {
                            v += r_j * BigRational::new(BigInt::from(c), denom.clone())
                        }
                        None => {
                            return Err(Error::InvalidArgument(format!(
                                "row {g} holds a length-{j} term, beyond what stage {p_next} admits"
                            )))
                        }
                    }
                }
                if !r_j1.is_zero() {
                    v += r_j1 * BigRational::new(BigInt::from(j), denom.clone());
                }
                if !v.is_zero() {
                    new_row.insert(j, v);
                }
            }
            ratios.insert(g, new_row);
        }
        let advanced = RatioTable {
            stage: p_next,
            g_max: self.g_max,
            j_max: self.j_max,
            ratios,
            complete_gaps: self.complete_gaps.clone(),
        };
        Ok((
            advanced,
            AdvanceReport {
                from: self.stage,
                to: p_next,
                dropped,
            },
        ))
    }

    pub fn advance_to(&self, p_target: u64) -> Result<(RatioTable, Vec<AdvanceReport>)> {
        if !crate::numtheory::is_prime(p_target) {
            return Err(Error::NotPrime(p_target));
        }
        if p_target < self.stage {
            return Err(Error::InvalidArgument(format!(
                "target stage {p_target} precedes the table's stage {}",
                self.stage
            )));
        }
        let mut current = self.clone();
        let mut reports = Vec::new();
        while current.stage < p_target {
            let next = next_prime_after(current.stage);
            let (advanced, report) = current.advance(next)?;
            current = advanced;
            reports.push(report);
        }
        Ok((current, reports))
    }
}

/// The limiting ratio read off a finished row: the row sum of
/// `n_{g,j} / n_{2,1}`, which the stage recurrence preserves.
pub fn asymptotic_from_table(table: &DrivingTermTable, g: u64) -> Result<BigRational> {
    let stage = stage_of(table)?;
    let bound = 2 * next_prime_after(stage);
    if g >= bound {
        return Err(Error::InvalidArgument(format!(
            "row {g} is not settled at stage {stage}: needs g < {bound}"
        )));
    }
    if !table.is_complete(g) {
        return Err(Error::IncompleteRow {
            g,
            j_max: table.j_max(),
        });
    }
    let n21 = BigInt::from(table.n21());
    Ok(BigRational::new(BigInt::from(table.row_total(g)), n21))
}

/// Closed form for the ratio sum of gap `g` at stage `p`: the product of
/// `(q-1)/(q-2)` over the odd prime factors `q` of `g` with `q <= p`.
/// Once `p` passes the largest such factor this equals [`hl_ratio`].
pub fn stage_ratio_sum(g: u64, p: u64) -> Result<BigRational> {
    if g < 2 || g % 2 != 0 {
        return Err(Error::OddGap(g));
    }
    let factors = FactoredInteger::of(g)?;
    let mut out = BigRational::from_integer(1.into());
    for &(q, _) in factors.factors() {
        if q > 2 && q <= p {
            out *= BigRational::new(BigInt::from(q - 1), BigInt::from(q - 2));
        }
    }
    Ok(out)
}

/// Closed form for the total number of driving terms for `g`, counted at
/// the stage of its largest prime factor `q̄`: `phi(Q)` times the product
/// of `(p-2)` over primes `p < q̄` not dividing `g`, where `Q` is the
/// radical of `g`.
pub fn total_driving_terms(g: u64) -> Result<(u64, BigUint)> {
    if g < 2 || g % 2 != 0 {
        return Err(Error::OddGap(g));
    }
    let factors = FactoredInteger::of(g)?;
    let q_bar = factors.largest_prime().expect("g >= 2 has a prime factor");
    let mut total = BigUint::from(1u32);
    for &(q, _) in factors.factors() {
        total *= q - 1; // phi of the radical
    }
    for p in primes_up_to(q_bar)? {
        if p < q_bar && !factors.contains_prime(p) {
            total *= p - 2;
        }
    }
    Ok((q_bar, total))
}

/// One cell where prediction and construction disagreed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mismatch {
    pub stage: u64,
    pub g: u64,
    pub j: usize,
    pub predicted: BigUint,
    pub censused: BigUint,
}

/// Outcome of running the recurrence against direct construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiscrepancyReport {
    /// Stages at which tables were compared.
    pub stages: Vec<u64>,
    /// Rows excluded from comparison: (stage, g) dropped by the
    /// recurrence precondition.
    pub excluded: Vec<(u64, u64)>,
    pub mismatches: Vec<Mismatch>,
}

impl DiscrepancyReport {
    pub fn clean(&self) -> bool {
        self.mismatches.is_empty()
    }
}

/// Advance counts stage by stage from `p_start` to `p_end` while also
/// constructing and censusing each stage, comparing every covered cell.
pub fn predict_vs_construct(
    p_start: u64,
    p_end: u64,
    g_max: u64,
    j_max: usize,
    resident_limit: u64,
) -> Result<DiscrepancyReport> {
    if !crate::numtheory::is_prime(p_start) {
        return Err(Error::NotPrime(p_start));
    }
    if !crate::numtheory::is_prime(p_end) {
        return Err(Error::NotPrime(p_end));
    }
    if p_end < p_start {
        return Err(Error::InvalidArgument(format!(
            "empty stage range {p_start}..{p_end}"
        )));
    }
    let primes = primes_up_to(p_end)?;
    let mut cycle = Cycle::base(2)?;
    for &q in &primes[1..] {
        if q > p_start {
            break;
        }
        guard_next_stage(&cycle, q, resident_limit)?;
        cycle = cycle.extend(q)?;
    }
    let mut table = census(&cycle, g_max, j_max);
    let mut report = DiscrepancyReport {
        stages: Vec::new(),
        excluded: Vec::new(),
        mismatches: Vec::new(),
    };
    for &q in primes.iter().filter(|&&q| q > p_start) {
        let (predicted, step) = advance_counts(&table, q)?;
        guard_next_stage(&cycle, q, resident_limit)?;
        cycle = cycle.extend(q)?;
        let censused = census(&cycle, g_max, j_max);
        report.stages.push(q);
        for g in step.dropped {
            report.excluded.push((q, g));
        }
        let rows: std::collections::BTreeSet<u64> = predicted
            .rows()
            .map(|(g, _)| g)
            .chain(censused.rows().map(|(g, _)| g))
            .filter(|g| !report.excluded.iter().any(|&(_, eg)| eg == *g))
            .collect();
        for g in rows {
            for j in 1..=j_max {
                let a = predicted.count(g, j);
                let b = censused.count(g, j);
                if a != b {
                    report.mismatches.push(Mismatch {
                        stage: q,
                        g,
                        j,
                        predicted: a,
                        censused: b,
                    });
                }
            }
        }
        table = predicted;
    }
    Ok(report)
}

fn guard_next_stage(cycle: &Cycle, q: u64, resident_limit: u64) -> Result<()> {
    let growth = if cycle.modulus().contains_prime(q) {
        q
    } else {
        q - 1
    };
    let needed = cycle.len() * growth;
    if needed > resident_limit {
        return Err(Error::ResourceGuard {
            what: "cycle materialization",
            needed,
            limit: resident_limit,
        });
    }
    Ok(())
}

/// Render an exact rational as a decimal with `sig_digits` significant
/// digits, rounded half-up, trailing zeros trimmed. Display-only.
pub fn decimal_string(r: &BigRational, sig_digits: usize) -> String {
    let sig = sig_digits.max(1);
    if r.is_zero() {
        return "0".into();
    }
    if r.is_negative() {
        return format!("-{}", decimal_string(&-r.clone(), sig));
    }
    let n = r.numer().magnitude();
    let d = r.denom().magnitude();
    let int = n / d;
    let frac_digits = if !int.is_zero() {
        sig.saturating_sub(int.to_string().len())
    } else {
        // zeros between the point and the first significant digit
        let mut k = 0usize;
        let mut scaled = n * 10u32;
        while scaled < *d {
            scaled *= 10u32;
            k += 1;
        }
        k + sig
    };
    let scale = BigUint::from(10u32).pow(frac_digits as u32);
    let rounded = (n * &scale * 2u32 + d) / (d * 2u32);
    let digits = rounded.to_string();
    if frac_digits == 0 {
        return digits;
    }
    let padded = if digits.len() <= frac_digits {
        format!("{}{digits}", "0".repeat(frac_digits + 1 - digits.len()))
    } else {
        digits
    };
    let (ip, fp) = padded.split_at(padded.len() - frac_digits);
    let fp = fp.trim_end_matches('0');
    if fp.is_empty() {
        ip.to_string()
    } else {
        format!("{ip}.{fp}")
    }
}

/// CSV export of count tables across stages: `stage_prime,gap,length,count`.
pub fn count_trajectory_csv<W: std::io::Write>(
    tables: &[DrivingTermTable],
    w: &mut W,
) -> Result<()> {
    writeln!(w, "stage_prime,gap,length,count")?;
    for table in tables {
        let stage = stage_of(table)?;
        for (g, row) in table.rows() {
            for (j, n) in row {
                writeln!(w, "{stage},{g},{j},{n}")?;
            }
        }
    }
    Ok(())
}

/// CSV export of per-gap ratio sums across stages:
/// `stage_prime,gap,ratio_sum_exact,ratio_sum_decimal`.
pub fn ratio_trajectory_csv<W: std::io::Write>(
    tables: &[DrivingTermTable],
    sig_digits: usize,
    w: &mut W,
) -> Result<()> {
    writeln!(w, "stage_prime,gap,ratio_sum_exact,ratio_sum_decimal")?;
    for table in tables {
        let stage = stage_of(table)?;
        let ratios = RatioTable::from_table(table)?;
        for (g, _) in table.rows() {
            let sum = ratios.row_sum(g);
            writeln!(
                w,
                "{stage},{g},{sum},{}",
                decimal_string(&sum, sig_digits)
            )?;
        }
    }
    Ok(())
}
