//! Census of driving terms — constellations of consecutive gaps summing to
//! a target — plus maximal-gap reports and closure audits.
//!
//! Windows are read cyclically: a constellation may wrap past the final
//! gap, and for very short cycles may wrap more than once. The streaming
//! sink produces the identical table without materializing the cycle, by
//! buffering the head of the stream and re-scanning the seam at the end.

use std::collections::{BTreeMap, VecDeque};
use std::str::FromStr;

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gapcycle::{Cycle, GapSink, GapWord};
use crate::numtheory::{is_prime, primes_up_to, FactoredInteger};

/// Counts of driving terms: `counts[g][j]` is the number of cyclic windows
/// of `j` consecutive gaps summing to `g`. Only nonzero cells are stored.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DrivingTermTable {
    modulus: FactoredInteger,
    g_max: u64,
    j_max: usize,
    counts: BTreeMap<u64, BTreeMap<usize, BigUint>>,
    complete_gaps: Vec<u64>,
}

impl DrivingTermTable {
    pub(crate) fn from_parts(
        modulus: FactoredInteger,
        g_max: u64,
        j_max: usize,
        counts: BTreeMap<u64, BTreeMap<usize, BigUint>>,
    ) -> Self {
        let complete_gaps = complete_gaps_for(&modulus, g_max, j_max);
        DrivingTermTable {
            modulus,
            g_max,
            j_max,
            counts,
            complete_gaps,
        }
    }

    pub fn modulus(&self) -> &FactoredInteger {
        &self.modulus
    }

    pub fn g_max(&self) -> u64 {
        self.g_max
    }

    pub fn j_max(&self) -> usize {
        self.j_max
    }

    /// The count for one cell; zero when absent.
    pub fn count(&self, g: u64, j: usize) -> BigUint {
        self.counts
            .get(&g)
            .and_then(|row| row.get(&j))
            .cloned()
            .unwrap_or_default()
    }

    /// One row of the table, if any window summed to `g`.
    pub fn row(&self, g: u64) -> Option<&BTreeMap<usize, BigUint>> {
        self.counts.get(&g)
    }

    /// All nonzero rows in ascending gap order.
    pub fn rows(&self) -> impl Iterator<Item = (u64, &BTreeMap<usize, BigUint>)> {
        self.counts.iter().map(|(&g, row)| (g, row))
    }

    /// Total driving terms for `g` across every captured length.
    pub fn row_total(&self, g: u64) -> BigUint {
        self.counts
            .get(&g)
            .map(|row| row.values().sum())
            .unwrap_or_default()
    }

    /// Whether every driving term for `g` fits within `j_max` gaps, so the
    /// row is guaranteed complete.
    pub fn is_complete(&self, g: u64) -> bool {
        self.complete_gaps.binary_search(&g).is_ok()
    }

    pub fn complete_gaps(&self) -> &[u64] {
        &self.complete_gaps
    }

    /// The count of plain 2-gaps, the normalizer for every ratio.
    pub fn n21(&self) -> BigUint {
        self.count(2, 1)
    }

    /// CSV export: commented header lines naming the modulus and bounds,
    /// then one row per nonzero cell in (gap, length) order.
    pub fn to_csv<W: std::io::Write>(&self, w: &mut W) -> std::io::Result<()> {
        writeln!(w, "# modulus: {}", self.modulus.display_factors())?;
        writeln!(w, "# g_max: {}", self.g_max)?;
        writeln!(w, "# j_max: {}", self.j_max)?;
        writeln!(w, "gap,length,count")?;
        for (g, row) in &self.counts {
            for (j, n) in row {
                writeln!(w, "{g},{j},{n}")?;
            }
        }
        Ok(())
    }

    pub fn to_json_string(&self) -> String {
        let dto = TableDto {
            modulus_factors: self.modulus.factors().to_vec(),
            g_max: self.g_max,
            j_max: self.j_max,
            complete_gaps: self.complete_gaps.clone(),
            counts: self
                .counts
                .iter()
                .map(|(&g, row)| {
                    (
                        g,
                        row.iter().map(|(&j, n)| (j, n.to_string())).collect(),
                    )
                })
                .collect(),
        };
        serde_json::to_string_pretty(&dto).expect("table serialization cannot fail")
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let dto: TableDto = serde_json::from_str(s)
            .map_err(|e| Error::Malformed(format!("table JSON: {e}")))?;
        let modulus = FactoredInteger::from_factors(dto.modulus_factors)?;
        let mut counts = BTreeMap::new();
        for (g, row) in dto.counts {
            let mut out = BTreeMap::new();
            for (j, n) in row {
                let n = BigUint::from_str(&n)
                    .map_err(|e| Error::Malformed(format!("count for g={g}, j={j}: {e}")))?;
                out.insert(j, n);
            }
            counts.insert(g, out);
        }
        Ok(DrivingTermTable::from_parts(
            modulus, dto.g_max, dto.j_max, counts,
        ))
    }
}

#[derive(Serialize, Deserialize)]
struct TableDto {
    modulus_factors: Vec<(u64, u32)>,
    g_max: u64,
    j_max: usize,
    complete_gaps: Vec<u64>,
    counts: BTreeMap<u64, BTreeMap<usize, String>>,
}

/// Gaps `g <= g_max` for which a window of sum `g` can never be longer
/// than `j_max`: with minimum gap 2 on even moduli (1 on odd), that is
/// `g <= j_max * min_gap`.
fn complete_gaps_for(modulus: &FactoredInteger, g_max: u64, j_max: usize) -> Vec<u64> {
    let min_gap: u64 = if modulus.is_even() { 2 } else { 1 };
    let cap = (j_max as u64).saturating_mul(min_gap);
    (2..=g_max).filter(|&g| g <= cap).collect()
}

/// Dense accumulator for window counts; cell counts fit u64 through any
/// materializable stage.
struct Grid {
    g_max: u64,
    j_max: usize,
    cells: Vec<u64>,
}

impl Grid {
    fn new(g_max: u64, j_max: usize) -> Self {
        Grid {
            g_max,
            j_max,
            cells: vec![0; (g_max as usize + 1) * j_max],
        }
    }

    #[inline]
    fn bump(&mut self, sum: u64, j: usize) {
        self.cells[sum as usize * self.j_max + (j - 1)] += 1;
    }

    fn into_table(self, modulus: FactoredInteger) -> DrivingTermTable {
        let mut counts: BTreeMap<u64, BTreeMap<usize, BigUint>> = BTreeMap::new();
        // the table's domain starts at g = 2; sums of 1 (unit gaps of odd
        // moduli) are out of scope
        for g in 2..=self.g_max {
            for j in 1..=self.j_max {
                let n = self.cells[g as usize * self.j_max + (j - 1)];
                if n != 0 {
                    counts.entry(g).or_default().insert(j, BigUint::from(n));
                }
            }
        }
        DrivingTermTable::from_parts(modulus, self.g_max, self.j_max, counts)
    }
}

/// Accumulate one window starting wherever `gaps` starts.
#[inline]
fn scan_window(grid: &mut Grid, gaps: impl Iterator<Item = u64>) {
    let mut sum = 0u64;
    for (k, g) in gaps.take(grid.j_max).enumerate() {
        sum += g;
        if sum > grid.g_max {
            return;
        }
        grid.bump(sum, k + 1);
    }
}

fn scan_all<G: GapWord>(gaps: &[G], grid: &mut Grid) {
    let m = gaps.len();
    if m == 0 {
        return;
    }
    for s in 0..m {
        let mut sum = 0u64;
        let mut idx = s;
        for j in 1..=grid.j_max {
            sum += gaps[idx].widen();
            if sum > grid.g_max {
                break;
            }
            grid.bump(sum, j);
            idx += 1;
            if idx == m {
                idx = 0;
            }
        }
    }
}

/// Census over a materialized cycle: every cyclic start position, windows
/// up to `j_max` gaps and sum `g_max`.
pub fn census(cycle: &Cycle, g_max: u64, j_max: usize) -> DrivingTermTable {
    let mut grid = Grid::new(g_max, j_max);
    match cycle {
        Cycle::W1(c) => scan_all(c.gaps(), &mut grid),
        Cycle::W2(c) => scan_all(c.gaps(), &mut grid),
        Cycle::W4(c) => scan_all(c.gaps(), &mut grid),
    }
    grid.into_table(cycle.modulus().clone())
}

/// Streaming census: feed the gaps of one full cycle in order, then call
/// [`CensusSink::finish`]. Produces exactly the table [`census`] would.
///
/// Only `min(j_max, g_max / min_gap)` gaps are buffered at either end of
/// the stream; cycles shorter than that horizon fall back to a buffered
/// multi-wrap scan.
pub struct CensusSink {
    modulus: FactoredInteger,
    declared: u64,
    horizon: usize,
    head: Vec<u64>,
    ring: VecDeque<u64>,
    grid: Grid,
    seen: u64,
    sum: u128,
}

impl CensusSink {
    pub fn new(modulus: FactoredInteger, g_max: u64, j_max: usize) -> Result<Self> {
        let declared = modulus.phi_u64().ok_or_else(|| {
            Error::InvalidArgument(format!("phi({modulus}) overflows u64"))
        })?;
        let min_gap: u64 = if modulus.is_even() { 2 } else { 1 };
        let horizon = j_max.min((g_max / min_gap) as usize);
        Ok(CensusSink {
            modulus,
            declared,
            horizon,
            head: Vec::with_capacity(horizon.saturating_sub(1)),
            ring: VecDeque::with_capacity(horizon + 1),
            grid: Grid::new(g_max, j_max),
            seen: 0,
            sum: 0,
        })
    }

    /// Verify the stream delivered exactly the declared cycle, scan the
    /// seam, and hand back the finished table.
    pub fn finish(self) -> Result<DrivingTermTable> {
        let CensusSink {
            modulus,
            declared,
            horizon,
            head,
            ring,
            mut grid,
            seen,
            sum,
        } = self;
        if seen != declared {
            return Err(Error::Truncated {
                got: seen,
                expected: declared,
            });
        }
        let n = modulus.value();
        if BigUint::from(sum) != n {
            return Err(Error::Malformed(format!(
                "stream gaps sum to {sum}, modulus is {n}"
            )));
        }
        if horizon > 0 {
            if declared < horizon as u64 {
                // short cycle: windows wrap repeatedly, scan the whole
                // buffered cycle directly
                for s in 0..head.len() {
                    scan_window(&mut grid, head.iter().copied().cycle().skip(s));
                }
            } else {
                // seam: the horizon-1 start positions whose windows wrap
                let combined: Vec<u64> = ring
                    .iter()
                    .skip(1)
                    .chain(head.iter())
                    .copied()
                    .collect();
                for s in 0..horizon - 1 {
                    scan_window(&mut grid, combined[s..].iter().copied());
                }
            }
        }
        Ok(grid.into_table(modulus))
    }
}

impl GapSink for CensusSink {
    fn accept(&mut self, gap: u64) -> Result<()> {
        if self.seen == self.declared {
            return Err(Error::Truncated {
                got: self.seen + 1,
                expected: self.declared,
            });
        }
        self.seen += 1;
        self.sum += u128::from(gap);
        if self.horizon == 0 {
            return Ok(());
        }
        if self.head.len() < self.horizon - 1 {
            self.head.push(gap);
        }
        self.ring.push_back(gap);
        if self.ring.len() > self.horizon {
            self.ring.pop_front();
        }
        if self.ring.len() == self.horizon {
            scan_window(&mut self.grid, self.ring.iter().copied());
        }
        Ok(())
    }
}

/// The maximum gap of a materialized cycle (the Jacobsthal function for
/// squarefree moduli).
pub fn max_gap(cycle: &Cycle) -> u64 {
    cycle.max_gap()
}

/// Streaming companion to [`max_gap`].
#[derive(Debug, Default, Clone, Copy)]
pub struct MaxGapSink {
    pub max: u64,
    pub count: u64,
}

impl GapSink for MaxGapSink {
    fn accept(&mut self, gap: u64) -> Result<()> {
        if gap > self.max {
            self.max = gap;
        }
        self.count += 1;
        Ok(())
    }
}

/// Maximum gap of every primorial stage up to `p_limit`, built by
/// ascending extension. `resident_limit` bounds the materialized gap count.
pub fn max_gap_by_stage(p_limit: u64, resident_limit: u64) -> Result<Vec<(u64, u64)>> {
    let primes = primes_up_to(p_limit)?;
    let mut cycle = Cycle::base(2)?;
    let mut out = vec![(2, cycle.max_gap())];
    for &q in &primes[1..] {
        let next_phi = cycle.len() * (q - 1);
        if next_phi > resident_limit {
            return Err(Error::ResourceGuard {
                what: "cycle materialization",
                needed: next_phi,
                limit: resident_limit,
            });
        }
        cycle = cycle.extend(q)?;
        out.push((q, cycle.max_gap()));
    }
    Ok(out)
}

/// Per-position removal tally for the extension of a cycle by `q`.
#[derive(Debug, Clone)]
pub struct ClosureAudit {
    pub q: u64,
    /// phi(N): generator positions of the input cycle.
    pub positions: u64,
    /// For each input generator, how many of its q images were removed.
    pub removals: Vec<u64>,
    pub pass: bool,
}

/// Audit that extending by `q` removes exactly one of the `q` images of
/// every input generator, by brute-force membership over Z mod qN.
///
/// This deliberately avoids the closure schedule of the extension pass:
/// the removed images are found by comparing generator sets.
pub fn closure_audit(cycle: &Cycle, q: u64, limit: u64) -> Result<ClosureAudit> {
    if !is_prime(q) {
        return Err(Error::NotPrime(q));
    }
    if cycle.modulus().contains_prime(q) {
        return Err(Error::DividesModulus { q });
    }
    let n = cycle.modulus().value_u64().ok_or_else(|| {
        Error::InvalidArgument("modulus too large for a brute-force audit".into())
    })?;
    let needed = cycle.len() * (q - 1);
    if needed > limit {
        return Err(Error::ResourceGuard {
            what: "closure audit",
            needed,
            limit,
        });
    }
    let gens_n = cycle.generators(limit)?;
    let extended = cycle.extend(q)?;
    let gens_qn = extended.generators(limit)?;
    let mut removals = Vec::with_capacity(gens_n.len());
    for &gamma in &gens_n {
        let removed = (0..q)
            .filter(|t| gens_qn.binary_search(&(gamma + t * n)).is_err())
            .count() as u64;
        removals.push(removed);
    }
    let pass = removals.iter().all(|&r| r == 1);
    Ok(ClosureAudit {
        q,
        positions: gens_n.len() as u64,
        removals,
        pass,
    })
}

/// The smallest primorial stage `p <= p_limit` whose cycle contains `g`
/// as a plain gap, or `None` if no stage up to `p_limit` does.
///
/// Stages are materialized while they fit `resident_limit` gaps; one
/// further stage is examined by streaming. Needing to go beyond that is a
/// resource error, since the streamed stage cannot seed another extension.
pub fn first_occurrence_stage(
    g: u64,
    p_limit: u64,
    resident_limit: u64,
) -> Result<Option<u64>> {
    let primes = primes_up_to(p_limit)?;
    let mut cycle = Cycle::base(2)?;
    if cycle.contains_gap(g) {
        return Ok(Some(2));
    }
    for (i, &q) in primes.iter().enumerate().skip(1) {
        let next_phi = cycle.len() * (q - 1);
        if next_phi <= resident_limit {
            cycle = cycle.extend(q)?;
            if cycle.contains_gap(g) {
                return Ok(Some(q));
            }
        } else {
            let mut found = false;
            let mut sink = |gap: u64| {
                if gap == g {
                    found = true;
                }
                Ok(())
            };
            cycle.extend_streaming(q, &mut sink)?;
            if found {
                return Ok(Some(q));
            }
            if i + 1 < primes.len() {
                return Err(Error::ResourceGuard {
                    what: "staged construction",
                    needed: next_phi,
                    limit: resident_limit,
                });
            }
            return Ok(None);
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Recompute-from-scratch oracle: every (start, length) window summed
    /// independently, with explicit modular indexing.
    fn naive_census(gaps: &[u64], g_max: u64, j_max: usize) -> BTreeMap<u64, BTreeMap<usize, u64>> {
        let m = gaps.len();
        let mut out: BTreeMap<u64, BTreeMap<usize, u64>> = BTreeMap::new();
        for s in 0..m {
            for len in 1..=j_max {
                let sum: u64 = (0..len).map(|k| gaps[(s + k) % m]).sum();
                if (2..=g_max).contains(&sum) {
                    *out.entry(sum).or_default().entry(len).or_default() += 1;
                }
            }
        }
        out
    }

    fn table_as_u64(table: &DrivingTermTable) -> BTreeMap<u64, BTreeMap<usize, u64>> {
        table
            .rows()
            .map(|(g, row)| {
                (
                    g,
                    row.iter()
                        .map(|(&j, n)| (j, u64::try_from(n).unwrap()))
                        .collect(),
                )
            })
            .collect()
    }

    fn d30() -> Cycle {
        Cycle::primorial(5).unwrap()
    }

    #[test]
    fn census_of_d30_hand_enumeration() {
        let table = census(&d30(), 10, 8);
        assert_eq!(table.count(6, 1), BigUint::from(2u32));
        assert_eq!(table.count(6, 2), BigUint::from(4u32));
        assert_eq!(table.count(10, 2), BigUint::from(2u32));
        assert_eq!(table.count(10, 3), BigUint::from(2u32));
        assert_eq!(table.count(10, 4), BigUint::from(0u32));
        assert_eq!(table.row_total(10), BigUint::from(4u32));
        assert_eq!(table.row_total(6), BigUint::from(6u32));
    }

    #[test]
    fn census_counts_only_the_final_two_on_a_prime_base() {
        let table = census(&Cycle::base(5).unwrap(), 2, 1);
        assert_eq!(table.count(2, 1), BigUint::from(1u32));
        assert_eq!(table.rows().count(), 1);
    }

    #[test]
    fn census_matches_naive_oracle() {
        let cases: &[(Cycle, u64, usize)] = &[
            (d30(), 10, 8),
            (d30(), 32, 16),
            (Cycle::primorial(7).unwrap(), 40, 12),
            (Cycle::base(2).unwrap().extend(3).unwrap(), 12, 9),
            (Cycle::base(7).unwrap(), 6, 4),
            (Cycle::base(3).unwrap().extend(5).unwrap(), 9, 5),
        ];
        for (cycle, g_max, j_max) in cases {
            let gaps: Vec<u64> = cycle.gaps_u64().collect();
            let expect = naive_census(&gaps, *g_max, *j_max);
            let got = table_as_u64(&census(cycle, *g_max, *j_max));
            assert_eq!(got, expect, "mismatch at N={}", cycle.modulus());
        }
    }

    #[test]
    fn multi_wrap_windows_are_counted() {
        // [4,2] over 6: the sum-12 window of length 4 wraps twice, once
        // from each start
        let six = Cycle::base(2).unwrap().extend(3).unwrap();
        let table = census(&six, 12, 9);
        assert_eq!(table.count(12, 4), BigUint::from(2u32));
        assert_eq!(table.count(6, 2), BigUint::from(2u32));
        assert_eq!(table.count(18, 6), BigUint::from(0u32)); // beyond g_max
    }

    #[test]
    fn n21_follows_the_stage_product() {
        // n_{2,1}(p#) = prod of (q-2) over odd q <= p
        let expect = [(3u64, 1u64), (5, 3), (7, 15), (11, 135), (13, 1485)];
        for (p, n) in expect {
            let table = census(&Cycle::primorial(p).unwrap(), 2, 1);
            assert_eq!(table.n21(), BigUint::from(n), "n21 at {p}#");
        }
    }

    #[test]
    fn complete_gaps_follow_the_parity_rule() {
        let table = census(&d30(), 10, 3);
        assert_eq!(table.complete_gaps(), &[2, 3, 4, 5, 6]);
        assert!(table.is_complete(6));
        assert!(!table.is_complete(8));
        // odd modulus: minimum gap 1, so completeness needs j_max >= g
        let c15 = Cycle::base(3).unwrap().extend(5).unwrap();
        let table = census(&c15, 6, 3);
        assert_eq!(table.complete_gaps(), &[2, 3]);
    }

    #[test]
    fn rows_are_stable_once_complete() {
        let narrow = census(&d30(), 32, 3);
        let wide = census(&d30(), 32, 9);
        for g in [2u64, 4, 6] {
            assert_eq!(narrow.row(g), wide.row(g), "row {g} changed");
        }
    }

    #[test]
    fn streaming_census_equals_materialized() {
        let cases: &[(Cycle, u64, usize)] = &[
            (d30(), 10, 8),
            (d30(), 4, 1),
            (d30(), 100, 50),
            (Cycle::primorial(7).unwrap(), 32, 16),
            (Cycle::base(2).unwrap().extend(3).unwrap(), 12, 9),
            (Cycle::base(3).unwrap().extend(5).unwrap(), 9, 5),
            (Cycle::base(2).unwrap(), 4, 2),
        ];
        for (cycle, g_max, j_max) in cases {
            let mut sink = CensusSink::new(cycle.modulus().clone(), *g_max, *j_max).unwrap();
            for gap in cycle.gaps_u64() {
                sink.accept(gap).unwrap();
            }
            let streamed = sink.finish().unwrap();
            let direct = census(cycle, *g_max, *j_max);
            assert_eq!(
                streamed, direct,
                "stream/direct divergence at N={} g_max={g_max} j_max={j_max}",
                cycle.modulus()
            );
        }
    }

    #[test]
    fn streaming_census_through_extension() {
        let six = Cycle::base(2).unwrap().extend(3).unwrap();
        let mut sink = CensusSink::new(
            six.modulus().times_prime(5).unwrap(),
            10,
            8,
        )
        .unwrap();
        six.extend_streaming(5, &mut sink).unwrap();
        let streamed = sink.finish().unwrap();
        assert_eq!(streamed, census(&d30(), 10, 8));
    }

    #[test]
    fn truncated_stream_is_an_error() {
        let c = d30();
        let mut sink = CensusSink::new(c.modulus().clone(), 10, 8).unwrap();
        for gap in c.gaps_u64().take(7) {
            sink.accept(gap).unwrap();
        }
        match sink.finish() {
            Err(Error::Truncated { got: 7, expected: 8 }) => {}
            other => panic!("unexpected result {other:?}"),
        }

        let empty = CensusSink::new(c.modulus().clone(), 10, 8).unwrap();
        assert!(matches!(
            empty.finish(),
            Err(Error::Truncated { got: 0, expected: 8 })
        ));
    }

    #[test]
    fn overlong_stream_is_an_error() {
        let c = d30();
        let mut sink = CensusSink::new(c.modulus().clone(), 10, 8).unwrap();
        for gap in c.gaps_u64() {
            sink.accept(gap).unwrap();
        }
        assert!(matches!(
            sink.accept(2),
            Err(Error::Truncated { got: 9, expected: 8 })
        ));
    }

    #[test]
    fn stream_with_wrong_sum_is_rejected() {
        let c = d30();
        let mut sink = CensusSink::new(c.modulus().clone(), 10, 8).unwrap();
        // right count, wrong content
        for _ in 0..8 {
            sink.accept(4).unwrap();
        }
        assert!(matches!(sink.finish(), Err(Error::Malformed(_))));
    }

    #[test]
    fn max_gap_examples() {
        assert_eq!(max_gap(&d30()), 6);
        assert_eq!(max_gap(&Cycle::primorial(13).unwrap()), 22);
        let mut sink = MaxGapSink::default();
        d30().extend_streaming(7, &mut sink).unwrap();
        assert_eq!(sink.max, 10);
        assert_eq!(sink.count, 48);
    }

    #[test]
    fn max_gap_by_stage_through_13() {
        let stages = max_gap_by_stage(13, 1 << 20).unwrap();
        assert_eq!(
            stages,
            vec![(2, 2), (3, 4), (5, 6), (7, 10), (11, 14), (13, 22)]
        );
    }

    #[test]
    fn max_gap_by_stage_guard() {
        assert!(matches!(
            max_gap_by_stage(13, 100),
            Err(Error::ResourceGuard { .. })
        ));
    }

    #[test]
    fn closure_audits_pass() {
        let six = Cycle::base(2).unwrap().extend(3).unwrap();
        let audit = closure_audit(&six, 5, 1 << 20).unwrap();
        assert!(audit.pass);
        assert_eq!(audit.positions, 2);
        assert_eq!(audit.removals, vec![1, 1]);

        for q in [7u64, 11] {
            let audit = closure_audit(&d30(), q, 1 << 20).unwrap();
            assert!(audit.pass, "audit failed for q={q}");
            assert_eq!(audit.positions, 8);
        }
    }

    #[test]
    fn closure_audit_rejects_dividing_prime() {
        assert!(matches!(
            closure_audit(&d30(), 5, 1 << 20),
            Err(Error::DividesModulus { q: 5 })
        ));
    }

    #[test]
    fn first_occurrence_examples() {
        let lim = 1 << 22;
        assert_eq!(first_occurrence_stage(2, 13, lim).unwrap(), Some(2));
        assert_eq!(first_occurrence_stage(4, 13, lim).unwrap(), Some(3));
        assert_eq!(first_occurrence_stage(6, 13, lim).unwrap(), Some(5));
        assert_eq!(first_occurrence_stage(22, 13, lim).unwrap(), Some(13));
        // odd gaps never appear in these even-modulus cycles
        assert_eq!(first_occurrence_stage(5, 13, lim).unwrap(), None);
    }

    #[test]
    fn first_occurrence_streams_one_stage_past_the_limit() {
        // with room for 8 resident gaps, the 7# stage must stream
        assert_eq!(first_occurrence_stage(10, 7, 10).unwrap(), Some(7));
        // not found when streaming the final allowed stage
        assert_eq!(first_occurrence_stage(22, 7, 10).unwrap(), None);
        // needing yet another stage is a guard error
        assert!(matches!(
            first_occurrence_stage(22, 13, 10),
            Err(Error::ResourceGuard { .. })
        ));
    }

    #[test]
    fn csv_export_golden() {
        let mut out = Vec::new();
        census(&d30(), 10, 8).to_csv(&mut out).unwrap();
        let expect = "\
# modulus: 2 3 5
# g_max: 10
# j_max: 8
gap,length,count
2,1,3
4,1,3
6,1,2
6,2,4
8,2,2
8,3,1
10,2,2
10,3,2
";
        assert_eq!(String::from_utf8(out).unwrap(), expect);
    }

    #[test]
    fn json_round_trip() {
        let table = census(&d30(), 32, 16);
        let json = table.to_json_string();
        let back = DrivingTermTable::from_json_str(&json).unwrap();
        assert_eq!(back, table);
        assert!(json.contains("\"g_max\": 32"));
    }

    #[test]
    fn doubled_prime_stage_gap_is_present() {
        // 2*p_{k-1} occurs in the p_k stage
        let mut cycle = Cycle::base(2).unwrap();
        let primes = primes_up_to(13).unwrap();
        for w in primes.windows(2) {
            cycle = cycle.extend(w[1]).unwrap();
            assert!(
                cycle.contains_gap(2 * w[0]),
                "gap {} missing from the {}# stage",
                2 * w[0],
                w[1]
            );
        }
    }

    /// Larger gaps enter late: 36 is absent until the 23 stage (whose
    /// maximum is 40), and 42 is still absent there. The tight resident
    /// limit forces the 23 stage through the streaming branch.
    #[test]
    fn first_occurrence_of_larger_gaps() {
        assert_eq!(
            first_occurrence_stage(30, 23, 2_000_000).unwrap(),
            Some(19)
        );
        assert_eq!(
            first_occurrence_stage(36, 23, 2_000_000).unwrap(),
            Some(23)
        );
        assert_eq!(first_occurrence_stage(42, 23, 2_000_000).unwrap(), None);
    }
}
