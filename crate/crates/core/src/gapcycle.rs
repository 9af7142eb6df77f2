//! The cycle of gaps among the generators of Z mod N, built one prime
//! factor at a time.
//!
//! Extending a cycle by a prime `q` concatenates `q` copies of it and, when
//! `q` does not already divide the modulus, closes the gap pair around each
//! removed candidate (the multiples of `q` that are coprime to N). The
//! closure positions are found by a running-sum schedule, so the whole
//! extension is a single left-to-right pass that needs only the input cycle
//! resident. That pass backs both the materialized `extend` and the
//! sink-driven `extend_streaming`.

mod snapshot;

pub use snapshot::{
    parse_snapshot, read_header, read_snapshot, write_snapshot, SnapshotHeader, SNAPSHOT_MAGIC,
};

use num_traits::{NumCast, PrimInt, Unsigned};

use crate::error::{Error, Result};
use crate::numtheory::{is_prime, primes_up_to, FactoredInteger};

/// Storage word for a single gap. Widths 1, 2 and 4 bytes are supported;
/// one byte is enough through every stage a desk can hold.
pub trait GapWord: PrimInt + Unsigned + Send + Sync + 'static {
    /// Bytes per stored gap in the snapshot payload.
    const WIDTH: u8;

    fn widen(self) -> u64 {
        // unsigned primitive to u64 never fails
        self.to_u64().unwrap()
    }

    fn narrow(v: u64) -> Option<Self> {
        <Self as NumCast>::from(v)
    }

    fn append_le(self, out: &mut Vec<u8>);
    fn read_le(bytes: &[u8]) -> Self;
}

impl GapWord for u8 {
    const WIDTH: u8 = 1;
    fn append_le(self, out: &mut Vec<u8>) {
        out.push(self);
    }
    fn read_le(bytes: &[u8]) -> Self {
        bytes[0]
    }
}

impl GapWord for u16 {
    const WIDTH: u8 = 2;
    fn append_le(self, out: &mut Vec<u8>) {
        out.extend_from_slice(&self.to_le_bytes());
    }
    fn read_le(bytes: &[u8]) -> Self {
        u16::from_le_bytes([bytes[0], bytes[1]])
    }
}

impl GapWord for u32 {
    const WIDTH: u8 = 4;
    fn append_le(self, out: &mut Vec<u8>) {
        out.extend_from_slice(&self.to_le_bytes());
    }
    fn read_le(bytes: &[u8]) -> Self {
        u32::from_le_bytes([bytes[0], bytes[1], bytes[2], bytes[3]])
    }
}

/// The cycle of gaps for a fixed modulus, stored densely at width `G`.
///
/// The first gap runs from the generator 1 to the next generator; the final
/// gap wraps past N back to 1 and is always 2.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GapCycle<G: GapWord> {
    modulus: FactoredInteger,
    gaps: Vec<G>,
}

impl<G: GapWord> GapCycle<G> {
    /// Assemble without validation; pair with [`GapCycle::validate`].
    pub fn from_raw_parts(modulus: FactoredInteger, gaps: Vec<G>) -> Self {
        GapCycle { modulus, gaps }
    }

    pub fn modulus(&self) -> &FactoredInteger {
        &self.modulus
    }

    pub fn gaps(&self) -> &[G] {
        &self.gaps
    }

    pub fn len(&self) -> u64 {
        self.gaps.len() as u64
    }

    pub fn is_empty(&self) -> bool {
        self.gaps.is_empty()
    }

    pub fn iter_u64(&self) -> impl Iterator<Item = u64> + '_ {
        self.gaps.iter().map(|g| g.widen())
    }

    pub fn max_gap(&self) -> u64 {
        self.iter_u64().max().unwrap_or(0)
    }

    /// How many gaps equal `value` (the count of length-1 driving terms).
    pub fn count_of(&self, value: u64) -> u64 {
        match G::narrow(value) {
            Some(v) => self.gaps.iter().filter(|&&g| g == v).count() as u64,
            None => 0,
        }
    }

    pub fn contains_gap(&self, value: u64) -> bool {
        match G::narrow(value) {
            Some(v) => self.gaps.contains(&v),
            None => false,
        }
    }

    /// The generators of Z mod N as running totals over the gaps.
    ///
    /// Materializes phi(N) values, so the caller passes a resident limit.
    pub fn generators(&self, limit: u64) -> Result<Vec<u64>> {
        if self.len() > limit {
            return Err(Error::ResourceGuard {
                what: "generator materialization",
                needed: self.len(),
                limit,
            });
        }
        let mut out = Vec::with_capacity(self.gaps.len());
        let mut value = 1u64;
        for g in self.iter_u64() {
            out.push(value);
            value += g;
        }
        Ok(out)
    }

    /// Check every structural invariant, reporting each one separately.
    pub fn validate(&self) -> ValidationReport {
        let mut checks = Vec::new();
        let phi = self.modulus.phi();
        let len = num_bigint::BigUint::from(self.len());
        checks.push(Check {
            name: "length_equals_phi",
            passed: len == phi,
            detail: (len != phi).then(|| format!("phi(N) = {phi}, cycle has {} gaps", self.len())),
        });

        let sum: u128 = self.iter_u64().map(|g| g as u128).sum();
        let value = self.modulus.value();
        let sum_big = num_bigint::BigUint::from(sum);
        checks.push(Check {
            name: "sum_equals_modulus",
            passed: sum_big == value,
            detail: (sum_big != value).then(|| format!("gaps sum to {sum}, N = {value}")),
        });

        let last = self.gaps.last().map(|g| g.widen());
        checks.push(Check {
            name: "final_gap_is_two",
            passed: last == Some(2),
            detail: (last != Some(2)).then(|| format!("final gap is {last:?}")),
        });

        // g_k = g_{phi-k} for 1 <= k <= phi-1 (1-based)
        let n = self.gaps.len();
        let mut sym_fail = None;
        for k in 1..n {
            if self.gaps[k - 1] != self.gaps[n - k - 1] {
                sym_fail = Some(k);
                break;
            }
        }
        checks.push(Check {
            name: "symmetric_interior",
            passed: sym_fail.is_none(),
            detail: sym_fail.map(|k| {
                format!(
                    "g_{k} = {} but g_{} = {}",
                    self.gaps[k - 1].widen(),
                    n - k,
                    self.gaps[n - k - 1].widen()
                )
            }),
        });

        let min_allowed = if self.modulus.is_even() { 2 } else { 1 };
        let small = self
            .iter_u64()
            .enumerate()
            .find(|&(_, g)| g < min_allowed);
        checks.push(Check {
            name: "minimum_gap",
            passed: small.is_none(),
            detail: small.map(|(i, g)| format!("gap {g} at index {i} (minimum {min_allowed})")),
        });

        ValidationReport { checks }
    }
}

/// One validation check with its outcome.
#[derive(Debug, Clone)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: Option<String>,
}

/// Outcome of [`GapCycle::validate`]: every check listed, pass or fail.
#[derive(Debug, Clone)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn first_failure(&self) -> Option<&Check> {
        self.checks.iter().find(|c| !c.passed)
    }
}

impl std::fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for c in &self.checks {
            write!(f, "{}: {}", c.name, if c.passed { "ok" } else { "FAIL" })?;
            if let Some(d) = &c.detail {
                write!(f, " ({d})")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// Consumer side of a streaming extension. Gaps arrive in cycle order.
pub trait GapSink {
    fn accept(&mut self, gap: u64) -> Result<()>;
}

impl<F: FnMut(u64) -> Result<()>> GapSink for F {
    fn accept(&mut self, gap: u64) -> Result<()> {
        self(gap)
    }
}

/// Sink that collects every gap; handy in tests and small runs.
#[derive(Debug, Default)]
pub struct CollectSink(pub Vec<u64>);

impl GapSink for CollectSink {
    fn accept(&mut self, gap: u64) -> Result<()> {
        self.0.push(gap);
        Ok(())
    }
}

/// What a completed streaming extension emitted.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StreamSummary {
    pub emitted: u64,
    pub sum: u64,
    pub closures: u64,
}

/// A gap cycle at whatever storage width its values need.
///
/// Extension starts at the input width and promotes automatically if a
/// merged gap overflows it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Cycle {
    W1(GapCycle<u8>),
    W2(GapCycle<u16>),
    W4(GapCycle<u32>),
}

macro_rules! with_cycle {
    ($self:expr, $c:ident => $body:expr) => {
        match $self {
            Cycle::W1($c) => $body,
            Cycle::W2($c) => $body,
            Cycle::W4($c) => $body,
        }
    };
}

impl Cycle {
    /// The base cycle for a prime `p`: p-2 ones followed by the wrap gap 2.
    pub fn base(p: u64) -> Result<Cycle> {
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        let mut gaps = vec![1u8; (p - 2) as usize];
        gaps.push(2);
        Ok(Cycle::W1(GapCycle {
            modulus: FactoredInteger::of(p)?,
            gaps,
        }))
    }

    /// The cycle for the primorial `p#`, built by ascending extensions.
    pub fn primorial(p: u64) -> Result<Cycle> {
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        let primes = primes_up_to(p)?;
        let mut cycle = Cycle::base(2)?;
        for &q in &primes[1..] {
            cycle = cycle.extend(q)?;
        }
        Ok(cycle)
    }

    /// Build from plain u64 gaps, choosing the narrowest width that fits.
    pub fn from_gaps(modulus: FactoredInteger, gaps: &[u64]) -> Result<Cycle> {
        let max = gaps.iter().copied().max().unwrap_or(0);
        if max <= u8::MAX as u64 {
            Ok(Cycle::W1(GapCycle {
                modulus,
                gaps: gaps.iter().map(|&g| g as u8).collect(),
            }))
        } else if max <= u16::MAX as u64 {
            Ok(Cycle::W2(GapCycle {
                modulus,
                gaps: gaps.iter().map(|&g| g as u16).collect(),
            }))
        } else if max <= u32::MAX as u64 {
            Ok(Cycle::W4(GapCycle {
                modulus,
                gaps: gaps.iter().map(|&g| g as u32).collect(),
            }))
        } else {
            Err(Error::InvalidArgument(format!(
                "gap {max} exceeds the widest storage word"
            )))
        }
    }

    /// Storage width in bytes: 1, 2 or 4.
    pub fn width(&self) -> u8 {
        match self {
            Cycle::W1(_) => 1,
            Cycle::W2(_) => 2,
            Cycle::W4(_) => 4,
        }
    }

    pub fn modulus(&self) -> &FactoredInteger {
        with_cycle!(self, c => c.modulus())
    }

    pub fn len(&self) -> u64 {
        with_cycle!(self, c => c.len())
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn max_gap(&self) -> u64 {
        with_cycle!(self, c => c.max_gap())
    }

    pub fn count_of(&self, value: u64) -> u64 {
        with_cycle!(self, c => c.count_of(value))
    }

    pub fn contains_gap(&self, value: u64) -> bool {
        with_cycle!(self, c => c.contains_gap(value))
    }

    pub fn validate(&self) -> ValidationReport {
        with_cycle!(self, c => c.validate())
    }

    pub fn generators(&self, limit: u64) -> Result<Vec<u64>> {
        with_cycle!(self, c => c.generators(limit))
    }

    pub fn gaps_u64(&self) -> Box<dyn Iterator<Item = u64> + '_> {
        with_cycle!(self, c => Box::new(c.iter_u64()))
    }

    /// Resident bytes of the gap storage.
    pub fn resident_bytes(&self) -> u64 {
        self.len() * self.width() as u64
    }

    /// Extend by one prime, materializing the new cycle.
    pub fn extend(&self, q: u64) -> Result<Cycle> {
        let new_modulus = self.modulus().times_prime(q)?;
        let target_len = new_modulus.phi_u64().ok_or_else(|| {
            Error::InvalidArgument(format!("phi({new_modulus}) overflows u64"))
        })?;
        let mut collector = WidthCollector::new(self.width(), target_len as usize);
        self.extend_streaming(q, &mut collector)?;
        Ok(collector.into_cycle(new_modulus))
    }

    /// Extend by one prime, pushing each output gap into `sink` without
    /// materializing the result.
    pub fn extend_streaming<S: GapSink>(&self, q: u64, sink: &mut S) -> Result<StreamSummary> {
        if !is_prime(q) {
            return Err(Error::NotPrime(q));
        }
        with_cycle!(self, c => extension_pass(c, q, sink))
    }
}

/// One pass over `q` concatenated copies of the input cycle.
///
/// When `q` divides N there are no closures. Otherwise the candidates
/// removed are exactly `q * gamma` for each generator `gamma` of Z mod N;
/// consecutive removal values differ by `q * g_i` over the input gaps in
/// order, so a running target locates every closure. Merged gaps accumulate
/// in `pending` until a surviving boundary flushes them.
fn extension_pass<G: GapWord, S: GapSink>(
    input: &GapCycle<G>,
    q: u64,
    sink: &mut S,
) -> Result<StreamSummary> {
    let mut summary = StreamSummary::default();
    let feed = |sink: &mut S, summary: &mut StreamSummary, gap: u64| -> Result<()> {
        match sink.accept(gap) {
            Ok(()) => {
                summary.emitted += 1;
                summary.sum += gap;
                Ok(())
            }
            Err(e) => Err(Error::SinkAborted {
                emitted: summary.emitted,
                sum: summary.sum,
                closures: summary.closures,
                source: Box::new(e),
            }),
        }
    };

    if input.modulus.contains_prime(q) {
        for _ in 0..q {
            for g in input.gaps.iter() {
                feed(sink, &mut summary, g.widen())?;
            }
        }
        return Ok(summary);
    }

    let m = input.gaps.len();
    let mut value = 1u64; // candidate at the right end of the current gap
    let mut pending = 0u64;
    let mut target = q; // next removal value, starting at q itself
    let mut sched = 0usize;
    let mut remaining = m; // exactly phi(N) closures occur in total
    for _ in 0..q {
        for idx in 0..m {
            let g = input.gaps[idx].widen();
            value += g;
            pending += g;
            if remaining > 0 && value == target {
                summary.closures += 1;
                remaining -= 1;
                target += q * input.gaps[sched].widen();
                sched += 1;
            } else {
                feed(sink, &mut summary, pending)?;
                pending = 0;
            }
        }
    }
    if remaining != 0 || pending != 0 {
        // only reachable if the input was not a valid cycle
        return Err(Error::InvalidArgument(format!(
            "extension of an invalid cycle: {remaining} scheduled closures never fired"
        )));
    }
    Ok(summary)
}

/// Collector that starts at the input width and re-widens on overflow.
struct WidthCollector {
    buf: CollectBuf,
    capacity: usize,
}

enum CollectBuf {
    W1(Vec<u8>),
    W2(Vec<u16>),
    W4(Vec<u32>),
}

impl WidthCollector {
    fn new(width: u8, capacity: usize) -> Self {
        let buf = match width {
            1 => CollectBuf::W1(Vec::with_capacity(capacity)),
            2 => CollectBuf::W2(Vec::with_capacity(capacity)),
            _ => CollectBuf::W4(Vec::with_capacity(capacity)),
        };
        WidthCollector { buf, capacity }
    }

    fn promote(&mut self, need: u64) {
        let capacity = self.capacity;
        take_mut(&mut self.buf, |buf| match buf {
            CollectBuf::W1(v) if need <= u16::MAX as u64 => {
                let mut w = Vec::with_capacity(capacity);
                w.extend(v.iter().map(|&g| g as u16));
                CollectBuf::W2(w)
            }
            CollectBuf::W1(v) => {
                let mut w = Vec::with_capacity(capacity);
                w.extend(v.iter().map(|&g| g as u32));
                CollectBuf::W4(w)
            }
            CollectBuf::W2(v) => {
                let mut w = Vec::with_capacity(capacity);
                w.extend(v.iter().map(|&g| g as u32));
                CollectBuf::W4(w)
            }
            CollectBuf::W4(v) => CollectBuf::W4(v),
        });
    }

    fn into_cycle(self, modulus: FactoredInteger) -> Cycle {
        match self.buf {
            CollectBuf::W1(gaps) => Cycle::W1(GapCycle { modulus, gaps }),
            CollectBuf::W2(gaps) => Cycle::W2(GapCycle { modulus, gaps }),
            CollectBuf::W4(gaps) => Cycle::W4(GapCycle { modulus, gaps }),
        }
    }
}

fn take_mut<T>(slot: &mut T, f: impl FnOnce(T) -> T)
where
    T: Default,
{
    let old = std::mem::take(slot);
    *slot = f(old);
}

impl Default for CollectBuf {
    fn default() -> Self {
        CollectBuf::W1(Vec::new())
    }
}

impl GapSink for WidthCollector {
    fn accept(&mut self, gap: u64) -> Result<()> {
        loop {
            match &mut self.buf {
                CollectBuf::W1(v) => {
                    if let Some(g) = u8::narrow(gap) {
                        v.push(g);
                        return Ok(());
                    }
                }
                CollectBuf::W2(v) => {
                    if let Some(g) = u16::narrow(gap) {
                        v.push(g);
                        return Ok(());
                    }
                }
                CollectBuf::W4(v) => {
                    if let Some(g) = u32::narrow(gap) {
                        v.push(g);
                        return Ok(());
                    }
                    return Err(Error::InvalidArgument(format!(
                        "gap {gap} exceeds the widest storage word"
                    )));
                }
            }
            self.promote(gap);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Independent oracle: gaps between totatives of n by gcd scan.
    fn coprime_gaps(n: u64) -> Vec<u64> {
        fn gcd(a: u64, b: u64) -> u64 {
            if b == 0 {
                a
            } else {
                gcd(b, a % b)
            }
        }
        let gens: Vec<u64> = (1..=n).filter(|&k| gcd(k, n) == 1).collect();
        let mut gaps: Vec<u64> = gens.windows(2).map(|w| w[1] - w[0]).collect();
        gaps.push(n + gens[0] - gens[gens.len() - 1]);
        gaps
    }

    fn gaps_of(c: &Cycle) -> Vec<u64> {
        c.gaps_u64().collect()
    }

    #[test]
    fn base_cycles() {
        assert_eq!(gaps_of(&Cycle::base(3).unwrap()), vec![1, 2]);
        assert_eq!(gaps_of(&Cycle::base(5).unwrap()), vec![1, 1, 1, 2]);
        assert_eq!(gaps_of(&Cycle::base(2).unwrap()), vec![2]);
        assert!(matches!(Cycle::base(4), Err(Error::NotPrime(4))));
    }

    #[test]
    fn extend_two_by_three() {
        let c = Cycle::base(2).unwrap().extend(3).unwrap();
        assert_eq!(gaps_of(&c), coprime_gaps(6));
        assert_eq!(gaps_of(&c), vec![4, 2]);
    }

    #[test]
    fn extend_six_by_five_matches_published_cycle() {
        let c = Cycle::base(2).unwrap().extend(3).unwrap().extend(5).unwrap();
        assert_eq!(gaps_of(&c), vec![6, 4, 2, 4, 2, 4, 6, 2]);
    }

    #[test]
    fn extend_dividing_prime_concatenates() {
        let six = Cycle::base(2).unwrap().extend(3).unwrap();
        let c = six.extend(3).unwrap();
        assert_eq!(gaps_of(&c), vec![4, 2, 4, 2, 4, 2]);
        assert_eq!(gaps_of(&c), coprime_gaps(18));
    }

    #[test]
    fn extend_rejects_composite() {
        let six = Cycle::base(2).unwrap().extend(3).unwrap();
        assert!(matches!(six.extend(9), Err(Error::NotPrime(9))));
    }

    #[test]
    fn extension_matches_gcd_scan_oracle() {
        // a spread of moduli, even and odd, built in ascending order
        for n in [30u64, 210, 2310, 15, 105, 1155, 4, 8, 12, 90, 450] {
            let f = FactoredInteger::of(n).unwrap();
            let mut cycle: Option<Cycle> = None;
            for &(p, e) in f.factors() {
                for _ in 0..e {
                    cycle = Some(match cycle {
                        None => {
                            // first factor p with exponent possibly > 1
                            Cycle::base(p).unwrap()
                        }
                        Some(c) => c.extend(p).unwrap(),
                    });
                }
            }
            let cycle = cycle.unwrap();
            assert_eq!(gaps_of(&cycle), coprime_gaps(n), "mismatch for N = {n}");
            assert!(cycle.validate().is_valid(), "invalid cycle for N = {n}");
        }
    }

    #[test]
    fn construction_order_does_not_matter() {
        let a = Cycle::base(2).unwrap().extend(3).unwrap().extend(5).unwrap();
        let b = Cycle::base(2).unwrap().extend(5).unwrap().extend(3).unwrap();
        let c = Cycle::base(5).unwrap().extend(3).unwrap().extend(2).unwrap();
        assert_eq!(gaps_of(&a), gaps_of(&b));
        assert_eq!(gaps_of(&a), gaps_of(&c));
        assert_eq!(a.modulus(), c.modulus());
    }

    #[test]
    fn streaming_matches_materialized() {
        let c30 = Cycle::primorial(5).unwrap();
        let mut sink = CollectSink::default();
        let summary = c30.extend_streaming(7, &mut sink).unwrap();
        let materialized = c30.extend(7).unwrap();
        assert_eq!(sink.0, gaps_of(&materialized));
        assert_eq!(summary.emitted, 48);
        assert_eq!(summary.sum, 210);
        assert_eq!(summary.closures, 8);
    }

    #[test]
    fn streaming_summary_examples() {
        let six = Cycle::base(2).unwrap().extend(3).unwrap();
        let mut sink = CollectSink::default();
        let summary = six.extend_streaming(5, &mut sink).unwrap();
        assert_eq!(sink.0, vec![6, 4, 2, 4, 2, 4, 6, 2]);
        assert_eq!(
            summary,
            StreamSummary {
                emitted: 8,
                sum: 30,
                closures: 2
            }
        );

        // q | N branch: pure repetition, no closures
        let mut count = 0u64;
        let mut counting = |_gap: u64| {
            count += 1;
            Ok(())
        };
        let summary = six.extend_streaming(3, &mut counting).unwrap();
        assert_eq!(summary.closures, 0);
        assert_eq!(summary.emitted, 6);
        assert_eq!(count, 6);
    }

    #[test]
    fn sink_failure_reports_partial_progress() {
        let c30 = Cycle::primorial(5).unwrap();
        let mut n = 0u64;
        let mut failing = |_gap: u64| {
            n += 1;
            if n == 3 {
                Err(Error::InvalidArgument("sink full".into()))
            } else {
                Ok(())
            }
        };
        let err = c30.extend_streaming(7, &mut failing).unwrap_err();
        match err {
            Error::SinkAborted { emitted, sum, .. } => {
                assert_eq!(emitted, 2);
                assert!(sum > 0);
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn generators_examples() {
        let c30 = Cycle::primorial(5).unwrap();
        assert_eq!(
            c30.generators(1 << 20).unwrap(),
            vec![1, 7, 11, 13, 17, 19, 23, 29]
        );
        assert_eq!(Cycle::base(5).unwrap().generators(100).unwrap(), vec![1, 2, 3, 4]);
        assert_eq!(Cycle::base(2).unwrap().generators(100).unwrap(), vec![1]);
        assert!(matches!(
            c30.generators(4),
            Err(Error::ResourceGuard { .. })
        ));
    }

    #[test]
    fn generators_match_gcd_scan_after_extension() {
        fn gcd(a: u64, b: u64) -> u64 {
            if b == 0 {
                a
            } else {
                gcd(b, a % b)
            }
        }
        let c = Cycle::primorial(7).unwrap();
        let expect: Vec<u64> = (1..=210u64).filter(|&k| gcd(k, 210) == 1).collect();
        assert_eq!(c.generators(1 << 20).unwrap(), expect);
    }

    #[test]
    fn validate_passes_on_published_cycle() {
        let c = Cycle::primorial(5).unwrap();
        let report = c.validate();
        assert!(report.is_valid(), "{report}");
    }

    #[test]
    fn validate_flags_wrong_length() {
        let c = Cycle::from_gaps(FactoredInteger::of(8).unwrap(), &[4, 2, 2]).unwrap();
        let report = c.validate();
        assert!(!report.is_valid());
        let failed: Vec<_> = report
            .checks
            .iter()
            .filter(|c| !c.passed)
            .map(|c| c.name)
            .collect();
        assert!(failed.contains(&"length_equals_phi"));
        assert!(!failed.contains(&"sum_equals_modulus"));
        assert!(!failed.contains(&"final_gap_is_two"));
    }

    #[test]
    fn validate_flags_asymmetry() {
        let c = Cycle::from_gaps(FactoredInteger::of(12).unwrap(), &[2, 4, 4, 2]).unwrap();
        let report = c.validate();
        let sym = report
            .checks
            .iter()
            .find(|c| c.name == "symmetric_interior")
            .unwrap();
        assert!(!sym.passed, "{report}");
    }

    #[test]
    fn validate_minimum_gap_depends_on_parity() {
        // odd modulus may contain 1-gaps
        let c15 = Cycle::from_gaps(FactoredInteger::of(15).unwrap(), &coprime_gaps(15)).unwrap();
        assert!(c15.validate().is_valid());
        // even modulus may not
        let bad = Cycle::from_gaps(FactoredInteger::of(6).unwrap(), &[1, 3, 2]).unwrap();
        let report = bad.validate();
        let min = report.checks.iter().find(|c| c.name == "minimum_gap").unwrap();
        assert!(!min.passed);
    }

    #[test]
    fn width_promotion_on_demand() {
        // synthetic wide cycle: not a real totative cycle, but the collector
        // must carry 300 through a dividing-prime extension unchanged
        let c = Cycle::from_gaps(FactoredInteger::of(4).unwrap(), &[300, 2]).unwrap();
        assert_eq!(c.width(), 2);
        let doubled = c.extend(2).unwrap();
        assert_eq!(doubled.width(), 2);
        assert_eq!(gaps_of(&doubled), vec![300, 2, 300, 2]);
    }

    #[test]
    fn phi_growth_law_under_extension() {
        let c6 = Cycle::base(2).unwrap().extend(3).unwrap();
        // q not dividing: phi multiplies by q-1
        assert_eq!(c6.extend(5).unwrap().len(), c6.len() * 4);
        // q dividing: phi multiplies by q
        assert_eq!(c6.extend(3).unwrap().len(), c6.len() * 3);
    }
}
