//! Prime generation, factorization, totients, and the closed-form products
//! used by the asymptotic ratios.
//!
//! Everything here works on small, smooth integers (stage primes and the
//! moduli built from them). There is deliberately no support for
//! cryptographic-size factoring.

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::One;

use crate::error::{Error, Result};

/// All primes `<= bound`, ascending.
pub fn primes_up_to(bound: u64) -> Result<Vec<u64>> {
    if bound < 2 {
        return Err(Error::EmptyRange(bound));
    }
    let n = bound as usize;
    let mut composite = vec![false; n + 1];
    let mut primes = Vec::new();
    for i in 2..=n {
        if !composite[i] {
            primes.push(i as u64);
            let mut m = i * i;
            while m <= n {
                composite[m] = true;
                m += i;
            }
        }
    }
    Ok(primes)
}

/// Trial-division primality test; adequate for stage primes and gap factors.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n % 2 == 0 {
        return n == 2;
    }
    if n % 3 == 0 {
        return n == 3;
    }
    let mut d = 5u64;
    while d.checked_mul(d).is_some_and(|sq| sq <= n) {
        if n % d == 0 || n % (d + 2) == 0 {
            return false;
        }
        d += 6;
    }
    true
}

/// The smallest prime strictly greater than `p`.
pub fn next_prime_after(p: u64) -> u64 {
    let mut n = p + 1;
    loop {
        if is_prime(n) {
            return n;
        }
        n += 1;
    }
}

/// A positive integer carried in factored form: ordered `(prime, exponent)`
/// pairs whose product is the value. The empty list is 1.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FactoredInteger {
    factors: Vec<(u64, u32)>,
}

impl FactoredInteger {
    /// Factorize `n` by trial division. `n = 1` yields the empty list.
    pub fn of(n: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::ZeroFactorization);
        }
        let mut factors = Vec::new();
        let mut rest = n;
        let mut d = 2u64;
        while d.checked_mul(d).is_some_and(|sq| sq <= rest) {
            if rest % d == 0 {
                let mut e = 0u32;
                while rest % d == 0 {
                    rest /= d;
                    e += 1;
                }
                factors.push((d, e));
            }
            d += if d == 2 { 1 } else { 2 };
        }
        if rest > 1 {
            factors.push((rest, 1));
        }
        Ok(FactoredInteger { factors })
    }

    /// Build from explicit factors, validating primality and strict order.
    pub fn from_factors(factors: Vec<(u64, u32)>) -> Result<Self> {
        let mut prev = 0u64;
        for &(p, e) in &factors {
            if !is_prime(p) {
                return Err(Error::NotPrime(p));
            }
            if p <= prev {
                return Err(Error::InvalidArgument(format!(
                    "factor primes must be strictly ascending, got {p} after {prev}"
                )));
            }
            if e == 0 {
                return Err(Error::InvalidArgument(format!(
                    "factor {p} has exponent 0"
                )));
            }
            prev = p;
        }
        Ok(FactoredInteger { factors })
    }

    /// The primorial `p#`: product of all primes `<= p`.
    pub fn primorial(p: u64) -> Result<Self> {
        let primes = primes_up_to(p)?;
        Ok(FactoredInteger {
            factors: primes.into_iter().map(|q| (q, 1)).collect(),
        })
    }

    pub fn one() -> Self {
        FactoredInteger {
            factors: Vec::new(),
        }
    }

    pub fn factors(&self) -> &[(u64, u32)] {
        &self.factors
    }

    pub fn value(&self) -> BigUint {
        let mut v = BigUint::one();
        for &(p, e) in &self.factors {
            v *= BigUint::from(p).pow(e);
        }
        v
    }

    /// The value if it fits a u64.
    pub fn value_u64(&self) -> Option<u64> {
        let mut v = 1u64;
        for &(p, e) in &self.factors {
            for _ in 0..e {
                v = v.checked_mul(p)?;
            }
        }
        Some(v)
    }

    /// Euler's totient via the multiplicative formula over the factors.
    pub fn phi(&self) -> BigUint {
        let mut v = BigUint::one();
        for &(p, e) in &self.factors {
            v *= BigUint::from(p).pow(e - 1) * BigUint::from(p - 1);
        }
        v
    }

    pub fn phi_u64(&self) -> Option<u64> {
        let mut v = 1u64;
        for &(p, e) in &self.factors {
            for _ in 0..e - 1 {
                v = v.checked_mul(p)?;
            }
            v = v.checked_mul(p - 1)?;
        }
        Some(v)
    }

    pub fn contains_prime(&self, q: u64) -> bool {
        self.factors.iter().any(|&(p, _)| p == q)
    }

    pub fn is_even(&self) -> bool {
        self.contains_prime(2)
    }

    pub fn largest_prime(&self) -> Option<u64> {
        self.factors.last().map(|&(p, _)| p)
    }

    /// The modulus multiplied by one more prime `q`.
    pub fn times_prime(&self, q: u64) -> Result<Self> {
        if !is_prime(q) {
            return Err(Error::NotPrime(q));
        }
        let mut factors = self.factors.clone();
        match factors.iter_mut().find(|(p, _)| *p == q) {
            Some((_, e)) => *e += 1,
            None => {
                factors.push((q, 1));
                factors.sort_unstable();
            }
        }
        Ok(FactoredInteger { factors })
    }

    /// `Some(p)` if this is exactly the primorial `p#`.
    pub fn as_primorial(&self) -> Option<u64> {
        let top = self.largest_prime()?;
        let primes = primes_up_to(top).ok()?;
        let expect: Vec<(u64, u32)> = primes.into_iter().map(|q| (q, 1)).collect();
        (self.factors == expect).then_some(top)
    }

    /// Product of the distinct primes dividing the value.
    pub fn radical(&self) -> u64 {
        self.factors.iter().map(|&(p, _)| p).product::<u64>().max(1)
    }

    /// Compact rendering such as `2 3 5 7 11 13` or `2^2 3`.
    pub fn display_factors(&self) -> String {
        if self.factors.is_empty() {
            return "1".to_string();
        }
        self.factors
            .iter()
            .map(|&(p, e)| {
                if e == 1 {
                    p.to_string()
                } else {
                    format!("{p}^{e}")
                }
            })
            .collect::<Vec<_>>()
            .join(" ")
    }
}

impl std::fmt::Display for FactoredInteger {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.display_factors())
    }
}

/// Product of the distinct primes dividing `n`.
pub fn radical(n: u64) -> Result<u64> {
    Ok(FactoredInteger::of(n)?.radical())
}

/// The asymptotic ratio of gaps `g` to gaps 2: the product of
/// `(q-1)/(q-2)` over the distinct odd primes `q` dividing `g`.
///
/// Powers of two give the empty product, 1.
pub fn hl_ratio(g: u64) -> Result<BigRational> {
    if g % 2 != 0 {
        return Err(Error::OddGap(g));
    }
    if g < 2 {
        return Err(Error::GapTooSmall(g));
    }
    let mut r = BigRational::one();
    for &(q, _) in FactoredInteger::of(g)?.factors() {
        if q > 2 {
            r *= BigRational::new(BigUint::from(q - 1).into(), BigUint::from(q - 2).into());
        }
    }
    Ok(r)
}

/// The convergence factor `prod (q-3)/(q-2)` over primes `q` in
/// `[p_from, p_to]`. Defined for `p_from > 3` so every factor is positive.
pub fn convergence_factor(p_from: u64, p_to: u64) -> Result<BigRational> {
    if p_from <= 3 {
        return Err(Error::ConvergenceStart(p_from));
    }
    if p_from > p_to {
        return Err(Error::InvalidArgument(format!(
            "empty prime interval [{p_from}, {p_to}]"
        )));
    }
    let mut r = BigRational::one();
    for q in primes_up_to(p_to)? {
        if q >= p_from {
            r *= BigRational::new(BigUint::from(q - 3).into(), BigUint::from(q - 2).into());
        }
    }
    Ok(r)
}
