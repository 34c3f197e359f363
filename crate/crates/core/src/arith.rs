//! Integer helpers: primality, modular inverses, and multinomial
//! coefficients reduced modulo a prime.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive};

/// Deterministic trial division. Adequate for the prime sizes used here.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n < 4 {
        return true;
    }
    if n.is_multiple_of(2) {
        return false;
    }
    let mut d = 3u64;
    while d.saturating_mul(d) <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

/// `a * b mod m` without overflow.
#[inline]
pub fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Inverse of `a` modulo the prime `p`, or `None` when `p | a`.
pub fn inv_mod(a: u64, p: u64) -> Option<u64> {
    let a = a % p;
    if a == 0 {
        None
    } else {
        Some(pow_mod(a, p - 2, p))
    }
}

/// Reduces an arbitrary-precision integer into `[0, p)`.
pub fn bigint_mod(x: &BigInt, p: u64) -> u64 {
    let r = x.mod_floor(&BigInt::from(p));
    r.to_u64().expect("residue fits in u64")
}

/// `p^e`, or `None` on overflow.
pub fn checked_prime_power(p: u64, e: u32) -> Option<u64> {
    p.checked_pow(e)
}

/// Exponent of `p` in `n!` (Legendre's formula).
pub fn legendre_valuation(n: u64, p: u64) -> u64 {
    let mut v = 0;
    let mut m = n / p;
    while m > 0 {
        v += m;
        m /= p;
    }
    v
}

/// Factorials `0!, ..., (p-1)!` modulo `p`.
#[derive(Debug, Clone)]
pub struct FactorialTable {
    p: u64,
    fact: Vec<u64>,
}

impl FactorialTable {
    pub fn new(p: u64) -> Self {
        assert!(is_prime(p), "factorial table needs a prime modulus, got {p}");
        let mut fact = Vec::with_capacity(p as usize);
        let mut acc = 1u64;
        fact.push(1);
        for i in 1..p {
            acc = mul_mod(acc, i, p);
            fact.push(acc);
        }
        FactorialTable { p, fact }
    }

    pub fn prime(&self) -> u64 {
        self.p
    }

    /// The unit part of `n!`, i.e. `n! / p^{v_p(n!)}` modulo `p`.
    pub fn unit_factorial(&self, n: u64) -> u64 {
        let p = self.p;
        let mut acc = 1u64;
        let mut m = n;
        while m > 0 {
            acc = mul_mod(acc, self.fact[(m % p) as usize], p);
            // Wilson: (p-1)! = -1, one factor per full block of p.
            if (m / p) % 2 == 1 {
                acc = (p - acc) % p;
            }
            m /= p;
        }
        acc
    }

    /// Multinomial `(Σ parts)! / Π parts!` modulo `p`.
    pub fn multinomial(&self, parts: &[u64]) -> u64 {
        let p = self.p;
        let total: u64 = parts.iter().sum();
        let v_top = legendre_valuation(total, p);
        let v_bottom: u64 = parts.iter().map(|&k| legendre_valuation(k, p)).sum();
        if v_top > v_bottom {
            return 0;
        }
        let mut denom = 1u64;
        for &k in parts {
            denom = mul_mod(denom, self.unit_factorial(k), p);
        }
        let inv = inv_mod(denom, p).expect("unit part is invertible");
        mul_mod(self.unit_factorial(total), inv, p)
    }
}

pub fn lcm_u64(a: u64, b: u64) -> u64 {
    a / a.gcd(&b) * b
}

/// Least common multiple of the reduced denominators of `values`.
pub fn lcm_of_denominators(values: &[BigRational]) -> BigInt {
    values
        .iter()
        .fold(BigInt::one(), |acc, v| acc.lcm(&v.denom().abs()))
}

/// `⌈x⌉` for an exact rational.
pub fn ceil_rational(x: &BigRational) -> BigInt {
    x.ceil().to_integer()
}
