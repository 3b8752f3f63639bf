use std::collections::HashMap;
use std::sync::{LazyLock, RwLock};

use num_bigint::BigInt;
use num_traits::{One, Zero};

use super::{int, rat, Rational};

pub fn binomial(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc *= n - i;
        acc /= i + 1;
    }
    acc
}

/// Binomial coefficient for signed arguments; zero outside `0 <= k <= n`.
pub fn binomial_signed(n: i64, k: i64) -> BigInt {
    if n < 0 || k < 0 || k > n {
        return BigInt::zero();
    }
    binomial(n as u64, k as u64)
}

// Prefix tables H_0..H_n per order; readers share, extension takes the write lock.
static HARMONIC: LazyLock<RwLock<HashMap<u32, Vec<Rational>>>> =
    LazyLock::new(|| RwLock::new(HashMap::new()));

/// Generalized harmonic number `H_n^(m) = sum_{0<j<=n} 1/j^m`.
pub fn harmonic(n: u64, m: u32) -> Rational {
    assert!(m >= 1, "harmonic order must be positive");
    let n = n as usize;
    {
        let cache = HARMONIC.read().expect("harmonic cache poisoned");
        if let Some(table) = cache.get(&m) {
            if let Some(h) = table.get(n) {
                return h.clone();
            }
        }
    }
    let mut cache = HARMONIC.write().expect("harmonic cache poisoned");
    let table = cache.entry(m).or_insert_with(|| vec![Rational::zero()]);
    while table.len() <= n {
        let j = table.len() as i64;
        let next = table.last().unwrap() + Rational::new(BigInt::one(), num_traits::pow(BigInt::from(j), m as usize));
        table.push(next);
    }
    table[n].clone()
}

/// `sum_{lo < j <= hi} 1/j^m` without touching the shared tables.
pub fn harmonic_range(lo: u64, hi: u64, m: u32) -> Rational {
    let mut acc = Rational::zero();
    for j in lo + 1..=hi {
        acc += Rational::new(BigInt::one(), num_traits::pow(BigInt::from(j), m as usize));
    }
    acc
}

/// `H(k) = 2 H_{4k} - 3 H_{2k} + H_k`.
pub fn harmonic_gap(k: u64) -> Rational {
    int(2) * harmonic(4 * k, 1) - int(3) * harmonic(2 * k, 1) + harmonic(k, 1)
}

static BERNOULLI: LazyLock<RwLock<Vec<Rational>>> = LazyLock::new(|| RwLock::new(Vec::new()));

// Tangent numbers T_1..T_n (Brent-Harvey, integers only).
fn tangent_numbers(n: usize) -> Vec<BigInt> {
    let mut t = vec![BigInt::zero(); n + 1];
    if n == 0 {
        return t;
    }
    t[1] = BigInt::one();
    for k in 2..=n {
        t[k] = &t[k - 1] * (k as u64 - 1);
    }
    for k in 2..=n {
        for j in k..=n {
            t[j] = &t[j - 1] * (j as u64 - k as u64) + &t[j] * (j as u64 - k as u64 + 2);
        }
    }
    t
}

fn bernoulli_table(n: usize) -> Vec<Rational> {
    let half = n / 2;
    let t = tangent_numbers(half);
    let mut b = vec![Rational::zero(); n + 1];
    b[0] = Rational::one();
    if n >= 1 {
        b[1] = rat(-1, 2);
    }
    for m in 1..=half {
        // B_{2m} = (-1)^{m-1} 2m T_m / (4^m (4^m - 1))
        let four_m = BigInt::one() << (2 * m);
        let den = &four_m * (&four_m - BigInt::one());
        let mut val = Rational::new(&t[m] * (2 * m as u64), den);
        if m % 2 == 0 {
            val = -val;
        }
        b[2 * m] = val;
    }
    b
}

/// Bernoulli number `B_n` with `B_1 = -1/2`.
pub fn bernoulli_number(n: u64) -> Rational {
    let n = n as usize;
    {
        let cache = BERNOULLI.read().expect("bernoulli cache poisoned");
        if let Some(b) = cache.get(n) {
            return b.clone();
        }
    }
    let mut cache = BERNOULLI.write().expect("bernoulli cache poisoned");
    if cache.len() <= n {
        let target = (n + 1).max(2 * cache.len()).max(64);
        *cache = bernoulli_table(target);
    }
    cache[n].clone()
}

/// `B_n(x) = sum_j C(n, j) B_j x^(n-j)`.
pub fn bernoulli_poly(n: u64, x: &Rational) -> Rational {
    let mut acc = Rational::zero();
    let mut xp = Rational::one();
    // accumulate from j = n down to 0 so x^(n-j) grows
    for j in (0..=n).rev() {
        acc += Rational::from_integer(binomial(n, j)) * bernoulli_number(j) * &xp;
        xp *= x;
    }
    acc
}

static EULER: LazyLock<RwLock<Vec<BigInt>>> = LazyLock::new(|| RwLock::new(vec![BigInt::one()]));

/// Euler number `E_n` in the secant convention (`E_2 = -1`, `E_4 = 5`).
pub fn euler_number(n: u64) -> BigInt {
    if n % 2 == 1 {
        return BigInt::zero();
    }
    let half = (n / 2) as usize;
    {
        let cache = EULER.read().expect("euler cache poisoned");
        if let Some(e) = cache.get(half) {
            return e.clone();
        }
    }
    let mut cache = EULER.write().expect("euler cache poisoned");
    // sum_{j=0}^{m} C(2m, 2j) E_{2j} = 0 for m >= 1
    while cache.len() <= half {
        let m = cache.len() as u64;
        let mut s = BigInt::zero();
        for (j, e) in cache.iter().enumerate() {
            s += binomial(2 * m, 2 * j as u64) * e;
        }
        cache.push(-s);
    }
    cache[half].clone()
}

/// Euler polynomial `E_n(x) = sum_k C(n, k) (E_k / 2^k) (x - 1/2)^(n-k)`.
pub fn euler_poly(n: u64, x: &Rational) -> Rational {
    let shifted = x - rat(1, 2);
    let mut acc = Rational::zero();
    let mut sp = Rational::one();
    for k in (0..=n).rev() {
        let ek = euler_number(k);
        if !ek.is_zero() {
            let term = Rational::new(binomial(n, k) * ek, BigInt::one() << k);
            acc += term * &sp;
        }
        sp *= &shifted;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rat;

    fn factorial(n: u64) -> BigInt {
        (1..=n).fold(BigInt::one(), |acc, i| acc * i)
    }

    #[test]
    fn binomial_examples() {
        assert_eq!(binomial(8, 2), BigInt::from(28));
        assert_eq!(binomial(4, 1), BigInt::from(4));
        assert_eq!(binomial(12, 3), factorial(12) / (factorial(3) * factorial(9)));
        assert_eq!(binomial(12, 3), BigInt::from(220));
        assert_eq!(binomial(3, 5), BigInt::zero());
        assert_eq!(binomial_signed(-1, 0), BigInt::zero());
    }

    #[test]
    fn pascal_rule_grid() {
        for n in 1..500u64 {
            for k in 1..500u64 {
                if k > n + 1 {
                    break;
                }
                assert_eq!(binomial(n, k), binomial(n - 1, k - 1) + binomial(n - 1, k));
            }
        }
    }

    #[test]
    fn harmonic_examples() {
        assert_eq!(harmonic(0, 1), Rational::zero());
        assert_eq!(harmonic(3, 1), rat(11, 6));
        let direct: Rational = (1..=4).map(|j| rat(1, j * j)).sum();
        assert_eq!(harmonic(4, 2), direct);
        assert_eq!(harmonic(4, 2), rat(205, 144));
    }

    #[test]
    fn harmonic_increments() {
        for m in 1..=8u32 {
            for n in 1..=2000u64 {
                let d = harmonic(n, m) - harmonic(n - 1, m);
                assert_eq!(d, Rational::new(BigInt::one(), num_traits::pow(BigInt::from(n), m as usize)));
            }
        }
    }

    #[test]
    fn harmonic_gap_examples_and_odd_form() {
        assert_eq!(harmonic_gap(0), Rational::zero());
        assert_eq!(harmonic_gap(1), rat(2, 3));
        // j = 2, 3 in the odd-reciprocal form: 2(1/5 + 1/7)
        assert_eq!(harmonic_gap(2), rat(24, 35));
        // sum_{k <= j < 2k} 1/(2j+1), slid one step at a time
        let recip = |j: u64| Rational::new(BigInt::one(), BigInt::from(j));
        let mut odd = Rational::zero();
        for k in 0..=2000u64 {
            assert_eq!(harmonic_gap(k), &odd * int(2), "k = {k}");
            odd = odd - recip(2 * k + 1) + recip(4 * k + 1) + recip(4 * k + 3);
        }
    }

    #[test]
    fn bernoulli_examples() {
        assert_eq!(bernoulli_number(0), Rational::one());
        assert_eq!(bernoulli_number(1), rat(-1, 2));
        assert_eq!(bernoulli_number(2), rat(1, 6));
        assert_eq!(bernoulli_number(12), rat(-691, 2730));
        assert_eq!(bernoulli_number(13), Rational::zero());
    }

    #[test]
    fn bernoulli_defining_recurrence() {
        for n in 1..=200u64 {
            let s: Rational = (0..=n).map(|j| Rational::from_integer(binomial(n + 1, j)) * bernoulli_number(j)).sum();
            assert!(s.is_zero(), "recurrence fails at n = {n}");
        }
    }

    #[test]
    fn von_staudt_clausen() {
        for n in 1..=100u64 {
            let den = bernoulli_number(2 * n).denom().clone();
            let expected: BigInt = (2..=2 * n + 1)
                .filter(|&p| crate::exact::is_prime(p) && (2 * n) % (p - 1) == 0)
                .fold(BigInt::one(), |acc, p| acc * p);
            assert_eq!(den, expected, "n = {n}");
        }
    }

    #[test]
    fn bernoulli_poly_examples() {
        assert_eq!(bernoulli_poly(1, &Rational::zero()), rat(-1, 2));
        assert_eq!(bernoulli_poly(2, &rat(1, 3)), rat(-1, 18));
        assert_eq!(bernoulli_poly(3, &rat(1, 2)), Rational::zero());
        // B_n(x + 1) - B_n(x) = n x^(n-1)
        let x = rat(2, 7);
        for n in 1..30u64 {
            let d = bernoulli_poly(n, &(&x + int(1))) - bernoulli_poly(n, &x);
            assert_eq!(d, int(n as i64) * num_traits::pow(x.clone(), n as usize - 1));
        }
    }

    #[test]
    fn euler_examples() {
        assert_eq!(euler_number(0), BigInt::one());
        assert_eq!(euler_number(1), BigInt::zero());
        assert_eq!(euler_number(2), BigInt::from(-1));
        assert_eq!(euler_number(4), BigInt::from(5));
        assert_eq!(euler_number(6), BigInt::from(-61));
        assert_eq!(euler_number(8), BigInt::from(1385));
    }

    #[test]
    fn euler_poly_examples() {
        assert_eq!(euler_poly(0, &rat(1, 4)), Rational::one());
        assert_eq!(euler_poly(1, &rat(1, 2)), Rational::zero());
        assert_eq!(euler_poly(2, &rat(1, 4)), rat(-3, 16));
    }

    #[test]
    fn euler_numbers_from_polynomials() {
        for n in 0..=100u64 {
            let via_poly = euler_poly(n, &rat(1, 2)) * Rational::from_integer(BigInt::one() << n);
            assert_eq!(via_poly, Rational::from_integer(euler_number(n)), "n = {n}");
        }
    }

    #[test]
    fn euler_poly_functional_equation() {
        // E_n(x) + E_n(x + 1) = 2 x^n
        let x = rat(-3, 5);
        for n in 0..40u64 {
            let lhs = euler_poly(n, &x) + euler_poly(n, &(&x + int(1)));
            assert_eq!(lhs, int(2) * num_traits::pow(x.clone(), n as usize));
        }
    }

    #[test]
    fn wolstenholme_control() {
        for p in crate::exact::primes_in(5, 97) {
            let v = crate::exact::padic_valuation(&harmonic(p - 1, 1), p);
            assert!(v.at_least(2), "p = {p}, v = {v}");
        }
    }
}
