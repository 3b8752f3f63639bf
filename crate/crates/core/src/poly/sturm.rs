use num_traits::{One, Signed, Zero};

use super::QPoly;
use crate::exact::{int, Rational};

/// Sturm chain of a square-free polynomial.
#[derive(Clone, Debug)]
pub struct SturmSequence {
    chain: Vec<QPoly>,
}

impl SturmSequence {
    pub fn new(p: &QPoly) -> Self {
        let p = p.square_free();
        let mut chain = vec![p.clone(), p.derivative()];
        while !chain.last().unwrap().is_zero() {
            let n = chain.len();
            let r = chain[n - 2].div_rem(&chain[n - 1]).1.neg();
            chain.push(r);
        }
        chain.pop();
        SturmSequence { chain }
    }

    fn variations_at(&self, x: &Rational) -> usize {
        let signs: Vec<i8> = self
            .chain
            .iter()
            .map(|q| {
                let v = q.eval(x);
                if v.is_zero() {
                    0
                } else if v.is_positive() {
                    1
                } else {
                    -1
                }
            })
            .filter(|&s| s != 0)
            .collect();
        signs.windows(2).filter(|w| w[0] != w[1]).count()
    }

    /// Number of distinct real roots in the half-open interval `(a, b]`.
    pub fn count_in(&self, a: &Rational, b: &Rational) -> usize {
        self.variations_at(a).saturating_sub(self.variations_at(b))
    }
}

/// Every real root of `p` has absolute value strictly below this bound.
pub fn cauchy_bound(p: &QPoly) -> Rational {
    let lead = p.leading().abs();
    let m = p.coeffs()[..p.coeffs().len().saturating_sub(1)]
        .iter()
        .map(|c| c.abs() / &lead)
        .max()
        .unwrap_or_else(Rational::zero);
    m + Rational::one()
}

/// Number of distinct real roots of `p` in `(a, b]`; `p` must be nonzero.
pub fn count_real_roots(p: &QPoly, a: &Rational, b: &Rational) -> usize {
    if p.degree().unwrap_or(0) == 0 {
        return 0;
    }
    SturmSequence::new(p).count_in(a, b)
}

/// Disjoint intervals `(lo, hi]`, each holding exactly one real root of `p`
/// inside `(a, b]`, refined until each has width at most `width`.
pub fn isolate_real_roots(p: &QPoly, a: &Rational, b: &Rational, width: &Rational) -> Vec<(Rational, Rational)> {
    if p.degree().unwrap_or(0) == 0 {
        return Vec::new();
    }
    let s = SturmSequence::new(p);
    let mut out = Vec::new();
    let mut stack = vec![(a.clone(), b.clone())];
    while let Some((lo, hi)) = stack.pop() {
        let n = s.count_in(&lo, &hi);
        if n == 0 {
            continue;
        }
        if n == 1 && &hi - &lo <= *width {
            out.push((lo, hi));
            continue;
        }
        let mid = (&lo + &hi) / int(2);
        stack.push((mid.clone(), hi));
        stack.push((lo, mid));
    }
    out.sort();
    out
}

/// Smallest integer `X` such that `p` has no real root in `[X, inf)`.
pub fn largest_real_root_below(p: &QPoly) -> i64 {
    if p.degree().unwrap_or(0) == 0 {
        return i64::MIN / 4;
    }
    let s = SturmSequence::new(p);
    let bound = cauchy_bound(p).ceil().to_integer();
    let hi = Rational::from_integer(bound.clone());
    let lo = -hi.clone();
    if s.count_in(&lo, &hi) == 0 {
        return i64::MIN / 4;
    }
    // Bisect on integers for the last position that still has a root to its right.
    let (mut l, mut h): (i64, i64) = (
        i64::try_from(-&bound).unwrap_or(i64::MIN / 4) - 1,
        i64::try_from(&bound).unwrap_or(i64::MAX / 4),
    );
    // invariant: roots exist in (l, hi], none in (h, hi]
    while h - l > 1 {
        let m = l + (h - l) / 2;
        if s.count_in(&int(m), &hi) > 0 {
            l = m;
        } else {
            h = m;
        }
    }
    // p may vanish exactly at h
    if p.eval(&int(h)).is_zero() {
        h + 1
    } else {
        h
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rat;

    #[test]
    fn counts_roots() {
        // (x - 1)(x - 2)(x + 3)
        let p = QPoly::from_ints(&[6, -7, 0, 1]);
        assert_eq!(count_real_roots(&p, &int(-10), &int(10)), 3);
        assert_eq!(count_real_roots(&p, &int(0), &int(1)), 1);
        assert_eq!(count_real_roots(&p, &int(1), &int(3)), 1);
        assert_eq!(largest_real_root_below(&p), 3);
    }

    #[test]
    fn isolates_irrational_root() {
        // 2x^2 - 1 has root 1/sqrt(2) in (0, 1)
        let p = QPoly::from_ints(&[-1, 0, 2]);
        let roots = isolate_real_roots(&p, &int(0), &int(1), &rat(1, 1000));
        assert_eq!(roots.len(), 1);
        let (lo, hi) = &roots[0];
        assert!(lo * lo * int(2) < int(1) && hi * hi * int(2) > int(1));
    }

    #[test]
    fn no_real_roots() {
        let p = QPoly::from_ints(&[1, 0, 1]);
        assert_eq!(count_real_roots(&p, &int(-100), &int(100)), 0);
        assert!(largest_real_root_below(&p) < -1000);
    }
}
