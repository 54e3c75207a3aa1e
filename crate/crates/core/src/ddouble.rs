//! Just enough double-double arithmetic to keep oscillating phases `t·log n`
//! accurate when `t` is large.

use std::f64::consts::LN_2;

const LN_2_LO: f64 = 2.319_046_813_846_299_6e-17;
const TWO_PI_HI: f64 = std::f64::consts::TAU;
const TWO_PI_LO: f64 = 2.449_293_598_294_706_4e-16;

#[inline]
pub(crate) fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    (s, err)
}

#[inline]
pub(crate) fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

/// Unevaluated sum `hi + lo` with `|lo| <= ulp(hi)/2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct DoubleDouble {
    pub hi: f64,
    pub lo: f64,
}

impl DoubleDouble {
    pub fn new(hi: f64, lo: f64) -> Self {
        let (hi, lo) = two_sum(hi, lo);
        Self { hi, lo }
    }

    pub fn from_f64(x: f64) -> Self {
        Self { hi: x, lo: 0.0 }
    }

    pub fn add(self, o: Self) -> Self {
        let (s, e) = two_sum(self.hi, o.hi);
        let e = e + self.lo + o.lo;
        Self::new(s, e)
    }

    pub fn mul(self, o: Self) -> Self {
        let (p, e) = two_prod(self.hi, o.hi);
        let e = e + (self.hi * o.lo + self.lo * o.hi);
        Self::new(p, e)
    }

    pub fn mul_f64(self, b: f64) -> Self {
        let (p, e) = two_prod(self.hi, b);
        Self::new(p, e + self.lo * b)
    }

    pub fn div(self, o: Self) -> Self {
        let q1 = self.hi / o.hi;
        let r = self.add(o.mul_f64(-q1));
        let q2 = r.hi / o.hi;
        let r = r.add(o.mul_f64(-q2));
        let q3 = r.hi / o.hi;
        Self::new(q1, q2).add(Self::from_f64(q3))
    }
}

/// Natural logarithm of a positive integer to about 32 significant digits.
///
/// Splits `n = 2^k m` with `m ∈ [1/√2, √2)` and sums `2·atanh((m-1)/(m+1))`.
pub(crate) fn ln_u64(n: u64) -> DoubleDouble {
    debug_assert!(n >= 1);
    if n == 1 {
        return DoubleDouble::from_f64(0.0);
    }
    // n < 2^53 is exact in f64; larger n lose low bits, which no caller needs.
    let x = n as f64;
    let mut k = x.log2().floor() as i32;
    let mut m = x / 2f64.powi(k);
    if m > std::f64::consts::SQRT_2 {
        m /= 2.0;
        k += 1;
    }
    let num = DoubleDouble::new(m, -1.0);
    let den = DoubleDouble::new(m, 1.0);
    let z = num.div(den);
    let z2 = z.mul(z);
    let mut term = z;
    let mut acc = z;
    for j in 1..64 {
        term = term.mul(z2);
        let contrib = term.div(DoubleDouble::from_f64((2 * j + 1) as f64));
        acc = acc.add(contrib);
        if contrib.hi.abs() < 1e-34 * acc.hi.abs().max(1e-300) {
            break;
        }
    }
    let ln2 = DoubleDouble::new(LN_2, LN_2_LO);
    ln2.mul_f64(k as f64).add(acc.mul_f64(2.0))
}

/// `t·(l_hi + l_lo)` reduced into `[-π, π]`.
///
/// The product is formed exactly and the reduction uses a two-part `2π`, so
/// the only error left is the one already present in `l_hi + l_lo`.
/// The result is odd in `t` bit for bit.
#[inline]
pub(crate) fn reduced_angle(t: f64, l_hi: f64, l_lo: f64) -> f64 {
    let (p, pe) = two_prod(t, l_hi);
    let pe = pe + t * l_lo;
    let k = (p / TWO_PI_HI).round();
    if k == 0.0 {
        return p + pe;
    }
    let (a, ae) = two_prod(k, TWO_PI_HI);
    let r = p - a;
    r + (pe - ae - k * TWO_PI_LO)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ln_matches_libm_to_an_ulp() {
        for n in [2u64, 3, 10, 97, 1000, 123_456_789, 1 << 40] {
            let l = ln_u64(n);
            let f = (n as f64).ln();
            assert!((l.hi - f).abs() <= f * 2.3e-16, "n={n}");
        }
    }

    #[test]
    fn ln_is_additive_beyond_double_precision() {
        for (a, b) in [(3u64, 7u64), (97, 1009), (65_537, 1_000_003)] {
            let lhs = ln_u64(a * b);
            let rhs = ln_u64(a).add(ln_u64(b));
            let diff = (lhs.hi - rhs.hi) + (lhs.lo - rhs.lo);
            assert!(diff.abs() < 1e-29, "{a}*{b}: {diff:e}");
        }
    }

    #[test]
    fn ln2_split_is_consistent() {
        let l = ln_u64(2);
        assert_eq!(l.hi, LN_2);
        assert!((l.lo - LN_2_LO).abs() < 1e-31);
    }

    #[test]
    fn reduced_angle_is_odd_and_small() {
        for &t in &[0.3, 1234.5, 9.87e5, 3.3e7] {
            let l = 13.815_510_557_964_274;
            let a = reduced_angle(t, l, 0.0);
            let b = reduced_angle(-t, l, 0.0);
            assert_eq!(a, -b);
            assert!(a.abs() <= std::f64::consts::PI + 1e-12);
            let naive = (t * l).sin();
            assert!((a.sin() - naive).abs() < 1e-7);
        }
    }
}
