//! Exact non-negative rational weights.

use std::cmp::Ordering;
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Mul};
use std::str::FromStr;

use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{CheckedAdd, CheckedMul, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WeightError {
    #[error("weight must be non-negative, got {0:?}")]
    Negative(String),
    #[error("malformed weight {0:?} (expected a decimal like \"1.25\" or a fraction like \"5/4\")")]
    Malformed(String),
    #[error("weight {0:?} is out of the representable range")]
    OutOfRange(String),
    #[error("zero denominator")]
    ZeroDenominator,
}

/// A packet value held as a reduced fraction `numer / denom` with
/// `numer >= 0` and `denom >= 1`.
///
/// Arithmetic never rounds. Operations that would overflow the 128-bit
/// representation panic instead of wrapping.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Weight(Ratio<i128>);

impl Weight {
    pub const ZERO: Weight = Weight(Ratio::new_raw(0, 1));
    pub const ONE: Weight = Weight(Ratio::new_raw(1, 1));

    pub fn new(numer: i128, denom: i128) -> Result<Self, WeightError> {
        if denom == 0 {
            return Err(WeightError::ZeroDenominator);
        }
        let r = Ratio::new(numer, denom);
        if *r.numer() < 0 {
            return Err(WeightError::Negative(format!("{numer}/{denom}")));
        }
        Ok(Weight(r))
    }

    pub fn from_integer(n: u64) -> Self {
        Weight(Ratio::from_integer(n as i128))
    }

    pub fn numer(&self) -> i128 {
        *self.0.numer()
    }

    pub fn denom(&self) -> i128 {
        *self.0.denom()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn as_ratio(&self) -> Ratio<i128> {
        self.0
    }

    pub fn checked_add(&self, other: &Weight) -> Option<Weight> {
        self.0.checked_add(&other.0).map(Weight)
    }

    pub fn checked_mul(&self, other: &Weight) -> Option<Weight> {
        self.0.checked_mul(&other.0).map(Weight)
    }

    /// `self / other`; `None` when `other` is zero or on overflow.
    pub fn checked_div(&self, other: &Weight) -> Option<Weight> {
        if other.is_zero() {
            return None;
        }
        let inv = Ratio::new_raw(other.denom(), other.numer());
        self.0.checked_mul(&inv).map(Weight)
    }

    /// `self - other` when the result is non-negative.
    pub fn checked_sub(&self, other: &Weight) -> Option<Weight> {
        if *self < *other {
            return None;
        }
        num_traits::CheckedSub::checked_sub(&self.0, &other.0).map(Weight)
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    /// True when the reduced denominator divides some power of ten, i.e. the
    /// value has a terminating decimal expansion.
    pub fn is_terminating_decimal(&self) -> bool {
        let mut d = self.denom();
        while d % 2 == 0 {
            d /= 2;
        }
        while d % 5 == 0 {
            d /= 5;
        }
        d == 1
    }

    /// Exact decimal rendering, or `None` if the expansion does not terminate.
    pub fn to_decimal_string(&self) -> Option<String> {
        if !self.is_terminating_decimal() {
            return None;
        }
        let (mut twos, mut fives) = (0u32, 0u32);
        let mut d = self.denom();
        while d % 2 == 0 {
            d /= 2;
            twos += 1;
        }
        while d % 5 == 0 {
            d /= 5;
            fives += 1;
        }
        let digits = twos.max(fives);
        if digits == 0 {
            return Some(self.numer().to_string());
        }
        let scale = 10i128.checked_pow(digits)?;
        let scaled = self.numer().checked_mul(scale / self.denom())?;
        let int_part = scaled / scale;
        let frac_part = scaled % scale;
        let mut frac = format!("{:0width$}", frac_part, width = digits as usize);
        while frac.ends_with('0') {
            frac.pop();
        }
        if frac.is_empty() {
            Some(int_part.to_string())
        } else {
            Some(format!("{int_part}.{frac}"))
        }
    }

    /// `numer/denom` form, `numer` alone for integers.
    pub fn to_fraction_string(&self) -> String {
        if self.denom() == 1 {
            self.numer().to_string()
        } else {
            format!("{}/{}", self.numer(), self.denom())
        }
    }
}

fn parse_unsigned_decimal(s: &str) -> Result<Weight, WeightError> {
    let (int_part, frac_part) = match s.split_once('.') {
        Some((i, f)) => (i, f),
        None => (s, ""),
    };
    let all_digits = |t: &str| t.bytes().all(|b| b.is_ascii_digit());
    if int_part.is_empty() || !all_digits(int_part) || !all_digits(frac_part) {
        return Err(WeightError::Malformed(s.to_string()));
    }
    if s.contains('.') && frac_part.is_empty() {
        return Err(WeightError::Malformed(s.to_string()));
    }
    let out_of_range = || WeightError::OutOfRange(s.to_string());
    let digits = format!("{int_part}{frac_part}");
    let numer: i128 = digits.parse().map_err(|_| out_of_range())?;
    let denom = 10i128
        .checked_pow(frac_part.len() as u32)
        .ok_or_else(out_of_range)?;
    Weight::new(numer, denom)
}

impl FromStr for Weight {
    type Err = WeightError;

    /// Accepts `"3"`, `"1.25"` or `"5/4"`. Decimal input is converted
    /// exactly (denominator a power of ten, then reduced).
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.starts_with('-') {
            return Err(WeightError::Negative(s.to_string()));
        }
        if let Some((n, d)) = s.split_once('/') {
            let n = n.trim();
            let d = d.trim();
            let ok = |t: &str| !t.is_empty() && t.bytes().all(|b| b.is_ascii_digit());
            if !ok(n) || !ok(d) {
                return Err(WeightError::Malformed(s.to_string()));
            }
            let numer: i128 = n.parse().map_err(|_| WeightError::OutOfRange(s.to_string()))?;
            let denom: i128 = d.parse().map_err(|_| WeightError::OutOfRange(s.to_string()))?;
            return Weight::new(numer, denom);
        }
        parse_unsigned_decimal(s)
    }
}

impl fmt::Display for Weight {
    /// Decimal when the expansion terminates, `numer/denom` otherwise.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.to_decimal_string() {
            Some(s) => f.write_str(&s),
            None => f.write_str(&self.to_fraction_string()),
        }
    }
}

impl fmt::Debug for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Weight({})", self.to_fraction_string())
    }
}

impl Ord for Weight {
    fn cmp(&self, other: &Self) -> Ordering {
        let (a, b) = (self.denom(), other.denom());
        if a == b {
            return self.numer().cmp(&other.numer());
        }
        // Cross-multiplication is the hot path inside OPS sorting.
        match (self.numer().checked_mul(b), other.numer().checked_mul(a)) {
            (Some(x), Some(y)) => x.cmp(&y),
            _ => self.0.cmp(&other.0),
        }
    }
}

impl PartialOrd for Weight {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Add for Weight {
    type Output = Weight;

    fn add(self, rhs: Weight) -> Weight {
        self.checked_add(&rhs)
            .unwrap_or_else(|| panic!("weight overflow adding {self:?} and {rhs:?}"))
    }
}

impl AddAssign for Weight {
    fn add_assign(&mut self, rhs: Weight) {
        *self = *self + rhs;
    }
}

impl Mul for Weight {
    type Output = Weight;

    fn mul(self, rhs: Weight) -> Weight {
        self.checked_mul(&rhs)
            .unwrap_or_else(|| panic!("weight overflow multiplying {self:?} and {rhs:?}"))
    }
}

impl Sum for Weight {
    fn sum<I: Iterator<Item = Weight>>(iter: I) -> Weight {
        iter.fold(Weight::ZERO, |acc, w| acc + w)
    }
}

impl<'a> Sum<&'a Weight> for Weight {
    fn sum<I: Iterator<Item = &'a Weight>>(iter: I) -> Weight {
        iter.fold(Weight::ZERO, |acc, w| acc + *w)
    }
}

impl Serialize for Weight {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Weight {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Ratio `a / b` of two weights as an exact reduced fraction; `None` if `b` is zero.
pub fn exact_ratio(a: Weight, b: Weight) -> Option<Ratio<i128>> {
    if b.is_zero() {
        return None;
    }
    let n = a.numer().checked_mul(b.denom())?;
    let d = a.denom().checked_mul(b.numer())?;
    let g = n.gcd(&d);
    Some(Ratio::new_raw(n / g, d / g))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn w(s: &str) -> Weight {
        s.parse().unwrap()
    }

    #[test]
    fn parses_decimal_exactly() {
        assert_eq!(w("1.5"), Weight::new(3, 2).unwrap());
        assert_eq!(w("0.25"), Weight::new(1, 4).unwrap());
        assert_eq!(w("1000.1"), Weight::new(10001, 10).unwrap());
        assert_eq!(w("7"), Weight::from_integer(7));
        assert_eq!(w("5/4"), Weight::new(5, 4).unwrap());
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!("-1".parse::<Weight>(), Err(WeightError::Negative(_))));
        assert!(matches!("1.".parse::<Weight>(), Err(WeightError::Malformed(_))));
        assert!(matches!("abc".parse::<Weight>(), Err(WeightError::Malformed(_))));
        assert!(matches!("1e3".parse::<Weight>(), Err(WeightError::Malformed(_))));
        assert!(matches!("3/0".parse::<Weight>(), Err(WeightError::ZeroDenominator)));
    }

    #[test]
    fn display_prefers_decimal() {
        assert_eq!(Weight::new(3, 2).unwrap().to_string(), "1.5");
        assert_eq!(Weight::new(176, 25).unwrap().to_string(), "7.04");
        assert_eq!(Weight::new(1, 3).unwrap().to_string(), "1/3");
        assert_eq!(Weight::from_integer(8).to_string(), "8");
    }

    #[test]
    fn sums_are_exact() {
        let empty: Vec<Weight> = vec![];
        assert_eq!(empty.iter().sum::<Weight>(), Weight::ZERO);
        assert_eq!(w("1.5") + w("0.5"), Weight::from_integer(2));
        assert_eq!(w("1") + w("1") + w("1.01"), Weight::new(301, 100).unwrap());
    }

    #[test]
    fn ordering_matches_rational_order() {
        assert!(w("0.3") < w("1/3"));
        assert!(w("2/3") > w("0.6666"));
        assert_eq!(w("0.50").cmp(&w("1/2")), Ordering::Equal);
    }

    proptest! {
        #[test]
        fn decimal_round_trip(n in 0i64..10_000_000, digits in 0u32..9) {
            let x = Weight::new(n as i128, 10i128.pow(digits)).unwrap();
            let back: Weight = x.to_string().parse().unwrap();
            prop_assert_eq!(back, x);
        }

        #[test]
        fn cmp_agrees_with_ratio(a in 0i64..1000, b in 1i64..1000, c in 0i64..1000, d in 1i64..1000) {
            let x = Weight::new(a as i128, b as i128).unwrap();
            let y = Weight::new(c as i128, d as i128).unwrap();
            prop_assert_eq!(x.cmp(&y), x.as_ratio().cmp(&y.as_ratio()));
        }
    }
}
