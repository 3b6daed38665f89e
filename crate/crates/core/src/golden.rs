//! Exact arithmetic in Q(√5), the field containing the golden ratio.
//!
//! Guards such as `w_e >= w_h / φ` and draws such as `β <= 1/φ²` are decided
//! by sign tests on `a + b·√5` with rational `a`, `b`, so no floating point
//! enters any scheduling decision.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::weight::Weight;

/// `rational + irrational·√5`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct GoldenNumber {
    rational: BigRational,
    irrational: BigRational,
}

fn big(r: i128) -> BigRational {
    BigRational::from_integer(BigInt::from(r))
}

fn half() -> BigRational {
    BigRational::new(BigInt::from(1), BigInt::from(2))
}

impl GoldenNumber {
    pub fn new(rational: BigRational, irrational: BigRational) -> Self {
        GoldenNumber { rational, irrational }
    }

    pub fn zero() -> Self {
        GoldenNumber::new(BigRational::zero(), BigRational::zero())
    }

    pub fn one() -> Self {
        GoldenNumber::new(BigRational::one(), BigRational::zero())
    }

    /// φ = (1 + √5) / 2
    pub fn phi() -> Self {
        GoldenNumber::new(half(), half())
    }

    /// 1/φ = (√5 − 1) / 2
    pub fn inv_phi() -> Self {
        GoldenNumber::new(-half(), half())
    }

    /// 1/φ² = (3 − √5) / 2
    pub fn inv_phi_squared() -> Self {
        GoldenNumber::new(big(3) * half(), -half())
    }

    /// φ² = (3 + √5) / 2
    pub fn phi_squared() -> Self {
        GoldenNumber::new(big(3) * half(), half())
    }

    pub fn from_weight(w: Weight) -> Self {
        GoldenNumber::new(
            BigRational::new(BigInt::from(w.numer()), BigInt::from(w.denom())),
            BigRational::zero(),
        )
    }

    /// The dyadic rational `bits / 2^64`.
    pub fn from_dyadic64(bits: u64) -> Self {
        let denom = BigInt::one() << 64u32;
        GoldenNumber::new(BigRational::new(BigInt::from(bits), denom), BigRational::zero())
    }

    pub fn is_rational(&self) -> bool {
        self.irrational.is_zero()
    }

    /// The value as a weight when it is a non-negative rational that fits.
    pub fn to_weight(&self) -> Option<Weight> {
        if !self.is_rational() || self.rational.is_negative() {
            return None;
        }
        let n = self.rational.numer().to_i128()?;
        let d = self.rational.denom().to_i128()?;
        Weight::new(n, d).ok()
    }

    pub fn signum(&self) -> Ordering {
        let a = &self.rational;
        let b = &self.irrational;
        let sa = a.cmp(&BigRational::zero());
        let sb = b.cmp(&BigRational::zero());
        match (sa, sb) {
            (Ordering::Equal, s) | (s, Ordering::Equal) => s,
            (s, t) if s == t => s,
            // Opposite signs: compare a² with 5·b².
            (sa, _) => {
                let a2 = a * a;
                let b2 = b * b * big(5);
                match a2.cmp(&b2) {
                    Ordering::Greater => sa,
                    Ordering::Less => sa.reverse(),
                    // a² = 5b² with a, b ≠ 0 has no rational solution.
                    Ordering::Equal => unreachable!("√5 is irrational"),
                }
            }
        }
    }

    pub fn to_f64(&self) -> f64 {
        let a = self.rational.to_f64().unwrap_or(f64::NAN);
        let b = self.irrational.to_f64().unwrap_or(f64::NAN);
        a + b * 5f64.sqrt()
    }
}

/// Decides `factor * x >= y` for weights `x`, `y`. Small factors such as
/// φ or 2 are handled in `i128`; anything that overflows falls back to
/// big rationals.
#[derive(Debug, Clone)]
pub struct Scaler {
    factor: GoldenNumber,
    // factor = (p + q·√5) / r with r > 0
    small: Option<(i128, i128, i128)>,
}

impl Scaler {
    pub fn new(factor: GoldenNumber) -> Self {
        let small = (|| {
            let r = factor.rational.denom().to_i128()?.checked_mul(factor.irrational.denom().to_i128()?)?;
            let p = factor.rational.numer().to_i128()?.checked_mul(factor.irrational.denom().to_i128()?)?;
            let q = factor.irrational.numer().to_i128()?.checked_mul(factor.rational.denom().to_i128()?)?;
            Some((p, q, r))
        })();
        Scaler { factor, small }
    }

    pub fn factor(&self) -> &GoldenNumber {
        &self.factor
    }

    pub fn scaled_ge(&self, x: Weight, y: Weight) -> bool {
        if let Some(ge) = self.small.and_then(|(p, q, r)| small_scaled_ge(p, q, r, x, y)) {
            return ge;
        }
        &GoldenNumber::from_weight(x) * &self.factor >= GoldenNumber::from_weight(y)
    }
}

fn small_scaled_ge(p: i128, q: i128, r: i128, x: Weight, y: Weight) -> Option<bool> {
    // (p + q√5)·xn·yd >= r·yn·xd  <=>  a + b√5 >= 0
    let xy = x.numer().checked_mul(y.denom())?;
    let a = p.checked_mul(xy)?.checked_sub(r.checked_mul(y.numer())?.checked_mul(x.denom())?)?;
    let b = q.checked_mul(xy)?;
    let sign = match (a.signum(), b.signum()) {
        (0, s) | (s, 0) => s,
        (s, t) if s == t => s,
        (s, _) => {
            let a2 = a.checked_mul(a)?;
            let b2 = b.checked_mul(b)?.checked_mul(5)?;
            if a2 > b2 { s } else { -s }
        }
    };
    Some(sign >= 0)
}

impl Add for &GoldenNumber {
    type Output = GoldenNumber;
    fn add(self, rhs: &GoldenNumber) -> GoldenNumber {
        GoldenNumber::new(&self.rational + &rhs.rational, &self.irrational + &rhs.irrational)
    }
}

impl Sub for &GoldenNumber {
    type Output = GoldenNumber;
    fn sub(self, rhs: &GoldenNumber) -> GoldenNumber {
        GoldenNumber::new(&self.rational - &rhs.rational, &self.irrational - &rhs.irrational)
    }
}

impl Mul for &GoldenNumber {
    type Output = GoldenNumber;
    fn mul(self, rhs: &GoldenNumber) -> GoldenNumber {
        let (a, b) = (&self.rational, &self.irrational);
        let (c, d) = (&rhs.rational, &rhs.irrational);
        GoldenNumber::new(a * c + b * d * big(5), a * d + b * c)
    }
}

impl Neg for &GoldenNumber {
    type Output = GoldenNumber;
    fn neg(self) -> GoldenNumber {
        GoldenNumber::new(-&self.rational, -&self.irrational)
    }
}

impl Ord for GoldenNumber {
    fn cmp(&self, other: &Self) -> Ordering {
        (self - other).signum()
    }
}

impl PartialOrd for GoldenNumber {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for GoldenNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if *self == GoldenNumber::phi() {
            return f.write_str("phi");
        }
        if *self == GoldenNumber::inv_phi_squared() {
            return f.write_str("1/phi^2");
        }
        if *self == GoldenNumber::inv_phi() {
            return f.write_str("1/phi");
        }
        if *self == GoldenNumber::phi_squared() {
            return f.write_str("phi^2");
        }
        if let Some(w) = self.to_weight() {
            return write!(f, "{w}");
        }
        write!(f, "{} + {}*sqrt5", self.rational, self.irrational)
    }
}

impl fmt::Debug for GoldenNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GoldenNumber({} + {}√5 ≈ {})", self.rational, self.irrational, self.to_f64())
    }
}

impl FromStr for GoldenNumber {
    type Err = String;

    /// Accepts `phi`, `1/phi`, `phi^2`, `1/phi^2` or any weight literal.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "phi" | "φ" => Ok(GoldenNumber::phi()),
            "1/phi" => Ok(GoldenNumber::inv_phi()),
            "phi^2" | "phi2" => Ok(GoldenNumber::phi_squared()),
            "1/phi^2" | "1/phi2" => Ok(GoldenNumber::inv_phi_squared()),
            other => other
                .parse::<Weight>()
                .map(GoldenNumber::from_weight)
                .map_err(|e| e.to_string()),
        }
    }
}
