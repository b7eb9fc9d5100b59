//! Roots of unity as elements of Q/Z, signs, Jacobi symbols and quadratic
//! Gauss sums.
//!
//! Every character value in the crate lives in [`Rot`]: the root of unity
//! `exp(2πi·num/den)` is stored as the fraction `num/den` reduced mod 1.
//! Signs are `0` and `1/2`, fourth roots of unity are multiples of `1/4`.

use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Neg, Sub};
use std::str::FromStr;

use num_integer::Integer;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ArithError {
    #[error("not a unit: gcd({0}, {1}) != 1")]
    NotUnit(u64, u64),
    #[error("{0} is not a prime power")]
    NotPrimePower(u64),
    #[error("residue characteristic two unsupported for Gauss sums")]
    CharTwo,
    #[error("cannot parse root of unity from {0:?}")]
    Parse(String),
}

/// A root of unity, written additively as an element of Q/Z.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Rot {
    num: u64,
    den: u64,
}

impl Rot {
    pub const ONE: Rot = Rot { num: 0, den: 1 };
    pub const MINUS_ONE: Rot = Rot { num: 1, den: 2 };
    pub const I: Rot = Rot { num: 1, den: 4 };

    /// `num/den` reduced into `[0, 1)`.
    pub fn new(num: i128, den: u64) -> Rot {
        assert!(den >= 1, "zero denominator");
        let d = den as i128;
        let n = num.rem_euclid(d);
        let g = n.gcd(&d).max(1);
        Rot { num: (n / g) as u64, den: (den as i128 / g) as u64 }
    }

    pub fn num(self) -> u64 {
        self.num
    }

    pub fn den(self) -> u64 {
        self.den
    }

    /// The order of the root of unity.
    pub fn order(self) -> u64 {
        self.den
    }

    pub fn is_one(self) -> bool {
        self.num == 0
    }

    /// `self^n`, written `n·self` in Q/Z.
    pub fn pow(self, n: i128) -> Rot {
        let d = self.den as i128;
        Rot::new((self.num as i128 * n.rem_euclid(d)) % d, self.den)
    }

    /// `Some(±1)` if this is a sign.
    pub fn as_sign(self) -> Option<Sign> {
        match (self.num, self.den) {
            (0, 1) => Some(Sign::Plus),
            (1, 2) => Some(Sign::Minus),
            _ => None,
        }
    }
}

impl Default for Rot {
    fn default() -> Self {
        Rot::ONE
    }
}

impl Add for Rot {
    type Output = Rot;
    fn add(self, rhs: Rot) -> Rot {
        let l = self.den.lcm(&rhs.den) as u128;
        let a = self.num as u128 * (l / self.den as u128);
        let b = rhs.num as u128 * (l / rhs.den as u128);
        let n = (a + b) % l;
        Rot::new(n as i128, l as u64)
    }
}

impl AddAssign for Rot {
    fn add_assign(&mut self, rhs: Rot) {
        *self = *self + rhs;
    }
}

impl Neg for Rot {
    type Output = Rot;
    fn neg(self) -> Rot {
        Rot::new(-(self.num as i128), self.den)
    }
}

impl Sub for Rot {
    type Output = Rot;
    fn sub(self, rhs: Rot) -> Rot {
        self + (-rhs)
    }
}

impl Sum for Rot {
    fn sum<I: Iterator<Item = Rot>>(iter: I) -> Rot {
        iter.fold(Rot::ONE, Add::add)
    }
}

impl fmt::Display for Rot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

impl fmt::Debug for Rot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Rot({}/{})", self.num, self.den)
    }
}

impl FromStr for Rot {
    type Err = ArithError;
    fn from_str(s: &str) -> Result<Rot, ArithError> {
        let err = || ArithError::Parse(s.to_string());
        let (n, d) = s.split_once('/').ok_or_else(err)?;
        let n: i128 = n.trim().parse().map_err(|_| err())?;
        let d: u64 = d.trim().parse().map_err(|_| err())?;
        if d == 0 {
            return Err(err());
        }
        Ok(Rot::new(n, d))
    }
}

impl Serialize for Rot {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Rot {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Rot, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Copy, Default, PartialEq, Eq, Hash, Debug, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Sign {
    #[default]
    Plus,
    Minus,
}

impl Sign {
    /// `(-1)^n`.
    pub fn parity(n: i128) -> Sign {
        if n.rem_euclid(2) == 0 {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }

    pub fn is_minus(self) -> bool {
        self == Sign::Minus
    }

    pub fn rot(self) -> Rot {
        match self {
            Sign::Plus => Rot::ONE,
            Sign::Minus => Rot::MINUS_ONE,
        }
    }

    pub fn pow(self, n: i128) -> Sign {
        match self {
            Sign::Plus => Sign::Plus,
            Sign::Minus => Sign::parity(n),
        }
    }

    pub fn as_i8(self) -> i8 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }
}

impl std::ops::Mul for Sign {
    type Output = Sign;
    fn mul(self, rhs: Sign) -> Sign {
        if self == rhs {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }
}

impl std::iter::Product for Sign {
    fn product<I: Iterator<Item = Sign>>(iter: I) -> Sign {
        iter.fold(Sign::Plus, |a, b| a * b)
    }
}

impl From<Sign> for Rot {
    fn from(s: Sign) -> Rot {
        s.rot()
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sign::Plus => "+1",
            Sign::Minus => "-1",
        })
    }
}

/// A cyclic group `Z/order` with elements written as exponents.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct CyclicGrp {
    pub order: u64,
}

/// A quadratic space over a finite field, up to isometry.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct QuadForm {
    pub dim: u64,
    pub det_class: Sign,
}

impl QuadForm {
    pub fn new(dim: u64, det_class: Sign) -> QuadForm {
        assert!(dim > 0 || det_class == Sign::Plus, "empty form has square determinant");
        QuadForm { dim, det_class }
    }
}

// ---------------------------------------------------------------------------
// integer helpers

pub fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut r = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = mul_mod(r, b, m);
        }
        b = mul_mod(b, b, m);
        e >>= 1;
    }
    r
}

/// Inverse of `a` modulo `m`, if it exists.
pub fn mod_inverse(a: u64, m: u64) -> Option<u64> {
    let g = (a as i128).extended_gcd(&(m as i128));
    (g.gcd == 1).then(|| g.x.rem_euclid(m as i128) as u64)
}

/// `q^n`, or `None` on overflow.
pub fn checked_pow(q: u64, n: u64) -> Option<u64> {
    let n = u32::try_from(n).ok()?;
    q.checked_pow(n)
}

/// 2-adic valuation; `v2(0)` is reported as 64.
pub fn v2(n: u64) -> u32 {
    if n == 0 {
        64
    } else {
        n.trailing_zeros()
    }
}

pub fn divisors(n: u64) -> Vec<u64> {
    let mut small = Vec::new();
    let mut large = Vec::new();
    let mut d = 1;
    while d * d <= n {
        if n % d == 0 {
            small.push(d);
            if d * d != n {
                large.push(n / d);
            }
        }
        d += 1;
    }
    small.extend(large.into_iter().rev());
    small
}

pub fn euler_phi(mut n: u64) -> u64 {
    let mut r = n;
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            while n % p == 0 {
                n /= p;
            }
            r -= r / p;
        }
        p += 1;
    }
    if n > 1 {
        r -= r / n;
    }
    r
}

pub fn is_prime(n: u64) -> bool {
    n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| n % d != 0)
}

/// `(p, m)` with `q = p^m`.
pub fn prime_power(q: u64) -> Result<(u64, u32), ArithError> {
    if q < 2 {
        return Err(ArithError::NotPrimePower(q));
    }
    let p = (2..=q).find(|d| q % d == 0).unwrap();
    let mut m = 0;
    let mut r = q;
    while r % p == 0 {
        r /= p;
        m += 1;
    }
    if r == 1 {
        Ok((p, m))
    } else {
        Err(ArithError::NotPrimePower(q))
    }
}

// ---------------------------------------------------------------------------
// orders and symbols

/// Multiplicative order of `q` modulo `d`.
pub fn mult_order(q: u64, d: u64) -> Result<u64, ArithError> {
    assert!(d >= 1);
    if d == 1 {
        return Ok(1);
    }
    if q.gcd(&d) != 1 {
        return Err(ArithError::NotUnit(q, d));
    }
    // The order divides phi(d); take the smallest divisor that works.
    let phi = euler_phi(d);
    Ok(divisors(phi).into_iter().find(|&t| pow_mod(q, t, d) == 1).unwrap())
}

/// Whether the element with exponent `x_exp` is a square in `H`.
pub fn jacobi_cyclic(x_exp: i128, h: CyclicGrp) -> Sign {
    if h.order % 2 == 1 || x_exp.rem_euclid(h.order as i128) % 2 == 0 {
        Sign::Plus
    } else {
        Sign::Minus
    }
}

/// Sign of the permutation "multiply by `x`" on the field with `q_g`
/// elements, `x` given by its discrete logarithm.
pub fn sgn_mult(x_dlog: i128, q_g: u64) -> Result<Sign, ArithError> {
    prime_power(q_g)?;
    let n = q_g - 1;
    let a = x_dlog.rem_euclid(n as i128) as u64;
    // Translation by a on Z/n has gcd(n, a) cycles, so its parity is
    // n - gcd(n, a).
    Ok(Sign::parity((n - n.gcd(&a)) as i128))
}

/// Whether an element of order `ord` is a square in the field of `p^deg`
/// elements. Works with valuations only, so huge fields are fine.
pub fn is_square_of_order(ord: u64, p: u64, deg: u64) -> Sign {
    if p == 2 || v2(ord) < v2_qn_minus_one(p, deg) {
        Sign::Plus
    } else {
        Sign::Minus
    }
}

/// `v2(q^n - 1)` for odd `q`, by lifting the exponent.
pub fn v2_qn_minus_one(q: u64, n: u64) -> u32 {
    assert!(q % 2 == 1 && n >= 1);
    if n % 2 == 1 {
        v2(q - 1)
    } else {
        v2(q - 1) + v2(q + 1) + v2(n) - 1
    }
}

/// `v2(q^n + 1)` for odd `q`.
pub fn v2_qn_plus_one(q: u64, n: u64) -> u32 {
    assert!(q % 2 == 1);
    if n % 2 == 0 {
        1
    } else {
        v2(q + 1)
    }
}

/// The Jacobi symbol `(a/n)` for odd positive `n`.
pub fn jacobi_symbol(a: i128, n: u64) -> Sign {
    assert!(n % 2 == 1, "Jacobi symbol needs an odd modulus");
    let mut a = a.rem_euclid(n as i128) as u64;
    let mut n = n;
    let mut s = Sign::Plus;
    while a != 0 {
        while a % 2 == 0 {
            a /= 2;
            if n % 8 == 3 || n % 8 == 5 {
                s = s * Sign::Minus;
            }
        }
        std::mem::swap(&mut a, &mut n);
        if a % 4 == 3 && n % 4 == 3 {
            s = s * Sign::Minus;
        }
        a %= n;
    }
    assert!(n == 1, "Jacobi symbol of a non-unit");
    s
}

/// Quadratic character of `F_Q^×` at the integer `a` (prime to `p`),
/// `Q = p^deg`. For `p = 2` every unit is a square.
pub fn legendre_in_field(a: i128, p: u64, deg: u64) -> Sign {
    if p == 2 {
        return Sign::Plus;
    }
    jacobi_symbol(a, p).pow(deg as i128)
}

/// `(-1/Q)` for `Q = p^deg`.
pub fn minus_one_class(p: u64, deg: u64) -> Sign {
    legendre_in_field(-1, p, deg)
}

/// Normalized quadratic Gauss sum of `F_{p^m}` for the additive character
/// `x ↦ exp(2πi Tr(x)/p)`.
pub fn gauss_norm_base(p: u64, m: u64) -> Result<Rot, ArithError> {
    if p == 2 {
        return Err(ArithError::CharTwo);
    }
    let base = if p % 4 == 1 { Rot::ONE } else { Rot::I };
    // Hasse-Davenport: g(q) = -(-g(p))^m, and sqrt(q) = sqrt(p)^m.
    Ok(Rot::MINUS_ONE.pow(m as i128 + 1) + base.pow(m as i128))
}

/// Normalized Gauss sum of a quadratic form.
pub fn gauss_norm_form(form: QuadForm, p: u64, m: u64) -> Result<Rot, ArithError> {
    Ok(form.det_class.rot() + gauss_norm_base(p, m)?.pow(form.dim as i128))
}

/// Which additive character the Gauss sums are taken against: the standard
/// `exp(2πi Tr(x)/p)` or its complex conjugate.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GaussConvention {
    #[default]
    Standard,
    Conjugate,
}

impl GaussConvention {
    pub fn norm_base(self, p: u64, m: u64) -> Result<Rot, ArithError> {
        let n = gauss_norm_base(p, m)?;
        Ok(match self {
            GaussConvention::Standard => n,
            GaussConvention::Conjugate => -n,
        })
    }

    pub fn norm_form(self, form: QuadForm, p: u64, m: u64) -> Result<Rot, ArithError> {
        Ok(form.det_class.rot() + self.norm_base(p, m)?.pow(form.dim as i128))
    }
}
