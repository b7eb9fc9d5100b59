//! Normalization constants comparing automorphic induction with spectral
//! transfer, in three families of `E ⊇ K ⊇ F`:
//!
//! * `I`: `E/F` totally ramified of odd degree, `K/F` cyclic of degree `d`,
//! * `II`: `E/F` totally ramified of even degree, `K/F` quadratic,
//! * `III`: `E/K` totally ramified, `K/F` unramified.
//!
//! [`verify_identity`] checks `κ(x_ab)·c_θ·Δ²(γ) = ε_L(V_{G/H})·Δ_{I,II,III}(γ)`
//! with both sides assembled independently.

use serde::Serialize;
use thiserror::Error;

use crate::cyclo::{
    euler_phi, jacobi_symbol, legendre_in_field, minus_one_class, mult_order, ArithError, GaussConvention, Rot,
    Sign,
};
use crate::galois::{coset, enumerate_double_cosets, ExtShape, Subfield};
use crate::jumps::JumpDatum;
use crate::rectifier::{chain_field, full_rectifier, nu_rectifier, t0_mu_closed, ChainLayer, RectError};
use crate::symplectic::{checked_occupancy, t_varpi_sum, SympError};
use crate::transfer::{delta_i_ii_iii, TameElement, TransferError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(tag = "case")]
pub enum CaseTag {
    /// `K/F` cyclic totally ramified of odd degree `d`.
    I { d: u64 },
    II,
    III,
}

impl std::fmt::Display for CaseTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CaseTag::I { d } => write!(f, "I(d={d})"),
            CaseTag::II => write!(f, "II"),
            CaseTag::III => write!(f, "III"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum NormError {
    #[error("{shape} does not fit case {case}: {why}")]
    CaseMismatch { case: CaseTag, shape: String, why: String },
    #[error("{0}")]
    Inconsistent(String),
    #[error(transparent)]
    Arith(#[from] ArithError),
    #[error(transparent)]
    Symp(#[from] SympError),
    #[error(transparent)]
    Rect(#[from] RectError),
    #[error(transparent)]
    Transfer(#[from] TransferError),
}

fn mismatch(case: CaseTag, shape: &ExtShape, why: &str) -> NormError {
    NormError::CaseMismatch { case, shape: shape.to_string(), why: why.to_string() }
}

/// The field `K` of the case, after checking the shape fits.
pub fn case_field(case: CaseTag, shape: &ExtShape) -> Result<Subfield, NormError> {
    let (e, f) = (shape.e(), shape.f());
    match case {
        CaseTag::I { d } => {
            if f != 1 || e % 2 == 0 {
                return Err(mismatch(case, shape, "E/F must be totally ramified of odd degree"));
            }
            if d == 0 || e % d != 0 || (shape.q() - 1) % d != 0 {
                return Err(mismatch(case, shape, "d must divide e and q - 1"));
            }
            Ok(Subfield { e_sub: e / d, f_sub: 1 })
        }
        CaseTag::II => {
            if f != 1 || e % 2 == 1 || shape.p() == 2 {
                return Err(mismatch(case, shape, "E/F must be totally ramified of even degree, p odd"));
            }
            Ok(chain_field(shape, 1))
        }
        CaseTag::III => Ok(chain_field(shape, 0)),
    }
}

/// `λ_{K/F}` for `ψ_F` of level zero.
pub fn langlands_lambda(case: CaseTag, shape: &ExtShape, conv: GaussConvention) -> Result<Rot, NormError> {
    Ok(match case {
        CaseTag::I { d } => jacobi_symbol(shape.q() as i128, d).rot(),
        CaseTag::II => conv.norm_base(shape.p(), shape.m())?,
        CaseTag::III => Sign::parity(shape.f() as i128 - 1).rot(),
    })
}

/// `ε_L(V_{G/H}) = λ_{K/F}^{-m}`, `m = |E/K|`.
pub fn epsilon_l(case: CaseTag, shape: &ExtShape, conv: GaussConvention) -> Result<Rot, NormError> {
    let m = case_field(case, shape)?.codegree();
    Ok(langlands_lambda(case, shape, conv)?.pow(-(m as i128)))
}

/// The three subcases of a datum with `r_0 = 1` in case II, plus `r_0 > 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FirstJump {
    Above1,
    /// `i₊ = i⁺ = r_0 = 1`
    AllOne,
    /// `i₊ > i⁺ = r_0 = 1`
    LowerOne,
    /// `i₊ ≥ i⁺ > r_0 = 1`
    OddAbove,
}

pub fn first_jump(jd: &JumpDatum) -> Option<FirstJump> {
    let ix = jd.derive_indexes();
    let i_plus = ix.i_plus?;
    let i_sub = ix.i_sub;
    Some(match jd.layers[0].jump {
        1 if i_sub == 1 && i_plus == 1 => FirstJump::AllOne,
        1 if i_plus == 1 => FirstJump::LowerOne,
        1 => FirstJump::OddAbove,
        _ => FirstJump::Above1,
    })
}

/// The row of the unramified table, for `f` even.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TableRow {
    OddOdd,
    OddEven,
    EvenOddAbove,
    EvenOddBelow,
    EvenEven,
}

impl TableRow {
    pub const ALL: [TableRow; 5] =
        [TableRow::OddOdd, TableRow::OddEven, TableRow::EvenOddAbove, TableRow::EvenOddBelow, TableRow::EvenEven];

    pub fn of(jd: &JumpDatum) -> Option<TableRow> {
        let shape = &jd.shape;
        if shape.f() % 2 == 1 {
            return None;
        }
        let ix = jd.derive_indexes();
        Some(match (shape.e() % 2 == 0, ix.f0 % 2 == 0) {
            (false, false) => TableRow::OddOdd,
            (false, true) => TableRow::OddEven,
            (true, true) => TableRow::EvenEven,
            (true, false) if ix.s > ix.r => TableRow::EvenOddAbove,
            (true, false) => TableRow::EvenOddBelow,
        })
    }

    /// `(κ(x_ab), c_θ, Δ²(ϖ_E u))` as tabulated.
    pub fn values(self, jd: &JumpDatum) -> (Sign, Sign, Sign) {
        let ix = jd.derive_indexes();
        // `R` exists once `f(E/E_0)` is odd and `f` even.
        let r_r = ix.r.map_or(0, |r| jd.layers[r].jump as i128);
        let f_varpi = ix.f_varpi as i128;
        match self {
            TableRow::OddOdd => (Sign::parity(r_r), Sign::parity(r_r + 1), Sign::parity(f_varpi)),
            TableRow::OddEven => (Sign::Plus, Sign::Minus, Sign::parity(f_varpi)),
            TableRow::EvenOddAbove => (Sign::parity(r_r + 1), Sign::parity(r_r + 1), Sign::parity(f_varpi + 1)),
            TableRow::EvenOddBelow => (Sign::Plus, Sign::Plus, Sign::parity(f_varpi + 1)),
            TableRow::EvenEven => (Sign::Minus, Sign::Minus, Sign::parity(f_varpi + 1)),
        }
    }
}

/// `κ(x_ab)` in closed form.
pub fn kappa(case: CaseTag, jd: &JumpDatum) -> Result<Rot, NormError> {
    let shape = &jd.shape;
    case_field(case, shape)?;
    match case {
        CaseTag::I { .. } => Ok(Rot::ONE),
        CaseTag::II => {
            let (p, m) = (shape.p(), shape.m());
            let minus_one = minus_one_class(p, m);
            let ix = jd.derive_indexes();
            let e = shape.e();
            if (e / 2) % 2 == 1 {
                let (Some(s), Some(i_plus), Some(d_plus)) = (ix.s, ix.i_plus, ix.d_plus) else {
                    return Err(mismatch(case, shape, "no odd jump"));
                };
                let zeta = Sign::parity(jd.layers[s].zeta as i128);
                Ok((minus_one.pow(((d_plus + i_plus) / 2) as i128)
                    * legendre_in_field(d_plus as i128, p, m)
                    * zeta)
                    .rot())
            } else {
                Ok(minus_one.pow((e * (ix.i_sub - 1) / 4) as i128).rot())
            }
        }
        CaseTag::III => Ok(Rot::new(-(kappa_valuation_twice(jd) as i128), 2 * shape.f())),
    }
}

/// `2 v_F(x_ab)` up to sign: `f(e-1) + Σ r_i f(|E/E_{i+1}| - |E/E_i|)`.
fn kappa_valuation_twice(jd: &JumpDatum) -> u64 {
    let f = jd.shape.f();
    let sum: u64 = (0..jd.len())
        .map(|i| jd.layers[i].jump * f * (jd.field(i + 1).codegree() - jd.field(i).codegree()))
        .sum();
    f * (jd.shape.e() - 1) + sum
}

/// `κ(x_ab)` in case II as the product of its three pieces: the `k = e/2`
/// term, `∏|E_i/E_{i+1}|^{(|E/E_i|-1)e/2}` and `∏_{k<e/2} (-1)^{k(r_{i(k)}+1)}`.
pub fn kappa_by_terms(jd: &JumpDatum) -> Result<Sign, NormError> {
    let shape = &jd.shape;
    case_field(CaseTag::II, shape)?;
    let (p, m, e) = (shape.p(), shape.m(), shape.e());
    let minus_one = minus_one_class(p, m);
    let ix = jd.derive_indexes();
    let half_term = if (e / 2) % 2 == 1 {
        let (s, r_s) = (ix.s.expect("e is even"), ix.i_plus.expect("e is even"));
        Sign::parity(jd.layers[s].zeta as i128) * minus_one.pow(r_s.div_ceil(2) as i128)
    } else {
        Sign::Plus
    };
    let first: Sign = (0..jd.len())
        .map(|i| {
            let step = jd.field(i + 1).codegree() / jd.field(i).codegree();
            legendre_in_field(step as i128, p, m).pow(((jd.field(i).codegree() - 1) * (e / 2)) as i128)
        })
        .product();
    let mut exponent = 0u64;
    for k in 1..e / 2 {
        let i = jd.layer_of_coset(&coset(shape, k, 0)).expect("σ^k moves E_0 = E");
        exponent += k * (jd.layers[i].jump + 1);
    }
    Ok(half_term * first * minus_one.pow(exponent as i128))
}

/// `sgn((𝔊_F/𝔊_K)(𝔎^κ_F/𝔎_F))` in case II, read off the subcase of the first
/// jump.
pub fn quotient_sign_by_subcase(jd: &JumpDatum, conv: GaussConvention) -> Result<Rot, NormError> {
    let shape = &jd.shape;
    case_field(CaseTag::II, shape)?;
    let (p, m, e) = (shape.p(), shape.m(), shape.e());
    let minus_one = minus_one_class(p, m);
    let ix = jd.derive_indexes();
    let odd_half = (e / 2) % 2 == 1;
    let gauss_part = |with_minus: bool| -> Result<Rot, NormError> {
        let (s, i_plus, d_plus) = (ix.s.unwrap(), ix.i_plus.unwrap(), ix.d_plus.unwrap());
        let mut sign = legendre_in_field(d_plus as i128, p, m) * Sign::parity(jd.layers[s].zeta as i128);
        if with_minus {
            sign = sign * minus_one.pow(((i_plus - 1) / 2) as i128);
        }
        Ok(sign.rot() + conv.norm_base(p, m)?.pow((e / (2 * d_plus)) as i128))
    };
    let sub = first_jump(jd).ok_or_else(|| mismatch(CaseTag::II, shape, "no odd jump"))?;
    match sub {
        FirstJump::Above1 | FirstJump::OddAbove => {
            if odd_half {
                gauss_part(true)
            } else {
                Ok(minus_one.pow((e * ix.i_sub / 4) as i128).rot())
            }
        }
        FirstJump::AllOne => {
            if odd_half {
                gauss_part(false)
            } else {
                Ok(minus_one.pow((e / 4) as i128).rot())
            }
        }
        FirstJump::LowerOne => {
            if odd_half || ix.i_sub % 2 == 1 {
                return Err(NormError::Inconsistent(format!("{jd}: i₊ > i⁺ = 1 needs e/2 and i₊ even")));
            }
            Ok(Rot::ONE)
        }
    }
}

/// `c_θ·Δ²(γ)` at the point used for the case.
pub fn c_theta_delta2(case: CaseTag, jd: &JumpDatum, conv: GaussConvention) -> Result<Rot, NormError> {
    let shape = &jd.shape;
    let sub = case_field(case, shape)?;
    let occ = checked_occupancy(jd)?;
    match case {
        CaseTag::I { .. } => {
            // c_θ = μ_{K/F}(ϖ_E)·t_ϖ(V_{K/F})·(Δ²/Δ¹)(ϖ_E)^{-1} with Δ¹(ϖ_E) = 1.
            let mu_kf = full_rectifier(jd, conv)? - full_rectifier(&jd.relative_to(sub).map_err(RectError::from)?, conv)?;
            if !mu_kf.varpi.is_one() {
                return Err(NormError::Inconsistent(format!("{jd}: μ_K/F(ϖ_E) = {}", mu_kf.varpi)));
            }
            let outside: Vec<_> = enumerate_double_cosets(shape)
                .into_iter()
                .filter(|d| !d.is_trivial() && !sub.contains(shape, d.k, d.i))
                .collect();
            Ok(mu_kf.varpi + t_varpi_sum(&outside, &occ, shape)?)
        }
        CaseTag::II => {
            let layer = ChainLayer::Quad { j: 1, last: shape.e().trailing_zeros() == 1 };
            let from_rectifier = nu_rectifier(&layer, jd, conv)?.varpi - t_varpi_sum(&layer.cosets(shape), &occ, shape)?;
            let by_subcase = quotient_sign_by_subcase(jd, conv)?;
            if from_rectifier != by_subcase {
                return Err(NormError::Inconsistent(format!(
                    "{jd}: quotient sign {from_rectifier} from the rectifier, {by_subcase} by subcase"
                )));
            }
            Ok(by_subcase)
        }
        CaseTag::III => {
            let t0 = t0_mu_closed(jd);
            let c_theta = Sign::parity(jd.derive_indexes().f0 as i128 - 1) * t0;
            Ok(c_theta.rot() + delta2_unramified(shape).rot())
        }
    }
}

/// `Δ²(ϖ_E u) = (-1)^{e(f-1) + f_ϖ - 1}`.
pub fn delta2_unramified(shape: &ExtShape) -> Sign {
    Sign::parity((shape.e() * (shape.f() - 1) + shape.f_varpi() - 1) as i128)
}

/// For `a | e` with `a ∤ e/d`: `φ(a)/ord(q, a)` is even and divisible by
/// `φ(gcd(a, d))`.
pub fn orbit_count_parity(e: u64, d: u64, q: u64) -> Result<bool, ArithError> {
    use num_integer::Integer;
    for a in crate::cyclo::divisors(e).into_iter().filter(|a| (e / d) % a != 0) {
        let count = euler_phi(a) / mult_order(q % a, a)?;
        if count % 2 != 0 || count % euler_phi(a.gcd(&d)) != 0 {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IdentityReport {
    pub case: CaseTag,
    pub datum: String,
    pub kappa: Rot,
    pub c_theta_delta2: Rot,
    pub lhs: Rot,
    pub epsilon: Rot,
    pub delta: Rot,
    pub rhs: Rot,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub row: Option<TableRow>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub first_jump: Option<FirstJump>,
    /// Side checks that are not part of the identity: the alternative forms
    /// of `κ`, the table and the parity argument of case I.
    pub cross_checks: bool,
}

impl IdentityReport {
    pub fn equal(&self) -> bool {
        self.lhs == self.rhs
    }

    pub fn holds(&self) -> bool {
        self.equal() && self.cross_checks
    }
}

pub fn verify_identity(case: CaseTag, jd: &JumpDatum, conv: GaussConvention) -> Result<IdentityReport, NormError> {
    let shape = &jd.shape;
    let sub = case_field(case, shape)?;
    let kappa = kappa(case, jd)?;
    let c_theta_delta2 = c_theta_delta2(case, jd, conv)?;
    let epsilon = epsilon_l(case, shape, conv)?;
    let gamma = if case == CaseTag::III { TameElement::VARPI_U } else { TameElement::VARPI };
    let delta = delta_i_ii_iii(&gamma, shape, sub)?;
    let (mut row, mut first) = (None, None);
    let cross_checks = match case {
        CaseTag::I { d } => {
            let parity = orbit_count_parity(shape.e(), d, shape.q())?;
            let eps_closed = jacobi_symbol(shape.q() as i128, d).pow((shape.e() / d) as i128);
            parity && eps_closed.rot() == epsilon && epsilon.is_one() && c_theta_delta2.is_one()
        }
        CaseTag::II => {
            first = first_jump(jd);
            kappa_by_terms(jd)?.rot() == kappa
        }
        CaseTag::III => {
            row = TableRow::of(jd);
            match row {
                Some(r) => {
                    let (k, c, d2) = r.values(jd);
                    let c_theta = c_theta_delta2 - delta2_unramified(shape).rot();
                    k.rot() == kappa && c.rot() == c_theta && d2 == delta2_unramified(shape)
                }
                None => kappa.is_one() && c_theta_delta2.is_one(),
            }
        }
    };
    Ok(IdentityReport {
        case,
        datum: jd.to_string(),
        kappa,
        c_theta_delta2,
        lhs: kappa + c_theta_delta2,
        epsilon,
        delta,
        rhs: epsilon + delta,
        row,
        first_jump: first,
        cross_checks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jumps::Layer;
    use std::collections::BTreeSet;

    const CONV: GaussConvention = GaussConvention::Standard;

    fn shape(p: u64, e: u64, f: u64) -> ExtShape {
        ExtShape::new(p, 1, e, f, 0).unwrap()
    }

    #[test]
    fn lambda_values() {
        assert_eq!(langlands_lambda(CaseTag::III, &shape(2, 1, 3), CONV), Ok(Rot::ONE));
        assert_eq!(langlands_lambda(CaseTag::I { d: 3 }, &shape(2, 3, 1), CONV), Ok(Rot::MINUS_ONE));
        assert_eq!(langlands_lambda(CaseTag::II, &shape(5, 2, 1), CONV), Ok(Rot::ONE));
        assert_eq!(epsilon_l(CaseTag::III, &shape(5, 3, 2), CONV), Ok(Rot::MINUS_ONE));
        assert_eq!(epsilon_l(CaseTag::I { d: 1 }, &shape(2, 3, 1), CONV), Ok(Rot::ONE));
    }

    #[test]
    fn case_checks() {
        assert!(case_field(CaseTag::I { d: 3 }, &shape(2, 3, 1)).is_err(), "3 ∤ q - 1");
        assert!(case_field(CaseTag::II, &shape(3, 5, 1)).is_err());
        assert!(case_field(CaseTag::II, &shape(3, 4, 2)).is_err());
    }

    #[test]
    fn kappa_table_rows() {
        let s = shape(3, 1, 2);
        let jd = JumpDatum::new(s, vec![Layer { e_rel: 1, f_rel: 1, jump: 3, zeta: 0 }]);
        assert_eq!(TableRow::of(&jd), Some(TableRow::OddOdd));
        assert_eq!(kappa(CaseTag::III, &jd), Ok(Rot::MINUS_ONE));
        let odd_f = JumpDatum::new(shape(2, 3, 3), vec![Layer { e_rel: 1, f_rel: 1, jump: 1, zeta: 0 }]);
        assert_eq!(TableRow::of(&odd_f), None);
        assert_eq!(kappa(CaseTag::III, &odd_f), Ok(Rot::ONE));
    }

    #[test]
    fn identity_sweep() {
        let mut rows = BTreeSet::new();
        let mut firsts = BTreeSet::new();
        let mut halves = BTreeSet::new();
        for p in [2u64, 3, 5, 7, 11, 13] {
            for e in (1..=16).filter(|e| e % p != 0) {
                for f in 1..=4 {
                    for z in 0..3 {
                        let Ok(s) = ExtShape::new(p, 1, e, f, z) else { continue };
                        if s.qf() > 1 << 16 || (z > 0 && s.zeta_ef() == 0) {
                            continue;
                        }
                        let mut cases = vec![CaseTag::III];
                        cases.extend(crate::cyclo::divisors(e).into_iter().map(|d| CaseTag::I { d }));
                        cases.push(CaseTag::II);
                        for case in cases {
                            if case_field(case, &s).is_err() {
                                continue;
                            }
                            for (seed, conv) in (0..12).zip([CONV, GaussConvention::Conjugate].into_iter().cycle()) {
                                let jd = JumpDatum::random_valid(&s, seed);
                                let r = verify_identity(case, &jd, conv).unwrap_or_else(|err| panic!("{jd}: {err}"));
                                assert!(r.holds(), "{r:?}");
                                rows.extend(r.row);
                                firsts.extend(r.first_jump);
                                if case == CaseTag::II {
                                    halves.insert((e / 2) % 2);
                                }
                            }
                        }
                    }
                }
            }
        }
        assert_eq!(rows.len(), 5, "{rows:?}");
        assert_eq!(firsts.len(), 4, "{firsts:?}");
        assert_eq!(halves.len(), 2);
    }
}
