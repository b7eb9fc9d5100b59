//! The rectifier, layer by layer along the canonical chain
//! `F ⊆ K_0 ⊊ K_1 ⊊ … ⊊ K_l ⊆ E`.
//!
//! `K_0/F` is unramified of degree `f`, each `K_j/K_{j-1}` is ramified
//! quadratic and `E/K_l` is totally ramified of odd degree. Each layer
//! contributes a tamely ramified character of `E^×` (its ν-rectifier) and
//! the rectifier is their product.

use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Neg, Sub};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cyclo::{jacobi_symbol, legendre_in_field, minus_one_class, GaussConvention, Rot, Sign};
use crate::galois::{enumerate_double_cosets, CosetKind, DoubleCoset, ExtShape, ShapeError, Subfield};
use crate::jumps::JumpDatum;
use crate::symplectic::{checked_occupancy, t1_mu_sum, t_mu, t_varpi_sum, Occupancy, SympError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RectError {
    #[error(transparent)]
    Shape(#[from] ShapeError),
    #[error(transparent)]
    Symp(#[from] SympError),
    #[error("{datum}: {why}")]
    Inconsistent { datum: String, why: String },
}

pub(crate) fn inconsistent(jd: &JumpDatum, why: impl Into<String>) -> RectError {
    RectError::Inconsistent { datum: jd.to_string(), why: why.into() }
}

/// A character of `E^×` trivial on `U¹_E`, recorded by its value on a
/// generator of `μ_E` and at `ϖ_E`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TameChar {
    pub mu: Rot,
    pub varpi: Rot,
}

impl TameChar {
    pub const TRIVIAL: TameChar = TameChar { mu: Rot::ONE, varpi: Rot::ONE };

    pub fn new(mu: Rot, varpi: Rot) -> TameChar {
        TameChar { mu, varpi }
    }

    /// `χ(gen) = exp(2πi·mu_mult/(q^f-1))`.
    pub fn mu_mult(&self, shape: &ExtShape) -> u64 {
        let n = shape.mu_order();
        assert_eq!(n % self.mu.den(), 0, "{self} is not a character of μ_E");
        self.mu.num() * (n / self.mu.den())
    }

    pub fn is_trivial(&self) -> bool {
        self.mu.is_one() && self.varpi.is_one()
    }
}

impl Add for TameChar {
    type Output = TameChar;
    fn add(self, rhs: TameChar) -> TameChar {
        TameChar { mu: self.mu + rhs.mu, varpi: self.varpi + rhs.varpi }
    }
}

impl AddAssign for TameChar {
    fn add_assign(&mut self, rhs: TameChar) {
        *self = *self + rhs;
    }
}

impl Neg for TameChar {
    type Output = TameChar;
    fn neg(self) -> TameChar {
        TameChar { mu: -self.mu, varpi: -self.varpi }
    }
}

impl Sub for TameChar {
    type Output = TameChar;
    fn sub(self, rhs: TameChar) -> TameChar {
        self + (-rhs)
    }
}

impl Sum for TameChar {
    fn sum<I: Iterator<Item = TameChar>>(iter: I) -> TameChar {
        iter.fold(TameChar::TRIVIAL, Add::add)
    }
}

impl fmt::Display for TameChar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(μ ↦ {}, ϖ ↦ {})", self.mu, self.varpi)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ChainLayer {
    /// `K_0/F`, unramified of degree `f`.
    Unram { f: u64 },
    /// `K_j/K_{j-1}`, ramified quadratic.
    Quad { j: u32, last: bool },
    /// `E/K_l`, totally ramified of odd degree.
    OddTop { deg: u64 },
}

impl ChainLayer {
    /// The lower field of the layer.
    pub fn base(&self, shape: &ExtShape) -> Subfield {
        match *self {
            ChainLayer::Unram { .. } => Subfield::base(shape),
            ChainLayer::Quad { j, .. } => chain_field(shape, j - 1),
            ChainLayer::OddTop { .. } => chain_field(shape, shape.e().trailing_zeros()),
        }
    }

    /// The upper field of the layer.
    pub fn top(&self, shape: &ExtShape) -> Subfield {
        match *self {
            ChainLayer::Unram { .. } => chain_field(shape, 0),
            ChainLayer::Quad { j, .. } => chain_field(shape, j),
            ChainLayer::OddTop { .. } => Subfield::top(shape),
        }
    }

    /// Cosets in `W_base` but not in `W_top`.
    pub fn cosets(&self, shape: &ExtShape) -> Vec<DoubleCoset> {
        let (lo, hi) = (self.base(shape), self.top(shape));
        enumerate_double_cosets(shape)
            .into_iter()
            .filter(|dc| lo.contains(shape, dc.k, dc.i) && !hi.contains(shape, dc.k, dc.i))
            .collect()
    }
}

/// `K_j`: `e(E/K_j) = e/2^j`, `f(E/K_j) = 1`.
pub fn chain_field(shape: &ExtShape, j: u32) -> Subfield {
    Subfield { e_sub: shape.e() >> j, f_sub: 1 }
}

pub fn canonical_chain(shape: &ExtShape) -> Vec<ChainLayer> {
    let l = shape.e().trailing_zeros();
    let mut out = Vec::new();
    if shape.f() > 1 {
        out.push(ChainLayer::Unram { f: shape.f() });
    }
    out.extend((1..=l).map(|j| ChainLayer::Quad { j, last: j == l }));
    let odd = shape.e() >> l;
    if odd > 1 {
        out.push(ChainLayer::OddTop { deg: odd });
    }
    out
}

/// `t⁰_μ(V_{K_0/F})` in closed form.
pub fn t0_mu_closed(jd: &JumpDatum) -> Sign {
    let ix = jd.derive_indexes();
    let e = jd.shape.e();
    if ix.f0 % 2 == 0 {
        return Sign::Plus;
    }
    let Some(r) = ix.r else { return Sign::Plus };
    if e % 2 == 0 && ix.s.is_some_and(|s| s <= r) {
        return Sign::Plus;
    }
    Sign::parity(jd.layers[r].jump as i128 + 1)
}

/// `t⁰_μ(V_{K_0/F})` by the criterion on the layer `R`: `-1` exactly when
/// `r_R` is even and `e(E/E_{R+1})` is odd.
pub fn t0_mu_by_layer(jd: &JumpDatum) -> Sign {
    let ix = jd.derive_indexes();
    match ix.r {
        Some(r) if jd.layers[r].jump % 2 == 0 && jd.field(r + 1).e_sub % 2 == 1 => Sign::Minus,
        _ => Sign::Plus,
    }
}

/// `t⁰_μ(V_{K_0/F})` as a product over components.
pub fn t0_mu_product(jd: &JumpDatum, occ: &Occupancy) -> Result<Sign, RectError> {
    let shape = &jd.shape;
    let mut sign = Sign::Plus;
    for dc in enumerate_double_cosets(shape).iter().filter(|d| d.i != 0) {
        if dc.kind == CosetKind::Asym && shape.inverse_key(dc.k, dc.i) < dc.key() {
            continue;
        }
        sign = sign * t_mu(dc, occ, shape)?.t0;
    }
    Ok(sign)
}

/// `t⁰_μ(V^ϖ)`: `-1` exactly when the symmetric unramified coset fixing
/// `ϖ_E` is occupied.
pub fn t0_mu_fixed(jd: &JumpDatum, occ: &Occupancy) -> Sign {
    let shape = &jd.shape;
    let hit = enumerate_double_cosets(shape)
        .iter()
        .any(|dc| dc.kind == CosetKind::SymUnram && shape.varpi_root(dc.k, dc.i) == 0 && occ.get(dc));
    if hit {
        Sign::Minus
    } else {
        Sign::Plus
    }
}

pub fn nu_rectifier(layer: &ChainLayer, jd: &JumpDatum, conv: GaussConvention) -> Result<TameChar, RectError> {
    let shape = &jd.shape;
    let occ = checked_occupancy(jd)?;
    let cosets = layer.cosets(shape);
    let (p, deg) = (shape.p(), shape.m() * shape.f());
    match *layer {
        ChainLayer::OddTop { deg: odd } => {
            Ok(TameChar::new(Rot::ONE, jacobi_symbol(shape.qf() as i128, odd).rot()))
        }
        ChainLayer::Quad { last, .. } => {
            let rel = jd.relative_to(layer.base(shape))?;
            if rel.jump_lemma_holds() != Some(true) {
                return Err(inconsistent(&rel, "the S/T parity facts fail over the layer base"));
            }
            let ix = rel.derive_indexes();
            let e_rel = rel.shape.e();
            let tv = t_varpi_sum(&cosets, &occ, shape)?;
            let minus_one = minus_one_class(p, deg);
            if last {
                let (Some(s), Some(i_plus), Some(d_plus)) = (ix.s, ix.i_plus, ix.d_plus) else {
                    return Err(inconsistent(&rel, "no odd jump below a ramified quadratic layer"));
                };
                let zeta = Sign::parity(rel.layers[s].zeta as i128);
                let sign = minus_one.pow(((i_plus - 1) / 2) as i128) * legendre_in_field(d_plus as i128, p, deg) * zeta;
                let gauss = conv.norm_base(p, deg).map_err(SympError::from)?;
                let varpi = tv + sign.rot() + gauss.pow((e_rel / (2 * d_plus)) as i128);
                Ok(TameChar::new(Rot::MINUS_ONE, varpi))
            } else {
                let sign = minus_one.pow((e_rel * ix.i_sub / 4) as i128);
                Ok(TameChar::new(Rot::ONE, tv + sign.rot()))
            }
        }
        ChainLayer::Unram { f } => {
            let closed = t0_mu_closed(jd);
            let product = t0_mu_product(jd, &occ)?;
            if closed != product || closed != t0_mu_by_layer(jd) {
                return Err(inconsistent(
                    jd,
                    format!("t0_mu closed form {closed}, by layer {}, product {product}", t0_mu_by_layer(jd)),
                ));
            }
            let mu = t1_mu_sum(&cosets, &occ, shape)?;
            let varpi = Sign::parity((shape.e() * (f - 1)) as i128).rot()
                + closed.rot()
                + t0_mu_fixed(jd, &occ).rot()
                + t_varpi_sum(&cosets, &occ, shape)?;
            Ok(TameChar::new(mu, varpi))
        }
    }
}

/// The rectifier of the character over `F`.
pub fn full_rectifier(jd: &JumpDatum, conv: GaussConvention) -> Result<TameChar, RectError> {
    canonical_chain(&jd.shape).iter().map(|l| nu_rectifier(l, jd, conv)).sum()
}

/// The rectifier over the chain field `K_j` (`j = 0` is `K_0`): the product
/// of the layers above it.
pub fn rectifier_over(jd: &JumpDatum, j: u32, conv: GaussConvention) -> Result<TameChar, RectError> {
    canonical_chain(&jd.shape)
        .iter()
        .filter(|l| match l {
            ChainLayer::Unram { .. } => false,
            ChainLayer::Quad { j: jj, .. } => *jj > j,
            ChainLayer::OddTop { .. } => true,
        })
        .map(|l| nu_rectifier(l, jd, conv))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jumps::Layer;

    fn shape(p: u64, e: u64, f: u64) -> ExtShape {
        ExtShape::new(p, 1, e, f, 0).unwrap()
    }

    fn single(s: ExtShape, jump: u64) -> JumpDatum {
        JumpDatum::new(s, vec![Layer { e_rel: 1, f_rel: 1, jump, zeta: 0 }])
    }

    #[test]
    fn chains() {
        let c = canonical_chain(&shape(5, 12, 2));
        assert_eq!(
            c,
            vec![
                ChainLayer::Unram { f: 2 },
                ChainLayer::Quad { j: 1, last: false },
                ChainLayer::Quad { j: 2, last: true },
                ChainLayer::OddTop { deg: 3 }
            ]
        );
        assert_eq!(canonical_chain(&shape(2, 5, 1)), vec![ChainLayer::OddTop { deg: 5 }]);
        assert_eq!(canonical_chain(&shape(2, 1, 3)), vec![ChainLayer::Unram { f: 3 }]);
        assert!(canonical_chain(&shape(2, 1, 1)).is_empty());
    }

    #[test]
    fn layers_partition_cosets() {
        let s = shape(7, 12, 2);
        let n: usize = canonical_chain(&s).iter().map(|l| l.cosets(&s).len()).sum();
        assert_eq!(n + 1, enumerate_double_cosets(&s).len());
    }

    #[test]
    fn worked_examples() {
        let conv = GaussConvention::Standard;
        let odd = single(shape(2, 3, 1), 1);
        assert_eq!(full_rectifier(&odd, conv).unwrap(), TameChar::new(Rot::ONE, Rot::MINUS_ONE));
        let unram = single(shape(3, 1, 2), 1);
        assert_eq!(full_rectifier(&unram, conv).unwrap(), TameChar::new(Rot::ONE, Rot::MINUS_ONE));
        let trivial = single(shape(2, 1, 1), 1);
        assert_eq!(full_rectifier(&trivial, conv).unwrap(), TameChar::TRIVIAL);
    }

    #[test]
    fn char_arith() {
        let a = TameChar::new(Rot::MINUS_ONE, Rot::I);
        assert_eq!(a + a, TameChar::new(Rot::ONE, Rot::MINUS_ONE));
        assert_eq!(a - a, TameChar::TRIVIAL);
        assert_eq!(a.mu_mult(&shape(3, 1, 2)), 4);
    }

    #[test]
    fn sweep_is_consistent() {
        let mut bad = Vec::new();
        for p in [2u64, 3, 5, 7] {
            for e in (1..=12).filter(|e| e % p != 0) {
                for (f, z) in (1..=4).flat_map(|f| (0..3).map(move |z| (f, z))) {
                    // ζ_E/F = gen^z; shapes with no Frobenius root are skipped.
                    let Ok(s) = ExtShape::new(p, 1, e, f, z) else { continue };
                    if s.qf() > 1 << 20 || (z > 0 && s.zeta_ef() == 0) {
                        continue;
                    }
                    for seed in 0..20 {
                        let jd = JumpDatum::random_valid(&s, seed);
                        if let Err(err) = full_rectifier(&jd, GaussConvention::Standard) {
                            bad.push(err.to_string());
                        }
                    }
                }
            }
        }
        assert!(bad.is_empty(), "{} failures, first: {:?}", bad.len(), &bad[..bad.len().min(5)]);
    }
}
