//! Transfer factors at tame elements, and the restriction of χ-products to
//! the base field.
//!
//! Elements are handled modulo `U¹_E`: every factor evaluated here is trivial
//! there. `Δ_I` and `Δ_III₁` are identically `1`.

use serde::Serialize;
use thiserror::Error;

use crate::chi::{ChiContext, ChiError};
use crate::cyclo::{mul_mod, pow_mod, GaussConvention, Rot, Sign};
use crate::galois::{enumerate_double_cosets, CosetKind, DoubleCoset, ExtShape, ShapeError, Subfield};
use crate::jumps::JumpDatum;
use crate::rectifier::{chain_field, full_rectifier, rectifier_over, RectError, TameChar};

pub const DELTA_I: Rot = Rot::ONE;
pub const DELTA_III1: Rot = Rot::ONE;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum TransferError {
    #[error("{0} is not strongly regular")]
    Irregular(TameElement),
    #[error("evaluation point outside closed-form domain: {0}")]
    Unsupported(String),
    #[error("({}, {}) is not a field of the canonical chain", .0.e_sub, .0.f_sub)]
    NotChain(Subfield),
    #[error("({}, {}) is ramified over F", .0.e_sub, .0.f_sub)]
    Ramified(Subfield),
    #[error("{0}")]
    Inconsistent(String),
    #[error(transparent)]
    Shape(#[from] ShapeError),
    #[error(transparent)]
    Chi(#[from] ChiError),
    #[error(transparent)]
    Rect(#[from] RectError),
}

/// `γ = ζ^zeta_exp · ϖ_E^varpi_pow · u` with `ζ` a generator of `μ_E`; `u`
/// is `1` or, when `generic_unit` is set, a unit of `U¹_E` in general
/// position.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize)]
pub struct TameElement {
    pub zeta_exp: u64,
    pub varpi_pow: i64,
    pub generic_unit: bool,
}

impl TameElement {
    pub const VARPI: TameElement = TameElement { zeta_exp: 0, varpi_pow: 1, generic_unit: false };

    /// `ϖ_E u` with `u ∈ U¹_E` generic.
    pub const VARPI_U: TameElement = TameElement { zeta_exp: 0, varpi_pow: 1, generic_unit: true };

    pub fn new(zeta_exp: u64, varpi_pow: i64) -> TameElement {
        TameElement { zeta_exp, varpi_pow, generic_unit: false }
    }

    /// `^gγ/γ` modulo `U¹_E` for `g = σ^kφ^i`, as an exponent in `μ_M`.
    pub fn root_ratio(&self, shape: &ExtShape, k: u64, i: u64) -> u64 {
        let n = shape.mu_order();
        let m = shape.modulus();
        let qi = pow_mod(shape.q(), i, n);
        let unit = mul_mod(self.zeta_exp % n, (qi + n - 1) % n, n);
        let b = self.varpi_pow.rem_euclid(m as i64) as u64;
        (shape.mu_to_ambient(unit) + mul_mod(b, shape.varpi_root(k, i), m)) % m
    }
}

impl std::fmt::Display for TameElement {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "ζ^{}·ϖ^{}", self.zeta_exp, self.varpi_pow)?;
        if self.generic_unit {
            write!(f, "·u")?;
        }
        Ok(())
    }
}

fn nontrivial(shape: &ExtShape) -> Vec<DoubleCoset> {
    enumerate_double_cosets(shape).into_iter().filter(|d| !d.is_trivial()).collect()
}

/// Cosets whose tame part of `^gγ/γ` is trivial.
fn tame_fixers(gamma: &TameElement, shape: &ExtShape) -> Vec<DoubleCoset> {
    nontrivial(shape).into_iter().filter(|d| gamma.root_ratio(shape, d.k, d.i) == 0).collect()
}

/// `λ(γ) ≠ 1` on every root. A generic unit part moves `γ` off every fixed
/// line, so only the tame part can fail.
pub fn regularity(gamma: &TameElement, shape: &ExtShape) -> bool {
    gamma.generic_unit || tame_fixers(gamma, shape).is_empty()
}

/// The exponent `v` of `Δ_IV = q^{-v/2}`. For a tame part that is already
/// regular every `λ(γ) - 1` is a unit and `v = 0`.
pub fn delta_iv(gamma: &TameElement, shape: &ExtShape, sub: Subfield) -> Result<u64, TransferError> {
    if !regularity(gamma, shape) {
        return Err(TransferError::Irregular(*gamma));
    }
    let outside: Vec<_> = tame_fixers(gamma, shape).into_iter().filter(|d| !sub.contains(shape, d.k, d.i)).collect();
    if outside.is_empty() {
        Ok(0)
    } else {
        Err(TransferError::Unsupported(format!("{gamma}: λ(γ) ≡ 1 mod 𝔭 on {} roots outside H", outside.len())))
    }
}

/// `Δ_II·Δ_III₂(γ)` for `H` attached to `sub`.
///
/// Two evaluations are supported: `ϖ_E` for `E/F` totally ramified, where
/// the value is `1`, and `ϖ_E u` over `K_0`, where each `[σ^kφ^{f/2}]`
/// contributes `+1` if it fixes `ϖ_E` and `-1` otherwise.
pub fn delta_ii_iii2_at(gamma: &TameElement, shape: &ExtShape, sub: Subfield) -> Result<Rot, TransferError> {
    if !regularity(gamma, shape) {
        return Err(TransferError::Irregular(*gamma));
    }
    let unsupported = || TransferError::Unsupported(format!("{gamma} over ({}, {}) for {shape}", sub.e_sub, sub.f_sub));
    if gamma.zeta_exp != 0 || gamma.varpi_pow != 1 {
        return Err(unsupported());
    }
    if shape.f() == 1 {
        return Ok(Rot::ONE);
    }
    if sub != chain_field(shape, 0) || !gamma.generic_unit {
        return Err(unsupported());
    }
    let mut sign = Sign::Plus;
    for dc in nontrivial(shape).iter().filter(|d| d.kind == CosetKind::SymUnram) {
        if shape.varpi_root(dc.k, dc.i) != 0 {
            sign = sign * Sign::Minus;
        }
    }
    let closed = if shape.f() % 2 == 0 {
        Sign::parity((shape.e() + shape.f_varpi() - 1) as i128)
    } else {
        Sign::Plus
    };
    if sign != closed {
        return Err(TransferError::Inconsistent(format!(
            "{shape}: Δ_II·Δ_III₂(ϖ_E u) is {sign} by cosets but {closed} in closed form"
        )));
    }
    Ok(sign.rot())
}

/// `Δ_I·Δ_II·Δ_III₁·Δ_III₂`.
pub fn delta_i_ii_iii(gamma: &TameElement, shape: &ExtShape, sub: Subfield) -> Result<Rot, TransferError> {
    Ok(DELTA_I + DELTA_III1 + delta_ii_iii2_at(gamma, shape, sub)?)
}

/// `|μ_E : μ_K|`.
fn mu_index(shape: &ExtShape, sub: Subfield) -> u64 {
    let qk = shape.q().pow(sub.residue_degree(shape) as u32);
    shape.mu_order() / (qk - 1)
}

/// A character of `E^×` restricted to `K^×`: its value on `gen^{|μ_E:μ_K|}`
/// and at `ϖ_K`. For `K = F` the prime is `ϖ_F = ζ_{E/F}^{-1}ϖ_E^e`.
pub fn restrict_to_subfield(shape: &ExtShape, sub: Subfield, chi: TameChar) -> TameChar {
    let mu = chi.mu.pow(mu_index(shape, sub) as i128);
    let mut varpi = chi.varpi.pow(sub.e_sub as i128);
    if sub == Subfield::base(shape) {
        varpi = varpi - chi.mu.pow(shape.zeta_ef() as i128);
    }
    TameChar::new(mu, varpi)
}

pub fn restrict_to_base(shape: &ExtShape, chi: TameChar) -> TameChar {
    restrict_to_subfield(shape, Subfield::base(shape), chi)
}

/// `K/F` as an extension in its own right, with `ϖ_K = ϖ_E^{e(E/K)}` and the
/// Frobenius root it inherits from `E`.
pub fn lower_shape(shape: &ExtShape, sub: Subfield) -> Result<ExtShape, TransferError> {
    let sub = Subfield::new(shape, sub.e_sub, sub.f_sub)?;
    let z = shape.zeta_ef() / mu_index(shape, sub);
    let lower = ExtShape::new(shape.p(), shape.m(), sub.ram_degree(shape), sub.residue_degree(shape), z)?;
    let want = Rot::new(shape.zeta_phi() as i128, shape.modulus()).pow(sub.e_sub as i128);
    (0..lower.zeta_phi_choices())
        .filter_map(|t| lower.with_zeta_phi_shift(t).ok())
        .find(|s| Rot::new(s.zeta_phi() as i128, s.modulus()) == want)
        .ok_or_else(|| TransferError::Inconsistent(format!("no Frobenius root of {lower} matches {shape}")))
}

/// `δ_{E/F}`: the product of all χ-data restricted to `F^×`.
pub fn delta_on_base(jd: &JumpDatum, conv: GaussConvention) -> Result<TameChar, TransferError> {
    let ctx = ChiContext::new(jd, conv)?;
    let product = ctx.product_restricted(&nontrivial(&jd.shape))?;
    let out = restrict_to_base(&jd.shape, product);
    if out.mu.as_sign().is_none() || out.varpi.as_sign().is_none() {
        return Err(TransferError::Inconsistent(format!("{jd}: δ_E/F = {out} is not quadratic")));
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TransitionReport {
    pub field: Subfield,
    pub whole: TameChar,
    /// `δ_{E/K}|_{F^×}`
    pub upper: TameChar,
    /// `δ_{K/F}`
    pub lower: TameChar,
}

impl TransitionReport {
    /// `δ_{E/F} = δ_{E/K}|_{F^×} · δ_{K/F}^{|E/K|}`.
    pub fn holds(&self) -> bool {
        let n = self.field.codegree() as i128;
        self.whole == self.upper + TameChar::new(self.lower.mu.pow(n), self.lower.varpi.pow(n))
    }
}

/// Checks the transition rule through `K`, computing `δ_{K/F}` from a
/// seeded datum of `K/F`.
pub fn transition(jd: &JumpDatum, sub: Subfield, seed: u64, conv: GaussConvention) -> Result<TransitionReport, TransferError> {
    let shape = &jd.shape;
    let whole = delta_on_base(jd, conv)?;
    let ctx = ChiContext::new(jd, conv)?;
    let inside: Vec<_> = nontrivial(shape).into_iter().filter(|d| sub.contains(shape, d.k, d.i)).collect();
    let upper = restrict_to_base(shape, ctx.product_restricted(&inside)?);
    let lower_jd = JumpDatum::random_valid(&lower_shape(shape, sub)?, seed);
    let lower = delta_on_base(&lower_jd, conv)?;
    Ok(TransitionReport { field: sub, whole, upper, lower })
}

/// `Δ_III₂` for `H` attached to `K`, the product of χ-data outside `W_K`,
/// against the quotient of rectifiers `{}_Fμ_ξ / {}_Kμ_ξ`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RectifierQuotient {
    pub field: Subfield,
    pub delta_iii2: TameChar,
    pub quotient: TameChar,
}

impl RectifierQuotient {
    pub fn agrees(&self) -> bool {
        self.delta_iii2 == self.quotient
    }
}

pub fn delta_iii2_vs_rectifier(jd: &JumpDatum, sub: Subfield, conv: GaussConvention) -> Result<RectifierQuotient, TransferError> {
    let shape = &jd.shape;
    let full = full_rectifier(jd, conv)?;
    let over_k = if sub == Subfield::base(shape) {
        full
    } else if sub == Subfield::top(shape) {
        TameChar::TRIVIAL
    } else {
        let j = (0..=shape.e().trailing_zeros())
            .find(|&j| chain_field(shape, j) == sub)
            .ok_or(TransferError::NotChain(sub))?;
        rectifier_over(jd, j, conv)?
    };
    let ctx = ChiContext::new(jd, conv)?;
    let outside: Vec<_> = nontrivial(shape).into_iter().filter(|d| !sub.contains(shape, d.k, d.i)).collect();
    Ok(RectifierQuotient { field: sub, delta_iii2: ctx.product_restricted(&outside)?, quotient: full - over_k })
}

/// `δ_{K/F}^{|E/K|}(ϖ_F) = (-1)^{(d-1)|E/K|}` for `K/F` unramified of degree `d`.
pub fn unramified_delta(shape: &ExtShape, sub: Subfield) -> Result<Rot, TransferError> {
    if sub.ram_degree(shape) != 1 {
        return Err(TransferError::Ramified(sub));
    }
    let d = sub.residue_degree(shape);
    Ok(Sign::parity(((d - 1) * sub.codegree()) as i128).rot())
}

/// `Δ_III₂|_{F^×}` at `ϖ_F` from the χ-data outside `W_K`, next to
/// [`unramified_delta`].
pub fn restriction_delta(jd: &JumpDatum, sub: Subfield, conv: GaussConvention) -> Result<(Rot, Rot), TransferError> {
    let shape = &jd.shape;
    let closed = unramified_delta(shape, sub)?;
    let ctx = ChiContext::new(jd, conv)?;
    let outside: Vec<_> = nontrivial(shape).into_iter().filter(|d| !sub.contains(shape, d.k, d.i)).collect();
    let product = restrict_to_base(shape, ctx.product_restricted(&outside)?);
    Ok((product.varpi, closed))
}
