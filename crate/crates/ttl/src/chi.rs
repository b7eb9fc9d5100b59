//! Canonical χ-data attached to a jump datum, and the factorization of the
//! rectifier as a product of their restrictions to `E^×`.
//!
//! A χ-datum lives on `E_g^×` but only its values on `μ_E`, on `μ_{E_g}`
//! and at `ϖ_E` are ever consumed, and `ϖ_E` stays prime in the unramified
//! `E_g/E`.

use std::collections::BTreeSet;

use num_integer::Integer;
use serde::Serialize;
use thiserror::Error;

use crate::cyclo::{is_square_of_order, pow_mod, v2, v2_qn_minus_one, GaussConvention, Rot, Sign};
use crate::galois::{enumerate_double_cosets, CosetKind, DoubleCoset, ExtShape, Subfield};
use crate::jumps::JumpDatum;
use crate::rectifier::{chain_field, full_rectifier, rectifier_over, RectError, TameChar};
use crate::symplectic::{
    checked_occupancy, is_half_turn, t_complement, t_mu, t_varpi, HalfLine, Occupancy, SympError,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ChiError {
    #[error("the trivial coset carries no χ-datum")]
    TrivialCoset,
    #[error("coset set is not closed under inversion: ({0},{1}) lacks its inverse")]
    NotClosed(u64, u64),
    #[error("coset ({k},{i}) admits no χ-datum with the assigned values: {why}")]
    Obstruction { k: u64, i: u64, why: String },
    #[error("the two members of the pair ({k},{i}) disagree on the pair product")]
    PairMismatch { k: u64, i: u64 },
    #[error(transparent)]
    Rect(#[from] RectError),
    #[error(transparent)]
    Symp(#[from] SympError),
}

/// `ζ ↦ sgn(ζ | U_[g])` on `μ_{E_g}`; trivial when `V_[g] = 0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct SgnChar {
    pub occupied: bool,
    pub p: u64,
    /// `U_[g] = F_{p^size_log}`.
    pub size_log: u64,
}

impl SgnChar {
    /// The value at an element of order `ord`.
    pub fn at_order(&self, ord: u64) -> Sign {
        if self.occupied {
            is_square_of_order(ord, self.p, self.size_log)
        } else {
            Sign::Plus
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ChiDatum {
    pub dc: DoubleCoset,
    /// Value on a generator of `μ_E` (symmetric cosets).
    pub mu_part: Rot,
    /// `χ(ϖ_E)`; a free choice for asymmetric cosets.
    pub varpi_val: Rot,
    /// `χ|_{μ_{E_g}}` for asymmetric cosets.
    pub sgn: Option<SgnChar>,
    /// Set when only the pair product with the inverse coset is pinned down.
    pub constrained_only: bool,
}

/// Everything the χ-data of one datum share.
pub struct ChiContext<'a> {
    pub jd: &'a JumpDatum,
    pub occ: Occupancy,
    pub half: Option<HalfLine>,
    /// Value given to the free `χ_g(ϖ_E)` of asymmetric cosets.
    pub asym_default: Rot,
}

impl<'a> ChiContext<'a> {
    pub fn new(jd: &'a JumpDatum, conv: GaussConvention) -> Result<ChiContext<'a>, ChiError> {
        let occ = checked_occupancy(jd)?;
        let shape = &jd.shape;
        let l = shape.e().trailing_zeros();
        let half = if l > 0 {
            let rel = jd.relative_to(chain_field(shape, l - 1)).map_err(RectError::from)?;
            Some(HalfLine::over_last_quadratic(&rel, conv)?)
        } else {
            None
        };
        Ok(ChiContext { jd, occ, half, asym_default: Rot::ONE })
    }

    pub fn with_asym_default(mut self, value: Rot) -> Self {
        self.asym_default = value;
        self
    }

    fn shape(&self) -> &ExtShape {
        &self.jd.shape
    }

    pub fn assign(&self, dc: &DoubleCoset) -> Result<ChiDatum, ChiError> {
        if dc.is_trivial() {
            return Err(ChiError::TrivialCoset);
        }
        let shape = self.shape();
        if !dc.kind.is_symmetric() {
            let sgn = SgnChar { occupied: self.occ.get(dc), p: shape.p(), size_log: shape.m() * shape.f() * dc.deg };
            return Ok(ChiDatum {
                dc: *dc,
                mu_part: Rot::ONE,
                varpi_val: self.asym_default,
                sgn: Some(sgn),
                constrained_only: true,
            });
        }
        if is_half_turn(dc, shape) {
            let w = t_complement(dc, &self.occ, shape, self.half.as_ref())?;
            return Ok(ChiDatum { dc: *dc, mu_part: Rot::MINUS_ONE, varpi_val: w, sgn: None, constrained_only: false });
        }
        let mu = t_mu(dc, &self.occ, shape)?;
        let fixed = if shape.varpi_root(dc.k, dc.i) == 0 { mu.t0 } else { Sign::Plus };
        let varpi = fixed.rot()
            + t_varpi(dc, &self.occ, shape)?.value()
            + t_complement(dc, &self.occ, shape, self.half.as_ref())?;
        Ok(ChiDatum { dc: *dc, mu_part: mu.t1, varpi_val: varpi, sgn: None, constrained_only: false })
    }

    /// `χ_g χ_{g⁻¹}` on `E^×`, read off from the member `g` alone.
    pub fn pair_product(&self, datum: &ChiDatum) -> TameChar {
        let shape = self.shape();
        let sgn = datum.sgn.expect("pair products are for asymmetric cosets");
        let (k, i) = datum.dc.key();
        let n = shape.mu_order();
        // ζ / ^gζ = ζ^{1-q^i}
        let e_mu = (n + 1 - pow_mod(shape.q(), i, n) % n) % n;
        let ord_mu = n / n.gcd(&e_mu);
        // ϖ_E / ^gϖ_E is the inverse of the root moving ϖ_E.
        let ord_varpi = shape.ambient_order(shape.varpi_root(k, i));
        TameChar::new(sgn.at_order(ord_mu).rot(), sgn.at_order(ord_varpi).rot())
    }

    pub fn datum_at(&self, k: u64, i: u64) -> Result<ChiDatum, ChiError> {
        let shape = self.shape();
        let dc = enumerate_double_cosets(shape)
            .into_iter()
            .find(|d| d.key() == (k, i))
            .expect("keys come from the coset enumeration");
        self.assign(&dc)
    }

    /// `∏ χ_g|_{E^×}` over a set of nontrivial cosets closed under inversion.
    pub fn product_restricted(&self, cosets: &[DoubleCoset]) -> Result<TameChar, ChiError> {
        let shape = self.shape();
        let keys: BTreeSet<_> = cosets.iter().map(DoubleCoset::key).collect();
        let mut total = TameChar::TRIVIAL;
        for dc in cosets {
            let inv = shape.inverse_key(dc.k, dc.i);
            if !keys.contains(&inv) {
                return Err(ChiError::NotClosed(dc.k, dc.i));
            }
            let datum = self.assign(dc)?;
            if datum.sgn.is_none() {
                total += TameChar::new(datum.mu_part, datum.varpi_val);
                continue;
            }
            if inv < dc.key() {
                continue;
            }
            let here = self.pair_product(&datum);
            let there = self.pair_product(&self.datum_at(inv.0, inv.1)?);
            if here != there {
                return Err(ChiError::PairMismatch { k: dc.k, i: dc.i });
            }
            total += here;
        }
        Ok(total)
    }

    /// Checks that the values assigned to a symmetric coset extend to a
    /// character of `E_g^×` meeting the χ-data conditions.
    pub fn feasibility_check(&self, dc: &DoubleCoset) -> Result<(), ChiError> {
        let datum = self.assign(dc)?;
        if !dc.kind.is_symmetric() {
            return Ok(());
        }
        let shape = self.shape();
        let obstruction = |why: String| Err(ChiError::Obstruction { k: dc.k, i: dc.i, why });
        let (a, v) = (datum.mu_part, datum.varpi_val);
        if is_half_turn(dc, shape) {
            // E/E_± is ramified quadratic and N(ϖ_E) = -ϖ_E².
            let minus_one = a.pow(((shape.mu_order()) / 2) as i128);
            if a != Rot::MINUS_ONE || v + v != minus_one {
                return obstruction(format!("χ(ϖ_E)² = {} but χ(-1) = {minus_one}", v + v));
            }
            return Ok(());
        }
        let x = shape.varpi_root(dc.k, dc.i);
        let ord = shape.ambient_order(x);
        let q = shape.q();
        // E_g has q_h² residue elements, q_h = q^{f·deg/2}.
        let h = shape.f() * dc.deg;
        if h % 2 == 1 {
            return obstruction(format!("|k_E_g : k_F| = {h} is odd"));
        }
        let h = h / 2;
        if pow_mod(q, h, ord) != (ord - 1) % ord.max(1) && ord > 1 {
            return obstruction(format!("the root of order {ord} is not a norm-one element"));
        }
        if ord > 2 && pow_mod(q, h, ord) == 1 % ord {
            return obstruction(format!("the root of order {ord} already lies in E_±"));
        }
        let t = if q % 2 == 0 { 0 } else { v2_qn_minus_one(q, 2 * h) };
        let modulus = 1u128 << t;
        // Exponents in μ_{q_h²-1}, reduced modulo the 2-part of its order.
        let mut geo = 0u128;
        let mut step = 1u128;
        let qf = shape.qf() as u128 % modulus.max(1);
        for _ in 0..dc.deg {
            geo = (geo + step) % modulus;
            step = step * qf % modulus;
        }
        let q_h = pow_mod_u128(q as u128, h as u128, modulus);
        let mu_e_gen = geo;
        let mu_pm_gen = (q_h + 1) % modulus;
        let unit = root_unit(shape, x, ord);
        let big = pow_mod_u128(q as u128, 2 * h as u128, ord as u128 * modulus);
        let cofactor = ((big + ord as u128 * modulus - 1) % (ord as u128 * modulus)) / ord as u128;
        let x_exp = cofactor * unit % modulus.max(1);
        let Some(zeta0) = solve_linear_2adic((1 + modulus - q_h) % modulus.max(1), x_exp, t) else {
            return obstruction("no ζ_0 with ζ_0^{1-q_h} equal to the root".into());
        };
        let constraints = [
            (mu_e_gen, a),
            (mu_pm_gen, Rot::ONE),
            (x_exp, -(v + v)),
            (zeta0, Rot::MINUS_ONE - v),
        ];
        if character_exists(&constraints, t) {
            Ok(())
        } else {
            obstruction(format!("μ_E ↦ {a}, ϖ_E ↦ {v} cannot be extended"))
        }
    }
}

/// The `u` with `x = (primitive ord-th root)^u` inside the ambient group.
fn root_unit(shape: &ExtShape, x: u64, ord: u64) -> u128 {
    let m = shape.modulus();
    ((x % m) / (m / ord)) as u128
}

fn pow_mod_u128(mut b: u128, mut e: u128, m: u128) -> u128 {
    if m <= 1 {
        return 0;
    }
    let mut r = 1u128;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % m;
        }
        b = b * b % m;
        e >>= 1;
    }
    r
}

/// Some `z` with `z·a ≡ b (mod 2^t)`.
fn solve_linear_2adic(a: u128, b: u128, t: u32) -> Option<u128> {
    if t == 0 {
        return Some(0);
    }
    let modulus = 1u128 << t;
    let s = if a == 0 { t } else { a.trailing_zeros().min(t) };
    if b % (1u128 << s) != 0 {
        return None;
    }
    if s == t {
        return Some(0);
    }
    let m = modulus >> s;
    let inv = inverse_odd((a >> s) % m, m);
    Some(((b >> s) % m) * inv % m)
}

fn inverse_odd(a: u128, m: u128) -> u128 {
    // Newton iteration for the 2-adic inverse.
    let mut x = 1u128;
    for _ in 0..7 {
        x = x.wrapping_mul(2u128.wrapping_sub(a.wrapping_mul(x)));
    }
    x % m
}

/// Whether a character `c` of `Z/2^t` has `c(b_j) = v_j` for all pairs.
/// Every value must have 2-power order.
fn character_exists(constraints: &[(u128, Rot)], t: u32) -> bool {
    // c = j / 2^t; accumulate j modulo 2^known.
    let mut j = 0u128;
    let mut known = 0u32;
    for &(b, value) in constraints {
        let den = value.den();
        assert!(den.is_power_of_two());
        if v2(den) > t {
            return false;
        }
        let w = (value.num() as u128) << (t - v2(den));
        let b = if t == 0 { 0 } else { b % (1u128 << t) };
        let s = if b == 0 { t } else { b.trailing_zeros().min(t) };
        if t == 0 {
            continue;
        }
        if w % (1u128 << s) != 0 {
            return false;
        }
        let bits = t - s;
        if bits == 0 {
            continue;
        }
        let m = 1u128 << bits;
        let target = ((w >> s) % m) * inverse_odd((b >> s) % m, m) % m;
        let common = known.min(bits);
        let mask = (1u128 << common) - 1;
        if (j & mask) != (target & mask) {
            return false;
        }
        if bits > known {
            j = target;
            known = bits;
        }
    }
    true
}

/// The comparison made by [`verify_theorem`] for one intermediate field.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FieldReport {
    pub field: Subfield,
    /// The rectifier of the datum seen over the field.
    pub rectifier: TameChar,
    /// The same, assembled from the layers of the canonical chain above the
    /// field, when the field lies on the chain.
    pub chain: Option<TameChar>,
    pub product: TameChar,
}

impl FieldReport {
    pub fn agrees(&self) -> bool {
        self.rectifier == self.product && self.chain.map_or(true, |c| c == self.product)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TheoremReport {
    pub datum: String,
    pub fields: Vec<FieldReport>,
}

impl TheoremReport {
    pub fn holds(&self) -> bool {
        self.fields.iter().all(FieldReport::agrees)
    }
}

/// Compares the rectifier with the product of the restricted χ-data, over
/// `F` and over each field `K_j` of the canonical chain. Over `K_j` the
/// rectifier is computed twice: from the datum seen over `K_j`, and from
/// the chain layers above `K_j`.
pub fn verify_theorem(jd: &JumpDatum, conv: GaussConvention) -> Result<TheoremReport, ChiError> {
    verify_theorem_with(&ChiContext::new(jd, conv)?, conv)
}

pub fn verify_theorem_with(ctx: &ChiContext<'_>, conv: GaussConvention) -> Result<TheoremReport, ChiError> {
    let jd = ctx.jd;
    let shape = &jd.shape;
    let cosets: Vec<_> = enumerate_double_cosets(shape).into_iter().filter(|d| !d.is_trivial()).collect();
    for dc in cosets.iter().filter(|d| d.kind != CosetKind::Asym) {
        ctx.feasibility_check(dc)?;
    }
    let l = shape.e().trailing_zeros();
    let mut fields = Vec::new();
    let mut fields_to_check = vec![Subfield::base(shape)];
    fields_to_check.extend((0..=l).map(|j| chain_field(shape, j)));
    fields_to_check.dedup();
    for k in fields_to_check {
        let inside: Vec<_> = cosets.iter().copied().filter(|d| k.contains(shape, d.k, d.i)).collect();
        let rectifier = if k == Subfield::base(shape) {
            full_rectifier(jd, conv)?
        } else {
            full_rectifier(&jd.relative_to(k).map_err(RectError::from)?, conv)?
        };
        let chain = (0..=l)
            .find(|&j| chain_field(shape, j) == k)
            .map(|j| rectifier_over(jd, j, conv))
            .transpose()?;
        let chain = if k == Subfield::base(shape) { Some(full_rectifier(jd, conv)?) } else { chain };
        fields.push(FieldReport { field: k, rectifier, chain, product: ctx.product_restricted(&inside)? });
    }
    Ok(TheoremReport { datum: jd.to_string(), fields })
}
