//! The standard module, its occupied part `V` and the t-factors.
//!
//! The standard module splits along double cosets; the component at `[g]`
//! is a vector space over the residue field of `E_g` on which `ζ ∈ μ_E` acts
//! by `(ζ^{q^i-1})^{-1}` and `ϖ_E` acts by `(ζ_e^kζ_{φ^i})^{-1}`. The
//! alternating form is never built. Every sign is read off from the orders
//! of these two roots of unity.

use std::collections::BTreeMap;

use num_integer::Integer;
use serde::Serialize;
use thiserror::Error;

use crate::cyclo::{
    is_square_of_order, jacobi_cyclic, legendre_in_field, minus_one_class, mult_order, pow_mod, v2,
    v2_qn_plus_one, ArithError, CyclicGrp, GaussConvention, QuadForm, Rot, Sign,
};
use crate::galois::{enumerate_double_cosets, CosetKind, DoubleCoset, ExtShape};
use crate::jumps::JumpDatum;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SympError {
    #[error("the trivial coset carries no module")]
    TrivialCoset,
    #[error("[σ^e/2] is occupied in {0}")]
    HalfOccupied(String),
    #[error("coset ({k},{i}): {why}")]
    Broken { k: u64, i: u64, why: String },
    #[error("the complementary form on [σ^e/2] was not supplied")]
    MissingHalfForm,
    #[error(transparent)]
    Arith(#[from] ArithError),
}

fn broken(dc: &DoubleCoset, why: impl Into<String>) -> SympError {
    SympError::Broken { k: dc.k, i: dc.i, why: why.into() }
}

/// The component `U_[g]` of the standard module.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct UComponent {
    pub dc: DoubleCoset,
    /// `#U_[g] = p^size_log`.
    pub size_log: u64,
    /// Exponent in `μ_E` by which a generator of `μ_E` acts.
    pub act_mu: u64,
    /// Exponent in `μ_M` by which `ϖ_E` acts.
    pub act_varpi: u64,
}

pub fn u_component(dc: &DoubleCoset, shape: &ExtShape) -> Result<UComponent, SympError> {
    if dc.is_trivial() {
        return Err(SympError::TrivialCoset);
    }
    let n = shape.mu_order();
    let qi_minus_one = (pow_mod(shape.q(), dc.i, n) + n - 1) % n;
    let m = shape.modulus();
    Ok(UComponent {
        dc: *dc,
        size_log: shape.m() * shape.f() * dc.deg,
        act_mu: (n - qi_minus_one) % n,
        act_varpi: (m - shape.varpi_root(dc.k, dc.i)) % m,
    })
}

/// Which components of `V` are nonzero.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Occupancy {
    map: BTreeMap<(u64, u64), bool>,
}

impl Occupancy {
    pub fn get(&self, dc: &DoubleCoset) -> bool {
        self.map.get(&dc.key()).copied().unwrap_or(false)
    }

    pub fn occupied(&self) -> impl Iterator<Item = (u64, u64)> + '_ {
        self.map.iter().filter(|(_, &v)| v).map(|(&k, _)| k)
    }
}

/// `V_[g]` is nonzero exactly when `[g]` first appears in a layer with an
/// even jump.
pub fn occupancy(jd: &JumpDatum) -> Occupancy {
    let map = enumerate_double_cosets(&jd.shape)
        .into_iter()
        .map(|dc| {
            let occ = jd.layer_of_coset(&dc).is_some_and(|i| jd.layers[i].jump % 2 == 0);
            (dc.key(), occ)
        })
        .collect();
    Occupancy { map }
}

/// `occupancy`, refusing data that would occupy `[σ^{e/2}]`.
pub fn checked_occupancy(jd: &JumpDatum) -> Result<Occupancy, SympError> {
    let occ = occupancy(jd);
    let e = jd.shape.e();
    if e % 2 == 0 && occ.map.get(&(e / 2, 0)).copied().unwrap_or(false) {
        return Err(SympError::HalfOccupied(jd.to_string()));
    }
    Ok(occ)
}

/// The pair `(t⁰, t¹)`; `t¹` is a quadratic character, stored by its value
/// on a generator of `μ_E` or at `ϖ_E`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct TFactorPair {
    pub t0: Sign,
    pub t1: Rot,
}

impl TFactorPair {
    const TRIVIAL: TFactorPair = TFactorPair { t0: Sign::Plus, t1: Rot::ONE };

    fn new(t0: Sign, t1: Sign) -> TFactorPair {
        TFactorPair { t0, t1: t1.rot() }
    }

    /// `t = t⁰·t¹` at the chosen element.
    pub fn value(&self) -> Rot {
        self.t0.rot() + self.t1
    }
}

/// The field `F_{p^deg}` of `U_[g]` and `deg` itself.
fn component_degree(dc: &DoubleCoset, shape: &ExtShape) -> u64 {
    shape.m() * shape.f() * dc.deg
}

pub fn t_mu(dc: &DoubleCoset, occ: &Occupancy, shape: &ExtShape) -> Result<TFactorPair, SympError> {
    let u = u_component(dc, shape)?;
    if !occ.get(dc) {
        return Ok(TFactorPair::TRIVIAL);
    }
    let n = shape.mu_order();
    Ok(match dc.kind {
        CosetKind::Asym => {
            let order = n / n.gcd(&u.act_mu);
            TFactorPair::new(Sign::Plus, is_square_of_order(order, shape.p(), u.size_log))
        }
        CosetKind::SymRam => TFactorPair::TRIVIAL,
        CosetKind::SymUnram => {
            // A generator of μ_E maps to a generator of μ_{q^{f/2}+1}.
            let half = shape.q().pow((shape.f() / 2) as u32) + 1;
            TFactorPair::new(Sign::Minus, jacobi_cyclic(1, CyclicGrp { order: half }))
        }
        CosetKind::Trivial => unreachable!(),
    })
}

/// `(x / μ_{p^s+1})` for `x` of order `ord > 2`, where `2s = ord(p, ord)`;
/// also returns `|F_Q : F_p[x]|` for the caller's parity checks.
fn kernel_symbol(dc: &DoubleCoset, shape: &ExtShape, ord: u64) -> Result<(Sign, u64), SympError> {
    let p = shape.p();
    let two_s = mult_order(p, ord)?;
    if two_s % 2 == 1 || pow_mod(p, two_s / 2, ord) != ord - 1 {
        return Err(broken(dc, format!("an element of order {ord} is not inverted by a power of p")));
    }
    let s = two_s / 2;
    let r = component_degree(dc, shape) / two_s;
    let sign = if p == 2 || v2(ord) < v2_qn_plus_one(p, s) { Sign::Plus } else { Sign::Minus };
    Ok((sign, r))
}

pub fn t_varpi(dc: &DoubleCoset, occ: &Occupancy, shape: &ExtShape) -> Result<TFactorPair, SympError> {
    let u = u_component(dc, shape)?;
    if !occ.get(dc) {
        return Ok(TFactorPair::TRIVIAL);
    }
    let x = shape.varpi_root(dc.k, dc.i);
    let ord = shape.ambient_order(x);
    Ok(match dc.kind {
        CosetKind::Asym => TFactorPair::new(Sign::Plus, is_square_of_order(ord, shape.p(), u.size_log)),
        CosetKind::SymRam => {
            if ord <= 2 {
                return Err(SympError::HalfOccupied(format!("{shape}")));
            }
            let (sign, r) = kernel_symbol(dc, shape, ord)?;
            if r % 2 == 0 {
                return Err(broken(dc, "the multiplicity |k_E[ζ_e^k] : F_p[ζ_e^k]| is even"));
            }
            TFactorPair::new(Sign::Minus, sign)
        }
        CosetKind::SymUnram => match ord {
            1 => TFactorPair::TRIVIAL,
            2 => {
                let half = shape.q().pow((shape.f() / 2) as u32);
                TFactorPair::new(Sign::Plus, Sign::parity(((half - 1) / 2) as i128))
            }
            _ => TFactorPair::new(Sign::Minus, kernel_symbol(dc, shape, ord)?.0),
        },
        CosetKind::Trivial => unreachable!(),
    })
}

/// Whether `[g]` is `[σ^{e/2}]`.
pub fn is_half_turn(dc: &DoubleCoset, shape: &ExtShape) -> bool {
    dc.i == 0 && 2 * dc.k == shape.e()
}

/// The quadratic form on the complementary line `W_[σ^{e/2}]` together with
/// the residue field it lives over.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct HalfLine {
    pub form: QuadForm,
    pub p: u64,
    /// `k_E = F_{p^deg}`.
    pub deg: u64,
    pub convention: GaussConvention,
}

impl HalfLine {
    /// The form for a datum seen over the base of the last quadratic layer:
    /// `E/K` totally ramified with `e(E/K)/2` odd. Its determinant class is
    /// `ζ_S · (e/2) · (-1)^{(i⁺-1)/2}`.
    pub fn over_last_quadratic(rel: &JumpDatum, convention: GaussConvention) -> Result<HalfLine, SympError> {
        let shape = &rel.shape;
        let e = shape.e();
        if shape.f() != 1 || e % 4 != 2 {
            return Err(SympError::Broken { k: e / 2, i: 0, why: format!("{shape} is not a last quadratic layer") });
        }
        let ix = rel.derive_indexes();
        let (Some(s), Some(i_plus)) = (ix.s, ix.i_plus) else {
            return Err(SympError::Broken { k: e / 2, i: 0, why: format!("{rel} has no odd jump") });
        };
        let (p, deg) = (shape.p(), shape.m());
        let zeta = Sign::parity(rel.layers[s].zeta as i128);
        let det = zeta * legendre_in_field((e / 2) as i128, p, deg) * minus_one_class(p, deg).pow(((i_plus - 1) / 2) as i128);
        Ok(HalfLine { form: QuadForm::new(1, det), p, deg, convention })
    }

    pub fn gauss(&self) -> Result<Rot, SympError> {
        Ok(self.convention.norm_form(self.form, self.p, self.deg)?)
    }
}

/// `t(W_[g])`.
pub fn t_complement(
    dc: &DoubleCoset,
    occ: &Occupancy,
    shape: &ExtShape,
    half: Option<&HalfLine>,
) -> Result<Rot, SympError> {
    if dc.is_trivial() {
        return Err(SympError::TrivialCoset);
    }
    if occ.get(dc) || !dc.kind.is_symmetric() {
        return Ok(Rot::ONE);
    }
    if is_half_turn(dc, shape) {
        return half.ok_or(SympError::MissingHalfForm)?.gauss();
    }
    Ok(Rot::MINUS_ONE)
}

/// `t_ϖ` of a sum of components, each asymmetric pair counted once.
pub fn t_varpi_sum<'a>(
    cosets: impl IntoIterator<Item = &'a DoubleCoset>,
    occ: &Occupancy,
    shape: &ExtShape,
) -> Result<Rot, SympError> {
    let mut total = Rot::ONE;
    for dc in cosets {
        if dc.kind == CosetKind::Asym && shape.inverse_key(dc.k, dc.i) < dc.key() {
            continue;
        }
        total += t_varpi(dc, occ, shape)?.value();
    }
    Ok(total)
}

/// `t¹_μ` of a sum of components, as a value on a generator of `μ_E`.
pub fn t1_mu_sum<'a>(
    cosets: impl IntoIterator<Item = &'a DoubleCoset>,
    occ: &Occupancy,
    shape: &ExtShape,
) -> Result<Rot, SympError> {
    let mut total = Rot::ONE;
    for dc in cosets {
        if dc.kind == CosetKind::Asym && shape.inverse_key(dc.k, dc.i) < dc.key() {
            continue;
        }
        total += t_mu(dc, occ, shape)?.t1;
    }
    Ok(total)
}
