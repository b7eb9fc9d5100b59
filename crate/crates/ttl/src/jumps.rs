//! Jump data: the tower of fields and the jumps of an admissible character.
//!
//! A datum is a tower `E ⊇ E_0 ⊋ E_1 ⊋ … ⊋ E_d ⊋ F` with `E/E_0`
//! unramified, jumps `r_0 < … < r_d` and leading roots `ζ_i ∈ μ_E`. Each
//! field is recorded by `(e(E/E_i), f(E/E_i))`; by convention `E_{d+1} = F`.

use std::fmt;

use num_integer::Integer;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cyclo::{divisors, mult_order, pow_mod};
use crate::galois::{DoubleCoset, ExtShape, ShapeError, Subfield};

/// One step `E_i` of the tower with its jump and leading root.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Layer {
    /// `e(E/E_i)`
    pub e_rel: u64,
    /// `f(E/E_i)`
    pub f_rel: u64,
    pub jump: u64,
    /// Exponent of `ζ_i` in `μ_E`.
    pub zeta: u64,
}

impl Layer {
    pub fn field(&self) -> Subfield {
        Subfield { e_sub: self.e_rel, f_sub: self.f_rel }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "JumpFile", into = "JumpFile")]
pub struct JumpDatum {
    pub shape: ExtShape,
    pub layers: Vec<Layer>,
}

/// The JSON form of a [`JumpDatum`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct JumpFile {
    pub shape: ExtShape,
    pub e_chain: Vec<u64>,
    pub f_chain: Vec<u64>,
    pub jumps: Vec<u64>,
    pub zetas: Vec<u64>,
}

impl TryFrom<JumpFile> for JumpDatum {
    type Error = String;
    fn try_from(j: JumpFile) -> Result<JumpDatum, String> {
        let n = j.e_chain.len();
        if j.f_chain.len() != n || j.jumps.len() != n || j.zetas.len() != n {
            return Err("e_chain, f_chain, jumps and zetas must have equal length".into());
        }
        let layers = (0..n)
            .map(|i| Layer { e_rel: j.e_chain[i], f_rel: j.f_chain[i], jump: j.jumps[i], zeta: j.zetas[i] })
            .collect();
        Ok(JumpDatum { shape: j.shape, layers })
    }
}

impl From<JumpDatum> for JumpFile {
    fn from(d: JumpDatum) -> JumpFile {
        JumpFile {
            shape: d.shape,
            e_chain: d.layers.iter().map(|l| l.e_rel).collect(),
            f_chain: d.layers.iter().map(|l| l.f_rel).collect(),
            jumps: d.layers.iter().map(|l| l.jump).collect(),
            zetas: d.layers.iter().map(|l| l.zeta).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum Violation {
    #[error("the tower has no layers")]
    Empty,
    #[error("E/E_0 must be unramified, got e(E/E_0) = {0}")]
    RamifiedBottom(u64),
    #[error("layer {i}: ({e}, {f}) is not an intermediate field: {why}")]
    NotSubfield { i: usize, e: u64, f: u64, why: String },
    #[error("layer {i}: the chain does not strictly decrease towards F")]
    NotStrict { i: usize },
    #[error("layer {i}: jumps must be positive and strictly increasing")]
    JumpOrder { i: usize },
    #[error("layer {i}: e(E/E_i) = {e} does not divide r_i = {r}")]
    JumpDivisibility { i: usize, e: u64, r: u64 },
    #[error("layer {i}: gcd(r_i, e(E/E_i+1)) = {got}, expected e(E/E_i) = {want}")]
    JumpGcd { i: usize, got: u64, want: u64 },
    #[error("layer {i}: ζ_i does not lie in the residue field of E_i")]
    RootOutside { i: usize },
    #[error("layer {i}: ζ_i does not generate the residue extension E_i/E_i+1")]
    RootNotGeneric { i: usize },
}

/// Indexes read off a jump datum.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct DerivedIndexes {
    /// Largest layer with an odd jump.
    pub s: Option<usize>,
    /// Smallest layer with `|E_{T+1}/F|` odd.
    pub t: usize,
    /// Layer with `f(E/E_R)` odd and `f(E/E_{R+1})` even.
    pub r: Option<usize>,
    /// `r_S`, the largest odd jump.
    pub i_plus: Option<u64>,
    /// `r_T`.
    pub i_sub: u64,
    /// `|E_{S+1}/F|`.
    pub d_plus: Option<u64>,
    /// `|E/E_0|`.
    pub f0: u64,
    /// `|E/F[ϖ_E]|`.
    pub f_varpi: u64,
}

impl JumpDatum {
    pub fn new(shape: ExtShape, layers: Vec<Layer>) -> JumpDatum {
        JumpDatum { shape, layers }
    }

    /// Number of layers, `d + 1`.
    pub fn len(&self) -> usize {
        self.layers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.layers.is_empty()
    }

    /// `E_i` for `i` in `0..=d+1`, where `E_{d+1} = F`.
    pub fn field(&self, i: usize) -> Subfield {
        self.layers.get(i).map(Layer::field).unwrap_or(Subfield::base(&self.shape))
    }

    /// `|E_i/F|`.
    pub fn degree_over_base(&self, i: usize) -> u64 {
        self.shape.degree() / self.field(i).codegree()
    }

    pub fn validate(&self) -> Result<(), Vec<Violation>> {
        let mut out = self.structural_violations();
        let shape = &self.shape;
        for (i, l) in self.layers.iter().enumerate() {
            let order = shape.mu_order() / shape.mu_order().gcd(&l.zeta);
            let res_deg = shape.f() / l.f_rel;
            if pow_mod(shape.q(), res_deg, order) != 1 % order {
                out.push(Violation::RootOutside { i });
                continue;
            }
            let next = self.field(i + 1);
            let q_next = shape.q().pow((shape.f() / next.f_sub) as u32);
            let rel = next.f_sub / l.f_rel.max(1);
            if next.f_sub % l.f_rel == 0 && mult_order(q_next % order.max(1), order).unwrap_or(0) != rel {
                out.push(Violation::RootNotGeneric { i });
            }
        }
        if out.is_empty() {
            Ok(())
        } else {
            Err(out)
        }
    }

    /// The checks that survive passing to a relative tower: everything but
    /// the residue conditions on the leading roots.
    pub fn structural_violations(&self) -> Vec<Violation> {
        let shape = &self.shape;
        let mut out = Vec::new();
        if self.layers.is_empty() {
            out.push(Violation::Empty);
            return out;
        }
        if self.layers[0].e_rel != 1 {
            out.push(Violation::RamifiedBottom(self.layers[0].e_rel));
        }
        let d = self.layers.len() - 1;
        let mut prev_jump = 0;
        for (i, l) in self.layers.iter().enumerate() {
            if let Err(ShapeError::Subfield { why, .. }) = Subfield::new(shape, l.e_rel, l.f_rel) {
                out.push(Violation::NotSubfield { i, e: l.e_rel, f: l.f_rel, why });
                continue;
            }
            let next = self.field(i + 1);
            let strict = next.e_sub % l.e_rel == 0
                && next.f_sub % l.f_rel == 0
                && (next != l.field() || (i == d && shape.degree() == 1));
            if !strict {
                out.push(Violation::NotStrict { i });
            }
            if l.jump == 0 || l.jump <= prev_jump {
                out.push(Violation::JumpOrder { i });
            }
            prev_jump = l.jump;
            if l.jump % l.e_rel != 0 {
                out.push(Violation::JumpDivisibility { i, e: l.e_rel, r: l.jump });
            }
            let got = l.jump.gcd(&next.e_sub);
            if got != l.e_rel {
                out.push(Violation::JumpGcd { i, got, want: l.e_rel });
            }
        }
        out
    }

    pub fn is_valid(&self) -> bool {
        self.validate().is_ok()
    }

    pub fn derive_indexes(&self) -> DerivedIndexes {
        let d = self.layers.len() - 1;
        let s = (0..=d).rev().find(|&i| self.layers[i].jump % 2 == 1);
        let t = (0..=d).find(|&i| self.degree_over_base(i + 1) % 2 == 1).unwrap();
        let f_at = |i: usize| self.field(i).f_sub;
        let r = (0..=d).find(|&i| f_at(i) % 2 == 1 && f_at(i + 1) % 2 == 0);
        DerivedIndexes {
            s,
            t,
            r,
            i_plus: s.map(|s| self.layers[s].jump),
            i_sub: self.layers[t].jump,
            d_plus: s.map(|s| self.degree_over_base(s + 1)),
            f0: self.layers[0].f_rel,
            f_varpi: self.shape.f_varpi(),
        }
    }

    /// The parity facts relating `S` and `T` for a totally ramified
    /// extension of even degree; `None` for other shapes.
    pub fn jump_lemma_holds(&self) -> Option<bool> {
        if self.shape.f() != 1 || self.shape.e() % 2 == 1 {
            return None;
        }
        let ix = self.derive_indexes();
        let d = self.layers.len() - 1;
        let step = |i: usize| self.field(i + 1).codegree() / self.field(i).codegree();
        let jump = |i: usize| self.layers[i].jump;
        let Some(s) = ix.s else { return Some(false) };
        let t = ix.t;
        let first = s <= t && (s == t) == (jump(t) % 2 == 1);
        let second = (0..s).all(|i| step(i) % 2 == 1) && step(s) % 2 == 0 && (s == d || jump(s + 1) % 2 == 0);
        let third = step(t) % 2 == 0 && (t + 1..=d).all(|i| step(i) % 2 == 1 && jump(i) % 2 == 0);
        Some(first && second && third)
    }

    /// The layer `i` with `[g]` in `W_{E_{i+1}}` but not in `W_{E_i}`.
    pub fn layer_of_coset(&self, dc: &DoubleCoset) -> Option<usize> {
        let shape = &self.shape;
        if self.field(0).contains(shape, dc.k, dc.i) {
            return None;
        }
        (0..self.layers.len()).find(|&i| self.field(i + 1).contains(shape, dc.k, dc.i))
    }

    /// The same character seen over an intermediate field `K`: the tower
    /// becomes `E_i K`, and steps that collapse lose their jump.
    pub fn relative_to(&self, sub: Subfield) -> Result<JumpDatum, ShapeError> {
        let shape = &self.shape;
        let sub = Subfield::new(shape, sub.e_sub, sub.f_sub)?;
        let base_deg = sub.residue_degree(shape);
        let rel_shape = ExtShape::new(shape.p(), shape.m() * base_deg, sub.e_sub, sub.f_sub, 0)?;
        // The Frobenius of E/K is φ^{f(K/F)}; keep its root.
        let n = shape.mu_order();
        let in_mu = |s: &ExtShape, x: u64| x / (s.modulus() / n);
        let want = in_mu(shape, shape.zeta_phi_power(base_deg));
        let rel_shape = (0..rel_shape.zeta_phi_choices())
            .filter_map(|t| rel_shape.with_zeta_phi_shift(t).ok())
            .find(|s| in_mu(s, s.zeta_phi()) == want)
            .expect("φ^f(K/F) fixes ϖ_K, so its root is among the choices");
        let d = self.layers.len();
        let mut layers = Vec::new();
        for i in 0..d {
            let here = self.field(i).join(&sub);
            let next = self.field(i + 1).join(&sub);
            if here != next {
                let l = self.layers[i];
                layers.push(Layer { e_rel: here.e_sub, f_rel: here.f_sub, jump: l.jump, zeta: l.zeta });
            }
        }
        if layers.is_empty() {
            // Every step collapsed: E_0 ⊆ K, so E/K is unramified and no
            // coset of W_K is moved by a jump.
            let l = self.layers[self.layers.len() - 1];
            layers.push(Layer { e_rel: sub.e_sub, f_rel: sub.f_sub, jump: l.jump, zeta: l.zeta });
        }
        Ok(JumpDatum { shape: rel_shape, layers })
    }

    /// A seeded random valid datum.
    pub fn random_valid(shape: &ExtShape, seed: u64) -> JumpDatum {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (e, f) = (shape.e(), shape.f());
        let f_cap = shape.f_varpi();
        let top = Subfield::base(shape);
        let admissible = |s: Subfield| shape.degree() == 1 || s != top;

        let mut chain: Vec<Subfield> = Vec::new();
        let bottoms: Vec<Subfield> = divisors(f_cap)
            .into_iter()
            .map(|f0| Subfield { e_sub: 1, f_sub: f0 })
            .filter(|&s| admissible(s))
            .collect();
        chain.push(*bottoms.choose(&mut rng).expect("E itself is always a bottom field"));
        loop {
            let cur = *chain.last().unwrap();
            if rng.gen_bool(0.35) {
                break;
            }
            let next: Vec<Subfield> = divisors(e)
                .into_iter()
                .filter(|&a| a % cur.e_sub == 0)
                .flat_map(|a| {
                    divisors(f_cap)
                        .into_iter()
                        .filter(move |&b| b % cur.f_sub == 0)
                        .map(move |b| Subfield { e_sub: a, f_sub: b })
                })
                .filter(|&s| s != cur && admissible(s) && s.f_sub <= f)
                .collect();
            match next.choose(&mut rng) {
                Some(&s) => chain.push(s),
                None => break,
            }
        }

        let mut layers = Vec::with_capacity(chain.len());
        let mut prev = 0u64;
        for (i, cur) in chain.iter().enumerate() {
            let next = chain.get(i + 1).copied().unwrap_or(top);
            let ratio = next.e_sub / cur.e_sub;
            let mut s = prev / cur.e_sub + 1 + rng.gen_range(0..4);
            while s.gcd(&ratio) != 1 {
                s += 1;
            }
            let jump = s * cur.e_sub;
            prev = jump;
            layers.push(Layer { e_rel: cur.e_sub, f_rel: cur.f_sub, jump, zeta: random_root(shape, *cur, next, &mut rng) });
        }
        let jd = JumpDatum { shape: *shape, layers };
        debug_assert!(jd.is_valid(), "{jd}: {:?}", jd.validate());
        jd
    }
}

// A root of the residue field of `cur` generating it over that of `next`.
fn random_root(shape: &ExtShape, cur: Subfield, next: Subfield, rng: &mut ChaCha8Rng) -> u64 {
    let n = shape.mu_order();
    let sub_order = shape.q().pow((shape.f() / cur.f_sub) as u32) - 1;
    let step = n / sub_order;
    let q_next = shape.q().pow((shape.f() / next.f_sub) as u32);
    let want = next.f_sub / cur.f_sub;
    for _ in 0..64 {
        let z = step * rng.gen_range(0..sub_order);
        let order = n / n.gcd(&z);
        if mult_order(q_next % order.max(1), order).unwrap_or(0) == want {
            return z;
        }
    }
    step
}

impl fmt::Display for JumpDatum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}]", self.shape)?;
        for l in &self.layers {
            write!(f, " ({},{};r={},ζ={})", l.e_rel, l.f_rel, l.jump, l.zeta)?;
        }
        Ok(())
    }
}
