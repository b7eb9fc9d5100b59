//! The metacyclic Galois group of a tame extension and its double cosets.
//!
//! A tame extension `E/F` with ramification `e` and residue degree `f`
//! sits inside a Galois closure `L/F` with group `<σ> ⋊ <φ>`, where
//! `φσφ⁻¹ = σ^q`. We realize the group through its action on a prime
//! `ϖ_E` and on roots of unity:
//!
//! * `σ^k φ^i` sends `ϖ_E` to `ζ_e^k ζ_{φ^i} ϖ_E` and `ζ` to `ζ^{q^i}`,
//! * `ζ_{φ^i} = ζ_φ^{1+q+…+q^{i-1}}`,
//! * `ζ_φ^e = ζ_{E/F}^{q-1}` where `ϖ_E^e = ζ_{E/F} ϖ_F`.
//!
//! All roots of unity are exponents in a cyclic group `μ_M` with
//! `M = lcm(e, q^f - 1)`, which contains both `μ_e` and `μ_E`.

use std::collections::BTreeSet;
use std::fmt;

use num_integer::Integer;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cyclo::{checked_pow, euler_phi, is_prime, mod_inverse, mul_mod, mult_order, pow_mod, ArithError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ShapeError {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("ramification index {e} is divisible by p = {p}")]
    Wild { e: u64, p: u64 },
    #[error("degrees must be positive")]
    ZeroDegree,
    #[error("q^f = {p}^({m}·{f}) is too large for exact 64-bit arithmetic")]
    TooLarge { p: u64, m: u64, f: u64 },
    #[error(
        "no root ζ_φ with ζ_φ^e = ζ_E/F^(q-1) inside μ_E: gcd(e, (q^f-1)/(q-1)) = {g} does not divide {z}"
    )]
    NoFrobeniusRoot { g: u64, z: u64 },
    #[error("ζ_φ choice {shift} out of range (there are {count})")]
    FrobeniusChoice { shift: u64, count: u64 },
    #[error("({e_sub}, {f_sub}) is not an intermediate field: {why}")]
    Subfield { e_sub: u64, f_sub: u64, why: String },
    #[error(transparent)]
    Arith(#[from] ArithError),
}

/// The input data of a tame extension; `zeta_phi_shift` selects one of the
/// valid choices of `ζ_φ` (0 is the canonical one).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShapeSpec {
    pub p: u64,
    pub m: u64,
    pub e: u64,
    pub f: u64,
    #[serde(default)]
    pub zeta_ef: u64,
    #[serde(default)]
    pub zeta_phi_shift: u64,
}

/// A tame extension `E/F` together with its Frobenius data.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "ShapeSpec", into = "ShapeSpec")]
pub struct ExtShape {
    spec: ShapeSpec,
    q: u64,
    qf: u64,
    modulus: u64,
    zeta_phi: u64,
}

impl TryFrom<ShapeSpec> for ExtShape {
    type Error = ShapeError;
    fn try_from(s: ShapeSpec) -> Result<ExtShape, ShapeError> {
        ExtShape::new(s.p, s.m, s.e, s.f, s.zeta_ef)?.with_zeta_phi_shift(s.zeta_phi_shift)
    }
}

impl From<ExtShape> for ShapeSpec {
    fn from(s: ExtShape) -> ShapeSpec {
        s.spec
    }
}

impl ExtShape {
    /// `zeta_ef` is the exponent of `ζ_{E/F}` against a fixed generator of
    /// `μ_E = μ_{q^f-1}`.
    pub fn new(p: u64, m: u64, e: u64, f: u64, zeta_ef: u64) -> Result<ExtShape, ShapeError> {
        if !is_prime(p) {
            return Err(ShapeError::NotPrime(p));
        }
        if m == 0 || e == 0 || f == 0 {
            return Err(ShapeError::ZeroDegree);
        }
        if e % p == 0 {
            return Err(ShapeError::Wild { e, p });
        }
        let too_large = ShapeError::TooLarge { p, m, f };
        let q = checked_pow(p, m).ok_or(too_large.clone())?;
        let qf = checked_pow(q, f).ok_or(too_large.clone())?;
        // Products of two exponents are formed in u128, so M < 2^63 is enough.
        let modulus = e.lcm(&(qf - 1));
        if (modulus as u128) * (e as u128) >= 1 << 63 {
            return Err(too_large);
        }
        let mut spec = ShapeSpec { p, m, e, f, zeta_ef: 0, zeta_phi_shift: 0 };
        spec.zeta_ef = zeta_ef % (qf - 1);
        let mut shape = ExtShape { spec, q, qf, modulus, zeta_phi: 0 };
        shape.zeta_phi = shape.frobenius_root(0)?;
        Ok(shape)
    }

    /// The same extension with another valid choice of `ζ_φ`.
    pub fn with_zeta_phi_shift(mut self, shift: u64) -> Result<ExtShape, ShapeError> {
        let count = self.zeta_phi_choices();
        if shift >= count {
            return Err(ShapeError::FrobeniusChoice { shift, count });
        }
        self.spec.zeta_phi_shift = shift;
        self.zeta_phi = self.frobenius_root(shift)?;
        Ok(self)
    }

    /// Number of admissible `ζ_φ`; they differ by `e`-th roots of unity.
    pub fn zeta_phi_choices(&self) -> u64 {
        self.e().gcd(&self.norm_index())
    }

    // ζ_φ = gen^{(q-1)w} with e·w ≡ z mod N, N = (q^f-1)/(q-1): this is the
    // relation ζ_φ^e = ζ_{E/F}^{q-1} together with ζ_φ^N = 1, the latter
    // because φ^f fixes E.
    fn frobenius_root(&self, shift: u64) -> Result<u64, ShapeError> {
        let n = self.norm_index();
        let z = self.spec.zeta_ef % n;
        let g = self.e().gcd(&n);
        if z % g != 0 {
            return Err(ShapeError::NoFrobeniusRoot { g, z: self.spec.zeta_ef });
        }
        let step = n / g;
        let w0 = if step == 1 {
            0
        } else {
            let inv = mod_inverse((self.e() / g) % step, step).expect("e/g is a unit mod N/g");
            mul_mod(z / g, inv, step)
        };
        let w = w0 + shift * step;
        Ok(self.mu_to_ambient(mul_mod(self.q - 1, w, self.qf - 1)))
    }

    pub fn p(&self) -> u64 {
        self.spec.p
    }
    pub fn m(&self) -> u64 {
        self.spec.m
    }
    pub fn e(&self) -> u64 {
        self.spec.e
    }
    pub fn f(&self) -> u64 {
        self.spec.f
    }
    pub fn q(&self) -> u64 {
        self.q
    }
    /// Size of the residue field of `E`.
    pub fn qf(&self) -> u64 {
        self.qf
    }
    pub fn degree(&self) -> u64 {
        self.e() * self.f()
    }
    pub fn spec(&self) -> ShapeSpec {
        self.spec
    }
    pub fn zeta_ef(&self) -> u64 {
        self.spec.zeta_ef
    }
    pub fn zeta_phi_shift(&self) -> u64 {
        self.spec.zeta_phi_shift
    }
    /// Order of `μ_E`.
    pub fn mu_order(&self) -> u64 {
        self.qf - 1
    }
    /// `(q^f - 1)/(q - 1)`, the index of `μ_F` in `μ_E`.
    pub fn norm_index(&self) -> u64 {
        (self.qf - 1) / (self.q - 1)
    }
    /// The ambient modulus `M`.
    pub fn modulus(&self) -> u64 {
        self.modulus
    }
    /// Exponent of `ζ_φ` in `μ_M`.
    pub fn zeta_phi(&self) -> u64 {
        self.zeta_phi
    }

    /// Embeds an exponent of `μ_E` into `μ_M`.
    pub fn mu_to_ambient(&self, j: u64) -> u64 {
        mul_mod(j, self.modulus / (self.qf - 1), self.modulus)
    }

    /// `ζ_e^k` in `μ_M`.
    pub fn zeta_e(&self, k: u64) -> u64 {
        mul_mod(k % self.e(), self.modulus / self.e(), self.modulus)
    }

    /// `ζ_{φ^i}` in `μ_M`.
    pub fn zeta_phi_power(&self, i: u64) -> u64 {
        let mut geo = 0u64;
        let mut qi = 1 % self.modulus;
        for _ in 0..i {
            geo = (geo + qi) % self.modulus;
            qi = mul_mod(qi, self.q, self.modulus);
        }
        mul_mod(self.zeta_phi, geo, self.modulus)
    }

    /// `ζ_e^k ζ_{φ^i}`, the root by which `σ^kφ^i` moves `ϖ_E`.
    pub fn varpi_root(&self, k: u64, i: u64) -> u64 {
        (self.zeta_e(k) + self.zeta_phi_power(i)) % self.modulus
    }

    /// Order of the element with exponent `x` in `μ_M`.
    pub fn ambient_order(&self, x: u64) -> u64 {
        self.modulus / self.modulus.gcd(&(x % self.modulus))
    }

    /// Order of `ζ_{E/F}`.
    pub fn zeta_ef_order(&self) -> u64 {
        let n = self.qf - 1;
        n / n.gcd(&self.spec.zeta_ef)
    }

    /// Residue degree of `F[ζ_{E/F}]` over `F`.
    pub fn zeta_ef_degree(&self) -> u64 {
        mult_order(self.q, self.zeta_ef_order()).expect("roots of unity are prime to q")
    }

    /// `|E/F[ϖ_E]|`.
    pub fn f_varpi(&self) -> u64 {
        self.f() / self.zeta_ef_degree()
    }

    /// `q^{-i}` modulo `e`.
    fn q_inv_pow(&self, i: u64) -> u64 {
        let e = self.e();
        if e == 1 {
            return 0;
        }
        let ord = mult_order(self.q % e, e).expect("p does not divide e");
        pow_mod(self.q, (ord - i % ord) % ord, e)
    }

    /// Minimal element of the `×q^f` orbit of `k` in `Z/e`.
    pub fn orbit_rep(&self, k: u64) -> u64 {
        self.orbit(k).into_iter().min().unwrap()
    }

    /// The `×q^f` orbit of `k` in `Z/e`.
    pub fn orbit(&self, k: u64) -> Vec<u64> {
        let e = self.e();
        let step = self.qf % e;
        let mut out = vec![k % e];
        let mut x = mul_mod(k % e, step, e);
        while x != k % e {
            out.push(x);
            x = mul_mod(x, step, e);
        }
        out
    }

    /// The double coset of `(σ^kφ^i)⁻¹`, as a canonical key.
    pub fn inverse_key(&self, k: u64, i: u64) -> (u64, u64) {
        let e = self.e();
        let f = self.f();
        // (σ^kφ^i)⁻¹ = σ^{-k q^{-i}} φ^{-i}
        let k_inv = (e - mul_mod(k % e, self.q_inv_pow(i), e)) % e;
        (self.orbit_rep(k_inv), (f - i % f) % f)
    }
}

impl fmt::Display for ExtShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "p={} m={} e={} f={} ζ={}",
            self.p(),
            self.m(),
            self.e(),
            self.f(),
            self.zeta_ef()
        )?;
        if self.zeta_phi_shift() != 0 {
            write!(f, " shift={}", self.zeta_phi_shift())?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CosetKind {
    Trivial,
    SymRam,
    SymUnram,
    Asym,
}

impl CosetKind {
    pub fn is_symmetric(self) -> bool {
        matches!(self, CosetKind::SymRam | CosetKind::SymUnram)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            CosetKind::Trivial => "trivial",
            CosetKind::SymRam => "sym_ram",
            CosetKind::SymUnram => "sym_unram",
            CosetKind::Asym => "asym",
        }
    }
}

/// A double coset `Γ_E σ^kφ^i Γ_E`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DoubleCoset {
    pub k: u64,
    pub i: u64,
    pub kind: CosetKind,
    /// Minimal `t` witnessing symmetry.
    pub t_min: Option<u64>,
    /// `|E_g/E|`, the length of the `×q^f` orbit of `k`.
    pub deg: u64,
}

impl DoubleCoset {
    pub fn key(&self) -> (u64, u64) {
        (self.k, self.i)
    }

    pub fn is_trivial(&self) -> bool {
        self.kind == CosetKind::Trivial
    }
}

/// Builds the coset with representative `σ^kφ^i`.
pub fn coset(shape: &ExtShape, k: u64, i: u64) -> DoubleCoset {
    let k = shape.orbit_rep(k);
    let i = i % shape.f();
    let (kind, t_min) = classify_key(shape, k, i);
    DoubleCoset { k, i, kind, t_min, deg: shape.orbit(k).len() as u64 }
}

/// All double cosets, ordered by `(i, k)`.
pub fn enumerate_double_cosets(shape: &ExtShape) -> Vec<DoubleCoset> {
    let e = shape.e();
    let mut reps = BTreeSet::new();
    for k in 0..e {
        reps.insert(shape.orbit_rep(k));
    }
    (0..shape.f()).flat_map(|i| reps.iter().map(move |&k| (i, k))).map(|(i, k)| coset(shape, k, i)).collect()
}

pub fn classify(dc: &DoubleCoset, shape: &ExtShape) -> CosetKind {
    classify_key(shape, dc.k, dc.i).0
}

fn classify_key(shape: &ExtShape, k: u64, i: u64) -> (CosetKind, Option<u64>) {
    let (e, f) = (shape.e(), shape.f());
    if k % e == 0 && i == 0 {
        return (CosetKind::Trivial, None);
    }
    let half = if i == 0 {
        Some(0)
    } else if f % 2 == 0 && i == f / 2 {
        Some(f / 2)
    } else {
        None
    };
    let Some(shift) = half else {
        return (CosetKind::Asym, None);
    };
    // e | (q^{ft + shift} + 1)k for some t; q^f has period ord(q^f, e') mod e'.
    let e_red = e / e.gcd(&k);
    let period = mult_order(shape.qf() % e_red.max(1), e_red).unwrap_or(1);
    let t = (0..period).find(|&t| {
        let exp = f * t + shift;
        (pow_mod(shape.q(), exp, e_red) + 1) % e_red == 0
    });
    match t {
        Some(t) if i == 0 => (CosetKind::SymRam, Some(t)),
        Some(t) => (CosetKind::SymUnram, Some(t)),
        None => (CosetKind::Asym, None),
    }
}

/// `Σ_{d|e} φ(d)/ord(q, d)`.
pub fn count_formula(e: u64, q_eff: u64) -> Result<u64, ArithError> {
    if e.gcd(&q_eff) != 1 {
        return Err(ArithError::NotUnit(q_eff, e));
    }
    crate::cyclo::divisors(e).into_iter().map(|d| Ok(euler_phi(d) / mult_order(q_eff, d)?)).sum()
}

/// Number of symmetric unramified cosets against the predicted parity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Parity {
    pub count: u64,
    pub predicted: u64,
}

impl Parity {
    pub fn holds(&self) -> bool {
        self.count % 2 == self.predicted
    }
}

pub fn sym_unram_parity(shape: &ExtShape) -> Parity {
    let count = enumerate_double_cosets(shape).iter().filter(|c| c.kind == CosetKind::SymUnram).count();
    Parity { count: count as u64, predicted: shape.e() * (shape.f() - 1) % 2 }
}

/// An intermediate field `E ⊇ K ⊇ F`, recorded by `(e(E/K), f(E/K))` and
/// carrying the prime `ϖ_K = ϖ_E^{e(E/K)}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Subfield {
    pub e_sub: u64,
    pub f_sub: u64,
}

impl Subfield {
    pub fn new(shape: &ExtShape, e_sub: u64, f_sub: u64) -> Result<Subfield, ShapeError> {
        let bad = |why: &str| ShapeError::Subfield { e_sub, f_sub, why: why.to_string() };
        if e_sub == 0 || f_sub == 0 || shape.e() % e_sub != 0 || shape.f() % f_sub != 0 {
            return Err(bad("degrees must divide e and f"));
        }
        let sub = Subfield { e_sub, f_sub };
        // ϖ_K^{e(K/F)} = ζ_{E/F} ϖ_F needs ζ_{E/F} in K.
        if sub.residue_degree(shape) % shape.zeta_ef_degree() != 0 {
            return Err(bad("ζ_E/F does not lie in the residue field"));
        }
        Ok(sub)
    }

    /// `E` itself.
    pub fn top(shape: &ExtShape) -> Subfield {
        let _ = shape;
        Subfield { e_sub: 1, f_sub: 1 }
    }

    /// `F` itself.
    pub fn base(shape: &ExtShape) -> Subfield {
        Subfield { e_sub: shape.e(), f_sub: shape.f() }
    }

    /// `f(K/F)`.
    pub fn residue_degree(&self, shape: &ExtShape) -> u64 {
        shape.f() / self.f_sub
    }

    /// `e(K/F)`.
    pub fn ram_degree(&self, shape: &ExtShape) -> u64 {
        shape.e() / self.e_sub
    }

    /// `|E/K|`.
    pub fn codegree(&self) -> u64 {
        self.e_sub * self.f_sub
    }

    /// Whether `σ^kφ^i` fixes `K`. `F` itself is fixed by everything even
    /// when `ζ_{E/F}` moves `ϖ_E^e`.
    pub fn contains(&self, shape: &ExtShape, k: u64, i: u64) -> bool {
        if *self == Subfield::base(shape) {
            return true;
        }
        i % self.residue_degree(shape) == 0
            && mul_mod(shape.varpi_root(k, i), self.e_sub, shape.modulus()) == 0
    }

    /// Compositum with another intermediate field.
    pub fn join(&self, other: &Subfield) -> Subfield {
        Subfield { e_sub: self.e_sub.gcd(&other.e_sub), f_sub: self.f_sub.gcd(&other.f_sub) }
    }

    /// Counts left cosets `gΓ_E` inside `Γ_K`; must equal `|E/K|`.
    pub fn index_check(&self, shape: &ExtShape) -> bool {
        let count = (0..shape.f())
            .flat_map(|i| (0..shape.e()).map(move |k| (k, i)))
            .filter(|&(k, i)| self.contains(shape, k, i))
            .count() as u64;
        count == self.codegree()
    }
}

pub fn subfield_membership(dc: &DoubleCoset, shape: &ExtShape, sub: Subfield) -> Result<bool, ShapeError> {
    let sub = Subfield::new(shape, sub.e_sub, sub.f_sub)?;
    Ok(sub.contains(shape, dc.k, dc.i))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn shape(p: u64, e: u64, f: u64) -> ExtShape {
        ExtShape::new(p, 1, e, f, 0).unwrap()
    }

    fn keys(s: &ExtShape) -> Vec<(u64, u64)> {
        enumerate_double_cosets(s).iter().map(|c| c.key()).collect()
    }

    #[test]
    fn worked_examples() {
        assert_eq!(keys(&shape(2, 7, 1)), vec![(0, 0), (1, 0), (3, 0)]);
        assert_eq!(keys(&shape(3, 1, 2)), vec![(0, 0), (0, 1)]);
        assert_eq!(keys(&shape(5, 4, 1)).len(), 4);
        let s = shape(5, 4, 1);
        assert_eq!(coset(&s, 2, 0).kind, CosetKind::SymRam);
        assert_eq!(coset(&s, 1, 0).kind, CosetKind::Asym);
        assert_eq!(coset(&shape(3, 1, 2), 0, 1).kind, CosetKind::SymUnram);
        assert_eq!(count_formula(7, 2).unwrap(), 3);
        assert_eq!(count_formula(1, 9).unwrap(), 1);
        assert_eq!(count_formula(4, 5).unwrap(), 4);
        assert!(count_formula(4, 2).is_err());
    }

    #[test]
    fn parity_examples() {
        assert_eq!(sym_unram_parity(&shape(3, 1, 2)), Parity { count: 1, predicted: 1 });
        assert_eq!(sym_unram_parity(&shape(2, 3, 1)), Parity { count: 0, predicted: 0 });
        assert!(sym_unram_parity(&shape(3, 2, 2)).holds());
    }

    #[test]
    fn frobenius_root_relation() {
        for (p, e, f, z) in [(3, 4, 2, 1), (5, 3, 2, 5), (7, 6, 3, 11), (2, 5, 4, 3)] {
            let Ok(s) = ExtShape::new(p, 1, e, f, z) else { continue };
            for shift in 0..s.zeta_phi_choices() {
                let s = s.with_zeta_phi_shift(shift).unwrap();
                let m = s.modulus();
                let lhs = mul_mod(s.zeta_phi(), e, m);
                let rhs = s.mu_to_ambient(mul_mod(s.zeta_ef(), s.q() - 1, s.mu_order()));
                assert_eq!(lhs, rhs, "{s}");
                assert_eq!(mul_mod(s.zeta_phi(), s.norm_index(), m), 0);
            }
        }
    }

    #[test]
    fn missing_frobenius_root() {
        assert!(matches!(ExtShape::new(2, 1, 3, 2, 1), Err(ShapeError::NoFrobeniusRoot { .. })));
    }

    #[test]
    fn wild_rejected() {
        assert!(matches!(ExtShape::new(2, 1, 6, 1, 0), Err(ShapeError::Wild { .. })));
    }

    #[test]
    fn two_tower_membership() {
        let s = shape(3, 8, 1);
        for j in 0..=3u64 {
            let sub = Subfield::new(&s, 8 >> j, 1).unwrap();
            for k in 0..8 {
                assert_eq!(sub.contains(&s, k, 0), k % (1 << j) == 0);
            }
        }
        let k0 = Subfield::new(&shape(5, 3, 4), 3, 1).unwrap();
        for c in enumerate_double_cosets(&shape(5, 3, 4)) {
            assert_eq!(k0.contains(&shape(5, 3, 4), c.k, c.i), c.i == 0);
        }
    }

    #[test]
    fn sigma_half_is_symmetric() {
        for e in [2u64, 4, 6, 10, 12] {
            for p in [3u64, 5, 7] {
                if e % p == 0 {
                    continue;
                }
                assert_eq!(coset(&shape(p, e, 1), e / 2, 0).kind, CosetKind::SymRam);
            }
        }
    }
}
