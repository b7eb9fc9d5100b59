//! The verification suites behind `ttl verify`.
//!
//! Each suite expands a [`SweepConfig`] into independent instances, checks
//! them in parallel and returns the verdicts in a fixed order.

use std::collections::BTreeMap;

use num_integer::Integer;
use rayon::prelude::*;
use serde::Serialize;

use crate::chi::{verify_theorem, verify_theorem_with, ChiContext};
use crate::cyclo::{
    divisors, euler_phi, gauss_norm_base, is_prime, jacobi_cyclic, minus_one_class, mult_order, prime_power,
    sgn_mult, CyclicGrp, GaussConvention, Rot, Sign,
};
use crate::galois::{count_formula, enumerate_double_cosets, sym_unram_parity, ExtShape, Subfield};
use crate::jumps::JumpDatum;
use crate::norm::{case_field, orbit_count_parity, verify_identity, CaseTag};
use crate::rectifier::chain_field;
use crate::symplectic::occupancy;
use crate::transfer::{
    delta_i_ii_iii, delta_iv, delta_on_base, restriction_delta, transition, TameElement,
};

pub const SCHEMA: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Theorem,
    Identity,
    Counts,
    Parities,
    Oracles,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SweepConfig {
    pub primes: Vec<u64>,
    pub m_max: u64,
    pub e_max: u64,
    pub f_max: u64,
    /// Largest `ζ_{E/F}` exponent tried.
    pub zeta_ef_max: u64,
    /// Skip shapes whose residue field of `E` is larger than this.
    pub qf_max: u64,
    pub seeds: u64,
    pub convention: GaussConvention,
    /// Also run every valid alternative choice of `ζ_φ`.
    pub all_zeta_phi: bool,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            primes: vec![2, 3, 5, 7],
            m_max: 1,
            e_max: 12,
            f_max: 4,
            zeta_ef_max: 2,
            qf_max: 1 << 20,
            seeds: 8,
            convention: GaussConvention::Standard,
            all_zeta_phi: false,
        }
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.primes.is_empty() || self.m_max == 0 || self.e_max == 0 || self.f_max == 0 || self.seeds == 0 {
            return Err("every range must be nonempty".into());
        }
        if let Some(p) = self.primes.iter().find(|&&p| !is_prime(p)) {
            return Err(format!("{p} is not prime"));
        }
        Ok(())
    }

    /// Every shape in range, in a fixed order. `e` prime to `p` is enforced
    /// here; shapes with the same normalized `ζ_{E/F}` appear once.
    pub fn shapes(&self) -> Vec<ExtShape> {
        let mut out = Vec::new();
        for &p in &self.primes {
            for m in 1..=self.m_max {
                for e in (1..=self.e_max).filter(|e| e.gcd(&p) == 1) {
                    for f in 1..=self.f_max {
                        let mut seen = std::collections::BTreeSet::new();
                        for z in 0..=self.zeta_ef_max {
                            let Ok(s) = ExtShape::new(p, m, e, f, z) else { continue };
                            if s.qf() > self.qf_max || !seen.insert(s.zeta_ef()) {
                                continue;
                            }
                            if self.all_zeta_phi {
                                out.extend((0..s.zeta_phi_choices()).filter_map(|t| s.with_zeta_phi_shift(t).ok()));
                            } else {
                                out.push(s);
                            }
                        }
                    }
                }
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Verdict {
    pub check: &'static str,
    pub instance: String,
    pub pass: bool,
    #[serde(skip_serializing_if = "String::is_empty")]
    pub detail: String,
}

impl Verdict {
    fn new(check: &'static str, instance: impl ToString, pass: bool, detail: impl ToString) -> Verdict {
        Verdict { check, instance: instance.to_string(), pass, detail: detail.to_string() }
    }

    fn from_result<T: std::fmt::Debug, E: std::fmt::Display>(
        check: &'static str,
        instance: impl ToString,
        r: Result<(bool, T), E>,
    ) -> Verdict {
        match r {
            Ok((pass, what)) => Verdict::new(check, instance, pass, if pass { String::new() } else { format!("{what:?}") }),
            Err(err) => Verdict::new(check, instance, false, err),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub schema: u32,
    pub suite: Suite,
    pub config: SweepConfig,
    pub total: usize,
    pub failed: usize,
    /// Instances per check.
    pub counts: BTreeMap<&'static str, usize>,
    pub instances: Vec<Verdict>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.failed == 0
    }
}

pub fn run(suite: Suite, cfg: &SweepConfig) -> SuiteReport {
    let instances = match suite {
        Suite::Theorem => theorem(cfg),
        Suite::Identity => identity(cfg),
        Suite::Counts => counts(cfg),
        Suite::Parities => parities(cfg),
        Suite::Oracles => oracles(cfg),
    };
    let mut counts = BTreeMap::new();
    for v in &instances {
        *counts.entry(v.check).or_insert(0) += 1;
    }
    SuiteReport {
        schema: SCHEMA,
        suite,
        config: cfg.clone(),
        total: instances.len(),
        failed: instances.iter().filter(|v| !v.pass).count(),
        counts,
        instances,
    }
}

fn data(cfg: &SweepConfig) -> Vec<JumpDatum> {
    cfg.shapes().iter().flat_map(|s| (0..cfg.seeds).map(move |seed| JumpDatum::random_valid(s, seed))).collect()
}

/// The rectifier against the χ-data, over `F` and the chain; the value at
/// `ϖ_E` of the transfer factor; independence and transitivity of the
/// restriction to `F^×`.
fn theorem(cfg: &SweepConfig) -> Vec<Verdict> {
    let conv = cfg.convention;
    let mut out: Vec<Verdict> = data(cfg)
        .par_iter()
        .flat_map_iter(|jd| {
            let mut v = vec![Verdict::from_result(
                "rectifier_factorization",
                jd,
                verify_theorem(jd, conv).map(|r| (r.holds(), r)),
            )];
            // The free values at asymmetric cosets must not matter.
            let flipped = ChiContext::new(jd, conv)
                .map(|ctx| ctx.with_asym_default(Rot::MINUS_ONE))
                .and_then(|ctx| verify_theorem_with(&ctx, conv));
            v.push(Verdict::from_result("asym_default_flip", jd, flipped.map(|r| (r.holds(), r))));
            let shape = &jd.shape;
            for j in 0..=shape.e().trailing_zeros() {
                let k = chain_field(shape, j);
                if k != Subfield::base(shape) && k != Subfield::top(shape) {
                    v.push(Verdict::from_result(
                        "transition",
                        format!("{jd} over {k:?}"),
                        transition(jd, k, 1, conv).map(|t| (t.holds(), t)),
                    ));
                }
            }
            if shape.f() > 1 {
                v.push(Verdict::from_result(
                    "unramified_restriction",
                    jd,
                    restriction_delta(jd, chain_field(shape, 0), conv).map(|(got, want)| (got == want, (got, want))),
                ));
            }
            v.into_iter()
        })
        .collect();
    // One shape at a time: the restriction to F^× must not depend on the datum.
    out.extend(cfg.shapes().par_iter().map(|s| {
        let values: Result<Vec<_>, _> =
            (0..cfg.seeds.max(2)).map(|seed| delta_on_base(&JumpDatum::random_valid(s, seed), conv)).collect();
        Verdict::from_result(
            "restriction_independence",
            s,
            values.map(|vals| (vals.windows(2).all(|w| w[0] == w[1]), vals.first().copied())),
        )
    }).collect::<Vec<_>>());
    out.extend(cfg.shapes().into_iter().filter(|s| s.f() == 1).flat_map(|s| {
        let mut fields = vec![Subfield::base(&s)];
        fields.extend((0..=s.e().trailing_zeros()).map(|j| chain_field(&s, j)));
        fields.dedup();
        fields.into_iter().filter(move |&k| k != Subfield::top(&s)).map(move |k| {
            let r = delta_iv(&TameElement::VARPI, &s, k)
                .and_then(|v| Ok((v, delta_i_ii_iii(&TameElement::VARPI, &s, k)?)))
                .map(|(v, d)| (v == 0 && d.is_one(), (v, d)));
            Verdict::from_result("delta_at_prime", format!("{s} over {k:?}"), r)
        })
    }));
    out
}

/// The normalization identity in each case the shape supports.
fn identity(cfg: &SweepConfig) -> Vec<Verdict> {
    let conv = cfg.convention;
    data(cfg)
        .par_iter()
        .flat_map_iter(|jd| {
            let shape = &jd.shape;
            let mut cases = vec![CaseTag::II, CaseTag::III];
            cases.extend(divisors(shape.e()).into_iter().map(|d| CaseTag::I { d }));
            cases
                .into_iter()
                .filter(|&c| case_field(c, shape).is_ok())
                .map(|c| {
                    Verdict::from_result(
                        "normalization_identity",
                        format!("{c} {jd}"),
                        verify_identity(c, jd, conv).map(|r| (r.holds(), r)),
                    )
                })
                .collect::<Vec<_>>()
        })
        .collect()
}

/// The residue field sizes used by the counting suites.
pub const COUNT_QS: [u64; 11] = [2, 3, 4, 5, 7, 8, 9, 11, 13, 16, 25];

/// Orbits of `k ↦ qk` on `Z/e`, counted by walking them.
fn orbit_walk(e: u64, q: u64) -> u64 {
    let mut seen = vec![false; e as usize];
    let mut orbits = 0;
    for start in 0..e {
        if seen[start as usize] {
            continue;
        }
        orbits += 1;
        let mut k = start;
        while !seen[k as usize] {
            seen[k as usize] = true;
            k = k * q % e;
        }
    }
    orbits
}

fn counts(cfg: &SweepConfig) -> Vec<Verdict> {
    let mut out = Vec::new();
    for &q in &COUNT_QS {
        let (p, m) = prime_power(q).expect("table holds prime powers");
        for e in (1..=cfg.e_max).filter(|e| e.gcd(&q) == 1) {
            let formula = count_formula(e, q);
            let walked = orbit_walk(e, q);
            let enumerated = ExtShape::new(p, m as u64, e, 1, 0).map(|s| enumerate_double_cosets(&s).len() as u64);
            let pass = formula == Ok(walked) && enumerated == Ok(walked);
            out.push(Verdict::new(
                "double_coset_count",
                format!("e={e} q={q}"),
                pass,
                if pass { String::new() } else { format!("{formula:?} {walked} {enumerated:?}") },
            ));
        }
    }
    out
}

fn parities(cfg: &SweepConfig) -> Vec<Verdict> {
    let mut out = Vec::new();
    for q in (2..=170u64).filter(|&q| prime_power(q).is_ok_and(|(_, k)| k % 2 == 0)) {
        for d in (3..=200).filter(|d| d.gcd(&q) == 1) {
            let r = mult_order(q % d, d).map(|o| (euler_phi(d) / o % 2 == 0, euler_phi(d) / o));
            out.push(Verdict::from_result("orbit_count_even", format!("q={q} d={d}"), r));
        }
    }
    for q in [2u64, 3, 5, 7, 9] {
        let (p, m) = prime_power(q).expect("prime powers");
        for e in (1..=12).filter(|e| e.gcd(&p) == 1) {
            for f in 1..=12 {
                let r = ExtShape::new(p, m as u64, e, f, 0).map(|s| {
                    let par = sym_unram_parity(&s);
                    (par.holds(), par)
                });
                out.push(Verdict::from_result("sym_unram_parity", format!("q={q} e={e} f={f}"), r));
            }
        }
    }
    for q in [3u64, 4, 5, 7, 9, 11, 13, 16, 19, 25, 27, 31, 37, 43] {
        for e in (3..=15).step_by(2).filter(|e| e.gcd(&q) == 1) {
            for d in divisors(e).into_iter().filter(|d| (q - 1) % d == 0) {
                let r = orbit_count_parity(e, d, q).map(|ok| (ok, ()));
                out.push(Verdict::from_result("odd_case_orbit_parity", format!("q={q} e={e} d={d}"), r));
            }
        }
    }
    // V_[σ^{e/2}] stays empty, using the plain occupancy rule.
    out.extend(
        data(cfg)
            .par_iter()
            .filter(|jd| jd.shape.e() % 2 == 0)
            .map(|jd| {
                let half = crate::galois::coset(&jd.shape, jd.shape.e() / 2, 0);
                Verdict::new("half_turn_unoccupied", jd, !occupancy(jd).get(&half), "")
            })
            .collect::<Vec<_>>(),
    );
    out
}

fn oracles(cfg: &SweepConfig) -> Vec<Verdict> {
    let mut out = Vec::new();
    let fields: Vec<u64> = (2..=1u64 << cfg.e_max.min(12)).filter(|&q| prime_power(q).is_ok()).collect();
    for (n, &q) in fields.iter().enumerate() {
        let field = oracle::Field::new(q);
        for x in [1, 2, 3, (q - 1) / 2, n as u64 + 5] {
            let x = x % (q - 1);
            let got = sgn_mult(x as i128, q);
            let want = field.multiplication_parity(x);
            out.push(Verdict::new("sgn_mult", format!("q={q} x={x}"), got == Ok(want), format!("{got:?} vs {want}")));
        }
    }
    for order in 1..=64u64 {
        let squares: std::collections::BTreeSet<u64> = (0..order).map(|y| 2 * y % order).collect();
        for x in 0..order {
            let want = if squares.contains(&x) { Sign::Plus } else { Sign::Minus };
            let got = jacobi_cyclic(x as i128, CyclicGrp { order });
            out.push(Verdict::new("jacobi_cyclic", format!("|H|={order} x={x}"), got == want, ""));
        }
    }
    for q in [3u64, 5, 7, 9, 11, 13, 25, 27] {
        let (p, m) = prime_power(q).expect("prime powers");
        let field = oracle::Field::new(q);
        let direct = field.gauss_sum();
        let square_ok = direct.mul(&direct) == oracle::Cyclotomic::integer(p, minus_one_class(p, m as u64).as_i8() as i64 * q as i64);
        // Hasse-Davenport against the prime field: g_q = -(-g_p)^m.
        let g_p = oracle::Field::new(p).gauss_sum();
        let mut hd = oracle::Cyclotomic::integer(p, -1);
        for _ in 0..m {
            hd = hd.mul(&g_p.neg());
        }
        let hd_ok = direct == hd;
        let closed = gauss_norm_base(p, m as u64).map(|n| n + n == minus_one_class(p, m as u64).rot());
        out.push(Verdict::new(
            "gauss_sum",
            format!("q={q}"),
            square_ok && hd_ok && closed == Ok(true),
            format!("square {square_ok}, Hasse-Davenport {hd_ok}, closed {closed:?}"),
        ));
    }
    out
}

/// Small explicit finite fields and cyclotomic integers.
pub mod oracle {
    use crate::cyclo::{prime_power, Sign};

    /// `F_q` as polynomials over `F_p` modulo a primitive polynomial, with
    /// elements encoded as base-`p` integers.
    pub struct Field {
        p: u64,
        n: usize,
        modulus: Vec<u64>,
        q: u64,
    }

    impl Field {
        pub fn new(q: u64) -> Field {
            let (p, n) = prime_power(q).expect("prime power");
            let n = n as usize;
            // Monic modulus x^n + c_{n-1}x^{n-1} + ... + c_0, tried in order
            // until x has order q - 1.
            for code in 0..q {
                let mut modulus = decode(code, p, n);
                modulus.push(1);
                let field = Field { p, n, modulus, q };
                if field.is_primitive() {
                    return field;
                }
            }
            unreachable!("every finite field has a primitive polynomial")
        }

        fn mul(&self, a: &[u64], b: &[u64]) -> Vec<u64> {
            let mut prod = vec![0u64; 2 * self.n];
            for (i, &x) in a.iter().enumerate() {
                for (j, &y) in b.iter().enumerate() {
                    prod[i + j] = (prod[i + j] + x * y) % self.p;
                }
            }
            for top in (self.n..2 * self.n).rev() {
                let c = prod[top];
                if c != 0 {
                    for k in 0..self.n {
                        prod[top - self.n + k] = (prod[top - self.n + k] + (self.p - c) * self.modulus[k]) % self.p;
                    }
                    prod[top] = 0;
                }
            }
            prod.truncate(self.n);
            prod
        }

        fn generator_power(&self, k: u64) -> Vec<u64> {
            let mut x = vec![0; self.n];
            if self.n == 1 {
                // Over F_p, x ≡ -c_0.
                x[0] = (self.p - self.modulus[0]) % self.p;
            } else {
                x[1] = 1;
            }
            let mut acc = decode(1, self.p, self.n);
            let mut k = k;
            while k > 0 {
                if k & 1 == 1 {
                    acc = self.mul(&acc, &x);
                }
                x = self.mul(&x, &x);
                k >>= 1;
            }
            acc
        }

        fn is_primitive(&self) -> bool {
            let order = self.q - 1;
            let one = decode(1, self.p, self.n);
            if self.generator_power(order) != one {
                return false;
            }
            crate::cyclo::divisors(order)
                .into_iter()
                .filter(|&r| r > 1 && crate::cyclo::is_prime(r))
                .all(|r| self.generator_power(order / r) != one)
        }

        /// Parity of `y ↦ g^x y` on `F_q`, by following its cycles.
        pub fn multiplication_parity(&self, x: u64) -> Sign {
            let a = self.generator_power(x);
            let mut seen = vec![false; self.q as usize];
            let mut transpositions = 0u64;
            for start in 0..self.q {
                if seen[start as usize] {
                    continue;
                }
                let mut len = 0;
                let mut y = start;
                while !seen[y as usize] {
                    seen[y as usize] = true;
                    y = encode(&self.mul(&a, &decode(y, self.p, self.n)), self.p);
                    len += 1;
                }
                transpositions += len - 1;
            }
            Sign::parity(transpositions as i128)
        }

        fn trace(&self, y: &[u64]) -> u64 {
            let mut total = 0;
            let mut conj = y.to_vec();
            for _ in 0..self.n {
                total += conj[0];
                let mut pow = decode(1, self.p, self.n);
                for _ in 0..self.p {
                    pow = self.mul(&pow, &conj);
                }
                conj = pow;
            }
            total % self.p
        }

        /// `Σ_{x ≠ 0} χ(x) ζ_p^{Tr x}` with `χ` the quadratic character.
        pub fn gauss_sum(&self) -> Cyclotomic {
            let mut coeffs = vec![0i64; self.p as usize];
            for k in 0..self.q - 1 {
                let chi = if k % 2 == 0 { 1 } else { -1 };
                coeffs[self.trace(&self.generator_power(k)) as usize] += chi;
            }
            Cyclotomic { p: self.p, coeffs }.reduce()
        }
    }

    fn decode(mut code: u64, p: u64, n: usize) -> Vec<u64> {
        let mut v = vec![0; n];
        for c in v.iter_mut() {
            *c = code % p;
            code /= p;
        }
        v
    }

    fn encode(v: &[u64], p: u64) -> u64 {
        v.iter().rev().fold(0, |acc, &c| acc * p + c)
    }

    /// An element of `Z[ζ_p]`, stored on `1, ζ, …, ζ^{p-1}` and reduced so
    /// that the last coefficient is zero.
    #[derive(Clone, Debug, PartialEq, Eq)]
    pub struct Cyclotomic {
        p: u64,
        coeffs: Vec<i64>,
    }

    impl Cyclotomic {
        pub fn integer(p: u64, n: i64) -> Cyclotomic {
            let mut coeffs = vec![0; p as usize];
            coeffs[0] = n;
            Cyclotomic { p, coeffs }.reduce()
        }

        fn reduce(mut self) -> Cyclotomic {
            let last = self.coeffs[self.p as usize - 1];
            for c in self.coeffs.iter_mut() {
                *c -= last;
            }
            self
        }

        pub fn mul(&self, other: &Cyclotomic) -> Cyclotomic {
            let p = self.p as usize;
            let mut coeffs = vec![0i64; p];
            for (i, &a) in self.coeffs.iter().enumerate() {
                for (j, &b) in other.coeffs.iter().enumerate() {
                    coeffs[(i + j) % p] += a * b;
                }
            }
            Cyclotomic { p: self.p, coeffs }.reduce()
        }

        pub fn neg(&self) -> Cyclotomic {
            Cyclotomic { p: self.p, coeffs: self.coeffs.iter().map(|c| -c).collect() }
        }
    }
}
