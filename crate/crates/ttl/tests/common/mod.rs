//! Oracles written without the library: explicit groups, finite fields and
//! cyclotomic integers.

#![allow(dead_code)]

use std::collections::BTreeSet;

pub fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

pub fn phi(n: u64) -> u64 {
    (1..=n).filter(|&k| gcd(k, n) == 1).count() as u64
}

/// Order of `q` mod `d` by repeated multiplication.
pub fn order(q: u64, d: u64) -> u64 {
    if d == 1 {
        return 1;
    }
    let mut x = q % d;
    let mut n = 1;
    while x != 1 {
        x = x * q % d;
        n += 1;
        assert!(n <= d, "{q} is not a unit mod {d}");
    }
    n
}

pub fn prime_power(q: u64) -> Option<(u64, u32)> {
    let p = (2..=q).find(|p| q % p == 0)?;
    let mut n = 0;
    let mut r = q;
    while r % p == 0 {
        r /= p;
        n += 1;
    }
    (r == 1).then_some((p, n))
}

/// `Gal(L/F)` for `E = F_f(ϖ^{1/e})` with `ϖ_E^e = ϖ_F` and `L` its Galois
/// closure: pairs `(a, b)` standing for `σ^a φ^b`, `φσφ⁻¹ = σ^q`, `φ` of
/// order `f·ord(q^f, e)` and `Gal(L/E) = ⟨φ^f⟩`.
pub struct TameGroup {
    pub e: u64,
    pub f: u64,
    pub phi_order: u64,
    /// `q^b mod e` for `b` below the order of `φ`.
    q_pows: Vec<u64>,
}

impl TameGroup {
    pub fn new(e: u64, f: u64, q: u64) -> TameGroup {
        let qf = (0..f).fold(1u64, |acc, _| acc * q % e);
        let phi_order = f * order(qf, e);
        let mut q_pows = vec![1 % e];
        for b in 1..phi_order as usize {
            q_pows.push(q_pows[b - 1] * q % e);
        }
        TameGroup { e, f, phi_order, q_pows }
    }

    pub fn mul(&self, (a, b): (u64, u64), (c, d): (u64, u64)) -> (u64, u64) {
        ((a + self.q_pows[b as usize] * c) % self.e, (b + d) % self.phi_order)
    }

    /// `(σ^aφ^b)⁻¹ = φ^{-b}σ^{-a}`.
    pub fn inv(&self, (a, b): (u64, u64)) -> (u64, u64) {
        let nb = (self.phi_order - b) % self.phi_order;
        self.mul((0, nb), ((self.e - a) % self.e, 0))
    }

    pub fn elements(&self) -> Vec<(u64, u64)> {
        (0..self.e).flat_map(|a| (0..self.phi_order).map(move |b| (a, b))).collect()
    }

    fn subgroup(&self) -> Vec<(u64, u64)> {
        (0..self.phi_order / self.f).map(|j| (0, j * self.f)).collect()
    }

    pub fn double_coset(&self, g: (u64, u64)) -> BTreeSet<(u64, u64)> {
        let h = self.subgroup();
        let mut out = BTreeSet::new();
        for &x in &h {
            for &y in &h {
                out.insert(self.mul(self.mul(x, g), y));
            }
        }
        out
    }

    /// Every double coset `HgH`, as sets of elements.
    pub fn double_cosets(&self) -> Vec<BTreeSet<(u64, u64)>> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for g in self.elements() {
            if seen.contains(&g) {
                continue;
            }
            let dc = self.double_coset(g);
            seen.extend(dc.iter().copied());
            out.push(dc);
        }
        out
    }

    /// Double cosets with `HgH = Hg⁻¹H` whose `φ`-exponent is `f/2` mod `f`.
    pub fn symmetric_unramified(&self) -> usize {
        self.double_cosets()
            .iter()
            .filter(|dc| {
                let g = *dc.iter().next().unwrap();
                g.1 % self.f != 0 && dc.contains(&self.inv(g))
            })
            .count()
    }
}

/// `F_q` with elements `0..q` read as base-`p` digit vectors, modulo a monic
/// irreducible polynomial found by trial division.
pub struct Gf {
    pub p: u64,
    pub n: usize,
    pub q: u64,
    modulus: Vec<u64>,
}

fn poly_rem(mut a: Vec<u64>, b: &[u64], p: u64) -> Vec<u64> {
    let db = b.len() - 1;
    while a.len() > db {
        let lead = *a.last().unwrap();
        let shift = a.len() - 1 - db;
        for (k, &c) in b.iter().enumerate() {
            a[shift + k] = (a[shift + k] + p * p - lead * c % p) % p;
        }
        a.pop();
    }
    a
}

fn digits(mut x: u64, p: u64, n: usize) -> Vec<u64> {
    (0..n)
        .map(|_| {
            let d = x % p;
            x /= p;
            d
        })
        .collect()
}

impl Gf {
    pub fn new(q: u64) -> Gf {
        let (p, n) = prime_power(q).expect("prime power");
        let n = n as usize;
        let monic = |deg: usize, code: u64| {
            let mut v = digits(code, p, deg);
            v.push(1);
            v
        };
        let irreducible = |f: &[u64]| {
            (1..=n / 2).all(|deg| (0..p.pow(deg as u32)).all(|c| poly_rem(f.to_vec(), &monic(deg, c), p).iter().any(|&x| x != 0)))
        };
        let modulus = (0..q).map(|c| monic(n, c)).find(|f| irreducible(f)).unwrap();
        Gf { p, n, q, modulus }
    }

    pub fn mul(&self, x: u64, y: u64) -> u64 {
        let (a, b) = (digits(x, self.p, self.n), digits(y, self.p, self.n));
        let mut prod = vec![0u64; 2 * self.n - 1];
        for (i, &u) in a.iter().enumerate() {
            for (j, &v) in b.iter().enumerate() {
                prod[i + j] = (prod[i + j] + u * v) % self.p;
            }
        }
        let r = poly_rem(prod, &self.modulus, self.p);
        r.iter().rev().fold(0, |acc, &c| acc * self.p + c)
    }

    pub fn add(&self, x: u64, y: u64) -> u64 {
        let (a, b) = (digits(x, self.p, self.n), digits(y, self.p, self.n));
        a.iter().zip(&b).rev().fold(0, |acc, (u, v)| acc * self.p + (u + v) % self.p)
    }

    pub fn pow(&self, x: u64, k: u64) -> u64 {
        (0..k).fold(1, |acc, _| self.mul(acc, x))
    }

    /// A generator of `F_q^×`, the first element of full order.
    pub fn generator(&self) -> u64 {
        (2..self.q)
            .chain(std::iter::once(1))
            .find(|&g| {
                let mut x = g;
                let mut n = 1;
                while x != 1 {
                    x = self.mul(x, g);
                    n += 1;
                }
                n == self.q - 1
            })
            .unwrap()
    }

    pub fn trace(&self, x: u64) -> u64 {
        let mut total = 0;
        let mut y = x;
        for _ in 0..self.n {
            total = self.add(total, y);
            y = self.pow(y, self.p);
        }
        assert!(total < self.p, "the trace lies in the prime field");
        total
    }

    pub fn is_square(&self, x: u64) -> bool {
        (1..self.q).any(|y| self.mul(y, y) == x)
    }
}

/// Sign of a permutation of `0..n` given by its images, from the cycle count.
pub fn permutation_sign(images: &[u64]) -> i8 {
    let mut seen = vec![false; images.len()];
    let mut cycles = 0;
    for s in 0..images.len() {
        if !seen[s] {
            cycles += 1;
            let mut x = s;
            while !seen[x] {
                seen[x] = true;
                x = images[x] as usize;
            }
        }
    }
    if (images.len() - cycles) % 2 == 0 {
        1
    } else {
        -1
    }
}

/// `Z[ζ_p]` with exact integer coefficients on `1, ζ, …, ζ^{p-1}`; equality
/// is taken modulo `1 + ζ + … + ζ^{p-1}`.
#[derive(Clone, Debug)]
pub struct ZZeta {
    pub p: usize,
    pub c: Vec<i64>,
}

impl ZZeta {
    pub fn int(p: usize, n: i64) -> ZZeta {
        let mut c = vec![0; p];
        c[0] = n;
        ZZeta { p, c }
    }

    pub fn mul(&self, o: &ZZeta) -> ZZeta {
        let mut c = vec![0; self.p];
        for i in 0..self.p {
            for j in 0..self.p {
                c[(i + j) % self.p] += self.c[i] * o.c[j];
            }
        }
        ZZeta { p: self.p, c }
    }

    pub fn same(&self, o: &ZZeta) -> bool {
        let d: Vec<i64> = self.c.iter().zip(&o.c).map(|(a, b)| a - b).collect();
        d.iter().all(|&x| x == d[0])
    }

    /// The embedding `ζ ↦ exp(2πi/p)`.
    pub fn complex(&self) -> (f64, f64) {
        let mut re = 0.0;
        let mut im = 0.0;
        for (k, &a) in self.c.iter().enumerate() {
            let t = 2.0 * std::f64::consts::PI * k as f64 / self.p as f64;
            re += a as f64 * t.cos();
            im += a as f64 * t.sin();
        }
        (re, im)
    }
}

/// The quadratic Gauss sum `Σ_x χ(x) ζ_p^{Tr x}` of `F_q`, `q` odd.
pub fn gauss_sum(field: &Gf) -> ZZeta {
    let mut g = ZZeta::int(field.p as usize, 0);
    for x in 1..field.q {
        let chi = if field.is_square(x) { 1 } else { -1 };
        g.c[field.trace(x) as usize] += chi;
    }
    g
}

/// `g/√q` as a quarter turn `k/4`, read off the complex embedding. The four
/// candidates are at distance `√2` from each other on the unit circle, so
/// rounding is exact for these sizes.
pub fn quarter_turn(g: &ZZeta, q: u64) -> u64 {
    let (re, im) = g.complex();
    let s = (q as f64).sqrt();
    let (re, im) = (re / s, im / s);
    assert!((re * re + im * im - 1.0).abs() < 1e-6, "|g|² = q");
    [(1.0, 0.0), (0.0, 1.0), (-1.0, 0.0), (0.0, -1.0)]
        .iter()
        .position(|&(x, y)| (re - x).abs() < 1e-6 && (im - y).abs() < 1e-6)
        .expect("normalized quadratic Gauss sums are fourth roots of unity") as u64
}
